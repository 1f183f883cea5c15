//! Command-line front end: verify MTC files, generate benchmark programs,
//! and dump solver input formats.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mtbmc_core::benchgen::{gen_bench, BenchSpec, Family, Variant};
use mtbmc_core::encoder::{blast_formula, encode_schedule, encode_uw, smtlib};
use mtbmc_core::frontend::{load, FrontendError, SourceProgram};
use mtbmc_core::report::Report;
use mtbmc_core::strategies::{verify, Strategy, VerifyConfig};
use mtbmc_core::symex::{Explorer, Mode, Session};

#[derive(Parser)]
#[command(
    name = "mtbmc",
    about = "Bounded model checker for multi-threaded MTC programs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one or more MTC programs.
    Verify(VerifyArgs),
    /// Generate a benchmark program.
    Gen(GenArgs),
    /// Encode a program and write the solver input without solving.
    Dump(DumpArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Lazy,
    Schedule,
    Uw,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Lazy => Strategy::Lazy,
            StrategyArg::Schedule => Strategy::Schedule,
            StrategyArg::Uw => Strategy::Uw,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PorArg {
    On,
    Off,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Human,
    Machine,
}

#[derive(Args)]
struct CommonVerifyArgs {
    /// Verification strategy.
    #[arg(long, value_enum, default_value = "lazy")]
    strategy: StrategyArg,
    /// Loop unwinding bound.
    #[arg(long, default_value_t = 10)]
    unwind: u32,
    /// Disable the unwinding assertions (truncated loops go unreported).
    #[arg(long)]
    no_unwinding_assertions: bool,
    /// Partial-order reductions.
    #[arg(long, value_enum, default_value = "on")]
    por: PorArg,
    /// Bit width of `int`.
    #[arg(long, default_value_t = 32)]
    bitwidth: u32,
    /// Random seed (also via MTBMC_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Abort each solver call after this many conflicts.
    #[arg(long)]
    conflict_limit: Option<u64>,
    /// Unsat-core size cap for the widening strategy.
    #[arg(long, default_value_t = 500)]
    max_core: usize,
    /// Emit an obligation for every division by zero.
    #[arg(long)]
    check_div_zero: bool,
}

impl CommonVerifyArgs {
    fn to_config(&self) -> VerifyConfig {
        let seed = self
            .seed
            .or_else(|| std::env::var("MTBMC_SEED").ok().and_then(|s| s.parse().ok()))
            .unwrap_or(0);
        VerifyConfig {
            strategy: self.strategy.into(),
            unwind: self.unwind,
            width: self.bitwidth,
            por: self.por == PorArg::On,
            unwinding_assertions: !self.no_unwinding_assertions,
            seed,
            conflict_limit: self.conflict_limit,
            core_cap: self.max_core,
            exhaustive: false,
            check_div_zero: self.check_div_zero,
            dump_smtlib: None,
            dump_cnf: None,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Input .mtc files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    common: CommonVerifyArgs,
    /// Keep exploring after the first violation (lazy strategy).
    #[arg(long)]
    exhaustive: bool,
    /// Output format.
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
    /// Print the counterexample trace.
    #[arg(long)]
    trace: bool,
    /// Write one numbered .smt2 file per solver call.
    #[arg(long)]
    dump_smtlib: Option<PathBuf>,
    /// Write one numbered DIMACS file per solver call.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Benchmark family: philosophers | lock-order | signal-handshake.
    #[arg(long)]
    family: String,
    /// Number of threads.
    #[arg(long)]
    size: usize,
    /// Property variant: unsat | sat | buggy.
    #[arg(long)]
    variant: String,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Input .mtc file.
    input: PathBuf,
    #[command(flatten)]
    common: CommonVerifyArgs,
    /// Write the SMT-LIB2 script here.
    #[arg(long)]
    smtlib: Option<PathBuf>,
    /// Write the DIMACS CNF here.
    #[arg(long)]
    cnf: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => run_verify(args),
        Command::Gen(args) => run_gen(args),
        Command::Dump(args) => run_dump(args),
    }
}

fn load_file(
    path: &PathBuf,
) -> Result<(SourceProgram, mtbmc_core::frontend::TypedProgram), String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let src = SourceProgram::new(text, path.display().to_string());
    match load(&src) {
        Ok(tp) => Ok((src, tp)),
        Err(FrontendError::Parse(e)) => Err(format!("{}:{e}", path.display())),
        Err(FrontendError::Type(e)) => Err(format!("{}:{e}", path.display())),
    }
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let mut config = args.common.to_config();
    config.exhaustive = args.exhaustive;
    config.dump_smtlib = args.dump_smtlib.clone();
    config.dump_cnf = args.dump_cnf.clone();

    let mut worst = 0i32;
    for input in &args.inputs {
        let (src, tp) = match load_file(input) {
            Ok(x) => x,
            Err(msg) => {
                eprintln!("{msg}");
                return ExitCode::from(2);
            }
        };
        let report = match verify(&tp, &config) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("{}: verification error: {e}", input.display());
                return ExitCode::from(2);
            }
        };
        print_report(&src.origin, &report, args.format, args.trace);
        worst = worst.max(report.verdict.exit_code());
    }
    ExitCode::from(worst as u8)
}

fn print_report(origin: &str, report: &Report, format: FormatArg, trace: bool) {
    for w in &report.warnings {
        eprintln!("{origin}:{w}");
    }
    match format {
        FormatArg::Machine => {
            print!("{}", report.machine_format());
        }
        FormatArg::Human => {
            println!("{origin}: {}", report.verdict.label());
            println!(
                "  interleavings={} failed={} iterations={} solver_calls={} time={}ms",
                report.stats.interleavings,
                report.stats.failed_interleavings,
                report.stats.iterations,
                report.stats.solver_calls,
                report.stats.wall_time.as_millis()
            );
            if let Some(cex) = &report.counterexample {
                println!(
                    "  violation: {} at {}:{} ({})",
                    cex.violation.tag.label(),
                    origin,
                    cex.violation.span.line,
                    cex.violation.desc
                );
            }
        }
    }
    if trace {
        for line in report.trace_lines(origin) {
            println!("{line}");
        }
    }
}

fn run_gen(args: GenArgs) -> ExitCode {
    let Some(family) = Family::parse(&args.family) else {
        eprintln!("unknown family `{}`", args.family);
        return ExitCode::from(2);
    };
    let Some(variant) = Variant::parse(&args.variant) else {
        eprintln!("unknown variant `{}`", args.variant);
        return ExitCode::from(2);
    };
    match gen_bench(&BenchSpec { family, size: args.size, variant }) {
        Ok(text) => {
            if let Some(path) = args.output {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn run_dump(args: DumpArgs) -> ExitCode {
    let config = args.common.to_config();
    let (_src, tp) = match load_file(&args.input) {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let mut session = Session::prepare(&tp, config.unwind, config.unwinding_assertions);
    let scfg = mtbmc_core::symex::SymexConfig {
        width: config.width,
        por: config.por,
        check_div_zero: config.check_div_zero,
        ..Default::default()
    };
    let (mut explorer, state) =
        Explorer::new(&mut session.ctx, &tp, &session.cfgs, scfg, Mode::Tree);
    let init = explorer.init.clone();
    let (events, info) = match explorer.explore_tree(state) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let base = encode_schedule(&mut session.ctx, &init, events, &info, &[]);
    let formula = if config.strategy == Strategy::Uw {
        encode_uw(base, &info.literals)
    } else {
        base
    };
    let active: Vec<(String, mtbmc_core::encoder::TermId)> = formula.selectors.clone();
    if let Some(path) = &args.smtlib {
        let text = smtlib::to_smtlib(&session.ctx, &formula, &active);
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if let Some(path) = &args.cnf {
        let blasted = blast_formula(&mut session.ctx, &formula);
        if let Err(e) = std::fs::write(path, blasted.blasted.cnf.to_dimacs()) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}
