//! The three verification drivers.
//!
//! Lazy: enumerate pruned interleavings depth-first (ascending thread id at
//! every choice point) and solve each path's formula individually, stopping
//! at the first satisfiable one. Schedule recording: encode every pruned
//! interleaving into one formula over thread-selection variables and solve
//! once. Underapproximation widening: start from the schedule formula with
//! every control literal forced false, and relax exactly the literals the
//! unsat core names until a model appears (violation) or the core stops
//! mentioning them (proof).
//!
//! Every VIOLATED verdict carries a counterexample that is replayed on the
//! concrete reference interpreter before it is reported.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::cfg::NodeId;
use crate::encoder::{
    blast_formula, encode_lazy_events, encode_schedule, encode_uw, smtlib, BlastedFormula,
    Formula, Sort, TermCtx, TermId, Val, VarId,
};
use crate::frontend::TypedProgram;
use crate::oracle::Oracle;
use crate::report::{CexStep, CexViolation, Counterexample, Report, Stats, Verdict};
use crate::solver::{minimize_core, solve, Lit, Model, SolveResult, SolverConfig};
use crate::symex::{
    Event, ExploreError, Explorer, Mode, ObligationTag, Session, SymexConfig, VisitFlow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Lazy,
    Schedule,
    Uw,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Lazy => "lazy",
            Strategy::Schedule => "schedule",
            Strategy::Uw => "uw",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub strategy: Strategy,
    pub unwind: u32,
    pub width: u32,
    pub por: bool,
    pub unwinding_assertions: bool,
    pub seed: u64,
    pub conflict_limit: Option<u64>,
    /// Unsat cores larger than this make widening relax everything left.
    pub core_cap: usize,
    /// Lazy mode: keep exploring after the first violation.
    pub exhaustive: bool,
    pub check_div_zero: bool,
    /// Write one numbered `.smt2` file per solver call under this stem.
    pub dump_smtlib: Option<std::path::PathBuf>,
    /// Write one numbered `.cnf` (DIMACS) file per solver call.
    pub dump_cnf: Option<std::path::PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            strategy: Strategy::Lazy,
            unwind: 10,
            width: 32,
            por: true,
            unwinding_assertions: true,
            seed: 0,
            conflict_limit: None,
            core_cap: 500,
            exhaustive: false,
            check_div_zero: false,
            dump_smtlib: None,
            dump_cnf: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("counterexample replay diverged: {0}")]
    Replay(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub fn verify(tp: &TypedProgram, config: &VerifyConfig) -> Result<Report, VerifyError> {
    match config.strategy {
        Strategy::Lazy => verify_lazy(tp, config),
        Strategy::Schedule => verify_schedule(tp, config),
        Strategy::Uw => verify_uw(tp, config),
    }
}

fn symex_config(config: &VerifyConfig) -> SymexConfig {
    SymexConfig {
        width: config.width,
        por: config.por,
        check_div_zero: config.check_div_zero,
        ..SymexConfig::default()
    }
}

fn solver_config(config: &VerifyConfig) -> SolverConfig {
    SolverConfig { seed: config.seed, conflict_limit: config.conflict_limit }
}

/// Side-channel collected while solving: formula dumps are numbered in call
/// order across one verification run.
struct Dumper<'c> {
    config: &'c VerifyConfig,
    calls: u64,
}

impl<'c> Dumper<'c> {
    fn new(config: &'c VerifyConfig) -> Self {
        Dumper { config, calls: 0 }
    }

    fn before_solve(
        &mut self,
        ctx: &TermCtx,
        formula: &Formula,
        active: &[(String, TermId)],
        blasted: &BlastedFormula,
    ) -> Result<(), std::io::Error> {
        self.calls += 1;
        if let Some(stem) = &self.config.dump_smtlib {
            let text = smtlib::to_smtlib(ctx, formula, active);
            std::fs::write(numbered(stem, self.calls, "smt2"), text)?;
        }
        if let Some(stem) = &self.config.dump_cnf {
            std::fs::write(numbered(stem, self.calls, "cnf"), blasted.blasted.cnf.to_dimacs())?;
        }
        Ok(())
    }
}

fn numbered(stem: &std::path::Path, n: u64, ext: &str) -> std::path::PathBuf {
    let base = stem.with_extension("");
    let name = format!(
        "{}_{n:04}.{ext}",
        base.file_name().and_then(|s| s.to_str()).unwrap_or("formula")
    );
    base.with_file_name(name)
}

/// Outcome of solving one formula with unwinding-assertion triage.
enum SolveOutcome {
    Unsat(Vec<Lit>),
    /// A real (non-unwinding) obligation is violated.
    Violated(Model),
    /// Only unwinding obligations can be violated at this depth.
    BoundOnly,
    ResourceOut,
}

/// Solve, and if the only violated obligations are loop-bound checks,
/// re-solve with those disabled so a real violation is never masked.
#[allow(clippy::too_many_arguments)]
fn solve_with_bound_triage(
    ctx: &TermCtx,
    formula: &Formula,
    blasted: &BlastedFormula,
    assumptions: &[Lit],
    sc: &SolverConfig,
    stats: &mut Stats,
    dumper: &mut Dumper<'_>,
    active: &[(String, TermId)],
) -> Result<SolveOutcome, VerifyError> {
    dumper.before_solve(ctx, formula, active, blasted)?;
    stats.solver_calls += 1;
    match solve(&blasted.blasted.cnf, assumptions, sc) {
        SolveResult::ResourceOut => Ok(SolveOutcome::ResourceOut),
        SolveResult::Unsat(core) => Ok(SolveOutcome::Unsat(core)),
        SolveResult::Sat(model) => {
            let violated = blasted.violated(&model);
            let obligations: Vec<_> = formula.obligations().collect();
            let real = violated
                .iter()
                .any(|&i| obligations[i].tag != ObligationTag::Unwinding);
            if real {
                return Ok(SolveOutcome::Violated(model));
            }
            // Mask the unwinding obligations and ask again.
            let mut masked: Vec<Lit> = assumptions.to_vec();
            for (i, ob) in obligations.iter().enumerate() {
                if ob.tag == ObligationTag::Unwinding {
                    masked.push(blasted.obligation_lits[i].negate());
                }
            }
            stats.solver_calls += 1;
            match solve(&blasted.blasted.cnf, &masked, sc) {
                SolveResult::Sat(model) => Ok(SolveOutcome::Violated(model)),
                SolveResult::Unsat(_) => Ok(SolveOutcome::BoundOnly),
                SolveResult::ResourceOut => Ok(SolveOutcome::ResourceOut),
            }
        }
    }
}

pub fn verify_lazy(tp: &TypedProgram, config: &VerifyConfig) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut session = Session::prepare(tp, config.unwind, config.unwinding_assertions);
    let scfg = symex_config(config);
    let sc = solver_config(config);
    let (mut explorer, state) = Explorer::new(
        &mut session.ctx,
        tp,
        &session.cfgs,
        scfg,
        Mode::Lazy,
    );
    let init = explorer.init.clone();

    let mut stats = Stats::default();
    let mut bound_insufficient = false;
    let mut resource_out = false;
    let mut dumper = Dumper::new(config);
    let mut first_violation: Option<(Model, BlastedFormula, Vec<Event>)> = None;
    let mut io_error: Option<VerifyError> = None;
    let exhaustive = config.exhaustive;

    explorer.explore_lazy(state, &mut |ctx, leaf| {
        stats.interleavings += 1;
        let formula = encode_lazy_events(&init, leaf.events);
        let blasted = blast_formula(ctx, &formula);
        match solve_with_bound_triage(
            ctx,
            &formula,
            &blasted,
            &[],
            &sc,
            &mut stats,
            &mut dumper,
            &[],
        ) {
            Err(e) => {
                io_error = Some(e);
                VisitFlow::Stop
            }
            Ok(SolveOutcome::Unsat(_)) => VisitFlow::Continue,
            Ok(SolveOutcome::BoundOnly) => {
                stats.failed_interleavings += 1;
                bound_insufficient = true;
                VisitFlow::Continue
            }
            Ok(SolveOutcome::ResourceOut) => {
                resource_out = true;
                VisitFlow::Stop
            }
            Ok(SolveOutcome::Violated(model)) => {
                stats.failed_interleavings += 1;
                if first_violation.is_none() {
                    first_violation = Some((model, blasted, leaf.events.to_vec()));
                }
                if exhaustive {
                    VisitFlow::Continue
                } else {
                    VisitFlow::Stop
                }
            }
        }
    })?;

    if let Some(e) = io_error {
        return Err(e);
    }
    let warnings = explorer.warnings.clone();
    let verdict = if let Some((model, blasted, events)) = first_violation {
        let (cex, replay) = decode_counterexample(&session.ctx, &blasted, &model, &events)?;
        validate_replay(tp, &session.cfgs, config, &cex, &replay)?;
        let mut report = Report {
            verdict: Verdict::Violated,
            counterexample: Some(cex),
            stats,
            warnings,
        };
        report.stats.wall_time = start.elapsed();
        return Ok(report);
    } else if resource_out {
        Verdict::ResourceOut
    } else if bound_insufficient {
        Verdict::BoundInsufficient
    } else {
        Verdict::Safe
    };
    stats.wall_time = start.elapsed();
    Ok(Report { verdict, counterexample: None, stats, warnings })
}

/// Count the interleavings the pruned exploration distinguishes: the leaf
/// count of the lazy tree (schedule formulas represent exactly these).
fn count_interleavings(tp: &TypedProgram, config: &VerifyConfig) -> Result<u64, VerifyError> {
    let mut session = Session::prepare(tp, config.unwind, config.unwinding_assertions);
    let scfg = symex_config(config);
    let (mut explorer, state) =
        Explorer::new(&mut session.ctx, tp, &session.cfgs, scfg, Mode::Lazy);
    let mut count = 0u64;
    explorer.explore_lazy(state, &mut |_, _| {
        count += 1;
        VisitFlow::Continue
    })?;
    Ok(count)
}

pub fn verify_schedule(tp: &TypedProgram, config: &VerifyConfig) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut session = Session::prepare(tp, config.unwind, config.unwinding_assertions);
    let scfg = symex_config(config);
    let sc = solver_config(config);
    let (mut explorer, state) =
        Explorer::new(&mut session.ctx, tp, &session.cfgs, scfg, Mode::Tree);
    let init = explorer.init.clone();
    let (events, info) = explorer.explore_tree(state)?;
    let warnings = explorer.warnings.clone();

    let formula = encode_schedule(&mut session.ctx, &init, events, &info, &[]);
    let blasted = blast_formula(&mut session.ctx, &formula);
    let mut stats = Stats::default();
    stats.interleavings = count_interleavings(tp, config)?;
    let mut dumper = Dumper::new(config);

    let outcome = solve_with_bound_triage(
        &session.ctx,
        &formula,
        &blasted,
        &[],
        &sc,
        &mut stats,
        &mut dumper,
        &[],
    )?;
    let (verdict, counterexample) = match outcome {
        SolveOutcome::Unsat(_) => (Verdict::Safe, None),
        SolveOutcome::BoundOnly => (Verdict::BoundInsufficient, None),
        SolveOutcome::ResourceOut => (Verdict::ResourceOut, None),
        SolveOutcome::Violated(model) => {
            stats.failed_interleavings = 1;
            let (cex, replay) =
                decode_counterexample(&session.ctx, &blasted, &model, &formula.events)?;
            validate_replay(tp, &session.cfgs, config, &cex, &replay)?;
            (Verdict::Violated, Some(cex))
        }
    };
    stats.wall_time = start.elapsed();
    Ok(Report { verdict, counterexample, stats, warnings })
}

pub fn verify_uw(tp: &TypedProgram, config: &VerifyConfig) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut session = Session::prepare(tp, config.unwind, config.unwinding_assertions);
    let scfg = symex_config(config);
    let sc = solver_config(config);
    let (mut explorer, state) =
        Explorer::new(&mut session.ctx, tp, &session.cfgs, scfg, Mode::Tree);
    let init = explorer.init.clone();
    let (events, info) = explorer.explore_tree(state)?;
    let warnings = explorer.warnings.clone();

    let base = encode_schedule(&mut session.ctx, &init, events, &info, &[]);
    let formula = encode_uw(base, &info.literals);
    let blasted = blast_formula(&mut session.ctx, &formula);

    let mut stats = Stats::default();
    stats.interleavings = count_interleavings(tp, config)?;
    let mut dumper = Dumper::new(config);

    // Initially every control literal is forced false: the deepest
    // underapproximation. Each unsat core names the literals to relax.
    let mut active: Vec<(String, Lit)> = formula
        .selectors
        .iter()
        .map(|(name, _)| (name.clone(), blasted.selector_lits[name]))
        .collect();
    let mut masked_unwinding: Vec<Lit> = Vec::new();
    let mut bound_insufficient = false;

    let (verdict, counterexample) = loop {
        stats.iterations += 1;
        let mut assumptions: Vec<Lit> = active.iter().map(|(_, l)| *l).collect();
        assumptions.extend_from_slice(&masked_unwinding);
        let active_terms: Vec<(String, TermId)> = formula
            .selectors
            .iter()
            .filter(|(name, _)| active.iter().any(|(n, _)| n == name))
            .map(|(n, t)| (n.clone(), *t))
            .collect();
        match solve_with_bound_triage(
            &session.ctx,
            &formula,
            &blasted,
            &assumptions,
            &sc,
            &mut stats,
            &mut dumper,
            &active_terms,
        )? {
            SolveOutcome::ResourceOut => break (Verdict::ResourceOut, None),
            SolveOutcome::Violated(model) => {
                stats.failed_interleavings = 1;
                let (cex, replay) =
                    decode_counterexample(&session.ctx, &blasted, &model, &formula.events)?;
                validate_replay(tp, &session.cfgs, config, &cex, &replay)?;
                break (Verdict::Violated, Some(cex));
            }
            SolveOutcome::BoundOnly => {
                // The bound truncated behavior inside this underapproximation;
                // keep widening with the unwinding checks masked so real
                // violations can still surface.
                bound_insufficient = true;
                let obligations: Vec<_> = formula.obligations().collect();
                for (i, ob) in obligations.iter().enumerate() {
                    if ob.tag == ObligationTag::Unwinding {
                        let l = blasted.obligation_lits[i].negate();
                        if !masked_unwinding.contains(&l) {
                            masked_unwinding.push(l);
                        }
                    }
                }
                continue;
            }
            SolveOutcome::Unsat(core) => {
                let core_names: Vec<String> = active
                    .iter()
                    .filter(|(_, l)| core.contains(l))
                    .map(|(n, _)| n.clone())
                    .collect();
                if core_names.is_empty() {
                    // The proof no longer depends on the underapproximation.
                    break (
                        if bound_insufficient {
                            Verdict::BoundInsufficient
                        } else {
                            Verdict::Safe
                        },
                        None,
                    );
                }
                let relax: BTreeSet<String> = if core_names.len() > config.core_cap {
                    stats.core_cap_fallbacks += 1;
                    active.iter().map(|(n, _)| n.clone()).collect()
                } else {
                    // Deletion-based minimization keeps iteration counts
                    // meaningful when the engine returns sloppy cores.
                    let core_lits: Vec<Lit> = active
                        .iter()
                        .filter(|(n, _)| core_names.contains(n))
                        .map(|(_, l)| *l)
                        .collect();
                    stats.solver_calls += core_lits.len() as u64;
                    let minimized = minimize_core(&blasted.blasted.cnf, &core_lits, &sc);
                    let keep: Vec<String> = active
                        .iter()
                        .filter(|(_, l)| minimized.contains(l))
                        .map(|(n, _)| n.clone())
                        .collect();
                    if keep.is_empty() {
                        break (
                            if bound_insufficient {
                                Verdict::BoundInsufficient
                            } else {
                                Verdict::Safe
                            },
                            None,
                        );
                    }
                    keep.into_iter().collect()
                };
                active.retain(|(n, _)| !relax.contains(n));
            }
        }
    };
    stats.wall_time = start.elapsed();
    Ok(Report { verdict, counterexample, stats, warnings })
}

/// Everything the concrete replayer needs besides the source program.
struct ReplayData {
    guide: Vec<(usize, NodeId)>,
    nondets: Vec<u64>,
    wakes: Vec<usize>,
}

/// Read a model back into an ordered violating trace: events whose guards
/// hold under the model, up to the first violated obligation.
fn decode_counterexample(
    ctx: &TermCtx,
    blasted: &BlastedFormula,
    model: &Model,
    events: &[Event],
) -> Result<(Counterexample, ReplayData), VerifyError> {
    let env = blasted.blasted.model_env(model);

    // First violated obligation in event order.
    let violated = blasted.violated(model);
    let first = violated
        .iter()
        .map(|&i| blasted.obligation_refs[i])
        .min_by_key(|r| (r.event, r.slot))
        .ok_or_else(|| VerifyError::Replay("sat model violates no obligation".into()))?;

    let mut steps = Vec::new();
    let mut schedule: Vec<(u32, usize)> = Vec::new();
    let mut replay = ReplayData { guide: Vec::new(), nondets: Vec::new(), wakes: Vec::new() };
    let ts_var = ctx.lookup("__ts");
    let nd_var = ctx.lookup("__nd");
    let wake_var = ctx.lookup("__wake");
    let mut nd_versions: Vec<u32> = Vec::new();
    let mut wake_versions: Vec<u32> = Vec::new();

    for (i, e) in events.iter().enumerate() {
        if i > first.event {
            break;
        }
        if ctx.eval(e.guard, &env) != Val::B(true) {
            continue;
        }
        let mut assigns = Vec::new();
        for (var, _version, term) in &e.eqs {
            let value = ctx.eval(*term, &env);
            let text = match (value, ctx.sort(*term)) {
                (Val::B(b), _) => b.to_string(),
                (Val::Bv(v), Sort::Bv(w)) => {
                    crate::encoder::bits::to_signed(v, w).to_string()
                }
                (Val::Bv(v), _) => v.to_string(),
            };
            assigns.push((ctx.name(*var).to_string(), text));
            if let Some(nd) = nd_var {
                ctx.collect_var_occurrences(*term, nd, &mut nd_versions);
            }
        }
        if let Some(w) = wake_var {
            ctx.collect_var_occurrences(e.guard, w, &mut wake_versions);
        }
        steps.push(CexStep {
            thread: e.thread,
            thread_name: thread_label(e.thread),
            span: e.span,
            desc: e.desc.clone(),
            assigns,
        });
        if let Some(node) = e.node {
            replay.guide.push((e.thread, node));
        }
        if let Some(ts) = ts_var {
            collect_ts(ctx, e.guard, ts, &env, &mut schedule);
        }
        if i == first.event {
            break;
        }
    }

    if let Some(nd) = nd_var {
        for v in nd_versions {
            replay.nondets.push(match env(nd, v) {
                Val::Bv(x) => x,
                Val::B(b) => b as u64,
            });
        }
    }
    if let Some(w) = wake_var {
        for v in wake_versions {
            if let Val::Bv(x) = env(w, v) {
                replay.wakes.push(x as usize);
            }
        }
    }

    let ob = &events[first.event].obligations[first.slot];
    let cex = Counterexample {
        steps,
        violation: CexViolation {
            tag: ob.tag,
            thread: ob.thread,
            thread_name: thread_label(ob.thread),
            span: ob.span,
            desc: ob.desc.clone(),
        },
        schedule,
    };
    Ok((cex, replay))
}

fn thread_label(t: usize) -> String {
    if t == 0 {
        "main".to_string()
    } else {
        format!("T{t}")
    }
}

/// Pull `__ts@block = j` assignments out of a guard under the model.
fn collect_ts(
    ctx: &TermCtx,
    guard: TermId,
    ts: VarId,
    env: &dyn Fn(VarId, u32) -> Val,
    out: &mut Vec<(u32, usize)>,
) {
    let mut vars = std::collections::BTreeMap::new();
    ctx.collect_vars(guard, &mut vars);
    for ((var, version), _) in vars {
        if var == ts && !out.iter().any(|(b, _)| *b == version) {
            if let Val::Bv(v) = env(var, version) {
                out.push((version, v as usize));
            }
        }
    }
    out.sort();
}

/// Replay the counterexample on the concrete interpreter; the reported
/// violation must reproduce exactly (same tag at the same location, or the
/// fully-blocked final state for deadlocks).
fn validate_replay(
    tp: &TypedProgram,
    cfgs: &crate::cfg::UnrolledSet,
    config: &VerifyConfig,
    cex: &Counterexample,
    replay: &ReplayData,
) -> Result<(), VerifyError> {
    let oracle = Oracle::from_unrolled(tp, cfgs, config.width);
    let end = oracle
        .replay(&replay.guide, &replay.nondets, &replay.wakes)
        .map_err(|e| VerifyError::Replay(e.to_string()))?;
    match (&end.violation, cex.violation.tag) {
        (_, ObligationTag::Deadlock) => {
            if end.violation.is_none() && !end.deadlocked {
                return Err(VerifyError::Replay(
                    "reported deadlock did not reproduce concretely".into(),
                ));
            }
        }
        (Some(v), tag) => {
            if v.tag != tag || v.span.line != cex.violation.span.line {
                return Err(VerifyError::Replay(format!(
                    "replay reached {:?} at line {}, reported {:?} at line {}",
                    v.tag, v.span.line, tag, cex.violation.span.line
                )));
            }
        }
        (None, _) => {
            return Err(VerifyError::Replay(
                "replay completed without reaching the reported violation".into(),
            ))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load, SourceProgram};

    fn run(src: &str, config: &VerifyConfig) -> Report {
        let tp = load(&SourceProgram::inline(src)).expect("program loads");
        verify(&tp, config).expect("verification runs")
    }

    #[test]
    fn fig1_lazy_violated_two_interleavings_one_failed() {
        let cfg = VerifyConfig { width: 8, ..VerifyConfig::default() };
        let report = run(crate::frontend::FIG1, &cfg);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.stats.interleavings, 2, "stats: {:?}", report.stats);
        assert_eq!(report.stats.failed_interleavings, 1);
        let cex = report.counterexample.expect("counterexample");
        assert_eq!(cex.violation.tag, ObligationTag::Assertion);
    }

    #[test]
    fn fig1_schedule_violated_with_decoded_schedule() {
        let cfg = VerifyConfig {
            width: 8,
            strategy: Strategy::Schedule,
            ..VerifyConfig::default()
        };
        let report = run(crate::frontend::FIG1, &cfg);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.stats.interleavings, 2);
        assert_eq!(report.stats.solver_calls, 1, "one solver call for schedule mode");
        let cex = report.counterexample.expect("counterexample");
        assert_eq!(cex.schedule, vec![(1, 2), (2, 1)], "ts1=Ty, ts2=Tx");
    }

    #[test]
    fn fig1_uw_violated_in_three_iterations() {
        let cfg = VerifyConfig { width: 8, strategy: Strategy::Uw, ..VerifyConfig::default() };
        let report = run(crate::frontend::FIG1, &cfg);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.stats.iterations, 3, "stats: {:?}", report.stats);
    }

    #[test]
    fn empty_program_is_safe_everywhere() {
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { strategy, ..VerifyConfig::default() };
            let report = run("main { }", &cfg);
            assert_eq!(report.verdict, Verdict::Safe, "{strategy:?}");
        }
    }

    #[test]
    fn single_thread_assert_false_found_by_all() {
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { width: 8, strategy, ..VerifyConfig::default() };
            let report = run("int x;\nmain { x = 1; assert(x == 2); }", &cfg);
            assert_eq!(report.verdict, Verdict::Violated, "{strategy:?}");
        }
    }
}

#[cfg(test)]
mod bench_tests {
    use super::*;
    use crate::benchgen::{gen_bench, BenchSpec, Family, Variant};
    use crate::frontend::{load, SourceProgram};

    fn bench(family: Family, size: usize, variant: Variant) -> crate::frontend::TypedProgram {
        let src = gen_bench(&BenchSpec { family, size, variant }).unwrap();
        load(&SourceProgram::inline(&src)).unwrap()
    }

    #[test]
    fn philosophers_unsat_lazy_counts_are_factorials() {
        for (n, expect) in [(2u64, 2u64), (3, 6), (4, 24)] {
            let tp = bench(Family::Philosophers, n as usize, Variant::UnsatProperty);
            let cfg = VerifyConfig { width: 8, ..VerifyConfig::default() };
            let report = verify(&tp, &cfg).unwrap();
            assert_eq!(report.verdict, Verdict::Safe, "n={n}");
            assert_eq!(report.stats.interleavings, expect, "n={n}");
            assert_eq!(report.stats.failed_interleavings, 0, "n={n}");
        }
    }

    #[test]
    fn single_philosopher_has_one_interleaving() {
        // With one thread there is no scheduling choice; the simultaneity
        // property degenerates (the lone philosopher is "everyone"), so
        // the point here is the interleaving count.
        let tp = bench(Family::Philosophers, 1, Variant::UnsatProperty);
        let cfg = VerifyConfig { width: 8, ..VerifyConfig::default() };
        let report = verify(&tp, &cfg).unwrap();
        assert_eq!(report.stats.interleavings, 1);
    }

    #[test]
    fn philosophers_sat_exhaustive_all_fail() {
        for (n, expect) in [(2u64, 2u64), (3, 6)] {
            let tp = bench(Family::Philosophers, n as usize, Variant::SatProperty);
            let cfg = VerifyConfig { width: 8, exhaustive: true, ..VerifyConfig::default() };
            let report = verify(&tp, &cfg).unwrap();
            assert_eq!(report.verdict, Verdict::Violated, "n={n}");
            assert_eq!(report.stats.interleavings, expect, "n={n}");
            assert_eq!(report.stats.failed_interleavings, expect, "n={n}");
        }
    }

    #[test]
    fn lock_order_buggy_deadlocks_everywhere() {
        let tp = bench(Family::LockOrder, 2, Variant::Buggy);
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { width: 8, strategy, ..VerifyConfig::default() };
            let report = verify(&tp, &cfg).unwrap();
            assert_eq!(report.verdict, Verdict::Violated, "{strategy:?}");
            let cex = report.counterexample.unwrap();
            assert_eq!(cex.violation.tag, ObligationTag::Deadlock, "{strategy:?}");
        }
    }

    #[test]
    fn lock_order_consistent_is_safe() {
        let tp = bench(Family::LockOrder, 2, Variant::UnsatProperty);
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { width: 8, strategy, ..VerifyConfig::default() };
            let report = verify(&tp, &cfg).unwrap();
            assert_eq!(report.verdict, Verdict::Safe, "{strategy:?}");
        }
    }

    #[test]
    fn double_unlock_reports_bad_unlock() {
        let tp = bench(Family::LockOrder, 2, Variant::SatProperty);
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { width: 8, strategy, ..VerifyConfig::default() };
            let report = verify(&tp, &cfg).unwrap();
            assert_eq!(report.verdict, Verdict::Violated, "{strategy:?}");
            let cex = report.counterexample.unwrap();
            assert_eq!(cex.violation.tag, ObligationTag::BadUnlock, "{strategy:?}");
        }
    }

    #[test]
    fn handshake_safe_and_buggy() {
        let safe = bench(Family::SignalHandshake, 2, Variant::UnsatProperty);
        let buggy = bench(Family::SignalHandshake, 2, Variant::Buggy);
        let sat = bench(Family::SignalHandshake, 2, Variant::SatProperty);
        for strategy in [Strategy::Lazy, Strategy::Schedule, Strategy::Uw] {
            let cfg = VerifyConfig { width: 8, strategy, ..VerifyConfig::default() };
            let r = verify(&safe, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Safe, "safe handshake {strategy:?}");
            let r = verify(&buggy, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Violated, "missing signal {strategy:?}");
            assert_eq!(
                r.counterexample.unwrap().violation.tag,
                ObligationTag::Deadlock,
                "{strategy:?}"
            );
            let r = verify(&sat, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Violated, "flagless signal {strategy:?}");
            assert_eq!(
                r.counterexample.unwrap().violation.tag,
                ObligationTag::Assertion,
                "{strategy:?}"
            );
        }
    }
}
