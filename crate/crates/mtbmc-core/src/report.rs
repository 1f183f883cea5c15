//! Verification verdicts, statistics, and counterexample traces.

use std::time::Duration;

use crate::frontend::ast::Span;
use crate::symex::ObligationTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Violated,
    /// Only a loop-unwinding bound failed: the chosen depth truncated real
    /// behavior, so SAFE cannot be claimed.
    BoundInsufficient,
    ResourceOut,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Safe => "SAFE",
            Verdict::Violated => "VIOLATED",
            Verdict::BoundInsufficient => "BOUND-INSUFFICIENT",
            Verdict::ResourceOut => "RESOURCE-OUT",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Safe => 0,
            Verdict::Violated => 10,
            Verdict::BoundInsufficient => 20,
            Verdict::ResourceOut => 30,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    /// Interleavings explored (lazy) or representable (schedule/UW).
    pub interleavings: u64,
    /// Interleavings whose formula was satisfiable.
    pub failed_interleavings: u64,
    /// Widening iterations (UW only).
    pub iterations: u64,
    pub solver_calls: u64,
    /// Times the unsat core exceeded the cap and widening relaxed
    /// everything remaining.
    pub core_cap_fallbacks: u64,
    pub wall_time: Duration,
}

/// One step of a violating execution.
#[derive(Debug, Clone)]
pub struct CexStep {
    pub thread: usize,
    pub thread_name: String,
    pub span: Span,
    pub desc: String,
    /// Variable bindings this step produced, printed as signed decimals.
    pub assigns: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct CexViolation {
    pub tag: ObligationTag,
    pub thread: usize,
    pub thread_name: String,
    pub span: Span,
    pub desc: String,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub steps: Vec<CexStep>,
    pub violation: CexViolation,
    /// Decoded ECS schedule (block, thread) in schedule/UW modes.
    pub schedule: Vec<(u32, usize)>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub stats: Stats,
    pub warnings: Vec<String>,
}

impl Report {
    /// One `key=value` record per line; stable across runs with the same
    /// seed except for the trailing wall-time field.
    pub fn machine_format(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verdict={}\n", self.verdict.label()));
        out.push_str(&format!("interleavings={}\n", self.stats.interleavings));
        out.push_str(&format!(
            "failed_interleavings={}\n",
            self.stats.failed_interleavings
        ));
        out.push_str(&format!("iterations={}\n", self.stats.iterations));
        out.push_str(&format!("solver_calls={}\n", self.stats.solver_calls));
        if let Some(cex) = &self.counterexample {
            out.push_str(&format!("violated={}\n", cex.violation.tag.label()));
            out.push_str(&format!(
                "violated_at={}:{}\n",
                cex.violation.span.line, cex.violation.span.col
            ));
            if !cex.schedule.is_empty() {
                let sched: Vec<String> = cex
                    .schedule
                    .iter()
                    .map(|(b, t)| format!("ts{b}={t}"))
                    .collect();
                out.push_str(&format!("schedule={}\n", sched.join(",")));
            }
        }
        out.push_str(&format!("time_ms={}\n", self.stats.wall_time.as_millis()));
        out
    }

    /// Counterexample trace, one line per step:
    /// `#<idx> T<thread> <file>:<line> <stmt> {var=value,...}`.
    pub fn trace_lines(&self, origin: &str) -> Vec<String> {
        let mut lines = Vec::new();
        if let Some(cex) = &self.counterexample {
            for (i, s) in cex.steps.iter().enumerate() {
                let assigns: Vec<String> =
                    s.assigns.iter().map(|(k, v)| format!("{k}={v}")).collect();
                lines.push(format!(
                    "#{i} T{} {}:{} {} {{{}}}",
                    s.thread,
                    origin,
                    s.span.line,
                    s.desc,
                    assigns.join(",")
                ));
            }
            lines.push(format!(
                "violation: {} at {}:{} in T{} ({})",
                cex.violation.tag.label(),
                origin,
                cex.violation.span.line,
                cex.violation.thread,
                cex.violation.desc,
            ));
        }
        lines
    }
}
