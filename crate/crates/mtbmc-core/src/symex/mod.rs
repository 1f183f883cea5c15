//! Symbolic execution of interleaved thread CFGs at statement granularity.

pub mod explore;
pub mod state;
pub mod step;
pub mod vars;

pub use explore::{ControlLiteral, ExploreError, Explorer, LazyLeaf, LeafKind, Mode, TreeInfo, VisitFlow};
pub use state::{Event, Obligation, ObligationTag, Status, SymState, CTR_WIDTH};
pub use step::{StepEnd, SymexConfig};

use crate::encoder::TermCtx;
use crate::frontend::TypedProgram;

use thiserror::Error;

/// The SSA constraint trace of one explored interleaving.
#[derive(Debug, Clone)]
pub struct SsaTrace {
    pub events: Vec<Event>,
    pub kind: LeafKind,
}

impl SsaTrace {
    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.events.iter().flat_map(|e| e.obligations.iter())
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule step {index}: thread {thread} is not schedulable here")]
    Infeasible { index: usize, thread: usize },
    #[error("schedule ended with runnable threads remaining")]
    Incomplete,
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

impl<'a> Explorer<'a> {
    /// Threads that may take an effective transition from `s`: status free,
    /// a pc with outgoing transitions, and at least one effective statement
    /// still reachable once constant-foldable tests are resolved. Blocked
    /// threads are excluded.
    pub fn enabled(&mut self, s: &SymState) -> Vec<usize> {
        s.threads
            .iter()
            .filter(|t| matches!(t.status, Status::Free) && t.pc.is_some())
            .map(|t| t.instance)
            .filter(|&t| self.has_reachable_enabling(s, t))
            .collect()
    }

    /// Execute exactly one scheduling step of `t`. Symbolic branch forks are
    /// resolved toward the then-arm (with the guard recorded), which keeps
    /// the result a single deterministic trace; the exploration drivers use
    /// the full branching machinery instead.
    pub fn step(
        &mut self,
        s: &SymState,
        t: usize,
    ) -> Result<(SymState, Vec<Event>), ScheduleError> {
        if !self.schedulable(s, t) {
            return Err(ScheduleError::Infeasible { index: 0, thread: t });
        }
        let mut state = s.clone();
        let mut events = Vec::new();
        self.step_in_place(&mut state, t, &mut events)?;
        Ok((state, events))
    }

    fn schedulable(&mut self, s: &SymState, t: usize) -> bool {
        if t >= s.threads.len() {
            return false;
        }
        match s.threads[t].status {
            Status::Free => s.threads[t].pc.is_some(),
            Status::LockWait { lock, .. } => s.store.fold(lock) == Some(0),
            Status::CondWait { mutex_lock, woken, .. } => {
                woken && s.store.fold(mutex_lock) == Some(0)
            }
            _ => false,
        }
    }

    fn step_in_place(
        &mut self,
        state: &mut SymState,
        t: usize,
        events: &mut Vec<Event>,
    ) -> Result<(), ScheduleError> {
        let resume = !matches!(state.threads[t].status, Status::Free);
        let flush = matches!(state.threads[t].status, Status::Free)
            && !self.has_reachable_enabling(state, t);
        let mut end = {
            let mut stepper = self.stepper();
            if resume {
                stepper.run_resume(state, t, events)
            } else {
                stepper.run_until_boundary(state, t, events, false, flush)
            }
        };
        loop {
            match end {
                StepEnd::Boundary => return Ok(()),
                StepEnd::ForkBranch { cond, then_to, .. } => {
                    state.guard = self.ctx.and(state.guard, cond);
                    state.threads[t].pc = Some(then_to);
                    let mut stepper = self.stepper();
                    end = stepper.run_until_boundary(state, t, events, true, false);
                }
                StepEnd::ForkWake { candidates } => {
                    let wake_version = state.wake_counter;
                    state.wake_counter += 1;
                    let wake = self.ctx.bv_var(self.pv.wake, wake_version, CTR_WIDTH);
                    let idc = self.ctx.bvc(candidates[0] as u64, CTR_WIDTH);
                    let eq = self.ctx.eq_bv(wake, idc);
                    state.guard = self.ctx.and(state.guard, eq);
                    if let Status::CondWait { woken, .. } =
                        &mut state.threads[candidates[0]].status
                    {
                        *woken = true;
                    }
                    let mut stepper = self.stepper();
                    end = stepper.run_until_boundary(state, t, events, true, false);
                }
            }
        }
    }

    /// Run an explicit thread schedule to completion, producing the SSA
    /// trace of that interleaving. Every entry executes one scheduling step
    /// of the named thread; forced steps (a single schedulable thread that
    /// the entry does not name, such as the entry thread's prefix) run
    /// implicitly. The epilogue (thread flushes and the stuck check)
    /// follows the same rules as the exploration drivers.
    pub fn execute_interleaving(
        &mut self,
        initial: SymState,
        sched: &[usize],
    ) -> Result<SsaTrace, ScheduleError> {
        let mut state = initial;
        let mut events = Vec::new();
        for (index, &t) in sched.iter().enumerate() {
            loop {
                self.normalize(&mut state);
                if self.schedulable(&state, t) {
                    break;
                }
                let runnable: Vec<usize> = state
                    .threads
                    .iter()
                    .map(|th| th.instance)
                    .filter(|&i| self.schedulable(&state, i))
                    .collect();
                match runnable.as_slice() {
                    [only] if *only != t => {
                        let only = *only;
                        self.step_in_place(&mut state, only, &mut events)?;
                    }
                    _ => return Err(ScheduleError::Infeasible { index, thread: t }),
                }
            }
            self.step_in_place(&mut state, t, &mut events)?;
        }
        let (kind, incomplete) = self.finish_path(&mut state, &mut events)?;
        if incomplete {
            return Err(ScheduleError::Incomplete);
        }
        Ok(SsaTrace { events, kind })
    }
}

/// Shared entry point: parse nothing, just wire a typed program through the
/// CFG build/unroll into an explorer.
pub struct Session {
    pub ctx: TermCtx,
    pub cfgs: crate::cfg::UnrolledSet,
}

impl Session {
    pub fn prepare(tp: &TypedProgram, unwind: u32, unwinding_assertions: bool) -> Session {
        let cfg_set = crate::cfg::build_cfg(tp);
        let cfgs = crate::cfg::unroll_all(&cfg_set, unwind, unwinding_assertions);
        Session { ctx: TermCtx::new(), cfgs }
    }
}
