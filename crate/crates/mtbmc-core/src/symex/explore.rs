//! Interleaving exploration over the unrolled thread CFGs.
//!
//! One engine drives all three strategies. In lazy mode each leaf of the
//! exploration tree is one interleaving, handed to a callback for an
//! individual solver call. In tree mode the whole exploration is encoded
//! into a single formula: every scheduling decision opens an ECS block
//! guarded by a thread-selection variable, and statement guards accumulate
//! the ts prefix of their path, so one satisfying assignment picks out one
//! interleaving.
//!
//! Front-end pruning: threads whose remaining effective statements are all
//! unreachable under the current constant folds are never scheduled as
//! ordinary candidates. In lazy mode running such a thread through its
//! empty remainder is still a distinct interleaving (its reads may order
//! differently against other threads' writes), so it is offered once as a
//! bypass choice and re-offered only after a conflicting write.

use std::collections::{BTreeMap, BTreeSet};

use crate::cfg::{NodeKind, Succ, UnrolledSet};
use crate::encoder::{TermCtx, TermId, VarId};
use crate::frontend::TypedProgram;
use crate::por;
use crate::pthreads::ModelCx;

use super::state::{Event, Status, SymState, ThreadState, VarStore, CTR_WIDTH};
use super::step::{StepEnd, Stepper, SymexConfig};
use super::vars::ProgramVars;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Explore one interleaving per leaf; no schedule guards.
    Lazy,
    /// Encode the whole tree with ECS-block schedule guards.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    /// All threads ran to completion.
    Clean,
    /// Some threads stayed parked: global-deadlock obligations were emitted.
    Deadlocked,
}

/// A control literal of the widening encoding: forcing `conj` false removes
/// the ECS-block choice it guards (and its whole subtree).
#[derive(Debug, Clone)]
pub struct ControlLiteral {
    pub name: String,
    pub conj: TermId,
    pub block: u32,
    pub thread: usize,
}

/// Everything the tree encoding produces besides the events themselves.
#[derive(Debug, Default)]
pub struct TreeInfo {
    pub ts_domains: BTreeMap<u32, BTreeSet<usize>>,
    pub literals: Vec<ControlLiteral>,
    /// Domain constraints for signal wake-choice variables.
    pub extra_constraints: Vec<TermId>,
    pub leaf_count: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ExploreError {
    #[error("exploration exceeded the step limit ({0} statements)")]
    StepLimit(usize),
    #[error("exploration aborted")]
    Aborted,
}

pub struct Explorer<'a> {
    pub ctx: &'a mut TermCtx,
    pub tp: &'a TypedProgram,
    pub cfgs: &'a UnrolledSet,
    pub pv: ProgramVars,
    pub config: SymexConfig,
    pub mode: Mode,
    pub warnings: Vec<String>,
    /// `I(s0)`: version-0 bindings of globals and counters.
    pub init: Vec<(VarId, u32, TermId)>,
    steps: usize,
}

/// Scheduling candidates at a choice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChoiceKind {
    Enabled,
    Wakeable,
    Bypass,
}

pub struct LazyLeaf<'e> {
    pub events: &'e [Event],
    pub kind: LeafKind,
    pub state: &'e SymState,
}

/// Lazy-mode visitor verdict: keep exploring or stop.
pub enum VisitFlow {
    Continue,
    Stop,
}

impl<'a> Explorer<'a> {
    pub fn new(
        ctx: &'a mut TermCtx,
        tp: &'a TypedProgram,
        cfgs: &'a UnrolledSet,
        config: SymexConfig,
        mode: Mode,
    ) -> (Explorer<'a>, SymState) {
        let mut store = VarStore::default();
        let (pv, init) = ProgramVars::init(ctx, &mut store, tp, config.width);
        let guard = ctx.tru();
        let state = SymState {
            threads: vec![ThreadState {
                instance: 0,
                cfg_id: 0,
                name: "main".into(),
                pc: cfgs.threads[0].cfg.entry,
                status: Status::Free,
                atomic_depth: 0,
                local_prefix: "main#0.".into(),
            }],
            store,
            guard,
            ts_conj: guard,
            deferred: BTreeMap::new(),
            last_thread: None,
            block: 0,
            nondet_counter: 0,
            wake_counter: 0,
        };
        (
            Explorer { ctx, tp, cfgs, pv, config, mode, warnings: Vec::new(), init, steps: 0 },
            state,
        )
    }

    pub(super) fn stepper(&mut self) -> Stepper<'_> {
        Stepper {
            ctx: self.ctx,
            tp: self.tp,
            cfgs: self.cfgs,
            pv: &self.pv,
            config: &self.config,
            warnings: &mut self.warnings,
        }
    }

    /// Lazy driver: depth-first enumeration; `visit` sees each leaf and may
    /// build and solve its formula (the term arena is lent out for that).
    pub fn explore_lazy(
        &mut self,
        state: SymState,
        visit: &mut dyn FnMut(&mut TermCtx, LazyLeaf<'_>) -> VisitFlow,
    ) -> Result<(), ExploreError> {
        debug_assert_eq!(self.mode, Mode::Lazy);
        let mut path = Vec::new();
        self.explore_rec(
            state,
            &mut path,
            &mut |ctx, path_events, kind, state| {
                visit(ctx, LazyLeaf { events: path_events, kind, state })
            },
            &mut TreeInfo::default(),
            &mut Vec::new(),
        )
        .map(|_| ())
    }

    /// Tree driver: encode everything, return the flat event list and the
    /// schedule metadata.
    pub fn explore_tree(
        &mut self,
        state: SymState,
    ) -> Result<(Vec<Event>, TreeInfo), ExploreError> {
        debug_assert_eq!(self.mode, Mode::Tree);
        let mut info = TreeInfo::default();
        let mut all = Vec::new();
        let mut path = Vec::new();
        let mut leaves = 0u64;
        self.explore_rec(
            state,
            &mut path,
            &mut |_, _, _, _| {
                leaves += 1;
                VisitFlow::Continue
            },
            &mut info,
            &mut all,
        )?;
        info.leaf_count = leaves;
        Ok((all, info))
    }

    fn bump_steps(&mut self) -> Result<(), ExploreError> {
        self.steps += 1;
        if self.steps > self.config.max_steps {
            return Err(ExploreError::StepLimit(self.config.max_steps));
        }
        Ok(())
    }

    /// Core DFS. `path` is the event stack (truncated on backtrack);
    /// `leaf` is invoked at every leaf; tree mode also appends every event
    /// to `all_events`.
    fn explore_rec(
        &mut self,
        mut state: SymState,
        path: &mut Vec<Event>,
        leaf: &mut dyn FnMut(&mut TermCtx, &[Event], LeafKind, &SymState) -> VisitFlow,
        info: &mut TreeInfo,
        all_events: &mut Vec<Event>,
    ) -> Result<VisitFlow, ExploreError> {
        let path_mark = path.len();
        let result = self.explore_inner(&mut state, path, leaf, info, all_events);
        path.truncate(path_mark);
        result
    }

    fn explore_inner(
        &mut self,
        state: &mut SymState,
        path: &mut Vec<Event>,
        leaf: &mut dyn FnMut(&mut TermCtx, &[Event], LeafKind, &SymState) -> VisitFlow,
        info: &mut TreeInfo,
        all_events: &mut Vec<Event>,
    ) -> Result<VisitFlow, ExploreError> {
        self.normalize(state);

        let choices = loop {
            let cs = self.choices(state);
            if !cs.is_empty() {
                break cs;
            }
            // Flush threads that can only run an empty remainder, waking
            // joiners as they exit; re-check for new candidates after each.
            let flushable = state
                .threads
                .iter()
                .find(|t| matches!(t.status, Status::Free) && t.pc.is_some())
                .map(|t| t.instance);
            match flushable {
                Some(t) => {
                    self.bump_steps()?;
                    let mut events = Vec::new();
                    let mut stepper = self.stepper();
                    let end = stepper.run_until_boundary(state, t, &mut events, false, true);
                    debug_assert!(matches!(end, StepEnd::Boundary));
                    self.emit(state, events, path, all_events);
                    self.normalize(state);
                }
                None => {
                    let parked = state.parked();
                    if parked.is_empty() {
                        return Ok(leaf(&mut *self.ctx, path, LeafKind::Clean, state));
                    }
                    // Global deadlock: every running thread is blocked.
                    let mut events = Vec::new();
                    for t in parked {
                        let status = state.threads[t].status;
                        let (cfg_id, pc) =
                            (state.threads[t].cfg_id, state.threads[t].pc);
                        let mut mcx = ModelCx { ctx: self.ctx, pv: &self.pv };
                        match status {
                            Status::LockWait { span, .. } => {
                                let mut ev =
                                    Event::new(t, span, "lock (blocked)".into(), state.guard);
                                mcx.lock_stuck(state, &mut ev, span, t);
                                events.push(ev);
                            }
                            Status::CondWait { span, .. } => {
                                let mut ev =
                                    Event::new(t, span, "wait (blocked)".into(), state.guard);
                                mcx.wait_stuck(state, &mut ev, span, t);
                                events.push(ev);
                            }
                            Status::JoinWait { .. } => {
                                let pc = pc.expect("parked join has a pc");
                                let span = self.cfgs.threads[cfg_id].cfg.node(pc).span;
                                let mut ev =
                                    Event::new(t, span, "join (blocked)".into(), state.guard);
                                mcx.join_stuck(state, &mut ev, span, t);
                                events.push(ev);
                            }
                            _ => unreachable!(),
                        }
                    }
                    self.emit(state, events, path, all_events);
                    return Ok(leaf(&mut *self.ctx, path, LeafKind::Deadlocked, state));
                }
            }
        };

        let bypass_offered: Vec<usize> = choices
            .iter()
            .filter(|(_, k)| *k == ChoiceKind::Bypass)
            .map(|(t, _)| *t)
            .collect();

        for (t, kind) in &choices {
            let mut child = state.clone();
            // Non-chosen bypass candidates wait for a conflicting write.
            for b in &bypass_offered {
                if b != t {
                    let reads = self.frontier_reads(&child, *b);
                    child.deferred.insert(*b, reads);
                }
            }
            self.bump_steps()?;

            let flow = match kind {
                ChoiceKind::Bypass => {
                    child.deferred.remove(t);
                    let mut events = Vec::new();
                    let mut stepper = self.stepper();
                    let end = stepper.run_until_boundary(&mut child, *t, &mut events, false, true);
                    debug_assert!(matches!(end, StepEnd::Boundary));
                    let events_marker = path.len();
                    self.emit(&mut child, events, path, all_events);
                    let f = self.explore_rec(child, path, leaf, info, all_events)?;
                    path.truncate(events_marker);
                    f
                }
                ChoiceKind::Enabled | ChoiceKind::Wakeable => {
                    // ECS block bookkeeping: a context switch to a new
                    // thread opens a block; block 0 (the initial prefix)
                    // stays unguarded.
                    if child.last_thread != Some(*t) {
                        if child.last_thread.is_some() {
                            child.block += 1;
                        }
                        if self.mode == Mode::Tree && child.block >= 1 {
                            let ts = self.ctx.bv_var(self.pv.ts, child.block, CTR_WIDTH);
                            let idc = self.ctx.bvc(*t as u64, CTR_WIDTH);
                            let g = self.ctx.eq_bv(ts, idc);
                            child.guard = self.ctx.and(child.guard, g);
                            child.ts_conj = self.ctx.and(child.ts_conj, g);
                            info.ts_domains.entry(child.block).or_default().insert(*t);
                            // Control literals gate every non-entry thread
                            // choice; their conjunction is the full ts
                            // prefix reaching this block.
                            if *t != 0 {
                                info.literals.push(ControlLiteral {
                                    name: format!(
                                        "l{}_b{}_{}",
                                        info.literals.len(),
                                        child.block,
                                        child.threads[*t].name
                                    ),
                                    conj: child.ts_conj,
                                    block: child.block,
                                    thread: *t,
                                });
                            }
                        }
                        child.last_thread = Some(*t);
                    }
                    let resume = *kind == ChoiceKind::Wakeable;
                    self.run_step_branches(child, *t, resume, false, path, leaf, info, all_events)?
                }
            };
            if matches!(flow, VisitFlow::Stop) {
                return Ok(VisitFlow::Stop);
            }
        }
        Ok(VisitFlow::Continue)
    }

    /// Run one scheduling step of `t`, branching on symbolic tests and
    /// signal wake choices until every branch reaches a step boundary, then
    /// recurse into exploration.
    #[allow(clippy::too_many_arguments)]
    fn run_step_branches(
        &mut self,
        mut child: SymState,
        t: usize,
        resume: bool,
        crossed: bool,
        path: &mut Vec<Event>,
        leaf: &mut dyn FnMut(&mut TermCtx, &[Event], LeafKind, &SymState) -> VisitFlow,
        info: &mut TreeInfo,
        all_events: &mut Vec<Event>,
    ) -> Result<VisitFlow, ExploreError> {
        let mut events = Vec::new();
        let end = {
            let mut stepper = self.stepper();
            if resume {
                stepper.run_resume(&mut child, t, &mut events)
            } else {
                stepper.run_until_boundary(&mut child, t, &mut events, crossed, false)
            }
        };
        let mark = path.len();
        self.emit(&mut child, events, path, all_events);
        let flow = match end {
            StepEnd::Boundary => self.explore_rec(child, path, leaf, info, all_events)?,
            StepEnd::ForkBranch { cond, span: _, then_to, else_to } => {
                let mut flow = VisitFlow::Continue;
                for (target, polarity) in [(then_to, true), (else_to, false)] {
                    let mut arm = child.clone();
                    let c = if polarity { cond } else { self.ctx.not(cond) };
                    arm.guard = self.ctx.and(arm.guard, c);
                    arm.threads[t].pc = Some(target);
                    let f = self.run_step_branches(
                        arm, t, false, true, path, leaf, info, all_events,
                    )?;
                    if matches!(f, VisitFlow::Stop) {
                        flow = VisitFlow::Stop;
                        break;
                    }
                }
                flow
            }
            StepEnd::ForkWake { candidates } => {
                // Which waiter a signal wakes is scheduler nondeterminism:
                // a free selection variable keeps the arms guard-disjoint.
                let wake_version = child.wake_counter;
                child.wake_counter += 1;
                let wake = self.ctx.bv_var(self.pv.wake, wake_version, CTR_WIDTH);
                if self.mode == Mode::Tree {
                    let mut domain = self.ctx.fls();
                    for cand in &candidates {
                        let idc = self.ctx.bvc(*cand as u64, CTR_WIDTH);
                        let eq = self.ctx.eq_bv(wake, idc);
                        domain = self.ctx.or(domain, eq);
                    }
                    let dom = self.ctx.implies(child.guard, domain);
                    info.extra_constraints.push(dom);
                }
                let mut flow = VisitFlow::Continue;
                for cand in candidates {
                    let mut arm = child.clone();
                    let idc = self.ctx.bvc(cand as u64, CTR_WIDTH);
                    let eq = self.ctx.eq_bv(wake, idc);
                    arm.guard = self.ctx.and(arm.guard, eq);
                    if let Status::CondWait { woken, .. } = &mut arm.threads[cand].status {
                        *woken = true;
                    }
                    let f = self.run_step_branches(
                        arm, t, false, true, path, leaf, info, all_events,
                    )?;
                    if matches!(f, VisitFlow::Stop) {
                        flow = VisitFlow::Stop;
                        break;
                    }
                }
                flow
            }
        };
        path.truncate(mark);
        Ok(flow)
    }

    /// Append a step's events to the live path (and the global pool in tree
    /// mode), releasing deferred bypass threads on conflicting writes.
    fn emit(
        &mut self,
        state: &mut SymState,
        events: Vec<Event>,
        path: &mut Vec<Event>,
        all_events: &mut Vec<Event>,
    ) {
        let mut written: BTreeSet<VarId> = BTreeSet::new();
        for e in &events {
            written.extend(e.written_globals.iter().copied());
        }
        if !written.is_empty() {
            state.deferred.retain(|_, reads| reads.is_disjoint(&written));
        }
        if self.mode == Mode::Tree {
            all_events.extend(events.iter().cloned());
        }
        path.extend(events);
    }

    /// Silent scheduler maintenance: join waiters whose target exited
    /// resume and advance through pure no-ops (further join checks, nops);
    /// anything that emits constraints waits to be scheduled.
    pub(super) fn normalize(&mut self, state: &mut SymState) {
        loop {
            let mut progress = false;
            for i in 0..state.threads.len() {
                if let Status::JoinWait { target } = state.threads[i].status {
                    if state.threads[target].exited() {
                        state.threads[i].status = Status::Free;
                        // Step past the satisfied join.
                        let pc = state.threads[i].pc.expect("parked join has a pc");
                        let cfg_id = state.threads[i].cfg_id;
                        state.threads[i].pc = match self.cfgs.threads[cfg_id].cfg.node(pc).succ {
                            Succ::Halt => None,
                            Succ::Next(n) => Some(n),
                            Succ::Branch { .. } => unreachable!("join nodes do not branch"),
                        };
                        progress = true;
                    }
                }
                if matches!(state.threads[i].status, Status::Free) {
                    progress |= self.advance_silent(state, i);
                }
            }
            if !progress {
                break;
            }
        }
    }

    /// Move a free thread across statements that emit nothing and cannot
    /// depend on shared state: satisfied joins and no-ops. Stops before the
    /// implicit exit (it emits the running-count decrement) and re-parks on
    /// an unsatisfied join. Returns whether anything moved.
    fn advance_silent(&mut self, state: &mut SymState, t: usize) -> bool {
        let mut moved = false;
        loop {
            let Some(pc) = state.threads[t].pc else { break };
            let cfg_id = state.threads[t].cfg_id;
            let node = self.cfgs.threads[cfg_id].cfg.node(pc);
            // The fall-off-the-end exit emits; leave it for a flush/step.
            let next = match node.succ {
                Succ::Next(n) => n,
                Succ::Halt | Succ::Branch { .. } => break,
            };
            match &node.kind {
                NodeKind::Nop => {
                    state.threads[t].pc = Some(next);
                    moved = true;
                }
                NodeKind::Intrinsic(crate::frontend::ast::Intrinsic::Join(handle)) => {
                    let handle = handle.clone();
                    let def_index = self.cfgs.threads[cfg_id].cfg.def_index;
                    let prefix = state.threads[t].local_prefix.clone();
                    let hvar = self.pv.resolve(
                        self.ctx,
                        &mut state.store,
                        self.tp,
                        def_index,
                        &prefix,
                        &handle,
                    );
                    let target = state.store.fold(hvar).unwrap_or(0) as usize;
                    if target == 0 || target >= state.threads.len() {
                        break; // a scheduled step reports the error
                    }
                    if state.threads[target].exited() {
                        state.threads[t].pc = Some(next);
                        moved = true;
                    } else {
                        state.threads[t].status = Status::JoinWait { target };
                        break;
                    }
                }
                _ => break,
            }
        }
        moved
    }

    /// Scheduling candidates, ascending by instance id.
    fn choices(&mut self, state: &SymState) -> Vec<(usize, ChoiceKind)> {
        let mut out = Vec::new();
        for th in &state.threads {
            let t = th.instance;
            match th.status {
                Status::Free if th.pc.is_some() => {
                    if self.has_reachable_enabling(state, t) {
                        out.push((t, ChoiceKind::Enabled));
                    } else if self.mode == Mode::Lazy && !state.deferred.contains_key(&t) {
                        out.push((t, ChoiceKind::Bypass));
                    }
                }
                Status::LockWait { lock, .. } => {
                    if state.store.fold(lock) == Some(0) {
                        out.push((t, ChoiceKind::Wakeable));
                    }
                }
                Status::CondWait { mutex_lock, woken: true, .. } => {
                    if state.store.fold(mutex_lock) == Some(0) {
                        out.push((t, ChoiceKind::Wakeable));
                    }
                }
                _ => {}
            }
        }

        // Read-write POR: when some candidate's remaining accesses are
        // disjoint from every other live thread's, exploring just that
        // candidate covers all verdict-relevant behaviors.
        if self.config.por && out.len() > 1 {
            for (t, kind) in &out {
                if *kind == ChoiceKind::Bypass {
                    continue;
                }
                if self.rw_independent_here(state, *t) {
                    return vec![(*t, *kind)];
                }
            }
        }
        out
    }

    fn rw_independent_here(&mut self, state: &SymState, t: usize) -> bool {
        let mine = self.remaining_rw(state, t);
        let mut others = por::RwSets::default();
        for th in &state.threads {
            if th.instance == t || th.exited() {
                continue;
            }
            let o = self.remaining_rw(state, th.instance);
            others.reads.extend(o.reads);
            others.writes.extend(o.writes);
        }
        por::rw_independent(&mine, &others)
    }

    fn remaining_rw(&mut self, state: &SymState, t: usize) -> por::RwSets {
        let th = &state.threads[t];
        match th.pc {
            None => por::RwSets::default(),
            Some(pc) => por::remaining_rw(
                self.ctx,
                self.tp,
                self.cfgs,
                th.cfg_id,
                pc,
                &self.pv,
                &th.local_prefix,
            ),
        }
    }

    /// Constant-fold-aware reachability of an effective statement from the
    /// thread's pc: the front-end information that prunes interleavings.
    pub fn has_reachable_enabling(&mut self, state: &SymState, t: usize) -> bool {
        let th = &state.threads[t];
        let Some(start) = th.pc else { return false };
        let cfg = &self.cfgs.threads[th.cfg_id].cfg;
        let mut stack = vec![start];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let node = cfg.node(n);
            match &node.kind {
                NodeKind::Nop => {}
                NodeKind::Test { cond } => {
                    let fold = self.fold_expr(state, t, cond);
                    if let Succ::Branch { then_to, else_to } = node.succ {
                        match fold {
                            Some(v) => stack.push(if v != 0 { then_to } else { else_to }),
                            None => {
                                stack.push(then_to);
                                stack.push(else_to);
                            }
                        }
                    }
                    continue;
                }
                NodeKind::Intrinsic(i) => match i {
                    crate::frontend::ast::Intrinsic::AtomicBegin
                    | crate::frontend::ast::Intrinsic::AtomicEnd
                    | crate::frontend::ast::Intrinsic::Exit => {}
                    _ => return true,
                },
                NodeKind::Assign { .. } | NodeKind::Assert { .. } | NodeKind::Assume(_) => {
                    return true
                }
            }
            match node.succ {
                Succ::Halt => {}
                Succ::Next(m) => stack.push(m),
                Succ::Branch { then_to, else_to } => {
                    stack.push(then_to);
                    stack.push(else_to);
                }
            }
        }
        false
    }

    /// Globals read by branch tests reachable from the thread's pc: writes
    /// into this set can change the fold-based pruning, so they re-offer a
    /// deferred bypass thread.
    fn frontier_reads(&mut self, state: &SymState, t: usize) -> BTreeSet<VarId> {
        let th = &state.threads[t];
        let mut reads = BTreeSet::new();
        let Some(start) = th.pc else { return reads };
        let cfg = &self.cfgs.threads[th.cfg_id].cfg;
        let def_index = cfg.def_index;
        let prefix = th.local_prefix.clone();
        let mut stack = vec![start];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let node = cfg.node(n);
            if let NodeKind::Test { cond } = &node.kind {
                let ecx = super::vars::ExprCx {
                    ctx: self.ctx,
                    pv: &self.pv,
                    tp: self.tp,
                    def_index,
                    local_prefix: prefix.clone(),
                    check_div_zero: false,
                };
                ecx.read_globals(cond, &mut reads);
            }
            match node.succ {
                Succ::Halt => {}
                Succ::Next(m) => stack.push(m),
                Succ::Branch { then_to, else_to } => {
                    stack.push(then_to);
                    stack.push(else_to);
                }
            }
        }
        reads
    }

    /// Single-path epilogue for `execute_interleaving`: flush threads with
    /// empty remainders, then either finish cleanly or emit the stuck-state
    /// deadlock obligations. Threads with effective work left mean the
    /// schedule was incomplete.
    pub(super) fn finish_path(
        &mut self,
        state: &mut SymState,
        events: &mut Vec<Event>,
    ) -> Result<(LeafKind, bool), ExploreError> {
        loop {
            self.normalize(state);
            let mut flushed = false;
            let mut enabled_left: Vec<usize> = Vec::new();
            for i in 0..state.threads.len() {
                let t = state.threads[i].instance;
                if !matches!(state.threads[i].status, Status::Free)
                    || state.threads[i].pc.is_none()
                {
                    continue;
                }
                if self.has_reachable_enabling(state, t) {
                    enabled_left.push(t);
                    continue;
                }
                self.bump_steps()?;
                let mut stepper = self.stepper();
                let end = stepper.run_until_boundary(state, t, events, false, true);
                debug_assert!(matches!(end, StepEnd::Boundary));
                flushed = true;
                break;
            }
            if flushed {
                continue;
            }
            let parked = state.parked();
            let wakeable: Vec<usize> = parked
                .iter()
                .copied()
                .filter(|&t| match state.threads[t].status {
                    Status::LockWait { lock, .. } => state.store.fold(lock) == Some(0),
                    Status::CondWait { mutex_lock, woken, .. } => {
                        woken && state.store.fold(mutex_lock) == Some(0)
                    }
                    _ => false,
                })
                .collect();
            // A single remaining runnable thread is a forced continuation.
            match (enabled_left.as_slice(), wakeable.as_slice()) {
                ([], []) => {}
                ([only], []) => {
                    let only = *only;
                    self.bump_steps()?;
                    let mut stepper = self.stepper();
                    let mut end =
                        stepper.run_until_boundary(state, only, events, false, false);
                    // Forced continuations resolve forks toward the then
                    // side, matching the public single-step semantics.
                    loop {
                        match end {
                            StepEnd::Boundary => break,
                            StepEnd::ForkBranch { cond, then_to, .. } => {
                                state.guard = self.ctx.and(state.guard, cond);
                                state.threads[only].pc = Some(then_to);
                                let mut stepper = self.stepper();
                                end = stepper
                                    .run_until_boundary(state, only, events, true, false);
                            }
                            StepEnd::ForkWake { .. } => {
                                return Ok((LeafKind::Clean, true));
                            }
                        }
                    }
                    continue;
                }
                ([], [only]) => {
                    let only = *only;
                    self.bump_steps()?;
                    let mut stepper = self.stepper();
                    let end = stepper.run_resume(state, only, events);
                    if !matches!(end, StepEnd::Boundary) {
                        return Ok((LeafKind::Clean, true));
                    }
                    continue;
                }
                _ => return Ok((LeafKind::Clean, true)),
            }
            if parked.is_empty() {
                return Ok((LeafKind::Clean, false));
            }
            for t in parked {
                let status = state.threads[t].status;
                let (cfg_id, pc) = (state.threads[t].cfg_id, state.threads[t].pc);
                let mut mcx = ModelCx { ctx: self.ctx, pv: &self.pv };
                match status {
                    Status::LockWait { span, .. } => {
                        let mut ev = Event::new(t, span, "lock (blocked)".into(), state.guard);
                        mcx.lock_stuck(state, &mut ev, span, t);
                        events.push(ev);
                    }
                    Status::CondWait { span, .. } => {
                        let mut ev = Event::new(t, span, "wait (blocked)".into(), state.guard);
                        mcx.wait_stuck(state, &mut ev, span, t);
                        events.push(ev);
                    }
                    Status::JoinWait { .. } => {
                        let pc = pc.expect("parked join has a pc");
                        let span = self.cfgs.threads[cfg_id].cfg.node(pc).span;
                        let mut ev = Event::new(t, span, "join (blocked)".into(), state.guard);
                        mcx.join_stuck(state, &mut ev, span, t);
                        events.push(ev);
                    }
                    _ => unreachable!(),
                }
            }
            return Ok((LeafKind::Deadlocked, false));
        }
    }

    /// Evaluate an expression against the current folds only.
    fn fold_expr(
        &mut self,
        state: &SymState,
        t: usize,
        e: &crate::frontend::ast::Expr,
    ) -> Option<u64> {
        // Reuse the translator's fold computation on a scratch state so no
        // terms leak into the path. Interned terms are harmless (the arena
        // is append-only and hash-consed).
        let mut scratch_state = state.clone();
        let mut scratch_event = Event::new(t, Default::default(), String::new(), state.guard);
        let th = &state.threads[t];
        let mut ecx = super::vars::ExprCx {
            ctx: self.ctx,
            pv: &self.pv,
            tp: self.tp,
            def_index: self.cfgs.threads[th.cfg_id].cfg.def_index,
            local_prefix: th.local_prefix.clone(),
            check_div_zero: false,
        };
        ecx.translate(&mut scratch_state, &mut scratch_event, e).fold
    }
}
