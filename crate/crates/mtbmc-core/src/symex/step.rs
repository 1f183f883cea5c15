//! Statement-granular execution of one scheduling step.
//!
//! A step runs the chosen thread through glue statements (pure tests,
//! invisible effective statements, atomic markers), across at most one
//! switch-point statement, and stops just before the next switch point.
//! Context switches therefore only happen where another thread could
//! observe a difference. Inside atomic sections nothing is a switch point.

use crate::cfg::{AssertKind, NodeId, NodeKind, Succ, UnrolledSet};
use crate::encoder::{Term, TermCtx, TermId};
use crate::frontend::ast::{Expr, Intrinsic, LValue, Span};
use crate::frontend::{pretty_expr, TypedProgram};
use crate::pthreads::ModelCx;

use super::state::{Event, Obligation, ObligationTag, Status, SymState, ThreadState, CTR_WIDTH};
use super::vars::{ExprCx, ProgramVars};

/// Engine-wide knobs shared by every strategy.
#[derive(Debug, Clone)]
pub struct SymexConfig {
    pub width: u32,
    pub por: bool,
    pub check_div_zero: bool,
    /// Safety valve on total executed scheduling steps per exploration.
    pub max_steps: usize,
}

impl Default for SymexConfig {
    fn default() -> Self {
        SymexConfig { width: 32, por: true, check_div_zero: false, max_steps: 1_000_000 }
    }
}

/// Why `run_until_boundary` returned.
pub enum StepEnd {
    /// Reached the next switch point, parked, or exited.
    Boundary,
    /// Hit a branch test that does not fold; the caller explores both arms
    /// and resumes the same thread mid-step.
    ForkBranch { cond: TermId, span: Span, then_to: NodeId, else_to: NodeId },
    /// A signal must pick which of several waiters wakes up.
    ForkWake { candidates: Vec<usize> },
}

/// Flow control after an intrinsic.
enum IntrinsicFlow {
    Continue { effective: bool },
    Parked,
    Exited,
    Wake(Vec<usize>),
}

pub struct Stepper<'a> {
    pub ctx: &'a mut TermCtx,
    pub tp: &'a TypedProgram,
    pub cfgs: &'a UnrolledSet,
    pub pv: &'a ProgramVars,
    pub config: &'a SymexConfig,
    pub warnings: &'a mut Vec<String>,
}

impl<'a> Stepper<'a> {
    fn ecx(&mut self, state: &SymState, t: usize) -> ExprCx<'_> {
        let th = &state.threads[t];
        ExprCx {
            ctx: self.ctx,
            pv: self.pv,
            tp: self.tp,
            def_index: self.cfgs.threads[th.cfg_id].cfg.def_index,
            local_prefix: th.local_prefix.clone(),
            check_div_zero: self.config.check_div_zero,
        }
    }

    fn resolve(&mut self, state: &mut SymState, t: usize, name: &str) -> crate::encoder::VarId {
        let def_index = self.cfgs.threads[state.threads[t].cfg_id].cfg.def_index;
        let prefix = state.threads[t].local_prefix.clone();
        self.pv.resolve(self.ctx, &mut state.store, self.tp, def_index, &prefix, name)
    }

    /// Resume a parked thread whose wake condition holds, complete its
    /// pending synchronization point, then continue like a normal step.
    pub fn run_resume(
        &mut self,
        state: &mut SymState,
        t: usize,
        events: &mut Vec<Event>,
    ) -> StepEnd {
        let status = state.threads[t].status;
        let pc = state.threads[t].pc.expect("parked thread has a pc");
        let span = self.cfgs.threads[state.threads[t].cfg_id].cfg.node(pc).span;
        match status {
            Status::LockWait { lock, count, .. } => {
                let mut ev = Event::new(t, span, "lock (resume)".into(), state.guard);
                ev.node = Some(pc);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.lock_resume(state, &mut ev, lock, count, span, t);
                events.push(ev);
            }
            Status::CondWait { cond_lock, mutex_lock, recorded_bid, .. } => {
                let mut ev = Event::new(t, span, "wait (resume)".into(), state.guard);
                ev.node = Some(pc);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.wait_resume(state, &mut ev, cond_lock, mutex_lock, recorded_bid);
                events.push(ev);
            }
            other => panic!("run_resume on thread with status {other:?}"),
        }
        state.threads[t].status = Status::Free;
        self.advance_pc(state, t);
        if state.threads[t].pc.is_none() {
            self.emit_exit(state, t, events, span);
            return StepEnd::Boundary;
        }
        self.run_until_boundary(state, t, events, true, false)
    }

    /// Execute statements of `t` until a step boundary. `crossed` carries
    /// whether the switch-point statement of this step already ran (forked
    /// steps resume with it set). `flush` suppresses symbolic forks for
    /// bypass runs that cannot reach any effective statement.
    pub fn run_until_boundary(
        &mut self,
        state: &mut SymState,
        t: usize,
        events: &mut Vec<Event>,
        mut crossed: bool,
        flush: bool,
    ) -> StepEnd {
        loop {
            let Some(pc) = state.threads[t].pc else {
                return StepEnd::Boundary;
            };
            let cfg_id = state.threads[t].cfg_id;
            let node = self.cfgs.threads[cfg_id].cfg.node(pc).clone();
            let in_atomic = state.threads[t].atomic_depth > 0;
            let is_switch = self.is_switch_stmt(state, t, &node.kind);

            // Stop before the next switch-point statement; statements that
            // no other thread can observe are glue.
            if crossed && !in_atomic && is_switch {
                return StepEnd::Boundary;
            }

            match &node.kind {
                NodeKind::Nop => self.advance_pc(state, t),
                NodeKind::Test { cond } => {
                    let (then_to, else_to) = match node.succ {
                        Succ::Branch { then_to, else_to } => (then_to, else_to),
                        _ => unreachable!("test nodes branch"),
                    };
                    let mut scratch = Event::new(t, node.span, String::new(), state.guard);
                    let mut ecx = self.ecx(state, t);
                    let tr = ecx.translate(state, &mut scratch, cond);
                    match tr.fold {
                        Some(v) => {
                            state.threads[t].pc =
                                Some(if v != 0 { then_to } else { else_to });
                        }
                        None if flush => {
                            // Nothing effective is reachable either way;
                            // the arm choice is unobservable.
                            state.threads[t].pc = Some(then_to);
                        }
                        None => {
                            return StepEnd::ForkBranch {
                                cond: tr.term,
                                span: node.span,
                                then_to,
                                else_to,
                            };
                        }
                    }
                }
                NodeKind::Assign { target, value } => {
                    let before = events.len();
                    self.exec_assign(state, t, &node.kind, target, value, node.span, events);
                    for e in &mut events[before..] {
                        e.node = Some(pc);
                    }
                    crossed |= is_switch;
                    self.advance_pc(state, t);
                }
                NodeKind::Assert { cond, kind } => {
                    let desc = format!("assert({})", pretty_expr(cond));
                    let mut ev = Event::new(t, node.span, desc, state.guard);
                    ev.node = Some(pc);
                    let mut ecx = self.ecx(state, t);
                    let tr = ecx.translate(state, &mut ev, cond);
                    self.warn_multi_global(state, t, &node.kind, node.span);
                    let not_c = self.ctx.not(tr.term);
                    let violated = self.ctx.and(state.guard, not_c);
                    if !matches!(self.ctx.term(violated), Term::False) {
                        let (tag, desc) = match kind {
                            AssertKind::User => (
                                ObligationTag::Assertion,
                                format!("assertion {}", pretty_expr(cond)),
                            ),
                            AssertKind::Unwinding => {
                                (ObligationTag::Unwinding, "loop unwinding bound".to_string())
                            }
                        };
                        ev.obligations.push(Obligation {
                            cond_violated: violated,
                            tag,
                            span: node.span,
                            thread: t,
                            desc,
                        });
                    }
                    events.push(ev);
                    crossed |= is_switch;
                    self.advance_pc(state, t);
                }
                NodeKind::Assume(cond) => {
                    let desc = format!("assume({})", pretty_expr(cond));
                    let mut ev = Event::new(t, node.span, desc, state.guard);
                    ev.node = Some(pc);
                    let mut ecx = self.ecx(state, t);
                    let tr = ecx.translate(state, &mut ev, cond);
                    self.warn_multi_global(state, t, &node.kind, node.span);
                    state.guard = self.ctx.and(state.guard, tr.term);
                    events.push(ev);
                    crossed |= is_switch;
                    self.advance_pc(state, t);
                }
                NodeKind::Intrinsic(intr) => {
                    let intr = intr.clone();
                    let before = events.len();
                    let flow = self.exec_intrinsic(state, t, &intr, node.span, events);
                    for e in &mut events[before..] {
                        e.node = Some(pc);
                    }
                    match flow {
                        IntrinsicFlow::Continue { effective: _ } => {
                            crossed |= is_switch;
                            self.advance_pc(state, t);
                        }
                        IntrinsicFlow::Parked => return StepEnd::Boundary,
                        IntrinsicFlow::Exited => return StepEnd::Boundary,
                        IntrinsicFlow::Wake(c) => {
                            self.advance_pc(state, t);
                            return StepEnd::ForkWake { candidates: c };
                        }
                    }
                }
            }
            if state.threads[t].pc.is_none() && !state.threads[t].exited() {
                // Fell off the end of the CFG: implicit exit.
                self.emit_exit(state, t, events, node.span);
                return StepEnd::Boundary;
            }
        }
    }

    fn advance_pc(&self, state: &mut SymState, t: usize) {
        let pc = state.threads[t].pc.expect("advance requires a pc");
        let cfg_id = state.threads[t].cfg_id;
        state.threads[t].pc = match self.cfgs.threads[cfg_id].cfg.node(pc).succ {
            Succ::Halt => None,
            Succ::Next(n) => Some(n),
            Succ::Branch { .. } => unreachable!("branch advancement handled in Test"),
        };
    }

    pub fn emit_exit(
        &mut self,
        state: &mut SymState,
        t: usize,
        events: &mut Vec<Event>,
        span: Span,
    ) {
        let mut ev = Event::new(t, span, "exit".into(), state.guard);
        let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
        mcx.exit_counters(state, &mut ev);
        events.push(ev);
        state.threads[t].status = Status::Exited;
        state.threads[t].pc = None;
    }

    fn exec_assign(
        &mut self,
        state: &mut SymState,
        t: usize,
        kind: &NodeKind,
        target: &LValue,
        value: &Expr,
        span: Span,
        events: &mut Vec<Event>,
    ) {
        let desc = match target {
            LValue::Var(n) => format!("{n} = {}", pretty_expr(value)),
            LValue::Index(n, i) => format!("{n}[{}] = {}", pretty_expr(i), pretty_expr(value)),
        };
        let mut ev = Event::new(t, span, desc, state.guard);
        let guard = state.guard;
        match target {
            LValue::Var(name) => {
                let rhs = {
                    let mut ecx = self.ecx(state, t);
                    ecx.translate(state, &mut ev, value)
                };
                let var = self.resolve(state, t, name);
                if let Some(eq) = state.store.assign(self.ctx, var, guard, rhs.term, rhs.fold) {
                    ev.eqs.push(eq);
                }
                if let Some(base) = state.store.info[&var].global_base {
                    ev.written_globals.push(base);
                }
            }
            LValue::Index(name, idx) => {
                let (idx_t, rhs) = {
                    let mut ecx = self.ecx(state, t);
                    let i = ecx.translate(state, &mut ev, idx);
                    let r = ecx.translate(state, &mut ev, value);
                    (i, r)
                };
                let (base, elems) =
                    self.pv.global_arrays.get(name).cloned().expect("typechecked array");
                let n = elems.len();
                let w = self.pv.width;
                match idx_t.fold {
                    Some(iv) => {
                        let si = crate::encoder::bits::to_signed(iv, w);
                        if si >= 0 && (si as usize) < n {
                            let var = elems[si as usize];
                            if let Some(eq) =
                                state.store.assign(self.ctx, var, guard, rhs.term, rhs.fold)
                            {
                                ev.eqs.push(eq);
                            }
                        }
                        // A concretely out-of-range write touches nothing;
                        // the bounds assertion is the user's check.
                    }
                    None => {
                        for (i, var) in elems.iter().enumerate() {
                            let ic = self.ctx.bvc(i as u64, w);
                            let hit = self.ctx.eq_bv(idx_t.term, ic);
                            let g = self.ctx.and(guard, hit);
                            if let Some(eq) =
                                state.store.assign(self.ctx, *var, g, rhs.term, None)
                            {
                                ev.eqs.push(eq);
                            }
                            state.store.set_fold(*var, None);
                        }
                    }
                }
                ev.written_globals.push(base);
            }
        }
        self.warn_multi_global(state, t, kind, span);
        events.push(ev);
    }

    fn exec_intrinsic(
        &mut self,
        state: &mut SymState,
        t: usize,
        intr: &Intrinsic,
        span: Span,
        events: &mut Vec<Event>,
    ) -> IntrinsicFlow {
        match intr {
            Intrinsic::AtomicBegin => {
                state.threads[t].atomic_depth += 1;
                IntrinsicFlow::Continue { effective: false }
            }
            Intrinsic::AtomicEnd => {
                let d = &mut state.threads[t].atomic_depth;
                *d = d.saturating_sub(1);
                IntrinsicFlow::Continue { effective: false }
            }
            Intrinsic::Create { handle, thread, arg } => {
                let def = *self.tp.thread_index.get(thread).expect("typechecked thread name");
                let cfg_id = def + 1;
                let instance = state.threads.len();
                let name = format!("{thread}#{instance}");
                let mut ev =
                    Event::new(t, span, format!("create({handle}, {thread})"), state.guard);

                // Bind the parameter by value in the child's namespace.
                if let Some(arg_expr) = arg {
                    let tr = {
                        let mut ecx = self.ecx(state, t);
                        ecx.translate(state, &mut ev, arg_expr)
                    };
                    let pname = self.tp.program.threads[def].params[0].name.clone();
                    let pvar = self.pv.resolve(
                        self.ctx,
                        &mut state.store,
                        self.tp,
                        Some(def),
                        &format!("{name}."),
                        &pname,
                    );
                    if let Some(eq) =
                        state.store.assign(self.ctx, pvar, state.guard, tr.term, tr.fold)
                    {
                        ev.eqs.push(eq);
                    }
                }

                // The handle records the instance id.
                let hvar = self.resolve(state, t, handle);
                let idc = self.ctx.bvc(instance as u64, CTR_WIDTH);
                if let Some(eq) =
                    state.store.assign(self.ctx, hvar, state.guard, idc, Some(instance as u64))
                {
                    ev.eqs.push(eq);
                }
                if let Some(base) = state.store.info[&hvar].global_base {
                    ev.written_globals.push(base);
                }

                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.create_counters(state, &mut ev);
                events.push(ev);

                state.threads.push(ThreadState {
                    instance,
                    cfg_id,
                    name: name.clone(),
                    pc: self.cfgs.threads[cfg_id].cfg.entry,
                    status: Status::Free,
                    atomic_depth: 0,
                    local_prefix: format!("{name}."),
                });
                IntrinsicFlow::Continue { effective: true }
            }
            Intrinsic::Join(handle) => {
                let hvar = self.resolve(state, t, handle);
                let target = state.store.fold(hvar).unwrap_or(0) as usize;
                if target == 0 || target >= state.threads.len() {
                    let mut ev = Event::new(t, span, format!("join({handle})"), state.guard);
                    ev.obligations.push(Obligation {
                        cond_violated: state.guard,
                        tag: ObligationTag::Assertion,
                        span,
                        thread: t,
                        desc: format!("join on invalid thread handle `{handle}`"),
                    });
                    events.push(ev);
                    IntrinsicFlow::Continue { effective: true }
                } else if state.threads[target].exited() {
                    IntrinsicFlow::Continue { effective: false }
                } else {
                    state.threads[t].status = Status::JoinWait { target };
                    IntrinsicFlow::Parked
                }
            }
            Intrinsic::Exit => {
                self.emit_exit(state, t, events, span);
                IntrinsicFlow::Exited
            }
            Intrinsic::Lock(m) => {
                let (lock, count) = self.pv.mutex_fields(m);
                let mut ev = Event::new(t, span, format!("lock({m})"), state.guard);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                let acquired = mcx.lock_attempt(state, &mut ev, lock, count);
                events.push(ev);
                if acquired {
                    IntrinsicFlow::Continue { effective: true }
                } else {
                    state.threads[t].status = Status::LockWait { lock, count, span };
                    IntrinsicFlow::Parked
                }
            }
            Intrinsic::Unlock(m) => {
                let (lock, _) = self.pv.mutex_fields(m);
                let mut ev = Event::new(t, span, format!("unlock({m})"), state.guard);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.unlock(state, &mut ev, lock, span, t);
                events.push(ev);
                IntrinsicFlow::Continue { effective: true }
            }
            Intrinsic::Wait { cond, mutex } => {
                let (cond_lock, nwaiters) = self.pv.cond_fields(cond);
                let (mutex_lock, _) = self.pv.mutex_fields(mutex);
                let mut ev = Event::new(t, span, format!("wait({cond}, {mutex})"), state.guard);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                let recorded_bid =
                    mcx.wait_enter(state, &mut ev, cond_lock, nwaiters, mutex_lock, span, t);
                events.push(ev);
                state.threads[t].status = Status::CondWait {
                    cond_lock,
                    nwaiters,
                    mutex_lock,
                    woken: false,
                    recorded_bid,
                    span,
                };
                IntrinsicFlow::Parked
            }
            Intrinsic::Signal(c) => {
                let (cond_lock, nwaiters) = self.pv.cond_fields(c);
                let mut ev = Event::new(t, span, format!("signal({c})"), state.guard);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.signal(state, &mut ev, cond_lock, nwaiters);
                events.push(ev);
                let waiters = cond_waiters(state, cond_lock);
                match waiters.len() {
                    0 => IntrinsicFlow::Continue { effective: true },
                    1 => {
                        set_woken(state, waiters[0]);
                        IntrinsicFlow::Continue { effective: true }
                    }
                    _ => IntrinsicFlow::Wake(waiters),
                }
            }
            Intrinsic::Broadcast(c) => {
                let (cond_lock, nwaiters) = self.pv.cond_fields(c);
                let mut ev = Event::new(t, span, format!("broadcast({c})"), state.guard);
                let mut mcx = ModelCx { ctx: self.ctx, pv: self.pv };
                mcx.broadcast(state, &mut ev, cond_lock, nwaiters);
                events.push(ev);
                for w in cond_waiters(state, cond_lock) {
                    set_woken(state, w);
                }
                IntrinsicFlow::Continue { effective: true }
            }
        }
    }

    /// Switch-point test: effective statements another thread could observe.
    /// With POR off, every effective statement is a switch point.
    pub fn is_switch_stmt(&mut self, state: &SymState, t: usize, kind: &NodeKind) -> bool {
        match kind {
            NodeKind::Nop | NodeKind::Test { .. } => false,
            NodeKind::Intrinsic(i) => match i {
                Intrinsic::AtomicBegin | Intrinsic::AtomicEnd => false,
                Intrinsic::Exit => !self.config.por,
                Intrinsic::Create { arg, .. } => {
                    !self.config.por
                        || arg.as_ref().map(|a| self.reads_global(state, t, a)).unwrap_or(false)
                }
                _ => true,
            },
            NodeKind::Assign { target, value } => {
                if !self.config.por {
                    return true;
                }
                let target_global = match target {
                    LValue::Var(n) => self.pv.global_scalars.contains_key(n),
                    LValue::Index(n, _) => self.pv.global_arrays.contains_key(n),
                };
                target_global
                    || self.reads_global(state, t, value)
                    || matches!(target, LValue::Index(_, i) if self.reads_global(state, t, i))
            }
            NodeKind::Assert { cond, .. } | NodeKind::Assume(cond) => {
                !self.config.por || self.reads_global(state, t, cond)
            }
        }
    }

    fn reads_global(&mut self, state: &SymState, t: usize, e: &Expr) -> bool {
        let mut set = std::collections::BTreeSet::new();
        let ecx = self.ecx(state, t);
        ecx.read_globals(e, &mut set);
        !set.is_empty()
    }

    /// Statements touching several globals are accepted but flagged: the
    /// statement-granular interleaving is an under-approximation for them.
    fn warn_multi_global(&mut self, state: &SymState, t: usize, kind: &NodeKind, span: Span) {
        let mut set = std::collections::BTreeSet::new();
        {
            let ecx = self.ecx(state, t);
            match kind {
                NodeKind::Assign { target, value } => {
                    ecx.read_globals(value, &mut set);
                    match target {
                        LValue::Var(n) => {
                            if let Some(&v) = ecx.pv.global_scalars.get(n) {
                                set.insert(v);
                            }
                        }
                        LValue::Index(n, i) => {
                            ecx.read_globals(i, &mut set);
                            if let Some((b, _)) = ecx.pv.global_arrays.get(n) {
                                set.insert(*b);
                            }
                        }
                    }
                }
                NodeKind::Assert { cond, .. } | NodeKind::Assume(cond) => {
                    ecx.read_globals(cond, &mut set)
                }
                _ => {}
            }
        }
        if set.len() > 1 {
            let msg = format!(
                "{}:{}: statement accesses {} globals; verified without context switches inside the statement",
                span.line,
                span.col,
                set.len()
            );
            if !self.warnings.contains(&msg) {
                self.warnings.push(msg);
            }
        }
    }
}

fn cond_waiters(state: &SymState, cond_lock_var: crate::encoder::VarId) -> Vec<usize> {
    state
        .threads
        .iter()
        .filter(|th| {
            matches!(th.status, Status::CondWait { cond_lock, woken: false, .. }
                if cond_lock == cond_lock_var)
        })
        .map(|th| th.instance)
        .collect()
}

fn set_woken(state: &mut SymState, instance: usize) {
    if let Status::CondWait { woken, .. } = &mut state.threads[instance].status {
        *woken = true;
    }
}
