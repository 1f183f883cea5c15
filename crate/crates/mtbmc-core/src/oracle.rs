//! Explicit-state reference interpreter.
//!
//! Runs programs concretely, enumerating every interleaving at statement
//! granularity and every nondet value, with its own model of the
//! synchronization intrinsics. It shares only the front-end, the CFGs, and
//! the scalar arithmetic definitions with the symbolic engine — no terms,
//! no SAT — so it serves as an independent verdict oracle for small
//! programs and as the concrete replayer that validates counterexamples.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::cfg::{AssertKind, CfgSet, NodeId, NodeKind, Succ, ThreadCfg, UnrolledSet};
use crate::encoder::bits;
use crate::frontend::ast::{BinOp, Expr, ExprKind, Intrinsic, LValue, Span, TypeName, UnOp};
use crate::frontend::TypedProgram;
use crate::symex::ObligationTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CStatus {
    Free,
    JoinWait(usize),
    LockWait,
    CondWait { woken: bool, recorded_bid: u64 },
    Exited,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CThread {
    cfg_id: usize,
    pc: Option<NodeId>,
    status: CStatus,
    atomic: u32,
    /// Object names the thread is blocked on (mutex / cond+mutex).
    blocked_on: Option<(String, Option<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
struct SyncState {
    mutexes: BTreeMap<String, (bool, u64)>,
    conds: BTreeMap<String, (bool, u64)>,
    trds_in_run: u64,
    broadcast_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CState {
    threads: Vec<CThread>,
    globals: BTreeMap<String, u64>,
    elems: BTreeMap<(String, usize), u64>,
    locals: BTreeMap<(usize, String), u64>,
    sync: SyncState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationInfo {
    pub tag: ObligationTag,
    pub thread: usize,
    pub span: Span,
    pub desc: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Safe,
    Violated(Vec<ViolationInfo>),
}

impl OracleVerdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, OracleVerdict::Violated(_))
    }

    pub fn has_tag(&self, tag: ObligationTag) -> bool {
        match self {
            OracleVerdict::Safe => false,
            OracleVerdict::Violated(vs) => vs.iter().any(|v| v.tag == tag),
        }
    }
}

/// Outcome of a guided replay.
#[derive(Debug, Clone)]
pub struct ReplayEnd {
    pub violation: Option<ViolationInfo>,
    pub deadlocked: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("state budget exceeded ({0} states)")]
    StateBudget(usize),
    #[error("path depth budget exceeded ({0} statements)")]
    DepthBudget(usize),
    #[error("replay diverged: {0}")]
    Replay(String),
}

pub struct Oracle<'a> {
    tp: &'a TypedProgram,
    cfgs: Vec<&'a ThreadCfg>,
    width: u32,
    max_states: usize,
    max_depth: usize,
}

#[derive(Debug)]
enum StmtOutcome {
    /// Statement ran; whether it counts as an observable emission.
    Ran { emitted: bool },
    /// Thread blocked (lock/wait parks are recorded actions, join parks
    /// silent; replay distinguishes them by node coordinates).
    Parked,
    /// Path ended by an unsatisfiable assume.
    Infeasible,
    Violation(ViolationInfo),
    /// Signal with several waiters and no pick supplied: caller enumerates.
    WakeChoice(Vec<usize>),
}

impl<'a> Oracle<'a> {
    pub fn from_cfgs(tp: &'a TypedProgram, set: &'a CfgSet, width: u32) -> Oracle<'a> {
        Oracle {
            tp,
            cfgs: set.threads.iter().collect(),
            width,
            max_states: 2_000_000,
            max_depth: 100_000,
        }
    }

    pub fn from_unrolled(tp: &'a TypedProgram, set: &'a UnrolledSet, width: u32) -> Oracle<'a> {
        Oracle {
            tp,
            cfgs: set.threads.iter().map(|u| &u.cfg).collect(),
            width,
            max_states: 2_000_000,
            max_depth: 100_000,
        }
    }

    fn initial(&self) -> CState {
        let mut globals = BTreeMap::new();
        let mut elems = BTreeMap::new();
        let mut sync = SyncState { trds_in_run: 1, ..Default::default() };
        for (name, ty, init) in &self.tp.globals {
            match ty {
                TypeName::Int => {
                    globals.insert(name.clone(), bits::from_signed(*init, self.width));
                }
                TypeName::Bool | TypeName::Thread => {
                    globals.insert(name.clone(), *init as u64);
                }
                TypeName::IntArray(n) => {
                    for i in 0..*n {
                        elems.insert((name.clone(), i), 0);
                    }
                }
                TypeName::Mutex => {
                    sync.mutexes.insert(name.clone(), (false, 0));
                }
                TypeName::Cond => {
                    sync.conds.insert(name.clone(), (false, 0));
                }
            }
        }
        CState {
            threads: vec![CThread {
                cfg_id: 0,
                pc: self.cfgs[0].entry,
                status: CStatus::Free,
                atomic: 0,
                blocked_on: None,
            }],
            globals,
            elems,
            locals: BTreeMap::new(),
            sync,
        }
    }

    fn array_len(&self, name: &str) -> usize {
        match self.tp.global_type(name) {
            Some(TypeName::IntArray(n)) => *n,
            _ => panic!("not an array: {name}"),
        }
    }

    /// Count nondet draws in an expression (traversal order matches eval).
    fn count_nondet(e: &Expr) -> usize {
        match &e.kind {
            ExprKind::NondetInt => 1,
            ExprKind::Unary(_, i) => Self::count_nondet(i),
            ExprKind::Binary(_, l, r) => Self::count_nondet(l) + Self::count_nondet(r),
            ExprKind::Index(_, i) => Self::count_nondet(i),
            _ => 0,
        }
    }

    fn node_nondet_count(kind: &NodeKind) -> usize {
        match kind {
            NodeKind::Assign { target, value } => {
                Self::count_nondet(value)
                    + match target {
                        LValue::Index(_, i) => Self::count_nondet(i),
                        LValue::Var(_) => 0,
                    }
            }
            NodeKind::Assert { cond, .. } | NodeKind::Assume(cond) | NodeKind::Test { cond } => {
                Self::count_nondet(cond)
            }
            NodeKind::Intrinsic(Intrinsic::Create { arg: Some(a), .. }) => Self::count_nondet(a),
            _ => 0,
        }
    }

    fn eval(
        &self,
        st: &CState,
        t: usize,
        e: &Expr,
        draws: &mut VecDeque<u64>,
    ) -> u64 {
        let w = self.width;
        match &e.kind {
            ExprKind::IntLit(v) => bits::from_signed(*v, w),
            ExprKind::BoolLit(b) => *b as u64,
            ExprKind::NondetInt => draws.pop_front().expect("nondet draw available"),
            ExprKind::Var(name) => self.read_var(st, t, name),
            ExprKind::Index(name, idx) => {
                let iv = self.eval(st, t, idx, draws);
                let si = bits::to_signed(iv, w);
                let n = self.array_len(name);
                let i = if si >= 0 && (si as usize) < n { si as usize } else { n - 1 };
                st.elems[&(name.clone(), i)]
            }
            ExprKind::Unary(op, inner) => {
                let v = self.eval(st, t, inner, draws);
                match op {
                    UnOp::Neg => bits::neg(v, w),
                    UnOp::BitNot => bits::not(v, w),
                    UnOp::Not => (v == 0) as u64,
                }
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(st, t, l, draws);
                let b = self.eval(st, t, r, draws);
                match op {
                    BinOp::Add => bits::add(a, b, w),
                    BinOp::Sub => bits::sub(a, b, w),
                    BinOp::Mul => bits::mul(a, b, w),
                    BinOp::Div => bits::sdiv(a, b, w),
                    BinOp::Rem => bits::srem(a, b, w),
                    BinOp::BitAnd => bits::mask(a & b, w),
                    BinOp::BitOr => bits::mask(a | b, w),
                    BinOp::BitXor => bits::mask(a ^ b, w),
                    BinOp::Shl => bits::shl(a, bits::mask(b, w), w),
                    BinOp::Shr => bits::ashr(a, bits::mask(b, w), w),
                    BinOp::Eq => (a == b) as u64,
                    BinOp::Ne => (a != b) as u64,
                    BinOp::Lt => bits::slt(a, b, w) as u64,
                    BinOp::Le => bits::sle(a, b, w) as u64,
                    BinOp::Gt => bits::slt(b, a, w) as u64,
                    BinOp::Ge => bits::sle(b, a, w) as u64,
                    BinOp::And => ((a != 0) && (b != 0)) as u64,
                    BinOp::Or => ((a != 0) || (b != 0)) as u64,
                }
            }
        }
    }

    fn read_var(&self, st: &CState, t: usize, name: &str) -> u64 {
        if let Some(v) = st.locals.get(&(t, name.to_string())) {
            return *v;
        }
        if let Some(v) = st.globals.get(name) {
            return *v;
        }
        // Locals default to zero until first write (compiler temporaries).
        0
    }

    /// Names shadow nothing (the typechecker rejects duplicates), so
    /// membership in the global table decides where a write lands.
    fn write_var(&self, st: &mut CState, t: usize, name: &str, value: u64) {
        if st.globals.contains_key(name) {
            st.globals.insert(name.to_string(), value);
        } else {
            st.locals.insert((t, name.to_string()), value);
        }
    }

    /// Execute the single statement at `t`'s pc. `draws` feeds nondets and
    /// `wakes` feeds signal wake choices.
    fn exec_stmt(
        &self,
        st: &mut CState,
        t: usize,
        draws: &mut VecDeque<u64>,
        wakes: &mut VecDeque<usize>,
    ) -> StmtOutcome {
        let cfg = self.cfgs[st.threads[t].cfg_id];
        let pc = st.threads[t].pc.expect("running thread has a pc");
        let node = cfg.node(pc);
        let advance = |st: &mut CState, t: usize| {
            st.threads[t].pc = match cfg.node(pc).succ {
                Succ::Halt => None,
                Succ::Next(n) => Some(n),
                Succ::Branch { .. } => unreachable!(),
            };
        };
        match &node.kind {
            NodeKind::Nop => {
                advance(st, t);
                StmtOutcome::Ran { emitted: false }
            }
            NodeKind::Test { cond } => {
                let v = self.eval(st, t, cond, draws);
                let (then_to, else_to) = match node.succ {
                    Succ::Branch { then_to, else_to } => (then_to, else_to),
                    _ => unreachable!(),
                };
                st.threads[t].pc = Some(if v != 0 { then_to } else { else_to });
                StmtOutcome::Ran { emitted: false }
            }
            NodeKind::Assign { target, value } => {
                match target {
                    LValue::Var(name) => {
                        let v = self.eval(st, t, value, draws);
                        self.write_var(st, t, name, v);
                    }
                    LValue::Index(name, idx) => {
                        let iv = self.eval(st, t, idx, draws);
                        let v = self.eval(st, t, value, draws);
                        let si = bits::to_signed(iv, self.width);
                        let n = self.array_len(name);
                        if si >= 0 && (si as usize) < n {
                            st.elems.insert((name.clone(), si as usize), v);
                        }
                    }
                }
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
            NodeKind::Assert { cond, kind } => {
                let v = self.eval(st, t, cond, draws);
                if v == 0 {
                    let tag = match kind {
                        AssertKind::User => ObligationTag::Assertion,
                        AssertKind::Unwinding => ObligationTag::Unwinding,
                    };
                    return StmtOutcome::Violation(ViolationInfo {
                        tag,
                        thread: t,
                        span: node.span,
                        desc: "assertion violated".into(),
                    });
                }
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
            NodeKind::Assume(cond) => {
                let v = self.eval(st, t, cond, draws);
                if v == 0 {
                    return StmtOutcome::Infeasible;
                }
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
            NodeKind::Intrinsic(intr) => {
                self.exec_intrinsic(st, t, intr, node.span, draws, wakes, advance)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn exec_intrinsic(
        &self,
        st: &mut CState,
        t: usize,
        intr: &Intrinsic,
        span: Span,
        draws: &mut VecDeque<u64>,
        wakes: &mut VecDeque<usize>,
        advance: impl Fn(&mut CState, usize),
    ) -> StmtOutcome {
        match intr {
            Intrinsic::AtomicBegin => {
                st.threads[t].atomic += 1;
                advance(st, t);
                StmtOutcome::Ran { emitted: false }
            }
            Intrinsic::AtomicEnd => {
                st.threads[t].atomic = st.threads[t].atomic.saturating_sub(1);
                advance(st, t);
                StmtOutcome::Ran { emitted: false }
            }
            Intrinsic::Create { handle, thread, arg } => {
                let def = self.tp.thread_index[thread];
                let cfg_id = def + 1;
                let instance = st.threads.len();
                if let Some(a) = arg {
                    let v = self.eval(st, t, a, draws);
                    let pname = self.tp.program.threads[def].params[0].name.clone();
                    st.locals.insert((instance, pname), v);
                }
                self.write_var(st, t, handle, instance as u64);
                st.threads.push(CThread {
                    cfg_id,
                    pc: self.cfgs[cfg_id].entry,
                    status: CStatus::Free,
                    atomic: 0,
                    blocked_on: None,
                });
                st.sync.trds_in_run += 1;
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
            Intrinsic::Join(handle) => {
                let target = self.read_var(st, t, handle) as usize;
                if target == 0 || target >= st.threads.len() {
                    return StmtOutcome::Violation(ViolationInfo {
                        tag: ObligationTag::Assertion,
                        thread: t,
                        span,
                        desc: "join on invalid thread handle".into(),
                    });
                }
                if st.threads[target].status == CStatus::Exited {
                    advance(st, t);
                    StmtOutcome::Ran { emitted: false }
                } else {
                    st.threads[t].status = CStatus::JoinWait(target);
                    StmtOutcome::Parked
                }
            }
            Intrinsic::Exit => {
                st.threads[t].status = CStatus::Exited;
                st.threads[t].pc = None;
                st.sync.trds_in_run -= 1;
                StmtOutcome::Ran { emitted: true }
            }
            Intrinsic::Lock(m) => {
                let entry = st.sync.mutexes.get_mut(m).expect("declared mutex");
                if !entry.0 {
                    entry.0 = true;
                    advance(st, t);
                    StmtOutcome::Ran { emitted: true }
                } else {
                    entry.1 += 1;
                    st.threads[t].status = CStatus::LockWait;
                    st.threads[t].blocked_on = Some((m.clone(), None));
                    StmtOutcome::Parked
                }
            }
            Intrinsic::Unlock(m) => {
                let entry = st.sync.mutexes.get_mut(m).expect("declared mutex");
                if !entry.0 {
                    return StmtOutcome::Violation(ViolationInfo {
                        tag: ObligationTag::BadUnlock,
                        thread: t,
                        span,
                        desc: "unlock of a mutex that is not locked".into(),
                    });
                }
                entry.0 = false;
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
            Intrinsic::Wait { cond, mutex } => {
                let held = st.sync.mutexes[mutex].0;
                if !held {
                    return StmtOutcome::Violation(ViolationInfo {
                        tag: ObligationTag::BadWait,
                        thread: t,
                        span,
                        desc: "wait without holding the mutex".into(),
                    });
                }
                st.sync.mutexes.get_mut(mutex).unwrap().0 = false;
                let c = st.sync.conds.get_mut(cond).unwrap();
                c.0 = true;
                c.1 += 1;
                let bid = st.sync.broadcast_id;
                st.threads[t].status = CStatus::CondWait { woken: false, recorded_bid: bid };
                st.threads[t].blocked_on = Some((cond.clone(), Some(mutex.clone())));
                StmtOutcome::Parked
            }
            Intrinsic::Signal(c) => {
                let entry = st.sync.conds.get_mut(c).unwrap();
                entry.0 = false;
                entry.1 = entry.1.saturating_sub(1);
                let waiters: Vec<usize> = st
                    .threads
                    .iter()
                    .enumerate()
                    .filter(|(_, th)| {
                        matches!(th.status, CStatus::CondWait { woken: false, .. })
                            && th.blocked_on.as_ref().map(|(cn, _)| cn == c).unwrap_or(false)
                    })
                    .map(|(i, _)| i)
                    .collect();
                match waiters.len() {
                    0 => {
                        advance(st, t);
                        StmtOutcome::Ran { emitted: true }
                    }
                    1 => {
                        wake(st, waiters[0]);
                        advance(st, t);
                        StmtOutcome::Ran { emitted: true }
                    }
                    _ => match wakes.pop_front() {
                        Some(w) => {
                            wake(st, w);
                            advance(st, t);
                            StmtOutcome::Ran { emitted: true }
                        }
                        None => StmtOutcome::WakeChoice(waiters),
                    },
                }
            }
            Intrinsic::Broadcast(c) => {
                st.sync.broadcast_id += 1;
                let entry = st.sync.conds.get_mut(c).unwrap();
                entry.0 = false;
                entry.1 = 0;
                let waiters: Vec<usize> = st
                    .threads
                    .iter()
                    .enumerate()
                    .filter(|(_, th)| {
                        matches!(th.status, CStatus::CondWait { woken: false, .. })
                            && th.blocked_on.as_ref().map(|(cn, _)| cn == c).unwrap_or(false)
                    })
                    .map(|(i, _)| i)
                    .collect();
                for w in waiters {
                    wake(st, w);
                }
                advance(st, t);
                StmtOutcome::Ran { emitted: true }
            }
        }
    }

    /// Scheduler maintenance mirroring the symbolic engine: wake join
    /// waiters whose target exited, advance free threads through satisfied
    /// joins and no-ops (parking at unsatisfied joins), exit fall-off
    /// threads, and flush threads whose remainder can reach nothing
    /// effective.
    fn normalize(&self, st: &mut CState) {
        loop {
            let mut progress = false;
            for i in 0..st.threads.len() {
                if let CStatus::JoinWait(target) = st.threads[i].status {
                    if st.threads[target].status == CStatus::Free
                        && st.threads[target].pc.is_some()
                        && !self.has_reachable_effective(st, target)
                    {
                        self.run_empty_remainder(st, target);
                        progress = true;
                    }
                    if st.threads[target].status == CStatus::Exited {
                        st.threads[i].status = CStatus::Free;
                        let cfg = self.cfgs[st.threads[i].cfg_id];
                        let pc = st.threads[i].pc.expect("parked join has a pc");
                        st.threads[i].pc = match cfg.node(pc).succ {
                            Succ::Halt => None,
                            Succ::Next(n) => Some(n),
                            Succ::Branch { .. } => unreachable!(),
                        };
                        progress = true;
                    }
                }
                if st.threads[i].status == CStatus::Free {
                    progress |= self.advance_silent(st, i);
                }
                // Implicit exit for threads past their last node.
                if st.threads[i].status == CStatus::Free && st.threads[i].pc.is_none() {
                    st.threads[i].status = CStatus::Exited;
                    st.sync.trds_in_run -= 1;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
    }

    /// Mirror of the symbolic engine's silent advancement: satisfied joins
    /// and no-ops move; unsatisfied joins park; everything else waits to be
    /// scheduled. The fall-off exit is left to `normalize`.
    fn advance_silent(&self, st: &mut CState, t: usize) -> bool {
        let mut moved = false;
        loop {
            let Some(pc) = st.threads[t].pc else { break };
            let cfg = self.cfgs[st.threads[t].cfg_id];
            let node = cfg.node(pc);
            let next = match node.succ {
                Succ::Next(n) => Some(n),
                Succ::Halt => None,
                Succ::Branch { .. } => break,
            };
            match &node.kind {
                NodeKind::Nop => {
                    st.threads[t].pc = next;
                    moved = true;
                    if next.is_none() {
                        break; // normalize performs the implicit exit
                    }
                }
                NodeKind::Intrinsic(Intrinsic::Join(handle)) => {
                    let target = self.read_var(st, t, handle) as usize;
                    if target == 0 || target >= st.threads.len() {
                        break; // scheduled execution reports this
                    }
                    // A join target stuck on an effective-free remainder is
                    // flushed through it; the ordering is unobservable and
                    // the symbolic side never records those statements.
                    if st.threads[target].status == CStatus::Free
                        && st.threads[target].pc.is_some()
                        && !self.has_reachable_effective(st, target)
                    {
                        self.run_empty_remainder(st, target);
                    }
                    if st.threads[target].status == CStatus::Exited {
                        st.threads[t].pc = next;
                        moved = true;
                        if next.is_none() {
                            break;
                        }
                    } else {
                        st.threads[t].status = CStatus::JoinWait(target);
                        break;
                    }
                }
                _ => break,
            }
        }
        moved
    }

    /// Anything effective reachable from the thread's pc, following tests
    /// concretely — the oracle twin of the symbolic enabledness check.
    fn has_reachable_effective(&self, st: &CState, t: usize) -> bool {
        let cfg = self.cfgs[st.threads[t].cfg_id];
        let mut pc = st.threads[t].pc;
        // Concrete execution follows a single path, so a plain walk with a
        // step bound suffices.
        let mut fuel = cfg.nodes.len() + 1;
        while let Some(p) = pc {
            if fuel == 0 {
                return true; // cyclic graph: be conservative
            }
            fuel -= 1;
            let node = cfg.node(p);
            match &node.kind {
                NodeKind::Nop => {}
                NodeKind::Test { cond } => {
                    let mut no_draws = VecDeque::new();
                    let v = self.eval(st, t, cond, &mut no_draws);
                    let (then_to, else_to) = match node.succ {
                        Succ::Branch { then_to, else_to } => (then_to, else_to),
                        _ => unreachable!(),
                    };
                    pc = Some(if v != 0 { then_to } else { else_to });
                    continue;
                }
                NodeKind::Intrinsic(i) => match i {
                    Intrinsic::AtomicBegin | Intrinsic::AtomicEnd | Intrinsic::Exit => {}
                    _ => return true,
                },
                _ => return true,
            }
            pc = match node.succ {
                Succ::Halt => None,
                Succ::Next(n) => Some(n),
                Succ::Branch { .. } => unreachable!(),
            };
        }
        false
    }

    /// Run a thread through its effective-free remainder to the exit.
    fn run_empty_remainder(&self, st: &mut CState, t: usize) {
        let mut fuel = self.cfgs[st.threads[t].cfg_id].nodes.len() + 1;
        while st.threads[t].pc.is_some() && fuel > 0 {
            fuel -= 1;
            let mut draws = VecDeque::new();
            let mut wakes = VecDeque::new();
            match self.exec_stmt(st, t, &mut draws, &mut wakes) {
                StmtOutcome::Ran { .. } => {}
                other => panic!("empty remainder diverged: {other:?}"),
            }
        }
        if st.threads[t].pc.is_none() && st.threads[t].status == CStatus::Free {
            st.threads[t].status = CStatus::Exited;
            st.sync.trds_in_run -= 1;
        }
    }

    fn runnable(&self, st: &CState) -> Vec<usize> {
        // Atomic sections pin the scheduler to their owner while it can run.
        if let Some(owner) = st
            .threads
            .iter()
            .position(|th| th.atomic > 0 && th.status == CStatus::Free && th.pc.is_some())
        {
            return vec![owner];
        }
        st.threads
            .iter()
            .enumerate()
            .filter(|(_, th)| match th.status {
                CStatus::Free => th.pc.is_some(),
                CStatus::LockWait => {
                    let m = &th.blocked_on.as_ref().unwrap().0;
                    !st.sync.mutexes[m].0
                }
                CStatus::CondWait { woken, .. } => {
                    if !woken {
                        return false;
                    }
                    let m = th.blocked_on.as_ref().unwrap().1.as_ref().unwrap();
                    !st.sync.mutexes[m].0
                }
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Resume a parked thread (scheduler chose it and its wake condition
    /// holds): finish the pending lock/wait and advance past it.
    fn resume(&self, st: &mut CState, t: usize) {
        let cfg = self.cfgs[st.threads[t].cfg_id];
        let pc = st.threads[t].pc.expect("parked thread has a pc");
        match st.threads[t].status {
            CStatus::LockWait => {
                let m = st.threads[t].blocked_on.clone().unwrap().0;
                let e = st.sync.mutexes.get_mut(&m).unwrap();
                debug_assert!(!e.0);
                e.0 = true;
                e.1 -= 1;
            }
            CStatus::CondWait { .. } => {
                let m = st.threads[t].blocked_on.clone().unwrap().1.unwrap();
                let e = st.sync.mutexes.get_mut(&m).unwrap();
                debug_assert!(!e.0);
                e.0 = true;
            }
            _ => unreachable!(),
        }
        st.threads[t].status = CStatus::Free;
        st.threads[t].blocked_on = None;
        st.threads[t].pc = match cfg.node(pc).succ {
            Succ::Halt => None,
            Succ::Next(n) => Some(n),
            Succ::Branch { .. } => unreachable!(),
        };
    }

    /// Exhaustively explore all interleavings and nondet draws; collect
    /// every distinct violation kind reachable.
    pub fn verdict(&self) -> Result<OracleVerdict, OracleError> {
        let mut visited: HashSet<CState> = HashSet::new();
        let mut violations: Vec<ViolationInfo> = Vec::new();
        let mut stack: Vec<(CState, usize)> = vec![(self.initial(), 0)];

        while let Some((mut st, depth)) = stack.pop() {
            if depth > self.max_depth {
                return Err(OracleError::DepthBudget(self.max_depth));
            }
            self.normalize(&mut st);
            if !visited.insert(st.clone()) {
                continue;
            }
            if visited.len() > self.max_states {
                return Err(OracleError::StateBudget(self.max_states));
            }
            let runnable = self.runnable(&st);
            if runnable.is_empty() {
                let any_parked = st.threads.iter().any(|th| {
                    matches!(
                        th.status,
                        CStatus::JoinWait(_) | CStatus::LockWait | CStatus::CondWait { .. }
                    )
                });
                if any_parked {
                    let v = ViolationInfo {
                        tag: ObligationTag::Deadlock,
                        thread: 0,
                        span: Span::default(),
                        desc: "global deadlock".into(),
                    };
                    if !violations.contains(&v) {
                        violations.push(v);
                    }
                }
                continue;
            }
            for t in runnable {
                if !matches!(st.threads[t].status, CStatus::Free) {
                    let mut succ = st.clone();
                    self.resume(&mut succ, t);
                    stack.push((succ, depth + 1));
                    continue;
                }
                let pc = st.threads[t].pc.unwrap();
                let kind = &self.cfgs[st.threads[t].cfg_id].node(pc).kind;
                let n_draws = Self::node_nondet_count(kind);
                let domain = 1u64 << self.width.min(20);
                let combos = domain.pow(n_draws as u32);
                for combo in 0..combos {
                    let mk_draws = |combo: u64| {
                        let mut d = VecDeque::new();
                        let mut c = combo;
                        for _ in 0..n_draws {
                            d.push_back(c % domain);
                            c /= domain;
                        }
                        d
                    };
                    let mut draws = mk_draws(combo);
                    let mut no_wakes = VecDeque::new();
                    let mut succ = st.clone();
                    match self.exec_stmt(&mut succ, t, &mut draws, &mut no_wakes) {
                        StmtOutcome::Ran { .. } | StmtOutcome::Parked => {
                            stack.push((succ, depth + 1))
                        }
                        StmtOutcome::Infeasible => {}
                        StmtOutcome::Violation(v) => {
                            if !violations.contains(&v) {
                                violations.push(v);
                            }
                        }
                        StmtOutcome::WakeChoice(waiters) => {
                            for w in waiters {
                                let mut s2 = st.clone();
                                let mut d2 = mk_draws(combo);
                                let mut w2: VecDeque<usize> = VecDeque::from([w]);
                                match self.exec_stmt(&mut s2, t, &mut d2, &mut w2) {
                                    StmtOutcome::Ran { .. } => stack.push((s2, depth + 1)),
                                    other => panic!("guided wake diverged: {other:?}"),
                                }
                            }
                        }
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(OracleVerdict::Safe)
        } else {
            Ok(OracleVerdict::Violated(violations))
        }
    }

    /// Replay a specific interleaving. Each guide entry names the thread
    /// and CFG node of one recorded action; the interpreter advances the
    /// thread silently (tests, no-ops, satisfied joins) up to that node and
    /// executes it. `nondets` and `wakes` feed the recorded draws and
    /// signal wake choices. Returns what the run reached.
    pub fn replay(
        &self,
        guide: &[(usize, NodeId)],
        nondets: &[u64],
        wakes: &[usize],
    ) -> Result<ReplayEnd, OracleError> {
        let mut st = self.initial();
        let mut draws: VecDeque<u64> = nondets.iter().copied().collect();
        let mut wake_queue: VecDeque<usize> = wakes.iter().copied().collect();
        let mut steps = 0usize;

        for (gi, &(t, node)) in guide.iter().enumerate() {
            steps += 1;
            if steps > self.max_depth {
                return Err(OracleError::DepthBudget(self.max_depth));
            }
            self.normalize(&mut st);
            if t >= st.threads.len() {
                return Err(OracleError::Replay(format!("guide names unknown thread {t}")));
            }
            if !matches!(st.threads[t].status, CStatus::Free) {
                // The recorded action is the resumption of a parked thread.
                if !self.runnable(&st).contains(&t) {
                    return Err(OracleError::Replay(format!(
                        "entry {gi}: blocked thread {t} cannot resume"
                    )));
                }
                if st.threads[t].pc != Some(node) {
                    return Err(OracleError::Replay(format!(
                        "entry {gi}: resume node mismatch for thread {t}"
                    )));
                }
                self.resume(&mut st, t);
                continue;
            }
            // Silent advance to the recorded node, then execute it.
            let mut local_steps = 0usize;
            while st.threads[t].pc != Some(node) {
                local_steps += 1;
                if local_steps > self.max_depth || st.threads[t].pc.is_none() {
                    return Err(OracleError::Replay(format!(
                        "entry {gi}: thread {t} never reaches the recorded node"
                    )));
                }
                match self.exec_stmt(&mut st, t, &mut draws, &mut wake_queue) {
                    StmtOutcome::Ran { emitted: false } => {}
                    other => {
                        return Err(OracleError::Replay(format!(
                            "entry {gi}: unexpected {other:?} before the recorded node"
                        )))
                    }
                }
            }
            match self.exec_stmt(&mut st, t, &mut draws, &mut wake_queue) {
                StmtOutcome::Ran { .. } | StmtOutcome::Parked => {}
                StmtOutcome::Infeasible => {
                    return Err(OracleError::Replay(
                        "replay hit an unsatisfiable assume".into(),
                    ))
                }
                StmtOutcome::Violation(v) => {
                    return Ok(ReplayEnd { violation: Some(v), deadlocked: false })
                }
                StmtOutcome::WakeChoice(_) => {
                    return Err(OracleError::Replay("missing wake choice".into()))
                }
            }
        }
        // Drain silent remainders so the final deadlock judgment matches
        // the recorded trace (bypass threads fall off their empty paths).
        self.flush_silent(&mut st)?;
        if std::env::var("MTBMC_DEBUG_REPLAY").is_ok() {
            eprintln!("replay end state:");
            for (i, th) in st.threads.iter().enumerate() {
                eprintln!("  T{i}: pc={:?} status={:?} atomic={}", th.pc, th.status, th.atomic);
            }
            eprintln!("  runnable: {:?}", self.runnable(&st));
        }
        let deadlocked = self.runnable(&st).is_empty()
            && st.threads.iter().any(|th| {
                matches!(
                    th.status,
                    CStatus::JoinWait(_) | CStatus::LockWait | CStatus::CondWait { .. }
                )
            });
        Ok(ReplayEnd { violation: None, deadlocked })
    }

    /// End-of-replay cleanup: flush free threads whose remainder can reach
    /// nothing effective, so the final deadlock judgment sees the same
    /// thread population the recorded trace did.
    fn flush_silent(&self, st: &mut CState) -> Result<(), OracleError> {
        loop {
            self.normalize(st);
            let flushable = (0..st.threads.len()).find(|&t| {
                matches!(st.threads[t].status, CStatus::Free)
                    && st.threads[t].pc.is_some()
                    && !self.has_reachable_effective(st, t)
            });
            match flushable {
                Some(t) => self.run_empty_remainder(st, t),
                None => return Ok(()),
            }
        }
    }
}

fn wake(st: &mut CState, t: usize) {
    if let CStatus::CondWait { woken, .. } = &mut st.threads[t].status {
        *woken = true;
    }
}
