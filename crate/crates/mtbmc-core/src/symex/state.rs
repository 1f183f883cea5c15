//! Symbolic execution state: SSA versioning, constant folds, thread
//! statuses, and the trace events emitted per executed statement.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::cfg::NodeId;
use crate::encoder::{Sort, TermCtx, TermId, VarId};
use crate::frontend::ast::Span;

/// Fixed width for bookkeeping counters, thread handles, and schedule
/// variables. Bounds thread counts and broadcasts at 255 per run.
pub const CTR_WIDTH: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObligationTag {
    Assertion,
    Unwinding,
    Deadlock,
    BadUnlock,
    BadWait,
    DivByZero,
}

impl ObligationTag {
    pub fn label(self) -> &'static str {
        match self {
            ObligationTag::Assertion => "assert",
            ObligationTag::Unwinding => "unwinding",
            ObligationTag::Deadlock => "deadlock",
            ObligationTag::BadUnlock => "bad-unlock",
            ObligationTag::BadWait => "bad-wait",
            ObligationTag::DivByZero => "div-by-zero",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Obligation {
    /// Satisfied exactly when the property is violated on a feasible path:
    /// `guard ∧ ¬property`.
    pub cond_violated: TermId,
    pub tag: ObligationTag,
    pub span: Span,
    pub thread: usize,
    pub desc: String,
}

/// One executed statement instance.
#[derive(Debug, Clone)]
pub struct Event {
    pub thread: usize,
    /// CFG node that produced this event; synthetic events (exit
    /// bookkeeping, stuck checks) carry none and are skipped by replay.
    pub node: Option<NodeId>,
    pub span: Span,
    pub desc: String,
    /// Path guard at this statement (branch conditions, assumptions, and in
    /// schedule mode the ts prefix).
    pub guard: TermId,
    /// Fresh SSA bindings `var@version = term`.
    pub eqs: Vec<(VarId, u32, TermId)>,
    pub obligations: Vec<Obligation>,
    /// Base names of globals written here (whole array for element writes).
    pub written_globals: Vec<VarId>,
    /// Effective statements carry schedule guards; tests and no-ops do not.
    pub effective: bool,
}

impl Event {
    pub fn new(thread: usize, span: Span, desc: String, guard: TermId) -> Event {
        Event {
            thread,
            node: None,
            span,
            desc,
            guard,
            eqs: Vec::new(),
            obligations: Vec::new(),
            written_globals: Vec::new(),
            effective: true,
        }
    }
}

/// Where a variable lives and how it prints.
#[derive(Debug, Clone)]
pub struct VarInfo {
    pub sort: Sort,
    /// For globals (and array elements), the base global; locals carry none.
    pub global_base: Option<VarId>,
    /// Pretty name for traces (`a[3]`, `arg`).
    pub display: String,
}

/// SSA version map, constant folds, and the variable dictionary.
///
/// The per-branch `versions` map names the version currently visible on
/// this exploration branch; fresh version numbers come from an allocator
/// shared across the whole exploration, so sibling branches of the
/// tree encoding can never define the same SSA variable twice.
#[derive(Debug, Clone, Default)]
pub struct VarStore {
    pub versions: HashMap<VarId, u32>,
    alloc: std::rc::Rc<std::cell::RefCell<HashMap<VarId, u32>>>,
    /// Concrete value when known on the current exploration branch.
    pub folds: HashMap<VarId, u64>,
    pub info: HashMap<VarId, VarInfo>,
}

impl VarStore {
    pub fn declare(&mut self, var: VarId, info: VarInfo) {
        self.info.entry(var).or_insert(info);
        self.versions.entry(var).or_insert(0);
        self.alloc.borrow_mut().entry(var).or_insert(0);
    }

    pub fn version(&self, var: VarId) -> u32 {
        *self.versions.get(&var).unwrap_or(&0)
    }

    pub fn sort(&self, var: VarId) -> Sort {
        self.info.get(&var).map(|i| i.sort).expect("undeclared variable")
    }

    /// Current-version term for `var`.
    pub fn cur(&self, ctx: &mut TermCtx, var: VarId) -> TermId {
        let ver = self.version(var);
        match self.sort(var) {
            Sort::Bool => ctx.bool_var(var, ver),
            Sort::Bv(w) => ctx.bv_var(var, ver, w),
        }
    }

    pub fn fold(&self, var: VarId) -> Option<u64> {
        self.folds.get(&var).copied()
    }

    pub fn set_fold(&mut self, var: VarId, v: Option<u64>) {
        match v {
            Some(x) => {
                self.folds.insert(var, x);
            }
            None => {
                self.folds.remove(&var);
            }
        }
    }

    /// Bind a fresh SSA version framed by `guard`:
    /// `var@n+1 = ite(guard, rhs, var@n)`. Returns the binding unless it
    /// folds to the identity frame (guard constant-false, or rhs equal to
    /// the old value), in which case nothing changes.
    pub fn assign(
        &mut self,
        ctx: &mut TermCtx,
        var: VarId,
        guard: TermId,
        rhs: TermId,
        rhs_fold: Option<u64>,
    ) -> Option<(VarId, u32, TermId)> {
        let old = self.cur(ctx, var);
        let framed = match self.sort(var) {
            Sort::Bool => ctx.ite_bool(guard, rhs, old),
            Sort::Bv(_) => ctx.ite_bv(guard, rhs, old),
        };
        if framed == old {
            return None;
        }
        let next = {
            let mut alloc = self.alloc.borrow_mut();
            let slot = alloc.entry(var).or_insert(0);
            *slot += 1;
            *slot
        };
        self.versions.insert(var, next);
        // The exploration branch assumes its own guards hold, so the fold
        // takes the assigned value regardless of the symbolic guard.
        self.set_fold(var, rhs_fold);
        Some((var, next, framed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Free,
    JoinWait { target: usize },
    /// Parked in the middle of a lock acquisition (between the two atomic
    /// sections of the mutex model).
    LockWait { lock: VarId, count: VarId, span: Span },
    /// Parked on a condition variable; `woken` flips when a signal or
    /// broadcast arrives, after which the thread still contends for the
    /// mutex before resuming.
    CondWait {
        cond_lock: VarId,
        nwaiters: VarId,
        mutex_lock: VarId,
        woken: bool,
        recorded_bid: u64,
        span: Span,
    },
    Exited,
}

#[derive(Debug, Clone)]
pub struct ThreadState {
    pub instance: usize,
    /// Index into the unrolled CFG set (0 = entry thread).
    pub cfg_id: usize,
    pub name: String,
    pub pc: Option<NodeId>,
    pub status: Status,
    /// Nesting depth of atomic sections held by this thread.
    pub atomic_depth: u32,
    /// Variable prefix for locals of this instance (`Tx#1.`).
    pub local_prefix: String,
}

impl ThreadState {
    pub fn exited(&self) -> bool {
        matches!(self.status, Status::Exited)
    }
}

/// Full exploration state; cloned at branch points.
#[derive(Debug, Clone)]
pub struct SymState {
    pub threads: Vec<ThreadState>,
    pub store: VarStore,
    /// Path guard: branch conditions, assumptions, wake conditions, and (in
    /// schedule mode) ts guards accumulated so far.
    pub guard: TermId,
    /// Pure thread-selection prefix (ts guards only); control literals of
    /// the widening encoding are drawn from it.
    pub ts_conj: TermId,
    /// Bypass threads deferred at an earlier choice point, with the globals
    /// their frontier tests read; a conflicting write re-offers them.
    pub deferred: BTreeMap<usize, BTreeSet<VarId>>,
    /// Last scheduled thread; a different choice opens a new ECS block.
    pub last_thread: Option<usize>,
    /// Current ECS block number (0 = unguarded initial block).
    pub block: u32,
    pub nondet_counter: u32,
    pub wake_counter: u32,
}

impl SymState {
    /// Instance ids of threads blocked in join/lock/cond states.
    pub fn parked(&self) -> Vec<usize> {
        self.threads
            .iter()
            .filter(|t| {
                matches!(
                    t.status,
                    Status::JoinWait { .. } | Status::LockWait { .. } | Status::CondWait { .. }
                )
            })
            .map(|t| t.instance)
            .collect()
    }

    pub fn join_blocked_count(&self) -> u64 {
        self.threads
            .iter()
            .filter(|t| matches!(t.status, Status::JoinWait { .. }))
            .count() as u64
    }

    pub fn live_count(&self) -> usize {
        self.threads.iter().filter(|t| !t.exited()).count()
    }
}
