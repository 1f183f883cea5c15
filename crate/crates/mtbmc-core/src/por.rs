//! Partial-order reduction analyses.
//!
//! Two reductions prune interleavings before anything is encoded: the
//! visibility analysis glues statements that touch no shared state to their
//! predecessor (no context-switch opportunity is created before them), and
//! the read-write analysis merges schedules from states where one thread's
//! remaining accesses cannot conflict with anybody else's. Array accesses
//! count as touching the whole array: without an alias analysis that is the
//! sound granularity.

use std::collections::BTreeSet;

use crate::cfg::{NodeId, NodeKind, Succ, UnrolledSet};
use crate::encoder::{TermCtx, VarId};
use crate::frontend::ast::{Expr, Intrinsic, LValue};
use crate::frontend::TypedProgram;
use crate::symex::vars::{ExprCx, ProgramVars};

/// Read/write footprints over global variables (and synchronization
/// objects); locals never appear.
#[derive(Debug, Clone, Default)]
pub struct RwSets {
    pub reads: BTreeSet<VarId>,
    pub writes: BTreeSet<VarId>,
    /// Mutex/cond objects touched; any sharing is a conflict.
    pub sync_names: BTreeSet<String>,
}

/// Equivalence of the two orders of a pair of visible instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessClass {
    Equivalent,
    NonEquivalent,
}

/// Footprint of a single statement, for the pairwise analysis.
pub fn stmt_rw(
    ctx: &mut TermCtx,
    tp: &TypedProgram,
    pv: &ProgramVars,
    def_index: Option<usize>,
    local_prefix: &str,
    kind: &NodeKind,
) -> RwSets {
    let mut rw = RwSets::default();
    let ecx = ExprCx {
        ctx,
        pv,
        tp,
        def_index,
        local_prefix: local_prefix.to_string(),
        check_div_zero: false,
    };
    let read_expr = |e: &Expr, rw: &mut RwSets| ecx.read_globals(e, &mut rw.reads);
    match kind {
        NodeKind::Nop => {}
        NodeKind::Test { cond } => read_expr(cond, &mut rw),
        NodeKind::Assert { cond, .. } | NodeKind::Assume(cond) => read_expr(cond, &mut rw),
        NodeKind::Assign { target, value } => {
            read_expr(value, &mut rw);
            match target {
                LValue::Var(n) => {
                    if let Some(&v) = pv.global_scalars.get(n) {
                        rw.writes.insert(v);
                    }
                }
                LValue::Index(n, i) => {
                    read_expr(i, &mut rw);
                    if let Some((base, _)) = pv.global_arrays.get(n) {
                        rw.writes.insert(*base);
                    }
                }
            }
        }
        NodeKind::Intrinsic(intr) => match intr {
            Intrinsic::AtomicBegin | Intrinsic::AtomicEnd | Intrinsic::Exit => {}
            Intrinsic::Create { handle, arg, .. } => {
                if let Some(a) = arg {
                    read_expr(a, &mut rw);
                }
                if let Some(&v) = pv.global_scalars.get(handle) {
                    rw.writes.insert(v);
                }
            }
            Intrinsic::Join(h) => {
                if let Some(&v) = pv.global_scalars.get(h) {
                    rw.reads.insert(v);
                }
            }
            Intrinsic::Lock(m) | Intrinsic::Unlock(m) => sync_object(pv, m, &mut rw),
            Intrinsic::Wait { cond, mutex } => {
                sync_object(pv, cond, &mut rw);
                sync_object(pv, mutex, &mut rw);
            }
            Intrinsic::Signal(c) | Intrinsic::Broadcast(c) => sync_object(pv, c, &mut rw),
        },
    }
    rw
}

fn sync_object(pv: &ProgramVars, name: &str, rw: &mut RwSets) {
    debug_assert!(pv.mutexes.contains_key(name) || pv.conds.contains_key(name));
    rw.sync_names.insert(name.to_string());
}

/// An instruction is visible if it accesses a global variable; statements
/// that only touch locals are invisible and never open a context switch.
/// Synchronization operations affect other threads and count as visible.
pub fn visible(
    ctx: &mut TermCtx,
    tp: &TypedProgram,
    pv: &ProgramVars,
    def_index: Option<usize>,
    local_prefix: &str,
    kind: &NodeKind,
) -> bool {
    match kind {
        NodeKind::Intrinsic(i) => !matches!(
            i,
            Intrinsic::AtomicBegin | Intrinsic::AtomicEnd | Intrinsic::Exit
        ) && !matches!(i, Intrinsic::Create { arg: None, .. }),
        _ => {
            let rw = stmt_rw(ctx, tp, pv, def_index, local_prefix, kind);
            !rw.reads.is_empty() || !rw.writes.is_empty()
        }
    }
}

/// Table-driven pair classification: only same-variable pairs with at least
/// one write generate non-equivalent interleavings.
pub fn classify_pair(a: &RwSets, b: &RwSets) -> AccessClass {
    let conflict = a.writes.iter().any(|v| b.reads.contains(v) || b.writes.contains(v))
        || b.writes.iter().any(|v| a.reads.contains(v) || a.writes.contains(v))
        || a.sync_names.iter().any(|n| b.sync_names.contains(n));
    if conflict {
        AccessClass::NonEquivalent
    } else {
        AccessClass::Equivalent
    }
}

/// The merge condition: thread `j` may be explored alone when
/// `WR_j ∩ (RD_others ∪ WR_others) = ∅` and `RD_j ∩ WR_others = ∅`.
pub fn rw_independent(j: &RwSets, others: &RwSets) -> bool {
    j.writes.is_disjoint(&others.reads)
        && j.writes.is_disjoint(&others.writes)
        && j.reads.is_disjoint(&others.writes)
        && j.sync_names.is_disjoint(&others.sync_names)
}

/// Union of statement footprints over everything reachable from `pc` in the
/// unrolled CFG (static, fold-free: the suffix a thread may still execute).
pub fn remaining_rw(
    ctx: &mut TermCtx,
    tp: &TypedProgram,
    cfgs: &UnrolledSet,
    cfg_id: usize,
    pc: NodeId,
    pv: &ProgramVars,
    local_prefix: &str,
) -> RwSets {
    let mut acc = RwSets::default();
    let mut visited_defs = BTreeSet::new();
    collect_from(ctx, tp, cfgs, cfg_id, pc, pv, local_prefix, &mut acc, &mut visited_defs);
    acc
}

#[allow(clippy::too_many_arguments)]
fn collect_from(
    ctx: &mut TermCtx,
    tp: &TypedProgram,
    cfgs: &UnrolledSet,
    cfg_id: usize,
    start: NodeId,
    pv: &ProgramVars,
    local_prefix: &str,
    acc: &mut RwSets,
    visited_defs: &mut BTreeSet<usize>,
) {
    let cfg = &cfgs.threads[cfg_id].cfg;
    let mut stack = vec![start];
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        let node = cfg.node(n);
        let rw = stmt_rw(ctx, tp, pv, cfg.def_index, local_prefix, &node.kind);
        acc.reads.extend(rw.reads);
        acc.writes.extend(rw.writes);
        acc.sync_names.extend(rw.sync_names);
        // A create pulls in the whole footprint of the spawned thread.
        if let NodeKind::Intrinsic(Intrinsic::Create { thread, .. }) = &node.kind {
            if let Some(&def) = tp.thread_index.get(thread) {
                if visited_defs.insert(def) {
                    let child_cfg = def + 1;
                    if let Some(entry) = cfgs.threads[child_cfg].cfg.entry {
                        collect_from(
                            ctx,
                            tp,
                            cfgs,
                            child_cfg,
                            entry,
                            pv,
                            "child.",
                            acc,
                            visited_defs,
                        );
                    }
                }
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
}
