//! Variable dictionary: interning of program globals, per-instance locals,
//! synchronization-object fields, and bookkeeping counters; expression
//! translation to terms with parallel constant folding.

use std::collections::HashMap;

use crate::encoder::{bits, Sort, TermCtx, TermId, VarId};
use crate::frontend::ast::{BinOp, Expr, ExprKind, TypeName, UnOp};
use crate::frontend::TypedProgram;

use super::state::{Event, Obligation, ObligationTag, SymState, VarInfo, VarStore, CTR_WIDTH};

/// Interned ids for the fixed bookkeeping variables plus lookup tables for
/// program globals.
#[derive(Debug, Clone)]
pub struct ProgramVars {
    pub width: u32,
    pub trds_in_run: VarId,
    pub blocked: VarId,
    pub broadcast_id: VarId,
    pub ts: VarId,
    pub nondet: VarId,
    pub wake: VarId,
    /// Global scalar name -> var.
    pub global_scalars: HashMap<String, VarId>,
    /// Global array name -> (base var, element vars).
    pub global_arrays: HashMap<String, (VarId, Vec<VarId>)>,
    /// Mutex name -> (lock field, count field).
    pub mutexes: HashMap<String, (VarId, VarId)>,
    /// Cond name -> (lock field, nwaiters field).
    pub conds: HashMap<String, (VarId, VarId)>,
}

impl ProgramVars {
    /// Intern all globals and bookkeeping variables, declare them in the
    /// store, and return the `I(s0)` equations binding version 0.
    pub fn init(
        ctx: &mut TermCtx,
        store: &mut VarStore,
        tp: &TypedProgram,
        width: u32,
    ) -> (ProgramVars, Vec<(VarId, u32, TermId)>) {
        let mut pv = ProgramVars {
            width,
            trds_in_run: ctx.intern("__trds_in_run"),
            blocked: ctx.intern("__blocked"),
            broadcast_id: ctx.intern("__broadcast_id"),
            ts: ctx.intern("__ts"),
            nondet: ctx.intern("__nd"),
            wake: ctx.intern("__wake"),
            global_scalars: HashMap::new(),
            global_arrays: HashMap::new(),
            mutexes: HashMap::new(),
            conds: HashMap::new(),
        };
        let mut init = Vec::new();
        let bind = |ctx: &mut TermCtx,
                        store: &mut VarStore,
                        var: VarId,
                        info: VarInfo,
                        value: u64,
                        init: &mut Vec<(VarId, u32, TermId)>| {
            store.declare(var, info.clone());
            let rhs = match info.sort {
                Sort::Bool => ctx.boolc(value != 0),
                Sort::Bv(w) => ctx.bvc(value, w),
            };
            store.set_fold(var, Some(value));
            init.push((var, 0, rhs));
        };

        for (name, ty, initial) in &tp.globals {
            match ty {
                TypeName::Int | TypeName::Bool => {
                    let var = ctx.intern(name);
                    let sort = if *ty == TypeName::Bool { Sort::Bool } else { Sort::Bv(width) };
                    let value = if *ty == TypeName::Bool {
                        (*initial != 0) as u64
                    } else {
                        bits::from_signed(*initial, width)
                    };
                    pv.global_scalars.insert(name.clone(), var);
                    bind(
                        ctx,
                        store,
                        var,
                        VarInfo { sort, global_base: Some(var), display: name.clone() },
                        value,
                        &mut init,
                    );
                }
                TypeName::IntArray(n) => {
                    let base = ctx.intern(name);
                    let mut elems = Vec::with_capacity(*n);
                    for i in 0..*n {
                        let ev = ctx.intern(&format!("{name}[{i}]"));
                        elems.push(ev);
                        bind(
                            ctx,
                            store,
                            ev,
                            VarInfo {
                                sort: Sort::Bv(width),
                                global_base: Some(base),
                                display: format!("{name}[{i}]"),
                            },
                            0,
                            &mut init,
                        );
                    }
                    pv.global_arrays.insert(name.clone(), (base, elems));
                }
                TypeName::Mutex => {
                    let lock = ctx.intern(&format!("{name}.__lock"));
                    let count = ctx.intern(&format!("{name}.__count"));
                    let base = ctx.intern(name);
                    for (v, field) in [(lock, "lock"), (count, "count")] {
                        bind(
                            ctx,
                            store,
                            v,
                            VarInfo {
                                sort: Sort::Bv(CTR_WIDTH),
                                global_base: Some(base),
                                display: format!("{name}.{field}"),
                            },
                            0,
                            &mut init,
                        );
                    }
                    pv.mutexes.insert(name.clone(), (lock, count));
                }
                TypeName::Cond => {
                    let lock = ctx.intern(&format!("{name}.__lock"));
                    let nwaiters = ctx.intern(&format!("{name}.__nwaiters"));
                    let base = ctx.intern(name);
                    for (v, field) in [(lock, "lock"), (nwaiters, "nwaiters")] {
                        bind(
                            ctx,
                            store,
                            v,
                            VarInfo {
                                sort: Sort::Bv(CTR_WIDTH),
                                global_base: Some(base),
                                display: format!("{name}.{field}"),
                            },
                            0,
                            &mut init,
                        );
                    }
                    pv.conds.insert(name.clone(), (lock, nwaiters));
                }
                TypeName::Thread => {
                    let var = ctx.intern(name);
                    pv.global_scalars.insert(name.clone(), var);
                    bind(
                        ctx,
                        store,
                        var,
                        VarInfo {
                            sort: Sort::Bv(CTR_WIDTH),
                            global_base: Some(var),
                            display: name.clone(),
                        },
                        0,
                        &mut init,
                    );
                }
            }
        }

        // main + counters: one thread running, none blocked.
        for (var, name, value) in [
            (pv.trds_in_run, "trds_in_run", 1u64),
            (pv.blocked, "blocked", 0),
            (pv.broadcast_id, "broadcast_id", 0),
        ] {
            bind(
                ctx,
                store,
                var,
                VarInfo { sort: Sort::Bv(CTR_WIDTH), global_base: None, display: name.into() },
                value,
                &mut init,
            );
        }

        (pv, init)
    }

    /// Resolve `name` as seen from an instance with `local_prefix`: locals
    /// shadow nothing (the typechecker forbids duplicates), so this just
    /// picks the right dictionary entry, declaring locals lazily.
    pub fn resolve(
        &self,
        ctx: &mut TermCtx,
        store: &mut VarStore,
        tp: &TypedProgram,
        def_index: Option<usize>,
        local_prefix: &str,
        name: &str,
    ) -> VarId {
        if let Some(&v) = self.global_scalars.get(name) {
            return v;
        }
        let var = ctx.intern(&format!("{local_prefix}{name}"));
        if !store.info.contains_key(&var) {
            let sort = match tp.lookup(def_index, name) {
                Some(TypeName::Bool) => Sort::Bool,
                Some(TypeName::Thread) => Sort::Bv(CTR_WIDTH),
                // Compiler temporaries (`__t..`) and ints share the program
                // width.
                _ => Sort::Bv(self.width),
            };
            store.declare(
                var,
                VarInfo { sort, global_base: None, display: name.to_string() },
            );
        }
        var
    }

    pub fn mutex_fields(&self, name: &str) -> (VarId, VarId) {
        *self.mutexes.get(name).expect("typechecked mutex")
    }

    pub fn cond_fields(&self, name: &str) -> (VarId, VarId) {
        *self.conds.get(name).expect("typechecked cond")
    }
}

/// Result of translating an expression: the term plus its concrete value on
/// this exploration branch when every input is known.
pub struct Translated {
    pub term: TermId,
    pub fold: Option<u64>,
}

pub struct ExprCx<'a> {
    pub ctx: &'a mut TermCtx,
    pub pv: &'a ProgramVars,
    pub tp: &'a TypedProgram,
    pub def_index: Option<usize>,
    pub local_prefix: String,
    pub check_div_zero: bool,
}

impl<'a> ExprCx<'a> {
    /// Translate `e`; draws fresh nondet symbols from `state` and appends
    /// division obligations to `event` when enabled.
    pub fn translate(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        e: &Expr,
    ) -> Translated {
        let w = self.pv.width;
        match &e.kind {
            ExprKind::IntLit(v) => Translated {
                term: self.ctx.bvc_signed(*v, w),
                fold: Some(bits::from_signed(*v, w)),
            },
            ExprKind::BoolLit(b) => {
                Translated { term: self.ctx.boolc(*b), fold: Some(*b as u64) }
            }
            ExprKind::NondetInt => {
                let version = state.nondet_counter;
                state.nondet_counter += 1;
                let term = self.ctx.bv_var(self.pv.nondet, version, w);
                Translated { term, fold: None }
            }
            ExprKind::Var(name) => {
                let var = self.pv.resolve(
                    self.ctx,
                    &mut state.store,
                    self.tp,
                    self.def_index,
                    &self.local_prefix,
                    name,
                );
                Translated { term: state.store.cur(self.ctx, var), fold: state.store.fold(var) }
            }
            ExprKind::Index(name, idx) => {
                let idx_t = self.translate(state, event, idx);
                let (_, elems) = self
                    .pv
                    .global_arrays
                    .get(name)
                    .cloned()
                    .expect("typechecked array");
                let n = elems.len();
                if let Some(iv) = idx_t.fold {
                    let si = bits::to_signed(iv, w);
                    // Concrete out-of-range reads pin to the last element,
                    // mirroring the ite-chain fallthrough below.
                    let e_idx = if si >= 0 && (si as usize) < n { si as usize } else { n - 1 };
                    let var = elems[e_idx];
                    return Translated {
                        term: state.store.cur(self.ctx, var),
                        fold: state.store.fold(var),
                    };
                }
                // ite(idx=0, a[0], ite(idx=1, a[1], ... a[n-1]))
                let mut acc = state.store.cur(self.ctx, elems[n - 1]);
                for i in (0..n - 1).rev() {
                    let ic = self.ctx.bvc(i as u64, w);
                    let eq = self.ctx.eq_bv(idx_t.term, ic);
                    let elem = state.store.cur(self.ctx, elems[i]);
                    acc = self.ctx.ite_bv(eq, elem, acc);
                }
                Translated { term: acc, fold: None }
            }
            ExprKind::Unary(op, inner) => {
                let t = self.translate(state, event, inner);
                match op {
                    UnOp::Neg => Translated {
                        term: self.ctx.bv_neg(t.term),
                        fold: t.fold.map(|v| bits::neg(v, w)),
                    },
                    UnOp::BitNot => Translated {
                        term: self.ctx.bv_not(t.term),
                        fold: t.fold.map(|v| bits::not(v, w)),
                    },
                    UnOp::Not => Translated {
                        term: self.ctx.not(t.term),
                        fold: t.fold.map(|v| (v == 0) as u64),
                    },
                }
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.translate(state, event, l);
                // && and || still translate both sides (terms are pure);
                // only the fold short-circuits.
                let rt = self.translate(state, event, r);
                self.binary(state, event, *op, lt, rt, e)
            }
        }
    }

    fn binary(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        op: BinOp,
        l: Translated,
        r: Translated,
        e: &Expr,
    ) -> Translated {
        let w = self.pv.width;
        let ff = |f: fn(u64, u64, u32) -> u64, l: &Translated, r: &Translated| match (l.fold, r.fold)
        {
            (Some(a), Some(b)) => Some(f(a, b, w)),
            _ => None,
        };
        let fb = |f: fn(u64, u64, u32) -> bool, l: &Translated, r: &Translated| match (l.fold, r.fold)
        {
            (Some(a), Some(b)) => Some(f(a, b, w) as u64),
            _ => None,
        };
        match op {
            BinOp::Add => {
                Translated { term: self.ctx.bv_add(l.term, r.term), fold: ff(bits::add, &l, &r) }
            }
            BinOp::Sub => {
                Translated { term: self.ctx.bv_sub(l.term, r.term), fold: ff(bits::sub, &l, &r) }
            }
            BinOp::Mul => {
                Translated { term: self.ctx.bv_mul(l.term, r.term), fold: ff(bits::mul, &l, &r) }
            }
            BinOp::Div | BinOp::Rem => {
                if self.check_div_zero {
                    let zero = self.ctx.bvc(0, w);
                    let is_zero = self.ctx.eq_bv(r.term, zero);
                    let violated = self.ctx.and(state.guard, is_zero);
                    if self.ctx.term(violated) != &crate::encoder::Term::False {
                        event.obligations.push(Obligation {
                            cond_violated: violated,
                            tag: ObligationTag::DivByZero,
                            span: e.span,
                            thread: event.thread,
                            desc: "division by zero".into(),
                        });
                    }
                }
                if op == BinOp::Div {
                    Translated {
                        term: self.ctx.bv_sdiv(l.term, r.term),
                        fold: ff(bits::sdiv, &l, &r),
                    }
                } else {
                    Translated {
                        term: self.ctx.bv_srem(l.term, r.term),
                        fold: ff(bits::srem, &l, &r),
                    }
                }
            }
            BinOp::BitAnd => Translated {
                term: self.ctx.bv_and(l.term, r.term),
                fold: ff(|a, b, w| bits::mask(a & b, w), &l, &r),
            },
            BinOp::BitOr => Translated {
                term: self.ctx.bv_or(l.term, r.term),
                fold: ff(|a, b, w| bits::mask(a | b, w), &l, &r),
            },
            BinOp::BitXor => Translated {
                term: self.ctx.bv_xor(l.term, r.term),
                fold: ff(|a, b, w| bits::mask(a ^ b, w), &l, &r),
            },
            BinOp::Shl => Translated {
                term: self.ctx.bv_shl(l.term, r.term),
                fold: ff(|a, b, w| bits::shl(a, bits::mask(b, w), w), &l, &r),
            },
            BinOp::Shr => Translated {
                term: self.ctx.bv_ashr(l.term, r.term),
                fold: ff(|a, b, w| bits::ashr(a, bits::mask(b, w), w), &l, &r),
            },
            BinOp::Eq | BinOp::Ne => {
                let is_bool = matches!(self.ctx.sort(l.term), Sort::Bool);
                let eq = if is_bool {
                    self.ctx.eq_bool(l.term, r.term)
                } else {
                    self.ctx.eq_bv(l.term, r.term)
                };
                let fold = match (l.fold, r.fold) {
                    (Some(a), Some(b)) => Some((a == b) as u64),
                    _ => None,
                };
                if op == BinOp::Eq {
                    Translated { term: eq, fold }
                } else {
                    Translated { term: self.ctx.not(eq), fold: fold.map(|v| 1 - v) }
                }
            }
            BinOp::Lt => Translated { term: self.ctx.slt(l.term, r.term), fold: fb(bits::slt, &l, &r) },
            BinOp::Le => Translated { term: self.ctx.sle(l.term, r.term), fold: fb(bits::sle, &l, &r) },
            BinOp::Gt => Translated { term: self.ctx.slt(r.term, l.term), fold: fb(|a, b, w| bits::slt(b, a, w), &l, &r) },
            BinOp::Ge => Translated { term: self.ctx.sle(r.term, l.term), fold: fb(|a, b, w| bits::sle(b, a, w), &l, &r) },
            BinOp::And => {
                let term = self.ctx.and(l.term, r.term);
                let fold = match (l.fold, r.fold) {
                    (Some(0), _) | (_, Some(0)) => Some(0),
                    (Some(_), Some(_)) => Some(1),
                    _ => None,
                };
                Translated { term, fold }
            }
            BinOp::Or => {
                let term = self.ctx.or(l.term, r.term);
                let fold = match (l.fold, r.fold) {
                    (Some(a), _) if a != 0 => Some(1),
                    (_, Some(b)) if b != 0 => Some(1),
                    (Some(0), Some(0)) => Some(0),
                    _ => None,
                };
                Translated { term, fold }
            }
        }
    }

    /// Globals read by `e` (base names, whole array for element reads).
    pub fn read_globals(&self, e: &Expr, out: &mut std::collections::BTreeSet<VarId>) {
        match &e.kind {
            ExprKind::Var(name) => {
                if let Some(&v) = self.pv.global_scalars.get(name) {
                    out.insert(v);
                }
            }
            ExprKind::Index(name, idx) => {
                if let Some((base, _)) = self.pv.global_arrays.get(name) {
                    out.insert(*base);
                }
                self.read_globals(idx, out);
            }
            ExprKind::Unary(_, inner) => self.read_globals(inner, out),
            ExprKind::Binary(_, l, r) => {
                self.read_globals(l, out);
                self.read_globals(r, out);
            }
            _ => {}
        }
    }
}
