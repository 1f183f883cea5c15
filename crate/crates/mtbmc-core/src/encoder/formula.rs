//! Assembly of verification conditions from exploration events, and their
//! lowering to CNF.
//!
//! A formula is satisfiable exactly when some represented interleaving
//! violates some property: initial-state and transition equations are
//! asserted, the property side is the disjunction of per-obligation
//! violation conditions, and (in schedule mode) thread-selection variables
//! range over the threads that can occupy each ECS block. The widening
//! encoding adds named selectors that force control-literal conjunctions
//! false while active; the solver's unsat core then names exactly the
//! selectors that mattered.

use std::collections::BTreeMap;

use crate::solver::{Lit, Model};
use crate::symex::{ControlLiteral, Event, Obligation, SsaTrace, TreeInfo, CTR_WIDTH};

use super::bitblast::{BitBlaster, Blasted};
use super::term::{Sort, TermCtx, TermId, VarId};

#[derive(Debug, Clone)]
pub struct Formula {
    /// `I(s0)` bindings (variable, version 0, constant term).
    pub init: Vec<(VarId, u32, TermId)>,
    /// Ordered statement events; their equations are the transition
    /// constraints and their obligations form the property disjunction.
    pub events: Vec<Event>,
    /// Schedule-side constraints: ts domains, wake domains, extra SCH.
    pub schedule: Vec<TermId>,
    /// Widening selectors: name -> control-literal conjunction. Active
    /// selectors are passed as solver assumptions.
    pub selectors: Vec<(String, TermId)>,
}

impl Formula {
    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.events.iter().flat_map(|e| e.obligations.iter())
    }

    pub fn num_obligations(&self) -> usize {
        self.obligations().count()
    }
}

/// ψ of the lazy strategy: the VC of one explored interleaving.
pub fn encode_lazy(init: &[(VarId, u32, TermId)], trace: &SsaTrace) -> Formula {
    encode_lazy_events(init, &trace.events)
}

/// As [`encode_lazy`], from a borrowed event slice.
pub fn encode_lazy_events(init: &[(VarId, u32, TermId)], events: &[Event]) -> Formula {
    Formula {
        init: init.to_vec(),
        events: events.to_vec(),
        schedule: Vec::new(),
        selectors: Vec::new(),
    }
}

/// ψ of the schedule-recording strategy: all pruned interleavings in one
/// formula. `extra_schedule` narrows the allowed schedules (the SCH
/// constraints); empty means every represented interleaving is allowed.
pub fn encode_schedule(
    ctx: &mut TermCtx,
    init: &[(VarId, u32, TermId)],
    events: Vec<Event>,
    info: &TreeInfo,
    extra_schedule: &[TermId],
) -> Formula {
    let ts_id = ctx.intern("__ts");
    let mut schedule = Vec::new();
    for (&block, threads) in &info.ts_domains {
        let ts = ctx.bv_var(ts_id, block, CTR_WIDTH);
        let mut domain = ctx.fls();
        for &t in threads {
            let idc = ctx.bvc(t as u64, CTR_WIDTH);
            let eq = ctx.eq_bv(ts, idc);
            domain = ctx.or(domain, eq);
        }
        schedule.push(domain);
    }
    schedule.extend_from_slice(&info.extra_constraints);
    schedule.extend_from_slice(extra_schedule);
    Formula { init: init.to_vec(), events, schedule, selectors: Vec::new() }
}

/// ψ' of the widening strategy: the schedule formula plus named selectors
/// for the control literals. Selectors in the active set are asserted false
/// through assumptions at solve time; removed literals stay unconstrained.
pub fn encode_uw(base: Formula, literals: &[ControlLiteral]) -> Formula {
    let mut f = base;
    f.selectors =
        literals.iter().map(|l| (l.name.clone(), l.conj)).collect();
    f
}

/// CNF form of a formula plus everything needed to interpret models and
/// cores at the term level.
pub struct BlastedFormula {
    pub blasted: Blasted,
    /// Indicator literal per obligation, in event order; the property root
    /// clause is their disjunction.
    pub obligation_lits: Vec<Lit>,
    /// Indexes into the flattened obligation list, same order.
    pub obligation_refs: Vec<ObligationRef>,
    pub selector_lits: BTreeMap<String, Lit>,
}

/// Position of an obligation inside the event list.
#[derive(Debug, Clone, Copy)]
pub struct ObligationRef {
    pub event: usize,
    pub slot: usize,
}

/// Lower ψ to an equisatisfiable CNF via Tseitin bit-blasting.
pub fn bitblast(ctx: &mut TermCtx, f: &Formula) -> BlastedFormula {
    // Build equality terms first (term construction needs &mut ctx, the
    // blaster borrows it shared).
    let mut constraint_terms: Vec<TermId> = Vec::new();
    for (var, version, rhs) in &f.init {
        constraint_terms.push(binding_eq(ctx, *var, *version, *rhs));
    }
    for e in &f.events {
        for (var, version, rhs) in &e.eqs {
            constraint_terms.push(binding_eq(ctx, *var, *version, *rhs));
        }
    }
    constraint_terms.extend_from_slice(&f.schedule);

    let mut bb = BitBlaster::new(ctx);
    for t in &constraint_terms {
        bb.assert_term(*t);
    }

    let mut obligation_lits = Vec::new();
    let mut obligation_refs = Vec::new();
    for (ei, e) in f.events.iter().enumerate() {
        for (slot, ob) in e.obligations.iter().enumerate() {
            let l = bb.blast_bool(ob.cond_violated);
            obligation_lits.push(l);
            obligation_refs.push(ObligationRef { event: ei, slot });
        }
    }
    // Property side: some obligation must be violated.
    let root = bb.or_all(&obligation_lits);
    bb.assert_lit(root);

    let mut selector_lits = BTreeMap::new();
    for (name, conj) in &f.selectors {
        let s = bb.fresh();
        let c = bb.blast_bool(*conj);
        // s -> ¬conj
        bb.add_clause([s.negate(), c.negate()]);
        selector_lits.insert(name.clone(), s);
    }

    let mut blasted = bb.finish();
    blasted.cnf.assumption_vars = selector_lits.values().map(|l| l.var()).collect();
    BlastedFormula { blasted, obligation_lits, obligation_refs, selector_lits }
}

fn binding_eq(ctx: &mut TermCtx, var: VarId, version: u32, rhs: TermId) -> TermId {
    match ctx.sort(rhs) {
        Sort::Bool => {
            let lhs = ctx.bool_var(var, version);
            ctx.eq_bool(lhs, rhs)
        }
        Sort::Bv(w) => {
            let lhs = ctx.bv_var(var, version, w);
            ctx.eq_bv(lhs, rhs)
        }
    }
}

impl BlastedFormula {
    /// Indexes (into the flattened obligation order) of obligations whose
    /// violation condition holds under `model`.
    pub fn violated(&self, model: &Model) -> Vec<usize> {
        self.obligation_lits
            .iter()
            .enumerate()
            .filter(|(_, l)| model.lit_true(**l))
            .map(|(i, _)| i)
            .collect()
    }
}
