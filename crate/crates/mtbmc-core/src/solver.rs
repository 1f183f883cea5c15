//! CDCL SAT engine with assumption literals and unsat-core extraction.
//!
//! Two-watched-literal propagation, first-UIP conflict analysis with
//! non-chronological backjumping, activity-based (VSIDS) branching with
//! phase saving, and Luby restarts. Assumptions are installed as the first
//! decisions; when one is falsified, a final-conflict analysis yields the
//! subset of assumptions responsible, which is the unsat core reported to
//! the widening loop. Each call builds a fresh solver: no state is shared
//! between calls.

use std::fmt::Write as _;

pub type Var = u32;

/// A literal: variable index plus polarity, packed as `var << 1 | sign`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var << 1 | (!positive) as u32)
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.positive() {
            write!(f, "{}", self.var() + 1)
        } else {
            write!(f, "-{}", self.var() + 1)
        }
    }
}

/// Clause set in conjunctive normal form.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Variables designated as assumption selectors.
    pub assumption_vars: Vec<Var>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.num_vars;
        self.num_vars += 1;
        v
    }

    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        let mut c: Vec<Lit> = lits.into_iter().collect();
        c.sort_unstable();
        c.dedup();
        // Tautologies never constrain anything.
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        for l in &c {
            assert!(l.var() < self.num_vars, "literal references undeclared variable");
        }
        self.clauses.push(c);
    }

    /// True if `assignment` (indexed by variable) satisfies every clause.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| assignment[l.var() as usize] == l.positive()))
    }

    /// DIMACS text for third-party cross-checks.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            let _ = writeln!(out, "0");
        }
        out
    }
}

/// Total assignment returned on satisfiable instances.
#[derive(Debug, Clone)]
pub struct Model(pub Vec<bool>);

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.0[v as usize]
    }

    pub fn lit_true(&self, l: Lit) -> bool {
        self.value(l.var()) == l.positive()
    }
}

#[derive(Debug, Clone)]
pub enum SolveResult {
    Sat(Model),
    /// Unsatisfiable; the core is a subset of the supplied assumptions that
    /// already makes the clauses unsatisfiable.
    Unsat(Vec<Lit>),
    /// Conflict budget exhausted.
    ResourceOut,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat(_))
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub seed: u64,
    pub conflict_limit: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { seed: 0, conflict_limit: None }
    }
}

#[derive(Debug, Default, Clone)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

const UNDEF: u8 = 2;

struct Clause {
    lits: Vec<Lit>,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: usize,
    blocker: Lit,
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assign: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    polarity: Vec<bool>,
    heap: Heap,
    seen: Vec<bool>,
    num_vars: u32,
    unsat_at_ingest: bool,
    conflict_limit: Option<u64>,
    stats: SolverStats,
}

/// Indexed max-heap over variable activities.
struct Heap {
    content: Vec<Var>,
    position: Vec<Option<usize>>,
}

impl Heap {
    fn new(n: usize) -> Heap {
        Heap { content: Vec::with_capacity(n), position: vec![None; n] }
    }

    fn percolate_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.content[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.content[parent] as usize] >= act[v as usize] {
                break;
            }
            self.content[i] = self.content[parent];
            self.position[self.content[i] as usize] = Some(i);
            i = parent;
        }
        self.content[i] = v;
        self.position[v as usize] = Some(i);
    }

    fn percolate_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.content[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.content.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.content.len()
                && act[self.content[r] as usize] > act[self.content[l] as usize]
            {
                r
            } else {
                l
            };
            if act[self.content[child] as usize] <= act[v as usize] {
                break;
            }
            self.content[i] = self.content[child];
            self.position[self.content[i] as usize] = Some(i);
            i = child;
        }
        self.content[i] = v;
        self.position[v as usize] = Some(i);
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.position[v as usize].is_some() {
            return;
        }
        self.content.push(v);
        let i = self.content.len() - 1;
        self.position[v as usize] = Some(i);
        self.percolate_up(i, act);
    }

    fn pop_max(&mut self, act: &[f64]) -> Option<Var> {
        if self.content.is_empty() {
            return None;
        }
        let top = self.content[0];
        self.position[top as usize] = None;
        let last = self.content.pop().unwrap();
        if !self.content.is_empty() {
            self.content[0] = last;
            self.position[last as usize] = Some(0);
            self.percolate_down(0, act);
        }
        Some(top)
    }

    fn update(&mut self, v: Var, act: &[f64]) {
        if let Some(i) = self.position[v as usize] {
            self.percolate_up(i, act);
        }
    }
}

fn luby(y: u64, mut x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u64);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.pow(seq as u32)
}

impl Solver {
    fn new(cnf: &Cnf, config: &SolverConfig) -> Solver {
        let n = cnf.num_vars as usize;
        // Seeded jitter makes tie-breaking reproducible per seed while
        // keeping runs with the same seed byte-identical.
        let mut state = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let activity: Vec<f64> = (0..n)
            .map(|_| if config.seed == 0 { 0.0 } else { (next() % 1024) as f64 * 1e-12 })
            .collect();

        let mut s = Solver {
            clauses: Vec::with_capacity(cnf.clauses.len()),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            polarity: vec![false; n],
            heap: Heap::new(n),
            seen: vec![false; n],
            num_vars: cnf.num_vars,
            unsat_at_ingest: false,
            conflict_limit: config.conflict_limit,
            stats: SolverStats::default(),
        };
        for v in 0..cnf.num_vars {
            s.heap.insert(v, &s.activity);
        }
        for c in &cnf.clauses {
            if !s.ingest_clause(c) {
                s.unsat_at_ingest = true;
                break;
            }
        }
        s
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assign[l.var() as usize];
        if a == UNDEF {
            UNDEF
        } else if (a == 1) == l.positive() {
            1
        } else {
            0
        }
    }

    fn lit_is_true(&self, l: Lit) -> bool {
        self.value(l) == 1
    }

    fn lit_is_false(&self, l: Lit) -> bool {
        self.value(l) == 0
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Add a clause at level 0, simplifying against the current root-level
    /// assignment. Returns false if the instance became unsatisfiable.
    fn ingest_clause(&mut self, lits: &[Lit]) -> bool {
        let mut filtered: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if self.lit_is_true(l) {
                return true; // already satisfied at the root
            }
            if !self.lit_is_false(l) {
                filtered.push(l);
            }
        }
        match filtered.len() {
            0 => false,
            1 => {
                self.enqueue(filtered[0], None);
                self.propagate().is_none()
            }
            _ => {
                let idx = self.clauses.len();
                self.watch(filtered[0], idx, filtered[1]);
                self.watch(filtered[1], idx, filtered[0]);
                self.clauses.push(Clause { lits: filtered, activity: 0.0 });
                true
            }
        }
    }

    fn watch(&mut self, l: Lit, clause: usize, blocker: Lit) {
        self.watches[l.negate().index()].push(Watch { clause, blocker });
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        debug_assert!(self.value(l) == UNDEF);
        let v = l.var() as usize;
        self.assign[v] = l.positive() as u8;
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;

            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            'watches: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_is_true(w.blocker) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause;
                let false_lit = p.negate();
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.lit_is_true(first) {
                    ws[j] = Watch { clause: ci, blocker: first };
                    j += 1;
                    continue;
                }
                let lits_len = self.clauses[ci].lits.len();
                for k in 2..lits_len {
                    let lk = self.clauses[ci].lits[k];
                    if !self.lit_is_false(lk) {
                        self.clauses[ci].lits.swap(1, k);
                        self.watch(lk, ci, first);
                        continue 'watches;
                    }
                }
                // Unit or conflicting.
                ws[j] = Watch { clause: ci, blocker: first };
                j += 1;
                if self.lit_is_false(first) {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    conflict = Some(ci);
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: Var) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v, &self.activity);
    }

    fn bump_clause(&mut self, ci: usize) {
        self.clauses[ci].activity += self.cla_inc;
        if self.clauses[ci].activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP learning. Returns (learnt clause, backtrack level); the
    /// asserting literal is placed first.
    fn analyze(&mut self, mut conflict: usize) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();

        loop {
            self.bump_clause(conflict);
            let start = usize::from(p.is_some());
            for k in start..self.clauses[conflict].lits.len() {
                let q = self.clauses[conflict].lits[k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] as usize >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                let l = self.trail[index];
                if self.seen[l.var() as usize] {
                    p = Some(l);
                    break;
                }
            }
            let pl = p.unwrap();
            let pv = pl.var() as usize;
            self.seen[pv] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = pl.negate();
                break;
            }
            conflict = self.reason[pv].expect("non-decision literal has a reason");
        }

        let bt_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var() as usize] as usize
        };
        for l in &learnt {
            self.seen[l.var() as usize] = false;
        }
        (learnt, bt_level)
    }

    fn backtrack(&mut self, level: usize) {
        while self.decision_level() > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.polarity[v] = l.positive();
                self.assign[v] = UNDEF;
                self.reason[v] = None;
                self.heap.insert(l.var(), &self.activity);
            }
        }
        self.qhead = self.trail.len();
    }

    /// Final-conflict analysis: the subset of assumptions implying `p`.
    fn analyze_final(&mut self, p: Lit, assumption_set: &[bool]) -> Vec<Lit> {
        let mut core = Vec::new();
        if assumption_set[p.var() as usize] {
            core.push(p.negate());
        }
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[p.var() as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if assumption_set[v] {
                        core.push(l);
                    }
                }
                Some(ci) => {
                    for k in 1..self.clauses[ci].lits.len() {
                        let q = self.clauses[ci].lits[k];
                        if self.level[q.var() as usize] > 0 {
                            self.seen[q.var() as usize] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var() as usize] = false;
        core
    }

    fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        if self.unsat_at_ingest || self.propagate().is_some() {
            return SolveResult::Unsat(Vec::new());
        }

        let mut assumption_set = vec![false; self.num_vars as usize];
        for a in assumptions {
            assumption_set[a.var() as usize] = true;
        }

        let mut total_conflicts = 0u64;
        let mut restart_round = 0u64;

        loop {
            let budget = 100 * luby(2, restart_round);
            restart_round += 1;
            self.stats.restarts += 1;
            let mut conflicts_here = 0u64;

            loop {
                if let Some(conflict) = self.propagate() {
                    self.stats.conflicts += 1;
                    total_conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        return SolveResult::Unsat(Vec::new());
                    }
                    let (learnt, bt) = self.analyze(conflict);
                    self.backtrack(bt);
                    let l0 = learnt[0];
                    if learnt.len() == 1 {
                        self.backtrack(0);
                        if self.lit_is_false(l0) {
                            return SolveResult::Unsat(Vec::new());
                        }
                        if !self.lit_is_true(l0) {
                            self.enqueue(l0, None);
                        }
                    } else {
                        let idx = self.clauses.len();
                        let blocker = learnt[1];
                        self.clauses.push(Clause { lits: learnt, activity: self.cla_inc });
                        let lits0 = self.clauses[idx].lits[0];
                        self.watch(lits0, idx, blocker);
                        self.watch(blocker, idx, lits0);
                        if self.lit_is_false(l0) {
                            // Conflicting even after backjump can only mean
                            // the clause is falsified at level 0.
                            return SolveResult::Unsat(Vec::new());
                        }
                        if !self.lit_is_true(l0) {
                            self.enqueue(l0, Some(idx));
                        }
                    }
                    self.var_inc /= 0.95;
                    self.cla_inc /= 0.999;
                    if let Some(limit) = self.conflict_limit {
                        if total_conflicts >= limit {
                            return SolveResult::ResourceOut;
                        }
                    }
                    if conflicts_here >= budget {
                        self.backtrack(0);
                        break;
                    }
                } else {
                    // Install pending assumptions as decisions.
                    let mut next: Option<Lit> = None;
                    while self.decision_level() < assumptions.len() {
                        let p = assumptions[self.decision_level()];
                        if self.lit_is_true(p) {
                            self.trail_lim.push(self.trail.len());
                        } else if self.lit_is_false(p) {
                            let core = self.analyze_final(p.negate(), &assumption_set);
                            return SolveResult::Unsat(core);
                        } else {
                            next = Some(p);
                            break;
                        }
                    }
                    let decision = match next {
                        Some(p) => Some(p),
                        None => self.pick_branch(),
                    };
                    match decision {
                        None => {
                            let model: Vec<bool> =
                                self.assign.iter().map(|&a| a == 1).collect();
                            return SolveResult::Sat(Model(model));
                        }
                        Some(p) => {
                            self.stats.decisions += 1;
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(p, None);
                        }
                    }
                }
            }
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop_max(&self.activity) {
            if self.assign[v as usize] == UNDEF {
                return Some(Lit::new(v, self.polarity[v as usize]));
            }
        }
        None
    }
}

/// Decide satisfiability of `cnf` under `assumptions`.
///
/// Deterministic for a fixed seed. The returned core is correct (re-solving
/// with only the core assumptions stays unsat) but not necessarily minimal.
pub fn solve(cnf: &Cnf, assumptions: &[Lit], config: &SolverConfig) -> SolveResult {
    let mut s = Solver::new(cnf, config);
    let result = s.solve(assumptions);
    if let SolveResult::Sat(m) = &result {
        debug_assert!(cnf.eval(&m.0), "model does not satisfy the clause set");
    }
    result
}

/// Solve and also return engine statistics.
pub fn solve_with_stats(
    cnf: &Cnf,
    assumptions: &[Lit],
    config: &SolverConfig,
) -> (SolveResult, SolverStats) {
    let mut s = Solver::new(cnf, config);
    let result = s.solve(assumptions);
    if let SolveResult::Sat(m) = &result {
        debug_assert!(cnf.eval(&m.0), "model does not satisfy the clause set");
    }
    (result, s.stats)
}

/// Deletion-based core minimization: repeatedly drop assumptions whose
/// removal keeps the instance unsatisfiable. The widening loop uses this so
/// iteration counts do not depend on incidental core noise.
pub fn minimize_core(cnf: &Cnf, core: &[Lit], config: &SolverConfig) -> Vec<Lit> {
    let mut kept: Vec<Lit> = core.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let mut candidate = kept.clone();
        candidate.remove(i);
        match solve(cnf, &candidate, config) {
            SolveResult::Unsat(sub) => {
                kept = candidate.into_iter().filter(|l| sub.contains(l)).collect();
                i = 0;
            }
            _ => i += 1,
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i32) -> Lit {
        Lit::new((v.unsigned_abs() - 1) as Var, v > 0)
    }

    fn cnf(num_vars: u32, clauses: &[&[i32]]) -> Cnf {
        let mut c = Cnf::new();
        for _ in 0..num_vars {
            c.new_var();
        }
        for cl in clauses {
            c.add_clause(cl.iter().map(|&v| lit(v)));
        }
        c
    }

    /// Brute-force satisfiability over all 2^n assignments.
    fn truth_table_sat(c: &Cnf, assumptions: &[Lit]) -> bool {
        let n = c.num_vars;
        assert!(n <= 24);
        'outer: for bits in 0u64..(1 << n) {
            let assignment: Vec<bool> = (0..n).map(|v| bits >> v & 1 == 1).collect();
            for a in assumptions {
                if assignment[a.var() as usize] != a.positive() {
                    continue 'outer;
                }
            }
            if c.eval(&assignment) {
                return true;
            }
        }
        false
    }

    #[test]
    fn contradiction_in_clauses_is_unsat_with_empty_core() {
        let c = cnf(1, &[&[1], &[-1]]);
        match solve(&c, &[], &SolverConfig::default()) {
            SolveResult::Unsat(core) => assert!(core.is_empty()),
            other => panic!("expected unsat, got {other:?}"),
        }
    }

    #[test]
    fn assumption_forced_conflict_names_the_assumption() {
        // (¬s ∨ p), (¬p) under assumption s.
        let c = cnf(2, &[&[-1, 2], &[-2]]);
        let s = lit(1);
        match solve(&c, &[s], &SolverConfig::default()) {
            SolveResult::Unsat(core) => assert_eq!(core, vec![s]),
            other => panic!("expected unsat, got {other:?}"),
        }
    }

    #[test]
    fn simple_sat_model_is_returned() {
        let c = cnf(3, &[&[1, 2], &[-1, 3], &[-2, 3]]);
        match solve(&c, &[], &SolverConfig::default()) {
            SolveResult::Sat(m) => assert!(c.eval(&m.0)),
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn core_is_sound_resolving_with_core_only_stays_unsat() {
        // Chain: s1 -> a, s2 -> b, (¬a ∨ ¬b); assumptions s1 s2 s3 where s3
        // is irrelevant.
        let c = cnf(
            6,
            &[&[-1, 4], &[-2, 5], &[-4, -5], &[-3, 6]],
        );
        let (s1, s2, s3) = (lit(1), lit(2), lit(3));
        match solve(&c, &[s1, s2, s3], &SolverConfig::default()) {
            SolveResult::Unsat(core) => {
                assert!(!core.is_empty());
                assert!(core.iter().all(|l| [s1, s2, s3].contains(l)));
                // Re-solving under just the core must stay unsat.
                assert!(solve(&c, &core, &SolverConfig::default()).is_unsat());
                // And s3 never belongs in a minimized core.
                let min = minimize_core(&c, &core, &SolverConfig::default());
                assert!(min.contains(&s1) && min.contains(&s2) && !min.contains(&s3));
            }
            other => panic!("expected unsat, got {other:?}"),
        }
    }

    #[test]
    fn random_3cnf_matches_truth_table() {
        // Deterministic xorshift-generated 3-CNF instances at up to 20 vars.
        let mut state = 0xDEAD_BEEF_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for round in 0..60 {
            let n = 5 + (next() % 16) as u32; // 5..20 vars
            let m = (n as f64 * (3.0 + (round % 3) as f64 * 0.7)) as usize;
            let mut c = Cnf::new();
            for _ in 0..n {
                c.new_var();
            }
            for _ in 0..m {
                let mut cl = Vec::new();
                for _ in 0..3 {
                    let v = (next() % n as u64) as u32;
                    cl.push(Lit::new(v, next() % 2 == 0));
                }
                c.add_clause(cl);
            }
            let expected = truth_table_sat(&c, &[]);
            let got = solve(&c, &[], &SolverConfig::default());
            match (&got, expected) {
                (SolveResult::Sat(m), true) => assert!(c.eval(&m.0)),
                (SolveResult::Unsat(_), false) => {}
                _ => panic!("solver disagrees with truth table on round {round}: {got:?} vs {expected}"),
            }
        }
    }

    #[test]
    fn random_instances_with_assumptions_match_truth_table() {
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for round in 0..40 {
            let n = 4 + (next() % 10) as u32;
            let m = (n * 3) as usize;
            let mut c = Cnf::new();
            for _ in 0..n {
                c.new_var();
            }
            for _ in 0..m {
                let len = 1 + (next() % 3) as usize;
                let mut cl = Vec::new();
                for _ in 0..=len {
                    let v = (next() % n as u64) as u32;
                    cl.push(Lit::new(v, next() % 2 == 0));
                }
                c.add_clause(cl);
            }
            let mut assumptions = Vec::new();
            for v in 0..n {
                match next() % 4 {
                    0 => assumptions.push(Lit::new(v, true)),
                    1 => assumptions.push(Lit::new(v, false)),
                    _ => {}
                }
            }
            let expected = truth_table_sat(&c, &assumptions);
            match (solve(&c, &assumptions, &SolverConfig::default()), expected) {
                (SolveResult::Sat(model), true) => {
                    assert!(c.eval(&model.0));
                    assert!(assumptions.iter().all(|a| model.lit_true(*a)));
                }
                (SolveResult::Unsat(core), false) => {
                    assert!(core.iter().all(|l| assumptions.contains(l)));
                    assert!(solve(&c, &core, &SolverConfig::default()).is_unsat());
                }
                (got, _) => panic!("disagreement on round {round}: {got:?} vs {expected}"),
            }
        }
    }

    #[test]
    fn determinism_same_seed_same_stats() {
        let c = cnf(
            8,
            &[&[1, 2, 3], &[-1, 4], &[-2, 5], &[-3, 6], &[-4, -5], &[-5, -6], &[7, 8], &[-7, -8]],
        );
        for seed in [0u64, 7, 42] {
            let cfgs = SolverConfig { seed, conflict_limit: None };
            let (r1, s1) = solve_with_stats(&c, &[], &cfgs);
            let (r2, s2) = solve_with_stats(&c, &[], &cfgs);
            assert_eq!(format!("{r1:?}"), format!("{r2:?}"));
            assert_eq!(s1.conflicts, s2.conflicts);
            assert_eq!(s1.decisions, s2.decisions);
            assert_eq!(s1.propagations, s2.propagations);
        }
    }

    #[test]
    fn conflict_limit_reports_resource_out() {
        // A hard-ish pigeonhole instance: 5 pigeons, 4 holes.
        let pigeons = 5;
        let holes = 4;
        let mut c = Cnf::new();
        let var = |p: usize, h: usize| (p * holes + h) as Var;
        for _ in 0..pigeons * holes {
            c.new_var();
        }
        for p in 0..pigeons {
            c.add_clause((0..holes).map(|h| Lit::new(var(p, h), true)));
        }
        for h in 0..holes {
            for p1 in 0..pigeons {
                for p2 in p1 + 1..pigeons {
                    c.add_clause([Lit::new(var(p1, h), false), Lit::new(var(p2, h), false)]);
                }
            }
        }
        let limited = SolverConfig { seed: 0, conflict_limit: Some(3) };
        assert!(matches!(solve(&c, &[], &limited), SolveResult::ResourceOut));
        // And without the cap it closes the instance as unsat.
        assert!(solve(&c, &[], &SolverConfig::default()).is_unsat());
    }

    #[test]
    fn dimacs_output_shape() {
        let c = cnf(2, &[&[1, -2]]);
        let text = c.to_dimacs();
        assert!(text.starts_with("p cnf 2 1\n"));
        assert!(text.contains("1 -2 0"));
    }
}
