//! Tseitin bit-blasting of terms to CNF.
//!
//! Bit-vectors are literal vectors, LSB first. CNF variable 0 is pinned to
//! true so constant bits are ordinary literals. Signed operators use
//! two's-complement circuits whose scalar twins live in [`super::bits`];
//! the width-4 exhaustive tests hold the two sides together.

use std::collections::{BTreeMap, HashMap};

use crate::solver::{Cnf, Lit, Model};

use super::term::{Term, TermCtx, TermId, Val, VarId};

#[derive(Debug, Clone)]
pub enum VarBits {
    Bool(Lit),
    Bv(Vec<Lit>),
}

/// CNF plus the maps needed to read models back at the term level.
pub struct Blasted {
    pub cnf: Cnf,
    pub var_bits: BTreeMap<(VarId, u32), VarBits>,
}

impl Blasted {
    /// Term-level view of a CNF model.
    pub fn model_env<'m>(&'m self, model: &'m Model) -> impl Fn(VarId, u32) -> Val + 'm {
        move |var, version| match self.var_bits.get(&(var, version)) {
            Some(VarBits::Bool(l)) => Val::B(model.lit_true(*l)),
            Some(VarBits::Bv(ls)) => {
                let mut v = 0u64;
                for (i, l) in ls.iter().enumerate() {
                    if model.lit_true(*l) {
                        v |= 1 << i;
                    }
                }
                Val::Bv(v)
            }
            None => panic!("model queried for a variable absent from the formula"),
        }
    }
}

pub struct BitBlaster<'a> {
    pub ctx: &'a TermCtx,
    cnf: Cnf,
    true_lit: Lit,
    bool_memo: HashMap<TermId, Lit>,
    bv_memo: HashMap<TermId, Vec<Lit>>,
    var_bits: BTreeMap<(VarId, u32), VarBits>,
}

impl<'a> BitBlaster<'a> {
    pub fn new(ctx: &'a TermCtx) -> Self {
        let mut cnf = Cnf::new();
        let t = cnf.new_var();
        let true_lit = Lit::new(t, true);
        cnf.add_clause([true_lit]);
        BitBlaster {
            ctx,
            cnf,
            true_lit,
            bool_memo: HashMap::new(),
            bv_memo: HashMap::new(),
            var_bits: BTreeMap::new(),
        }
    }

    pub fn finish(self) -> Blasted {
        Blasted { cnf: self.cnf, var_bits: self.var_bits }
    }

    pub fn true_lit(&self) -> Lit {
        self.true_lit
    }

    pub fn false_lit(&self) -> Lit {
        self.true_lit.negate()
    }

    pub fn fresh(&mut self) -> Lit {
        Lit::new(self.cnf.new_var(), true)
    }

    pub fn assert_lit(&mut self, l: Lit) {
        self.cnf.add_clause([l]);
    }

    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        self.cnf.add_clause(lits);
    }

    fn lit_const(&self, b: bool) -> Lit {
        if b {
            self.true_lit
        } else {
            self.false_lit()
        }
    }

    fn is_const(&self, l: Lit) -> Option<bool> {
        if l == self.true_lit {
            Some(true)
        } else if l == self.false_lit() {
            Some(false)
        } else {
            None
        }
    }

    // --- gates ---

    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            (Some(false), _) | (_, Some(false)) => return self.false_lit(),
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == b.negate() {
            return self.false_lit();
        }
        let g = self.fresh();
        self.cnf.add_clause([g.negate(), a]);
        self.cnf.add_clause([g.negate(), b]);
        self.cnf.add_clause([g, a.negate(), b.negate()]);
        g
    }

    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        self.and2(a.negate(), b.negate()).negate()
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) => return b,
            (_, Some(false)) => return a,
            (Some(true), _) => return b.negate(),
            (_, Some(true)) => return a.negate(),
            _ => {}
        }
        if a == b {
            return self.false_lit();
        }
        if a == b.negate() {
            return self.true_lit;
        }
        let g = self.fresh();
        self.cnf.add_clause([g.negate(), a, b]);
        self.cnf.add_clause([g.negate(), a.negate(), b.negate()]);
        self.cnf.add_clause([g, a.negate(), b]);
        self.cnf.add_clause([g, a, b.negate()]);
        g
    }

    pub fn iff2(&mut self, a: Lit, b: Lit) -> Lit {
        self.xor2(a, b).negate()
    }

    pub fn mux(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        match self.is_const(c) {
            Some(true) => return t,
            Some(false) => return e,
            None => {}
        }
        if t == e {
            return t;
        }
        let a = self.and2(c, t);
        let b = self.and2(c.negate(), e);
        self.or2(a, b)
    }

    pub fn and_all(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = self.true_lit;
        for &l in lits {
            acc = self.and2(acc, l);
        }
        acc
    }

    pub fn or_all(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = self.false_lit();
        for &l in lits {
            acc = self.or2(acc, l);
        }
        acc
    }

    // --- vectors ---

    fn vconst(&mut self, value: u64, width: u32) -> Vec<Lit> {
        (0..width).map(|i| self.lit_const(value >> i & 1 == 1)).collect()
    }

    fn vvar(&mut self, var: VarId, version: u32, width: u32) -> Vec<Lit> {
        if let Some(VarBits::Bv(bits)) = self.var_bits.get(&(var, version)) {
            return bits.clone();
        }
        let bits: Vec<Lit> = (0..width).map(|_| self.fresh()).collect();
        self.var_bits.insert((var, version), VarBits::Bv(bits.clone()));
        bits
    }

    fn vnot(&mut self, a: &[Lit]) -> Vec<Lit> {
        a.iter().map(|l| l.negate()).collect()
    }

    fn vbitwise(&mut self, a: &[Lit], b: &[Lit], f: fn(&mut Self, Lit, Lit) -> Lit) -> Vec<Lit> {
        a.iter().zip(b).map(|(&x, &y)| f(self, x, y)).collect()
    }

    fn full_adder(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let axb = self.xor2(a, b);
        let sum = self.xor2(axb, c);
        let t1 = self.and2(a, b);
        let t2 = self.and2(axb, c);
        let carry = self.or2(t1, t2);
        (sum, carry)
    }

    fn vadd(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let mut carry = self.false_lit();
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (s, c) = self.full_adder(x, y, carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn vneg(&mut self, a: &[Lit]) -> Vec<Lit> {
        // two's complement: ~a + 1
        let na = self.vnot(a);
        let mut carry = self.true_lit;
        let mut out = Vec::with_capacity(a.len());
        for &x in &na {
            let s = self.xor2(x, carry);
            carry = self.and2(x, carry);
            out.push(s);
        }
        out
    }

    fn vsub(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        // a + ~b + 1
        let nb = self.vnot(b);
        let mut carry = self.true_lit;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(&nb) {
            let (s, c) = self.full_adder(x, y, carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn vmul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = self.vconst(0, w as u32);
        for i in 0..w {
            // acc += b_i ? (a << i) : 0
            let shifted: Vec<Lit> = (0..w)
                .map(|j| if j < i { self.false_lit() } else { a[j - i] })
                .collect();
            let gated: Vec<Lit> =
                shifted.iter().map(|&s| self.and2(s, b[i])).collect();
            acc = self.vadd(&acc, &gated);
        }
        acc
    }

    fn veq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.true_lit;
        for (&x, &y) in a.iter().zip(b) {
            let e = self.iff2(x, y);
            acc = self.and2(acc, e);
        }
        acc
    }

    fn vult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // LSB-to-MSB scan: at the highest differing bit, b must be 1.
        let mut lt = self.false_lit();
        for (&x, &y) in a.iter().zip(b) {
            let diff = self.xor2(x, y);
            lt = self.mux(diff, y, lt);
        }
        lt
    }

    fn vslt(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // Flip sign bits and compare unsigned.
        let w = a.len();
        let mut af = a.to_vec();
        let mut bf = b.to_vec();
        af[w - 1] = af[w - 1].negate();
        bf[w - 1] = bf[w - 1].negate();
        self.vult(&af, &bf)
    }

    fn vmux(&mut self, c: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        t.iter().zip(e).map(|(&x, &y)| self.mux(c, x, y)).collect()
    }

    /// Shift by a symbolic amount via a mux chain over all amounts;
    /// amounts >= width select `overflow`.
    fn vshift(
        &mut self,
        a: &[Lit],
        amt: &[Lit],
        overflow: Vec<Lit>,
        shift_by: impl Fn(&mut Self, &[Lit], usize) -> Vec<Lit>,
    ) -> Vec<Lit> {
        let w = a.len() as u64;
        let mut acc = overflow;
        for k in (0..w).rev() {
            let kc = self.vconst(k, amt.len() as u32);
            let is_k = self.veq(amt, &kc);
            let shifted = shift_by(self, a, k as usize);
            acc = self.vmux(is_k, &shifted, &acc);
        }
        acc
    }

    fn vabs(&mut self, a: &[Lit]) -> Vec<Lit> {
        let sign = a[a.len() - 1];
        let n = self.vneg(a);
        self.vmux(sign, &n, a)
    }

    /// Restoring long division on unsigned operands. With a zero divisor the
    /// compare never succeeds, which yields exactly the all-ones quotient
    /// and pass-through remainder the scalar semantics define.
    fn vudivmod(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let w = a.len();
        let ext = w + 1;
        let f = self.false_lit();
        let mut rem: Vec<Lit> = vec![f; ext];
        let mut b_ext = b.to_vec();
        b_ext.push(f);
        let mut q = vec![f; w];
        for i in (0..w).rev() {
            // rem = rem << 1 | a_i
            let mut shifted = Vec::with_capacity(ext);
            shifted.push(a[i]);
            shifted.extend_from_slice(&rem[..ext - 1]);
            let lt = self.vult(&shifted, &b_ext);
            let geq = lt.negate();
            let sub = self.vsub(&shifted, &b_ext);
            rem = self.vmux(geq, &sub, &shifted);
            q[i] = geq;
        }
        rem.truncate(w);
        (q, rem)
    }

    fn vsdiv(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let (sa, sb) = (a[w - 1], b[w - 1]);
        let aa = self.vabs(a);
        let ab = self.vabs(b);
        let (uq, _) = self.vudivmod(&aa, &ab);
        let neg_q = self.vneg(&uq);
        let flip = self.xor2(sa, sb);
        self.vmux(flip, &neg_q, &uq)
    }

    fn vsrem(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let sa = a[w - 1];
        let aa = self.vabs(a);
        let ab = self.vabs(b);
        let (_, ur) = self.vudivmod(&aa, &ab);
        let neg_r = self.vneg(&ur);
        self.vmux(sa, &neg_r, &ur)
    }

    // --- term translation ---

    pub fn blast_bool(&mut self, id: TermId) -> Lit {
        if let Some(&l) = self.bool_memo.get(&id) {
            return l;
        }
        let l = match self.ctx.term(id).clone() {
            Term::True => self.true_lit,
            Term::False => self.false_lit(),
            Term::BoolVar { var, version } => {
                if let Some(VarBits::Bool(l)) = self.var_bits.get(&(var, version)) {
                    *l
                } else {
                    let l = self.fresh();
                    self.var_bits.insert((var, version), VarBits::Bool(l));
                    l
                }
            }
            Term::Not(a) => self.blast_bool(a).negate(),
            Term::And(a, b) => {
                let (x, y) = (self.blast_bool(a), self.blast_bool(b));
                self.and2(x, y)
            }
            Term::Or(a, b) => {
                let (x, y) = (self.blast_bool(a), self.blast_bool(b));
                self.or2(x, y)
            }
            Term::IteBool { cond, then_t, else_t } => {
                let c = self.blast_bool(cond);
                let t = self.blast_bool(then_t);
                let e = self.blast_bool(else_t);
                self.mux(c, t, e)
            }
            Term::EqBool(a, b) => {
                let (x, y) = (self.blast_bool(a), self.blast_bool(b));
                self.iff2(x, y)
            }
            Term::EqBv(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.veq(&x, &y)
            }
            Term::Slt(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vslt(&x, &y)
            }
            Term::Sle(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vslt(&y, &x).negate()
            }
            Term::Ult(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vult(&x, &y)
            }
            other => panic!("blast_bool on non-boolean term {other:?}"),
        };
        self.bool_memo.insert(id, l);
        l
    }

    pub fn blast_bv(&mut self, id: TermId) -> Vec<Lit> {
        if let Some(bits) = self.bv_memo.get(&id) {
            return bits.clone();
        }
        let bits = match self.ctx.term(id).clone() {
            Term::BvConst { value, width } => self.vconst(value, width),
            Term::BvVar { var, version, width } => self.vvar(var, version, width),
            Term::BvNot(a) => {
                let x = self.blast_bv(a);
                self.vnot(&x)
            }
            Term::BvNeg(a) => {
                let x = self.blast_bv(a);
                self.vneg(&x)
            }
            Term::BvAnd(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vbitwise(&x, &y, Self::and2)
            }
            Term::BvOr(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vbitwise(&x, &y, Self::or2)
            }
            Term::BvXor(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vbitwise(&x, &y, Self::xor2)
            }
            Term::BvAdd(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vadd(&x, &y)
            }
            Term::BvSub(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vsub(&x, &y)
            }
            Term::BvMul(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vmul(&x, &y)
            }
            Term::BvSdiv(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vsdiv(&x, &y)
            }
            Term::BvSrem(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                self.vsrem(&x, &y)
            }
            Term::BvShl(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                let zero = self.vconst(0, x.len() as u32);
                self.vshift(&x, &y, zero, |s, a, k| {
                    let f = s.false_lit();
                    (0..a.len()).map(|j| if j < k { f } else { a[j - k] }).collect()
                })
            }
            Term::BvAshr(a, b) => {
                let (x, y) = (self.blast_bv(a), self.blast_bv(b));
                let sign = x[x.len() - 1];
                let fill: Vec<Lit> = vec![sign; x.len()];
                self.vshift(&x, &y, fill, |_, a, k| {
                    let sign = a[a.len() - 1];
                    (0..a.len())
                        .map(|j| if j + k < a.len() { a[j + k] } else { sign })
                        .collect()
                })
            }
            Term::IteBv { cond, then_t, else_t } => {
                let c = self.blast_bool(cond);
                let t = self.blast_bv(then_t);
                let e = self.blast_bv(else_t);
                self.vmux(c, &t, &e)
            }
            other => panic!("blast_bv on boolean term {other:?}"),
        };
        self.bv_memo.insert(id, bits.clone());
        bits
    }

    /// Assert a boolean term at the top level.
    pub fn assert_term(&mut self, id: TermId) {
        let l = self.blast_bool(id);
        self.assert_lit(l);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::bits;
    use crate::solver::{solve, SolveResult, SolverConfig};

    /// Exhaustively check a binary bv operator circuit against its scalar
    /// twin at width 4 by solving for a model at each input pair.
    fn check_binop_exhaustive(
        build: impl Fn(&mut TermCtx, TermId, TermId) -> TermId,
        scalar: impl Fn(u64, u64, u32) -> u64,
    ) {
        const W: u32 = 4;
        for a in 0..16u64 {
            for b in 0..16u64 {
                let mut ctx = TermCtx::new();
                let va = ctx.intern("a");
                let vb = ctx.intern("b");
                let vr = ctx.intern("r");
                let ta = ctx.bv_var(va, 0, W);
                let tb = ctx.bv_var(vb, 0, W);
                let tr = ctx.bv_var(vr, 0, W);
                let ca = ctx.bvc(a, W);
                let cb = ctx.bvc(b, W);
                // Constrain symbolic inputs so folding cannot bypass the
                // circuit, then read the result variable from the model.
                let op = build(&mut ctx, ta, tb);
                let e1 = ctx.eq_bv(ta, ca);
                let e2 = ctx.eq_bv(tb, cb);
                let e3 = ctx.eq_bv(tr, op);
                let mut bb = BitBlaster::new(&ctx);
                bb.assert_term(e1);
                bb.assert_term(e2);
                bb.assert_term(e3);
                let blasted = bb.finish();
                match solve(&blasted.cnf, &[], &SolverConfig::default()) {
                    SolveResult::Sat(m) => {
                        let env = blasted.model_env(&m);
                        let got = env(vr, 0).as_bv();
                        let want = scalar(a, b, W);
                        assert_eq!(
                            got, want,
                            "circuit/scalar mismatch a={a} b={b}: got {got}, want {want}"
                        );
                    }
                    other => panic!("expected sat at a={a} b={b}, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn add_circuit_matches_mod_16_arithmetic() {
        check_binop_exhaustive(|c, a, b| c.bv_add(a, b), bits::add);
    }

    #[test]
    fn sub_and_mul_circuits_match() {
        check_binop_exhaustive(|c, a, b| c.bv_sub(a, b), bits::sub);
        check_binop_exhaustive(|c, a, b| c.bv_mul(a, b), bits::mul);
    }

    #[test]
    fn signed_division_circuits_match_c99_truncation() {
        check_binop_exhaustive(|c, a, b| c.bv_sdiv(a, b), bits::sdiv);
        check_binop_exhaustive(|c, a, b| c.bv_srem(a, b), bits::srem);
    }

    #[test]
    fn shift_circuits_match() {
        check_binop_exhaustive(|c, a, b| c.bv_shl(a, b), |x, y, w| {
            bits::shl(x, bits::mask(y, w), w)
        });
        check_binop_exhaustive(|c, a, b| c.bv_ashr(a, b), |x, y, w| {
            bits::ashr(x, bits::mask(y, w), w)
        });
    }

    #[test]
    fn bitwise_circuits_match() {
        check_binop_exhaustive(|c, a, b| c.bv_and(a, b), |x, y, w| bits::mask(x & y, w));
        check_binop_exhaustive(|c, a, b| c.bv_or(a, b), |x, y, w| bits::mask(x | y, w));
        check_binop_exhaustive(|c, a, b| c.bv_xor(a, b), |x, y, w| bits::mask(x ^ y, w));
    }

    #[test]
    fn comparison_circuits_match() {
        const W: u32 = 4;
        for a in 0..16u64 {
            for b in 0..16u64 {
                let mut ctx = TermCtx::new();
                let va = ctx.intern("a");
                let vb = ctx.intern("b");
                let ta = ctx.bv_var(va, 0, W);
                let tb = ctx.bv_var(vb, 0, W);
                let ca = ctx.bvc(a, W);
                let cb = ctx.bvc(b, W);
                let e1 = ctx.eq_bv(ta, ca);
                let e2 = ctx.eq_bv(tb, cb);
                let slt = ctx.slt(ta, tb);
                let sle = ctx.sle(ta, tb);
                let ult = ctx.ult(ta, tb);
                let eq = ctx.eq_bv(ta, tb);
                for (t, want) in [
                    (slt, bits::slt(a, b, W)),
                    (sle, bits::sle(a, b, W)),
                    (ult, bits::ult(a, b, W)),
                    (eq, a == b),
                ] {
                    let mut bb = BitBlaster::new(&ctx);
                    bb.assert_term(e1);
                    bb.assert_term(e2);
                    let l = bb.blast_bool(t);
                    bb.assert_lit(if want { l } else { l.negate() });
                    let blasted = bb.finish();
                    assert!(
                        solve(&blasted.cnf, &[], &SolverConfig::default()).is_sat(),
                        "comparison mismatch at a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn constant_equation_pins_bits() {
        // x = 3 at width 4: exactly one model for x.
        let mut ctx = TermCtx::new();
        let vx = ctx.intern("x");
        let x1 = ctx.bv_var(vx, 1, 4);
        let three = ctx.bvc(3, 4);
        let eq = ctx.eq_bv(x1, three);
        let mut bb = BitBlaster::new(&ctx);
        bb.assert_term(eq);
        let blasted = bb.finish();
        match solve(&blasted.cnf, &[], &SolverConfig::default()) {
            SolveResult::Sat(m) => {
                assert_eq!(blasted.model_env(&m)(vx, 1).as_bv(), 3);
            }
            other => panic!("expected sat, got {other:?}"),
        }
        // And x = 3 ∧ x != 3 is unsat.
        let ne = ctx.not(eq);
        let mut bb = BitBlaster::new(&ctx);
        bb.assert_term(eq);
        bb.assert_term(ne);
        let blasted = bb.finish();
        assert!(solve(&blasted.cnf, &[], &SolverConfig::default()).is_unsat());
    }

    #[test]
    fn overflow_wraps_to_min_in_every_model() {
        // a = MAX, b = 1: a + b must be MIN in all models (width 4).
        let mut ctx = TermCtx::new();
        let va = ctx.intern("a");
        let ta = ctx.bv_var(va, 0, 4);
        let maxc = ctx.bvc_signed(7, 4);
        let one = ctx.bvc(1, 4);
        let eq = ctx.eq_bv(ta, maxc);
        let sum = ctx.bv_add(ta, one);
        let minc = ctx.bvc_signed(-8, 4);
        let is_min = ctx.eq_bv(sum, minc);
        let not_min = ctx.not(is_min);
        let mut bb = BitBlaster::new(&ctx);
        bb.assert_term(eq);
        bb.assert_term(not_min);
        let blasted = bb.finish();
        assert!(
            solve(&blasted.cnf, &[], &SolverConfig::default()).is_unsat(),
            "found a model where MAX+1 != MIN"
        );
    }

    #[test]
    fn unconstrained_index_can_be_negative() {
        // ¬(i >= 0 ∧ i < 10): satisfiable with i unconstrained.
        let mut ctx = TermCtx::new();
        let vi = ctx.intern("i");
        let ti = ctx.bv_var(vi, 0, 8);
        let zero = ctx.bvc(0, 8);
        let ten = ctx.bvc(10, 8);
        let ge = ctx.sle(zero, ti);
        let lt = ctx.slt(ti, ten);
        let both = ctx.and(ge, lt);
        let viol = ctx.not(both);
        let mut bb = BitBlaster::new(&ctx);
        bb.assert_term(viol);
        let blasted = bb.finish();
        match solve(&blasted.cnf, &[], &SolverConfig::default()) {
            SolveResult::Sat(m) => {
                let i = blasted.model_env(&m)(vi, 0).as_bv();
                let si = bits::to_signed(i, 8);
                assert!(!(0..10).contains(&si), "model does not violate the bound: {si}");
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }
}
