//! Hash-consed term arena for boolean and fixed-width bit-vector formulas.
//!
//! Construction folds constants eagerly (through the scalar semantics of
//! [`super::bits`]) and applies a handful of cheap identities, so terms like
//! guards over already-fixed initializers collapse before encoding.

use std::collections::HashMap;
use std::fmt;

use super::bits;

/// Interned variable name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    True,
    False,
    BvConst { value: u64, width: u32 },
    BoolVar { var: VarId, version: u32 },
    BvVar { var: VarId, version: u32, width: u32 },

    Not(TermId),
    And(TermId, TermId),
    Or(TermId, TermId),
    IteBool { cond: TermId, then_t: TermId, else_t: TermId },

    EqBool(TermId, TermId),
    EqBv(TermId, TermId),
    Slt(TermId, TermId),
    Sle(TermId, TermId),
    Ult(TermId, TermId),

    BvNot(TermId),
    BvNeg(TermId),
    BvAnd(TermId, TermId),
    BvOr(TermId, TermId),
    BvXor(TermId, TermId),
    BvAdd(TermId, TermId),
    BvSub(TermId, TermId),
    BvMul(TermId, TermId),
    BvSdiv(TermId, TermId),
    BvSrem(TermId, TermId),
    BvShl(TermId, TermId),
    BvAshr(TermId, TermId),
    IteBv { cond: TermId, then_t: TermId, else_t: TermId },
}

/// Arena owning interned names and hash-consed terms.
#[derive(Debug, Default)]
pub struct TermCtx {
    names: Vec<String>,
    name_ids: HashMap<String, VarId>,
    nodes: Vec<Term>,
    dedup: HashMap<Term, TermId>,
}

/// Concrete value of a term under a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    B(bool),
    Bv(u64),
}

impl Val {
    pub fn as_bool(self) -> bool {
        match self {
            Val::B(b) => b,
            Val::Bv(_) => panic!("expected bool value"),
        }
    }

    pub fn as_bv(self) -> u64 {
        match self {
            Val::Bv(v) => v,
            Val::B(_) => panic!("expected bit-vector value"),
        }
    }
}

impl TermCtx {
    pub fn new() -> TermCtx {
        TermCtx::default()
    }

    pub fn intern(&mut self, name: &str) -> VarId {
        if let Some(&id) = self.name_ids.get(name) {
            return id;
        }
        let id = VarId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.name_ids.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.name_ids.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.nodes[id.0 as usize]
    }

    pub fn num_terms(&self) -> usize {
        self.nodes.len()
    }

    fn mk(&mut self, t: Term) -> TermId {
        if let Some(&id) = self.dedup.get(&t) {
            return id;
        }
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(t.clone());
        self.dedup.insert(t, id);
        id
    }

    pub fn sort(&self, id: TermId) -> Sort {
        match self.term(id) {
            Term::True
            | Term::False
            | Term::BoolVar { .. }
            | Term::Not(_)
            | Term::And(..)
            | Term::Or(..)
            | Term::IteBool { .. }
            | Term::EqBool(..)
            | Term::EqBv(..)
            | Term::Slt(..)
            | Term::Sle(..)
            | Term::Ult(..) => Sort::Bool,
            Term::BvConst { width, .. } | Term::BvVar { width, .. } => Sort::Bv(*width),
            Term::BvNot(a)
            | Term::BvNeg(a)
            | Term::BvAnd(a, _)
            | Term::BvOr(a, _)
            | Term::BvXor(a, _)
            | Term::BvAdd(a, _)
            | Term::BvSub(a, _)
            | Term::BvMul(a, _)
            | Term::BvSdiv(a, _)
            | Term::BvSrem(a, _)
            | Term::BvShl(a, _)
            | Term::BvAshr(a, _) => self.sort(*a),
            Term::IteBv { then_t, .. } => self.sort(*then_t),
        }
    }

    pub fn width(&self, id: TermId) -> u32 {
        match self.sort(id) {
            Sort::Bv(w) => w,
            Sort::Bool => panic!("expected bit-vector term"),
        }
    }

    fn const_bv(&self, id: TermId) -> Option<(u64, u32)> {
        match self.term(id) {
            Term::BvConst { value, width } => Some((*value, *width)),
            _ => None,
        }
    }

    fn const_bool(&self, id: TermId) -> Option<bool> {
        match self.term(id) {
            Term::True => Some(true),
            Term::False => Some(false),
            _ => None,
        }
    }

    // --- constructors ---

    pub fn tru(&mut self) -> TermId {
        self.mk(Term::True)
    }

    pub fn fls(&mut self) -> TermId {
        self.mk(Term::False)
    }

    pub fn boolc(&mut self, b: bool) -> TermId {
        if b {
            self.tru()
        } else {
            self.fls()
        }
    }

    pub fn bvc(&mut self, value: u64, width: u32) -> TermId {
        self.mk(Term::BvConst { value: bits::mask(value, width), width })
    }

    pub fn bvc_signed(&mut self, value: i64, width: u32) -> TermId {
        self.bvc(bits::from_signed(value, width), width)
    }

    pub fn bool_var(&mut self, var: VarId, version: u32) -> TermId {
        self.mk(Term::BoolVar { var, version })
    }

    pub fn bv_var(&mut self, var: VarId, version: u32, width: u32) -> TermId {
        self.mk(Term::BvVar { var, version, width })
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.term(a) {
            Term::True => self.fls(),
            Term::False => self.tru(),
            Term::Not(inner) => *inner,
            _ => self.mk(Term::Not(a)),
        }
    }

    pub fn and(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.const_bool(a), self.const_bool(b)) {
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            (Some(false), _) | (_, Some(false)) => return self.fls(),
            _ => {}
        }
        if a == b {
            return a;
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.mk(Term::And(a, b))
    }

    pub fn or(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.const_bool(a), self.const_bool(b)) {
            (Some(false), _) => return b,
            (_, Some(false)) => return a,
            (Some(true), _) | (_, Some(true)) => return self.tru(),
            _ => {}
        }
        if a == b {
            return a;
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.mk(Term::Or(a, b))
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        let na = self.not(a);
        self.or(na, b)
    }

    pub fn and_all(&mut self, ts: impl IntoIterator<Item = TermId>) -> TermId {
        let mut acc = self.tru();
        for t in ts {
            acc = self.and(acc, t);
        }
        acc
    }

    pub fn or_all(&mut self, ts: impl IntoIterator<Item = TermId>) -> TermId {
        let mut acc = self.fls();
        for t in ts {
            acc = self.or(acc, t);
        }
        acc
    }

    pub fn ite_bool(&mut self, cond: TermId, then_t: TermId, else_t: TermId) -> TermId {
        match self.const_bool(cond) {
            Some(true) => return then_t,
            Some(false) => return else_t,
            None => {}
        }
        if then_t == else_t {
            return then_t;
        }
        self.mk(Term::IteBool { cond, then_t, else_t })
    }

    pub fn eq_bool(&mut self, a: TermId, b: TermId) -> TermId {
        if a == b {
            return self.tru();
        }
        match (self.const_bool(a), self.const_bool(b)) {
            (Some(x), Some(y)) => return self.boolc(x == y),
            (Some(true), None) => return b,
            (None, Some(true)) => return a,
            (Some(false), None) => return self.not(b),
            (None, Some(false)) => return self.not(a),
            _ => {}
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.mk(Term::EqBool(a, b))
    }

    pub fn eq_bv(&mut self, a: TermId, b: TermId) -> TermId {
        debug_assert_eq!(self.width(a), self.width(b), "sort mismatch in =");
        if a == b {
            return self.tru();
        }
        if let (Some((x, _)), Some((y, _))) = (self.const_bv(a), self.const_bv(b)) {
            return self.boolc(x == y);
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.mk(Term::EqBv(a, b))
    }

    pub fn slt(&mut self, a: TermId, b: TermId) -> TermId {
        let w = self.width(a);
        if let (Some((x, _)), Some((y, _))) = (self.const_bv(a), self.const_bv(b)) {
            return self.boolc(bits::slt(x, y, w));
        }
        self.mk(Term::Slt(a, b))
    }

    pub fn sle(&mut self, a: TermId, b: TermId) -> TermId {
        let w = self.width(a);
        if let (Some((x, _)), Some((y, _))) = (self.const_bv(a), self.const_bv(b)) {
            return self.boolc(bits::sle(x, y, w));
        }
        self.mk(Term::Sle(a, b))
    }

    pub fn ult(&mut self, a: TermId, b: TermId) -> TermId {
        let w = self.width(a);
        if let (Some((x, _)), Some((y, _))) = (self.const_bv(a), self.const_bv(b)) {
            return self.boolc(bits::ult(x, y, w));
        }
        self.mk(Term::Ult(a, b))
    }

    fn bv_fold(
        &mut self,
        a: TermId,
        b: TermId,
        f: fn(u64, u64, u32) -> u64,
        mk: fn(TermId, TermId) -> Term,
    ) -> TermId {
        let w = self.width(a);
        debug_assert_eq!(w, self.width(b), "width mismatch");
        if let (Some((x, _)), Some((y, _))) = (self.const_bv(a), self.const_bv(b)) {
            return self.bvc(f(x, y, w), w);
        }
        self.mk(mk(a, b))
    }

    pub fn bv_not(&mut self, a: TermId) -> TermId {
        let w = self.width(a);
        if let Some((x, _)) = self.const_bv(a) {
            return self.bvc(bits::not(x, w), w);
        }
        self.mk(Term::BvNot(a))
    }

    pub fn bv_neg(&mut self, a: TermId) -> TermId {
        let w = self.width(a);
        if let Some((x, _)) = self.const_bv(a) {
            return self.bvc(bits::neg(x, w), w);
        }
        self.mk(Term::BvNeg(a))
    }

    pub fn bv_and(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, |x, y, w| bits::mask(x & y, w), Term::BvAnd)
    }

    pub fn bv_or(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, |x, y, w| bits::mask(x | y, w), Term::BvOr)
    }

    pub fn bv_xor(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, |x, y, w| bits::mask(x ^ y, w), Term::BvXor)
    }

    pub fn bv_add(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, bits::add, Term::BvAdd)
    }

    pub fn bv_sub(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, bits::sub, Term::BvSub)
    }

    pub fn bv_mul(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, bits::mul, Term::BvMul)
    }

    pub fn bv_sdiv(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, bits::sdiv, Term::BvSdiv)
    }

    pub fn bv_srem(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, bits::srem, Term::BvSrem)
    }

    pub fn bv_shl(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, |x, y, w| bits::shl(x, bits::mask(y, w), w), Term::BvShl)
    }

    pub fn bv_ashr(&mut self, a: TermId, b: TermId) -> TermId {
        self.bv_fold(a, b, |x, y, w| bits::ashr(x, bits::mask(y, w), w), Term::BvAshr)
    }

    pub fn ite_bv(&mut self, cond: TermId, then_t: TermId, else_t: TermId) -> TermId {
        debug_assert_eq!(self.width(then_t), self.width(else_t), "ite arm width mismatch");
        match self.const_bool(cond) {
            Some(true) => return then_t,
            Some(false) => return else_t,
            None => {}
        }
        if then_t == else_t {
            return then_t;
        }
        self.mk(Term::IteBv { cond, then_t, else_t })
    }

    /// Evaluate under `model`, which supplies values for variables.
    pub fn eval(&self, id: TermId, model: &dyn Fn(VarId, u32) -> Val) -> Val {
        match self.term(id) {
            Term::True => Val::B(true),
            Term::False => Val::B(false),
            Term::BvConst { value, .. } => Val::Bv(*value),
            Term::BoolVar { var, version } => model(*var, *version),
            Term::BvVar { var, version, .. } => model(*var, *version),
            Term::Not(a) => Val::B(!self.eval(*a, model).as_bool()),
            Term::And(a, b) => {
                Val::B(self.eval(*a, model).as_bool() && self.eval(*b, model).as_bool())
            }
            Term::Or(a, b) => {
                Val::B(self.eval(*a, model).as_bool() || self.eval(*b, model).as_bool())
            }
            Term::IteBool { cond, then_t, else_t } => {
                if self.eval(*cond, model).as_bool() {
                    self.eval(*then_t, model)
                } else {
                    self.eval(*else_t, model)
                }
            }
            Term::EqBool(a, b) => {
                Val::B(self.eval(*a, model).as_bool() == self.eval(*b, model).as_bool())
            }
            Term::EqBv(a, b) => {
                Val::B(self.eval(*a, model).as_bv() == self.eval(*b, model).as_bv())
            }
            Term::Slt(a, b) => {
                let w = self.width(*a);
                Val::B(bits::slt(self.eval(*a, model).as_bv(), self.eval(*b, model).as_bv(), w))
            }
            Term::Sle(a, b) => {
                let w = self.width(*a);
                Val::B(bits::sle(self.eval(*a, model).as_bv(), self.eval(*b, model).as_bv(), w))
            }
            Term::Ult(a, b) => {
                let w = self.width(*a);
                Val::B(bits::ult(self.eval(*a, model).as_bv(), self.eval(*b, model).as_bv(), w))
            }
            Term::BvNot(a) => {
                let w = self.width(*a);
                Val::Bv(bits::not(self.eval(*a, model).as_bv(), w))
            }
            Term::BvNeg(a) => {
                let w = self.width(*a);
                Val::Bv(bits::neg(self.eval(*a, model).as_bv(), w))
            }
            Term::BvAnd(a, b) => self.eval_bin(*a, *b, model, |x, y, w| bits::mask(x & y, w)),
            Term::BvOr(a, b) => self.eval_bin(*a, *b, model, |x, y, w| bits::mask(x | y, w)),
            Term::BvXor(a, b) => self.eval_bin(*a, *b, model, |x, y, w| bits::mask(x ^ y, w)),
            Term::BvAdd(a, b) => self.eval_bin(*a, *b, model, bits::add),
            Term::BvSub(a, b) => self.eval_bin(*a, *b, model, bits::sub),
            Term::BvMul(a, b) => self.eval_bin(*a, *b, model, bits::mul),
            Term::BvSdiv(a, b) => self.eval_bin(*a, *b, model, bits::sdiv),
            Term::BvSrem(a, b) => self.eval_bin(*a, *b, model, bits::srem),
            Term::BvShl(a, b) => {
                self.eval_bin(*a, *b, model, |x, y, w| bits::shl(x, bits::mask(y, w), w))
            }
            Term::BvAshr(a, b) => {
                self.eval_bin(*a, *b, model, |x, y, w| bits::ashr(x, bits::mask(y, w), w))
            }
            Term::IteBv { cond, then_t, else_t } => {
                if self.eval(*cond, model).as_bool() {
                    self.eval(*then_t, model)
                } else {
                    self.eval(*else_t, model)
                }
            }
        }
    }

    fn eval_bin(
        &self,
        a: TermId,
        b: TermId,
        model: &dyn Fn(VarId, u32) -> Val,
        f: fn(u64, u64, u32) -> u64,
    ) -> Val {
        let w = self.width(a);
        Val::Bv(f(self.eval(a, model).as_bv(), self.eval(b, model).as_bv(), w))
    }

    /// All (var, version, sort) triples appearing in `id`.
    pub fn collect_vars(&self, id: TermId, out: &mut std::collections::BTreeMap<(VarId, u32), Sort>) {
        let mut stack = vec![id];
        let mut seen = std::collections::HashSet::new();
        while let Some(t) = stack.pop() {
            if !seen.insert(t) {
                continue;
            }
            match self.term(t) {
                Term::True | Term::False | Term::BvConst { .. } => {}
                Term::BoolVar { var, version } => {
                    out.insert((*var, *version), Sort::Bool);
                }
                Term::BvVar { var, version, width } => {
                    out.insert((*var, *version), Sort::Bv(*width));
                }
                Term::Not(a) | Term::BvNot(a) | Term::BvNeg(a) => stack.push(*a),
                Term::And(a, b)
                | Term::Or(a, b)
                | Term::EqBool(a, b)
                | Term::EqBv(a, b)
                | Term::Slt(a, b)
                | Term::Sle(a, b)
                | Term::Ult(a, b)
                | Term::BvAnd(a, b)
                | Term::BvOr(a, b)
                | Term::BvXor(a, b)
                | Term::BvAdd(a, b)
                | Term::BvSub(a, b)
                | Term::BvMul(a, b)
                | Term::BvSdiv(a, b)
                | Term::BvSrem(a, b)
                | Term::BvShl(a, b)
                | Term::BvAshr(a, b) => {
                    stack.push(*a);
                    stack.push(*b);
                }
                Term::IteBool { cond, then_t, else_t }
                | Term::IteBv { cond, then_t, else_t } => {
                    stack.push(*cond);
                    stack.push(*then_t);
                    stack.push(*else_t);
                }
            }
        }
    }

    /// Versions of `var` occurring in `id`, in left-to-right construction
    /// order, first occurrence only. The translator draws nondet symbols in
    /// this order, so replay can feed values back in sequence.
    pub fn collect_var_occurrences(&self, id: TermId, var: VarId, out: &mut Vec<u32>) {
        match self.term(id) {
            Term::True | Term::False | Term::BvConst { .. } => {}
            Term::BoolVar { var: v, version } | Term::BvVar { var: v, version, .. } => {
                if *v == var && !out.contains(version) {
                    out.push(*version);
                }
            }
            Term::Not(a) | Term::BvNot(a) | Term::BvNeg(a) => {
                self.collect_var_occurrences(*a, var, out)
            }
            Term::And(a, b)
            | Term::Or(a, b)
            | Term::EqBool(a, b)
            | Term::EqBv(a, b)
            | Term::Slt(a, b)
            | Term::Sle(a, b)
            | Term::Ult(a, b)
            | Term::BvAnd(a, b)
            | Term::BvOr(a, b)
            | Term::BvXor(a, b)
            | Term::BvAdd(a, b)
            | Term::BvSub(a, b)
            | Term::BvMul(a, b)
            | Term::BvSdiv(a, b)
            | Term::BvSrem(a, b)
            | Term::BvShl(a, b)
            | Term::BvAshr(a, b) => {
                self.collect_var_occurrences(*a, var, out);
                self.collect_var_occurrences(*b, var, out);
            }
            Term::IteBool { cond, then_t, else_t } | Term::IteBv { cond, then_t, else_t } => {
                self.collect_var_occurrences(*cond, var, out);
                self.collect_var_occurrences(*then_t, var, out);
                self.collect_var_occurrences(*else_t, var, out);
            }
        }
    }

    pub fn display(&self, id: TermId) -> TermDisplay<'_> {
        TermDisplay { ctx: self, id }
    }
}

pub struct TermDisplay<'a> {
    ctx: &'a TermCtx,
    id: TermId,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self.ctx, self.id, f)
    }
}

fn write_term(ctx: &TermCtx, id: TermId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    macro_rules! bin {
        ($op:expr, $a:expr, $b:expr) => {{
            write!(f, "({} ", $op)?;
            write_term(ctx, *$a, f)?;
            write!(f, " ")?;
            write_term(ctx, *$b, f)?;
            write!(f, ")")
        }};
    }
    match ctx.term(id) {
        Term::True => write!(f, "true"),
        Term::False => write!(f, "false"),
        Term::BvConst { value, width } => write!(f, "{}w{}", bits::to_signed(*value, *width), width),
        Term::BoolVar { var, version } | Term::BvVar { var, version, .. } => {
            write!(f, "{}@{}", ctx.name(*var), version)
        }
        Term::Not(a) => {
            write!(f, "(not ")?;
            write_term(ctx, *a, f)?;
            write!(f, ")")
        }
        Term::And(a, b) => bin!("and", a, b),
        Term::Or(a, b) => bin!("or", a, b),
        Term::IteBool { cond, then_t, else_t } | Term::IteBv { cond, then_t, else_t } => {
            write!(f, "(ite ")?;
            write_term(ctx, *cond, f)?;
            write!(f, " ")?;
            write_term(ctx, *then_t, f)?;
            write!(f, " ")?;
            write_term(ctx, *else_t, f)?;
            write!(f, ")")
        }
        Term::EqBool(a, b) | Term::EqBv(a, b) => bin!("=", a, b),
        Term::Slt(a, b) => bin!("slt", a, b),
        Term::Sle(a, b) => bin!("sle", a, b),
        Term::Ult(a, b) => bin!("ult", a, b),
        Term::BvNot(a) | Term::BvNeg(a) => {
            write!(f, "({} ", if matches!(ctx.term(id), Term::BvNot(_)) { "bvnot" } else { "bvneg" })?;
            write_term(ctx, *a, f)?;
            write!(f, ")")
        }
        Term::BvAnd(a, b) => bin!("bvand", a, b),
        Term::BvOr(a, b) => bin!("bvor", a, b),
        Term::BvXor(a, b) => bin!("bvxor", a, b),
        Term::BvAdd(a, b) => bin!("bvadd", a, b),
        Term::BvSub(a, b) => bin!("bvsub", a, b),
        Term::BvMul(a, b) => bin!("bvmul", a, b),
        Term::BvSdiv(a, b) => bin!("bvsdiv", a, b),
        Term::BvSrem(a, b) => bin!("bvsrem", a, b),
        Term::BvShl(a, b) => bin!("bvshl", a, b),
        Term::BvAshr(a, b) => bin!("bvashr", a, b),
    }
}
