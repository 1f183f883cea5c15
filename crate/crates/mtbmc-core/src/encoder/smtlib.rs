//! SMT-LIB2 emission of verification conditions (QF_BV fragment, arrays
//! already expanded element-wise), plus a reader for the same fragment so
//! exported scripts can be round-tripped when no external solver is
//! installed.
//!
//! Shared subterms are emitted as `define-fun` auxiliaries in dependency
//! order, keeping the text linear in the DAG size. Active widening
//! selectors become named assertions so `(get-unsat-core)` reports them.

use std::collections::HashMap;
use std::fmt::Write;

use super::formula::Formula;
use super::term::{Sort, Term, TermCtx, TermId, VarId};

fn sort_text(s: Sort) -> String {
    match s {
        Sort::Bool => "Bool".to_string(),
        Sort::Bv(w) => format!("(_ BitVec {w})"),
    }
}

fn var_symbol(ctx: &TermCtx, var: VarId, version: u32) -> String {
    format!("|{}@{}|", ctx.name(var), version)
}

struct Emitter<'a> {
    ctx: &'a TermCtx,
    out: String,
    names: HashMap<TermId, String>,
    defined: u32,
    declared: std::collections::BTreeSet<String>,
}

impl<'a> Emitter<'a> {
    /// Name of the term, emitting variable declarations and auxiliary
    /// definitions on first use.
    fn name_of(&mut self, id: TermId) -> String {
        if let Some(n) = self.names.get(&id) {
            return n.clone();
        }
        let text = match self.ctx.term(id).clone() {
            Term::True => "true".to_string(),
            Term::False => "false".to_string(),
            Term::BvConst { value, width } => format!("(_ bv{value} {width})"),
            Term::BoolVar { var, version } => {
                let sym = var_symbol(self.ctx, var, version);
                self.declare(&sym, Sort::Bool);
                sym
            }
            Term::BvVar { var, version, width } => {
                let sym = var_symbol(self.ctx, var, version);
                self.declare(&sym, Sort::Bv(width));
                sym
            }
            compound => {
                let body = self.compound_text(&compound);
                let aux = format!(".t{}", self.defined);
                self.defined += 1;
                let sort = sort_text(self.ctx.sort(id));
                let _ = writeln!(self.out, "(define-fun {aux} () {sort} {body})");
                aux
            }
        };
        self.names.insert(id, text.clone());
        text
    }

    fn declare(&mut self, sym: &str, sort: Sort) {
        if self.declared.insert(sym.to_string()) {
            let _ = writeln!(self.out, "(declare-const {sym} {})", sort_text(sort));
        }
    }

    fn compound_text(&mut self, t: &Term) -> String {
        macro_rules! bin {
            ($op:expr, $a:expr, $b:expr) => {{
                let a = self.name_of(*$a);
                let b = self.name_of(*$b);
                format!("({} {a} {b})", $op)
            }};
        }
        match t {
            Term::Not(a) => format!("(not {})", self.name_of(*a)),
            Term::And(a, b) => bin!("and", a, b),
            Term::Or(a, b) => bin!("or", a, b),
            Term::IteBool { cond, then_t, else_t } | Term::IteBv { cond, then_t, else_t } => {
                let c = self.name_of(*cond);
                let x = self.name_of(*then_t);
                let y = self.name_of(*else_t);
                format!("(ite {c} {x} {y})")
            }
            Term::EqBool(a, b) | Term::EqBv(a, b) => bin!("=", a, b),
            Term::Slt(a, b) => bin!("bvslt", a, b),
            Term::Sle(a, b) => bin!("bvsle", a, b),
            Term::Ult(a, b) => bin!("bvult", a, b),
            Term::BvNot(a) => format!("(bvnot {})", self.name_of(*a)),
            Term::BvNeg(a) => format!("(bvneg {})", self.name_of(*a)),
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
            _ => unreachable!("leaves handled in name_of"),
        }
    }
}

/// Render ψ as an SMT-LIB2 script. `active` holds the currently-forced
/// widening selectors, emitted as named assertions for core extraction.
pub fn to_smtlib(ctx: &TermCtx, f: &Formula, active: &[(String, TermId)]) -> String {
    let mut em = Emitter {
        ctx,
        out: String::new(),
        names: HashMap::new(),
        defined: 0,
        declared: std::collections::BTreeSet::new(),
    };
    let mut header = String::new();
    let _ = writeln!(header, "(set-logic QF_BV)");
    if !active.is_empty() {
        let _ = writeln!(header, "(set-option :produce-unsat-cores true)");
    }

    let mut asserts: Vec<String> = Vec::new();
    for (var, version, rhs) in &f.init {
        let sym = var_symbol(ctx, *var, *version);
        em.declare(&sym, ctx.sort(*rhs));
        let r = em.name_of(*rhs);
        asserts.push(format!("(assert (= {sym} {r}))"));
    }
    for e in &f.events {
        for (var, version, rhs) in &e.eqs {
            let sym = var_symbol(ctx, *var, *version);
            em.declare(&sym, ctx.sort(*rhs));
            let r = em.name_of(*rhs);
            asserts.push(format!("(assert (= {sym} {r}))"));
        }
    }
    for t in &f.schedule {
        let n = em.name_of(*t);
        asserts.push(format!("(assert {n})"));
    }
    let mut viols: Vec<String> = Vec::new();
    for e in &f.events {
        for ob in &e.obligations {
            viols.push(em.name_of(ob.cond_violated));
        }
    }
    match viols.len() {
        0 => asserts.push("(assert false)".to_string()),
        1 => asserts.push(format!("(assert {})", viols[0])),
        _ => asserts.push(format!("(assert (or {}))", viols.join(" "))),
    }
    for (name, conj) in active {
        let c = em.name_of(*conj);
        asserts.push(format!("(assert (! (not {c}) :named |{name}|))"));
    }

    let mut out = header;
    out.push_str(&em.out);
    for a in asserts {
        out.push_str(&a);
        out.push('\n');
    }
    out.push_str("(check-sat)\n");
    if !active.is_empty() {
        out.push_str("(get-unsat-core)\n");
    }
    out
}

// --- reader for the emitted fragment ---

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut in_bars = false;
    for c in text.chars() {
        match c {
            '|' => {
                cur.push('|');
                in_bars = !in_bars;
                if !in_bars {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            _ if in_bars => cur.push(c),
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn parse_sexps(toks: &[String]) -> Vec<Sexp> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().expect("balanced parens");
                stack.last_mut().expect("balanced parens").push(Sexp::List(done));
            }
            atom => stack.last_mut().unwrap().push(Sexp::Atom(atom.to_string())),
        }
    }
    stack.pop().unwrap_or_default()
}

/// A script read back: asserted terms plus named assertions.
pub struct ParsedScript {
    pub asserts: Vec<TermId>,
    pub named: Vec<(String, TermId)>,
}

#[derive(Debug, thiserror::Error)]
#[error("smtlib read error: {0}")]
pub struct SmtReadError(String);

/// Rebuild the emitted fragment inside `ctx`. Supports exactly the shapes
/// `to_smtlib` produces.
pub fn read_script(ctx: &mut TermCtx, text: &str) -> Result<ParsedScript, SmtReadError> {
    let sexps = parse_sexps(&tokenize(text));
    let mut defs: HashMap<String, TermId> = HashMap::new();
    let mut sorts: HashMap<String, Sort> = HashMap::new();
    let mut asserts = Vec::new();
    let mut named = Vec::new();

    for s in sexps {
        let Sexp::List(items) = s else { continue };
        let Some(Sexp::Atom(head)) = items.first() else { continue };
        match head.as_str() {
            "declare-const" => {
                let name = atom(&items[1])?;
                let sort = read_sort(&items[2])?;
                sorts.insert(name, sort);
            }
            "define-fun" => {
                let name = atom(&items[1])?;
                // items[2] = (), items[3] = sort, items[4] = body
                let body = read_term(ctx, &items[4], &defs, &sorts)?;
                defs.insert(name, body);
            }
            "assert" => {
                let t = &items[1];
                if let Sexp::List(inner) = t {
                    if matches!(inner.first(), Some(Sexp::Atom(a)) if a == "!") {
                        let body = read_term(ctx, &inner[1], &defs, &sorts)?;
                        let name = atom(&inner[3])?;
                        named.push((name.trim_matches('|').to_string(), body));
                        continue;
                    }
                }
                asserts.push(read_term(ctx, t, &defs, &sorts)?);
            }
            _ => {}
        }
    }
    Ok(ParsedScript { asserts, named })
}

fn atom(s: &Sexp) -> Result<String, SmtReadError> {
    match s {
        Sexp::Atom(a) => Ok(a.clone()),
        Sexp::List(_) => Err(SmtReadError("expected atom".into())),
    }
}

fn read_sort(s: &Sexp) -> Result<Sort, SmtReadError> {
    match s {
        Sexp::Atom(a) if a == "Bool" => Ok(Sort::Bool),
        Sexp::List(items) => {
            // (_ BitVec w)
            let w = atom(&items[2])?
                .parse::<u32>()
                .map_err(|_| SmtReadError("bad width".into()))?;
            Ok(Sort::Bv(w))
        }
        _ => Err(SmtReadError("unknown sort".into())),
    }
}

fn read_term(
    ctx: &mut TermCtx,
    s: &Sexp,
    defs: &HashMap<String, TermId>,
    sorts: &HashMap<String, Sort>,
) -> Result<TermId, SmtReadError> {
    match s {
        Sexp::Atom(a) => {
            if a == "true" {
                return Ok(ctx.tru());
            }
            if a == "false" {
                return Ok(ctx.fls());
            }
            if let Some(&t) = defs.get(a) {
                return Ok(t);
            }
            if let Some(&sort) = sorts.get(a) {
                let stripped = a.trim_matches('|');
                let (name, version) = stripped
                    .rsplit_once('@')
                    .ok_or_else(|| SmtReadError(format!("unversioned symbol {a}")))?;
                let version: u32 =
                    version.parse().map_err(|_| SmtReadError("bad version".into()))?;
                let var = ctx.intern(name);
                return Ok(match sort {
                    Sort::Bool => ctx.bool_var(var, version),
                    Sort::Bv(w) => ctx.bv_var(var, version, w),
                });
            }
            Err(SmtReadError(format!("unknown symbol {a}")))
        }
        Sexp::List(items) => {
            let head = atom(&items[0])?;
            if head == "_" {
                // (_ bvN w)
                let v = atom(&items[1])?;
                let value: u64 = v
                    .strip_prefix("bv")
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| SmtReadError("bad bv literal".into()))?;
                let w: u32 =
                    atom(&items[2])?.parse().map_err(|_| SmtReadError("bad width".into()))?;
                return Ok(ctx.bvc(value, w));
            }
            let mut args = Vec::new();
            for it in &items[1..] {
                args.push(read_term(ctx, it, defs, sorts)?);
            }
            let t = match (head.as_str(), args.as_slice()) {
                ("not", [a]) => ctx.not(*a),
                ("and", _) => ctx.and_all(args.iter().copied()),
                ("or", _) => ctx.or_all(args.iter().copied()),
                ("ite", [c, a, b]) => match ctx.sort(*a) {
                    Sort::Bool => ctx.ite_bool(*c, *a, *b),
                    Sort::Bv(_) => ctx.ite_bv(*c, *a, *b),
                },
                ("=", [a, b]) => match ctx.sort(*a) {
                    Sort::Bool => ctx.eq_bool(*a, *b),
                    Sort::Bv(_) => ctx.eq_bv(*a, *b),
                },
                ("bvslt", [a, b]) => ctx.slt(*a, *b),
                ("bvsle", [a, b]) => ctx.sle(*a, *b),
                ("bvult", [a, b]) => ctx.ult(*a, *b),
                ("bvnot", [a]) => ctx.bv_not(*a),
                ("bvneg", [a]) => ctx.bv_neg(*a),
                ("bvand", [a, b]) => ctx.bv_and(*a, *b),
                ("bvor", [a, b]) => ctx.bv_or(*a, *b),
                ("bvxor", [a, b]) => ctx.bv_xor(*a, *b),
                ("bvadd", [a, b]) => ctx.bv_add(*a, *b),
                ("bvsub", [a, b]) => ctx.bv_sub(*a, *b),
                ("bvmul", [a, b]) => ctx.bv_mul(*a, *b),
                ("bvsdiv", [a, b]) => ctx.bv_sdiv(*a, *b),
                ("bvsrem", [a, b]) => ctx.bv_srem(*a, *b),
                ("bvshl", [a, b]) => ctx.bv_shl(*a, *b),
                ("bvashr", [a, b]) => ctx.bv_ashr(*a, *b),
                other => return Err(SmtReadError(format!("unsupported op {other:?}"))),
            };
            Ok(t)
        }
    }
}
