//! Name resolution and type checking.

use std::collections::BTreeMap;

use super::ast::*;
use super::TypeError;

/// Fully resolved program: the AST plus symbol tables.
///
/// Global initializers are evaluated to constants here; int globals without
/// an initializer default to zero, matching C semantics for statics.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    /// Global name -> type, in declaration order.
    pub globals: Vec<(String, TypeName, i64)>,
    /// Thread-definition name -> index into `program.threads`.
    pub thread_index: BTreeMap<String, usize>,
    /// Locals (params included) per thread definition, by definition index.
    pub thread_locals: Vec<BTreeMap<String, TypeName>>,
    /// Locals of the entry block.
    pub main_locals: BTreeMap<String, TypeName>,
}

impl TypedProgram {
    pub fn global_type(&self, name: &str) -> Option<&TypeName> {
        self.globals.iter().find(|(n, _, _)| n == name).map(|(_, t, _)| t)
    }

    /// Type of `name` as seen from thread-def `def` (None = entry block).
    pub fn lookup(&self, def: Option<usize>, name: &str) -> Option<&TypeName> {
        let locals = match def {
            Some(i) => &self.thread_locals[i],
            None => &self.main_locals,
        };
        locals.get(name).or_else(|| self.global_type(name))
    }
}

struct Checker<'a> {
    program: &'a Program,
    globals: Vec<(String, TypeName, i64)>,
    thread_index: BTreeMap<String, usize>,
}

/// Result type of an expression during checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Mutex,
    Cond,
    Thread,
    Array,
}

impl Ty {
    fn of(t: &TypeName) -> Ty {
        match t {
            TypeName::Int => Ty::Int,
            TypeName::Bool => Ty::Bool,
            TypeName::IntArray(_) => Ty::Array,
            TypeName::Mutex => Ty::Mutex,
            TypeName::Cond => Ty::Cond,
            TypeName::Thread => Ty::Thread,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::Mutex => "mutex",
            Ty::Cond => "cond",
            Ty::Thread => "thread",
            Ty::Array => "int array",
        }
    }
}

/// Names starting `__` are reserved for compiler-introduced temporaries and
/// the synchronization bookkeeping variables.
fn check_reserved(name: &str, span: Span) -> Result<(), TypeError> {
    if name.starts_with("__") {
        Err(TypeError::new(span, format!("`{name}` uses the reserved `__` prefix")))
    } else {
        Ok(())
    }
}

pub fn typecheck(program: Program) -> Result<TypedProgram, TypeError> {
    let mut globals: Vec<(String, TypeName, i64)> = Vec::new();
    for g in &program.globals {
        check_reserved(&g.name, g.span)?;
        if globals.iter().any(|(n, _, _)| n == &g.name) {
            return Err(TypeError::new(
                g.span,
                format!("duplicate global `{}`", g.name),
            ));
        }
        let init = match (&g.ty, &g.init) {
            (TypeName::Int, Some(e)) => eval_const(e)?,
            (TypeName::Bool, Some(e)) => eval_const_bool(e)?,
            (TypeName::Int, None) | (TypeName::Bool, None) => 0,
            (_, Some(e)) => {
                return Err(TypeError::new(
                    e.span,
                    format!("`{}` of type {} cannot have an initializer", g.name, g.ty),
                ))
            }
            (_, None) => 0,
        };
        globals.push((g.name.clone(), g.ty.clone(), init));
    }

    let mut thread_index = BTreeMap::new();
    for (i, t) in program.threads.iter().enumerate() {
        check_reserved(&t.name, t.span)?;
        for p in &t.params {
            check_reserved(&p.name, p.span)?;
        }
        if thread_index.insert(t.name.clone(), i).is_some() {
            return Err(TypeError::new(
                t.span,
                format!("duplicate thread `{}`", t.name),
            ));
        }
        if globals.iter().any(|(n, _, _)| n == &t.name) {
            return Err(TypeError::new(
                t.span,
                format!("thread `{}` shadows a global", t.name),
            ));
        }
        if t.params.len() > 1 {
            return Err(TypeError::new(
                t.span,
                format!("thread `{}` takes more than one parameter", t.name),
            ));
        }
        if let Some(p) = t.params.first() {
            if !matches!(p.ty, TypeName::Int | TypeName::Bool) {
                return Err(TypeError::new(
                    p.span,
                    "thread parameters are passed by value and must be int or bool".into(),
                ));
            }
        }
    }

    let checker = Checker { program: &program, globals, thread_index };

    let mut thread_locals = Vec::new();
    for t in &program.threads {
        let mut locals: BTreeMap<String, TypeName> = BTreeMap::new();
        for p in &t.params {
            locals.insert(p.name.clone(), p.ty.clone());
        }
        checker.check_body(&t.body, &mut locals)?;
        thread_locals.push(locals);
    }
    let mut main_locals = BTreeMap::new();
    checker.check_body(&program.main, &mut main_locals)?;

    let Checker { globals, thread_index, .. } = checker;
    Ok(TypedProgram { program, globals, thread_index, thread_locals, main_locals })
}

fn eval_const(e: &Expr) -> Result<i64, TypeError> {
    match &e.kind {
        ExprKind::IntLit(v) => Ok(*v),
        ExprKind::Unary(UnOp::Neg, inner) => Ok(eval_const(inner)?.wrapping_neg()),
        _ => Err(TypeError::new(
            e.span,
            "global initializers must be integer constants".into(),
        )),
    }
}

fn eval_const_bool(e: &Expr) -> Result<i64, TypeError> {
    match &e.kind {
        ExprKind::BoolLit(v) => Ok(*v as i64),
        _ => Err(TypeError::new(
            e.span,
            "global initializers must be boolean constants".into(),
        )),
    }
}

impl<'a> Checker<'a> {
    fn global_ty(&self, name: &str) -> Option<Ty> {
        self.globals.iter().find(|(n, _, _)| n == name).map(|(_, t, _)| Ty::of(t))
    }

    fn array_len(&self, name: &str, locals: &BTreeMap<String, TypeName>) -> Option<usize> {
        let ty = locals
            .get(name)
            .or_else(|| self.globals.iter().find(|(n, _, _)| n == name).map(|(_, t, _)| t))?;
        match ty {
            TypeName::IntArray(n) => Some(*n),
            _ => None,
        }
    }

    fn lookup(&self, name: &str, locals: &BTreeMap<String, TypeName>) -> Option<Ty> {
        locals.get(name).map(Ty::of).or_else(|| self.global_ty(name))
    }

    fn check_body(
        &self,
        body: &[Stmt],
        locals: &mut BTreeMap<String, TypeName>,
    ) -> Result<(), TypeError> {
        for s in body {
            self.check_stmt(s, locals)?;
        }
        Ok(())
    }

    fn check_stmt(
        &self,
        s: &Stmt,
        locals: &mut BTreeMap<String, TypeName>,
    ) -> Result<(), TypeError> {
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                check_reserved(name, s.span)?;
                match ty {
                    TypeName::Int | TypeName::Bool | TypeName::Thread => {}
                    _ => {
                        return Err(TypeError::new(
                            s.span,
                            format!("{ty} variables must be declared globally"),
                        ))
                    }
                }
                if locals.contains_key(name)
                    || self.global_ty(name).is_some()
                    || self.thread_index.contains_key(name)
                {
                    return Err(TypeError::new(
                        s.span,
                        format!("`{name}` is already declared"),
                    ));
                }
                if let Some(e) = init {
                    let want = Ty::of(ty);
                    if want == Ty::Thread {
                        return Err(TypeError::new(
                            e.span,
                            "thread handles can only be set by `create`".into(),
                        ));
                    }
                    let got = self.check_expr(e, locals)?;
                    if got != want {
                        return Err(TypeError::new(
                            e.span,
                            format!("initializer has type {}, expected {}", got.describe(), want.describe()),
                        ));
                    }
                }
                locals.insert(name.clone(), ty.clone());
                Ok(())
            }
            StmtKind::Assign { target, value } | StmtKind::TestAssign { target, value } => {
                let tty = self.check_lvalue(target, s.span, locals)?;
                let vty = self.check_expr(value, locals)?;
                if tty != vty {
                    return Err(TypeError::new(
                        value.span,
                        format!(
                            "cannot assign {} to {} `{}`",
                            vty.describe(),
                            tty.describe(),
                            target.name()
                        ),
                    ));
                }
                Ok(())
            }
            StmtKind::If { cond, then_body, else_body } => {
                self.check_test(cond, locals)?;
                let mut then_scope = locals.clone();
                self.check_body(then_body, &mut then_scope)?;
                let mut else_scope = locals.clone();
                self.check_body(else_body, &mut else_scope)?;
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.check_test(cond, locals)?;
                let mut scope = locals.clone();
                self.check_body(body, &mut scope)?;
                Ok(())
            }
            StmtKind::Assert(e) | StmtKind::Assume(e) => {
                let ty = self.check_expr(e, locals)?;
                if ty != Ty::Bool {
                    return Err(TypeError::new(
                        e.span,
                        format!(
                            "{} requires a bool condition, found {}",
                            if matches!(s.kind, StmtKind::Assert(_)) { "assert" } else { "assume" },
                            ty.describe()
                        ),
                    ));
                }
                Ok(())
            }
            StmtKind::Atomic(body) => {
                let mut scope = locals.clone();
                self.check_body(body, &mut scope)
            }
            StmtKind::Intrinsic(i) => self.check_intrinsic(i, s.span, locals),
        }
    }

    /// Branch/loop tests accept bool directly and int via an implicit
    /// `!= 0`; the coercion itself is inserted during CFG lowering.
    fn check_test(
        &self,
        e: &Expr,
        locals: &BTreeMap<String, TypeName>,
    ) -> Result<(), TypeError> {
        let ty = self.check_expr(e, locals)?;
        if matches!(ty, Ty::Bool | Ty::Int) {
            Ok(())
        } else {
            Err(TypeError::new(
                e.span,
                format!("branch condition must be bool or int, found {}", ty.describe()),
            ))
        }
    }

    fn check_lvalue(
        &self,
        lv: &LValue,
        span: Span,
        locals: &BTreeMap<String, TypeName>,
    ) -> Result<Ty, TypeError> {
        match lv {
            LValue::Var(name) => match self.lookup(name, locals) {
                Some(Ty::Int) => Ok(Ty::Int),
                Some(Ty::Bool) => Ok(Ty::Bool),
                Some(other) => Err(TypeError::new(
                    span,
                    format!("cannot assign to {} `{name}`", other.describe()),
                )),
                None => Err(TypeError::new(span, format!("undeclared identifier `{name}`"))),
            },
            LValue::Index(name, idx) => {
                if self.array_len(name, locals).is_none() {
                    return match self.lookup(name, locals) {
                        Some(t) => Err(TypeError::new(
                            span,
                            format!("`{name}` is {} and cannot be indexed", t.describe()),
                        )),
                        None => {
                            Err(TypeError::new(span, format!("undeclared identifier `{name}`")))
                        }
                    };
                }
                let ity = self.check_expr(idx, locals)?;
                if ity != Ty::Int {
                    return Err(TypeError::new(
                        idx.span,
                        format!("array index must be int, found {}", ity.describe()),
                    ));
                }
                Ok(Ty::Int)
            }
        }
    }

    fn check_expr(
        &self,
        e: &Expr,
        locals: &BTreeMap<String, TypeName>,
    ) -> Result<Ty, TypeError> {
        match &e.kind {
            ExprKind::IntLit(_) => Ok(Ty::Int),
            ExprKind::BoolLit(_) => Ok(Ty::Bool),
            ExprKind::NondetInt => Ok(Ty::Int),
            ExprKind::Var(name) => self
                .lookup(name, locals)
                .ok_or_else(|| TypeError::new(e.span, format!("undeclared identifier `{name}`"))),
            ExprKind::Index(name, idx) => {
                if self.array_len(name, locals).is_none() {
                    return match self.lookup(name, locals) {
                        Some(t) => Err(TypeError::new(
                            e.span,
                            format!("`{name}` is {} and cannot be indexed", t.describe()),
                        )),
                        None => Err(TypeError::new(
                            e.span,
                            format!("undeclared identifier `{name}`"),
                        )),
                    };
                }
                let ity = self.check_expr(idx, locals)?;
                if ity != Ty::Int {
                    return Err(TypeError::new(
                        idx.span,
                        format!("array index must be int, found {}", ity.describe()),
                    ));
                }
                Ok(Ty::Int)
            }
            ExprKind::Unary(op, inner) => {
                let ty = self.check_expr(inner, locals)?;
                match op {
                    UnOp::Neg | UnOp::BitNot if ty == Ty::Int => Ok(Ty::Int),
                    UnOp::Not if ty == Ty::Bool => Ok(Ty::Bool),
                    _ => Err(TypeError::new(
                        e.span,
                        format!("operator `{op}` cannot apply to {}", ty.describe()),
                    )),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.check_expr(l, locals)?;
                let rt = self.check_expr(r, locals)?;
                use BinOp::*;
                match op {
                    Add | Sub | Mul | Div | Rem | BitAnd | BitOr | BitXor | Shl | Shr => {
                        if lt == Ty::Int && rt == Ty::Int {
                            Ok(Ty::Int)
                        } else {
                            Err(binop_err(e.span, *op, lt, rt))
                        }
                    }
                    Lt | Le | Gt | Ge => {
                        if lt == Ty::Int && rt == Ty::Int {
                            Ok(Ty::Bool)
                        } else {
                            Err(binop_err(e.span, *op, lt, rt))
                        }
                    }
                    Eq | Ne => {
                        if lt == rt && matches!(lt, Ty::Int | Ty::Bool) {
                            Ok(Ty::Bool)
                        } else {
                            Err(binop_err(e.span, *op, lt, rt))
                        }
                    }
                    And | Or => {
                        if lt == Ty::Bool && rt == Ty::Bool {
                            Ok(Ty::Bool)
                        } else {
                            Err(binop_err(e.span, *op, lt, rt))
                        }
                    }
                }
            }
        }
    }

    fn check_intrinsic(
        &self,
        i: &Intrinsic,
        span: Span,
        locals: &BTreeMap<String, TypeName>,
    ) -> Result<(), TypeError> {
        let expect = |name: &str, want: Ty| -> Result<(), TypeError> {
            match self.lookup(name, locals) {
                Some(t) if t == want => Ok(()),
                Some(t) => Err(TypeError::new(
                    span,
                    format!(
                        "`{}` expects a {} argument, `{name}` is {}",
                        i.name(),
                        want.describe(),
                        t.describe()
                    ),
                )),
                None => Err(TypeError::new(span, format!("undeclared identifier `{name}`"))),
            }
        };
        match i {
            Intrinsic::Create { handle, thread, arg } => {
                expect(handle, Ty::Thread)?;
                let def = *self.thread_index.get(thread).ok_or_else(|| {
                    TypeError::new(span, format!("unknown thread `{thread}`"))
                })?;
                let params = &self.program.threads[def].params;
                match (params.first(), arg) {
                    (None, None) => Ok(()),
                    (Some(p), Some(a)) => {
                        let want = Ty::of(&p.ty);
                        let got = self.check_expr(a, locals)?;
                        if got == want {
                            Ok(())
                        } else {
                            Err(TypeError::new(
                                a.span,
                                format!(
                                    "thread `{thread}` expects a {} argument, found {}",
                                    want.describe(),
                                    got.describe()
                                ),
                            ))
                        }
                    }
                    (Some(_), None) => Err(TypeError::new(
                        span,
                        format!("thread `{thread}` requires an argument"),
                    )),
                    (None, Some(a)) => Err(TypeError::new(
                        a.span,
                        format!("thread `{thread}` takes no argument"),
                    )),
                }
            }
            Intrinsic::Join(h) => expect(h, Ty::Thread),
            Intrinsic::Exit | Intrinsic::AtomicBegin | Intrinsic::AtomicEnd => Ok(()),
            Intrinsic::Lock(m) | Intrinsic::Unlock(m) => expect(m, Ty::Mutex),
            Intrinsic::Wait { cond, mutex } => {
                expect(cond, Ty::Cond)?;
                expect(mutex, Ty::Mutex)
            }
            Intrinsic::Signal(c) | Intrinsic::Broadcast(c) => expect(c, Ty::Cond),
        }
    }
}

fn binop_err(span: Span, op: BinOp, lt: Ty, rt: Ty) -> TypeError {
    TypeError::new(
        span,
        format!(
            "operator `{op}` cannot apply to {} and {}",
            lt.describe(),
            rt.describe()
        ),
    )
}
