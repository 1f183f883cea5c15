//! Untyped syntax tree for MTC programs.
//!
//! Every node carries a [`Span`] pointing back into the source text so that
//! later phases can report precise locations.

use std::fmt;

/// Byte range into the original source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(offset: usize, len: usize, line: u32, col: u32) -> Self {
        Span { offset, len, line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source-level type annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeName {
    Int,
    Bool,
    /// `int name[N]`
    IntArray(usize),
    Mutex,
    Cond,
    /// Thread handle, usable with `create`/`join`.
    Thread,
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Int => write!(f, "int"),
            TypeName::Bool => write!(f, "bool"),
            TypeName::IntArray(n) => write!(f, "int[{n}]"),
            TypeName::Mutex => write!(f, "mutex"),
            TypeName::Cond => write!(f, "cond"),
            TypeName::Thread => write!(f, "thread"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

impl fmt::Display for UnOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnOp::Neg => write!(f, "-"),
            UnOp::Not => write!(f, "!"),
            UnOp::BitNot => write!(f, "~"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    IntLit(i64),
    BoolLit(bool),
    Var(String),
    Index(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `nondet_int()`: a fresh unconstrained symbolic value.
    NondetInt,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Structural equality ignoring spans; used by the round-trip tests.
    pub fn same_shape(&self, other: &Expr) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::IntLit(a), ExprKind::IntLit(b)) => a == b,
            (ExprKind::BoolLit(a), ExprKind::BoolLit(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Index(a, ia), ExprKind::Index(b, ib)) => a == b && ia.same_shape(ib),
            (ExprKind::Unary(oa, a), ExprKind::Unary(ob, b)) => oa == ob && a.same_shape(b),
            (ExprKind::Binary(oa, la, ra), ExprKind::Binary(ob, lb, rb)) => {
                oa == ob && la.same_shape(lb) && ra.same_shape(rb)
            }
            (ExprKind::NondetInt, ExprKind::NondetInt) => true,
            _ => false,
        }
    }
}

/// Assignment target: a scalar variable or one element of an int array.
#[derive(Debug, Clone)]
pub enum LValue {
    Var(String),
    Index(String, Box<Expr>),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Index(n, _) => n,
        }
    }

    pub fn same_shape(&self, other: &LValue) -> bool {
        match (self, other) {
            (LValue::Var(a), LValue::Var(b)) => a == b,
            (LValue::Index(a, ia), LValue::Index(b, ib)) => a == b && ia.same_shape(ib),
            _ => false,
        }
    }
}

/// Synchronization and thread-management intrinsics.
#[derive(Debug, Clone)]
pub enum Intrinsic {
    /// `create(handle, threadName, argExpr?)`
    Create { handle: String, thread: String, arg: Option<Expr> },
    Join(String),
    Exit,
    Lock(String),
    Unlock(String),
    Wait { cond: String, mutex: String },
    Signal(String),
    Broadcast(String),
    AtomicBegin,
    AtomicEnd,
}

impl Intrinsic {
    pub fn name(&self) -> &'static str {
        match self {
            Intrinsic::Create { .. } => "create",
            Intrinsic::Join(_) => "join",
            Intrinsic::Exit => "exit",
            Intrinsic::Lock(_) => "lock",
            Intrinsic::Unlock(_) => "unlock",
            Intrinsic::Wait { .. } => "wait",
            Intrinsic::Signal(_) => "signal",
            Intrinsic::Broadcast(_) => "broadcast",
            Intrinsic::AtomicBegin => "atomic_begin",
            Intrinsic::AtomicEnd => "atomic_end",
        }
    }

    pub fn same_shape(&self, other: &Intrinsic) -> bool {
        use Intrinsic::*;
        match (self, other) {
            (
                Create { handle: h1, thread: t1, arg: a1 },
                Create { handle: h2, thread: t2, arg: a2 },
            ) => {
                h1 == h2
                    && t1 == t2
                    && match (a1, a2) {
                        (Some(x), Some(y)) => x.same_shape(y),
                        (None, None) => true,
                        _ => false,
                    }
            }
            (Join(a), Join(b)) => a == b,
            (Exit, Exit) => true,
            (Lock(a), Lock(b)) | (Unlock(a), Unlock(b)) => a == b,
            (Wait { cond: c1, mutex: m1 }, Wait { cond: c2, mutex: m2 }) => c1 == c2 && m1 == m2,
            (Signal(a), Signal(b)) | (Broadcast(a), Broadcast(b)) => a == b,
            (AtomicBegin, AtomicBegin) | (AtomicEnd, AtomicEnd) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    /// Local declaration with optional initializer.
    Decl { ty: TypeName, name: String, init: Option<Expr> },
    Assign { target: LValue, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Assert(Expr),
    Assume(Expr),
    Intrinsic(Intrinsic),
    /// `atomic { ... }` block: no context switches inside.
    Atomic(Vec<Stmt>),
    /// Assignment hoisted out of a branch test by the parser
    /// (`if (x = e)` sugar); kept distinct so the CFG phase can verify
    /// tests stay pure.
    TestAssign { target: LValue, value: Expr },
}

impl Stmt {
    pub fn same_shape(&self, other: &Stmt) -> bool {
        match (&self.kind, &other.kind) {
            (
                StmtKind::Decl { ty: t1, name: n1, init: i1 },
                StmtKind::Decl { ty: t2, name: n2, init: i2 },
            ) => {
                t1 == t2
                    && n1 == n2
                    && match (i1, i2) {
                        (Some(x), Some(y)) => x.same_shape(y),
                        (None, None) => true,
                        _ => false,
                    }
            }
            (
                StmtKind::Assign { target: t1, value: v1 },
                StmtKind::Assign { target: t2, value: v2 },
            )
            | (
                StmtKind::TestAssign { target: t1, value: v1 },
                StmtKind::TestAssign { target: t2, value: v2 },
            ) => t1.same_shape(t2) && v1.same_shape(v2),
            (
                StmtKind::If { cond: c1, then_body: tb1, else_body: eb1 },
                StmtKind::If { cond: c2, then_body: tb2, else_body: eb2 },
            ) => c1.same_shape(c2) && same_body(tb1, tb2) && same_body(eb1, eb2),
            (StmtKind::While { cond: c1, body: b1 }, StmtKind::While { cond: c2, body: b2 }) => {
                c1.same_shape(c2) && same_body(b1, b2)
            }
            (StmtKind::Assert(a), StmtKind::Assert(b))
            | (StmtKind::Assume(a), StmtKind::Assume(b)) => a.same_shape(b),
            (StmtKind::Intrinsic(a), StmtKind::Intrinsic(b)) => a.same_shape(b),
            (StmtKind::Atomic(a), StmtKind::Atomic(b)) => same_body(a, b),
            _ => false,
        }
    }
}

pub fn same_body(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
}

#[derive(Debug, Clone)]
pub struct GlobalDecl {
    pub ty: TypeName,
    pub name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub ty: TypeName,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ThreadDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

/// Whole-program parse result.
#[derive(Debug, Clone)]
pub struct Program {
    pub globals: Vec<GlobalDecl>,
    pub threads: Vec<ThreadDef>,
    pub main: Vec<Stmt>,
    pub main_span: Span,
}

impl Program {
    pub fn same_shape(&self, other: &Program) -> bool {
        self.globals.len() == other.globals.len()
            && self.globals.iter().zip(&other.globals).all(|(a, b)| {
                a.ty == b.ty
                    && a.name == b.name
                    && match (&a.init, &b.init) {
                        (Some(x), Some(y)) => x.same_shape(y),
                        (None, None) => true,
                        _ => false,
                    }
            })
            && self.threads.len() == other.threads.len()
            && self.threads.iter().zip(&other.threads).all(|(a, b)| {
                a.name == b.name
                    && a.params.len() == b.params.len()
                    && a.params
                        .iter()
                        .zip(&b.params)
                        .all(|(p, q)| p.ty == q.ty && p.name == q.name)
                    && same_body(&a.body, &b.body)
            })
            && same_body(&self.main, &other.main)
    }
}
