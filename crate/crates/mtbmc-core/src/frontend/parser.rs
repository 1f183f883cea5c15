//! Recursive-descent parser for the MTC grammar.
//!
//! ```text
//! program  := decl* thread* main
//! decl     := type ident ("[" int "]")? ("=" expr)? ";"
//! thread   := "thread" ident "(" params? ")" block
//! main     := "main" block
//! block    := "{" stmt* "}"
//! stmt     := decl | assign ";" | if | while | assert | assume
//!           | "atomic" block | intrinsic ";"
//! ```
//!
//! Branch and loop tests additionally accept the C-ism `ident = expr`; the
//! parser rewrites it into a [`StmtKind::TestAssign`] plus a pure residual
//! test so that downstream phases only ever see side-effect-free tests.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// A branch/loop test together with any assignment hoisted out of it.
pub struct ParsedTest {
    pub hoisted: Option<(LValue, Expr, Span)>,
    pub cond: Expr,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> Tok {
        self.toks.get(self.pos + 1).map(|t| t.tok).unwrap_or(Tok::Eof)
    }

    fn at(&self, tok: Tok) -> bool {
        self.peek().tok == tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.at(tok) {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&[tok]))
        }
    }

    fn err_expected(&self, expected: &[Tok]) -> ParseError {
        let t = self.peek();
        let found = if t.tok == Tok::Eof {
            "end of input".to_string()
        } else {
            format!("`{}`", t.text)
        };
        ParseError::new(
            t.span,
            format!("unexpected {found}"),
            expected.iter().map(|t| t.describe().to_string()).collect(),
        )
    }

    fn is_type_start(&self) -> bool {
        matches!(
            self.peek().tok,
            Tok::KwInt | Tok::KwBool | Tok::KwMutex | Tok::KwCond | Tok::KwThread
        )
    }

    fn parse_type(&mut self) -> Result<(TypeName, Span), ParseError> {
        let t = self.bump();
        let ty = match t.tok {
            Tok::KwInt => TypeName::Int,
            Tok::KwBool => TypeName::Bool,
            Tok::KwMutex => TypeName::Mutex,
            Tok::KwCond => TypeName::Cond,
            Tok::KwThread => TypeName::Thread,
            _ => {
                return Err(ParseError::new(
                    t.span,
                    format!("expected a type, found `{}`", t.text),
                    vec!["`int`".into(), "`bool`".into(), "`mutex`".into(), "`cond`".into(), "`thread`".into()],
                ))
            }
        };
        Ok((ty, t.span))
    }

    pub fn parse_program(&mut self) -> Result<Program, ParseError> {
        let mut globals = Vec::new();
        let mut threads = Vec::new();

        // Globals: any type-led declaration. `thread name (` starts a thread
        // definition instead of a handle declaration.
        loop {
            if self.at(Tok::KwThread) {
                // thread def or thread-handle global?
                let after2 = self
                    .toks
                    .get(self.pos + 2)
                    .map(|t| t.tok)
                    .unwrap_or(Tok::Eof);
                if self.peek2() == Tok::Ident && after2 == Tok::LParen {
                    break;
                }
            }
            if !self.is_type_start() {
                break;
            }
            globals.push(self.parse_global()?);
        }

        while self.at(Tok::KwThread) {
            threads.push(self.parse_thread()?);
        }

        let main_tok = self.expect(Tok::KwMain)?;
        let main = self.parse_block()?;
        self.expect(Tok::Eof)?;

        Ok(Program { globals, threads, main, main_span: main_tok.span })
    }

    fn parse_global(&mut self) -> Result<GlobalDecl, ParseError> {
        let (mut ty, tspan) = self.parse_type()?;
        let name = self.expect(Tok::Ident)?;
        if self.at(Tok::LBracket) {
            if ty != TypeName::Int {
                return Err(ParseError::new(
                    self.peek().span,
                    "only `int` arrays are supported".into(),
                    vec![],
                ));
            }
            self.bump();
            let n = self.expect(Tok::IntLit)?;
            let len: usize = n.text.parse().map_err(|_| {
                ParseError::new(n.span, "array length too large".into(), vec![])
            })?;
            if len == 0 {
                return Err(ParseError::new(n.span, "array length must be >= 1".into(), vec![]));
            }
            self.expect(Tok::RBracket)?;
            ty = TypeName::IntArray(len);
        }
        let init = if self.at(Tok::Assign) {
            self.bump();
            Some(self.parse_expr()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(GlobalDecl { ty, name: name.text, init, span: tspan })
    }

    fn parse_thread(&mut self) -> Result<ThreadDef, ParseError> {
        let kw = self.expect(Tok::KwThread)?;
        let name = self.expect(Tok::Ident)?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(Tok::RParen) {
            loop {
                let (ty, tspan) = self.parse_type()?;
                let pname = self.expect(Tok::Ident)?;
                params.push(Param { ty, name: pname.text, span: tspan });
                if self.at(Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.parse_block()?;
        Ok(ThreadDef { name: name.text, params, body, span: kw.span })
    }

    fn parse_block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !self.at(Tok::RBrace) {
            body.push(self.parse_stmt()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(body)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.peek().span;
        match self.peek().tok {
            Tok::KwInt | Tok::KwBool | Tok::KwMutex | Tok::KwCond | Tok::KwThread => {
                let (ty, _) = self.parse_type()?;
                let name = self.expect(Tok::Ident)?;
                let init = if self.at(Tok::Assign) {
                    self.bump();
                    Some(self.parse_expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                Ok(Stmt { kind: StmtKind::Decl { ty, name: name.text, init }, span })
            }
            Tok::KwIf => {
                self.bump();
                self.expect(Tok::LParen)?;
                let test = self.parse_test()?;
                self.expect(Tok::RParen)?;
                let then_body = self.parse_block()?;
                let else_body = if self.at(Tok::KwElse) {
                    self.bump();
                    self.parse_block()?
                } else {
                    Vec::new()
                };
                Ok(desugar_test(test, span, |cond| StmtKind::If { cond, then_body, else_body }))
            }
            Tok::KwWhile => {
                self.bump();
                self.expect(Tok::LParen)?;
                let test = self.parse_test()?;
                self.expect(Tok::RParen)?;
                let body = self.parse_block()?;
                Ok(desugar_while(test, span, body))
            }
            Tok::KwAssert | Tok::KwAssume => {
                let kw = self.bump();
                self.expect(Tok::LParen)?;
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                let kind = if kw.tok == Tok::KwAssert {
                    StmtKind::Assert(e)
                } else {
                    StmtKind::Assume(e)
                };
                Ok(Stmt { kind, span })
            }
            Tok::KwAtomic => {
                self.bump();
                let body = self.parse_block()?;
                Ok(Stmt { kind: StmtKind::Atomic(body), span })
            }
            Tok::Ident => {
                // Intrinsic call or assignment.
                if self.peek2() == Tok::LParen {
                    let name = self.bump();
                    let intr = self.parse_intrinsic(&name)?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt { kind: StmtKind::Intrinsic(intr), span })
                } else {
                    let target = self.parse_lvalue()?;
                    self.expect(Tok::Assign)?;
                    let value = self.parse_expr()?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt { kind: StmtKind::Assign { target, value }, span })
                }
            }
            _ => Err(self.err_expected(&[
                Tok::Ident,
                Tok::KwIf,
                Tok::KwWhile,
                Tok::KwAssert,
                Tok::KwAssume,
                Tok::KwAtomic,
                Tok::RBrace,
            ])),
        }
    }

    fn parse_lvalue(&mut self) -> Result<LValue, ParseError> {
        let name = self.expect(Tok::Ident)?;
        if self.at(Tok::LBracket) {
            self.bump();
            let idx = self.parse_expr()?;
            self.expect(Tok::RBracket)?;
            Ok(LValue::Index(name.text, Box::new(idx)))
        } else {
            Ok(LValue::Var(name.text))
        }
    }

    fn parse_intrinsic(&mut self, name: &Token) -> Result<Intrinsic, ParseError> {
        self.expect(Tok::LParen)?;
        let intr = match name.text.as_str() {
            "create" => {
                let handle = self.expect(Tok::Ident)?.text;
                self.expect(Tok::Comma)?;
                let thread = self.expect(Tok::Ident)?.text;
                let arg = if self.at(Tok::Comma) {
                    self.bump();
                    Some(self.parse_expr()?)
                } else {
                    None
                };
                Intrinsic::Create { handle, thread, arg }
            }
            "join" => Intrinsic::Join(self.expect(Tok::Ident)?.text),
            "exit" => Intrinsic::Exit,
            "lock" => Intrinsic::Lock(self.expect(Tok::Ident)?.text),
            "unlock" => Intrinsic::Unlock(self.expect(Tok::Ident)?.text),
            "wait" => {
                let cond = self.expect(Tok::Ident)?.text;
                self.expect(Tok::Comma)?;
                let mutex = self.expect(Tok::Ident)?.text;
                Intrinsic::Wait { cond, mutex }
            }
            "signal" => Intrinsic::Signal(self.expect(Tok::Ident)?.text),
            "broadcast" => Intrinsic::Broadcast(self.expect(Tok::Ident)?.text),
            "atomic_begin" => Intrinsic::AtomicBegin,
            "atomic_end" => Intrinsic::AtomicEnd,
            other => {
                return Err(ParseError::new(
                    name.span,
                    format!("unknown intrinsic `{other}`"),
                    vec![
                        "`create`".into(),
                        "`join`".into(),
                        "`exit`".into(),
                        "`lock`".into(),
                        "`unlock`".into(),
                        "`wait`".into(),
                        "`signal`".into(),
                        "`broadcast`".into(),
                        "`atomic_begin`".into(),
                        "`atomic_end`".into(),
                    ],
                ))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(intr)
    }

    /// Branch/loop test, accepting the `ident = expr` assignment sugar.
    fn parse_test(&mut self) -> Result<ParsedTest, ParseError> {
        if self.at(Tok::Ident) {
            let next = self.peek2();
            if next == Tok::Assign {
                let span = self.peek().span;
                let target = self.parse_lvalue()?;
                self.expect(Tok::Assign)?;
                let value = self.parse_expr()?;
                let residual = Expr::new(ExprKind::Var(target.name().to_string()), span);
                return Ok(ParsedTest { hoisted: Some((target, value, span)), cond: residual });
            }
            if next == Tok::LBracket {
                // Could be `a[i] = e` or an expression starting with `a[i]`.
                let save = self.pos;
                if let Ok(target) = self.parse_lvalue() {
                    if self.at(Tok::Assign) {
                        let span = self.toks[save].span;
                        self.bump();
                        let value = self.parse_expr()?;
                        let residual = match &target {
                            LValue::Index(name, idx) => Expr::new(
                                ExprKind::Index(name.clone(), idx.clone()),
                                span,
                            ),
                            LValue::Var(name) => {
                                Expr::new(ExprKind::Var(name.clone()), span)
                            }
                        };
                        return Ok(ParsedTest {
                            hoisted: Some((target, value, span)),
                            cond: residual,
                        });
                    }
                }
                self.pos = save;
            }
        }
        Ok(ParsedTest { hoisted: None, cond: self.parse_expr()? })
    }

    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.parse_bin(0)
    }

    fn parse_bin(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let (op, prec) = match self.peek().tok {
                Tok::OrOr => (BinOp::Or, 1),
                Tok::AndAnd => (BinOp::And, 2),
                Tok::Pipe => (BinOp::BitOr, 3),
                Tok::Caret => (BinOp::BitXor, 4),
                Tok::Amp => (BinOp::BitAnd, 5),
                Tok::EqEq => (BinOp::Eq, 6),
                Tok::NotEq => (BinOp::Ne, 6),
                Tok::Lt => (BinOp::Lt, 7),
                Tok::Le => (BinOp::Le, 7),
                Tok::Gt => (BinOp::Gt, 7),
                Tok::Ge => (BinOp::Ge, 7),
                Tok::Shl => (BinOp::Shl, 8),
                Tok::Shr => (BinOp::Shr, 8),
                Tok::Plus => (BinOp::Add, 9),
                Tok::Minus => (BinOp::Sub, 9),
                Tok::Star => (BinOp::Mul, 10),
                Tok::Slash => (BinOp::Div, 10),
                Tok::Percent => (BinOp::Rem, 10),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            let span = self.bump().span;
            let rhs = self.parse_bin(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.peek().span;
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                let e = self.parse_unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span))
            }
            Tok::Not => {
                self.bump();
                let e = self.parse_unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span))
            }
            Tok::Tilde => {
                self.bump();
                let e = self.parse_unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::BitNot, Box::new(e)), span))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::IntLit => {
                self.bump();
                let v: i64 = t.text.parse().map_err(|_| {
                    ParseError::new(t.span, "integer literal out of range".into(), vec![])
                })?;
                Ok(Expr::new(ExprKind::IntLit(v), t.span))
            }
            Tok::KwTrue => {
                self.bump();
                Ok(Expr::new(ExprKind::BoolLit(true), t.span))
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Expr::new(ExprKind::BoolLit(false), t.span))
            }
            Tok::Ident => {
                self.bump();
                if self.at(Tok::LParen) {
                    if t.text == "nondet_int" {
                        self.bump();
                        self.expect(Tok::RParen)?;
                        Ok(Expr::new(ExprKind::NondetInt, t.span))
                    } else {
                        Err(ParseError::new(
                            t.span,
                            format!("`{}` is not callable in an expression", t.text),
                            vec!["`nondet_int`".into()],
                        ))
                    }
                } else if self.at(Tok::LBracket) {
                    self.bump();
                    let idx = self.parse_expr()?;
                    self.expect(Tok::RBracket)?;
                    Ok(Expr::new(ExprKind::Index(t.text, Box::new(idx)), t.span))
                } else {
                    Ok(Expr::new(ExprKind::Var(t.text), t.span))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.err_expected(&[Tok::IntLit, Tok::Ident, Tok::LParen])),
        }
    }
}

fn desugar_test(test: ParsedTest, span: Span, mk: impl FnOnce(Expr) -> StmtKind) -> Stmt {
    match test.hoisted {
        None => Stmt { kind: mk(test.cond), span },
        Some((target, value, hspan)) => {
            // `if (x = e) {..}` becomes `x = e; if (<residual>) {..}` wrapped
            // in an atomic pair is unnecessary: the hoisted assignment is an
            // ordinary statement preceding the branch.
            let hoist = Stmt { kind: StmtKind::TestAssign { target, value }, span: hspan };
            let branch = Stmt { kind: mk(test.cond), span };
            Stmt { kind: StmtKind::Atomic(vec![hoist, branch]), span }
        }
    }
}

fn desugar_while(test: ParsedTest, span: Span, mut body: Vec<Stmt>) -> Stmt {
    match test.hoisted {
        None => Stmt { kind: StmtKind::While { cond: test.cond, body }, span },
        Some((target, value, hspan)) => {
            // `while (x = e) {..}` re-evaluates the assignment before every
            // test: `x = e; while (<residual>) { ..; x = e; }`.
            let hoist = Stmt {
                kind: StmtKind::TestAssign { target: target.clone(), value: value.clone() },
                span: hspan,
            };
            body.push(Stmt { kind: StmtKind::TestAssign { target, value }, span: hspan });
            let loop_stmt = Stmt { kind: StmtKind::While { cond: test.cond, body }, span };
            Stmt { kind: StmtKind::Atomic(vec![hoist, loop_stmt]), span }
        }
    }
}

/// Parse MTC source text into an untyped [`Program`].
pub fn parse(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.parse_program()
}
