//! MTC front-end: lexing, parsing, and type checking.

pub mod ast;
mod lexer;
mod parser;
mod pretty;
mod types;

use thiserror::Error;

pub use ast::{
    BinOp, Expr, ExprKind, GlobalDecl, Intrinsic, LValue, Param, Program, Span, Stmt, StmtKind,
    ThreadDef, TypeName, UnOp,
};
pub use parser::parse as parse_text;
pub use pretty::{expr as pretty_expr, pretty};
pub use types::{typecheck, TypedProgram};

/// An MTC source unit.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceProgram { text: text.into(), origin: origin.into() }
    }

    pub fn inline(text: impl Into<String>) -> Self {
        SourceProgram { text: text.into(), origin: "<inline>".into() }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{line}:{col}: syntax error: {message}{expected}", line = span.line, col = span.col, expected = expected_list(.expected))]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: Span, message: String, expected: Vec<String>) -> Self {
        ParseError { span, message, expected }
    }
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Debug, Clone, Error)]
#[error("{line}:{col}: type error: {message}", line = span.line, col = span.col)]
pub struct TypeError {
    pub span: Span,
    pub message: String,
}

impl TypeError {
    pub fn new(span: Span, message: String) -> Self {
        TypeError { span, message }
    }
}

#[derive(Debug, Clone, Error)]
pub enum FrontendError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Type(#[from] TypeError),
}

/// Parse an MTC source unit into an untyped AST.
pub fn parse(src: &SourceProgram) -> Result<Program, ParseError> {
    parse_text(&src.text)
}

/// Parse and typecheck in one go.
pub fn load(src: &SourceProgram) -> Result<TypedProgram, FrontendError> {
    let ast = parse(src)?;
    Ok(typecheck(ast)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The running example: two threads racing on `x`, an array write with
    /// an unconstrained index, and the bounds assertion that can fail.
    pub const FIG1: &str = r#"
int a[10];
int i;
int j = 1;
int x = 2;

thread Tx(int arg) {
  if (x > 2) {
    a[i] = arg;
    assert(i >= 0 && i < 10);
  }
}

thread Ty(int arg) {
  if (x > 3) {
    a[j] = arg;
  } else {
    x = 3;
  }
}

main {
  thread id1;
  thread id2;
  i = nondet_int();
  create(id1, Tx, 10);
  create(id2, Ty, 20);
}
"#;

    #[test]
    fn fig1_parses_with_two_threads_and_four_globals() {
        let ast = parse_text(FIG1).unwrap();
        assert_eq!(ast.threads.len(), 2);
        let names: Vec<_> = ast.globals.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, vec!["a", "i", "j", "x"]);
    }

    #[test]
    fn fig1_typechecks() {
        let tp = typecheck(parse_text(FIG1).unwrap()).unwrap();
        assert_eq!(tp.thread_index.len(), 2);
        assert!(tp.thread_index.contains_key("Tx"));
        assert!(tp.thread_index.contains_key("Ty"));
        assert_eq!(tp.global_type("x"), Some(&TypeName::Int));
        assert_eq!(tp.global_type("a"), Some(&TypeName::IntArray(10)));
        // j = 1, x = 2 initializers; a and i default to zero.
        assert_eq!(tp.globals.iter().find(|g| g.0 == "j").unwrap().2, 1);
        assert_eq!(tp.globals.iter().find(|g| g.0 == "x").unwrap().2, 2);
        assert_eq!(tp.globals.iter().find(|g| g.0 == "i").unwrap().2, 0);
    }

    #[test]
    fn empty_program_parses() {
        let ast = parse_text("main { }").unwrap();
        assert!(ast.main.is_empty());
        assert!(ast.threads.is_empty());
    }

    #[test]
    fn missing_rhs_is_a_syntax_error_at_the_semicolon() {
        let err = parse_text("main { x = ; }").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.col, 12);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn assert_of_int_is_a_type_error() {
        let err = typecheck(parse_text("main { assert(1); }").unwrap()).unwrap_err();
        assert!(err.message.contains("bool"), "{}", err.message);
    }

    #[test]
    fn lock_on_int_is_intrinsic_misuse() {
        let err =
            typecheck(parse_text("int x;\nmain { lock(x); }").unwrap()).unwrap_err();
        assert!(err.message.contains("mutex"), "{}", err.message);
    }

    #[test]
    fn undeclared_identifier_is_reported_with_location() {
        let err = typecheck(parse_text("main { y = 1; }").unwrap()).unwrap_err();
        assert!(err.message.contains("undeclared"));
        assert_eq!(err.span.line, 1);
    }

    #[test]
    fn pretty_parse_round_trip_is_fixed_point() {
        for src in [
            FIG1,
            "main { }",
            "int x = 5;\nbool b = true;\nmain { x = (x + 1) * 2; b = x < 3 || !b; }",
            "mutex m;\ncond c;\nthread T() { lock(m); wait(c, m); unlock(m); }\nmain { thread h; create(h, T); join(h); }",
            "int i;\nmain { while (i < 3) { i = i + 1; } assert(i == 3); atomic { i = 0; } }",
        ] {
            let a1 = parse_text(src).unwrap();
            let printed = pretty(&a1);
            let a2 = parse_text(&printed).unwrap();
            assert!(a1.same_shape(&a2), "round trip changed shape for:\n{printed}");
            let printed2 = pretty(&a2);
            assert_eq!(printed, printed2, "pretty not stable");
        }
    }

    #[test]
    fn assignment_in_test_is_hoisted() {
        let ast = parse_text("int x;\nint y;\nmain { if (x = 3) { y = 1; } }").unwrap();
        // Desugared into atomic { x = 3; if (x) { .. } }.
        match &ast.main[0].kind {
            StmtKind::Atomic(stmts) => {
                assert!(matches!(stmts[0].kind, StmtKind::TestAssign { .. }));
                assert!(matches!(stmts[1].kind, StmtKind::If { .. }));
            }
            other => panic!("expected atomic desugaring, got {other:?}"),
        }
    }

    #[test]
    fn create_arity_checked() {
        let src = "thread T(int v) { }\nmain { thread h; create(h, T); }";
        let err = typecheck(parse_text(src).unwrap()).unwrap_err();
        assert!(err.message.contains("requires an argument"));
    }
}

#[cfg(test)]
pub use tests::FIG1;
