//! Canonical pretty-printer. `parse(pretty(parse(src)))` is a fixed point
//! on the AST modulo spans.

use std::fmt::Write;

use super::ast::*;

pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for g in &p.globals {
        match &g.ty {
            TypeName::IntArray(n) => {
                let _ = write!(out, "int {}[{}]", g.name, n);
            }
            ty => {
                let _ = write!(out, "{ty} {}", g.name);
            }
        }
        if let Some(init) = &g.init {
            let _ = write!(out, " = {}", expr(init));
        }
        out.push_str(";\n");
    }
    if !p.globals.is_empty() {
        out.push('\n');
    }
    for t in &p.threads {
        let _ = write!(out, "thread {}(", t.name);
        for (i, param) in t.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{} {}", param.ty, param.name);
        }
        out.push_str(") {\n");
        body(&mut out, &t.body, 1);
        out.push_str("}\n\n");
    }
    out.push_str("main {\n");
    body(&mut out, &p.main, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn body(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Decl { ty, name, init } => {
            let _ = write!(out, "{ty} {name}");
            if let Some(e) = init {
                let _ = write!(out, " = {}", expr(e));
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } | StmtKind::TestAssign { target, value } => {
            let _ = write!(out, "{} = {};\n", lvalue(target), expr(value));
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = write!(out, "if ({}) {{\n", expr(cond));
            body(out, then_body, depth + 1);
            indent(out, depth);
            if else_body.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                body(out, else_body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While { cond, body: b } => {
            let _ = write!(out, "while ({}) {{\n", expr(cond));
            body(out, b, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Assert(e) => {
            let _ = write!(out, "assert({});\n", expr(e));
        }
        StmtKind::Assume(e) => {
            let _ = write!(out, "assume({});\n", expr(e));
        }
        StmtKind::Atomic(b) => {
            out.push_str("atomic {\n");
            body(out, b, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Intrinsic(i) => {
            let _ = write!(out, "{};\n", intrinsic(i));
        }
    }
}

fn lvalue(lv: &LValue) -> String {
    match lv {
        LValue::Var(n) => n.clone(),
        LValue::Index(n, e) => format!("{n}[{}]", expr(e)),
    }
}

fn intrinsic(i: &Intrinsic) -> String {
    match i {
        Intrinsic::Create { handle, thread, arg } => match arg {
            Some(a) => format!("create({handle}, {thread}, {})", expr(a)),
            None => format!("create({handle}, {thread})"),
        },
        Intrinsic::Join(h) => format!("join({h})"),
        Intrinsic::Exit => "exit()".to_string(),
        Intrinsic::Lock(m) => format!("lock({m})"),
        Intrinsic::Unlock(m) => format!("unlock({m})"),
        Intrinsic::Wait { cond, mutex } => format!("wait({cond}, {mutex})"),
        Intrinsic::Signal(c) => format!("signal({c})"),
        Intrinsic::Broadcast(c) => format!("broadcast({c})"),
        Intrinsic::AtomicBegin => "atomic_begin()".to_string(),
        Intrinsic::AtomicEnd => "atomic_end()".to_string(),
    }
}

/// Fully parenthesized expression text; re-parsing yields the same tree.
pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::IntLit(v) => {
            if *v < 0 {
                format!("(-{})", v.unsigned_abs())
            } else {
                v.to_string()
            }
        }
        ExprKind::BoolLit(b) => b.to_string(),
        ExprKind::Var(n) => n.clone(),
        ExprKind::Index(n, i) => format!("{n}[{}]", expr(i)),
        ExprKind::Unary(op, inner) => format!("({op}{})", expr(inner)),
        ExprKind::Binary(op, l, r) => format!("({} {op} {})", expr(l), expr(r)),
        ExprKind::NondetInt => "nondet_int()".to_string(),
    }
}
