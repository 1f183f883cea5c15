//! Per-thread control-flow graphs and bounded loop unrolling.
//!
//! Nodes are single statements; branch tests are pure by construction (the
//! front-end hoists assignments out of tests and this phase hoists
//! `nondet_int()` into fresh temporaries), so a test node never changes the
//! state.

use crate::frontend::ast::{BinOp, Expr, ExprKind, Intrinsic, LValue, Span, StmtKind, TypeName};
use crate::frontend::TypedProgram;

pub type NodeId = usize;

/// Placeholder edge target used while a subgraph's continuation is unknown.
const OPEN: NodeId = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssertKind {
    /// A user-written `assert`.
    User,
    /// Bound check appended after the last unrolled loop copy.
    Unwinding,
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Assign { target: LValue, value: Expr },
    Assert { cond: Expr, kind: AssertKind },
    Assume(Expr),
    Intrinsic(Intrinsic),
    /// Pure branch test; the node has exactly two out-edges.
    Test { cond: Expr },
    /// Shared terminal target for otherwise-dangling branch edges.
    Nop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Succ {
    /// Thread terminates after this node.
    Halt,
    Next(NodeId),
    Branch { then_to: NodeId, else_to: NodeId },
}

#[derive(Debug, Clone)]
pub struct CfgNode {
    pub kind: NodeKind,
    pub span: Span,
    pub succ: Succ,
}

/// Structured statement form retained for re-emission during unrolling.
#[derive(Debug, Clone)]
pub enum LStmt {
    Simple(NodeKind, Span),
    If { cond: Expr, span: Span, then_b: Vec<LStmt>, else_b: Vec<LStmt> },
    While { cond: Expr, span: Span, body: Vec<LStmt> },
}

#[derive(Debug, Clone)]
pub struct ThreadCfg {
    /// 0 is the entry (main) pseudo-thread; definitions follow in order.
    pub thread_id: usize,
    /// Index into `TypedProgram::program.threads`; `None` for the entry.
    pub def_index: Option<usize>,
    pub name: String,
    pub nodes: Vec<CfgNode>,
    pub entry: Option<NodeId>,
    lowered: Vec<LStmt>,
}

#[derive(Debug, Clone)]
pub struct CfgSet {
    pub threads: Vec<ThreadCfg>,
}

#[derive(Debug, Clone)]
pub struct UnrolledCfg {
    pub cfg: ThreadCfg,
    pub unwind: u32,
    pub unwinding_assertions: bool,
}

#[derive(Debug, Clone)]
pub struct UnrolledSet {
    pub threads: Vec<UnrolledCfg>,
}

impl UnrolledSet {
    pub fn thread(&self, id: usize) -> &UnrolledCfg {
        &self.threads[id]
    }
}

impl ThreadCfg {
    pub fn node(&self, id: NodeId) -> &CfgNode {
        &self.nodes[id]
    }

    /// Structural comparison ignoring spans.
    pub fn same_shape(&self, other: &ThreadCfg) -> bool {
        if self.nodes.len() != other.nodes.len() || self.entry != other.entry {
            return false;
        }
        self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
            if a.succ != b.succ {
                return false;
            }
            match (&a.kind, &b.kind) {
                (
                    NodeKind::Assign { target: t1, value: v1 },
                    NodeKind::Assign { target: t2, value: v2 },
                ) => t1.same_shape(t2) && v1.same_shape(v2),
                (
                    NodeKind::Assert { cond: c1, kind: k1 },
                    NodeKind::Assert { cond: c2, kind: k2 },
                ) => k1 == k2 && c1.same_shape(c2),
                (NodeKind::Assume(x), NodeKind::Assume(y)) => x.same_shape(y),
                (NodeKind::Intrinsic(i1), NodeKind::Intrinsic(i2)) => i1.same_shape(i2),
                (NodeKind::Test { cond: c1 }, NodeKind::Test { cond: c2 }) => c1.same_shape(c2),
                (NodeKind::Nop, NodeKind::Nop) => true,
                _ => false,
            }
        })
    }

    /// All node ids reachable from the entry.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self.entry.into_iter().collect();
        let mut out = Vec::new();
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            out.push(n);
            match self.nodes[n].succ {
                Succ::Halt => {}
                Succ::Next(m) => stack.push(m),
                Succ::Branch { then_to, else_to } => {
                    stack.push(then_to);
                    stack.push(else_to);
                }
            }
        }
        out
    }

    /// Topological order if the graph is acyclic, `None` otherwise.
    pub fn topo_order(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for node in &self.nodes {
            match node.succ {
                Succ::Halt => {}
                Succ::Next(m) => indeg[m] += 1,
                Succ::Branch { then_to, else_to } => {
                    indeg[then_to] += 1;
                    indeg[else_to] += 1;
                }
            }
        }
        let mut stack: Vec<NodeId> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = stack.pop() {
            order.push(v);
            let dec = |m: NodeId, indeg: &mut Vec<usize>, stack: &mut Vec<NodeId>| {
                indeg[m] -= 1;
                if indeg[m] == 0 {
                    stack.push(m);
                }
            };
            match self.nodes[v].succ {
                Succ::Halt => {}
                Succ::Next(m) => dec(m, &mut indeg, &mut stack),
                Succ::Branch { then_to, else_to } => {
                    dec(then_to, &mut indeg, &mut stack);
                    dec(else_to, &mut indeg, &mut stack);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

struct Lowerer<'a> {
    tp: &'a TypedProgram,
    def_index: Option<usize>,
    temp_counter: usize,
}

impl<'a> Lowerer<'a> {
    /// True if `e` has int type in the current scope; tests of int type get
    /// an implicit `!= 0`.
    fn is_int(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::IntLit(_) | ExprKind::NondetInt | ExprKind::Index(..) => true,
            ExprKind::BoolLit(_) => false,
            ExprKind::Var(name) => {
                matches!(self.tp.lookup(self.def_index, name), Some(TypeName::Int))
            }
            ExprKind::Unary(op, _) => {
                use crate::frontend::ast::UnOp;
                matches!(op, UnOp::Neg | UnOp::BitNot)
            }
            ExprKind::Binary(op, ..) => matches!(
                op,
                BinOp::Add
                    | BinOp::Sub
                    | BinOp::Mul
                    | BinOp::Div
                    | BinOp::Rem
                    | BinOp::BitAnd
                    | BinOp::BitOr
                    | BinOp::BitXor
                    | BinOp::Shl
                    | BinOp::Shr
            ),
        }
    }

    fn as_test(&self, e: Expr) -> Expr {
        if self.is_int(&e) {
            let span = e.span;
            Expr::new(
                ExprKind::Binary(
                    BinOp::Ne,
                    Box::new(e),
                    Box::new(Expr::new(ExprKind::IntLit(0), span)),
                ),
                span,
            )
        } else {
            e
        }
    }

    /// Replace every `nondet_int()` in `e` with a fresh temporary, emitting
    /// the hoisted assignments into `out`. Keeps branch tests pure.
    fn hoist_nondet(&mut self, e: &Expr, out: &mut Vec<LStmt>) -> Expr {
        match &e.kind {
            ExprKind::NondetInt => {
                let name = format!("__t{}", self.temp_counter);
                self.temp_counter += 1;
                out.push(LStmt::Simple(
                    NodeKind::Assign {
                        target: LValue::Var(name.clone()),
                        value: Expr::new(ExprKind::NondetInt, e.span),
                    },
                    e.span,
                ));
                Expr::new(ExprKind::Var(name), e.span)
            }
            ExprKind::Unary(op, inner) => Expr::new(
                ExprKind::Unary(*op, Box::new(self.hoist_nondet(inner, out))),
                e.span,
            ),
            ExprKind::Binary(op, l, r) => {
                let l2 = self.hoist_nondet(l, out);
                let r2 = self.hoist_nondet(r, out);
                Expr::new(ExprKind::Binary(*op, Box::new(l2), Box::new(r2)), e.span)
            }
            ExprKind::Index(name, idx) => Expr::new(
                ExprKind::Index(name.clone(), Box::new(self.hoist_nondet(idx, out))),
                e.span,
            ),
            _ => e.clone(),
        }
    }

    fn lower_body(&mut self, body: &[crate::frontend::ast::Stmt]) -> Vec<LStmt> {
        let mut out = Vec::new();
        for s in body {
            self.lower_stmt(s, &mut out);
        }
        out
    }

    fn lower_stmt(&mut self, s: &crate::frontend::ast::Stmt, out: &mut Vec<LStmt>) {
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                // Declarations become explicit default/initializer writes so
                // every local has a defined first version.
                let value = match init {
                    Some(e) => e.clone(),
                    None => match ty {
                        TypeName::Bool => Expr::new(ExprKind::BoolLit(false), s.span),
                        _ => Expr::new(ExprKind::IntLit(0), s.span),
                    },
                };
                out.push(LStmt::Simple(
                    NodeKind::Assign { target: LValue::Var(name.clone()), value },
                    s.span,
                ));
            }
            StmtKind::Assign { target, value } | StmtKind::TestAssign { target, value } => {
                out.push(LStmt::Simple(
                    NodeKind::Assign { target: target.clone(), value: value.clone() },
                    s.span,
                ));
            }
            StmtKind::If { cond, then_body, else_body } => {
                let cond = self.hoist_nondet(cond, out);
                let cond = self.as_test(cond);
                let then_b = self.lower_body(then_body);
                let else_b = self.lower_body(else_body);
                out.push(LStmt::If { cond, span: s.span, then_b, else_b });
            }
            StmtKind::While { cond, body } => {
                // A nondet in a loop test must be re-drawn on every
                // evaluation: hoist before the loop and at the end of each
                // body copy.
                let mut pre = Vec::new();
                let cond = self.hoist_nondet(cond, &mut pre);
                let cond = self.as_test(cond);
                let mut lowered_body = self.lower_body(body);
                lowered_body.extend(pre.iter().cloned());
                out.extend(pre);
                out.push(LStmt::While { cond, span: s.span, body: lowered_body });
            }
            StmtKind::Assert(e) => out.push(LStmt::Simple(
                NodeKind::Assert { cond: e.clone(), kind: AssertKind::User },
                s.span,
            )),
            StmtKind::Assume(e) => {
                out.push(LStmt::Simple(NodeKind::Assume(e.clone()), s.span))
            }
            StmtKind::Atomic(body) => {
                out.push(LStmt::Simple(
                    NodeKind::Intrinsic(Intrinsic::AtomicBegin),
                    s.span,
                ));
                let inner = self.lower_body(body);
                out.extend(inner);
                out.push(LStmt::Simple(NodeKind::Intrinsic(Intrinsic::AtomicEnd), s.span));
            }
            StmtKind::Intrinsic(i) => {
                out.push(LStmt::Simple(NodeKind::Intrinsic(i.clone()), s.span))
            }
        }
    }
}

/// Emits a node graph from structured statements. `unwind` controls loop
/// expansion: `None` emits back edges (cyclic graph), `Some(k)` duplicates
/// each loop body `k` times and appends the bound check.
struct Emitter {
    nodes: Vec<CfgNode>,
    unwind: Option<(u32, bool)>,
}

impl Emitter {
    fn push(&mut self, kind: NodeKind, span: Span) -> NodeId {
        self.nodes.push(CfgNode { kind, span, succ: Succ::Halt });
        self.nodes.len() - 1
    }

    /// Point every dangling edge of `from` at `to`.
    fn patch(&mut self, from: NodeId, to: NodeId) {
        match &mut self.nodes[from].succ {
            s @ Succ::Halt => *s = Succ::Next(to),
            Succ::Next(m) => {
                debug_assert_eq!(*m, OPEN);
                *m = to;
            }
            Succ::Branch { then_to, else_to } => {
                if *then_to == OPEN {
                    *then_to = to;
                }
                if *else_to == OPEN {
                    *else_to = to;
                }
            }
        }
    }

    /// Emits `stmts`; returns (entry, open exits). Open exits are nodes
    /// whose fall-through edge still needs a target.
    fn emit_body(&mut self, stmts: &[LStmt]) -> (Option<NodeId>, Vec<NodeId>) {
        let mut entry = None;
        let mut open: Vec<NodeId> = Vec::new();
        for s in stmts {
            let (sub_entry, sub_exits) = self.emit_stmt(s);
            if let Some(se) = sub_entry {
                for o in open.drain(..) {
                    self.patch(o, se);
                }
                if entry.is_none() {
                    entry = Some(se);
                }
                open = sub_exits;
            }
        }
        (entry, open)
    }

    fn emit_stmt(&mut self, s: &LStmt) -> (Option<NodeId>, Vec<NodeId>) {
        match s {
            LStmt::Simple(kind, span) => {
                let id = self.push(kind.clone(), *span);
                (Some(id), vec![id])
            }
            LStmt::If { cond, span, then_b, else_b } => {
                let test = self.push(NodeKind::Test { cond: cond.clone() }, *span);
                let (t_entry, t_exits) = self.emit_body(then_b);
                let (e_entry, e_exits) = self.emit_body(else_b);
                self.nodes[test].succ = Succ::Branch {
                    then_to: t_entry.unwrap_or(OPEN),
                    else_to: e_entry.unwrap_or(OPEN),
                };
                let mut exits = t_exits;
                exits.extend(e_exits);
                if t_entry.is_none() || e_entry.is_none() {
                    exits.push(test);
                }
                (Some(test), exits)
            }
            LStmt::While { cond, span, body } => match self.unwind {
                None => {
                    let test = self.push(NodeKind::Test { cond: cond.clone() }, *span);
                    let (b_entry, b_exits) = self.emit_body(body);
                    let target = b_entry.unwrap_or(test);
                    self.nodes[test].succ = Succ::Branch { then_to: target, else_to: OPEN };
                    for e in b_exits {
                        self.patch(e, test);
                    }
                    (Some(test), vec![test])
                }
                Some((k, unwinding_assertions)) => {
                    self.emit_unrolled_loop(cond, *span, body, k, unwinding_assertions)
                }
            },
        }
    }

    fn emit_unrolled_loop(
        &mut self,
        cond: &Expr,
        span: Span,
        body: &[LStmt],
        k: u32,
        unwinding_assertions: bool,
    ) -> (Option<NodeId>, Vec<NodeId>) {
        if k == 0 {
            // Bound exhausted: the loop condition must now be false. The
            // check reports insufficiency; the assume cuts the truncated
            // continuation so later obligations never see fabricated state.
            let neg = Expr::new(
                ExprKind::Unary(crate::frontend::ast::UnOp::Not, Box::new(cond.clone())),
                span,
            );
            if unwinding_assertions {
                let a = self.push(
                    NodeKind::Assert { cond: neg.clone(), kind: AssertKind::Unwinding },
                    span,
                );
                let cut = self.push(NodeKind::Assume(neg), span);
                self.patch(a, cut);
                return (Some(a), vec![cut]);
            }
            let id = self.push(NodeKind::Assume(neg), span);
            return (Some(id), vec![id]);
        }
        let test = self.push(NodeKind::Test { cond: cond.clone() }, span);
        let (b_entry, b_exits) = self.emit_body(body);
        let (rest_entry, mut rest_exits) =
            self.emit_unrolled_loop(cond, span, body, k - 1, unwinding_assertions);
        let rest = rest_entry.expect("unrolled tail always has a node");
        let target = match b_entry {
            Some(be) => {
                for e in b_exits {
                    self.patch(e, rest);
                }
                be
            }
            None => rest,
        };
        self.nodes[test].succ = Succ::Branch { then_to: target, else_to: OPEN };
        rest_exits.push(test);
        (Some(test), rest_exits)
    }

    /// Any edge left open at the end of the body halts the thread. Branch
    /// nodes must keep two real out-edges, so open branch edges get a
    /// dedicated terminal no-op node.
    fn finish(mut self, entry: Option<NodeId>) -> (Vec<CfgNode>, Option<NodeId>) {
        let dangling: Vec<NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                matches!(n.succ, Succ::Branch { then_to, else_to }
                    if then_to == OPEN || else_to == OPEN)
            })
            .map(|(i, _)| i)
            .collect();
        if !dangling.is_empty() {
            let halt = self.push(NodeKind::Nop, Span::default());
            for id in dangling {
                if let Succ::Branch { then_to, else_to } = &mut self.nodes[id].succ {
                    if *then_to == OPEN {
                        *then_to = halt;
                    }
                    if *else_to == OPEN {
                        *else_to = halt;
                    }
                }
            }
        }
        (self.nodes, entry)
    }
}

fn emit_graph(lowered: &[LStmt], unwind: Option<(u32, bool)>) -> (Vec<CfgNode>, Option<NodeId>) {
    let mut em = Emitter { nodes: Vec::new(), unwind };
    let (entry, _exits) = em.emit_body(lowered);
    em.finish(entry)
}

/// Build one CFG per thread definition plus one for the entry block.
pub fn build_cfg(tp: &TypedProgram) -> CfgSet {
    let mut threads = Vec::new();
    {
        let mut low = Lowerer { tp, def_index: None, temp_counter: 0 };
        let lowered = low.lower_body(&tp.program.main);
        let (nodes, entry) = emit_graph(&lowered, None);
        threads.push(ThreadCfg {
            thread_id: 0,
            def_index: None,
            name: "main".to_string(),
            nodes,
            entry,
            lowered,
        });
    }
    for (i, t) in tp.program.threads.iter().enumerate() {
        let mut low = Lowerer { tp, def_index: Some(i), temp_counter: 0 };
        let lowered = low.lower_body(&t.body);
        let (nodes, entry) = emit_graph(&lowered, None);
        threads.push(ThreadCfg {
            thread_id: i + 1,
            def_index: Some(i),
            name: t.name.clone(),
            nodes,
            entry,
            lowered,
        });
    }
    CfgSet { threads }
}

/// Unroll every loop `k` times. With `unwinding_assertions` set, a violated
/// bound surfaces as a distinct verdict downstream instead of silently
/// truncating behavior.
pub fn unroll(cfg: &ThreadCfg, k: u32, unwinding_assertions: bool) -> UnrolledCfg {
    assert!(k >= 1, "unwind bound must be >= 1");
    let (nodes, entry) = emit_graph(&cfg.lowered, Some((k, unwinding_assertions)));
    UnrolledCfg {
        cfg: ThreadCfg {
            thread_id: cfg.thread_id,
            def_index: cfg.def_index,
            name: cfg.name.clone(),
            nodes,
            entry,
            lowered: cfg.lowered.clone(),
        },
        unwind: k,
        unwinding_assertions,
    }
}

pub fn unroll_all(set: &CfgSet, k: u32, unwinding_assertions: bool) -> UnrolledSet {
    UnrolledSet {
        threads: set.threads.iter().map(|c| unroll(c, k, unwinding_assertions)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_text, typecheck};

    fn cfgs(src: &str) -> CfgSet {
        build_cfg(&typecheck(parse_text(src).unwrap()).unwrap())
    }

    #[test]
    fn straight_line_thread_is_linear() {
        let set = cfgs("int x;\nthread T() { x = 1; x = 2; x = 3; }\nmain { }");
        let t = &set.threads[1];
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.entry, Some(0));
        assert_eq!(t.nodes[0].succ, Succ::Next(1));
        assert_eq!(t.nodes[1].succ, Succ::Next(2));
        assert_eq!(t.nodes[2].succ, Succ::Halt);
    }

    #[test]
    fn fig1_tx_has_guarded_write_and_assert() {
        let set = cfgs(crate::frontend::FIG1);
        let tx = &set.threads[1];
        assert_eq!(tx.name, "Tx");
        let entry = tx.entry.unwrap();
        let (then_to, _else_to) = match tx.nodes[entry].succ {
            Succ::Branch { then_to, else_to } => (then_to, else_to),
            other => panic!("expected branch at entry, got {other:?}"),
        };
        assert!(matches!(tx.nodes[entry].kind, NodeKind::Test { .. }));
        assert!(matches!(tx.nodes[then_to].kind, NodeKind::Assign { .. }));
        let after = match tx.nodes[then_to].succ {
            Succ::Next(n) => n,
            other => panic!("expected linear successor, got {other:?}"),
        };
        assert!(matches!(
            tx.nodes[after].kind,
            NodeKind::Assert { kind: AssertKind::User, .. }
        ));
    }

    #[test]
    fn every_node_reachable_and_branches_have_two_edges() {
        for src in [
            crate::frontend::FIG1,
            "int x;\nmain { if (x > 0) { x = 1; } else { x = 2; } assert(x > 0); }",
            "int i;\nmain { while (i < 2) { i = i + 1; } }",
        ] {
            let set = cfgs(src);
            for t in &set.threads {
                let reach = t.reachable();
                assert_eq!(reach.len(), t.nodes.len(), "unreachable nodes in {}", t.name);
            }
        }
    }

    #[test]
    fn loop_free_cfg_unrolls_to_itself() {
        let set = cfgs("int x;\nmain { x = 1; if (x > 0) { x = 2; } assert(x > 0); }");
        for t in &set.threads {
            for k in [1, 3, 10] {
                let u = unroll(t, k, true);
                assert!(u.cfg.same_shape(t), "unroll changed a loop-free CFG at k={k}");
            }
        }
    }

    #[test]
    fn bounded_loop_unrolls_to_k_guarded_copies() {
        let set = cfgs("int i;\nmain { while (i < 2) { i = i + 1; } }");
        let u = unroll(&set.threads[0], 2, true);
        // Expect: test, body, test, body, unwinding assert (+ shared halt).
        let tests = u
            .cfg
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Test { .. }))
            .count();
        let asserts = u
            .cfg
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Assert { kind: AssertKind::Unwinding, .. }))
            .count();
        assert_eq!(tests, 2);
        assert_eq!(asserts, 1);
        assert!(u.cfg.topo_order().is_some(), "unrolled CFG must be acyclic");
    }

    #[test]
    fn unrolled_cfgs_are_dags() {
        let srcs = [
            "int i;\nmain { while (i < 5) { i = i + 1; } }",
            "int i;\nint j;\nmain { while (i < 3) { j = 0; while (j < 2) { j = j + 1; } i = i + 1; } }",
            crate::frontend::FIG1,
        ];
        for src in srcs {
            let set = cfgs(src);
            for t in &set.threads {
                for k in 1..=4 {
                    let u = unroll(t, k, true);
                    assert!(
                        u.cfg.topo_order().is_some(),
                        "cycle after unroll k={k} in:\n{src}"
                    );
                }
            }
        }
    }

    #[test]
    fn assignment_in_test_matches_hand_hoisted_form() {
        // Both forms must lower to the same node sequence modulo atomic
        // markers: an assignment followed by a pure test.
        let sugar = cfgs("int x;\nint y;\nmain { if (x = 3) { y = 1; } }");
        let manual = cfgs("int x;\nint y;\nmain { atomic { x = 3; if (x != 0) { y = 1; } } }");
        let a = &sugar.threads[0];
        let b = &manual.threads[0];
        assert!(a.same_shape(b), "desugared test does not match hand-hoisted form");
        // And the test node reads the assigned variable, never assigns.
        assert!(a
            .nodes
            .iter()
            .all(|n| !matches!(&n.kind, NodeKind::Test { cond }
                if matches!(cond.kind, ExprKind::NondetInt))));
    }

    #[test]
    fn nondet_in_test_is_hoisted_to_temp() {
        let set = cfgs("int x;\nmain { if (nondet_int() > 0) { x = 1; } }");
        let t = &set.threads[0];
        let has_hoist = t.nodes.iter().any(|n| {
            matches!(&n.kind, NodeKind::Assign { target: LValue::Var(v), value }
                if v.starts_with("__t") && matches!(value.kind, ExprKind::NondetInt))
        });
        assert!(has_hoist, "nondet_int in test must be hoisted");
        for n in &t.nodes {
            if let NodeKind::Test { cond } = &n.kind {
                fn has_nondet(e: &Expr) -> bool {
                    match &e.kind {
                        ExprKind::NondetInt => true,
                        ExprKind::Unary(_, i) => has_nondet(i),
                        ExprKind::Binary(_, l, r) => has_nondet(l) || has_nondet(r),
                        ExprKind::Index(_, i) => has_nondet(i),
                        _ => false,
                    }
                }
                assert!(!has_nondet(cond), "test still impure");
            }
        }
    }
}
