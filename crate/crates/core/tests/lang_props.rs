//! Properties of the language front end and the interpreter.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ceti::gen;
use ceti::interp::{run, Interpreter, Outcome, DEFAULT_FUEL, MAX_CALL_DEPTH};
use ceti::minilang::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<i64>().prop_map(Expr::Int),
        (-3i64..=3).prop_map(Expr::Int),
        prop::sample::select(vec!["a", "b", "x1"]).prop_map(Expr::var),
        prop::sample::select(vec!["c0", "k"]).prop_map(Expr::hole),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
        ];
        prop_oneof![
            (prop::sample::select(vec![UnOp::Neg, UnOp::Not]), inner.clone()).prop_map(|(o, e)| Expr::Unary(o, Box::new(e))),
            (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::bin(o, l, r)),
            (prop::sample::select(OpClass::ALL.to_vec()), inner.clone(), inner.clone(), inner.clone()).prop_map(
                |(class, s, l, r)| Expr::Switch { class, selector: Box::new(s), lhs: Box::new(l), rhs: Box::new(r) }
            ),
            prop::collection::vec(inner, 0..3).prop_map(|args| Expr::call("g", args)),
        ]
    })
}

fn generated_programs(seed: u64) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![gen::synthesis_instance(&mut rng, 40).program, gen::reach_instance(&mut rng, 10).program];
    out.push(gen::sized_template(&mut rng, 60));
    out
}

/// Hole ids by a recursive walk written independently of `Program::holes`.
fn holes_oracle(p: &Program) -> Vec<String> {
    fn expr(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Hole(h) => {
                if !out.iter().any(|x| x == h.as_str()) {
                    out.push(h.as_str().to_string());
                }
            }
            Expr::Int(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => expr(a, out),
            Expr::Binary(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Expr::Switch { selector, lhs, rhs, .. } => {
                expr(selector, out);
                expr(lhs, out);
                expr(rhs, out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| expr(a, out)),
        }
    }
    fn block(b: &[Stmt], out: &mut Vec<String>) {
        for s in b {
            match &s.kind {
                StmtKind::Assign(_, e) | StmtKind::Return(e) | StmtKind::Expr(e) => expr(e, out),
                StmtKind::If(c, t, f) => {
                    expr(c, out);
                    block(t, out);
                    block(f, out);
                }
                StmtKind::While(c, body) => {
                    expr(c, out);
                    block(body, out);
                }
                StmtKind::TryCatch(t, c) => {
                    block(t, out);
                    block(c, out);
                }
                StmtKind::Reach | StmtKind::Raise => {}
            }
        }
    }
    let mut out = Vec::new();
    for f in &p.functions {
        block(&f.body, &mut out);
    }
    out
}

/// Reference evaluator, written separately from the crate's interpreter.
/// Results: `Ok(v)` returned, `Err("reach")`, `Err("raise")` or `Err("error")`.
struct Reference<'a> {
    p: &'a Program,
    globals: BTreeMap<String, i64>,
    holes: &'a Valuation,
    depth: usize,
}

enum Done {
    Value(i64),
    Halt(&'static str),
}

impl Reference<'_> {
    fn expr(&mut self, e: &Expr, env: &mut HashMap<String, i64>) -> Result<i64, &'static str> {
        let num = |x: Option<i64>| x.ok_or("error");
        Ok(match e {
            Expr::Int(v) => *v,
            Expr::Var(x) => num(env.get(x).or_else(|| self.globals.get(x)).copied())?,
            Expr::Hole(h) => num(self.holes.get(h.as_str()).copied())?,
            Expr::Unary(UnOp::Neg, a) => num(self.expr(a, env)?.checked_neg())?,
            Expr::Unary(UnOp::Not, a) => (self.expr(a, env)? == 0) as i64,
            Expr::Binary(op, a, b) => self.bin(*op, a, b, env)?,
            Expr::Switch { class, selector, lhs, rhs } => {
                let k = self.expr(selector, env)?;
                let op = match (class, k) {
                    (OpClass::Arith, 0) => BinOp::Add,
                    (OpClass::Arith, 1) => BinOp::Sub,
                    (OpClass::Arith, 2) => BinOp::Mul,
                    (OpClass::Arith, 3) => BinOp::Div,
                    (OpClass::Compare, 0) => BinOp::Lt,
                    (OpClass::Compare, 1) => BinOp::Le,
                    (OpClass::Compare, 2) => BinOp::Gt,
                    (OpClass::Compare, 3) => BinOp::Ge,
                    (OpClass::Compare, 4) => BinOp::Eq,
                    (OpClass::Compare, 5) => BinOp::Ne,
                    (OpClass::Logical, 0) => BinOp::And,
                    (OpClass::Logical, 1) => BinOp::Or,
                    _ => return Err("error"),
                };
                self.bin(op, lhs, rhs, env)?
            }
            Expr::Call(name, args) => {
                let vals = args.iter().map(|a| self.expr(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.call(name, vals)?
            }
        })
    }

    fn bin(&mut self, op: BinOp, a: &Expr, b: &Expr, env: &mut HashMap<String, i64>) -> Result<i64, &'static str> {
        let x = self.expr(a, env)?;
        if op == BinOp::And && x == 0 {
            return Ok(0);
        }
        if op == BinOp::Or && x != 0 {
            return Ok(1);
        }
        let y = self.expr(b, env)?;
        let r = match op {
            BinOp::Add => x.checked_add(y),
            BinOp::Sub => x.checked_sub(y),
            BinOp::Mul => x.checked_mul(y),
            BinOp::Div => {
                if y == 0 {
                    None
                } else {
                    x.checked_div(y)
                }
            }
            BinOp::Lt => Some((x < y) as i64),
            BinOp::Le => Some((x <= y) as i64),
            BinOp::Gt => Some((x > y) as i64),
            BinOp::Ge => Some((x >= y) as i64),
            BinOp::Eq => Some((x == y) as i64),
            BinOp::Ne => Some((x != y) as i64),
            BinOp::And | BinOp::Or => Some((y != 0) as i64),
        };
        r.ok_or("error")
    }

    fn call(&mut self, name: &str, args: Vec<i64>) -> Result<i64, &'static str> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err("error");
        }
        let f = self.p.function(name).ok_or("error")?;
        let mut env: HashMap<String, i64> = f.params.iter().cloned().zip(args).collect();
        self.depth += 1;
        let r = self.block(&f.body, &mut env);
        self.depth -= 1;
        match r? {
            Some(v) => Ok(v),
            None => Err("error"),
        }
    }

    fn block(&mut self, b: &[Stmt], env: &mut HashMap<String, i64>) -> Result<Option<i64>, &'static str> {
        for s in b {
            match &s.kind {
                StmtKind::Assign(x, e) => {
                    let v = self.expr(e, env)?;
                    if let Some(g) = self.globals.get_mut(x) {
                        *g = v;
                    } else {
                        env.insert(x.clone(), v);
                    }
                }
                StmtKind::If(c, t, f) => {
                    let r = if self.expr(c, env)? != 0 { self.block(t, env)? } else { self.block(f, env)? };
                    if r.is_some() {
                        return Ok(r);
                    }
                }
                StmtKind::While(c, body) => {
                    while self.expr(c, env)? != 0 {
                        if let Some(v) = self.block(body, env)? {
                            return Ok(Some(v));
                        }
                    }
                }
                StmtKind::Return(e) => return Ok(Some(self.expr(e, env)?)),
                StmtKind::Reach => return Err("reach"),
                StmtKind::Raise => return Err("raise"),
                StmtKind::TryCatch(t, c) => {
                    let r = match self.block(t, env) {
                        Err("raise") => self.block(c, env)?,
                        other => other?,
                    };
                    if r.is_some() {
                        return Ok(r);
                    }
                }
                StmtKind::Expr(e) => {
                    self.expr(e, env)?;
                }
            }
        }
        Ok(None)
    }
}

fn reference_run(p: &Program, globals: &Valuation, holes: &Valuation, args: &[i64]) -> Done {
    let mut r = Reference {
        p,
        globals: p.globals.iter().map(|g| (g.clone(), globals.get(g).copied().unwrap_or(0))).collect(),
        holes,
        depth: 0,
    };
    match r.call(p.entry_name().unwrap(), args.to_vec()) {
        Ok(v) => Done::Value(v),
        Err(h) => Done::Halt(h),
    }
}

fn agrees(out: &Outcome, reference: &Done) -> bool {
    match (out, reference) {
        (Outcome::Returned(a), Done::Value(b)) => a == b,
        (Outcome::ReachedLabel, Done::Halt("reach")) => true,
        (Outcome::RaisedReached, Done::Halt("raise")) => true,
        (Outcome::RuntimeError(_), Done::Halt("error")) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(common::config(256, 11))]

    #[test]
    fn expressions_round_trip(e in arb_expr()) {
        let text = print_expr(&e);
        prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn programs_round_trip_with_their_statement_ids(seed in any::<u64>()) {
        for p in generated_programs(seed) {
            let text = print(&p);
            let q = parse(&text).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(print(&q), text);
        }
    }

    #[test]
    fn statement_ids_are_a_bijection(seed in any::<u64>()) {
        for p in generated_programs(seed) {
            let ids: Vec<usize> = p.statements().iter().map(|s| s.id.0).collect();
            let n = p.statement_count();
            prop_assert_eq!(ids.len(), n);
            prop_assert_eq!(ids.iter().copied().collect::<BTreeSet<_>>(), (0..n).collect::<BTreeSet<_>>());
            for i in 0..n {
                prop_assert_eq!(p.stmt(StmtId(i)).unwrap().id, StmtId(i));
            }
        }
    }

    #[test]
    fn holes_match_an_independent_walk(seed in any::<u64>()) {
        for p in generated_programs(seed) {
            let listed: Vec<String> = p.holes().iter().map(|h| h.as_str().to_string()).collect();
            prop_assert_eq!(listed, holes_oracle(&p));
        }
    }

    #[test]
    fn substitution_removes_holes_and_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let si = gen::synthesis_instance(&mut rng, 40);
        let v: Valuation = si.domains.0.iter().map(|(n, d)| (n.clone(), d.lo())).collect();
        let q = substitute(&si.program, &v).unwrap();
        prop_assert!(q.holes().is_empty());
        prop_assert_eq!(substitute(&q, &Valuation::new()).unwrap(), q.clone());
        prop_assert_eq!(substitute(&q, &v).unwrap(), q);
    }

    #[test]
    fn interpreter_agrees_with_reference_evaluator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let si = gen::synthesis_instance(&mut rng, 40);
        let holes: Valuation = si.domains.0.iter().map(|(n, d)| (n.clone(), d.hi())).collect();
        for t in &si.suite.cases {
            let out = Interpreter::new(&si.program).holes(&holes).run(&Valuation::new(), &t.inputs);
            let r = reference_run(&si.program, &Valuation::new(), &holes, &t.inputs);
            prop_assert!(agrees(&out.kind, &r), "{:?}\n{}", out.kind, print(&si.program));
        }
        let ri = gen::reach_instance(&mut rng, 10);
        for g in common::points(&ri.domains).into_iter().take(20) {
            let out = run(&ri.program, &g, &[], DEFAULT_FUEL);
            let r = reference_run(&ri.program, &g, &Valuation::new(), &[]);
            prop_assert!(agrees(&out.kind, &r), "{:?}\n{}", out.kind, print(&ri.program));
        }
    }

    #[test]
    fn runs_are_deterministic_and_cover_the_entry(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ri = gen::reach_instance(&mut rng, 10);
        let g = ri.lowest_point();
        let a = run(&ri.program, &g, &[], DEFAULT_FUEL);
        prop_assert_eq!(&a, &run(&ri.program, &g, &[], DEFAULT_FUEL));
        if !matches!(a.kind, Outcome::RuntimeError(_)) {
            let first = ri.program.entry().unwrap().body[0].id;
            prop_assert!(a.coverage.contains(&first));
        }
        let n = ri.program.statement_count();
        prop_assert!(a.coverage.iter().all(|id| id.0 < n));
    }
}
