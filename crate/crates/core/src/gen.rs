//! Seeded random instance generators for property tests and the size sweep.
//!
//! Generated programs are loop-bounded by construction (counting loops with a
//! small constant trip count), recursion-free and exception-free, so every run
//! terminates well inside the default fuel.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Domains};
use crate::interp::{run, Outcome, TestCase, TestSuite, DEFAULT_FUEL};
use crate::minilang::{substitute, BinOp, Expr, Function, HoleId, OpClass, Program, Stmt, StmtKind, UnOp, Valuation};
use crate::reductions::{ReachInstance, SynthesisInstance};

const ALL_OPS: [BinOp; 12] = [
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

/// What an expression may mention.
struct Scope<'a> {
    vars: &'a [String],
    holes: &'a [HoleId],
    /// Callable helpers with their arities.
    helpers: &'a [(String, usize)],
}

fn leaf(rng: &mut impl Rng, sc: &Scope) -> Expr {
    let pick = rng.gen_range(0..10);
    if pick < 3 || sc.vars.is_empty() && sc.holes.is_empty() {
        Expr::Int(rng.gen_range(-6..=6))
    } else if pick < 5 && !sc.holes.is_empty() {
        Expr::Hole(sc.holes.choose(rng).unwrap().clone())
    } else if !sc.vars.is_empty() {
        Expr::var(sc.vars.choose(rng).unwrap().clone())
    } else {
        Expr::Hole(sc.holes.choose(rng).unwrap().clone())
    }
}

fn expr(rng: &mut impl Rng, sc: &Scope, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, sc);
    }
    match rng.gen_range(0..20) {
        0 => Expr::Unary(if rng.gen_bool(0.5) { UnOp::Neg } else { UnOp::Not }, Box::new(expr(rng, sc, depth - 1))),
        1 | 2 if !sc.holes.is_empty() => {
            let class = *OpClass::ALL.choose(rng).unwrap();
            Expr::Switch {
                class,
                selector: Box::new(Expr::Hole(sc.holes.choose(rng).unwrap().clone())),
                lhs: Box::new(expr(rng, sc, depth - 1)),
                rhs: Box::new(expr(rng, sc, depth - 1)),
            }
        }
        3 if !sc.helpers.is_empty() => {
            let (name, arity) = sc.helpers.choose(rng).unwrap();
            Expr::call(name.clone(), (0..*arity).map(|_| expr(rng, sc, depth - 1)).collect())
        }
        _ => {
            // Division is rare so most runs avoid division by zero.
            let op = loop {
                let op = *ALL_OPS.choose(rng).unwrap();
                if op != BinOp::Div || rng.gen_bool(0.2) {
                    break op;
                }
            };
            Expr::bin(op, expr(rng, sc, depth - 1), expr(rng, sc, depth - 1))
        }
    }
}

/// A comparison, so branch conditions split the input space evenly more often.
fn cond(rng: &mut impl Rng, sc: &Scope, depth: u32) -> Expr {
    let ops = OpClass::Compare.ops();
    let c = Expr::bin(*ops.choose(rng).unwrap(), expr(rng, sc, depth), expr(rng, sc, depth));
    if rng.gen_bool(0.2) {
        let op = if rng.gen_bool(0.5) { BinOp::And } else { BinOp::Or };
        Expr::bin(op, c, Expr::bin(*ops.choose(rng).unwrap(), leaf(rng, sc), leaf(rng, sc)))
    } else {
        c
    }
}

struct BodyGen<'a> {
    scope: Scope<'a>,
    locals: &'a [String],
    loop_counter: usize,
    loops: bool,
}

impl BodyGen<'_> {
    fn block(&mut self, rng: &mut impl Rng, len: usize, depth: u32) -> Vec<Stmt> {
        (0..len).flat_map(|_| self.stmt(rng, depth)).collect()
    }

    fn stmt(&mut self, rng: &mut impl Rng, depth: u32) -> Vec<Stmt> {
        let choice = if depth == 0 { 0 } else { rng.gen_range(0..10) };
        match choice {
            0..=4 => vec![Stmt::assign(self.locals.choose(rng).unwrap().clone(), expr(rng, &self.scope, 2))],
            5..=7 => {
                let c = cond(rng, &self.scope, 1);
                let (tn, en) = (rng.gen_range(1..=2), rng.gen_range(0..=2));
                let t = self.block(rng, tn, depth - 1);
                let e = self.block(rng, en, depth - 1);
                vec![Stmt::new(StmtKind::If(c, t, e))]
            }
            8 if self.loops => {
                // i = 0; while (i < k) { ...; i = i + 1; }
                let i = format!("i{}", self.loop_counter);
                self.loop_counter += 1;
                let trips = rng.gen_range(0..=3);
                let n = rng.gen_range(1..=2);
                let mut body = self.block(rng, n, depth - 1);
                body.push(Stmt::assign(i.clone(), Expr::bin(BinOp::Add, Expr::var(i.clone()), Expr::Int(1))));
                vec![
                    Stmt::assign(i.clone(), Expr::Int(0)),
                    Stmt::new(StmtKind::While(Expr::bin(BinOp::Lt, Expr::var(i), Expr::Int(trips)), body)),
                ]
            }
            _ => {
                let c = cond(rng, &self.scope, 1);
                vec![Stmt::new(StmtKind::If(c, vec![Stmt::ret(expr(rng, &self.scope, 2))], vec![]))]
            }
        }
    }
}

/// A function whose locals are all initialised up front, then a random body,
/// then a final `return`.
fn function(rng: &mut impl Rng, name: &str, params: Vec<String>, globals: &[String], holes: &[HoleId], helpers: &[(String, usize)], size: usize, loops: bool) -> Function {
    let locals: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("t{i}")).collect();
    let readable: Vec<String> = params.iter().chain(globals).cloned().collect();
    let mut body: Vec<Stmt> = {
        let init = Scope { vars: &readable, holes, helpers };
        locals.iter().map(|l| Stmt::assign(l.clone(), expr(rng, &init, 1))).collect()
    };
    let vars: Vec<String> = readable.iter().chain(&locals).cloned().collect();
    let mut g = BodyGen { scope: Scope { vars: &vars, holes, helpers }, locals: &locals, loop_counter: 0, loops };
    body.extend(g.block(rng, size, 2));
    body.push(Stmt::ret(expr(rng, &g.scope, 2)));
    Function { name: name.to_string(), params, body }
}

fn finish(mut p: Program) -> Program {
    p.renumber();
    p
}

/// A small domain of at most `max` values, usually a range around zero.
fn small_domain(rng: &mut impl Rng, max: usize) -> Domain {
    if rng.gen_bool(0.2) {
        let mut vals: Vec<i64> = (0..rng.gen_range(1..=max.min(8))).map(|_| rng.gen_range(-20..=20)).collect();
        vals.sort_unstable();
        vals.dedup();
        Domain::set(vals).expect("non-empty set")
    } else {
        let size = rng.gen_range(1..=max) as i64;
        let lo = rng.gen_range(-size..=0);
        Domain::range(lo, lo + size - 1).expect("ordered range")
    }
}

fn random_point(rng: &mut impl Rng, domains: &Domains) -> Valuation {
    domains
        .0
        .iter()
        .map(|(n, d)| {
            let vals: Vec<i64> = d.values().collect();
            (n.clone(), *vals.choose(rng).unwrap())
        })
        .collect()
}

/// A template program with one or two holes (domains of at most `max_domain`
/// values) and a one-to-three-test suite. Expected outputs usually come from a
/// hidden valuation, so most instances have at least one witness.
pub fn synthesis_instance(rng: &mut impl Rng, max_domain: usize) -> SynthesisInstance {
    loop {
        let holes: Vec<HoleId> = (0..rng.gen_range(1..=2)).map(|i| HoleId::new(format!("c{i}"))).collect();
        let globals: Vec<String> = if rng.gen_bool(0.2) { vec!["g".into()] } else { vec![] };
        let arity = rng.gen_range(0..=2);
        let params: Vec<String> = (0..arity).map(|i| format!("a{i}")).collect();
        let mut functions = Vec::new();
        let mut helpers = Vec::new();
        if rng.gen_bool(0.3) {
            let hp = vec!["u".to_string()];
            let h = function(rng, "helper", hp, &globals, &holes, &[], 1, false);
            functions.push(h);
            helpers.push(("helper".to_string(), 1));
        }
        let size = rng.gen_range(1..=4);
        let loops = rng.gen_bool(0.3);
        functions.push(function(rng, "f", params, &globals, &holes, &helpers, size, loops));
        let program = finish(Program { globals, functions });
        if program.holes().is_empty() {
            continue;
        }
        let domains = Domains(
            program
                .holes()
                .into_iter()
                .map(|h| {
                    let d = if switch_selector(&program, &h) && rng.gen_bool(0.7) {
                        Domain::range(0, rng.gen_range(1..=6)).unwrap()
                    } else {
                        small_domain(rng, max_domain)
                    };
                    (h.0, d)
                })
                .collect(),
        );
        let hidden = random_point(rng, &domains);
        let concrete = substitute(&program, &hidden).expect("all holes valued");
        let cases: Vec<TestCase> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let inputs: Vec<i64> = (0..arity).map(|_| rng.gen_range(-10..=10)).collect();
                let expected = match run(&concrete, &Valuation::new(), &inputs, DEFAULT_FUEL).kind {
                    Outcome::Returned(v) if rng.gen_bool(0.8) => v,
                    _ => rng.gen_range(-3..=3),
                };
                TestCase::new(inputs, expected)
            })
            .collect();
        if let Ok(si) = SynthesisInstance::new(program, TestSuite::new(cases), domains) {
            return si;
        }
    }
}

fn switch_selector(p: &Program, h: &HoleId) -> bool {
    let mut found = false;
    p.walk_exprs(&mut |e| {
        if let Expr::Switch { selector, .. } = e {
            if matches!(&**selector, Expr::Hole(x) if x == h) {
                found = true;
            }
        }
    });
    found
}

/// Inserts `reach;` at a uniformly chosen position among all blocks of `body`.
fn plant_reach(rng: &mut impl Rng, body: &mut Vec<Stmt>) {
    fn slots(block: &[Stmt]) -> usize {
        block.len() + 1 + block.iter().flat_map(|s| s.blocks()).map(|b| slots(b)).sum::<usize>()
    }
    fn insert(block: &mut Vec<Stmt>, mut k: usize) -> Result<(), usize> {
        if k <= block.len() {
            block.insert(k, Stmt::new(StmtKind::Reach));
            return Ok(());
        }
        k -= block.len() + 1;
        for s in block.iter_mut() {
            for b in s.blocks_mut() {
                match insert(b, k) {
                    Ok(()) => return Ok(()),
                    Err(rest) => k = rest,
                }
            }
        }
        Err(k)
    }
    // Skip the final `return` so the label is not dead code.
    let n = slots(body) - 1;
    let k = rng.gen_range(0..n);
    let k = if k >= body.len() { k + 1 } else { k };
    insert(body, k).expect("slot in range");
}

/// A reachability program over one or two input globals with small domains.
pub fn reach_instance(rng: &mut impl Rng, max_domain: usize) -> ReachInstance {
    loop {
        let inputs: Vec<String> = ["x", "y"][..rng.gen_range(1..=2)].iter().map(|s| s.to_string()).collect();
        let mut functions = Vec::new();
        let mut helpers = Vec::new();
        if rng.gen_bool(0.3) {
            functions.push(function(rng, "helper", vec!["u".into(), "w".into()], &inputs, &[], &[], 1, false));
            helpers.push(("helper".to_string(), 2));
        }
        let size = rng.gen_range(2..=5);
        let loops = rng.gen_bool(0.3);
        let mut entry = function(rng, "main", vec![], &inputs, &[], &helpers, size, loops);
        if !functions.is_empty() && rng.gen_bool(0.3) {
            plant_reach(rng, &mut functions[0].body);
        } else {
            plant_reach(rng, &mut entry.body);
        }
        functions.push(entry);
        let program = finish(Program { globals: inputs.clone(), functions });
        let domains = Domains(inputs.iter().map(|x| (x.clone(), small_domain(rng, max_domain))).collect());
        if let Ok(ri) = ReachInstance::new(program, inputs, domains) {
            return ri;
        }
    }
}

/// A template program of roughly `target` AST nodes with up to four holes.
pub fn sized_template(rng: &mut impl Rng, target: usize) -> Program {
    let holes: Vec<HoleId> = (0..4).map(|i| HoleId::new(format!("c{i}"))).collect();
    sized(rng, target, &holes, vec!["a0".into(), "a1".into()], |_, _| {})
}

/// A reachability program of roughly `target` AST nodes over inputs `x` and `y`.
pub fn sized_reach(rng: &mut impl Rng, target: usize) -> Program {
    let mut p = sized(rng, target, &[], vec![], |rng, f| plant_reach(rng, &mut f.body));
    p.globals = vec!["x".into(), "y".into()];
    finish(p)
}

fn sized(rng: &mut impl Rng, target: usize, holes: &[HoleId], params: Vec<String>, mut last: impl FnMut(&mut ChaCha8Rng, &mut Function)) -> Program {
    let globals: Vec<String> = if params.is_empty() { vec!["x".into(), "y".into()] } else { vec![] };
    let mut functions: Vec<Function> = Vec::new();
    let mut total = 0;
    let mut k = 0;
    while total < target || functions.is_empty() {
        let helpers: Vec<(String, usize)> = functions.iter().map(|f| (f.name.clone(), f.params.len())).collect();
        let ps = if functions.is_empty() || rng.gen_bool(0.5) { params.clone() } else { vec!["u".into()] };
        let size = ((target - total.min(target)) / 12).clamp(1, 40);
        let f = function(rng, &format!("f{k}"), ps, &globals, holes, &helpers, size, true);
        total += Program { globals: vec![], functions: vec![f.clone()] }.node_count();
        functions.push(f);
        k += 1;
    }
    // The entry is the last function; give it the requested parameters.
    let n = functions.len();
    if functions[n - 1].params != params {
        let f = function(rng, &format!("f{k}"), params, &globals, holes, &[], 1, false);
        functions.push(f);
    }
    let n = functions.len();
    let mut rng = ChaCha8Rng::from_rng(rng).expect("seedable");
    last(&mut rng, &mut functions[n - 1]);
    finish(Program { globals, functions })
}
