//! Depth-first path enumeration by symbolic re-execution.
//!
//! Each run replays a recorded prefix of branch decisions and extends it greedily;
//! the next prefix is obtained by bumping the deepest decision that still has an
//! untried alternative. Error continuations (overflow, division by zero, selector out
//! of range) end in a runtime error and are never explored since they cannot reach
//! the label.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::time::Instant;

use crate::domain::Domain;
use crate::interp::{RuntimeError, MAX_CALL_DEPTH};
use crate::minilang::{BinOp, Expr, Function, Program, Stmt, StmtKind, UnOp};
use crate::reductions::ReachInstance;

use super::constraint::{find_point, propagated_bounds, Feasibility};
use super::linear::{ceil_div, floor_div, Atom, LinForm, PathConstraint};
use super::SolverConfig;

/// Candidate budget for enumerating parameters of nonlinear terms.
pub const ENUMERATION_CAP: u128 = 100_000;

/// How a path ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frontier {
    Returned,
    Reached,
    /// Raise escaped the entry function.
    Raised,
    Error(RuntimeError),
    LoopBound,
    FuelExhausted,
}

#[derive(Debug, Clone)]
pub struct ExploredPath {
    pub constraint: PathConstraint,
    pub frontier: Frontier,
    /// A point satisfying `constraint` (not necessarily the smallest).
    pub model: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExploreSummary {
    pub paths: u64,
    pub budget_hit: bool,
    /// Set when nonlinear enumeration or coefficient growth exceeded the solver's reach.
    pub limit: Option<String>,
    /// The visitor asked to stop.
    pub stopped: bool,
}

enum Halt {
    Raise,
    Reach,
    Error(RuntimeError),
    Fuel,
    LoopBound,
    Infeasible,
    Limit(String),
}

impl From<RuntimeError> for Halt {
    fn from(e: RuntimeError) -> Self {
        Halt::Error(e)
    }
}

enum Flow {
    Normal,
    Return(LinForm),
}

type Frame = HashMap<String, LinForm>;

struct Explorer<'p> {
    program: &'p Program,
    functions: HashMap<&'p str, &'p Function>,
    inputs: HashMap<&'p str, usize>,
    doms: Vec<Domain>,
    cfg: &'p SolverConfig,
}

struct SymRun<'e, 'p> {
    ex: &'e Explorer<'p>,
    prefix: &'e [usize],
    trace: Vec<(usize, usize)>,
    pc: Vec<Atom>,
    model: Vec<i64>,
    pinned: Vec<Option<i64>>,
    enumerated: u128,
    unknown: bool,
    globals: HashMap<&'p str, LinForm>,
    steps: u64,
    depth: usize,
}

/// Enumerates the paths of `ri.program` with the input globals symbolic, calling
/// `visit` on every feasible complete path in depth-first order.
pub fn explore(
    ri: &ReachInstance,
    cfg: &SolverConfig,
    mut visit: impl FnMut(&ExploredPath) -> ControlFlow<()>,
) -> ExploreSummary {
    let ex = Explorer {
        program: &ri.program,
        functions: ri.program.functions.iter().map(|f| (f.name.as_str(), f)).collect(),
        inputs: ri.input_vars.iter().enumerate().map(|(i, x)| (x.as_str(), i)).collect(),
        doms: ri.input_vars.iter().map(|x| ri.domains.get(x).cloned().expect("validated instance")).collect(),
        cfg,
    };
    let start = Instant::now();
    let mut summary = ExploreSummary::default();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        if start.elapsed() > cfg.time_cap {
            summary.budget_hit = true;
            break;
        }
        let mut run = SymRun::new(&ex, &prefix);
        let result = run.start();
        let SymRun { trace, pc, model, unknown, .. } = run;
        summary.budget_hit |= unknown;
        let frontier = match result {
            Ok(()) => Some(Frontier::Returned),
            Err(Halt::Reach) => Some(Frontier::Reached),
            Err(Halt::Raise) => Some(Frontier::Raised),
            Err(Halt::Error(e)) => Some(Frontier::Error(e)),
            Err(Halt::Fuel) => Some(Frontier::FuelExhausted),
            Err(Halt::LoopBound) => Some(Frontier::LoopBound),
            Err(Halt::Infeasible) => None,
            Err(Halt::Limit(reason)) => {
                summary.limit = Some(reason);
                break;
            }
        };
        if let Some(frontier) = frontier {
            summary.paths += 1;
            if matches!(frontier, Frontier::FuelExhausted | Frontier::LoopBound) {
                summary.budget_hit = true;
            }
            let path = ExploredPath { constraint: PathConstraint { atoms: pc }, frontier, model };
            if visit(&path).is_break() {
                summary.stopped = true;
                break;
            }
        }
        let Some(i) = trace.iter().rposition(|(c, n)| c + 1 < *n) else { break };
        if summary.paths >= cfg.max_paths {
            summary.budget_hit = true;
            break;
        }
        prefix = trace[..i].iter().map(|(c, _)| *c).collect();
        prefix.push(trace[i].0 + 1);
    }
    summary
}

fn limit(what: &str) -> Halt {
    Halt::Limit(format!("{what} exceeds 128-bit coefficients"))
}

impl<'e, 'p> SymRun<'e, 'p> {
    fn new(ex: &'e Explorer<'p>, prefix: &'e [usize]) -> Self {
        let n = ex.doms.len();
        let globals = ex
            .program
            .globals
            .iter()
            .map(|g| {
                let v = match ex.inputs.get(g.as_str()) {
                    Some(&i) => LinForm::param(n, i),
                    None => LinForm::constant(n, 0),
                };
                (g.as_str(), v)
            })
            .collect();
        SymRun {
            ex,
            prefix,
            trace: Vec::new(),
            pc: Vec::new(),
            model: ex.doms.iter().map(Domain::lo).collect(),
            pinned: vec![None; n],
            enumerated: 1,
            unknown: false,
            globals,
            steps: 0,
            depth: 0,
        }
    }

    fn n(&self) -> usize {
        self.ex.doms.len()
    }

    fn konst(&self, k: i128) -> LinForm {
        LinForm::constant(self.n(), k)
    }

    fn replaying(&self) -> bool {
        self.trace.len() < self.prefix.len()
    }

    /// Adds `atom` to the path if it is consistent with it. During replay atoms are
    /// known to be consistent and are pushed unchecked.
    fn assume(&mut self, atom: Atom) -> bool {
        if self.replaying() || atom.holds(&self.model) == Some(true) {
            self.pc.push(atom);
            return true;
        }
        self.pc.push(atom);
        match find_point(&self.pc, &self.ex.doms, self.ex.cfg.node_cap) {
            Feasibility::Sat(m) => {
                self.model = m;
                true
            }
            Feasibility::Unsat => {
                self.pc.pop();
                false
            }
            Feasibility::Unknown => {
                self.unknown = true;
                self.pc.pop();
                false
            }
        }
    }

    /// Chooses one of `n` alternatives, alternative `c` adding `option(c)` to the path.
    fn fork(&mut self, n: usize, option: impl Fn(usize) -> Atom) -> Result<usize, Halt> {
        let pos = self.trace.len();
        if pos < self.prefix.len() {
            let c = self.prefix[pos];
            self.trace.push((c, n));
            self.pc.push(option(c));
            if pos + 1 < self.prefix.len() {
                return Ok(c);
            }
            return match find_point(&self.pc, &self.ex.doms, self.ex.cfg.node_cap) {
                Feasibility::Sat(m) => {
                    self.model = m;
                    Ok(c)
                }
                Feasibility::Unsat => Err(Halt::Infeasible),
                Feasibility::Unknown => {
                    self.unknown = true;
                    Err(Halt::Infeasible)
                }
            };
        }
        for c in 0..n {
            if self.assume(option(c)) {
                self.trace.push((c, n));
                return Ok(c);
            }
        }
        self.trace.push((n.saturating_sub(1), n));
        Err(Halt::Infeasible)
    }

    /// Decides `v != 0`, forking when `v` is symbolic (true first).
    fn truthy(&mut self, v: &LinForm) -> Result<bool, Halt> {
        match v.as_constant() {
            Some(k) => Ok(k != 0),
            None => {
                let (t, f) = (Atom::ne(v.clone()), Atom::eq(v.clone()));
                Ok(self.fork(2, |c| if c == 0 { t.clone() } else { f.clone() })? == 0)
            }
        }
    }

    /// Replaces parameters pinned by enumeration on this path.
    fn pin(&self, v: LinForm) -> Result<LinForm, Halt> {
        let mut v = v;
        for (i, p) in self.pinned.iter().enumerate() {
            if let (Some(x), true) = (p, v.coeffs[i] != 0) {
                v = v.substitute(i, *x).ok_or_else(|| limit("pinned value"))?;
            }
        }
        Ok(v)
    }

    /// Forks over the in-bounds domain values of the smallest-domain parameter among
    /// `vars`, pinning it on this path.
    fn enumerate(&mut self, vars: impl Iterator<Item = usize>) -> Result<(), Halt> {
        let p = vars
            .min_by_key(|&i| (self.ex.doms[i].size(), i))
            .expect("enumeration needs a symbolic parameter");
        let (lo, hi) = match propagated_bounds(&self.pc, &self.ex.doms) {
            Some(b) => b[p],
            None => return Err(Halt::Infeasible),
        };
        let values: Vec<i64> = match &self.ex.doms[p] {
            Domain::Range { .. } => {
                let count = (hi as i128 - lo as i128 + 1) as u128;
                if count.saturating_mul(self.enumerated) > ENUMERATION_CAP {
                    return Err(Halt::Limit(format!(
                        "nonlinear term needs more than {ENUMERATION_CAP} enumeration candidates"
                    )));
                }
                (lo..=hi).collect()
            }
            Domain::Set { values } => values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect(),
        };
        if (values.len() as u128).saturating_mul(self.enumerated) > ENUMERATION_CAP {
            return Err(Halt::Limit(format!("nonlinear term needs more than {ENUMERATION_CAP} enumeration candidates")));
        }
        self.enumerated *= values.len().max(1) as u128;
        let n = self.n();
        let c = self.fork(values.len(), |c| {
            let mut f = LinForm::param(n, p);
            f.constant = -(values[c] as i128);
            Atom::eq(f)
        })?;
        self.pinned[p] = Some(values[c]);
        Ok(())
    }

    /// Requires the value to fit in 64 bits; out-of-range continuations overflow.
    fn in_range(&mut self, v: LinForm) -> Result<LinForm, Halt> {
        if let Some(k) = v.as_constant() {
            return if i64::try_from(k).is_ok() { Ok(v) } else { Err(RuntimeError::Overflow.into()) };
        }
        let lo: Vec<i64> = self.ex.doms.iter().map(Domain::lo).collect();
        let hi: Vec<i64> = self.ex.doms.iter().map(Domain::hi).collect();
        let (min, max) = v.range(&lo, &hi).unwrap_or((i128::MIN, i128::MAX));
        if min < i64::MIN as i128 {
            let atom = Atom::ge(v.checked_offset(-(i64::MIN as i128)).ok_or_else(|| limit("range check"))?)
                .ok_or_else(|| limit("range check"))?;
            if !self.assume(atom) {
                return Err(RuntimeError::Overflow.into());
            }
        }
        if max > i64::MAX as i128 {
            let atom = Atom::le(v.checked_offset(-(i64::MAX as i128)).ok_or_else(|| limit("range check"))?);
            if !self.assume(atom) {
                return Err(RuntimeError::Overflow.into());
            }
        }
        Ok(v)
    }

    fn tick(&mut self) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps > self.ex.cfg.fuel {
            Err(Halt::Fuel)
        } else {
            Ok(())
        }
    }

    fn start(&mut self) -> Result<(), Halt> {
        let entry = self.ex.program.entry().ok_or(RuntimeError::NoEntry)?;
        if !entry.params.is_empty() {
            return Err(RuntimeError::BadArity { expected: entry.params.len(), got: 0 }.into());
        }
        self.call(entry, Vec::new()).map(|_| ())
    }

    fn call(&mut self, f: &'p Function, args: Vec<LinForm>) -> Result<LinForm, Halt> {
        self.tick()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError::CallDepth.into());
        }
        self.depth += 1;
        let mut frame: Frame = f.params.iter().cloned().zip(args).collect();
        let flow = self.block(&f.body, &mut frame);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Err(RuntimeError::MissingReturn(f.name.clone()).into()),
        }
    }

    fn block(&mut self, stmts: &'p [Stmt], frame: &mut Frame) -> Result<Flow, Halt> {
        for s in stmts {
            self.tick()?;
            match &s.kind {
                StmtKind::Assign(target, e) => {
                    let v = self.eval(e, frame)?;
                    match self.globals.get_mut(target.as_str()) {
                        Some(slot) => *slot = v,
                        None => {
                            frame.insert(target.clone(), v);
                        }
                    }
                }
                StmtKind::If(c, t, e) => {
                    let cond = self.eval(c, frame)?;
                    let branch = if self.truthy(&cond)? { t } else { e };
                    if let Flow::Return(v) = self.block(branch, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::While(c, body) => {
                    let mut iterations = 0u32;
                    loop {
                        let cond = self.eval(c, frame)?;
                        if !self.truthy(&cond)? {
                            break;
                        }
                        iterations += 1;
                        if iterations > self.ex.cfg.loop_bound {
                            return Err(Halt::LoopBound);
                        }
                        if let Flow::Return(v) = self.block(body, frame)? {
                            return Ok(Flow::Return(v));
                        }
                        self.tick()?;
                    }
                }
                StmtKind::Return(e) => return Ok(Flow::Return(self.eval(e, frame)?)),
                StmtKind::Reach => return Err(Halt::Reach),
                StmtKind::Raise => return Err(Halt::Raise),
                StmtKind::TryCatch(body, handler) => {
                    let flow = match self.block(body, frame) {
                        Err(Halt::Raise) => self.block(handler, frame)?,
                        other => other?,
                    };
                    if let Flow::Return(v) = flow {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::Expr(e) => {
                    self.eval(e, frame)?;
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn eval(&mut self, e: &'p Expr, frame: &mut Frame) -> Result<LinForm, Halt> {
        match e {
            Expr::Int(v) => Ok(self.konst(*v as i128)),
            Expr::Var(name) => match frame.get(name) {
                Some(v) => Ok(v.clone()),
                None => self
                    .globals
                    .get(name.as_str())
                    .cloned()
                    .ok_or_else(|| RuntimeError::UnassignedRead(name.clone()).into()),
            },
            Expr::Hole(h) => Err(RuntimeError::UnresolvedHole(h.clone()).into()),
            Expr::Unary(UnOp::Neg, inner) => {
                let v = self.eval(inner, frame)?;
                let neg = v.checked_scale(-1).ok_or_else(|| limit("negation"))?;
                self.in_range(neg)
            }
            Expr::Unary(UnOp::Not, inner) => {
                let v = self.eval(inner, frame)?;
                let t = self.truthy(&v)?;
                Ok(self.konst(i128::from(!t)))
            }
            Expr::Binary(op, l, r) => self.binary(*op, l, r, frame),
            Expr::Switch { class, selector, lhs, rhs } => {
                let sel = self.eval(selector, frame)?;
                let sel = self.pin(sel)?;
                let ops = class.ops();
                let idx = match sel.as_constant() {
                    Some(k) => usize::try_from(k)
                        .ok()
                        .filter(|&i| i < ops.len())
                        .ok_or(RuntimeError::BadSelector(k.clamp(i64::MIN as i128, i64::MAX as i128) as i64))?,
                    None => self.fork(ops.len(), |c| {
                        Atom::eq(sel.checked_offset(-(c as i128)).expect("selector offset is small"))
                    })?,
                };
                self.binary(ops[idx], lhs, rhs, frame)
            }
            Expr::Call(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                let f = self.ex.functions[name.as_str()];
                self.call(f, vals)
            }
        }
    }

    fn binary(&mut self, op: BinOp, l: &'p Expr, r: &'p Expr, frame: &mut Frame) -> Result<LinForm, Halt> {
        let a = self.eval(l, frame)?;
        match op {
            BinOp::And | BinOp::Or => {
                let ta = self.truthy(&a)?;
                if (op == BinOp::And) != ta {
                    return Ok(self.konst(i128::from(ta)));
                }
                let b = self.eval(r, frame)?;
                let tb = self.truthy(&b)?;
                Ok(self.konst(i128::from(tb)))
            }
            _ => {
                let b = self.eval(r, frame)?;
                self.apply(op, a, b)
            }
        }
    }

    fn apply(&mut self, op: BinOp, a: LinForm, b: LinForm) -> Result<LinForm, Halt> {
        match op {
            BinOp::Add => {
                let v = a.checked_add(&b).ok_or_else(|| limit("sum"))?;
                self.in_range(v)
            }
            BinOp::Sub => {
                let v = a.checked_sub(&b).ok_or_else(|| limit("difference"))?;
                self.in_range(v)
            }
            BinOp::Mul => self.mul(a, b),
            BinOp::Div => self.div(a, b),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => {
                let d = a.checked_sub(&b).ok_or_else(|| limit("comparison"))?;
                let d = self.pin(d)?;
                if let Some(k) = d.as_constant() {
                    let holds = match op {
                        BinOp::Lt => k < 0,
                        BinOp::Le => k <= 0,
                        BinOp::Gt => k > 0,
                        BinOp::Ge => k >= 0,
                        BinOp::Eq => k == 0,
                        _ => k != 0,
                    };
                    return Ok(self.konst(i128::from(holds)));
                }
                let (t, f) = match op {
                    BinOp::Lt => (Atom::lt(d.clone()), Atom::ge(d)),
                    BinOp::Le => (Some(Atom::le(d.clone())), Atom::gt(d)),
                    BinOp::Gt => (Atom::gt(d.clone()), Some(Atom::le(d))),
                    BinOp::Ge => (Atom::ge(d.clone()), Atom::lt(d)),
                    BinOp::Eq => (Some(Atom::eq(d.clone())), Some(Atom::ne(d))),
                    _ => (Some(Atom::ne(d.clone())), Some(Atom::eq(d))),
                };
                let (t, f) = (t.ok_or_else(|| limit("comparison"))?, f.ok_or_else(|| limit("comparison"))?);
                let c = self.fork(2, |c| if c == 0 { t.clone() } else { f.clone() })?;
                Ok(self.konst(i128::from(c == 0)))
            }
            BinOp::And | BinOp::Or => unreachable!("short-circuit operators handled by binary"),
        }
    }

    fn mul(&mut self, a: LinForm, b: LinForm) -> Result<LinForm, Halt> {
        let (mut a, mut b) = (a, b);
        loop {
            a = self.pin(a)?;
            b = self.pin(b)?;
            let v = match (a.as_constant(), b.as_constant()) {
                (Some(k), _) => b.checked_scale(k),
                (_, Some(k)) => a.checked_scale(k),
                (None, None) => {
                    let vars: Vec<usize> = a.vars().chain(b.vars()).collect();
                    self.enumerate(vars.into_iter())?;
                    continue;
                }
            };
            return self.in_range(v.ok_or_else(|| limit("product"))?);
        }
    }

    fn div(&mut self, a: LinForm, b: LinForm) -> Result<LinForm, Halt> {
        let mut b = self.pin(b)?;
        while b.as_constant().is_none() {
            let vars: Vec<usize> = b.vars().collect();
            self.enumerate(vars.into_iter())?;
            b = self.pin(b)?;
        }
        let d = b.as_constant().unwrap();
        if d == 0 {
            return Err(RuntimeError::DivisionByZero.into());
        }
        let mut a = self.pin(a)?;
        loop {
            if let Some(k) = a.as_constant() {
                let q = (k as i64).checked_div(d as i64).ok_or(RuntimeError::Overflow)?;
                return Ok(self.konst(q as i128));
            }
            if a.coeffs.iter().all(|c| c % d == 0) {
                break;
            }
            let vars: Vec<usize> = a.vars().filter(|&i| a.coeffs[i] % d != 0).collect();
            self.enumerate(vars.into_iter())?;
            a = self.pin(a)?;
        }
        let k = a.constant;
        let mut g = a.clone();
        g.constant = 0;
        g.coeffs.iter_mut().for_each(|c| *c /= d);
        if k % d == 0 {
            return self.in_range(g.checked_offset(k / d).ok_or_else(|| limit("quotient"))?);
        }
        // truncation rounds toward zero: floor when the quotient is non-negative
        let signed = if d > 0 { a.clone() } else { a.checked_scale(-1).ok_or_else(|| limit("quotient"))? };
        let (nonneg, neg) =
            (Atom::ge(signed.clone()).ok_or_else(|| limit("quotient"))?, Atom::lt(signed).ok_or_else(|| limit("quotient"))?);
        let c = self.fork(2, |c| if c == 0 { nonneg.clone() } else { neg.clone() })?;
        let offset = if c == 0 { floor_div(k, d) } else { ceil_div(k, d) };
        self.in_range(g.checked_offset(offset).ok_or_else(|| limit("quotient"))?)
    }
}
