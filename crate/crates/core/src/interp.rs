//! Concrete big-step interpreter with statement coverage, plus test suites.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::minilang::{BinOp, Expr, Function, HoleId, Program, StmtId, StmtKind, UnOp, Valuation};

/// Step budget per run.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Nested calls allowed before a run fails with [`RuntimeError::CallDepth`].
pub const MAX_CALL_DEPTH: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum RuntimeError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("read of unassigned variable `{0}`")]
    UnassignedRead(String),
    #[error("unresolved hole `{0}`")]
    UnresolvedHole(HoleId),
    #[error("operator selector {0} out of range")]
    BadSelector(i64),
    #[error("call depth limit exceeded")]
    CallDepth,
    #[error("`{0}` finished without returning")]
    MissingReturn(String),
    #[error("entry expects {expected} argument(s), got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("`{0}` is not a declared global")]
    UnknownGlobal(String),
    #[error("program has no entry function")]
    NoEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Returned(i64),
    /// REACHED escaped the entry function.
    RaisedReached,
    /// The `reach` statement executed; execution stops there.
    ReachedLabel,
    RuntimeError(RuntimeError),
    FuelExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Returned(v) => write!(f, "RETURNED {v}"),
            Outcome::RaisedReached => f.write_str("RAISED"),
            Outcome::ReachedLabel => f.write_str("REACHED"),
            Outcome::RuntimeError(e) => write!(f, "ERROR {e}"),
            Outcome::FuelExhausted => f.write_str("FUEL_EXHAUSTED"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub kind: Outcome,
    pub coverage: BTreeSet<StmtId>,
    pub steps: u64,
}

enum Halt {
    Raise,
    Reach,
    Error(RuntimeError),
    Fuel,
}

impl From<RuntimeError> for Halt {
    fn from(e: RuntimeError) -> Self {
        Halt::Error(e)
    }
}

enum Flow {
    Normal,
    Return(i64),
}

type Frame = HashMap<String, i64>;

/// Configurable runner for one program.
///
/// Holes may be resolved on the fly through [`Interpreter::holes`], which behaves
/// exactly like running the output of [`crate::minilang::substitute`].
pub struct Interpreter<'p> {
    program: &'p Program,
    functions: HashMap<&'p str, &'p Function>,
    fuel: u64,
    holes: Option<&'p Valuation>,
}

struct Run<'a, 'p> {
    it: &'a Interpreter<'p>,
    globals: HashMap<&'p str, i64>,
    coverage: BTreeSet<StmtId>,
    steps: u64,
    depth: usize,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program) -> Self {
        let functions = program.functions.iter().map(|f| (f.name.as_str(), f)).collect();
        Interpreter { program, functions, fuel: DEFAULT_FUEL, holes: None }
    }

    pub fn fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn holes(mut self, holes: &'p Valuation) -> Self {
        self.holes = Some(holes);
        self
    }

    /// Runs the entry function with `globals` overriding the zero initialisation.
    pub fn run(&self, globals: &Valuation, args: &[i64]) -> ExecOutcome {
        let mut run = Run {
            it: self,
            globals: self.program.globals.iter().map(|g| (g.as_str(), 0)).collect(),
            coverage: BTreeSet::new(),
            steps: 0,
            depth: 0,
        };
        let kind = match run.start(globals, args) {
            Ok(v) => Outcome::Returned(v),
            Err(Halt::Raise) => Outcome::RaisedReached,
            Err(Halt::Reach) => Outcome::ReachedLabel,
            Err(Halt::Error(e)) => Outcome::RuntimeError(e),
            Err(Halt::Fuel) => Outcome::FuelExhausted,
        };
        ExecOutcome { kind, coverage: run.coverage, steps: run.steps }
    }
}

impl<'a, 'p> Run<'a, 'p> {
    fn start(&mut self, init: &Valuation, args: &[i64]) -> Result<i64, Halt> {
        for (name, v) in init {
            match self.globals.get_mut(name.as_str()) {
                Some(slot) => *slot = *v,
                None => return Err(RuntimeError::UnknownGlobal(name.clone()).into()),
            }
        }
        let entry = self.it.program.entry().ok_or(RuntimeError::NoEntry)?;
        if entry.params.len() != args.len() {
            return Err(RuntimeError::BadArity { expected: entry.params.len(), got: args.len() }.into());
        }
        self.call(entry, args.to_vec())
    }

    fn tick(&mut self) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps > self.it.fuel {
            Err(Halt::Fuel)
        } else {
            Ok(())
        }
    }

    fn call(&mut self, f: &'p Function, args: Vec<i64>) -> Result<i64, Halt> {
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

    fn block(&mut self, stmts: &'p [crate::minilang::Stmt], frame: &mut Frame) -> Result<Flow, Halt> {
        for s in stmts {
            self.tick()?;
            self.coverage.insert(s.id);
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
                    let branch = if self.eval(c, frame)? != 0 { t } else { e };
                    if let Flow::Return(v) = self.block(branch, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::While(c, body) => {
                    while self.eval(c, frame)? != 0 {
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

    fn eval(&mut self, e: &'p Expr, frame: &mut Frame) -> Result<i64, Halt> {
        Ok(match e {
            Expr::Int(v) => *v,
            Expr::Var(name) => match frame.get(name) {
                Some(v) => *v,
                None => *self
                    .globals
                    .get(name.as_str())
                    .ok_or_else(|| RuntimeError::UnassignedRead(name.clone()))?,
            },
            Expr::Hole(h) => *self
                .it
                .holes
                .and_then(|v| v.get(h.as_str()))
                .ok_or_else(|| RuntimeError::UnresolvedHole(h.clone()))?,
            Expr::Unary(UnOp::Neg, inner) => self.eval(inner, frame)?.checked_neg().ok_or(RuntimeError::Overflow)?,
            Expr::Unary(UnOp::Not, inner) => i64::from(self.eval(inner, frame)? == 0),
            Expr::Binary(op, l, r) => self.binary(*op, l, r, frame)?,
            Expr::Switch { class, selector, lhs, rhs } => {
                let k = self.eval(selector, frame)?;
                let op = usize::try_from(k)
                    .ok()
                    .and_then(|i| class.ops().get(i))
                    .ok_or(RuntimeError::BadSelector(k))?;
                self.binary(*op, lhs, rhs, frame)?
            }
            Expr::Call(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                let f = self.it.functions[name.as_str()];
                self.call(f, vals)?
            }
        })
    }

    fn binary(&mut self, op: BinOp, l: &'p Expr, r: &'p Expr, frame: &mut Frame) -> Result<i64, Halt> {
        let a = self.eval(l, frame)?;
        match op {
            BinOp::And if a == 0 => return Ok(0),
            BinOp::Or if a != 0 => return Ok(1),
            _ => {}
        }
        let b = self.eval(r, frame)?;
        Ok(apply_binop(op, a, b)?)
    }
}

/// Concrete semantics of a binary operator (after short-circuiting has been handled).
pub fn apply_binop(op: BinOp, a: i64, b: i64) -> Result<i64, RuntimeError> {
    let v = match op {
        BinOp::Add => a.checked_add(b).ok_or(RuntimeError::Overflow)?,
        BinOp::Sub => a.checked_sub(b).ok_or(RuntimeError::Overflow)?,
        BinOp::Mul => a.checked_mul(b).ok_or(RuntimeError::Overflow)?,
        BinOp::Div => {
            if b == 0 {
                return Err(RuntimeError::DivisionByZero);
            }
            a.checked_div(b).ok_or(RuntimeError::Overflow)?
        }
        BinOp::Lt => i64::from(a < b),
        BinOp::Le => i64::from(a <= b),
        BinOp::Gt => i64::from(a > b),
        BinOp::Ge => i64::from(a >= b),
        BinOp::Eq => i64::from(a == b),
        BinOp::Ne => i64::from(a != b),
        BinOp::And => i64::from(a != 0 && b != 0),
        BinOp::Or => i64::from(a != 0 || b != 0),
    };
    Ok(v)
}

pub fn run(p: &Program, globals: &Valuation, args: &[i64], fuel: u64) -> ExecOutcome {
    Interpreter::new(p).fuel(fuel).run(globals, args)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestCase {
    pub inputs: Vec<i64>,
    pub expected: i64,
}

impl TestCase {
    pub fn new(inputs: Vec<i64>, expected: i64) -> Self {
        TestCase { inputs, expected }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TestSuite {
    pub cases: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("line {0}: expected `i1,...,ik -> o`")]
    Malformed(usize),
    #[error("line {0}: bad integer `{1}`")]
    BadInt(usize, String),
    #[error("line {0}: arity {1} differs from earlier cases")]
    Arity(usize, usize),
}

impl FromStr for TestSuite {
    type Err = SuiteError;

    fn from_str(text: &str) -> Result<Self, SuiteError> {
        let mut cases = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or(SuiteError::Malformed(lineno))?;
            let int = |s: &str| s.trim().parse::<i64>().map_err(|_| SuiteError::BadInt(lineno, s.trim().into()));
            let inputs = if lhs.trim().is_empty() {
                Vec::new()
            } else {
                lhs.split(',').map(int).collect::<Result<Vec<_>, _>>()?
            };
            if let Some(first) = cases.first().map(|c: &TestCase| c.inputs.len()) {
                if first != inputs.len() {
                    return Err(SuiteError::Arity(lineno, inputs.len()));
                }
            }
            cases.push(TestCase { inputs, expected: int(rhs)? });
        }
        Ok(TestSuite { cases })
    }
}

impl fmt::Display for TestSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            let ins: Vec<String> = c.inputs.iter().map(i64::to_string).collect();
            if ins.is_empty() {
                writeln!(f, "-> {}", c.expected)?;
            } else {
                writeln!(f, "{} -> {}", ins.join(","), c.expected)?;
            }
        }
        Ok(())
    }
}

impl TestSuite {
    pub fn new(cases: Vec<TestCase>) -> Self {
        TestSuite { cases }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn arity(&self) -> Option<usize> {
        self.cases.first().map(|c| c.inputs.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestResult {
    pub passed: bool,
    pub coverage: BTreeSet<StmtId>,
    pub outcome: Outcome,
    /// The verdict is a budget artefact rather than a real failure.
    pub fuel_exhausted: bool,
}

pub fn run_test(p: &Program, t: &TestCase, fuel: u64) -> TestResult {
    test_with(&Interpreter::new(p).fuel(fuel), t)
}

fn test_with(it: &Interpreter<'_>, t: &TestCase) -> TestResult {
    let out = it.run(&Valuation::new(), &t.inputs);
    TestResult {
        passed: out.kind == Outcome::Returned(t.expected),
        fuel_exhausted: out.kind == Outcome::FuelExhausted,
        coverage: out.coverage,
        outcome: out.kind,
    }
}

pub fn run_suite(p: &Program, suite: &TestSuite, fuel: u64) -> Vec<TestResult> {
    let it = Interpreter::new(p).fuel(fuel);
    suite.cases.iter().map(|t| test_with(&it, t)).collect()
}

/// Pass/fail of every test with holes resolved from `holes`; `None` when any run ran out of fuel
/// before a failure was observed.
pub fn suite_passes_with(p: &Program, holes: &Valuation, suite: &TestSuite, fuel: u64) -> Option<bool> {
    let it = Interpreter::new(p).fuel(fuel).holes(holes);
    let mut indeterminate = false;
    for t in &suite.cases {
        let r = test_with(&it, t);
        if r.fuel_exhausted {
            indeterminate = true;
        } else if !r.passed {
            return Some(false);
        }
    }
    if indeterminate {
        None
    } else {
        Some(true)
    }
}
