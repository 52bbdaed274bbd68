//! The synthesis/reachability gadgets.
//!
//! [`gadget_s2r`] turns a template program plus test suite into a hole-free program
//! whose `reach` label is reachable exactly when some hole valuation passes every
//! test; [`gadget_r2s`] goes the other way, turning the input globals of a
//! reachability program into holes and the label into a raised exception caught by a
//! new entry function.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::{Domain, Domains};
use crate::interp::{suite_passes_with, Interpreter, Outcome, TestCase, TestSuite};
use crate::minilang::{self, BinOp, Expr, Function, HoleId, Program, Stmt, StmtKind, Valuation, MAIN};

/// Suffix for functions cloned into a reachability program.
pub const S2R_SUFFIX: &str = "__P";
/// Suffix for functions cloned into a synthesis program.
pub const R2S_SUFFIX: &str = "__Q";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("synthesis instance has no holes")]
    NoHoles,
    #[error("test suite is empty")]
    EmptySuite,
    #[error("no domain for `{0}`")]
    MissingDomain(String),
    #[error("test arity {got} does not match entry arity {expected}")]
    Arity { expected: usize, got: usize },
    #[error("template program contains a `reach` label")]
    ReachInTemplate,
    #[error("template program assigns global `{0}`")]
    GlobalWrite(String),
    #[error("reachability program must contain exactly one `reach`, found {0}")]
    ReachCount(usize),
    #[error("input variable `{0}` is not a declared global")]
    UndeclaredInput(String),
    #[error("input variable `{0}` is assigned in the program")]
    AssignedInput(String),
    #[error("reachability entry must take no parameters")]
    EntryParams,
    #[error("reachability program already uses exceptions")]
    UsesExceptions,
    #[error(transparent)]
    Lang(#[from] minilang::LangError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisInstance {
    pub program: Program,
    pub suite: TestSuite,
    /// One entry per hole, in hole order.
    pub domains: Domains,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachInstance {
    pub program: Program,
    pub input_vars: Vec<String>,
    /// One entry per input variable, in input order.
    pub domains: Domains,
}

/// Names introduced by a gadget, `from -> to`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RenameMap {
    /// Holes to globals (S2R) or input globals to holes (R2S).
    pub params: Vec<(String, String)>,
    pub functions: Vec<(String, String)>,
}

impl RenameMap {
    pub fn param(&self, from: &str) -> Option<&str> {
        self.params.iter().find(|(f, _)| f == from).map(|(_, t)| t.as_str())
    }

    pub fn function(&self, from: &str) -> Option<&str> {
        self.functions.iter().find(|(f, _)| f == from).map(|(_, t)| t.as_str())
    }

    /// Renames the keys of a valuation from source to target names.
    pub fn forward(&self, v: &Valuation) -> Valuation {
        v.iter().filter_map(|(k, x)| self.param(k).map(|t| (t.to_string(), *x))).collect()
    }

    /// Renames the keys of a valuation from target back to source names.
    pub fn backward(&self, v: &Valuation) -> Valuation {
        v.iter()
            .filter_map(|(k, x)| self.params.iter().find(|(_, t)| t == k).map(|(f, _)| (f.clone(), *x)))
            .collect()
    }
}

impl fmt::Display for RenameMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in &self.params {
            writeln!(f, "{a}={b}")?;
        }
        for (a, b) in &self.functions {
            writeln!(f, "fn:{a}={b}")?;
        }
        Ok(())
    }
}

impl FromStr for RenameMap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut m = RenameMap::default();
        for (i, line) in s.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            match k.strip_prefix("fn:") {
                Some(func) => m.functions.push((func.to_string(), v.to_string())),
                None => m.params.push((k.to_string(), v.to_string())),
            }
        }
        Ok(m)
    }
}

fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    let mut k = 1;
    while taken.contains(&name) {
        name = format!("{base}_{k}");
        k += 1;
    }
    taken.insert(name.clone());
    name
}

/// Clones every function under a suffixed name; the result maps old to new names and
/// reserves `main` for the gadget's new entry.
fn clone_names(p: &Program, suffix: &str) -> Vec<(String, String)> {
    let mut taken: BTreeSet<String> = [MAIN.to_string()].into();
    p.functions.iter().map(|f| (f.name.clone(), fresh_name(&format!("{}{suffix}", f.name), &mut taken))).collect()
}

fn renamed_functions(p: &Program, names: &[(String, String)], mut rewrite: impl FnMut(&mut Expr)) -> Vec<Function> {
    let lookup = |n: &str| names.iter().find(|(a, _)| a == n).map(|(_, b)| b.clone()).expect("known function");
    let mut tmp = p.clone();
    tmp.rewrite_exprs(&mut |e| {
        if let Expr::Call(name, _) = e {
            *name = lookup(name);
        }
        rewrite(e);
    });
    tmp.functions
        .into_iter()
        .map(|mut f| {
            f.name = lookup(&f.name);
            f
        })
        .collect()
}

impl SynthesisInstance {
    pub fn new(program: Program, suite: TestSuite, domains: Domains) -> Result<Self, ReductionError> {
        let si = SynthesisInstance { program, suite, domains };
        si.validate()?;
        Ok(si)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        minilang::validate(&self.program)?;
        let holes = self.program.holes();
        if holes.is_empty() {
            return Err(ReductionError::NoHoles);
        }
        if self.suite.is_empty() {
            return Err(ReductionError::EmptySuite);
        }
        if let Some(h) = holes.iter().find(|h| self.domains.get(h.as_str()).is_none()) {
            return Err(ReductionError::MissingDomain(h.to_string()));
        }
        let expected = self.program.entry().map_or(0, |f| f.params.len());
        if let Some(t) = self.suite.cases.iter().find(|t| t.inputs.len() != expected) {
            return Err(ReductionError::Arity { expected, got: t.inputs.len() });
        }
        if self.program.reach_count() > 0 {
            return Err(ReductionError::ReachInTemplate);
        }
        if let Some(g) = self.program.assigned_vars().into_iter().find(|v| self.program.is_global(v)) {
            return Err(ReductionError::GlobalWrite(g.to_string()));
        }
        Ok(())
    }

    pub fn holes(&self) -> Vec<HoleId> {
        self.program.holes()
    }
}

impl ReachInstance {
    pub fn new(program: Program, input_vars: Vec<String>, domains: Domains) -> Result<Self, ReductionError> {
        let ri = ReachInstance { program, input_vars, domains };
        ri.validate()?;
        Ok(ri)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        minilang::validate(&self.program)?;
        let reaches = self.program.reach_count();
        if reaches != 1 {
            return Err(ReductionError::ReachCount(reaches));
        }
        let assigned = self.program.assigned_vars();
        for x in &self.input_vars {
            if !self.program.is_global(x) {
                return Err(ReductionError::UndeclaredInput(x.clone()));
            }
            if assigned.contains(x.as_str()) {
                return Err(ReductionError::AssignedInput(x.clone()));
            }
            if self.domains.get(x).is_none() {
                return Err(ReductionError::MissingDomain(x.clone()));
            }
        }
        if self.program.entry().is_some_and(|f| !f.params.is_empty()) {
            return Err(ReductionError::EntryParams);
        }
        Ok(())
    }

    /// Input globals with every input defaulted to its domain's lower bound.
    pub fn lowest_point(&self) -> Valuation {
        self.input_vars.iter().map(|x| (x.clone(), self.domains.get(x).map_or(0, Domain::lo))).collect()
    }
}

/// Synthesis to reachability.
pub fn gadget_s2r(si: &SynthesisInstance) -> Result<(ReachInstance, RenameMap), ReductionError> {
    si.validate()?;
    let p = &si.program;
    let mut taken = p.variable_names();
    let params: Vec<(String, String)> =
        p.holes().iter().map(|h| (h.to_string(), fresh_name(h.as_str(), &mut taken))).collect();
    let functions = clone_names(p, S2R_SUFFIX);

    let global_of = |h: &HoleId| params.iter().find(|(a, _)| a == h.as_str()).map(|(_, b)| b.clone()).unwrap();
    let mut clones = renamed_functions(p, &functions, |e| {
        if let Expr::Hole(h) = e {
            *e = Expr::Var(global_of(h));
        }
    });

    let entry = p.entry().expect("validated").name.clone();
    let entry_clone = functions.iter().find(|(a, _)| *a == entry).map(|(_, b)| b.clone()).unwrap();
    let guard = si
        .suite
        .cases
        .iter()
        .map(|t| {
            let args = t.inputs.iter().map(|&i| Expr::Int(i)).collect();
            Expr::bin(BinOp::Eq, Expr::call(entry_clone.clone(), args), Expr::Int(t.expected))
        })
        .reduce(|acc, e| Expr::bin(BinOp::And, acc, e))
        .expect("non-empty suite");
    clones.push(Function {
        name: MAIN.to_string(),
        params: vec![],
        body: vec![Stmt::new(StmtKind::If(guard, vec![Stmt::new(StmtKind::Reach)], vec![])), Stmt::ret(Expr::Int(0))],
    });

    let mut globals = p.globals.clone();
    globals.extend(params.iter().map(|(_, g)| g.clone()));
    let mut program = Program { globals, functions: clones };
    program.renumber();

    let input_vars: Vec<String> = params.iter().map(|(_, g)| g.clone()).collect();
    let domains = Domains(
        params
            .iter()
            .map(|(h, g)| (g.clone(), si.domains.get(h).cloned().expect("validated")))
            .collect(),
    );
    let ri = ReachInstance::new(program, input_vars, domains)?;
    Ok((ri, RenameMap { params, functions }))
}

/// Reachability to synthesis.
pub fn gadget_r2s(ri: &ReachInstance) -> Result<(SynthesisInstance, RenameMap), ReductionError> {
    ri.validate()?;
    let p = &ri.program;
    let uses_exceptions = p.statements().iter().any(|s| matches!(s.kind, StmtKind::Raise | StmtKind::TryCatch(..)));
    if uses_exceptions {
        return Err(ReductionError::UsesExceptions);
    }
    let mut taken = BTreeSet::new();
    let params: Vec<(String, String)> =
        ri.input_vars.iter().map(|x| (x.clone(), fresh_name(&format!("c_{x}"), &mut taken))).collect();
    let functions = clone_names(p, R2S_SUFFIX);

    let hole_of = |x: &str| params.iter().find(|(a, _)| a == x).map(|(_, b)| HoleId::new(b.clone()));
    let mut clones = renamed_functions(p, &functions, |e| {
        if let Expr::Var(x) = e {
            if let Some(h) = hole_of(x) {
                *e = Expr::Hole(h);
            }
        }
    });
    for f in &mut clones {
        for s in &mut f.body {
            s.walk_mut(&mut |s| {
                if matches!(s.kind, StmtKind::Reach) {
                    s.kind = StmtKind::Raise;
                }
            });
        }
    }

    let entry = p.entry().expect("validated").name.clone();
    let entry_clone = functions.iter().find(|(a, _)| *a == entry).map(|(_, b)| b.clone()).unwrap();
    clones.push(Function {
        name: MAIN.to_string(),
        params: vec![],
        body: vec![
            Stmt::new(StmtKind::TryCatch(
                vec![Stmt::new(StmtKind::Expr(Expr::call(entry_clone, vec![])))],
                vec![Stmt::ret(Expr::Int(1))],
            )),
            Stmt::ret(Expr::Int(0)),
        ],
    });

    let globals = p.globals.iter().filter(|g| !ri.input_vars.contains(g)).cloned().collect();
    let mut program = Program { globals, functions: clones };
    program.renumber();

    let domains = Domains(
        params
            .iter()
            .map(|(x, h)| (h.clone(), ri.domains.get(x).cloned().expect("validated")))
            .collect(),
    );
    let suite = TestSuite::new(vec![TestCase::new(vec![], 1)]);
    let si = SynthesisInstance::new(program, suite, domains)?;
    Ok((si, RenameMap { params, functions }))
}

/// Whether `v` (over hole ids) makes the template program pass every test.
/// `None` when a run exhausted its fuel.
pub fn check_synthesis_witness(si: &SynthesisInstance, v: &Valuation, fuel: u64) -> Option<bool> {
    suite_passes_with(&si.program, v, &si.suite, fuel)
}

/// Whether starting with the input globals set to `v` executes the `reach` label.
/// `None` when the run exhausted its fuel.
pub fn check_reach_witness(ri: &ReachInstance, v: &Valuation, fuel: u64) -> Option<bool> {
    let init: Valuation = ri.input_vars.iter().map(|x| (x.clone(), v.get(x).copied().unwrap_or(0))).collect();
    match Interpreter::new(&ri.program).fuel(fuel).run(&init, &[]).kind {
        Outcome::ReachedLabel => Some(true),
        Outcome::FuelExhausted => None,
        _ => Some(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bias_suite, bias_template, linear_pair};
    use crate::interp::DEFAULT_FUEL;
    use crate::minilang::{parse, print};
    use crate::templates::{COEFF_SET, CONST_RANGE};

    fn val(pairs: &[(&str, i64)]) -> Valuation {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub(crate) fn bias_instance() -> SynthesisInstance {
        let p = bias_template();
        let mut doms = vec![("c0".to_string(), Domain::range(CONST_RANGE.0, CONST_RANGE.1).unwrap())];
        for k in 1..5 {
            doms.push((format!("c{k}"), Domain::set(COEFF_SET).unwrap()));
        }
        SynthesisInstance::new(p, bias_suite(), Domains(doms)).unwrap()
    }

    fn linear_pair_instance() -> ReachInstance {
        let d = Domains::parse("x: -100000..100000\ny: -100000..100000").unwrap();
        ReachInstance::new(linear_pair(), vec!["x".into(), "y".into()], d).unwrap()
    }

    #[test]
    fn s2r_shape() {
        let (ri, map) = gadget_s2r(&bias_instance()).unwrap();
        assert_eq!(ri.program.globals, vec!["c0", "c1", "c2", "c3", "c4"]);
        assert_eq!(ri.input_vars, ri.program.globals);
        assert_eq!(map.function("is_upward"), Some("is_upward__P"));
        let text = print(&ri.program);
        assert!(text.contains("bias = c0 + c1 * bias + c2 * in + c3 * up + c4 * down;"), "{text}");
        let guard = "if (is_upward__P(1, 0, 100) == 0 && is_upward__P(1, 11, 110) == 1 && \
                     is_upward__P(0, 100, 50) == 1 && is_upward__P(1, -20, 60) == 1 && \
                     is_upward__P(0, 0, 10) == 0 && is_upward__P(0, 0, -10) == 1) { reach; }";
        assert!(text.contains(guard), "{text}");
        assert_eq!(ri.program.entry_name(), Some("main"));
        assert_eq!(ri.domains.get("c0"), Some(&Domain::Range { lo: -100000, hi: 100000 }));
    }

    #[test]
    fn bias_witnesses() {
        let si = bias_instance();
        let known = val(&[("c0", 100), ("c1", 0), ("c2", 0), ("c3", 1), ("c4", 0)]);
        let alt = val(&[("c0", 100), ("c1", 1), ("c2", 0), ("c3", 1), ("c4", 0)]);
        let zero = val(&[("c0", 0), ("c1", 0), ("c2", 0), ("c3", 0), ("c4", 0)]);
        assert_eq!(check_synthesis_witness(&si, &known, DEFAULT_FUEL), Some(true));
        assert_eq!(check_synthesis_witness(&si, &alt, DEFAULT_FUEL), Some(true));
        assert_eq!(check_synthesis_witness(&si, &zero, DEFAULT_FUEL), Some(false));
        let (ri, map) = gadget_s2r(&si).unwrap();
        assert_eq!(check_reach_witness(&ri, &map.forward(&known), DEFAULT_FUEL), Some(true));
        assert_eq!(check_reach_witness(&ri, &map.forward(&zero), DEFAULT_FUEL), Some(false));
    }

    #[test]
    fn single_test_zero_arity() {
        let p = parse("def f() { return ??h; }").unwrap();
        let si = SynthesisInstance::new(p, TestSuite::new(vec![TestCase::new(vec![], 0)]), Domains::parse("h: 0..3").unwrap())
            .unwrap();
        let (ri, _) = gadget_s2r(&si).unwrap();
        assert!(print(&ri.program).contains("def main() {\n  if (f__P() == 0) { reach; }\n  return 0;\n}"));
        // holes + guard + reach + return
        assert_eq!(ri.program.statement_count(), si.program.statement_count() + 3);
    }

    #[test]
    fn r2s_shape() {
        let (si, map) = gadget_r2s(&linear_pair_instance()).unwrap();
        assert!(si.program.globals.is_empty());
        assert_eq!(si.holes(), vec![HoleId::new("c_x"), HoleId::new("c_y")]);
        assert_eq!(si.suite.cases, vec![TestCase::new(vec![], 1)]);
        assert_eq!(map.param("x"), Some("c_x"));
        let expected = "def P__Q() {\n  if (2 * ??c_x == ??c_y) {\n    if (??c_x > ??c_y + 10) { raise; }\n  }\n  return 0;\n}\n\n\
                        def main() {\n  try { P__Q(); } catch { return 1; }\n  return 0;\n}\n";
        assert_eq!(print(&si.program), expected);
        let known = val(&[("c_x", -20), ("c_y", -40)]);
        assert_eq!(check_synthesis_witness(&si, &known, DEFAULT_FUEL), Some(true));
        assert_eq!(check_synthesis_witness(&si, &val(&[("c_x", 0), ("c_y", 0)]), DEFAULT_FUEL), Some(false));
    }

    #[test]
    fn linear_pair_reach_witness() {
        let ri = linear_pair_instance();
        assert_eq!(check_reach_witness(&ri, &val(&[("x", -20), ("y", -40)]), DEFAULT_FUEL), Some(true));
        assert_eq!(check_reach_witness(&ri, &val(&[("x", 0), ("y", 0)]), DEFAULT_FUEL), Some(false));
    }

    #[test]
    fn unconditional_reach_any_valuation() {
        let p = parse("int x; def main() { reach; return x; }").unwrap();
        let ri = ReachInstance::new(p, vec!["x".into()], Domains::parse("x: -3..3").unwrap()).unwrap();
        let (si, _) = gadget_r2s(&ri).unwrap();
        for x in -3..=3 {
            assert_eq!(check_synthesis_witness(&si, &val(&[("c_x", x)]), DEFAULT_FUEL), Some(true));
        }
    }

    #[test]
    fn name_collisions_are_renamed() {
        let p = parse("int c0; def main__P() { return 1; } def main(a) { return main__P() + ??c0 * a; }").unwrap();
        let si = SynthesisInstance::new(p, TestSuite::new(vec![TestCase::new(vec![2], 5)]), Domains::parse("c0: 0..5").unwrap())
            .unwrap();
        let (ri, map) = gadget_s2r(&si).unwrap();
        assert_eq!(map.param("c0"), Some("c0_1"));
        assert_eq!(map.function("main"), Some("main__P"));
        assert_eq!(map.function("main__P"), Some("main__P__P"));
        assert_eq!(check_reach_witness(&ri, &val(&[("c0_1", 2)]), DEFAULT_FUEL), Some(true));
        let text = map.to_string();
        assert_eq!(text.parse::<RenameMap>().unwrap(), map);
    }

    #[test]
    fn invalid_instances_rejected() {
        let d = Domains::parse("x: 0..1").unwrap();
        let assigned = parse("int x; def main() { x = 1; reach; return 0; }").unwrap();
        assert_eq!(
            ReachInstance::new(assigned, vec!["x".into()], d.clone()),
            Err(ReductionError::AssignedInput("x".into()))
        );
        let no_reach = parse("int x; def main() { return 0; }").unwrap();
        assert_eq!(ReachInstance::new(no_reach, vec!["x".into()], d.clone()), Err(ReductionError::ReachCount(0)));
        let raises = parse("int x; def main() { try { raise; } catch { reach; } return 0; }").unwrap();
        let ri = ReachInstance::new(raises, vec!["x".into()], d.clone()).unwrap();
        assert_eq!(gadget_r2s(&ri).unwrap_err(), ReductionError::UsesExceptions);

        let suite = TestSuite::new(vec![TestCase::new(vec![], 1)]);
        let hole_free = parse("def main() { return 1; }").unwrap();
        assert_eq!(SynthesisInstance::new(hole_free, suite.clone(), d.clone()), Err(ReductionError::NoHoles));
        let writes = parse("int g; def main() { g = ??x; return g; }").unwrap();
        assert_eq!(SynthesisInstance::new(writes, suite.clone(), d.clone()), Err(ReductionError::GlobalWrite("g".into())));
        let undom = parse("def main() { return ??y; }").unwrap();
        assert_eq!(SynthesisInstance::new(undom, suite, d), Err(ReductionError::MissingDomain("y".into())));
    }
}
