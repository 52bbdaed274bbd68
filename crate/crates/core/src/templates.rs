//! Repair template catalog.
//!
//! A template rewrites the expression owned by one statement (assignment right-hand
//! side, branch or loop guard, returned or evaluated expression) into a parameterised
//! form with fresh holes. Nested blocks are never touched, so statement ids stay stable
//! and several sites can be templated in the same program.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::domain::Domain;
use crate::minilang::{BinOp, Expr, HoleId, OpClass, Program, Stmt, StmtId, StmtKind, UnOp, Valuation};

/// Default bounds for constant holes.
pub const CONST_RANGE: (i64, i64) = (-100_000, 100_000);
/// Default values for variable coefficients in the linear template.
pub const COEFF_SET: [i64; 3] = [-1, 0, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TemplateKind {
    ConstSwap,
    OpSwitch(OpClass),
    LinearCombo,
}

impl TemplateKind {
    /// Catalog order: smallest search spaces first.
    pub const CATALOG: [TemplateKind; 5] = [
        TemplateKind::ConstSwap,
        TemplateKind::OpSwitch(OpClass::Arith),
        TemplateKind::OpSwitch(OpClass::Compare),
        TemplateKind::OpSwitch(OpClass::Logical),
        TemplateKind::LinearCombo,
    ];
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateKind::ConstSwap => f.write_str("const"),
            TemplateKind::OpSwitch(c) => write!(f, "ops:{}", c.keyword()),
            TemplateKind::LinearCombo => f.write_str("linear"),
        }
    }
}

/// Template families as selected on the command line: `const`, `linear`, `ops`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub constants: bool,
    pub operators: bool,
    pub linear: bool,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet { constants: true, operators: true, linear: true }
    }
}

impl TemplateSet {
    pub fn allows(&self, k: TemplateKind) -> bool {
        match k {
            TemplateKind::ConstSwap => self.constants,
            TemplateKind::OpSwitch(_) => self.operators,
            TemplateKind::LinearCombo => self.linear,
        }
    }
}

impl FromStr for TemplateSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut set = TemplateSet { constants: false, operators: false, linear: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "const" => set.constants = true,
                "ops" => set.operators = true,
                "linear" => set.linear = true,
                "all" => set = TemplateSet::default(),
                other => return Err(format!("unknown template family `{other}` (expected const, linear, ops)")),
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("no statement {0}")]
    NoSuchSite(StmtId),
    #[error("template {1} does not apply to statement {0}")]
    NotApplicable(StmtId, TemplateKind),
    #[error("no value for hole `{0}`")]
    MissingValue(HoleId),
    #[error("value {1} for hole `{0}` is outside its domain")]
    OutOfDomain(HoleId, i64),
}

/// Session-scoped source of fresh hole names `c0`, `c1`, ...
#[derive(Debug, Default)]
pub struct HoleGen {
    next: AtomicUsize,
}

impl HoleGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&self) -> HoleId {
        HoleId(format!("c{}", self.next.fetch_add(1, Ordering::SeqCst)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateInstance {
    /// The original program with the site's expression parameterised.
    pub program: Program,
    /// Holes introduced at the site, in occurrence order, each with its domain.
    pub holes: Vec<(HoleId, Domain)>,
    pub site: StmtId,
    pub kind: TemplateKind,
    /// Variables the linear template ranges over (empty for other kinds).
    pub scope: Vec<String>,
}

fn contains_expr(e: &Expr, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
    let mut hit = false;
    e.walk(&mut |x| hit |= pred(x));
    hit
}

/// Template kinds matching the shape of statement `site`, in catalog order.
pub fn applicable(p: &Program, site: StmtId) -> Vec<TemplateKind> {
    let Some(s) = p.stmt(site) else { return Vec::new() };
    TemplateKind::CATALOG.into_iter().filter(|k| applies(s, *k)).collect()
}

fn applies(s: &Stmt, kind: TemplateKind) -> bool {
    match kind {
        TemplateKind::LinearCombo => matches!(s.kind, StmtKind::Assign(..)),
        TemplateKind::ConstSwap => {
            s.own_expr().is_some_and(|e| contains_expr(e, &mut |x| matches!(x, Expr::Int(_))))
        }
        TemplateKind::OpSwitch(class) => s
            .own_expr()
            .is_some_and(|e| contains_expr(e, &mut |x| matches!(x, Expr::Binary(op, ..) if op.class() == class))),
    }
}

/// Variables in scope at `site` for the linear template: the assignment target first,
/// then parameters, then locals definitely assigned before the site, then globals.
pub fn scope_at(p: &Program, site: StmtId) -> Option<Vec<String>> {
    let f = p.function_of(site)?;
    let stmt = p.stmt(site)?;
    let mut locals = Vec::new();
    definitely_assigned(&f.body, site, &mut Vec::new(), &mut locals);
    let mut out: Vec<String> = Vec::new();
    let mut push = |v: &String| {
        if !out.contains(v) {
            out.push(v.clone());
        }
    };
    // The assigned variable leads when it is readable before the site.
    if let StmtKind::Assign(t, _) = &stmt.kind {
        if locals.contains(t) || f.params.contains(t) || p.is_global(t) {
            push(t);
        }
    }
    f.params.iter().for_each(&mut push);
    locals.iter().filter(|v| !p.is_global(v)).for_each(&mut push);
    p.globals.iter().for_each(&mut push);
    Some(out)
}

/// Walks `block` tracking definitely-assigned variables; records the set at `site`.
/// Returns true once the site has been found.
fn definitely_assigned(block: &[Stmt], site: StmtId, assigned: &mut Vec<String>, found: &mut Vec<String>) -> bool {
    for s in block {
        if s.id == site {
            *found = assigned.clone();
            return true;
        }
        match &s.kind {
            StmtKind::Assign(t, _) => {
                if !assigned.contains(t) {
                    assigned.push(t.clone());
                }
            }
            StmtKind::If(_, a, b) | StmtKind::TryCatch(a, b) => {
                let mut left = assigned.clone();
                if definitely_assigned(a, site, &mut left, found) {
                    return true;
                }
                let mut right = assigned.clone();
                if definitely_assigned(b, site, &mut right, found) {
                    return true;
                }
                let right: BTreeSet<&String> = right.iter().collect();
                let both: Vec<String> =
                    left.iter().filter(|v| right.contains(v) && !assigned.contains(v)).cloned().collect();
                assigned.extend(both);
            }
            StmtKind::While(_, body) => {
                let mut inner = assigned.clone();
                if definitely_assigned(body, site, &mut inner, found) {
                    return true;
                }
            }
            StmtKind::Return(_) | StmtKind::Raise | StmtKind::Reach | StmtKind::Expr(_) => {}
        }
    }
    false
}

/// Pre-order rewrite: `f` sees a node before its (possibly replaced) children.
fn rewrite_pre(e: &mut Expr, f: &mut impl FnMut(&mut Expr)) {
    f(e);
    for c in e.children_mut() {
        rewrite_pre(c, f);
    }
}

/// Builds the template program for `kind` at `site`.
pub fn instantiate(
    p: &Program,
    site: StmtId,
    kind: TemplateKind,
    scope: &[String],
    gen: &HoleGen,
) -> Result<TemplateInstance, TemplateError> {
    let stmt = p.stmt(site).ok_or(TemplateError::NoSuchSite(site))?;
    if !applies(stmt, kind) {
        return Err(TemplateError::NotApplicable(site, kind));
    }
    let mut program = p.clone();
    let target = program.stmt_mut(site).expect("site exists");
    let expr = target.own_expr_mut().expect("applicable statements own an expression");
    let mut holes = Vec::new();
    match kind {
        TemplateKind::ConstSwap => rewrite_pre(expr, &mut |e| {
            if let Expr::Int(v) = *e {
                let h = gen.fresh();
                let dom = Domain::Range { lo: CONST_RANGE.0.min(v), hi: CONST_RANGE.1.max(v) };
                holes.push((h.clone(), dom));
                *e = Expr::Hole(h);
            }
        }),
        TemplateKind::OpSwitch(class) => rewrite_pre(expr, &mut |e| {
            if let Expr::Binary(op, l, r) = e {
                if op.class() == class {
                    let h = gen.fresh();
                    holes.push((h.clone(), Domain::Set { values: (0..class.ops().len() as i64).collect() }));
                    *e = Expr::Switch {
                        class,
                        selector: Box::new(Expr::Hole(h)),
                        lhs: std::mem::replace(l, Box::new(Expr::Int(0))),
                        rhs: std::mem::replace(r, Box::new(Expr::Int(0))),
                    };
                }
            }
        }),
        TemplateKind::LinearCombo => {
            let c0 = gen.fresh();
            holes.push((c0.clone(), Domain::Range { lo: CONST_RANGE.0, hi: CONST_RANGE.1 }));
            let mut acc = Expr::Hole(c0);
            for v in scope {
                let h = gen.fresh();
                holes.push((h.clone(), Domain::Set { values: COEFF_SET.to_vec() }));
                acc = Expr::bin(BinOp::Add, acc, Expr::bin(BinOp::Mul, Expr::Hole(h), Expr::var(v.clone())));
            }
            *expr = acc;
        }
    }
    Ok(TemplateInstance {
        program,
        holes,
        site,
        kind,
        scope: if kind == TemplateKind::LinearCombo { scope.to_vec() } else { Vec::new() },
    })
}

/// [`instantiate`] with the scope computed from the program.
pub fn instantiate_at(p: &Program, site: StmtId, kind: TemplateKind, gen: &HoleGen) -> Result<TemplateInstance, TemplateError> {
    let scope = scope_at(p, site).ok_or(TemplateError::NoSuchSite(site))?;
    instantiate(p, site, kind, &scope, gen)
}

impl TemplateInstance {
    /// The parameterised expression placed at the site.
    pub fn site_expr(&self) -> &Expr {
        self.program.stmt(self.site).and_then(Stmt::own_expr).expect("site owns an expression")
    }

    /// The concrete expression for the site under `v`, simplified for display.
    pub fn realize_expr(&self, v: &Valuation) -> Result<Expr, TemplateError> {
        for (h, dom) in &self.holes {
            let val = *v.get(h.as_str()).ok_or_else(|| TemplateError::MissingValue(h.clone()))?;
            if !dom.contains(val) {
                return Err(TemplateError::OutOfDomain(h.clone(), val));
            }
        }
        let value = |h: &HoleId| v[h.as_str()];
        Ok(match self.kind {
            TemplateKind::LinearCombo => {
                let c0 = value(&self.holes[0].0);
                let terms: Vec<(i64, &String)> =
                    self.holes[1..].iter().map(|(h, _)| value(h)).zip(self.scope.iter()).collect();
                linear_expr(c0, &terms)
            }
            _ => {
                let ours = |h: &HoleId| self.holes.iter().any(|(id, _)| id == h);
                let mut e = self.site_expr().clone();
                // Only switches introduced by this template are decoded; switches already
                // present in the program stay as they are.
                rewrite_pre(&mut e, &mut |x| {
                    if let Expr::Switch { class, selector, lhs, rhs } = x {
                        if let Expr::Hole(h) = &**selector {
                            if matches!(self.kind, TemplateKind::OpSwitch(c) if c == *class) && ours(h) {
                                let op = class.ops()[value(h) as usize];
                                let l = std::mem::replace(lhs, Box::new(Expr::Int(0)));
                                let r = std::mem::replace(rhs, Box::new(Expr::Int(0)));
                                *x = Expr::Binary(op, l, r);
                            }
                        }
                    }
                });
                e.rewrite(&mut |x| match x {
                    Expr::Hole(h) if ours(h) => *x = Expr::Int(value(h)),
                    _ => {}
                });
                e
            }
        })
    }

    /// The original program with the site replaced by its concrete instantiation.
    pub fn realize(&self, v: &Valuation) -> Result<Program, TemplateError> {
        let e = self.realize_expr(v)?;
        let mut out = self.program.clone();
        *out.stmt_mut(self.site).and_then(Stmt::own_expr_mut).expect("site exists") = e;
        Ok(out)
    }
}

/// `c0 + Σ ci·vi` with zero terms dropped and unit coefficients folded.
pub fn linear_expr(c0: i64, terms: &[(i64, &String)]) -> Expr {
    let mut acc = if c0 != 0 { Some(Expr::Int(c0)) } else { None };
    for &(c, v) in terms {
        if c == 0 {
            continue;
        }
        let var = Expr::var(v.clone());
        acc = Some(match (acc.take(), c) {
            (None, 1) => var,
            (None, -1) => Expr::Unary(UnOp::Neg, Box::new(var)),
            (None, c) => Expr::bin(BinOp::Mul, Expr::Int(c), var),
            (Some(a), 1) => Expr::bin(BinOp::Add, a, var),
            (Some(a), -1) => Expr::bin(BinOp::Sub, a, var),
            (Some(a), c) => Expr::bin(BinOp::Add, a, Expr::bin(BinOp::Mul, Expr::Int(c), var)),
        });
    }
    acc.unwrap_or(Expr::Int(c0))
}

/// Copies each instance's site expression into `base`, giving one program templated at
/// every site. Instances must come from the same base program with distinct sites.
pub fn merge(base: &Program, parts: &[TemplateInstance]) -> Program {
    let mut out = base.clone();
    for ti in parts {
        *out.stmt_mut(ti.site).and_then(Stmt::own_expr_mut).expect("site exists") = ti.site_expr().clone();
    }
    out
}

/// Realizes every part of a merged candidate into `base`.
pub fn realize_all(base: &Program, parts: &[TemplateInstance], v: &Valuation) -> Result<Program, TemplateError> {
    let mut out = base.clone();
    for ti in parts {
        let e = ti.realize_expr(v)?;
        *out.stmt_mut(ti.site).and_then(Stmt::own_expr_mut).expect("site exists") = e;
    }
    Ok(out)
}
