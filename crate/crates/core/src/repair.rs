//! The repair loop: rank statements, template them, reduce each candidate to
//! reachability, solve, and keep the first patch that passes the whole suite.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::domain::Domains;
use crate::faultloc::{tarantula, FaultLocError, Ranked, Spectrum};
use crate::interp::{run_suite, TestSuite, DEFAULT_FUEL};
use crate::minilang::{stmt_head, Expr, Program, Stmt, StmtId, Valuation};
use crate::reductions::{gadget_s2r, SynthesisInstance};
use crate::solver::{solve, SolveResult, SolverConfig};
use crate::templates::{applicable, instantiate_at, merge, realize_all, HoleGen, TemplateInstance, TemplateKind, TemplateSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairConfig {
    pub top_n: usize,
    pub templates: TemplateSet,
    /// Largest number of statements edited together.
    pub edits: usize,
    pub solver: SolverConfig,
    pub stop_at_first: bool,
    /// Step budget for concrete test runs.
    pub fuel: u64,
    /// Wall-clock budget for the whole search; candidates are no longer started once it is spent.
    pub time_budget: Option<Duration>,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            top_n: 80,
            templates: TemplateSet::default(),
            edits: 1,
            solver: SolverConfig::default(),
            stop_at_first: true,
            fuel: DEFAULT_FUEL,
            time_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("nothing to repair: every test passes")]
    NothingToRepair,
    #[error("program still contains holes")]
    HasHoles,
    #[error("test arity {got} does not match entry arity {expected}")]
    Arity { expected: usize, got: usize },
    #[error("empty test suite")]
    EmptySuite,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// One rewritten statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub site: StmtId,
    pub kind: TemplateKind,
    pub original: String,
    pub replacement: String,
    /// New expression owned by the site.
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub edits: Vec<Edit>,
    /// Hole values the edits were realized from.
    pub witness: Valuation,
}

impl Patch {
    pub fn sites(&self) -> Vec<StmtId> {
        self.edits.iter().map(|e| e.site).collect()
    }

    /// `p` with every edit applied; `None` when a site is missing or owns no expression.
    pub fn apply(&self, p: &Program) -> Option<Program> {
        let mut out = p.clone();
        for e in &self.edits {
            *out.stmt_mut(e.site).and_then(Stmt::own_expr_mut)? = e.expr.clone();
        }
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        let join = |f: fn(&Edit) -> &String| self.edits.iter().map(f).cloned().collect::<Vec<_>>().join("\n");
        json!({
            "site": self.edits[0].site.0,
            "sites": self.edits.iter().map(|e| e.site.0).collect::<Vec<_>>(),
            "kinds": self.edits.iter().map(|e| e.kind.to_string()).collect::<Vec<_>>(),
            "original": join(|e| &e.original),
            "replacement": join(|e| &e.replacement),
            "witness": self.witness,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub passed: bool,
    /// Some test ran out of fuel, so a failure may be a budget artefact.
    pub fuel_exhausted: bool,
}

/// Whether `patch` applied to `p` passes every test of `suite`.
pub fn validate(p: &Program, patch: &Patch, suite: &TestSuite, fuel: u64) -> Validation {
    let Some(patched) = patch.apply(p) else { return Validation { passed: false, fuel_exhausted: false } };
    let results = run_suite(&patched, suite, fuel);
    Validation {
        passed: results.iter().all(|r| r.passed),
        fuel_exhausted: results.iter().any(|r| r.fuel_exhausted),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateOutcome {
    Repaired,
    NoWitness,
    /// Exploration ran into a budget; absence of a witness proves nothing.
    BudgetHit,
    SolverLimit(String),
    /// A witness was found but the realized patch failed validation.
    Rejected,
    /// The candidate could not be turned into a synthesis instance.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateLog {
    pub sites: Vec<StmtId>,
    pub kinds: Vec<TemplateKind>,
    pub holes: usize,
    pub outcome: CandidateOutcome,
    pub paths: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairStatus {
    Repaired(Patch),
    NoRepairFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairReport {
    pub status: RepairStatus,
    /// Number of reachability instances built.
    pub r_progs: usize,
    pub elapsed: Duration,
    pub ranking: Vec<Ranked>,
    pub candidates: Vec<CandidateLog>,
    /// Further validated patches found when not stopping at the first.
    pub alternatives: Vec<Patch>,
    /// The search stopped early because the time budget ran out.
    pub out_of_time: bool,
}

impl RepairReport {
    pub fn patch(&self) -> Option<&Patch> {
        match &self.status {
            RepairStatus::Repaired(p) => Some(p),
            RepairStatus::NoRepairFound => None,
        }
    }

    /// `{status, patch, rProgs, timeMs, candidates}`; timings are zeroed when
    /// `timings` is false so the output is byte-stable.
    pub fn to_json(&self, timings: bool) -> Value {
        let ms = |d: Duration| if timings { d.as_millis() as u64 } else { 0 };
        let candidates: Vec<Value> = self
            .candidates
            .iter()
            .map(|c| {
                json!({
                    "sites": c.sites.iter().map(|s| s.0).collect::<Vec<_>>(),
                    "kinds": c.kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
                    "holes": c.holes,
                    "outcome": c.outcome,
                    "paths": c.paths,
                    "timeMs": ms(c.elapsed),
                })
            })
            .collect();
        json!({
            "status": match self.status { RepairStatus::Repaired(_) => "repaired", RepairStatus::NoRepairFound => "no-repair-found" },
            "patch": self.patch().map(Patch::to_json),
            "rProgs": self.r_progs,
            "timeMs": ms(self.elapsed),
            "outOfTime": self.out_of_time,
            "candidates": candidates,
        })
    }
}

/// A candidate: one template instance per edited site, sharing one hole namespace.
fn build_candidate(p: &Program, sites: &[StmtId], kinds: &[TemplateKind]) -> Result<Vec<TemplateInstance>, String> {
    let gen = HoleGen::new();
    sites
        .iter()
        .zip(kinds)
        .map(|(s, k)| instantiate_at(p, *s, *k, &gen).map_err(|e| e.to_string()))
        .collect()
}

/// Every `k`-subset of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Cartesian product of per-site kind lists, leftmost site varying slowest.
fn kind_products(lists: &[Vec<TemplateKind>]) -> Vec<Vec<TemplateKind>> {
    lists.iter().fold(vec![Vec::new()], |acc, kinds| {
        acc.iter()
            .flat_map(|prefix| {
                kinds.iter().map(move |k| {
                    let mut v = prefix.clone();
                    v.push(*k);
                    v
                })
            })
            .collect()
    })
}

/// Searches for a patch of `p` passing every test of `suite`.
pub fn repair(p: &Program, suite: &TestSuite, cfg: &RepairConfig) -> Result<RepairReport, RepairError> {
    let start = Instant::now();
    if cfg.top_n == 0 || cfg.edits == 0 {
        return Err(RepairError::Config("top-n and edits must be at least 1".into()));
    }
    if !p.holes().is_empty() {
        return Err(RepairError::HasHoles);
    }
    if suite.is_empty() {
        return Err(RepairError::EmptySuite);
    }
    let expected = p.entry().map_or(0, |f| f.params.len());
    if let Some(t) = suite.cases.iter().find(|t| t.inputs.len() != expected) {
        return Err(RepairError::Arity { expected, got: t.inputs.len() });
    }
    let results = run_suite(p, suite, cfg.fuel);
    let spectrum = match Spectrum::build(&results, p.statement_count()) {
        Ok(s) => s,
        Err(FaultLocError::NoFailingTest) => return Err(RepairError::NothingToRepair),
        Err(e) => unreachable!("spectrum of a non-empty suite: {e}"),
    };
    let ranking = tarantula(&spectrum);
    // statements no failing test executes cannot be responsible for a failure
    let sites: Vec<StmtId> = ranking.iter().take(cfg.top_n).filter(|r| r.score > 0.0).map(|r| r.stmt).collect();
    let kinds: Vec<Vec<TemplateKind>> = sites
        .iter()
        .map(|s| applicable(p, *s).into_iter().filter(|k| cfg.templates.allows(*k)).collect())
        .collect();

    let mut report = RepairReport {
        status: RepairStatus::NoRepairFound,
        r_progs: 0,
        elapsed: Duration::ZERO,
        ranking,
        candidates: Vec::new(),
        alternatives: Vec::new(),
        out_of_time: false,
    };
    'search: for size in 1..=cfg.edits {
        for combo in combinations(sites.len(), size) {
            let chosen: Vec<StmtId> = combo.iter().map(|&i| sites[i]).collect();
            let lists: Vec<Vec<TemplateKind>> = combo.iter().map(|&i| kinds[i].clone()).collect();
            for ks in kind_products(&lists) {
                if cfg.time_budget.is_some_and(|b| start.elapsed() > b) {
                    report.out_of_time = true;
                    break 'search;
                }
                let log = run_candidate(p, suite, cfg, &chosen, &ks, &mut report);
                let repaired = log.outcome == CandidateOutcome::Repaired;
                report.candidates.push(log);
                if repaired && cfg.stop_at_first {
                    break 'search;
                }
            }
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

fn run_candidate(
    p: &Program,
    suite: &TestSuite,
    cfg: &RepairConfig,
    sites: &[StmtId],
    kinds: &[TemplateKind],
    report: &mut RepairReport,
) -> CandidateLog {
    let start = Instant::now();
    let mut log = CandidateLog {
        sites: sites.to_vec(),
        kinds: kinds.to_vec(),
        holes: 0,
        outcome: CandidateOutcome::NoWitness,
        paths: 0,
        elapsed: Duration::ZERO,
    };
    let finish = |mut log: CandidateLog, outcome| {
        log.outcome = outcome;
        log.elapsed = start.elapsed();
        log
    };
    let parts = match build_candidate(p, sites, kinds) {
        Ok(parts) => parts,
        Err(e) => return finish(log, CandidateOutcome::Skipped(e)),
    };
    let domains = Domains(parts.iter().flat_map(|t| t.holes.iter().map(|(h, d)| (h.to_string(), d.clone()))).collect());
    log.holes = domains.0.len();
    let si = match SynthesisInstance::new(merge(p, &parts), suite.clone(), domains) {
        Ok(si) => si,
        Err(e) => return finish(log, CandidateOutcome::Skipped(e.to_string())),
    };
    let (ri, map) = match gadget_s2r(&si) {
        Ok(x) => x,
        Err(e) => return finish(log, CandidateOutcome::Skipped(e.to_string())),
    };
    report.r_progs += 1;
    let solved = solve(&ri, &cfg.solver);
    log.paths = solved.paths_explored;
    let witness = match solved.result {
        SolveResult::Witness(w) => map.backward(&w),
        SolveResult::NoneWithinBounds { budget_hit: true, .. } => return finish(log, CandidateOutcome::BudgetHit),
        SolveResult::NoneWithinBounds { .. } => return finish(log, CandidateOutcome::NoWitness),
        SolveResult::SolverLimit(r) => {
            log::info!("candidate {sites:?} {kinds:?} skipped: {r}");
            return finish(log, CandidateOutcome::SolverLimit(r));
        }
    };
    let patch = match realize_patch(p, &parts, &witness) {
        Some(patch) => patch,
        None => return finish(log, CandidateOutcome::Rejected),
    };
    let v = validate(p, &patch, suite, cfg.fuel);
    if !v.passed {
        log::error!("witness {witness:?} for {sites:?} {kinds:?} failed validation (fuel exhausted: {})", v.fuel_exhausted);
        return finish(log, CandidateOutcome::Rejected);
    }
    match report.status {
        RepairStatus::NoRepairFound => report.status = RepairStatus::Repaired(patch),
        RepairStatus::Repaired(_) => report.alternatives.push(patch),
    }
    finish(log, CandidateOutcome::Repaired)
}

fn realize_patch(p: &Program, parts: &[TemplateInstance], witness: &Valuation) -> Option<Patch> {
    let realized = realize_all(p, parts, witness).ok()?;
    let edits = parts
        .iter()
        .map(|t| {
            let after = realized.stmt(t.site).expect("site exists");
            Edit {
                site: t.site,
                kind: t.kind,
                original: stmt_head(p.stmt(t.site).expect("site exists")),
                replacement: stmt_head(after),
                expr: after.own_expr().expect("site owns an expression").clone(),
            }
        })
        .collect();
    let used: BTreeMap<String, i64> = parts
        .iter()
        .flat_map(|t| t.holes.iter().map(|(h, _)| (h.to_string(), witness[h.as_str()])))
        .collect();
    Some(Patch { edits, witness: used })
}

/// Renders a patch as `stmt N: old  =>  new` lines.
pub fn describe(patch: &Patch) -> String {
    patch
        .edits
        .iter()
        .map(|e| format!("stmt {}: {}  =>  {}  [{}]", e.site.0, e.original, e.replacement, e.kind))
        .collect::<Vec<_>>()
        .join("\n")
}
