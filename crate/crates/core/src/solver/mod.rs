//! Bounded test-input generation for reachability instances.
//!
//! [`explore`] enumerates execution paths symbolically (input globals as linear forms);
//! [`solve`] solves the path constraint of every path ending at `reach`, keeps the
//! lexicographically smallest solution in input order, and re-runs it concretely
//! before reporting it.

mod constraint;
mod explore;
mod linear;

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::interp::DEFAULT_FUEL;
use crate::minilang::Valuation;
use crate::reductions::{check_reach_witness, ReachInstance};

pub use constraint::{find_point, propagated_bounds, solve_constraint, Feasibility, DEFAULT_NODE_CAP};
pub use explore::{explore, ExploreSummary, ExploredPath, Frontier, ENUMERATION_CAP};
pub use linear::{Atom, LinForm, PathConstraint, Rel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Iterations allowed per loop execution before the path is cut.
    pub loop_bound: u32,
    pub max_paths: u64,
    pub time_cap: Duration,
    /// Step budget per path, counted like the concrete interpreter's fuel.
    pub fuel: u64,
    /// Branch-and-bound nodes per constraint query.
    pub node_cap: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            loop_bound: 64,
            max_paths: 100_000,
            time_cap: Duration::from_secs(10),
            fuel: DEFAULT_FUEL,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Witness(Valuation),
    /// `budget_hit == false` with finite domains means the label is unreachable.
    NoneWithinBounds { paths_explored: u64, budget_hit: bool },
    SolverLimit(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub result: SolveResult,
    pub paths_explored: u64,
    pub budget_hit: bool,
    pub elapsed: Duration,
}

impl SolveReport {
    pub fn witness(&self) -> Option<&Valuation> {
        match &self.result {
            SolveResult::Witness(v) => Some(v),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.result {
            SolveResult::Witness(_) => "witness",
            SolveResult::NoneWithinBounds { .. } => "none-within-bounds",
            SolveResult::SolverLimit(_) => "solver-limit",
        }
    }

    /// `{status, witness, pathsExplored, timeMs, budgetHit, reason?}`.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "status": self.status(),
            "witness": self.witness(),
            "pathsExplored": self.paths_explored,
            "timeMs": self.elapsed.as_millis() as u64,
            "budgetHit": self.budget_hit,
        });
        if let SolveResult::SolverLimit(reason) = &self.result {
            v["reason"] = json!(reason);
        }
        v
    }
}

/// Searches the input domains of `ri` for a valuation that executes `reach`.
pub fn solve(ri: &ReachInstance, cfg: &SolverConfig) -> SolveReport {
    let start = Instant::now();
    let doms: Vec<_> = ri.input_vars.iter().map(|x| ri.domains.get(x).cloned().expect("validated instance")).collect();
    let mut best: Option<Vec<i64>> = None;
    let mut rejected = 0usize;
    let mut partial = false;
    let summary = explore(ri, cfg, |path| {
        if path.frontier != Frontier::Reached {
            return ControlFlow::Continue(());
        }
        let point = match solve_constraint(&path.constraint.atoms, &doms, cfg.node_cap) {
            Feasibility::Sat(x) => x,
            // the path's own model is a solution, just maybe not the smallest
            _ => {
                partial = true;
                path.model.clone()
            }
        };
        if best.as_ref().is_some_and(|b| *b <= point) {
            return ControlFlow::Continue(());
        }
        let v = to_valuation(ri, &point);
        match check_reach_witness(ri, &v, cfg.fuel) {
            Some(true) => best = Some(point),
            other => {
                log::error!("symbolic witness {v:?} failed concrete re-execution ({other:?})");
                rejected += 1;
            }
        }
        ControlFlow::Continue(())
    });
    let budget_hit = summary.budget_hit || partial;
    let result = match (best, summary.limit) {
        (Some(x), _) => SolveResult::Witness(to_valuation(ri, &x)),
        (None, Some(reason)) => SolveResult::SolverLimit(reason),
        (None, None) if rejected > 0 => {
            SolveResult::SolverLimit(format!("{rejected} symbolic witness(es) failed concrete re-execution"))
        }
        (None, None) => SolveResult::NoneWithinBounds { paths_explored: summary.paths, budget_hit },
    };
    SolveReport { result, paths_explored: summary.paths, budget_hit, elapsed: start.elapsed() }
}

fn to_valuation(ri: &ReachInstance, x: &[i64]) -> Valuation {
    ri.input_vars.iter().cloned().zip(x.iter().copied()).collect()
}
