//! Spectrum-based fault localization (Tarantula).

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::interp::TestResult;
use crate::minilang::StmtId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultLocError {
    #[error("no failing test: nothing to repair")]
    NoFailingTest,
    #[error("no test results")]
    NoTests,
    #[error("coverage mentions statement {0} but the program has {1} statements")]
    UnknownStatement(StmtId, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub passed: usize,
    pub failed: usize,
}

/// Per-statement pass/fail execution counts, indexed by statement id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Spectrum {
    pub counts: Vec<Counts>,
    pub total_passed: usize,
    pub total_failed: usize,
}

impl Spectrum {
    /// Tallies coverage of `results` over a program with `statements` statements.
    pub fn build(results: &[TestResult], statements: usize) -> Result<Spectrum, FaultLocError> {
        let runs: Vec<(bool, &BTreeSet<StmtId>)> = results.iter().map(|r| (r.passed, &r.coverage)).collect();
        Self::from_coverage(&runs, statements)
    }

    pub fn from_coverage(runs: &[(bool, &BTreeSet<StmtId>)], statements: usize) -> Result<Spectrum, FaultLocError> {
        if runs.is_empty() {
            return Err(FaultLocError::NoTests);
        }
        let mut sp = Spectrum { counts: vec![Counts::default(); statements], total_passed: 0, total_failed: 0 };
        for (passed, cov) in runs {
            if *passed {
                sp.total_passed += 1;
            } else {
                sp.total_failed += 1;
            }
            for id in cov.iter() {
                let c = sp
                    .counts
                    .get_mut(id.0)
                    .ok_or(FaultLocError::UnknownStatement(*id, statements))?;
                if *passed {
                    c.passed += 1;
                } else {
                    c.failed += 1;
                }
            }
        }
        if sp.total_failed == 0 {
            return Err(FaultLocError::NoFailingTest);
        }
        Ok(sp)
    }

    pub fn get(&self, id: StmtId) -> Counts {
        self.counts.get(id.0).copied().unwrap_or_default()
    }
}

/// Suspiciousness of one statement; 0 for statements no failing test executes.
pub fn tarantula_score(c: Counts, total_passed: usize, total_failed: usize) -> f64 {
    if c.failed == 0 || total_failed == 0 {
        return 0.0;
    }
    let fail_ratio = c.failed as f64 / total_failed as f64;
    let pass_ratio = if total_passed == 0 { 0.0 } else { c.passed as f64 / total_passed as f64 };
    fail_ratio / (fail_ratio + pass_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ranked {
    pub stmt: StmtId,
    pub score: f64,
}

/// Statements by non-increasing score, ties broken by ascending id.
pub type Ranking = Vec<Ranked>;

pub fn tarantula(sp: &Spectrum) -> Ranking {
    let mut out: Ranking = sp
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| Ranked { stmt: StmtId(i), score: tarantula_score(*c, sp.total_passed, sp.total_failed) })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.stmt.cmp(&b.stmt)));
    out
}

pub fn top_n(r: &Ranking, n: usize) -> Vec<StmtId> {
    r.iter().take(n).map(|x| x.stmt).collect()
}
