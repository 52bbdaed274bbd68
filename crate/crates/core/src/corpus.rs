//! Seeded-defect benchmark corpus and the batch harness over it.
//!
//! A corpus directory holds `manifest.json` (a list of [`CorpusEntry`]) next to the
//! program and suite files it names.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::interp::{run, Outcome, TestCase, TestSuite};
use crate::minilang::{parse, Program};
use crate::repair::{repair, validate, RepairConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectClass {
    IncorrectConst,
    IncorrectOp,
    MissingCode,
    Multiple,
}

impl DefectClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DefectClass::IncorrectConst => "incorrect-const",
            DefectClass::IncorrectOp => "incorrect-op",
            DefectClass::MissingCode => "missing-code",
            DefectClass::Multiple => "multiple",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusEntry {
    pub id: String,
    pub program: String,
    pub suite: String,
    pub defect_class: DefectClass,
    pub expected_repairable: bool,
    /// Simultaneous edits the repair is allowed.
    #[serde(default = "one")]
    pub edits: usize,
    #[serde(default)]
    pub description: String,
}

fn one() -> usize {
    1
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

#[derive(Debug, Clone)]
pub struct LoadedEntry {
    pub entry: CorpusEntry,
    pub program: Program,
    pub suite: TestSuite,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_owned(), source })
}

/// Reads the manifest of the corpus at `dir`.
pub fn load_manifest(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let path = dir.join(MANIFEST);
    let text = read(&path)?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Invalid { path, msg: e.to_string() })
}

/// Parses one entry's program and suite and checks the entry invariants.
pub fn load_entry(dir: &Path, entry: &CorpusEntry) -> Result<LoadedEntry, CorpusError> {
    let ppath = dir.join(&entry.program);
    let spath = dir.join(&entry.suite);
    let invalid = |path: &Path, msg: String| CorpusError::Invalid { path: path.to_owned(), msg };
    let program = parse(&read(&ppath)?).map_err(|e| invalid(&ppath, e.to_string()))?;
    let suite: TestSuite = read(&spath)?.parse().map_err(|e: crate::interp::SuiteError| invalid(&spath, e.to_string()))?;
    let arity = program.entry().map_or(0, |f| f.params.len());
    if suite.cases.iter().any(|t| t.inputs.len() != arity) {
        return Err(invalid(&spath, format!("test arity differs from entry arity {arity}")));
    }
    Ok(LoadedEntry { entry: entry.clone(), program, suite })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub id: String,
    pub defect_class: DefectClass,
    pub expected_repairable: bool,
    pub repaired: bool,
    /// The emitted patch re-validated against the full suite.
    pub patch_valid: bool,
    pub r_progs: usize,
    pub time_ms: u64,
    pub patch: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub repaired: usize,
    pub total: usize,
}

impl BenchReport {
    pub fn from_rows(rows: Vec<BenchRow>) -> BenchReport {
        let repaired = rows.iter().filter(|r| r.repaired).count();
        BenchReport { total: rows.len(), repaired, rows }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("id\tclass\texpected\trepaired\trProgs\ttimeMs\tpatch\n");
        for r in &self.rows {
            let patch = r.patch.as_deref().or(r.error.as_deref()).unwrap_or("-").replace('\n', " | ");
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.id,
                r.defect_class.as_str(),
                r.expected_repairable,
                r.repaired,
                r.r_progs,
                r.time_ms,
                patch
            );
        }
        let _ = writeln!(out, "# repaired {}/{}", self.repaired, self.total);
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "rows": self.rows, "repaired": self.repaired, "total": self.total })
    }
}

/// Runs [`repair`] on every entry; failures become rows, never aborts.
/// `entry_cap` bounds each entry's search time. Entries run on up to `jobs`
/// threads; rows stay in manifest order.
pub fn bench(dir: &Path, cfg: &RepairConfig, entry_cap: Option<Duration>, jobs: usize) -> Result<BenchReport, CorpusError> {
    let entries = load_manifest(dir)?;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<BenchRow>>> = entries.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, entries.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(e) = entries.get(i) else { break };
                let row = bench_entry(dir, e, cfg, entry_cap);
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });
    let rows = slots.into_iter().map(|m| m.into_inner().unwrap().expect("every entry ran")).collect();
    Ok(BenchReport::from_rows(rows))
}

pub fn bench_entry(dir: &Path, e: &CorpusEntry, cfg: &RepairConfig, entry_cap: Option<Duration>) -> BenchRow {
    let start = Instant::now();
    let mut row = BenchRow {
        id: e.id.clone(),
        defect_class: e.defect_class,
        expected_repairable: e.expected_repairable,
        repaired: false,
        patch_valid: false,
        r_progs: 0,
        time_ms: 0,
        patch: None,
        error: None,
    };
    let loaded = match load_entry(dir, e) {
        Ok(l) => l,
        Err(err) => {
            row.error = Some(err.to_string());
            return row;
        }
    };
    let cfg = RepairConfig { edits: e.edits.max(cfg.edits), time_budget: entry_cap.or(cfg.time_budget), ..cfg.clone() };
    match repair(&loaded.program, &loaded.suite, &cfg) {
        Ok(report) => {
            row.r_progs = report.r_progs;
            if let Some(p) = report.patch() {
                row.repaired = true;
                row.patch_valid = validate(&loaded.program, p, &loaded.suite, cfg.fuel).passed;
                row.patch = Some(crate::repair::describe(p));
            }
            if report.out_of_time {
                row.error = Some("time budget exhausted".into());
            }
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row.time_ms = start.elapsed().as_millis() as u64;
    row
}

fn near_threshold(rng: &mut impl Rng, lo: i64, hi: i64) -> i64 {
    const THRESHOLDS: [i64; 4] = [400, 500, 640, 740];
    if rng.gen_bool(0.5) {
        THRESHOLDS[rng.gen_range(0..THRESHOLDS.len())] + rng.gen_range(-50..=50)
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Random inputs for the corpus entry point. Most draws follow a climb or
/// descend encounter with separations close to the altitude limits.
pub fn tcas_inputs(rng: &mut impl Rng) -> Vec<i64> {
    let cvs = if rng.gen_bool(0.85) { rng.gen_range(601..=1200) } else { rng.gen_range(0..=600) };
    let high_conf = i64::from(rng.gen_bool(0.95));
    let own_rate = if rng.gen_bool(0.8) { rng.gen_range(0..=600) } else { rng.gen_range(601..=800) };
    let layer = rng.gen_range(0..=3);
    let climb_inhibit = i64::from(rng.gen_bool(0.5));
    let other_cap = if rng.gen_bool(0.25) { 1 } else { 2 * rng.gen_range(0..=1) };
    let other_rac = rng.gen_range(0..=2);
    let (lo, hi) = (rng.gen_range(0..=500), rng.gen_range(501..=1000));
    let (own_alt, other_alt, up_sep, down_sep) = match rng.gen_range(0..5) {
        // climb: own below the threat, more room above
        0 | 1 => {
            let down = near_threshold(rng, 0, 800);
            (lo, hi, down + rng.gen_range(-120..=400), down)
        }
        // descend: own above the threat, more room below
        2 | 3 => {
            let up = near_threshold(rng, 0, 800);
            (hi, lo, up, up + rng.gen_range(-120..=400))
        }
        _ => (rng.gen_range(0..=1000), rng.gen_range(0..=1000), near_threshold(rng, 0, 1000), near_threshold(rng, 0, 1000)),
    };
    vec![cvs, high_conf, own_alt, other_alt, own_rate, layer, up_sep, down_sep, climb_inhibit, other_cap, other_rac]
}

/// `n` tests whose expected outputs come from running the reference program.
pub fn generate_suite(reference: &Program, seed: u64, n: usize, mut inputs: impl FnMut(&mut ChaCha8Rng) -> Vec<i64>) -> TestSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..n)
        .map(|_| {
            let args = inputs(&mut rng);
            match run(reference, &Default::default(), &args, crate::interp::DEFAULT_FUEL).kind {
                Outcome::Returned(v) => TestCase::new(args, v),
                other => panic!("reference program did not return on {args:?}: {other}"),
            }
        })
        .collect();
    TestSuite::new(cases)
}
