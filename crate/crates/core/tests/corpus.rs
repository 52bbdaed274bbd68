//! The shipped defect corpus is well formed and reproducible.

use std::path::{Path, PathBuf};

use ceti::corpus::{generate_suite, load_entry, load_manifest, tcas_inputs, DefectClass};
use ceti::interp::{run_suite, DEFAULT_FUEL};
use ceti::minilang::parse;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[test]
fn manifest_lists_twelve_entries_by_class() {
    let entries = load_manifest(&dir()).unwrap();
    assert_eq!(entries.len(), 12);
    let count = |c| entries.iter().filter(|e| e.defect_class == c).count();
    assert_eq!(count(DefectClass::IncorrectConst), 4);
    assert_eq!(count(DefectClass::IncorrectOp), 4);
    assert_eq!(count(DefectClass::MissingCode), 2);
    assert_eq!(count(DefectClass::Multiple), 2);
    for e in &entries {
        let single = matches!(e.defect_class, DefectClass::IncorrectConst | DefectClass::IncorrectOp);
        if single {
            assert!(e.expected_repairable && e.edits == 1, "{}", e.id);
        }
        if e.defect_class == DefectClass::MissingCode {
            assert!(!e.expected_repairable, "{}", e.id);
        }
    }
    let mut ids: Vec<_> = entries.iter().map(|e| &e.id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 12);
}

#[test]
fn every_defect_fails_some_test() {
    for e in load_manifest(&dir()).unwrap() {
        let l = load_entry(&dir(), &e).unwrap();
        let failing = run_suite(&l.program, &l.suite, DEFAULT_FUEL).iter().filter(|t| !t.passed).count();
        assert!(failing >= 1, "{} passes its whole suite", e.id);
        assert!(failing < l.suite.len(), "{} fails every test", e.id);
    }
}

#[test]
fn reference_passes_and_suite_regenerates_from_its_seed() {
    let reference = parse(&std::fs::read_to_string(dir().join("tcas.mini")).unwrap()).unwrap();
    let text = std::fs::read_to_string(dir().join("tcas.tests")).unwrap();
    let suite: ceti::interp::TestSuite = text.parse().unwrap();
    assert_eq!(suite.len(), 120);
    assert!(run_suite(&reference, &suite, DEFAULT_FUEL).iter().all(|t| t.passed));

    let seed: u64 = text.lines().next().unwrap().strip_prefix("# seed ").unwrap().trim().parse().unwrap();
    assert_eq!(generate_suite(&reference, seed, suite.len(), |r| tcas_inputs(r)), suite);

    // Every output class shows up.
    for out in 0..=2 {
        assert!(suite.cases.iter().any(|t| t.expected == out), "no test expects {out}");
    }
}
