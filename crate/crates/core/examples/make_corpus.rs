//! Regenerates the seeded-defect corpus from `corpus/tcas.mini`.
//!
//! cargo run -p ceti-core --example make_corpus

use std::fs;
use std::path::Path;

use ceti::corpus::{generate_suite, tcas_inputs, CorpusEntry, DefectClass, MANIFEST};
use ceti::interp::run_suite;
use ceti::minilang::parse;

const SEED: u64 = 20240501;
const TESTS: usize = 120;

struct Defect {
    id: &'static str,
    class: DefectClass,
    repairable: bool,
    edits: usize,
    description: &'static str,
    changes: &'static [(&'static str, &'static str)],
}

const DEFECTS: &[Defect] = &[
    Defect {
        id: "const-rate-limit",
        class: DefectClass::IncorrectConst,
        repairable: true,
        edits: 1,
        description: "climb-rate limit 600 changed to 700",
        changes: &[("own_rate <= 600", "own_rate <= 700")],
    },
    Defect {
        id: "const-alim-layer2",
        class: DefectClass::IncorrectConst,
        repairable: true,
        edits: 1,
        description: "layer-2 altitude limit 640 changed to 600",
        changes: &[("return 640;", "return 600;")],
    },
    Defect {
        id: "const-intent-code",
        class: DefectClass::IncorrectConst,
        repairable: true,
        edits: 1,
        description: "unknown-intent code 0 changed to 1",
        changes: &[("intent_unknown = other_rac == 0;", "intent_unknown = other_rac == 1;")],
    },
    Defect {
        id: "const-climb-bias",
        class: DefectClass::IncorrectConst,
        repairable: true,
        edits: 1,
        description: "climb-inhibit bias 100 changed to 50",
        changes: &[("bias = up + 100;", "bias = up + 50;")],
    },
    Defect {
        id: "op-below-threat",
        class: DefectClass::IncorrectOp,
        repairable: true,
        edits: 1,
        description: "`<` changed to `>` in own_below_threat",
        changes: &[("return own_alt < other_alt;", "return own_alt > other_alt;")],
    },
    Defect {
        id: "op-enabled-sep",
        class: DefectClass::IncorrectOp,
        repairable: true,
        edits: 1,
        description: "`cvs > 600` changed to `cvs < 600`",
        changes: &[("cvs > 600", "cvs < 600")],
    },
    Defect {
        id: "op-intent-or",
        class: DefectClass::IncorrectOp,
        repairable: true,
        edits: 1,
        description: "`enabled && (...)` changed to `enabled || (...)`",
        changes: &[("if (enabled && (equipped", "if (enabled || (equipped")],
    },
    Defect {
        id: "op-bias-minus",
        class: DefectClass::IncorrectOp,
        repairable: true,
        edits: 1,
        description: "`up + 100` changed to `up - 100`",
        changes: &[("bias = up + 100;", "bias = up - 100;")],
    },
    Defect {
        id: "missing-intent-check",
        class: DefectClass::MissingCode,
        repairable: false,
        edits: 1,
        description: "intent/equipment condition dropped from the advisory guard",
        changes: &[("if (enabled && (equipped && intent_unknown || !equipped))", "if (enabled)")],
    },
    Defect {
        id: "missing-descend-branch",
        class: DefectClass::MissingCode,
        repairable: false,
        edits: 1,
        description: "downward advisory branch removed",
        changes: &[("    } else if (need_down) {\n      alt_sep = 2;\n", "")],
    },
    Defect {
        id: "multi-two-constants",
        class: DefectClass::Multiple,
        repairable: true,
        edits: 2,
        description: "layer-2 altitude limit 640 changed to 600 and climb-inhibit bias 100 changed to 50",
        changes: &[("return 640;", "return 600;"), ("bias = up + 100;", "bias = up + 50;")],
    },
    Defect {
        id: "multi-const-and-missing",
        class: DefectClass::Multiple,
        repairable: false,
        edits: 2,
        description: "rate limit changed and intent condition dropped",
        changes: &[
            ("own_rate <= 600", "own_rate <= 700"),
            ("if (enabled && (equipped && intent_unknown || !equipped))", "if (enabled)"),
        ],
    },
];

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let source = fs::read_to_string(dir.join("tcas.mini")).expect("reference program");
    let reference = parse(&source).expect("reference parses");
    let suite = generate_suite(&reference, SEED, TESTS, |r| tcas_inputs(r));
    let mut counts = [0usize; 3];
    for t in &suite.cases {
        counts[t.expected as usize] += 1;
    }
    println!("suite outputs (unresolved, up, down): {counts:?}");
    fs::write(dir.join("tcas.tests"), format!("# seed {SEED}\n{suite}")).unwrap();

    let mut manifest = Vec::new();
    for d in DEFECTS {
        let mut text = source.clone();
        for (from, to) in d.changes {
            assert_eq!(text.matches(from).count(), 1, "{}: `{from}` must occur once", d.id);
            text = text.replacen(from, to, 1);
        }
        let buggy = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", d.id));
        let failing = run_suite(&buggy, &suite, ceti::interp::DEFAULT_FUEL).iter().filter(|r| !r.passed).count();
        assert!(failing > 0, "{}: defect not exposed by the suite", d.id);
        println!("{:<24} fails {failing} tests", d.id);
        let file = format!("{}.mini", d.id);
        fs::write(dir.join(&file), text).unwrap();
        manifest.push(CorpusEntry {
            id: d.id.into(),
            program: file,
            suite: "tcas.tests".into(),
            defect_class: d.class,
            expected_repairable: d.repairable,
            edits: d.edits,
            description: d.description.into(),
        });
    }
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest).unwrap() + "\n").unwrap();
}
