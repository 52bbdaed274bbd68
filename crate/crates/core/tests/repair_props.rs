//! Fault localization, template and repair properties on generated programs.

mod common;

use std::collections::BTreeSet;

use ceti::faultloc::{tarantula, tarantula_score, top_n, Counts, Spectrum};
use ceti::gen;
use ceti::interp::{run, run_suite, DEFAULT_FUEL};
use ceti::minilang::{print_expr, substitute, Expr, Program, StmtId, Valuation};
use ceti::repair::{repair, validate, Edit, Patch, RepairConfig, RepairStatus};
use ceti::templates::{applicable, instantiate_at, HoleGen, TemplateInstance, TemplateKind};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A hole-free program with a suite, taken from a generated synthesis instance.
fn concrete(r: &mut ChaCha8Rng) -> (Program, ceti::interp::TestSuite) {
    let si = gen::synthesis_instance(r, 40);
    let v: Valuation = si.domains.0.iter().map(|(n, d)| (n.clone(), d.lo())).collect();
    (substitute(&si.program, &v).unwrap(), si.suite)
}

fn random_value(r: &mut ChaCha8Rng, d: &ceti::domain::Domain) -> i64 {
    if r.gen_bool(0.5) {
        r.gen_range(d.lo().max(-20)..=d.hi().min(20)).clamp(d.lo(), d.hi())
    } else {
        let vals: Vec<i64> = d.values().take(64).collect();
        *vals.choose(r).unwrap()
    }
}

fn in_domain(r: &mut ChaCha8Rng, ti: &TemplateInstance) -> Valuation {
    ti.holes
        .iter()
        .map(|(h, d)| {
            let mut x = random_value(r, d);
            if !d.contains(x) {
                x = d.lo();
            }
            (h.as_str().to_string(), x)
        })
        .collect()
}

/// The valuation that puts the original literals or operators back.
fn identity(p: &Program, ti: &TemplateInstance) -> Valuation {
    let original = p.stmt(ti.site).unwrap().own_expr().unwrap();
    let mut vals = Vec::new();
    fn pre(e: &Expr, f: &mut impl FnMut(&Expr)) {
        f(e);
        for c in e.children() {
            pre(c, f);
        }
    }
    pre(original, &mut |e| match (ti.kind, e) {
        (TemplateKind::ConstSwap, Expr::Int(v)) => vals.push(*v),
        (TemplateKind::OpSwitch(class), Expr::Binary(op, ..)) if op.class() == class => {
            vals.push(class.index_of(*op).unwrap() as i64)
        }
        _ => {}
    });
    ti.holes.iter().map(|(h, _)| h.as_str().to_string()).zip(vals).collect()
}

fn instances(p: &Program, gen: &HoleGen) -> Vec<TemplateInstance> {
    (0..p.statement_count())
        .flat_map(|i| applicable(p, StmtId(i)).into_iter().map(move |k| (StmtId(i), k)))
        .map(|(s, k)| instantiate_at(p, s, k, gen).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(common::config(200, 53))]

    #[test]
    fn spectra_are_exact_tallies(
        runs in prop::collection::vec((any::<bool>(), prop::collection::btree_set(0usize..8, 0..8)), 1..12),
    ) {
        let sets: Vec<BTreeSet<StmtId>> = runs.iter().map(|(_, s)| s.iter().map(|&i| StmtId(i)).collect()).collect();
        let cov: Vec<(bool, &BTreeSet<StmtId>)> = runs.iter().map(|(p, _)| *p).zip(&sets).collect();
        let Ok(sp) = Spectrum::from_coverage(&cov, 8) else {
            prop_assert!(runs.iter().all(|(p, _)| *p));
            return Ok(());
        };
        for i in 0..8 {
            let failed = runs.iter().filter(|(p, s)| !p && s.contains(&i)).count();
            let passed = runs.iter().filter(|(p, s)| *p && s.contains(&i)).count();
            prop_assert_eq!(sp.get(StmtId(i)), Counts { passed, failed });
        }
        let ranking = tarantula(&sp);
        prop_assert!(ranking.iter().all(|r| (0.0..=1.0).contains(&r.score)));
        prop_assert!(ranking.windows(2).all(|w| w[0].score > w[1].score || w[0].score == w[1].score && w[0].stmt < w[1].stmt));
        for n in 1..10 {
            let top = top_n(&ranking, n);
            prop_assert_eq!(top.len(), n.min(8));
            prop_assert_eq!(&top[..], &ranking.iter().map(|r| r.stmt).collect::<Vec<_>>()[..n.min(8)]);
        }
        // Test order does not matter.
        let mut rev = cov.clone();
        rev.reverse();
        prop_assert_eq!(tarantula(&Spectrum::from_coverage(&rev, 8).unwrap()), ranking);
    }

    #[test]
    fn more_failing_coverage_never_lowers_the_score(tp in 0usize..20, tf in 1usize..20, p in 0usize..20, f in 0usize..20) {
        let (p, f) = (p.min(tp), f.min(tf));
        let s = tarantula_score(Counts { passed: p, failed: f }, tp, tf);
        prop_assert!((0.0..=1.0).contains(&s));
        if f < tf {
            let more = tarantula_score(Counts { passed: p, failed: f + 1 }, tp, tf);
            prop_assert!(more >= s);
        }
    }

    #[test]
    fn realize_behaves_like_substitute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, suite) = concrete(&mut r);
        let holes = HoleGen::new();
        let mut seen = BTreeSet::new();
        for ti in instances(&p, &holes) {
            for (h, _) in &ti.holes {
                prop_assert!(seen.insert(h.clone()), "hole {} reused", h);
            }
            let v = in_domain(&mut r, &ti);
            let realized = ti.realize(&v).unwrap();
            prop_assert!(realized.holes().is_empty());
            let substituted = substitute(&ti.program, &v).unwrap();
            for t in &suite.cases {
                let a = run(&realized, &Valuation::new(), &t.inputs, DEFAULT_FUEL).kind;
                let b = run(&substituted, &Valuation::new(), &t.inputs, DEFAULT_FUEL).kind;
                prop_assert_eq!(a, b, "{} at {:?}", ti.kind, ti.site);
            }
            // Only the site changes.
            for s in p.statements() {
                if s.id != ti.site {
                    prop_assert_eq!(s.own_expr(), realized.stmt(s.id).unwrap().own_expr());
                }
            }
            if ti.kind != TemplateKind::LinearCombo {
                prop_assert_eq!(ti.realize(&identity(&p, &ti)).unwrap(), p.clone());
            }
        }
    }

    #[test]
    fn validate_agrees_with_the_suite_run(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, suite) = concrete(&mut r);
        for ti in instances(&p, &HoleGen::new()).into_iter().take(6) {
            let v = in_domain(&mut r, &ti);
            let expr = ti.realize_expr(&v).unwrap();
            let patch = Patch {
                edits: vec![Edit {
                    site: ti.site,
                    kind: ti.kind,
                    original: String::new(),
                    replacement: print_expr(&expr),
                    expr,
                }],
                witness: v.clone(),
            };
            let results = run_suite(&ti.realize(&v).unwrap(), &suite, DEFAULT_FUEL);
            prop_assert_eq!(validate(&p, &patch, &suite, DEFAULT_FUEL).passed, results.iter().all(|t| t.passed));
        }
    }
}

proptest! {
    #![proptest_config(common::config(40, 71))]

    #[test]
    fn repairs_are_sound_and_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, suite) = concrete(&mut r);
        prop_assume!(run_suite(&p, &suite, DEFAULT_FUEL).iter().any(|t| !t.passed));
        let cfg = RepairConfig { top_n: 6, ..RepairConfig::default() };
        let a = repair(&p, &suite, &cfg).unwrap();
        if let RepairStatus::Repaired(patch) = &a.status {
            prop_assert!(validate(&p, patch, &suite, DEFAULT_FUEL).passed);
        }
        let b = repair(&p, &suite, &cfg).unwrap();
        prop_assert_eq!(a.to_json(false), b.to_json(false));
        prop_assert_eq!(a.r_progs, a.candidates.iter().filter(|c| !matches!(c.outcome, ceti::repair::CandidateOutcome::Skipped(_))).count());
    }
}
