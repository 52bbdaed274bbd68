//! Equivalence and size properties of the two reductions on generated instances.

mod common;

use ceti::gen;
use ceti::interp::{run, Interpreter, DEFAULT_FUEL};
use ceti::minilang::{substitute, Expr, Stmt, Valuation, MAIN};
use ceti::reductions::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(common::config(200, 23))]

    #[test]
    fn synthesis_witnesses_are_reach_witnesses(seed in any::<u64>()) {
        let si = gen::synthesis_instance(&mut rng(seed), 40);
        let (ri, names) = gadget_s2r(&si).unwrap();
        for v in common::points(&si.domains) {
            prop_assert_eq!(
                check_synthesis_witness(&si, &v, DEFAULT_FUEL),
                check_reach_witness(&ri, &names.forward(&v), DEFAULT_FUEL),
                "{:?}", v
            );
        }
    }

    #[test]
    fn reach_witnesses_are_synthesis_witnesses(seed in any::<u64>()) {
        let ri = gen::reach_instance(&mut rng(seed), 12);
        let (si, names) = gadget_r2s(&ri).unwrap();
        prop_assert_eq!(si.suite.cases.clone(), vec![ceti::interp::TestCase::new(vec![], 1)]);
        for v in common::points(&ri.domains) {
            let q = substitute(&si.program, &names.forward(&v)).unwrap();
            let reached = check_reach_witness(&ri, &v, DEFAULT_FUEL);
            prop_assert_eq!(reached, check_synthesis_witness(&si, &names.forward(&v), DEFAULT_FUEL));
            prop_assert_eq!(reached == Some(true), run(&q, &Valuation::new(), &[], DEFAULT_FUEL).kind == ceti::interp::Outcome::Returned(1));
        }
    }

    #[test]
    fn round_trip_keeps_the_witness_set(seed in any::<u64>()) {
        let ri = gen::reach_instance(&mut rng(seed), 8);
        let (si, to_holes) = gadget_r2s(&ri).unwrap();
        let (back, to_globals) = gadget_s2r(&si).unwrap();
        for v in common::points(&ri.domains) {
            let w = to_globals.forward(&to_holes.forward(&v));
            prop_assert_eq!(check_reach_witness(&ri, &v, DEFAULT_FUEL), check_reach_witness(&back, &w, DEFAULT_FUEL));
            // Inputs the program never reads have no hole and drop out of the map.
            let used: Valuation = v.iter().filter(|(x, _)| si.holes().iter().any(|h| Some(h.as_str()) == to_holes.param(x))).map(|(k, x)| (k.clone(), *x)).collect();
            prop_assert_eq!(to_holes.backward(&to_globals.backward(&w)), used);
        }
    }

    #[test]
    fn cloned_functions_mirror_the_template(seed in any::<u64>()) {
        let mut r = rng(seed);
        let si = gen::synthesis_instance(&mut r, 40);
        let (ri, names) = gadget_s2r(&si).unwrap();
        let entry = si.program.entry().unwrap().name.clone();
        let clone = names.function(&entry).unwrap().to_string();
        let n = si.program.statement_count();
        for v in common::points(&si.domains).into_iter().step_by(7) {
            let concrete = substitute(&si.program, &v).unwrap();
            for t in &si.suite.cases {
                // Call the clone directly from the gadget entry.
                let mut probe = ri.program.clone();
                let main = probe.functions.iter_mut().find(|f| f.name == MAIN).unwrap();
                main.body = vec![Stmt::ret(Expr::call(clone.clone(), t.inputs.iter().map(|&i| Expr::Int(i)).collect()))];
                probe.renumber();
                let a = run(&concrete, &Valuation::new(), &t.inputs, DEFAULT_FUEL);
                let b = run(&probe, &names.forward(&v), &[], DEFAULT_FUEL);
                prop_assert_eq!(&a.kind, &b.kind);
                let cloned: Vec<_> = b.coverage.iter().filter(|id| id.0 < n).copied().collect();
                prop_assert_eq!(a.coverage.iter().copied().collect::<Vec<_>>(), cloned);
            }
        }
    }

    #[test]
    fn reach_programs_mirror_their_synthesis_clone(seed in any::<u64>()) {
        let ri = gen::reach_instance(&mut rng(seed), 8);
        let (si, names) = gadget_r2s(&ri).unwrap();
        let n = ri.program.statement_count();
        for v in common::points(&ri.domains).into_iter().step_by(5) {
            let a = run(&ri.program, &v, &[], DEFAULT_FUEL);
            let holes = names.forward(&v);
            let b = Interpreter::new(&si.program).holes(&holes).run(&Valuation::new(), &[]);
            let cloned: Vec<_> = b.coverage.iter().filter(|id| id.0 < n).copied().collect();
            prop_assert_eq!(a.coverage.iter().copied().collect::<Vec<_>>(), cloned);
        }
    }

    #[test]
    fn gadget_sizes_follow_the_counting_rule(seed in any::<u64>()) {
        let mut r = rng(seed);
        let si = gen::synthesis_instance(&mut r, 40);
        let (ri, _) = gadget_s2r(&si).unwrap();
        // guard, reach, return
        prop_assert_eq!(ri.program.statement_count(), si.program.statement_count() + 3);
        prop_assert_eq!(ri.program.globals.len(), si.program.globals.len() + si.holes().len());
        let guard_calls = si.suite.len();
        let mut calls = 0;
        ri.program.functions.last().unwrap().body[0].walk(&mut |s| {
            if let Some(e) = s.own_expr() {
                e.walk(&mut |x| calls += matches!(x, Expr::Call(..)) as usize);
            }
        });
        prop_assert_eq!(calls, guard_calls);

        let ri = gen::reach_instance(&mut r, 8);
        let (si, _) = gadget_r2s(&ri).unwrap();
        // try/catch, call, two returns
        prop_assert_eq!(si.program.statement_count(), ri.program.statement_count() + 4);
        prop_assert!(si.holes().len() <= ri.input_vars.len());
        prop_assert_eq!(si.domains.0.len(), ri.input_vars.len());
        prop_assert_eq!(si.program.globals.len() + ri.input_vars.len(), ri.program.globals.len());
    }
}
