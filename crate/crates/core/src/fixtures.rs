//! The worked examples shipped with the crate, embedded for tests and demos.

use crate::interp::TestSuite;
use crate::minilang::{parse, Program};

pub const BIAS_SOURCE: &str = include_str!("../fixtures/bias.mini");
pub const BIAS_TEMPLATE_SOURCE: &str = include_str!("../fixtures/bias_templ.mini");
pub const BIAS_TESTS: &str = include_str!("../fixtures/bias.tests");
pub const LINEAR_PAIR_SOURCE: &str = include_str!("../fixtures/linear_pair.mini");
pub const LINEAR_PAIR_DOMAINS: &str = include_str!("../fixtures/linear_pair.domains");

/// Buggy `is_upward`.
pub fn bias() -> Program {
    parse(BIAS_SOURCE).expect("fixture parses")
}

/// `is_upward` with the faulty assignment replaced by the five-hole linear template.
pub fn bias_template() -> Program {
    parse(BIAS_TEMPLATE_SOURCE).expect("fixture parses")
}

pub fn bias_suite() -> TestSuite {
    BIAS_TESTS.parse().expect("fixture parses")
}

/// Two-global reachability example whose label needs `2x == y && x > y + 10`.
pub fn linear_pair() -> Program {
    parse(LINEAR_PAIR_SOURCE).expect("fixture parses")
}
