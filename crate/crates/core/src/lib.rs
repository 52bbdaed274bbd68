//! Automated program repair for MiniLang by reducing template-based synthesis to
//! reachability, plus the reverse reduction.
//!
//! Pipeline: [`faultloc`] ranks suspicious statements, [`templates`] turns a statement
//! into a parameterised candidate, [`reductions::gadget_s2r`] builds a reachability
//! instance whose label is reachable exactly when the candidate can pass the test
//! suite, and [`solver::solve`] searches for inputs reaching that label. A witness maps
//! straight back to a patch.

pub mod minilang;
pub mod corpus;
pub mod domain;
pub mod faultloc;
pub mod gen;
pub mod fixtures;
pub mod interp;
pub mod reductions;
pub mod repair;
pub mod solver;
pub mod templates;
