//! The MiniLang language: AST, parser, printer and hole substitution.

mod ast;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use parser::{parse, parse_expr};
pub use printer::{print, print_expr, stmt_head};
pub use validate::{always_exits, validate};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("no value for hole `{0}`")]
    MissingHole(HoleId),
}

/// Integer assignment to hole ids or input variables, keyed by name.
pub type Valuation = BTreeMap<String, i64>;

/// Replaces every hole by its value from `v`. Entries for unknown holes are ignored.
pub fn substitute(p: &Program, v: &Valuation) -> Result<Program, LangError> {
    let holes = p.holes();
    if let Some(missing) = holes.iter().find(|h| !v.contains_key(h.as_str())) {
        return Err(LangError::MissingHole(missing.clone()));
    }
    let extra: Vec<&String> = v.keys().filter(|k| !holes.iter().any(|h| h.as_str() == *k)).collect();
    if !extra.is_empty() {
        log::warn!("ignoring values for unknown holes: {extra:?}");
    }
    let mut out = p.clone();
    out.rewrite_exprs(&mut |e| {
        if let Expr::Hole(h) = e {
            *e = Expr::Int(v[h.as_str()]);
        }
    });
    Ok(out)
}
