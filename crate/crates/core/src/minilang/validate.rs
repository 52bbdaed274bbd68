//! Well-formedness checks applied after parsing and after every program transformation.

use std::collections::BTreeSet;

use super::ast::*;
use super::LangError;

fn semantic(msg: impl Into<String>) -> LangError {
    LangError::Semantic(msg.into())
}

/// True when every path through `block` ends in `return` or `raise`.
pub fn always_exits(block: &[Stmt]) -> bool {
    block.iter().any(|s| match &s.kind {
        StmtKind::Return(_) | StmtKind::Raise => true,
        StmtKind::If(_, t, e) => always_exits(t) && always_exits(e),
        StmtKind::TryCatch(t, c) => always_exits(t) && always_exits(c),
        _ => false,
    })
}

pub fn validate(p: &Program) -> Result<(), LangError> {
    if p.functions.is_empty() {
        return Err(semantic("program defines no functions"));
    }
    let mut globals = BTreeSet::new();
    for g in &p.globals {
        if !globals.insert(g.as_str()) {
            return Err(semantic(format!("duplicate global `{g}`")));
        }
    }
    let mut names = BTreeSet::new();
    for f in &p.functions {
        if !names.insert(f.name.as_str()) {
            return Err(semantic(format!("duplicate function `{}`", f.name)));
        }
        let mut params = BTreeSet::new();
        for x in &f.params {
            if !params.insert(x.as_str()) {
                return Err(semantic(format!("duplicate parameter `{x}` in `{}`", f.name)));
            }
            if globals.contains(x.as_str()) {
                return Err(semantic(format!("parameter `{x}` of `{}` shadows a global", f.name)));
            }
        }
        if !always_exits(&f.body) {
            return Err(semantic(format!("function `{}` can finish without `return`", f.name)));
        }
    }
    let mut bad_call = None;
    p.walk_exprs(&mut |e| {
        if let Expr::Call(name, args) = e {
            if bad_call.is_some() {
                return;
            }
            match p.function(name) {
                None => bad_call = Some(format!("call to unknown function `{name}`")),
                Some(f) if f.params.len() != args.len() => {
                    bad_call = Some(format!(
                        "`{name}` takes {} argument(s) but {} were given",
                        f.params.len(),
                        args.len()
                    ))
                }
                _ => {}
            }
        }
    });
    if let Some(msg) = bad_call {
        return Err(semantic(msg));
    }
    if p.reach_count() > 1 {
        return Err(semantic("more than one `reach` label"));
    }
    Ok(())
}
