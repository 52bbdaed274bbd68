//! Canonical pretty-printer. `parse(&print(p))` reproduces `p` structurally.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";
const UNARY_PREC: u8 = 7;

pub fn print(p: &Program) -> String {
    let mut out = String::new();
    for g in &p.globals {
        let _ = writeln!(out, "int {g};");
    }
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 || !p.globals.is_empty() {
            out.push('\n');
        }
        let _ = write!(out, "def {}({})", f.name, f.params.join(", "));
        out.push(' ');
        block(&mut out, &f.body, 0);
        out.push('\n');
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

/// One-line rendering of a statement; compound statements show their header only.
pub fn stmt_head(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::If(c, _, _) => format!("if ({})", print_expr(c)),
        StmtKind::While(c, _) => format!("while ({})", print_expr(c)),
        StmtKind::TryCatch(..) => "try".into(),
        _ => {
            let mut out = String::new();
            stmt(&mut out, s, 0);
            out.trim_end().to_string()
        }
    }
}

fn is_simple(s: &Stmt) -> bool {
    !matches!(s.kind, StmtKind::If(..) | StmtKind::While(..) | StmtKind::TryCatch(..))
}

fn block(out: &mut String, b: &[Stmt], depth: usize) {
    match b {
        [] => out.push_str("{}"),
        [s] if is_simple(s) => {
            out.push_str("{ ");
            simple(out, s);
            out.push_str(" }");
        }
        _ => {
            out.push_str("{\n");
            for s in b {
                stmt(out, s, depth + 1);
            }
            out.push_str(&INDENT.repeat(depth));
            out.push('}');
        }
    }
}

fn simple(out: &mut String, s: &Stmt) {
    match &s.kind {
        StmtKind::Assign(t, e) => {
            let _ = write!(out, "{t} = {};", print_expr(e));
        }
        StmtKind::Return(e) => {
            let _ = write!(out, "return {};", print_expr(e));
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};", print_expr(e));
        }
        StmtKind::Reach => out.push_str("reach;"),
        StmtKind::Raise => out.push_str("raise;"),
        _ => unreachable!("compound statement"),
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    out.push_str(&INDENT.repeat(depth));
    match &s.kind {
        StmtKind::If(..) => if_chain(out, s, depth),
        StmtKind::While(c, b) => {
            let _ = write!(out, "while ({}) ", print_expr(c));
            block(out, b, depth);
        }
        StmtKind::TryCatch(t, c) => {
            out.push_str("try ");
            block(out, t, depth);
            out.push_str(" catch ");
            block(out, c, depth);
        }
        _ => simple(out, s),
    }
    out.push('\n');
}

fn if_chain(out: &mut String, s: &Stmt, depth: usize) {
    let StmtKind::If(c, t, e) = &s.kind else { unreachable!() };
    let _ = write!(out, "if ({}) ", print_expr(c));
    block(out, t, depth);
    match e.as_slice() {
        [] => {}
        [inner] if matches!(inner.kind, StmtKind::If(..)) => {
            out.push_str(" else ");
            if_chain(out, inner, depth);
        }
        _ => {
            out.push_str(" else ");
            block(out, e, depth);
        }
    }
}

fn expr(out: &mut String, e: &Expr, min_prec: u8) {
    match e {
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Hole(h) => {
            let _ = write!(out, "??{h}");
        }
        Expr::Unary(op, inner) => {
            let paren = min_prec > UNARY_PREC;
            if paren {
                out.push('(');
            }
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            match (op, inner.as_ref()) {
                // `-5` would read back as a literal
                (UnOp::Neg, Expr::Int(v)) if *v >= 0 => {
                    let _ = write!(out, "({v})");
                }
                _ => expr(out, inner, UNARY_PREC),
            }
            if paren {
                out.push(')');
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < min_prec;
            if paren {
                out.push('(');
            }
            expr(out, l, p);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, r, p + 1);
            if paren {
                out.push(')');
            }
        }
        Expr::Switch { class, selector, lhs, rhs } => {
            let _ = write!(out, "{}[", class.keyword());
            expr(out, selector, 0);
            out.push_str("](");
            expr(out, lhs, 0);
            out.push_str(", ");
            expr(out, rhs, 0);
            out.push(')');
        }
        Expr::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a, 0);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::{parse, parse_expr};

    #[test]
    fn canonical_minimal() {
        let p = parse("def   main ( )\n{ return 0 ; }").unwrap();
        assert_eq!(print(&p), "def main() { return 0; }\n");
    }

    #[test]
    fn parenthesization() {
        for src in ["(a + b) * c", "a - (b - c)", "-(a + b)", "-(5)", "-5", "a - -5", "!(a && b) || c", "--x"] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
        assert_eq!(print_expr(&parse_expr("((a)) + (b * c)").unwrap()), "a + b * c");
    }

    #[test]
    fn else_if_chain() {
        let src = "def f(a) {\n  if (a == 0) { return 1; } else if (a == 1) { return 2; } else { return 3; }\n}\n";
        let p = parse(src).unwrap();
        assert_eq!(print(&p), src);
    }
}
