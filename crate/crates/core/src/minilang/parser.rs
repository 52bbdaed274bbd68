//! Hand-written lexer and recursive-descent parser for MiniLang.

use super::ast::*;
use super::validate::validate;
use super::LangError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    /// Unsigned magnitude; a leading `-` is folded in by the parser.
    Int(u64),
    Hole(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

const SYMBOLS: [&str; 22] = [
    "&&", "||", "==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "!", "=", "(", ")", "{", "}",
    "[", "]", ",", ";",
];

const KEYWORDS: [&str; 10] = ["def", "int", "if", "else", "while", "return", "reach", "raise", "try", "catch"];

fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| LangError::Syntax { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<u64>()
                .map_err(|_| err(line, col, format!("integer literal `{text}` out of range")))?;
            col += i - start;
            out.push(Token { tok: Tok::Int(v), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), span });
            continue;
        }
        if c == '?' && chars.get(i + 1) == Some(&'?') {
            let start = i + 2;
            let mut j = start;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            if j == start {
                return Err(err(line, col, "expected hole name after `??`".into()));
            }
            out.push(Token { tok: Tok::Hole(chars[start..j].iter().collect()), span });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), span });
            }
            None => return Err(err(line, col, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        let s = self.span();
        Err(LangError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), LangError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), LangError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(name)
            }
            t => self.error(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn program(&mut self) -> Result<Program, LangError> {
        let mut prog = Program::default();
        while self.is_kw("int") {
            self.bump();
            prog.globals.push(self.ident()?);
            while self.is_sym(",") {
                self.bump();
                prog.globals.push(self.ident()?);
            }
            self.expect_sym(";")?;
        }
        while self.is_kw("def") {
            prog.functions.push(self.function()?);
        }
        if *self.peek() != Tok::Eof {
            return self.error(format!("expected `def` or end of input, found {}", describe(self.peek())));
        }
        Ok(prog)
    }

    fn function(&mut self) -> Result<Function, LangError> {
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            params.push(self.ident()?);
            while self.is_sym(",") {
                self.bump();
                params.push(self.ident()?);
            }
        }
        self.expect_sym(")")?;
        let body = self.block()?;
        Ok(Function { name, params, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, LangError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let then = self.block()?;
                let els = if self.is_kw("else") {
                    self.bump();
                    if self.is_kw("if") {
                        vec![self.stmt()?]
                    } else {
                        self.block()?
                    }
                } else {
                    Vec::new()
                };
                StmtKind::If(cond, then, els)
            }
            Tok::Ident(kw) if kw == "while" => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                StmtKind::While(cond, self.block()?)
            }
            Tok::Ident(kw) if kw == "return" => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Return(e)
            }
            Tok::Ident(kw) if kw == "reach" => {
                self.bump();
                self.expect_sym(";")?;
                StmtKind::Reach
            }
            Tok::Ident(kw) if kw == "raise" => {
                self.bump();
                self.expect_sym(";")?;
                StmtKind::Raise
            }
            Tok::Ident(kw) if kw == "try" => {
                self.bump();
                let body = self.block()?;
                self.expect_kw("catch")?;
                StmtKind::TryCatch(body, self.block()?)
            }
            Tok::Ident(name)
                if !KEYWORDS.contains(&name.as_str()) && matches!(self.peek_at(1), Tok::Sym("=")) =>
            {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Assign(name, e)
            }
            _ => {
                let e = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { id: StmtId(0), kind, span })
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        let Tok::Sym(s) = self.peek() else { return None };
        Some(match *s {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        if self.is_sym("-") {
            self.bump();
            // `-` directly before a literal is part of the literal.
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                let v = i128::from(v);
                return i64::try_from(-v)
                    .map(Expr::Int)
                    .or_else(|_| self.error("integer literal out of range"));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is_sym("!") {
            self.bump();
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                i64::try_from(v).map(Expr::Int).or_else(|_| self.error("integer literal out of range"))
            }
            Tok::Hole(h) => {
                self.bump();
                Ok(Expr::Hole(HoleId(h)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) if OpClass::from_keyword(&name).is_some() && matches!(self.peek_at(1), Tok::Sym("[")) => {
                let class = OpClass::from_keyword(&name).unwrap();
                self.bump();
                self.bump();
                let selector = self.expr()?;
                self.expect_sym("]")?;
                self.expect_sym("(")?;
                let lhs = self.expr()?;
                self.expect_sym(",")?;
                let rhs = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::Switch { class, selector: Box::new(selector), lhs: Box::new(lhs), rhs: Box::new(rhs) })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        args.push(self.expr()?);
                        while self.is_sym(",") {
                            self.bump();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            t => self.error(format!("expected expression, found {}", describe(&t))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Hole(h) => format!("`??{h}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses and validates a MiniLang program, assigning statement ids.
pub fn parse(src: &str) -> Result<Program, LangError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut prog = p.program()?;
    prog.renumber();
    validate(&prog)?;
    Ok(prog)
}

/// Parses a single expression (used by tests and the CLI).
pub fn parse_expr(src: &str) -> Result<Expr, LangError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error("trailing input after expression");
    }
    Ok(e)
}
