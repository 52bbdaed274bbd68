//! MiniLang abstract syntax.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of the function execution starts from when it is defined.
pub const MAIN: &str = "main";

/// Pre-order index of a statement within its program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub usize);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a template hole (`??id` in source).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoleId(pub String);

impl HoleId {
    pub fn new(s: impl Into<String>) -> Self {
        HoleId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for HoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Source position used for diagnostics only; never part of structural equality.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

/// Operator families a template may switch between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpClass {
    Arith,
    Compare,
    Logical,
}

impl OpClass {
    pub const ALL: [OpClass; 3] = [OpClass::Arith, OpClass::Compare, OpClass::Logical];

    /// Operators of the class in selector order.
    pub fn ops(self) -> &'static [BinOp] {
        match self {
            OpClass::Arith => &[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div],
            OpClass::Compare => &[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne],
            OpClass::Logical => &[BinOp::And, BinOp::Or],
        }
    }

    pub fn index_of(self, op: BinOp) -> Option<usize> {
        self.ops().iter().position(|&o| o == op)
    }

    /// Keyword used for the switch form in source text.
    pub fn keyword(self) -> &'static str {
        match self {
            OpClass::Arith => "arith",
            OpClass::Compare => "cmp",
            OpClass::Logical => "logic",
        }
    }

    pub fn from_keyword(s: &str) -> Option<OpClass> {
        OpClass::ALL.into_iter().find(|c| c.keyword() == s)
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter. All binary operators are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn class(self) -> OpClass {
        match self {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => OpClass::Arith,
            BinOp::And | BinOp::Or => OpClass::Logical,
            _ => OpClass::Compare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Var(String),
    Hole(HoleId),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Operator chosen at run time from `class` by the integer value of `selector`.
    Switch {
        class: OpClass,
        selector: Box<Expr>,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn hole(id: impl Into<String>) -> Expr {
        Expr::Hole(HoleId(id.into()))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Call(name.into(), args)
    }

    /// Immediate sub-expressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Var(_) | Expr::Hole(_) => vec![],
            Expr::Unary(_, e) => vec![e],
            Expr::Binary(_, l, r) => vec![l, r],
            Expr::Switch { selector, lhs, rhs, .. } => vec![selector, lhs, rhs],
            Expr::Call(_, args) => args.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Int(_) | Expr::Var(_) | Expr::Hole(_) => vec![],
            Expr::Unary(_, e) => vec![e],
            Expr::Binary(_, l, r) => vec![l, r],
            Expr::Switch { selector, lhs, rhs, .. } => vec![selector, lhs, rhs],
            Expr::Call(_, args) => args.iter_mut().collect(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Bottom-up rewrite: children are rewritten before `f` sees the parent.
    pub fn rewrite(&mut self, f: &mut impl FnMut(&mut Expr)) {
        for c in self.children_mut() {
            c.rewrite(f);
        }
        f(self);
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign(String, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    Return(Expr),
    Reach,
    Raise,
    TryCatch(Vec<Stmt>, Vec<Stmt>),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.kind == other.kind
    }
}

impl Eq for Stmt {}

impl Stmt {
    /// A statement with a placeholder id; call [`Program::renumber`] once the tree is assembled.
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { id: StmtId(0), kind, span: Span::default() }
    }

    pub fn assign(target: impl Into<String>, rhs: Expr) -> Stmt {
        Stmt::new(StmtKind::Assign(target.into(), rhs))
    }

    pub fn ret(e: Expr) -> Stmt {
        Stmt::new(StmtKind::Return(e))
    }

    /// The expression owned directly by this statement (not by nested blocks).
    pub fn own_expr(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::Assign(_, e) | StmtKind::If(e, _, _) | StmtKind::While(e, _) => Some(e),
            StmtKind::Return(e) | StmtKind::Expr(e) => Some(e),
            StmtKind::Reach | StmtKind::Raise | StmtKind::TryCatch(..) => None,
        }
    }

    pub fn own_expr_mut(&mut self) -> Option<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign(_, e) | StmtKind::If(e, _, _) | StmtKind::While(e, _) => Some(e),
            StmtKind::Return(e) | StmtKind::Expr(e) => Some(e),
            StmtKind::Reach | StmtKind::Raise | StmtKind::TryCatch(..) => None,
        }
    }

    pub fn blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If(_, t, e) | StmtKind::TryCatch(t, e) => vec![t, e],
            StmtKind::While(_, b) => vec![b],
            _ => vec![],
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If(_, t, e) | StmtKind::TryCatch(t, e) => vec![t, e],
            StmtKind::While(_, b) => vec![b],
            _ => vec![],
        }
    }

    /// Pre-order walk over this statement and every nested one.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for b in self.blocks() {
            for s in b {
                s.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        for b in self.blocks_mut() {
            for s in b.iter_mut() {
                s.walk_mut(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub globals: Vec<String>,
    pub functions: Vec<Function>,
}

impl Program {
    /// `main` when defined, otherwise the last function.
    pub fn entry_name(&self) -> Option<&str> {
        if self.function(MAIN).is_some() {
            Some(MAIN)
        } else {
            self.functions.last().map(|f| f.name.as_str())
        }
    }

    pub fn entry(&self) -> Option<&Function> {
        self.entry_name().and_then(|n| self.function(n))
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn is_global(&self, name: &str) -> bool {
        self.globals.iter().any(|g| g == name)
    }

    /// Every statement in pre-order (functions in declaration order).
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        for f in &self.functions {
            for s in &f.body {
                s.walk(&mut |s| out.push(s));
            }
        }
        out
    }

    pub fn statement_count(&self) -> usize {
        self.statements().len()
    }

    pub fn stmt(&self, id: StmtId) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.id == id)
    }

    pub fn stmt_mut(&mut self, id: StmtId) -> Option<&mut Stmt> {
        self.functions.iter_mut().find_map(|f| find_stmt_mut(&mut f.body, id))
    }

    /// Name of the function containing the statement.
    pub fn function_of(&self, id: StmtId) -> Option<&Function> {
        self.functions.iter().find(|f| {
            let mut hit = false;
            for s in &f.body {
                s.walk(&mut |s| hit |= s.id == id);
            }
            hit
        })
    }

    pub fn walk_stmts_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        for func in &mut self.functions {
            for s in &mut func.body {
                s.walk_mut(f);
            }
        }
    }

    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        for s in self.statements() {
            if let Some(e) = s.own_expr() {
                e.walk(f);
            }
        }
    }

    pub fn rewrite_exprs(&mut self, f: &mut impl FnMut(&mut Expr)) {
        self.walk_stmts_mut(&mut |s| {
            if let Some(e) = s.own_expr_mut() {
                e.rewrite(f);
            }
        });
    }

    /// Reassigns dense pre-order statement ids starting at 0.
    pub fn renumber(&mut self) {
        let mut next = 0;
        self.walk_stmts_mut(&mut |s| {
            s.id = StmtId(next);
            next += 1;
        });
    }

    /// Distinct hole ids in first-occurrence pre-order.
    pub fn holes(&self) -> Vec<HoleId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.walk_exprs(&mut |e| {
            if let Expr::Hole(h) = e {
                if seen.insert(h.clone()) {
                    out.push(h.clone());
                }
            }
        });
        out
    }

    pub fn reach_count(&self) -> usize {
        self.statements().iter().filter(|s| matches!(s.kind, StmtKind::Reach)).count()
    }

    /// Variables assigned anywhere in the program.
    pub fn assigned_vars(&self) -> BTreeSet<&str> {
        self.statements()
            .into_iter()
            .filter_map(|s| match &s.kind {
                StmtKind::Assign(t, _) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Every variable name used anywhere: globals, parameters, assignment targets, reads.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.globals.iter().cloned().collect();
        for f in &self.functions {
            names.extend(f.params.iter().cloned());
        }
        for s in self.statements() {
            if let StmtKind::Assign(t, _) = &s.kind {
                names.insert(t.clone());
            }
        }
        self.walk_exprs(&mut |e| {
            if let Expr::Var(v) = e {
                names.insert(v.clone());
            }
        });
        names
    }

    /// Statement plus expression node count, plus one per global declaration and function.
    pub fn node_count(&self) -> usize {
        let mut n = self.globals.len() + self.functions.len();
        for s in self.statements() {
            n += 1;
            if let Some(e) = s.own_expr() {
                n += e.node_count();
            }
        }
        n
    }
}

fn find_stmt_mut(block: &mut [Stmt], id: StmtId) -> Option<&mut Stmt> {
    for s in block {
        if s.id == id {
            return Some(s);
        }
        for b in s.blocks_mut() {
            if let Some(found) = find_stmt_mut(b, id) {
                return Some(found);
            }
        }
    }
    None
}
