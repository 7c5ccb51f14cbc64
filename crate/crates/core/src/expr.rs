//! Boolean expressions over named variables.
//!
//! The same language serves as feature guards (variables are features) and as
//! observation guards in composed processes (variables are atomic
//! propositions of a partner component).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::{ParseError, TokenStream};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unbound variable `{0}`")]
pub struct UnboundVariable(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    /// Conjunction of all items; `true` when empty.
    pub fn all(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::Const(true))
    }

    /// Disjunction of all items; `false` when empty.
    pub fn any(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::or)
            .unwrap_or(Expr::Const(false))
    }

    /// Conjunction of literals fixing every variable in `assignment`.
    pub fn minterm<'a>(assignment: impl IntoIterator<Item = (&'a str, bool)>) -> Expr {
        Expr::all(assignment.into_iter().map(|(name, value)| {
            if value {
                Expr::var(name)
            } else {
                Expr::not(Expr::var(name))
            }
        }))
    }

    pub fn is_const(&self, value: bool) -> bool {
        matches!(self, Expr::Const(v) if *v == value)
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<bool, UnboundVariable>
    where
        F: Fn(&str) -> Option<bool>,
    {
        Ok(match self {
            Expr::Const(v) => *v,
            Expr::Var(name) => lookup(name).ok_or_else(|| UnboundVariable(name.clone()))?,
            Expr::Not(e) => !e.eval(lookup)?,
            Expr::And(a, b) => a.eval(lookup)? && b.eval(lookup)?,
            Expr::Or(a, b) => a.eval(lookup)? || b.eval(lookup)?,
            Expr::Implies(a, b) => !a.eval(lookup)? || b.eval(lookup)?,
            Expr::Xor(a, b) => a.eval(lookup)? != b.eval(lookup)?,
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Xor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces the variables for which `lookup` answers and folds constants.
    pub fn substitute<F>(&self, lookup: &F) -> Expr
    where
        F: Fn(&str) -> Option<bool>,
    {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(name) => match lookup(name) {
                Some(v) => Expr::Const(v),
                None => Expr::Var(name.clone()),
            },
            Expr::Not(e) => mk_not(e.substitute(lookup)),
            Expr::And(a, b) => mk_and(a.substitute(lookup), b.substitute(lookup)),
            Expr::Or(a, b) => mk_or(a.substitute(lookup), b.substitute(lookup)),
            Expr::Implies(a, b) => mk_implies(a.substitute(lookup), b.substitute(lookup)),
            Expr::Xor(a, b) => mk_xor(a.substitute(lookup), b.substitute(lookup)),
        }
    }

    /// Constant folding and double-negation removal.
    pub fn simplify(&self) -> Expr {
        self.substitute(&|_| None)
    }

    /// Brute-force satisfiability over the expression's own variables.
    /// Expressions with more than 20 variables are conservatively reported
    /// satisfiable.
    pub fn is_satisfiable(&self) -> bool {
        let vars: Vec<String> = self.vars().into_iter().collect();
        if vars.len() > 20 {
            return true;
        }
        let compiled = match self.compile(&vars) {
            Ok(c) => c,
            Err(_) => return true,
        };
        (0u64..(1u64 << vars.len())).any(|mask| compiled.eval(mask))
    }

    /// Resolves variable names to bit positions of `names`.
    pub fn compile(&self, names: &[String]) -> Result<CompiledExpr, UnboundVariable> {
        Ok(match self {
            Expr::Const(v) => CompiledExpr::Const(*v),
            Expr::Var(name) => {
                let idx = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| UnboundVariable(name.clone()))?;
                CompiledExpr::Var(idx as u32)
            }
            Expr::Not(e) => CompiledExpr::Not(Box::new(e.compile(names)?)),
            Expr::And(a, b) => CompiledExpr::And(Box::new(a.compile(names)?), Box::new(b.compile(names)?)),
            Expr::Or(a, b) => CompiledExpr::Or(Box::new(a.compile(names)?), Box::new(b.compile(names)?)),
            Expr::Implies(a, b) => {
                CompiledExpr::Or(Box::new(CompiledExpr::Not(Box::new(a.compile(names)?))), Box::new(b.compile(names)?))
            }
            Expr::Xor(a, b) => CompiledExpr::Xor(Box::new(a.compile(names)?), Box::new(b.compile(names)?)),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Implies(..) => 1,
            Expr::Or(..) => 2,
            Expr::Xor(..) => 3,
            Expr::And(..) => 4,
            Expr::Not(_) => 5,
            Expr::Const(_) | Expr::Var(_) => 6,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(v) => write!(f, "{v}")?,
            Expr::Var(name) => write!(f, "{name}")?,
            Expr::Not(e) => {
                write!(f, "!")?;
                e.write_prec(f, 5)?;
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                let op = match self {
                    Expr::And(..) => "&",
                    Expr::Or(..) => "|",
                    _ => "^",
                };
                a.write_prec(f, prec)?;
                write!(f, " {op} ")?;
                b.write_prec(f, prec + 1)?;
            }
            Expr::Implies(a, b) => {
                a.write_prec(f, prec + 1)?;
                write!(f, " -> ")?;
                b.write_prec(f, prec)?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn mk_not(e: Expr) -> Expr {
    match e {
        Expr::Const(v) => Expr::Const(!v),
        Expr::Not(inner) => *inner,
        other => Expr::not(other),
    }
}

fn mk_and(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(false), _) | (_, Expr::Const(false)) => Expr::Const(false),
        (Expr::Const(true), x) | (x, Expr::Const(true)) => x,
        (a, b) if a == b => a,
        (a, b) => Expr::and(a, b),
    }
}

fn mk_or(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(true), _) | (_, Expr::Const(true)) => Expr::Const(true),
        (Expr::Const(false), x) | (x, Expr::Const(false)) => x,
        (a, b) if a == b => a,
        (a, b) => Expr::or(a, b),
    }
}

fn mk_implies(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(false), _) | (_, Expr::Const(true)) => Expr::Const(true),
        (Expr::Const(true), x) => x,
        (x, Expr::Const(false)) => mk_not(x),
        (a, b) => Expr::implies(a, b),
    }
}

fn mk_xor(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(false), x) | (x, Expr::Const(false)) => x,
        (Expr::Const(true), x) | (x, Expr::Const(true)) => mk_not(x),
        (a, b) => Expr::xor(a, b),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_feature_expression(s)
    }
}

/// Expression with variables resolved to bit positions of a `u64` mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledExpr {
    Const(bool),
    Var(u32),
    Not(Box<CompiledExpr>),
    And(Box<CompiledExpr>, Box<CompiledExpr>),
    Or(Box<CompiledExpr>, Box<CompiledExpr>),
    Xor(Box<CompiledExpr>, Box<CompiledExpr>),
}

impl CompiledExpr {
    pub fn eval(&self, mask: u64) -> bool {
        match self {
            CompiledExpr::Const(v) => *v,
            CompiledExpr::Var(i) => mask >> i & 1 == 1,
            CompiledExpr::Not(e) => !e.eval(mask),
            CompiledExpr::And(a, b) => a.eval(mask) && b.eval(mask),
            CompiledExpr::Or(a, b) => a.eval(mask) || b.eval(mask),
            CompiledExpr::Xor(a, b) => a.eval(mask) != b.eval(mask),
        }
    }
}

/// Parses a complete expression.
///
/// Precedence from loosest to tightest: `->` (right associative), `|`, `^`,
/// `&`, `!`. Constants are `true` and `false`.
pub fn parse_feature_expression(text: &str) -> Result<Expr, ParseError> {
    let mut ts = TokenStream::new(text)?;
    let e = parse_expr(&mut ts)?;
    ts.expect_eof()?;
    Ok(e)
}

/// Parses one expression from the stream, stopping at the first token that
/// cannot continue it.
pub fn parse_expr(ts: &mut TokenStream) -> Result<Expr, ParseError> {
    let lhs = parse_or(ts)?;
    if ts.eat_punct("->") {
        let rhs = parse_expr(ts)?;
        return Ok(Expr::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_or(ts: &mut TokenStream) -> Result<Expr, ParseError> {
    let mut lhs = parse_xor(ts)?;
    while ts.eat_punct("|") {
        lhs = Expr::or(lhs, parse_xor(ts)?);
    }
    Ok(lhs)
}

fn parse_xor(ts: &mut TokenStream) -> Result<Expr, ParseError> {
    let mut lhs = parse_and(ts)?;
    while ts.eat_punct("^") {
        lhs = Expr::xor(lhs, parse_and(ts)?);
    }
    Ok(lhs)
}

fn parse_and(ts: &mut TokenStream) -> Result<Expr, ParseError> {
    let mut lhs = parse_unary(ts)?;
    while ts.eat_punct("&") {
        lhs = Expr::and(lhs, parse_unary(ts)?);
    }
    Ok(lhs)
}

fn parse_unary(ts: &mut TokenStream) -> Result<Expr, ParseError> {
    if ts.eat_punct("!") {
        return Ok(Expr::not(parse_unary(ts)?));
    }
    if ts.eat_punct("(") {
        let e = parse_expr(ts)?;
        ts.expect_punct(")")?;
        return Ok(e);
    }
    let (name, _) = ts.expect_ident().map_err(|_| ts.unexpected("a feature name, `true`, `false`, `!` or `(`"))?;
    Ok(match name.as_str() {
        "true" => Expr::Const(true),
        "false" => Expr::Const(false),
        _ => Expr::Var(name),
    })
}
