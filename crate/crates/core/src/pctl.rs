//! PCTL state and path formulae, reward queries, and their text syntax.
//!
//! ```text
//! property := state | 'R' '=?' ('[' 'F' state ']' | '(' 'F' state ')')
//! state    := or ; or := and ('|' and)* ; and := unary ('&' unary)*
//! unary    := '!' unary | 'true' | 'false' | ident | '(' state ')'
//!           | 'P' bound ('(' path ')' | '[' path ']')
//! bound    := '=?' | '[' cmp (',' cmp)? ']' | '[' num ',' num ']'
//! path     := 'X' unary | 'F' steps? unary | state 'U' steps? state
//! steps    := '<=' integer
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};
use crate::syntax::{ParseError, Pos, TokenKind, TokenStream};

const RESERVED: &[&str] = &["true", "false", "X", "F", "U", "P", "R"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PctlError {
    #[error("unknown atomic proposition `{0}`")]
    UnknownProposition(String),
}

/// Sub-interval of `[0, 1]` with open or closed ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lower: Rational,
    pub lower_closed: bool,
    pub upper: Rational,
    pub upper_closed: bool,
}

impl Interval {
    pub fn full() -> Self {
        Interval {
            lower: Rational::zero(),
            lower_closed: true,
            upper: Rational::one(),
            upper_closed: true,
        }
    }

    pub fn below(bound: Rational, closed: bool) -> Self {
        Interval {
            upper: bound,
            upper_closed: closed,
            ..Self::full()
        }
    }

    pub fn above(bound: Rational, closed: bool) -> Self {
        Interval {
            lower: bound,
            lower_closed: closed,
            ..Self::full()
        }
    }

    pub fn closed(lower: Rational, upper: Rational) -> Self {
        Interval {
            lower,
            lower_closed: true,
            upper,
            upper_closed: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper || (self.lower == self.upper && !(self.lower_closed && self.upper_closed))
    }

    /// Exact membership; endpoints follow the open/closed flags.
    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lower_closed { *x >= self.lower } else { *x > self.lower };
        let below = if self.upper_closed { *x <= self.upper } else { *x < self.upper };
        above && below
    }

    /// Three-valued membership of every value in `[lo, hi]`: `Some(true)`
    /// when the whole range lies inside, `Some(false)` when it misses the
    /// interval entirely, `None` otherwise.
    pub fn classify(&self, lo: &Rational, hi: &Rational) -> Option<bool> {
        if self.contains(lo) && self.contains(hi) {
            return Some(true);
        }
        let entirely_below = if self.lower_closed { *hi < self.lower } else { *hi <= self.lower };
        let entirely_above = if self.upper_closed { *lo > self.upper } else { *lo >= self.upper };
        if entirely_below || entirely_above || self.is_empty() {
            Some(false)
        } else {
            None
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lower_trivial = self.lower.is_zero() && self.lower_closed;
        let upper_trivial = self.upper.is_one() && self.upper_closed;
        let lo = format_rational(&self.lower);
        let hi = format_rational(&self.upper);
        let lop = if self.lower_closed { ">=" } else { ">" };
        let hip = if self.upper_closed { "<=" } else { "<" };
        match (lower_trivial, upper_trivial) {
            (true, _) => write!(f, "{hip}{hi}"),
            (false, true) => write!(f, "{lop}{lo}"),
            (false, false) if self.lower_closed && self.upper_closed => write!(f, "{lo},{hi}"),
            (false, false) => write!(f, "{lop}{lo},{hip}{hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbBound {
    /// `P=?`: the probability itself is requested.
    Query,
    Within(Interval),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Prob { bound: ProbBound, path: Box<PathFormula> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathFormula {
    Next(StateFormula),
    /// `left U<=bound right`; `None` is the unbounded until.
    Until {
        left: StateFormula,
        right: StateFormula,
        bound: Option<u64>,
    },
}

/// Expected state reward accumulated until a target state is first entered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardQuery {
    pub target: StateFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Property {
    State(StateFormula),
    Reward(RewardQuery),
}

impl StateFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        StateFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∧ ¬b)`
    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn prob(bound: ProbBound, path: PathFormula) -> Self {
        StateFormula::Prob {
            bound,
            path: Box::new(path),
        }
    }

    /// `true U right`
    pub fn eventually(right: StateFormula, bound: Option<u64>) -> PathFormula {
        PathFormula::Until {
            left: StateFormula::True,
            right,
            bound,
        }
    }

    /// Subformulae in post-order: children before their parent.
    pub fn parse_tree(&self) -> Vec<&StateFormula> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a StateFormula>) {
        match self {
            StateFormula::True | StateFormula::Atom(_) => {}
            StateFormula::Not(a) => a.collect(out),
            StateFormula::And(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            StateFormula::Prob { path, .. } => match path.as_ref() {
                PathFormula::Next(a) => a.collect(out),
                PathFormula::Until { left, right, .. } => {
                    left.collect(out);
                    right.collect(out);
                }
            },
        }
        out.push(self);
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        self.parse_tree()
            .into_iter()
            .filter_map(|f| match f {
                StateFormula::Atom(a) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    fn count_queries(&self) -> usize {
        self.parse_tree()
            .into_iter()
            .filter(|f| matches!(f, StateFormula::Prob { bound: ProbBound::Query, .. }))
            .count()
    }

    fn precedence(&self) -> u8 {
        match self {
            StateFormula::And(..) => 1,
            _ => 2,
        }
    }
}

impl Property {
    /// True when the outermost operator asks for a value (`P=?`, `R=?`).
    pub fn is_quantitative(&self) -> bool {
        match self {
            Property::Reward(_) => true,
            Property::State(StateFormula::Prob {
                bound: ProbBound::Query,
                ..
            }) => true,
            Property::State(_) => false,
        }
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        match self {
            Property::State(f) => f.propositions(),
            Property::Reward(q) => q.target.propositions(),
        }
    }

    /// Fails when the property mentions a proposition outside `known`.
    pub fn check_propositions(&self, known: &BTreeSet<String>) -> Result<(), PctlError> {
        match self.propositions().into_iter().find(|p| !known.contains(p)) {
            Some(p) => Err(PctlError::UnknownProposition(p)),
            None => Ok(()),
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => write!(f, "true"),
            StateFormula::Atom(a) => write!(f, "{a}"),
            StateFormula::Not(a) => {
                if a.precedence() < 2 {
                    write!(f, "!({a})")
                } else {
                    write!(f, "!{a}")
                }
            }
            StateFormula::And(a, b) => {
                write!(f, "{a} & ")?;
                if b.precedence() < 2 {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            StateFormula::Prob { bound, path } => match bound {
                ProbBound::Query => write!(f, "P=?({path})"),
                ProbBound::Within(j) => write!(f, "P[{j}]({path})"),
            },
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Next(a) => {
                if a.precedence() < 2 {
                    write!(f, "X ({a})")
                } else {
                    write!(f, "X {a}")
                }
            }
            PathFormula::Until { left, right, bound } => {
                write!(f, "{left} U")?;
                if let Some(k) = bound {
                    write!(f, "<={k}")?;
                }
                write!(f, " {right}")
            }
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::State(s) => write!(f, "{s}"),
            Property::Reward(q) => write!(f, "R=?[F {}]", q.target),
        }
    }
}

impl FromStr for Property {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_property(s)
    }
}

pub fn parse_property(text: &str) -> Result<Property, ParseError> {
    let mut ts = TokenStream::new(text)?;
    let start = ts.peek().pos;
    let property = if ts.at_ident("R") {
        ts.advance();
        ts.eat_punct("=?");
        let close = if ts.eat_punct("[") {
            "]"
        } else {
            ts.expect_punct("(")?;
            ")"
        };
        ts.expect_keyword("F")?;
        let target = parse_state(&mut ts)?;
        ts.expect_punct(close)?;
        Property::Reward(RewardQuery { target })
    } else {
        Property::State(parse_state(&mut ts)?)
    };
    ts.expect_eof()?;
    let queries = match &property {
        Property::State(f) => f.count_queries(),
        Property::Reward(q) => q.target.count_queries() + 1,
    };
    if queries > usize::from(property.is_quantitative()) {
        return Err(ParseError::new(
            start,
            "only the outermost operator may request a value with `=?`",
        ));
    }
    Ok(property)
}

pub fn parse_state_formula(text: &str) -> Result<StateFormula, ParseError> {
    match parse_property(text)? {
        Property::State(f) => Ok(f),
        Property::Reward(_) => Err(ParseError::new(Pos { line: 1, column: 1 }, "expected a state formula")),
    }
}

fn parse_state(ts: &mut TokenStream) -> Result<StateFormula, ParseError> {
    let mut left = parse_and(ts)?;
    while ts.eat_punct("|") {
        let right = parse_and(ts)?;
        left = StateFormula::or(left, right);
    }
    Ok(left)
}

fn parse_and(ts: &mut TokenStream) -> Result<StateFormula, ParseError> {
    let mut left = parse_unary(ts)?;
    while ts.eat_punct("&") {
        let right = parse_unary(ts)?;
        left = StateFormula::and(left, right);
    }
    Ok(left)
}

fn parse_unary(ts: &mut TokenStream) -> Result<StateFormula, ParseError> {
    if ts.eat_punct("!") {
        return Ok(StateFormula::not(parse_unary(ts)?));
    }
    if ts.eat_punct("(") {
        let inner = parse_state(ts)?;
        ts.expect_punct(")")?;
        return Ok(inner);
    }
    let tok = ts.peek().clone();
    match &tok.kind {
        TokenKind::Ident(w) if w == "true" => {
            ts.advance();
            Ok(StateFormula::True)
        }
        TokenKind::Ident(w) if w == "false" => {
            ts.advance();
            Ok(StateFormula::not(StateFormula::True))
        }
        TokenKind::Ident(w) if w == "P" => {
            ts.advance();
            parse_prob(ts)
        }
        TokenKind::Ident(w) if RESERVED.contains(&w.as_str()) => Err(ts.unexpected("a state formula")),
        TokenKind::Ident(w) => {
            ts.advance();
            Ok(StateFormula::Atom(w.clone()))
        }
        _ => Err(ts.unexpected("a state formula")),
    }
}

fn parse_prob(ts: &mut TokenStream) -> Result<StateFormula, ParseError> {
    let bound = if ts.eat_punct("=?") {
        ProbBound::Query
    } else {
        ts.expect_punct("[")?;
        let pos = ts.peek().pos;
        let j = parse_interval(ts)?;
        ts.expect_punct("]")?;
        if j.lower < Rational::zero() || j.upper > Rational::one() {
            return Err(ParseError::new(pos, "probability bound outside [0, 1]"));
        }
        if j.is_empty() {
            return Err(ParseError::new(pos, "probability interval is empty"));
        }
        ProbBound::Within(j)
    };
    let close = if ts.eat_punct("[") {
        "]"
    } else {
        ts.expect_punct("(")?;
        ")"
    };
    let path = parse_path(ts)?;
    ts.expect_punct(close)?;
    Ok(StateFormula::prob(bound, path))
}

fn parse_interval(ts: &mut TokenStream) -> Result<Interval, ParseError> {
    if matches!(ts.peek().kind, TokenKind::Number(_)) || ts.at_punct("-") {
        let lo = ts.expect_rational()?;
        ts.expect_punct(",")?;
        let hi = ts.expect_rational()?;
        return Ok(Interval::closed(lo, hi));
    }
    let mut j = Interval::full();
    let mut first = true;
    loop {
        let (op, closed) = if ts.eat_punct("<=") {
            ("<", true)
        } else if ts.eat_punct("<") {
            ("<", false)
        } else if ts.eat_punct(">=") {
            (">", true)
        } else if ts.eat_punct(">") {
            (">", false)
        } else {
            return Err(ts.unexpected(if first { "a comparison or a number" } else { "a comparison" }));
        };
        let value = ts.expect_rational()?;
        if op == "<" {
            j.upper = value;
            j.upper_closed = closed;
        } else {
            j.lower = value;
            j.lower_closed = closed;
        }
        first = false;
        if !ts.eat_punct(",") {
            return Ok(j);
        }
    }
}

fn parse_steps(ts: &mut TokenStream) -> Result<Option<u64>, ParseError> {
    if !ts.eat_punct("<=") {
        return Ok(None);
    }
    let tok = ts.advance();
    match &tok.kind {
        TokenKind::Number(n) => n
            .parse::<u64>()
            .map(Some)
            .map_err(|_| ParseError::new(tok.pos, format!("step bound `{n}` is not a natural number"))),
        _ => Err(ParseError::new(tok.pos, format!("expected a step bound, found {}", tok.kind))),
    }
}

fn parse_path(ts: &mut TokenStream) -> Result<PathFormula, ParseError> {
    if ts.eat_ident("X") {
        return Ok(PathFormula::Next(parse_unary(ts)?));
    }
    if ts.eat_ident("F") {
        let bound = parse_steps(ts)?;
        return Ok(StateFormula::eventually(parse_unary(ts)?, bound));
    }
    let left = parse_state(ts)?;
    ts.expect_keyword("U")?;
    let bound = parse_steps(ts)?;
    let right = parse_state(ts)?;
    Ok(PathFormula::Until { left, right, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn p(s: &str) -> Property {
        parse_property(s).unwrap()
    }

    #[test]
    fn failure_threshold() {
        let expected = Property::State(StateFormula::prob(
            ProbBound::Within(Interval::below(rat(1, 10), false)),
            StateFormula::eventually(StateFormula::atom("failure"), None),
        ));
        assert_eq!(p("P[<0.1](F failure)"), expected);
        assert!(!expected.is_quantitative());
    }

    #[test]
    fn trivial_threshold_and_reward() {
        match p("P[>=0](X a)") {
            Property::State(StateFormula::Prob {
                bound: ProbBound::Within(j),
                ..
            }) => assert_eq!(j, Interval::full()),
            other => panic!("unexpected {other:?}"),
        }
        let r = p("R[F end]");
        assert_eq!(
            r,
            Property::Reward(RewardQuery {
                target: StateFormula::atom("end")
            })
        );
        assert_eq!(p("R=? [F end]"), r);
        assert!(r.is_quantitative());
        assert!(p("P=? (F failure)").is_quantitative());
    }

    #[test]
    fn nested_query_is_rejected() {
        assert!(parse_property("P[<0.5](X P=?(X a))").is_err());
        assert!(parse_property("a & P=?(X a)").is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_property("P[<0.1](F )").unwrap_err();
        assert_eq!((e.line, e.column), (1, 11));
        let e = parse_property("P[<1.5](F a)").unwrap_err();
        assert!(e.message.contains("outside"));
    }

    #[test]
    fn parse_tree_orders_children_first() {
        let f = parse_state_formula("a").unwrap();
        assert_eq!(f.parse_tree(), vec![&StateFormula::atom("a")]);
        let f = parse_state_formula("!a & b").unwrap();
        let rendered: Vec<String> = f.parse_tree().iter().map(|g| g.to_string()).collect();
        assert_eq!(rendered, ["a", "!a", "b", "!a & b"]);
        let f = parse_state_formula("P[<0.1](F failure)").unwrap();
        let rendered: Vec<String> = f.parse_tree().iter().map(|g| g.to_string()).collect();
        assert_eq!(rendered, ["true", "failure", "P[<0.1](true U failure)"]);
    }

    #[test]
    fn eventually_is_sugar() {
        assert_eq!(p("P[<0.2](F<=4 a)"), p("P[<0.2](true U<=4 a)"));
        assert_eq!(p("P=?(F a)"), p("P=?(true U a)"));
    }

    #[test]
    fn interval_forms() {
        assert_eq!(p("P[0.2,0.7](X a)").to_string(), "P[0.2,0.7](X a)");
        assert_eq!(p("P[>0.2,<=0.7](X a)").to_string(), "P[>0.2,<=0.7](X a)");
        assert_eq!(p("P[>=1/3](X a)").to_string(), "P[>=1/3](X a)");
        assert!(parse_property("P[0.7,0.2](X a)").is_err());
    }

    #[test]
    fn classify_is_three_valued() {
        let j = Interval::below(rat(1, 10), false);
        assert_eq!(j.classify(&rat(95, 1000), &rat(97, 1000)), Some(true));
        assert_eq!(j.classify(&rat(1, 10), &rat(2, 10)), Some(false));
        assert_eq!(j.classify(&rat(9, 100), &rat(11, 100)), None);
        assert_eq!(Interval::full().classify(&rat(0, 1), &rat(1, 1)), Some(true));
    }

    fn arb_state() -> impl Strategy<Value = StateFormula> {
        let leaf = prop_oneof![
            Just(StateFormula::True),
            prop_oneof![Just("a"), Just("b"), Just("fail")].prop_map(StateFormula::atom),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            let interval = (0i64..=10, 0i64..=10, any::<bool>(), any::<bool>()).prop_map(|(x, y, c1, c2)| {
                let (lo, hi) = (x.min(y), x.max(y));
                let (c1, c2) = if lo == hi { (true, true) } else { (c1, c2) };
                Interval {
                    lower: rat(lo, 10),
                    lower_closed: c1,
                    upper: rat(hi, 10),
                    upper_closed: c2,
                }
            });
            prop_oneof![
                inner.clone().prop_map(StateFormula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| StateFormula::and(a, b)),
                (interval.clone(), inner.clone())
                    .prop_map(|(j, a)| StateFormula::prob(ProbBound::Within(j), PathFormula::Next(a))),
                (interval, inner.clone(), inner, proptest::option::of(0u64..20)).prop_map(|(j, l, r, k)| {
                    StateFormula::prob(
                        ProbBound::Within(j),
                        PathFormula::Until {
                            left: l,
                            right: r,
                            bound: k,
                        },
                    )
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_state()) {
            let prop = Property::State(f);
            prop_assert_eq!(parse_property(&prop.to_string()).unwrap(), prop.clone());
            let reward = Property::Reward(RewardQuery { target: match prop { Property::State(f) => f, _ => unreachable!() } });
            prop_assert_eq!(parse_property(&reward.to_string()).unwrap(), reward);
        }
    }
}
