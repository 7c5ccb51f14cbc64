//! Family-wide iterative approximation. All products are advanced together
//! on dense per-product vectors; every step yields a lower and an upper
//! bound, and iteration stops once they are closer than `ε`.
//!
//! Unbounded operators iterate in [`Fixed`] arithmetic (`f64` in float
//! mode): lower bounds round down, upper bounds round up. `X` and `U≤k` are
//! computed exactly.

use std::collections::VecDeque;
use std::time::Instant;

use num_traits::{One, Zero};

use crate::family::{CheckOptions, Engine, EngineError, FamilyResult, ProductResult, Value, Verdict};
use crate::fixed::{BoundNum, Fixed};
use crate::model::{DenseFdtmc, Fdtmc};
use crate::pctl::{PathFormula, ProbBound, Property, StateFormula};
use crate::rational::{format_approx, Rational};

/// `[state][product]`
type Grid<T> = Vec<Vec<T>>;
type Sets = Grid<bool>;
type Rows<N> = Vec<Vec<(usize, Vec<N>)>>;

fn indicator<N: BoundNum>(b: bool) -> N {
    if b {
        N::one()
    } else {
        N::zero()
    }
}

fn to_grid<N: BoundNum>(s: &Sets) -> Grid<N> {
    s.iter().map(|row| row.iter().map(|b| indicator(*b)).collect()).collect()
}

fn negate(s: &Sets) -> Sets {
    s.iter().map(|row| row.iter().map(|b| !b).collect()).collect()
}

fn conjoin(a: &Sets, b: &Sets) -> Sets {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p && *q).collect())
        .collect()
}

fn disjoin(a: &Sets, b: &Sets) -> Sets {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p || *q).collect())
        .collect()
}

fn max_in<N: BoundNum>(values: impl Iterator<Item = N>) -> N {
    values.fold(N::zero(), |acc, v| if v > acc { v } else { acc })
}

struct Ctx<'a, N> {
    exact: &'a DenseFdtmc<Rational>,
    down: Rows<N>,
    up: Rows<N>,
    products: usize,
    preds: Vec<Vec<usize>>,
    options: &'a CheckOptions,
    epsilon: N,
    warnings: Vec<String>,
}

impl<'a, N: BoundNum> Ctx<'a, N> {
    fn new(exact: &'a DenseFdtmc<Rational>, options: &'a CheckOptions, epsilon: &Rational) -> Self {
        let convert = |up: bool| -> Rows<N> {
            exact
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|(t, p)| (*t, p.values.iter().map(|v| N::from_rational(v, up)).collect()))
                        .collect()
                })
                .collect()
        };
        Ctx {
            exact,
            down: convert(false),
            up: convert(true),
            products: exact.products,
            preds: exact.predecessors(),
            options,
            epsilon: N::from_rational(epsilon, false),
            warnings: Vec::new(),
        }
    }

    fn states(&self) -> usize {
        self.exact.len()
    }

    fn constant_sets(&self, b: bool) -> Sets {
        vec![vec![b; self.products]; self.states()]
    }

    fn edge(&self, s: usize, t: usize, p: usize) -> bool {
        self.exact.rows[s]
            .iter()
            .any(|(u, prob)| *u == t && !prob.values[p].is_zero())
    }

    /// States that reach `right` through `left` states with positive
    /// probability, per product.
    fn can_reach(&self, left: &Sets, right: &Sets) -> Sets {
        let mut reach = right.clone();
        for p in 0..self.products {
            let mut queue: VecDeque<usize> = (0..self.states()).filter(|&s| right[s][p]).collect();
            while let Some(t) = queue.pop_front() {
                for &s in &self.preds[t] {
                    if !reach[s][p] && left[s][p] && self.edge(s, t, p) {
                        reach[s][p] = true;
                        queue.push_back(s);
                    }
                }
            }
        }
        reach
    }

    /// States reaching `target` almost surely, per product.
    fn almost_sure(&self, target: &Sets) -> Sets {
        let reach = self.can_reach(&self.constant_sets(true), target);
        let mut bad = negate(&reach);
        for p in 0..self.products {
            let mut queue: VecDeque<usize> = (0..self.states()).filter(|&s| bad[s][p]).collect();
            while let Some(t) = queue.pop_front() {
                for &s in &self.preds[t] {
                    if !bad[s][p] && !target[s][p] && self.edge(s, t, p) {
                        bad[s][p] = true;
                        queue.push_back(s);
                    }
                }
            }
        }
        negate(&bad)
    }

    /// `Σ_t P(s,t) · v(t)` for the listed products, rounded as requested.
    /// Successors outside `within` count as zero.
    fn sweep(&self, s: usize, active: &[usize], v: &Grid<N>, up: bool, within: Option<&Sets>) -> Vec<N> {
        let rows = if up { &self.up } else { &self.down };
        let mut acc = vec![N::zero(); active.len()];
        for (t, prob) in &rows[s] {
            let target = &v[*t];
            for (slot, &p) in active.iter().enumerate() {
                let (w, x) = (&prob[p], &target[p]);
                if w.is_zero() || x.is_zero() || within.is_some_and(|m| !m[*t][p]) {
                    continue;
                }
                acc[slot] = acc[slot].add(&w.mul(x, up));
            }
        }
        acc
    }

    /// Exact `Σ_t P(s,t) · v(t)` at one product.
    fn exact_sum(&self, s: usize, p: usize, v: &Grid<Rational>) -> Rational {
        self.exact.rows[s].iter().fold(Rational::zero(), |acc, (t, prob)| {
            let (w, x) = (&prob.values[p], &v[*t][p]);
            if w.is_zero() || x.is_zero() {
                acc
            } else {
                acc + w * x
            }
        })
    }

    fn exact_next(&self, target: &Sets) -> Grid<Rational> {
        let v: Grid<Rational> = target
            .iter()
            .map(|row| row.iter().map(|b| if *b { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        (0..self.states())
            .map(|s| (0..self.products).map(|p| self.exact_sum(s, p, &v)).collect())
            .collect()
    }

    fn exact_bounded_until(&self, left: &Sets, right: &Sets, k: u64) -> Grid<Rational> {
        let cont = conjoin(left, &negate(right));
        let mut x: Grid<Rational> = right
            .iter()
            .map(|row| row.iter().map(|b| if *b { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        for _ in 0..k {
            let next: Grid<Rational> = (0..self.states())
                .map(|s| {
                    (0..self.products)
                        .map(|p| if cont[s][p] { self.exact_sum(s, p, &x) } else { x[s][p].clone() })
                        .collect()
                })
                .collect();
            if next == x {
                break;
            }
            x = next;
        }
        x
    }

    /// Lower and upper satisfaction sets.
    fn sat(&mut self, f: &StateFormula) -> Result<(Sets, Sets), EngineError> {
        Ok(match f {
            StateFormula::True => (self.constant_sets(true), self.constant_sets(true)),
            StateFormula::Atom(a) => {
                let s: Sets = (0..self.states())
                    .map(|s| vec![self.exact.labels[s].contains(a.as_str()); self.products])
                    .collect();
                (s.clone(), s)
            }
            StateFormula::Not(a) => {
                let (must, may) = self.sat(a)?;
                (negate(&may), negate(&must))
            }
            StateFormula::And(a, b) => {
                let (am, ay) = self.sat(a)?;
                let (bm, by) = self.sat(b)?;
                (conjoin(&am, &bm), conjoin(&ay, &by))
            }
            StateFormula::Prob { bound, path } => {
                let ProbBound::Within(j) = bound else {
                    return Err(EngineError::NestedQuery);
                };
                let all: Vec<usize> = (0..self.states()).collect();
                let (lo, hi) = self.path_bounds(path, &all)?;
                let mut must = self.constant_sets(false);
                let mut may = self.constant_sets(false);
                for s in 0..self.states() {
                    for p in 0..self.products {
                        match j.classify(&lo[s][p], &hi[s][p]) {
                            Some(true) => {
                                must[s][p] = true;
                                may[s][p] = true;
                            }
                            Some(false) => {}
                            None => may[s][p] = true,
                        }
                    }
                }
                (must, may)
            }
        })
    }

    /// Per-state lower and upper bounds of a path formula; iteration stops
    /// once the bounds at `relevant` states are tight.
    fn path_bounds(
        &mut self,
        path: &PathFormula,
        relevant: &[usize],
    ) -> Result<(Grid<Rational>, Grid<Rational>), EngineError> {
        match path {
            PathFormula::Next(f) => {
                let (must, may) = self.sat(f)?;
                let lo = self.exact_next(&must);
                let hi = if must == may { lo.clone() } else { self.exact_next(&may) };
                Ok((lo, hi))
            }
            PathFormula::Until { left, right, bound } => {
                let (lm, ly) = self.sat(left)?;
                let (rm, ry) = self.sat(right)?;
                let same = lm == ly && rm == ry;
                match bound {
                    Some(k) => {
                        let lo = self.exact_bounded_until(&lm, &rm, *k);
                        let hi = if same { lo.clone() } else { self.exact_bounded_until(&ly, &ry, *k) };
                        Ok((lo, hi))
                    }
                    None => {
                        let mut low = UntilRun::new(self, &lm, &rm);
                        self.converge(&mut low, relevant);
                        if same {
                            return Ok((low.lower(), low.upper()));
                        }
                        let mut high = UntilRun::new(self, &ly, &ry);
                        self.converge(&mut high, relevant);
                        Ok((low.lower(), high.upper()))
                    }
                }
            }
        }
    }

    fn converge(&mut self, run: &mut UntilRun<N>, relevant: &[usize]) {
        if let Some(k) = self.options.bound {
            let all: Vec<usize> = (0..self.products).collect();
            for _ in 0..k {
                run.step(self, &all, self.options.frontier);
            }
            return;
        }
        let mut done = vec![false; self.products];
        loop {
            for (p, d) in done.iter_mut().enumerate() {
                if !*d && relevant.iter().all(|&s| run.width(s, p) < self.epsilon) {
                    *d = true;
                }
            }
            let active: Vec<usize> = (0..self.products).filter(|&p| !done[p]).collect();
            if active.is_empty() {
                return;
            }
            if run.depth >= self.options.max_depth {
                let worst = max_in(relevant.iter().flat_map(|&s| active.iter().map(move |&p| (s, p))).map(|(s, p)| run.width(s, p)));
                self.warnings.push(format!(
                    "depth ceiling {} reached with undecided mass {}",
                    run.depth,
                    format_approx(&worst.to_rational(), 6)
                ));
                return;
            }
            run.step(self, &active, self.options.frontier);
        }
    }
}

/// `lo` is the probability of reaching `right` within `depth` steps through
/// `left`; `hi` bounds it from above, counting undecided mass at states
/// that can still reach `right`.
struct UntilRun<N> {
    cont: Sets,
    live: Sets,
    lo: Grid<N>,
    hi: Grid<N>,
    changed_lo: Vec<bool>,
    changed_hi: Vec<bool>,
    depth: u64,
}

impl<N: BoundNum> UntilRun<N> {
    fn new(ctx: &Ctx<'_, N>, left: &Sets, right: &Sets) -> Self {
        let cont = conjoin(left, &negate(right));
        let live = conjoin(&cont, &ctx.can_reach(left, right));
        UntilRun {
            lo: to_grid(right),
            hi: to_grid(&disjoin(right, &live)),
            cont,
            live,
            changed_lo: vec![true; ctx.states()],
            changed_hi: vec![true; ctx.states()],
            depth: 0,
        }
    }

    fn width(&self, s: usize, p: usize) -> N {
        self.hi[s][p].sub(&self.lo[s][p])
    }

    fn lower(&self) -> Grid<Rational> {
        self.lo.iter().map(|row| row.iter().map(N::to_rational).collect()).collect()
    }

    fn upper(&self) -> Grid<Rational> {
        self.hi.iter().map(|row| row.iter().map(N::to_rational).collect()).collect()
    }

    /// One Jacobi step on the listed products. With `frontier`, states none
    /// of whose successors changed are skipped.
    fn step(&mut self, ctx: &Ctx<'_, N>, active: &[usize], frontier: bool) {
        let n = ctx.states();
        let touched = |changed: &[bool], s: usize| ctx.exact.rows[s].iter().any(|(t, _)| changed[*t]);
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        let mut changed_lo = vec![false; n];
        let mut changed_hi = vec![false; n];
        for s in 0..n {
            if !frontier || touched(&self.changed_lo, s) {
                let sums = ctx.sweep(s, active, &self.lo, false, None);
                for (v, &p) in sums.into_iter().zip(active) {
                    if self.cont[s][p] && v > lo[s][p] {
                        lo[s][p] = v;
                        changed_lo[s] = true;
                    }
                }
            }
            if !frontier || touched(&self.changed_hi, s) {
                let sums = ctx.sweep(s, active, &self.hi, true, None);
                for (v, &p) in sums.into_iter().zip(active) {
                    if self.live[s][p] && v < hi[s][p] {
                        hi[s][p] = v;
                        changed_hi[s] = true;
                    }
                }
            }
        }
        self.lo = lo;
        self.hi = hi;
        self.changed_lo = changed_lo;
        self.changed_hi = changed_hi;
        self.depth += 1;
    }
}

/// Bounds of the expected reward until `target` at the initial
/// distribution, per product; `None` when the reward is infinite.
fn reward_bounds<N: BoundNum>(
    ctx: &mut Ctx<'_, N>,
    target: &Sets,
) -> Result<Vec<Option<(Rational, Rational)>>, EngineError> {
    let rewards = ctx.exact.rewards.as_ref().ok_or(EngineError::MissingRewards)?;
    let finite = ctx.almost_sure(target);
    let work = conjoin(&finite, &negate(target));
    let n = ctx.states();
    let all: Vec<usize> = (0..ctx.products).collect();
    let entry = |up: bool| -> Grid<N> {
        rewards
            .iter()
            .map(|r| r.values.iter().map(|v| N::from_rational(v, up)).collect())
            .collect()
    };
    // reward earned by the next step, whichever state it enters
    let (entry_lo, entry_hi) = (entry(false), entry(true));
    let gain_lo: Grid<N> = (0..n).map(|s| ctx.sweep(s, &all, &entry_lo, false, None)).collect();
    let gain_hi: Grid<N> = (0..n).map(|s| ctx.sweep(s, &all, &entry_hi, true, None)).collect();
    let initial = ctx.exact.initial.clone();
    let is_finite: Vec<bool> = (0..ctx.products)
        .map(|p| initial.iter().all(|(s, _)| finite[*s][p]))
        .collect();
    let mut e_lo: Grid<N> = vec![vec![N::zero(); ctx.products]; n];
    let mut e_hi = e_lo.clone();
    let mut u: Grid<N> = to_grid(&work);
    let mut best: Vec<Option<(Rational, Rational)>> = vec![None; ctx.products];
    let mut best_hi: Vec<Option<Rational>> = vec![None; ctx.products];
    let mut done: Vec<bool> = is_finite.iter().map(|f| !f).collect();
    let epsilon = ctx.epsilon.to_rational();
    let mut depth = 0u64;
    loop {
        let fixed = ctx.options.bound.is_some_and(|k| depth >= k);
        for p in 0..ctx.products {
            if done[p] {
                continue;
            }
            let work = &work;
            let working = || (0..n).filter(move |&s| work[s][p]);
            let max_u = max_in(working().map(|s| u[s][p].clone()));
            let max_e = max_in(working().map(|s| e_hi[s][p].clone()));
            let lo: Rational = initial.iter().map(|(s, w)| w * e_lo[*s][p].to_rational()).sum();
            let hi = if max_u < N::one() {
                let b = max_e.div(&N::one().sub(&max_u), true);
                let candidate: Rational = initial
                    .iter()
                    .map(|(s, w)| w * e_hi[*s][p].add(&u[*s][p].mul(&b, true)).to_rational())
                    .sum();
                let hi = match &best_hi[p] {
                    Some(old) if *old < candidate => old.clone(),
                    _ => candidate,
                };
                best_hi[p] = Some(hi.clone());
                Some(hi)
            } else {
                best_hi[p].clone()
            };
            match hi {
                Some(hi) => {
                    if &hi - &lo < epsilon || fixed {
                        done[p] = true;
                    }
                    best[p] = Some((lo, hi));
                }
                None => {
                    done[p] = fixed;
                    best[p] = Some((lo.clone(), lo));
                }
            }
        }
        let active: Vec<usize> = (0..ctx.products).filter(|&p| !done[p]).collect();
        if active.is_empty() {
            break;
        }
        if depth >= ctx.options.max_depth {
            ctx.warnings
                .push(format!("depth ceiling {depth} reached before the reward bounds closed"));
            break;
        }
        let mut next_lo = e_lo.clone();
        let mut next_hi = e_hi.clone();
        let mut next_u = u.clone();
        for s in 0..n {
            let carry_lo = ctx.sweep(s, &active, &e_lo, false, Some(&work));
            let carry_hi = ctx.sweep(s, &active, &e_hi, true, Some(&work));
            let mass = ctx.sweep(s, &active, &u, true, None);
            for (slot, &p) in active.iter().enumerate() {
                if work[s][p] {
                    next_lo[s][p] = gain_lo[s][p].add(&carry_lo[slot]);
                    next_hi[s][p] = gain_hi[s][p].add(&carry_hi[slot]);
                    next_u[s][p] = mass[slot].clone();
                }
            }
        }
        e_lo = next_lo;
        e_hi = next_hi;
        u = next_u;
        depth += 1;
    }
    Ok((0..ctx.products)
        .map(|p| if is_finite[p] { best[p].clone() } else { None })
        .collect())
}

struct Outcome {
    results: Vec<(Option<Value>, Option<Rational>, Verdict)>,
    warnings: Vec<String>,
}

fn interval_value(lo: &Rational, hi: &Rational) -> (Option<Value>, Option<Rational>) {
    let two = Rational::from_integer(2.into());
    (Some(Value::Finite((lo + hi) / &two)), Some((hi - lo) / two))
}

fn run<N: BoundNum>(
    exact: &DenseFdtmc<Rational>,
    property: &Property,
    options: &CheckOptions,
    epsilon: &Rational,
) -> Result<Outcome, EngineError> {
    let mut ctx: Ctx<'_, N> = Ctx::new(exact, options, epsilon);
    let initial: Vec<usize> = exact.initial.iter().map(|(s, _)| *s).collect();
    let weights: Vec<Rational> = exact.initial.iter().map(|(_, w)| w.clone()).collect();
    let results = match property {
        Property::Reward(q) => {
            let (must, may) = ctx.sat(&q.target)?;
            let lower = reward_bounds(&mut ctx, &may)?;
            let upper = if must == may { lower.clone() } else { reward_bounds(&mut ctx, &must)? };
            lower
                .into_iter()
                .zip(upper)
                .map(|(l, u)| match (l, u) {
                    (None, _) => (Some(Value::Infinite), None, Verdict::NotApplicable),
                    (Some((lo, _)), None) => (Some(Value::Finite(lo)), None, Verdict::Unknown),
                    (Some((lo, _)), Some((_, hi))) => {
                        let (v, e) = interval_value(&lo, &hi);
                        (v, e, Verdict::NotApplicable)
                    }
                })
                .collect()
        }
        Property::State(StateFormula::Prob { bound, path }) => {
            let (lo, hi) = ctx.path_bounds(path, &initial)?;
            (0..exact.products)
                .map(|p| {
                    let weighted =
                        |g: &Grid<Rational>| -> Rational { initial.iter().zip(&weights).map(|(s, w)| w * &g[*s][p]).sum() };
                    let (value, error) = interval_value(&weighted(&lo), &weighted(&hi));
                    let verdict = match bound {
                        ProbBound::Query => Verdict::NotApplicable,
                        ProbBound::Within(j) => {
                            let verdicts: Vec<Option<bool>> =
                                initial.iter().map(|s| j.classify(&lo[*s][p], &hi[*s][p])).collect();
                            if verdicts.contains(&Some(false)) {
                                Verdict::Violated
                            } else if verdicts.iter().all(|v| *v == Some(true)) {
                                Verdict::Satisfied
                            } else {
                                Verdict::Unknown
                            }
                        }
                    };
                    (value, error, verdict)
                })
                .collect()
        }
        Property::State(f) => {
            let (must, may) = ctx.sat(f)?;
            (0..exact.products)
                .map(|p| {
                    let verdict = if initial.iter().all(|s| must[*s][p]) {
                        Verdict::Satisfied
                    } else if initial.iter().any(|s| !may[*s][p]) {
                        Verdict::Violated
                    } else {
                        Verdict::Unknown
                    };
                    (None, None, verdict)
                })
                .collect()
        }
    };
    Ok(Outcome {
        results,
        warnings: ctx.warnings,
    })
}

fn run_with_deepening<N: BoundNum>(
    exact: &DenseFdtmc<Rational>,
    property: &Property,
    options: &CheckOptions,
) -> Result<Outcome, EngineError> {
    let mut outcome = run::<N>(exact, property, options, &options.epsilon)?;
    let unknown = outcome.results.iter().any(|(_, _, v)| *v == Verdict::Unknown);
    if unknown && options.deepen && options.bound.is_none() {
        let finer = &options.epsilon / Rational::from_integer(10.into());
        let mut deeper = run::<N>(exact, property, options, &finer)?;
        deeper
            .warnings
            .insert(0, format!("undecided verdicts; retried with epsilon {}", format_approx(&finer, 6)));
        outcome = deeper;
    }
    Ok(outcome)
}

/// Checks every product at once by bounded exploration.
pub fn check_family_bounded(model: &Fdtmc, property: &Property, options: &CheckOptions) -> Result<FamilyResult, EngineError> {
    let start = Instant::now();
    property.check_propositions(model.propositions())?;
    if matches!(property, Property::Reward(_)) && model.rewards().is_none() {
        return Err(EngineError::MissingRewards);
    }
    let exact = model.densify::<Rational>()?;
    let outcome = if options.float {
        run_with_deepening::<f64>(&exact, property, options)?
    } else {
        run_with_deepening::<Fixed>(&exact, property, options)?
    };
    let products = model.diagram().valid_products()?;
    let mut warnings = outcome.warnings;
    warnings.dedup();
    Ok(FamilyResult {
        engine: Engine::Bounded,
        property: property.to_string(),
        results: products
            .into_iter()
            .zip(outcome.results)
            .map(|(product, (value, error, verdict))| ProductResult {
                product,
                value,
                error,
                verdict,
            })
            .collect(),
        elapsed: start.elapsed(),
        warnings,
    })
}

/// Lower and upper bounds of `P(left U right)` at the initial distribution
/// after `0..=depth` steps, per product: `trace[k][p]`.
pub fn until_trace(
    model: &Fdtmc,
    left: &StateFormula,
    right: &StateFormula,
    depth: u64,
    options: &CheckOptions,
) -> Result<Vec<Vec<(Rational, Rational)>>, EngineError> {
    let exact = model.densify::<Rational>()?;
    let mut ctx: Ctx<'_, Fixed> = Ctx::new(&exact, options, &options.epsilon);
    let (l, _) = ctx.sat(left)?;
    let (r, _) = ctx.sat(right)?;
    let mut run = UntilRun::new(&ctx, &l, &r);
    let all: Vec<usize> = (0..ctx.products).collect();
    let snapshot = |run: &UntilRun<Fixed>| -> Vec<(Rational, Rational)> {
        (0..exact.products)
            .map(|p| {
                exact.initial.iter().fold((Rational::zero(), Rational::zero()), |(lo, hi), (s, w)| {
                    (lo + w * run.lo[*s][p].to_rational(), hi + w * run.hi[*s][p].to_rational())
                })
            })
            .collect()
    };
    let mut trace = vec![snapshot(&run)];
    for _ in 0..depth {
        run.step(&ctx, &all, options.frontier);
        trace.push(snapshot(&run));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::FeatureDiagram;
    use crate::enumerative::check_family_enumerative;
    use crate::expr::parse_feature_expression as parse;
    use crate::model::FdtmcBuilder;
    use crate::pctl::parse_property;
    use crate::profile::Profile;
    use crate::rational::{int, rat};
    use std::sync::Arc;

    fn model() -> Fdtmc {
        let d = Arc::new(FeatureDiagram::unconstrained(["f"]).unwrap());
        let mut b = FdtmcBuilder::new(d);
        for s in ["a", "b", "goal", "sink"] {
            b.state(s);
        }
        b.label("goal", "goal").unwrap();
        b.label("sink", "sink").unwrap();
        b.transition("a", "b", Profile::constant(rat(1, 2))).unwrap();
        b.transition("a", "goal", Profile::guarded(vec![(parse("f").unwrap(), rat(1, 4))], rat(1, 8)))
            .unwrap();
        b.transition("b", "a", Profile::constant(rat(1, 2))).unwrap();
        b.transition("b", "sink", Profile::constant(rat(1, 4))).unwrap();
        b.reward("b", Profile::constant(int(2))).unwrap();
        b.reward("a", Profile::constant(int(1))).unwrap();
        b.complete_with_self_loops().unwrap();
        b.build().unwrap()
    }

    #[test]
    fn agrees_with_enumeration_within_error() {
        let m = model();
        let opts = CheckOptions::default();
        for text in ["P=?(F goal)", "P[>0.3](F goal)", "P=?(X goal)", "P=?(F<=4 goal)", "!P[<0.5](F !P[<0.9](F goal))"] {
            let prop = parse_property(text).unwrap();
            let a = check_family_bounded(&m, &prop, &opts).unwrap();
            let b = check_family_enumerative(&m, &prop, &opts).unwrap();
            assert!(a.agrees_with(&b, &Rational::zero()), "{text}: {a:?} vs {b:?}");
            for r in &a.results {
                if let Some(e) = &r.error {
                    assert!(*e <= rat(1, 2000), "{text}");
                }
            }
        }
    }

    #[test]
    fn reward_bounds_and_infinity() {
        let m = model();
        let opts = CheckOptions::default();
        let prop = parse_property("R=?[F goal]").unwrap();
        let a = check_family_bounded(&m, &prop, &opts).unwrap();
        for r in &a.results {
            assert_eq!(r.value, Some(Value::Infinite));
        }
        let prop = parse_property("R=?[F goal | sink]").unwrap();
        let a = check_family_bounded(&m, &prop, &opts).unwrap();
        let b = check_family_enumerative(&m, &prop, &opts).unwrap();
        assert!(a.agrees_with(&b, &Rational::zero()), "{a:?} vs {b:?}");
    }

    #[test]
    fn trace_is_monotone() {
        let m = model();
        let trace = until_trace(&m, &StateFormula::True, &StateFormula::atom("goal"), 40, &CheckOptions::default()).unwrap();
        for w in trace.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                assert!(a.0 <= b.0 && b.1 <= a.1);
            }
        }
    }

    #[test]
    fn frontier_gives_identical_results() {
        let m = model();
        let prop = parse_property("P=?(F goal)").unwrap();
        let with = check_family_bounded(&m, &prop, &CheckOptions::default()).unwrap();
        let without = check_family_bounded(
            &m,
            &prop,
            &CheckOptions {
                frontier: false,
                ..CheckOptions::default()
            },
        )
        .unwrap();
        assert_eq!(with.results, without.results);
    }
}
