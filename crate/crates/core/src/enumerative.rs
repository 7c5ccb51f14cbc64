//! Product-by-product checking: every valid product's DTMC is built and
//! checked on its own.

use std::collections::VecDeque;
use std::time::Instant;

use crate::family::{parallel_map, CheckOptions, Engine, EngineError, FamilyResult, ProductResult, Value, Verdict};
use crate::model::{DenseFdtmc, Dtmc, Fdtmc};
use crate::pctl::{PathFormula, ProbBound, Property, StateFormula};
use crate::rational::Rational;
use crate::scalar::Scalar;
use crate::linsolve;

/// Convergence threshold of the float value iteration.
pub const FLOAT_THRESHOLD: f64 = 1e-9;

/// Satisfaction set of a state formula.
pub fn sat<T: Scalar>(m: &Dtmc<T>, f: &StateFormula) -> Result<Vec<bool>, EngineError> {
    Ok(match f {
        StateFormula::True => vec![true; m.len()],
        StateFormula::Atom(a) => (0..m.len()).map(|s| m.has_label(s, a)).collect(),
        StateFormula::Not(a) => sat(m, a)?.into_iter().map(|b| !b).collect(),
        StateFormula::And(a, b) => sat(m, a)?
            .into_iter()
            .zip(sat(m, b)?)
            .map(|(x, y)| x && y)
            .collect(),
        StateFormula::Prob { bound, path } => {
            let ProbBound::Within(j) = bound else {
                return Err(EngineError::NestedQuery);
            };
            path_values(m, path)?
                .iter()
                .map(|v| j.contains(&v.to_rational()))
                .collect()
        }
    })
}

/// Per-state probability of a path formula.
pub fn path_values<T: Scalar>(m: &Dtmc<T>, path: &PathFormula) -> Result<Vec<T>, EngineError> {
    match path {
        PathFormula::Next(f) => Ok(next(m, &sat(m, f)?)),
        PathFormula::Until { left, right, bound } => {
            let l = sat(m, left)?;
            let r = sat(m, right)?;
            match bound {
                Some(k) => Ok(bounded_until(m, &l, &r, *k)),
                None => until(m, &l, &r),
            }
        }
    }
}

pub fn next<T: Scalar>(m: &Dtmc<T>, target: &[bool]) -> Vec<T> {
    m.rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|(t, _)| target[*t])
                .fold(T::zero_value(), |acc, (_, p)| acc.add(p))
        })
        .collect()
}

/// `k` steps of `x' = 1_right + 1_{left ∧ ¬right} · P x` from `x = 1_right`.
pub fn bounded_until<T: Scalar>(m: &Dtmc<T>, left: &[bool], right: &[bool], k: u64) -> Vec<T> {
    let indicator = |b: bool| if b { T::one_value() } else { T::zero_value() };
    let mut x: Vec<T> = right.iter().map(|&b| indicator(b)).collect();
    for _ in 0..k {
        x = (0..m.len())
            .map(|s| {
                if right[s] {
                    T::one_value()
                } else if !left[s] {
                    T::zero_value()
                } else {
                    m.rows[s]
                        .iter()
                        .fold(T::zero_value(), |acc, (t, p)| acc.add(&p.mul(&x[*t])))
                }
            })
            .collect();
    }
    x
}

/// States with no path to `right` through `left` states.
pub fn prob0<T: Scalar>(m: &Dtmc<T>, left: &[bool], right: &[bool]) -> Vec<bool> {
    let preds = m.predecessors();
    let mut reach = right.to_vec();
    let mut queue: VecDeque<usize> = (0..m.len()).filter(|&s| right[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !reach[s] && left[s] {
                reach[s] = true;
                queue.push_back(s);
            }
        }
    }
    reach.into_iter().map(|r| !r).collect()
}

/// States reaching `right` almost surely through `left` states, given the
/// prob-0 set.
pub fn prob1<T: Scalar>(m: &Dtmc<T>, left: &[bool], right: &[bool], zero: &[bool]) -> Vec<bool> {
    let preds = m.predecessors();
    let mut bad = zero.to_vec();
    let mut queue: VecDeque<usize> = (0..m.len()).filter(|&s| zero[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !bad[s] && left[s] && !right[s] {
                bad[s] = true;
                queue.push_back(s);
            }
        }
    }
    bad.into_iter().map(|b| !b).collect()
}

/// Solves `x(s) = Σ_{t ∈ unknown} P(s,t) x(t) + b(s)` for the unknown
/// states; exact elimination or float value iteration.
fn solve_on<T: Scalar>(m: &Dtmc<T>, unknown: &[usize], b: Vec<T>) -> Result<Vec<T>, EngineError> {
    let n = m.len();
    let mut position = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        position[s] = i;
    }
    if !T::EXACT {
        let mut x = vec![T::zero_value(); unknown.len()];
        let threshold = T::from_rational(&crate::rational::from_f64(FLOAT_THRESHOLD));
        for _ in 0..10_000_000u64 {
            let mut change = T::zero_value();
            for (i, &s) in unknown.iter().enumerate() {
                let mut v = b[i].clone();
                for (t, p) in &m.rows[s] {
                    if position[*t] != usize::MAX {
                        v = v.add(&p.mul(&x[position[*t]]));
                    }
                }
                let diff = if v > x[i] { v.sub(&x[i]) } else { x[i].sub(&v) };
                change = change.max_of(&diff);
                x[i] = v;
            }
            if change < threshold {
                return Ok(x);
            }
        }
        return Err(EngineError::NoConvergence {
            depth: 10_000_000,
            worst: "value iteration".into(),
        });
    }
    let k = unknown.len();
    let mut a = vec![vec![T::zero_value(); k]; k];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = T::one_value();
        for (t, p) in &m.rows[s] {
            let j = position[*t];
            if j != usize::MAX {
                a[i][j] = a[i][j].sub(p);
            }
        }
    }
    linsolve::solve(a, b).map_err(|col| EngineError::Singular(m.states[unknown[col]].clone()))
}

/// Unbounded until: graph precomputation, then a linear solve on the rest.
pub fn until<T: Scalar>(m: &Dtmc<T>, left: &[bool], right: &[bool]) -> Result<Vec<T>, EngineError> {
    let zero = prob0(m, left, right);
    let one = prob1(m, left, right, &zero);
    let mut x: Vec<T> = (0..m.len())
        .map(|s| if one[s] { T::one_value() } else { T::zero_value() })
        .collect();
    let unknown: Vec<usize> = (0..m.len()).filter(|&s| !zero[s] && !one[s]).collect();
    if unknown.is_empty() {
        return Ok(x);
    }
    let b = unknown
        .iter()
        .map(|&s| {
            m.rows[s]
                .iter()
                .filter(|(t, _)| one[*t])
                .fold(T::zero_value(), |acc, (_, p)| acc.add(p))
        })
        .collect();
    let solution = solve_on(m, &unknown, b)?;
    for (&s, v) in unknown.iter().zip(solution) {
        x[s] = v;
    }
    Ok(x)
}

/// Expected reward accumulated until the first entry into a target state,
/// earning `R(t)` on every entry into `t` (self-loops included, the initial
/// occupancy excluded). `None` marks states that miss the target with
/// positive probability.
pub fn expected_reward<T: Scalar>(m: &Dtmc<T>, target: &[bool]) -> Result<Vec<Option<T>>, EngineError> {
    let rewards = m.rewards.as_ref().ok_or(EngineError::MissingRewards)?;
    let all = vec![true; m.len()];
    let zero = prob0(m, &all, target);
    let finite = prob1(m, &all, target, &zero);
    let unknown: Vec<usize> = (0..m.len()).filter(|&s| finite[s] && !target[s]).collect();
    let b = unknown
        .iter()
        .map(|&s| {
            m.rows[s]
                .iter()
                .fold(T::zero_value(), |acc, (t, p)| acc.add(&p.mul(&rewards[*t])))
        })
        .collect();
    let solution = solve_on(m, &unknown, b)?;
    let mut out: Vec<Option<T>> = (0..m.len())
        .map(|s| if target[s] { Some(T::zero_value()) } else { None })
        .collect();
    for (&s, v) in unknown.iter().zip(solution) {
        out[s] = Some(v);
    }
    Ok(out)
}

/// Initial-distribution weighted value, `None` if any initial state has an
/// infinite value.
fn weighted<T: Scalar>(m: &Dtmc<T>, values: &[Option<T>]) -> Option<T> {
    m.initial.iter().try_fold(T::zero_value(), |acc, (s, w)| {
        values[*s].as_ref().map(|v| acc.add(&w.mul(v)))
    })
}

/// Checks one concrete chain and summarizes it at the initial distribution.
pub fn check_dtmc<T: Scalar>(m: &Dtmc<T>, property: &Property) -> Result<(Option<Value>, Verdict), EngineError> {
    let to_value = |v: Option<T>| match v {
        Some(v) => Value::Finite(v.to_rational()),
        None => Value::Infinite,
    };
    match property {
        Property::Reward(q) => {
            let target = sat(m, &q.target)?;
            let values = expected_reward(m, &target)?;
            Ok((Some(to_value(weighted(m, &values))), Verdict::NotApplicable))
        }
        Property::State(StateFormula::Prob { bound, path }) => {
            let values = path_values(m, path)?;
            let wrapped: Vec<Option<T>> = values.iter().cloned().map(Some).collect();
            let value = to_value(weighted(m, &wrapped));
            let verdict = match bound {
                ProbBound::Query => Verdict::NotApplicable,
                ProbBound::Within(j) => {
                    Verdict::from_bool(m.initial.iter().all(|(s, _)| j.contains(&values[*s].to_rational())))
                }
            };
            Ok((Some(value), verdict))
        }
        Property::State(f) => {
            let s = sat(m, f)?;
            Ok((None, Verdict::from_bool(m.initial.iter().all(|(i, _)| s[*i]))))
        }
    }
}

fn check_dense<T: Scalar>(
    dense: &DenseFdtmc<T>,
    model: &Fdtmc,
    property: &Property,
    options: &CheckOptions,
) -> Result<Vec<ProductResult>, EngineError> {
    let products = model.diagram().valid_products()?;
    let outcomes = parallel_map(products.len(), options.workers, |i| check_dtmc(&dense.project(i), property));
    products
        .into_iter()
        .zip(outcomes)
        .map(|(product, outcome)| {
            let (value, verdict) = outcome?;
            Ok(ProductResult {
                product,
                value,
                error: None,
                verdict,
            })
        })
        .collect()
}

/// Projects the model onto every valid product and checks each DTMC.
pub fn check_family_enumerative(
    model: &Fdtmc,
    property: &Property,
    options: &CheckOptions,
) -> Result<FamilyResult, EngineError> {
    let start = Instant::now();
    property.check_propositions(model.propositions())?;
    if matches!(property, Property::Reward(_)) && model.rewards().is_none() {
        return Err(EngineError::MissingRewards);
    }
    let results = if options.float {
        check_dense(&model.densify::<f64>()?, model, property, options)?
    } else {
        check_dense(&model.densify::<Rational>()?, model, property, options)?
    };
    Ok(FamilyResult {
        engine: Engine::Enumerative,
        property: property.to_string(),
        results,
        elapsed: start.elapsed(),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::FeatureDiagram;
    use crate::model::FdtmcBuilder;
    use crate::pctl::parse_property;
    use crate::profile::Profile;
    use crate::rational::{int, rat};
    use std::sync::Arc;

    fn methane_base() -> Dtmc<Rational> {
        let mut b = FdtmcBuilder::new(Arc::new(FeatureDiagram::trivial()));
        b.state("no_methane");
        b.state("methane");
        b.label("methane", "methane").unwrap();
        b.transition("no_methane", "methane", Profile::constant(rat(1, 8))).unwrap();
        b.transition("methane", "no_methane", Profile::constant(rat(3, 4))).unwrap();
        b.complete_with_self_loops().unwrap();
        b.build().unwrap().densify::<Rational>().unwrap().project(0)
    }

    fn value(m: &Dtmc<Rational>, text: &str) -> Rational {
        match check_dtmc(m, &parse_property(text).unwrap()).unwrap().0 {
            Some(Value::Finite(v)) => v,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounded_methane_probabilities() {
        let m = methane_base();
        assert_eq!(value(&m, "P=?(true U<=1 methane)"), rat(1, 8));
        assert_eq!(value(&m, "P=?(F<=2 methane)"), rat(15, 64));
        assert_eq!(value(&m, "P=?(X methane)"), rat(1, 8));
        assert_eq!(value(&m, "P=?(F methane)"), int(1));
        assert_eq!(value(&m, "P=?(F<=0 !methane)"), int(1));
    }

    #[test]
    fn rewards_and_divergence() {
        let mut b = FdtmcBuilder::new(Arc::new(FeatureDiagram::trivial()));
        for s in ["a", "b", "goal", "trap"] {
            b.state(s);
        }
        b.label("goal", "goal").unwrap();
        b.transition("a", "b", Profile::constant(rat(1, 2))).unwrap();
        b.transition("a", "goal", Profile::constant(rat(1, 2))).unwrap();
        b.transition("b", "goal", Profile::one()).unwrap();
        b.reward("b", Profile::constant(int(4))).unwrap();
        b.reward("a", Profile::constant(int(10))).unwrap();
        b.complete_with_self_loops().unwrap();
        let m = b.build().unwrap().densify::<Rational>().unwrap().project(0);
        let target = sat(&m, &StateFormula::atom("goal")).unwrap();
        let e = expected_reward(&m, &target).unwrap();
        assert_eq!(e[0], Some(int(2)));
        assert_eq!(e[3], None);
        let zero = m.clone();
        let mut zero = zero;
        zero.rewards = Some(vec![int(0); 4]);
        let e = expected_reward(&zero, &target).unwrap();
        assert_eq!(e[0], Some(int(0)));
    }

    #[test]
    fn prob0_states_match_long_value_iteration() {
        let mut b = FdtmcBuilder::new(Arc::new(FeatureDiagram::trivial()));
        for s in ["s", "t", "u", "goal"] {
            b.state(s);
        }
        b.label("goal", "goal").unwrap();
        b.transition("s", "t", Profile::constant(rat(1, 2))).unwrap();
        b.transition("s", "goal", Profile::constant(rat(1, 4))).unwrap();
        b.transition("t", "u", Profile::one()).unwrap();
        b.complete_with_self_loops().unwrap();
        let m = b.build().unwrap().densify::<f64>().unwrap().project(0);
        let all = vec![true; 4];
        let goal = sat(&m, &StateFormula::atom("goal")).unwrap();
        let zero = prob0(&m, &all, &goal);
        let vi = bounded_until(&m, &all, &goal, 10_000);
        for s in 0..4 {
            if zero[s] {
                assert!(vi[s].abs() < 1e-12);
            }
        }
        assert!(zero[1] && zero[2] && !zero[0]);
    }

    #[test]
    fn float_mode_agrees() {
        let m = methane_base();
        let mf = Dtmc {
            states: m.states.clone(),
            initial: vec![(0, 1.0)],
            rows: m.rows.iter().map(|r| r.iter().map(|(t, p)| (*t, crate::rational::to_f64(p))).collect()).collect(),
            labels: m.labels.clone(),
            rewards: None,
        };
        let exact = until(&m, &[true, true], &[false, true]).unwrap();
        let float = until(&mf, &[true, true], &[false, true]).unwrap();
        for (a, b) in exact.iter().zip(float) {
            assert!((crate::rational::to_f64(a) - b).abs() < 1e-8);
        }
    }
}
