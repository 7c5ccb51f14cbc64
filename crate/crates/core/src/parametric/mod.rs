//! Family-wide checking through multilinear polynomials over the features:
//! profiles become polynomials, states are eliminated once, and the
//! resulting rational function is evaluated at each valid product.

mod eliminate;
pub mod poly;
pub mod ratfun;

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{One, Zero};

use crate::enumerative;
use crate::family::{parallel_map, CheckOptions, Engine, EngineError, FamilyResult, ProductResult, Value, Verdict};
use crate::model::Fdtmc;
use crate::pctl::{Interval, PathFormula, ProbBound, Property, StateFormula};
use crate::rational::Rational;

pub use eliminate::{Elimination, Graph};
pub use poly::Poly;
pub use ratfun::RationalFunction;

/// Polynomial view of an FDTMC.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub rows: Vec<Vec<(usize, Poly)>>,
    pub rewards: Option<Vec<Poly>>,
    pub initial: Vec<(usize, Rational)>,
    pub names: Vec<String>,
}

pub fn encode(model: &Fdtmc) -> Result<Encoded, EngineError> {
    let d = model.diagram();
    let poly = |p: &crate::profile::Profile| -> Result<Poly, EngineError> { Ok(Poly::from_profile(&p.compact(d)?, d)?) };
    let rows = (0..model.len())
        .map(|s| {
            model
                .transitions(s)
                .iter()
                .map(|(t, p)| Ok((*t, poly(p)?)))
                .filter(|r: &Result<(usize, Poly), EngineError>| r.as_ref().map_or(true, |(_, p)| !p.is_zero()))
                .collect::<Result<Vec<_>, EngineError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rewards = match model.rewards() {
        Some(r) => Some(r.iter().map(poly).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    Ok(Encoded {
        rows,
        rewards,
        initial: model.initial().to_vec(),
        names: d.signature().to_vec(),
    })
}

/// A value that may be undefined at products where `guards` vanish.
#[derive(Debug, Clone)]
pub struct Guarded {
    pub value: RationalFunction,
    pub guards: Vec<Poly>,
}

impl Guarded {
    fn exact(p: Poly) -> Self {
        Guarded {
            value: RationalFunction::from_poly(p),
            guards: Vec::new(),
        }
    }

    pub fn eval(&self, mask: u64) -> Option<Rational> {
        if self.guards.iter().any(|g| g.eval(mask).is_zero()) {
            None
        } else {
            self.value.eval(mask)
        }
    }
}

/// Parametric outcome: the per-product results plus the closed form of the
/// outermost value.
#[derive(Debug, Clone)]
pub struct ParametricReport {
    pub result: FamilyResult,
    /// Rational function of the outermost operator at the initial
    /// distribution.
    pub function: Option<RationalFunction>,
    /// Multilinear polynomial agreeing with the per-product values on every
    /// valid product (zero elsewhere). Absent when some value is infinite.
    pub canonical: Option<Poly>,
    pub names: Vec<String>,
}

impl ParametricReport {
    /// `numerator` on the first line and `/ L` on the second, `L` the least
    /// common denominator of the coefficients.
    pub fn expression(&self) -> Option<String> {
        if let Some(c) = &self.canonical {
            let (text, den) = c.render_scaled(&self.names);
            return Some(if den.is_one() { text } else { format!("{text}\n/ {den}") });
        }
        self.function.as_ref().map(|f| {
            let one = Rational::one();
            let num = f.numerator().render(&self.names, &one);
            let den = f.denominator().render(&self.names, &one);
            format!("{num}\n/ {den}")
        })
    }
}

struct Checker<'a> {
    model: &'a Fdtmc,
    enc: Encoded,
    masks: Vec<u64>,
    features: usize,
    options: &'a CheckOptions,
    warnings: Vec<String>,
}

impl<'a> Checker<'a> {
    fn label_polys(&self, prop: &str) -> Vec<Poly> {
        (0..self.model.len())
            .map(|s| if self.model.labels(s).contains(prop) { Poly::one() } else { Poly::zero() })
            .collect()
    }

    fn sat_polys(&mut self, f: &StateFormula) -> Result<Vec<Poly>, EngineError> {
        Ok(match f {
            StateFormula::True => vec![Poly::one(); self.model.len()],
            StateFormula::Atom(a) => self.label_polys(a),
            StateFormula::Not(a) => self.sat_polys(a)?.iter().map(Poly::complement).collect(),
            StateFormula::And(a, b) => {
                let (x, y) = (self.sat_polys(a)?, self.sat_polys(b)?);
                x.iter().zip(&y).map(|(p, q)| p.mul(q)).collect()
            }
            StateFormula::Prob { bound, path } => {
                let ProbBound::Within(j) = bound else {
                    return Err(EngineError::NestedQuery);
                };
                let values = self.state_functions(path)?;
                self.threshold(&values, j, path)?
            }
        })
    }

    /// Indicator polynomials of `value ∈ j`, per state.
    fn threshold(&mut self, values: &[Guarded], j: &Interval, path: &PathFormula) -> Result<Vec<Poly>, EngineError> {
        let mut member: Vec<HashMap<u64, bool>> = vec![HashMap::new(); values.len()];
        for &m in &self.masks {
            let evaluated: Option<Vec<Rational>> = values.iter().map(|g| g.eval(m)).collect();
            let per_state = match evaluated {
                Some(v) => v,
                None => {
                    let product = self.model.diagram().product(m);
                    self.warnings
                        .push(format!("vanishing denominator at {product}; nested values enumerated"));
                    let dtmc = self.model.project(&product)?;
                    enumerative::path_values(&dtmc, path)?
                }
            };
            for (s, v) in per_state.iter().enumerate() {
                member[s].insert(m, j.contains(v));
            }
        }
        let n = self.features;
        Ok(member
            .iter()
            .map(|table| {
                Poly::interpolate(n, |m| {
                    if table.get(&m).copied().unwrap_or(false) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
            })
            .collect())
    }

    /// Transformed graph for `left U right` (rewards when `with_rewards`).
    fn until_graph(&self, left: &[Poly], right: &[Poly], sources: &[(usize, Rational)], with_rewards: bool) -> Graph {
        let n = self.model.len();
        let mut g = Graph::new(n, with_rewards);
        let (sigma, tau) = (g.source(), g.sink());
        for (s, w) in sources {
            g.add(sigma, *s, Poly::constant(w.clone()), Poly::zero());
        }
        let rewards = self.enc.rewards.as_ref();
        for s in 0..n {
            g.add(s, tau, right[s].clone(), Poly::zero());
            let c = left[s].mul(&right[s].complement());
            if c.is_zero() {
                continue;
            }
            for (t, p) in &self.enc.rows[s] {
                let p = c.mul(p);
                let r = match (with_rewards, rewards) {
                    (true, Some(r)) => p.mul(&r[*t]),
                    _ => Poly::zero(),
                };
                g.add(s, *t, p, r);
            }
        }
        g
    }

    fn next_polys(&self, target: &[Poly]) -> Vec<Poly> {
        self.enc
            .rows
            .iter()
            .map(|row| row.iter().fold(Poly::zero(), |acc, (t, p)| acc.add(&p.mul(&target[*t]))))
            .collect()
    }

    fn bounded_polys(&self, left: &[Poly], right: &[Poly], k: u64) -> Vec<Poly> {
        let c: Vec<Poly> = left.iter().zip(right).map(|(l, r)| l.mul(&r.complement())).collect();
        let mut x = right.to_vec();
        for _ in 0..k {
            let step = self.next_polys(&x);
            let next: Vec<Poly> = (0..x.len()).map(|s| right[s].add(&c[s].mul(&step[s]))).collect();
            if next == x {
                break;
            }
            x = next;
        }
        x
    }

    /// Value of the path formula from every single state.
    fn state_functions(&mut self, path: &PathFormula) -> Result<Vec<Guarded>, EngineError> {
        match path {
            PathFormula::Next(f) => {
                let target = self.sat_polys(f)?;
                Ok(self.next_polys(&target).into_iter().map(Guarded::exact).collect())
            }
            PathFormula::Until { left, right, bound } => {
                let (l, r) = (self.sat_polys(left)?, self.sat_polys(right)?);
                match bound {
                    Some(k) => Ok(self.bounded_polys(&l, &r, *k).into_iter().map(Guarded::exact).collect()),
                    None => {
                        let this = &*self;
                        Ok(parallel_map(self.model.len(), self.options.workers, |s| {
                            let e = this.until_graph(&l, &r, &[(s, Rational::one())], false).eliminate();
                            Guarded {
                                value: e.probability,
                                guards: e.guards,
                            }
                        }))
                    }
                }
            }
        }
    }

    /// Value of the path formula at the initial distribution.
    fn initial_function(&mut self, path: &PathFormula) -> Result<Guarded, EngineError> {
        let initial = self.enc.initial.clone();
        let combine = |xs: Vec<Poly>| {
            Guarded::exact(
                initial
                    .iter()
                    .fold(Poly::zero(), |acc, (s, w)| acc.add(&xs[*s].scale(w))),
            )
        };
        match path {
            PathFormula::Next(f) => {
                let target = self.sat_polys(f)?;
                Ok(combine(self.next_polys(&target)))
            }
            PathFormula::Until { left, right, bound } => {
                let (l, r) = (self.sat_polys(left)?, self.sat_polys(right)?);
                match bound {
                    Some(k) => Ok(combine(self.bounded_polys(&l, &r, *k))),
                    None => {
                        let e = self.until_graph(&l, &r, &initial, false).eliminate();
                        Ok(Guarded {
                            value: e.probability,
                            guards: e.guards,
                        })
                    }
                }
            }
        }
    }

    fn fallback(&mut self, mask: u64, property: &Property) -> Result<(Option<Value>, Verdict), EngineError> {
        let product = self.model.diagram().product(mask);
        self.warnings
            .push(format!("vanishing denominator at {product}; checked by enumeration"));
        enumerative::check_dtmc(&self.model.project(&product)?, property)
    }

    fn check(&mut self, property: &Property) -> Result<(Vec<(Option<Value>, Verdict)>, Option<RationalFunction>), EngineError> {
        let masks = self.masks.clone();
        match property {
            Property::Reward(q) => {
                let target = self.sat_polys(&q.target)?;
                let all = vec![Poly::one(); self.model.len()];
                let initial = self.enc.initial.clone();
                let e = self.until_graph(&all, &target, &initial, true).eliminate();
                let mut out = Vec::with_capacity(masks.len());
                for &m in &masks {
                    let outcome = match (e.probability_at(m), e.reward_at(m)) {
                        (Some(p), _) if !p.is_one() => (Some(Value::Infinite), Verdict::NotApplicable),
                        (Some(_), Some(r)) => (Some(Value::Finite(r)), Verdict::NotApplicable),
                        _ => self.fallback(m, property)?,
                    };
                    out.push(outcome);
                }
                Ok((out, Some(e.reward)))
            }
            Property::State(StateFormula::Prob { bound, path }) => {
                let top = self.initial_function(path)?;
                let per_state = match bound {
                    ProbBound::Within(_) if self.enc.initial.len() > 1 => Some(self.state_functions(path)?),
                    _ => None,
                };
                let mut out = Vec::with_capacity(masks.len());
                for &m in &masks {
                    let Some(v) = top.eval(m) else {
                        out.push(self.fallback(m, property)?);
                        continue;
                    };
                    let verdict = match bound {
                        ProbBound::Query => Verdict::NotApplicable,
                        ProbBound::Within(j) => match &per_state {
                            None => Verdict::from_bool(j.contains(&v)),
                            Some(fs) => {
                                let vals: Option<Vec<Rational>> =
                                    self.enc.initial.iter().map(|(s, _)| fs[*s].eval(m)).collect();
                                match vals {
                                    Some(vals) => Verdict::from_bool(vals.iter().all(|x| j.contains(x))),
                                    None => {
                                        out.push(self.fallback(m, property)?);
                                        continue;
                                    }
                                }
                            }
                        },
                    };
                    out.push((Some(Value::Finite(v)), verdict));
                }
                Ok((out, Some(top.value)))
            }
            Property::State(f) => {
                let s = self.sat_polys(f)?;
                let initial = self.enc.initial.clone();
                Ok((
                    masks
                        .iter()
                        .map(|&m| (None, Verdict::from_bool(initial.iter().all(|(i, _)| s[*i].eval(m).is_one()))))
                        .collect(),
                    None,
                ))
            }
        }
    }
}

/// Checks every product through one symbolic elimination.
pub fn check_family_parametric(
    model: &Fdtmc,
    property: &Property,
    options: &CheckOptions,
) -> Result<ParametricReport, EngineError> {
    let start = Instant::now();
    property.check_propositions(model.propositions())?;
    if matches!(property, Property::Reward(_)) && model.rewards().is_none() {
        return Err(EngineError::MissingRewards);
    }
    let d = model.diagram();
    let masks = d.product_masks()?.to_vec();
    let mut checker = Checker {
        model,
        enc: encode(model)?,
        masks: masks.clone(),
        features: d.signature().len(),
        options,
        warnings: Vec::new(),
    };
    let (outcomes, function) = checker.check(property)?;
    let canonical = if outcomes.iter().all(|(v, _)| matches!(v, Some(Value::Finite(_)))) && function.is_some() {
        let table: HashMap<u64, Rational> = masks
            .iter()
            .zip(&outcomes)
            .filter_map(|(m, (v, _))| v.as_ref().and_then(Value::finite).map(|v| (*m, v.clone())))
            .collect();
        Some(Poly::interpolate(checker.features, |m| table.get(&m).cloned().unwrap_or_else(Rational::zero)))
    } else {
        None
    };
    let results = masks
        .iter()
        .zip(outcomes)
        .map(|(&m, (value, verdict))| ProductResult {
            product: d.product(m),
            value,
            error: None,
            verdict,
        })
        .collect();
    let mut warnings = checker.warnings;
    warnings.dedup();
    Ok(ParametricReport {
        result: FamilyResult {
            engine: Engine::Parametric,
            property: property.to_string(),
            results,
            elapsed: start.elapsed(),
            warnings,
        },
        function,
        canonical,
        names: d.signature().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::FeatureDiagram;
    use crate::expr::parse_feature_expression as parse;
    use crate::model::FdtmcBuilder;
    use crate::pctl::parse_property;
    use crate::profile::Profile;
    use crate::rational::{int, rat};
    use std::sync::Arc;

    fn trap_model() -> Fdtmc {
        // with feature `t` the middle state never leaves
        let d = Arc::new(FeatureDiagram::unconstrained(["t"]).unwrap());
        let mut b = FdtmcBuilder::new(d);
        for s in ["a", "m", "goal"] {
            b.state(s);
        }
        b.label("goal", "goal").unwrap();
        b.transition("a", "m", Profile::constant(rat(1, 2))).unwrap();
        b.transition("a", "goal", Profile::constant(rat(1, 2))).unwrap();
        b.transition("m", "goal", Profile::guarded(vec![(parse("t").unwrap(), int(0))], int(1)))
            .unwrap();
        b.reward("m", Profile::constant(int(2))).unwrap();
        b.complete_with_self_loops().unwrap();
        b.build().unwrap()
    }

    #[test]
    fn falls_back_where_denominators_vanish() {
        let m = trap_model();
        let opts = CheckOptions::default();
        let prop = parse_property("P=?(F goal)").unwrap();
        let report = check_family_parametric(&m, &prop, &opts).unwrap();
        let enumerated = enumerative::check_family_enumerative(&m, &prop, &opts).unwrap();
        assert!(report.result.agrees_with(&enumerated, &Rational::zero()));
        assert_eq!(report.result.results[1].value, Some(Value::Finite(rat(1, 2))));
        assert!(!report.result.warnings.is_empty());
        let reward = parse_property("R=?(F goal)").unwrap();
        let report = check_family_parametric(&m, &reward, &opts).unwrap();
        assert_eq!(report.result.results[0].value, Some(Value::Finite(int(1))));
        assert_eq!(report.result.results[1].value, Some(Value::Infinite));
    }

    #[test]
    fn nested_formula_matches_enumeration() {
        let m = trap_model();
        let opts = CheckOptions::default();
        for text in ["P[>=0.6](X P[>=1](F goal))", "!P[<0.3](true U<=3 goal)", "P=?(F P[>0.9](F goal))"] {
            let prop = parse_property(text).unwrap();
            let a = check_family_parametric(&m, &prop, &opts).unwrap();
            let b = enumerative::check_family_enumerative(&m, &prop, &opts).unwrap();
            assert!(a.result.agrees_with(&b, &Rational::zero()), "{text}");
        }
    }
}
