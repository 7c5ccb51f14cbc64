use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::diagram::{FeatureDiagram, Product};
use crate::expr::Expr;
use crate::model::{Dtmc, Fmdp, FmdpBuilder, Labels, ModelError};
use crate::profile::{DenseProfile, Profile};
use crate::rational::{format_rational, Rational};
use crate::scalar::Scalar;

/// Featured discrete-time Markov chain with optional state rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Fdtmc {
    diagram: Arc<FeatureDiagram>,
    states: Vec<String>,
    initial: Vec<(usize, Rational)>,
    /// Per source: `(target, profile)` in increasing target order.
    transitions: Vec<Vec<(usize, Profile)>>,
    labels: Vec<Labels>,
    propositions: BTreeSet<String>,
    rewards: Option<Vec<Profile>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub state: String,
    pub product: Product,
    pub sum: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeViolation {
    pub source: String,
    pub target: String,
    pub product: Product,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardViolation {
    pub state: String,
    pub product: Product,
    pub value: Rational,
}

/// Findings of [`Fdtmc::validate`]; empty iff the model is well formed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub rows: Vec<RowViolation>,
    pub ranges: Vec<RangeViolation>,
    pub rewards: Vec<RewardViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.rows.is_empty() && self.ranges.is_empty() && self.rewards.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.rows {
            writeln!(
                f,
                "state `{}`, product {}: outgoing probabilities sum to {}",
                v.state,
                v.product,
                format_rational(&v.sum)
            )?;
        }
        for v in &self.ranges {
            writeln!(
                f,
                "transition `{}` -> `{}`, product {}: probability {} outside [0, 1]",
                v.source,
                v.target,
                v.product,
                format_rational(&v.value)
            )?;
        }
        for v in &self.rewards {
            writeln!(
                f,
                "state `{}`, product {}: negative reward {}",
                v.state,
                v.product,
                format_rational(&v.value)
            )?;
        }
        Ok(())
    }
}

impl Fdtmc {
    pub fn diagram(&self) -> &Arc<FeatureDiagram> {
        &self.diagram
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> &[(usize, Rational)] {
        &self.initial
    }

    pub fn transitions(&self, source: usize) -> &[(usize, Profile)] {
        &self.transitions[source]
    }

    pub fn transition(&self, source: usize, target: usize) -> Option<&Profile> {
        self.transitions[source]
            .iter()
            .find(|(t, _)| *t == target)
            .map(|(_, p)| p)
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn labels(&self, state: usize) -> &Labels {
        &self.labels[state]
    }

    pub fn all_labels(&self) -> &[Labels] {
        &self.labels
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.propositions
    }

    pub fn rewards(&self) -> Option<&[Profile]> {
        self.rewards.as_deref()
    }

    pub fn reward(&self, state: usize) -> Option<&Profile> {
        self.rewards.as_ref().map(|r| &r[state])
    }

    /// Same structure with every transition and reward profile replaced.
    pub fn map_profiles(&self, mut f: impl FnMut(usize, usize, &Profile) -> Profile) -> Fdtmc {
        let mut m = self.clone();
        for (s, row) in m.transitions.iter_mut().enumerate() {
            for (t, p) in row.iter_mut() {
                *p = f(s, *t, p);
            }
        }
        m
    }

    pub fn with_rewards(mut self, rewards: Option<Vec<Profile>>) -> Fdtmc {
        self.rewards = rewards;
        self
    }

    /// Checks the probability axiom for every state and valid product, the
    /// `[0, 1]` range of every transition and the sign of rewards.
    pub fn validate(&self) -> Result<ValidationReport, ModelError> {
        let dense = self.densify::<Rational>()?;
        let products = self.diagram.valid_products()?;
        let mut report = ValidationReport::default();
        let one = Rational::one();
        for (s, row) in dense.rows.iter().enumerate() {
            for (i, product) in products.iter().enumerate() {
                let mut sum = Rational::zero();
                for (t, profile) in row {
                    let v = &profile.values[i];
                    sum += v;
                    if v.is_negative() || *v > one {
                        report.ranges.push(RangeViolation {
                            source: self.states[s].clone(),
                            target: self.states[*t].clone(),
                            product: product.clone(),
                            value: v.clone(),
                        });
                    }
                }
                if sum != one {
                    report.rows.push(RowViolation {
                        state: self.states[s].clone(),
                        product: product.clone(),
                        sum,
                    });
                }
            }
        }
        if let Some(rewards) = &dense.rewards {
            for (s, r) in rewards.iter().enumerate() {
                for (i, product) in products.iter().enumerate() {
                    if r.values[i].is_negative() {
                        report.rewards.push(RewardViolation {
                            state: self.states[s].clone(),
                            product: product.clone(),
                            value: r.values[i].clone(),
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    /// Like [`Fdtmc::validate`] but turns findings into an error.
    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let report = self.validate()?;
        if report.is_valid() {
            Ok(())
        } else {
            Err(ModelError::Invalid(report.to_string()))
        }
    }

    /// Evaluates every profile at every valid product.
    pub fn densify<T: Scalar>(&self) -> Result<DenseFdtmc<T>, ModelError> {
        let d = &self.diagram;
        let rows = self
            .transitions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(t, p)| Ok((*t, p.to_dense::<T>(d)?)))
                    .collect::<Result<Vec<_>, ModelError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rewards = match &self.rewards {
            Some(rs) => Some(
                rs.iter()
                    .map(|p| p.to_dense::<T>(d))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        Ok(DenseFdtmc {
            products: d.product_count()?,
            states: self.states.clone().into(),
            initial: self
                .initial
                .iter()
                .map(|(s, w)| (*s, T::from_rational(w)))
                .collect(),
            rows,
            labels: self.labels.clone().into(),
            rewards,
        })
    }

    /// The DTMC (or MRM, when rewards are present) of product `p`.
    pub fn project(&self, p: &Product) -> Result<Dtmc<Rational>, ModelError> {
        let d = &self.diagram;
        let mask = d.mask_of(p)?;
        let at = |profile: &Profile| -> Result<Rational, ModelError> { Ok(profile.compile(d)?.eval_mask(mask).clone()) };
        let rows = self
            .transitions
            .iter()
            .map(|row| {
                let mut out = Vec::with_capacity(row.len());
                for (t, profile) in row {
                    let v = at(profile)?;
                    if !v.is_zero() {
                        out.push((*t, v));
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let rewards = match &self.rewards {
            Some(rs) => Some(rs.iter().map(at).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        Ok(Dtmc {
            states: self.states.clone().into(),
            initial: self.initial.clone(),
            rows,
            labels: self.labels.clone().into(),
            rewards,
        })
    }

    /// `⊗` of the profiles along `path`; a path of at most one state has
    /// probability 1.
    pub fn path_probability(&self, path: &[usize]) -> Result<Profile, ModelError> {
        let mut acc = Profile::one();
        for w in path.windows(2) {
            let p = self.transition(w[0], w[1]).ok_or_else(|| ModelError::NotATransition {
                from: self.states[w[0]].clone(),
                to: self.states[w[1]].clone(),
            })?;
            acc = acc.mul(p);
        }
        Ok(acc)
    }

    pub fn path_probability_by_name(&self, path: &[&str]) -> Result<Profile, ModelError> {
        let indices = path
            .iter()
            .map(|n| self.state_index(n).ok_or_else(|| ModelError::UnknownState(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.path_probability(&indices)
    }

    /// The single-action FMDP with unguarded transitions.
    pub fn as_fmdp(&self, action: &str) -> Fmdp {
        let mut b = FmdpBuilder::new(self.diagram.clone());
        b.action(action);
        for s in &self.states {
            b.state(s);
        }
        for (s, w) in &self.initial {
            b.initial(&self.states[*s], w.clone()).expect("state exists");
        }
        for p in &self.propositions {
            b.proposition(p);
        }
        for (s, labels) in self.labels.iter().enumerate() {
            for l in labels {
                b.label(&self.states[s], l).expect("state exists");
            }
        }
        for (s, row) in self.transitions.iter().enumerate() {
            for (t, p) in row {
                b.transition(&self.states[s], action, Expr::Const(true), &self.states[*t], p.clone())
                    .expect("names are known");
            }
        }
        b.build().expect("an FDTMC always yields a well-formed FMDP")
    }

    /// Removes states that no valid product can reach from the initial
    /// distribution.
    pub fn prune_unreachable(&self) -> Result<Fdtmc, ModelError> {
        let dense = self.densify::<Rational>()?;
        let mut reached = vec![false; self.len()];
        let mut queue: VecDeque<usize> = self.initial.iter().map(|(s, _)| *s).collect();
        for &s in &queue {
            reached[s] = true;
        }
        while let Some(s) = queue.pop_front() {
            for (t, p) in &dense.rows[s] {
                if !reached[*t] && !p.is_zero() {
                    reached[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&s| reached[s]).collect();
        let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        Ok(Fdtmc {
            diagram: self.diagram.clone(),
            states: keep.iter().map(|&s| self.states[s].clone()).collect(),
            initial: self.initial.iter().map(|(s, w)| (remap[s], w.clone())).collect(),
            transitions: keep
                .iter()
                .map(|&s| {
                    self.transitions[s]
                        .iter()
                        .filter_map(|(t, p)| remap.get(t).map(|&nt| (nt, p.clone())))
                        .collect()
                })
                .collect(),
            labels: keep.iter().map(|&s| self.labels[s].clone()).collect(),
            propositions: self.propositions.clone(),
            rewards: self
                .rewards
                .as_ref()
                .map(|r| keep.iter().map(|&s| r[s].clone()).collect()),
        })
    }
}

/// An FDTMC with every profile evaluated at every valid product.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFdtmc<T> {
    pub products: usize,
    pub states: Arc<[String]>,
    pub initial: Vec<(usize, T)>,
    pub rows: Vec<Vec<(usize, DenseProfile<T>)>>,
    pub labels: Arc<[Labels]>,
    pub rewards: Option<Vec<DenseProfile<T>>>,
}

impl<T: Scalar> DenseFdtmc<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The concrete chain of the product at canonical index `index`.
    pub fn project(&self, index: usize) -> Dtmc<T> {
        Dtmc {
            states: self.states.clone(),
            initial: self.initial.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .filter(|(_, p)| !p.values[index].is_zero_value())
                        .map(|(t, p)| (*t, p.values[index].clone()))
                        .collect()
                })
                .collect(),
            labels: self.labels.clone(),
            rewards: self
                .rewards
                .as_ref()
                .map(|r| r.iter().map(|p| p.values[index].clone()).collect()),
        }
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (s, row) in self.rows.iter().enumerate() {
            for (t, _) in row {
                if !preds[*t].contains(&s) {
                    preds[*t].push(s);
                }
            }
        }
        preds
    }
}

/// Incremental construction of an [`Fdtmc`].
#[derive(Debug, Clone)]
pub struct FdtmcBuilder {
    diagram: Arc<FeatureDiagram>,
    states: Vec<String>,
    initial: Vec<(usize, Rational)>,
    transitions: Vec<BTreeMap<usize, Profile>>,
    labels: Vec<Labels>,
    propositions: BTreeSet<String>,
    rewards: Option<Vec<Profile>>,
}

impl FdtmcBuilder {
    pub fn new(diagram: Arc<FeatureDiagram>) -> Self {
        FdtmcBuilder {
            diagram,
            states: Vec::new(),
            initial: Vec::new(),
            transitions: Vec::new(),
            labels: Vec::new(),
            propositions: BTreeSet::new(),
            rewards: None,
        }
    }

    /// Adds a state, or returns the index of an existing one.
    pub fn state(&mut self, name: &str) -> usize {
        if let Some(i) = self.states.iter().position(|s| s == name) {
            return i;
        }
        self.states.push(name.to_string());
        self.transitions.push(BTreeMap::new());
        self.labels.push(Labels::new());
        if let Some(r) = &mut self.rewards {
            r.push(Profile::zero());
        }
        self.states.len() - 1
    }

    pub fn add_state(&mut self, name: &str) -> Result<usize, ModelError> {
        if self.states.iter().any(|s| s == name) {
            return Err(ModelError::DuplicateState(name.to_string()));
        }
        Ok(self.state(name))
    }

    fn index(&self, name: &str) -> Result<usize, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn initial(&mut self, name: &str, weight: Rational) -> Result<&mut Self, ModelError> {
        let s = self.index(name)?;
        self.initial.push((s, weight));
        Ok(self)
    }

    /// Adds `profile` to the transition `from -> to`.
    pub fn transition(&mut self, from: &str, to: &str, profile: Profile) -> Result<&mut Self, ModelError> {
        let s = self.index(from)?;
        let t = self.index(to)?;
        let entry = self.transitions[s].entry(t).or_insert_with(Profile::zero);
        *entry = entry.add(&profile);
        Ok(self)
    }

    pub fn proposition(&mut self, prop: &str) -> &mut Self {
        self.propositions.insert(prop.to_string());
        self
    }

    pub fn label(&mut self, state: &str, prop: &str) -> Result<&mut Self, ModelError> {
        let s = self.index(state)?;
        self.labels[s].insert(prop.to_string());
        self.propositions.insert(prop.to_string());
        Ok(self)
    }

    pub fn reward(&mut self, state: &str, profile: Profile) -> Result<&mut Self, ModelError> {
        let s = self.index(state)?;
        let n = self.states.len();
        let rewards = self.rewards.get_or_insert_with(|| vec![Profile::zero(); n]);
        rewards[s] = profile;
        Ok(self)
    }

    /// Adds, on every state, the self-loop `1 - Σ out-profiles`. Fails if
    /// that residual is negative for some product.
    pub fn complete_with_self_loops(&mut self) -> Result<&mut Self, ModelError> {
        let d = self.diagram.clone();
        let products = d.valid_products()?;
        for s in 0..self.states.len() {
            let total = self.transitions[s].values().fold(Profile::zero(), |acc, p| acc.add(p));
            let residual = total.complement();
            let dense = residual.to_dense::<Rational>(&d)?;
            let negative: Vec<String> = dense
                .values
                .iter()
                .zip(&products)
                .filter(|(v, _)| v.is_negative())
                .map(|(_, p)| p.to_string())
                .collect();
            if !negative.is_empty() {
                return Err(ModelError::NegativeSelfLoop {
                    state: self.states[s].clone(),
                    products: negative.join(", "),
                });
            }
            if dense.is_zero() {
                continue;
            }
            let residual = residual.compact(&d)?;
            let entry = self.transitions[s].entry(s).or_insert_with(Profile::zero);
            *entry = entry.add(&residual).compact(&d)?;
        }
        Ok(self)
    }

    pub fn build(self) -> Result<Fdtmc, ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let initial = normalize_initial(self.initial)?;
        for row in &self.transitions {
            for p in row.values() {
                p.compile(&self.diagram)?;
            }
        }
        if let Some(r) = &self.rewards {
            for p in r {
                p.compile(&self.diagram)?;
            }
        }
        Ok(Fdtmc {
            diagram: self.diagram,
            states: self.states,
            initial,
            transitions: self
                .transitions
                .into_iter()
                .map(|row| row.into_iter().filter(|(_, p)| !p.is_constant(&Rational::zero())).collect())
                .collect(),
            labels: self.labels,
            propositions: self.propositions,
            rewards: self.rewards,
        })
    }
}

/// Merges duplicate entries; an empty list means a point mass on state 0.
pub(crate) fn normalize_initial(initial: Vec<(usize, Rational)>) -> Result<Vec<(usize, Rational)>, ModelError> {
    if initial.is_empty() {
        return Ok(vec![(0, Rational::one())]);
    }
    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
    for (s, w) in initial {
        if w.is_negative() {
            return Err(ModelError::InitialDistribution(format!(
                "negative weight {}",
                format_rational(&w)
            )));
        }
        *merged.entry(s).or_insert_with(Rational::zero) += w;
    }
    let total: Rational = merged.values().sum();
    if total != Rational::one() {
        return Err(ModelError::InitialDistribution(format!(
            "weights sum to {}",
            format_rational(&total)
        )));
    }
    Ok(merged.into_iter().filter(|(_, w)| !w.is_zero()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_feature_expression as parse;
    use crate::rational::{int, rat};

    fn methane() -> Fdtmc {
        let d = Arc::new(FeatureDiagram::unconstrained(["W", "A", "V"]).unwrap());
        let mut b = FdtmcBuilder::new(d);
        b.state("no_methane");
        b.state("methane");
        b.initial("no_methane", int(1)).unwrap();
        b.label("methane", "methane").unwrap();
        b.transition("no_methane", "methane", Profile::constant(rat(1, 8))).unwrap();
        b.transition(
            "methane",
            "no_methane",
            Profile::guarded(vec![(parse("V").unwrap(), rat(9, 10))], rat(3, 4)),
        )
        .unwrap();
        b.complete_with_self_loops().unwrap();
        b.build().unwrap()
    }

    #[test]
    fn self_loop_completion_satisfies_axiom() {
        let m = methane();
        assert!(m.validate().unwrap().is_valid());
        let d = m.diagram().clone();
        let loop_profile = m.transition(1, 1).unwrap();
        for p in d.valid_products().unwrap() {
            let expected = if p.get("V").unwrap() { rat(1, 10) } else { rat(1, 4) };
            assert_eq!(loop_profile.eval_product(&d, &p).unwrap(), expected);
        }
    }

    #[test]
    fn completion_rejects_excess_mass() {
        let d = Arc::new(FeatureDiagram::unconstrained(["f"]).unwrap());
        let mut b = FdtmcBuilder::new(d);
        b.state("s");
        b.state("t");
        b.transition("s", "t", Profile::guarded(vec![(parse("f").unwrap(), rat(11, 10))], rat(1, 2)))
            .unwrap();
        match b.complete_with_self_loops() {
            Err(ModelError::NegativeSelfLoop { state, products }) => {
                assert_eq!(state, "s");
                assert_eq!(products, "{f}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seeded_mutation_is_reported() {
        let m = methane();
        let mutated = m.map_profiles(|s, t, p| {
            if (s, t) == (1, 0) {
                Profile::guarded(vec![(parse("V").unwrap(), rat(9, 10))], rat(17, 20))
            } else {
                p.clone()
            }
        });
        let report = mutated.validate().unwrap();
        assert_eq!(report.rows.len(), 4);
        for v in &report.rows {
            assert_eq!(v.state, "methane");
            assert_eq!(v.product.get("V"), Some(false));
            assert_eq!(v.sum, rat(11, 10));
        }
    }

    #[test]
    fn projection_and_paths() {
        let m = methane();
        let d = m.diagram().clone();
        let p = Product::from_pairs([("W", false), ("A", false), ("V", true)]);
        let dtmc = m.project(&p).unwrap();
        assert_eq!(dtmc.probability(1, 0), rat(9, 10));
        let path = m.path_probability_by_name(&["no_methane", "methane", "no_methane"]).unwrap();
        let base = Product::from_pairs([("W", false), ("A", false), ("V", false)]);
        assert_eq!(path.eval_product(&d, &base).unwrap(), rat(3, 32));
        assert_eq!(m.path_probability(&[0]).unwrap(), Profile::one());
        assert!(m.path_probability(&[]).unwrap().is_constant(&int(1)));
    }

    #[test]
    fn single_state_self_loop_is_valid() {
        let mut b = FdtmcBuilder::new(Arc::new(FeatureDiagram::trivial()));
        b.state("s");
        b.transition("s", "s", Profile::one()).unwrap();
        assert!(b.build().unwrap().validate().unwrap().is_valid());
    }

    #[test]
    fn initial_distribution_must_sum_to_one() {
        let mut b = FdtmcBuilder::new(Arc::new(FeatureDiagram::trivial()));
        b.state("s");
        b.state("t");
        b.initial("s", rat(1, 2)).unwrap();
        b.initial("t", rat(1, 3)).unwrap();
        assert!(matches!(b.build(), Err(ModelError::InitialDistribution(_))));
    }
}
