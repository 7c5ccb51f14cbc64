use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::diagram::{FeatureDiagram, Product};
use crate::expr::Expr;
use crate::model::fdtmc::normalize_initial;
use crate::model::{Fdtmc, FdtmcBuilder, Labels, ModelError, RangeViolation};
use crate::profile::{DenseProfile, Profile};
use crate::rational::{format_rational, Rational};

/// One guarded, probabilistic transition of an FMDP. The guard reads
/// propositions of other components; the transition only exists in steps
/// where the guard holds.
#[derive(Debug, Clone, PartialEq)]
pub struct FmdpTransition {
    pub action: String,
    pub guard: Expr,
    pub target: usize,
    pub profile: Profile,
}

/// Featured Markov decision process whose actions are a base name plus an
/// observation guard over foreign propositions.
#[derive(Debug, Clone, PartialEq)]
pub struct Fmdp {
    pub(crate) diagram: Arc<FeatureDiagram>,
    pub(crate) states: Vec<String>,
    pub(crate) initial: Vec<(usize, Rational)>,
    pub(crate) actions: BTreeSet<String>,
    pub(crate) transitions: Vec<Vec<FmdpTransition>>,
    pub(crate) labels: Vec<Labels>,
    pub(crate) propositions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmdpViolation {
    pub state: String,
    pub action: String,
    /// Rendering of the foreign-proposition valuation, empty when the
    /// transitions are unguarded.
    pub observation: String,
    pub product: Product,
    pub sum: Rational,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FmdpReport {
    /// Row sums outside `{0, 1}`.
    pub inconsistent: Vec<FmdpViolation>,
    /// Row sums equal to 0 (action disabled).
    pub disabled: Vec<FmdpViolation>,
    pub ranges: Vec<RangeViolation>,
}

impl FmdpReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty() && self.ranges.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.is_consistent() && self.disabled.is_empty()
    }
}

impl fmt::Display for FmdpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.inconsistent {
            writeln!(
                f,
                "state `{}`, action `{}`{}, product {}: probabilities sum to {}",
                v.state,
                v.action,
                v.observation,
                v.product,
                format_rational(&v.sum)
            )?;
        }
        for v in &self.disabled {
            writeln!(
                f,
                "state `{}`, action `{}`{}, product {}: action disabled",
                v.state, v.action, v.observation, v.product
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
        Ok(())
    }
}

/// Per (state, action, observation valuation): the transitions whose guard
/// holds and their summed profile.
pub(crate) struct ObservationRow {
    pub state: usize,
    pub action: String,
    pub valuation: Vec<(String, bool)>,
    pub sum: DenseProfile<Rational>,
}

pub(crate) fn valuations(vars: &BTreeSet<String>) -> Vec<Vec<(String, bool)>> {
    let vars: Vec<&String> = vars.iter().collect();
    (0..1u64 << vars.len())
        .map(|m| {
            vars.iter()
                .enumerate()
                .map(|(i, v)| ((*v).clone(), m >> i & 1 == 1))
                .collect()
        })
        .collect()
}

pub(crate) fn render_valuation(valuation: &[(String, bool)]) -> String {
    if valuation.is_empty() {
        return String::new();
    }
    let e = Expr::minterm(valuation.iter().map(|(n, v)| (n.as_str(), *v)));
    format!(" observing [{e}]")
}

impl Fmdp {
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

    pub fn actions(&self) -> &BTreeSet<String> {
        &self.actions
    }

    pub fn transitions(&self, source: usize) -> &[FmdpTransition] {
        &self.transitions[source]
    }

    pub fn labels(&self, state: usize) -> &Labels {
        &self.labels[state]
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.propositions
    }

    /// Propositions read by guards (all foreign by construction).
    pub fn observed_propositions(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .flatten()
            .flat_map(|t| t.guard.vars())
            .collect()
    }

    pub(crate) fn observation_rows(&self) -> Result<Vec<ObservationRow>, ModelError> {
        let d = &self.diagram;
        let n = d.product_count()?;
        let mut rows = Vec::new();
        for (s, ts) in self.transitions.iter().enumerate() {
            let dense: Vec<DenseProfile<Rational>> = ts
                .iter()
                .map(|t| t.profile.to_dense::<Rational>(d))
                .collect::<Result<_, _>>()?;
            for action in &self.actions {
                let vars: BTreeSet<String> = ts
                    .iter()
                    .filter(|t| &t.action == action)
                    .flat_map(|t| t.guard.vars())
                    .collect();
                for valuation in valuations(&vars) {
                    let lookup = |name: &str| valuation.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
                    let mut sum = DenseProfile::<Rational>::zeros(n);
                    for (i, t) in ts.iter().enumerate() {
                        if &t.action == action && t.guard.eval(&lookup).expect("all guard variables bound") {
                            sum = sum.add(&dense[i])?;
                        }
                    }
                    rows.push(ObservationRow {
                        state: s,
                        action: action.clone(),
                        valuation,
                        sum,
                    });
                }
            }
        }
        Ok(rows)
    }

    /// Consistency (row sums in `{0, 1}`) and completeness findings per
    /// state, action, observation and product.
    pub fn validate(&self) -> Result<FmdpReport, ModelError> {
        let products = self.diagram.valid_products()?;
        let mut report = FmdpReport::default();
        for row in self.observation_rows()? {
            for (i, product) in products.iter().enumerate() {
                let sum = &row.sum.values[i];
                let violation = || FmdpViolation {
                    state: self.states[row.state].clone(),
                    action: row.action.clone(),
                    observation: render_valuation(&row.valuation),
                    product: product.clone(),
                    sum: sum.clone(),
                };
                if sum.is_zero() {
                    report.disabled.push(violation());
                } else if !sum.is_one() {
                    report.inconsistent.push(violation());
                }
            }
        }
        for (s, ts) in self.transitions.iter().enumerate() {
            for t in ts {
                let dense = t.profile.to_dense::<Rational>(&self.diagram)?;
                for (i, v) in dense.values.iter().enumerate() {
                    if v.is_negative() || *v > Rational::one() {
                        report.ranges.push(RangeViolation {
                            source: self.states[s].clone(),
                            target: self.states[t.target].clone(),
                            product: products[i].clone(),
                            value: v.clone(),
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    pub fn is_complete(&self) -> Result<bool, ModelError> {
        Ok(self.validate()?.is_complete())
    }

    /// Adds, wherever an action is disabled for some products and
    /// observations, a self-loop with probability 1 on exactly those.
    /// Fails on nondeterminism (a row sum above 1) or fractional rows.
    pub fn complete_deterministic(&self) -> Result<Fmdp, ModelError> {
        let products = self.diagram.valid_products()?;
        let mut out = self.clone();
        // (state, action) -> residual dense profile -> valuations
        let mut residuals: BTreeMap<(usize, String), Vec<(DenseProfile<Rational>, Vec<Expr>)>> = BTreeMap::new();
        for row in self.observation_rows()? {
            for (i, sum) in row.sum.values.iter().enumerate() {
                if *sum > Rational::one() {
                    return Err(ModelError::Nondeterminism {
                        state: self.states[row.state].clone(),
                        action: row.action.clone(),
                        observation: render_valuation(&row.valuation),
                        product: products[i].to_string(),
                    });
                }
                if !sum.is_zero() && !sum.is_one() {
                    return Err(ModelError::Incomplete(format!(
                        "state `{}`, action `{}`{}, product {}: probabilities sum to {}",
                        self.states[row.state],
                        row.action,
                        render_valuation(&row.valuation),
                        products[i],
                        format_rational(sum)
                    )));
                }
            }
            let residual = row.sum.complement();
            if residual.is_zero() {
                continue;
            }
            let minterm = Expr::minterm(row.valuation.iter().map(|(n, v)| (n.as_str(), *v)));
            let groups = residuals.entry((row.state, row.action.clone())).or_default();
            match groups.iter_mut().find(|(r, _)| *r == residual) {
                Some((_, guards)) => guards.push(minterm),
                None => groups.push((residual, vec![minterm])),
            }
        }
        for ((s, action), groups) in residuals {
            for (residual, guards) in groups {
                let profile = Profile::from_dense(&residual, &self.diagram)?.compact(&self.diagram)?;
                out.transitions[s].push(FmdpTransition {
                    action: action.clone(),
                    guard: Expr::any(guards).simplify(),
                    target: s,
                    profile,
                });
            }
        }
        Ok(out)
    }

    /// Drops the action component of a complete single-action FMDP whose
    /// guards are all resolved.
    pub fn as_fdtmc(&self) -> Result<Fdtmc, ModelError> {
        if self.actions.len() != 1 {
            return Err(ModelError::MultipleActions(
                self.actions.iter().cloned().collect::<Vec<_>>().join(", "),
            ));
        }
        let unresolved = self.observed_propositions();
        if !unresolved.is_empty() {
            return Err(ModelError::UnresolvedGuard(
                unresolved.into_iter().collect::<Vec<_>>().join(", "),
            ));
        }
        let report = self.validate()?;
        if !report.is_complete() {
            return Err(ModelError::Incomplete(report.to_string()));
        }
        let mut b = FdtmcBuilder::new(self.diagram.clone());
        for s in &self.states {
            b.state(s);
        }
        for (s, w) in &self.initial {
            b.initial(&self.states[*s], w.clone())?;
        }
        for p in &self.propositions {
            b.proposition(p);
        }
        for (s, labels) in self.labels.iter().enumerate() {
            for l in labels {
                b.label(&self.states[s], l)?;
            }
        }
        for (s, ts) in self.transitions.iter().enumerate() {
            for t in ts.iter().filter(|t| !t.guard.is_const(false)) {
                b.transition(&self.states[s], &self.states[t.target], t.profile.clone())?;
            }
        }
        let m = b.build()?;
        let d = m.diagram().clone();
        Ok(m.map_profiles(|_, _, p| p.compact(&d).unwrap_or_else(|_| p.clone())))
    }

    /// The concrete MDP of product `p`, as an FMDP over the empty diagram.
    pub fn project(&self, p: &Product) -> Result<Fmdp, ModelError> {
        let mask = self.diagram.mask_of(p)?;
        let mut out = self.clone();
        out.diagram = Arc::new(FeatureDiagram::trivial());
        for ts in out.transitions.iter_mut() {
            let mut kept = Vec::new();
            for t in ts.drain(..) {
                let value = t.profile.compile(&self.diagram)?.eval_mask(mask).clone();
                if !value.is_zero() {
                    kept.push(FmdpTransition {
                        profile: Profile::constant(value),
                        ..t
                    });
                }
            }
            *ts = kept;
        }
        Ok(out)
    }

    /// Semantic rows at the product with canonical index `index`: for every
    /// state, action and valuation of all observed propositions, the
    /// successor distribution by state name. Two FMDPs with equal rows are
    /// isomorphic via state names.
    pub fn concrete_rows(&self, index: usize) -> Result<ConcreteRows, ModelError> {
        let observed = self.observed_propositions();
        let all = valuations(&observed);
        let mask = self.diagram.product_masks()?[index];
        let mut rows = BTreeMap::new();
        for (s, ts) in self.transitions.iter().enumerate() {
            let values: Vec<Rational> = ts
                .iter()
                .map(|t| Ok(t.profile.compile(&self.diagram)?.eval_mask(mask).clone()))
                .collect::<Result<_, ModelError>>()?;
            for valuation in &all {
                let lookup = |name: &str| valuation.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
                for action in &self.actions {
                    let mut dist: BTreeMap<String, Rational> = BTreeMap::new();
                    for (t, v) in ts.iter().zip(&values) {
                        if &t.action == action && !v.is_zero() && t.guard.eval(&lookup).expect("bound") {
                            *dist.entry(self.states[t.target].clone()).or_insert_with(Rational::zero) += v;
                        }
                    }
                    dist.retain(|_, v| !v.is_zero());
                    if !dist.is_empty() {
                        rows.insert(
                            (self.states[s].clone(), action.clone(), render_valuation(valuation)),
                            dist,
                        );
                    }
                }
            }
        }
        Ok(rows)
    }
}

pub type ConcreteRows = BTreeMap<(String, String, String), BTreeMap<String, Rational>>;

/// Incremental construction of an [`Fmdp`].
#[derive(Debug, Clone)]
pub struct FmdpBuilder {
    inner: Fmdp,
}

impl FmdpBuilder {
    pub fn new(diagram: Arc<FeatureDiagram>) -> Self {
        FmdpBuilder {
            inner: Fmdp {
                diagram,
                states: Vec::new(),
                initial: Vec::new(),
                actions: BTreeSet::new(),
                transitions: Vec::new(),
                labels: Vec::new(),
                propositions: BTreeSet::new(),
            },
        }
    }

    pub fn action(&mut self, name: &str) -> &mut Self {
        self.inner.actions.insert(name.to_string());
        self
    }

    pub fn state(&mut self, name: &str) -> usize {
        if let Some(i) = self.inner.state_index(name) {
            return i;
        }
        self.inner.states.push(name.to_string());
        self.inner.transitions.push(Vec::new());
        self.inner.labels.push(Labels::new());
        self.inner.states.len() - 1
    }

    fn index(&self, name: &str) -> Result<usize, ModelError> {
        self.inner
            .state_index(name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn initial(&mut self, name: &str, weight: Rational) -> Result<&mut Self, ModelError> {
        let s = self.index(name)?;
        self.inner.initial.push((s, weight));
        Ok(self)
    }

    pub fn proposition(&mut self, prop: &str) -> &mut Self {
        self.inner.propositions.insert(prop.to_string());
        self
    }

    pub fn label(&mut self, state: &str, prop: &str) -> Result<&mut Self, ModelError> {
        let s = self.index(state)?;
        self.inner.labels[s].insert(prop.to_string());
        self.inner.propositions.insert(prop.to_string());
        Ok(self)
    }

    /// Adds a transition; one with the same action, guard and target has
    /// its profile increased instead.
    pub fn transition(
        &mut self,
        from: &str,
        action: &str,
        guard: Expr,
        to: &str,
        profile: Profile,
    ) -> Result<&mut Self, ModelError> {
        if !self.inner.actions.contains(action) {
            return Err(ModelError::UnknownAction(action.to_string()));
        }
        let s = self.index(from)?;
        let t = self.index(to)?;
        let guard = guard.simplify();
        if guard.is_const(false) {
            return Ok(self);
        }
        push_transition(
            &mut self.inner.transitions[s],
            FmdpTransition {
                action: action.to_string(),
                guard,
                target: t,
                profile,
            },
        );
        Ok(self)
    }

    pub fn build(self) -> Result<Fmdp, ModelError> {
        let mut m = self.inner;
        if m.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        m.initial = normalize_initial(m.initial)?;
        for (s, ts) in m.transitions.iter().enumerate() {
            for t in ts {
                t.profile.compile(&m.diagram)?;
                if let Some(p) = t.guard.vars().into_iter().find(|v| m.propositions.contains(v)) {
                    return Err(ModelError::OwnPropositionInGuard {
                        state: m.states[s].clone(),
                        proposition: p,
                    });
                }
            }
        }
        for ts in m.transitions.iter_mut() {
            ts.retain(|t| !t.profile.is_constant(&Rational::zero()));
        }
        Ok(m)
    }
}

pub(crate) fn push_transition(row: &mut Vec<FmdpTransition>, t: FmdpTransition) {
    match row
        .iter_mut()
        .find(|u| u.action == t.action && u.guard == t.guard && u.target == t.target)
    {
        Some(u) => u.profile = u.profile.add(&t.profile),
        None => row.push(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_feature_expression as parse;
    use crate::rational::rat;

    fn trivial() -> Arc<FeatureDiagram> {
        Arc::new(FeatureDiagram::trivial())
    }

    #[test]
    fn fdtmc_as_single_action_fmdp_is_complete() {
        let mut b = FdtmcBuilder::new(trivial());
        b.state("a");
        b.state("b");
        b.transition("a", "b", Profile::constant(rat(1, 3))).unwrap();
        b.complete_with_self_loops().unwrap();
        let m = b.build().unwrap().as_fmdp("tick");
        assert!(m.is_complete().unwrap());
        let back = m.as_fdtmc().unwrap();
        assert_eq!(back.transition(0, 1), Some(&Profile::constant(rat(1, 3))));
    }

    #[test]
    fn disabled_action_is_consistent_but_incomplete() {
        let mut b = FmdpBuilder::new(trivial());
        b.action("go").action("stop");
        b.state("s");
        b.transition("s", "go", Expr::Const(true), "s", Profile::one()).unwrap();
        let m = b.build().unwrap();
        let report = m.validate().unwrap();
        assert!(report.is_consistent());
        assert!(!report.is_complete());
        assert_eq!(report.disabled.len(), 1);
        assert!(matches!(m.as_fdtmc(), Err(ModelError::MultipleActions(_))));
    }

    #[test]
    fn partial_row_is_inconsistent() {
        let mut b = FmdpBuilder::new(trivial());
        b.action("tick");
        b.state("s");
        b.transition("s", "tick", Expr::Const(true), "s", Profile::constant(rat(7, 10))).unwrap();
        let report = b.build().unwrap().validate().unwrap();
        assert_eq!(report.inconsistent.len(), 1);
        assert_eq!(report.inconsistent[0].sum, rat(7, 10));
    }

    #[test]
    fn guards_are_checked_per_observation() {
        let mut b = FmdpBuilder::new(trivial());
        b.action("tick");
        b.state("s");
        b.state("t");
        b.transition("s", "tick", parse("go").unwrap(), "t", Profile::one()).unwrap();
        b.transition("s", "tick", parse("!go").unwrap(), "s", Profile::one()).unwrap();
        b.transition("t", "tick", Expr::Const(true), "t", Profile::one()).unwrap();
        let m = b.build().unwrap();
        assert!(m.is_complete().unwrap());
        assert!(matches!(m.as_fdtmc(), Err(ModelError::UnresolvedGuard(p)) if p == "go"));
    }

    #[test]
    fn own_propositions_cannot_be_observed() {
        let mut b = FmdpBuilder::new(trivial());
        b.action("tick");
        b.state("s");
        b.label("s", "hot").unwrap();
        b.transition("s", "tick", parse("hot").unwrap(), "s", Profile::one()).unwrap();
        assert!(matches!(b.build(), Err(ModelError::OwnPropositionInGuard { .. })));
    }

    #[test]
    fn incomplete_input_is_rejected_by_as_fdtmc() {
        let mut b = FmdpBuilder::new(trivial());
        b.action("tick");
        b.state("s");
        b.state("t");
        b.transition("s", "tick", Expr::Const(true), "t", Profile::one()).unwrap();
        assert!(matches!(b.build().unwrap().as_fdtmc(), Err(ModelError::Incomplete(_))));
    }
}
