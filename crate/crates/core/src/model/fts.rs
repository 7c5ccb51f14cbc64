use std::collections::BTreeSet;
use std::sync::Arc;

use crate::diagram::FeatureDiagram;
use crate::expr::Expr;
use crate::model::fdtmc::normalize_initial;
use crate::model::{Fmdp, FmdpBuilder, Labels, ModelError};
use crate::profile::Profile;
use crate::rational::Rational;

/// A transition enabled in the products satisfying `feature`.
#[derive(Debug, Clone, PartialEq)]
pub struct FtsTransition {
    pub source: usize,
    pub action: String,
    pub guard: Expr,
    pub target: usize,
    pub feature: Expr,
}

/// Featured transition system: the 0/1 special case of an FMDP.
#[derive(Debug, Clone, PartialEq)]
pub struct Fts {
    diagram: Arc<FeatureDiagram>,
    states: Vec<String>,
    initial: Vec<(usize, Rational)>,
    actions: BTreeSet<String>,
    transitions: Vec<FtsTransition>,
    labels: Vec<Labels>,
    propositions: BTreeSet<String>,
}

impl Fts {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transitions(&self) -> &[FtsTransition] {
        &self.transitions
    }

    pub fn diagram(&self) -> &Arc<FeatureDiagram> {
        &self.diagram
    }

    /// Each transition gets the indicator profile of its feature expression.
    pub fn to_fmdp(&self) -> Result<Fmdp, ModelError> {
        let mut b = FmdpBuilder::new(self.diagram.clone());
        for a in &self.actions {
            b.action(a);
        }
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
        for t in &self.transitions {
            b.transition(
                &self.states[t.source],
                &t.action,
                t.guard.clone(),
                &self.states[t.target],
                Profile::indicator(&t.feature),
            )?;
        }
        b.build()
    }

    /// [`Fts::to_fmdp`] followed by deterministic completion.
    pub fn to_completed_fmdp(&self) -> Result<Fmdp, ModelError> {
        self.to_fmdp()?.complete_deterministic()
    }
}

#[derive(Debug, Clone)]
pub struct FtsBuilder {
    inner: Fts,
}

impl FtsBuilder {
    pub fn new(diagram: Arc<FeatureDiagram>) -> Self {
        FtsBuilder {
            inner: Fts {
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
        if let Some(i) = self.inner.states.iter().position(|s| s == name) {
            return i;
        }
        self.inner.states.push(name.to_string());
        self.inner.labels.push(Labels::new());
        self.inner.states.len() - 1
    }

    fn index(&self, name: &str) -> Result<usize, ModelError> {
        self.inner
            .states
            .iter()
            .position(|s| s == name)
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

    pub fn transition(
        &mut self,
        from: &str,
        action: &str,
        guard: Expr,
        to: &str,
        feature: Expr,
    ) -> Result<&mut Self, ModelError> {
        if !self.inner.actions.contains(action) {
            return Err(ModelError::UnknownAction(action.to_string()));
        }
        let source = self.index(from)?;
        let target = self.index(to)?;
        self.inner.transitions.push(FtsTransition {
            source,
            action: action.to_string(),
            guard,
            target,
            feature,
        });
        Ok(self)
    }

    pub fn build(self) -> Result<Fts, ModelError> {
        let mut m = self.inner;
        if m.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        m.initial = normalize_initial(m.initial)?;
        Ok(m)
    }
}
