use std::collections::BTreeSet;
use std::sync::Arc;

use crate::expr::Expr;
use crate::model::fmdp::push_transition;
use crate::model::{Fmdp, FmdpTransition, Labels, ModelError};

fn composite_name(a: &str, b: &str) -> String {
    format!("{a}.{b}")
}

/// Reads of the partner's propositions resolve against `labels`; other
/// names stay symbolic.
fn observe(guard: &Expr, owned: &BTreeSet<String>, labels: &Labels) -> Expr {
    guard.substitute(&|name: &str| owned.contains(name).then(|| labels.contains(name)))
}

fn conjoin_guards(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(true), g) | (g, Expr::Const(true)) => g,
        (a, b) => Expr::and(a, b).simplify(),
    }
}

/// State space, labels, diagram and initial distribution shared by both
/// products.
fn skeleton(m1: &Fmdp, m2: &Fmdp, actions: BTreeSet<String>) -> Result<Fmdp, ModelError> {
    let overlap: Vec<&String> = m1.propositions.intersection(&m2.propositions).collect();
    if !overlap.is_empty() {
        return Err(ModelError::PropositionOverlap(
            overlap.into_iter().cloned().collect::<Vec<_>>().join(", "),
        ));
    }
    let n2 = m2.len();
    let mut states = Vec::with_capacity(m1.len() * n2);
    let mut labels = Vec::with_capacity(m1.len() * n2);
    for (i, a) in m1.states.iter().enumerate() {
        for (j, b) in m2.states.iter().enumerate() {
            states.push(composite_name(a, b));
            labels.push(m1.labels[i].union(&m2.labels[j]).cloned().collect());
        }
    }
    let mut initial = Vec::new();
    for (i, w1) in &m1.initial {
        for (j, w2) in &m2.initial {
            initial.push((i * n2 + j, w1 * w2));
        }
    }
    Ok(Fmdp {
        diagram: Arc::new(m1.diagram.conjoin(&m2.diagram)),
        transitions: vec![Vec::new(); states.len()],
        states,
        initial,
        actions,
        labels,
        propositions: m1.propositions.union(&m2.propositions).cloned().collect(),
    })
}

/// `M1 ∥ M2`: shared actions move both components with independent
/// choices, other actions move one component. Each side's guards read the
/// partner's current labels.
pub fn sync_product(m1: &Fmdp, m2: &Fmdp) -> Result<Fmdp, ModelError> {
    let actions: BTreeSet<String> = m1.actions.union(&m2.actions).cloned().collect();
    let mut out = skeleton(m1, m2, actions)?;
    let n2 = m2.len();
    for s1 in 0..m1.len() {
        for s2 in 0..n2 {
            let row = &mut out.transitions[s1 * n2 + s2];
            for t1 in &m1.transitions[s1] {
                let g1 = observe(&t1.guard, &m2.propositions, &m2.labels[s2]);
                if g1.is_const(false) {
                    continue;
                }
                if m2.actions.contains(&t1.action) {
                    for t2 in m2.transitions[s2].iter().filter(|t| t.action == t1.action) {
                        let g2 = observe(&t2.guard, &m1.propositions, &m1.labels[s1]);
                        let guard = conjoin_guards(g1.clone(), g2);
                        if guard.is_const(false) {
                            continue;
                        }
                        push_transition(
                            row,
                            FmdpTransition {
                                action: t1.action.clone(),
                                guard,
                                target: t1.target * n2 + t2.target,
                                profile: t1.profile.mul(&t2.profile),
                            },
                        );
                    }
                } else {
                    push_transition(
                        row,
                        FmdpTransition {
                            action: t1.action.clone(),
                            guard: g1,
                            target: t1.target * n2 + s2,
                            profile: t1.profile.clone(),
                        },
                    );
                }
            }
            for t2 in m2.transitions[s2].iter().filter(|t| !m1.actions.contains(&t.action)) {
                let g2 = observe(&t2.guard, &m1.propositions, &m1.labels[s1]);
                if g2.is_const(false) {
                    continue;
                }
                push_transition(
                    row,
                    FmdpTransition {
                        action: t2.action.clone(),
                        guard: g2,
                        target: s1 * n2 + t2.target,
                        profile: t2.profile.clone(),
                    },
                );
            }
        }
    }
    Ok(out)
}

/// `M1 ⊳ M2`: on every step of `M1`, the observer `M2` moves reacting to
/// the labels of `M1`'s next state. The observer must be complete and have
/// a single action; `M1`'s own guards read the observer's current labels.
pub fn observer_product(m1: &Fmdp, m2: &Fmdp) -> Result<Fmdp, ModelError> {
    if m2.actions.len() != 1 {
        return Err(ModelError::ObserverActions(m2.actions.len()));
    }
    let report = m2.validate()?;
    if !report.is_complete() {
        return Err(ModelError::ObserverIncomplete(report.to_string()));
    }
    let mut out = skeleton(m1, m2, m1.actions.clone())?;
    let n2 = m2.len();
    for s1 in 0..m1.len() {
        for s2 in 0..n2 {
            let row = &mut out.transitions[s1 * n2 + s2];
            for t1 in &m1.transitions[s1] {
                let g1 = observe(&t1.guard, &m2.propositions, &m2.labels[s2]);
                if g1.is_const(false) {
                    continue;
                }
                for t2 in &m2.transitions[s2] {
                    let g2 = observe(&t2.guard, &m1.propositions, &m1.labels[t1.target]);
                    let guard = conjoin_guards(g1.clone(), g2);
                    if guard.is_const(false) {
                        continue;
                    }
                    push_transition(
                        row,
                        FmdpTransition {
                            action: t1.action.clone(),
                            guard,
                            target: t1.target * n2 + t2.target,
                            profile: t1.profile.mul(&t2.profile),
                        },
                    );
                }
            }
        }
    }
    Ok(out)
}
