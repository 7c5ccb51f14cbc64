use std::sync::Arc;

use crate::model::Labels;
use crate::scalar::Scalar;

/// A concrete chain: one product's projection of an FDTMC. Rows list only
/// the nonzero successors in increasing target order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc<T> {
    pub states: Arc<[String]>,
    pub initial: Vec<(usize, T)>,
    pub rows: Vec<Vec<(usize, T)>>,
    pub labels: Arc<[Labels]>,
    /// Reward earned on each entry into a state.
    pub rewards: Option<Vec<T>>,
}

impl<T: Scalar> Dtmc<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn has_label(&self, state: usize, prop: &str) -> bool {
        self.labels[state].contains(prop)
    }

    pub fn row_sum(&self, state: usize) -> T {
        self.rows[state]
            .iter()
            .fold(T::zero_value(), |acc, (_, p)| acc.add(p))
    }

    pub fn probability(&self, from: usize, to: usize) -> T {
        self.rows[from]
            .iter()
            .find(|(t, _)| *t == to)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(T::zero_value)
    }

    /// Predecessor lists over the support graph.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (s, row) in self.rows.iter().enumerate() {
            for (t, _) in row {
                preds[*t].push(s);
            }
        }
        preds
    }
}
