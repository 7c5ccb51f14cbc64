//! State elimination on a graph with a source `σ` and a sink `τ`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;

use crate::rational::Rational;

use super::poly::Poly;
use super::ratfun::RationalFunction;

#[derive(Debug, Clone)]
struct Edge {
    p: RationalFunction,
    /// Reward mass: expected reward collected along the edge times its
    /// probability.
    r: RationalFunction,
}

/// Outcome of eliminating every inner node: the `σ → τ` probability, the
/// reward mass, and the polynomials that must be non-zero at a product for
/// both to be valid there.
#[derive(Debug, Clone)]
pub struct Elimination {
    pub probability: RationalFunction,
    pub reward: RationalFunction,
    pub guards: Vec<Poly>,
}

impl Elimination {
    pub fn is_regular(&self, mask: u64) -> bool {
        self.guards.iter().all(|g| !g.eval(mask).is_zero())
    }

    pub fn probability_at(&self, mask: u64) -> Option<Rational> {
        if self.is_regular(mask) {
            self.probability.eval(mask)
        } else {
            None
        }
    }

    /// Reward mass at a product. Equals the expected reward wherever the
    /// probability is 1.
    pub fn reward_at(&self, mask: u64) -> Option<Rational> {
        if self.is_regular(mask) {
            self.reward.eval(mask)
        } else {
            None
        }
    }
}

pub struct Graph {
    states: usize,
    out: Vec<BTreeMap<usize, Edge>>,
    inc: Vec<BTreeSet<usize>>,
    rewards: bool,
}

impl Graph {
    /// Nodes `0..states` are states, `states` is `σ` and `states + 1` is `τ`.
    pub fn new(states: usize, rewards: bool) -> Self {
        Graph {
            states,
            out: vec![BTreeMap::new(); states + 2],
            inc: vec![BTreeSet::new(); states + 2],
            rewards,
        }
    }

    pub fn source(&self) -> usize {
        self.states
    }

    pub fn sink(&self) -> usize {
        self.states + 1
    }

    pub fn add(&mut self, from: usize, to: usize, p: Poly, r: Poly) {
        if p.is_zero() {
            return;
        }
        self.add_edge(
            from,
            to,
            Edge {
                p: RationalFunction::from_poly(p),
                r: RationalFunction::from_poly(r),
            },
        );
    }

    fn add_edge(&mut self, from: usize, to: usize, e: Edge) {
        if e.p.is_zero() && e.r.is_zero() {
            return;
        }
        let rewards = self.rewards;
        match self.out[from].get_mut(&to) {
            Some(old) => {
                old.p = old.p.add(&e.p);
                if rewards {
                    old.r = old.r.add(&e.r);
                }
            }
            None => {
                self.out[from].insert(to, e);
                self.inc[to].insert(from);
            }
        }
    }

    fn remove_node(&mut self, v: usize) {
        for w in std::mem::take(&mut self.out[v]).into_keys() {
            self.inc[w].remove(&v);
        }
        for u in std::mem::take(&mut self.inc[v]) {
            self.out[u].remove(&v);
        }
    }

    /// Drops nodes not reachable from `σ` or unable to reach `τ`.
    fn prune(&mut self) -> Vec<bool> {
        let total = self.states + 2;
        let mut forward = vec![false; total];
        let mut queue = VecDeque::from([self.source()]);
        forward[self.source()] = true;
        while let Some(u) = queue.pop_front() {
            for &w in self.out[u].keys() {
                if !forward[w] {
                    forward[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut backward = vec![false; total];
        let mut queue = VecDeque::from([self.sink()]);
        backward[self.sink()] = true;
        while let Some(w) = queue.pop_front() {
            for &u in &self.inc[w] {
                if !backward[u] {
                    backward[u] = true;
                    queue.push_back(u);
                }
            }
        }
        let alive: Vec<bool> = (0..total).map(|v| forward[v] && backward[v]).collect();
        for v in 0..self.states {
            if !alive[v] {
                self.remove_node(v);
            }
        }
        alive
    }

    fn degree(&self, v: usize) -> usize {
        self.out[v].keys().filter(|&&w| w != v).count() + self.inc[v].iter().filter(|&&u| u != v).count()
    }

    /// Eliminates every state, fewest incident edges first (ties by
    /// index).
    pub fn eliminate(mut self) -> Elimination {
        let mut alive = self.prune();
        let mut guards: Vec<Poly> = Vec::new();
        loop {
            let next = (0..self.states)
                .filter(|&v| alive[v])
                .min_by_key(|&v| (self.degree(v), v));
            let Some(v) = next else { break };
            alive[v] = false;
            let self_loop = self.out[v].remove(&v);
            self.inc[v].remove(&v);
            let (p_star, r_star) = match self_loop {
                Some(l) => {
                    let (p_star, gap) = l.p.loop_factor();
                    if gap.as_constant().is_none() && !guards.contains(&gap) {
                        guards.push(gap);
                    }
                    let r_star = if self.rewards {
                        l.r.mul(&p_star).mul(&p_star)
                    } else {
                        RationalFunction::zero()
                    };
                    (p_star, r_star)
                }
                None => (RationalFunction::one(), RationalFunction::zero()),
            };
            let succs: Vec<(usize, Edge)> = std::mem::take(&mut self.out[v]).into_iter().collect();
            for (w, _) in &succs {
                self.inc[*w].remove(&v);
            }
            let preds: Vec<usize> = std::mem::take(&mut self.inc[v]).into_iter().collect();
            for u in preds {
                let Some(a) = self.out[u].remove(&v) else { continue };
                let a_star = a.p.mul(&p_star);
                for (w, b) in &succs {
                    let p = a_star.mul(&b.p);
                    let r = if self.rewards {
                        a.r.mul(&p_star)
                            .mul(&b.p)
                            .add(&a.p.mul(&r_star).mul(&b.p))
                            .add(&a_star.mul(&b.r))
                    } else {
                        RationalFunction::zero()
                    };
                    self.add_edge(u, *w, Edge { p, r });
                }
            }
        }
        let (source, sink) = (self.source(), self.sink());
        let (probability, reward) = match self.out[source].remove(&sink) {
            Some(e) => (e.p, e.r),
            None => (RationalFunction::zero(), RationalFunction::zero()),
        };
        Elimination {
            probability,
            reward,
            guards,
        }
    }
}
