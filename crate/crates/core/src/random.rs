//! Seeded random models for property-based testing and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diagram::FeatureDiagram;
use crate::expr::Expr;
use crate::model::{Fdtmc, FdtmcBuilder, Fmdp, FmdpBuilder, ModelError};
use crate::profile::Profile;
use crate::rational::{int, rat, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomFdtmcConfig {
    pub features: usize,
    pub states: usize,
    pub max_successors: usize,
    /// Denominator of every generated probability.
    pub granularity: i64,
    pub constrained: bool,
    pub rewards: bool,
}

impl Default for RandomFdtmcConfig {
    fn default() -> Self {
        RandomFdtmcConfig {
            features: 3,
            states: 6,
            max_successors: 3,
            granularity: 8,
            constrained: true,
            rewards: true,
        }
    }
}

fn feature_names(n: usize, offset: usize) -> Vec<String> {
    (offset..offset + n).map(|i| format!("f{i}")).collect()
}

/// `k` non-negative integers summing to `total`.
fn composition(rng: &mut impl Rng, total: i64, k: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (0..k.saturating_sub(1)).map(|_| rng.gen_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

fn random_literal(rng: &mut impl Rng, names: &[String]) -> Expr {
    let v = Expr::var(names[rng.gen_range(0..names.len())].as_str());
    if rng.gen_bool(0.5) {
        v
    } else {
        Expr::not(v)
    }
}

/// Profiles for `k` successors that sum to `total / granularity` at every
/// product, switching on one random feature literal.
fn split_profiles(rng: &mut impl Rng, names: &[String], k: usize, total: i64, granularity: i64) -> Vec<Profile> {
    let on = composition(rng, total, k);
    if names.is_empty() || rng.gen_bool(0.3) {
        return on.iter().map(|a| Profile::constant(rat(*a, granularity))).collect();
    }
    let off = composition(rng, total, k);
    let guard = random_literal(rng, names);
    on.iter()
        .zip(&off)
        .map(|(a, b)| Profile::guarded(vec![(guard.clone(), rat(*a, granularity))], rat(*b, granularity)).normalized())
        .collect()
}

/// States `s0..`, labels `goal` (absorbing) and `a`, `b`; rows are
/// completed with self-loops.
pub fn random_fdtmc(rng: &mut impl Rng, config: &RandomFdtmcConfig) -> Result<Fdtmc, ModelError> {
    let names = feature_names(config.features, 0);
    let constraint = if config.constrained && config.features >= 2 && rng.gen_bool(0.5) {
        Expr::implies(Expr::var(names[0].as_str()), Expr::var(names[1].as_str()))
    } else {
        Expr::Const(true)
    };
    let d = Arc::new(FeatureDiagram::new(names.clone(), constraint)?);
    let mut b = FdtmcBuilder::new(d);
    let states: Vec<String> = (0..config.states).map(|i| format!("s{i}")).collect();
    for s in &states {
        b.state(s);
    }
    for p in ["goal", "a", "b"] {
        b.proposition(p);
    }
    let goal = &states[config.states - 1];
    b.label(goal, "goal")?;
    for s in &states[..config.states - 1] {
        if rng.gen_bool(0.4) {
            b.label(s, "a")?;
        }
        if rng.gen_bool(0.3) {
            b.label(s, "b")?;
        }
    }
    let g = config.granularity;
    for s in &states[..config.states - 1] {
        let k = rng.gen_range(1..=config.max_successors.min(config.states));
        let mut targets: Vec<&String> = states.iter().collect();
        targets.shuffle(rng);
        let budget = rng.gen_range(g / 2..=g);
        let profiles = split_profiles(rng, &names, k, budget, g);
        for (t, p) in targets.into_iter().zip(profiles) {
            if !p.is_constant(&Rational::from_integer(0.into())) {
                b.transition(s, t, p)?;
            }
        }
        if config.rewards {
            let r = if names.is_empty() || rng.gen_bool(0.5) {
                Profile::constant(int(rng.gen_range(0..4)))
            } else {
                Profile::guarded(
                    vec![(random_literal(rng, &names), int(rng.gen_range(0..4)))],
                    int(rng.gen_range(0..4)),
                )
            };
            b.reward(s, r)?;
        }
    }
    b.complete_with_self_loops()?;
    b.build()
}

/// Two random complete FMDPs sharing the action `tick`: the first owns
/// proposition `p` and also has a local action `a`, the second owns `q`.
/// Each guards its moves on the other's proposition; their diagrams share
/// one feature.
pub fn random_fmdp_pair(rng: &mut impl Rng, states: usize) -> Result<(Fmdp, Fmdp), ModelError> {
    let d1 = Arc::new(FeatureDiagram::unconstrained(feature_names(2, 0))?);
    let d2 = Arc::new(FeatureDiagram::new(
        feature_names(2, 1),
        Expr::implies(Expr::var("f2"), Expr::var("f1")),
    )?);
    let m1 = random_fmdp(rng, d1, "m", "p", "q", &["tick", "a"], states)?;
    let m2 = random_fmdp(rng, d2, "n", "q", "p", &["tick"], states)?;
    Ok((m1, m2))
}

fn random_fmdp(
    rng: &mut impl Rng,
    d: Arc<FeatureDiagram>,
    prefix: &str,
    own: &str,
    observed: &str,
    actions: &[&str],
    n: usize,
) -> Result<Fmdp, ModelError> {
    let names = d.signature().to_vec();
    let mut b = FmdpBuilder::new(d);
    for a in actions {
        b.action(a);
    }
    b.proposition(own);
    let states: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    for s in &states {
        b.state(s);
        if rng.gen_bool(0.5) {
            b.label(s, own)?;
        }
    }
    let g = 8;
    for s in &states {
        for a in actions {
            let guards = if rng.gen_bool(0.6) {
                vec![Expr::var(observed), Expr::not(Expr::var(observed))]
            } else {
                vec![Expr::Const(true)]
            };
            for guard in guards {
                let k = rng.gen_range(1..=n.min(3));
                let mut targets: Vec<&String> = states.iter().collect();
                targets.shuffle(rng);
                for (t, p) in targets.into_iter().zip(split_profiles(rng, &names, k, g, g)) {
                    b.transition(s, a, guard.clone(), t, p)?;
                }
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_valid_and_reproducible() {
        for seed in 0..20 {
            let a = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
            let b = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
            assert!(a.validate().unwrap().is_valid());
            assert_eq!(a, b);
            let (m1, m2) = random_fmdp_pair(&mut ChaCha8Rng::seed_from_u64(seed), 3).unwrap();
            let r1 = m1.validate().unwrap();
            let r2 = m2.validate().unwrap();
            assert!(r1.is_consistent() && r1.is_complete(), "{r1}");
            assert!(r2.is_consistent() && r2.is_complete(), "{r2}");
        }
    }
}
