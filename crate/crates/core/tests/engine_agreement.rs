use fpmc_core::bounded::check_family_bounded;
use fpmc_core::enumerative::check_family_enumerative;
use fpmc_core::family::{CheckOptions, Value};
use fpmc_core::parametric::check_family_parametric;
use fpmc_core::pctl::parse_property;
use fpmc_core::random::{random_fdtmc, RandomFdtmcConfig};
use fpmc_core::rational::{rat, to_f64};
use fpmc_core::Rational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PROPERTIES: &[&str] = &[
    "P=?(F goal)",
    "P=?(a U goal)",
    "P=?(X goal)",
    "P=?(F<=3 goal)",
    "R=?[F goal]",
    "P[>=0.5](!b U goal)",
    "P=?(F P[>0.5](X goal))",
    "a | P[<0.25](X a)",
];

#[test]
fn exact_engines_agree_on_random_models() {
    let options = CheckOptions::default();
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_fdtmc(&mut rng, &RandomFdtmcConfig::default()).unwrap();
        for text in PROPERTIES {
            let prop = parse_property(text).unwrap();
            let e = check_family_enumerative(&model, &prop, &options).unwrap();
            let p = check_family_parametric(&model, &prop, &options).unwrap();
            assert!(
                e.agrees_with(&p.result, &Rational::zero()),
                "seed {seed}, {text}:\n{:?}\n{:?}",
                e.results,
                p.result.results
            );
            let b = check_family_bounded(&model, &prop, &options).unwrap();
            assert!(e.agrees_with(&b, &Rational::zero()), "seed {seed}, {text} (bounded)");
            for (x, y) in e.results.iter().zip(&b.results) {
                if let (Some(Value::Finite(v)), Some(Value::Finite(w))) = (&x.value, &y.value) {
                    let diff = if v > w { v - w } else { w - v };
                    assert!(diff <= rat(1, 1000), "seed {seed}, {text}: {v} vs {w}");
                }
            }
        }
    }
}

#[test]
fn float_mode_stays_close() {
    let exact = CheckOptions::default();
    let float = CheckOptions {
        float: true,
        ..CheckOptions::default()
    };
    for seed in 100..110u64 {
        let model = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
        for text in ["P=?(F goal)", "R=?[F goal]"] {
            let prop = parse_property(text).unwrap();
            let a = check_family_enumerative(&model, &prop, &exact).unwrap();
            let b = check_family_enumerative(&model, &prop, &float).unwrap();
            for (x, y) in a.results.iter().zip(&b.results) {
                match (&x.value, &y.value) {
                    (Some(Value::Finite(v)), Some(Value::Finite(w))) => {
                        assert!((to_f64(v) - to_f64(w)).abs() < 1e-6, "seed {seed}, {text}")
                    }
                    (v, w) => assert_eq!(v, w),
                }
            }
        }
    }
}
