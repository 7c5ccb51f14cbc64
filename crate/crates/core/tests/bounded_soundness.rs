use fpmc_core::bounded::{check_family_bounded, until_trace};
use fpmc_core::enumerative::check_family_enumerative;
use fpmc_core::family::{CheckOptions, Value};
use fpmc_core::pctl::{parse_property, StateFormula};
use fpmc_core::random::{random_fdtmc, RandomFdtmcConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn trace_is_monotone_and_brackets_the_exact_value(seed in any::<u64>()) {
        let model = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
        let exact = check_family_enumerative(&model, &parse_property("P=?(a U goal)").unwrap(), &CheckOptions::default()).unwrap();
        let trace = until_trace(&model, &StateFormula::atom("a"), &StateFormula::atom("goal"), 50, &CheckOptions::default()).unwrap();
        for w in trace.windows(2) {
            for (before, after) in w[0].iter().zip(&w[1]) {
                prop_assert!(before.0 <= after.0);
                prop_assert!(after.1 <= before.1);
            }
        }
        for step in &trace {
            for ((lo, hi), r) in step.iter().zip(&exact.results) {
                let v = r.value.as_ref().and_then(Value::finite).unwrap();
                prop_assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn frontier_skipping_changes_nothing(seed in any::<u64>()) {
        let model = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
        for text in ["P=?(F goal)", "R=?[F goal]", "P[>=0.5](!b U goal)"] {
            let prop = parse_property(text).unwrap();
            let with = check_family_bounded(&model, &prop, &CheckOptions::default()).unwrap();
            let without = check_family_bounded(&model, &prop, &CheckOptions { frontier: false, ..CheckOptions::default() }).unwrap();
            prop_assert_eq!(&with.results, &without.results);
        }
    }

    #[test]
    fn intervals_contain_the_exact_value(seed in any::<u64>()) {
        let model = random_fdtmc(&mut ChaCha8Rng::seed_from_u64(seed), &RandomFdtmcConfig::default()).unwrap();
        for text in ["P=?(F goal)", "R=?[F goal]"] {
            let prop = parse_property(text).unwrap();
            let b = check_family_bounded(&model, &prop, &CheckOptions::default()).unwrap();
            let e = check_family_enumerative(&model, &prop, &CheckOptions::default()).unwrap();
            for (x, y) in b.results.iter().zip(&e.results) {
                match (&x.value, &y.value) {
                    (Some(Value::Finite(mid)), Some(Value::Finite(v))) => {
                        let err = x.error.clone().unwrap_or_default();
                        prop_assert!(&(mid - &err) <= v && v <= &(mid + &err), "{}: {} ± {} vs {}", text, mid, err, v);
                    }
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
    }
}
