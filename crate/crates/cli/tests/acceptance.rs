//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fpmc::bench::bench;
use fpmc::generate::Family;
use fpmc::{load_model, parse_model_file, print_model_file};
use fpmc_core::bounded::{check_family_bounded, until_trace};
use fpmc_core::enumerative::check_family_enumerative;
use fpmc_core::family::{CheckOptions, Engine, Value, Verdict};
use fpmc_core::model::{observer_product, sync_product, Fdtmc, Fmdp, ModelError};
use fpmc_core::parametric::check_family_parametric;
use fpmc_core::pctl::{parse_property, parse_state_formula, PathFormula, ProbBound, Property, StateFormula};
use fpmc_core::random::{random_fdtmc, random_fmdp_pair, RandomFdtmcConfig};
use fpmc_core::rational::{int, rat};
use fpmc_core::{Expr, Profile, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn load_fixture(name: &str) -> fpmc::BuiltModel {
    let text = std::fs::read_to_string(fixtures().join(name)).expect("fixture is readable");
    load_model(&text).expect("fixture loads")
}

fn epsilon() -> Rational {
    rat(1, 1000)
}

fn abs(x: Rational) -> Rational {
    if x < int(0) {
        -x
    } else {
        x
    }
}

fn finite(v: &Option<Value>) -> Option<&Rational> {
    v.as_ref().and_then(Value::finite)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Wiper expected energy: exact target polynomial at every product,
/// enumeration equal, bounded within epsilon, under one second.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = load_fixture("wiper.fdl");
    let prop = parse_property("R=?[F end]").map_err(|e| e.to_string())?;
    let options = CheckOptions::default();
    let param = check_family_parametric(&m.model, &prop, &options).map_err(|e| e.to_string())?;
    let en = check_family_enumerative(&m.model, &prop, &options).map_err(|e| e.to_string())?;
    let bo = check_family_bounded(&m.model, &prop, &options).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(param.result.results.len() == 8, || format!("{} products", param.result.results.len()))?;
    for ((p, e), b) in param.result.results.iter().zip(&en.results).zip(&bo.results) {
        let bit = |name: &str| int(i64::from(p.product.get(name) == Some(true)));
        let (s, v, e_) = (bit("spd2"), bit("very"), bit("eco"));
        let target = (int(-15) * &s * &e_ * &v - int(15) * &s * &e_ + int(45) * &s * &v + int(45) * &s
            - int(40) * &e_
            + int(120))
            / int(8);
        let pv = finite(&p.value).ok_or_else(|| format!("no parametric value at {}", p.product))?;
        ensure(*pv == target, || format!("parametric {} at {}, expected {}", pv, p.product, target))?;
        ensure(e.value == p.value, || format!("enumerative {:?} at {}", e.value, p.product))?;
        let bv = finite(&b.value).ok_or_else(|| format!("no bounded value at {}", p.product))?;
        ensure(abs(bv - &target) <= epsilon(), || format!("bounded {} at {}", bv, p.product))?;
    }
    let named = |pairs: &[(&str, bool)]| fpmc_core::Product::from_pairs(pairs.iter().copied());
    let spot = [
        (named(&[("spd2", true), ("very", true), ("eco", false)]), rat(105, 4)),
        (named(&[("spd2", true), ("very", true), ("eco", true)]), rat(35, 2)),
        (named(&[("spd2", false), ("very", false), ("eco", false)]), int(15)),
    ];
    for (product, expected) in spot {
        let got = param.result.value_of(&product).and_then(Value::finite).cloned();
        ensure(got.as_ref() == Some(&expected), || format!("{product}: {got:?}"))?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("8 products exact, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn criterion_2() -> Outcome {
    let m = load_fixture("minepump.fdl");
    let products = m.model.diagram().product_count().map_err(|e| e.to_string())?;
    ensure(m.model.len() == 24, || format!("{} states", m.model.len()))?;
    ensure(products == 8, || format!("{products} products"))?;
    let report = m.model.validate().map_err(|e| e.to_string())?;
    ensure(report.is_valid(), || report.to_string())?;
    let prop = parse_property("P=?(X methane)").map_err(|e| e.to_string())?;
    let r = check_family_enumerative(&m.model, &prop, &CheckOptions::default()).map_err(|e| e.to_string())?;
    for p in &r.results {
        ensure(finite(&p.value) == Some(&rat(1, 8)), || format!("{}: {:?}", p.product, p.value))?;
    }
    Ok("24 states, 8 products, X methane = 0.125".into())
}

/// Seeded corpus shared by criteria 3 and 5.
fn corpus() -> Vec<(Fdtmc, Property)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_917);
    (0..200)
        .map(|_| {
            let config = RandomFdtmcConfig {
                features: rng.gen_range(0..=4),
                states: rng.gen_range(2..=8),
                max_successors: 3,
                granularity: 8,
                constrained: true,
                rewards: false,
            };
            let model = random_fdtmc(&mut rng, &config).expect("random model builds");
            let left = ["true", "a", "!b", "a | b"][rng.gen_range(0..4)];
            let text = match rng.gen_range(0..4) {
                0 => format!("P=?({left} U goal)"),
                1 => format!("P=?({left} U<={} goal)", rng.gen_range(0..6)),
                2 => "P=?(X (goal | a))".to_string(),
                _ => format!("P[>=0.5]({left} U goal)"),
            };
            (model, parse_property(&text).expect("generated property parses"))
        })
        .collect()
}

fn criterion_3(corpus: &[(Fdtmc, Property)]) -> Outcome {
    let start = Instant::now();
    let options = CheckOptions::default();
    let mut decided = 0;
    for (i, (model, prop)) in corpus.iter().enumerate() {
        let en = check_family_enumerative(model, prop, &options).map_err(|e| format!("model {i}: {e}"))?;
        let pa = check_family_parametric(model, prop, &options).map_err(|e| format!("model {i}: {e}"))?;
        let bo = check_family_bounded(model, prop, &options).map_err(|e| format!("model {i}: {e}"))?;
        for ((e, p), b) in en.results.iter().zip(&pa.result.results).zip(&bo.results) {
            ensure(e.value == p.value && e.verdict == p.verdict, || {
                format!("model {i} `{prop}` at {}: enum {:?} vs param {:?}", e.product, e.value, p.value)
            })?;
            let (Some(exact), Some(approx)) = (finite(&e.value), finite(&b.value)) else {
                return Err(format!("model {i}: missing value at {}", e.product));
            };
            let err = b.error.clone().unwrap_or_else(|| int(0));
            let diff = abs(exact - approx);
            ensure(diff <= err, || format!("model {i} `{prop}` at {}: exact {exact} outside {approx} ± {err}", e.product))?;
            ensure(diff <= epsilon(), || format!("model {i} `{prop}` at {}: off by {diff}", e.product))?;
            if b.verdict != Verdict::Unknown {
                ensure(b.verdict == e.verdict, || format!("model {i} `{prop}` at {}: bounded verdict {}", e.product, b.verdict))?;
                decided += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("200 models, {decided} product results decided and matched, {:.1} s", elapsed.as_secs_f64()))
}

fn projection_commutes(
    compose: fn(&Fmdp, &Fmdp) -> Result<Fmdp, ModelError>,
    m1: &Fmdp,
    m2: &Fmdp,
) -> Result<(), String> {
    let composed = compose(m1, m2).map_err(|e| e.to_string())?;
    let report = composed.validate().map_err(|e| e.to_string())?;
    ensure(report.is_consistent() && report.is_complete(), || format!("composition not complete: {report}"))?;
    for p in composed.diagram().valid_products().map_err(|e| e.to_string())? {
        let lhs = composed.project(&p).and_then(|m| m.concrete_rows(0)).map_err(|e| e.to_string())?;
        let rhs = compose(
            &m1.project(&p).map_err(|e| e.to_string())?,
            &m2.project(&p).map_err(|e| e.to_string())?,
        )
        .and_then(|m| m.concrete_rows(0))
        .map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("projection differs at {p}"))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let states = rng.gen_range(1..=3);
        let (m1, m2) = random_fmdp_pair(&mut rng, states).map_err(|e| e.to_string())?;
        for m in [&m1, &m2] {
            let r = m.validate().map_err(|e| e.to_string())?;
            ensure(r.is_complete(), || format!("pair {i}: input incomplete: {r}"))?;
        }
        projection_commutes(sync_product, &m1, &m2).map_err(|e| format!("pair {i}, sync: {e}"))?;
        projection_commutes(observer_product, &m1, &m2).map_err(|e| format!("pair {i}, observer: {e}"))?;
    }
    Ok("100 pairs, both products complete and projection-compatible".into())
}

fn until_parts(prop: &Property) -> Option<(StateFormula, StateFormula)> {
    let Property::State(StateFormula::Prob { path, .. }) = prop else {
        return None;
    };
    match &**path {
        PathFormula::Until { left, right, bound: None } => Some((left.clone(), right.clone())),
        _ => None,
    }
}

fn criterion_5(corpus: &[(Fdtmc, Property)]) -> Outcome {
    let options = CheckOptions::default();
    let goal = parse_state_formula("goal").map_err(|e| e.to_string())?;
    let mut checks = 0usize;
    for (i, (model, prop)) in corpus.iter().enumerate() {
        let (left, right) = until_parts(prop).unwrap_or((StateFormula::True, goal.clone()));
        let path = PathFormula::Until {
            left: left.clone(),
            right: right.clone(),
            bound: None,
        };
        let exact_prop = Property::State(StateFormula::prob(ProbBound::Query, path));
        let exact = check_family_enumerative(model, &exact_prop, &options).map_err(|e| e.to_string())?;
        let trace = until_trace(model, &left, &right, 40, &options).map_err(|e| e.to_string())?;
        for (p, r) in exact.results.iter().enumerate() {
            let x = finite(&r.value).ok_or("missing exact value")?;
            let mut previous = int(0);
            for (k, step) in trace.iter().enumerate() {
                let (lo, hi) = &step[p];
                ensure(*lo >= previous, || format!("model {i}, {}: lower bound drops at depth {k}", r.product))?;
                ensure(lo <= x && x <= hi, || {
                    format!("model {i}, {}: exact {x} outside [{lo}, {hi}] at depth {k}", r.product)
                })?;
                previous = lo.clone();
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (model, product, depth) bounds checked"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let options = CheckOptions {
        workers: Some(1),
        ..CheckOptions::default()
    };
    let sizes = [2, 4, 6, 8, 10];
    let rows = bench(Family::ServiceProvider, &sizes, "safe", &Engine::ALL, &options, 3).map_err(|e| e.to_string())?;
    let time = |engine: Engine, n: usize| {
        rows.iter()
            .find(|r| r.engine == engine.name() && r.n == n)
            .map(|r| r.seconds)
            .unwrap_or(f64::NAN)
    };
    let enum_times: Vec<f64> = sizes.iter().map(|&n| time(Engine::Enumerative, n)).collect();
    ensure(enum_times.windows(2).all(|w| w[0] < w[1]), || format!("enumerative times {enum_times:?}"))?;
    let (e, p, b) = (
        time(Engine::Enumerative, 10),
        time(Engine::Parametric, 10),
        time(Engine::Bounded, 10),
    );
    ensure(e > p && e > b, || format!("n=10: enum {e:.4} s, param {p:.4} s, bounded {b:.4} s"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "enum {} s; n=10 param {p:.4} s, bounded {b:.4} s",
        enum_times.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(" < ")
    ))
}

/// Row sums computed product by product from the raw profiles.
fn brute_force_violations(model: &Fdtmc) -> (Vec<(String, String)>, bool) {
    let d = model.diagram();
    let mut rows = Vec::new();
    let mut ranges_ok = true;
    for p in d.valid_products().expect("small diagram") {
        for s in 0..model.len() {
            let mut sum = int(0);
            for (_, profile) in model.transitions(s) {
                let v = profile.eval_product(d, &p).expect("profile evaluates");
                ranges_ok &= v >= int(0) && v <= int(1);
                sum += v;
            }
            if sum != int(1) {
                rows.push((model.states()[s].clone(), p.to_string()));
            }
        }
    }
    rows.sort();
    (rows, ranges_ok)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut rejected, mut consistent) = (0, 0);
    for i in 0..50 {
        let config = RandomFdtmcConfig {
            features: rng.gen_range(1..=3),
            states: rng.gen_range(2..=6),
            rewards: false,
            ..RandomFdtmcConfig::default()
        };
        let model = random_fdtmc(&mut rng, &config).map_err(|e| e.to_string())?;
        let names = model.diagram().signature().to_vec();
        let s = rng.gen_range(0..model.len());
        let k = rng.gen_range(0..model.transitions(s).len());
        let target = model.transitions(s)[k].0;
        let delta = rat(rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 }, 16);
        let guard = match rng.gen_range(0..3) {
            0 => Expr::Const(true),
            1 => Expr::var(names[rng.gen_range(0..names.len())].as_str()),
            _ => Expr::and(
                Expr::var(names[0].as_str()),
                Expr::not(Expr::var(names[names.len() - 1].as_str())),
            ),
        };
        let bump = Profile::guarded(vec![(guard, delta)], int(0));
        let mutated = model.map_profiles(|from, to, p| if (from, to) == (s, target) { p.add(&bump) } else { p.clone() });
        let report = mutated.validate().map_err(|e| e.to_string())?;
        let mut reported: Vec<(String, String)> =
            report.rows.iter().map(|v| (v.state.clone(), v.product.to_string())).collect();
        reported.sort();
        let (expected, ranges_ok) = brute_force_violations(&mutated);
        ensure(reported == expected, || format!("mutant {i}: validator {reported:?}, brute force {expected:?}"))?;
        ensure(report.ranges.is_empty() == ranges_ok, || format!("mutant {i}: range findings disagree"))?;
        if report.is_valid() {
            consistent += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!("{rejected} rejected with matching (state, product) sets, {consistent} still consistent"))
}

fn bundled_fixtures() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .expect("fixture directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fdl"))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let files = bundled_fixtures();
    ensure(files.len() >= 4, || format!("only {} fixtures", files.len()))?;
    let exe = env!("CARGO_BIN_EXE_fpmc");
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let ast = parse_model_file(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let printed = print_model_file(&ast);
        let again = parse_model_file(&printed).map_err(|e| format!("{} reprinted: {e}", f.display()))?;
        ensure(ast == again, || format!("{}: round trip changed the syntax tree", f.display()))?;
        ensure(print_model_file(&again) == printed, || format!("{}: printing is not stable", f.display()))?;
        for format in ["table", "csv", "json"] {
            let run = || {
                Command::new(exe)
                    .args(["check", "--engine", "all", "--no-timing", "--format", format])
                    .arg(f)
                    .output()
                    .map_err(|e| e.to_string())
            };
            let (a, b) = (run()?, run()?);
            ensure(a.status.code() == b.status.code() && a.status.code() != Some(2), || {
                format!("{} {format}: exit {:?} / {:?}: {}", f.display(), a.status.code(), b.status.code(), String::from_utf8_lossy(&a.stderr))
            })?;
            ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || format!("{} {format}: output differs", f.display()))?;
        }
    }
    Ok(format!("{} fixtures round-trip; table, csv and json reports byte-identical", files.len()))
}

fn main() {
    let corpus = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("wiper golden values", Box::new(criterion_1)),
        ("minepump structure", Box::new(criterion_2)),
        ("cross-engine equivalence", Box::new(|| criterion_3(&corpus))),
        ("composition theorems", Box::new(criterion_4)),
        ("bounded-search soundness", Box::new(|| criterion_5(&corpus))),
        ("scaling trend", Box::new(criterion_6)),
        ("validator sensitivity", Box::new(criterion_7)),
        ("round trip and report determinism", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2} s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2} s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
