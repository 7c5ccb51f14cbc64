//! Engine timings over a generated family.

use std::time::Duration;

use fpmc_core::family::{CheckOptions, Engine, FamilyResult};
use fpmc_core::model::Fdtmc;
use fpmc_core::pctl::Property;
use serde::Serialize;

use crate::build::{load_model, DslError};
use crate::generate::Family;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Engine(#[from] fpmc_core::family::EngineError),
    #[error("generated model has no property `{0}`")]
    MissingProperty(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub family: &'static str,
    pub n: usize,
    pub states: usize,
    pub products: usize,
    pub engine: &'static str,
    /// Fastest of the repetitions.
    pub seconds: f64,
    pub unknown: usize,
}

pub fn run_engine(engine: Engine, model: &Fdtmc, property: &Property, options: &CheckOptions) -> Result<FamilyResult, fpmc_core::family::EngineError> {
    match engine {
        Engine::Enumerative => fpmc_core::enumerative::check_family_enumerative(model, property, options),
        Engine::Parametric => fpmc_core::parametric::check_family_parametric(model, property, options).map(|r| r.result),
        Engine::Bounded => fpmc_core::bounded::check_family_bounded(model, property, options),
    }
}

/// Times every engine on `family` for each size in `sizes`, keeping the
/// fastest of `repeat` runs.
pub fn bench(
    family: Family,
    sizes: &[usize],
    property: &str,
    engines: &[Engine],
    options: &CheckOptions,
    repeat: usize,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &n in sizes {
        let built = load_model(&family.generate(n))?;
        let prop = built
            .property(property)
            .ok_or_else(|| BenchError::MissingProperty(property.to_string()))?
            .clone();
        let products = built.model.diagram().product_count().map_err(DslError::from)?;
        for &engine in engines {
            let mut best = Duration::MAX;
            let mut unknown = 0;
            for _ in 0..repeat.max(1) {
                let r = run_engine(engine, &built.model, &prop, options)?;
                best = best.min(r.elapsed);
                unknown = r.unknown_count();
            }
            rows.push(BenchRow {
                family: family.name(),
                n,
                states: built.model.len(),
                products,
                engine: engine.name(),
                seconds: best.as_secs_f64(),
                unknown,
            });
        }
    }
    Ok(rows)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:<18} {:>4} {:>7} {:>9} {:<8} {:>12} {:>8}\n", "family", "n", "states", "products", "engine", "seconds", "unknown");
    for r in rows {
        out.push_str(&format!(
            "{:<18} {:>4} {:>7} {:>9} {:<8} {:>12.6} {:>8}\n",
            r.family, r.n, r.states, r.products, r.engine, r.seconds, r.unknown
        ));
    }
    out
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let _ = w.serialize(r);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}
