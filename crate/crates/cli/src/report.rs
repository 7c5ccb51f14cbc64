//! Check reports as an aligned table, CSV or JSON.

use std::collections::BTreeMap;

use clap::ValueEnum;
use fpmc_core::family::{product_agreement, FamilyResult, Value};
use fpmc_core::rational::{format_approx, format_rational, to_f64};
use fpmc_core::Rational;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// One engine's outcome on one property.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub result: FamilyResult,
    /// Closed form of the value, parametric engine only.
    pub expression: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub model: String,
    pub property_name: Option<String>,
    pub runs: Vec<EngineRun>,
    /// Tolerance of the agreement column.
    pub tolerance: Rational,
    pub timing: bool,
}

/// Longest exact rendering shown in tables before falling back to decimals.
const EXACT_WIDTH: usize = 16;

fn exact(v: &Value) -> String {
    v.to_string()
}

fn approx(v: &Value) -> Option<f64> {
    v.finite().map(to_f64)
}

fn short(v: &Value) -> String {
    let s = exact(v);
    match v {
        Value::Finite(r) if s.len() > EXACT_WIDTH => format!("~{}", format_approx(r, 6)),
        _ => s,
    }
}

impl Report {
    fn products(&self) -> usize {
        self.runs.first().map_or(0, |r| r.result.results.len())
    }

    fn property(&self) -> &str {
        self.runs.first().map_or("", |r| r.result.property.as_str())
    }

    /// Per product: do all engines agree? `None` with a single engine.
    pub fn agreement(&self) -> Vec<Option<bool>> {
        (0..self.products())
            .map(|i| {
                (self.runs.len() > 1).then(|| {
                    let first = &self.runs[0].result.results[i];
                    self.runs[1..]
                        .iter()
                        .all(|r| product_agreement(first, &r.result.results[i], &self.tolerance))
                })
            })
            .collect()
    }

    pub fn unknown_count(&self) -> usize {
        self.runs.iter().map(|r| r.result.unknown_count()).sum()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn table(&self) -> String {
        let agree = self.agreement();
        let mut header = vec!["product".to_string()];
        for r in &self.runs {
            let e = r.result.engine.name();
            header.push(format!("{e} value"));
            if r.result.results.iter().any(|p| p.error.is_some()) {
                header.push(format!("{e} error"));
            }
            header.push(format!("{e} verdict"));
        }
        if self.runs.len() > 1 {
            header.push("agree".into());
        }
        let mut rows = vec![header];
        for i in 0..self.products() {
            let mut row = vec![self.runs[0].result.results[i].product.to_string()];
            for r in &self.runs {
                let p = &r.result.results[i];
                row.push(p.value.as_ref().map_or("-".into(), short));
                if r.result.results.iter().any(|p| p.error.is_some()) {
                    row.push(p.error.as_ref().map_or("-".into(), |e| format_approx(e, 8)));
                }
                row.push(p.verdict.name().into());
            }
            if let Some(a) = agree[i] {
                row.push(if a { "yes" } else { "NO" }.into());
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("model: {}\nproperty: {}", self.model, self.property());
        if let Some(name) = &self.property_name {
            out.push_str(&format!(" ({name})"));
        }
        out.push('\n');
        for (k, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if k == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("  "));
                out.push('\n');
            }
        }
        for r in &self.runs {
            let e = r.result.engine.name();
            if self.timing {
                out.push_str(&format!("{e}: {:.3} ms\n", r.result.elapsed.as_secs_f64() * 1e3));
            }
            for w in &r.result.warnings {
                out.push_str(&format!("{e}: warning: {w}\n"));
            }
            if let Some(x) = &r.expression {
                out.push_str(&format!("{e}: expression:\n"));
                for line in x.lines() {
                    out.push_str(&format!("  {line}\n"));
                }
            }
        }
        let unknown = self.unknown_count();
        if unknown > 0 {
            out.push_str(&format!("unknown verdicts: {unknown}\n"));
        }
        out
    }

    fn csv(&self) -> String {
        let agree = self.agreement();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["product", "engine", "value", "approx", "error", "verdict", "agree"];
        if self.timing {
            header.push("elapsed_ms");
        }
        let _ = w.write_record(&header);
        for i in 0..self.products() {
            for r in &self.runs {
                let p = &r.result.results[i];
                let mut rec = vec![
                    p.product.to_string(),
                    r.result.engine.name().to_string(),
                    p.value.as_ref().map_or(String::new(), exact),
                    p.value.as_ref().and_then(approx).map_or(String::new(), |x| x.to_string()),
                    p.error.as_ref().map_or(String::new(), format_rational),
                    p.verdict.name().to_string(),
                    agree[i].map_or(String::new(), |a| a.to_string()),
                ];
                if self.timing {
                    rec.push(format!("{:.3}", r.result.elapsed.as_secs_f64() * 1e3));
                }
                let _ = w.write_record(&rec);
            }
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    fn json(&self) -> String {
        let agree = self.agreement();
        let engines = self
            .runs
            .iter()
            .map(|r| JsonEngine {
                name: r.result.engine.name(),
                elapsed_ms: self.timing.then_some(r.result.elapsed.as_secs_f64() * 1e3),
                unknown: r.result.unknown_count(),
                warnings: r.result.warnings.clone(),
                expression: r.expression.clone(),
            })
            .collect();
        let products = (0..self.products())
            .map(|i| {
                let product = &self.runs[0].result.results[i].product;
                JsonProduct {
                    product: product.to_string(),
                    features: product.assignment(),
                    results: self
                        .runs
                        .iter()
                        .map(|r| {
                            let p = &r.result.results[i];
                            (
                                r.result.engine.name(),
                                JsonResult {
                                    value: p.value.as_ref().map(exact),
                                    approx: p.value.as_ref().and_then(approx),
                                    error: p.error.as_ref().map(format_rational),
                                    verdict: p.verdict.name(),
                                },
                            )
                        })
                        .collect(),
                    agree: agree[i],
                }
            })
            .collect();
        let doc = JsonReport {
            schema: 1,
            model: &self.model,
            property: self.property(),
            property_name: self.property_name.as_deref(),
            engines,
            products,
        };
        let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: u32,
    model: &'a str,
    property: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    property_name: Option<&'a str>,
    engines: Vec<JsonEngine>,
    products: Vec<JsonProduct>,
}

#[derive(Serialize)]
struct JsonEngine {
    name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
    unknown: usize,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expression: Option<String>,
}

#[derive(Serialize)]
struct JsonProduct {
    product: String,
    features: BTreeMap<String, bool>,
    results: BTreeMap<&'static str, JsonResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

#[derive(Serialize)]
struct JsonResult {
    value: Option<String>,
    approx: Option<f64>,
    error: Option<String>,
    verdict: &'static str,
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpmc_core::family::{Engine, ProductResult, Verdict};
    use fpmc_core::rational::rat;
    use fpmc_core::Product;
    use std::time::Duration;

    fn run(engine: Engine, v: Rational, error: Option<Rational>) -> EngineRun {
        EngineRun {
            result: FamilyResult {
                engine,
                property: "P=?(F goal)".into(),
                results: vec![ProductResult {
                    product: Product::from_pairs([("a", true)]),
                    value: Some(Value::Finite(v)),
                    error,
                    verdict: Verdict::NotApplicable,
                }],
                elapsed: Duration::from_millis(3),
                warnings: vec![],
            },
            expression: None,
        }
    }

    fn report(runs: Vec<EngineRun>, timing: bool) -> Report {
        Report {
            model: "m.fdl".into(),
            property_name: None,
            runs,
            tolerance: rat(1, 1000),
            timing,
        }
    }

    #[test]
    fn agreement_column_uses_error_bars() {
        let r = report(
            vec![
                run(Engine::Enumerative, rat(1, 3), None),
                run(Engine::Bounded, rat(33, 100), Some(rat(1, 400))),
            ],
            false,
        );
        assert_eq!(r.agreement(), vec![Some(true)]);
        let r = report(
            vec![
                run(Engine::Enumerative, rat(1, 3), None),
                run(Engine::Bounded, rat(3, 10), Some(rat(1, 500))),
            ],
            false,
        );
        assert_eq!(r.agreement(), vec![Some(false)]);
    }

    #[test]
    fn formats_carry_the_same_values() {
        let r = report(vec![run(Engine::Enumerative, rat(1, 3), None)], false);
        assert!(r.render(Format::Table).contains("1/3"));
        let csv = r.render(Format::Csv);
        assert_eq!(csv.lines().nth(1).unwrap(), "{a},enum,1/3,0.3333333333333333,,-,");
        let json: serde_json::Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(json["schema"], 1);
        assert_eq!(json["products"][0]["results"]["enum"]["value"], "1/3");
        assert!(json["engines"][0].get("elapsed_ms").is_none());
        let timed = report(vec![run(Engine::Enumerative, rat(1, 3), None)], true);
        assert!(timed.render(Format::Table).contains("enum: 3.000 ms"));
    }
}
