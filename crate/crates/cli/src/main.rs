use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fpmc_core::family::{CheckOptions, Engine};
use fpmc_core::pctl::{parse_property, Property};
use fpmc_core::rational::parse_rational;
use fpmc_core::Rational;

use fpmc::bench::{bench, render_csv, render_table};
use fpmc::generate::Family;
use fpmc::report::{EngineRun, Format, Report};
use fpmc::{load_model, print_model_file, BuiltModel};

#[derive(Parser)]
#[command(name = "fpmc", version, about = "Family-based probabilistic model checking of product lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Enum,
    Param,
    Bounded,
    All,
}

impl EngineArg {
    fn engines(self) -> Vec<Engine> {
        match self {
            EngineArg::Enum => vec![Engine::Enumerative],
            EngineArg::Param => vec![Engine::Parametric],
            EngineArg::Bounded => vec![Engine::Bounded],
            EngineArg::All => Engine::ALL.to_vec(),
        }
    }
}

#[derive(clap::Args)]
struct EngineOpts {
    /// Engine to run.
    #[arg(long, value_enum, default_value = "all")]
    engine: EngineArg,
    /// Error tolerance of the bounded engine, also used for agreement.
    #[arg(long, default_value = "0.001", value_parser = rational_arg)]
    epsilon: Rational,
    /// Fixed exploration depth for the bounded engine.
    #[arg(long)]
    bound: Option<u64>,
    /// Depth ceiling of the bounded engine.
    #[arg(long, default_value_t = 100_000)]
    max_depth: u64,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    /// Floating-point arithmetic instead of exact rationals.
    #[arg(long)]
    float: bool,
    /// Do not retry unknown verdicts with a finer epsilon.
    #[arg(long)]
    no_deepen: bool,
}

impl EngineOpts {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            workers: self.workers,
            epsilon: self.epsilon.clone(),
            max_depth: self.max_depth,
            bound: self.bound,
            float: self.float,
            deepen: !self.no_deepen,
            ..CheckOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check properties on every product of a model file.
    Check {
        model: PathBuf,
        /// Property name declared in the file, or a formula. Repeatable;
        /// all declared properties when absent.
        #[arg(long = "prop", short = 'p')]
        props: Vec<String>,
        #[command(flatten)]
        engine: EngineOpts,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Write the closed-form value of each property, as computed by the
        /// parametric engine, to this file; also shown in table reports.
        #[arg(long, value_name = "PATH")]
        emit_expression: Option<PathBuf>,
        /// Leave out elapsed times, for reproducible output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Time the engines on a generated family.
    Bench {
        #[arg(long, value_enum, default_value = "service-provider")]
        family: Family,
        /// Comma-separated family sizes.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        sizes: Vec<usize>,
        /// Name of a property of the generated model.
        #[arg(long, default_value = "safe")]
        prop: String,
        #[command(flatten)]
        engine: EngineOpts,
        /// Runs per measurement; the fastest counts.
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Write a generated family member as a model file.
    Generate {
        #[arg(value_enum)]
        family: Family,
        n: usize,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summarize a model file and its validation.
    Show {
        model: PathBuf,
        /// Print the canonical form of the file.
        #[arg(long)]
        canonical: bool,
        /// List the valid products.
        #[arg(long)]
        products: bool,
    },
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    match parse_rational(s) {
        Some(v) if v > Rational::from_integer(0.into()) => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn read_model(path: &Path) -> Result<BuiltModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    load_model(&text).with_context(|| format!("{}", path.display()))
}

fn resolve_properties(m: &BuiltModel, props: &[String]) -> Result<Vec<(Option<String>, Property)>> {
    if props.is_empty() {
        if m.properties.is_empty() {
            bail!("the model declares no property; pass one with --prop");
        }
        return Ok(m.properties.iter().map(|(n, p)| (Some(n.clone()), p.clone())).collect());
    }
    props
        .iter()
        .map(|text| match m.property(text) {
            Some(p) => Ok((Some(text.clone()), p.clone())),
            None => parse_property(text)
                .map(|p| (None, p))
                .with_context(|| format!("`{text}` is neither a declared property nor a valid formula")),
        })
        .collect()
}

/// Returns whether some verdict is unknown.
fn check(
    model: &Path,
    props: &[String],
    engine: &EngineOpts,
    format: Format,
    emit_expression: Option<&Path>,
    no_timing: bool,
) -> Result<bool> {
    let m = read_model(model)?;
    m.model
        .ensure_valid()
        .with_context(|| format!("{}", model.display()))?;
    let options = engine.options();
    let mut reports = Vec::new();
    for (name, property) in resolve_properties(&m, props)? {
        let mut runs = Vec::new();
        for e in engine.engine.engines() {
            let run = match e {
                Engine::Parametric => {
                    let r = fpmc_core::parametric::check_family_parametric(&m.model, &property, &options)?;
                    EngineRun {
                        expression: if emit_expression.is_some() { r.expression() } else { None },
                        result: r.result,
                    }
                }
                _ => EngineRun {
                    result: fpmc::bench::run_engine(e, &m.model, &property, &options)?,
                    expression: None,
                },
            };
            runs.push(run);
        }
        reports.push(Report {
            model: model.display().to_string(),
            property_name: name,
            runs,
            tolerance: options.epsilon.clone(),
            timing: !no_timing,
        });
    }
    if let Some(path) = emit_expression {
        let mut text = String::new();
        for r in &reports {
            if let Some(run) = r.runs.iter().find(|run| run.result.engine == Engine::Parametric) {
                text.push_str(&format!("# {}\n", run.result.property));
                text.push_str(run.expression.as_deref().unwrap_or("(no closed form)"));
                text.push('\n');
            }
        }
        if text.is_empty() {
            bail!("--emit-expression needs the parametric engine (--engine param or all)");
        }
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let unknown = reports.iter().any(|r| r.unknown_count() > 0);
    let out = match format {
        Format::Json if reports.len() > 1 => {
            let docs: Vec<String> = reports.iter().map(|r| r.render(format)).collect();
            let values: Vec<serde_json::Value> = docs
                .iter()
                .map(|d| serde_json::from_str(d))
                .collect::<std::result::Result<_, _>>()?;
            serde_json::to_string_pretty(&values)? + "\n"
        }
        Format::Table => reports.iter().map(|r| r.render(format)).collect::<Vec<_>>().join("\n"),
        Format::Csv => {
            let mut out = String::new();
            for (i, r) in reports.iter().enumerate() {
                let body = r.render(format);
                let (head, rest) = body.split_once('\n').unwrap_or((&body, ""));
                if i == 0 {
                    out.push_str(&format!("property,{head}\n"));
                }
                let prop = r.runs.first().map_or(String::new(), |x| x.result.property.clone());
                push_prefixed(&mut out, &prop, rest);
            }
            out
        }
        Format::Json => reports[0].render(format),
    };
    print!("{out}");
    Ok(unknown)
}

fn push_prefixed(out: &mut String, property: &str, body: &str) {
    let quoted = if property.contains([',', '"']) {
        format!("\"{}\"", property.replace('"', "\"\""))
    } else {
        property.to_string()
    };
    for line in body.lines() {
        out.push_str(&format!("{quoted},{line}\n"));
    }
}

fn show(model: &Path, canonical: bool, products: bool) -> Result<()> {
    let text = std::fs::read_to_string(model).with_context(|| format!("cannot read {}", model.display()))?;
    let m = load_model(&text).with_context(|| format!("{}", model.display()))?;
    if canonical {
        print!("{}", print_model_file(&m.file));
        return Ok(());
    }
    let d = m.model.diagram();
    println!("features: {}", d.signature().join(" "));
    println!("constraint: {}", d.constraint());
    println!("products: {}", d.product_count()?);
    println!("states: {}", m.model.len());
    println!("transitions: {}", m.model.transition_count());
    println!(
        "propositions: {}",
        m.model.propositions().iter().cloned().collect::<Vec<_>>().join(" ")
    );
    println!("rewards: {}", if m.model.rewards().is_some() { "yes" } else { "no" });
    for (name, p) in &m.properties {
        println!("property {name}: {p}");
    }
    let report = m.model.validate()?;
    if report.is_valid() {
        println!("validation: ok");
    } else {
        println!("validation: {} violation(s)", report.rows.len() + report.ranges.len() + report.rewards.len());
        println!("{report}");
    }
    if products {
        for p in d.valid_products()? {
            println!("{p}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            model,
            props,
            engine,
            format,
            emit_expression,
            no_timing,
        } => {
            let unknown = check(&model, &props, &engine, format, emit_expression.as_deref(), no_timing)?;
            Ok(if unknown { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Bench {
            family,
            sizes,
            prop,
            engine,
            repeat,
            format,
        } => {
            let rows = bench(family, &sizes, &prop, &engine.engine.engines(), &engine.options(), repeat)?;
            let out = match format {
                Format::Table => render_table(&rows),
                Format::Csv => render_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
            };
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { family, n, output } => {
            let text = family.generate(n);
            match output {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Show {
            model,
            canonical,
            products,
        } => {
            show(&model, canonical, products)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
