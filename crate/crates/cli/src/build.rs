//! Turns a parsed model file into one FDTMC.
//!
//! Components share the file's feature diagram. Rows of an `fdtmc` are
//! completed with self-loops; an `fmdp` is completed per (action, guard)
//! group that has at least one transition; an `fts` is completed
//! deterministically. Inside a `system`, an `fdtmc` moves on action `tick`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use fpmc_core::model::{observer_product, sync_product, Fdtmc, FdtmcBuilder, Fmdp, FmdpBuilder, FtsBuilder, ModelError};
use fpmc_core::pctl::{parse_property, Property};
use fpmc_core::rational::int;
use fpmc_core::{Expr, FeatureDiagram, FeatureError, ParseError, Profile, ProfileError, Rational};
use thiserror::Error;

use crate::ast::*;
use crate::parser::parse_model_file;

/// Action given to an `fdtmc` used inside a `system`.
pub const FDTMC_ACTION: &str = "tick";

#[derive(Debug, Error)]
pub enum DslError {
    #[error("syntax error at {0}")]
    Parse(ParseError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{context}: {error}")]
    Model { context: String, error: ModelError },
    #[error("property `{name}`: {error}")]
    Property { name: String, error: ParseError },
    #[error("{0}")]
    Semantic(String),
}

impl From<ParseError> for DslError {
    fn from(e: ParseError) -> Self {
        DslError::Parse(e)
    }
}

fn in_context(context: impl Into<String>) -> impl FnOnce(ModelError) -> DslError {
    let context = context.into();
    move |error| DslError::Model { context, error }
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub file: ModelFile,
    pub model: Fdtmc,
    /// Declared properties, in file order.
    pub properties: Vec<(String, Property)>,
}

impl BuiltModel {
    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

pub fn load_model(text: &str) -> Result<BuiltModel, DslError> {
    build_model(parse_model_file(text)?)
}

pub fn build_model(file: ModelFile) -> Result<BuiltModel, DslError> {
    let features = Features::collect(&file)?;
    let diagram = Arc::new(features.diagram()?);
    let mut params = HashMap::new();
    for p in &file.params {
        if params.insert(p.name.clone(), features.profile(&p.cases)).is_some() {
            return Err(DslError::Semantic(format!("parameter `{}` is declared twice", p.name)));
        }
    }
    let builder = Builder {
        features: &features,
        diagram: &diagram,
        params: &params,
        file: &file,
    };
    let model = builder.system()?;
    let properties = file
        .properties
        .iter()
        .map(|p| {
            parse_property(&p.text)
                .map(|prop| (p.name.clone(), prop))
                .map_err(|error| DslError::Property {
                    name: p.name.clone(),
                    error,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BuiltModel { file, model, properties })
}

/// Signature, aliases and constraints from the feature declarations.
struct Features {
    signature: Vec<String>,
    aliases: HashMap<String, Expr>,
    constraints: Vec<Expr>,
}

impl Features {
    fn collect(file: &ModelFile) -> Result<Self, DslError> {
        let mut f = Features {
            signature: Vec::new(),
            aliases: HashMap::new(),
            constraints: Vec::new(),
        };
        let mut declared: Vec<&str> = Vec::new();
        for item in &file.features {
            let names: Vec<&String> = match item {
                FeatureItem::Plain(ns) | FeatureItem::Xor(ns) | FeatureItem::Or(ns) => ns.iter().collect(),
                FeatureItem::Optional(n) | FeatureItem::Mandatory(n) => vec![n],
            };
            for n in &names {
                if declared.contains(&n.as_str()) {
                    return Err(DslError::Semantic(format!("feature `{n}` is declared twice")));
                }
                declared.push(n);
            }
            match item {
                FeatureItem::Plain(ns) => f.signature.extend(ns.iter().cloned()),
                FeatureItem::Optional(n) => f.signature.push(n.clone()),
                FeatureItem::Mandatory(n) => {
                    f.aliases.insert(n.clone(), Expr::Const(true));
                }
                FeatureItem::Xor(ns) => match ns.as_slice() {
                    [only] => {
                        f.aliases.insert(only.clone(), Expr::Const(true));
                    }
                    [a, b] => {
                        f.signature.push(b.clone());
                        f.aliases.insert(a.clone(), Expr::not(Expr::var(b.as_str())));
                    }
                    _ => {
                        f.signature.extend(ns.iter().cloned());
                        f.constraints.push(exactly_one(ns));
                    }
                },
                FeatureItem::Or(ns) => {
                    f.signature.extend(ns.iter().cloned());
                    f.constraints.push(Expr::any(ns.iter().map(|n| Expr::var(n.as_str()))));
                }
            }
        }
        for c in &file.constraints {
            f.constraints.push(f.resolve(c));
        }
        Ok(f)
    }

    fn diagram(&self) -> Result<FeatureDiagram, FeatureError> {
        let constraint = Expr::all(self.constraints.iter().cloned()).simplify();
        FeatureDiagram::new(self.signature.clone(), constraint)
    }

    /// Replaces aliased feature names.
    fn resolve(&self, e: &Expr) -> Expr {
        if self.aliases.is_empty() {
            return e.clone();
        }
        let r = |x: &Expr| Box::new(self.resolve(x));
        match e {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(name) => self.aliases.get(name).cloned().unwrap_or_else(|| e.clone()),
            Expr::Not(a) => Expr::Not(r(a)),
            Expr::And(a, b) => Expr::And(r(a), r(b)),
            Expr::Or(a, b) => Expr::Or(r(a), r(b)),
            Expr::Implies(a, b) => Expr::Implies(r(a), r(b)),
            Expr::Xor(a, b) => Expr::Xor(r(a), r(b)),
        }
    }

    fn profile(&self, cases: &[Case]) -> Profile {
        Profile::from_cases(
            cases
                .iter()
                .map(|c| {
                    let guard = c.guard.as_ref().map_or(Expr::Const(true), |g| self.resolve(g).simplify());
                    (guard, c.value.clone())
                })
                .collect(),
        )
    }
}

fn exactly_one(names: &[String]) -> Expr {
    let mut terms = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            terms.push(Expr::not(Expr::and(Expr::var(a.as_str()), Expr::var(b.as_str()))));
        }
    }
    terms.push(Expr::any(names.iter().map(|n| Expr::var(n.as_str()))));
    Expr::all(terms)
}

struct Builder<'a> {
    features: &'a Features,
    diagram: &'a Arc<FeatureDiagram>,
    params: &'a HashMap<String, Profile>,
    file: &'a ModelFile,
}

enum Built {
    Fdtmc(Fdtmc),
    Fmdp(Fmdp),
}

impl Builder<'_> {
    fn system(&self) -> Result<Fdtmc, DslError> {
        let Some(system) = &self.file.system else {
            return match self.file.components.as_slice() {
                [only] => match self.component(only)? {
                    Built::Fdtmc(m) => Ok(m),
                    Built::Fmdp(m) => m.as_fdtmc().map_err(in_context(format!("component `{}`", only.name))),
                },
                [] => Err(DslError::Semantic("the file declares no component".into())),
                _ => Err(DslError::Semantic("several components but no `system` declaration".into())),
            };
        };
        if let SystemExpr::Component(name) = system {
            if let Built::Fdtmc(m) = self.component(self.lookup(name)?)? {
                return Ok(m);
            }
        }
        let composed = self.compose(system)?;
        composed.as_fdtmc().map_err(in_context("system"))
    }

    fn lookup(&self, name: &str) -> Result<&Component, DslError> {
        self.file
            .component(name)
            .ok_or_else(|| DslError::Semantic(format!("unknown component `{name}` in `system`")))
    }

    fn compose(&self, e: &SystemExpr) -> Result<Fmdp, DslError> {
        match e {
            SystemExpr::Component(name) => {
                let c = self.lookup(name)?;
                match self.component(c)? {
                    Built::Fmdp(m) => Ok(m),
                    Built::Fdtmc(m) => {
                        if m.rewards().is_some() {
                            return Err(DslError::Semantic(format!(
                                "component `{name}`: rewards are only supported on a standalone fdtmc system"
                            )));
                        }
                        Ok(m.as_fmdp(FDTMC_ACTION))
                    }
                }
            }
            SystemExpr::Sync(a, b) => {
                sync_product(&self.compose(a)?, &self.compose(b)?).map_err(in_context(format!("system `{}`", render(e))))
            }
            SystemExpr::Observe(a, b) => observer_product(&self.compose(a)?, &self.compose(b)?)
                .map_err(in_context(format!("system `{}`", render(e)))),
        }
    }

    fn profile(&self, p: &ProfileAst) -> Result<Profile, DslError> {
        match p {
            ProfileAst::Cases(cs) => Ok(self.features.profile(cs)),
            ProfileAst::Param(name) => self
                .params
                .get(name)
                .cloned()
                .ok_or_else(|| DslError::Semantic(format!("unknown parameter `{name}`"))),
        }
    }

    fn initial(&self, c: &Component) -> Vec<(String, Rational)> {
        if c.init.is_empty() {
            return c.states.first().map(|s| (s.clone(), int(1))).into_iter().collect();
        }
        c.init
            .iter()
            .map(|i| (i.state.clone(), i.weight.clone().unwrap_or_else(|| int(1))))
            .collect()
    }

    fn component(&self, c: &Component) -> Result<Built, DslError> {
        let ctx = || in_context(format!("component `{}`", c.name));
        match c.kind {
            ComponentKind::Fdtmc => {
                let mut b = FdtmcBuilder::new(self.diagram.clone());
                for s in &c.states {
                    b.add_state(s).map_err(ctx())?;
                }
                for (s, w) in self.initial(c) {
                    b.initial(&s, w).map_err(ctx())?;
                }
                for (s, props) in &c.labels {
                    for p in props {
                        b.proposition(p);
                        b.label(s, p).map_err(ctx())?;
                    }
                }
                let mut seen = BTreeMap::new();
                for t in &c.transitions {
                    let Weight::Profile(p) = &t.weight else {
                        unreachable!("fdtmc transitions carry profiles")
                    };
                    if seen.insert((t.from.as_str(), t.to.as_str()), ()).is_some() {
                        return Err(DslError::Semantic(format!(
                            "component `{}`: transition `{} -> {}` is declared twice",
                            c.name, t.from, t.to
                        )));
                    }
                    b.transition(&t.from, &t.to, self.profile(p)?).map_err(ctx())?;
                }
                for (s, p) in &c.rewards {
                    b.reward(s, self.profile(p)?).map_err(ctx())?;
                }
                b.complete_with_self_loops().map_err(ctx())?;
                Ok(Built::Fdtmc(b.build().map_err(ctx())?))
            }
            ComponentKind::Fmdp => {
                let mut b = FmdpBuilder::new(self.diagram.clone());
                for a in &c.actions {
                    b.action(a);
                }
                for s in &c.states {
                    b.state(s);
                }
                for (s, w) in self.initial(c) {
                    b.initial(&s, w).map_err(ctx())?;
                }
                for (s, props) in &c.labels {
                    for p in props {
                        b.proposition(p);
                        b.label(s, p).map_err(ctx())?;
                    }
                }
                // (from, action, guard) -> summed profile
                let mut groups: Vec<((String, String, Expr), Profile)> = Vec::new();
                for t in &c.transitions {
                    let Weight::Profile(p) = &t.weight else {
                        unreachable!("fmdp transitions carry profiles")
                    };
                    let action = t.action.clone().unwrap_or_default();
                    let guard = t.guard.as_ref().map_or(Expr::Const(true), |g| self.features.resolve(g).simplify());
                    let profile = self.profile(p)?;
                    b.transition(&t.from, &action, guard.clone(), &t.to, profile.clone())
                        .map_err(ctx())?;
                    let key = (t.from.clone(), action, guard);
                    match groups.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, sum)) => *sum = sum.add(&profile),
                        None => groups.push((key, profile)),
                    }
                }
                for ((from, action, guard), sum) in groups {
                    let residual = sum.complement();
                    let dense = residual.to_dense::<Rational>(self.diagram)?;
                    if dense.values.iter().any(|v| v < &Rational::from_integer(0.into())) {
                        return Err(DslError::Model {
                            context: format!("component `{}`", c.name),
                            error: ModelError::NegativeSelfLoop {
                                state: from,
                                products: format!("action `{action}`, guard `{guard}`"),
                            },
                        });
                    }
                    if !dense.is_zero() {
                        let residual = residual.compact(self.diagram)?;
                        b.transition(&from, &action, guard, &from, residual).map_err(ctx())?;
                    }
                }
                Ok(Built::Fmdp(b.build().map_err(ctx())?))
            }
            ComponentKind::Fts => {
                let mut b = FtsBuilder::new(self.diagram.clone());
                for a in &c.actions {
                    b.action(a);
                }
                for s in &c.states {
                    b.state(s);
                }
                for (s, w) in self.initial(c) {
                    b.initial(&s, w).map_err(ctx())?;
                }
                for (s, props) in &c.labels {
                    for p in props {
                        b.proposition(p);
                        b.label(s, p).map_err(ctx())?;
                    }
                }
                for t in &c.transitions {
                    let Weight::Feature(f) = &t.weight else {
                        unreachable!("fts transitions carry feature expressions")
                    };
                    let action = t.action.clone().unwrap_or_default();
                    let guard = t.guard.as_ref().map_or(Expr::Const(true), |g| self.features.resolve(g).simplify());
                    b.transition(&t.from, &action, guard, &t.to, self.features.resolve(f).simplify())
                        .map_err(ctx())?;
                }
                let fts = b.build().map_err(ctx())?;
                Ok(Built::Fmdp(fts.to_completed_fmdp().map_err(ctx())?))
            }
        }
    }
}

fn render(e: &SystemExpr) -> String {
    let file = ModelFile {
        system: Some(e.clone()),
        ..ModelFile::default()
    };
    let text = crate::printer::print_model_file(&file);
    text.trim().trim_start_matches("system = ").trim_end_matches(';').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpmc_core::rational::rat;
    use fpmc_core::Product;

    #[test]
    fn xor_of_two_collapses_onto_the_second_member() {
        let m = load_model("xor slow fast;\nfdtmc M { states a, b; a -> b : [slow] 1/2, 1/4; }").unwrap();
        assert_eq!(m.model.diagram().signature(), ["fast".to_string()]);
        let p = m.model.transition(0, 1).unwrap();
        assert_eq!(p.eval_product(m.model.diagram(), &Product::from_pairs([("fast", false)])).unwrap(), rat(1, 2));
        assert_eq!(m.model.transition(0, 0).unwrap().eval_product(m.model.diagram(), &Product::from_pairs([("fast", true)])).unwrap(), rat(3, 4));
    }

    #[test]
    fn larger_groups_become_constraints() {
        let m = load_model("xor a b c;\nor d e;\nmandatory r;\nconstraint r -> d;\nfdtmc M { states s; }").unwrap();
        assert_eq!(m.model.diagram().product_count().unwrap(), 3 * 2);
    }

    #[test]
    fn semantic_errors_name_the_culprit() {
        let err = load_model("fdtmc M { states a; a -> b : 1; }").unwrap_err();
        assert!(err.to_string().contains("`b`"), "{err}");
        let err = load_model("fdtmc M { states a, b; a -> b : p; }").unwrap_err();
        assert!(err.to_string().contains("unknown parameter `p`"), "{err}");
        let err = load_model("fdtmc M { states a, b; a -> b : 3/2; }").unwrap_err();
        assert!(err.to_string().contains("exceed 1"), "{err}");
        let err = load_model("fdtmc M { states a; }\nproperty bad = \"P=?(F\";").unwrap_err();
        assert!(err.to_string().starts_with("property `bad`"), "{err}");
    }

    #[test]
    fn fmdp_rows_are_completed_per_guard() {
        let text = "fdtmc A { states x, y; label y: up; x -> y : 1/2; y -> x : 1/2; }\n\
            fmdp B { action tick; states lo, hi; label hi: high;\n\
            lo -(tick | up)-> hi : 1/4; lo -(tick | !up)-> lo : 1; hi -(tick)-> lo : 1/2; }\n\
            system = A || B;";
        let m = load_model(text).unwrap();
        assert_eq!(m.model.len(), 4);
        assert!(m.model.validate().unwrap().is_valid());
    }
}
