//! Canonical rendering of model files. Re-parsing the output gives back the
//! same syntax tree.

use std::fmt::Write;

use fpmc_core::rational::format_rational;

use crate::ast::*;

pub fn print_model_file(file: &ModelFile) -> String {
    let mut out = String::new();
    for line in &file.header {
        let _ = writeln!(out, "//{line}");
    }
    if !file.header.is_empty() {
        out.push('\n');
    }
    for item in &file.features {
        let _ = match item {
            FeatureItem::Plain(names) => writeln!(out, "features {};", names.join(" ")),
            FeatureItem::Optional(f) => writeln!(out, "optional {f};"),
            FeatureItem::Mandatory(f) => writeln!(out, "mandatory {f};"),
            FeatureItem::Xor(names) => writeln!(out, "xor {};", names.join(" ")),
            FeatureItem::Or(names) => writeln!(out, "or {};", names.join(" ")),
        };
    }
    for c in &file.constraints {
        let _ = writeln!(out, "constraint {c};");
    }
    for p in &file.params {
        let _ = writeln!(out, "param {} = {};", p.name, cases(&p.cases));
    }
    for c in &file.components {
        out.push('\n');
        component(&mut out, c);
    }
    if let Some(s) = &file.system {
        let _ = writeln!(out, "\nsystem = {};", system(s));
    }
    if !file.properties.is_empty() {
        out.push('\n');
    }
    for p in &file.properties {
        let text = p.text.replace('\\', "\\\\").replace('"', "\\\"");
        let _ = writeln!(out, "property {} = \"{text}\";", p.name);
    }
    out
}

fn cases(cs: &[Case]) -> String {
    cs.iter()
        .map(|c| match &c.guard {
            Some(g) => format!("[{g}] {}", format_rational(&c.value)),
            None => format_rational(&c.value),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn profile(p: &ProfileAst) -> String {
    match p {
        ProfileAst::Param(name) => name.clone(),
        ProfileAst::Cases(cs) => cases(cs),
    }
}

fn component(out: &mut String, c: &Component) {
    let _ = writeln!(out, "{} {} {{", c.kind.keyword(), c.name);
    if !c.actions.is_empty() {
        let _ = writeln!(out, "  action {};", c.actions.join(", "));
    }
    let _ = writeln!(out, "  states {};", c.states.join(", "));
    if !c.init.is_empty() {
        let init: Vec<String> = c
            .init
            .iter()
            .map(|i| match &i.weight {
                Some(w) => format!("{} [{}]", i.state, format_rational(w)),
                None => i.state.clone(),
            })
            .collect();
        let _ = writeln!(out, "  init {};", init.join(", "));
    }
    for (state, props) in &c.labels {
        let _ = writeln!(out, "  label {state}: {};", props.join(" "));
    }
    for t in &c.transitions {
        let arrow = match (&t.action, &t.guard) {
            (None, _) => "->".to_string(),
            (Some(a), None) => format!("-({a})->"),
            (Some(a), Some(g)) => format!("-({a} | {g})->"),
        };
        let weight = match &t.weight {
            Weight::Profile(p) => format!(" : {}", profile(p)),
            Weight::Feature(fpmc_core::Expr::Const(true)) => String::new(),
            Weight::Feature(e) => format!(" : {e}"),
        };
        let _ = writeln!(out, "  {} {arrow} {}{weight};", t.from, t.to);
    }
    for (state, p) in &c.rewards {
        let _ = writeln!(out, "  reward {state} : {};", profile(p));
    }
    out.push_str("}\n");
}

fn system(s: &SystemExpr) -> String {
    match s {
        SystemExpr::Component(name) => name.clone(),
        SystemExpr::Observe(a, b) => {
            let rhs = match **b {
                SystemExpr::Observe(..) => format!("({})", system(b)),
                _ => system(b),
            };
            format!("{} |> {rhs}", system(a))
        }
        SystemExpr::Sync(a, b) => {
            let lhs = match **a {
                SystemExpr::Observe(..) => format!("({})", system(a)),
                _ => system(a),
            };
            let rhs = match **b {
                SystemExpr::Component(_) => system(b),
                _ => format!("({})", system(b)),
            };
            format!("{lhs} || {rhs}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model_file;

    #[test]
    fn nested_systems_keep_their_shape() {
        for text in ["system = A |> (B |> C);", "system = (A |> B) || C;", "system = A || (B || C);", "system = A || B |> C || D;"] {
            let f = parse_model_file(text).unwrap();
            let again = parse_model_file(&print_model_file(&f)).unwrap();
            assert_eq!(f, again, "{text}");
        }
    }
}
