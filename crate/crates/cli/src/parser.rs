//! Model file parser.
//!
//! ```text
//! // header comment, kept by the printer
//! features spd2 very eco;            // or: optional f; mandatory f; xor a b; or a b c;
//! constraint very -> spd2;
//! param alpha = [!spd2] 0.8, [spd2 & !very] 0.5, 0.2;
//! fdtmc Wiper {
//!   states off, on, end;
//!   init off;
//!   label end: end;
//!   off -> on : alpha;
//!   on -> end : 1/5;
//!   reward on : [eco] 2, 3;
//! }
//! fmdp Water { action tick; states low, high; low -(tick | pumpOn)-> low : 1; }
//! fts Ctl { action obs; states ready, run; ready -(obs | high)-> run : W & !A; }
//! system = (Methane || Water) |> Ctl;
//! property safe = "P[<0.1](F methane & pumpOn)";
//! ```

use fpmc_core::expr::parse_expr;
use fpmc_core::syntax::{ParseError, TokenKind, TokenStream};

use crate::ast::*;

/// Leading comment block: consecutive `//` lines at the top of the file.
fn header(text: &str) -> Vec<String> {
    text.lines()
        .map_while(|line| line.trim_start().strip_prefix("//").map(str::to_string))
        .collect()
}

pub fn parse_model_file(text: &str) -> Result<ModelFile, ParseError> {
    let mut ts = TokenStream::new(text)?;
    let mut file = ModelFile {
        header: header(text),
        ..ModelFile::default()
    };
    while !ts.at_eof() {
        let (word, pos) = ts.expect_ident()?;
        match word.as_str() {
            "features" => file.features.push(FeatureItem::Plain(names_until_semicolon(&mut ts)?)),
            "optional" => file.features.push(FeatureItem::Optional(single_name(&mut ts)?)),
            "mandatory" => file.features.push(FeatureItem::Mandatory(single_name(&mut ts)?)),
            "xor" => file.features.push(FeatureItem::Xor(group(&mut ts)?)),
            "or" => file.features.push(FeatureItem::Or(group(&mut ts)?)),
            "constraint" => {
                file.constraints.push(parse_expr(&mut ts)?);
                ts.expect_punct(";")?;
            }
            "param" => {
                let (name, _) = ts.expect_ident()?;
                ts.expect_punct("=")?;
                let cases = cases(&mut ts)?;
                ts.expect_punct(";")?;
                file.params.push(Param { name, cases });
            }
            "fdtmc" => file.components.push(component(&mut ts, ComponentKind::Fdtmc)?),
            "fmdp" => file.components.push(component(&mut ts, ComponentKind::Fmdp)?),
            "fts" => file.components.push(component(&mut ts, ComponentKind::Fts)?),
            "system" => {
                if file.system.is_some() {
                    return Err(ParseError::new(pos, "`system` is declared twice"));
                }
                ts.expect_punct("=")?;
                file.system = Some(system(&mut ts)?);
                ts.expect_punct(";")?;
            }
            "property" => {
                let (name, _) = ts.expect_ident()?;
                ts.expect_punct("=")?;
                let (text, _) = ts.expect_string()?;
                ts.expect_punct(";")?;
                file.properties.push(PropertyDecl { name, text });
            }
            other => {
                return Err(ParseError::new(
                    pos,
                    format!("unknown declaration `{other}`; expected features, optional, mandatory, xor, or, constraint, param, fdtmc, fmdp, fts, system or property"),
                ))
            }
        }
    }
    Ok(file)
}

fn single_name(ts: &mut TokenStream) -> Result<String, ParseError> {
    let (name, _) = ts.expect_ident()?;
    ts.expect_punct(";")?;
    Ok(name)
}

fn names_until_semicolon(ts: &mut TokenStream) -> Result<Vec<String>, ParseError> {
    let mut names = Vec::new();
    while !ts.eat_punct(";") {
        let (name, _) = ts.expect_ident()?;
        names.push(name);
        ts.eat_punct(",");
    }
    Ok(names)
}

fn group(ts: &mut TokenStream) -> Result<Vec<String>, ParseError> {
    let pos = ts.peek().pos;
    let names = names_until_semicolon(ts)?;
    if names.is_empty() {
        return Err(ParseError::new(pos, "a feature group needs at least one member"));
    }
    Ok(names)
}

fn cases(ts: &mut TokenStream) -> Result<Vec<Case>, ParseError> {
    let mut out = Vec::new();
    loop {
        let guard = if ts.eat_punct("[") {
            let g = parse_expr(ts)?;
            ts.expect_punct("]")?;
            Some(g)
        } else {
            None
        };
        let value = ts.expect_rational()?;
        out.push(Case { guard, value });
        if !ts.eat_punct(",") {
            return Ok(out);
        }
    }
}

fn profile(ts: &mut TokenStream) -> Result<ProfileAst, ParseError> {
    if let TokenKind::Ident(name) = &ts.peek().kind {
        let name = name.clone();
        ts.advance();
        return Ok(ProfileAst::Param(name));
    }
    Ok(ProfileAst::Cases(cases(ts)?))
}

fn system(ts: &mut TokenStream) -> Result<SystemExpr, ParseError> {
    let mut lhs = sync_term(ts)?;
    while ts.eat_punct("|>") {
        lhs = SystemExpr::Observe(Box::new(lhs), Box::new(sync_term(ts)?));
    }
    Ok(lhs)
}

fn sync_term(ts: &mut TokenStream) -> Result<SystemExpr, ParseError> {
    let mut lhs = system_atom(ts)?;
    while ts.eat_punct("||") {
        lhs = SystemExpr::Sync(Box::new(lhs), Box::new(system_atom(ts)?));
    }
    Ok(lhs)
}

fn system_atom(ts: &mut TokenStream) -> Result<SystemExpr, ParseError> {
    if ts.eat_punct("(") {
        let e = system(ts)?;
        ts.expect_punct(")")?;
        return Ok(e);
    }
    let (name, _) = ts.expect_ident()?;
    Ok(SystemExpr::Component(name))
}

fn component(ts: &mut TokenStream, kind: ComponentKind) -> Result<Component, ParseError> {
    let (name, _) = ts.expect_ident()?;
    let mut c = Component {
        kind,
        name,
        actions: Vec::new(),
        states: Vec::new(),
        init: Vec::new(),
        labels: Vec::new(),
        transitions: Vec::new(),
        rewards: Vec::new(),
    };
    ts.expect_punct("{")?;
    while !ts.eat_punct("}") {
        let (word, pos) = ts.expect_ident()?;
        let is_transition = ts.at_punct("->") || ts.at_punct("-");
        match word.as_str() {
            "states" if !is_transition => c.states.extend(names_until_semicolon(ts)?),
            "action" | "actions" if !is_transition => {
                if kind == ComponentKind::Fdtmc {
                    return Err(ParseError::new(pos, "an fdtmc has no actions"));
                }
                c.actions.extend(names_until_semicolon(ts)?);
            }
            "init" if !is_transition => loop {
                let (state, _) = ts.expect_ident()?;
                let weight = if ts.eat_punct("[") {
                    let w = ts.expect_rational()?;
                    ts.expect_punct("]")?;
                    Some(w)
                } else {
                    None
                };
                c.init.push(InitAst { state, weight });
                if ts.eat_punct(";") {
                    break;
                }
                ts.expect_punct(",")?;
            },
            "label" if !is_transition => {
                let (state, _) = ts.expect_ident()?;
                ts.expect_punct(":")?;
                c.labels.push((state, names_until_semicolon(ts)?));
            }
            "reward" if !is_transition => {
                if kind != ComponentKind::Fdtmc {
                    return Err(ParseError::new(pos, "rewards are only allowed in an fdtmc"));
                }
                let (state, _) = ts.expect_ident()?;
                ts.expect_punct(":")?;
                c.rewards.push((state, profile(ts)?));
                ts.expect_punct(";")?;
            }
            _ => c.transitions.push(transition(ts, kind, word)?),
        }
    }
    Ok(c)
}

fn transition(ts: &mut TokenStream, kind: ComponentKind, from: String) -> Result<TransitionAst, ParseError> {
    let (action, guard) = if kind == ComponentKind::Fdtmc {
        ts.expect_punct("->")?;
        (None, None)
    } else {
        ts.expect_punct("-")?;
        ts.expect_punct("(")?;
        let (action, _) = ts.expect_ident()?;
        let guard = if ts.eat_punct("|") {
            if ts.at_ident("obs") && matches!(ts.peek_nth(1).kind, TokenKind::Punct(":")) {
                ts.advance();
                ts.advance();
            }
            Some(parse_expr(ts)?)
        } else {
            None
        };
        ts.expect_punct(")")?;
        ts.expect_punct("->")?;
        (Some(action), guard)
    };
    let (to, _) = ts.expect_ident()?;
    let weight = match kind {
        ComponentKind::Fts => {
            if ts.eat_punct(":") {
                Weight::Feature(parse_expr(ts)?)
            } else {
                Weight::Feature(fpmc_core::Expr::Const(true))
            }
        }
        _ => {
            ts.expect_punct(":")?;
            Weight::Profile(profile(ts)?)
        }
    };
    ts.expect_punct(";")?;
    Ok(TransitionAst {
        from,
        action,
        guard,
        to,
        weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpmc_core::rational::rat;

    #[test]
    fn parses_every_declaration_kind() {
        let text = "// head\n//  two\nfeatures a b;\nxor c d;\noptional e;\nconstraint a -> b;\nparam p = [a] 1/2, 0.25;\n\
            fdtmc M { states s, t; init s [0.5], t [0.5]; label t: goal; s -> t : p; t -> s : [!a] 1; reward s : 2; }\n\
            fmdp N { action tick; states x; x -(tick | obs: goal)-> x : 1; x -(tick | !goal)-> x : 1; }\n\
            fts C { action go; states u, v; u -(go | goal)-> v : a & b; v -(go)-> u; }\n\
            system = M || N |> C;\nproperty q = \"P=?(F goal)\";\n";
        let f = parse_model_file(text).unwrap();
        assert_eq!(f.header, vec![" head".to_string(), "  two".to_string()]);
        assert_eq!(f.features.len(), 3);
        assert_eq!(f.params[0].cases[1], Case { guard: None, value: rat(1, 4) });
        assert_eq!(f.components.len(), 3);
        assert_eq!(f.components[0].init[1].weight, Some(rat(1, 2)));
        assert_eq!(f.components[1].transitions[0].guard.as_ref().unwrap().to_string(), "goal");
        assert_eq!(
            f.system,
            Some(SystemExpr::Observe(
                Box::new(SystemExpr::Sync(
                    Box::new(SystemExpr::Component("M".into())),
                    Box::new(SystemExpr::Component("N".into()))
                )),
                Box::new(SystemExpr::Component("C".into()))
            ))
        );
        assert_eq!(f.properties[0].text, "P=?(F goal)");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_model_file("features a;\nfdtmc M { states s; s -> : 1; }").unwrap_err();
        assert_eq!((err.line, err.column), (2, 26));
        let err = parse_model_file("bogus x;").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }
}
