//! Syntax tree of model files.

use fpmc_core::{Expr, Rational};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelFile {
    /// Leading `//` comment lines, without the `//`.
    pub header: Vec<String>,
    pub features: Vec<FeatureItem>,
    pub constraints: Vec<Expr>,
    pub params: Vec<Param>,
    pub components: Vec<Component>,
    pub system: Option<SystemExpr>,
    pub properties: Vec<PropertyDecl>,
}

/// Feature declarations, flat or in feature-tree style.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureItem {
    /// `features a b c;`
    Plain(Vec<String>),
    /// `optional f;`
    Optional(String),
    /// `mandatory f;`: present in every product, so not a variable.
    Mandatory(String),
    /// `xor a b ...;`: exactly one member. Two members collapse onto the
    /// second one, the first becoming its negation.
    Xor(Vec<String>),
    /// `or a b ...;`: at least one member.
    Or(Vec<String>),
}

/// `[guard] value` cases tried in order; a case without guard matches
/// everything.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub guard: Option<Expr>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileAst {
    Cases(Vec<Case>),
    /// Reference to a `param` declaration.
    Param(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Fdtmc,
    Fmdp,
    Fts,
}

impl ComponentKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Fdtmc => "fdtmc",
            ComponentKind::Fmdp => "fmdp",
            ComponentKind::Fts => "fts",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Profile(ProfileAst),
    /// FTS transitions: enabled in the products satisfying the expression.
    Feature(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionAst {
    pub from: String,
    pub action: Option<String>,
    pub guard: Option<Expr>,
    pub to: String,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitAst {
    pub state: String,
    pub weight: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub kind: ComponentKind,
    pub name: String,
    pub actions: Vec<String>,
    pub states: Vec<String>,
    pub init: Vec<InitAst>,
    pub labels: Vec<(String, Vec<String>)>,
    pub transitions: Vec<TransitionAst>,
    pub rewards: Vec<(String, ProfileAst)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemExpr {
    Component(String),
    /// `a || b`
    Sync(Box<SystemExpr>, Box<SystemExpr>),
    /// `a |> b`: `b` observes `a`.
    Observe(Box<SystemExpr>, Box<SystemExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDecl {
    pub name: String,
    pub text: String,
}

impl ModelFile {
    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyDecl> {
        self.properties.iter().find(|p| p.name == name)
    }
}
