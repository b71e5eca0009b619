//! Aspect requirements: pointcuts designating where an aspect applies and
//! advices describing the edits it performs there.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_model::{
    validate_class_body, validate_method_signature, AssociationDecl, AttributeDecl, ClassDecl, MethodDecl,
    QualifiedName,
};
use crate::report::{is_identifier, ReportBuilder, ValidationReport};

/// Stakeholder priority of an aspect, an exact rational in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Priority(Ratio<u64>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriorityError {
    #[error("`{0}` is not a decimal or fraction")]
    Syntax(String),
    #[error("priority {0} lies outside [0, 1]")]
    OutOfRange(String),
}

impl Priority {
    pub const DEFAULT: Priority = Priority(Ratio::new_raw(1, 2));

    pub fn new(numer: u64, denom: u64) -> Result<Self, PriorityError> {
        if denom == 0 {
            return Err(PriorityError::Syntax(format!("{numer}/{denom}")));
        }
        let r = Ratio::new(numer, denom);
        if r > Ratio::from_integer(1) {
            return Err(PriorityError::OutOfRange(r.to_string()));
        }
        Ok(Priority(r))
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    /// Multiplies by a positive factor. The result may leave `[0, 1]`; it is
    /// only meant for comparing relative order.
    pub fn scaled(&self, factor: Ratio<u64>) -> Ratio<u64> {
        self.0 * factor
    }
}

impl Default for Priority {
    fn default() -> Self {
        Priority::DEFAULT
    }
}

impl FromStr for Priority {
    type Err = PriorityError;

    /// Accepts `1`, `0.75` or `2/3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || PriorityError::Syntax(s.to_string());
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if let Some((n, d)) = s.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(syntax());
            }
            let n = n.parse().map_err(|_| syntax())?;
            let d = d.parse().map_err(|_| syntax())?;
            return Priority::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if !digits(int) || (s.contains('.') && !digits(frac)) || frac.len() > 18 {
            return Err(syntax());
        }
        let denom = 10u64.pow(frac.len() as u32);
        let int: u64 = int.parse().map_err(|_| syntax())?;
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| syntax())?
        };
        let numer = int
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(|| PriorityError::OutOfRange(s.to_string()))?;
        Priority::new(numer, denom)
    }
}

impl fmt::Display for Priority {
    /// Terminating decimals print as decimals, anything else as `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.0.numer(), *self.0.denom());
        let mut rest = d;
        let mut places = 0u32;
        while rest % 10 == 0 {
            rest /= 10;
            places += 1;
        }
        while rest % 2 == 0 || rest % 5 == 0 {
            rest /= if rest % 2 == 0 { 2 } else { 5 };
            places += 1;
        }
        if rest != 1 || places > 18 {
            return write!(f, "{n}/{d}");
        }
        if places == 0 {
            return write!(f, "{n}");
        }
        let scale = 10u128.pow(places);
        let scaled = n as u128 * (scale / d as u128);
        let int = scaled / scale;
        let frac = format!("{:0width$}", scaled % scale, width = places as usize);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

impl Serialize for Priority {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Priority {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointcutKind {
    /// Matches methods only.
    Call,
    /// Matches classes, attributes and associations.
    Structural,
}

/// One segment of a [`NamePattern`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternSegment {
    Literal(String),
    Wildcard,
}

/// A qualified-name pattern where `*` stands for exactly one whole segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NamePattern {
    pub segments: Vec<PatternSegment>,
}

impl NamePattern {
    pub fn matches(&self, qn: &QualifiedName) -> bool {
        self.segments.len() == qn.len()
            && self.segments.iter().zip(qn.segments()).all(|(p, s)| match p {
                PatternSegment::Wildcard => true,
                PatternSegment::Literal(l) => l == s,
            })
    }

    pub fn literal(qn: &QualifiedName) -> Self {
        NamePattern {
            segments: qn
                .segments()
                .iter()
                .map(|s| PatternSegment::Literal(s.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid name pattern `{0}`")]
pub struct PatternError(pub String);

impl FromStr for NamePattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(PatternError(s.to_string()));
        }
        let segments = s
            .split('.')
            .map(|seg| match seg {
                "*" => Ok(PatternSegment::Wildcard),
                lit if is_identifier(lit) => Ok(PatternSegment::Literal(lit.to_string())),
                _ => Err(PatternError(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(NamePattern { segments })
    }
}

impl fmt::Display for NamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match seg {
                PatternSegment::Wildcard => f.write_str("*")?,
                PatternSegment::Literal(l) => f.write_str(l)?,
            }
        }
        Ok(())
    }
}

impl Serialize for NamePattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NamePattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pointcut {
    pub name: String,
    pub kind: PointcutKind,
    pub pattern: NamePattern,
}

impl Pointcut {
    pub fn new(name: impl Into<String>, kind: PointcutKind, pattern: &str) -> Self {
        Pointcut {
            name: name.into(),
            kind,
            pattern: pattern.parse().expect("pattern literal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AdviceType {
    Before,
    After,
}

impl fmt::Display for AdviceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdviceType::Before => "before",
            AdviceType::After => "after",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdviceKind {
    AddElt,
    Update,
    DeleteElt,
}

impl fmt::Display for AdviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdviceKind::AddElt => "addelt",
            AdviceKind::Update => "update",
            AdviceKind::DeleteElt => "deleteelt",
        })
    }
}

/// An element contributed by an add advice or a core+additional link.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "camelCase")]
pub enum NewElement {
    Attribute(AttributeDecl),
    Method(MethodDecl),
    Class(ClassDecl),
    Association(AssociationDecl),
}

impl NewElement {
    pub fn name(&self) -> &str {
        match self {
            NewElement::Attribute(a) => &a.name,
            NewElement::Method(m) => &m.name,
            NewElement::Class(c) => &c.name,
            NewElement::Association(a) => &a.name,
        }
    }

    /// Attributes and methods need a host class; classes and associations
    /// are added at model level.
    pub fn is_feature(&self) -> bool {
        matches!(self, NewElement::Attribute(_) | NewElement::Method(_))
    }
}

/// Renames and/or retypes the matched element. The type rewrite applies to
/// an attribute's type or a method's return type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UpdateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AdvicePayload {
    Add { element: NewElement },
    Update(UpdateSpec),
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Advice {
    pub name: String,
    pub advice_type: AdviceType,
    pub bound_pointcut: String,
    pub payload: AdvicePayload,
    /// Stored verbatim, never interpreted.
    #[serde(default)]
    pub body: String,
}

impl Advice {
    pub fn kind(&self) -> AdviceKind {
        match self.payload {
            AdvicePayload::Add { .. } => AdviceKind::AddElt,
            AdvicePayload::Update(_) => AdviceKind::Update,
            AdvicePayload::Delete => AdviceKind::DeleteElt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AspectRequirement {
    pub name: String,
    #[serde(default)]
    pub priority: Priority,
    #[serde(default)]
    pub pointcuts: Vec<Pointcut>,
    #[serde(default)]
    pub advices: Vec<Advice>,
}

impl AspectRequirement {
    pub fn new(name: impl Into<String>) -> Self {
        AspectRequirement {
            name: name.into(),
            priority: Priority::DEFAULT,
            pointcuts: Vec::new(),
            advices: Vec::new(),
        }
    }

    pub fn pointcut(&self, name: &str) -> Option<&Pointcut> {
        self.pointcuts.iter().find(|p| p.name == name)
    }

    /// Advices bound to `pointcut`, in declaration order.
    pub fn advices_for<'a>(&'a self, pointcut: &'a str) -> impl Iterator<Item = &'a Advice> + 'a {
        self.advices.iter().filter(move |a| a.bound_pointcut == pointcut)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AspectModel {
    pub name: String,
    #[serde(default)]
    pub aspects: Vec<AspectRequirement>,
}

impl AspectModel {
    pub fn new(name: impl Into<String>) -> Self {
        AspectModel {
            name: name.into(),
            aspects: Vec::new(),
        }
    }

    pub fn aspect(&self, name: &str) -> Option<&AspectRequirement> {
        self.aspects.iter().find(|a| a.name == name)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_aspect(self)
    }
}

/// Violations are located at `Aspect`, `Aspect.Pointcut` or `Aspect.Advice`.
pub fn validate_aspect(model: &AspectModel) -> ValidationReport {
    let mut report = ReportBuilder::default();
    report.check_identifier(&QualifiedName::raw([model.name.as_str()]), "model name", &model.name);
    let mut aspect_names = BTreeSet::new();
    for aspect in &model.aspects {
        let at = QualifiedName::raw([aspect.name.as_str()]);
        report.check_identifier(&at, "aspect name", &aspect.name);
        if !aspect_names.insert(aspect.name.as_str()) {
            report.push(at.clone(), format!("duplicate aspect `{}`", aspect.name));
        }
        let mut pointcuts = BTreeSet::new();
        for p in &aspect.pointcuts {
            let p_at = at.child(&p.name);
            report.check_identifier(&p_at, "pointcut name", &p.name);
            if !pointcuts.insert(p.name.as_str()) {
                report.push(p_at.clone(), format!("duplicate pointcut `{}`", p.name));
            }
            if p.pattern.segments.is_empty() {
                report.push(p_at, "empty pattern");
            }
        }
        let mut advices = BTreeSet::new();
        for adv in &aspect.advices {
            let a_at = at.child(&adv.name);
            report.check_identifier(&a_at, "advice name", &adv.name);
            if !advices.insert(adv.name.as_str()) {
                report.push(a_at.clone(), format!("duplicate advice `{}`", adv.name));
            }
            if !pointcuts.contains(adv.bound_pointcut.as_str()) {
                report.push(
                    a_at.clone(),
                    format!("bound to unknown pointcut `{}`", adv.bound_pointcut),
                );
            }
            validate_payload(&a_at, &adv.payload, &mut report);
        }
    }
    report.finish()
}

fn validate_payload(at: &QualifiedName, payload: &AdvicePayload, report: &mut ReportBuilder) {
    match payload {
        AdvicePayload::Add { element } => match element {
            NewElement::Attribute(a) => {
                report.check_identifier(at, "attribute name", &a.name);
                report.check_identifier(at, "type", &a.type_name);
                if let Some(m) = a.multiplicity.filter(|m| !m.is_consistent()) {
                    report.push(at.clone(), format!("multiplicity {m} has lower > upper"));
                }
            }
            NewElement::Method(m) => {
                report.check_identifier(at, "method name", &m.name);
                validate_method_signature(at, m, report);
            }
            NewElement::Class(c) => {
                report.check_identifier(at, "class name", &c.name);
                validate_class_body(c, report);
            }
            NewElement::Association(a) => {
                report.check_identifier(at, "association name", &a.name);
                if a.end_a.role == a.end_b.role {
                    report.push(at.clone(), format!("both ends share the role `{}`", a.end_a.role));
                }
                for end in a.ends() {
                    report.check_identifier(at, "role", &end.role);
                    report.check_identifier(at, "class name", &end.class_name);
                    if !end.multiplicity.is_consistent() {
                        report.push(
                            at.clone(),
                            format!("multiplicity {} has lower > upper", end.multiplicity),
                        );
                    }
                }
            }
        },
        AdvicePayload::Update(spec) => {
            if spec.new_name.is_none() && spec.new_type.is_none() {
                report.push(at.clone(), "update advice rewrites nothing");
            }
            if let Some(n) = &spec.new_name {
                report.check_identifier(at, "new name", n);
            }
            if let Some(t) = &spec.new_type {
                report.check_identifier(at, "new type", t);
            }
        }
        AdvicePayload::Delete => {}
    }
}
