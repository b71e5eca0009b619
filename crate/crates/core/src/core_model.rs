//! Class-diagram models: classes with attributes and methods, binary
//! associations, and association classes.
//!
//! Elements are addressed by [`QualifiedName`]. Classes use their bare name,
//! features are `Class.feature`, and associations live under the reserved
//! first segment `assoc` (`assoc.Enrolls`, `assoc.Enrolls.student`) so that
//! class and association names never collide.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{is_identifier, ReportBuilder, ValidationReport};

/// Reserved first segment of association qualified names.
pub const ASSOC_SEGMENT: &str = "assoc";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualifiedName(Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QualifiedNameError {
    #[error("qualified name is empty")]
    Empty,
    #[error("`{0}` is not a valid identifier segment")]
    BadSegment(String),
}

impl QualifiedName {
    pub fn new<I, S>(segments: I) -> Result<Self, QualifiedNameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(QualifiedNameError::Empty);
        }
        if let Some(bad) = segments.iter().find(|s| !is_identifier(s)) {
            return Err(QualifiedNameError::BadSegment(bad.clone()));
        }
        Ok(QualifiedName(segments))
    }

    /// Builds a name without checking segment syntax. Used for locating
    /// violations on elements whose names are themselves malformed.
    pub(crate) fn raw<I, S>(segments: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        QualifiedName(segments.into_iter().map(Into::into).collect())
    }

    pub fn class(name: &str) -> Self {
        Self::raw([name])
    }

    pub fn feature(class: &str, feature: &str) -> Self {
        Self::raw([class, feature])
    }

    pub fn association(name: &str) -> Self {
        Self::raw([ASSOC_SEGMENT, name])
    }

    pub fn association_end(assoc: &str, role: &str) -> Self {
        Self::raw([ASSOC_SEGMENT, assoc, role])
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }

    /// True if `self` equals `prefix` or lies underneath it.
    pub fn starts_with(&self, prefix: &QualifiedName) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Replaces the leading `from` segments with `to`, if `self` starts with `from`.
    pub fn rebase(&self, from: &QualifiedName, to: &QualifiedName) -> Option<QualifiedName> {
        if !self.starts_with(from) {
            return None;
        }
        let mut segments = to.0.clone();
        segments.extend_from_slice(&self.0[from.0.len()..]);
        Some(QualifiedName(segments))
    }

    pub fn child(&self, segment: &str) -> QualifiedName {
        let mut segments = self.0.clone();
        segments.push(segment.to_string());
        QualifiedName(segments)
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

impl FromStr for QualifiedName {
    type Err = QualifiedNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(QualifiedNameError::Empty);
        }
        QualifiedName::new(s.split('.'))
    }
}

impl Serialize for QualifiedName {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QualifiedName {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `lower..upper`; `upper == None` is the unbounded `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub lower: u32,
    pub upper: Option<u32>,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity {
        lower: 1,
        upper: Some(1),
    };

    pub const MANY: Multiplicity = Multiplicity { lower: 0, upper: None };

    pub fn new(lower: u32, upper: Option<u32>) -> Self {
        Multiplicity { lower, upper }
    }

    pub fn is_consistent(&self) -> bool {
        self.upper.is_none_or(|u| self.lower <= u)
    }
}

impl Default for Multiplicity {
    fn default() -> Self {
        Multiplicity::ONE
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "{}..{}", self.lower, u),
            None => write!(f, "{}..*", self.lower),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeDecl {
    pub name: String,
    pub type_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<Multiplicity>,
}

impl AttributeDecl {
    pub fn new(name: impl Into<String>, type_name: impl Into<String>) -> Self {
        AttributeDecl {
            name: name.into(),
            type_name: type_name.into(),
            multiplicity: None,
        }
    }

    /// The declared multiplicity, or `1..1` when omitted.
    pub fn effective_multiplicity(&self) -> Multiplicity {
        self.multiplicity.unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
}

impl Parameter {
    pub fn new(name: impl Into<String>, type_name: impl Into<String>) -> Self {
        Parameter {
            name: name.into(),
            type_name: type_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodDecl {
    pub name: String,
    #[serde(default)]
    pub parameters: Vec<Parameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_type: Option<String>,
}

impl MethodDecl {
    pub fn new(name: impl Into<String>) -> Self {
        MethodDecl {
            name: name.into(),
            parameters: Vec::new(),
            return_type: None,
        }
    }

    pub fn with_param(mut self, name: &str, type_name: &str) -> Self {
        self.parameters.push(Parameter::new(name, type_name));
        self
    }

    pub fn returning(mut self, type_name: &str) -> Self {
        self.return_type = Some(type_name.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassDecl {
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<AttributeDecl>,
    #[serde(default)]
    pub methods: Vec<MethodDecl>,
    /// Set when this class is the association class of the named association.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub association_class_of: Option<String>,
}

impl ClassDecl {
    pub fn new(name: impl Into<String>) -> Self {
        ClassDecl {
            name: name.into(),
            attributes: Vec::new(),
            methods: Vec::new(),
            association_class_of: None,
        }
    }

    pub fn with_attribute(mut self, attr: AttributeDecl) -> Self {
        self.attributes.push(attr);
        self
    }

    pub fn with_method(mut self, method: MethodDecl) -> Self {
        self.methods.push(method);
        self
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDecl> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.attribute(name).is_some() || self.method(name).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssociationEnd {
    pub role: String,
    pub class_name: String,
    #[serde(default)]
    pub navigable: bool,
    #[serde(default)]
    pub multiplicity: Multiplicity,
}

impl AssociationEnd {
    pub fn new(role: impl Into<String>, class_name: impl Into<String>) -> Self {
        AssociationEnd {
            role: role.into(),
            class_name: class_name.into(),
            navigable: false,
            multiplicity: Multiplicity::ONE,
        }
    }

    pub fn navigable(mut self) -> Self {
        self.navigable = true;
        self
    }

    pub fn with_multiplicity(mut self, m: Multiplicity) -> Self {
        self.multiplicity = m;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssociationDecl {
    pub name: String,
    pub end_a: AssociationEnd,
    pub end_b: AssociationEnd,
}

impl AssociationDecl {
    pub fn new(name: impl Into<String>, end_a: AssociationEnd, end_b: AssociationEnd) -> Self {
        AssociationDecl {
            name: name.into(),
            end_a,
            end_b,
        }
    }

    pub fn ends(&self) -> [&AssociationEnd; 2] {
        [&self.end_a, &self.end_b]
    }

    pub fn touches_class(&self, class: &str) -> bool {
        self.end_a.class_name == class || self.end_b.class_name == class
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoreModel {
    pub name: String,
    #[serde(default)]
    pub classes: Vec<ClassDecl>,
    #[serde(default)]
    pub associations: Vec<AssociationDecl>,
}

/// Borrowed handle to one element of a [`CoreModel`].
///
/// Equality is identity: two handles are equal only if they point at the
/// same element of the same model value.
#[derive(Debug, Clone, Copy)]
pub enum Element<'a> {
    Class(&'a ClassDecl),
    Attribute(&'a ClassDecl, &'a AttributeDecl),
    Method(&'a ClassDecl, &'a MethodDecl),
    Association(&'a AssociationDecl),
    AssociationEnd(&'a AssociationDecl, &'a AssociationEnd),
}

impl PartialEq for Element<'_> {
    fn eq(&self, other: &Self) -> bool {
        use std::ptr::eq;
        match (self, other) {
            (Element::Class(a), Element::Class(b)) => eq(*a, *b),
            (Element::Attribute(c, a), Element::Attribute(d, b)) => eq(*c, *d) && eq(*a, *b),
            (Element::Method(c, a), Element::Method(d, b)) => eq(*c, *d) && eq(*a, *b),
            (Element::Association(a), Element::Association(b)) => eq(*a, *b),
            (Element::AssociationEnd(c, a), Element::AssociationEnd(d, b)) => eq(*c, *d) && eq(*a, *b),
            _ => false,
        }
    }
}

impl Eq for Element<'_> {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Class,
    Attribute,
    Method,
    Association,
    AssociationEnd,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Class => "class",
            ElementKind::Attribute => "attribute",
            ElementKind::Method => "method",
            ElementKind::Association => "association",
            ElementKind::AssociationEnd => "association end",
        })
    }
}

impl<'a> Element<'a> {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Class(_) => ElementKind::Class,
            Element::Attribute(..) => ElementKind::Attribute,
            Element::Method(..) => ElementKind::Method,
            Element::Association(_) => ElementKind::Association,
            Element::AssociationEnd(..) => ElementKind::AssociationEnd,
        }
    }

    /// Canonical name computed from the element alone, without checking
    /// model membership.
    pub fn canonical_name(&self) -> QualifiedName {
        match self {
            Element::Class(c) => QualifiedName::class(&c.name),
            Element::Attribute(c, a) => QualifiedName::feature(&c.name, &a.name),
            Element::Method(c, m) => QualifiedName::feature(&c.name, &m.name),
            Element::Association(a) => QualifiedName::association(&a.name),
            Element::AssociationEnd(a, e) => QualifiedName::association_end(&a.name, &e.role),
        }
    }

    /// The class that owns this element, if any.
    pub fn owning_class(&self) -> Option<&'a ClassDecl> {
        match *self {
            Element::Class(c) | Element::Attribute(c, _) | Element::Method(c, _) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("element `{0}` does not belong to model `{1}`")]
pub struct ForeignElement(pub QualifiedName, pub String);

impl CoreModel {
    pub fn new(name: impl Into<String>) -> Self {
        CoreModel {
            name: name.into(),
            classes: Vec::new(),
            associations: Vec::new(),
        }
    }

    pub fn with_class(mut self, class: ClassDecl) -> Self {
        self.classes.push(class);
        self
    }

    pub fn with_association(mut self, assoc: AssociationDecl) -> Self {
        self.associations.push(assoc);
        self
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_mut(&mut self, name: &str) -> Option<&mut ClassDecl> {
        self.classes.iter_mut().find(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&AssociationDecl> {
        self.associations.iter().find(|a| a.name == name)
    }

    /// Every element in declaration order: each class followed by its
    /// attributes and methods, then each association followed by its ends.
    pub fn elements(&self) -> Vec<Element<'_>> {
        let mut out = Vec::new();
        for c in &self.classes {
            out.push(Element::Class(c));
            out.extend(c.attributes.iter().map(|a| Element::Attribute(c, a)));
            out.extend(c.methods.iter().map(|m| Element::Method(c, m)));
        }
        for a in &self.associations {
            out.push(Element::Association(a));
            out.push(Element::AssociationEnd(a, &a.end_a));
            out.push(Element::AssociationEnd(a, &a.end_b));
        }
        out
    }

    /// Looks up the element whose canonical name is `qn`.
    pub fn resolve(&self, qn: &QualifiedName) -> Option<Element<'_>> {
        match qn.segments() {
            [assoc, name] if assoc == ASSOC_SEGMENT => self.association(name).map(Element::Association),
            [assoc, name, role] if assoc == ASSOC_SEGMENT => {
                let a = self.association(name)?;
                a.ends()
                    .into_iter()
                    .find(|e| &e.role == role)
                    .map(|e| Element::AssociationEnd(a, e))
            }
            [class] => self.class(class).map(Element::Class),
            [class, feature] => {
                let c = self.class(class)?;
                if let Some(a) = c.attribute(feature) {
                    Some(Element::Attribute(c, a))
                } else {
                    c.method(feature).map(|m| Element::Method(c, m))
                }
            }
            _ => None,
        }
    }

    /// Canonical name of `element`, which must be a handle into this model.
    pub fn qualified_name_of(&self, element: Element<'_>) -> Result<QualifiedName, ForeignElement> {
        if self.elements().contains(&element) {
            Ok(element.canonical_name())
        } else {
            Err(ForeignElement(element.canonical_name(), self.name.clone()))
        }
    }

    /// Checks conformance to the class-diagram metamodel.
    pub fn validate(&self) -> ValidationReport {
        validate_core(self)
    }
}

pub fn validate_core(model: &CoreModel) -> ValidationReport {
    let mut report = ReportBuilder::default();
    let root = QualifiedName::raw([model.name.as_str()]);
    report.check_identifier(&root, "model name", &model.name);

    let mut class_names = BTreeSet::new();
    for class in &model.classes {
        let at = QualifiedName::class(&class.name);
        report.check_identifier(&at, "class name", &class.name);
        if class.name == ASSOC_SEGMENT {
            report.push(at.clone(), format!("class name `{ASSOC_SEGMENT}` is reserved"));
        }
        if !class_names.insert(class.name.as_str()) {
            report.push(at.clone(), format!("duplicate class `{}`", class.name));
        }
        validate_class_body(class, &mut report);
        if let Some(assoc) = &class.association_class_of {
            if model.association(assoc).is_none() {
                report.push(
                    at.clone(),
                    format!("association class of unknown association `{assoc}`"),
                );
            }
        }
    }

    let mut assoc_names = BTreeSet::new();
    for assoc in &model.associations {
        let at = QualifiedName::association(&assoc.name);
        report.check_identifier(&at, "association name", &assoc.name);
        if !assoc_names.insert(assoc.name.as_str()) {
            report.push(at.clone(), format!("duplicate association `{}`", assoc.name));
        }
        if assoc.end_a.role == assoc.end_b.role {
            report.push(at.clone(), format!("both ends share the role `{}`", assoc.end_a.role));
        }
        for end in assoc.ends() {
            let end_at = QualifiedName::association_end(&assoc.name, &end.role);
            report.check_identifier(&end_at, "role", &end.role);
            if !class_names.contains(end.class_name.as_str()) {
                report.push(
                    end_at.clone(),
                    format!("end references unknown class `{}`", end.class_name),
                );
            }
            if !end.multiplicity.is_consistent() {
                report.push(end_at, format!("multiplicity {} has lower > upper", end.multiplicity));
            }
        }
    }
    report.finish()
}

/// Checks that do not need the surrounding model.
pub(crate) fn validate_class_body(class: &ClassDecl, report: &mut ReportBuilder) {
    let mut features = BTreeSet::new();
    for attr in &class.attributes {
        let at = QualifiedName::feature(&class.name, &attr.name);
        report.check_identifier(&at, "attribute name", &attr.name);
        report.check_identifier(&at, "type", &attr.type_name);
        if !features.insert(attr.name.as_str()) {
            report.push(at.clone(), format!("duplicate feature `{}`", attr.name));
        }
        if let Some(m) = attr.multiplicity {
            if !m.is_consistent() {
                report.push(at, format!("multiplicity {m} has lower > upper"));
            }
        }
    }
    for method in &class.methods {
        let at = QualifiedName::feature(&class.name, &method.name);
        report.check_identifier(&at, "method name", &method.name);
        if !features.insert(method.name.as_str()) {
            report.push(at.clone(), format!("duplicate feature `{}`", method.name));
        }
        validate_method_signature(&at, method, report);
    }
}

pub(crate) fn validate_method_signature(at: &QualifiedName, method: &MethodDecl, report: &mut ReportBuilder) {
    let mut params = BTreeSet::new();
    for p in &method.parameters {
        report.check_identifier(at, "parameter name", &p.name);
        report.check_identifier(at, "parameter type", &p.type_name);
        if !params.insert(p.name.as_str()) {
            report.push(at.clone(), format!("duplicate parameter `{}`", p.name));
        }
    }
    if let Some(ret) = &method.return_type {
        report.check_identifier(at, "return type", ret);
    }
}
