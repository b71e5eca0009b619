//! Weaving models: typed, binary links between the elements of a left
//! (core) model and a right (aspect or additional) model.
//!
//! A weaving model only ever holds references. Element ends are canonical
//! qualified names; aspect ends name an aspect and optionally one of its
//! pointcuts.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aspect_model::AspectModel;
use crate::core_model::{CoreModel, ElementKind, QualifiedName};
use crate::dsl;
use crate::report::{ReportBuilder, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelRef {
    pub logical_name: String,
    pub source_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_digest: Option<String>,
}

impl ModelRef {
    pub fn new(logical_name: impl Into<String>, source_path: impl Into<String>) -> Self {
        ModelRef {
            logical_name: logical_name.into(),
            source_path: source_path.into(),
            content_digest: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum RefTarget {
    Element {
        name: QualifiedName,
    },
    Aspect {
        aspect: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pointcut: Option<String>,
    },
}

impl fmt::Display for RefTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefTarget::Element { name } => write!(f, "{name}"),
            RefTarget::Aspect {
                aspect,
                pointcut: Some(p),
            } => write!(f, "{aspect}.{p}"),
            RefTarget::Aspect { aspect, pointcut: None } => f.write_str(aspect),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementRef {
    /// Logical name of the referenced model.
    pub model: String,
    pub target: RefTarget,
}

impl ElementRef {
    pub fn element(model: &str, name: QualifiedName) -> Self {
        ElementRef {
            model: model.to_string(),
            target: RefTarget::Element { name },
        }
    }

    pub fn aspect(model: &str, aspect: &str, pointcut: Option<&str>) -> Self {
        ElementRef {
            model: model.to_string(),
            target: RefTarget::Aspect {
                aspect: aspect.to_string(),
                pointcut: pointcut.map(str::to_string),
            },
        }
    }

    pub fn element_name(&self) -> Option<&QualifiedName> {
        match &self.target {
            RefTarget::Element { name } => Some(name),
            RefTarget::Aspect { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    AttributeToClass,
    MethodToClass,
    ClassToModel,
    AssociationToModel,
    AspectToTarget,
}

impl LinkKind {
    pub const ALL: [LinkKind; 5] = [
        LinkKind::AttributeToClass,
        LinkKind::MethodToClass,
        LinkKind::ClassToModel,
        LinkKind::AssociationToModel,
        LinkKind::AspectToTarget,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LinkKind::AttributeToClass => "AttributeToClass",
            LinkKind::MethodToClass => "MethodToClass",
            LinkKind::ClassToModel => "ClassToModel",
            LinkKind::AssociationToModel => "AssociationToModel",
            LinkKind::AspectToTarget => "AspectToTarget",
        }
    }

    /// Model-level kinds whose left end names the left model itself.
    pub fn targets_model(&self) -> bool {
        matches!(self, LinkKind::ClassToModel | LinkKind::AssociationToModel)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeaveLink {
    pub name: String,
    pub kind: LinkKind,
    pub left: ElementRef,
    pub right: ElementRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeavingKind {
    CoreAspect,
    CoreAdditional,
}

impl fmt::Display for WeavingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeavingKind::CoreAspect => "coreaspect",
            WeavingKind::CoreAdditional => "coreadditional",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeavingModel {
    pub name: String,
    pub kind: WeavingKind,
    pub left: ModelRef,
    pub right: ModelRef,
    #[serde(default)]
    pub links: Vec<WeaveLink>,
}

impl WeavingModel {
    pub fn new(name: impl Into<String>, kind: WeavingKind, left: ModelRef, right: ModelRef) -> Self {
        WeavingModel {
            name: name.into(),
            kind,
            left,
            right,
            links: Vec::new(),
        }
    }
}

/// The right-hand model of a weaving.
#[derive(Debug, Clone, Copy)]
pub enum RightModel<'a> {
    Core(&'a CoreModel),
    Aspect(&'a AspectModel),
}

impl RightModel<'_> {
    fn kind_name(&self) -> &'static str {
        match self {
            RightModel::Core(_) => "core model",
            RightModel::Aspect(_) => "aspect model",
        }
    }

    pub fn digest(&self) -> String {
        match self {
            RightModel::Core(m) => core_digest(m),
            RightModel::Aspect(m) => aspect_digest(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeavingError {
    #[error("{weaving} weaving `{name}` cannot take a {given} as its right model")]
    KindMismatch {
        name: String,
        weaving: WeavingKind,
        given: &'static str,
    },
}

/// Binds a weaving model to concrete left and right models and checks that
/// every reference resolves.
///
/// For `ClassToModel` and `AssociationToModel` links the left end must be the
/// left model's logical name. An `AspectToTarget` left end scopes the
/// aspect's pointcuts: it is either an element of the left model or the left
/// logical name, meaning the whole model.
pub fn validate_weaving(
    w: &WeavingModel,
    left: &CoreModel,
    right: RightModel<'_>,
) -> Result<ValidationReport, WeavingError> {
    match (w.kind, right) {
        (WeavingKind::CoreAspect, RightModel::Aspect(_)) | (WeavingKind::CoreAdditional, RightModel::Core(_)) => {}
        (kind, r) => {
            return Err(WeavingError::KindMismatch {
                name: w.name.clone(),
                weaving: kind,
                given: r.kind_name(),
            })
        }
    }

    let mut report = ReportBuilder::default();
    let root = QualifiedName::raw([w.name.as_str()]);
    report.check_identifier(&root, "weaving name", &w.name);
    report.check_identifier(&root, "left model name", &w.left.logical_name);
    report.check_identifier(&root, "right model name", &w.right.logical_name);

    let mut names = BTreeSet::new();
    for link in &w.links {
        let at = root.child(&link.name);
        report.check_identifier(&at, "link name", &link.name);
        if !names.insert(link.name.as_str()) {
            report.push(at.clone(), format!("duplicate link `{}`", link.name));
        }
        if link.left.model != w.left.logical_name {
            report.push(
                at.clone(),
                format!(
                    "left end refers to model `{}`, expected `{}`",
                    link.left.model, w.left.logical_name
                ),
            );
        }
        if link.right.model != w.right.logical_name {
            report.push(
                at.clone(),
                format!(
                    "right end refers to model `{}`, expected `{}`",
                    link.right.model, w.right.logical_name
                ),
            );
        }
        let Some(left_name) = link.left.element_name() else {
            report.push(at.clone(), "left end must be a qualified name");
            continue;
        };
        match right {
            RightModel::Aspect(aspects) => {
                if link.kind != LinkKind::AspectToTarget {
                    report.push(at.clone(), format!("{} link in a core-aspect weaving", link.kind));
                }
                if left.resolve(left_name).is_none() && !names_model(left_name, w) {
                    report.push(at.clone(), format!("left end `{left_name}` does not resolve"));
                }
                match &link.right.target {
                    RefTarget::Aspect { aspect, pointcut } => match aspects.aspect(aspect) {
                        None => report.push(at.clone(), format!("unknown aspect `{aspect}`")),
                        Some(a) => {
                            if let Some(p) = pointcut {
                                if a.pointcut(p).is_none() {
                                    report.push(at.clone(), format!("aspect `{aspect}` has no pointcut `{p}`"));
                                }
                            }
                        }
                    },
                    RefTarget::Element { .. } => report.push(at.clone(), "right end must name an aspect"),
                }
            }
            RightModel::Core(additional) => {
                let expected = match link.kind {
                    LinkKind::AttributeToClass => ElementKind::Attribute,
                    LinkKind::MethodToClass => ElementKind::Method,
                    LinkKind::ClassToModel => ElementKind::Class,
                    LinkKind::AssociationToModel => ElementKind::Association,
                    LinkKind::AspectToTarget => {
                        report.push(at.clone(), "AspectToTarget link in a core-additional weaving");
                        continue;
                    }
                };
                if link.kind.targets_model() {
                    if !names_model(left_name, w) {
                        report.push(
                            at.clone(),
                            format!("left end of a {} link must be `{}`", link.kind, w.left.logical_name),
                        );
                    }
                } else {
                    match left.resolve(left_name) {
                        Some(e) if e.kind() == ElementKind::Class => {}
                        Some(e) => report.push(
                            at.clone(),
                            format!("left end `{left_name}` is a {}, expected a class", e.kind()),
                        ),
                        None => report.push(at.clone(), format!("left end `{left_name}` does not resolve")),
                    }
                }
                match &link.right.target {
                    RefTarget::Element { name } => match additional.resolve(name) {
                        Some(e) if e.kind() == expected => {}
                        Some(e) => report.push(
                            at.clone(),
                            format!("right end `{name}` is a {}, expected {expected}", e.kind()),
                        ),
                        None => report.push(at.clone(), format!("right end `{name}` does not resolve")),
                    },
                    RefTarget::Aspect { .. } => report.push(at.clone(), "right end must be a qualified name"),
                }
            }
        }
    }
    Ok(report.finish())
}

fn names_model(qn: &QualifiedName, w: &WeavingModel) -> bool {
    qn.segments() == [w.left.logical_name.as_str()]
}

/// SHA-256 (lowercase hex) of the canonical printed form.
pub fn core_digest(model: &CoreModel) -> String {
    hex::encode(Sha256::digest(dsl::print_core(model).as_bytes()))
}

pub fn aspect_digest(model: &AspectModel) -> String {
    hex::encode(Sha256::digest(dsl::print_aspect(model).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigestStatus {
    Ok,
    Stale(Vec<ModelRef>),
}

/// Compares every recorded digest against the models actually supplied.
pub fn digest_check(w: &WeavingModel, left: &CoreModel, right: RightModel<'_>) -> DigestStatus {
    let mut stale = Vec::new();
    let pairs = [(&w.left, core_digest(left)), (&w.right, right.digest())];
    for (model_ref, actual) in pairs {
        if let Some(recorded) = &model_ref.content_digest {
            if !recorded.eq_ignore_ascii_case(&actual) {
                stale.push(model_ref.clone());
            }
        }
    }
    if stale.is_empty() {
        DigestStatus::Ok
    } else {
        DigestStatus::Stale(stale)
    }
}
