//! Executes weavings.
//!
//! All core+additional weavings run first, in declaration order, and merge
//! linked elements of the additional models into the core. Core+aspect
//! weavings then run one by one: each is planned against the current model
//! state ([`plan_weave`]), its conflicts are settled by aspect priority
//! ([`resolve_conflicts`]) and the surviving edits are applied
//! ([`apply_plan`]).

mod apply;
mod matching;
mod plan;
mod resolve;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspect_model::{validate_aspect, AdviceType, AspectModel};
use crate::core_model::{validate_core, CoreModel, QualifiedName};
use crate::report::ValidationReport;
use crate::weaving_model::{validate_weaving, RightModel, WeavingError, WeavingKind, WeavingModel};

pub use apply::apply_plan;
pub use matching::match_pointcut;
pub use plan::{
    additional_plan, footprints_overlap, plan_weave, Conflict, ConflictCategory, Edit, EditKind, EditOp, EditSource,
    Footprint, PlanOutcome, WeavePlan,
};
pub use resolve::{resolve_conflicts, Decision, DecisionReason, Resolution};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "aspect", rename_all = "lowercase")]
pub enum Origin {
    Core,
    Additional,
    Aspect(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Core => f.write_str("core"),
            Origin::Additional => f.write_str("additional"),
            Origin::Aspect(a) => write!(f, "aspect {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub element: QualifiedName,
    pub origin: Origin,
}

/// `advice_method` runs before or after every call of `target_method`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderingConstraint {
    pub advice_method: QualifiedName,
    pub target_method: QualifiedName,
    pub position: AdviceType,
    pub source_aspect: String,
}

impl fmt::Display for OrderingConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} (aspect {})",
            self.advice_method, self.position, self.target_method, self.source_aspect
        )
    }
}

/// A core model together with the ordering constraints and provenance
/// produced by weaving.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WovenModel {
    pub base: CoreModel,
    #[serde(default)]
    pub ordering_constraints: Vec<OrderingConstraint>,
    /// One entry per woven element, sorted by element name.
    #[serde(default)]
    pub provenance: Vec<ProvenanceEntry>,
}

impl WovenModel {
    pub fn from_core(base: CoreModel) -> Self {
        WovenModel {
            base,
            ordering_constraints: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn origin_of(&self, element: &QualifiedName) -> Origin {
        self.provenance
            .iter()
            .find(|p| &p.element == element)
            .map_or(Origin::Core, |p| p.origin.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeaveError {
    #[error("{what} is not valid:\n{report}")]
    InvalidInput { what: String, report: ValidationReport },
    #[error(transparent)]
    Weaving(#[from] WeavingError),
    #[error("weaving `{name}` is {found}, expected {expected}")]
    WrongWeavingKind {
        name: String,
        expected: WeavingKind,
        found: WeavingKind,
    },
    #[error("model drifted: `{0}` no longer exists")]
    Stale(QualifiedName),
    #[error("`{0}` already exists with different content")]
    Collision(QualifiedName),
    #[error("woven model does not conform:\n{0}")]
    NonConformant(ValidationReport),
    #[error("conflicting edit traces to unknown aspect `{0}`")]
    UnknownAspect(String),
    #[error("unresolved conflicts between equal-priority aspects: {}", describe_unresolved(.0))]
    Unresolved(Vec<Conflict>),
}

fn describe_unresolved(conflicts: &[Conflict]) -> String {
    conflicts
        .iter()
        .map(|c| {
            format!(
                "{} at {} ({} vs {})",
                c.category, c.target, c.edits.0.source, c.edits.1.source
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WeaveOptions {
    /// Settle equal-priority conflicts in favour of the aspect declared
    /// first instead of failing.
    pub force_first: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum ReportEntry {
    Applied { weaving: String, edit: Edit },
    Warning { weaving: String, message: String },
    Resolved { weaving: String, decision: Decision },
}

impl fmt::Display for ReportEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportEntry::Applied { weaving, edit } => write!(f, "[{weaving}] edit {edit}"),
            ReportEntry::Warning { weaving, message } => write!(f, "[{weaving}] warning: {message}"),
            ReportEntry::Resolved { weaving, decision } => write!(f, "[{weaving}] resolved {decision}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeaveReport {
    pub entries: Vec<ReportEntry>,
}

impl fmt::Display for WeaveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeaveOutcome {
    pub woven: WovenModel,
    pub report: WeaveReport,
}

/// A planned core+aspect weaving, resolved but not yet applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedWeave {
    pub outcome: PlanOutcome,
    pub resolution: Resolution,
}

impl PlannedWeave {
    /// The edits that survive conflict resolution.
    pub fn effective_plan(&self) -> WeavePlan {
        self.outcome.plan.without(&self.resolution.dropped)
    }
}

fn check(what: impl FnOnce() -> String, report: ValidationReport) -> Result<(), WeaveError> {
    if report.is_empty() {
        Ok(())
    } else {
        Err(WeaveError::InvalidInput { what: what(), report })
    }
}

/// Stateful pipeline over one core model. [`weave`] drives it end to end;
/// the CLI steps through it to print plans.
#[derive(Debug, Clone)]
pub struct Weaver {
    state: WovenModel,
    report: WeaveReport,
    options: WeaveOptions,
}

impl Weaver {
    pub fn new(core: &CoreModel, options: WeaveOptions) -> Result<Self, WeaveError> {
        check(|| format!("core model `{}`", core.name), validate_core(core))?;
        Ok(Weaver {
            state: WovenModel::from_core(core.clone()),
            report: WeaveReport::default(),
            options,
        })
    }

    pub fn current(&self) -> &WovenModel {
        &self.state
    }

    fn warn(&mut self, weaving: &str, messages: impl IntoIterator<Item = String>) {
        for message in messages {
            self.report.entries.push(ReportEntry::Warning {
                weaving: weaving.to_string(),
                message,
            });
        }
    }

    fn apply(&mut self, weaving: &str, plan: &WeavePlan) -> Result<(), WeaveError> {
        let (next, warnings) = apply::apply_to(self.state.clone(), plan)?;
        self.state = next;
        self.report
            .entries
            .extend(plan.edits.iter().map(|e| ReportEntry::Applied {
                weaving: weaving.to_string(),
                edit: e.clone(),
            }));
        self.warn(weaving, warnings);
        Ok(())
    }

    pub fn weave_additional(&mut self, additional: &CoreModel, w: &WeavingModel) -> Result<(), WeaveError> {
        if w.kind != WeavingKind::CoreAdditional {
            return Err(WeaveError::WrongWeavingKind {
                name: w.name.clone(),
                expected: WeavingKind::CoreAdditional,
                found: w.kind,
            });
        }
        check(
            || format!("additional model `{}`", additional.name),
            validate_core(additional),
        )?;
        let report = validate_weaving(w, &self.state.base, RightModel::Core(additional))?;
        check(|| format!("weaving `{}`", w.name), report)?;
        let plan = additional_plan(additional, w);
        self.warn(&w.name, plan.warnings.clone());
        self.apply(&w.name, &plan)
    }

    /// Plans a core+aspect weaving against the current state and resolves
    /// its conflicts, without applying anything.
    pub fn plan_aspects(&self, aspects: &AspectModel, w: &WeavingModel) -> Result<PlannedWeave, WeaveError> {
        if w.kind != WeavingKind::CoreAspect {
            return Err(WeaveError::WrongWeavingKind {
                name: w.name.clone(),
                expected: WeavingKind::CoreAspect,
                found: w.kind,
            });
        }
        check(|| format!("aspect model `{}`", aspects.name), validate_aspect(aspects))?;
        let report = validate_weaving(w, &self.state.base, RightModel::Aspect(aspects))?;
        check(|| format!("weaving `{}`", w.name), report)?;
        let outcome = plan_weave(&self.state.base, aspects, w);
        let resolution = resolve_conflicts(&outcome.conflicts, aspects, self.options.force_first)?;
        Ok(PlannedWeave { outcome, resolution })
    }

    pub fn weave_aspects(&mut self, aspects: &AspectModel, w: &WeavingModel) -> Result<(), WeaveError> {
        let planned = self.plan_aspects(aspects, w)?;
        if !planned.resolution.unresolved.is_empty() {
            return Err(WeaveError::Unresolved(planned.resolution.unresolved));
        }
        self.warn(&w.name, planned.outcome.plan.warnings.clone());
        for decision in &planned.resolution.decisions {
            self.report.entries.push(ReportEntry::Resolved {
                weaving: w.name.clone(),
                decision: decision.clone(),
            });
        }
        self.apply(&w.name, &planned.effective_plan())
    }

    pub fn finish(self) -> WeaveOutcome {
        WeaveOutcome {
            woven: self.state,
            report: self.report,
        }
    }
}

/// Runs every core+additional weaving, then every core+aspect weaving.
pub fn weave(
    core: &CoreModel,
    additional: &[(&CoreModel, &WeavingModel)],
    aspects: &[(&AspectModel, &WeavingModel)],
    options: WeaveOptions,
) -> Result<WeaveOutcome, WeaveError> {
    let mut weaver = Weaver::new(core, options)?;
    for (model, w) in additional {
        weaver.weave_additional(model, w)?;
    }
    for (model, w) in aspects {
        weaver.weave_aspects(model, w)?;
    }
    Ok(weaver.finish())
}

/// Merges the linked elements of `additional` into `core`.
pub fn weave_core_additional(
    core: &CoreModel,
    additional: &CoreModel,
    w: &WeavingModel,
) -> Result<CoreModel, WeaveError> {
    let mut weaver = Weaver::new(core, WeaveOptions::default())?;
    weaver.weave_additional(additional, w)?;
    Ok(weaver.finish().woven.base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspect_model::tests::m2;
    use crate::core_model::tests::m1;
    use crate::core_model::{AttributeDecl, ClassDecl};
    use crate::dsl::parse_aspect;
    use crate::weaving_model::tests::m1_m2;
    use crate::weaving_model::{ElementRef, LinkKind, ModelRef, WeaveLink};

    fn qn(s: &str) -> QualifiedName {
        s.parse().unwrap()
    }

    fn extra() -> (CoreModel, WeavingModel) {
        let extra = CoreModel::new("Extra")
            .with_class(ClassDecl::new("Course").with_attribute(AttributeDecl::new("Title", "String")));
        let mut w = WeavingModel::new(
            "WA",
            WeavingKind::CoreAdditional,
            ModelRef::new("M1", "m1.core"),
            ModelRef::new("Extra", "x.core"),
        );
        w.links.push(WeaveLink {
            name: "L1".into(),
            kind: LinkKind::ClassToModel,
            left: ElementRef::element("M1", qn("M1")),
            right: ElementRef::element("Extra", qn("Course")),
        });
        (extra, w)
    }

    #[test]
    fn worked_example_pipeline() {
        let out = weave(&m1(), &[], &[(&m2(), &m1_m2())], WeaveOptions::default()).unwrap();
        let w = &out.woven;
        assert!(w
            .base
            .class("Student")
            .unwrap()
            .method("VerifySpecialityNbreOfHours")
            .is_some());
        assert_eq!(w.ordering_constraints.len(), 1);
        assert_eq!(w.ordering_constraints[0].position, AdviceType::Before);
        assert_eq!(w.ordering_constraints[0].target_method, qn("Student.NewSubscription"));
        assert_eq!(
            w.origin_of(&qn("Student.VerifySpecialityNbreOfHours")),
            Origin::Aspect("HoursConstraint".into())
        );
        assert!(out
            .report
            .entries
            .iter()
            .any(|e| matches!(e, ReportEntry::Applied { .. })));
    }

    #[test]
    fn additional_before_aspects() {
        let (x, wx) = extra();
        let out = weave(&m1(), &[(&x, &wx)], &[(&m2(), &m1_m2())], WeaveOptions::default()).unwrap();
        assert_eq!(out.woven.origin_of(&qn("Course")), Origin::Additional);
        assert_eq!(out.woven.origin_of(&qn("Course.Title")), Origin::Additional);
        assert_eq!(out.woven.origin_of(&qn("Student")), Origin::Core);
    }

    #[test]
    fn additional_collision_is_an_error() {
        let (x, wx) = extra();
        let merged = weave_core_additional(&m1(), &x, &wx).unwrap();
        let mut other = x.clone();
        other.classes[0].attributes[0].type_name = "Text".into();
        assert_eq!(
            weave_core_additional(&merged, &other, &wx).unwrap_err(),
            WeaveError::Collision(qn("Course"))
        );
    }

    #[test]
    fn weaving_kind_is_checked() {
        let (x, wx) = extra();
        let err = weave(&m1(), &[], &[(&m2(), &wx)], WeaveOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            WeaveError::WrongWeavingKind {
                expected: WeavingKind::CoreAspect,
                ..
            }
        ));
        let err = weave(&m1(), &[(&x, &m1_m2())], &[], WeaveOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            WeaveError::WrongWeavingKind {
                expected: WeavingKind::CoreAdditional,
                ..
            }
        ));
    }

    #[test]
    fn equal_priority_tie() {
        let a = parse_aspect(
            "aspectmodel Naming {
               aspect Formal priority 0.5 { pointcut P : structural on Student.Name;
                 advice u : after update bind P { rename FullName; body \"\"; } }
               aspect Casual priority 0.5 { pointcut P : structural on Student.Name;
                 advice u : after update bind P { rename Nickname; body \"\"; } }
             }",
            "n.aspect",
        )
        .into_result()
        .unwrap();
        let mut w = WeavingModel::new(
            "WN",
            WeavingKind::CoreAspect,
            ModelRef::new("M1", "m1.core"),
            ModelRef::new("Naming", "n.aspect"),
        );
        for (i, name) in ["Formal", "Casual"].iter().enumerate() {
            w.links.push(WeaveLink {
                name: format!("L{i}"),
                kind: LinkKind::AspectToTarget,
                left: ElementRef::element("M1", qn("M1")),
                right: ElementRef::aspect("Naming", name, None),
            });
        }
        let err = weave(&m1(), &[], &[(&a, &w)], WeaveOptions::default()).unwrap_err();
        assert!(matches!(&err, WeaveError::Unresolved(c) if c.len() == 1));
        assert!(err.to_string().contains("aspect Formal vs aspect Casual"), "{err}");
        let out = weave(&m1(), &[], &[(&a, &w)], WeaveOptions { force_first: true }).unwrap();
        assert!(out.woven.base.class("Student").unwrap().attribute("FullName").is_some());
        assert!(out
            .report
            .entries
            .iter()
            .any(|e| matches!(e, ReportEntry::Resolved { .. })));
    }
}
