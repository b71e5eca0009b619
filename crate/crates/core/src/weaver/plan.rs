use std::collections::BTreeSet;
use std::fmt;

use crate::aspect_model::{
    AdvicePayload, AdviceType, AspectModel, AspectRequirement, NewElement, Pointcut, PointcutKind, UpdateSpec,
};
use crate::core_model::{CoreModel, Element, QualifiedName, ASSOC_SEGMENT};
use crate::weaving_model::{LinkKind, RefTarget, WeaveLink, WeavingModel};

use super::matching::match_pointcut;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditOp {
    Add(NewElement),
    Update(UpdateSpec),
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Add,
    Update,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditSource {
    Additional,
    Aspect(String),
}

impl fmt::Display for EditSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditSource::Additional => f.write_str("additional model"),
            EditSource::Aspect(a) => write!(f, "aspect {a}"),
        }
    }
}

/// One change to a core model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edit {
    pub op: EditOp,
    /// The join point. Model-level additions from an additional model carry
    /// the left model name here.
    pub target: QualifiedName,
    pub source: EditSource,
    pub link: String,
    pub advice: Option<String>,
    /// Set on methods added at a call join point.
    pub ordering: Option<AdviceType>,
}

fn host_class(q: &QualifiedName) -> Option<QualifiedName> {
    match q.segments().first() {
        Some(s) if s != ASSOC_SEGMENT && q.len() <= 2 => Some(QualifiedName::class(s)),
        _ => None,
    }
}

fn is_method(model: &CoreModel, q: &QualifiedName) -> bool {
    matches!(model.resolve(q), Some(Element::Method(..)))
}

impl Edit {
    pub fn kind(&self) -> EditKind {
        match self.op {
            EditOp::Add(_) => EditKind::Add,
            EditOp::Update(_) => EditKind::Update,
            EditOp::Delete => EditKind::Delete,
        }
    }

    /// The class receiving an added attribute or method.
    pub fn host(&self) -> Option<QualifiedName> {
        match &self.op {
            EditOp::Add(e) if e.is_feature() => host_class(&self.target),
            _ => None,
        }
    }

    /// The element this edit creates, changes or removes.
    pub fn affected(&self) -> QualifiedName {
        match &self.op {
            EditOp::Add(NewElement::Class(c)) => QualifiedName::class(&c.name),
            EditOp::Add(NewElement::Association(a)) => QualifiedName::association(&a.name),
            EditOp::Add(e) => self.host().unwrap_or_else(|| self.target.clone()).child(e.name()),
            _ => self.target.clone(),
        }
    }

    /// Name of the target after a rename, if this edit renames it.
    pub fn renamed(&self) -> Option<QualifiedName> {
        match &self.op {
            EditOp::Update(UpdateSpec { new_name: Some(n), .. }) => {
                let mut segs = self.target.segments().to_vec();
                *segs.last_mut()? = n.clone();
                Some(QualifiedName::raw(segs))
            }
            _ => None,
        }
    }

    fn same_source(&self, other: &Edit) -> bool {
        self.source == other.source && self.link == other.link
    }

    /// Existing elements the edit needs in order to apply.
    fn depends(&self) -> Vec<QualifiedName> {
        let mut v = match &self.op {
            EditOp::Add(NewElement::Class(c)) => {
                let mut v = vec![QualifiedName::class(&c.name)];
                v.extend(c.association_class_of.iter().map(|a| QualifiedName::association(a)));
                v
            }
            EditOp::Add(NewElement::Association(a)) => {
                let mut v = vec![QualifiedName::association(&a.name)];
                v.extend(a.ends().iter().map(|e| QualifiedName::class(&e.class_name)));
                v
            }
            EditOp::Add(_) => {
                let mut v = vec![self.affected()];
                v.extend(self.host());
                v
            }
            EditOp::Update(_) | EditOp::Delete => return vec![self.target.clone()],
        };
        // Aspect additions are anchored at their join point.
        if matches!(self.source, EditSource::Aspect(_)) {
            v.push(self.target.clone());
        }
        v
    }
}

fn element_word(e: &NewElement) -> &'static str {
    match e {
        NewElement::Attribute(_) => "attribute",
        NewElement::Method(_) => "method",
        NewElement::Class(_) => "class",
        NewElement::Association(_) => "association",
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.op {
            EditOp::Add(e) => {
                write!(f, "add {} {}", element_word(e), self.affected())?;
                if let Some(pos) = self.ordering {
                    write!(f, " {pos} {}", self.target)?;
                }
            }
            EditOp::Update(u) => {
                write!(f, "update {}", self.target)?;
                if let Some(n) = &u.new_name {
                    write!(f, " rename {n}")?;
                }
                if let Some(t) = &u.new_type {
                    write!(f, " retype {t}")?;
                }
            }
            EditOp::Delete => write!(f, "delete {}", self.target)?,
        }
        write!(f, " ({}, link {}", self.source, self.link)?;
        if let Some(a) = &self.advice {
            write!(f, ", advice {a}")?;
        }
        f.write_str(")")
    }
}

/// An ordered list of edits plus the notes gathered while building it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeavePlan {
    pub edits: Vec<Edit>,
    pub warnings: Vec<String>,
}

impl WeavePlan {
    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// A copy without the edits at the given indices.
    pub fn without(&self, dropped: &BTreeSet<usize>) -> WeavePlan {
        WeavePlan {
            edits: self
                .edits
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, e)| e.clone())
                .collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// Everything the plan may read or write when applied to `model`.
    pub fn footprint(&self, model: &CoreModel) -> BTreeSet<Footprint> {
        self.edits.iter().flat_map(|e| edit_footprint(e, model)).collect()
    }
}

impl fmt::Display for WeavePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.edits.iter().enumerate() {
            writeln!(f, "{:>3}. {e}", i + 1)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictCategory {
    DeleteVsOther,
    DoubleUpdate,
    DuplicateAdd,
}

impl fmt::Display for ConflictCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictCategory::DeleteVsOther => "delete-vs-other",
            ConflictCategory::DoubleUpdate => "double-update",
            ConflictCategory::DuplicateAdd => "duplicate-add",
        })
    }
}

/// Two edits from different aspects or links that cannot both apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub category: ConflictCategory,
    pub target: QualifiedName,
    pub edits: (Edit, Edit),
    /// Positions of the two edits in the plan.
    pub indices: (usize, usize),
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: [{}] {} / [{}] {}",
            self.category,
            self.target,
            self.indices.0 + 1,
            self.edits.0,
            self.indices.1 + 1,
            self.edits.1
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanOutcome {
    pub plan: WeavePlan,
    pub conflicts: Vec<Conflict>,
}

/// Elements removed when `target` is deleted: a class takes its
/// associations with it.
fn cascade(model: &CoreModel, target: &QualifiedName) -> Vec<QualifiedName> {
    let mut out = vec![target.clone()];
    if let Some(Element::Class(c)) = model.resolve(target) {
        out.extend(
            model
                .associations
                .iter()
                .filter(|a| a.touches_class(&c.name))
                .map(|a| QualifiedName::association(&a.name)),
        );
    }
    out
}

fn within(q: &QualifiedName, set: &[QualifiedName]) -> bool {
    set.iter().any(|r| q.starts_with(r))
}

fn classify(a: &Edit, b: &Edit, model: &CoreModel) -> Option<(ConflictCategory, QualifiedName)> {
    match (&a.op, &b.op) {
        (EditOp::Delete, EditOp::Delete) => {
            let (ra, rb) = (cascade(model, &a.target), cascade(model, &b.target));
            (within(&b.target, &ra) || within(&a.target, &rb))
                .then(|| (ConflictCategory::DeleteVsOther, a.target.clone()))
        }
        (EditOp::Delete, _) | (_, EditOp::Delete) => {
            let (d, o) = if a.kind() == EditKind::Delete { (a, b) } else { (b, a) };
            let removed = cascade(model, &d.target);
            o.depends()
                .iter()
                .any(|q| within(q, &removed))
                .then(|| (ConflictCategory::DeleteVsOther, d.target.clone()))
        }
        (EditOp::Update(x), EditOp::Update(y)) => {
            let overlap =
                (x.new_name.is_some() && y.new_name.is_some()) || (x.new_type.is_some() && y.new_type.is_some());
            (a.target == b.target && overlap).then(|| (ConflictCategory::DoubleUpdate, a.target.clone()))
        }
        (EditOp::Add(x), EditOp::Add(y)) => {
            let target = a.affected();
            (target == b.affected() && x != y).then_some((ConflictCategory::DuplicateAdd, target))
        }
        _ => None,
    }
}

fn edit_for(
    model: &CoreModel,
    aspect: &AspectRequirement,
    link: &WeaveLink,
    pointcut: &Pointcut,
    advice: &crate::aspect_model::Advice,
    target: &QualifiedName,
) -> Result<Edit, String> {
    let op = match &advice.payload {
        AdvicePayload::Add { element } => {
            if element.is_feature() && host_class(target).is_none() {
                return Err(format!(
                    "advice {}.{} adds {} `{}` but join point {target} has no host class; skipped",
                    aspect.name,
                    advice.name,
                    element_word(element),
                    element.name()
                ));
            }
            EditOp::Add(element.clone())
        }
        AdvicePayload::Update(u) => {
            let retypable = matches!(
                model.resolve(target),
                Some(Element::Attribute(..) | Element::Method(..))
            );
            if u.new_type.is_some() && !retypable {
                return Err(format!(
                    "advice {}.{} retypes {target}, which has no type; skipped",
                    aspect.name, advice.name
                ));
            }
            EditOp::Update(u.clone())
        }
        AdvicePayload::Delete => EditOp::Delete,
    };
    let ordering = match (&op, pointcut.kind) {
        (EditOp::Add(NewElement::Method(_)), PointcutKind::Call) if is_method(model, target) => {
            Some(advice.advice_type)
        }
        _ => None,
    };
    Ok(Edit {
        op,
        target: target.clone(),
        source: EditSource::Aspect(aspect.name.clone()),
        link: link.name.clone(),
        advice: Some(advice.name.clone()),
        ordering,
    })
}

/// Resolves every link of a core+aspect weaving to concrete edits against
/// `model` and reports the conflicts among them.
///
/// The left end of a link scopes its pointcuts: join points must lie at or
/// under the named element, or anywhere when it names the model. Edits are
/// ordered by link, then pointcut, then join point, then advice.
pub fn plan_weave(model: &CoreModel, aspects: &AspectModel, w: &WeavingModel) -> PlanOutcome {
    let mut candidates = Vec::new();
    let mut warnings = Vec::new();
    for link in &w.links {
        let RefTarget::Aspect { aspect, pointcut } = &link.right.target else {
            continue;
        };
        let Some(asp) = aspects.aspect(aspect) else {
            continue;
        };
        let scope = link.left.element_name().filter(|q| model.resolve(q).is_some());
        let pointcuts: Vec<&Pointcut> = match pointcut {
            Some(p) => asp.pointcut(p).into_iter().collect(),
            None => asp.pointcuts.iter().collect(),
        };
        for pc in pointcuts {
            let targets: Vec<QualifiedName> = match_pointcut(pc, model)
                .into_iter()
                .filter(|t| scope.is_none_or(|s| t.starts_with(s)))
                .collect();
            if targets.is_empty() {
                warnings.push(format!(
                    "link {}: pointcut {}.{} matches nothing",
                    link.name, asp.name, pc.name
                ));
            }
            for t in &targets {
                for adv in asp.advices_for(&pc.name) {
                    if pc.kind == PointcutKind::Structural {
                        warnings.push(format!(
                            "advice {}.{} is `{}` at structural join point {t}; ordering ignored",
                            asp.name, adv.name, adv.advice_type
                        ));
                    }
                    match edit_for(model, asp, link, pc, adv, t) {
                        Ok(e) => candidates.push(e),
                        Err(msg) => warnings.push(msg),
                    }
                }
            }
        }
    }

    let mut edits: Vec<Edit> = Vec::new();
    for e in candidates {
        let dead = edits.iter().find(|d| {
            d.kind() == EditKind::Delete && d.same_source(&e) && {
                let removed = cascade(model, &d.target);
                e.depends().iter().any(|q| within(q, &removed))
            }
        });
        if let Some(d) = dead {
            warnings.push(format!(
                "dropped `{e}`: {} was already deleted by the same link",
                d.target
            ));
            continue;
        }
        edits.push(e);
    }

    let mut conflicts = Vec::new();
    for i in 0..edits.len() {
        for j in i + 1..edits.len() {
            let (a, b) = (&edits[i], &edits[j]);
            if a.same_source(b) {
                continue;
            }
            if let Some((category, target)) = classify(a, b, model) {
                conflicts.push(Conflict {
                    category,
                    target,
                    edits: (a.clone(), b.clone()),
                    indices: (i, j),
                });
            }
        }
    }
    PlanOutcome {
        plan: WeavePlan { edits, warnings },
        conflicts,
    }
}

/// Edits merging the linked elements of an additional model, one per link.
pub fn additional_plan(additional: &CoreModel, w: &WeavingModel) -> WeavePlan {
    let mut plan = WeavePlan::default();
    for link in &w.links {
        let (Some(left), Some(right)) = (link.left.element_name(), link.right.element_name()) else {
            continue;
        };
        let element = match (link.kind, additional.resolve(right)) {
            (LinkKind::AttributeToClass, Some(Element::Attribute(_, a))) => NewElement::Attribute(a.clone()),
            (LinkKind::MethodToClass, Some(Element::Method(_, m))) => NewElement::Method(m.clone()),
            (LinkKind::ClassToModel, Some(Element::Class(c))) => NewElement::Class(c.clone()),
            (LinkKind::AssociationToModel, Some(Element::Association(a))) => NewElement::Association(a.clone()),
            _ => {
                plan.warnings.push(format!(
                    "link {}: {} does not name a {}; skipped",
                    link.name, right, link.kind
                ));
                continue;
            }
        };
        plan.edits.push(Edit {
            op: EditOp::Add(element),
            target: left.clone(),
            source: EditSource::Additional,
            link: link.name.clone(),
            advice: None,
            ordering: None,
        });
    }
    plan
}

/// A region of a model an edit reads or writes. `Classes` and
/// `Associations` stand for the order of the respective lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Footprint {
    Classes,
    Associations,
    Element(QualifiedName),
}

fn edit_footprint(e: &Edit, model: &CoreModel) -> Vec<Footprint> {
    let mut out: Vec<Footprint> = e.depends().into_iter().map(Footprint::Element).collect();
    match &e.op {
        EditOp::Add(NewElement::Class(_)) => out.push(Footprint::Classes),
        EditOp::Add(NewElement::Association(_)) => out.push(Footprint::Associations),
        EditOp::Add(_) => {}
        EditOp::Update(_) => {
            if let Some(n) = e.renamed() {
                out.push(Footprint::Element(n));
                match model.resolve(&e.target) {
                    Some(Element::Class(c)) => out.extend(
                        model
                            .associations
                            .iter()
                            .filter(|a| a.touches_class(&c.name))
                            .map(|a| Footprint::Element(QualifiedName::association(&a.name))),
                    ),
                    Some(Element::Association(a)) => out.extend(orphans(model, &a.name)),
                    _ => {}
                }
            }
        }
        EditOp::Delete => {
            for q in cascade(model, &e.target) {
                if let [s, name] = q.segments() {
                    if s == ASSOC_SEGMENT {
                        out.extend(orphans(model, name));
                    }
                }
                out.push(Footprint::Element(q));
            }
        }
    }
    out
}

fn orphans<'a>(model: &'a CoreModel, assoc: &'a str) -> impl Iterator<Item = Footprint> + 'a {
    model
        .classes
        .iter()
        .filter(move |c| c.association_class_of.as_deref() == Some(assoc))
        .map(|c| Footprint::Element(QualifiedName::class(&c.name)))
}

/// True if some region in `a` contains or lies inside some region in `b`.
pub fn footprints_overlap(a: &BTreeSet<Footprint>, b: &BTreeSet<Footprint>) -> bool {
    a.iter().any(|x| {
        b.iter().any(|y| match (x, y) {
            (Footprint::Element(p), Footprint::Element(q)) => p.starts_with(q) || q.starts_with(p),
            _ => x == y,
        })
    })
}
