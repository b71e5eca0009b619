use crate::aspect_model::{NewElement, UpdateSpec};
use crate::core_model::{validate_core, CoreModel, Element, ElementKind, QualifiedName};

use super::plan::{Edit, EditOp, EditSource, WeavePlan};
use super::{OrderingConstraint, Origin, ProvenanceEntry, WeaveError, WovenModel};

struct Applier {
    w: WovenModel,
    /// Renames performed so far, oldest first. Plan targets name elements
    /// as they were before the plan ran.
    renames: Vec<(QualifiedName, QualifiedName)>,
    warnings: Vec<String>,
}

fn origin_of(source: &EditSource) -> Origin {
    match source {
        EditSource::Additional => Origin::Additional,
        EditSource::Aspect(a) => Origin::Aspect(a.clone()),
    }
}

/// The element and everything it contains.
fn subtree(model: &CoreModel, q: &QualifiedName) -> Vec<QualifiedName> {
    let mut out = vec![q.clone()];
    match model.resolve(q) {
        Some(Element::Class(c)) => {
            out.extend(c.attributes.iter().map(|a| q.child(&a.name)));
            out.extend(c.methods.iter().map(|m| q.child(&m.name)));
        }
        Some(Element::Association(a)) => out.extend(a.ends().iter().map(|e| q.child(&e.role))),
        _ => {}
    }
    out
}

impl Applier {
    fn model(&mut self) -> &mut CoreModel {
        &mut self.w.base
    }

    fn current(&self, q: &QualifiedName) -> QualifiedName {
        let mut q = q.clone();
        for (from, to) in &self.renames {
            if let Some(n) = q.rebase(from, to) {
                q = n;
            }
        }
        q
    }

    fn touch(&mut self, element: QualifiedName, origin: &Origin) {
        let p = &mut self.w.provenance;
        match p.binary_search_by(|e| e.element.cmp(&element)) {
            Ok(i) => p[i].origin = origin.clone(),
            Err(i) => p.insert(
                i,
                ProvenanceEntry {
                    element,
                    origin: origin.clone(),
                },
            ),
        }
    }

    fn touch_tree(&mut self, q: &QualifiedName, origin: &Origin) {
        for e in subtree(&self.w.base, q) {
            self.touch(e, origin);
        }
    }

    fn forget(&mut self, prefix: &QualifiedName) {
        self.w.provenance.retain(|p| !p.element.starts_with(prefix));
        let before = self.w.ordering_constraints.len();
        self.w
            .ordering_constraints
            .retain(|c| !c.advice_method.starts_with(prefix) && !c.target_method.starts_with(prefix));
        let gone = before - self.w.ordering_constraints.len();
        if gone > 0 {
            self.warnings
                .push(format!("{gone} ordering constraint(s) on {prefix} dropped with it"));
        }
    }

    fn rename_refs(&mut self, from: &QualifiedName, to: &QualifiedName) {
        for p in &mut self.w.provenance {
            if let Some(n) = p.element.rebase(from, to) {
                p.element = n;
            }
        }
        self.w.provenance.sort_by(|a, b| a.element.cmp(&b.element));
        for c in &mut self.w.ordering_constraints {
            for m in [&mut c.advice_method, &mut c.target_method] {
                if let Some(n) = m.rebase(from, to) {
                    *m = n;
                }
            }
        }
        self.renames.push((from.clone(), to.clone()));
    }

    fn apply(&mut self, e: &Edit) -> Result<(), WeaveError> {
        match &e.op {
            EditOp::Add(el) => self.add(e, &self.follow_renames(el)),
            EditOp::Update(u) => self.update(e, u),
            EditOp::Delete => self.delete(e),
        }
    }

    /// Points class and association references inside new content at their
    /// current names.
    fn follow_renames(&self, el: &NewElement) -> NewElement {
        let class = |n: &str| self.current(&QualifiedName::class(n)).last().to_string();
        let mut el = el.clone();
        match &mut el {
            NewElement::Class(c) => {
                if let Some(a) = &mut c.association_class_of {
                    *a = self.current(&QualifiedName::association(a)).last().to_string();
                }
            }
            NewElement::Association(a) => {
                for end in [&mut a.end_a, &mut a.end_b] {
                    end.class_name = class(&end.class_name);
                }
            }
            NewElement::Attribute(_) | NewElement::Method(_) => {}
        }
        el
    }

    fn add(&mut self, e: &Edit, el: &NewElement) -> Result<(), WeaveError> {
        let origin = origin_of(&e.source);
        let target = self.current(&e.target);
        if matches!(e.source, EditSource::Aspect(_)) && self.w.base.resolve(&target).is_none() {
            return Err(WeaveError::Stale(e.target.clone()));
        }
        let affected = match el {
            NewElement::Attribute(_) | NewElement::Method(_) => {
                let host = e
                    .host()
                    .map(|h| self.current(&h))
                    .ok_or_else(|| WeaveError::Stale(e.target.clone()))?;
                let class = self
                    .model()
                    .class_mut(host.last())
                    .ok_or_else(|| WeaveError::Stale(host.clone()))?;
                let qn = host.child(el.name());
                let identical = match el {
                    NewElement::Attribute(a) => class.attribute(&a.name) == Some(a),
                    NewElement::Method(m) => class.method(&m.name) == Some(m),
                    _ => unreachable!(),
                };
                if identical {
                    self.warnings.push(format!("{qn} is already present; addition skipped"));
                } else if class.has_feature(el.name()) {
                    return Err(WeaveError::Collision(qn));
                } else {
                    match el {
                        NewElement::Attribute(a) => class.attributes.push(a.clone()),
                        NewElement::Method(m) => class.methods.push(m.clone()),
                        _ => unreachable!(),
                    }
                    self.touch(qn.clone(), &origin);
                }
                qn
            }
            NewElement::Class(c) => {
                let qn = QualifiedName::class(&c.name);
                match self.w.base.class(&c.name) {
                    Some(existing) if existing == c => {
                        self.warnings.push(format!("{qn} is already present; addition skipped"))
                    }
                    Some(_) => return Err(WeaveError::Collision(qn)),
                    None => {
                        self.model().classes.push(c.clone());
                        self.touch_tree(&qn, &origin);
                    }
                }
                qn
            }
            NewElement::Association(a) => {
                let qn = QualifiedName::association(&a.name);
                match self.w.base.association(&a.name) {
                    Some(existing) if existing == a => {
                        self.warnings.push(format!("{qn} is already present; addition skipped"))
                    }
                    Some(_) => return Err(WeaveError::Collision(qn)),
                    None => {
                        self.model().associations.push(a.clone());
                        self.touch_tree(&qn, &origin);
                    }
                }
                qn
            }
        };
        if let (Some(position), EditSource::Aspect(aspect)) = (e.ordering, &e.source) {
            if !matches!(self.w.base.resolve(&target), Some(Element::Method(..))) {
                return Ok(());
            }
            if affected == target {
                self.warnings.push(format!(
                    "{affected} cannot be ordered relative to itself; constraint skipped"
                ));
                return Ok(());
            }
            let exists = self
                .w
                .ordering_constraints
                .iter()
                .any(|c| c.advice_method == affected && c.target_method == target && c.position == position);
            if !exists {
                self.w.ordering_constraints.push(OrderingConstraint {
                    advice_method: affected,
                    target_method: target,
                    position,
                    source_aspect: aspect.clone(),
                });
            }
        }
        Ok(())
    }

    fn update(&mut self, e: &Edit, u: &UpdateSpec) -> Result<(), WeaveError> {
        let origin = origin_of(&e.source);
        let target = self.current(&e.target);
        let kind = self
            .w
            .base
            .resolve(&target)
            .map(|el| el.kind())
            .ok_or_else(|| WeaveError::Stale(e.target.clone()))?;
        let old = target.last().to_string();
        let mut current = target.clone();
        match kind {
            ElementKind::Class => {
                if let Some(n) = u.new_name.as_ref().filter(|n| **n != old) {
                    if self.w.base.class(n).is_some() {
                        return Err(WeaveError::Collision(QualifiedName::class(n)));
                    }
                    let m = self.model();
                    m.class_mut(&old).expect("resolved").name = n.clone();
                    for a in &mut m.associations {
                        for end in [&mut a.end_a, &mut a.end_b] {
                            if end.class_name == old {
                                end.class_name = n.clone();
                            }
                        }
                    }
                    current = QualifiedName::class(n);
                    self.rename_refs(&target, &current);
                }
            }
            ElementKind::Attribute | ElementKind::Method => {
                let class_name = target.segments()[0].clone();
                let class = self.model().class_mut(&class_name).expect("resolved");
                if let Some(n) = u.new_name.as_ref().filter(|n| **n != old) {
                    if class.has_feature(n) {
                        return Err(WeaveError::Collision(QualifiedName::feature(&class_name, n)));
                    }
                }
                if kind == ElementKind::Attribute {
                    let a = class.attributes.iter_mut().find(|a| a.name == old).expect("resolved");
                    if let Some(t) = &u.new_type {
                        a.type_name = t.clone();
                    }
                    if let Some(n) = &u.new_name {
                        a.name = n.clone();
                    }
                } else {
                    let m = class.methods.iter_mut().find(|m| m.name == old).expect("resolved");
                    if let Some(t) = &u.new_type {
                        m.return_type = Some(t.clone());
                    }
                    if let Some(n) = &u.new_name {
                        m.name = n.clone();
                    }
                }
                if let Some(n) = u.new_name.as_ref().filter(|n| **n != old) {
                    current = QualifiedName::feature(&class_name, n);
                    self.rename_refs(&target, &current);
                }
            }
            ElementKind::Association => {
                if let Some(n) = u.new_name.as_ref().filter(|n| **n != old) {
                    if self.w.base.association(n).is_some() {
                        return Err(WeaveError::Collision(QualifiedName::association(n)));
                    }
                    let m = self.model();
                    m.associations
                        .iter_mut()
                        .find(|a| a.name == old)
                        .expect("resolved")
                        .name = n.clone();
                    for c in &mut m.classes {
                        if c.association_class_of.as_deref() == Some(old.as_str()) {
                            c.association_class_of = Some(n.clone());
                        }
                    }
                    current = QualifiedName::association(n);
                    self.rename_refs(&target, &current);
                }
            }
            ElementKind::AssociationEnd => return Err(WeaveError::Stale(e.target.clone())),
        }
        if current != target {
            self.touch_tree(&current, &origin);
        } else {
            self.touch(current, &origin);
        }
        Ok(())
    }

    fn orphan(&mut self, assoc: &str) {
        for c in &mut self.w.base.classes {
            if c.association_class_of.as_deref() == Some(assoc) {
                c.association_class_of = None;
                self.warnings.push(format!(
                    "class {} is no longer an association class: {assoc} was deleted",
                    c.name
                ));
            }
        }
    }

    fn delete(&mut self, e: &Edit) -> Result<(), WeaveError> {
        let target = self.current(&e.target);
        let kind = self
            .w
            .base
            .resolve(&target)
            .map(|el| el.kind())
            .ok_or_else(|| WeaveError::Stale(e.target.clone()))?;
        let name = target.last().to_string();
        match kind {
            ElementKind::Class => {
                self.model().classes.retain(|c| c.name != name);
                let gone: Vec<String> = self
                    .w
                    .base
                    .associations
                    .iter()
                    .filter(|a| a.touches_class(&name))
                    .map(|a| a.name.clone())
                    .collect();
                self.model().associations.retain(|a| !a.touches_class(&name));
                for a in gone {
                    self.warnings
                        .push(format!("association {a} deleted along with class {name}"));
                    self.orphan(&a);
                    self.forget(&QualifiedName::association(&a));
                }
            }
            ElementKind::Attribute | ElementKind::Method => {
                let class = self.model().class_mut(&target.segments()[0]).expect("resolved");
                class.attributes.retain(|a| a.name != name);
                class.methods.retain(|m| m.name != name);
            }
            ElementKind::Association => {
                self.model().associations.retain(|a| a.name != name);
                self.orphan(&name);
            }
            ElementKind::AssociationEnd => return Err(WeaveError::Stale(e.target.clone())),
        }
        self.forget(&target);
        Ok(())
    }
}

/// Applies `plan` to `state`, returning the new state and any warnings.
pub(crate) fn apply_to(state: WovenModel, plan: &WeavePlan) -> Result<(WovenModel, Vec<String>), WeaveError> {
    let mut a = Applier {
        w: state,
        renames: Vec::new(),
        warnings: Vec::new(),
    };
    for e in &plan.edits {
        a.apply(e)?;
    }
    a.w.ordering_constraints
        .sort_by(|x, y| x.target_method.cmp(&y.target_method));
    let report = validate_core(&a.w.base);
    if !report.is_empty() {
        return Err(WeaveError::NonConformant(report));
    }
    Ok((a.w, a.warnings))
}

/// Applies `plan` to a copy of `model`. Fails if an edit refers to an
/// element that no longer exists, if an addition clashes with a different
/// element of the same name, or if the result does not conform.
pub fn apply_plan(model: &CoreModel, plan: &WeavePlan) -> Result<WovenModel, WeaveError> {
    apply_to(WovenModel::from_core(model.clone()), plan).map(|(w, _)| w)
}
