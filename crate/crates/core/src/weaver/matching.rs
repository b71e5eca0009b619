use crate::aspect_model::{Pointcut, PointcutKind};
use crate::core_model::{CoreModel, Element, QualifiedName};

/// Canonical names of the elements of `model` selected by `pointcut`, sorted
/// and free of duplicates. Call pointcuts see methods; structural pointcuts
/// see classes, attributes and associations.
pub fn match_pointcut(pointcut: &Pointcut, model: &CoreModel) -> Vec<QualifiedName> {
    let mut out: Vec<QualifiedName> = model
        .elements()
        .into_iter()
        .filter(|e| match pointcut.kind {
            PointcutKind::Call => matches!(e, Element::Method(..)),
            PointcutKind::Structural => {
                matches!(e, Element::Class(_) | Element::Attribute(..) | Element::Association(_))
            }
        })
        .map(|e| e.canonical_name())
        .filter(|q| pointcut.pattern.matches(q))
        .collect();
    out.sort();
    out.dedup();
    out
}
