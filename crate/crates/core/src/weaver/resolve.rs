use std::collections::BTreeSet;
use std::fmt;

use crate::aspect_model::{AspectModel, Priority};

use super::plan::{Conflict, Edit, EditSource};
use super::WeaveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionReason {
    Priority,
    DeclarationOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub conflict: Conflict,
    /// Plan index of the edit kept.
    pub kept: usize,
    /// Plan index of the edit dropped.
    pub dropped: usize,
    pub reason: DecisionReason,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, d) = if self.kept == self.conflict.indices.0 {
            (&self.conflict.edits.0, &self.conflict.edits.1)
        } else {
            (&self.conflict.edits.1, &self.conflict.edits.0)
        };
        let why = match self.reason {
            DecisionReason::Priority => "higher priority",
            DecisionReason::DeclarationOrder => "declared first",
        };
        write!(
            f,
            "{} at {}: kept `{k}`, dropped `{d}` ({why})",
            self.conflict.category, self.conflict.target
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    /// Plan indices of the edits to leave out.
    pub dropped: BTreeSet<usize>,
    pub decisions: Vec<Decision>,
    /// Equal-priority conflicts left open.
    pub unresolved: Vec<Conflict>,
}

fn aspect_of(e: &Edit) -> Result<&str, WeaveError> {
    match &e.source {
        EditSource::Aspect(a) => Ok(a),
        EditSource::Additional => Err(WeaveError::UnknownAspect("<additional>".into())),
    }
}

fn rank(aspects: &AspectModel, e: &Edit) -> Result<(Priority, usize), WeaveError> {
    let name = aspect_of(e)?;
    aspects
        .aspects
        .iter()
        .position(|a| a.name == name)
        .map(|i| (aspects.aspects[i].priority, i))
        .ok_or_else(|| WeaveError::UnknownAspect(name.to_string()))
}

/// Settles each conflict by keeping the edit of the strictly higher-priority
/// aspect. Ties stay unresolved unless `force_first` is set, in which case
/// the aspect declared earlier wins, then the earlier edit. Conflicts whose
/// edits were already dropped by an earlier decision are skipped.
pub fn resolve_conflicts(
    conflicts: &[Conflict],
    aspects: &AspectModel,
    force_first: bool,
) -> Result<Resolution, WeaveError> {
    let mut out = Resolution::default();
    for c in conflicts {
        let (i, j) = c.indices;
        if out.dropped.contains(&i) || out.dropped.contains(&j) {
            continue;
        }
        let (pi, oi) = rank(aspects, &c.edits.0)?;
        let (pj, oj) = rank(aspects, &c.edits.1)?;
        let (kept, dropped, reason) = if pi > pj {
            (i, j, DecisionReason::Priority)
        } else if pj > pi {
            (j, i, DecisionReason::Priority)
        } else if force_first {
            if (oi, i) <= (oj, j) {
                (i, j, DecisionReason::DeclarationOrder)
            } else {
                (j, i, DecisionReason::DeclarationOrder)
            }
        } else {
            out.unresolved.push(c.clone());
            continue;
        };
        out.dropped.insert(dropped);
        out.decisions.push(Decision {
            conflict: c.clone(),
            kept,
            dropped,
            reason,
        });
    }
    Ok(out)
}
