//! Cooperative-requirement decomposition graphs.
//!
//! A cooperative requirement (CR) decomposes through an AND or OR connector
//! into existing (ER) and additional (AR) requirements, or into further CRs.
//! Inference between CRs is boolean entailment over these negation-free
//! formulas, decided by enumerating every assignment of the leaves.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_model::QualifiedName;
use crate::report::{ReportBuilder, ValidationReport};

pub const DEFAULT_MAX_LEAVES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequirementKind {
    #[serde(rename = "CR")]
    Cooperative,
    #[serde(rename = "ER")]
    Existing,
    #[serde(rename = "AR")]
    Additional,
}

impl fmt::Display for RequirementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequirementKind::Cooperative => "cr",
            RequirementKind::Existing => "er",
            RequirementKind::Additional => "ar",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connective {
    And,
    Or,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decomposition {
    pub op: Connective,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RequirementNode {
    pub id: String,
    pub kind: RequirementKind,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_system: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linked_aspects: Vec<String>,
    /// The connector of a CR; always `None` for ERs and ARs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
}

impl RequirementNode {
    fn new(id: &str, kind: RequirementKind) -> Self {
        RequirementNode {
            id: id.to_string(),
            kind,
            text: String::new(),
            source_system: None,
            linked_aspects: Vec::new(),
            decomposition: None,
        }
    }

    pub fn cr(id: &str, op: Connective, children: &[&str]) -> Self {
        RequirementNode {
            decomposition: Some(Decomposition {
                op,
                children: children.iter().map(|c| c.to_string()).collect(),
            }),
            ..RequirementNode::new(id, RequirementKind::Cooperative)
        }
    }

    pub fn er(id: &str) -> Self {
        RequirementNode::new(id, RequirementKind::Existing)
    }

    pub fn ar(id: &str) -> Self {
        RequirementNode::new(id, RequirementKind::Additional)
    }

    pub fn with_text(mut self, text: &str) -> Self {
        self.text = text.to_string();
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.kind != RequirementKind::Cooperative
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DecompositionGraph {
    pub name: String,
    #[serde(default)]
    pub nodes: Vec<RequirementNode>,
}

/// Boolean formula over leaf ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Expression {
    Leaf(String),
    And(Vec<Expression>),
    Or(Vec<Expression>),
}

impl Expression {
    pub fn leaves(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expression::Leaf(id) => {
                out.insert(id);
            }
            Expression::And(xs) | Expression::Or(xs) => {
                xs.iter().for_each(|x| x.collect_leaves(out));
            }
        }
    }

    pub fn eval(&self, satisfied: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Expression::Leaf(id) => satisfied(id),
            Expression::And(xs) => xs.iter().all(|x| x.eval(satisfied)),
            Expression::Or(xs) => xs.iter().any(|x| x.eval(satisfied)),
        }
    }

    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        let (xs, sep) = match self {
            Expression::Leaf(id) => return f.write_str(id),
            Expression::And(xs) => (xs, " ∧ "),
            Expression::Or(xs) => (xs, " ∨ "),
        };
        if nested {
            f.write_str("(")?;
        }
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            x.fmt_nested(f, true)?;
        }
        if nested {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_nested(f, false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequirementError {
    #[error("unknown requirement `{0}`")]
    Unknown(String),
    #[error("`{0}` is not a cooperative requirement")]
    NotCooperative(String),
    #[error("`{0}` is in the given set")]
    TargetGiven(String),
    #[error("graph is not valid: {0}")]
    Invalid(String),
    #[error("{count} leaves exceed the enumeration bound of {bound}")]
    Capacity { count: usize, bound: usize },
}

/// A CR that follows from other CRs, with every minimal witness set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Redundancy {
    pub cr: String,
    pub inferred_from: Vec<Vec<String>>,
}

impl DecompositionGraph {
    pub fn new(name: impl Into<String>) -> Self {
        DecompositionGraph {
            name: name.into(),
            nodes: Vec::new(),
        }
    }

    pub fn with_node(mut self, node: RequirementNode) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn node(&self, id: &str) -> Option<&RequirementNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn crs(&self) -> impl Iterator<Item = &RequirementNode> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    pub fn leaves(&self) -> impl Iterator<Item = &RequirementNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_graph(self)
    }

    fn cr_node(&self, id: &str) -> Result<&RequirementNode, RequirementError> {
        let node = self.node(id).ok_or_else(|| RequirementError::Unknown(id.to_string()))?;
        if node.is_leaf() {
            return Err(RequirementError::NotCooperative(id.to_string()));
        }
        Ok(node)
    }

    /// The structural part of validation: unique ids, one connector per CR
    /// and none on leaves, known children, no cycles.
    fn ensure_sound(&self) -> Result<(), RequirementError> {
        let invalid = |msg: String| Err(RequirementError::Invalid(msg));
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return invalid(format!("{}: duplicate requirement `{}`", n.id, n.id));
            }
            if n.decomposition.is_some() == n.is_leaf() {
                return invalid(format!("{}: connector does not match kind {}", n.id, n.kind));
            }
        }
        for n in &self.nodes {
            let Some(d) = &n.decomposition else { continue };
            if d.children.is_empty() {
                return invalid(format!("{}: connector has no children", n.id));
            }
            if let Some(c) = d.children.iter().find(|c| !ids.contains(c.as_str())) {
                return invalid(format!("{}: unknown child `{c}`", n.id));
            }
        }
        match find_cycle(self) {
            Some(id) => invalid(format!("{id}: decomposition cycle")),
            None => Ok(()),
        }
    }

    fn ensure_valid(&self) -> Result<(), RequirementError> {
        let report = validate_graph(self);
        match report.violations().first() {
            Some(v) => Err(RequirementError::Invalid(v.to_string())),
            None => Ok(()),
        }
    }

    /// Expands `cr` down to its leaves. A connector with a single child
    /// collapses to that child.
    pub fn expression_of(&self, cr: &str) -> Result<Expression, RequirementError> {
        self.ensure_valid()?;
        self.cr_node(cr)?;
        Ok(self.expand(cr))
    }

    fn expand(&self, id: &str) -> Expression {
        let node = self.node(id).expect("validated graph");
        let Some(d) = &node.decomposition else {
            return Expression::Leaf(id.to_string());
        };
        let mut children: Vec<Expression> = d.children.iter().map(|c| self.expand(c)).collect();
        if children.len() == 1 {
            return children.pop().unwrap();
        }
        match d.op {
            Connective::And => Expression::And(children),
            Connective::Or => Expression::Or(children),
        }
    }

    /// Truth value of `cr` when exactly the leaves in `satisfied` hold.
    pub fn evaluate(&self, cr: &str, satisfied: &BTreeSet<String>) -> Result<bool, RequirementError> {
        self.ensure_sound()?;
        self.cr_node(cr)?;
        let mut memo = BTreeMap::new();
        Ok(self.eval_node(cr, &|leaf| satisfied.contains(leaf), &mut memo))
    }

    fn eval_node<'a>(&'a self, id: &'a str, leaf: &dyn Fn(&str) -> bool, memo: &mut BTreeMap<&'a str, bool>) -> bool {
        if let Some(v) = memo.get(id) {
            return *v;
        }
        let node = self.node(id).expect("validated graph");
        let value = match &node.decomposition {
            None => leaf(id),
            Some(d) => match d.op {
                Connective::And => d.children.iter().all(|c| self.eval_node(c, leaf, memo)),
                Connective::Or => d.children.iter().any(|c| self.eval_node(c, leaf, memo)),
            },
        };
        memo.insert(id, value);
        value
    }

    /// True iff every leaf assignment satisfying all of `given` also
    /// satisfies `target`.
    pub fn is_inferable(
        &self,
        target: &str,
        given: &BTreeSet<String>,
        max_leaves: usize,
    ) -> Result<bool, RequirementError> {
        self.ensure_valid()?;
        self.cr_node(target)?;
        if given.contains(target) {
            return Err(RequirementError::TargetGiven(target.to_string()));
        }
        for g in given {
            self.cr_node(g)?;
        }
        let mut ids: Vec<&str> = vec![target];
        ids.extend(given.iter().map(String::as_str));
        let table = TruthTables::build(self, &ids, max_leaves)?;
        let mut premise = table.all_true();
        for g in given {
            premise.and_assign(&table.rows[g.as_str()]);
        }
        Ok(premise.is_subset(&table.rows[target]))
    }

    /// For each CR, the inclusion-minimal sets of other CRs it can be inferred
    /// from. CRs without any witness are omitted.
    pub fn redundant_crs(&self, max_leaves: usize) -> Result<Vec<Redundancy>, RequirementError> {
        self.ensure_valid()?;
        let crs: Vec<&str> = self.crs().map(|n| n.id.as_str()).collect();
        let table = TruthTables::build(self, &crs, max_leaves)?;
        let mut out = Vec::new();
        for (i, &cr) in crs.iter().enumerate() {
            let others: Vec<&str> = crs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &c)| c)
                .collect();
            let target = &table.rows[cr];
            let mut witnesses: Vec<Vec<usize>> = Vec::new();
            let mut stack = Vec::new();
            search_witnesses(
                &table,
                &others,
                target,
                0,
                &table.all_true(),
                &mut stack,
                &mut witnesses,
            );
            let minimal: Vec<&Vec<usize>> = witnesses
                .iter()
                .filter(|w| {
                    !witnesses
                        .iter()
                        .any(|v| v.len() < w.len() && v.iter().all(|x| w.contains(x)))
                })
                .collect();
            if minimal.is_empty() {
                continue;
            }
            let mut sets: Vec<Vec<String>> = minimal
                .into_iter()
                .map(|w| w.iter().map(|&k| others[k].to_string()).collect())
                .collect();
            sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            out.push(Redundancy {
                cr: cr.to_string(),
                inferred_from: sets,
            });
        }
        Ok(out)
    }
}

/// Depth-first subset search in index order. A subset that already entails
/// the target is recorded and not extended, and adding a CR that leaves the
/// premise unchanged is skipped since it cannot lead to a minimal witness.
fn search_witnesses(
    table: &TruthTables,
    others: &[&str],
    target: &BitRow,
    from: usize,
    premise: &BitRow,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    for k in from..others.len() {
        let mut next = premise.clone();
        next.and_assign(&table.rows[others[k]]);
        if next == *premise {
            continue;
        }
        stack.push(k);
        if next.is_subset(target) {
            out.push(stack.clone());
        } else {
            search_witnesses(table, others, target, k + 1, &next, stack, out);
        }
        stack.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn and_assign(&mut self, other: &BitRow) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a &= b);
    }

    fn is_subset(&self, other: &BitRow) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

/// Truth table of selected CRs over every assignment of the leaves they
/// depend on; bit `k` of a row is the value under assignment `k`.
struct TruthTables<'g> {
    assignments: usize,
    rows: BTreeMap<&'g str, BitRow>,
}

impl<'g> TruthTables<'g> {
    fn build(graph: &'g DecompositionGraph, ids: &[&'g str], max_leaves: usize) -> Result<Self, RequirementError> {
        let mut leaves = BTreeSet::new();
        for id in ids {
            leaves.extend(graph.expand(id).leaves().into_iter().map(str::to_string));
        }
        if leaves.len() > max_leaves {
            return Err(RequirementError::Capacity {
                count: leaves.len(),
                bound: max_leaves,
            });
        }
        let index: BTreeMap<String, usize> = leaves.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        let assignments = 1usize << index.len();
        let words = assignments.div_ceil(64);
        let mut rows: BTreeMap<&str, BitRow> = ids.iter().map(|id| (*id, BitRow(vec![0; words]))).collect();
        for k in 0..assignments {
            let leaf = |id: &str| index.get(id).is_some_and(|&i| k >> i & 1 == 1);
            let mut memo = BTreeMap::new();
            for id in ids {
                if graph.eval_node(id, &leaf, &mut memo) {
                    rows.get_mut(id).unwrap().0[k / 64] |= 1 << (k % 64);
                }
            }
        }
        Ok(TruthTables { assignments, rows })
    }

    fn all_true(&self) -> BitRow {
        let mut row = vec![u64::MAX; self.assignments.div_ceil(64)];
        if !self.assignments.is_multiple_of(64) {
            *row.last_mut().unwrap() = (1u64 << (self.assignments % 64)) - 1;
        }
        BitRow(row)
    }
}

pub fn validate_graph(g: &DecompositionGraph) -> ValidationReport {
    let mut report = ReportBuilder::default();
    report.check_identifier(&QualifiedName::raw([g.name.as_str()]), "graph name", &g.name);
    let mut ids = BTreeSet::new();
    for n in &g.nodes {
        let at = QualifiedName::raw([n.id.as_str()]);
        report.check_identifier(&at, "requirement id", &n.id);
        if !ids.insert(n.id.as_str()) {
            report.push(at.clone(), format!("duplicate requirement `{}`", n.id));
        }
        if let Some(s) = &n.source_system {
            report.check_identifier(&at, "source system", s);
            if n.kind != RequirementKind::Existing {
                report.push(at.clone(), "only existing requirements carry a source system");
            }
        }
        for a in &n.linked_aspects {
            report.check_identifier(&at, "aspect", a);
        }
        match (&n.decomposition, n.is_leaf()) {
            (None, false) => report.push(at.clone(), "cooperative requirement has no connector"),
            (Some(_), true) => report.push(at.clone(), format!("{} requirement cannot be decomposed", n.kind)),
            _ => {}
        }
    }
    for n in &g.nodes {
        let Some(d) = &n.decomposition else { continue };
        let at = QualifiedName::raw([n.id.as_str()]);
        if d.children.is_empty() {
            report.push(at.clone(), "connector has no children");
        }
        for c in &d.children {
            if !ids.contains(c.as_str()) {
                report.push(at.clone(), format!("unknown child `{c}`"));
            }
        }
    }
    if let Some(id) = find_cycle(g) {
        report.push(QualifiedName::raw([id.as_str()]), "decomposition cycle");
    }
    report.finish()
}

/// Returns a node lying on a cycle, if any.
fn find_cycle(g: &DecompositionGraph) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(g: &'a DecompositionGraph, id: &'a str, marks: &mut BTreeMap<&'a str, Mark>) -> Option<String> {
        match marks.get(id) {
            Some(Mark::Active) => return Some(id.to_string()),
            Some(Mark::Done) => return None,
            None => {}
        }
        marks.insert(id, Mark::Active);
        if let Some(d) = g.node(id).and_then(|n| n.decomposition.as_ref()) {
            for c in &d.children {
                if let Some(hit) = visit(g, c, marks) {
                    return Some(hit);
                }
            }
        }
        marks.insert(id, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    g.nodes.iter().find_map(|n| visit(g, &n.id, &mut marks))
}
