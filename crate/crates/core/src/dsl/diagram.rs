//! Graphviz DOT export: one record node per class, one edge per association.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::core_model::{AttributeDecl, CoreModel, MethodDecl, QualifiedName};
use crate::weaver::{Origin, WovenModel};

const WOVEN_STYLE: &str = "style=bold, color=\"blue\"";

fn escape_record(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn escape_id(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn attribute_label(a: &AttributeDecl) -> String {
    match a.multiplicity {
        Some(m) => format!("{} : {} [{m}]", a.name, a.type_name),
        None => format!("{} : {}", a.name, a.type_name),
    }
}

fn method_label(m: &MethodDecl) -> String {
    let params: Vec<String> = m
        .parameters
        .iter()
        .map(|p| format!("{} : {}", p.name, p.type_name))
        .collect();
    match &m.return_type {
        Some(r) => format!("{}({}) : {r}", m.name, params.join(", ")),
        None => format!("{}({})", m.name, params.join(", ")),
    }
}

/// DOT text for a plain core model.
pub fn export_diagram(model: &CoreModel) -> String {
    render(model, &BTreeSet::new())
}

/// DOT text for a woven model. Woven classes, features and associations are
/// drawn bold blue and woven features are tagged `[woven]`.
pub fn export_woven_diagram(woven: &WovenModel) -> String {
    let marked: BTreeSet<QualifiedName> = woven
        .provenance
        .iter()
        .filter(|p| p.origin != Origin::Core)
        .map(|p| p.element.clone())
        .collect();
    render(&woven.base, &marked)
}

fn render(model: &CoreModel, woven: &BTreeSet<QualifiedName>) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape_id(&model.name)).unwrap();
    writeln!(out, "  node [shape=record];").unwrap();
    for c in &model.classes {
        let class_qn = QualifiedName::class(&c.name);
        let tag = |name: &str, label: String| {
            let mut label = escape_record(&label);
            if woven.contains(&class_qn.child(name)) {
                label.push_str(" [woven]");
            }
            label.push_str("\\l");
            label
        };
        let attrs: String = c.attributes.iter().map(|a| tag(&a.name, attribute_label(a))).collect();
        let ops: String = c.methods.iter().map(|m| tag(&m.name, method_label(m))).collect();
        let touched = woven.iter().any(|q| q.starts_with(&class_qn));
        let style = if touched {
            format!(", {WOVEN_STYLE}")
        } else {
            String::new()
        };
        writeln!(
            out,
            "  \"{}\" [label=\"{{{}|{attrs}|{ops}}}\"{style}];",
            escape_id(&c.name),
            escape_record(&c.name)
        )
        .unwrap();
    }
    for a in &model.associations {
        let dir = match (a.end_a.navigable, a.end_b.navigable) {
            (true, true) => "both",
            (false, true) => "forward",
            (true, false) => "back",
            (false, false) => "none",
        };
        let mut attrs = format!(
            "label=\"{}\", dir={dir}, taillabel=\"{} {}\", headlabel=\"{} {}\"",
            escape_id(&a.name),
            escape_id(&a.end_a.role),
            a.end_a.multiplicity,
            escape_id(&a.end_b.role),
            a.end_b.multiplicity
        );
        if woven.contains(&QualifiedName::association(&a.name)) {
            write!(attrs, ", {WOVEN_STYLE}").unwrap();
        }
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [{attrs}];",
            escape_id(&a.end_a.class_name),
            escape_id(&a.end_b.class_name)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
