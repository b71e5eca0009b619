use std::fmt::Write;

use crate::aspect_model::{AdvicePayload, AspectModel, NewElement};
use crate::core_model::{AssociationDecl, AttributeDecl, ClassDecl, CoreModel, MethodDecl, Multiplicity};
use crate::requirements::DecompositionGraph;
use crate::weaver::{Origin, WovenModel};
use crate::weaving_model::WeavingModel;

/// Two-space indented writer. Every `line` call ends with `\n`.
struct Out {
    buf: String,
    depth: usize,
}

impl Out {
    fn new() -> Self {
        Out {
            buf: String::new(),
            depth: 0,
        }
    }

    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.buf.push_str("  ");
        }
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    fn open(&mut self, s: &str) {
        self.line(&format!("{s} {{"));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("}");
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn attribute(a: &AttributeDecl) -> String {
    match a.multiplicity {
        Some(m) => format!("attr {} : {} {m};", a.name, a.type_name),
        None => format!("attr {} : {};", a.name, a.type_name),
    }
}

fn method(m: &MethodDecl) -> String {
    let params: Vec<String> = m
        .parameters
        .iter()
        .map(|p| format!("{} : {}", p.name, p.type_name))
        .collect();
    let mut s = format!("op {}({})", m.name, params.join(", "));
    if let Some(r) = &m.return_type {
        write!(s, " : {r}").unwrap();
    }
    s.push(';');
    s
}

fn class(out: &mut Out, prefix: &str, c: &ClassDecl) {
    let mut head = format!("{prefix}class {}", c.name);
    if let Some(a) = &c.association_class_of {
        write!(head, " associationClassOf {a}").unwrap();
    }
    if c.attributes.is_empty() && c.methods.is_empty() {
        out.line(&format!("{head} {{}}"));
        return;
    }
    out.open(&head);
    for a in &c.attributes {
        out.line(&attribute(a));
    }
    for m in &c.methods {
        out.line(&method(m));
    }
    out.close();
}

fn association(out: &mut Out, prefix: &str, a: &AssociationDecl) {
    out.open(&format!("{prefix}association {}", a.name));
    for e in a.ends() {
        let mut s = format!("end {} : {}", e.role, e.class_name);
        if e.navigable {
            s.push_str(" navigable");
        }
        if e.multiplicity != Multiplicity::ONE {
            write!(s, " {}", e.multiplicity).unwrap();
        }
        s.push(';');
        out.line(&s);
    }
    out.close();
}

fn core_into(out: &mut Out, m: &CoreModel) {
    out.open(&format!("model {}", m.name));
    for c in &m.classes {
        class(out, "", c);
    }
    for a in &m.associations {
        association(out, "", a);
    }
    out.close();
}

/// Canonical text of a core model. Declaration order is kept; only layout
/// is normalized.
pub fn print_core(m: &CoreModel) -> String {
    let mut out = Out::new();
    core_into(&mut out, m);
    out.buf
}

pub fn print_aspect(m: &AspectModel) -> String {
    let mut out = Out::new();
    out.open(&format!("aspectmodel {}", m.name));
    for a in &m.aspects {
        out.open(&format!("aspect {} priority {}", a.name, a.priority));
        for p in &a.pointcuts {
            let kind = match p.kind {
                crate::aspect_model::PointcutKind::Call => "call",
                crate::aspect_model::PointcutKind::Structural => "structural",
            };
            out.line(&format!("pointcut {} : {kind} on {};", p.name, p.pattern));
        }
        for adv in &a.advices {
            out.open(&format!(
                "advice {} : {} {} bind {}",
                adv.name,
                adv.advice_type,
                adv.kind(),
                adv.bound_pointcut
            ));
            match &adv.payload {
                AdvicePayload::Add { element } => match element {
                    NewElement::Attribute(x) => out.line(&format!("add {}", attribute(x))),
                    NewElement::Method(x) => out.line(&format!("add {}", method(x))),
                    NewElement::Class(x) => class(&mut out, "add ", x),
                    NewElement::Association(x) => association(&mut out, "add ", x),
                },
                AdvicePayload::Update(u) => {
                    if let Some(n) = &u.new_name {
                        out.line(&format!("rename {n};"));
                    }
                    if let Some(t) = &u.new_type {
                        out.line(&format!("retype {t};"));
                    }
                }
                AdvicePayload::Delete => {}
            }
            out.line(&format!("body {};", quote(&adv.body)));
            out.close();
        }
        out.close();
    }
    out.close();
    out.buf
}

pub fn print_weaving(w: &WeavingModel) -> String {
    let mut out = Out::new();
    out.open(&format!("weaving {} : {}", w.name, w.kind));
    for (side, r) in [("left", &w.left), ("right", &w.right)] {
        let mut s = format!("{side} {} at {}", r.logical_name, quote(&r.source_path));
        if let Some(d) = &r.content_digest {
            write!(s, " digest {}", quote(d)).unwrap();
        }
        s.push(';');
        out.line(&s);
    }
    for l in &w.links {
        out.line(&format!(
            "link {} : {} {} <-> {};",
            l.name, l.kind, l.left.target, l.right.target
        ));
    }
    out.close();
    out.buf
}

pub fn print_requirements(g: &DecompositionGraph) -> String {
    let mut out = Out::new();
    out.open(&format!("requirements {}", g.name));
    for n in &g.nodes {
        let mut s = format!("{} {} {}", n.kind, n.id, quote(&n.text));
        if let Some(d) = &n.decomposition {
            write!(s, " = {}({})", d.op, d.children.join(", ")).unwrap();
        }
        if let Some(sys) = &n.source_system {
            write!(s, " from {sys}").unwrap();
        }
        if !n.linked_aspects.is_empty() {
            write!(s, " aspects({})", n.linked_aspects.join(", ")).unwrap();
        }
        s.push(';');
        out.line(&s);
    }
    out.close();
    out.buf
}

/// The woven base model followed by a trailing comment block holding the
/// ordering constraints and provenance, so the output still parses as a
/// plain core model.
pub fn print_woven(w: &WovenModel) -> String {
    let mut out = print_core(&w.base);
    if w.ordering_constraints.is_empty() && w.provenance.is_empty() {
        return out;
    }
    out.push_str("// woven\n");
    for c in &w.ordering_constraints {
        writeln!(
            out,
            "// @order {} {} {} {}",
            c.position, c.advice_method, c.target_method, c.source_aspect
        )
        .unwrap();
    }
    for p in &w.provenance {
        let origin = match &p.origin {
            Origin::Core => "core".to_string(),
            Origin::Additional => "additional".to_string(),
            Origin::Aspect(a) => format!("aspect {a}"),
        };
        writeln!(out, "// @origin {} {origin}", p.element).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_aspect, parse_core, parse_requirements, parse_weaving};

    #[test]
    fn m1_canonical_text() {
        let text = print_core(&crate::core_model::tests::m1());
        let expected = "\
model M1 {
  class University {
    attr IdUniversity : Integer;
    attr Name : String;
  }
  class Student {
    attr IdStudent : Integer;
    attr Name : String;
    op NewSubscription(IdSpeciality : Integer) : Boolean;
  }
  class Speciality {
    attr IdSpeciality : Integer;
    attr Label : String;
    op NbreOfHours(IdSpeciality : Integer) : Integer;
  }
  association Enrolls {
    end students : Student 0..*;
    end university : University navigable;
  }
  association Follows {
    end followers : Student 0..*;
    end specialities : Speciality navigable 1..2;
  }
}
";
        assert_eq!(text, expected);
        assert_eq!(
            parse_core(&text, "m1.core").into_result().unwrap(),
            crate::core_model::tests::m1()
        );
        assert_eq!(print_core(&crate::core_model::tests::m1()), text);
    }

    #[test]
    fn fixtures_round_trip() {
        let m2 = crate::aspect_model::tests::m2();
        assert_eq!(parse_aspect(&print_aspect(&m2), "x.aspect").into_result().unwrap(), m2);
        let w = crate::weaving_model::tests::m1_m2();
        assert_eq!(parse_weaving(&print_weaving(&w), "x.weave").into_result().unwrap(), w);
    }

    #[test]
    fn strings_escape() {
        let mut m2 = crate::aspect_model::tests::m2();
        m2.aspects[0].advices[0].body = "a \"quoted\" \\ back\nslash\t// not a comment".into();
        let text = print_aspect(&m2);
        assert_eq!(parse_aspect(&text, "x.aspect").into_result().unwrap(), m2);
    }

    #[test]
    fn requirements_round_trip() {
        let text = "requirements G {\n  cr CR1 \"t\" = and(er1, ar1) aspects(A, B);\n  er er1 \"e\" from Sys;\n  ar ar1 \"\";\n}\n";
        let g = parse_requirements(text, "g.reqs").into_result().unwrap();
        assert_eq!(print_requirements(&g), text);
    }

    #[test]
    fn empty_class_and_model() {
        let m = CoreModel::new("E").with_class(ClassDecl::new("A"));
        assert_eq!(print_core(&m), "model E {\n  class A {}\n}\n");
        assert_eq!(parse_core(&print_core(&m), "e.core").into_result().unwrap(), m);
    }
}
