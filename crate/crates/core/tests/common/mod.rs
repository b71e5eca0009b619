//! Seeded random model generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use modelweave::aspect_model::{AdvicePayload, PointcutKind, UpdateSpec};
use modelweave::core_model::{ElementKind, Multiplicity};
use modelweave::requirements::{Connective, Decomposition};
use modelweave::{
    Advice, AdviceType, AspectModel, AspectRequirement, AssociationDecl, AssociationEnd, AttributeDecl, ClassDecl,
    CoreModel, DecompositionGraph, ElementRef, LinkKind, MethodDecl, ModelRef, NewElement, Pointcut, Priority,
    QualifiedName, RequirementKind, RequirementNode, WeaveLink, WeavingKind, WeavingModel,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Words the DSLs treat as keywords in some position. Names drawn from here
/// check that the grammar stays contextual.
pub const KEYWORDS: &[&str] = &[
    "model",
    "class",
    "attr",
    "op",
    "association",
    "end",
    "navigable",
    "associationClassOf",
    "aspectmodel",
    "aspect",
    "priority",
    "pointcut",
    "call",
    "structural",
    "on",
    "advice",
    "before",
    "after",
    "addelt",
    "update",
    "deleteelt",
    "bind",
    "add",
    "rename",
    "retype",
    "body",
    "weaving",
    "left",
    "right",
    "at",
    "digest",
    "link",
    "coreaspect",
    "coreadditional",
    "requirements",
    "cr",
    "er",
    "ar",
    "and",
    "or",
    "from",
    "aspects",
];

const TYPES: &[&str] = &["Integer", "String", "Boolean", "Real", "Date"];

pub fn ident<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.1) {
        return KEYWORDS.choose(rng).unwrap().to_string();
    }
    const FIRST: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
    const REST: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_";
    let mut s = String::new();
    s.push(*FIRST.choose(rng).unwrap() as char);
    for _ in 0..rng.gen_range(0..8) {
        s.push(*REST.choose(rng).unwrap() as char);
    }
    s
}

/// Hands out identifiers never returned before.
#[derive(Default)]
pub struct Fresh(BTreeSet<String>);

impl Fresh {
    pub fn take<R: Rng>(&mut self, rng: &mut R) -> String {
        loop {
            let s = ident(rng);
            if s != "assoc" && self.0.insert(s.clone()) {
                return s;
            }
        }
    }

    pub fn reserve(&mut self, s: &str) {
        self.0.insert(s.to_string());
    }
}

pub fn text<R: Rng>(rng: &mut R) -> String {
    const CHARS: &[char] = &['a', 'b', ' ', '"', '\\', '\n', '\t', '/', '*', '{', '}', ';', 'é', '∧'];
    (0..rng.gen_range(0..12)).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

pub fn multiplicity<R: Rng>(rng: &mut R) -> Multiplicity {
    let lower = rng.gen_range(0..3);
    let upper = if rng.gen_bool(0.4) {
        None
    } else {
        Some(lower + rng.gen_range(0..3))
    };
    Multiplicity::new(lower, upper)
}

fn type_name<R: Rng>(rng: &mut R, classes: &[String]) -> String {
    if !classes.is_empty() && rng.gen_bool(0.2) {
        classes.choose(rng).unwrap().clone()
    } else if rng.gen_bool(0.1) {
        ident(rng)
    } else {
        TYPES.choose(rng).unwrap().to_string()
    }
}

pub fn attribute<R: Rng>(rng: &mut R, name: String, classes: &[String]) -> AttributeDecl {
    let mut a = AttributeDecl::new(name, type_name(rng, classes));
    if rng.gen_bool(0.3) {
        a.multiplicity = Some(multiplicity(rng));
    }
    a
}

pub fn method<R: Rng>(rng: &mut R, name: String, classes: &[String]) -> MethodDecl {
    let mut m = MethodDecl::new(name);
    let mut fresh = Fresh::default();
    for _ in 0..rng.gen_range(0..3) {
        let p = fresh.take(rng);
        let t = type_name(rng, classes);
        m = m.with_param(&p, &t);
    }
    if rng.gen_bool(0.7) {
        m = m.returning(&type_name(rng, classes));
    }
    m
}

pub fn class_body<R: Rng>(rng: &mut R, name: String, classes: &[String]) -> ClassDecl {
    let mut c = ClassDecl::new(name);
    let mut fresh = Fresh::default();
    for _ in 0..rng.gen_range(0..4) {
        let n = fresh.take(rng);
        c.attributes.push(attribute(rng, n, classes));
    }
    for _ in 0..rng.gen_range(0..3) {
        let n = fresh.take(rng);
        c.methods.push(method(rng, n, classes));
    }
    c
}

pub fn association<R: Rng>(rng: &mut R, name: String, classes: &[String]) -> AssociationDecl {
    let mut roles = Fresh::default();
    let mut end = |rng: &mut R| {
        let mut e = AssociationEnd::new(roles.take(rng), classes.choose(rng).unwrap().clone());
        e.navigable = rng.gen_bool(0.5);
        if rng.gen_bool(0.6) {
            e.multiplicity = multiplicity(rng);
        }
        e
    };
    let a = end(rng);
    let b = end(rng);
    AssociationDecl::new(name, a, b)
}

/// A valid core model.
pub fn core_model<R: Rng>(rng: &mut R) -> CoreModel {
    let mut m = CoreModel::new(ident(rng));
    let mut names = Fresh::default();
    let class_names: Vec<String> = (0..rng.gen_range(0..6)).map(|_| names.take(rng)).collect();
    for n in &class_names {
        m.classes.push(class_body(rng, n.clone(), &class_names));
    }
    if !class_names.is_empty() {
        let mut assoc_names = Fresh::default();
        for _ in 0..rng.gen_range(0..4) {
            let n = assoc_names.take(rng);
            m.associations.push(association(rng, n, &class_names));
        }
    }
    if !m.associations.is_empty() {
        for i in 0..m.classes.len() {
            if rng.gen_bool(0.15) {
                let a = m.associations.choose(rng).unwrap().name.clone();
                m.classes[i].association_class_of = Some(a);
            }
        }
    }
    m
}

fn element_names(core: &CoreModel, kinds: &[ElementKind]) -> Vec<QualifiedName> {
    core.elements()
        .into_iter()
        .filter(|e| kinds.contains(&e.kind()))
        .map(|e| e.canonical_name())
        .collect()
}

fn pattern_for<R: Rng>(rng: &mut R, core: &CoreModel, kind: PointcutKind, wild_classes: bool) -> String {
    let kinds: &[ElementKind] = match kind {
        PointcutKind::Call => &[ElementKind::Method],
        PointcutKind::Structural => &[ElementKind::Class, ElementKind::Attribute, ElementKind::Association],
    };
    let names = element_names(core, kinds);
    let Some(q) = names.choose(rng) else {
        return ident(rng);
    };
    let assoc = q.segments()[0] == "assoc";
    q.segments()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let may_wild = i > 0 || (wild_classes && !assoc);
            if may_wild && rng.gen_bool(0.3) {
                "*".to_string()
            } else {
                s.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(".")
}

pub const PRIORITIES: &[&str] = &["0", "0.25", "1/3", "0.5", "2/3", "0.8", "1"];

/// Settings for [`aspect_model`].
#[derive(Clone)]
pub struct AspectShape {
    pub aspects: std::ops::Range<usize>,
    pub wild_classes: bool,
    pub delete_bias: f64,
    pub allow_model_adds: bool,
}

impl Default for AspectShape {
    fn default() -> Self {
        AspectShape {
            aspects: 1..4,
            wild_classes: true,
            delete_bias: 0.2,
            allow_model_adds: true,
        }
    }
}

/// A valid aspect model whose pointcuts are drawn from `core`.
pub fn aspect_model<R: Rng>(rng: &mut R, core: &CoreModel, shape: AspectShape) -> AspectModel {
    let mut m = AspectModel::new(ident(rng));
    let mut aspect_names = Fresh::default();
    let classes: Vec<String> = core.classes.iter().map(|c| c.name.clone()).collect();
    let mut new_names = Fresh::default();
    for c in &classes {
        new_names.reserve(c);
    }
    for _ in 0..rng.gen_range(shape.aspects.clone()) {
        let mut a = AspectRequirement::new(aspect_names.take(rng));
        a.priority = PRIORITIES.choose(rng).unwrap().parse::<Priority>().unwrap();
        let mut pc_names = Fresh::default();
        for _ in 0..rng.gen_range(1..3) {
            let kind = if rng.gen_bool(0.5) {
                PointcutKind::Call
            } else {
                PointcutKind::Structural
            };
            let pattern = pattern_for(rng, core, kind, shape.wild_classes);
            a.pointcuts.push(Pointcut::new(pc_names.take(rng), kind, &pattern));
        }
        let mut adv_names = Fresh::default();
        for _ in 0..rng.gen_range(0..4) {
            let pc = a.pointcuts.choose(rng).unwrap().clone();
            let roll: f64 = rng.gen();
            let payload = if roll < shape.delete_bias {
                AdvicePayload::Delete
            } else if roll < shape.delete_bias + 0.2 {
                let mut u = UpdateSpec::default();
                if rng.gen_bool(0.6) {
                    u.new_name = Some(new_names.take(rng));
                }
                if u.new_name.is_none() || rng.gen_bool(0.3) {
                    u.new_type = Some(type_name(rng, &classes));
                }
                AdvicePayload::Update(u)
            } else {
                let name = new_names.take(rng);
                let element = match rng.gen_range(0..if shape.allow_model_adds { 4 } else { 2 }) {
                    0 => NewElement::Attribute(attribute(rng, name, &classes)),
                    1 => NewElement::Method(method(rng, name, &classes)),
                    2 => NewElement::Class(class_body(rng, name, &classes)),
                    _ if !classes.is_empty() => NewElement::Association(association(rng, name, &classes)),
                    _ => NewElement::Method(method(rng, name, &classes)),
                };
                AdvicePayload::Add { element }
            };
            a.advices.push(Advice {
                name: adv_names.take(rng),
                advice_type: if rng.gen_bool(0.5) {
                    AdviceType::Before
                } else {
                    AdviceType::After
                },
                bound_pointcut: pc.name.clone(),
                payload,
                body: text(rng),
            });
        }
        m.aspects.push(a);
    }
    m
}

/// A core+aspect weaving over `core` and `aspects` whose links all validate.
pub fn aspect_weaving<R: Rng>(rng: &mut R, core: &CoreModel, aspects: &AspectModel, links: usize) -> WeavingModel {
    let mut w = WeavingModel::new(
        ident(rng),
        WeavingKind::CoreAspect,
        ModelRef::new(core.name.clone(), "core.core"),
        ModelRef::new(aspects.name.clone(), "aspects.aspect"),
    );
    let lefts: Vec<QualifiedName> = core.elements().iter().map(|e| e.canonical_name()).collect();
    let mut names = Fresh::default();
    for _ in 0..links {
        let Some(a) = aspects.aspects.choose(rng) else { break };
        let left = match lefts.choose(rng) {
            Some(q) if rng.gen_bool(0.3) => q.clone(),
            _ => QualifiedName::class(&core.name),
        };
        let pointcut = if rng.gen_bool(0.5) {
            a.pointcuts.choose(rng).map(|p| p.name.as_str())
        } else {
            None
        };
        w.links.push(WeaveLink {
            name: names.take(rng),
            kind: LinkKind::AspectToTarget,
            left: ElementRef::element(&core.name, left),
            right: ElementRef::aspect(&aspects.name, &a.name, pointcut),
        });
    }
    w
}

/// Any syntactically valid weaving model, not tied to real models.
pub fn any_weaving<R: Rng>(rng: &mut R) -> WeavingModel {
    let kind = if rng.gen_bool(0.5) {
        WeavingKind::CoreAspect
    } else {
        WeavingKind::CoreAdditional
    };
    let r = |rng: &mut R| {
        let mut m = ModelRef::new(ident(rng), text(rng));
        if rng.gen_bool(0.3) {
            m.content_digest = Some(hex_string(rng));
        }
        m
    };
    let left = r(rng);
    let right = r(rng);
    let mut w = WeavingModel::new(ident(rng), kind, left, right);
    let mut names = Fresh::default();
    for _ in 0..rng.gen_range(0..5) {
        let qn =
            |rng: &mut R| QualifiedName::new((0..rng.gen_range(1..4)).map(|_| ident(rng)).collect::<Vec<_>>()).unwrap();
        let (link_kind, right) = match kind {
            WeavingKind::CoreAspect => {
                let p = if rng.gen_bool(0.5) { Some(ident(rng)) } else { None };
                (
                    LinkKind::AspectToTarget,
                    ElementRef::aspect(&w.right.logical_name, &ident(rng), p.as_deref()),
                )
            }
            WeavingKind::CoreAdditional => (
                *LinkKind::ALL[..4].choose(rng).unwrap(),
                ElementRef::element(&w.right.logical_name, qn(rng)),
            ),
        };
        let left = ElementRef::element(&w.left.logical_name, qn(rng));
        w.links.push(WeaveLink {
            name: names.take(rng),
            kind: link_kind,
            left,
            right,
        });
    }
    w
}

fn hex_string<R: Rng>(rng: &mut R) -> String {
    (0..64)
        .map(|_| *b"0123456789abcdef".choose(rng).unwrap() as char)
        .collect()
}

/// A valid decomposition graph with at most `max_leaves` leaves.
pub fn graph<R: Rng>(rng: &mut R, max_leaves: usize) -> DecompositionGraph {
    let mut g = DecompositionGraph::new(ident(rng));
    let mut ids = Fresh::default();
    let mut pool: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(1..=max_leaves) {
        let id = ids.take(rng);
        let mut n = if rng.gen_bool(0.5) {
            RequirementNode::er(&id)
        } else {
            RequirementNode::ar(&id)
        };
        n.text = text(rng);
        if n.kind == RequirementKind::Existing && rng.gen_bool(0.4) {
            n.source_system = Some(ident(rng));
        }
        if rng.gen_bool(0.2) {
            n.linked_aspects = (0..rng.gen_range(1..3)).map(|_| ident(rng)).collect();
        }
        pool.push(id);
        g.nodes.push(n);
    }
    for _ in 0..rng.gen_range(1..6) {
        let id = ids.take(rng);
        let k = rng.gen_range(1..=pool.len().min(4));
        let children: Vec<String> = pool.choose_multiple(rng, k).cloned().collect();
        let op = if rng.gen_bool(0.5) {
            Connective::And
        } else {
            Connective::Or
        };
        let mut n = RequirementNode::cr(&id, op, &[]);
        n.decomposition = Some(Decomposition { op, children });
        n.text = text(rng);
        if rng.gen_bool(0.2) {
            n.linked_aspects = vec![ident(rng)];
        }
        pool.push(id);
        g.nodes.push(n);
    }
    g.nodes.shuffle(rng);
    g
}
