use crate::aspect_model::{
    Advice, AdviceKind, AdvicePayload, AdviceType, AspectModel, AspectRequirement, NamePattern, NewElement,
    PatternSegment, Pointcut, PointcutKind, Priority, UpdateSpec,
};
use crate::core_model::{
    AssociationDecl, AssociationEnd, AttributeDecl, ClassDecl, CoreModel, MethodDecl, Multiplicity, Parameter,
    QualifiedName,
};
use crate::report::is_identifier;
use crate::requirements::{Connective, Decomposition, DecompositionGraph, RequirementKind, RequirementNode};
use crate::weaver::{OrderingConstraint, Origin, ProvenanceEntry, WovenModel};
use crate::weaving_model::{ElementRef, LinkKind, ModelRef, WeaveLink, WeavingKind, WeavingModel};

use super::lexer::{brace_imbalance, tokenize, Tok, Token};
use super::{file_stem, normalize_newlines, ParseDiagnostic, Parsed, SourceSpan};

type PResult<T> = Result<T, ParseDiagnostic>;

pub fn parse_core(text: &str, file: &str) -> Parsed<CoreModel> {
    run(text, file, |p| {
        if p.at_end() {
            return Ok(CoreModel::new(p.empty_file_name()?));
        }
        p.core_model()
    })
}

pub fn parse_aspect(text: &str, file: &str) -> Parsed<AspectModel> {
    run(text, file, |p| {
        if p.at_end() {
            return Ok(AspectModel::new(p.empty_file_name()?));
        }
        p.aspect_model()
    })
}

pub fn parse_weaving(text: &str, file: &str) -> Parsed<WeavingModel> {
    run(text, file, |p| p.weaving_model())
}

pub fn parse_requirements(text: &str, file: &str) -> Parsed<DecompositionGraph> {
    run(text, file, |p| {
        if p.at_end() {
            return Ok(DecompositionGraph::new(p.empty_file_name()?));
        }
        p.requirements()
    })
}

/// Parses woven output: a core model followed by `// @order` and
/// `// @origin` annotation comments.
pub fn parse_woven(text: &str, file: &str) -> Parsed<WovenModel> {
    let text = normalize_newlines(text);
    let parsed = parse_core(&text, file);
    let Some(base) = parsed.value else {
        return Parsed::failed(parsed.diagnostics);
    };
    let mut woven = WovenModel::from_core(base);
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix("// @") else {
            continue;
        };
        let span = SourceSpan::new(file, i as u32 + 1, 1, i as u32 + 1, line.chars().count().max(1) as u32);
        let words: Vec<&str> = rest.split_whitespace().collect();
        let qn = |s: &str| s.parse::<QualifiedName>().ok();
        let entry = match words.as_slice() {
            ["order", pos, advice, target, aspect] if is_identifier(aspect) => {
                let position = match *pos {
                    "before" => Some(AdviceType::Before),
                    "after" => Some(AdviceType::After),
                    _ => None,
                };
                match (position, qn(advice), qn(target)) {
                    (Some(position), Some(advice_method), Some(target_method)) => {
                        woven.ordering_constraints.push(OrderingConstraint {
                            advice_method,
                            target_method,
                            position,
                            source_aspect: aspect.to_string(),
                        });
                        true
                    }
                    _ => false,
                }
            }
            ["origin", element, rest @ ..] => {
                let origin = match rest {
                    ["core"] => Some(Origin::Core),
                    ["additional"] => Some(Origin::Additional),
                    ["aspect", name] if is_identifier(name) => Some(Origin::Aspect(name.to_string())),
                    _ => None,
                };
                match (qn(element), origin) {
                    (Some(element), Some(origin)) => {
                        woven.provenance.push(ProvenanceEntry { element, origin });
                        true
                    }
                    _ => false,
                }
            }
            _ => false,
        };
        if !entry {
            return Parsed::failed(vec![ParseDiagnostic::error(span, "malformed woven annotation")]);
        }
    }
    Parsed::ok(woven, parsed.diagnostics)
}

fn run<T>(text: &str, file: &str, body: impl FnOnce(&mut Parser) -> PResult<T>) -> Parsed<T> {
    let text = normalize_newlines(text);
    let tokens = match tokenize(&text, file) {
        Ok(t) => t,
        Err(d) => return Parsed::failed(vec![d]),
    };
    if let Some(d) = brace_imbalance(&tokens) {
        return Parsed::failed(vec![d]);
    }
    let end = tokens
        .last()
        .map(|t| SourceSpan::point(file, t.span.end_line, t.span.end_col + 1))
        .unwrap_or_else(|| SourceSpan::point(file, 1, 1));
    let mut p = Parser {
        tokens,
        pos: 0,
        file,
        end,
        warnings: Vec::new(),
    };
    match body(&mut p).and_then(|v| p.finish().map(|_| v)) {
        Ok(v) => Parsed::ok(v, p.warnings),
        Err(e) => {
            let mut diags = p.warnings;
            diags.push(e);
            Parsed::failed(diags)
        }
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    end: SourceSpan,
    warnings: Vec<ParseDiagnostic>,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.end.clone())
    }

    fn found(&self) -> String {
        self.peek()
            .map(Tok::describe)
            .unwrap_or_else(|| "end of input".to_string())
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseDiagnostic::error(
            self.span(),
            format!("expected {expected}, found {}", self.found()),
        ))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.err(&tok.describe())
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    /// Consumes one of `choices`, returning its index.
    fn one_of(&mut self, choices: &[&str]) -> PResult<usize> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if let Some(i) = choices.iter().position(|c| c == s) {
                self.pos += 1;
                return Ok(i);
            }
        }
        let list: Vec<String> = choices.iter().map(|c| format!("`{c}`")).collect();
        self.err(&list.join(" or "))
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(what),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("string literal"),
        }
    }

    fn integer(&mut self) -> PResult<u32> {
        match self.peek() {
            Some(Tok::Number(n)) if !n.contains('.') => {
                let v = n
                    .parse()
                    .map_err(|_| ParseDiagnostic::error(self.span(), format!("integer `{n}` is too large")))?;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("integer"),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn empty_file_name(&self) -> PResult<String> {
        let stem = file_stem(self.file);
        if is_identifier(&stem) {
            Ok(stem)
        } else {
            Err(ParseDiagnostic::error(
                self.span(),
                format!("empty file: stem `{stem}` is not a valid model name"),
            ))
        }
    }

    fn qualified_name(&mut self) -> PResult<QualifiedName> {
        let mut segments = vec![self.ident("qualified name")?];
        while self.eat(&Tok::Dot) {
            segments.push(self.ident("name segment")?);
        }
        Ok(QualifiedName::new(segments).expect("lexer yields identifiers"))
    }

    fn pattern(&mut self) -> PResult<NamePattern> {
        let mut segments = Vec::new();
        loop {
            if self.eat(&Tok::Star) {
                segments.push(PatternSegment::Wildcard);
            } else {
                segments.push(PatternSegment::Literal(self.ident("name or `*`")?));
            }
            if !self.eat(&Tok::Dot) {
                return Ok(NamePattern { segments });
            }
        }
    }

    fn multiplicity(&mut self) -> PResult<Option<Multiplicity>> {
        if !matches!(self.peek(), Some(Tok::Number(_))) {
            return Ok(None);
        }
        let lower = self.integer()?;
        self.expect(Tok::DotDot)?;
        let upper = if self.eat(&Tok::Star) {
            None
        } else {
            Some(self.integer()?)
        };
        Ok(Some(Multiplicity { lower, upper }))
    }

    fn core_model(&mut self) -> PResult<CoreModel> {
        self.keyword("model")?;
        let mut model = CoreModel::new(self.ident("model name")?);
        self.expect(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(model);
            }
            match self.one_of(&["class", "association"])? {
                0 => model.classes.push(self.class_rest()?),
                _ => model.associations.push(self.association_rest()?),
            }
        }
    }

    /// After `class`.
    fn class_rest(&mut self) -> PResult<ClassDecl> {
        let mut class = ClassDecl::new(self.ident("class name")?);
        if self.eat_kw("associationClassOf") {
            class.association_class_of = Some(self.ident("association name")?);
        }
        self.expect(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(class);
            }
            match self.one_of(&["attr", "op"])? {
                0 => class.attributes.push(self.attribute_rest()?),
                _ => class.methods.push(self.method_rest()?),
            }
        }
    }

    /// After `attr`.
    fn attribute_rest(&mut self) -> PResult<AttributeDecl> {
        let name = self.ident("attribute name")?;
        self.expect(Tok::Colon)?;
        let type_name = self.ident("type name")?;
        let multiplicity = self.multiplicity()?;
        self.expect(Tok::Semi)?;
        Ok(AttributeDecl {
            name,
            type_name,
            multiplicity,
        })
    }

    /// After `op`.
    fn method_rest(&mut self) -> PResult<MethodDecl> {
        let mut method = MethodDecl::new(self.ident("operation name")?);
        self.expect(Tok::LParen)?;
        if !self.eat(&Tok::RParen) {
            loop {
                let name = self.ident("parameter name")?;
                self.expect(Tok::Colon)?;
                let type_name = self.ident("parameter type")?;
                method.parameters.push(Parameter { name, type_name });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        if self.eat(&Tok::Colon) {
            method.return_type = Some(self.ident("return type")?);
        }
        self.expect(Tok::Semi)?;
        Ok(method)
    }

    /// After `association`.
    fn association_rest(&mut self) -> PResult<AssociationDecl> {
        let name = self.ident("association name")?;
        self.expect(Tok::LBrace)?;
        let end_a = self.association_end()?;
        let end_b = self.association_end()?;
        if !self.eat(&Tok::RBrace) {
            return self.err("`}` (an association has exactly two ends)");
        }
        Ok(AssociationDecl { name, end_a, end_b })
    }

    fn association_end(&mut self) -> PResult<AssociationEnd> {
        self.keyword("end")?;
        let role = self.ident("role name")?;
        self.expect(Tok::Colon)?;
        let class_name = self.ident("class name")?;
        let navigable = self.eat_kw("navigable");
        let multiplicity = self.multiplicity()?.unwrap_or_default();
        self.expect(Tok::Semi)?;
        Ok(AssociationEnd {
            role,
            class_name,
            navigable,
            multiplicity,
        })
    }

    fn aspect_model(&mut self) -> PResult<AspectModel> {
        self.keyword("aspectmodel")?;
        let mut model = AspectModel::new(self.ident("model name")?);
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            self.keyword("aspect")?;
            model.aspects.push(self.aspect_rest()?);
        }
        Ok(model)
    }

    fn aspect_rest(&mut self) -> PResult<AspectRequirement> {
        let start = self.span();
        let mut aspect = AspectRequirement::new(self.ident("aspect name")?);
        if self.eat_kw("priority") {
            aspect.priority = self.priority()?;
        }
        self.expect(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            match self.one_of(&["pointcut", "advice"])? {
                0 => aspect.pointcuts.push(self.pointcut_rest()?),
                _ => aspect.advices.push(self.advice_rest()?),
            }
        }
        if aspect.advices.is_empty() {
            self.warnings.push(ParseDiagnostic::warning(
                start,
                format!("aspect `{}` has no advices and is inert", aspect.name),
            ));
        }
        Ok(aspect)
    }

    fn priority(&mut self) -> PResult<Priority> {
        let span = self.span();
        let mut text = match self.peek() {
            Some(Tok::Number(n)) => n.clone(),
            _ => return self.err("priority"),
        };
        self.pos += 1;
        if self.eat(&Tok::Slash) {
            match self.peek() {
                Some(Tok::Number(d)) => {
                    text = format!("{text}/{d}");
                    self.pos += 1;
                }
                _ => return self.err("denominator"),
            }
        }
        text.parse().map_err(|e| ParseDiagnostic::error(span, format!("{e}")))
    }

    fn pointcut_rest(&mut self) -> PResult<Pointcut> {
        let name = self.ident("pointcut name")?;
        self.expect(Tok::Colon)?;
        let kind = match self.one_of(&["call", "structural"])? {
            0 => PointcutKind::Call,
            _ => PointcutKind::Structural,
        };
        self.keyword("on")?;
        let pattern = self.pattern()?;
        self.expect(Tok::Semi)?;
        Ok(Pointcut { name, kind, pattern })
    }

    fn advice_rest(&mut self) -> PResult<Advice> {
        let name = self.ident("advice name")?;
        self.expect(Tok::Colon)?;
        let advice_type = match self.one_of(&["before", "after"])? {
            0 => AdviceType::Before,
            _ => AdviceType::After,
        };
        let kind_span = self.span();
        let kind = match self.one_of(&["addelt", "update", "deleteelt"])? {
            0 => AdviceKind::AddElt,
            1 => AdviceKind::Update,
            _ => AdviceKind::DeleteElt,
        };
        self.keyword("bind")?;
        let bound_pointcut = self.ident("pointcut name")?;
        self.expect(Tok::LBrace)?;

        let mut added: Option<NewElement> = None;
        let mut update = UpdateSpec::default();
        let mut body: Option<String> = None;
        loop {
            let span = self.span();
            if self.eat(&Tok::RBrace) {
                break;
            }
            let dup = |what: &str| {
                Err(ParseDiagnostic::error(
                    span.clone(),
                    format!("duplicate `{what}` in advice"),
                ))
            };
            match self.one_of(&["add", "rename", "retype", "body"])? {
                0 => {
                    if added.is_some() {
                        return dup("add");
                    }
                    let element = match self.one_of(&["attr", "op", "class", "association"])? {
                        0 => NewElement::Attribute(self.attribute_rest()?),
                        1 => NewElement::Method(self.method_rest()?),
                        2 => NewElement::Class(self.class_rest()?),
                        _ => NewElement::Association(self.association_rest()?),
                    };
                    added = Some(element);
                }
                1 => {
                    if update.new_name.is_some() {
                        return dup("rename");
                    }
                    update.new_name = Some(self.ident("new name")?);
                    self.expect(Tok::Semi)?;
                }
                2 => {
                    if update.new_type.is_some() {
                        return dup("retype");
                    }
                    update.new_type = Some(self.ident("new type")?);
                    self.expect(Tok::Semi)?;
                }
                _ => {
                    if body.is_some() {
                        return dup("body");
                    }
                    body = Some(self.string()?);
                    self.expect(Tok::Semi)?;
                }
            }
        }

        let has_update = update.new_name.is_some() || update.new_type.is_some();
        let payload = match (kind, added, has_update) {
            (AdviceKind::AddElt, Some(element), false) => AdvicePayload::Add { element },
            (AdviceKind::AddElt, None, _) => {
                return Err(ParseDiagnostic::error(
                    kind_span,
                    "addelt advice needs exactly one `add` element",
                ))
            }
            (AdviceKind::Update, None, true) => AdvicePayload::Update(update),
            (AdviceKind::Update, _, false) => {
                return Err(ParseDiagnostic::error(
                    kind_span,
                    "update advice needs `rename` or `retype`",
                ))
            }
            (AdviceKind::DeleteElt, None, false) => AdvicePayload::Delete,
            _ => {
                return Err(ParseDiagnostic::error(
                    kind_span,
                    format!("payload does not match advice kind `{kind}`"),
                ))
            }
        };
        Ok(Advice {
            name,
            advice_type,
            bound_pointcut,
            payload,
            body: body.unwrap_or_default(),
        })
    }

    fn weaving_model(&mut self) -> PResult<WeavingModel> {
        self.keyword("weaving")?;
        let name = self.ident("weaving name")?;
        self.expect(Tok::Colon)?;
        let kind = match self.one_of(&["coreaspect", "coreadditional"])? {
            0 => WeavingKind::CoreAspect,
            _ => WeavingKind::CoreAdditional,
        };
        let open = self.span();
        self.expect(Tok::LBrace)?;
        let mut left: Option<ModelRef> = None;
        let mut right: Option<ModelRef> = None;
        let mut links = Vec::new();
        loop {
            let span = self.span();
            if self.eat(&Tok::RBrace) {
                break;
            }
            match self.one_of(&["left", "right", "link"])? {
                i @ (0 | 1) => {
                    let slot = if i == 0 { &mut left } else { &mut right };
                    if slot.is_some() {
                        let side = if i == 0 { "left" } else { "right" };
                        return Err(ParseDiagnostic::error(span, format!("duplicate `{side}` model")));
                    }
                    let logical_name = self.ident("model name")?;
                    self.keyword("at")?;
                    let source_path = self.string()?;
                    let content_digest = if self.eat_kw("digest") {
                        Some(self.string()?)
                    } else {
                        None
                    };
                    self.expect(Tok::Semi)?;
                    let model_ref = ModelRef {
                        logical_name,
                        source_path,
                        content_digest,
                    };
                    if i == 0 {
                        left = Some(model_ref);
                    } else {
                        right = Some(model_ref);
                    }
                }
                _ => {
                    let (Some(l), Some(r)) = (&left, &right) else {
                        return Err(ParseDiagnostic::error(span, "`left` and `right` must precede links"));
                    };
                    let (left_name, right_name) = (l.logical_name.clone(), r.logical_name.clone());
                    links.push(self.link_rest(kind, &left_name, &right_name)?);
                }
            }
        }
        let (Some(left), Some(right)) = (left, right) else {
            return Err(ParseDiagnostic::error(
                open,
                "weaving needs both `left` and `right` models",
            ));
        };
        Ok(WeavingModel {
            name,
            kind,
            left,
            right,
            links,
        })
    }

    fn link_rest(&mut self, kind: WeavingKind, left: &str, right: &str) -> PResult<WeaveLink> {
        let name = self.ident("link name")?;
        self.expect(Tok::Colon)?;
        let names: Vec<&str> = LinkKind::ALL.iter().map(LinkKind::as_str).collect();
        let link_kind = LinkKind::ALL[self.one_of(&names)?];
        let left_end = ElementRef::element(left, self.qualified_name()?);
        if !self.eat(&Tok::Arrow) {
            return self.err("`<->` and a right end (links have exactly two ends)");
        }
        let right_span = self.span();
        let right_name = self.qualified_name()?;
        let right_end = match kind {
            WeavingKind::CoreAdditional => ElementRef::element(right, right_name),
            WeavingKind::CoreAspect => match right_name.segments() {
                [aspect] => ElementRef::aspect(right, aspect, None),
                [aspect, pointcut] => ElementRef::aspect(right, aspect, Some(pointcut)),
                _ => {
                    return Err(ParseDiagnostic::error(
                        right_span,
                        "aspect end must be `Aspect` or `Aspect.Pointcut`",
                    ))
                }
            },
        };
        self.expect(Tok::Semi)?;
        Ok(WeaveLink {
            name,
            kind: link_kind,
            left: left_end,
            right: right_end,
        })
    }

    fn requirements(&mut self) -> PResult<DecompositionGraph> {
        self.keyword("requirements")?;
        let mut graph = DecompositionGraph::new(self.ident("graph name")?);
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let kind = match self.one_of(&["cr", "er", "ar"])? {
                0 => RequirementKind::Cooperative,
                1 => RequirementKind::Existing,
                _ => RequirementKind::Additional,
            };
            let id = self.ident("requirement id")?;
            let text = self.string()?;
            let mut node = RequirementNode {
                id,
                kind,
                text,
                source_system: None,
                linked_aspects: Vec::new(),
                decomposition: None,
            };
            if kind == RequirementKind::Cooperative && self.eat(&Tok::Eq) {
                let op = match self.one_of(&["and", "or"])? {
                    0 => Connective::And,
                    _ => Connective::Or,
                };
                let children = self.ident_list("child id")?;
                node.decomposition = Some(Decomposition { op, children });
            }
            if kind == RequirementKind::Existing && self.eat_kw("from") {
                node.source_system = Some(self.ident("source system")?);
            }
            if self.eat_kw("aspects") {
                node.linked_aspects = self.ident_list("aspect name")?;
            }
            self.expect(Tok::Semi)?;
            graph.nodes.push(node);
        }
        Ok(graph)
    }

    /// `( a, b, ... )` with at least one element.
    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut out = vec![self.ident(what)?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(what)?);
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }
}
