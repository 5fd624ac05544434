//! Notation-driven rendering of terms and modules.
//!
//! A notation applies to an expression if its `for` URI is a prefix of the
//! expression's head; the longest such `for` wins and later notations beat
//! earlier ones on ties. Styles import each other like theories.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::flatten::{Flattener, Resolved};
use crate::model::{Assignment, Declaration, Document, Fixity, Item, Module, Notation, Role, Term, VarDecl};
use crate::reader::{escape, parse_document};
use crate::uri::MmtUri;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentError {
    #[error("no {role} notation applies to {head}")]
    NoApplicableNotation { head: MmtUri, role: Role },
    #[error("unknown style {0}")]
    UnknownStyle(MmtUri),
    #[error("style import cycle through {0}")]
    StyleCycle(MmtUri),
    #[error("cannot dereference {0}")]
    UnknownItem(MmtUri),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    Text,
    Html,
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Target::Text),
            "html" => Ok(Target::Html),
            other => Err(format!("unknown output format `{other}`")),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Text => "text",
            Target::Html => "html",
        })
    }
}

pub const DEFAULT_STYLE: &str = "http://cds.omdoc.org/styles/default.omdoc?generic";

const DEFAULT_STYLE_SOURCE: &str = include_str!("../assets/default-style.omdoc");

/// The shipped style: one root notation per role.
pub fn default_style_document() -> &'static Document {
    static DOC: OnceLock<Document> = OnceLock::new();
    DOC.get_or_init(|| parse_document(DEFAULT_STYLE_SOURCE.as_bytes(), &MmtUri::root()).expect("default style parses"))
}

/// A flattened style: notations in increasing priority.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResolvedStyle {
    pub notations: Vec<Notation>,
}

impl ResolvedStyle {
    pub fn new(notations: Vec<Notation>) -> Self {
        ResolvedStyle { notations }
    }

    pub fn default_style() -> Self {
        let doc = default_style_document();
        ResolvedStyle::new(doc.modules.iter().flat_map(|m| m.notations().into_iter().cloned()).collect())
    }

    /// Appends a layer that overrides everything before it.
    pub fn push_layer(&mut self, notations: impl IntoIterator<Item = Notation>) {
        self.notations.extend(notations);
    }

    /// Default notations, then those found in the item's cone, then the
    /// requested style's closure.
    pub fn layered(cone: impl IntoIterator<Item = Notation>, style: Option<ResolvedStyle>) -> Self {
        let mut s = ResolvedStyle::default_style();
        s.push_layer(cone);
        if let Some(style) = style {
            s.push_layer(style.notations);
        }
        s
    }
}

/// The import closure of a style, imported notations first.
pub fn resolve_style(graph: &crate::model::TheoryGraph, style: &MmtUri) -> Result<ResolvedStyle, PresentError> {
    fn visit(
        graph: &crate::model::TheoryGraph,
        u: &MmtUri,
        done: &mut BTreeSet<MmtUri>,
        active: &mut Vec<MmtUri>,
        out: &mut Vec<Notation>,
    ) -> Result<(), PresentError> {
        if done.contains(u) {
            return Ok(());
        }
        if active.contains(u) {
            return Err(PresentError::StyleCycle(u.clone()));
        }
        let notations: Vec<Notation>;
        let imports: Vec<MmtUri>;
        if let Some(s) = graph.style(u) {
            notations = s.notations.clone();
            imports = s.imports.clone();
        } else if u.to_string() == DEFAULT_STYLE {
            notations = ResolvedStyle::default_style().notations;
            imports = Vec::new();
        } else {
            return Err(PresentError::UnknownStyle(u.clone()));
        }
        active.push(u.clone());
        for i in &imports {
            visit(graph, i, done, active, out)?;
        }
        active.pop();
        done.insert(u.clone());
        out.extend(notations);
        Ok(())
    }
    let mut out = Vec::new();
    visit(graph, style, &mut BTreeSet::new(), &mut Vec::new(), &mut out)?;
    Ok(ResolvedStyle::new(out))
}

fn best<'s>(candidates: impl Iterator<Item = &'s Notation>, head: &MmtUri) -> Option<&'s Notation> {
    let mut chosen: Option<&Notation> = None;
    for n in candidates {
        if !n.applies_to.is_prefix_of(head) {
            continue;
        }
        if chosen.is_none_or(|c| n.applies_to.specificity() >= c.applies_to.specificity()) {
            chosen = Some(n);
        }
    }
    chosen
}

/// The most specific notation of `role` whose `for` is a prefix of `head`.
pub fn select_notation<'s>(style: &'s ResolvedStyle, head: &MmtUri, role: Role) -> Result<&'s Notation, PresentError> {
    best(style.notations.iter().filter(|n| n.role == role), head)
        .ok_or_else(|| PresentError::NoApplicableNotation { head: head.clone(), role })
}

/// What to render: a bare term or the item behind a URI.
#[derive(Debug, Clone)]
pub enum RenderItem {
    Term(Term),
    Uri(MmtUri),
}

pub fn render(
    flat: &Flattener,
    style: &ResolvedStyle,
    item: &RenderItem,
    target: Target,
) -> Result<String, PresentError> {
    let r = Renderer { flat, style, target };
    match item {
        RenderItem::Term(t) => Ok(r.term(t)?.out),
        RenderItem::Uri(u) => r.uri(u),
    }
}

pub fn render_term(flat: &Flattener, style: &ResolvedStyle, t: &Term, target: Target) -> Result<String, PresentError> {
    render(flat, style, &RenderItem::Term(t.clone()), target)
}

struct Rendered {
    out: String,
    prec: i32,
}

struct Renderer<'a, 'g> {
    flat: &'a Flattener<'g>,
    style: &'a ResolvedStyle,
    target: Target,
}

fn component_text(u: &MmtUri, components: &[u8]) -> String {
    let parts: Vec<String> = components
        .iter()
        .filter_map(|c| match c {
            0 => Some(u.doc_str().to_string()),
            1 => u.module().map(|m| m.to_string()),
            _ => u.symbol().map(|s| s.to_string()),
        })
        .collect();
    parts.join("?")
}

impl Renderer<'_, '_> {
    fn html(&self) -> bool {
        self.target == Target::Html
    }

    /// Notations keyed at module level or below win for the head itself,
    /// then for the origin of an induced head, then anything applicable.
    fn notation_for(
        &self,
        head: &MmtUri,
        role: Role,
        arity: Option<usize>,
    ) -> Result<(&Notation, MmtUri), PresentError> {
        let fits = |n: &&Notation| n.role == role && (arity.is_none() || n.arity().is_none() || n.arity() == arity);
        let specific = |n: &&Notation| fits(n) && n.applies_to.module().is_some();
        if let Some(n) = best(self.style.notations.iter().filter(specific), head) {
            return Ok((n, head.clone()));
        }
        let origin = head
            .is_symbol_level()
            .then(|| self.flat.deref_constant(head))
            .flatten()
            .filter(|c| !c.is_syntactic())
            .map(|c| c.origin.clone());
        if let Some(origin) = &origin {
            if let Some(n) = best(self.style.notations.iter().filter(specific), origin) {
                return Ok((n, origin.clone()));
            }
        }
        // Generic notations name an induced constant after its origin.
        best(self.style.notations.iter().filter(fits), head)
            .map(|n| (n, origin.unwrap_or_else(|| head.clone())))
            .ok_or_else(|| PresentError::NoApplicableNotation { head: head.clone(), role })
    }

    fn punct(&self, s: &str) -> String {
        if !self.html() {
            return s.to_string();
        }
        if s.trim().is_empty() {
            String::new()
        } else {
            format!("<mo>{}</mo>", escape(s.trim()))
        }
    }

    fn operator(&self, uri: &MmtUri, text: &str) -> String {
        if self.html() {
            format!("<mo xref=\"{}\">{}</mo>", escape(&uri.to_string()), escape(text))
        } else {
            text.to_string()
        }
    }

    fn row(&self, parts: Vec<String>) -> String {
        if self.html() {
            format!("<mrow>{}</mrow>", parts.concat())
        } else {
            parts.concat()
        }
    }

    fn symbol(&self, u: &MmtUri) -> Result<Rendered, PresentError> {
        let (n, key) = self.notation_for(u, Role::Constant, None)?;
        let text = n.operator.clone().unwrap_or_else(|| component_text(&key, n.components()));
        Ok(Rendered { out: self.operator(u, &text), prec: n.prec_out })
    }

    /// The operator of an application or binder notation.
    fn head_text(&self, n: &Notation, u: &MmtUri) -> Result<String, PresentError> {
        match &n.operator {
            Some(op) => Ok(self.operator(u, op)),
            None => Ok(self.symbol(u)?.out),
        }
    }

    fn wrap(&self, child: Rendered, required: i32, parent: &Notation) -> String {
        if child.prec >= required {
            return child.out;
        }
        let (l, r) = parent.brackets();
        self.row(vec![self.punct(l), child.out, self.punct(r)])
    }

    fn term(&self, t: &Term) -> Result<Rendered, PresentError> {
        match t {
            Term::Sym(u) => self.symbol(u),
            Term::Var(x) => Ok(Rendered {
                out: if self.html() { format!("<mi>{}</mi>", escape(x)) } else { x.clone() },
                prec: i32::MAX,
            }),
            Term::Apply { head, args } => self.application(head, args),
            Term::Bind { binder, vars, body } => self.binding(binder, vars, body),
        }
    }

    fn application(&self, head: &Term, args: &[Term]) -> Result<Rendered, PresentError> {
        let (n, op) = match head {
            Term::Sym(u) => {
                let (n, _) = self.notation_for(u, Role::Application, Some(args.len()))?;
                (n, self.head_text(n, u)?)
            }
            other => {
                let n = self.notation_for(&MmtUri::root(), Role::Application, Some(args.len()))?.0;
                (n, self.wrap(self.term(other)?, n.prec_in, n))
            }
        };
        let sep = n.separator();
        let out = match n.fixity {
            Fixity::Infix => {
                let (lreq, rreq) = match n.assoc {
                    crate::model::Assoc::Left => (n.prec_in, n.prec_in + 1),
                    crate::model::Assoc::Right => (n.prec_in + 1, n.prec_in),
                    crate::model::Assoc::None => (n.prec_in + 1, n.prec_in + 1),
                };
                let l = self.wrap(self.term(&args[0])?, lreq, n);
                let r = self.wrap(self.term(&args[1])?, rreq, n);
                self.row(vec![l, self.punct(sep), op, self.punct(sep), r])
            }
            Fixity::Postfix => {
                let a = self.wrap(self.term(&args[0])?, n.prec_in, n);
                self.row(vec![a, op])
            }
            Fixity::Prefix | Fixity::NameOnly => {
                let (l, r) = n.brackets();
                let mut parts = vec![op, self.punct(l)];
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        parts.push(self.punct(sep));
                    }
                    parts.push(self.term(a)?.out);
                }
                parts.push(self.punct(r));
                self.row(parts)
            }
        };
        Ok(Rendered { out, prec: n.prec_out })
    }

    fn binding(&self, binder: &Term, vars: &[VarDecl], body: &Term) -> Result<Rendered, PresentError> {
        let (n, op) = match binder {
            Term::Sym(u) => {
                let (n, _) = self.notation_for(u, Role::Binder, None)?;
                (n, self.head_text(n, u)?)
            }
            other => {
                let n = self.notation_for(&MmtUri::root(), Role::Binder, None)?.0;
                (n, self.wrap(self.term(other)?, i32::MAX, n))
            }
        };
        let mut parts = vec![op];
        for (i, v) in vars.iter().enumerate() {
            if i > 0 {
                parts.push(self.punct(n.separator()));
            }
            parts.push(self.term(&Term::Var(v.name.clone()))?.out);
            if let Some(tp) = &v.tp {
                parts.push(self.punct(":"));
                parts.push(self.term(tp)?.out);
            }
        }
        parts.push(self.punct(". "));
        parts.push(self.wrap(self.term(body)?, n.prec_in, n));
        Ok(Rendered { out: self.row(parts), prec: n.prec_out })
    }

    fn module_name(&self, u: &MmtUri, role: Role) -> Result<String, PresentError> {
        let (n, _) = self.notation_for(u, role, None)?;
        let text = n.operator.clone().unwrap_or_else(|| component_text(u, n.components()));
        Ok(self.operator(u, &text))
    }

    fn module_ref(&self, u: &MmtUri) -> Result<String, PresentError> {
        let role = match self.flat.graph().module(u) {
            Some(Module::View(_)) => Role::View,
            _ => Role::Theory,
        };
        self.module_name(u, role)
    }

    fn math(&self, t: &Term) -> Result<String, PresentError> {
        let out = self.term(t)?.out;
        Ok(if self.html() { format!("<math>{out}</math>") } else { out })
    }

    fn text(&self, s: &str) -> String {
        if self.html() {
            escape(s)
        } else {
            s.to_string()
        }
    }

    fn constant_line(&self, name: &str, tp: Option<&Term>, def: Option<&Term>) -> Result<String, PresentError> {
        let mut line = self.text(name);
        if let Some(tp) = tp {
            line.push_str(&self.text(" : "));
            line.push_str(&self.math(tp)?);
        }
        if let Some(def) = def {
            line.push_str(&self.text(" = "));
            line.push_str(&self.math(def)?);
        }
        Ok(line)
    }

    fn assignment_line(&self, a: &Assignment, base: &MmtUri) -> Result<String, PresentError> {
        Ok(match a {
            Assignment::Const { target, value } => {
                format!("{}{}", self.text(&format!("{target} = ")), self.math(value)?)
            }
            Assignment::Import { target, value } => self.text(&format!("{target} = {}", value.format_relative(base))),
        })
    }

    fn block(&self, class: &str, uri: &MmtUri, header: String, lines: Vec<(Option<MmtUri>, String)>) -> String {
        if self.html() {
            let mut out = format!(
                "<div class=\"{class}\" xref=\"{}\"><div class=\"header\">{header}</div>",
                escape(&uri.to_string())
            );
            for (u, l) in lines {
                match u {
                    Some(u) => {
                        out.push_str(&format!("<div class=\"decl\" xref=\"{}\">{l}</div>", escape(&u.to_string())))
                    }
                    None => out.push_str(&format!("<div class=\"decl\">{l}</div>")),
                }
            }
            out.push_str("</div>\n");
            out
        } else {
            let mut out = header;
            out.push('\n');
            for (_, l) in lines {
                out.push_str("  ");
                out.push_str(&l);
                out.push('\n');
            }
            out
        }
    }

    fn module(&self, u: &MmtUri, m: &Module) -> Result<String, PresentError> {
        let base = u.doc_uri();
        match m {
            Module::Theory(t) => {
                let mut header = format!("{}{}", self.text("theory "), self.module_name(u, Role::Theory)?);
                if let Some(meta) = &t.meta {
                    header.push_str(&self.text(" : "));
                    header.push_str(&self.module_ref(meta)?);
                }
                let mut lines = Vec::new();
                for d in &t.declarations {
                    let du = u.with_symbol(d.name().clone());
                    match d {
                        Declaration::Constant(c) => {
                            lines.push((
                                Some(du),
                                self.constant_line(&c.name.to_string(), c.tp.as_ref(), c.def.as_ref())?,
                            ));
                        }
                        Declaration::Import(i) => {
                            lines.push((
                                Some(du),
                                format!("{}{}", self.text(&format!("import {} : ", i.name)), self.module_ref(&i.from)?),
                            ));
                            for a in &i.assignments {
                                let au = u.with_symbol(i.name.join(a.target()));
                                lines.push((
                                    Some(au),
                                    format!("{}{}", self.text("  "), self.assignment_line(a, &base)?),
                                ));
                            }
                        }
                        Declaration::Notation(n) => {
                            lines.push((
                                Some(n.uri.clone()),
                                self.text(&format!("notation {} for {}", d.name(), n.applies_to)),
                            ));
                        }
                    }
                }
                Ok(self.block("theory", u, header, lines))
            }
            Module::View(v) => {
                let header = format!(
                    "{}{}{}{}{}{}",
                    self.text("view "),
                    self.module_name(u, Role::View)?,
                    self.text(" : "),
                    self.module_ref(&v.from)?,
                    self.text(" -> "),
                    self.module_ref(&v.to)?
                );
                let mut lines = Vec::new();
                for a in &v.assignments {
                    lines.push((Some(u.with_symbol(a.target().clone())), self.assignment_line(a, &base)?));
                }
                Ok(self.block("view", u, header, lines))
            }
            Module::Style(s) => {
                let header = self.text(&format!("style {}", s.name));
                let mut lines = Vec::new();
                for i in &s.imports {
                    lines.push((Some(i.clone()), self.text(&format!("import {i}"))));
                }
                for n in &s.notations {
                    lines.push((
                        Some(n.uri.clone()),
                        self.text(&format!(
                            "notation {} for {}",
                            n.uri.symbol().map(|s| s.to_string()).unwrap_or_default(),
                            n.applies_to
                        )),
                    ));
                }
                Ok(self.block("style", u, header, lines))
            }
        }
    }

    fn uri(&self, u: &MmtUri) -> Result<String, PresentError> {
        if u.is_doc_level() {
            let modules: Vec<(&MmtUri, &Module)> =
                self.flat.graph().modules().filter(|(m, _)| m.doc_uri() == *u).collect();
            if modules.is_empty() {
                return Err(PresentError::UnknownItem(u.clone()));
            }
            let (n, _) = self.notation_for(u, Role::Document, None)?;
            let name = n.operator.clone().unwrap_or_else(|| component_text(u, n.components()));
            let mut body = Vec::new();
            for (mu, m) in modules {
                body.push(self.module(mu, m)?);
            }
            return Ok(if self.html() {
                format!(
                    "<div class=\"document\" xref=\"{}\"><div class=\"header\">{}</div>\n{}</div>\n",
                    escape(&u.to_string()),
                    self.text(&format!("document {name}")),
                    body.concat()
                )
            } else {
                format!("document {name}\n\n{}", body.join("\n"))
            });
        }
        match self.flat.deref(u) {
            Some(Resolved::Module(m)) => self.module(u, m),
            Some(Resolved::Constant(c)) => {
                let line = self.constant_line(&c.path().to_string(), c.tp.as_ref(), c.def.as_ref())?;
                Ok(if self.html() {
                    format!("<div class=\"constant\" xref=\"{}\">{line}</div>\n", escape(&u.to_string()))
                } else {
                    format!("{line}\n")
                })
            }
            Some(Resolved::Item(item)) => {
                let module = u.module_uri().ok_or_else(|| PresentError::UnknownItem(u.clone()))?;
                let line = match item {
                    Item::Import(i) => {
                        format!("{}{}", self.text(&format!("import {} : ", i.name)), self.module_ref(&i.from)?)
                    }
                    Item::Assignment(a) => self.assignment_line(a, &module.doc_uri())?,
                    Item::Notation(n) => self.text(&format!("notation for {}", n.applies_to)),
                    _ => return Err(PresentError::UnknownItem(u.clone())),
                };
                Ok(if self.html() {
                    format!("<div class=\"decl\" xref=\"{}\">{line}</div>\n", escape(&u.to_string()))
                } else {
                    format!("{line}\n")
                })
            }
            None => Err(PresentError::UnknownItem(u.clone())),
        }
    }
}
