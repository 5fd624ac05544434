//! The XML concrete syntax (`.omdoc`).
//!
//! ```text
//! omdoc[@base]            (theory | view | style)*
//! theory[@name,@meta?]    (constant | import | notation)*
//! constant[@name]         type? definition?
//! import[@name,@from]     assign*
//! view[@name,@from,@to]   assign*
//! assign[@symbol]         term
//! assign[@import,@morphism]
//! style[@name]            (import[@from] | notation)*
//! notation[@name?,@for,@role,@fixity,@operator?,@prec-in,@prec-out,
//!          @assoc?,@brackets?,@separator?,@components?]
//! term := OMS[@path] | OMV[@name] | OMA(term term+) | OMBIND(term OMBVAR term)
//! OMBVAR                  (OMV[@name] term?)+
//! ```
//!
//! Relative URIs are resolved against the URI of the enclosing declaration.
//! Serialization relativizes against the document base and is
//! byte-for-byte deterministic: fixed attribute order, two-space indent,
//! LF line endings.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use roxmltree::{Node, NodeType};
use thiserror::Error;

use crate::model::META;
use crate::model::{
    parse_morphism, Assignment, Assoc, Constant, Declaration, Document, Fixity, Import, Module, Morphism, Notation,
    Role, Style, Term, Theory, VarDecl, View,
};
use crate::uri::{resolve_relative, LocalName, MmtUri, UriError};

/// Position of a parsed node: 1-based lines and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceRef {
    pub file: Option<String>,
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}-{}:{}", self.line, self.column, self.end_line, self.end_column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("{at}: {message}")]
    Grammar { at: SourceRef, message: String },
    #[error("{at}: {source}")]
    MalformedUri { at: SourceRef, source: UriError },
}

impl ReadError {
    pub fn source_ref(&self) -> &SourceRef {
        match self {
            ReadError::Grammar { at, .. } | ReadError::MalformedUri { at, .. } => at,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ReadError::Grammar { .. } => "GrammarError",
            ReadError::MalformedUri { .. } => "MalformedUri",
        }
    }
}

/// Source positions of every parsed declaration, keyed by URI.
pub type SourceMap = BTreeMap<MmtUri, SourceRef>;

thread_local! {
    static PARSES: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Documents parsed so far on the calling thread.
pub fn parses_on_this_thread() -> u64 {
    PARSES.with(|c| c.get())
}

pub fn parse_document(bytes: &[u8], expected_base: &MmtUri) -> Result<Document, ReadError> {
    parse_document_with_sources(bytes, expected_base, None).map(|(d, _)| d)
}

/// Parses a document; a relative `base` attribute is resolved against
/// `expected_base`.
pub fn parse_document_with_sources(
    bytes: &[u8],
    expected_base: &MmtUri,
    file: Option<&str>,
) -> Result<(Document, SourceMap), ReadError> {
    PARSES.with(|c| c.set(c.get() + 1));
    let file = file.map(str::to_string);
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        let column = (prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1)) as u32 + 1;
        ReadError::Grammar {
            at: SourceRef { file: file.clone(), line, column, end_line: line, end_column: column },
            message: "input is not valid UTF-8".into(),
        }
    })?;
    if let Some(decl_end) = text.strip_prefix("<?xml").and_then(|rest| rest.find("?>")) {
        let decl = &text[..decl_end + 7];
        if let Some(pos) = decl.find("encoding=") {
            let value = decl[pos + 9..].trim_start_matches(['"', '\'']);
            if !value.to_ascii_lowercase().starts_with("utf-8") {
                return Err(ReadError::Grammar {
                    at: SourceRef { file, line: 1, column: 1, end_line: 1, end_column: decl.len() as u32 },
                    message: "only UTF-8 encoding is supported".into(),
                });
            }
        }
    }
    let xml = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ReadError::Grammar {
            at: SourceRef {
                file: file.clone(),
                line: pos.row,
                column: pos.col,
                end_line: pos.row,
                end_column: pos.col,
            },
            message: e.to_string(),
        }
    })?;
    let mut p = Parser { xml: &xml, file, sources: SourceMap::new() };
    let doc = p.document(xml.root_element(), expected_base)?;
    Ok((doc, p.sources))
}

struct Parser<'x, 'i> {
    xml: &'x roxmltree::Document<'i>,
    file: Option<String>,
    sources: SourceMap,
}

impl<'x, 'i> Parser<'x, 'i> {
    fn at(&self, node: Node) -> SourceRef {
        let r = node.range();
        let start = self.xml.text_pos_at(r.start);
        let end = self.xml.text_pos_at(r.end);
        SourceRef {
            file: self.file.clone(),
            line: start.row,
            column: start.col,
            end_line: end.row,
            end_column: end.col,
        }
    }

    fn err<T>(&self, node: Node, message: impl Into<String>) -> Result<T, ReadError> {
        Err(ReadError::Grammar { at: self.at(node), message: message.into() })
    }

    fn uri_err(&self, node: Node, source: UriError) -> ReadError {
        ReadError::MalformedUri { at: self.at(node), source }
    }

    fn check_attrs(&self, node: Node, allowed: &[&str]) -> Result<(), ReadError> {
        for a in node.attributes() {
            if a.namespace().is_some() || !allowed.contains(&a.name()) {
                return self.err(node, format!("unexpected attribute `{}` on <{}>", a.name(), node.tag_name().name()));
            }
        }
        Ok(())
    }

    fn required<'a>(&self, node: Node<'a, 'i>, name: &str) -> Result<&'a str, ReadError> {
        match node.attribute(name) {
            Some(v) => Ok(v),
            None => self.err(node, format!("<{}> lacks attribute `{name}`", node.tag_name().name())),
        }
    }

    /// Element children; non-whitespace text is a grammar error.
    fn children<'a>(&self, node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>, ReadError> {
        let mut out = Vec::new();
        for c in node.children() {
            match c.node_type() {
                NodeType::Element => {
                    if c.tag_name().namespace().is_some() {
                        return self.err(c, format!("unexpected namespaced element <{}>", c.tag_name().name()));
                    }
                    out.push(c)
                }
                NodeType::Text if !c.text().unwrap_or_default().trim().is_empty() => {
                    return self.err(c, "unexpected text content");
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn expect_tag(&self, node: Node, tag: &str) -> Result<(), ReadError> {
        if node.tag_name().name() == tag {
            Ok(())
        } else {
            self.err(node, format!("expected <{tag}>, found <{}>", node.tag_name().name()))
        }
    }

    fn local_name(&self, node: Node, value: &str) -> Result<LocalName, ReadError> {
        LocalName::parse(value).map_err(|e| self.uri_err(node, e))
    }

    fn resolve(&self, node: Node, base: &MmtUri, value: &str) -> Result<MmtUri, ReadError> {
        resolve_relative(base, value).map_err(|e| self.uri_err(node, e))
    }

    fn module_ref(&self, node: Node, base: &MmtUri, value: &str) -> Result<MmtUri, ReadError> {
        let u = self.resolve(node, base, value)?;
        if !u.is_module_level() {
            return self.err(node, format!("`{value}` does not name a module"));
        }
        Ok(u)
    }

    fn record(&mut self, uri: &MmtUri, node: Node) -> Result<(), ReadError> {
        if self.sources.contains_key(uri) {
            return Ok(());
        }
        let at = self.at(node);
        self.sources.insert(uri.clone(), at);
        Ok(())
    }

    fn document(&mut self, root: Node<'x, 'i>, expected_base: &MmtUri) -> Result<Document, ReadError> {
        self.expect_tag(root, "omdoc")?;
        self.check_attrs(root, &["base"])?;
        let base_attr = self.required(root, "base")?;
        let base = if expected_base.is_absolute() {
            self.resolve(root, expected_base, base_attr)?
        } else {
            MmtUri::doc(base_attr).map_err(|e| self.uri_err(root, e))?
        };
        if !base.is_doc_level() || !base.has_scheme() {
            return self.err(root, "document base must be an absolute URI without module part");
        }
        let mut doc = Document::new(base.clone());
        self.record(&base, root)?;
        let mut names = HashSet::new();
        for child in self.children(root)? {
            let module = match child.tag_name().name() {
                "theory" => Module::Theory(self.theory(child, &base)?),
                "view" => Module::View(self.view(child, &base)?),
                "style" => Module::Style(self.style(child, &base)?),
                other => return self.err(child, format!("unknown element <{other}> in <omdoc>")),
            };
            if !names.insert(module.name().clone()) {
                return self.err(child, format!("duplicate module name `{}`", module.name()));
            }
            doc.modules.push(module);
        }
        Ok(doc)
    }

    fn theory(&mut self, node: Node<'x, 'i>, base: &MmtUri) -> Result<Theory, ReadError> {
        self.check_attrs(node, &["name", "meta"])?;
        let name = self.local_name(node, self.required(node, "name")?)?;
        let uri = base.with_module(name.clone());
        self.record(&uri, node)?;
        let meta = node.attribute("meta").map(|m| self.module_ref(node, &uri, m)).transpose()?;
        let mut theory = Theory { name, meta, declarations: Vec::new() };
        let mut notation_count = 0;
        for child in self.children(node)? {
            let decl = match child.tag_name().name() {
                "constant" => Declaration::Constant(self.constant(child, &uri)?),
                "import" => Declaration::Import(self.import(child, &uri)?),
                "notation" => {
                    notation_count += 1;
                    Declaration::Notation(self.notation(child, &uri, notation_count)?)
                }
                other => return self.err(child, format!("unknown element <{other}> in <theory>")),
            };
            self.record(&uri.with_symbol(decl.name().clone()), child)?;
            theory.declarations.push(decl);
        }
        Ok(theory)
    }

    fn constant(&mut self, node: Node<'x, 'i>, theory: &MmtUri) -> Result<Constant, ReadError> {
        self.check_attrs(node, &["name"])?;
        let name = self.local_name(node, self.required(node, "name")?)?;
        let uri = theory.with_symbol(name.clone());
        let mut c = Constant::new(name);
        let children = self.children(node)?;
        let mut iter = children.into_iter().peekable();
        if let Some(n) = iter.peek().copied().filter(|n| n.tag_name().name() == "type") {
            iter.next();
            c.tp = Some(self.wrapped_term(n, &uri)?);
        }
        if let Some(n) = iter.peek().copied().filter(|n| n.tag_name().name() == "definition") {
            iter.next();
            c.def = Some(self.wrapped_term(n, &uri)?);
        }
        if let Some(extra) = iter.next() {
            return self.err(extra, format!("unexpected <{}> in <constant>", extra.tag_name().name()));
        }
        Ok(c)
    }

    fn wrapped_term(&mut self, node: Node<'x, 'i>, base: &MmtUri) -> Result<Term, ReadError> {
        self.check_attrs(node, &[])?;
        let children = self.children(node)?;
        match children.as_slice() {
            [t] => self.term(*t, base),
            _ => self.err(node, format!("<{}> must contain exactly one term", node.tag_name().name())),
        }
    }

    fn import(&mut self, node: Node<'x, 'i>, theory: &MmtUri) -> Result<Import, ReadError> {
        self.check_attrs(node, &["name", "from"])?;
        let name = self.local_name(node, self.required(node, "name")?)?;
        if name.len() != 1 {
            return self.err(node, "import names are single segments");
        }
        if name.first() == META {
            return self.err(node, "`meta` is reserved for the meta-theory");
        }
        let uri = theory.with_symbol(name.clone());
        let from = self.module_ref(node, &uri, self.required(node, "from")?)?;
        let mut assignments = Vec::new();
        for child in self.children(node)? {
            self.expect_tag(child, "assign")?;
            let a = self.assign(child, &uri, |target| uri.with_symbol(name.join(target)))?;
            assignments.push(a);
        }
        Ok(Import { name, from, assignments })
    }

    fn view(&mut self, node: Node<'x, 'i>, base: &MmtUri) -> Result<View, ReadError> {
        self.check_attrs(node, &["name", "from", "to"])?;
        let name = self.local_name(node, self.required(node, "name")?)?;
        let uri = base.with_module(name.clone());
        self.record(&uri, node)?;
        let from = self.module_ref(node, &uri, self.required(node, "from")?)?;
        let to = self.module_ref(node, &uri, self.required(node, "to")?)?;
        let mut assignments = Vec::new();
        for child in self.children(node)? {
            self.expect_tag(child, "assign")?;
            let a = self.assign(child, &uri, |target| uri.with_symbol(target.clone()))?;
            assignments.push(a);
        }
        Ok(View { name, from, to, assignments })
    }

    fn assign(
        &mut self,
        node: Node<'x, 'i>,
        _container: &MmtUri,
        uri_of: impl Fn(&LocalName) -> MmtUri,
    ) -> Result<Assignment, ReadError> {
        self.check_attrs(node, &["symbol", "import", "morphism"])?;
        let children = self.children(node)?;
        match (node.attribute("symbol"), node.attribute("import")) {
            (Some(sym), None) => {
                if node.attribute("morphism").is_some() {
                    return self.err(node, "symbol assignments take a term, not a morphism");
                }
                let target = self.local_name(node, sym)?;
                let uri = uri_of(&target);
                self.record(&uri, node)?;
                let value = match children.as_slice() {
                    [t] => self.term(*t, &uri)?,
                    _ => return self.err(node, "symbol assignment must contain exactly one term"),
                };
                Ok(Assignment::Const { target, value })
            }
            (None, Some(imp)) => {
                if let Some(extra) = children.first() {
                    return self.err(*extra, "import assignments take a `morphism` attribute");
                }
                let target = self.local_name(node, imp)?;
                let uri = uri_of(&target);
                self.record(&uri, node)?;
                let text = self.required(node, "morphism")?;
                let value = parse_morphism(text, &uri).map_err(|e| self.uri_err(node, e))?;
                Ok(Assignment::Import { target, value })
            }
            _ => self.err(node, "<assign> needs exactly one of `symbol` or `import`"),
        }
    }

    fn style(&mut self, node: Node<'x, 'i>, base: &MmtUri) -> Result<Style, ReadError> {
        self.check_attrs(node, &["name"])?;
        let name = self.local_name(node, self.required(node, "name")?)?;
        let uri = base.with_module(name.clone());
        self.record(&uri, node)?;
        let mut style = Style { name, imports: Vec::new(), notations: Vec::new() };
        for child in self.children(node)? {
            match child.tag_name().name() {
                "import" => {
                    self.check_attrs(child, &["from"])?;
                    if !self.children(child)?.is_empty() {
                        return self.err(child, "style imports are empty elements");
                    }
                    style.imports.push(self.module_ref(child, &uri, self.required(child, "from")?)?);
                }
                "notation" => {
                    let n = self.notation(child, &uri, style.notations.len() + 1)?;
                    self.record(&n.uri, child)?;
                    style.notations.push(n);
                }
                other => return self.err(child, format!("unknown element <{other}> in <style>")),
            }
        }
        Ok(style)
    }

    fn notation(&mut self, node: Node<'x, 'i>, container: &MmtUri, position: usize) -> Result<Notation, ReadError> {
        self.check_attrs(
            node,
            &[
                "name",
                "for",
                "role",
                "fixity",
                "operator",
                "prec-in",
                "prec-out",
                "assoc",
                "brackets",
                "separator",
                "components",
            ],
        )?;
        if let Some(c) = self.children(node)?.first() {
            return self.err(*c, "<notation> has no children");
        }
        let name = match node.attribute("name") {
            Some(n) => self.local_name(node, n)?,
            None => default_notation_name(position),
        };
        let uri = container.with_symbol(name);
        let for_attr = self.required(node, "for")?;
        let applies_to = if for_attr.is_empty() { MmtUri::root() } else { self.resolve(node, &uri, for_attr)? };
        let keyword = |attr: &str| -> Result<String, ReadError> { Ok(self.required(node, attr)?.to_string()) };
        let role: Role = keyword("role")?.parse().map_err(|m: String| self.err::<()>(node, m).unwrap_err())?;
        let fixity: Fixity = keyword("fixity")?.parse().map_err(|m: String| self.err::<()>(node, m).unwrap_err())?;
        let int = |attr: &str| -> Result<i32, ReadError> {
            let v = self.required(node, attr)?;
            v.parse().map_err(|_| self.err::<()>(node, format!("`{attr}` must be an integer, got `{v}`")).unwrap_err())
        };
        let prec_in = int("prec-in")?;
        let prec_out = int("prec-out")?;
        let assoc = match node.attribute("assoc") {
            Some(a) => a.parse::<Assoc>().map_err(|m| self.err::<()>(node, m).unwrap_err())?,
            None => Assoc::Left,
        };
        let brackets = match node.attribute("brackets") {
            Some(b) => match b.split_once(' ') {
                Some((l, r)) if !r.contains(' ') => Some((l.to_string(), r.to_string())),
                _ => return self.err(node, "`brackets` must be two tokens separated by one space"),
            },
            None => None,
        };
        let components = match node.attribute("components") {
            Some(c) => {
                let parsed: Result<Vec<u8>, _> = c.split_whitespace().map(str::parse::<u8>).collect();
                match parsed {
                    Ok(v) if !v.is_empty() && v.iter().all(|&i| i <= 2) => Some(v),
                    _ => return self.err(node, "`components` must list indices 0, 1 or 2"),
                }
            }
            None => None,
        };
        Ok(Notation {
            uri,
            applies_to,
            role,
            fixity,
            prec_in,
            prec_out,
            operator: node.attribute("operator").map(str::to_string),
            separator: node.attribute("separator").map(str::to_string),
            brackets,
            assoc,
            components,
        })
    }

    fn term(&mut self, node: Node<'x, 'i>, base: &MmtUri) -> Result<Term, ReadError> {
        match node.tag_name().name() {
            "OMS" => {
                self.check_attrs(node, &["path"])?;
                if let Some(c) = self.children(node)?.first() {
                    return self.err(*c, "<OMS> has no children");
                }
                let u = self.resolve(node, base, self.required(node, "path")?)?;
                if !u.is_symbol_level() {
                    return self.err(node, "<OMS> must reference a symbol");
                }
                Ok(Term::Sym(u))
            }
            "OMV" => {
                self.check_attrs(node, &["name"])?;
                if let Some(c) = self.children(node)?.first() {
                    return self.err(*c, "<OMV> outside <OMBVAR> has no children");
                }
                let name = self.required(node, "name")?;
                if name.is_empty() {
                    return self.err(node, "empty variable name");
                }
                Ok(Term::Var(name.to_string()))
            }
            "OMA" => {
                self.check_attrs(node, &[])?;
                let children = self.children(node)?;
                if children.len() < 2 {
                    return self.err(node, "<OMA> needs a head and at least one argument");
                }
                let head = self.term(children[0], base)?;
                let args = children[1..].iter().map(|c| self.term(*c, base)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::apply(head, args))
            }
            "OMBIND" => {
                self.check_attrs(node, &[])?;
                let children = self.children(node)?;
                let [binder, bvar, body] = children.as_slice() else {
                    return self.err(node, "<OMBIND> needs binder, <OMBVAR> and body");
                };
                let binder = self.term(*binder, base)?;
                self.expect_tag(*bvar, "OMBVAR")?;
                self.check_attrs(*bvar, &[])?;
                let mut vars = Vec::new();
                let mut seen = HashSet::new();
                for v in self.children(*bvar)? {
                    self.expect_tag(v, "OMV")?;
                    self.check_attrs(v, &["name"])?;
                    let name = self.required(v, "name")?.to_string();
                    if name.is_empty() {
                        return self.err(v, "empty variable name");
                    }
                    if !seen.insert(name.clone()) {
                        return self.err(v, format!("variable `{name}` bound twice"));
                    }
                    let tp = match self.children(v)?.as_slice() {
                        [] => None,
                        [t] => Some(self.term(*t, base)?),
                        _ => return self.err(v, "a bound variable has at most one type"),
                    };
                    vars.push(VarDecl { name, tp });
                }
                if vars.is_empty() {
                    return self.err(*bvar, "<OMBVAR> needs at least one variable");
                }
                let body = self.term(*body, base)?;
                Ok(Term::bind(binder, vars, body))
            }
            other => self.err(node, format!("unknown term element <{other}>")),
        }
    }
}

fn default_notation_name(position: usize) -> LocalName {
    LocalName::simple(format!("notation-{position}"))
}

/// Minimal indenting XML writer.
pub struct XmlWriter {
    out: String,
    depth: usize,
}

impl Default for XmlWriter {
    fn default() -> Self {
        Self::new()
    }
}

impl XmlWriter {
    pub fn new() -> Self {
        XmlWriter { out: String::new(), depth: 0 }
    }

    fn start(&mut self, tag: &str, attrs: &[(&str, String)]) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push('<');
        self.out.push_str(tag);
        for (k, v) in attrs {
            self.out.push(' ');
            self.out.push_str(k);
            self.out.push_str("=\"");
            self.out.push_str(&escape(v));
            self.out.push('"');
        }
    }

    pub fn open(&mut self, tag: &str, attrs: &[(&str, String)]) {
        self.start(tag, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    pub fn empty(&mut self, tag: &str, attrs: &[(&str, String)]) {
        self.start(tag, attrs);
        self.out.push_str("/>\n");
    }

    pub fn text_element(&mut self, tag: &str, attrs: &[(&str, String)], text: &str) {
        self.start(tag, attrs);
        self.out.push('>');
        self.out.push_str(&escape(text));
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push_str(">\n");
    }

    pub fn close(&mut self, tag: &str) {
        self.depth -= 1;
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push_str(">\n");
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\t' => out.push_str("&#9;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

pub fn serialize_document(doc: &Document) -> String {
    let mut w = XmlWriter::new();
    let base = &doc.base;
    let attrs = [("base", base.to_string())];
    if doc.modules.is_empty() {
        w.empty("omdoc", &attrs);
        return w.finish();
    }
    w.open("omdoc", &attrs);
    for m in &doc.modules {
        write_module(&mut w, m, base);
    }
    w.close("omdoc");
    w.finish()
}

pub fn write_module(w: &mut XmlWriter, m: &Module, base: &MmtUri) {
    match m {
        Module::Theory(t) => {
            let mut attrs = vec![("name", t.name.to_string())];
            if let Some(meta) = &t.meta {
                attrs.push(("meta", meta.relative_to(base)));
            }
            if t.declarations.is_empty() {
                w.empty("theory", &attrs);
                return;
            }
            w.open("theory", &attrs);
            let mut notation_count = 0;
            for d in &t.declarations {
                match d {
                    Declaration::Constant(c) => {
                        write_constant(w, &c.name.to_string(), &[], c.tp.as_ref(), c.def.as_ref(), base)
                    }
                    Declaration::Import(i) => {
                        let attrs = [("name", i.name.to_string()), ("from", i.from.relative_to(base))];
                        if i.assignments.is_empty() {
                            w.empty("import", &attrs);
                        } else {
                            w.open("import", &attrs);
                            for a in &i.assignments {
                                write_assignment(w, a, base);
                            }
                            w.close("import");
                        }
                    }
                    Declaration::Notation(n) => {
                        notation_count += 1;
                        write_notation(w, n, notation_count, base);
                    }
                }
            }
            w.close("theory");
        }
        Module::View(v) => {
            let attrs =
                [("name", v.name.to_string()), ("from", v.from.relative_to(base)), ("to", v.to.relative_to(base))];
            if v.assignments.is_empty() {
                w.empty("view", &attrs);
                return;
            }
            w.open("view", &attrs);
            for a in &v.assignments {
                write_assignment(w, a, base);
            }
            w.close("view");
        }
        Module::Style(s) => {
            let attrs = [("name", s.name.to_string())];
            if s.imports.is_empty() && s.notations.is_empty() {
                w.empty("style", &attrs);
                return;
            }
            w.open("style", &attrs);
            for i in &s.imports {
                w.empty("import", &[("from", i.relative_to(base))]);
            }
            for (k, n) in s.notations.iter().enumerate() {
                write_notation(w, n, k + 1, base);
            }
            w.close("style");
        }
    }
}

/// Writes a `<constant>` element; `extra` attributes follow `name`.
pub fn write_constant(
    w: &mut XmlWriter,
    name: &str,
    extra: &[(&str, String)],
    tp: Option<&Term>,
    def: Option<&Term>,
    base: &MmtUri,
) {
    let mut attrs = vec![("name", name.to_string())];
    attrs.extend(extra.iter().cloned());
    if tp.is_none() && def.is_none() {
        w.empty("constant", &attrs);
        return;
    }
    w.open("constant", &attrs);
    if let Some(t) = tp {
        w.open("type", &[]);
        write_term(w, t, base);
        w.close("type");
    }
    if let Some(t) = def {
        w.open("definition", &[]);
        write_term(w, t, base);
        w.close("definition");
    }
    w.close("constant");
}

pub fn write_assignment(w: &mut XmlWriter, a: &Assignment, base: &MmtUri) {
    match a {
        Assignment::Const { target, value } => {
            w.open("assign", &[("symbol", target.to_string())]);
            write_term(w, value, base);
            w.close("assign");
        }
        Assignment::Import { target, value } => {
            w.empty("assign", &[("import", target.to_string()), ("morphism", value.format_relative(base))]);
        }
    }
}

pub fn write_notation(w: &mut XmlWriter, n: &Notation, position: usize, base: &MmtUri) {
    let mut attrs = Vec::new();
    if let Some(name) = n.uri.symbol() {
        if *name != default_notation_name(position) {
            attrs.push(("name", name.to_string()));
        }
    }
    let for_text = if n.applies_to.is_root() { String::new() } else { n.applies_to.relative_to(base) };
    attrs.push(("for", for_text));
    attrs.push(("role", n.role.to_string()));
    attrs.push(("fixity", n.fixity.to_string()));
    if let Some(op) = &n.operator {
        attrs.push(("operator", op.clone()));
    }
    attrs.push(("prec-in", n.prec_in.to_string()));
    attrs.push(("prec-out", n.prec_out.to_string()));
    if n.assoc != Assoc::Left {
        attrs.push(("assoc", n.assoc.to_string()));
    }
    if let Some((l, r)) = &n.brackets {
        attrs.push(("brackets", format!("{l} {r}")));
    }
    if let Some(s) = &n.separator {
        attrs.push(("separator", s.clone()));
    }
    if let Some(c) = &n.components {
        attrs.push(("components", c.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")));
    }
    w.empty("notation", &attrs);
}

pub fn write_term(w: &mut XmlWriter, t: &Term, base: &MmtUri) {
    match t {
        Term::Sym(u) => w.empty("OMS", &[("path", u.relative_to(base))]),
        Term::Var(n) => w.empty("OMV", &[("name", n.clone())]),
        Term::Apply { head, args } => {
            w.open("OMA", &[]);
            write_term(w, head, base);
            for a in args {
                write_term(w, a, base);
            }
            w.close("OMA");
        }
        Term::Bind { binder, vars, body } => {
            w.open("OMBIND", &[]);
            write_term(w, binder, base);
            w.open("OMBVAR", &[]);
            for v in vars {
                match &v.tp {
                    None => w.empty("OMV", &[("name", v.name.clone())]),
                    Some(tp) => {
                        w.open("OMV", &[("name", v.name.clone())]);
                        write_term(w, tp, base);
                        w.close("OMV");
                    }
                }
            }
            w.close("OMBVAR");
            write_term(w, body, base);
            w.close("OMBIND");
        }
    }
}

/// Serializes a morphism the way `assign/@morphism` does.
pub fn format_morphism(m: &Morphism, base: &MmtUri) -> String {
    m.format_relative(base)
}
