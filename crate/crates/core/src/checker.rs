//! Structural validation of atom streams and foundation-specific (typed)
//! validation through stateless plugins.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::abox::{FactIndex, RelName, UnaryType};
use crate::flatten::Flattener;
use crate::model::{
    alpha_eq, atomize, Assignment, AtomPayload, AtomicDecl, Declaration, Document, Module, Morphism, Term, TheoryGraph,
    META,
};
use crate::reader::{parse_document_with_sources, ReadError, SourceRef, XmlWriter};
use crate::uri::{LocalName, MmtUri};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Grammar,
    Structural,
    Typed,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Grammar => "grammar",
            Level::Structural => "structural",
            Level::Typed => "typed",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "grammar" => Ok(Level::Grammar),
            "structural" => Ok(Level::Structural),
            "typed" => Ok(Level::Typed),
            other => Err(format!("unknown validation level `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    GrammarError,
    MalformedUri,
    DuplicateUri,
    UnresolvedReference,
    ImportCycle,
    MorphismDomainMismatch,
    TypeMismatch,
    UnmappedSymbol,
    MissingPlugin,
    /// Warning: the plugin could not decide a judgment.
    Undecided,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::GrammarError => "GrammarError",
            Code::MalformedUri => "MalformedUri",
            Code::DuplicateUri => "DuplicateUri",
            Code::UnresolvedReference => "UnresolvedReference",
            Code::ImportCycle => "ImportCycle",
            Code::MorphismDomainMismatch => "MorphismDomainMismatch",
            Code::TypeMismatch => "TypeMismatch",
            Code::UnmappedSymbol => "UnmappedSymbol",
            Code::MissingPlugin => "MissingPlugin",
            Code::Undecided => "Undecided",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub level: Level,
    pub code: Code,
    pub uri: Option<MmtUri>,
    pub at: Option<SourceRef>,
    pub message: String,
}

impl Diagnostic {
    fn new(level: Level, code: Code, uri: &MmtUri, message: impl Into<String>) -> Self {
        Diagnostic { level, code, uri: Some(uri.clone()), at: None, message: message.into() }
    }

    fn location(&self) -> String {
        match (&self.uri, &self.at) {
            (Some(u), _) => u.to_string(),
            (None, Some(at)) => at.to_string(),
            (None, None) => "-".into(),
        }
    }
}

impl From<ReadError> for Diagnostic {
    fn from(e: ReadError) -> Self {
        let code = match e {
            ReadError::Grammar { .. } => Code::GrammarError,
            ReadError::MalformedUri { .. } => Code::MalformedUri,
        };
        Diagnostic { level: Level::Grammar, code, uri: None, at: Some(e.source_ref().clone()), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub requested: Level,
    /// The strictest stage passed, if any.
    pub achieved: Option<Level>,
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
    pub declarations: usize,
}

impl ValidationReport {
    fn new(requested: Level) -> Self {
        ValidationReport { requested, achieved: None, errors: Vec::new(), warnings: Vec::new(), declarations: 0 }
    }

    pub fn is_ok(&self) -> bool {
        self.achieved == Some(self.requested)
    }

    /// `(code, uri)` pairs, the order-free verdict.
    pub fn error_set(&self) -> BTreeSet<(Code, Option<MmtUri>)> {
        self.errors.iter().map(|d| (d.code, d.uri.clone())).collect()
    }

    pub fn has_error(&self, code: Code) -> bool {
        self.errors.iter().any(|d| d.code == code)
    }

    fn finish(mut self, passed: Level) -> Self {
        self.errors.sort();
        self.errors.dedup();
        self.warnings.sort();
        self.warnings.dedup();
        if self.errors.is_empty() {
            self.achieved = Some(passed);
        } else {
            self.achieved = match passed {
                Level::Grammar => None,
                Level::Structural => Some(Level::Grammar),
                Level::Typed => Some(Level::Structural),
            };
        }
        self
    }

    /// One `LEVEL code uri message` line per diagnostic, then a summary line.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (d, warn) in self.errors.iter().map(|d| (d, false)).chain(self.warnings.iter().map(|d| (d, true))) {
            let level = d.level.as_str().to_uppercase();
            let kind = if warn { "WARNING " } else { "" };
            out.push_str(&format!("{level} {kind}{} {} {}\n", d.code, d.location(), d.message.replace('\n', " ")));
        }
        out.push_str(&format!(
            "RESULT {} {} errors={} warnings={} declarations={}\n",
            self.achieved.map_or("none", Level::as_str),
            self.requested,
            self.errors.len(),
            self.warnings.len(),
            self.declarations
        ));
        out
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        let attrs = [
            ("requested", self.requested.to_string()),
            ("achieved", self.achieved.map_or("none", Level::as_str).to_string()),
            ("declarations", self.declarations.to_string()),
        ];
        if self.errors.is_empty() && self.warnings.is_empty() {
            w.empty("report", &attrs);
            return w.finish();
        }
        w.open("report", &attrs);
        for (tag, list) in [("error", &self.errors), ("warning", &self.warnings)] {
            for d in list {
                let mut a = vec![("level", d.level.to_string()), ("code", d.code.to_string())];
                if let Some(u) = &d.uri {
                    a.push(("uri", u.to_string()));
                }
                if let Some(at) = &d.at {
                    a.push(("at", at.to_string()));
                }
                w.text_element(tag, &a, &d.message);
            }
        }
        w.close("report");
        w.finish()
    }
}

/// What the resolver knows about an individual, from local atoms or from
/// the context ABox.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Theory { meta: Option<MmtUri> },
    View { from: MmtUri, to: MmtUri },
    Style,
    Constant,
    Import { from: MmtUri },
    Other,
}

struct Resolver<'a> {
    local: HashMap<MmtUri, &'a AtomPayload>,
    local_docs: HashSet<MmtUri>,
    context: &'a FactIndex,
}

const MAX_PATH_DEPTH: usize = 64;

impl Resolver<'_> {
    fn kind(&self, u: &MmtUri) -> Option<Kind> {
        if let Some(p) = self.local.get(u) {
            return Some(match p {
                AtomPayload::TheoryHeader { meta } => Kind::Theory { meta: meta.clone() },
                AtomPayload::ViewHeader { from, to } => Kind::View { from: from.clone(), to: to.clone() },
                AtomPayload::StyleHeader { .. } => Kind::Style,
                AtomPayload::Constant { .. } => Kind::Constant,
                AtomPayload::ImportHeader { from } => Kind::Import { from: from.clone() },
                _ => Kind::Other,
            });
        }
        // Context facts about documents being validated are stale.
        if self.local_docs.contains(&u.doc_uri()) {
            return None;
        }
        let types = self.context.types_of(u);
        let single = |r: RelName| self.context.objects(r, u).into_iter().next();
        let t = types.iter().next()?;
        Some(match t {
            UnaryType::Theory => Kind::Theory { meta: single(RelName::HasMetaTheory) },
            UnaryType::View => Kind::View { from: single(RelName::HasDomain)?, to: single(RelName::HasCodomain)? },
            UnaryType::Style => Kind::Style,
            UnaryType::Constant | UnaryType::UntypedConstant => Kind::Constant,
            UnaryType::Import => Kind::Import { from: single(RelName::HasDomain)? },
            _ => Kind::Other,
        })
    }

    fn is_theory(&self, u: &MmtUri) -> bool {
        matches!(self.kind(u), Some(Kind::Theory { .. }))
    }

    fn meta_of(&self, t: &MmtUri) -> Option<MmtUri> {
        match self.kind(t) {
            Some(Kind::Theory { meta }) => meta,
            _ => None,
        }
    }

    /// Whether `u` names a syntactic or induced constant.
    fn resolves_constant(&self, u: &MmtUri) -> bool {
        self.resolve_constant_at(u, 0)
    }

    fn resolve_constant_at(&self, u: &MmtUri, depth: usize) -> bool {
        if depth > MAX_PATH_DEPTH {
            return false;
        }
        if self.kind(u) == Some(Kind::Constant) {
            return true;
        }
        let (Some(theory), Some(sym)) = (u.module_uri(), u.symbol()) else { return false };
        let Some(rest) = sym.tail() else { return false };
        if sym.first() == META {
            return match self.meta_of(&theory) {
                Some(m) => self.resolve_constant_at(&m.with_symbol(rest), depth + 1),
                None => false,
            };
        }
        if rest.first() == META {
            return false;
        }
        match self.kind(&theory.with_symbol(LocalName::simple(sym.first()))) {
            Some(Kind::Import { from }) => self.resolve_constant_at(&from.with_symbol(rest), depth + 1),
            _ => false,
        }
    }

    /// Domain of the import path `path` starting in theory `t`.
    fn import_domain(&self, t: &MmtUri, path: &LocalName) -> Option<MmtUri> {
        let mut cur = t.clone();
        for seg in path.segments() {
            match self.kind(&cur.with_symbol(LocalName::simple(seg.clone())))? {
                Kind::Import { from } => cur = from,
                _ => return None,
            }
        }
        Some(cur)
    }

    /// `(domain, codomain)` of a morphism, or a diagnostic message.
    fn morphism_type(&self, m: &Morphism) -> Result<(MmtUri, MmtUri), (Code, String)> {
        match m {
            Morphism::Identity(t) => {
                if self.is_theory(t) {
                    Ok((t.clone(), t.clone()))
                } else {
                    Err((Code::UnresolvedReference, format!("{t} is not a theory")))
                }
            }
            Morphism::ImportLink { theory, path } => match self.import_domain(theory, path) {
                Some(d) => Ok((d, theory.clone())),
                None => Err((
                    Code::UnresolvedReference,
                    format!("import path {} does not resolve", theory.with_symbol(path.clone())),
                )),
            },
            Morphism::ViewLink(v) => match self.kind(v) {
                Some(Kind::View { from, to }) => Ok((from, to)),
                _ => Err((Code::UnresolvedReference, format!("{v} is not a view"))),
            },
            Morphism::Compose(a, b) => {
                let (da, ca) = self.morphism_type(a)?;
                let (db, cb) = self.morphism_type(b)?;
                if ca != db {
                    return Err((
                        Code::MorphismDomainMismatch,
                        format!("cannot compose {a} (codomain {ca}) with {b} (domain {db})"),
                    ));
                }
                Ok((da, cb))
            }
        }
    }

    /// Outgoing import, meta and style-import edges of a module.
    fn module_edges(&self, u: &MmtUri, local_imports: &HashMap<MmtUri, Vec<MmtUri>>) -> Vec<MmtUri> {
        if self.local.contains_key(u) {
            return local_imports.get(u).cloned().unwrap_or_default();
        }
        if self.local_docs.contains(&u.doc_uri()) {
            return Vec::new();
        }
        let mut out: Vec<MmtUri> = Vec::new();
        for r in [RelName::Imports, RelName::HasMetaTheory, RelName::StyleImports] {
            out.extend(self.context.objects(r, u));
        }
        out
    }
}

/// Stage 2: unique URIs, resolvable references, acyclic imports and
/// well-typed morphism compositions. References outside the stream are
/// resolved against `context` only.
pub fn validate_structural(atoms: impl IntoIterator<Item = AtomicDecl>, context: &FactIndex) -> ValidationReport {
    let atoms: Vec<AtomicDecl> = atoms.into_iter().collect();
    let mut report = ValidationReport::new(Level::Structural);
    report.declarations = atoms.len();
    let err = |code: Code, uri: &MmtUri, msg: String| Diagnostic::new(Level::Structural, code, uri, msg);

    let mut local: HashMap<MmtUri, &AtomPayload> = HashMap::new();
    for a in &atoms {
        if local.insert(a.uri.clone(), &a.payload).is_some() {
            report.errors.push(err(Code::DuplicateUri, &a.uri, format!("{} is declared more than once", a.uri)));
        }
    }
    let resolver = Resolver { local_docs: atoms.iter().map(|a| a.uri.doc_uri()).collect(), local, context };

    // Module-level dependency edges among local modules, for cycle detection.
    let mut edges: HashMap<MmtUri, Vec<MmtUri>> = HashMap::new();

    for atom in &atoms {
        let uri = &atom.uri;
        let mut unresolved = |what: &str, target: &MmtUri| {
            report.errors.push(err(Code::UnresolvedReference, uri, format!("{what} {target} does not resolve")));
        };
        let container = atom.container();
        let container_kind = container.as_ref().and_then(|c| resolver.local.get(c).and_then(|_| resolver.kind(c)));
        if let Some(c) = &container {
            if container_kind.is_none() {
                unresolved("container", c);
                continue;
            }
        }
        let module = uri.module_uri().expect("atoms live in modules");
        let check_term = |t: &Term, unresolved: &mut dyn FnMut(&str, &MmtUri)| {
            for s in t.symbols() {
                if !resolver.resolves_constant(&s) {
                    unresolved("symbol", &s);
                }
            }
        };
        match &atom.payload {
            AtomPayload::TheoryHeader { meta } => {
                edges.entry(uri.clone()).or_default();
                if let Some(m) = meta {
                    if !resolver.is_theory(m) {
                        unresolved("meta-theory", m);
                    }
                    edges.entry(uri.clone()).or_default().push(m.clone());
                }
            }
            AtomPayload::ViewHeader { from, to } => {
                for (what, t) in [("domain", from), ("codomain", to)] {
                    if !resolver.is_theory(t) {
                        unresolved(what, t);
                    }
                }
            }
            AtomPayload::StyleHeader { imports } => {
                edges.entry(uri.clone()).or_default();
                for i in imports {
                    if resolver.kind(i) != Some(Kind::Style) {
                        unresolved("style", i);
                    }
                    edges.entry(uri.clone()).or_default().push(i.clone());
                }
            }
            AtomPayload::Constant { tp, def } => {
                for t in tp.iter().chain(def.iter()) {
                    check_term(t, &mut unresolved);
                }
            }
            AtomPayload::ImportHeader { from } => {
                if !resolver.is_theory(from) {
                    unresolved("imported theory", from);
                }
                edges.entry(module.clone()).or_default().push(from.clone());
            }
            AtomPayload::Assignment(a) => {
                let (domain, codomain) = match container_kind {
                    Some(Kind::View { from, to }) => (from, to),
                    Some(Kind::Import { from }) => (from, module.clone()),
                    _ => {
                        unresolved("assignment container", container.as_ref().expect("checked"));
                        continue;
                    }
                };
                match a {
                    Assignment::Const { target, value } => {
                        let t = domain.with_symbol(target.clone());
                        if !resolver.resolves_constant(&t) {
                            unresolved("assignment target", &t);
                        }
                        check_term(value, &mut unresolved);
                    }
                    Assignment::Import { target, value } => {
                        let target_domain = resolver.import_domain(&domain, target);
                        if target_domain.is_none() {
                            unresolved("assigned import", &domain.with_symbol(target.clone()));
                        }
                        match resolver.morphism_type(value) {
                            Err((code, msg)) => report.errors.push(err(code, uri, msg)),
                            Ok((d, c)) => {
                                if let Some(td) = target_domain {
                                    if d != td || c != codomain {
                                        report.errors.push(err(
                                            Code::MorphismDomainMismatch,
                                            uri,
                                            format!("{value} maps {d} to {c}, but {td} to {codomain} is required"),
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            AtomPayload::Notation(_) => {}
        }
    }

    for cycle_root in find_cycles(&resolver, &edges) {
        report.errors.push(err(
            Code::ImportCycle,
            &cycle_root,
            format!("{cycle_root} lies on an import or meta-theory cycle"),
        ));
    }
    report.finish(Level::Structural)
}

/// The minimal URI of every cyclic strongly connected component that
/// contains a local module.
fn find_cycles(resolver: &Resolver, local_edges: &HashMap<MmtUri, Vec<MmtUri>>) -> Vec<MmtUri> {
    let mut g: DiGraph<MmtUri, ()> = DiGraph::new();
    let mut nodes: HashMap<MmtUri, NodeIndex> = HashMap::new();
    let mut queue: Vec<MmtUri> = local_edges.keys().cloned().collect();
    queue.sort();
    let mut node =
        |g: &mut DiGraph<MmtUri, ()>, u: &MmtUri| *nodes.entry(u.clone()).or_insert_with(|| g.add_node(u.clone()));
    let mut seen: HashSet<MmtUri> = queue.iter().cloned().collect();
    while let Some(u) = queue.pop() {
        let from = node(&mut g, &u);
        for v in resolver.module_edges(&u, local_edges) {
            let to = node(&mut g, &v);
            g.add_edge(from, to, ());
            if seen.insert(v.clone()) {
                queue.push(v);
            }
        }
    }
    let mut out = Vec::new();
    for scc in tarjan_scc(&g) {
        let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
        if cyclic && scc.iter().any(|n| resolver.local.contains_key(&g[*n])) {
            out.push(scc.iter().map(|n| g[*n].clone()).min().expect("non-empty"));
        }
    }
    out.sort();
    out
}

/// A plugin's verdict on a judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// Typing and equality judgments of one foundation. Implementations must be
/// stateless and access symbols only through the supplied [`Flattener`].
pub trait FoundationPlugin: Send + Sync {
    /// The meta-theory this plugin serves; `None` serves theories without one.
    fn meta_theory(&self) -> Option<&MmtUri>;
    fn equal(&self, flat: &Flattener, theory: &MmtUri, a: &Term, b: &Term) -> Answer;
    fn has_type(&self, flat: &Flattener, theory: &MmtUri, a: &Term, b: &Term) -> Answer;
}

/// Reference foundation: equality is alpha-equivalence after expanding
/// definitions, and a symbol has exactly its declared type.
#[derive(Debug, Clone)]
pub struct SyntacticFoundation {
    meta: Option<MmtUri>,
    max_depth: usize,
}

pub const DEFAULT_EXPANSION_DEPTH: usize = 64;

/// The reference plugin for theories without a meta-theory.
pub fn syntactic_foundation() -> SyntacticFoundation {
    SyntacticFoundation { meta: None, max_depth: DEFAULT_EXPANSION_DEPTH }
}

impl SyntacticFoundation {
    pub fn for_meta(meta: MmtUri) -> Self {
        SyntacticFoundation { meta: Some(meta), max_depth: DEFAULT_EXPANSION_DEPTH }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }
}

/// Replaces every defined symbol by its definiens once; `None` if nothing
/// was defined.
fn expand_once(flat: &Flattener, t: &Term) -> Option<Term> {
    let mut changed = false;
    let r: Result<Term, std::convert::Infallible> = t.try_map_symbols(&mut |u| {
        Ok(match flat.deref_constant(u).and_then(|c| c.def.clone()) {
            Some(d) => {
                changed = true;
                Some(d)
            }
            None => None,
        })
    });
    let out = r.unwrap_or_else(|e| match e {});
    changed.then_some(out)
}

impl FoundationPlugin for SyntacticFoundation {
    fn meta_theory(&self) -> Option<&MmtUri> {
        self.meta.as_ref()
    }

    fn equal(&self, flat: &Flattener, _theory: &MmtUri, a: &Term, b: &Term) -> Answer {
        let (mut a, mut b) = (a.clone(), b.clone());
        for _ in 0..=self.max_depth {
            if alpha_eq(&a, &b) {
                return Answer::Yes;
            }
            match (expand_once(flat, &a), expand_once(flat, &b)) {
                (None, None) => return Answer::No,
                (ea, eb) => {
                    a = ea.unwrap_or(a);
                    b = eb.unwrap_or(b);
                }
            }
        }
        Answer::Unknown
    }

    fn has_type(&self, flat: &Flattener, theory: &MmtUri, a: &Term, b: &Term) -> Answer {
        let Term::Sym(u) = a else { return Answer::Unknown };
        match flat.deref_constant(u).and_then(|c| c.tp.clone()) {
            Some(tp) => self.equal(flat, theory, &tp, b),
            None => Answer::Unknown,
        }
    }
}

/// Plugins keyed by the meta-theory they serve.
#[derive(Clone, Default)]
pub struct PluginRegistry {
    plugins: HashMap<Option<MmtUri>, Arc<dyn FoundationPlugin>>,
}

impl PluginRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, plugin: Arc<dyn FoundationPlugin>) {
        self.plugins.insert(plugin.meta_theory().cloned(), plugin);
    }

    pub fn with(mut self, plugin: impl FoundationPlugin + 'static) -> Self {
        self.register(Arc::new(plugin));
        self
    }

    pub fn get(&self, meta: Option<&MmtUri>) -> Option<&Arc<dyn FoundationPlugin>> {
        self.plugins.get(&meta.cloned())
    }
}

/// Stage 3 over a structurally valid graph.
pub fn validate_typed(graph: &TheoryGraph, registry: &PluginRegistry) -> ValidationReport {
    let flat = Flattener::new(graph);
    let mut report = ValidationReport::new(Level::Typed);
    let mut missing: BTreeSet<MmtUri> = BTreeSet::new();
    let err = |code: Code, uri: &MmtUri, msg: String| Diagnostic::new(Level::Typed, code, uri, msg);
    let plugin_for = |t: &MmtUri, missing: &mut BTreeSet<MmtUri>| -> Option<Arc<dyn FoundationPlugin>> {
        let meta = graph.theory(t)?.meta.as_ref();
        let p = registry.get(meta).cloned();
        if p.is_none() {
            missing.insert(meta.cloned().unwrap_or_else(|| t.clone()));
        }
        p
    };
    let judge = |report: &mut ValidationReport, answer: Answer, uri: &MmtUri, what: String| match answer {
        Answer::Yes => {}
        Answer::No => report.errors.push(err(Code::TypeMismatch, uri, what)),
        Answer::Unknown => report.warnings.push(err(Code::Undecided, uri, format!("could not decide: {what}"))),
    };
    for (muri, module) in graph.modules() {
        match module {
            Module::Theory(t) => {
                let Some(plugin) = plugin_for(muri, &mut missing) else { continue };
                for d in &t.declarations {
                    report.declarations += 1;
                    if let Declaration::Constant(c) = d {
                        if let (Some(tp), Some(def)) = (&c.tp, &c.def) {
                            let uri = muri.with_symbol(c.name.clone());
                            let answer = plugin.has_type(&flat, muri, def, tp);
                            judge(&mut report, answer, &uri, format!("definiens of {uri} against its type"));
                        }
                    }
                }
            }
            Module::View(v) => {
                let Some(plugin) = plugin_for(&v.to, &mut missing) else { continue };
                if let Err(e) = flat.normalize(&Morphism::ViewLink(muri.clone())) {
                    report.errors.push(err(Code::UnmappedSymbol, muri, e.to_string()));
                }
                for a in &v.assignments {
                    report.declarations += 1;
                    let Assignment::Const { target, value } = a else { continue };
                    let uri = muri.with_symbol(target.clone());
                    let Some(tp) = flat.deref_constant(&v.from.with_symbol(target.clone())).and_then(|c| c.tp.clone())
                    else {
                        continue;
                    };
                    match flat.apply_morphism(&Morphism::ViewLink(muri.clone()), &tp) {
                        Ok(expected) => {
                            let answer = plugin.has_type(&flat, &v.to, value, &expected);
                            judge(&mut report, answer, &uri, format!("value of {uri} against the translated type"));
                        }
                        Err(e) => report.errors.push(err(Code::UnmappedSymbol, &uri, e.to_string())),
                    }
                }
            }
            Module::Style(_) => {}
        }
    }
    for m in missing {
        report.errors.push(err(Code::MissingPlugin, &m, format!("no foundation plugin registered for {m}")));
    }
    report.finish(Level::Typed)
}

/// A source file to validate.
pub struct Source<'a> {
    pub name: &'a str,
    pub bytes: &'a [u8],
}

/// Runs the stages up to `level` over source files. `context` resolves
/// references to other documents; `support` supplies those documents when
/// typed validation needs their content.
pub fn validate_sources(
    sources: &[Source],
    level: Level,
    context: &FactIndex,
    registry: &PluginRegistry,
    support: &[Document],
) -> (ValidationReport, Vec<Document>) {
    let mut docs = Vec::new();
    let mut report = ValidationReport::new(level);
    for s in sources {
        match parse_document_with_sources(s.bytes, &MmtUri::root(), Some(s.name)) {
            Ok((d, _)) => docs.push(d),
            Err(e) => report.errors.push(e.into()),
        }
    }
    let atoms: Vec<AtomicDecl> = docs.iter().flat_map(atomize).collect();
    report.declarations = atoms.len();
    if !report.errors.is_empty() || level == Level::Grammar {
        return (report.finish(Level::Grammar), docs);
    }
    let structural = validate_structural(atoms, context);
    if !structural.is_ok() || level == Level::Structural {
        return (structural, docs);
    }
    let mut graph = TheoryGraph::new();
    let local: HashSet<MmtUri> = docs.iter().map(|d| d.base.clone()).collect();
    for d in support.iter().filter(|d| !local.contains(&d.base)).chain(docs.iter()) {
        if let Err(e) = graph.add_document(d) {
            let mut r = ValidationReport::new(level);
            r.errors.push(Diagnostic {
                level: Level::Typed,
                code: Code::DuplicateUri,
                uri: None,
                at: None,
                message: e.to_string(),
            });
            return (r.finish(Level::Typed), docs);
        }
    }
    let mut typed = validate_typed(&graph, registry);
    // Only the submitted documents are judged here.
    let is_local =
        |d: &Diagnostic| d.uri.as_ref().is_none_or(|u| local.contains(&u.doc_uri()) || d.code == Code::MissingPlugin);
    typed.errors.retain(is_local);
    typed.warnings.retain(is_local);
    typed.declarations = structural.declarations;
    let typed = typed.finish(Level::Typed);
    (typed, docs)
}
