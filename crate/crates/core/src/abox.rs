//! The ontology ABox of a theory graph: typed individuals and binary
//! relations over URIs, a relation-algebra query language, and structure
//! recovery from facts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::model::{atomize, Assignment, AtomPayload, AtomicDecl, Document, Term};
use crate::uri::{parse_uri, MmtUri};

macro_rules! name_enum {
    ($(#[$m:meta])* $ty:ident { $($var:ident => $text:literal),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $ty { $($var),* }

        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),*];

            pub fn as_str(self) -> &'static str {
                match self { $($ty::$var => $text),* }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = AboxError;

            fn from_str(s: &str) -> Result<Self, AboxError> {
                match s {
                    $($text => Ok($ty::$var),)*
                    _ => Err(AboxError::UnknownName(s.to_string())),
                }
            }
        }
    };
}

name_enum! {
    /// Unary predicates (types of individuals).
    UnaryType {
        Document => "document",
        Theory => "theory",
        View => "view",
        Import => "import",
        Constant => "constant",
        ConstantAssignment => "constant-assignment",
        ImportAssignment => "import-assignment",
        Style => "style",
        Notation => "notation",
        UntypedConstant => "untyped-constant",
    }
}

name_enum! {
    /// Binary predicates.
    RelName {
        DeclaredIn => "DeclaredIn",
        HasMetaTheory => "HasMetaTheory",
        HasDomain => "HasDomain",
        HasCodomain => "HasCodomain",
        Imports => "Imports",
        HasOccurrenceOfInType => "HasOccurrenceOfInType",
        HasOccurrenceOfInDefiniens => "HasOccurrenceOfInDefiniens",
        HasAssignmentFor => "HasAssignmentFor",
        DependsOn => "DependsOn",
        HasNotationFor => "HasNotationFor",
        StyleImports => "StyleImports",
    }
}

impl UnaryType {
    pub fn is_module(self) -> bool {
        matches!(self, UnaryType::Theory | UnaryType::View | UnaryType::Style)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AboxError {
    #[error("unknown type or relation `{0}`")]
    UnknownName(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("malformed fact line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("syntax error in relation expression at {pos}: {reason}")]
    Syntax { pos: usize, reason: String },
    #[error("inconsistent facts: {0}")]
    InconsistentFacts(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AboxFact {
    Unary(UnaryType, MmtUri),
    Binary(RelName, MmtUri, MmtUri),
}

impl fmt::Display for AboxFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AboxFact::Unary(t, u) => write!(f, "U {t} {u}"),
            AboxFact::Binary(r, s, o) => write!(f, "B {r} {s} {o}"),
        }
    }
}

pub type FactSet = BTreeSet<AboxFact>;

/// The `.abox` text form: one fact per line, sorted, LF-terminated.
pub fn serialize_facts(facts: &FactSet) -> String {
    let mut lines: Vec<String> = facts.iter().map(|f| f.to_string()).collect();
    lines.sort();
    lines.into_iter().map(|l| l + "\n").collect()
}

pub fn parse_facts(text: &str) -> Result<FactSet, AboxError> {
    let mut out = FactSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| AboxError::MalformedLine { line: i + 1, reason: reason.to_string() };
        let parts: Vec<&str> = line.split(' ').collect();
        let uri = |s: &str| parse_uri(s).map_err(|e| bad(&e.to_string()));
        let fact = match parts.as_slice() {
            ["U", t, u] => AboxFact::Unary(t.parse().map_err(|_| bad("unknown type"))?, uri(u)?),
            ["B", r, s, o] => AboxFact::Binary(r.parse().map_err(|_| bad("unknown relation"))?, uri(s)?, uri(o)?),
            _ => return Err(bad("expected `U <type> <uri>` or `B <rel> <uri> <uri>`")),
        };
        out.insert(fact);
    }
    Ok(out)
}

/// The ABox of one document.
pub fn extract_abox(doc: &Document) -> FactSet {
    let mut ex = Extractor::default();
    ex.add_document(doc);
    ex.finish()
}

/// Incremental fact extraction over an atom stream. Assignment atoms must
/// follow the header of their container (as [`atomize`] guarantees) for
/// `HasAssignmentFor` to be emitted.
#[derive(Debug, Default)]
pub struct Extractor {
    domains: HashMap<MmtUri, MmtUri>,
    facts: FactSet,
}

impl Extractor {
    pub fn add_document(&mut self, doc: &Document) {
        self.facts.insert(AboxFact::Unary(UnaryType::Document, doc.base.clone()));
        for m in &doc.modules {
            self.facts.insert(AboxFact::Binary(RelName::DeclaredIn, doc.module_uri(m), doc.base.clone()));
        }
        for atom in atomize(doc) {
            self.add_atom(&atom);
        }
    }

    pub fn add_atom(&mut self, atom: &AtomicDecl) {
        use AboxFact::{Binary, Unary};
        let out = &mut self.facts;
        let uri = &atom.uri;
        let Some(module) = atom.uri.module_uri() else { return };
        let occurrences = |rel: RelName, t: &Term, out: &mut FactSet| {
            for s in t.symbols() {
                out.insert(Binary(rel, uri.clone(), s));
            }
        };
        match &atom.payload {
            AtomPayload::TheoryHeader { meta } => {
                out.insert(Unary(UnaryType::Theory, uri.clone()));
                if let Some(m) = meta {
                    out.insert(Binary(RelName::HasMetaTheory, uri.clone(), m.clone()));
                }
            }
            AtomPayload::ViewHeader { from, to } => {
                self.domains.insert(uri.clone(), from.clone());
                out.insert(Unary(UnaryType::View, uri.clone()));
                out.insert(Binary(RelName::HasDomain, uri.clone(), from.clone()));
                out.insert(Binary(RelName::HasCodomain, uri.clone(), to.clone()));
            }
            AtomPayload::StyleHeader { imports } => {
                out.insert(Unary(UnaryType::Style, uri.clone()));
                for i in imports {
                    out.insert(Binary(RelName::StyleImports, uri.clone(), i.clone()));
                }
            }
            AtomPayload::Constant { tp, def } => {
                let ty = if tp.is_some() { UnaryType::Constant } else { UnaryType::UntypedConstant };
                out.insert(Unary(ty, uri.clone()));
                out.insert(Binary(RelName::DeclaredIn, uri.clone(), module.clone()));
                if let Some(t) = tp {
                    occurrences(RelName::HasOccurrenceOfInType, t, out);
                }
                if let Some(d) = def {
                    occurrences(RelName::HasOccurrenceOfInDefiniens, d, out);
                }
            }
            AtomPayload::ImportHeader { from } => {
                self.domains.insert(uri.clone(), from.clone());
                out.insert(Unary(UnaryType::Import, uri.clone()));
                out.insert(Binary(RelName::DeclaredIn, uri.clone(), module.clone()));
                out.insert(Binary(RelName::HasDomain, uri.clone(), from.clone()));
                out.insert(Binary(RelName::HasCodomain, uri.clone(), module.clone()));
                out.insert(Binary(RelName::Imports, module.clone(), from.clone()));
            }
            AtomPayload::Assignment(a) => {
                let container = atom.container().expect("assignments have containers");
                out.insert(Binary(RelName::DeclaredIn, uri.clone(), container.clone()));
                match a {
                    Assignment::Const { value, .. } => {
                        out.insert(Unary(UnaryType::ConstantAssignment, uri.clone()));
                        occurrences(RelName::HasOccurrenceOfInDefiniens, value, out);
                    }
                    Assignment::Import { value, .. } => {
                        out.insert(Unary(UnaryType::ImportAssignment, uri.clone()));
                        for l in value.link_uris() {
                            out.insert(Binary(RelName::HasOccurrenceOfInDefiniens, uri.clone(), l));
                        }
                    }
                }
                if let Some(domain) = self.domains.get(&container) {
                    out.insert(Binary(RelName::HasAssignmentFor, uri.clone(), domain.with_symbol(a.target().clone())));
                }
            }
            AtomPayload::Notation(n) => {
                out.insert(Unary(UnaryType::Notation, uri.clone()));
                out.insert(Binary(RelName::DeclaredIn, uri.clone(), module.clone()));
                if !n.applies_to.is_root() {
                    out.insert(Binary(RelName::HasNotationFor, uri.clone(), n.applies_to.clone()));
                }
            }
        }
        for m in atom.referenced_modules() {
            out.insert(Binary(RelName::DependsOn, module.clone(), m));
        }
    }

    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    pub fn finish(self) -> FactSet {
        self.facts
    }
}

/// Facts indexed by subject and by object for every relation. Lookups are
/// counted per relation so callers can assert which indexes were consulted.
#[derive(Debug, Default)]
pub struct FactIndex {
    types: HashMap<MmtUri, BTreeSet<UnaryType>>,
    by_type: BTreeMap<UnaryType, BTreeSet<MmtUri>>,
    forward: HashMap<RelName, HashMap<MmtUri, BTreeSet<MmtUri>>>,
    backward: HashMap<RelName, HashMap<MmtUri, BTreeSet<MmtUri>>>,
    touches: [AtomicUsize; 11],
    unary_touches: AtomicUsize,
}

impl FactIndex {
    pub fn new(facts: &FactSet) -> Self {
        let mut idx = FactIndex::default();
        idx.extend(facts);
        idx
    }

    pub fn extend<'a>(&mut self, facts: impl IntoIterator<Item = &'a AboxFact>) {
        for f in facts {
            match f {
                AboxFact::Unary(t, u) => {
                    self.types.entry(u.clone()).or_default().insert(*t);
                    self.by_type.entry(*t).or_default().insert(u.clone());
                }
                AboxFact::Binary(r, s, o) => {
                    self.forward.entry(*r).or_default().entry(s.clone()).or_default().insert(o.clone());
                    self.backward.entry(*r).or_default().entry(o.clone()).or_default().insert(s.clone());
                }
            }
        }
    }

    fn touch(&self, r: RelName) {
        self.touches[r as usize].fetch_add(1, Ordering::Relaxed);
    }

    pub fn types_of(&self, u: &MmtUri) -> BTreeSet<UnaryType> {
        self.unary_touches.fetch_add(1, Ordering::Relaxed);
        self.types.get(u).cloned().unwrap_or_default()
    }

    pub fn has_type(&self, u: &MmtUri, t: UnaryType) -> bool {
        self.unary_touches.fetch_add(1, Ordering::Relaxed);
        self.types.get(u).is_some_and(|ts| ts.contains(&t))
    }

    pub fn is_module(&self, u: &MmtUri) -> bool {
        self.types_of(u).iter().any(|t| t.is_module())
    }

    pub fn individuals(&self, t: UnaryType) -> BTreeSet<MmtUri> {
        self.unary_touches.fetch_add(1, Ordering::Relaxed);
        self.by_type.get(&t).cloned().unwrap_or_default()
    }

    pub fn objects(&self, r: RelName, subject: &MmtUri) -> BTreeSet<MmtUri> {
        self.touch(r);
        self.forward.get(&r).and_then(|m| m.get(subject)).cloned().unwrap_or_default()
    }

    pub fn subjects(&self, r: RelName, object: &MmtUri) -> BTreeSet<MmtUri> {
        self.touch(r);
        self.backward.get(&r).and_then(|m| m.get(object)).cloned().unwrap_or_default()
    }

    /// Number of lookups served from the index of `r` so far.
    pub fn touches(&self, r: RelName) -> usize {
        self.touches[r as usize].load(Ordering::Relaxed)
    }

    pub fn unary_touches(&self) -> usize {
        self.unary_touches.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        for t in &self.touches {
            t.store(0, Ordering::Relaxed);
        }
        self.unary_touches.store(0, Ordering::Relaxed);
    }

    /// All `(subject, object)` pairs of `r`, sorted.
    pub fn pairs(&self, r: RelName) -> Vec<(MmtUri, MmtUri)> {
        let mut out: Vec<_> = self
            .forward
            .get(&r)
            .into_iter()
            .flat_map(|m| m.iter().flat_map(|(s, os)| os.iter().map(move |o| (s.clone(), o.clone()))))
            .collect();
        out.sort();
        out
    }

    pub fn facts(&self) -> FactSet {
        let mut out = FactSet::new();
        for (u, ts) in &self.types {
            out.extend(ts.iter().map(|t| AboxFact::Unary(*t, u.clone())));
        }
        for r in RelName::ALL {
            out.extend(self.pairs(*r).into_iter().map(|(s, o)| AboxFact::Binary(*r, s, o)));
        }
        out
    }
}

/// Relation expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Base(RelName),
    Inverse(Box<RelExpr>),
    Compose(Box<RelExpr>, Box<RelExpr>),
    Union(Box<RelExpr>, Box<RelExpr>),
    TransClosure(Box<RelExpr>),
}

impl RelExpr {
    pub fn inverse(e: RelExpr) -> RelExpr {
        RelExpr::Inverse(Box::new(e))
    }

    pub fn compose(a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Compose(Box::new(a), Box::new(b))
    }

    pub fn union(a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn closure(e: RelExpr) -> RelExpr {
        RelExpr::TransClosure(Box::new(e))
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelExpr::Base(r) => write!(f, "{r}"),
            RelExpr::Inverse(e) => write!(f, "({e})^-1"),
            RelExpr::Compose(a, b) => write!(f, "({a} ; {b})"),
            RelExpr::Union(a, b) => write!(f, "({a} | {b})"),
            RelExpr::TransClosure(e) => write!(f, "({e})+"),
        }
    }
}

impl FromStr for RelExpr {
    type Err = AboxError;

    fn from_str(s: &str) -> Result<Self, AboxError> {
        parse_rel_expr(s)
    }
}

/// Parses `R`, `e^-1`, `e+`, `a ; b`, `a | b` and parentheses. Postfix
/// operators bind tightest, then `;`, then `|`.
pub fn parse_rel_expr(text: &str) -> Result<RelExpr, AboxError> {
    let mut p = ExprParser { s: text.as_bytes(), pos: 0 };
    let e = p.union()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, reason: &str) -> AboxError {
        AboxError::Syntax { pos: self.pos, reason: reason.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.s.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn union(&mut self) -> Result<RelExpr, AboxError> {
        let mut e = self.compose()?;
        while self.eat("|") {
            e = RelExpr::union(e, self.compose()?);
        }
        Ok(e)
    }

    fn compose(&mut self) -> Result<RelExpr, AboxError> {
        let mut e = self.postfix()?;
        while self.eat(";") {
            e = RelExpr::compose(e, self.postfix()?);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<RelExpr, AboxError> {
        let mut e = self.atom()?;
        loop {
            if self.eat("+") {
                e = RelExpr::closure(e);
            } else if self.eat("^-1") {
                e = RelExpr::inverse(e);
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<RelExpr, AboxError> {
        if self.eat("(") {
            let e = self.union()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        self.skip_ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_' || *c == b'-') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a relation name or `(`"));
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        name.parse::<RelName>().map(RelExpr::Base).map_err(|_| AboxError::UnknownRelation(name.to_string()))
    }
}

/// All individuals related to `start` by `e`.
pub fn query(index: &FactIndex, start: &MmtUri, e: &RelExpr) -> BTreeSet<MmtUri> {
    eval(index, &BTreeSet::from([start.clone()]), e, false)
}

/// [`query`] over a plain fact set.
pub fn query_facts(facts: &FactSet, start: &MmtUri, e: &RelExpr) -> BTreeSet<MmtUri> {
    query(&FactIndex::new(facts), start, e)
}

/// Evaluates `e` (or its inverse when `inv`) on a set of individuals;
/// inversion is pushed down to the base relations.
fn eval(idx: &FactIndex, from: &BTreeSet<MmtUri>, e: &RelExpr, inv: bool) -> BTreeSet<MmtUri> {
    match e {
        RelExpr::Base(r) => {
            let mut out = BTreeSet::new();
            for u in from {
                out.extend(if inv { idx.subjects(*r, u) } else { idx.objects(*r, u) });
            }
            out
        }
        RelExpr::Inverse(e) => eval(idx, from, e, !inv),
        RelExpr::Compose(a, b) => {
            let (first, second) = if inv { (b, a) } else { (a, b) };
            eval(idx, &eval(idx, from, first, inv), second, inv)
        }
        RelExpr::Union(a, b) => {
            let mut out = eval(idx, from, a, inv);
            out.extend(eval(idx, from, b, inv));
            out
        }
        RelExpr::TransClosure(e) => {
            let mut result = eval(idx, from, e, inv);
            let mut frontier = result.clone();
            while !frontier.is_empty() {
                let next: BTreeSet<MmtUri> = eval(idx, &frontier, e, inv).difference(&result).cloned().collect();
                result.extend(next.iter().cloned());
                frontier = next;
            }
            result
        }
    }
}

/// The declaration skeleton of a set of documents: containment, imports,
/// views, domains and occurrences, without term bodies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Skeleton {
    pub documents: BTreeMap<MmtUri, BTreeMap<MmtUri, ModuleSkeleton>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleSkeleton {
    Theory {
        meta: Option<MmtUri>,
        constants: BTreeMap<MmtUri, ConstantSkeleton>,
        imports: BTreeMap<MmtUri, ImportSkeleton>,
        notations: BTreeMap<MmtUri, Option<MmtUri>>,
    },
    View {
        from: MmtUri,
        to: MmtUri,
        assignments: BTreeMap<MmtUri, AssignmentSkeleton>,
    },
    Style {
        imports: BTreeSet<MmtUri>,
        notations: BTreeMap<MmtUri, Option<MmtUri>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstantSkeleton {
    pub typed: bool,
    pub type_occurrences: BTreeSet<MmtUri>,
    pub def_occurrences: BTreeSet<MmtUri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportSkeleton {
    pub from: MmtUri,
    pub assignments: BTreeMap<MmtUri, AssignmentSkeleton>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentSkeleton {
    pub import: bool,
    pub target: MmtUri,
    pub occurrences: BTreeSet<MmtUri>,
}

/// Rebuilds the skeleton of the documents whose ABox is `facts`.
pub fn recover_structure(facts: &FactSet) -> Result<Skeleton, AboxError> {
    let idx = FactIndex::new(facts);
    let bad = |m: String| AboxError::InconsistentFacts(m);
    let mut placed: BTreeSet<MmtUri> = BTreeSet::new();
    let mut sk = Skeleton::default();

    let single = |r: RelName, s: &MmtUri| -> Result<MmtUri, AboxError> {
        let os = idx.objects(r, s);
        match os.len() {
            1 => Ok(os.into_iter().next().expect("one element")),
            n => Err(bad(format!("{s} has {n} {r} facts, expected 1"))),
        }
    };
    let optional = |r: RelName, s: &MmtUri| -> Result<Option<MmtUri>, AboxError> {
        let os = idx.objects(r, s);
        match os.len() {
            0 => Ok(None),
            1 => Ok(os.into_iter().next()),
            n => Err(bad(format!("{s} has {n} {r} facts, expected at most 1"))),
        }
    };
    let assignment = |a: &MmtUri| -> Result<AssignmentSkeleton, AboxError> {
        let import = idx.has_type(a, UnaryType::ImportAssignment);
        if !import && !idx.has_type(a, UnaryType::ConstantAssignment) {
            return Err(bad(format!("{a} is declared in a view or import but is not an assignment")));
        }
        Ok(AssignmentSkeleton {
            import,
            target: single(RelName::HasAssignmentFor, a)?,
            occurrences: idx.objects(RelName::HasOccurrenceOfInDefiniens, a),
        })
    };

    let mut modules: BTreeSet<MmtUri> = BTreeSet::new();
    for t in [UnaryType::Theory, UnaryType::View, UnaryType::Style] {
        modules.extend(idx.individuals(t));
    }
    for d in idx.individuals(UnaryType::Document) {
        sk.documents.entry(d).or_default();
    }
    for m in &modules {
        let doc = match optional(RelName::DeclaredIn, m)? {
            Some(d) if idx.has_type(&d, UnaryType::Document) => d,
            Some(d) => return Err(bad(format!("module {m} is declared in {d}, which is not a document"))),
            None => m.doc_uri(),
        };
        let types = idx.types_of(m);
        if types.len() != 1 {
            return Err(bad(format!("{m} has {} types", types.len())));
        }
        let children = idx.subjects(RelName::DeclaredIn, m);
        let mut notations = BTreeMap::new();
        for c in &children {
            if idx.has_type(c, UnaryType::Notation) {
                notations.insert(c.clone(), optional(RelName::HasNotationFor, c)?);
            }
        }
        let skel = match types.first().expect("one type") {
            UnaryType::Theory => {
                let mut constants = BTreeMap::new();
                let mut imports = BTreeMap::new();
                for c in &children {
                    let ts = idx.types_of(c);
                    if ts.contains(&UnaryType::Constant) || ts.contains(&UnaryType::UntypedConstant) {
                        constants.insert(
                            c.clone(),
                            ConstantSkeleton {
                                typed: ts.contains(&UnaryType::Constant),
                                type_occurrences: idx.objects(RelName::HasOccurrenceOfInType, c),
                                def_occurrences: idx.objects(RelName::HasOccurrenceOfInDefiniens, c),
                            },
                        );
                    } else if ts.contains(&UnaryType::Import) {
                        let mut assignments = BTreeMap::new();
                        for a in idx.subjects(RelName::DeclaredIn, c) {
                            assignments.insert(a.clone(), assignment(&a)?);
                            placed.insert(a);
                        }
                        imports.insert(c.clone(), ImportSkeleton { from: single(RelName::HasDomain, c)?, assignments });
                    } else if !ts.contains(&UnaryType::Notation) {
                        return Err(bad(format!("{c} is declared in theory {m} but has no declaration type")));
                    }
                    placed.insert(c.clone());
                }
                ModuleSkeleton::Theory { meta: optional(RelName::HasMetaTheory, m)?, constants, imports, notations }
            }
            UnaryType::View => {
                let mut assignments = BTreeMap::new();
                for a in &children {
                    assignments.insert(a.clone(), assignment(a)?);
                    placed.insert(a.clone());
                }
                ModuleSkeleton::View {
                    from: single(RelName::HasDomain, m)?,
                    to: single(RelName::HasCodomain, m)?,
                    assignments,
                }
            }
            UnaryType::Style => {
                for c in &children {
                    if !idx.has_type(c, UnaryType::Notation) {
                        return Err(bad(format!("{c} is declared in style {m} but is not a notation")));
                    }
                    placed.insert(c.clone());
                }
                ModuleSkeleton::Style { imports: idx.objects(RelName::StyleImports, m), notations }
            }
            other => return Err(bad(format!("{m} has non-module type {other}"))),
        };
        placed.insert(m.clone());
        sk.documents.entry(doc).or_default().insert(m.clone(), skel);
    }
    // Every typed individual must have found its place, and every
    // containment edge must point at a container.
    for t in UnaryType::ALL {
        if *t == UnaryType::Document {
            continue;
        }
        for u in idx.individuals(*t) {
            if !placed.contains(&u) {
                return Err(bad(format!("{t} {u} is not declared in any module")));
            }
        }
    }
    for (s, o) in idx.pairs(RelName::DeclaredIn) {
        if !placed.contains(&s) && !idx.has_type(&s, UnaryType::Document) {
            return Err(bad(format!("{s} is declared in {o} but has no type")));
        }
        if !(modules.contains(&o) || idx.has_type(&o, UnaryType::Import) || idx.has_type(&o, UnaryType::Document)) {
            return Err(bad(format!("{s} is declared in {o}, which is not a container")));
        }
    }
    Ok(sk)
}
