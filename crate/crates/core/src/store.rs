//! A file-backed, versioned document store.
//!
//! ```text
//! root/
//!   docs/<mirror>            committed documents, mirrored by URI path
//!   abox/<mirror>.abox       their fact files
//!   index/<Relation>.idx     sorted `subject TAB object` lines
//!   index/types.idx          sorted `type TAB individual` lines
//!   catalog.json             [{"prefix": ..., "location": ...}]
//!   history/manifests/N.json revision N: metadata and doc -> blob map
//!   history/blobs/<sha256>   content-addressed document snapshots
//! ```
//!
//! Commits are serialized through one writer lock; readers work on an
//! immutable snapshot and never see a half-applied commit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::abox::{extract_abox, parse_facts, query, serialize_facts, FactIndex, FactSet, RelExpr, RelName, UnaryType};
use crate::checker::{validate_sources, validate_structural, Level, PluginRegistry, Source, ValidationReport};
use crate::cones::{cone, ConeError, Direction};
use crate::flatten::{Flattener, Resolved};
use crate::model::atoms::atomize;
use crate::model::{Document, Item, Module, Notation, TheoryGraph};
use crate::present::{render, resolve_style, PresentError, RenderItem, ResolvedStyle, Target};
use crate::reader::{
    parse_document, parses_on_this_thread, serialize_document, write_assignment, write_constant, write_module,
    write_notation, XmlWriter,
};
use crate::uri::{LocalName, MmtUri};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("validation rejected the commit ({} error(s))", .0.errors.len())]
    ValidationRejected(Box<ValidationReport>),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("unknown revision {0}")]
    RevisionUnknown(u64),
    #[error("name already in use: {0}")]
    NameClash(MmtUri),
    #[error("unknown module {0}")]
    UnknownModule(MmtUri),
    #[error("catalog conflict for prefix {0}")]
    CatalogConflict(String),
    #[error("remote retrieval failed: {0}")]
    Remote(String),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Present(#[from] PresentError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ConeError> for StoreError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::UnknownModule(u) => StoreError::UnknownModule(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub number: u64,
    pub timestamp: u64,
    pub author: String,
    pub message: String,
    pub changed: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    #[serde(flatten)]
    revision: Revision,
    /// Document URI to blob hash.
    documents: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub prefix: String,
    pub location: String,
}

/// Maps document URI prefixes to local paths or remote URLs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn insert(&mut self, entry: CatalogEntry) -> Result<(), StoreError> {
        match self.entries.iter().find(|e| e.prefix == entry.prefix) {
            Some(e) if e.location == entry.location => Ok(()),
            Some(_) => Err(StoreError::CatalogConflict(entry.prefix)),
            None => {
                self.entries.push(entry);
                self.entries.sort_by(|a, b| a.prefix.cmp(&b.prefix));
                Ok(())
            }
        }
    }

    /// Longest-prefix match; returns the entry and the unmatched rest.
    pub fn lookup<'a>(&self, doc: &'a str) -> Option<(&CatalogEntry, &'a str)> {
        self.entries
            .iter()
            .filter(|e| doc.starts_with(&e.prefix))
            .max_by_key(|e| e.prefix.len())
            .map(|e| (e, &doc[e.prefix.len()..]))
    }
}

#[derive(Clone)]
pub struct StoreConfig {
    pub author: String,
    /// Run foundation checks at commit time.
    pub typed: bool,
    pub registry: PluginRegistry,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { author: "mmt".into(), typed: false, registry: PluginRegistry::new() }
    }
}

/// The result of [`Store::retrieve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Retrieved {
    Document(Vec<u8>),
    Item(String),
}

/// Notations gathered for presenting an item, with the number of documents
/// that had to be opened.
#[derive(Debug, Clone)]
pub struct NotationCollection {
    pub notations: Vec<Notation>,
    pub documents_opened: usize,
}

struct State {
    revision: u64,
    /// Document URI to blob hash.
    docs: BTreeMap<MmtUri, String>,
    facts: BTreeMap<MmtUri, FactSet>,
    index: FactIndex,
    catalog: Catalog,
    parsed: Mutex<HashMap<MmtUri, Arc<Document>>>,
    graph: OnceLock<Arc<TheoryGraph>>,
}

pub struct Store {
    root: PathBuf,
    config: StoreConfig,
    state: RwLock<Arc<State>>,
    writer: Mutex<()>,
    last_commit_parses: Mutex<u64>,
}

/// Relative file path mirroring a document URI (scheme dropped).
pub fn mirror_path(doc: &MmtUri) -> PathBuf {
    let s = doc.doc_str();
    let rest = match s.find("://") {
        Some(i) => &s[i + 3..],
        None => s.split_once(':').map_or(s, |(_, r)| r),
    };
    let mut p = PathBuf::new();
    for seg in rest.split('/') {
        let mut enc = String::new();
        for c in seg.chars() {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_' | '~') {
                enc.push(c);
            } else {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    enc.push_str(&format!("%{b:02X}"));
                }
            }
        }
        match enc.as_str() {
            "" => enc = "%".into(),
            "." | ".." => enc = enc.replace('.', "%2E"),
            _ => {}
        }
        p.push(enc);
    }
    p
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn renamed(m: &Module, name: LocalName) -> Module {
    let mut m = m.clone();
    match &mut m {
        Module::Theory(t) => t.name = name,
        Module::View(v) => v.name = name,
        Module::Style(s) => s.name = name,
    }
    m
}

impl Store {
    /// Opens the store at `root`, creating an empty one if needed.
    pub fn open(root: impl Into<PathBuf>, config: StoreConfig) -> Result<Store, StoreError> {
        let root = root.into();
        for d in ["docs", "abox", "index", "history/manifests", "history/blobs"] {
            fs::create_dir_all(root.join(d))?;
        }
        let catalog: Catalog = match fs::read(root.join("catalog.json")) {
            Ok(b) => serde_json::from_slice(&b).map_err(|e| StoreError::Corrupt(format!("catalog.json: {e}")))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Catalog::default(),
            Err(e) => return Err(e.into()),
        };
        let mut latest: Option<Manifest> = None;
        for entry in fs::read_dir(root.join("history/manifests"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let m: Manifest = serde_json::from_slice(&fs::read(&path)?)
                    .map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display())))?;
                if latest.as_ref().is_none_or(|l| m.revision.number > l.revision.number) {
                    latest = Some(m);
                }
            }
        }
        let mut docs = BTreeMap::new();
        let mut facts = BTreeMap::new();
        if let Some(m) = &latest {
            for (d, sha) in &m.documents {
                let doc: MmtUri = d.parse().map_err(|e| StoreError::Corrupt(format!("{e}")))?;
                let abox_path = root.join("abox").join(mirror_path(&doc)).with_added_extension("abox");
                let text = fs::read_to_string(&abox_path)?;
                let f = parse_facts(&text).map_err(|e| StoreError::Corrupt(format!("{}: {e}", abox_path.display())))?;
                facts.insert(doc.clone(), f);
                docs.insert(doc, sha.clone());
            }
        }
        let state = State::new(latest.map_or(0, |m| m.revision.number), docs, facts, catalog);
        Ok(Store {
            root,
            config,
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
            last_commit_parses: Mutex::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn snapshot(&self) -> Arc<State> {
        self.state.read().expect("state lock").clone()
    }

    pub fn revision(&self) -> u64 {
        self.snapshot().revision
    }

    pub fn documents(&self) -> Vec<MmtUri> {
        self.snapshot().docs.keys().cloned().collect()
    }

    pub fn catalog(&self) -> Catalog {
        self.snapshot().catalog.clone()
    }

    /// Documents parsed by the most recent commit.
    pub fn last_commit_parses(&self) -> u64 {
        *self.last_commit_parses.lock().expect("counter lock")
    }

    /// The union of all stored facts.
    pub fn facts(&self) -> FactSet {
        self.snapshot().facts.values().flatten().cloned().collect()
    }

    pub fn with_index<R>(&self, f: impl FnOnce(&FactIndex) -> R) -> R {
        f(&self.snapshot().index)
    }

    pub fn query(&self, start: &MmtUri, e: &RelExpr) -> BTreeSet<MmtUri> {
        query(&self.snapshot().index, start, e)
    }

    pub fn cone(&self, m: &MmtUri, dir: Direction, transitive: bool) -> Result<BTreeSet<MmtUri>, StoreError> {
        Ok(cone(&self.snapshot().index, m, dir, transitive)?)
    }

    /// The stored fact file of a document.
    pub fn abox(&self, doc: &MmtUri) -> Result<String, StoreError> {
        let state = self.snapshot();
        let facts = state.facts.get(&doc.doc_uri()).ok_or_else(|| StoreError::NotFound(doc.to_string()))?;
        Ok(serialize_facts(facts))
    }

    /// Validates without committing, against the stored facts.
    pub fn validate(&self, files: &[(String, Vec<u8>)], level: Level) -> ValidationReport {
        let state = self.snapshot();
        let sources: Vec<Source> = files.iter().map(|(n, b)| Source { name: n, bytes: b }).collect();
        let support = if level == Level::Typed { self.support(&state) } else { Ok(Vec::new()) };
        let support = support.unwrap_or_default();
        validate_sources(&sources, level, &state.index, &self.config.registry, &support).0
    }

    fn support(&self, state: &State) -> Result<Vec<Document>, StoreError> {
        let g = self.graph_of(state)?;
        Ok(g.documents())
    }

    pub fn commit(&self, paths: &[PathBuf], message: &str) -> Result<Revision, StoreError> {
        let mut files = Vec::new();
        for p in paths {
            files.push((p.display().to_string(), fs::read(p)?));
        }
        self.commit_bytes(&files, message)
    }

    /// Grammar and structural checks over exactly the given files, using
    /// the stored facts for everything else; persists on success.
    pub fn commit_bytes(&self, files: &[(String, Vec<u8>)], message: &str) -> Result<Revision, StoreError> {
        let _w = self.writer.lock().expect("writer lock");
        let state = self.snapshot();
        let level = if self.config.typed { Level::Typed } else { Level::Structural };
        let support = if self.config.typed { self.support(&state)? } else { Vec::new() };
        let before = parses_on_this_thread();
        let sources: Vec<Source> = files.iter().map(|(n, b)| Source { name: n, bytes: b }).collect();
        let (report, docs) = validate_sources(&sources, level, &state.index, &self.config.registry, &support);
        *self.last_commit_parses.lock().expect("counter lock") = parses_on_this_thread() - before;
        if !report.is_ok() {
            return Err(StoreError::ValidationRejected(Box::new(report)));
        }
        let entries: Vec<(Document, Vec<u8>)> = docs.into_iter().zip(files.iter().map(|(_, b)| b.clone())).collect();
        self.install(&state, entries, message)
    }

    fn install(&self, state: &State, entries: Vec<(Document, Vec<u8>)>, message: &str) -> Result<Revision, StoreError> {
        let mut docs = state.docs.clone();
        let mut facts = state.facts.clone();
        let mut catalog = state.catalog.clone();
        let mut changed = Vec::new();
        let mut parsed: HashMap<MmtUri, Arc<Document>> = state.parsed.lock().expect("cache lock").clone();
        for (doc, bytes) in entries {
            let sha = sha256_hex(&bytes);
            let blob = self.root.join("history/blobs").join(&sha);
            if !blob.exists() {
                write_file(&blob, &bytes)?;
            }
            let mirror = mirror_path(&doc.base);
            write_file(&self.root.join("docs").join(&mirror), &bytes)?;
            let f = extract_abox(&doc);
            write_file(
                &self.root.join("abox").join(&mirror).with_added_extension("abox"),
                serialize_facts(&f).as_bytes(),
            )?;
            let location = Path::new("docs").join(&mirror).to_string_lossy().replace('\\', "/");
            catalog.insert(CatalogEntry { prefix: doc.base.to_string(), location })?;
            changed.push(format!("docs/{}", mirror.to_string_lossy()));
            facts.insert(doc.base.clone(), f);
            docs.insert(doc.base.clone(), sha);
            parsed.insert(doc.base.clone(), Arc::new(doc));
        }
        changed.sort();
        let next = State::new(state.revision + 1, docs, facts, catalog);
        *next.parsed.lock().expect("cache lock") = parsed;
        next.write_index(&self.root)?;
        write_file(
            &self.root.join("catalog.json"),
            serde_json::to_string_pretty(&next.catalog).expect("catalog serializes").as_bytes(),
        )?;
        let revision = Revision {
            number: next.revision,
            timestamp: now(),
            author: self.config.author.clone(),
            message: message.to_string(),
            changed,
        };
        let manifest = Manifest {
            revision: revision.clone(),
            documents: next.docs.iter().map(|(d, s)| (d.to_string(), s.clone())).collect(),
        };
        write_file(
            &self.root.join(format!("history/manifests/{}.json", revision.number)),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes").as_bytes(),
        )?;
        *self.state.write().expect("state lock") = Arc::new(next);
        Ok(revision)
    }

    fn manifest(&self, at: u64) -> Result<Manifest, StoreError> {
        let path = self.root.join(format!("history/manifests/{at}.json"));
        let bytes = fs::read(&path).map_err(|_| StoreError::RevisionUnknown(at))?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display())))
    }

    fn blob(&self, sha: &str) -> Result<Vec<u8>, StoreError> {
        Ok(fs::read(self.root.join("history/blobs").join(sha))?)
    }

    fn parse_blob(&self, sha: &str) -> Result<Document, StoreError> {
        parse_document(&self.blob(sha)?, &MmtUri::root()).map_err(|e| StoreError::Corrupt(e.to_string()))
    }

    fn document(&self, state: &State, doc: &MmtUri) -> Result<Arc<Document>, StoreError> {
        if let Some(d) = state.parsed.lock().expect("cache lock").get(doc) {
            return Ok(d.clone());
        }
        let sha = state.docs.get(doc).ok_or_else(|| StoreError::NotFound(doc.to_string()))?;
        let d = Arc::new(self.parse_blob(sha)?);
        state.parsed.lock().expect("cache lock").insert(doc.clone(), d.clone());
        Ok(d)
    }

    fn graph_of(&self, state: &State) -> Result<Arc<TheoryGraph>, StoreError> {
        if let Some(g) = state.graph.get() {
            return Ok(g.clone());
        }
        let mut g = TheoryGraph::new();
        for d in state.docs.keys() {
            g.add_document(&*self.document(state, d)?).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        }
        Ok(state.graph.get_or_init(|| Arc::new(g)).clone())
    }

    /// The graph of all documents, at the current or a past revision.
    pub fn graph(&self, at: Option<u64>) -> Result<Arc<TheoryGraph>, StoreError> {
        let state = self.snapshot();
        match at {
            None => self.graph_of(&state),
            Some(r) if r == state.revision => self.graph_of(&state),
            Some(r) => {
                let m = self.manifest(r)?;
                let mut g = TheoryGraph::new();
                for sha in m.documents.values() {
                    g.add_document(&self.parse_blob(sha)?).map_err(|e| StoreError::Corrupt(e.to_string()))?;
                }
                Ok(Arc::new(g))
            }
        }
    }

    /// Bytes of a document, from the store or through the catalog.
    pub fn document_bytes(&self, doc: &MmtUri, at: Option<u64>) -> Result<Vec<u8>, StoreError> {
        let doc = doc.doc_uri();
        let state = self.snapshot();
        if let Some(r) = at.filter(|r| *r != state.revision) {
            let m = self.manifest(r)?;
            let sha = m.documents.get(&doc.to_string()).ok_or_else(|| StoreError::NotFound(doc.to_string()))?;
            return self.blob(sha);
        }
        if let Some(sha) = state.docs.get(&doc) {
            return self.blob(sha);
        }
        let text = doc.to_string();
        let Some((entry, rest)) = state.catalog.lookup(&text) else {
            return Err(StoreError::NotFound(text));
        };
        let location = format!("{}{rest}", entry.location);
        if location.starts_with("http://") || location.starts_with("https://") {
            let mut resp = ureq::get(&location).call().map_err(|e| match e {
                ureq::Error::StatusCode(404) => StoreError::NotFound(text.clone()),
                e => StoreError::Remote(e.to_string()),
            })?;
            resp.body_mut().read_to_vec().map_err(|e| StoreError::Remote(e.to_string()))
        } else {
            let path = Path::new(&location);
            let path = if path.is_absolute() { path.to_path_buf() } else { self.root.join(path) };
            fs::read(path).map_err(|_| StoreError::NotFound(text))
        }
    }

    /// Registers an external location for documents under `prefix`.
    pub fn add_catalog_entry(&self, prefix: &str, location: &str) -> Result<(), StoreError> {
        let _w = self.writer.lock().expect("writer lock");
        let state = self.snapshot();
        let mut catalog = state.catalog.clone();
        catalog.insert(CatalogEntry { prefix: prefix.into(), location: location.into() })?;
        write_file(
            &self.root.join("catalog.json"),
            serde_json::to_string_pretty(&catalog).expect("catalog serializes").as_bytes(),
        )?;
        let next = State::new(state.revision, state.docs.clone(), state.facts.clone(), catalog);
        *next.parsed.lock().expect("cache lock") = state.parsed.lock().expect("cache lock").clone();
        *self.state.write().expect("state lock") = Arc::new(next);
        Ok(())
    }

    /// Graph for resolving `uri`: the store's, plus the document fetched
    /// through the catalog if it is not stored.
    fn graph_for(&self, uri: &MmtUri, at: Option<u64>) -> Result<Arc<TheoryGraph>, StoreError> {
        let g = self.graph(at)?;
        let doc = uri.doc_uri();
        if g.modules().any(|(m, _)| m.doc_uri() == doc) {
            return Ok(g);
        }
        let bytes = self.document_bytes(&doc, at)?;
        let d = parse_document(&bytes, &doc).map_err(|e| StoreError::Remote(e.to_string()))?;
        let mut g = (*g).clone();
        g.add_document(&d).map_err(|e| StoreError::Remote(e.to_string()))?;
        Ok(Arc::new(g))
    }

    /// Documents for doc-level URIs, XML items otherwise.
    pub fn retrieve(&self, uri: &MmtUri, at: Option<u64>) -> Result<Retrieved, StoreError> {
        if uri.is_doc_level() {
            return self.document_bytes(uri, at).map(Retrieved::Document);
        }
        self.deref_xml(uri, at, false).map(Retrieved::Item)
    }

    /// The XML of the item at `uri`; with `self_contained`, a module comes
    /// bundled with the modules it directly depends on.
    pub fn deref_xml(&self, uri: &MmtUri, at: Option<u64>, self_contained: bool) -> Result<String, StoreError> {
        if uri.is_doc_level() {
            let bytes = self.document_bytes(uri, at)?;
            return String::from_utf8(bytes).map_err(|e| StoreError::Corrupt(e.to_string()));
        }
        let g = self.graph_for(uri, at)?;
        let flat = Flattener::new(&g);
        if !(self_contained && uri.is_module_level()) {
            let mut w = XmlWriter::new();
            write_item(&mut w, &flat, uri)?;
            return Ok(w.finish());
        }
        let state = self.snapshot();
        let deps = if at.is_none_or(|r| r == state.revision) && state.index.is_module(uri) {
            cone(&state.index, uri, Direction::Backward, false)?
        } else {
            BTreeSet::from([uri.clone()])
        };
        let mut w = XmlWriter::new();
        w.open("bundle", &[("uri", uri.to_string())]);
        write_item(&mut w, &flat, uri)?;
        for d in deps.iter().filter(|d| *d != uri) {
            write_item(&mut w, &flat, d)?;
        }
        w.close("bundle");
        Ok(w.finish())
    }

    /// Notations declared in the backward cone of the item's module(s),
    /// found with one index pass and one read per document.
    pub fn collect_notations(&self, item: &MmtUri) -> Result<NotationCollection, StoreError> {
        let state = self.snapshot();
        let roots: Vec<MmtUri> = match item.module_uri() {
            Some(m) => vec![m],
            None => state
                .index
                .subjects(RelName::DeclaredIn, &item.doc_uri())
                .into_iter()
                .filter(|m| state.index.is_module(m))
                .collect(),
        };
        if roots.is_empty() {
            return Err(StoreError::UnknownModule(item.clone()));
        }
        let mut modules = BTreeSet::new();
        for r in &roots {
            modules.extend(cone(&state.index, r, Direction::Backward, true)?);
        }
        let docs: BTreeSet<MmtUri> = modules.iter().map(MmtUri::doc_uri).collect();
        let mut notations = Vec::new();
        let mut opened = 0;
        for d in &docs {
            let sha = state.docs.get(d).ok_or_else(|| StoreError::NotFound(d.to_string()))?;
            let doc = self.parse_blob(sha)?;
            opened += 1;
            for m in &doc.modules {
                if modules.contains(&doc.module_uri(m)) {
                    notations.extend(m.notations().into_iter().cloned());
                }
            }
        }
        Ok(NotationCollection { notations, documents_opened: opened })
    }

    /// Renders the item at `uri` with the default notations, those in its
    /// cone and those of `style`.
    pub fn present(&self, uri: &MmtUri, style: Option<&MmtUri>, target: Target) -> Result<String, StoreError> {
        let g = self.graph(None)?;
        let cone = self.collect_notations(uri)?.notations;
        let style = style.map(|s| resolve_style(&g, s)).transpose()?;
        let resolved = ResolvedStyle::layered(cone, style);
        Ok(render(&Flattener::new(&g), &resolved, &RenderItem::Uri(uri.clone()), target)?)
    }

    /// Renames a module and rewrites every reference to it across its
    /// one-step forward cone, as one revision.
    pub fn rename_module(&self, old: &MmtUri, new_name: LocalName) -> Result<Revision, StoreError> {
        let _w = self.writer.lock().expect("writer lock");
        let state = self.snapshot();
        let is_module = old.is_module_level()
            && [UnaryType::Theory, UnaryType::View, UnaryType::Style].iter().any(|t| state.index.has_type(old, *t));
        if !is_module {
            return Err(StoreError::UnknownModule(old.clone()));
        }
        let old_name = old.module().expect("module-level").clone();
        let home = old.doc_uri();
        let new = home.with_module(new_name.clone());
        if new == *old {
            return self.install(&state, Vec::new(), &format!("rename {old} (no change)"));
        }
        if state.index.is_module(&new) {
            return Err(StoreError::NameClash(new));
        }
        let rewrite = |u: &MmtUri| -> MmtUri {
            match u.module() {
                Some(m) if u.doc_uri() == home && m.starts_with(&old_name) => {
                    let rest = m.strip_prefix(&old_name);
                    let module = match rest {
                        Some(r) => new_name.join(&r),
                        None => new_name.clone(),
                    };
                    let moved = home.with_module(module);
                    match u.symbol() {
                        Some(s) => moved.with_symbol(s.clone()),
                        None => moved,
                    }
                }
                _ => u.clone(),
            }
        };
        let affected: BTreeSet<MmtUri> = cone(&state.index, old, Direction::Forward, false)?
            .iter()
            .map(MmtUri::doc_uri)
            .chain([home.clone()])
            .collect();
        let mut patched = Vec::new();
        for d in &affected {
            let doc = self.document(&state, d)?;
            let mut out = doc.map_uris(&mut |u| rewrite(u));
            if *d == home {
                for m in &mut out.modules {
                    let name = m.name().clone();
                    if let Some(rest) =
                        name.strip_prefix(&old_name).map(Some).or_else(|| (name == old_name).then_some(None))
                    {
                        *m = renamed(m, rest.map_or_else(|| new_name.clone(), |r| new_name.join(&r)));
                    }
                }
            }
            let bytes = serialize_document(&out).into_bytes();
            patched.push((out, bytes));
        }
        let atoms: Vec<_> = patched.iter().flat_map(|(d, _)| atomize(d)).collect();
        let report = validate_structural(atoms, &state.index);
        if !report.is_ok() {
            return Err(StoreError::ValidationRejected(Box::new(report)));
        }
        self.install(&state, patched, &format!("rename {old} to {new}"))
    }

    /// SHA-256 over every file under the root, in path order.
    pub fn state_hash(&self) -> Result<String, StoreError> {
        let _w = self.writer.lock().expect("writer lock");
        let mut files: Vec<PathBuf> = Vec::new();
        let mut stack = vec![self.root.clone()];
        while let Some(dir) = stack.pop() {
            for e in fs::read_dir(&dir)? {
                let p = e?.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push(p);
                }
            }
        }
        files.sort();
        let mut h = Sha256::new();
        for f in files {
            h.update(f.strip_prefix(&self.root).unwrap_or(&f).to_string_lossy().as_bytes());
            h.update([0]);
            h.update(fs::read(&f)?);
            h.update([0]);
        }
        h.update(self.revision().to_le_bytes());
        Ok(hex::encode(h.finalize()))
    }
}

impl State {
    fn new(revision: u64, docs: BTreeMap<MmtUri, String>, facts: BTreeMap<MmtUri, FactSet>, catalog: Catalog) -> State {
        let mut index = FactIndex::default();
        for f in facts.values() {
            index.extend(f);
        }
        State { revision, docs, facts, index, catalog, parsed: Mutex::new(HashMap::new()), graph: OnceLock::new() }
    }

    fn write_index(&self, root: &Path) -> Result<(), StoreError> {
        for r in RelName::ALL {
            let mut text = String::new();
            for (s, o) in self.index.pairs(*r) {
                text.push_str(&format!("{s}\t{o}\n"));
            }
            write_file(&root.join("index").join(format!("{r}.idx")), text.as_bytes())?;
        }
        let mut lines: Vec<String> = Vec::new();
        for t in UnaryType::ALL {
            for u in self.index.individuals(*t) {
                lines.push(format!("{t}\t{u}"));
            }
        }
        lines.sort();
        let mut text = lines.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        write_file(&root.join("index/types.idx"), text.as_bytes())?;
        Ok(())
    }
}

/// `<item uri base>` around the XML of a module, constant or declaration.
pub fn write_item(w: &mut XmlWriter, flat: &Flattener, uri: &MmtUri) -> Result<(), StoreError> {
    let base = uri.doc_uri();
    let attrs = [("uri", uri.to_string()), ("base", base.to_string())];
    let resolved = flat.deref(uri).ok_or_else(|| StoreError::NotFound(uri.to_string()))?;
    w.open("item", &attrs);
    match resolved {
        Resolved::Module(m) => write_module(w, m, &base),
        Resolved::Constant(c) => {
            let mut extra = Vec::new();
            if !c.is_syntactic() {
                extra.push(("origin", c.origin.to_string()));
                extra.push(("via", c.via.to_string()));
            }
            write_constant(w, &c.path().to_string(), &extra, c.tp.as_ref(), c.def.as_ref(), &base);
        }
        Resolved::Item(Item::Import(i)) => {
            w.open("import", &[("name", i.name.to_string()), ("from", i.from.relative_to(&base))]);
            for a in &i.assignments {
                write_assignment(w, a, &base);
            }
            w.close("import");
        }
        Resolved::Item(Item::Assignment(a)) => write_assignment(w, a, &base),
        Resolved::Item(Item::Notation(n)) => write_notation(w, n, 0, &base),
        Resolved::Item(_) => return Err(StoreError::NotFound(uri.to_string())),
    }
    w.close("item");
    Ok(())
}
