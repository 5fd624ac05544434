use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::atoms::{AtomPayload, AtomicDecl};
use crate::model::{Assignment, Constant, Declaration, Document, Import, Module, Notation, Style, Theory, View};
use crate::uri::{LocalName, MmtUri};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate URI {0}")]
    DuplicateUri(MmtUri),
    #[error("atom {0} arrived before its container")]
    OrphanAtom(MmtUri),
    #[error("atom {0} does not fit its container: {1}")]
    Misplaced(MmtUri, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Decl(usize),
    ViewAssignment(usize),
    ImportAssignment(usize, usize),
    StyleNotation(usize),
}

/// A syntactic item found by [`TheoryGraph::lookup`].
#[derive(Debug, Clone, Copy)]
pub enum Item<'a> {
    Theory(&'a Theory),
    View(&'a View),
    Style(&'a Style),
    Constant(&'a Constant),
    Import(&'a Import),
    Notation(&'a Notation),
    Assignment(&'a Assignment),
}

/// A set of loaded modules keyed by URI. Only the modular form is kept;
/// induced declarations are computed on demand by `flatten`.
#[derive(Debug, Clone, Default)]
pub struct TheoryGraph {
    modules: HashMap<MmtUri, Module>,
    order: Vec<MmtUri>,
    index: HashMap<MmtUri, (MmtUri, Slot)>,
}

impl TheoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Result<Self, GraphError> {
        let mut g = TheoryGraph::new();
        for d in docs {
            g.add_document(d)?;
        }
        Ok(g)
    }

    pub fn add_document(&mut self, doc: &Document) -> Result<(), GraphError> {
        for m in &doc.modules {
            self.add_module(doc.module_uri(m), m.clone())?;
        }
        Ok(())
    }

    pub fn add_module(&mut self, uri: MmtUri, module: Module) -> Result<(), GraphError> {
        if self.modules.contains_key(&uri) || self.index.contains_key(&uri) {
            return Err(GraphError::DuplicateUri(uri));
        }
        let mut entries = Vec::new();
        match &module {
            Module::Theory(t) => {
                for (i, d) in t.declarations.iter().enumerate() {
                    entries.push((uri.with_symbol(d.name().clone()), Slot::Decl(i)));
                    if let Declaration::Import(imp) = d {
                        for (j, a) in imp.assignments.iter().enumerate() {
                            entries.push((uri.with_symbol(imp.name.join(a.target())), Slot::ImportAssignment(i, j)));
                        }
                    }
                }
            }
            Module::View(v) => {
                for (i, a) in v.assignments.iter().enumerate() {
                    entries.push((uri.with_symbol(a.target().clone()), Slot::ViewAssignment(i)));
                }
            }
            Module::Style(s) => {
                for (i, n) in s.notations.iter().enumerate() {
                    entries.push((n.uri.clone(), Slot::StyleNotation(i)));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (u, _) in &entries {
            if self.index.contains_key(u) || !seen.insert(u.clone()) {
                return Err(GraphError::DuplicateUri(u.clone()));
            }
        }
        for (u, slot) in entries {
            self.index.insert(u, (uri.clone(), slot));
        }
        self.order.push(uri.clone());
        self.modules.insert(uri, module);
        Ok(())
    }

    /// Adds one atomic declaration. Children must follow their container.
    pub fn add_atom(&mut self, atom: AtomicDecl) -> Result<(), GraphError> {
        let uri = atom.uri.clone();
        if self.modules.contains_key(&uri) || self.index.contains_key(&uri) {
            return Err(GraphError::DuplicateUri(uri));
        }
        let misplaced = |why: &str| GraphError::Misplaced(uri.clone(), why.to_string());
        match atom.payload {
            AtomPayload::TheoryHeader { meta } => {
                let name = uri
                    .module()
                    .cloned()
                    .filter(|_| uri.is_module_level())
                    .ok_or_else(|| misplaced("header URI must be module-level"))?;
                self.add_module(uri, Module::Theory(Theory { name, meta, declarations: Vec::new() }))
            }
            AtomPayload::ViewHeader { from, to } => {
                let name = uri
                    .module()
                    .cloned()
                    .filter(|_| uri.is_module_level())
                    .ok_or_else(|| misplaced("header URI must be module-level"))?;
                self.add_module(uri, Module::View(View { name, from, to, assignments: Vec::new() }))
            }
            AtomPayload::StyleHeader { imports } => {
                let name = uri
                    .module()
                    .cloned()
                    .filter(|_| uri.is_module_level())
                    .ok_or_else(|| misplaced("header URI must be module-level"))?;
                self.add_module(uri, Module::Style(Style { name, imports, notations: Vec::new() }))
            }
            AtomPayload::Constant { tp, def } => {
                let (module_uri, name) =
                    split_symbol(&uri).ok_or_else(|| misplaced("constant URI needs a symbol part"))?;
                let theory = self.theory_mut(&module_uri, &uri)?;
                theory.declarations.push(Declaration::Constant(Constant { name, tp, def }));
                let i = theory.declarations.len() - 1;
                self.index.insert(uri, (module_uri, Slot::Decl(i)));
                Ok(())
            }
            AtomPayload::ImportHeader { from } => {
                let (module_uri, name) =
                    split_symbol(&uri).ok_or_else(|| misplaced("import URI needs a symbol part"))?;
                if name.len() != 1 {
                    return Err(misplaced("import names are single segments"));
                }
                let theory = self.theory_mut(&module_uri, &uri)?;
                theory.declarations.push(Declaration::Import(Import { name, from, assignments: Vec::new() }));
                let i = theory.declarations.len() - 1;
                self.index.insert(uri, (module_uri, Slot::Decl(i)));
                Ok(())
            }
            AtomPayload::Notation(n) => {
                let module_uri = uri
                    .module_uri()
                    .filter(|_| uri.is_symbol_level())
                    .ok_or_else(|| misplaced("notation URI needs a symbol part"))?;
                let slot = match self.modules.get_mut(&module_uri) {
                    Some(Module::Theory(t)) => {
                        t.declarations.push(Declaration::Notation(n));
                        Slot::Decl(t.declarations.len() - 1)
                    }
                    Some(Module::Style(s)) => {
                        s.notations.push(n);
                        Slot::StyleNotation(s.notations.len() - 1)
                    }
                    Some(Module::View(_)) => return Err(misplaced("views do not hold notations")),
                    None => return Err(GraphError::OrphanAtom(uri)),
                };
                self.index.insert(uri, (module_uri, slot));
                Ok(())
            }
            AtomPayload::Assignment(a) => {
                let module_uri = uri
                    .module_uri()
                    .filter(|_| uri.is_symbol_level())
                    .ok_or_else(|| misplaced("assignment URI needs a symbol part"))?;
                let sym = uri.symbol().expect("checked").clone();
                match self.modules.get_mut(&module_uri) {
                    Some(Module::View(v)) => {
                        if &sym != a.target() {
                            return Err(misplaced("URI does not match assignment target"));
                        }
                        v.assignments.push(a);
                        let i = v.assignments.len() - 1;
                        self.index.insert(uri, (module_uri, Slot::ViewAssignment(i)));
                        Ok(())
                    }
                    Some(Module::Theory(t)) => {
                        let imp_name = LocalName::simple(sym.first());
                        if sym.tail().as_ref() != Some(a.target()) {
                            return Err(misplaced("URI does not match import and target"));
                        }
                        let pos = t
                            .declarations
                            .iter()
                            .position(|d| matches!(d, Declaration::Import(i) if i.name == imp_name))
                            .ok_or_else(|| GraphError::OrphanAtom(uri.clone()))?;
                        let Declaration::Import(imp) = &mut t.declarations[pos] else { unreachable!() };
                        imp.assignments.push(a);
                        let j = imp.assignments.len() - 1;
                        self.index.insert(uri, (module_uri, Slot::ImportAssignment(pos, j)));
                        Ok(())
                    }
                    Some(Module::Style(_)) => Err(misplaced("styles do not hold assignments")),
                    None => Err(GraphError::OrphanAtom(uri)),
                }
            }
        }
    }

    fn theory_mut(&mut self, module_uri: &MmtUri, atom: &MmtUri) -> Result<&mut Theory, GraphError> {
        match self.modules.get_mut(module_uri) {
            Some(Module::Theory(t)) => Ok(t),
            Some(_) => Err(GraphError::Misplaced(atom.clone(), "container is not a theory".into())),
            None => Err(GraphError::OrphanAtom(atom.clone())),
        }
    }

    pub fn module(&self, uri: &MmtUri) -> Option<&Module> {
        self.modules.get(uri)
    }

    pub fn theory(&self, uri: &MmtUri) -> Option<&Theory> {
        self.modules.get(uri).and_then(Module::as_theory)
    }

    pub fn view(&self, uri: &MmtUri) -> Option<&View> {
        self.modules.get(uri).and_then(Module::as_view)
    }

    pub fn style(&self, uri: &MmtUri) -> Option<&Style> {
        self.modules.get(uri).and_then(Module::as_style)
    }

    /// Module URIs in insertion order.
    pub fn module_uris(&self) -> &[MmtUri] {
        &self.order
    }

    pub fn modules(&self) -> impl Iterator<Item = (&MmtUri, &Module)> {
        self.order.iter().map(move |u| (u, &self.modules[u]))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The syntactic item declared at `uri`. Induced declarations are not
    /// found here.
    pub fn lookup(&self, uri: &MmtUri) -> Option<Item<'_>> {
        if let Some(m) = self.modules.get(uri) {
            return Some(match m {
                Module::Theory(t) => Item::Theory(t),
                Module::View(v) => Item::View(v),
                Module::Style(s) => Item::Style(s),
            });
        }
        let (module_uri, slot) = self.index.get(uri)?;
        let module = &self.modules[module_uri];
        Some(match (module, *slot) {
            (Module::Theory(t), Slot::Decl(i)) => match &t.declarations[i] {
                Declaration::Constant(c) => Item::Constant(c),
                Declaration::Import(imp) => Item::Import(imp),
                Declaration::Notation(n) => Item::Notation(n),
            },
            (Module::Theory(t), Slot::ImportAssignment(i, j)) => match &t.declarations[i] {
                Declaration::Import(imp) => Item::Assignment(&imp.assignments[j]),
                _ => unreachable!("index points at an import"),
            },
            (Module::View(v), Slot::ViewAssignment(i)) => Item::Assignment(&v.assignments[i]),
            (Module::Style(s), Slot::StyleNotation(i)) => Item::Notation(&s.notations[i]),
            _ => unreachable!("index slot matches module kind"),
        })
    }

    /// Reassembles documents, grouping modules by document part in
    /// insertion order.
    pub fn documents(&self) -> Vec<Document> {
        let mut docs: Vec<Document> = Vec::new();
        for u in &self.order {
            let base = u.doc_uri();
            let pos = match docs.iter().position(|d| d.base == base) {
                Some(p) => p,
                None => {
                    docs.push(Document::new(base));
                    docs.len() - 1
                }
            };
            docs[pos].modules.push(self.modules[u].clone());
        }
        docs
    }

    /// Order-insensitive normal form used for equality.
    fn normal_form(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (u, m) in &self.modules {
            let key = u.to_string();
            let value = match m {
                Module::Theory(t) => {
                    let mut decls: Vec<String> = t
                        .declarations
                        .iter()
                        .map(|d| match d {
                            Declaration::Import(i) => {
                                let mut a: Vec<String> = i.assignments.iter().map(|a| format!("{a:?}")).collect();
                                a.sort();
                                format!("import {} {} {:?}", i.name, i.from, a)
                            }
                            other => format!("{other:?}"),
                        })
                        .collect();
                    decls.sort();
                    format!("theory {:?} {:?}", t.meta, decls)
                }
                Module::View(v) => {
                    let mut a: Vec<String> = v.assignments.iter().map(|a| format!("{a:?}")).collect();
                    a.sort();
                    format!("view {} {} {:?}", v.from, v.to, a)
                }
                Module::Style(s) => {
                    let mut n: Vec<String> = s.notations.iter().map(|n| format!("{n:?}")).collect();
                    n.sort();
                    format!("style {:?} {:?}", s.imports, n)
                }
            };
            out.insert(key, value);
        }
        out
    }
}

/// Structural equality up to declaration order. Terms inside are compared
/// after canonical renaming of bound variables, so alpha-equivalent bodies
/// compare equal.
impl PartialEq for TheoryGraph {
    fn eq(&self, other: &Self) -> bool {
        self.canonical().normal_form() == other.canonical().normal_form()
    }
}

impl TheoryGraph {
    fn canonical(&self) -> TheoryGraph {
        fn canon_term(t: &crate::model::Term) -> crate::model::Term {
            t.rename_bound("%")
        }
        let mut g = self.clone();
        for m in g.modules.values_mut() {
            match m {
                Module::Theory(t) => {
                    for d in &mut t.declarations {
                        match d {
                            Declaration::Constant(c) => {
                                c.tp = c.tp.as_ref().map(canon_term);
                                c.def = c.def.as_ref().map(canon_term);
                            }
                            Declaration::Import(i) => {
                                for a in &mut i.assignments {
                                    if let Assignment::Const { value, .. } = a {
                                        *value = canon_term(value);
                                    }
                                }
                            }
                            Declaration::Notation(_) => {}
                        }
                    }
                }
                Module::View(v) => {
                    for a in &mut v.assignments {
                        if let Assignment::Const { value, .. } = a {
                            *value = canon_term(value);
                        }
                    }
                }
                Module::Style(_) => {}
            }
        }
        g
    }
}

impl Eq for TheoryGraph {}

fn split_symbol(uri: &MmtUri) -> Option<(MmtUri, LocalName)> {
    Some((uri.module_uri()?, uri.symbol()?.clone()))
}

/// Builds a graph from a stream of atomic declarations.
pub fn assemble(atoms: impl IntoIterator<Item = AtomicDecl>) -> Result<TheoryGraph, GraphError> {
    let mut g = TheoryGraph::new();
    for a in atoms {
        g.add_atom(a)?;
    }
    Ok(g)
}
