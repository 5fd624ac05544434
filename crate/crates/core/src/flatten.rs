//! Induced declarations, computed lazily from the modular form.
//!
//! A theory `T` importing `S` as `i` contains, for every flat constant `p`
//! of `S`, an induced constant `T?i/p`. Symbols of a meta-theory `M` are
//! reachable as `T?meta/...` but are never translated by morphisms.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::model::{Assignment, Declaration, Import, Item, Module, Morphism, Term, TheoryGraph, META};
use crate::uri::{LocalName, MmtUri};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("{symbol} has no image under {morphism}")]
    UnmappedSymbol { morphism: String, symbol: MmtUri },
    #[error("unknown module {0}")]
    UnknownModule(MmtUri),
    #[error("{0} is not a theory")]
    NotATheory(MmtUri),
    #[error("import path {path} does not exist in {theory}")]
    UnknownImport { theory: MmtUri, path: LocalName },
    #[error("morphism {0} composes links with mismatching domains")]
    DomainMismatch(String),
    #[error("cyclic dependency through {0}")]
    CycleDetected(MmtUri),
}

/// A constant in the flat form of a theory: either syntactic
/// (`uri == origin`, `via` the identity) or induced along an import path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatConstant {
    pub uri: MmtUri,
    pub origin: MmtUri,
    pub via: Morphism,
    pub tp: Option<Term>,
    pub def: Option<Term>,
}

impl FlatConstant {
    pub fn is_syntactic(&self) -> bool {
        self.uri == self.origin
    }

    /// The qualified name inside the containing theory.
    pub fn path(&self) -> &LocalName {
        self.uri.symbol().expect("flat constants have symbol URIs")
    }
}

/// What a URI dereferences to.
#[derive(Debug, Clone)]
pub enum Resolved<'g> {
    Module(&'g Module),
    Constant(Arc<FlatConstant>),
    /// A syntactic non-constant declaration (import, notation, assignment).
    Item(Item<'g>),
}

/// A morphism in normal form: the image of every undefined constant of the
/// domain's flat form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismTable {
    pub domain: MmtUri,
    pub codomain: MmtUri,
    pub map: BTreeMap<LocalName, Term>,
}

type ConstCache = RwLock<HashMap<MmtUri, Option<Arc<FlatConstant>>>>;
type FlatCache = RwLock<HashMap<MmtUri, Arc<Vec<Arc<FlatConstant>>>>>;

const MAX_EXPANSION: usize = 256;

/// Dereferencing and flattening over one immutable graph, memoized per URI.
pub struct Flattener<'g> {
    graph: &'g TheoryGraph,
    consts: Option<ConstCache>,
    flats: Option<FlatCache>,
}

impl<'g> Flattener<'g> {
    pub fn new(graph: &'g TheoryGraph) -> Self {
        Flattener { graph, consts: Some(RwLock::default()), flats: Some(RwLock::default()) }
    }

    /// Recomputes everything on each call.
    pub fn uncached(graph: &'g TheoryGraph) -> Self {
        Flattener { graph, consts: None, flats: None }
    }

    pub fn graph(&self) -> &'g TheoryGraph {
        self.graph
    }

    pub fn cached_entries(&self) -> usize {
        self.consts.as_ref().map_or(0, |c| c.read().unwrap().len())
    }

    pub fn deref(&self, uri: &MmtUri) -> Option<Resolved<'g>> {
        if uri.is_module_level() {
            return self.graph.module(uri).map(Resolved::Module);
        }
        if let Some(c) = self.deref_constant(uri) {
            return Some(Resolved::Constant(c));
        }
        self.graph.lookup(uri).map(Resolved::Item)
    }

    /// The (syntactic or induced) constant at `uri`.
    pub fn deref_constant(&self, uri: &MmtUri) -> Option<Arc<FlatConstant>> {
        if let Some(cache) = &self.consts {
            if let Some(hit) = cache.read().unwrap().get(uri) {
                return hit.clone();
            }
        }
        let result = self.compute_constant(uri).map(Arc::new);
        if let Some(cache) = &self.consts {
            // A concurrent computation may have won; keep the first value.
            return cache.write().unwrap().entry(uri.clone()).or_insert(result).clone();
        }
        result
    }

    fn compute_constant(&self, uri: &MmtUri) -> Option<FlatConstant> {
        let sym = uri.symbol()?;
        let theory_uri = uri.module_uri()?;
        let theory = self.graph.theory(&theory_uri)?;
        if let Some(c) = theory.constant(sym) {
            return Some(FlatConstant {
                uri: uri.clone(),
                origin: uri.clone(),
                via: Morphism::Identity(theory_uri),
                tp: c.tp.clone(),
                def: c.def.clone(),
            });
        }
        let rest = sym.tail()?;
        if sym.first() == META {
            let inner = self.deref_constant(&theory.meta.as_ref()?.with_symbol(rest))?;
            return Some(FlatConstant { uri: uri.clone(), ..(*inner).clone() });
        }
        if rest.first() == META {
            return None;
        }
        let import = theory.import(sym.first())?;
        let inner = self.deref_constant(&import.from.with_symbol(rest.clone()))?;
        let tp = match &inner.tp {
            Some(t) => Some(self.translate_import(&theory_uri, import, t).ok()?),
            None => None,
        };
        let def = match self.assigned(&import.from, &import.assignments, &rest).ok()? {
            Some(v) => Some(v),
            None => match &inner.def {
                Some(d) => Some(self.translate_import(&theory_uri, import, d).ok()?),
                None => None,
            },
        };
        let head = LocalName::simple(sym.first());
        let via = match &inner.via {
            Morphism::ImportLink { path, .. } => Morphism::import(theory_uri, head.join(path)),
            _ => Morphism::import(theory_uri, head),
        };
        Some(FlatConstant { uri: uri.clone(), origin: inner.origin.clone(), via, tp, def })
    }

    /// The flat form of `theory`: syntactic and induced constants, depth-first
    /// in declaration order. Meta-theory constants (as `T?meta/...`) are
    /// appended when `include_meta` is set.
    pub fn flatten_theory(&self, theory: &MmtUri, include_meta: bool) -> Result<Vec<Arc<FlatConstant>>, FlattenError> {
        let mut out = (*self.flat_core(theory, &mut HashSet::new())?).clone();
        if include_meta {
            let t = self.graph.theory(theory).ok_or_else(|| self.not_theory(theory))?;
            if let Some(meta) = &t.meta {
                let meta_name = LocalName::simple(META);
                for fc in self.flatten_theory(meta, true)? {
                    let uri = theory.with_symbol(meta_name.join(fc.path()));
                    out.push(self.deref_constant(&uri).ok_or(FlattenError::UnknownModule(meta.clone()))?);
                }
            }
        }
        Ok(out)
    }

    fn flat_core(
        &self,
        theory_uri: &MmtUri,
        visiting: &mut HashSet<MmtUri>,
    ) -> Result<Arc<Vec<Arc<FlatConstant>>>, FlattenError> {
        if let Some(cache) = &self.flats {
            if let Some(hit) = cache.read().unwrap().get(theory_uri) {
                return Ok(hit.clone());
            }
        }
        let theory = self.graph.theory(theory_uri).ok_or_else(|| self.not_theory(theory_uri))?;
        if !visiting.insert(theory_uri.clone()) {
            return Err(FlattenError::CycleDetected(theory_uri.clone()));
        }
        let mut out = Vec::new();
        for d in &theory.declarations {
            match d {
                Declaration::Notation(_) => {}
                Declaration::Constant(c) => {
                    let uri = theory_uri.with_symbol(c.name.clone());
                    out.extend(self.deref_constant(&uri));
                }
                Declaration::Import(import) => {
                    let inner = self.flat_core(&import.from, visiting)?;
                    for fc in inner.iter() {
                        let uri = theory_uri.with_symbol(import.name.join(fc.path()));
                        let induced = self.deref_constant(&uri).ok_or_else(|| FlattenError::UnmappedSymbol {
                            morphism: Morphism::import(theory_uri.clone(), import.name.clone()).to_string(),
                            symbol: fc.uri.clone(),
                        })?;
                        out.push(induced);
                    }
                }
            }
        }
        visiting.remove(theory_uri);
        let out = Arc::new(out);
        if let Some(cache) = &self.flats {
            cache.write().unwrap().insert(theory_uri.clone(), out.clone());
        }
        Ok(out)
    }

    fn not_theory(&self, uri: &MmtUri) -> FlattenError {
        if self.graph.module(uri).is_some() {
            FlattenError::NotATheory(uri.clone())
        } else {
            FlattenError::UnknownModule(uri.clone())
        }
    }

    /// The theory at the end of an import path starting in `theory`.
    pub fn import_domain(&self, theory: &MmtUri, path: &LocalName) -> Result<MmtUri, FlattenError> {
        Ok(self.import_chain(theory, path)?.last().expect("paths are non-empty").1.from.clone())
    }

    /// `(container, import)` pairs along `path`, outermost first.
    fn import_chain(&self, theory: &MmtUri, path: &LocalName) -> Result<Vec<(MmtUri, &'g Import)>, FlattenError> {
        let mut cur = theory.clone();
        let mut chain = Vec::new();
        for seg in path.segments() {
            let t = self.graph.theory(&cur).ok_or_else(|| self.not_theory(&cur))?;
            let imp = t
                .import(seg)
                .ok_or_else(|| FlattenError::UnknownImport { theory: theory.clone(), path: path.clone() })?;
            chain.push((cur, imp));
            cur = imp.from.clone();
        }
        Ok(chain)
    }

    pub fn domain(&self, m: &Morphism) -> Result<MmtUri, FlattenError> {
        match m {
            Morphism::Identity(t) => Ok(t.clone()),
            Morphism::ImportLink { theory, path } => self.import_domain(theory, path),
            Morphism::ViewLink(v) => Ok(self.view(v)?.from.clone()),
            Morphism::Compose(a, b) => {
                if self.codomain(a)? != self.domain(b)? {
                    return Err(FlattenError::DomainMismatch(m.to_string()));
                }
                self.domain(a)
            }
        }
    }

    pub fn codomain(&self, m: &Morphism) -> Result<MmtUri, FlattenError> {
        match m {
            Morphism::Identity(t) => Ok(t.clone()),
            Morphism::ImportLink { theory, .. } => Ok(theory.clone()),
            Morphism::ViewLink(v) => Ok(self.view(v)?.to.clone()),
            Morphism::Compose(_, b) => self.codomain(b),
        }
    }

    fn view(&self, uri: &MmtUri) -> Result<&'g crate::model::View, FlattenError> {
        self.graph.view(uri).ok_or_else(|| FlattenError::UnknownModule(uri.clone()))
    }

    /// Translates a term over `domain(m)` into one over `codomain(m)`.
    pub fn apply_morphism(&self, m: &Morphism, t: &Term) -> Result<Term, FlattenError> {
        match m {
            Morphism::Identity(_) => Ok(t.clone()),
            Morphism::ImportLink { theory, path } => {
                let mut t = t.clone();
                for (container, imp) in self.import_chain(theory, path)?.into_iter().rev() {
                    t = self.translate_import(&container, imp, &t)?;
                }
                Ok(t)
            }
            Morphism::ViewLink(v) => self.translate_view(v, t, 0),
            Morphism::Compose(a, b) => self.apply_morphism(b, &self.apply_morphism(a, t)?),
        }
    }

    fn translate_import(&self, container: &MmtUri, imp: &Import, t: &Term) -> Result<Term, FlattenError> {
        t.try_map_symbols(&mut |u| {
            if u.module_uri().as_ref() != Some(&imp.from) {
                return Ok(None);
            }
            let Some(p) = u.symbol() else { return Ok(None) };
            if p.first() == META {
                return Ok(self.meta_origin(u));
            }
            Ok(Some(match self.assigned(&imp.from, &imp.assignments, p)? {
                Some(v) => v,
                None => Term::Sym(container.with_symbol(imp.name.join(p))),
            }))
        })
    }

    fn translate_view(&self, view_uri: &MmtUri, t: &Term, depth: usize) -> Result<Term, FlattenError> {
        let view = self.view(view_uri)?;
        if depth > MAX_EXPANSION {
            return Err(FlattenError::CycleDetected(view_uri.clone()));
        }
        t.try_map_symbols(&mut |u| {
            if u.module_uri().as_ref() != Some(&view.from) {
                return Ok(None);
            }
            let Some(p) = u.symbol() else { return Ok(None) };
            if p.first() == META {
                return Ok(self.meta_origin(u));
            }
            if let Some(v) = self.assigned(&view.from, &view.assignments, p)? {
                return Ok(Some(v));
            }
            let unmapped = || FlattenError::UnmappedSymbol { morphism: view_uri.to_string(), symbol: u.clone() };
            let fc = self.deref_constant(u).ok_or_else(unmapped)?;
            match &fc.def {
                Some(d) => Ok(Some(self.translate_view(view_uri, d, depth + 1)?)),
                None => Err(unmapped()),
            }
        })
    }

    /// Meta-theory symbols addressed through `T?meta/...` are canonicalized
    /// to their origin and otherwise left alone.
    fn meta_origin(&self, u: &MmtUri) -> Option<Term> {
        self.deref_constant(u).map(|fc| Term::Sym(fc.origin.clone()))
    }

    /// The value an assignment list gives to the domain path `p`: a direct
    /// constant assignment, or the image under the morphism assigned to the
    /// longest import prefix of `p`.
    fn assigned(
        &self,
        domain: &MmtUri,
        assignments: &[Assignment],
        p: &LocalName,
    ) -> Result<Option<Term>, FlattenError> {
        let mut best: Option<(&LocalName, &Morphism)> = None;
        for a in assignments {
            match a {
                Assignment::Const { target, value } if target == p => return Ok(Some(value.clone())),
                Assignment::Import { target, value }
                    if p.len() > target.len()
                        && p.starts_with(target)
                        && best.is_none_or(|(b, _)| target.len() > b.len()) =>
                {
                    best = Some((target, value));
                }
                _ => {}
            }
        }
        let Some((q, m)) = best else { return Ok(None) };
        let inner = self.import_domain(domain, q)?;
        let rest = p.strip_prefix(q).expect("prefix checked");
        Ok(Some(self.apply_morphism(m, &Term::Sym(inner.with_symbol(rest)))?))
    }

    pub fn normalize(&self, m: &Morphism) -> Result<MorphismTable, FlattenError> {
        let domain = self.domain(m)?;
        let codomain = self.codomain(m)?;
        let mut map = BTreeMap::new();
        for fc in self.flatten_theory(&domain, false)? {
            if fc.def.is_none() {
                map.insert(fc.path().clone(), self.apply_morphism(m, &Term::Sym(fc.uri.clone()))?);
            }
        }
        Ok(MorphismTable { domain, codomain, map })
    }
}
