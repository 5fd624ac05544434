use std::collections::BTreeSet;

use crate::model::{Assignment, Declaration, Document, Module, Morphism, Notation, Term};
use crate::uri::MmtUri;

/// One declaration taken out of its context, addressed by its canonical URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicDecl {
    pub uri: MmtUri,
    pub payload: AtomPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomPayload {
    TheoryHeader { meta: Option<MmtUri> },
    ViewHeader { from: MmtUri, to: MmtUri },
    StyleHeader { imports: Vec<MmtUri> },
    Constant { tp: Option<Term>, def: Option<Term> },
    ImportHeader { from: MmtUri },
    Assignment(Assignment),
    Notation(Notation),
}

impl AtomicDecl {
    pub fn is_header(&self) -> bool {
        matches!(
            self.payload,
            AtomPayload::TheoryHeader { .. } | AtomPayload::ViewHeader { .. } | AtomPayload::StyleHeader { .. }
        )
    }

    /// The atom this one must follow: module header for declarations and
    /// view assignments, the import for import assignments.
    pub fn container(&self) -> Option<MmtUri> {
        if self.is_header() {
            return None;
        }
        let module = self.uri.module_uri()?;
        match &self.payload {
            AtomPayload::Assignment(a) => {
                let sym = self.uri.symbol()?;
                if sym == a.target() {
                    // View assignments are addressed by their target alone.
                    Some(module)
                } else {
                    Some(module.with_symbol(crate::uri::LocalName::simple(sym.first())))
                }
            }
            _ => Some(module),
        }
    }

    /// Module-level URIs this atom refers to (excluding its own container).
    pub fn referenced_modules(&self) -> BTreeSet<MmtUri> {
        let mut out = BTreeSet::new();
        let term = |t: &Term, out: &mut BTreeSet<MmtUri>| {
            t.for_each_symbol(&mut |u| {
                if let Some(m) = u.module_uri() {
                    out.insert(m);
                }
            })
        };
        match &self.payload {
            AtomPayload::TheoryHeader { meta } => out.extend(meta.iter().cloned()),
            AtomPayload::ViewHeader { from, to } => {
                out.insert(from.clone());
                out.insert(to.clone());
            }
            AtomPayload::StyleHeader { imports } => out.extend(imports.iter().cloned()),
            AtomPayload::Constant { tp, def } => {
                for t in tp.iter().chain(def.iter()) {
                    term(t, &mut out);
                }
            }
            AtomPayload::ImportHeader { from } => {
                out.insert(from.clone());
            }
            AtomPayload::Assignment(Assignment::Const { value, .. }) => term(value, &mut out),
            AtomPayload::Assignment(Assignment::Import { value, .. }) => {
                out.extend(morphism_modules(value));
            }
            AtomPayload::Notation(n) => {
                if let Some(m) = n.applies_to.module_uri() {
                    out.insert(m);
                }
            }
        }
        if let Some(own) = self.uri.module_uri() {
            out.remove(&own);
        }
        out
    }
}

fn morphism_modules(m: &Morphism) -> Vec<MmtUri> {
    m.link_uris().into_iter().filter_map(|u| u.module_uri()).collect()
}

/// Decomposes a document into header atoms followed by one atom per child,
/// preserving source order.
pub fn atomize(doc: &Document) -> Vec<AtomicDecl> {
    let mut out = Vec::new();
    for m in &doc.modules {
        let mu = doc.module_uri(m);
        match m {
            Module::Theory(t) => {
                out.push(AtomicDecl { uri: mu.clone(), payload: AtomPayload::TheoryHeader { meta: t.meta.clone() } });
                for d in &t.declarations {
                    match d {
                        Declaration::Constant(c) => out.push(AtomicDecl {
                            uri: mu.with_symbol(c.name.clone()),
                            payload: AtomPayload::Constant { tp: c.tp.clone(), def: c.def.clone() },
                        }),
                        Declaration::Import(i) => {
                            out.push(AtomicDecl {
                                uri: mu.with_symbol(i.name.clone()),
                                payload: AtomPayload::ImportHeader { from: i.from.clone() },
                            });
                            for a in &i.assignments {
                                out.push(AtomicDecl {
                                    uri: mu.with_symbol(i.name.join(a.target())),
                                    payload: AtomPayload::Assignment(a.clone()),
                                });
                            }
                        }
                        Declaration::Notation(n) => {
                            out.push(AtomicDecl { uri: n.uri.clone(), payload: AtomPayload::Notation(n.clone()) })
                        }
                    }
                }
            }
            Module::View(v) => {
                out.push(AtomicDecl {
                    uri: mu.clone(),
                    payload: AtomPayload::ViewHeader { from: v.from.clone(), to: v.to.clone() },
                });
                for a in &v.assignments {
                    out.push(AtomicDecl {
                        uri: mu.with_symbol(a.target().clone()),
                        payload: AtomPayload::Assignment(a.clone()),
                    });
                }
            }
            Module::Style(s) => {
                out.push(AtomicDecl {
                    uri: mu.clone(),
                    payload: AtomPayload::StyleHeader { imports: s.imports.clone() },
                });
                for n in &s.notations {
                    out.push(AtomicDecl { uri: n.uri.clone(), payload: AtomPayload::Notation(n.clone()) });
                }
            }
        }
    }
    out
}
