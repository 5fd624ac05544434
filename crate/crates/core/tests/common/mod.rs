#![allow(dead_code, unused_imports)]

use std::path::PathBuf;

pub mod oracles;
pub use oracles::*;

use mmt_core::model::{Document, TheoryGraph};
use mmt_core::reader::parse_document;
use mmt_core::uri::{parse_uri, MmtUri};

pub const ALG: &str = "http://cds.omdoc.org/math/algebra/algegra1.omdoc";
pub const VIEWS: &str = "http://cds.omdoc.org/math/algebra/views.omdoc";
pub const FOL_ALG: &str = "http://cds.omdoc.org/math/algebra/fol-algebra.omdoc";
pub const FOL: &str = "http://cds.omdoc.org/logics/fol.omdoc?FOL";

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> Document {
    let bytes = std::fs::read(fixture_path(name)).unwrap();
    parse_document(&bytes, &MmtUri::root()).unwrap()
}

pub fn u(s: &str) -> MmtUri {
    parse_uri(s).unwrap()
}

/// `ALG?rest`
pub fn alg(rest: &str) -> MmtUri {
    u(&format!("{ALG}?{rest}"))
}

pub fn views(rest: &str) -> MmtUri {
    u(&format!("{VIEWS}?{rest}"))
}

pub fn fol_alg(rest: &str) -> MmtUri {
    u(&format!("{FOL_ALG}?{rest}"))
}

pub fn fol(sym: &str) -> MmtUri {
    u(&format!("{FOL}?{sym}"))
}

pub fn algebra_graph() -> TheoryGraph {
    TheoryGraph::from_documents([&load("algebra1.omdoc"), &load("views.omdoc")]).unwrap()
}

pub fn fol_graph() -> TheoryGraph {
    TheoryGraph::from_documents([&load("fol.omdoc"), &load("fol-algebra.omdoc")]).unwrap()
}

use std::collections::{BTreeMap, BTreeSet};

use mmt_core::abox::{AssignmentSkeleton, ConstantSkeleton, ImportSkeleton, ModuleSkeleton, Skeleton};
use mmt_core::model::{Assignment, Declaration, Module, Notation};

fn notation_for(n: &Notation) -> Option<MmtUri> {
    (!n.applies_to.is_root()).then(|| n.applies_to.clone())
}

fn assignment_skeleton(domain: &MmtUri, a: &Assignment) -> AssignmentSkeleton {
    match a {
        Assignment::Const { target, value } => AssignmentSkeleton {
            import: false,
            target: domain.with_symbol(target.clone()),
            occurrences: value.symbols(),
        },
        Assignment::Import { target, value } => AssignmentSkeleton {
            import: true,
            target: domain.with_symbol(target.clone()),
            occurrences: value.link_uris().into_iter().collect(),
        },
    }
}

/// The skeleton read directly off the documents.
pub fn skeleton_of(docs: &[&Document]) -> Skeleton {
    let mut sk = Skeleton::default();
    for d in docs {
        let entry = sk.documents.entry(d.base.clone()).or_default();
        for m in &d.modules {
            let mu = d.module_uri(m);
            let skel = match m {
                Module::Theory(t) => {
                    let mut constants = BTreeMap::new();
                    let mut imports = BTreeMap::new();
                    let mut notations = BTreeMap::new();
                    for decl in &t.declarations {
                        match decl {
                            Declaration::Constant(c) => {
                                constants.insert(
                                    mu.with_symbol(c.name.clone()),
                                    ConstantSkeleton {
                                        typed: c.tp.is_some(),
                                        type_occurrences: c.tp.as_ref().map(|t| t.symbols()).unwrap_or_default(),
                                        def_occurrences: c.def.as_ref().map(|t| t.symbols()).unwrap_or_default(),
                                    },
                                );
                            }
                            Declaration::Import(i) => {
                                let iu = mu.with_symbol(i.name.clone());
                                let assignments = i
                                    .assignments
                                    .iter()
                                    .map(|a| (mu.with_symbol(i.name.join(a.target())), assignment_skeleton(&i.from, a)))
                                    .collect();
                                imports.insert(iu, ImportSkeleton { from: i.from.clone(), assignments });
                            }
                            Declaration::Notation(n) => {
                                notations.insert(n.uri.clone(), notation_for(n));
                            }
                        }
                    }
                    ModuleSkeleton::Theory { meta: t.meta.clone(), constants, imports, notations }
                }
                Module::View(v) => ModuleSkeleton::View {
                    from: v.from.clone(),
                    to: v.to.clone(),
                    assignments: v
                        .assignments
                        .iter()
                        .map(|a| (mu.with_symbol(a.target().clone()), assignment_skeleton(&v.from, a)))
                        .collect(),
                },
                Module::Style(s) => ModuleSkeleton::Style {
                    imports: s.imports.iter().cloned().collect::<BTreeSet<_>>(),
                    notations: s.notations.iter().map(|n| (n.uri.clone(), notation_for(n))).collect(),
                },
            };
            entry.insert(mu, skel);
        }
    }
    sk
}

pub const CHAIN: &str = "http://example.org/chain.omdoc";

/// `C0` holds one constant; `C(i+1)` imports `C(i)` twice.
pub fn chain_source(n: usize) -> String {
    let mut s = format!("<omdoc base=\"{CHAIN}\">\n  <theory name=\"C0\"><constant name=\"c\"/></theory>\n");
    for i in 1..=n {
        s.push_str(&format!(
            "  <theory name=\"C{i}\"><import name=\"l\" from=\"?C{p}\"/><import name=\"r\" from=\"?C{p}\"/></theory>\n",
            p = i - 1
        ));
    }
    s.push_str("</omdoc>\n");
    s
}

pub fn chain_doc(n: usize) -> Document {
    parse_document(chain_source(n).as_bytes(), &MmtUri::root()).unwrap()
}

pub fn parse_str(s: &str) -> Document {
    parse_document(s.as_bytes(), &MmtUri::root()).unwrap()
}
