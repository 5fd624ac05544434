use crate::model::{Morphism, Notation, Term};
use crate::uri::{LocalName, MmtUri};

/// A symbol declaration. Type and definiens are independently optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constant {
    pub name: LocalName,
    pub tp: Option<Term>,
    pub def: Option<Term>,
}

impl Constant {
    pub fn new(name: LocalName) -> Self {
        Constant { name, tp: None, def: None }
    }
}

/// A named import of a domain theory, possibly instantiating some of its
/// symbols and imports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub name: LocalName,
    pub from: MmtUri,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    /// Maps a constant path of the domain to a term over the codomain.
    Const { target: LocalName, value: Term },
    /// Maps an import path of the domain to a morphism into the codomain.
    Import { target: LocalName, value: Morphism },
}

impl Assignment {
    pub fn target(&self) -> &LocalName {
        match self {
            Assignment::Const { target, .. } | Assignment::Import { target, .. } => target,
        }
    }

    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Assignment {
        match self {
            Assignment::Const { target, value } => {
                Assignment::Const { target: target.clone(), value: value.map_uris(f) }
            }
            Assignment::Import { target, value } => {
                Assignment::Import { target: target.clone(), value: value.map_uris(f) }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Constant(Constant),
    Import(Import),
    Notation(Notation),
}

impl Declaration {
    /// The local name under which the declaration is addressed.
    pub fn name(&self) -> &LocalName {
        match self {
            Declaration::Constant(c) => &c.name,
            Declaration::Import(i) => &i.name,
            Declaration::Notation(n) => n.uri.symbol().expect("notation URIs carry a symbol part"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub name: LocalName,
    pub meta: Option<MmtUri>,
    pub declarations: Vec<Declaration>,
}

impl Theory {
    pub fn new(name: LocalName) -> Self {
        Theory { name, meta: None, declarations: Vec::new() }
    }

    pub fn constants(&self) -> impl Iterator<Item = &Constant> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Constant(c) => Some(c),
            _ => None,
        })
    }

    pub fn imports(&self) -> impl Iterator<Item = &Import> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Import(i) => Some(i),
            _ => None,
        })
    }

    pub fn notations(&self) -> impl Iterator<Item = &Notation> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Notation(n) => Some(n),
            _ => None,
        })
    }

    pub fn declaration(&self, name: &LocalName) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name() == name)
    }

    pub fn constant(&self, name: &LocalName) -> Option<&Constant> {
        self.constants().find(|c| &c.name == name)
    }

    pub fn import(&self, name: &str) -> Option<&Import> {
        self.imports().find(|i| i.name.len() == 1 && i.name.first() == name)
    }
}

/// An explicit theory morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub name: LocalName,
    pub from: MmtUri,
    pub to: MmtUri,
    pub assignments: Vec<Assignment>,
}

/// A set of notations; styles import each other like theories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Style {
    pub name: LocalName,
    pub imports: Vec<MmtUri>,
    pub notations: Vec<Notation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Module {
    Theory(Theory),
    View(View),
    Style(Style),
}

impl Module {
    pub fn name(&self) -> &LocalName {
        match self {
            Module::Theory(t) => &t.name,
            Module::View(v) => &v.name,
            Module::Style(s) => &s.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Module::Theory(_) => "theory",
            Module::View(_) => "view",
            Module::Style(_) => "style",
        }
    }

    pub fn as_theory(&self) -> Option<&Theory> {
        match self {
            Module::Theory(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_view(&self) -> Option<&View> {
        match self {
            Module::View(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_style(&self) -> Option<&Style> {
        match self {
            Module::Style(s) => Some(s),
            _ => None,
        }
    }

    /// Notations declared directly in this module.
    pub fn notations(&self) -> Vec<&Notation> {
        match self {
            Module::Theory(t) => t.notations().collect(),
            Module::Style(s) => s.notations.iter().collect(),
            Module::View(_) => Vec::new(),
        }
    }

    /// Rewrites every URI the module mentions; the module name is unchanged.
    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Module {
        match self {
            Module::Theory(t) => Module::Theory(Theory {
                name: t.name.clone(),
                meta: t.meta.as_ref().map(&mut *f),
                declarations: t
                    .declarations
                    .iter()
                    .map(|d| match d {
                        Declaration::Constant(c) => Declaration::Constant(Constant {
                            name: c.name.clone(),
                            tp: c.tp.as_ref().map(|t| t.map_uris(f)),
                            def: c.def.as_ref().map(|t| t.map_uris(f)),
                        }),
                        Declaration::Import(i) => Declaration::Import(Import {
                            name: i.name.clone(),
                            from: f(&i.from),
                            assignments: i.assignments.iter().map(|a| a.map_uris(f)).collect(),
                        }),
                        Declaration::Notation(n) => Declaration::Notation(n.map_uris(f)),
                    })
                    .collect(),
            }),
            Module::View(v) => Module::View(View {
                name: v.name.clone(),
                from: f(&v.from),
                to: f(&v.to),
                assignments: v.assignments.iter().map(|a| a.map_uris(f)).collect(),
            }),
            Module::Style(s) => Module::Style(Style {
                name: s.name.clone(),
                imports: s.imports.iter().map(&mut *f).collect(),
                notations: s.notations.iter().map(|n| n.map_uris(f)).collect(),
            }),
        }
    }
}

/// A document: a base URI and an ordered list of modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub base: MmtUri,
    pub modules: Vec<Module>,
}

impl Document {
    pub fn new(base: MmtUri) -> Self {
        Document { base: base.doc_uri(), modules: Vec::new() }
    }

    pub fn module_uri(&self, module: &Module) -> MmtUri {
        self.base.with_module(module.name().clone())
    }

    pub fn module(&self, name: &LocalName) -> Option<&Module> {
        self.modules.iter().find(|m| m.name() == name)
    }

    pub fn module_uris(&self) -> Vec<MmtUri> {
        self.modules.iter().map(|m| self.module_uri(m)).collect()
    }

    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Document {
        Document { base: self.base.clone(), modules: self.modules.iter().map(|m| m.map_uris(f)).collect() }
    }
}
