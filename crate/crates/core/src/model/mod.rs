//! In-memory theory graphs: documents, theories, views, styles, terms and
//! morphisms, plus decomposition into atomic declarations.

pub mod atoms;
mod document;
pub mod graph;
mod morphism;
mod notation;
mod term;

pub use atoms::{atomize, AtomPayload, AtomicDecl};
pub use document::{Assignment, Constant, Declaration, Document, Import, Module, Style, Theory, View};
pub use graph::{assemble, GraphError, Item, TheoryGraph};
pub use morphism::{parse_morphism, parse_morphism_absolute, Morphism};
pub use notation::{Assoc, Fixity, Notation, Role};
pub use term::{alpha_eq, Term, VarDecl};

/// Reserved import name under which a theory's meta-theory is visible.
pub const META: &str = "meta";
