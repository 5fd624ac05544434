use std::fmt;

use crate::uri::{parse_uri, resolve_relative, LocalName, MmtUri, UriError};

/// A theory morphism expression.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Morphism {
    Identity(MmtUri),
    /// The morphism induced by the import path `path` inside `theory`.
    /// Its domain is the theory reached at the end of the path.
    ImportLink {
        theory: MmtUri,
        path: LocalName,
    },
    ViewLink(MmtUri),
    /// `first` then `second` (diagram order).
    Compose(Box<Morphism>, Box<Morphism>),
}

impl Morphism {
    pub fn compose(first: Morphism, second: Morphism) -> Morphism {
        Morphism::Compose(Box::new(first), Box::new(second))
    }

    pub fn import(theory: MmtUri, path: LocalName) -> Morphism {
        Morphism::ImportLink { theory, path }
    }

    /// The atomic links in diagram order.
    pub fn links(&self) -> Vec<&Morphism> {
        match self {
            Morphism::Compose(a, b) => {
                let mut out = a.links();
                out.extend(b.links());
                out
            }
            other => vec![other],
        }
    }

    /// The URI each atomic link stands for: the theory for identities, the
    /// (possibly induced) import for import links, the view for view links.
    pub fn link_uris(&self) -> Vec<MmtUri> {
        self.links()
            .into_iter()
            .map(|l| match l {
                Morphism::Identity(t) => t.clone(),
                Morphism::ImportLink { theory, path } => theory.with_symbol(path.clone()),
                Morphism::ViewLink(v) => v.clone(),
                Morphism::Compose(..) => unreachable!("links are atomic"),
            })
            .collect()
    }

    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Morphism {
        match self {
            Morphism::Identity(t) => Morphism::Identity(f(t)),
            Morphism::ImportLink { theory, path } => Morphism::ImportLink { theory: f(theory), path: path.clone() },
            Morphism::ViewLink(v) => Morphism::ViewLink(f(v)),
            Morphism::Compose(a, b) => Morphism::compose(a.map_uris(f), b.map_uris(f)),
        }
    }

    /// Textual form with URIs relativized against `base_doc`.
    pub fn format_relative(&self, base_doc: &MmtUri) -> String {
        self.links()
            .into_iter()
            .map(|l| match l {
                Morphism::Identity(t) => format!("id({})", t.relative_to(base_doc)),
                Morphism::ImportLink { theory, path } => theory.with_symbol(path.clone()).relative_to(base_doc),
                Morphism::ViewLink(v) => v.relative_to(base_doc),
                Morphism::Compose(..) => unreachable!("links are atomic"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .links()
            .into_iter()
            .map(|l| match l {
                Morphism::Identity(t) => format!("id({t})"),
                Morphism::ImportLink { theory, path } => theory.with_symbol(path.clone()).to_string(),
                Morphism::ViewLink(v) => v.to_string(),
                Morphism::Compose(..) => unreachable!("links are atomic"),
            })
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism({self})")
    }
}

/// Parses `link;link;...` where a link is `id(T)`, an import path
/// `T?imp1/.../impn`, or a view `V`. URIs are resolved against `base`.
pub fn parse_morphism(text: &str, base: &MmtUri) -> Result<Morphism, UriError> {
    let mut result: Option<Morphism> = None;
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            return Err(UriError::Malformed { text: text.to_string(), reason: "empty morphism component".into() });
        }
        let link = if let Some(inner) = part.strip_prefix("id(").and_then(|p| p.strip_suffix(')')) {
            let t = resolve_relative(base, inner)?;
            if !t.is_module_level() {
                return Err(UriError::Malformed {
                    text: text.to_string(),
                    reason: "identity needs a theory URI".into(),
                });
            }
            Morphism::Identity(t)
        } else {
            let u = resolve_relative(base, part)?;
            match (u.module_uri(), u.symbol()) {
                (Some(theory), Some(path)) => Morphism::ImportLink { theory, path: path.clone() },
                (Some(_), None) => Morphism::ViewLink(u),
                (None, _) => {
                    return Err(UriError::Malformed {
                        text: text.to_string(),
                        reason: "morphism component must name a module".into(),
                    })
                }
            }
        };
        result = Some(match result {
            None => link,
            Some(prev) => Morphism::compose(prev, link),
        });
    }
    result.ok_or_else(|| UriError::Malformed { text: text.to_string(), reason: "empty morphism".into() })
}

/// Absolute-form parse, for command lines and tests.
pub fn parse_morphism_absolute(text: &str) -> Result<Morphism, UriError> {
    // Any absolute base works; absolute components ignore it.
    let base = parse_uri("urn:x-mmt:none")?;
    parse_morphism(text, &base)
}
