use std::fmt;
use std::str::FromStr;

use crate::uri::MmtUri;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Constant,
    Application,
    Binder,
    Theory,
    View,
    Document,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixity {
    Prefix,
    Infix,
    Postfix,
    NameOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Assoc {
    #[default]
    Left,
    Right,
    None,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),*];
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $text),* }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($ty::$variant),)*
                    other => Err(format!("unknown {} `{other}`", stringify!($ty).to_lowercase())),
                }
            }
        }
    };
}

keyword_enum!(Role {
    Constant => "constant",
    Application => "application",
    Binder => "binder",
    Theory => "theory",
    View => "view",
    Document => "document",
});

keyword_enum!(Fixity {
    Prefix => "prefix",
    Infix => "infix",
    Postfix => "postfix",
    NameOnly => "name-only",
});

keyword_enum!(Assoc {
    Left => "left",
    Right => "right",
    None => "none",
});

/// A rendering rule applicable to every expression whose URI has
/// `applies_to` as a prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Notation {
    pub uri: MmtUri,
    pub applies_to: MmtUri,
    pub role: Role,
    pub fixity: Fixity,
    pub prec_in: i32,
    pub prec_out: i32,
    pub operator: Option<String>,
    pub separator: Option<String>,
    pub brackets: Option<(String, String)>,
    pub assoc: Assoc,
    /// Which name components fill the operator when no operator text is
    /// given: 0 = document, 1 = module, 2 = symbol.
    pub components: Option<Vec<u8>>,
}

impl Notation {
    pub fn new(uri: MmtUri, applies_to: MmtUri, role: Role, fixity: Fixity, prec: i32) -> Self {
        Notation {
            uri,
            applies_to,
            role,
            fixity,
            prec_in: prec,
            prec_out: prec,
            operator: None,
            separator: None,
            brackets: None,
            assoc: Assoc::Left,
            components: None,
        }
    }

    /// Number of argument holes the fixity admits; `None` for any number.
    pub fn arity(&self) -> Option<usize> {
        match self.fixity {
            Fixity::Infix => Some(2),
            Fixity::Postfix => Some(1),
            Fixity::NameOnly => Some(0),
            Fixity::Prefix => None,
        }
    }

    pub fn brackets(&self) -> (&str, &str) {
        self.brackets.as_ref().map_or(("(", ")"), |(l, r)| (l.as_str(), r.as_str()))
    }

    pub fn separator(&self) -> &str {
        match (&self.separator, self.fixity) {
            (Some(s), _) => s,
            (None, Fixity::Infix) => " ",
            (None, _) => ", ",
        }
    }

    pub fn components(&self) -> &[u8] {
        self.components.as_deref().unwrap_or(&[2])
    }

    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Notation {
        Notation { uri: f(&self.uri), applies_to: f(&self.applies_to), ..self.clone() }
    }
}
