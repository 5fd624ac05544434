//! MMT-URIs of the form `doc?mod?sym`.
//!
//! `doc` is an ordinary URI without query or fragment, `mod` is a
//! `/`-separated path to a (possibly nested) module and `sym` is a
//! `/`-separated path `imp1/.../impn/con` through named imports to a
//! declaration. Every segment is a non-empty sequence of RFC 3986 `pchar`s.
//!
//! Parsing is purely local: no document content is ever consulted.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UriError {
    #[error("malformed URI `{text}`: {reason}")]
    Malformed { text: String, reason: String },
    #[error("cannot resolve `{reference}` against `{base}`: {reason}")]
    MissingContext { base: String, reference: String, reason: String },
}

fn malformed(text: &str, reason: impl Into<String>) -> UriError {
    UriError::Malformed { text: text.to_string(), reason: reason.into() }
}

/// A non-empty `/`-separated path of segments, stored %-decoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalName(Vec<String>);

impl LocalName {
    /// Builds a name from already decoded segments.
    pub fn new<I, S>(segments: I) -> Result<Self, UriError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(malformed("", "a local name needs at least one segment"));
        }
        if segments.iter().any(String::is_empty) {
            return Err(malformed(&segments.join("/"), "empty segment"));
        }
        Ok(LocalName(segments))
    }

    /// A one-segment name. Panics on the empty string.
    pub fn simple(segment: impl Into<String>) -> Self {
        let segment = segment.into();
        assert!(!segment.is_empty(), "empty local name");
        LocalName(vec![segment])
    }

    /// Parses the textual (encoded) form `a/b/c`.
    pub fn parse(text: &str) -> Result<Self, UriError> {
        if text.is_empty() {
            return Err(malformed(text, "empty local name"));
        }
        text.split('/')
            .map(|seg| {
                if seg.is_empty() {
                    Err(malformed(text, "empty segment"))
                } else {
                    decode_segment(seg).map_err(|reason| malformed(text, reason))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(LocalName)
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> &str {
        &self.0[0]
    }

    pub fn last(&self) -> &str {
        &self.0[self.0.len() - 1]
    }

    /// Everything after the first segment, if anything remains.
    pub fn tail(&self) -> Option<LocalName> {
        (self.0.len() > 1).then(|| LocalName(self.0[1..].to_vec()))
    }

    /// Everything before the last segment, if anything remains.
    pub fn init(&self) -> Option<LocalName> {
        (self.0.len() > 1).then(|| LocalName(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn join(&self, other: &LocalName) -> LocalName {
        let mut segments = self.0.clone();
        segments.extend(other.0.iter().cloned());
        LocalName(segments)
    }

    pub fn child(&self, segment: impl Into<String>) -> LocalName {
        let mut segments = self.0.clone();
        let segment = segment.into();
        assert!(!segment.is_empty(), "empty local name segment");
        segments.push(segment);
        LocalName(segments)
    }

    pub fn starts_with(&self, prefix: &LocalName) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// The remainder after `prefix`, `None` if `prefix` is not a proper prefix.
    pub fn strip_prefix(&self, prefix: &LocalName) -> Option<LocalName> {
        if self.0.len() > prefix.0.len() && self.starts_with(prefix) {
            Some(LocalName(self.0[prefix.0.len()..].to_vec()))
        } else {
            None
        }
    }
}

impl fmt::Display for LocalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(&encode_segment(seg))?;
        }
        Ok(())
    }
}

impl FromStr for LocalName {
    type Err = UriError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LocalName::parse(s)
    }
}

/// A canonical identifier `doc?mod?sym`.
///
/// An empty `doc` marks a relative reference; such values only occur before
/// resolution against a base.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MmtUri {
    doc: Arc<str>,
    module: Option<LocalName>,
    symbol: Option<LocalName>,
}

impl MmtUri {
    /// A document-level URI. The text is validated like the `doc` component of
    /// [`parse_uri`].
    pub fn doc(doc: &str) -> Result<Self, UriError> {
        check_doc(doc).map_err(|reason| malformed(doc, reason))?;
        Ok(MmtUri { doc: Arc::from(doc), module: None, symbol: None })
    }

    /// The empty URI, a prefix of every URI.
    pub fn root() -> Self {
        MmtUri { doc: Arc::from(""), module: None, symbol: None }
    }

    pub fn is_root(&self) -> bool {
        self.doc.is_empty() && self.module.is_none()
    }

    pub fn with_module(&self, module: LocalName) -> MmtUri {
        MmtUri { doc: self.doc.clone(), module: Some(module), symbol: None }
    }

    /// Adds (or replaces) the symbol part. Panics if there is no module part.
    pub fn with_symbol(&self, symbol: LocalName) -> MmtUri {
        assert!(self.module.is_some(), "symbol part without module part");
        MmtUri { doc: self.doc.clone(), module: self.module.clone(), symbol: Some(symbol) }
    }

    pub fn doc_str(&self) -> &str {
        &self.doc
    }

    pub fn module(&self) -> Option<&LocalName> {
        self.module.as_ref()
    }

    pub fn symbol(&self) -> Option<&LocalName> {
        self.symbol.as_ref()
    }

    pub fn is_absolute(&self) -> bool {
        !self.doc.is_empty()
    }

    /// Whether the `doc` part starts with an RFC 3986 scheme.
    pub fn has_scheme(&self) -> bool {
        split_reference(&self.doc).scheme.is_some()
    }

    /// The `doc` part alone.
    pub fn doc_uri(&self) -> MmtUri {
        MmtUri { doc: self.doc.clone(), module: None, symbol: None }
    }

    /// The `doc?mod` part, if there is a module part.
    pub fn module_uri(&self) -> Option<MmtUri> {
        self.module.as_ref().map(|m| MmtUri { doc: self.doc.clone(), module: Some(m.clone()), symbol: None })
    }

    pub fn is_doc_level(&self) -> bool {
        self.module.is_none()
    }

    pub fn is_module_level(&self) -> bool {
        self.module.is_some() && self.symbol.is_none()
    }

    pub fn is_symbol_level(&self) -> bool {
        self.symbol.is_some()
    }

    /// Replaces the document part, keeping module and symbol.
    pub fn with_doc(&self, doc: &MmtUri) -> MmtUri {
        MmtUri { doc: doc.doc.clone(), module: self.module.clone(), symbol: self.symbol.clone() }
    }

    /// Shortest textual form relative to `base_doc`: `?mod?sym` when the
    /// document parts agree, the absolute form otherwise.
    pub fn relative_to(&self, base_doc: &MmtUri) -> String {
        if self.doc == base_doc.doc && self.module.is_some() {
            let full = self.to_string();
            full[self.doc.len()..].to_string()
        } else {
            self.to_string()
        }
    }

    /// Component-aware prefix test used for notation applicability.
    ///
    /// Without a module part, `self.doc` must be a string prefix of
    /// `other.doc`. With a module part the documents must agree and the
    /// module path must be a segment prefix; likewise for the symbol part.
    pub fn is_prefix_of(&self, other: &MmtUri) -> bool {
        match (&self.module, &self.symbol) {
            (None, _) => other.doc.starts_with(&*self.doc),
            (Some(m), None) => self.doc == other.doc && other.module.as_ref().is_some_and(|om| om.starts_with(m)),
            (Some(m), Some(s)) => {
                self.doc == other.doc
                    && other.module.as_ref() == Some(m)
                    && other.symbol.as_ref().is_some_and(|os| os.starts_with(s))
            }
        }
    }

    /// Specificity of a prefix: longer is more specific.
    pub fn specificity(&self) -> (usize, usize, usize) {
        (self.doc.len(), self.module.as_ref().map_or(0, LocalName::len), self.symbol.as_ref().map_or(0, LocalName::len))
    }
}

impl fmt::Display for MmtUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.doc)?;
        if let Some(m) = &self.module {
            write!(f, "?{m}")?;
            if let Some(s) = &self.symbol {
                write!(f, "?{s}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MmtUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{self}>")
    }
}

impl PartialOrd for MmtUri {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by canonical textual form.
impl Ord for MmtUri {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl FromStr for MmtUri {
    type Err = UriError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_uri(s)
    }
}

impl serde::Serialize for MmtUri {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for MmtUri {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_uri(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `doc?mod?sym`, `doc?mod` or `doc`. The doc part may be empty
/// (`?mod?sym`), which yields a relative value.
pub fn parse_uri(text: &str) -> Result<MmtUri, UriError> {
    if text.is_empty() {
        return Err(malformed(text, "empty URI"));
    }
    let mut parts = text.split('?');
    let doc = parts.next().unwrap_or_default();
    let module = parts.next();
    let symbol = parts.next();
    if parts.next().is_some() {
        return Err(malformed(text, "more than two `?` separators"));
    }
    check_doc(doc).map_err(|reason| malformed(text, reason))?;
    let module = module.map(LocalName::parse).transpose().map_err(|e| rewrap(text, e))?;
    let symbol = symbol.map(LocalName::parse).transpose().map_err(|e| rewrap(text, e))?;
    Ok(MmtUri { doc: Arc::from(doc), module, symbol })
}

fn rewrap(text: &str, e: UriError) -> UriError {
    match e {
        UriError::Malformed { reason, .. } => malformed(text, reason),
        other => other,
    }
}

/// Canonical textual form; identical to `Display`.
pub fn format_uri(uri: &MmtUri) -> String {
    uri.to_string()
}

/// Resolves a reference against an absolute base.
///
/// Besides ordinary RFC 3986 references this handles `??sym` (same module,
/// new symbol) and `?/mod?sym` (nested module below the base module).
pub fn resolve_relative(base: &MmtUri, reference: &str) -> Result<MmtUri, UriError> {
    if !base.is_absolute() {
        return Err(UriError::MissingContext {
            base: base.to_string(),
            reference: reference.to_string(),
            reason: "base URI has no document part".into(),
        });
    }
    let missing_module = || UriError::MissingContext {
        base: base.to_string(),
        reference: reference.to_string(),
        reason: "base URI has no module part".into(),
    };
    if reference.contains('#') {
        return Err(malformed(reference, "fragments are not allowed"));
    }
    if let Some(rest) = reference.strip_prefix("??") {
        let module = base.module.clone().ok_or_else(missing_module)?;
        if rest.contains('?') {
            return Err(malformed(reference, "more than two `?` separators"));
        }
        let symbol = LocalName::parse(rest).map_err(|e| rewrap(reference, e))?;
        return Ok(MmtUri { doc: base.doc.clone(), module: Some(module), symbol: Some(symbol) });
    }
    if let Some(rest) = reference.strip_prefix("?/") {
        let outer = base.module.clone().ok_or_else(missing_module)?;
        let parsed = parse_uri(&format!("?{rest}")).map_err(|e| rewrap(reference, e))?;
        let inner = parsed.module.expect("module part present after `?`");
        return Ok(MmtUri { doc: base.doc.clone(), module: Some(outer.join(&inner)), symbol: parsed.symbol });
    }
    if reference.is_empty() {
        return Ok(base.clone());
    }
    let parsed = parse_uri(reference)?;
    if parsed.doc.is_empty() {
        // `?mod?sym`: the RFC 3986 rule for a query-only reference.
        return Ok(MmtUri { doc: base.doc.clone(), module: parsed.module, symbol: parsed.symbol });
    }
    let doc = resolve_rfc3986(&base.doc, &parsed.doc);
    Ok(MmtUri { doc: Arc::from(doc.as_str()), module: parsed.module, symbol: parsed.symbol })
}

struct RefParts<'a> {
    scheme: Option<&'a str>,
    authority: Option<&'a str>,
    path: &'a str,
}

fn split_reference(s: &str) -> RefParts<'_> {
    let (scheme, rest) = match s.find(':') {
        Some(i)
            if i > 0
                && s[..i].starts_with(|c: char| c.is_ascii_alphabetic())
                && s[..i].chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
                && !s[..i].contains('/') =>
        {
            (Some(&s[..i]), &s[i + 1..])
        }
        _ => (None, s),
    };
    if let Some(after) = rest.strip_prefix("//") {
        let end = after.find('/').unwrap_or(after.len());
        RefParts { scheme, authority: Some(&after[..end]), path: &after[end..] }
    } else {
        RefParts { scheme, authority: None, path: rest }
    }
}

/// RFC 3986 section 5.2.2 restricted to query- and fragment-free references.
fn resolve_rfc3986(base: &str, reference: &str) -> String {
    let b = split_reference(base);
    let r = split_reference(reference);
    let (scheme, authority, path);
    if let Some(s) = r.scheme {
        scheme = Some(s);
        authority = r.authority;
        path = remove_dot_segments(r.path);
    } else {
        scheme = b.scheme;
        if r.authority.is_some() {
            authority = r.authority;
            path = remove_dot_segments(r.path);
        } else {
            authority = b.authority;
            if r.path.is_empty() {
                path = b.path.to_string();
            } else if r.path.starts_with('/') {
                path = remove_dot_segments(r.path);
            } else {
                path = remove_dot_segments(&merge_paths(b.authority.is_some(), b.path, r.path));
            }
        }
    }
    let mut out = String::new();
    if let Some(s) = scheme {
        out.push_str(s);
        out.push(':');
    }
    if let Some(a) = authority {
        out.push_str("//");
        out.push_str(a);
    }
    out.push_str(&path);
    out
}

fn merge_paths(base_has_authority: bool, base_path: &str, ref_path: &str) -> String {
    if base_has_authority && base_path.is_empty() {
        format!("/{ref_path}")
    } else {
        match base_path.rfind('/') {
            Some(i) => format!("{}{}", &base_path[..=i], ref_path),
            None => ref_path.to_string(),
        }
    }
}

fn remove_dot_segments(path: &str) -> String {
    let mut input = path.to_string();
    let mut output = String::new();
    while !input.is_empty() {
        if let Some(rest) = input.strip_prefix("../") {
            input = rest.to_string();
        } else if let Some(rest) = input.strip_prefix("./") {
            input = rest.to_string();
        } else if input.starts_with("/./") {
            input = input[2..].to_string();
        } else if input == "/." {
            input = "/".to_string();
        } else if input.starts_with("/../") || input == "/.." {
            input = if input == "/.." { "/".to_string() } else { input[3..].to_string() };
            match output.rfind('/') {
                Some(i) => output.truncate(i),
                None => output.clear(),
            }
        } else if input == "." || input == ".." {
            input.clear();
        } else {
            let start = usize::from(input.starts_with('/'));
            let end = input[start..].find('/').map_or(input.len(), |i| i + start);
            output.push_str(&input[..end]);
            input = input[end..].to_string();
        }
    }
    output
}

fn is_unreserved(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~')
}

fn is_sub_delim(c: char) -> bool {
    matches!(c, '!' | '$' | '&' | '\'' | '(' | ')' | '*' | '+' | ',' | ';' | '=')
}

fn is_pchar(c: char) -> bool {
    is_unreserved(c) || is_sub_delim(c) || matches!(c, ':' | '@') || is_ucschar(c)
}

fn is_ucschar(c: char) -> bool {
    !c.is_ascii() && !c.is_control() && !c.is_whitespace()
}

fn check_doc(doc: &str) -> Result<(), String> {
    let bytes = doc.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = doc[i..].chars().next().expect("in bounds");
        match c {
            '%' => {
                if !(bytes.get(i + 1).is_some_and(u8::is_ascii_hexdigit)
                    && bytes.get(i + 2).is_some_and(u8::is_ascii_hexdigit))
                {
                    return Err("bad %-escape in document part".into());
                }
                i += 3;
                continue;
            }
            '#' => return Err("document part must not contain a fragment".into()),
            '/' | '?' | '[' | ']' => {}
            c if is_pchar(c) => {}
            c => return Err(format!("illegal character {c:?} in document part")),
        }
        i += c.len_utf8();
    }
    Ok(())
}

fn decode_segment(seg: &str) -> Result<String, String> {
    let bytes = seg.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = seg
                .get(i + 1..i + 3)
                .filter(|h| h.bytes().all(|b| b.is_ascii_hexdigit()))
                .ok_or_else(|| format!("bad %-escape in segment `{seg}`"))?;
            out.push(u8::from_str_radix(hex, 16).expect("checked hex digits"));
            i += 3;
        } else {
            let c = seg[i..].chars().next().expect("in bounds");
            if !is_pchar(c) {
                return Err(format!("illegal character {c:?} in segment `{seg}`"));
            }
            let mut buf = [0u8; 4];
            out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            i += c.len_utf8();
        }
    }
    String::from_utf8(out).map_err(|_| format!("segment `{seg}` is not UTF-8 after decoding"))
}

/// `;` is escaped because it separates morphism components.
fn encode_segment(seg: &str) -> String {
    let mut out = String::with_capacity(seg.len());
    for c in seg.chars() {
        if c != ';' && is_pchar(c) {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}
