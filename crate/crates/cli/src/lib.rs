//! One request vocabulary shared by the `mmt` command line and the HTTP
//! service, so both produce the same bytes for the same question.

pub mod http;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use mmt_core::abox::parse_rel_expr;
use mmt_core::checker::{Level, PluginRegistry, SyntacticFoundation, ValidationReport};
use mmt_core::cones::Direction;
use mmt_core::flatten::{FlattenError, Flattener};
use mmt_core::present::Target;
use mmt_core::reader::{escape, XmlWriter};
use mmt_core::store::{write_item, Revision, Store, StoreConfig, StoreError};
use mmt_core::uri::{parse_uri, LocalName, MmtUri};
use thiserror::Error;

/// Machine-readable output mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Lines,
    Xml,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lines" => Ok(Format::Lines),
            "xml" => Ok(Format::Xml),
            other => Err(format!("unknown format `{other}` (expected lines or xml)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Lines => "lines",
            Format::Xml => "xml",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Validation failed or a commit was rejected.
    Rejected,
    NotFound,
    BadRequest,
    Conflict,
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::BadRequest => 2,
            _ => 1,
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            Outcome::Ok => 200,
            Outcome::Rejected | Outcome::Conflict => 409,
            Outcome::NotFound => 404,
            Outcome::BadRequest => 400,
            Outcome::Failed => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub outcome: Outcome,
    pub body: String,
    pub content_type: &'static str,
}

pub const TEXT: &str = "text/plain; charset=utf-8";
pub const XML: &str = "text/xml; charset=utf-8";

/// A logical request; URIs and expressions arrive as text.
#[derive(Debug, Clone)]
pub enum Request {
    Validate { level: String, files: Vec<(String, Vec<u8>)> },
    Flatten { theory: String },
    Deref { uri: String, at: Option<String>, self_contained: bool },
    Abox { doc: String },
    Query { start: String, rel: String },
    Cone { module: String, direction: String, transitive: bool },
    Present { uri: String, style: Option<String>, target: String },
    Commit { files: Vec<(String, Vec<u8>)>, message: String },
    Rename { module: String, new_name: String },
}

#[derive(Debug, Error)]
enum ServiceError {
    #[error("{1}")]
    BadRequest(&'static str, String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

impl ServiceError {
    fn code(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(code, _) => code,
            ServiceError::Store(e) => match e {
                StoreError::ValidationRejected(_) => "ValidationRejected",
                StoreError::NotFound(_) => "NotFound",
                StoreError::RevisionUnknown(_) => "RevisionUnknown",
                StoreError::NameClash(_) => "NameClash",
                StoreError::UnknownModule(_) => "UnknownModule",
                StoreError::CatalogConflict(_) => "CatalogConflict",
                StoreError::Remote(_) => "Remote",
                StoreError::Present(_) => "NoApplicableNotation",
                StoreError::Corrupt(_) | StoreError::Io(_) => "Internal",
            },
            ServiceError::Flatten(e) => match e {
                FlattenError::UnknownModule(_) | FlattenError::NotATheory(_) => "UnknownModule",
                _ => "FlattenError",
            },
        }
    }

    fn outcome(&self) -> Outcome {
        match self {
            ServiceError::BadRequest(..) => Outcome::BadRequest,
            ServiceError::Store(e) => match e {
                StoreError::ValidationRejected(_) => Outcome::Rejected,
                StoreError::NotFound(_) | StoreError::RevisionUnknown(_) | StoreError::UnknownModule(_) => {
                    Outcome::NotFound
                }
                StoreError::NameClash(_) | StoreError::CatalogConflict(_) => Outcome::Conflict,
                StoreError::Present(_) => Outcome::NotFound,
                _ => Outcome::Failed,
            },
            ServiceError::Flatten(e) => match e {
                FlattenError::UnknownModule(_) | FlattenError::NotATheory(_) => Outcome::NotFound,
                _ => Outcome::Failed,
            },
        }
    }
}

fn uri_arg(text: &str) -> Result<MmtUri, ServiceError> {
    let u = parse_uri(text).map_err(|e| ServiceError::BadRequest("MalformedUri", e.to_string()))?;
    if !u.has_scheme() {
        return Err(ServiceError::BadRequest("MalformedUri", format!("`{text}` is not an absolute URI")));
    }
    Ok(u)
}

fn parse_arg<T: FromStr<Err = String>>(text: &str) -> Result<T, ServiceError> {
    text.parse().map_err(|e| ServiceError::BadRequest("UsageError", e))
}

fn direction_arg(text: &str) -> Result<Direction, ServiceError> {
    match text {
        "backward" => Ok(Direction::Backward),
        "forward" => Ok(Direction::Forward),
        other => Err(ServiceError::BadRequest("UsageError", format!("unknown direction `{other}`"))),
    }
}

/// Options for opening the service's store.
#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub root: PathBuf,
    /// Meta-theories served by the syntactic foundation, besides theories
    /// without a meta-theory.
    pub syntactic_metas: Vec<MmtUri>,
    pub typed_commits: bool,
}

pub struct Service {
    store: Store,
}

impl Service {
    pub fn open(config: &ServiceConfig) -> Result<Service, StoreError> {
        let mut registry = PluginRegistry::new().with(mmt_core::checker::syntactic_foundation());
        for m in &config.syntactic_metas {
            registry.register(Arc::new(SyntacticFoundation::for_meta(m.clone())));
        }
        let store =
            Store::open(&config.root, StoreConfig { typed: config.typed_commits, registry, ..StoreConfig::default() })?;
        Ok(Service { store })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn handle(&self, request: Request, format: Format) -> Response {
        match self.dispatch(request, format) {
            Ok(r) => r,
            Err(ServiceError::Store(StoreError::ValidationRejected(report))) => report_response(&report, format),
            Err(e) => error_response(&e, format),
        }
    }

    fn dispatch(&self, request: Request, format: Format) -> Result<Response, ServiceError> {
        let ok = |body: String, content_type| Ok(Response { outcome: Outcome::Ok, body, content_type });
        match request {
            Request::Validate { level, files } => {
                let report = self.store.validate(&files, parse_arg::<Level>(&level)?);
                Ok(report_response(&report, format))
            }
            Request::Flatten { theory } => {
                let t = uri_arg(&theory)?;
                let g = self.store.graph(None)?;
                let flat = Flattener::new(&g);
                let consts = flat.flatten_theory(&t, false)?;
                match format {
                    Format::Lines => ok(consts.iter().map(|c| format!("{}\n", c.uri)).collect(), TEXT),
                    Format::Xml => {
                        let mut w = XmlWriter::new();
                        w.open("flat", &[("theory", t.to_string()), ("count", consts.len().to_string())]);
                        for c in &consts {
                            write_item(&mut w, &flat, &c.uri)?;
                        }
                        w.close("flat");
                        ok(w.finish(), XML)
                    }
                }
            }
            Request::Deref { uri, at, self_contained } => {
                let u = uri_arg(&uri)?;
                let at = at
                    .map(|a| {
                        a.parse::<u64>()
                            .map_err(|_| ServiceError::BadRequest("UsageError", format!("bad revision `{a}`")))
                    })
                    .transpose()?;
                ok(self.store.deref_xml(&u, at, self_contained)?, XML)
            }
            Request::Abox { doc } => ok(self.store.abox(&uri_arg(&doc)?)?, TEXT),
            Request::Query { start, rel } => {
                let s = uri_arg(&start)?;
                let e =
                    parse_rel_expr(&rel).map_err(|e| ServiceError::BadRequest("MalformedRelation", e.to_string()))?;
                Ok(uri_list(&self.store.query(&s, &e), format))
            }
            Request::Cone { module, direction, transitive } => {
                let m = uri_arg(&module)?;
                Ok(uri_list(&self.store.cone(&m, direction_arg(&direction)?, transitive)?, format))
            }
            Request::Present { uri, style, target } => {
                let u = uri_arg(&uri)?;
                let style = style.map(|s| uri_arg(&s)).transpose()?;
                let target: Target = parse_arg(&target)?;
                let body = self.store.present(&u, style.as_ref(), target)?;
                ok(body, if target == Target::Html { XML } else { TEXT })
            }
            Request::Commit { files, message } => {
                Ok(revision_response(&self.store.commit_bytes(&files, &message)?, format))
            }
            Request::Rename { module, new_name } => {
                let m = uri_arg(&module)?;
                let n =
                    LocalName::parse(&new_name).map_err(|e| ServiceError::BadRequest("MalformedUri", e.to_string()))?;
                Ok(revision_response(&self.store.rename_module(&m, n)?, format))
            }
        }
    }
}

fn report_response(report: &ValidationReport, format: Format) -> Response {
    let outcome = if report.is_ok() { Outcome::Ok } else { Outcome::Rejected };
    match format {
        Format::Lines => Response { outcome, body: report.to_lines(), content_type: TEXT },
        Format::Xml => Response { outcome, body: report.to_xml(), content_type: XML },
    }
}

fn error_response(e: &ServiceError, format: Format) -> Response {
    let (body, content_type) = match format {
        Format::Lines => (format!("ERROR {} {}\n", e.code(), e.to_string().replace('\n', " ")), TEXT),
        Format::Xml => (format!("<error code=\"{}\">{}</error>\n", e.code(), escape(&e.to_string())), XML),
    };
    Response { outcome: e.outcome(), body, content_type }
}

fn uri_list(uris: &BTreeSet<MmtUri>, format: Format) -> Response {
    match format {
        Format::Lines => {
            Response { outcome: Outcome::Ok, body: uris.iter().map(|u| format!("{u}\n")).collect(), content_type: TEXT }
        }
        Format::Xml => {
            let mut w = XmlWriter::new();
            let attrs = [("count", uris.len().to_string())];
            if uris.is_empty() {
                w.empty("uris", &attrs);
            } else {
                w.open("uris", &attrs);
                for u in uris {
                    w.text_element("uri", &[], &u.to_string());
                }
                w.close("uris");
            }
            Response { outcome: Outcome::Ok, body: w.finish(), content_type: XML }
        }
    }
}

/// Timestamps are left out so that equal requests give equal answers.
fn revision_response(r: &Revision, format: Format) -> Response {
    let body = match format {
        Format::Lines => {
            let mut s = format!("REVISION {}\n", r.number);
            for c in &r.changed {
                s.push_str(&format!("CHANGED {c}\n"));
            }
            s
        }
        Format::Xml => {
            let mut w = XmlWriter::new();
            let attrs =
                [("number", r.number.to_string()), ("author", r.author.clone()), ("message", r.message.clone())];
            if r.changed.is_empty() {
                w.empty("revision", &attrs);
            } else {
                w.open("revision", &attrs);
                for c in &r.changed {
                    w.empty("changed", &[("path", c.clone())]);
                }
                w.close("revision");
            }
            w.finish()
        }
    };
    Response { outcome: Outcome::Ok, body, content_type: if format == Format::Xml { XML } else { TEXT } }
}
