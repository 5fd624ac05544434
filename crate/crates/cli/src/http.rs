//! HTTP front end; every answer is XML.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Multipart, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, post};
use axum::Router;

use crate::{Format, Outcome, Request, Response, Service, XML};

type Params = Query<HashMap<String, String>>;

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/deref", get(deref))
        .route("/abox", get(abox))
        .route("/query", get(query))
        .route("/cone", get(cone))
        .route("/present", get(present))
        .route("/flatten", get(flatten))
        .route("/validate", post(validate))
        .route("/commit", post(commit))
        .with_state(service)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(service)).await
}

fn reply(r: Response) -> HttpResponse {
    let status = StatusCode::from_u16(r.outcome.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, r.content_type)], r.body).into_response()
}

fn bad_request(msg: &str) -> HttpResponse {
    reply(Response {
        outcome: Outcome::BadRequest,
        body: format!("<error code=\"UsageError\">{}</error>\n", mmt_core::reader::escape(msg)),
        content_type: XML,
    })
}

async fn run(service: Arc<Service>, request: Request) -> HttpResponse {
    match tokio::task::spawn_blocking(move || service.handle(request, Format::Xml)).await {
        Ok(r) => reply(r),
        Err(e) => reply(Response {
            outcome: Outcome::Failed,
            body: format!("<error code=\"Internal\">{}</error>\n", mmt_core::reader::escape(&e.to_string())),
            content_type: XML,
        }),
    }
}

fn required(p: &HashMap<String, String>, key: &str) -> Result<String, String> {
    p.get(key).cloned().ok_or_else(|| format!("missing parameter `{key}`"))
}

fn flag(p: &HashMap<String, String>, key: &str) -> bool {
    matches!(p.get(key).map(String::as_str), Some("true" | "1" | "yes" | ""))
}

macro_rules! need {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(msg) => return bad_request(&msg),
        }
    };
}

async fn deref(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let uri = need!(required(&p, "uri"));
    let self_contained = flag(&p, "self-contained");
    run(s, Request::Deref { uri, at: p.get("at").cloned(), self_contained }).await
}

async fn abox(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let doc = need!(required(&p, "doc"));
    run(s, Request::Abox { doc }).await
}

async fn query(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let start = need!(required(&p, "start"));
    let rel = need!(required(&p, "rel"));
    run(s, Request::Query { start, rel }).await
}

async fn cone(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let module = need!(required(&p, "uri"));
    let direction = p.get("direction").cloned().unwrap_or_else(|| "backward".into());
    let transitive = p.get("transitive").is_none_or(|v| v != "false" && v != "0");
    run(s, Request::Cone { module, direction, transitive }).await
}

async fn present(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let uri = need!(required(&p, "uri"));
    let target = p.get("format").cloned().unwrap_or_else(|| "html".into());
    run(s, Request::Present { uri, style: p.get("style").cloned(), target }).await
}

async fn flatten(State(s): State<Arc<Service>>, Query(p): Params) -> HttpResponse {
    let theory = need!(required(&p, "uri"));
    run(s, Request::Flatten { theory }).await
}

/// File parts keep their file name (or field name) as path; a text field
/// named `message` is returned separately.
async fn read_parts(mut mp: Multipart) -> Result<(Vec<(String, Vec<u8>)>, Option<String>), String> {
    let mut files = Vec::new();
    let mut message = None;
    loop {
        let field = match mp.next_field().await {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) => return Err(e.to_string()),
        };
        let name = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(str::to_string);
        let bytes = field.bytes().await.map_err(|e| e.to_string())?;
        if file_name.is_none() && name == "message" {
            message = Some(String::from_utf8_lossy(&bytes).into_owned());
        } else {
            files.push((file_name.unwrap_or(name), bytes.to_vec()));
        }
    }
    Ok((files, message))
}

async fn validate(State(s): State<Arc<Service>>, Query(p): Params, mp: Multipart) -> HttpResponse {
    let (files, _) = need!(read_parts(mp).await);
    let level = p.get("level").cloned().unwrap_or_else(|| "structural".into());
    run(s, Request::Validate { level, files }).await
}

async fn commit(State(s): State<Arc<Service>>, mp: Multipart) -> HttpResponse {
    let (files, message) = need!(read_parts(mp).await);
    run(s, Request::Commit { files, message: message.unwrap_or_default() }).await
}
