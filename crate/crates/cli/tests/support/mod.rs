#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use mmt_cli::{Service, ServiceConfig};

pub const ALG: &str = "http://cds.omdoc.org/math/algebra/algegra1.omdoc";
pub const VIEWS: &str = "http://cds.omdoc.org/math/algebra/views.omdoc";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn mmt(store: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_mmt"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("MMT_STORE")
        .output()
        .expect("mmt runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Starts a server over a store in the background; returns its base URL.
pub fn serve(store: &Path) -> String {
    let service = Arc::new(Service::open(&ServiceConfig { root: store.to_path_buf(), ..Default::default() }).unwrap());
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    listener.set_nonblocking(true).unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, mmt_cli::http::router(service)).await.unwrap();
        });
    });
    format!("http://{addr}")
}

pub struct Reply {
    pub status: u16,
    pub content_type: String,
    pub body: String,
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn reply(mut r: ureq::http::Response<ureq::Body>) -> Reply {
    let content_type = r.headers().get("content-type").and_then(|v| v.to_str().ok()).unwrap_or_default().to_string();
    Reply { status: r.status().as_u16(), content_type, body: r.body_mut().read_to_string().unwrap() }
}

pub fn get(base: &str, path: &str, params: &[(&str, &str)]) -> Reply {
    let mut req = agent().get(format!("{base}{path}"));
    for (k, v) in params {
        req = req.query(*k, *v);
    }
    reply(req.call().unwrap())
}

/// POSTs files (and an optional message field) as multipart/form-data.
pub fn post(base: &str, path: &str, params: &[(&str, &str)], files: &[PathBuf], message: Option<&str>) -> Reply {
    const B: &str = "mmt-test-boundary-7d1f";
    let mut body = Vec::new();
    for f in files {
        let name = f.display().to_string();
        body.extend(format!(
            "--{B}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{name}\"\r\nContent-Type: application/xml\r\n\r\n"
        ).bytes());
        body.extend(std::fs::read(f).unwrap());
        body.extend(b"\r\n");
    }
    if let Some(m) = message {
        body.extend(format!("--{B}\r\nContent-Disposition: form-data; name=\"message\"\r\n\r\n{m}\r\n").bytes());
    }
    body.extend(format!("--{B}--\r\n").bytes());
    let mut req =
        agent().post(format!("{base}{path}")).header("Content-Type", format!("multipart/form-data; boundary={B}"));
    for (k, v) in params {
        req = req.query(*k, *v);
    }
    reply(req.send(&body[..]).unwrap())
}

/// A store holding the algebra fixture and its views, committed via the CLI.
pub fn algebra_store() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let r = mmt(
        dir.path(),
        &[
            "commit",
            "-m",
            "algebra",
            fixture("algebra1.omdoc").to_str().unwrap(),
            fixture("views.omdoc").to_str().unwrap(),
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    dir
}

/// One logical request, expressed for both surfaces.
pub struct Pair {
    pub name: &'static str,
    pub cli: Vec<String>,
    pub path: &'static str,
    pub params: Vec<(&'static str, String)>,
    /// Files to POST; `None` means GET.
    pub files: Option<Vec<PathBuf>>,
    pub message: Option<&'static str>,
}

fn pair(name: &'static str, cli: &[&str], path: &'static str, params: &[(&'static str, &str)]) -> Pair {
    Pair {
        name,
        cli: cli.iter().map(|s| s.to_string()).collect(),
        path,
        params: params.iter().map(|(k, v)| (*k, v.to_string())).collect(),
        files: None,
        message: None,
    }
}

/// Fifteen requests covering every endpoint, including failures. The first
/// one commits the algebra fixture, so it runs against empty stores.
pub fn parity_pairs() -> Vec<Pair> {
    let alg = fixture("algebra1.omdoc");
    let views = fixture("views.omdoc");
    let bad = fixture("invalid/04-unresolved-symbol.omdoc");
    let (a, v, b) = (alg.to_str().unwrap(), views.to_str().unwrap(), bad.to_str().unwrap());
    let ring = format!("{ALG}?Ring");
    let magma = format!("{ALG}?Magma");
    let add = format!("{ALG}?Ring?add/grp/mon/mag/*");
    let mult = format!("{ALG}?Ring?mult/mag/*");
    let mut commit = pair("commit", &["commit", "--format=xml", "-m", "algebra", a, v], "/commit", &[]);
    commit.files = Some(vec![alg.clone(), views.clone()]);
    commit.message = Some("algebra");
    let mut validate = pair(
        "validate",
        &["validate", "--format=xml", "--level=structural", a],
        "/validate",
        &[("level", "structural")],
    );
    validate.files = Some(vec![alg.clone()]);
    let mut rejected = pair("rejected commit", &["commit", "--format=xml", "-m", "bad", b], "/commit", &[]);
    rejected.files = Some(vec![bad.clone()]);
    rejected.message = Some("bad");
    vec![
        commit,
        validate,
        rejected,
        pair("deref add", &["deref", &add], "/deref", &[("uri", &add)]),
        pair("deref mult", &["deref", &mult], "/deref", &[("uri", &mult)]),
        pair(
            "deref self-contained",
            &["deref", "--self-contained", &ring],
            "/deref",
            &[("uri", &ring), ("self-contained", "true")],
        ),
        pair(
            "deref unknown",
            &["deref", "http://example.org/none.omdoc"],
            "/deref",
            &[("uri", "http://example.org/none.omdoc")],
        ),
        pair("deref malformed", &["deref", "not a uri"], "/deref", &[("uri", "not a uri")]),
        pair(
            "query closure",
            &["query", "--format=xml", &ring, "(Imports)+"],
            "/query",
            &[("start", &ring), ("rel", "(Imports)+")],
        ),
        pair(
            "query inverse",
            &["query", "--format=xml", &magma, "Imports^-1"],
            "/query",
            &[("start", &magma), ("rel", "Imports^-1")],
        ),
        pair("cone backward", &["cone", "--format=xml", &ring], "/cone", &[("uri", &ring)]),
        pair(
            "cone forward one-step",
            &["cone", "--format=xml", "--direction=forward", "--one-step", &magma],
            "/cone",
            &[("uri", &magma), ("direction", "forward"), ("transitive", "false")],
        ),
        pair("present html", &["present", "--format=html", &ring], "/present", &[("uri", &ring), ("format", "html")]),
        pair("abox", &["abox", VIEWS], "/abox", &[("doc", VIEWS)]),
        pair("flatten", &["flatten", "--format=xml", &ring], "/flatten", &[("uri", &ring)]),
    ]
}

/// Runs every pair against a fresh CLI store and a fresh HTTP store and
/// returns the names of pairs whose bodies differ.
pub fn parity_mismatches() -> Vec<String> {
    let cli_store = tempfile::tempdir().unwrap();
    let http_store = tempfile::tempdir().unwrap();
    let base = serve(http_store.path());
    let mut bad = Vec::new();
    for p in parity_pairs() {
        let args: Vec<&str> = p.cli.iter().map(String::as_str).collect();
        let r = mmt(cli_store.path(), &args);
        let cli_body = if r.stdout.is_empty() { r.stderr } else { r.stdout };
        let params: Vec<(&str, &str)> = p.params.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let h = match &p.files {
            Some(files) => post(&base, p.path, &params, files, p.message),
            None => get(&base, p.path, &params),
        };
        if cli_body != h.body || cli_body.is_empty() {
            bad.push(format!("{}:\n  cli:  {cli_body:?}\n  http: {:?}", p.name, h.body));
        }
    }
    bad
}
