mod support;

use mmt_cli::{Format, Outcome, Request, Service, ServiceConfig};
use mmt_core::abox::RelName;
use proptest::prelude::*;
use support::*;

fn service() -> (tempfile::TempDir, Service) {
    let dir = algebra_store();
    let s = Service::open(&ServiceConfig { root: dir.path().to_path_buf(), ..Default::default() }).unwrap();
    (dir, s)
}

fn arb_rel() -> impl Strategy<Value = String> {
    let base = prop::sample::select(RelName::ALL.to_vec()).prop_map(|r| r.to_string());
    base.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("({e})^-1")),
            inner.clone().prop_map(|e| format!("({e})+")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} ; {b}")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a} | {b})")),
        ]
    })
}

fn uris_in_xml(body: &str) -> Vec<String> {
    body.split("<uri>").skip(1).map(|s| s.split("</uri>").next().unwrap().replace("&amp;", "&")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn lines_and_xml_list_the_same_uris(rel in arb_rel(), start in prop::sample::select(vec!["Ring", "Magma", "Distrib", "Integers"])) {
        let (_d, s) = service();
        let start = format!("{ALG}?{start}");
        let q = || Request::Query { start: start.clone(), rel: rel.clone() };
        let lines = s.handle(q(), Format::Lines);
        let xml = s.handle(q(), Format::Xml);
        prop_assert_eq!(lines.outcome, Outcome::Ok);
        prop_assert_eq!(xml.outcome, Outcome::Ok);
        let listed: Vec<String> = lines.body.lines().map(str::to_string).collect();
        let count = format!("count=\"{}\"", listed.len());
        prop_assert!(xml.body.contains(&count), "{}", xml.body);
        prop_assert_eq!(uris_in_xml(&xml.body), listed);
    }
}

#[test]
fn outcomes_map_to_codes() {
    for (o, exit, status) in [
        (Outcome::Ok, 0, 200),
        (Outcome::Rejected, 1, 409),
        (Outcome::NotFound, 1, 404),
        (Outcome::BadRequest, 2, 400),
        (Outcome::Conflict, 1, 409),
        (Outcome::Failed, 1, 500),
    ] {
        assert_eq!((o.exit_code(), o.http_status()), (exit, status), "{o:?}");
    }
}

#[test]
fn answers_do_not_depend_on_earlier_requests() {
    let (_d, s) = service();
    let deref = || Request::Deref { uri: format!("{ALG}?Ring"), at: None, self_contained: false };
    let first = s.handle(deref(), Format::Xml);
    s.handle(Request::Present { uri: format!("{ALG}?Ring"), style: None, target: "html".into() }, Format::Xml);
    s.handle(Request::Flatten { theory: format!("{ALG}?Ring") }, Format::Xml);
    assert_eq!(s.handle(deref(), Format::Xml), first);
    let past = s.handle(
        Request::Deref { uri: format!("{ALG}?Ring"), at: Some("1".into()), self_contained: false },
        Format::Xml,
    );
    assert_eq!(past, first);
    let unknown = s.handle(
        Request::Deref { uri: format!("{ALG}?Ring"), at: Some("9".into()), self_contained: false },
        Format::Lines,
    );
    assert_eq!(unknown.outcome, Outcome::NotFound);
    assert!(unknown.body.starts_with("ERROR RevisionUnknown "), "{}", unknown.body);
}
