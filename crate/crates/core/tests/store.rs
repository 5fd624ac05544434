mod common;

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use mmt_core::abox::{extract_abox, recover_structure, serialize_facts, AboxFact, FactSet};
use mmt_core::checker::Code;
use mmt_core::present::Target;
use mmt_core::store::*;
use mmt_core::uri::{LocalName, MmtUri};

fn store() -> (tempfile::TempDir, Store) {
    let dir = tempfile::tempdir().unwrap();
    let s = Store::open(dir.path().join("store"), StoreConfig::default()).unwrap();
    (dir, s)
}

fn commit_fixture(s: &Store, name: &str) -> Revision {
    s.commit(&[fixture_path(name)], &format!("add {name}")).unwrap()
}

#[test]
fn first_commit_writes_document_and_abox() {
    let (_d, s) = store();
    let r = commit_fixture(&s, "algebra1.omdoc");
    assert_eq!(r.number, 1);
    assert_eq!(r.changed, vec!["docs/cds.omdoc.org/math/algebra/algegra1.omdoc".to_string()]);
    let abox = s.root().join("abox/cds.omdoc.org/math/algebra/algegra1.omdoc.abox");
    let stored = std::fs::read_to_string(abox).unwrap();
    assert_eq!(stored, serialize_facts(&extract_abox(&load("algebra1.omdoc"))));
    let idx = std::fs::read_to_string(s.root().join("index/Imports.idx")).unwrap();
    assert!(idx.contains(&format!("{ALG}?Ring\t{ALG}?CGroup\n")));
    let catalog: serde_json::Value =
        serde_json::from_slice(&std::fs::read(s.root().join("catalog.json")).unwrap()).unwrap();
    assert_eq!(catalog[0]["prefix"], ALG);
}

#[test]
fn separate_compilation_parses_only_the_commit() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    assert_eq!(s.last_commit_parses(), 1);
    commit_fixture(&s, "views.omdoc");
    assert_eq!(s.last_commit_parses(), 1);
    pad(&s, 100);
    assert_eq!(s.last_commit_parses(), 100);
    s.commit_bytes(&[user_of_ring(0)], "warm-up").unwrap();
    let start = Instant::now();
    s.commit_bytes(&[user_of_ring(1)], "user").unwrap();
    let elapsed = start.elapsed();
    assert_eq!(s.last_commit_parses(), 1);
    assert!(elapsed < Duration::from_millis(100), "{elapsed:?}");
}

#[test]
fn invalid_commits_change_nothing() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    let tsv = std::fs::read_to_string(fixture_path("invalid/expected.tsv")).unwrap();
    for line in tsv.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        let before = s.state_hash().unwrap();
        match s.commit(&[fixture_path(&format!("invalid/{}", cols[0]))], "bad") {
            Err(StoreError::ValidationRejected(r)) => {
                assert!(
                    r.error_set().iter().any(|(c, uri)| c.as_str() == cols[1] && *uri == Some(u(cols[2]))),
                    "{}",
                    r.to_lines()
                );
            }
            other => panic!("{}: {other:?}", cols[0]),
        }
        assert_eq!(s.state_hash().unwrap(), before);
        assert_eq!(s.revision(), 1);
    }
    let unresolved = file("x", r#"<omdoc base="http://example.org/x.omdoc"><theory name="T"><import name="i" from="http://example.org/none.omdoc?N"/></theory></omdoc>"#.into());
    match s.commit_bytes(&[unresolved], "x") {
        Err(StoreError::ValidationRejected(r)) => assert!(r.has_error(Code::UnresolvedReference)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn retrieval_and_history() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    let original = std::fs::read(fixture_path("algebra1.omdoc")).unwrap();
    match s.retrieve(&alg("Ring?add/grp/mon/mag/*"), None).unwrap() {
        Retrieved::Item(xml) => {
            assert!(xml.starts_with(&format!("<item uri=\"{ALG}?Ring?add/grp/mon/mag/*\" base=\"{ALG}\">")), "{xml}");
            assert!(xml.contains(&format!("origin=\"{ALG}?Magma?*\"")), "{xml}");
        }
        other => panic!("{other:?}"),
    }
    let changed = String::from_utf8(original.clone())
        .unwrap()
        .replace("<constant name=\"inv\"/>", "<constant name=\"inv\"/>\n    <constant name=\"unit\"/>");
    s.commit_bytes(&[file("a", changed.clone())], "edit").unwrap();
    commit_fixture(&s, "views.omdoc");
    assert_eq!(s.retrieve(&u(ALG), Some(1)).unwrap(), Retrieved::Document(original));
    assert_eq!(s.retrieve(&u(ALG), None).unwrap(), Retrieved::Document(changed.into_bytes()));
    assert!(matches!(s.retrieve(&u("http://nowhere.org/x.omdoc"), None), Err(StoreError::NotFound(_))));
    assert!(matches!(s.retrieve(&u(ALG), Some(42)), Err(StoreError::RevisionUnknown(42))));
    assert!(matches!(s.retrieve(&alg("Group?unit"), Some(1)), Err(StoreError::NotFound(_))));
    assert!(matches!(s.retrieve(&alg("Group?unit"), None), Ok(Retrieved::Item(_))));
    let bundle = s.deref_xml(&alg("Monoid"), None, true).unwrap();
    assert!(bundle.starts_with(&format!("<bundle uri=\"{ALG}?Monoid\">")));
    assert!(bundle.contains(&format!("<item uri=\"{ALG}?Magma\"")), "{bundle}");
}

#[test]
fn reopening_restores_state() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("s");
    let (facts, rev) = {
        let s = Store::open(&root, StoreConfig::default()).unwrap();
        commit_fixture(&s, "algebra1.omdoc");
        commit_fixture(&s, "views.omdoc");
        (s.facts(), s.revision())
    };
    let s = Store::open(&root, StoreConfig::default()).unwrap();
    assert_eq!(s.facts(), facts);
    assert_eq!(s.revision(), rev);
    commit_fixture(&s, "fol.omdoc");
    assert_eq!(s.revision(), rev + 1);
}

/// Applies the module renaming to every URI of a fact set.
fn rename_facts(f: &FactSet, old: &MmtUri, new: &MmtUri) -> FactSet {
    let map = |u: &MmtUri| -> MmtUri {
        match u.module_uri() {
            Some(m) if m == *old => match u.symbol() {
                Some(s) => new.with_symbol(s.clone()),
                None => new.clone(),
            },
            _ => u.clone(),
        }
    };
    f.iter()
        .map(|x| match x {
            AboxFact::Unary(t, a) => AboxFact::Unary(*t, map(a)),
            AboxFact::Binary(r, a, b) => AboxFact::Binary(*r, map(a), map(b)),
        })
        .collect()
}

fn split_store() -> (tempfile::TempDir, Store) {
    let (d, s) = store();
    let doc =
        |name: &str, body: &str| file(name, format!(r#"<omdoc base="http://example.org/{name}.omdoc">{body}</omdoc>"#));
    s.commit_bytes(&[doc("a", r#"<theory name="Magma"><constant name="*"/><notation for="??*" role="application" fixity="infix" prec-in="50" prec-out="50"/></theory><theory name="Other"/>"#)], "a").unwrap();
    s.commit_bytes(
        &[doc("b", r#"<theory name="Monoid"><import name="mag" from="a.omdoc?Magma"/><constant name="e"/></theory>"#)],
        "b",
    )
    .unwrap();
    s.commit_bytes(&[doc("c", r#"<theory name="Group"><import name="mon" from="b.omdoc?Monoid"/><constant name="x"><type><OMS path="??mon/mag/*"/></type></constant></theory>"#)], "c").unwrap();
    s.commit_bytes(&[doc("d", r#"<view name="v" from="a.omdoc?Magma" to="c.omdoc?Group"><assign symbol="*"><OMS path="c.omdoc?Group?x"/></assign></view>"#)], "d").unwrap();
    s.commit_bytes(&[doc("e", r#"<theory name="Lone"/>"#)], "e").unwrap();
    (d, s)
}

#[test]
fn rename_patches_the_one_step_forward_cone() {
    let (_d, s) = split_store();
    let old = u("http://example.org/a.omdoc?Magma");
    let new = u("http://example.org/a.omdoc?BinOp");
    let before = s.facts();
    let r = s.rename_module(&old, LocalName::simple("BinOp")).unwrap();
    assert_eq!(r.changed, vec!["docs/example.org/a.omdoc", "docs/example.org/b.omdoc", "docs/example.org/d.omdoc"]);
    let after = s.facts();
    assert_eq!(recover_structure(&after).unwrap(), recover_structure(&rename_facts(&before, &old, &new)).unwrap());
    assert!(!after.iter().any(|f| format!("{f}").contains("?Magma")));
    // Everything still validates against the rest of the store.
    for d in s.documents() {
        let bytes = match s.retrieve(&d, None).unwrap() {
            Retrieved::Document(b) => b,
            other => panic!("{other:?}"),
        };
        let report = s.validate(&[(d.to_string(), bytes)], mmt_core::checker::Level::Structural);
        assert!(report.is_ok(), "{}", report.to_lines());
    }
    let c = s.retrieve(&u("http://example.org/c.omdoc?Group?mon/mag/*"), None).unwrap();
    assert!(matches!(c, Retrieved::Item(x) if x.contains("origin=\"http://example.org/a.omdoc?BinOp?*\"")));
}

#[test]
fn rename_edge_cases() {
    let (_d, s) = split_store();
    let old = u("http://example.org/a.omdoc?Magma");
    let before = s.state_hash().unwrap();
    assert!(matches!(s.rename_module(&old, LocalName::simple("Other")), Err(StoreError::NameClash(_))));
    assert_eq!(s.state_hash().unwrap(), before);
    assert!(matches!(
        s.rename_module(&u("http://example.org/a.omdoc?Nope"), LocalName::simple("X")),
        Err(StoreError::UnknownModule(_))
    ));
    let rev = s.revision();
    let r = s.rename_module(&old, LocalName::simple("Magma")).unwrap();
    assert_eq!(r.number, rev + 1);
    assert!(r.changed.is_empty());
}

#[test]
fn rename_in_the_algebra_fixture() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    commit_fixture(&s, "views.omdoc");
    let r = s.rename_module(&alg("Magma"), LocalName::simple("BinOp")).unwrap();
    assert_eq!(r.changed, vec!["docs/cds.omdoc.org/math/algebra/algegra1.omdoc"]);
    assert!(s.facts().contains(&AboxFact::Binary(mmt_core::abox::RelName::Imports, alg("Monoid"), alg("BinOp"))));
}

#[test]
fn notation_collection_opens_only_the_cone() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    commit_fixture(&s, "views.omdoc");
    let c = s.collect_notations(&alg("Ring")).unwrap();
    assert!(c.notations.iter().any(|n| n.uri == alg("Magma?infix")));
    assert_eq!(c.documents_opened, 1);
    let v = s.collect_notations(&views("v2")).unwrap();
    assert_eq!(v.documents_opened, 2);
    pad(&s, 100);
    assert_eq!(s.collect_notations(&views("v2")).unwrap().documents_opened, 2);
    assert_eq!(s.collect_notations(&alg("Ring")).unwrap().documents_opened, 1);
    assert!(matches!(s.collect_notations(&alg("Nope")), Err(StoreError::UnknownModule(_))));

    let (_d2, one) = store();
    commit_fixture(&one, "fol.omdoc");
    let c = one.collect_notations(&u(FOL)).unwrap();
    let got: BTreeSet<String> = c.notations.iter().map(|n| n.uri.to_string()).collect();
    let want: BTreeSet<String> = load("fol.omdoc").modules[0].notations().iter().map(|n| n.uri.to_string()).collect();
    assert_eq!(got, want);
}

#[test]
fn presenting_through_the_store() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    let text = s.present(&alg("Magma"), None, Target::Text).unwrap();
    assert!(text.starts_with("theory Magma\n  *\n"), "{text}");
    s.commit_bytes(
        &[file("st", format!(r#"<omdoc base="http://example.org/st.omdoc"><style name="s"><notation for="{ALG}?Magma" role="theory" fixity="name-only" operator="MAGMA" prec-in="0" prec-out="0"/></style></omdoc>"#))],
        "style",
    )
    .unwrap();
    let styled = s.present(&alg("Magma"), Some(&u("http://example.org/st.omdoc?s")), Target::Text).unwrap();
    assert!(styled.starts_with("theory MAGMA\n"), "{styled}");
}

#[test]
fn readers_never_see_partial_commits() {
    let (_d, s) = store();
    commit_fixture(&s, "algebra1.omdoc");
    let s = std::sync::Arc::new(s);
    let reader = {
        let s = s.clone();
        std::thread::spawn(move || {
            for _ in 0..200 {
                let docs = s.documents().len();
                assert!(docs >= 1);
                let facts = s.facts();
                let declared: BTreeSet<_> = facts
                    .iter()
                    .filter_map(|f| match f {
                        AboxFact::Unary(mmt_core::abox::UnaryType::Document, d) => Some(d.clone()),
                        _ => None,
                    })
                    .collect();
                assert!(!declared.is_empty());
            }
        })
    };
    for i in 0..20 {
        s.commit_bytes(&[user_of_ring(i)], "u").unwrap();
    }
    reader.join().unwrap();
    assert_eq!(s.revision(), 21);
}

/// Serves one fixed document over HTTP for every request.
fn serve_once(body: Vec<u8>, requests: usize) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = format!("http://{}/", listener.local_addr().unwrap());
    let h = std::thread::spawn(move || {
        let mut paths = Vec::new();
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut buf = [0u8; 4096];
            let n = stream.read(&mut buf).unwrap();
            let req = String::from_utf8_lossy(&buf[..n]).to_string();
            paths.push(req.split_whitespace().nth(1).unwrap_or_default().to_string());
            let head = format!("HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len());
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(&body).unwrap();
        }
        paths
    });
    (addr, h)
}

#[test]
fn remote_catalog_entries_are_fetched() {
    let (_d, s) = store();
    let body =
        br#"<omdoc base="http://remote.example/lib/r.omdoc"><theory name="R"><constant name="c"/></theory></omdoc>"#
            .to_vec();
    let (addr, h) = serve_once(body.clone(), 2);
    s.add_catalog_entry("http://remote.example/lib/", &addr).unwrap();
    assert!(matches!(
        s.add_catalog_entry("http://remote.example/lib/", "http://elsewhere/"),
        Err(StoreError::CatalogConflict(_))
    ));
    assert_eq!(s.retrieve(&u("http://remote.example/lib/r.omdoc"), None).unwrap(), Retrieved::Document(body));
    let item = s.deref_xml(&u("http://remote.example/lib/r.omdoc?R?c"), None, false).unwrap();
    assert!(item.contains("<constant name=\"c\"/>"), "{item}");
    assert_eq!(h.join().unwrap(), vec!["/r.omdoc", "/r.omdoc"]);
}

#[test]
fn mirror_paths() {
    assert_eq!(mirror_path(&u("http://a.org/x/y.omdoc")), PathBuf::from("a.org/x/y.omdoc"));
    assert_eq!(mirror_path(&u("http://a.org/x%20y/../z")), PathBuf::from("a.org/x%2520y/%2E%2E/z"));
}
