mod support;

use support::*;

#[test]
fn validate_fixture_without_store() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing-here");
    let r = mmt(&missing, &["validate", "--level", "structural", fixture("algebra1.omdoc").to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.starts_with("RESULT structural"), "{}", r.stdout);
    assert!(!missing.exists(), "validation must not create a store");
}

#[test]
fn validate_invalid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let r = mmt(dir.path(), &["validate", fixture("invalid/06-import-cycle.omdoc").to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("STRUCTURAL ImportCycle http://example.org/invalid/06.omdoc?A "), "{}", r.stdout);
}

#[test]
fn grammar_level_accepts_structurally_broken_doc() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("invalid/03-unresolved-import.omdoc");
    assert_eq!(mmt(dir.path(), &["validate", "--level=grammar", f.to_str().unwrap()]).code, 0);
    assert_eq!(mmt(dir.path(), &["validate", "--level=structural", f.to_str().unwrap()]).code, 1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let r = mmt(dir.path(), &["validate", "--level=bogus", "x.omdoc"]);
    assert_eq!(r.code, 2);
    assert!(!r.stderr.is_empty());
    assert_eq!(mmt(dir.path(), &["no-such-command"]).code, 2);
    let r = mmt(dir.path(), &["deref", "not a uri"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("MalformedUri"), "{}", r.stderr);
}

#[test]
fn deref_induced_constant() {
    let store = algebra_store();
    let r = mmt(store.path(), &["deref", &format!("{ALG}?Ring?add/grp/mon/mag/*")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("<constant"), "{}", r.stdout);
    assert!(r.stdout.contains(&format!("{ALG}?Magma?*")), "{}", r.stdout);
    let other = mmt(store.path(), &["deref", &format!("{ALG}?Ring?mult/mag/*")]);
    assert_eq!(other.code, 0);
    assert_ne!(r.stdout, other.stdout);
}

#[test]
fn deref_unknown_is_not_found() {
    let store = algebra_store();
    let r = mmt(store.path(), &["deref", "http://example.org/none.omdoc?X"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.starts_with("<error"), "{}", r.stderr);
}

#[test]
fn query_transitive_imports_sorted() {
    let store = algebra_store();
    let r = mmt(store.path(), &["query", &format!("{ALG}?Ring"), "(Imports)+"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 5, "{}", r.stdout);
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
    for m in ["Magma", "Monoid", "Group", "CGroup", "Distrib"] {
        assert!(lines.contains(&format!("{ALG}?{m}").as_str()), "{m}");
    }
}

#[test]
fn cone_one_step_and_transitive() {
    let store = algebra_store();
    let ring = format!("{ALG}?Ring");
    let all = mmt(store.path(), &["cone", &ring]).stdout;
    let step = mmt(store.path(), &["cone", &ring, "--one-step"]).stdout;
    assert_eq!(all.lines().count(), 6, "{all}");
    assert!(step.lines().count() < 6);
    assert!(step.lines().all(|l| all.contains(l)));
    let fwd = mmt(store.path(), &["cone", &format!("{ALG}?Magma"), "--direction", "forward"]).stdout;
    assert_eq!(fwd.lines().count(), 8, "{fwd}");
}

#[test]
fn flatten_lists_induced_constants() {
    let store = algebra_store();
    let r = mmt(store.path(), &["flatten", &format!("{ALG}?Ring")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains(&format!("{ALG}?Ring?add/grp/mon/mag/*\n")));
    assert!(r.stdout.contains(&format!("{ALG}?Ring?mult/mag/*\n")));
}

#[test]
fn present_text_and_html() {
    let store = algebra_store();
    let text = mmt(store.path(), &["present", &format!("{ALG}?Ring")]);
    assert_eq!(text.code, 0, "{}", text.stderr);
    assert!(text.stdout.starts_with("theory Ring"), "{}", text.stdout);
    let html = mmt(store.path(), &["present", &format!("{ALG}?Ring"), "--format", "html"]);
    assert!(html.stdout.contains("xref="), "{}", html.stdout);
}

#[test]
fn commit_rejects_and_keeps_revision() {
    let store = algebra_store();
    let bad = fixture("invalid/01-duplicate-constant.omdoc");
    let r = mmt(store.path(), &["commit", bad.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("RESULT"), "{}", r.stdout);
    let ok = mmt(store.path(), &["commit", "--format", "xml", fixture("views.omdoc").to_str().unwrap()]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.starts_with("<revision number=\"2\""), "{}", ok.stdout);
}

#[test]
fn rename_through_cli() {
    let store = algebra_store();
    let r = mmt(store.path(), &["rename", &format!("{ALG}?Magma"), "Groupoid"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("REVISION 2\n"), "{}", r.stdout);
    let q = mmt(store.path(), &["query", &format!("{ALG}?Ring"), "(Imports)+"]).stdout;
    assert!(q.contains("?Groupoid\n") && !q.contains("?Magma\n"), "{q}");
    let clash = mmt(store.path(), &["rename", &format!("{ALG}?Groupoid"), "Ring"]);
    assert_eq!(clash.code, 1);
    assert!(clash.stderr.contains("NameClash"), "{}", clash.stderr);
}

#[test]
fn abox_prints_facts() {
    let store = algebra_store();
    let r = mmt(store.path(), &["abox", ALG]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.lines().any(|l| l.contains("Imports")), "{}", r.stdout);
}

#[test]
fn store_from_environment() {
    let store = algebra_store();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_mmt"))
        .args(["query", &format!("{ALG}?Magma"), "Imports^-1"])
        .env("MMT_STORE", store.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}
