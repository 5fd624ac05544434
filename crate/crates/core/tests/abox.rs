mod common;

use std::collections::BTreeSet;

use common::*;
use mmt_core::abox::*;
use mmt_core::model::Document;
use proptest::prelude::*;

fn algebra_facts() -> FactSet {
    let mut f = extract_abox(&load("algebra1.omdoc"));
    f.extend(extract_abox(&load("views.omdoc")));
    f
}

fn set(us: &[&str]) -> BTreeSet<mmt_core::uri::MmtUri> {
    us.iter().map(|s| alg(s)).collect()
}

#[test]
fn ontology_sizes() {
    assert_eq!(UnaryType::ALL.len(), 10);
    assert_eq!(RelName::ALL.len(), 11);
}

#[test]
fn import_domain_fact() {
    let f = algebra_facts();
    assert!(f.contains(&AboxFact::Binary(RelName::HasDomain, alg("Ring?mult"), alg("Monoid"))));
}

#[test]
fn type_occurrence_fact() {
    let src = format!(
        r#"<omdoc base="http://example.org/occ.omdoc"><theory name="T"><constant name="c"><type><OMS path="{ALG}?Magma?*"/></type></constant></theory></omdoc>"#
    );
    let doc = mmt_core::reader::parse_document(src.as_bytes(), &mmt_core::uri::MmtUri::root()).unwrap();
    let f = extract_abox(&doc);
    assert!(f.contains(&AboxFact::Binary(
        RelName::HasOccurrenceOfInType,
        u("http://example.org/occ.omdoc?T?c"),
        alg("Magma?*")
    )));
}

#[test]
fn empty_document_has_one_fact() {
    let doc = Document::new(u("http://example.org/empty.omdoc"));
    let f = extract_abox(&doc);
    assert_eq!(f, FactSet::from([AboxFact::Unary(UnaryType::Document, doc.base.clone())]));
}

#[test]
fn queries_on_the_algebra_graph() {
    let f = algebra_facts();
    let q = |start: &str, e: &str| query_facts(&f, &alg(start), &parse_rel_expr(e).unwrap());
    assert_eq!(q("Ring?mult", "HasDomain"), set(&["Monoid"]));
    assert_eq!(q("Ring", "Imports+"), set(&["CGroup", "Group", "Monoid", "Magma", "Distrib"]));
    assert_eq!(q("Magma", "Imports^-1"), set(&["Monoid", "Distrib"]));
    assert_eq!(q("Ring", "(Imports)+"), q("Ring", "Imports+"));
    assert_eq!(parse_rel_expr("Nope").unwrap_err(), AboxError::UnknownRelation("Nope".into()));
}

#[test]
fn abox_text_round_trip() {
    let f = algebra_facts();
    let text = serialize_facts(&f);
    assert_eq!(parse_facts(&text).unwrap(), f);
    let lines: Vec<&str> = text.lines().collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
}

#[test]
fn structure_recovery_matches_documents() {
    for names in [&["algebra1.omdoc", "views.omdoc"][..], &["fol.omdoc", "fol-algebra.omdoc"][..]] {
        let docs: Vec<Document> = names.iter().map(|n| load(n)).collect();
        let mut facts = FactSet::new();
        for d in &docs {
            facts.extend(extract_abox(d));
        }
        let refs: Vec<&Document> = docs.iter().collect();
        assert_eq!(recover_structure(&facts).unwrap(), skeleton_of(&refs));
    }
}

#[test]
fn recovery_of_small_fact_sets() {
    let t = u("http://example.org/d?T");
    let sk = recover_structure(&FactSet::from([AboxFact::Unary(UnaryType::Theory, t.clone())])).unwrap();
    let doc = &sk.documents[&u("http://example.org/d")];
    assert_eq!(
        doc[&t],
        ModuleSkeleton::Theory {
            meta: None,
            constants: Default::default(),
            imports: Default::default(),
            notations: Default::default()
        }
    );
    let bad = FactSet::from([
        AboxFact::Unary(UnaryType::UntypedConstant, u("http://example.org/d?T?c")),
        AboxFact::Binary(RelName::DeclaredIn, u("http://example.org/d?T?c"), t),
    ]);
    assert!(matches!(recover_structure(&bad), Err(AboxError::InconsistentFacts(_))));
}

#[test]
fn closure_agrees_with_iterated_composition() {
    for names in [&["algebra1.omdoc", "views.omdoc"][..], &["fol.omdoc", "fol-algebra.omdoc"][..]] {
        let mut f = FactSet::new();
        for n in names {
            f.extend(extract_abox(&load(n)));
        }
        let individuals: BTreeSet<_> = f
            .iter()
            .map(|x| match x {
                AboxFact::Unary(_, u) => u.clone(),
                AboxFact::Binary(_, s, _) => s.clone(),
            })
            .collect();
        for r in RelName::ALL {
            for i in &individuals {
                let fast = query_facts(&f, i, &RelExpr::closure(RelExpr::Base(*r)));
                assert_eq!(fast, brute_closure(&f, i, *r), "{r} from {i}");
            }
        }
    }
}

fn arb_facts() -> impl Strategy<Value = FactSet> {
    let node = (0..6usize).prop_map(|i| u(&format!("http://example.org/d?M{i}")));
    let rel = prop::sample::select(vec![RelName::Imports, RelName::DependsOn, RelName::HasDomain]);
    prop::collection::btree_set((rel, node.clone(), node).prop_map(|(r, s, o)| AboxFact::Binary(r, s, o)), 0..20)
}

fn arb_expr() -> impl Strategy<Value = RelExpr> {
    let leaf =
        prop::sample::select(vec![RelName::Imports, RelName::DependsOn, RelName::HasDomain]).prop_map(RelExpr::Base);
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(RelExpr::inverse),
            inner.clone().prop_map(RelExpr::closure),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RelExpr::compose(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| RelExpr::union(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn query_algebra_laws(f in arb_facts(), a in arb_expr(), b in arb_expr(), c in arb_expr(), start in 0..6usize) {
        let s = u(&format!("http://example.org/d?M{start}"));
        let q = |e: &RelExpr| query_facts(&f, &s, e);
        let mut ab = q(&a);
        ab.extend(q(&b));
        prop_assert_eq!(q(&RelExpr::union(a.clone(), b.clone())), ab);
        prop_assert_eq!(
            q(&RelExpr::compose(RelExpr::compose(a.clone(), b.clone()), c.clone())),
            q(&RelExpr::compose(a.clone(), RelExpr::compose(b.clone(), c.clone())))
        );
        prop_assert_eq!(q(&RelExpr::inverse(RelExpr::inverse(a.clone()))), q(&a));
    }

    #[test]
    fn surface_syntax_round_trips(e in arb_expr()) {
        prop_assert_eq!(parse_rel_expr(&e.to_string()).unwrap(), e);
    }
}
