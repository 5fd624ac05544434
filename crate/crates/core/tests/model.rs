mod common;

use std::collections::BTreeSet;

use common::*;
use mmt_core::flatten::Flattener;
use mmt_core::model::atoms::{atomize, AtomicDecl};
use mmt_core::model::{assemble, GraphError, Item, TheoryGraph};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn algebra_atom_stream() {
    let doc = load("algebra1.omdoc");
    let atoms = atomize(&doc);
    assert_eq!(atoms.len(), 26);
    let g = assemble(atoms).unwrap();
    assert_eq!(g, TheoryGraph::from_documents([&doc]).unwrap());
    assert_eq!(g.documents(), vec![doc]);
}

#[test]
fn orphan_atoms_are_rejected() {
    let atoms = atomize(&load("algebra1.omdoc"));
    let first_member = atoms.iter().position(|a| !a.is_header()).unwrap();
    let orphan = atoms[first_member].clone();
    assert_eq!(assemble([orphan.clone()]), Err(GraphError::OrphanAtom(orphan.uri)));
    let mut dup = atoms.clone();
    dup.push(atoms[0].clone());
    assert_eq!(assemble(dup), Err(GraphError::DuplicateUri(atoms[0].uri.clone())));
}

#[test]
fn lookup_finds_declarations_and_assignments() {
    let g = algebra_graph();
    assert!(matches!(g.lookup(&alg("Ring")), Some(Item::Theory(_))));
    assert!(matches!(g.lookup(&alg("Ring?dist")), Some(Item::Import(_))));
    assert!(matches!(g.lookup(&alg("Ring?dist/mag1")), Some(Item::Assignment(_))));
    assert!(matches!(g.lookup(&alg("Magma?*")), Some(Item::Constant(_))));
    assert!(matches!(g.lookup(&views("v1")), Some(Item::View(_))));
    assert!(g.lookup(&alg("Ring?add/grp/mon/mag/*")).is_none());
}

#[test]
fn stream_order_does_not_matter() {
    let docs = [load("algebra1.omdoc"), load("views.omdoc")];
    let atoms: Vec<AtomicDecl> = docs.iter().flat_map(atomize).collect();
    let reference = assemble(atoms.clone()).unwrap();
    let empty = mmt_core::abox::FactIndex::new(&Default::default());
    let verdict = mmt_core::checker::validate_structural(atoms.clone(), &empty);
    assert!(verdict.is_ok(), "{}", verdict.to_lines());
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let perm = dependency_respecting(&atoms, &mut rng);
        assert_eq!(assemble(perm.clone()).unwrap(), reference);
        assert_eq!(mmt_core::checker::validate_structural(perm, &empty), verdict);
    }
}

#[test]
fn doubling_chain_flattens_exponentially() {
    for n in 1..=10usize {
        let doc = chain_doc(n);
        let g = TheoryGraph::from_documents([&doc]).unwrap();
        assert_eq!(atomize(&doc).len(), 1 + 1 + 3 * n);
        let cn = u(&format!("{CHAIN}?C{n}"));
        let flat = Flattener::new(&g).flatten_theory(&cn, false).unwrap();
        assert_eq!(flat.len(), 1 << n);
        let mut got: Vec<String> = flat.iter().map(|c| c.path().to_string()).collect();
        let mut want = eager_names(&g, &cn);
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn chain_prefix_flattening_matches_eager(n in 0usize..8, k in 0usize..8) {
        let k = k.min(n);
        let g = TheoryGraph::from_documents([&chain_doc(n)]).unwrap();
        let ck = u(&format!("{CHAIN}?C{k}"));
        let got: BTreeSet<String> = Flattener::uncached(&g)
            .flatten_theory(&ck, false).unwrap().iter().map(|c| c.path().to_string()).collect();
        let want: BTreeSet<String> = eager_names(&g, &ck).into_iter().collect();
        prop_assert_eq!(got, want);
    }
}
