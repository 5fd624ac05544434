//! Independent reference implementations the suites compare against.

use std::collections::BTreeSet;

use mmt_core::abox::{query_facts, FactSet, RelExpr, RelName};
use mmt_core::model::atoms::AtomicDecl;
use mmt_core::model::{Declaration, Module, Notation, Term, TheoryGraph};
use mmt_core::present::ResolvedStyle;
use mmt_core::store::Store;
use mmt_core::uri::{LocalName, MmtUri};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

use super::{alg, fixture_path, fol, load, ALG};

/// Rows of the URI golden table: base, reference, expected (`!Code` for errors).
pub fn golden_cases() -> Vec<(String, String, String)> {
    std::fs::read_to_string(fixture_path("uri-golden.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].to_string(), c[1].to_string(), c[2].to_string())
        })
        .collect()
}

fn segment() -> impl Strategy<Value = String> {
    prop_oneof!["[A-Za-z0-9*+=:@._~!$&'(),-]{1,6}", ".{1,4}".prop_filter("non-empty", |s| !s.is_empty()),]
}

fn local_name() -> impl Strategy<Value = LocalName> {
    prop::collection::vec(segment(), 1..4).prop_map(|s| LocalName::new(s).unwrap())
}

pub fn arb_uri() -> impl Strategy<Value = MmtUri> {
    let doc = ("[a-z]{1,8}", prop::collection::vec("[a-z0-9][a-z0-9.-]{0,4}", 0..3))
        .prop_map(|(host, path)| format!("http://{host}.org/{}", path.join("/")));
    (doc, prop::option::of((local_name(), prop::option::of(local_name())))).prop_map(|(d, ms)| {
        let d = MmtUri::doc(&d).unwrap();
        match ms {
            None => d,
            Some((m, None)) => d.with_module(m),
            Some((m, Some(s))) => d.with_module(m).with_symbol(s),
        }
    })
}

/// A random order in which every atom follows its container.
pub fn dependency_respecting(atoms: &[AtomicDecl], rng: &mut StdRng) -> Vec<AtomicDecl> {
    let mut pending: Vec<AtomicDecl> = atoms.to_vec();
    let mut placed = BTreeSet::new();
    let mut out = Vec::new();
    while !pending.is_empty() {
        let ready: Vec<usize> =
            (0..pending.len()).filter(|i| pending[*i].container().is_none_or(|c| placed.contains(&c))).collect();
        let pick = ready[rng.random_range(0..ready.len())];
        let a = pending.swap_remove(pick);
        placed.insert(a.uri.clone());
        out.push(a);
    }
    out
}

/// Eager flattening: copy every constant of every import, recursively.
pub fn eager_names(g: &TheoryGraph, t: &MmtUri) -> Vec<String> {
    let Some(Module::Theory(th)) = g.module(t) else { panic!("{t}") };
    let mut out = Vec::new();
    for d in &th.declarations {
        match d {
            Declaration::Constant(c) => out.push(c.name.to_string()),
            Declaration::Import(i) => {
                for n in eager_names(g, &i.from) {
                    out.push(format!("{}/{n}", i.name));
                }
            }
            Declaration::Notation(_) => {}
        }
    }
    out
}

/// Closure by iterating composition until nothing new appears.
pub fn brute_closure(f: &FactSet, start: &MmtUri, r: RelName) -> BTreeSet<MmtUri> {
    let base = RelExpr::Base(r);
    let mut acc = query_facts(f, start, &base);
    let mut power = base.clone();
    for _ in 0..64 {
        power = RelExpr::compose(power, base.clone());
        let next = query_facts(f, start, &power);
        if next.is_subset(&acc) && next.is_empty() {
            break;
        }
        acc.extend(next);
    }
    acc
}

pub fn file(name: &str, text: String) -> (String, Vec<u8>) {
    (name.to_string(), text.into_bytes())
}

/// Commits `n` unrelated one-constant documents.
pub fn pad(s: &Store, n: usize) {
    let files: Vec<_> = (0..n)
        .map(|i| file(&format!("pad{i}"), format!(r#"<omdoc base="http://example.org/pad/{i}.omdoc"><theory name="P"><constant name="c"/></theory></omdoc>"#)))
        .collect();
    s.commit_bytes(&files, "padding").unwrap();
}

/// A document importing `Ring` from the algebra fixture.
pub fn user_of_ring(i: usize) -> (String, Vec<u8>) {
    file(
        "user",
        format!(
            r#"<omdoc base="http://example.org/user{i}.omdoc"><theory name="U"><import name="r" from="{ALG}?Ring"/><constant name="k"><type><OMS path="??r/add/grp/mon/mag/*"/></type></constant></theory></omdoc>"#
        ),
    )
}

/// The algebra fixture together with the logic, for presentation.
pub fn presentation_graph() -> TheoryGraph {
    TheoryGraph::from_documents([&load("algebra1.omdoc"), &load("views.omdoc"), &load("fol.omdoc")]).unwrap()
}

/// Default style plus every notation of the graph.
pub fn graph_style(g: &TheoryGraph) -> ResolvedStyle {
    let cone: Vec<Notation> = g.modules().flat_map(|(_, m)| m.notations().into_iter().cloned()).collect();
    ResolvedStyle::layered(cone, None)
}

pub fn star(a: Term, b: Term) -> Term {
    Term::apply(Term::sym(alg("Magma?*")), vec![a, b])
}

/// Terms over `*`, `=`, `inv`, `e` and variables.
pub fn arb_term() -> impl Strategy<Value = Term> {
    let leaf =
        prop_oneof![prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var), Just(Term::sym(alg("Monoid?e"))),];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| star(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::apply(Term::sym(fol("equal")), vec![a, b])),
            inner.prop_map(|a| Term::apply(Term::sym(alg("Group?inv")), vec![a])),
        ]
    })
}

// A reference grammar for the text target: identifiers, `*` (left, 50),
// `=` (non-associative, 10), prefix application `f(a, ...)`, parentheses.
pub mod reparse {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Id(String),
        Op(char),
    }

    fn lex(s: &str) -> Vec<Tok> {
        let mut out = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c.is_alphanumeric() {
                let mut id = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_alphanumeric()) {
                    id.push(d);
                    chars.next();
                }
                out.push(Tok::Id(id));
            } else {
                out.push(Tok::Op(c));
                chars.next();
            }
        }
        out
    }

    struct P {
        toks: Vec<Tok>,
        pos: usize,
    }

    fn op_info(c: char) -> Option<(i32, bool, MmtUri)> {
        match c {
            '*' => Some((50, true, alg("Magma?*"))),
            '=' => Some((10, false, fol("equal"))),
            _ => None,
        }
    }

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos)
        }
        fn eat(&mut self, c: char) {
            assert_eq!(self.peek(), Some(&Tok::Op(c)));
            self.pos += 1;
        }
        fn primary(&mut self) -> Term {
            match self.peek().cloned() {
                Some(Tok::Op('(')) => {
                    self.pos += 1;
                    let e = self.expr(0);
                    self.eat(')');
                    e
                }
                Some(Tok::Id(id)) => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Op('(')) {
                        self.pos += 1;
                        let mut args = vec![self.expr(0)];
                        while self.peek() == Some(&Tok::Op(',')) {
                            self.pos += 1;
                            args.push(self.expr(0));
                        }
                        self.eat(')');
                        Term::apply(Term::sym(alg(&format!("Group?{id}"))), args)
                    } else if id == "e" {
                        Term::sym(alg("Monoid?e"))
                    } else {
                        Term::var(id)
                    }
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        fn expr(&mut self, min: i32) -> Term {
            let mut lhs = self.primary();
            while let Some(Tok::Op(c)) = self.peek().cloned() {
                let Some((prec, left, uri)) = op_info(c) else { break };
                if prec < min {
                    break;
                }
                self.pos += 1;
                let rhs = self.expr(prec + 1);
                lhs = Term::apply(Term::sym(uri), vec![lhs, rhs]);
                if !left {
                    if let Some(Tok::Op(d)) = self.peek() {
                        assert!(op_info(*d).is_none_or(|(p, ..)| p != prec), "chained non-associative operator");
                    }
                }
            }
            lhs
        }
    }

    pub fn parse(s: &str) -> Term {
        let mut p = P { toks: lex(s), pos: 0 };
        let t = p.expr(0);
        assert_eq!(p.pos, p.toks.len(), "trailing input in {s}");
        t
    }
}
