use std::collections::BTreeSet;
use std::fmt;

use crate::uri::MmtUri;

/// OpenMath-style object: symbol references, variables, application, binding.
///
/// Equality is alpha-equivalence: bound variables may be renamed, nothing
/// else is identified.
#[derive(Clone)]
pub enum Term {
    Sym(MmtUri),
    Var(String),
    Apply { head: Box<Term>, args: Vec<Term> },
    Bind { binder: Box<Term>, vars: Vec<VarDecl>, body: Box<Term> },
}

#[derive(Clone, Debug)]
pub struct VarDecl {
    pub name: String,
    pub tp: Option<Term>,
}

impl VarDecl {
    pub fn new(name: impl Into<String>) -> Self {
        VarDecl { name: name.into(), tp: None }
    }

    pub fn typed(name: impl Into<String>, tp: Term) -> Self {
        VarDecl { name: name.into(), tp: Some(tp) }
    }
}

impl Term {
    pub fn sym(uri: MmtUri) -> Term {
        Term::Sym(uri)
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn apply(head: Term, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "application needs at least one argument");
        Term::Apply { head: Box::new(head), args }
    }

    pub fn bind(binder: Term, vars: Vec<VarDecl>, body: Term) -> Term {
        assert!(!vars.is_empty(), "binder needs at least one variable");
        Term::Bind { binder: Box::new(binder), vars, body: Box::new(body) }
    }

    /// The head symbol of a symbol reference, application or binding.
    pub fn head_symbol(&self) -> Option<&MmtUri> {
        match self {
            Term::Sym(u) => Some(u),
            Term::Var(_) => None,
            Term::Apply { head, .. } => head.head_symbol(),
            Term::Bind { binder, .. } => binder.head_symbol(),
        }
    }

    /// Every symbol occurring in the term, including variable types.
    pub fn symbols(&self) -> BTreeSet<MmtUri> {
        let mut out = BTreeSet::new();
        self.for_each_symbol(&mut |u| {
            out.insert(u.clone());
        });
        out
    }

    pub fn for_each_symbol(&self, f: &mut impl FnMut(&MmtUri)) {
        match self {
            Term::Sym(u) => f(u),
            Term::Var(_) => {}
            Term::Apply { head, args } => {
                head.for_each_symbol(f);
                args.iter().for_each(|a| a.for_each_symbol(f));
            }
            Term::Bind { binder, vars, body } => {
                binder.for_each_symbol(f);
                for v in vars {
                    if let Some(tp) = &v.tp {
                        tp.for_each_symbol(f);
                    }
                }
                body.for_each_symbol(f);
            }
        }
    }

    /// Replaces symbol references bottom-up; `f` returns `None` to keep one.
    pub fn try_map_symbols<E>(&self, f: &mut impl FnMut(&MmtUri) -> Result<Option<Term>, E>) -> Result<Term, E> {
        Ok(match self {
            Term::Sym(u) => f(u)?.unwrap_or_else(|| self.clone()),
            Term::Var(_) => self.clone(),
            Term::Apply { head, args } => Term::Apply {
                head: Box::new(head.try_map_symbols(f)?),
                args: args.iter().map(|a| a.try_map_symbols(f)).collect::<Result<_, _>>()?,
            },
            Term::Bind { binder, vars, body } => Term::Bind {
                binder: Box::new(binder.try_map_symbols(f)?),
                vars: vars
                    .iter()
                    .map(|v| {
                        Ok(VarDecl {
                            name: v.name.clone(),
                            tp: v.tp.as_ref().map(|t| t.try_map_symbols(f)).transpose()?,
                        })
                    })
                    .collect::<Result<_, E>>()?,
                body: Box::new(body.try_map_symbols(f)?),
            },
        })
    }

    pub fn map_uris(&self, f: &mut impl FnMut(&MmtUri) -> MmtUri) -> Term {
        let r: Result<Term, std::convert::Infallible> = self.try_map_symbols(&mut |u| Ok(Some(Term::Sym(f(u)))));
        match r {
            Ok(t) => t,
            Err(e) => match e {},
        }
    }

    /// Number of nodes, counting variable declarations.
    pub fn size(&self) -> usize {
        match self {
            Term::Sym(_) | Term::Var(_) => 1,
            Term::Apply { head, args } => 1 + head.size() + args.iter().map(Term::size).sum::<usize>(),
            Term::Bind { binder, vars, body } => {
                1 + binder.size()
                    + vars.iter().map(|v| 1 + v.tp.as_ref().map_or(0, Term::size)).sum::<usize>()
                    + body.size()
            }
        }
    }

    /// Consistent renaming of bound variables to `prefix0`, `prefix1`, ...
    /// in binding order. Alpha-equivalent terms rename to identical trees.
    pub fn rename_bound(&self, prefix: &str) -> Term {
        fn go(t: &Term, prefix: &str, env: &mut Vec<(String, String)>, counter: &mut usize) -> Term {
            match t {
                Term::Sym(_) => t.clone(),
                Term::Var(n) => match env.iter().rev().find(|(old, _)| old == n) {
                    Some((_, new)) => Term::Var(new.clone()),
                    None => t.clone(),
                },
                Term::Apply { head, args } => Term::Apply {
                    head: Box::new(go(head, prefix, env, counter)),
                    args: args.iter().map(|a| go(a, prefix, env, counter)).collect(),
                },
                Term::Bind { binder, vars, body } => {
                    let binder = go(binder, prefix, env, counter);
                    let depth = env.len();
                    let mut new_vars = Vec::with_capacity(vars.len());
                    for v in vars {
                        let tp = v.tp.as_ref().map(|tp| go(tp, prefix, env, counter));
                        let fresh = format!("{prefix}{counter}");
                        *counter += 1;
                        env.push((v.name.clone(), fresh.clone()));
                        new_vars.push(VarDecl { name: fresh, tp });
                    }
                    let body = go(body, prefix, env, counter);
                    env.truncate(depth);
                    Term::Bind { binder: Box::new(binder), vars: new_vars, body: Box::new(body) }
                }
            }
        }
        go(self, prefix, &mut Vec::new(), &mut 0)
    }
}

/// Alpha-equivalence. Variable types are scoped like telescopes: the type of
/// the i-th variable sees the variables before it.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn lookup(env: &[(&str, &str)], left: &str, right: &str) -> bool {
        for (l, r) in env.iter().rev() {
            if *l == left || *r == right {
                return *l == left && *r == right;
            }
        }
        left == right
    }
    fn go<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a, b) {
            (Term::Sym(x), Term::Sym(y)) => x == y,
            (Term::Var(x), Term::Var(y)) => lookup(env, x, y),
            (Term::Apply { head: h1, args: a1 }, Term::Apply { head: h2, args: a2 }) => {
                a1.len() == a2.len() && go(h1, h2, env) && a1.iter().zip(a2).all(|(x, y)| go(x, y, env))
            }
            (Term::Bind { binder: b1, vars: v1, body: t1 }, Term::Bind { binder: b2, vars: v2, body: t2 }) => {
                if v1.len() != v2.len() || !go(b1, b2, env) {
                    return false;
                }
                let depth = env.len();
                let mut ok = true;
                for (x, y) in v1.iter().zip(v2) {
                    ok = match (&x.tp, &y.tp) {
                        (None, None) => true,
                        (Some(p), Some(q)) => go(p, q, env),
                        _ => false,
                    };
                    if !ok {
                        break;
                    }
                    env.push((&x.name, &y.name));
                }
                ok = ok && go(t1, t2, env);
                env.truncate(depth);
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

impl PartialEq for VarDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.tp == other.tp
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(u) => write!(f, "{u}"),
            Term::Var(n) => write!(f, "${n}"),
            Term::Apply { head, args } => {
                write!(f, "({head:?}")?;
                for a in args {
                    write!(f, " {a:?}")?;
                }
                write!(f, ")")
            }
            Term::Bind { binder, vars, body } => {
                write!(f, "[{binder:?}")?;
                for v in vars {
                    match &v.tp {
                        Some(tp) => write!(f, " {}:{tp:?}", v.name)?,
                        None => write!(f, " {}", v.name)?,
                    }
                }
                write!(f, ". {body:?}]")
            }
        }
    }
}
