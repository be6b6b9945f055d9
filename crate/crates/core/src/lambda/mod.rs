//! Pure untyped λ-terms: binding, α-equivalence, capture-avoiding
//! substitution and head-shape classification.
//!
//! Terms keep their binder names for display. Identity is α-equivalence,
//! computed on a nameless form, so `PartialEq` and `Hash` ignore the choice
//! of bound names.

mod reduce;

pub use reduce::{
    beta_equiv, beta_redexes, contract_at, default_budget, eta_redexes, normalize_random, reduce,
    Equivalence, RedexKind, ReductionResult, ReductionStatus, Strategy, DEFAULT_BUDGET,
};

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

#[derive(Clone, Debug)]
pub enum Term {
    Var(String),
    Abs(String, Box<Term>),
    App(Box<Term>, Box<Term>),
}

/// One step into a term: the body of an abstraction, or the function /
/// argument side of an application.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Body,
    Fun,
    Arg,
}

/// Position of a subterm, root first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<Step>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn push(&self, step: Step) -> Path {
        let mut v = self.0.clone();
        v.push(step);
        Path(v)
    }

    pub fn prepend(&self, step: Step) -> Path {
        let mut v = vec![step];
        v.extend_from_slice(&self.0);
        Path(v)
    }

    pub fn split_first(&self) -> Option<(Step, Path)> {
        self.0
            .split_first()
            .map(|(s, rest)| (*s, Path(rest.to_vec())))
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("@")?;
        for s in &self.0 {
            f.write_str(match s {
                Step::Body => "b",
                Step::Fun => "f",
                Step::Arg => "a",
            })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Path {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix('@')
            .ok_or_else(|| format!("path `{s}` must start with `@`"))?;
        rest.chars()
            .map(|c| match c {
                'b' => Ok(Step::Body),
                'f' => Ok(Step::Fun),
                'a' => Ok(Step::Arg),
                other => Err(format!("bad path step `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadShape {
    WeakHeadRedex,
    HeadVariable,
    HeadAbstraction,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn abs(name: impl Into<String>, body: Term) -> Term {
        Term::Abs(name.into(), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// `(t)u1 … un`
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(&x.as_str()) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, body) => {
                bound.push(x);
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => x == y,
            Term::Abs(y, body) => x != y && body.is_free(x),
            Term::App(f, a) => f.is_free(x) || a.is_free(x),
        }
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Abs(x, body) => {
                out.insert(x.clone());
                body.all_names(out);
            }
            Term::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// `t[v/x]`, renaming binders of `t` that would capture free variables
    /// of `v`.
    pub fn substitute(&self, x: &str, v: &Term) -> Term {
        let fv = v.free_vars();
        self.subst_inner(x, v, &fv)
    }

    fn subst_inner(&self, x: &str, v: &Term, fv_v: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(y) if y == x => v.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_inner(x, v, fv_v), a.subst_inner(x, v, fv_v)),
            Term::Abs(y, _) if y == x => self.clone(),
            Term::Abs(y, body) => {
                if !body.is_free(x) {
                    return self.clone();
                }
                match binder_rename(y, body, x, fv_v) {
                    Some(fresh) => {
                        let renamed = body.subst_inner(y, &Term::var(fresh.clone()), &BTreeSet::from([fresh.clone()]));
                        Term::abs(fresh, renamed.subst_inner(x, v, fv_v))
                    }
                    None => Term::abs(y.clone(), body.subst_inner(x, v, fv_v)),
                }
            }
        }
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_all(&self, pairs: &[(String, Term)]) -> Term {
        if pairs.is_empty() {
            return self.clone();
        }
        // Route through fresh placeholders so the replacements do not interact.
        let mut avoid = BTreeSet::new();
        self.all_names(&mut avoid);
        for (x, v) in pairs {
            avoid.insert(x.clone());
            v.all_names(&mut avoid);
        }
        let mut staged = self.clone();
        let mut placeholders = Vec::new();
        for (x, _) in pairs {
            let p = fresh_name("sub", &avoid);
            avoid.insert(p.clone());
            staged = staged.substitute(x, &Term::var(p.clone()));
            placeholders.push(p);
        }
        for (p, (_, v)) in placeholders.iter().zip(pairs) {
            staged = staged.substitute(p, v);
        }
        staged
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go<'a>(a: &'a Term, b: &'a Term, la: &mut Vec<&'a str>, lb: &mut Vec<&'a str>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let ix = la.iter().rposition(|n| *n == x);
                    let iy = lb.iter().rposition(|n| *n == y);
                    match (ix, iy) {
                        (Some(i), Some(j)) => la.len() - i == lb.len() - j,
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Term::Abs(x, s), Term::Abs(y, t)) => {
                    la.push(x);
                    lb.push(y);
                    let r = go(s, t, la, lb);
                    la.pop();
                    lb.pop();
                    r
                }
                (Term::App(f, a1), Term::App(g, a2)) => go(f, g, la, lb) && go(a1, a2, la, lb),
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Canonical nameless rendering: bound variables become de Bruijn
    /// indices, free variables keep their names.
    pub fn nameless_key(&self) -> String {
        fn go<'a>(t: &'a Term, env: &mut Vec<&'a str>, out: &mut String) {
            match t {
                Term::Var(x) => match env.iter().rposition(|n| *n == x) {
                    Some(i) => out.push_str(&format!("#{}", env.len() - 1 - i)),
                    None => {
                        out.push('$');
                        out.push_str(x);
                    }
                },
                Term::Abs(x, b) => {
                    out.push('L');
                    env.push(x);
                    go(b, env, out);
                    env.pop();
                }
                Term::App(f, a) => {
                    out.push('(');
                    go(f, env, out);
                    out.push(' ');
                    go(a, env, out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn head_shape(&self) -> HeadShape {
        let mut t = self;
        let mut has_arg = false;
        loop {
            match t {
                Term::App(f, _) => {
                    has_arg = true;
                    t = f;
                }
                Term::Abs(..) if has_arg => return HeadShape::WeakHeadRedex,
                Term::Abs(..) => return HeadShape::HeadAbstraction,
                Term::Var(_) => return HeadShape::HeadVariable,
            }
        }
    }

    /// Splits `(h)v1 … vm` into the head and its arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(a.as_ref());
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn subterm(&self, path: &Path) -> Option<&Term> {
        let mut t = self;
        for s in &path.0 {
            t = match (s, t) {
                (Step::Body, Term::Abs(_, b)) => b,
                (Step::Fun, Term::App(f, _)) => f,
                (Step::Arg, Term::App(_, a)) => a,
                _ => return None,
            };
        }
        Some(t)
    }

    /// Replaces the subterm at `path`.
    pub fn replace_at(&self, path: &Path, new: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(new),
            Some((s, rest)) => match (s, self) {
                (Step::Body, Term::Abs(x, b)) => Some(Term::abs(x.clone(), b.replace_at(&rest, new)?)),
                (Step::Fun, Term::App(f, a)) => Some(Term::app(f.replace_at(&rest, new)?, (**a).clone())),
                (Step::Arg, Term::App(f, a)) => Some(Term::app((**f).clone(), a.replace_at(&rest, new)?)),
                _ => None,
            },
        }
    }

    pub fn is_beta_normal(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(_, b) => b.is_beta_normal(),
            Term::App(f, a) => !matches!(**f, Term::Abs(..)) && f.is_beta_normal() && a.is_beta_normal(),
        }
    }
}

/// When substituting for `x` under binder `y` with body `body`, returns the
/// fresh replacement for `y` if keeping it would capture a free variable of
/// the substituted term.
pub(crate) fn binder_rename(y: &str, body: &Term, x: &str, fv_v: &BTreeSet<String>) -> Option<String> {
    if !fv_v.contains(y) {
        return None;
    }
    let mut avoid = fv_v.clone();
    avoid.extend(body.free_vars());
    avoid.insert(x.to_string());
    Some(fresh_name(y, &avoid))
}

/// First name of the form `base`, `base_1`, `base_2`, … not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = match base.rsplit_once('_') {
        Some((s, n)) if !s.is_empty() && n.chars().all(|c| c.is_ascii_digit()) && !n.is_empty() => s,
        _ => base,
    };
    (1..)
        .map(|i| format!("{stem}_{i}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded name supply")
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.nameless_key().hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Abs(x, b) => write!(f, "\\{x}. {b}"),
            Term::App(fun, arg) => {
                match **fun {
                    Term::Abs(..) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                match **arg {
                    Term::Var(_) => write!(f, " {arg}"),
                    _ => write!(f, " ({arg})"),
                }
            }
        }
    }
}
