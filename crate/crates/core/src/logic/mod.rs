//! The second-order language: first-order terms over a signature, formulas
//! built from `⊥`, atoms, `→` and both kinds of `∀`, and the two
//! substitution forms.

mod equations;

pub use equations::{
    canonical_form, eq_congruent, equation_as_formula, equational_trace, match_particular_case, match_term,
    replace_subterm, rewrite_step_sites, subterm_at, Congruence, Equation, EquationSystem, Orientation,
    ParticularCase, RewriteStep,
};

use crate::lambda::fresh_name;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("second-order variable {var} has arity {expected}, instantiated with {found} parameters")]
    ArityMismatch { var: String, expected: usize, found: usize },
    #[error("symbol {0} is not declared")]
    Undeclared(String),
    #[error("symbol {name} expects {expected} arguments, got {found}")]
    BadArgs { name: String, expected: usize, found: usize },
    #[error("{0}")]
    IllFormed(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.functions.insert(name.to_string(), arity);
        self
    }

    pub fn with_predicate(mut self, name: &str, arity: usize) -> Self {
        self.predicates.insert(name.to_string(), arity);
        self
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn is_predicate(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
    }

    /// Checks every application and predicate atom against declared arities.
    pub fn check_formula(&self, a: &Formula) -> Result<(), LogicError> {
        match a {
            Formula::Absurd => Ok(()),
            Formula::Pred(p, args) => {
                let n = *self.predicates.get(p).ok_or_else(|| LogicError::Undeclared(p.clone()))?;
                if n != args.len() {
                    return Err(LogicError::BadArgs { name: p.clone(), expected: n, found: args.len() });
                }
                args.iter().try_for_each(|t| self.check_term(t))
            }
            Formula::Var(_, args) => args.iter().try_for_each(|t| self.check_term(t)),
            Formula::Imp(x, y) => {
                self.check_formula(x)?;
                self.check_formula(y)
            }
            Formula::AllFo(_, b) | Formula::AllSo(_, _, b) => self.check_formula(b),
        }
    }

    pub fn check_term(&self, t: &FoTerm) -> Result<(), LogicError> {
        match t {
            FoTerm::Var(_) => Ok(()),
            FoTerm::App(f, args) => {
                let n = *self.functions.get(f).ok_or_else(|| LogicError::Undeclared(f.clone()))?;
                if n != args.len() {
                    return Err(LogicError::BadArgs { name: f.clone(), expected: n, found: args.len() });
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    /// Closed terms of the signature with at most `depth` nested symbols.
    pub fn closed_terms(&self, depth: usize) -> Vec<FoTerm> {
        let mut levels: Vec<FoTerm> = Vec::new();
        for _ in 0..depth {
            let mut next: BTreeSet<FoTerm> = levels.iter().cloned().collect();
            for (f, &n) in &self.functions {
                let mut tuples: Vec<Vec<FoTerm>> = vec![Vec::new()];
                for _ in 0..n {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|t| {
                            levels.iter().map(move |a| {
                                let mut t2 = t.clone();
                                t2.push(a.clone());
                                t2
                            })
                        })
                        .collect();
                }
                for args in tuples {
                    next.insert(FoTerm::App(f.clone(), args));
                }
            }
            levels = next.into_iter().collect();
        }
        levels.sort_by_key(|t| (t.size(), t.clone()));
        levels
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FoTerm {
    Var(String),
    App(String, Vec<FoTerm>),
}

impl FoTerm {
    pub fn var(x: &str) -> FoTerm {
        FoTerm::Var(x.to_string())
    }

    pub fn app(f: &str, args: Vec<FoTerm>) -> FoTerm {
        FoTerm::App(f.to_string(), args)
    }

    pub fn constant(c: &str) -> FoTerm {
        FoTerm::App(c.to_string(), Vec::new())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            FoTerm::Var(x) => {
                out.insert(x.clone());
            }
            FoTerm::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            FoTerm::Var(_) => false,
            FoTerm::App(_, args) => args.iter().all(FoTerm::is_closed),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            FoTerm::Var(y) => x == y,
            FoTerm::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            FoTerm::Var(_) => 1,
            FoTerm::App(_, args) => 1 + args.iter().map(FoTerm::size).sum::<usize>(),
        }
    }

    pub fn subst(&self, map: &BTreeMap<String, FoTerm>) -> FoTerm {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            FoTerm::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            FoTerm::App(f, args) => FoTerm::App(f.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }

    pub fn subst_one(&self, x: &str, u: &FoTerm) -> FoTerm {
        self.subst(&BTreeMap::from([(x.to_string(), u.clone())]))
    }

    /// All subterms, outermost first.
    pub fn subterms(&self, out: &mut Vec<FoTerm>) {
        out.push(self.clone());
        if let FoTerm::App(_, args) = self {
            args.iter().for_each(|a| a.subterms(out));
        }
    }
}

impl fmt::Display for FoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoTerm::Var(x) => f.write_str(x),
            FoTerm::App(g, args) if args.is_empty() => f.write_str(g),
            FoTerm::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A quantifiable variable: first-order, or second-order with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binder {
    Fo(String),
    So(String, usize),
}

impl Binder {
    pub fn name(&self) -> &str {
        match self {
            Binder::Fo(x) | Binder::So(x, _) => x,
        }
    }

    pub fn renamed(&self, name: String) -> Binder {
        match self {
            Binder::Fo(_) => Binder::Fo(name),
            Binder::So(_, n) => Binder::So(name, *n),
        }
    }

    pub fn same_sort(&self, other: &Binder) -> bool {
        match (self, other) {
            (Binder::Fo(_), Binder::Fo(_)) => true,
            (Binder::So(_, a), Binder::So(_, b)) => a == b,
            _ => false,
        }
    }

    /// The instantiation that maps this variable to itself.
    pub fn identity_instance(&self) -> Instance {
        match self {
            Binder::Fo(x) => Instance::Term(FoTerm::var(x)),
            Binder::So(x, n) => {
                let params: Vec<String> = (1..=*n).map(|i| format!("p_{i}")).collect();
                let args = params.iter().map(|p| FoTerm::var(p)).collect();
                Instance::Formula(SoInst { params, body: Formula::Var(x.clone(), args) })
            }
        }
    }

    pub fn wrap(&self, body: Formula) -> Formula {
        match self {
            Binder::Fo(x) => Formula::AllFo(x.clone(), Box::new(body)),
            Binder::So(x, n) => Formula::AllSo(x.clone(), *n, Box::new(body)),
        }
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binder::Fo(x) => f.write_str(x),
            Binder::So(x, 0) => f.write_str(x),
            Binder::So(x, n) => write!(f, "{x}/{n}"),
        }
    }
}

/// A second-order instantiation `G` with parameters `x1 … xn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SoInst {
    pub params: Vec<String>,
    pub body: Formula,
}

impl SoInst {
    pub fn constant(body: Formula) -> SoInst {
        SoInst { params: Vec::new(), body }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut fv = self.body.free_vars();
        for p in &self.params {
            fv.remove(p);
        }
        fv
    }

    pub fn apply_to(&self, args: &[FoTerm]) -> Formula {
        let map: BTreeMap<String, FoTerm> = self.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.body.apply(&Substitution { fo: map, so: BTreeMap::new() })
    }

    pub fn apply(&self, sigma: &Substitution) -> SoInst {
        let mut sigma = sigma.clone();
        for p in &self.params {
            sigma.fo.remove(p);
        }
        // Rename parameters caught by the substitution's range.
        let range = sigma.range_vars(&self.body.free_vars());
        let mut params = Vec::new();
        let mut body = self.body.clone();
        let mut avoid = range.clone();
        avoid.extend(body.free_vars());
        for p in &self.params {
            if range.contains(p) {
                let q = fresh_name(p, &avoid);
                avoid.insert(q.clone());
                body = body.subst_fo(p, &FoTerm::Var(q.clone()));
                params.push(q);
            } else {
                params.push(p.clone());
            }
        }
        SoInst { params, body: body.apply(&sigma) }
    }
}

impl fmt::Display for SoInst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.params.join(" "), self.body)
    }
}

/// Instantiation of a quantified variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instance {
    Term(FoTerm),
    Formula(SoInst),
}

impl Instance {
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Instance::Term(t) => t.free_vars(),
            Instance::Formula(g) => g.free_vars(),
        }
    }

    pub fn fits(&self, b: &Binder) -> bool {
        match (self, b) {
            (Instance::Term(_), Binder::Fo(_)) => true,
            (Instance::Formula(g), Binder::So(_, n)) => g.params.len() == *n,
            _ => false,
        }
    }

    pub fn substitution_for(&self, b: &Binder) -> Substitution {
        let mut s = Substitution::default();
        match self {
            Instance::Term(t) => {
                s.fo.insert(b.name().to_string(), t.clone());
            }
            Instance::Formula(g) => {
                s.so.insert(b.name().to_string(), g.clone());
            }
        }
        s
    }

    pub fn apply(&self, sigma: &Substitution) -> Instance {
        match self {
            Instance::Term(t) => Instance::Term(t.subst(&sigma.fo)),
            Instance::Formula(g) => Instance::Formula(g.apply(sigma)),
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Term(t) => write!(f, "{t}"),
            Instance::Formula(g) => write!(f, "{g}"),
        }
    }
}

/// Simultaneous first- and second-order substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    pub fo: BTreeMap<String, FoTerm>,
    pub so: BTreeMap<String, SoInst>,
}

impl Substitution {
    pub fn is_empty(&self) -> bool {
        self.fo.is_empty() && self.so.is_empty()
    }

    pub fn fo(x: &str, t: FoTerm) -> Substitution {
        Substitution { fo: BTreeMap::from([(x.to_string(), t)]), so: BTreeMap::new() }
    }

    pub fn so(x: &str, g: SoInst) -> Substitution {
        Substitution { fo: BTreeMap::new(), so: BTreeMap::from([(x.to_string(), g)]) }
    }

    /// Renames variable `from` to `to`, of either order.
    pub fn rename(b: &Binder, to: &str) -> Substitution {
        match b {
            Binder::Fo(x) => Substitution::fo(x, FoTerm::var(to)),
            Binder::So(x, _) => {
                let Instance::Formula(mut g) = b.identity_instance() else { unreachable!() };
                if let Formula::Var(_, args) = g.body {
                    g.body = Formula::Var(to.to_string(), args);
                }
                Substitution::so(x, g)
            }
        }
    }

    pub fn domain(&self) -> BTreeSet<String> {
        self.fo.keys().chain(self.so.keys()).cloned().collect()
    }

    pub fn without(&self, x: &str) -> Substitution {
        let mut s = self.clone();
        s.fo.remove(x);
        s.so.remove(x);
        s
    }

    /// Free variables of the images of the variables in `relevant`.
    pub fn range_vars(&self, relevant: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (x, t) in &self.fo {
            if relevant.contains(x) {
                out.extend(t.free_vars());
            }
        }
        for (x, g) in &self.so {
            if relevant.contains(x) {
                out.extend(g.free_vars());
            }
        }
        out
    }

    /// All free variables of every image.
    pub fn all_range_vars(&self) -> BTreeSet<String> {
        self.range_vars(&self.domain())
    }

    pub fn touches(&self, fv: &BTreeSet<String>) -> bool {
        self.fo.keys().chain(self.so.keys()).any(|x| fv.contains(x))
    }
}

#[derive(Clone, Debug)]
pub enum Formula {
    Absurd,
    Pred(String, Vec<FoTerm>),
    /// Second-order variable atom; its arity is the argument count.
    Var(String, Vec<FoTerm>),
    Imp(Box<Formula>, Box<Formula>),
    AllFo(String, Box<Formula>),
    AllSo(String, usize, Box<Formula>),
}

impl Formula {
    pub fn pred(p: &str, args: Vec<FoTerm>) -> Formula {
        Formula::Pred(p.to_string(), args)
    }

    pub fn atom(x: &str) -> Formula {
        Formula::Var(x.to_string(), Vec::new())
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn all_fo(x: &str, b: Formula) -> Formula {
        Formula::AllFo(x.to_string(), Box::new(b))
    }

    pub fn all_so(x: &str, n: usize, b: Formula) -> Formula {
        Formula::AllSo(x.to_string(), n, Box::new(b))
    }

    /// `∀ξ1 … ∀ξn body`
    pub fn forall(binders: &[Binder], body: Formula) -> Formula {
        binders.iter().rev().fold(body, |acc, b| b.wrap(acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Absurd | Formula::Pred(..) | Formula::Var(..))
    }

    pub fn as_imp(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Imp(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The outermost quantifier, if any.
    pub fn as_forall(&self) -> Option<(Binder, &Formula)> {
        match self {
            Formula::AllFo(x, b) => Some((Binder::Fo(x.clone()), b)),
            Formula::AllSo(x, n, b) => Some((Binder::So(x.clone(), *n), b)),
            _ => None,
        }
    }

    /// Splits `∀ξ body` with `body` not a quantifier.
    pub fn strip_foralls(&self) -> (Vec<Binder>, &Formula) {
        let mut binders = Vec::new();
        let mut f = self;
        while let Some((b, body)) = f.as_forall() {
            binders.push(b);
            f = body;
        }
        (binders, f)
    }

    /// Splits off exactly `n` leading quantifiers.
    pub fn strip_n(&self, n: usize) -> Option<(Vec<Binder>, &Formula)> {
        let mut binders = Vec::new();
        let mut f = self;
        for _ in 0..n {
            let (b, body) = f.as_forall()?;
            binders.push(b);
            f = body;
        }
        Some((binders, f))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let term_vars = |args: &[FoTerm], bound: &Vec<&str>, out: &mut BTreeSet<String>| {
            for a in args {
                for v in a.free_vars() {
                    if !bound.contains(&v.as_str()) {
                        out.insert(v);
                    }
                }
            }
        };
        match self {
            Formula::Absurd => {}
            Formula::Pred(_, args) => term_vars(args, bound, out),
            Formula::Var(x, args) => {
                if !bound.contains(&x.as_str()) {
                    out.insert(x.clone());
                }
                term_vars(args, bound, out);
            }
            Formula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::AllFo(x, b) | Formula::AllSo(x, _, b) => {
                bound.push(x);
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All names (bound or free, both orders) and symbols mentioned.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Absurd => {}
            Formula::Pred(_, args) => args.iter().for_each(|a| {
                out.extend(a.free_vars());
            }),
            Formula::Var(x, args) => {
                out.insert(x.clone());
                args.iter().for_each(|a| out.extend(a.free_vars()));
            }
            Formula::Imp(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::AllFo(x, b) | Formula::AllSo(x, _, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
        }
    }

    /// Second-order variable arities at free occurrences; `Err` on clashes.
    pub fn so_arities(&self) -> Result<BTreeMap<String, usize>, LogicError> {
        fn go<'a>(f: &'a Formula, bound: &mut Vec<(&'a str, usize)>, out: &mut BTreeMap<String, usize>) -> Result<(), LogicError> {
            match f {
                Formula::Var(x, args) => {
                    let declared = bound.iter().rev().find(|(n, _)| n == x).map(|(_, a)| *a);
                    match declared {
                        Some(a) if a != args.len() => Err(LogicError::IllFormed(format!(
                            "variable {x} bound with arity {a} used with {} arguments",
                            args.len()
                        ))),
                        Some(_) => Ok(()),
                        None => match out.get(x) {
                            Some(&a) if a != args.len() => {
                                Err(LogicError::IllFormed(format!("variable {x} used with arities {a} and {}", args.len())))
                            }
                            _ => {
                                out.insert(x.clone(), args.len());
                                Ok(())
                            }
                        },
                    }
                }
                Formula::Imp(a, b) => {
                    go(a, bound, out)?;
                    go(b, bound, out)
                }
                Formula::AllSo(x, n, b) => {
                    bound.push((x, *n));
                    let r = go(b, bound, out);
                    bound.pop();
                    r
                }
                Formula::AllFo(x, b) => {
                    // shadows nothing of the second order
                    let _ = x;
                    go(b, bound, out)
                }
                _ => Ok(()),
            }
        }
        let mut out = BTreeMap::new();
        go(self, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    /// Capture-avoiding simultaneous substitution.
    pub fn apply(&self, sigma: &Substitution) -> Formula {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Absurd => Formula::Absurd,
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| a.subst(&sigma.fo)).collect()),
            Formula::Var(x, args) => {
                let args: Vec<FoTerm> = args.iter().map(|a| a.subst(&sigma.fo)).collect();
                match sigma.so.get(x) {
                    Some(g) if g.params.len() == args.len() => g.apply_to(&args),
                    _ => Formula::Var(x.clone(), args),
                }
            }
            Formula::Imp(a, b) => Formula::imp(a.apply(sigma), b.apply(sigma)),
            Formula::AllFo(x, b) | Formula::AllSo(x, _, b) => {
                let inner = sigma.without(x);
                let fv_body = b.free_vars();
                if !inner.touches(&fv_body) {
                    return self.clone();
                }
                let range = inner.range_vars(&fv_body);
                let binder = self.as_forall().unwrap().0;
                if range.contains(x) {
                    let mut avoid = range;
                    avoid.extend(fv_body);
                    avoid.extend(inner.domain());
                    let fresh = fresh_name(x, &avoid);
                    let renamed = b.apply(&Substitution::rename(&binder, &fresh));
                    binder.renamed(fresh).wrap(renamed.apply(&inner))
                } else {
                    binder.wrap(b.apply(&inner))
                }
            }
        }
    }

    /// `A[u/x]`
    pub fn subst_fo(&self, x: &str, u: &FoTerm) -> Formula {
        self.apply(&Substitution::fo(x, u.clone()))
    }

    /// `A[G/X(x1 … xn)]`; the parameter count must match the arity of `X`
    /// wherever it occurs free.
    pub fn subst_so(&self, x: &str, g: &SoInst) -> Result<Formula, LogicError> {
        if let Some(&n) = self.so_arities()?.get(x) {
            if n != g.params.len() {
                return Err(LogicError::ArityMismatch { var: x.to_string(), expected: n, found: g.params.len() });
            }
        }
        Ok(self.apply(&Substitution::so(x, g.clone())))
    }

    /// `C[F/ξ]`
    pub fn instantiate(&self, b: &Binder, inst: &Instance) -> Formula {
        self.apply(&inst.substitution_for(b))
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn idx(stack: &[&str], x: &str) -> Option<usize> {
            stack.iter().rposition(|n| *n == x).map(|i| stack.len() - i)
        }
        fn terms_eq(a: &FoTerm, b: &FoTerm, la: &[&str], lb: &[&str]) -> bool {
            match (a, b) {
                (FoTerm::Var(x), FoTerm::Var(y)) => match (idx(la, x), idx(lb, y)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                },
                (FoTerm::App(f, xs), FoTerm::App(g, ys)) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| terms_eq(x, y, la, lb))
                }
                _ => false,
            }
        }
        fn go<'a>(a: &'a Formula, b: &'a Formula, la: &mut Vec<&'a str>, lb: &mut Vec<&'a str>) -> bool {
            let args_eq = |xs: &[FoTerm], ys: &[FoTerm], la: &Vec<&str>, lb: &Vec<&str>| {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| terms_eq(x, y, la, lb))
            };
            match (a, b) {
                (Formula::Absurd, Formula::Absurd) => true,
                (Formula::Pred(p, xs), Formula::Pred(q, ys)) => p == q && args_eq(xs, ys, la, lb),
                (Formula::Var(x, xs), Formula::Var(y, ys)) => {
                    let same = match (idx(la, x), idx(lb, y)) {
                        (Some(i), Some(j)) => i == j,
                        (None, None) => x == y,
                        _ => false,
                    };
                    same && args_eq(xs, ys, la, lb)
                }
                (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => go(a1, a2, la, lb) && go(b1, b2, la, lb),
                (Formula::AllFo(x, b1), Formula::AllFo(y, b2)) => {
                    la.push(x);
                    lb.push(y);
                    let r = go(b1, b2, la, lb);
                    la.pop();
                    lb.pop();
                    r
                }
                (Formula::AllSo(x, n, b1), Formula::AllSo(y, m, b2)) if n == m => {
                    la.push(x);
                    lb.push(y);
                    let r = go(b1, b2, la, lb);
                    la.pop();
                    lb.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Nameless rendering: equal keys iff α-equivalent.
    pub fn key(&self) -> String {
        fn term(t: &FoTerm, env: &[&str], out: &mut String) {
            match t {
                FoTerm::Var(x) => match env.iter().rposition(|n| *n == x) {
                    Some(i) => out.push_str(&format!("#{}", env.len() - 1 - i)),
                    None => out.push_str(x),
                },
                FoTerm::App(f, args) => {
                    out.push_str(f);
                    out.push('(');
                    for a in args {
                        term(a, env, out);
                        out.push(',');
                    }
                    out.push(')');
                }
            }
        }
        fn go<'a>(f: &'a Formula, env: &mut Vec<&'a str>, out: &mut String) {
            match f {
                Formula::Absurd => out.push('⊥'),
                Formula::Pred(p, args) | Formula::Var(p, args) => {
                    match env.iter().rposition(|n| n == p) {
                        Some(i) if matches!(f, Formula::Var(..)) => out.push_str(&format!("#{}", env.len() - 1 - i)),
                        _ => out.push_str(p),
                    }
                    out.push('(');
                    for a in args {
                        term(a, env, out);
                        out.push(',');
                    }
                    out.push(')');
                }
                Formula::Imp(a, b) => {
                    out.push('[');
                    go(a, env, out);
                    out.push('>');
                    go(b, env, out);
                    out.push(']');
                }
                Formula::AllFo(x, b) => {
                    out.push_str("A.");
                    env.push(x);
                    go(b, env, out);
                    env.pop();
                }
                Formula::AllSo(x, n, b) => {
                    out.push_str(&format!("B{n}."));
                    env.push(x);
                    go(b, env, out);
                    env.pop();
                }
            }
        }
        let mut out = String::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Subformulas, including `self`, outermost first.
    pub fn subformulas(&self, out: &mut Vec<Formula>) {
        out.push(self.clone());
        match self {
            Formula::Imp(a, b) => {
                a.subformulas(out);
                b.subformulas(out);
            }
            Formula::AllFo(_, b) | Formula::AllSo(_, _, b) => b.subformulas(out),
            _ => {}
        }
    }

    /// First-order subterms occurring in atoms.
    pub fn fo_subterms(&self, out: &mut Vec<FoTerm>) {
        match self {
            Formula::Pred(_, args) | Formula::Var(_, args) => args.iter().for_each(|a| a.subterms(out)),
            Formula::Imp(a, b) => {
                a.fo_subterms(out);
                b.fo_subterms(out);
            }
            Formula::AllFo(_, b) | Formula::AllSo(_, _, b) => b.fo_subterms(out),
            Formula::Absurd => {}
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Absurd | Formula::Pred(..) | Formula::Var(..) => 1,
            Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::AllFo(_, b) | Formula::AllSo(_, _, b) => 1 + b.size(),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atom = |f: &mut fmt::Formatter<'_>, name: &str, args: &[FoTerm]| -> fmt::Result {
            f.write_str(name)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")?;
            }
            Ok(())
        };
        match self {
            Formula::Absurd => f.write_str("_|_"),
            Formula::Pred(p, args) | Formula::Var(p, args) => atom(f, p, args),
            Formula::Imp(a, b) => {
                if a.is_atomic() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
            Formula::AllFo(x, b) => write!(f, "!{x}. {b}"),
            Formula::AllSo(x, n, b) => {
                let inferable = *n == 0 || b.so_arities().ok().and_then(|m| m.get(x).copied()) == Some(*n);
                if inferable {
                    write!(f, "!{x}. {b}")
                } else {
                    write!(f, "!{x}/{n}. {b}")
                }
            }
        }
    }
}
