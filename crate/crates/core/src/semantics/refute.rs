//! Sound untypability for judgments without second-order quantifiers.
//!
//! `check` decides a relation `R(v, A)` on β-normal terms: abstractions go
//! under arrows, neutral terms at arrow types are η-expanded, `∀x` is
//! opened with an eigenvariable, and heads are instantiated by first-order
//! unification. With `E` empty, valuing each atom `a` by
//! `{u ; u normalizes and R(nf(u), a)}` gives a Λf-model in which every
//! variable belongs to the value of its type and every value of a type `A`
//! is contained in `{u ; R(nf(u), A)}`. A derivation of `Γ ⊢ t : A` then
//! forces `R(nf(t), A)`, so a failed check refutes typability.

use crate::lambda::{fresh_name, reduce, Strategy, Term};
use crate::logic::{EquationSystem, FoTerm, Formula, Substitution};
use crate::typing::Context;
use std::collections::{BTreeSet, HashMap};

/// `true` only when `Γ ⊢ t : A` is underivable in AF2S (hence in every
/// system of the family). `false` means nothing is known.
pub fn refute_typing(eqs: &EquationSystem, ctx: &Context, t: &Term, a: &Formula, budget: usize) -> bool {
    if !eqs.is_empty() || ctx.entries().iter().any(|(_, b)| has_so_forall(b)) {
        return false;
    }
    let mut avoid = ctx.free_vars();
    avoid.extend(a.free_vars());
    let Some(goal) = strip_so(a, &mut avoid) else { return false };
    let r = reduce(t, Strategy::BetaNormalOrder, budget);
    if !r.is_normal() || r.result.free_vars().iter().any(|x| !ctx.contains(x)) {
        return false;
    }
    let mut ck = Checker { env: ctx.entries().to_vec(), metas: HashMap::new(), eigen: HashMap::new(), next: 0 };
    !ck.check(&r.result, &goal, 0)
}

fn has_so_forall(a: &Formula) -> bool {
    match a {
        Formula::Absurd | Formula::Pred(..) | Formula::Var(..) => false,
        Formula::Imp(b, c) => has_so_forall(b) || has_so_forall(c),
        Formula::AllFo(_, b) => has_so_forall(b),
        Formula::AllSo(..) => true,
    }
}

/// Replaces second-order quantifiers on the conclusion spine by fresh free
/// variables; fails if one remains elsewhere.
fn strip_so(a: &Formula, avoid: &mut BTreeSet<String>) -> Option<Formula> {
    match a {
        Formula::Imp(b, c) if !has_so_forall(b) => Some(Formula::imp((**b).clone(), strip_so(c, avoid)?)),
        Formula::Imp(..) => None,
        Formula::AllFo(x, b) => {
            avoid.insert(x.clone());
            Some(Formula::AllFo(x.clone(), Box::new(strip_so(b, avoid)?)))
        }
        Formula::AllSo(..) => {
            let (b, body) = a.as_forall()?;
            let name = fresh_name(b.name(), avoid);
            avoid.insert(name.clone());
            strip_so(&body.apply(&Substitution::rename(&b, &name)), avoid)
        }
        _ => Some(a.clone()),
    }
}

struct Checker {
    env: Vec<(String, Formula)>,
    /// Unification variables: level and binding.
    metas: HashMap<String, (usize, Option<FoTerm>)>,
    /// Eigenvariables and the level that introduced them.
    eigen: HashMap<String, usize>,
    next: usize,
}

impl Checker {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn check(&mut self, t: &Term, ty: &Formula, level: usize) -> bool {
        match ty {
            Formula::AllFo(x, b) => {
                let e = self.fresh("%e");
                self.eigen.insert(e.clone(), level + 1);
                let body = b.subst_fo(x, &FoTerm::var(&e));
                self.check(t, &body, level + 1)
            }
            Formula::Imp(a1, a2) => {
                let (z, body) = match t {
                    Term::Abs(z, w) => (z.clone(), (**w).clone()),
                    _ => {
                        let mut avoid = t.free_vars();
                        avoid.extend(self.env.iter().map(|(y, _)| y.clone()));
                        let z = fresh_name("z", &avoid);
                        (z.clone(), Term::app(t.clone(), Term::var(z)))
                    }
                };
                self.env.push((z, (**a1).clone()));
                let ok = self.check(&body, a2, level);
                self.env.pop();
                ok
            }
            Formula::AllSo(..) => false,
            _ => self.check_atom(t, ty, level),
        }
    }

    fn check_atom(&mut self, t: &Term, goal: &Formula, level: usize) -> bool {
        let (head, args) = t.spine();
        let Term::Var(h) = head else { return false };
        let Some(mut cur) = self.env.iter().rev().find(|(y, _)| y == h).map(|(_, b)| b.clone()) else {
            return false;
        };
        let mut arg_types = Vec::new();
        for _ in &args {
            cur = self.open(cur, level);
            let Formula::Imp(b, c) = cur else { return false };
            arg_types.push(*b);
            cur = *c;
        }
        cur = self.open(cur, level);
        if !self.unify_atoms(&cur, goal) {
            return false;
        }
        for (u, b) in args.into_iter().zip(arg_types) {
            let b = self.resolve_formula(&b);
            if !self.check(u, &b, level) {
                return false;
            }
        }
        true
    }

    /// Instantiates leading first-order quantifiers with unification variables.
    fn open(&mut self, mut f: Formula, level: usize) -> Formula {
        while let Formula::AllFo(x, b) = f {
            let m = self.fresh("?m");
            self.metas.insert(m.clone(), (level, None));
            f = b.subst_fo(&x, &FoTerm::var(&m));
        }
        f
    }

    fn resolve(&self, t: &FoTerm) -> FoTerm {
        match t {
            FoTerm::Var(x) => match self.metas.get(x) {
                Some((_, Some(u))) => self.resolve(u),
                _ => t.clone(),
            },
            FoTerm::App(f, xs) => FoTerm::App(f.clone(), xs.iter().map(|a| self.resolve(a)).collect()),
        }
    }

    fn resolve_formula(&self, f: &Formula) -> Formula {
        let mut fv = BTreeSet::new();
        for v in f.free_vars() {
            if self.metas.get(&v).is_some_and(|(_, b)| b.is_some()) {
                fv.insert(v);
            }
        }
        let mut sigma = Substitution::default();
        for v in fv {
            sigma.fo.insert(v.clone(), self.resolve(&FoTerm::var(&v)));
        }
        f.apply(&sigma)
    }

    fn unify_atoms(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::Absurd, Formula::Absurd) => true,
            (Formula::Pred(p, xs), Formula::Pred(q, ys)) | (Formula::Var(p, xs), Formula::Var(q, ys)) => {
                p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn unify(&mut self, a: &FoTerm, b: &FoTerm) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (FoTerm::Var(x), FoTerm::Var(y)) if x == y => true,
            (FoTerm::Var(x), _) if self.metas.contains_key(x) => self.bind(x, &b),
            (_, FoTerm::Var(y)) if self.metas.contains_key(y) => self.bind(y, &a),
            (FoTerm::App(f, xs), FoTerm::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Binds `m` to `t` if `t` does not contain `m` and every eigenvariable
    /// of `t` was in scope when `m` was created; deeper metas are lowered.
    fn bind(&mut self, m: &str, t: &FoTerm) -> bool {
        let level = self.metas[m].0;
        for v in t.free_vars() {
            if v == m {
                return false;
            }
            if let Some(&l) = self.eigen.get(&v) {
                if l > level {
                    return false;
                }
            }
            if let Some(entry) = self.metas.get_mut(&v) {
                entry.0 = entry.0.min(level);
            }
        }
        self.metas.insert(m.to_string(), (level, Some(t.clone())));
        true
    }
}
