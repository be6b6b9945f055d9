use super::{compose, dist_conclusion, EqData, SubProof};
use crate::lambda::fresh_name;
use crate::logic::{
    equational_trace, replace_subterm, Binder, EquationSystem, FoTerm, Formula, Instance, SoInst, Substitution,
};
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Maximum height of the proof tree.
    pub depth: usize,
    /// Extra instantiation candidates, tried first.
    pub hints: Vec<Instance>,
    /// Expansion budget of each equational search.
    pub eq_budget: usize,
    /// Total number of goals visited before giving up.
    pub node_budget: usize,
    /// Only `ax`, `forall-elim`, `forall-intro` and `eq`.
    pub restricted: bool,
    /// Candidates per quantifier.
    pub max_candidates: usize,
}

impl SearchConfig {
    pub fn with_depth(depth: usize) -> Self {
        SearchConfig { depth, hints: Vec::new(), eq_budget: 2_000, node_budget: 20_000, restricted: false, max_candidates: 24 }
    }
}

/// Bounded search for a proof of `A ⊆ B`. Not finding one proves nothing.
pub fn search_subtype(eqs: &EquationSystem, a: &Formula, b: &Formula, depth: usize) -> Option<SubProof> {
    search_subtype_with(eqs, a, b, &SearchConfig::with_depth(depth))
}

pub fn search_subtype_with(eqs: &EquationSystem, a: &Formula, b: &Formula, cfg: &SearchConfig) -> Option<SubProof> {
    let mut s = Search { eqs, cfg, nodes: 0, visited: Vec::new() };
    let p = s.go(a, b, cfg.depth)?;
    debug_assert!(super::check_subproof(eqs, &p, a, b).is_ok(), "search produced an invalid proof");
    Some(p)
}

struct Search<'a> {
    eqs: &'a EquationSystem,
    cfg: &'a SearchConfig,
    nodes: usize,
    visited: Vec<(String, String)>,
}

impl Search<'_> {
    fn go(&mut self, a: &Formula, b: &Formula, depth: usize) -> Option<SubProof> {
        if a.alpha_eq(b) {
            return Some(SubProof::Ax);
        }
        if depth <= 1 || self.nodes >= self.cfg.node_budget {
            // A single equational chain still fits in one level.
            return if depth == 1 { self.equational(a, b) } else { None };
        }
        self.nodes += 1;
        let key = (a.key(), b.key());
        if self.visited.contains(&key) {
            return None;
        }
        self.visited.push(key);
        let r = self.step(a, b, depth);
        self.visited.pop();
        r
    }

    fn step(&mut self, a: &Formula, b: &Formula, depth: usize) -> Option<SubProof> {
        if let Some(p) = self.equational(a, b) {
            return Some(p);
        }
        if let Some((zeta, body)) = b.as_forall() {
            let (xi, target) = if a.is_free(zeta.name()) {
                let mut avoid = a.free_vars();
                avoid.extend(b.free_vars());
                let fresh = fresh_name(zeta.name(), &avoid);
                (zeta.renamed(fresh.clone()), body.apply(&Substitution::rename(&zeta, &fresh)))
            } else {
                (zeta.clone(), body.clone())
            };
            return self.go(a, &target, depth - 1).map(|p| SubProof::intro(xi, p));
        }
        let (prefix, _) = a.strip_foralls();
        if !self.cfg.restricted && b.as_imp().is_some() {
            for n in 1..=prefix.len() {
                let Ok(c) = dist_conclusion(a, &prefix[..n]) else { continue };
                let dist = SubProof::Dist(prefix[..n].to_vec());
                if c.alpha_eq(b) {
                    return Some(dist);
                }
                if let Some(q) = self.go(&c, b, depth - 1) {
                    return Some(compose(&c, dist, q));
                }
            }
        }
        if !self.cfg.restricted {
            if let (Some((c, d)), Some((c2, d2))) = (a.as_imp(), b.as_imp()) {
                if let Some(p) = self.go(c2, c, depth - 1) {
                    if let Some(q) = self.go(d, d2, depth - 1) {
                        return Some(SubProof::mono(p, q));
                    }
                }
            }
        }
        if let Some((xi, body)) = a.as_forall() {
            for inst in self.candidates(&xi, a, b) {
                let c = body.instantiate(&xi, &inst);
                if let Some(q) = self.go(&c, b, depth - 1) {
                    return Some(compose(&c, SubProof::elim(inst, SubProof::Ax), q));
                }
            }
        }
        None
    }

    fn candidates(&self, xi: &Binder, a: &Formula, b: &Formula) -> Vec<Instance> {
        let mut scope = a.free_vars();
        scope.extend(b.free_vars());
        let mut out: Vec<Instance> = self.cfg.hints.iter().filter(|h| h.fits(xi)).cloned().collect();
        match xi {
            Binder::Fo(_) => {
                let mut terms = Vec::new();
                b.fo_subterms(&mut terms);
                a.fo_subterms(&mut terms);
                for t in terms {
                    if t.free_vars().is_subset(&scope) {
                        out.push(Instance::Term(t));
                    }
                }
                for v in &scope {
                    if !crate::syntax::is_upper(v) {
                        out.push(Instance::Term(FoTerm::var(v)));
                    }
                }
            }
            Binder::So(_, n) => {
                let params: Vec<String> = (1..=*n).map(|i| format!("x_{i}")).collect();
                let args: Vec<FoTerm> = params.iter().map(|p| FoTerm::var(p)).collect();
                let mut subs = Vec::new();
                b.subformulas(&mut subs);
                let mut atoms = Vec::new();
                for g in &subs {
                    match g {
                        Formula::Pred(p, xs) if xs.len() == *n => atoms.push(Formula::Pred(p.clone(), args.clone())),
                        Formula::Var(p, xs) if xs.len() == *n && scope.contains(p) => {
                            atoms.push(Formula::Var(p.clone(), args.clone()))
                        }
                        _ => {}
                    }
                }
                for g in atoms {
                    out.push(Instance::Formula(SoInst { params: params.clone(), body: g }));
                }
                for g in subs {
                    if g.free_vars().is_subset(&scope) {
                        out.push(Instance::Formula(SoInst { params: params.clone(), body: g }));
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|i| seen.insert(format!("{i:?}")));
        out.truncate(self.cfg.max_candidates);
        out
    }

    /// A chain of `eq` steps when `a` and `b` differ only in first-order
    /// terms joined by the equations.
    fn equational(&self, a: &Formula, b: &Formula) -> Option<SubProof> {
        if self.eqs.is_empty() {
            return None;
        }
        let mut cur = a.clone();
        let mut proof = SubProof::Ax;
        let mut avoid = a.free_vars();
        avoid.extend(b.free_vars());
        let hole = fresh_name("y", &avoid);
        let mut guard = 0;
        while let Some(diff) = first_difference(&cur, b)? {
            guard += 1;
            if guard > 64 {
                return None;
            }
            if diff.left.free_vars().iter().chain(diff.right.free_vars().iter()).any(|v| diff.bound.contains(v)) {
                return None;
            }
            let trace = equational_trace(self.eqs, &diff.left, &diff.right, self.cfg.eq_budget)?;
            for st in trace {
                let with_hole = replace_subterm(&st.before, &st.site, FoTerm::var(&hole))?;
                let template = replace_arg(&cur, diff.atom, diff.arg, &with_hole)?;
                let data = EqData {
                    template,
                    hole: hole.clone(),
                    u: st.redex.clone(),
                    v: st.contractum.clone(),
                    orientation: st.orientation,
                };
                cur = data.conclusion();
                proof = SubProof::eq(data, proof);
            }
        }
        if cur.alpha_eq(b) {
            Some(proof)
        } else {
            None
        }
    }
}

struct Difference {
    atom: usize,
    arg: usize,
    left: FoTerm,
    right: FoTerm,
    bound: BTreeSet<String>,
}

/// `None` on a shape mismatch, `Some(None)` when equal up to terms, otherwise
/// the first differing atom argument in preorder.
fn first_difference(a: &Formula, b: &Formula) -> Option<Option<Difference>> {
    fn go(a: &Formula, b: &Formula, atom: &mut usize, bound: &mut Vec<String>) -> Option<Option<Difference>> {
        match (a, b) {
            (Formula::Absurd, Formula::Absurd) => Some(None),
            (Formula::Pred(p, xs), Formula::Pred(q, ys)) | (Formula::Var(p, xs), Formula::Var(q, ys)) => {
                if p != q || xs.len() != ys.len() {
                    return None;
                }
                let here = *atom;
                *atom += 1;
                for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                    if x != y {
                        return Some(Some(Difference {
                            atom: here,
                            arg: i,
                            left: x.clone(),
                            right: y.clone(),
                            bound: bound.iter().cloned().collect(),
                        }));
                    }
                }
                Some(None)
            }
            (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => match go(a1, a2, atom, bound)? {
                Some(d) => Some(Some(d)),
                None => go(b1, b2, atom, bound),
            },
            (Formula::AllFo(x, b1), Formula::AllFo(y, b2)) if x == y => {
                bound.push(x.clone());
                let r = go(b1, b2, atom, bound);
                bound.pop();
                r
            }
            (Formula::AllSo(x, n, b1), Formula::AllSo(y, m, b2)) if x == y && n == m => {
                bound.push(x.clone());
                let r = go(b1, b2, atom, bound);
                bound.pop();
                r
            }
            _ => None,
        }
    }
    go(a, b, &mut 0, &mut Vec::new())
}

fn replace_arg(f: &Formula, target: usize, arg: usize, new: &FoTerm) -> Option<Formula> {
    fn go(f: &Formula, target: usize, arg: usize, new: &FoTerm, atom: &mut usize) -> Option<Formula> {
        match f {
            Formula::Pred(p, xs) | Formula::Var(p, xs) => {
                let here = *atom;
                *atom += 1;
                if here != target {
                    return Some(f.clone());
                }
                let mut xs = xs.clone();
                *xs.get_mut(arg)? = new.clone();
                Some(match f {
                    Formula::Pred(..) => Formula::Pred(p.clone(), xs),
                    _ => Formula::Var(p.clone(), xs),
                })
            }
            Formula::Absurd => Some(Formula::Absurd),
            Formula::Imp(a, b) => {
                let a2 = go(a, target, arg, new, atom)?;
                Some(Formula::imp(a2, go(b, target, arg, new, atom)?))
            }
            Formula::AllFo(x, b) => Some(Formula::AllFo(x.clone(), Box::new(go(b, target, arg, new, atom)?))),
            Formula::AllSo(x, n, b) => Some(Formula::AllSo(x.clone(), *n, Box::new(go(b, target, arg, new, atom)?))),
        }
    }
    go(f, target, arg, new, &mut 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Equation, Signature};
    use crate::subtyping::check_subproof;
    use crate::syntax::{parse_fo_term, parse_formula};

    fn sig() -> Signature {
        Signature::new()
            .with_function("0", 0)
            .with_function("s", 1)
            .with_function("add", 2)
            .with_function("c", 0)
            .with_predicate("N", 1)
            .with_predicate("P", 1)
            .with_predicate("Q", 1)
    }

    fn f(s: &str) -> Formula {
        parse_formula(s, &sig()).unwrap()
    }

    fn e_add() -> EquationSystem {
        let t = |s: &str| parse_fo_term(s, &sig()).unwrap();
        EquationSystem::new(vec![
            Equation::new(t("add(0, y)"), t("y")),
            Equation::new(t("add(s(x), y)"), t("s(add(x, y))")),
        ])
    }

    #[test]
    fn reflexivity_at_depth_one() {
        let a = f("!X. X -> !y. N(y)");
        assert_eq!(search_subtype(&EquationSystem::default(), &a, &a, 1), Some(SubProof::Ax));
    }

    #[test]
    fn distribution_found_by_depth_three() {
        let a = f("!X. X -> X -> X");
        let b = f("(!X. X) -> !X. X -> X");
        let p = search_subtype(&EquationSystem::default(), &a, &b, 3).unwrap();
        assert!(check_subproof(&EquationSystem::default(), &p, &a, &b).is_ok());
    }

    #[test]
    fn distinct_predicates_not_found() {
        assert!(search_subtype(&EquationSystem::default(), &f("P(c)"), &f("Q(c)"), 4).is_none());
    }

    #[test]
    fn equational_chain() {
        let a = f("N(add(s(0), s(0))) -> P(0)");
        let b = f("N(s(s(0))) -> P(add(0, 0))");
        let p = search_subtype(&e_add(), &a, &b, 2).unwrap();
        assert!(check_subproof(&e_add(), &p, &a, &b).is_ok());
    }

    #[test]
    fn instantiation_and_generalization() {
        let e = EquationSystem::default();
        let a = f("!X. X -> X");
        let b = f("!Y. (Y -> Y) -> Y -> Y");
        let p = search_subtype(&e, &a, &b, 4).unwrap();
        assert!(check_subproof(&e, &p, &a, &b).is_ok());
        let a = f("!x. N(x)");
        let b = f("N(s(0))");
        let p = search_subtype(&e, &a, &b, 2).unwrap();
        assert!(check_subproof(&e, &p, &a, &b).is_ok());
    }

    #[test]
    fn contravariant_arrow() {
        let e = EquationSystem::default();
        let a = f("(!X. X) -> Z");
        let b = f("(!X. X) -> !Y. Z");
        let p = search_subtype(&e, &a, &b, 3).unwrap();
        assert!(check_subproof(&e, &p, &a, &b).is_ok());
        let a = f("Y -> Z");
        let b = f("(!X. X) -> Z");
        let p = search_subtype(&e, &a, &b, 3).unwrap();
        assert!(check_subproof(&e, &p, &a, &b).is_ok());
    }
}
