//! Random terms, formulas and substitutions for the property checks.

use crate::lambda::{fresh_name, Term};
use crate::logic::{FoTerm, Formula, Signature, SoInst, Substitution};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// A λ-term of depth at most `depth` over the bound `scope` and the free
/// variables `free`.
pub fn term<R: Rng>(rng: &mut R, depth: usize, scope: &mut Vec<String>, free: &[&str]) -> Term {
    let roll = rng.gen_range(0..10);
    if depth == 0 || roll < 3 {
        let mut names: Vec<String> = scope.clone();
        names.extend(free.iter().map(|s| s.to_string()));
        return Term::var(names.choose(rng).cloned().unwrap_or_else(|| "a".to_string()));
    }
    if roll < 6 {
        let x = format!("x{}", scope.len());
        scope.push(x.clone());
        let body = term(rng, depth - 1, scope, free);
        scope.pop();
        Term::abs(x, body)
    } else {
        let f = term(rng, depth - 1, scope, free);
        let a = term(rng, depth - 1, scope, free);
        Term::app(f, a)
    }
}

/// A term with at least one β-redex.
pub fn term_with_redex<R: Rng>(rng: &mut R, depth: usize, free: &[&str]) -> Term {
    loop {
        let t = term(rng, depth, &mut Vec::new(), free);
        if !crate::lambda::beta_redexes(&t).is_empty() {
            return t;
        }
    }
}

pub fn fo_term<R: Rng>(rng: &mut R, sig: &Signature, vars: &[String], depth: usize) -> FoTerm {
    let consts: Vec<&String> = sig.functions.iter().filter(|(_, a)| **a == 0).map(|(n, _)| n).collect();
    let funs: Vec<(&String, &usize)> = sig.functions.iter().filter(|(_, a)| **a > 0).collect();
    if depth == 0 || funs.is_empty() || rng.gen_bool(0.4) {
        let leaves: Vec<FoTerm> = consts
            .iter()
            .map(|c| FoTerm::constant(c))
            .chain(vars.iter().map(|v| FoTerm::var(v)))
            .collect();
        return leaves.choose(rng).cloned().unwrap_or_else(|| FoTerm::var("m"));
    }
    let (f, n) = funs[rng.gen_range(0..funs.len())];
    FoTerm::app(f, (0..*n).map(|_| fo_term(rng, sig, vars, depth - 1)).collect())
}

/// A formula over the predicates of `sig`, the second-order variables
/// `so` and the first-order variables `fo`.
pub fn formula<R: Rng>(rng: &mut R, sig: &Signature, so: &mut Vec<(String, usize)>, fo: &mut Vec<String>, depth: usize) -> Formula {
    let roll = rng.gen_range(0..10);
    if depth == 0 || roll < 3 {
        let mut atoms: Vec<(String, usize, bool)> = sig.predicates.iter().map(|(p, n)| (p.clone(), *n, true)).collect();
        atoms.extend(so.iter().map(|(x, n)| (x.clone(), *n, false)));
        let Some((p, n, is_pred)) = atoms.choose(rng).cloned() else { return Formula::Absurd };
        let args = (0..n).map(|_| fo_term(rng, sig, fo, 1)).collect();
        return if is_pred { Formula::Pred(p, args) } else { Formula::Var(p, args) };
    }
    match roll {
        3..=6 => {
            let a = formula(rng, sig, so, fo, depth - 1);
            let b = formula(rng, sig, so, fo, depth - 1);
            Formula::imp(a, b)
        }
        7 => {
            let x = format!("v{}", fo.len());
            fo.push(x.clone());
            let b = formula(rng, sig, so, fo, depth - 1);
            fo.pop();
            Formula::all_fo(&x, b)
        }
        _ => {
            let x = format!("Y{}", so.len());
            so.push((x.clone(), 0));
            let b = formula(rng, sig, so, fo, depth - 1);
            so.pop();
            Formula::all_so(&x, 0, b)
        }
    }
}

/// Maps each first-order variable of `fo` and each second-order variable
/// of `so` to random replacements over the variables `m`, `n`.
pub fn substitution<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    fo: &BTreeSet<String>,
    so: &BTreeMap<String, usize>,
) -> Substitution {
    let pool = vec!["m".to_string(), "n".to_string()];
    let mut sigma = Substitution::default();
    for x in fo {
        sigma.fo.insert(x.clone(), fo_term(rng, sig, &pool, 2));
    }
    for (x, n) in so {
        let params: Vec<String> = (0..*n).map(|i| format!("p{i}")).collect();
        let mut vars = params.clone();
        vars.extend(pool.iter().cloned());
        let mut so_vars = vec![("Z".to_string(), 0)];
        let body = formula(rng, sig, &mut so_vars, &mut vars, 2);
        sigma.so.insert(x.clone(), SoInst { params, body });
    }
    sigma
}

/// `u` with `u ≻f* v`: `v` wrapped in `k` random weak-head redexes whose
/// arguments come from `args`.
pub fn weak_head_expansion<R: Rng>(rng: &mut R, v: &Term, k: usize, args: &[Term]) -> Term {
    let mut u = v.clone();
    for _ in 0..k {
        let w = args.choose(rng).cloned().unwrap_or_else(|| Term::abs("q", Term::var("q")));
        let z = fresh_name("z", &u.free_vars());
        u = match rng.gen_range(0..3) {
            // (λz u) w
            0 => Term::app(Term::abs(z, u), w),
            // (λz z) u
            1 => Term::app(Term::abs(z.clone(), Term::var(z)), u),
            // (λz λy y) w u
            _ => {
                let y = fresh_name("y", &BTreeSet::from([z.clone()]));
                Term::apps(Term::abs(z, Term::abs(y.clone(), Term::var(y))), [w, u])
            }
        };
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{reduce, Strategy};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn expansions_reduce_back() {
        let mut rng = StdRng::seed_from_u64(3);
        let v = Term::abs("x", Term::app(Term::var("a"), Term::var("x")));
        for _ in 0..50 {
            let u = weak_head_expansion(&mut rng, &v, 3, &[Term::var("b")]);
            let r = reduce(&u, Strategy::WeakHead, 100);
            assert!(r.result.alpha_eq(&v), "{u}");
        }
    }

    #[test]
    fn generated_formulas_respect_arities() {
        let sig = Signature::new().with_function("s", 1).with_function("0", 0).with_predicate("P", 1);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let a = formula(&mut rng, &sig, &mut vec![("W".into(), 1)], &mut vec!["n".into()], 4);
            assert!(sig.check_formula(&a).is_ok());
            assert!(a.so_arities().is_ok());
        }
    }
}
