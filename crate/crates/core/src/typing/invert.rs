//! Generation lemmas: reading the last rule of an AF2S derivation back
//! into the data it was built from.

use super::transform::{lemma18_with, terr, Fresh, TransformError};
use super::{Context, Derivation};
use crate::lambda::Term;
use crate::logic::{Binder, EquationSystem, Formula};
use crate::subtyping::SubProof;

/// One application in a head-variable spine: `∀ξB ⊆ C → B'` where `B` is
/// the previous result type and `arg : C`.
#[derive(Clone, Debug)]
pub struct SpineStep {
    pub xi: Vec<Binder>,
    pub sp: SubProof,
    pub arg_type: Formula,
    pub result: Formula,
    pub arg: Derivation,
}

#[derive(Clone, Debug)]
pub enum GenerationData {
    /// `x : B ∈ Γ` and `∀ξB ⊆ A`.
    Var { b: Formula, xi: Vec<Binder>, sp: SubProof },
    /// `Γ, x : B ⊢ u : C` and `∀ξ(B → C) ⊆ A`; for `A` an implication
    /// `A1 → A2`, also a derivation of `Γ, x : A1 ⊢ u : A2`.
    Abs { b: Formula, c: Formula, premise: Derivation, xi: Vec<Binder>, sp: SubProof, at_arrow: Option<Derivation> },
    /// `u : B → C`, `v : B` and `∀ξC ⊆ A`.
    App { b: Formula, c: Formula, fun: Derivation, arg: Derivation, xi: Vec<Binder>, sp: SubProof },
    /// `(x)u1 … un` with `x : A0 ∈ Γ`: `∀ξ0 A0 ⊆ C1 → B1`, then each step,
    /// then `∀ξn Bn ⊆ A`.
    Spine { head: String, head_type: Formula, steps: Vec<SpineStep>, last_xi: Vec<Binder>, last_sp: SubProof },
}

/// Decomposes an AF2S derivation of `Γ ⊢ t : A` according to the shape of
/// `t`. Applications with a variable head give a spine.
pub fn invert(
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
) -> Result<GenerationData, TransformError> {
    match (d, t) {
        (Derivation::S1(x, xi, sp), Term::Var(_)) => {
            let Some(b) = ctx.get(x) else { return terr(format!("{x} is not in the context")) };
            Ok(GenerationData::Var { b: b.clone(), xi: xi.clone(), sp: sp.clone() })
        }
        (Derivation::S2(xi, b, c, p, sp), Term::Abs(..)) => {
            let at_arrow = match a.as_imp() {
                Some(_) => Some(lemma18_with(eqs, d, ctx, t, a, &mut Fresh::new())?),
                None => None,
            };
            Ok(GenerationData::Abs {
                b: b.clone(),
                c: c.clone(),
                premise: (**p).clone(),
                xi: xi.clone(),
                sp: sp.clone(),
                at_arrow,
            })
        }
        (Derivation::S3(xi, b, c, p, q, sp), Term::App(..)) => {
            let (head, _) = t.spine();
            if let Term::Var(x) = head {
                return spine(d, ctx, x);
            }
            Ok(GenerationData::App {
                b: b.clone(),
                c: c.clone(),
                fun: (**p).clone(),
                arg: (**q).clone(),
                xi: xi.clone(),
                sp: sp.clone(),
            })
        }
        _ => terr(format!("{} node does not match the subject {t}", d.label())),
    }
}

fn spine(d: &Derivation, ctx: &Context, head: &str) -> Result<GenerationData, TransformError> {
    // Walk the function chain down to the head, collecting S3 nodes.
    let mut apps = Vec::new();
    let mut cur = d;
    while let Derivation::S3(xi, b, c, p, q, sp) = cur {
        apps.push((xi, b, c, q, sp));
        cur = p;
    }
    let Derivation::S1(x, xi0, sp0) = cur else { return terr("spine does not end in an S1 node") };
    if x != head {
        return terr(format!("spine head {x} differs from the subject head {head}"));
    }
    let Some(a0) = ctx.get(x) else { return terr(format!("{x} is not in the context")) };
    apps.reverse();
    let mut steps = Vec::new();
    let (mut xi_prev, mut sp_prev) = (xi0.clone(), sp0.clone());
    for (xi, b, c, q, sp) in apps {
        steps.push(SpineStep { xi: xi_prev, sp: sp_prev, arg_type: b.clone(), result: c.clone(), arg: (**q).clone() });
        xi_prev = xi.clone();
        sp_prev = sp.clone();
    }
    Ok(GenerationData::Spine { head: x.clone(), head_type: a0.clone(), steps, last_xi: xi_prev, last_sp: sp_prev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtyping::check_subproof;
    use crate::typing::tests::{ctx, d, f, none, t};
    use crate::typing::{check_derivation, System};

    #[test]
    fn abstraction_readback() {
        let dd = d("(s2 (X) {X} {X} (s1 x () (ax)) (ax))");
        let g = invert(&none(), &dd, &Context::new(), &t("\\x. x"), &f("!X. X -> X")).unwrap();
        let GenerationData::Abs { b, c, premise, xi, sp, at_arrow } = g else { panic!() };
        assert_eq!((b, c), (f("X"), f("X")));
        assert_eq!(premise, d("(s1 x () (ax))"));
        assert_eq!(xi, vec![Binder::So("X".into(), 0)]);
        assert_eq!(sp, SubProof::Ax);
        assert!(at_arrow.is_none());
    }

    #[test]
    fn lemma18_instance() {
        let dd = d("(s2 () {P(c)} {P(c)} (s1 x () (ax)) (ax))");
        let g = invert(&none(), &dd, &Context::new(), &t("\\x. x"), &f("P(c) -> P(c)")).unwrap();
        let GenerationData::Abs { at_arrow: Some(out), .. } = g else { panic!() };
        assert!(check_derivation(System::Af2S, &none(), &out, &ctx("x : P(c)"), &t("x"), &f("P(c)")).is_ok());
    }

    #[test]
    fn spine_through_elimination() {
        let c = ctx("x : !X. X, y : P(c)");
        let dd = d("(s3 () {P(c)} {P(c)} (s1 x () (forall-elim {P(c) -> P(c)} (ax))) (s1 y () (ax)) (ax))");
        assert!(check_derivation(System::Af2S, &none(), &dd, &c, &t("x y"), &f("P(c)")).is_ok());
        let GenerationData::Spine { head, head_type, steps, last_xi, last_sp } =
            invert(&none(), &dd, &c, &t("x y"), &f("P(c)")).unwrap()
        else {
            panic!()
        };
        assert_eq!(head, "x");
        assert_eq!(steps.len(), 1);
        let s = &steps[0];
        let lhs = Formula::forall(&s.xi, head_type.clone());
        assert!(check_subproof(&none(), &s.sp, &lhs, &Formula::imp(s.arg_type.clone(), s.result.clone())).is_ok());
        assert!(matches!(s.sp, SubProof::ForallElim(..)));
        assert!(check_subproof(&none(), &last_sp, &Formula::forall(&last_xi, s.result.clone()), &f("P(c)")).is_ok());
    }
}
