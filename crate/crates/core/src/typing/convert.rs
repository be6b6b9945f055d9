//! Conversions between AF2, AF2⊆, AF2S and AF2η derivations, and the
//! η-expansion witness of an AF2η derivation.

use super::transform::{
    add_rename, chain_premise, gen_premise, node_subproof, retarget, subject_reduce_with, terr, weaken_with,
    Fresh, ReductionKind, TransformError,
};
use super::{Context, Derivation, EqRule, System};
use crate::lambda::{contract_at, Path, RedexKind, Step, Term};
use crate::logic::{Binder, EquationSystem, Formula, Instance, Substitution};
use crate::subtyping::{synth_subproof, SubProof};

struct Conv<'a> {
    eqs: &'a EquationSystem,
}

impl Conv<'_> {
    /// AF2, AF2⊆ or AF2η to AF2S.
    fn to_s(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        a: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        use Derivation::*;
        Ok(match (d, t) {
            (R1, Term::Var(x)) => S1(x.clone(), vec![], SubProof::Ax),
            (R2(p), Term::Abs(x, u)) => {
                let Some((b, c)) = a.as_imp() else { return terr(format!("{a} is not an implication")) };
                let p2 = self.to_s(p, &ctx.extend(x, b.clone()), u, c, fresh)?;
                S2(vec![], b.clone(), c.clone(), Box::new(p2), SubProof::Ax)
            }
            (R3(b, p, q), Term::App(u, v)) => {
                let p2 = self.to_s(p, ctx, u, &Formula::imp(b.clone(), a.clone()), fresh)?;
                let q2 = self.to_s(q, ctx, v, b, fresh)?;
                S3(vec![], b.clone(), a.clone(), Box::new(p2), Box::new(q2), SubProof::Ax)
            }
            (R4(x, p) | R6(x, p), _) => {
                let (gen, prem) = gen_premise(a, x)?;
                let p2 = self.to_s(p, ctx, t, &prem, fresh)?;
                retarget(&p2, ctx, t, &prem, &[gen], SubProof::Ax)?
            }
            (R5(..) | R7(..) | R8(..) | Sub(..), _) => {
                let prem = chain_premise(d, a)?;
                let p2 = self.to_s(d.children()[0], ctx, t, &prem, fresh)?;
                retarget(&p2, ctx, t, &prem, &[], node_subproof(self.eqs, d))?
            }
            (Eta(s, path, p), _) => {
                let p2 = self.to_s(p, ctx, s, a, fresh)?;
                subject_reduce_with(self.eqs, &p2, ctx, s, a, ReductionKind::Eta, path, fresh)?
            }
            _ => return terr(format!("{} node does not match the subject {t}", d.label())),
        })
    }

    /// AF2S to AF2⊆: each S-rule becomes its structural rule, the
    /// generalizations and one (⊆) node.
    fn s_to_sub(&self, d: &Derivation, ctx: &Context, t: &Term) -> Result<Derivation, TransformError> {
        use Derivation::*;
        let (core, xi, body, sp) = match (d, t) {
            (S1(x, xi, sp), Term::Var(_)) => {
                let Some(b) = ctx.get(x) else { return terr(format!("{x} is not in the context")) };
                (R1, xi, b.clone(), sp)
            }
            (S2(xi, b, c, p, sp), Term::Abs(x, u)) => {
                let p2 = self.s_to_sub(p, &ctx.extend(x, b.clone()), u)?;
                (R2(Box::new(p2)), xi, Formula::imp(b.clone(), c.clone()), sp)
            }
            (S3(xi, b, c, p, q, sp), Term::App(u, v)) => {
                let p2 = self.s_to_sub(p, ctx, u)?;
                let q2 = self.s_to_sub(q, ctx, v)?;
                (R3(b.clone(), Box::new(p2), Box::new(q2)), xi, c.clone(), sp)
            }
            _ => return terr(format!("{} node does not match the subject {t}", d.label())),
        };
        let out = generalize(core, xi);
        Ok(if matches!(sp, SubProof::Ax) { out } else { Sub(Formula::forall(xi, body), sp.clone(), Box::new(out)) })
    }

    /// Replaces every (⊆) node of an AF2⊆ derivation by AF2η rules.
    fn elim_subs(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        a: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        use Derivation::*;
        Ok(match (d, t) {
            (Sub(prem, sp, p), _) => {
                let p2 = self.elim_subs(p, ctx, t, prem, fresh)?;
                self.thm22(&p2, ctx, t, prem, sp, a, fresh)?
            }
            (R1, _) => R1,
            (R2(p), Term::Abs(x, u)) => {
                let Some((b, c)) = a.as_imp() else { return terr(format!("{a} is not an implication")) };
                R2(Box::new(self.elim_subs(p, &ctx.extend(x, b.clone()), u, c, fresh)?))
            }
            (R3(b, p, q), Term::App(u, v)) => R3(
                b.clone(),
                Box::new(self.elim_subs(p, ctx, u, &Formula::imp(b.clone(), a.clone()), fresh)?),
                Box::new(self.elim_subs(q, ctx, v, b, fresh)?),
            ),
            (Eta(s, path, p), _) => Eta(s.clone(), path.clone(), Box::new(self.elim_subs(p, ctx, s, a, fresh)?)),
            (R4(..) | R5(..) | R6(..) | R7(..) | R8(..), _) => {
                let prem = chain_premise(d, a)?;
                let p2 = Box::new(self.elim_subs(d.children()[0], ctx, t, &prem, fresh)?);
                match d.clone() {
                    R4(x, _) => R4(x, p2),
                    R5(pf, u, _) => R5(pf, u, p2),
                    R6(x, _) => R6(x, p2),
                    R7(pf, g, _) => R7(pf, g, p2),
                    R8(r, _) => R8(r, p2),
                    _ => unreachable!(),
                }
            }
            _ => return terr(format!("{} node does not match the subject {t}", d.label())),
        })
    }

    /// From an AF2η derivation of `Γ ⊢ t : A` and `A ⊆ B`, an AF2η
    /// derivation of `Γ ⊢ t : B`.
    #[allow(clippy::too_many_arguments)]
    fn thm22(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        a: &Formula,
        sp: &SubProof,
        b: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        use Derivation::*;
        match sp {
            SubProof::Ax => Ok(d.clone()),
            SubProof::ForallElim(inst, q) => {
                let mid = synth_subproof(self.eqs, q, a).map_err(|e| TransformError(e.to_string()))?;
                let d1 = Box::new(self.thm22(d, ctx, t, a, q, &mid, fresh)?);
                Ok(match inst {
                    Instance::Term(u) => R5(mid, u.clone(), d1),
                    Instance::Formula(g) => R7(mid, g.clone(), d1),
                })
            }
            SubProof::ForallIntro(zeta, q) => {
                let Some((z2, body)) = b.as_forall() else { return terr(format!("{b} is not quantified")) };
                let zf = if ctx.free_vars().contains(zeta.name()) { fresh.binder(zeta) } else { zeta.clone() };
                let q2 = if zf == *zeta {
                    (**q).clone()
                } else {
                    crate::subtyping::substitute_subproof(q, &Substitution::rename(zeta, zf.name()))
                };
                let target = if z2.name() == zf.name() {
                    body.clone()
                } else {
                    body.apply(&Substitution::rename(&z2, zf.name()))
                };
                let d1 = Box::new(self.thm22(d, ctx, t, a, &q2, &target, fresh)?);
                Ok(match zf {
                    Binder::Fo(x) => R4(x, d1),
                    Binder::So(x, _) => R6(x, d1),
                })
            }
            SubProof::Trans(m, q1, q2) => {
                let d1 = self.thm22(d, ctx, t, a, q1, m, fresh)?;
                self.thm22(&d1, ctx, t, m, q2, b, fresh)
            }
            SubProof::EqStep(data, q) => {
                let prem = data.premise();
                let d1 = self.thm22(d, ctx, t, a, q, &prem, fresh)?;
                let rule = EqRule { template: data.template.clone(), var: data.hole.clone(), u: data.u.clone(), v: data.v.clone() };
                Ok(R8(rule, Box::new(d1)))
            }
            SubProof::Mono(q1, q2) => {
                let (Some((c, dd)), Some((c2, d2))) = (a.as_imp(), b.as_imp()) else {
                    return terr("monotonicity between non-implications");
                };
                let z = self.fresh_var(ctx, t, fresh);
                let ctx_z = ctx.extend(&z, c2.clone());
                let zt = Term::var(z.clone());
                let dt = weaken_with(d, a, c2, fresh)?;
                let dz = self.thm22(&R1, &ctx_z, &zt, c2, q1, c, fresh)?;
                let app = Term::app(t.clone(), zt);
                let dapp = R3(c.clone(), Box::new(dt), Box::new(dz));
                let dapp = self.thm22(&dapp, &ctx_z, &app, dd, q2, d2, fresh)?;
                let expanded = Term::abs(z, app);
                Ok(Eta(expanded, Path::root(), Box::new(R2(Box::new(dapp)))))
            }
            SubProof::Dist(zeta) => {
                let Some((binders, body)) = a.strip_n(zeta.len()) else { return terr("distribution arity mismatch") };
                let Some((c, _)) = body.as_imp() else { return terr("distribution over a non-implication") };
                let ac = Formula::forall(&binders, c.clone());
                let z = self.fresh_var(ctx, t, fresh);
                let ctx_z = ctx.extend(&z, ac.clone());
                let zt = Term::var(z.clone());
                fresh.context(&ctx_z);
                let opened: Vec<Binder> = binders.iter().map(|b| fresh.binder(b)).collect();
                let mut ren = Substitution::default();
                for (b, o) in binders.iter().zip(&opened) {
                    add_rename(&mut ren, b, o.name());
                }
                let dt = weaken_with(d, a, &ac, fresh)?;
                let dt = instantiate_all(dt, a, &opened);
                let dz = instantiate_all(R1, &ac, &opened);
                let app = Term::app(t.clone(), zt);
                let mut out = R3(c.apply(&ren), Box::new(dt), Box::new(dz));
                out = generalize(out, &opened);
                let expanded = Term::abs(z, app);
                Ok(Eta(expanded, Path::root(), Box::new(R2(Box::new(out)))))
            }
        }
    }

    fn fresh_var(&self, ctx: &Context, t: &Term, fresh: &mut Fresh) -> String {
        let mut avoid = ctx.names();
        t.all_names(&mut avoid);
        let z = crate::lambda::fresh_name("z", &avoid);
        fresh.names([z.clone()]);
        z
    }
}

/// Wraps `d` in generalizations over `xi`, innermost last.
fn generalize(d: Derivation, xi: &[Binder]) -> Derivation {
    xi.iter().rev().fold(d, |inner, b| match b {
        Binder::Fo(x) => Derivation::R4(x.clone(), Box::new(inner)),
        Binder::So(x, _) => Derivation::R6(x.clone(), Box::new(inner)),
    })
}

/// Eliminates the leading quantifiers of `a` with the variables `opened`.
fn instantiate_all(d: Derivation, a: &Formula, opened: &[Binder]) -> Derivation {
    let mut out = d;
    let mut cur = a.clone();
    for o in opened {
        let (b, body) = cur.as_forall().expect("quantifier count checked by the caller");
        let inst = b.renamed(o.name().to_string()).identity_instance();
        let next = body.instantiate(&b, &inst);
        out = match inst {
            Instance::Term(u) => Derivation::R5(cur.clone(), u, Box::new(out)),
            Instance::Formula(g) => Derivation::R7(cur.clone(), g, Box::new(out)),
        };
        cur = next;
    }
    out
}

/// Converts a derivation of `Γ ⊢ t : A` between systems. AF2 is only a
/// target from AF2 itself; AF2η targets may introduce η-expansions.
#[allow(clippy::too_many_arguments)]
pub fn convert(
    eqs: &EquationSystem,
    d: &Derivation,
    from: System,
    to: System,
    ctx: &Context,
    t: &Term,
    a: &Formula,
) -> Result<Derivation, TransformError> {
    use System::*;
    let c = Conv { eqs };
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(ctx).formula(a);
    match (from, to) {
        _ if from == to => Ok(d.clone()),
        (Af2, Af2Sub) => Ok(d.clone()),
        (Af2 | Af2Sub | Af2Eta, Af2S) => c.to_s(d, ctx, t, a, &mut fresh),
        (Af2S, Af2Sub) => c.s_to_sub(d, ctx, t),
        (Af2S, Af2Eta) => {
            let sub = c.s_to_sub(d, ctx, t)?;
            c.elim_subs(&sub, ctx, t, a, &mut fresh)
        }
        (Af2Sub, Af2Eta) => c.elim_subs(d, ctx, t, a, &mut fresh),
        (Af2, Af2Eta) => Ok(d.clone()),
        (Af2Eta, Af2Sub) => {
            let s = c.to_s(d, ctx, t, a, &mut fresh)?;
            c.s_to_sub(&s, ctx, t)
        }
        _ => terr(format!("conversion from {from} to {to} is not supported")),
    }
}

/// An AF2 derivation of `Γ ⊢ u : A` with `u` η-reducing to the original
/// subject along `steps`.
#[derive(Clone, Debug)]
pub struct EtaWitness {
    pub term: Term,
    pub derivation: Derivation,
    pub steps: Vec<Path>,
}

impl EtaWitness {
    /// Replays the η-steps from `term`; the final term if every step applies.
    pub fn replay(&self) -> Option<Term> {
        self.steps.iter().try_fold(self.term.clone(), |cur, p| contract_at(&cur, p, RedexKind::Eta))
    }
}

fn prefix(steps: Vec<Path>, step: Step) -> Vec<Path> {
    steps.into_iter().map(|p| p.prepend(step)).collect()
}

fn strip_eta(d: &Derivation, t: &Term) -> Result<(Term, Derivation, Vec<Path>), TransformError> {
    use Derivation::*;
    Ok(match d {
        Eta(s, path, p) => {
            let (u, d2, mut steps) = strip_eta(p, s)?;
            steps.push(path.clone());
            (u, d2, steps)
        }
        R1 => (t.clone(), R1, vec![]),
        R2(p) => {
            let Term::Abs(x, body) = t else { return terr("malformed (2) node") };
            let (u, d2, steps) = strip_eta(p, body)?;
            (Term::abs(x.clone(), u), R2(Box::new(d2)), prefix(steps, Step::Body))
        }
        R3(b, p, q) => {
            let Term::App(f, g) = t else { return terr("malformed (3) node") };
            let (u1, d1, s1) = strip_eta(p, f)?;
            let (u2, d2, s2) = strip_eta(q, g)?;
            let mut steps = prefix(s1, Step::Fun);
            steps.extend(prefix(s2, Step::Arg));
            (Term::app(u1, u2), R3(b.clone(), Box::new(d1), Box::new(d2)), steps)
        }
        R4(..) | R5(..) | R6(..) | R7(..) | R8(..) => {
            let (u, d2, steps) = strip_eta(d.children()[0], t)?;
            let inner = Box::new(d2);
            let node = match d.clone() {
                R4(x, _) => R4(x, inner),
                R5(pf, u, _) => R5(pf, u, inner),
                R6(x, _) => R6(x, inner),
                R7(pf, g, _) => R7(pf, g, inner),
                R8(r, _) => R8(r, inner),
                _ => unreachable!(),
            };
            (u, node, steps)
        }
        other => return terr(format!("{} nodes are not AF2η rules", other.label())),
    })
}

/// For a derivation of `Γ ⊢ t : A` in any system, a term `u →η* t` with an
/// AF2 derivation of `Γ ⊢ u : A`.
pub fn eta_expand_witness(
    eqs: &EquationSystem,
    d: &Derivation,
    system: System,
    ctx: &Context,
    t: &Term,
    a: &Formula,
) -> Result<EtaWitness, TransformError> {
    let eta = match system {
        System::Af2Eta | System::Af2 => d.clone(),
        other => convert(eqs, d, other, System::Af2Eta, ctx, t, a)?,
    };
    let (term, derivation, steps) = strip_eta(&eta, t)?;
    let w = EtaWitness { term, derivation, steps };
    match w.replay() {
        Some(r) if r.alpha_eq(t) => Ok(w),
        _ => terr("η-steps of the witness do not replay to the subject"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::tests::{af2_sec3, af2s_id_sec3, ctx, d, f, none, t, SEC3};
    use crate::typing::check_derivation;

    fn ok(sys: System, dd: &Derivation, c: &Context, tt: &Term, a: &Formula) {
        if let Err(e) = check_derivation(sys, &none(), dd, c, tt, a) {
            panic!("{sys}: {e}\n{dd}");
        }
    }

    #[test]
    fn af2_to_af2s_and_back() {
        let (c, tt, a) = (Context::new(), t("\\x y. x y"), f(SEC3));
        let s = convert(&none(), &af2_sec3(), System::Af2, System::Af2S, &c, &tt, &a).unwrap();
        ok(System::Af2S, &s, &c, &tt, &a);
        let sub = convert(&none(), &s, System::Af2S, System::Af2Sub, &c, &tt, &a).unwrap();
        ok(System::Af2Sub, &sub, &c, &tt, &a);
        let s2 = convert(&none(), &sub, System::Af2Sub, System::Af2S, &c, &tt, &a).unwrap();
        ok(System::Af2S, &s2, &c, &tt, &a);
        assert_eq!(convert(&none(), &s, System::Af2S, System::Af2S, &c, &tt, &a).unwrap(), s);
    }

    #[test]
    fn af2s_identity_to_eta_and_witness() {
        let (c, tt, a) = (Context::new(), t("\\x. x"), f(SEC3));
        let e = convert(&none(), &af2s_id_sec3(), System::Af2S, System::Af2Eta, &c, &tt, &a).unwrap();
        ok(System::Af2Eta, &e, &c, &tt, &a);
        assert!(e.labels().contains(&"eta"));
        let back = convert(&none(), &e, System::Af2Eta, System::Af2S, &c, &tt, &a).unwrap();
        ok(System::Af2S, &back, &c, &tt, &a);
        let w = eta_expand_witness(&none(), &e, System::Af2Eta, &c, &tt, &a).unwrap();
        assert!(w.term.alpha_eq(&t("\\x y. x y")), "{}", w.term);
        ok(System::Af2, &w.derivation, &c, &w.term, &a);
    }

    #[test]
    fn witness_of_plain_af2_is_the_subject() {
        let (c, tt, a) = (Context::new(), t("\\x y. x y"), f(SEC3));
        let w = eta_expand_witness(&none(), &af2_sec3(), System::Af2, &c, &tt, &a).unwrap();
        assert!(w.term.alpha_eq(&tt));
        assert!(w.steps.is_empty());
    }

    #[test]
    fn stacked_eta_nodes() {
        // x : ∀X(X→X→X) ⊢ x : ... via two expansions of x.
        let a = f("!X. X -> X -> X");
        let c = ctx("x : !X. X -> X -> X");
        let inner = d("(r2 (r2 (r3 {X} (r3 {X} (r7 {!X. X -> X -> X} {X} (r1)) (r1)) (r1))))");
        let gen = Derivation::R6("X".into(), Box::new(inner));
        let src = t("\\y z. x y z");
        ok(System::Af2, &gen, &c, &src, &a);
        let mid = t("\\y. x y");
        let one = Derivation::Eta(src.clone(), "@b".parse().unwrap(), Box::new(gen));
        let two = Derivation::Eta(mid.clone(), "@".parse().unwrap(), Box::new(one));
        ok(System::Af2Eta, &two, &c, &t("x"), &a);
        let w = eta_expand_witness(&none(), &two, System::Af2Eta, &c, &t("x"), &a).unwrap();
        assert_eq!(w.steps.len(), 2);
        assert!(w.term.alpha_eq(&src));
        assert!(w.replay().unwrap().alpha_eq(&t("x")));
    }
}
