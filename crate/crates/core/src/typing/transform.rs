//! Constructive transformations of AF2S derivations: substitution,
//! weakening, strengthening, cut, inversion of abstractions and subject
//! reduction. Every function returns a derivation that re-checks.

use super::{s_premise, Context, Derivation, EqRule};
use crate::lambda::{binder_rename, fresh_name, Path, Step, Term};
use crate::logic::{Binder, EquationSystem, FoTerm, Formula, Instance, Orientation, Substitution};
use crate::subtyping::{
    compose, congruence, elim_chain, intro_chain, substitute_subproof, synth_subproof, valid_instance, EqData,
    SubProof,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct TransformError(pub String);

pub(crate) fn terr<T>(msg: impl Into<String>) -> Result<T, TransformError> {
    Err(TransformError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    Beta,
    Eta,
}

/// Supply of names not used anywhere in the objects registered so far.
#[derive(Clone, Debug, Default)]
pub(crate) struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn derivation(&mut self, d: &Derivation) -> &mut Self {
        d.names(&mut self.used);
        self
    }

    pub fn context(&mut self, ctx: &Context) -> &mut Self {
        for (_, a) in ctx.entries() {
            a.all_names(&mut self.used);
        }
        self
    }

    pub fn formula(&mut self, a: &Formula) -> &mut Self {
        a.all_names(&mut self.used);
        self
    }

    pub fn subproof(&mut self, p: &SubProof) -> &mut Self {
        p.names(&mut self.used);
        self
    }

    pub fn subst(&mut self, s: &Substitution) -> &mut Self {
        self.used.extend(s.domain());
        self.used.extend(s.all_range_vars());
        self
    }

    pub fn names(&mut self, names: impl IntoIterator<Item = String>) -> &mut Self {
        self.used.extend(names);
        self
    }

    pub fn name(&mut self, base: &str) -> String {
        let n = fresh_name(base, &self.used);
        self.used.insert(n.clone());
        n
    }

    pub fn binder(&mut self, b: &Binder) -> Binder {
        b.renamed(self.name(b.name()))
    }
}

pub(crate) fn add_rename(s: &mut Substitution, b: &Binder, to: &str) {
    let r = Substitution::rename(b, to);
    s.fo.extend(r.fo);
    s.so.extend(r.so);
}

/// Renames the binders of `xi` selected by `clash`; returns the new
/// sequence and the renaming.
fn rename_binders(xi: &[Binder], clash: impl Fn(&str) -> bool, fresh: &mut Fresh) -> (Vec<Binder>, Substitution) {
    let mut ren = Substitution::default();
    let out = xi
        .iter()
        .map(|b| {
            if clash(b.name()) {
                let nb = fresh.binder(b);
                add_rename(&mut ren, b, nb.name());
                nb
            } else {
                b.clone()
            }
        })
        .collect();
    (out, ren)
}

/// Premise formula of a generalization node concluding `a`, with the binder
/// carrying its sort.
pub(crate) fn gen_premise(a: &Formula, x: &str) -> Result<(Binder, Formula), TransformError> {
    let Some((zeta, body)) = a.as_forall() else { return terr(format!("{a} is not quantified")) };
    let premise = if zeta.name() == x { body.clone() } else { body.apply(&Substitution::rename(&zeta, x)) };
    Ok((zeta.renamed(x.to_string()), premise))
}

/// Premise formula of a rule (8) node.
fn eq_premise(r: &EqRule) -> Formula {
    r.template.subst_fo(&r.var, &r.u)
}

/// Orientation under which `u = v` is a particular case.
pub(crate) fn orientation_of(eqs: &EquationSystem, u: &FoTerm, v: &FoTerm) -> Orientation {
    if valid_instance(eqs, u, v, Orientation::Forward) {
        Orientation::Forward
    } else {
        Orientation::Backward
    }
}

/// Substitution on a derivation concluding `a`. Generalized variables in
/// the range of `sigma` or in `force` are renamed.
pub(crate) fn subst_d(
    d: &Derivation,
    a: &Formula,
    sigma: &Substitution,
    force: &BTreeSet<String>,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    use Derivation::*;
    if sigma.is_empty() && force.is_empty() {
        return Ok(d.clone());
    }
    let range = sigma.all_range_vars();
    let clash = |x: &str| range.contains(x) || force.contains(x);
    Ok(match d {
        R1 => R1,
        R2(p) => {
            let Some((_, c)) = a.as_imp() else { return terr(format!("{a} is not an implication")) };
            R2(Box::new(subst_d(p, c, sigma, force, fresh)?))
        }
        R3(b, p, q) => R3(
            b.apply(sigma),
            Box::new(subst_d(p, &Formula::imp(b.clone(), a.clone()), sigma, force, fresh)?),
            Box::new(subst_d(q, b, sigma, force, fresh)?),
        ),
        R4(x, p) | R6(x, p) => {
            let (gen, premise) = gen_premise(a, x)?;
            let mut inner = sigma.without(x);
            let name = if clash(x) {
                let nx = fresh.name(x);
                add_rename(&mut inner, &gen, &nx);
                nx
            } else {
                x.clone()
            };
            let p = Box::new(subst_d(p, &premise, &inner, force, fresh)?);
            if matches!(d, R4(..)) {
                R4(name, p)
            } else {
                R6(name, p)
            }
        }
        R5(pf, u, p) => R5(pf.apply(sigma), u.subst(&sigma.fo), Box::new(subst_d(p, pf, sigma, force, fresh)?)),
        R7(pf, g, p) => R7(pf.apply(sigma), g.apply(sigma), Box::new(subst_d(p, pf, sigma, force, fresh)?)),
        R8(r, p) => {
            let premise = eq_premise(r);
            let mut r2 = r.clone();
            if sigma.domain().contains(&r.var) || range.contains(&r.var) {
                let h = fresh.name(&r.var);
                r2.template = r.template.subst_fo(&r.var, &FoTerm::var(&h));
                r2.var = h;
            }
            r2.template = r2.template.apply(sigma);
            r2.u = r.u.subst(&sigma.fo);
            r2.v = r.v.subst(&sigma.fo);
            R8(r2, Box::new(subst_d(p, &premise, sigma, force, fresh)?))
        }
        Sub(pf, sp, p) => {
            Sub(pf.apply(sigma), substitute_subproof(sp, sigma), Box::new(subst_d(p, pf, sigma, force, fresh)?))
        }
        S1(x, xi, sp) => {
            let (xi2, _) = rename_binders(xi, clash, fresh);
            S1(x.clone(), xi2, substitute_subproof(sp, sigma))
        }
        S2(xi, b, c, p, sp) => {
            let (xi2, ren) = rename_binders(xi, clash, fresh);
            let inner = merge_inner(sigma, xi, ren);
            S2(
                xi2,
                b.apply(&inner),
                c.apply(&inner),
                Box::new(subst_d(p, c, &inner, force, fresh)?),
                substitute_subproof(sp, sigma),
            )
        }
        S3(xi, b, c, p, q, sp) => {
            let (xi2, ren) = rename_binders(xi, clash, fresh);
            let inner = merge_inner(sigma, xi, ren);
            S3(
                xi2,
                b.apply(&inner),
                c.apply(&inner),
                Box::new(subst_d(p, &Formula::imp(b.clone(), c.clone()), &inner, force, fresh)?),
                Box::new(subst_d(q, b, &inner, force, fresh)?),
                substitute_subproof(sp, sigma),
            )
        }
        Eta(s, path, p) => Eta(s.clone(), path.clone(), Box::new(subst_d(p, a, sigma, force, fresh)?)),
    })
}

/// `sigma` with the variables of `xi` removed, plus the renaming `ren`.
fn merge_inner(sigma: &Substitution, xi: &[Binder], ren: Substitution) -> Substitution {
    let mut inner = xi.iter().fold(sigma.clone(), |s, b| s.without(b.name()));
    inner.fo.extend(ren.fo);
    inner.so.extend(ren.so);
    inner
}

/// From `Γ ⊢ t : A`, a derivation of `Γ[σ] ⊢ t : A[σ]` with the same rules.
pub fn substitute_derivation(
    d: &Derivation,
    ctx: &Context,
    a: &Formula,
    sigma: &Substitution,
) -> Result<Derivation, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(ctx).formula(a).subst(sigma);
    subst_d(d, a, sigma, &BTreeSet::new(), &mut fresh)
}

pub(crate) fn weaken_with(
    d: &Derivation,
    a: &Formula,
    b: &Formula,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    fresh.formula(b);
    subst_d(d, a, &Substitution::default(), &b.free_vars(), fresh)
}

/// From `Γ ⊢ t : A`, a derivation of `Γ, y : B ⊢ t : A`; `y` must not be
/// free in `t`.
pub fn weaken(d: &Derivation, ctx: &Context, a: &Formula, b: &Formula) -> Result<Derivation, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(ctx).formula(a);
    weaken_with(d, a, b, &mut fresh)
}

/// Appends `∀ζA ⊆ A'` to the root of an AF2S derivation of `Γ ⊢ t : A`;
/// `ζ` must not be free in `Γ`.
pub fn retarget(
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    zeta: &[Binder],
    sp: SubProof,
) -> Result<Derivation, TransformError> {
    let Some((xi0, sp0)) = d.s_tail() else { return terr(format!("expected an S-rule at the root, found {}", d.label())) };
    if zeta.is_empty() {
        return Ok(d.with_s_tail(xi0.to_vec(), compose(a, sp0.clone(), sp)));
    }
    let Some(p) = s_premise(d, ctx, t) else { return terr("the root does not match the subject") };
    let cong = congruence(zeta, &p, sp0.clone());
    let total = compose(&Formula::forall(zeta, a.clone()), cong, sp);
    let mut xi = zeta.to_vec();
    xi.extend(xi0.iter().cloned());
    Ok(d.with_s_tail(xi, total))
}

/// Replacement hypotheses for strengthening: `x ↦ (B, proof of B ⊆ Γ(x))`.
pub type ContextProofs = BTreeMap<String, (Formula, SubProof)>;

fn strengthen_ctx(
    d: &Derivation,
    old: &Context,
    new: &Context,
    t: &Term,
    a: &Formula,
    changes: &ContextProofs,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    use Derivation::*;
    let fv = new.free_vars();
    let clash = |x: &str| fv.contains(x);
    match (d, t) {
        (S1(x, xi, sp), Term::Var(y)) if x == y => {
            let Some(ax) = old.get(x) else { return terr(format!("{x} is not in the context")) };
            let (xi2, _) = rename_binders(xi, clash, fresh);
            let total = match changes.get(x) {
                Some((bx, q)) => {
                    compose(&Formula::forall(&xi2, ax.clone()), congruence(&xi2, bx, q.clone()), sp.clone())
                }
                None => sp.clone(),
            };
            Ok(S1(x.clone(), xi2, total))
        }
        (S2(xi, b, c, p, sp), Term::Abs(y, w)) => {
            let (xi2, ren) = rename_binders(xi, clash, fresh);
            let (b2, c2) = (b.apply(&ren), c.apply(&ren));
            let p2 = subst_d(p, c, &ren, &BTreeSet::new(), fresh)?;
            let mut inner = changes.clone();
            inner.remove(y);
            let p3 = strengthen_ctx(&p2, &old.extend(y, b2.clone()), &new.extend(y, b2.clone()), w, &c2, &inner, fresh)?;
            Ok(S2(xi2, b2, c2, Box::new(p3), sp.clone()))
        }
        (S3(xi, b, c, p, q, sp), Term::App(u, v)) => {
            let (xi2, ren) = rename_binders(xi, clash, fresh);
            let (b2, c2) = (b.apply(&ren), c.apply(&ren));
            let arrow = Formula::imp(b.clone(), c.clone());
            let p2 = subst_d(p, &arrow, &ren, &BTreeSet::new(), fresh)?;
            let q2 = subst_d(q, b, &ren, &BTreeSet::new(), fresh)?;
            let p3 = strengthen_ctx(&p2, old, new, u, &Formula::imp(b2.clone(), c2.clone()), changes, fresh)?;
            let q3 = strengthen_ctx(&q2, old, new, v, &b2, changes, fresh)?;
            Ok(S3(xi2, b2, c2, Box::new(p3), Box::new(q3), sp.clone()))
        }
        _ => {
            let _ = a;
            terr(format!("{} node does not match the subject {t}", d.label()))
        }
    }
}

pub(crate) fn strengthen_with(
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    changes: &ContextProofs,
    goal: SubProof,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    let mut new = ctx.clone();
    for (x, (bx, q)) in changes {
        fresh.formula(bx).subproof(q);
        if ctx.contains(x) {
            new = new.extend(x, bx.clone());
        }
    }
    fresh.subproof(&goal);
    let d1 = strengthen_ctx(d, ctx, &new, t, a, changes, fresh)?;
    retarget(&d1, &new, t, a, &[], goal)
}

/// From `Γ ⊢ t : A`, proofs `B_x ⊆ Γ(x)` and `A ⊆ B`, a derivation of
/// `Γ' ⊢ t : B` where `Γ'` binds each changed `x` to `B_x`.
pub fn strengthen(
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    changes: &ContextProofs,
    goal: SubProof,
) -> Result<Derivation, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(ctx).formula(a);
    strengthen_with(d, ctx, t, a, changes, goal, &mut fresh)
}

struct CutArgs<'a> {
    x: &'a str,
    v: &'a Term,
    fv_v: BTreeSet<String>,
    b: &'a Formula,
}

/// `gamma` is the context of the substituted term, `ctx_u` that of `u`
/// (so `ctx_u(x) = b`).
#[allow(clippy::too_many_arguments)]
fn cut_rec(
    d: &Derivation,
    ctx_u: &Context,
    gamma: &Context,
    u: &Term,
    _a: &Formula,
    args: &CutArgs<'_>,
    dv: &Derivation,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    use Derivation::*;
    if !u.is_free(args.x) {
        return Ok(d.clone());
    }
    match (d, u) {
        (S1(_, xi, sp), Term::Var(_)) => {
            let fv = gamma.free_vars();
            let (xi2, _) = rename_binders(xi, |n| fv.contains(n), fresh);
            retarget(dv, gamma, args.v, args.b, &xi2, sp.clone())
        }
        (S2(xi, b1, c1, p, sp), Term::Abs(y, w)) => {
            let inner_u = ctx_u.extend(y, b1.clone());
            let p2 = match binder_rename(y, w, args.x, &args.fv_v) {
                Some(y2) => {
                    fresh.names([y2.clone()]);
                    // Rename the binder by a cut with the variable y2.
                    let both = ctx_u.extend(&y2, b1.clone()).extend(y, b1.clone());
                    let pw = weaken_with(p, c1, b1, fresh)?;
                    let var = Term::var(y2.clone());
                    let ren = CutArgs { x: y, v: &var, fv_v: BTreeSet::from([y2.clone()]), b: b1 };
                    let pr = cut_rec(&pw, &both, &ctx_u.extend(&y2, b1.clone()), w, c1, &ren, &S1(y2.clone(), vec![], SubProof::Ax), fresh)?;
                    let w2 = w.substitute(y, &var);
                    let dv2 = weaken_with(dv, args.b, b1, fresh)?;
                    let ctx2 = ctx_u.extend(&y2, b1.clone());
                    let gamma2 = gamma.extend(&y2, b1.clone());
                    let inner = cut_rec(&pr, &ctx2, &gamma2, &w2, c1, args, &dv2, fresh)?;
                    return Ok(S2(xi.clone(), b1.clone(), c1.clone(), Box::new(inner), sp.clone()));
                }
                None => {
                    let dv2 = weaken_with(dv, args.b, b1, fresh)?;
                    cut_rec(p, &inner_u, &gamma.extend(y, b1.clone()), w, c1, args, &dv2, fresh)?
                }
            };
            Ok(S2(xi.clone(), b1.clone(), c1.clone(), Box::new(p2), sp.clone()))
        }
        (S3(xi, b1, c1, p, q, sp), Term::App(f, g)) => {
            let p2 = cut_rec(p, ctx_u, gamma, f, &Formula::imp(b1.clone(), c1.clone()), args, dv, fresh)?;
            let q2 = cut_rec(q, ctx_u, gamma, g, b1, args, dv, fresh)?;
            Ok(S3(xi.clone(), b1.clone(), c1.clone(), Box::new(p2), Box::new(q2), sp.clone()))
        }
        _ => terr(format!("{} node does not match the subject {u}", d.label())),
    }
}

/// From `Γ, x : B ⊢ u : A` and `Γ ⊢ v : B`, a derivation of
/// `Γ ⊢ u[v/x] : A`; the subject is exactly `u.substitute(x, v)`.
#[allow(clippy::too_many_arguments)]
pub fn cut(
    du: &Derivation,
    gamma: &Context,
    x: &str,
    b: &Formula,
    u: &Term,
    a: &Formula,
    v: &Term,
    dv: &Derivation,
) -> Result<Derivation, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(du).derivation(dv).context(gamma).formula(a).formula(b);
    cut_with(du, gamma, x, b, u, a, v, dv, &mut fresh)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn cut_with(
    du: &Derivation,
    gamma: &Context,
    x: &str,
    b: &Formula,
    u: &Term,
    a: &Formula,
    v: &Term,
    dv: &Derivation,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    let ctx_u = gamma.extend(x, b.clone());
    // A shadowed binding of x in Γ must not capture generalized variables.
    let du = match gamma.get(x) {
        Some(old) => weaken_with(du, a, old, fresh)?,
        None => du.clone(),
    };
    let args = CutArgs { x, v, fv_v: v.free_vars(), b };
    cut_rec(&du, &ctx_u, gamma, u, a, &args, dv, fresh)
}

/// Result of opening `∀ξ'(A → B)`: a derivation of `Γ, x : A ⊢ u : B`
/// whose opened names are fresh.
#[derive(Clone, Debug)]
pub struct Opened {
    pub derivation: Derivation,
    pub binders: Vec<Binder>,
    pub arg: Formula,
    pub result: Formula,
}

struct L17<'a> {
    eqs: &'a EquationSystem,
    gamma: &'a Context,
    x: &'a str,
    u: &'a Term,
}

impl L17<'_> {
    /// `d : Γ, x : C ⊢ u : D`, `sp : ∀ξ(C → D) ⊆ target`.
    #[allow(clippy::too_many_arguments)]
    fn open(
        &self,
        d: &Derivation,
        xi: &[Binder],
        c: &Formula,
        dd: &Formula,
        sp: &SubProof,
        target: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Opened, TransformError> {
        let ctx = self.gamma.extend(self.x, c.clone());
        let premise = Formula::forall(xi, Formula::imp(c.clone(), dd.clone()));
        match sp {
            SubProof::Ax => {
                let (xi2, ren) = rename_binders(xi, |_| true, fresh);
                Ok(Opened {
                    derivation: subst_d(d, dd, &ren, &BTreeSet::new(), fresh)?,
                    binders: xi2,
                    arg: c.apply(&ren),
                    result: dd.apply(&ren),
                })
            }
            SubProof::Mono(q1, q2) => {
                if !xi.is_empty() {
                    return terr("monotonicity applied to a quantified formula");
                }
                let Some((a, b)) = target.as_imp() else { return terr(format!("{target} is not an implication")) };
                let changes = ContextProofs::from([(self.x.to_string(), (a.clone(), (**q1).clone()))]);
                let out = strengthen_with(d, &ctx, self.u, dd, &changes, (**q2).clone(), fresh)?;
                Ok(Opened { derivation: out, binders: vec![], arg: a.clone(), result: b.clone() })
            }
            SubProof::Dist(zeta) => {
                if zeta.len() != xi.len() {
                    return terr("distribution over a different number of quantifiers");
                }
                let a = Formula::forall(xi, c.clone());
                let b = Formula::forall(xi, dd.clone());
                let changes = ContextProofs::from([(self.x.to_string(), (a.clone(), elim_chain(xi)))]);
                let d1 = strengthen_with(d, &ctx, self.u, dd, &changes, SubProof::Ax, fresh)?;
                let ctx_a = self.gamma.extend(self.x, a.clone());
                let out = retarget(&d1, &ctx_a, self.u, dd, xi, SubProof::Ax)?;
                Ok(Opened { derivation: out, binders: vec![], arg: a, result: b })
            }
            SubProof::ForallIntro(zeta, q) => {
                let Some((z2, body)) = target.as_forall() else { return terr(format!("{target} is not quantified")) };
                let zf = fresh.binder(zeta);
                let q2 = substitute_subproof(q, &Substitution::rename(zeta, zf.name()));
                let t2 = body.apply(&Substitution::rename(&z2, zf.name()));
                let mut o = self.open(d, xi, c, dd, &q2, &t2, fresh)?;
                o.binders.insert(0, zf);
                Ok(o)
            }
            SubProof::ForallElim(inst, q) => {
                let mid = synth_subproof(self.eqs, q, &premise).map_err(|e| TransformError(e.to_string()))?;
                let o = self.open(d, xi, c, dd, q, &mid, fresh)?;
                let Some((s, rest)) = o.binders.split_first() else {
                    return terr("instantiation of an unquantified formula");
                };
                let sigma = inst.substitution_for(s);
                fresh.subst(&sigma);
                Ok(Opened {
                    derivation: subst_d(&o.derivation, &o.result, &sigma, &BTreeSet::new(), fresh)?,
                    binders: rest.to_vec(),
                    arg: o.arg.apply(&sigma),
                    result: o.result.apply(&sigma),
                })
            }
            SubProof::Trans(m, q1, q2) => {
                let o = self.open(d, xi, c, dd, q1, m, fresh)?;
                self.open(&o.derivation, &o.binders, &o.arg, &o.result, q2, target, fresh)
            }
            SubProof::EqStep(data, q) => {
                let before = data.premise();
                let o = self.open(d, xi, c, dd, q, &before, fresh)?;
                if before.alpha_eq(target) {
                    return Ok(o);
                }
                let Some((zs, body)) = data.template.strip_n(o.binders.len()) else {
                    return terr("equational template does not match the opened formula");
                };
                let mut ren = Substitution::default();
                for (z, b) in zs.iter().zip(&o.binders) {
                    add_rename(&mut ren, z, b.name());
                }
                let body = body.apply(&ren);
                let Some((tc, tm)) = body.as_imp() else { return terr("equational template is not an implication") };
                let arg = tc.subst_fo(&data.hole, &data.v);
                let result = tm.subst_fo(&data.hole, &data.v);
                let back = EqData {
                    template: tc.clone(),
                    hole: data.hole.clone(),
                    u: data.v.clone(),
                    v: data.u.clone(),
                    orientation: data.orientation.flip(),
                };
                let fwd = EqData { template: tm.clone(), ..data.clone() };
                let ctx_e = self.gamma.extend(self.x, o.arg.clone());
                let changes = ContextProofs::from([(self.x.to_string(), (arg.clone(), SubProof::eq(back, SubProof::Ax)))]);
                let goal = SubProof::eq(fwd, SubProof::Ax);
                let out = strengthen_with(&o.derivation, &ctx_e, self.u, &o.result, &changes, goal, fresh)?;
                Ok(Opened { derivation: out, binders: o.binders, arg, result })
            }
        }
    }
}

/// From `Γ, x : C ⊢ u : D` and `∀ξ(C → D) ⊆ T` with `ξ` not free in `Γ`,
/// opens `T` as `∀ξ'(A → B)` and derives `Γ, x : A ⊢ u : B`.
#[allow(clippy::too_many_arguments)]
pub fn lemma17(
    eqs: &EquationSystem,
    d: &Derivation,
    gamma: &Context,
    x: &str,
    u: &Term,
    xi: &[Binder],
    c: &Formula,
    dd: &Formula,
    sp: &SubProof,
    target: &Formula,
) -> Result<Opened, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(gamma).formula(c).formula(dd).subproof(sp).formula(target);
    fresh.names(xi.iter().map(|b| b.name().to_string()));
    L17 { eqs, gamma, x, u }.open(d, xi, c, dd, sp, target, &mut fresh)
}

pub(crate) fn lemma18_with(
    eqs: &EquationSystem,
    d: &Derivation,
    gamma: &Context,
    t: &Term,
    a: &Formula,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    let (Derivation::S2(xi, c, dd, p, sp), Term::Abs(x, u)) = (d, t) else {
        return terr("expected an S2 derivation of an abstraction");
    };
    fresh.derivation(d).context(gamma).formula(a);
    fresh.names(xi.iter().map(|b| b.name().to_string()));
    let o = L17 { eqs, gamma, x, u }.open(p, xi, c, dd, sp, a, fresh)?;
    if !o.binders.is_empty() {
        return terr(format!("{a} is not an implication"));
    }
    Ok(o.derivation)
}

/// From `Γ ⊢ λx u : A → B`, a derivation of `Γ, x : A ⊢ u : B`.
pub fn lemma18(
    eqs: &EquationSystem,
    d: &Derivation,
    gamma: &Context,
    t: &Term,
    a: &Formula,
) -> Result<Derivation, TransformError> {
    lemma18_with(eqs, d, gamma, t, a, &mut Fresh::new())
}

struct Reducer<'a> {
    eqs: &'a EquationSystem,
    kind: ReductionKind,
}

impl Reducer<'_> {
    fn at(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        a: &Formula,
        path: &Path,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        use Derivation::*;
        let Some((step, rest)) = path.split_first() else {
            return match self.kind {
                ReductionKind::Beta => self.beta_root(d, ctx, t, a, fresh),
                ReductionKind::Eta => self.eta_root(d, ctx, t, a, fresh),
            };
        };
        match (step, d, t) {
            (Step::Body, S2(xi, b, c, p, sp), Term::Abs(x, u)) => {
                let p2 = self.at(p, &ctx.extend(x, b.clone()), u, c, &rest, fresh)?;
                Ok(S2(xi.clone(), b.clone(), c.clone(), Box::new(p2), sp.clone()))
            }
            (Step::Fun, S3(xi, b, c, p, q, sp), Term::App(u, _)) => {
                let p2 = self.at(p, ctx, u, &Formula::imp(b.clone(), c.clone()), &rest, fresh)?;
                Ok(S3(xi.clone(), b.clone(), c.clone(), Box::new(p2), q.clone(), sp.clone()))
            }
            (Step::Arg, S3(xi, b, c, p, q, sp), Term::App(_, v)) => {
                let q2 = self.at(q, ctx, v, b, &rest, fresh)?;
                Ok(S3(xi.clone(), b.clone(), c.clone(), p.clone(), Box::new(q2), sp.clone()))
            }
            _ => terr(format!("path step {step:?} does not match the {} node for {t}", d.label())),
        }
    }

    fn beta_root(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        _a: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        let (Derivation::S3(xi, b, c, d1, d2, sp), Term::App(f, v)) = (d, t) else {
            return terr(format!("{t} is not a β-redex typed by S3"));
        };
        let Term::Abs(x, w) = &**f else { return terr(format!("{t} is not a β-redex")) };
        let body = lemma18_with(self.eqs, d1, ctx, f, &Formula::imp(b.clone(), c.clone()), fresh)?;
        let reduct = cut_with(&body, ctx, x, b, w, c, v, d2, fresh)?;
        retarget(&reduct, ctx, &w.substitute(x, v), c, xi, sp.clone())
    }

    fn eta_root(
        &self,
        d: &Derivation,
        ctx: &Context,
        t: &Term,
        a: &Formula,
        fresh: &mut Fresh,
    ) -> Result<Derivation, TransformError> {
        // A shadowed binding of the bound variable must not capture
        // generalized variables once the abstraction is gone.
        let d = match t {
            Term::Abs(x, _) if ctx.contains(x) => weaken_with(d, a, ctx.get(x).unwrap(), fresh)?,
            _ => d.clone(),
        };
        let (Derivation::S2(xi, b, c, inner, sp), Term::Abs(x, body)) = (&d, t) else {
            return terr(format!("{t} is not an η-redex typed by S2"));
        };
        let Term::App(f, arg) = &**body else { return terr(format!("{t} is not an η-redex")) };
        if !matches!(&**arg, Term::Var(y) if y == x) || f.is_free(x) {
            return terr(format!("{t} is not an η-redex"));
        }
        let Derivation::S3(xi1, e, ff, d1, d2, sp1) = &**inner else {
            return terr("expected S3 under the abstraction");
        };
        let Derivation::S1(_, xi2, sp2) = &**d2 else { return terr("expected S1 for the bound variable") };
        // B ⊆ ∀ξ'E
        let q1 = intro_chain(
            xi1,
            compose(&Formula::forall(xi2, b.clone()), intro_chain(xi2, SubProof::Ax), sp2.clone()),
        );
        let dist_to = Formula::imp(Formula::forall(xi1, e.clone()), Formula::forall(xi1, ff.clone()));
        let k = compose(&dist_to, SubProof::Dist(xi1.clone()), SubProof::mono(q1, sp1.clone()));
        let head = Formula::forall(xi1, Formula::imp(e.clone(), ff.clone()));
        let total = compose(&Formula::forall(xi, Formula::imp(b.clone(), c.clone())), congruence(xi, &head, k), sp.clone());
        let mut gens = xi.clone();
        gens.extend(xi1.iter().cloned());
        retarget(d1, ctx, f, &Formula::imp(e.clone(), ff.clone()), &gens, total)
    }
}

/// From an AF2S derivation of `Γ ⊢ t : A` and a redex of `t` at `path`,
/// a derivation of `Γ ⊢ t' : A` for the one-step reduct `t'`.
pub fn subject_reduce(
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    kind: ReductionKind,
    path: &Path,
) -> Result<Derivation, TransformError> {
    let mut fresh = Fresh::new();
    fresh.derivation(d).context(ctx).formula(a);
    subject_reduce_with(eqs, d, ctx, t, a, kind, path, &mut fresh)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn subject_reduce_with(
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    kind: ReductionKind,
    path: &Path,
    fresh: &mut Fresh,
) -> Result<Derivation, TransformError> {
    let rk = match kind {
        ReductionKind::Beta => crate::lambda::RedexKind::Beta,
        ReductionKind::Eta => crate::lambda::RedexKind::Eta,
    };
    if crate::lambda::contract_at(t, path, rk).is_none() {
        return terr(format!("no {kind:?} redex at {path} in {t}"));
    }
    Reducer { eqs, kind }.at(d, ctx, t, a, path, fresh)
}

fn is_sub_style(d: &Derivation) -> bool {
    matches!(d, Derivation::Sub(..) | Derivation::R5(..) | Derivation::R7(..) | Derivation::R8(..))
}

fn is_gen(d: &Derivation) -> bool {
    matches!(d, Derivation::R4(..) | Derivation::R6(..))
}

/// Premise formula of a single-premise rule other than (2).
pub(crate) fn chain_premise(d: &Derivation, a: &Formula) -> Result<Formula, TransformError> {
    match d {
        Derivation::R4(x, _) | Derivation::R6(x, _) => Ok(gen_premise(a, x)?.1),
        Derivation::R5(p, ..) | Derivation::R7(p, ..) | Derivation::Sub(p, ..) => Ok(p.clone()),
        Derivation::R8(r, _) => Ok(eq_premise(r)),
        Derivation::Eta(..) => Ok(a.clone()),
        _ => terr(format!("{} is not a single-premise rule", d.label())),
    }
}

/// Containment proof equivalent to one subsumption-style node.
pub(crate) fn node_subproof(eqs: &EquationSystem, d: &Derivation) -> SubProof {
    match d {
        Derivation::R5(_, u, _) => SubProof::elim(Instance::Term(u.clone()), SubProof::Ax),
        Derivation::R7(_, g, _) => SubProof::elim(Instance::Formula(g.clone()), SubProof::Ax),
        Derivation::R8(r, _) => SubProof::eq(
            EqData {
                template: r.template.clone(),
                hole: r.var.clone(),
                u: r.u.clone(),
                v: r.v.clone(),
                orientation: orientation_of(eqs, &r.u, &r.v),
            },
            SubProof::Ax,
        ),
        Derivation::Sub(_, sp, _) => sp.clone(),
        _ => SubProof::Ax,
    }
}

struct Normalizer<'a> {
    eqs: &'a EquationSystem,
}

impl Normalizer<'_> {
    fn run(&self, d: &Derivation, ctx: &Context, t: &Term, a: &Formula) -> Result<Derivation, TransformError> {
        use Derivation::*;
        // Collect the chain of single-premise non-structural nodes.
        let mut chain: Vec<(&Derivation, Formula)> = Vec::new();
        let mut cur = d;
        let mut conc = a.clone();
        while is_sub_style(cur) || is_gen(cur) {
            let prem = chain_premise(cur, &conc)?;
            chain.push((cur, conc));
            conc = prem;
            cur = cur.children()[0];
        }
        let base = match cur {
            R1 => R1,
            R2(p) => {
                let (Term::Abs(x, u), Some((b, c))) = (t, conc.as_imp()) else {
                    return terr("malformed (2) node");
                };
                R2(Box::new(self.run(p, &ctx.extend(x, b.clone()), u, c)?))
            }
            R3(b, p, q) => {
                let Term::App(u, v) = t else { return terr("malformed (3) node") };
                R3(
                    b.clone(),
                    Box::new(self.run(p, ctx, u, &Formula::imp(b.clone(), conc.clone()))?),
                    Box::new(self.run(q, ctx, v, b)?),
                )
            }
            Eta(s, path, p) => Eta(s.clone(), path.clone(), Box::new(self.run(p, ctx, s, &conc)?)),
            other => return terr(format!("{} nodes cannot be normalized", other.label())),
        };
        // Already generalizations followed by at most one subsumption.
        let gens_below = chain.iter().skip(1).all(|(n, _)| is_gen(n));
        if chain.is_empty() || gens_below {
            return Ok(rebuild_same(&chain, base));
        }
        let a0 = conc;
        let mut gens: Vec<Binder> = Vec::new();
        let mut proof = SubProof::Ax;
        for (node, node_conc) in chain.iter().rev() {
            let prem = chain_premise(node, node_conc)?;
            if is_gen(node) {
                let x = match node {
                    R4(x, _) | R6(x, _) => x,
                    _ => unreachable!(),
                };
                let (gb, _) = gen_premise(node_conc, x)?;
                proof = congruence(std::slice::from_ref(&gb), &Formula::forall(&gens, a0.clone()), proof);
                gens.insert(0, gb);
            } else {
                proof = compose(&prem, proof, node_subproof(self.eqs, node));
            }
        }
        let mut out = base;
        for b in gens.iter().rev() {
            out = match b {
                Binder::Fo(x) => R4(x.clone(), Box::new(out)),
                Binder::So(x, _) => R6(x.clone(), Box::new(out)),
            };
        }
        if !matches!(proof, SubProof::Ax) {
            out = Sub(Formula::forall(&gens, a0), proof, Box::new(out));
        }
        Ok(out)
    }
}

/// The chain with its structural base replaced.
fn rebuild_same(chain: &[(&Derivation, Formula)], base: Derivation) -> Derivation {
    chain.iter().rev().fold(base, |inner, (node, _)| {
        let inner = Box::new(inner);
        match (*node).clone() {
            Derivation::R4(x, _) => Derivation::R4(x, inner),
            Derivation::R5(p, u, _) => Derivation::R5(p, u, inner),
            Derivation::R6(x, _) => Derivation::R6(x, inner),
            Derivation::R7(p, g, _) => Derivation::R7(p, g, inner),
            Derivation::R8(r, _) => Derivation::R8(r, inner),
            Derivation::Sub(p, sp, _) => Derivation::Sub(p, sp, inner),
            other => other,
        }
    })
}

/// Permutes every run of subsumption-style nodes (⊆, 5, 7, 8) and
/// generalizations (4, 6) into generalizations followed by one ⊆ node.
pub fn normalize_derivation(
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
) -> Result<Derivation, TransformError> {
    Normalizer { eqs }.run(d, ctx, t, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Equation, SoInst};
    use crate::syntax::parse_fo_term;
    use crate::typing::tests::{ctx, d, f, none, sig, t, SEC3};
    use crate::typing::{check_derivation, System};

    fn ok_s(eqs: &EquationSystem, dd: &Derivation, c: &Context, tt: &Term, a: &Formula) {
        if let Err(e) = check_derivation(System::Af2S, eqs, dd, c, tt, a) {
            panic!("{e}\n{dd}");
        }
    }

    fn eadd() -> EquationSystem {
        let tt = |s: &str| parse_fo_term(s, &sig()).unwrap();
        EquationSystem::new(vec![Equation::new(tt("add(0, y)"), tt("y"))])
    }

    /// λxλy.(x)y at the motivating type, built by hand.
    pub(crate) fn s_sec3_expanded() -> Derivation {
        d("(s2 () {!X. X -> X -> X} {(!X. X) -> !X. X -> X}
             (s2 () {!X. X} {!X. X -> X}
               (s3 (X) {X} {X -> X} (s1 x () (forall-elim {X} (ax))) (s1 y () (forall-elim {X} (ax))) (ax))
               (ax))
             (ax))")
    }

    #[test]
    fn expanded_derivation_checks() {
        ok_s(&none(), &s_sec3_expanded(), &Context::new(), &t("\\x y. x y"), &f(SEC3));
    }

    #[test]
    fn first_order_substitution() {
        let dd = d("(s1 x () (ax))");
        let sigma = Substitution::fo("y", parse_fo_term("s(0)", &sig()).unwrap());
        let out = substitute_derivation(&dd, &ctx("x : N(y)"), &f("N(y)"), &sigma).unwrap();
        assert_eq!(out, dd);
        ok_s(&none(), &out, &ctx("x : N(s(0))"), &t("x"), &f("N(s(0))"));
        let same = substitute_derivation(&dd, &ctx("x : N(y)"), &f("N(y)"), &Substitution::default()).unwrap();
        assert_eq!(same, dd);
    }

    #[test]
    fn second_order_substitution_keeps_skeleton() {
        // x : Y ⊢ λz. x : ∀X(X → Y), generalizing over X.
        let dd = d("(s2 (X) {X} {Y} (s1 x () (ax)) (ax))");
        let c = ctx("x : Y");
        ok_s(&none(), &dd, &c, &t("\\z. x"), &f("!X. X -> Y"));
        let g = SoInst { params: vec![], body: f("!Z. X -> Z") };
        let sigma = Substitution::so("Y", g);
        let out = substitute_derivation(&dd, &c, &f("!X. X -> Y"), &sigma).unwrap();
        assert_eq!(out.skeleton(), dd.skeleton());
        ok_s(&none(), &out, &c.apply(&sigma), &t("\\z. x"), &f("!X. X -> Y").apply(&sigma));
    }

    #[test]
    fn strengthen_goal_and_context() {
        let dd = d("(s1 x () (ax))");
        let c = ctx("x : !X. X -> X -> X");
        let all = ContextProofs::new();
        let same = strengthen(&dd, &c, &t("x"), &f("!X. X -> X -> X"), &all, SubProof::Ax).unwrap();
        ok_s(&none(), &same, &c, &t("x"), &f("!X. X -> X -> X"));
        let dist = SubProof::Dist(vec![Binder::So("X".into(), 0)]);
        let out = strengthen(&dd, &c, &t("x"), &f("!X. X -> X -> X"), &all, dist).unwrap();
        ok_s(&none(), &out, &c, &t("x"), &f("(!X. X) -> !X. X -> X"));

        let c = ctx("x : P(c)");
        let changes = ContextProofs::from([("x".to_string(), (f("!X. X"), d_sp("(forall-elim {P(c)} (ax))")))]);
        let out = strengthen(&dd, &c, &t("x"), &f("P(c)"), &changes, SubProof::Ax).unwrap();
        ok_s(&none(), &out, &ctx("x : !X. X"), &t("x"), &f("P(c)"));
    }

    fn d_sp(s: &str) -> SubProof {
        crate::subtyping::parse_subproof(&crate::syntax::parse_sexpr(s).unwrap(), &sig()).unwrap()
    }

    #[test]
    fn cut_cases() {
        let gamma = ctx("v : P(c)");
        let dv = d("(s1 v () (ax))");
        let b = f("P(c)");
        // u = x
        let out = cut(&d("(s1 x () (ax))"), &gamma, "x", &b, &t("x"), &b, &t("v"), &dv).unwrap();
        ok_s(&none(), &out, &gamma, &t("v"), &b);
        // x not free in u
        let du = d("(s1 v () (ax))");
        let out = cut(&du, &gamma, "x", &b, &t("v"), &b, &t("v"), &dv).unwrap();
        assert_eq!(out, du);
        // u = (x) w with w = v, x : P(c) → P(c)
        let gamma = ctx("v : P(c), g : P(c) -> P(c)");
        let du = d("(s3 () {P(c)} {P(c)} (s1 x () (ax)) (s1 v () (ax)) (ax))");
        let dg = d("(s1 g () (ax))");
        let out = cut(&du, &gamma, "x", &f("P(c) -> P(c)"), &t("x v"), &b, &t("g"), &dg).unwrap();
        ok_s(&none(), &out, &gamma, &t("g v"), &b);
    }

    #[test]
    fn cut_renames_capturing_binder() {
        // x : P(c) ⊢ λy. x : ∀X(X → P(c)), substituting y for x.
        let gamma = ctx("y : P(c)");
        let du = d("(s2 (X) {X} {P(c)} (s1 x () (ax)) (ax))");
        let u = t("\\y. x");
        let out = cut(&du, &gamma, "x", &f("P(c)"), &u, &f("!X. X -> P(c)"), &t("y"), &d("(s1 y () (ax))")).unwrap();
        let reduct = u.substitute("x", &t("y"));
        assert!(!reduct.alpha_eq(&t("\\y. y")));
        ok_s(&none(), &out, &gamma, &reduct, &f("!X. X -> P(c)"));
    }

    #[test]
    fn lemma18_cases() {
        let a = f("P(c) -> P(c)");
        let id = d("(s2 () {P(c)} {P(c)} (s1 x () (ax)) (ax))");
        let out = lemma18(&none(), &id, &Context::new(), &t("\\x. x"), &a).unwrap();
        ok_s(&none(), &out, &ctx("x : P(c)"), &t("x"), &f("P(c)"));

        let poly = d("(s2 (X) {X} {X} (s1 x () (ax)) (forall-elim {P(c)} (ax)))");
        let out = lemma18(&none(), &poly, &Context::new(), &t("\\x. x"), &a).unwrap();
        ok_s(&none(), &out, &ctx("x : P(c)"), &t("x"), &f("P(c)"));

        let dist = d("(s2 (X) {X} {X} (s1 x () (ax)) (dist X))");
        let out = lemma18(&none(), &dist, &Context::new(), &t("\\x. x"), &f("(!X. X) -> !X. X")).unwrap();
        ok_s(&none(), &out, &ctx("x : !X. X"), &t("x"), &f("!X. X"));

        let mono = d("(s2 () {P(c)} {P(c)} (s1 x () (ax)) (mono (forall-elim {P(c)} (ax)) (ax)))");
        let out = lemma18(&none(), &mono, &Context::new(), &t("\\x. x"), &f("(!X. X) -> P(c)")).unwrap();
        ok_s(&none(), &out, &ctx("x : !X. X"), &t("x"), &f("P(c)"));

        let e = eadd();
        let eq = d("(s2 () {N(add(0, 0))} {N(add(0, 0))} (s1 x () (ax)) (eq {N(h) -> N(h)} h {add(0, 0)} {0} fwd (ax)))");
        ok_s(&e, &eq, &Context::new(), &t("\\x. x"), &f("N(0) -> N(0)"));
        let out = lemma18(&e, &eq, &Context::new(), &t("\\x. x"), &f("N(0) -> N(0)")).unwrap();
        ok_s(&e, &out, &ctx("x : N(0)"), &t("x"), &f("N(0)"));

        let intro = d("(s2 () {!X. X -> X} {!X. X -> X} (s1 x () (ax))
                          (trans {!Y. (!X. X -> X) -> (!X. X -> X)} (forall-intro Y (ax)) (forall-elim {P(c)} (ax))))");
        let a2 = f("(!X. X -> X) -> !X. X -> X");
        let out = lemma18(&none(), &intro, &Context::new(), &t("\\x. x"), &a2).unwrap();
        ok_s(&none(), &out, &ctx("x : !X. X -> X"), &t("x"), &f("!X. X -> X"));
    }

    #[test]
    fn beta_reduction() {
        let dd = d("(s3 (X) {X -> X} {X -> X}
                      (s2 () {X -> X} {X -> X} (s1 x () (ax)) (ax))
                      (s2 () {X} {X} (s1 y () (ax)) (ax))
                      (ax))");
        let tt = t("(\\x. x) (\\y. y)");
        let a = f("!X. X -> X");
        ok_s(&none(), &dd, &Context::new(), &tt, &a);
        let out = subject_reduce(&none(), &dd, &Context::new(), &tt, &a, ReductionKind::Beta, &Path::root()).unwrap();
        ok_s(&none(), &out, &Context::new(), &t("\\y. y"), &a);
        assert!(subject_reduce(&none(), &dd, &Context::new(), &tt, &a, ReductionKind::Beta, &"@b".parse().unwrap()).is_err());
    }

    #[test]
    fn eta_reduction_motivating_example() {
        let a = f(SEC3);
        let out = subject_reduce(
            &none(),
            &s_sec3_expanded(),
            &Context::new(),
            &t("\\x y. x y"),
            &a,
            ReductionKind::Eta,
            &"@b".parse().unwrap(),
        )
        .unwrap();
        ok_s(&none(), &out, &Context::new(), &t("\\x. x"), &a);
    }

    #[test]
    fn eta_under_binder() {
        let dd = d("(s2 () {!X. X -> X} {!X. X -> X}
                      (s2 (X) {X} {X} (s3 () {X} {X} (s1 z () (forall-elim {X} (ax))) (s1 x () (ax)) (ax)) (ax))
                      (ax))");
        let a = f("(!X. X -> X) -> !X. X -> X");
        let tt = t("\\z x. z x");
        ok_s(&none(), &dd, &Context::new(), &tt, &a);
        let out =
            subject_reduce(&none(), &dd, &Context::new(), &tt, &a, ReductionKind::Eta, &"@b".parse().unwrap()).unwrap();
        ok_s(&none(), &out, &Context::new(), &t("\\z. z"), &a);
    }

    fn ok_sub(dd: &Derivation, c: &Context, tt: &Term, a: &Formula) {
        if let Err(e) = check_derivation(System::Af2Sub, &none(), dd, c, tt, a) {
            panic!("{e}\n{dd}");
        }
    }

    fn non_sub(dd: &Derivation) -> usize {
        dd.labels().iter().filter(|l| !matches!(**l, "sub" | "r5" | "r7" | "r8")).count()
    }

    #[test]
    fn normalize_permutes_sub_below_generalization() {
        // y : !Z. Z ⊢ y : ∀X(P(c) → P(c)) by (⊆) then (6).
        let dd = d("(r6 X (sub {!Z. Z} (forall-elim {P(c) -> P(c)} (ax)) (r1)))");
        let c = ctx("y : !Z. Z");
        let (tt, a) = (t("y"), f("!X. P(c) -> P(c)"));
        ok_sub(&dd, &c, &tt, &a);
        let out = normalize_derivation(&none(), &dd, &c, &tt, &a).unwrap();
        ok_sub(&out, &c, &tt, &a);
        assert_eq!(out.labels(), vec!["sub", "r6", "r1"]);
        assert_eq!(non_sub(&out), non_sub(&dd));
    }

    #[test]
    fn normalize_fixed_points_and_fusion() {
        let c = ctx("y : !Z. Z");
        let (tt, a) = (t("y"), f("P(c)"));
        let done = d("(sub {!Z. Z} (forall-elim {P(c)} (ax)) (r1))");
        assert_eq!(normalize_derivation(&none(), &done, &c, &tt, &a).unwrap(), done);
        let two = d("(sub {!Z. Z} (forall-elim {P(c)} (ax)) (sub {!Z. Z} (ax) (r1)))");
        ok_sub(&two, &c, &tt, &a);
        let out = normalize_derivation(&none(), &two, &c, &tt, &a).unwrap();
        ok_sub(&out, &c, &tt, &a);
        assert_eq!(out.labels(), vec!["sub", "r1"]);
        let adj = d("(sub {!Z. Z -> Z} (forall-elim {P(c)} (ax)) (sub {!Z. Z} (forall-elim {!Z. Z -> Z} (ax)) (r1)))");
        let a2 = f("P(c) -> P(c)");
        ok_sub(&adj, &c, &tt, &a2);
        let out = normalize_derivation(&none(), &adj, &c, &tt, &a2).unwrap();
        ok_sub(&out, &c, &tt, &a2);
        assert!(matches!(out, Derivation::Sub(_, SubProof::Trans(..), _)));
    }
}
