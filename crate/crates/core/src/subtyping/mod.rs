//! Proof objects for the containment relation `A ⊆ B`, their checker,
//! substitution into proofs and bounded proof search.

mod search;

pub use search::{search_subtype, search_subtype_with, SearchConfig};

use crate::lambda::fresh_name;
use crate::logic::{
    match_term, Binder, EquationSystem, FoTerm, Formula, Instance, Orientation, Signature, Substitution,
};
use crate::syntax::{parse_binders, parse_formula, parse_fo_term, parse_instance, ParseError, SExpr};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Data of an equational step: from `A ⊆ D[u/y]` conclude `A ⊆ D[v/y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqData {
    pub template: Formula,
    pub hole: String,
    pub u: FoTerm,
    pub v: FoTerm,
    pub orientation: Orientation,
}

impl EqData {
    pub fn premise(&self) -> Formula {
        self.template.subst_fo(&self.hole, &self.u)
    }

    pub fn conclusion(&self) -> Formula {
        self.template.subst_fo(&self.hole, &self.v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubProof {
    Ax,
    Dist(Vec<Binder>),
    Mono(Box<SubProof>, Box<SubProof>),
    ForallElim(Instance, Box<SubProof>),
    ForallIntro(Binder, Box<SubProof>),
    Trans(Formula, Box<SubProof>, Box<SubProof>),
    EqStep(EqData, Box<SubProof>),
}

/// Position of a node: child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn child(&self, i: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at {path} ({rule}): {reason}")]
pub struct SubCheckError {
    pub path: NodePath,
    pub rule: &'static str,
    pub reason: String,
}

impl SubProof {
    pub fn mono(p: SubProof, q: SubProof) -> SubProof {
        SubProof::Mono(Box::new(p), Box::new(q))
    }

    pub fn elim(inst: Instance, p: SubProof) -> SubProof {
        SubProof::ForallElim(inst, Box::new(p))
    }

    pub fn intro(b: Binder, p: SubProof) -> SubProof {
        SubProof::ForallIntro(b, Box::new(p))
    }

    pub fn trans(middle: Formula, p: SubProof, q: SubProof) -> SubProof {
        SubProof::Trans(middle, Box::new(p), Box::new(q))
    }

    pub fn eq(data: EqData, p: SubProof) -> SubProof {
        SubProof::EqStep(data, Box::new(p))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SubProof::Ax => "ax",
            SubProof::Dist(_) => "dist",
            SubProof::Mono(..) => "mono",
            SubProof::ForallElim(..) => "forall-elim",
            SubProof::ForallIntro(..) => "forall-intro",
            SubProof::Trans(..) => "trans",
            SubProof::EqStep(..) => "eq",
        }
    }

    pub fn children(&self) -> Vec<&SubProof> {
        match self {
            SubProof::Ax | SubProof::Dist(_) => vec![],
            SubProof::Mono(p, q) | SubProof::Trans(_, p, q) => vec![p, q],
            SubProof::ForallElim(_, p) | SubProof::ForallIntro(_, p) | SubProof::EqStep(_, p) => vec![p],
        }
    }

    /// Node labels in preorder.
    pub fn skeleton(&self) -> Vec<&'static str> {
        let mut out = vec![self.label()];
        for c in self.children() {
            out.extend(c.skeleton());
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children().iter().map(|c| c.height()).max().unwrap_or(0)
    }

    /// Every name mentioned by node data.
    pub fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            SubProof::Ax => {}
            SubProof::Dist(bs) => out.extend(bs.iter().map(|b| b.name().to_string())),
            SubProof::Mono(p, q) => {
                p.names(out);
                q.names(out);
            }
            SubProof::ForallElim(inst, p) => {
                match inst {
                    Instance::Term(t) => out.extend(t.free_vars()),
                    Instance::Formula(g) => {
                        g.body.all_names(out);
                        out.extend(g.params.iter().cloned());
                    }
                }
                p.names(out);
            }
            SubProof::ForallIntro(b, p) => {
                out.insert(b.name().to_string());
                p.names(out);
            }
            SubProof::Trans(d, p, q) => {
                d.all_names(out);
                p.names(out);
                q.names(out);
            }
            SubProof::EqStep(data, p) => {
                data.template.all_names(out);
                out.insert(data.hole.clone());
                out.extend(data.u.free_vars());
                out.extend(data.v.free_vars());
                p.names(out);
            }
        }
    }
}

struct Checker<'a> {
    eqs: &'a EquationSystem,
}

fn fail<T>(path: &NodePath, rule: &'static str, reason: impl Into<String>) -> Result<T, SubCheckError> {
    Err(SubCheckError { path: path.clone(), rule, reason: reason.into() })
}

/// Validates `(u, v)` as a particular case of an equation in the stated
/// orientation.
pub fn valid_instance(eqs: &EquationSystem, u: &FoTerm, v: &FoTerm, o: Orientation) -> bool {
    eqs.equations.iter().any(|eq| {
        let (l, r) = match o {
            Orientation::Forward => (&eq.left, &eq.right),
            Orientation::Backward => (&eq.right, &eq.left),
        };
        let Some(mut sigma) = match_term(l, u) else { return false };
        match match_term(r, v) {
            Some(s2) => s2.into_iter().all(|(k, t)| match sigma.get(&k) {
                Some(t0) => *t0 == t,
                None => {
                    sigma.insert(k, t);
                    true
                }
            }),
            None => false,
        }
    })
}

impl Checker<'_> {
    fn synth(&self, a: &Formula, p: &SubProof, path: &NodePath) -> Result<Formula, SubCheckError> {
        match p {
            SubProof::Ax => Ok(a.clone()),
            SubProof::Dist(xi) => dist_conclusion(a, xi).map_err(|r| SubCheckError { path: path.clone(), rule: "dist", reason: r }),
            SubProof::Mono(q, r) if matches!(**q, SubProof::Ax) => {
                let Some((c, d)) = a.as_imp() else {
                    return fail(path, "mono", format!("{a} is not an implication"));
                };
                Ok(Formula::imp(c.clone(), self.synth(d, r, &path.child(1))?))
            }
            SubProof::Mono(..) => {
                fail(path, "mono", "cannot infer the conclusion of a monotonicity step; give it as a trans middle")
            }
            SubProof::ForallElim(inst, q) => {
                let c = self.synth(a, q, &path.child(0))?;
                let Some((b, body)) = c.as_forall() else {
                    return fail(path, "forall-elim", format!("premise conclusion {c} is not quantified"));
                };
                if !inst.fits(&b) {
                    return fail(path, "forall-elim", format!("instance {inst} does not fit the sort of {b}"));
                }
                Ok(body.instantiate(&b, inst))
            }
            SubProof::ForallIntro(xi, q) => {
                if a.is_free(xi.name()) {
                    return fail(path, "forall-intro", format!("{} is free in {a}", xi.name()));
                }
                let d = self.synth(a, q, &path.child(0))?;
                Ok(xi.wrap(d))
            }
            SubProof::Trans(d, q, r) => {
                self.check(a, q, d, &path.child(0))?;
                self.synth(d, r, &path.child(1))
            }
            SubProof::EqStep(data, q) => {
                self.check(a, q, &data.premise(), &path.child(0))?;
                if !valid_instance(self.eqs, &data.u, &data.v, data.orientation) {
                    return fail(path, "eq", format!("{} = {} is not a particular case of an equation", data.u, data.v));
                }
                Ok(data.conclusion())
            }
        }
    }

    fn check(&self, a: &Formula, p: &SubProof, b: &Formula, path: &NodePath) -> Result<(), SubCheckError> {
        match p {
            SubProof::Mono(q, r) => {
                let (Some((c, d)), Some((c2, d2))) = (a.as_imp(), b.as_imp()) else {
                    return fail(path, "mono", format!("{a} and {b} must both be implications"));
                };
                self.check(c2, q, c, &path.child(0))?;
                self.check(d, r, d2, &path.child(1))
            }
            SubProof::ForallIntro(xi, q) => {
                let Some((zeta, body)) = b.as_forall() else {
                    return fail(path, "forall-intro", format!("{b} is not quantified"));
                };
                if !xi.same_sort(&zeta) {
                    return fail(path, "forall-intro", format!("{xi} and {zeta} have different sorts"));
                }
                if a.is_free(xi.name()) {
                    return fail(path, "forall-intro", format!("{} is free in {a}", xi.name()));
                }
                let target = if xi.name() == zeta.name() {
                    body.clone()
                } else {
                    if b.is_free(xi.name()) {
                        return fail(path, "forall-intro", format!("{} is free in {b}", xi.name()));
                    }
                    body.apply(&Substitution::rename(&zeta, xi.name()))
                };
                self.check(a, q, &target, &path.child(0))
            }
            SubProof::Trans(d, q, r) => {
                self.check(a, q, d, &path.child(0))?;
                self.check(d, r, b, &path.child(1))
            }
            _ => {
                let c = self.synth(a, p, path)?;
                if c.alpha_eq(b) {
                    Ok(())
                } else {
                    fail(path, p.label(), format!("concludes {a} ⊆ {c}, expected {b}"))
                }
            }
        }
    }
}

/// `∀ξ(C → D) ⊆ ∀ξC → ∀ξD` for the given sequence.
pub fn dist_conclusion(a: &Formula, xi: &[Binder]) -> Result<Formula, String> {
    let Some((binders, body)) = a.strip_n(xi.len()) else {
        return Err(format!("{a} has fewer than {} quantifiers", xi.len()));
    };
    for (b, x) in binders.iter().zip(xi) {
        if !b.same_sort(x) {
            return Err(format!("quantifier {b} does not have the sort of {x}"));
        }
    }
    let Some((c, d)) = body.as_imp() else {
        return Err(format!("{body} is not an implication"));
    };
    Ok(Formula::imp(Formula::forall(&binders, c.clone()), Formula::forall(&binders, d.clone())))
}

pub fn check_subproof(eqs: &EquationSystem, p: &SubProof, a: &Formula, b: &Formula) -> Result<(), SubCheckError> {
    Checker { eqs }.check(a, p, b, &NodePath::default())
}

/// The conclusion of `p` from `a`, when it can be inferred without an
/// expected right-hand side.
pub fn synth_subproof(eqs: &EquationSystem, p: &SubProof, a: &Formula) -> Result<Formula, SubCheckError> {
    Checker { eqs }.synth(a, p, &NodePath::default())
}

/// The same proof for `A[σ] ⊆ B[σ]`. Generalized variables that clash with
/// σ are renamed; the rule skeleton is unchanged.
pub fn substitute_subproof(p: &SubProof, sigma: &Substitution) -> SubProof {
    let mut avoid = BTreeSet::new();
    p.names(&mut avoid);
    avoid.extend(sigma.domain());
    avoid.extend(sigma.all_range_vars());
    subst_rec(p, sigma, &mut avoid)
}

fn subst_rec(p: &SubProof, sigma: &Substitution, avoid: &mut BTreeSet<String>) -> SubProof {
    if sigma.is_empty() {
        return p.clone();
    }
    match p {
        SubProof::Ax | SubProof::Dist(_) => p.clone(),
        SubProof::Mono(q, r) => SubProof::mono(subst_rec(q, sigma, avoid), subst_rec(r, sigma, avoid)),
        SubProof::ForallElim(inst, q) => SubProof::elim(inst.apply(sigma), subst_rec(q, sigma, avoid)),
        SubProof::ForallIntro(xi, q) => {
            let inner = sigma.without(xi.name());
            if inner.all_range_vars().contains(xi.name()) {
                let fresh = fresh_name(xi.name(), avoid);
                avoid.insert(fresh.clone());
                let mut renaming = inner.clone();
                match xi {
                    Binder::Fo(x) => {
                        renaming.fo.insert(x.clone(), FoTerm::var(&fresh));
                    }
                    Binder::So(..) => {
                        let r = Substitution::rename(xi, &fresh);
                        renaming.so.extend(r.so);
                    }
                }
                SubProof::intro(xi.renamed(fresh), subst_rec(q, &renaming, avoid))
            } else {
                SubProof::intro(xi.clone(), subst_rec(q, &inner, avoid))
            }
        }
        SubProof::Trans(d, q, r) => SubProof::trans(d.apply(sigma), subst_rec(q, sigma, avoid), subst_rec(r, sigma, avoid)),
        SubProof::EqStep(data, q) => {
            let mut template = data.template.clone();
            let mut hole = data.hole.clone();
            if sigma.domain().contains(&hole) || sigma.all_range_vars().contains(&hole) {
                let fresh = fresh_name(&hole, avoid);
                avoid.insert(fresh.clone());
                template = template.subst_fo(&hole, &FoTerm::var(&fresh));
                hole = fresh;
            }
            let data = EqData {
                template: template.apply(sigma),
                hole,
                u: data.u.subst(&sigma.fo),
                v: data.v.subst(&sigma.fo),
                orientation: data.orientation,
            };
            SubProof::eq(data, subst_rec(q, sigma, avoid))
        }
    }
}

/// `∀ξC ⊆ C`, eliminating each quantifier with its own variable.
pub fn elim_chain(xi: &[Binder]) -> SubProof {
    xi.iter().fold(SubProof::Ax, |p, b| SubProof::elim(b.identity_instance(), p))
}

/// `∀ξC ⊆ C[F/ξ]`, instantiating the quantifiers outermost first.
pub fn instantiate_chain(insts: &[Instance]) -> SubProof {
    insts.iter().fold(SubProof::Ax, |p, i| SubProof::elim(i.clone(), p))
}

/// From `p : A ⊆ B` with `ξ` not free in `A`, a proof of `A ⊆ ∀ξB`.
pub fn intro_chain(xi: &[Binder], p: SubProof) -> SubProof {
    xi.iter().rev().fold(p, |q, b| SubProof::intro(b.clone(), q))
}

/// From `q : P ⊆ Q`, a proof of `∀ξP ⊆ ∀ξQ`.
pub fn congruence(xi: &[Binder], p_formula: &Formula, q: SubProof) -> SubProof {
    if xi.is_empty() {
        return q;
    }
    if matches!(q, SubProof::Ax) {
        return SubProof::Ax;
    }
    intro_chain(xi, SubProof::trans(p_formula.clone(), elim_chain(xi), q))
}

/// `p ; q` through the middle formula, dropping trivial halves.
pub fn compose(middle: &Formula, p: SubProof, q: SubProof) -> SubProof {
    match (&p, &q) {
        (SubProof::Ax, _) => q,
        (_, SubProof::Ax) => p,
        _ => SubProof::trans(middle.clone(), p, q),
    }
}

impl fmt::Display for SubProof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubProof::Ax => f.write_str("(ax)"),
            SubProof::Dist(xi) => {
                f.write_str("(dist")?;
                for b in xi {
                    write!(f, " {b}")?;
                }
                f.write_str(")")
            }
            SubProof::Mono(p, q) => write!(f, "(mono {p} {q})"),
            SubProof::ForallElim(i, p) => write!(f, "(forall-elim {{{i}}} {p})"),
            SubProof::ForallIntro(b, p) => write!(f, "(forall-intro {b} {p})"),
            SubProof::Trans(d, p, q) => write!(f, "(trans {{{d}}} {p} {q})"),
            SubProof::EqStep(d, p) => {
                let dir = match d.orientation {
                    Orientation::Forward => "fwd",
                    Orientation::Backward => "bwd",
                };
                write!(f, "(eq {{{}}} {} {{{}}} {{{}}} {dir} {p})", d.template, d.hole, d.u, d.v)
            }
        }
    }
}

fn arity_error(e: &SExpr, head: &str, n: usize, got: usize) -> ParseError {
    e.error(format!("`{head}` expects {n} arguments, got {got}"))
}

pub fn parse_subproof(e: &SExpr, sig: &Signature) -> Result<SubProof, ParseError> {
    let (head, args) = e.head().ok_or_else(|| e.error("expected a proof node `(rule …)`"))?;
    let want = |n: usize| if args.len() == n { Ok(()) } else { Err(arity_error(e, head, n, args.len())) };
    match head {
        "ax" => {
            want(0)?;
            Ok(SubProof::Ax)
        }
        "dist" => {
            let mut xi = Vec::new();
            for a in args {
                xi.extend(a.parse_with(|s| parse_binders(s, sig))?);
            }
            Ok(SubProof::Dist(xi))
        }
        "mono" => {
            want(2)?;
            Ok(SubProof::mono(parse_subproof(&args[0], sig)?, parse_subproof(&args[1], sig)?))
        }
        "forall-elim" => {
            want(2)?;
            let inst = args[0].parse_with(|s| parse_instance(s, sig))?;
            Ok(SubProof::elim(inst, parse_subproof(&args[1], sig)?))
        }
        "forall-intro" => {
            want(2)?;
            let bs = args[0].parse_with(|s| parse_binders(s, sig))?;
            let [b] = <[Binder; 1]>::try_from(bs).map_err(|_| args[0].error("expected one variable"))?;
            Ok(SubProof::intro(b, parse_subproof(&args[1], sig)?))
        }
        "trans" => {
            want(3)?;
            let d = args[0].parse_with(|s| parse_formula(s, sig))?;
            Ok(SubProof::trans(d, parse_subproof(&args[1], sig)?, parse_subproof(&args[2], sig)?))
        }
        "eq" => {
            want(6)?;
            let template = args[0].parse_with(|s| parse_formula(s, sig))?;
            let hole = args[1].text().ok_or_else(|| args[1].error("expected the hole variable"))?.to_string();
            let u = args[2].parse_with(|s| parse_fo_term(s, sig))?;
            let v = args[3].parse_with(|s| parse_fo_term(s, sig))?;
            let orientation = match args[4].text() {
                Some("fwd") => Orientation::Forward,
                Some("bwd") => Orientation::Backward,
                _ => return Err(args[4].error("orientation must be `fwd` or `bwd`")),
            };
            Ok(SubProof::eq(EqData { template, hole, u, v, orientation }, parse_subproof(&args[5], sig)?))
        }
        other => Err(e.error(format!("unknown containment rule `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Equation, SoInst};
    use crate::syntax::parse_sexpr;

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

    fn proof(s: &str) -> SubProof {
        parse_subproof(&parse_sexpr(s).unwrap(), &sig()).unwrap()
    }

    fn e_add() -> EquationSystem {
        let t = |s: &str| parse_fo_term(s, &sig()).unwrap();
        EquationSystem::new(vec![
            Equation::new(t("add(0, y)"), t("y")),
            Equation::new(t("add(s(x), y)"), t("s(add(x, y))")),
        ])
    }

    fn none() -> EquationSystem {
        EquationSystem::default()
    }

    #[test]
    fn ax_and_dist() {
        assert!(check_subproof(&none(), &SubProof::Ax, &f("X -> Y"), &f("X -> Y")).is_ok());
        let p = proof("(dist X)");
        assert!(check_subproof(&none(), &p, &f("!X. X -> X -> X"), &f("(!X. X) -> !X. X -> X")).is_ok());
        assert!(check_subproof(&none(), &p, &f("!X. X -> X -> X"), &f("(!X. X) -> !Y. X -> X")).is_err());
    }

    #[test]
    fn elim_any_instance() {
        let p = proof("(forall-elim {P(c) -> Q(0)} (ax))");
        assert!(check_subproof(&none(), &p, &f("!X. X"), &f("P(c) -> Q(0)")).is_ok());
        let bad = proof("(forall-elim {0} (ax))");
        let err = check_subproof(&none(), &bad, &f("!X. X"), &f("P(0)")).unwrap_err();
        assert_eq!(err.rule, "forall-elim");
    }

    #[test]
    fn equation_step() {
        let p = proof("(eq {N(y)} y {add(0, z)} {z} fwd (ax))");
        assert!(check_subproof(&e_add(), &p, &f("N(add(0, z))"), &f("N(z)")).is_ok());
        let wrong_dir = proof("(eq {N(y)} y {add(0, z)} {z} bwd (ax))");
        assert!(check_subproof(&e_add(), &wrong_dir, &f("N(add(0, z))"), &f("N(z)")).is_err());
        assert!(check_subproof(&none(), &p, &f("N(add(0, z))"), &f("N(z)")).is_err());
    }

    #[test]
    fn intro_side_condition_and_path() {
        let p = proof("(mono (ax) (forall-intro x (ax)))");
        let err = check_subproof(&none(), &p, &f("P(c) -> P(x)"), &f("P(c) -> !x. P(x)")).unwrap_err();
        assert_eq!(err.path.to_string(), "root.1");
        assert_eq!(err.rule, "forall-intro");
        let ok = proof("(forall-intro x (ax))");
        assert!(check_subproof(&none(), &ok, &f("P(c)"), &f("!y. P(c)")).is_ok());
    }

    #[test]
    fn mono_contravariance() {
        let p = proof("(mono (forall-elim {Y} (ax)) (ax))");
        assert!(check_subproof(&none(), &p, &f("Y -> Z"), &f("(!X. X) -> Z")).is_ok());
        assert!(check_subproof(&none(), &p, &f("(!X. X) -> Z"), &f("Y -> Z")).is_err());
    }

    #[test]
    fn derived_rules_five_seven_eight() {
        // (5): ∀x A ⊆ A[u/x]
        let p5 = proof("(forall-elim {s(0)} (ax))");
        assert!(check_subproof(&none(), &p5, &f("!x. N(x)"), &f("N(s(0))")).is_ok());
        // (7): ∀X A ⊆ A[G/X]
        let p7 = proof("(forall-elim {[x] N(x) -> P(x)} (ax))");
        assert!(check_subproof(&none(), &p7, &f("!X. X(0) -> X(s(0))"), &f("(N(0) -> P(0)) -> N(s(0)) -> P(s(0))")).is_ok());
        // (8): A[u/x] ⊆ A[v/x]
        let p8 = proof("(eq {N(x) -> P(x)} x {add(0, 0)} {0} fwd (ax))");
        assert!(check_subproof(&e_add(), &p8, &f("N(add(0, 0)) -> P(add(0, 0))"), &f("N(0) -> P(0)")).is_ok());
    }

    #[test]
    fn combinators_check() {
        let xi = vec![Binder::So("X".into(), 0), Binder::Fo("y".into())];
        let body = f("X -> N(y)");
        let all = Formula::forall(&xi, body.clone());
        assert!(check_subproof(&none(), &elim_chain(&xi), &all, &body).is_ok());
        let p = intro_chain(&xi, elim_chain(&xi));
        assert!(check_subproof(&none(), &p, &all, &all).is_ok());
        let q = proof("(mono (ax) (forall-elim {y} (ax)))");
        let src = f("X -> !z. N(z)");
        let tgt = f("X -> N(y)");
        assert!(check_subproof(&none(), &q, &src, &tgt).is_ok());
        let c = congruence(&xi, &src, q);
        assert!(check_subproof(&none(), &c, &Formula::forall(&xi, src), &Formula::forall(&xi, tgt)).is_ok());
    }

    #[test]
    fn substitution_keeps_skeleton() {
        let p = proof("(dist X)");
        let a = f("!X. X -> N(z)");
        let b = f("(!X. X) -> !X. N(z)");
        assert!(check_subproof(&none(), &p, &a, &b).is_ok());
        let sigma = Substitution::fo("z", parse_fo_term("s(0)", &sig()).unwrap());
        let p2 = substitute_subproof(&p, &sigma);
        assert_eq!(p2.skeleton(), p.skeleton());
        assert!(check_subproof(&none(), &p2, &a.apply(&sigma), &b.apply(&sigma)).is_ok());

        let q = proof("(forall-elim {Y -> Z} (ax))");
        let so = Substitution::so("Y", SoInst::constant(f("!W. W")));
        let q2 = substitute_subproof(&q, &so);
        assert_eq!(q2.skeleton(), q.skeleton());
        assert!(check_subproof(&none(), &q2, &f("!X. X"), &f("Y -> Z").apply(&so)).is_ok());
    }

    #[test]
    fn substitution_renames_generalized_variable() {
        let p = proof("(forall-intro y (ax))");
        let a = f("P(x)");
        let b = f("!y. P(x)");
        assert!(check_subproof(&none(), &p, &a, &b).is_ok());
        let sigma = Substitution::fo("x", FoTerm::var("y"));
        let p2 = substitute_subproof(&p, &sigma);
        assert!(check_subproof(&none(), &p2, &a.apply(&sigma), &b.apply(&sigma)).is_ok());
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "(ax)",
            "(dist X y)",
            "(mono (ax) (forall-elim {s(0)} (ax)))",
            "(trans {X -> X} (forall-intro Y (ax)) (eq {N(y)} y {add(0, z)} {z} fwd (ax)))",
        ] {
            assert_eq!(proof(s).to_string(), s);
        }
    }
}
