//! Typing derivations for AF2, AF2⊆, AF2S and AF2η: the checker, the
//! constructive transformations between them, inversion and bounded search.

mod convert;
mod invert;
mod search;
mod transform;

pub use convert::{convert, eta_expand_witness, EtaWitness};
pub use invert::{invert, GenerationData, SpineStep};
pub use search::{search_typing, TypingLimits};
pub use transform::{
    cut, lemma17, lemma18, normalize_derivation, retarget, strengthen, subject_reduce, substitute_derivation,
    weaken, ContextProofs, Opened, ReductionKind, TransformError,
};

use crate::lambda::{contract_at, Path, RedexKind, Term};
use crate::logic::{
    match_particular_case, Binder, EquationSystem, FoTerm, Formula, Instance, Signature, SoInst, Substitution,
};
use crate::subtyping::{check_subproof, parse_subproof, NodePath, SubProof};
use crate::syntax::{parse_binders, parse_formula, parse_fo_term, parse_instance, parse_path, parse_term, ParseError, SExpr};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum System {
    Af2,
    Af2Sub,
    Af2S,
    Af2Eta,
}

impl System {
    pub const ALL: [System; 4] = [System::Af2, System::Af2Sub, System::Af2S, System::Af2Eta];

    pub fn name(self) -> &'static str {
        match self {
            System::Af2 => "AF2",
            System::Af2Sub => "AF2sub",
            System::Af2S => "AF2S",
            System::Af2Eta => "AF2eta",
        }
    }

    fn allows(self, d: &Derivation) -> bool {
        use Derivation::*;
        match d {
            R1 | R2(_) | R3(..) | R4(..) | R5(..) | R6(..) | R7(..) | R8(..) => self != System::Af2S,
            Sub(..) => self == System::Af2Sub,
            S1(..) | S2(..) | S3(..) => self == System::Af2S,
            Eta(..) => self == System::Af2Eta,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "af2" => Ok(System::Af2),
            "af2sub" | "af2⊆" => Ok(System::Af2Sub),
            "af2s" => Ok(System::Af2S),
            "af2eta" | "af2η" => Ok(System::Af2Eta),
            _ => Err(format!("unknown system `{s}` (expected AF2, AF2sub, AF2S or AF2eta)")),
        }
    }
}

/// Ordered bindings `x : A`; extending with a bound name replaces it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    entries: Vec<(String, Formula)>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(String, Formula)>) -> Result<Self, String> {
        let mut seen = BTreeSet::new();
        for (x, _) in &entries {
            if !seen.insert(x.clone()) {
                return Err(format!("variable {x} bound twice in the context"));
            }
        }
        Ok(Context { entries })
    }

    pub fn parse(src: &str, sig: &Signature) -> Result<Self, ParseError> {
        let entries = crate::syntax::parse_context(src, sig)?;
        Context::from_entries(entries).map_err(|m| ParseError::new(1, 1, m))
    }

    pub fn get(&self, x: &str) -> Option<&Formula> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, a)| a)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.get(x).is_some()
    }

    pub fn extend(&self, x: &str, a: Formula) -> Context {
        let mut entries: Vec<_> = self.entries.iter().filter(|(y, _)| y != x).cloned().collect();
        entries.push((x.to_string(), a));
        Context { entries }
    }

    pub fn remove(&self, x: &str) -> Context {
        Context { entries: self.entries.iter().filter(|(y, _)| y != x).cloned().collect() }
    }

    pub fn entries(&self) -> &[(String, Formula)] {
        &self.entries
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Free variables of the formulas.
    pub fn free_vars(&self) -> BTreeSet<String> {
        self.entries.iter().flat_map(|(_, a)| a.free_vars()).collect()
    }

    pub fn apply(&self, sigma: &Substitution) -> Context {
        Context { entries: self.entries.iter().map(|(x, a)| (x.clone(), a.apply(sigma))).collect() }
    }

    /// Equality as sets of bindings, formulas up to α.
    pub fn same_as(&self, other: &Context) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().all(|(x, a)| other.get(x).is_some_and(|b| a.alpha_eq(b)))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} : {a}")?;
        }
        Ok(())
    }
}

/// Data of rule (8): from `t : T[u/x]` conclude `t : T[v/x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqRule {
    pub template: Formula,
    pub var: String,
    pub u: FoTerm,
    pub v: FoTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// `Γ, x : A ⊢ x : A`
    R1,
    /// `λx t : B → C` from `Γ, x : B ⊢ t : C`.
    R2(Box<Derivation>),
    /// `(u)v : C` from `u : B → C` and `v : B`; holds `B`.
    R3(Formula, Box<Derivation>, Box<Derivation>),
    /// Generalization over a first-order variable.
    R4(String, Box<Derivation>),
    /// `A[u/x]` from the premise formula `∀x A`.
    R5(Formula, FoTerm, Box<Derivation>),
    /// Generalization over a second-order variable.
    R6(String, Box<Derivation>),
    /// `A[G/X]` from the premise formula `∀X A`.
    R7(Formula, SoInst, Box<Derivation>),
    R8(EqRule, Box<Derivation>),
    /// Subsumption from the premise formula through a containment proof.
    Sub(Formula, SubProof, Box<Derivation>),
    /// `x : A` from `x : B ∈ Γ` and `∀ξB ⊆ A`.
    S1(String, Vec<Binder>, SubProof),
    /// `λx u : A` from `Γ, x : B ⊢ u : C` and `∀ξ(B → C) ⊆ A`.
    S2(Vec<Binder>, Formula, Formula, Box<Derivation>, SubProof),
    /// `(u)v : A` from `u : B → C`, `v : B` and `∀ξC ⊆ A`.
    S3(Vec<Binder>, Formula, Formula, Box<Derivation>, Box<Derivation>, SubProof),
    /// `t : A` from `s : A` where `s` η-reduces to `t` at the path.
    Eta(Term, Path, Box<Derivation>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at {path} ({rule}): {reason}")]
pub struct DerivError {
    pub path: NodePath,
    pub rule: &'static str,
    pub reason: String,
}

impl Derivation {
    pub fn label(&self) -> &'static str {
        match self {
            Derivation::R1 => "r1",
            Derivation::R2(_) => "r2",
            Derivation::R3(..) => "r3",
            Derivation::R4(..) => "r4",
            Derivation::R5(..) => "r5",
            Derivation::R6(..) => "r6",
            Derivation::R7(..) => "r7",
            Derivation::R8(..) => "r8",
            Derivation::Sub(..) => "sub",
            Derivation::S1(..) => "s1",
            Derivation::S2(..) => "s2",
            Derivation::S3(..) => "s3",
            Derivation::Eta(..) => "eta",
        }
    }

    pub fn children(&self) -> Vec<&Derivation> {
        match self {
            Derivation::R1 | Derivation::S1(..) => vec![],
            Derivation::R2(d)
            | Derivation::R4(_, d)
            | Derivation::R5(_, _, d)
            | Derivation::R6(_, d)
            | Derivation::R7(_, _, d)
            | Derivation::R8(_, d)
            | Derivation::Sub(_, _, d)
            | Derivation::S2(_, _, _, d, _)
            | Derivation::Eta(_, _, d) => vec![d],
            Derivation::R3(_, a, b) | Derivation::S3(_, _, _, a, b, _) => vec![a, b],
        }
    }

    /// Node labels in preorder, embedded containment proofs included.
    pub fn skeleton(&self) -> Vec<&'static str> {
        let mut out = vec![self.label()];
        if let Some(sp) = self.subproof() {
            out.extend(sp.skeleton());
        }
        for c in self.children() {
            out.extend(c.skeleton());
        }
        out
    }

    pub fn subproof(&self) -> Option<&SubProof> {
        match self {
            Derivation::Sub(_, sp, _) | Derivation::S1(_, _, sp) | Derivation::S2(.., sp) | Derivation::S3(.., sp) => {
                Some(sp)
            }
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Every node label, preorder, without embedded proofs.
    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = vec![self.label()];
        for c in self.children() {
            out.extend(c.labels());
        }
        out
    }

    pub fn count_eta(&self) -> usize {
        self.labels().iter().filter(|l| **l == "eta").count()
    }

    /// Every formula-level name mentioned by node data.
    pub fn names(&self, out: &mut BTreeSet<String>) {
        if let Some(sp) = self.subproof() {
            sp.names(out);
        }
        match self {
            Derivation::R3(b, ..) => b.all_names(out),
            Derivation::R4(x, _) | Derivation::R6(x, _) => {
                out.insert(x.clone());
            }
            Derivation::R5(p, u, _) => {
                p.all_names(out);
                out.extend(u.free_vars());
            }
            Derivation::R7(p, g, _) => {
                p.all_names(out);
                g.body.all_names(out);
                out.extend(g.params.iter().cloned());
            }
            Derivation::R8(r, _) => {
                r.template.all_names(out);
                out.insert(r.var.clone());
                out.extend(r.u.free_vars());
                out.extend(r.v.free_vars());
            }
            Derivation::Sub(a, ..) => a.all_names(out),
            Derivation::S1(_, xi, _) => out.extend(xi.iter().map(|b| b.name().to_string())),
            Derivation::S2(xi, b, c, ..) | Derivation::S3(xi, b, c, ..) => {
                out.extend(xi.iter().map(|b| b.name().to_string()));
                b.all_names(out);
                c.all_names(out);
            }
            _ => {}
        }
        for c in self.children() {
            c.names(out);
        }
    }

    /// Generalized variables and containment proof of an S-rule root.
    pub fn s_tail(&self) -> Option<(&[Binder], &SubProof)> {
        match self {
            Derivation::S1(_, xi, sp) | Derivation::S2(xi, _, _, _, sp) | Derivation::S3(xi, _, _, _, _, sp) => {
                Some((xi, sp))
            }
            _ => None,
        }
    }

    pub fn with_s_tail(&self, xi: Vec<Binder>, sp: SubProof) -> Derivation {
        match self.clone() {
            Derivation::S1(x, _, _) => Derivation::S1(x, xi, sp),
            Derivation::S2(_, b, c, d, _) => Derivation::S2(xi, b, c, d, sp),
            Derivation::S3(_, b, c, d1, d2, _) => Derivation::S3(xi, b, c, d1, d2, sp),
            other => other,
        }
    }
}

/// The formula `∀ξX` that an S-rule feeds into its containment proof.
pub fn s_premise(d: &Derivation, ctx: &Context, t: &Term) -> Option<Formula> {
    match (d, t) {
        (Derivation::S1(_, xi, _), Term::Var(x)) => Some(Formula::forall(xi, ctx.get(x)?.clone())),
        (Derivation::S2(xi, b, c, ..), _) => Some(Formula::forall(xi, Formula::imp(b.clone(), c.clone()))),
        (Derivation::S3(xi, _, c, ..), _) => Some(Formula::forall(xi, c.clone())),
        _ => None,
    }
}

struct Checker<'a> {
    system: System,
    eqs: &'a EquationSystem,
}

fn fail<T>(path: &NodePath, rule: &'static str, reason: impl Into<String>) -> Result<T, DerivError> {
    Err(DerivError { path: path.clone(), rule, reason: reason.into() })
}

fn binders_not_free(xi: &[Binder], ctx: &Context) -> Option<String> {
    let fv = ctx.free_vars();
    xi.iter().find(|b| fv.contains(b.name())).map(|b| b.name().to_string())
}

impl Checker<'_> {
    fn sub(&self, path: &NodePath, rule: &'static str, sp: &SubProof, a: &Formula, b: &Formula) -> Result<(), DerivError> {
        check_subproof(self.eqs, sp, a, b)
            .map_err(|e| DerivError { path: path.clone(), rule, reason: format!("containment proof: {e}") })
    }

    fn check(&self, d: &Derivation, ctx: &Context, t: &Term, a: &Formula, path: &NodePath) -> Result<(), DerivError> {
        let rule = d.label();
        if !self.system.allows(d) {
            return fail(path, rule, format!("rule not available in {}", self.system));
        }
        match d {
            Derivation::R1 => {
                let Term::Var(x) = t else { return fail(path, rule, format!("subject {t} is not a variable")) };
                match ctx.get(x) {
                    Some(b) if b.alpha_eq(a) => Ok(()),
                    Some(b) => fail(path, rule, format!("{x} has type {b} in the context, not {a}")),
                    None => fail(path, rule, format!("{x} is not in the context")),
                }
            }
            Derivation::R2(p) => {
                let Term::Abs(x, u) = t else { return fail(path, rule, format!("subject {t} is not an abstraction")) };
                let Some((b, c)) = a.as_imp() else { return fail(path, rule, format!("{a} is not an implication")) };
                self.check(p, &ctx.extend(x, b.clone()), u, c, &path.child(0))
            }
            Derivation::R3(b, p, q) => {
                let Term::App(u, v) = t else { return fail(path, rule, format!("subject {t} is not an application")) };
                self.check(p, ctx, u, &Formula::imp(b.clone(), a.clone()), &path.child(0))?;
                self.check(q, ctx, v, b, &path.child(1))
            }
            Derivation::R4(x, p) | Derivation::R6(x, p) => {
                let Some((zeta, body)) = a.as_forall() else { return fail(path, rule, format!("{a} is not quantified")) };
                let first_order = matches!(d, Derivation::R4(..));
                if first_order != matches!(zeta, Binder::Fo(_)) {
                    return fail(path, rule, format!("{zeta} has the wrong order for this rule"));
                }
                if ctx.free_vars().contains(x) {
                    return fail(path, rule, format!("{x} appears free in the context"));
                }
                let premise = if zeta.name() == x {
                    body.clone()
                } else if a.is_free(x) {
                    return fail(path, rule, format!("{x} is free in {a}"));
                } else {
                    body.apply(&Substitution::rename(&zeta, x))
                };
                self.check(p, ctx, t, &premise, &path.child(0))
            }
            Derivation::R5(prem, u, p) => {
                let Some((Binder::Fo(x), body)) = prem.as_forall() else {
                    return fail(path, rule, format!("{prem} is not a first-order quantification"));
                };
                let concl = body.subst_fo(&x, u);
                if !concl.alpha_eq(a) {
                    return fail(path, rule, format!("instantiation gives {concl}, expected {a}"));
                }
                self.check(p, ctx, t, prem, &path.child(0))
            }
            Derivation::R7(prem, g, p) => {
                let Some((b @ Binder::So(..), body)) = prem.as_forall() else {
                    return fail(path, rule, format!("{prem} is not a second-order quantification"));
                };
                let inst = Instance::Formula(g.clone());
                if !inst.fits(&b) {
                    return fail(path, rule, format!("{g} does not have the arity of {b}"));
                }
                let concl = body.instantiate(&b, &inst);
                if !concl.alpha_eq(a) {
                    return fail(path, rule, format!("instantiation gives {concl}, expected {a}"));
                }
                self.check(p, ctx, t, prem, &path.child(0))
            }
            Derivation::R8(r, p) => {
                if match_particular_case(self.eqs, &r.u, &r.v).is_none() {
                    return fail(path, rule, format!("{} = {} is not a particular case of an equation", r.u, r.v));
                }
                let concl = r.template.subst_fo(&r.var, &r.v);
                if !concl.alpha_eq(a) {
                    return fail(path, rule, format!("rewriting gives {concl}, expected {a}"));
                }
                self.check(p, ctx, t, &r.template.subst_fo(&r.var, &r.u), &path.child(0))
            }
            Derivation::Sub(prem, sp, p) => {
                self.sub(path, rule, sp, prem, a)?;
                self.check(p, ctx, t, prem, &path.child(0))
            }
            Derivation::S1(x, xi, sp) => {
                match t {
                    Term::Var(y) if y == x => {}
                    _ => return fail(path, rule, format!("subject {t} is not the variable {x}")),
                }
                let Some(b) = ctx.get(x) else { return fail(path, rule, format!("{x} is not in the context")) };
                if let Some(v) = binders_not_free(xi, ctx) {
                    return fail(path, rule, format!("generalized {v} is free in the context"));
                }
                self.sub(path, rule, sp, &Formula::forall(xi, b.clone()), a)
            }
            Derivation::S2(xi, b, c, p, sp) => {
                let Term::Abs(x, u) = t else { return fail(path, rule, format!("subject {t} is not an abstraction")) };
                if let Some(v) = binders_not_free(xi, ctx) {
                    return fail(path, rule, format!("generalized {v} is free in the context"));
                }
                self.sub(path, rule, sp, &Formula::forall(xi, Formula::imp(b.clone(), c.clone())), a)?;
                self.check(p, &ctx.extend(x, b.clone()), u, c, &path.child(0))
            }
            Derivation::S3(xi, b, c, p, q, sp) => {
                let Term::App(u, v) = t else { return fail(path, rule, format!("subject {t} is not an application")) };
                if let Some(v) = binders_not_free(xi, ctx) {
                    return fail(path, rule, format!("generalized {v} is free in the context"));
                }
                self.sub(path, rule, sp, &Formula::forall(xi, c.clone()), a)?;
                self.check(p, ctx, u, &Formula::imp(b.clone(), c.clone()), &path.child(0))?;
                self.check(q, ctx, v, b, &path.child(1))
            }
            Derivation::Eta(src, at, p) => {
                match contract_at(src, at, RedexKind::Eta) {
                    Some(r) if r.alpha_eq(t) => {}
                    Some(r) => return fail(path, rule, format!("{src} reduces at {at} to {r}, not {t}")),
                    None => return fail(path, rule, format!("{src} has no η-redex at {at}")),
                }
                self.check(p, ctx, src, a, &path.child(0))
            }
        }
    }
}

/// Checks `d` as a derivation of `Γ ⊢ t : A` in `system`.
pub fn check_derivation(
    system: System,
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t: &Term,
    a: &Formula,
) -> Result<(), DerivError> {
    let root = NodePath::default();
    if let Some(x) = t.free_vars().into_iter().find(|x| !ctx.contains(x)) {
        return fail(&root, d.label(), format!("free variable {x} of the subject is not in the context"));
    }
    Checker { system, eqs }.check(d, ctx, t, a, &root)
}

/// Which system a derivation fits best, judged by its node labels alone.
pub fn infer_system(d: &Derivation) -> System {
    let labels = d.labels();
    if labels.iter().any(|l| l.starts_with('s') && *l != "sub") {
        System::Af2S
    } else if labels.contains(&"sub") {
        System::Af2Sub
    } else if labels.contains(&"eta") {
        System::Af2Eta
    } else {
        System::Af2
    }
}

fn fmt_binders(xi: &[Binder]) -> String {
    let parts: Vec<String> = xi.iter().map(|b| b.to_string()).collect();
    format!("({})", parts.join(" "))
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::R1 => f.write_str("(r1)"),
            Derivation::R2(d) => write!(f, "(r2 {d})"),
            Derivation::R3(b, d, e) => write!(f, "(r3 {{{b}}} {d} {e})"),
            Derivation::R4(x, d) => write!(f, "(r4 {x} {d})"),
            Derivation::R5(p, u, d) => write!(f, "(r5 {{{p}}} {{{u}}} {d})"),
            Derivation::R6(x, d) => write!(f, "(r6 {x} {d})"),
            Derivation::R7(p, g, d) => write!(f, "(r7 {{{p}}} {{{g}}} {d})"),
            Derivation::R8(r, d) => write!(f, "(r8 {{{}}} {} {{{}}} {{{}}} {d})", r.template, r.var, r.u, r.v),
            Derivation::Sub(a, sp, d) => write!(f, "(sub {{{a}}} {sp} {d})"),
            Derivation::S1(x, xi, sp) => write!(f, "(s1 {x} {} {sp})", fmt_binders(xi)),
            Derivation::S2(xi, b, c, d, sp) => write!(f, "(s2 {} {{{b}}} {{{c}}} {d} {sp})", fmt_binders(xi)),
            Derivation::S3(xi, b, c, d, e, sp) => {
                write!(f, "(s3 {} {{{b}}} {{{c}}} {d} {e} {sp})", fmt_binders(xi))
            }
            Derivation::Eta(s, p, d) => write!(f, "(eta {{{s}}} {p} {d})"),
        }
    }
}

fn parse_xi(e: &SExpr, sig: &Signature) -> Result<Vec<Binder>, ParseError> {
    match e {
        SExpr::List { items, .. } => {
            let mut out = Vec::new();
            for it in items {
                out.extend(it.parse_with(|s| parse_binders(s, sig))?);
            }
            Ok(out)
        }
        _ => e.parse_with(|s| parse_binders(s, sig)),
    }
}

pub fn parse_derivation(e: &SExpr, sig: &Signature) -> Result<Derivation, ParseError> {
    let (head, args) = e.head().ok_or_else(|| e.error("expected a derivation node `(rule …)`"))?;
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(e.error(format!("`{head}` expects {n} arguments, got {}", args.len())))
        }
    };
    let formula = |i: usize| args[i].parse_with(|s| parse_formula(s, sig));
    let deriv = |i: usize| parse_derivation(&args[i], sig).map(Box::new);
    let name = |i: usize| {
        args[i].text().map(str::to_string).ok_or_else(|| args[i].error("expected a variable name"))
    };
    match head {
        "r1" => {
            want(0)?;
            Ok(Derivation::R1)
        }
        "r2" => {
            want(1)?;
            Ok(Derivation::R2(deriv(0)?))
        }
        "r3" => {
            want(3)?;
            Ok(Derivation::R3(formula(0)?, deriv(1)?, deriv(2)?))
        }
        "r4" | "r6" => {
            want(2)?;
            let x = name(0)?;
            Ok(if head == "r4" { Derivation::R4(x, deriv(1)?) } else { Derivation::R6(x, deriv(1)?) })
        }
        "r5" => {
            want(3)?;
            let u = args[1].parse_with(|s| parse_fo_term(s, sig))?;
            Ok(Derivation::R5(formula(0)?, u, deriv(2)?))
        }
        "r7" => {
            want(3)?;
            let g = match args[1].parse_with(|s| parse_instance(s, sig))? {
                Instance::Formula(g) => g,
                Instance::Term(t) => SoInst::constant(Formula::Var(t.to_string(), Vec::new())),
            };
            Ok(Derivation::R7(formula(0)?, g, deriv(2)?))
        }
        "r8" => {
            want(5)?;
            let u = args[2].parse_with(|s| parse_fo_term(s, sig))?;
            let v = args[3].parse_with(|s| parse_fo_term(s, sig))?;
            Ok(Derivation::R8(EqRule { template: formula(0)?, var: name(1)?, u, v }, deriv(4)?))
        }
        "sub" => {
            want(3)?;
            Ok(Derivation::Sub(formula(0)?, parse_subproof(&args[1], sig)?, deriv(2)?))
        }
        "s1" => {
            want(3)?;
            Ok(Derivation::S1(name(0)?, parse_xi(&args[1], sig)?, parse_subproof(&args[2], sig)?))
        }
        "s2" => {
            want(5)?;
            Ok(Derivation::S2(parse_xi(&args[0], sig)?, formula(1)?, formula(2)?, deriv(3)?, parse_subproof(&args[4], sig)?))
        }
        "s3" => {
            want(6)?;
            Ok(Derivation::S3(
                parse_xi(&args[0], sig)?,
                formula(1)?,
                formula(2)?,
                deriv(3)?,
                deriv(4)?,
                parse_subproof(&args[5], sig)?,
            ))
        }
        "eta" => {
            want(3)?;
            let src = args[0].parse_with(parse_term)?;
            let p = args[1].parse_with(parse_path)?;
            Ok(Derivation::Eta(src, p, deriv(2)?))
        }
        other => Err(e.error(format!("unknown typing rule `{other}`"))),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::syntax::parse_sexpr;

    pub fn sig() -> Signature {
        Signature::new()
            .with_function("0", 0)
            .with_function("s", 1)
            .with_function("add", 2)
            .with_function("c", 0)
            .with_predicate("N", 1)
            .with_predicate("P", 1)
    }

    pub fn f(s: &str) -> Formula {
        parse_formula(s, &sig()).unwrap()
    }

    pub fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    pub fn d(s: &str) -> Derivation {
        parse_derivation(&parse_sexpr(s).unwrap(), &sig()).unwrap()
    }

    pub fn ctx(s: &str) -> Context {
        Context::parse(s, &sig()).unwrap()
    }

    pub fn e_add() -> EquationSystem {
        let t = |s: &str| crate::syntax::parse_fo_term(s, &sig()).unwrap();
        EquationSystem::new(vec![
            crate::logic::Equation::new(t("add(0, y)"), t("y")),
            crate::logic::Equation::new(t("add(s(x), y)"), t("s(add(x, y))")),
        ])
    }

    pub fn none() -> EquationSystem {
        EquationSystem::default()
    }

    pub const SEC3: &str = "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X";

    pub fn af2_sec3() -> Derivation {
        d("(r2 (r2 (r6 X (r3 {X} (r7 {!X. X -> X -> X} {X} (r1)) (r7 {!X. X} {X} (r1))))))")
    }

    pub fn af2s_id_sec3() -> Derivation {
        d("(s2 () {!X. X -> X -> X} {(!X. X) -> !X. X -> X} (s1 x () (dist X)) (ax))")
    }

    #[test]
    fn s1_axiom() {
        let dd = d("(s1 x () (ax))");
        assert!(check_derivation(System::Af2S, &none(), &dd, &ctx("x : N(y)"), &t("x"), &f("N(y)")).is_ok());
    }

    #[test]
    fn section_three_pair() {
        // The form `(r7 {..} {X} ..)` parses the nullary instance X.
        let a = f(SEC3);
        let r = check_derivation(System::Af2, &none(), &af2_sec3(), &Context::new(), &t("\\x. \\y. x y"), &a);
        assert!(r.is_ok(), "{r:?}");
        let r = check_derivation(System::Af2S, &none(), &af2s_id_sec3(), &Context::new(), &t("\\x. x"), &a);
        assert!(r.is_ok(), "{r:?}");
        // The same tree is not an AF2 derivation.
        assert!(check_derivation(System::Af2, &none(), &af2s_id_sec3(), &Context::new(), &t("\\x. x"), &a).is_err());
    }

    #[test]
    fn side_conditions() {
        let gen = d("(r6 X (r1))");
        let e = check_derivation(System::Af2, &none(), &gen, &ctx("x : X"), &t("x"), &f("!X. X")).unwrap_err();
        assert_eq!(e.rule, "r6");
        let s1 = d("(s1 x (X) (forall-elim {Y} (ax)))");
        let e = check_derivation(System::Af2S, &none(), &s1, &ctx("x : X"), &t("x"), &f("Y")).unwrap_err();
        assert!(e.reason.contains("free in the context"));
        let free = check_derivation(System::Af2S, &none(), &d("(s1 x () (ax))"), &ctx("x : X"), &t("y"), &f("X"));
        assert!(free.is_err());
    }

    #[test]
    fn eta_node() {
        let a = f(SEC3);
        let dd = Derivation::Eta(t("\\x. \\y. x y"), "@b".parse().unwrap(), Box::new(af2_sec3()));
        let r = check_derivation(System::Af2Eta, &none(), &dd, &Context::new(), &t("\\x. x"), &a);
        assert!(r.is_ok(), "{r:?}");
        let wrong = Derivation::Eta(t("\\x. \\y. x y"), "@".parse().unwrap(), Box::new(af2_sec3()));
        assert!(check_derivation(System::Af2Eta, &none(), &wrong, &Context::new(), &t("\\x. x"), &a).is_err());
    }

    #[test]
    fn equation_rule() {
        let e = {
            let tt = |s: &str| parse_fo_term(s, &sig()).unwrap();
            EquationSystem::new(vec![crate::logic::Equation::new(tt("add(0, y)"), tt("y"))])
        };
        let dd = d("(r8 {N(z)} z {add(0, 0)} {0} (r1))");
        let r = check_derivation(System::Af2, &e, &dd, &ctx("x : N(add(0, 0))"), &t("x"), &f("N(0)"));
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn print_parse_round_trip() {
        for dd in [af2_sec3(), af2s_id_sec3()] {
            let s = dd.to_string();
            assert_eq!(parse_derivation(&parse_sexpr(&s).unwrap(), &sig()).unwrap(), dd);
        }
    }
}
