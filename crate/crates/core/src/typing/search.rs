//! Bounded typability search on β-normal subjects. A result always
//! re-checks; finding nothing proves nothing.

use super::convert;
use super::transform::{retarget, terr, Fresh, TransformError};
use super::{Context, Derivation, System};
use crate::lambda::Term;
use crate::logic::{Binder, EquationSystem, FoTerm, Formula, Instance, SoInst, Substitution};
use crate::subtyping::{compose, instantiate_chain, search_subtype_with, SearchConfig, SubProof};
use crate::syntax::is_upper;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct TypingLimits {
    /// Maximum nesting of typing rules explored.
    pub depth: usize,
    /// Extra instantiation candidates, tried first.
    pub hints: Vec<Instance>,
    /// Depth of each containment search.
    pub sub_depth: usize,
    /// Typing goals visited before giving up.
    pub node_budget: usize,
    /// Candidates per unresolved quantifier.
    pub max_candidates: usize,
}

impl Default for TypingLimits {
    fn default() -> Self {
        TypingLimits { depth: 6, hints: Vec::new(), sub_depth: 4, node_budget: 5_000, max_candidates: 12 }
    }
}

impl TypingLimits {
    pub fn with_depth(depth: usize) -> Self {
        TypingLimits { depth, ..Self::default() }
    }
}

/// Bounded search for a derivation of `Γ ⊢ t : A` in `system`; `t` must be
/// β-normal.
pub fn search_typing(
    system: System,
    eqs: &EquationSystem,
    ctx: &Context,
    t: &Term,
    a: &Formula,
    limits: &TypingLimits,
) -> Result<Option<Derivation>, TransformError> {
    if !t.is_beta_normal() {
        return terr(format!("search needs a β-normal subject, {t} is not"));
    }
    if let Some(x) = t.free_vars().into_iter().find(|x| !ctx.contains(x)) {
        return terr(format!("free variable {x} of the subject is not in the context"));
    }
    let restricted = system == System::Af2;
    let mut fresh = Fresh::new();
    fresh.context(ctx).formula(a);
    for h in &limits.hints {
        fresh.names(h.free_vars());
    }
    let mut sub = SearchConfig::with_depth(limits.sub_depth);
    sub.hints = limits.hints.clone();
    sub.restricted = restricted;
    let mut s = Searcher { eqs, limits, sub, nodes: 0, fresh, goal_atoms: Vec::new() };
    s.collect_basis(ctx, a);
    let Some(d) = s.go(ctx, t, a, limits.depth) else { return Ok(None) };
    let out = match system {
        System::Af2S => d,
        System::Af2Sub => convert(eqs, &d, System::Af2S, System::Af2Sub, ctx, t, a)?,
        System::Af2Eta | System::Af2 => {
            let e = convert(eqs, &d, System::Af2S, System::Af2Eta, ctx, t, a)?;
            if system == System::Af2 && e.count_eta() > 0 {
                return Ok(None);
            }
            e
        }
    };
    Ok(Some(out))
}

struct Searcher<'a> {
    eqs: &'a EquationSystem,
    limits: &'a TypingLimits,
    sub: SearchConfig,
    nodes: usize,
    fresh: Fresh,
    /// Subformulas of the goal and context, used as instantiation basis.
    goal_atoms: Vec<Formula>,
}

/// A head type opened along a spine: per argument, the metas introduced
/// before its arrow, the argument type and the remainder.
struct Segment {
    metas: Vec<Binder>,
    arg: Formula,
    rest: Formula,
}

impl Searcher<'_> {
    fn collect_basis(&mut self, ctx: &Context, a: &Formula) {
        let mut subs = Vec::new();
        a.subformulas(&mut subs);
        for (_, b) in ctx.entries() {
            b.subformulas(&mut subs);
        }
        let mut seen = BTreeSet::new();
        subs.retain(|f| f.is_closed_in(&self.scope_names(ctx, a)) && seen.insert(f.key()));
        self.goal_atoms = subs;
    }

    fn scope_names(&self, ctx: &Context, a: &Formula) -> BTreeSet<String> {
        let mut s = ctx.free_vars();
        s.extend(a.free_vars());
        s
    }

    fn subtype(&self, a: &Formula, b: &Formula) -> Option<SubProof> {
        search_subtype_with(self.eqs, a, b, &self.sub)
    }

    fn go(&mut self, ctx: &Context, t: &Term, a: &Formula, depth: usize) -> Option<Derivation> {
        if depth == 0 || self.nodes >= self.limits.node_budget {
            return None;
        }
        self.nodes += 1;
        if let Some((b, body)) = a.as_forall() {
            let zf = self.fresh.binder(&b);
            let opened = body.apply(&Substitution::rename(&b, zf.name()));
            let d = self.go(ctx, t, &opened, depth)?;
            return retarget(&d, ctx, t, &opened, &[zf], SubProof::Ax).ok();
        }
        match t {
            Term::Var(x) => {
                let sp = self.subtype(ctx.get(x)?, a)?;
                Some(Derivation::S1(x.clone(), vec![], sp))
            }
            Term::Abs(x, w) => {
                let (b, c) = a.as_imp()?;
                let d = self.go(&ctx.extend(x, b.clone()), w, c, depth - 1)?;
                Some(Derivation::S2(vec![], b.clone(), c.clone(), Box::new(d), SubProof::Ax))
            }
            Term::App(..) => {
                let (head, args) = t.spine();
                let Term::Var(x) = head else { return None };
                let h = ctx.get(x)?.clone();
                self.spine(ctx, x, &h, &args, a, depth)
            }
        }
    }

    /// Opens `h` for `n` arguments, introducing metas for quantifiers and
    /// arrows for bare second-order metas.
    fn open_head(&mut self, h: &Formula, n: usize, metas: &mut BTreeMap<String, Binder>) -> Option<(Vec<Segment>, Vec<Binder>, Formula, Substitution)> {
        let mut segs = Vec::new();
        let mut arrows = Substitution::default();
        let mut cur = h.clone();
        for _ in 0..n {
            let (ms, body) = self.strip_metas(&cur, metas);
            let body = match body.as_imp() {
                Some(_) => body,
                None => match &body {
                    Formula::Var(m, args) if args.is_empty() && metas.contains_key(m) => {
                        let y1 = self.fresh.name("Y");
                        let y2 = self.fresh.name("Y");
                        metas.insert(y1.clone(), Binder::So(y1.clone(), 0));
                        metas.insert(y2.clone(), Binder::So(y2.clone(), 0));
                        let arrow = Formula::imp(Formula::atom(&y1), Formula::atom(&y2));
                        arrows.so.insert(m.clone(), SoInst::constant(arrow.clone()));
                        arrow
                    }
                    _ => return None,
                },
            };
            let (c, rest) = body.as_imp()?;
            segs.push(Segment { metas: ms, arg: c.clone(), rest: rest.clone() });
            cur = rest.clone();
        }
        let (last, r) = self.strip_metas(&cur, metas);
        Some((segs, last, r, arrows))
    }

    fn strip_metas(&mut self, f: &Formula, metas: &mut BTreeMap<String, Binder>) -> (Vec<Binder>, Formula) {
        let mut out = Vec::new();
        let mut cur = f.clone();
        while let Some((b, body)) = cur.as_forall() {
            let m = self.fresh.binder(&b);
            let next = body.apply(&Substitution::rename(&b, m.name()));
            metas.insert(m.name().to_string(), m.clone());
            out.push(m);
            cur = next;
        }
        (out, cur)
    }

    fn spine(&mut self, ctx: &Context, x: &str, h: &Formula, args: &[&Term], a: &Formula, depth: usize) -> Option<Derivation> {
        let mut metas = BTreeMap::new();
        let (segs, last, r, arrows) = self.open_head(h, args.len(), &mut metas)?;
        // Seed the substitution by matching the result against the goal,
        // then argument types against variable arguments.
        let mut sigma = arrows;
        let mut seeded = sigma.clone();
        if matches(&r, a, &metas, &mut seeded, &mut Vec::new()) {
            sigma = seeded;
        }
        for (seg, arg) in segs.iter().zip(args) {
            if let Term::Var(y) = arg {
                if let Some(g) = ctx.get(y) {
                    let mut s2 = sigma.clone();
                    if matches(&seg.arg, g, &metas, &mut s2, &mut Vec::new()) {
                        sigma = s2;
                    }
                }
            }
        }
        let open: Vec<Binder> = metas.values().filter(|b| !bound(&sigma, b.name())).cloned().collect();
        let relevant = relevant_metas(&segs, &r, &sigma, &open);
        let mut choices: Vec<Vec<Instance>> = Vec::new();
        for b in &relevant {
            choices.push(self.candidates(ctx, a, b));
        }
        let filler: Vec<(Binder, Instance)> = open
            .iter()
            .filter(|b| !relevant.iter().any(|r| r.name() == b.name()))
            .map(|b| (b.clone(), default_instance(b)))
            .collect();
        let mut idx = vec![0usize; relevant.len()];
        let mut tried = 0usize;
        loop {
            if self.nodes >= self.limits.node_budget || tried >= 4 * self.limits.max_candidates {
                return None;
            }
            tried += 1;
            let mut full = sigma.clone();
            for ((b, c), i) in relevant.iter().zip(&choices).zip(&idx) {
                let inst = c.get(*i)?;
                bind(&mut full, b, inst);
            }
            for (b, inst) in &filler {
                bind(&mut full, b, inst);
            }
            let full = resolve(&full);
            if let Some(d) = self.build(ctx, x, h, args, &segs, &last, &r, a, &full, depth) {
                return Some(d);
            }
            if !advance(&mut idx, &choices) {
                return None;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        &mut self,
        ctx: &Context,
        x: &str,
        h: &Formula,
        args: &[&Term],
        segs: &[Segment],
        last: &[Binder],
        r: &Formula,
        a: &Formula,
        sigma: &Substitution,
        depth: usize,
    ) -> Option<Derivation> {
        let insts = |ms: &[Binder]| -> Option<Vec<Instance>> { ms.iter().map(|m| instance_of(sigma, m)).collect() };
        let mut arg_ds = Vec::new();
        for (seg, u) in segs.iter().zip(args) {
            let c = seg.arg.apply(sigma);
            arg_ds.push(self.go(ctx, u, &c, depth - 1)?);
        }
        let mut d = Derivation::S1(x.to_string(), vec![], instantiate_chain(&insts(&segs[0].metas)?));
        let _ = h;
        for (i, (seg, dv)) in segs.iter().zip(arg_ds).enumerate() {
            let b = seg.arg.apply(sigma);
            let c = seg.rest.apply(sigma);
            let sp = match segs.get(i + 1) {
                Some(next) => instantiate_chain(&insts(&next.metas)?),
                None => {
                    let rs = r.apply(sigma);
                    let tail = if rs.alpha_eq(a) { SubProof::Ax } else { self.subtype(&rs, a)? };
                    compose(&rs, instantiate_chain(&insts(last)?), tail)
                }
            };
            d = Derivation::S3(vec![], b, c, Box::new(d), Box::new(dv), sp);
        }
        Some(d)
    }

    fn candidates(&self, ctx: &Context, a: &Formula, b: &Binder) -> Vec<Instance> {
        let mut out: Vec<Instance> = self.limits.hints.iter().filter(|h| h.fits(b)).cloned().collect();
        let scope = self.scope_names(ctx, a);
        match b {
            Binder::Fo(_) => {
                let mut terms = Vec::new();
                a.fo_subterms(&mut terms);
                for (_, f) in ctx.entries() {
                    f.fo_subterms(&mut terms);
                }
                out.extend(terms.into_iter().filter(|t| t.free_vars().is_subset(&scope)).map(Instance::Term));
                out.extend(scope.iter().filter(|v| !is_upper(v)).map(|v| Instance::Term(FoTerm::var(v))));
            }
            Binder::So(_, 0) => {
                out.extend(self.goal_atoms.iter().cloned().map(|g| Instance::Formula(SoInst::constant(g))));
            }
            Binder::So(_, n) => {
                let params: Vec<String> = (1..=*n).map(|i| format!("p_{i}")).collect();
                let args: Vec<FoTerm> = params.iter().map(|p| FoTerm::var(p)).collect();
                for g in &self.goal_atoms {
                    if let Formula::Pred(p, xs) | Formula::Var(p, xs) = g {
                        if xs.len() == *n {
                            let body = match g {
                                Formula::Pred(..) => Formula::Pred(p.clone(), args.clone()),
                                _ => Formula::Var(p.clone(), args.clone()),
                            };
                            out.push(Instance::Formula(SoInst { params: params.clone(), body }));
                        }
                    }
                }
                out.extend(
                    self.goal_atoms.iter().map(|g| Instance::Formula(SoInst { params: params.clone(), body: g.clone() })),
                );
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|i| seen.insert(format!("{i:?}")));
        out.truncate(self.limits.max_candidates);
        out
    }
}

trait ClosedIn {
    fn is_closed_in(&self, scope: &BTreeSet<String>) -> bool;
}

impl ClosedIn for Formula {
    fn is_closed_in(&self, scope: &BTreeSet<String>) -> bool {
        self.free_vars().is_subset(scope)
    }
}

fn bound(s: &Substitution, m: &str) -> bool {
    s.fo.contains_key(m) || s.so.contains_key(m)
}

fn bind(s: &mut Substitution, b: &Binder, inst: &Instance) {
    s.fo.extend(inst.substitution_for(b).fo);
    s.so.extend(inst.substitution_for(b).so);
}

fn instance_of(s: &Substitution, m: &Binder) -> Option<Instance> {
    match m {
        Binder::Fo(x) => s.fo.get(x).cloned().map(Instance::Term),
        Binder::So(x, _) => s.so.get(x).cloned().map(Instance::Formula),
    }
}

fn default_instance(b: &Binder) -> Instance {
    match b {
        Binder::Fo(x) => Instance::Term(FoTerm::var(x)),
        Binder::So(_, n) => Instance::Formula(SoInst {
            params: (1..=*n).map(|i| format!("p_{i}")).collect(),
            body: Formula::Absurd,
        }),
    }
}

/// Applies the substitution to its own images until no meta remains.
fn resolve(s: &Substitution) -> Substitution {
    let mut cur = s.clone();
    for _ in 0..8 {
        let next = Substitution {
            fo: cur.fo.iter().map(|(k, v)| (k.clone(), v.subst(&cur.fo))).collect(),
            so: cur.so.iter().map(|(k, g)| (k.clone(), g.apply(&cur))).collect(),
        };
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Metas still open that occur in argument types or the result.
fn relevant_metas(segs: &[Segment], r: &Formula, sigma: &Substitution, open: &[Binder]) -> Vec<Binder> {
    let mut fv = r.apply(sigma).free_vars();
    for s in segs {
        fv.extend(s.arg.apply(sigma).free_vars());
    }
    open.iter().filter(|b| fv.contains(b.name())).cloned().collect()
}

fn advance(idx: &mut [usize], choices: &[Vec<Instance>]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < choices[i].len() {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// One-sided matching of `p` (with metas) against the rigid `t`. `bound`
/// pairs the binders passed on each side.
fn matches(
    p: &Formula,
    t: &Formula,
    metas: &BTreeMap<String, Binder>,
    s: &mut Substitution,
    bound: &mut Vec<(String, String)>,
) -> bool {
    match (p, t) {
        (Formula::Absurd, Formula::Absurd) => true,
        (Formula::Var(m, args), _) if metas.contains_key(m) && !bound.iter().any(|(x, _)| x == m) => {
            let bound_rigid: BTreeSet<&String> = bound.iter().map(|(_, y)| y).collect();
            if t.free_vars().iter().any(|v| bound_rigid.contains(v)) {
                return false;
            }
            if let Some(g) = s.so.get(m).cloned() {
                let mut fo_ok = true;
                let args2: Vec<FoTerm> = args.iter().map(|a| a.subst(&s.fo)).collect();
                fo_ok &= args2.iter().all(|a| a.free_vars().iter().all(|v| !metas.contains_key(v)));
                return fo_ok && g.apply_to(&args2).alpha_eq(t);
            }
            let params: Vec<String> = (1..=args.len()).map(|i| format!("p_{i}")).collect();
            let mut body = t.clone();
            for (a, p) in args.iter().zip(&params) {
                if let FoTerm::Var(v) = a {
                    if !metas.contains_key(v) {
                        body = body.subst_fo(v, &FoTerm::var(p));
                    }
                }
            }
            s.so.insert(m.clone(), SoInst { params, body });
            true
        }
        (Formula::Var(x, xs), Formula::Var(y, ys)) => {
            let same = x == y || bound.iter().any(|(a, b)| a == x && b == y);
            same && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| match_fo(a, b, metas, s, bound))
        }
        (Formula::Pred(x, xs), Formula::Pred(y, ys)) => {
            x == y && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| match_fo(a, b, metas, s, bound))
        }
        (Formula::Imp(a, b), Formula::Imp(c, d)) => {
            matches(a, c, metas, s, bound) && matches(b, d, metas, s, bound)
        }
        (Formula::AllFo(x, a), Formula::AllFo(y, b)) | (Formula::AllSo(x, _, a), Formula::AllSo(y, _, b)) => {
            bound.push((x.clone(), y.clone()));
            let ok = matches(a, b, metas, s, bound);
            bound.pop();
            ok
        }
        _ => false,
    }
}

fn match_fo(
    p: &FoTerm,
    t: &FoTerm,
    metas: &BTreeMap<String, Binder>,
    s: &mut Substitution,
    bound: &[(String, String)],
) -> bool {
    match (p, t) {
        (FoTerm::Var(m), _) if metas.contains_key(m) && !bound.iter().any(|(x, _)| x == m) => {
            if t.free_vars().iter().any(|v| bound.iter().any(|(_, y)| y == v)) {
                return false;
            }
            match s.fo.get(m) {
                Some(u) => u == t,
                None => {
                    s.fo.insert(m.clone(), t.clone());
                    true
                }
            }
        }
        (FoTerm::Var(x), FoTerm::Var(y)) => {
            x == y && !bound.iter().any(|(a, _)| a == x) || bound.iter().any(|(a, b)| a == x && b == y)
        }
        (FoTerm::App(f, xs), FoTerm::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| match_fo(a, b, metas, s, bound))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::check_derivation;
    use crate::typing::tests::{ctx, f, none, t, SEC3};

    fn found(sys: System, c: &Context, tt: &Term, a: &Formula) -> Option<Derivation> {
        let d = search_typing(sys, &none(), c, tt, a, &TypingLimits::default()).unwrap();
        if let Some(d) = &d {
            if let Err(e) = check_derivation(sys, &none(), d, c, tt, a) {
                panic!("{e}\n{d}");
            }
        }
        d
    }

    #[test]
    fn bool_projections() {
        let a = f("!X. X -> X -> X");
        assert!(found(System::Af2S, &Context::new(), &t("\\x y. x"), &a).is_some());
        assert!(found(System::Af2S, &Context::new(), &t("\\x y. y"), &a).is_some());
        assert!(found(System::Af2S, &Context::new(), &t("\\x. x"), &a).is_none());
        assert!(found(System::Af2, &Context::new(), &t("\\x y. x"), &a).is_some());
    }

    #[test]
    fn variable_at_depth_one() {
        let c = ctx("x : P(c)");
        let d = search_typing(System::Af2S, &none(), &c, &t("x"), &f("P(c)"), &TypingLimits::with_depth(1)).unwrap();
        assert!(d.is_some());
    }

    #[test]
    fn church_numerals() {
        let nat = f("!X. (X -> X) -> X -> X");
        for n in ["\\f x. x", "\\f x. f x", "\\f x. f (f x)", "\\f. f"] {
            assert!(found(System::Af2S, &Context::new(), &t(n), &nat).is_some(), "{n}");
        }
        assert!(found(System::Af2, &Context::new(), &t("\\f x. f (f x)"), &nat).is_some());
    }

    #[test]
    fn motivating_example_split() {
        let a = f(SEC3);
        assert!(found(System::Af2, &Context::new(), &t("\\x y. x y"), &a).is_some());
        assert!(found(System::Af2S, &Context::new(), &t("\\x. x"), &a).is_some());
        assert!(found(System::Af2, &Context::new(), &t("\\x. x"), &a).is_none());
    }

    #[test]
    fn polymorphic_head() {
        // x : ∀X X ⊢ (x) y : P(c)
        let c = ctx("x : !X. X, y : P(c)");
        assert!(found(System::Af2S, &c, &t("x y"), &f("P(c)")).is_some());
        let c = ctx("x : !X. X -> X, y : P(c)");
        assert!(found(System::Af2S, &c, &t("x y"), &f("P(c)")).is_some());
    }

    #[test]
    fn rejects_non_normal_subject() {
        let r = search_typing(System::Af2S, &none(), &Context::new(), &t("(\\x. x) (\\y. y)"), &f("!X. X -> X"), &TypingLimits::default());
        assert!(r.is_err());
    }
}
