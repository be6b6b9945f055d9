//! The term model: domain `M0/≈E`, atoms valued by β-typability over Γ⁻.

use super::{refute_typing, Family, Interpretation, Model, SemanticSet, SemanticsError, Verdict};
use crate::lambda::{fresh_name, reduce, Strategy, Term};
use crate::logic::{canonical_form, EquationSystem, FoTerm, Formula, Signature};
use crate::positivity::classify;
use crate::typing::{search_typing, Context, System, TypingLimits};
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

/// Cantor pairing.
pub fn pair(k: usize, r: usize) -> usize {
    (k + r) * (k + r + 1) / 2 + r
}

pub fn unpair(n: usize) -> (usize, usize) {
    let mut w = 0;
    while (w + 1) * (w + 2) / 2 <= n {
        w += 1;
    }
    let r = n - w * (w + 1) / 2;
    (w - r, r)
}

/// The context Γ⁻. Variable `x_n` has the `k`-th registered ∀₂⁻ type where
/// `n` encodes `(k, r)`, so each type owns infinitely many variables. Types
/// are registered on first use.
#[derive(Debug, Default)]
pub struct GammaMinus {
    types: Mutex<Vec<Formula>>,
}

impl GammaMinus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `a` in the enumeration; `None` if `a` is not ∀₂⁻.
    pub fn index(&self, a: &Formula) -> Option<usize> {
        if !classify(a).negative {
            return None;
        }
        let mut types = self.types.lock().unwrap();
        let key = a.key();
        if let Some(k) = types.iter().position(|b| b.key() == key) {
            return Some(k);
        }
        types.push(a.clone());
        Some(types.len() - 1)
    }

    pub fn var(k: usize, r: usize) -> String {
        format!("x_{}", pair(k, r))
    }

    pub fn type_of(&self, name: &str) -> Option<Formula> {
        let n: usize = name.strip_prefix("x_")?.parse().ok()?;
        let (k, _) = unpair(n);
        self.types.lock().unwrap().get(k).cloned()
    }

    /// Γ⁻ restricted to the free variables of `t`.
    pub fn context_for(&self, t: &Term) -> Option<Context> {
        let entries = t.free_vars().into_iter().map(|x| self.type_of(&x).map(|a| (x, a))).collect::<Option<Vec<_>>>()?;
        Context::from_entries(entries).ok()
    }

    /// The first `count` variables of type `a`.
    pub fn probes(&self, a: &Formula, count: usize) -> Vec<Term> {
        match self.index(a) {
            Some(k) => (0..count).map(|r| Term::var(Self::var(k, r))).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntacticModelConfig {
    pub sig: Signature,
    pub eqs: EquationSystem,
    /// β-reduction budget for each membership query.
    pub budget: usize,
    pub limits: TypingLimits,
    /// Nesting depth of the closed terms presented as the domain.
    pub domain_depth: usize,
    /// Variables of Γ⁻ used as probes per type.
    pub reps: usize,
    /// Rewrite budget for canonical forms modulo `E`.
    pub canon_budget: usize,
}

impl SyntacticModelConfig {
    pub fn new(sig: Signature, eqs: EquationSystem) -> Self {
        SyntacticModelConfig {
            sig,
            eqs,
            budget: crate::lambda::default_budget(),
            limits: TypingLimits::default(),
            domain_depth: 2,
            reps: 2,
            canon_budget: 200,
        }
    }
}

/// Membership in `{τ ; Γ⁻ ⊢β τ : F}`: found derivations give In, refuted
/// normal forms give Out.
struct Derivable {
    gm: Arc<GammaMinus>,
    eqs: EquationSystem,
    limits: TypingLimits,
    budget: usize,
    reps: usize,
    cache: Mutex<HashMap<String, Verdict>>,
}

impl Derivable {
    fn verdict(&self, tau: &Term, a: &Formula) -> Verdict {
        let r = reduce(tau, Strategy::BetaNormalOrder, self.budget);
        if !r.is_normal() {
            return Verdict::Unknown;
        }
        let nf = r.result;
        let key = format!("{}|{}", a.key(), nf);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let Some(ctx) = self.gm.context_for(&nf) else { return Verdict::Unknown };
        let v = match search_typing(System::Af2S, &self.eqs, &ctx, &nf, a, &self.limits) {
            Ok(Some(_)) => Verdict::In,
            _ if refute_typing(&self.eqs, &ctx, &nf, a, self.budget) => Verdict::Out,
            _ => Verdict::Unknown,
        };
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    fn set(self: &Arc<Self>, a: Formula) -> SemanticSet {
        let probes = self.gm.probes(&a, self.reps);
        let d = self.clone();
        SemanticSet::new(format!("⊢β {a}"), probes, move |t| d.verdict(t, &a))
    }

    fn family(self: &Arc<Self>, var: &str, arity: usize) -> Family {
        let d = self.clone();
        let y = var.to_string();
        Family::new(arity, format!("Φ {var}"), move |args| d.set(Formula::Var(y.clone(), args.to_vec()))).for_variable(var)
    }
}

/// The model of closed terms modulo `≈E` with its interpretation: `I(x)`
/// is the class of `x` and `I(X)` the typability family of `X`. `∀X`
/// ranges over the typability family of a fresh variable plus three
/// stress candidates (all of Λ, and the terms reducing to either of two
/// free variables).
pub fn syntactic_model(cfg: &SyntacticModelConfig) -> Result<(Model, Interpretation, Arc<GammaMinus>), SemanticsError> {
    let eqs = cfg.eqs.clone();
    let canon_budget = cfg.canon_budget;
    let canon = move |t: &FoTerm| canonical_form(&eqs, t, canon_budget).0;
    let mut domain: Vec<FoTerm> = Vec::new();
    for t in cfg.sig.closed_terms(cfg.domain_depth) {
        let c = canon(&t);
        if !domain.contains(&c) {
            domain.push(c);
        }
    }
    if domain.is_empty() {
        return Err(SemanticsError::EmptyDomain);
    }
    let gm = Arc::new(GammaMinus::new());
    let d = Arc::new(Derivable {
        gm: gm.clone(),
        eqs: cfg.eqs.clone(),
        limits: cfg.limits.clone(),
        budget: cfg.budget,
        reps: cfg.reps,
        cache: Mutex::new(HashMap::new()),
    });
    let (dp, dc, dh) = (d.clone(), d.clone(), d.clone());
    let (budget, reps, gh) = (cfg.budget, cfg.reps, gm.clone());
    let model = Model::new(
        "syntactic",
        domain,
        move |f, args| canon(&FoTerm::App(f.to_string(), args.to_vec())),
        move |p, args| dp.set(Formula::Pred(p.to_string(), args.to_vec())),
    )
    .with_equations(cfg.eqs.clone())
    .with_budget(cfg.budget)
    .with_absurd(d.set(Formula::Absurd))
    .with_candidates(move |n, avoid: &BTreeSet<String>| {
        let y = fresh_name("Y", avoid);
        vec![
            dc.family(&y, n),
            Family::constant(n, SemanticSet::everything()),
            Family::constant(n, SemanticSet::weak_head_to("wh", budget)),
            Family::constant(n, SemanticSet::weak_head_to("wk", budget)),
        ]
    })
    .with_probe_hook(move |a| if classify(a).negative { gh.probes(a, reps) } else { Vec::new() });
    let mut interp = Interpretation::new().with_so_default(move |x, n| dh.family(x, n));
    interp.fo_identity = true;
    Ok((model, interp, gm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::interpret;
    use crate::typing::tests::{f, sig, t};

    fn cfg() -> SyntacticModelConfig {
        SyntacticModelConfig::new(sig(), EquationSystem::default())
    }

    #[test]
    fn pairing_round_trip() {
        for n in 0..200 {
            let (k, r) = unpair(n);
            assert_eq!(pair(k, r), n);
        }
    }

    #[test]
    fn every_type_recurs() {
        let gm = GammaMinus::new();
        let a = gm.index(&f("P(c)")).unwrap();
        let b = gm.index(&f("X -> P(c)")).unwrap();
        assert_ne!(a, b);
        assert_eq!(gm.index(&f("P(c)")), Some(a));
        assert_eq!(gm.index(&f("!X. X")), None);
        let names: BTreeSet<String> = (0..6).map(|r| GammaMinus::var(a, r)).collect();
        assert_eq!(names.len(), 6);
        for n in &names {
            assert_eq!(gm.type_of(n), Some(f("P(c)")));
        }
    }

    #[test]
    fn atoms_contain_their_variables() {
        let (m, i, gm) = syntactic_model(&cfg()).unwrap();
        let pc = interpret(&f("P(c)"), &m, &i).unwrap();
        let x = &gm.probes(&f("P(c)"), 1)[0];
        assert_eq!(pc.verdict(x), Verdict::In);
        assert_eq!(pc.verdict(&Term::app(t("\\z. z"), x.clone())), Verdict::In);
        assert_eq!(pc.verdict(&t("\\z. z")), Verdict::Out);
    }

    #[test]
    fn bool_in_the_syntactic_model() {
        let (m, i, _) = syntactic_model(&cfg()).unwrap();
        let b = interpret(&f("!X. X -> X -> X"), &m, &i).unwrap();
        assert_eq!(b.verdict(&t("\\x y. x")), Verdict::In);
        assert_eq!(b.verdict(&t("\\x y. y")), Verdict::In);
        assert_eq!(b.verdict(&t("\\x. x")), Verdict::Out);
        assert_eq!(b.verdict(&t("(\\z. z) (\\x y. x)")), Verdict::In);
    }

    #[test]
    fn quotient_domain() {
        let e = crate::typing::tests::e_add();
        let s = Signature::new().with_function("0", 0).with_function("s", 1).with_function("add", 2);
        let (m, _, _) = syntactic_model(&SyntacticModelConfig::new(s, e)).unwrap();
        let one = FoTerm::app("s", vec![FoTerm::constant("0")]);
        assert_eq!(m.func("add", &[one.clone(), FoTerm::constant("0")]), one);
        assert!(m.equation_failures(&m.domain.clone()).is_empty());
    }
}
