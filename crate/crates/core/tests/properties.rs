use af2lab::corpus::Corpus;
use af2lab::lambda::{beta_redexes, contract_at, eta_redexes, normalize_random, reduce, RedexKind, Strategy as Red, Term};
use af2lab::logic::{Formula, Signature};
use af2lab::positivity::classify;
use af2lab::subtyping::{check_subproof, substitute_subproof};
use af2lab::syntax::{is_upper, parse_formula, parse_term};
use af2lab::typing::{check_derivation, convert, subject_reduce, substitute_derivation, ReductionKind, System};
use af2lab::verify::{commute, occurrence_polarity, positions, random};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::sync::OnceLock;

fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(Corpus::bundled)
}

fn sig() -> Signature {
    Signature::new().with_function("0", 0).with_function("s", 1).with_function("c", 0).with_predicate("P", 1)
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just("x"), Just("y"), Just("z"), Just("f")].prop_map(Term::var);
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just("x"), Just("y"), Just("z")], inner.clone()).prop_map(|(x, b)| Term::abs(x, b)),
            (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a)),
        ]
    })
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(|seed| {
        let mut rng = StdRng::seed_from_u64(seed);
        random::formula(&mut rng, &sig(), &mut vec![("W".into(), 1)], &mut vec!["n".into()], 5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn term_printing_round_trips(t in arb_term()) {
        let again = parse_term(&t.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), t.to_string());
        prop_assert!(again.alpha_eq(&t));
    }

    #[test]
    fn formula_printing_round_trips(a in arb_formula()) {
        let again = parse_formula(&a.to_string(), &sig()).unwrap();
        prop_assert!(again.alpha_eq(&a), "{} vs {}", again, a);
    }

    #[test]
    fn classify_matches_quantifier_signs(a in arb_formula()) {
        let p = classify(&a);
        prop_assert_eq!((p.positive, p.negative), occurrence_polarity(&a), "{}", a);
    }

    #[test]
    fn normal_forms_do_not_depend_on_strategy(t in arb_term(), seed in any::<u64>()) {
        let n = reduce(&t, Red::BetaNormalOrder, 2_000);
        let r = normalize_random(&t, &mut StdRng::seed_from_u64(seed), 2_000);
        if n.is_normal() && r.is_normal() {
            prop_assert!(n.result.alpha_eq(&r.result), "{} vs {}", n.result, r.result);
        }
    }

    #[test]
    fn weak_head_expansions_reduce_back(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let v = random::term(&mut rng, 3, &mut Vec::new(), &["a", "b"]);
        let args = [parse_term("\\q. q").unwrap(), Term::var("b")];
        let u = random::weak_head_expansion(&mut rng, &v, k, &args);
        let target = reduce(&v, Red::WeakHead, 1_000);
        let got = reduce(&u, Red::WeakHead, 1_000);
        prop_assert!(target.is_normal() && got.is_normal());
        prop_assert!(got.result.alpha_eq(&target.result), "{} ≻ {} but {} ≻ {}", u, got.result, v, target.result);
    }

    #[test]
    fn beta_and_eta_commute(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let t = random::term_with_redex(&mut rng, 4, &["a", "b"]);
        let p = beta_redexes(&t).choose(&mut rng).cloned().unwrap();
        let v = contract_at(&t, &p, RedexKind::Beta).unwrap();
        let q = positions(&t).choose(&mut rng).cloned().unwrap();
        let s = t.subterm(&q).unwrap().clone();
        let u = t.replace_at(&q, Term::abs("z0", Term::app(s, Term::var("z0")))).unwrap();
        prop_assert!(commute(&u, &v, 6, 5_000).is_some(), "u = {}, v = {}", u, v);
    }

    #[test]
    fn subproof_substitution_preserves_checks(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let items = corpus().checked_subproofs();
        let (_, ws, s) = items.choose(&mut rng).unwrap();
        let mut fo = std::collections::BTreeSet::new();
        let mut so = std::collections::BTreeMap::new();
        for a in [&s.lhs, &s.rhs] {
            fo.extend(a.free_vars().into_iter().filter(|x| !is_upper(x)));
            so.extend(a.so_arities().unwrap());
        }
        let sigma = random::substitution(&mut rng, &ws.sig, &fo, &so);
        let p = substitute_subproof(&s.proof, &sigma);
        prop_assert_eq!(p.skeleton(), s.proof.skeleton());
        prop_assert!(check_subproof(&ws.eqs, &p, &s.lhs.apply(&sigma), &s.rhs.apply(&sigma)).is_ok(), "{} under {:?}", s.name, sigma);
    }

    #[test]
    fn derivation_substitution_preserves_checks(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let items = corpus().checked_derivations();
        let (_, ws, e) = items.choose(&mut rng).unwrap();
        let mut fo = std::collections::BTreeSet::new();
        let mut so = std::collections::BTreeMap::new();
        for a in e.ctx.entries().iter().map(|(_, a)| a).chain([&e.formula]) {
            fo.extend(a.free_vars().into_iter().filter(|x| !is_upper(x)));
            so.extend(a.so_arities().unwrap());
        }
        let sigma = random::substitution(&mut rng, &ws.sig, &fo, &so);
        let d = substitute_derivation(&e.proof, &e.ctx, &e.formula, &sigma).unwrap();
        prop_assert_eq!(d.skeleton(), e.proof.skeleton());
        let r = check_derivation(e.system, &ws.eqs, &d, &e.ctx.apply(&sigma), &e.term, &e.formula.apply(&sigma));
        prop_assert!(r.is_ok(), "{} under {:?}: {:?}", e.name, sigma, r);
    }

    #[test]
    fn reduction_sequences_keep_af2s_types(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let items: Vec<_> = corpus().checked_derivations().into_iter().filter(|(_, _, e)| e.system == System::Af2S).collect();
        let (_, ws, e) = items.choose(&mut rng).unwrap();
        let (mut t, mut d) = (e.term.clone(), e.proof.clone());
        for _ in 0..6 {
            let mut steps: Vec<_> = beta_redexes(&t).into_iter().map(|p| (ReductionKind::Beta, RedexKind::Beta, p)).collect();
            steps.extend(eta_redexes(&t).into_iter().map(|p| (ReductionKind::Eta, RedexKind::Eta, p)));
            let Some((kind, rk, p)) = steps.choose(&mut rng).cloned() else { break };
            d = subject_reduce(&ws.eqs, &d, &e.ctx, &t, &e.formula, kind, &p).unwrap();
            t = contract_at(&t, &p, rk).unwrap();
            let r = check_derivation(System::Af2S, &ws.eqs, &d, &e.ctx, &t, &e.formula);
            prop_assert!(r.is_ok(), "{} after reaching {}: {:?}", e.name, t, r);
        }
    }

    #[test]
    fn conversion_chains_re_check(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let items = corpus().checked_derivations();
        let (_, ws, e) = items.choose(&mut rng).unwrap();
        let (mut sys, mut d) = (e.system, e.proof.clone());
        for _ in 0..4 {
            let next = match sys {
                System::Af2 | System::Af2Eta => System::Af2S,
                System::Af2Sub => System::Af2S,
                System::Af2S => *[System::Af2Sub, System::Af2Eta].choose(&mut rng).unwrap(),
            };
            d = convert(&ws.eqs, &d, sys, next, &e.ctx, &e.term, &e.formula).unwrap();
            sys = next;
            let r = check_derivation(sys, &ws.eqs, &d, &e.ctx, &e.term, &e.formula);
            prop_assert!(r.is_ok(), "{} in {}: {:?}", e.name, sys, r);
        }
    }
}
