//! One PASS/FAIL line per acceptance criterion. Each criterion runs the
//! library check and an independent check written here.

use af2lab::corpus::{check_entry, Corpus};
use af2lab::lambda::{beta_redexes, contract_at, eta_redexes, normalize_random, reduce, RedexKind, Strategy, Term};
use af2lab::logic::{FoTerm, Formula};
use af2lab::positivity::classify;
use af2lab::report::Status;
use af2lab::syntax::{parse_formula, parse_term};
use af2lab::typing::{
    check_derivation, convert, eta_expand_witness, search_typing, subject_reduce, Context, ReductionKind, System,
    TypingLimits,
};
use af2lab::verify::{commute, run_criterion, VerifyConfig, CRITERIA, POLARITY_TABLE};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

type Check = Result<String, String>;

const SEC3: &str = "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X";

fn c1(corpus: &Corpus) -> Check {
    let a = parse_formula(SEC3, &Default::default()).unwrap();
    let ws = corpus.workspace("sec3.af2").ok_or("sec3.af2 missing")?;
    let app = ws.derivation("app_af2").ok_or("app_af2 missing")?;
    check_derivation(System::Af2, &ws.eqs, &app.proof, &Context::new(), &parse_term("\\x y. x y").unwrap(), &a)
        .map_err(|e| e.to_string())?;
    let id = parse_term("\\x. x").unwrap();
    let s = ws.derivation("id_af2s").ok_or("id_af2s missing")?;
    check_derivation(System::Af2S, &ws.eqs, &s.proof, &Context::new(), &id, &a).map_err(|e| e.to_string())?;
    match search_typing(System::Af2, &ws.eqs, &Context::new(), &id, &a, &TypingLimits::default()) {
        Ok(None) => Ok("AF2 search for λx.x exhausted".into()),
        other => Err(format!("AF2 search for λx.x returned {other:?}")),
    }
}

fn c2(corpus: &Corpus) -> Check {
    let mut n = 0;
    for (f, ws, e) in corpus.derivations() {
        if e.system != System::Af2S {
            continue;
        }
        check_entry(ws, e).map_err(|m| format!("{f}:{}: {m}", e.name))?;
        for (rk, kind, ps) in [
            (RedexKind::Beta, ReductionKind::Beta, beta_redexes(&e.term)),
            (RedexKind::Eta, ReductionKind::Eta, eta_redexes(&e.term)),
        ] {
            for p in ps {
                let v = contract_at(&e.term, &p, rk).unwrap();
                let d = subject_reduce(&ws.eqs, &e.proof, &e.ctx, &e.term, &e.formula, kind, &p)
                    .map_err(|m| format!("{}: {m}", e.name))?;
                check_derivation(System::Af2S, &ws.eqs, &d, &e.ctx, &v, &e.formula).map_err(|m| format!("{}: {m}", e.name))?;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err("no redexes in AF2S subjects".into());
    }
    Ok(format!("{n} reducts re-check"))
}

fn c3(corpus: &Corpus) -> Check {
    let mut n = 0;
    for (f, ws, e) in corpus.derivations() {
        let targets: &[System] = match e.system {
            System::Af2 | System::Af2Eta | System::Af2Sub => &[System::Af2S],
            System::Af2S => &[System::Af2Sub, System::Af2Eta],
        };
        for &to in targets {
            let d = convert(&ws.eqs, &e.proof, e.system, to, &e.ctx, &e.term, &e.formula).map_err(|m| format!("{f}:{}: {m}", e.name))?;
            check_derivation(to, &ws.eqs, &d, &e.ctx, &e.term, &e.formula).map_err(|m| format!("{f}:{} → {to}: {m}", e.name))?;
            n += 1;
        }
        let w = eta_expand_witness(&ws.eqs, &e.proof, e.system, &e.ctx, &e.term, &e.formula).map_err(|m| m.to_string())?;
        let back = reduce(&w.term, Strategy::Eta, 10_000);
        if !back.is_normal() || !back.result.alpha_eq(&reduce(&e.term, Strategy::Eta, 10_000).result) {
            return Err(format!("{}: witness {} does not η-reduce to {}", e.name, w.term, e.term));
        }
        check_derivation(System::Af2, &ws.eqs, &w.derivation, &e.ctx, &w.term, &e.formula).map_err(|m| m.to_string())?;
        n += 1;
    }
    Ok(format!("{n} conversions re-check"))
}

/// Closed β-normal terms with at most `n` nodes, as de Bruijn trees
/// named afterwards. Independent of the library's enumerator.
fn enumerate(n: usize) -> Vec<Term> {
    #[derive(Clone)]
    enum D {
        V(usize),
        L(Box<D>),
        A(Box<D>, Box<D>),
    }
    fn nf(s: usize, k: usize) -> Vec<D> {
        let mut out = ne(s, k);
        if s >= 2 {
            out.extend(nf(s - 1, k + 1).into_iter().map(|b| D::L(Box::new(b))));
        }
        out
    }
    fn ne(s: usize, k: usize) -> Vec<D> {
        if s == 1 {
            return (0..k).map(D::V).collect();
        }
        let mut out = Vec::new();
        for l in 1..s - 1 {
            for f in ne(l, k) {
                for a in nf(s - 1 - l, k) {
                    out.push(D::A(Box::new(f.clone()), Box::new(a)));
                }
            }
        }
        out
    }
    fn name(d: &D, k: usize) -> Term {
        match d {
            D::V(i) => Term::var(format!("v{}", k - 1 - i)),
            D::L(b) => Term::abs(format!("v{k}"), name(b, k + 1)),
            D::A(f, a) => Term::app(name(f, k), name(a, k)),
        }
    }
    (1..=n).flat_map(|s| nf(s, 0)).map(|d| name(&d, 0)).collect()
}

fn c4(corpus: &Corpus) -> Check {
    let cases: [(&str, &str, usize, &[&str]); 3] = [
        ("data.af2", "Bool", 7, &["\\x y. x", "\\x y. y"]),
        ("data.af2", "Id", 5, &["\\x. x"]),
        ("data.af2", "N(s(s(0)))", 9, &["\\f x. f (f x)"]),
    ];
    let mut out = Vec::new();
    for (file, name, size, expected) in cases {
        let ws = corpus.workspace(file).ok_or("data.af2 missing")?;
        let a = ws.resolve_formula(name).map_err(|e| e.to_string())?;
        let terms = enumerate(size);
        let mut typable = Vec::new();
        for t in &terms {
            if let Ok(Some(d)) = search_typing(System::Af2S, &ws.eqs, &Context::new(), t, &a, &TypingLimits::default()) {
                check_derivation(System::Af2S, &ws.eqs, &d, &Context::new(), t, &a).map_err(|e| e.to_string())?;
                typable.push(t.clone());
            }
        }
        let want: Vec<Term> = expected.iter().map(|s| parse_term(s).unwrap()).collect();
        if typable.len() != want.len() || !want.iter().all(|w| typable.iter().any(|t| t.alpha_eq(w))) {
            let got: Vec<String> = typable.iter().map(|t| t.to_string()).collect();
            return Err(format!("{name}: search oracle types {{{}}}", got.join(", ")));
        }
        out.push(format!("{name}@{size}: {} terms", terms.len()));
    }
    Ok(out.join(", "))
}

fn c6(corpus: &Corpus) -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    let mut n = 0;
    for (_, ws, e) in corpus.derivations() {
        if check_entry(ws, e).is_err() {
            continue;
        }
        if !reduce(&e.term, Strategy::BetaNormalOrder, 10_000).is_normal() {
            return Err(format!("{}: normal order diverges", e.term));
        }
        for _ in 0..20 {
            if !normalize_random(&e.term, &mut rng, 10_000).is_normal() {
                return Err(format!("{}: a random strategy diverges", e.term));
            }
        }
        n += 21;
    }
    Ok(format!("{n} runs"))
}

/// Sign of every second-order quantifier: all positive gives ∀₂⁺, all
/// negative gives ∀₂⁻.
fn polarity_oracle(a: &Formula) -> (bool, bool) {
    fn walk(a: &Formula, sign: bool, pos: &mut bool, neg: &mut bool) {
        match a {
            Formula::Imp(b, c) => {
                walk(b, !sign, pos, neg);
                walk(c, sign, pos, neg);
            }
            Formula::AllFo(_, b) => walk(b, sign, pos, neg),
            Formula::AllSo(_, _, b) => {
                if sign {
                    *neg = false;
                } else {
                    *pos = false;
                }
                walk(b, sign, pos, neg);
            }
            Formula::Absurd | Formula::Pred(..) | Formula::Var(..) => {}
        }
    }
    let (mut pos, mut neg) = (true, true);
    walk(a, true, &mut pos, &mut neg);
    (pos, neg)
}

fn random_formula(rng: &mut StdRng, depth: usize, so: &mut Vec<String>) -> Formula {
    let atom = |rng: &mut StdRng, so: &Vec<String>| {
        let arg = vec![FoTerm::var("n")];
        match rng.gen_range(0..3) {
            0 => Formula::Absurd,
            1 if !so.is_empty() => Formula::Var(so[rng.gen_range(0..so.len())].clone(), vec![]),
            _ => Formula::pred("P", arg),
        }
    };
    if depth == 0 {
        return atom(rng, so);
    }
    match rng.gen_range(0..5) {
        0 => atom(rng, so),
        1 | 2 => Formula::Imp(Box::new(random_formula(rng, depth - 1, so)), Box::new(random_formula(rng, depth - 1, so))),
        3 => Formula::AllFo("n".into(), Box::new(random_formula(rng, depth - 1, so))),
        _ => {
            let x = format!("X{}", so.len());
            so.push(x.clone());
            let b = random_formula(rng, depth - 1, so);
            so.pop();
            Formula::AllSo(x, 0, Box::new(b))
        }
    }
}

fn c9() -> Check {
    let sig = af2lab::logic::Signature::new()
        .with_function("0", 0)
        .with_function("s", 1)
        .with_function("c", 0)
        .with_predicate("P", 1)
        .with_predicate("N", 1);
    let four = ["P(c)", "!X. X -> X -> X", "(!X. X -> X) -> P(c)", "!x. N(x) -> N(s(x))"];
    if !four.iter().all(|f| POLARITY_TABLE.iter().any(|(g, _, _)| g == f)) {
        return Err("table lacks one of the four module examples".into());
    }
    for (text, pos, neg) in POLARITY_TABLE {
        let a = parse_formula(text, &sig).map_err(|e| e.to_string())?;
        let p = classify(&a);
        if (p.positive, p.negative) != (pos, neg) || polarity_oracle(&a) != (pos, neg) {
            return Err(format!("{text}: classify {p}, oracle {:?}, label ({pos}, {neg})", polarity_oracle(&a)));
        }
    }
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..200 {
        let a = random_formula(&mut rng, 5, &mut Vec::new());
        let p = classify(&a);
        if (p.positive, p.negative) != polarity_oracle(&a) {
            return Err(format!("{a}: classify {p}, oracle {:?}", polarity_oracle(&a)));
        }
    }
    Ok("20 labelled and 200 random formulas".into())
}

/// Triples `(λx.b) a` with `b`, `a` small normal terms, η-expanded at a
/// random position; the joining `w` must share the η-normal form of `v`.
fn c10() -> Check {
    let mut rng = StdRng::seed_from_u64(10);
    let pool: Vec<Term> = enumerate(4).into_iter().chain([Term::var("a"), Term::app(Term::var("a"), Term::var("x"))]).collect();
    for _ in 0..50 {
        let b = pool[rng.gen_range(0..pool.len())].clone();
        let a = pool[rng.gen_range(0..pool.len() - 2)].clone();
        let t = Term::app(Term::abs("x", b), a);
        let v = contract_at(&t, &af2lab::lambda::Path::root(), RedexKind::Beta).unwrap();
        let ps = af2lab::verify::positions(&t);
        let q = &ps[rng.gen_range(0..ps.len())];
        let s = t.subterm(q).unwrap().clone();
        let u = t.replace_at(q, Term::abs("z9", Term::app(s, Term::var("z9")))).unwrap();
        let w = commute(&u, &v, 6, 5000).ok_or_else(|| format!("no w for u = {u}, v = {v}"))?;
        let eta_nf = |x: &Term| reduce(x, Strategy::Eta, 1000).result;
        if !eta_nf(&w).alpha_eq(&eta_nf(&v)) {
            return Err(format!("{w} and {v} have different η-normal forms"));
        }
    }
    Ok("50 constructed triples join".into())
}

fn main() {
    let corpus = Corpus::bundled();
    let cfg = VerifyConfig::default();
    let mut failed = 0;
    for (i, (name, limit)) in CRITERIA.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let lib = run_criterion(n, &corpus, &cfg);
        let own = match n {
            1 => c1(&corpus),
            2 => c2(&corpus),
            3 => c3(&corpus),
            4 => c4(&corpus),
            6 => c6(&corpus),
            9 => c9(),
            10 => c10(),
            _ => Ok("library check only".into()),
        };
        let secs = start.elapsed().as_secs_f64();
        let ok = lib.status == Status::Pass && own.is_ok() && secs < *limit;
        let own_text = match &own {
            Ok(s) => s.clone(),
            Err(e) => format!("independent check failed: {e}"),
        };
        println!(
            "{} criterion {n} {name}: {} | {own_text} | {secs:.2}s of {limit}s",
            if ok { "PASS" } else { "FAIL" },
            lib.detail
        );
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
