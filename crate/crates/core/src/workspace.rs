//! Workspace files: a signature, equations and named objects.
//!
//! ```text
//! sig fun 0/0 fun s/1 pred P/1
//! eqs add(0, y) = y
//! formula Bool := !X. X -> X -> X
//! formula N(x) := !X. (!y. X(y) -> X(s(y))) -> X(0) -> X(x)
//! term two := \f x. f (f x)
//! ctx g := x : P(0), y : P(s(0))
//! subproof ax1 : P(0) <= P(0) := (ax)
//! derive t2 : AF2S empty |- \f x. f (f x) : N(s(s(0))) := (s2 ...)
//! ```
//!
//! A block starts with its keyword in the first column and runs until the
//! next keyword line. Lines starting with `#` are comments. Equations are
//! separated by newlines or `;`. In the headers of `subproof`, `derive`
//! and `formula` blocks a defined name (with arguments for its
//! parameters) stands for its body; proof terms take literal formulas.

use crate::lambda::Term;
use crate::logic::{Equation, EquationSystem, FoTerm, Formula, Signature, Substitution};
use crate::subtyping::{parse_subproof, SubProof};
use crate::syntax::{lex, parse_context, parse_fo_term, parse_formula, parse_sexpr_at, parse_term, ParseError, Tok};
use crate::typing::{parse_derivation, Context, Derivation, System};
use std::fmt;

const KEYWORDS: [&str; 7] = ["sig", "eqs", "formula", "term", "ctx", "subproof", "derive"];

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Formula,
}

impl FormulaDef {
    pub fn instantiate(&self, args: &[FoTerm]) -> Formula {
        let mut sigma = Substitution::default();
        for (p, a) in self.params.iter().zip(args) {
            sigma.fo.insert(p.clone(), a.clone());
        }
        self.body.apply(&sigma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubProofEntry {
    pub name: String,
    pub lhs: Formula,
    pub rhs: Formula,
    pub proof: SubProof,
}

/// A named judgment `Γ ⊢ t : A` in a system, with its derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationEntry {
    pub name: String,
    pub system: System,
    pub ctx_name: String,
    pub ctx: Context,
    pub term: Term,
    pub formula: Formula,
    pub proof: Derivation,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Workspace {
    pub sig: Signature,
    pub eqs: EquationSystem,
    pub formulas: Vec<FormulaDef>,
    pub terms: Vec<(String, Term)>,
    pub contexts: Vec<(String, Context)>,
    pub subproofs: Vec<SubProofEntry>,
    pub derivations: Vec<DerivationEntry>,
}

impl Workspace {
    pub fn formula_def(&self, name: &str) -> Option<&FormulaDef> {
        self.formulas.iter().find(|d| d.name == name)
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn context(&self, name: &str) -> Option<&Context> {
        self.contexts.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn derivation(&self, name: &str) -> Option<&DerivationEntry> {
        self.derivations.iter().find(|d| d.name == name)
    }

    pub fn subproof(&self, name: &str) -> Option<&SubProofEntry> {
        self.subproofs.iter().find(|d| d.name == name)
    }

    /// A formula given by text: a defined name, possibly applied, or a
    /// literal formula.
    pub fn resolve_formula(&self, text: &str) -> Result<Formula, ParseError> {
        let a = parse_formula(text, &self.sig)?;
        self.expand(a).map_err(|m| ParseError::new(1, 1, m))
    }

    /// A term given by text: a defined name or a literal term.
    pub fn resolve_term(&self, text: &str) -> Result<Term, ParseError> {
        match self.term(text.trim()) {
            Some(t) => Ok(t.clone()),
            None => parse_term(text),
        }
    }

    fn expand(&self, a: Formula) -> Result<Formula, String> {
        if let Formula::Var(name, args) | Formula::Pred(name, args) = &a {
            if let Some(def) = self.formula_def(name) {
                if def.params.len() != args.len() {
                    return Err(format!("`{name}` takes {} argument(s), found {}", def.params.len(), args.len()));
                }
                return Ok(def.instantiate(args));
            }
        }
        self.sig.check_formula(&a).map_err(|e| e.to_string())?;
        Ok(a)
    }
}

pub fn parse_workspace(src: &str) -> Result<Workspace, ParseError> {
    let clean: String = src
        .split_inclusive('\n')
        .map(|l| {
            if l.trim_start().starts_with('#') {
                l.chars().map(|c| if c == '\n' { '\n' } else { ' ' }).collect()
            } else {
                l.to_string()
            }
        })
        .collect();
    let src = Source { text: &clean };
    let blocks = src.blocks()?;
    let mut ws = Workspace::default();
    for b in blocks.iter().filter(|b| b.keyword == "sig") {
        src.sig(&mut ws.sig, b.start, b.end)?;
    }
    for b in &blocks {
        match b.keyword {
            "sig" => {}
            "eqs" => src.eqs(&mut ws, b.start, b.end)?,
            "formula" => {
                let (name, rest) = src.named(b.start, b.end, ":=")?;
                let (name, params) = src.params(&name)?;
                if ws.formula_def(&name).is_some() || ws.sig.is_predicate(&name) {
                    return Err(src.error(b.start, format!("duplicate formula name `{name}`")));
                }
                let body = src.formula(&ws, rest, b.end)?;
                ws.formulas.push(FormulaDef { name, params, body });
            }
            "term" => {
                let (name, rest) = src.named(b.start, b.end, ":=")?;
                if ws.term(&name.0).is_some() {
                    return Err(src.error(b.start, format!("duplicate term name `{}`", name.0)));
                }
                let t = src.frag(rest, b.end, parse_term)?;
                ws.terms.push((name.0, t));
            }
            "ctx" => {
                let (name, rest) = src.named(b.start, b.end, ":=")?;
                if ws.context(&name.0).is_some() {
                    return Err(src.error(b.start, format!("duplicate context name `{}`", name.0)));
                }
                let entries = src.frag_opt(rest, b.end, |s| parse_context(s, &ws.sig))?;
                for (_, a) in &entries {
                    ws.sig.check_formula(a).map_err(|e| src.error(rest, e.to_string()))?;
                }
                let c = Context::from_entries(entries).map_err(|m| src.error(rest, m))?;
                ws.contexts.push((name.0, c));
            }
            "subproof" => {
                let (name, rest) = src.named(b.start, b.end, ":")?;
                if ws.subproof(&name.0).is_some() {
                    return Err(src.error(b.start, format!("duplicate subproof name `{}`", name.0)));
                }
                let def = src.find(rest, b.end, ":=")?;
                let le = src.find(rest, def, "<=")?;
                let lhs = src.formula(&ws, rest, le)?;
                let rhs = src.formula(&ws, le + 2, def)?;
                let proof = src.sexpr(def + 2, b.end, |e| parse_subproof(e, &ws.sig))?;
                ws.subproofs.push(SubProofEntry { name: name.0, lhs, rhs, proof });
            }
            "derive" => {
                let entry = src.derive(&ws, b.start, b.end)?;
                if ws.derivation(&entry.name).is_some() {
                    return Err(src.error(b.start, format!("duplicate derivation name `{}`", entry.name)));
                }
                ws.derivations.push(entry);
            }
            _ => unreachable!(),
        }
    }
    Ok(ws)
}

struct Block {
    keyword: &'static str,
    /// Byte range of the body after the keyword.
    start: usize,
    end: usize,
}

struct Source<'a> {
    text: &'a str,
}

impl<'a> Source<'a> {
    fn loc(&self, idx: usize) -> (usize, usize) {
        let before = &self.text[..idx];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    fn error(&self, idx: usize, message: impl Into<String>) -> ParseError {
        let (l, c) = self.loc(idx);
        ParseError::new(l, c, message)
    }

    fn blocks(&self) -> Result<Vec<Block>, ParseError> {
        let mut out: Vec<Block> = Vec::new();
        let mut offset = 0;
        for line in self.text.split_inclusive('\n') {
            let word = line.split(|c: char| c.is_whitespace()).next().unwrap_or("");
            if let Some(kw) = KEYWORDS.iter().find(|k| **k == word) {
                if let Some(last) = out.last_mut() {
                    last.end = offset;
                }
                out.push(Block { keyword: kw, start: offset + kw.len(), end: self.text.len() });
            } else if out.is_empty() && !line.trim().is_empty() {
                return Err(self.error(offset + (line.len() - line.trim_start().len()), format!("expected one of {}", KEYWORDS.join(", "))));
            }
            offset += line.len();
        }
        Ok(out)
    }

    /// Runs `f` on the trimmed text of `[start, end)`, mapping positions back.
    fn frag<T>(&self, start: usize, end: usize, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let s = &self.text[start..end];
        if s.trim().is_empty() {
            return Err(self.error(start, "missing text"));
        }
        self.frag_opt(start, end, f)
    }

    fn frag_opt<T>(&self, start: usize, end: usize, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let s = &self.text[start..end];
        let lead = s.len() - s.trim_start().len();
        let (l, c) = self.loc(start + lead);
        f(s.trim()).map_err(|e| e.offset(l, c))
    }

    fn find(&self, start: usize, end: usize, pat: &str) -> Result<usize, ParseError> {
        self.text[start..end].find(pat).map(|i| start + i).ok_or_else(|| self.error(start, format!("expected `{pat}`")))
    }

    /// `name <sep> rest`: the name with its position, and the index after `sep`.
    fn named(&self, start: usize, end: usize, sep: &str) -> Result<((String, usize), usize), ParseError> {
        let at = self.find(start, end, sep)?;
        let raw = &self.text[start..at];
        let name = raw.trim();
        let pos = start + (raw.len() - raw.trim_start().len());
        if name.is_empty() {
            return Err(self.error(pos, "missing name"));
        }
        Ok(((name.to_string(), pos), at + sep.len()))
    }

    /// Splits `N(x, y)` into a name and its parameters.
    fn params(&self, name: &(String, usize)) -> Result<(String, Vec<String>), ParseError> {
        let toks = lex(&name.0).map_err(|e| {
            let (l, c) = self.loc(name.1);
            e.offset(l, c)
        })?;
        let err = |i: usize, m: &str| {
            let (_, l, c) = toks[i];
            let (l0, c0) = self.loc(name.1);
            ParseError::new(l, c, m).offset(l0, c0)
        };
        let Tok::Ident(n) = &toks[0].0 else { return Err(err(0, "expected a name")) };
        let mut params = Vec::new();
        let mut i = 1;
        if toks[i].0 == Tok::LParen {
            i += 1;
            loop {
                match &toks[i].0 {
                    Tok::Ident(p) if !crate::syntax::is_upper(p) => params.push(p.clone()),
                    _ => return Err(err(i, "expected a first-order parameter")),
                }
                i += 1;
                match toks[i].0 {
                    Tok::Comma => i += 1,
                    Tok::RParen => {
                        i += 1;
                        break;
                    }
                    _ => return Err(err(i, "expected `,` or `)`")),
                }
            }
        }
        if toks[i].0 != Tok::Eof {
            return Err(err(i, "unexpected text after the name"));
        }
        Ok((n.clone(), params))
    }

    fn formula(&self, ws: &Workspace, start: usize, end: usize) -> Result<Formula, ParseError> {
        let a = self.frag(start, end, |s| parse_formula(s, &ws.sig))?;
        ws.expand(a).map_err(|m| self.error(start + (self.text[start..end].len() - self.text[start..end].trim_start().len()), m))
    }

    fn sexpr<T>(&self, start: usize, end: usize, f: impl FnOnce(&crate::syntax::SExpr) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let s = &self.text[start..end];
        if s.trim().is_empty() {
            return Err(self.error(start, "missing proof term"));
        }
        let (l, c) = self.loc(start);
        let e = parse_sexpr_at(s, l, c)?;
        f(&e)
    }

    fn sig(&self, sig: &mut Signature, start: usize, end: usize) -> Result<(), ParseError> {
        let (l0, c0) = self.loc(start);
        let toks = lex(&self.text[start..end]).map_err(|e| e.offset(l0, c0))?;
        let err = |i: usize, m: String| {
            let (_, l, c) = toks[i];
            ParseError::new(l, c, m).offset(l0, c0)
        };
        let mut i = 0;
        while toks[i].0 != Tok::Eof {
            let kind = match &toks[i].0 {
                Tok::Ident(k) if k == "fun" || k == "pred" => k.clone(),
                t => return Err(err(i, format!("expected `fun` or `pred`, found {t}"))),
            };
            let Tok::Ident(name) = &toks[i + 1].0 else { return Err(err(i + 1, "expected a symbol".into())) };
            if toks[i + 2].0 != Tok::Slash {
                return Err(err(i + 2, format!("expected `/`, found {}", toks[i + 2].0)));
            }
            let arity: usize = match &toks[i + 3].0 {
                Tok::Ident(n) => n.parse().map_err(|_| err(i + 3, format!("bad arity `{n}`")))?,
                t => return Err(err(i + 3, format!("expected an arity, found {t}"))),
            };
            let declared = sig.functions.get(name).or(sig.predicates.get(name));
            if declared.is_some() {
                return Err(err(i + 1, format!("symbol `{name}` declared twice")));
            }
            if kind == "fun" {
                if crate::syntax::is_upper(name) {
                    return Err(err(i + 1, format!("function symbol `{name}` must not start uppercase")));
                }
                sig.functions.insert(name.clone(), arity);
            } else {
                sig.predicates.insert(name.clone(), arity);
            }
            i += 4;
        }
        Ok(())
    }

    fn eqs(&self, ws: &mut Workspace, start: usize, end: usize) -> Result<(), ParseError> {
        let mut pos = start;
        for piece in self.text[start..end].split(['\n', ';']) {
            let (a, b) = (pos, pos + piece.len());
            pos = b + 1;
            if piece.trim().is_empty() {
                continue;
            }
            let eq = self.find(a, b, "=")?;
            let left = self.frag(a, eq, |s| parse_fo_term(s, &ws.sig))?;
            let right = self.frag(eq + 1, b, |s| parse_fo_term(s, &ws.sig))?;
            for t in [&left, &right] {
                ws.sig.check_term(t).map_err(|e| self.error(a, e.to_string()))?;
            }
            ws.eqs.equations.push(Equation::new(left, right));
        }
        Ok(())
    }

    /// `name : system ctx |- term : formula := sexpr`
    fn derive(&self, ws: &Workspace, start: usize, end: usize) -> Result<DerivationEntry, ParseError> {
        let (name, rest) = self.named(start, end, ":")?;
        let def = self.find(rest, end, ":=")?;
        let turn = self.find(rest, def, "|-")?;
        let head: Vec<&str> = self.text[rest..turn].split_whitespace().collect();
        let [system, ctx_name] = head[..] else {
            return Err(self.error(rest, "expected `<system> <context> |-`"));
        };
        let system: System = system.parse().map_err(|m: String| self.error(rest, m))?;
        let ctx = ws.context(ctx_name).cloned().ok_or_else(|| self.error(rest, format!("unknown context `{ctx_name}`")))?;
        let colon = self.find(turn + 2, def, ":")?;
        let term = self.frag(turn + 2, colon, parse_term)?;
        let formula = self.formula(ws, colon + 1, def)?;
        let proof = self.sexpr(def + 2, end, |e| parse_derivation(e, &ws.sig))?;
        Ok(DerivationEntry { name: name.0, system, ctx_name: ctx_name.to_string(), ctx, term, formula, proof })
    }
}

impl fmt::Display for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.sig.functions.is_empty() || !self.sig.predicates.is_empty() {
            f.write_str("sig")?;
            for (n, a) in &self.sig.functions {
                write!(f, " fun {n}/{a}")?;
            }
            for (n, a) in &self.sig.predicates {
                write!(f, " pred {n}/{a}")?;
            }
            writeln!(f)?;
        }
        if !self.eqs.is_empty() {
            writeln!(f, "eqs")?;
            for e in &self.eqs.equations {
                writeln!(f, "  {e}")?;
            }
        }
        for d in &self.formulas {
            if d.params.is_empty() {
                writeln!(f, "formula {} := {}", d.name, d.body)?;
            } else {
                writeln!(f, "formula {}({}) := {}", d.name, d.params.join(", "), d.body)?;
            }
        }
        for (n, t) in &self.terms {
            writeln!(f, "term {n} := {t}")?;
        }
        for (n, c) in &self.contexts {
            writeln!(f, "ctx {n} := {c}")?;
        }
        for s in &self.subproofs {
            writeln!(f, "subproof {} : {} <= {} :=\n  {}", s.name, s.lhs, s.rhs, s.proof)?;
        }
        for d in &self.derivations {
            writeln!(f, "derive {} : {} {} |- {} : {} :=\n  {}", d.name, d.system, d.ctx_name, d.term, d.formula, d.proof)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# numerals
sig fun s/1 fun 0/0 pred N/1
eqs add(0,y) = y
sig fun add/2
formula Bool := !X. X -> X -> X
formula Nat(x) := !X. (!y. X(y) -> X(s(y))) -> X(0) -> X(x)
term two := \\f x. f (f x)
ctx empty :=
ctx g := x : N(0)
subproof refl : N(0) <= N(0) := (ax)
derive id : AF2 g |- x : N(0) := (r1)
derive tt : AF2S empty |- \\x y. x : Bool :=
  (s2 () {Bool} {Bool} ; comment
      (s1 x () (ax)) (ax))
";

    #[test]
    fn parses_blocks() {
        let ws = parse_workspace(SMALL).unwrap();
        assert_eq!(ws.eqs.equations.len(), 1);
        assert_eq!(ws.sig.functions.len(), 3);
        assert_eq!(ws.formula_def("Bool").unwrap().body, parse_formula("!X. X -> (X -> X)", &ws.sig).unwrap());
        assert_eq!(
            ws.resolve_formula("Nat(s(0))").unwrap(),
            parse_formula("!X. (!y. X(y) -> X(s(y))) -> X(0) -> X(s(0))", &ws.sig).unwrap()
        );
        assert_eq!(ws.derivations.len(), 2);
        assert!(ws.context("empty").unwrap().is_empty());
        assert_eq!(ws.resolve_term("two").unwrap(), parse_term("\\f x. f (f x)").unwrap());
    }

    #[test]
    fn round_trip() {
        let ws = parse_workspace(SMALL).unwrap();
        let printed = ws.to_string();
        let again = parse_workspace(&printed).unwrap();
        assert_eq!(ws, again, "{printed}");
        assert_eq!(again.to_string(), printed);
    }

    fn err(src: &str) -> ParseError {
        parse_workspace(src).unwrap_err()
    }

    #[test]
    fn errors_carry_positions() {
        let e = err("sig pred P/1\nformula A := !x P(x)");
        assert_eq!((e.line, e.col), (2, 18), "{e}");
        let e = err("sig fun s/1 fun s/2");
        assert_eq!((e.line, e.col), (1, 17), "{e}");
        let e = err("sig pred P/1\nformula A := P(c, d)");
        assert_eq!(e.line, 2, "{e}");
        let e = err("term a := \\x. x\nterm a := \\y. y");
        assert!(e.message.contains("duplicate"), "{e}");
        let e = err("hello");
        assert_eq!((e.line, e.col), (1, 1));
        let e = err("ctx g :=\nderive d : AF2 h |- x : X := (r1)");
        assert!(e.message.contains("unknown context"), "{e}");
        let e = err("ctx g :=\nderive d : AF2 g |- x : X :=\n  (r1");
        assert_eq!(e.line, 3, "{e}");
    }
}
