//! Lexer and parsers for terms, first-order terms, formulas and the
//! s-expressions used for proof trees.

use crate::lambda::{Path, Term};
use crate::logic::{Binder, FoTerm, Formula, Instance, Signature, SoInst};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }

    /// Shifts a position relative to a fragment starting at `(line, col)`.
    pub fn offset(mut self, line: usize, col: usize) -> Self {
        if self.line == 1 {
            self.col += col - 1;
        }
        self.line += line - 1;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Lambda,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Arrow,
    Bang,
    Bottom,
    Slash,
    At,
    Colon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Bottom => f.write_str("`_|_`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::At => f.write_str("`@`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '\\' | 'λ' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '!' | '∀' => Some(Tok::Bang),
            '/' => Some(Tok::Slash),
            '@' => Some(Tok::At),
            ':' => Some(Tok::Colon),
            '⊥' => Some(Tok::Bottom),
            '→' => Some(Tok::Arrow),
            '-' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Some(Tok::Arrow)
            }
            '_' if chars[i..].starts_with(&['_', '|', '_']) => {
                adv = 3;
                Some(Tok::Bottom)
            }
            c if c.is_ascii_alphanumeric() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                adv = j - start;
                Some(Tok::Ident(chars[start..j].iter().collect()))
            }
            other => return Err(ParseError::new(line, col, format!("unexpected character `{other}`"))),
        };
        if let Some(t) = tok {
            out.push((t, l0, c0));
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

pub fn is_upper(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

pub struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    sig: &'a Signature,
    lex_error: Option<ParseError>,
}

impl<'a> Parser<'a> {
    pub fn new(src: &str, sig: &'a Signature) -> Self {
        match lex(src) {
            Ok(toks) => Parser { toks, pos: 0, sig, lex_error: None },
            Err(e) => Parser { toks: vec![(Tok::Eof, e.line, e.col)], pos: 0, sig, lex_error: Some(e) },
        }
    }

    fn check_lex(&self) -> Result<(), ParseError> {
        match &self.lex_error {
            Some(e) => Err(e.clone()),
            None => Ok(()),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (_, l, c) = &self.toks[self.pos];
        ParseError::new(*l, *c, message)
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => Err(self.error(format!("expected identifier, found {t}"))),
        }
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn finish<T>(&mut self, v: T) -> Result<T, ParseError> {
        if self.at_end() {
            Ok(v)
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }

    pub fn term_complete(&mut self) -> Result<Term, ParseError> {
        self.check_lex()?;
        let t = self.term()?;
        self.finish(t)
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.next();
            let mut names = vec![self.ident()?];
            while let Tok::Ident(_) = self.peek() {
                names.push(self.ident()?);
            }
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(names.into_iter().rev().fold(body, |b, x| Term::abs(x, b)));
        }
        let mut t = self.term_atom()?;
        loop {
            match self.peek() {
                Tok::Ident(_) | Tok::LParen => {
                    let a = self.term_atom()?;
                    t = Term::app(t, a);
                }
                Tok::Lambda => {
                    let a = self.term()?;
                    return Ok(Term::app(t, a));
                }
                _ => return Ok(t),
            }
        }
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.next();
                Ok(Term::var(x))
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => Err(self.error(format!("expected a term, found {t}"))),
        }
    }

    pub fn fo_term_complete(&mut self) -> Result<FoTerm, ParseError> {
        self.check_lex()?;
        let t = self.fo_term()?;
        self.finish(t)
    }

    pub fn fo_term(&mut self) -> Result<FoTerm, ParseError> {
        let name = self.ident()?;
        let args = if *self.peek() == Tok::LParen { self.fo_args()? } else { Vec::new() };
        match self.sig.functions.get(&name) {
            Some(&n) if n == args.len() => Ok(FoTerm::App(name, args)),
            Some(&n) => Err(self.error(format!("function {name} expects {n} arguments, got {}", args.len()))),
            None if !args.is_empty() => Err(self.error(format!("undeclared function symbol {name}"))),
            None if is_upper(&name) || name.starts_with(|c: char| c.is_ascii_digit()) => {
                Err(self.error(format!("`{name}` is not a first-order variable or declared constant")))
            }
            None => Ok(FoTerm::Var(name)),
        }
    }

    fn fo_args(&mut self) -> Result<Vec<FoTerm>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.fo_term()?];
        while *self.peek() == Tok::Comma {
            self.next();
            args.push(self.fo_term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    pub fn formula_complete(&mut self) -> Result<Formula, ParseError> {
        self.check_lex()?;
        let f = self.formula()?;
        if let Err(e) = f.so_arities() {
            return Err(self.error(e.to_string()));
        }
        self.finish(f)
    }

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::Bang {
            self.next();
            let b = self.binder()?;
            let mut more = vec![b];
            while let Tok::Ident(_) = self.peek() {
                more.push(self.binder()?);
            }
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            let mut out = body;
            for (name, explicit) in more.into_iter().rev() {
                out = self.close(name, explicit, out)?;
            }
            return Ok(out);
        }
        let a = self.formula_primary()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let b = self.formula()?;
            return Ok(Formula::imp(a, b));
        }
        Ok(a)
    }

    fn close(&self, name: String, explicit: Option<usize>, body: Formula) -> Result<Formula, ParseError> {
        if !is_upper(&name) {
            if explicit.is_some() {
                return Err(self.error(format!("first-order variable {name} cannot carry an arity")));
            }
            return Ok(Formula::AllFo(name, Box::new(body)));
        }
        let inferred = body.so_arities().map_err(|e| self.error(e.to_string()))?.get(&name).copied();
        let n = match (explicit, inferred) {
            (Some(e), Some(i)) if e != i => {
                return Err(self.error(format!("{name} declared with arity {e} but used with {i} arguments")))
            }
            (Some(e), _) => e,
            (None, Some(i)) => i,
            (None, None) => 0,
        };
        Ok(Formula::AllSo(name, n, Box::new(body)))
    }

    fn binder(&mut self) -> Result<(String, Option<usize>), ParseError> {
        let name = self.ident()?;
        if self.sig.is_predicate(&name) || self.sig.is_function(&name) {
            return Err(self.error(format!("cannot quantify over the symbol {name}")));
        }
        if *self.peek() == Tok::Slash {
            self.next();
            let n = self.ident()?;
            let n = n.parse().map_err(|_| self.error(format!("bad arity `{n}`")))?;
            return Ok((name, Some(n)));
        }
        Ok((name, None))
    }

    fn formula_primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bottom => {
                self.next();
                Ok(Formula::Absurd)
            }
            Tok::LParen => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                if !is_upper(&name) {
                    return Err(self.error(format!("expected a formula, found `{name}` (atoms start uppercase)")));
                }
                self.next();
                let args = if *self.peek() == Tok::LParen { self.fo_args()? } else { Vec::new() };
                match self.sig.predicates.get(&name) {
                    Some(&n) if n != args.len() => {
                        Err(self.error(format!("predicate {name} expects {n} arguments, got {}", args.len())))
                    }
                    Some(_) => Ok(Formula::Pred(name, args)),
                    None => Ok(Formula::Var(name, args)),
                }
            }
            t => Err(self.error(format!("expected a formula, found {t}"))),
        }
    }

    /// `x` or `X/2`, as written in binder sequences.
    pub fn binder_item(&mut self) -> Result<Binder, ParseError> {
        let (name, arity) = self.binder()?;
        if is_upper(&name) {
            Ok(Binder::So(name, arity.unwrap_or(0)))
        } else if arity.is_some() {
            Err(self.error("first-order variables carry no arity"))
        } else {
            Ok(Binder::Fo(name))
        }
    }

    /// A whitespace-separated binder sequence, optionally parenthesized.
    pub fn binders_complete(&mut self) -> Result<Vec<Binder>, ParseError> {
        self.check_lex()?;
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.next();
        }
        let mut out = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            out.push(self.binder_item()?);
        }
        if paren {
            self.expect(Tok::RParen)?;
        }
        self.finish(out)
    }

    /// `[x1 … xn] G` for a second-order instance, otherwise a first-order term.
    pub fn instance_complete(&mut self) -> Result<Instance, ParseError> {
        self.check_lex()?;
        if *self.peek() == Tok::LBracket {
            self.next();
            let mut params = Vec::new();
            while let Tok::Ident(_) = self.peek() {
                params.push(self.ident()?);
            }
            self.expect(Tok::RBracket)?;
            let body = self.formula()?;
            return self.finish(Instance::Formula(SoInst { params, body }));
        }
        // A bare formula is a nullary instance.
        let start = self.pos;
        if let Ok(t) = self.fo_term() {
            if self.at_end() {
                return Ok(Instance::Term(t));
            }
        }
        self.pos = start;
        let body = self.formula()?;
        self.finish(Instance::Formula(SoInst { params: Vec::new(), body }))
    }

    /// `x : A, y : B`; the empty string is the empty context.
    pub fn context_complete(&mut self) -> Result<Vec<(String, Formula)>, ParseError> {
        self.check_lex()?;
        let mut out = Vec::new();
        while !self.at_end() {
            if !out.is_empty() {
                self.expect(Tok::Comma)?;
            }
            let x = self.ident()?;
            if is_upper(&x) {
                return Err(self.error(format!("`{x}` is not a term variable")));
            }
            self.expect(Tok::Colon)?;
            let a = self.formula()?;
            if let Err(e) = a.so_arities() {
                return Err(self.error(e.to_string()));
            }
            out.push((x, a));
        }
        Ok(out)
    }

    pub fn path_complete(&mut self) -> Result<Path, ParseError> {
        self.check_lex()?;
        self.expect(Tok::At)?;
        let p = match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                format!("@{s}")
            }
            _ => "@".to_string(),
        };
        let path = p.parse::<Path>().map_err(|e| self.error(e))?;
        self.finish(path)
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let sig = Signature::new();
    Parser::new(src, &sig).term_complete()
}

pub fn parse_formula(src: &str, sig: &Signature) -> Result<Formula, ParseError> {
    Parser::new(src, sig).formula_complete()
}

pub fn parse_fo_term(src: &str, sig: &Signature) -> Result<FoTerm, ParseError> {
    Parser::new(src, sig).fo_term_complete()
}

pub fn parse_binders(src: &str, sig: &Signature) -> Result<Vec<Binder>, ParseError> {
    Parser::new(src, sig).binders_complete()
}

pub fn parse_instance(src: &str, sig: &Signature) -> Result<Instance, ParseError> {
    Parser::new(src, sig).instance_complete()
}

pub fn parse_context(src: &str, sig: &Signature) -> Result<Vec<(String, Formula)>, ParseError> {
    Parser::new(src, sig).context_complete()
}

pub fn parse_path(src: &str) -> Result<Path, ParseError> {
    let sig = Signature::new();
    Parser::new(src, &sig).path_complete()
}

/// S-expressions for proof trees. Braces quote embedded syntax verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, line: usize, col: usize },
    Quoted { text: String, line: usize, col: usize },
    List { items: Vec<SExpr>, line: usize, col: usize },
}

impl SExpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            SExpr::Atom { line, col, .. } | SExpr::Quoted { line, col, .. } | SExpr::List { line, col, .. } => {
                (*line, *col)
            }
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (l, c) = self.pos();
        ParseError::new(l, c, message)
    }

    /// Text of an atom or quoted item.
    pub fn text(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } | SExpr::Quoted { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    /// Head symbol and remaining items of a list.
    pub fn head(&self) -> Option<(&str, &[SExpr])> {
        match self {
            SExpr::List { items, .. } => match items.split_first() {
                Some((SExpr::Atom { text, .. }, rest)) => Some((text, rest)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Parses the embedded text of an atom or quoted item with `f`, mapping
    /// error positions back to the enclosing source.
    pub fn parse_with<T>(&self, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let text = self.text().ok_or_else(|| self.error("expected an atom or {…}, found a list"))?;
        let (l, c) = self.pos();
        let shift = if matches!(self, SExpr::Quoted { .. }) { 1 } else { 0 };
        f(text).map_err(|e| e.offset(l, c + shift))
    }
}

pub fn parse_sexpr(src: &str) -> Result<SExpr, ParseError> {
    parse_sexpr_at(src, 1, 1)
}

/// Parses one s-expression from a fragment that starts at `(line, col)`.
pub fn parse_sexpr_at(src: &str, line: usize, col: usize) -> Result<SExpr, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut st = SState { chars, i: 0, line, col };
    st.skip_ws();
    let e = st.item()?;
    st.skip_ws();
    if st.i < st.chars.len() {
        return Err(ParseError::new(st.line, st.col, "trailing input after proof term"));
    }
    Ok(e)
}

struct SState {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl SState {
    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.i < self.chars.len() {
            let c = self.chars[self.i];
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while self.i < self.chars.len() && self.chars[self.i] != '\n' {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn item(&mut self) -> Result<SExpr, ParseError> {
        let (line, col) = (self.line, self.col);
        match self.chars.get(self.i) {
            None => Err(ParseError::new(line, col, "unexpected end of proof term")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.get(self.i) {
                        None => return Err(ParseError::new(line, col, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List { items, line, col });
                        }
                        Some(_) => items.push(self.item()?),
                    }
                }
            }
            Some('{') => {
                self.bump();
                let mut depth = 1;
                let mut text = String::new();
                loop {
                    match self.chars.get(self.i) {
                        None => return Err(ParseError::new(line, col, "unclosed `{`")),
                        Some('{') => depth += 1,
                        Some('}') => {
                            depth -= 1;
                            if depth == 0 {
                                self.bump();
                                return Ok(SExpr::Quoted { text, line, col });
                            }
                        }
                        _ => {}
                    }
                    text.push(self.bump());
                }
            }
            Some(')') | Some('}') => Err(ParseError::new(line, col, "unbalanced closing bracket")),
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.get(self.i) {
                    if c.is_whitespace() || "(){};".contains(c) {
                        break;
                    }
                    text.push(self.bump());
                }
                Ok(SExpr::Atom { text, line, col })
            }
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::Quoted { text, .. } => write!(f, "{{{text}}}"),
            SExpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_round_trip() {
        for s in ["\\x. x", "x y z", "x (y z)", "(\\x. x) y", "\\x. \\y. x y", "x (\\y. y)", "(\\x. x x) (\\x. x x)"] {
            assert_eq!(parse_term(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_term("\\x y. x").unwrap(), parse_term("\\x. \\y. x").unwrap());
        assert_eq!(parse_term("x \\y. y").unwrap(), parse_term("x (\\y. y)").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term("\\x x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        let e = parse_term("x\n  )").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_formula("X -> #", &Signature::new()).unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
    }

    #[test]
    fn formulas_respect_signature() {
        let sig = Signature::new().with_function("s", 1).with_function("0", 0).with_predicate("N", 1);
        let f = parse_formula("!x. N(x) -> N(s(x))", &sig).unwrap();
        assert!(matches!(f, Formula::AllFo(..)));
        assert!(parse_formula("N(0, 0)", &sig).is_err());
        assert!(parse_formula("X(s)", &sig).is_err());
        assert!(parse_formula("X(0) -> X", &sig).is_err());
        let g = parse_formula("!X. X(0) -> X(0)", &sig).unwrap();
        assert!(matches!(g, Formula::AllSo(_, 1, _)));
        assert!(parse_formula("!X/2. X(0)", &sig).is_err());
    }

    #[test]
    fn instances_and_binders() {
        let sig = Signature::new().with_function("0", 0).with_predicate("N", 1);
        match parse_instance("[x] N(x) -> N(0)", &sig).unwrap() {
            Instance::Formula(g) => assert_eq!(g.params, vec!["x".to_string()]),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_instance("0", &sig).unwrap(), Instance::Term(FoTerm::constant("0")));
        let bs = parse_binders("(X y Z/2)", &sig).unwrap();
        assert_eq!(bs, vec![Binder::So("X".into(), 0), Binder::Fo("y".into()), Binder::So("Z".into(), 2)]);
    }

    #[test]
    fn sexpr_positions() {
        let e = parse_sexpr("(trans {X -> X}\n  (ax) (ax))").unwrap();
        let (h, rest) = e.head().unwrap();
        assert_eq!(h, "trans");
        assert_eq!(rest[1].pos(), (2, 3));
        let err = rest[0].parse_with(|s| parse_formula(s, &Signature::new()).map(|_| ()));
        assert!(err.is_ok());
        let bad = parse_sexpr("(mono {X -> } (ax))").unwrap();
        let err = bad.head().unwrap().1[0].parse_with(|s| parse_formula(s, &Signature::new())).unwrap_err();
        assert_eq!((err.line, err.col), (1, 13));
    }
}
