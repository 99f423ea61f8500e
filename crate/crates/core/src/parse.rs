//! Concrete syntax for formulas.
//!
//! ```text
//! global  := gimp
//! gimp    := gor ( "->" gimp )?
//! gor     := gand ( "|" gand )*
//! gand    := gunary ( "&" gunary )*
//! gunary  := "!" gunary | "@" AGENT "[" local "]" | "(" global ")" | "true" | "false"
//!
//! local   := limp            (same precedence ladder, scoped to one agent)
//! lunary  := "!" lunary | "X" lunary | "G" lunary | "F" lunary
//!          | "C" AGENT "[" local "]" | "(" local ")" | "true" | "false" | PROP
//! ```
//!
//! `&`, `|`, `F`, `false` are desugared on the spot. Words have their own
//! small syntax, see [`parse_letter`].

use crate::error::{DtlError, Position, Result};
use crate::formula::{GlobalFormula, LocalFormula};
use crate::signature::{Agent, Signature, Valuation};
use crate::word::{GlobalLetter, Lasso, LassoWord};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    At,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Bang,
    Arrow,
    Amp,
    Bar,
    Ident(String),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str, base: Position) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut k = 0;
        while k < bytes.len() {
            let c = bytes[k];
            let start = k;
            let tok = match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    k += 1;
                    continue;
                }
                b'@' => Tok::At,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'-' if bytes.get(k + 1) == Some(&b'>') => {
                    k += 1;
                    Tok::Arrow
                }
                c if c.is_ascii_alphanumeric() || c == b'_' => {
                    while k + 1 < bytes.len() && (bytes[k + 1].is_ascii_alphanumeric() || bytes[k + 1] == b'_') {
                        k += 1;
                    }
                    Tok::Ident(src[start..=k].to_string())
                }
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(syntax(src, base, start, format!("unexpected character `{ch}`")));
                }
            };
            lx.toks.push((tok, start));
            k += 1;
        }
        lx.toks.push((Tok::End, lx.src.len()));
        Ok(lx.toks)
    }
}

fn position(src: &str, base: Position, offset: usize) -> Position {
    let before = &src[..offset.min(src.len())];
    let line_breaks = before.matches('\n').count();
    let column = match before.rfind('\n') {
        Some(nl) => before[nl + 1..].chars().count() + 1,
        None => before.chars().count() + base.column,
    };
    Position {
        line: base.line + line_breaks,
        column,
    }
}

fn syntax(src: &str, base: Position, offset: usize, msg: String) -> DtlError {
    DtlError::Syntax {
        pos: position(src, base, offset),
        msg,
    }
}

struct Parser<'a> {
    sig: &'a Signature,
    src: &'a str,
    base: Position,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> DtlError {
        syntax(self.src, self.base, self.offset(), msg.into())
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn agent(&mut self) -> Result<Agent> {
        match self.bump() {
            Tok::Ident(name) => self.sig.agent(&name),
            t => Err(self.err(format!("expected agent name, found {}", describe(&t)))),
        }
    }

    fn global(&mut self) -> Result<GlobalFormula> {
        let lhs = self.global_or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.global()?;
            return Ok(GlobalFormula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn global_or(&mut self) -> Result<GlobalFormula> {
        let mut acc = self.global_and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.global_and()?;
            acc = GlobalFormula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn global_and(&mut self) -> Result<GlobalFormula> {
        let mut acc = self.global_unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.global_unary()?;
            acc = GlobalFormula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn global_unary(&mut self) -> Result<GlobalFormula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(GlobalFormula::not(self.global_unary()?))
            }
            Tok::At => {
                self.bump();
                let i = self.agent()?;
                self.expect(Tok::LBrack, "`[`")?;
                let body = self.local(i)?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(GlobalFormula::at(i, body))
            }
            Tok::LParen => {
                self.bump();
                let g = self.global()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(g)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                let first = Agent::from_index(0);
                let t = GlobalFormula::at(first, LocalFormula::tt());
                Ok(if w == "true" { t } else { GlobalFormula::not(t) })
            }
            t => Err(self.err(format!("expected a global formula, found {}", describe(&t)))),
        }
    }

    fn local(&mut self, owner: Agent) -> Result<LocalFormula> {
        let lhs = self.local_or(owner)?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.local(owner)?;
            return Ok(LocalFormula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn local_or(&mut self, owner: Agent) -> Result<LocalFormula> {
        let mut acc = self.local_and(owner)?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.local_and(owner)?;
            acc = LocalFormula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn local_and(&mut self, owner: Agent) -> Result<LocalFormula> {
        let mut acc = self.local_unary(owner)?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.local_unary(owner)?;
            acc = LocalFormula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn local_unary(&mut self, owner: Agent) -> Result<LocalFormula> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(LocalFormula::not(self.local_unary(owner)?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.local(owner)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(w) => {
                self.bump();
                match w.as_str() {
                    "X" => Ok(LocalFormula::next(self.local_unary(owner)?)),
                    "G" => Ok(LocalFormula::always(self.local_unary(owner)?)),
                    "F" => Ok(LocalFormula::eventually(self.local_unary(owner)?)),
                    "true" => Ok(LocalFormula::tt()),
                    "false" => Ok(LocalFormula::ff()),
                    "C" => {
                        let j = self.agent()?;
                        self.expect(Tok::LBrack, "`[`")?;
                        let body = self.local(j)?;
                        self.expect(Tok::RBrack, "`]`")?;
                        Ok(LocalFormula::comm(j, body))
                    }
                    name => {
                        let p = self.sig.prop(name).map_err(|e| match e {
                            DtlError::UnknownProp(n) => {
                                syntax(self.src, self.base, start, format!("undeclared proposition `{n}`"))
                            }
                            other => other,
                        })?;
                        if p.owner() != owner {
                            return Err(DtlError::WrongScope {
                                prop: name.to_string(),
                                owner: self.sig.agent_name(p.owner()).to_string(),
                                scope: self.sig.agent_name(owner).to_string(),
                            });
                        }
                        Ok(LocalFormula::prop(p))
                    }
                }
            }
            t => Err(self.err(format!("expected a local formula, found {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::At => "`@`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses a global formula over `sig`.
pub fn parse_global(text: &str, sig: &Signature) -> Result<GlobalFormula> {
    parse_global_at(text, sig, Position { line: 1, column: 1 })
}

/// As [`parse_global`], reporting positions relative to `base` (the location
/// of `text` inside a larger file).
pub fn parse_global_at(text: &str, sig: &Signature, base: Position) -> Result<GlobalFormula> {
    let toks = Lexer::run(text, base)?;
    let mut p = Parser {
        sig,
        src: text,
        base,
        toks,
        at: 0,
    };
    let g = p.global()?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("unexpected {} after formula", describe(p.peek()))));
    }
    Ok(g)
}

/// Parses a local formula of agent `owner`.
pub fn parse_local(text: &str, sig: &Signature, owner: Agent) -> Result<LocalFormula> {
    let base = Position { line: 1, column: 1 };
    let toks = Lexer::run(text, base)?;
    let mut p = Parser {
        sig,
        src: text,
        base,
        toks,
        at: 0,
    };
    let f = p.local(owner)?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("unexpected {} after formula", describe(p.peek()))));
    }
    Ok(f)
}

/// One global letter in the compact syntax `i:p,!q j:r`: each token names a
/// participating agent and the literals it reads. Unlisted propositions of a
/// participant are false.
pub fn parse_letter(text: &str, sig: &Signature) -> Result<GlobalLetter> {
    let mut parts = vec![None; sig.num_agents()];
    for tok in text.split_whitespace() {
        let (a, lits) = tok
            .split_once(':')
            .ok_or_else(|| DtlError::MalformedWord(format!("expected `agent:literals`, found `{tok}`")))?;
        let a = sig.agent(a)?;
        let mut v = Valuation::default();
        for lit in lits.split(',').filter(|l| !l.is_empty()) {
            let (name, value) = match lit.strip_prefix('!') {
                Some(n) => (n, false),
                None => (lit, true),
            };
            let p = sig.prop(name)?;
            if p.owner() != a {
                return Err(DtlError::MalformedWord(format!(
                    "proposition `{name}` does not belong to agent `{}`",
                    sig.agent_name(a)
                )));
            }
            v = v.with(p, value);
        }
        if parts[a.index()].replace(v).is_some() {
            return Err(DtlError::MalformedWord(format!("agent `{}` appears twice in a letter", sig.agent_name(a))));
        }
    }
    GlobalLetter::new(parts).map_err(|_| DtlError::MalformedWord(format!("letter `{}` has no participant", text.trim())))
}

/// A lasso word from `;`-separated letters for the prefix and the loop.
pub fn parse_word(prefix: &str, cycle: &str, sig: &Signature) -> Result<LassoWord> {
    let letters = |text: &str| -> Result<Vec<GlobalLetter>> {
        text.split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| parse_letter(t, sig))
            .collect()
    };
    Lasso::new(letters(prefix)?, letters(cycle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{GlobalNode, LocalNode};

    fn sig() -> Signature {
        Signature::new([("i", vec!["p"]), ("j", vec!["q", "q1", "q2"])]).unwrap()
    }

    #[test]
    fn tautology_shape() {
        let s = sig();
        let g = parse_global("@i[p] -> @i[p]", &s).unwrap();
        let i = s.agent("i").unwrap();
        let at = GlobalFormula::at(i, LocalFormula::prop(s.prop("p").unwrap()));
        assert_eq!(g, GlobalFormula::imp(at.clone(), at));
    }

    #[test]
    fn always_with_comm() {
        let s = sig();
        let g = parse_global("@i[ G (p -> C j [ q1 -> q2 ]) ]", &s).unwrap();
        let i = s.agent("i").unwrap();
        let j = s.agent("j").unwrap();
        let pr = |n| LocalFormula::prop(s.prop(n).unwrap());
        let want = GlobalFormula::at(
            i,
            LocalFormula::always(LocalFormula::imp(
                pr("p"),
                LocalFormula::comm(j, LocalFormula::imp(pr("q1"), pr("q2"))),
            )),
        );
        assert_eq!(g, want);
    }

    #[test]
    fn double_negation_is_identity() {
        let s = sig();
        let g = parse_global("@i[ !!p ]", &s).unwrap();
        assert_eq!(g, parse_global("@i[p]", &s).unwrap());
        assert_eq!(parse_global("!!@i[p]", &s).unwrap(), g);
    }

    #[test]
    fn precedence_and_associativity() {
        let s = sig();
        // & binds tighter than |, which binds tighter than ->; -> is right associative
        let a = parse_global("@i[p] & @j[q] | @j[q1] -> @j[q2] -> @i[p]", &s).unwrap();
        let b = parse_global("((@i[p] & @j[q]) | @j[q1]) -> (@j[q2] -> @i[p])", &s).unwrap();
        assert_eq!(a, b);
        let l = parse_global("@i[X p -> G !p & p]", &s).unwrap();
        let r = parse_global("@i[(X p) -> ((G (!p)) & p)]", &s).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn sugar_desugars() {
        let s = sig();
        let g = parse_global("@i[F p]", &s).unwrap();
        match g.node() {
            GlobalNode::At(_, f) => match f.node() {
                LocalNode::Not(inner) => assert!(matches!(inner.node(), LocalNode::Always(_))),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse_global("@i[false]", &s).unwrap(),
            GlobalFormula::at(s.agent("i").unwrap(), LocalFormula::not(LocalFormula::tt()))
        );
    }

    #[test]
    fn display_roundtrips() {
        let s = sig();
        for text in [
            "@i[p] -> @i[p]",
            "@i[G (p -> C j[q1 -> q2])]",
            "!(@i[X (p -> C j[q])] -> !@j[X q])",
            "@i[F G p] | @j[C i[true]]",
        ] {
            let g = parse_global(text, &s).unwrap();
            let printed = g.display(&s).to_string();
            assert_eq!(parse_global(&printed, &s).unwrap(), g, "{printed}");
        }
    }

    #[test]
    fn errors() {
        let s = sig();
        match parse_global("@i[p ->", &s) {
            Err(DtlError::Syntax { pos, .. }) => assert_eq!(pos, Position { line: 1, column: 8 }),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_global("@k[p]", &s), Err(DtlError::UnknownAgent(_))));
        assert!(matches!(parse_global("@i[r]", &s), Err(DtlError::Syntax { .. })));
        assert!(matches!(parse_global("@i[q]", &s), Err(DtlError::WrongScope { .. })));
        assert!(matches!(parse_global("@i[C j[p]]", &s), Err(DtlError::WrongScope { .. })));
        assert!(matches!(parse_global("@i[p] @i[p]", &s), Err(DtlError::Syntax { .. })));
        assert!(matches!(parse_global("@i[p] $", &s), Err(DtlError::Syntax { .. })));
        let at = parse_global_at("@i[\n  p &]", &s, Position { line: 3, column: 10 });
        match at {
            Err(DtlError::Syntax { pos, .. }) => assert_eq!(pos, Position { line: 4, column: 6 }),
            other => panic!("{other:?}"),
        }
    }
}
