//! Concrete text syntax and the matching pretty-printer.
//!
//! Precedence, tightest first:
//!
//! | level | operators | associativity |
//! |-------|-----------|---------------|
//! | prefix | `~`, `!`, `K{..}`, `Ka`, `CK{..}`, `CKa` | prefix |
//! | and | `&` | left |
//! | or | `\|` | left |
//! | division | `\`, `\*`, `o` | none (parenthesize chains) |
//! | implication | `=>` | right |
//! | biconditional | `<=>` | right |
//!
//! Atoms are variables (`[a-z][a-z0-9]*` other than `top`, `bot` and `o`),
//! `top`, `bot` and parenthesized formulas.

use std::fmt;

use thiserror::Error;

use crate::formula::{desugar, Formula, FormulaError, Group, Universe, TOP_VAR};

/// A parse tree that still contains the sugar tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceFormula {
    Var(String),
    /// An already-desugared subtree, passed through unchanged.
    Core(Formula),
    Top,
    Bot,
    Neg(Box<SurfaceFormula>),
    /// Boolean negation `!`.
    Not(Box<SurfaceFormula>),
    And(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Or(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Impl(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Iff(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Know(Vec<String>, Box<SurfaceFormula>),
    Common(Vec<String>, Box<SurfaceFormula>),
    LDiv(Box<SurfaceFormula>, Box<SurfaceFormula>),
    LDivStar(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Fuse(Box<SurfaceFormula>, Box<SurfaceFormula>),
}

impl From<&Formula> for SurfaceFormula {
    fn from(f: &Formula) -> Self {
        use SurfaceFormula as S;
        let b = |f: &Formula| Box::new(S::from(f));
        let names = |g: &Group| g.members().map(|a| a.as_str().to_string()).collect();
        if f.is_top() {
            return S::Top;
        }
        match f {
            Formula::Var(v) => S::Var(v.clone()),
            Formula::Neg(x) => S::Neg(b(x)),
            Formula::And(l, r) => S::And(b(l), b(r)),
            Formula::Or(l, r) => S::Or(b(l), b(r)),
            Formula::Impl(l, r) => S::Impl(b(l), b(r)),
            Formula::Know(g, x) => S::Know(names(g), b(x)),
            Formula::Common(g, x) => S::Common(names(g), b(x)),
            Formula::LDiv(l, r) => S::LDiv(b(l), b(r)),
            Formula::LDivStar(l, r) => S::LDivStar(b(l), b(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: &'static str },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("{0} cannot be chained; add parentheses")]
    NonAssociative(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A parse failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at position {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Tilde,
    Bang,
    Know(Vec<String>),
    Common(Vec<String>),
    And,
    Or,
    LDiv,
    LDivStar,
    Fuse,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "variable `{s}`"),
            Tok::Top => f.write_str("`top`"),
            Tok::Bot => f.write_str("`bot`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Know(g) => write!(f, "`K{{{}}}`", g.join(",")),
            Tok::Common(g) => write!(f, "`CK{{{}}}`", g.join(",")),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::LDiv => f.write_str("`\\`"),
            Tok::LDivStar => f.write_str("`\\*`"),
            Tok::Fuse => f.write_str("`o`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Iff => f.write_str("`<=>`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn word(&mut self) -> String {
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_lowercase() || c.is_ascii_digit()))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        self.pos += len;
        rest[..len].to_string()
    }

    /// Agent list after `K` or `CK`: either `{a,b,...}` or a bare agent name.
    fn agents(&mut self, start: usize) -> Result<Vec<String>, ParseError> {
        match self.peek_char() {
            Some('{') => {
                self.pos += 1;
                let mut names = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek_char() {
                        Some('}') if names.is_empty() => {
                            self.pos += 1;
                            return Err(self.err(start, FormulaError::EmptyGroup.into()));
                        }
                        Some(c) if c.is_ascii_lowercase() => names.push(self.word()),
                        Some(c) => return Err(self.err(self.pos, ParseErrorKind::UnexpectedChar(c))),
                        None => return Err(self.err(self.pos, ParseErrorKind::UnexpectedEnd("agent name"))),
                    }
                    self.skip_ws();
                    match self.peek_char() {
                        Some(',') => self.pos += 1,
                        Some('}') => {
                            self.pos += 1;
                            return Ok(names);
                        }
                        Some(c) => return Err(self.err(self.pos, ParseErrorKind::UnexpectedChar(c))),
                        None => return Err(self.err(self.pos, ParseErrorKind::UnexpectedEnd("`,` or `}`"))),
                    }
                }
            }
            Some(c) if c.is_ascii_lowercase() => Ok(vec![self.word()]),
            Some(c) => Err(self.err(self.pos, ParseErrorKind::UnexpectedChar(c))),
            None => Err(self.err(self.pos, ParseErrorKind::UnexpectedEnd("agent group"))),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek_char(), Some(c) if c.is_whitespace()) {
            self.pos += self.peek_char().map(char::len_utf8).unwrap_or(0);
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let Some(c) = self.peek_char() else {
                return Ok(out);
            };
            let rest = &self.src[self.pos..];
            let tok = if rest.starts_with("<=>") {
                self.pos += 3;
                Tok::Iff
            } else if rest.starts_with("=>") {
                self.pos += 2;
                Tok::Implies
            } else if rest.starts_with("\\*") {
                self.pos += 2;
                Tok::LDivStar
            } else if rest.starts_with("CK") {
                self.pos += 2;
                Tok::Common(self.agents(start)?)
            } else {
                match c {
                    '\\' => {
                        self.pos += 1;
                        Tok::LDiv
                    }
                    '~' => {
                        self.pos += 1;
                        Tok::Tilde
                    }
                    '!' => {
                        self.pos += 1;
                        Tok::Bang
                    }
                    '&' => {
                        self.pos += 1;
                        Tok::And
                    }
                    '|' => {
                        self.pos += 1;
                        Tok::Or
                    }
                    '(' => {
                        self.pos += 1;
                        Tok::LParen
                    }
                    ')' => {
                        self.pos += 1;
                        Tok::RParen
                    }
                    'K' => {
                        self.pos += 1;
                        Tok::Know(self.agents(start)?)
                    }
                    c if c.is_ascii_lowercase() => match self.word().as_str() {
                        "top" => Tok::Top,
                        "bot" => Tok::Bot,
                        "o" => Tok::Fuse,
                        w => Tok::Ident(w.to_string()),
                    },
                    c => return Err(self.err(start, ParseErrorKind::UnexpectedChar(c))),
                }
            };
            out.push((start, tok));
        }
    }
}

struct Parser<'u> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    universe: &'u Universe,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken {
                found: t.to_string(),
                expected,
            },
            None => ParseErrorKind::UnexpectedEnd(expected),
        };
        ParseError {
            position: self.pos(),
            kind,
        }
    }

    fn iff(&mut self) -> Result<SurfaceFormula, ParseError> {
        let lhs = self.implication()?;
        if self.peek() == Some(&Tok::Iff) {
            self.bump();
            let rhs = self.iff()?;
            return Ok(SurfaceFormula::Iff(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<SurfaceFormula, ParseError> {
        let lhs = self.division()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(SurfaceFormula::Impl(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn division(&mut self) -> Result<SurfaceFormula, ParseError> {
        let lhs = self.disjunction()?;
        let build = match self.peek() {
            Some(Tok::LDiv) => SurfaceFormula::LDiv,
            Some(Tok::LDivStar) => SurfaceFormula::LDivStar,
            Some(Tok::Fuse) => SurfaceFormula::Fuse,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.disjunction()?;
        if let Some(t @ (Tok::LDiv | Tok::LDivStar | Tok::Fuse)) = self.peek() {
            return Err(ParseError {
                position: self.pos(),
                kind: ParseErrorKind::NonAssociative(t.to_string()),
            });
        }
        Ok(build(Box::new(lhs), Box::new(rhs)))
    }

    fn disjunction(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = SurfaceFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut lhs = self.prefix()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.prefix()?;
            lhs = SurfaceFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn check_agents(&self, names: &[String], position: usize) -> Result<(), ParseError> {
        for n in names {
            if !self.universe.contains_name(n) {
                return Err(ParseError {
                    position,
                    kind: FormulaError::UnknownAgent(n.clone()).into(),
                });
            }
        }
        Ok(())
    }

    fn prefix(&mut self) -> Result<SurfaceFormula, ParseError> {
        let position = self.pos();
        match self.peek() {
            Some(Tok::Tilde) => {
                self.bump();
                Ok(SurfaceFormula::Neg(Box::new(self.prefix()?)))
            }
            Some(Tok::Bang) => {
                self.bump();
                Ok(SurfaceFormula::Not(Box::new(self.prefix()?)))
            }
            Some(Tok::Know(_)) | Some(Tok::Common(_)) => {
                let tok = self.bump();
                match tok {
                    Some(Tok::Know(g)) => {
                        self.check_agents(&g, position)?;
                        Ok(SurfaceFormula::Know(g, Box::new(self.prefix()?)))
                    }
                    Some(Tok::Common(g)) => {
                        self.check_agents(&g, position)?;
                        Ok(SurfaceFormula::Common(g, Box::new(self.prefix()?)))
                    }
                    _ => unreachable!(),
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<SurfaceFormula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(v)) => Ok(SurfaceFormula::Var(v)),
                _ => unreachable!(),
            },
            Some(Tok::Top) => {
                self.bump();
                Ok(SurfaceFormula::Top)
            }
            Some(Tok::Bot) => {
                self.bump();
                Ok(SurfaceFormula::Bot)
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.iff()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// Parses text into a surface tree without desugaring.
pub fn parse_surface(text: &str, universe: &Universe) -> Result<SurfaceFormula, ParseError> {
    let toks = Lexer { src: text, pos: 0 }.tokens()?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
        universe,
    };
    let f = p.iff()?;
    if p.peek().is_some() {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses text into a core formula.
pub fn parse(text: &str, universe: &Universe) -> Result<Formula, ParseError> {
    let surface = parse_surface(text, universe)?;
    desugar(&surface, universe).map_err(|e| ParseError {
        position: 0,
        kind: e.into(),
    })
}

const IFF: u8 = 0;
const IMPL: u8 = 1;
const DIV: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const PREFIX: u8 = 5;

/// Renders a formula with the fewest parentheses that re-parse to the same
/// tree. Sugar is recognized where its expansion matches exactly.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, IFF);
    out
}

fn as_not(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Impl(l, r) if r.is_bot() => Some(l),
        _ => None,
    }
}

fn as_fuse(f: &Formula) -> Option<(&Formula, &Formula)> {
    match as_not(f)? {
        Formula::LDiv(l, r) => Some((l, as_not(r)?)),
        _ => None,
    }
}

fn as_iff(f: &Formula) -> Option<(&Formula, &Formula)> {
    let Formula::And(l, r) = f else { return None };
    let (Formula::Impl(a, b), Formula::Impl(c, d)) = (&**l, &**r) else {
        return None;
    };
    let is_t = |f: &Formula| matches!(f, Formula::Var(v) if v == TOP_VAR);
    (a == d && b == c && !is_t(a) && !is_t(b)).then_some((a, b))
}

fn group_names(g: &Group) -> String {
    g.members().map(|a| a.as_str()).collect::<Vec<_>>().join(",")
}

fn write_formula(out: &mut String, f: &Formula, min: u8) {
    let (level, body) = render(f);
    if level < min {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
}

fn binary(op: &str, l: &Formula, lmin: u8, r: &Formula, rmin: u8) -> String {
    let mut s = String::new();
    write_formula(&mut s, l, lmin);
    s.push(' ');
    s.push_str(op);
    s.push(' ');
    write_formula(&mut s, r, rmin);
    s
}

fn prefix(op: &str, sep: bool, inner: &Formula) -> String {
    let mut s = String::from(op);
    if sep {
        s.push(' ');
    }
    write_formula(&mut s, inner, PREFIX);
    s
}

fn render(f: &Formula) -> (u8, String) {
    const ATOM: u8 = PREFIX + 1;
    if f.is_top() {
        return (ATOM, "top".into());
    }
    if f.is_bot() {
        return (ATOM, "bot".into());
    }
    if let Some((l, r)) = as_fuse(f) {
        return (DIV, binary("o", l, DIV + 1, r, DIV + 1));
    }
    if let Some(inner) = as_not(f) {
        return (PREFIX, prefix("!", false, inner));
    }
    if let Some((l, r)) = as_iff(f) {
        return (IFF, binary("<=>", l, IFF + 1, r, IFF));
    }
    match f {
        Formula::Var(v) => (ATOM, v.clone()),
        Formula::Neg(x) => (PREFIX, prefix("~", false, x)),
        Formula::Know(g, x) => (PREFIX, prefix(&format!("K{{{}}}", group_names(g)), true, x)),
        Formula::Common(g, x) => (PREFIX, prefix(&format!("CK{{{}}}", group_names(g)), true, x)),
        Formula::And(l, r) => (AND, binary("&", l, AND, r, AND + 1)),
        Formula::Or(l, r) => (OR, binary("|", l, OR, r, OR + 1)),
        Formula::LDiv(l, r) => (DIV, binary("\\", l, DIV + 1, r, DIV + 1)),
        Formula::LDivStar(l, r) => (DIV, binary("\\*", l, DIV + 1, r, DIV + 1)),
        Formula::Impl(l, r) => (IMPL, binary("=>", l, IMPL + 1, r, IMPL)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::AgentId;

    fn u() -> Universe {
        Universe::new(["a", "b"]).unwrap()
    }
    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }
    fn ka(f: Formula) -> Formula {
        Formula::know_agent(AgentId::new("a").unwrap(), f)
    }

    #[test]
    fn parses_knowledge_implication() {
        assert_eq!(
            parse("K{a} p => p", &u()).unwrap(),
            Formula::implies(ka(p()), p())
        );
        assert_eq!(parse("Ka p => p", &u()).unwrap(), parse("K{a} p => p", &u()).unwrap());
    }

    #[test]
    fn division_needs_parentheses_when_chained() {
        assert_eq!(
            parse("p \\ (p \\ q)", &u()).unwrap(),
            Formula::ldiv(p(), Formula::ldiv(p(), q()))
        );
        let err = parse("p \\ q \\ r", &u()).unwrap_err();
        assert_eq!(err.position, 6);
        assert!(matches!(err.kind, ParseErrorKind::NonAssociative(_)));
        assert!(parse("p o q \\* r", &u()).is_err());
    }

    #[test]
    fn precedence_levels() {
        assert_eq!(
            parse("p & q | r", &u()).unwrap(),
            Formula::or(Formula::and(p(), q()), Formula::var("r"))
        );
        assert_eq!(
            parse("p => q => r", &u()).unwrap(),
            Formula::implies(p(), Formula::implies(q(), Formula::var("r")))
        );
        assert_eq!(
            parse("p | q \\ r => p", &u()).unwrap(),
            Formula::implies(Formula::ldiv(Formula::or(p(), q()), Formula::var("r")), p())
        );
        assert_eq!(
            parse("~p & q", &u()).unwrap(),
            Formula::and(Formula::neg(p()), q())
        );
        assert_eq!(
            parse("p \\* q", &u()).unwrap(),
            Formula::ldiv_star(p(), q())
        );
    }

    #[test]
    fn sugar_tokens() {
        assert_eq!(parse("top", &u()).unwrap(), Formula::top());
        assert_eq!(parse("bot", &u()).unwrap(), Formula::bot());
        assert_eq!(parse("!p", &u()).unwrap(), Formula::not(p()));
        assert_eq!(parse("p <=> q", &u()).unwrap(), Formula::iff(p(), q()));
        assert_eq!(parse("p o q", &u()).unwrap(), Formula::fuse(p(), q()));
        let g = u().group(["a", "b"]).unwrap();
        assert_eq!(
            parse("CK{b, a} (p & q)", &u()).unwrap(),
            Formula::common(g, Formula::and(p(), q()))
        );
    }

    #[test]
    fn error_kinds() {
        let e = parse("K{c} p", &u()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Formula(FormulaError::UnknownAgent("c".into())));
        let e = parse("K{} p", &u()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Formula(FormulaError::EmptyGroup));
        let e = parse("p $ q", &u()).unwrap_err();
        assert_eq!((e.position, e.kind), (2, ParseErrorKind::UnexpectedChar('$')));
        assert!(parse("_t", &u()).is_err());
        assert!(parse("(p", &u()).is_err());
        assert!(parse("p q", &u()).is_err());
        assert!(parse("", &u()).is_err());
        assert!(parse("p \\ * q", &u()).is_err());
    }

    #[test]
    fn printer_examples() {
        assert_eq!(print(&Formula::implies(ka(p()), p())), "K{a} p => p");
        assert_eq!(print(&Formula::neg(Formula::and(p(), q()))), "~(p & q)");
        let g = u().group(["a", "b"]).unwrap();
        assert_eq!(print(&Formula::common(g, p())), "CK{a,b} p");
        assert_eq!(
            print(&Formula::ldiv(Formula::ldiv(p(), q()), p())),
            "(p \\ q) \\ p"
        );
        assert_eq!(print(&Formula::fuse(p(), q())), "p o q");
        assert_eq!(print(&Formula::not(ka(p()))), "!K{a} p");
        assert_eq!(print(&Formula::and(Formula::top(), Formula::top())), "top & top");
        assert_eq!(
            print(&Formula::implies(Formula::implies(p(), q()), p())),
            "(p => q) => p"
        );
    }

    #[test]
    fn desugar_is_idempotent_on_core() {
        let f = parse("CK{a,b} (p o ~q) <=> !(top \\* bot)", &u()).unwrap();
        let lifted = SurfaceFormula::from(&f);
        assert_eq!(desugar(&lifted, &u()).unwrap(), f);
        assert_eq!(desugar(&SurfaceFormula::Core(f.clone()), &u()).unwrap(), f);
    }
}
