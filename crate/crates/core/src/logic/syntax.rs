//! Concrete syntax. `docs/grammar.md` has the grammar; printing produces the
//! canonical form that parses back to the same tree.

use std::fmt;

use super::ast::{subscripts_ok, Connective, Formula, Quantifier, Scalar, Term};
use super::LogicError;

const KEYWORDS: &[&str] = &[
    "sup", "inf", "d", "norm", "normc", "abs", "pos", "meet", "join", "oplus", "absdiff", "max", "min", "tsub", "leq",
    "pow", "affine",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push(Token { tok: Tok::Num(text), pos });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push(Token { tok: Tok::Ident(text), pos });
        } else if "()[],.+*-/|".contains(c) {
            out.push(Token { tok: Tok::Sym(c), pos });
            i += 1;
        } else {
            return Err(LogicError::Syntax { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    out.push(Token { tok: Tok::End, pos: src.len() });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, c: char) -> Result<(), LogicError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn unsigned(&mut self) -> Result<Scalar, LogicError> {
        let pos = self.pos();
        let text = match self.bump() {
            Tok::Num(t) => t,
            _ => return Err(LogicError::Syntax { pos, msg: "expected a number".into() }),
        };
        let bad = |msg: &str| LogicError::Syntax { pos, msg: format!("{msg}: {text}") };
        if text.contains('.') {
            let x: f64 = text.parse().map_err(|_| bad("malformed decimal"))?;
            return Scalar::decimal(x).map_err(|_| bad("malformed decimal"));
        }
        let num: i64 = text.parse().map_err(|_| bad("integer out of range"))?;
        if self.eat('/') {
            let dpos = self.pos();
            match self.bump() {
                Tok::Num(d) if !d.contains('.') => {
                    let den: u64 = d.parse().map_err(|_| bad("denominator out of range"))?;
                    Scalar::ratio(num, den)
                        .map_err(|_| LogicError::Syntax { pos: dpos, msg: "zero denominator".into() })
                }
                _ => Err(LogicError::Syntax { pos: dpos, msg: "expected an integer denominator".into() }),
            }
        } else {
            Ok(Scalar::integer(num))
        }
    }

    fn scalar(&mut self) -> Result<Scalar, LogicError> {
        if self.eat('-') {
            Ok(self.unsigned()?.neg())
        } else {
            self.unsigned()
        }
    }

    fn subscripts(&mut self) -> Result<(Scalar, Scalar, usize), LogicError> {
        let pos = self.pos();
        self.expect('[')?;
        let s = self.scalar()?;
        self.expect(',')?;
        let t = self.scalar()?;
        self.expect(']')?;
        if !subscripts_ok(s, t) {
            return Err(LogicError::Subscript { pos, s: s.value(), t: t.value() });
        }
        Ok((s, t, pos))
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(k) if k == "sup" || k == "inf" => {
                self.bump();
                let q = if k == "sup" { Quantifier::Sup } else { Quantifier::Inf };
                let mut vars = vec![self.ident()?];
                while self.eat(',') {
                    vars.push(self.ident()?);
                }
                self.expect('.')?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.formula();
                self.bound.truncate(depth);
                let mut f = body?;
                for var in vars.into_iter().rev() {
                    f = Formula::Quant { q, var, body: Box::new(f) };
                }
                Ok(f)
            }
            Tok::Ident(k) if k == "d" || k == "normc" => {
                self.bump();
                self.expect('(')?;
                let a = self.term()?;
                self.expect(',')?;
                let b = self.term()?;
                self.expect(')')?;
                Ok(if k == "d" { Formula::Dist(a, b) } else { Formula::NormPlus(a, b) })
            }
            Tok::Ident(k) if k == "norm" => {
                self.bump();
                self.expect('(')?;
                let a = self.term()?;
                self.expect(')')?;
                Ok(Formula::Norm(a))
            }
            Tok::Ident(k) if ["absdiff", "max", "min", "tsub", "leq", "pow", "affine"].contains(&k.as_str()) => {
                self.bump();
                let c = match k.as_str() {
                    "absdiff" => Connective::AbsDiff,
                    "max" => Connective::Max,
                    "min" => Connective::Min,
                    "tsub" => Connective::TSub,
                    "leq" => Connective::Leq,
                    "pow" => {
                        self.expect('[')?;
                        let r = self.scalar()?;
                        self.expect(']')?;
                        Connective::Pow(r)
                    }
                    _ => {
                        self.expect('[')?;
                        let bias = self.scalar()?;
                        let mut coeffs = Vec::new();
                        while self.eat(',') {
                            coeffs.push(self.scalar()?);
                        }
                        self.expect(']')?;
                        Connective::Affine { bias, coeffs }
                    }
                };
                self.expect('(')?;
                let mut args = vec![self.formula()?];
                while self.eat(',') {
                    args.push(self.formula()?);
                }
                self.expect(')')?;
                Formula::apply(c, args).map_err(|e| LogicError::Syntax { pos, msg: e.to_string() })
            }
            Tok::Num(_) | Tok::Sym('-') => Ok(Formula::Num(self.scalar()?)),
            Tok::Sym('(') => {
                self.bump();
                let f = self.formula()?;
                self.expect(')')?;
                Ok(f)
            }
            _ => self.err("expected a formula"),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let pos = self.pos();
        let (s, a) = self.summand()?;
        if self.eat('+') {
            let (t, b) = self.summand()?;
            let (s, t) = (s.unwrap_or(Scalar::ONE), t.unwrap_or(Scalar::ONE));
            if !subscripts_ok(s, t) {
                return Err(LogicError::Subscript { pos, s: s.value(), t: t.value() });
            }
            Ok(Term::Combine { s, t, a: Box::new(a), b: Box::new(b) })
        } else {
            match s {
                Some(s) if s.value().abs() > 1.0 + super::ast::SUBSCRIPT_SLACK => {
                    Err(LogicError::Subscript { pos, s: s.value(), t: 0.0 })
                }
                Some(s) => Ok(Term::Combine { s, t: Scalar::ZERO, a: Box::new(a), b: Box::new(Term::Zero) }),
                None => Ok(a),
            }
        }
    }

    /// `scalar * primary` or a bare primary (coefficient `None`).
    fn summand(&mut self) -> Result<(Option<Scalar>, Term), LogicError> {
        match self.peek() {
            Tok::Num(_) | Tok::Sym('-') => {
                let pos = self.pos();
                let s = self.scalar()?;
                if self.eat('*') {
                    Ok((Some(s), self.primary()?))
                } else if s == Scalar::ZERO {
                    Ok((None, Term::Zero))
                } else {
                    Err(LogicError::Syntax { pos, msg: "a scalar must be followed by '*'".into() })
                }
            }
            _ => Ok((None, self.primary()?)),
        }
    }

    fn primary(&mut self) -> Result<Term, LogicError> {
        match self.peek().clone() {
            Tok::Num(n) if n == "0" && *self.peek2() != Tok::Sym('/') => {
                self.bump();
                Ok(Term::Zero)
            }
            Tok::Sym('(') => {
                self.bump();
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Tok::Sym('|') => {
                self.bump();
                let t = self.term()?;
                self.expect('|')?;
                Ok(Term::abs(t))
            }
            Tok::Ident(k) if k == "abs" || k == "pos" => {
                self.bump();
                self.expect('(')?;
                let t = self.term()?;
                self.expect(')')?;
                Ok(if k == "abs" { Term::abs(t) } else { Term::pos(t) })
            }
            Tok::Ident(k) if k == "meet" || k == "join" || k == "oplus" => {
                self.bump();
                let (s, t, _) = self.subscripts()?;
                self.expect('(')?;
                let a = self.term()?;
                self.expect(',')?;
                let b = self.term()?;
                self.expect(')')?;
                Ok(match k.as_str() {
                    "meet" => Term::Meet { s, t, a: Box::new(a), b: Box::new(b) },
                    "oplus" => Term::Combine { s, t, a: Box::new(a), b: Box::new(b) },
                    _ => Term::join(s, a, t, b).expect("subscripts checked"),
                })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                Ok(if self.bound.contains(&name) { Term::Var(name) } else { Term::Const(name) })
            }
            _ => self.err("expected a term"),
        }
    }
}

/// Parses a formula. Names bound by an enclosing `sup`/`inf` are variables;
/// every other name is a constant symbol.
pub fn parse_formula(src: &str) -> Result<Formula, LogicError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses a standalone term.
pub fn parse_term(src: &str) -> Result<Term, LogicError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0, bound: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(t)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scalar::Ratio(n, 1) => write!(f, "{n}"),
            Scalar::Ratio(n, d) => write!(f, "{n}/{d}"),
            Scalar::Decimal(x) => {
                let s = x.to_string();
                if s.contains('.') {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

fn write_primary(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Combine { .. } if t.as_join().is_none() => write!(f, "({t})"),
        _ => write!(f, "{t}"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((s, a, t, b)) = self.as_join() {
            if s == Scalar::ONE && t == Scalar::ZERO && a == b {
                return write!(f, "pos({a})");
            }
            return write!(f, "join[{s}, {t}]({a}, {b})");
        }
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Zero => f.write_str("0"),
            Term::Combine { s, t, a, b } => {
                write!(f, "{s}*")?;
                write_primary(a, f)?;
                if !(*t == Scalar::ZERO && **b == Term::Zero) {
                    write!(f, " + {t}*")?;
                    write_primary(b, f)?;
                }
                Ok(())
            }
            Term::Meet { s, t, a, b } => write!(f, "meet[{s}, {t}]({a}, {b})"),
            Term::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Dist(a, b) => write!(f, "d({a}, {b})"),
            Formula::Norm(a) => write!(f, "norm({a})"),
            Formula::NormPlus(a, b) => write!(f, "normc({a}, {b})"),
            Formula::Num(s) => write!(f, "{s}"),
            Formula::Apply(c, args) => {
                match c {
                    Connective::Pow(r) => write!(f, "pow[{r}]")?,
                    Connective::Affine { bias, coeffs } => {
                        write!(f, "affine[{bias}")?;
                        for c in coeffs {
                            write!(f, ", {c}")?;
                        }
                        f.write_str("]")?;
                    }
                    _ => f.write_str(c.name())?,
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Quant { q, var, body } => {
                let k = match q {
                    Quantifier::Sup => "sup",
                    Quantifier::Inf => "inf",
                };
                write!(f, "{k} {var} . {body}")
            }
        }
    }
}
