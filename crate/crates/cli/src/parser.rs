//! Problem files:
//!
//! ```text
//! vars x y;
//! f = x^3 + 1/2 * y^3;
//! max_degree = 12;
//! ```
//!
//! `expr := term (("+"|"-") term)*`, `term := factor ("*" factor)*`,
//! `factor := "-" factor | base ("^" nat)?`,
//! `base := ident | rational | "(" expr ")"`. Lines starting with `#` are
//! comments.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use qshift_core::coefficients::{format_rational, parse_rational, Rational};
use qshift_core::gca::Element;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown variable `{name}` at {line}:{col}")]
    UnknownVariable { name: String, line: usize, col: usize },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate option `{0}`")]
    DuplicateOption(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(r) if !r.is_integer() => 4,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(r) => write!(f, "{}", format_rational(r)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_at(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, 2)?;
                write!(f, " * ")?;
                b.write_at(f, 3)
            }
            Expr::Pow(b, n) => {
                b.write_at(f, 5)?;
                write!(f, "^{n}")
            }
        }
    }

    /// Evaluates to a polynomial; `vars` gives the index of each variable.
    pub fn to_element(&self, vars: &[String]) -> Element {
        let m = vars.len();
        match self {
            Expr::Num(r) => Element::constant(m, r.clone()),
            Expr::Var(v) => Element::y(m, vars.iter().position(|x| x == v).expect("checked by the parser")),
            Expr::Neg(e) => e.to_element(vars).neg(),
            Expr::Add(a, b) => a.to_element(vars).add(&b.to_element(vars)),
            Expr::Sub(a, b) => a.to_element(vars).sub(&b.to_element(vars)),
            Expr::Mul(a, b) => a.to_element(vars).gmul(&b.to_element(vars)).expect("polynomials commute"),
            Expr::Pow(b, n) => {
                let base = b.to_element(vars);
                let mut acc = Element::constant(m, Rational::one());
                for _ in 0..*n {
                    acc = acc.gmul(&base).expect("polynomials commute");
                }
                acc
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptionValue {
    Number(Rational),
    Word(String),
}

impl OptionValue {
    pub fn as_u32(&self) -> Option<u32> {
        match self {
            OptionValue::Number(r) if r.is_integer() => r.to_integer().try_into().ok(),
            _ => None,
        }
    }
}

impl fmt::Display for OptionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionValue::Number(r) => write!(f, "{}", format_rational(r)),
            OptionValue::Word(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub f: Expr,
    pub options: BTreeMap<String, OptionValue>,
}

impl ProblemFile {
    pub fn potential(&self) -> Element {
        self.f.to_element(&self.vars)
    }

    pub fn option_u32(&self, key: &str) -> Option<u32> {
        self.options.get(key).and_then(OptionValue::as_u32)
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {};", self.vars.join(" "))?;
        writeln!(f, "f = {};", self.f)?;
        for (k, v) in &self.options {
            writeln!(f, "{k} = {v};")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Semi,
    Eq,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(r) => write!(f, "`{}`", format_rational(r)),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, col, message: String| ParseError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            col += i - start;
            let value = parse_rational(&lit).ok_or_else(|| syntax(l0, c0, format!("bad number `{lit}`")))?;
            out.push(Token { tok: Tok::Num(value), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        return Err(syntax(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, t: &Token, expected: &str) -> ParseError {
        ParseError::Syntax { line: t.line, col: t.col, message: format!("expected {expected}, found {}", t.tok) }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(self.error(&t, &tok.to_string()))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let t = self.next();
        match &t.tok {
            Tok::Num(r) if r.is_integer() => {
                let n: u32 = r.to_integer().try_into().map_err(|_| self.error(&t, "a small exponent"))?;
                Ok(Expr::Pow(Box::new(base), n))
            }
            _ => Err(self.error(&t, "a natural exponent")),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(r) => Ok(Expr::Num(r)),
            Tok::Ident(name) => {
                if self.vars.contains(&name) {
                    Ok(Expr::Var(name))
                } else {
                    Err(ParseError::UnknownVariable { name, line: t.line, col: t.col })
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(&t, "a variable, number or `(`")),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars: Vec::new() };
    let head = p.next();
    if head.tok != Tok::Ident("vars".into()) {
        return Err(p.error(&head, "`vars`"));
    }
    let mut vars: Vec<String> = Vec::new();
    loop {
        let t = p.next();
        match t.tok {
            Tok::Ident(name) => {
                if vars.contains(&name) {
                    return Err(ParseError::DuplicateVariable(name));
                }
                vars.push(name);
            }
            Tok::Semi if !vars.is_empty() => break,
            _ => return Err(p.error(&t, "a variable name")),
        }
    }
    let t = p.next();
    if t.tok != Tok::Ident("f".into()) {
        return Err(p.error(&t, "`f`"));
    }
    p.expect(Tok::Eq)?;
    p.vars = vars.clone();
    let f = p.expr()?;
    p.expect(Tok::Semi)?;
    let mut options = BTreeMap::new();
    loop {
        let t = p.next();
        let key = match t.tok {
            Tok::End => break,
            Tok::Ident(k) => k,
            _ => return Err(p.error(&t, "an option name")),
        };
        p.expect(Tok::Eq)?;
        let v = p.next();
        let value = match v.tok {
            Tok::Num(r) => OptionValue::Number(r),
            Tok::Ident(w) => OptionValue::Word(w),
            _ => return Err(p.error(&v, "an option value")),
        };
        p.expect(Tok::Semi)?;
        if options.insert(key.clone(), value).is_some() {
            return Err(ParseError::DuplicateOption(key));
        }
    }
    Ok(ProblemFile { vars, f, options })
}
