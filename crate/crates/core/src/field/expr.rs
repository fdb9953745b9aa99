//! Expression syntax for user-defined fields and its recursive-descent parser.
//!
//! ```text
//! field    = component { ";" component } [ ";" ] ;
//! component= ( "P" | "Q" ) "=" expr ;
//! expr     = term { ( "+" | "-" ) term } ;
//! term     = unary { ( "*" | "/" ) unary } ;
//! unary    = ( "-" | "+" ) unary | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = integer | parameter | "(" integer ")" ;
//! primary  = number | "x" | "y" | parameter
//!          | ( "sin" | "cos" | "exp" | "sqrt" ) "(" expr ")"
//!          | "(" expr ")" ;
//! ```
//!
//! Exponents must be non-negative integers so that dual and interval
//! evaluation stay total. A parameter used as an exponent must hold such a
//! value when the field is parsed.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::scalar::Scalar;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Var(Var),
    Param(String),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

impl ExprAst {
    pub fn eval<S: Scalar>(&self, x: &S, y: &S, params: &Params) -> S {
        match self {
            ExprAst::Const(c) => S::constant(*c),
            ExprAst::Var(Var::X) => x.clone(),
            ExprAst::Var(Var::Y) => y.clone(),
            // unresolved names were rejected at parse time
            ExprAst::Param(name) => S::constant(params.get(name).copied().unwrap_or(f64::NAN)),
            ExprAst::Unary(op, a) => {
                let a = a.eval(x, y, params);
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Sqrt => a.sqrt(),
                }
            }
            ExprAst::Binary(op, a, b) => {
                let a = a.eval(x, y, params);
                let b = b.eval(x, y, params);
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                }
            }
            ExprAst::Pow(a, n) => a.eval(x, y, params).powi(*n),
        }
    }

    /// Names of all parameters referenced by the tree.
    pub fn parameters(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ExprAst::Param(name) => out.push(name),
            ExprAst::Unary(_, a) | ExprAst::Pow(a, _) => a.collect_params(out),
            ExprAst::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            ExprAst::Const(_) | ExprAst::Var(_) => {}
        }
    }
}

impl fmt::Display for ExprAst {
    /// Fully parenthesised; the output parses back to an equivalent expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            ExprAst::Var(Var::X) => f.write_str("x"),
            ExprAst::Var(Var::Y) => f.write_str("y"),
            ExprAst::Param(name) => f.write_str(name),
            ExprAst::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            ExprAst::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            ExprAst::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => '+',
                    BinaryOp::Sub => '-',
                    BinaryOp::Mul => '*',
                    BinaryOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            ExprAst::Pow(a, n) => write!(f, "({a})^{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: &'static str },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("exponent `{0}` is not a non-negative integer")]
    NonIntegerExponent(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("component {0} is missing")]
    MissingComponent(char),
    #[error("component {0} is defined twice")]
    DuplicateComponent(char),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(_, s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError { kind: ParseErrorKind::InvalidNumber(text.to_string()), pos: start })?;
            out.push((Tok::Num(v, text.to_string()), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()=;".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), pos: i });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    params: &'a Params,
}

impl<'a> Parser<'a> {
    fn new(src: &str, params: &'a Params) -> Result<Self, ParseError> {
        Ok(Self { toks: tokenize(src)?, at: 0, end: src.len(), params })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, pos: self.pos() }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::UnexpectedToken { found: t.to_string(), expected }),
            None => self.err(ParseErrorKind::UnexpectedEnd(expected)),
        }
    }

    fn expect_sym(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('+')) => BinaryOp::Add,
                Some(Tok::Sym('-')) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.term()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('*')) => BinaryOp::Mul,
                Some(Tok::Sym('/')) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.unary()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek() {
            Some(Tok::Sym('-')) => {
                self.at += 1;
                Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Some(Tok::Sym('+')) => {
                self.at += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Sym('^')) {
            return Ok(base);
        }
        self.at += 1;
        let n = self.exponent()?;
        Ok(ExprAst::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let pos = self.pos();
        let bad = |text: String| ParseError { kind: ParseErrorKind::NonIntegerExponent(text), pos };
        let to_int = |v: f64, text: String| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(bad(text))
            }
        };
        match self.bump() {
            Some(Tok::Num(v, text)) => to_int(v, text),
            Some(Tok::Ident(name)) => match self.params.get(&name) {
                Some(&v) => to_int(v, format!("{name} = {v}")),
                None => Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), pos }),
            },
            Some(Tok::Sym('(')) => {
                let n = self.exponent()?;
                self.expect_sym(')', "`)`")?;
                Ok(n)
            }
            Some(Tok::Sym('-')) => {
                let rest = match self.peek() {
                    Some(Tok::Num(_, text)) => text.clone(),
                    Some(t) => t.to_string(),
                    None => String::new(),
                };
                Err(bad(format!("-{rest}")))
            }
            Some(_) => {
                self.at -= 1;
                Err(self.unexpected("integer exponent"))
            }
            None => Err(self.err(ParseErrorKind::UnexpectedEnd("integer exponent"))),
        }
    }

    fn primary(&mut self) -> Result<ExprAst, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v, _)) => Ok(ExprAst::Const(v)),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect_sym(')', "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let func = match name.as_str() {
                    "sin" => Some(UnaryOp::Sin),
                    "cos" => Some(UnaryOp::Cos),
                    "exp" => Some(UnaryOp::Exp),
                    "sqrt" => Some(UnaryOp::Sqrt),
                    _ => None,
                };
                if let Some(op) = func {
                    self.expect_sym('(', "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect_sym(')', "`)`")?;
                    return Ok(ExprAst::Unary(op, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(ExprAst::Var(Var::X)),
                    "y" => Ok(ExprAst::Var(Var::Y)),
                    _ if self.params.contains_key(&name) => Ok(ExprAst::Param(name)),
                    _ => Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), pos }),
                }
            }
            Some(_) => {
                self.at -= 1;
                Err(self.unexpected("expression"))
            }
            None => Err(self.err(ParseErrorKind::UnexpectedEnd("expression"))),
        }
    }
}

/// Parses a single expression in `x`, `y` and the given parameters.
pub fn parse_expr(src: &str, params: &Params) -> Result<ExprAst, ParseError> {
    let mut p = Parser::new(src, params)?;
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses `P = <expr> ; Q = <expr>` (components in either order).
pub fn parse_components(src: &str, params: &Params) -> Result<(ExprAst, ExprAst), ParseError> {
    let mut p = Parser::new(src, params)?;
    let mut comp_p = None;
    let mut comp_q = None;
    while !p.at_end() {
        let pos = p.pos();
        let which = match p.bump() {
            Some(Tok::Ident(name)) if name == "P" || name == "Q" => name,
            Some(_) => {
                p.at -= 1;
                return Err(p.unexpected("`P =` or `Q =`"));
            }
            None => unreachable!(),
        };
        p.expect_sym('=', "`=`")?;
        let e = p.expr()?;
        let slot = if which == "P" { &mut comp_p } else { &mut comp_q };
        if slot.is_some() {
            let c = which.chars().next().unwrap_or('?');
            return Err(ParseError { kind: ParseErrorKind::DuplicateComponent(c), pos });
        }
        *slot = Some(e);
        if !p.at_end() {
            p.expect_sym(';', "`;` between components")?;
        }
    }
    let end = p.end;
    let missing = |c| ParseError { kind: ParseErrorKind::MissingComponent(c), pos: end };
    Ok((comp_p.ok_or_else(|| missing('P'))?, comp_q.ok_or_else(|| missing('Q'))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> Params {
        Params::new()
    }

    fn eval(src: &str, x: f64, y: f64) -> f64 {
        parse_expr(src, &no_params()).unwrap().eval(&x, &y, &no_params())
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(eval("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(eval("10 - 4 - 3", 0.0, 0.0), 3.0);
        assert_eq!(eval("-y^2", 0.0, 3.0), -9.0);
        assert_eq!(eval("2*-x", 1.5, 0.0), -3.0);
        assert_eq!(eval("-x - y^3", 1.0, 2.0), -9.0);
    }

    #[test]
    fn functions_and_numbers() {
        assert_eq!(eval("sqrt(x)", 16.0, 0.0), 4.0);
        assert_eq!(eval("exp(0) + cos(0) + sin(0)", 0.0, 0.0), 2.0);
        assert_eq!(eval("1e-3 * 2.5E+2", 0.0, 0.0), 0.25);
        assert_eq!(eval(".5", 0.0, 0.0), 0.5);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_components("P=y;Q=-x-y^3", &no_params()).unwrap();
        let b = parse_components("  P = y ;\n Q = - x - y ^ 3 ; ", &no_params()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameters_resolve() {
        let params = Params::from([("k".to_string(), 2.0), ("n".to_string(), 3.0)]);
        let e = parse_expr("k * x^n", &params).unwrap();
        assert_eq!(e.eval(&2.0, &0.0, &params), 16.0);
        assert_eq!(e.parameters(), vec!["k"]);
    }

    #[test]
    fn unknown_identifier_in_exponent() {
        let err = parse_components("P = y ; Q = -x - y^w", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("w".into()));
        assert_eq!(err.pos, 19);
    }

    #[test]
    fn unknown_identifier_in_body() {
        let err = parse_expr("x + z", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("z".into()));
        assert_eq!(err.pos, 4);
    }

    #[test]
    fn non_integer_exponents() {
        for src in ["x^2.5", "x^-1", "x^k"] {
            let params = Params::from([("k".to_string(), 0.5)]);
            let err = parse_expr(src, &params).unwrap_err();
            assert!(matches!(err.kind, ParseErrorKind::NonIntegerExponent(_)), "{src}: {err}");
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_expr("x + * y", &no_params()).unwrap_err();
        assert_eq!(err.pos, 4);
        let err = parse_expr("(x + y", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd("`)`"));
        let err = parse_expr("x $ y", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(err.pos, 2);
        let err = parse_expr("sin x", &no_params()).unwrap_err();
        assert_eq!(err.pos, 4);
        let err = parse_expr("x^2^3", &no_params()).unwrap_err();
        assert_eq!(err.pos, 3);
    }

    #[test]
    fn component_errors() {
        let err = parse_components("P = y", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingComponent('Q'));
        let err = parse_components("P = y; P = x; Q = 1", &no_params()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateComponent('P'));
        let err = parse_components("P = y Q = x", &no_params()).unwrap_err();
        assert_eq!(err.pos, 6);
    }

    #[test]
    fn display_round_trips() {
        let params = Params::from([("a".to_string(), -1.5)]);
        let src = "sin(x*a) - -3.25/(1+y^4) + exp(-sqrt(x^2+1))";
        let e = parse_expr(src, &params).unwrap();
        let again = parse_expr(&e.to_string(), &params).unwrap();
        let v1 = e.eval(&0.3, &-0.7, &params);
        let v2 = again.eval(&0.3, &-0.7, &params);
        assert_eq!(v1, v2);
    }
}
