//! The core-function language.
//!
//! A core is one expression per output component, separated by newlines or
//! `;`. Expressions use `+`, `-`, `*`, non-negative integer powers `^n`,
//! parentheses, rational literals (`3`, `3/4`, `0.25`) and jet variables
//! `u<α>` with an optional derivative suffix such as `u1_t` or `u2_x1x2`.
//! `#` starts a comment that runs to the end of the line.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::index::{Coord, JetIndex};
use super::ops::JetExpr;
use super::poly::Poly;

/// Largest exponent accepted after `^`.
const MAX_POWER: u32 = 16;

/// Parses a core, inferring the spatial dimension from the highest axis
/// referenced (at least 1).
pub fn parse_core(text: &str) -> Result<JetExpr> {
    parse_impl(text, None)
}

/// Parses a core in a fixed spatial dimension; axes above `dim` are rejected.
pub fn parse_core_with_dim(text: &str, dim: usize) -> Result<JetExpr> {
    if !(1..=2).contains(&dim) {
        return Err(crate::error::invalid("dim", "dimension must be 1 or 2"));
    }
    parse_impl(text, Some(dim))
}

/// Canonical text of an expression, one component per line; the output
/// parses back to the same expression.
pub fn print_core(expr: &JetExpr) -> String {
    expr.to_string()
}

struct Line<'a> {
    number: usize,
    text: &'a str,
    offset: usize,
}

fn split_components(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for piece in code.split(';') {
            if !piece.trim().is_empty() {
                out.push(Line {
                    number: n + 1,
                    text: piece,
                    offset,
                });
            }
            offset += piece.chars().count() + 1;
        }
    }
    out
}

fn parse_impl(text: &str, dim: Option<usize>) -> Result<JetExpr> {
    let lines = split_components(text);
    if lines.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "empty core".into(),
        });
    }
    let ncomp = lines.len();
    let max_axis = dim.unwrap_or(2);
    let mut components = Vec::with_capacity(ncomp);
    let mut highest = 1u8;
    for line in &lines {
        let tokens = lex(line)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            line: line.number,
            end_column: line.offset + line.text.chars().count() + 1,
            ncomp,
            max_axis,
            highest: 1,
        };
        let poly = p.expression()?;
        if let Some(t) = p.peek() {
            return Err(p.syntax_at(t.column, format!("unexpected {}", t.kind.describe())));
        }
        highest = highest.max(p.highest);
        components.push(poly);
    }
    Ok(JetExpr::new(dim.unwrap_or(highest as usize), ncomp, components))
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Number(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Number(n) => format!("number `{n}`"),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Plus => "`+`".into(),
            Kind::Minus => "`-`".into(),
            Kind::Star => "`*`".into(),
            Kind::Caret => "`^`".into(),
            Kind::Open => "`(`".into(),
            Kind::Close => "`)`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    column: usize,
}

fn lex(line: &Line<'_>) -> Result<Vec<Token>> {
    let chars: Vec<char> = line.text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let err = |i: usize, message: String| Error::Syntax {
        line: line.number,
        column: line.offset + i + 1,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let column = line.offset + i + 1;
        let single = match c {
            '+' => Some(Kind::Plus),
            '-' => Some(Kind::Minus),
            '*' => Some(Kind::Star),
            '^' => Some(Kind::Caret),
            '(' => Some(Kind::Open),
            ')' => Some(Kind::Close),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let mut value = decimal(&chars[start..i].iter().collect::<String>())
                .ok_or_else(|| err(start, "malformed number".into()))?;
            if i < chars.len() && chars[i] == '/' {
                let dstart = i + 1;
                let mut j = dstart;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == dstart {
                    return Err(err(i, "expected a denominator after `/`".into()));
                }
                let den: BigInt = chars[dstart..j].iter().collect::<String>().parse().expect("digits");
                if den.is_zero() {
                    return Err(err(dstart, "zero denominator".into()));
                }
                value /= BigRational::from_integer(den);
                i = j;
            }
            tokens.push(Token {
                kind: Kind::Number(value),
                column,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: Kind::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(err(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(tokens)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `3.`.
fn decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(num, den))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_column: usize,
    ncomp: usize,
    max_axis: usize,
    highest: u8,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn syntax_at(&self, column: usize, message: String) -> Error {
        Error::Syntax {
            line: self.line,
            column,
            message,
        }
    }

    fn eat(&mut self, kind: &Kind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expression(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Kind::Plus) {
                acc = &acc + &self.term()?;
            } else if self.eat(&Kind::Minus) {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while self.eat(&Kind::Star) {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        if self.eat(&Kind::Minus) {
            return Ok(-&self.unary()?);
        }
        if self.eat(&Kind::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if !self.eat(&Kind::Caret) {
            return Ok(base);
        }
        let tok = self.next_or_end("an exponent")?;
        let exponent = match &tok.kind {
            Kind::Number(n) if n.is_integer() && *n >= BigRational::zero() => n
                .to_integer()
                .try_into()
                .ok()
                .filter(|e: &u32| *e <= MAX_POWER),
            _ => None,
        };
        let e = exponent.ok_or_else(|| {
            self.syntax_at(
                tok.column,
                format!("exponent must be an integer between 0 and {MAX_POWER}"),
            )
        })?;
        let mut out = Poly::constant(BigRational::one());
        for _ in 0..e {
            out = &out * &base;
        }
        Ok(out)
    }

    fn next_or_end(&mut self, what: &str) -> Result<Token> {
        match self.tokens.get(self.pos).cloned() {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.syntax_at(self.end_column, format!("expected {what}, found end of input"))),
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        let tok = self.next_or_end("an operand")?;
        match tok.kind {
            Kind::Number(n) => Ok(Poly::constant(n)),
            Kind::Ident(name) => Ok(Poly::var(self.variable(&name, tok.column)?)),
            Kind::Open => {
                let inner = self.expression()?;
                if self.eat(&Kind::Close) {
                    Ok(inner)
                } else {
                    let column = self.peek().map_or(self.end_column, |t| t.column);
                    Err(self.syntax_at(column, format!("unbalanced parenthesis opened at column {}", tok.column)))
                }
            }
            other => Err(self.syntax_at(tok.column, format!("expected an operand, found {}", other.describe()))),
        }
    }

    fn unknown(&self, name: &str, column: usize) -> Error {
        Error::UnknownIdentifier {
            ident: name.to_string(),
            line: self.line,
            column,
        }
    }

    fn variable(&mut self, name: &str, column: usize) -> Result<JetIndex> {
        let (head, suffix) = match name.split_once('_') {
            Some((h, s)) => (h, Some(s)),
            None => (name, None),
        };
        let comp: usize = head
            .strip_prefix('u')
            .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) && !d.starts_with('0'))
            .and_then(|d| d.parse().ok())
            .filter(|c| (1..=self.ncomp).contains(c))
            .ok_or_else(|| self.unknown(name, column))?;
        let mut derivs = Vec::new();
        if let Some(suffix) = suffix {
            let chars: Vec<char> = suffix.chars().collect();
            if chars.is_empty() {
                return Err(self.unknown(name, column));
            }
            let mut i = 0;
            while i < chars.len() {
                if suffix[i..].starts_with("eta") {
                    return Err(self.syntax_at(
                        column,
                        format!("`{name}`: scale derivatives are not allowed in a core"),
                    ));
                }
                match chars[i] {
                    't' => {
                        derivs.push(Coord::T);
                        i += 1;
                    }
                    'x' => {
                        let start = i + 1;
                        let mut j = start;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        let axis: usize = suffix[start..j].parse().map_err(|_| self.unknown(name, column))?;
                        if axis == 0 || axis > self.max_axis {
                            return Err(self.unknown(name, column));
                        }
                        self.highest = self.highest.max(axis as u8);
                        derivs.push(Coord::X(axis as u8));
                        i = j;
                    }
                    _ => return Err(self.unknown(name, column)),
                }
            }
        }
        Ok(JetIndex::new(comp - 1, derivs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::poly::{rational, Monomial};
    use proptest::prelude::*;

    #[test]
    fn burgers_core() {
        let core = parse_core("u1_t + u1*u1_x1").unwrap();
        assert_eq!(core.dim(), 1);
        assert_eq!(core.ncomp(), 1);
        assert_eq!(core.to_string(), "u1*u1_x1 + u1_t");
    }

    #[test]
    fn unbalanced_parenthesis() {
        match parse_core("u1_t + (u1*u1_x1") {
            Err(Error::Syntax { line, column, message }) => {
                assert_eq!(line, 1);
                assert_eq!(column, 17);
                assert!(message.contains("unbalanced"), "{message}");
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn identifier_errors() {
        for bad in ["u0", "u2", "v1", "u1_y", "u1_x3", "u1_", "u01"] {
            assert!(
                matches!(parse_core(bad), Err(Error::UnknownIdentifier { .. })),
                "{bad}"
            );
        }
        assert!(matches!(
            parse_core_with_dim("u1_x2", 1),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(parse_core("u1_eta"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_core("u1_x1eta"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_core("u1 +\n") {
            Err(Error::Syntax { line: 1, column: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_core("u1\nu2 ** u1") {
            Err(Error::Syntax { line: 2, column: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_core("u1 $ 2"), Err(Error::Syntax { column: 4, .. })));
        assert!(matches!(parse_core("u1^u1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_core("3/0*u1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_core("# nothing"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn literals_and_components() {
        let core = parse_core("0.25*u1 - 3/4 # comment\n(u1 + u2)^2; 2*u2_x2").unwrap();
        assert_eq!(core.ncomp(), 3);
        assert_eq!(core.len(), 3);
        assert_eq!(core.dim(), 2);
        assert_eq!(core.component(0).to_string(), "-3/4 + 1/4*u1");
        assert_eq!(core.component(1).to_string(), "2*u1*u2 + u1^2 + u2^2");
        assert_eq!(core.component(2).to_string(), "2*u2_x2");
        let again = parse_core(&print_core(&core)).unwrap();
        assert_eq!(again, core);
    }

    #[test]
    fn mixed_partials_parse_equal() {
        let a = parse_core("u1_x2x1t").unwrap();
        let b = parse_core("u1_tx1x2").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "u1_tx1x2");
    }

    fn jet_var() -> impl Strategy<Value = JetIndex> {
        (0usize..3, prop::collection::vec(0u8..3, 0..3)).prop_map(|(c, d)| {
            JetIndex::new(
                c,
                d.into_iter().map(|k| if k == 0 { Coord::T } else { Coord::X(k) }),
            )
        })
    }

    fn poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(
            (-40i64..40, 1i64..9, prop::collection::vec((jet_var(), 1u32..4), 0..4)),
            0..6,
        )
        .prop_map(|terms| {
            let mut p = Poly::zero();
            for (num, den, factors) in terms {
                let mut m = Monomial::one();
                for (v, pow) in factors {
                    for _ in 0..pow {
                        m = m.mul(&Monomial::var(v.clone()));
                    }
                }
                p.add_term(m, rational(num, den));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn print_parse_round_trip(components in prop::collection::vec(poly(), 3)) {
            let expr = JetExpr::new(2, 3, components);
            let text = print_core(&expr);
            let back = parse_core_with_dim(&text, 2).unwrap();
            prop_assert_eq!(back, expr);
        }
    }
}
