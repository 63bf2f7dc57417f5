//! Parser for the function DSL.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' ['-' | '+'] integer | '^' '(' ['-'] integer ')')?
//! primary := number | 'z' | 'i' | 'pi' | call | '(' expr ')'
//! call    := ('exp' | 'sin' | 'cos') '(' expr ')'
//!          | ('wp' | 'wpp') '(' z + constant ')'
//!          | 'shift' '(' expr ',' constant ')'
//! ```

use super::{probe_points, Expr, Lattice};
use crate::error::{NevError, Result};
use crate::C64;
use std::sync::Arc;

/// Parser settings; the lattice backs every `wp`/`wpp` call.
#[derive(Debug, Clone)]
pub struct ParseContext {
    pub lattice: Arc<Lattice>,
}

impl Default for ParseContext {
    fn default() -> Self {
        ParseContext {
            lattice: Arc::new(Lattice::square(C64::new(1.0, 0.0)).expect("unit square lattice")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a ParseContext,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| NevError::parse(src, start, format!("bad number '{text}'")))?;
            out.push((Tok::Num(v), start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(ch) {
            out.push((Tok::Sym(ch), i));
            i += 1;
        } else {
            return Err(NevError::parse(src, i, format!("unexpected character '{ch}'")));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(NevError::parse(self.src, self.at(), msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Sym('/') => {
                    let at = self.at();
                    self.bump();
                    let den = self.unary()?;
                    acc = acc
                        .div(&den)
                        .map_err(|_| NevError::parse(self.src, at, "denominator is identically zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn integer(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::Sym('(');
        if paren {
            self.bump();
        }
        let sign = match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                -1
            }
            Tok::Sym('+') => {
                self.bump();
                1
            }
            _ => 1,
        };
        let k = match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= 1e6 => {
                self.bump();
                sign * v as i32
            }
            _ => return self.err("exponent must be an integer"),
        };
        if paren {
            self.expect(')')?;
        }
        Ok(k)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let k = self.integer()?;
            if k < 0 && base.is_zero() {
                return self.err("negative power of zero");
            }
            return Ok(base.powi(k));
        }
        Ok(base)
    }

    fn constant_arg(&mut self, what: &str) -> Result<C64> {
        let at = self.at();
        let e = self.expr()?;
        if !e.is_constant_expr() {
            return Err(NevError::parse(self.src, at, format!("{what} must be a constant")));
        }
        Ok(e.eval(C64::new(0.0, 0.0)))
    }

    /// Offset `s` of an argument of the form `z + s`.
    fn unit_affine_arg(&mut self) -> Result<C64> {
        let at = self.at();
        let e = self.expr()?;
        let probes = probe_points(4, 2.0, 17);
        let offsets: Vec<C64> = probes.iter().map(|p| e.eval(*p) - p).collect();
        let s = offsets[0];
        if !s.is_finite() || offsets.iter().any(|o| (o - s).norm() > 1e-12 * (1.0 + s.norm())) {
            return Err(NevError::parse(
                self.src,
                at,
                "argument of wp/wpp must be z plus a constant",
            ));
        }
        Ok(s)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(Expr::z()),
                "i" => Ok(Expr::constant(C64::new(0.0, 1.0))),
                "pi" => Ok(Expr::real(std::f64::consts::PI)),
                "exp" | "sin" | "cos" => {
                    self.expect('(')?;
                    let a = self.expr()?;
                    self.expect(')')?;
                    Ok(match name.as_str() {
                        "exp" => a.exp(),
                        "sin" => a.sin(),
                        _ => a.cos(),
                    })
                }
                "wp" | "wpp" => {
                    self.expect('(')?;
                    let s = self.unit_affine_arg()?;
                    self.expect(')')?;
                    let base = if name == "wp" {
                        Expr::wp(&self.ctx.lattice)
                    } else {
                        Expr::wpp(&self.ctx.lattice)
                    };
                    Ok(base.shift(s))
                }
                "shift" => {
                    self.expect('(')?;
                    let f = self.expr()?;
                    self.expect(',')?;
                    let s = self.constant_arg("shift offset")?;
                    self.expect(')')?;
                    Ok(f.shift(s))
                }
                _ => Err(NevError::parse(self.src, at, format!("unknown identifier '{name}'"))),
            },
            Tok::End => Err(NevError::parse(self.src, at, "unexpected end of input")),
            Tok::Sym(c) => Err(NevError::parse(self.src, at, format!("unexpected '{c}'"))),
        }
    }
}

/// Parses with the default lattice `⟨1, i⟩`.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with(src, &ParseContext::default())
}

pub fn parse_with(src: &str, ctx: &ParseContext) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0, ctx };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(src: &str, z: C64, want: C64) {
        let v = parse(src).unwrap().eval(z);
        assert!((v - want).norm() <= 1e-13 * (1.0 + want.norm()), "{src}: {v} vs {want}");
    }

    #[test]
    fn precedence() {
        let z = c(0.3, 0.2);
        close("2*z^2", z, 2.0 * z * z);
        close("-z^2", z, -(z * z));
        close("z^-2 + 1/z", z, z.powi(-2) + 1.0 / z);
        close("exp(z) - 2", z, z.exp() - 2.0);
        close(
            "sin(pi*z)*cos(z)/ (z - 0.5)",
            z,
            (std::f64::consts::PI * z).sin() * z.cos() / (z - 0.5),
        );
        close("shift(z^2, 1 + i)", z, (z + c(1.0, 1.0)).powi(2));
        close("(1+2*i)*z", z, c(1.0, 2.0) * z);
        close("z^(-3)", z, z.powi(-3));
    }

    #[test]
    fn weierstrass_calls() {
        let ctx = ParseContext::default();
        let z = c(0.3, 0.4);
        let want = ctx.lattice.wp_pair(z + 0.25).unwrap().0;
        close("wp(z + 0.25)", z, want);
        assert!(parse("wp(2*z)").is_err());
    }

    #[test]
    fn error_positions() {
        match parse("exp(z") {
            Err(NevError::Parse { pos, caret, .. }) => {
                assert_eq!(pos, 5);
                assert_eq!(caret, "     ^");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("z ^ 1.5"), Err(NevError::Parse { pos: 4, .. })));
        assert!(matches!(parse("foo(z)"), Err(NevError::Parse { pos: 0, .. })));
        assert!(parse("1/(z - z)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in ["exp(z) + z*wp(z)^2", "sin(pi*z)/(z-1)^3", "shift(cos(z), 0.5-2*i) - 3"] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            for p in probe_points(5, 1.7, 2) {
                let (a, b) = (e.eval(p), again.eval(p));
                assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }
    }
}
