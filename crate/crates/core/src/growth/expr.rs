//! A small expression language for total functions of one natural `n`.
//!
//! ```text
//! expr  := sum
//! sum   := prod (('+' | '-') prod)*          '-' is truncated at 0
//! prod  := power (('*' | '/' | '%') power)*
//! power := atom ('^' power)?
//! atom  := NUMBER | 'n' | '(' expr ')'
//!        | 'mono' '(' expr ')' ('(' expr ')')?   n + max_{k≤n} e(k)
//!        | 'hprime' '(' expr ')'                  mono(e)(fw(n))
//!        | 'fgh' '(' NUMBER ',' expr ')' | 'fw' '(' expr ')'
//! ```

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var,
    Num(BigUint),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Rem(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    /// `body*` applied to `arg`.
    Mono { body: Box<Expr>, arg: Box<Expr> },
    Fgh(u32, Box<Expr>),
    Fw(Box<Expr>),
}

/// Evaluation limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub ceiling_bits: u64,
    /// Largest argument for which `mono` of a non-monotone body scans `k ≤ n`.
    pub scan_limit: u64,
}

pub const DEFAULT_CEILING_BITS: u64 = 1 << 24;

impl Default for Limits {
    fn default() -> Self {
        Limits {
            ceiling_bits: DEFAULT_CEILING_BITS,
            scan_limit: 1 << 16,
        }
    }
}

impl Limits {
    fn check(&self, what: &str, bits: u64) -> Result<()> {
        if bits > self.ceiling_bits {
            Err(self.overflow(what))
        } else {
            Ok(())
        }
    }

    fn overflow(&self, what: &str) -> Error {
        Error::Overflow {
            what: what.to_string(),
            ceiling_bits: self.ceiling_bits,
        }
    }
}

impl Expr {
    /// Syntactic monotonicity: built from `n`, constants and operators that
    /// preserve non-decreasing functions of naturals.
    pub fn is_monotone(&self) -> bool {
        match self {
            Expr::Var | Expr::Num(_) => true,
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Pow(a, b) => a.is_monotone() && b.is_monotone(),
            Expr::Sub(..) | Expr::Div(..) | Expr::Rem(..) => false,
            Expr::Mono { arg, .. } => arg.is_monotone(),
            Expr::Fgh(_, a) | Expr::Fw(a) => a.is_monotone(),
        }
    }

    pub fn eval(&self, n: &BigUint, lim: &Limits) -> Result<BigUint> {
        let v = match self {
            Expr::Var => n.clone(),
            Expr::Num(v) => v.clone(),
            Expr::Add(a, b) => a.eval(n, lim)? + b.eval(n, lim)?,
            Expr::Sub(a, b) => {
                let (x, y) = (a.eval(n, lim)?, b.eval(n, lim)?);
                if x > y {
                    x - y
                } else {
                    BigUint::zero()
                }
            }
            Expr::Mul(a, b) => {
                let (x, y) = (a.eval(n, lim)?, b.eval(n, lim)?);
                lim.check("product", x.bits() + y.bits())?;
                x * y
            }
            Expr::Div(a, b) | Expr::Rem(a, b) => {
                let (x, y) = (a.eval(n, lim)?, b.eval(n, lim)?);
                if y.is_zero() {
                    return Err(Error::Expr("division by zero".into()));
                }
                if matches!(self, Expr::Div(..)) {
                    x / y
                } else {
                    x % y
                }
            }
            Expr::Pow(a, b) => pow(&a.eval(n, lim)?, &b.eval(n, lim)?, lim)?,
            Expr::Mono { body, arg } => {
                let at = arg.eval(n, lim)?;
                monotonized(body, &at, lim)?
            }
            Expr::Fgh(k, a) => fgh(*k, &a.eval(n, lim)?, lim)?,
            Expr::Fw(a) => f_omega(&a.eval(n, lim)?, lim)?,
        };
        lim.check("value", v.bits())?;
        Ok(v)
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            toks: tokenize(src)?,
            pos: 0,
        };
        let e = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(Error::Expr(format!("unexpected `{}`", p.toks[p.pos])));
        }
        Ok(e)
    }
}

fn pow(base: &BigUint, exp: &BigUint, lim: &Limits) -> Result<BigUint> {
    if exp.is_zero() {
        return Ok(BigUint::one());
    }
    if base.is_zero() || base.is_one() {
        return Ok(base.clone());
    }
    let e = exp.to_u64().ok_or_else(|| lim.overflow("power"))?;
    // bits(b^e) ≥ e·(bits(b) − 1) + 1
    let low = (base.bits() - 1).saturating_mul(e).saturating_add(1);
    lim.check("power", low)?;
    let e32 = u32::try_from(e).map_err(|_| lim.overflow("power"))?;
    let v = base.pow(e32);
    lim.check("power", v.bits())?;
    Ok(v)
}

/// `h*(n) = n + max{h(k) : k ≤ n}`.
pub(crate) fn monotonized(body: &Expr, n: &BigUint, lim: &Limits) -> Result<BigUint> {
    if body.is_monotone() {
        return Ok(n + body.eval(n, lim)?);
    }
    let top = n
        .to_u64()
        .filter(|&t| t <= lim.scan_limit)
        .ok_or_else(|| Error::Refused(format!("monotonizing a non-monotone function up to {n} exceeds the scan limit")))?;
    let mut best = BigUint::zero();
    for k in 0..=top {
        best = best.max(body.eval(&BigUint::from(k), lim)?);
    }
    Ok(n + best)
}

/// Wainer hierarchy: `F₀(n) = n+1`, `F_{k+1}(n) = F_k^{(n+1)}(n)`.
pub fn fgh(k: u32, n: &BigUint, lim: &Limits) -> Result<BigUint> {
    match k {
        0 => Ok(n + 1u32),
        1 => Ok(n * 2u32 + 1u32),
        2 => {
            // 2^(n+1)·(n+1) − 1
            let m = n + 1u32;
            let shift = m.to_u64().ok_or_else(|| lim.overflow("F_2"))?;
            lim.check("F_2", shift.saturating_add(m.bits()))?;
            Ok((&m << shift) - 1u32)
        }
        _ => {
            let times = n.to_u64().ok_or_else(|| lim.overflow("iteration count"))? + 1;
            let mut v = n.clone();
            for _ in 0..times {
                v = fgh(k - 1, &v, lim)?;
            }
            Ok(v)
        }
    }
}

/// `F_ω(n) = F_n(n)`.
pub fn f_omega(n: &BigUint, lim: &Limits) -> Result<BigUint> {
    let k = n
        .to_u32()
        .ok_or_else(|| lim.overflow("F_ω level"))?;
    fgh(k, n, lim)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "n"),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Rem(a, b) => write!(f, "({a} % {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Mono { body, arg } => match **arg {
                Expr::Var => write!(f, "mono({body})"),
                _ => write!(f, "mono({body})({arg})"),
            },
            Expr::Fgh(k, a) => write!(f, "fgh({k}, {a})"),
            Expr::Fw(a) => write!(f, "fw({a})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigUint),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                s.push(d);
                chars.next();
            }
            toks.push(Tok::Num(s.parse().expect("digits")));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_alphanumeric() || **d == '_') {
                s.push(d);
                chars.next();
            }
            toks.push(Tok::Ident(s));
        } else if "+-*/%^(),".contains(c) {
            toks.push(Tok::Sym(c));
            chars.next();
        } else {
            return Err(Error::Expr(format!("unexpected character `{c}`")));
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self, c: char) -> bool {
        self.toks.get(self.pos) == Some(&Tok::Sym(c))
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expr(format!(
                "expected `{c}`, found {}",
                self.toks.get(self.pos).map_or("end of input".to_string(), |t| format!("`{t}`"))
            )))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.prod()?;
        loop {
            if self.peek_sym('+') {
                self.pos += 1;
                e = Expr::Add(Box::new(e), Box::new(self.prod()?));
            } else if self.peek_sym('-') {
                self.pos += 1;
                e = Expr::Sub(Box::new(e), Box::new(self.prod()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn prod(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        loop {
            let op = ['*', '/', '%'].into_iter().find(|&c| self.peek_sym(c));
            let Some(op) = op else { return Ok(e) };
            self.pos += 1;
            let rhs = Box::new(self.power()?);
            e = match op {
                '*' => Expr::Mul(Box::new(e), rhs),
                '/' => Expr::Div(Box::new(e), rhs),
                _ => Expr::Rem(Box::new(e), rhs),
            };
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_sym('^') {
            self.pos += 1;
            return Ok(Expr::Pow(Box::new(base), Box::new(self.power()?)));
        }
        Ok(base)
    }

    fn parenthesized(&mut self) -> Result<Expr> {
        self.expect('(')?;
        let e = self.sum()?;
        self.expect(')')?;
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expr("unexpected end of input".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                self.pos -= 1;
                self.parenthesized()
            }
            Tok::Ident(name) => match name.as_str() {
                "n" | "x" => Ok(Expr::Var),
                "mono" => {
                    let body = Box::new(self.parenthesized()?);
                    let arg = if self.peek_sym('(') {
                        Box::new(self.parenthesized()?)
                    } else {
                        Box::new(Expr::Var)
                    };
                    Ok(Expr::Mono { body, arg })
                }
                "hprime" => Ok(Expr::Mono {
                    body: Box::new(self.parenthesized()?),
                    arg: Box::new(Expr::Fw(Box::new(Expr::Var))),
                }),
                "fw" => Ok(Expr::Fw(Box::new(self.parenthesized()?))),
                "fgh" => {
                    self.expect('(')?;
                    let k = match self.toks.get(self.pos) {
                        Some(Tok::Num(k)) => k
                            .to_u32()
                            .ok_or_else(|| Error::Expr(format!("hierarchy level {k} too large")))?,
                        _ => return Err(Error::Expr("fgh expects a literal level".into())),
                    };
                    self.pos += 1;
                    self.expect(',')?;
                    let a = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::Fgh(k, Box::new(a)))
                }
                other => Err(Error::Expr(format!("unknown name `{other}`"))),
            },
            Tok::Sym(c) => Err(Error::Expr(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, n: u64) -> BigUint {
        Expr::parse(src).unwrap().eval(&BigUint::from(n), &Limits::default()).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1 + 2 * 3", 0), BigUint::from(7u32));
        assert_eq!(ev("2^3^2", 0), BigUint::from(512u32));
        assert_eq!(ev("(n + 1)^2", 4), BigUint::from(25u32));
        assert_eq!(ev("3 - n", 5), BigUint::from(0u32));
        assert_eq!(ev("n % 3 + n / 3", 10), BigUint::from(4u32));
        assert_eq!(ev("0^0", 0), BigUint::from(1u32));
    }

    #[test]
    fn display_round_trips() {
        for src in ["n^2 + 1", "mono(n % 7)", "mono(n)(fw(n))", "hprime(n*n)", "fgh(3, n) - 2", "2^(n+3)"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{src}");
        }
    }

    #[test]
    fn monotone_flag_is_syntactic() {
        assert!(Expr::parse("n^2 + fw(n)").unwrap().is_monotone());
        assert!(!Expr::parse("n % 3").unwrap().is_monotone());
        assert!(Expr::parse("mono(n % 3)").unwrap().is_monotone());
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "n +", "foo(n)", "fgh(n, n)", "(n", "n $ 2"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ceiling_refuses_huge_values() {
        let lim = Limits { ceiling_bits: 64, ..Limits::default() };
        let e = Expr::parse("2^n").unwrap();
        assert!(e.eval(&BigUint::from(63u32), &lim).is_ok());
        assert!(matches!(e.eval(&BigUint::from(64u32), &lim), Err(Error::Overflow { .. })));
    }
}
