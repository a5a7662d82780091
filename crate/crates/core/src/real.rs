//! Exact rationals with an absolute error bound, plus the small expression
//! language accepted wherever a length or a number is typed by hand
//! (`sqrt(2)`, `e`, `pi`, `7/5`, `1+sqrt(2)`, `liouville(5)`).

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Decimal digits carried by irrational constants.
pub const DIGITS: u32 = 110;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected character '{0}' at position {1}")]
    Unexpected(char, usize),
    #[error("unknown identifier '{0}'")]
    UnknownIdent(String),
    #[error("division by a quantity that may be zero")]
    DivisionByZero,
    #[error("square root of a quantity that may be negative")]
    NegativeSqrt,
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("non-finite floating point input")]
    NonFinite,
}

/// A real number known as `value ± err`.
///
/// `tol` is the distance below which a rational approximation is taken to be
/// the number itself. It is zero for exact rationals, the error bound for
/// constants, and `1e-14` (relative) for values that came in as `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Real {
    pub value: BigRational,
    pub err: BigRational,
    pub tol: BigRational,
    pub source: Option<String>,
}

fn ten_pow(n: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), n as usize)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Floor of the square root of a non-negative integer.
fn isqrt(n: &BigInt) -> BigInt {
    let (_, mag) = n.clone().into_parts();
    BigInt::from_biguint(Sign::Plus, BigUint::sqrt(&mag))
}

impl Real {
    pub fn exact(value: BigRational) -> Self {
        Real { value, err: BigRational::zero(), tol: BigRational::zero(), source: None }
    }

    pub fn integer(n: i64) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// The `f64` is taken at face value with half an ulp of uncertainty.
    pub fn from_f64(x: f64) -> Result<Self, ExprError> {
        if !x.is_finite() {
            return Err(ExprError::NonFinite);
        }
        let value = BigRational::from_float(x).ok_or(ExprError::NonFinite)?;
        let ulp = if x == 0.0 { f64::MIN_POSITIVE } else { (x.abs().next_up() - x.abs()) / 2.0 };
        let err = BigRational::from_float(ulp).ok_or(ExprError::NonFinite)?;
        let tol = BigRational::from_float(1e-14 * x.abs().max(1.0)).ok_or(ExprError::NonFinite)?;
        Ok(Real { value, err, tol, source: None })
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_exact(&self) -> bool {
        self.err.is_zero()
    }

    pub fn with_source(mut self, s: &str) -> Self {
        self.source = Some(s.to_string());
        self
    }

    fn with_err(value: BigRational, err: BigRational) -> Self {
        Real { value, tol: err.clone(), err, source: None }
    }

    pub fn lower(&self) -> BigRational {
        &self.value - &self.err
    }

    pub fn upper(&self) -> BigRational {
        &self.value + &self.err
    }

    pub fn add(&self, o: &Real) -> Real {
        Real::with_err(&self.value + &o.value, &self.err + &o.err)
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real::with_err(&self.value - &o.value, &self.err + &o.err)
    }

    pub fn neg(&self) -> Real {
        Real::with_err(-&self.value, self.err.clone())
    }

    pub fn mul(&self, o: &Real) -> Real {
        let err = self.value.abs() * &o.err + o.value.abs() * &self.err + &self.err * &o.err;
        Real::with_err(&self.value * &o.value, err)
    }

    pub fn div(&self, o: &Real) -> Result<Real, ExprError> {
        let margin = o.value.abs() - &o.err;
        if !margin.is_positive() {
            return Err(ExprError::DivisionByZero);
        }
        let value = &self.value / &o.value;
        let err = (&self.err + value.abs() * &o.err) / margin;
        Ok(Real::with_err(value, err))
    }

    pub fn sqrt(&self) -> Result<Real, ExprError> {
        if self.lower().is_negative() {
            return Err(ExprError::NegativeSqrt);
        }
        let (root, round_err) = sqrt_rational(&self.value);
        if self.err.is_zero() {
            return Ok(Real::with_err(root, round_err));
        }
        // |sqrt(v) - sqrt(v±e)| <= e / sqrt(v-e); floor-sqrt of the lower end
        // gives a safe denominator.
        let (low_root, _) = sqrt_rational(&self.lower());
        if low_root.is_zero() {
            return Err(ExprError::NegativeSqrt);
        }
        let err = round_err + &self.err / low_root;
        Ok(Real::with_err(root, err))
    }

    pub fn e() -> Real {
        // sum_{k<=m} 1/k!, tail bounded by 2/(m+1)!
        let m = 90u32;
        let mut sum = BigRational::zero();
        let mut fact = BigInt::one();
        for k in 0..=m {
            if k > 0 {
                fact *= BigInt::from(k);
            }
            sum += BigRational::new(BigInt::one(), fact.clone());
        }
        let tail = BigRational::new(BigInt::from(2), fact * BigInt::from(m + 1));
        Real::with_err(sum, tail).with_source("e")
    }

    pub fn pi() -> Real {
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let (a5, e5) = atan_inv(5, 170);
        let (a239, e239) = atan_inv(239, 50);
        let value = a5 * rat(16, 1) - a239 * rat(4, 1);
        let err = e5 * rat(16, 1) + e239 * rat(4, 1);
        Real::with_err(value, err).with_source("pi")
    }

    /// Truncated Liouville constant `sum_{k=1}^{n} 10^{-k!}` (exact rational).
    pub fn liouville(n: u32) -> Real {
        let mut sum = BigRational::zero();
        let mut fact = 1u32;
        for k in 1..=n {
            fact *= k;
            sum += BigRational::new(BigInt::one(), ten_pow(fact));
        }
        Real::exact(sum).with_source(&format!("liouville({n})"))
    }

    pub fn parse(s: &str) -> Result<Real, ExprError> {
        let mut p = Parser { chars: s.chars().collect(), pos: 0 };
        let r = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(ExprError::Unexpected(p.chars[p.pos], p.pos));
        }
        Ok(r.with_source(s.trim()))
    }
}

/// Square root of a non-negative rational to [`DIGITS`] digits; returns the
/// truncated root and its error bound (zero when the root is exact).
fn sqrt_rational(x: &BigRational) -> (BigRational, BigRational) {
    let num = x.numer().clone();
    let den = x.denom().clone();
    let prod = &num * &den;
    let r = isqrt(&prod);
    if &r * &r == prod {
        return (BigRational::new(r, den), BigRational::zero());
    }
    let scale = ten_pow(DIGITS);
    let scaled = prod * &scale * &scale;
    let r = isqrt(&scaled);
    let d = den * scale;
    (BigRational::new(r, d.clone()), BigRational::new(BigInt::one(), d))
}

/// atan(1/x) by its alternating series, with the first omitted term as bound.
fn atan_inv(x: i64, terms: u32) -> (BigRational, BigRational) {
    let x2 = BigInt::from(x * x);
    let mut pw = BigInt::from(x);
    let mut sum = BigRational::zero();
    for k in 0..terms {
        let t = BigRational::new(BigInt::one(), &pw * BigInt::from(2 * k + 1));
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        pw *= &x2;
    }
    let bound = BigRational::new(BigInt::one(), pw * BigInt::from(2 * terms + 1));
    (sum, bound)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(ExprError::Unexpected(x, self.pos)),
            None => Err(ExprError::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Real, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Real, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Real, ExprError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Real, ExprError> {
        match self.peek() {
            None => Err(ExprError::UnexpectedEnd),
            Some('(') => {
                self.pos += 1;
                let r = self.expr()?;
                self.expect(')')?;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident: String = self.chars[start..self.pos].iter().collect();
                match ident.as_str() {
                    "e" => Ok(Real::e()),
                    "pi" => Ok(Real::pi()),
                    "sqrt" => {
                        self.expect('(')?;
                        let r = self.expr()?;
                        self.expect(')')?;
                        r.sqrt()
                    }
                    "liouville" => {
                        self.expect('(')?;
                        let r = self.expr()?;
                        self.expect(')')?;
                        let n = r
                            .value
                            .to_integer()
                            .to_u32()
                            .filter(|n| r.value.is_integer() && (1..=7).contains(n))
                            .ok_or_else(|| ExprError::BadArgument("liouville(n) needs 1 <= n <= 7".into()))?;
                        Ok(Real::liouville(n))
                    }
                    _ => Err(ExprError::UnknownIdent(ident)),
                }
            }
            Some(c) => Err(ExprError::Unexpected(c, self.pos)),
        }
    }

    fn number(&mut self) -> Result<Real, ExprError> {
        let mut digits = String::new();
        let mut frac_len = 0u32;
        let mut seen_dot = false;
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == '.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return Err(ExprError::Unexpected('.', self.pos));
        }
        let mut exp: i64 = 0;
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let save = self.pos;
            let mut j = self.pos + 1;
            let mut sign = 1i64;
            if matches!(self.chars.get(j), Some('+') | Some('-')) {
                if self.chars[j] == '-' {
                    sign = -1;
                }
                j += 1;
            }
            let st = j;
            while matches!(self.chars.get(j), Some(c) if c.is_ascii_digit()) {
                j += 1;
            }
            if j > st {
                let s: String = self.chars[st..j].iter().collect();
                exp = sign * s.parse::<i64>().map_err(|_| ExprError::BadArgument(s))?;
                self.pos = j;
            } else {
                self.pos = save;
            }
        }
        let mantissa: BigInt = digits.parse().expect("digits only");
        let shift = exp - frac_len as i64;
        if shift.abs() > 4000 {
            return Err(ExprError::BadArgument("exponent out of range".into()));
        }
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * ten_pow(shift as u32))
        } else {
            BigRational::new(mantissa, ten_pow((-shift) as u32))
        };
        Ok(Real::exact(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_exact() {
        let r = Real::parse("7/5").unwrap();
        assert!(r.is_exact());
        assert_eq!(r.value, rat(7, 5));
        assert_eq!(Real::parse("1.25").unwrap().value, rat(5, 4));
        assert_eq!(Real::parse("3e-2").unwrap().value, rat(3, 100));
        assert_eq!(Real::parse("-(1/2)").unwrap().value, rat(-1, 2));
    }

    #[test]
    fn perfect_square_roots_are_exact() {
        let r = Real::parse("sqrt(9/4)").unwrap();
        assert!(r.is_exact());
        assert_eq!(r.value, rat(3, 2));
    }

    #[test]
    fn constants_round_to_the_f64_values() {
        assert_eq!(Real::parse("sqrt(2)").unwrap().to_f64(), 2f64.sqrt());
        assert_eq!(Real::parse("e").unwrap().to_f64(), std::f64::consts::E);
        assert_eq!(Real::parse("pi").unwrap().to_f64(), std::f64::consts::PI);
        assert_eq!(Real::parse("1+sqrt(2)").unwrap().to_f64(), 1.0 + 2f64.sqrt());
    }

    #[test]
    fn error_bounds_are_tiny_and_honest() {
        let bound = BigRational::new(BigInt::one(), ten_pow(90));
        for s in ["sqrt(2)", "e", "pi", "sqrt(3)/2", "e*pi"] {
            let r = Real::parse(s).unwrap();
            assert!(r.err < bound, "{s}");
        }
        // sqrt(2)^2 must bracket 2
        let s = Real::parse("sqrt(2)").unwrap();
        let lo = s.lower();
        let hi = s.upper();
        let two = rat(2, 1);
        assert!(&lo * &lo < two && &hi * &hi > two);
    }

    #[test]
    fn pi_digits() {
        // 50 known digits
        let known: BigRational = BigRational::new(
            "314159265358979323846264338327950288419716939937510".parse().unwrap(),
            ten_pow(50),
        );
        let p = Real::pi();
        assert!((p.value - known).abs() < BigRational::new(BigInt::one(), ten_pow(49)));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Real::parse("foo"), Err(ExprError::UnknownIdent(_))));
        assert!(matches!(Real::parse("1/0"), Err(ExprError::DivisionByZero)));
        assert!(matches!(Real::parse("sqrt(-1)"), Err(ExprError::NegativeSqrt)));
        assert!(Real::parse("(1").is_err());
        assert!(Real::parse("1 2").is_err());
    }

    #[test]
    fn from_f64_is_exact_dyadic() {
        let r = Real::from_f64(0.5).unwrap();
        assert_eq!(r.value, rat(1, 2));
        assert!(r.err.is_positive());
    }
}
