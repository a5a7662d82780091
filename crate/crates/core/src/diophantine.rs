//! Continued fractions, convergents and simultaneous rational approximation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("need at least one number to approximate")]
    Empty,
    #[error("N must be at least 1")]
    ZeroN,
    #[error("search bound N^d = {0}^{1} overflows 2^63")]
    Overflow(u64, usize),
    #[error("non-finite input")]
    NonFinite,
    #[error("no approximation found up to q = {0} (floating point edge case)")]
    NotFound(u64),
}

/// `[a0; a1, a2, ...]`. `depth()` counts `a0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    pub a0: BigInt,
    pub quotients: Vec<BigInt>,
    /// The expansion terminated: the input is (within its tolerance) rational.
    pub rational: bool,
    /// Fewer terms than requested could be determined from the input's precision.
    pub precision_exhausted: bool,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        1 + self.quotients.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &BigInt> {
        std::iter::once(&self.a0).chain(self.quotients.iter())
    }

    /// Terms as `i64`, if they all fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.terms().map(|t| t.to_i64()).collect()
    }

    /// Convergents `p_k/q_k` by the usual three-term recurrence.
    pub fn convergent_fractions(&self) -> Vec<(BigInt, BigInt)> {
        let (mut p0, mut p1) = (BigInt::zero(), BigInt::one());
        let (mut q0, mut q1) = (BigInt::one(), BigInt::zero());
        let mut out = Vec::with_capacity(self.depth());
        for a in self.terms() {
            let p = a * &p1 + &p0;
            let q = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p.clone());
            q0 = std::mem::replace(&mut q1, q.clone());
            out.push((p, q));
        }
        out
    }

    pub fn value(&self) -> BigRational {
        let (p, q) = self.convergent_fractions().pop().expect("a0 always present");
        BigRational::new(p, q)
    }
}

impl std::fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}", self.a0)?;
        for (i, a) in self.quotients.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { "; " } else { ", " }, a)?;
        }
        write!(f, "]")
    }
}

fn floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// First `depth` terms of the continued fraction of `alpha`.
///
/// Each quotient is accepted only if both ends of `alpha`'s error interval
/// agree on it. Expansion stops as rational when a convergent lands within
/// `alpha.tol`.
pub fn continued_fraction(alpha: &Real, depth: usize) -> ContinuedFraction {
    let depth = depth.max(1);
    let mut x = alpha.value.clone();
    let mut lo = Some(alpha.lower());
    let mut hi = Some(alpha.upper());
    let (mut p0, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q0, mut q1) = (BigInt::one(), BigInt::zero());
    let mut terms: Vec<BigInt> = Vec::with_capacity(depth);
    let mut rational = false;
    let mut exhausted = false;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));

    while terms.len() < depth {
        if !alpha.tol.is_zero() {
            let r = floor(&(&x + &half));
            let p = &r * &p1 + &p0;
            let q = &r * &q1 + &q0;
            if q.is_positive() && (&alpha.value - BigRational::new(p, q)).abs() <= alpha.tol {
                if r.is_one() && !terms.is_empty() {
                    *terms.last_mut().unwrap() += 1;
                } else {
                    terms.push(r);
                }
                rational = true;
                break;
            }
        }
        let a = floor(&x);
        let agreed = matches!((&lo, &hi), (Some(l), Some(h)) if floor(l) == a && floor(h) == a);
        if !agreed {
            exhausted = true;
            break;
        }
        let p = &a * &p1 + &p0;
        let q = &a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p);
        q0 = std::mem::replace(&mut q1, q);
        let frac = &x - BigRational::from_integer(a.clone());
        terms.push(a.clone());
        if frac.is_zero() {
            rational = true;
            break;
        }
        x = frac.recip();
        let step = |b: Option<BigRational>| {
            b.and_then(|v| {
                let f = v - BigRational::from_integer(a.clone());
                f.is_positive().then(|| f.recip())
            })
        };
        lo = step(lo);
        hi = step(hi);
    }
    let mut it = terms.into_iter();
    let a0 = it.next().unwrap_or_default();
    ContinuedFraction { a0, quotients: it.collect(), rational, precision_exhausted: exhausted }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Convergent {
    #[serde(serialize_with = "ser_big")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub q: BigInt,
    /// `|alpha - p/q|`
    pub error: f64,
    /// `q^2 |alpha - p/q|`
    pub quality: f64,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

/// Natural log of a positive rational, valid far outside the `f64` range.
fn ln_rational(x: &BigRational) -> f64 {
    ln_big(x.numer()) - ln_big(x.denom())
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().abs().ln();
    }
    let shift = bits - 60;
    let top = (n.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn convergents_of(alpha: &Real, cf: &ContinuedFraction) -> Vec<Convergent> {
    cf.convergent_fractions()
        .into_iter()
        .map(|(p, q)| {
            let diff = (&alpha.value - BigRational::new(p.clone(), q.clone())).abs();
            let error = if diff.is_zero() { 0.0 } else { ln_rational(&diff).exp() };
            let quality = if diff.is_zero() {
                0.0
            } else {
                (ln_rational(&diff) + 2.0 * ln_big(&q)).exp()
            };
            Convergent { p, q, error, quality }
        })
        .collect()
}

pub fn convergents(alpha: &Real, depth: usize) -> Vec<Convergent> {
    convergents_of(alpha, &continued_fraction(alpha, depth))
}

/// Finite-window statistic. It can refute bounded partial quotients at this
/// depth but never prove badly-approximability.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxStatistic {
    pub rational: bool,
    /// `min q^2 |alpha - p/q|` over convergents with non-zero error.
    pub min_quality: Option<f64>,
    /// Largest partial quotient `a_k`, `k >= 1`.
    pub max_quotient: Option<String>,
    pub terms: usize,
    pub precision_exhausted: bool,
}

pub fn badly_approximable_statistic(alpha: &Real, depth: usize) -> ApproxStatistic {
    let cf = continued_fraction(alpha, depth);
    let conv = convergents_of(alpha, &cf);
    let min_quality = conv
        .iter()
        .filter(|c| c.error > 0.0)
        .map(|c| c.quality)
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    ApproxStatistic {
        rational: cf.rational,
        min_quality: if cf.rational { None } else { min_quality },
        max_quotient: if cf.rational { None } else { cf.quotients.iter().max().map(|a| a.to_string()) },
        terms: cf.depth(),
        precision_exhausted: cf.precision_exhausted,
    }
}

/// Smallest denominator taken into account by
/// [`irrationality_exponent_estimate`]; below it the O(1) constant in
/// `|alpha - p/q| ~ c q^-sigma` dominates the logarithms.
pub const EXPONENT_MIN_Q: u64 = 100;

/// `max -ln|alpha - p/q| / ln q` over convergents with `q >= 100`.
/// A diagnostic, not a bound.
pub fn irrationality_exponent_estimate(alpha: &Real, depth: usize) -> Option<f64> {
    let cf = continued_fraction(alpha, depth);
    let min_q = BigInt::from(EXPONENT_MIN_Q);
    cf.convergent_fractions()
        .into_iter()
        .filter(|(_, q)| *q >= min_q)
        .filter_map(|(p, q)| {
            let diff = (&alpha.value - BigRational::new(p, q.clone())).abs();
            (!diff.is_zero()).then(|| -ln_rational(&diff) / ln_big(&q))
        })
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimultaneousApproximation {
    pub q: i64,
    pub p: Vec<i64>,
    pub n: u64,
    /// `alpha_j - p_j / q`
    pub errors: Vec<f64>,
    /// Factor `floor(sqrt N)` applied when the first hit had `q < floor(sqrt N)`; 1 otherwise.
    pub scaled_by: i64,
}

impl SimultaneousApproximation {
    /// `floor(sqrt N) <= q <= N^d` and `|alpha_j - p_j/q| <= 1/(q sqrt N)`.
    pub fn satisfies_bounds(&self) -> bool {
        let d = self.p.len() as u32;
        let lo = isqrt_u64(self.n) as i64;
        let hi = self.n.checked_pow(d).map(|v| v as i128).unwrap_or(i128::MAX);
        let bound = 1.0 / (self.q as f64 * (self.n as f64).sqrt());
        self.q >= lo
            && (self.q as i128) <= hi
            && self.errors.iter().all(|e| e.abs() <= bound * (1.0 + 1e-12))
    }
}

pub fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Two steps: the first `q` in `1..=N^d` with `max_j |q alpha_j - p_j| <= 1/N`
/// (`p_j` the nearest integer), then scaling by `floor(sqrt N)` if that `q`
/// is below `floor(sqrt N)`.
pub fn dirichlet_simultaneous(alphas: &[f64], n: u64) -> Result<SimultaneousApproximation, DiophantineError> {
    if alphas.is_empty() {
        return Err(DiophantineError::Empty);
    }
    if n == 0 {
        return Err(DiophantineError::ZeroN);
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(DiophantineError::NonFinite);
    }
    let d = alphas.len();
    let bound = u32::try_from(d)
        .ok()
        .and_then(|d| n.checked_pow(d))
        .filter(|b| *b <= i64::MAX as u64)
        .ok_or(DiophantineError::Overflow(n, d))?;
    let tol = 1.0 / n as f64;
    let mut p = vec![0i64; d];
    let mut found = None;
    'search: for q in 1..=bound {
        let qf = q as f64;
        for (j, a) in alphas.iter().enumerate() {
            let x = qf * a;
            let r = x.round();
            if (x - r).abs() > tol {
                continue 'search;
            }
            p[j] = r as i64;
        }
        found = Some(q as i64);
        break;
    }
    let mut q = found.ok_or(DiophantineError::NotFound(bound))?;
    let k = isqrt_u64(n) as i64;
    let mut scaled_by = 1;
    if q < k {
        q *= k;
        p.iter_mut().for_each(|v| *v *= k);
        scaled_by = k;
    }
    let errors = alphas.iter().zip(&p).map(|(a, pj)| a - *pj as f64 / q as f64).collect();
    Ok(SimultaneousApproximation { q, p, n, errors, scaled_by })
}

/// `gcd(p, q) == 1` for every convergent (used by tests and reports).
pub fn coprime(p: &BigInt, q: &BigInt) -> bool {
    p.gcd(q).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf_of(s: &str, depth: usize) -> ContinuedFraction {
        continued_fraction(&Real::parse(s).unwrap(), depth)
    }

    #[test]
    fn e_expansion() {
        let cf = cf_of("e", 12);
        assert_eq!(cf.to_i64().unwrap(), vec![2, 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8]);
        assert!(!cf.rational && !cf.precision_exhausted);
    }

    #[test]
    fn sqrt2_expansion() {
        assert_eq!(cf_of("sqrt(2)", 6).to_i64().unwrap(), vec![1, 2, 2, 2, 2, 2]);
        let deep = cf_of("sqrt(2)", 60);
        assert_eq!(deep.depth(), 60);
        assert!(deep.quotients.iter().all(|a| *a == BigInt::from(2)));
    }

    #[test]
    fn rational_terminates() {
        let cf = cf_of("7/5", 10);
        assert_eq!(cf.to_i64().unwrap(), vec![1, 2, 2]);
        assert!(cf.rational);
        let cf = continued_fraction(&Real::from_f64(1.4).unwrap(), 10);
        assert_eq!(cf.to_i64().unwrap(), vec![1, 2, 2]);
        assert!(cf.rational);
        let cf = continued_fraction(&Real::from_f64(0.1 + 0.2).unwrap(), 10);
        assert_eq!(cf.to_i64().unwrap(), vec![0, 3, 3]);
    }

    #[test]
    fn float_sqrt2_runs_out_of_precision() {
        let cf = continued_fraction(&Real::from_f64(2f64.sqrt()).unwrap(), 40);
        assert!(cf.depth() < 40);
        assert!(cf.quotients.iter().all(|a| *a == BigInt::from(2)));
        assert!(cf.precision_exhausted || cf.rational);
    }

    #[test]
    fn convergent_values() {
        let c: Vec<(i64, i64)> = convergents(&Real::parse("sqrt(2)").unwrap(), 5)
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(c, vec![(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]);
        let c: Vec<(i64, i64)> = convergents(&Real::parse("e").unwrap(), 6)
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(c, vec![(2, 1), (3, 1), (8, 3), (11, 4), (19, 7), (87, 32)]);
        let c: Vec<(i64, i64)> = convergents(&Real::parse("1/2").unwrap(), 5)
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(c, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn badly_approximable_window() {
        let s = badly_approximable_statistic(&Real::parse("sqrt(2)").unwrap(), 20);
        assert_eq!(s.max_quotient.as_deref(), Some("2"));
        assert!(s.min_quality.unwrap() >= 1.0 / (2.0 + 2f64.sqrt()));
        let s = badly_approximable_statistic(&Real::parse("3/2").unwrap(), 20);
        assert!(s.rational && s.min_quality.is_none());
        let s = badly_approximable_statistic(&Real::parse("e").unwrap(), 20);
        assert!(s.max_quotient.unwrap().parse::<u64>().unwrap() >= 12);
    }

    #[test]
    fn exponent_estimates() {
        let s2 = irrationality_exponent_estimate(&Real::parse("sqrt(2)").unwrap(), 20).unwrap();
        assert!((2.0..2.3).contains(&s2), "{s2}");
        let e = irrationality_exponent_estimate(&Real::parse("e").unwrap(), 20).unwrap();
        assert!((2.0..2.5).contains(&e), "{e}");
        let l = irrationality_exponent_estimate(&Real::liouville(5), 20).unwrap();
        assert!(l > 3.0, "{l}");
    }

    #[test]
    fn dirichlet_examples() {
        let a = dirichlet_simultaneous(&[2f64.sqrt()], 10).unwrap();
        assert_eq!((a.q, a.p[0]), (5, 7));
        assert!(a.satisfies_bounds());
        let a = dirichlet_simultaneous(&[1.0 / 3.0], 9).unwrap();
        assert_eq!((a.q, a.p[0], a.scaled_by), (3, 1, 1));
        let a = dirichlet_simultaneous(&[0.5], 100).unwrap();
        assert_eq!((a.q, a.p[0], a.scaled_by), (20, 10, 10));
        assert!(a.satisfies_bounds());
    }

    #[test]
    fn dirichlet_rejects_bad_input() {
        assert_eq!(dirichlet_simultaneous(&[], 5), Err(DiophantineError::Empty));
        assert_eq!(dirichlet_simultaneous(&[0.3], 0), Err(DiophantineError::ZeroN));
        assert!(matches!(dirichlet_simultaneous(&[0.1; 4], 1 << 20), Err(DiophantineError::Overflow(..))));
    }
}
