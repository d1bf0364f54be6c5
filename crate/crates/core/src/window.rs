//! Divisor census of `N²` in the closed window `[N − c√N, N + c√N]`.
//!
//! Membership is decided without floating point: with `c = p/s` in lowest
//! terms, `q` is inside iff `s²(q − N)² ≤ p²N`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{divisors_in_range, factorize, isqrt, ArithError, Factorization};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{q} does not divide {n}^2")]
    NotADivisor { n: BigUint, q: BigUint },
    #[error("divisor {q} must satisfy 1 <= q < N = {n}")]
    OutOfRange { n: BigUint, q: BigUint },
    #[error("invalid window parameters: {0}")]
    InvalidParams(String),
    #[error("supplied factorization is of {got}, expected {expected}")]
    FactorMismatch { expected: BigUint, got: BigUint },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid coefficient {input:?}: {reason}")]
pub struct ParseCoeffError {
    input: String,
    reason: &'static str,
}

/// Exact positive rational window coefficient `c = p/s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coeff(Ratio<BigUint>);

impl Coeff {
    /// `None` when either part is zero.
    pub fn new(numer: BigUint, denom: BigUint) -> Option<Self> {
        if numer.is_zero() || denom.is_zero() {
            return None;
        }
        Some(Coeff(Ratio::new(numer, denom)))
    }

    pub fn integer(c: u64) -> Self {
        Coeff::new(BigUint::from(c), BigUint::one()).expect("coefficient must be positive")
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        // numerator and denominator may both exceed f64 range separately
        let (p, s) = (self.numer(), self.denom());
        let shift = p.bits().max(s.bits()).saturating_sub(1000);
        let pf = (p >> shift).to_f64().unwrap_or(f64::INFINITY);
        let sf = (s >> shift).to_f64().unwrap_or(f64::INFINITY);
        pf / sf
    }

    pub fn is_at_least_one(&self) -> bool {
        self.numer() >= self.denom()
    }

    /// Compares `x` against `k · c^power` exactly.
    pub fn cmp_scaled(&self, x: &BigUint, k: u64, power: u32) -> Ordering {
        let lhs = x * self.denom().pow(power);
        let rhs = self.numer().pow(power) * k;
        lhs.cmp(&rhs)
    }

    /// Largest integer `δ` with `δ ≤ c·√N`.
    pub fn floor_times_sqrt(&self, n: &BigUint) -> BigUint {
        let p2n = self.numer() * self.numer() * n;
        isqrt(&p2n).0 / self.denom()
    }

    /// Whether `|q − N| ≤ c√N`.
    pub fn within(&self, n: &BigUint, q: &BigUint) -> bool {
        let dist = if q >= n { q - n } else { n - q };
        let lhs = self.denom() * self.denom() * &dist * &dist;
        let rhs = self.numer() * self.numer() * n;
        lhs <= rhs
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Coeff {
    type Err = ParseCoeffError;

    /// Accepts `"p"` or `"p/s"` with positive decimal parts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseCoeffError {
            input: s.to_string(),
            reason,
        };
        let parse = |part: &str| {
            let part = part.trim();
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("expected decimal digits"));
            }
            BigUint::from_str(part).map_err(|_| err("expected decimal digits"))
        };
        let (numer, denom) = match s.split_once('/') {
            Some((p, q)) => (parse(p)?, parse(q)?),
            None => (parse(s)?, BigUint::one()),
        };
        Coeff::new(numer, denom).ok_or_else(|| err("numerator and denominator must be positive"))
    }
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `n = N²` and the window coefficient `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowParams {
    n: BigUint,
    c: Coeff,
}

impl WindowParams {
    pub fn new(n: BigUint, c: Coeff) -> Result<Self, WindowError> {
        if n < BigUint::from(2u32) {
            return Err(WindowError::InvalidParams(format!("N = {n} must be at least 2")));
        }
        if !c.is_at_least_one() {
            return Err(WindowError::InvalidParams(format!("c = {c} must be at least 1")));
        }
        Ok(WindowParams { n, c })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn c(&self) -> &Coeff {
        &self.c
    }

    /// Closed integer bounds of the window, clamped below at 1.
    pub fn bounds(&self) -> (BigUint, BigUint) {
        let delta = self.c.floor_times_sqrt(&self.n);
        let lo = if delta >= self.n {
            BigUint::one()
        } else {
            &self.n - &delta
        };
        (lo, &self.n + delta)
    }

    pub fn contains(&self, q: &BigUint) -> bool {
        self.c.within(&self.n, q)
    }

    /// `N ≥ 4c²`, the regime where every pair obeys `l ≤ 2c²`.
    pub fn restrict_gate(&self) -> bool {
        self.c.cmp_scaled(&self.n, 4, 2) != Ordering::Less
    }
}

/// One divisor pair `(N − d)(N + e) = N²` with gap `l = e − d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairWitness {
    n: BigUint,
    d: BigUint,
    e: BigUint,
    l: BigUint,
}

impl PairWitness {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn d(&self) -> &BigUint {
        &self.d
    }

    pub fn e(&self) -> &BigUint {
        &self.e
    }

    pub fn l(&self) -> &BigUint {
        &self.l
    }

    /// The divisor below `N`.
    pub fn low(&self) -> BigUint {
        &self.n - &self.d
    }

    /// The divisor above `N`.
    pub fn high(&self) -> BigUint {
        &self.n + &self.e
    }

    /// Names of the defining identities that fail; empty for a valid witness.
    pub fn identity_violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let (n, d, e, l) = (&self.n, &self.d, &self.e, &self.l);
        if d.is_zero() || d >= n {
            bad.push("1 <= d < N");
        }
        if (n - d.min(n)) * (n + e) != n * n {
            bad.push("(N-d)(N+e) = N^2");
        }
        if e <= d {
            bad.push("e > d");
        } else {
            if e * d != (e - d) * n {
                bad.push("ed = (e-d)N");
            }
            if *l != e - d {
                bad.push("l = e - d");
            }
        }
        if l * (n - d.min(n)) != d * d {
            bad.push("l(N-d) = d^2");
        }
        bad
    }
}

/// Builds the witness for the divisor `q < N` of `N²`.
pub fn pair_witness(n: &BigUint, q: &BigUint) -> Result<PairWitness, WindowError> {
    if q.is_zero() || q >= n {
        return Err(WindowError::OutOfRange {
            n: n.clone(),
            q: q.clone(),
        });
    }
    let (cofactor, rem) = (n * n).div_rem(q);
    if !rem.is_zero() {
        return Err(WindowError::NotADivisor {
            n: n.clone(),
            q: q.clone(),
        });
    }
    let d = n - q;
    let e = cofactor - n;
    let l = &e - &d;
    let w = PairWitness {
        n: n.clone(),
        d,
        e,
        l,
    };
    debug_assert!(w.identity_violations().is_empty());
    Ok(w)
}

/// `l ≤ 2c²`.
pub fn check_restrict(w: &PairWitness, c: &Coeff) -> bool {
    c.cmp_scaled(w.l(), 2, 2) != Ordering::Greater
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowCensus {
    pub params: WindowParams,
    /// Every divisor of `N²` in the window, ascending.
    pub divisors: Vec<BigUint>,
    /// Pairs with both sides in the window, ascending in `d`.
    pub pairs: Vec<PairWitness>,
    /// Divisors below `N` whose cofactor lies above the window.
    pub unpaired_low: Vec<BigUint>,
    /// Divisors above `N` whose cofactor lies below the window.
    pub unpaired_high: Vec<BigUint>,
}

impl WindowCensus {
    pub fn size(&self) -> usize {
        self.divisors.len()
    }

    pub fn r(&self) -> usize {
        self.pairs.len()
    }
}

pub fn window_census(
    params: &WindowParams,
    factors: Option<&Factorization>,
) -> Result<WindowCensus, WindowError> {
    let n = params.n();
    let owned;
    let factors = match factors {
        Some(f) => {
            if f.value() != n {
                return Err(WindowError::FactorMismatch {
                    expected: n.clone(),
                    got: f.value().clone(),
                });
            }
            f
        }
        None => {
            owned = factorize(n)?;
            &owned
        }
    };
    let (lo, hi) = params.bounds();
    let divisors = divisors_in_range(&factors.squared(), &lo, &hi);
    debug_assert!(divisors.iter().all(|q| params.contains(q)));

    let n_sq = n * n;
    let mut pairs = Vec::new();
    let mut unpaired_low = Vec::new();
    let mut unpaired_high = Vec::new();
    // descending q below N gives ascending d
    for q in divisors.iter().rev().filter(|q| *q < n) {
        if params.contains(&(&n_sq / q)) {
            pairs.push(pair_witness(n, q)?);
        } else {
            unpaired_low.push(q.clone());
        }
    }
    unpaired_low.reverse();
    for q in divisors.iter().filter(|q| *q > n) {
        if !params.contains(&(&n_sq / q)) {
            unpaired_high.push(q.clone());
        }
    }
    Ok(WindowCensus {
        params: params.clone(),
        divisors,
        pairs,
        unpaired_low,
        unpaired_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn nums(v: &[BigUint]) -> Vec<u64> {
        v.iter().map(|q| q.to_u64().unwrap()).collect()
    }

    fn de(c: &WindowCensus) -> Vec<(u64, u64)> {
        c.pairs
            .iter()
            .map(|w| (w.d().to_u64().unwrap(), w.e().to_u64().unwrap()))
            .collect()
    }

    fn census(n: u64, c: &str) -> WindowCensus {
        let params = WindowParams::new(big(n), c.parse().unwrap()).unwrap();
        window_census(&params, None).unwrap()
    }

    #[test]
    fn census_n60_c3() {
        let cen = census(60, "3");
        assert_eq!(nums(&cen.divisors), vec![40, 45, 48, 50, 60, 72, 75, 80]);
        assert_eq!(de(&cen), vec![(10, 12), (12, 15), (15, 20)]);
        assert_eq!(nums(&cen.unpaired_low), vec![40]);
        assert!(cen.unpaired_high.is_empty());
        assert_eq!(cen.r(), 3);
    }

    #[test]
    fn census_n96_c5() {
        let cen = census(96, "5");
        assert_eq!(nums(&cen.divisors), vec![48, 64, 72, 96, 128, 144]);
        assert_eq!(de(&cen), vec![(24, 32), (32, 48)]);
        assert_eq!(nums(&cen.unpaired_low), vec![48]);
    }

    #[test]
    fn census_n2_c1() {
        let cen = census(2, "1");
        assert_eq!(nums(&cen.divisors), vec![1, 2]);
        assert!(cen.pairs.is_empty());
        assert_eq!(nums(&cen.unpaired_low), vec![1]);
    }

    #[test]
    fn pair_witness_examples() {
        let w = pair_witness(&big(60), &big(45)).unwrap();
        assert_eq!((w.d(), w.e(), w.l()), (&big(15), &big(20), &big(5)));
        let w = pair_witness(&big(96), &big(64)).unwrap();
        assert_eq!((w.d(), w.e(), w.l()), (&big(32), &big(48), &big(16)));
        let w = pair_witness(&big(4), &big(2)).unwrap();
        assert_eq!((w.d(), w.e(), w.l()), (&big(2), &big(4), &big(2)));
        assert!(w.identity_violations().is_empty());
    }

    #[test]
    fn pair_witness_errors() {
        assert!(matches!(
            pair_witness(&big(60), &big(7)),
            Err(WindowError::NotADivisor { .. })
        ));
        assert!(matches!(
            pair_witness(&big(60), &big(60)),
            Err(WindowError::OutOfRange { .. })
        ));
        assert!(matches!(
            pair_witness(&big(60), &big(0)),
            Err(WindowError::OutOfRange { .. })
        ));
    }

    #[test]
    fn restrict_examples() {
        let c3: Coeff = "3".parse().unwrap();
        let c5: Coeff = "5".parse().unwrap();
        let c1: Coeff = "1".parse().unwrap();
        assert!(check_restrict(&pair_witness(&big(60), &big(45)).unwrap(), &c3));
        assert!(check_restrict(&pair_witness(&big(96), &big(64)).unwrap(), &c5));
        assert!(check_restrict(&pair_witness(&big(4), &big(2)).unwrap(), &c1));
        // l = 16 against 2c² = 8
        assert!(!check_restrict(&pair_witness(&big(96), &big(64)).unwrap(), &"2".parse().unwrap()));
    }

    #[test]
    fn coeff_parsing_and_display() {
        let c: Coeff = "6/4".parse().unwrap();
        assert_eq!(c.to_string(), "3/2");
        assert_eq!("5".parse::<Coeff>().unwrap().to_string(), "5/1");
        assert!("0".parse::<Coeff>().is_err());
        assert!("3/0".parse::<Coeff>().is_err());
        assert!("-3".parse::<Coeff>().is_err());
        assert!("2.5".parse::<Coeff>().is_err());
        assert!((c.to_f64() - 1.5).abs() < 1e-15);
        assert!(WindowParams::new(big(10), "1/2".parse().unwrap()).is_err());
        assert!(WindowParams::new(big(1), "1".parse().unwrap()).is_err());
    }

    #[test]
    fn rational_window_membership_is_exact() {
        // c = 3/2, N = 100: window 100 ± 15 exactly, so 85 and 115 are inside
        let params = WindowParams::new(big(100), "3/2".parse().unwrap()).unwrap();
        assert_eq!(params.bounds(), (big(85), big(115)));
        assert!(params.contains(&big(85)) && params.contains(&big(115)));
        assert!(!params.contains(&big(84)) && !params.contains(&big(116)));
    }

    #[test]
    fn factor_mismatch_is_rejected() {
        let params = WindowParams::new(big(60), "3".parse().unwrap()).unwrap();
        let wrong = factorize(&big(61)).unwrap();
        assert!(matches!(
            window_census(&params, Some(&wrong)),
            Err(WindowError::FactorMismatch { .. })
        ));
    }
}
