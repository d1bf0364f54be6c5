//! The extremal family from `X² − 2Y² = 2`, simultaneous Pell systems built
//! from three decompositions, and the log-space bound formulas.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{factorize, ArithError};
use crate::decompose::MuXY;
use crate::window::{window_census, Coeff, WindowError, WindowParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PellError {
    #[error("family index must be at least 1")]
    DegenerateIndex,
    #[error("family member k = {k} violates {what}")]
    InvariantViolated { k: u32, what: &'static str },
    #[error("a Pell system needs exactly 3 decompositions, got {got}")]
    Arity { got: usize },
    #[error("decompositions belong to different N")]
    MixedN,
    #[error("decompositions must come from distinct pairs in ascending d")]
    NotAscending,
    #[error("substitution check failed: {0}")]
    IdentityFailed(&'static str),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// One member of the family `X + √2·Y = (3 + 2√2)^k (2 + √2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PellExample {
    pub k: u32,
    #[serde(rename = "X", serialize_with = "crate::bigser::uint")]
    pub x: BigUint,
    #[serde(rename = "Y", serialize_with = "crate::bigser::uint")]
    pub y: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub n: BigUint,
    /// `[(X − 2)(X + 2), (X + 2)², 2(Y + 1)²]`.
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub window_divisors: [BigUint; 3],
}

impl PellExample {
    /// `√n = (X − 2)(X + 2)`.
    pub fn root(&self) -> &BigUint {
        &self.window_divisors[0]
    }

    pub fn violations(&self) -> Vec<&'static str> {
        let (x, y) = (&self.x, &self.y);
        let two = BigUint::from(2u32);
        let mut bad = Vec::new();
        if x * x != y * y * 2u32 + 2u32 {
            bad.push("X^2 - 2Y^2 = 2");
        }
        if x.bit(0) || !y.bit(0) {
            bad.push("X even, Y odd");
        }
        if y < &two || x < &two {
            bad.push("X, Y >= 2");
            return bad;
        }
        let root = (x - 2u32) * (x + 2u32);
        if root != (y - 1u32) * (y + 1u32) * 2u32 {
            bad.push("(X-2)(X+2) = 2(Y-1)(Y+1)");
        }
        if self.n != &root * &root || self.n != ((y - 1u32) * (y + 1u32)).pow(2) * 4u32 {
            bad.push("n = (X-2)^2(X+2)^2 = 4(Y-1)^2(Y+1)^2");
        }
        let expected = [root.clone(), (x + 2u32).pow(2), (y + 1u32).pow(2) * 2u32];
        if self.window_divisors != expected {
            bad.push("window divisors");
        }
        let five = Coeff::integer(5);
        for q in &self.window_divisors {
            if !(&self.n % q).is_zero() {
                bad.push("window divisor divides n");
            }
            // √n ≤ q ≤ √n + 5·n^¼, with √n = root exactly
            if q < &root || !five.within(&root, q) {
                bad.push("window divisor in [sqrt n, sqrt n + 5 n^(1/4)]");
            }
        }
        bad
    }
}

/// The family member with index `k ≥ 1`, all invariants checked.
pub fn pell_family(k: u32) -> Result<PellExample, PellError> {
    if k == 0 {
        return Err(PellError::DegenerateIndex);
    }
    let (mut x, mut y) = (BigUint::from(2u32), BigUint::one());
    for _ in 0..k {
        let next_x = &x * 3u32 + &y * 4u32;
        let next_y = &x * 2u32 + &y * 3u32;
        x = next_x;
        y = next_y;
    }
    build_example(k, x, y)
}

/// Members `1..=k_max`, computed incrementally.
pub fn pell_family_upto(k_max: u32) -> Result<Vec<PellExample>, PellError> {
    let mut out = Vec::with_capacity(k_max as usize);
    let (mut x, mut y) = (BigUint::from(2u32), BigUint::one());
    for k in 1..=k_max {
        let next_x = &x * 3u32 + &y * 4u32;
        let next_y = &x * 2u32 + &y * 3u32;
        x = next_x;
        y = next_y;
        out.push(build_example(k, x.clone(), y.clone())?);
    }
    Ok(out)
}

fn build_example(k: u32, x: BigUint, y: BigUint) -> Result<PellExample, PellError> {
    let root = (&x - 2u32) * (&x + 2u32);
    let ex = PellExample {
        k,
        n: &root * &root,
        window_divisors: [root, (&x + 2u32).pow(2), (&y + 1u32).pow(2) * 2u32],
        x,
        y,
    };
    match ex.violations().first() {
        Some(what) => Err(PellError::InvariantViolated { k, what }),
        None => Ok(ex),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyCensusCheck {
    pub k: u32,
    #[serde(rename = "N", serialize_with = "crate::bigser::uint")]
    pub n: BigUint,
    pub c: Coeff,
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub found: Vec<BigUint>,
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub expected: Vec<BigUint>,
    /// Divisors at or above `N` in the census besides the three expected ones.
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub extra: Vec<BigUint>,
    pub census_size: usize,
    /// The divisors at or above `N` are exactly the expected three.
    pub matches: bool,
}

/// Runs the window census on `N = (X − 2)(X + 2)` with the factorization
/// assembled from `X − 2` and `X + 2`, and compares the divisors at or above
/// `N` with `{N, (X + 2)², 2(Y + 1)²}`.
pub fn family_census_check(ex: &PellExample, c: &Coeff) -> Result<FamilyCensusCheck, PellError> {
    let lower = factorize(&(&ex.x - 2u32))?;
    let upper = factorize(&(&ex.x + 2u32))?;
    let factors = lower.multiply(&upper);
    let n = ex.root().clone();
    let params = WindowParams::new(n.clone(), c.clone())?;
    let census = window_census(&params, Some(&factors))?;
    let found: Vec<BigUint> = census.divisors.iter().filter(|q| **q >= n).cloned().collect();
    let mut expected = ex.window_divisors.to_vec();
    expected.sort();
    let extra = found.iter().filter(|q| !expected.contains(q)).cloned().collect();
    Ok(FamilyCensusCheck {
        k: ex.k,
        matches: found == expected,
        extra,
        n,
        c: c.clone(),
        found,
        expected,
        census_size: census.size(),
    })
}

/// One equation's coefficient, base and constant, plus its squarefree form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PellTerm {
    #[serde(serialize_with = "crate::bigser::uint")]
    pub mu: BigUint,
    /// `2x + c`.
    #[serde(serialize_with = "crate::bigser::uint")]
    pub base: BigUint,
    /// `μc²`.
    #[serde(serialize_with = "crate::bigser::uint")]
    pub rhs: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub mu_tilde: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub t: BigUint,
    /// `t(2x + c)`.
    #[serde(serialize_with = "crate::bigser::uint")]
    pub scaled_base: BigUint,
    /// `μ̃t²c²`.
    #[serde(serialize_with = "crate::bigser::uint")]
    pub scaled_rhs: BigUint,
}

impl PellTerm {
    fn from_decomposition(m: &MuXY) -> Self {
        let base = m.x() * 2u32 + m.c_gap();
        let scaled_base = m.t() * &base;
        PellTerm {
            mu: m.mu().clone(),
            rhs: m.mu_c_squared(),
            mu_tilde: m.mu_tilde().clone(),
            t: m.t().clone(),
            scaled_rhs: m.mu_tilde() * (m.t() * m.c_gap()).pow(2),
            base,
            scaled_base,
        }
    }

    fn lhs(&self) -> BigInt {
        BigInt::from(&self.mu * &self.base * &self.base)
    }

    fn scaled_lhs(&self) -> BigInt {
        BigInt::from(&self.mu_tilde * &self.scaled_base * &self.scaled_base)
    }
}

/// `μ₁U² − μⱼVⱼ² = μ₁c₁² − μⱼcⱼ²` for `j ∈ {2, 3}`, sharing `U = 2x₁ + c₁`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PellSystem {
    #[serde(rename = "N", serialize_with = "crate::bigser::uint")]
    pub n: BigUint,
    pub terms: [PellTerm; 3],
    /// `μ̃₁ ≠ μ̃₂` and `μ̃₁ ≠ μ̃₃`.
    pub squarefree_coeffs_distinct: bool,
    /// `μ̃₁(μ̃₁t₁²c₁² − μ̃₃t₃²c₃²) ≠ μ̃₁(μ̃₁t₁²c₁² − μ̃₂t₂²c₂²)`.
    pub rhs_products_distinct: bool,
}

impl PellSystem {
    /// Right-hand side `μ₁c₁² − μⱼcⱼ²` of equation `j ∈ {2, 3}`.
    pub fn rhs(&self, j: usize) -> BigInt {
        BigInt::from(self.terms[0].rhs.clone()) - BigInt::from(self.terms[j - 1].rhs.clone())
    }

    /// Right-hand side of the squarefree restatement of equation `j`.
    pub fn scaled_rhs(&self, j: usize) -> BigInt {
        BigInt::from(self.terms[0].scaled_rhs.clone())
            - BigInt::from(self.terms[j - 1].scaled_rhs.clone())
    }

    /// Left-hand side `μ₁U² − μⱼVⱼ²` evaluated at the known solution.
    pub fn lhs(&self, j: usize) -> BigInt {
        self.terms[0].lhs() - self.terms[j - 1].lhs()
    }

    pub fn scaled_lhs(&self, j: usize) -> BigInt {
        self.terms[0].scaled_lhs() - self.terms[j - 1].scaled_lhs()
    }

    pub fn violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        for (j, name, sf_name) in [
            (2, "mu1 U^2 - mu2 V^2 = mu1 c1^2 - mu2 c2^2", "squarefree form of equation 2"),
            (3, "mu1 U^2 - mu3 W^2 = mu1 c1^2 - mu3 c3^2", "squarefree form of equation 3"),
        ] {
            if self.lhs(j) != self.rhs(j) {
                bad.push(name);
            }
            if self.scaled_lhs(j) != self.scaled_rhs(j) {
                bad.push(sf_name);
            }
        }
        bad
    }

    pub fn rhs_nonzero(&self) -> bool {
        !self.rhs(2).is_zero() && !self.rhs(3).is_zero()
    }
}

/// Assembles the system from three decompositions of distinct pairs of one
/// `N`, given in ascending `d`.
pub fn build_pell_system(decs: &[MuXY]) -> Result<PellSystem, PellError> {
    if decs.len() != 3 {
        return Err(PellError::Arity { got: decs.len() });
    }
    let n = decs[0].source().n();
    if decs.iter().any(|m| m.source().n() != n) {
        return Err(PellError::MixedN);
    }
    if !decs.windows(2).all(|p| p[0].source().d() < p[1].source().d()) {
        return Err(PellError::NotAscending);
    }
    let terms = [
        PellTerm::from_decomposition(&decs[0]),
        PellTerm::from_decomposition(&decs[1]),
        PellTerm::from_decomposition(&decs[2]),
    ];
    let mut system = PellSystem {
        n: n.clone(),
        squarefree_coeffs_distinct: terms[0].mu_tilde != terms[1].mu_tilde
            && terms[0].mu_tilde != terms[2].mu_tilde,
        rhs_products_distinct: false,
        terms,
    };
    let m1 = BigInt::from(system.terms[0].mu_tilde.clone());
    system.rhs_products_distinct = &m1 * system.scaled_rhs(3) != &m1 * system.scaled_rhs(2);
    if let Some(what) = system.violations().first() {
        return Err(PellError::IdentityFailed(what));
    }
    Ok(system)
}

/// Natural log of the bound on solutions of the simultaneous system:
/// `C·M²·(ln M)³·(M ln M)·ln(M ln M)` with `M = 4c²`.
pub fn turk_log_bound(c: &Coeff, constant: f64) -> f64 {
    turk_log_bound_real(c.to_f64(), constant)
}

pub fn turk_log_bound_real(c: f64, constant: f64) -> f64 {
    let m = 4.0 * c * c;
    let ln_m = m.ln();
    constant * m * m * ln_m.powi(3) * (m * ln_m) * (m * ln_m).ln()
}

/// Natural log of the size threshold beyond which at most five window
/// divisors are guaranteed: `C·c⁶·(ln c)⁵`. Requires `c > 1`.
pub fn theorem_log_threshold(c: &Coeff, constant: f64) -> Result<f64, PellError> {
    if c.numer().cmp(c.denom()) != Ordering::Greater {
        return Err(PellError::Domain(format!("c = {c} must exceed 1")));
    }
    theorem_log_threshold_real(c.to_f64(), constant)
}

pub fn theorem_log_threshold_real(c: f64, constant: f64) -> Result<f64, PellError> {
    if c.partial_cmp(&1.0) != Some(Ordering::Greater) {
        return Err(PellError::Domain(format!("c = {c} must exceed 1")));
    }
    Ok(constant * c.powi(6) * c.ln().powi(5))
}

/// `ln N` for threshold comparisons against the log-space bounds.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
