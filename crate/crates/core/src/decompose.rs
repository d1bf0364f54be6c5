//! From pair witnesses to Pythagorean triples and `(μ, x, y)` decompositions.
//!
//! A witness `(N − d)(N + e) = N²` with gap `l` yields the triple
//! `(2d + l, 2N, 2N + l)`. Every decomposition `2N = μxy`, `2(N − d) = μx²`,
//! `2(N + e) = μy²` comes from the shared squarefree kernel `s` of
//! `A = 2(N − d)` and `B = 2(N + e)`: writing `A = s·a²`, `B = s·b²`, the
//! family is `(s·t², a/t, b/t)` for `t | gcd(a, b)`.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{divisors_in_range, factorize, isqrt, ArithError, Factorization};
use crate::window::{Coeff, PairWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("no parametrization reproduces the triple ({a}, {b}, {h})")]
    EmptyParametrization { a: BigUint, b: BigUint, h: BigUint },
    #[error("2(N-d) and 2(N+e) have different squarefree kernels for N = {n}, d = {d}")]
    KernelMismatch { n: BigUint, d: BigUint },
    #[error("no decomposition of the pair d = {d} satisfies mu <= 4c^2 and 1 <= y - x <= 2c")]
    NoFeasibleDecomposition { d: BigUint },
    #[error("products differ: {left} vs {right}")]
    ProductMismatch { left: BigUint, right: BigUint },
    #[error("supplied factorization is not of N = {n}")]
    FactorMismatch { n: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PythTriple {
    pub a: BigUint,
    pub b: BigUint,
    pub h: BigUint,
    pub source: PairWitness,
}

impl PythTriple {
    pub fn holds(&self) -> bool {
        &self.a * &self.a + &self.b * &self.b == &self.h * &self.h
            && &self.h - &self.b == *self.source.l()
    }
}

pub fn pythagorean_triple(w: &PairWitness) -> PythTriple {
    let two_n = w.n() * 2u32;
    let tr = PythTriple {
        a: w.d() * 2u32 + w.l(),
        b: two_n.clone(),
        h: two_n + w.l(),
        source: w.clone(),
    };
    assert!(tr.holds(), "triple identity failed for N = {}, d = {}", w.n(), w.d());
    tr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PythCase {
    /// `a = λ(u² − v²)`, `b = 2λuv`.
    Case1,
    /// `b = λ(u² − v²)`, `a = 2λuv`.
    Case2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PythParam {
    pub lambda: BigUint,
    pub u: BigUint,
    pub v: BigUint,
    pub case: PythCase,
}

impl PythParam {
    /// The triple `(a, b, h)` this parametrization produces.
    pub fn triple(&self) -> (BigUint, BigUint, BigUint) {
        let (u2, v2) = (&self.u * &self.u, &self.v * &self.v);
        let diff = &self.lambda * (&u2 - &v2);
        let prod = &self.lambda * 2u32 * &self.u * &self.v;
        let hyp = &self.lambda * (u2 + v2);
        match self.case {
            PythCase::Case1 => (diff, prod, hyp),
            PythCase::Case2 => (prod, diff, hyp),
        }
    }

    /// The decomposition `(μ, x, y)` this parametrization induces.
    pub fn induced_mu_xy(&self) -> (BigUint, BigUint, BigUint) {
        match self.case {
            PythCase::Case1 => (&self.lambda * 2u32, self.v.clone(), self.u.clone()),
            PythCase::Case2 => (self.lambda.clone(), &self.u - &self.v, &self.u + &self.v),
        }
    }
}

/// Every `(λ, u, v, case)` with `u > v ≥ 1` reproducing the triple, ordered by
/// ascending `λ` and then case.
pub fn parametrizations(tr: &PythTriple) -> Result<Vec<PythParam>, DecomposeError> {
    let g = tr.a.gcd(&tr.b).gcd(&tr.h);
    let gf = factorize(&g)?;
    let mut out = Vec::new();
    for lambda in divisors_in_range(&gf, &BigUint::one(), &g) {
        let (a, b, h) = (&tr.a / &lambda, &tr.b / &lambda, &tr.h / &lambda);
        for (case, diff_leg, prod_leg) in [(PythCase::Case1, &a, &b), (PythCase::Case2, &b, &a)] {
            if let Some((u, v)) = solve_uv(&h, diff_leg, prod_leg) {
                out.push(PythParam {
                    lambda: lambda.clone(),
                    u,
                    v,
                    case,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(DecomposeError::EmptyParametrization {
            a: tr.a.clone(),
            b: tr.b.clone(),
            h: tr.h.clone(),
        });
    }
    Ok(out)
}

/// Solves `u² + v² = h`, `u² − v² = diff`, `2uv = prod` with `u > v ≥ 1`.
fn solve_uv(h: &BigUint, diff: &BigUint, prod: &BigUint) -> Option<(BigUint, BigUint)> {
    if diff >= h {
        return None;
    }
    let (u2, r1) = (h + diff).div_rem(&BigUint::from(2u32));
    let (v2, r2) = (h - diff).div_rem(&BigUint::from(2u32));
    if !r1.is_zero() || !r2.is_zero() || v2.is_zero() {
        return None;
    }
    let (u, u_exact) = isqrt(&u2);
    let (v, v_exact) = isqrt(&v2);
    (u_exact && v_exact && u > v && &u * &v * 2u32 == *prod).then_some((u, v))
}

/// One decomposition `2N = μxy`, `2(N − d) = μx²`, `2(N + e) = μy²` with
/// `μ = μ̃·t²`, `μ̃` squarefree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuXY {
    mu: BigUint,
    x: BigUint,
    y: BigUint,
    c_gap: BigUint,
    mu_tilde: BigUint,
    t: BigUint,
    source: PairWitness,
}

impl MuXY {
    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    pub fn x(&self) -> &BigUint {
        &self.x
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    /// `y − x`.
    pub fn c_gap(&self) -> &BigUint {
        &self.c_gap
    }

    pub fn mu_tilde(&self) -> &BigUint {
        &self.mu_tilde
    }

    pub fn t(&self) -> &BigUint {
        &self.t
    }

    pub fn source(&self) -> &PairWitness {
        &self.source
    }

    /// `μ·c_gap²`; depends only on the source witness, not on `t`.
    pub fn mu_c_squared(&self) -> BigUint {
        &self.mu * &self.c_gap * &self.c_gap
    }

    /// `μ ≤ 4c²` and `1 ≤ y − x ≤ 2c`.
    pub fn is_feasible(&self, c: &Coeff) -> bool {
        c.cmp_scaled(&self.mu, 4, 2) != Ordering::Greater
            && !self.c_gap.is_zero()
            && c.cmp_scaled(&self.c_gap, 2, 1) != Ordering::Greater
    }

    pub fn identity_violations(&self) -> Vec<&'static str> {
        let w = &self.source;
        let mut bad = Vec::new();
        if w.n() * 2u32 != &self.mu * &self.x * &self.y {
            bad.push("2N = mu x y");
        }
        if w.low() * 2u32 != &self.mu * &self.x * &self.x {
            bad.push("2(N-d) = mu x^2");
        }
        if w.high() * 2u32 != &self.mu * &self.y * &self.y {
            bad.push("2(N+e) = mu y^2");
        }
        if self.y <= self.x || self.c_gap != &self.y - &self.x {
            bad.push("c = y - x >= 1");
        }
        if self.mu != &self.mu_tilde * &self.t * &self.t {
            bad.push("mu = mu~ t^2");
        }
        bad
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decompositions {
    /// Feasible decompositions, ascending in `μ`.
    pub all: Vec<MuXY>,
    /// The feasible entry with the smallest `μ`.
    pub canonical: MuXY,
}

/// Every decomposition of the witness, ignoring the window constraints,
/// ascending in `μ`. `n_factors`, when given, must factor `N`.
pub fn decomposition_family(
    w: &PairWitness,
    n_factors: Option<&Factorization>,
) -> Result<Vec<MuXY>, DecomposeError> {
    let big_a = w.low() * 2u32;
    let big_b = w.high() * 2u32;
    let g = big_a.gcd(&big_b);
    let gf = match n_factors {
        Some(f) => {
            if f.value() != w.n() {
                return Err(DecomposeError::FactorMismatch { n: w.n().clone() });
            }
            // g divides 2(N − d), which divides 2N²
            let two_n_sq = f.squared().multiply(&crate::arith::factorize_u64(2));
            two_n_sq
                .factor_divisor(&g)
                .ok_or_else(|| DecomposeError::KernelMismatch {
                    n: w.n().clone(),
                    d: w.d().clone(),
                })?
        }
        None => factorize(&g)?,
    };
    // g = s·gcd(a, b)², so its kernel is the shared kernel s
    let (kernel, root) = gf.split_square();
    let s = kernel.value().clone();
    let mismatch = || DecomposeError::KernelMismatch {
        n: w.n().clone(),
        d: w.d().clone(),
    };
    let (a2, ra) = big_a.div_rem(&s);
    let (b2, rb) = big_b.div_rem(&s);
    if !ra.is_zero() || !rb.is_zero() {
        return Err(mismatch());
    }
    let (a, a_exact) = isqrt(&a2);
    let (b, b_exact) = isqrt(&b2);
    if !a_exact || !b_exact {
        return Err(mismatch());
    }
    let family = divisors_in_range(&root, &BigUint::one(), root.value())
        .into_iter()
        .map(|t| {
            let (x, y) = (&a / &t, &b / &t);
            MuXY {
                mu: &s * &t * &t,
                c_gap: &y - &x,
                x,
                y,
                mu_tilde: s.clone(),
                t,
                source: w.clone(),
            }
        })
        .collect();
    Ok(family)
}

pub fn decompositions(w: &PairWitness, c: &Coeff) -> Result<Decompositions, DecomposeError> {
    select_feasible(w, decomposition_family(w, None)?, c)
}

/// As [`decompositions`], reusing a known factorization of `N`.
pub fn decompositions_factored(
    w: &PairWitness,
    c: &Coeff,
    n_factors: &Factorization,
) -> Result<Decompositions, DecomposeError> {
    select_feasible(w, decomposition_family(w, Some(n_factors))?, c)
}

fn select_feasible(
    w: &PairWitness,
    family: Vec<MuXY>,
    c: &Coeff,
) -> Result<Decompositions, DecomposeError> {
    let all: Vec<MuXY> = family.into_iter().filter(|m| m.is_feasible(c)).collect();
    let canonical = all
        .first()
        .cloned()
        .ok_or_else(|| DecomposeError::NoFeasibleDecomposition { d: w.d().clone() })?;
    Ok(Decompositions { all, canonical })
}

/// Two factorizations `(m − g)(m + h_off) = m(m − f)` of one number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlmostSquareWitness {
    #[serde(serialize_with = "crate::bigser::uint")]
    pub m: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub f: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub g: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub h_off: BigUint,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub product: BigUint,
}

impl AlmostSquareWitness {
    /// `f + h_off − g`, the multiplier in `(f + h_off − g)·m = g·h_off`.
    pub fn excess(&self) -> BigUint {
        &self.f + &self.h_off - &self.g
    }

    pub fn holds(&self) -> bool {
        let m = &self.m;
        &self.f + &self.h_off > self.g
            && &self.g < m
            && &self.f < m
            && (m - &self.g) * (m + &self.h_off) == self.product
            && m * (m - &self.f) == self.product
            && self.excess() * m == &self.g * &self.h_off
    }
}

/// Compares two factorizations `x·y` of the same number. `None` when the
/// factorizations coincide.
pub fn almost_square_witness(
    p: (&BigUint, &BigUint),
    q: (&BigUint, &BigUint),
) -> Result<Option<AlmostSquareWitness>, DecomposeError> {
    let (left, right) = (p.0 * p.1, q.0 * q.1);
    if left != right {
        return Err(DecomposeError::ProductMismatch { left, right });
    }
    if p.0 == q.0 {
        return Ok(None);
    }
    // (x_i, y_i) is the pair with the smaller first factor
    let ((xi, yi), (xj, yj)) = if p.0 < q.0 { (p, q) } else { (q, p) };
    let wit = AlmostSquareWitness {
        m: yj.clone(),
        f: yj - xj,
        g: yj - xi,
        h_off: yi - yj,
        product: left,
    };
    debug_assert!(wit.holds());
    Ok(Some(wit))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma1Report {
    pub ok: bool,
    pub colliding_pair: Option<(usize, usize)>,
}

/// Checks that `μᵢcᵢ²` differ between decompositions of distinct witnesses.
pub fn lemma1_check(decs: &[MuXY]) -> Lemma1Report {
    for i in 0..decs.len() {
        let vi = decs[i].mu_c_squared();
        for j in i + 1..decs.len() {
            if decs[i].source.d() == decs[j].source.d() {
                continue;
            }
            if vi == decs[j].mu_c_squared() {
                return Lemma1Report {
                    ok: false,
                    colliding_pair: Some((i, j)),
                };
            }
        }
    }
    Lemma1Report {
        ok: true,
        colliding_pair: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuLevel {
    RawMu,
    SquarefreeMu,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuCollision {
    pub first: usize,
    pub second: usize,
    #[serde(serialize_with = "crate::bigser::uint")]
    pub value: BigUint,
    /// Absent when the two (scaled) factorizations coincide.
    pub almost_square: Option<AlmostSquareWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub level: MuLevel,
    /// Whether `N` exceeds the threshold above which collisions are excluded.
    pub gate_met: bool,
    pub ok: bool,
    pub violations: Vec<MuCollision>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuDistinctness {
    pub raw: LevelReport,
    pub squarefree: LevelReport,
}

impl MuDistinctness {
    pub fn ok(&self) -> bool {
        self.raw.ok && self.squarefree.ok
    }
}

/// Looks for shared `μ` (gate `N > 32c⁶`) and shared `μ̃` (gate `N > 512c¹⁰`)
/// among decompositions of distinct witnesses. Collisions are reported, never
/// asserted; callers decide using `gate_met`.
pub fn mu_distinctness(decs: &[MuXY], c: &Coeff, n: &BigUint) -> MuDistinctness {
    let raw_gate = c.cmp_scaled(n, 32, 6) == Ordering::Greater;
    let sf_gate = c.cmp_scaled(n, 512, 10) == Ordering::Greater;
    let mut raw = Vec::new();
    let mut sf = Vec::new();
    for i in 0..decs.len() {
        for j in i + 1..decs.len() {
            let (a, b) = (&decs[i], &decs[j]);
            if a.source.d() == b.source.d() {
                continue;
            }
            if a.mu == b.mu {
                raw.push(MuCollision {
                    first: i,
                    second: j,
                    value: a.mu.clone(),
                    almost_square: almost_square_witness((&a.x, &a.y), (&b.x, &b.y))
                        .ok()
                        .flatten(),
                });
            }
            if a.mu_tilde == b.mu_tilde {
                let (ax, ay) = (&a.t * &a.x, &a.t * &a.y);
                let (bx, by) = (&b.t * &b.x, &b.t * &b.y);
                sf.push(MuCollision {
                    first: i,
                    second: j,
                    value: a.mu_tilde.clone(),
                    almost_square: almost_square_witness((&ax, &ay), (&bx, &by)).ok().flatten(),
                });
            }
        }
    }
    MuDistinctness {
        raw: LevelReport {
            level: MuLevel::RawMu,
            gate_met: raw_gate,
            ok: raw.is_empty(),
            violations: raw,
        },
        squarefree: LevelReport {
            level: MuLevel::SquarefreeMu,
            gate_met: sf_gate,
            ok: sf.is_empty(),
            violations: sf,
        },
    }
}
