//! Exact integer substrate: square roots, factorization, squarefree kernels
//! and divisor enumeration restricted to an interval.
//!
//! Factorization runs trial division by the primes below 10⁶, then Brent's
//! variant of Pollard rho. Values that fit in a `u64` take a native path with
//! a deterministic Miller-Rabin test; larger residual cofactors are handled on
//! `BigUint` up to a configurable size budget.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Trial division bound.
pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error(
        "residual cofactor of {digits} decimal digits exceeds the factorization budget \
         ({budget} digits); supply the factorization explicitly"
    )]
    SizeBudgetExceeded { digits: usize, budget: usize },
    #[error("zero has no factorization")]
    Zero,
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),
}

/// Limits for factoring values with no small factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    /// Largest residual cofactor (after trial division) that will be attacked.
    pub max_cofactor_digits: usize,
    /// Pollard-rho iterations allowed per split before giving up.
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            max_cofactor_digits: 40,
            rho_iterations: 1 << 22,
        }
    }
}

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: BigUint,
    primes: Vec<(BigUint, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            value: BigUint::one(),
            primes: Vec::new(),
        }
    }

    /// Builds a factorization from user-supplied `(prime, exponent)` pairs,
    /// checking ordering, exponents and primality of every entry.
    pub fn from_prime_powers<I>(entries: I) -> Result<Self, ArithError>
    where
        I: IntoIterator<Item = (BigUint, u32)>,
    {
        let mut primes: Vec<(BigUint, u32)> = entries.into_iter().collect();
        primes.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in primes.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ArithError::InvalidFactorization(format!(
                    "prime {} listed twice",
                    pair[0].0
                )));
            }
        }
        let mut value = BigUint::one();
        for (p, e) in &primes {
            if *e == 0 {
                return Err(ArithError::InvalidFactorization(format!(
                    "prime {p} has exponent 0"
                )));
            }
            if !is_prime(p) {
                return Err(ArithError::InvalidFactorization(format!(
                    "{p} is not prime"
                )));
            }
            value *= p.pow(*e);
        }
        Ok(Factorization { value, primes })
    }

    /// Groups an unordered multiset of prime factors.
    fn from_prime_list(mut list: Vec<BigUint>) -> Self {
        list.sort();
        let mut primes: Vec<(BigUint, u32)> = Vec::new();
        let mut value = BigUint::one();
        for p in list {
            value *= &p;
            match primes.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => primes.push((p, 1)),
            }
        }
        Factorization { value, primes }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn primes(&self) -> &[(BigUint, u32)] {
        &self.primes
    }

    /// Factorization of `value²`.
    pub fn squared(&self) -> Factorization {
        Factorization {
            value: &self.value * &self.value,
            primes: self.primes.iter().map(|(p, e)| (p.clone(), 2 * e)).collect(),
        }
    }

    /// Factorization of the product of two factored values.
    pub fn multiply(&self, other: &Factorization) -> Factorization {
        let mut primes = Vec::with_capacity(self.primes.len() + other.primes.len());
        let (mut i, mut j) = (0, 0);
        while i < self.primes.len() || j < other.primes.len() {
            let ord = match (self.primes.get(i), other.primes.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    primes.push(self.primes[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    primes.push(other.primes[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let (p, e) = &self.primes[i];
                    primes.push((p.clone(), e + other.primes[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        Factorization {
            value: &self.value * &other.value,
            primes,
        }
    }

    /// Factors a divisor of `self.value` using only the known primes.
    /// Returns `None` when `m` does not divide the value.
    pub fn factor_divisor(&self, m: &BigUint) -> Option<Factorization> {
        if m.is_zero() || !(&self.value % m).is_zero() {
            return None;
        }
        let mut rest = m.clone();
        let mut primes = Vec::new();
        for (p, _) in &self.primes {
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(p);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                primes.push((p.clone(), e));
            }
        }
        debug_assert!(rest.is_one());
        Some(Factorization {
            value: m.clone(),
            primes,
        })
    }

    /// Kernel and square root of the largest square divisor, as factorizations.
    pub fn split_square(&self) -> (Factorization, Factorization) {
        let mut kernel = Factorization::one();
        let mut root = Factorization::one();
        for (p, e) in &self.primes {
            if e % 2 == 1 {
                kernel.value *= p;
                kernel.primes.push((p.clone(), 1));
            }
            if *e >= 2 {
                root.value *= p.pow(e / 2);
                root.primes.push((p.clone(), e / 2));
            }
        }
        (kernel, root)
    }

    /// `(kernel, t)` with `value = kernel · t²` and `kernel` squarefree.
    pub fn squarefree_split(&self) -> (BigUint, BigUint) {
        let (kernel, root) = self.split_square();
        (kernel.value, root.value)
    }

    pub fn divisor_count(&self) -> BigUint {
        self.primes
            .iter()
            .map(|(_, e)| BigUint::from(e + 1))
            .product()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primes.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.primes.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// `(⌊√n⌋, whether n is a perfect square)`.
pub fn isqrt(n: &BigUint) -> (BigUint, bool) {
    let root = n.sqrt();
    let exact = &root * &root == *n;
    (root, exact)
}

pub fn factorize(n: &BigUint) -> Result<Factorization, ArithError> {
    factorize_with(n, &FactorBudget::default())
}

pub fn factorize_with(n: &BigUint, budget: &FactorBudget) -> Result<Factorization, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    if let Some(small) = n.to_u64() {
        return Ok(factorize_u64(small));
    }

    let mut found: Vec<BigUint> = Vec::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        let p = BigUint::from(p);
        if &p * &p > rest {
            break;
        }
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            found.push(p.clone());
        }
        if rest.bits() <= 64 {
            break;
        }
    }
    if let Some(small) = rest.to_u64() {
        let mut tail = Vec::new();
        factor_u64_into(small, &mut tail);
        found.extend(tail.into_iter().map(BigUint::from));
        return Ok(Factorization::from_prime_list(found));
    }

    let digits = rest.to_str_radix(10).len();
    if digits > budget.max_cofactor_digits {
        return Err(ArithError::SizeBudgetExceeded {
            digits,
            budget: budget.max_cofactor_digits,
        });
    }
    split_big(rest, budget, &mut found)?;
    Ok(Factorization::from_prime_list(found))
}

/// Factorization of a machine-sized value; never exceeds the budget.
pub fn factorize_u64(n: u64) -> Factorization {
    assert!(n > 0, "factorize_u64(0)");
    let mut list = Vec::new();
    factor_u64_into(n, &mut list);
    list.sort_unstable();
    let mut primes: Vec<(BigUint, u32)> = Vec::new();
    let mut last = 0u64;
    for p in list {
        if p == last {
            primes.last_mut().unwrap().1 += 1;
        } else {
            primes.push((BigUint::from(p), 1));
            last = p;
        }
    }
    Factorization {
        value: BigUint::from(n),
        primes,
    }
}

/// `(kernel, t)` with `n = kernel · t²`, kernel squarefree and t maximal.
pub fn squarefree_split(n: &BigUint) -> Result<(BigUint, BigUint), ArithError> {
    Ok(factorize(n)?.squarefree_split())
}

/// All divisors `q` of `f.value()` with `lo <= q <= hi`, ascending.
///
/// Depth-first over prime powers; a branch is cut as soon as the partial
/// product exceeds `hi`, or when even the largest completion stays below `lo`.
pub fn divisors_in_range(f: &Factorization, lo: &BigUint, hi: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    if lo > hi {
        return out;
    }
    let primes = f.primes();
    // suffix[i] = product of p^e over primes[i..]
    let mut suffix = vec![BigUint::one(); primes.len() + 1];
    for i in (0..primes.len()).rev() {
        suffix[i] = &suffix[i + 1] * primes[i].0.pow(primes[i].1);
    }
    collect_divisors(primes, &suffix, 0, BigUint::one(), lo, hi, &mut out);
    out.sort();
    out
}

fn collect_divisors(
    primes: &[(BigUint, u32)],
    suffix: &[BigUint],
    i: usize,
    partial: BigUint,
    lo: &BigUint,
    hi: &BigUint,
    out: &mut Vec<BigUint>,
) {
    if i == primes.len() {
        if &partial >= lo {
            out.push(partial);
        }
        return;
    }
    if &(&partial * &suffix[i]) < lo {
        return;
    }
    let (p, e) = &primes[i];
    let mut current = partial;
    for k in 0..=*e {
        if &current > hi {
            break;
        }
        let next = if k < *e { Some(&current * p) } else { None };
        collect_divisors(primes, suffix, i + 1, current, lo, hi, out);
        match next {
            Some(v) => current = v,
            None => break,
        }
    }
}

/// Smallest-prime-factor table for bulk factorization of `2..=limit`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u32) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        SpfSieve { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Factorization of `n`, which must satisfy `1 <= n <= limit`.
    pub fn factor(&self, n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.limit(), "{n} outside sieve range");
        let mut m = n as usize;
        let mut primes: Vec<(BigUint, u32)> = Vec::new();
        while m > 1 {
            let p = self.spf[m];
            let mut e = 0;
            while m.is_multiple_of(p as usize) {
                m /= p as usize;
                e += 1;
            }
            primes.push((BigUint::from(p), e));
        }
        Factorization {
            value: BigUint::from(n),
            primes,
        }
    }
}

/// Primes below [`TRIAL_DIVISION_LIMIT`].
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_LIMIT as usize;
        let mut composite = vec![false; n];
        let mut primes = Vec::with_capacity(80_000);
        for i in 2..n {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j < n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Deterministic below 2⁶⁴. Above 3.3·10²⁴ the fixed-base Miller-Rabin test
/// is not proven, so the result there is a strong probable-prime verdict.
pub fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_prime_big(n),
    }
}

const MR_BASES_U64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const MR_BASES_BIG: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES_U64 {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES_U64 {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn is_prime_big(n: &BigUint) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &p in &MR_BASES_BIG {
        if (n % p).is_zero() {
            return *n == BigUint::from(p);
        }
    }
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'bases: for &a in &MR_BASES_BIG {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn factor_u64_into(mut n: u64, out: &mut Vec<u64>) {
    for &p in small_primes() {
        let p = p as u64;
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
    }
    if n > 1 {
        split_u64(n, out);
    }
}

fn split_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = rho_u64(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

/// Brent's cycle-finding rho on a composite `n`; retries with the next
/// polynomial constant until a proper divisor appears.
fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    const BATCH: u64 = 128;
    for c in 1..u64::MAX {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u64;
        let mut x;
        let mut ys = y;
        let mut g = 1u64;
        let mut q = 1u64;
        let mut r = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BATCH;
            }
            r *= 2;
            if g == 1 {
                continue;
            }
            if g == n {
                // batch overshot; step back one at a time
                loop {
                    ys = f(ys);
                    g = x.abs_diff(ys).gcd(&n);
                    if g > 1 {
                        break;
                    }
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho exhausted polynomial constants")
}

fn split_big(n: BigUint, budget: &FactorBudget, out: &mut Vec<BigUint>) -> Result<(), ArithError> {
    if n.is_one() {
        return Ok(());
    }
    if let Some(small) = n.to_u64() {
        let mut tail = Vec::new();
        split_u64(small, &mut tail);
        out.extend(tail.into_iter().map(BigUint::from));
        return Ok(());
    }
    if is_prime_big(&n) {
        out.push(n);
        return Ok(());
    }
    let d = rho_big(&n, budget).ok_or_else(|| ArithError::SizeBudgetExceeded {
        digits: n.to_str_radix(10).len(),
        budget: budget.max_cofactor_digits,
    })?;
    let rest = &n / &d;
    split_big(d, budget, out)?;
    split_big(rest, budget, out)
}

fn rho_big(n: &BigUint, budget: &FactorBudget) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = one.clone();
        let mut q = one.clone();
        let mut r = 1u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            spent += r;
            if spent > budget.rho_iterations {
                return None;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}
