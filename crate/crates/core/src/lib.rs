//! Divisors of a perfect square `n = N²` close to its square root.
//!
//! The crate enumerates the divisors of `N²` in `[N − c√N, N + c√N]` with
//! exact arithmetic and runs the structural chain that constrains them:
//! divisor pairs, Pythagorean triples, decompositions `2N = μxy` and the
//! simultaneous Pell systems they induce. It also generates the infinite
//! family from `X² − 2Y² = 2` that places three divisors in
//! `[√n, √n + 5n^¼]`, and scans ranges of `N` for records.
//!
//! ```
//! use nearsq::search::verify_instance;
//! use num_bigint::BigUint;
//!
//! let report = verify_instance(&BigUint::from(60u32), &"3".parse().unwrap(), None).unwrap();
//! assert_eq!(report.r, 3);
//! assert!(report.anomalies.is_empty());
//! ```

pub mod arith;
mod bigser;
pub mod decompose;
pub mod pell;
pub mod search;
pub mod window;

pub use arith::{factorize, ArithError, Factorization};
pub use window::{Coeff, PairWitness, WindowCensus, WindowParams};
