//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nearsq::decompose::{decompositions, pythagorean_triple, MuXY};
use nearsq::pell::{
    family_census_check, pell_family_upto, theorem_log_threshold, turk_log_bound,
};
use nearsq::search::{scan, verify_instance, ScanOptions, ScanReport};
use nearsq::window::{window_census, Coeff, WindowCensus, WindowParams};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

const SWEEP_MAX: u64 = 20_000;
const SWEEP_COEFFS: [u64; 2] = [3, 5];
const DISTINCT_LO: u64 = 23_328; // 32 * 3^6, exclusive
const DISTINCT_HI: u64 = 60_000;
const FAMILY_K_MAX: u32 = 50;
const FAMILY_BUDGET: Duration = Duration::from_secs(1);
const CROSS_CHECK_K_MAX: u32 = 8;
const BOUND_REL_TOL: f64 = 1e-4;
// Independent 50-digit evaluations at c = 3, C = 1.
const TURK_C3_REFERENCE: f64 = 37_391_290.309_257_075_852_722;
const THRESHOLD_C3_REFERENCE: f64 = 1_166.674_729_857_747_649_695_974;
const SCAN_HI: u64 = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn u(n: &BigUint) -> u128 {
    n.to_u128().expect("fits in u128")
}

/// Every q in a window widened by two, tested for divisibility of N² and
/// exact membership `(q − N)² ≤ c²N`.
fn naive_census(n: u64, c: u64) -> Vec<u64> {
    let n2 = (n as u128) * (n as u128);
    let reach = (c as f64 * (n as f64).sqrt()) as u64 + 2;
    let lo = n.saturating_sub(reach).max(1);
    (lo..=n + reach)
        .filter(|&q| {
            let gap = (q as i128 - n as i128).unsigned_abs();
            n2 % q as u128 == 0 && gap * gap <= (c * c) as u128 * n as u128
        })
        .collect()
}

struct SweepPoint {
    n: u64,
    c: u64,
    census: WindowCensus,
}

fn sweep() -> Vec<SweepPoint> {
    let mut points: Vec<(u64, u64)> = Vec::new();
    for c in SWEEP_COEFFS {
        points.extend((2..=SWEEP_MAX).map(|n| (n, c)));
    }
    points
        .into_par_iter()
        .map(|(n, c)| {
            let params = WindowParams::new(big(n), Coeff::integer(c)).unwrap();
            SweepPoint { n, c, census: window_census(&params, None).unwrap() }
        })
        .collect()
}

fn census_oracle(points: &[SweepPoint]) -> Outcome {
    let mismatches: Vec<(u64, u64)> = points
        .par_iter()
        .filter(|p| {
            let got: Vec<u64> = p.census.divisors.iter().map(|q| q.to_u64().unwrap()).collect();
            got != naive_census(p.n, p.c)
        })
        .map(|p| (p.n, p.c))
        .collect();
    if mismatches.is_empty() {
        pass(format!("{} censuses equal the naive oracle", points.len()))
    } else {
        fail(format!("{} mismatches, first (N, c) = {:?}", mismatches.len(), mismatches[0]))
    }
}

fn pair_identities(points: &[SweepPoint]) -> Outcome {
    let mut pairs = 0usize;
    let mut bad = Vec::new();
    for p in points {
        let n = p.n as u128;
        for w in &p.census.pairs {
            pairs += 1;
            let (d, e, l) = (u(w.d()), u(w.e()), u(w.l()));
            let tr = pythagorean_triple(w);
            let ok = (n - d) * (n + e) == n * n
                && e * d == (e - d) * n
                && l * (n - d) == d * d
                && (2 * d + l).pow(2) + (2 * n).pow(2) == (2 * n + l).pow(2)
                && (u(&tr.a), u(&tr.b), u(&tr.h)) == (2 * d + l, 2 * n, 2 * n + l)
                && w.identity_violations().is_empty();
            let gated = n >= 4 * (p.c as u128).pow(2);
            if !ok || (gated && l > 2 * (p.c as u128).pow(2)) {
                bad.push((p.n, p.c, d));
            }
        }
    }
    if bad.is_empty() {
        pass(format!("{pairs} pairs, all identities exact"))
    } else {
        fail(format!("{} violations, first (N, c, d) = {:?}", bad.len(), bad[0]))
    }
}

fn decomposition_ok(m: &MuXY, n: u128, d: u128, e: u128, c: u128) -> bool {
    let (mu, x, y) = (u(m.mu()), u(m.x()), u(m.y()));
    mu * x * x == 2 * (n - d)
        && mu * y * y == 2 * (n + e)
        && mu * x * y == 2 * n
        && y > x
        && y - x <= 2 * c
        && mu <= 4 * c * c
        && m.identity_violations().is_empty()
}

fn feasibility(points: &[SweepPoint]) -> Outcome {
    let results: Vec<(usize, Vec<(u64, u64, u128)>)> = points
        .par_iter()
        .filter(|p| p.n >= 4 * p.c * p.c)
        .map(|p| {
            let (n, c) = (p.n as u128, p.c as u128);
            let mut bad = Vec::new();
            for w in &p.census.pairs {
                let (d, e) = (u(w.d()), u(w.e()));
                match decompositions(w, &Coeff::integer(p.c)) {
                    Ok(decs) if decs.all.iter().all(|m| decomposition_ok(m, n, d, e, c)) => {}
                    _ => bad.push((p.n, p.c, d)),
                }
            }
            (p.census.pairs.len(), bad)
        })
        .collect();
    let pairs: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<_> = results.into_iter().flat_map(|r| r.1).collect();
    if bad.is_empty() {
        pass(format!("{pairs} gated pairs each have a feasible decomposition"))
    } else {
        fail(format!("{} violations, first (N, c, d) = {:?}", bad.len(), bad[0]))
    }
}

fn lemma1(points: &[SweepPoint]) -> Outcome {
    let multi: Vec<&SweepPoint> = points.iter().filter(|p| p.census.r() >= 2).collect();
    let bad: Vec<(u64, u64)> = multi
        .par_iter()
        .filter(|p| {
            let c = Coeff::integer(p.c);
            let mut seen = BTreeSet::new();
            let distinct = p.census.pairs.iter().all(|w| match decompositions(w, &c) {
                Ok(decs) => {
                    let m = &decs.canonical;
                    let gap = m.y() - m.x();
                    seen.insert(m.mu() * &gap * &gap)
                }
                // a pair with no feasible decomposition has nothing to collide
                Err(_) => true,
            });
            let report = verify_instance(&big(p.n), &c, None).unwrap();
            !distinct || !report.lemma1_ok
        })
        .map(|p| (p.n, p.c))
        .collect();
    if bad.is_empty() {
        pass(format!("{} instances with r >= 2, mu c^2 pairwise distinct", multi.len()))
    } else {
        fail(format!("{} violations, first (N, c) = {:?}", bad.len(), bad[0]))
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn mu_distinct_above_gate() -> Outcome {
    let c = Coeff::integer(3);
    let shared: Vec<u64> = (DISTINCT_LO + 1..=DISTINCT_HI)
        .into_par_iter()
        .filter(|&n| {
            let params = WindowParams::new(big(n), c.clone()).unwrap();
            let census = window_census(&params, None).unwrap();
            let mut owner: BTreeMap<BigUint, BigUint> = BTreeMap::new();
            for w in &census.pairs {
                let Ok(decs) = decompositions(w, &c) else { continue };
                for m in &decs.all {
                    if let Some(d) = owner.insert(m.mu().clone(), w.d().clone()) {
                        if &d != w.d() {
                            return true;
                        }
                    }
                }
            }
            false
        })
        .collect();
    let opts = ScanOptions { parallelism: threads(), ..ScanOptions::default() };
    let report = scan(DISTINCT_LO + 1, DISTINCT_HI, &c, &opts).unwrap();
    let scanned = report.raw_mu_collisions.above_gate + report.raw_mu_collisions.below_gate;
    if shared.is_empty() && scanned == 0 && report.anomaly_count == 0 {
        pass(format!(
            "N in ({DISTINCT_LO}, {DISTINCT_HI}]: no shared feasible mu ({} pairs)",
            report.pairs_total
        ))
    } else {
        fail(format!(
            "shared mu at {} N (first {:?}); scan counted {scanned}, anomalies {}",
            shared.len(),
            shared.first(),
            report.anomaly_count
        ))
    }
}

fn worked_instance() -> Outcome {
    let c = Coeff::integer(3);
    let report = verify_instance(&big(60), &c, None).unwrap();
    let params = WindowParams::new(big(60), c.clone()).unwrap();
    let census = window_census(&params, None).unwrap();
    let canonical: Vec<(u64, u64, u64)> = census
        .pairs
        .iter()
        .map(|w| {
            let m = decompositions(w, &c).unwrap().canonical;
            (m.mu().to_u64().unwrap(), m.x().to_u64().unwrap(), m.y().to_u64().unwrap())
        })
        .collect();
    let Some(sys) = &report.pell_system else {
        return fail("no Pell system built");
    };
    let lhs = [sys.lhs(2), sys.lhs(3)];
    let rhs = [sys.rhs(2), sys.rhs(3)];
    let expected_lhs = [(484 - 486).into(), (484 - 490).into()];
    let ok = report.r == 3
        && canonical == [(1, 10, 12), (6, 4, 5), (10, 3, 4)]
        && lhs == expected_lhs
        && rhs == [(-2).into(), (-6).into()]
        && sys.rhs_nonzero()
        && sys.violations().is_empty()
        && report.anomalies.is_empty();
    let detail = format!("r = {}, (mu, x, y) = {canonical:?}, lhs = {lhs:?}, rhs = {rhs:?}", report.r);
    if ok { pass(detail) } else { fail(detail) }
}

fn pell_family() -> Outcome {
    let start = Instant::now();
    let members = pell_family_upto(FAMILY_K_MAX).unwrap();
    let bad: Vec<u32> = members.iter().filter(|ex| !ex.violations().is_empty()).map(|ex| ex.k).collect();
    let elapsed = start.elapsed();
    let first = &members[0];
    let second = &members[1];
    let k1 = (first.x.clone(), first.y.clone(), first.n.clone()) == (big(10), big(7), big(9216))
        && first.window_divisors == [big(96), big(144), big(128)];
    let k2 = (second.x.clone(), second.y.clone(), second.n.clone()) == (big(58), big(41), big(11_289_600));
    let detail = format!(
        "{} members, {} with violations, k=1 {}, k=2 {}, {:.3}s",
        members.len(),
        bad.len(),
        if k1 { "ok" } else { "wrong" },
        if k2 { "ok" } else { "wrong" },
        elapsed.as_secs_f64()
    );
    if members.len() == FAMILY_K_MAX as usize && bad.is_empty() && k1 && k2 && elapsed <= FAMILY_BUDGET {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn family_cross_check() -> Outcome {
    let c5 = Coeff::integer(5);
    let members = pell_family_upto(CROSS_CHECK_K_MAX).unwrap();
    let mut wrong = Vec::new();
    for ex in &members {
        let chk = family_census_check(ex, &c5).unwrap();
        if !chk.matches {
            let extra: Vec<String> = chk.extra.iter().map(|q| q.to_string()).collect();
            wrong.push(format!("k={} N={} extra [{}]", ex.k, chk.n, extra.join(", ")));
        }
    }
    if wrong.is_empty() {
        pass(format!("k <= {CROSS_CHECK_K_MAX}: divisors >= N are exactly the three"))
    } else {
        fail(format!("{} of {CROSS_CHECK_K_MAX} differ: {}", wrong.len(), wrong.join("; ")))
    }
}

fn bounds() -> Outcome {
    let c3 = Coeff::integer(3);
    let turk = turk_log_bound(&c3, 1.0);
    let thr = theorem_log_threshold(&c3, 1.0).unwrap();
    let rel_turk = (turk / TURK_C3_REFERENCE - 1.0).abs();
    let rel_thr = (thr / THRESHOLD_C3_REFERENCE - 1.0).abs();
    let detail = format!(
        "ln turk = {turk:.6e} (rel {rel_turk:.1e}), ln threshold = {thr:.4} (rel {rel_thr:.1e}); tol {BOUND_REL_TOL:.0e}"
    );
    if rel_turk <= BOUND_REL_TOL && rel_thr <= BOUND_REL_TOL {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn scan_determinism() -> Outcome {
    let c = Coeff::integer(3);
    let opts = ScanOptions::default();
    let whole = scan(2, SCAN_HI, &c, &opts).unwrap();
    let mut problems = Vec::new();

    for split in [3, 61, 2_500, 5_001, 9_999, SCAN_HI] {
        let left = scan(2, split - 1, &c, &opts).unwrap();
        let right = scan(split, SCAN_HI, &c, &opts).unwrap();
        let merged = left.merge(right).unwrap();
        if !same(&merged, &whole) {
            problems.push(format!("split at {split}"));
        }
    }

    let parallel = ScanOptions { parallelism: 4, batch_size: 333, ..ScanOptions::default() };
    if !same(&scan(2, SCAN_HI, &c, &parallel).unwrap(), &whole) {
        problems.push("parallel scan".into());
    }

    let dir = tempfile::tempdir().unwrap();
    for (label, workers) in [("sequential", 1), ("parallel", 3)] {
        let path = dir.path().join(format!("{label}.json"));
        let interrupted = ScanOptions {
            checkpoint_path: Some(path.clone()),
            batch_size: 700,
            parallelism: workers,
            stop_after_batches: Some(2),
            ..ScanOptions::default()
        };
        let partial = scan(2, SCAN_HI, &c, &interrupted).unwrap();
        if partial.is_complete_through(SCAN_HI) {
            problems.push(format!("{label} interruption did not stop early"));
        }
        let resumed = ScanOptions { stop_after_batches: None, ..interrupted };
        if !same(&scan(2, SCAN_HI, &c, &resumed).unwrap(), &whole) {
            problems.push(format!("{label} resume from checkpoint"));
        }
    }

    if problems.is_empty() {
        pass(format!(
            "6 splits, parallel run and 2 resumes equal the unsplit scan ({} instances, max r {})",
            whole.instances, whole.max_r
        ))
    } else {
        fail(problems.join(", "))
    }
}

fn same(a: &ScanReport, b: &ScanReport) -> bool {
    a == b && serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap()
}

fn main() -> ExitCode {
    println!("acceptance: sweeping N <= {SWEEP_MAX} for c in {SWEEP_COEFFS:?}");
    let points = sweep();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("census equals naive oracle", Box::new(|| census_oracle(&points))),
        ("pair identities and l <= 2c^2", Box::new(|| pair_identities(&points))),
        ("feasible decompositions", Box::new(|| feasibility(&points))),
        ("mu c^2 distinct across pairs", Box::new(|| lemma1(&points))),
        ("no shared mu above 32c^6 (c = 3)", Box::new(mu_distinct_above_gate)),
        ("worked instance N = 60, c = 3", Box::new(worked_instance)),
        ("family from X^2 - 2Y^2 = 2, k <= 50", Box::new(pell_family)),
        ("family census cross-check, k <= 8", Box::new(family_cross_check)),
        ("log-space bounds at c = 3", Box::new(bounds)),
        ("scan split, merge and resume", Box::new(scan_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name}: {} ({:.1}s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
