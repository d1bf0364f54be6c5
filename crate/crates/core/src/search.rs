//! Range scans: run the full pipeline on every `N` in a range, aggregate the
//! results deterministically, and checkpoint so an interrupted scan resumes
//! where it stopped.
//!
//! The range is cut into contiguous batches. Batches are independent and may
//! run on a thread pool; their reports are folded strictly in order of `N`,
//! so the final report does not depend on the degree of parallelism.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, ArithError, Factorization, SpfSieve};
use crate::decompose::{
    decomposition_family, lemma1_check, mu_distinctness, parametrizations, pythagorean_triple,
    MuXY,
};
use crate::pell::{build_pell_system, PellSystem};
use crate::window::{check_restrict, window_census, Coeff, WindowError, WindowParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Default upper limit for building a smallest-prime-factor sieve.
pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid scan range [{lo}, {hi}]: need 2 <= lo <= hi")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("checkpoint is corrupt or belongs to a different scan: {0}")]
    CheckpointCorrupt(String),
    #[error("cannot merge reports: {0}")]
    MergeMismatch(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    WitnessIdentity,
    TripleIdentity,
    ParametrizationMismatch,
    RestrictViolated,
    DecompositionFailed,
    DecompositionIdentity,
    NoFeasibleDecomposition,
    Lemma1Collision,
    RawMuCollision,
    SquarefreeMuCollision,
    PellSystem,
    ZeroRhs,
}

impl AnomalyKind {
    /// Whether the anomaly concerns the per-pair chain (witness to decomposition).
    fn is_pipeline(self) -> bool {
        matches!(
            self,
            AnomalyKind::WitnessIdentity
                | AnomalyKind::TripleIdentity
                | AnomalyKind::ParametrizationMismatch
                | AnomalyKind::RestrictViolated
                | AnomalyKind::DecompositionFailed
                | AnomalyKind::DecompositionIdentity
                | AnomalyKind::NoFeasibleDecomposition
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub kind: AnomalyKind,
    pub detail: String,
}

impl Anomaly {
    fn new(kind: AnomalyKind, detail: impl Into<String>) -> Self {
        Anomaly {
            kind,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    #[serde(rename = "N", serialize_with = "crate::bigser::uint")]
    pub n: BigUint,
    pub c: Coeff,
    pub census_size: usize,
    pub r: usize,
    /// Canonical `μ` of each pair with a feasible decomposition, ascending `d`.
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub mu_list: Vec<BigUint>,
    pub pipeline_ok: bool,
    pub lemma1_ok: bool,
    pub mu_distinct_ok: bool,
    /// `N > 32c⁶`.
    pub mu_gate_met: bool,
    pub mu_tilde_distinct_ok: bool,
    /// `N > 512c¹⁰`.
    pub mu_tilde_gate_met: bool,
    pub pell_system: Option<PellSystem>,
    pub anomalies: Vec<Anomaly>,
}

/// One line of the record stream.
#[derive(Debug, Clone, Serialize)]
pub struct RecordLine<'a> {
    pub schema_version: u32,
    #[serde(rename = "N", serialize_with = "crate::bigser::uint")]
    pub n: &'a BigUint,
    pub c: &'a Coeff,
    pub census_size: usize,
    pub r: usize,
    #[serde(serialize_with = "crate::bigser::uint_seq")]
    pub mu_list: &'a [BigUint],
    pub flags: RecordFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RecordFlags {
    pub pipeline_ok: bool,
    pub lemma1_ok: bool,
    pub mu_distinct_ok: bool,
    pub mu_tilde_distinct_ok: bool,
    pub pell_system: bool,
    pub anomalies: usize,
}

impl InstanceReport {
    pub fn record(&self) -> RecordLine<'_> {
        RecordLine {
            schema_version: SCHEMA_VERSION,
            n: &self.n,
            c: &self.c,
            census_size: self.census_size,
            r: self.r,
            mu_list: &self.mu_list,
            flags: RecordFlags {
                pipeline_ok: self.pipeline_ok,
                lemma1_ok: self.lemma1_ok,
                mu_distinct_ok: self.mu_distinct_ok,
                mu_tilde_distinct_ok: self.mu_tilde_distinct_ok,
                pell_system: self.pell_system.is_some(),
                anomalies: self.anomalies.len(),
            },
        }
    }
}

/// Runs census, witnesses, restrict check, triples, parametrizations,
/// decompositions, `μc²` distinctness, `μ`/`μ̃` distinctness and, for `r ≥ 3`, the Pell
/// system on a single `N`. Failures of any identity are recorded as
/// anomalies rather than returned as errors.
pub fn verify_instance(
    n: &BigUint,
    c: &Coeff,
    factors: Option<&Factorization>,
) -> Result<InstanceReport, SearchError> {
    let params = WindowParams::new(n.clone(), c.clone())?;
    let owned;
    let factors = match factors {
        Some(f) => f,
        None => {
            owned = factorize(n)?;
            &owned
        }
    };
    let census = window_census(&params, Some(factors))?;
    let gate = params.restrict_gate();
    let mut anomalies = Vec::new();

    // per pair: a representative decomposition (for the μc² check and the Pell
    // system) and the feasible set
    let mut representatives: Vec<MuXY> = Vec::new();
    let mut feasible_all: Vec<MuXY> = Vec::new();
    let mut mu_list = Vec::new();
    let mut canonical: Vec<Option<MuXY>> = Vec::new();

    for w in &census.pairs {
        let d = w.d();
        let bad = w.identity_violations();
        if !bad.is_empty() {
            anomalies.push(Anomaly::new(
                AnomalyKind::WitnessIdentity,
                format!("d = {d}: {}", bad.join(", ")),
            ));
            canonical.push(None);
            continue;
        }
        if gate && !check_restrict(w, c) {
            anomalies.push(Anomaly::new(
                AnomalyKind::RestrictViolated,
                format!("d = {d}: l = {} exceeds 2c^2", w.l()),
            ));
        }
        let triple = pythagorean_triple(w);
        if !triple.holds() {
            anomalies.push(Anomaly::new(AnomalyKind::TripleIdentity, format!("d = {d}")));
        }

        let family = match decomposition_family(w, Some(factors)) {
            Ok(f) => f,
            Err(e) => {
                anomalies.push(Anomaly::new(
                    AnomalyKind::DecompositionFailed,
                    format!("d = {d}: {e}"),
                ));
                canonical.push(None);
                continue;
            }
        };
        for m in &family {
            let bad = m.identity_violations();
            if !bad.is_empty() {
                anomalies.push(Anomaly::new(
                    AnomalyKind::DecompositionIdentity,
                    format!("d = {d}, mu = {}: {}", m.mu(), bad.join(", ")),
                ));
            }
        }

        match parametrizations(&triple) {
            Ok(list) => {
                for p in list {
                    let induced = p.induced_mu_xy();
                    let known = family
                        .iter()
                        .any(|m| (m.mu(), m.x(), m.y()) == (&induced.0, &induced.1, &induced.2));
                    let (a, b, h) = p.triple();
                    if !known || (a, b, h) != (triple.a.clone(), triple.b.clone(), triple.h.clone())
                    {
                        anomalies.push(Anomaly::new(
                            AnomalyKind::ParametrizationMismatch,
                            format!("d = {d}: lambda = {}, u = {}, v = {}", p.lambda, p.u, p.v),
                        ));
                    }
                }
            }
            Err(e) => anomalies.push(Anomaly::new(
                AnomalyKind::ParametrizationMismatch,
                format!("d = {d}: {e}"),
            )),
        }

        let feasible: Vec<MuXY> = family.iter().filter(|m| m.is_feasible(c)).cloned().collect();
        if feasible.is_empty() && gate {
            anomalies.push(Anomaly::new(
                AnomalyKind::NoFeasibleDecomposition,
                format!("d = {d}"),
            ));
        }
        if let Some(first) = feasible.first() {
            mu_list.push(first.mu().clone());
        }
        canonical.push(feasible.first().cloned());
        if let Some(rep) = feasible.first().or(family.first()) {
            representatives.push(rep.clone());
        }
        feasible_all.extend(feasible);
    }

    let lemma1 = lemma1_check(&representatives);
    if let Some((i, j)) = lemma1.colliding_pair {
        anomalies.push(Anomaly::new(
            AnomalyKind::Lemma1Collision,
            format!(
                "d = {} and d = {} share mu c^2 = {}",
                representatives[i].source().d(),
                representatives[j].source().d(),
                representatives[i].mu_c_squared()
            ),
        ));
    }

    let distinct = mu_distinctness(&feasible_all, c, n);
    for (level, kind) in [
        (&distinct.raw, AnomalyKind::RawMuCollision),
        (&distinct.squarefree, AnomalyKind::SquarefreeMuCollision),
    ] {
        if level.gate_met {
            for v in &level.violations {
                anomalies.push(Anomaly::new(
                    kind,
                    format!(
                        "d = {} and d = {} share {}",
                        feasible_all[v.first].source().d(),
                        feasible_all[v.second].source().d(),
                        v.value
                    ),
                ));
            }
        }
    }

    let mut pell_system = None;
    if census.r() >= 3 {
        let three: Vec<MuXY> = census
            .pairs
            .iter()
            .take(3)
            .zip(&canonical)
            .filter_map(|(w, can)| {
                can.clone().or_else(|| {
                    representatives
                        .iter()
                        .find(|m| m.source().d() == w.d())
                        .cloned()
                })
            })
            .collect();
        match build_pell_system(&three) {
            Ok(sys) => {
                if !sys.rhs_nonzero() {
                    anomalies.push(Anomaly::new(AnomalyKind::ZeroRhs, "constant term vanishes"));
                }
                pell_system = Some(sys);
            }
            Err(e) => anomalies.push(Anomaly::new(AnomalyKind::PellSystem, e.to_string())),
        }
    }

    Ok(InstanceReport {
        n: n.clone(),
        c: c.clone(),
        census_size: census.size(),
        r: census.r(),
        mu_list,
        pipeline_ok: !anomalies.iter().any(|a| a.kind.is_pipeline()),
        lemma1_ok: lemma1.ok,
        mu_distinct_ok: distinct.raw.ok,
        mu_gate_met: distinct.raw.gate_met,
        mu_tilde_distinct_ok: distinct.squarefree.ok,
        mu_tilde_gate_met: distinct.squarefree.gate_met,
        pell_system,
        anomalies,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionCounts {
    /// Instances with a collision although `N` is above the level's gate.
    pub above_gate: u64,
    pub below_gate: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyRecord {
    #[serde(rename = "N")]
    pub n: u64,
    pub anomaly: Anomaly,
}

/// Aggregate over a contiguous range of `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    /// First `N` and last processed `N` (`first − 1` while empty).
    pub range: (u64, u64),
    pub c: Coeff,
    pub min_pairs_to_log: usize,
    pub instances: u64,
    pub pairs_total: u64,
    pub max_census_size: usize,
    pub max_census_argmax: Vec<u64>,
    pub max_r: usize,
    pub max_r_argmax: Vec<u64>,
    /// For each threshold `t ≥ min_pairs_to_log`, every `N` with `r ≥ t`.
    pub instances_with_r_at_least: BTreeMap<usize, Vec<u64>>,
    pub lemma1_violations: u64,
    pub raw_mu_collisions: CollisionCounts,
    pub squarefree_mu_collisions: CollisionCounts,
    pub pell_systems: u64,
    pub anomaly_count: u64,
    pub anomalies: Vec<AnomalyRecord>,
    pub next_n: u64,
}

impl ScanReport {
    pub fn new(first: u64, c: Coeff, min_pairs_to_log: usize) -> Self {
        ScanReport {
            schema_version: SCHEMA_VERSION,
            range: (first, first - 1),
            c,
            min_pairs_to_log,
            instances: 0,
            pairs_total: 0,
            max_census_size: 0,
            max_census_argmax: Vec::new(),
            max_r: 0,
            max_r_argmax: Vec::new(),
            instances_with_r_at_least: BTreeMap::new(),
            lemma1_violations: 0,
            raw_mu_collisions: CollisionCounts::default(),
            squarefree_mu_collisions: CollisionCounts::default(),
            pell_systems: 0,
            anomaly_count: 0,
            anomalies: Vec::new(),
            next_n: first,
        }
    }

    pub fn is_complete_through(&self, hi: u64) -> bool {
        self.next_n > hi
    }

    /// Adds the report for `N = next_n`.
    pub fn absorb(&mut self, inst: &InstanceReport) {
        let n = inst.n.to_u64().expect("scan values fit in u64");
        assert_eq!(n, self.next_n, "instances must be absorbed in order");
        self.instances += 1;
        self.pairs_total += inst.r as u64;
        update_max(&mut self.max_census_size, &mut self.max_census_argmax, inst.census_size, n);
        update_max(&mut self.max_r, &mut self.max_r_argmax, inst.r, n);
        for t in self.min_pairs_to_log..=inst.r {
            self.instances_with_r_at_least.entry(t).or_default().push(n);
        }
        if !inst.lemma1_ok {
            self.lemma1_violations += 1;
        }
        count_collision(&mut self.raw_mu_collisions, inst.mu_distinct_ok, inst.mu_gate_met);
        count_collision(
            &mut self.squarefree_mu_collisions,
            inst.mu_tilde_distinct_ok,
            inst.mu_tilde_gate_met,
        );
        if inst.pell_system.is_some() {
            self.pell_systems += 1;
        }
        self.anomaly_count += inst.anomalies.len() as u64;
        self.anomalies.extend(inst.anomalies.iter().map(|a| AnomalyRecord {
            n,
            anomaly: a.clone(),
        }));
        self.range.1 = n;
        self.next_n = n + 1;
    }

    /// Concatenates a report over the range that starts right after this one.
    pub fn merge(mut self, other: ScanReport) -> Result<ScanReport, SearchError> {
        if self.next_n != other.range.0 {
            return Err(SearchError::MergeMismatch(format!(
                "ranges not adjacent: next N {} vs {}",
                self.next_n, other.range.0
            )));
        }
        if self.c != other.c || self.min_pairs_to_log != other.min_pairs_to_log {
            return Err(SearchError::MergeMismatch(
                "coefficient or logging threshold differs".into(),
            ));
        }
        if self.schema_version != other.schema_version {
            return Err(SearchError::MergeMismatch("schema versions differ".into()));
        }
        if other.instances == 0 {
            return Ok(self);
        }
        if self.instances == 0 {
            let mut other = other;
            other.range.0 = self.range.0;
            return Ok(other);
        }
        self.instances += other.instances;
        self.pairs_total += other.pairs_total;
        merge_max(
            &mut self.max_census_size,
            &mut self.max_census_argmax,
            other.max_census_size,
            other.max_census_argmax,
        );
        merge_max(&mut self.max_r, &mut self.max_r_argmax, other.max_r, other.max_r_argmax);
        for (t, list) in other.instances_with_r_at_least {
            self.instances_with_r_at_least.entry(t).or_default().extend(list);
        }
        self.lemma1_violations += other.lemma1_violations;
        self.raw_mu_collisions.above_gate += other.raw_mu_collisions.above_gate;
        self.raw_mu_collisions.below_gate += other.raw_mu_collisions.below_gate;
        self.squarefree_mu_collisions.above_gate += other.squarefree_mu_collisions.above_gate;
        self.squarefree_mu_collisions.below_gate += other.squarefree_mu_collisions.below_gate;
        self.pell_systems += other.pell_systems;
        self.anomaly_count += other.anomaly_count;
        self.anomalies.extend(other.anomalies);
        self.range.1 = other.range.1;
        self.next_n = other.next_n;
        Ok(self)
    }
}

fn update_max(best: &mut usize, argmax: &mut Vec<u64>, value: usize, n: u64) {
    if value > *best || argmax.is_empty() {
        *best = value;
        argmax.clear();
        argmax.push(n);
    } else if value == *best {
        argmax.push(n);
    }
}

fn merge_max(best: &mut usize, argmax: &mut Vec<u64>, value: usize, other: Vec<u64>) {
    if other.is_empty() {
        return;
    }
    if value > *best || argmax.is_empty() {
        *best = value;
        *argmax = other;
    } else if value == *best {
        argmax.extend(other);
    }
}

fn count_collision(counts: &mut CollisionCounts, ok: bool, gate_met: bool) {
    if !ok {
        if gate_met {
            counts.above_gate += 1;
        } else {
            counts.below_gate += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Instances with at least this many pairs go to the record stream and
    /// the `instances_with_r_at_least` table.
    pub min_pairs_to_log: usize,
    pub checkpoint_path: Option<PathBuf>,
    /// Worker threads; 1 runs on the calling thread.
    pub parallelism: usize,
    pub batch_size: u64,
    /// Build a smallest-prime-factor sieve when the range ends at or below this.
    pub sieve_limit: u64,
    /// Stop after this many batches in this invocation, leaving the checkpoint
    /// in place for a later resume.
    pub stop_after_batches: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            min_pairs_to_log: 3,
            checkpoint_path: None,
            parallelism: 1,
            batch_size: 1000,
            sieve_limit: DEFAULT_SIEVE_LIMIT,
            stop_after_batches: None,
        }
    }
}

/// On-disk checkpoint of a scan in progress.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub c: Coeff,
    pub scan_from: u64,
    pub scan_to: u64,
    pub next_n: u64,
    pub report: ScanReport,
}

impl Checkpoint {
    fn validate(&self, lo: u64, hi: u64, c: &Coeff, min_pairs: usize) -> Result<(), SearchError> {
        let corrupt = |why: String| Err(SearchError::CheckpointCorrupt(why));
        if self.schema_version != SCHEMA_VERSION || self.report.schema_version != SCHEMA_VERSION {
            return corrupt(format!("schema version {} unsupported", self.schema_version));
        }
        if (self.scan_from, self.scan_to) != (lo, hi) {
            return corrupt(format!(
                "checkpoint covers [{}, {}], scan requested [{lo}, {hi}]",
                self.scan_from, self.scan_to
            ));
        }
        if &self.c != c || &self.report.c != c {
            return corrupt(format!("checkpoint coefficient {} differs from {c}", self.c));
        }
        if self.report.min_pairs_to_log != min_pairs {
            return corrupt("logging threshold differs".into());
        }
        if self.report.range.0 != lo
            || self.next_n != self.report.next_n
            || self.next_n < lo
            || self.next_n > hi + 1
            || self.report.instances != self.next_n - lo
        {
            return corrupt("progress fields are inconsistent".into());
        }
        Ok(())
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Option<Checkpoint>, SearchError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| SearchError::CheckpointCorrupt(e.to_string()))
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), SearchError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp)?;
        let text = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
        file.write_all(text.as_bytes())?;
        file.write_all(b"\n")?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn scan(lo: u64, hi: u64, c: &Coeff, opts: &ScanOptions) -> Result<ScanReport, SearchError> {
    scan_with_records(lo, hi, c, opts, |_| {})
}

/// Scans `[lo, hi]`, calling `on_record` in ascending `N` for every instance
/// with at least `min_pairs_to_log` pairs. Resumes from the checkpoint when
/// one exists at `opts.checkpoint_path`.
pub fn scan_with_records<F>(
    lo: u64,
    hi: u64,
    c: &Coeff,
    opts: &ScanOptions,
    mut on_record: F,
) -> Result<ScanReport, SearchError>
where
    F: FnMut(&InstanceReport),
{
    if lo < 2 || lo > hi {
        return Err(SearchError::InvalidRange { lo, hi });
    }
    if !c.is_at_least_one() {
        return Err(WindowError::InvalidParams(format!("c = {c} must be at least 1")).into());
    }

    let mut report = match opts.checkpoint_path.as_deref().map(load_checkpoint).transpose()? {
        Some(Some(cp)) => {
            cp.validate(lo, hi, c, opts.min_pairs_to_log)?;
            cp.report
        }
        _ => ScanReport::new(lo, c.clone(), opts.min_pairs_to_log),
    };
    if report.is_complete_through(hi) {
        return Ok(report);
    }

    let sieve = (hi <= opts.sieve_limit && hi <= u32::MAX as u64).then(|| SpfSieve::new(hi as u32));
    let batch_size = opts.batch_size.max(1);
    let workers = opts.parallelism.max(1);
    let pool = if workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool"),
        )
    } else {
        None
    };
    let per_round = if workers > 1 { workers * 2 } else { 1 };

    let mut batches_done = 0usize;
    while !report.is_complete_through(hi) {
        if opts.stop_after_batches.is_some_and(|limit| batches_done >= limit) {
            break;
        }
        let mut round = Vec::with_capacity(per_round);
        let mut start = report.next_n;
        while round.len() < per_round && start <= hi {
            let end = hi.min(start.saturating_add(batch_size - 1));
            round.push((start, end));
            start = end + 1;
        }
        let run = |&(a, b): &(u64, u64)| run_batch(a, b, c, sieve.as_ref(), opts.min_pairs_to_log);
        let results: Vec<Result<(ScanReport, Vec<InstanceReport>), SearchError>> = match &pool {
            Some(pool) => pool.install(|| round.par_iter().map(run).collect()),
            None => round.iter().map(run).collect(),
        };
        for res in results {
            let (part, logged) = res?;
            for inst in &logged {
                on_record(inst);
            }
            report = report.merge(part)?;
            batches_done += 1;
        }
        if let Some(path) = &opts.checkpoint_path {
            let cp = Checkpoint {
                schema_version: SCHEMA_VERSION,
                c: c.clone(),
                scan_from: lo,
                scan_to: hi,
                next_n: report.next_n,
                report: report.clone(),
            };
            write_checkpoint(path, &cp)?;
        }
    }
    Ok(report)
}

fn run_batch(
    a: u64,
    b: u64,
    c: &Coeff,
    sieve: Option<&SpfSieve>,
    min_pairs: usize,
) -> Result<(ScanReport, Vec<InstanceReport>), SearchError> {
    let mut part = ScanReport::new(a, c.clone(), min_pairs);
    let mut logged = Vec::new();
    for n in a..=b {
        let factors = match sieve {
            Some(s) => s.factor(n),
            None => crate::arith::factorize_u64(n),
        };
        let inst = verify_instance(&BigUint::from(n), c, Some(&factors))?;
        part.absorb(&inst);
        if inst.r >= min_pairs {
            logged.push(inst);
        }
    }
    Ok((part, logged))
}
