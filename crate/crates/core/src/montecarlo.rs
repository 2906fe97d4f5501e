//! Flash-by-flash simulation of photon counts at two back-to-back detectors
//! and estimation of the count-difference variance Var(N_a − N_b).
//!
//! Runs are split into fixed chunks of [`CHUNK_SIZE`] flashes, each drawing
//! from its own counter-derived stream. All moments are accumulated as exact
//! integer sums, so a report depends only on `(source, detector, flashes,
//! seed)` and never on the number of worker threads.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::states::{pair_variance_thermal, SourceKind, SqueezeParameter};
use crate::stream::{chunk_count, substream, Stream, CHUNK_SIZE};

/// Below this many flashes a report is flagged as low statistics.
pub const LOW_STATISTICS_FLASHES: u64 = 10_000;
/// Batches used for the batch-means standard error.
pub const DEFAULT_BATCHES: u64 = 100;
/// |z| threshold separating "consistent" from "excluded".
pub const Z_THRESHOLD: f64 = 3.0;

/// Light source feeding the two detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceConfig {
    /// Independent Bose–Einstein modes with the given mean occupations.
    Thermal { nbar_a: f64, nbar_b: f64 },
    /// One two-mode squeezed pair per flash.
    Squeezed { zeta: SqueezeParameter },
}

impl SourceConfig {
    pub fn thermal(nbar_a: f64, nbar_b: f64) -> Result<Self> {
        for (name, v) in [("nbar_a", nbar_a), ("nbar_b", nbar_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, v, "must be finite and non-negative"));
            }
        }
        Ok(SourceConfig::Thermal { nbar_a, nbar_b })
    }

    pub fn squeezed(zeta: SqueezeParameter) -> Self {
        SourceConfig::Squeezed { zeta }
    }

    pub fn kind(&self) -> SourceKind {
        match self {
            SourceConfig::Thermal { .. } => SourceKind::Thermal,
            SourceConfig::Squeezed { .. } => SourceKind::Squeezed,
        }
    }
}

/// Per-photon detection efficiencies of the two detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    eta_a: f64,
    eta_b: f64,
}

impl DetectorConfig {
    pub const IDEAL: DetectorConfig = DetectorConfig {
        eta_a: 1.0,
        eta_b: 1.0,
    };

    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, v) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, v, "efficiency must lie in [0, 1]"));
            }
        }
        Ok(DetectorConfig { eta_a, eta_b })
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }

    pub fn is_ideal(&self) -> bool {
        self.eta_a == 1.0 && self.eta_b == 1.0
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig::IDEAL
    }
}

/// Photon counts registered in one flash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PairSample {
    pub n_a: u64,
    pub n_b: u64,
}

/// Geometric draw P(n) = (1 − r) rⁿ by inverse CDF, n = ⌊ln(1 − u) / ln r⌋.
fn sample_geometric<R: Rng + ?Sized>(ln_ratio: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    if ln_ratio == f64::NEG_INFINITY {
        return 0;
    }
    ((-u).ln_1p() / ln_ratio).floor() as u64
}

fn thermal_ln_ratio(nbar: f64) -> f64 {
    if nbar == 0.0 {
        f64::NEG_INFINITY
    } else {
        -(1.0 / nbar).ln_1p()
    }
}

/// One flash of a two-mode squeezed source: n ~ (1 − t²) t²ⁿ with
/// t = tanh ζ, registered identically at both detectors.
pub fn sample_squeezed_pair<R: Rng + ?Sized>(zeta: SqueezeParameter, rng: &mut R) -> PairSample {
    let n = sample_geometric(zeta.ln_geometric_ratio(), rng);
    PairSample { n_a: n, n_b: n }
}

/// One flash of two independent thermal modes.
pub fn sample_thermal_pair<R: Rng + ?Sized>(nbar_a: f64, nbar_b: f64, rng: &mut R) -> PairSample {
    let n_a = sample_geometric(thermal_ln_ratio(nbar_a), rng);
    let n_b = sample_geometric(thermal_ln_ratio(nbar_b), rng);
    PairSample { n_a, n_b }
}

fn thin<R: Rng + ?Sized>(n: u64, eta: f64, rng: &mut R) -> u64 {
    if n == 0 || eta == 1.0 {
        n
    } else if eta == 0.0 {
        0
    } else {
        Binomial::new(n, eta)
            .expect("efficiency validated in DetectorConfig")
            .sample(rng)
    }
}

/// Independent binomial thinning of each count with its detector's
/// efficiency.
pub fn apply_detector_loss<R: Rng + ?Sized>(
    sample: PairSample,
    det: &DetectorConfig,
    rng: &mut R,
) -> PairSample {
    PairSample {
        n_a: thin(sample.n_a, det.eta_a, rng),
        n_b: thin(sample.n_b, det.eta_b, rng),
    }
}

/// Draws source pairs with precomputed log-ratios.
#[derive(Debug, Clone, Copy)]
enum PairSampler {
    Thermal { ln_a: f64, ln_b: f64 },
    Squeezed { ln_ratio: f64 },
}

impl PairSampler {
    fn new(source: &SourceConfig) -> Self {
        match *source {
            SourceConfig::Thermal { nbar_a, nbar_b } => PairSampler::Thermal {
                ln_a: thermal_ln_ratio(nbar_a),
                ln_b: thermal_ln_ratio(nbar_b),
            },
            SourceConfig::Squeezed { zeta } => PairSampler::Squeezed {
                ln_ratio: zeta.ln_geometric_ratio(),
            },
        }
    }

    fn draw(&self, rng: &mut Stream) -> PairSample {
        match *self {
            PairSampler::Thermal { ln_a, ln_b } => PairSample {
                n_a: sample_geometric(ln_a, rng),
                n_b: sample_geometric(ln_b, rng),
            },
            PairSampler::Squeezed { ln_ratio } => {
                let n = sample_geometric(ln_ratio, rng);
                PairSample { n_a: n, n_b: n }
            }
        }
    }
}

/// Exact integer sums of counts, squares and cross products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Moments {
    n: u64,
    sa: u128,
    sb: u128,
    saa: u128,
    sbb: u128,
    sab: u128,
}

const MOMENT_OVERFLOW: Error = Error::Overflow("pair-count moments");

impl Moments {
    fn push(&mut self, s: PairSample) -> Result<()> {
        let a = s.n_a as u128;
        let b = s.n_b as u128;
        let add =
            |acc: u128, v: Option<u128>| v.and_then(|v| acc.checked_add(v)).ok_or(MOMENT_OVERFLOW);
        self.n += 1;
        self.sa = add(self.sa, Some(a))?;
        self.sb = add(self.sb, Some(b))?;
        self.saa = add(self.saa, a.checked_mul(a))?;
        self.sbb = add(self.sbb, b.checked_mul(b))?;
        self.sab = add(self.sab, a.checked_mul(b))?;
        Ok(())
    }

    fn merge(&mut self, o: &Moments) -> Result<()> {
        let add = |x: u128, y: u128| x.checked_add(y).ok_or(MOMENT_OVERFLOW);
        self.n += o.n;
        self.sa = add(self.sa, o.sa)?;
        self.sb = add(self.sb, o.sb)?;
        self.saa = add(self.saa, o.saa)?;
        self.sbb = add(self.sbb, o.sbb)?;
        self.sab = add(self.sab, o.sab)?;
        Ok(())
    }

    /// N Σxy − Σx Σy, exactly.
    fn centered(n: u64, sxy: u128, sx: u128, sy: u128) -> Result<i128> {
        let lhs = (n as u128).checked_mul(sxy).ok_or(MOMENT_OVERFLOW)?;
        let rhs = sx.checked_mul(sy).ok_or(MOMENT_OVERFLOW)?;
        let lhs = i128::try_from(lhs).map_err(|_| MOMENT_OVERFLOW)?;
        let rhs = i128::try_from(rhs).map_err(|_| MOMENT_OVERFLOW)?;
        Ok(lhs - rhs)
    }

    fn stats(&self) -> Result<SampleStats> {
        let n = self.n;
        let caa = Self::centered(n, self.saa, self.sa, self.sa)?;
        let cbb = Self::centered(n, self.sbb, self.sb, self.sb)?;
        let cab = Self::centered(n, self.sab, self.sa, self.sb)?;
        // N Σd² − (Σd)² for d = a − b, the same integer either way
        let cdd = caa
            .checked_add(cbb)
            .and_then(|v| v.checked_sub(cab.checked_mul(2)?))
            .ok_or(MOMENT_OVERFLOW)?;
        let nf = n as f64;
        let denom = nf * (nf - 1.0);
        Ok(SampleStats {
            mean_a: self.sa as f64 / nf,
            mean_b: self.sb as f64 / nf,
            var_a: caa as f64 / denom,
            var_b: cbb as f64 / denom,
            cov_ab: cab as f64 / denom,
            var_nab: cdd as f64 / denom,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct SampleStats {
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov_ab: f64,
    var_nab: f64,
}

/// Outcome of the discriminant test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Thermal,
    Squeezed,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Thermal => "thermal",
            Classification::Squeezed => "squeezed",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

/// Sample moments of a run together with both hypotheses' predictions for
/// Var(N_a − N_b) and the resulting classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub flashes: u64,
    pub batches: u64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
    /// Unbiased Var(n_a − n_b); equals var_a + var_b − 2 cov_ab exactly.
    pub var_nab: f64,
    /// Batch-means standard error of `var_nab`.
    pub var_nab_stderr: f64,
    /// Independent thermal modes at the observed (detected) means.
    pub prediction_thermal: f64,
    /// Squeezed pairs seen through the configured efficiencies.
    pub prediction_squeezed: f64,
    /// Squeezed pairs seen by ideal detectors (always zero).
    pub prediction_squeezed_ideal: f64,
    pub z_thermal: f64,
    pub z_squeezed: f64,
    pub classification: Classification,
    pub low_statistics: bool,
}

/// Var(n_a − n_b) for squeezed pairs of mean occupation `nbar` after
/// binomial thinning, by the law of total variance:
/// n̄[η_a(1−η_a) + η_b(1−η_b)] + (η_a − η_b)² n̄(n̄+1).
pub fn pair_variance_squeezed_lossy(nbar: f64, det: &DetectorConfig) -> f64 {
    let (ea, eb) = (det.eta_a, det.eta_b);
    nbar * (ea * (1.0 - ea) + eb * (1.0 - eb)) + (ea - eb).powi(2) * nbar * (nbar + 1.0)
}

fn z_score(observed: f64, predicted: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        (observed - predicted) / stderr
    } else if observed == predicted {
        0.0
    } else {
        (observed - predicted).signum() * f64::INFINITY
    }
}

/// Apply the 3σ rule: a hypothesis is retained when |z| < 3 and the other
/// is excluded.
pub fn classify(report: &CorrelationReport) -> Result<Classification> {
    let se = report.var_nab_stderr;
    if !se.is_finite() || se < 0.0 {
        return Err(Error::Degenerate(format!(
            "standard error {se} is not usable"
        )));
    }
    if se == 0.0
        && report.var_nab != report.prediction_thermal
        && report.var_nab != report.prediction_squeezed
    {
        return Err(Error::Degenerate(
            "zero standard error and the estimate matches neither prediction".into(),
        ));
    }
    let zt = z_score(report.var_nab, report.prediction_thermal, se).abs();
    let zs = z_score(report.var_nab, report.prediction_squeezed, se).abs();
    Ok(if zs < Z_THRESHOLD && zt >= Z_THRESHOLD {
        Classification::Squeezed
    } else if zt < Z_THRESHOLD && zs >= Z_THRESHOLD {
        Classification::Thermal
    } else {
        Classification::Inconclusive
    })
}

fn batch_count(flashes: u64) -> u64 {
    DEFAULT_BATCHES.min(flashes / 2).max(1)
}

#[inline]
fn batch_of(index: u64, flashes: u64, batches: u64) -> usize {
    ((index as u128 * batches as u128) / flashes as u128) as usize
}

fn build_report(per_batch: &[Moments], det: &DetectorConfig) -> Result<CorrelationReport> {
    let mut total = Moments::default();
    for m in per_batch {
        total.merge(m)?;
    }
    let flashes = total.n;
    let stats = total.stats()?;

    let batches = per_batch.len() as u64;
    let var_nab_stderr = if batches >= 2 {
        let values = per_batch
            .iter()
            .map(|m| m.stats().map(|s| s.var_nab))
            .collect::<Result<Vec<_>>>()?;
        let b = values.len() as f64;
        let mean = values.iter().sum::<f64>() / b;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    } else {
        f64::NAN
    };

    let prediction_thermal = pair_variance_thermal(stats.mean_a, stats.mean_b)?.value;
    let eta_sum = det.eta_a + det.eta_b;
    let prediction_squeezed = if eta_sum > 0.0 {
        let nbar = (stats.mean_a + stats.mean_b) / eta_sum;
        pair_variance_squeezed_lossy(nbar, det)
    } else {
        0.0
    };

    let mut report = CorrelationReport {
        flashes,
        batches,
        eta_a: det.eta_a,
        eta_b: det.eta_b,
        mean_a: stats.mean_a,
        mean_b: stats.mean_b,
        var_a: stats.var_a,
        var_b: stats.var_b,
        cov_ab: stats.cov_ab,
        var_nab: stats.var_nab,
        var_nab_stderr,
        prediction_thermal,
        prediction_squeezed,
        prediction_squeezed_ideal: 0.0,
        z_thermal: z_score(stats.var_nab, prediction_thermal, var_nab_stderr),
        z_squeezed: z_score(stats.var_nab, prediction_squeezed, var_nab_stderr),
        classification: Classification::Inconclusive,
        low_statistics: flashes < LOW_STATISTICS_FLASHES,
    };
    report.classification = classify(&report).unwrap_or(Classification::Inconclusive);
    Ok(report)
}

fn check_flashes(flashes: u64) -> Result<()> {
    if flashes < 2 {
        return Err(invalid(
            "flashes",
            flashes as f64,
            "need at least two flashes for a sample variance",
        ));
    }
    Ok(())
}

struct ChunkOutput {
    moments: Vec<(usize, Moments)>,
    events: Vec<PairSample>,
}

fn run_chunk(
    sampler: PairSampler,
    det: &DetectorConfig,
    flashes: u64,
    batches: u64,
    seed: u64,
    chunk: usize,
    keep_events: bool,
) -> Result<ChunkOutput> {
    let start = (chunk * CHUNK_SIZE) as u64;
    let end = (start + CHUNK_SIZE as u64).min(flashes);
    let mut rng = substream(seed, chunk as u64);
    let mut moments: Vec<(usize, Moments)> = Vec::new();
    let mut events = Vec::with_capacity(if keep_events {
        (end - start) as usize
    } else {
        0
    });
    for i in start..end {
        let raw = sampler.draw(&mut rng);
        let s = apply_detector_loss(raw, det, &mut rng);
        let b = batch_of(i, flashes, batches);
        match moments.last_mut() {
            Some((last, m)) if *last == b => m.push(s)?,
            _ => {
                let mut m = Moments::default();
                m.push(s)?;
                moments.push((b, m));
            }
        }
        if keep_events {
            events.push(s);
        }
    }
    Ok(ChunkOutput { moments, events })
}

fn ensemble(
    source: &SourceConfig,
    det: &DetectorConfig,
    flashes: u64,
    seed: u64,
    keep_events: bool,
) -> Result<(CorrelationReport, Vec<PairSample>)> {
    check_flashes(flashes)?;
    let batches = batch_count(flashes);
    let sampler = PairSampler::new(source);
    let chunks = (0..chunk_count(flashes as usize))
        .into_par_iter()
        .map(|c| run_chunk(sampler, det, flashes, batches, seed, c, keep_events))
        .collect::<Result<Vec<_>>>()?;

    let mut per_batch = vec![Moments::default(); batches as usize];
    let mut events = Vec::with_capacity(if keep_events { flashes as usize } else { 0 });
    for chunk in chunks {
        for (b, m) in &chunk.moments {
            per_batch[*b].merge(m)?;
        }
        events.extend(chunk.events);
    }
    Ok((build_report(&per_batch, det)?, events))
}

/// Simulate `flashes` flashes and summarize them.
pub fn run_ensemble(
    source: &SourceConfig,
    det: &DetectorConfig,
    flashes: u64,
    seed: u64,
) -> Result<CorrelationReport> {
    ensemble(source, det, flashes, seed, false).map(|(r, _)| r)
}

/// As [`run_ensemble`], also returning every flash's counts in order.
pub fn run_ensemble_with_events(
    source: &SourceConfig,
    det: &DetectorConfig,
    flashes: u64,
    seed: u64,
) -> Result<(CorrelationReport, Vec<PairSample>)> {
    ensemble(source, det, flashes, seed, true)
}

/// Summarize recorded counts, e.g. an event dump. `det` only enters the
/// loss-corrected squeezed prediction. Identical counts give a report
/// identical to the one produced when they were simulated.
pub fn analyze_samples(samples: &[PairSample], det: &DetectorConfig) -> Result<CorrelationReport> {
    let flashes = samples.len() as u64;
    check_flashes(flashes)?;
    let batches = batch_count(flashes);
    let mut per_batch = vec![Moments::default(); batches as usize];
    for (i, s) in samples.iter().enumerate() {
        per_batch[batch_of(i as u64, flashes, batches)].push(*s)?;
    }
    build_report(&per_batch, det)
}
