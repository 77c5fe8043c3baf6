//! Repeated stochastic cycles and their statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StatsError};
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub cycles: usize,
    pub master_seed: u64,
    /// Worker count hint; `0` means machine parallelism.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            cycles: 1000,
            master_seed: 42,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Write access voltage, V.
    pub wav: f64,
    pub success: bool,
    /// Write energy, J.
    pub energy: f64,
}

/// Run `experiment(cycle, key)` for every cycle. Cycle `i` always receives
/// `StreamKey::root(master_seed).child(i)`, so results are independent of the
/// worker count. The lowest-index failure aborts the run.
pub fn run_cycles<F>(experiment: F, mc: &McConfig) -> Result<Vec<CycleRecord>>
where
    F: Fn(usize, StreamKey) -> Result<CycleRecord> + Sync,
{
    if mc.cycles == 0 {
        return Err(Error::experiment("cycles must be >= 1"));
    }
    let root = StreamKey::root(mc.master_seed);
    let run_one = |i: usize| {
        experiment(i, root.child(i as u64)).map_err(|e| Error::Cycle {
            cycle: i,
            source: Box::new(e),
        })
    };
    let results: Vec<Result<CycleRecord>> = if mc.workers == 1 {
        (0..mc.cycles).map(run_one).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if mc.workers > 0 {
            builder = builder.num_threads(mc.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::experiment(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..mc.cycles).into_par_iter().map(run_one).collect())
    };
    results.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p1: f64,
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
    pub p99: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// `sd / mean`.
    pub vc: f64,
    pub min: f64,
    pub max: f64,
    pub percentiles: Percentiles,
}

/// Linear interpolation between order statistics at `h = (n−1)·q`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<StatSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let constant = sorted[0] == sorted[n - 1];
    let mean = if constant { sorted[0] } else { values.iter().sum::<f64>() / n as f64 };
    let sd = if n > 1 && !constant {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let vc = if mean != 0.0 { (sd / mean).abs() } else { 0.0 };
    let q = |p| quantile(&sorted, p);
    let percentiles = Percentiles {
        p1: q(0.01),
        p5: q(0.05),
        p25: q(0.25),
        p50: q(0.5),
        p75: q(0.75),
        p95: q(0.95),
        p99: q(0.99),
    };
    Ok(StatSummary {
        count: n,
        mean,
        median: percentiles.p50,
        sd,
        vc,
        min: sorted[0],
        max: sorted[n - 1],
        percentiles,
    })
}

/// Fraction of failed writes.
pub fn wfp(records: &[CycleRecord]) -> Result<f64, StatsError> {
    if records.is_empty() {
        return Err(StatsError::Empty);
    }
    let failed = records.iter().filter(|r| !r.success).count();
    Ok(failed as f64 / records.len() as f64)
}

pub fn mean_energy(records: &[CycleRecord]) -> Result<f64, StatsError> {
    if records.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(records.iter().map(|r| r.energy).sum::<f64>() / records.len() as f64)
}

/// Effective energy per successful write: mean energy / (1 − WFP).
pub fn eec(records: &[CycleRecord]) -> Result<f64, StatsError> {
    let p = wfp(records)?;
    if p >= 1.0 {
        return Err(StatsError::UndefinedEec);
    }
    Ok(mean_energy(records)? / (1.0 - p))
}

/// Write records as `cycle,wav_V,success,energy_J`.
pub fn write_records_csv<W: std::io::Write>(records: &[CycleRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cycle", "wav_V", "success", "energy_J"])?;
    for r in records {
        w.write_record([
            r.cycle.to_string(),
            format!("{:e}", r.wav),
            r.success.to_string(),
            format!("{:e}", r.energy),
        ])?;
    }
    w.flush()
}
