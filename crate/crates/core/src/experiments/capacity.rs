//! Largest square array meeting a WFP target, and its net capacity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{num, worst_case_records, Provenance, Scenario};
use crate::array::{ArrayConfig, Topology};
use crate::error::{Error, Result};
use crate::monte_carlo::{wfp, McConfig};

/// Screening grid `min_size·ratio^k` up to `max_size`, then bisection down
/// to `resolution` between the last passing and first failing size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacitySearch {
    pub min_size: usize,
    pub max_size: usize,
    pub grid_ratio: f64,
    pub resolution: usize,
}

impl Default for CapacitySearch {
    fn default() -> Self {
        CapacitySearch {
            min_size: 16,
            max_size: 512,
            grid_ratio: 2.0,
            resolution: 1,
        }
    }
}

impl CapacitySearch {
    fn grid(&self) -> Vec<usize> {
        let mut g = vec![self.min_size];
        loop {
            let last = *g.last().unwrap();
            if last >= self.max_size {
                break;
            }
            let next = ((last as f64 * self.grid_ratio).round() as usize).max(last + 1);
            g.push(next.min(self.max_size));
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityProbe {
    pub size: usize,
    pub wfp: f64,
    pub net_capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub topology: String,
    pub scheme_n: u32,
    pub target_wfp: f64,
    pub size: usize,
    pub net_capacity: usize,
    pub wfp: f64,
    /// Every evaluated size, in evaluation order.
    pub probes: Vec<CapacityProbe>,
    pub provenance: Provenance,
}

/// Largest `n` such that an `n×n` array of `topology` has `wfp <= target`.
/// Assumes WFP grows with size and checks every pair of probes against
/// that, allowing `3·sqrt(wfp/cycles)` of sampling noise.
#[allow(clippy::too_many_arguments)]
pub fn exp_net_capacity(
    scn: &Scenario,
    topology: Topology,
    scheme_n: u32,
    target_wfp: f64,
    v_dd: f64,
    search: &CapacitySearch,
    mc: &McConfig,
) -> Result<CapacityResult> {
    if !(0.0..=1.0).contains(&target_wfp) {
        return Err(Error::experiment("target wfp must lie in [0, 1]"));
    }
    if search.min_size == 0 || search.max_size < search.min_size || !(search.grid_ratio > 1.0) || search.resolution == 0 {
        return Err(Error::experiment(
            "capacity search needs 1 <= min_size <= max_size, grid_ratio > 1 and resolution >= 1",
        ));
    }
    if let Topology::Psa { period } = topology {
        if search.min_size < period {
            return Err(Error::experiment("capacity search min_size must be >= the PSA period"));
        }
    }
    let cfg = |n: usize| ArrayConfig {
        topology,
        ..scn.array.with_size(n)
    };
    let cycles = mc.cycles as f64;
    let mut probes: Vec<CapacityProbe> = Vec::new();
    let mut probe = |n: usize| -> Result<CapacityProbe> {
        let s = Scenario { array: cfg(n), ..*scn };
        let p = CapacityProbe {
            size: n,
            wfp: wfp(&worst_case_records(&s, scheme_n, v_dd, mc)?)?,
            net_capacity: s.array.net_capacity(),
        };
        for q in &probes {
            let (small, large) = if q.size < n { (q, &p) } else { (&p, q) };
            if small.wfp - large.wfp > 3.0 * (small.wfp / cycles).sqrt() {
                return Err(Error::experiment(format!(
                    "wfp is not monotone in size: {} at n={} but {} at n={}",
                    small.wfp, small.size, large.wfp, large.size
                )));
            }
        }
        probes.push(p);
        Ok(p)
    };

    let mut best: Option<CapacityProbe> = None;
    let mut fail_at = None;
    for n in search.grid() {
        let p = probe(n)?;
        if p.wfp <= target_wfp {
            best = Some(p);
        } else {
            fail_at = Some(n);
            break;
        }
    }
    let Some(mut lo) = best else {
        return Err(Error::experiment(format!(
            "target wfp {target_wfp} unreachable: smallest size {} already fails",
            search.min_size
        )));
    };
    if let Some(mut hi) = fail_at {
        while hi - lo.size > search.resolution {
            let mid = lo.size + (hi - lo.size) / 2;
            let p = probe(mid)?;
            if p.wfp <= target_wfp {
                lo = p;
            } else {
                hi = mid;
            }
        }
    }
    Ok(CapacityResult {
        topology: topology.label(),
        scheme_n,
        target_wfp,
        size: lo.size,
        net_capacity: lo.net_capacity,
        wfp: lo.wfp,
        probes,
        provenance: Provenance::of_inputs(&(scn, topology, scheme_n, target_wfp, v_dd, search, mc.cycles), mc.master_seed),
    })
}

/// One row per probe of every search; `selected` marks each result size.
pub fn write_capacity_csv<W: Write>(results: &[CapacityResult], provenance: &Provenance, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} experiment=capacity", provenance.comment_line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topology", "scheme_n", "target_wfp", "size", "net_capacity", "wfp", "selected"])?;
    for r in results {
        for p in &r.probes {
            w.write_record([
                r.topology.clone(),
                r.scheme_n.to_string(),
                num(r.target_wfp),
                p.size.to_string(),
                p.net_capacity.to_string(),
                num(p.wfp),
                (p.size == r.size).to_string(),
            ])?;
        }
    }
    w.flush()
}
