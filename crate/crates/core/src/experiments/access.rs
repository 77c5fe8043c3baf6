//! Random-access write traces and data-sparsity studies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{num, Provenance, Scenario, SweepPoint, SweepResult};
use crate::array::{build_netlist, random_pattern, BiasSpec, Cell};
use crate::device::{switching_outcome, DeviceModel, DeviceModelParams, IvMode, StateLabel, WriteOp};
use crate::error::{Error, Result};
use crate::monte_carlo::summarize;
use crate::rng::StreamKey;
use crate::solver::{solve_netlist, solve_prepared, stamp, total_energy, wav};

/// Address sequence `(stride·x, stride·y)` for `x, y ∈ 1..=count`, with `y`
/// varying fastest. Addresses are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPlan {
    pub stride: usize,
    pub count: usize,
}

impl Default for AccessPlan {
    fn default() -> Self {
        AccessPlan { stride: 8, count: 32 }
    }
}

impl AccessPlan {
    pub fn len(&self) -> usize {
        self.count * self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// 1-based `(row, col)` of access `k`.
    pub fn address(&self, k: usize) -> (usize, usize) {
        let x = k / self.count + 1;
        let y = k % self.count + 1;
        (self.stride * x, self.stride * y)
    }

    pub fn addresses(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(|k| self.address(k))
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.stride == 0 || self.count == 0 {
            return Err(Error::experiment("access plan needs stride >= 1 and count >= 1"));
        }
        if self.stride * self.count > rows || self.stride * self.count > cols {
            return Err(Error::experiment(format!(
                "access plan reaches ({0}, {0}) outside the {rows}x{cols} array",
                self.stride * self.count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Access {
    pub index: usize,
    /// 1-based.
    pub row: usize,
    /// 1-based.
    pub col: usize,
    pub wav: f64,
    pub success: bool,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessTrace {
    pub sparsity: f64,
    pub scheme_n: u32,
    pub v_dd: f64,
    pub with_d2d: bool,
    pub accesses: Vec<Access>,
    pub provenance: Provenance,
}

impl AccessTrace {
    /// Mean WAV over the accesses in 1-based row `row`.
    pub fn mean_wav_in_row(&self, row: usize) -> Option<f64> {
        let v: Vec<f64> = self.accesses.iter().filter(|a| a.row == row).map(|a| a.wav).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.accesses.iter().map(|a| a.energy).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} experiment=random-access sparsity={}",
            self.provenance.comment_line(),
            num(self.sparsity)
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["access", "row", "col", "wav_V", "success", "energy_J"])?;
        for a in &self.accesses {
            w.write_record([
                a.index.to_string(),
                a.row.to_string(),
                a.col.to_string(),
                num(a.wav),
                a.success.to_string(),
                num(a.energy),
            ])?;
        }
        w.flush()
    }

    /// `row,col,energy_J` per access.
    pub fn write_energy_map<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "energy_J"])?;
        for a in &self.accesses {
            w.write_record([a.row.to_string(), a.col.to_string(), num(a.energy)])?;
        }
        w.flush()
    }
}

/// A sequence of SET attempts on a random data pattern. The pattern and its
/// resistances are drawn once; a successful SET leaves the addressed cell in
/// LRS with a freshly drawn resistance for the later accesses.
pub fn exp_random_access(
    scn: &Scenario,
    sparsity: f64,
    plan: &AccessPlan,
    scheme_n: u32,
    v_dd: f64,
    with_d2d: bool,
    master_seed: u64,
) -> Result<AccessTrace> {
    scn.array.validate()?;
    plan.validate(scn.array.rows, scn.array.cols)?;
    if scheme_n < 2 {
        return Err(Error::experiment("bias scheme n must be >= 2"));
    }
    let device: DeviceModelParams = if with_d2d { scn.device } else { scn.device.nominal() };
    let model = DeviceModel::new(device)?;
    let root = StreamKey::root(master_seed);
    let pattern = random_pattern(&scn.array, sparsity, &mut root.child(0).rng())?;
    let bias_for = |(r, c): (usize, usize)| BiasSpec {
        scheme_n,
        v_dd,
        selected: Cell::new(r - 1, c - 1),
        polarity: WriteOp::Set,
    };
    let mut net = build_netlist(&scn.array, &pattern, &model, root.child(1), &bias_for(plan.address(0)))?;
    let resample = root.child(2);
    // Linear devices keep the conductance matrix across accesses: only the
    // source terms and resampled cells change.
    let mut system = match device.iv_mode {
        IvMode::Linear => Some(stamp(&net)?),
        IvMode::Sinh { .. } => None,
    };
    let mut guess: Option<Vec<f64>> = None;
    let mut accesses = Vec::with_capacity(plan.len());
    for (index, addr) in plan.addresses().enumerate() {
        let bias = bias_for(addr);
        net.set_bias(bias)?;
        let sol = match system.as_mut() {
            Some(sys) => {
                sys.refresh_sources(&net);
                let (sol, x) = solve_prepared(&net, &device, sys, &scn.solve, guess.as_deref())?;
                guess = Some(x);
                sol
            }
            None => solve_netlist(&net, &device, &scn.solve)?,
        };
        let v = wav(&sol, bias.selected);
        let success = switching_outcome(v, WriteOp::Set, &device);
        accesses.push(Access {
            index,
            row: addr.0,
            col: addr.1,
            wav: v,
            success,
            energy: total_energy(&sol, device.t_pulse, scn.include_wire_cap, &net),
        });
        if success {
            let cell = model.sample_cell(StateLabel::Lrs, &mut resample.child(index as u64).rng());
            if let Some(sys) = system.as_mut() {
                let old = net.cell(bias.selected).resistance;
                sys.update_device(&net, bias.selected, 1.0 / cell.resistance - 1.0 / old);
            }
            net.set_cell(bias.selected, cell);
        }
    }
    Ok(AccessTrace {
        sparsity,
        scheme_n,
        v_dd,
        with_d2d,
        accesses,
        provenance: Provenance::of_inputs(&(scn, sparsity, plan, scheme_n, v_dd, with_d2d), master_seed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityResult {
    pub sweep: SweepResult,
    pub traces: Vec<AccessTrace>,
}

impl SparsityResult {
    /// Median access energy at sparsity `hi` over that at `lo`.
    pub fn energy_ratio(&self, hi: f64, lo: f64) -> Option<f64> {
        let med = |s: f64| {
            self.sweep
                .points
                .iter()
                .find(|p| p.axis_value == s)
                .and_then(|p| p.energy.map(|e| e.median))
        };
        Some(med(hi)? / med(lo)?)
    }
}

/// One random-access trace per sparsity (fraction of LRS cells), all from
/// the same master seed. Runs the sparsity points on `workers` threads.
#[allow(clippy::too_many_arguments)]
pub fn exp_sparsity(
    scn: &Scenario,
    sparsities: &[f64],
    plan: &AccessPlan,
    scheme_n: u32,
    v_dd: f64,
    with_d2d: bool,
    master_seed: u64,
    workers: usize,
) -> Result<SparsityResult> {
    if sparsities.is_empty() {
        return Err(Error::experiment("sparsity sweep needs at least one point"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::experiment(format!("cannot start worker pool: {e}")))?;
    let traces: Vec<AccessTrace> = pool.install(|| {
        sparsities
            .par_iter()
            .map(|&s| exp_random_access(scn, s, plan, scheme_n, v_dd, with_d2d, master_seed))
            .collect::<Result<_>>()
    })?;
    let mut points = Vec::new();
    for t in &traces {
        let mut p = SweepPoint::new(t.sparsity, scheme_n, t.accesses.len());
        p.wav = Some(summarize(&t.accesses.iter().map(|a| a.wav).collect::<Vec<_>>())?);
        p.energy = Some(summarize(&t.energies())?);
        let failed = t.accesses.iter().filter(|a| !a.success).count();
        p.wfp = Some(failed as f64 / t.accesses.len() as f64);
        points.push(p);
    }
    Ok(SparsityResult {
        sweep: SweepResult {
            experiment: "sparsity".into(),
            axis: "sparsity".into(),
            points,
            provenance: Provenance::of_inputs(&(scn, sparsities, plan, scheme_n, v_dd, with_d2d), master_seed),
        },
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayConfig;

    #[test]
    fn plan_addresses() {
        let plan = AccessPlan::default();
        let a: Vec<_> = plan.addresses().collect();
        assert_eq!(a.len(), 1024);
        assert_eq!(a[0], (8, 8));
        assert_eq!(a[1], (8, 16));
        assert_eq!(a[32], (16, 8));
        assert_eq!(a[1023], (256, 256));
        assert!(plan.validate(255, 256).is_err());
        assert!(plan.validate(256, 256).is_ok());
    }

    #[test]
    fn small_trace_shape_and_determinism() {
        let scn = Scenario {
            array: ArrayConfig::square(16),
            ..Scenario::default()
        };
        let plan = AccessPlan { stride: 4, count: 4 };
        let a = exp_random_access(&scn, 0.5, &plan, 2, 2.6, true, 9).unwrap();
        let b = exp_random_access(&scn, 0.5, &plan, 2, 2.6, true, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.accesses.len(), 16);
        assert_eq!((a.accesses[15].row, a.accesses[15].col), (16, 16));
        let mut map = Vec::new();
        a.write_energy_map(&mut map).unwrap();
        assert_eq!(String::from_utf8(map).unwrap().lines().count(), 17);
    }

    #[test]
    fn sparsity_sweep_is_worker_independent() {
        let scn = Scenario {
            array: ArrayConfig::square(8),
            ..Scenario::default()
        };
        let plan = AccessPlan { stride: 2, count: 4 };
        let one = exp_sparsity(&scn, &[0.0, 0.5, 1.0], &plan, 2, 2.6, true, 3, 1).unwrap();
        let many = exp_sparsity(&scn, &[0.0, 0.5, 1.0], &plan, 2, 2.6, true, 3, 4).unwrap();
        assert_eq!(one, many);
        let med: Vec<f64> = one.sweep.points.iter().map(|p| p.wav.unwrap().median).collect();
        assert!(med[0] >= med[1] && med[1] >= med[2]);
    }
}
