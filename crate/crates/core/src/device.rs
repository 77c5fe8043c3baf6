//! Monte Carlo compact model of a single RRAM cell.
//!
//! A cell's small-signal resistance is drawn from a Gaussian centred on the
//! state median, truncated by re-draw to `median ± trunc_sigma·sd` and clamped
//! to `r_floor`. In structural mode the draw is made for a Monte Carlo
//! resistor that is composed with a deterministic filament resistor: in
//! parallel for LRS (filament width), in series for HRS (gap length).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Stored state of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    /// Low resistance, bit '1'.
    Lrs,
    /// High resistance, bit '0'.
    Hrs,
    /// Pristine pre-forming cell. Only created by topology initialization.
    Insulating,
}

impl StateLabel {
    pub fn as_char(self) -> char {
        match self {
            StateLabel::Lrs => '1',
            StateLabel::Hrs => '0',
            StateLabel::Insulating => 'X',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '1' => Some(StateLabel::Lrs),
            '0' => Some(StateLabel::Hrs),
            'X' | 'x' => Some(StateLabel::Insulating),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IvMode {
    Linear,
    /// `I = (v0/R)·sinh(v/v0)`; the slope at zero bias is `1/R`.
    Sinh {
        #[serde(rename = "v0_v")]
        v0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplingMode {
    Direct,
    Structural { split_factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOp {
    Set,
    Reset,
}

/// Calibration of the device model. Units: Ω, V, s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceModelParams {
    pub r_lrs_median: f64,
    pub r_lrs_sd: f64,
    pub r_hrs_median: f64,
    pub r_hrs_sd: f64,
    pub r_insulating: f64,
    pub v_set: f64,
    pub v_reset: f64,
    pub t_pulse: f64,
    pub iv_mode: IvMode,
    pub sampling_mode: SamplingMode,
    pub r_floor: f64,
    pub trunc_sigma: f64,
}

impl Default for DeviceModelParams {
    /// Reference calibration for desk-scale studies. These are not fitted
    /// device values; see the README for how they were chosen.
    fn default() -> Self {
        let r_lrs_median = 92e3;
        let r_hrs_median = 10e6;
        DeviceModelParams {
            r_lrs_median,
            r_lrs_sd: 0.15 * r_lrs_median,
            r_hrs_median,
            r_hrs_sd: 0.25 * r_hrs_median,
            r_insulating: 100.0 * r_hrs_median,
            v_set: 2.0,
            v_reset: 2.0,
            t_pulse: 50e-9,
            iv_mode: IvMode::Linear,
            sampling_mode: SamplingMode::Direct,
            r_floor: 1e3,
            trunc_sigma: 3.0,
        }
    }
}

impl DeviceModelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            self.r_lrs_median,
            self.r_lrs_sd,
            self.r_hrs_median,
            self.r_hrs_sd,
            self.r_insulating,
            self.v_set,
            self.v_reset,
            self.t_pulse,
            self.r_floor,
            self.trunc_sigma,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invariant("device parameters must be finite"));
        }
        if !(0.0 < self.r_floor
            && self.r_floor < self.r_lrs_median
            && self.r_lrs_median < self.r_hrs_median
            && self.r_hrs_median < self.r_insulating)
        {
            return Err(ConfigError::invariant(
                "resistance ordering 0 < r_floor < r_lrs_median < r_hrs_median < r_insulating violated",
            ));
        }
        if self.r_insulating < 10.0 * self.r_hrs_median {
            return Err(ConfigError::invariant(
                "r_insulating must be at least 10 x r_hrs_median",
            ));
        }
        if self.r_lrs_sd < 0.0 || self.r_hrs_sd < 0.0 {
            return Err(ConfigError::invariant("resistance SDs must be non-negative"));
        }
        if self.v_set <= 0.0 || self.v_reset <= 0.0 || self.t_pulse <= 0.0 {
            return Err(ConfigError::invariant(
                "v_set, v_reset and t_pulse must be positive",
            ));
        }
        if self.trunc_sigma <= 0.0 {
            return Err(ConfigError::invariant("trunc_sigma must be positive"));
        }
        if let IvMode::Sinh { v0 } = self.iv_mode {
            if !(v0 > 0.0 && v0.is_finite()) {
                return Err(ConfigError::invariant("sinh v0 must be positive"));
            }
        }
        if let SamplingMode::Structural { split_factor } = self.sampling_mode {
            if !(split_factor > 1.0 && split_factor.is_finite()) {
                return Err(ConfigError::invariant(
                    "structural split factor must be greater than 1",
                ));
            }
        }
        Ok(())
    }

    pub fn median(&self, state: StateLabel) -> f64 {
        match state {
            StateLabel::Lrs => self.r_lrs_median,
            StateLabel::Hrs => self.r_hrs_median,
            StateLabel::Insulating => self.r_insulating,
        }
    }

    pub fn sd(&self, state: StateLabel) -> f64 {
        match state {
            StateLabel::Lrs => self.r_lrs_sd,
            StateLabel::Hrs => self.r_hrs_sd,
            StateLabel::Insulating => 0.0,
        }
    }

    /// Same calibration with every resistance SD zeroed.
    pub fn nominal(&self) -> Self {
        DeviceModelParams {
            r_lrs_sd: 0.0,
            r_hrs_sd: 0.0,
            ..*self
        }
    }
}

/// Warning raised when a variation coefficient is large enough that the
/// truncation band reaches below zero and the floor clamp shapes the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationWarning(pub String);

/// Set `sd = vc × median` for one state, leaving the median fixed.
pub fn calibrate_vc(
    params: &DeviceModelParams,
    vc: f64,
    state: StateLabel,
) -> Result<(DeviceModelParams, Option<CalibrationWarning>), ConfigError> {
    if !(vc >= 0.0 && vc.is_finite()) {
        return Err(ConfigError::invariant("variation coefficient must be >= 0"));
    }
    let mut out = *params;
    match state {
        StateLabel::Lrs => out.r_lrs_sd = vc * out.r_lrs_median,
        StateLabel::Hrs => out.r_hrs_sd = vc * out.r_hrs_median,
        StateLabel::Insulating => {
            return Err(ConfigError::invariant(
                "insulating cells have no variation to calibrate",
            ))
        }
    }
    let warning = (vc * params.trunc_sigma > 1.0).then(|| {
        CalibrationWarning(format!(
            "vc {vc} exceeds 1/trunc_sigma; the r_floor clamp dominates the lower tail"
        ))
    });
    Ok((out, warning))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledCell {
    pub state: StateLabel,
    /// Small-signal resistance at zero bias, Ω.
    pub resistance: f64,
}

/// Composite resistance of the deterministic filament part and the MC
/// resistor. Returns `None` for insulating cells, which have no composite
/// structure.
pub fn structural_compose(r_det: f64, r_mc: f64, state: StateLabel) -> Option<f64> {
    match state {
        StateLabel::Lrs => Some(r_det * r_mc / (r_det + r_mc)),
        StateLabel::Hrs => Some(r_det + r_mc),
        StateLabel::Insulating => None,
    }
}

/// Parameters of the Monte Carlo resistor for one state in structural mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralPart {
    pub r_det: f64,
    pub mc_median: f64,
    pub mc_sd: f64,
}

impl StructuralPart {
    fn compose(&self, r_mc: f64, state: StateLabel) -> f64 {
        structural_compose(self.r_det, r_mc, state).unwrap_or(r_mc)
    }
}

/// Validated device model, with structural calibration resolved.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    params: DeviceModelParams,
    structural: Option<[StructuralPart; 2]>,
}

impl DeviceModel {
    pub fn new(params: DeviceModelParams) -> Result<Self, ConfigError> {
        params.validate()?;
        let structural = match params.sampling_mode {
            SamplingMode::Direct => None,
            SamplingMode::Structural { split_factor } => Some([
                calibrate_structural(&params, StateLabel::Lrs, split_factor)?,
                calibrate_structural(&params, StateLabel::Hrs, split_factor)?,
            ]),
        };
        Ok(DeviceModel { params, structural })
    }

    pub fn params(&self) -> &DeviceModelParams {
        &self.params
    }

    pub fn structural_part(&self, state: StateLabel) -> Option<StructuralPart> {
        let parts = self.structural?;
        match state {
            StateLabel::Lrs => Some(parts[0]),
            StateLabel::Hrs => Some(parts[1]),
            StateLabel::Insulating => None,
        }
    }

    /// Draw a small-signal resistance for `state`.
    pub fn sample_resistance<R: Rng + ?Sized>(&self, state: StateLabel, rng: &mut R) -> f64 {
        let p = &self.params;
        if state == StateLabel::Insulating {
            return p.r_insulating;
        }
        match self.structural_part(state) {
            None => truncated_draw(p.median(state), p.sd(state), p.trunc_sigma, p.r_floor, rng),
            Some(part) => {
                let r_mc = truncated_draw(part.mc_median, part.mc_sd, p.trunc_sigma, p.r_floor, rng);
                part.compose(r_mc, state).max(p.r_floor)
            }
        }
    }

    pub fn sample_cell<R: Rng + ?Sized>(&self, state: StateLabel, rng: &mut R) -> SampledCell {
        SampledCell {
            state,
            resistance: self.sample_resistance(state, rng),
        }
    }

    pub fn current(&self, cell: &SampledCell, v: f64) -> f64 {
        device_current(cell, v, &self.params)
    }

    pub fn conductance(&self, cell: &SampledCell, v: f64) -> f64 {
        device_conductance(cell, v, &self.params)
    }
}

fn truncated_draw<R: Rng + ?Sized>(median: f64, sd: f64, trunc: f64, floor: f64, rng: &mut R) -> f64 {
    if sd == 0.0 {
        return median.max(floor);
    }
    let z = loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= trunc {
            break z;
        }
    };
    (median + sd * z).max(floor)
}

/// Device current for a branch voltage `v` (positive from word line to bit line).
pub fn device_current(cell: &SampledCell, v: f64, params: &DeviceModelParams) -> f64 {
    match params.iv_mode {
        IvMode::Linear => v / cell.resistance,
        IvMode::Sinh { v0 } => v0 / cell.resistance * (v / v0).sinh(),
    }
}

/// `dI/dv` at `v`.
pub fn device_conductance(cell: &SampledCell, v: f64, params: &DeviceModelParams) -> f64 {
    match params.iv_mode {
        IvMode::Linear => 1.0 / cell.resistance,
        IvMode::Sinh { v0 } => (v / v0).cosh() / cell.resistance,
    }
}

/// Static write criterion: success iff the access voltage reaches the
/// switching threshold (inclusive).
pub fn switching_outcome(wav: f64, op: WriteOp, params: &DeviceModelParams) -> bool {
    match op {
        WriteOp::Set => wav >= params.v_set,
        WriteOp::Reset => wav.abs() >= params.v_reset,
    }
}

/// Mean and SD of `f(z)` for `z` standard normal truncated to `[-t, t]`,
/// by composite Simpson quadrature.
fn truncated_moments(t: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INTERVALS: usize = 4000;
    let h = 2.0 * t / INTERVALS as f64;
    let (mut w_sum, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for k in 0..=INTERVALS {
        let z = -t + k as f64 * h;
        let weight = if k == 0 || k == INTERVALS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = weight * (-0.5 * z * z).exp();
        let y = f(z);
        w_sum += w;
        m1 += w * y;
        m2 += w * y * y;
    }
    let mean = m1 / w_sum;
    let var = (m2 / w_sum - mean * mean).max(0.0);
    (mean, var.sqrt())
}

fn calibrate_structural(
    params: &DeviceModelParams,
    state: StateLabel,
    c: f64,
) -> Result<StructuralPart, ConfigError> {
    let median = params.median(state);
    let target_sd = params.sd(state);
    let (r_det, mc_median) = match state {
        StateLabel::Lrs => (c * median, c * median / (c - 1.0)),
        StateLabel::Hrs => (median - median / c, median / c),
        StateLabel::Insulating => unreachable!("insulating cells are not sampled"),
    };
    let mut part = StructuralPart {
        r_det,
        mc_median,
        mc_sd: 0.0,
    };
    if target_sd == 0.0 {
        return Ok(part);
    }
    let composite_sd = |mc_sd: f64| {
        let p = StructuralPart { mc_sd, ..part };
        truncated_moments(params.trunc_sigma, |z| {
            let r_mc = (p.mc_median + p.mc_sd * z).max(params.r_floor);
            p.compose(r_mc, state).max(params.r_floor)
        })
        .1
    };
    let mut lo = 0.0;
    let mut hi = mc_median;
    while composite_sd(hi) < target_sd {
        hi *= 2.0;
        if hi > 1e3 * mc_median {
            return Err(ConfigError::invariant(format!(
                "structural calibration cannot reach {state:?} SD {target_sd} with split factor {c}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if composite_sd(mid) < target_sd {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    part.mc_sd = 0.5 * (lo + hi);
    Ok(part)
}
