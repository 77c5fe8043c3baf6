//! JSON run configuration.
//!
//! Every physical quantity carries its unit in the key name. Unknown keys are
//! rejected. After [`load_config_str`] every optional field is filled in, so
//! the serialized config is the complete echo of what ran and loads back to
//! the same run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{wire_params_from_tech, ArrayConfig, Topology};
use crate::device::{DeviceModelParams, IvMode, SamplingMode};
use crate::error::ConfigError;
use crate::experiments::{sha256_hex, AccessPlan, CapacitySearch, Scenario, WfpAxis};
use crate::monte_carlo::McConfig;
use crate::solver::SolveOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceBlock {
    pub r_lrs_median_ohm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_lrs_sd_ohm: Option<f64>,
    /// Alternative to `r_lrs_sd_ohm`: SD as a fraction of the median.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_lrs_vc: Option<f64>,
    pub r_hrs_median_ohm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_hrs_sd_ohm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_hrs_vc: Option<f64>,
    /// Defaults to 100 × `r_hrs_median_ohm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_insulating_ohm: Option<f64>,
    pub v_set_v: f64,
    pub v_reset_v: f64,
    pub t_pulse_s: f64,
    pub iv_mode: IvMode,
    pub sampling_mode: SamplingMode,
    pub r_floor_ohm: f64,
    pub trunc_sigma: f64,
}

const DEFAULT_LRS_VC: f64 = 0.15;
const DEFAULT_HRS_VC: f64 = 0.25;

impl Default for DeviceBlock {
    fn default() -> Self {
        let d = DeviceModelParams::default();
        DeviceBlock {
            r_lrs_median_ohm: d.r_lrs_median,
            r_lrs_sd_ohm: None,
            r_lrs_vc: None,
            r_hrs_median_ohm: d.r_hrs_median,
            r_hrs_sd_ohm: None,
            r_hrs_vc: None,
            r_insulating_ohm: None,
            v_set_v: d.v_set,
            v_reset_v: d.v_reset,
            t_pulse_s: d.t_pulse,
            iv_mode: d.iv_mode,
            sampling_mode: d.sampling_mode,
            r_floor_ohm: d.r_floor,
            trunc_sigma: d.trunc_sigma,
        }
    }
}

impl DeviceBlock {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        fn sd(median: f64, sd: Option<f64>, vc: Option<f64>, default_vc: f64, state: &str) -> Result<f64, ConfigError> {
            match (sd, vc) {
                (Some(_), Some(_)) => Err(ConfigError::invariant(format!(
                    "give at most one of r_{state}_sd_ohm and r_{state}_vc"
                ))),
                (Some(s), None) => Ok(s),
                (None, v) => Ok(v.unwrap_or(default_vc) * median),
            }
        }
        self.r_lrs_sd_ohm = Some(sd(self.r_lrs_median_ohm, self.r_lrs_sd_ohm, self.r_lrs_vc, DEFAULT_LRS_VC, "lrs")?);
        self.r_lrs_vc = None;
        self.r_hrs_sd_ohm = Some(sd(self.r_hrs_median_ohm, self.r_hrs_sd_ohm, self.r_hrs_vc, DEFAULT_HRS_VC, "hrs")?);
        self.r_hrs_vc = None;
        self.r_insulating_ohm.get_or_insert(100.0 * self.r_hrs_median_ohm);
        self.params().validate()
    }

    /// Model parameters. Call on a resolved block.
    pub fn params(&self) -> DeviceModelParams {
        DeviceModelParams {
            r_lrs_median: self.r_lrs_median_ohm,
            r_lrs_sd: self.r_lrs_sd_ohm.unwrap_or(DEFAULT_LRS_VC * self.r_lrs_median_ohm),
            r_hrs_median: self.r_hrs_median_ohm,
            r_hrs_sd: self.r_hrs_sd_ohm.unwrap_or(DEFAULT_HRS_VC * self.r_hrs_median_ohm),
            r_insulating: self.r_insulating_ohm.unwrap_or(100.0 * self.r_hrs_median_ohm),
            v_set: self.v_set_v,
            v_reset: self.v_reset_v,
            t_pulse: self.t_pulse_s,
            iv_mode: self.iv_mode,
            sampling_mode: self.sampling_mode,
            r_floor: self.r_floor_ohm,
            trunc_sigma: self.trunc_sigma,
        }
    }
}

/// Interconnect technology inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TechBlock {
    pub pitch_nm: f64,
    pub sheet_res_ohm_sq: f64,
    pub cap_ff_per_um: f64,
}

impl Default for TechBlock {
    fn default() -> Self {
        TechBlock {
            pitch_nm: 44.0,
            sheet_res_ohm_sq: 1.405,
            cap_ff_per_um: 1.045,
        }
    }
}

impl TechBlock {
    /// `(r_wire_ohm, c_wire_ff)` per cell.
    pub fn wire_params(&self) -> (f64, f64) {
        // fF/µm is numerically nF/m.
        let (r, c) = wire_params_from_tech(self.pitch_nm * 1e-9, self.sheet_res_ohm_sq, self.cap_ff_per_um * 1e-9);
        (r, c * 1e15)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayBlock {
    /// Defaults depend on the experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_wire_ohm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_wire_ff: Option<f64>,
    pub r_source_ohm: f64,
    pub topology: Topology,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tech: Option<TechBlock>,
}

impl Default for ArrayBlock {
    fn default() -> Self {
        ArrayBlock {
            rows: None,
            cols: None,
            r_wire_ohm: None,
            c_wire_ff: None,
            r_source_ohm: 0.0,
            topology: Topology::Full,
            tech: None,
        }
    }
}

impl ArrayBlock {
    fn resolve(&mut self, default_size: usize) -> Result<(), ConfigError> {
        let tech = self.tech.unwrap_or_default();
        let (r, c) = tech.wire_params();
        if self.tech.is_some() {
            for (name, given, derived) in [("r_wire_ohm", self.r_wire_ohm, r), ("c_wire_ff", self.c_wire_ff, c)] {
                if let Some(g) = given {
                    if (g - derived).abs() > 1e-12 * derived.abs() {
                        return Err(ConfigError::invariant(format!(
                            "{name} = {g} contradicts the tech block, which gives {derived}"
                        )));
                    }
                }
            }
        }
        self.r_wire_ohm.get_or_insert(r);
        self.c_wire_ff.get_or_insert(c);
        self.rows.get_or_insert(default_size);
        self.cols.get_or_insert(default_size);
        self.config().validate()
    }

    /// Array configuration. Call on a resolved block.
    pub fn config(&self) -> ArrayConfig {
        let (r, c) = self.tech.unwrap_or_default().wire_params();
        ArrayConfig {
            rows: self.rows.unwrap_or(64),
            cols: self.cols.unwrap_or(64),
            r_wire: self.r_wire_ohm.unwrap_or(r),
            c_wire: self.c_wire_ff.unwrap_or(c) * 1e-15,
            r_source: self.r_source_ohm,
            topology: self.topology,
        }
    }
}

/// Scheme and supply for experiments that use a single one of each.
/// Unset values take experiment-specific defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme_n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_dd_v: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub tol: f64,
    pub accept_tol: f64,
    pub max_cg_iter: usize,
    pub newton_tol_v: f64,
    pub max_newton_iter: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolverBlock {
            tol: o.tol,
            accept_tol: o.accept_tol,
            max_cg_iter: o.max_cg_iter,
            newton_tol_v: o.newton_tol_v,
            max_newton_iter: o.max_newton_iter,
        }
    }
}

impl SolverBlock {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            accept_tol: self.accept_tol,
            max_cg_iter: self.max_cg_iter,
            newton_tol_v: self.newton_tol_v,
            max_newton_iter: self.max_newton_iter,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.accept_tol >= self.tol && self.newton_tol_v > 0.0) {
            return Err(ConfigError::invariant("solver tolerances must satisfy 0 < tol <= accept_tol and newton_tol_v > 0"));
        }
        if self.max_cg_iter == 0 || self.max_newton_iter == 0 {
            return Err(ConfigError::invariant("solver iteration limits must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavSpec {
    pub sizes: Vec<usize>,
}

impl Default for WavSpec {
    fn default() -> Self {
        WavSpec { sizes: vec![16, 32, 64, 128] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasCompareSpec {
    pub schemes: Vec<u32>,
}

impl Default for BiasCompareSpec {
    fn default() -> Self {
        BiasCompareSpec { schemes: vec![2, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WireScalingSpec {
    pub multipliers: Vec<f64>,
}

impl Default for WireScalingSpec {
    fn default() -> Self {
        WireScalingSpec {
            multipliers: vec![0.0, 1.0, 2.0, 4.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WfpSpec {
    pub axis: WfpAxis,
    /// Defaults depend on the axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    pub schemes: Vec<u32>,
}

impl Default for WfpSpec {
    fn default() -> Self {
        WfpSpec {
            axis: WfpAxis::Vdd,
            points: None,
            schemes: vec![2, 3],
        }
    }
}

impl WfpSpec {
    fn default_points(axis: WfpAxis) -> Vec<f64> {
        // Millivolt steps.
        let steps = |lo_mv: u32, n: u32| (0..n).map(move |i| f64::from(lo_mv + 5 * i) / 1000.0);
        match axis {
            // Spans the V/3 and V/2 transitions of a 128x128 array.
            WfpAxis::Vdd => steps(2380, 8).chain(steps(2515, 8)).collect(),
            WfpAxis::Vc => vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            WfpAxis::Size => vec![16.0, 32.0, 64.0, 128.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySpec {
    pub sizes: Vec<usize>,
    pub schemes: Vec<u32>,
    pub v_dd_points: Vec<f64>,
}

impl Default for EnergySpec {
    fn default() -> Self {
        EnergySpec {
            sizes: vec![64],
            schemes: vec![2, 3],
            v_dd_points: vec![2.125, 2.13, 2.135, 2.145, 2.16, 2.2, 2.4, 2.6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomAccessSpec {
    pub sparsity: f64,
    pub plan: AccessPlan,
    pub with_d2d: bool,
}

impl Default for RandomAccessSpec {
    fn default() -> Self {
        RandomAccessSpec {
            sparsity: 0.5,
            plan: AccessPlan::default(),
            with_d2d: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SparsitySpec {
    pub sparsities: Vec<f64>,
    pub plan: AccessPlan,
    pub with_d2d: bool,
}

impl Default for SparsitySpec {
    fn default() -> Self {
        SparsitySpec {
            sparsities: vec![0.01, 0.1, 0.5, 0.9],
            plan: AccessPlan::default(),
            with_d2d: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsaSpec {
    pub periods: Vec<usize>,
    pub schemes: Vec<u32>,
}

impl Default for PsaSpec {
    fn default() -> Self {
        PsaSpec {
            periods: vec![4],
            schemes: vec![2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacitySpec {
    pub target_wfp: f64,
    pub topologies: Vec<Topology>,
    pub search: CapacitySearch,
}

impl Default for CapacitySpec {
    fn default() -> Self {
        CapacitySpec {
            target_wfp: 0.01,
            topologies: vec![Topology::Full, Topology::Psa { period: 4 }],
            search: CapacitySearch::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Wav(WavSpec),
    BiasCompare(BiasCompareSpec),
    WireScaling(WireScalingSpec),
    Wfp(WfpSpec),
    Energy(EnergySpec),
    RandomAccess(RandomAccessSpec),
    Sparsity(SparsitySpec),
    Psa(PsaSpec),
    Capacity(CapacitySpec),
    Selftest,
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Wav(_) => "wav",
            ExperimentSpec::BiasCompare(_) => "bias-compare",
            ExperimentSpec::WireScaling(_) => "wire-scaling",
            ExperimentSpec::Wfp(_) => "wfp",
            ExperimentSpec::Energy(_) => "energy",
            ExperimentSpec::RandomAccess(_) => "random-access",
            ExperimentSpec::Sparsity(_) => "sparsity",
            ExperimentSpec::Psa(_) => "psa",
            ExperimentSpec::Capacity(_) => "capacity",
            ExperimentSpec::Selftest => "selftest",
        }
    }

    /// Default experiment for a command name.
    pub fn for_command(name: &str) -> Option<Self> {
        Some(match name {
            "wav" => ExperimentSpec::Wav(Default::default()),
            "bias-compare" => ExperimentSpec::BiasCompare(Default::default()),
            "wire-scaling" => ExperimentSpec::WireScaling(Default::default()),
            "wfp" => ExperimentSpec::Wfp(Default::default()),
            "energy" => ExperimentSpec::Energy(Default::default()),
            "random-access" => ExperimentSpec::RandomAccess(Default::default()),
            "sparsity" => ExperimentSpec::Sparsity(Default::default()),
            "psa" => ExperimentSpec::Psa(Default::default()),
            "capacity" => ExperimentSpec::Capacity(Default::default()),
            "selftest" => ExperimentSpec::Selftest,
            _ => return None,
        })
    }

    /// Array side used when the array block leaves the size unset.
    fn default_size(&self) -> usize {
        match self {
            ExperimentSpec::Wfp(_) => 128,
            ExperimentSpec::RandomAccess(_) | ExperimentSpec::Sparsity(_) | ExperimentSpec::Psa(_) => 256,
            _ => 64,
        }
    }

    fn default_v_dd(&self) -> f64 {
        match self {
            ExperimentSpec::Wfp(_) => 2.53,
            ExperimentSpec::RandomAccess(_) | ExperimentSpec::Sparsity(_) => 3.0,
            ExperimentSpec::Psa(_) | ExperimentSpec::Capacity(_) => 4.0,
            _ => 2.6,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        fn nonempty<T>(v: &[T], what: &str) -> Result<(), ConfigError> {
            if v.is_empty() {
                return Err(ConfigError::invariant(format!("{what} must not be empty")));
            }
            Ok(())
        }
        fn schemes(v: &[u32]) -> Result<(), ConfigError> {
            nonempty(v, "schemes")?;
            if v.iter().any(|&k| k < 2) {
                return Err(ConfigError::invariant("bias scheme n must be >= 2"));
            }
            Ok(())
        }
        fn fractions(v: &[f64], what: &str) -> Result<(), ConfigError> {
            if v.iter().any(|s| !(0.0..=1.0).contains(s)) {
                return Err(ConfigError::invariant(format!("{what} must lie in [0, 1]")));
            }
            Ok(())
        }
        match self {
            ExperimentSpec::Wav(s) => {
                nonempty(&s.sizes, "sizes")?;
                if s.sizes.contains(&0) {
                    return Err(ConfigError::invariant("sizes must be >= 1"));
                }
            }
            ExperimentSpec::BiasCompare(s) => schemes(&s.schemes)?,
            ExperimentSpec::WireScaling(s) => {
                nonempty(&s.multipliers, "multipliers")?;
                if s.multipliers.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
                    return Err(ConfigError::invariant("wire multipliers must be finite and >= 0"));
                }
            }
            ExperimentSpec::Wfp(s) => {
                schemes(&s.schemes)?;
                let points = s.points.as_deref().unwrap_or_default();
                nonempty(points, "points")?;
                match s.axis {
                    WfpAxis::Size if points.iter().any(|x| !(*x >= 1.0 && x.fract() == 0.0)) => {
                        return Err(ConfigError::invariant("size points must be positive integers"));
                    }
                    WfpAxis::Vc if points.iter().any(|x| !(*x >= 0.0 && x.is_finite())) => {
                        return Err(ConfigError::invariant("vc points must be finite and >= 0"));
                    }
                    WfpAxis::Vdd if points.iter().any(|x| !x.is_finite()) => {
                        return Err(ConfigError::invariant("v_dd points must be finite"));
                    }
                    _ => {}
                }
            }
            ExperimentSpec::Energy(s) => {
                nonempty(&s.sizes, "sizes")?;
                schemes(&s.schemes)?;
                nonempty(&s.v_dd_points, "v_dd_points")?;
            }
            ExperimentSpec::RandomAccess(s) => fractions(&[s.sparsity], "sparsity")?,
            ExperimentSpec::Sparsity(s) => {
                nonempty(&s.sparsities, "sparsities")?;
                fractions(&s.sparsities, "sparsities")?;
            }
            ExperimentSpec::Psa(s) => {
                schemes(&s.schemes)?;
                if s.periods.iter().any(|&p| p < 2) {
                    return Err(ConfigError::invariant("PSA period must be >= 2"));
                }
            }
            ExperimentSpec::Capacity(s) => {
                nonempty(&s.topologies, "topologies")?;
                fractions(&[s.target_wfp], "target_wfp")?;
            }
            ExperimentSpec::Selftest => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub device: DeviceBlock,
    #[serde(default)]
    pub array: ArrayBlock,
    #[serde(default)]
    pub bias: BiasBlock,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub solver: SolverBlock,
    /// Add the line-charging term to write energies.
    #[serde(default)]
    pub include_wire_cap: bool,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    /// Defaults for a command, unresolved.
    pub fn for_experiment(experiment: ExperimentSpec) -> Self {
        RunConfig {
            experiment,
            device: DeviceBlock::default(),
            array: ArrayBlock::default(),
            bias: BiasBlock::default(),
            mc: McConfig::default(),
            solver: SolverBlock::default(),
            include_wire_cap: false,
            output: OutputBlock::default(),
        }
    }

    /// Fill every defaulted field and check all invariants.
    pub fn resolve(&mut self) -> Result<(), ConfigError> {
        self.device.resolve()?;
        self.array.resolve(self.experiment.default_size())?;
        self.bias.scheme_n.get_or_insert(2);
        self.bias.v_dd_v.get_or_insert(self.experiment.default_v_dd());
        if self.bias.scheme_n < Some(2) {
            return Err(ConfigError::invariant("bias scheme n must be >= 2"));
        }
        if !self.v_dd().is_finite() {
            return Err(ConfigError::invariant("v_dd_v must be finite"));
        }
        if self.mc.cycles == 0 {
            return Err(ConfigError::invariant("mc.cycles must be >= 1"));
        }
        self.solver.validate()?;
        if let ExperimentSpec::Wfp(s) = &mut self.experiment {
            s.points.get_or_insert_with(|| WfpSpec::default_points(s.axis));
        }
        if let ExperimentSpec::RandomAccess(RandomAccessSpec { plan, .. }) | ExperimentSpec::Sparsity(SparsitySpec { plan, .. }) =
            &self.experiment
        {
            let a = self.array.config();
            let reach = plan.stride * plan.count;
            if plan.stride == 0 || plan.count == 0 || reach > a.rows.min(a.cols) {
                return Err(ConfigError::invariant(format!(
                    "access plan needs stride, count >= 1 and stride*count = {reach} within the {}x{} array",
                    a.rows, a.cols
                )));
            }
        }
        self.experiment.validate()
    }

    pub fn scheme_n(&self) -> u32 {
        self.bias.scheme_n.unwrap_or(2)
    }

    pub fn v_dd(&self) -> f64 {
        self.bias.v_dd_v.unwrap_or_else(|| self.experiment.default_v_dd())
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            array: self.array.config(),
            device: self.device.params(),
            solve: self.solver.options(),
            include_wire_cap: self.include_wire_cap,
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON echo without the output block. Worker
    /// count is not part of the config.
    pub fn digest(&self) -> String {
        let mut echo = self.echo();
        if let Some(obj) = echo.as_object_mut() {
            obj.remove("output");
        }
        sha256_hex(echo.to_string().as_bytes())
    }

    pub fn mc_with_workers(&self, workers: usize) -> McConfig {
        McConfig { workers, ..self.mc }
    }
}

/// Parse and resolve a config document.
pub fn load_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof | serde_json::error::Category::Io => {
                ConfigError::Parse {
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                }
            }
            serde_json::error::Category::Data => ConfigError::Schema {
                path: if path.is_empty() { ".".into() } else { path },
                message: inner.to_string(),
            },
        }
    })?;
    cfg.resolve()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_config_str(&text)
}
