//! Parameterized studies built on the Monte Carlo engine.
//!
//! Every study is a pure function of its inputs and the master seed. Cycle
//! `i` of every sweep point draws from the same stream, so paired
//! comparisons (schemes, topologies, wire multipliers) see identical device
//! samples and differ only in the varied factor.

mod access;
mod capacity;

pub use access::{exp_random_access, exp_sparsity, Access, AccessPlan, AccessTrace, SparsityResult};
pub use capacity::{exp_net_capacity, write_capacity_csv, CapacityProbe, CapacityResult, CapacitySearch};

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{build_netlist, worst_case_pattern, ArrayConfig, BiasSpec, Topology};
use crate::device::{calibrate_vc, switching_outcome, DeviceModel, DeviceModelParams, IvMode, StateLabel, WriteOp};
use crate::error::{Error, Result, StatsError};
use crate::monte_carlo::{eec, mean_energy, run_cycles, summarize, wfp, CycleRecord, McConfig, StatSummary};
use crate::rng::StreamKey;
use crate::solver::{solve_netlist, total_energy, wav, Solution, SolveOptions};

/// Everything a study needs besides its own axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub device: DeviceModelParams,
    pub solve: SolveOptions,
    /// Add the `½·C·V²` line-charging term to each write energy.
    pub include_wire_cap: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            array: ArrayConfig::default(),
            device: DeviceModelParams::default(),
            solve: SolveOptions::default(),
            include_wire_cap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub master_seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new(config_sha256: String, master_seed: u64) -> Self {
        Provenance {
            config_sha256,
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Provenance keyed on the debug rendering of the study inputs.
    pub fn of_inputs<T: std::fmt::Debug>(inputs: &T, master_seed: u64) -> Self {
        Provenance::new(sha256_hex(format!("{inputs:?}").as_bytes()), master_seed)
    }

    pub fn comment_line(&self) -> String {
        format!(
            "# rram-xbar {} config_sha256={} seed={}",
            self.version, self.config_sha256, self.master_seed
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub scheme_n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    pub cycles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wav: Option<StatSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<StatSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wfp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_energy: Option<f64>,
    /// `None` inside a point that reports energy means every write failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_sd: Option<f64>,
}

impl SweepPoint {
    fn new(axis_value: f64, scheme_n: u32, cycles: usize) -> Self {
        SweepPoint {
            axis_value,
            scheme_n,
            size: None,
            topology: None,
            cycles,
            wav: None,
            energy: None,
            wfp: None,
            mean_energy: None,
            eec: None,
            normalized_sd: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub axis: String,
    pub points: Vec<SweepPoint>,
    pub provenance: Provenance,
}

impl SweepResult {
    /// Points matching a scheme, in sweep order.
    pub fn scheme(&self, scheme_n: u32) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.scheme_n == scheme_n)
    }

    pub fn find(&self, axis_value: f64, scheme_n: u32) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.axis_value == axis_value && p.scheme_n == scheme_n)
    }

    /// Write the table with a leading `#` provenance line. Columns are the
    /// fields present in at least one point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} experiment={} axis={}",
            self.provenance.comment_line(),
            self.experiment,
            self.axis
        )?;
        let any = |f: fn(&SweepPoint) -> bool| self.points.iter().any(f);
        let has_size = any(|p| p.size.is_some());
        let has_topology = any(|p| p.topology.is_some());
        let has_wav = any(|p| p.wav.is_some());
        let has_energy = any(|p| p.energy.is_some());
        let has_wfp = any(|p| p.wfp.is_some());
        let has_mean = any(|p| p.mean_energy.is_some());
        let has_norm = any(|p| p.normalized_sd.is_some());

        let mut header = vec!["axis_value".to_string(), "scheme_n".to_string()];
        if has_size {
            header.push("size".into());
        }
        if has_topology {
            header.push("topology".into());
        }
        if has_wav {
            header.extend(stat_columns("wav", "V"));
        }
        if has_energy {
            header.extend(stat_columns("energy", "J"));
        }
        if has_wfp {
            header.push("wfp".into());
        }
        if has_mean {
            header.extend(["mean_energy_J".to_string(), "eec_J".to_string()]);
        }
        if has_norm {
            header.push("normalized_sd".into());
        }
        header.push("cycles".into());

        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![num(p.axis_value), p.scheme_n.to_string()];
            if has_size {
                row.push(p.size.map(|s| s.to_string()).unwrap_or_default());
            }
            if has_topology {
                row.push(p.topology.clone().unwrap_or_default());
            }
            if has_wav {
                row.extend(stat_values(p.wav.as_ref()));
            }
            if has_energy {
                row.extend(stat_values(p.energy.as_ref()));
            }
            if has_wfp {
                row.push(p.wfp.map(num).unwrap_or_default());
            }
            if has_mean {
                row.push(p.mean_energy.map(num).unwrap_or_default());
                row.push(match (p.mean_energy, p.eec) {
                    (Some(_), None) => "undefined".to_string(),
                    (_, e) => e.map(num).unwrap_or_default(),
                });
            }
            if has_norm {
                row.push(p.normalized_sd.map(num).unwrap_or_default());
            }
            row.push(p.cycles.to_string());
            w.write_record(&row)?;
        }
        w.flush()
    }
}

fn stat_columns(prefix: &str, unit: &str) -> Vec<String> {
    ["mean", "median", "sd", "min", "max", "p1", "p5", "p25", "p75", "p95", "p99"]
        .iter()
        .map(|s| format!("{prefix}_{s}_{unit}"))
        .collect()
}

fn stat_values(s: Option<&StatSummary>) -> Vec<String> {
    match s {
        None => vec![String::new(); 11],
        Some(s) => {
            let p = &s.percentiles;
            [s.mean, s.median, s.sd, s.min, s.max, p.p1, p.p5, p.p25, p.p75, p.p95, p.p99]
                .into_iter()
                .map(num)
                .collect()
        }
    }
}

/// Locale-independent, round-trip exact number formatting.
pub(crate) fn num(v: f64) -> String {
    format!("{v:e}")
}

/// The selected-cell write of a worst-case pattern for one device draw.
pub fn solve_worst_case(
    scn: &Scenario,
    scheme_n: u32,
    v_dd: f64,
    key: StreamKey,
) -> Result<(Solution, CycleRecord)> {
    let model = DeviceModel::new(scn.device)?;
    scn.array.validate()?;
    let (pattern, selected) = worst_case_pattern(&scn.array);
    let bias = BiasSpec {
        scheme_n,
        v_dd,
        selected,
        polarity: WriteOp::Set,
    };
    let net = build_netlist(&scn.array, &pattern, &model, key, &bias)?;
    let sol = solve_netlist(&net, &scn.device, &scn.solve)?;
    let v = wav(&sol, selected);
    let record = CycleRecord {
        cycle: 0,
        wav: v,
        success: switching_outcome(v, WriteOp::Set, &scn.device),
        energy: total_energy(&sol, scn.device.t_pulse, scn.include_wire_cap, &net),
    };
    Ok((sol, record))
}

/// Monte Carlo worst-case writes of `scn.array`.
pub fn worst_case_records(scn: &Scenario, scheme_n: u32, v_dd: f64, mc: &McConfig) -> Result<Vec<CycleRecord>> {
    scn.array.validate()?;
    let model = DeviceModel::new(scn.device)?;
    let (pattern, selected) = worst_case_pattern(&scn.array);
    let bias = BiasSpec {
        scheme_n,
        v_dd,
        selected,
        polarity: WriteOp::Set,
    };
    run_cycles(
        |cycle, key| {
            let net = build_netlist(&scn.array, &pattern, &model, key, &bias)?;
            let sol = solve_netlist(&net, &scn.device, &scn.solve)?;
            let v = wav(&sol, selected);
            Ok(CycleRecord {
                cycle,
                wav: v,
                success: switching_outcome(v, WriteOp::Set, &scn.device),
                energy: total_energy(&sol, scn.device.t_pulse, scn.include_wire_cap, &net),
            })
        },
        mc,
    )
}

/// Worst-case records at every supply in `supplies`. With linear devices each
/// cycle is solved once at 1 V and rescaled: node voltages scale with `v_dd`
/// and dissipated energy with `v_dd²`.
pub fn worst_case_records_over_supplies(
    scn: &Scenario,
    scheme_n: u32,
    supplies: &[f64],
    mc: &McConfig,
) -> Result<Vec<Vec<CycleRecord>>> {
    if !matches!(scn.device.iv_mode, IvMode::Linear) {
        return supplies.iter().map(|&v| worst_case_records(scn, scheme_n, v, mc)).collect();
    }
    let unit = worst_case_records(scn, scheme_n, 1.0, mc)?;
    Ok(supplies
        .iter()
        .map(|&v| {
            unit.iter()
                .map(|r| {
                    let wav = r.wav * v;
                    CycleRecord {
                        cycle: r.cycle,
                        wav,
                        success: switching_outcome(wav, WriteOp::Set, &scn.device),
                        energy: r.energy * v * v,
                    }
                })
                .collect()
        })
        .collect())
}

fn wav_summary(records: &[CycleRecord]) -> Result<StatSummary> {
    Ok(summarize(&records.iter().map(|r| r.wav).collect::<Vec<_>>())?)
}

fn energy_summary(records: &[CycleRecord]) -> Result<StatSummary> {
    Ok(summarize(&records.iter().map(|r| r.energy).collect::<Vec<_>>())?)
}

fn eec_or_undefined(records: &[CycleRecord]) -> Result<Option<f64>> {
    match eec(records) {
        Ok(e) => Ok(Some(e)),
        Err(StatsError::UndefinedEec) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn check_scheme(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::experiment("bias scheme n must be >= 2"));
    }
    Ok(())
}

fn check_points(points: &[f64], what: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::experiment(format!("{what} sweep needs at least one point")));
    }
    Ok(())
}

fn with_size(scn: &Scenario, n: usize) -> Scenario {
    Scenario {
        array: scn.array.with_size(n),
        ..*scn
    }
}

/// WAV distribution of the worst-case cell for each square size.
pub fn exp_wav_distribution(scn: &Scenario, sizes: &[usize], scheme_n: u32, v_dd: f64, mc: &McConfig) -> Result<SweepResult> {
    check_scheme(scheme_n)?;
    if sizes.is_empty() {
        return Err(Error::experiment("size sweep needs at least one point"));
    }
    let mut points = Vec::new();
    for &n in sizes {
        let records = worst_case_records(&with_size(scn, n), scheme_n, v_dd, mc)?;
        let mut p = SweepPoint::new(n as f64, scheme_n, records.len());
        p.wav = Some(wav_summary(&records)?);
        points.push(p);
    }
    Ok(SweepResult {
        experiment: "wav".into(),
        axis: "size".into(),
        points,
        provenance: Provenance::of_inputs(&(scn, sizes, scheme_n, v_dd, mc.cycles), mc.master_seed),
    })
}

/// WAV distribution at one size under each bias scheme, on identical draws.
pub fn exp_bias_compare(scn: &Scenario, schemes: &[u32], v_dd: f64, mc: &McConfig) -> Result<SweepResult> {
    if schemes.is_empty() {
        return Err(Error::experiment("at least one bias scheme is required"));
    }
    let mut points = Vec::new();
    for &k in schemes {
        check_scheme(k)?;
        let records = worst_case_records(scn, k, v_dd, mc)?;
        let mut p = SweepPoint::new(scn.array.rows as f64, k, records.len());
        p.wav = Some(wav_summary(&records)?);
        points.push(p);
    }
    Ok(SweepResult {
        experiment: "bias-compare".into(),
        axis: "size".into(),
        points,
        provenance: Provenance::of_inputs(&(scn, schemes, v_dd, mc.cycles), mc.master_seed),
    })
}

/// WAV distribution as wire resistance is scaled. `normalized_sd` is the WAV
/// SD divided by the SD at multiplier 1.
pub fn exp_wire_scaling(scn: &Scenario, multipliers: &[f64], scheme_n: u32, v_dd: f64, mc: &McConfig) -> Result<SweepResult> {
    check_scheme(scheme_n)?;
    check_points(multipliers, "wire multiplier")?;
    if multipliers.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(Error::experiment("wire multipliers must be finite and >= 0"));
    }
    let run = |mult: f64| -> Result<Vec<CycleRecord>> {
        let s = Scenario {
            array: ArrayConfig {
                r_wire: scn.array.r_wire * mult,
                ..scn.array
            },
            ..*scn
        };
        worst_case_records(&s, scheme_n, v_dd, mc)
    };
    let mut summaries = Vec::new();
    for &m in multipliers {
        summaries.push((m, wav_summary(&run(m)?)?));
    }
    let baseline = match summaries.iter().find(|(m, _)| *m == 1.0) {
        Some((_, s)) => s.sd,
        None => wav_summary(&run(1.0)?)?.sd,
    };
    let points = summaries
        .into_iter()
        .map(|(m, s)| {
            let mut p = SweepPoint::new(m, scheme_n, s.count);
            p.normalized_sd = Some(if baseline > 0.0 { s.sd / baseline } else { f64::NAN });
            p.wav = Some(s);
            p
        })
        .collect();
    Ok(SweepResult {
        experiment: "wire-scaling".into(),
        axis: "r_wire_multiplier".into(),
        points,
        provenance: Provenance::of_inputs(&(scn, multipliers, scheme_n, v_dd, mc.cycles), mc.master_seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WfpAxis {
    /// Square array size n.
    Size,
    /// Variation coefficient of the LRS distribution, median fixed.
    Vc,
    /// Supply voltage, V.
    Vdd,
}

impl WfpAxis {
    fn name(self) -> &'static str {
        match self {
            WfpAxis::Size => "size",
            WfpAxis::Vc => "vc",
            WfpAxis::Vdd => "v_dd",
        }
    }
}

/// Write failure probability along one axis for each scheme. The base
/// scenario supplies whatever the axis does not vary, with `v_dd` as the
/// base supply.
pub fn exp_wfp(
    scn: &Scenario,
    axis: WfpAxis,
    points: &[f64],
    schemes: &[u32],
    v_dd: f64,
    mc: &McConfig,
) -> Result<SweepResult> {
    check_points(points, axis.name())?;
    let mut rows = Vec::new();
    for &k in schemes {
        check_scheme(k)?;
    }
    if axis == WfpAxis::Vdd {
        let per_scheme = schemes
            .iter()
            .map(|&k| worst_case_records_over_supplies(scn, k, points, mc))
            .collect::<Result<Vec<_>>>()?;
        for (i, &x) in points.iter().enumerate() {
            for (j, &k) in schemes.iter().enumerate() {
                let mut p = SweepPoint::new(x, k, per_scheme[j][i].len());
                p.wfp = Some(wfp(&per_scheme[j][i])?);
                rows.push(p);
            }
        }
    } else {
        for &x in points {
            let s = match axis {
                WfpAxis::Size => {
                    if !(x >= 1.0 && x.fract() == 0.0) {
                        return Err(Error::experiment("size points must be positive integers"));
                    }
                    with_size(scn, x as usize)
                }
                WfpAxis::Vc => Scenario {
                    device: calibrate_vc(&scn.device, x, StateLabel::Lrs)?.0,
                    ..*scn
                },
                WfpAxis::Vdd => unreachable!(),
            };
            for &k in schemes {
                let records = worst_case_records(&s, k, v_dd, mc)?;
                let mut p = SweepPoint::new(x, k, records.len());
                p.wfp = Some(wfp(&records)?);
                rows.push(p);
            }
        }
    }
    Ok(SweepResult {
        experiment: "wfp".into(),
        axis: axis.name().into(),
        points: rows,
        provenance: Provenance::of_inputs(&(scn, axis, points, schemes, v_dd, mc.cycles), mc.master_seed),
    })
}

/// Write energy, WFP and EEC over sizes, schemes and supply voltages.
pub fn exp_energy(
    scn: &Scenario,
    sizes: &[usize],
    schemes: &[u32],
    v_dd_points: &[f64],
    mc: &McConfig,
) -> Result<SweepResult> {
    check_points(v_dd_points, "v_dd")?;
    if sizes.is_empty() || schemes.is_empty() {
        return Err(Error::experiment("energy sweep needs sizes and schemes"));
    }
    let mut rows = Vec::new();
    for &n in sizes {
        let s = with_size(scn, n);
        for &k in schemes {
            check_scheme(k)?;
            let per_supply = worst_case_records_over_supplies(&s, k, v_dd_points, mc)?;
            for (&v, records) in v_dd_points.iter().zip(&per_supply) {
                let records = records.as_slice();
                let mut p = SweepPoint::new(v, k, records.len());
                p.size = Some(n);
                p.energy = Some(energy_summary(records)?);
                p.wfp = Some(wfp(records)?);
                p.mean_energy = Some(mean_energy(records)?);
                p.eec = eec_or_undefined(records)?;
                rows.push(p);
            }
        }
    }
    Ok(SweepResult {
        experiment: "energy".into(),
        axis: "v_dd".into(),
        points: rows,
        provenance: Provenance::of_inputs(&(scn, sizes, schemes, v_dd_points, mc.cycles), mc.master_seed),
    })
}

/// FULL against PSA topologies of the same size, for each scheme.
pub fn exp_psa_compare(scn: &Scenario, periods: &[usize], schemes: &[u32], v_dd: f64, mc: &McConfig) -> Result<SweepResult> {
    let mut topologies = vec![Topology::Full];
    topologies.extend(periods.iter().map(|&period| Topology::Psa { period }));
    let mut rows = Vec::new();
    for topo in topologies {
        let s = Scenario {
            array: ArrayConfig {
                topology: topo,
                ..scn.array
            },
            ..*scn
        };
        for &k in schemes {
            check_scheme(k)?;
            let records = worst_case_records(&s, k, v_dd, mc)?;
            let axis_value = match topo {
                Topology::Full => 0.0,
                Topology::Psa { period } => period as f64,
            };
            let mut p = SweepPoint::new(axis_value, k, records.len());
            p.topology = Some(topo.label());
            p.wav = Some(wav_summary(&records)?);
            p.wfp = Some(wfp(&records)?);
            p.mean_energy = Some(mean_energy(&records)?);
            p.eec = eec_or_undefined(&records)?;
            rows.push(p);
        }
    }
    Ok(SweepResult {
        experiment: "psa".into(),
        axis: "psa_period".into(),
        points: rows,
        provenance: Provenance::of_inputs(&(scn, periods, schemes, v_dd, mc.cycles), mc.master_seed),
    })
}

/// Compare two EECs where `None` (every write failed) ranks above any value.
pub fn eec_less(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(cycles: usize) -> McConfig {
        McConfig {
            cycles,
            master_seed: 42,
            workers: 1,
        }
    }

    fn ideal_1x1() -> Scenario {
        Scenario {
            array: ArrayConfig {
                r_wire: 0.0,
                ..ArrayConfig::square(1)
            },
            device: DeviceModelParams::default().nominal(),
            ..Scenario::default()
        }
    }

    #[test]
    fn single_cell_wav_is_supply() {
        let r = exp_wav_distribution(&ideal_1x1(), &[1], 2, 2.6, &mc(20)).unwrap();
        let s = r.points[0].wav.unwrap();
        assert_eq!(s.median, 2.6);
        assert_eq!(s.sd, 0.0);
        let b = exp_bias_compare(&ideal_1x1(), &[2, 3], 2.6, &mc(5)).unwrap();
        assert_eq!(b.points[0].wav.unwrap().median, b.points[1].wav.unwrap().median);
    }

    #[test]
    fn single_cell_energy_and_eec() {
        let scn = ideal_1x1();
        let r = exp_energy(&scn, &[1], &[2], &[2.5], &mc(4)).unwrap();
        let p = &r.points[0];
        let r_hrs = scn.device.r_hrs_median;
        let expected = 2.5 * 2.5 / r_hrs * scn.device.t_pulse;
        assert!((p.mean_energy.unwrap() - expected).abs() <= 1e-12 * expected);
        assert_eq!(p.wfp, Some(0.0));
        assert_eq!(p.eec, p.mean_energy);
    }

    #[test]
    fn deterministic_wav_above_threshold_never_fails() {
        let scn = Scenario {
            device: DeviceModelParams::default().nominal(),
            ..with_size(&Scenario::default(), 8)
        };
        let r = exp_wfp(&scn, WfpAxis::Vdd, &[3.0], &[2, 3], 3.0, &mc(10)).unwrap();
        assert!(r.points.iter().all(|p| p.wfp == Some(0.0)));
    }

    #[test]
    fn undefined_eec_marked_in_csv() {
        let scn = ideal_1x1();
        let r = exp_energy(&scn, &[1], &[2], &[1.0, 2.5], &mc(3)).unwrap();
        assert_eq!(r.points[0].wfp, Some(1.0));
        assert_eq!(r.points[0].eec, None);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# rram-xbar "));
        let header = lines.next().unwrap();
        assert!(header.starts_with("axis_value,scheme_n,size,energy_mean_J"));
        assert!(header.ends_with("wfp,mean_energy_J,eec_J,cycles"));
        assert!(lines.next().unwrap().contains(",undefined,"));
    }

    #[test]
    fn wfp_csv_columns() {
        let r = exp_wfp(&ideal_1x1(), WfpAxis::Vdd, &[2.5], &[2], 2.5, &mc(2)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("axis_value,scheme_n,wfp,cycles"));
        assert_eq!(text.lines().nth(2), Some("2.5e0,2,0e0,2"));
    }

    #[test]
    fn zero_multiplier_maximizes_wav() {
        let scn = with_size(&Scenario::default(), 8);
        let r = exp_wire_scaling(&scn, &[0.0, 1.0, 4.0], 2, 2.6, &mc(10)).unwrap();
        let med: Vec<f64> = r.points.iter().map(|p| p.wav.unwrap().median).collect();
        assert!(med[0] > med[1] && med[1] > med[2]);
        assert_eq!(r.points[1].normalized_sd, Some(1.0));
    }

    #[test]
    fn rescaled_supplies_match_direct_solves() {
        let scn = with_size(&Scenario::default(), 8);
        let supplies = [1.7, 2.6, 3.1];
        let scaled = worst_case_records_over_supplies(&scn, 3, &supplies, &mc(6)).unwrap();
        for (v, recs) in supplies.iter().zip(&scaled) {
            let direct = worst_case_records(&scn, 3, *v, &mc(6)).unwrap();
            for (a, b) in recs.iter().zip(&direct) {
                assert!((a.wav - b.wav).abs() <= 1e-10 * b.wav.abs());
                assert!((a.energy - b.energy).abs() <= 1e-9 * b.energy);
                assert_eq!(a.success, b.success);
            }
        }
    }

    #[test]
    fn eec_ordering_with_undefined() {
        assert!(eec_less(Some(1.0), None));
        assert!(!eec_less(None, Some(1.0)));
        assert!(!eec_less(None, None));
        assert!(eec_less(Some(1.0), Some(2.0)));
    }

    #[test]
    fn sweeps_are_reproducible() {
        let scn = with_size(&Scenario::default(), 6);
        let a = exp_psa_compare(&scn, &[3], &[2, 3], 2.6, &mc(8)).unwrap();
        let b = exp_psa_compare(&scn, &[3], &[2, 3], 2.6, &mc(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 4);
        assert_eq!(a.points[2].topology.as_deref(), Some("psa3"));
    }

    #[test]
    fn bad_inputs_rejected() {
        let scn = Scenario::default();
        assert!(exp_wav_distribution(&scn, &[], 2, 2.0, &mc(1)).is_err());
        assert!(exp_wav_distribution(&scn, &[4], 1, 2.0, &mc(1)).is_err());
        assert!(exp_wfp(&scn, WfpAxis::Size, &[2.5], &[2], 2.0, &mc(1)).is_err());
        assert!(exp_wire_scaling(&scn, &[-1.0], 2, 2.0, &mc(1)).is_err());
    }
}
