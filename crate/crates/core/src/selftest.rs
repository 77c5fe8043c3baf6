//! Built-in checks run by the `selftest` command.

use rand::Rng;
use serde::Serialize;

use crate::array::{apply_bias, build_netlist, random_pattern, ArrayConfig, BiasSpec, Cell, Topology};
use crate::config::TechBlock;
use crate::device::{DeviceModel, DeviceModelParams, WriteOp};
use crate::experiments::{solve_worst_case, worst_case_records, Scenario};
use crate::monte_carlo::{eec, CycleRecord, McConfig};
use crate::oracle::dense_node_voltages;
use crate::rng::StreamKey;
use crate::solver::{check_kcl, solve_netlist, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Random small linear netlist: size, wires, drivers, pattern and bias all
/// drawn from `key`.
pub fn random_small_netlist(key: StreamKey, max_side: usize) -> crate::Result<crate::array::ArrayNetlist> {
    let mut rng = key.child(0).rng();
    let rows = rng.random_range(1..=max_side);
    let cols = rng.random_range(1..=max_side);
    let pick = |rng: &mut rand_pcg::Pcg64Mcg, choices: &[f64]| choices[rng.random_range(0..choices.len())];
    let topology = if rows.min(cols) >= 2 && rng.random_bool(0.25) {
        Topology::Psa {
            period: rng.random_range(2..=rows.min(cols)),
        }
    } else {
        Topology::Full
    };
    let cfg = ArrayConfig {
        r_wire: pick(&mut rng, &[0.0, 2.81, 50.0]),
        r_source: pick(&mut rng, &[0.0, 0.0, 100.0, 1e3]),
        topology,
        ..ArrayConfig {
            rows,
            cols,
            ..ArrayConfig::default()
        }
    };
    let model = DeviceModel::new(DeviceModelParams::default())?;
    let pattern = random_pattern(&cfg, rng.random_range(0.0..=1.0), &mut key.child(1).rng())?;
    let working: Vec<Cell> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Cell::new(r, c)))
        .filter(|&c| !cfg.is_masked(c))
        .collect();
    let selected = if working.is_empty() {
        Cell::new(0, 0)
    } else {
        working[rng.random_range(0..working.len())]
    };
    let bias = BiasSpec {
        scheme_n: rng.random_range(2..=4),
        v_dd: rng.random_range(0.5..4.0),
        selected,
        polarity: if rng.random_bool(0.5) { WriteOp::Set } else { WriteOp::Reset },
    };
    Ok(build_netlist(&cfg, &pattern, &model, key.child(2), &bias)?)
}

fn oracle_and_conservation(count: usize) -> Vec<Check> {
    let params = DeviceModelParams::default();
    let opts = SolveOptions::default();
    let mut worst_err = 0.0f64;
    let mut worst_kcl = 0.0f64;
    let mut worst_power = 0.0f64;
    let mut kcl_ok = true;
    let mut failures = Vec::new();
    for i in 0..count {
        let net = match random_small_netlist(StreamKey::root(0x5e1f).child(i as u64), 8) {
            Ok(n) => n,
            Err(e) => {
                failures.push(format!("netlist {i}: {e}"));
                continue;
            }
        };
        let sol = match solve_netlist(&net, &params, &opts) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("netlist {i}: {e}"));
                continue;
            }
        };
        let Some(dense) = dense_node_voltages(&net) else {
            failures.push(format!("netlist {i}: oracle singular"));
            continue;
        };
        for (a, b) in sol.node_voltages.iter().zip(&dense) {
            let err = (a - b).abs() / b.abs().max(1e-300);
            if b.abs() > 0.0 {
                worst_err = worst_err.max(err);
            } else {
                worst_err = worst_err.max(a.abs());
            }
        }
        let kcl = check_kcl(&net, &sol, 1e-9);
        kcl_ok &= kcl.passed;
        worst_kcl = worst_kcl.max(kcl.worst_relative);
        if sol.source_power != 0.0 {
            worst_power = worst_power.max((sol.total_power - sol.source_power).abs() / sol.source_power.abs());
        }
    }
    let ok = failures.is_empty();
    vec![
        Check::new(
            "oracle_equivalence",
            ok && worst_err <= 1e-9,
            format!("{count} netlists, worst relative node error {worst_err:e}; {}", failures.join("; ")),
        ),
        Check::new(
            "kcl",
            ok && kcl_ok,
            format!("worst relative imbalance {worst_kcl:e}"),
        ),
        Check::new(
            "power_balance",
            ok && worst_power <= 1e-8,
            format!("worst relative mismatch {worst_power:e}"),
        ),
    ]
}

fn bias_exactness() -> Check {
    let sel = Cell::new(0, 0);
    let p2 = apply_bias(&BiasSpec {
        scheme_n: 2,
        v_dd: 2.6,
        selected: sel,
        polarity: WriteOp::Set,
    });
    let p3 = apply_bias(&BiasSpec {
        scheme_n: 3,
        v_dd: 3.0,
        selected: sel,
        polarity: WriteOp::Set,
    });
    let ok = (p2.swl, p2.sbl, p2.uwl, p2.ubl) == (2.6, 0.0, 1.3, 1.3) && (p3.swl, p3.sbl, p3.uwl, p3.ubl) == (3.0, 0.0, 1.0, 2.0);
    Check::new("bias_exactness", ok, format!("V/2 {p2:?}; V/3 {p3:?}"))
}

fn wire_derivation() -> Check {
    let (r, c) = TechBlock::default().wire_params();
    let ok = (r - 2.81).abs() < 1e-12 && format!("{c:.3}") == "0.046";
    Check::new("wire_derivation", ok, format!("r_wire {r} ohm, c_wire {c} fF"))
}

fn eec_identity() -> Check {
    let rec = |i: usize, success: bool| CycleRecord {
        cycle: i,
        wav: 0.0,
        success,
        energy: 1e-12 * (i + 1) as f64,
    };
    let all: Vec<_> = (0..4).map(|i| rec(i, true)).collect();
    let half: Vec<_> = (0..4).map(|i| rec(i, i % 2 == 0)).collect();
    let none: Vec<_> = (0..4).map(|i| rec(i, false)).collect();
    // Mean energy 2.5 pJ.
    let close = |r: crate::Result<f64, _>, want: f64| r.map(|e| (e - want).abs() <= 1e-15 * want).unwrap_or(false);
    let ok = close(eec(&all), 2.5e-12)
        && close(eec(&half), 5e-12)
        && eec(&none).is_err();
    Check::new("eec_identity", ok, "mean/(1-wfp) on synthetic records".into())
}

fn determinism_and_linearity() -> Vec<Check> {
    let scn = Scenario {
        array: ArrayConfig::square(6),
        ..Scenario::default()
    };
    let mc = |workers| McConfig {
        cycles: 24,
        master_seed: 11,
        workers,
    };
    let run = |v_dd, workers| worst_case_records(&scn, 2, v_dd, &mc(workers));
    let (one, many, double) = match (run(2.0, 1), run(2.0, 4), run(4.0, 1)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => {
            let err = [a.err(), b.err(), c.err()].into_iter().flatten().next().unwrap();
            return vec![Check::new("determinism", false, err.to_string())];
        }
    };
    let worst_lin = one
        .iter()
        .zip(&double)
        .map(|(a, b)| (b.wav - 2.0 * a.wav).abs() / b.wav.abs())
        .fold(0.0, f64::max);
    let single = scn.array.with_size(1);
    let one_cell = Scenario {
        array: ArrayConfig { r_wire: 0.0, ..single },
        device: scn.device.nominal(),
        ..scn
    };
    let wav_1x1 = solve_worst_case(&one_cell, 2, 2.6, StreamKey::root(1)).map(|(_, r)| r.wav);
    vec![
        Check::new("determinism", one == many, "24 cycles at 1 and 4 workers".into()),
        Check::new("linearity", worst_lin <= 1e-9, format!("worst relative deviation {worst_lin:e}")),
        Check::new(
            "single_cell",
            wav_1x1.as_ref().map(|&v| v == 2.6).unwrap_or(false),
            format!("WAV {wav_1x1:?} at 2.6 V"),
        ),
    ]
}

/// Run every check.
pub fn run_selftest() -> Vec<Check> {
    let mut checks = oracle_and_conservation(100);
    checks.push(bias_exactness());
    checks.push(wire_derivation());
    checks.push(eec_identity());
    checks.extend(determinism_and_linearity());
    checks
}
