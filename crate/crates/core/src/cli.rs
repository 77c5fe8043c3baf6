//! Command execution and result files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{load_config, ExperimentSpec, RunConfig};
use crate::error::{ConfigError, Error, Result};
use crate::experiments::{
    exp_bias_compare, exp_energy, exp_net_capacity, exp_psa_compare, exp_random_access, exp_sparsity, exp_wav_distribution,
    exp_wfp, exp_wire_scaling, solve_worst_case, write_capacity_csv, Provenance, Scenario,
};
use crate::rng::StreamKey;
use crate::selftest::{run_selftest, Check};

pub const COMMANDS: [&str; 10] = [
    "wav",
    "bias-compare",
    "wire-scaling",
    "wfp",
    "energy",
    "random-access",
    "sparsity",
    "psa",
    "capacity",
    "selftest",
];

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    /// `None` or `Some(0)` means machine parallelism.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub cycles: Option<usize>,
    pub emit_voltage_map: bool,
}

#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Failed selftest checks; empty for other commands.
    pub failed_checks: Vec<Check>,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 1,
        Error::Cycle { source, .. } => exit_code(source),
        _ => 2,
    }
}

/// Load or default the config for `command` and apply the overrides.
pub fn prepare_config(command: &str, opts: &RunOptions) -> Result<RunConfig> {
    let default = ExperimentSpec::for_command(command)
        .ok_or_else(|| ConfigError::invariant(format!("unknown command `{command}`")))?;
    let mut cfg = match &opts.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.experiment.name() != command {
                return Err(ConfigError::invariant(format!(
                    "config names experiment `{}` but the command is `{command}`",
                    cfg.experiment.name()
                ))
                .into());
            }
            cfg
        }
        None => RunConfig::for_experiment(default),
    };
    if let Some(seed) = opts.seed {
        cfg.mc.master_seed = seed;
    }
    if let Some(cycles) = opts.cycles {
        cfg.mc.cycles = cycles;
    }
    if let Some(out) = &opts.out {
        cfg.output.dir = out.display().to_string();
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let output_err = |e: std::io::Error| Error::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = BufWriter::new(File::create(path).map_err(output_err)?);
    body(&mut w).map_err(output_err)?;
    w.flush().map_err(output_err)
}

/// Scenario, scheme and supply of the debug voltage map.
fn map_point(cfg: &RunConfig) -> (Scenario, u32, f64) {
    let scn = cfg.scenario();
    let (k, v) = (cfg.scheme_n(), cfg.v_dd());
    match &cfg.experiment {
        ExperimentSpec::Wav(s) => (Scenario { array: scn.array.with_size(s.sizes[0]), ..scn }, k, v),
        ExperimentSpec::Energy(s) => (
            Scenario { array: scn.array.with_size(s.sizes[0]), ..scn },
            s.schemes[0],
            s.v_dd_points[0],
        ),
        _ => (scn, k, v),
    }
}

fn write_checks_csv<W: Write>(checks: &[Check], provenance: &Provenance, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} experiment=selftest", provenance.comment_line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "passed", "detail"])?;
    for c in checks {
        w.write_record([c.name.as_str(), if c.passed { "true" } else { "false" }, c.detail.as_str()])?;
    }
    w.flush()
}

/// Run one command and write its result files.
pub fn run(command: &str, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let cfg = prepare_config(command, opts)?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::Output {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let workers = opts.workers.unwrap_or(0);
    let scn = cfg.scenario();
    let mc = cfg.mc_with_workers(workers);
    let (k, v_dd) = (cfg.scheme_n(), cfg.v_dd());
    let seed = cfg.mc.master_seed;
    let provenance = Provenance::new(cfg.digest(), seed);
    let results_path = out_dir.join("results.csv");
    let mut files = vec![results_path.clone()];
    let mut failed_checks = Vec::new();
    let mut reported = json!({});

    let sweep = |mut r: crate::experiments::SweepResult| -> Result<Value> {
        r.provenance = provenance.clone();
        write_file(&results_path, |w| r.write_csv(w))?;
        Ok(serde_json::to_value(&r).expect("result serializes"))
    };

    let metrics = match &cfg.experiment {
        ExperimentSpec::Wav(s) => sweep(exp_wav_distribution(&scn, &s.sizes, k, v_dd, &mc)?)?,
        ExperimentSpec::BiasCompare(s) => sweep(exp_bias_compare(&scn, &s.schemes, v_dd, &mc)?)?,
        ExperimentSpec::WireScaling(s) => sweep(exp_wire_scaling(&scn, &s.multipliers, k, v_dd, &mc)?)?,
        ExperimentSpec::Wfp(s) => {
            let points = s.points.clone().unwrap_or_default();
            sweep(exp_wfp(&scn, s.axis, &points, &s.schemes, v_dd, &mc)?)?
        }
        ExperimentSpec::Energy(s) => sweep(exp_energy(&scn, &s.sizes, &s.schemes, &s.v_dd_points, &mc)?)?,
        ExperimentSpec::RandomAccess(s) => {
            let mut trace = exp_random_access(&scn, s.sparsity, &s.plan, k, v_dd, s.with_d2d, seed)?;
            trace.provenance = provenance.clone();
            write_file(&results_path, |w| trace.write_csv(w))?;
            let map_path = out_dir.join("energy_map.csv");
            write_file(&map_path, |w| trace.write_energy_map(w))?;
            files.push(map_path);
            let rows: Vec<usize> = trace.accesses.iter().map(|a| a.row).collect();
            if let (Some(&near), Some(&far)) = (rows.iter().min(), rows.iter().max()) {
                reported = json!({
                    "nearest_row": near,
                    "nearest_row_mean_wav_V": trace.mean_wav_in_row(near),
                    "farthest_row": far,
                    "farthest_row_mean_wav_V": trace.mean_wav_in_row(far),
                    "successful_writes": trace.accesses.iter().filter(|a| a.success).count(),
                });
            }
            serde_json::to_value(&trace).expect("trace serializes")
        }
        ExperimentSpec::Sparsity(s) => {
            let mut r = exp_sparsity(&scn, &s.sparsities, &s.plan, k, v_dd, s.with_d2d, seed, workers)?;
            let lowest = s.sparsities.iter().copied().fold(f64::INFINITY, f64::min);
            let ratios: Vec<Value> = s
                .sparsities
                .iter()
                .map(|&x| json!({"sparsity": x, "median_energy_over_lowest": r.energy_ratio(x, lowest)}))
                .collect();
            reported = json!({ "lowest_sparsity": lowest, "energy_ratios": ratios });
            r.sweep.provenance = provenance.clone();
            write_file(&results_path, |w| r.sweep.write_csv(w))?;
            serde_json::to_value(&r.sweep).expect("result serializes")
        }
        ExperimentSpec::Psa(s) => {
            let r = exp_psa_compare(&scn, &s.periods, &s.schemes, v_dd, &mc)?;
            let mut ratios = Vec::new();
            for &scheme in &s.schemes {
                let full = r.scheme(scheme).find(|p| p.topology.as_deref() == Some("full"));
                for p in r.scheme(scheme).filter(|p| p.topology.as_deref() != Some("full")) {
                    ratios.push(json!({
                        "scheme_n": scheme,
                        "topology": p.topology,
                        "eec_full_over_psa": full.and_then(|f| Some(f.eec? / p.eec?)),
                    }));
                }
            }
            reported = json!({ "eec_ratios": ratios });
            sweep(r)?
        }
        ExperimentSpec::Capacity(s) => {
            let mut results = Vec::new();
            for &topology in &s.topologies {
                let mut r = exp_net_capacity(&scn, topology, k, s.target_wfp, v_dd, &s.search, &mc)?;
                r.provenance = provenance.clone();
                results.push(r);
            }
            let best = results.iter().max_by_key(|r| r.net_capacity).map(|r| r.topology.clone());
            reported = json!({ "largest_net_capacity": best });
            write_file(&results_path, |w| write_capacity_csv(&results, &provenance, w))?;
            serde_json::to_value(&results).expect("result serializes")
        }
        ExperimentSpec::Selftest => {
            let checks = run_selftest();
            write_file(&results_path, |w| write_checks_csv(&checks, &provenance, w))?;
            failed_checks = checks.iter().filter(|c| !c.passed).cloned().collect();
            serde_json::to_value(&checks).expect("checks serialize")
        }
    };

    if opts.emit_voltage_map && !matches!(cfg.experiment, ExperimentSpec::Selftest) {
        let (scn, k, v) = map_point(&cfg);
        let (sol, _) = solve_worst_case(&scn, k, v, StreamKey::root(seed).child(0))?;
        let map_path = out_dir.join("voltage_map.csv");
        write_file(&map_path, |w| sol.write_voltage_map(w))?;
        files.push(map_path);
    }

    let summary = json!({
        "experiment": cfg.experiment.name(),
        "version": provenance.version,
        "config_sha256": provenance.config_sha256,
        "master_seed": seed,
        "config": cfg.echo(),
        "metrics": metrics,
        "reported": reported,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let summary_path = out_dir.join("summary.json");
    write_file(&summary_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        writeln!(w)
    })?;
    files.push(summary_path);
    Ok(RunReport {
        out_dir,
        files,
        failed_checks,
    })
}
