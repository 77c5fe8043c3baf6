use super::{assemble_solution, solve, stamp, stamp_with, NodeMap, NodeRole, SolveOptions, Solution};
use crate::array::{ArrayNetlist, BranchKind, Terminal};
use crate::device::{device_conductance, device_current, DeviceModelParams};
use crate::error::SolverError;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStats {
    pub iterations: usize,
    /// `‖F‖₂` after each accepted step, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub last_update: f64,
}

/// Net current leaving each free unknown.
fn kcl_residual(net: &ArrayNetlist, params: &DeviceModelParams, map: &NodeMap, x: &[f64]) -> Vec<f64> {
    let v = map.expand(x);
    let mut f = vec![0.0; map.unknowns()];
    for br in net.branches() {
        let va = v[br.a];
        let vb = match br.b {
            Terminal::Node(b) => v[b],
            Terminal::Source(s) => s,
        };
        let i = match br.kind {
            BranchKind::Device(c) => device_current(&net.cells()[c], va - vb, params),
            _ if br.resistance == 0.0 => continue,
            _ => (va - vb) / br.resistance,
        };
        if let NodeRole::Free(u) = map.role(br.a) {
            f[u] += i;
        }
        if let Terminal::Node(b) = br.b {
            if let NodeRole::Free(u) = map.role(b) {
                f[u] -= i;
            }
        }
    }
    f
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton solve for nonlinear device I-V, started from the linear
/// (small-signal) solution. A step is halved until the KCL residual does not
/// increase.
pub fn solve_nonlinear(net: &ArrayNetlist, params: &DeviceModelParams, opts: &SolveOptions) -> Result<Solution, SolverError> {
    let linear = stamp(net)?;
    let map = linear.map.clone();
    let (mut x, st) = solve(&linear, opts, None)?;
    let mut cg_iterations = st.iterations;
    let mut f_norm = norm(&kcl_residual(net, params, &map, &x));
    let mut stats = NewtonStats {
        iterations: 0,
        residual_history: vec![f_norm],
        last_update: f64::INFINITY,
    };
    if map.unknowns() == 0 {
        stats.last_update = 0.0;
        let v = map.expand(&x);
        return Ok(assemble_solution(net, params, v, cg_iterations, Some(stats)));
    }
    let (n, m) = (net.rows(), net.cols());
    let mut g = vec![0.0; n * m];
    let mut i_eq = vec![0.0; n * m];
    while stats.iterations < opts.max_newton_iter {
        stats.iterations += 1;
        let v = map.expand(&x);
        for i in 0..n {
            for j in 0..m {
                let k = i * m + j;
                let drop = v[net.wl(i, j)] - v[net.bl(i, j)];
                let cell = &net.cells()[k];
                g[k] = device_conductance(cell, drop, params);
                i_eq[k] = device_current(cell, drop, params) - g[k] * drop;
            }
        }
        let system = stamp_with(net, &g, &i_eq)?;
        let (x_new, st) = solve(&system, opts, Some(&x))?;
        cg_iterations += st.iterations;
        let delta: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let full_update = delta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1.0 / 1024.0 {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            let f_trial = norm(&kcl_residual(net, params, &map, &trial));
            if f_trial <= f_norm {
                accepted = Some((trial, f_trial));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, f_trial)) => {
                x = trial;
                f_norm = f_trial;
                stats.residual_history.push(f_norm);
                stats.last_update = lambda * full_update;
            }
            // The full step is already below tolerance: the residual is at
            // its rounding floor and the current iterate stands.
            None if full_update < opts.newton_tol_v => {
                stats.last_update = full_update;
            }
            None => {
                return Err(SolverError::Nonlinear {
                    iterations: stats.iterations,
                    residual: f_norm,
                    update: full_update,
                })
            }
        }
        if stats.last_update < opts.newton_tol_v {
            let v = map.expand(&x);
            return Ok(assemble_solution(net, params, v, cg_iterations, Some(stats)));
        }
    }
    Err(SolverError::Nonlinear {
        iterations: stats.iterations,
        residual: f_norm,
        update: stats.last_update,
    })
}
