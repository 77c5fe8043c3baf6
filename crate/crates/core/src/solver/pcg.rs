//! Preconditioned conjugate gradient for the array conductance matrix.
//!
//! Unknowns are ordered word-line group first (row-major) then bit-line
//! group (column-major), so within each group the only couplings are wire
//! segments between consecutive unknowns. The preconditioner is a symmetric
//! block Gauss-Seidel sweep over the two groups with exact tridiagonal
//! solves for each group.

use super::csr::CsrMatrix;
use crate::error::SolverError;

/// `LDLᵀ` factors of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
struct Tridiagonal {
    /// `l[k]` multiplies `y[k-1]`; `l[0]` is unused.
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Tridiagonal {
    fn factor(diag: &[f64], sub: &[f64]) -> Self {
        let n = diag.len();
        let mut l = vec![0.0; n];
        let mut d = vec![0.0; n];
        for k in 0..n {
            if k == 0 || sub[k] == 0.0 {
                d[k] = diag[k];
            } else {
                l[k] = sub[k] / d[k - 1];
                d[k] = diag[k] - l[k] * sub[k];
            }
        }
        Tridiagonal { l, d }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for k in 1..n {
            x[k] -= self.l[k] * x[k - 1];
        }
        for k in 0..n {
            x[k] /= self.d[k];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            x[k] -= self.l[k + 1] * x[k + 1];
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockGaussSeidel {
    split: usize,
    wl: Tridiagonal,
    bl: Tridiagonal,
}

impl BlockGaussSeidel {
    /// `split` is the number of word-line unknowns.
    pub fn new(matrix: &CsrMatrix, split: usize) -> Self {
        let n = matrix.dim();
        let diag = matrix.diagonal();
        let mut sub = vec![0.0; n];
        for (k, s) in sub.iter_mut().enumerate().skip(1) {
            if (k < split) == (k - 1 < split) {
                *s = matrix.get(k, k - 1);
            }
        }
        debug_assert!((0..n).all(|i| matrix
            .row(i)
            .all(|(j, _)| (i < split) != (j < split) || i.abs_diff(j) <= 1)));
        BlockGaussSeidel {
            split,
            wl: Tridiagonal::factor(&diag[..split], &sub[..split]),
            bl: Tridiagonal::factor(&diag[split..], &sub[split..]),
        }
    }

    pub fn apply(&self, matrix: &CsrMatrix, r: &[f64], z: &mut [f64]) {
        let s = self.split;
        let n = r.len();
        z[..s].copy_from_slice(&r[..s]);
        self.wl.solve_in_place(&mut z[..s]);
        for i in s..n {
            let mut acc = r[i];
            for (j, v) in matrix.row(i) {
                if j < s {
                    acc -= v * z[j];
                }
            }
            z[i] = acc;
        }
        self.bl.solve_in_place(&mut z[s..]);
        for i in 0..s {
            let mut acc = r[i];
            for (j, v) in matrix.row(i) {
                if j >= s {
                    acc -= v * z[j];
                }
            }
            z[i] = acc;
        }
        self.wl.solve_in_place(&mut z[..s]);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `G x = b` to `‖b − G x‖ ≤ tol·‖b‖`, starting from `x`. If the
/// iteration stagnates first, a relative residual at or below `accept_tol`
/// is still returned as converged.
pub fn solve_pcg(
    matrix: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    split: usize,
    tol: f64,
    accept_tol: f64,
    max_iter: usize,
) -> Result<CgStats, SolverError> {
    let n = b.len();
    let b_norm = norm(b);
    if n == 0 {
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let pre = BlockGaussSeidel::new(matrix, split);
    let target = tol * b_norm;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64], scratch: &mut [f64]| {
        matrix.mul_vec(x, scratch);
        for i in 0..n {
            r[i] = b[i] - scratch[i];
        }
        norm(r)
    };
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut stalled_restarts = 0;
    loop {
        let res = true_residual(x, &mut r, &mut ap);
        if res <= target {
            return Ok(CgStats {
                iterations,
                relative_residual: res / b_norm,
            });
        }
        // Restarts that no longer improve the true residual mean the
        // floating-point floor has been reached.
        if res >= 0.5 * best {
            stalled_restarts += 1;
        } else {
            stalled_restarts = 0;
        }
        best = best.min(res);
        if stalled_restarts >= 3 && res <= accept_tol * b_norm {
            return Ok(CgStats {
                iterations,
                relative_residual: res / b_norm,
            });
        }
        if iterations >= max_iter || stalled_restarts >= 3 {
            return Err(SolverError::NonConvergence {
                iterations,
                residual: res / b_norm,
            });
        }
        pre.apply(matrix, &r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            iterations += 1;
            matrix.mul_vec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= target {
                break;
            }
            pre.apply(matrix, &r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}
