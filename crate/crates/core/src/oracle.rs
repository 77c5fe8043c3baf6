//! Dense reference solver for small arrays.
//!
//! Builds modified nodal equations straight from the branch list (node
//! voltages plus one current unknown per zero-resistance branch) and solves
//! them by Gaussian elimination with partial pivoting. It shares no code with
//! the sparse path beyond the netlist itself.

use crate::array::{ArrayNetlist, Terminal};

/// Solve the dense system `a·x = b` in place. Returns `None` if singular.
pub fn gaussian_elimination(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Node voltages of a linear netlist (devices at their small-signal resistance).
pub fn dense_node_voltages(net: &ArrayNetlist) -> Option<Vec<f64>> {
    let branches = net.branches();
    let nodes = net.node_count();
    let shorts: Vec<usize> = (0..branches.len())
        .filter(|&k| branches[k].resistance == 0.0)
        .collect();
    let dim = nodes + shorts.len();
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for br in &branches {
        if br.resistance == 0.0 {
            continue;
        }
        let g = 1.0 / br.resistance;
        a[br.a][br.a] += g;
        match br.b {
            Terminal::Node(o) => {
                a[o][o] += g;
                a[br.a][o] -= g;
                a[o][br.a] -= g;
            }
            Terminal::Source(v) => b[br.a] += g * v,
        }
    }
    for (s, &k) in shorts.iter().enumerate() {
        let row = nodes + s;
        let br = &branches[k];
        // Current unknown leaves node `a` through the short.
        a[br.a][row] += 1.0;
        a[row][br.a] = 1.0;
        match br.b {
            Terminal::Node(o) => {
                a[o][row] -= 1.0;
                a[row][o] = -1.0;
            }
            Terminal::Source(v) => b[row] = v,
        }
    }
    let x = gaussian_elimination(a, b)?;
    Some(x[..nodes].to_vec())
}
