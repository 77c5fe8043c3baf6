//! Nodal analysis of the array netlist.
//!
//! Driver nodes whose lead resistance is zero are pinned and eliminated into
//! the right-hand side. With zero wire resistance every line collapses to a
//! single node. Device branches are stamped from a per-device conductance
//! and companion current, which covers both the linear solve and each
//! Newton step of the nonlinear solve.

mod csr;
mod nonlinear;
mod pcg;

pub use csr::CsrMatrix;
pub use nonlinear::{solve_nonlinear, NewtonStats};
pub use pcg::{solve_pcg, CgStats};

use std::io::Write;

use crate::array::{ArrayNetlist, BranchKind, Cell, Terminal};
use crate::device::{device_current, DeviceModelParams, IvMode};
use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target of the linear solve.
    pub tol: f64,
    /// Residual accepted when the iteration stagnates above `tol`.
    pub accept_tol: f64,
    pub max_cg_iter: usize,
    /// Newton convergence threshold on the largest node update, V.
    pub newton_tol_v: f64,
    pub max_newton_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-15,
            accept_tol: 1e-10,
            max_cg_iter: 20_000,
            newton_tol_v: 1e-9,
            max_newton_iter: 100,
        }
    }
}

/// Where a netlist node lives in the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeRole {
    Free(usize),
    Pinned(f64),
}

/// Maps netlist nodes to unknowns.
#[derive(Debug, Clone)]
pub struct NodeMap {
    roles: Vec<NodeRole>,
    unknowns: usize,
    /// Unknowns `0..split` belong to word lines.
    split: usize,
}

impl NodeMap {
    pub fn new(net: &ArrayNetlist) -> Self {
        let (n, m) = (net.rows(), net.cols());
        let mut roles = vec![NodeRole::Pinned(0.0); 2 * n * m];
        let (unknowns, split);
        if net.r_wire() > 0.0 {
            for i in 0..n {
                for j in 0..m {
                    roles[net.wl(i, j)] = NodeRole::Free(i * m + j);
                    roles[net.bl(i, j)] = NodeRole::Free(n * m + j * n + i);
                }
            }
            unknowns = 2 * n * m;
            split = n * m;
        } else if net.r_source() > 0.0 {
            for i in 0..n {
                for j in 0..m {
                    roles[net.wl(i, j)] = NodeRole::Free(i);
                    roles[net.bl(i, j)] = NodeRole::Free(n + j);
                }
            }
            unknowns = n + m;
            split = n;
        } else {
            for i in 0..n {
                for j in 0..m {
                    roles[net.wl(i, j)] = NodeRole::Pinned(net.wl_source(i));
                    roles[net.bl(i, j)] = NodeRole::Pinned(net.bl_source(j));
                }
            }
            unknowns = 0;
            split = 0;
        }
        NodeMap {
            roles,
            unknowns,
            split,
        }
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn split(&self) -> usize {
        self.split
    }

    fn terminal(&self, t: Terminal) -> NodeRole {
        match t {
            Terminal::Node(k) => self.roles[k],
            Terminal::Source(v) => NodeRole::Pinned(v),
        }
    }

    /// Expand unknown values into per-node voltages.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.roles
            .iter()
            .map(|r| match *r {
                NodeRole::Free(u) => x[u],
                NodeRole::Pinned(v) => v,
            })
            .collect()
    }

    /// Reduce per-node voltages to unknown values.
    pub fn reduce(&self, voltages: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.unknowns];
        for (node, r) in self.roles.iter().enumerate() {
            if let NodeRole::Free(u) = *r {
                x[u] = voltages[node];
            }
        }
        x
    }
}

/// Reduced nodal system `G·v = b` over free unknowns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub map: NodeMap,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.map.unknowns()
    }

    /// Re-derive the source terms after a bias change. Valid for systems
    /// stamped by [`stamp`] (no companion currents).
    pub fn refresh_sources(&mut self, net: &ArrayNetlist) {
        self.map = NodeMap::new(net);
        self.rhs.fill(0.0);
        let lead = net.lead_resistance();
        if lead == 0.0 {
            return;
        }
        for i in 0..net.rows() {
            if let NodeRole::Free(u) = self.map.role(net.wl(i, 0)) {
                self.rhs[u] += net.wl_source(i) / lead;
            }
        }
        for j in 0..net.cols() {
            if let NodeRole::Free(u) = self.map.role(net.bl(0, j)) {
                self.rhs[u] += net.bl_source(j) / lead;
            }
        }
    }

    /// Apply a change `delta` in the conductance of the device at `cell`.
    pub fn update_device(&mut self, net: &ArrayNetlist, cell: Cell, delta: f64) {
        let a = self.map.role(net.wl(cell.row, cell.col));
        let b = self.map.role(net.bl(cell.row, cell.col));
        match (a, b) {
            (NodeRole::Free(u), NodeRole::Free(v)) => {
                if u != v {
                    self.matrix.add_to(u, u, delta);
                    self.matrix.add_to(v, v, delta);
                    self.matrix.add_to(u, v, -delta);
                    self.matrix.add_to(v, u, -delta);
                }
            }
            (NodeRole::Free(u), NodeRole::Pinned(pv)) => {
                self.matrix.add_to(u, u, delta);
                self.rhs[u] += delta * pv;
            }
            (NodeRole::Pinned(pv), NodeRole::Free(v)) => {
                self.matrix.add_to(v, v, delta);
                self.rhs[v] += delta * pv;
            }
            (NodeRole::Pinned(_), NodeRole::Pinned(_)) => {}
        }
    }
}

/// Stamp with linear device conductances `1/R`.
pub fn stamp(net: &ArrayNetlist) -> Result<LinearSystem, SolverError> {
    let g: Vec<f64> = net.cells().iter().map(|c| 1.0 / c.resistance).collect();
    let i_eq = vec![0.0; g.len()];
    stamp_with(net, &g, &i_eq)
}

/// Stamp with per-device conductance `g[k]` and companion current `i_eq[k]`
/// (the device current is `g·(v_wl − v_bl) + i_eq`).
pub fn stamp_with(net: &ArrayNetlist, g: &[f64], i_eq: &[f64]) -> Result<LinearSystem, SolverError> {
    let map = NodeMap::new(net);
    let dim = map.unknowns();
    let mut rhs = vec![0.0; dim];
    let mut triplets = Vec::with_capacity(4 * dim + 8);
    for br in net.branches() {
        let (cond, inj) = match br.kind {
            BranchKind::Device(k) => (g[k], i_eq[k]),
            _ if br.resistance == 0.0 => continue,
            _ => (1.0 / br.resistance, 0.0),
        };
        let a = map.role(br.a);
        let b = map.terminal(br.b);
        match (a, b) {
            (NodeRole::Free(u), NodeRole::Free(v)) => {
                if u != v {
                    triplets.push((u, u, cond));
                    triplets.push((v, v, cond));
                    triplets.push((u, v, -cond));
                    triplets.push((v, u, -cond));
                }
                rhs[u] -= inj;
                rhs[v] += inj;
            }
            (NodeRole::Free(u), NodeRole::Pinned(pv)) => {
                triplets.push((u, u, cond));
                rhs[u] += cond * pv - inj;
            }
            (NodeRole::Pinned(pv), NodeRole::Free(v)) => {
                triplets.push((v, v, cond));
                rhs[v] += cond * pv + inj;
            }
            (NodeRole::Pinned(_), NodeRole::Pinned(_)) => {}
        }
    }
    let matrix = CsrMatrix::from_triplets(dim, triplets);
    if let Some(node) = (0..dim).find(|&u| matrix.get(u, u) <= 0.0) {
        return Err(SolverError::Singular { node });
    }
    Ok(LinearSystem { matrix, rhs, map })
}

/// Solve the reduced system, warm-starting from `guess` when given.
pub fn solve(system: &LinearSystem, opts: &SolveOptions, guess: Option<&[f64]>) -> Result<(Vec<f64>, CgStats), SolverError> {
    let mut x = match guess {
        Some(g) if g.len() == system.dim() => g.to_vec(),
        _ => vec![0.0; system.dim()],
    };
    let stats = solve_pcg(
        &system.matrix,
        &system.rhs,
        &mut x,
        system.map.split(),
        opts.tol,
        opts.accept_tol,
        opts.max_cg_iter,
    )?;
    Ok((x, stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    rows: usize,
    cols: usize,
    pub node_voltages: Vec<f64>,
    /// Current from terminal `a` to terminal `b` of each branch, in the order
    /// of [`ArrayNetlist::branches`]. For a pinning source branch this is the
    /// net current the node delivers to the rest of the network, negated.
    pub branch_currents: Vec<f64>,
    /// Power dissipated in all resistive and device branches, W.
    pub total_power: f64,
    /// Power delivered by the drivers, W.
    pub source_power: f64,
    pub cg_iterations: usize,
    pub newton: Option<NewtonStats>,
}

impl Solution {
    pub fn v_wl(&self, row: usize, col: usize) -> f64 {
        self.node_voltages[row * self.cols + col]
    }

    pub fn v_bl(&self, row: usize, col: usize) -> f64 {
        self.node_voltages[self.rows * self.cols + row * self.cols + col]
    }

    pub fn cell_drop(&self, cell: Cell) -> f64 {
        self.v_wl(cell.row, cell.col) - self.v_bl(cell.row, cell.col)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Write `row,col,v_wl,v_bl,drop` for every cell, with 1-based addresses.
    pub fn write_voltage_map<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "v_wl", "v_bl", "drop"])?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (a, b) = (self.v_wl(i, j), self.v_bl(i, j));
                w.write_record([
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    format!("{a:e}"),
                    format!("{b:e}"),
                    format!("{:e}", a - b),
                ])?;
            }
        }
        w.flush()
    }
}

/// Recover branch currents and powers from node voltages.
pub fn assemble_solution(
    net: &ArrayNetlist,
    params: &DeviceModelParams,
    voltages: Vec<f64>,
    cg_iterations: usize,
    newton: Option<NewtonStats>,
) -> Solution {
    let branches = net.branches();
    let mut currents = vec![0.0; branches.len()];
    let mut node_out = vec![0.0; voltages.len()];
    let mut pinning = Vec::new();
    let mut total_power = 0.0;
    let mut source_power = 0.0;
    for (k, br) in branches.iter().enumerate() {
        let va = voltages[br.a];
        let vb = match br.b {
            Terminal::Node(b) => voltages[b],
            Terminal::Source(v) => v,
        };
        let i = match br.kind {
            BranchKind::Device(c) => device_current(&net.cells()[c], va - vb, params),
            _ if br.resistance == 0.0 => {
                pinning.push(k);
                continue;
            }
            _ => (va - vb) / br.resistance,
        };
        currents[k] = i;
        total_power += i * (va - vb);
        node_out[br.a] += i;
        match br.b {
            Terminal::Node(b) => node_out[b] -= i,
            Terminal::Source(v) => source_power += -i * v,
        }
    }
    // Shorted wire segments run away from the driver, so folding them from
    // the far end accumulates each line's draw at its driven node.
    for &k in pinning.iter().rev() {
        let br = &branches[k];
        if let Terminal::Node(b) = br.b {
            currents[k] = node_out[b];
            node_out[br.a] += node_out[b];
            node_out[b] = 0.0;
        }
    }
    // A pinning source supplies whatever the rest of the network draws from
    // its node.
    for k in pinning {
        let br = &branches[k];
        let Terminal::Source(v) = br.b else { continue };
        let supplied = node_out[br.a];
        currents[k] = -supplied;
        node_out[br.a] = 0.0;
        source_power += supplied * v;
    }
    Solution {
        rows: net.rows(),
        cols: net.cols(),
        node_voltages: voltages,
        branch_currents: currents,
        total_power,
        source_power,
        cg_iterations,
        newton,
    }
}

/// Linear solve of the netlist.
pub fn solve_linear(net: &ArrayNetlist, params: &DeviceModelParams, opts: &SolveOptions) -> Result<Solution, SolverError> {
    let system = stamp(net)?;
    let (x, stats) = solve(&system, opts, None)?;
    let voltages = system.map.expand(&x);
    Ok(assemble_solution(net, params, voltages, stats.iterations, None))
}

/// Linear solve of an already stamped (and possibly updated) system.
pub fn solve_prepared(
    net: &ArrayNetlist,
    params: &DeviceModelParams,
    system: &LinearSystem,
    opts: &SolveOptions,
    guess: Option<&[f64]>,
) -> Result<(Solution, Vec<f64>), SolverError> {
    let (x, stats) = solve(system, opts, guess)?;
    let voltages = system.map.expand(&x);
    Ok((assemble_solution(net, params, voltages, stats.iterations, None), x))
}

/// Solve in the device model's I-V mode.
pub fn solve_netlist(net: &ArrayNetlist, params: &DeviceModelParams, opts: &SolveOptions) -> Result<Solution, SolverError> {
    match params.iv_mode {
        IvMode::Linear => solve_linear(net, params, opts),
        IvMode::Sinh { .. } => solve_nonlinear(net, params, opts),
    }
}

/// Access voltage of the selected cell (positive under SET polarity).
pub fn wav(solution: &Solution, selected: Cell) -> f64 {
    solution.cell_drop(selected)
}

/// Write energy: dissipated power over the pulse, plus optionally a single
/// charge of every node's wire capacitance.
pub fn total_energy(solution: &Solution, t_pulse: f64, include_wire_cap: bool, net: &ArrayNetlist) -> f64 {
    let mut e = solution.total_power * t_pulse;
    if include_wire_cap {
        e += solution
            .node_voltages
            .iter()
            .map(|v| 0.5 * net.c_wire() * v * v)
            .sum::<f64>();
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KclReport {
    /// Largest `(|Σ I| − floor) / max |I|` over free nodes with non-zero
    /// incident current, clipped at zero.
    pub worst_relative: f64,
    /// Node where the worst ratio occurs.
    pub worst_node: usize,
    /// True if every free node meets `|Σ I| ≤ rel_tol·max|I| + floor`, where
    /// `floor` is the rounding bound of evaluating the branch currents.
    pub passed: bool,
}

/// Check Kirchhoff's current law at every free node.
pub fn check_kcl(net: &ArrayNetlist, solution: &Solution, rel_tol: f64) -> KclReport {
    let map = NodeMap::new(net);
    let branches = net.branches();
    let nodes = solution.node_voltages.len();
    let mut sum = vec![0.0; nodes];
    let mut max_abs = vec![0.0f64; nodes];
    let mut floor = vec![0.0; nodes];
    let v = &solution.node_voltages;
    for (br, &i) in branches.iter().zip(&solution.branch_currents) {
        let vb = match br.b {
            Terminal::Node(b) => v[b],
            Terminal::Source(s) => s,
        };
        let round = 4.0 * f64::EPSILON * (v[br.a].abs() + vb.abs()) / br.resistance.max(f64::MIN_POSITIVE)
            + 4.0 * f64::EPSILON * i.abs();
        let mut add = |node: usize, val: f64| {
            sum[node] += val;
            max_abs[node] = max_abs[node].max(val.abs());
            floor[node] += round;
        };
        add(br.a, i);
        if let Terminal::Node(b) = br.b {
            add(b, -i);
        }
    }
    // Supernodes aggregate every physical node on the line.
    let mut agg: std::collections::BTreeMap<usize, (f64, f64, f64, usize)> = Default::default();
    for node in 0..nodes {
        if let NodeRole::Free(u) = map.role(node) {
            let e = agg.entry(u).or_insert((0.0, 0.0, 0.0, node));
            e.0 += sum[node];
            e.1 = e.1.max(max_abs[node]);
            e.2 += floor[node];
        }
    }
    let mut report = KclReport {
        worst_relative: 0.0,
        worst_node: 0,
        passed: true,
    };
    for (_, (s, mx, fl, node)) in agg {
        if s.abs() > rel_tol * mx + fl {
            report.passed = false;
        }
        let excess = (s.abs() - fl).max(0.0);
        if mx > 0.0 && excess / mx > report.worst_relative {
            report.worst_relative = excess / mx;
            report.worst_node = node;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_netlist, worst_case_pattern, ArrayConfig, BiasSpec};
    use crate::device::{DeviceModel, WriteOp};
    use crate::rng::StreamKey;

    fn worst_net(cfg: &ArrayConfig, params: DeviceModelParams, k: u32, v: f64) -> ArrayNetlist {
        let model = DeviceModel::new(params).unwrap();
        let (p, sel) = worst_case_pattern(cfg);
        let bias = BiasSpec {
            scheme_n: k,
            v_dd: v,
            selected: sel,
            polarity: WriteOp::Set,
        };
        build_netlist(cfg, &p, &model, StreamKey::root(5), &bias).unwrap()
    }

    #[test]
    fn fully_pinned_1x1() {
        let cfg = ArrayConfig {
            r_wire: 0.0,
            ..ArrayConfig::square(1)
        };
        let params = DeviceModelParams::default();
        let net = worst_net(&cfg, params, 2, 2.0);
        let sys = stamp(&net).unwrap();
        assert_eq!(sys.dim(), 0);
        let sol = solve_linear(&net, &params, &SolveOptions::default()).unwrap();
        assert_eq!(wav(&sol, Cell::new(0, 0)), 2.0);
    }

    #[test]
    fn dimension_2x2_with_wires() {
        let cfg = ArrayConfig::square(2);
        let net = worst_net(&cfg, DeviceModelParams::default(), 2, 2.0);
        assert_eq!(stamp(&net).unwrap().dim(), 8);
    }

    #[test]
    fn decoupled_2x2() {
        let cfg = ArrayConfig {
            r_wire: 0.0,
            ..ArrayConfig::square(2)
        };
        let params = DeviceModelParams {
            r_lrs_median: 100e3,
            r_hrs_median: 1e6,
            ..DeviceModelParams::default()
        }
        .nominal();
        let net = worst_net(&cfg, params, 2, 2.0);
        let sol = solve_linear(&net, &params, &SolveOptions::default()).unwrap();
        assert_eq!(sol.cell_drop(Cell::new(1, 1)), 2.0);
        assert_eq!(sol.cell_drop(Cell::new(1, 0)), 1.0);
        assert_eq!(sol.cell_drop(Cell::new(0, 1)), 1.0);
        assert_eq!(sol.cell_drop(Cell::new(0, 0)), 0.0);
    }

    #[test]
    fn symmetric_stamp_16() {
        let net = worst_net(&ArrayConfig::square(16), DeviceModelParams::default(), 3, 3.0);
        let sys = stamp(&net).unwrap();
        assert_eq!(sys.matrix.asymmetry(), 0.0);
        for i in 0..sys.dim() {
            let off: f64 = sys.matrix.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
            assert!(off <= sys.matrix.get(i, i) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn energy_single_resistor() {
        let cfg = ArrayConfig {
            r_wire: 0.0,
            ..ArrayConfig::square(1)
        };
        let params = DeviceModelParams {
            r_lrs_median: 10e3,
            r_hrs_median: 100e3,
            r_insulating: 10e6,
            ..DeviceModelParams::default()
        }
        .nominal();
        let net = worst_net(&cfg, params, 2, 2.0);
        let sol = solve_linear(&net, &params, &SolveOptions::default()).unwrap();
        let e = total_energy(&sol, 50e-9, false, &net);
        assert!((e - 2.0e-12).abs() < 1e-24, "{e}");
        assert_eq!(total_energy(&sol, 0.0, false, &net), 0.0);
        assert!((sol.source_power - sol.total_power).abs() < 1e-20);
    }

    #[test]
    fn wire_cap_term_adds() {
        let net = worst_net(&ArrayConfig::square(4), DeviceModelParams::default(), 2, 2.0);
        let params = DeviceModelParams::default();
        let sol = solve_linear(&net, &params, &SolveOptions::default()).unwrap();
        let e0 = total_energy(&sol, 50e-9, false, &net);
        let e1 = total_energy(&sol, 50e-9, true, &net);
        let cap: f64 = sol.node_voltages.iter().map(|v| 0.5 * net.c_wire() * v * v).sum();
        assert!((e1 - e0 - cap).abs() <= 1e-12 * e1);
    }

    #[test]
    fn incremental_system_matches_fresh_stamp() {
        for cfg in [
            ArrayConfig::square(5),
            ArrayConfig { r_wire: 0.0, r_source: 50.0, ..ArrayConfig::square(5) },
            ArrayConfig { r_wire: 0.0, ..ArrayConfig::square(5) },
        ] {
            let params = DeviceModelParams::default();
            let mut net = worst_net(&cfg, params, 3, 3.0);
            let mut sys = stamp(&net).unwrap();
            let target = Cell::new(1, 2);
            net.set_bias(BiasSpec { scheme_n: 2, v_dd: 2.5, selected: target, polarity: WriteOp::Set }).unwrap();
            sys.refresh_sources(&net);
            let old = net.cell(target).resistance;
            let new = crate::device::SampledCell { resistance: 0.5 * old, ..*net.cell(target) };
            sys.update_device(&net, target, 1.0 / new.resistance - 1.0 / old);
            net.set_cell(target, new);
            let fresh = stamp(&net).unwrap();
            assert_eq!(sys.dim(), fresh.dim());
            for i in 0..sys.dim() {
                assert!((sys.rhs[i] - fresh.rhs[i]).abs() <= 1e-15 * fresh.rhs[i].abs().max(1e-12));
                for (j, v) in fresh.matrix.row(i) {
                    assert!((sys.matrix.get(i, j) - v).abs() <= 1e-12 * v.abs());
                }
            }
        }
    }

    #[test]
    fn power_balances_in_every_node_mode() {
        for cfg in [
            ArrayConfig::square(4),
            ArrayConfig { r_wire: 0.0, r_source: 50.0, ..ArrayConfig::square(4) },
            ArrayConfig { r_wire: 0.0, ..ArrayConfig::square(4) },
        ] {
            let params = DeviceModelParams::default();
            let net = worst_net(&cfg, params, 3, 3.0);
            let sol = solve_linear(&net, &params, &SolveOptions::default()).unwrap();
            assert!((sol.total_power - sol.source_power).abs() <= 1e-10 * sol.total_power, "{cfg:?}");
            assert!(check_kcl(&net, &sol, 1e-9).passed);
        }
    }

    #[test]
    fn voltage_map_csv() {
        let net = worst_net(&ArrayConfig::square(2), DeviceModelParams::default(), 2, 2.0);
        let sol = solve_linear(&net, &DeviceModelParams::default(), &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        sol.write_voltage_map(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("row,col,v_wl,v_bl,drop\n1,1,"));
        assert!(text.lines().last().unwrap().starts_with("2,2,"));
    }
}
