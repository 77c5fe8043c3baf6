//! Cross-point array construction: configuration, data patterns, bias
//! potentials and the resistive netlist.
//!
//! Cells are addressed 0-based as `(row, col)`. Word line `row` runs along
//! the row and is driven from its column-0 end; bit line `col` runs down the
//! column and is driven from its row-0 end. The cell farthest from both
//! drivers is therefore `(rows-1, cols-1)`.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceModel, SampledCell, StateLabel, WriteOp};
use crate::error::ConfigError;
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Topology {
    Full,
    /// Pseudo-sub-array: every `period`-th word line and bit line is made of
    /// pristine insulating cells.
    Psa { period: usize },
}

impl Topology {
    pub fn label(&self) -> String {
        match self {
            Topology::Full => "full".to_string(),
            Topology::Psa { period } => format!("psa{period}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Ω per cell segment.
    pub r_wire: f64,
    /// F per cell segment.
    pub c_wire: f64,
    /// Driver series resistance, Ω.
    pub r_source: f64,
    pub topology: Topology,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        let (r_wire, c_wire) = wire_params_from_tech(44e-9, 1.405, 1.045e-9);
        ArrayConfig {
            rows: 64,
            cols: 64,
            r_wire,
            c_wire,
            r_source: 0.0,
            topology: Topology::Full,
        }
    }
}

impl ArrayConfig {
    pub fn square(n: usize) -> Self {
        ArrayConfig {
            rows: n,
            cols: n,
            ..ArrayConfig::default()
        }
    }

    pub fn with_size(self, n: usize) -> Self {
        ArrayConfig {
            rows: n,
            cols: n,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(ConfigError::invariant("array must have at least one row and column"));
        }
        for (name, v) in [
            ("r_wire", self.r_wire),
            ("c_wire", self.c_wire),
            ("r_source", self.r_source),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invariant(format!("{name} must be finite and >= 0")));
            }
        }
        if let Topology::Psa { period } = self.topology {
            if period < 2 || period > self.rows.min(self.cols) {
                return Err(ConfigError::invariant(
                    "PSA period must satisfy 2 <= p <= min(rows, cols)",
                ));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn is_masked(&self, cell: Cell) -> bool {
        match self.topology {
            Topology::Full => false,
            Topology::Psa { period } => (cell.row + 1) % period == 0 || (cell.col + 1) % period == 0,
        }
    }

    pub fn net_capacity(&self) -> usize {
        self.cell_count() - psa_mask(self).len()
    }
}

/// Per-cell wire resistance and capacitance for a line of width `pitch/2`.
/// `cap_per_length` is in F/m.
pub fn wire_params_from_tech(pitch: f64, sheet_res: f64, cap_per_length: f64) -> (f64, f64) {
    let width = pitch / 2.0;
    let squares = pitch / width;
    (squares * sheet_res, cap_per_length * pitch)
}

/// Insulating positions of a PSA topology (empty for a full array).
pub fn psa_mask(config: &ArrayConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    if let Topology::Psa { .. } = config.topology {
        for row in 0..config.rows {
            for col in 0..config.cols {
                let c = Cell::new(row, col);
                if config.is_masked(c) {
                    out.push(c);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPattern {
    rows: usize,
    cols: usize,
    cells: Vec<StateLabel>,
}

impl DataPattern {
    pub fn filled(rows: usize, cols: usize, state: StateLabel) -> Self {
        DataPattern {
            rows,
            cols,
            cells: vec![state; rows * cols],
        }
    }

    /// Fill the working cells with `state` and mask the rest.
    pub fn for_config(config: &ArrayConfig, state: StateLabel) -> Self {
        let mut p = DataPattern::filled(config.rows, config.cols, state);
        for c in psa_mask(config) {
            p.set(c, StateLabel::Insulating);
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, cell: Cell) -> StateLabel {
        self.cells[cell.row * self.cols + cell.col]
    }

    pub fn set(&mut self, cell: Cell, state: StateLabel) {
        self.cells[cell.row * self.cols + cell.col] = state;
    }

    pub fn states(&self) -> &[StateLabel] {
        &self.cells
    }

    pub fn count(&self, state: StateLabel) -> usize {
        self.cells.iter().filter(|&&s| s == state).count()
    }

    /// Checks dimensions and that insulating cells sit exactly on the mask.
    pub fn check_against(&self, config: &ArrayConfig) -> Result<(), ConfigError> {
        if self.rows != config.rows || self.cols != config.cols {
            return Err(ConfigError::invariant(format!(
                "pattern is {}x{} but the array is {}x{}",
                self.rows, self.cols, config.rows, config.cols
            )));
        }
        for row in 0..self.rows {
            for col in 0..self.cols {
                let c = Cell::new(row, col);
                let insulating = self.get(c) == StateLabel::Insulating;
                if insulating != config.is_masked(c) {
                    return Err(ConfigError::invariant(format!(
                        "cell ({row}, {col}) insulating state does not match the topology mask"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One row per line, `1`/`0`/`X` for LRS/HRS/insulating.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() + self.rows);
        for row in self.cells.chunks(self.cols) {
            for st in row {
                s.push(st.as_char());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        let rows = lines.len();
        if rows == 0 {
            return Err(ConfigError::invariant("pattern text is empty"));
        }
        let cols = lines[0].chars().count();
        let mut cells = Vec::with_capacity(rows * cols);
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(ConfigError::invariant(format!(
                    "pattern row {} has {} cells, expected {cols}",
                    r + 1,
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let st = StateLabel::from_char(ch).ok_or_else(|| {
                    ConfigError::invariant(format!(
                        "invalid pattern character {ch:?} at row {}, column {}",
                        r + 1,
                        c + 1
                    ))
                })?;
                cells.push(st);
            }
        }
        Ok(DataPattern { rows, cols, cells })
    }
}

/// Worst case for a write: the working cell farthest from both drivers is
/// HRS and every other working cell is LRS.
pub fn worst_case_pattern(config: &ArrayConfig) -> (DataPattern, Cell) {
    let row = (0..config.rows)
        .rev()
        .find(|&r| !config.is_masked(Cell::new(r, 0)))
        .unwrap_or(0);
    let col = (0..config.cols)
        .rev()
        .find(|&c| !config.is_masked(Cell::new(0, c)))
        .unwrap_or(0);
    let selected = Cell::new(row, col);
    let mut pattern = DataPattern::for_config(config, StateLabel::Lrs);
    pattern.set(selected, StateLabel::Hrs);
    (pattern, selected)
}

/// Random data with exactly `round(sparsity × working cells)` LRS cells.
pub fn random_pattern<R: Rng + ?Sized>(
    config: &ArrayConfig,
    sparsity: f64,
    rng: &mut R,
) -> Result<DataPattern, ConfigError> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(ConfigError::invariant("sparsity must lie in [0, 1]"));
    }
    let mut pattern = DataPattern::for_config(config, StateLabel::Hrs);
    let working: Vec<usize> = pattern
        .cells
        .iter()
        .enumerate()
        .filter(|(_, s)| **s != StateLabel::Insulating)
        .map(|(i, _)| i)
        .collect();
    let ones = (sparsity * working.len() as f64).round() as usize;
    for k in rand::seq::index::sample(rng, working.len(), ones) {
        pattern.cells[working[k]] = StateLabel::Lrs;
    }
    Ok(pattern)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSpec {
    /// The `n` of a V/n scheme.
    pub scheme_n: u32,
    pub v_dd: f64,
    pub selected: Cell,
    pub polarity: WriteOp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePotentials {
    pub swl: f64,
    pub sbl: f64,
    pub uwl: f64,
    pub ubl: f64,
}

impl LinePotentials {
    pub fn min(&self) -> f64 {
        self.swl.min(self.sbl).min(self.uwl).min(self.ubl)
    }

    pub fn max(&self) -> f64 {
        self.swl.max(self.sbl).max(self.uwl).max(self.ubl)
    }
}

pub fn apply_bias(bias: &BiasSpec) -> LinePotentials {
    let k = bias.scheme_n as f64;
    let low = bias.v_dd / k;
    let high = (k - 1.0) * bias.v_dd / k;
    match bias.polarity {
        WriteOp::Set => LinePotentials {
            swl: bias.v_dd,
            sbl: 0.0,
            uwl: low,
            ubl: high,
        },
        WriteOp::Reset => LinePotentials {
            swl: 0.0,
            sbl: bias.v_dd,
            uwl: high,
            ubl: low,
        },
    }
}

/// What a branch of the netlist represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Wire,
    /// Device branch of the cell with this linear index.
    Device(usize),
    /// Driver of word line `i`.
    WordLineSource(usize),
    /// Driver of bit line `j`.
    BitLineSource(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    Node(usize),
    /// Ideal source at a fixed potential.
    Source(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub kind: BranchKind,
    pub a: usize,
    pub b: Terminal,
    /// Ω; zero only for a source branch that pins its node.
    pub resistance: f64,
}

/// Resistive netlist of one array instance.
///
/// Node `wl(i, j)` sits on word line `i` at column `j`; node `bl(i, j)` on bit
/// line `j` at row `i`. Each driver reaches its first cell through
/// `r_source + r_wire` (the driver sits one wire segment from the array edge).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayNetlist {
    rows: usize,
    cols: usize,
    r_wire: f64,
    c_wire: f64,
    r_source: f64,
    cells: Vec<SampledCell>,
    bias: BiasSpec,
    potentials: LinePotentials,
}

impl ArrayNetlist {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn r_wire(&self) -> f64 {
        self.r_wire
    }

    pub fn c_wire(&self) -> f64 {
        self.c_wire
    }

    pub fn r_source(&self) -> f64 {
        self.r_source
    }

    /// Resistance from a driver to the first node of its line.
    pub fn lead_resistance(&self) -> f64 {
        self.r_source + self.r_wire
    }

    pub fn node_count(&self) -> usize {
        2 * self.rows * self.cols
    }

    pub fn wl(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn bl(&self, row: usize, col: usize) -> usize {
        self.rows * self.cols + row * self.cols + col
    }

    pub fn cells(&self) -> &[SampledCell] {
        &self.cells
    }

    pub fn cell(&self, cell: Cell) -> &SampledCell {
        &self.cells[cell.row * self.cols + cell.col]
    }

    pub fn set_cell(&mut self, cell: Cell, sampled: SampledCell) {
        let cols = self.cols;
        self.cells[cell.row * cols + cell.col] = sampled;
    }

    pub fn bias(&self) -> &BiasSpec {
        &self.bias
    }

    pub fn selected(&self) -> Cell {
        self.bias.selected
    }

    pub fn potentials(&self) -> LinePotentials {
        self.potentials
    }

    pub fn set_bias(&mut self, bias: BiasSpec) -> Result<(), ConfigError> {
        check_bias(&bias, self.rows, self.cols)?;
        if self.cell(bias.selected).state == StateLabel::Insulating {
            return Err(ConfigError::invariant("selected cell is insulating"));
        }
        self.potentials = apply_bias(&bias);
        self.bias = bias;
        Ok(())
    }

    pub fn wl_source(&self, row: usize) -> f64 {
        if row == self.bias.selected.row {
            self.potentials.swl
        } else {
            self.potentials.uwl
        }
    }

    pub fn bl_source(&self, col: usize) -> f64 {
        if col == self.bias.selected.col {
            self.potentials.sbl
        } else {
            self.potentials.ubl
        }
    }

    /// Enumerate every branch: wires, devices, then sources.
    pub fn branches(&self) -> Vec<Branch> {
        let (n, m) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(n * (m - 1) + m * (n - 1) + n * m + n + m);
        for i in 0..n {
            for j in 0..m.saturating_sub(1) {
                out.push(Branch {
                    kind: BranchKind::Wire,
                    a: self.wl(i, j),
                    b: Terminal::Node(self.wl(i, j + 1)),
                    resistance: self.r_wire,
                });
            }
        }
        for j in 0..m {
            for i in 0..n.saturating_sub(1) {
                out.push(Branch {
                    kind: BranchKind::Wire,
                    a: self.bl(i, j),
                    b: Terminal::Node(self.bl(i + 1, j)),
                    resistance: self.r_wire,
                });
            }
        }
        for i in 0..n {
            for j in 0..m {
                out.push(Branch {
                    kind: BranchKind::Device(i * m + j),
                    a: self.wl(i, j),
                    b: Terminal::Node(self.bl(i, j)),
                    resistance: self.cells[i * m + j].resistance,
                });
            }
        }
        for i in 0..n {
            out.push(Branch {
                kind: BranchKind::WordLineSource(i),
                a: self.wl(i, 0),
                b: Terminal::Source(self.wl_source(i)),
                resistance: self.lead_resistance(),
            });
        }
        for j in 0..m {
            out.push(Branch {
                kind: BranchKind::BitLineSource(j),
                a: self.bl(0, j),
                b: Terminal::Source(self.bl_source(j)),
                resistance: self.lead_resistance(),
            });
        }
        out
    }
}

fn check_bias(bias: &BiasSpec, rows: usize, cols: usize) -> Result<(), ConfigError> {
    if bias.scheme_n < 2 {
        return Err(ConfigError::invariant("bias scheme V/n requires n >= 2"));
    }
    if !bias.v_dd.is_finite() {
        return Err(ConfigError::invariant("v_dd must be finite"));
    }
    if bias.selected.row >= rows || bias.selected.col >= cols {
        return Err(ConfigError::invariant("selected cell is outside the array"));
    }
    Ok(())
}

/// Build the netlist, sampling every cell from its own stream `key.child(index)`.
pub fn build_netlist(
    config: &ArrayConfig,
    pattern: &DataPattern,
    model: &DeviceModel,
    key: StreamKey,
    bias: &BiasSpec,
) -> Result<ArrayNetlist, ConfigError> {
    let cells = pattern
        .states()
        .iter()
        .enumerate()
        .map(|(idx, &state)| {
            if state == StateLabel::Insulating {
                SampledCell {
                    state,
                    resistance: model.params().r_insulating,
                }
            } else {
                model.sample_cell(state, &mut key.child(idx as u64).rng())
            }
        })
        .collect();
    netlist_from_cells(config, pattern, cells, bias)
}

/// Build the netlist from already-sampled cells.
pub fn netlist_from_cells(
    config: &ArrayConfig,
    pattern: &DataPattern,
    cells: Vec<SampledCell>,
    bias: &BiasSpec,
) -> Result<ArrayNetlist, ConfigError> {
    config.validate()?;
    if pattern.rows() != config.rows || pattern.cols() != config.cols {
        return Err(ConfigError::invariant(format!(
            "pattern is {}x{} but the array is {}x{}",
            pattern.rows(),
            pattern.cols(),
            config.rows,
            config.cols
        )));
    }
    if cells.len() != config.cell_count() {
        return Err(ConfigError::invariant("cell count does not match the array"));
    }
    check_bias(bias, config.rows, config.cols)?;
    if pattern.get(bias.selected) == StateLabel::Insulating {
        return Err(ConfigError::invariant("selected cell is insulating"));
    }
    Ok(ArrayNetlist {
        rows: config.rows,
        cols: config.cols,
        r_wire: config.r_wire,
        c_wire: config.c_wire,
        r_source: config.r_source,
        cells,
        bias: *bias,
        potentials: apply_bias(bias),
    })
}

/// Render a pattern with the selected cell marked, for debugging.
pub fn describe_pattern(pattern: &DataPattern, selected: Cell) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}x{} selected=({}, {})", pattern.rows(), pattern.cols(), selected.row, selected.col);
    s.push_str(&pattern.to_text());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceModelParams;
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    fn set_bias(k: u32, v: f64, sel: Cell) -> BiasSpec {
        BiasSpec {
            scheme_n: k,
            v_dd: v,
            selected: sel,
            polarity: WriteOp::Set,
        }
    }

    #[test]
    fn tech_params() {
        let (r, c) = wire_params_from_tech(44e-9, 1.405, 1.045e-9);
        assert_eq!(r, 2.81);
        assert_eq!((c * 1e15 * 1000.0).round() / 1000.0, 0.046);
        let (r0, c0) = wire_params_from_tech(44e-9, 0.0, 1.045e-9);
        assert_eq!(r0, 0.0);
        assert_eq!(c0, 1.045e-9 * 44e-9);
        let (r2, c2) = wire_params_from_tech(88e-9, 1.405, 1.045e-9);
        assert_eq!(r2, 2.81);
        assert_eq!((c2 * 1e15 * 1000.0).round() / 1000.0, 0.092);
    }

    #[test]
    fn bias_equations() {
        let p = apply_bias(&set_bias(2, 2.6, Cell::new(0, 0)));
        assert_eq!((p.swl, p.sbl, p.uwl, p.ubl), (2.6, 0.0, 1.3, 1.3));
        let p = apply_bias(&set_bias(3, 3.0, Cell::new(0, 0)));
        assert_eq!((p.swl, p.sbl, p.uwl, p.ubl), (3.0, 0.0, 1.0, 2.0));
        let p = apply_bias(&set_bias(5, 0.0, Cell::new(0, 0)));
        assert_eq!((p.swl, p.sbl, p.uwl, p.ubl), (0.0, 0.0, 0.0, 0.0));
        let p = apply_bias(&BiasSpec {
            polarity: WriteOp::Reset,
            ..set_bias(3, 3.0, Cell::new(0, 0))
        });
        assert_eq!((p.swl, p.sbl, p.uwl, p.ubl), (0.0, 3.0, 2.0, 1.0));
    }

    #[test]
    fn worst_case_small_and_large() {
        let (p, sel) = worst_case_pattern(&ArrayConfig::square(2));
        assert_eq!(sel, Cell::new(1, 1));
        assert_eq!(p.get(sel), StateLabel::Hrs);
        assert_eq!(p.count(StateLabel::Lrs), 3);
        let (p, sel) = worst_case_pattern(&ArrayConfig::square(64));
        assert_eq!(sel, Cell::new(63, 63));
        assert_eq!(p.count(StateLabel::Lrs), 4095);
    }

    #[test]
    fn worst_case_psa_is_max_working_cell() {
        let cfg = ArrayConfig {
            topology: Topology::Psa { period: 8 },
            ..ArrayConfig::square(64)
        };
        let (p, sel) = worst_case_pattern(&cfg);
        let best = (0..64)
            .flat_map(|r| (0..64).map(move |c| Cell::new(r, c)))
            .filter(|&c| !cfg.is_masked(c))
            .max_by_key(|c| (c.row + c.col, c.row))
            .unwrap();
        assert_eq!(sel, best);
        assert_eq!(sel, Cell::new(62, 62));
        assert_eq!(p.get(sel), StateLabel::Hrs);
        p.check_against(&cfg).unwrap();
    }

    #[test]
    fn psa_mask_counts() {
        let cfg = ArrayConfig {
            topology: Topology::Psa { period: 2 },
            ..ArrayConfig::square(4)
        };
        let mask = psa_mask(&cfg);
        assert_eq!(mask.len(), 12);
        assert_eq!(cfg.net_capacity(), 4);
        assert!(mask.iter().all(|c| c.row % 2 == 1 || c.col % 2 == 1));
        let cfg = ArrayConfig {
            topology: Topology::Psa { period: 8 },
            ..ArrayConfig::square(256)
        };
        assert_eq!(psa_mask(&cfg).len(), 256 * 32 + 32 * 256 - 32 * 32);
        assert_eq!(cfg.net_capacity(), 50176);
    }

    #[test]
    fn psa_period_bounds() {
        let mut cfg = ArrayConfig {
            topology: Topology::Psa { period: 1 },
            ..ArrayConfig::square(4)
        };
        assert!(cfg.validate().is_err());
        cfg.topology = Topology::Psa { period: 5 };
        assert!(cfg.validate().is_err());
        cfg.topology = Topology::Psa { period: 4 };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn random_pattern_exact_count() {
        let cfg = ArrayConfig::square(256);
        let mut rng = Pcg64Mcg::seed_from_u64(9);
        let p = random_pattern(&cfg, 0.5, &mut rng).unwrap();
        assert_eq!(p.count(StateLabel::Lrs), 32768);
        let p = random_pattern(&ArrayConfig::square(8), 0.0, &mut rng).unwrap();
        assert_eq!(p.count(StateLabel::Hrs), 64);
        let p = random_pattern(&ArrayConfig::square(8), 1.0, &mut rng).unwrap();
        assert_eq!(p.count(StateLabel::Lrs), 64);
        assert!(random_pattern(&cfg, 1.5, &mut rng).is_err());
    }

    #[test]
    fn branch_counts_small() {
        let model = DeviceModel::new(DeviceModelParams::default()).unwrap();
        for (n, wires) in [(1usize, 0usize), (2, 4)] {
            let cfg = ArrayConfig::square(n);
            let (p, sel) = worst_case_pattern(&cfg);
            let net = build_netlist(&cfg, &p, &model, StreamKey::root(1), &set_bias(2, 2.0, sel)).unwrap();
            let br = net.branches();
            let count = |f: fn(&BranchKind) -> bool| br.iter().filter(|b| f(&b.kind)).count();
            assert_eq!(count(|k| matches!(k, BranchKind::Wire)), wires);
            assert_eq!(count(|k| matches!(k, BranchKind::Device(_))), n * n);
            assert_eq!(
                count(|k| matches!(k, BranchKind::WordLineSource(_) | BranchKind::BitLineSource(_))),
                2 * n
            );
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let model = DeviceModel::new(DeviceModelParams::default()).unwrap();
        let cfg = ArrayConfig::square(4);
        let p = DataPattern::filled(3, 4, StateLabel::Lrs);
        let err = build_netlist(&cfg, &p, &model, StreamKey::root(1), &set_bias(2, 2.0, Cell::new(0, 0)));
        assert!(err.is_err());
    }

    #[test]
    fn insulating_selection_rejected() {
        let model = DeviceModel::new(DeviceModelParams::default()).unwrap();
        let cfg = ArrayConfig {
            topology: Topology::Psa { period: 2 },
            ..ArrayConfig::square(4)
        };
        let (p, _) = worst_case_pattern(&cfg);
        let err = build_netlist(&cfg, &p, &model, StreamKey::root(1), &set_bias(2, 2.0, Cell::new(1, 1)));
        assert!(err.is_err());
    }

    #[test]
    fn pattern_text_format() {
        let text = "10X\n011\n";
        let p = DataPattern::from_text(text).unwrap();
        assert_eq!(p.get(Cell::new(0, 2)), StateLabel::Insulating);
        assert_eq!(p.get(Cell::new(1, 0)), StateLabel::Hrs);
        assert_eq!(p.to_text(), text);
        assert!(DataPattern::from_text("10\n1\n").is_err());
        assert!(DataPattern::from_text("1a\n").is_err());
    }
}
