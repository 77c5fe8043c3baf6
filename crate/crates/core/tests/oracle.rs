use std::time::Instant;

use rram_xbar::array::{build_netlist, random_pattern, ArrayConfig, ArrayNetlist, BiasSpec, Branch, Cell, Terminal};
use rram_xbar::device::{device_conductance, device_current, DeviceModel, DeviceModelParams, IvMode, WriteOp};
use rram_xbar::oracle::{dense_node_voltages, gaussian_elimination};
use rram_xbar::rng::StreamKey;
use rram_xbar::selftest::random_small_netlist;
use rram_xbar::solver::{solve_netlist, SolveOptions};

fn max_rel_error(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| if *b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() })
        .fold(0.0, f64::max)
}

#[test]
fn linear_solver_matches_dense_reference() {
    let params = DeviceModelParams::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let net = random_small_netlist(StreamKey::root(2024).child(i), 8).unwrap();
        let sol = solve_netlist(&net, &params, &SolveOptions::default()).unwrap();
        let want = dense_node_voltages(&net).expect("reference solvable");
        worst = worst.max(max_rel_error(&sol.node_voltages, &want));
    }
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn single_cell_is_a_voltage_divider() {
    let model = DeviceModel::new(DeviceModelParams::default().nominal()).unwrap();
    let cfg = ArrayConfig {
        r_wire: 10.0,
        r_source: 40.0,
        ..ArrayConfig::square(1)
    };
    let pattern = rram_xbar::array::DataPattern::for_config(&cfg, rram_xbar::device::StateLabel::Lrs);
    let bias = BiasSpec {
        scheme_n: 2,
        v_dd: 2.0,
        selected: Cell::new(0, 0),
        polarity: WriteOp::Set,
    };
    let net = build_netlist(&cfg, &pattern, &model, StreamKey::root(0), &bias).unwrap();
    let sol = solve_netlist(&net, model.params(), &SolveOptions::default()).unwrap();
    let r = net.cell(Cell::new(0, 0)).resistance;
    let want = 2.0 * r / (r + 100.0);
    assert!((sol.cell_drop(Cell::new(0, 0)) - want).abs() < 1e-12);
}

// Newton on the dense nodal equations, devices evaluated branch by branch.
fn dense_newton(net: &ArrayNetlist, params: &DeviceModelParams) -> Vec<f64> {
    let branches: Vec<Branch> = net.branches();
    let n = net.node_count();
    let mut v = dense_node_voltages(net).unwrap();
    for _ in 0..200 {
        let mut jac = vec![vec![0.0; n]; n];
        let mut f = vec![0.0; n];
        for br in &branches {
            let (va, vb, other) = match br.b {
                Terminal::Node(o) => (v[br.a], v[o], Some(o)),
                Terminal::Source(s) => (v[br.a], s, None),
            };
            let (i, g) = match br.kind {
                rram_xbar::array::BranchKind::Device(idx) => {
                    let cell = &net.cells()[idx];
                    (device_current(cell, va - vb, params), device_conductance(cell, va - vb, params))
                }
                _ => ((va - vb) / br.resistance, 1.0 / br.resistance),
            };
            f[br.a] += i;
            jac[br.a][br.a] += g;
            if let Some(o) = other {
                f[o] -= i;
                jac[o][o] += g;
                jac[br.a][o] -= g;
                jac[o][br.a] -= g;
            }
        }
        let dx = gaussian_elimination(jac, f).unwrap();
        let step = dx.iter().fold(0.0f64, |s, d| s.max(d.abs()));
        for (x, d) in v.iter_mut().zip(&dx) {
            *x -= d;
        }
        if step < 1e-14 {
            return v;
        }
    }
    panic!("reference Newton did not converge");
}

#[test]
fn sinh_solver_matches_dense_newton() {
    let params = DeviceModelParams {
        iv_mode: IvMode::Sinh { v0: 0.4 },
        ..DeviceModelParams::default()
    };
    let model = DeviceModel::new(params).unwrap();
    for (i, n) in [1usize, 2, 3, 4, 5, 6].into_iter().enumerate() {
        let cfg = ArrayConfig {
            r_source: 25.0,
            ..ArrayConfig::square(n)
        };
        let key = StreamKey::root(77).child(i as u64);
        let pattern = random_pattern(&cfg, 0.5, &mut key.child(0).rng()).unwrap();
        for k in [2, 3] {
            let bias = BiasSpec {
                scheme_n: k,
                v_dd: 3.0,
                selected: Cell::new(n - 1, n - 1),
                polarity: WriteOp::Set,
            };
            let net = build_netlist(&cfg, &pattern, &model, key.child(1), &bias).unwrap();
            let sol = solve_netlist(&net, &params, &SolveOptions::default()).unwrap();
            let want = dense_newton(&net, &params);
            let e = max_rel_error(&sol.node_voltages, &want);
            assert!(e <= 1e-8, "{n}x{n} V/{k}: {e:e}");
        }
    }
}
