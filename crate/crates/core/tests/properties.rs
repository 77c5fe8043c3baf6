use proptest::prelude::*;

use rram_xbar::array::ArrayConfig;
use rram_xbar::device::DeviceModelParams;
use rram_xbar::experiments::{solve_worst_case, Scenario};
use rram_xbar::rng::StreamKey;
use rram_xbar::selftest::random_small_netlist;
use rram_xbar::solver::{solve_netlist, SolveOptions};

fn nominal(n: usize, r_wire: f64) -> Scenario {
    Scenario {
        array: ArrayConfig {
            r_wire,
            ..ArrayConfig::square(n)
        },
        device: DeviceModelParams::default().nominal(),
        ..Scenario::default()
    }
}

fn worst_wav(scn: &Scenario, k: u32) -> f64 {
    solve_worst_case(scn, k, 2.6, StreamKey::root(0)).unwrap().1.wav
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn node_voltages_scale_with_supply(seed in any::<u64>(), alpha in 0.1f64..10.0) {
        let key = StreamKey::root(seed);
        let base = random_small_netlist(key, 6).unwrap();
        let mut scaled = base.clone();
        let mut bias = *base.bias();
        bias.v_dd *= alpha;
        scaled.set_bias(bias).unwrap();
        let params = DeviceModelParams::default();
        let a = solve_netlist(&base, &params, &SolveOptions::default()).unwrap();
        let b = solve_netlist(&scaled, &params, &SolveOptions::default()).unwrap();
        let scale = a.node_voltages.iter().fold(0.0f64, |s, v| s.max(v.abs())) * alpha;
        for (x, y) in a.node_voltages.iter().zip(&b.node_voltages) {
            prop_assert!((alpha * x - y).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn wav_falls_with_size(n in 1usize..20, extra in 1usize..8, r_wire in 0.5f64..20.0, k in 2u32..4) {
        let small = worst_wav(&nominal(n, r_wire), k);
        let large = worst_wav(&nominal(n + extra, r_wire), k);
        prop_assert!(large <= small + 1e-12, "{n}: {small} vs {}: {large}", n + extra);
    }

    #[test]
    fn wav_falls_with_wire_resistance(n in 2usize..24, r in 0.0f64..10.0, dr in 0.1f64..10.0, k in 2u32..4) {
        let low = worst_wav(&nominal(n, r), k);
        let high = worst_wav(&nominal(n, r + dr), k);
        prop_assert!(high <= low + 1e-12);
        prop_assert!(low <= 2.6 + 1e-12);
    }

    #[test]
    fn nodes_stay_within_driver_range(seed in any::<u64>()) {
        let net = random_small_netlist(StreamKey::root(seed), 8).unwrap();
        let sol = solve_netlist(&net, &DeviceModelParams::default(), &SolveOptions::default()).unwrap();
        let p = net.potentials();
        let lo = p.swl.min(p.sbl).min(p.uwl).min(p.ubl);
        let hi = p.swl.max(p.sbl).max(p.uwl).max(p.ubl);
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        prop_assert!(sol.node_voltages.iter().all(|&v| v >= lo - slack && v <= hi + slack));
    }
}
