use rayon::ThreadPoolBuilder;

use rphash_core::asymptotics::{survival_above, survival_below};
use rphash_core::experiments::{
    estimate_collision_rate, survival_rate, sweep, sweep_cell, Predicate, SweepSpec,
};
use rphash_core::geometry::{polar_sine, squared_shortest_dual_diagonal};
use rphash_core::numint::{collision_prob_numeric, interior_mass_f};
use rphash_core::{Directions, HashFamilyParams, IndexMode, QuadratureSpec, TupleConfig};

fn z(p: f64, q: f64, trials: u64) -> f64 {
    (p - q) / (q * (1.0 - q) / trials as f64).sqrt()
}

#[test]
fn numeric_matches_monte_carlo_for_both_modes() {
    let config = TupleConfig::triple(-0.3, -0.25, -0.2).unwrap();
    let spec = QuadratureSpec::default();
    for (a, b) in [(2, 1), (1, 2), (1, 3)] {
        let mode = IndexMode::for_params(a, b).unwrap();
        let numeric = collision_prob_numeric(&config, a + b, mode, &spec).unwrap().p;
        let params = HashFamilyParams::new(3, a, b, 41).unwrap();
        let mc = estimate_collision_rate(&config, &params, 200_000).unwrap();
        assert!(z(mc.p_hat, numeric, mc.trials).abs() < 4.0, "({a},{b}) numeric {numeric} mc {}", mc.p_hat);
    }
}

#[test]
fn numeric_pair_matches_monte_carlo() {
    let config = TupleConfig::uniform(2, 0.6).unwrap();
    let numeric = collision_prob_numeric(&config, 4, IndexMode::MaxIndex, &QuadratureSpec::default())
        .unwrap()
        .p;
    let params = HashFamilyParams::new(2, 1, 3, 5).unwrap();
    let mc = estimate_collision_rate(&config, &params, 200_000).unwrap();
    assert!(z(mc.p_hat, numeric, mc.trials).abs() < 4.0, "numeric {numeric} mc {}", mc.p_hat);
}

#[test]
fn below_survival_matches_parallelepiped_mass() {
    let config = TupleConfig::uniform(3, -0.2).unwrap();
    let c = 0.4;
    let exact = interior_mass_f(&config, &[c; 3]).unwrap();
    let mc = survival_rate(&config, 3, Predicate::Below(c), 400_000, 3).unwrap();
    assert!(z(mc.p_hat, exact, mc.trials).abs() < 4.0, "exact {exact} mc {}", mc.p_hat);
    // small thresholds approach the closed form
    let small = 0.02;
    let closed = survival_below(polar_sine(&config), 3, small).unwrap();
    let exact = interior_mass_f(&config, &[small; 3]).unwrap();
    assert!((exact / closed - 1.0).abs() < 1e-3);
}

#[test]
fn above_survival_log_exponent_approaches_one() {
    let config = TupleConfig::uniform(3, -1.0 / 3.0).unwrap();
    let alpha = squared_shortest_dual_diagonal(&config).unwrap();
    let mut gaps = Vec::new();
    for (i, c) in [1.0, 1.75, 2.5].into_iter().enumerate() {
        let mc = survival_rate(&config, 3, Predicate::Above(c), 2_000_000, 100 + i as u64).unwrap();
        let lead = survival_above(alpha, 3, c).unwrap();
        gaps.push((mc.p_hat.ln() / lead.ln() - 1.0).abs());
    }
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn permuted_sweep_cells_agree() {
    let params = HashFamilyParams::new(6, 2, 1, 8).unwrap();
    let spec = SweepSpec { sigma: -2.0, grid_step: 0.1, params, trials: 100_000 };
    // (i, j) and (j, i) swap alpha and beta
    let x = sweep_cell(&spec, 1, -1).unwrap();
    let y = sweep_cell(&spec, -1, 1).unwrap();
    assert!((x.alpha - y.beta).abs() < 1e-12 && (x.gamma - y.gamma).abs() < 1e-12);
    let se = ((x.p_hat * (1.0 - x.p_hat) + y.p_hat * (1.0 - y.p_hat)) / x.trials as f64).sqrt();
    assert!((x.p_hat - y.p_hat).abs() < 4.0 * se, "{} vs {}", x.p_hat, y.p_hat);
}

#[test]
fn sweep_lists_skipped_cells_and_keeps_cell_seeds() {
    let params = HashFamilyParams::new(4, 1, 2, 2).unwrap();
    let spec = SweepSpec { sigma: -2.4, grid_step: 0.2, params, trials: 4_096 };
    let result = sweep(&spec).unwrap();
    let centre = result.centre().unwrap();
    assert_eq!(centre, &sweep_cell(&spec, 0, 0).unwrap());
    for row in &result.rows {
        assert!(row.alpha < 0.0 && row.beta < 0.0 && row.gamma < 0.0);
        assert!(((row.alpha + row.beta + row.gamma) * 2.0 - spec.sigma).abs() < 1e-12);
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let config = TupleConfig::uniform(3, -0.3).unwrap();
    let params = HashFamilyParams::new(9, 2, 2, 77).unwrap();
    let run = |threads| {
        ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_collision_rate(&config, &params, 30_000).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(5));
}

#[test]
fn gaussian_estimates_are_stable_in_dimension() {
    let config = TupleConfig::uniform(3, -0.4).unwrap();
    let trials = 100_000;
    let low = estimate_collision_rate(&config, &HashFamilyParams::new(3, 1, 2, 12).unwrap(), trials).unwrap();
    let high = estimate_collision_rate(&config, &HashFamilyParams::new(16, 1, 2, 13).unwrap(), trials).unwrap();
    let se = ((low.p_hat * (1.0 - low.p_hat) + high.p_hat * (1.0 - high.p_hat)) / trials as f64).sqrt();
    assert!((low.p_hat - high.p_hat).abs() < 4.0 * se, "{} vs {}", low.p_hat, high.p_hat);
}

#[test]
fn spherical_directions_approach_gaussian_with_dimension() {
    let config = TupleConfig::uniform(3, -0.4).unwrap();
    let trials = 100_000;
    let gaussian = estimate_collision_rate(&config, &HashFamilyParams::new(3, 2, 1, 21).unwrap(), trials).unwrap();
    let spherical = |d| {
        let params = HashFamilyParams::new(d, 2, 1, 22).unwrap().with_directions(Directions::Spherical);
        estimate_collision_rate(&config, &params, trials).unwrap().p_hat
    };
    let near = (spherical(200) - gaussian.p_hat).abs();
    let far = (spherical(4) - gaussian.p_hat).abs();
    assert!(near < far, "d=200 gap {near}, d=4 gap {far}");
}
