use fpp_core::experiment::TABLE_ALPHAS;
use fpp_core::{reconstruct_u0_spectral, ManufacturedCase, ModeOracle};

#[test]
fn manufactured_initial_state_is_recovered() {
    for alpha in [0.1, 0.5, 0.9] {
        let case = ManufacturedCase::unit(alpha);
        let config = case.config(200, 200, 1.0).unwrap();
        let rec = reconstruct_u0_spectral(|x| case.terminal(x), &config, 20, 10_000).unwrap();
        let worst = (0..=400)
            .map(|i| i as f64 / 400.0)
            .map(|x| (rec.eval(x) - case.initial(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "alpha {alpha}: {worst}");
        assert!(rec.coefficients()[1..].iter().all(|c| c.abs() < 1e-8));
    }
}

#[test]
fn homogeneous_response_bounded_by_floor_and_one() {
    for alpha in TABLE_ALPHAS {
        let config = ManufacturedCase::unit(alpha).config(20, 20, 1.0).unwrap();
        let oracle = ModeOracle::new(&config, 10_000).unwrap();
        let floor = oracle.gronwall_floor();
        assert!((floor - 0.5).abs() < 1e-10);
        for sol in oracle.solve_modes(20).unwrap() {
            assert!(
                sol.a_k_t >= floor - 1e-3 && sol.a_k_t <= 1.0,
                "alpha {alpha} k {}: {}",
                sol.k,
                sol.a_k_t
            );
        }
    }
}

#[test]
fn amplification_bounded_by_exponential() {
    let case = ManufacturedCase::unit(0.5);
    let config = case.config(50, 50, 1.0).unwrap();
    let bound = (1.0 / ModeOracle::new(&config, 4000).unwrap().mu0()).exp();
    let psi = |x: f64| case.terminal(x) + 0.1 * (3.0 * std::f64::consts::PI * x).sin();
    let rec = reconstruct_u0_spectral(psi, &config, 10, 4000).unwrap();
    for (sol, pk) in rec.modes.iter().zip(&rec.psi_coefficients) {
        assert!(1.0 / sol.a_k_t <= bound);
        assert!(sol.u0_k.abs() <= bound * (pk - sol.b_k_t).abs() + 1e-14);
    }
}

#[test]
fn mode_residual_shrinks_under_refinement() {
    let case = ManufacturedCase::unit(0.5);
    let config = case.config(20, 20, 1.0).unwrap();
    let residuals: Vec<f64> = [1000, 2000, 4000, 8000]
        .iter()
        .map(|&fine| {
            let oracle = ModeOracle::new(&config, fine).unwrap();
            let sol = oracle.solve_mode(1, 1.0).unwrap();
            oracle.mode_residual(&sol).unwrap()
        })
        .collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}
