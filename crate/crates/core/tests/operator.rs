mod common;

use common::{rel_diff, Draw};
use fpp_core::experiment::{run_cell, run_table2, Domain, Grading};
use fpp_core::inverse::forced_terminal;
use fpp_core::linalg::{dot, l2h_norm};
use fpp_core::{
    add_noise, assemble_forward_operator, default_grading, ForwardSolver, ManufacturedCase,
    ModeOracle, NoiseModel,
};

#[test]
fn operator_application_matches_forward_solve() {
    let mut draw = Draw::new(11);
    let config = ManufacturedCase::unit(0.4).config(60, 45, 2.0).unwrap();
    let op = assemble_forward_operator(&config).unwrap();
    let solver = ForwardSolver::new(&config).unwrap();
    for _ in 0..10 {
        let phi = draw.vector(59, -1.0, 1.0);
        let direct = solver.terminal_homogeneous(&phi).unwrap();
        assert!(rel_diff(&op.apply(&phi).unwrap(), &direct) < 1e-12);
    }
}

#[test]
fn operator_is_diagonal_in_sines_with_oracle_multipliers() {
    for alpha in [0.3, 0.7] {
        let config = ManufacturedCase::unit(alpha)
            .config(200, 200, default_grading(alpha))
            .unwrap();
        let op = assemble_forward_operator(&config).unwrap();
        let modes = ModeOracle::new(&config, 10_000)
            .unwrap()
            .solve_modes(5)
            .unwrap();
        for sol in &modes {
            let s = config
                .grid()
                .sample(|x| (sol.k as f64 * std::f64::consts::PI * x).sin());
            let fs = op.apply(&s).unwrap();
            let c = dot(&fs, &s) / dot(&s, &s);
            let scaled: Vec<f64> = s.iter().map(|v| c * v).collect();
            assert!(rel_diff(&fs, &scaled) < 1e-6, "alpha {alpha} k {}", sol.k);
            assert!(
                (c / sol.a_k_t - 1.0).abs() < 0.02,
                "alpha {alpha} k {}: {c} vs {}",
                sol.k,
                sol.a_k_t
            );
        }
    }
}

#[test]
fn forced_terminal_matches_oracle_forced_mode() {
    for alpha in [0.1, 0.5, 0.9] {
        let config = ManufacturedCase::unit(alpha)
            .config(200, 200, default_grading(alpha))
            .unwrap();
        let g = forced_terminal(&config).unwrap();
        let b1 = ModeOracle::new(&config, 10_000)
            .unwrap()
            .solve_modes(1)
            .unwrap()[0]
            .b_k_t;
        let expected = config
            .grid()
            .sample(|x| b1 * (std::f64::consts::PI * x).sin());
        let h = config.grid().h();
        let diff: Vec<f64> = g.iter().zip(&expected).map(|(a, b)| a - b).collect();
        let rel = l2h_norm(&diff, h) / l2h_norm(&expected, h);
        assert!(rel < 0.02, "alpha {alpha}: {rel}");
    }
}

#[test]
fn noise_has_requested_relative_size() {
    let config = ManufacturedCase::unit(0.5).config(100, 100, 1.0).unwrap();
    let case = ManufacturedCase::unit(0.5);
    let psi = config.grid().sample(|x| case.terminal(x));
    let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    for seed in 0..32 {
        let noisy = add_noise(&psi, &NoiseModel::new(0.01, seed).unwrap()).unwrap();
        let dev = noisy
            .iter()
            .zip(&psi)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let ratio = dev / norm;
        assert!((0.007..=0.013).contains(&ratio), "seed {seed}: {ratio}");
    }
}

#[test]
fn zero_noise_reduces_to_noise_free_errors() {
    let rows = run_table2(
        &[0.5],
        &[0.0],
        60,
        60,
        1e-6,
        9,
        Grading::Uniform,
        Domain::default(),
    )
    .unwrap();
    let direct = run_cell(ManufacturedCase::unit(0.5), 60, 60, 1.0, 1e-6, &[0.0], 123).unwrap();
    assert_eq!(rows[0].initial, direct[0].initial);
    assert_eq!(rows[0].terminal, direct[0].terminal);
    let sharp = run_cell(ManufacturedCase::unit(0.5), 60, 60, 1.0, 1e-10, &[0.0], 0).unwrap();
    assert!((rows[0].initial.l2h / sharp[0].initial.l2h - 1.0).abs() < 0.05);
}
