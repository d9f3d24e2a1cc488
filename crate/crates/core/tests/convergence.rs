use fpp_core::caputo::discrete_caputo_scalar;
use fpp_core::forward::energy_balance;
use fpp_core::linalg::l2h_norm;
use fpp_core::{default_grading, gamma, ForwardSolver, ManufacturedCase, TimeMesh, WeightTable};

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|p| (p[0] / p[1]).log2()).collect()
}

/// `max_k |δ_t^α v(t_k) − Γ(α+2) t_k|` for `v = t^{α+1}`.
fn caputo_error(alpha: f64, steps: usize, r: f64) -> f64 {
    let mesh = TimeMesh::graded(1.0, steps, r).unwrap();
    let table = WeightTable::new(&mesh, alpha).unwrap();
    let v: Vec<f64> = mesh.times().iter().map(|t| t.powf(alpha + 1.0)).collect();
    let g = gamma(alpha + 2.0).unwrap();
    (1..=steps)
        .map(|k| (discrete_caputo_scalar(table.level(k), &v[..=k]).unwrap() - g * mesh.t(k)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn caputo_consistency_order_on_graded_mesh() {
    // the observed order climbs towards 2 - α = 1.5 from below
    let errors: Vec<f64> = [256, 512, 1024, 2048]
        .iter()
        .map(|&m| caputo_error(0.5, m, 3.0))
        .collect();
    let p = orders(&errors);
    assert!(p.iter().all(|&o| o >= 1.48), "orders {p:?}");
    assert!(p.windows(2).all(|w| w[1] >= w[0]), "orders {p:?}");
}

/// `max_k ‖u^k − u(t_k)‖_{2,h}` for the manufactured case.
fn forward_error(alpha: f64, n: usize, r: f64) -> f64 {
    let case = ManufacturedCase::unit(alpha);
    let config = case.config(n, n, r).unwrap();
    let u0 = config.grid().sample(|x| case.initial(x));
    let traj = ForwardSolver::new(&config).unwrap().solve(&u0).unwrap();
    let h = config.grid().h();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let exact = config.grid().sample(|x| case.exact(x, t));
            let e: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
            l2h_norm(&e, h)
        })
        .fold(0.0, f64::max)
}

#[test]
fn forward_error_is_first_order_on_graded_mesh() {
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let r = default_grading(alpha);
        let errors: Vec<f64> = [25, 50, 100, 200]
            .iter()
            .map(|&n| forward_error(alpha, n, r))
            .collect();
        let p = orders(&errors);
        assert!(
            p.iter().all(|&o| (0.8..=1.3).contains(&o)),
            "alpha {alpha}: {p:?}"
        );
    }
}

#[test]
fn forward_error_sanity_bound() {
    let case = ManufacturedCase::unit(0.5);
    let config = case.config(100, 100, default_grading(0.5)).unwrap();
    let u0 = config.grid().sample(|x| case.initial(x));
    let traj = ForwardSolver::new(&config).unwrap().solve(&u0).unwrap();
    let worst = traj
        .times
        .iter()
        .zip(&traj.states)
        .flat_map(|(&t, u)| {
            let exact = config.grid().sample(|x| case.exact(x, t));
            u.iter()
                .zip(exact)
                .map(|(a, b)| (a - b).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-1, "{worst}");
}

#[test]
fn energy_ratio_is_refinement_robust() {
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let ratios: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| {
                let case = ManufacturedCase::unit(alpha);
                let config = case.config(n, n, default_grading(alpha)).unwrap();
                let u0 = config.grid().sample(|x| case.initial(x));
                let traj = ForwardSolver::new(&config).unwrap().solve(&u0).unwrap();
                energy_balance(&config, &traj).unwrap().ratio()
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 2.0, "alpha {alpha}: {ratios:?}");
    }
}
