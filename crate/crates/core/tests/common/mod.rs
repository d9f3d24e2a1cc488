//! Checks shared by the property tests and the acceptance report. Each returns
//! the worst observed value of its metric, or a description of the first failure.

#![allow(dead_code)]

use fpp_core::caputo::discrete_caputo_scalar;
use fpp_core::forward::assemble_step_matrix;
use fpp_core::inverse::assemble_forward_operator;
use fpp_core::linalg::{apply_discrete_laplacian, grad_l2h_norm, inf_norm, inner_h};
use fpp_core::{
    l1_coefficients, tikhonov_solve, Coefficient, DenseMatrix, ForwardSolver, ManufacturedCase,
    ProblemConfig, Reconstructor, Source, SpaceGrid, TimeMesh, WeightTable,
};
use nalgebra::DMatrix;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct Draw(Xoshiro256PlusPlus);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    /// Integer in `lo..=hi`.
    pub fn index(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    num / inf_norm(b).max(f64::MIN_POSITIVE)
}

/// Smallest weight seen; fails on a non-positive weight or a decrease in `j`.
pub fn weights_positive_and_monotone(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let mut smallest = f64::INFINITY;
    for _ in 0..trials {
        let alpha = draw.uniform(0.05, 0.95);
        let steps = draw.index(1, 50);
        let r = draw.uniform(1.0, 4.0);
        let mesh = TimeMesh::graded(1.0, steps, r).map_err(|e| e.to_string())?;
        let table = WeightTable::new(&mesh, alpha).map_err(|e| e.to_string())?;
        for k in 1..=steps {
            let d = table.level(k).coefficients();
            if let Some(j) = d.windows(2).position(|p| p[0] > p[1]) {
                return Err(format!(
                    "alpha={alpha} M={steps} r={r} k={k}: d[{j}] > d[{}]",
                    j + 1
                ));
            }
            smallest = smallest.min(d[0]);
            if d[0] <= 0.0 {
                return Err(format!(
                    "alpha={alpha} M={steps} r={r} k={k}: d_1 = {}",
                    d[0]
                ));
            }
        }
    }
    Ok(smallest)
}

/// Most negative scaled gap `(δv·v_k − ½δ(v²)) / scale`.
pub fn coercivity(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let alpha = draw.uniform(0.05, 0.95);
        let steps = draw.index(1, 40);
        let r = draw.uniform(1.0, 4.0);
        let v = draw.vector(steps + 1, -10.0, 10.0);
        let mesh = TimeMesh::graded(1.0, steps, r).map_err(|e| e.to_string())?;
        let w = l1_coefficients(&mesh, alpha, steps).map_err(|e| e.to_string())?;
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        let lhs = discrete_caputo_scalar(&w, &v).map_err(|e| e.to_string())? * v[steps];
        let rhs = 0.5 * discrete_caputo_scalar(&w, &sq).map_err(|e| e.to_string())?;
        let scale = w.coefficients().iter().sum::<f64>() * 100.0 / w.gamma_2ma();
        let gap = (lhs - rhs) / scale;
        if gap < -1e-12 {
            return Err(format!(
                "alpha={alpha} M={steps} r={r}: lhs {lhs} < rhs {rhs}"
            ));
        }
        worst = worst.min(gap);
    }
    Ok(worst)
}

/// Largest relative gap between `(−L_h v, v)_h` and `‖∇_h v‖²`.
pub fn green_identity(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = draw.index(2, 200);
        let h = draw.uniform(0.1, 2.0) / n as f64;
        let v = draw.vector(n - 1, -1.0, 1.0);
        let lv: Vec<f64> = apply_discrete_laplacian(&v, h).iter().map(|x| -x).collect();
        let lhs = inner_h(&lv, &v, h);
        let rhs = grad_l2h_norm(&v, h).powi(2);
        let rel = (lhs - rhs).abs() / rhs;
        if rel > 1e-10 {
            return Err(format!("N={n}: relative gap {rel}"));
        }
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Smallest eigenvalue (relative to the diagonal) over random step matrices, by dense eigensolve.
pub fn step_matrices_spd(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let alpha = draw.uniform(0.05, 0.95);
        let n = draw.index(2, 20);
        let steps = draw.index(1, 30);
        let r = draw.uniform(1.0, 4.0);
        let mu0 = draw.uniform(0.0, 5.0);
        let config = ProblemConfig::new(
            alpha,
            SpaceGrid::new(1.0, n).unwrap(),
            TimeMesh::graded(1.0, steps, r).unwrap(),
            Coefficient::constant(mu0),
            Source::Zero,
        )
        .map_err(|e| e.to_string())?;
        let k = draw.index(1, steps);
        let w = l1_coefficients(config.mesh(), alpha, k).unwrap();
        let a = assemble_step_matrix(&config, k, &w)
            .map_err(|e| e.to_string())?
            .to_dense();
        let m = DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice());
        if (&m - m.transpose()).amax() > 0.0 {
            return Err(format!("asymmetric step matrix at n={n}"));
        }
        let min_eig = m.symmetric_eigenvalues().min();
        let rel = min_eig / m.diagonal().max();
        if rel <= 0.0 {
            return Err(format!(
                "alpha={alpha} n={n} k={k}: smallest eigenvalue {min_eig}"
            ));
        }
        worst = worst.min(rel);
    }
    Ok(worst)
}

/// Largest relative defect of superposition and of `u^M(φ; f) = F_h φ + g_h`.
pub fn superposition_and_splitting(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let alpha = draw.uniform(0.1, 0.9);
    let case = ManufacturedCase::unit(alpha);
    let config = case.config(40, 40, 1.0 + draw.uniform(0.0, 2.0)).unwrap();
    let solver = ForwardSolver::new(&config).unwrap();
    let op = assemble_forward_operator(&config).unwrap();
    let zero = vec![0.0; 39];
    let g = solver.terminal(&zero).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = draw.uniform(-3.0, 3.0);
        let p1 = draw.vector(39, -1.0, 1.0);
        let p2 = draw.vector(39, -1.0, 1.0);
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| a * x + y).collect();
        let lhs = solver.terminal(&mix).unwrap();
        let h1 = solver.terminal_homogeneous(&p1).unwrap();
        let f2 = solver.terminal(&p2).unwrap();
        let rhs: Vec<f64> = h1.iter().zip(&f2).map(|(x, y)| a * x + y).collect();
        let split: Vec<f64> = op
            .apply(&p2)
            .unwrap()
            .iter()
            .zip(&g)
            .map(|(x, y)| x + y)
            .collect();
        let defect = rel_diff(&lhs, &rhs).max(rel_diff(&split, &f2));
        if defect > 1e-12 {
            return Err(format!("relative defect {defect}"));
        }
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Filter-factor solution `Σ s_i/(s_i²+λ) (u_iᵀd) v_i`.
pub fn svd_filter_solution(a: &DMatrix<f64>, d: &[f64], lambda: f64) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut x = vec![0.0; a.ncols()];
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let coef =
            s / (s * s + lambda) * u.column(i).iter().zip(d).map(|(p, q)| p * q).sum::<f64>();
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * vt[(i, j)];
        }
    }
    x
}

/// Largest relative gap to the SVD filter oracle; fails if `‖x_λ‖` grows with `λ`.
pub fn tikhonov_svd_oracle(trials: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let data = draw.vector(400, -1.0, 1.0);
        let a = DMatrix::from_row_slice(20, 20, &data);
        let dense = DenseMatrix::from_row_major(20, 20, data).unwrap();
        let d = draw.vector(20, -1.0, 1.0);
        let lambda = 10f64.powf(draw.uniform(-4.0, 0.0));
        let ours = tikhonov_solve(&dense, &d, lambda).map_err(|e| e.to_string())?;
        let oracle = svd_filter_solution(&a, &d, lambda);
        let rel = rel_diff(&ours, &oracle);
        if rel > 1e-8 {
            return Err(format!("lambda={lambda}: relative gap {rel}"));
        }
        worst = worst.max(rel);

        let mut last = f64::INFINITY;
        for e in -6..=2 {
            let x = tikhonov_solve(&dense, &d, 10f64.powi(e)).map_err(|e| e.to_string())?;
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > last * (1.0 + 1e-12) {
                return Err(format!("norm grew from {last} to {norm} at lambda=1e{e}"));
            }
            last = norm;
        }
    }
    Ok(worst)
}

/// Max nodal error when the data come from the same discrete forward map.
pub fn inverse_crime(alpha: f64, n: usize, seed: u64) -> Result<f64, String> {
    let mut draw = Draw::new(seed);
    let case = ManufacturedCase::unit(alpha);
    let config = case.config(n, n, 1.0).unwrap();
    let rec = Reconstructor::new(&config).map_err(|e| e.to_string())?;
    let u0: Vec<f64> = config
        .grid()
        .sample(|x| case.initial(x))
        .into_iter()
        .map(|v| v + draw.uniform(-0.1, 0.1))
        .collect();
    let psi = rec.solver().terminal(&u0).unwrap();
    let res = rec
        .reconstruct(&psi, 1e-12, Some(&u0))
        .map_err(|e| e.to_string())?;
    let err = res.initial_error.unwrap().inf;
    if err >= 1e-6 {
        return Err(format!("inverse-crime error {err}"));
    }
    Ok(err)
}
