//! Sine-mode oracle for the continuous problem.
//!
//! Expanding in `e_k(x) = sin(kπx/l)` reduces the equation to scalar problems
//!
//! ```text
//! ∂_t^α u_k + μ(t) λ_k u_k' + λ_k u_k = f_k(t),   λ_k = (kπ/l)²,
//! ```
//!
//! whose solutions split as `u_k(t) = u_k(0) A_k(t) + B_k(t)`. Each mode is
//! marched with the scalar L1 scheme on its own fine graded mesh, independently
//! of the finite-difference grid, and the initial state is recovered
//! coefficient-wise as `(ψ_k - B_k(T)) / A_k(T)`.

use std::f64::consts::PI;

use crate::caputo::{gamma_positive, l1_kernel_mean};
use crate::error::{invalid, Error, Result};
use crate::forward::{Coefficient, ProblemConfig, Source};
use crate::mesh::{default_grading, TimeMesh};

/// Default quadrature resolution for sine coefficients.
pub const QUADRATURE_INTERVALS: usize = 2048;

/// Default number of retained modes.
pub const DEFAULT_MODES: usize = 20;

/// Composite Simpson weights on `n` (even) equal subintervals of `[0, l]`.
fn simpson_weights(n: usize, length: f64) -> Vec<f64> {
    let h = length / n as f64;
    (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Precomputed `(2/l) w_i sin(kπx_i/l)` for fast repeated projections.
#[derive(Debug, Clone)]
struct SineProjector {
    nodes: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl SineProjector {
    fn new(length: f64, modes: usize, intervals: usize) -> Result<Self> {
        if modes < 1 {
            return Err(invalid("need at least one mode"));
        }
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(invalid(format!(
                "Simpson quadrature needs an even interval count, got {intervals}"
            )));
        }
        let w = simpson_weights(intervals, length);
        let nodes: Vec<f64> = (0..=intervals)
            .map(|i| length * i as f64 / intervals as f64)
            .collect();
        let rows = (1..=modes)
            .map(|k| {
                nodes
                    .iter()
                    .zip(&w)
                    .map(|(&x, &wi)| 2.0 / length * wi * (k as f64 * PI * x / length).sin())
                    .collect()
            })
            .collect();
        Ok(Self { nodes, rows })
    }

    fn project(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(values).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `v_k = (2/l) ∫_0^l v(x) sin(kπx/l) dx` for `k = 1..=modes`, composite Simpson
/// on `intervals` (even) subintervals.
pub fn sine_coefficients(
    v: impl Fn(f64) -> f64,
    length: f64,
    modes: usize,
    intervals: usize,
) -> Result<Vec<f64>> {
    let p = SineProjector::new(length, modes, intervals)?;
    let values: Vec<f64> = p.nodes.iter().map(|&x| v(x)).collect();
    Ok(p.project(&values))
}

/// Sine coefficients from samples at `x_i = i l / n`, `i = 0..=n`, `n` even.
pub fn sine_coefficients_from_samples(
    samples: &[f64],
    length: f64,
    modes: usize,
) -> Result<Vec<f64>> {
    if samples.len() < 3 {
        return Err(invalid("need at least three samples"));
    }
    let p = SineProjector::new(length, modes, samples.len() - 1)?;
    Ok(p.project(samples))
}

/// One sine mode on the fine oracle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub k: usize,
    pub lambda_k: f64,
    pub times: Vec<f64>,
    /// `A_k(t)`: response to unit initial value, no forcing.
    pub homogeneous: Vec<f64>,
    /// `B_k(t)`: response to the forcing from zero.
    pub forced: Vec<f64>,
    pub u0_k: f64,
    pub a_k_t: f64,
    pub b_k_t: f64,
}

impl ModeSolution {
    /// `u_k(t_j) = u0_k A_k(t_j) + B_k(t_j)`.
    pub fn trajectory(&self) -> Vec<f64> {
        self.homogeneous
            .iter()
            .zip(&self.forced)
            .map(|(a, b)| self.u0_k * a + b)
            .collect()
    }
}

/// Shared inputs of the oracle: order, domain, coefficient, source, fine mesh.
#[derive(Debug, Clone)]
pub struct ModeOracle {
    alpha: f64,
    length: f64,
    mu: Coefficient,
    source: Source,
    mesh: TimeMesh,
    mu0: f64,
}

impl ModeOracle {
    /// Fine mesh with `fine_steps` levels and grading `max(1, (2-α)/α)`.
    pub fn new(config: &ProblemConfig, fine_steps: usize) -> Result<Self> {
        let alpha = config.alpha();
        let mesh = TimeMesh::graded(
            config.mesh().final_time(),
            fine_steps,
            default_grading(alpha),
        )?;
        let mu0 = mesh
            .times()
            .iter()
            .map(|&t| config.mu().eval(t))
            .fold(f64::INFINITY, f64::min);
        if !(mu0 > 0.0) {
            return Err(invalid(format!(
                "mode oracle needs mu bounded away from zero, min over mesh is {mu0}"
            )));
        }
        Ok(Self {
            alpha,
            length: config.grid().length(),
            mu: config.mu().clone(),
            source: config.source().clone(),
            mesh,
            mu0,
        })
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Smallest `μ` over the fine mesh nodes.
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn lambda(&self, k: usize) -> f64 {
        (k as f64 * PI / self.length).powi(2)
    }

    /// `exp(-∫_0^T ds/μ(s))` by composite Simpson on 2048 subintervals.
    pub fn gronwall_floor(&self) -> f64 {
        let n = 2048;
        let t_end = self.mesh.final_time();
        let w = simpson_weights(n, t_end);
        let integral: f64 = w
            .iter()
            .enumerate()
            .map(|(i, wi)| wi / self.mu.eval(t_end * i as f64 / n as f64))
            .sum();
        (-integral).exp()
    }

    /// `f_k(t_j)` for all fine times, modes `1..=modes`; `None` when `f ≡ 0`.
    fn forcing(&self, modes: usize) -> Result<Option<Vec<Vec<f64>>>> {
        if self.source.is_zero() {
            return Ok(None);
        }
        let p = SineProjector::new(self.length, modes, QUADRATURE_INTERVALS)?;
        let mut buf = vec![0.0; p.nodes.len()];
        let rows = self
            .mesh
            .times()
            .iter()
            .map(|&t| {
                for (b, &x) in buf.iter_mut().zip(&p.nodes) {
                    *b = self.source.eval(x, t);
                }
                p.project(&buf)
            })
            .collect();
        Ok(Some(rows))
    }

    /// Marches the scalar L1 scheme for several decoupled modes at once.
    ///
    /// `lambdas[i]` and `initial[i]` describe mode `i`; `forcing[j][i]` is its source at `t_j`.
    /// Returns `out[j][i]`.
    fn march(
        &self,
        lambdas: &[f64],
        initial: &[f64],
        forcing: Option<&[Vec<f64>]>,
    ) -> Vec<Vec<f64>> {
        let steps = self.mesh.steps();
        let beta = 1.0 - self.alpha;
        let inv_gamma = 1.0 / gamma_positive(2.0 - self.alpha);
        let width = lambdas.len();
        let mut states: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        states.push(initial.to_vec());
        let mut d = Vec::with_capacity(steps);
        let mut hist = vec![0.0; width];
        for k in 1..=steps {
            let tk = self.mesh.t(k);
            d.clear();
            d.extend(
                (1..=k).map(|j| l1_kernel_mean(tk - self.mesh.t(j - 1), self.mesh.tau(j), beta)),
            );
            let c0 = d[0] * inv_gamma;
            for (h, &u) in hist.iter_mut().zip(&states[0]) {
                *h = c0 * u;
            }
            for j in 1..k {
                let c = (d[j] - d[j - 1]) * inv_gamma;
                for (h, &u) in hist.iter_mut().zip(&states[j]) {
                    *h += c * u;
                }
            }
            let mu_over_tau = self.mu.eval(tk) / self.mesh.tau(k);
            let lead = d[k - 1] * inv_gamma;
            let prev = &states[k - 1];
            let next: Vec<f64> = (0..width)
                .map(|i| {
                    let lam = lambdas[i];
                    let f = forcing.map_or(0.0, |fr| fr[k][i]);
                    (hist[i] + f + mu_over_tau * lam * prev[i]) / (lead + (1.0 + mu_over_tau) * lam)
                })
                .collect();
            states.push(next);
        }
        states
    }

    /// Solves modes `1..=modes`, returning `A_k`, `B_k` trajectories; `u0_k` is left at zero.
    pub fn solve_modes(&self, modes: usize) -> Result<Vec<ModeSolution>> {
        if modes < 1 {
            return Err(invalid("need at least one mode"));
        }
        let lambdas: Vec<f64> = (1..=modes).map(|k| self.lambda(k)).collect();
        let forcing = self.forcing(modes)?;
        // First half: homogeneous responses from 1; second half: forced responses from 0.
        let mut lam2 = lambdas.clone();
        lam2.extend_from_slice(&lambdas);
        let mut init = vec![1.0; modes];
        init.extend(std::iter::repeat_n(0.0, modes));
        let forcing2: Option<Vec<Vec<f64>>> = forcing.map(|rows| {
            rows.into_iter()
                .map(|r| {
                    let mut full = vec![0.0; modes];
                    full.extend(r);
                    full
                })
                .collect()
        });
        let states = self.march(&lam2, &init, forcing2.as_deref());
        let steps = self.mesh.steps();
        Ok((0..modes)
            .map(|i| {
                let homogeneous: Vec<f64> = states.iter().map(|s| s[i]).collect();
                let forced: Vec<f64> = states.iter().map(|s| s[modes + i]).collect();
                ModeSolution {
                    k: i + 1,
                    lambda_k: lambdas[i],
                    times: self.mesh.times().to_vec(),
                    a_k_t: homogeneous[steps],
                    b_k_t: forced[steps],
                    homogeneous,
                    forced,
                    u0_k: 0.0,
                }
            })
            .collect())
    }

    /// Single mode `k` with initial coefficient `u0_k`.
    pub fn solve_mode(&self, k: usize, u0_k: f64) -> Result<ModeSolution> {
        if k < 1 {
            return Err(invalid("mode index starts at 1"));
        }
        let lam = self.lambda(k);
        let forcing = self.forcing(k)?.map(|rows| {
            rows.into_iter()
                .map(|r| vec![0.0, r[k - 1]])
                .collect::<Vec<_>>()
        });
        let states = self.march(&[lam, lam], &[1.0, 0.0], forcing.as_deref());
        let homogeneous: Vec<f64> = states.iter().map(|s| s[0]).collect();
        let forced: Vec<f64> = states.iter().map(|s| s[1]).collect();
        let steps = self.mesh.steps();
        Ok(ModeSolution {
            k,
            lambda_k: lam,
            times: self.mesh.times().to_vec(),
            a_k_t: homogeneous[steps],
            b_k_t: forced[steps],
            homogeneous,
            forced,
            u0_k,
        })
    }

    /// Residual of the mode equation along `sol`'s trajectory, using the L1
    /// Caputo operator and a second-order backward derivative, maximised over
    /// fine nodes in `[T/2, T]`.
    pub fn mode_residual(&self, sol: &ModeSolution) -> Result<f64> {
        let u = sol.trajectory();
        let f = match self.forcing(sol.k)? {
            Some(rows) => rows.iter().map(|r| r[sol.k - 1]).collect(),
            None => vec![0.0; u.len()],
        };
        let beta = 1.0 - self.alpha;
        let inv_gamma = 1.0 / gamma_positive(2.0 - self.alpha);
        let t = self.mesh.times();
        let half = self.mesh.final_time() / 2.0;
        let mut worst = 0.0f64;
        for k in 2..=self.mesh.steps() {
            if t[k] < half {
                continue;
            }
            let caputo: f64 = (1..=k)
                .map(|j| {
                    l1_kernel_mean(t[k] - t[j - 1], self.mesh.tau(j), beta) * (u[j] - u[j - 1])
                })
                .sum::<f64>()
                * inv_gamma;
            // three-point backward difference on a nonuniform mesh
            let (h1, h2) = (self.mesh.tau(k), self.mesh.tau(k - 1));
            let du = u[k] * (2.0 * h1 + h2) / (h1 * (h1 + h2)) - u[k - 1] * (h1 + h2) / (h1 * h2)
                + u[k - 2] * h1 / (h2 * (h1 + h2));
            let r = caputo + self.mu.eval(t[k]) * sol.lambda_k * du + sol.lambda_k * u[k] - f[k];
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }
}

/// Spectral reconstruction of the initial state.
#[derive(Debug, Clone)]
pub struct SpectralReconstruction {
    pub length: f64,
    pub modes: Vec<ModeSolution>,
    pub psi_coefficients: Vec<f64>,
}

impl SpectralReconstruction {
    /// Recovered sine coefficients `u0_k`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.u0_k).collect()
    }

    /// Evaluates the truncated series at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.u0_k * (m.k as f64 * PI * x / self.length).sin())
            .sum()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// `u0_k = (ψ_k - B_k(T)) / A_k(T)` for `k = 1..=modes`.
pub fn reconstruct_u0_spectral(
    psi: impl Fn(f64) -> f64,
    config: &ProblemConfig,
    modes: usize,
    fine_steps: usize,
) -> Result<SpectralReconstruction> {
    let oracle = ModeOracle::new(config, fine_steps)?;
    let length = config.grid().length();
    let psi_coefficients = sine_coefficients(psi, length, modes, QUADRATURE_INTERVALS)?;
    let mut sols = oracle.solve_modes(modes)?;
    for (sol, &pk) in sols.iter_mut().zip(&psi_coefficients) {
        if !(sol.a_k_t > 0.0) {
            return Err(Error::NonPositiveMode {
                mode: sol.k,
                value: sol.a_k_t,
            });
        }
        sol.u0_k = (pk - sol.b_k_t) / sol.a_k_t;
    }
    Ok(SpectralReconstruction {
        length,
        modes: sols,
        psi_coefficients,
    })
}
