//! Time marching of the fully discrete L1 / central-difference scheme.
//!
//! Each level solves the tridiagonal system
//!
//! ```text
//! (d_{k,k}/Γ(2-α) I - (1 + μ^k/τ_k) L_h) u^k = r^k + f^k - (μ^k/τ_k) L_h u^{k-1}
//! ```
//!
//! with `r^k` the L1 memory term.

use std::fmt;
use std::sync::Arc;

use crate::caputo::{accumulate_history, L1Weights, WeightTable};
use crate::error::{check_len, invalid, Result};
use crate::linalg::{
    grad_l2h_norm, l2h_norm, laplacian_into, solve_tridiagonal, StateVector, TridiagonalMatrix,
};
use crate::mesh::{SpaceGrid, TimeMesh};

/// Named time-dependent coefficient `μ(t)`.
#[derive(Clone)]
pub struct Coefficient {
    label: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Coefficient {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("const:{value:e}"), move |_| value)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({})", self.label)
    }
}

/// Source term `f(x, t)`; `Zero` skips sampling entirely.
#[derive(Clone)]
pub enum Source {
    Zero,
    Function {
        label: String,
        eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl Source {
    pub fn function(
        label: impl Into<String>,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Source::Function {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Function { eval, .. } => eval(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }

    /// Multiplies the source by a constant.
    pub fn scaled(&self, factor: f64) -> Source {
        match self {
            Source::Zero => Source::Zero,
            Source::Function { label, eval } => {
                let eval = Arc::clone(eval);
                Source::function(format!("{factor:e}*{label}"), move |x, t| {
                    factor * eval(x, t)
                })
            }
        }
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Source::Zero"),
            Source::Function { label, .. } => write!(f, "Source({label})"),
        }
    }
}

/// Everything the forward scheme needs.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    alpha: f64,
    grid: SpaceGrid,
    mesh: TimeMesh,
    mu: Coefficient,
    source: Source,
}

impl ProblemConfig {
    pub fn new(
        alpha: f64,
        grid: SpaceGrid,
        mesh: TimeMesh,
        mu: Coefficient,
        source: Source,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!(
                "fractional order must lie in (0,1), got {alpha}"
            )));
        }
        for &t in mesh.times() {
            let m = mu.eval(t);
            if !(m >= 0.0) || !m.is_finite() {
                return Err(invalid(format!(
                    "mu({t}) = {m} must be finite and nonnegative"
                )));
            }
        }
        Ok(Self {
            alpha,
            grid,
            mesh,
            mu,
            source,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn mu(&self) -> &Coefficient {
        &self.mu
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Same problem with `f ≡ 0`.
    pub fn homogeneous(&self) -> Self {
        self.with_source(Source::Zero)
    }

    pub fn with_source(&self, source: Source) -> Self {
        Self {
            source,
            ..self.clone()
        }
    }

    /// `μ^k = μ(t_k)`.
    pub fn mu_at(&self, k: usize) -> f64 {
        self.mu.eval(self.mesh.t(k))
    }

    /// `f^k`: the source sampled at interior nodes at `t_k`.
    pub fn source_at(&self, k: usize) -> StateVector {
        let t = self.mesh.t(k);
        self.grid.sample(|x| self.source.eval(x, t))
    }
}

/// Discrete trajectory `u^0..u^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn initial(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `A^k = d_{k,k}/Γ(2-α) I - (1 + μ^k/τ_k) L_h`.
pub fn assemble_step_matrix(
    config: &ProblemConfig,
    k: usize,
    weights: &L1Weights,
) -> Result<TridiagonalMatrix> {
    if k < 1 || k > config.mesh.steps() || weights.level() != k {
        return Err(invalid(format!(
            "step level {k} inconsistent with weights/mesh"
        )));
    }
    let h = config.grid.h();
    let c = 1.0 + config.mu_at(k) / config.mesh.tau(k);
    let diag = weights.leading() + 2.0 * c / (h * h);
    let off = -c / (h * h);
    TridiagonalMatrix::symmetric_constant(config.grid.interior_len(), diag, off)
}

fn step_rhs(
    history: &[f64],
    previous: &[f64],
    source: Option<&[f64]>,
    mu_over_tau: f64,
    h: f64,
    out: &mut [f64],
) {
    laplacian_into(previous, h, out);
    for (i, o) in out.iter_mut().enumerate() {
        *o = history[i] - mu_over_tau * *o;
    }
    if let Some(f) = source {
        for (o, fi) in out.iter_mut().zip(f) {
            *o += fi;
        }
    }
}

/// One time level: solves `A^k u^k = r^k + f^k - (μ^k/τ_k) L_h u^{k-1}`.
pub fn step(
    config: &ProblemConfig,
    k: usize,
    weights: &L1Weights,
    history: &[f64],
    previous: &[f64],
    source: &[f64],
) -> Result<StateVector> {
    let n = config.grid.interior_len();
    check_len(n, history.len())?;
    check_len(n, previous.len())?;
    check_len(n, source.len())?;
    let a = assemble_step_matrix(config, k, weights)?;
    let mut rhs = vec![0.0; n];
    let mu_over_tau = config.mu_at(k) / config.mesh.tau(k);
    step_rhs(
        history,
        previous,
        Some(source),
        mu_over_tau,
        config.grid.h(),
        &mut rhs,
    );
    solve_tridiagonal(&a, &rhs)
}

/// Forward solver with weights, step matrices and source samples precomputed.
///
/// Pure in `(config, u0)`; one instance may serve concurrent solves.
#[derive(Debug, Clone)]
pub struct ForwardSolver {
    config: ProblemConfig,
    weights: WeightTable,
    matrices: Vec<TridiagonalMatrix>,
    mu_over_tau: Vec<f64>,
    sources: Option<Vec<StateVector>>,
}

impl ForwardSolver {
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        let weights = WeightTable::new(&config.mesh, config.alpha)?;
        let steps = config.mesh.steps();
        let matrices = (1..=steps)
            .map(|k| assemble_step_matrix(config, k, weights.level(k)))
            .collect::<Result<Vec<_>>>()?;
        let mu_over_tau = (1..=steps)
            .map(|k| config.mu_at(k) / config.mesh.tau(k))
            .collect();
        let sources = if config.source.is_zero() {
            None
        } else {
            Some((1..=steps).map(|k| config.source_at(k)).collect())
        };
        Ok(Self {
            config: config.clone(),
            weights,
            matrices,
            mu_over_tau,
            sources,
        })
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    /// Full trajectory from `u0` with the configured source.
    pub fn solve(&self, u0: &[f64]) -> Result<Trajectory> {
        self.march(u0, self.sources.as_deref())
    }

    /// Full trajectory from `u0` with `f ≡ 0`.
    pub fn solve_homogeneous(&self, u0: &[f64]) -> Result<Trajectory> {
        self.march(u0, None)
    }

    /// Terminal state `u^M(u0; f)`.
    pub fn terminal(&self, u0: &[f64]) -> Result<StateVector> {
        Ok(self.solve(u0)?.states.pop().expect("nonempty"))
    }

    /// Terminal state `u^M(u0; 0)`.
    pub fn terminal_homogeneous(&self, u0: &[f64]) -> Result<StateVector> {
        Ok(self.solve_homogeneous(u0)?.states.pop().expect("nonempty"))
    }

    fn march(&self, u0: &[f64], sources: Option<&[StateVector]>) -> Result<Trajectory> {
        let n = self.config.grid.interior_len();
        check_len(n, u0.len())?;
        let steps = self.config.mesh.steps();
        let h = self.config.grid.h();
        let mut states: Vec<StateVector> = Vec::with_capacity(steps + 1);
        states.push(u0.to_vec());
        let mut hist = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for k in 1..=steps {
            accumulate_history(self.weights.level(k), &states, &mut hist)?;
            let f = sources.map(|s| s[k - 1].as_slice());
            step_rhs(
                &hist,
                &states[k - 1],
                f,
                self.mu_over_tau[k - 1],
                h,
                &mut rhs,
            );
            states.push(solve_tridiagonal(&self.matrices[k - 1], &rhs)?);
        }
        Ok(Trajectory {
            times: self.config.mesh.times().to_vec(),
            states,
        })
    }
}

/// Solves the forward problem from `u0`.
pub fn solve_forward(config: &ProblemConfig, u0: &[f64]) -> Result<Trajectory> {
    ForwardSolver::new(config)?.solve(u0)
}

/// Both sides of the discrete energy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    /// `max_k ‖u^k‖² + Σ τ_k ‖∇u^k‖² + max_k μ^k ‖∇u^k‖²`
    pub lhs: f64,
    /// `‖u^0‖² + Σ τ_k ‖f^k‖²`
    pub rhs: f64,
}

impl EnergyBalance {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

pub fn energy_balance(config: &ProblemConfig, trajectory: &Trajectory) -> Result<EnergyBalance> {
    let steps = config.mesh.steps();
    check_len(steps + 1, trajectory.states.len())?;
    let h = config.grid.h();
    let mut max_l2 = 0.0f64;
    let mut dissipation = 0.0;
    let mut max_mu_grad = 0.0f64;
    let mut forcing = 0.0;
    for (k, u) in trajectory.states.iter().enumerate() {
        let l2 = l2h_norm(u, h).powi(2);
        let grad = grad_l2h_norm(u, h).powi(2);
        max_l2 = max_l2.max(l2);
        max_mu_grad = max_mu_grad.max(config.mu_at(k) * grad);
        if k >= 1 {
            let tau = config.mesh.tau(k);
            dissipation += tau * grad;
            if !config.source.is_zero() {
                forcing += tau * l2h_norm(&config.source_at(k), h).powi(2);
            }
        }
    }
    Ok(EnergyBalance {
        lhs: max_l2 + dissipation + max_mu_grad,
        rhs: l2h_norm(trajectory.initial(), h).powi(2) + forcing,
    })
}
