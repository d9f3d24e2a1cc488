//! Backward reconstruction of the initial state from terminal data.
//!
//! The terminal state is affine in the initial vector, `u^M(φ; f) = F_h φ + g_h`,
//! where `F_h` is assembled column by column from impulse responses and
//! `g_h = u^M(0; f)`. The initial state is then recovered from the Tikhonov
//! normal equations `(F_hᵀF_h + λI) φ = F_hᵀ(ψ_h - g_h)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Error, Result};
use crate::forward::{ForwardSolver, ProblemConfig};
use crate::linalg::{inf_norm, l2h_norm, solve_spd_dense, DenseMatrix, StateVector};

/// Identifies the discretisation an operator was assembled for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub alpha: f64,
    pub intervals: usize,
    pub steps: usize,
    pub grading: f64,
    pub final_time: f64,
    pub length: f64,
    pub mu: String,
}

impl Fingerprint {
    pub fn of(config: &ProblemConfig) -> Self {
        Self {
            alpha: config.alpha(),
            intervals: config.grid().intervals(),
            steps: config.mesh().steps(),
            grading: config.mesh().grading(),
            final_time: config.mesh().final_time(),
            length: config.grid().length(),
            mu: config.mu().label().to_owned(),
        }
    }
}

/// Dense homogeneous solution map `φ ↦ u^M(φ; 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOperator {
    matrix: DenseMatrix,
    fingerprint: Fingerprint,
}

const CACHE_MAGIC: &[u8] = b"FPP-OPERATOR v1\n";

impl ForwardOperator {
    pub fn from_parts(matrix: DenseMatrix, fingerprint: Fingerprint) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(invalid("forward operator must be square"));
        }
        Ok(Self {
            matrix,
            fingerprint,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, phi: &[f64]) -> Result<StateVector> {
        self.matrix.matvec(phi)
    }

    /// Writes the operator: magic line, fingerprint JSON line, dimension, little-endian f64 row-major.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        let fp = serde_json::to_string(&self.fingerprint).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(fp.as_bytes())?;
        w.write_all(b"\n")?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        for v in self.matrix.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a cached operator, rejecting it unless its fingerprint equals `expected`.
    pub fn load(path: impl AsRef<Path>, expected: &Fingerprint) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = vec![0u8; CACHE_MAGIC.len()];
        r.read_exact(&mut magic)?;
        if magic != CACHE_MAGIC {
            return Err(Error::Io("not an operator cache file".into()));
        }
        let mut line = String::new();
        r.read_line(&mut line)?;
        let fingerprint: Fingerprint =
            serde_json::from_str(line.trim_end()).map_err(|e| Error::Io(e.to_string()))?;
        if &fingerprint != expected {
            return Err(Error::FingerprintMismatch);
        }
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        if n != expected.intervals.saturating_sub(1) {
            return Err(Error::FingerprintMismatch);
        }
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        Self::from_parts(DenseMatrix::from_row_major(n, n, data)?, fingerprint)
    }
}

/// `g_h = u^M(0; f)`.
pub fn forced_terminal(config: &ProblemConfig) -> Result<StateVector> {
    let solver = ForwardSolver::new(config)?;
    solver.terminal(&vec![0.0; config.grid().interior_len()])
}

/// Assembles `F_h` from the `N - 1` impulse responses `u^M(e^{(m)}; 0)`.
pub fn assemble_forward_operator(config: &ProblemConfig) -> Result<ForwardOperator> {
    let solver = ForwardSolver::new(&config.homogeneous())?;
    operator_from_solver(&solver)
}

fn operator_from_solver(solver: &ForwardSolver) -> Result<ForwardOperator> {
    let n = solver.config().grid().interior_len();
    let columns = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut e = vec![0.0; n];
            e[m] = 1.0;
            solver.terminal_homogeneous(&e)
        })
        .collect::<Result<Vec<_>>>()?;
    ForwardOperator::from_parts(
        DenseMatrix::from_columns(&columns)?,
        Fingerprint::of(solver.config()),
    )
}

/// Like [`assemble_forward_operator`], reusing a cache file when its fingerprint matches
/// and writing one otherwise.
pub fn assemble_forward_operator_cached(
    config: &ProblemConfig,
    path: impl AsRef<Path>,
) -> Result<ForwardOperator> {
    let path = path.as_ref();
    let expected = Fingerprint::of(config);
    match ForwardOperator::load(path, &expected) {
        Ok(op) => Ok(op),
        Err(_) => {
            let op = assemble_forward_operator(config)?;
            op.save(path)?;
            Ok(op)
        }
    }
}

/// Relative additive Gaussian noise, `ψ + σ ξ` with `σ = δ ‖ψ‖₂ / √(N-1)`.
///
/// `ξ` is drawn from xoshiro256++ (seeded through SplitMix64) using the
/// Box–Muller transform, both outputs of each pair consumed in order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub delta: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(invalid(format!(
                "noise level must be nonnegative, got {delta}"
            )));
        }
        Ok(Self { delta, seed })
    }

    pub fn sigma(&self, psi: &[f64]) -> f64 {
        if psi.is_empty() {
            return 0.0;
        }
        let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.delta * norm / (psi.len() as f64).sqrt()
    }
}

/// Deterministic stream of standard normal variates.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    fn unit_open(&mut self) -> f64 {
        // (0, 1]
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

pub fn add_noise(psi: &[f64], model: &NoiseModel) -> Result<StateVector> {
    if !(model.delta >= 0.0) {
        return Err(invalid(format!(
            "noise level must be nonnegative, got {}",
            model.delta
        )));
    }
    if model.delta == 0.0 {
        return Ok(psi.to_vec());
    }
    if psi.iter().all(|&v| v == 0.0) {
        return Err(invalid("relative noise needs a nonzero measurement"));
    }
    let sigma = model.sigma(psi);
    let mut stream = GaussianStream::new(model.seed);
    Ok(psi.iter().map(|&v| v + sigma * stream.sample()).collect())
}

/// Solves `(FᵀF + λI) φ = Fᵀ d`.
pub fn tikhonov_reconstruct(
    op: &ForwardOperator,
    data: &[f64],
    lambda: f64,
) -> Result<StateVector> {
    tikhonov_solve(op.matrix(), data, lambda)
}

/// [`tikhonov_reconstruct`] on a bare matrix.
pub fn tikhonov_solve(matrix: &DenseMatrix, data: &[f64], lambda: f64) -> Result<StateVector> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!(
            "regularisation parameter must be positive, got {lambda}"
        )));
    }
    check_len(matrix.rows(), data.len())?;
    let normal = matrix.gram_shifted(lambda);
    let rhs = matrix.tr_matvec(data)?;
    solve_spd_dense(&normal, &rhs)
}

/// `‖·‖_∞` and `‖·‖_{2,h}` of a difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPair {
    pub inf: f64,
    pub l2h: f64,
}

impl ErrorPair {
    pub fn between(a: &[f64], b: &[f64], h: f64) -> Self {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self {
            inf: inf_norm(&diff),
            l2h: l2h_norm(&diff, h),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub u0_hat: StateVector,
    pub lambda: f64,
    /// Terminal state of a forward re-run from `u0_hat`.
    pub terminal: StateVector,
    /// Re-run terminal state against the data that was inverted.
    pub terminal_error: ErrorPair,
    /// Present only when a reference initial state was supplied.
    pub initial_error: Option<ErrorPair>,
}

/// Precomputed `g_h`, `F_h` and forward solver for one configuration.
///
/// Reuse it to invert several data vectors or to try several `λ`.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    solver: ForwardSolver,
    forced: StateVector,
    operator: ForwardOperator,
}

impl Reconstructor {
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        let solver = ForwardSolver::new(config)?;
        let n = config.grid().interior_len();
        let forced = solver.terminal(&vec![0.0; n])?;
        let operator = operator_from_solver(&solver)?;
        Ok(Self {
            solver,
            forced,
            operator,
        })
    }

    /// Uses a precomputed operator; its fingerprint must match `config`.
    pub fn with_operator(config: &ProblemConfig, operator: ForwardOperator) -> Result<Self> {
        if operator.fingerprint() != &Fingerprint::of(config) {
            return Err(Error::FingerprintMismatch);
        }
        let solver = ForwardSolver::new(config)?;
        let forced = solver.terminal(&vec![0.0; config.grid().interior_len()])?;
        Ok(Self {
            solver,
            forced,
            operator,
        })
    }

    pub fn config(&self) -> &ProblemConfig {
        self.solver.config()
    }

    pub fn solver(&self) -> &ForwardSolver {
        &self.solver
    }

    pub fn forced(&self) -> &[f64] {
        &self.forced
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.operator
    }

    /// Regularised initial state for the terminal data `psi`.
    pub fn solve(&self, psi: &[f64], lambda: f64) -> Result<StateVector> {
        check_len(self.forced.len(), psi.len())?;
        let data: Vec<f64> = psi.iter().zip(&self.forced).map(|(p, g)| p - g).collect();
        tikhonov_reconstruct(&self.operator, &data, lambda)
    }

    /// Inversion followed by the forward consistency re-run.
    pub fn reconstruct(
        &self,
        psi: &[f64],
        lambda: f64,
        reference: Option<&[f64]>,
    ) -> Result<ReconstructionResult> {
        let h = self.config().grid().h();
        let u0_hat = self.solve(psi, lambda)?;
        let terminal = self.solver.terminal(&u0_hat)?;
        let terminal_error = ErrorPair::between(&terminal, psi, h);
        let initial_error = match reference {
            Some(r) => {
                check_len(u0_hat.len(), r.len())?;
                Some(ErrorPair::between(&u0_hat, r, h))
            }
            None => None,
        };
        Ok(ReconstructionResult {
            u0_hat,
            lambda,
            terminal,
            terminal_error,
            initial_error,
        })
    }
}

/// Full reconstruction pipeline for one data vector.
pub fn reconstruct(
    psi: &[f64],
    config: &ProblemConfig,
    lambda: f64,
    reference: Option<&[f64]>,
) -> Result<ReconstructionResult> {
    Reconstructor::new(config)?.reconstruct(psi, lambda, reference)
}
