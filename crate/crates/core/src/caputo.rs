//! Graded-mesh L1 discretisation of the Caputo derivative.
//!
//! At level `k` the derivative of a sequence `v_0..v_k` is approximated by
//!
//! ```text
//! (1/Γ(2-α)) Σ_{j=1..k} d_{k,j} (v_j - v_{j-1}),
//! d_{k,j} = ((t_k - t_{j-1})^{1-α} - (t_k - t_j)^{1-α}) / (t_j - t_{j-1}).
//! ```
//!
//! `d_{k,j}` is the mean of `(1-α)(t_k - s)^{-α}` over `[t_{j-1}, t_j]`, so it is
//! positive and nondecreasing in `j`.

use std::f64::consts::PI;

use crate::error::{check_len, invalid, Result};
use crate::mesh::TimeMesh;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments (Lanczos, g = 7, nine terms).
pub fn gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid(format!(
            "gamma requires a positive argument, got {z}"
        )));
    }
    Ok(gamma_positive(z))
}

pub(crate) fn gamma_positive(z: f64) -> f64 {
    if z < 0.5 {
        // reflection: Γ(z) Γ(1-z) = π / sin(πz)
        return PI / ((PI * z).sin() * gamma_positive(1.0 - z));
    }
    let z = z - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// `((a)^β - (a - τ)^β) / τ` for `0 < τ <= a`, evaluated without cancellation.
pub(crate) fn l1_kernel_mean(a: f64, tau: f64, beta: f64) -> f64 {
    let ratio = tau / a;
    if ratio >= 1.0 {
        // (t_k - t_k) contributes exactly zero
        return a.powf(beta) / tau;
    }
    -a.powf(beta) * (beta * (-ratio).ln_1p()).exp_m1() / tau
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!(
            "fractional order must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// L1 coefficients `d_{k,1..=k}` for one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    level: usize,
    alpha: f64,
    gamma_2ma: f64,
    d: Vec<f64>,
}

impl L1Weights {
    pub fn new(mesh: &TimeMesh, alpha: f64, level: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let gamma_2ma = gamma_positive(2.0 - alpha);
        Self::with_gamma(mesh, alpha, gamma_2ma, level)
    }

    fn with_gamma(mesh: &TimeMesh, alpha: f64, gamma_2ma: f64, level: usize) -> Result<Self> {
        if level < 1 || level > mesh.steps() {
            return Err(invalid(format!(
                "level {level} outside 1..={}",
                mesh.steps()
            )));
        }
        let beta = 1.0 - alpha;
        let tk = mesh.t(level);
        let d = (1..=level)
            .map(|j| l1_kernel_mean(tk - mesh.t(j - 1), mesh.tau(j), beta))
            .collect();
        Ok(Self {
            level,
            alpha,
            gamma_2ma,
            d,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_2ma(&self) -> f64 {
        self.gamma_2ma
    }

    /// `d_{k,j}`, `1 <= j <= k`.
    pub fn d(&self, j: usize) -> f64 {
        self.d[j - 1]
    }

    /// `w_{k,j} = d_{k,j} / Γ(2-α)`.
    pub fn w(&self, j: usize) -> f64 {
        self.d[j - 1] / self.gamma_2ma
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.d
    }

    /// Coefficient of the current unknown, `d_{k,k} / Γ(2-α)`.
    pub fn leading(&self) -> f64 {
        self.d[self.level - 1] / self.gamma_2ma
    }
}

/// Convenience wrapper for [`L1Weights::new`].
pub fn l1_coefficients(mesh: &TimeMesh, alpha: f64, level: usize) -> Result<L1Weights> {
    L1Weights::new(mesh, alpha, level)
}

/// Every level's weights for one mesh, computed once.
#[derive(Debug, Clone)]
pub struct WeightTable {
    alpha: f64,
    levels: Vec<L1Weights>,
}

impl WeightTable {
    pub fn new(mesh: &TimeMesh, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let gamma_2ma = gamma_positive(2.0 - alpha);
        let levels = (1..=mesh.steps())
            .map(|k| L1Weights::with_gamma(mesh, alpha, gamma_2ma, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, levels })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn steps(&self) -> usize {
        self.levels.len()
    }

    /// Weights at level `k`, `1 <= k <= M`.
    pub fn level(&self, k: usize) -> &L1Weights {
        &self.levels[k - 1]
    }
}

/// Discrete Caputo derivative of a scalar sequence `v_0..v_k` at level `k`.
pub fn discrete_caputo_scalar(weights: &L1Weights, v: &[f64]) -> Result<f64> {
    check_len(weights.level + 1, v.len())?;
    let sum: f64 = weights
        .d
        .iter()
        .zip(v.windows(2))
        .map(|(d, w)| d * (w[1] - w[0]))
        .sum();
    Ok(sum / weights.gamma_2ma)
}

/// Memory term of the L1 scheme at level `k`:
/// `(d_{k,1} u^0 + Σ_{j=1}^{k-1} (d_{k,j+1} - d_{k,j}) u^j) / Γ(2-α)`.
///
/// `states` holds `u^0..u^{k-1}`.
pub fn history_term(weights: &L1Weights, states: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = states.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    accumulate_history(weights, states, &mut out)?;
    Ok(out)
}

/// [`history_term`] written into `out`.
pub fn accumulate_history(weights: &L1Weights, states: &[Vec<f64>], out: &mut [f64]) -> Result<()> {
    let k = weights.level;
    check_len(k, states.len())?;
    for s in states {
        check_len(out.len(), s.len())?;
    }
    let d = &weights.d;
    let inv_gamma = 1.0 / weights.gamma_2ma;
    let c0 = d[0] * inv_gamma;
    for (o, &u) in out.iter_mut().zip(&states[0]) {
        *o = c0 * u;
    }
    for j in 1..k {
        let c = (d[j] - d[j - 1]) * inv_gamma;
        for (o, &u) in out.iter_mut().zip(&states[j]) {
            *o += c * u;
        }
    }
    Ok(())
}
