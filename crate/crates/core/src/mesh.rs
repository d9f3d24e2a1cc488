//! Spatial grid and graded temporal mesh.

use crate::error::{invalid, Result};

/// Uniform grid `x_i = i h` on `[0, l]` with `N` subintervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    length: f64,
    intervals: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl SpaceGrid {
    pub fn new(length: f64, intervals: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if intervals < 2 {
            return Err(invalid(format!(
                "need at least 2 subintervals for an interior node, got {intervals}"
            )));
        }
        let h = length / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        nodes[intervals] = length;
        Ok(Self {
            length,
            intervals,
            h,
            nodes,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of subintervals `N`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// All nodes `x_0..=x_N`, boundaries included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interior nodes `x_1..x_{N-1}`.
    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.intervals]
    }

    /// Interior unknown count `N - 1`.
    pub fn interior_len(&self) -> usize {
        self.intervals - 1
    }

    /// Samples `g` at the interior nodes.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.interior().iter().map(|&x| g(x)).collect()
    }
}

/// Graded time mesh `t_k = T (k/M)^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    final_time: f64,
    steps: usize,
    grading: f64,
    times: Vec<f64>,
    tau: Vec<f64>,
    tau_max: f64,
}

impl TimeMesh {
    pub fn graded(final_time: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(invalid(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if steps < 1 {
            return Err(invalid("need at least one time step"));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(invalid(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        let m = steps as f64;
        let mut times: Vec<f64> = (0..=steps)
            .map(|k| final_time * (k as f64 / m).powf(grading))
            .collect();
        times[0] = 0.0;
        times[steps] = final_time;
        let tau: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let tau_max = tau.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            final_time,
            steps,
            grading,
            times,
            tau,
            tau_max,
        })
    }

    pub fn uniform(final_time: f64, steps: usize) -> Result<Self> {
        Self::graded(final_time, steps, 1.0)
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Node times `t_0..=t_M`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// Step size `tau_k = t_k - t_{k-1}` for `1 <= k <= M`.
    pub fn tau(&self, k: usize) -> f64 {
        self.tau[k - 1]
    }

    /// Step sizes `tau_1..=tau_M`.
    pub fn step_sizes(&self) -> &[f64] {
        &self.tau
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }
}

/// Grading exponent `(2 - alpha)/alpha` clamped to be at least one.
pub fn default_grading(alpha: f64) -> f64 {
    ((2.0 - alpha) / alpha).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_grid_examples() {
        let g = SpaceGrid::new(1.0, 4).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.interior_len(), 3);

        let g = SpaceGrid::new(1.0, 2).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.interior(), &[0.5]);

        let g = SpaceGrid::new(2.0, 8).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.nodes()[3], 0.75);
        assert_eq!(*g.nodes().last().unwrap(), 2.0);
    }

    #[test]
    fn space_grid_rejects_degenerate() {
        assert!(SpaceGrid::new(1.0, 1).is_err());
        assert!(SpaceGrid::new(0.0, 4).is_err());
        assert!(SpaceGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn time_mesh_examples() {
        let m = TimeMesh::graded(1.0, 4, 1.0).unwrap();
        assert_eq!(m.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(m.step_sizes().iter().all(|&t| t == 0.25));

        let m = TimeMesh::graded(1.0, 4, 2.0).unwrap();
        assert_eq!(m.times(), &[0.0, 0.0625, 0.25, 0.5625, 1.0]);

        let r = default_grading(0.5);
        assert_eq!(r, 3.0);
        let m = TimeMesh::graded(1.0, 100, r).unwrap();
        assert!((m.t(1) - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn time_mesh_rejects_bad_input() {
        assert!(TimeMesh::graded(1.0, 4, 0.5).is_err());
        assert!(TimeMesh::graded(1.0, 0, 1.0).is_err());
        assert!(TimeMesh::graded(0.0, 4, 1.0).is_err());
        assert!(TimeMesh::graded(1.0, 1, 1.0).is_ok());
    }

    #[test]
    fn default_grading_clamps() {
        assert!((default_grading(0.1) - 19.0).abs() < 1e-12);
        assert_eq!(default_grading(1.0), 1.0);
        assert_eq!(default_grading(1.5), 1.0);
    }
}
