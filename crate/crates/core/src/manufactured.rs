//! Manufactured test problem with `u(x,t) = (1 + t^{α+1}) sin(πx/l)` and `μ(t) = 1 + t`.

use std::f64::consts::PI;

use crate::caputo::gamma;
use crate::error::Result;
use crate::forward::{Coefficient, ProblemConfig, Source};
use crate::mesh::{SpaceGrid, TimeMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub alpha: f64,
    pub length: f64,
    pub final_time: f64,
}

impl ManufacturedCase {
    pub fn new(alpha: f64, length: f64, final_time: f64) -> Self {
        Self {
            alpha,
            length,
            final_time,
        }
    }

    /// Unit interval, `T = 1`.
    pub fn unit(alpha: f64) -> Self {
        Self::new(alpha, 1.0, 1.0)
    }

    fn wave(&self, x: f64) -> f64 {
        (PI * x / self.length).sin()
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        (1.0 + t.powf(self.alpha + 1.0)) * self.wave(x)
    }

    pub fn initial(&self, x: f64) -> f64 {
        self.wave(x)
    }

    pub fn terminal(&self, x: f64) -> f64 {
        self.exact(x, self.final_time)
    }

    pub fn mu(t: f64) -> f64 {
        1.0 + t
    }

    pub fn coefficient() -> Coefficient {
        Coefficient::new("1+t", Self::mu)
    }

    /// Time factor of `f`; `f(x,t) = source_amplitude(t) sin(πx/l)`.
    pub fn source_amplitude(&self, t: f64) -> f64 {
        let a = self.alpha;
        let k2 = (PI / self.length).powi(2);
        let g = gamma(a + 2.0).expect("alpha + 2 > 0");
        g * t + k2 * (1.0 + t.powf(a + 1.0)) + Self::mu(t) * k2 * (a + 1.0) * t.powf(a)
    }

    pub fn source_fn(&self) -> impl Fn(f64, f64) -> f64 + Send + Sync + 'static {
        let case = *self;
        let a = case.alpha;
        let k2 = (PI / case.length).powi(2);
        let g = gamma(a + 2.0).expect("alpha + 2 > 0");
        move |x, t| {
            let amp = g * t + k2 * (1.0 + t.powf(a + 1.0)) + (1.0 + t) * k2 * (a + 1.0) * t.powf(a);
            amp * (PI * x / case.length).sin()
        }
    }

    pub fn source(&self) -> Source {
        Source::function(
            format!("manufactured(alpha={})", self.alpha),
            self.source_fn(),
        )
    }

    pub fn config(&self, intervals: usize, steps: usize, grading: f64) -> Result<ProblemConfig> {
        ProblemConfig::new(
            self.alpha,
            SpaceGrid::new(self.length, intervals)?,
            TimeMesh::graded(self.final_time, steps, grading)?,
            Self::coefficient(),
            self.source(),
        )
    }
}
