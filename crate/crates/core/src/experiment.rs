//! Manufactured-solution experiments and their CSV layouts.
//!
//! All CSV output is UTF-8, comma separated, LF terminated, with a header row.
//! Reals use six significant digits in scientific notation (`1.05500e-02`).

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{ForwardSolver, Trajectory};
use crate::inverse::{
    add_noise, assemble_forward_operator_cached, ErrorPair, NoiseModel, Reconstructor,
};
use crate::linalg::l2h_norm;
use crate::manufactured::ManufacturedCase;
use crate::mesh::default_grading;
use crate::oracle::{reconstruct_u0_spectral, ModeOracle};

pub const TABLE_ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const TABLE1_GRIDS: [(usize, usize); 4] = [(50, 50), (100, 100), (200, 200), (400, 400)];
pub const TABLE2_DELTAS: [f64; 3] = [0.01, 0.03, 0.05];
pub const NOISE_FREE_LAMBDA: f64 = 1e-10;
pub const NOISY_LAMBDA: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 20_260_101;
/// Relative disagreement above which a graded-mesh row is reported next to the uniform one.
pub const MESH_DISAGREEMENT: f64 = 0.35;

/// Six significant digits, two-digit signed exponent.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Spatial length and final time shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub length: f64,
    pub final_time: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            length: 1.0,
            final_time: 1.0,
        }
    }
}

impl Domain {
    pub fn case(&self, alpha: f64) -> ManufacturedCase {
        ManufacturedCase::new(alpha, self.length, self.final_time)
    }
}

/// How the time mesh is graded for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// `max(1, (2-α)/α)`
    Optimal,
    Fixed(f64),
}

impl Grading {
    pub fn resolve(self, alpha: f64) -> f64 {
        match self {
            Grading::Uniform => 1.0,
            Grading::Optimal => default_grading(alpha),
            Grading::Fixed(r) => r,
        }
    }
}

/// One reconstruction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub alpha: f64,
    pub length: f64,
    pub final_time: f64,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub lambda: f64,
    pub delta: f64,
    pub seed: u64,
    pub initial: ErrorPair,
    /// Re-run terminal state against the (possibly noisy) inverted data.
    pub terminal: ErrorPair,
    /// Re-run terminal state against the clean measurement.
    pub terminal_clean: ErrorPair,
    pub wall_time: Duration,
}

pub const REPORT_HEADER: &str =
    "alpha,l,T,N,M,r,lambda,delta,seed,E_u0_inf,E_u0_2,E_psi_inf,E_psi_2,E_psi_clean_inf,E_psi_clean_2";

impl ErrorReport {
    pub fn csv_row(&self) -> String {
        [
            format_sci(self.alpha),
            format_sci(self.length),
            format_sci(self.final_time),
            self.n.to_string(),
            self.m.to_string(),
            format_sci(self.r),
            format_sci(self.lambda),
            format_sci(self.delta),
            self.seed.to_string(),
            format_sci(self.initial.inf),
            format_sci(self.initial.l2h),
            format_sci(self.terminal.inf),
            format_sci(self.terminal.l2h),
            format_sci(self.terminal_clean.inf),
            format_sci(self.terminal_clean.l2h),
        ]
        .join(",")
    }
}

pub fn write_reports(reports: &[ErrorReport], mut out: impl Write) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// One `(α, N, M, r)` pipeline: assembles the operator once and inverts the
/// manufactured data at each noise level (same seed for every level).
pub fn run_cell(
    case: ManufacturedCase,
    n: usize,
    m: usize,
    r: f64,
    lambda: f64,
    deltas: &[f64],
    seed: u64,
) -> Result<Vec<ErrorReport>> {
    let start = Instant::now();
    let config = case.config(n, m, r)?;
    let rec = Reconstructor::new(&config)?;
    let grid = config.grid();
    let psi = grid.sample(|x| case.terminal(x));
    let u0 = grid.sample(|x| case.initial(x));
    let setup = start.elapsed();
    deltas
        .iter()
        .map(|&delta| {
            let t0 = Instant::now();
            let data = add_noise(&psi, &NoiseModel::new(delta, seed)?)?;
            let res = rec.reconstruct(&data, lambda, Some(&u0))?;
            Ok(ErrorReport {
                alpha: case.alpha,
                length: case.length,
                final_time: case.final_time,
                n,
                m,
                r,
                lambda,
                delta,
                seed,
                initial: res.initial_error.expect("reference supplied"),
                terminal: res.terminal_error,
                terminal_clean: ErrorPair::between(&res.terminal, &psi, grid.h()),
                wall_time: setup + t0.elapsed(),
            })
        })
        .collect()
}

/// Noise-free sweep over `alphas × grids`, ordered alpha-major.
pub fn run_table1(
    alphas: &[f64],
    grids: &[(usize, usize)],
    lambda: f64,
    grading: Grading,
    domain: Domain,
) -> Result<Vec<ErrorReport>> {
    let cells: Vec<(f64, usize, usize)> = alphas
        .iter()
        .flat_map(|&a| grids.iter().map(move |&(n, m)| (a, n, m)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(a, n, m)| run_cell(domain.case(a), n, m, grading.resolve(a), lambda, &[0.0], 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Re-runs `reports` with the `alternate` grading and keeps the alternate rows
/// whose `E_u0_inf` differs from the original by more than [`MESH_DISAGREEMENT`].
pub fn mesh_disagreements(reports: &[ErrorReport], alternate: Grading) -> Result<Vec<ErrorReport>> {
    let runs = reports
        .par_iter()
        .filter(|rep| alternate.resolve(rep.alpha) != rep.r)
        .map(|rep| {
            let case = ManufacturedCase::new(rep.alpha, rep.length, rep.final_time);
            let r = alternate.resolve(rep.alpha);
            let alt = run_cell(case, rep.n, rep.m, r, rep.lambda, &[rep.delta], rep.seed)?;
            Ok((rep.initial.inf, alt.into_iter().next().expect("one delta")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs
        .into_iter()
        .filter(|(base, alt)| (alt.initial.inf / base - 1.0).abs() > MESH_DISAGREEMENT)
        .map(|(_, alt)| alt)
        .collect())
}

/// Noisy sweep, one fixed grid; ordered alpha-major then by `deltas`.
#[allow(clippy::too_many_arguments)]
pub fn run_table2(
    alphas: &[f64],
    deltas: &[f64],
    n: usize,
    m: usize,
    lambda: f64,
    seed: u64,
    grading: Grading,
    domain: Domain,
) -> Result<Vec<ErrorReport>> {
    let rows = alphas
        .par_iter()
        .map(|&a| {
            run_cell(
                domain.case(a),
                n,
                m,
                grading.resolve(a),
                lambda,
                deltas,
                seed,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Wide trajectory CSV: header `t,x0,...,xN`, one row per time level, boundary zeros included.
pub fn write_trajectory(traj: &Trajectory, mut out: impl Write) -> Result<()> {
    let n = traj.states.first().map_or(0, Vec::len) + 1;
    let header: Vec<String> = std::iter::once("t".to_owned())
        .chain((0..=n).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = Vec::with_capacity(n + 2);
        row.push(format_sci(*t));
        row.push(format_sci(0.0));
        row.extend(s.iter().map(|&v| format_sci(v)));
        row.push(format_sci(0.0));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Forward solve of the manufactured problem (or of zero data).
pub fn manufactured_trajectory(
    case: ManufacturedCase,
    n: usize,
    m: usize,
    r: f64,
    zero_data: bool,
) -> Result<Trajectory> {
    let mut config = case.config(n, m, r)?;
    let u0 = if zero_data {
        config = config.homogeneous();
        vec![0.0; config.grid().interior_len()]
    } else {
        config.grid().sample(|x| case.initial(x))
    };
    ForwardSolver::new(&config)?.solve(&u0)
}

/// Per-node profile of one reconstruction, long format for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionProfile {
    pub report: ErrorReport,
    pub x: Vec<f64>,
    pub u0_exact: Vec<f64>,
    pub u0_hat: Vec<f64>,
    pub psi_data: Vec<f64>,
    pub psi_hat: Vec<f64>,
    pub trajectory: Trajectory,
}

pub const PROFILE_HEADER: &str = "x,u0_exact,u0_hat,psi_data,psi_hat";

impl ReconstructionProfile {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{PROFILE_HEADER}")?;
        for i in 0..self.x.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_sci(self.x[i]),
                format_sci(self.u0_exact[i]),
                format_sci(self.u0_hat[i]),
                format_sci(self.psi_data[i]),
                format_sci(self.psi_hat[i])
            )?;
        }
        Ok(())
    }
}

/// Single manufactured reconstruction with full profiles and the reconstructed trajectory.
#[allow(clippy::too_many_arguments)]
pub fn manufactured_reconstruction(
    case: ManufacturedCase,
    n: usize,
    m: usize,
    r: f64,
    lambda: f64,
    delta: f64,
    seed: u64,
    cache: Option<&Path>,
) -> Result<ReconstructionProfile> {
    let start = Instant::now();
    let config = case.config(n, m, r)?;
    let rec = match cache {
        Some(path) => {
            Reconstructor::with_operator(&config, assemble_forward_operator_cached(&config, path)?)?
        }
        None => Reconstructor::new(&config)?,
    };
    let grid = config.grid();
    let psi = grid.sample(|x| case.terminal(x));
    let u0 = grid.sample(|x| case.initial(x));
    let data = add_noise(&psi, &NoiseModel::new(delta, seed)?)?;
    let res = rec.reconstruct(&data, lambda, Some(&u0))?;
    let trajectory = rec.solver().solve(&res.u0_hat)?;
    let report = ErrorReport {
        alpha: case.alpha,
        length: case.length,
        final_time: case.final_time,
        n,
        m,
        r,
        lambda,
        delta,
        seed,
        initial: res.initial_error.expect("reference supplied"),
        terminal: res.terminal_error,
        terminal_clean: ErrorPair::between(&res.terminal, &psi, grid.h()),
        wall_time: start.elapsed(),
    };
    Ok(ReconstructionProfile {
        report,
        x: grid.interior().to_vec(),
        u0_exact: u0,
        u0_hat: res.u0_hat,
        psi_data: data,
        psi_hat: res.terminal,
        trajectory,
    })
}

/// Per-mode oracle diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRow {
    pub k: usize,
    pub lambda_k: f64,
    pub a_k_t: f64,
    pub b_k_t: f64,
    pub psi_k: f64,
    pub u0_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub alpha: f64,
    pub length: f64,
    pub final_time: f64,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub fine_steps: usize,
    pub gronwall_floor: f64,
    pub modes: Vec<ModeRow>,
    /// `‖u0_FD - u0_spectral‖_{2,h} / ‖u0_spectral‖_{2,h}` on the FD grid.
    pub fd_gap: f64,
}

pub const ORACLE_HEADER: &str =
    "alpha,l,T,N,M,r,fine_M,k,lambda_k,A_k_T,B_k_T,gronwall_floor,psi_k,u0_k,fd_oracle_gap";

impl OracleReport {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{ORACLE_HEADER}")?;
        for row in &self.modes {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                format_sci(self.alpha),
                format_sci(self.length),
                format_sci(self.final_time),
                self.n,
                self.m,
                format_sci(self.r),
                self.fine_steps,
                row.k,
                format_sci(row.lambda_k),
                format_sci(row.a_k_t),
                format_sci(row.b_k_t),
                format_sci(self.gronwall_floor),
                format_sci(row.psi_k),
                format_sci(row.u0_k),
                format_sci(self.fd_gap)
            )?;
        }
        Ok(())
    }
}

/// Spectral oracle on the manufactured case, cross-checked against the FD reconstruction.
pub fn run_oracle_check(
    case: ManufacturedCase,
    modes: usize,
    fine_steps: usize,
    n: usize,
    m: usize,
    r: f64,
    lambda: f64,
) -> Result<OracleReport> {
    let config = case.config(n, m, r)?;
    let spectral = reconstruct_u0_spectral(|x| case.terminal(x), &config, modes, fine_steps)?;
    let floor = ModeOracle::new(&config, fine_steps)?.gronwall_floor();

    let psi = config.grid().sample(|x| case.terminal(x));
    let fd = Reconstructor::new(&config)?.solve(&psi, lambda)?;
    let h = config.grid().h();
    let oracle_nodes = spectral.sample(config.grid().interior());
    let gap = ErrorPair::between(&fd, &oracle_nodes, h).l2h / l2h_norm(&oracle_nodes, h);
    if !gap.is_finite() {
        return Err(Error::InvalidParameter(
            "oracle reconstruction vanished".into(),
        ));
    }

    let rows = spectral
        .modes
        .iter()
        .map(|s| ModeRow {
            k: s.k,
            lambda_k: s.lambda_k,
            a_k_t: s.a_k_t,
            b_k_t: s.b_k_t,
            psi_k: spectral.psi_coefficients[s.k - 1],
            u0_k: s.u0_k,
        })
        .collect();
    Ok(OracleReport {
        alpha: case.alpha,
        length: case.length,
        final_time: case.final_time,
        n,
        m,
        r,
        fine_steps,
        gronwall_floor: floor,
        modes: rows,
        fd_gap: gap,
    })
}
