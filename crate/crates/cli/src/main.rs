//! `fpp`: forward solves, reconstructions and the table sweeps for the
//! manufactured test problem.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fpp_core::experiment::{
    self, Domain, Grading, DEFAULT_SEED, NOISE_FREE_LAMBDA, NOISY_LAMBDA, TABLE1_GRIDS,
    TABLE2_DELTAS, TABLE_ALPHAS,
};
use fpp_core::oracle::DEFAULT_MODES;
use fpp_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "fpp",
    version,
    about = "Fractional pseudo-parabolic forward and backward solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the manufactured problem forward and write the trajectory.
    Forward {
        #[command(flatten)]
        params: Params,
        /// Zero initial state and zero source.
        #[arg(long)]
        zero: bool,
    },
    /// Recover the initial state from (noisy) terminal data.
    Reconstruct {
        #[command(flatten)]
        params: Params,
        /// Forward-operator cache file, reused when its fingerprint matches.
        #[arg(long, value_name = "PATH")]
        cache: Option<PathBuf>,
        /// Also write the trajectory started from the reconstructed state.
        #[arg(long, value_name = "PATH")]
        trajectory_out: Option<PathBuf>,
    },
    /// Noise-free sweep over alpha and grid size.
    Table1 {
        #[command(flatten)]
        params: Params,
        /// Skip the uniform/graded comparison rows.
        #[arg(long)]
        no_mesh_check: bool,
    },
    /// Noise sweep on a fixed grid.
    Table2 {
        #[command(flatten)]
        params: Params,
    },
    /// Per-mode spectral diagnostics and the FD-vs-spectral gap.
    OracleCheck {
        #[command(flatten)]
        params: Params,
        /// Number of sine modes.
        #[arg(long = "K")]
        modes: Option<usize>,
        /// Fine time steps for the mode solves.
        #[arg(long = "fine-M")]
        fine_m: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
struct Params {
    /// Fractional order; tables accept a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Spatial intervals.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Time steps.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Mesh grading exponent (default max(1, (2-alpha)/alpha)).
    #[arg(long)]
    r: Option<f64>,
    /// Tikhonov parameter.
    #[arg(long)]
    lambda: Option<f64>,
    /// Relative noise level; table2 accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Domain length.
    #[arg(long = "l")]
    length: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    final_time: Option<f64>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; explicit flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
enum OneOrMany {
    #[default]
    None,
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::None => Vec::new(),
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    alpha: OneOrMany,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    r: Option<f64>,
    lambda: Option<f64>,
    #[serde(default)]
    delta: OneOrMany,
    seed: Option<u64>,
    l: Option<f64>,
    #[serde(rename = "T")]
    t: Option<f64>,
    out: Option<PathBuf>,
}

/// Failure with its exit code: 1 numerical, 2 bad flags or configuration.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            error: e.into(),
        }
    }
}

fn bad_flags(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

type CliResult<T> = std::result::Result<T, Failure>;

impl Params {
    fn merged(mut self) -> CliResult<Params> {
        let Some(path) = self.config.take() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(bad_flags)?;
        let file: ConfigFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(bad_flags)?;
        if self.alpha.is_empty() {
            self.alpha = file.alpha.into_vec();
        }
        if self.delta.is_empty() {
            self.delta = file.delta.into_vec();
        }
        self.n = self.n.or(file.n);
        self.m = self.m.or(file.m);
        self.r = self.r.or(file.r);
        self.lambda = self.lambda.or(file.lambda);
        self.seed = self.seed.or(file.seed);
        self.length = self.length.or(file.l);
        self.final_time = self.final_time.or(file.t);
        self.out = self.out.or(file.out);
        Ok(self)
    }

    fn single_alpha(&self) -> CliResult<f64> {
        match self.alpha.as_slice() {
            [a] => Ok(*a),
            [] => Err(bad_flags(anyhow::anyhow!("--alpha is required"))),
            _ => Err(bad_flags(anyhow::anyhow!(
                "expected a single --alpha value"
            ))),
        }
    }

    fn single_delta(&self) -> CliResult<f64> {
        match self.delta.as_slice() {
            [] => Ok(0.0),
            [d] => Ok(*d),
            _ => Err(bad_flags(anyhow::anyhow!(
                "expected a single --delta value"
            ))),
        }
    }

    fn alphas(&self) -> Vec<f64> {
        if self.alpha.is_empty() {
            TABLE_ALPHAS.to_vec()
        } else {
            self.alpha.clone()
        }
    }

    fn grading(&self) -> Grading {
        self.r.map_or(Grading::Optimal, Grading::Fixed)
    }

    fn domain(&self) -> Domain {
        let d = Domain::default();
        Domain {
            length: self.length.unwrap_or(d.length),
            final_time: self.final_time.unwrap_or(d.final_time),
        }
    }

    fn grid(&self) -> (usize, usize) {
        (self.n.unwrap_or(100), self.m.unwrap_or(100))
    }
}

fn with_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()));
            let mut w = BufWriter::new(file.map_err(|error| Failure { code: 1, error })?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Forward { params, zero } => {
            let p = params.merged()?;
            let alpha = p.single_alpha()?;
            let (n, m) = p.grid();
            let case = p.domain().case(alpha);
            let traj =
                experiment::manufactured_trajectory(case, n, m, p.grading().resolve(alpha), zero)?;
            with_output(p.out.as_deref(), |w| {
                Ok(experiment::write_trajectory(&traj, w)?)
            })
        }
        Command::Reconstruct {
            params,
            cache,
            trajectory_out,
        } => {
            let p = params.merged()?;
            let alpha = p.single_alpha()?;
            let delta = p.single_delta()?;
            let (n, m) = p.grid();
            let lambda = p.lambda.unwrap_or(if delta > 0.0 {
                NOISY_LAMBDA
            } else {
                NOISE_FREE_LAMBDA
            });
            let profile = experiment::manufactured_reconstruction(
                p.domain().case(alpha),
                n,
                m,
                p.grading().resolve(alpha),
                lambda,
                delta,
                p.seed.unwrap_or(DEFAULT_SEED),
                cache.as_deref(),
            )?;
            let rep = &profile.report;
            eprintln!(
                "E_u0_inf={} E_u0_2={} E_psi_inf={} E_psi_2={} wall={:.3}s",
                experiment::format_sci(rep.initial.inf),
                experiment::format_sci(rep.initial.l2h),
                experiment::format_sci(rep.terminal.inf),
                experiment::format_sci(rep.terminal.l2h),
                rep.wall_time.as_secs_f64()
            );
            with_output(p.out.as_deref(), |w| Ok(profile.write_csv(w)?))?;
            if let Some(path) = trajectory_out {
                with_output(Some(&path), |w| {
                    Ok(experiment::write_trajectory(&profile.trajectory, w)?)
                })?;
            }
            Ok(())
        }
        Command::Table1 {
            params,
            no_mesh_check,
        } => {
            let p = params.merged()?;
            let grids = match (p.n, p.m) {
                (None, None) => TABLE1_GRIDS.to_vec(),
                (n, m) => vec![(n.or(m).unwrap_or(100), m.or(n).unwrap_or(100))],
            };
            let lambda = p.lambda.unwrap_or(NOISE_FREE_LAMBDA);
            let mut rows =
                experiment::run_table1(&p.alphas(), &grids, lambda, p.grading(), p.domain())?;
            if !no_mesh_check && p.r.is_none() {
                let extra = experiment::mesh_disagreements(&rows, Grading::Uniform)?;
                rows.extend(extra);
            }
            report_wall_time(&rows);
            with_output(p.out.as_deref(), |w| {
                Ok(experiment::write_reports(&rows, w)?)
            })
        }
        Command::Table2 { params } => {
            let p = params.merged()?;
            let (n, m) = p.grid();
            let deltas = if p.delta.is_empty() {
                TABLE2_DELTAS.to_vec()
            } else {
                p.delta.clone()
            };
            let rows = experiment::run_table2(
                &p.alphas(),
                &deltas,
                n,
                m,
                p.lambda.unwrap_or(NOISY_LAMBDA),
                p.seed.unwrap_or(DEFAULT_SEED),
                p.grading(),
                p.domain(),
            )?;
            report_wall_time(&rows);
            with_output(p.out.as_deref(), |w| {
                Ok(experiment::write_reports(&rows, w)?)
            })
        }
        Command::OracleCheck {
            params,
            modes,
            fine_m,
        } => {
            let p = params.merged()?;
            let alpha = p.single_alpha()?;
            let n = p.n.unwrap_or(200);
            let m = p.m.unwrap_or(200);
            let report = experiment::run_oracle_check(
                p.domain().case(alpha),
                modes.unwrap_or(DEFAULT_MODES),
                fine_m.unwrap_or(10_000),
                n,
                m,
                p.grading().resolve(alpha),
                p.lambda.unwrap_or(NOISE_FREE_LAMBDA),
            )?;
            eprintln!("fd_oracle_gap={}", experiment::format_sci(report.fd_gap));
            with_output(p.out.as_deref(), |w| Ok(report.write_csv(w)?))
        }
    }
}

fn report_wall_time(rows: &[experiment::ErrorReport]) {
    for r in rows {
        eprintln!(
            "alpha={} N={} M={} r={:.4} delta={} wall={:.3}s",
            r.alpha,
            r.n,
            r.m,
            r.r,
            r.delta,
            r.wall_time.as_secs_f64()
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
