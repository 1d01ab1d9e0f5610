//! Command-line argument declarations and their mapping onto solver configs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use swarmjam::{AdmmConfig, BcdConfig, GradProjConfig, MultiplierClip};

#[derive(Debug, Parser)]
#[command(
    name = "swarmjam",
    about = "Jamming-oriented UAV swarm deployment solver and experiment harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario file and write the report plus CSV tables.
    Solve(SolveArgs),
    /// Run a seeded scheme-by-swarm-size sweep and write detail/aggregate CSVs.
    Sweep(SweepArgs),
    /// Sweep with every scheme enabled.
    Compare(CompareArgs),
    /// Render a deployment or sweep CSV as SVG plus its plain-data series.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Proposed,
    Baseline1,
    Baseline2,
}

impl SchemeArg {
    pub fn name(self) -> &'static str {
        match self {
            SchemeArg::Proposed => "proposed",
            SchemeArg::Baseline1 => "baseline1",
            SchemeArg::Baseline2 => "baseline2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClipModeArg {
    /// Divide an over-threshold multiplier matrix by its largest entry.
    Printed,
    /// Rescale it so the largest entry equals the bound.
    Clamp,
}

/// Overrides mirroring the solver configuration; unset flags keep defaults.
#[derive(Debug, Clone, Args)]
pub struct SolverOverrides {
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub omega_chi: Option<f64>,
    #[arg(long)]
    pub omega_mu: Option<f64>,
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long)]
    pub psi_starts: Option<usize>,
    #[arg(long)]
    pub psi_step: Option<f64>,
    #[arg(long)]
    pub psi_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub clip_mode: Option<ClipModeArg>,
    #[arg(long)]
    pub beta_nag: Option<f64>,
    #[arg(long)]
    pub rho_rms: Option<f64>,
    #[arg(long)]
    pub eps_rms: Option<f64>,
    #[arg(long)]
    pub alpha_nag: Option<f64>,
    #[arg(long)]
    pub alpha_search: Option<f64>,
    #[arg(long)]
    pub inner_max_iters: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
}

impl SolverOverrides {
    pub fn admm_config(&self) -> AdmmConfig {
        let mut cfg = AdmmConfig::default();
        let mut inner = GradProjConfig::default();
        if let Some(v) = self.rho1 {
            cfg.rho1 = v;
        }
        if let Some(v) = self.rho2 {
            cfg.rho2 = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if let Some(v) = self.omega_chi {
            cfg.omega_chi = v;
        }
        if let Some(v) = self.omega_mu {
            cfg.omega_mu = v;
        }
        if let Some(v) = self.max_outer_iters {
            cfg.max_outer_iters = v;
        }
        if let Some(v) = self.psi_starts {
            cfg.psi_starts = v;
        }
        if let Some(v) = self.psi_step {
            cfg.psi_step = v;
        }
        if let Some(v) = self.psi_iters {
            cfg.psi_iters = v;
        }
        if let Some(v) = self.clip_mode {
            cfg.multiplier_clip = match v {
                ClipModeArg::Printed => MultiplierClip::RescaleByMax,
                ClipModeArg::Clamp => MultiplierClip::ClampAtOmega,
            };
        }
        if let Some(v) = self.beta_nag {
            inner.beta_nag = v;
        }
        if let Some(v) = self.rho_rms {
            inner.rho_rms = v;
        }
        if let Some(v) = self.eps_rms {
            inner.eps_rms = v;
        }
        if let Some(v) = self.alpha_nag {
            inner.alpha_nag = v;
        }
        if let Some(v) = self.alpha_search {
            inner.alpha_search = v;
        }
        if let Some(v) = self.inner_max_iters {
            inner.max_iters = v;
        }
        if let Some(v) = self.inner_tol {
            inner.tol = v;
        }
        cfg.gradproj = inner;
        cfg
    }

    pub fn bcd_config(&self) -> BcdConfig {
        BcdConfig::default()
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Scenario document to solve.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory for report.json and the CSV tables.
    #[arg(long)]
    pub out: PathBuf,
    /// Scheme to run.
    #[arg(long, value_enum, default_value = "proposed")]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub overrides: SolverOverrides,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Swarm sizes to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub m_values: Vec<usize>,
    /// Number of targets per scenario.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Scenarios per (scheme, M) cell.
    #[arg(long, default_value_t = 10)]
    pub num_seeds: usize,
    /// Base seed; cell seeds are base + index.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Schemes to run.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "proposed")]
    pub schemes: Vec<SchemeArg>,
    /// Output directory for the detail and aggregate CSVs.
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent solver jobs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub overrides: SolverOverrides,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub m_values: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub num_seeds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub overrides: SolverOverrides,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input CSV: a deployment table or a sweep aggregate.
    #[arg(long)]
    pub input: PathBuf,
    /// Output SVG path; the plotted series land next to it as CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Scenario file for target overlays on deployment plots.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Main-lobe half beamwidth for the wedges, degrees.
    #[arg(long, default_value_t = 15.0)]
    pub half_beamwidth_deg: f64,
}
