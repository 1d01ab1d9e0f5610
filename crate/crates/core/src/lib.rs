//! Jamming-oriented deployment optimization for UAV swarms with directional
//! antennas.
//!
//! The library minimizes the average SINR a set of ground targets receives
//! from their control center by jointly choosing the swarm's positions
//! (inside an x-limited half-plane, at fixed altitude) and antenna azimuths.
//! The main solver splits the separation constraints with auxiliary
//! difference variables and alternates closed-form projections, a hybrid
//! accelerated gradient-projection step for positions, multi-start descent
//! for azimuths, and clipped multiplier updates until the consensus residual
//! is small. Two block-coordinate-descent baselines are included for
//! comparison sweeps.
//!
//! Modules:
//! - [`scenario`]: problem instances, parsing, random generation
//! - [`signal`]: antenna gain, channel, SINR objective, analytic gradients
//! - [`constraints`]: auxiliary splitting, projections, primal residual
//! - [`gradproj`]: hybrid NAG/RMS gradient projection inner solver
//! - [`admm`]: the outer alternating solver
//! - [`baselines`]: the two comparison schemes
//! - [`report`]: result documents shared by every scheme

pub mod admm;
pub mod baselines;
pub mod constraints;
pub mod error;
pub mod gradproj;
pub mod report;
pub mod scenario;
mod search;
pub mod signal;

pub use admm::{solve, AdmmConfig, AdmmSolver, AdmmState, MultiplierClip};
pub use baselines::{baseline1, baseline2, BcdConfig};
pub use error::{Error, Result, Violation};
pub use gradproj::GradProjConfig;
pub use report::SolverReport;
pub use scenario::{random_scenario, Deployment, RegionBounds, Scenario, ScenarioParams};
pub use signal::GainMode;
