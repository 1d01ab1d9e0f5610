//! Solver result document plus deployment feasibility measurements shared by
//! the proposed solver and the baseline schemes.

use serde::Serialize;
use std::time::Duration;

use crate::error::Result;
use crate::scenario::{linear_to_db, Deployment, Scenario};
use crate::signal::{avg_sinr, sinr_target, GainMode};

/// Distance slack of a deployment against the separation constraints;
/// negative slack means violation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeasibilitySlack {
    /// min over pairs of (distance - min_uav_sep); infinite for one UAV.
    pub uav_sep: f64,
    /// min over UAV-target pairs of (distance - min_target_sep).
    pub target_sep: f64,
    /// max over UAVs of (x - deploy_x_max); feasible when <= 0.
    pub x_excess: f64,
}

pub(crate) fn pairwise_slack(positions: &[[f64; 3]], min_sep: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let d = dist3(positions[i], positions[j]);
            worst = worst.min(d - min_sep);
        }
    }
    worst
}

pub(crate) fn target_slack(positions: &[[f64; 3]], targets: &[[f64; 3]], min_sep: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for p in positions {
        for t in targets {
            worst = worst.min(dist3(*p, *t) - min_sep);
        }
    }
    worst
}

pub(crate) fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub(crate) fn slacks(s: &Scenario, d: &Deployment) -> FeasibilitySlack {
    FeasibilitySlack {
        uav_sep: pairwise_slack(d.positions(), s.min_uav_sep()),
        target_sep: target_slack(d.positions(), s.target_positions(), s.min_target_sep()),
        x_excess: d
            .positions()
            .iter()
            .map(|p| p[0] - s.deploy_x_max())
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Deployment satisfies the half-plane exactly and the separation
/// constraints within the given fractional tolerance.
pub(crate) fn is_feasible(s: &Scenario, d: &Deployment, tol_frac: f64) -> bool {
    let sl = slacks(s, d);
    sl.x_excess <= 0.0
        && sl.uav_sep >= -tol_frac * s.min_uav_sep()
        && sl.target_sep >= -tol_frac * s.min_target_sep()
}

/// Final solver output: the chosen deployment, the reported (hard-lobe)
/// SINR metrics, and the per-iteration traces.
#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub scheme: String,
    pub converged: bool,
    pub outer_iterations: usize,
    /// Consensus residual at exit; absent for schemes without one.
    pub final_residual: Option<f64>,
    pub avg_sinr: f64,
    pub avg_sinr_db: f64,
    pub per_target_sinr: Vec<f64>,
    pub per_target_sinr_db: Vec<f64>,
    pub deployment: Deployment,
    pub slack: FeasibilitySlack,
    pub residual_history: Vec<f64>,
    pub hard_objective_history: Vec<f64>,
    pub smooth_objective_history: Vec<f64>,
    /// Wall time is inherently nondeterministic, so it never enters the
    /// serialized document.
    #[serde(skip_serializing)]
    pub wall_time: Duration,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_report(
    s: &Scenario,
    scheme: &str,
    deployment: Deployment,
    converged: bool,
    outer_iterations: usize,
    final_residual: Option<f64>,
    residual_history: Vec<f64>,
    hard_objective_history: Vec<f64>,
    smooth_objective_history: Vec<f64>,
    wall_time: Duration,
) -> Result<SolverReport> {
    let per_target_sinr: Vec<f64> = (0..s.num_targets())
        .map(|k| sinr_target(s, &deployment, k, GainMode::Hard))
        .collect::<Result<_>>()?;
    let per_target_sinr_db = per_target_sinr.iter().map(|v| linear_to_db(*v)).collect();
    let avg = avg_sinr(s, &deployment, GainMode::Hard)?;
    let slack = slacks(s, &deployment);
    Ok(SolverReport {
        scheme: scheme.to_string(),
        converged,
        outer_iterations,
        final_residual,
        avg_sinr: avg,
        avg_sinr_db: linear_to_db(avg),
        per_target_sinr,
        per_target_sinr_db,
        deployment,
        slack,
        residual_history,
        hard_objective_history,
        smooth_objective_history,
        wall_time,
    })
}
