//! The two comparison schemes: nearest-to-target placement with
//! angle-only block coordinate descent, and full alternating block
//! coordinate descent over angles and positions.
//!
//! Both schemes optimize the hard-lobe objective directly, so the 1-D angle
//! minimizations use grid search plus golden-section refinement rather than
//! derivatives.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::report::{build_report, dist3, SolverReport};
use crate::scenario::{wrap_angle, Deployment, Scenario};
use crate::signal::{avg_sinr_raw, boresight_offset, AngleGeometry, GainMode};

#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    pub max_rounds: usize,
    /// Round-improvement threshold on the linear average SINR.
    pub coord_tol: f64,
    /// Grid resolution of the 1-D angle searches.
    pub angle_grid: usize,
    /// Candidate move length of the position local search, meters.
    pub position_step: f64,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            max_rounds: 50,
            coord_tol: 1e-9,
            angle_grid: 360,
            position_step: 20.0,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds < 1 || self.angle_grid < 4 {
            return Err(Error::InvalidConfig(
                "max_rounds must be >= 1 and angle_grid >= 4".into(),
            ));
        }
        if !(self.coord_tol > 0.0 && self.position_step > 0.0) {
            return Err(Error::InvalidConfig(
                "coord_tol and position_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn hard_avg(s: &Scenario, positions: &[[f64; 3]], azimuths: &[f64]) -> f64 {
    avg_sinr_raw(s, positions, azimuths, GainMode::Hard).unwrap_or(f64::INFINITY)
}

/// Nearest feasible point to the assigned target: start at the target's
/// horizontal position and pull back along the control-center-to-target line
/// (extended past the target, into the deployable side) until both the
/// half-plane and the separation sphere hold.
fn nearest_feasible_point(s: &Scenario, target: [f64; 3]) -> [f64; 2] {
    let c = s.control_center();
    let mut ux = target[0] - c[0];
    let mut uy = target[1] - c[1];
    let norm = ux.hypot(uy);
    if norm < 1e-9 || ux / norm > -1e-6 {
        // degenerate or region-facing geometry: pull straight back in -x
        ux = -1.0;
        uy = 0.0;
    } else {
        ux /= norm;
        uy /= norm;
    }
    let dz = s.altitude() - target[2];
    let h_sep = (s.min_target_sep().powi(2) - dz * dz).max(0.0).sqrt();
    let h_region = if target[0] > s.deploy_x_max() {
        (s.deploy_x_max() - target[0]) / ux
    } else {
        0.0
    };
    let h = h_sep.max(h_region).max(0.0);
    [(target[0] + h * ux).min(s.deploy_x_max()), target[1] + h * uy]
}

/// Count of targets inside the hard main lobe for a candidate heading.
fn lobe_cover_count(s: &Scenario, position: [f64; 3], heading: f64) -> usize {
    s.target_positions()
        .iter()
        .filter(|t| {
            let dx = t[0] - position[0];
            let dy = t[1] - position[1];
            let horiz = dx.hypot(dy);
            if horiz == 0.0 {
                return false;
            }
            let geom = AngleGeometry {
                azimuth: dy.atan2(dx),
                pitch: (t[2] - position[2]).atan2(horiz),
            };
            boresight_offset(&geom, heading) < s.half_beamwidth()
        })
        .count()
}

/// Grid search plus golden-section refinement of the hard objective as a
/// 1-D function of one UAV's heading.
fn best_heading_1d(
    s: &Scenario,
    positions: &[[f64; 3]],
    azimuths: &[f64],
    i: usize,
    grid: usize,
) -> (f64, f64) {
    let mut scratch = azimuths.to_vec();
    let (angle, value) = crate::search::best_angle_1d(
        |a: f64| {
            scratch[i] = a;
            hard_avg(s, positions, &scratch)
        },
        grid,
    );
    (wrap_angle(angle), value)
}

struct Placement {
    positions: Vec<[f64; 3]>,
    azimuths: Vec<f64>,
}

/// Round-robin assignment, nearest-feasible placement, deterministic y-offset
/// de-collision, and lobe-count heading init.
fn initial_placement(s: &Scenario, cfg: &BcdConfig) -> Result<Placement> {
    let m = s.num_uavs();
    let k = s.num_targets();
    if k == 0 {
        return Err(Error::Infeasible("no targets to assign".into()));
    }
    let h = s.altitude();
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(m);
    for i in 0..m {
        let target = s.target_positions()[i % k];
        let base = nearest_feasible_point(s, target);
        // perturb y by multiples of the anti-collision radius until the new
        // UAV clears all earlier ones and every separation sphere
        let mut placed = false;
        'offsets: for step in 0..(4 * m.max(1) as i64 + 1) {
            for sign in [1.0, -1.0] {
                if step == 0 && sign < 0.0 {
                    continue;
                }
                let y = base[1] + sign * step as f64 * s.min_uav_sep();
                let cand = [base[0], y, h];
                let clears_uavs = positions
                    .iter()
                    .all(|p| dist3(*p, cand) >= s.min_uav_sep() * (1.0 + 1e-9));
                let clears_targets = s
                    .target_positions()
                    .iter()
                    .all(|t| dist3(*t, cand) >= s.min_target_sep());
                if clears_uavs && clears_targets {
                    positions.push(cand);
                    placed = true;
                    break 'offsets;
                }
            }
        }
        if !placed {
            return Err(Error::Infeasible(format!(
                "could not de-collide UAV {i} by y offsets"
            )));
        }
    }
    let mut azimuths = Vec::with_capacity(m);
    for p in &positions {
        let mut best = (0usize, f64::INFINITY, 0.0f64);
        let mut trial = azimuths.clone();
        trial.push(0.0);
        for g in 0..cfg.angle_grid {
            let a = -PI + TAU * (g as f64 + 0.5) / cfg.angle_grid as f64;
            let count = lobe_cover_count(s, *p, a);
            if count < best.0 {
                continue;
            }
            // tie-break on the partial-deployment objective
            *trial.last_mut().unwrap() = a;
            let v = hard_avg(s, &positions[..trial.len()], &trial);
            if count > best.0 || v < best.1 {
                best = (count, v, a);
            }
        }
        azimuths.push(best.2);
    }
    Ok(Placement {
        positions,
        azimuths,
    })
}

/// Placement frozen at the nearest feasible points; block coordinate descent
/// over the headings only.
pub fn baseline1(s: &Scenario, cfg: &BcdConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let started = Instant::now();
    let place = initial_placement(s, cfg)?;
    let positions = place.positions;
    let mut azimuths = place.azimuths;
    let mut history = vec![hard_avg(s, &positions, &azimuths)];
    let mut smooth_history =
        vec![avg_sinr_raw(s, &positions, &azimuths, GainMode::Smooth).unwrap_or(f64::NAN)];
    let mut rounds = 0;
    for _ in 0..cfg.max_rounds {
        let before = *history.last().unwrap();
        for i in 0..s.num_uavs() {
            let (a, v) = best_heading_1d(s, &positions, &azimuths, i, cfg.angle_grid);
            if v <= before {
                azimuths[i] = a;
            }
        }
        let after = hard_avg(s, &positions, &azimuths);
        history.push(after);
        smooth_history
            .push(avg_sinr_raw(s, &positions, &azimuths, GainMode::Smooth).unwrap_or(f64::NAN));
        rounds += 1;
        if before - after < cfg.coord_tol {
            break;
        }
    }
    let horizontal: Vec<[f64; 2]> = positions.iter().map(|p| [p[0], p[1]]).collect();
    let deployment = Deployment::new(s, &horizontal, &azimuths)?;
    build_report(
        s,
        "baseline1",
        deployment,
        true,
        rounds,
        None,
        Vec::new(),
        history,
        smooth_history,
        started.elapsed(),
    )
}

fn position_feasible(
    s: &Scenario,
    positions: &[[f64; 3]],
    i: usize,
    candidate: [f64; 3],
) -> bool {
    if candidate[0] > s.deploy_x_max() {
        return false;
    }
    for (j, p) in positions.iter().enumerate() {
        if j != i && dist3(*p, candidate) < s.min_uav_sep() {
            return false;
        }
    }
    s.target_positions()
        .iter()
        .all(|t| dist3(*t, candidate) >= s.min_target_sep())
}

/// Alternating block coordinate descent: per-UAV heading minimization and
/// per-UAV projected position moves, starting from the angle-only scheme's
/// result. Every accepted move strictly decreases the hard objective and
/// respects the constraints exactly.
pub fn baseline2(s: &Scenario, cfg: &BcdConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let started = Instant::now();
    let warm = baseline1(s, cfg)?;
    let mut positions = warm.deployment.positions().to_vec();
    let mut azimuths = warm.deployment.azimuths().to_vec();
    let mut history = vec![hard_avg(s, &positions, &azimuths)];
    let mut smooth_history =
        vec![avg_sinr_raw(s, &positions, &azimuths, GainMode::Smooth).unwrap_or(f64::NAN)];
    let mut rounds = 0;
    for _ in 0..cfg.max_rounds {
        let before = *history.last().unwrap();
        let mut current = before;
        for i in 0..s.num_uavs() {
            let (a, v) = best_heading_1d(s, &positions, &azimuths, i, cfg.angle_grid);
            if v < current {
                azimuths[i] = a;
                current = v;
            }
        }
        for i in 0..s.num_uavs() {
            for _ in 0..500 {
                let mut improved = false;
                let mut best_move = positions[i];
                let mut best_v = current;
                for (dx, dy) in [
                    (cfg.position_step, 0.0),
                    (-cfg.position_step, 0.0),
                    (0.0, cfg.position_step),
                    (0.0, -cfg.position_step),
                ] {
                    let cand = [positions[i][0] + dx, positions[i][1] + dy, positions[i][2]];
                    if !position_feasible(s, &positions, i, cand) {
                        continue;
                    }
                    let mut trial = positions.clone();
                    trial[i] = cand;
                    let v = hard_avg(s, &trial, &azimuths);
                    if v < best_v {
                        best_v = v;
                        best_move = cand;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
                positions[i] = best_move;
                current = best_v;
            }
        }
        history.push(current);
        smooth_history
            .push(avg_sinr_raw(s, &positions, &azimuths, GainMode::Smooth).unwrap_or(f64::NAN));
        rounds += 1;
        if before - current < cfg.coord_tol {
            break;
        }
    }
    let horizontal: Vec<[f64; 2]> = positions.iter().map(|p| [p[0], p[1]]).collect();
    let deployment = Deployment::new(s, &horizontal, &azimuths)?;
    build_report(
        s,
        "baseline2",
        deployment,
        true,
        rounds,
        None,
        Vec::new(),
        history,
        smooth_history,
        started.elapsed(),
    )
}
