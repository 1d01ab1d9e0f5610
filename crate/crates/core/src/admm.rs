//! Outer solver: augmented-Lagrangian assembly, the four alternating update
//! steps, clipped multiplier updates, and the consensus stop rule.

use std::time::Instant;

use crate::constraints::{primal_residual, step1_update, AuxState, ConstraintMaps};
use crate::error::{Error, Result};
use crate::gradproj::{gradient_projection, GradProjConfig};
use crate::report::{build_report, is_feasible, slacks, SolverReport};
use crate::scenario::{wrap_angle, Deployment, Scenario};
use crate::signal::{avg_sinr_raw, grad_avg_sinr_psi_raw, grad_avg_sinr_q_raw, GainMode};

/// How an over-threshold multiplier candidate is brought back in range.
/// `RescaleByMax` divides the whole matrix by its largest absolute entry,
/// exactly as the update rule is printed; `ClampAtOmega` rescales so the
/// largest entry equals the bound instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierClip {
    RescaleByMax,
    ClampAtOmega,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    /// Penalty factor on the UAV-target consensus block.
    pub rho1: f64,
    /// Penalty factor on the UAV-UAV consensus block.
    pub rho2: f64,
    /// Residual threshold for termination.
    pub eta: f64,
    pub omega_chi: f64,
    pub omega_mu: f64,
    pub max_outer_iters: usize,
    /// Number of evenly spaced heading vectors tried per angle update, in
    /// addition to the incumbent.
    pub psi_starts: usize,
    /// Initial step length of the angle descent, radians.
    pub psi_step: f64,
    /// Accepted-step budget of the angle descent.
    pub psi_iters: usize,
    pub multiplier_clip: MultiplierClip,
    pub gradproj: GradProjConfig,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho1: 0.01,
            rho2: 0.01,
            eta: 1e-3,
            omega_chi: 200.0,
            omega_mu: 200.0,
            max_outer_iters: 300,
            psi_starts: 8,
            psi_step: 1.0,
            psi_iters: 150,
            multiplier_clip: MultiplierClip::RescaleByMax,
            gradproj: GradProjConfig::default(),
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.rho1 >= 0.0 && self.rho1.is_finite()) {
            return bad("rho1 must be nonnegative");
        }
        if !(self.rho2 >= 0.0 && self.rho2.is_finite()) {
            return bad("rho2 must be nonnegative");
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive");
        }
        if !(self.omega_chi > 0.0 && self.omega_mu > 0.0) {
            return bad("multiplier bounds must be positive");
        }
        if self.max_outer_iters < 1 {
            return bad("max_outer_iters must be >= 1");
        }
        if self.psi_starts < 1 {
            return bad("psi_starts must be >= 1");
        }
        if !(self.psi_step > 0.0) {
            return bad("psi_step must be positive");
        }
        if self.psi_iters < 1 {
            return bad("psi_iters must be >= 1");
        }
        self.gradproj.validate()
    }
}

/// Mutable solver state threaded through the four update steps.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub deployment: Deployment,
    pub aux: AuxState,
    pub residual_history: Vec<f64>,
    pub hard_objective_history: Vec<f64>,
    pub smooth_objective_history: Vec<f64>,
    pub iter: usize,
}

/// One scenario/config binding, with the pair maps built once.
pub struct AdmmSolver<'a> {
    scenario: &'a Scenario,
    cfg: &'a AdmmConfig,
    maps: ConstraintMaps,
}

/// Fractional separation tolerance accepted at exit; consensus is only
/// eta-exact, so reported deployments are polished back to this band.
pub const EXIT_SEP_TOL: f64 = 1e-6;

impl<'a> AdmmSolver<'a> {
    pub fn new(scenario: &'a Scenario, cfg: &'a AdmmConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            scenario,
            cfg,
            maps: ConstraintMaps::build(scenario.num_uavs(), scenario.num_targets()),
        })
    }

    pub fn maps(&self) -> &ConstraintMaps {
        &self.maps
    }

    /// Worst boresight offset over a target group seen from (x, y), with the
    /// heading at the group's circular-mean azimuth.
    fn group_coverage(&self, group: &[usize], x: f64, y: f64) -> (f64, f64) {
        let s = self.scenario;
        let targets = s.target_positions();
        let (mut sx, mut sy) = (0.0, 0.0);
        for &t in group {
            let az = (targets[t][1] - y).atan2(targets[t][0] - x);
            sx += az.cos();
            sy += az.sin();
        }
        let heading = sy.atan2(sx);
        let worst = group
            .iter()
            .map(|&t| {
                let tp = targets[t];
                let dx = tp[0] - x;
                let dy = tp[1] - y;
                let horiz = dx.hypot(dy).max(1e-9);
                let geom = crate::signal::AngleGeometry {
                    azimuth: dy.atan2(dx),
                    pitch: (tp[2] - s.altitude()).atan2(horiz),
                };
                crate::signal::boresight_offset(&geom, heading)
            })
            .fold(0.0f64, f64::max);
        (worst, heading)
    }

    /// Jamming-contribution score of one UAV at (x, y) toward its group,
    /// heading at the circular-mean azimuth: the hard-lobe sum of gain over
    /// squared distance, with a vanishing smooth term to break plateau ties.
    fn group_score(&self, group: &[usize], x: f64, y: f64) -> f64 {
        let s = self.scenario;
        let targets = s.target_positions();
        let (_, heading) = self.group_coverage(group, x, y);
        let mut hard = 0.0;
        let mut smooth = 0.0;
        for &t in group {
            let tp = targets[t];
            let dx = tp[0] - x;
            let dy = tp[1] - y;
            let dz = tp[2] - s.altitude();
            let d2 = dx * dx + dy * dy + dz * dz;
            let horiz = dx.hypot(dy).max(1e-9);
            let geom = crate::signal::AngleGeometry {
                azimuth: dy.atan2(dx),
                pitch: dz.atan2(horiz),
            };
            let offset = crate::signal::boresight_offset(&geom, heading);
            hard += crate::signal::gain(offset, s.half_beamwidth(), GainMode::Hard) / d2;
            smooth += crate::signal::gain(offset, s.half_beamwidth(), GainMode::Smooth) / d2;
        }
        hard + 1e-9 * smooth
    }

    /// Place every group at its best-scoring candidate: either on the
    /// boundary line across a wide y sweep (oblique look angles flatten the
    /// pitch and shrink a group's angular spread) or pulled back in x at the
    /// group's y middle. The line-up is then de-collided by y offsets and
    /// pulled off the separation spheres. Returns positions, headings, and
    /// the hard objective.
    fn build_placement(&self, groups: &[Vec<usize>]) -> Result<(Vec<[f64; 2]>, Vec<f64>, f64)> {
        let s = self.scenario;
        let m = groups.len();
        let targets = s.target_positions();
        let y_lo = targets.iter().map(|t| t[1]).fold(f64::INFINITY, f64::min) - 3000.0;
        let y_hi = targets
            .iter()
            .map(|t| t[1])
            .fold(f64::NEG_INFINITY, f64::max)
            + 3000.0;
        let mut horizontal: Vec<[f64; 2]> = Vec::with_capacity(m);
        let mut azimuths: Vec<f64> = Vec::with_capacity(m);
        for group in groups {
            let ys: Vec<f64> = group.iter().map(|&t| targets[t][1]).collect();
            let y_mid = 0.5
                * (ys.iter().cloned().fold(f64::INFINITY, f64::min)
                    + ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            let mut best = (f64::NEG_INFINITY, s.deploy_x_max(), y_mid);
            let steps = ((y_hi - y_lo) / 50.0).ceil() as usize;
            for gi in 0..=steps {
                let y = y_lo + 50.0 * gi as f64;
                let score = self.group_score(group, s.deploy_x_max(), y);
                if score > best.0 {
                    best = (score, s.deploy_x_max(), y);
                }
            }
            for bi in 0..320 {
                let x = s.deploy_x_max() - 25.0 * bi as f64;
                let score = self.group_score(group, x, y_mid);
                if score > best.0 {
                    best = (score, x, y_mid);
                }
            }
            let (_, x, y) = best;
            let (_, heading) = self.group_coverage(group, x, y);
            horizontal.push([x, y]);
            azimuths.push(wrap_angle(heading));
        }

        // de-collide by y offsets, then clear every separation sphere by
        // pulling left (the altitude gap usually already clears them)
        for i in 1..m {
            let mut offset = 0usize;
            loop {
                let step = ((offset + 1) / 2) as f64 * 1.05 * s.min_uav_sep();
                let sign = if offset % 2 == 1 { 1.0 } else { -1.0 };
                let cand_y = horizontal[i][1] + sign * step;
                let ok = horizontal[..i].iter().all(|p| {
                    (p[0] - horizontal[i][0]).hypot(p[1] - cand_y) >= 1.05 * s.min_uav_sep()
                });
                if ok {
                    horizontal[i][1] = cand_y;
                    break;
                }
                offset += 1;
                if offset > 8 * m {
                    return Err(Error::Infeasible(
                        "could not de-collide the initial line-up".into(),
                    ));
                }
            }
        }
        for p in horizontal.iter_mut() {
            for t in targets {
                let dy = p[1] - t[1];
                let dz = s.altitude() - t[2];
                let gap_sq = s.min_target_sep().powi(2) - dy * dy - dz * dz;
                if gap_sq > 0.0 {
                    let gap = gap_sq.sqrt();
                    if p[0] > t[0] - gap && p[0] < t[0] + gap {
                        p[0] = t[0] - gap;
                    }
                }
            }
        }
        let positions: Vec<[f64; 3]> = horizontal
            .iter()
            .map(|p| [p[0], p[1], s.altitude()])
            .collect();
        let value =
            avg_sinr_raw(s, &positions, &azimuths, GainMode::Hard).unwrap_or(f64::INFINITY);
        Ok((horizontal, azimuths, value))
    }

    /// All set partitions of the y-sorted target list into exactly `g`
    /// groups, by restricted-growth-string enumeration.
    fn partitions_into(order: &[usize], g: usize, cap: usize) -> Vec<Vec<Vec<usize>>> {
        let k = order.len();
        let mut out = Vec::new();
        let mut assignment = vec![0usize; k];
        loop {
            let used = assignment.iter().copied().max().unwrap() + 1;
            if used == g {
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g];
                for (slot, &grp) in assignment.iter().enumerate() {
                    groups[grp].push(order[slot]);
                }
                out.push(groups);
                if out.len() >= cap {
                    break;
                }
            }
            let mut idx = k;
            loop {
                if idx == 1 {
                    idx = 0;
                    break;
                }
                idx -= 1;
                let limit = assignment[..idx].iter().copied().max().unwrap_or(0) + 1;
                if assignment[idx] < limit && assignment[idx] + 1 <= g - 1 {
                    assignment[idx] += 1;
                    for a in assignment.iter_mut().skip(idx + 1) {
                        *a = 0;
                    }
                    break;
                }
            }
            if idx == 0 {
                break;
            }
        }
        out
    }

    /// Ways to hand `extra` indistinct surplus UAVs to `g` groups (sorted
    /// multisets of group indices).
    fn surplus_distributions(g: usize, extra: usize, cap: usize) -> Vec<Vec<usize>> {
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..extra {
            let mut next = Vec::new();
            for prefix in &stack {
                let from = prefix.last().copied().unwrap_or(0);
                for slot in from..g {
                    let mut grown = prefix.clone();
                    grown.push(slot);
                    next.push(grown);
                }
            }
            stack = next;
            if stack.len() > cap {
                stack.truncate(cap);
            }
        }
        stack
    }

    /// Candidate target-to-UAV groupings, deterministically ordered: every
    /// partition of the targets into g <= min(m, k) coverage groups,
    /// combined with every way of assigning the surplus UAVs as duplicates
    /// of a group. Falls back to one contiguous y-split when the counts are
    /// too large to enumerate.
    fn candidate_groupings(&self) -> Vec<Vec<Vec<usize>>> {
        let s = self.scenario;
        let m = s.num_uavs();
        let k = s.num_targets();
        let targets = s.target_positions();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            targets[a][1]
                .partial_cmp(&targets[b][1])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
        if k <= 6 && m <= 8 {
            for g in (1..=m.min(k)).rev() {
                for partition in Self::partitions_into(&order, g, 120) {
                    for dup in Self::surplus_distributions(g, m - g, 60) {
                        let mut groups = partition.clone();
                        for slot in dup {
                            groups.push(partition[slot].clone());
                        }
                        out.push(groups);
                    }
                    if out.len() > 300 {
                        return out;
                    }
                }
            }
        } else {
            let base = k / m.max(1);
            let extra = k % m.max(1);
            let mut groups = Vec::with_capacity(m);
            let mut at = 0;
            for g in 0..m {
                let len = base + usize::from(g < extra);
                if len == 0 {
                    groups.push(vec![order[g % k]]);
                } else {
                    groups.push(order[at..at + len].to_vec());
                    at += len;
                }
            }
            out.push(groups);
        }
        out
    }

    /// Deterministic feasible start: the best-scoring candidate grouping,
    /// with each UAV's x then refined by golden-section search on the hard
    /// objective.
    ///
    /// Placement quality matters more here than in a generic local solver:
    /// with slack separation constraints the position updates are proximal
    /// steps of roughly |grad|/(rho*K) meters and the consensus residual
    /// vanishes as soon as that drift velocity is steady, so the outer loop
    /// refines locally but cannot cross hundreds of meters.
    pub fn default_init(&self) -> Result<Deployment> {
        let s = self.scenario;
        let mut best: Option<(Vec<[f64; 2]>, Vec<f64>, f64, Vec<Vec<usize>>)> = None;
        for groups in self.candidate_groupings() {
            let (horizontal, azimuths, value) = self.build_placement(&groups)?;
            if best.as_ref().is_none_or(|b| value < b.2) {
                best = Some((horizontal, azimuths, value, groups));
            }
        }
        let (mut horizontal, mut azimuths, mut value, _groups) =
            best.ok_or_else(|| Error::Infeasible("no placement candidates".into()))?;

        // alternating per-UAV refinement rounds against the full hard
        // objective: heading sweep, then windowed golden searches on x and y
        for _ in 0..3 {
            let before = value;
            for i in 0..horizontal.len() {
                let (heading, hv) = self.refine_heading(&horizontal, &azimuths, i);
                if hv < value {
                    azimuths[i] = heading;
                    value = hv;
                }
                for axis in 0..2 {
                    if let Some((coord, better)) =
                        self.refine_axis(&horizontal, &azimuths, i, axis, value)
                    {
                        horizontal[i][axis] = coord;
                        value = better;
                    }
                }
            }
            if before - value < 1e-12 {
                break;
            }
        }

        Deployment::new(s, &horizontal, &azimuths)
    }

    fn refine_heading(&self, horizontal: &[[f64; 2]], azimuths: &[f64], i: usize) -> (f64, f64) {
        let s = self.scenario;
        let pos: Vec<[f64; 3]> = horizontal
            .iter()
            .map(|p| [p[0], p[1], s.altitude()])
            .collect();
        let mut az = azimuths.to_vec();
        let (angle, value) = crate::search::best_angle_1d(
            |a: f64| {
                az[i] = a;
                avg_sinr_raw(s, &pos, &az, GainMode::Hard).unwrap_or(f64::INFINITY)
            },
            256,
        );
        (wrap_angle(angle), value)
    }

    /// Golden-section refine of one coordinate of one UAV against the full
    /// hard objective, rejecting infeasible moves.
    fn refine_axis(
        &self,
        horizontal: &[[f64; 2]],
        azimuths: &[f64],
        i: usize,
        axis: usize,
        incumbent: f64,
    ) -> Option<(f64, f64)> {
        let s = self.scenario;
        let mut pos: Vec<[f64; 3]> = horizontal
            .iter()
            .map(|p| [p[0], p[1], s.altitude()])
            .collect();
        let eval = |pos: &mut Vec<[f64; 3]>, coord: f64| -> f64 {
            pos[i][axis] = coord;
            if pos[i][0] > s.deploy_x_max() {
                return f64::INFINITY;
            }
            let here = pos[i];
            let feasible = pos
                .iter()
                .enumerate()
                .all(|(j, p)| {
                    j == i || (p[0] - here[0]).hypot(p[1] - here[1]) >= s.min_uav_sep()
                })
                && s
                    .target_positions()
                    .iter()
                    .all(|t| crate::report::dist3(here, *t) >= s.min_target_sep());
            if !feasible {
                return f64::INFINITY;
            }
            avg_sinr_raw(s, pos, azimuths, GainMode::Hard).unwrap_or(f64::INFINITY)
        };
        let center = horizontal[i][axis];
        let (lo, hi) = if axis == 0 {
            ((center - 400.0).min(s.deploy_x_max()), s.deploy_x_max())
        } else {
            (center - 400.0, center + 400.0)
        };
        let (refined, f_ref) =
            crate::search::golden_min(|c| eval(&mut pos, c), lo, hi, 50);
        if f_ref < incumbent {
            Some((refined, f_ref))
        } else {
            None
        }
    }

    /// Auxiliary rows at their consensus values projected to feasibility,
    /// multipliers zero.
    pub fn initial_state(&self, init: &Deployment) -> AdmmState {
        let zero = AuxState::zeros(&self.maps);
        let aux = step1_update(
            &self.maps,
            init.positions(),
            self.scenario.target_positions(),
            &zero,
            self.scenario,
        );
        AdmmState {
            deployment: init.clone(),
            aux,
            residual_history: Vec::new(),
            hard_objective_history: Vec::new(),
            smooth_objective_history: Vec::new(),
            iter: 0,
        }
    }

    fn penalty_value(&self, positions: &[[f64; 3]], aux: &AuxState) -> f64 {
        let s = self.scenario;
        let targets = s.target_positions();
        let mut chi_pen = 0.0;
        let mut chi_norm = 0.0;
        for (v, &(i, k)) in self.maps.target_pairs().iter().enumerate() {
            for a in 0..3 {
                let r = positions[i][a] - targets[k][a] - aux.b[v][a] + aux.chi[v][a];
                chi_pen += r * r;
                chi_norm += aux.chi[v][a] * aux.chi[v][a];
            }
        }
        let mut mu_pen = 0.0;
        let mut mu_norm = 0.0;
        for (v, &(i, j)) in self.maps.uav_pairs().iter().enumerate() {
            for a in 0..3 {
                let r = positions[i][a] - positions[j][a] - aux.c[v][a] + aux.mu[v][a];
                mu_pen += r * r;
                mu_norm += aux.mu[v][a] * aux.mu[v][a];
            }
        }
        0.5 * self.cfg.rho1 * (chi_pen - chi_norm) + 0.5 * self.cfg.rho2 * (mu_pen - mu_norm)
    }

    fn penalty_grad(&self, positions: &[[f64; 3]], aux: &AuxState) -> Vec<[f64; 2]> {
        let s = self.scenario;
        let targets = s.target_positions();
        let mut grad = vec![[0.0f64; 2]; positions.len()];
        for (v, &(i, k)) in self.maps.target_pairs().iter().enumerate() {
            for a in 0..2 {
                let r = positions[i][a] - targets[k][a] - aux.b[v][a] + aux.chi[v][a];
                grad[i][a] += self.cfg.rho1 * r;
            }
        }
        for (v, &(i, j)) in self.maps.uav_pairs().iter().enumerate() {
            for a in 0..2 {
                let r = positions[i][a] - positions[j][a] - aux.c[v][a] + aux.mu[v][a];
                grad[i][a] += self.cfg.rho2 * r;
                grad[j][a] -= self.cfg.rho2 * r;
            }
        }
        grad
    }

    /// Scaled augmented Lagrangian at the current state (smooth objective).
    pub fn augmented_lagrangian(&self, st: &AdmmState) -> f64 {
        let d = &st.deployment;
        let gamma = avg_sinr_raw(self.scenario, d.positions(), d.azimuths(), GainMode::Smooth)
            .unwrap_or(f64::NAN);
        gamma + self.penalty_value(d.positions(), &st.aux)
    }

    /// Analytic horizontal gradient of the augmented Lagrangian at the
    /// state's deployment: smooth-objective gradient plus the closed-form
    /// quadratic penalty gradients.
    pub fn lagrangian_grad_q(&self, st: &AdmmState) -> Result<Vec<[f64; 2]>> {
        let d = &st.deployment;
        let mut grad = grad_avg_sinr_q_raw(self.scenario, d.positions(), d.azimuths())?;
        let pen = self.penalty_grad(d.positions(), &st.aux);
        for (g, p) in grad.iter_mut().zip(pen.iter()) {
            g[0] += p[0];
            g[1] += p[1];
        }
        Ok(grad)
    }

    /// Step 1: parallel-splittable projections of the auxiliary rows.
    pub fn step1(&self, st: &mut AdmmState) {
        st.aux = step1_update(
            &self.maps,
            st.deployment.positions(),
            self.scenario.target_positions(),
            &st.aux,
            self.scenario,
        );
    }

    /// Step 2: minimize the augmented Lagrangian over the horizontal UAV
    /// coordinates with the hybrid gradient-projection solver.
    pub fn update_q(&self, st: &mut AdmmState) -> Result<()> {
        let s = self.scenario;
        let psi = st.deployment.azimuths().to_vec();
        let aux = st.aux.clone();
        let h = s.altitude();
        let objective = |qh: &[[f64; 2]]| -> (f64, Vec<[f64; 2]>) {
            let pos3: Vec<[f64; 3]> = qh.iter().map(|p| [p[0], p[1], h]).collect();
            let gamma = avg_sinr_raw(s, &pos3, &psi, GainMode::Smooth);
            let ggrad = grad_avg_sinr_q_raw(s, &pos3, &psi);
            match (gamma, ggrad) {
                (Ok(value), Ok(mut grad)) => {
                    let pen = self.penalty_grad(&pos3, &aux);
                    for (gi, pi) in grad.iter_mut().zip(pen.iter()) {
                        gi[0] += pi[0];
                        gi[1] += pi[1];
                    }
                    (value + self.penalty_value(&pos3, &aux), grad)
                }
                _ => (f64::NAN, vec![[0.0; 2]; qh.len()]),
            }
        };
        // Coarse-to-fine cascade: the fixed-step inner loop stalls whenever
        // the proximal basin of the penalty terms is narrower than its
        // normalized step, so rerun it at shrinking base steps, warm-started
        // from the best point so far.
        let mut q = st.deployment.horizontal();
        let mut best = f64::INFINITY;
        for shrink in [1.0, 0.25, 0.0625, 0.015625, 0.00390625] {
            let stage_cfg = GradProjConfig {
                alpha_nag: self.cfg.gradproj.alpha_nag * shrink,
                ..self.cfg.gradproj.clone()
            };
            let sol = gradient_projection(&objective, &q, s.deploy_x_max(), &stage_cfg).map_err(
                |e| match e {
                    Error::InnerNumerical { iteration, .. } => Error::Numerical {
                        iteration: st.iter + 1,
                        message: format!("inner solver failed at its iteration {iteration}"),
                    },
                    other => other,
                },
            )?;
            if sol.objective < best {
                best = sol.objective;
                q = sol.q;
            }
        }
        st.deployment = Deployment::new(s, &q, &psi)?;
        Ok(())
    }

    fn descend_psi(&self, positions: &[[f64; 3]], start: Vec<f64>) -> (Vec<f64>, f64) {
        let s = self.scenario;
        let eval = |ps: &[f64]| {
            avg_sinr_raw(s, positions, ps, GainMode::Smooth).unwrap_or(f64::INFINITY)
        };
        let mut psi = start;
        let mut value = eval(&psi);
        let mut step = self.cfg.psi_step;
        for _ in 0..self.cfg.psi_iters {
            let grad = match grad_avg_sinr_psi_raw(s, positions, &psi) {
                Ok(g) => g,
                Err(_) => break,
            };
            let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
            if grad_sq < 1e-40 {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let cand: Vec<f64> = psi
                    .iter()
                    .zip(grad.iter())
                    .map(|(p, g)| p - step * g)
                    .collect();
                let cand_value = eval(&cand);
                if cand_value < value - 1e-4 * step * grad_sq {
                    psi = cand;
                    value = cand_value;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
            if !accepted {
                break;
            }
        }
        (psi, value)
    }

    /// Heading vectors that encode distinct target assignments. The smooth
    /// lobe's tails are wide enough that multi-lobe pile-ups and dedicated
    /// coverage score almost alike, so the descent needs starts on both
    /// sides of that divide.
    fn assignment_starts(&self, positions: &[[f64; 3]]) -> Vec<Vec<f64>> {
        let s = self.scenario;
        let targets = s.target_positions();
        let aim = |p: &[f64; 3], t: &[f64; 3]| (t[1] - p[1]).atan2(t[0] - p[0]);
        let nearest = positions
            .iter()
            .map(|p| {
                let t = targets
                    .iter()
                    .min_by(|a, b| {
                        let da = (a[0] - p[0]).powi(2) + (a[1] - p[1]).powi(2);
                        let db = (b[0] - p[0]).powi(2) + (b[1] - p[1]).powi(2);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                aim(p, t)
            })
            .collect();
        let y_aligned = positions
            .iter()
            .map(|p| {
                let t = targets
                    .iter()
                    .min_by(|a, b| {
                        let da = (a[1] - p[1]).abs();
                        let db = (b[1] - p[1]).abs();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                aim(p, t)
            })
            .collect();
        let round_robin = positions
            .iter()
            .enumerate()
            .map(|(i, p)| aim(p, &targets[i % targets.len()]))
            .collect();
        vec![nearest, y_aligned, round_robin]
    }

    /// Step 3 worker: runs the multi-start descent, installs the best vector
    /// by the smooth objective, and reports every wrapped candidate final so
    /// the caller can keep the best one by the reported metric as incumbent.
    fn step3(&self, st: &mut AdmmState) -> Vec<Vec<f64>> {
        let s = self.scenario;
        let positions = st.deployment.positions().to_vec();
        let m = s.num_uavs();
        let incumbent = st.deployment.azimuths().to_vec();
        let mut best =
            avg_sinr_raw(s, &positions, &incumbent, GainMode::Smooth).unwrap_or(f64::INFINITY);
        let mut best_psi = incumbent.clone();
        let mut finals: Vec<Vec<f64>> = Vec::new();

        let mut consider = |start: Vec<f64>, best: &mut f64, best_psi: &mut Vec<f64>| {
            let (psi, value) = self.descend_psi(&positions, start);
            finals.push(psi.iter().map(|a| wrap_angle(*a)).collect());
            if value < *best {
                *best = value;
                *best_psi = psi;
            }
        };
        consider(incumbent, &mut best, &mut best_psi);
        for k in 0..self.cfg.psi_starts {
            let angle = -std::f64::consts::PI
                + std::f64::consts::TAU * (k as f64 + 0.5) / self.cfg.psi_starts as f64;
            consider(vec![angle; m], &mut best, &mut best_psi);
        }
        for start in self.assignment_starts(&positions) {
            consider(start, &mut best, &mut best_psi);
        }

        let wrapped: Vec<f64> = best_psi.iter().map(|a| wrap_angle(*a)).collect();
        let horizontal = st.deployment.horizontal();
        st.deployment =
            Deployment::new(s, &horizontal, &wrapped).expect("wrapped azimuths are in range");
        finals
    }

    /// Step 3: heading update by multi-start descent on the smooth objective.
    /// Antenna-angle periodicity lets the descent run unconstrained; results
    /// are wrapped back into (-pi, pi] at the end.
    pub fn update_psi(&self, st: &mut AdmmState) {
        let _ = self.step3(st);
    }

    /// Step 4: multiplier ascent with the over-threshold rescale.
    pub fn update_multipliers(&self, st: &mut AdmmState) {
        let s = self.scenario;
        let positions = st.deployment.positions();
        let targets = s.target_positions();

        let mut chi_tilde = st.aux.chi.clone();
        for (v, &(i, k)) in self.maps.target_pairs().iter().enumerate() {
            for a in 0..3 {
                chi_tilde[v][a] += positions[i][a] - targets[k][a] - st.aux.b[v][a];
            }
        }
        st.aux.chi = clip_multiplier(chi_tilde, self.cfg.omega_chi, self.cfg.multiplier_clip);

        let mut mu_tilde = st.aux.mu.clone();
        for (v, &(i, j)) in self.maps.uav_pairs().iter().enumerate() {
            for a in 0..3 {
                mu_tilde[v][a] += positions[i][a] - positions[j][a] - st.aux.c[v][a];
            }
        }
        st.aux.mu = clip_multiplier(mu_tilde, self.cfg.omega_mu, self.cfg.multiplier_clip);
    }

    fn residual(&self, st: &AdmmState) -> f64 {
        primal_residual(
            &self.maps,
            st.deployment.positions(),
            self.scenario.target_positions(),
            &st.aux,
        )
    }

    /// Full alternating loop. Returns the best truly feasible incumbent by
    /// hard-lobe average SINR, so the report never degrades on the initial
    /// deployment and never carries more than the exit separation slack.
    pub fn solve(&self, init: Option<&Deployment>) -> Result<SolverReport> {
        let started = Instant::now();
        let s = self.scenario;
        let init = match init {
            Some(d) => {
                let sl = slacks(s, d);
                if sl.x_excess > 0.0 || sl.uav_sep < 0.0 || sl.target_sep < 0.0 {
                    return Err(Error::Infeasible(format!(
                        "given start violates constraints (x excess {:.3e}, pair slack {:.3e}, target slack {:.3e})",
                        sl.x_excess, sl.uav_sep, sl.target_sep
                    )));
                }
                d.clone()
            }
            None => self.default_init()?,
        };
        let mut st = self.initial_state(&init);

        let hard = |d: &Deployment| {
            avg_sinr_raw(s, d.positions(), d.azimuths(), GainMode::Hard).unwrap_or(f64::INFINITY)
        };
        let mut best_dep = init.clone();
        let mut best_val = hard(&init);
        let mut converged = false;

        for l in 1..=self.cfg.max_outer_iters {
            self.step1(&mut st);
            self.update_q(&mut st)?;
            let psi_finals = self.step3(&mut st);
            self.update_multipliers(&mut st);
            st.iter = l;

            let eps = self.residual(&st);
            st.residual_history.push(eps);
            let hard_now = hard(&st.deployment);
            st.hard_objective_history.push(hard_now);
            st.smooth_objective_history.push(
                avg_sinr_raw(
                    s,
                    st.deployment.positions(),
                    st.deployment.azimuths(),
                    GainMode::Smooth,
                )
                .unwrap_or(f64::NAN),
            );

            if is_feasible(s, &st.deployment, EXIT_SEP_TOL) {
                if hard_now <= best_val {
                    best_val = hard_now;
                    best_dep = st.deployment.clone();
                }
                // every heading candidate at these positions is a visited
                // configuration; report the best one by the hard metric
                let horizontal = st.deployment.horizontal();
                for psi in &psi_finals {
                    if let Ok(cand) = Deployment::new(s, &horizontal, psi) {
                        let v = hard(&cand);
                        if v < best_val {
                            best_val = v;
                            best_dep = cand;
                        }
                    }
                }
            }
            if eps <= self.cfg.eta {
                converged = true;
                break;
            }
        }

        if let Ok(polished) = self.polish(&st.deployment) {
            let v = hard(&polished);
            if is_feasible(s, &polished, EXIT_SEP_TOL) && v <= best_val {
                best_dep = polished;
            }
        }

        build_report(
            s,
            "proposed",
            best_dep,
            converged,
            st.iter,
            st.residual_history.last().copied(),
            st.residual_history,
            st.hard_objective_history,
            st.smooth_objective_history,
            started.elapsed(),
        )
    }

    /// Nudge a near-feasible deployment the last eta-sized distance onto the
    /// constraint set: separate violating pairs symmetrically, restore
    /// UAV-target spheres by horizontal pushback, and re-clamp x.
    fn polish(&self, d: &Deployment) -> Result<Deployment> {
        let s = self.scenario;
        let m = s.num_uavs();
        let r_l = s.min_uav_sep() * (1.0 + 1e-12);
        let s_l = s.min_target_sep() * (1.0 + 1e-12);
        let mut pos = d.horizontal();
        for _ in 0..20 {
            let mut dirty = false;
            for i in 0..m {
                for j in (i + 1)..m {
                    let dx = pos[i][0] - pos[j][0];
                    let dy = pos[i][1] - pos[j][1];
                    let dist = dx.hypot(dy);
                    if dist >= r_l {
                        continue;
                    }
                    dirty = true;
                    if dist < 1e-9 {
                        pos[i][1] -= 0.5 * r_l;
                        pos[j][1] += 0.5 * r_l;
                    } else {
                        let push = 0.5 * (r_l - dist) / dist;
                        pos[i][0] += push * dx;
                        pos[i][1] += push * dy;
                        pos[j][0] -= push * dx;
                        pos[j][1] -= push * dy;
                    }
                }
            }
            for (i, p) in pos.iter_mut().enumerate() {
                p[0] = p[0].min(s.deploy_x_max());
                for t in s.target_positions() {
                    let dz = s.altitude() - t[2];
                    let hx = p[0] - t[0];
                    let hy = p[1] - t[1];
                    let d3 = (hx * hx + hy * hy + dz * dz).sqrt();
                    if d3 >= s_l {
                        continue;
                    }
                    dirty = true;
                    let need = (s_l * s_l - dz * dz).max(0.0).sqrt();
                    let h = hx.hypot(hy);
                    let (ux, uy) = if h > 1e-9 {
                        (hx / h, hy / h)
                    } else {
                        (-1.0, 0.0)
                    };
                    p[0] = (t[0] + ux * need).min(s.deploy_x_max());
                    p[1] = t[1] + uy * need;
                    log::debug!("polished UAV {i} back onto the separation sphere");
                }
            }
            if !dirty {
                break;
            }
        }
        Deployment::new(s, &pos, d.azimuths())
    }
}

fn clip_multiplier(
    candidate: Vec<[f64; 3]>,
    omega: f64,
    mode: MultiplierClip,
) -> Vec<[f64; 3]> {
    let max_abs = candidate
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max_abs < omega {
        return candidate;
    }
    let scale = match mode {
        MultiplierClip::RescaleByMax => 1.0 / max_abs,
        MultiplierClip::ClampAtOmega => omega / max_abs,
    };
    candidate
        .iter()
        .map(|r| [r[0] * scale, r[1] * scale, r[2] * scale])
        .collect()
}

/// Solve `scenario` from `init` (or the deterministic default start).
pub fn solve(
    scenario: &Scenario,
    init: Option<&Deployment>,
    cfg: &AdmmConfig,
) -> Result<SolverReport> {
    AdmmSolver::new(scenario, cfg)?.solve(init)
}
