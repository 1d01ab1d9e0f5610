//! Hybrid accelerated gradient projection for the deployment subproblem:
//! Nesterov-style momentum with a look-ahead gradient correction, combined
//! with axis-wise RMS step normalization, projected onto the x-limited
//! half-plane.

use crate::error::{Error, Result};

/// Inner-solver controls. None of these is dictated by the model; the
/// defaults are conventional optimizer settings and every field is
/// overridable.
#[derive(Debug, Clone, PartialEq)]
pub struct GradProjConfig {
    /// Momentum coefficient in [0, 1).
    pub beta_nag: f64,
    /// RMS accumulator decay in (0, 1).
    pub rho_rms: f64,
    /// RMS stabilizer added to the denominator.
    pub eps_rms: f64,
    /// Base step length, meters.
    pub alpha_nag: f64,
    /// Step along the projected feasible direction, in (0, 1].
    pub alpha_search: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Relative objective-change threshold for termination.
    pub tol: f64,
}

impl Default for GradProjConfig {
    fn default() -> Self {
        Self {
            beta_nag: 0.9,
            rho_rms: 0.9,
            eps_rms: 1e-8,
            alpha_nag: 1.0,
            alpha_search: 1.0,
            max_iters: 500,
            tol: 1e-6,
        }
    }
}

impl GradProjConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.beta_nag >= 0.0 && self.beta_nag < 1.0) {
            return bad("beta_nag must lie in [0, 1)");
        }
        if !(self.rho_rms > 0.0 && self.rho_rms < 1.0) {
            return bad("rho_rms must lie in (0, 1)");
        }
        if !(self.eps_rms > 0.0) {
            return bad("eps_rms must be positive");
        }
        if !(self.alpha_nag > 0.0) {
            return bad("alpha_nag must be positive");
        }
        if !(self.alpha_search > 0.0 && self.alpha_search <= 1.0) {
            return bad("alpha_search must lie in (0, 1]");
        }
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1");
        }
        if !(self.tol >= 0.0) {
            return bad("tol must be nonnegative");
        }
        Ok(())
    }
}

/// Per-solve optimizer memory. `v_x`/`v_y` are scalar axis accumulators (the
/// squared Euclidean norm of one axis's gradient components feeds each), not
/// per-coordinate ones. The stored values are the bias-corrected ones, and
/// `t_last` is tracked without being read anywhere, both mirroring the update
/// rules as printed.
#[derive(Debug, Clone, PartialEq)]
pub struct GradProjState {
    pub d_last: Vec<[f64; 2]>,
    pub g_last: Vec<[f64; 2]>,
    pub v_x: f64,
    pub v_y: f64,
    pub t: u32,
    pub t_last: u32,
}

impl GradProjState {
    pub fn new(num_uavs: usize) -> Self {
        Self {
            d_last: vec![[0.0; 2]; num_uavs],
            g_last: vec![[0.0; 2]; num_uavs],
            v_x: 0.0,
            v_y: 0.0,
            t: 1,
            t_last: 0,
        }
    }
}

/// One hybrid descent update: momentum direction with gradient look-ahead,
/// axis RMS normalization with bias correction, per-axis step.
pub fn hybrid_step(
    q: &[[f64; 2]],
    grad: &[[f64; 2]],
    state: &GradProjState,
    cfg: &GradProjConfig,
) -> (Vec<[f64; 2]>, GradProjState) {
    let beta = cfg.beta_nag;
    let rho = cfg.rho_rms;
    let m = q.len();

    let mut d = vec![[0.0f64; 2]; m];
    for i in 0..m {
        for axis in 0..2 {
            d[i][axis] = beta * state.d_last[i][axis]
                + grad[i][axis]
                + beta * (grad[i][axis] - state.g_last[i][axis]);
        }
    }
    let gx_sq: f64 = grad.iter().map(|g| g[0] * g[0]).sum();
    let gy_sq: f64 = grad.iter().map(|g| g[1] * g[1]).sum();
    let bias = 1.0 - rho.powi(state.t as i32);
    let v_x = (rho * state.v_x + (1.0 - rho) * gx_sq) / bias;
    let v_y = (rho * state.v_y + (1.0 - rho) * gy_sq) / bias;

    let mut q_bar = vec![[0.0f64; 2]; m];
    for i in 0..m {
        q_bar[i][0] = q[i][0] - cfg.alpha_nag * d[i][0] / (v_x.sqrt() + cfg.eps_rms);
        q_bar[i][1] = q[i][1] - cfg.alpha_nag * d[i][1] / (v_y.sqrt() + cfg.eps_rms);
    }

    let next = GradProjState {
        d_last: d,
        g_last: grad.to_vec(),
        v_x,
        v_y,
        t: state.t + 1,
        t_last: state.t,
    };
    (q_bar, next)
}

/// Projection onto the deployable half-plane: clamp x, leave y untouched.
pub fn project_deploy(q: &[[f64; 2]], x_max: f64) -> Vec<[f64; 2]> {
    q.iter().map(|p| [p[0].min(x_max), p[1]]).collect()
}

/// Result of one inner solve: the best-seen iterate by objective value.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub q: Vec<[f64; 2]>,
    pub objective: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Minimize `objective` over the half-plane `x <= x_max` starting from the
/// feasible `q0`. The callback must be pure and return the value together
/// with its gradient.
pub fn gradient_projection<F>(
    objective: F,
    q0: &[[f64; 2]],
    x_max: f64,
    cfg: &GradProjConfig,
) -> Result<InnerSolution>
where
    F: Fn(&[[f64; 2]]) -> (f64, Vec<[f64; 2]>),
{
    cfg.validate()?;
    if q0.iter().any(|p| p[0] > x_max) {
        return Err(Error::Infeasible(format!(
            "gradient projection requires a feasible start (x <= {x_max})"
        )));
    }
    let mut q = q0.to_vec();
    let mut state = GradProjState::new(q.len());
    let (mut f_cur, mut g_cur) = objective(&q);
    let mut trace = vec![f_cur];
    let mut best_q = q.clone();
    let mut best_f = f_cur;
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        if !f_cur.is_finite() || g_cur.iter().any(|g| !(g[0].is_finite() && g[1].is_finite())) {
            return Err(Error::InnerNumerical {
                iteration: t,
                iterate: q,
            });
        }
        let (q_bar, next_state) = hybrid_step(&q, &g_cur, &state, cfg);
        state = next_state;
        let q_proj = project_deploy(&q_bar, x_max);
        for i in 0..q.len() {
            q[i][0] = (q[i][0] + cfg.alpha_search * (q_proj[i][0] - q[i][0])).min(x_max);
            q[i][1] += cfg.alpha_search * (q_proj[i][1] - q[i][1]);
        }
        let (f_new, g_new) = objective(&q);
        trace.push(f_new);
        if f_new < best_f {
            best_f = f_new;
            best_q = q.clone();
        }
        let delta = (f_new - f_cur).abs();
        f_cur = f_new;
        g_cur = g_new;
        iterations = t;
        if delta <= cfg.tol * f_cur.abs() {
            break;
        }
    }

    Ok(InnerSolution {
        q: best_q,
        objective: best_f,
        trace,
        iterations,
    })
}
