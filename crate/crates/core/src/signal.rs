//! Directional antenna gain, free-space channel, SINR objective, and its
//! analytic gradients.
//!
//! Geometry convention: azimuths are measured from the +x axis, so the
//! boresight offset between a heading `psi` and the line of sight to a target
//! is `arccos(cos(phi - psi) * cos(pitch))`. Internally this is evaluated as
//! the dot product between the horizontal boresight unit vector and the unit
//! line-of-sight vector, which stays defined for a target directly below the
//! UAV (offset pi/2 regardless of heading).

use crate::error::{Error, Result};
use crate::scenario::{Deployment, Scenario};

/// Main-lobe model: `Hard` applies the cutoff outside (-theta, theta);
/// `Smooth` is the unclipped Gaussian lobe used inside gradient steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Hard,
    Smooth,
}

/// Horizontal and vertical look angles from a UAV to a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGeometry {
    /// Full-quadrant azimuth of the target, radians from the +x axis.
    pub azimuth: f64,
    /// Elevation of the target over the horizontal plane (negative below).
    pub pitch: f64,
}

/// Look angles from `uav_pos` to `target_pos`.
pub fn angles(uav_pos: [f64; 3], target_pos: [f64; 3]) -> Result<AngleGeometry> {
    let dx = target_pos[0] - uav_pos[0];
    let dy = target_pos[1] - uav_pos[1];
    let dz = target_pos[2] - uav_pos[2];
    let horiz = dx.hypot(dy);
    if horiz == 0.0 {
        return Err(Error::DegenerateGeometry(
            "horizontally coincident UAV and target: azimuth undefined".into(),
        ));
    }
    Ok(AngleGeometry {
        azimuth: dy.atan2(dx),
        pitch: dz.atan2(horiz),
    })
}

/// Angle between an antenna heading and the line of sight, in [0, pi].
pub fn boresight_offset(geom: &AngleGeometry, heading: f64) -> f64 {
    let c = ((geom.azimuth - heading).cos() * geom.pitch.cos()).clamp(-1.0, 1.0);
    c.acos()
}

/// Linear radiation gain at boresight offset `offset`.
pub fn gain(offset: f64, half_beamwidth: f64, mode: GainMode) -> f64 {
    let lobe = (-offset * offset / (2.0 * half_beamwidth * half_beamwidth)).exp();
    match mode {
        GainMode::Smooth => lobe,
        GainMode::Hard => {
            if offset.abs() < half_beamwidth {
                lobe
            } else {
                0.0
            }
        }
    }
}

/// Free-space channel gain from the control center to a target.
pub fn channel_gain_ctrl(target_pos: [f64; 3], s: &Scenario) -> Result<f64> {
    let c = s.control_center();
    let d2 = (0..3).map(|a| (target_pos[a] - c[a]).powi(2)).sum::<f64>();
    if d2 == 0.0 {
        return Err(Error::DegenerateGeometry(
            "target coincides with the control center".into(),
        ));
    }
    Ok(s.channel_ref_gain() / d2)
}

/// Per-pair quantities shared by the SINR value and its gradients.
struct PairGeom {
    dx: f64,
    dy: f64,
    d: f64,
    d2: f64,
    /// cos of the boresight offset.
    w: f64,
    offset: f64,
}

impl PairGeom {
    fn build(uav: [f64; 3], psi: f64, target: [f64; 3]) -> Result<Self> {
        let dx = target[0] - uav[0];
        let dy = target[1] - uav[1];
        let dz = target[2] - uav[2];
        let d2 = dx * dx + dy * dy + dz * dz;
        if d2 == 0.0 {
            return Err(Error::DegenerateGeometry(
                "UAV coincides with a target".into(),
            ));
        }
        let d = d2.sqrt();
        let w = ((dx * psi.cos() + dy * psi.sin()) / d).clamp(-1.0, 1.0);
        Ok(Self {
            dx,
            dy,
            d,
            d2,
            w,
            offset: w.acos(),
        })
    }

    fn gain(&self, half_beamwidth: f64, mode: GainMode) -> f64 {
        gain(self.offset, half_beamwidth, mode)
    }

    /// d(gain)/d(w) for the smooth lobe; finite through boresight where both
    /// acos and the Gaussian chain are individually singular.
    fn smooth_gain_dw(&self, half_beamwidth: f64) -> f64 {
        let g = gain(self.offset, half_beamwidth, GainMode::Smooth);
        let a = self.offset;
        // alpha / sin(alpha), extended by its limit at 0 and bounded near pi
        // (where the gain itself is vanishingly small).
        let ratio = if a < 1e-4 {
            1.0 + a * a / 6.0
        } else {
            a / a.sin().max(1e-9)
        };
        g * ratio / (half_beamwidth * half_beamwidth)
    }
}

fn jam_coefficient(s: &Scenario, i: usize) -> f64 {
    s.channel_ref_gain() * s.jam_power()[i] * f64::from(s.antenna_elements()[i])
}

fn sinr_target_raw(
    s: &Scenario,
    positions: &[[f64; 3]],
    azimuths: &[f64],
    k: usize,
    mode: GainMode,
) -> Result<f64> {
    let target = s.target_positions()[k];
    let signal = s.tx_power_ctrl() * channel_gain_ctrl(target, s)?;
    let mut interference = 0.0;
    // positions may be a prefix of the swarm (partial-deployment evaluation)
    for i in 0..positions.len() {
        let pg = PairGeom::build(positions[i], azimuths[i], target)?;
        interference += jam_coefficient(s, i) * pg.gain(s.half_beamwidth(), mode) / pg.d2;
    }
    Ok(signal / (interference + s.noise_power()[k]))
}

pub(crate) fn avg_sinr_raw(
    s: &Scenario,
    positions: &[[f64; 3]],
    azimuths: &[f64],
    mode: GainMode,
) -> Result<f64> {
    let k = s.num_targets();
    let mut total = 0.0;
    for t in 0..k {
        total += sinr_target_raw(s, positions, azimuths, t, mode)?;
    }
    Ok(total / k as f64)
}

/// Received SINR at target `k` under the given deployment.
pub fn sinr_target(s: &Scenario, d: &Deployment, k: usize, mode: GainMode) -> Result<f64> {
    sinr_target_raw(s, d.positions(), d.azimuths(), k, mode)
}

/// Average SINR over all targets.
pub fn avg_sinr(s: &Scenario, d: &Deployment, mode: GainMode) -> Result<f64> {
    avg_sinr_raw(s, d.positions(), d.azimuths(), mode)
}

fn require_smooth(mode: GainMode) -> Result<()> {
    match mode {
        GainMode::Smooth => Ok(()),
        GainMode::Hard => Err(Error::NondifferentiableMode("Hard")),
    }
}

pub(crate) fn grad_avg_sinr_q_raw(
    s: &Scenario,
    positions: &[[f64; 3]],
    azimuths: &[f64],
) -> Result<Vec<[f64; 2]>> {
    let m = positions.len();
    let kk = s.num_targets();
    let theta = s.half_beamwidth();
    let mut grad = vec![[0.0f64; 2]; m];
    for k in 0..kk {
        let target = s.target_positions()[k];
        let signal = s.tx_power_ctrl() * channel_gain_ctrl(target, s)?;
        let mut pairs = Vec::with_capacity(m);
        let mut interference = 0.0;
        for i in 0..m {
            let pg = PairGeom::build(positions[i], azimuths[i], target)?;
            interference += jam_coefficient(s, i) * pg.gain(theta, GainMode::Smooth) / pg.d2;
            pairs.push(pg);
        }
        let denom = interference + s.noise_power()[k];
        // d(gamma_k)/du = -signal * d(interference)/du / denom^2
        let scale = -signal / (denom * denom) / kk as f64;
        for (i, pg) in pairs.iter().enumerate() {
            let kappa = jam_coefficient(s, i);
            let g = pg.gain(theta, GainMode::Smooth);
            let dg_dw = pg.smooth_gain_dw(theta);
            let (sin_psi, cos_psi) = azimuths[i].sin_cos();
            let dw_dx = (-cos_psi + pg.w * pg.dx / pg.d) / pg.d;
            let dw_dy = (-sin_psi + pg.w * pg.dy / pg.d) / pg.d;
            // d(1/d^2)/dx_i = 2*dx/d^4
            let dinv_dx = 2.0 * pg.dx / (pg.d2 * pg.d2);
            let dinv_dy = 2.0 * pg.dy / (pg.d2 * pg.d2);
            let dj_dx = kappa * (dg_dw * dw_dx / pg.d2 + g * dinv_dx);
            let dj_dy = kappa * (dg_dw * dw_dy / pg.d2 + g * dinv_dy);
            grad[i][0] += scale * dj_dx;
            grad[i][1] += scale * dj_dy;
        }
    }
    Ok(grad)
}

pub(crate) fn grad_avg_sinr_psi_raw(
    s: &Scenario,
    positions: &[[f64; 3]],
    azimuths: &[f64],
) -> Result<Vec<f64>> {
    let m = positions.len();
    let kk = s.num_targets();
    let theta = s.half_beamwidth();
    let mut grad = vec![0.0f64; m];
    for k in 0..kk {
        let target = s.target_positions()[k];
        let signal = s.tx_power_ctrl() * channel_gain_ctrl(target, s)?;
        let mut pairs = Vec::with_capacity(m);
        let mut interference = 0.0;
        for i in 0..m {
            let pg = PairGeom::build(positions[i], azimuths[i], target)?;
            interference += jam_coefficient(s, i) * pg.gain(theta, GainMode::Smooth) / pg.d2;
            pairs.push(pg);
        }
        let denom = interference + s.noise_power()[k];
        let scale = -signal / (denom * denom) / kk as f64;
        for (i, pg) in pairs.iter().enumerate() {
            let kappa = jam_coefficient(s, i);
            let dg_dw = pg.smooth_gain_dw(theta);
            let (sin_psi, cos_psi) = azimuths[i].sin_cos();
            let dw_dpsi = (-pg.dx * sin_psi + pg.dy * cos_psi) / pg.d;
            grad[i] += scale * kappa * dg_dw * dw_dpsi / pg.d2;
        }
    }
    Ok(grad)
}

/// Analytic gradient of the smooth average SINR with respect to the UAVs'
/// horizontal coordinates. The altitude is fixed, so z components are not
/// represented.
pub fn grad_avg_sinr_q(s: &Scenario, d: &Deployment, mode: GainMode) -> Result<Vec<[f64; 2]>> {
    require_smooth(mode)?;
    grad_avg_sinr_q_raw(s, d.positions(), d.azimuths())
}

/// Analytic gradient of the smooth average SINR with respect to the antenna
/// azimuths.
pub fn grad_avg_sinr_psi(s: &Scenario, d: &Deployment, mode: GainMode) -> Result<Vec<f64>> {
    require_smooth(mode)?;
    grad_avg_sinr_psi_raw(s, d.positions(), d.azimuths())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{random_scenario, RegionBounds, Scenario};
    use std::f64::consts::PI;

    const THETA: f64 = PI / 12.0;

    fn scenario_1x1() -> Scenario {
        Scenario::with_defaults(1, vec![[4500.0, 100.0, 0.0]], [5500.0, 100.0, 20.0]).unwrap()
    }

    #[test]
    fn angles_match_convention() {
        let g = angles([0.0, 0.0, 600.0], [100.0, 0.0, 0.0]).unwrap();
        assert!(g.azimuth.abs() < 1e-15);
        assert!((g.pitch - (-600.0f64).atan2(100.0)).abs() < 1e-15);
        // frozen: atan2(-600, 100) = -1.4056476493802699
        assert!((g.pitch - -1.4056476493802699).abs() < 1e-12);

        let g = angles([0.0, 0.0, 600.0], [0.0, 100.0, 0.0]).unwrap();
        assert!((g.azimuth - PI / 2.0).abs() < 1e-15);

        let g = angles([0.0, 0.0, 600.0], [-100.0, 0.0, 0.0]).unwrap();
        assert!((g.azimuth - PI).abs() < 1e-15);
    }

    #[test]
    fn angles_reject_horizontal_coincidence() {
        assert!(matches!(
            angles([0.0, 0.0, 600.0], [0.0, 0.0, 0.0]),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn boresight_offset_cases() {
        let flat = AngleGeometry {
            azimuth: 0.7,
            pitch: 0.0,
        };
        assert!(boresight_offset(&flat, 0.7).abs() < 1e-15);
        assert!((boresight_offset(&flat, 0.7 - PI / 2.0) - PI / 2.0).abs() < 1e-15);
        let pitched = AngleGeometry {
            azimuth: 0.7,
            pitch: 0.3,
        };
        assert!((boresight_offset(&pitched, 0.7) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain(0.0, THETA, GainMode::Hard), 1.0);
        assert_eq!(gain(0.0, THETA, GainMode::Smooth), 1.0);
        // exp(-1/2) at the lobe edge
        assert!((gain(THETA, THETA, GainMode::Smooth) - 0.6065306597126334).abs() < 1e-15);
        assert_eq!(gain(2.0 * THETA, THETA, GainMode::Hard), 0.0);
        assert!((gain(2.0 * THETA, THETA, GainMode::Smooth) - 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn gain_monotone_and_smooth_dominates_hard() {
        let mut prev = f64::INFINITY;
        for step in 0..=300 {
            let a = PI * step as f64 / 300.0;
            let sm = gain(a, THETA, GainMode::Smooth);
            let hd = gain(a, THETA, GainMode::Hard);
            assert!(sm <= prev + 1e-18);
            assert!(sm >= hd);
            if a.abs() < THETA {
                assert_eq!(sm, hd);
            }
            prev = sm;
        }
    }

    #[test]
    fn channel_gain_examples() {
        let s = Scenario::with_defaults(1, vec![[1.0, 0.0, 0.0]], [0.0, 0.0, 0.0]).unwrap();
        let g = channel_gain_ctrl([1.0, 0.0, 0.0], &s).unwrap();
        assert!((g - 1e-3).abs() < 1e-18);
        let g1000 = channel_gain_ctrl([1000.0, 0.0, 0.0], &s).unwrap();
        assert!((g1000 - 1e-9).abs() < 1e-22);
        let g2000 = channel_gain_ctrl([2000.0, 0.0, 0.0], &s).unwrap();
        assert!((g1000 / g2000 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn channel_gain_rejects_coincidence() {
        let s = scenario_1x1();
        assert!(matches!(
            channel_gain_ctrl(s.control_center(), &s),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    /// Scalar re-derivation of Eq.-(3)-style arithmetic: one UAV at exact
    /// boresight, both link distances 1000 m, reference constants.
    #[test]
    fn sinr_single_uav_boresight_oracle() {
        // target at UAV altitude so the boresight offset is exactly zero
        let s = Scenario::with_defaults(1, vec![[1000.0, 0.0, 600.0]], [2000.0, 0.0, 600.0])
            .unwrap();
        let d = Deployment::new(&s, &[[0.0, 0.0]], &[0.0]).unwrap();
        let got = sinr_target(&s, &d, 0, GainMode::Hard).unwrap();
        // independent scalar evaluation:
        //   (2e-2 * 1e-3/1e6) / (1e-3 * 4e-3 * 5 / 1e6 + 1e-14)
        let expect = (2e-2 * 1e-3 / 1e6) / (1e-3 * 4e-3 * 5.0 / 1e6 + 1e-14);
        assert!((got / expect - 1.0).abs() < 1e-14);
        // frozen from the same arithmetic done externally
        assert!((got - 0.9995002498750627).abs() < 1e-12);
    }

    #[test]
    fn sinr_with_lobes_pointed_away_reduces_to_noise_only() {
        let s = scenario_1x1();
        // heading PI points away; hard gain is 0 at offset > theta
        let d = Deployment::new(&s, &[[1000.0, 100.0]], &[PI]).unwrap();
        let got = sinr_target(&s, &d, 0, GainMode::Hard).unwrap();
        let expect =
            s.tx_power_ctrl() * channel_gain_ctrl([4500.0, 100.0, 0.0], &s).unwrap() / 1e-14;
        assert!((got / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extra_jammer_never_raises_sinr() {
        let one = Scenario::with_defaults(1, vec![[4500.0, 0.0, 0.0]], [5500.0, 0.0, 20.0]).unwrap();
        let two = Scenario::with_defaults(2, vec![[4500.0, 0.0, 0.0]], [5500.0, 0.0, 20.0]).unwrap();
        let d1 = Deployment::new(&one, &[[1600.0, 0.0]], &[0.0]).unwrap();
        let d2 = Deployment::new(&two, &[[1600.0, 0.0], [1500.0, 100.0]], &[0.0, 0.1]).unwrap();
        for mode in [GainMode::Hard, GainMode::Smooth] {
            let a = sinr_target(&one, &d1, 0, mode).unwrap();
            let b = sinr_target(&two, &d2, 0, mode).unwrap();
            assert!(b <= a);
        }
    }

    /// Frozen two-UAV layout, computed with an external scalar script.
    #[test]
    fn avg_sinr_two_uav_frozen_oracle() {
        let s = Scenario::with_defaults(
            2,
            vec![[4500.0, -200.0, 0.0], [4700.0, 300.0, 0.0]],
            [5500.0, 50.0, 20.0],
        )
        .unwrap();
        let d = Deployment::new(&s, &[[1600.0, -150.0], [1500.0, 250.0]], &[0.05, -0.35]).unwrap();
        let smooth = avg_sinr(&s, &d, GainMode::Smooth).unwrap();
        let hard = avg_sinr(&s, &d, GainMode::Hard).unwrap();
        assert!((smooth / 10.481306464015736 - 1.0).abs() < 1e-12);
        assert!((hard / 15.686546875695953 - 1.0).abs() < 1e-12);
        assert!(
            (sinr_target(&s, &d, 0, GainMode::Smooth).unwrap() / 6.666449374422786 - 1.0).abs()
                < 1e-12
        );
        assert!(
            (sinr_target(&s, &d, 1, GainMode::Hard).unwrap() / 19.893344660937235 - 1.0).abs()
                < 1e-12
        );
        // hard >= smooth for the same deployment
        assert!(hard >= smooth);
    }

    #[test]
    fn single_target_average_equals_target_sinr() {
        let s = scenario_1x1();
        let d = Deployment::new(&s, &[[1200.0, -50.0]], &[0.3]).unwrap();
        for mode in [GainMode::Hard, GainMode::Smooth] {
            assert_eq!(
                avg_sinr(&s, &d, mode).unwrap(),
                sinr_target(&s, &d, 0, mode).unwrap()
            );
        }
    }

    #[test]
    fn hard_mode_gradient_is_rejected() {
        let s = scenario_1x1();
        let d = Deployment::new(&s, &[[1000.0, 0.0]], &[0.0]).unwrap();
        assert!(matches!(
            grad_avg_sinr_q(&s, &d, GainMode::Hard),
            Err(Error::NondifferentiableMode(_))
        ));
        assert!(matches!(
            grad_avg_sinr_psi(&s, &d, GainMode::Hard),
            Err(Error::NondifferentiableMode(_))
        ));
    }

    // -- finite-difference oracles ------------------------------------------

    fn fd_grad_q(s: &Scenario, horiz: &[[f64; 2]], psi: &[f64], h: f64) -> Vec<[f64; 2]> {
        let eval = |hz: &[[f64; 2]]| {
            let d = Deployment::new(s, hz, psi).unwrap();
            avg_sinr(s, &d, GainMode::Smooth).unwrap()
        };
        let mut out = vec![[0.0; 2]; horiz.len()];
        for i in 0..horiz.len() {
            for axis in 0..2 {
                let mut plus = horiz.to_vec();
                plus[i][axis] += h;
                let mut minus = horiz.to_vec();
                minus[i][axis] -= h;
                out[i][axis] = (eval(&plus) - eval(&minus)) / (2.0 * h);
            }
        }
        out
    }

    fn fd_grad_psi(s: &Scenario, horiz: &[[f64; 2]], psi: &[f64], h: f64) -> Vec<f64> {
        let eval = |ps: &[f64]| {
            avg_sinr_raw(
                s,
                &horiz
                    .iter()
                    .map(|p| [p[0], p[1], s.altitude()])
                    .collect::<Vec<_>>(),
                ps,
                GainMode::Smooth,
            )
            .unwrap()
        };
        let mut out = vec![0.0; psi.len()];
        for i in 0..psi.len() {
            let mut plus = psi.to_vec();
            plus[i] += h;
            let mut minus = psi.to_vec();
            minus[i] -= h;
            out[i] = (eval(&plus) - eval(&minus)) / (2.0 * h);
        }
        out
    }

    fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(floor)
    }

    pub(crate) fn random_instance(seed: u64, m: usize, k: usize) -> (Scenario, Vec<[f64; 2]>, Vec<f64>) {
        use rand::Rng;
        use rand::SeedableRng;
        let s = random_scenario(seed, m, k, &RegionBounds::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b9) + 1);
        let mut horiz: Vec<[f64; 2]> = Vec::new();
        while horiz.len() < m {
            let cand = [
                rng.random_range(-200.0..1600.0),
                rng.random_range(-1500.0..1500.0),
            ];
            let clear = horiz
                .iter()
                .all(|p: &[f64; 2]| (p[0] - cand[0]).hypot(p[1] - cand[1]) >= 60.0);
            if clear {
                horiz.push(cand);
            }
        }
        // headings aimed near some target with jitter, so the lobes are live
        let psi: Vec<f64> = horiz
            .iter()
            .map(|p| {
                let t = s.target_positions()[rng.random_range(0..k)];
                let aim = (t[1] - p[1]).atan2(t[0] - p[0]);
                crate::scenario::wrap_angle(aim + rng.random_range(-0.5..0.5))
            })
            .collect();
        (s, horiz, psi)
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..10u64 {
            let m = 1 + (seed as usize % 4);
            let k = 1 + (seed as usize % 3);
            let (s, horiz, psi) = random_instance(seed, m, k);
            let d = Deployment::new(&s, &horiz, &psi).unwrap();
            let f_scale = avg_sinr(&s, &d, GainMode::Smooth).unwrap().abs();
            let gq = grad_avg_sinr_q(&s, &d, GainMode::Smooth).unwrap();
            let gq_fd = fd_grad_q(&s, &horiz, &psi, 1e-3);
            // central differences carry cancellation noise ~ eps*|f|/h;
            // components below that floor cannot be compared relatively
            let fd_noise = 50.0 * f64::EPSILON * f_scale / 1e-3;
            for i in 0..m {
                for axis in 0..2 {
                    let (a, b) = (gq[i][axis], gq_fd[i][axis]);
                    let ok = (a - b).abs() <= (1e-5 * a.abs().max(b.abs())).max(fd_noise);
                    assert!(ok, "seed {seed} uav {i} axis {axis}: {a} vs {b}");
                }
            }
            let gp = grad_avg_sinr_psi(&s, &d, GainMode::Smooth).unwrap();
            let gp_fd = fd_grad_psi(&s, &horiz, &psi, 1e-5);
            let fd_noise = 50.0 * f64::EPSILON * f_scale / 1e-5;
            for i in 0..m {
                let (a, b) = (gp[i], gp_fd[i]);
                let ok = (a - b).abs() <= (1e-5 * a.abs().max(b.abs())).max(fd_noise);
                assert!(ok, "seed {seed} psi {i}: {a} vs {b}");
            }
        }
    }

    /// The interaction falls off as 1/d^3, but the noise-limited SINR
    /// amplifies it by signal/noise^2 (~2e17 at the reference constants), so
    /// components at 1e9 m sit near 1e-12 and only reach 1e-20 at ~1e13 m.
    #[test]
    fn distant_uav_has_vanishing_gradient() {
        let s = scenario_1x1();
        for (dist, bound) in [(1e9, 1e-10), (1e13, 1e-20)] {
            let horiz = [[-dist, 0.0]];
            let d = Deployment::new(&s, &horiz, &[0.0]).unwrap();
            let gq = grad_avg_sinr_q(&s, &d, GainMode::Smooth).unwrap();
            let gp = grad_avg_sinr_psi(&s, &d, GainMode::Smooth).unwrap();
            assert!(gq[0][0].abs() < bound, "x grad {} at {dist}", gq[0][0]);
            assert!(gq[0][1].abs() < bound, "y grad {} at {dist}", gq[0][1]);
            assert!(gp[0].abs() < bound, "psi grad {} at {dist}", gp[0]);
        }
    }

    #[test]
    fn mirrored_scenario_negates_y_gradient() {
        let (s, horiz, psi) = random_instance(42, 3, 2);
        let d = Deployment::new(&s, &horiz, &psi).unwrap();
        let g = grad_avg_sinr_q(&s, &d, GainMode::Smooth).unwrap();

        let mirrored_targets: Vec<[f64; 3]> = s
            .target_positions()
            .iter()
            .map(|t| [t[0], -t[1], t[2]])
            .collect();
        let c = s.control_center();
        let sm = Scenario::with_defaults(3, mirrored_targets, [c[0], -c[1], c[2]]).unwrap();
        let horiz_m: Vec<[f64; 2]> = horiz.iter().map(|p| [p[0], -p[1]]).collect();
        let psi_m: Vec<f64> = psi.iter().map(|a| crate::scenario::wrap_angle(-a)).collect();
        let dm = Deployment::new(&sm, &horiz_m, &psi_m).unwrap();
        let gm = grad_avg_sinr_q(&sm, &dm, GainMode::Smooth).unwrap();
        for i in 0..3 {
            assert!((g[i][0] - gm[i][0]).abs() <= 1e-12 * g[i][0].abs().max(1e-30));
            assert!((g[i][1] + gm[i][1]).abs() <= 1e-12 * g[i][1].abs().max(1e-30));
        }
    }

    #[test]
    fn psi_gradient_zero_at_boresight_and_periodic() {
        let s = scenario_1x1();
        let geom = angles([1000.0, -300.0, 600.0], [4500.0, 100.0, 0.0]).unwrap();
        let horiz = [[1000.0, -300.0]];
        let d = Deployment::new(&s, &horiz, &[geom.azimuth]).unwrap();
        let g = grad_avg_sinr_psi(&s, &d, GainMode::Smooth).unwrap();
        assert!(g[0].abs() < 1e-12);

        let positions: Vec<[f64; 3]> = horiz.iter().map(|p| [p[0], p[1], 600.0]).collect();
        let a = grad_avg_sinr_psi_raw(&s, &positions, &[0.4]).unwrap();
        let b = grad_avg_sinr_psi_raw(&s, &positions, &[0.4 + std::f64::consts::TAU]).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12 * a[0].abs().max(1e-30));
    }

    #[test]
    fn rotation_equivariance_of_sinr() {
        let (s, horiz, psi) = random_instance(7, 2, 3);
        let d = Deployment::new(&s, &horiz, &psi).unwrap();
        let base = avg_sinr(&s, &d, GainMode::Smooth).unwrap();

        let c = 0.83f64;
        let rot = |p: [f64; 3]| {
            [
                p[0] * c.cos() - p[1] * c.sin(),
                p[0] * c.sin() + p[1] * c.cos(),
                p[2],
            ]
        };
        let targets: Vec<[f64; 3]> = s.target_positions().iter().map(|t| rot(*t)).collect();
        let sr = Scenario::with_defaults(2, targets, rot(s.control_center())).unwrap();
        let horiz_r: Vec<[f64; 2]> = horiz
            .iter()
            .map(|p| {
                let q = rot([p[0], p[1], 0.0]);
                [q[0], q[1]]
            })
            .collect();
        let psi_r: Vec<f64> = psi
            .iter()
            .map(|a| crate::scenario::wrap_angle(a + c))
            .collect();
        let dr = Deployment::new(&sr, &horiz_r, &psi_r).unwrap();
        let rotated = avg_sinr(&sr, &dr, GainMode::Smooth).unwrap();
        assert!((base / rotated - 1.0).abs() < 1e-10);
    }
}
