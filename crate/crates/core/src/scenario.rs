//! Problem instances: swarm shape, physical constants, geometry limits,
//! TOML parsing/serialization, and seeded random generation.
//!
//! All stored quantities are linear scale (watts, linear gains, radians,
//! meters). dB and dBm appear only at the file boundary and are converted
//! exactly once, at parse time.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result, Violation};

pub const DEFAULT_ALTITUDE_M: f64 = 600.0;
pub const DEFAULT_JAM_POWER_W: f64 = 4e-3;
pub const DEFAULT_ANTENNA_ELEMENTS: u32 = 5;
pub const DEFAULT_HALF_BEAMWIDTH_DEG: f64 = 15.0;
pub const DEFAULT_TX_POWER_W: f64 = 2e-2;
pub const DEFAULT_REF_GAIN_DB: f64 = -30.0;
pub const DEFAULT_NOISE_DBM: f64 = -110.0;
pub const DEFAULT_MIN_TARGET_SEP_M: f64 = 500.0;
pub const DEFAULT_MIN_UAV_SEP_M: f64 = 50.0;
pub const DEFAULT_DEPLOY_X_MAX_M: f64 = 1600.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Wrap an angle into the interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Fully resolved scenario parameters, linear units throughout.
///
/// This is the one public construction route into [`Scenario`]; building a
/// `Scenario` runs the full validator on these fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub num_uavs: usize,
    /// Shared flight altitude H in meters.
    pub altitude: f64,
    /// Target positions, one `[x, y, z]` row per target, meters.
    pub target_positions: Vec<[f64; 3]>,
    pub control_center: [f64; 3],
    /// Control-center transmit power P_s in watts.
    pub tx_power_ctrl: f64,
    /// Per-UAV jamming power P_i in watts.
    pub jam_power: Vec<f64>,
    /// Per-UAV antenna element count N_i.
    pub antenna_elements: Vec<u32>,
    /// Main-lobe half beamwidth theta in radians.
    pub half_beamwidth: f64,
    /// Channel power gain at unit distance, linear.
    pub channel_ref_gain: f64,
    /// Per-target receiver noise power in watts.
    pub noise_power: Vec<f64>,
    /// Minimum UAV-target separation S_l in meters.
    pub min_target_sep: f64,
    /// Minimum inter-UAV distance R_l in meters.
    pub min_uav_sep: f64,
    /// Deployable half-plane bound: x <= deploy_x_max.
    pub deploy_x_max: f64,
}

fn check_finite(violations: &mut Vec<Violation>, field: &str, value: f64) -> bool {
    if value.is_finite() {
        true
    } else {
        violations.push(Violation::new(field, "must be finite"));
        false
    }
}

fn check_positive(violations: &mut Vec<Violation>, field: &str, value: f64) {
    if check_finite(violations, field, value) && value <= 0.0 {
        violations.push(Violation::new(field, "must be strictly positive"));
    }
}

/// Check every scenario invariant and return all failures, not just the first.
pub fn validate_params(p: &ScenarioParams) -> Vec<Violation> {
    let mut v = Vec::new();
    if p.num_uavs < 1 {
        v.push(Violation::new("num_uavs", "must be >= 1"));
    }
    if p.target_positions.is_empty() {
        v.push(Violation::new("target_positions", "must contain >= 1 target"));
    }
    check_positive(&mut v, "altitude", p.altitude);
    for (k, t) in p.target_positions.iter().enumerate() {
        if !t.iter().all(|c| c.is_finite()) {
            v.push(Violation::new(
                format!("target_positions[{k}]"),
                "coordinates must be finite",
            ));
        } else if *t == p.control_center {
            v.push(Violation::new(
                format!("target_positions[{k}]"),
                "must not coincide with the control center",
            ));
        }
    }
    if !p.control_center.iter().all(|c| c.is_finite()) {
        v.push(Violation::new("control_center", "coordinates must be finite"));
    }
    check_positive(&mut v, "tx_power_ctrl", p.tx_power_ctrl);
    if p.jam_power.len() != p.num_uavs {
        v.push(Violation::new(
            "jam_power",
            format!("expected {} entries, got {}", p.num_uavs, p.jam_power.len()),
        ));
    }
    let bad: Vec<usize> = p
        .jam_power
        .iter()
        .enumerate()
        .filter(|(_, w)| !(w.is_finite() && **w > 0.0))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        v.push(Violation::new(
            "jam_power",
            format!("entries {bad:?} must be strictly positive"),
        ));
    }
    if p.antenna_elements.len() != p.num_uavs {
        v.push(Violation::new(
            "antenna_elements",
            format!(
                "expected {} entries, got {}",
                p.num_uavs,
                p.antenna_elements.len()
            ),
        ));
    }
    let bad: Vec<usize> = p
        .antenna_elements
        .iter()
        .enumerate()
        .filter(|(_, n)| **n < 1)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        v.push(Violation::new(
            "antenna_elements",
            format!("entries {bad:?} must be >= 1"),
        ));
    }
    if check_finite(&mut v, "half_beamwidth", p.half_beamwidth)
        && !(p.half_beamwidth > 0.0 && p.half_beamwidth < PI / 2.0)
    {
        v.push(Violation::new(
            "half_beamwidth",
            "must lie strictly between 0 and pi/2",
        ));
    }
    check_positive(&mut v, "channel_ref_gain", p.channel_ref_gain);
    if p.noise_power.len() != p.target_positions.len() {
        v.push(Violation::new(
            "noise_power",
            format!(
                "expected {} entries, got {}",
                p.target_positions.len(),
                p.noise_power.len()
            ),
        ));
    }
    let bad: Vec<usize> = p
        .noise_power
        .iter()
        .enumerate()
        .filter(|(_, w)| !(w.is_finite() && **w > 0.0))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        v.push(Violation::new(
            "noise_power",
            format!("entries {bad:?} must be strictly positive"),
        ));
    }
    check_positive(&mut v, "min_target_sep", p.min_target_sep);
    check_positive(&mut v, "min_uav_sep", p.min_uav_sep);
    check_finite(&mut v, "deploy_x_max", p.deploy_x_max);
    v
}

/// Immutable, validated problem instance.
///
/// Fields are private; the only way to obtain a `Scenario` is through a
/// construction path that runs [`validate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    params: ScenarioParams,
}

impl Scenario {
    pub fn from_params(params: ScenarioParams) -> Result<Self> {
        let violations = validate_params(&params);
        if violations.is_empty() {
            Ok(Self { params })
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Build a scenario with every physical constant at its default value.
    pub fn with_defaults(
        num_uavs: usize,
        target_positions: Vec<[f64; 3]>,
        control_center: [f64; 3],
    ) -> Result<Self> {
        let num_targets = target_positions.len();
        Self::from_params(ScenarioParams {
            num_uavs,
            altitude: DEFAULT_ALTITUDE_M,
            target_positions,
            control_center,
            tx_power_ctrl: DEFAULT_TX_POWER_W,
            jam_power: vec![DEFAULT_JAM_POWER_W; num_uavs],
            antenna_elements: vec![DEFAULT_ANTENNA_ELEMENTS; num_uavs],
            half_beamwidth: DEFAULT_HALF_BEAMWIDTH_DEG.to_radians(),
            channel_ref_gain: db_to_linear(DEFAULT_REF_GAIN_DB),
            noise_power: vec![dbm_to_watts(DEFAULT_NOISE_DBM); num_targets],
            min_target_sep: DEFAULT_MIN_TARGET_SEP_M,
            min_uav_sep: DEFAULT_MIN_UAV_SEP_M,
            deploy_x_max: DEFAULT_DEPLOY_X_MAX_M,
        })
    }

    /// Parse a scenario document; defaults fill every omitted optional field.
    pub fn parse_toml(text: &str) -> Result<Self> {
        let doc: ScenarioDoc =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_params(doc.resolve()?)
    }

    /// Serialize so that `parse_toml(to_toml(s)) == s` exactly.
    ///
    /// Quantities that would need a lossy dB round-trip are written through
    /// their exact linear-scale alternative keys.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let doc = ScenarioDoc {
            uavs: UavsDoc {
                count: p.num_uavs,
                altitude_m: Some(p.altitude),
                jam_power_w: Some(PerUav::Each(p.jam_power.clone())),
                antenna_elements: Some(PerUav::Each(p.antenna_elements.clone())),
                half_beamwidth_deg: None,
                half_beamwidth_rad: Some(p.half_beamwidth),
            },
            targets: TargetsDoc {
                positions_m: p.target_positions.clone(),
            },
            control_center: ControlCenterDoc {
                position_m: p.control_center,
                tx_power_w: Some(p.tx_power_ctrl),
            },
            channel: ChannelDoc {
                ref_gain_db: None,
                ref_gain_linear: Some(p.channel_ref_gain),
                noise_dbm: None,
                noise_w: Some(PerUav::Each(p.noise_power.clone())),
            },
            geometry: GeometryDoc {
                min_target_sep_m: Some(p.min_target_sep),
                min_uav_sep_m: Some(p.min_uav_sep),
                deploy_x_max_m: Some(p.deploy_x_max),
            },
        };
        toml::to_string_pretty(&doc).expect("scenario serialization cannot fail")
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn num_uavs(&self) -> usize {
        self.params.num_uavs
    }

    pub fn num_targets(&self) -> usize {
        self.params.target_positions.len()
    }

    pub fn altitude(&self) -> f64 {
        self.params.altitude
    }

    pub fn target_positions(&self) -> &[[f64; 3]] {
        &self.params.target_positions
    }

    pub fn control_center(&self) -> [f64; 3] {
        self.params.control_center
    }

    pub fn tx_power_ctrl(&self) -> f64 {
        self.params.tx_power_ctrl
    }

    pub fn jam_power(&self) -> &[f64] {
        &self.params.jam_power
    }

    pub fn antenna_elements(&self) -> &[u32] {
        &self.params.antenna_elements
    }

    pub fn half_beamwidth(&self) -> f64 {
        self.params.half_beamwidth
    }

    pub fn channel_ref_gain(&self) -> f64 {
        self.params.channel_ref_gain
    }

    pub fn noise_power(&self) -> &[f64] {
        &self.params.noise_power
    }

    pub fn min_target_sep(&self) -> f64 {
        self.params.min_target_sep
    }

    pub fn min_uav_sep(&self) -> f64 {
        self.params.min_uav_sep
    }

    pub fn deploy_x_max(&self) -> f64 {
        self.params.deploy_x_max
    }
}

// ---------------------------------------------------------------------------
// document schema

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PerUav<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Copy> PerUav<T> {
    fn resolve(&self, n: usize) -> Vec<T> {
        match self {
            PerUav::Uniform(x) => vec![*x; n],
            PerUav::Each(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UavsDoc {
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    altitude_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jam_power_w: Option<PerUav<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    antenna_elements: Option<PerUav<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_beamwidth_deg: Option<f64>,
    /// Exact-radians alternative; takes precedence over the degree form.
    #[serde(skip_serializing_if = "Option::is_none")]
    half_beamwidth_rad: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsDoc {
    positions_m: Vec<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlCenterDoc {
    position_m: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power_w: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    ref_gain_db: Option<f64>,
    /// Exact linear alternative; takes precedence over `ref_gain_db`.
    #[serde(skip_serializing_if = "Option::is_none")]
    ref_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_dbm: Option<f64>,
    /// Exact watts alternative (scalar or per target); takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_w: Option<PerUav<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    min_target_sep_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_uav_sep_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deploy_x_max_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    uavs: UavsDoc,
    targets: TargetsDoc,
    control_center: ControlCenterDoc,
    #[serde(default)]
    channel: ChannelDoc,
    #[serde(default)]
    geometry: GeometryDoc,
}

impl ScenarioDoc {
    fn resolve(self) -> Result<ScenarioParams> {
        let m = self.uavs.count;
        let k = self.targets.positions_m.len();
        let half_beamwidth = match (self.uavs.half_beamwidth_rad, self.uavs.half_beamwidth_deg) {
            (Some(rad), _) => rad,
            (None, Some(deg)) => deg.to_radians(),
            (None, None) => DEFAULT_HALF_BEAMWIDTH_DEG.to_radians(),
        };
        let channel_ref_gain = match (self.channel.ref_gain_linear, self.channel.ref_gain_db) {
            (Some(lin), _) => lin,
            (None, Some(db)) => db_to_linear(db),
            (None, None) => db_to_linear(DEFAULT_REF_GAIN_DB),
        };
        let noise_power = match (&self.channel.noise_w, self.channel.noise_dbm) {
            (Some(w), _) => w.resolve(k),
            (None, Some(dbm)) => vec![dbm_to_watts(dbm); k],
            (None, None) => vec![dbm_to_watts(DEFAULT_NOISE_DBM); k],
        };
        Ok(ScenarioParams {
            num_uavs: m,
            altitude: self.uavs.altitude_m.unwrap_or(DEFAULT_ALTITUDE_M),
            target_positions: self.targets.positions_m,
            control_center: self.control_center.position_m,
            tx_power_ctrl: self.control_center.tx_power_w.unwrap_or(DEFAULT_TX_POWER_W),
            jam_power: self
                .uavs
                .jam_power_w
                .as_ref()
                .map(|p| p.resolve(m))
                .unwrap_or_else(|| vec![DEFAULT_JAM_POWER_W; m]),
            antenna_elements: self
                .uavs
                .antenna_elements
                .as_ref()
                .map(|n| n.resolve(m))
                .unwrap_or_else(|| vec![DEFAULT_ANTENNA_ELEMENTS; m]),
            half_beamwidth,
            channel_ref_gain,
            noise_power,
            min_target_sep: self
                .geometry
                .min_target_sep_m
                .unwrap_or(DEFAULT_MIN_TARGET_SEP_M),
            min_uav_sep: self.geometry.min_uav_sep_m.unwrap_or(DEFAULT_MIN_UAV_SEP_M),
            deploy_x_max: self
                .geometry
                .deploy_x_max_m
                .unwrap_or(DEFAULT_DEPLOY_X_MAX_M),
        })
    }
}

// ---------------------------------------------------------------------------
// random generation

/// Horizontal rectangle targets are drawn from (ground level, z = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for RegionBounds {
    /// Keeps targets well beyond the deployable half-plane, far enough out
    /// that an edge-deployed UAV can hold a ground target inside its
    /// horizon-fixed main lobe.
    fn default() -> Self {
        Self {
            x_min: 4100.0,
            x_max: 5100.0,
            y_min: -900.0,
            y_max: 900.0,
        }
    }
}

/// Deterministically generate a scenario: `num_targets` ground targets drawn
/// uniformly from `bounds`, the control center placed behind them, and every
/// physical constant at its default.
pub fn random_scenario(
    seed: u64,
    num_uavs: usize,
    num_targets: usize,
    bounds: &RegionBounds,
) -> Result<Scenario> {
    if !(bounds.x_min < bounds.x_max && bounds.y_min < bounds.y_max) {
        return Err(Error::InvalidBounds(format!(
            "empty or inverted region: x [{}, {}], y [{}, {}]",
            bounds.x_min, bounds.x_max, bounds.y_min, bounds.y_max
        )));
    }
    if !(bounds.x_min.is_finite()
        && bounds.x_max.is_finite()
        && bounds.y_min.is_finite()
        && bounds.y_max.is_finite())
    {
        return Err(Error::InvalidBounds("bounds must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::with_capacity(num_targets);
    for _ in 0..num_targets {
        let x = rng.random_range(bounds.x_min..=bounds.x_max);
        let y = rng.random_range(bounds.y_min..=bounds.y_max);
        targets.push([x, y, 0.0]);
    }
    let max_x = targets.iter().map(|t| t[0]).fold(f64::NEG_INFINITY, f64::max);
    let mean_y = targets.iter().map(|t| t[1]).sum::<f64>() / num_targets.max(1) as f64;
    let control_center = [max_x + 800.0, mean_y, 20.0];
    Scenario::with_defaults(num_uavs, targets, control_center)
}

// ---------------------------------------------------------------------------
// deployment

/// Decision variables: UAV positions (altitude pinned to the scenario's H)
/// and antenna azimuths in (-pi, pi].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deployment {
    positions: Vec<[f64; 3]>,
    azimuths: Vec<f64>,
}

impl Deployment {
    /// Build from horizontal coordinates; the z component is filled with the
    /// scenario altitude exactly.
    pub fn new(scenario: &Scenario, horizontal: &[[f64; 2]], azimuths: &[f64]) -> Result<Self> {
        let m = scenario.num_uavs();
        let mut violations = Vec::new();
        if horizontal.len() != m {
            violations.push(Violation::new(
                "positions",
                format!("expected {} rows, got {}", m, horizontal.len()),
            ));
        }
        if azimuths.len() != m {
            violations.push(Violation::new(
                "azimuths",
                format!("expected {} entries, got {}", m, azimuths.len()),
            ));
        }
        for (i, p) in horizontal.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                violations.push(Violation::new(
                    format!("positions[{i}]"),
                    "coordinates must be finite",
                ));
            }
        }
        for (i, a) in azimuths.iter().enumerate() {
            if !(a.is_finite() && *a > -PI && *a <= PI) {
                violations.push(Violation::new(
                    format!("azimuths[{i}]"),
                    "must lie in (-pi, pi]",
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let h = scenario.altitude();
        Ok(Self {
            positions: horizontal.iter().map(|p| [p[0], p[1], h]).collect(),
            azimuths: azimuths.to_vec(),
        })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn azimuths(&self) -> &[f64] {
        &self.azimuths
    }

    pub fn horizontal(&self) -> Vec<[f64; 2]> {
        self.positions.iter().map(|p| [p[0], p[1]]).collect()
    }
}
