//! Auxiliary-variable splitting for the separation constraints: pair index
//! maps, the closed-form exterior-ball projection, and the primal residual.
//!
//! The coefficient operators that select UAV-target and UAV-UAV differences
//! are pure selection/difference maps, so they are realized as ordered pair
//! lists instead of dense matrices.

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Ordered pair lists tying auxiliary rows to UAV/target indices.
///
/// Row `v` of the target auxiliary block corresponds to `target_pairs[v]`,
/// enumerated target-major within ascending UAV index; row `v` of the
/// UAV-UAV block corresponds to `uav_pairs[v]` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintMaps {
    target_pairs: Vec<(usize, usize)>,
    uav_pairs: Vec<(usize, usize)>,
}

impl ConstraintMaps {
    pub fn build(num_uavs: usize, num_targets: usize) -> Self {
        let mut target_pairs = Vec::with_capacity(num_uavs * num_targets);
        for i in 0..num_uavs {
            for k in 0..num_targets {
                target_pairs.push((i, k));
            }
        }
        let mut uav_pairs = Vec::with_capacity(num_uavs * num_uavs.saturating_sub(1) / 2);
        for i in 0..num_uavs {
            for j in (i + 1)..num_uavs {
                uav_pairs.push((i, j));
            }
        }
        Self {
            target_pairs,
            uav_pairs,
        }
    }

    pub fn target_pairs(&self) -> &[(usize, usize)] {
        &self.target_pairs
    }

    pub fn uav_pairs(&self) -> &[(usize, usize)] {
        &self.uav_pairs
    }
}

/// Euclidean projection onto the exterior of the radius ball:
/// returns `v` unchanged when `||v|| >= radius`, otherwise scales it onto the
/// sphere.
pub fn project_min_norm(v: [f64; 3], radius: f64) -> Result<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVectorProjection);
    }
    let scale = norm.max(radius) / norm;
    Ok([v[0] * scale, v[1] * scale, v[2] * scale])
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Auxiliary difference copies and their scaled multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    /// UAV-target difference copies, one row per `target_pairs` entry.
    pub b: Vec<[f64; 3]>,
    /// UAV-UAV difference copies, one row per `uav_pairs` entry.
    pub c: Vec<[f64; 3]>,
    /// Scaled multipliers paired with `b`.
    pub chi: Vec<[f64; 3]>,
    /// Scaled multipliers paired with `c`.
    pub mu: Vec<[f64; 3]>,
}

impl AuxState {
    pub fn zeros(maps: &ConstraintMaps) -> Self {
        Self {
            b: vec![[0.0; 3]; maps.target_pairs.len()],
            c: vec![[0.0; 3]; maps.uav_pairs.len()],
            chi: vec![[0.0; 3]; maps.target_pairs.len()],
            mu: vec![[0.0; 3]; maps.uav_pairs.len()],
        }
    }
}

/// One parallel-splittable auxiliary update: every row is projected
/// independently onto its feasible exterior; multipliers pass through
/// unchanged.
///
/// A zero projection input (probability-zero in practice) is resolved by
/// displacing along +x to the feasible radius, with a logged warning, so one
/// degenerate row cannot abort the solve.
pub fn step1_update(
    maps: &ConstraintMaps,
    positions: &[[f64; 3]],
    targets: &[[f64; 3]],
    aux: &AuxState,
    scenario: &Scenario,
) -> AuxState {
    let s_l = scenario.min_target_sep();
    let r_l = scenario.min_uav_sep();
    let mut out = aux.clone();
    for (v, &(i, k)) in maps.target_pairs.iter().enumerate() {
        let u = add3(sub3(positions[i], targets[k]), aux.chi[v]);
        out.b[v] = match project_min_norm(u, s_l) {
            Ok(p) => p,
            Err(_) => {
                log::warn!("zero-vector projection input at target pair {v}; displacing along +x");
                [s_l, 0.0, 0.0]
            }
        };
    }
    for (v, &(i, j)) in maps.uav_pairs.iter().enumerate() {
        let u = add3(sub3(positions[i], positions[j]), aux.mu[v]);
        out.c[v] = match project_min_norm(u, r_l) {
            Ok(p) => p,
            Err(_) => {
                log::warn!("zero-vector projection input at UAV pair {v}; displacing along +x");
                [r_l, 0.0, 0.0]
            }
        };
    }
    out
}

/// Consensus-gap norm: the sum of the Frobenius norms of the two stacked gap
/// blocks. Zero exactly when every auxiliary row equals its difference.
pub fn primal_residual(
    maps: &ConstraintMaps,
    positions: &[[f64; 3]],
    targets: &[[f64; 3]],
    aux: &AuxState,
) -> f64 {
    let mut b_sq = 0.0;
    for (v, &(i, k)) in maps.target_pairs.iter().enumerate() {
        let gap = sub3(sub3(positions[i], targets[k]), aux.b[v]);
        b_sq += gap[0] * gap[0] + gap[1] * gap[1] + gap[2] * gap[2];
    }
    let mut c_sq = 0.0;
    for (v, &(i, j)) in maps.uav_pairs.iter().enumerate() {
        let gap = sub3(sub3(positions[i], positions[j]), aux.c[v]);
        c_sq += gap[0] * gap[0] + gap[1] * gap[1] + gap[2] * gap[2];
    }
    b_sq.sqrt() + c_sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    fn norm3(v: [f64; 3]) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    #[test]
    fn maps_follow_fixed_enumeration() {
        let maps = ConstraintMaps::build(2, 2);
        assert_eq!(maps.target_pairs(), &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(maps.uav_pairs(), &[(0, 1)]);

        let maps = ConstraintMaps::build(1, 3);
        assert_eq!(maps.target_pairs().len(), 3);
        assert!(maps.uav_pairs().is_empty());

        let maps = ConstraintMaps::build(4, 0);
        assert!(maps.target_pairs().is_empty());
        assert_eq!(maps.uav_pairs().len(), 6);
    }

    #[test]
    fn projection_examples() {
        let out = project_min_norm([600.0, 0.0, 0.0], 500.0).unwrap();
        assert_eq!(out, [600.0, 0.0, 0.0]);
        let out = project_min_norm([300.0, 0.0, 0.0], 500.0).unwrap();
        assert_eq!(out, [500.0, 0.0, 0.0]);
        assert!(matches!(
            project_min_norm([0.0; 3], 10.0),
            Err(Error::ZeroVectorProjection)
        ));
    }

    /// Numerical oracle: dense direction sampling plus shrinking local
    /// refinement of `min ||x - v|| s.t. ||x|| >= r`, never calling the
    /// closed form under test.
    fn numeric_exterior_projection(v: [f64; 3], radius: f64) -> [f64; 3] {
        let nv = norm3(v);
        if nv >= radius {
            return v;
        }
        // best point lies on the sphere; search its direction
        let mut best = [radius, 0.0, 0.0];
        let mut best_d = f64::INFINITY;
        let samples = 4000;
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let mut dirs = Vec::with_capacity(samples);
        for n in 0..samples {
            let z = 1.0 - 2.0 * (n as f64 + 0.5) / samples as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * n as f64;
            dirs.push([r * phi.cos(), r * phi.sin(), z]);
        }
        for dir in &dirs {
            let x = [dir[0] * radius, dir[1] * radius, dir[2] * radius];
            let d = norm3([x[0] - v[0], x[1] - v[1], x[2] - v[2]]);
            if d < best_d {
                best_d = d;
                best = x;
            }
        }
        // local refinement on the sphere with shrinking steps
        let mut step = 0.5;
        while step > 1e-13 {
            let mut improved = false;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut cand = best;
                    cand[axis] += sign * step * radius;
                    let n = norm3(cand);
                    let cand = [
                        cand[0] / n * radius,
                        cand[1] / n * radius,
                        cand[2] / n * radius,
                    ];
                    let d = norm3([cand[0] - v[0], cand[1] - v[1], cand[2] - v[2]]);
                    if d < best_d {
                        best_d = d;
                        best = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best
    }

    /// The oracle resolves the *objective* to float precision; tangentially
    /// the sphere is flat in ||x - v|| to ~sqrt(eps), so points only match to
    /// about 1e-4 while objectives match far below 1e-9.
    #[test]
    fn projection_matches_numerical_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let v = [
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
            ];
            let radius = 500.0;
            let ours = project_min_norm(v, radius).unwrap();
            let oracle = numeric_exterior_projection(v, radius);
            let d_ours = norm3([ours[0] - v[0], ours[1] - v[1], ours[2] - v[2]]);
            let d_oracle = norm3([oracle[0] - v[0], oracle[1] - v[1], oracle[2] - v[2]]);
            assert!(
                d_ours <= d_oracle + 1e-9,
                "v {v:?}: objective {d_ours} vs oracle {d_oracle}"
            );
            for a in 0..3 {
                assert!(
                    (ours[a] - oracle[a]).abs() < 1e-4,
                    "v {v:?}: {ours:?} vs {oracle:?}"
                );
            }
        }
    }

    #[test]
    fn projection_idempotent_and_feasible() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let v = [
                rng.random_range(-800.0..800.0),
                rng.random_range(-800.0..800.0),
                rng.random_range(-800.0..800.0),
            ];
            let r = rng.random_range(1.0..700.0);
            if norm3(v) == 0.0 {
                continue;
            }
            let once = project_min_norm(v, r).unwrap();
            assert!(norm3(once) >= r * (1.0 - 1e-12));
            let twice = project_min_norm(once, r).unwrap();
            for a in 0..3 {
                // idempotent up to one rounding of the boundary scale
                assert!((once[a] - twice[a]).abs() <= 1e-12 * r);
            }
            if norm3(v) >= r {
                // feasible input passes through bit-exactly
                assert_eq!(once, v);
            }
        }
    }

    fn test_scenario(m: usize) -> Scenario {
        let targets = vec![[4500.0, 0.0, 0.0], [4600.0, 300.0, 0.0]];
        Scenario::with_defaults(m, targets, [5500.0, 100.0, 20.0]).unwrap()
    }

    #[test]
    fn step1_feasible_rows_pass_through() {
        let s = test_scenario(2);
        let maps = ConstraintMaps::build(2, 2);
        let positions = [[1000.0, 0.0, 600.0], [1000.0, 400.0, 600.0]];
        let aux = AuxState::zeros(&maps);
        let out = step1_update(&maps, &positions, s.target_positions(), &aux, &s);
        for (v, &(i, k)) in maps.target_pairs().iter().enumerate() {
            let raw = [
                positions[i][0] - s.target_positions()[k][0],
                positions[i][1] - s.target_positions()[k][1],
                positions[i][2] - s.target_positions()[k][2],
            ];
            assert_eq!(out.b[v], raw);
        }
        for (v, &(i, j)) in maps.uav_pairs().iter().enumerate() {
            let raw = [
                positions[i][0] - positions[j][0],
                positions[i][1] - positions[j][1],
                positions[i][2] - positions[j][2],
            ];
            assert_eq!(out.c[v], raw);
        }
        // multipliers untouched
        assert_eq!(out.chi, aux.chi);
        assert_eq!(out.mu, aux.mu);
    }

    #[test]
    fn step1_scales_short_rows_to_the_boundary() {
        let s = test_scenario(1);
        // single UAV 100 m from a synthetic target at the same altitude
        let s1 = Scenario::with_defaults(1, vec![[1100.0, 0.0, 600.0]], [5500.0, 0.0, 20.0])
            .unwrap();
        let maps = ConstraintMaps::build(1, 1);
        let positions = [[1000.0, 0.0, 600.0]];
        let aux = AuxState::zeros(&maps);
        let out = step1_update(&maps, &positions, s1.target_positions(), &aux, &s1);
        assert!((norm3(out.b[0]) - s.min_target_sep()).abs() < 1e-9);
        // feasible rows after every update
        assert!(norm3(out.b[0]) >= s1.min_target_sep() * (1.0 - 1e-12));
    }

    #[test]
    fn step1_rows_are_independent_of_evaluation_order() {
        use rand::Rng;
        use rand::SeedableRng;
        let s = test_scenario(3);
        let maps = ConstraintMaps::build(3, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let positions: Vec<[f64; 3]> = (0..3)
            .map(|_| {
                [
                    rng.random_range(0.0..1600.0),
                    rng.random_range(-500.0..500.0),
                    600.0,
                ]
            })
            .collect();
        let mut aux = AuxState::zeros(&maps);
        for row in aux.chi.iter_mut().chain(aux.mu.iter_mut()) {
            *row = [
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            ];
        }
        let full = step1_update(&maps, &positions, s.target_positions(), &aux, &s);
        // sequential oracle: apply one row at a time through a fresh state
        let mut seq = aux.clone();
        for v in 0..maps.target_pairs().len() {
            let (i, k) = maps.target_pairs()[v];
            let u = [
                positions[i][0] - s.target_positions()[k][0] + aux.chi[v][0],
                positions[i][1] - s.target_positions()[k][1] + aux.chi[v][1],
                positions[i][2] - s.target_positions()[k][2] + aux.chi[v][2],
            ];
            seq.b[v] = project_min_norm(u, s.min_target_sep()).unwrap();
        }
        for v in 0..maps.uav_pairs().len() {
            let (i, j) = maps.uav_pairs()[v];
            let u = [
                positions[i][0] - positions[j][0] + aux.mu[v][0],
                positions[i][1] - positions[j][1] + aux.mu[v][1],
                positions[i][2] - positions[j][2] + aux.mu[v][2],
            ];
            seq.c[v] = project_min_norm(u, s.min_uav_sep()).unwrap();
        }
        assert_eq!(full, seq);
    }

    #[test]
    fn step1_rows_globally_minimize_their_subproblems() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let u = [
                rng.random_range(-600.0..600.0),
                rng.random_range(-600.0..600.0),
                rng.random_range(-600.0..600.0),
            ];
            let radius = rng.random_range(50.0..700.0);
            if norm3(u) == 0.0 {
                continue;
            }
            let star = project_min_norm(u, radius).unwrap();
            let d_star = norm3([star[0] - u[0], star[1] - u[1], star[2] - u[2]]);
            for _ in 0..200 {
                let x = [
                    rng.random_range(-2000.0..2000.0),
                    rng.random_range(-2000.0..2000.0),
                    rng.random_range(-2000.0..2000.0),
                ];
                if norm3(x) < radius {
                    continue;
                }
                let d = norm3([x[0] - u[0], x[1] - u[1], x[2] - u[2]]);
                assert!(d >= d_star - 1e-9);
            }
        }
    }

    #[test]
    fn step1_resolves_zero_rows_along_plus_x() {
        let s1 = Scenario::with_defaults(1, vec![[1100.0, 0.0, 600.0]], [5500.0, 0.0, 20.0])
            .unwrap();
        let maps = ConstraintMaps::build(1, 1);
        let positions = [[1000.0, 0.0, 600.0]];
        let mut aux = AuxState::zeros(&maps);
        // multiplier exactly cancels the difference vector
        aux.chi[0] = [100.0, 0.0, 0.0];
        let out = step1_update(&maps, &positions, s1.target_positions(), &aux, &s1);
        assert_eq!(out.b[0], [s1.min_target_sep(), 0.0, 0.0]);
    }

    #[test]
    fn residual_zero_at_consensus_and_euclidean_off_it() {
        let s = test_scenario(2);
        let maps = ConstraintMaps::build(2, 2);
        let positions = [[800.0, -100.0, 600.0], [900.0, 350.0, 600.0]];
        let mut aux = AuxState::zeros(&maps);
        for (v, &(i, k)) in maps.target_pairs().iter().enumerate() {
            aux.b[v] = [
                positions[i][0] - s.target_positions()[k][0],
                positions[i][1] - s.target_positions()[k][1],
                positions[i][2] - s.target_positions()[k][2],
            ];
        }
        for (v, &(i, j)) in maps.uav_pairs().iter().enumerate() {
            aux.c[v] = [
                positions[i][0] - positions[j][0],
                positions[i][1] - positions[j][1],
                positions[i][2] - positions[j][2],
            ];
        }
        assert_eq!(
            primal_residual(&maps, &positions, s.target_positions(), &aux),
            0.0
        );
        // perturb one b row by (3, 4, 0): residual is exactly 5
        aux.b[1][0] += 3.0;
        aux.b[1][1] += 4.0;
        let eps = primal_residual(&maps, &positions, s.target_positions(), &aux);
        assert!((eps - 5.0).abs() < 1e-12);
    }

    #[test]
    fn residual_invariant_under_rigid_translation() {
        let s = test_scenario(2);
        let maps = ConstraintMaps::build(2, 2);
        let positions = [[800.0, -100.0, 600.0], [900.0, 350.0, 600.0]];
        let mut aux = AuxState::zeros(&maps);
        aux.b.iter_mut().for_each(|r| *r = [10.0, -20.0, 5.0]);
        aux.c.iter_mut().for_each(|r| *r = [60.0, 0.0, 0.0]);
        let base = primal_residual(&maps, &positions, s.target_positions(), &aux);

        let shift = [123.0, -45.0, 6.0];
        let shifted_pos: Vec<[f64; 3]> = positions
            .iter()
            .map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]])
            .collect();
        let shifted_targets: Vec<[f64; 3]> = s
            .target_positions()
            .iter()
            .map(|t| [t[0] + shift[0], t[1] + shift[1], t[2] + shift[2]])
            .collect();
        let moved = primal_residual(&maps, &shifted_pos, &shifted_targets, &aux);
        assert!((base - moved).abs() < 1e-9);
    }
}
