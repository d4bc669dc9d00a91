//! Random sample consensus around [`calibrate`].
//!
//! Event columns are sampled, the geometry is solved on the sample, and every
//! event of the full set is re-localized from the rays implied by that
//! geometry. Observations whose axes pass close to the re-localized event form
//! the candidate set, which is refitted and, with feedback enabled, used to
//! build the next candidate set until it stops growing. In Joint mode the
//! first hypothesis is the structured starting point.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calib::{
    calibrate, effective_visual_count, minimal_event_count, solve, structured_joint_init, GeometryEstimate, GeometryVariables, Mode,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::geom::{
    localize_event_with, pairwise_intersections, per_sensor_consistency_with, Angle, Modality, Position2D, SensorPose,
};
use crate::observations::{ObsKey, ObservationSet};

const MAX_FEEDBACK_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Distance gate for the intersection consistency test, in the units of
    /// the geometry being tested (meters in Joint mode).
    pub inlier_threshold: f64,
    pub min_consensus_fraction: f64,
    pub seed: u64,
    /// Feed the refitted consensus back into candidate building.
    pub refit_feedback: bool,
    /// Starting points tried when solving a sampled subset.
    pub sample_restarts: usize,
    /// Axis pairs crossing at `|sin| <` this are left out of the event
    /// hypotheses and consistency values.
    pub crossing_threshold: f64,
    /// Hypotheses with two acoustic sensors closer than this are discarded,
    /// in the same units as `inlier_threshold`.
    pub min_separation: f64,
    /// Cost of leaving an observation out of the consensus, in the units of
    /// the squared-sine residual.
    pub exclusion_cost: f64,
    /// When set, the distance gates are meant for a typical sensor-to-event
    /// distance of this value and are rescaled to the median sensor-to-event
    /// distance of each hypothesis. For frames without a metric scale.
    pub range_reference: Option<f64>,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            inlier_threshold: 0.1,
            min_consensus_fraction: 0.6,
            seed: 0,
            refit_feedback: true,
            sample_restarts: 1,
            crossing_threshold: 0.2,
            min_separation: 0.2,
            exclusion_cost: 0.01,
            range_reference: None,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_consensus_fraction > 0.0 && self.min_consensus_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "min_consensus_fraction must be in (0, 1], got {}",
                self.min_consensus_fraction
            )));
        }
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "inlier_threshold must be positive, got {}",
                self.inlier_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.crossing_threshold) {
            return Err(Error::InvalidConfig(format!(
                "crossing_threshold must be in [0, 1), got {}",
                self.crossing_threshold
            )));
        }
        if !(self.exclusion_cost > 0.0 && self.exclusion_cost.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "exclusion_cost must be positive, got {}",
                self.exclusion_cost
            )));
        }
        if let Some(r) = self.range_reference {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!("range_reference must be positive, got {r}")));
            }
        }
        if !(self.min_separation >= 0.0 && self.min_separation.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "min_separation must be non-negative, got {}",
                self.min_separation
            )));
        }
        Ok(())
    }

    /// Factor applied to the distance gates for the geometry `vars`.
    fn gate_scale(&self, vars: &GeometryVariables) -> f64 {
        let Some(reference) = self.range_reference else {
            return 1.0;
        };
        let mut d: Vec<f64> = vars
            .positions
            .iter()
            .flat_map(|m| vars.events.iter().map(move |e| m.distance(*e)))
            .filter(|d| d.is_finite())
            .collect();
        if d.is_empty() {
            return 1.0;
        }
        d.sort_by(f64::total_cmp);
        d[d.len() / 2] / reference
    }

    /// Smallest acceptable consensus size out of `n` observations.
    pub fn min_consensus(&self, n: usize) -> usize {
        ((self.min_consensus_fraction * n as f64).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusSet {
    pub members: BTreeSet<ObsKey>,
    /// Summed squared-sine residual of the members plus the exclusion cost of
    /// every observation left out; lower is better.
    pub error: f64,
}

impl ConsensusSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Lower error first, more members second.
    pub fn better_than(&self, other: &ConsensusSet) -> bool {
        self.error < other.error || (self.error == other.error && self.len() > other.len())
    }
}

/// One accepted improvement of the best consensus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub size: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    pub estimate: GeometryEstimate,
    pub consensus: ConsensusSet,
    pub history: Vec<HistoryEntry>,
}

/// Uniformly drawn usable event columns, as many as the minimal count, and
/// the observation subset restricted to them.
pub fn sample_minimal<R: Rng + ?Sized>(
    obs: &ObservationSet,
    mode: Mode,
    rng: &mut R,
) -> Result<(Vec<usize>, ObservationSet)> {
    let needed = minimal_event_count(obs.num_acoustic(), effective_visual_count(mode, obs.num_visual()))?;
    let usable = obs.usable_events(mode);
    if usable.len() < needed {
        return Err(Error::Underdetermined(format!(
            "{} usable events, need at least {needed}",
            usable.len()
        )));
    }
    let mut cols: Vec<usize> = sample(rng, usable.len(), needed).into_iter().map(|j| usable[j]).collect();
    cols.sort_unstable();
    let subset = obs.select_events(&cols);
    Ok((cols, subset))
}

/// A DoA ray: sensor pose, local reading and sensor kind.
pub type Ray = (SensorPose, Angle, Modality);

/// Event hypothesis from `rays` and the indices of the rays consistent with
/// it.
///
/// Every pairwise intersection is scored by the number of axes passing
/// within `threshold` of it (ties go to the smaller summed distance). If a
/// different, equally supported group sits more than twice `threshold` away,
/// the event is ambiguous. Otherwise the best supported group is gated as a whole: while more than three of
/// its rays remain and one exceeds `threshold`, the least consistent ray is
/// set aside and the hypothesis recomputed. Pairs crossing at
/// `|sin| < crossing` are ignored. `None` if no hypothesis can be formed, if
/// the event is ambiguous or if, with more than two rays, no three of them
/// agree.
pub fn gate_rays(rays: &[Ray], threshold: f64, crossing: f64) -> Option<(Position2D, Vec<usize>)> {
    let origins: Vec<Position2D> = rays.iter().map(|r| r.0.position).collect();
    let bearings: Vec<Angle> = rays.iter().map(|r| r.0.bearing(r.1)).collect();
    let axis_distance = |j: usize, p: Position2D| {
        let (s, c) = bearings[j].radians().sin_cos();
        (p - origins[j]).cross(Position2D::new(c, s)).abs()
    };
    let groups: Vec<(Position2D, f64, Vec<usize>)> = pairwise_intersections(&origins, &bearings, crossing)
        .into_iter()
        .map(|(_, _, p)| {
            let support: Vec<usize> = (0..rays.len()).filter(|&j| axis_distance(j, p) < threshold).collect();
            (p, support.iter().map(|&j| axis_distance(j, p)).sum(), support)
        })
        .collect();
    let n = groups.iter().map(|g| g.2.len()).max()?;
    if n < 3 && n < rays.len() {
        return None;
    }
    let top: Vec<&(Position2D, f64, Vec<usize>)> = groups.iter().filter(|g| g.2.len() == n).collect();
    let (at, _, best) = top.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
    if top.iter().any(|(p, _, g)| g != best && p.distance(*at) > 2.0 * threshold) {
        return None;
    }
    let mut active = best.clone();
    loop {
        if active.len() < 2 {
            return None;
        }
        let poses: Vec<SensorPose> = active.iter().map(|&j| rays[j].0).collect();
        let bs: Vec<Angle> = active.iter().map(|&j| bearings[j]).collect();
        let (center, _) = localize_event_with(&poses, &bs, crossing).ok()?;
        let consistency = per_sensor_consistency_with(&poses, &bs, center, crossing).ok()?;
        let worst = (0..active.len())
            .filter(|&j| consistency[j] >= threshold)
            .max_by(|&a, &b| consistency[a].total_cmp(&consistency[b]));
        match worst {
            Some(j) if active.len() > 3 => {
                active.remove(j);
            }
            _ => {
                let kept = (0..active.len())
                    .filter(|&j| consistency[j] < threshold)
                    .map(|j| active[j])
                    .collect();
                return Some((center, kept));
            }
        }
    }
}

fn collapsed(vars: &GeometryVariables, min_separation: f64) -> bool {
    let m = &vars.positions;
    (0..m.len()).any(|i| (i + 1..m.len()).any(|j| m[i].distance(m[j]) < min_separation))
}

/// Candidate set under the sensor poses of `est`, plus the event hypotheses
/// that were used. An event contributes when at least two of its rays,
/// one of them acoustic, pass [`gate_rays`].
fn candidates(
    vars: &GeometryVariables,
    obs: &ObservationSet,
    mode: Mode,
    cfg: &RansacConfig,
) -> (ConsensusSet, Vec<Option<Position2D>>) {
    let mut members = BTreeSet::new();
    let mut hypotheses = vec![None; obs.num_events()];
    let threshold = cfg.inlier_threshold * cfg.gate_scale(vars);
    let mut residual = 0.0;
    for (t, hyp) in hypotheses.iter_mut().enumerate() {
        let mut keys = Vec::new();
        let mut rays: Vec<Ray> = Vec::new();
        for i in 0..obs.num_acoustic() {
            if let Some(phi) = obs.acoustic.get(i, t).angle() {
                keys.push(ObsKey::acoustic(i, t));
                rays.push((vars.pose(i), phi, Modality::Acoustic));
            }
        }
        if mode == Mode::Joint {
            for (k, cam) in obs.visual_poses.iter().enumerate() {
                if let Some(d) = obs.visual.get(k, t).angle() {
                    keys.push(ObsKey::visual(k, t));
                    rays.push((*cam, d, Modality::Visual));
                }
            }
        }
        let Some((center, kept)) = gate_rays(&rays, threshold, cfg.crossing_threshold) else {
            continue;
        };
        if kept.len() < 2 || !kept.iter().any(|&j| rays[j].2 == Modality::Acoustic) {
            continue;
        }
        *hyp = Some(center);
        for j in kept {
            let (pose, phi, _) = rays[j];
            members.insert(keys[j]);
            let d = center - pose.position;
            let psi = pose.orientation.radians() + phi.radians() - d.y.atan2(d.x);
            residual += psi.sin().powi(2);
        }
    }
    let error = residual + (obs.count_observed(mode) - members.len()) as f64 * cfg.exclusion_cost;
    (ConsensusSet { members, error }, hypotheses)
}

/// Observations consistent with the sensor poses of `est` under the gates of
/// `cfg`; see the module docs. Member residuals are taken against the event
/// hypotheses.
pub fn build_candidate_set(
    est: &GeometryEstimate,
    obs: &ObservationSet,
    mode: Mode,
    cfg: &RansacConfig,
) -> ConsensusSet {
    candidates(&est.variables, obs, mode, cfg).0
}

fn warm_start(vars: &GeometryVariables, hypotheses: &[Option<Position2D>], obs: &ObservationSet) -> GeometryVariables {
    let fallback = obs.reference_center();
    let events = hypotheses
        .iter()
        .map(|h| h.unwrap_or(fallback))
        .map(|e| {
            if vars.positions.iter().any(|m| m.distance(e) < 1e-3) {
                e + Position2D::new(1e-2, 1e-2)
            } else {
                e
            }
        })
        .collect();
    GeometryVariables {
        positions: vars.positions.clone(),
        orientations: vars.orientations.clone(),
        events,
    }
}

fn refit(
    vars: &GeometryVariables,
    hypotheses: &[Option<Position2D>],
    members: &BTreeSet<ObsKey>,
    obs: &ObservationSet,
    mode: Mode,
    solver_cfg: &SolverConfig,
) -> Result<GeometryEstimate> {
    let restricted = obs.restricted_to(members);
    solve(&warm_start(vars, hypotheses, obs), &restricted, mode, solver_cfg)
}

/// Robust calibration of all observations in `mode`.
pub fn calibrate_ransac(
    obs: &ObservationSet,
    mode: Mode,
    cfg: &RansacConfig,
    solver_cfg: &SolverConfig,
) -> Result<RansacOutcome> {
    cfg.validate()?;
    let n_obs = obs.count_observed(mode);
    let min_size = cfg.min_consensus(n_obs);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sample_cfg = SolverConfig {
        restarts: cfg.sample_restarts,
        ..solver_cfg.clone()
    };
    let mut best: Option<(GeometryEstimate, ConsensusSet)> = None;
    let mut history = Vec::new();

    for iteration in 0..cfg.max_iterations {
        let structured = iteration == 0 && mode == Mode::Joint && solver_cfg.structured_init;
        let hypothesis = if structured {
            Ok(structured_joint_init(obs))
        } else {
            let (_, subset) = sample_minimal(obs, mode, &mut rng)?;
            calibrate(&subset, mode, &sample_cfg, &mut rng).map(|e| e.variables)
        };
        let Ok(mut vars) = hypothesis else {
            continue;
        };
        if collapsed(&vars, cfg.min_separation * cfg.gate_scale(&vars)) {
            continue;
        }
        let (mut current, mut hypotheses) = candidates(&vars, obs, mode, cfg);
        if current.len() < min_size && !(structured && cfg.refit_feedback) {
            continue;
        }
        let mut accepted: Option<(GeometryEstimate, ConsensusSet)> = None;
        let rounds = if cfg.refit_feedback { MAX_FEEDBACK_ROUNDS } else { 1 };
        for _ in 0..rounds {
            let Ok(est) = refit(&vars, &hypotheses, &current.members, obs, mode, solver_cfg) else {
                break;
            };
            if collapsed(&est.variables, cfg.min_separation * cfg.gate_scale(&est.variables)) {
                break;
            }
            let set = ConsensusSet {
                members: current.members.clone(),
                error: current.len() as f64 - est.objective_value
                    + (n_obs - current.len()) as f64 * cfg.exclusion_cost,
            };
            vars = est.variables.clone();
            accepted = Some((est, set));
            if !cfg.refit_feedback {
                break;
            }
            let (next, next_hyp) = candidates(&vars, obs, mode, cfg);
            if next.len() <= current.len() {
                break;
            }
            current = next;
            hypotheses = next_hyp;
        }
        let Some((est, set)) = accepted.filter(|(_, set)| set.len() >= min_size) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| set.better_than(b)) {
            history.push(HistoryEntry {
                iteration,
                size: set.len(),
                error: set.error,
            });
            best = Some((est, set));
        }
        if best.as_ref().is_some_and(|(_, b)| b.len() == n_obs) {
            break;
        }
    }

    match best {
        Some((estimate, consensus)) => Ok(RansacOutcome {
            estimate,
            consensus,
            history,
        }),
        None => Err(Error::NoConsensus {
            iterations: cfg.max_iterations,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Modality, Reading};
    use crate::observations::{DoaTable, Room};
    use std::f64::consts::PI;

    /// Sensors on a ring at least 1 m apart, events spread inside.
    fn scene(seed: u64, nt: usize) -> (GeometryVariables, ObservationSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cams = vec![
            SensorPose::visual(Position2D::new(0.3, 0.3), Angle::from_degrees(45.0)),
            SensorPose::visual(Position2D::new(5.9, 0.3), Angle::from_degrees(135.0)),
            SensorPose::visual(Position2D::new(5.9, 6.9), Angle::from_degrees(-135.0)),
            SensorPose::visual(Position2D::new(0.3, 6.9), Angle::from_degrees(-45.0)),
        ];
        let positions: Vec<Position2D> = (0..4)
            .map(|i| {
                let a = i as f64 * PI / 2.0 + 0.4;
                Position2D::new(3.1 + 2.4 * a.cos(), 3.6 + 2.8 * a.sin())
            })
            .collect();
        let orientations = (0..4).map(|_| Angle::from_radians(rng.random_range(-PI..PI))).collect();
        let events = (0..nt)
            .map(|_| Position2D::new(rng.random_range(1.2..5.0), rng.random_range(1.4..5.8)))
            .collect();
        let truth = GeometryVariables::new(positions, orientations, events).unwrap();
        let mut a = DoaTable::new(4, nt, Reading::NoDetection);
        let mut v = DoaTable::new(4, nt, Reading::NoDetection);
        for t in 0..nt {
            for i in 0..4 {
                a.set(i, t, Reading::Detection(truth.pose(i).local_doa_to(truth.events[t])));
            }
            for (k, c) in cams.iter().enumerate() {
                v.set(k, t, Reading::Detection(c.local_doa_to(truth.events[t])));
            }
        }
        (truth, ObservationSet::new(a, v, cams, Some(Room::new(6.2, 7.2))).unwrap())
    }

    fn loose_gate() -> RansacConfig {
        RansacConfig {
            crossing_threshold: 1e-6,
            ..RansacConfig::default()
        }
    }

    fn exact_estimate(truth: &GeometryVariables) -> GeometryEstimate {
        GeometryEstimate {
            variables: truth.clone(),
            objective_value: 0.0,
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn config_validation() {
        assert!(RansacConfig::default().validate().is_ok());
        let bad = RansacConfig {
            min_consensus_fraction: 0.0,
            ..RansacConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RansacConfig {
            inlier_threshold: -1.0,
            ..RansacConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(RansacConfig::default().min_consensus(10), 6);
        assert_eq!(RansacConfig::default().min_consensus(11), 7);
    }

    #[test]
    fn minimal_samples() {
        let (_, obs) = scene(1, 20);
        let (cols, sub) = sample_minimal(&obs, Mode::Joint, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(cols.len(), 3);
        assert_eq!(sub.num_events(), 3);
        let (again, _) = sample_minimal(&obs, Mode::Joint, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(cols, again);
        let (cols, _) = sample_minimal(&obs, Mode::Relative, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(cols.len(), 7);
        let small = obs.select_events(&[0, 1]);
        assert!(matches!(
            sample_minimal(&small, Mode::Joint, &mut ChaCha8Rng::seed_from_u64(3)),
            Err(Error::Underdetermined(_))
        ));
    }

    #[test]
    fn perfect_geometry_keeps_everything() {
        let (truth, obs) = scene(2, 12);
        let set = build_candidate_set(&exact_estimate(&truth), &obs, Mode::Joint, &loose_gate());
        assert_eq!(set.len(), obs.count_observed(Mode::Joint));
    }

    #[test]
    fn single_corrupted_reading_is_excluded() {
        let (truth, mut obs) = scene(3, 12);
        let bad = obs.acoustic.get(2, 5).angle().unwrap() + Angle::from_degrees(60.0);
        obs.acoustic.set(2, 5, Reading::Detection(bad));

        // oracle: the corrupted axis against the true event, directly
        let pose = truth.pose(2);
        let dir = pose.bearing(bad).unit_vector().as_position();
        let offset = truth.events[5] - pose.position;
        assert!(offset.cross(dir).abs() > 0.5, "corruption should move the axis well off the event");

        let set = build_candidate_set(&exact_estimate(&truth), &obs, Mode::Joint, &loose_gate());
        assert!(!set.members.contains(&ObsKey::acoustic(2, 5)));
        assert_eq!(set.len(), obs.count_observed(Mode::Joint) - 1);
    }

    #[test]
    fn range_reference_makes_relative_gates_scale_free() {
        let (truth, mut obs) = scene(3, 12);
        let bad = obs.acoustic.get(1, 4).angle().unwrap() + Angle::from_degrees(6.0);
        obs.acoustic.set(1, 4, Reading::Detection(bad));
        let pose = truth.pose(1);
        let offset = (truth.events[4] - pose.position).cross(pose.bearing(bad).unit_vector().as_position()).abs();
        assert!(offset > 0.12 && offset < 0.35, "offset {offset}");

        let shrink = |v: &GeometryVariables| GeometryVariables {
            positions: v.positions.iter().map(|&p| p * 0.02).collect(),
            orientations: v.orientations.clone(),
            events: v.events.iter().map(|&e| e * 0.02).collect(),
        };
        let small = shrink(&truth);
        let key = ObsKey::acoustic(1, 4);
        let fixed = build_candidate_set(&exact_estimate(&small), &obs, Mode::Relative, &loose_gate());
        assert!(fixed.members.contains(&key));

        let scaled = RansacConfig {
            range_reference: Some(2.0),
            ..loose_gate()
        };
        let full = build_candidate_set(&exact_estimate(&truth), &obs, Mode::Relative, &scaled);
        let shrunk = build_candidate_set(&exact_estimate(&small), &obs, Mode::Relative, &scaled);
        assert!(!full.members.contains(&key));
        assert_eq!(full.members, shrunk.members);
    }

    #[test]
    fn clean_instance_recovers_exactly() {
        let (truth, obs) = scene(4, 15);
        let out = calibrate_ransac(&obs, Mode::Joint, &RansacConfig::default(), &SolverConfig::default()).unwrap();
        assert_eq!(out.consensus.len(), obs.count_observed(Mode::Joint));
        assert_eq!(out.history.len(), 1);
        for i in 0..4 {
            assert!(out.estimate.variables.positions[i].distance(truth.positions[i]) < 1e-6);
        }
    }

    #[test]
    fn outliers_are_rejected() {
        let (truth, mut obs) = scene(5, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut injected = Vec::new();
        for i in 0..4 {
            for t in 0..30 {
                if rng.random_bool(0.2) {
                    obs.acoustic.set(i, t, Reading::Detection(Angle::from_radians(rng.random_range(-PI..PI))));
                    injected.push(ObsKey::acoustic(i, t));
                }
            }
        }
        let out = calibrate_ransac(&obs, Mode::Joint, &RansacConfig::default(), &SolverConfig::default()).unwrap();
        let kept = injected.iter().filter(|k| out.consensus.members.contains(k)).count();
        assert!(kept as f64 <= 0.1 * injected.len() as f64, "{kept} of {} outliers kept", injected.len());
        for i in 0..4 {
            assert!(out.estimate.variables.positions[i].distance(truth.positions[i]) < 0.05);
        }
        for w in out.history.windows(2) {
            assert!(w[1].error < w[0].error);
        }
    }

    #[test]
    fn zero_iterations_means_no_consensus() {
        let (_, obs) = scene(6, 10);
        let cfg = RansacConfig {
            max_iterations: 0,
            ..RansacConfig::default()
        };
        assert!(matches!(
            calibrate_ransac(&obs, Mode::Joint, &cfg, &SolverConfig::default()),
            Err(Error::NoConsensus { .. })
        ));
    }

    #[test]
    fn random_readings_yield_no_consensus() {
        let (_, mut obs) = scene(7, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..4 {
            for t in 0..15 {
                obs.acoustic.set(i, t, Reading::Detection(Angle::from_radians(rng.random_range(-PI..PI))));
            }
        }
        for k in 0..4 {
            for t in 0..15 {
                obs.visual.set(k, t, Reading::Detection(Angle::from_radians(rng.random_range(-PI..PI))));
            }
        }
        let cfg = RansacConfig {
            max_iterations: 5,
            min_consensus_fraction: 0.9,
            ..RansacConfig::default()
        };
        assert!(matches!(
            calibrate_ransac(&obs, Mode::Joint, &cfg, &SolverConfig::default()),
            Err(Error::NoConsensus { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let (_, obs) = scene(8, 15);
        let cfg = RansacConfig {
            seed: 42,
            ..RansacConfig::default()
        };
        let a = calibrate_ransac(&obs, Mode::Joint, &cfg, &SolverConfig::default()).unwrap();
        let b = calibrate_ransac(&obs, Mode::Joint, &cfg, &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.consensus.members.iter().any(|k| k.modality == Modality::Visual));
    }
}
