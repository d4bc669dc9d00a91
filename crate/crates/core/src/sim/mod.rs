//! Synthetic scenarios and DoA corruption models.

mod io;
mod noise;

pub use io::{parse_observations, parse_scenario, write_observations, write_scenario};
pub use noise::{
    corrupt_acoustic, corrupt_visual, AcousticCorruption, AcousticNoiseModel, HmmState, VisualHmmModel,
};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Angle, Position2D, Reading, SensorPose};
use crate::observations::{DoaTable, ObservationSet, Room};

/// FOV half angle that makes every bearing visible.
pub const FULL_FOV_DEG: f64 = 180.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub room: Room,
    pub num_acoustic: usize,
    pub num_visual: usize,
    pub num_stops: usize,
    /// Minimum sensor distance to any wall.
    pub wall_margin: f64,
    /// Cameras are placed between `wall_margin` and `wall_margin + camera_band`
    /// from the nearest wall.
    pub camera_band: f64,
    pub min_sensor_separation: f64,
    pub max_step: f64,
    /// Minimum speaker distance to any wall.
    pub speaker_margin: f64,
    /// Minimum speaker distance to any sensor.
    pub sensor_clearance: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            room: Room::new(6.2, 7.2),
            num_acoustic: 4,
            num_visual: 4,
            num_stops: 140,
            wall_margin: 0.5,
            camera_band: 0.3,
            min_sensor_separation: 1.0,
            max_step: 1.0,
            speaker_margin: 0.3,
            sensor_clearance: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room: Room,
    pub acoustic_poses: Vec<SensorPose>,
    pub visual_poses: Vec<SensorPose>,
    pub trajectory: Vec<Position2D>,
    pub seed: u64,
}

const MAX_TRIES: usize = 10_000;

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, room: Room, margin: f64) -> Position2D {
    Position2D::new(
        rng.random_range(margin..=room.width - margin),
        rng.random_range(margin..=room.depth - margin),
    )
}

fn wall_distance(room: Room, p: Position2D) -> f64 {
    p.x.min(p.y).min(room.width - p.x).min(room.depth - p.y)
}

/// Random room layout and speaker walk, reproducible from `seed`.
pub fn generate_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    let room = cfg.room;
    if !(room.width > 0.0 && room.depth > 0.0) {
        return Err(Error::InvalidConfig("room dimensions must be positive".into()));
    }
    if cfg.num_acoustic == 0 || cfg.num_stops == 0 {
        return Err(Error::InvalidConfig("sensor and stop counts must be at least 1".into()));
    }
    let inner = 2.0 * (cfg.wall_margin + cfg.camera_band).max(cfg.speaker_margin);
    if inner >= room.width || inner >= room.depth {
        return Err(Error::InfeasiblePlacement(format!(
            "margins leave no room inside {} x {}",
            room.width, room.depth
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = room.center();
    let mut placed: Vec<Position2D> = Vec::new();
    let far_enough = |p: Position2D, placed: &[Position2D]| placed.iter().all(|q| q.distance(p) >= cfg.min_sensor_separation);

    let mut visual_poses = Vec::with_capacity(cfg.num_visual);
    for _ in 0..cfg.num_visual {
        let p = (0..MAX_TRIES)
            .map(|_| uniform_in(&mut rng, room, cfg.wall_margin))
            .find(|&p| wall_distance(room, p) <= cfg.wall_margin + cfg.camera_band && far_enough(p, &placed))
            .ok_or_else(|| Error::InfeasiblePlacement("cannot place cameras".into()))?;
        placed.push(p);
        visual_poses.push(SensorPose::visual(p, (center - p).arg()));
    }
    let mut acoustic_poses = Vec::with_capacity(cfg.num_acoustic);
    for _ in 0..cfg.num_acoustic {
        let p = (0..MAX_TRIES)
            .map(|_| uniform_in(&mut rng, room, cfg.wall_margin))
            .find(|&p| far_enough(p, &placed))
            .ok_or_else(|| Error::InfeasiblePlacement("cannot place acoustic sensors".into()))?;
        placed.push(p);
        acoustic_poses.push(SensorPose::acoustic(p, Angle::from_radians(rng.random_range(-PI..PI))));
    }

    let clear = |p: Position2D| placed.iter().all(|q| q.distance(p) >= cfg.sensor_clearance);
    let mut trajectory = Vec::with_capacity(cfg.num_stops);
    let mut current = (0..MAX_TRIES)
        .map(|_| uniform_in(&mut rng, room, cfg.speaker_margin))
        .find(|&p| clear(p))
        .ok_or_else(|| Error::InfeasiblePlacement("no free speaker position".into()))?;
    trajectory.push(current);
    while trajectory.len() < cfg.num_stops {
        let next = (0..MAX_TRIES).find_map(|_| {
            let dir = rng.random_range(-PI..PI);
            let len = rng.random_range(0.0..=cfg.max_step);
            let p = current + Position2D::new(dir.cos(), dir.sin()) * len;
            (room.contains(p, cfg.speaker_margin) && clear(p)).then_some(p)
        });
        current = next.ok_or_else(|| Error::InfeasiblePlacement("speaker walk is stuck".into()))?;
        trajectory.push(current);
    }

    Ok(Scenario {
        room,
        acoustic_poses,
        visual_poses,
        trajectory,
        seed,
    })
}

/// `true` iff `target` lies within `±fov_half_angle_deg` of the camera axis.
pub fn in_fov(camera: &SensorPose, target: Position2D, fov_half_angle_deg: f64) -> bool {
    camera.local_doa_to(target).degrees().abs() <= fov_half_angle_deg
}

/// Exact local DoAs for every sensor and stop. Visual entries outside the
/// field of view are `NoDetection`.
pub fn true_doas(scenario: &Scenario, fov_half_angle_deg: f64) -> ObservationSet {
    let nt = scenario.trajectory.len();
    let mut acoustic = DoaTable::new(scenario.acoustic_poses.len(), nt, Reading::NoDetection);
    for (i, pose) in scenario.acoustic_poses.iter().enumerate() {
        for (t, &e) in scenario.trajectory.iter().enumerate() {
            acoustic.set(i, t, Reading::Detection(pose.local_doa_to(e)));
        }
    }
    let mut visual = DoaTable::new(scenario.visual_poses.len(), nt, Reading::NoDetection);
    for (k, cam) in scenario.visual_poses.iter().enumerate() {
        for (t, &e) in scenario.trajectory.iter().enumerate() {
            if in_fov(cam, e, fov_half_angle_deg) {
                visual.set(k, t, Reading::Detection(cam.local_doa_to(e)));
            }
        }
    }
    ObservationSet::new(acoustic, visual, scenario.visual_poses.clone(), Some(scenario.room))
        .expect("tables built with matching shapes")
}

impl Scenario {
    /// Copy restricted to the given stops, in order.
    pub fn select_stops(&self, stops: &[usize]) -> Scenario {
        Scenario {
            trajectory: stops.iter().map(|&t| self.trajectory[t]).collect(),
            ..self.clone()
        }
    }
}

/// Up to `count` stops spread over the room by farthest-point selection among
/// the stops that at least two cameras observe in `obs`. Starts from the stop
/// closest to the room center.
pub fn select_spread_events(scenario: &Scenario, obs: &ObservationSet, count: usize) -> Vec<usize> {
    let candidates: Vec<usize> = (0..scenario.trajectory.len())
        .filter(|&t| obs.column_counts(t).1 >= 2)
        .collect();
    if candidates.is_empty() || count == 0 {
        return Vec::new();
    }
    let pts = &scenario.trajectory;
    let center = scenario.room.center();
    let first = *candidates
        .iter()
        .min_by(|&&a, &&b| pts[a].distance(center).total_cmp(&pts[b].distance(center)))
        .expect("non-empty");
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = candidates.iter().map(|&t| pts[t].distance(pts[first])).collect();
    while chosen.len() < count.min(candidates.len()) {
        let (j, _) = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let t = candidates[j];
        chosen.push(t);
        for (d, &c) in dist.iter_mut().zip(&candidates) {
            *d = d.min(pts[c].distance(pts[t]));
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::localize_event;

    #[test]
    fn default_scenario_shape() {
        let s = generate_scenario(&ScenarioConfig::default(), 1).unwrap();
        assert_eq!(s.acoustic_poses.len(), 4);
        assert_eq!(s.visual_poses.len(), 4);
        assert_eq!(s.trajectory.len(), 140);
        assert_eq!(s.room, Room::new(6.2, 7.2));
        let sensors: Vec<Position2D> = s
            .acoustic_poses
            .iter()
            .chain(&s.visual_poses)
            .map(|p| p.position)
            .collect();
        for (a, p) in sensors.iter().enumerate() {
            assert!(s.room.contains(*p, 0.5));
            for q in &sensors[a + 1..] {
                assert!(p.distance(*q) >= 1.0);
            }
        }
        for w in s.trajectory.windows(2) {
            assert!(w[0].distance(w[1]) <= 1.0 + 1e-12);
        }
        for e in &s.trajectory {
            assert!(s.room.contains(*e, 0.3));
        }
        for c in &s.visual_poses {
            assert!(c.local_doa_to(s.room.center()).radians().abs() < 1e-12);
        }
    }

    #[test]
    fn scenario_is_reproducible() {
        let cfg = ScenarioConfig::default();
        assert_eq!(generate_scenario(&cfg, 9).unwrap(), generate_scenario(&cfg, 9).unwrap());
        assert_ne!(generate_scenario(&cfg, 9).unwrap(), generate_scenario(&cfg, 10).unwrap());
        let one = ScenarioConfig {
            num_stops: 1,
            ..cfg.clone()
        };
        assert_eq!(generate_scenario(&one, 1).unwrap().trajectory.len(), 1);
        let tight = ScenarioConfig {
            wall_margin: 3.2,
            ..cfg
        };
        assert!(matches!(generate_scenario(&tight, 1), Err(Error::InfeasiblePlacement(_))));
    }

    fn one_camera(deg: f64, event: Position2D) -> Scenario {
        Scenario {
            room: Room::new(6.0, 6.0),
            acoustic_poses: vec![SensorPose::acoustic(Position2D::ORIGIN, Angle::ZERO)],
            visual_poses: vec![SensorPose::visual(Position2D::ORIGIN, Angle::from_degrees(deg))],
            trajectory: vec![event],
            seed: 0,
        }
    }

    #[test]
    fn true_doas_examples() {
        let s = one_camera(0.0, Position2D::new(1.0, 1.0));
        let o = true_doas(&s, 30.0);
        assert!((o.acoustic.get(0, 0).angle().unwrap().degrees() - 45.0).abs() < 1e-12);
        assert_eq!(o.visual.get(0, 0), Reading::NoDetection);
        let b = 40f64.to_radians();
        let s = one_camera(0.0, Position2D::new(b.cos(), b.sin()));
        assert_eq!(true_doas(&s, 30.0).visual.get(0, 0), Reading::NoDetection);
    }

    #[test]
    fn fov_boundary_is_closed() {
        let cam = SensorPose::visual(Position2D::ORIGIN, Angle::ZERO);
        let at = |deg: f64| {
            let r = deg.to_radians();
            Position2D::new(r.cos(), r.sin())
        };
        assert!(in_fov(&cam, at(30.0 - 1e-9), 30.0));
        assert!(!in_fov(&cam, at(30.0 + 1e-9), 30.0));
        assert!(in_fov(&cam, at(-179.0), FULL_FOV_DEG));
    }

    #[test]
    fn true_doas_match_direct_recomputation_and_invert() {
        let s = generate_scenario(&ScenarioConfig::default(), 3).unwrap();
        let o = true_doas(&s, 30.0);
        for (k, cam) in s.visual_poses.iter().enumerate() {
            for (t, e) in s.trajectory.iter().enumerate() {
                let d = *e - cam.position;
                let mut rel = d.y.atan2(d.x) - cam.orientation.radians();
                rel = (rel + PI).rem_euclid(2.0 * PI) - PI;
                match o.visual.get(k, t) {
                    Reading::Detection(a) => assert!((a.radians() - rel).abs() < 1e-12),
                    _ => assert!(rel.abs().to_degrees() > 30.0),
                }
            }
        }
        for (t, e) in s.trajectory.iter().enumerate() {
            let bearings: Vec<Angle> = s
                .acoustic_poses
                .iter()
                .enumerate()
                .map(|(i, p)| p.bearing(o.acoustic.get(i, t).angle().unwrap()))
                .collect();
            let (p, _) = localize_event(&s.acoustic_poses, &bearings).unwrap();
            assert!(p.distance(*e) < 1e-9);
        }
    }

    #[test]
    fn spread_selection() {
        let s = generate_scenario(&ScenarioConfig::default(), 4).unwrap();
        let o = true_doas(&s, FULL_FOV_DEG);
        let sel = select_spread_events(&s, &o, 15);
        assert_eq!(sel.len(), 15);
        let mut dedup = sel.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 15);
        let sub = s.select_stops(&sel);
        assert_eq!(sub.trajectory[0], s.trajectory[sel[0]]);
    }
}
