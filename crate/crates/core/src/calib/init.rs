//! Starting points for the solver and the multi-start driver.

use std::f64::consts::PI;

use rand::Rng;

use super::solver::check_solvable;
use super::{solve, GeometryEstimate, GeometryVariables, Mode, SolverConfig};
use crate::error::{Error, Result};
use crate::geom::{line_intersection, localize_event, Angle, Position2D, SensorPose};
use crate::observations::ObservationSet;

const RESECTION_STEPS: usize = 90;
/// Trimmed resection: passes and the share of rays kept in each.
const TRIM_PASSES: usize = 2;
const TRIM_KEEP: f64 = 0.8;
/// Resection support test: line-to-position distance in meters and the
/// smallest crossing sine of a candidate pair.
const SUPPORT_DISTANCE: f64 = 0.2;
const SUPPORT_CROSSING: f64 = 0.2;
/// Largest intersection spread, in meters, accepted for a visual anchor.
const MAX_ANCHOR_SPREAD: f64 = 0.25;
const BOOTSTRAP_STEPS: usize = 18;
const BOOTSTRAP_KEEP: usize = 3;
const MIN_CROSSING_SINE: f64 = 0.05;
/// Bootstrap triangulations farther than this (in baseline units) are dropped.
const MAX_RELATIVE_RANGE: f64 = 20.0;

fn random_point<R: Rng + ?Sized>(rng: &mut R, lo: Position2D, hi: Position2D) -> Position2D {
    Position2D::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y))
}

/// Circular mean of `arg(e_t − m) − φ_t` over the sensor's readings.
fn fit_orientation(obs: &ObservationSet, sensor: usize, position: Position2D, events: &[Position2D]) -> Angle {
    let (mut s, mut c) = (0.0, 0.0);
    for (t, r) in obs.acoustic.row(sensor).iter().enumerate() {
        if let Some(phi) = r.angle() {
            let d = events[t] - position;
            if d.norm() > 1e-9 {
                let a = d.arg().radians() - phi.radians();
                s += a.sin();
                c += a.cos();
            }
        }
    }
    if s == 0.0 && c == 0.0 {
        Angle::ZERO
    } else {
        Angle::from_radians(s.atan2(c))
    }
}

/// Events seen by at least two cameras, localized from the visual rays alone.
/// Anchors outside the room or with scattered intersections are dropped.
fn visual_events(obs: &ObservationSet) -> Vec<Option<Position2D>> {
    (0..obs.num_events())
        .map(|t| {
            let mut poses = Vec::new();
            let mut bearings = Vec::new();
            for (k, cam) in obs.visual_poses.iter().enumerate() {
                if let Some(d) = obs.visual.get(k, t).angle() {
                    poses.push(*cam);
                    bearings.push(cam.bearing(d));
                }
            }
            if poses.len() < 2 {
                return None;
            }
            let (p, spread) = localize_event(&poses, &bearings).ok()?;
            let inside = obs
                .room
                .is_none_or(|r| (0.0..=r.width).contains(&p.x) && (0.0..=r.depth).contains(&p.y));
            (inside && spread < MAX_ANCHOR_SPREAD).then_some(p)
        })
        .collect()
}

/// Random starting point.
///
/// Joint mode: visually localized events where at least two cameras see the
/// event, the room center otherwise; random acoustic positions in the search
/// region and orientations fitted to the initialized events. Relative mode:
/// sensor 0 at the origin with orientation 0, everything else random.
pub fn initialize<R: Rng + ?Sized>(obs: &ObservationSet, mode: Mode, rng: &mut R) -> GeometryVariables {
    let (ni, nt) = (obs.num_acoustic(), obs.num_events());
    match mode {
        Mode::Joint => {
            let (lo, hi) = obs.search_region();
            let center = obs.reference_center();
            let events: Vec<Position2D> = visual_events(obs).into_iter().map(|e| e.unwrap_or(center)).collect();
            let positions: Vec<Position2D> = (0..ni).map(|_| random_point(rng, lo, hi)).collect();
            let orientations = (0..ni).map(|i| fit_orientation(obs, i, positions[i], &events)).collect();
            GeometryVariables {
                positions,
                orientations,
                events,
            }
        }
        Mode::Relative => {
            let (lo, hi) = (Position2D::new(-1.5, -1.5), Position2D::new(1.5, 1.5));
            let mut positions = vec![Position2D::ORIGIN];
            let mut orientations = vec![Angle::ZERO];
            for _ in 1..ni {
                positions.push(random_point(rng, lo, hi));
                orientations.push(Angle::from_radians(rng.random_range(-PI..PI)));
            }
            let events = (0..nt).map(|_| random_point(rng, lo * 3.0, hi * 3.0)).collect();
            GeometryVariables {
                positions,
                orientations,
                events,
            }
        }
    }
}

/// Pose for acoustic sensor `sensor` from its readings of the events marked
/// in `known`. Orientation is searched on a grid over `[0, π)`, the position
/// is the least-squares point closest to the resulting lines. Returns `None`
/// with fewer than three usable readings or degenerate line geometry.
pub fn resect_sensor(
    obs: &ObservationSet,
    sensor: usize,
    events: &[Position2D],
    known: &[bool],
) -> Option<(Position2D, Angle, f64)> {
    let rays: Vec<(Position2D, f64)> = obs
        .acoustic
        .row(sensor)
        .iter()
        .enumerate()
        .filter(|(t, _)| known[*t])
        .filter_map(|(t, r)| r.angle().map(|a| (events[t], a.radians())))
        .collect();
    let support = resection_support(&rays, RESECTION_STEPS);
    if support.len() >= 3 {
        resect_trimmed(support, RESECTION_STEPS)
    } else {
        resect_trimmed(rays, RESECTION_STEPS)
    }
}

/// The rays agreeing best with a single pose: for each trial orientation,
/// every pairwise intersection of the implied lines is a candidate position,
/// scored by the number of lines passing within [`SUPPORT_DISTANCE`].
fn resection_support(rays: &[(Position2D, f64)], steps: usize) -> Vec<(Position2D, f64)> {
    let mut best: Vec<usize> = Vec::new();
    for s in 0..steps {
        let theta = PI * s as f64 / steps as f64;
        let bearings: Vec<Angle> = rays.iter().map(|(_, phi)| Angle::from_radians(theta + phi)).collect();
        let dirs: Vec<Position2D> = bearings.iter().map(|b| b.unit_vector().as_position()).collect();
        for i in 0..rays.len() {
            for j in (i + 1)..rays.len() {
                let Ok(p) = line_intersection(rays[i].0, bearings[i], rays[j].0, bearings[j], SUPPORT_CROSSING) else {
                    continue;
                };
                let supports = |k: &usize| (p - rays[*k].0).cross(dirs[*k]).abs() < SUPPORT_DISTANCE;
                if (0..rays.len()).filter(supports).count() > best.len() {
                    best = (0..rays.len()).filter(supports).collect();
                }
            }
        }
    }
    best.into_iter().map(|k| rays[k]).collect()
}

/// [`resect_rays`] followed by refits on the best-fitting rays, so that a
/// minority of wild readings does not drag the pose.
fn resect_trimmed(mut rays: Vec<(Position2D, f64)>, steps: usize) -> Option<(Position2D, Angle, f64)> {
    let mut best = resect_rays(&rays, steps)?;
    for _ in 0..TRIM_PASSES {
        let mut scored: Vec<(f64, (Position2D, f64))> = rays
            .iter()
            .map(|&(e, phi)| (((e - best.0).arg().radians() - best.1.radians() - phi).sin().powi(2), (e, phi)))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let keep = ((scored.len() as f64 * TRIM_KEEP).ceil() as usize).max(3);
        if keep >= scored.len() {
            break;
        }
        rays = scored.into_iter().take(keep).map(|(_, r)| r).collect();
        best = resect_rays(&rays, steps)?;
    }
    Some(best)
}

fn resect_rays(rays: &[(Position2D, f64)], steps: usize) -> Option<(Position2D, Angle, f64)> {
    if rays.len() < 3 {
        return None;
    }
    let mut best: Option<(Position2D, Angle, f64)> = None;
    for s in 0..steps {
        let theta = PI * s as f64 / steps as f64;
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (e, phi) in rays {
            let beta = theta + phi;
            let (nx, ny) = (-beta.sin(), beta.cos());
            let proj = nx * e.x + ny * e.y;
            a11 += nx * nx;
            a12 += nx * ny;
            a22 += ny * ny;
            b1 += nx * proj;
            b2 += ny * proj;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-9 {
            continue;
        }
        let m = Position2D::new((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
        let residual: f64 = rays
            .iter()
            .map(|(e, phi)| {
                let d = *e - m;
                (d.arg().radians() - theta - phi).sin().powi(2)
            })
            .sum::<f64>()
            / rays.len() as f64;
        if best.as_ref().is_none_or(|b| residual < b.2) {
            best = Some((m, Angle::from_radians(theta), residual));
        }
    }
    best
}

/// Re-localizes every event not marked in `known` from all rays available
/// under the given acoustic poses (plus the cameras when `use_visual`).
fn relocalize(
    obs: &ObservationSet,
    poses: &[Option<SensorPose>],
    events: &mut [Position2D],
    known: &mut [bool],
    use_visual: bool,
) {
    for t in 0..obs.num_events() {
        if known[t] {
            continue;
        }
        let mut ps = Vec::new();
        let mut bs = Vec::new();
        for (i, pose) in poses.iter().enumerate() {
            if let (Some(pose), Some(phi)) = (pose, obs.acoustic.get(i, t).angle()) {
                ps.push(*pose);
                bs.push(pose.bearing(phi));
            }
        }
        if use_visual {
            for (k, cam) in obs.visual_poses.iter().enumerate() {
                if let Some(d) = obs.visual.get(k, t).angle() {
                    ps.push(*cam);
                    bs.push(cam.bearing(d));
                }
            }
        }
        if ps.len() >= 2 {
            if let Ok((p, _)) = localize_event(&ps, &bs) {
                events[t] = p;
                known[t] = true;
            }
        }
    }
}

/// Joint-mode starting point by resection: anchor events with the cameras,
/// resect every acoustic sensor against them, then localize the remaining
/// events from all rays. Sensors that cannot be resected are retried once
/// after the second localization pass and otherwise start at the center.
pub fn structured_joint_init(obs: &ObservationSet) -> GeometryVariables {
    let (ni, nt) = (obs.num_acoustic(), obs.num_events());
    let center = obs.reference_center();
    let anchored = visual_events(obs);
    if anchored.iter().all(Option::is_none) {
        if let Some(v) = single_camera_init(obs) {
            return v;
        }
    }
    let mut known: Vec<bool> = anchored.iter().map(Option::is_some).collect();
    let mut events: Vec<Position2D> = anchored.into_iter().map(|e| e.unwrap_or(center)).collect();
    let mut poses: Vec<Option<SensorPose>> = vec![None; ni];
    for _ in 0..2 {
        for (i, pose) in poses.iter_mut().enumerate() {
            if pose.is_none() {
                *pose = resect_sensor(obs, i, &events, &known).map(|(m, th, _)| SensorPose::acoustic(m, th));
            }
        }
        relocalize(obs, &poses, &mut events, &mut known, true);
    }
    let positions: Vec<Position2D> = poses
        .iter()
        .enumerate()
        .map(|(i, p)| p.map_or(center + Position2D::new(0.1 * i as f64, 0.0), |p| p.position))
        .collect();
    let orientations = poses
        .iter()
        .enumerate()
        .map(|(i, p)| p.map_or_else(|| fit_orientation(obs, i, positions[i], &events), |p| p.orientation))
        .collect();
    nudge_coincident(&mut events, &positions, nt);
    GeometryVariables {
        positions,
        orientations,
        events,
    }
}

/// Without visual anchors: a relative calibration placed by resecting the
/// best-covered camera inside it. The scale puts the events at the camera's
/// distance from the reference center.
fn single_camera_init(obs: &ObservationSet) -> Option<GeometryVariables> {
    let rel = relative_bootstrap(obs).into_iter().next()?;
    let rel = solve(&rel, obs, Mode::Relative, &SolverConfig::default()).map_or(rel, |e| e.variables);
    let k = (0..obs.num_visual()).max_by_key(|&k| obs.visual.row(k).iter().filter(|r| r.angle().is_some()).count())?;
    let rays: Vec<(Position2D, f64)> = obs
        .visual
        .row(k)
        .iter()
        .enumerate()
        .filter_map(|(t, r)| r.angle().map(|a| (rel.events[t], a.radians())))
        .collect();
    let (cam, mut theta, _) = resect_rays(&rays, RESECTION_STEPS)?;
    let facing: f64 = rays
        .iter()
        .map(|&(e, phi)| ((e - cam).arg().radians() - theta.radians() - phi).cos())
        .sum();
    if facing < 0.0 {
        theta = theta.flipped();
    }
    let pose = obs.visual_poses[k];
    let rotation = pose.orientation - theta;
    let reach = rays.iter().map(|&(e, _)| e.distance(cam)).sum::<f64>() / rays.len() as f64;
    let scale = pose.position.distance(obs.reference_center()).max(1.0) / reach.max(1e-9);
    let map = |p: Position2D| pose.position + (p - cam).rotated(rotation) * scale;
    Some(GeometryVariables {
        positions: rel.positions.iter().map(|&p| map(p)).collect(),
        orientations: rel.orientations.iter().map(|&o| o + rotation).collect(),
        events: rel.events.iter().map(|&e| map(e)).collect(),
    })
}

fn nudge_coincident(events: &mut [Position2D], positions: &[Position2D], nt: usize) {
    for e in events.iter_mut().take(nt) {
        for m in positions {
            if e.distance(*m) < 1e-3 {
                *e += Position2D::new(1e-2, 1e-2);
            }
        }
    }
}

/// Relative-mode starting points: grid over the direction of sensor 1 and its
/// orientation, triangulating events from sensors 0 and 1 and resecting the
/// others. Returns the best few candidates, best first, already in the gauge.
pub fn relative_bootstrap(obs: &ObservationSet) -> Vec<GeometryVariables> {
    let (ni, nt) = (obs.num_acoustic(), obs.num_events());
    if ni < 3 {
        return Vec::new();
    }
    let mut scored: Vec<(f64, GeometryVariables)> = Vec::new();
    for a in 0..BOOTSTRAP_STEPS {
        let omega = PI * a as f64 / BOOTSTRAP_STEPS as f64;
        let m1 = Position2D::new(omega.cos(), omega.sin());
        for b in 0..BOOTSTRAP_STEPS {
            let th1 = Angle::from_radians(PI * b as f64 / BOOTSTRAP_STEPS as f64);
            if let Some(c) = bootstrap_cell(obs, m1, th1, ni, nt) {
                scored.push(c);
            }
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    scored.into_iter().take(BOOTSTRAP_KEEP).map(|(_, v)| v).collect()
}

fn bootstrap_cell(
    obs: &ObservationSet,
    m1: Position2D,
    th1: Angle,
    ni: usize,
    nt: usize,
) -> Option<(f64, GeometryVariables)> {
    let pose0 = SensorPose::acoustic(Position2D::ORIGIN, Angle::ZERO);
    let pose1 = SensorPose::acoustic(m1, th1);
    let mut events = vec![Position2D::ORIGIN; nt];
    let mut known = vec![false; nt];
    for t in 0..nt {
        let (Some(p0), Some(p1)) = (obs.acoustic.get(0, t).angle(), obs.acoustic.get(1, t).angle()) else {
            continue;
        };
        let (b0, b1) = (pose0.bearing(p0), pose1.bearing(p1));
        if (b1 - b0).radians().sin().abs() < MIN_CROSSING_SINE {
            continue;
        }
        if let Ok(e) = line_intersection(pose0.position, b0, pose1.position, b1, 1e-9) {
            if e.norm() < MAX_RELATIVE_RANGE && e.norm() > 1e-3 && e.distance(m1) > 1e-3 {
                events[t] = e;
                known[t] = true;
            }
        }
    }
    let mut poses: Vec<Option<SensorPose>> = vec![Some(pose0), Some(pose1)];
    let (mut score, mut terms) = (0.0, 0usize);
    for i in 2..ni {
        let rays: Vec<(Position2D, f64)> = (0..nt)
            .filter(|&t| known[t])
            .filter_map(|t| obs.acoustic.get(i, t).angle().map(|a| (events[t], a.radians())))
            .collect();
        match resect_rays(&rays, RESECTION_STEPS / 2) {
            Some((m, th, residual)) => {
                score += (1.0 - residual) * rays.len() as f64;
                terms += rays.len();
                poses.push(Some(SensorPose::acoustic(m, th)));
            }
            None => poses.push(None),
        }
    }
    if terms == 0 {
        return None;
    }
    relocalize(obs, &poses, &mut events, &mut known, false);
    let fallback = Position2D::mean(
        &events
            .iter()
            .zip(&known)
            .filter(|(_, k)| **k)
            .map(|(e, _)| *e)
            .collect::<Vec<_>>(),
    )
    .unwrap_or(Position2D::new(0.5, 0.5));
    for t in 0..nt {
        if !known[t] {
            events[t] = fallback;
        }
    }
    let positions: Vec<Position2D> = poses
        .iter()
        .map(|p| p.map_or(Position2D::new(0.5, -0.5), |p| p.position))
        .collect();
    let orientations = poses.iter().map(|p| p.map_or(Angle::ZERO, |p| p.orientation)).collect();
    nudge_coincident(&mut events, &positions, nt);
    Some((
        score / terms as f64,
        GeometryVariables {
            positions,
            orientations,
            events,
        },
    ))
}

/// Resolves the Θ ↔ Θ + π ambiguity left by the squared inner products:
/// every free sensor is turned so that its readings point toward, not away
/// from, the events. In Relative mode the whole frame is first point-reflected
/// if sensor 0 (whose orientation is pinned) faces away.
pub fn resolve_front_back(vars: &GeometryVariables, obs: &ObservationSet, mode: Mode) -> GeometryVariables {
    let alignment = |v: &GeometryVariables, i: usize| -> f64 {
        let (m, th) = (v.positions[i], v.orientations[i].radians());
        obs.acoustic
            .row(i)
            .iter()
            .enumerate()
            .filter_map(|(t, r)| r.angle().map(|phi| (t, phi.radians())))
            .map(|(t, phi)| {
                let d = v.events[t] - m;
                (th + phi - d.y.atan2(d.x)).cos()
            })
            .sum()
    };
    let mut out = vars.clone();
    let first_free = match mode {
        Mode::Relative => {
            if out.num_sensors() > 0 && alignment(&out, 0) < 0.0 {
                for p in out.positions.iter_mut().chain(out.events.iter_mut()) {
                    *p = -*p;
                }
            }
            1
        }
        Mode::Joint => 0,
    };
    for i in first_free..out.num_sensors() {
        if alignment(&out, i) < 0.0 {
            out.orientations[i] = out.orientations[i].flipped();
        }
    }
    out
}

/// Multi-start calibration. The structured starting points come first
/// (when enabled), then random ones up to `cfg.restarts` starts in total.
/// The highest objective wins; a start reaching the upper bound stops the
/// search early.
pub fn calibrate<R: Rng + ?Sized>(
    obs: &ObservationSet,
    mode: Mode,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<GeometryEstimate> {
    check_solvable(obs, mode)?;
    let bound = obs.count_observed(mode) as f64;
    let mut starts: Vec<GeometryVariables> = Vec::new();
    if cfg.structured_init {
        match mode {
            Mode::Joint => starts.push(structured_joint_init(obs)),
            Mode::Relative => starts.extend(relative_bootstrap(obs)),
        }
    }
    starts.truncate(cfg.restarts.max(1));
    let randoms = cfg.restarts.max(1) - starts.len();
    let mut best: Option<GeometryEstimate> = None;
    let mut last_err = None;
    for n in 0..starts.len() + randoms {
        let start = if n < starts.len() {
            starts[n].clone()
        } else {
            initialize(obs, mode, rng)
        };
        match solve(&start, obs, mode, cfg) {
            Ok(est) => {
                let better = best.as_ref().is_none_or(|b| est.objective_value > b.objective_value);
                if better {
                    best = Some(est);
                }
            }
            Err(e @ Error::Underdetermined(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
        if best.as_ref().is_some_and(|b| b.objective_value >= bound - 1e-9) {
            break;
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::SingularHessian))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::objective;
    use crate::calib::solver::project_gauge;
    use crate::geom::Reading;
    use crate::observations::{DoaTable, Room};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene(rng: &mut ChaCha8Rng, ni: usize, nt: usize) -> (GeometryVariables, ObservationSet) {
        let room = Room::new(6.2, 7.2);
        let cams = vec![
            SensorPose::visual(Position2D::new(0.2, 0.2), Angle::from_degrees(45.0)),
            SensorPose::visual(Position2D::new(6.0, 0.2), Angle::from_degrees(135.0)),
            SensorPose::visual(Position2D::new(6.0, 7.0), Angle::from_degrees(-135.0)),
            SensorPose::visual(Position2D::new(0.2, 7.0), Angle::from_degrees(-45.0)),
        ];
        let positions: Vec<Position2D> = (0..ni)
            .map(|i| {
                let a = i as f64 * 2.0 * PI / ni as f64;
                Position2D::new(3.1 + 2.2 * a.cos(), 3.6 + 2.6 * a.sin())
            })
            .collect();
        let orientations: Vec<Angle> = (0..ni).map(|_| Angle::from_radians(rng.random_range(-PI..PI))).collect();
        let events: Vec<Position2D> = (0..nt)
            .map(|_| Position2D::new(rng.random_range(1.5..4.7), rng.random_range(1.8..5.4)))
            .collect();
        let truth = GeometryVariables::new(positions, orientations, events).unwrap();
        let mut a = DoaTable::new(ni, nt, Reading::NoDetection);
        let mut v = DoaTable::new(4, nt, Reading::NoDetection);
        for t in 0..nt {
            for i in 0..ni {
                a.set(i, t, Reading::Detection(truth.pose(i).local_doa_to(truth.events[t])));
            }
            for (k, c) in cams.iter().enumerate() {
                v.set(k, t, Reading::Detection(c.local_doa_to(truth.events[t])));
            }
        }
        (truth, ObservationSet::new(a, v, cams, Some(room)).unwrap())
    }

    #[test]
    fn initialize_uses_visual_events_and_center_fallback() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (truth, mut obs) = scene(&mut rng, 3, 6);
        for k in 0..4 {
            obs.visual.set(k, 2, Reading::MissedDetection);
        }
        obs.visual.set(1, 4, Reading::NoDetection);
        let init = initialize(&obs, Mode::Joint, &mut rng);
        for t in [0, 1, 3, 4, 5] {
            assert!(init.events[t].distance(truth.events[t]) < 1e-9);
        }
        assert_eq!(init.events[2], Room::new(6.2, 7.2).center());
        let again = initialize(&obs, Mode::Joint, &mut ChaCha8Rng::seed_from_u64(9));
        let again2 = initialize(&obs, Mode::Joint, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(again, again2);
        let rel = initialize(&obs, Mode::Relative, &mut rng);
        assert_eq!(rel.positions[0], Position2D::ORIGIN);
        assert_eq!(rel.orientations[0], Angle::ZERO);
    }

    #[test]
    fn resection_recovers_exact_pose() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (truth, obs) = scene(&mut rng, 3, 10);
        let known = vec![true; 10];
        for i in 0..3 {
            let (m, _, residual) = resect_sensor(&obs, i, &truth.events, &known).unwrap();
            // grid-limited, so only approximate
            assert!(m.distance(truth.positions[i]) < 0.5, "sensor {i}");
            assert!(residual < 0.01);
        }
        assert!(resect_sensor(&obs, 0, &truth.events, &[true, true, false, false, false, false, false, false, false, false]).is_none());
    }

    #[test]
    fn calibrate_joint_is_exact_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (truth, obs) = scene(&mut rng, 4, 15);
        let est = calibrate(&obs, Mode::Joint, &SolverConfig::default(), &mut rng).unwrap();
        for i in 0..4 {
            assert!(est.variables.positions[i].distance(truth.positions[i]) < 1e-6);
            assert!((est.variables.orientations[i] - truth.orientations[i]).radians().abs() < 1e-6);
        }
    }

    #[test]
    fn single_camera_start_reaches_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (truth, full) = scene(&mut rng, 4, 12);
        let mut v = DoaTable::new(1, 12, Reading::NoDetection);
        for t in 0..12 {
            v.set(0, t, full.visual.get(0, t));
        }
        let obs = ObservationSet::new(full.acoustic.clone(), v, full.visual_poses[..1].to_vec(), full.room).unwrap();
        let start = structured_joint_init(&obs);
        let est = solve(&start, &obs, Mode::Joint, &SolverConfig::default()).unwrap();
        let bound = obs.count_observed(Mode::Joint) as f64;
        assert!(est.objective_value > bound - 1e-9, "{} of {bound}", est.objective_value);
        // one camera fixes rotation but not scale: orientations are exact
        for i in 0..4 {
            let d = (est.variables.orientations[i] - truth.orientations[i]).radians();
            assert!(d.sin().abs() < 1e-6, "sensor {i}: {d}");
        }
    }

    #[test]
    fn sensor_with_two_readings_is_still_fitted() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (_, obs) = scene(&mut rng, 1, 2);
        let est = calibrate(&obs, Mode::Joint, &SolverConfig::default(), &mut rng).unwrap();
        assert!(est.objective_value > obs.count_observed(Mode::Joint) as f64 - 1e-9);
    }

    #[test]
    fn calibrate_relative_matches_truth_in_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (truth, obs) = scene(&mut rng, 4, 20);
        let est = calibrate(&obs, Mode::Relative, &SolverConfig::default(), &mut rng).unwrap();
        let expected = project_gauge(&truth).unwrap();
        for i in 0..4 {
            assert!(est.variables.positions[i].distance(expected.positions[i]) < 1e-6);
            assert!((est.variables.orientations[i] - expected.orientations[i]).radians().abs() < 1e-6);
        }
        assert!((objective(&project_gauge(&truth).unwrap(), &obs, Mode::Relative).unwrap() - 80.0).abs() < 1e-9);
    }

    #[test]
    fn front_back_resolution_undoes_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (truth, obs) = scene(&mut rng, 4, 8);
        let mut flipped = truth.clone();
        flipped.orientations[1] = flipped.orientations[1].flipped();
        flipped.orientations[3] = flipped.orientations[3].flipped();
        assert_eq!(resolve_front_back(&flipped, &obs, Mode::Joint), truth);
        let gauge = project_gauge(&truth).unwrap();
        let mut reflected = gauge.clone();
        for p in reflected.positions.iter_mut().chain(reflected.events.iter_mut()) {
            *p = -*p;
        }
        let back = resolve_front_back(&reflected, &obs, Mode::Relative);
        for i in 0..4 {
            assert!(back.positions[i].distance(gauge.positions[i]) < 1e-12);
            assert!((back.orientations[i] - gauge.orientations[i]).radians().abs() < 1e-12);
        }
    }
}
