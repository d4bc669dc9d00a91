use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{in_fov, Scenario};
use crate::error::{Error, Result};
use crate::geom::{Angle, Reading};
use crate::observations::{ObsKey, ObservationSet};

/// Visual streams are offset so they never coincide with acoustic ones.
const VISUAL_STREAM_OFFSET: u64 = 1 << 32;

fn sensor_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian angle noise whose spread and outlier rate grow linearly with a
/// reverberation proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticNoiseModel {
    pub t60_ms: f64,
    pub base_sigma_deg: f64,
    pub sigma_slope_deg_per_ms: f64,
    pub outlier_prob_slope_per_ms: f64,
}

impl Default for AcousticNoiseModel {
    fn default() -> Self {
        Self {
            t60_ms: 0.0,
            base_sigma_deg: 0.3,
            sigma_slope_deg_per_ms: 0.002,
            outlier_prob_slope_per_ms: 2e-4,
        }
    }
}

impl AcousticNoiseModel {
    pub fn with_t60(&self, t60_ms: f64) -> Self {
        Self { t60_ms, ..self.clone() }
    }

    /// Noise-free model.
    pub fn exact() -> Self {
        Self {
            t60_ms: 0.0,
            base_sigma_deg: 0.0,
            sigma_slope_deg_per_ms: 0.0,
            outlier_prob_slope_per_ms: 0.0,
        }
    }

    pub fn sigma_deg(&self) -> f64 {
        self.base_sigma_deg + self.sigma_slope_deg_per_ms * self.t60_ms
    }

    pub fn outlier_probability(&self) -> f64 {
        self.outlier_prob_slope_per_ms * self.t60_ms
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=500.0).contains(&self.t60_ms) {
            return Err(Error::InvalidConfig(format!("t60 {} ms outside [0, 500]", self.t60_ms)));
        }
        if !(self.sigma_deg() >= 0.0) {
            return Err(Error::InvalidConfig("negative acoustic noise".into()));
        }
        if !(0.0..=1.0).contains(&self.outlier_probability()) {
            return Err(Error::InvalidConfig("outlier probability outside [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticCorruption {
    pub observations: ObservationSet,
    /// Cells replaced by a uniform angle.
    pub outliers: BTreeSet<ObsKey>,
}

/// Perturbs every acoustic angle. Each sensor draws from its own stream of
/// `seed`, and every cell consumes the same three draws regardless of the
/// model, so the same seed gives coupled noise across noise levels.
pub fn corrupt_acoustic(clean: &ObservationSet, model: &AcousticNoiseModel, seed: u64) -> Result<AcousticCorruption> {
    model.validate()?;
    let sigma = model.sigma_deg().to_radians();
    let p_out = model.outlier_probability();
    let mut out = clean.clone();
    let mut outliers = BTreeSet::new();
    for i in 0..clean.num_acoustic() {
        let mut rng = sensor_rng(seed, i as u64);
        for t in 0..clean.num_events() {
            let u: f64 = rng.random();
            let z: f64 = rng.sample(StandardNormal);
            let w: f64 = rng.random_range(-PI..PI);
            let reading = clean.acoustic.get(i, t);
            let Some(angle) = reading.angle() else {
                continue;
            };
            let noisy = if u < p_out {
                outliers.insert(ObsKey::acoustic(i, t));
                Angle::from_radians(w)
            } else {
                Angle::from_radians(angle.radians() + sigma * z)
            };
            out.acoustic.set(i, t, reading.with_angle(noisy));
        }
    }
    Ok(AcousticCorruption {
        observations: out,
        outliers,
    })
}

/// States of the two detection chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HmmState {
    Detection,
    MissedDetection,
    FalseDetection,
    NoDetection,
}

const IN_STATES: [HmmState; 3] = [HmmState::Detection, HmmState::MissedDetection, HmmState::FalseDetection];
const OUT_STATES: [HmmState; 2] = [HmmState::FalseDetection, HmmState::NoDetection];

/// Camera detection-error model: one chain while the speaker is in view, one
/// while it is not.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualHmmModel {
    pub fov_half_angle_deg: f64,
    /// Rows/columns ordered Detection, MissedDetection, FalseDetection.
    pub in_fov_transition: [[f64; 3]; 3],
    /// Rows/columns ordered FalseDetection, NoDetection.
    pub out_fov_transition: [[f64; 2]; 2],
    pub detection_sigma_deg: f64,
    /// Chain steps per stop; the stop reports the majority state.
    pub frames_per_stop: usize,
}

impl Default for VisualHmmModel {
    fn default() -> Self {
        Self {
            fov_half_angle_deg: 30.0,
            in_fov_transition: [[0.9, 0.07, 0.03], [0.8, 0.14, 0.06], [0.8, 0.14, 0.06]],
            out_fov_transition: [[0.05, 0.95], [0.05, 0.95]],
            detection_sigma_deg: 1.0,
            frames_per_stop: 1,
        }
    }
}

impl VisualHmmModel {
    /// Always detects, without angle noise.
    pub fn perfect(fov_half_angle_deg: f64) -> Self {
        Self {
            fov_half_angle_deg,
            in_fov_transition: [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            out_fov_transition: [[0.0, 1.0], [0.0, 1.0]],
            detection_sigma_deg: 0.0,
            frames_per_stop: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_half_angle_deg > 0.0 && self.fov_half_angle_deg <= 180.0) {
            return Err(Error::InvalidConfig(format!(
                "fov half angle {} outside (0, 180]",
                self.fov_half_angle_deg
            )));
        }
        let rows = self
            .in_fov_transition
            .iter()
            .map(|r| r.as_slice())
            .chain(self.out_fov_transition.iter().map(|r| r.as_slice()));
        for row in rows {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("transition row {row:?} is not stochastic")));
            }
        }
        if !(self.detection_sigma_deg >= 0.0) || self.frames_per_stop == 0 {
            return Err(Error::InvalidConfig("invalid detection sigma or frame count".into()));
        }
        Ok(())
    }
}

fn draw_next(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.len() - 1
}

/// Advances the chain one step. `prev` is `None` when the speaker has just
/// changed visibility: the in-view chain then starts in Detection and the
/// out-of-view chain in NoDetection.
fn step(model: &VisualHmmModel, prev: Option<HmmState>, inside: bool, u: f64) -> HmmState {
    let Some(s) = prev else {
        return if inside { HmmState::Detection } else { HmmState::NoDetection };
    };
    if inside {
        let row = IN_STATES.iter().position(|&x| x == s).expect("in-view state");
        IN_STATES[draw_next(&model.in_fov_transition[row], u)]
    } else {
        let row = OUT_STATES.iter().position(|&x| x == s).expect("out-of-view state");
        OUT_STATES[draw_next(&model.out_fov_transition[row], u)]
    }
}

/// Samples `steps` states of the in-view chain starting from `start`.
#[cfg(test)]
fn run_in_view_chain<R: Rng + ?Sized>(model: &VisualHmmModel, start: HmmState, steps: usize, rng: &mut R) -> Vec<HmmState> {
    let mut s = start;
    (0..steps)
        .map(|_| {
            let row = IN_STATES.iter().position(|&x| x == s).expect("in-view state");
            s = IN_STATES[draw_next(&model.in_fov_transition[row], rng.random())];
            s
        })
        .collect()
}

fn majority(frames: &[(HmmState, Option<f64>)]) -> (HmmState, Option<Angle>) {
    let order = [
        HmmState::Detection,
        HmmState::FalseDetection,
        HmmState::MissedDetection,
        HmmState::NoDetection,
    ];
    let count = |s: HmmState| frames.iter().filter(|f| f.0 == s).count();
    let best = order.into_iter().max_by_key(|&s| (count(s), std::cmp::Reverse(s))).expect("non-empty");
    let angles: Vec<f64> = frames.iter().filter(|f| f.0 == best).filter_map(|f| f.1).collect();
    let angle = match angles.as_slice() {
        [] => None,
        [a] => Some(Angle::from_radians(*a)),
        many => {
            let (sn, cs) = many.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
            Some(Angle::from_radians(sn.atan2(cs)))
        }
    };
    (best, angle)
}

/// Replaces the visual table with the output of the detection chains.
///
/// Visibility is decided from the true stop positions of `scenario`. Each
/// camera uses its own stream of `seed`.
pub fn corrupt_visual(
    clean: &ObservationSet,
    scenario: &Scenario,
    model: &VisualHmmModel,
    seed: u64,
) -> Result<ObservationSet> {
    model.validate()?;
    let fov = model.fov_half_angle_deg;
    let sigma = model.detection_sigma_deg.to_radians();
    let mut out = clean.clone();
    for (k, cam) in scenario.visual_poses.iter().enumerate() {
        let mut rng = sensor_rng(seed, VISUAL_STREAM_OFFSET + k as u64);
        let mut state: Option<HmmState> = None;
        let mut was_inside = None;
        for (t, &e) in scenario.trajectory.iter().enumerate() {
            let inside = in_fov(cam, e, fov);
            let truth = cam.local_doa_to(e).radians();
            let mut frames = Vec::with_capacity(model.frames_per_stop);
            for _ in 0..model.frames_per_stop {
                let u: f64 = rng.random();
                let z: f64 = rng.sample(StandardNormal);
                let w: f64 = rng.random_range(-1.0..=1.0);
                let prev = if was_inside == Some(inside) { state } else { None };
                let s = step(model, prev, inside, u);
                state = Some(s);
                was_inside = Some(inside);
                let angle = match s {
                    HmmState::Detection => Some(truth + sigma * z),
                    HmmState::FalseDetection => Some(w * fov.min(180.0).to_radians()),
                    _ => None,
                };
                frames.push((s, angle));
            }
            let (s, angle) = majority(&frames);
            let reading = match (s, angle) {
                (HmmState::Detection, Some(a)) => Reading::Detection(a),
                (HmmState::FalseDetection, Some(a)) => Reading::FalseDetection(a),
                (HmmState::MissedDetection, _) => Reading::MissedDetection,
                _ => Reading::NoDetection,
            };
            out.visual.set(k, t, reading);
        }
    }
    Ok(out)
}
