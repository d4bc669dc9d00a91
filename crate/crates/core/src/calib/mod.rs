//! Joint audio-visual geometry calibration from DoA observations.
//!
//! Every observed DoA contributes the squared inner product between its
//! measured unit vector and the unit vector predicted from the current
//! geometry. The summed agreement is maximized over acoustic positions,
//! acoustic orientations and event positions. In [`Mode::Joint`] the camera
//! terms are added, and the known camera poses anchor the solution; in
//! [`Mode::Relative`] only acoustic terms are used and the similarity gauge is
//! fixed by the first two acoustic sensors.
//!
//! Variable ordering used by [`objective_gradient`]:
//! `[m_0.x, m_0.y, Θ_0, …, m_{I-1}.x, m_{I-1}.y, Θ_{I-1}, e_0.x, e_0.y, …, e_{T-1}.x, e_{T-1}.y]`.

mod init;
mod objective;
mod solver;

pub use init::{calibrate, initialize, relative_bootstrap, resect_sensor, resolve_front_back, structured_joint_init};
pub use objective::{objective, objective_gradient, predict_doa_vector, EPS_DIST};
pub use solver::{solve, SolverConfig};

pub(crate) use objective::{assemble, Assembled};

use crate::error::{Error, Result};
use crate::geom::{Angle, Position2D, SensorPose};

/// Which terms enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Acoustic terms only; solution defined up to a similarity transform.
    Relative,
    /// Acoustic and visual terms; cameras are fixed anchors.
    Joint,
}

/// Acoustic positions `M`, orientations `Θ` and event positions `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryVariables {
    pub positions: Vec<Position2D>,
    pub orientations: Vec<Angle>,
    pub events: Vec<Position2D>,
}

impl GeometryVariables {
    pub fn new(positions: Vec<Position2D>, orientations: Vec<Angle>, events: Vec<Position2D>) -> Result<Self> {
        if positions.len() != orientations.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                actual: orientations.len(),
            });
        }
        Ok(Self {
            positions,
            orientations,
            events,
        })
    }

    pub fn num_sensors(&self) -> usize {
        self.positions.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn pose(&self, i: usize) -> SensorPose {
        SensorPose::acoustic(self.positions[i], self.orientations[i])
    }

    pub fn poses(&self) -> Vec<SensorPose> {
        (0..self.num_sensors()).map(|i| self.pose(i)).collect()
    }

    /// Number of scalar variables in the full (ungauged) ordering.
    pub fn dimension(&self) -> usize {
        3 * self.num_sensors() + 2 * self.num_events()
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension());
        for (p, o) in self.positions.iter().zip(&self.orientations) {
            v.extend([p.x, p.y, o.radians()]);
        }
        for e in &self.events {
            v.extend([e.x, e.y]);
        }
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector) for the given shape.
    pub fn from_vector(v: &[f64], sensors: usize, events: usize) -> Result<Self> {
        let expected = 3 * sensors + 2 * events;
        if v.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: v.len(),
            });
        }
        let positions = (0..sensors).map(|i| Position2D::new(v[3 * i], v[3 * i + 1])).collect();
        let orientations = (0..sensors).map(|i| Angle::from_radians(v[3 * i + 2])).collect();
        let base = 3 * sensors;
        let events = (0..events)
            .map(|t| Position2D::new(v[base + 2 * t], v[base + 2 * t + 1]))
            .collect();
        Ok(Self {
            positions,
            orientations,
            events,
        })
    }

    /// Applies `p ↦ s·R(ρ)·p + d` to positions and events and adds `ρ` to every
    /// orientation.
    pub fn transformed(&self, scale: f64, rotation: Angle, translation: Position2D) -> Self {
        let map = |p: &Position2D| p.rotated(rotation) * scale + translation;
        Self {
            positions: self.positions.iter().map(map).collect(),
            orientations: self.orientations.iter().map(|&o| o + rotation).collect(),
            events: self.events.iter().map(map).collect(),
        }
    }
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryEstimate {
    pub variables: GeometryVariables,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Smallest `T` with `T > 3I / (I + K − 2)`.
pub fn minimal_event_count(num_acoustic: usize, num_visual: usize) -> Result<usize> {
    if num_acoustic == 0 {
        return Err(Error::Underdetermined("no acoustic sensors".into()));
    }
    let n = num_acoustic + num_visual;
    if n <= 2 {
        return Err(Error::Underdetermined(format!(
            "I + K = {n}, need more than 2 sensors"
        )));
    }
    Ok(3 * num_acoustic / (n - 2) + 1)
}

/// Visual sensor count that enters [`minimal_event_count`] for `mode`.
pub(crate) fn effective_visual_count(mode: Mode, num_visual: usize) -> usize {
    match mode {
        Mode::Relative => 0,
        Mode::Joint => num_visual,
    }
}
