//! Tables of DoA readings for both modalities.

use std::collections::BTreeSet;

use crate::calib::Mode;
use crate::error::{Error, Result};
use crate::geom::{DoaObservation, Modality, Position2D, Reading, SensorPose};

/// Rectangular room `[0, width] × [0, depth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    pub width: f64,
    pub depth: f64,
}

impl Room {
    pub fn new(width: f64, depth: f64) -> Self {
        Self { width, depth }
    }

    pub fn center(&self) -> Position2D {
        Position2D::new(self.width / 2.0, self.depth / 2.0)
    }

    pub fn contains(&self, p: Position2D, margin: f64) -> bool {
        p.x >= margin && p.x <= self.width - margin && p.y >= margin && p.y <= self.depth - margin
    }
}

/// A dense `sensors × events` table of readings.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaTable {
    sensors: usize,
    events: usize,
    cells: Vec<Reading>,
}

impl DoaTable {
    pub fn new(sensors: usize, events: usize, fill: Reading) -> Self {
        Self {
            sensors,
            events,
            cells: vec![fill; sensors * events],
        }
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn get(&self, sensor: usize, event: usize) -> Reading {
        self.cells[sensor * self.events + event]
    }

    pub fn set(&mut self, sensor: usize, event: usize, reading: Reading) {
        self.cells[sensor * self.events + event] = reading;
    }

    pub fn row(&self, sensor: usize) -> &[Reading] {
        &self.cells[sensor * self.events..(sensor + 1) * self.events]
    }

    pub fn count_observed(&self) -> usize {
        self.cells.iter().filter(|r| r.angle().is_some()).count()
    }

    fn select_events(&self, columns: &[usize]) -> DoaTable {
        let mut out = DoaTable::new(self.sensors, columns.len(), Reading::NoDetection);
        for s in 0..self.sensors {
            for (new_t, &t) in columns.iter().enumerate() {
                out.set(s, new_t, self.get(s, t));
            }
        }
        out
    }
}

/// Identifies one cell of an [`ObservationSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObsKey {
    pub modality: Modality,
    pub sensor: usize,
    pub event: usize,
}

impl ObsKey {
    pub fn acoustic(sensor: usize, event: usize) -> Self {
        Self {
            modality: Modality::Acoustic,
            sensor,
            event,
        }
    }

    pub fn visual(sensor: usize, event: usize) -> Self {
        Self {
            modality: Modality::Visual,
            sensor,
            event,
        }
    }
}

/// Acoustic and visual DoA tables over a common event axis, plus the known
/// camera poses.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub acoustic: DoaTable,
    pub visual: DoaTable,
    pub visual_poses: Vec<SensorPose>,
    pub room: Option<Room>,
}

impl ObservationSet {
    pub fn new(
        acoustic: DoaTable,
        visual: DoaTable,
        visual_poses: Vec<SensorPose>,
        room: Option<Room>,
    ) -> Result<Self> {
        if acoustic.events() != visual.events() {
            return Err(Error::LengthMismatch {
                expected: acoustic.events(),
                actual: visual.events(),
            });
        }
        if visual.sensors() != visual_poses.len() {
            return Err(Error::LengthMismatch {
                expected: visual.sensors(),
                actual: visual_poses.len(),
            });
        }
        Ok(Self {
            acoustic,
            visual,
            visual_poses,
            room,
        })
    }

    pub fn num_acoustic(&self) -> usize {
        self.acoustic.sensors()
    }

    pub fn num_visual(&self) -> usize {
        self.visual.sensors()
    }

    pub fn num_events(&self) -> usize {
        self.acoustic.events()
    }

    pub fn reading(&self, key: ObsKey) -> Reading {
        match key.modality {
            Modality::Acoustic => self.acoustic.get(key.sensor, key.event),
            Modality::Visual => self.visual.get(key.sensor, key.event),
        }
    }

    /// All cells that carry an angle and take part in `mode`.
    pub fn observations(&self, mode: Mode) -> Vec<DoaObservation> {
        let mut out = Vec::new();
        let mut push = |table: &DoaTable, modality: Modality| {
            for s in 0..table.sensors() {
                for t in 0..table.events() {
                    let reading = table.get(s, t);
                    if reading.angle().is_some() {
                        out.push(DoaObservation {
                            sensor_index: s,
                            time_index: t,
                            modality,
                            reading,
                        });
                    }
                }
            }
        };
        push(&self.acoustic, Modality::Acoustic);
        if mode == Mode::Joint {
            push(&self.visual, Modality::Visual);
        }
        out
    }

    pub fn keys(&self, mode: Mode) -> BTreeSet<ObsKey> {
        self.observations(mode)
            .into_iter()
            .map(|o| ObsKey {
                modality: o.modality,
                sensor: o.sensor_index,
                event: o.time_index,
            })
            .collect()
    }

    pub fn count_observed(&self, mode: Mode) -> usize {
        match mode {
            Mode::Relative => self.acoustic.count_observed(),
            Mode::Joint => self.acoustic.count_observed() + self.visual.count_observed(),
        }
    }

    /// Number of angle-carrying cells in event column `t`: `(acoustic, visual)`.
    pub fn column_counts(&self, t: usize) -> (usize, usize) {
        let a = (0..self.num_acoustic())
            .filter(|&s| self.acoustic.get(s, t).angle().is_some())
            .count();
        let v = (0..self.num_visual())
            .filter(|&s| self.visual.get(s, t).angle().is_some())
            .count();
        (a, v)
    }

    /// Event columns with at least one acoustic and two usable observations.
    pub fn usable_events(&self, mode: Mode) -> Vec<usize> {
        (0..self.num_events())
            .filter(|&t| {
                let (a, v) = self.column_counts(t);
                let total = match mode {
                    Mode::Relative => a,
                    Mode::Joint => a + v,
                };
                a >= 1 && total >= 2
            })
            .collect()
    }

    /// A new set containing only the given event columns, in order.
    pub fn select_events(&self, columns: &[usize]) -> ObservationSet {
        ObservationSet {
            acoustic: self.acoustic.select_events(columns),
            visual: self.visual.select_events(columns),
            visual_poses: self.visual_poses.clone(),
            room: self.room,
        }
    }

    /// Masks every cell not in `keep`.
    pub fn restricted_to(&self, keep: &BTreeSet<ObsKey>) -> ObservationSet {
        let mut out = self.clone();
        for s in 0..out.num_acoustic() {
            for t in 0..out.num_events() {
                if !keep.contains(&ObsKey::acoustic(s, t)) {
                    out.acoustic.set(s, t, Reading::NoDetection);
                }
            }
        }
        for s in 0..out.num_visual() {
            for t in 0..out.num_events() {
                if !keep.contains(&ObsKey::visual(s, t)) {
                    out.visual.set(s, t, Reading::NoDetection);
                }
            }
        }
        out
    }

    /// Center of the room if known, else the centroid of the cameras.
    pub fn reference_center(&self) -> Position2D {
        if let Some(room) = self.room {
            return room.center();
        }
        let cams: Vec<Position2D> = self.visual_poses.iter().map(|p| p.position).collect();
        Position2D::mean(&cams).unwrap_or(Position2D::ORIGIN)
    }

    /// Axis-aligned region used for random initialization: the room, or the
    /// camera bounding box grown by one meter.
    pub fn search_region(&self) -> (Position2D, Position2D) {
        if let Some(room) = self.room {
            return (Position2D::ORIGIN, Position2D::new(room.width, room.depth));
        }
        if self.visual_poses.is_empty() {
            return (Position2D::new(-1.0, -1.0), Position2D::new(1.0, 1.0));
        }
        let mut lo = Position2D::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Position2D::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.visual_poses {
            lo.x = lo.x.min(p.position.x);
            lo.y = lo.y.min(p.position.y);
            hi.x = hi.x.max(p.position.x);
            hi.y = hi.y.max(p.position.y);
        }
        (lo - Position2D::new(1.0, 1.0), hi + Position2D::new(1.0, 1.0))
    }
}
