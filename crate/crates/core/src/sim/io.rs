//! Line-oriented text formats. Blank lines and lines starting with `#` are
//! ignored; angles are in degrees.
//!
//! Observations:
//! ```text
//! room <width> <depth>
//! counts <I> <K> <T>
//! camera <k> <x> <y> <orientation>
//! obs <sensor> <A|V> <t> <detection|missed|false|none> <angle|->
//! ```
//! Cells that are not listed are `none`. `room` is optional.
//!
//! Scenario:
//! ```text
//! room <width> <depth>
//! seed <u64>
//! acoustic <i> <x> <y> <orientation>
//! camera <k> <x> <y> <orientation>
//! event <t> <x> <y>
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::Scenario;
use crate::error::{Error, Result};
use crate::geom::{Angle, DetectionStatus, Modality, Position2D, Reading, SensorPose};
use crate::observations::{DoaTable, ObservationSet, Room};

/// Fixed precision keeps rewritten files byte-stable.
fn fmt(v: f64) -> String {
    let s = format!("{v:.10}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn status_word(s: DetectionStatus) -> &'static str {
    match s {
        DetectionStatus::Detection => "detection",
        DetectionStatus::MissedDetection => "missed",
        DetectionStatus::FalseDetection => "false",
        DetectionStatus::NoDetection => "none",
    }
}

fn parse_status(word: &str, line: usize) -> Result<DetectionStatus> {
    Ok(match word {
        "detection" => DetectionStatus::Detection,
        "missed" => DetectionStatus::MissedDetection,
        "false" => DetectionStatus::FalseDetection,
        "none" => DetectionStatus::NoDetection,
        other => return Err(parse_err(line, format!("unknown status '{other}'"))),
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Fields<'a> {
    line: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next_str(&mut self, what: &str) -> Result<&'a str> {
        self.tokens
            .next()
            .ok_or_else(|| parse_err(self.line, format!("missing {what}")))
    }

    fn next<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next_str(what)?;
        tok.parse()
            .map_err(|_| parse_err(self.line, format!("invalid {what} '{tok}'")))
    }

    fn finish(mut self) -> Result<()> {
        match self.tokens.next() {
            Some(extra) => Err(parse_err(self.line, format!("unexpected token '{extra}'"))),
            None => Ok(()),
        }
    }
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str, Fields<'_>)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            return None;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next()?;
        Some((n + 1, keyword, Fields { line: n + 1, tokens }))
    })
}

pub fn write_observations(obs: &ObservationSet) -> String {
    let mut out = String::from("# avcal observations\n");
    if let Some(room) = obs.room {
        writeln!(out, "room {} {}", fmt(room.width), fmt(room.depth)).unwrap();
    }
    writeln!(out, "counts {} {} {}", obs.num_acoustic(), obs.num_visual(), obs.num_events()).unwrap();
    for (k, cam) in obs.visual_poses.iter().enumerate() {
        writeln!(
            out,
            "camera {k} {} {} {}",
            fmt(cam.position.x),
            fmt(cam.position.y),
            fmt(cam.orientation.degrees())
        )
        .unwrap();
    }
    let mut table = |tag: &str, t: &DoaTable| {
        for s in 0..t.sensors() {
            for e in 0..t.events() {
                let r = t.get(s, e);
                if r == Reading::NoDetection {
                    continue;
                }
                let angle = r.angle().map_or("-".to_string(), |a| fmt(a.degrees()));
                writeln!(out, "obs {s} {tag} {e} {} {angle}", status_word(r.status())).unwrap();
            }
        }
    };
    table("A", &obs.acoustic);
    table("V", &obs.visual);
    out
}

pub fn parse_observations(text: &str) -> Result<ObservationSet> {
    let mut room = None;
    let mut counts: Option<(usize, usize, usize)> = None;
    let mut cameras: Vec<Option<SensorPose>> = Vec::new();
    let mut acoustic = DoaTable::new(0, 0, Reading::NoDetection);
    let mut visual = DoaTable::new(0, 0, Reading::NoDetection);
    for (line, keyword, mut f) in records(text) {
        match keyword {
            "room" => {
                room = Some(Room::new(f.next("width")?, f.next("depth")?));
            }
            "counts" => {
                let c = (f.next("I")?, f.next("K")?, f.next("T")?);
                acoustic = DoaTable::new(c.0, c.2, Reading::NoDetection);
                visual = DoaTable::new(c.1, c.2, Reading::NoDetection);
                cameras = vec![None; c.1];
                counts = Some(c);
            }
            "camera" => {
                let (_, nk, _) = counts.ok_or_else(|| parse_err(line, "camera before counts"))?;
                let k: usize = f.next("camera index")?;
                if k >= nk {
                    return Err(parse_err(line, format!("camera index {k} out of range")));
                }
                let p = Position2D::new(f.next("x")?, f.next("y")?);
                cameras[k] = Some(SensorPose::visual(p, Angle::from_degrees(f.next("orientation")?)));
            }
            "obs" => {
                let (ni, nk, nt) = counts.ok_or_else(|| parse_err(line, "obs before counts"))?;
                let s: usize = f.next("sensor")?;
                let modality = match f.next_str("modality")? {
                    "A" => Modality::Acoustic,
                    "V" => Modality::Visual,
                    other => return Err(parse_err(line, format!("unknown modality '{other}'"))),
                };
                let t: usize = f.next("time index")?;
                let status = parse_status(f.next_str("status")?, line)?;
                let angle_tok = f.next_str("angle")?;
                let angle = if angle_tok == "-" {
                    None
                } else {
                    let deg: f64 = angle_tok
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid angle '{angle_tok}'")))?;
                    if !deg.is_finite() {
                        return Err(parse_err(line, "angle must be finite"));
                    }
                    Some(Angle::from_degrees(deg))
                };
                let reading = Reading::from_parts(status, angle)
                    .ok_or_else(|| parse_err(line, "angle presence does not match status"))?;
                let (limit, table) = match modality {
                    Modality::Acoustic => (ni, &mut acoustic),
                    Modality::Visual => (nk, &mut visual),
                };
                if s >= limit || t >= nt {
                    return Err(parse_err(line, "observation index out of range"));
                }
                table.set(s, t, reading);
            }
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
        f.finish()?;
    }
    if counts.is_none() {
        return Err(parse_err(0, "missing counts record"));
    }
    let poses = cameras
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| parse_err(0, format!("camera {k} has no pose"))))
        .collect::<Result<Vec<_>>>()?;
    ObservationSet::new(acoustic, visual, poses, room)
}

pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::from("# avcal scenario\n");
    writeln!(out, "room {} {}", fmt(s.room.width), fmt(s.room.depth)).unwrap();
    writeln!(out, "seed {}", s.seed).unwrap();
    for (i, p) in s.acoustic_poses.iter().enumerate() {
        writeln!(out, "acoustic {i} {} {} {}", fmt(p.position.x), fmt(p.position.y), fmt(p.orientation.degrees())).unwrap();
    }
    for (k, p) in s.visual_poses.iter().enumerate() {
        writeln!(out, "camera {k} {} {} {}", fmt(p.position.x), fmt(p.position.y), fmt(p.orientation.degrees())).unwrap();
    }
    for (t, e) in s.trajectory.iter().enumerate() {
        writeln!(out, "event {t} {} {}", fmt(e.x), fmt(e.y)).unwrap();
    }
    out
}

fn place<T: Clone>(v: &mut Vec<Option<T>>, idx: usize, item: T) {
    if v.len() <= idx {
        v.resize(idx + 1, None);
    }
    v[idx] = Some(item);
}

fn dense<T>(v: Vec<Option<T>>, what: &str) -> Result<Vec<T>> {
    v.into_iter()
        .enumerate()
        .map(|(j, x)| x.ok_or_else(|| parse_err(0, format!("{what} {j} missing"))))
        .collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut room = None;
    let mut seed = 0;
    let mut acoustic = Vec::new();
    let mut cameras = Vec::new();
    let mut events = Vec::new();
    for (line, keyword, mut f) in records(text) {
        match keyword {
            "room" => room = Some(Room::new(f.next("width")?, f.next("depth")?)),
            "seed" => seed = f.next("seed")?,
            "acoustic" | "camera" => {
                let idx: usize = f.next("index")?;
                let p = Position2D::new(f.next("x")?, f.next("y")?);
                let o = Angle::from_degrees(f.next("orientation")?);
                if keyword == "acoustic" {
                    place(&mut acoustic, idx, SensorPose::acoustic(p, o));
                } else {
                    place(&mut cameras, idx, SensorPose::visual(p, o));
                }
            }
            "event" => {
                let idx: usize = f.next("index")?;
                place(&mut events, idx, Position2D::new(f.next("x")?, f.next("y")?));
            }
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
        f.finish()?;
    }
    Ok(Scenario {
        room: room.ok_or_else(|| parse_err(0, "missing room record"))?,
        acoustic_poses: dense(acoustic, "acoustic sensor")?,
        visual_poses: dense(cameras, "camera")?,
        trajectory: dense(events, "event")?,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{corrupt_visual, generate_scenario, true_doas, ScenarioConfig, VisualHmmModel};

    #[test]
    fn observations_round_trip() {
        let s = generate_scenario(&ScenarioConfig::default(), 1).unwrap();
        let obs = corrupt_visual(&true_doas(&s, 30.0), &s, &VisualHmmModel::default(), 2).unwrap();
        let text = write_observations(&obs);
        let back = parse_observations(&text).unwrap();
        assert_eq!(back.num_acoustic(), 4);
        assert_eq!(back.visual_poses.len(), 4);
        for i in 0..4 {
            for t in 0..140 {
                let (a, b) = (obs.acoustic.get(i, t), back.acoustic.get(i, t));
                assert_eq!(a.status(), b.status());
                assert!((a.angle().unwrap() - b.angle().unwrap()).radians().abs() < 1e-10);
                let (a, b) = (obs.visual.get(i, t), back.visual.get(i, t));
                assert_eq!(a.status(), b.status());
                if let (Some(x), Some(y)) = (a.angle(), b.angle()) {
                    assert!((x - y).radians().abs() < 1e-10);
                }
            }
        }
        assert_eq!(write_observations(&back), text);
    }

    #[test]
    fn scenario_round_trip() {
        let s = generate_scenario(&ScenarioConfig::default(), 5).unwrap();
        let text = write_scenario(&s);
        let back = parse_scenario(&text).unwrap();
        for (a, b) in back.trajectory.iter().zip(&s.trajectory) {
            assert!(a.distance(*b) < 1e-9);
        }
        assert_eq!(back.seed, 5);
        assert_eq!(write_scenario(&back), text);
    }

    #[test]
    fn malformed_input_reports_line() {
        let bad = "counts 1 0 2\nobs 0 A 5 detection 10\n";
        assert!(matches!(parse_observations(bad), Err(Error::Parse { line: 2, .. })));
        let bad = "counts 1 0 2\nobs 0 A 1 missed 10\n";
        assert!(matches!(parse_observations(bad), Err(Error::Parse { line: 2, .. })));
        let bad = "counts 1 0 2\n\n# c\nfoo\n";
        assert!(matches!(parse_observations(bad), Err(Error::Parse { line: 4, .. })));
        assert!(parse_observations("room 1 2\n").is_err());
    }
}
