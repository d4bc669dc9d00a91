//! Flat `key = value` experiment files. `#` starts a comment; unknown keys
//! are errors. Recognized keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `seed`, `trials` | master seed, trials per sweep point |
//! | `t60_list` | comma-separated reverberation proxies in ms |
//! | `strategies` | comma list of `rbt`, `joint`, `rbt-oracle`, `both`, `all` |
//! | `out_dir` | output directory |
//! | `room_width`, `room_depth` | meters |
//! | `num_acoustic`, `num_visual`, `num_stops` | counts |
//! | `wall_margin`, `min_sensor_separation`, `max_step` | meters |
//! | `spread_events` | calibrate on this many well-spread stops (0 = all) |
//! | `full_visibility`, `perfect_visual` | `true`/`false` |
//! | `fov_half_angle_deg`, `detection_sigma_deg`, `frames_per_stop` | camera model |
//! | `base_sigma_deg`, `sigma_slope_deg_per_ms`, `outlier_prob_slope_per_ms` | acoustic model |
//! | `ransac_iterations`, `min_consensus_fraction`, `refit_feedback` | robust fit |
//! | `inlier_threshold_m`, `threshold_per_deg_m`, `mapping_threshold_m`, `nominal_range_m` | gates |
//! | `exclusion_sigmas` | relative exclusion cost as a multiple of σ |
//! | `restarts`, `max_iter` | solver |

use std::path::PathBuf;
use std::str::FromStr;

use super::{ExperimentConfig, Strategy};
use crate::error::{Error, Result};

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value '{raw}' for {key}"),
    })
}

/// Comma-separated list of numbers.
pub fn parse_number_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::InvalidConfig(format!("invalid number '{s}'"))))
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: "expected key = value".into(),
        })?;
        let (key, val) = (key.trim(), val.trim());
        let sc = &mut cfg.scenario;
        match key {
            "seed" => cfg.seed = value(line, key, val)?,
            "trials" => cfg.trials = value(line, key, val)?,
            "t60_list" => cfg.t60_list = parse_number_list(val)?,
            "strategies" | "strategy" => cfg.strategies = Strategy::parse_list(val)?,
            "out_dir" => cfg.out_dir = PathBuf::from(val),
            "room_width" => sc.room.width = value(line, key, val)?,
            "room_depth" => sc.room.depth = value(line, key, val)?,
            "num_acoustic" => sc.num_acoustic = value(line, key, val)?,
            "num_visual" => sc.num_visual = value(line, key, val)?,
            "num_stops" => sc.num_stops = value(line, key, val)?,
            "wall_margin" => sc.wall_margin = value(line, key, val)?,
            "min_sensor_separation" => sc.min_sensor_separation = value(line, key, val)?,
            "max_step" => sc.max_step = value(line, key, val)?,
            "spread_events" => {
                let n: usize = value(line, key, val)?;
                cfg.spread_events = (n > 0).then_some(n);
            }
            "full_visibility" => cfg.full_visibility = value(line, key, val)?,
            "perfect_visual" => cfg.perfect_visual = value(line, key, val)?,
            "fov_half_angle_deg" => cfg.visual.fov_half_angle_deg = value(line, key, val)?,
            "detection_sigma_deg" => cfg.visual.detection_sigma_deg = value(line, key, val)?,
            "frames_per_stop" => cfg.visual.frames_per_stop = value(line, key, val)?,
            "base_sigma_deg" => cfg.acoustic.base_sigma_deg = value(line, key, val)?,
            "sigma_slope_deg_per_ms" => cfg.acoustic.sigma_slope_deg_per_ms = value(line, key, val)?,
            "outlier_prob_slope_per_ms" => cfg.acoustic.outlier_prob_slope_per_ms = value(line, key, val)?,
            "ransac_iterations" => cfg.settings.ransac.max_iterations = value(line, key, val)?,
            "min_consensus_fraction" => cfg.settings.ransac.min_consensus_fraction = value(line, key, val)?,
            "refit_feedback" => cfg.settings.ransac.refit_feedback = value(line, key, val)?,
            "inlier_threshold_m" => cfg.settings.ransac.inlier_threshold = value(line, key, val)?,
            "threshold_per_deg_m" => cfg.threshold_per_deg_m = value(line, key, val)?,
            "mapping_threshold_m" => cfg.settings.mapping_threshold_m = value(line, key, val)?,
            "nominal_range_m" => cfg.settings.nominal_range_m = value(line, key, val)?,
            "exclusion_sigmas" => cfg.exclusion_sigmas = value(line, key, val)?,
            "restarts" => cfg.settings.solver.restarts = value(line, key, val)?,
            "max_iter" => cfg.settings.solver.max_iter = value(line, key, val)?,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = parse_config(
            "# sweep\nseed = 7\ntrials = 3 # few\nt60_list = 0, 250,500\nstrategies = both\nspread_events = 15\nfull_visibility = true\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.t60_list, vec![0.0, 250.0, 500.0]);
        assert_eq!(cfg.strategies, vec![Strategy::Rbt, Strategy::Joint]);
        assert_eq!(cfg.spread_events, Some(15));
        assert!(cfg.full_visibility);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("bogus = 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("\ntrials = x"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("trials"), Err(Error::Parse { .. })));
        assert!(parse_config("trials = 0").is_err());
        assert!(parse_config("t60_list = 0, 900").is_err());
        assert!(parse_config("strategies = fancy").is_err());
    }
}
