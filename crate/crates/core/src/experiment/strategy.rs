//! The two calibration pipelines.

use crate::calib::{GeometryEstimate, GeometryVariables, Mode, SolverConfig};
use crate::error::{Error, Result};
use crate::geom::{Modality, Position2D};
use crate::observations::{ObsKey, ObservationSet};
use crate::ransac::{calibrate_ransac, gate_rays, RansacConfig, RansacOutcome, Ray};
use crate::rbt::{apply_rbt, estimate_rbt, estimate_rbt_ransac, refit_with_scale, PairedTrajectory, RbtParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Relative acoustic calibration mapped into the camera frame.
    Rbt,
    /// Joint calibration with the cameras as anchors.
    Joint,
    /// As `Rbt`, with the true scale imposed on the mapping.
    RbtOracleScale,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rbt => "rbt",
            Strategy::Joint => "joint",
            Strategy::RbtOracleScale => "rbt-oracle",
        }
    }

    /// Parses one name; `both` expands to `rbt` and `joint`, `all` to every
    /// strategy.
    pub fn parse_list(text: &str) -> Result<Vec<Strategy>> {
        let mut out = Vec::new();
        for word in text.split(',').map(str::trim).filter(|w| !w.is_empty()) {
            let add: &[Strategy] = match word {
                "rbt" => &[Strategy::Rbt],
                "joint" => &[Strategy::Joint],
                "rbt-oracle" | "oracle" => &[Strategy::RbtOracleScale],
                "both" => &[Strategy::Rbt, Strategy::Joint],
                "all" => &[Strategy::Rbt, Strategy::Joint, Strategy::RbtOracleScale],
                other => return Err(Error::InvalidConfig(format!("unknown strategy '{other}'"))),
            };
            for s in add {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("no strategy given".into()));
        }
        Ok(out)
    }
}

/// Solver and robust-fit settings shared by both pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySettings {
    pub solver: SolverConfig,
    /// Thresholds in meters.
    pub ransac: RansacConfig,
    /// Typical distance between an acoustic sensor and an event; the relative
    /// stage rescales its meter gates by each hypothesis' range over this.
    pub nominal_range_m: f64,
    /// Exclusion cost of the relative stage, replacing the one in `ransac`.
    pub relative_exclusion_cost: f64,
    /// Threshold for pairing relative and visual events in the mapping fit.
    pub mapping_threshold_m: f64,
}

impl Default for StrategySettings {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            ransac: RansacConfig {
                inlier_threshold: 0.13,
                ..RansacConfig::default()
            },
            nominal_range_m: 3.0,
            relative_exclusion_cost: 0.002,
            mapping_threshold_m: 0.2,
        }
    }
}

/// Joint calibration wrapped in RANSAC.
pub fn run_strategy_joint(obs: &ObservationSet, settings: &StrategySettings) -> Result<RansacOutcome> {
    calibrate_ransac(obs, Mode::Joint, &settings.ransac, &settings.solver)
}

/// Output of the mapping pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct RbtOutcome {
    /// Relative calibration, in the unit-baseline frame.
    pub relative: RansacOutcome,
    pub params: RbtParams,
    pub mapped: GeometryEstimate,
    /// Same mapping with the true scale imposed, when requested.
    pub oracle: Option<(RbtParams, GeometryEstimate)>,
}

/// Scale of the least-squares similarity from the relative sensor positions
/// to the true ones: the best scale the mapping could pick.
pub fn oracle_scale(relative: &[Position2D], truth: &[Position2D]) -> Result<f64> {
    let pairs = PairedTrajectory::new(relative.to_vec(), truth.to_vec())?;
    Ok(estimate_rbt(&pairs)?.scale)
}

fn localize_with(rays: &[Ray], threshold: f64, crossing: f64) -> Option<Position2D> {
    gate_rays(rays, threshold, crossing).map(|(p, _)| p)
}

fn map_geometry(rel: &GeometryEstimate, params: &RbtParams) -> GeometryEstimate {
    let v = &rel.variables;
    GeometryEstimate {
        variables: GeometryVariables {
            positions: v.positions.iter().map(|p| apply_rbt(params, *p)).collect(),
            orientations: v.orientations.iter().map(|&o| o + params.rotation).collect(),
            events: v.events.iter().map(|p| apply_rbt(params, *p)).collect(),
        },
        ..rel.clone()
    }
}

/// Relative calibration, event pairing and similarity fit.
///
/// Acoustic event estimates use the consensus rays under the relative
/// geometry, visual ones the gated camera rays; stops where both exist are
/// paired. With `truth` given, the oracle variant imposes the
/// [`oracle_scale`] against those sensor positions.
pub fn run_strategy_rbt(
    obs: &ObservationSet,
    settings: &StrategySettings,
    truth: Option<&[Position2D]>,
) -> Result<RbtOutcome> {
    let rel_cfg = RansacConfig {
        range_reference: Some(settings.nominal_range_m),
        exclusion_cost: settings.relative_exclusion_cost,
        ..settings.ransac.clone()
    };
    let relative = calibrate_ransac(obs, Mode::Relative, &rel_cfg, &settings.solver)?;
    let vars = &relative.estimate.variables;
    let members = &relative.consensus.members;

    let (mut source, mut target) = (Vec::new(), Vec::new());
    for t in 0..obs.num_events() {
        let acoustic: Vec<Ray> = (0..obs.num_acoustic())
            .filter(|&i| members.contains(&ObsKey::acoustic(i, t)))
            .filter_map(|i| obs.acoustic.get(i, t).angle().map(|a| (vars.pose(i), a, Modality::Acoustic)))
            .collect();
        let visual: Vec<Ray> = obs
            .visual_poses
            .iter()
            .enumerate()
            .filter_map(|(k, c)| obs.visual.get(k, t).angle().map(|a| (*c, a, Modality::Visual)))
            .collect();
        let crossing = settings.ransac.crossing_threshold;
        if let (Some(s), Some(v)) = (
            localize_with(&acoustic, f64::INFINITY, crossing),
            localize_with(&visual, settings.mapping_threshold_m, crossing),
        ) {
            source.push(s);
            target.push(v);
        }
    }
    let pairs = PairedTrajectory::new(source, target)?;
    let fit_cfg = RansacConfig {
        inlier_threshold: settings.mapping_threshold_m,
        ..settings.ransac.clone()
    };
    let fit = estimate_rbt_ransac(&pairs, &fit_cfg)?;
    let mapped = map_geometry(&relative.estimate, &fit.params);

    let oracle = match truth {
        Some(t) => Some(oracle_scale(&relative.estimate.variables.positions, t)?),
        None => None,
    };
    let oracle = oracle.map(|scale| {
        let keep: Vec<usize> = (0..pairs.len()).filter(|&j| fit.inliers[j]).collect();
        let inliers = PairedTrajectory::new(
            keep.iter().map(|&j| pairs.source()[j]).collect(),
            keep.iter().map(|&j| pairs.target()[j]).collect(),
        )
        .unwrap_or_else(|_| pairs.clone());
        let params = refit_with_scale(&fit.params, &inliers, scale);
        (params, map_geometry(&relative.estimate, &params))
    });

    Ok(RbtOutcome {
        relative,
        params: fit.params,
        mapped,
        oracle,
    })
}

/// Fraction of `labels` that ended up outside the consensus.
pub fn excluded_fraction(outcome: &RansacOutcome, labels: &std::collections::BTreeSet<ObsKey>) -> f64 {
    if labels.is_empty() {
        return 1.0;
    }
    let kept = labels
        .iter()
        .filter(|k| k.modality == Modality::Acoustic && outcome.consensus.members.contains(k))
        .count();
    1.0 - kept as f64 / labels.len() as f64
}
