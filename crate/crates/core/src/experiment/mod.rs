//! Monte-Carlo evaluation of both calibration strategies.

mod config;
mod metrics;
mod report;
mod selftest;
mod strategy;

pub use config::{parse_config, parse_number_list};
pub use metrics::{mpe, orientation_error};
pub use report::{geometry_text, metrics_csv, mpe_svg, CSV_HEADER};
pub use selftest::{run_selftest, SelftestCheck};
pub use strategy::{
    excluded_fraction, oracle_scale, run_strategy_joint, run_strategy_rbt, RbtOutcome, Strategy, StrategySettings,
};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::calib::GeometryEstimate;
use crate::error::{Error, Result};
use crate::observations::{ObsKey, ObservationSet};
use crate::sim::{
    corrupt_acoustic, corrupt_visual, generate_scenario, select_spread_events, true_doas, AcousticNoiseModel,
    Scenario, ScenarioConfig, VisualHmmModel, FULL_FOV_DEG,
};

const MIN_EXCLUSION_COST: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub acoustic: AcousticNoiseModel,
    pub visual: VisualHmmModel,
    /// Replace the detection chains by exact detections.
    pub perfect_visual: bool,
    /// Cameras see every stop.
    pub full_visibility: bool,
    /// Calibrate on this many well-spread stops instead of all of them.
    pub spread_events: Option<usize>,
    pub strategies: Vec<Strategy>,
    pub t60_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub settings: StrategySettings,
    /// Added to the base inlier threshold per degree of acoustic noise σ.
    pub threshold_per_deg_m: f64,
    /// The relative stage's exclusion cost is the squared sine of this many σ.
    pub exclusion_sigmas: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            acoustic: AcousticNoiseModel::default(),
            visual: VisualHmmModel::default(),
            perfect_visual: false,
            full_visibility: false,
            spread_events: None,
            strategies: vec![Strategy::Rbt, Strategy::Joint],
            t60_list: vec![0.0, 100.0, 200.0, 300.0, 400.0, 500.0],
            trials: 20,
            seed: 1,
            out_dir: PathBuf::from("."),
            settings: StrategySettings::default(),
            threshold_per_deg_m: 0.15,
            exclusion_sigmas: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.t60_list.is_empty() {
            return Err(Error::InvalidConfig("empty t60 list".into()));
        }
        for &t in &self.t60_list {
            self.acoustic.with_t60(t).validate()?;
        }
        self.visual.validate()?;
        if !(self.exclusion_sigmas > 0.0 && self.exclusion_sigmas.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "exclusion_sigmas must be positive, got {}",
                self.exclusion_sigmas
            )));
        }
        self.settings.ransac.validate()
    }

    /// Settings for one sweep point: inlier thresholds and the relative
    /// exclusion cost grow with the acoustic noise level.
    pub fn settings_for(&self, t60_ms: f64) -> StrategySettings {
        let sigma = self.acoustic.with_t60(t60_ms).sigma_deg();
        let extra = self.threshold_per_deg_m * sigma;
        let mut s = self.settings.clone();
        s.ransac.inlier_threshold += extra;
        s.mapping_threshold_m += extra;
        s.relative_exclusion_cost = (self.exclusion_sigmas * sigma).to_radians().sin().powi(2).max(MIN_EXCLUSION_COST);
        s
    }
}

/// splitmix64 finalizer over `(master, trial, stream)`.
pub fn derive_seed(master: u64, trial: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A simulated instance: truth, observations and injected outlier labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub scenario: Scenario,
    pub observations: ObservationSet,
    pub outliers: BTreeSet<ObsKey>,
}

/// Simulates trial `trial` at noise level `t60_ms`. The layout and all random
/// draws depend only on `(seed, trial)`, so different noise levels see the
/// same scenario and coupled noise.
pub fn prepare_trial(cfg: &ExperimentConfig, t60_ms: f64, trial: u64) -> Result<TrialData> {
    let scenario = generate_scenario(&cfg.scenario, derive_seed(cfg.seed, trial, 0))?;
    let fov = if cfg.full_visibility { FULL_FOV_DEG } else { cfg.visual.fov_half_angle_deg };
    let clean = true_doas(&scenario, fov);
    let acoustic = corrupt_acoustic(&clean, &cfg.acoustic.with_t60(t60_ms), derive_seed(cfg.seed, trial, 1))?;
    let visual_model = if cfg.perfect_visual {
        VisualHmmModel::perfect(fov)
    } else {
        VisualHmmModel {
            fov_half_angle_deg: fov,
            ..cfg.visual.clone()
        }
    };
    let observations = corrupt_visual(&acoustic.observations, &scenario, &visual_model, derive_seed(cfg.seed, trial, 2))?;
    let mut data = TrialData {
        scenario,
        observations,
        outliers: acoustic.outliers,
    };
    if let Some(n) = cfg.spread_events {
        let keep = select_spread_events(&data.scenario, &data.observations, n);
        let remap: std::collections::BTreeMap<usize, usize> = keep.iter().enumerate().map(|(j, &t)| (t, j)).collect();
        data.outliers = data
            .outliers
            .iter()
            .filter_map(|k| remap.get(&k.event).map(|&j| ObsKey { event: j, ..*k }))
            .collect();
        data.observations = data.observations.select_events(&keep);
        data.scenario = data.scenario.select_stops(&keep);
    }
    Ok(data)
}

/// Errors of one strategy on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub mpe_m: f64,
    pub orientation_error_deg: f64,
}

pub fn score(estimate: &GeometryEstimate, scenario: &Scenario) -> Result<TrialMetrics> {
    let truth_pos: Vec<_> = scenario.acoustic_poses.iter().map(|p| p.position).collect();
    let truth_ori: Vec<_> = scenario.acoustic_poses.iter().map(|p| p.orientation).collect();
    Ok(TrialMetrics {
        mpe_m: mpe(&estimate.variables.positions, &truth_pos)?,
        orientation_error_deg: orientation_error(&estimate.variables.orientations, &truth_ori)?,
    })
}

/// Runs the configured strategies on one trial. The two mapping variants
/// share one relative calibration.
pub fn run_trial(cfg: &ExperimentConfig, t60_ms: f64, trial: u64) -> Vec<(Strategy, Result<TrialMetrics>)> {
    let data = match prepare_trial(cfg, t60_ms, trial) {
        Ok(d) => d,
        Err(e) => return cfg.strategies.iter().map(|&s| (s, Err(e.clone()))).collect(),
    };
    let mut settings = cfg.settings_for(t60_ms);
    settings.ransac.seed = derive_seed(cfg.seed, trial, 3);
    let wants_rbt = cfg
        .strategies
        .iter()
        .any(|s| matches!(s, Strategy::Rbt | Strategy::RbtOracleScale));
    let truth: Vec<_> = data.scenario.acoustic_poses.iter().map(|p| p.position).collect();
    let rbt = wants_rbt.then(|| run_strategy_rbt(&data.observations, &settings, Some(&truth)));
    cfg.strategies
        .iter()
        .map(|&s| {
            let result = match s {
                Strategy::Joint => run_strategy_joint(&data.observations, &settings)
                    .and_then(|o| score(&o.estimate, &data.scenario)),
                Strategy::Rbt => match rbt.as_ref().expect("computed") {
                    Ok(o) => score(&o.mapped, &data.scenario),
                    Err(e) => Err(e.clone()),
                },
                Strategy::RbtOracleScale => match rbt.as_ref().expect("computed") {
                    Ok(o) => score(&o.oracle.as_ref().expect("oracle requested").1, &data.scenario),
                    Err(e) => Err(e.clone()),
                },
            };
            (s, result)
        })
        .collect()
}

/// Aggregated errors for one sweep point and strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub t60_ms: f64,
    pub strategy: Strategy,
    /// Mean over successful trials; NaN if every trial failed.
    pub mpe_m: f64,
    pub orientation_error_deg: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Every `(t60, strategy)` point, rows ordered by t60 then strategy order.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &t60 in &cfg.t60_list {
        let results: Vec<Vec<(Strategy, Result<TrialMetrics>)>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| run_trial(cfg, t60, trial))
            .collect();
        for (j, &strategy) in cfg.strategies.iter().enumerate() {
            let ok: Vec<TrialMetrics> = results.iter().filter_map(|r| r[j].1.as_ref().ok().copied()).collect();
            let n = ok.len() as f64;
            let mean = |f: fn(&TrialMetrics) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(f).sum::<f64>() / n
                }
            };
            rows.push(MetricsRow {
                t60_ms: t60,
                strategy,
                mpe_m: mean(|m| m.mpe_m),
                orientation_error_deg: mean(|m| m.orientation_error_deg),
                trials: cfg.trials,
                failures: cfg.trials - ok.len(),
            });
        }
    }
    Ok(rows)
}

/// Runs [`sweep`] and writes `metrics.csv` and `mpe_vs_t60.svg` into
/// `cfg.out_dir`.
pub fn sweep_to_dir(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    let rows = sweep(cfg)?;
    write_outputs(&rows, &cfg.out_dir)?;
    Ok(rows)
}

pub fn write_outputs(rows: &[MetricsRow], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv(rows))?;
    std::fs::write(dir.join("mpe_vs_t60.svg"), mpe_svg(rows))?;
    Ok(())
}
