//! Quick invariant checks runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_strategy_joint, score, ExperimentConfig, prepare_trial, run_trial};
use crate::calib::{minimal_event_count, objective, objective_gradient, GeometryVariables, Mode};
use crate::geom::{Angle, Position2D, Reading};
use crate::rbt::{apply_rbt, estimate_rbt, PairedTrajectory, RbtParams};
use crate::sim::{AcousticNoiseModel, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> SelftestCheck {
    SelftestCheck { name, passed, detail }
}

fn noise_free_config() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            num_stops: 15,
            ..ScenarioConfig::default()
        },
        acoustic: AcousticNoiseModel::exact(),
        perfect_visual: true,
        full_visibility: true,
        ..ExperimentConfig::default()
    }
}

fn exact_recovery() -> SelftestCheck {
    let cfg = noise_free_config();
    let result = prepare_trial(&cfg, 0.0, 0).and_then(|d| {
        let out = run_strategy_joint(&d.observations, &cfg.settings_for(0.0))?;
        score(&out.estimate, &d.scenario)
    });
    match result {
        Ok(m) => check(
            "noise-free joint recovery",
            m.mpe_m <= 1e-6 && m.orientation_error_deg <= 1e-6,
            format!("mpe {:.2e} m, orientation {:.2e} deg", m.mpe_m, m.orientation_error_deg),
        ),
        Err(e) => check("noise-free joint recovery", false, e.to_string()),
    }
}

fn similarity_round_trip() -> SelftestCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth = RbtParams::new(1.7, Angle::from_degrees(-63.0), Position2D::new(2.0, -1.0));
    let src: Vec<Position2D> = (0..30)
        .map(|_| Position2D::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
        .collect();
    let dst = src.iter().map(|p| apply_rbt(&truth, *p)).collect();
    match PairedTrajectory::new(src, dst).and_then(|pt| estimate_rbt(&pt)) {
        Ok(p) => {
            let err = (p.scale - truth.scale)
                .abs()
                .max((p.rotation - truth.rotation).radians().abs())
                .max(p.translation.distance(truth.translation));
            check("similarity transform round trip", err < 1e-9, format!("max error {err:.2e}"))
        }
        Err(e) => check("similarity transform round trip", false, e.to_string()),
    }
}

fn gradient_check() -> SelftestCheck {
    let cfg = ExperimentConfig {
        scenario: ScenarioConfig {
            num_stops: 6,
            ..ScenarioConfig::default()
        },
        full_visibility: true,
        ..ExperimentConfig::default()
    };
    let data = match prepare_trial(&cfg, 200.0, 1) {
        Ok(d) => d,
        Err(e) => return check("gradient vs finite differences", false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vars = GeometryVariables {
        positions: data.scenario.acoustic_poses.iter().map(|p| p.position).collect(),
        orientations: data
            .scenario
            .acoustic_poses
            .iter()
            .map(|p| p.orientation + Angle::from_radians(rng.random_range(-0.3..0.3)))
            .collect(),
        events: data
            .scenario
            .trajectory
            .iter()
            .map(|e| *e + Position2D::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)))
            .collect(),
    };
    let obs = &data.observations;
    let Ok(g) = objective_gradient(&vars, obs, Mode::Joint) else {
        return check("gradient vs finite differences", false, "gradient failed".into());
    };
    let x = vars.to_vector();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let eval = |d: f64| {
            let mut y = x.clone();
            y[j] += d;
            let v = GeometryVariables::from_vector(&y, vars.num_sensors(), vars.num_events()).expect("shape");
            objective(&v, obs, Mode::Joint).expect("valid geometry")
        };
        let fd = (eval(h) - eval(-h)) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
    }
    check("gradient vs finite differences", worst < 1e-5, format!("max relative error {worst:.2e}"))
}

fn minimal_counts() -> SelftestCheck {
    let got = [
        minimal_event_count(4, 4).ok(),
        minimal_event_count(1, 2).ok(),
        minimal_event_count(4, 0).ok(),
    ];
    check(
        "minimal event counts",
        got == [Some(3), Some(4), Some(7)] && minimal_event_count(1, 1).is_err(),
        format!("{got:?}"),
    )
}

fn front_back_symmetry() -> SelftestCheck {
    let cfg = noise_free_config();
    let Ok(data) = prepare_trial(&cfg, 0.0, 2) else {
        return check("front-back symmetry", false, "simulation failed".into());
    };
    let s = &data.scenario;
    let vars = GeometryVariables {
        positions: s.acoustic_poses.iter().map(|p| p.position).collect(),
        orientations: s.acoustic_poses.iter().map(|p| p.orientation).collect(),
        events: s.trajectory.clone(),
    };
    let mut flipped = data.observations.clone();
    for t in 0..flipped.num_events() {
        if let Reading::Detection(a) = flipped.acoustic.get(0, t) {
            flipped.acoustic.set(0, t, Reading::Detection(a.flipped()));
        }
    }
    match (
        objective(&vars, &data.observations, Mode::Joint),
        objective(&vars, &flipped, Mode::Joint),
    ) {
        (Ok(a), Ok(b)) => check("front-back symmetry", (a - b).abs() < 1e-9, format!("{a:.12} vs {b:.12}")),
        _ => check("front-back symmetry", false, "objective failed".into()),
    }
}

fn determinism() -> SelftestCheck {
    let cfg = ExperimentConfig {
        scenario: ScenarioConfig {
            num_stops: 40,
            ..ScenarioConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let a = format!("{:?}", run_trial(&cfg, 300.0, 4));
    let b = format!("{:?}", run_trial(&cfg, 300.0, 4));
    check("determinism per seed", a == b, String::new())
}

/// Runs every check; the caller decides how to report failures.
pub fn run_selftest() -> Vec<SelftestCheck> {
    vec![
        minimal_counts(),
        similarity_round_trip(),
        gradient_check(),
        front_back_symmetry(),
        exact_recovery(),
        determinism(),
    ]
}
