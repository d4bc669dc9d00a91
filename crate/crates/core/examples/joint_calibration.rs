//! Joint calibration of a simulated room without noise: the acoustic
//! sensors are recovered exactly from the camera anchors.

use avcal::calib::{calibrate, Mode, SolverConfig};
use avcal::sim::{generate_scenario, true_doas, ScenarioConfig, FULL_FOV_DEG};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> avcal::Result<()> {
    let cfg = ScenarioConfig {
        num_stops: 15,
        ..ScenarioConfig::default()
    };
    let scenario = generate_scenario(&cfg, 42)?;
    let obs = true_doas(&scenario, FULL_FOV_DEG);
    println!(
        "{} acoustic sensors, {} cameras, {} events, {} readings",
        obs.num_acoustic(),
        obs.num_visual(),
        obs.num_events(),
        obs.count_observed(Mode::Joint)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let est = calibrate(&obs, Mode::Joint, &SolverConfig::default(), &mut rng)?;
    println!(
        "objective {:.9} of {}, {} iterations, converged {}",
        est.objective_value,
        obs.count_observed(Mode::Joint),
        est.iterations,
        est.converged
    );
    for (i, truth) in scenario.acoustic_poses.iter().enumerate() {
        let p = est.variables.positions[i];
        let o = est.variables.orientations[i];
        println!(
            "sensor {i}: ({:.6}, {:.6}) {:9.4} deg   error {:.1e} m, {:.1e} deg",
            p.x,
            p.y,
            o.degrees(),
            p.distance(truth.position),
            (o - truth.orientation).degrees().abs()
        );
    }
    Ok(())
}
