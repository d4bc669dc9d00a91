//! Joint calibration with a fifth of the acoustic readings replaced by
//! random angles. The robust fit sets them aside; a plain least-squares fit
//! on the same data is shown for comparison.

use avcal::calib::{calibrate, Mode, SolverConfig};
use avcal::experiment::mpe;
use avcal::geom::{Angle, Modality, Reading};
use avcal::observations::ObsKey;
use avcal::ransac::{calibrate_ransac, RansacConfig};
use avcal::sim::{generate_scenario, true_doas, ScenarioConfig, FULL_FOV_DEG};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn main() -> avcal::Result<()> {
    let cfg = ScenarioConfig {
        num_stops: 40,
        ..ScenarioConfig::default()
    };
    let scenario = generate_scenario(&cfg, 11)?;
    let mut obs = true_doas(&scenario, FULL_FOV_DEG);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut outliers = BTreeSet::new();
    for i in 0..obs.num_acoustic() {
        for t in 0..obs.num_events() {
            if rng.random_bool(0.2) {
                let a = Angle::from_radians(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                obs.acoustic.set(i, t, Reading::Detection(a));
                outliers.insert(ObsKey::acoustic(i, t));
            }
        }
    }
    let truth: Vec<_> = scenario.acoustic_poses.iter().map(|p| p.position).collect();

    let plain = calibrate(&obs, Mode::Joint, &SolverConfig::default(), &mut rng)?;
    println!("plain fit:  mean position error {:.3} m", mpe(&plain.variables.positions, &truth)?);

    let out = calibrate_ransac(&obs, Mode::Joint, &RansacConfig::default(), &SolverConfig::default())?;
    let kept = outliers.iter().filter(|k| out.consensus.members.contains(k)).count();
    println!(
        "robust fit: mean position error {:.2e} m, consensus {} of {} readings",
        mpe(&out.estimate.variables.positions, &truth)?,
        out.consensus.len(),
        obs.count_observed(Mode::Joint)
    );
    println!(
        "injected outliers {}, kept {kept}, acoustic members {}",
        outliers.len(),
        out.consensus.members.iter().filter(|k| k.modality == Modality::Acoustic).count()
    );
    for h in &out.history {
        println!("  iteration {:3}: consensus {} error {:.4}", h.iteration, h.size, h.error);
    }
    Ok(())
}
