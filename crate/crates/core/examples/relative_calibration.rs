//! Calibrates the acoustic sensors among themselves, without the cameras,
//! and maps the result into the room frame with a similarity transform
//! fitted to camera-localized events.

use avcal::calib::{calibrate, Mode, SolverConfig};
use avcal::geom::{localize_event, Angle};
use avcal::rbt::{apply_rbt, estimate_rbt, PairedTrajectory};
use avcal::sim::{generate_scenario, true_doas, ScenarioConfig, FULL_FOV_DEG};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> avcal::Result<()> {
    let cfg = ScenarioConfig {
        num_stops: 20,
        ..ScenarioConfig::default()
    };
    let scenario = generate_scenario(&cfg, 7)?;
    let obs = true_doas(&scenario, FULL_FOV_DEG);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rel = calibrate(&obs, Mode::Relative, &SolverConfig::default(), &mut rng)?;
    let v = &rel.variables;
    println!("relative frame: sensor 0 at the origin facing +x, sensor 1 at unit distance");
    for (i, (p, o)) in v.positions.iter().zip(&v.orientations).enumerate() {
        println!("  sensor {i}: ({:8.4}, {:8.4}) {:9.3} deg", p.x, p.y, o.degrees());
    }

    let cameras = &scenario.visual_poses;
    let (mut source, mut target) = (Vec::new(), Vec::new());
    for t in 0..obs.num_events() {
        let bearings: Vec<Angle> = (0..cameras.len())
            .filter_map(|k| obs.visual.get(k, t).angle().map(|a| cameras[k].bearing(a)))
            .collect();
        if let Ok((p, _)) = localize_event(cameras, &bearings) {
            source.push(v.events[t]);
            target.push(p);
        }
    }
    let params = estimate_rbt(&PairedTrajectory::new(source, target)?)?;
    println!(
        "mapping: scale {:.4}, rotation {:.3} deg, translation ({:.3}, {:.3})",
        params.scale,
        params.rotation.degrees(),
        params.translation.x,
        params.translation.y
    );
    for (i, truth) in scenario.acoustic_poses.iter().enumerate() {
        let p = apply_rbt(&params, v.positions[i]);
        let o = v.orientations[i] + params.rotation;
        println!(
            "  sensor {i}: ({:.4}, {:.4}) {:9.3} deg, error {:.1e} m",
            p.x,
            p.y,
            o.degrees(),
            p.distance(truth.position)
        );
    }
    Ok(())
}
