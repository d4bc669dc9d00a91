//! Recovers the scale, rotation and translation between two frames from a
//! paired trajectory, first on clean pairs and then with a robust fit after
//! a fifth of the target points have been replaced by clutter.

use avcal::geom::{Angle, Position2D};
use avcal::ransac::RansacConfig;
use avcal::rbt::{apply_rbt, estimate_rbt, estimate_rbt_ransac, PairedTrajectory, RbtParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn report(label: &str, p: &RbtParams) {
    println!(
        "{label:>8}: scale {:.4}, rotation {:8.3} deg, translation ({:.3}, {:.3})",
        p.scale,
        p.rotation.degrees(),
        p.translation.x,
        p.translation.y
    );
}

fn main() -> avcal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truth = RbtParams::new(3.1, Angle::from_degrees(37.0), Position2D::new(2.5, 1.2));
    let noise = Normal::new(0.0, 0.02).expect("valid sigma");

    let source: Vec<Position2D> = (0..80)
        .map(|_| Position2D::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)))
        .collect();
    let mut target: Vec<Position2D> = source
        .iter()
        .map(|p| apply_rbt(&truth, *p) + Position2D::new(noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect();
    report("truth", &truth);
    report("clean", &estimate_rbt(&PairedTrajectory::new(source.clone(), target.clone())?)?);

    for p in target.iter_mut().step_by(5) {
        *p = Position2D::new(rng.random_range(0.0..6.2), rng.random_range(0.0..7.2));
    }
    let pairs = PairedTrajectory::new(source, target)?;
    report("naive", &estimate_rbt(&pairs)?);
    let fit = estimate_rbt_ransac(
        &pairs,
        &RansacConfig {
            inlier_threshold: 0.1,
            ..RansacConfig::default()
        },
    )?;
    report("robust", &fit.params);
    println!("inliers {}/{}", fit.inlier_count(), pairs.len());
    Ok(())
}
