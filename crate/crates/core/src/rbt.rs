//! Similarity-transform estimation between the acoustic and visual frames.
//!
//! Point sets are mapped to complex sequences `u_t = x + jy`, so the mapping
//! `e = sRẽ + d` becomes `v = αu + β`. The least-squares fit is evaluated on
//! the (unnormalized) DFTs of both sequences: the DC bin carries the
//! translation and the remaining bins carry the shape, which decouples the two
//! unknowns.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Angle, Position2D};
use crate::ransac::RansacConfig;

/// Scale, rotation and translation of `p ↦ s·R(θ)·p + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbtParams {
    pub scale: f64,
    pub rotation: Angle,
    pub translation: Position2D,
}

impl RbtParams {
    pub const IDENTITY: RbtParams = RbtParams {
        scale: 1.0,
        rotation: Angle::ZERO,
        translation: Position2D::ORIGIN,
    };

    pub fn new(scale: f64, rotation: Angle, translation: Position2D) -> Self {
        Self {
            scale,
            rotation,
            translation,
        }
    }

    /// Row-major rotation matrix `[[c, -s], [s, c]]`.
    pub fn rotation_matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.rotation.radians().sin_cos();
        [[c, -s], [s, c]]
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.scale, self.rotation.radians())
    }

    pub fn inverse(&self) -> RbtParams {
        let rotation = -self.rotation;
        let scale = 1.0 / self.scale;
        let translation = -(self.translation.rotated(rotation) * scale);
        RbtParams {
            scale,
            rotation,
            translation,
        }
    }
}

/// Index-aligned event positions in the acoustic (`source`) and visual
/// (`target`) frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedTrajectory {
    source: Vec<Position2D>,
    target: Vec<Position2D>,
}

impl PairedTrajectory {
    pub fn new(source: Vec<Position2D>, target: Vec<Position2D>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::LengthMismatch {
                expected: source.len(),
                actual: target.len(),
            });
        }
        if source.len() < 2 {
            return Err(Error::Underdetermined(format!(
                "{} point pair(s), need at least 2",
                source.len()
            )));
        }
        Ok(Self { source, target })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &[Position2D] {
        &self.source
    }

    pub fn target(&self) -> &[Position2D] {
        &self.target
    }

    fn subset(&self, idx: &[usize]) -> Result<PairedTrajectory> {
        PairedTrajectory::new(
            idx.iter().map(|&i| self.source[i]).collect(),
            idx.iter().map(|&i| self.target[i]).collect(),
        )
    }
}

fn to_complex(points: &[Position2D]) -> Vec<Complex64> {
    points.iter().map(|p| Complex64::new(p.x, p.y)).collect()
}

/// Unnormalized forward DFT, `X[n] = Σ_t x[t]·exp(-j2πnt/T)`.
///
/// Direct evaluation; sequence lengths in this crate stay in the hundreds.
pub fn dft_forward(seq: &[Complex64]) -> Vec<Complex64> {
    let t_len = seq.len();
    if t_len == 0 {
        return Vec::new();
    }
    let twiddles: Vec<Complex64> = (0..t_len)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / t_len as f64))
        .collect();
    (0..t_len)
        .map(|n| {
            seq.iter()
                .enumerate()
                .map(|(t, &x)| x * twiddles[(n * t) % t_len])
                .sum()
        })
        .collect()
}

/// Least-squares `(α, β)` of `v ≈ αu + β`, computed on DFT bins.
/// `β` lives in DC-bin scale, i.e. `β = Σv − αΣu`.
pub fn solve_alpha_beta(pt: &PairedTrajectory) -> Result<(Complex64, Complex64)> {
    let u = to_complex(&pt.source);
    let v = to_complex(&pt.target);
    let x = dft_forward(&u);
    let y = dft_forward(&v);

    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (xn, yn) in x.iter().zip(&y).skip(1) {
        num += xn.conj() * yn;
        den += xn.norm_sqr();
    }
    let power: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    if den <= f64::EPSILON * f64::EPSILON * power || den == 0.0 {
        return Err(Error::DegenerateSource);
    }
    let alpha = num / den;
    let beta = y[0] - alpha * x[0];
    Ok((alpha, beta))
}

/// Recovers `(s, R, d)` from `(α, β)`; `β` is divided by `T` (DC-bin scale).
pub fn extract_params(alpha: Complex64, beta: Complex64, t_len: usize) -> Result<RbtParams> {
    let scale = alpha.norm();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroAlpha);
    }
    let unit = alpha / scale;
    let rotation = Angle::from_radians(unit.im.atan2(unit.re));
    let translation = Position2D::new(beta.re / t_len as f64, beta.im / t_len as f64);
    Ok(RbtParams {
        scale,
        rotation,
        translation,
    })
}

pub fn estimate_rbt(pt: &PairedTrajectory) -> Result<RbtParams> {
    let (alpha, beta) = solve_alpha_beta(pt)?;
    extract_params(alpha, beta, pt.len())
}

/// `s·R·p + d`.
pub fn apply_rbt(params: &RbtParams, p: Position2D) -> Position2D {
    p.rotated(params.rotation) * params.scale + params.translation
}

/// Keeps the rotation of `params` but imposes `scale`, re-fitting the
/// translation in least squares: `d = v̄ − sRū`.
pub fn refit_with_scale(params: &RbtParams, pt: &PairedTrajectory, scale: f64) -> RbtParams {
    let mut fixed = RbtParams {
        scale,
        rotation: params.rotation,
        translation: Position2D::ORIGIN,
    };
    let n = pt.len() as f64;
    let mut offset = Position2D::ORIGIN;
    for (s, t) in pt.source.iter().zip(&pt.target) {
        offset += *t - apply_rbt(&fixed, *s);
    }
    fixed.translation = offset * (1.0 / n);
    fixed
}

/// Result of the robust transform fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RbtFit {
    pub params: RbtParams,
    /// Per-pair consensus membership of the final refit.
    pub inliers: Vec<bool>,
}

impl RbtFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

fn inlier_mask(params: &RbtParams, pt: &PairedTrajectory, threshold: f64) -> Vec<bool> {
    pt.source
        .iter()
        .zip(&pt.target)
        .map(|(s, t)| apply_rbt(params, *s).distance(*t) < threshold)
        .collect()
}

fn mask_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

/// RANSAC over point pairs with 2-pair minimal samples.
pub fn estimate_rbt_ransac(pt: &PairedTrajectory, cfg: &RansacConfig) -> Result<RbtFit> {
    cfg.validate()?;
    let n = pt.len();
    let min_consensus = cfg.min_consensus(n).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Vec<bool>> = None;
    let mut best_count = 0;

    for _ in 0..cfg.max_iterations {
        let idx = sample(&mut rng, n, 2).into_vec();
        if pt.source[idx[0]].distance(pt.source[idx[1]]) < 1e-9 {
            continue;
        }
        let Ok(params) = pt.subset(&idx).and_then(|s| estimate_rbt(&s)) else {
            continue;
        };
        let mask = inlier_mask(&params, pt, cfg.inlier_threshold);
        let count = mask.iter().filter(|&&b| b).count();
        if count > best_count {
            best_count = count;
            best = Some(mask);
            if count == n {
                break;
            }
        }
    }

    let no_consensus = Error::NoConsensus {
        iterations: cfg.max_iterations,
    };
    let mut mask = match best {
        Some(m) if best_count >= min_consensus => m,
        _ => return Err(no_consensus),
    };

    // Refit on the consensus until membership settles.
    let mut params = estimate_rbt(&pt.subset(&mask_indices(&mask))?)?;
    for _ in 0..5 {
        let next = inlier_mask(&params, pt, cfg.inlier_threshold);
        let count = next.iter().filter(|&&b| b).count();
        if next == mask || count < min_consensus {
            break;
        }
        let Ok(refit) = pt.subset(&mask_indices(&next)).and_then(|s| estimate_rbt(&s)) else {
            break;
        };
        mask = next;
        params = refit;
    }
    Ok(RbtFit {
        params,
        inliers: mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len() as f64;
        (0..x.len())
            .map(|k| {
                let mut acc = c(0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let ang = -TAU * (k as f64) * (t as f64) / n;
                    acc += v * c(ang.cos(), ang.sin());
                }
                acc
            })
            .collect()
    }

    /// Umeyama similarity: SVD of the cross-covariance.
    fn svd_similarity(src: &[Position2D], dst: &[Position2D]) -> RbtParams {
        let n = src.len() as f64;
        let ms = Position2D::mean(src).unwrap();
        let md = Position2D::mean(dst).unwrap();
        let mut cov = Matrix2::zeros();
        let mut var_s = 0.0;
        for (s, d) in src.iter().zip(dst) {
            let a = Vector2::new(s.x - ms.x, s.y - ms.y);
            let b = Vector2::new(d.x - md.x, d.y - md.y);
            cov += b * a.transpose();
            var_s += a.norm_squared();
        }
        cov /= n;
        var_s /= n;
        let svd = cov.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut sign = Matrix2::identity();
        if (u * vt).determinant() < 0.0 {
            sign[(1, 1)] = -1.0;
        }
        let r = u * sign * vt;
        let scale = (svd.singular_values[0] * sign[(0, 0)] + svd.singular_values[1] * sign[(1, 1)]) / var_s;
        let t = Vector2::new(md.x, md.y) - scale * r * Vector2::new(ms.x, ms.y);
        RbtParams::new(scale, Angle::from_radians(r[(1, 0)].atan2(r[(0, 0)])), Position2D::new(t.x, t.y))
    }

    fn random_points(rng: &mut impl Rng, n: usize) -> Vec<Position2D> {
        (0..n)
            .map(|_| Position2D::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect()
    }

    #[test]
    fn dft_examples() {
        let out = dft_forward(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        for v in &out {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
        let k = c(0.3, -1.2);
        let out = dft_forward(&[k, k, k, k]);
        assert!((out[0] - k * 4.0).norm() < 1e-14);
        for v in &out[1..] {
            assert!(v.norm() < 1e-14);
        }
        let x = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let expected = naive_dft(&x);
        for (a, b) in dft_forward(&x).iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
        // bin 1 of [1, j, -1, -j] is 4, others vanish
        assert!((expected[1] - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_pair() {
        let pts = vec![
            Position2D::new(0.0, 0.0),
            Position2D::new(1.0, 0.0),
            Position2D::new(1.0, 1.0),
            Position2D::new(0.0, 1.0),
        ];
        let pt = PairedTrajectory::new(pts.clone(), pts).unwrap();
        let (a, b) = solve_alpha_beta(&pt).unwrap();
        assert!((a - c(1.0, 0.0)).norm() < 1e-12);
        assert!(b.norm() < 1e-12);
        let p = estimate_rbt(&pt).unwrap();
        assert!((p.scale - 1.0).abs() < 1e-12);
        assert!(p.rotation.radians().abs() < 1e-12);
        assert!(p.translation.norm() < 1e-12);
    }

    #[test]
    fn square_alpha_beta() {
        let src = vec![
            Position2D::new(0.0, 0.0),
            Position2D::new(1.0, 0.0),
            Position2D::new(1.0, 1.0),
            Position2D::new(0.0, 1.0),
        ];
        let dst: Vec<Position2D> = src
            .iter()
            .map(|p| {
                let v = c(0.0, 2.0) * c(p.x, p.y) + c(1.0, 1.0);
                Position2D::new(v.re, v.im)
            })
            .collect();
        let pt = PairedTrajectory::new(src, dst).unwrap();
        let (a, b) = solve_alpha_beta(&pt).unwrap();
        assert!((a - c(0.0, 2.0)).norm() < 1e-12);
        assert!((b - c(4.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn noisy_pair_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let src = random_points(&mut rng, 10);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let dst: Vec<Position2D> = src
            .iter()
            .map(|p| {
                let v = c(0.7, -0.4) * c(p.x, p.y) + c(2.0, -1.0);
                Position2D::new(v.re + noise.sample(&mut rng), v.im + noise.sample(&mut rng))
            })
            .collect();
        // Oracle: normal equations [Σ|u|², Σu*; Σu, T] [α; β'] = [Σu* v; Σv], with β' = β/T.
        let u: Vec<Complex64> = src.iter().map(|p| c(p.x, p.y)).collect();
        let v: Vec<Complex64> = dst.iter().map(|p| c(p.x, p.y)).collect();
        let t = u.len() as f64;
        let suu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let su: Complex64 = u.iter().sum();
        let sv: Complex64 = v.iter().sum();
        let suv: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let det = suu * t - su.norm_sqr();
        let alpha = (suv * t - su.conj() * sv) / det;
        let beta_mean = (sv - alpha * su) / t;

        let pt = PairedTrajectory::new(src, dst).unwrap();
        let (a, b) = solve_alpha_beta(&pt).unwrap();
        assert!((a - alpha).norm() < 1e-12);
        assert!((b - beta_mean * t).norm() < 1e-11);

        let p = extract_params(a, b, pt.len()).unwrap();
        let oracle = svd_similarity(pt.source(), pt.target());
        assert!((p.scale - oracle.scale).abs() < 1e-9);
        assert!((p.rotation - oracle.rotation).radians().abs() < 1e-9);
        assert!(p.translation.distance(oracle.translation) < 1e-9);
    }

    #[test]
    fn extract_examples() {
        let p = extract_params(c(1.0, 0.0), c(0.0, 0.0), 7).unwrap();
        assert_eq!(p, RbtParams::IDENTITY);
        let p = extract_params(c(0.0, 2.0), c(4.0, 4.0), 4).unwrap();
        assert!((p.scale - 2.0).abs() < 1e-15);
        assert!((p.rotation.degrees() - 90.0).abs() < 1e-12);
        assert!(p.translation.distance(Position2D::new(1.0, 1.0)) < 1e-15);
        let r = p.rotation_matrix();
        let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        assert!((det - 1.0).abs() < 1e-12);
        assert!(matches!(extract_params(c(0.0, 0.0), c(1.0, 0.0), 3), Err(Error::ZeroAlpha)));
    }

    #[test]
    fn degenerate_source_rejected() {
        let src = vec![Position2D::new(1.0, 2.0); 5];
        let dst = random_points(&mut ChaCha8Rng::seed_from_u64(1), 5);
        let pt = PairedTrajectory::new(src, dst).unwrap();
        assert_eq!(solve_alpha_beta(&pt), Err(Error::DegenerateSource));
        assert!(PairedTrajectory::new(vec![Position2D::ORIGIN], vec![Position2D::ORIGIN]).is_err());
        assert!(matches!(
            PairedTrajectory::new(vec![Position2D::ORIGIN; 3], vec![Position2D::ORIGIN; 2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn exact_recovery_constructed() {
        let truth = RbtParams::new(0.5, Angle::from_degrees(-30.0), Position2D::new(-1.0, 2.0));
        let src = random_points(&mut ChaCha8Rng::seed_from_u64(3), 25);
        let dst: Vec<Position2D> = src.iter().map(|p| apply_rbt(&truth, *p)).collect();
        let p = estimate_rbt(&PairedTrajectory::new(src, dst).unwrap()).unwrap();
        assert!((p.scale - 0.5).abs() < 1e-12);
        assert!((p.rotation - truth.rotation).radians().abs() < 1e-12);
        assert!(p.translation.distance(truth.translation) < 1e-12);
    }

    #[test]
    fn noisy_140_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = RbtParams::new(1.7, Angle::from_degrees(123.0), Position2D::new(3.0, -0.5));
        let src = random_points(&mut rng, 140);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let dst: Vec<Position2D> = src
            .iter()
            .map(|p| apply_rbt(&truth, *p) + Position2D::new(noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let pt = PairedTrajectory::new(src, dst).unwrap();
        let p = estimate_rbt(&pt).unwrap();
        let o = svd_similarity(pt.source(), pt.target());
        assert!((p.scale - o.scale).abs() < 1e-9);
        assert!((p.rotation - o.rotation).radians().abs() < 1e-9);
        assert!(p.translation.distance(o.translation) < 1e-9);
    }

    #[test]
    fn apply_examples() {
        let p = Position2D::new(3.0, 4.0);
        assert_eq!(apply_rbt(&RbtParams::IDENTITY, p), p);
        let params = RbtParams::new(2.0, Angle::from_degrees(90.0), Position2D::new(1.0, 1.0));
        let q = apply_rbt(&params, Position2D::new(1.0, 0.0));
        assert!(q.distance(Position2D::new(1.0, 3.0)) < 1e-12);
        let back = apply_rbt(&params.inverse(), apply_rbt(&params, p));
        assert!(back.distance(p) < 1e-12);
    }

    #[test]
    fn refit_with_known_scale() {
        let truth = RbtParams::new(2.5, Angle::from_degrees(40.0), Position2D::new(0.5, 1.5));
        let src = random_points(&mut ChaCha8Rng::seed_from_u64(8), 12);
        let dst: Vec<Position2D> = src.iter().map(|p| apply_rbt(&truth, *p)).collect();
        let pt = PairedTrajectory::new(src, dst).unwrap();
        let wrong = RbtParams::new(1.0, truth.rotation, Position2D::ORIGIN);
        let fixed = refit_with_scale(&wrong, &pt, 2.5);
        assert!(fixed.translation.distance(truth.translation) < 1e-12);
    }

    fn ransac_cfg(seed: u64) -> RansacConfig {
        RansacConfig {
            seed,
            ..RansacConfig::default()
        }
    }

    #[test]
    fn ransac_clean_equals_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let truth = RbtParams::new(0.8, Angle::from_degrees(-70.0), Position2D::new(1.0, 2.0));
        let src = random_points(&mut rng, 40);
        let noise = Normal::new(0.0, 0.005).unwrap();
        let dst: Vec<Position2D> = src
            .iter()
            .map(|p| apply_rbt(&truth, *p) + Position2D::new(noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let pt = PairedTrajectory::new(src, dst).unwrap();
        let direct = estimate_rbt(&pt).unwrap();
        let fit = estimate_rbt_ransac(&pt, &ransac_cfg(1)).unwrap();
        assert_eq!(fit.inlier_count(), 40);
        assert!((fit.params.scale - direct.scale).abs() < 1e-9);
        assert!((fit.params.rotation - direct.rotation).radians().abs() < 1e-9);
        assert!(fit.params.translation.distance(direct.translation) < 1e-9);
    }

    #[test]
    fn ransac_rejects_outlier_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let truth = RbtParams::new(1.3, Angle::from_degrees(15.0), Position2D::new(3.0, 3.5));
        let src = random_points(&mut rng, 50);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut dst: Vec<Position2D> = src
            .iter()
            .map(|p| apply_rbt(&truth, *p) + Position2D::new(noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let outliers: Vec<usize> = (0..50).filter(|i| i % 5 == 0).collect();
        for &i in &outliers {
            dst[i] = Position2D::new(rng.random_range(0.0..6.2), rng.random_range(0.0..7.2));
        }
        let clean_idx: Vec<usize> = (0..50).filter(|i| i % 5 != 0).collect();
        let pt = PairedTrajectory::new(src, dst).unwrap();
        let reference = estimate_rbt(&pt.subset(&clean_idx).unwrap()).unwrap();
        let reference_err = (reference.scale - truth.scale).abs();
        let fit = estimate_rbt_ransac(&pt, &ransac_cfg(2)).unwrap();
        for &i in &outliers {
            assert!(!fit.inliers[i], "outlier pair {i} kept");
        }
        let err = (fit.params.scale - truth.scale).abs();
        assert!(err <= 10.0 * reference_err.max(1e-6), "{err} vs {reference_err}");
        assert!(fit.params.translation.distance(truth.translation) < 0.05);
    }

    #[test]
    fn ransac_all_outliers_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let src = random_points(&mut rng, 30);
        let dst = random_points(&mut rng, 30);
        let pt = PairedTrajectory::new(src, dst).unwrap();
        assert!(matches!(
            estimate_rbt_ransac(&pt, &ransac_cfg(3)),
            Err(Error::NoConsensus { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn exact_recovery_random(seed in 0u64..10_000, s in 0.1f64..5.0, th in -3.1f64..3.1,
                                     dx in -5.0f64..5.0, dy in -5.0f64..5.0, n in 3usize..60) {
                let truth = RbtParams::new(s, Angle::from_radians(th), Position2D::new(dx, dy));
                let src = random_points(&mut ChaCha8Rng::seed_from_u64(seed), n);
                let dst: Vec<Position2D> = src.iter().map(|p| apply_rbt(&truth, *p)).collect();
                let p = estimate_rbt(&PairedTrajectory::new(src, dst).unwrap()).unwrap();
                prop_assert!((p.scale - s).abs() < 1e-10);
                prop_assert!((p.rotation - truth.rotation).radians().abs() < 1e-10);
                prop_assert!(p.translation.distance(truth.translation) < 1e-10);
            }

            #[test]
            fn centered_form_parseval_and_equivariance(seed in 0u64..10_000, n in 2usize..80, rho in -3.1f64..3.1) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let src = random_points(&mut rng, n);
                let dst = random_points(&mut rng, n);
                let pt = PairedTrajectory::new(src.clone(), dst.clone()).unwrap();
                let (a, b) = solve_alpha_beta(&pt).unwrap();

                let u: Vec<Complex64> = src.iter().map(|p| c(p.x, p.y)).collect();
                let v: Vec<Complex64> = dst.iter().map(|p| c(p.x, p.y)).collect();
                let ub: Complex64 = u.iter().sum::<Complex64>() / n as f64;
                let vb: Complex64 = v.iter().sum::<Complex64>() / n as f64;
                let num: Complex64 = u.iter().zip(&v).map(|(x, y)| (x - ub).conj() * (y - vb)).sum();
                let den: f64 = u.iter().map(|x| (x - ub).norm_sqr()).sum();
                prop_assert!((a - num / den).norm() < 1e-12 * (1.0 + a.norm()));

                // time-domain residual = (1/T) DFT-domain residual
                let time: f64 = u.iter().zip(&v).map(|(x, y)| (a * x + b / n as f64 - y).norm_sqr()).sum();
                let xf = dft_forward(&u);
                let yf = dft_forward(&v);
                let mut freq = (a * xf[0] + b - yf[0]).norm_sqr();
                for k in 1..n {
                    freq += (a * xf[k] - yf[k]).norm_sqr();
                }
                prop_assert!((time - freq / n as f64).abs() < 1e-9 * (1.0 + time));

                let r = Angle::from_radians(rho);
                let rotated: Vec<Position2D> = src.iter().map(|p| p.rotated(r)).collect();
                let p1 = estimate_rbt(&pt).unwrap();
                let p2 = estimate_rbt(&PairedTrajectory::new(rotated, dst).unwrap()).unwrap();
                prop_assert!((p2.scale - p1.scale).abs() < 1e-9 * p1.scale.max(1.0));
                prop_assert!((p2.rotation - (p1.rotation - r)).radians().abs() < 1e-9);
            }
        }
    }
}
