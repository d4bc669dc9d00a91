use crate::error::{Error, Result};
use crate::geom::{Angle, Position2D};

fn check(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { expected: b, actual: a });
    }
    if a == 0 {
        return Err(Error::Underdetermined("no sensors to compare".into()));
    }
    Ok(())
}

/// Mean positioning error: mean Euclidean distance between index-aligned
/// estimated and true positions.
pub fn mpe(estimated: &[Position2D], truth: &[Position2D]) -> Result<f64> {
    check(estimated.len(), truth.len())?;
    Ok(estimated.iter().zip(truth).map(|(a, b)| a.distance(*b)).sum::<f64>() / truth.len() as f64)
}

/// Mean absolute wrapped orientation difference, in degrees.
pub fn orientation_error(estimated: &[Angle], truth: &[Angle]) -> Result<f64> {
    check(estimated.len(), truth.len())?;
    Ok(estimated
        .iter()
        .zip(truth)
        .map(|(a, b)| (*a - *b).degrees().abs())
        .sum::<f64>()
        / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let a = vec![Position2D::new(1.0, 2.0), Position2D::new(-3.0, 0.5)];
        assert_eq!(mpe(&a, &a).unwrap(), 0.0);
        let off = [Position2D::new(1.3, 2.4)];
        assert!((mpe(&off, &a[..1]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(mpe(&a, &off), Err(Error::LengthMismatch { .. })));

        let t = [Angle::from_degrees(10.0), Angle::from_degrees(-170.0)];
        assert_eq!(orientation_error(&t, &t).unwrap(), 0.0);
        let e = [Angle::from_degrees(10.0 + 359.0)];
        assert!((orientation_error(&e, &t[..1]).unwrap() - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn mpe_matches_direct_mean_and_is_symmetric(
            pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -1.0..1.0f64, -1.0..1.0f64), 4)
        ) {
            let truth: Vec<Position2D> = pts.iter().map(|p| Position2D::new(p.0, p.1)).collect();
            let est: Vec<Position2D> = pts.iter().map(|p| Position2D::new(p.0 + p.2, p.1 + p.3)).collect();
            let direct = pts.iter().map(|p| (p.2 * p.2 + p.3 * p.3).sqrt()).sum::<f64>() / 4.0;
            prop_assert!((mpe(&est, &truth).unwrap() - direct).abs() < 1e-12);
            prop_assert!((mpe(&est, &truth).unwrap() - mpe(&truth, &est).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn orientation_error_ignores_full_turns(
            a in prop::collection::vec(-3.0..3.0f64, 4),
            d in prop::collection::vec(-2.0..2.0f64, 4),
            turns in -3i32..3,
        ) {
            let truth: Vec<Angle> = a.iter().map(|&x| Angle::from_radians(x)).collect();
            let est: Vec<Angle> = a.iter().zip(&d).map(|(&x, &y)| Angle::from_radians(x + y)).collect();
            let shifted: Vec<Angle> = a.iter().zip(&d)
                .map(|(&x, &y)| Angle::from_radians(x + y + f64::from(turns) * std::f64::consts::TAU))
                .collect();
            let direct = d.iter().map(|y| y.abs().to_degrees()).sum::<f64>() / 4.0;
            let e = orientation_error(&est, &truth).unwrap();
            prop_assert!((e - direct).abs() < 1e-9);
            prop_assert!((orientation_error(&shifted, &truth).unwrap() - e).abs() < 1e-9);
            prop_assert!((0.0..=180.0).contains(&e));
        }
    }
}
