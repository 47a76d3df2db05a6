//! Intersection area of two disks.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Area of the intersection of disks with radii `r1`, `r2` whose centers are
/// `dist` apart.
pub fn circle_overlap_area(r1: f64, r2: f64, dist: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(invalid(format!(
            "radii must be positive, got {r1} and {r2}"
        )));
    }
    if !(dist >= 0.0) {
        return Err(invalid(format!(
            "center distance must be non-negative, got {dist}"
        )));
    }
    Ok(overlap_unchecked(r1, r2, dist))
}

/// [`circle_overlap_area`] without argument checks, for the solver's inner loop.
#[inline]
pub(crate) fn overlap_unchecked(r1: f64, r2: f64, dist: f64) -> f64 {
    if dist >= r1 + r2 {
        return 0.0;
    }
    if dist <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    // Central angles subtended by the common chord in each circle.
    let theta = 2.0
        * ((r2 * r2 + dist * dist - r1 * r1) / (2.0 * dist * r2))
            .clamp(-1.0, 1.0)
            .acos();
    let phi = 2.0
        * ((r1 * r1 + dist * dist - r2 * r2) / (2.0 * dist * r1))
            .clamp(-1.0, 1.0)
            .acos();
    0.5 * r2 * r2 * (theta - theta.sin()) + 0.5 * r1 * r1 * (phi - phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_cases() {
        assert_eq!(circle_overlap_area(1.0, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(circle_overlap_area(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(circle_overlap_area(2.0, 1.0, 0.5).unwrap(), PI);
        assert_eq!(circle_overlap_area(1.0, 2.0, 0.5).unwrap(), PI);
        assert_eq!(circle_overlap_area(1.5, 1.5, 0.0).unwrap(), PI * 2.25);
        let lens = circle_overlap_area(1.0, 1.0, 1.0).unwrap();
        let want = 2.0 * (0.5f64).acos() - 3f64.sqrt() / 2.0;
        assert!((lens - want).abs() < 1e-12, "{lens} vs {want}");
    }

    #[test]
    fn symmetric_in_radii() {
        for &(a, b, d) in &[(1.0, 0.7, 0.9), (2.0, 0.5, 1.8), (0.3, 0.31, 0.05)] {
            let x = circle_overlap_area(a, b, d).unwrap();
            let y = circle_overlap_area(b, a, d).unwrap();
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(circle_overlap_area(0.0, 1.0, 1.0).is_err());
        assert!(circle_overlap_area(1.0, -1.0, 1.0).is_err());
        assert!(circle_overlap_area(1.0, 1.0, -0.1).is_err());
        assert!(circle_overlap_area(1.0, 1.0, f64::NAN).is_err());
    }
}
