use serde::{Deserialize, Serialize};

use super::perron::spectral_radius;
use super::CantorSpec;
use crate::error::{Error, Result};

/// Required bound on `|spectral_radius(M(d)) - 1|` at the returned root.
pub const DIMENSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub d: f64,
    /// `|spectral_radius(M(d)) - 1|`.
    pub residual: f64,
}

fn weighted_matrix(spec: &CantorSpec, ratios: &[f64], d: f64) -> Vec<Vec<f64>> {
    let r = spec.symbols();
    (0..r).map(|i| (0..r).map(|j| f64::from(spec.transition[i][j]) * ratios[j].powf(d)).collect()).collect()
}

/// Similarity dimension of an affine Markov Cantor set: the `d` in `[0, 1]`
/// at which the matrix `b_ij * rho_j^d` has spectral radius 1, found by
/// bisection (the radius is strictly decreasing in `d`).
pub fn solve_dimension(spec: &CantorSpec) -> Result<DimensionResult> {
    let ratios: Vec<f64> =
        spec.branches.iter().map(|b| b.contraction_ratio().ok_or(Error::NonAffineSpec)).collect::<Result<_>>()?;
    let excess = |d: f64| spectral_radius(&weighted_matrix(spec, &ratios, d)) - 1.0;

    let at_zero = excess(0.0);
    if at_zero <= 0.0 {
        return finish(0.0, at_zero.abs());
    }
    let at_one = excess(1.0);
    if at_one > DIMENSION_TOLERANCE {
        return Err(Error::NoRootInUnitInterval { radius_at_one: at_one + 1.0 });
    }
    if at_one >= 0.0 {
        return finish(1.0, at_one);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (excess(lo).abs(), excess(hi).abs());
    if rl <= rh {
        finish(lo, rl)
    } else {
        finish(hi, rh)
    }
}

fn finish(d: f64, residual: f64) -> Result<DimensionResult> {
    if residual > DIMENSION_TOLERANCE {
        return Err(Error::DimensionNotConverged { residual, tolerance: DIMENSION_TOLERANCE });
    }
    Ok(DimensionResult { d, residual })
}

#[cfg(test)]
mod tests {
    use super::super::presets;
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent root of `k * ratio^d = 1`.
    fn moran_bisection(k: f64, ratio: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if k * ratio.powf(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn middle_third() {
        let r = solve_dimension(&presets::middle_third()).unwrap();
        let oracle = moran_bisection(2.0, 1.0 / 3.0);
        assert_abs_diff_eq!(oracle, 2f64.ln() / 3f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.d, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(r.d, 0.6309297536, epsilon = 1e-10);
        assert!(r.residual < DIMENSION_TOLERANCE);
    }

    #[test]
    fn full_interval_has_dimension_one() {
        let r = solve_dimension(&presets::full_interval()).unwrap();
        assert_eq!(r.d, 1.0);
    }

    #[test]
    fn single_fixed_branch_has_dimension_zero() {
        let r = solve_dimension(&presets::single_point()).unwrap();
        assert_eq!(r.d, 0.0);
    }

    #[test]
    fn golden_shift_dimension() {
        let r = solve_dimension(&presets::golden()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(r.d, phi.ln() / 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn quarter_pair_has_dimension_one_half() {
        let r = solve_dimension(&presets::quarter()).unwrap();
        assert_abs_diff_eq!(r.d, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn nonlinear_spec_is_rejected() {
        assert!(matches!(solve_dimension(&presets::cubic_doubling()), Err(Error::NonAffineSpec)));
    }
}
