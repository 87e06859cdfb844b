use serde::{Deserialize, Serialize};

use super::{Angle, FactorProjections};
use crate::decomposition::ProductDecomposition;
use crate::error::{Error, Result};
use crate::interval::union_measure;

/// `⌊4/ρ⌋` equal buckets covering `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketGrid {
    pub count: usize,
    pub length: f64,
}

impl BucketGrid {
    pub fn for_rho(rho: f64) -> Self {
        // the relative nudge keeps 4/ρ integral when ρ = 4/m up to rounding
        let count = ((4.0 / rho) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        BucketGrid { count, length: 4.0 / count as f64 }
    }

    /// Bucket of the point `t`; the last bucket is closed on the right.
    pub fn index(&self, t: f64, theta: f64) -> Result<usize> {
        const EDGE: f64 = 1e-12;
        if !(-2.0 - EDGE..=2.0 + EDGE).contains(&t) {
            return Err(Error::ProjectionOutOfRange { theta, value: t });
        }
        Ok((((t + 2.0) / self.length).floor().max(0.0) as usize).min(self.count - 1))
    }

    pub fn left(&self, i: usize) -> f64 {
        -2.0 + i as f64 * self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionProfile {
    pub theta: Angle,
    pub rho: f64,
    pub grid: BucketGrid,
    pub squares: usize,
    /// `N(θ)`, ordered pairs with the diagonal.
    pub pair_count: u64,
    /// `s_{ρ,i}`: squares whose representative point projects into bucket `i`.
    pub buckets: Vec<u64>,
    pub sum_s2: u128,
    pub occupied: usize,
    /// `(Σ s)^2 / Σ s^2`.
    pub cs_ratio: f64,
    /// `⌈occupied / 2⌉ ρ`: non-adjacent occupied buckets carry disjoint
    /// projected pieces of length at least ρ.
    pub measure_lower_bound: f64,
    /// `occupied · bucket length`.
    pub bucket_estimate: f64,
    /// Lebesgue measure of `∪ proj_θ(Q)`.
    pub cover_measure: f64,
}

impl ProjectionProfile {
    /// `Σ s^2 <= N(θ)`.
    pub fn sum_s2_within_pairs(&self) -> bool {
        self.sum_s2 <= self.pair_count as u128
    }

    /// `(Σ s)^2 <= occupied · Σ s^2`, in integers.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        let n = self.squares as u128;
        n * n <= self.occupied as u128 * self.sum_s2
    }
}

pub fn bucket_profile(pd: &ProductDecomposition, angle: Angle) -> Result<ProjectionProfile> {
    let grid = BucketGrid::for_rho(pd.rho);
    let proj = FactorProjections::new(pd, angle);
    let mut buckets = vec![0u64; grid.count];
    for t in proj.reps() {
        buckets[grid.index(t, angle.radians())?] += 1;
    }
    let mut cover: Vec<_> = proj.intervals().collect();
    let cover_measure = union_measure(&mut cover);
    let pair_count = proj.pair_count();
    let sum_s2: u128 = buckets.iter().map(|&s| (s as u128) * (s as u128)).sum();
    let occupied = buckets.iter().filter(|&&s| s > 0).count();
    let n = pd.len();
    Ok(ProjectionProfile {
        theta: angle,
        rho: pd.rho,
        grid,
        squares: n,
        pair_count,
        buckets,
        sum_s2,
        occupied,
        cs_ratio: if sum_s2 == 0 { 0.0 } else { (n as f64).powi(2) / sum_s2 as f64 },
        measure_lower_bound: occupied.div_ceil(2) as f64 * pd.rho,
        bucket_estimate: occupied as f64 * grid.length,
        cover_measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{presets, CantorSet};
    use crate::decomposition::{product_decompose, ProductDecomposition};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn mid_product(k: i32) -> ProductDecomposition {
        let c = CantorSet::new(presets::middle_third()).unwrap();
        product_decompose(&c, &c, 3f64.powi(-k), 1 << 22).unwrap()
    }

    #[test]
    fn grid_length_equals_rho_on_triadic_scales() {
        for k in 1..12 {
            let g = BucketGrid::for_rho(3f64.powi(-k));
            assert_eq!(g.count, 4 * 3usize.pow(k as u32));
        }
        let g = BucketGrid::for_rho(0.3);
        assert_eq!(g.count, 13);
        assert!(g.length >= 0.3);
        assert!(g.index(2.5, 0.0).is_err());
        assert_eq!(g.index(2.0, 0.0).unwrap(), 12);
        assert_eq!(g.index(-2.0, 0.0).unwrap(), 0);
    }

    #[test]
    fn horizontal_profile_is_the_factor_cover() {
        for k in 3..=6 {
            let pd = mid_product(k);
            let p = bucket_profile(&pd, Angle::ZERO).unwrap();
            assert_abs_diff_eq!(p.cover_measure, (2.0f64 / 3.0).powi(k - 1), epsilon = 1e-12);
            assert_eq!(p.occupied, 1 << (k - 1));
            assert_eq!(p.buckets.iter().sum::<u64>() as usize, pd.len());
            // whole columns project together
            assert_eq!(p.pair_count, (pd.len() * pd.y.len()) as u64);
        }
    }

    #[test]
    fn diagonal_profile_covers_root_two() {
        let pd = mid_product(5);
        let p = bucket_profile(&pd, Angle::new(FRAC_PI_4).unwrap()).unwrap();
        assert!(p.cover_measure >= SQRT_2 * (1.0 - 1e-12));
        assert!(p.cauchy_schwarz_holds() && p.sum_s2_within_pairs());
        assert!(p.cover_measure >= p.measure_lower_bound);
    }

    #[test]
    fn single_square_profile() {
        let c = CantorSet::new(presets::middle_third()).unwrap();
        let x = crate::decomposition::decompose(&c, 0.2, 10).unwrap();
        let one = crate::decomposition::RhoDecomposition { pieces: x.pieces[..1].to_vec(), ..x };
        let pd = ProductDecomposition { rho: 0.2, lambda: 3.0, d: 1.0, x: one.clone(), y: one };
        let p = bucket_profile(&pd, Angle::new(0.3).unwrap()).unwrap();
        assert_eq!(p.occupied, 1);
        assert_eq!(p.cs_ratio, 1.0);
        assert_eq!(p.pair_count, 1);
        let q = crate::projection::project_square(&pd.square(0), p.theta);
        assert_abs_diff_eq!(p.cover_measure, q.len(), epsilon = 1e-15);
    }
}
