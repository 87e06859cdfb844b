//! Discrete densities of the projected reference measure `μ_θ` on the bucket
//! partition of `[-2, 2]`, and their squared L² norms along a ladder.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decomposition::ProductDecomposition;
use crate::error::Result;
use crate::output::fmt_float;
use crate::projection::{bucket_profile, Angle, BucketGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub theta: Angle,
    pub rho: f64,
    pub grid: BucketGrid,
    pub bucket_mass: Vec<f64>,
    /// `Σ |J_i| (mass_i / |J_i|)^2`.
    pub l2_sq: f64,
}

impl DensityHistogram {
    fn from_mass(theta: Angle, rho: f64, grid: BucketGrid, bucket_mass: Vec<f64>) -> Self {
        let l2_sq = bucket_mass.iter().map(|m| m * m).sum::<f64>() / grid.length;
        DensityHistogram { theta, rho, grid, bucket_mass, l2_sq }
    }

    pub fn total_mass(&self) -> f64 {
        self.bucket_mass.iter().sum()
    }

    /// `Σ mass_i · centre_i`.
    pub fn first_moment(&self) -> f64 {
        self.bucket_mass.iter().enumerate().map(|(i, m)| m * (self.grid.left(i) + 0.5 * self.grid.length)).sum()
    }

    pub fn density(&self, i: usize) -> f64 {
        self.bucket_mass[i] / self.grid.length
    }

    /// Merges runs of `factor` consecutive buckets; the bucket count must
    /// be a multiple of `factor`.
    pub fn aggregate(&self, factor: usize) -> DensityHistogram {
        assert!(factor > 0 && self.grid.count.is_multiple_of(factor), "bucket count not divisible by {factor}");
        let count = self.grid.count / factor;
        let grid = BucketGrid { count, length: 4.0 / count as f64 };
        let mass = self.bucket_mass.chunks(factor).map(|c| c.iter().sum()).collect();
        DensityHistogram::from_mass(self.theta, self.rho, grid, mass)
    }

    /// Rows `theta,rho,bucket_index,mass,density,l2_sq_running`; empty
    /// buckets are skipped unless `all` is set.
    pub fn write_csv<W: Write>(&self, mut w: W, all: bool) -> std::io::Result<()> {
        let mut running = 0.0;
        for (i, &m) in self.bucket_mass.iter().enumerate() {
            running += m * m / self.grid.length;
            if all || m > 0.0 {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_float(self.theta.radians()),
                    fmt_float(self.rho),
                    i,
                    fmt_float(m),
                    fmt_float(self.density(i)),
                    fmt_float(running)
                )?;
            }
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str = "theta,rho,bucket_index,mass,density,l2_sq_running";

/// Histogram of `μ_θ` on an arbitrary bucket grid: each square's full
/// weight goes to the bucket of its representative point.
pub fn pushforward_on_grid(pd: &ProductDecomposition, angle: Angle, grid: BucketGrid) -> Result<DensityHistogram> {
    let (c, s) = angle.direction();
    let mut mass = vec![0.0; grid.count];
    for px in &pd.x.pieces {
        let tx = px.interval.mid() * c;
        for py in &pd.y.pieces {
            let t = tx + py.interval.mid() * s;
            mass[grid.index(t, angle.radians())?] += px.weight * py.weight;
        }
    }
    Ok(DensityHistogram::from_mass(angle, pd.rho, grid, mass))
}

/// Histogram on the decomposition's own `⌊4/ρ⌋` grid.
pub fn pushforward_histogram(pd: &ProductDecomposition, angle: Angle) -> Result<DensityHistogram> {
    pushforward_on_grid(pd, angle, BucketGrid::for_rho(pd.rho))
}

/// Histogram of a finer decomposition on the `⌊4/ρ⌋` grid of the coarser
/// scale `rho`. Representative-point bucketing on a decomposition's own grid
/// aliases when piece lengths and bucket length are commensurate; spreading
/// each coarse bucket over many fine pieces removes most of that error.
pub fn pushforward_refined(fine: &ProductDecomposition, angle: Angle, rho: f64) -> Result<DensityHistogram> {
    let mut h = pushforward_on_grid(fine, angle, BucketGrid::for_rho(rho))?;
    h.rho = rho;
    Ok(h)
}

/// `max` over squares of `max(w / ρ^d, ρ^d / w)`.
pub fn weight_constant(pd: &ProductDecomposition) -> f64 {
    let extremes = |dec: &crate::decomposition::RhoDecomposition| {
        dec.pieces.iter().fold((f64::MAX, 0.0f64), |(lo, hi), p| (lo.min(p.weight), hi.max(p.weight)))
    };
    let (xl, xh) = extremes(&pd.x);
    let (yl, yh) = extremes(&pd.y);
    let scale = pd.rho.powf(pd.d);
    (xh * yh / scale).max(scale / (xl * yl))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Step {
    pub rho: f64,
    pub l2_sq: f64,
    pub sum_s2: u128,
    pub pair_count: u64,
    /// `c1^2 ρ^(2d-1) Σ s^2`.
    pub bound_s2: f64,
    /// `c1^2 ρ^(2d-1) N(θ)`.
    pub bound: f64,
}

impl L2Step {
    /// Equality is attained when all weights equal `c1 ρ^d`, so the first
    /// comparison allows float rounding.
    pub fn within_bounds(&self) -> bool {
        self.l2_sq <= self.bound_s2 * (1.0 + 1e-12) && self.sum_s2 <= self.pair_count as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Trajectory {
    pub theta: Angle,
    pub c1: f64,
    pub steps: Vec<L2Step>,
    /// Relative increase of the running max over the last step.
    pub last_increase: f64,
    pub verdict: Verdict,
}

impl L2Trajectory {
    /// `l2_sq[k+1] / l2_sq[k]`.
    pub fn growth_factors(&self) -> Vec<f64> {
        self.steps.windows(2).map(|w| w[1].l2_sq / w[0].l2_sq).collect()
    }
}

/// Relative running-max increase below which a trajectory counts as bounded.
pub const STABLE_INCREASE: f64 = 0.05;

/// `l2_sq` per ladder step with the bound chain
/// `l2_sq <= c1^2 ρ^(2d-1) Σ s^2 <= c1^2 ρ^(2d-1) N(θ)`.
pub fn l2_trajectory(ladder: &[ProductDecomposition], angle: Angle, c1: f64) -> Result<L2Trajectory> {
    let mut steps = Vec::with_capacity(ladder.len());
    for pd in ladder {
        let hist = pushforward_histogram(pd, angle)?;
        let profile = bucket_profile(pd, angle)?;
        let factor = c1 * c1 * pd.rho.powf(2.0 * pd.d - 1.0);
        steps.push(L2Step {
            rho: pd.rho,
            l2_sq: hist.l2_sq,
            sum_s2: profile.sum_s2,
            pair_count: profile.pair_count,
            bound_s2: factor * profile.sum_s2 as f64,
            bound: factor * profile.pair_count as f64,
        });
    }
    let running: Vec<f64> = steps
        .iter()
        .scan(0.0f64, |m, s| {
            *m = m.max(s.l2_sq);
            Some(*m)
        })
        .collect();
    let last_increase = match running.as_slice() {
        [.., a, b] => (b - a) / a,
        _ => 0.0,
    };
    let verdict = if last_increase < STABLE_INCREASE { Verdict::Bounded } else { Verdict::Unbounded };
    Ok(L2Trajectory { theta: angle, c1, steps, last_increase, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{presets, CantorSet};
    use crate::decomposition::product_decompose;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn product(spec: crate::cantor::CantorSpec, rho: f64) -> ProductDecomposition {
        let c = CantorSet::new(spec).unwrap();
        product_decompose(&c, &c, rho, 1 << 22).unwrap()
    }

    #[test]
    fn full_square_horizontal_is_uniform() {
        let rho = 2f64.powi(-7);
        let fine = product(presets::full_interval(), rho / 16.0);
        let h = pushforward_refined(&fine, Angle::ZERO, rho).unwrap();
        assert_abs_diff_eq!(h.total_mass(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h.l2_sq, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn own_grid_aliases_on_dyadic_scales() {
        // pieces have length 2ρ, so every other bucket stays empty
        let pd = product(presets::full_interval(), 2f64.powi(-7));
        let h = pushforward_histogram(&pd, Angle::ZERO).unwrap();
        assert_abs_diff_eq!(h.l2_sq, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn middle_third_horizontal_grows_by_three_halves() {
        // depth-n pieces carry mass 2^-n each
        for k in 3..=7 {
            let pd = product(presets::middle_third(), 3f64.powi(-k));
            let h = pushforward_histogram(&pd, Angle::ZERO).unwrap();
            let n = k - 1;
            // every depth-n piece lands in a single bucket of length 3^-k
            assert_abs_diff_eq!(h.l2_sq, 3.0 * 1.5f64.powi(n), epsilon = 1e-9 * h.l2_sq);
        }
    }

    #[test]
    fn aggregation_matches_coarse_grid_and_lowers_l2() {
        let pd = product(presets::middle_third(), 3f64.powi(-5));
        let theta = Angle::new(0.37).unwrap();
        let fine = pushforward_histogram(&pd, theta).unwrap();
        let coarse = fine.aggregate(3);
        let direct = pushforward_on_grid(&pd, theta, coarse.grid).unwrap();
        for (a, b) in coarse.bucket_mass.iter().zip(&direct.bucket_mass) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(coarse.l2_sq <= fine.l2_sq);
    }

    #[test]
    fn coarser_scale_agrees_in_mass_and_first_moment() {
        let theta = Angle::new(-0.8).unwrap();
        let fine = pushforward_histogram(&product(presets::middle_third(), 3f64.powi(-6)), theta).unwrap();
        let coarse = pushforward_histogram(&product(presets::middle_third(), 3f64.powi(-5)), theta).unwrap();
        assert_abs_diff_eq!(fine.total_mass(), coarse.total_mass(), epsilon = 1e-9);
        assert!((fine.first_moment() - coarse.first_moment()).abs() <= coarse.grid.length);
    }

    #[test]
    fn weight_constant_of_uniform_weights() {
        let pd = product(presets::middle_third(), 3f64.powi(-4));
        assert_abs_diff_eq!(weight_constant(&pd), 4.0, epsilon = 1e-9);
    }

    #[test]
    fn bound_chain_holds_along_a_ladder() {
        let ladder: Vec<_> = (3..=6).map(|k| product(presets::middle_third(), 3f64.powi(-k))).collect();
        let c1 = ladder.iter().map(weight_constant).fold(1.0, f64::max);
        let traj = l2_trajectory(&ladder, Angle::new(0.6).unwrap(), c1).unwrap();
        assert!(traj.steps.iter().all(L2Step::within_bounds));
        let bad = l2_trajectory(&ladder, Angle::ZERO, c1).unwrap();
        assert_eq!(bad.verdict, Verdict::Unbounded);
        for g in bad.growth_factors() {
            assert_abs_diff_eq!(g, 1.5, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn histogram_invariants(theta in -1.5f64..1.5, k in 2i32..6) {
            let pd = product(presets::golden(), 3f64.powi(-k));
            let h = pushforward_histogram(&pd, Angle::new(theta).unwrap()).unwrap();
            prop_assert!((h.total_mass() - 1.0).abs() <= 1e-9);
            prop_assert!(h.bucket_mass.iter().all(|&m| m >= 0.0));
            let occupied = h.bucket_mass.iter().filter(|&&m| m > 0.0).count() as f64;
            prop_assert!(h.l2_sq >= 1.0 / (occupied * h.grid.length) * (1.0 - 1e-9));
            prop_assert!(h.l2_sq >= 0.25 * (1.0 - 1e-9));
        }
    }
}
