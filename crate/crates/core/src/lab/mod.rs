//! Independent oracles, scaling regressions and the consolidated check suite.

mod suite;

pub use suite::{lemma_suite, CheckItem, Constants, Status, SuiteConfig, SuiteReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorSet;
use crate::decomposition::{decompose, ProductDecomposition, DEFAULT_MAX_PIECES};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::projection::{project_square, Angle};

pub const BRUTE_FORCE_LIMIT: usize = 5000;

/// O(n²) ordered count of intersecting closed intervals.
pub fn brute_force_interval_pairs(intervals: &[Interval]) -> u64 {
    intervals.iter().map(|a| intervals.iter().filter(|b| a.intersects(b)).count() as u64).sum()
}

/// O(n²) oracle for `N(θ)`.
pub fn brute_force_pair_count(pd: &ProductDecomposition, angle: Angle) -> Result<u64> {
    let n = pd.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "brute-force squares",
            actual: n as u128,
            cap: BRUTE_FORCE_LIMIT as u128,
        });
    }
    let projected: Vec<Interval> = pd.squares().map(|q| project_square(&q, angle)).collect();
    Ok(brute_force_interval_pairs(&projected))
}

/// Fraction of `points` cell-midpoint angles at which the two squares'
/// projections meet, times π.
pub fn scan_overlap_measure(q: &crate::decomposition::Square, r: &crate::decomposition::Square, points: usize) -> f64 {
    let hits =
        Angle::grid(points).into_iter().filter(|&a| project_square(q, a).intersects(&project_square(r, a))).count();
    hits as f64 * std::f64::consts::PI / points as f64
}

/// Least-squares line through `(log_x, log_y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub log_x: Vec<f64>,
    pub log_y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub target: Option<f64>,
    pub tolerance: f64,
}

impl ScalingFit {
    pub fn fit(log_x: Vec<f64>, log_y: Vec<f64>, target: Option<f64>, tolerance: f64) -> Self {
        let n = log_x.len() as f64;
        let mx = log_x.iter().sum::<f64>() / n;
        let my = log_y.iter().sum::<f64>() / n;
        let sxx: f64 = log_x.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = log_x.iter().zip(&log_y).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = log_y.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = log_x.iter().zip(&log_y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
        ScalingFit { log_x, log_y, slope, intercept, r_squared, target, tolerance }
    }

    /// `|slope - target| <= tolerance`, when there is a target.
    pub fn pass(&self) -> Option<bool> {
        self.target.map(|t| (self.slope - t).abs() <= self.tolerance)
    }
}

pub const DIMENSION_FIT_TOL: f64 = 0.02;

/// Slope of `log #(K)_ρ` against `log 1/ρ`. Affine specs get the solved
/// dimension as the target.
pub fn box_dimension(set: &CantorSet, scales: &[f64]) -> Result<ScalingFit> {
    let mut log_x = Vec::with_capacity(scales.len());
    let mut log_y = Vec::with_capacity(scales.len());
    for &rho in scales {
        let count = decompose(set, rho, DEFAULT_MAX_PIECES)?.len();
        log_x.push((1.0 / rho).ln());
        log_y.push((count as f64).ln());
    }
    let target = if set.is_affine() { Some(set.dimension()?.d) } else { None };
    Ok(ScalingFit::fit(log_x, log_y, target, DIMENSION_FIT_TOL))
}

/// `2^-k` for `k` in `from..=to`.
pub fn dyadic_scales(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

/// Worst ratio band at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBand {
    pub radius: f64,
    /// `min m(B_r(x)) / r^d` over sampled centres.
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl RadiusBand {
    /// Smallest `c` with `c⁻¹ r^d <= m <= c r^d` at this radius.
    pub fn c(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub d: f64,
    pub samples: usize,
    pub seed: u64,
    pub bands: Vec<RadiusBand>,
    pub c: f64,
}

impl RegularityReport {
    /// Ratio of the worst band over the finer half of the radii to the worst
    /// over the coarser half; near 1 when the band does not drift with `r`.
    pub fn drift(&self) -> f64 {
        let half = self.bands.len() / 2;
        let worst = |b: &[RadiusBand]| b.iter().map(RadiusBand::c).fold(0.0, f64::max);
        worst(&self.bands[half..]) / worst(&self.bands[..half])
    }
}

const CENTRE_DEPTH: usize = 40;

fn random_points(set: &CantorSet, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| set.cylinder_interval(&set.random_word(CENTRE_DEPTH, rng)).mid()).collect()
}

fn bands(d: f64, radii: &[f64], masses: impl Fn(f64) -> Result<Vec<f64>>) -> Result<Vec<RadiusBand>> {
    radii
        .iter()
        .map(|&r| {
            let ms = masses(r)?;
            let scale = r.powf(d);
            let (lo, hi) = ms.iter().fold((f64::MAX, 0.0f64), |(lo, hi), m| (lo.min(m / scale), hi.max(m / scale)));
            Ok(RadiusBand { radius: r, min_ratio: lo, max_ratio: hi })
        })
        .collect()
}

/// Two-sided `r^d` regularity of the reference measure at random points of
/// `K`, for each radius.
pub fn regularity_check(set: &CantorSet, samples: usize, seed: u64, radii: &[f64]) -> Result<RegularityReport> {
    let d = set.dimension()?.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = random_points(set, samples, &mut rng);
    let bands = bands(d, radii, |r| centres.iter().map(|&x| set.ball_mass(x, r, r * 1e-3)).collect())?;
    let c = bands.iter().map(RadiusBand::c).fold(1.0, f64::max);
    Ok(RegularityReport { d, samples, seed, bands, c })
}

/// Same for the product measure with box-norm balls, where
/// `m(B_r(x, y)) = m1(B_r(x)) m2(B_r(y))`.
pub fn product_regularity(
    k1: &CantorSet,
    k2: &CantorSet,
    samples: usize,
    seed: u64,
    radii: &[f64],
) -> Result<RegularityReport> {
    let d = k1.dimension()?.d + k2.dimension()?.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random_points(k1, samples, &mut rng);
    let ys = random_points(k2, samples, &mut rng);
    let bands = bands(d, radii, |r| {
        xs.iter().zip(&ys).map(|(&x, &y)| Ok(k1.ball_mass(x, r, r * 1e-3)? * k2.ball_mass(y, r, r * 1e-3)?)).collect()
    })?;
    let c = bands.iter().map(RadiusBand::c).fold(1.0, f64::max);
    Ok(RegularityReport { d, samples, seed, bands, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::presets;
    use crate::decomposition::product_decompose;
    use approx::assert_abs_diff_eq;

    fn set(spec: crate::cantor::CantorSpec) -> CantorSet {
        CantorSet::new(spec).unwrap()
    }

    #[test]
    fn fit_recovers_a_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let f = ScalingFit::fit(xs, ys, Some(2.5), 1e-9);
        assert_abs_diff_eq!(f.slope, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(f.pass(), Some(true));
    }

    #[test]
    fn box_dimension_of_affine_specs() {
        let scales = dyadic_scales(4, 16);
        for spec in [presets::middle_third(), presets::full_interval(), presets::golden(), presets::quarter()] {
            let f = box_dimension(&set(spec), &scales).unwrap();
            assert_eq!(f.pass(), Some(true), "slope {} target {:?}", f.slope, f.target);
            assert!(f.r_squared >= 0.98);
        }
    }

    #[test]
    fn box_dimension_of_nonlinear_spec_is_self_consistent() {
        let k = set(presets::cubic_doubling());
        let a = box_dimension(&k, &dyadic_scales(12, 18)).unwrap();
        let b = box_dimension(&k, &dyadic_scales(14, 22)).unwrap();
        assert!(a.target.is_none());
        assert!((a.slope - b.slope).abs() <= 0.03, "{} vs {}", a.slope, b.slope);
        assert!(a.slope > 0.0 && a.slope < 1.0, "{a:?}");
    }

    #[test]
    fn brute_force_limit() {
        let c = set(presets::middle_third());
        let pd = product_decompose(&c, &c, 3f64.powi(-8), 1 << 20).unwrap();
        assert!(matches!(brute_force_pair_count(&pd, Angle::ZERO), Err(Error::BudgetExceeded { .. })));
        let pd = product_decompose(&c, &c, 3f64.powi(-5), 1 << 20).unwrap();
        assert_eq!(
            brute_force_pair_count(&pd, Angle::new(0.3).unwrap()).unwrap(),
            crate::projection::count_overlapping_pairs(&pd, Angle::new(0.3).unwrap())
        );
    }

    #[test]
    fn middle_third_regularity_is_stable() {
        let radii = dyadic_scales(1, 12);
        let rep = regularity_check(&set(presets::middle_third()), 32, 5, &radii).unwrap();
        assert!(rep.c < 4.0, "{}", rep.c);
        assert!(rep.drift() < 1.5);
        let k = set(presets::middle_third());
        let prod = product_regularity(&k, &k, 32, 5, &radii).unwrap();
        assert!(prod.drift() < 1.5, "{:?}", prod.bands);
    }
}
