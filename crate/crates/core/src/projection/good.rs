use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{pair_counts, Angle, EnergyReport};
use crate::decomposition::ProductDecomposition;

/// `c3 = max E ρ^(2d-1)` over a ladder.
pub fn measured_c3(reports: &[EnergyReport], d: f64) -> f64 {
    reports.iter().map(|r| r.energy * r.rho.powf(2.0 * d - 1.0)).fold(0.0, f64::max)
}

/// Verdicts on the angle grid at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleVerdicts {
    pub rho: f64,
    /// `c3 ρ^(1-2d) / ε`.
    pub threshold: f64,
    pub counts: Vec<u64>,
    pub good: Vec<bool>,
    /// Total width of the grid cells around bad angles.
    pub bad_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodAngleReport {
    pub epsilon: f64,
    pub c3: f64,
    pub d: f64,
    pub grid: Vec<Angle>,
    pub cell_width: f64,
    pub per_rho: Vec<AngleVerdicts>,
    /// Number of final ladder steps an angle must be good at to persist.
    pub tail: usize,
    pub persistent: Vec<bool>,
}

impl GoodAngleReport {
    pub fn persistent_angles(&self) -> Vec<Angle> {
        self.grid.iter().zip(&self.persistent).filter(|(_, &p)| p).map(|(a, _)| *a).collect()
    }

    /// Largest bad-set measure over the ladder.
    pub fn max_bad_measure(&self) -> f64 {
        self.per_rho.iter().map(|v| v.bad_measure).fold(0.0, f64::max)
    }
}

/// Marks each of `grid_points` cell-midpoint angles good at each scale when
/// `N(θ) <= c3 ρ^(1-2d) / ε`. With `c3` measured as the ladder maximum of
/// `E ρ^(2d-1)`, Chebyshev's inequality bounds the bad measure by ε.
pub fn good_angles(
    ladder: &[ProductDecomposition],
    c3: f64,
    epsilon: f64,
    grid_points: usize,
    tail: usize,
) -> GoodAngleReport {
    let grid = Angle::grid(grid_points);
    let cell_width = PI / grid_points as f64;
    let d = ladder.first().map_or(0.0, |pd| pd.d);
    let per_rho: Vec<AngleVerdicts> = ladder
        .iter()
        .map(|pd| {
            let threshold = c3 * pd.rho.powf(1.0 - 2.0 * d) / epsilon;
            let counts = pair_counts(pd, &grid);
            let good: Vec<bool> = counts.iter().map(|&n| n as f64 <= threshold).collect();
            let bad = good.iter().filter(|g| !**g).count();
            AngleVerdicts { rho: pd.rho, threshold, counts, good, bad_measure: bad as f64 * cell_width }
        })
        .collect();
    let tail = tail.min(per_rho.len());
    let persistent = (0..grid.len()).map(|k| per_rho[per_rho.len() - tail..].iter().all(|v| v.good[k])).collect();
    GoodAngleReport { epsilon, c3, d, grid, cell_width, per_rho, tail, persistent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{presets, CantorSet};
    use crate::decomposition::product_decompose;
    use crate::projection::{count_overlapping_pairs, energy, EnergyOptions};

    fn ladder() -> (Vec<ProductDecomposition>, Vec<EnergyReport>) {
        let c = CantorSet::new(presets::middle_third()).unwrap();
        let pds: Vec<_> = (3..=5).map(|k| product_decompose(&c, &c, 3f64.powi(-k), 1 << 20).unwrap()).collect();
        let opts = EnergyOptions { quadrature_points: 0, ..Default::default() };
        let reports = pds.iter().map(|pd| energy(pd, &opts)).collect();
        (pds, reports)
    }

    #[test]
    fn bad_measure_obeys_chebyshev() {
        let (pds, reports) = ladder();
        let c3 = measured_c3(&reports, pds[0].d);
        let eps = 0.1;
        let rep = good_angles(&pds, c3, eps, 512, 3);
        for v in &rep.per_rho {
            assert!(v.bad_measure <= eps * 1.05 + 2.0 * rep.cell_width, "{}", v.bad_measure);
        }
        assert!(!rep.persistent_angles().is_empty());
    }

    #[test]
    fn vacuous_epsilon_makes_everything_good() {
        let (pds, reports) = ladder();
        let d = pds[0].d;
        let c3 = measured_c3(&reports, d);
        let grid = 256;
        let eps = pds
            .iter()
            .map(|pd| {
                let max_n = pair_counts(pd, &Angle::grid(grid)).into_iter().max().unwrap() as f64;
                c3 * pd.rho.powf(1.0 - 2.0 * d) / max_n
            })
            .fold(f64::INFINITY, f64::min);
        let rep = good_angles(&pds, c3, eps, grid, 3);
        assert!(rep.persistent.iter().all(|&p| p));
        assert_eq!(rep.max_bad_measure(), 0.0);
    }

    #[test]
    fn horizontal_direction_fails_any_fixed_epsilon_eventually() {
        let (pds, reports) = ladder();
        let d = pds[0].d;
        let c3 = measured_c3(&reports, d);
        // 0 stays good only while epsilon <= c3 rho^(1-2d) / N(0)
        let ratios: Vec<f64> = pds
            .iter()
            .map(|pd| count_overlapping_pairs(pd, Angle::ZERO) as f64 / (c3 * pd.rho.powf(1.0 - 2.0 * d)))
            .collect();
        for w in ratios.windows(2) {
            let growth = w[1] / w[0];
            assert!((1.3..1.7).contains(&growth), "{ratios:?}");
        }
        let pd = pds.last().unwrap();
        let eps = 2.0 / ratios.last().unwrap();
        let rep = good_angles(std::slice::from_ref(pd), c3, eps, 2, 1);
        assert!(count_overlapping_pairs(pd, Angle::ZERO) as f64 > rep.per_rho[0].threshold);
    }
}
