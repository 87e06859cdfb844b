//! ρ-decompositions of a Cantor set and of the product `K1 × K2`.
//!
//! Among the many valid ρ-decompositions this module always builds the same
//! one: walk the cylinder tree depth-first and emit a cylinder at the first
//! depth where its length is at most `lambda * rho`. Since every child is at
//! least `1/lambda` of its parent, emitted pieces below depth 1 are
//! automatically at least `rho` long.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::{format_word, CantorSet, Cylinder, Step, TOL};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::output::fmt_float;

/// Default cap on pieces in a one-dimensional decomposition.
pub const DEFAULT_MAX_PIECES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoDecomposition {
    pub rho: f64,
    pub lambda: f64,
    /// Sorted by left endpoint.
    pub pieces: Vec<Cylinder>,
}

impl RhoDecomposition {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.pieces.iter().map(|p| p.weight).sum()
    }

    /// Number of pieces contained in `[lo, hi]`.
    pub fn count_inside(&self, lo: f64, hi: f64) -> usize {
        let first = self.pieces.partition_point(|p| p.interval.lo < lo);
        let end = self.pieces.partition_point(|p| p.interval.hi <= hi);
        end.saturating_sub(first)
    }

    /// Index of a piece containing `iv`, if any.
    fn container_of(&self, iv: &Interval, tol: f64) -> Option<usize> {
        let idx = self.pieces.partition_point(|p| p.interval.lo <= iv.lo + tol);
        (idx > 0 && self.pieces[idx - 1].interval.contains(iv, tol)).then(|| idx - 1)
    }
}

pub fn decompose(set: &CantorSet, rho: f64, max_pieces: usize) -> Result<RhoDecomposition> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidRho(rho));
    }
    let lambda = set.lambda();
    for (index, iv) in set.spec().intervals.iter().enumerate() {
        if iv.len() < rho * (1.0 - TOL) {
            return Err(Error::RhoTooLarge { rho, index, length: iv.len() });
        }
    }
    let upper = lambda * rho * (1.0 + TOL);
    let mut pieces = Vec::new();
    let mut overflow = false;
    set.walk(usize::MAX, |c| {
        if overflow {
            Step::Skip
        } else if c.len() <= upper {
            debug_assert!(c.len() >= rho * (1.0 - TOL));
            pieces.push(c.clone());
            overflow = pieces.len() > max_pieces;
            Step::Skip
        } else {
            Step::Descend
        }
    });
    if overflow {
        return Err(Error::BudgetExceeded {
            what: "decomposition pieces",
            actual: pieces.len() as u128,
            cap: max_pieces as u128,
        });
    }
    pieces.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
    Ok(RhoDecomposition { rho, lambda, pieces })
}

/// Rectangle `Q = I × J` of a product decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub x: Interval,
    pub y: Interval,
    pub weight: f64,
    /// Centre of the two cylinder intervals.
    pub rep: (f64, f64),
    pub ix: usize,
    pub iy: usize,
}

impl Square {
    pub fn new(x: Interval, y: Interval) -> Self {
        Square { x, y, weight: 0.0, rep: (x.mid(), y.mid()), ix: 0, iy: 0 }
    }

    /// Box-norm diameter.
    pub fn diameter(&self) -> f64 {
        self.x.len().max(self.y.len())
    }

    pub fn contains(&self, other: &Square, tol: f64) -> bool {
        self.x.contains(&other.x, tol) && self.y.contains(&other.y, tol)
    }
}

/// Box-norm distance between two points.
pub fn sup_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Cartesian product of two ρ-decompositions; squares are indexed
/// lexicographically by `(x piece, y piece)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDecomposition {
    pub rho: f64,
    /// `max(lambda_1, lambda_2)`.
    pub lambda: f64,
    /// `d_1 + d_2`.
    pub d: f64,
    pub x: RhoDecomposition,
    pub y: RhoDecomposition,
}

impl ProductDecomposition {
    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn square(&self, k: usize) -> Square {
        let (ix, iy) = (k / self.y.len(), k % self.y.len());
        let (px, py) = (&self.x.pieces[ix], &self.y.pieces[iy]);
        Square {
            x: px.interval,
            y: py.interval,
            weight: px.weight * py.weight,
            rep: (px.interval.mid(), py.interval.mid()),
            ix,
            iy,
        }
    }

    pub fn squares(&self) -> impl Iterator<Item = Square> + '_ {
        (0..self.len()).map(move |k| self.square(k))
    }

    pub fn total_weight(&self) -> f64 {
        self.x.total_weight() * self.y.total_weight()
    }

    /// Writes `lo_x,hi_x,lo_y,hi_y,weight,word1,word2` rows after a `#`
    /// metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &str) -> std::io::Result<()> {
        writeln!(w, "# {meta}")?;
        writeln!(w, "lo_x,hi_x,lo_y,hi_y,weight,word1,word2")?;
        for px in &self.x.pieces {
            let w1 = format_word(&px.word);
            for py in &self.y.pieces {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    fmt_float(px.interval.lo),
                    fmt_float(px.interval.hi),
                    fmt_float(py.interval.lo),
                    fmt_float(py.interval.hi),
                    fmt_float(px.weight * py.weight),
                    w1,
                    format_word(&py.word)
                )?;
            }
        }
        Ok(())
    }
}

pub fn product_decompose(k1: &CantorSet, k2: &CantorSet, rho: f64, max_squares: usize) -> Result<ProductDecomposition> {
    let d = k1.dimension()?.d + k2.dimension()?.d;
    let x = decompose(k1, rho, max_squares)?;
    let y = decompose(k2, rho, max_squares)?;
    let count = x.len() as u128 * y.len() as u128;
    if count > max_squares as u128 {
        return Err(Error::BudgetExceeded { what: "product squares", actual: count, cap: max_squares as u128 });
    }
    Ok(ProductDecomposition { rho, lambda: x.lambda.max(y.lambda), d, x, y })
}

/// `fine ≺ coarse`: strictly smaller scale and every fine square lies inside
/// some coarse square.
pub fn refines(fine: &ProductDecomposition, coarse: &ProductDecomposition) -> bool {
    const CONTAIN_TOL: f64 = 1e-12;
    fine.rho < coarse.rho
        && fine.x.pieces.iter().all(|p| coarse.x.container_of(&p.interval, CONTAIN_TOL).is_some())
        && fine.y.pieces.iter().all(|p| coarse.y.container_of(&p.interval, CONTAIN_TOL).is_some())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSup {
    pub radius: f64,
    pub max_count: usize,
    pub sup_ratio: f64,
}

/// Measured cardinality constants of one product decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub rho: f64,
    pub d: f64,
    pub samples: usize,
    pub seed: u64,
    pub by_radius: Vec<RadiusSup>,
    /// `sup count * (rho / r)^d` over samples and radii.
    pub sup_ratio: f64,
    pub cardinality: usize,
    /// `#pd * rho^d`.
    pub scaled_cardinality: f64,
    /// Smallest `c2` consistent with both measured bounds.
    pub c2: f64,
}

/// Counts squares inside box-norm balls `B_r(x)` around the representative
/// points of `samples` random squares, for dyadic radii `1, 1/2, ...` down
/// to below `rho / 2`.
pub fn lemma4_check(pd: &ProductDecomposition, samples: usize, seed: u64) -> Lemma4Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pd.len();
    let chosen: Vec<usize> = sample(&mut rng, n, samples.min(n)).into_vec();
    let mut radii = Vec::new();
    let mut r = 1.0f64;
    while r >= pd.rho / 4.0 {
        radii.push(r);
        r *= 0.5;
    }
    let mut by_radius = Vec::with_capacity(radii.len());
    let mut sup_ratio = 0.0f64;
    for &r in &radii {
        let mut max_count = 0usize;
        for &k in &chosen {
            let (cx, cy) = pd.square(k).rep;
            let count = pd.x.count_inside(cx - r, cx + r) * pd.y.count_inside(cy - r, cy + r);
            max_count = max_count.max(count);
        }
        let ratio = max_count as f64 * (pd.rho / r).powf(pd.d);
        sup_ratio = sup_ratio.max(ratio);
        by_radius.push(RadiusSup { radius: r, max_count, sup_ratio: ratio });
    }
    let cardinality = n;
    let scaled_cardinality = n as f64 * pd.rho.powf(pd.d);
    let c2 = sup_ratio.max(scaled_cardinality).max(1.0 / scaled_cardinality);
    Lemma4Report {
        rho: pd.rho,
        d: pd.d,
        samples: chosen.len(),
        seed,
        by_radius,
        sup_ratio,
        cardinality,
        scaled_cardinality,
        c2,
    }
}

/// Largest `c2` over the finer half of a ladder (ordered coarse to fine)
/// divided by the largest over the coarser half. Values near or below 1
/// mean the constant is not growing under refinement.
pub fn c2_growth(reports: &[Lemma4Report]) -> f64 {
    let half = reports.len() / 2;
    let worst = |r: &[Lemma4Report]| r.iter().map(|r| r.c2).fold(0.0, f64::max);
    worst(&reports[half..]) / worst(&reports[..half])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::presets;
    use approx::assert_abs_diff_eq;

    fn mid() -> CantorSet {
        CantorSet::new(presets::middle_third()).unwrap()
    }

    #[test]
    fn middle_third_rho_ninth_stops_at_depth_one() {
        let dec = decompose(&mid(), 1.0 / 9.0, DEFAULT_MAX_PIECES).unwrap();
        assert_eq!(dec.len(), 2);
        for p in &dec.pieces {
            assert_abs_diff_eq!(p.len(), 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn middle_third_rho_27th_stops_at_depth_two() {
        let dec = decompose(&mid(), 1.0 / 27.0, DEFAULT_MAX_PIECES).unwrap();
        assert_eq!(dec.len(), 4);
        assert!(dec.pieces.iter().all(|p| (p.len() - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn off_grid_scale_gives_power_of_two() {
        for n in 1..8 {
            let rho = 3f64.powi(-(n + 1)) * 1.5;
            let dec = decompose(&mid(), rho, DEFAULT_MAX_PIECES).unwrap();
            assert_eq!(dec.len(), 1 << n);
        }
    }

    #[test]
    fn too_large_rho_is_rejected() {
        assert!(matches!(decompose(&mid(), 0.5, DEFAULT_MAX_PIECES), Err(Error::RhoTooLarge { index: 0, .. })));
        assert!(matches!(decompose(&mid(), -1.0, DEFAULT_MAX_PIECES), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn piece_budget_is_enforced() {
        assert!(matches!(decompose(&mid(), 3f64.powi(-12), 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn product_at_rho_27th() {
        let pd = product_decompose(&mid(), &mid(), 1.0 / 27.0, 1 << 20).unwrap();
        assert_eq!(pd.len(), 16);
        for q in pd.squares() {
            assert_abs_diff_eq!(q.weight, 1.0 / 16.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(pd.d, 2.0 * 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn product_at_depth_one_scale_is_partition_product() {
        let golden = CantorSet::new(presets::golden()).unwrap();
        let rho = 1.0 / 9.0;
        let pd = product_decompose(&golden, &mid(), rho, 1 << 20).unwrap();
        assert_eq!(pd.x.len(), 2);
        assert_eq!(pd.len(), 4);
    }

    #[test]
    fn refinement_order() {
        let a = product_decompose(&mid(), &mid(), 1.0 / 27.0, 1 << 20).unwrap();
        let b = product_decompose(&mid(), &mid(), 1.0 / 81.0, 1 << 20).unwrap();
        assert!(refines(&b, &a));
        assert!(!refines(&a, &b));
        assert!(!refines(&a, &a));
        let shifted = CantorSet::new(presets::shifted()).unwrap();
        let c = product_decompose(&shifted, &shifted, 1.0 / 81.0, 1 << 20).unwrap();
        assert!(!refines(&c, &a));
    }

    #[test]
    fn lemma4_small_and_whole_radius() {
        let pd = product_decompose(&mid(), &mid(), 3f64.powi(-5), 1 << 20).unwrap();
        let report = lemma4_check(&pd, 64, 7);
        for rs in &report.by_radius {
            if rs.radius < pd.rho {
                assert!(rs.max_count <= 1);
                assert!(rs.sup_ratio <= (pd.rho / rs.radius).powf(pd.d));
            }
        }
        let whole = report.by_radius.iter().find(|r| r.radius == 1.0).unwrap();
        assert_eq!(whole.max_count, pd.len());
        assert_abs_diff_eq!(report.scaled_cardinality, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn c2_is_stable_along_the_ladder() {
        let reports: Vec<Lemma4Report> = (4..=7)
            .map(|k| {
                let pd = product_decompose(&mid(), &mid(), 3f64.powi(-k), 1 << 20).unwrap();
                lemma4_check(&pd, 200, 11)
            })
            .collect();
        let growth = c2_growth(&reports);
        assert!(growth <= 1.5, "c2 = {:?}", reports.iter().map(|r| r.c2).collect::<Vec<_>>());
    }
}
