//! Regular Cantor sets given by a Markov partition and an expanding map.
//!
//! A [`CantorSpec`] is the raw description (partition intervals, one branch
//! per interval, a 0/1 transition matrix). [`CantorSet::new`] validates it
//! and, for affine specs, attaches the similarity dimension and the
//! dimension-weighted Perron measure used as the reference measure on
//! cylinders.

mod branch;
mod cylinder;
mod dimension;
mod distortion;
mod measure;
pub mod perron;
pub mod presets;

pub use branch::Branch;
pub use cylinder::{format_word, Cylinder};
pub use dimension::{solve_dimension, DimensionResult, DIMENSION_TOLERANCE};
pub use distortion::{distortion_constant, DistortionEstimate};
pub use measure::ReferenceMeasure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Tolerance for invariant checks on interval endpoints.
pub const TOL: f64 = 1e-9;

/// Default cap on the number of cylinders enumerated at a single depth.
pub const DEFAULT_WORD_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub intervals: Vec<Interval>,
    pub branches: Vec<Branch>,
    pub transition: Vec<Vec<u8>>,
    pub holder_alpha: f64,
}

impl CantorSpec {
    pub fn symbols(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    pub fn allowed(&self, from: usize, to: usize) -> bool {
        self.transition[from][to] == 1
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.transition[from].iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| j)
    }

    /// Number of admissible words of length `n` (saturating).
    pub fn word_count(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let r = self.symbols();
        let mut ends = vec![1u128; r];
        for _ in 1..n {
            let mut next = vec![0u128; r];
            for (i, &c) in ends.iter().enumerate() {
                for j in self.successors(i) {
                    next[j] = next[j].saturating_add(c);
                }
            }
            ends = next;
        }
        ends.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }
}

/// Checks every structural condition on a spec and returns it unchanged.
///
/// Partition intervals may share an endpoint (their interiors must be
/// disjoint), so that `[0, 1/2] ∪ [1/2, 1]` describes the full interval.
/// The Markov condition requires `psi(I_i) ⊇ I_j` when `b_ij = 1`, no
/// interior overlap when `b_ij = 0`, and, for `r >= 2`, that `psi(I_i)`
/// equals the convex hull of its successors.
pub fn validate_spec(spec: CantorSpec) -> Result<CantorSpec> {
    let r = spec.intervals.len();
    if r == 0 {
        return Err(Error::InvalidSpec("no partition intervals".into()));
    }
    if spec.branches.len() != r {
        return Err(Error::InvalidSpec(format!("{} intervals but {} branches", r, spec.branches.len())));
    }
    if spec.transition.len() != r || spec.transition.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidSpec(format!("transition matrix must be {r}x{r}")));
    }
    if spec.transition.iter().flatten().any(|&b| b > 1) {
        return Err(Error::InvalidSpec("transition entries must be 0 or 1".into()));
    }
    if !(spec.holder_alpha.is_finite() && spec.holder_alpha > 0.0) {
        return Err(Error::InvalidSpec(format!("holder alpha must be > 0, got {}", spec.holder_alpha)));
    }
    for (i, iv) in spec.intervals.iter().enumerate() {
        if !(iv.lo.is_finite() && iv.hi.is_finite() && 0.0 <= iv.lo && iv.lo < iv.hi && iv.hi <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "interval {i} = [{}, {}] is not a nondegenerate subinterval of [0, 1]",
                iv.lo, iv.hi
            )));
        }
    }
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| spec.intervals[a].lo.total_cmp(&spec.intervals[b].lo));
    for w in order.windows(2) {
        let (a, b) = (spec.intervals[w[0]], spec.intervals[w[1]]);
        if b.lo < a.hi {
            return Err(Error::OverlappingIntervals { first: w[0].min(w[1]), second: w[0].max(w[1]) });
        }
    }
    for (i, row) in spec.transition.iter().enumerate() {
        if row.iter().all(|&b| b == 0) {
            return Err(Error::DeadSymbol { index: i });
        }
    }
    for (i, (branch, iv)) in spec.branches.iter().zip(&spec.intervals).enumerate() {
        let min_derivative = branch.min_abs_derivative(iv.lo, iv.hi);
        if min_derivative.is_nan() || min_derivative <= 1.0 {
            return Err(Error::NonExpandingBranch { index: i, min_derivative });
        }
    }
    for (i, (branch, iv)) in spec.branches.iter().zip(&spec.intervals).enumerate() {
        let (ilo, ihi) = branch.image(iv.lo, iv.hi);
        let image = Interval::new(ilo, ihi);
        let mut hull: Option<Interval> = None;
        for (j, target) in spec.intervals.iter().enumerate() {
            if spec.allowed(i, j) {
                if !image.contains(target, TOL) {
                    return Err(Error::MarkovImageMismatch {
                        index: i,
                        detail: format!("psi(I_{}) = [{ilo}, {ihi}] does not contain I_{}", i + 1, j + 1),
                    });
                }
                hull = Some(match hull {
                    None => *target,
                    Some(h) => Interval::new(h.lo.min(target.lo), h.hi.max(target.hi)),
                });
            } else if image.overlap_len(target) > TOL {
                return Err(Error::MarkovImageMismatch {
                    index: i,
                    detail: format!("psi(I_{}) meets I_{} although b = 0", i + 1, j + 1),
                });
            }
        }
        if r >= 2 {
            let hull = hull.expect("no dead symbols");
            if (hull.lo - ilo).abs() > TOL || (hull.hi - ihi).abs() > TOL {
                return Err(Error::MarkovImageMismatch {
                    index: i,
                    detail: format!(
                        "psi(I_{}) = [{ilo}, {ihi}] differs from the hull [{}, {}] of its successors",
                        i + 1,
                        hull.lo,
                        hull.hi
                    ),
                });
            }
        }
    }
    Ok(spec)
}

/// Expansion bound `lambda`.
///
/// `lambda >= sup |psi'|`, and it is also large enough that every child
/// cylinder has length at least `|parent| / lambda`. A child `I_{aj}` and its
/// parent `I_a` are images of `I_j` and `psi(I_{a_n})` under the same inverse
/// composition, so their length ratio is `|I_j| / |psi(I_{a_n})|` up to the
/// distortion of that composition (zero for affine branches; see
/// [`distortion_bound`] otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionBound {
    pub lambda: f64,
}

impl ExpansionBound {
    pub fn of(spec: &CantorSpec) -> Self {
        let pairs = || spec.branches.iter().zip(&spec.intervals);
        let sup_derivative = pairs().map(|(b, iv)| b.max_abs_derivative(iv.lo, iv.hi)).fold(1.0f64, f64::max);
        let distortion = if spec.is_affine() { 0.0 } else { distortion_bound(spec) };
        let mut ratio = 1.0f64;
        for (i, (b, iv)) in pairs().enumerate() {
            let (lo, hi) = b.image(iv.lo, iv.hi);
            for j in spec.successors(i) {
                ratio = ratio.max((hi - lo) / spec.intervals[j].len());
            }
        }
        ExpansionBound { lambda: sup_derivative.max(ratio * distortion.exp()) }
    }
}

const DISTORTION_DEPTH: usize = 10;

/// Upper bound on `|log |(psi^n)'(x)| - log |(psi^n)'(y)||` for `x, y` in a
/// common `n`-cylinder, uniformly in `n`. The `k`-th term of the chain rule
/// sum lives on an `(n-k)`-cylinder, so the total is at most the sum over
/// depths `m` of the largest oscillation of `log |psi'|` on an `m`-cylinder.
/// Depths up to [`DISTORTION_DEPTH`] are evaluated exactly; beyond that the
/// oscillation is at most `L |J|` with `L = sup |psi''| / inf |psi'|`, and
/// cylinder lengths shrink at least geometrically by `mu = inf |psi'|`.
fn distortion_bound(spec: &CantorSpec) -> f64 {
    let pairs = || spec.branches.iter().zip(&spec.intervals);
    let mu = pairs().map(|(b, iv)| b.min_abs_derivative(iv.lo, iv.hi)).fold(f64::INFINITY, f64::min);
    let lip = pairs()
        .map(|(b, iv)| b.max_abs_second_derivative(iv.lo, iv.hi) / b.min_abs_derivative(iv.lo, iv.hi))
        .fold(0.0f64, f64::max);
    let probe = CantorSet {
        spec: spec.clone(),
        expansion: ExpansionBound { lambda: f64::INFINITY },
        dimension: None,
        measure: None,
    };
    let mut osc = [0.0f64; DISTORTION_DEPTH + 1];
    let mut max_len = [0.0f64; DISTORTION_DEPTH + 1];
    probe.walk(DISTORTION_DEPTH, |c| {
        let m = c.depth();
        let branch = &spec.branches[c.word[0] as usize];
        let lo = branch.min_abs_derivative(c.interval.lo, c.interval.hi);
        let hi = branch.max_abs_derivative(c.interval.lo, c.interval.hi);
        osc[m] = osc[m].max((hi / lo).ln());
        max_len[m] = max_len[m].max(c.len());
        Step::Descend
    });
    osc.iter().sum::<f64>() + lip * max_len[DISTORTION_DEPTH] / (mu - 1.0)
}

/// A validated spec together with its expansion bound and, for affine
/// specs, its dimension and reference measure.
#[derive(Debug, Clone)]
pub struct CantorSet {
    spec: CantorSpec,
    expansion: ExpansionBound,
    dimension: Option<DimensionResult>,
    measure: Option<ReferenceMeasure>,
}

impl CantorSet {
    pub fn new(spec: CantorSpec) -> Result<Self> {
        let spec = validate_spec(spec)?;
        let expansion = ExpansionBound::of(&spec);
        let (dimension, measure) = if spec.is_affine() {
            let dim = solve_dimension(&spec)?;
            let measure = ReferenceMeasure::new(&spec, dim.d)?;
            (Some(dim), Some(measure))
        } else {
            (None, None)
        };
        Ok(CantorSet { spec, expansion, dimension, measure })
    }

    pub fn spec(&self) -> &CantorSpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.expansion.lambda
    }

    pub fn expansion(&self) -> ExpansionBound {
        self.expansion
    }

    pub fn is_affine(&self) -> bool {
        self.spec.is_affine()
    }

    pub fn dimension(&self) -> Result<DimensionResult> {
        self.dimension.ok_or(Error::NonAffineSpec)
    }

    pub fn measure(&self) -> Result<&ReferenceMeasure> {
        self.measure.as_ref().ok_or(Error::NonAffineSpec)
    }

    /// Interval of the cylinder with the given word, by composing inverse
    /// branches from the innermost symbol outwards.
    pub fn cylinder_interval(&self, word: &[u16]) -> Interval {
        let last = *word.last().expect("nonempty word") as usize;
        let mut iv = self.spec.intervals[last];
        for &sym in word[..word.len() - 1].iter().rev() {
            let s = sym as usize;
            let dom = self.spec.intervals[s];
            let b = &self.spec.branches[s];
            let a = b.inverse(iv.lo, dom.lo, dom.hi);
            let c = b.inverse(iv.hi, dom.lo, dom.hi);
            iv = Interval::new(a.min(c), a.max(c));
        }
        iv
    }

    /// Reference-measure weight of a cylinder, or NaN for non-affine sets.
    pub fn cylinder_weight(&self, word: &[u16]) -> f64 {
        match &self.measure {
            Some(m) => m.weight(word),
            None => f64::NAN,
        }
    }

    /// Depth-first walk over admissible cylinders in lexicographic word
    /// order. The visitor decides, per cylinder, whether to emit it, descend
    /// into its children, or skip it.
    pub fn walk<F>(&self, max_depth: usize, mut visit: F)
    where
        F: FnMut(&Cylinder) -> Step,
    {
        cylinder::walk(self, max_depth, &mut visit)
    }

    /// All cylinders of depth `n`, in lexicographic word order.
    pub fn cylinders_at_depth(&self, n: usize, cap: u128) -> Result<Vec<Cylinder>> {
        if n == 0 {
            return Err(Error::InvalidSpec("cylinder depth must be >= 1".into()));
        }
        let count = self.spec.word_count(n);
        if count > cap {
            return Err(Error::DepthOverflow { depth: n, count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        self.walk(n, |c| {
            if c.depth() == n {
                out.push(c.clone());
                Step::Skip
            } else {
                Step::Descend
            }
        });
        Ok(out)
    }

    /// Random admissible word of length `n` from a uniform choice of
    /// successor at each step.
    pub fn random_word<R: rand::Rng>(&self, n: usize, rng: &mut R) -> Vec<u16> {
        let r = self.spec.symbols();
        let mut word = Vec::with_capacity(n);
        let mut cur = rng.random_range(0..r);
        word.push(cur as u16);
        for _ in 1..n {
            let succ: Vec<usize> = self.spec.successors(cur).collect();
            cur = succ[rng.random_range(0..succ.len())];
            word.push(cur as u16);
        }
        word
    }
}

/// Visitor decision in [`CantorSet::walk`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Descend,
    Skip,
}

#[cfg(test)]
mod tests {
    use super::presets;
    use super::*;

    #[test]
    fn middle_third_is_valid() {
        assert!(validate_spec(presets::middle_third()).is_ok());
    }

    #[test]
    fn shallow_slope_is_rejected() {
        let mut spec = presets::middle_third();
        spec.branches[0] = Branch::Affine { slope: 0.9, offset: 0.0 };
        assert!(matches!(validate_spec(spec), Err(Error::NonExpandingBranch { index: 0, .. })));
    }

    #[test]
    fn dead_symbol_is_rejected() {
        let mut spec = presets::middle_third();
        spec.transition = vec![vec![1, 1], vec![0, 0]];
        assert!(matches!(validate_spec(spec), Err(Error::DeadSymbol { index: 1 })));
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        let mut spec = presets::middle_third();
        spec.intervals[1] = Interval::new(0.3, 1.0);
        assert!(matches!(validate_spec(spec), Err(Error::OverlappingIntervals { first: 0, second: 1 })));
    }

    #[test]
    fn image_mismatch_is_rejected() {
        let mut spec = presets::middle_third();
        // expands onto [0, 1.2]: not the hull of I_1 ∪ I_2
        spec.branches[0] = Branch::Affine { slope: 3.6, offset: 0.0 };
        assert!(matches!(validate_spec(spec), Err(Error::MarkovImageMismatch { index: 0, .. })));
    }

    #[test]
    fn zero_entry_with_overlapping_image_is_rejected() {
        let mut spec = presets::middle_third();
        spec.transition[0] = vec![1, 0];
        assert!(matches!(validate_spec(spec), Err(Error::MarkovImageMismatch { index: 0, .. })));
    }

    #[test]
    fn touching_intervals_are_allowed() {
        assert!(validate_spec(presets::full_interval()).is_ok());
    }

    #[test]
    fn single_branch_fixture_is_allowed() {
        let set = CantorSet::new(presets::single_point()).unwrap();
        assert_eq!(set.dimension().unwrap().d, 0.0);
    }

    #[test]
    fn nonlinear_demo_is_valid_and_has_no_measure() {
        let set = CantorSet::new(presets::cubic_doubling()).unwrap();
        assert!(matches!(set.dimension(), Err(Error::NonAffineSpec)));
        assert!(set.lambda() >= 3.75);
        assert!(set.lambda() < 64.0, "{}", set.lambda());
    }

    #[test]
    fn expansion_bound_covers_unequal_successors() {
        let golden = ExpansionBound::of(&presets::golden());
        assert!((golden.lambda - 9.0).abs() < 1e-12);
        assert_eq!(ExpansionBound::of(&presets::middle_third()).lambda, 3.0);
        assert_eq!(ExpansionBound::of(&presets::asymmetric()).lambda, 4.0);
    }

    #[test]
    fn word_counts_follow_matrix_powers() {
        let golden = presets::golden();
        // Fibonacci: 2, 3, 5, 8, 13
        let counts: Vec<u128> = (1..=5).map(|n| golden.word_count(n)).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13]);
    }
}
