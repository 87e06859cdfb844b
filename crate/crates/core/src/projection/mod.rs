//! Angular machinery: orthogonal projections `proj_θ(x, y) = x cos θ + y sin θ`
//! for θ in `[-π/2, π/2]`, exact overlap angle sets of two squares, and the
//! overlapping-pair count `N(θ)` of a product decomposition.

mod energy;
mod good;
mod profile;

pub use energy::{energy, lemma5_sample, Annulus, EnergyOptions, EnergyReport, Lemma5Report};
pub use good::{good_angles, measured_c3, AngleVerdicts, GoodAngleReport};
pub use profile::{bucket_profile, BucketGrid, ProjectionProfile};

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{ProductDecomposition, Square};
use crate::error::{Error, Result};
use crate::interval::{merge_intervals, Interval};

/// Direction angle in `[-π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const MIN: Angle = Angle(-FRAC_PI_2);
    pub const MAX: Angle = Angle(FRAC_PI_2);
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if (-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
            Ok(Angle(theta))
        } else {
            Err(Error::AngleOutOfRange(theta))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `(cos θ, sin θ)`, exact at the range endpoints.
    pub fn direction(self) -> (f64, f64) {
        direction(self.0)
    }

    pub fn project(self, x: f64, y: f64) -> f64 {
        let (c, s) = self.direction();
        x * c + y * s
    }

    /// Midpoints of `n` equal cells of `[-π/2, π/2]`.
    pub fn grid(n: usize) -> Vec<Angle> {
        let h = PI / n as f64;
        (0..n).map(|k| Angle(-FRAC_PI_2 + (k as f64 + 0.5) * h)).collect()
    }
}

fn direction(theta: f64) -> (f64, f64) {
    if theta == FRAC_PI_2 {
        (0.0, 1.0)
    } else if theta == -FRAC_PI_2 {
        (0.0, -1.0)
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Finite union of disjoint closed angle intervals, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    intervals: Vec<Interval>,
}

impl AngleSet {
    pub fn from_intervals(intervals: Vec<Interval>) -> Self {
        AngleSet { intervals: merge_intervals(intervals) }
    }

    pub fn full() -> Self {
        AngleSet { intervals: vec![Interval::new(-FRAC_PI_2, FRAC_PI_2)] }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains_point(theta))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// `proj_θ(Q)`.
pub fn project_square(q: &Square, angle: Angle) -> Interval {
    let (c, s) = angle.direction();
    project_box(q.x, q.y, c, s)
}

fn project_box(x: Interval, y: Interval, c: f64, s: f64) -> Interval {
    let (a, b) = (x.lo * c, x.hi * c);
    let (p, q) = (y.lo * s, y.hi * s);
    Interval::new(a.min(b) + p.min(q), a.max(b) + p.max(q))
}

/// Whether `proj_θ(D)` contains 0, for the difference box `D = Q - Q̃`.
fn straddles(dx: Interval, dy: Interval, c: f64, s: f64, tol: f64) -> bool {
    let p = project_box(dx, dy, c, s);
    p.lo <= tol && p.hi >= -tol
}

/// Exact set of θ where `proj_θ(Q)` and `proj_θ(Q̃)` intersect.
///
/// The projections meet iff the line `x cos θ + y sin θ = 0` meets the
/// difference box `Q - Q̃`, so the answer can only change where that line
/// passes through one of the box's four corners.
pub fn overlap_angles(q: &Square, other: &Square) -> AngleSet {
    let dx = Interval::new(q.x.lo - other.x.hi, q.x.hi - other.x.lo);
    let dy = Interval::new(q.y.lo - other.y.hi, q.y.hi - other.y.lo);
    if dx.contains_point(0.0) && dy.contains_point(0.0) {
        return AngleSet::full();
    }
    let mut cuts = Vec::with_capacity(8);
    cuts.extend([-FRAC_PI_2, FRAC_PI_2]);
    let mut scale = 0.0f64;
    for cx in [dx.lo, dx.hi] {
        for cy in [dy.lo, dy.hi] {
            scale = scale.max(cx.abs()).max(cy.abs());
            let mut root = cy.atan2(cx) + FRAC_PI_2;
            if root > FRAC_PI_2 {
                root -= PI;
            }
            cuts.push(root.clamp(-FRAC_PI_2, FRAC_PI_2));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let point_tol = 64.0 * f64::EPSILON * scale;
    let mut pieces = Vec::new();
    for (k, &a) in cuts.iter().enumerate() {
        let (c, s) = direction(a);
        if straddles(dx, dy, c, s, point_tol) {
            pieces.push(Interval::new(a, a));
        }
        if let Some(&b) = cuts.get(k + 1) {
            let (c, s) = direction(0.5 * (a + b));
            if straddles(dx, dy, c, s, 0.0) {
                pieces.push(Interval::new(a, b));
            }
        }
    }
    AngleSet::from_intervals(pieces)
}

/// Ordered count of intersecting pairs (diagonal included) among closed
/// intervals given by their endpoint lists. Consumes the buffers.
pub fn ordered_overlap_count(mut starts: Vec<f64>, mut ends: Vec<f64>) -> u64 {
    debug_assert_eq!(starts.len(), ends.len());
    starts.sort_unstable_by(f64::total_cmp);
    ends.sort_unstable_by(f64::total_cmp);
    let mut ended = 0usize;
    let mut unordered = 0u64;
    for (i, &s) in starts.iter().enumerate() {
        while ended < ends.len() && ends[ended] < s {
            ended += 1;
        }
        unordered += (i - ended) as u64;
    }
    2 * unordered + starts.len() as u64
}

/// Same as [`ordered_overlap_count`] for a slice of intervals.
pub fn count_interval_overlaps(intervals: &[Interval]) -> u64 {
    ordered_overlap_count(intervals.iter().map(|i| i.lo).collect(), intervals.iter().map(|i| i.hi).collect())
}

/// Per-factor projections of a product decomposition at one angle. A
/// square's projection is the sum of the projections of its two sides.
pub(crate) struct FactorProjections {
    x: Vec<Interval>,
    y: Vec<Interval>,
    x_rep: Vec<f64>,
    y_rep: Vec<f64>,
}

impl FactorProjections {
    pub(crate) fn new(pd: &ProductDecomposition, angle: Angle) -> Self {
        let (c, s) = angle.direction();
        let side = |iv: &Interval, f: f64| {
            let (a, b) = (iv.lo * f, iv.hi * f);
            Interval::new(a.min(b), a.max(b))
        };
        FactorProjections {
            x: pd.x.pieces.iter().map(|p| side(&p.interval, c)).collect(),
            y: pd.y.pieces.iter().map(|p| side(&p.interval, s)).collect(),
            x_rep: pd.x.pieces.iter().map(|p| p.interval.mid() * c).collect(),
            y_rep: pd.y.pieces.iter().map(|p| p.interval.mid() * s).collect(),
        }
    }

    pub(crate) fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.x.iter().flat_map(move |a| self.y.iter().map(move |b| Interval::new(a.lo + b.lo, a.hi + b.hi)))
    }

    pub(crate) fn reps(&self) -> impl Iterator<Item = f64> + '_ {
        self.x_rep.iter().flat_map(move |a| self.y_rep.iter().map(move |b| a + b))
    }

    pub(crate) fn pair_count(&self) -> u64 {
        let n = self.x.len() * self.y.len();
        let mut starts = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        for iv in self.intervals() {
            starts.push(iv.lo);
            ends.push(iv.hi);
        }
        ordered_overlap_count(starts, ends)
    }
}

/// `N(θ)`: ordered pairs of squares whose θ-projections intersect.
pub fn count_overlapping_pairs(pd: &ProductDecomposition, angle: Angle) -> u64 {
    FactorProjections::new(pd, angle).pair_count()
}

/// `N(θ)` for every angle, in input order.
pub fn pair_counts(pd: &ProductDecomposition, angles: &[Angle]) -> Vec<u64> {
    angles.par_iter().map(|&a| count_overlapping_pairs(pd, a)).collect()
}

/// Midpoint rule for `∫ N(θ) dθ` over `points` cells of `[-π/2, π/2]`.
pub fn quadrature_energy(pd: &ProductDecomposition, points: usize) -> f64 {
    let total: u128 = pair_counts(pd, &Angle::grid(points)).into_iter().map(u128::from).sum();
    total as f64 * PI / points as f64
}
