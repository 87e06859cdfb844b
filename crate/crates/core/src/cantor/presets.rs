//! Built-in specs used by tests, examples and the CLI (`builtin:<name>`).

use super::{Branch, CantorSpec};
use crate::interval::Interval;

fn full_shift(intervals: Vec<Interval>, branches: Vec<Branch>) -> CantorSpec {
    let r = intervals.len();
    CantorSpec { intervals, branches, transition: vec![vec![1; r]; r], holder_alpha: 1.0 }
}

/// Middle-third Cantor set: `[0, 1/3] ∪ [2/3, 1]`, both slopes 3.
pub fn middle_third() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.0, 1.0 / 3.0), Interval::new(2.0 / 3.0, 1.0)],
        vec![Branch::Affine { slope: 3.0, offset: 0.0 }, Branch::Affine { slope: 3.0, offset: -2.0 }],
    )
}

/// Two slope-2 branches on `[0, 1/2]` and `[1/2, 1]`; the set is `[0, 1]`.
pub fn full_interval() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.0, 0.5), Interval::new(0.5, 1.0)],
        vec![Branch::Affine { slope: 2.0, offset: 0.0 }, Branch::Affine { slope: 2.0, offset: -1.0 }],
    )
}

/// Two slope-4 branches on `[0, 1/4]` and `[3/4, 1]`; dimension 1/2.
pub fn quarter() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.0, 0.25), Interval::new(0.75, 1.0)],
        vec![Branch::Affine { slope: 4.0, offset: 0.0 }, Branch::Affine { slope: 4.0, offset: -3.0 }],
    )
}

/// Golden-mean shift: `B = [[1, 1], [1, 0]]`, both slopes 3, with
/// `I_1 = [0, 1/3]` onto `[0, 1]` and `I_2 = [8/9, 1]` onto `I_1`.
pub fn golden() -> CantorSpec {
    CantorSpec {
        intervals: vec![Interval::new(0.0, 1.0 / 3.0), Interval::new(8.0 / 9.0, 1.0)],
        branches: vec![Branch::Affine { slope: 3.0, offset: 0.0 }, Branch::Affine { slope: 3.0, offset: -8.0 / 3.0 }],
        transition: vec![vec![1, 1], vec![1, 0]],
        holder_alpha: 1.0,
    }
}

/// Unequal ratios with an orientation-reversing branch: slope 4 on
/// `[0, 1/4]`, slope -2 on `[1/2, 1]`.
pub fn asymmetric() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.0, 0.25), Interval::new(0.5, 1.0)],
        vec![Branch::affine_onto(0.0, 0.25, 0.0, 1.0, false), Branch::affine_onto(0.5, 1.0, 0.0, 1.0, true)],
    )
}

/// `[0.1, 0.4] ∪ [0.6, 0.9]`, both onto `[0.1, 0.9]`.
pub fn shifted() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.1, 0.4), Interval::new(0.6, 0.9)],
        vec![Branch::affine_onto(0.1, 0.4, 0.1, 0.9, false), Branch::affine_onto(0.6, 0.9, 0.1, 0.9, false)],
    )
}

/// Degenerate single-branch fixture: `psi(x) = 2x - 1/2` on `[1/4, 3/4]`;
/// the set is the fixed point `1/2` and has dimension 0.
pub fn single_point() -> CantorSpec {
    CantorSpec {
        intervals: vec![Interval::new(0.25, 0.75)],
        branches: vec![Branch::Affine { slope: 2.0, offset: -0.5 }],
        transition: vec![vec![1]],
        holder_alpha: 1.0,
    }
}

/// Nonlinear demo: cubic perturbations of the doubling-type map on
/// `[0, 0.4] ∪ [0.6, 1]`, both branches onto `[0, 1]`.
pub fn cubic_doubling() -> CantorSpec {
    full_shift(
        vec![Interval::new(0.0, 0.4), Interval::new(0.6, 1.0)],
        vec![Branch::cubic_profile(0.0, 0.4, 0.0, 1.0, 0.5), Branch::cubic_profile(0.6, 1.0, 0.0, 1.0, -0.4)],
    )
}

pub const NAMES: &[&str] =
    &["middle-third", "full-interval", "quarter", "golden", "asymmetric", "shifted", "single-point", "cubic-doubling"];

pub fn by_name(name: &str) -> Option<CantorSpec> {
    Some(match name {
        "middle-third" => middle_third(),
        "full-interval" => full_interval(),
        "quarter" => quarter(),
        "golden" => golden(),
        "asymmetric" => asymmetric(),
        "shifted" => shifted(),
        "single-point" => single_point(),
        "cubic-doubling" => cubic_doubling(),
        _ => return None,
    })
}
