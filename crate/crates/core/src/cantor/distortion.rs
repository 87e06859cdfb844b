use serde::{Deserialize, Serialize};

use super::{CantorSet, Step};

/// Depth of the cylinders whose endpoints serve as sample points of `K`.
const POINT_DEPTH: usize = 6;
/// Maximum number of depth-`n` words examined; larger depths are strided.
const WORD_BUDGET: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionEstimate {
    /// `max |log|(psi^n)'(x)| - log|(psi^n)'(y)||` over the sampled pairs.
    pub constant: f64,
    pub pairs: usize,
    /// True when no sampled pair met the separation condition.
    pub empty: bool,
}

/// Measured bounded-distortion constant at separation `delta` and depth `n`.
///
/// Pairs `(x, y)` share a depth-`n` cylinder (so the segments between their
/// first `n` iterates stay inside the partition) and their `n`-th iterates
/// are sample points of `K` closer than `delta`. Sample points are the
/// endpoints of the depth-6 cylinders; each `x` is rebuilt from its
/// `n`-th iterate by the inverse branches, and `log|(psi^n)'(x)|` is summed
/// along that backward orbit.
pub fn distortion_constant(set: &CantorSet, delta: f64, n: usize) -> DistortionEstimate {
    let spec = set.spec();
    if set.is_affine() {
        return DistortionEstimate { constant: 0.0, pairs: 0, empty: false };
    }
    let r = spec.symbols();
    let mut points = Vec::new();
    set.walk(POINT_DEPTH, |c| {
        if c.depth() == POINT_DEPTH {
            points.push((c.interval.lo, c.word[0] as usize));
            points.push((c.interval.hi, c.word[0] as usize));
            Step::Skip
        } else {
            Step::Descend
        }
    });
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0);

    // points reachable after each final symbol
    let by_last: Vec<Vec<f64>> =
        (0..r).map(|last| points.iter().filter(|(_, s)| spec.allowed(last, *s)).map(|(z, _)| *z).collect()).collect();

    let total_words = spec.word_count(n);
    let stride = (total_words / WORD_BUDGET as u128).max(1);
    let mut words = Vec::new();
    let mut index: u128 = 0;
    set.walk(n, |c| {
        if c.depth() == n {
            if index.is_multiple_of(stride) {
                words.push(c.word.clone());
            }
            index += 1;
            Step::Skip
        } else {
            Step::Descend
        }
    });

    let mut constant = 0.0f64;
    let mut pairs = 0usize;
    for word in &words {
        let last = *word.last().unwrap() as usize;
        let zs = &by_last[last];
        let logs: Vec<f64> = zs.iter().map(|&z| log_derivative_along(set, word, z)).collect();
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                if zs[j] - zs[i] >= delta {
                    break;
                }
                pairs += 1;
                constant = constant.max((logs[i] - logs[j]).abs());
            }
        }
    }
    DistortionEstimate { constant, pairs, empty: pairs == 0 }
}

/// `log|(psi^n)'(x)|` for the point `x` of the cylinder `word` with
/// `psi^n(x) = z`.
fn log_derivative_along(set: &CantorSet, word: &[u16], z: f64) -> f64 {
    let spec = set.spec();
    let mut point = z;
    let mut sum = 0.0;
    for &sym in word.iter().rev() {
        let s = sym as usize;
        let dom = spec.intervals[s];
        let branch = &spec.branches[s];
        point = branch.inverse(point, dom.lo, dom.hi);
        sum += branch.derivative(point).abs().ln();
    }
    sum
}
