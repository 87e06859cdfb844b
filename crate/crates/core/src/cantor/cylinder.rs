use serde::{Deserialize, Serialize};

use super::{Branch, CantorSet, Step};
use crate::interval::Interval;

/// Cylinder `I_a` of an admissible word `a = (a_1, ..., a_n)`.
///
/// Symbols are stored zero-based; [`format_word`] prints them one-based.
/// `weight` is the reference-measure mass of the cylinder, NaN when the set
/// carries no reference measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub word: Vec<u16>,
    pub interval: Interval,
    pub weight: f64,
}

impl Cylinder {
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn len(&self) -> f64 {
        self.interval.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// One-based symbols joined by `.`, e.g. `1.2.2`.
pub fn format_word(word: &[u16]) -> String {
    let parts: Vec<String> = word.iter().map(|s| (s + 1).to_string()).collect();
    parts.join(".")
}

/// Composition of inverse branches `y -> scale * y + shift`, tracked only
/// when every branch is affine.
#[derive(Clone, Copy)]
struct AffineChain {
    scale: f64,
    shift: f64,
}

impl AffineChain {
    const IDENTITY: AffineChain = AffineChain { scale: 1.0, shift: 0.0 };

    fn apply(&self, iv: Interval) -> Interval {
        let a = self.scale * iv.lo + self.shift;
        let b = self.scale * iv.hi + self.shift;
        Interval::new(a.min(b), a.max(b))
    }

    /// `self ∘ g` where `g(y) = (y - offset) / slope`.
    fn then_inverse_of(&self, slope: f64, offset: f64) -> AffineChain {
        AffineChain { scale: self.scale / slope, shift: self.shift - self.scale * offset / slope }
    }
}

struct Frame {
    word: Vec<u16>,
    chain: Option<AffineChain>,
    /// Product of node factors over all symbols except the last.
    prefix_scale: f64,
}

pub(super) fn walk<F>(set: &CantorSet, max_depth: usize, visit: &mut F)
where
    F: FnMut(&Cylinder) -> Step,
{
    let spec = set.spec();
    let measure = set.measure.as_ref();
    let affine = spec.is_affine();
    let mut stack: Vec<Frame> = (0..spec.symbols())
        .rev()
        .map(|i| Frame { word: vec![i as u16], chain: affine.then_some(AffineChain::IDENTITY), prefix_scale: 1.0 })
        .collect();
    while let Some(frame) = stack.pop() {
        let last = *frame.word.last().unwrap() as usize;
        let interval = match frame.chain {
            Some(chain) => chain.apply(spec.intervals[last]),
            None => set.cylinder_interval(&frame.word),
        };
        let weight = match measure {
            Some(m) => frame.prefix_scale * m.terminal(last),
            None => f64::NAN,
        };
        let cyl = Cylinder { word: frame.word, interval, weight };
        let step = visit(&cyl);
        if step == Step::Descend && cyl.depth() < max_depth {
            let chain = frame.chain.map(|c| match spec.branches[last] {
                Branch::Affine { slope, offset } => c.then_inverse_of(slope, offset),
                Branch::Cubic { .. } => unreachable!("affine chain on a cubic branch"),
            });
            let prefix_scale = match measure {
                Some(m) => frame.prefix_scale * m.node_factor(last),
                None => f64::NAN,
            };
            let succ: Vec<usize> = spec.successors(last).collect();
            for &j in succ.iter().rev() {
                let mut word = cyl.word.clone();
                word.push(j as u16);
                stack.push(Frame { word, chain, prefix_scale });
            }
        }
    }
}
