use serde::{Deserialize, Serialize};

use super::perron::perron_right;
use super::{CantorSet, CantorSpec, Step};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Dimension-weighted Perron measure on cylinders.
///
/// With contraction ratios `rho_i = 1/|s_i|` and `q_i = rho_i^d`, the mass of
/// the cylinder `(a_1, ..., a_n)` is `q_{a_1} ... q_{a_{n-1}} v_{a_n}`, where
/// `v_i = q_i w_i` and `w` is the right Perron vector of `b_ij q_j`. Since
/// `v = diag(q) B v`, a parent's mass is exactly the sum of its children's,
/// and `sum v_i = 1`.
///
/// The measure is comparable to `r^d` on balls centred in the set, which is
/// the only property of Hausdorff measure the projection estimates rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeasure {
    pub dimension: f64,
    node: Vec<f64>,
    terminal: Vec<f64>,
}

impl ReferenceMeasure {
    pub fn new(spec: &CantorSpec, d: f64) -> Result<Self> {
        let ratios: Vec<f64> =
            spec.branches.iter().map(|b| b.contraction_ratio().ok_or(Error::NonAffineSpec)).collect::<Result<_>>()?;
        let node: Vec<f64> = ratios.iter().map(|r| r.powf(d)).collect();
        let r = spec.symbols();
        let weighted: Vec<Vec<f64>> =
            (0..r).map(|i| (0..r).map(|j| f64::from(spec.transition[i][j]) * node[j]).collect()).collect();
        let (_, w) = perron_right(&weighted);
        let mut terminal: Vec<f64> = w.iter().zip(&node).map(|(w, q)| w * q).collect();
        let total: f64 = terminal.iter().sum();
        terminal.iter_mut().for_each(|v| *v /= total);
        Ok(ReferenceMeasure { dimension: d, node, terminal })
    }

    /// `rho_i^d` for symbol `i`.
    pub fn node_factor(&self, symbol: usize) -> f64 {
        self.node[symbol]
    }

    /// Mass of the level-1 cylinder `I_i`.
    pub fn terminal(&self, symbol: usize) -> f64 {
        self.terminal[symbol]
    }

    pub fn weight(&self, word: &[u16]) -> f64 {
        let (last, prefix) = word.split_last().expect("nonempty word");
        prefix.iter().map(|&s| self.node[s as usize]).product::<f64>() * self.terminal[*last as usize]
    }
}

impl CantorSet {
    /// Reference mass of `K ∩ [x - r, x + r]`.
    ///
    /// Cylinders inside the ball count fully, disjoint ones not at all; a
    /// straddling cylinder is refined until shorter than `resolution`, then
    /// counted iff its midpoint lies in the ball.
    pub fn ball_mass(&self, x: f64, r: f64, resolution: f64) -> Result<f64> {
        self.measure()?;
        let ball = Interval::new(x - r, x + r);
        let mut mass = 0.0;
        self.walk(usize::MAX, |c| {
            if !ball.intersects(&c.interval) {
                Step::Skip
            } else if ball.contains(&c.interval, 0.0) {
                mass += c.weight;
                Step::Skip
            } else if c.len() < resolution {
                if ball.contains_point(c.interval.mid()) {
                    mass += c.weight;
                }
                Step::Skip
            } else {
                Step::Descend
            }
        });
        Ok(mass)
    }
}
