use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{overlap_angles, quadrature_energy};
use crate::decomposition::{sup_distance, ProductDecomposition, Square};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions {
    /// Largest `n^2` summed exactly; above it pairs are subsampled.
    pub pair_cap: u128,
    /// Number of uniformly drawn ordered pairs in subsample mode.
    pub samples: usize,
    pub seed: u64,
    /// Midpoint quadrature cells for `∫ N(θ) dθ`; 0 disables the check.
    pub quadrature_points: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions { pair_cap: 1 << 24, samples: 1 << 20, seed: 0, quadrature_points: 2048 }
    }
}

/// Pairs with representative points at box distance in `(lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    /// `s` for `2^-s < d <= 2^-s+1`; 0 for the near term `d <= 2^-s0`.
    pub s: u32,
    pub lo: f64,
    pub hi: f64,
    /// Ordered pairs (estimated in subsample mode).
    pub pairs: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub rho: f64,
    pub squares: usize,
    /// `Σ` over ordered pairs of `m(Θ_{Q,Q̃})`.
    pub energy: f64,
    /// False when the value is the subsample estimate.
    pub exact: bool,
    pub samples: usize,
    pub seed: u64,
    /// `n π`.
    pub diagonal: f64,
    /// `s = 1..=s0` followed by the near term.
    pub annuli: Vec<Annulus>,
    pub quadrature: Option<f64>,
    /// `|E - quadrature| / quadrature`.
    pub quadrature_rel_err: Option<f64>,
    /// Largest `m(Θ) d(x, x̃) / (2 π λ ρ)` over examined distinct pairs.
    pub max_transversality_ratio: f64,
}

impl EnergyReport {
    /// Double-counting identity within `tol` relative error.
    pub fn fubini_ok(&self, tol: f64) -> Option<bool> {
        self.quadrature_rel_err.map(|e| e <= tol)
    }
}

fn s0(rho: f64) -> u32 {
    (1.0 / rho).log2().ceil().max(1.0) as u32
}

/// Accumulator over unordered distinct pairs.
#[derive(Clone)]
struct Tally {
    pairs: Vec<u64>,
    energy: Vec<f64>,
    max_ratio: f64,
}

impl Tally {
    fn new(s0: u32) -> Self {
        Tally { pairs: vec![0; s0 as usize + 1], energy: vec![0.0; s0 as usize + 1], max_ratio: 0.0 }
    }

    /// Bin index: `s - 1` for the annuli, `s0` for the near term.
    fn add(&mut self, q: &Square, r: &Square, s0: u32, bound_scale: f64) {
        let m = overlap_angles(q, r).measure();
        let d = sup_distance(q.rep, r.rep);
        let bin = if d <= (-(s0 as f64)).exp2() {
            s0 as usize
        } else {
            ((-d.log2()).floor().max(0.0) as usize).min(s0 as usize - 1)
        };
        self.pairs[bin] += 1;
        self.energy[bin] += m;
        if d > 0.0 {
            self.max_ratio = self.max_ratio.max(m * d / bound_scale);
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.pairs.iter_mut().zip(&other.pairs) {
            *a += b;
        }
        for (a, b) in self.energy.iter_mut().zip(&other.energy) {
            *a += b;
        }
        self.max_ratio = self.max_ratio.max(other.max_ratio);
    }
}

const SAMPLE_CHUNK: usize = 1 << 14;

/// `E = Σ m(Θ_{Q,Q̃})` over ordered pairs. Exact when `n^2` is within the
/// pair cap; otherwise `n π + n (n - 1) · mean` over uniformly drawn
/// ordered pairs of distinct squares.
pub fn energy(pd: &ProductDecomposition, opts: &EnergyOptions) -> EnergyReport {
    let n = pd.len();
    let s0 = s0(pd.rho);
    let bound_scale = 2.0 * PI * pd.lambda * pd.rho;
    let exact = (n as u128) * (n as u128) <= opts.pair_cap;
    let (tally, scale, samples) = if exact {
        let partials: Vec<Tally> = (0..n)
            .into_par_iter()
            .map(|i| {
                let q = pd.square(i);
                let mut t = Tally::new(s0);
                for j in i + 1..n {
                    t.add(&q, &pd.square(j), s0, bound_scale);
                }
                t
            })
            .collect();
        let mut total = Tally::new(s0);
        partials.iter().for_each(|p| total.merge(p));
        (total, 2.0, 0)
    } else {
        let chunks = opts.samples.div_ceil(SAMPLE_CHUNK);
        let partials: Vec<Tally> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(c as u64);
                let mut t = Tally::new(s0);
                let len = SAMPLE_CHUNK.min(opts.samples - c * SAMPLE_CHUNK);
                for _ in 0..len {
                    let i = rng.random_range(0..n);
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    t.add(&pd.square(i), &pd.square(j), s0, bound_scale);
                }
                t
            })
            .collect();
        let mut total = Tally::new(s0);
        partials.iter().for_each(|p| total.merge(p));
        (total, n as f64 * (n as f64 - 1.0) / opts.samples as f64, opts.samples)
    };
    let diagonal = n as f64 * PI;
    let mut annuli: Vec<Annulus> = (1..=s0)
        .map(|s| Annulus {
            s,
            lo: (-(s as f64)).exp2(),
            hi: (1.0 - s as f64).exp2(),
            pairs: tally.pairs[s as usize - 1] as f64 * scale,
            energy: tally.energy[s as usize - 1] * scale,
        })
        .collect();
    annuli.push(Annulus {
        s: 0,
        lo: 0.0,
        hi: (-(s0 as f64)).exp2(),
        pairs: tally.pairs[s0 as usize] as f64 * scale,
        energy: tally.energy[s0 as usize] * scale,
    });
    let off_diagonal: f64 = tally.energy.iter().sum::<f64>() * scale;
    let energy = diagonal + off_diagonal;
    let quadrature = (opts.quadrature_points > 0).then(|| quadrature_energy(pd, opts.quadrature_points));
    EnergyReport {
        rho: pd.rho,
        squares: n,
        energy,
        exact,
        samples,
        seed: opts.seed,
        diagonal,
        annuli,
        quadrature,
        quadrature_rel_err: quadrature.map(|qd| (energy - qd).abs() / qd),
        max_transversality_ratio: tally.max_ratio,
    }
}

/// Transversality bound `m(Θ) <= 2 π λ ρ / d(x, x̃)` on sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Report {
    pub rho: f64,
    pub lambda: f64,
    pub pairs: usize,
    pub seed: u64,
    pub violations: usize,
    /// Largest `m(Θ) d / (2 π λ ρ)`.
    pub max_ratio: f64,
}

/// Draws `pairs` ordered pairs of squares with distinct representative
/// points and checks the transversality bound on each.
pub fn lemma5_sample(pd: &ProductDecomposition, pairs: usize, seed: u64) -> Lemma5Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pd.len();
    let scale = 2.0 * PI * pd.lambda * pd.rho;
    let mut drawn = Vec::with_capacity(pairs);
    while drawn.len() < pairs && n > 1 {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            drawn.push((i, j));
        }
    }
    let ratios: Vec<f64> = drawn
        .par_iter()
        .map(|&(i, j)| {
            let (q, r) = (pd.square(i), pd.square(j));
            overlap_angles(&q, &r).measure() * sup_distance(q.rep, r.rep) / scale
        })
        .collect();
    Lemma5Report {
        rho: pd.rho,
        lambda: pd.lambda,
        pairs: ratios.len(),
        seed,
        violations: ratios.iter().filter(|&&r| r > 1.0).count(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
    }
}
