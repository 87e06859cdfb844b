use serde::{Deserialize, Serialize};

/// Expanding map restricted to one partition interval.
///
/// Cubic branches are `c0 + c1 x + c2 x^2 + c3 x^3` in the global coordinate
/// and must be strictly monotone on their interval (certified by
/// [`Branch::derivative_range`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Branch {
    Affine { slope: f64, offset: f64 },
    Cubic { coeffs: [f64; 4] },
}

impl Branch {
    /// The affine branch mapping `[lo, hi]` onto `[target_lo, target_hi]`,
    /// orientation-preserving when `reversed` is false.
    pub fn affine_onto(lo: f64, hi: f64, target_lo: f64, target_hi: f64, reversed: bool) -> Self {
        let len = hi - lo;
        if reversed {
            let slope = -(target_hi - target_lo) / len;
            Branch::Affine { slope, offset: target_hi - slope * lo }
        } else {
            let slope = (target_hi - target_lo) / len;
            Branch::Affine { slope, offset: target_lo - slope * lo }
        }
    }

    /// Cubic branch `x -> target_lo + (target_hi - target_lo) * p(t)` with
    /// `t = (x - lo)/(hi - lo)` and `p(t) = t + kappa * t (1 - t)(1 - 2t)`.
    /// `p` fixes 0 and 1, and `p'` ranges over `[1 - kappa/2, 1 + kappa]`
    /// (or the reverse for negative `kappa`).
    pub fn cubic_profile(lo: f64, hi: f64, target_lo: f64, target_hi: f64, kappa: f64) -> Self {
        // p(t) = (1 + k) t - 3k t^2 + 2k t^3
        let p = [0.0, 1.0 + kappa, -3.0 * kappa, 2.0 * kappa];
        let w = hi - lo;
        let span = target_hi - target_lo;
        // substitute t = (x - lo)/w = u x + v
        let (u, v) = (1.0 / w, -lo / w);
        let powers_t: [[f64; 4]; 4] = {
            let mut out = [[0.0; 4]; 4];
            out[0][0] = 1.0;
            for k in 1..4 {
                for j in 0..4 {
                    let prev = out[k - 1][j];
                    out[k][j] += prev * v;
                    if j + 1 < 4 {
                        out[k][j + 1] += prev * u;
                    }
                }
            }
            out
        };
        let mut coeffs = [0.0; 4];
        coeffs[0] = target_lo;
        for (k, pk) in p.iter().enumerate() {
            for j in 0..4 {
                coeffs[j] += span * pk * powers_t[k][j];
            }
        }
        Branch::Cubic { coeffs }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Branch::Affine { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine { slope, offset } => slope * x + offset,
            Branch::Cubic { coeffs: [c0, c1, c2, c3] } => c0 + x * (c1 + x * (c2 + x * c3)),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine { slope, .. } => slope,
            Branch::Cubic { coeffs: [_, c1, c2, c3] } => c1 + x * (2.0 * c2 + 3.0 * c3 * x),
        }
    }

    /// Min and max of `psi'` over `[lo, hi]`. For cubics the derivative is a
    /// quadratic, so its extrema sit at the endpoints or the vertex.
    pub fn derivative_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match *self {
            Branch::Affine { slope, .. } => (slope, slope),
            Branch::Cubic { coeffs: [_, _, c2, c3] } => {
                let mut min = self.derivative(lo).min(self.derivative(hi));
                let mut max = self.derivative(lo).max(self.derivative(hi));
                if c3 != 0.0 {
                    let vertex = -c2 / (3.0 * c3);
                    if vertex > lo && vertex < hi {
                        let dv = self.derivative(vertex);
                        min = min.min(dv);
                        max = max.max(dv);
                    }
                }
                (min, max)
            }
        }
    }

    /// `sup |psi''|` over the interval (`psi''` is affine for cubics).
    pub fn max_abs_second_derivative(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Branch::Affine { .. } => 0.0,
            Branch::Cubic { coeffs: [_, _, c2, c3] } => {
                let dd = |x: f64| 2.0 * c2 + 6.0 * c3 * x;
                dd(lo).abs().max(dd(hi).abs())
            }
        }
    }

    /// `inf |psi'|` over the interval; zero if the derivative changes sign.
    pub fn min_abs_derivative(&self, lo: f64, hi: f64) -> f64 {
        let (min, max) = self.derivative_range(lo, hi);
        if min <= 0.0 && max >= 0.0 {
            0.0
        } else {
            min.abs().min(max.abs())
        }
    }

    pub fn max_abs_derivative(&self, lo: f64, hi: f64) -> f64 {
        let (min, max) = self.derivative_range(lo, hi);
        min.abs().max(max.abs())
    }

    /// `psi([lo, hi])` for a monotone branch.
    pub fn image(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = (self.eval(lo), self.eval(hi));
        (a.min(b), a.max(b))
    }

    /// Solves `psi(x) = y` for `x` in `[lo, hi]`. The branch must be monotone
    /// there; targets outside the image are clamped to the nearest endpoint.
    pub fn inverse(&self, y: f64, lo: f64, hi: f64) -> f64 {
        match *self {
            Branch::Affine { slope, offset } => (y - offset) / slope,
            Branch::Cubic { .. } => {
                let increasing = self.eval(hi) >= self.eval(lo);
                let g = |x: f64| if increasing { self.eval(x) - y } else { y - self.eval(x) };
                let (mut a, mut b) = (lo, hi);
                if g(a) >= 0.0 {
                    return a;
                }
                if g(b) <= 0.0 {
                    return b;
                }
                let mut x = 0.5 * (a + b);
                for _ in 0..200 {
                    let gx = g(x);
                    if gx == 0.0 {
                        return x;
                    }
                    if gx < 0.0 {
                        a = x;
                    } else {
                        b = x;
                    }
                    let dg = if increasing { self.derivative(x) } else { -self.derivative(x) };
                    let newton = x - gx / dg;
                    x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
                    if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                        break;
                    }
                }
                x
            }
        }
    }

    /// `|psi'|` of the inverse branch for affine maps.
    pub fn contraction_ratio(&self) -> Option<f64> {
        match *self {
            Branch::Affine { slope, .. } => Some(1.0 / slope.abs()),
            Branch::Cubic { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_profile_hits_targets_and_derivative_band() {
        let b = Branch::cubic_profile(0.6, 1.0, 0.0, 1.0, -0.4);
        assert_abs_diff_eq!(b.eval(0.6), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.eval(1.0), 1.0, epsilon = 1e-12);
        let (min, max) = b.derivative_range(0.6, 1.0);
        assert_abs_diff_eq!(min, 0.6 / 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(max, 1.2 / 0.4, epsilon = 1e-9);
    }

    #[test]
    fn cubic_inverse_roundtrips() {
        let b = Branch::cubic_profile(0.0, 0.4, 0.0, 1.0, 0.5);
        for i in 0..=50 {
            let x = 0.4 * i as f64 / 50.0;
            let y = b.eval(x);
            assert_abs_diff_eq!(b.inverse(y, 0.0, 0.4), x, epsilon = 1e-14);
        }
    }

    #[test]
    fn reversed_affine_maps_endpoints_swapped() {
        let b = Branch::affine_onto(0.25, 0.5, 0.0, 1.0, true);
        assert_abs_diff_eq!(b.eval(0.25), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.eval(0.5), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.inverse(0.5, 0.25, 0.5), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn sign_change_means_not_expanding() {
        let b = Branch::Cubic { coeffs: [0.0, -1.0, 0.0, 4.0] };
        assert_eq!(b.min_abs_derivative(-1.0, 1.0), 0.0);
    }
}
