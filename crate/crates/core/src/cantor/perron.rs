//! Perron root and vector of small nonnegative matrices.

const MAX_ITERATIONS: usize = 1_000_000;

/// Spectral radius and right Perron vector (normalised to sum 1) of a
/// nonnegative square matrix.
///
/// Power iteration runs on `M + I`: the shift leaves eigenvectors alone and
/// makes the Perron root strictly dominant in modulus even for periodic
/// matrices.
pub fn perron_right(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    if n == 1 {
        return (m[0][0], vec![1.0]);
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut radius = 0.0;
    let threshold = 4.0 * n as f64 * f64::EPSILON;
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            y[i] = x[i] + m[i].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        }
        let total: f64 = y.iter().sum();
        // x sums to 1, so the l1 norm of (M + I) x estimates radius + 1
        radius = total - 1.0;
        let mut change = 0.0;
        for i in 0..n {
            let v = y[i] / total;
            change += (v - x[i]).abs();
            x[i] = v;
        }
        if change <= threshold {
            break;
        }
    }
    (radius, x)
}

pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    perron_right(m).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fibonacci_matrix() {
        let (r, v) = perron_right(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(r, phi, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0] / v[1], phi, epsilon = 1e-12);
    }

    #[test]
    fn periodic_matrix_converges() {
        let (r, v) = perron_right(&[vec![0.0, 2.0], vec![0.5, 0.0]]);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0] / v[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_case() {
        assert_eq!(spectral_radius(&[vec![0.25]]), 0.25);
    }
}
