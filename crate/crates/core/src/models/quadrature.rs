//! Quadrature rules on [0,1] for the Nystrom discretization.

/// Node placement for the weighted kernel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
    Midpoint,
}

impl QuadratureRule {
    /// Nodes and weights on [0,1]; weights sum to 1.
    pub fn nodes_weights(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            QuadratureRule::Midpoint => {
                let x = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
                let w = vec![1.0 / n as f64; n];
                (x, w)
            }
            QuadratureRule::GaussLegendre => {
                let (x, w) = gauss_legendre(n);
                // map from [-1,1] to [0,1]
                let x01 = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
                let w01 = w.iter().map(|v| 0.5 * v).collect();
                (x01, w01)
            }
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, z);
                dp = d2;
                z -= p2 / d2;
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// (P_n(z), P_n'(z)) by the three-term recurrence.
fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * z * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (z * p - p_prev) / (z * z - 1.0);
    (p, dp)
}
