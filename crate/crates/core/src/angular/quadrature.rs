//! Gauss–Legendre and product quadrature on [-1, 1] and the unit sphere.

use std::f64::consts::PI;

/// Gauss–Legendre rule with `n` nodes on [-1, 1]; exact for polynomials of degree
/// `2n - 1`. Nodes are returned in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Classical (unnormalized) Legendre polynomial `L_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A point on the unit sphere with its quadrature weight.
#[derive(Debug, Clone, Copy)]
pub struct SpherePoint {
    /// Polar cosine, equal to the third direction cosine `Ω₃`.
    pub mu: f64,
    /// Azimuth in `[0, 2π)`.
    pub phi: f64,
    pub weight: f64,
}

impl SpherePoint {
    /// Direction cosines `(Ω₁, Ω₂, Ω₃)`.
    pub fn direction(&self) -> [f64; 3] {
        let s = (1.0 - self.mu * self.mu).max(0.0).sqrt();
        [s * self.phi.cos(), s * self.phi.sin(), self.mu]
    }
}

/// Product rule on S²: Gauss–Legendre in the polar cosine times the uniform
/// (trapezoidal) rule in azimuth. Exact for spherical polynomials of degree
/// `min(2 n_mu - 1, n_phi - 1)`.
pub fn sphere_product_rule(n_mu: usize, n_phi: usize) -> Vec<SpherePoint> {
    let (nodes, weights) = gauss_legendre(n_mu);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut points = Vec::with_capacity(n_mu * n_phi);
    for (&mu, &w) in nodes.iter().zip(&weights) {
        for k in 0..n_phi {
            points.push(SpherePoint {
                mu,
                phi: (k as f64 + 0.5) * dphi,
                weight: w * dphi,
            });
        }
    }
    points
}
