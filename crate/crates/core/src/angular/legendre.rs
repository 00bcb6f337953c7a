//! Normalized Legendre moments for slab geometry.

use nalgebra::DMatrix;

use crate::angular::FluxMatrices;
use crate::error::{Error, Result};

/// Evaluates the L²([-1,1])-orthonormal Legendre polynomial of degree `n` at `mu`.
pub fn legendre_eval(n: usize, mu: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!(
            "direction cosine {mu} outside [-1, 1]"
        )));
    }
    Ok(normalized_legendre(n, mu))
}

/// Same as [`legendre_eval`] without range checks.
pub(crate) fn normalized_legendre(n: usize, mu: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, mu);
    let value = match n {
        0 => 1.0,
        1 => mu,
        _ => {
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * mu * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    };
    value * ((2 * n + 1) as f64 / 2.0).sqrt()
}

/// Off-diagonal entry `⟨P_n, μ P_{n+1}⟩`.
pub fn streaming_coupling(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0)).sqrt()
}

/// Streaming matrix `A_mn = ⟨P_m, μ P_n⟩` for `n_moments` Legendre moments, with
/// its absolute value and square root.
pub fn build_flux_matrix(n_moments: usize) -> Result<FluxMatrices> {
    if n_moments == 0 {
        return Err(Error::InvalidArgument("moment count must be at least 1".into()));
    }
    let mut a = DMatrix::zeros(n_moments, n_moments);
    for n in 0..n_moments.saturating_sub(1) {
        let c = streaming_coupling(n);
        a[(n, n + 1)] = c;
        a[(n + 1, n)] = c;
    }
    FluxMatrices::from_streaming(a)
}
