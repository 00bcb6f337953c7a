//! Real spherical harmonics, orthonormal on S², and their streaming matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::angular::quadrature::{sphere_product_rule, SpherePoint};
use crate::angular::FluxMatrices;
use crate::error::{Error, Result};

/// Number of real harmonics up to degree `n_pn`.
pub fn sh_moment_count(n_pn: usize) -> usize {
    (n_pn + 1) * (n_pn + 1)
}

/// Position of `Y_{ℓ,m}` in the lexicographic moment ordering.
pub fn sh_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Fully normalized associated Legendre values `p̄_ℓ^m(μ)` (no Condon–Shortley
/// phase), scaled so that `∫ p̄² dμ = 1/(2π)`. Stored at `l * (l + 1) / 2 + m`.
fn associated_legendre_table(n_pn: usize, mu: f64, out: &mut Vec<f64>) {
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    out.clear();
    out.resize((n_pn + 1) * (n_pn + 2) / 2, 0.0);
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    out[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=n_pn {
        let mf = m as f64;
        out[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * out[tri(m - 1, m - 1)];
    }
    for m in 0..n_pn {
        out[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * mu * out[tri(m, m)];
    }
    for m in 0..=n_pn {
        for l in (m + 2)..=n_pn {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[tri(l, m)] = a * (mu * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
}

/// Fills `out` with all real harmonics up to degree `n_pn` at (μ, φ).
fn harmonics_at(n_pn: usize, mu: f64, phi: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
    associated_legendre_table(n_pn, mu, scratch);
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    for l in 0..=n_pn {
        out[sh_index(l, 0)] = scratch[tri(l, 0)];
        for m in 1..=l {
            let p = std::f64::consts::SQRT_2 * scratch[tri(l, m)];
            let mphi = m as f64 * phi;
            out[sh_index(l, m as i64)] = p * mphi.cos();
            out[sh_index(l, -(m as i64))] = p * mphi.sin();
        }
    }
}

/// Evaluates the real harmonic `Y_{ℓ,m}` at polar cosine `mu` and azimuth `phi`.
/// Positive `m` carries `cos(mφ)`, negative `m` carries `sin(|m|φ)`; `Y_{1,1}` is
/// proportional to `Ω₁` with a positive constant.
pub fn real_spherical_harmonic(l: usize, m: i64, mu: f64, phi: f64) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidArgument(format!("|m| = {} exceeds ℓ = {l}", m.abs())));
    }
    if !(-1.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!("polar cosine {mu} outside [-1, 1]")));
    }
    let mut scratch = Vec::new();
    let mut out = vec![0.0; sh_moment_count(l)];
    harmonics_at(l, mu, phi, &mut scratch, &mut out);
    Ok(out[sh_index(l, m)])
}

/// Integrates `weight(Ω) · Y_k(Ω) · Y_l(Ω)` for all pairs over the given rule.
fn weighted_gram(
    n_pn: usize,
    points: &[SpherePoint],
    weight: impl Fn(&SpherePoint) -> f64,
) -> DMatrix<f64> {
    let n = sh_moment_count(n_pn);
    let mut scratch = Vec::new();
    let mut y = vec![0.0; n];
    let mut gram = DMatrix::zeros(n, n);
    for p in points {
        harmonics_at(n_pn, p.mu, p.phi, &mut scratch, &mut y);
        let w = p.weight * weight(p);
        if w == 0.0 {
            continue;
        }
        for l in 0..n {
            let wl = w * y[l];
            if wl == 0.0 {
                continue;
            }
            for k in 0..n {
                gram[(k, l)] += wl * y[k];
            }
        }
    }
    (&gram + gram.transpose()) * 0.5
}

/// Exact product rule for integrands of spherical-polynomial degree `2 n_pn + 1`.
fn exact_rule(n_pn: usize) -> Vec<SpherePoint> {
    sphere_product_rule(n_pn + 2, 2 * n_pn + 4)
}

/// Streaming matrices for the in-plane direction cosines `Ω₁` (first spatial
/// axis) and `Ω₃` (second spatial axis) in the real harmonic basis of degree
/// `n_pn`, assembled by exact quadrature on S².
pub fn build_pn_flux_matrices_2d(n_pn: usize) -> Result<(FluxMatrices, FluxMatrices)> {
    if n_pn < 1 {
        return Err(Error::InvalidArgument("n_pn must be at least 1".into()));
    }
    let rule = exact_rule(n_pn);
    let a_x = weighted_gram(n_pn, &rule, |p| p.direction()[0]);
    let a_z = weighted_gram(n_pn, &rule, |p| p.direction()[2]);
    let clean = |m: DMatrix<f64>| m.map(|v| if v.abs() < 1e-15 { 0.0 } else { v });
    Ok((
        FluxMatrices::from_streaming(clean(a_x))?,
        FluxMatrices::from_streaming(clean(a_z))?,
    ))
}

/// Gram matrix of the harmonics under the exact product rule.
#[cfg(test)]
pub(crate) fn harmonic_gram(n_pn: usize) -> DMatrix<f64> {
    weighted_gram(n_pn, &exact_rule(n_pn), |_| 1.0)
}

/// Projects `f` onto the harmonics of degree `≤ n_pn` using an `n_mu × n_phi`
/// product rule. Returns the coefficients and the fraction of `∫ f²` that the
/// truncated expansion captures.
pub fn project_on_harmonics(
    n_pn: usize,
    f: impl Fn([f64; 3]) -> f64,
    n_mu: usize,
    n_phi: usize,
) -> (Vec<f64>, f64) {
    let n = sh_moment_count(n_pn);
    let mut coeffs = vec![0.0; n];
    let mut scratch = Vec::new();
    let mut y = vec![0.0; n];
    let mut norm2 = 0.0;
    for p in sphere_product_rule(n_mu, n_phi) {
        let v = f(p.direction());
        if v == 0.0 {
            continue;
        }
        norm2 += p.weight * v * v;
        harmonics_at(n_pn, p.mu, p.phi, &mut scratch, &mut y);
        for (c, yk) in coeffs.iter_mut().zip(&y) {
            *c += p.weight * v * yk;
        }
    }
    let captured = coeffs.iter().map(|c| c * c).sum::<f64>();
    let fraction = if norm2 > 0.0 { captured / norm2 } else { 1.0 };
    (coeffs, fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_ordering() {
        assert_eq!(sh_index(0, 0), 0);
        assert_eq!(sh_index(1, -1), 1);
        assert_eq!(sh_index(1, 0), 2);
        assert_eq!(sh_index(1, 1), 3);
        assert_eq!(sh_index(2, -2), 4);
        assert_eq!(sh_moment_count(29), 900);
    }

    #[test]
    fn harmonics_are_orthonormal() {
        for n_pn in [1, 4, 9] {
            let g = harmonic_gram(n_pn);
            let dev = (g - DMatrix::identity(sh_moment_count(n_pn), sh_moment_count(n_pn))).amax();
            assert!(dev < 1e-12, "n_pn = {n_pn}: {dev:e}");
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let mu = 0.3_f64;
        let phi = 1.1_f64;
        let s = (1.0 - mu * mu).sqrt();
        let c = (3.0 / (4.0 * PI)).sqrt();
        assert!((real_spherical_harmonic(0, 0, mu, phi).unwrap() - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((real_spherical_harmonic(1, 1, mu, phi).unwrap() - c * s * phi.cos()).abs() < 1e-15);
        assert!((real_spherical_harmonic(1, -1, mu, phi).unwrap() - c * s * phi.sin()).abs() < 1e-15);
        assert!((real_spherical_harmonic(1, 0, mu, phi).unwrap() - c * mu).abs() < 1e-15);
        assert!(real_spherical_harmonic(1, 2, mu, phi).is_err());
    }

    #[test]
    fn pn1_coupling_entry() {
        let (ax, az) = build_pn_flux_matrices_2d(1).unwrap();
        assert_eq!(ax.a.shape(), (4, 4));
        let c = 1.0 / 3.0_f64.sqrt();
        assert!((ax.a[(sh_index(0, 0), sh_index(1, 1))] - c).abs() < 1e-14);
        assert!((az.a[(sh_index(0, 0), sh_index(1, 0))] - c).abs() < 1e-14);
    }

    #[test]
    fn pn_matrices_symmetric_and_bounded() {
        for n_pn in [1, 3, 9] {
            let (ax, az) = build_pn_flux_matrices_2d(n_pn).unwrap();
            for f in [&ax, &az] {
                assert!((&f.a - f.a.transpose()).amax() < 1e-12);
                assert!(f.spectral_radius() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn projection_of_constant() {
        let (c, frac) = project_on_harmonics(3, |_| 2.0, 8, 16);
        assert!((c[0] - 2.0 * (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
        assert!((frac - 1.0).abs() < 1e-12);
    }
}
