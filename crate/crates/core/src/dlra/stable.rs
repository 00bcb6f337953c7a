//! Energy-stable, locally conservative low-rank step.
//!
//! One step runs, in order:
//!
//! 1. explicit streaming K- and L-steps on the frozen bases,
//! 2. augmentation `X⋆ = [X⁰, ⟂K⋆]`, `V⋆ = [V⁰, ⟂L⋆]` and projection of `S⁰`,
//! 3. explicit streaming Galerkin S-step on the augmented bases,
//! 4. the implicit coupled update of the zeroth moment and internal energy,
//!    computed from the un-projected streaming of `u⁰`,
//! 5. implicit absorption of all non-zero moments on `L = V⋆ S⋆ᵀ`,
//! 6. augmentation with the new zeroth moment and `e₁`, replacing the
//!    zeroth-moment column of the solution by `û₀`,
//! 7. truncation (conservative by default).

use nalgebra::{DMatrix, DVector};

use super::{LowRankState, StepParams, TruncationStrategy};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, extend_orthonormal, qr};

/// Relative size below which new directions are not added to a basis.
const AUGMENT_TOL: f64 = 1e-14;
use crate::transport::{absorption_emission_solve, Transport};
use crate::truncation::{truncate_conservative, truncate_standard, Factors};

/// `K⋆ = K⁰ + Δt Σ(−D^x K⁰ (V⁰ᵀAV⁰)ᵀ + D^xx K⁰ (V⁰ᵀ|A|V⁰)ᵀ)` with `K⁰ = X⁰S⁰`.
pub fn k_step(state: &LowRankState, transport: &Transport, dt: f64) -> Result<DMatrix<f64>> {
    let k0 = &state.x * &state.s;
    let k = &k0 + transport.k_rhs(&k0, &state.v) * dt;
    finite(k, state, "K-step")
}

/// `L⋆ = L⁰ + Δt Σ(−A L⁰ (X⁰ᵀD^xX⁰)ᵀ + |A| L⁰ (X⁰ᵀD^xxX⁰)ᵀ)` with `L⁰ = V⁰S⁰ᵀ`.
pub fn l_step(state: &LowRankState, transport: &Transport, dt: f64) -> Result<DMatrix<f64>> {
    let l0 = &state.v * state.s.transpose();
    let l = &l0 + transport.l_rhs(&l0, &state.x) * dt;
    finite(l, state, "L-step")
}

fn finite(m: DMatrix<f64>, state: &LowRankState, what: &'static str) -> Result<DMatrix<f64>> {
    if all_finite(&m) {
        Ok(m)
    } else {
        Err(Error::Blowup {
            step: state.step + 1,
            time: state.t,
            what,
        })
    }
}

/// Augmented bases together with the old solution expressed in them.
#[derive(Debug, Clone)]
pub struct AugmentedBases {
    /// `X⋆`, `n_cells × ≤2r`.
    pub x: DMatrix<f64>,
    /// `V⋆`, `n_moments × ≤2r`.
    pub v: DMatrix<f64>,
    /// `S̃⁰ = X⋆ᵀX⁰ S⁰ V⁰ᵀV⋆`.
    pub s: DMatrix<f64>,
}

pub fn augment_and_project(
    k_star: &DMatrix<f64>,
    l_star: &DMatrix<f64>,
    state: &LowRankState,
) -> AugmentedBases {
    let x = extend_orthonormal(&state.x, k_star, AUGMENT_TOL);
    let v = extend_orthonormal(&state.v, l_star, AUGMENT_TOL);
    // X⋆ = [X⁰, ·] and V⋆ = [V⁰, ·], so X⋆ᵀX⁰ S⁰ V⁰ᵀV⋆ is S⁰ padded with zeros.
    let r = state.rank();
    let mut s = DMatrix::zeros(x.ncols(), v.ncols());
    s.view_mut((0, 0), (r, r)).copy_from(&state.s);
    AugmentedBases { x, v, s }
}

/// Galerkin streaming update `S⋆ = S̃⁰ + Δt Σ(−(X⋆ᵀD^xX⋆) S̃⁰ (V⋆ᵀAV⋆)ᵀ + …)`.
pub fn s_step(aug: &AugmentedBases, transport: &Transport, dt: f64) -> DMatrix<f64> {
    &aug.s + transport.s_rhs(&aug.x, &aug.s, &aug.v) * dt
}

/// Implicit coupled update of the zeroth moment and the internal energy.
///
/// The explicit part is the zeroth moment of `u⁰ + Δt F(u⁰)` (plus `Δt·Q`),
/// evaluated on the un-truncated old solution.
pub fn coupled_zeroth_update(
    state: &LowRankState,
    b0: &DVector<f64>,
    transport: &Transport,
    sigma: f64,
    dt: f64,
    source: Option<&DVector<f64>>,
) -> (DVector<f64>, DVector<f64>) {
    let k0 = &state.x * &state.s;
    let mut c = state.zeroth_moment() + transport.rhs_zeroth(&k0, &state.v) * dt;
    if let Some(q) = source {
        c.axpy(dt, q, 1.0);
    }
    let mut u0 = DVector::zeros(c.len());
    let mut b1 = DVector::zeros(c.len());
    for j in 0..c.len() {
        let (u, b) = absorption_emission_solve(c[j], b0[j], sigma, dt);
        u0[j] = u;
        b1[j] = b;
    }
    (u0, b1)
}

/// Scales the non-zero-moment rows of `L = V⋆S⋆ᵀ` by `1/(1+σΔt)` and
/// re-factorizes `L = V_scat S_scatᵀ`. Returns `(V_scat, S_scat)`.
pub fn absorption_update(
    s_star: &DMatrix<f64>,
    v_star: &DMatrix<f64>,
    sigma: f64,
    dt: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut l = v_star * s_star.transpose();
    let n = l.nrows();
    if n > 1 {
        l.rows_mut(1, n - 1).scale_mut(1.0 / (1.0 + sigma * dt));
    }
    let (v_scat, r) = qr(&l);
    (v_scat, r.transpose())
}

/// Builds `X̃¹ = [X⋆, ⟂û₀]`, `Ṽ¹ = [e₁, qr(V_scat without its e₁ component)]`
/// and the corrected coefficients so that `X̃¹S̃¹Ṽ¹ᵀ` has zeroth-moment column
/// `û₀` and the absorbed non-zero moments elsewhere.
pub fn flux_augment_and_correct(
    u0_hat: &DVector<f64>,
    x_star: &DMatrix<f64>,
    v_scat: &DMatrix<f64>,
    s_scat: &DMatrix<f64>,
) -> Factors {
    let n_moments = v_scat.nrows();
    let x_tilde = extend_orthonormal(x_star, &DMatrix::from_column_slice(u0_hat.len(), 1, u0_hat.as_slice()), AUGMENT_TOL);

    // Columns of V_scat with the zeroth-moment row removed, orthonormalized in
    // the complement of e₁ so that Ṽ¹ = [e₁, 0; 0, Q] exactly.
    let v_rest = v_scat.rows(1, n_moments - 1).into_owned();
    let q_rest = qr(&v_rest).0;
    let mut v_tilde = DMatrix::zeros(n_moments, q_rest.ncols() + 1);
    v_tilde[(0, 0)] = 1.0;
    v_tilde
        .view_mut((1, 1), (n_moments - 1, q_rest.ncols()))
        .copy_from(&q_rest);

    // S̃¹ = X̃ᵀX⋆ S_scat V_scatᵀ(I − e₁e₁ᵀ)Ṽ + X̃ᵀû₀ e₁ᵀṼ
    let mut s_tilde = DMatrix::zeros(x_tilde.ncols(), v_tilde.ncols());
    s_tilde.column_mut(0).copy_from(&(x_tilde.transpose() * u0_hat));
    // X̃ = [X⋆, ·], so X̃ᵀX⋆ is the identity padded with zero rows.
    let rest = s_scat * (v_rest.transpose() * &q_rest);
    s_tilde
        .view_mut((0, 1), (x_star.ncols(), q_rest.ncols()))
        .copy_from(&rest);
    Factors {
        x: x_tilde,
        s: s_tilde,
        v: v_tilde,
    }
}

/// One energy-stable step. Returns the truncated state and the new internal energy.
pub fn dlra_step(
    state: &LowRankState,
    b0: &DVector<f64>,
    transport: &Transport,
    params: &StepParams<'_>,
) -> Result<(LowRankState, DVector<f64>)> {
    params.check(transport)?;
    state.validate(transport)?;
    if b0.len() != transport.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "internal energy has {} cells, expected {}",
            b0.len(),
            transport.n_cells()
        )));
    }
    let dt = params.dt;
    let step = state.step + 1;
    let time = state.t + dt;

    let k_star = k_step(state, transport, dt)?;
    let stencils = transport.projected_stencils(&state.x);
    let l0 = &state.v * state.s.transpose();
    let l_star = finite(&l0 + transport.l_rhs_with(&l0, &stencils) * dt, state, "L-step")?;
    let aug = augment_and_project(&k_star, &l_star, state);
    let stencils = transport.extend_projected_stencils(&stencils, &aug.x);
    let s_star = &aug.s + transport.s_rhs_with(&stencils, &aug.s, &aug.v) * dt;
    let (u0_hat, b1) = coupled_zeroth_update(state, b0, transport, params.sigma, dt, params.source);
    let (v_scat, s_scat) = absorption_update(&s_star, &aug.v, params.sigma, dt);
    let corrected = flux_augment_and_correct(&u0_hat, &aug.x, &v_scat, &s_scat);
    if !all_finite(&corrected.s) || !b1.iter().all(|v| v.is_finite()) {
        return Err(Error::Blowup {
            step,
            time,
            what: "coefficients",
        });
    }
    let truncated = match params.strategy {
        TruncationStrategy::Conservative => {
            truncate_conservative(&corrected.x, &corrected.s, &corrected.v, &params.truncation)?
        }
        TruncationStrategy::Standard => {
            truncate_standard(&corrected.x, &corrected.s, &corrected.v, &params.truncation)?
        }
    };
    let next = LowRankState::from_factors(truncated, time, step);
    next.check_finite()?;
    Ok((next, b1))
}
