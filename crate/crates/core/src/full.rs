//! Full-order reference solver: explicit stabilized streaming followed by a
//! coupled implicit absorption/emission update of the zeroth moment and the
//! internal energy.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::transport::{absorption_emission_solve, Transport};

/// Dense moment matrix, internal energy and time.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    /// `n_cells × n_moments`.
    pub u: DMatrix<f64>,
    pub b: DVector<f64>,
    pub t: f64,
    /// Number of steps taken to reach `t`.
    pub step: usize,
}

impl FullState {
    pub fn new(u: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if u.nrows() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "moment matrix has {} cells but internal energy has {}",
                u.nrows(),
                b.len()
            )));
        }
        Ok(FullState { u, b, t: 0.0, step: 0 })
    }
}

/// Advances `state` by `dt`. `source`, if present, is added as `Δt·Q_j` to the
/// zeroth moment before the implicit solve.
pub fn full_step(
    state: &FullState,
    transport: &Transport,
    sigma: f64,
    dt: f64,
    source: Option<&DVector<f64>>,
) -> Result<FullState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidArgument(format!("opacity must be non-negative, got {sigma}")));
    }
    if state.u.shape() != (transport.n_cells(), transport.n_moments()) {
        return Err(Error::InvalidArgument(format!(
            "state is {:?}, discretization expects {:?}",
            state.u.shape(),
            (transport.n_cells(), transport.n_moments())
        )));
    }
    let step = state.step + 1;
    let time = state.t + dt;

    let mut a = &state.u + transport.rhs(&state.u) * dt;
    if let Some(q) = source {
        let mut col = a.column_mut(0);
        col.axpy(dt, q, 1.0);
    }
    if !all_finite(&a) {
        return Err(Error::Blowup { step, time, what: "moments" });
    }

    let damping = 1.0 / (1.0 + sigma * dt);
    let mut b = state.b.clone();
    for j in 0..a.nrows() {
        let (u0, b1) = absorption_emission_solve(a[(j, 0)], state.b[j], sigma, dt);
        a[(j, 0)] = u0;
        b[j] = b1;
    }
    if a.ncols() > 1 {
        a.columns_mut(1, a.ncols() - 1).scale_mut(damping);
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::Blowup { step, time, what: "internal energy" });
    }
    Ok(FullState { u: a, b, t: time, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::build_flux_matrix;
    use crate::spatial::{Grid1D, Mesh};

    fn transport(n_x: usize, n: usize) -> Transport {
        Transport::new(
            Mesh::Line(Grid1D::new(n_x, -2.0, 2.0).unwrap()),
            vec![build_flux_matrix(n).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn constant_equilibrium_is_fixed_point() {
        let t = transport(10, 5);
        let mut u = DMatrix::zeros(10, 5);
        u.column_mut(0).fill(3.0);
        let s = FullState::new(u.clone(), DVector::from_element(10, 3.0)).unwrap();
        let next = full_step(&s, &t, 2.0, 0.1, None).unwrap();
        assert!((next.u - u).amax() < 1e-14);
        assert!((next.b - s.b).amax() < 1e-14);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn no_opacity_is_pure_transport() {
        let t = transport(10, 5);
        let u = DMatrix::from_fn(10, 5, |i, j| ((i * 5 + j) as f64 * 0.7).cos());
        let b = DVector::from_fn(10, |i, _| i as f64);
        let s = FullState::new(u.clone(), b.clone()).unwrap();
        let next = full_step(&s, &t, 0.0, 0.2, None).unwrap();
        let expected = &u + t.rhs(&u) * 0.2;
        assert!((next.u - expected).amax() < 1e-14);
        assert_eq!(next.b, b);
    }

    #[test]
    fn nan_is_reported_with_step() {
        let t = transport(6, 3);
        let mut u = DMatrix::zeros(6, 3);
        u[(2, 1)] = f64::NAN;
        let mut s = FullState::new(u, DVector::zeros(6)).unwrap();
        s.step = 41;
        match full_step(&s, &t, 1.0, 0.1, None) {
            Err(Error::Blowup { step, .. }) => assert_eq!(step, 42),
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let t = transport(6, 3);
        let s = FullState::new(DMatrix::zeros(6, 3), DVector::zeros(6)).unwrap();
        assert!(full_step(&s, &t, 1.0, 0.0, None).is_err());
        assert!(full_step(&s, &t, -1.0, 0.1, None).is_err());
        let wrong = FullState::new(DMatrix::zeros(5, 3), DVector::zeros(5)).unwrap();
        assert!(full_step(&wrong, &t, 1.0, 0.1, None).is_err());
        assert!(FullState::new(DMatrix::zeros(5, 3), DVector::zeros(4)).is_err());
    }
}
