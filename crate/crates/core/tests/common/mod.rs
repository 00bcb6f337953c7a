//! Dense brute-force oracles assembled directly from the stencil formulas,
//! independent of the solver's matrix-free code paths.

#![allow(dead_code)]

use dlra_trt::angular::build_flux_matrix;
use dlra_trt::spatial::{Grid1D, Mesh};
use dlra_trt::Transport;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Orthonormal `rows × cols` block from a random Gaussian-like matrix.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let m = random_matrix(rng, rows, cols);
    let q = m.qr().q();
    q.columns(0, cols).into_owned()
}

/// `(Dx, Dxx, D+)` on a periodic grid of `n` cells of width `h`.
pub fn dense_stencils(n: usize, h: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let mut dx = DMatrix::zeros(n, n);
    let mut dxx = DMatrix::zeros(n, n);
    let mut dp = DMatrix::zeros(n, n);
    let s = (2.0 * h).sqrt();
    for p in 0..n {
        let (l, r) = ((p + n - 1) % n, (p + 1) % n);
        dx[(p, r)] += 1.0 / (2.0 * h);
        dx[(p, l)] -= 1.0 / (2.0 * h);
        dxx[(p, r)] += 1.0 / (2.0 * h);
        dxx[(p, l)] += 1.0 / (2.0 * h);
        dxx[(p, p)] -= 1.0 / h;
        dp[(p, r)] += 1.0 / s;
        dp[(p, p)] -= 1.0 / s;
    }
    (dx, dxx, dp)
}

/// `|A|` from an eigendecomposition.
pub fn abs_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let e = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f64::abs));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Column-major vectorization.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// 1D slab problem with `n_x` cells on `[x_min, x_max]` and `n_moments` moments.
pub struct Slab {
    pub transport: Transport,
    pub n_x: usize,
    pub n_moments: usize,
    pub h: f64,
    pub a: DMatrix<f64>,
}

impl Slab {
    pub fn new(n_x: usize, n_moments: usize, x_min: f64, x_max: f64) -> Self {
        let grid = Grid1D::new(n_x, x_min, x_max).unwrap();
        let h = grid.dx;
        let flux = build_flux_matrix(n_moments).unwrap();
        let a = flux.a.clone();
        let transport = Transport::new(Mesh::Line(grid), vec![flux]).unwrap();
        Slab { transport, n_x, n_moments, h, a }
    }

    /// Dense operator `T` with `vec(−Dx u Aᵀ + Dxx u |A|ᵀ) = T vec(u)`.
    pub fn transport_operator(&self) -> DMatrix<f64> {
        let (dx, dxx, _) = dense_stencils(self.n_x, self.h);
        let a_abs = abs_matrix(&self.a);
        -self.a.kronecker(&dx) + a_abs.kronecker(&dxx)
    }

    /// Index of `u_{j,k}` in the monolithic unknown vector `[vec(u); B]`.
    fn idx(&self, j: usize, k: usize) -> usize {
        k * self.n_x + j
    }

    /// One step of the coupled implicit scheme as a single dense linear solve
    /// in the unknowns `[vec(u¹); B¹]`.
    pub fn full_step_oracle(
        &self,
        u0: &DMatrix<f64>,
        b0: &DVector<f64>,
        sigma: f64,
        dt: f64,
        q: Option<&DVector<f64>>,
    ) -> (DMatrix<f64>, DVector<f64>) {
        let (n, m) = (self.n_x, self.n_moments);
        let nu = n * m;
        let explicit = vec_of(u0) + self.transport_operator() * vec_of(u0) * dt;
        let mut sys = DMatrix::zeros(nu + n, nu + n);
        let mut rhs = DVector::zeros(nu + n);
        let k = sigma * dt;
        for i in 0..nu {
            sys[(i, i)] = 1.0 + k;
            rhs[i] = explicit[i];
        }
        for j in 0..n {
            let row0 = self.idx(j, 0);
            sys[(row0, nu + j)] = -k;
            if let Some(q) = q {
                rhs[row0] += dt * q[j];
            }
            sys[(nu + j, nu + j)] = 1.0 + k;
            sys[(nu + j, row0)] = -k;
            rhs[nu + j] = b0[j];
        }
        let sol = sys.lu().solve(&rhs).expect("nonsingular");
        (unvec(&sol.rows(0, nu).into_owned(), n, m), sol.rows(nu, n).into_owned())
    }

    /// One step of the naive IMEX scheme with exact subspaces: all moments
    /// implicit in self-absorption with explicit emission `σΔt B⁰`, then `B`
    /// implicit with the new zeroth moment.
    pub fn naive_step_oracle(
        &self,
        u0: &DMatrix<f64>,
        b0: &DVector<f64>,
        sigma: f64,
        dt: f64,
        q: Option<&DVector<f64>>,
    ) -> (DMatrix<f64>, DVector<f64>) {
        let (n, m) = (self.n_x, self.n_moments);
        let nu = n * m;
        let mut rhs = vec_of(u0) + self.transport_operator() * vec_of(u0) * dt;
        for j in 0..n {
            rhs[self.idx(j, 0)] += sigma * dt * b0[j] + q.map_or(0.0, |q| dt * q[j]);
        }
        let sys = DMatrix::<f64>::identity(nu, nu) * (1.0 + sigma * dt);
        let u1 = unvec(&sys.lu().solve(&rhs).expect("nonsingular"), n, m);
        let b1 = DVector::from_fn(n, |j, _| (b0[j] + sigma * dt * u1[(j, 0)]) / (1.0 + sigma * dt));
        (u1, b1)
    }
}

pub fn relative_l2(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
