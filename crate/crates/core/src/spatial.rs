//! Periodic finite-volume grids and the upwind-stabilized stencil matrices.
//!
//! `Dx ≈ ∂x` is the central difference, `Dxx ≈ ½Δx ∂xx` the stabilization and
//! `D+` its one-sided square root, `Dxx = −D+ᵀ D+`. All three are periodic,
//! constant-coefficient tridiagonal matrices stored as three numbers.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Uniform cell-centered grid on `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n_x: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub centers: Vec<f64>,
}

impl Grid1D {
    pub fn new(n_x: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_x == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell".into()));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid domain [{x_min}, {x_max}]"
            )));
        }
        let dx = (x_max - x_min) / n_x as f64;
        let centers = (0..n_x).map(|p| x_min + (p as f64 + 0.5) * dx).collect();
        Ok(Grid1D {
            n_x,
            x_min,
            x_max,
            dx,
            centers,
        })
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Periodic neighbor indices `(p - 1, p + 1)`.
    #[inline]
    pub fn neighbors(&self, p: usize) -> (usize, usize) {
        let n = self.n_x;
        ((p + n - 1) % n, (p + 1) % n)
    }
}

/// Periodic tridiagonal matrix with constant bands:
/// `(M v)_p = lower·v_{p-1} + diag·v_p + upper·v_{p+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicStencil {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
}

impl PeriodicStencil {
    /// Applies the stencil to a strided periodic line of `len` values.
    #[inline]
    fn apply_line(&self, src: &[f64], dst: &mut [f64], offset: usize, stride: usize, len: usize) {
        let at = |i: usize| offset + i * stride;
        for i in 0..len {
            let prev = if i == 0 { len - 1 } else { i - 1 };
            let next = if i + 1 == len { 0 } else { i + 1 };
            dst[at(i)] =
                self.lower * src[at(prev)] + self.diag * src[at(i)] + self.upper * src[at(next)];
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        self.apply_line(v.as_slice(), out.as_mut_slice(), 0, 1, v.len());
        out
    }

    /// Dense `n x n` representation.
    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for p in 0..n {
            m[(p, (p + n - 1) % n)] += self.lower;
            m[(p, p)] += self.diag;
            m[(p, (p + 1) % n)] += self.upper;
        }
        m
    }

    /// Eigenvalue on the discrete Fourier mode `exp(i ω p)`.
    pub fn symbol(&self, omega: f64) -> Complex<f64> {
        Complex::new(self.diag, 0.0)
            + Complex::from_polar(self.upper, omega)
            + Complex::from_polar(self.lower, -omega)
    }
}

/// Which of the three stencils to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilKind {
    Central,
    Stabilization,
    Forward,
}

/// The stencil matrices `Dx`, `Dxx` and `D+` of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencils {
    pub n_x: usize,
    pub dx: PeriodicStencil,
    pub dxx: PeriodicStencil,
    pub dplus: PeriodicStencil,
}

impl Stencils {
    pub fn get(&self, kind: StencilKind) -> &PeriodicStencil {
        match kind {
            StencilKind::Central => &self.dx,
            StencilKind::Stabilization => &self.dxx,
            StencilKind::Forward => &self.dplus,
        }
    }
}

pub fn build_stencils(grid: &Grid1D) -> Result<Stencils> {
    if grid.n_x < 3 {
        return Err(Error::InvalidArgument(format!(
            "periodic stencils need at least 3 cells, got {}",
            grid.n_x
        )));
    }
    let h = grid.dx;
    let s = 1.0 / (2.0 * h).sqrt();
    Ok(Stencils {
        n_x: grid.n_x,
        dx: PeriodicStencil {
            lower: -0.5 / h,
            diag: 0.0,
            upper: 0.5 / h,
        },
        dxx: PeriodicStencil {
            lower: 0.5 / h,
            diag: -1.0 / h,
            upper: 0.5 / h,
        },
        dplus: PeriodicStencil {
            lower: 0.0,
            diag: -s,
            upper: s,
        },
    })
}

/// Stencil eigenvalues at one discrete frequency.
#[derive(Debug, Clone, Copy)]
pub struct FourierSymbol {
    pub omega: f64,
    pub lambda_x: Complex<f64>,
    pub lambda_xx: Complex<f64>,
    pub lambda_plus: Complex<f64>,
}

/// Symbols at the discrete frequencies `ω_α = 2πα / n_x`, `α = 0..n_x`.
pub fn fourier_symbols(grid: &Grid1D) -> Result<Vec<FourierSymbol>> {
    if grid.n_x < 3 {
        return Err(Error::InvalidArgument(format!(
            "periodic stencils need at least 3 cells, got {}",
            grid.n_x
        )));
    }
    let h = grid.dx;
    Ok((0..grid.n_x)
        .map(|alpha| {
            let omega = 2.0 * std::f64::consts::PI * alpha as f64 / grid.n_x as f64;
            FourierSymbol {
                omega,
                lambda_x: Complex::new(0.0, omega.sin() / h),
                lambda_xx: Complex::new((omega.cos() - 1.0) / h, 0.0),
                lambda_plus: Complex::new(omega.cos() - 1.0, omega.sin()) / (2.0 * h).sqrt(),
            }
        })
        .collect())
}

/// One spatial axis of a tensor-product mesh, flattened with the given stride.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub grid: Grid1D,
    pub stencils: Stencils,
    stride: usize,
    n_total: usize,
}

impl Axis {
    /// Applies a stencil along this axis to every column of `m`
    /// (rows are flattened cells).
    pub fn apply(&self, kind: StencilKind, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.n_total, "row count must equal the cell count");
        let stencil = self.stencils.get(kind);
        let len = self.grid.n_x;
        let block = len * self.stride;
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            let src = m.column(c);
            let src = src.as_slice();
            let mut dst_col = out.column_mut(c);
            let dst = dst_col.as_mut_slice();
            for outer in 0..self.n_total / block {
                for inner in 0..self.stride {
                    stencil.apply_line(src, dst, outer * block + inner, self.stride, len);
                }
            }
        }
        out
    }

    pub fn apply_vec(&self, kind: StencilKind, v: &DVector<f64>) -> DVector<f64> {
        let m = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        DVector::from_column_slice(self.apply(kind, &m).as_slice())
    }

    /// Dense matrix of the stencil acting on the flattened cell index.
    pub fn to_dense(&self, kind: StencilKind) -> DMatrix<f64> {
        self.apply(kind, &DMatrix::identity(self.n_total, self.n_total))
    }
}

/// Spatial mesh: a periodic line or a tensor-product periodic rectangle.
///
/// In two dimensions cells are flattened with the first coordinate fastest,
/// `j = i1 + n1 * i2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Mesh {
    Line(Grid1D),
    Plane(Grid1D, Grid1D),
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        match self {
            Mesh::Line(g) => g.n_x,
            Mesh::Plane(g1, g2) => g1.n_x * g2.n_x,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        match self {
            Mesh::Line(g) => g.dx,
            Mesh::Plane(g1, g2) => g1.dx * g2.dx,
        }
    }

    /// Smallest cell width; the stable time-step bound.
    pub fn min_dx(&self) -> f64 {
        match self {
            Mesh::Line(g) => g.dx,
            Mesh::Plane(g1, g2) => g1.dx.min(g2.dx),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Mesh::Line(_) => 1,
            Mesh::Plane(..) => 2,
        }
    }

    /// Cell center coordinates in flattened order.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        match self {
            Mesh::Line(g) => g.centers.iter().map(|&x| vec![x]).collect(),
            Mesh::Plane(g1, g2) => {
                let mut out = Vec::with_capacity(self.n_cells());
                for &y in &g2.centers {
                    for &x in &g1.centers {
                        out.push(vec![x, y]);
                    }
                }
                out
            }
        }
    }

    pub fn axes(&self) -> Result<Vec<Axis>> {
        let n_total = self.n_cells();
        let axis = |g: &Grid1D, stride: usize| -> Result<Axis> {
            Ok(Axis {
                grid: g.clone(),
                stencils: build_stencils(g)?,
                stride,
                n_total,
            })
        };
        match self {
            Mesh::Line(g) => Ok(vec![axis(g, 1)?]),
            Mesh::Plane(g1, g2) => Ok(vec![axis(g1, 1)?, axis(g2, g1.n_x)?]),
        }
    }
}
