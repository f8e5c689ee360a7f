//! Dense Hermitian eigensolution with a residual contract.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Hermiticity defect accepted by the solvers.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default residual tolerance, relative to `‖M‖`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;
/// Number of eigenpairs whose residual is checked (or all, if fewer).
const CHECKED_PAIRS: usize = 16;

/// Sorted spectrum of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub matrix_dim: usize,
    /// `max ‖Mv - λv‖ / ‖M‖` over the checked pairs.
    pub residual_bound: f64,
    pub b: Option<f64>,
    pub params_hash: Option<u64>,
}

impl SpectrumResult {
    /// Spectrum given directly by its values (sorted here); no residual.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        SpectrumResult {
            matrix_dim: values.len(),
            eigenvalues: values,
            residual_bound: 0.0,
            b: None,
            params_hash: None,
        }
    }

    pub fn with_provenance(mut self, b: f64, params_hash: Option<u64>) -> Self {
        self.b = Some(b);
        self.params_hash = params_hash;
        self
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    pub residual_bound: f64,
}

impl EigenDecomposition {
    pub fn spectrum(&self) -> SpectrumResult {
        SpectrumResult {
            eigenvalues: self.values.clone(),
            matrix_dim: self.values.len(),
            residual_bound: self.residual_bound,
            b: None,
            params_hash: None,
        }
    }

    /// `V f(Λ) V^*`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// `max |M - M^*| / max |M|`.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst / scale
}

/// Full eigendecomposition; verifies `‖Mv - λv‖ <= tol·‖M‖` on up to 16
/// evenly spaced eigenpairs (all of them for small matrices).
pub fn eigen_hermitian(m: &DMatrix<Complex64>, tol: f64) -> Result<EigenDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation: defect,
            tolerance: HERMITIAN_TOL,
        });
    }
    // Solve the exactly Hermitian part.
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n.max(10)).ok_or(Error::NonConvergence {
        residual: f64::INFINITY,
        tolerance: tol,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let checked = CHECKED_PAIRS.min(n);
    let mut residual = 0.0f64;
    for s in 0..checked {
        let c = if checked == 1 { 0 } else { s * (n - 1) / (checked - 1) };
        let v: DVector<Complex64> = vectors.column(c).into_owned();
        let r = m * &v - v.map(|z| z * values[c]);
        residual = residual.max(r.norm());
    }
    let residual_bound = if norm > 0.0 { residual / norm } else { residual };
    if residual_bound > tol {
        return Err(Error::NonConvergence {
            residual: residual_bound,
            tolerance: tol,
        });
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        residual_bound,
    })
}

/// Sorted eigenvalues with the residual contract of [`eigen_hermitian`].
pub fn eigenvalues_hermitian(m: &DMatrix<Complex64>, tol: f64) -> Result<SpectrumResult> {
    Ok(eigen_hermitian(m, tol)?.spectrum())
}

/// Largest singular value; `max |λ|` for Hermitian input.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.is_square() && hermiticity_defect(m) == 0.0 {
        let sym = m.clone();
        return sym
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
    }
    m.singular_values().max()
}
