//! The spectral part `T = (i/2π)∮_C z (M - z)^{-1} dz` of a Hermitian matrix
//! inside a circle `C` around `center` with radius `radius`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::{eigen_hermitian, eigenvalues_hermitian, operator_norm, DEFAULT_RESIDUAL_TOL};
use crate::error::{Error, Result};

/// Both computations of the windowed operator and their cross-checks.
#[derive(Debug, Clone)]
pub struct RieszResult {
    /// `Σ_{λ in window} λ P_λ` from the eigendecomposition.
    pub filter: DMatrix<Complex64>,
    /// Trapezoidal contour quadrature of the same integral.
    pub contour: DMatrix<Complex64>,
    /// Contour approximation of the spectral projector of the window.
    pub projector: DMatrix<Complex64>,
    /// Eigenvalues of `M` inside the window, ascending.
    pub inside: Vec<f64>,
    /// `‖filter - contour‖`.
    pub difference: f64,
    /// `‖P² - P‖` for the contour projector.
    pub idempotence_defect: f64,
    /// Max distance between `σ(filter)` and `{0}` ∪ inside, matched in sorted order.
    pub spectrum_defect: f64,
    pub n_quad: usize,
}

pub const DEFAULT_QUAD_NODES: usize = 256;

/// Computes `T` for the window `(center - radius, center + radius)`.
///
/// `dist_tol` defaults to `1e-6 ‖M‖`; an eigenvalue that close to the
/// window boundary is an error.
pub fn riesz_project(
    m: &DMatrix<Complex64>,
    center: f64,
    radius: f64,
    n_quad: usize,
    dist_tol: Option<f64>,
) -> Result<RieszResult> {
    if !(radius > 0.0) || n_quad < 3 {
        return Err(Error::InvalidParameter("need radius > 0 and at least 3 contour nodes".into()));
    }
    let eig = eigen_hermitian(m, DEFAULT_RESIDUAL_TOL)?;
    let norm = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = dist_tol.unwrap_or(1e-6 * norm);
    for &l in &eig.values {
        let dist = ((l - center).abs() - radius).abs();
        if dist <= tol {
            return Err(Error::EigenvalueOnContour {
                eigenvalue: l,
                distance: dist,
                tolerance: tol,
            });
        }
    }
    let is_inside = |l: f64| (l - center).abs() < radius;
    let inside: Vec<f64> = eig.values.iter().copied().filter(|&l| is_inside(l)).collect();
    let filter = eig.reconstruct(|l| if is_inside(l) { l } else { 0.0 });

    let n = m.nrows();
    let mut contour = DMatrix::<Complex64>::zeros(n, n);
    let mut projector = DMatrix::<Complex64>::zeros(n, n);
    let id = DMatrix::<Complex64>::identity(n, n);
    let scale = -radius / n_quad as f64;
    for k in 0..n_quad {
        let theta = 2.0 * PI * (k as f64 + 0.5) / n_quad as f64;
        let e = Complex64::from_polar(1.0, theta);
        let z = center + radius * e;
        let shifted = m - id.map(|v| v * z);
        let resolvent = shifted.lu().try_inverse().ok_or(Error::EigenvalueOnContour {
            eigenvalue: z.re,
            distance: 0.0,
            tolerance: tol,
        })?;
        projector += resolvent.map(|v| v * (scale * e));
        contour += resolvent.map(|v| v * (scale * e * z));
    }
    let difference = operator_norm(&(&filter - &contour));
    let idempotence_defect = operator_norm(&(&projector * &projector - &projector));

    let t_spec = eigenvalues_hermitian(&filter, DEFAULT_RESIDUAL_TOL)?.eigenvalues;
    let mut expected = inside.clone();
    expected.extend(std::iter::repeat_n(0.0, n - inside.len()));
    expected.sort_by(f64::total_cmp);
    let spectrum_defect = t_spec
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(RieszResult {
        filter,
        contour,
        projector,
        inside,
        difference,
        idempotence_defect,
        spectrum_defect,
        n_quad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    #[test]
    fn window_containing_everything_returns_the_matrix() {
        let m = diag(&[-1.0, 0.5, 2.0]);
        let r = riesz_project(&m, 0.5, 3.0, 256, None).unwrap();
        assert!((&r.filter - &m).norm() < 1e-14);
        assert!(r.difference < 1e-10);
        assert_eq!(r.inside.len(), 3);
    }

    #[test]
    fn empty_window_gives_zero() {
        let m = diag(&[-1.0, 0.5, 2.0]);
        let r = riesz_project(&m, 5.0, 1.0, 256, None).unwrap();
        assert_eq!(r.filter.norm(), 0.0);
        assert!(r.contour.norm() < 1e-10);
    }

    #[test]
    fn contour_through_an_eigenvalue_is_rejected() {
        let m = diag(&[-1.0, 0.5, 2.0]);
        assert!(matches!(
            riesz_project(&m, 0.0, 1.0, 64, None),
            Err(Error::EigenvalueOnContour { .. })
        ));
    }

    #[test]
    fn partial_window_keeps_zero_plus_inside() {
        let m = diag(&[-2.0, -1.0, 1.0, 2.0]);
        let r = riesz_project(&m, 1.5, 1.0, 256, None).unwrap();
        assert_eq!(r.inside, vec![1.0, 2.0]);
        assert!(r.spectrum_defect < 1e-14);
        assert!(r.idempotence_defect < 1e-8);
        assert!(r.difference < 1e-6);
    }
}
