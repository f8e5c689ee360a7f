//! Classical Hofstadter matrices `M_{γγ'} = e^{ibφ(γ,γ')} c_{γ'-γ}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{to_f64, Lattice};
use crate::error::{Error, Result};
use crate::geometry::FluxGeometry;
use crate::symbols::Hop;

/// `e^{ibφ(γ,γ')}` at lattice points.
pub fn peierls_phase(geom: &FluxGeometry, b: f64, gamma: &[i64], gamma0: &[i64]) -> Result<Complex64> {
    Ok(Complex64::from_polar(1.0, b * geom.phi(&to_f64(gamma), &to_f64(gamma0))?))
}

/// Dense Peierls matrix on `|γ|_∞ <= radius`, sites in lexicographic order.
///
/// The hop set must be Hermitian-closed (`c_{-δ} = conj(c_δ)`); the lower
/// triangle is the exact conjugate of the upper one.
pub fn peierls_matrix(hops: &[Hop], geom: &FluxGeometry, b: f64, radius: usize) -> Result<DMatrix<Complex64>> {
    let d = geom.dim();
    for h in hops {
        if h.shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: h.shift.len(),
            });
        }
        let neg: Vec<i64> = h.shift.iter().map(|s| -s).collect();
        let partner = hops.iter().find(|o| o.shift == neg);
        match partner {
            Some(o) if (o.coeff - h.coeff.conj()).norm() <= 1e-14 * (1.0 + h.coeff.norm()) => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "hop set is not Hermitian-closed at shift {:?}",
                    h.shift
                )))
            }
        }
    }
    let lattice = Lattice::new(d, radius);
    let n = lattice.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, g) in lattice.sites().iter().enumerate() {
        let gf = to_f64(g);
        for h in hops {
            let target: Vec<i64> = g.iter().zip(&h.shift).map(|(a, s)| a + s).collect();
            let Some(j) = lattice.index_of(&target) else { continue };
            if j < i {
                continue;
            }
            if j == i {
                m[(i, i)] += Complex64::new(h.coeff.re, 0.0);
                continue;
            }
            let v = Complex64::from_polar(1.0, b * geom.phi_unchecked(&gf, &to_f64(&target))) * h.coeff;
            m[(i, j)] += v;
            m[(j, i)] += v.conj();
        }
    }
    Ok(m)
}
