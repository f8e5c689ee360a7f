//! The cell decomposition `(U_b f)_γ(x) = e^{-ibφ(x+γ,γ)} f(x+γ)` on grids.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::tensor::{transform_all_axes, AxisMap};
use super::{to_f64, Lattice, TruncationParams};
use crate::error::{Error, Result};
use crate::geometry::FluxGeometry;
use crate::quadrature::CellGrid;

/// Samples of a cell-decomposed function on the `Q^d` grid of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    dim: usize,
    order: usize,
    cells: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl SampledFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid nodes per axis.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> &BTreeMap<Vec<i64>, Vec<Complex64>> {
        &self.cells
    }

    pub fn cell(&self, gamma: &[i64]) -> Option<&[Complex64]> {
        self.cells.get(gamma).map(|v| v.as_slice())
    }

    /// `(Σ_γ Σ_i w_i |v_γ(x_i)|²)^{1/2}`.
    pub fn grid_norm(&self) -> f64 {
        let grid = CellGrid::new(self.dim, self.order);
        self.cells
            .values()
            .flat_map(|v| v.iter().zip(&grid.weights).map(|(z, w)| w * z.norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    /// Fourier coefficients `c_{γ,k} = Σ_i w_i v_γ(x_i) e^{-2πik·x_i}` laid out
    /// like a flattened matrix of `params` (site-major, mode-minor).
    pub fn fourier_coefficients(&self, params: &TruncationParams) -> Result<Vec<Complex64>> {
        if params.space_quad != self.order {
            return Err(Error::GridMismatch {
                expected: params.space_quad,
                found: self.order,
            });
        }
        let lattice = Lattice::new(self.dim, params.lattice_radius);
        let m = params.modes(self.dim);
        let grid = CellGrid::new(self.dim, self.order);
        let k_max = params.fourier_cutoff as i64;
        let map = AxisMap::new(params.modes_per_axis(), self.order, |r, c| {
            let k = (r as i64 - k_max) as f64;
            grid.axis.weights[c] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * grid.axis.nodes[c])
        });
        let mut out = vec![Complex64::new(0.0, 0.0); lattice.len() * m];
        for (gamma, values) in &self.cells {
            if let Some(i) = lattice.index_of(gamma) {
                let c = transform_all_axes(values, self.dim, &map);
                out[i * m..(i + 1) * m].copy_from_slice(&c);
            }
        }
        Ok(out)
    }
}

fn check_support(support_radius: f64, params: &TruncationParams) -> Result<()> {
    let limit = params.lattice_radius as f64 + 0.5;
    if !(support_radius <= limit) {
        return Err(Error::SupportExceedsLattice {
            support: support_radius,
            limit,
        });
    }
    Ok(())
}

/// Samples `U_b f` on every cell `|γ|_∞ <= R`. `f` must vanish outside
/// `|x|_∞ <= support_radius`, which has to fit in the lattice box.
pub fn apply_ub(
    geom: &FluxGeometry,
    b: f64,
    f: &dyn Fn(&[f64]) -> Complex64,
    support_radius: f64,
    params: &TruncationParams,
) -> Result<SampledFunction> {
    check_support(support_radius, params)?;
    let d = geom.dim();
    let grid = CellGrid::new(d, params.space_quad);
    let lattice = Lattice::new(d, params.lattice_radius);
    let mut cells = BTreeMap::new();
    for gamma in lattice.sites() {
        let g = to_f64(gamma);
        let values = grid
            .points
            .iter()
            .map(|x| {
                let y: Vec<f64> = x.iter().zip(&g).map(|(a, c)| a + c).collect();
                Complex64::from_polar(1.0, -b * geom.phi_unchecked(&y, &g)) * f(&y)
            })
            .collect();
        cells.insert(gamma.clone(), values);
    }
    Ok(SampledFunction {
        dim: d,
        order: params.space_quad,
        cells,
    })
}

/// Removes the gauge phase: returns the samples `f(x + γ)` cell by cell.
pub fn apply_ub_inverse(geom: &FluxGeometry, b: f64, u: &SampledFunction) -> Result<SampledFunction> {
    if u.dim != geom.dim() {
        return Err(Error::DimensionMismatch {
            expected: geom.dim(),
            found: u.dim,
        });
    }
    let grid = CellGrid::new(u.dim, u.order);
    let cells = u
        .cells
        .iter()
        .map(|(gamma, values)| {
            let g = to_f64(gamma);
            let restored = grid
                .points
                .iter()
                .zip(values)
                .map(|(x, v)| {
                    let y: Vec<f64> = x.iter().zip(&g).map(|(a, c)| a + c).collect();
                    Complex64::from_polar(1.0, b * geom.phi_unchecked(&y, &g)) * v
                })
                .collect();
            (gamma.clone(), restored)
        })
        .collect();
    Ok(SampledFunction {
        dim: u.dim,
        order: u.order,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MagneticField;

    fn bump(x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|a| (a - 0.3) * (a - 0.3)).sum();
        Complex64::new((-r2).exp(), 0.2 * x[0])
    }

    fn geom() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn zero_field_is_cell_restriction() {
        let p = TruncationParams::new(2, 0, 1, 5);
        let u = apply_ub(&geom(), 0.0, &bump, 2.5, &p).unwrap();
        let grid = CellGrid::new(2, 5);
        let vals = u.cell(&[1, -2]).unwrap();
        for (x, v) in grid.points.iter().zip(vals) {
            assert_eq!(*v, bump(&[x[0] + 1.0, x[1] - 2.0]));
        }
    }

    #[test]
    fn inverse_recovers_samples_and_norm_is_preserved() {
        let p = TruncationParams::new(2, 0, 1, 5);
        let g = geom();
        let u = apply_ub(&g, 1.7, &bump, 2.5, &p).unwrap();
        let plain = apply_ub(&g, 0.0, &bump, 2.5, &p).unwrap();
        let back = apply_ub_inverse(&g, 1.7, &u).unwrap();
        for (gamma, vals) in back.cells() {
            for (a, c) in vals.iter().zip(plain.cell(gamma).unwrap()) {
                assert!((a - c).norm() <= 1e-15);
            }
        }
        assert!((u.grid_norm() - plain.grid_norm()).abs() < 1e-14);
    }

    #[test]
    fn support_must_fit_and_grids_must_match() {
        let p = TruncationParams::new(1, 0, 1, 4);
        assert!(matches!(
            apply_ub(&geom(), 0.0, &bump, 2.0, &p),
            Err(Error::SupportExceedsLattice { .. })
        ));
        let u = apply_ub(&geom(), 0.0, &bump, 1.5, &p).unwrap();
        let other = TruncationParams::new(1, 0, 1, 6);
        assert!(matches!(u.fourier_coefficients(&other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn constant_function_has_only_the_zero_mode() {
        let p = TruncationParams::new(0, 0, 2, 12);
        let u = apply_ub(&geom(), 0.0, &|_x: &[f64]| Complex64::new(2.0, 0.0), 0.5, &p).unwrap();
        let c = u.fourier_coefficients(&p).unwrap();
        for (i, z) in c.iter().enumerate() {
            let want = if i == 12 { 2.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-10, "mode {i}: {z}");
        }
    }
}
