//! The integral kernel `K_{γγ'}(x, x')` of one block and the ξ-quadrature
//! behind it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::tensor::{transform_axes, AxisMap};
use super::to_f64;
use crate::error::{Error, Result};
use crate::geometry::{japanese, FluxGeometry};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre_on, unflatten_index, CellGrid, Rule};
use crate::symbols::{Symbol, XiClass};

/// Box for General symbols: `e^{-ε⟨ξ⟩}` drops below this outside it.
const GENERAL_TAIL_TOL: f64 = 1e-12;
const PANEL_NODES: usize = 12;
const GENERAL_PANEL_NODES: usize = 8;

/// One-dimensional ξ rule (tensorized over all axes) for `symbol` at
/// regularization `epsilon`, resolving phases `e^{iξ r}` with `|r| <= max_offset`.
pub fn xi_rule(symbol: &Symbol, epsilon: f64, max_offset: f64) -> Result<Rule> {
    let r = max_offset.abs().max(1.0);
    match symbol.xi_class() {
        XiClass::Hopping(_) => Err(Error::UnsupportedSymbolClass {
            class: "hopping",
            reason: "the xi-integral collapses onto lattice shifts; use the block fast path",
        }),
        XiClass::XiIntegrable {
            box_halfwidth,
            grid_points,
            ..
        } => {
            let l = *box_halfwidth;
            if epsilon == 0.0 {
                let n = (*grid_points).max((0.8 * r * l).ceil() as usize + 8);
                Ok(gauss_legendre_on(n, -l, l))
            } else {
                let h = (6.0 / r).min(1.0);
                let panels = (2.0 * l / h).ceil() as usize;
                Ok(composite_gauss_legendre(PANEL_NODES, panels, -l, l))
            }
        }
        XiClass::General => {
            if !(epsilon > 0.0) {
                return Err(Error::UnsupportedSymbolClass {
                    class: "general",
                    reason: "epsilon = 0 requires a hopping or xi-integrable symbol",
                });
            }
            let l = (1.0 / GENERAL_TAIL_TOL).ln() / epsilon;
            let h = (4.0 / r).min(1.0);
            let panels = (2.0 * l / h).ceil() as usize;
            Ok(composite_gauss_legendre(GENERAL_PANEL_NODES, panels, -l, l))
        }
    }
}

/// Kernel of the flux-twisted, regularized operator between cells `γ'` and `γ`.
///
/// Holds the tensor ξ grid with `(2π)^{-d} w e^{-ε⟨ξ⟩}` folded into the weights.
#[derive(Clone)]
pub struct KernelEvaluator<'a> {
    symbol: &'a Symbol,
    geom: &'a FluxGeometry,
    epsilon: f64,
    axis_rule: Rule,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(symbol: &'a Symbol, geom: &'a FluxGeometry, epsilon: f64, max_offset: f64) -> Result<Self> {
        if symbol.dim() != geom.dim() {
            return Err(Error::DimensionMismatch {
                expected: geom.dim(),
                found: symbol.dim(),
            });
        }
        let d = symbol.dim();
        let axis_rule = xi_rule(symbol, epsilon, max_offset)?;
        let n = axis_rule.len();
        let norm = (2.0 * PI).powi(-(d as i32));
        let total = n.pow(d as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten_index(flat, n, d);
            let xi: Vec<f64> = idx.iter().map(|&i| axis_rule.nodes[i]).collect();
            let w: f64 = idx.iter().map(|&i| axis_rule.weights[i]).product();
            let damp = if epsilon > 0.0 { (-epsilon * japanese(&xi)).exp() } else { 1.0 };
            weights.push(norm * w * damp);
            points.push(xi);
        }
        Ok(KernelEvaluator {
            symbol,
            geom,
            epsilon,
            axis_rule,
            points,
            weights,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn xi_nodes(&self) -> usize {
        self.points.len()
    }

    /// `K_{γγ'}(x, x')` by direct quadrature over the ξ grid.
    pub fn kernel(&self, b: f64, gamma: &[i64], gamma0: &[i64], x: &[f64], x0: &[f64]) -> Complex64 {
        let g = to_f64(gamma);
        let g0 = to_f64(gamma0);
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, c)| a + c).collect();
        let y0: Vec<f64> = x0.iter().zip(&g0).map(|(a, c)| a + c).collect();
        let flux = fl_reduced(self.geom, &g, &g0, &y, &y0);
        Complex64::from_polar(1.0, b * flux) * self.xi_integral(&y, &y0)
    }

    /// `(2π)^{-d} ∫ e^{iξ·(y-y')} e^{-ε⟨ξ⟩} a(y, y', ξ) dξ`.
    pub(crate) fn xi_integral(&self, y: &[f64], y0: &[f64]) -> Complex64 {
        let diff: Vec<f64> = y.iter().zip(y0).map(|(a, c)| a - c).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, &w) in self.points.iter().zip(&self.weights) {
            let ph: f64 = xi.iter().zip(&diff).map(|(a, c)| a * c).sum();
            acc += w * Complex64::from_polar(1.0, ph) * self.symbol.eval(y, y0, xi);
        }
        acc
    }

    /// For a factored symbol: the profile part of the ξ-integral on every
    /// pair of cell-grid points separated by the lattice offset `delta = γ - γ'`.
    ///
    /// Entry `[p_1, …, p_d]` with `p_a = i_a·Q + j_a` holds
    /// `(2π)^{-d} ∫ e^{iξ·(x_i - x_j + δ)} e^{-ε⟨ξ⟩} profile(ξ) dξ`.
    pub(crate) fn offset_table(&self, delta: &[i64], grid: &CellGrid) -> Result<Vec<Complex64>> {
        let factored = self.symbol.factored().ok_or(Error::UnsupportedSymbolClass {
            class: "non-factored",
            reason: "offset tables need an amplitude-profile factorization",
        })?;
        let q = grid.order();
        let n = self.axis_rule.len();
        let h: Vec<Complex64> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(xi, &w)| w * (factored.profile)(xi))
            .collect();
        let maps: Vec<AxisMap> = delta
            .iter()
            .map(|&da| {
                AxisMap::new(q * q, n, |p, m| {
                    let (i, j) = (p / q, p % q);
                    let r = grid.axis.nodes[i] - grid.axis.nodes[j] + da as f64;
                    Complex64::from_polar(1.0, self.axis_rule.nodes[m] * r)
                })
            })
            .collect();
        let refs: Vec<&AxisMap> = maps.iter().collect();
        Ok(transform_axes(&h, &refs))
    }
}

/// `fl_{γγ'}(x, x')` in the reduced four-term form
/// `φ(γ', γ) - φ(y, γ) + φ(y, y') + φ(y', γ')` with `y = x+γ`, `y' = x'+γ'`.
pub(crate) fn fl_reduced(geom: &FluxGeometry, g: &[f64], g0: &[f64], y: &[f64], y0: &[f64]) -> f64 {
    geom.phi_unchecked(g0, g) - geom.phi_unchecked(y, g) + geom.phi_unchecked(y, y0) + geom.phi_unchecked(y0, g0)
}

/// Single kernel evaluation with a ξ rule chosen for these arguments.
#[allow(clippy::too_many_arguments)]
pub fn kernel_k(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b: f64,
    epsilon: f64,
    gamma: &[i64],
    gamma0: &[i64],
    x: &[f64],
    x0: &[f64],
) -> Result<Complex64> {
    let d = geom.dim();
    for len in [gamma.len(), gamma0.len(), x.len(), x0.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, found: len });
        }
    }
    let offset = (0..d)
        .map(|a| (x[a] + gamma[a] as f64 - x0[a] - gamma0[a] as f64).abs())
        .fold(0.0, f64::max);
    let eval = KernelEvaluator::new(symbol, geom, epsilon, offset)?;
    Ok(eval.kernel(b, gamma, gamma0, x, x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MagneticField;
    use crate::symbols::{gaussian_xi, harper, Symbol};
    use std::sync::Arc;

    fn planar() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn gaussian_on_diagonal_is_one_over_two_pi() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let k = kernel_k(&g, &geom, 0.0, 0.0, &[0, 0], &[0, 0], &[0.1, -0.2], &[0.1, -0.2]).unwrap();
        assert!((k.re - 1.0 / (2.0 * PI)).abs() < 1e-13);
        assert!(k.im.abs() < 1e-14);
    }

    #[test]
    fn gaussian_matches_heat_kernel_off_diagonal() {
        // (2π)^{-2} ∫ e^{iξ·r - |ξ|²/2} dξ = e^{-|r|²/2} / (2π)
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let k = kernel_k(&g, &geom, 0.0, 0.0, &[2, -1], &[0, 0], &[0.3, 0.1], &[-0.2, 0.4]).unwrap();
        let r2 = 2.5f64.powi(2) + 1.3f64.powi(2);
        assert!((k.re - (-r2 / 2.0).exp() / (2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn translation_invariance_at_zero_field() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let a = kernel_k(&g, &geom, 0.0, 0.0, &[1, 0], &[0, 1], &[0.1, 0.2], &[0.3, -0.1]).unwrap();
        let b = kernel_k(&g, &geom, 0.0, 0.0, &[0, 0], &[0, 0], &[0.1 + 1.0, 0.2 - 1.0], &[0.3, -0.1]).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn flux_phase_uses_the_reduced_form() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let (gm, gm0, x, x0) = ([1i64, -1], [0i64, 1], [0.2, -0.3], [-0.1, 0.4]);
        let k0 = kernel_k(&g, &geom, 0.0, 0.0, &gm, &gm0, &x, &x0).unwrap();
        let kb = kernel_k(&g, &geom, 0.7, 0.0, &gm, &gm0, &x, &x0).unwrap();
        let fl = geom.fl_gamma(&gm, &gm0, &x, &x0).unwrap();
        assert!((kb - k0 * Complex64::from_polar(1.0, 0.7 * fl)).norm() < 1e-14);
    }

    #[test]
    fn regularization_damps_the_kernel() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let mut prev = f64::INFINITY;
        for eps in [10.0, 20.0, 40.0] {
            let k = kernel_k(&g, &geom, 0.0, eps, &[0, 0], &[0, 0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
            assert!(k.norm() < prev);
            prev = k.norm();
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn general_symbol_needs_regularization() {
        let s = Symbol::custom(
            "one",
            2,
            0.0,
            true,
            XiClass::General,
            Arc::new(|_x: &[f64], _y: &[f64], _xi: &[f64]| Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let geom = planar();
        assert!(kernel_k(&s, &geom, 0.0, 0.0, &[0, 0], &[0, 0], &[0.0, 0.0], &[0.0, 0.0]).is_err());
        // a ≡ 1 regularized: (2π)^{-2} ∫ e^{-ε⟨ξ⟩} dξ = e^{-ε}(1+ε)/(2π ε²) at r = 0
        let eps = 2.0;
        let k = kernel_k(&s, &geom, 0.0, eps, &[0, 0], &[0, 0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let exact = (-eps).exp() * (1.0 + eps) / (2.0 * PI * eps * eps);
        assert!((k.re - exact).abs() < 1e-9, "{} vs {exact}", k.re);
        assert!(kernel_k(&harper(2).unwrap(), &geom, 0.0, 0.0, &[0, 0], &[0, 0], &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn offset_table_matches_direct_integral() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let grid = CellGrid::new(2, 3);
        let eval = KernelEvaluator::new(&g, &geom, 0.1, 4.0).unwrap();
        let table = eval.offset_table(&[2, -1], &grid).unwrap();
        let q = 3;
        for (i0, j0, i1, j1) in [(0, 2, 1, 1), (2, 0, 0, 2)] {
            let y = [grid.axis.nodes[i0] + 2.0, grid.axis.nodes[i1] - 1.0];
            let y0 = [grid.axis.nodes[j0], grid.axis.nodes[j1]];
            let direct = eval.xi_integral(&y, &y0);
            let p = (i0 * q + j0) * q * q + (i1 * q + j1);
            assert!((table[p] - direct).norm() < 1e-14);
        }
    }
}
