//! Brute-force quadrature of `⟨Op(a_b) f, g⟩` directly in `R^d`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::tensor::{transform_all_axes, AxisMap};
use crate::error::{Error, Result};
use crate::geometry::{japanese, FluxGeometry};
use crate::quadrature::{composite_gauss_legendre, unflatten_index, Rule};
use crate::symbols::{Symbol, XiClass};

/// Quadrature extents for [`quadratic_form_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    /// `f` and `g` are integrated over `|x|_∞ <= x_half_width`.
    pub x_half_width: f64,
    pub x_panels: usize,
    pub x_nodes_per_panel: usize,
    /// ξ box half-width for General symbols; XiIntegrable symbols use their declared box.
    pub xi_half_width: Option<f64>,
    pub xi_panels: usize,
    pub xi_nodes_per_panel: usize,
    /// Largest relative value of `f`, `g` allowed on the x-box boundary.
    pub tail_tol: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            x_half_width: 3.5,
            x_panels: 7,
            x_nodes_per_panel: 8,
            xi_half_width: None,
            xi_panels: 6,
            xi_nodes_per_panel: 12,
            tail_tol: 1e-6,
        }
    }
}

/// Test function `exp(-|x-c|²/(2s²)) Π_a cos^{2p}(πx_a)` on the box
/// `|x|_∞ <= support`, zero outside.
///
/// The window vanishes to order `2p` on every cell face, so each cell piece
/// (with or without a smooth gauge phase) has rapidly decaying Fourier
/// coefficients on the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub window_power: u32,
    pub support: f64,
}

impl GaussianBump {
    /// `support` must be a positive half-integer so the cut falls on cell faces.
    pub fn new(center: Vec<f64>, width: f64, window_power: u32, support: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("bump width must be positive, got {width}")));
        }
        if !(support > 0.0) || (support - 0.5).fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bump support must be a positive half-integer, got {support}"
            )));
        }
        if center.iter().any(|c| c.abs() >= support) {
            return Err(Error::InvalidParameter("bump center lies outside its support".into()));
        }
        Ok(GaussianBump {
            center,
            width,
            window_power,
            support,
        })
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        if x.iter().any(|v| v.abs() > self.support) {
            return Complex64::new(0.0, 0.0);
        }
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        let window: f64 = x
            .iter()
            .map(|a| (PI * a).cos().powi(2 * self.window_power as i32))
            .product();
        Complex64::new((-r2 / (2.0 * self.width * self.width)).exp() * window, 0.0)
    }
}

/// `(2π)^{-d} ∫∫∫ e^{iξ·(x-x')} e^{ibφ(x,x')} e^{-ε⟨ξ⟩} a(x,x',ξ) f(x') conj(g(x)) dx' dx dξ`.
pub fn quadratic_form_oracle(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b: f64,
    epsilon: f64,
    f: &dyn Fn(&[f64]) -> Complex64,
    g: &dyn Fn(&[f64]) -> Complex64,
    grid: &OracleGrid,
) -> Result<Complex64> {
    let d = symbol.dim();
    if d != geom.dim() {
        return Err(Error::DimensionMismatch {
            expected: geom.dim(),
            found: d,
        });
    }
    let xi_l = match symbol.xi_class() {
        XiClass::Hopping(_) => {
            return Err(Error::UnsupportedSymbolClass {
                class: "hopping",
                reason: "the oracle integrates symbols with decay in xi",
            })
        }
        XiClass::XiIntegrable { box_halfwidth, .. } => *box_halfwidth,
        XiClass::General => {
            if !(epsilon > 0.0) {
                return Err(Error::UnsupportedSymbolClass {
                    class: "general",
                    reason: "epsilon = 0 requires a hopping or xi-integrable symbol",
                });
            }
            grid.xi_half_width.unwrap_or((1e12f64).ln() / epsilon)
        }
    };
    let x_rule = composite_gauss_legendre(grid.x_nodes_per_panel, grid.x_panels, -grid.x_half_width, grid.x_half_width);
    let xi_rule = composite_gauss_legendre(grid.xi_nodes_per_panel, grid.xi_panels, -xi_l, xi_l);
    let xs = tensor_points(&x_rule, d);
    let xw = tensor_weights(&x_rule, d);
    let fv: Vec<Complex64> = xs.iter().map(|x| f(x)).collect();
    let gv: Vec<Complex64> = xs.iter().map(|x| g(x)).collect();
    check_tail(f, &fv, grid, d)?;
    check_tail(g, &gv, grid, d)?;

    let nx = xs.len();
    let nxi = xi_rule.len();
    let xi_pts = tensor_points(&xi_rule, d);
    let xi_w: Vec<f64> = tensor_weights(&xi_rule, d)
        .into_iter()
        .zip(&xi_pts)
        .map(|(w, xi)| {
            let damp = if epsilon > 0.0 { (-epsilon * japanese(xi)).exp() } else { 1.0 };
            w * damp * (2.0 * PI).powi(-(d as i32))
        })
        .collect();
    // e^{-iξ_m x_j} along one axis
    let minus = AxisMap::new(nxi, x_rule.len(), |m, j| {
        Complex64::from_polar(1.0, -xi_rule.nodes[m] * x_rule.nodes[j])
    });

    let total = match symbol.factored() {
        Some(fac) => {
            let profile: Vec<Complex64> = xi_pts.iter().map(|xi| (fac.profile)(xi)).collect();
            let mut acc = vec![Complex64::new(0.0, 0.0); xi_pts.len()];
            let mut row = vec![Complex64::new(0.0, 0.0); nx];
            for i in 0..nx {
                let gi = gv[i].conj() * xw[i];
                if gi == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..nx {
                    let phase = Complex64::from_polar(1.0, b * geom.phi_unchecked(&xs[i], &xs[j]));
                    row[j] = gi * phase * (fac.amplitude)(&xs[i], &xs[j]) * fv[j] * xw[j];
                }
                let s = transform_all_axes(&row, d, &minus);
                for (m, xi) in xi_pts.iter().enumerate() {
                    let ph: f64 = xi.iter().zip(&xs[i]).map(|(a, c)| a * c).sum();
                    acc[m] += Complex64::from_polar(1.0, ph) * s[m];
                }
            }
            acc.iter()
                .zip(&profile)
                .zip(&xi_w)
                .map(|((a, p), w)| a * p * *w)
                .sum()
        }
        None => {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..nx {
                let gi = gv[i].conj() * xw[i];
                for j in 0..nx {
                    let fj = fv[j] * xw[j];
                    if gi == Complex64::new(0.0, 0.0) || fj == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let phase = Complex64::from_polar(1.0, b * geom.phi_unchecked(&xs[i], &xs[j]));
                    let diff: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(a, c)| a - c).collect();
                    let mut inner = Complex64::new(0.0, 0.0);
                    for (xi, w) in xi_pts.iter().zip(&xi_w) {
                        let ph: f64 = xi.iter().zip(&diff).map(|(a, c)| a * c).sum();
                        inner += *w * Complex64::from_polar(1.0, ph) * symbol.eval(&xs[i], &xs[j], xi);
                    }
                    acc += gi * phase * inner * fj;
                }
            }
            acc
        }
    };
    Ok(total)
}

fn tensor_points(rule: &Rule, d: usize) -> Vec<Vec<f64>> {
    let n = rule.len();
    (0..n.pow(d as u32))
        .map(|flat| unflatten_index(flat, n, d).into_iter().map(|i| rule.nodes[i]).collect())
        .collect()
}

fn tensor_weights(rule: &Rule, d: usize) -> Vec<f64> {
    let n = rule.len();
    (0..n.pow(d as u32))
        .map(|flat| unflatten_index(flat, n, d).into_iter().map(|i| rule.weights[i]).product())
        .collect()
}

/// Largest `|h|` on the faces of the x-box must be small relative to `max |h|`.
fn check_tail(h: &dyn Fn(&[f64]) -> Complex64, samples: &[Complex64], grid: &OracleGrid, d: usize) -> Result<()> {
    let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let l = grid.x_half_width;
    let probe = composite_gauss_legendre(4, 2 * grid.x_panels, -l, l);
    let mut edge = 0.0f64;
    for axis in 0..d {
        for side in [-l, l] {
            for &t in &probe.nodes {
                let mut p = vec![t; d];
                p[axis] = side;
                edge = edge.max(h(&p).norm());
            }
        }
    }
    if edge > grid.tail_tol * peak {
        return Err(Error::TailViolation {
            value: edge / peak,
            tolerance: grid.tail_tol,
        });
    }
    Ok(())
}
