//! Galerkin blocks `⟨A_{γγ',b} e_{k'}, e_k⟩`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::kernel::{fl_reduced, KernelEvaluator};
use super::tensor::{transform_all_axes, AxisMap};
use super::{fourier_modes, inf_distance, to_f64, TruncationParams};
use crate::error::{Error, Result};
use crate::geometry::{FluxGeometry, MagneticField};
use crate::quadrature::CellGrid;
use crate::symbols::{Symbol, XiClass};

/// Largest block size for which the exact spectral norm is computed.
const EXACT_NORM_LIMIT: usize = 64;

/// How a block norm was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Largest singular value.
    Spectral,
    /// Frobenius norm, an upper bound for the spectral norm.
    Frobenius,
}

impl NormKind {
    pub fn label(&self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::Frobenius => "frobenius",
        }
    }
}

/// One `m × m` block, rows and columns indexed by Fourier modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub matrix: DMatrix<Complex64>,
}

impl Block {
    pub fn zeros(m: usize) -> Self {
        Block {
            matrix: DMatrix::zeros(m, m),
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn norm_kind(&self) -> NormKind {
        if self.size() <= EXACT_NORM_LIMIT {
            NormKind::Spectral
        } else {
            NormKind::Frobenius
        }
    }

    /// Operator norm (exact up to `m = 64`, Frobenius bound above).
    pub fn norm(&self) -> f64 {
        matrix_norm(&self.matrix)
    }

    pub fn adjoint(&self) -> Block {
        Block {
            matrix: self.matrix.adjoint(),
        }
    }
}

pub(crate) fn matrix_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() <= EXACT_NORM_LIMIT && m.ncols() <= EXACT_NORM_LIMIT {
        m.singular_values().max()
    } else {
        m.norm()
    }
}

/// Precomputed grids and Fourier maps shared by all blocks of one assembly.
pub struct Assembler<'a> {
    symbol: &'a Symbol,
    geom: &'a FluxGeometry,
    params: TruncationParams,
    grid: CellGrid,
    modes: Vec<Vec<i64>>,
    /// `w_j e^{2πi k x_j}`: projects a column index onto mode `k'`.
    right: AxisMap,
    /// `w_i e^{-2πi k x_i}`: projects a row index onto mode `k`.
    left: AxisMap,
    kernel: Option<KernelEvaluator<'a>>,
}

impl<'a> Assembler<'a> {
    pub fn new(symbol: &'a Symbol, geom: &'a FluxGeometry, params: TruncationParams) -> Result<Self> {
        if symbol.dim() != geom.dim() {
            return Err(Error::DimensionMismatch {
                expected: geom.dim(),
                found: symbol.dim(),
            });
        }
        params.validate(symbol)?;
        let d = symbol.dim();
        let grid = CellGrid::new(d, params.space_quad);
        let modes = fourier_modes(d, params.fourier_cutoff);
        let k_max = params.fourier_cutoff as i64;
        let per_axis = params.modes_per_axis();
        let axis = grid.axis.clone();
        let right = AxisMap::new(per_axis, params.space_quad, |r, c| {
            let k = r as i64 - k_max;
            axis.weights[c] * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * axis.nodes[c])
        });
        let left = AxisMap::new(per_axis, params.space_quad, |r, c| {
            let k = r as i64 - k_max;
            axis.weights[c] * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * axis.nodes[c])
        });
        let kernel = match symbol.xi_class() {
            XiClass::Hopping(_) => None,
            _ => Some(KernelEvaluator::new(
                symbol,
                geom,
                params.epsilon,
                params.band_cut as f64 + 1.0,
            )?),
        };
        Ok(Assembler {
            symbol,
            geom,
            params,
            grid,
            modes,
            right,
            left,
            kernel,
        })
    }

    pub fn params(&self) -> &TruncationParams {
        &self.params
    }

    pub fn symbol(&self) -> &Symbol {
        self.symbol
    }

    pub fn geometry(&self) -> &FluxGeometry {
        self.geom
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }

    pub fn block_size(&self) -> usize {
        self.modes.len()
    }

    fn check_pair(&self, gamma: &[i64], gamma0: &[i64]) -> Result<()> {
        let d = self.symbol.dim();
        for len in [gamma.len(), gamma0.len()] {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, found: len });
            }
        }
        if inf_distance(gamma, gamma0) > self.params.band_cut as i64 {
            return Err(Error::BandViolation {
                row: gamma.to_vec(),
                col: gamma0.to_vec(),
                band_cut: self.params.band_cut,
            });
        }
        Ok(())
    }

    /// The block at field strength `b` between cells `γ` (rows) and `γ'` (columns).
    pub fn block(&self, b: f64, gamma: &[i64], gamma0: &[i64]) -> Result<Block> {
        self.check_pair(gamma, gamma0)?;
        match self.symbol.xi_class() {
            XiClass::Hopping(_) => Ok(self.hopping_block(b, gamma, gamma0)),
            _ => {
                if self.symbol.factored().is_some() {
                    let delta: Vec<i64> = gamma.iter().zip(gamma0).map(|(a, c)| a - c).collect();
                    let table = self.offset_table(&delta)?;
                    Ok(self.factored_block(b, gamma, gamma0, &table))
                } else {
                    Ok(self.generic_block(b, gamma, gamma0))
                }
            }
        }
    }

    /// Offset table for `δ = γ - γ'`, shared by all pairs with that offset.
    pub(crate) fn offset_table(&self, delta: &[i64]) -> Result<Vec<Complex64>> {
        match &self.kernel {
            Some(k) => k.offset_table(delta, &self.grid),
            None => Err(Error::UnsupportedSymbolClass {
                class: "hopping",
                reason: "hopping blocks have closed forms",
            }),
        }
    }

    pub(crate) fn uses_offset_tables(&self) -> bool {
        self.kernel.is_some() && self.symbol.factored().is_some()
    }

    /// `c_δ ∫_Ω e^{ib fl_{γγ'}(x,x)} e^{2πi(k'-k)·x} dx` with `δ = γ' - γ`.
    fn hopping_block(&self, b: f64, gamma: &[i64], gamma0: &[i64]) -> Block {
        let m = self.block_size();
        let delta: Vec<i64> = gamma0.iter().zip(gamma).map(|(a, c)| a - c).collect();
        let Some(hops) = self.symbol.hops() else {
            return Block::zeros(m);
        };
        let Some(coeff) = hops.iter().find(|h| h.shift == delta).map(|h| h.coeff) else {
            return Block::zeros(m);
        };
        let d = self.symbol.dim();
        let mut out = DMatrix::zeros(m, m);
        match self.geom.field() {
            MagneticField::Constant { matrix, .. } => {
                // fl_{γγ'}(x, x) = x·Bδ exactly; the cell integral factorizes.
                let bdelta: Vec<f64> = (0..d)
                    .map(|j| (0..d).map(|k| matrix[j * d + k] * delta[k] as f64).sum())
                    .collect();
                for (r, k) in self.modes.iter().enumerate() {
                    for (c, k0) in self.modes.iter().enumerate() {
                        let mut v = 1.0;
                        for a in 0..d {
                            let omega = b * bdelta[a] + 2.0 * PI * (k0[a] - k[a]) as f64;
                            v *= half_sinc(omega);
                        }
                        out[(r, c)] = coeff * v;
                    }
                }
            }
            MagneticField::Smooth { .. } => {
                let g = to_f64(gamma);
                let g0 = to_f64(gamma0);
                let phases: Vec<Complex64> = self
                    .grid
                    .points
                    .iter()
                    .map(|x| {
                        let y: Vec<f64> = x.iter().zip(&g).map(|(a, c)| a + c).collect();
                        let y0: Vec<f64> = x.iter().zip(&g0).map(|(a, c)| a + c).collect();
                        Complex64::from_polar(1.0, b * fl_reduced(self.geom, &g, &g0, &y, &y0))
                    })
                    .collect();
                for (r, k) in self.modes.iter().enumerate() {
                    for (c, k0) in self.modes.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for ((x, &w), ph) in self.grid.points.iter().zip(&self.grid.weights).zip(&phases) {
                            let arg: f64 = (0..d).map(|a| (k0[a] - k[a]) as f64 * x[a]).sum();
                            acc += w * ph * Complex64::from_polar(1.0, 2.0 * PI * arg);
                        }
                        out[(r, c)] = coeff * acc;
                    }
                }
            }
        }
        Block { matrix: out }
    }

    /// Kernel samples on the cell grid pair, using a precomputed offset table.
    pub(crate) fn factored_block(&self, b: f64, gamma: &[i64], gamma0: &[i64], table: &[Complex64]) -> Block {
        let factored = self.symbol.factored().expect("factored symbol");
        let d = self.symbol.dim();
        let q = self.grid.order();
        let n = self.grid.len();
        let g = to_f64(gamma);
        let g0 = to_f64(gamma0);
        let shifted: Vec<Vec<f64>> = self
            .grid
            .points
            .iter()
            .map(|x| x.iter().zip(&g).map(|(a, c)| a + c).collect())
            .collect();
        let shifted0: Vec<Vec<f64>> = self
            .grid
            .points
            .iter()
            .map(|x| x.iter().zip(&g0).map(|(a, c)| a + c).collect())
            .collect();
        let base = self.geom.phi_unchecked(&g0, &g);
        let row_flux: Vec<f64> = shifted.iter().map(|y| self.geom.phi_unchecked(y, &g)).collect();
        let col_flux: Vec<f64> = shifted0.iter().map(|y| self.geom.phi_unchecked(y, &g0)).collect();
        let row_idx: Vec<Vec<usize>> = (0..n).map(|i| self.grid.axis_indices(i)).collect();
        let mut kmat = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut p = 0usize;
                for a in 0..d {
                    p = p * q * q + row_idx[i][a] * q + row_idx[j][a];
                }
                let flux = base - row_flux[i] + self.geom.phi_unchecked(&shifted[i], &shifted0[j]) + col_flux[j];
                let amp = (factored.amplitude)(&shifted[i], &shifted0[j]);
                kmat[i * n + j] = Complex64::from_polar(1.0, b * flux) * amp * table[p];
            }
        }
        self.project(&kmat)
    }

    fn generic_block(&self, b: f64, gamma: &[i64], gamma0: &[i64]) -> Block {
        let kernel = self.kernel.as_ref().expect("kernel evaluator");
        let n = self.grid.len();
        let mut kmat = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                kmat[i * n + j] = kernel.kernel(b, gamma, gamma0, &self.grid.points[i], &self.grid.points[j]);
            }
        }
        self.project(&kmat)
    }

    /// `Block[k,k'] = Σ_{i,j} w_i w_j e^{-2πik·x_i} K(x_i, x_j) e^{2πik'·x_j}`.
    fn project(&self, kmat: &[Complex64]) -> Block {
        let d = self.symbol.dim();
        let n = self.grid.len();
        let m = self.block_size();
        let mut half = vec![Complex64::new(0.0, 0.0); n * m];
        for i in 0..n {
            let row = transform_all_axes(&kmat[i * n..(i + 1) * n], d, &self.right);
            half[i * m..(i + 1) * m].copy_from_slice(&row);
        }
        let mut out = DMatrix::zeros(m, m);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..m {
            for i in 0..n {
                col[i] = half[i * m + c];
            }
            let projected = transform_all_axes(&col, d, &self.left);
            for (r, v) in projected.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Block { matrix: out }
    }
}

/// `∫_{-1/2}^{1/2} e^{iωx} dx = sin(ω/2)/(ω/2)`.
fn half_sinc(omega: f64) -> f64 {
    let h = 0.5 * omega;
    if h.abs() < 1e-8 {
        1.0 - h * h / 6.0
    } else {
        h.sin() / h
    }
}

/// Assembles a single block; see [`Assembler::block`].
pub fn assemble_block(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b: f64,
    gamma: &[i64],
    gamma0: &[i64],
    params: &TruncationParams,
) -> Result<Block> {
    Assembler::new(symbol, geom, *params)?.block(b, gamma, gamma0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_on;
    use crate::symbols::{gaussian_xi, harper, Symbol};
    use std::sync::Arc;

    fn planar() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn harper_off_hop_blocks_vanish() {
        let h = harper(2).unwrap();
        let p = TruncationParams::new(2, 4, 1, 6);
        let blk = assemble_block(&h, &planar(), 0.4, &[0, 0], &[1, 1], &p).unwrap();
        assert!(blk.matrix.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn harper_hop_at_zero_field_is_identity() {
        let h = harper(2).unwrap();
        let p = TruncationParams::new(2, 4, 2, 6);
        let blk = assemble_block(&h, &planar(), 0.0, &[0, 0], &[1, 0], &p).unwrap();
        let id = DMatrix::<Complex64>::identity(25, 25);
        assert!((blk.matrix - id).norm() < 1e-15);
    }

    #[test]
    fn band_violation_is_reported() {
        let h = harper(2).unwrap();
        let p = TruncationParams::new(2, 1, 0, 4);
        assert!(matches!(
            assemble_block(&h, &planar(), 0.0, &[0, 0], &[2, 0], &p),
            Err(Error::BandViolation { .. })
        ));
    }

    /// Independent oracle: tensor Gauss–Legendre of high order on the cell.
    fn fiber_integral(geom: &FluxGeometry, b: f64, gamma: &[i64], gamma0: &[i64], dk: [i64; 2]) -> Complex64 {
        let rule = gauss_legendre_on(40, -0.5, 0.5);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            for (&x2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let x = [x1, x2];
                let fl = geom.fl_gamma(gamma, gamma0, &x, &x).unwrap();
                let arg = b * fl + 2.0 * PI * (dk[0] as f64 * x1 + dk[1] as f64 * x2);
                acc += w1 * w2 * Complex64::from_polar(1.0, arg);
            }
        }
        acc
    }

    #[test]
    fn harper_constant_field_matches_direct_cell_quadrature() {
        let h = harper(2).unwrap();
        let geom = planar();
        let p = TruncationParams::new(3, 2, 1, 8);
        let asm = Assembler::new(&h, &geom, p).unwrap();
        for (gamma, gamma0) in [([2i64, -1i64], [2i64, 0i64]), ([0, 3], [-1, 3])] {
            let blk = asm.block(1.3, &gamma, &gamma0).unwrap();
            for (r, k) in asm.modes().iter().enumerate() {
                for (c, k0) in asm.modes().iter().enumerate() {
                    let want = fiber_integral(&geom, 1.3, &gamma, &gamma0, [k0[0] - k[0], k0[1] - k[1]]);
                    assert!((blk.matrix[(r, c)] - want).norm() < 1e-10);
                }
                assert!(blk.matrix[(r, r)].norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn harper_smooth_field_matches_direct_cell_quadrature() {
        let h = harper(2).unwrap();
        let geom = FluxGeometry::with_default_quadrature(MagneticField::cosine_planar(0.8));
        let p = TruncationParams::new(3, 2, 1, 16);
        let asm = Assembler::new(&h, &geom, p).unwrap();
        let blk = asm.block(0.9, &[1, 2], &[1, 1]).unwrap();
        for (r, k) in asm.modes().iter().enumerate() {
            for (c, k0) in asm.modes().iter().enumerate() {
                let want = fiber_integral(&geom, 0.9, &[1, 2], &[1, 1], [k0[0] - k[0], k0[1] - k[1]]);
                assert!((blk.matrix[(r, c)] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn factored_path_matches_generic_path() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let plain = Symbol::custom(
            "gaussian-unfactored",
            2,
            0.0,
            true,
            g.xi_class().clone(),
            Arc::new(|_x: &[f64], _y: &[f64], xi: &[f64]| {
                Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 2.0).exp(), 0.0)
            }),
        )
        .unwrap();
        let geom = planar();
        let p = TruncationParams::new(1, 2, 1, 3);
        let fast = Assembler::new(&g, &geom, p).unwrap().block(0.6, &[1, 0], &[0, -1]).unwrap();
        let slow = Assembler::new(&plain, &geom, p).unwrap().block(0.6, &[1, 0], &[0, -1]).unwrap();
        assert!((fast.matrix - slow.matrix).norm() < 1e-13);
    }

    #[test]
    fn block_norm_kind_depends_on_size() {
        assert_eq!(Block::zeros(49).norm_kind(), NormKind::Spectral);
        assert_eq!(Block::zeros(81).norm_kind(), NormKind::Frobenius);
        let mut b = Block::zeros(2);
        b.matrix[(0, 0)] = Complex64::new(3.0, 4.0);
        assert!((b.norm() - 5.0).abs() < 1e-14);
    }
}
