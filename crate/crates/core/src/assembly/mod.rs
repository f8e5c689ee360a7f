//! Finite truncations of the generalized matrix `{e^{ibφ(γ,γ')} A_{γγ',b}}`.
//!
//! Sites are the lattice points `|γ|_∞ <= R`; each block is the Galerkin
//! matrix of `A_{γγ',b}` in the Fourier basis `e_k(x) = exp(2πi k·x)`,
//! `k ∈ {-K..K}^d`, of `L²(Ω)`. Flattened matrices are site-major,
//! lexicographic in `γ` (first coordinate slowest), then mode-major,
//! lexicographic in `k`.

mod block;
pub mod cache;
mod convergence;
mod gauge;
mod kernel;
mod matrix;
mod oracle;
mod peierls;
mod tensor;

pub use block::{assemble_block, Assembler, Block, NormKind};
pub use convergence::{epsilon_convergence_check, EpsilonReport};
pub use gauge::{apply_ub, apply_ub_inverse, SampledFunction};
pub use kernel::{kernel_k, xi_rule, KernelEvaluator};
pub use matrix::{
    assemble, band_profile, lipschitz_profile, unflatten, BandShell, Entry, GeneralizedMatrix,
};
pub use oracle::{quadratic_form_oracle, GaussianBump, OracleGrid};
pub use peierls::{peierls_matrix, peierls_phase};

use crate::error::{Error, Result};
use crate::symbols::{Symbol, XiClass};

/// Truncation and discretization knobs for one assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Sites `γ` with `|γ|_∞ <= lattice_radius`.
    pub lattice_radius: usize,
    /// Blocks are kept when `|γ - γ'|_∞ <= band_cut`.
    pub band_cut: usize,
    /// Fourier modes `k ∈ {-K..K}^d`.
    pub fourier_cutoff: usize,
    /// Regularization `e^{-ε⟨ξ⟩}`.
    pub epsilon: f64,
    /// Gauss–Legendre nodes per axis over the unit cell.
    pub space_quad: usize,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams {
            lattice_radius: 3,
            band_cut: 6,
            fourier_cutoff: 2,
            epsilon: 0.0,
            space_quad: 8,
        }
    }
}

impl TruncationParams {
    pub fn new(lattice_radius: usize, band_cut: usize, fourier_cutoff: usize, space_quad: usize) -> Self {
        TruncationParams {
            lattice_radius,
            band_cut,
            fourier_cutoff,
            epsilon: 0.0,
            space_quad,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Modes per axis, `2K + 1`.
    pub fn modes_per_axis(&self) -> usize {
        2 * self.fourier_cutoff + 1
    }

    pub fn modes(&self, dim: usize) -> usize {
        self.modes_per_axis().pow(dim as u32)
    }

    pub fn validate(&self, symbol: &Symbol) -> Result<()> {
        if self.band_cut > 2 * self.lattice_radius {
            return Err(Error::InvalidParameter(format!(
                "band cut {} exceeds twice the lattice radius {}",
                self.band_cut, self.lattice_radius
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.space_quad < 2 {
            return Err(Error::InvalidParameter(format!(
                "space quadrature order must be >= 2, got {}",
                self.space_quad
            )));
        }
        if self.epsilon == 0.0 && matches!(symbol.xi_class(), XiClass::General) {
            return Err(Error::UnsupportedSymbolClass {
                class: "general",
                reason: "epsilon = 0 requires a hopping or xi-integrable symbol",
            });
        }
        Ok(())
    }
}

/// The sites `|γ|_∞ <= R` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    radius: usize,
    sites: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn new(dim: usize, radius: usize) -> Self {
        let side = 2 * radius + 1;
        let count = side.pow(dim as u32);
        let sites = (0..count)
            .map(|flat| {
                crate::quadrature::unflatten_index(flat, side, dim)
                    .into_iter()
                    .map(|i| i as i64 - radius as i64)
                    .collect()
            })
            .collect();
        Lattice { dim, radius, sites }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> &[i64] {
        &self.sites[index]
    }

    /// Index of `gamma`, if it lies in the box.
    pub fn index_of(&self, gamma: &[i64]) -> Option<usize> {
        if gamma.len() != self.dim {
            return None;
        }
        let side = 2 * self.radius as i64 + 1;
        let mut flat = 0usize;
        for &g in gamma {
            let shifted = g + self.radius as i64;
            if shifted < 0 || shifted >= side {
                return None;
            }
            flat = flat * side as usize + shifted as usize;
        }
        Some(flat)
    }
}

/// Fourier modes `{-K..K}^d` in lexicographic order.
pub fn fourier_modes(dim: usize, cutoff: usize) -> Vec<Vec<i64>> {
    let side = 2 * cutoff + 1;
    (0..side.pow(dim as u32))
        .map(|flat| {
            crate::quadrature::unflatten_index(flat, side, dim)
                .into_iter()
                .map(|i| i as i64 - cutoff as i64)
                .collect()
        })
        .collect()
}

pub(crate) fn inf_distance(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
}

pub(crate) fn euclid_distance(a: &[i64], b: &[i64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| ((x - y) * (x - y)) as f64)
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn to_f64(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&a| a as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{gaussian_xi, harper};

    #[test]
    fn lattice_ordering_and_lookup() {
        let l = Lattice::new(2, 1);
        assert_eq!(l.len(), 9);
        assert_eq!(l.site(0), &[-1, -1]);
        assert_eq!(l.site(1), &[-1, 0]);
        assert_eq!(l.site(8), &[1, 1]);
        for (i, s) in l.sites().iter().enumerate() {
            assert_eq!(l.index_of(s), Some(i));
        }
        assert_eq!(l.index_of(&[2, 0]), None);
    }

    #[test]
    fn modes_are_lexicographic() {
        let m = fourier_modes(2, 1);
        assert_eq!(m.len(), 9);
        assert_eq!(m[0], vec![-1, -1]);
        assert_eq!(m[4], vec![0, 0]);
    }

    #[test]
    fn params_validation() {
        let g = gaussian_xi(2, 1.0).unwrap();
        assert!(TruncationParams::new(1, 3, 0, 4).validate(&g).is_err());
        assert!(TruncationParams::new(1, 2, 0, 4).validate(&g).is_ok());
        assert!(TruncationParams::new(1, 2, 0, 1).validate(&g).is_err());
        assert!(TruncationParams::new(1, 2, 0, 4)
            .with_epsilon(-1.0)
            .validate(&harper(2).unwrap())
            .is_err());
    }
}
