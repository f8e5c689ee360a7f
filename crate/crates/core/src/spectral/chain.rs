//! Spectral distances along the four-step chain
//! `H_{b0+δb} → H^{δb}_{b0} → H^{δb}_{δb,b0} → H_{δb,b0} → H_{b0}`.

use crate::assembly::{assemble, GeneralizedMatrix, TruncationParams};
use crate::error::Result;
use crate::geometry::FluxGeometry;
use crate::symbols::Symbol;

use super::eigen::{eigen_hermitian, eigenvalues_hermitian, DEFAULT_RESIDUAL_TOL};
use super::gaps::BulkFilter;
use super::hausdorff::hausdorff;

/// Power of `δb` each step's distance is divided by.
pub const STEP_EXPONENTS: [f64; 4] = [1.0, 1.0, 0.5, 1.0];

/// Distances of one chain evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStep {
    pub delta_b: f64,
    /// `d_H(σ(H_{b0+δb}), σ(H^{δb}))`, `d_H(σ(H^{δb}), σ(H^{δb}_{δb}))`,
    /// `d_H(σ(H^{δb}_{δb}), σ(H_{δb}))`, `d_H(σ(H_{δb}), σ(H_{b0}))`.
    pub distances: [f64; 4],
    /// `distances[s] / δb^{STEP_EXPONENTS[s]}` (0 at `δb = 0`).
    pub quotients: [f64; 4],
}

fn spectrum(h: &GeneralizedMatrix, filter: Option<&BulkFilter>) -> Result<Vec<f64>> {
    let flat = h.flatten();
    match filter {
        None => Ok(eigenvalues_hermitian(&flat, DEFAULT_RESIDUAL_TOL)?.eigenvalues),
        Some(f) => {
            let eig = eigen_hermitian(&flat, DEFAULT_RESIDUAL_TOL)?;
            Ok(f.apply(&eig, h.lattice().sites(), h.block_size())?.eigenvalues)
        }
    }
}

/// Evaluates the chain at `b0` for every `δb` in `deltas`, sharing `H_{b0}`.
pub fn four_step_chain(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b0: f64,
    deltas: &[f64],
    params: &TruncationParams,
) -> Result<Vec<ChainStep>> {
    four_step_chain_filtered(symbol, geom, b0, deltas, params, None)
}

/// [`four_step_chain`] on bulk-filtered spectra, which drops the states
/// bound to the open boundary of the truncated lattice.
pub fn four_step_chain_filtered(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b0: f64,
    deltas: &[f64],
    params: &TruncationParams,
    filter: Option<&BulkFilter>,
) -> Result<Vec<ChainStep>> {
    let spectrum = |h: &GeneralizedMatrix| spectrum(h, filter);
    let h0 = assemble(symbol, geom, b0, params)?;
    let s0 = spectrum(&h0)?;
    deltas
        .iter()
        .map(|&db| {
            let h1 = assemble(symbol, geom, b0 + db, params)?;
            let shifted = h0.rephase(db);
            let shifted_cut = shifted.truncate_band(db);
            let cut = h0.truncate_band(db);
            let spectra = [spectrum(&h1)?, spectrum(&shifted)?, spectrum(&shifted_cut)?, spectrum(&cut)?];
            let distances = [
                hausdorff(&spectra[0], &spectra[1])?,
                hausdorff(&spectra[1], &spectra[2])?,
                hausdorff(&spectra[2], &spectra[3])?,
                hausdorff(&spectra[3], &s0)?,
            ];
            Ok(ChainStep {
                delta_b: db,
                distances,
                quotients: quotients(&distances, db),
            })
        })
        .collect()
}

pub(crate) fn quotients(distances: &[f64; 4], db: f64) -> [f64; 4] {
    let mut q = [0.0; 4];
    for s in 0..4 {
        let scale = db.abs().powf(STEP_EXPONENTS[s]);
        q[s] = if scale > 0.0 { distances[s] / scale } else { 0.0 };
    }
    q
}

/// Per-step constants and the halving-stability verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    /// Fitted constant per step: the largest quotient over the sequence.
    pub constants: [f64; 4],
    /// Every quotient after the first is at most `factor · max(first, floor)`.
    pub stable: [bool; 4],
}

impl ChainReport {
    pub fn new(steps: Vec<ChainStep>, factor: f64, floor: f64) -> Self {
        let mut constants = [0.0; 4];
        let mut stable = [true; 4];
        for s in 0..4 {
            constants[s] = steps.iter().map(|c| c.quotients[s]).fold(0.0, f64::max);
            if let Some(first) = steps.first() {
                let bound = factor * first.quotients[s].max(floor);
                stable[s] = steps.iter().all(|c| c.quotients[s] <= bound);
            }
        }
        ChainReport { steps, constants, stable }
    }

    pub fn passed(&self) -> bool {
        self.stable.iter().all(|&s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MagneticField;
    use crate::symbols::harper;

    #[test]
    fn zero_increment_gives_zero_distances() {
        let geom = FluxGeometry::with_default_quadrature(MagneticField::unit_planar());
        let steps = four_step_chain(&harper(2).unwrap(), &geom, 1.0, &[0.0], &TruncationParams::new(2, 1, 0, 4)).unwrap();
        assert_eq!(steps[0].distances, [0.0; 4]);
        assert_eq!(steps[0].quotients, [0.0; 4]);
    }

    #[test]
    fn report_flags_growing_quotients() {
        let mk = |db: f64, q: f64| ChainStep {
            delta_b: db,
            distances: [q * db; 4],
            quotients: [q; 4],
        };
        let ok = ChainReport::new(vec![mk(0.1, 1.0), mk(0.05, 1.5), mk(0.025, 0.9)], 2.0, 1e-12);
        assert!(ok.passed());
        assert_eq!(ok.constants[0], 1.5);
        let bad = ChainReport::new(vec![mk(0.1, 1.0), mk(0.05, 2.5)], 2.0, 1e-12);
        assert!(!bad.passed());
    }
}
