//! Behaviour of the regularized assembly as `ε → 0`.

use super::block::matrix_norm;
use super::{assemble, TruncationParams};
use crate::error::{Error, Result};
use crate::geometry::FluxGeometry;
use crate::symbols::{Symbol, XiClass};

/// Differences between flattened matrices along a decreasing ε sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport {
    pub epsilons: Vec<f64>,
    /// `‖H_{ε_i} - H_0‖` for XiIntegrable symbols; `‖H_{ε_i} - H_{ε_{i-1}}‖`
    /// (first entry NaN) for General symbols; zeros for Hopping symbols.
    pub differences: Vec<f64>,
    /// Whether the differences are measured against the `ε = 0` assembly.
    pub against_limit: bool,
    /// Hopping blocks never see `e^{-ε⟨ξ⟩}`.
    pub epsilon_ignored: bool,
    /// Strict decrease of the comparable differences (true with fewer than two).
    pub decreasing: bool,
}

/// Assembles at every ε in `epsilons` (positive, strictly decreasing) and
/// reports how the flattened matrices settle.
pub fn epsilon_convergence_check(
    symbol: &Symbol,
    geom: &FluxGeometry,
    b: f64,
    params: &TruncationParams,
    epsilons: &[f64],
) -> Result<EpsilonReport> {
    if epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "epsilon list must be positive and strictly decreasing".into(),
        ));
    }
    let at = |eps: f64| -> Result<nalgebra::DMatrix<num_complex::Complex64>> {
        Ok(assemble(symbol, geom, b, &params.with_epsilon(eps))?.flatten())
    };
    let (differences, against_limit, ignored) = match symbol.xi_class() {
        XiClass::Hopping(_) => (vec![0.0; epsilons.len()], false, true),
        XiClass::XiIntegrable { .. } => {
            let limit = at(0.0)?;
            let diffs = epsilons
                .iter()
                .map(|&e| Ok(matrix_norm(&(at(e)? - &limit))))
                .collect::<Result<Vec<f64>>>()?;
            (diffs, true, false)
        }
        XiClass::General => {
            let mut diffs = Vec::with_capacity(epsilons.len());
            let mut prev = None;
            for &e in epsilons {
                let cur = at(e)?;
                diffs.push(match &prev {
                    Some(p) => matrix_norm(&(&cur - p)),
                    None => f64::NAN,
                });
                prev = Some(cur);
            }
            (diffs, false, false)
        }
    };
    let comparable: Vec<f64> = differences.iter().copied().filter(|v| !v.is_nan()).collect();
    let decreasing = ignored || comparable.windows(2).all(|w| w[1] < w[0]);
    Ok(EpsilonReport {
        epsilons: epsilons.to_vec(),
        differences,
        against_limit,
        epsilon_ignored: ignored,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MagneticField;
    use crate::symbols::{gaussian_xi, harper};

    fn geom() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn gaussian_differences_shrink() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let p = TruncationParams::new(1, 1, 1, 4);
        let rep = epsilon_convergence_check(&g, &geom(), 0.4, &p, &[0.2, 0.1, 0.05]).unwrap();
        assert!(rep.against_limit && rep.decreasing, "{:?}", rep.differences);
    }

    #[test]
    fn single_epsilon_and_hopping_cases() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let p = TruncationParams::new(0, 0, 0, 3);
        let rep = epsilon_convergence_check(&g, &geom(), 0.0, &p, &[0.3]).unwrap();
        assert_eq!(rep.differences.len(), 1);
        assert!(rep.decreasing);
        let h = harper(2).unwrap();
        let rep = epsilon_convergence_check(&h, &geom(), 0.5, &TruncationParams::new(1, 1, 0, 3), &[0.2, 0.1]).unwrap();
        assert!(rep.epsilon_ignored);
        assert!(epsilon_convergence_check(&g, &geom(), 0.0, &p, &[0.1, 0.2]).is_err());
    }
}
