//! Power-law fits of spectral distances against field increments.

use crate::error::{Error, Result};

/// `d ≈ C |δb|^α` by least squares in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// `C* = max d / √|δb|`.
    pub c_star: f64,
    /// `max / min` of `d / √|δb|` over the data.
    pub c_star_spread: f64,
}

/// Fits `(|δb|, d_H)` pairs; needs at least three, all positive.
pub fn holder_fit(pairs: &[(f64, f64)]) -> Result<HolderFit> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            found: pairs.len(),
        });
    }
    for &(x, y) in pairs {
        for v in [x, y] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveData(v));
            }
        }
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all increments are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let ratios: Vec<f64> = pairs.iter().map(|&(x, y)| y / x.sqrt()).collect();
    let c_star = ratios.iter().copied().fold(0.0, f64::max);
    let c_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(HolderFit {
        exponent,
        constant: intercept.exp(),
        residual,
        c_star,
        c_star_spread: c_star / c_min,
    })
}

/// `max / min` of positive values; values below `floor` count as `floor`.
pub fn spread(values: &[f64], floor: f64) -> f64 {
    let clamped: Vec<f64> = values.iter().map(|v| v.max(floor)).collect();
    let hi = clamped.iter().copied().fold(0.0, f64::max);
    let lo = clamped.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_root_law() {
        let pairs: Vec<(f64, f64)> = [0.2f64, 0.1, 0.05, 0.025].iter().map(|&d| (d, 3.0 * d.sqrt())).collect();
        let f = holder_fit(&pairs).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-10);
        assert!((f.constant - 3.0).abs() < 1e-10);
        assert!((f.c_star - 3.0).abs() < 1e-12);
        assert!((f.c_star_spread - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_law() {
        let pairs: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&d| (d, 2.0 * d)).collect();
        assert!((holder_fit(&pairs).unwrap().exponent - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(holder_fit(&[(0.1, 1.0), (0.2, 1.0)]), Err(Error::InsufficientData { .. })));
        assert!(matches!(
            holder_fit(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]),
            Err(Error::NonPositiveData(_))
        ));
    }

    #[test]
    fn spread_with_floor() {
        assert_eq!(spread(&[1.0, 2.0], 0.0), 2.0);
        assert_eq!(spread(&[0.0, 0.0], 1e-12), 1.0);
    }
}
