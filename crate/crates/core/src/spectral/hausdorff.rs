//! Hausdorff distance between finite subsets of the real line.

use crate::error::{Error, Result};

/// `max{sup_x dist(x, Y), sup_y dist(y, X)}` for sorted, nonempty `X`, `Y`,
/// by a merged scan in `O(|X| + |Y|)`.
pub fn hausdorff(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    for s in [x, y] {
        if s.iter().any(|v| v.is_nan()) || s.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("sets must be sorted and NaN-free".into()));
        }
    }
    Ok(directed(x, y).max(directed(y, x)))
}

/// `sup_{a ∈ from} dist(a, to)`.
fn directed(from: &[f64], to: &[f64]) -> f64 {
    let mut j = 0;
    let mut worst = 0.0f64;
    for &a in from {
        while j + 1 < to.len() && to[j + 1] <= a {
            j += 1;
        }
        let mut d = (a - to[j]).abs();
        if j + 1 < to.len() {
            d = d.min((to[j + 1] - a).abs());
        }
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(hausdorff(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(hausdorff(&[0.0, 2.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(hausdorff(&[0.0], &[5.0, 6.0]).unwrap(), 6.0);
        assert!(hausdorff(&[], &[1.0]).is_err());
        assert!(hausdorff(&[2.0, 1.0], &[1.0]).is_err());
    }
}
