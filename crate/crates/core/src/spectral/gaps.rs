//! Spectral gaps, bulk filtering of finite-volume spectra, and b-sweeps.

use crate::error::{Error, Result};

use super::eigen::{EigenDecomposition, SpectrumResult};

/// An eigenvalue-free open interval `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub left: f64,
    pub right: f64,
    pub width: f64,
}

impl Gap {
    fn overlap(&self, other: &Gap) -> f64 {
        (self.right.min(other.right) - self.left.max(other.left)).max(0.0)
    }
}

/// Gaps of one spectrum, ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapList {
    pub gaps: Vec<Gap>,
}

/// All maximal gaps of width `>= min_width` between consecutive eigenvalues.
pub fn find_gaps(spec: &SpectrumResult, min_width: f64) -> Result<GapList> {
    if !(min_width > 0.0) {
        return Err(Error::InvalidParameter(format!("min_width must be positive, got {min_width}")));
    }
    let gaps = spec
        .eigenvalues
        .windows(2)
        .filter(|w| w[1] - w[0] >= min_width)
        .map(|w| Gap {
            left: w[0],
            right: w[1],
            width: w[1] - w[0],
        })
        .collect();
    Ok(GapList { gaps })
}

/// Keeps the eigenvalues of a lattice-indexed matrix whose eigenvectors put
/// at least `factor × (inner sites / all sites)` of their weight on the inner
/// box `|γ|_∞ <= inner_radius`. States localized on the open boundary of a
/// truncated lattice fail this test and are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkFilter {
    pub inner_radius: usize,
    pub factor: f64,
}

impl BulkFilter {
    /// Inner box of half the lattice radius, factor 1/2.
    pub fn for_radius(radius: usize) -> Self {
        BulkFilter {
            inner_radius: radius / 2,
            factor: 0.5,
        }
    }

    /// `sites` lists the lattice points in matrix order; each owns
    /// `block_size` consecutive rows.
    pub fn apply(&self, eig: &EigenDecomposition, sites: &[Vec<i64>], block_size: usize) -> Result<SpectrumResult> {
        let n = eig.values.len();
        if sites.len() * block_size != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sites.len() * block_size,
            });
        }
        let inner_rows: Vec<usize> = sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().all(|c| c.unsigned_abs() as usize <= self.inner_radius))
            .flat_map(|(i, _)| (i * block_size)..((i + 1) * block_size))
            .collect();
        let fraction = inner_rows.len() as f64 / n as f64;
        let kept = (0..n)
            .filter(|&c| {
                let w: f64 = inner_rows.iter().map(|&r| eig.vectors[(r, c)].norm_sqr()).sum();
                w >= self.factor * fraction
            })
            .map(|c| eig.values[c])
            .collect();
        let mut out = SpectrumResult::from_values(kept);
        out.residual_bound = eig.residual_bound;
        Ok(out)
    }
}

/// One spectrum per field strength, on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub b_grid: Vec<f64>,
    pub spectra: Vec<SpectrumResult>,
}

impl SweepResult {
    pub fn new(b_grid: Vec<f64>, spectra: Vec<SpectrumResult>) -> Result<Self> {
        if b_grid.len() != spectra.len() {
            return Err(Error::DimensionMismatch {
                expected: b_grid.len(),
                found: spectra.len(),
            });
        }
        if b_grid.is_empty() {
            return Err(Error::EmptySet);
        }
        if b_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("b grid must be strictly increasing".into()));
        }
        if spectra.iter().any(|s| s.eigenvalues.is_empty()) {
            return Err(Error::EmptySet);
        }
        Ok(SweepResult { b_grid, spectra })
    }

    pub fn e_min(&self) -> Vec<f64> {
        self.spectra.iter().map(|s| s.min()).collect()
    }

    pub fn e_max(&self) -> Vec<f64> {
        self.spectra.iter().map(|s| s.max()).collect()
    }
}

/// Which edge of the tracked gap to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSide {
    Lower,
    Upper,
}

/// A gap edge followed across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTrack {
    /// Edge per grid point; `None` from the closure point on.
    pub edges: Vec<Option<f64>>,
    /// `|e_{i+1} - e_i| / (b_{i+1} - b_i)` while both edges exist.
    pub quotients: Vec<f64>,
    /// First grid index at which no overlapping gap was found.
    pub closed_at: Option<usize>,
}

impl EdgeTrack {
    pub fn max_quotient(&self) -> f64 {
        self.quotients.iter().copied().fold(0.0, f64::max)
    }
}

/// Follows the gap that best overlaps `window` at the first grid point, then
/// at each later point the gap with maximal overlap with the previous one.
pub fn track_gap_edge(sweep: &SweepResult, window: (f64, f64), side: EdgeSide, min_width: f64) -> Result<EdgeTrack> {
    let n = sweep.b_grid.len();
    let mut edges = vec![None; n];
    let mut quotients = Vec::new();
    let mut closed_at = None;
    let start = Gap {
        left: window.0,
        right: window.1,
        width: window.1 - window.0,
    };
    let mut prev: Option<Gap> = None;
    for i in 0..n {
        let reference = prev.unwrap_or(start);
        let gaps = find_gaps(&sweep.spectra[i], min_width)?;
        let best = gaps
            .gaps
            .iter()
            .map(|g| (g.overlap(&reference), *g))
            .filter(|(o, _)| *o > 0.0)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, g)| g);
        let Some(g) = best else {
            closed_at = Some(i);
            break;
        };
        let e = match side {
            EdgeSide::Lower => g.left,
            EdgeSide::Upper => g.right,
        };
        edges[i] = Some(e);
        if i > 0 {
            if let Some(p) = edges[i - 1] {
                quotients.push((e - p).abs() / (sweep.b_grid[i] - sweep.b_grid[i - 1]));
            }
        }
        prev = Some(g);
    }
    Ok(EdgeTrack {
        edges,
        quotients,
        closed_at,
    })
}

/// Difference quotients `|v_{i+1} - v_i| / (b_{i+1} - b_i)` of any per-b column.
pub fn difference_quotients(b_grid: &[f64], values: &[f64]) -> Vec<f64> {
    b_grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(b, v)| (v[1] - v[0]).abs() / (b[1] - b[0]))
        .collect()
}
