//! The banded generalized matrix and its structural operations.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::block::{matrix_norm, Assembler, Block, NormKind};
use super::{euclid_distance, inf_distance, to_f64, Lattice, TruncationParams};
use crate::error::{Error, Result};
use crate::geometry::FluxGeometry;
use crate::symbols::{Symbol, XiClass};

/// One stored block with its lattice phase `e^{ibφ(γ,γ')}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// `φ(γ, γ')`.
    pub flux: f64,
    pub phase: Complex64,
    pub block: Block,
}

impl Entry {
    /// `phase · block`, the contribution to the flattened matrix.
    pub fn phased(&self) -> DMatrix<Complex64> {
        self.block.matrix.map(|z| self.phase * z)
    }
}

/// Banded truncation of `{e^{ibφ(γ,γ')} A_{γγ',b}}` over `|γ|_∞ <= R`.
///
/// Entries are keyed by lattice indices `(row site, column site)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMatrix {
    pub(crate) b: f64,
    pub(crate) phase_shift: f64,
    pub(crate) band_t: f64,
    pub(crate) params: TruncationParams,
    pub(crate) lattice: Lattice,
    pub(crate) block_size: usize,
    pub(crate) hermitian: bool,
    pub(crate) symbol_id: String,
    pub(crate) field_id: String,
    pub(crate) entries: BTreeMap<(usize, usize), Entry>,
}

impl GeneralizedMatrix {
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Accumulated `s` from [`GeneralizedMatrix::rephase`].
    pub fn phase_shift(&self) -> f64 {
        self.phase_shift
    }

    /// Last `t` passed to [`GeneralizedMatrix::truncate_band`] (0 if never).
    pub fn band_t(&self) -> f64 {
        self.band_t
    }

    pub fn params(&self) -> &TruncationParams {
        &self.params
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn is_hermitian_symbol(&self) -> bool {
        self.hermitian
    }

    pub fn symbol_id(&self) -> &str {
        &self.symbol_id
    }

    pub fn field_id(&self) -> &str {
        &self.field_id
    }

    /// Side length of the flattened matrix, `(2R+1)^d (2K+1)^d`.
    pub fn dimension(&self) -> usize {
        self.lattice.len() * self.block_size
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Entry> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, gamma: &[i64], gamma0: &[i64]) -> Option<&Entry> {
        let i = self.lattice.index_of(gamma)?;
        let j = self.lattice.index_of(gamma0)?;
        self.entries.get(&(i, j))
    }

    /// Dense matrix, site-major then mode-major.
    pub fn flatten(&self) -> DMatrix<Complex64> {
        let m = self.block_size;
        let n = self.dimension();
        let mut out = DMatrix::zeros(n, n);
        for (&(i, j), e) in &self.entries {
            for c in 0..m {
                for r in 0..m {
                    out[(i * m + r, j * m + c)] = e.phase * e.block.matrix[(r, c)];
                }
            }
        }
        out
    }

    /// Drops blocks with `|γ - γ'| >= |t|^{-1/2}` (Euclidean); `t = 0` keeps all.
    pub fn truncate_band(&self, t: f64) -> GeneralizedMatrix {
        let mut out = self.clone();
        out.band_t = t;
        if t == 0.0 {
            return out;
        }
        let cut = t.abs().powf(-0.5);
        out.entries.retain(|&(i, j), _| {
            euclid_distance(self.lattice.site(i), self.lattice.site(j)) < cut
        });
        out
    }

    /// Multiplies every phase by `e^{isφ(γ,γ')}`; blocks are untouched.
    pub fn rephase(&self, s: f64) -> GeneralizedMatrix {
        let mut out = self.clone();
        out.phase_shift += s;
        for e in out.entries.values_mut() {
            e.phase *= Complex64::from_polar(1.0, s * e.flux);
        }
        out
    }

    /// `max |M - M^*|` over the flattened matrix, relative to `max |M|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let flat = self.flatten();
        let scale = flat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for r in 0..flat.nrows() {
            for c in r..flat.ncols() {
                worst = worst.max((flat[(r, c)] - flat[(c, r)].conj()).norm());
            }
        }
        worst / scale
    }

    /// `max ||phase| - 1|` and `max |phase(γ,γ')·phase(γ',γ) - 1|`.
    pub fn phase_defects(&self) -> (f64, f64) {
        let mut modulus = 0.0f64;
        let mut antisym = 0.0f64;
        for (&(i, j), e) in &self.entries {
            modulus = modulus.max((e.phase.norm() - 1.0).abs());
            if let Some(t) = self.entries.get(&(j, i)) {
                antisym = antisym.max((e.phase * t.phase - 1.0).norm());
            }
        }
        (modulus, antisym)
    }
}

/// Assembles every banded block at field strength `b`.
///
/// For Hermitian symbols only `i <= j` is computed; the lower half is the
/// conjugate transpose with inverted phase and diagonal blocks are
/// symmetrized. Hopping symbols store only the hop pairs. Jobs run on the
/// current rayon pool; the result does not depend on the worker count.
pub fn assemble(symbol: &Symbol, geom: &FluxGeometry, b: f64, params: &TruncationParams) -> Result<GeneralizedMatrix> {
    if !b.is_finite() {
        return Err(Error::InvalidParameter(format!("field strength must be finite, got {b}")));
    }
    let asm = Assembler::new(symbol, geom, *params)?;
    let d = symbol.dim();
    let lattice = Lattice::new(d, params.lattice_radius);
    let hermitian = symbol.is_hermitian();
    let band = params.band_cut as i64;

    let mut groups: BTreeMap<Vec<i64>, Vec<(usize, usize)>> = BTreeMap::new();
    match symbol.xi_class() {
        XiClass::Hopping(hops) => {
            for (i, g) in lattice.sites().iter().enumerate() {
                for h in hops {
                    let target: Vec<i64> = g.iter().zip(&h.shift).map(|(a, s)| a + s).collect();
                    let Some(j) = lattice.index_of(&target) else { continue };
                    if (hermitian && j < i) || inf_distance(g, &target) > band {
                        continue;
                    }
                    let delta: Vec<i64> = g.iter().zip(&target).map(|(a, c)| a - c).collect();
                    groups.entry(delta).or_default().push((i, j));
                }
            }
        }
        _ => {
            for i in 0..lattice.len() {
                let start = if hermitian { i } else { 0 };
                for j in start..lattice.len() {
                    let (g, g0) = (lattice.site(i), lattice.site(j));
                    if inf_distance(g, g0) <= band {
                        let delta: Vec<i64> = g.iter().zip(g0).map(|(a, c)| a - c).collect();
                        groups.entry(delta).or_default().push((i, j));
                    }
                }
            }
        }
    }

    let jobs: Vec<(&Vec<i64>, &Vec<(usize, usize)>)> = groups.iter().collect();
    let computed: Vec<Result<Vec<((usize, usize), Block)>>> = jobs
        .par_iter()
        .map(|(delta, pairs)| {
            let table = if asm.uses_offset_tables() {
                Some(asm.offset_table(delta)?)
            } else {
                None
            };
            pairs
                .iter()
                .map(|&(i, j)| {
                    let (g, g0) = (lattice.site(i), lattice.site(j));
                    let blk = match &table {
                        Some(t) => asm.factored_block(b, g, g0, t),
                        None => asm.block(b, g, g0)?,
                    };
                    Ok(((i, j), blk))
                })
                .collect()
        })
        .collect();

    let mut entries = BTreeMap::new();
    for group in computed {
        for ((i, j), blk) in group? {
            let flux = geom.phi_unchecked(&to_f64(lattice.site(i)), &to_f64(lattice.site(j)));
            let phase = Complex64::from_polar(1.0, b * flux);
            if hermitian && i == j {
                let sym = (&blk.matrix + blk.matrix.adjoint()).map(|z| z * 0.5);
                entries.insert((i, i), Entry { flux, phase, block: Block { matrix: sym } });
            } else if hermitian {
                let mirrored = Entry {
                    flux: -flux,
                    phase: phase.conj(),
                    block: blk.adjoint(),
                };
                entries.insert((j, i), mirrored);
                entries.insert((i, j), Entry { flux, phase, block: blk });
            } else {
                entries.insert((i, j), Entry { flux, phase, block: blk });
            }
        }
    }

    Ok(GeneralizedMatrix {
        b,
        phase_shift: 0.0,
        band_t: 0.0,
        params: *params,
        lattice,
        block_size: asm.block_size(),
        hermitian,
        symbol_id: symbol.name().to_string(),
        field_id: geom.field().id(),
        entries,
    })
}

/// Reads back `phase · Block` for every stored pair of `like` from a flattened matrix.
pub fn unflatten(
    flat: &DMatrix<Complex64>,
    like: &GeneralizedMatrix,
) -> Result<BTreeMap<(usize, usize), DMatrix<Complex64>>> {
    let n = like.dimension();
    if flat.nrows() != n || flat.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: flat.nrows(),
        });
    }
    let m = like.block_size;
    Ok(like
        .entries
        .keys()
        .map(|&(i, j)| ((i, j), flat.view((i * m, j * m), (m, m)).into_owned()))
        .collect())
}

/// Maximum block norm on one Euclidean shell `|γ - γ'| = distance`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandShell {
    pub distance: f64,
    pub max_norm: f64,
    pub pairs: usize,
    pub norm_kind: NormKind,
}

impl BandShell {
    /// `⟨γ - γ'⟩ = (1 + |γ - γ'|²)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.distance * self.distance).sqrt()
    }

    /// `max_norm · ⟨γ - γ'⟩^N`.
    pub fn weighted(&self, power: f64) -> f64 {
        self.max_norm * self.bracket().powf(power)
    }
}

/// Max block norm per Euclidean distance shell, sorted by distance.
pub fn band_profile(h: &GeneralizedMatrix) -> Vec<BandShell> {
    let norms: Vec<((usize, usize), f64)> = h
        .entries
        .par_iter()
        .map(|(&k, e)| (k, e.block.norm()))
        .collect();
    shells(h, norms)
}

/// Max `‖Block_a - Block_b‖` per Euclidean shell over the pairs stored in both.
pub fn lipschitz_profile(a: &GeneralizedMatrix, b: &GeneralizedMatrix) -> Result<Vec<BandShell>> {
    if a.lattice != b.lattice || a.block_size != b.block_size {
        return Err(Error::InvalidParameter("matrices have different layouts".into()));
    }
    let norms: Vec<((usize, usize), f64)> = a
        .entries
        .par_iter()
        .filter_map(|(k, e)| {
            b.entries
                .get(k)
                .map(|f| (*k, matrix_norm(&(&e.block.matrix - &f.block.matrix))))
        })
        .collect();
    Ok(shells(a, norms))
}

fn shells(h: &GeneralizedMatrix, norms: Vec<((usize, usize), f64)>) -> Vec<BandShell> {
    let kind = Block::zeros(h.block_size).norm_kind();
    // Squared integer distances index the shells exactly.
    let mut by_shell: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for ((i, j), norm) in norms {
        let (g, g0) = (h.lattice.site(i), h.lattice.site(j));
        let sq: i64 = g.iter().zip(g0).map(|(a, c)| (a - c) * (a - c)).sum();
        let slot = by_shell.entry(sq).or_insert((0.0, 0));
        slot.0 = slot.0.max(norm);
        slot.1 += 1;
    }
    by_shell
        .into_iter()
        .map(|(sq, (max_norm, pairs))| BandShell {
            distance: (sq as f64).sqrt(),
            max_norm,
            pairs,
            norm_kind: kind,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MagneticField;
    use crate::symbols::{gaussian_xi, harper};

    fn planar() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn free_harper_is_grid_adjacency() {
        let h = assemble(&harper(2).unwrap(), &planar(), 0.0, &TruncationParams::new(1, 1, 0, 4)).unwrap();
        let flat = h.flatten();
        assert_eq!(flat.nrows(), 9);
        let lat = h.lattice();
        for i in 0..9 {
            for j in 0..9 {
                let d: i64 = lat.site(i).iter().zip(lat.site(j)).map(|(a, c)| (a - c).abs()).sum();
                let want = if d == 1 { 1.0 } else { 0.0 };
                assert!((flat[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_site_flatten_is_the_diagonal_block() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let h = assemble(&g, &planar(), 0.3, &TruncationParams::new(0, 0, 1, 4)).unwrap();
        let e = h.entry(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(h.flatten(), e.phased());
    }

    #[test]
    fn flatten_is_exactly_hermitian_and_round_trips() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let h = assemble(&g, &planar(), 0.7, &TruncationParams::new(1, 2, 1, 4)).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        let back = unflatten(&h.flatten(), &h).unwrap();
        for (k, e) in h.entries() {
            assert_eq!(back[k], e.phased());
        }
        let (modulus, antisym) = h.phase_defects();
        assert!(modulus < 1e-15 && antisym < 1e-15);
    }

    #[test]
    fn rephase_round_trip_and_zero_shift() {
        let h = assemble(&harper(2).unwrap(), &planar(), 0.5, &TruncationParams::new(2, 1, 1, 4)).unwrap();
        assert_eq!(h.rephase(0.0).flatten(), h.flatten());
        let back = h.rephase(0.3).rephase(-0.3);
        for (k, e) in h.entries() {
            assert!((back.entries()[k].phase - e.phase).norm() <= 1e-15);
        }
        assert_eq!(h.rephase(0.4).hermiticity_defect(), 0.0);
    }

    #[test]
    fn truncation_keeps_inside_the_euclidean_radius() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let h = assemble(&g, &planar(), 0.2, &TruncationParams::new(1, 2, 0, 4)).unwrap();
        assert_eq!(h.truncate_band(0.0).entries(), h.entries());
        let diag = h.truncate_band(1.0);
        assert!(diag.entries().keys().all(|(i, j)| i == j));
        assert_eq!(diag.len(), 9);
        // cut 2: keeps distances 0, 1, √2
        let mid = h.truncate_band(0.25);
        assert!(mid
            .entries()
            .keys()
            .all(|&(i, j)| euclid_distance(h.lattice().site(i), h.lattice().site(j)) < 2.0));
        assert!(mid.len() < h.len());
    }

    #[test]
    fn mirrored_blocks_match_direct_assembly() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = planar();
        let p = TruncationParams::new(1, 2, 1, 4);
        let h = assemble(&g, &geom, 0.8, &p).unwrap();
        let asm = Assembler::new(&g, &geom, p).unwrap();
        let direct = asm.block(0.8, &[1, -1], &[0, 1]).unwrap();
        let stored = h.entry(&[1, -1], &[0, 1]).unwrap();
        assert!((direct.matrix - &stored.block.matrix).norm() < 1e-13);
    }
}
