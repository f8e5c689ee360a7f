//! Binary cache for assembled matrices.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    8 bytes  "HOFMATGM"
//! version  u32      1
//! d, R, N_band, K, Q          u32 each
//! epsilon, b, phase shift, t  f64 each
//! hermitian                   u8
//! key                         u64   (see `cache_key`)
//! symbol id, field id         u32 length + UTF-8 bytes each
//! n_entries                   u64
//! entries: γ (d × i32), γ' (d × i32), flux f64, phase (re, im) f64,
//!          block m² × (re, im) f64, column index fastest
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::block::Block;
use super::matrix::{Entry, GeneralizedMatrix};
use super::{Lattice, TruncationParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HOFMATGM";
const VERSION: u32 = 1;

/// FNV-1a hash of the quantities that determine an assembly.
pub fn cache_key(symbol_id: &str, field_id: &str, b: f64, params: &TruncationParams) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &byte in bytes {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(symbol_id.as_bytes());
    feed(&[0]);
    feed(field_id.as_bytes());
    feed(&[0]);
    feed(&b.to_le_bytes());
    for v in [params.lattice_radius, params.band_cut, params.fourier_cutoff, params.space_quad] {
        feed(&(v as u64).to_le_bytes());
    }
    feed(&params.epsilon.to_le_bytes());
    h
}

impl GeneralizedMatrix {
    pub fn cache_key(&self) -> u64 {
        cache_key(&self.symbol_id, &self.field_id, self.b, &self.params)
    }
}

pub fn write(h: &GeneralizedMatrix, out: &mut impl Write) -> Result<()> {
    let p = &h.params;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    for v in [h.lattice.dim(), p.lattice_radius, p.band_cut, p.fourier_cutoff, p.space_quad] {
        out.write_all(&(v as u32).to_le_bytes())?;
    }
    for v in [p.epsilon, h.b, h.phase_shift, h.band_t] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&[h.hermitian as u8])?;
    out.write_all(&h.cache_key().to_le_bytes())?;
    for s in [&h.symbol_id, &h.field_id] {
        out.write_all(&(s.len() as u32).to_le_bytes())?;
        out.write_all(s.as_bytes())?;
    }
    out.write_all(&(h.entries.len() as u64).to_le_bytes())?;
    let m = h.block_size;
    for (&(i, j), e) in &h.entries {
        for site in [h.lattice.site(i), h.lattice.site(j)] {
            for &c in site {
                out.write_all(&(c as i32).to_le_bytes())?;
            }
        }
        for v in [e.flux, e.phase.re, e.phase.im] {
            out.write_all(&v.to_le_bytes())?;
        }
        for r in 0..m {
            for c in 0..m {
                let z = e.block.matrix[(r, c)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.0
            .read_exact(&mut buf)
            .map_err(|e| Error::Cache(format!("truncated cache file: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        if len > 1 << 20 {
            return Err(Error::Cache("implausible string length".into()));
        }
        let mut buf = vec![0u8; len];
        self.0
            .read_exact(&mut buf)
            .map_err(|e| Error::Cache(format!("truncated cache file: {e}")))?;
        String::from_utf8(buf).map_err(|_| Error::Cache("identifier is not UTF-8".into()))
    }
}

pub fn read(input: &mut impl Read) -> Result<GeneralizedMatrix> {
    let mut r = Reader(input);
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let d = r.u32()? as usize;
    let radius = r.u32()? as usize;
    let band_cut = r.u32()? as usize;
    let fourier_cutoff = r.u32()? as usize;
    let space_quad = r.u32()? as usize;
    let epsilon = r.f64()?;
    let b = r.f64()?;
    let phase_shift = r.f64()?;
    let band_t = r.f64()?;
    let hermitian = r.bytes::<1>()?[0] != 0;
    let key = r.u64()?;
    let symbol_id = r.string()?;
    let field_id = r.string()?;
    let params = TruncationParams {
        lattice_radius: radius,
        band_cut,
        fourier_cutoff,
        epsilon,
        space_quad,
    };
    if cache_key(&symbol_id, &field_id, b, &params) != key {
        return Err(Error::Cache("header key does not match its fields".into()));
    }
    if d == 0 || d > 8 || radius > 1 << 12 {
        return Err(Error::Cache("implausible dimensions".into()));
    }
    let lattice = Lattice::new(d, radius);
    let m = params.modes(d);
    let n_entries = r.u64()?;
    let mut entries = BTreeMap::new();
    for _ in 0..n_entries {
        let mut sites = [vec![0i64; d], vec![0i64; d]];
        for site in sites.iter_mut() {
            for c in site.iter_mut() {
                *c = r.i32()? as i64;
            }
        }
        let i = lattice
            .index_of(&sites[0])
            .ok_or_else(|| Error::Cache("site outside the lattice".into()))?;
        let j = lattice
            .index_of(&sites[1])
            .ok_or_else(|| Error::Cache("site outside the lattice".into()))?;
        let flux = r.f64()?;
        let phase = Complex64::new(r.f64()?, r.f64()?);
        let mut values = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            values.push(Complex64::new(r.f64()?, r.f64()?));
        }
        let matrix = DMatrix::from_row_slice(m, m, &values);
        entries.insert((i, j), Entry { flux, phase, block: Block { matrix } });
    }
    Ok(GeneralizedMatrix {
        b,
        phase_shift,
        band_t,
        params,
        lattice,
        block_size: m,
        hermitian,
        symbol_id,
        field_id,
        entries,
    })
}

pub fn save(h: &GeneralizedMatrix, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(h, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GeneralizedMatrix> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read(&mut f)
}

/// Loads `path` only if it was written for exactly this key.
pub fn load_matching(path: &Path, key: u64) -> Result<GeneralizedMatrix> {
    let h = load(path)?;
    if h.cache_key() != key {
        return Err(Error::Cache(format!(
            "cache key {:016x} does not match requested {:016x}",
            h.cache_key(),
            key
        )));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::geometry::{FluxGeometry, MagneticField};
    use crate::symbols::gaussian_xi;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = FluxGeometry::with_default_quadrature(MagneticField::unit_planar());
        let h = assemble(&g, &geom, 0.3, &TruncationParams::new(1, 2, 1, 4))
            .unwrap()
            .rephase(0.1)
            .truncate_band(0.3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        save(&h, &path).unwrap();
        let back = load_matching(&path, h.cache_key()).unwrap();
        assert_eq!(back, h);
        assert!(load_matching(&path, h.cache_key() ^ 1).is_err());
    }

    #[test]
    fn corrupted_headers_are_rejected() {
        let g = gaussian_xi(2, 1.0).unwrap();
        let geom = FluxGeometry::with_default_quadrature(MagneticField::unit_planar());
        let h = assemble(&g, &geom, 0.0, &TruncationParams::new(0, 0, 0, 3)).unwrap();
        let mut bytes = Vec::new();
        write(&h, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read(&mut bad.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[30] ^= 0xff; // inside the f64 fields covered by the key
        assert!(read(&mut bad.as_slice()).is_err());
        assert!(read(&mut &bytes[..bytes.len() - 1]).is_err());
    }
}
