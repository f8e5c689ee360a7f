//! Axis-by-axis contraction of tensor-product data.

use num_complex::Complex64;

/// A dense `rows × cols` matrix applied along one tensor axis.
#[derive(Debug, Clone)]
pub(crate) struct AxisMap {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl AxisMap {
    pub fn new(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        AxisMap { rows, cols, data }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }
}

/// Applies `map` along every axis of a `dim`-axis tensor whose axes all have
/// length `map.cols`; the result has all axes of length `map.rows`.
/// Both layouts are lexicographic with the last axis fastest.
pub(crate) fn transform_all_axes(input: &[Complex64], dim: usize, map: &AxisMap) -> Vec<Complex64> {
    let maps: Vec<&AxisMap> = vec![map; dim];
    transform_axes(input, &maps)
}

/// Applies `maps[a]` along axis `a`.
pub(crate) fn transform_axes(input: &[Complex64], maps: &[&AxisMap]) -> Vec<Complex64> {
    let mut shape: Vec<usize> = maps.iter().map(|m| m.cols).collect();
    let mut data = input.to_vec();
    for (axis, map) in maps.iter().enumerate() {
        data = transform_axis(&data, &shape, axis, map);
        shape[axis] = map.rows;
    }
    data
}

fn transform_axis(input: &[Complex64], shape: &[usize], axis: usize, map: &AxisMap) -> Vec<Complex64> {
    debug_assert_eq!(shape[axis], map.cols);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let n_in = map.cols;
    let n_out = map.rows;
    let mut out = vec![Complex64::new(0.0, 0.0); outer * n_out * inner];
    for o in 0..outer {
        let src = &input[o * n_in * inner..(o + 1) * n_in * inner];
        let dst = &mut out[o * n_out * inner..(o + 1) * n_out * inner];
        for r in 0..n_out {
            let row = &mut dst[r * inner..(r + 1) * inner];
            for c in 0..n_in {
                let m = map.at(r, c);
                let col = &src[c * inner..(c + 1) * inner];
                for (acc, v) in row.iter_mut().zip(col) {
                    *acc += m * v;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_kronecker_product() {
        let map = AxisMap::new(2, 3, |r, c| Complex64::new((r + 1) as f64, c as f64 - 1.0));
        let input: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, -(i as f64) / 2.0)).collect();
        let out = transform_all_axes(&input, 2, &map);
        for r0 in 0..2 {
            for r1 in 0..2 {
                let mut want = Complex64::new(0.0, 0.0);
                for c0 in 0..3 {
                    for c1 in 0..3 {
                        want += map.at(r0, c0) * map.at(r1, c1) * input[c0 * 3 + c1];
                    }
                }
                assert!((out[r0 * 2 + r1] - want).norm() < 1e-12);
            }
        }
    }
}
