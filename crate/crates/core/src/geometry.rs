//! Magnetic fields, the transverse-gauge vector potential, the flux function
//! `φ(x, x')` and triangle fluxes.
//!
//! For a constant antisymmetric field `B` every quantity has a closed form:
//! `A_j(x, x') = -½ Σ_k (x_k - x'_k) B_jk` and `φ(x, x') = ½ xᵀ B x'`.
//! Smooth fields are integrated numerically: the vector potential with a
//! Gauss–Legendre line rule on `[0, 1]`, the flux with a collapsed tensor
//! rule over the triangle `(0, x, x')`.
//!
//! Sign convention: the surface integral is oriented so that a smooth field
//! with constant components reproduces `½ xᵀ B x'`. With the vector potential
//! as written above this gives `∂_{x_j} φ(x, x') = A_j(x, x') - A_j(x, 0)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, simplex_rule, Rule};

/// Evaluates the full antisymmetric matrix `B(x)` into a row-major buffer.
pub type FieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum MagneticField {
    /// Constant field, `matrix` is row-major `d × d`.
    Constant { dim: usize, matrix: Vec<f64> },
    /// Position-dependent field with a caller-declared uniform bound on the
    /// components and their first derivatives.
    Smooth {
        dim: usize,
        name: String,
        eval: FieldFn,
        derivative_bound: f64,
    },
}

impl fmt::Debug for MagneticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MagneticField::Constant { dim, matrix } => f
                .debug_struct("Constant")
                .field("dim", dim)
                .field("matrix", matrix)
                .finish(),
            MagneticField::Smooth {
                dim,
                name,
                derivative_bound,
                ..
            } => f
                .debug_struct("Smooth")
                .field("dim", dim)
                .field("name", name)
                .field("derivative_bound", derivative_bound)
                .finish(),
        }
    }
}

impl MagneticField {
    /// Constant field from a square matrix. Antisymmetry must hold exactly.
    pub fn constant(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "field dimension must be at least 2, got {dim}"
            )));
        }
        let mut matrix = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            matrix.extend_from_slice(row);
        }
        for j in 0..dim {
            for k in 0..dim {
                if matrix[j * dim + k] != -matrix[k * dim + j] {
                    return Err(Error::InvalidParameter(format!(
                        "field matrix is not antisymmetric at ({j}, {k})"
                    )));
                }
            }
        }
        Ok(MagneticField::Constant { dim, matrix })
    }

    /// `B = [[0, 1], [-1, 0]]`: unit flux per lattice plaquette.
    pub fn unit_planar() -> Self {
        MagneticField::Constant {
            dim: 2,
            matrix: vec![0.0, 1.0, -1.0, 0.0],
        }
    }

    pub fn smooth(dim: usize, name: impl Into<String>, eval: FieldFn, derivative_bound: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "field dimension must be at least 2, got {dim}"
            )));
        }
        if !(derivative_bound >= 0.0) {
            return Err(Error::InvalidParameter(
                "derivative bound must be nonnegative".into(),
            ));
        }
        Ok(MagneticField::Smooth {
            dim,
            name: name.into(),
            eval,
            derivative_bound,
        })
    }

    /// Wraps a constant field as a `Smooth` variant so the quadrature paths
    /// can be checked against the closed forms.
    pub fn as_smooth(&self) -> Self {
        match self {
            MagneticField::Constant { dim, matrix } => {
                let m = matrix.clone();
                MagneticField::Smooth {
                    dim: *dim,
                    name: format!("wrapped{:?}", matrix),
                    eval: Arc::new(move |_x: &[f64], out: &mut [f64]| out.copy_from_slice(&m)),
                    derivative_bound: 0.0,
                }
            }
            smooth => smooth.clone(),
        }
    }

    /// Planar field `B_12(x) = amplitude · cos(x_1)`.
    pub fn cosine_planar(amplitude: f64) -> Self {
        MagneticField::Smooth {
            dim: 2,
            name: format!("cos_x1(amplitude={amplitude})"),
            eval: Arc::new(move |x: &[f64], out: &mut [f64]| {
                let v = amplitude * x[0].cos();
                out.copy_from_slice(&[0.0, v, -v, 0.0]);
            }),
            derivative_bound: amplitude.abs(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MagneticField::Constant { dim, .. } | MagneticField::Smooth { dim, .. } => *dim,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MagneticField::Constant { .. })
    }

    /// Stable textual identity used for cache keys and reports.
    pub fn id(&self) -> String {
        match self {
            MagneticField::Constant { matrix, .. } => format!("constant{:?}", matrix),
            MagneticField::Smooth { name, .. } => format!("smooth:{name}"),
        }
    }

    /// Writes `B(x)` into `out` (row-major `d × d`).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            MagneticField::Constant { matrix, .. } => out.copy_from_slice(matrix),
            MagneticField::Smooth { eval, .. } => eval(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        self.eval_into(x, &mut out);
        out
    }
}

/// Orders of the line and simplex rules used for smooth fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub order_1d: usize,
    pub simplex_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order_1d: 16,
            simplex_order: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn new(order_1d: usize, simplex_order: usize) -> Result<Self> {
        if order_1d < 2 || simplex_order < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature orders must be >= 2 (got {order_1d}, {simplex_order})"
            )));
        }
        Ok(QuadratureSpec {
            order_1d,
            simplex_order,
        })
    }
}

/// A field together with precomputed quadrature rules.
#[derive(Clone)]
pub struct FluxGeometry {
    field: MagneticField,
    quad: QuadratureSpec,
    line: Rule,
    simplex: Vec<(f64, f64, f64)>,
}

impl fmt::Debug for FluxGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxGeometry")
            .field("field", &self.field)
            .field("quad", &self.quad)
            .finish()
    }
}

impl FluxGeometry {
    pub fn new(field: MagneticField, quad: QuadratureSpec) -> Self {
        let line = gauss_legendre_on(quad.order_1d, 0.0, 1.0);
        let simplex = simplex_rule(quad.simplex_order);
        FluxGeometry {
            field,
            quad,
            line,
            simplex,
        }
    }

    pub fn with_default_quadrature(field: MagneticField) -> Self {
        Self::new(field, QuadratureSpec::default())
    }

    pub fn field(&self) -> &MagneticField {
        &self.field
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quad
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Transverse-gauge potential `A_j(x, x0)`; `axis` is zero-based.
    pub fn vector_potential(&self, axis: usize, x: &[f64], x0: &[f64]) -> Result<f64> {
        let d = self.dim();
        if axis >= d {
            return Err(Error::InvalidAxis { axis, dim: d });
        }
        self.check_dim(x)?;
        self.check_dim(x0)?;
        Ok(match &self.field {
            MagneticField::Constant { matrix, .. } => {
                -0.5 * (0..d)
                    .map(|k| (x[k] - x0[k]) * matrix[axis * d + k])
                    .sum::<f64>()
            }
            MagneticField::Smooth { .. } => {
                let mut b = vec![0.0; d * d];
                let mut y = vec![0.0; d];
                let mut acc = 0.0;
                for (&s, &w) in self.line.nodes.iter().zip(&self.line.weights) {
                    for k in 0..d {
                        y[k] = x0[k] + s * (x[k] - x0[k]);
                    }
                    self.field.eval_into(&y, &mut b);
                    let inner: f64 = (0..d).map(|k| s * (x[k] - x0[k]) * b[axis * d + k]).sum();
                    acc += w * inner;
                }
                -acc
            }
        })
    }

    /// Flux `φ(x, x0)` through the oriented triangle `(0, x, x0)`.
    pub fn phi(&self, x: &[f64], x0: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x0)?;
        Ok(self.phi_unchecked(x, x0))
    }

    pub(crate) fn phi_unchecked(&self, x: &[f64], x0: &[f64]) -> f64 {
        let d = self.dim();
        match &self.field {
            MagneticField::Constant { matrix, .. } => {
                let mut acc = 0.0;
                for j in 0..d {
                    let row = &matrix[j * d..(j + 1) * d];
                    let bx0: f64 = row.iter().zip(x0).map(|(b, v)| b * v).sum();
                    acc += x[j] * bx0;
                }
                0.5 * acc
            }
            MagneticField::Smooth { .. } => {
                let mut b = vec![0.0; d * d];
                let mut y = vec![0.0; d];
                let mut acc = 0.0;
                for &(s, t, w) in &self.simplex {
                    for k in 0..d {
                        y[k] = s * x[k] + t * x0[k];
                    }
                    self.field.eval_into(&y, &mut b);
                    let mut inner = 0.0;
                    for j in 0..d {
                        for k in (j + 1)..d {
                            inner += (x[j] * x0[k] - x[k] * x0[j]) * b[j * d + k];
                        }
                    }
                    acc += w * inner;
                }
                acc
            }
        }
    }

    /// `fl(x, y, z) = φ(x, y) + φ(y, z) - φ(x, z)`.
    pub fn triangle_flux(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        self.check_dim(z)?;
        Ok(self.phi_unchecked(x, y) + self.phi_unchecked(y, z) - self.phi_unchecked(x, z))
    }

    /// `fl_{γ,γ'}(x, x') = fl(x+γ, γ', γ) + fl(x+γ, x'+γ', γ')`, evaluated
    /// literally as the sum of two triangle fluxes.
    pub fn fl_gamma(&self, gamma: &[i64], gamma0: &[i64], x: &[f64], x0: &[f64]) -> Result<f64> {
        let d = self.dim();
        for len in [gamma.len(), gamma0.len(), x.len(), x0.len()] {
            if len != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: len,
                });
            }
        }
        let g: Vec<f64> = gamma.iter().map(|&v| v as f64).collect();
        let g0: Vec<f64> = gamma0.iter().map(|&v| v as f64).collect();
        let xg: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
        let x0g: Vec<f64> = x0.iter().zip(&g0).map(|(a, b)| a + b).collect();
        Ok(self.triangle_flux(&xg, &g0, &g)? + self.triangle_flux(&xg, &x0g, &g0)?)
    }
}

/// Area of the triangle `(x, y, z)` in any dimension, via the Gram determinant.
pub fn triangle_area(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let u: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Japanese bracket `⟨x⟩ = (1 + |x|²)^{1/2}`.
pub fn japanese(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|a| a * a).sum::<f64>()).sqrt()
}

/// Largest `|B_jk(x) + B_kj(x)|` over the sample points.
pub fn antisymmetry_violation(field: &MagneticField, points: &[Vec<f64>]) -> f64 {
    let d = field.dim();
    let mut b = vec![0.0; d * d];
    let mut worst = 0.0f64;
    for p in points {
        field.eval_into(p, &mut b);
        for j in 0..d {
            for k in 0..d {
                worst = worst.max((b[j * d + k] + b[k * d + j]).abs());
            }
        }
    }
    worst
}

/// Largest `|∂_k B_ij + ∂_j B_ki + ∂_i B_jk|` over the sample points, with
/// derivatives from central differences of step `h`.
pub fn closedness_violation(field: &MagneticField, points: &[Vec<f64>], h: f64) -> f64 {
    let d = field.dim();
    let mut worst = 0.0f64;
    for p in points {
        // grads[m][i*d + j] = ∂_m B_ij
        let grads: Vec<Vec<f64>> = (0..d)
            .map(|m| {
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus[m] += h;
                minus[m] -= h;
                let bp = field.eval(&plus);
                let bm = field.eval(&minus);
                bp.iter().zip(&bm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = grads[k][i * d + j] + grads[j][k * d + i] + grads[i][j * d + k];
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    worst
}

/// Smallest `C` with `|φ(x, x')| <= C |x| |x'|` over the given pairs.
pub fn fit_growth_constant(geom: &FluxGeometry, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    pairs
        .iter()
        .filter_map(|(x, y)| {
            let scale = norm(x) * norm(y);
            (scale > 1e-12).then(|| geom.phi_unchecked(x, y).abs() / scale)
        })
        .fold(0.0, f64::max)
}

/// Smallest `C` with `|fl(x, y, z)| <= C Δ(x, y, z)` over non-degenerate triangles.
pub fn fit_triangle_constant(geom: &FluxGeometry, triangles: &[[Vec<f64>; 3]]) -> f64 {
    triangles
        .iter()
        .filter_map(|[x, y, z]| {
            let area = triangle_area(x, y, z);
            (area > 1e-9).then(|| {
                let fl = geom.phi_unchecked(x, y) + geom.phi_unchecked(y, z) - geom.phi_unchecked(x, z);
                fl.abs() / area
            })
        })
        .fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit() -> FluxGeometry {
        FluxGeometry::with_default_quadrature(MagneticField::unit_planar())
    }

    #[test]
    fn constant_potential_only_relative_displacement_contributes() {
        let g = unit();
        assert_eq!(g.vector_potential(0, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(g.vector_potential(1, &[0.3, 0.2], &[0.3, 0.2]).unwrap(), 0.0);
        assert_eq!(
            g.vector_potential(1, &[1.0, 0.0], &[0.0, 0.0]).unwrap(),
            0.5
        );
    }

    #[test]
    fn invalid_axis_and_dimension() {
        let g = unit();
        assert!(matches!(
            g.vector_potential(2, &[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::InvalidAxis { axis: 2, dim: 2 })
        ));
        assert!(matches!(
            g.phi(&[0.0, 0.0, 1.0], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(g.fl_gamma(&[0], &[0, 0], &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn smooth_potential_converges_under_refinement() {
        let field = MagneticField::cosine_planar(1.0);
        let x = [PI / 2.0, 0.0];
        let x0 = [0.0, 0.0];
        let value = FluxGeometry::new(field.clone(), QuadratureSpec::new(16, 12).unwrap())
            .vector_potential(0, &x, &x0)
            .unwrap();
        // Cauchy sequence of refined orders.
        let mut prev = f64::NAN;
        let mut last = 0.0;
        for order in [20, 28, 40, 56] {
            last = FluxGeometry::new(field.clone(), QuadratureSpec::new(order, 12).unwrap())
                .vector_potential(0, &x, &x0)
                .unwrap();
            if prev.is_finite() {
                assert!((last - prev).abs() < 1e-13);
            }
            prev = last;
        }
        assert!((value - last).abs() < 1e-10);
        // A_1 = -∫ s x_2 B_12 ds and x_2 = 0, so this one vanishes; the second
        // component is +∫ s x_1 cos(s x_1) ds (B_21 = -cos).
        let a2 = FluxGeometry::with_default_quadrature(field)
            .vector_potential(1, &x, &x0)
            .unwrap();
        let t = PI / 2.0;
        let exact = (t * t.sin() + t.cos() - 1.0) / t;
        assert!((a2 - exact).abs() < 1e-12, "{a2} vs {exact}");
    }

    #[test]
    fn phi_closed_form_and_wrapped_smooth_agree() {
        let g = unit();
        assert_eq!(g.phi(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.5);
        let s = FluxGeometry::with_default_quadrature(MagneticField::unit_planar().as_smooth());
        assert!((s.phi(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(g.phi(&[0.7, -0.2], &[0.7, -0.2]).unwrap(), 0.0);
    }

    #[test]
    fn triangle_flux_examples() {
        let g = unit();
        let x = [0.3, -1.2];
        let z = [2.0, 0.5];
        assert_eq!(g.triangle_flux(&x, &x, &z).unwrap(), 0.0);
        let col = g
            .triangle_flux(&[0.0, 0.0], &[1.0, 2.0], &[2.5, 5.0])
            .unwrap();
        assert!(col.abs() < 1e-12);
        let v = g
            .triangle_flux(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0])
            .unwrap();
        assert!((v.abs() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fl_gamma_examples() {
        let g = unit();
        let zero = [0.0, 0.0];
        assert_eq!(g.fl_gamma(&[3, -1], &[0, 2], &zero, &zero).unwrap(), 0.0);

        let x = [0.2, -0.4];
        let x0 = [-0.1, 0.35];
        let direct = g.fl_gamma(&[0, 0], &[0, 0], &x, &x0).unwrap();
        let sum = g.triangle_flux(&x, &zero, &zero).unwrap() + g.triangle_flux(&x, &x0, &zero).unwrap();
        assert!((direct - sum).abs() < 1e-12);

        // Bilinearity gives fl_{γγ'}(x, x) = 2 φ(x, γ' - γ) for constant fields.
        let p = [0.25, 0.25];
        let v = g.fl_gamma(&[1, 0], &[0, 0], &p, &p).unwrap();
        let expected = 2.0 * g.phi(&p, &[-1.0, 0.0]).unwrap();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn triangle_area_gram_formula() {
        assert!((triangle_area(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]) - 0.5).abs() < 1e-15);
        let a = triangle_area(&[0.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 3.0]);
        assert!((a - 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_must_be_antisymmetric() {
        assert!(MagneticField::constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(MagneticField::constant(&[vec![0.0]]).is_err());
        assert!(MagneticField::constant(&[vec![0.0, 2.0], vec![-2.0, 0.0]]).is_ok());
    }

    #[test]
    fn closedness_flags_non_closed_three_dimensional_field() {
        let bad = MagneticField::smooth(
            3,
            "cos_x3_in_12",
            Arc::new(|x: &[f64], out: &mut [f64]| {
                out.fill(0.0);
                out[1] = x[2].cos();
                out[3] = -x[2].cos();
            }),
            1.0,
        )
        .unwrap();
        let pts = vec![vec![0.1, 0.2, 0.7], vec![-1.0, 0.4, 1.3]];
        assert!(closedness_violation(&bad, &pts, 1e-4) > 0.1);
        assert!(antisymmetry_violation(&bad, &pts) == 0.0);
        let planar = MagneticField::cosine_planar(1.0);
        let pts2 = vec![vec![0.3, 0.1], vec![2.0, -1.0]];
        assert!(closedness_violation(&planar, &pts2, 1e-4) < 1e-9);
    }
}
