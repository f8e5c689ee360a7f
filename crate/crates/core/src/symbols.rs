//! Symbols `a(x, x', ξ)` together with the metadata assembly needs, and the
//! built-in symbol library.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::japanese;

pub type SymbolFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync>;
pub type AmplitudeFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type PotentialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One lattice hop `δ` with coefficient `c_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub shift: Vec<i64>,
    pub coeff: Complex64,
}

/// How the ξ-dependence of a symbol is handled by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum XiClass {
    /// Trigonometric polynomial `Σ_δ c_δ e^{iδ·ξ}`; the ξ-integral collapses
    /// onto lattice shifts.
    Hopping(Vec<Hop>),
    /// Negligible (below `tail_tol`) outside the box `|ξ|_∞ <= box_halfwidth`.
    XiIntegrable {
        box_halfwidth: f64,
        grid_points: usize,
        tail_tol: f64,
    },
    /// No decay in ξ; only usable with `ε > 0`.
    General,
}

impl XiClass {
    pub fn label(&self) -> &'static str {
        match self {
            XiClass::Hopping(_) => "hopping",
            XiClass::XiIntegrable { .. } => "xi-integrable",
            XiClass::General => "general",
        }
    }
}

/// `a(x, x', ξ) = amplitude(x, x') · profile(ξ)`.
#[derive(Clone)]
pub struct Factored {
    pub amplitude: AmplitudeFn,
    pub profile: ProfileFn,
}

#[derive(Clone)]
pub struct Symbol {
    name: String,
    dim: usize,
    growth_order: f64,
    hermitian: bool,
    xi_class: XiClass,
    eval: SymbolFn,
    factored: Option<Factored>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("growth_order", &self.growth_order)
            .field("hermitian", &self.hermitian)
            .field("xi_class", &self.xi_class)
            .field("factored", &self.factored.is_some())
            .finish()
    }
}

impl Symbol {
    /// A symbol from an arbitrary evaluator.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        growth_order: f64,
        hermitian: bool,
        xi_class: XiClass,
        eval: SymbolFn,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "symbol dimension must be at least 2, got {dim}"
            )));
        }
        if !(growth_order >= 0.0) {
            return Err(Error::InvalidParameter("growth order must be >= 0".into()));
        }
        if let XiClass::Hopping(hops) = &xi_class {
            validate_hops(dim, hops, hermitian)?;
        }
        if let XiClass::XiIntegrable {
            box_halfwidth,
            grid_points,
            tail_tol,
        } = &xi_class
        {
            if !(*box_halfwidth > 0.0) || *grid_points < 2 || !(*tail_tol > 0.0) {
                return Err(Error::InvalidParameter(
                    "xi box, grid and tail tolerance must be positive".into(),
                ));
            }
        }
        Ok(Symbol {
            name: name.into(),
            dim,
            growth_order,
            hermitian,
            xi_class,
            eval,
            factored: None,
        })
    }

    /// Attaches a product decomposition; the evaluator must agree with it.
    pub fn with_factorization(mut self, factored: Factored) -> Self {
        self.factored = Some(factored);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn growth_order(&self) -> f64 {
        self.growth_order
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn xi_class(&self) -> &XiClass {
        &self.xi_class
    }

    pub fn factored(&self) -> Option<&Factored> {
        self.factored.as_ref()
    }

    pub fn hops(&self) -> Option<&[Hop]> {
        match &self.xi_class {
            XiClass::Hopping(h) => Some(h),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], x0: &[f64], xi: &[f64]) -> Complex64 {
        (self.eval)(x, x0, xi)
    }
}

fn validate_hops(dim: usize, hops: &[Hop], hermitian: bool) -> Result<()> {
    if hops.is_empty() {
        return Err(Error::InvalidParameter("hop set must be nonempty".into()));
    }
    for h in hops {
        if h.shift.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h.shift.len(),
            });
        }
    }
    for (i, a) in hops.iter().enumerate() {
        if hops[..i].iter().any(|b| b.shift == a.shift) {
            return Err(Error::InvalidParameter(format!(
                "duplicate hop {:?}",
                a.shift
            )));
        }
    }
    if hermitian {
        for h in hops {
            let neg: Vec<i64> = h.shift.iter().map(|v| -v).collect();
            let partner = hops.iter().find(|o| o.shift == neg).ok_or_else(|| {
                Error::InvalidParameter(format!("hop {:?} has no reverse partner", h.shift))
            })?;
            if (partner.coeff - h.coeff.conj()).norm() > 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "hop {:?} coefficient is not the conjugate of its reverse",
                    h.shift
                )));
            }
        }
    }
    Ok(())
}

/// Hopping symbol `Σ_δ c_δ e^{iδ·ξ}`.
pub fn hopping(name: impl Into<String>, dim: usize, hops: Vec<Hop>, hermitian: bool) -> Result<Symbol> {
    let table = hops.clone();
    let eval: SymbolFn = Arc::new(move |_x: &[f64], _x0: &[f64], xi: &[f64]| {
        table
            .iter()
            .map(|h| {
                let phase: f64 = h.shift.iter().zip(xi).map(|(&s, &k)| s as f64 * k).sum();
                h.coeff * Complex64::from_polar(1.0, phase)
            })
            .sum()
    });
    Symbol::custom(name, dim, 0.0, hermitian, XiClass::Hopping(hops), eval)
}

/// Nearest-neighbour Harper symbol `Σ_j 2 cos ξ_j`.
pub fn harper(dim: usize) -> Result<Symbol> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "harper symbol needs d >= 2, got {dim}"
        )));
    }
    let mut hops = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        for sign in [1i64, -1] {
            let mut shift = vec![0i64; dim];
            shift[j] = sign;
            hops.push(Hop {
                shift,
                coeff: Complex64::new(1.0, 0.0),
            });
        }
    }
    hopping(format!("harper(d={dim})"), dim, hops, true)
}

/// Box half-width beyond which `exp(-|ξ|²/(2w²))` stays below `tail_tol`.
pub fn gaussian_tail_box(width: f64, tail_tol: f64) -> f64 {
    width * (2.0 * (1.0 / tail_tol).ln()).sqrt()
}

const GAUSSIAN_TAIL_TOL: f64 = 1e-12;
const GAUSSIAN_XI_POINTS: usize = 64;

fn gaussian_profile(width: f64) -> ProfileFn {
    let inv = 1.0 / (2.0 * width * width);
    Arc::new(move |xi: &[f64]| {
        let r2: f64 = xi.iter().map(|k| k * k).sum();
        Complex64::new((-r2 * inv).exp(), 0.0)
    })
}

/// `a(x, x', ξ) = exp(-|ξ|²/(2w²))`.
pub fn gaussian_xi(dim: usize, width: f64) -> Result<Symbol> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    let profile = gaussian_profile(width);
    let p = profile.clone();
    let eval: SymbolFn = Arc::new(move |_x: &[f64], _x0: &[f64], xi: &[f64]| p(xi));
    let class = XiClass::XiIntegrable {
        box_halfwidth: gaussian_tail_box(width, GAUSSIAN_TAIL_TOL),
        grid_points: GAUSSIAN_XI_POINTS,
        tail_tol: GAUSSIAN_TAIL_TOL,
    };
    Ok(
        Symbol::custom(format!("gaussian_xi(d={dim},w={width})"), dim, 0.0, true, class, eval)?
            .with_factorization(Factored {
                amplitude: Arc::new(|_x: &[f64], _x0: &[f64]| Complex64::new(1.0, 0.0)),
                profile,
            }),
    )
}

/// `a(x, x', ξ) = V((x + x')/2) · exp(-|ξ|²/(2w²))` for a real bounded `V`.
pub fn modulated(dim: usize, potential_name: &str, potential: PotentialFn, width: f64) -> Result<Symbol> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    let profile = gaussian_profile(width);
    let amp_v = potential.clone();
    let amplitude: AmplitudeFn = Arc::new(move |x: &[f64], x0: &[f64]| {
        let mid: Vec<f64> = x.iter().zip(x0).map(|(a, b)| 0.5 * (a + b)).collect();
        Complex64::new(amp_v(&mid), 0.0)
    });
    let (a, p) = (amplitude.clone(), profile.clone());
    let eval: SymbolFn = Arc::new(move |x: &[f64], x0: &[f64], xi: &[f64]| a(x, x0) * p(xi));
    let class = XiClass::XiIntegrable {
        box_halfwidth: gaussian_tail_box(width, GAUSSIAN_TAIL_TOL),
        grid_points: GAUSSIAN_XI_POINTS,
        tail_tol: GAUSSIAN_TAIL_TOL,
    };
    Ok(Symbol::custom(
        format!("modulated(d={dim},V={potential_name},w={width})"),
        dim,
        0.0,
        true,
        class,
        eval,
    )?
    .with_factorization(Factored { amplitude, profile }))
}

/// `V(x) = amplitude · cos(k·x)`.
pub fn cosine_potential(amplitude: f64, wavevector: Vec<f64>) -> PotentialFn {
    Arc::new(move |x: &[f64]| {
        amplitude * x.iter().zip(&wavevector).map(|(a, k)| a * k).sum::<f64>().cos()
    })
}

/// Result of the sampled class-membership checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolReport {
    pub samples: usize,
    /// `max |a| / ⟨x - x'⟩^M` over the samples.
    pub growth_constant: f64,
    /// Exponent estimated from near and far shells of `|x - x'|`.
    pub growth_exponent_estimate: f64,
    pub growth_consistent: bool,
    pub hermitian_violation: Option<f64>,
    pub tail_max: Option<f64>,
    pub hop_mismatch: Option<f64>,
    /// Sup of sampled first and second central differences in (x, x', ξ).
    pub derivative_sup: [f64; 2],
}

/// Deterministic uniform sample stream used by [`validate_symbol`].
#[derive(Debug, Clone)]
pub struct SampleStream(u64);

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream(seed ^ 0x9e37_79b9_7f4a_7c15)
    }

    /// Uniform in `[lo, hi)` (splitmix64).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        lo + (hi - lo) * ((z >> 11) as f64 / (1u64 << 53) as f64)
    }

    pub fn vector(&mut self, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..dim).map(|_| self.uniform(lo, hi)).collect()
    }
}

/// Spot-checks growth, Hermitian symmetry, ξ-tail and hop consistency on `n`
/// random samples. Soft violations are recorded, never raised.
pub fn validate_symbol(symbol: &Symbol, n: usize, seed: u64) -> Result<SymbolReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let d = symbol.dim();
    let m = symbol.growth_order();
    let mut rng = SampleStream::new(seed);
    let xi_extent = match symbol.xi_class() {
        XiClass::XiIntegrable { box_halfwidth, .. } => *box_halfwidth,
        _ => std::f64::consts::PI,
    };

    let mut growth_constant = 0.0f64;
    let mut near_max = 0.0f64;
    let mut far_max = 0.0f64;
    let (near_r, far_r) = (4.0, 64.0);
    let mut herm = 0.0f64;
    let mut tail = 0.0f64;
    let mut hop_mismatch = 0.0f64;
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    let h = 1e-3;

    for _ in 0..n {
        let x = rng.vector(d, -5.0, 5.0);
        let x0 = rng.vector(d, -5.0, 5.0);
        let xi = rng.vector(d, -xi_extent, xi_extent);
        let a = symbol.eval(&x, &x0, &xi);
        let rel: Vec<f64> = x.iter().zip(&x0).map(|(p, q)| p - q).collect();
        growth_constant = growth_constant.max(a.norm() / japanese(&rel).powf(m));

        // Shell probes: same midpoint, separation of fixed length.
        let dir = unit_vector(&rng.vector(d, -1.0, 1.0));
        for (radius, slot) in [(near_r, &mut near_max), (far_r, &mut far_max)] {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(p, u)| p + 0.5 * radius * u).collect();
            let y0: Vec<f64> = x.iter().zip(&dir).map(|(p, u)| p - 0.5 * radius * u).collect();
            *slot = slot.max(symbol.eval(&y, &y0, &xi).norm());
        }

        if symbol.is_hermitian() {
            herm = herm.max((a - symbol.eval(&x0, &x, &xi).conj()).norm());
        }

        if let XiClass::XiIntegrable { box_halfwidth, .. } = symbol.xi_class() {
            // Push one coordinate past the box edge.
            let mut out = rng.vector(d, -2.0 * box_halfwidth, 2.0 * box_halfwidth);
            let axis = (rng.uniform(0.0, d as f64) as usize).min(d - 1);
            let sign = if rng.uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            out[axis] = sign * rng.uniform(*box_halfwidth * (1.0 + 1e-9), 2.0 * box_halfwidth);
            tail = tail.max(symbol.eval(&x, &x0, &out).norm());
        }

        if let Some(hops) = symbol.hops() {
            let direct: Complex64 = hops
                .iter()
                .map(|hp| {
                    let ph: f64 = hp.shift.iter().zip(&xi).map(|(&s, &k)| s as f64 * k).sum();
                    hp.coeff * Complex64::from_polar(1.0, ph)
                })
                .sum();
            hop_mismatch = hop_mismatch.max((a - direct).norm());
        }

        // Finite differences along every coordinate of (x, x', ξ).
        let mut point: Vec<f64> = x.iter().chain(&x0).chain(&xi).copied().collect();
        let eval_at = |p: &[f64]| symbol.eval(&p[..d], &p[d..2 * d], &p[2 * d..]);
        for c in 0..3 * d {
            let base = point[c];
            point[c] = base + h;
            let fp = eval_at(&point);
            point[c] = base - h;
            let fm = eval_at(&point);
            point[c] = base;
            d1 = d1.max(((fp - fm) / (2.0 * h)).norm());
            d2 = d2.max(((fp - 2.0 * a + fm) / (h * h)).norm());
        }
    }

    let growth_exponent_estimate = if near_max > 0.0 && far_max > 0.0 {
        let ratio = (1.0f64 + far_r * far_r).sqrt() / (1.0f64 + near_r * near_r).sqrt();
        (far_max / near_max).ln() / ratio.ln()
    } else {
        0.0
    };

    Ok(SymbolReport {
        samples: n,
        growth_constant,
        growth_exponent_estimate,
        growth_consistent: growth_exponent_estimate <= m + 0.1,
        hermitian_violation: symbol.is_hermitian().then_some(herm),
        tail_max: matches!(symbol.xi_class(), XiClass::XiIntegrable { .. }).then_some(tail),
        hop_mismatch: symbol.hops().map(|_| hop_mismatch),
        derivative_sup: [d1, d2],
    })
}

fn unit_vector(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
    v.iter().map(|a| a / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harper_values_and_hops() {
        let s = harper(2).unwrap();
        let z = [0.0, 0.0];
        assert!((s.eval(&z, &z, &[0.0, 0.0]) - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        assert!(s.eval(&z, &z, &[PI, 0.0]).norm() < 1e-15);
        let s3 = harper(3).unwrap();
        let hops = s3.hops().unwrap();
        assert_eq!(hops.len(), 6);
        for j in 0..3 {
            for sign in [1, -1] {
                let mut e = vec![0; 3];
                e[j] = sign;
                assert!(hops.iter().any(|h| h.shift == e && h.coeff == Complex64::new(1.0, 0.0)));
            }
        }
        assert!(harper(1).is_err());
    }

    #[test]
    fn gaussian_values_and_tail_box() {
        let s = gaussian_xi(2, 1.0).unwrap();
        let z = [0.0, 0.0];
        assert_eq!(s.eval(&z, &z, &z).re, 1.0);
        let v = s.eval(&z, &z, &[1.0, 1.0]).re;
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        match s.xi_class() {
            XiClass::XiIntegrable { box_halfwidth, .. } => {
                assert!(*box_halfwidth >= (2.0 * 12.0 * 10f64.ln()).sqrt() - 1e-12);
                assert!((box_halfwidth - 7.4339).abs() < 1e-3);
            }
            _ => panic!("gaussian must be xi-integrable"),
        }
        assert!(gaussian_xi(2, 0.0).is_err());
        assert!(gaussian_xi(2, -1.0).is_err());
    }

    #[test]
    fn modulated_examples() {
        let one = modulated(2, "one", Arc::new(|_x: &[f64]| 1.0), 1.0).unwrap();
        let g = gaussian_xi(2, 1.0).unwrap();
        let mut rng = SampleStream::new(3);
        for _ in 0..50 {
            let (x, y, k) = (rng.vector(2, -3.0, 3.0), rng.vector(2, -3.0, 3.0), rng.vector(2, -3.0, 3.0));
            assert_eq!(one.eval(&x, &y, &k), g.eval(&x, &y, &k));
        }
        let cosine = modulated(2, "cos", cosine_potential(1.0, vec![2.0 * PI, 0.0]), 1.0).unwrap();
        let p = [0.25, 0.0];
        assert!(cosine.eval(&p, &p, &[0.0, 0.0]).norm() < 1e-15);
        let rep = validate_symbol(&cosine, 1000, 11).unwrap();
        assert_eq!(rep.hermitian_violation, Some(0.0));
    }

    #[test]
    fn validation_reports() {
        let rep = validate_symbol(&harper(2).unwrap(), 200, 1).unwrap();
        assert_eq!(rep.hermitian_violation.unwrap(), 0.0);
        assert!(rep.hop_mismatch.unwrap() <= 1e-12);
        assert!(rep.growth_consistent);
        assert!(rep.growth_constant <= 4.0 + 1e-12);

        let rep = validate_symbol(&gaussian_xi(2, 1.0).unwrap(), 500, 2).unwrap();
        assert!(rep.tail_max.unwrap() < 1e-12);

        let skewed = Symbol::custom(
            "skewed",
            2,
            0.0,
            true,
            XiClass::General,
            Arc::new(|x: &[f64], _x0: &[f64], _xi: &[f64]| Complex64::new(0.0, x[0].sin())),
        )
        .unwrap();
        let rep = validate_symbol(&skewed, 100, 5).unwrap();
        assert!(rep.hermitian_violation.unwrap() > 0.1);
    }

    #[test]
    fn growth_fit_sees_linear_growth() {
        let linear = Symbol::custom(
            "linear",
            2,
            1.0,
            false,
            XiClass::General,
            Arc::new(|x: &[f64], x0: &[f64], _xi: &[f64]| {
                Complex64::new(((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2)).sqrt(), 0.0)
            }),
        )
        .unwrap();
        let rep = validate_symbol(&linear, 300, 9).unwrap();
        assert!((rep.growth_exponent_estimate - 1.0).abs() < 0.2);
        assert!(rep.growth_consistent);
        assert!(rep.growth_constant <= 1.0 + 1e-12);
    }

    #[test]
    fn hop_sets_are_validated() {
        let one_way = vec![Hop {
            shift: vec![1, 0],
            coeff: Complex64::new(1.0, 0.0),
        }];
        assert!(hopping("oneway", 2, one_way.clone(), true).is_err());
        assert!(hopping("oneway", 2, one_way, false).is_ok());
        let twisted = vec![
            Hop { shift: vec![1, 0], coeff: Complex64::new(0.0, 1.0) },
            Hop { shift: vec![-1, 0], coeff: Complex64::new(0.0, -1.0) },
        ];
        assert!(hopping("twisted", 2, twisted, true).is_ok());
    }
}
