//! Gauss–Legendre rules on intervals, the reference simplex, and tensor
//! grids over the unit cell `]-1/2, 1/2[^d`.

use std::f64::consts::PI;

/// A one-dimensional quadrature rule: nodes paired with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes come out ascending and exactly mirror-symmetric: the negative half
/// is computed by Newton iteration and reflected.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root.
        let theta = PI * (4 * i + 3) as f64 / (4 * n + 2) as f64;
        let nf = n as f64;
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule with `n` nodes mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Rule {
        nodes: base.nodes.iter().map(|t| mid + half * t).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    }
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `n` nodes on `[a, b]`.
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(n * panels);
    let mut weights = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + 0.5 * h * t);
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}

/// Rule on the unit cell axis `[-1/2, 1/2]`.
pub fn cell_rule(n: usize) -> Rule {
    gauss_legendre_on(n, -0.5, 0.5)
}

/// Collapsed (Duffy) tensor rule on the standard simplex `s, t >= 0, s + t <= 1`.
///
/// Returns `(s, t, weight)` triples; the weights sum to `1/2`.
pub fn simplex_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let line = gauss_legendre_on(n, 0.0, 1.0);
    let mut out = Vec::with_capacity(n * n);
    for (&u, &wu) in line.nodes.iter().zip(&line.weights) {
        for (&v, &wv) in line.nodes.iter().zip(&line.weights) {
            out.push((u, v * (1.0 - u), wu * wv * (1.0 - u)));
        }
    }
    out
}

/// Tensor-product grid over `[-1/2, 1/2]^d` built from a 1-D cell rule.
///
/// Points are enumerated lexicographically with the last axis fastest.
#[derive(Debug, Clone)]
pub struct CellGrid {
    pub dim: usize,
    pub axis: Rule,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl CellGrid {
    pub fn new(dim: usize, order: usize) -> Self {
        let axis = cell_rule(order);
        let total = order.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten_index(flat, order, dim);
            points.push(idx.iter().map(|&i| axis.nodes[i]).collect());
            weights.push(idx.iter().map(|&i| axis.weights[i]).product());
        }
        CellGrid {
            dim,
            axis,
            points,
            weights,
        }
    }

    pub fn order(&self) -> usize {
        self.axis.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-axis node indices of grid point `flat`.
    pub fn axis_indices(&self, flat: usize) -> Vec<usize> {
        unflatten_index(flat, self.order(), self.dim)
    }
}

/// Mixed-radix decomposition with uniform radix, last digit fastest.
pub fn unflatten_index(mut flat: usize, radix: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; dim];
    for slot in idx.iter_mut().rev() {
        *slot = flat % radix;
        flat /= radix;
    }
    idx
}
