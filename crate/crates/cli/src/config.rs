//! JSON experiment configuration. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use hofmat_core::assembly::TruncationParams;
use hofmat_core::geometry::{FluxGeometry, MagneticField};
use hofmat_core::symbols::{cosine_potential, gaussian_xi, harper, modulated, Symbol};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Harper {
        #[serde(default = "two")]
        dim: usize,
    },
    GaussianXi {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        width: f64,
    },
    /// `V(x) = amplitude · cos(2π k·x)` times a Gaussian in ξ.
    Modulated {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        wavevector: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Antisymmetric `B` given row by row.
    Constant { matrix: Vec<Vec<f64>> },
    /// Planar `B_12(x) = amplitude · cos(x_1)`.
    CosinePlanar { amplitude: f64 },
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Constant {
            matrix: vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
        }
    }
}

/// How a spectrum at one `b` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumPath {
    /// Flattened generalized matrix.
    #[default]
    Assembled,
    /// Classical Peierls matrix of a hopping symbol.
    Peierls,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(default = "three")]
    pub lattice_radius: usize,
    #[serde(default = "six")]
    pub band_cut: usize,
    #[serde(default = "two")]
    pub fourier_cutoff: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "eight")]
    pub space_quad: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        let p = TruncationParams::default();
        TruncationSpec {
            lattice_radius: p.lattice_radius,
            band_cut: p.band_cut,
            fourier_cutoff: p.fourier_cutoff,
            epsilon: p.epsilon,
            space_quad: p.space_quad,
        }
    }
}

impl TruncationSpec {
    pub fn params(&self) -> TruncationParams {
        TruncationParams::new(self.lattice_radius, self.band_cut, self.fourier_cutoff, self.space_quad)
            .with_epsilon(self.epsilon)
    }
}

/// Gap-edge tracking for `edges`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    /// Energy window the tracked gap must overlap.
    pub window: [f64; 2],
    #[serde(default = "lower")]
    pub side: EdgeSideSpec,
    #[serde(default = "min_gap")]
    pub min_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSideSpec {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    /// Later quotients may exceed the first by at most this factor.
    #[serde(default = "two_f")]
    pub factor: f64,
    /// Quotients below this are treated as this value when forming the bound.
    #[serde(default = "chain_floor")]
    pub floor: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        ChainSpec {
            factor: 2.0,
            floor: chain_floor(),
        }
    }
}

/// Test functions and refinement step for `oracle-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "bump_width")]
    pub bump_width: f64,
    #[serde(default = "two_u")]
    pub window_power: u32,
    #[serde(default = "center_f")]
    pub center_f: Vec<f64>,
    #[serde(default = "center_g")]
    pub center_g: Vec<f64>,
    /// Narrow bumps placed in opposite corners for the decay check.
    #[serde(default = "disjoint_width")]
    pub disjoint_width: f64,
    #[serde(default = "disjoint_offset")]
    pub disjoint_offset: f64,
    #[serde(default = "refined")]
    pub refined: TruncationSpec,
    #[serde(default = "rel_tol")]
    pub relative_tolerance: f64,
    #[serde(default = "abs_tol")]
    pub disjoint_tolerance: f64,
    #[serde(default = "eight")]
    pub x_nodes_per_panel: usize,
    #[serde(default = "six")]
    pub xi_panels: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("oracle defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub field: FieldSpec,
    #[serde(default)]
    pub path: SpectrumPath,
    pub b_max: f64,
    #[serde(default)]
    pub b_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub b0: Option<f64>,
    #[serde(default)]
    pub delta_b: Option<Vec<f64>>,
    #[serde(default)]
    pub truncation: TruncationSpec,
    /// Drop eigenvalues of states living on the open lattice boundary.
    #[serde(default)]
    pub bulk_filter: bool,
    #[serde(default)]
    pub gap: Option<GapSpec>,
    #[serde(default)]
    pub chain: ChainSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    /// Extra ε values for the convergence rows of `verify`.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "out_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Test hook: `verify` flips one off-diagonal block entry before checking.
    #[serde(default)]
    pub test_corrupt_block: bool,
}

fn one() -> f64 {
    1.0
}
fn two_f() -> f64 {
    2.0
}
fn two() -> usize {
    2
}
fn two_u() -> u32 {
    2
}
fn three() -> usize {
    3
}
fn six() -> usize {
    6
}
fn eight() -> usize {
    8
}
fn lower() -> EdgeSideSpec {
    EdgeSideSpec::Lower
}
fn min_gap() -> f64 {
    0.05
}
fn chain_floor() -> f64 {
    1e-6
}
fn bump_width() -> f64 {
    0.8
}
fn center_f() -> Vec<f64> {
    vec![0.2, -0.1]
}
fn center_g() -> Vec<f64> {
    vec![-0.3, 0.25]
}
fn disjoint_width() -> f64 {
    0.3
}
fn disjoint_offset() -> f64 {
    2.0
}
fn refined() -> TruncationSpec {
    TruncationSpec {
        lattice_radius: 3,
        band_cut: 6,
        fourier_cutoff: 3,
        epsilon: 0.0,
        space_quad: 16,
    }
}
fn rel_tol() -> f64 {
    1e-2
}
fn abs_tol() -> f64 {
    1e-6
}
fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.b_max > 0.0) || !self.b_max.is_finite() {
            return bad(format!("b_max: must be positive and finite, got {}", self.b_max));
        }
        let in_range = |b: f64| (0.0..=self.b_max).contains(&b);
        if let Some(grid) = &self.b_grid {
            if let Some(b) = grid.iter().find(|b| !in_range(**b)) {
                return bad(format!("b_grid: value {b} outside [0, b_max = {}]", self.b_max));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return bad("b_grid: must be strictly increasing".into());
            }
        }
        if let Some(b0) = self.b0 {
            if !in_range(b0) {
                return bad(format!("b0: value {b0} outside [0, b_max = {}]", self.b_max));
            }
        }
        if let Some(deltas) = &self.delta_b {
            let Some(b0) = self.b0 else {
                return bad("delta_b: requires b0".into());
            };
            for &d in deltas {
                if !(d >= 0.0) || !in_range(b0 + d) {
                    return bad(format!("delta_b: {d} must be >= 0 with b0 + δb inside [0, b_max]"));
                }
            }
        }
        if let Some(eps) = &self.epsilons {
            if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
                return bad("epsilons: must be positive and strictly decreasing".into());
            }
        }
        let dim = self.dim();
        let field_dim = match &self.field {
            FieldSpec::Constant { matrix } => matrix.len(),
            FieldSpec::CosinePlanar { .. } => 2,
        };
        if dim != field_dim {
            return bad(format!("field: dimension {field_dim} does not match symbol dimension {dim}"));
        }
        if let SymbolSpec::Modulated { wavevector, .. } = &self.symbol {
            if wavevector.len() != dim {
                return bad(format!("symbol.wavevector: needs {dim} components"));
            }
        }
        if self.path == SpectrumPath::Peierls && !matches!(self.symbol, SymbolSpec::Harper { .. }) {
            return bad("path: peierls requires a hopping symbol".into());
        }
        if let Some(g) = &self.gap {
            if !(g.window[0] < g.window[1]) || !(g.min_width > 0.0) {
                return bad("gap: window must be increasing and min_width positive".into());
            }
        }
        self.symbol()?;
        self.geometry()?;
        self.truncation
            .params()
            .validate(&self.symbol()?)
            .map_err(|e| CliError::Config(format!("truncation: {e}")))?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.symbol {
            SymbolSpec::Harper { dim } | SymbolSpec::GaussianXi { dim, .. } | SymbolSpec::Modulated { dim, .. } => *dim,
        }
    }

    pub fn symbol(&self) -> Result<Symbol, CliError> {
        let s = match &self.symbol {
            SymbolSpec::Harper { dim } => harper(*dim),
            SymbolSpec::GaussianXi { dim, width } => gaussian_xi(*dim, *width),
            SymbolSpec::Modulated {
                dim,
                width,
                amplitude,
                wavevector,
            } => {
                let k: Vec<f64> = wavevector.iter().map(|v| 2.0 * std::f64::consts::PI * v).collect();
                let name = format!("{amplitude}cos(2pi{wavevector:?}.x)");
                modulated(*dim, &name, cosine_potential(*amplitude, k), *width)
            }
        };
        s.map_err(|e| CliError::Config(format!("symbol: {e}")))
    }

    pub fn field(&self) -> Result<MagneticField, CliError> {
        match &self.field {
            FieldSpec::Constant { matrix } => {
                MagneticField::constant(matrix).map_err(|e| CliError::Config(format!("field: {e}")))
            }
            FieldSpec::CosinePlanar { amplitude } => Ok(MagneticField::cosine_planar(*amplitude)),
        }
    }

    pub fn geometry(&self) -> Result<FluxGeometry, CliError> {
        Ok(FluxGeometry::with_default_quadrature(self.field()?))
    }

    /// The configured grid, or `b0` followed by `b0 + δb`.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(g) = &self.b_grid {
            if g.is_empty() {
                return Err(CliError::Config("b_grid: empty".into()));
            }
            return Ok(g.clone());
        }
        match (self.b0, &self.delta_b) {
            (Some(b0), Some(d)) => {
                let mut g = vec![b0];
                g.extend(d.iter().map(|v| b0 + v));
                g.sort_by(f64::total_cmp);
                g.dedup();
                Ok(g)
            }
            (Some(b0), None) => Ok(vec![b0]),
            _ => Err(CliError::Config("b_grid: required (or b0)".into())),
        }
    }

    pub fn b0_and_deltas(&self) -> Result<(f64, Vec<f64>), CliError> {
        match (self.b0, &self.delta_b) {
            (Some(b0), Some(d)) if !d.is_empty() => Ok((b0, d.clone())),
            _ => Err(CliError::Config("b0 and a non-empty delta_b are required".into())),
        }
    }
}

/// SHA-256 of the raw configuration text, hex encoded.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
