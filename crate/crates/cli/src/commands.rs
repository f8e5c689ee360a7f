//! Subcommand implementations. Each returns its tables and summary pieces;
//! `run` in the crate root does the writing.

use hofmat_core::assembly::{
    apply_ub, assemble, band_profile, cache, epsilon_convergence_check, lipschitz_profile, peierls_matrix,
    quadratic_form_oracle, GaussianBump, GeneralizedMatrix, Lattice, OracleGrid, TruncationParams,
};
use hofmat_core::geometry::{antisymmetry_violation, closedness_violation, fit_triangle_constant, FluxGeometry};
use hofmat_core::spectral::{
    eigen_hermitian, eigenvalues_hermitian, four_step_chain_filtered, hausdorff, hermiticity_defect, holder_fit,
    operator_norm, riesz_project, track_gap_edge, BulkFilter, ChainReport, EdgeSide, SpectrumResult, SweepResult,
    DEFAULT_QUAD_NODES, DEFAULT_RESIDUAL_TOL, STEP_EXPONENTS,
};
use hofmat_core::symbols::{validate_symbol, Symbol, XiClass};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{EdgeSideSpec, ExperimentConfig, SpectrumPath};
use crate::output::{Cell, Check, Table};
use crate::CliError;

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.hard)
    }
}

/// Everything a spectrum computation needs, built once per run.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub symbol: Symbol,
    pub geom: FluxGeometry,
    pub params: TruncationParams,
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, CliError> {
        let symbol = cfg.symbol()?;
        let geom = cfg.geometry()?;
        let params = cfg.truncation.params();
        Ok(Context {
            cfg,
            symbol,
            geom,
            params,
        })
    }

    /// The flattened matrix at `b` and its per-site block size.
    pub fn matrix(&self, b: f64) -> Result<(DMatrix<Complex64>, usize), CliError> {
        match self.cfg.path {
            SpectrumPath::Peierls => {
                let hops = self
                    .symbol
                    .hops()
                    .ok_or_else(|| CliError::Config("path: peierls requires a hopping symbol".into()))?;
                Ok((peierls_matrix(hops, &self.geom, b, self.params.lattice_radius)?, 1))
            }
            SpectrumPath::Assembled => {
                let h = assemble(&self.symbol, &self.geom, b, &self.params)?;
                let m = h.block_size();
                Ok((h.flatten(), m))
            }
        }
    }

    /// Spectrum at `b`, bulk-filtered if configured.
    pub fn spectrum(&self, b: f64) -> Result<SpectrumResult, CliError> {
        let (m, block) = self.matrix(b)?;
        let s = if self.cfg.bulk_filter {
            let eig = eigen_hermitian(&m, DEFAULT_RESIDUAL_TOL)?;
            let lattice = Lattice::new(self.geom.dim(), self.params.lattice_radius);
            BulkFilter::for_radius(self.params.lattice_radius).apply(&eig, lattice.sites(), block)?
        } else {
            eigenvalues_hermitian(&m, DEFAULT_RESIDUAL_TOL)?
        };
        if s.eigenvalues.is_empty() {
            return Err(CliError::Invariant(format!("empty spectrum at b = {b}")));
        }
        Ok(s.with_provenance(b, None))
    }

    /// Spectra on a grid, computed in parallel and returned in grid order.
    pub fn spectra(&self, grid: &[f64]) -> Result<Vec<SpectrumResult>, CliError> {
        grid.par_iter().map(|&b| self.spectrum(b)).collect()
    }
}

pub fn butterfly(ctx: &Context) -> Result<Outcome, CliError> {
    let grid = ctx.cfg.grid()?;
    let spectra = ctx.spectra(&grid)?;
    let mut t = Table::new("butterfly", &["b", "index", "eigenvalue"]);
    for (b, s) in grid.iter().zip(&spectra) {
        for (i, e) in s.eigenvalues.iter().enumerate() {
            t.push(vec![(*b).into(), i.into(), (*e).into()]);
        }
    }
    let mut out = Outcome::default();
    out.results.insert("grid_points".into(), json!(grid.len()));
    out.results.insert(
        "eigenvalue_counts".into(),
        json!(spectra.iter().map(|s| s.eigenvalues.len()).collect::<Vec<_>>()),
    );
    out.tables.push(t);
    Ok(out)
}

pub fn spectrum(ctx: &Context) -> Result<Outcome, CliError> {
    let b = ctx.cfg.grid()?[0];
    let s = ctx.spectrum(b)?;
    let mut t = Table::new("spectrum", &["b", "index", "eigenvalue"]);
    for (i, e) in s.eigenvalues.iter().enumerate() {
        t.push(vec![b.into(), i.into(), (*e).into()]);
    }
    let mut out = Outcome::default();
    out.results.insert("b".into(), json!(b));
    out.results.insert("min".into(), json!(s.min()));
    out.results.insert("max".into(), json!(s.max()));
    out.results.insert("residual_bound".into(), json!(s.residual_bound));
    out.checks.push(Check::hard("eigen_residual", s.residual_bound, DEFAULT_RESIDUAL_TOL));
    out.tables.push(t);
    Ok(out)
}

/// `d_H(σ(H_{b0}), σ(H_{b0+δb}))` for every configured δb, in config order.
fn distances_from_anchor(ctx: &Context) -> Result<(f64, Vec<f64>, Vec<f64>, Vec<SpectrumResult>), CliError> {
    let (b0, deltas) = ctx.cfg.b0_and_deltas()?;
    let mut grid = vec![b0];
    grid.extend(deltas.iter().map(|d| b0 + d));
    let spectra = ctx.spectra(&grid)?;
    let d = spectra[1..]
        .iter()
        .map(|s| hausdorff(&spectra[0].eigenvalues, &s.eigenvalues))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok((b0, deltas, d, spectra))
}

/// Largest ratio between a quotient and its neighbour in the δb list.
fn halving_ratio(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].abs(), w[1].abs());
            if a == 0.0 && b == 0.0 {
                1.0
            } else {
                a.max(b) / a.min(b)
            }
        })
        .fold(1.0, f64::max)
}

pub fn holder(ctx: &Context) -> Result<Outcome, CliError> {
    let (b0, deltas, dist, _) = distances_from_anchor(ctx)?;
    let mut t = Table::new("holder", &["delta_b", "d_h", "d_h_over_sqrt_delta", "d_h_over_delta"]);
    let mut pairs = Vec::new();
    for (&db, &d) in deltas.iter().zip(&dist) {
        let (sq, lin) = if db > 0.0 { (d / db.sqrt(), d / db) } else { (0.0, 0.0) };
        t.push(vec![db.into(), d.into(), sq.into(), lin.into()]);
        if db > 0.0 && d > 0.0 {
            pairs.push((db, d));
        }
    }
    let mut out = Outcome::default();
    out.tables.push(t);
    out.results.insert("b0".into(), json!(b0));
    match holder_fit(&pairs) {
        Ok(fit) => {
            let mut ft = Table::new(
                "holder_fit",
                &["exponent", "constant", "residual", "c_star", "c_star_spread"],
            );
            ft.push(vec![
                fit.exponent.into(),
                fit.constant.into(),
                fit.residual.into(),
                fit.c_star.into(),
                fit.c_star_spread.into(),
            ]);
            out.tables.push(ft);
            out.checks.push(Check::soft("c_star_spread", fit.c_star_spread, 3.0));
            out.checks.push(Check::soft("holder_exponent_deficit", 0.4 - fit.exponent, 0.0));
            out.results.insert(
                "fit".into(),
                json!({
                    "exponent": fit.exponent,
                    "constant": fit.constant,
                    "residual": fit.residual,
                    "c_star": fit.c_star,
                    "c_star_spread": fit.c_star_spread,
                }),
            );
        }
        Err(e) => out.warnings.push(format!("holder fit unavailable: {e}")),
    }
    Ok(out)
}

fn side(s: EdgeSideSpec) -> EdgeSide {
    match s {
        EdgeSideSpec::Lower => EdgeSide::Lower,
        EdgeSideSpec::Upper => EdgeSide::Upper,
    }
}

pub fn edges(ctx: &Context) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    if !ctx.geom.field().is_constant() {
        out.warnings
            .push("smooth field: outside the constant-field hypothesis of the Lipschitz edge result".into());
    }
    let grid = ctx.cfg.grid()?;
    let spectra = ctx.spectra(&grid)?;
    let sweep = SweepResult::new(grid.clone(), spectra)?;
    let (e_min, e_max) = (sweep.e_min(), sweep.e_max());
    let track = match &ctx.cfg.gap {
        Some(g) => Some(track_gap_edge(&sweep, (g.window[0], g.window[1]), side(g.side), g.min_width)?),
        None => None,
    };
    let edge_at = |i: usize| track.as_ref().map(|t| t.edges[i]);

    let mut t = Table::new("edges", &["b", "e_min", "e_max", "gap_edge"]);
    for i in 0..grid.len() {
        let edge: Cell = match edge_at(i) {
            Some(e) => e.into(),
            None => "none".into(),
        };
        t.push(vec![grid[i].into(), e_min[i].into(), e_max[i].into(), edge]);
    }
    out.tables.push(t);

    let quotient = |a: Option<f64>, b: Option<f64>, db: f64| -> Cell {
        match (a, b) {
            (Some(x), Some(y)) => ((y - x).abs() / db).into(),
            _ => "closed".into(),
        }
    };
    let mut q = Table::new("edge_quotients", &["b_left", "b_right", "q_e_min", "q_e_max", "q_gap_edge"]);
    for i in 1..grid.len() {
        let db = grid[i] - grid[i - 1];
        let qe: Cell = match &track {
            Some(tr) => quotient(tr.edges[i - 1], tr.edges[i], db),
            None => "none".into(),
        };
        q.push(vec![
            grid[i - 1].into(),
            grid[i].into(),
            ((e_min[i] - e_min[i - 1]).abs() / db).into(),
            ((e_max[i] - e_max[i - 1]).abs() / db).into(),
            qe,
        ]);
    }
    out.tables.push(q);
    if let Some(tr) = &track {
        out.results.insert("gap_closed_at".into(), json!(tr.closed_at.map(|i| grid[i])));
        out.results.insert("max_gap_quotient".into(), json!(tr.max_quotient()));
    }

    // Quotients anchored at b0, one row per δb, with the regularity contrast.
    if let (Some(b0), Some(deltas)) = (ctx.cfg.b0, &ctx.cfg.delta_b) {
        let pos = |b: f64| grid.iter().position(|&g| g == b);
        let i0 = pos(b0).ok_or_else(|| CliError::Config("b0 must lie on the grid".into()))?;
        let mut a = Table::new(
            "edge_anchored",
            &["delta_b", "q_e_min", "q_e_max", "q_gap_edge", "d_h_over_delta", "d_h_over_sqrt_delta"],
        );
        let mut cols: [Vec<f64>; 3] = Default::default();
        let mut gap_closed = false;
        for &db in deltas.iter().filter(|d| **d > 0.0) {
            let i = pos(b0 + db).expect("grid built from b0 + δb");
            let d = hausdorff(&sweep.spectra[i0].eigenvalues, &sweep.spectra[i].eigenvalues)?;
            let qmin = (e_min[i] - e_min[i0]).abs() / db;
            let qmax = (e_max[i] - e_max[i0]).abs() / db;
            let qe = match &track {
                Some(tr) => match (tr.edges[i0], tr.edges[i]) {
                    (Some(x), Some(y)) => Some((y - x).abs() / db),
                    _ => None,
                },
                None => None,
            };
            cols[0].push(qmin);
            cols[1].push(qmax);
            match qe {
                Some(v) => cols[2].push(v),
                None => gap_closed = true,
            }
            let qe_cell: Cell = if track.is_some() { qe.into() } else { "none".into() };
            a.push(vec![db.into(), qmin.into(), qmax.into(), qe_cell, (d / db).into(), (d / db.sqrt()).into()]);
        }
        out.tables.push(a);
        out.checks.push(Check::soft("e_min_quotient_halving_ratio", halving_ratio(&cols[0]), 2.0));
        out.checks.push(Check::soft("e_max_quotient_halving_ratio", halving_ratio(&cols[1]), 2.0));
        if track.is_some() && !gap_closed {
            out.checks.push(Check::soft("gap_edge_quotient_halving_ratio", halving_ratio(&cols[2]), 2.0));
        }
        out.results.insert(
            "anchored".into(),
            json!({"b0": b0, "q_e_min": cols[0], "q_e_max": cols[1], "q_gap_edge": cols[2]}),
        );
    }
    Ok(out)
}

pub fn chain(ctx: &Context) -> Result<Outcome, CliError> {
    let (b0, deltas) = ctx.cfg.b0_and_deltas()?;
    let filter = ctx.cfg.bulk_filter.then(|| BulkFilter::for_radius(ctx.params.lattice_radius));
    let steps = four_step_chain_filtered(&ctx.symbol, &ctx.geom, b0, &deltas, &ctx.params, filter.as_ref())?;
    let report = ChainReport::new(steps, ctx.cfg.chain.factor, ctx.cfg.chain.floor);
    let mut t = Table::new(
        "chain",
        &["delta_b", "d_1", "d_2", "d_3", "d_4", "q_1", "q_2", "q_3", "q_4"],
    );
    for s in &report.steps {
        let mut row: Vec<Cell> = vec![s.delta_b.into()];
        row.extend(s.distances.iter().map(|&v| Cell::from(v)));
        row.extend(s.quotients.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    let mut out = Outcome::default();
    out.tables.push(t);
    for s in 0..4 {
        out.checks
            .push(Check::flag(format!("chain_step_{}_stable", s + 1), report.stable[s], true));
    }
    out.results.insert("b0".into(), json!(b0));
    out.results.insert("step_exponents".into(), json!(STEP_EXPONENTS));
    out.results.insert("constants".into(), json!(report.constants));
    out.results.insert("stable".into(), json!(report.stable));
    Ok(out)
}

/// The test functions of `oracle-check`: `(label, f, g)`.
fn oracle_cases(ctx: &Context) -> Result<Vec<(&'static str, GaussianBump, GaussianBump)>, CliError> {
    let o = &ctx.cfg.oracle;
    let support = ctx.params.lattice_radius as f64 + 0.5;
    let bump = |c: &[f64], w: f64| {
        GaussianBump::new(c.to_vec(), w, o.window_power, support).map_err(|e| CliError::Config(format!("oracle: {e}")))
    };
    let d = ctx.geom.dim();
    if o.center_f.len() != d || o.center_g.len() != d {
        return Err(CliError::Config(format!("oracle: bump centers need {d} components")));
    }
    let far = o.disjoint_offset;
    Ok(vec![
        ("same", bump(&o.center_f, o.bump_width)?, bump(&o.center_f, o.bump_width)?),
        ("shifted", bump(&o.center_f, o.bump_width)?, bump(&o.center_g, o.bump_width)?),
        (
            "disjoint",
            bump(&vec![-far; d], o.disjoint_width)?,
            bump(&vec![far; d], o.disjoint_width)?,
        ),
    ])
}

/// `⟨H c_f, c_g⟩` for several function pairs against one assembled matrix,
/// with `c` the cell Fourier coefficients of `U_b f`.
fn assembled_forms(
    ctx: &Context,
    params: &TruncationParams,
    b: f64,
    cases: &[(&'static str, GaussianBump, GaussianBump)],
) -> Result<Vec<Complex64>, CliError> {
    let h = assemble(&ctx.symbol, &ctx.geom, b, params)?.flatten();
    let support = params.lattice_radius as f64 + 0.5;
    cases
        .iter()
        .map(|(_, f, g)| {
            let cf = apply_ub(&ctx.geom, b, &|x: &[f64]| f.eval(x), support, params)?.fourier_coefficients(params)?;
            let cg = apply_ub(&ctx.geom, b, &|x: &[f64]| g.eval(x), support, params)?.fourier_coefficients(params)?;
            let hf = &h * nalgebra::DVector::from_vec(cf);
            Ok(cg.iter().zip(hf.iter()).map(|(a, v)| a.conj() * v).sum())
        })
        .collect()
}

pub fn oracle_check(ctx: &Context) -> Result<Outcome, CliError> {
    if !matches!(ctx.symbol.xi_class(), XiClass::XiIntegrable { .. }) {
        return Err(CliError::Config("oracle-check requires a xi-integrable symbol".into()));
    }
    let o = &ctx.cfg.oracle;
    let refined = o.refined.params().with_epsilon(ctx.params.epsilon);
    refined
        .validate(&ctx.symbol)
        .map_err(|e| CliError::Config(format!("oracle.refined: {e}")))?;
    let grid_b = ctx.cfg.b_grid.clone().unwrap_or_else(|| vec![0.0, 0.3]);
    let cases = oracle_cases(ctx)?;
    let support = ctx.params.lattice_radius as f64 + 0.5;
    let oracle_grid = OracleGrid {
        x_half_width: support,
        x_panels: 2 * ctx.params.lattice_radius + 1,
        x_nodes_per_panel: o.x_nodes_per_panel,
        xi_panels: o.xi_panels,
        ..OracleGrid::default()
    };
    let mut t = Table::new(
        "oracle",
        &["b", "case", "level", "lattice_radius", "fourier_cutoff", "space_quad", "assembled_re", "assembled_im", "oracle_re", "oracle_im", "abs_error", "rel_error"],
    );
    let mut out = Outcome::default();
    let mut summary = Vec::new();
    for &b in &grid_b {
        let oracle: Vec<Complex64> = cases
            .par_iter()
            .map(|(_, f, g)| {
                quadratic_form_oracle(&ctx.symbol, &ctx.geom, b, ctx.params.epsilon, &|x: &[f64]| f.eval(x), &|x: &[f64]| g.eval(x), &oracle_grid)
            })
            .collect::<Result<_, _>>()?;
        let levels = [("base", ctx.params), ("refined", refined)];
        let mut errors = vec![[0.0f64; 2]; cases.len()];
        for (li, (label, p)) in levels.iter().enumerate() {
            let forms = assembled_forms(ctx, p, b, &cases)?;
            for (ci, ((name, _, _), (a, r))) in cases.iter().zip(forms.iter().zip(&oracle)).enumerate() {
                let abs = (a - r).norm();
                let rel = abs / r.norm().max(f64::MIN_POSITIVE);
                errors[ci][li] = if *name == "disjoint" { abs } else { rel };
                t.push(vec![
                    b.into(),
                    (*name).into(),
                    (*label).into(),
                    p.lattice_radius.into(),
                    p.fourier_cutoff.into(),
                    p.space_quad.into(),
                    a.re.into(),
                    a.im.into(),
                    r.re.into(),
                    r.im.into(),
                    abs.into(),
                    rel.into(),
                ]);
            }
        }
        for ((name, _, _), e) in cases.iter().zip(&errors) {
            if *name == "disjoint" {
                out.checks.push(Check::hard(format!("oracle_disjoint_abs_b={b}"), e[0].max(e[1]), o.disjoint_tolerance));
            } else {
                out.checks.push(Check::hard(format!("oracle_{name}_rel_b={b}"), e[0], o.relative_tolerance));
                out.checks.push(Check::flag(format!("oracle_{name}_decreases_b={b}"), e[1] < e[0], true));
            }
            summary.push(json!({"b": b, "case": name, "base": e[0], "refined": e[1]}));
        }
    }
    out.tables.push(t);
    out.results.insert("errors".into(), json!(summary));
    Ok(out)
}

/// Assembles at the first grid value, reusing `cache_path` when it holds
/// exactly this assembly.
pub fn assemble_cmd(ctx: &Context, cache_path: &std::path::Path) -> Result<Outcome, CliError> {
    let b = ctx.cfg.grid()?[0];
    let key = cache::cache_key(ctx.symbol.name(), &ctx.geom.field().id(), b, &ctx.params);
    let mut out = Outcome::default();
    let (h, from_cache) = match cache::load_matching(cache_path, key) {
        Ok(h) => (h, true),
        Err(_) => {
            let h = assemble(&ctx.symbol, &ctx.geom, b, &ctx.params)?;
            cache::save(&h, cache_path)?;
            (h, false)
        }
    };
    let mut t = Table::new("band_profile", &["distance", "pairs", "max_norm", "norm_kind", "weighted_5"]);
    let shells = band_profile(&h);
    for s in &shells {
        t.push(vec![
            s.distance.into(),
            s.pairs.into(),
            s.max_norm.into(),
            s.norm_kind.label().into(),
            s.weighted(2.0 * ctx.geom.dim() as f64 + 1.0).into(),
        ]);
    }
    out.tables.push(t);
    out.checks.push(Check::hard("hermiticity_defect", hermiticity_check(&h), 1e-12));
    out.results.insert("b".into(), json!(b));
    out.results.insert("dimension".into(), json!(h.dimension()));
    out.results.insert("stored_blocks".into(), json!(h.len()));
    out.results.insert("cache_key".into(), json!(format!("{key:016x}")));
    out.results.insert("from_cache".into(), json!(from_cache));
    Ok(out)
}

fn hermiticity_check(h: &GeneralizedMatrix) -> f64 {
    if h.is_hermitian_symbol() {
        h.hermiticity_defect()
    } else {
        0.0
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()).map(|z| z * 0.5)
}

fn brute_hausdorff(x: &[f64], y: &[f64]) -> f64 {
    let directed = |a: &[f64], b: &[f64]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(x, y).max(directed(y, x))
}

/// Window from below the spectrum up to the middle of its widest gap.
pub fn gap_window(values: &[f64]) -> Option<(f64, f64)> {
    let (i, w) = values
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, w[1] - w[0]))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let top = values[i] + 0.5 * w;
    let bottom = values[0] - 0.5 * w;
    Some((0.5 * (top + bottom), 0.5 * (top - bottom)))
}

pub fn verify(ctx: &Context, seed: u64) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ctx.geom.dim();
    let field = ctx.geom.field();
    let constant = field.is_constant();
    let flux_tol = if constant { 1e-12 } else { 1e-8 };

    // Flux identities on random points.
    let pts: Vec<Vec<f64>> = (0..200).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    out.checks.push(Check::hard("field_antisymmetry", antisymmetry_violation(field, &pts), 1e-12));
    out.checks.push(Check::hard("field_closedness", closedness_violation(field, &pts, 1e-4), 1e-6));
    let mut flux_anti = 0.0f64;
    let mut flux_diag = 0.0f64;
    for w in pts.windows(2) {
        flux_anti = flux_anti.max((ctx.geom.phi(&w[0], &w[1])? + ctx.geom.phi(&w[1], &w[0])?).abs());
        flux_diag = flux_diag.max(ctx.geom.phi(&w[0], &w[0])?.abs());
    }
    out.checks.push(Check::hard("flux_antisymmetry", flux_anti, flux_tol));
    out.checks.push(Check::hard("flux_diagonal", flux_diag, flux_tol));
    let tris: Vec<[Vec<f64>; 3]> = pts.chunks(3).filter(|c| c.len() == 3).map(|c| [c[0].clone(), c[1].clone(), c[2].clone()]).collect();
    let c_tri = fit_triangle_constant(&ctx.geom, &tris);
    out.checks.push(Check::soft("triangle_flux_constant_finite", if c_tri.is_finite() { 0.0 } else { 1.0 }, 0.0));
    out.results.insert("triangle_flux_constant".into(), json!(c_tri));

    // Symbol class checks.
    let rep = validate_symbol(&ctx.symbol, 500, seed)?;
    if let Some(v) = rep.hermitian_violation {
        out.checks.push(Check::hard("symbol_hermitian", v, 1e-12));
    }
    if let Some(v) = rep.hop_mismatch {
        out.checks.push(Check::hard("symbol_hop_consistency", v, 1e-12));
    }
    if let (Some(v), XiClass::XiIntegrable { tail_tol, .. }) = (rep.tail_max, ctx.symbol.xi_class()) {
        out.checks.push(Check::hard("symbol_xi_tail", v, *tail_tol));
    }
    out.checks.push(Check::flag("symbol_growth_consistent", rep.growth_consistent, false));

    // Assembly at the configured b values.
    let grid = ctx.cfg.grid().unwrap_or_else(|_| vec![0.0]);
    let mut rows = Table::new("verify_assembly", &["b", "hermiticity_defect", "phase_modulus_defect", "phase_inverse_defect", "eigen_residual", "decay_constant"]);
    for &b in &grid {
        let h = assemble(&ctx.symbol, &ctx.geom, b, &ctx.params)?;
        let mut flat = h.flatten();
        if ctx.cfg.test_corrupt_block {
            let m = h.block_size();
            let n = flat.nrows();
            if n > m {
                let r = rng.random_range(0..m);
                let c = m + rng.random_range(0..n - m);
                flat[(r, c)] += Complex64::new(1.0, 0.5);
            } else {
                flat[(0, 0)] += Complex64::new(0.0, 1.0);
            }
        }
        let herm = if ctx.symbol.is_hermitian() { hermiticity_defect(&flat) } else { 0.0 };
        let (pm, pi) = h.phase_defects();
        out.checks.push(Check::hard(format!("hermiticity_b={b}"), herm, 1e-12));
        out.checks.push(Check::hard(format!("phase_modulus_b={b}"), pm, 1e-12));
        out.checks.push(Check::hard(format!("phase_inverse_b={b}"), pi, 1e-12));
        let residual = if herm <= 1e-12 && ctx.symbol.is_hermitian() {
            let r = eigenvalues_hermitian(&flat, DEFAULT_RESIDUAL_TOL).map(|s| s.residual_bound).unwrap_or(f64::INFINITY);
            out.checks.push(Check::hard(format!("eigen_residual_b={b}"), r, DEFAULT_RESIDUAL_TOL));
            r
        } else {
            f64::NAN
        };
        let shells = band_profile(&h);
        let diag = shells.first().map(|s| s.max_norm).unwrap_or(0.0);
        let power = 2.0 * d as f64 + 1.0;
        let decay = shells.iter().map(|s| s.weighted(power)).fold(0.0, f64::max) / diag.max(f64::MIN_POSITIVE);
        out.checks.push(Check::soft(format!("block_decay_constant_finite_b={b}"), if decay.is_finite() { 0.0 } else { 1.0 }, 0.0));
        rows.push(vec![b.into(), herm.into(), pm.into(), pi.into(), residual.into(), decay.into()]);
    }
    out.tables.push(rows);

    if grid.len() >= 2 {
        let a = assemble(&ctx.symbol, &ctx.geom, grid[0], &ctx.params)?;
        let b = assemble(&ctx.symbol, &ctx.geom, grid[1], &ctx.params)?;
        let lip = lipschitz_profile(&a, &b)?;
        let db = grid[1] - grid[0];
        let c = lip.iter().map(|s| s.weighted(d as f64 + 1.0) / db).fold(0.0, f64::max);
        out.results.insert("block_lipschitz_constant".into(), json!(c));
    }

    // Spectral tooling on seeded random data.
    let mut haus = 0.0f64;
    let mut norm_viol = 0.0f64;
    for _ in 0..50 {
        let mut x: Vec<f64> = (0..rng.random_range(1..20)).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut y: Vec<f64> = (0..rng.random_range(1..20)).map(|_| rng.random_range(-5.0..5.0)).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        haus = haus.max((hausdorff(&x, &y)? - brute_hausdorff(&x, &y)).abs());
        let s = random_hermitian(&mut rng, 12);
        let p = random_hermitian(&mut rng, 12).map(|z| z * 0.3);
        let t = &s + &p;
        let ds = hausdorff(
            &eigenvalues_hermitian(&s, DEFAULT_RESIDUAL_TOL)?.eigenvalues,
            &eigenvalues_hermitian(&t, DEFAULT_RESIDUAL_TOL)?.eigenvalues,
        )?;
        norm_viol = norm_viol.max(ds - operator_norm(&p));
    }
    out.checks.push(Check::hard("hausdorff_vs_brute_force", haus, 1e-15));
    out.checks.push(Check::hard("hausdorff_below_norm", norm_viol, 1e-10));
    let m = random_hermitian(&mut rng, 16);
    let values = eigenvalues_hermitian(&m, DEFAULT_RESIDUAL_TOL)?.eigenvalues;
    if let Some((c, r)) = gap_window(&values) {
        let rz = riesz_project(&m, c, r, 2 * DEFAULT_QUAD_NODES, None)?;
        out.checks.push(Check::hard("riesz_filter_vs_contour", rz.difference, 1e-6));
        out.checks.push(Check::hard("riesz_spectrum", rz.spectrum_defect, 1e-10));
    }

    if let Some(eps) = &ctx.cfg.epsilons {
        let b = grid[0];
        let rep = epsilon_convergence_check(&ctx.symbol, &ctx.geom, b, &ctx.params, eps)?;
        let mut t = Table::new("epsilon_convergence", &["epsilon", "difference", "against_limit"]);
        for (e, v) in rep.epsilons.iter().zip(&rep.differences) {
            t.push(vec![(*e).into(), (*v).into(), if rep.against_limit { "true" } else { "false" }.into()]);
        }
        out.tables.push(t);
        if rep.epsilon_ignored {
            out.warnings.push("hopping symbol: epsilon has no effect".into());
        }
        out.checks.push(Check::flag("epsilon_differences_decrease", rep.decreasing, true));
    }
    Ok(out)
}
