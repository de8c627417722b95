//! Turns a parsed [`ProblemFile`] into a validated problem, grid and solver
//! options, reporting failures by field path.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::expr::{Expr, Scope};
use super::format::*;
use super::CliError;
use crate::evolution::{EvolutionError, FpdviProblem, NonlocalFn, SolveOptions};
use crate::fracops::{GridKind, TimeGrid};
use crate::hypotheses::HypothesisConfig;
use crate::mittag_leffler::GeneratorMatrix;
use crate::vi_solver::{
    check_pairing, ConvexFunction, ConvexSet, MonotoneMap, PiecewiseLinear, ViError,
};

/// A problem ready to run.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    /// The file as run, after command-line overrides.
    pub file: ProblemFile,
    pub problem: FpdviProblem,
    pub grid: TimeGrid,
    pub options: SolveOptions,
    pub hypotheses: HypothesisConfig,
    pub seed: u64,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn vi_error(field: &str, e: ViError) -> CliError {
    match e {
        ViError::UnsupportedCombination(msg) | ViError::UnsupportedVariant(msg) => {
            CliError::Unsupported {
                field: field.into(),
                message: msg,
            }
        }
        other => invalid(field, other.to_string()),
    }
}

fn matrix(
    field: &str,
    rows: &[Vec<f64>],
    shape: Option<(usize, usize)>,
) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(invalid(field, "rows have different lengths"));
    }
    if let Some((er, ec)) = shape {
        if (r, c) != (er, ec) {
            return Err(invalid(
                field,
                format!("expected a {er}x{ec} matrix, got {r}x{c}"),
            ));
        }
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn vector(field: &str, v: &[f64], len: usize) -> Result<DVector<f64>, CliError> {
    if v.len() != len {
        return Err(invalid(
            field,
            format!("expected length {len}, got {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(DVector::from_column_slice(v))
}

fn expressions(field: &str, srcs: &[String], scope: Scope) -> Result<Vec<Expr>, CliError> {
    srcs.iter()
        .enumerate()
        .map(|(i, s)| {
            Expr::parse(s, scope).map_err(|e| invalid(format!("{field}[{i}]"), e.to_string()))
        })
        .collect()
}

fn grid_of(file: &ProblemFile) -> Result<TimeGrid, CliError> {
    let spec = &file.grid;
    if spec.intervals < 2 {
        return Err(invalid("grid.N", "need at least 2 intervals"));
    }
    let kind = match (spec.kind, spec.gamma) {
        (GridKindSpec::Uniform, None) => GridKind::Uniform,
        (GridKindSpec::Uniform, Some(_)) => {
            return Err(invalid("grid.gamma", "gamma applies to graded grids only"))
        }
        (GridKindSpec::Graded, Some(gamma)) => GridKind::Graded { gamma },
        (GridKindSpec::Graded, None) => {
            return Err(invalid("grid.gamma", "graded grids need gamma"))
        }
    };
    TimeGrid::with_kind(file.horizon, spec.intervals, kind)
        .map_err(|e| invalid("grid", e.to_string()))
}

fn options_of(spec: &SolverSpec) -> Result<SolveOptions, CliError> {
    if !(spec.tol >= 1e-12 && spec.tol.is_finite()) {
        return Err(invalid(
            "solver.tol",
            format!("must be at least 1e-12, got {}", spec.tol),
        ));
    }
    if spec.max_outer == 0 {
        return Err(invalid("solver.max_outer", "must be positive"));
    }
    if !(spec.damping > 0.0 && spec.damping <= 1.0) {
        return Err(invalid(
            "solver.damping",
            format!("must lie in (0, 1], got {}", spec.damping),
        ));
    }
    if !(spec.vi_tol >= 1e-14 && spec.vi_tol.is_finite()) {
        return Err(invalid(
            "solver.vi_tol",
            format!("must be at least 1e-14, got {}", spec.vi_tol),
        ));
    }
    if spec.vi_max_iter == 0 {
        return Err(invalid("solver.vi_max_iter", "must be positive"));
    }
    Ok(spec.options())
}

fn check_hypotheses(cfg: &HypothesisConfig, horizon: f64) -> Result<(), CliError> {
    let f = |name: &str| format!("hypotheses.{name}");
    if cfg.pair_count < 100 {
        return Err(invalid(f("pair_count"), "must be at least 100"));
    }
    if cfg.sample_count < 100 {
        return Err(invalid(f("sample_count"), "must be at least 100"));
    }
    if cfg.radii.len() < 3 || cfg.radii.windows(2).any(|w| w[0] >= w[1]) || cfg.radii[0] <= 0.0 {
        return Err(invalid(
            f("radii"),
            "need at least 3 positive increasing radii",
        ));
    }
    let ks = &cfg.k_sequence;
    if ks.len() < 5 || ks.windows(2).any(|w| w[0] >= w[1]) || ks[0] <= 0.0 || ks[ks.len() - 1] < 1e4
    {
        return Err(invalid(
            f("k_sequence"),
            "need at least 5 positive increasing entries reaching 1e4",
        ));
    }
    if let Some(d) = cfg.delta {
        if !(d > 0.0 && d < horizon) {
            return Err(invalid(f("delta"), "must lie in (0, T)"));
        }
    }
    if cfg.theta_a_resolution < 2 || cfg.time_intervals < 1 {
        return Err(invalid(
            f("theta_a_resolution"),
            "resolutions must be positive",
        ));
    }
    if !(cfg.weight_tol > 0.0 && cfg.weight_tol < 0.1) {
        return Err(invalid(f("weight_tol"), "must lie in (0, 0.1)"));
    }
    if let Some(r) = cfg.probe_radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(f("probe_radius"), "must be positive"));
        }
    }
    Ok(())
}

fn constraint_set(spec: &SetSpec) -> Result<ConvexSet, CliError> {
    let field = "vi.set";
    let set = match spec {
        SetSpec::Box { lower, upper } => {
            if lower.len() != upper.len() {
                return Err(invalid(field, "lower and upper differ in length"));
            }
            ConvexSet::boxed(
                DVector::from_column_slice(lower),
                DVector::from_column_slice(upper),
            )
        }
        SetSpec::Ball { center, radius } => {
            ConvexSet::ball(DVector::from_column_slice(center), *radius)
        }
        SetSpec::Halfspaces {
            normals,
            offsets,
            interior,
        } => {
            matrix("vi.set.normals", normals, None)?;
            ConvexSet::halfspaces(
                normals
                    .iter()
                    .map(|r| DVector::from_column_slice(r))
                    .collect(),
                offsets.clone(),
                DVector::from_column_slice(interior),
            )
        }
    };
    set.map_err(|e| vi_error(field, e))
}

fn operator(spec: &OperatorSpec, m: usize) -> Result<MonotoneMap, CliError> {
    let field = "vi.operator";
    match spec {
        OperatorSpec::Affine {
            matrix: rows,
            offset,
        } => {
            let mm = matrix("vi.operator.matrix", rows, Some((m, m)))?;
            let q = vector("vi.operator.offset", offset, m)?;
            MonotoneMap::affine(mm, q).map_err(|e| vi_error(field, e))
        }
        OperatorSpec::Expr {
            components,
            lipschitz,
        } => {
            if components.len() != m {
                return Err(invalid(
                    "vi.operator.components",
                    format!("expected {m} components, got {}", components.len()),
                ));
            }
            let scope = Scope {
                xi: false,
                theta: 0,
                u: m,
            };
            let exprs = expressions("vi.operator.components", components, scope)?;
            let f = Arc::new(move |u: &DVector<f64>| {
                DVector::from_iterator(m, exprs.iter().map(|e| e.eval(0.0, &[], u.as_slice())))
            });
            MonotoneMap::callable(m, f, *lipschitz).map_err(|e| vi_error(field, e))
        }
    }
}

fn phi(spec: &PhiSpec, m: usize) -> Result<ConvexFunction, CliError> {
    let field = "vi.phi";
    let out = match spec {
        PhiSpec::Zero => return Ok(ConvexFunction::Zero),
        PhiSpec::WeightedL1 { weights } => {
            ConvexFunction::weighted_l1(vector("vi.phi.weights", weights, m)?)
        }
        PhiSpec::Quadratic {
            matrix: rows,
            linear,
        } => ConvexFunction::quadratic(
            matrix("vi.phi.matrix", rows, Some((m, m)))?,
            vector("vi.phi.linear", linear, m)?,
        ),
        PhiSpec::PiecewiseLinear { components } => {
            if components.len() != m {
                return Err(invalid(
                    "vi.phi.components",
                    format!("expected {m} components, got {}", components.len()),
                ));
            }
            let parts = components
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    PiecewiseLinear::new(c.breakpoints.clone(), c.slopes.clone())
                        .map_err(|e| vi_error(&format!("vi.phi.components[{i}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ConvexFunction::separable(parts)
        }
    };
    out.map_err(|e| vi_error(field, e))
}

fn vector_map(
    field: &str,
    spec: &VectorMapSpec,
    n: usize,
    len: usize,
) -> Result<crate::evolution::StateVectorFn, CliError> {
    Ok(match spec {
        VectorMapSpec::Constant { vector: v } => {
            let c = vector(&format!("{field}.vector"), v, len)?;
            Arc::new(move |_, _| c.clone())
        }
        VectorMapSpec::Affine {
            matrix: rows,
            offset,
        } => {
            let mm = matrix(&format!("{field}.matrix"), rows, Some((len, n)))?;
            let c = vector(&format!("{field}.offset"), offset, len)?;
            Arc::new(move |_, th: &DVector<f64>| &mm * th + &c)
        }
        VectorMapSpec::Expr { components } => {
            if components.len() != len {
                return Err(invalid(
                    format!("{field}.components"),
                    format!("expected {len} components, got {}", components.len()),
                ));
            }
            let scope = Scope {
                xi: true,
                theta: n,
                u: 0,
            };
            let exprs = expressions(&format!("{field}.components"), components, scope)?;
            Arc::new(move |xi, th: &DVector<f64>| {
                DVector::from_iterator(len, exprs.iter().map(|e| e.eval(xi, th.as_slice(), &[])))
            })
        }
    })
}

fn matrix_map(
    spec: &MatrixMapSpec,
    n: usize,
    m: usize,
) -> Result<crate::evolution::StateMatrixFn, CliError> {
    Ok(match spec {
        MatrixMapSpec::Constant { matrix: rows } => {
            let b = matrix("B.matrix", rows, Some((n, m)))?;
            Arc::new(move |_, _| b.clone())
        }
        MatrixMapSpec::Expr { entries } => {
            if entries.len() != n || entries.iter().any(|r| r.len() != m) {
                return Err(invalid(
                    "B.entries",
                    format!("expected a {n}x{m} array of expressions"),
                ));
            }
            let scope = Scope {
                xi: true,
                theta: n,
                u: 0,
            };
            let mut exprs = Vec::with_capacity(n * m);
            for (i, row) in entries.iter().enumerate() {
                exprs.extend(expressions(&format!("B.entries[{i}]"), row, scope)?);
            }
            Arc::new(move |xi, th: &DVector<f64>| {
                DMatrix::from_fn(n, m, |i, j| exprs[i * m + j].eval(xi, th.as_slice(), &[]))
            })
        }
    })
}

/// Linear interpolation of sampled values at `t`.
fn interpolate(nodes: &[f64], values: &[DVector<f64>], t: f64) -> DVector<f64> {
    let k = nodes.partition_point(|&x| x < t);
    if k == 0 {
        return values[0].clone();
    }
    if k >= nodes.len() {
        return values[nodes.len() - 1].clone();
    }
    let w = (t - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
    &values[k - 1] * (1.0 - w) + &values[k] * w
}

fn nonlocal(spec: &NonlocalSpec, n: usize, horizon: f64) -> Result<NonlocalFn, CliError> {
    let offset_of = |o: &Option<Vec<f64>>| -> Result<DVector<f64>, CliError> {
        match o {
            Some(v) => vector("h.offset", v, n),
            None => Ok(DVector::zeros(n)),
        }
    };
    Ok(match spec {
        NonlocalSpec::Constant { vector: v } => {
            let c = vector("h.vector", v, n)?;
            Arc::new(move |_, _| c.clone())
        }
        NonlocalSpec::PointSum { terms, offset } => {
            if terms.is_empty() {
                return Err(invalid("h.terms", "need at least one term"));
            }
            let mut parsed = Vec::with_capacity(terms.len());
            for (j, term) in terms.iter().enumerate() {
                let field = format!("h.terms[{j}].time");
                let t = match &term.time {
                    TimeRef::At(t) if *t >= 0.0 && *t <= horizon => *t,
                    TimeRef::Named(s) if s == "T" => horizon,
                    _ => return Err(invalid(field, "must be a number in [0, T] or \"T\"")),
                };
                let mm = matrix(&format!("h.terms[{j}].matrix"), &term.matrix, Some((n, n)))?;
                parsed.push((t, mm));
            }
            let c = offset_of(offset)?;
            Arc::new(move |nodes: &[f64], values: &[DVector<f64>]| {
                let mut acc = c.clone();
                for (t, mm) in &parsed {
                    acc += mm * interpolate(nodes, values, *t);
                }
                acc
            })
        }
        NonlocalSpec::Mean {
            matrix: rows,
            offset,
        } => {
            let mm = matrix("h.matrix", rows, Some((n, n)))?;
            let c = offset_of(offset)?;
            Arc::new(move |nodes: &[f64], values: &[DVector<f64>]| {
                let mut integral = DVector::zeros(values[0].len());
                for k in 1..nodes.len() {
                    integral += (&values[k - 1] + &values[k]) * (0.5 * (nodes[k] - nodes[k - 1]));
                }
                let span = nodes[nodes.len() - 1] - nodes[0];
                &mm * (integral / span) + &c
            })
        }
    })
}

/// Validates `file` and builds the problem it describes.
pub fn assemble(file: ProblemFile) -> Result<LoadedProblem, CliError> {
    if file.format_version != FORMAT_VERSION {
        return Err(invalid(
            "format_version",
            format!(
                "unsupported version {:?}, expected {FORMAT_VERSION:?}",
                file.format_version
            ),
        ));
    }
    if !(file.alpha > 0.0 && file.alpha <= 1.0) {
        return Err(invalid(
            "alpha",
            format!("must lie in (0, 1], got {}", file.alpha),
        ));
    }
    if !(file.horizon > 0.0 && file.horizon.is_finite()) {
        return Err(invalid(
            "T",
            format!("must be positive, got {}", file.horizon),
        ));
    }
    let grid = grid_of(&file)?;
    let options = options_of(&file.solver)?;
    check_hypotheses(&file.hypotheses, file.horizon)?;

    let a_rows = file.a.len();
    let a = matrix("A", &file.a, Some((a_rows, a_rows)))?;
    if a_rows == 0 {
        return Err(invalid("A", "must be a nonempty square matrix"));
    }
    let n = a_rows;
    let a = GeneratorMatrix::new(a).map_err(|e| invalid("A", e.to_string()))?;

    let k = constraint_set(&file.vi.set)?;
    let m = k.dim();
    let g_map = operator(&file.vi.operator, m)?;
    let phi = phi(&file.vi.phi, m)?;
    if let Some(d) = phi.dim() {
        if d != m {
            return Err(invalid(
                "vi.phi",
                format!("dimension {d} differs from K dimension {m}"),
            ));
        }
    }
    check_pairing(&k, &phi).map_err(|e| vi_error("vi", e))?;

    let mut builder = FpdviProblem::builder(file.alpha, file.horizon, a, k, g_map, phi);
    if let Some(spec) = &file.b {
        builder = builder.b(matrix_map(spec, n, m)?);
    }
    if let Some(spec) = &file.f {
        builder = builder.f(vector_map("f", spec, n, n)?);
    }
    if let Some(spec) = &file.g {
        builder = builder.g(vector_map("g", spec, n, m)?);
    }
    if let Some(spec) = &file.h {
        builder = builder.h(nonlocal(spec, n, file.horizon)?);
    }
    if let Some(r) = file.probe_radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("probe_radius", "must be positive"));
        }
        builder = builder.probe_radius(r);
    }
    let problem = builder.build().map_err(|e| match e {
        EvolutionError::Vi(v) => vi_error("problem", v),
        other => invalid("problem", other.to_string()),
    })?;
    Ok(LoadedProblem {
        seed: file.solver.seed,
        hypotheses: file.hypotheses.clone(),
        file,
        problem,
        grid,
        options,
    })
}
