//! The solution map, the outer Picard iteration and refinement studies.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::{EvolutionError, FpdviProblem, OperatorFamilyTable, Trajectory};
use crate::fracops::{fpdvi_residual, GridKind, TimeGrid};
use crate::vi_solver::select_control_with;

/// Smallest damping reached by automatic halving.
pub const MIN_DAMPING: f64 = 1.0 / 16.0;
/// Consecutive increases of the change that trigger a halving.
const STALL_RUN: usize = 3;
/// Errors below this are treated as evaluation noise by order fits.
const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Stop once `max_i |theta^{k+1}_i - theta^k_i| <= tol`.
    pub tol: f64,
    pub max_outer: usize,
    /// Initial relaxation weight in `(0, 1]`.
    pub damping: f64,
    /// Natural-residual tolerance of the per-node control selection.
    pub vi_tol: f64,
    pub vi_max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_outer: 200,
            damping: 1.0,
            vi_tol: 1e-10,
            vi_max_iter: 100_000,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.tol >= 1e-12 && self.tol.is_finite()) {
            return Err(EvolutionError::InvalidOptions(format!(
                "tol must be at least 1e-12, got {}",
                self.tol
            )));
        }
        if self.max_outer == 0 || self.vi_max_iter == 0 {
            return Err(EvolutionError::InvalidOptions(
                "iteration caps must be positive".into(),
            ));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(EvolutionError::InvalidOptions(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.vi_tol >= 1e-14 && self.vi_tol.is_finite()) {
            return Err(EvolutionError::InvalidOptions(format!(
                "vi_tol must be at least 1e-14, got {}",
                self.vi_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm change of every outer iteration.
    pub history: Vec<f64>,
    pub final_change: f64,
    pub final_damping: f64,
    /// `max_i |Gamma(theta)_i - theta_i|` at the returned trajectory.
    pub fixed_point_defect: f64,
    /// `|theta_0 - h(theta)|` at the returned trajectory.
    pub nonlocal_defect: f64,
    pub fpdvi_residual: f64,
    /// Natural residual of the node VI at every node.
    pub vi_residuals: Vec<f64>,
    pub max_vi_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub trajectory: Trajectory,
    pub report: SolveReport,
}

/// One application of the solution map. Controls are carried over.
///
/// The integrand `B u + f` is frozen at subinterval midpoints (state and
/// control averaged from the end nodes) and the kernel is integrated exactly.
pub fn apply_gamma(
    problem: &FpdviProblem,
    tables: &OperatorFamilyTable,
    traj: &Trajectory,
) -> Result<Trajectory, EvolutionError> {
    let grid = tables.grid();
    if traj.grid.nodes() != grid.nodes() {
        return Err(EvolutionError::GridMismatch(
            "trajectory grid differs from the table grid".into(),
        ));
    }
    let n = problem.state_dim();
    let m = problem.control_dim();
    if traj.theta.len() != grid.len()
        || traj.u.len() != grid.len()
        || traj.theta.iter().any(|v| v.len() != n)
        || traj.u.iter().any(|v| v.len() != m)
    {
        return Err(EvolutionError::DimensionMismatch(format!(
            "trajectory must hold {} states of dimension {n} and controls of dimension {m}",
            grid.len()
        )));
    }
    let nodes = grid.nodes();
    let h0 = problem.eval_h(nodes, &traj.theta);
    if h0.len() != n {
        return Err(EvolutionError::DimensionMismatch(format!(
            "h returned dimension {}, expected {n}",
            h0.len()
        )));
    }

    let forcing: Vec<f64> = (0..grid.intervals())
        .into_par_iter()
        .flat_map_iter(|j| {
            let s = 0.5 * (nodes[j] + nodes[j + 1]);
            let th = (&traj.theta[j] + &traj.theta[j + 1]) * 0.5;
            let u = (&traj.u[j] + &traj.u[j + 1]) * 0.5;
            let v = problem.eval_b(s, &th) * u + problem.eval_f(s, &th);
            v.data.as_vec().clone()
        })
        .collect();
    if forcing.len() != grid.intervals() * n {
        return Err(EvolutionError::DimensionMismatch(
            "B u + f has the wrong dimension".into(),
        ));
    }

    let nn = n * n;
    let kernel = tables.uniform_kernel();
    let theta: Vec<DVector<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = tables.e1(i) * &h0;
            let out = acc.as_mut_slice();
            for j in 0..i {
                let f = &forcing[j * n..(j + 1) * n];
                match kernel {
                    Some(kern) => {
                        let lag = i - j - 1;
                        let k = &kern[lag * nn..(lag + 1) * nn];
                        matvec_add(k, f, 1.0, out);
                    }
                    None => {
                        let k = tables.e2(i, j);
                        matvec_add(k.as_slice(), f, tables.weight(i, j), out);
                    }
                }
            }
            acc
        })
        .collect();
    Ok(Trajectory {
        grid: grid.clone(),
        theta,
        u: traj.u.clone(),
    })
}

/// `out += w * K f` for column-major `K`.
#[inline]
fn matvec_add(k: &[f64], f: &[f64], w: f64, out: &mut [f64]) {
    let n = f.len();
    for (c, &fc) in f.iter().enumerate() {
        let wf = w * fc;
        let col = &k[c * n..(c + 1) * n];
        for (o, kv) in out.iter_mut().zip(col) {
            *o += kv * wf;
        }
    }
}

fn select_controls(
    problem: &FpdviProblem,
    grid: &TimeGrid,
    theta: &[DVector<f64>],
    opts: &SolveOptions,
) -> Result<(Vec<DVector<f64>>, Vec<f64>), EvolutionError> {
    let sols = grid
        .nodes()
        .par_iter()
        .zip(theta.par_iter())
        .enumerate()
        .map(|(node, (&xi, th))| {
            let w = problem.eval_g(xi, th);
            select_control_with(
                problem.constraint_set(),
                problem.operator(),
                problem.phi(),
                &w,
                opts.vi_tol,
                opts.vi_max_iter,
            )
            .map_err(|source| EvolutionError::Selection { node, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sols.into_iter().map(|s| (s.u, s.residual)).unzip())
}

fn sup_change(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn all_finite(v: &[DVector<f64>]) -> bool {
    v.iter().all(|x| x.iter().all(|c| c.is_finite()))
}

/// Runs `f` on a pool capped by `FPDVI_THREADS` (unset or 0: default pool).
pub(crate) fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("FPDVI_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if cap == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(cap).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Picard iteration `theta <- (1 - d) theta + d Gamma(theta, u(theta))`.
///
/// Starts from the constant path `h(0)` corrected once by the solution map.
/// The damping `d` is halved (down to 1/16) whenever the change grows three
/// times in a row. On `MaxOuterExceeded` the error carries the iterate with
/// the smallest change.
pub fn solve_fpdvi(
    problem: &FpdviProblem,
    grid: &TimeGrid,
    opts: &SolveOptions,
) -> Result<SolveOutcome, EvolutionError> {
    opts.validate()?;
    if (grid.horizon() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return Err(EvolutionError::GridMismatch(format!(
            "grid ends at {}, problem horizon is {}",
            grid.horizon(),
            problem.horizon()
        )));
    }
    with_thread_cap(|| picard(problem, grid, opts))
}

fn picard(
    problem: &FpdviProblem,
    grid: &TimeGrid,
    opts: &SolveOptions,
) -> Result<SolveOutcome, EvolutionError> {
    let tables = OperatorFamilyTable::build(problem.alpha(), problem.generator(), grid)?;
    let n = problem.state_dim();
    let nodes = grid.nodes();
    let zero_path = vec![DVector::zeros(n); grid.len()];
    let start = problem.eval_h(nodes, &zero_path);
    let mut theta = vec![start; grid.len()];
    let (u, _) = select_controls(problem, grid, &theta, opts)?;
    theta = apply_gamma(
        problem,
        &tables,
        &Trajectory {
            grid: grid.clone(),
            theta,
            u,
        },
    )?
    .theta;

    let mut damping = opts.damping;
    let mut history = Vec::new();
    let mut rising = 0usize;
    let mut best: Option<(f64, Vec<DVector<f64>>)> = None;
    let mut converged = false;
    for it in 1..=opts.max_outer {
        let (u, _) = select_controls(problem, grid, &theta, opts)?;
        let traj = Trajectory {
            grid: grid.clone(),
            theta,
            u,
        };
        let mapped = apply_gamma(problem, &tables, &traj)?;
        let next: Vec<DVector<f64>> = if damping == 1.0 {
            mapped.theta
        } else {
            traj.theta
                .iter()
                .zip(&mapped.theta)
                .map(|(old, new)| old * (1.0 - damping) + new * damping)
                .collect()
        };
        if !all_finite(&next) {
            return Err(EvolutionError::NonFinite { iterations: it });
        }
        let change = sup_change(&next, &traj.theta);
        if history.last().is_some_and(|&prev| change > prev) {
            rising += 1;
        } else {
            rising = 0;
        }
        history.push(change);
        theta = next;
        if change <= opts.tol {
            converged = true;
            break;
        }
        if best.as_ref().is_none_or(|(c, _)| change < *c) {
            best = Some((change, theta.clone()));
        }
        if rising >= STALL_RUN && damping > MIN_DAMPING {
            damping = (damping * 0.5).max(MIN_DAMPING);
            rising = 0;
        }
    }

    let (final_change, theta) = match (converged, best) {
        (false, Some((c, th))) => (c, th),
        _ => (history.last().copied().unwrap_or(0.0), theta),
    };
    let (u, vi_residuals) = select_controls(problem, grid, &theta, opts)?;
    let trajectory = Trajectory {
        grid: grid.clone(),
        theta,
        u,
    };
    let mapped = apply_gamma(problem, &tables, &trajectory)?;
    let fixed_point_defect = sup_change(&mapped.theta, &trajectory.theta);
    let nonlocal_defect = (&trajectory.theta[0] - problem.eval_h(nodes, &trajectory.theta)).norm();
    let fpdvi_residual = fpdvi_residual(problem, &trajectory)?;
    let max_vi_residual = vi_residuals.iter().copied().fold(0.0, f64::max);
    let report = SolveReport {
        converged,
        iterations: history.len(),
        history,
        final_change,
        final_damping: damping,
        fixed_point_defect,
        nonlocal_defect,
        fpdvi_residual,
        vi_residuals,
        max_vi_residual,
    };
    let outcome = SolveOutcome { trajectory, report };
    if converged {
        Ok(outcome)
    } else {
        Err(EvolutionError::MaxOuterExceeded(Box::new(outcome)))
    }
}

/// Reference solution for refinement studies.
#[derive(Clone)]
pub enum Reference {
    /// Exact state as a function of time.
    Analytic(Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>),
    /// Solve on a fine grid with this many intervals and interpolate.
    FineGrid { intervals: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    /// `(N, sup-norm error)` per level.
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of `-log(error)` against `log(N)`; `None` when all
    /// errors sit below the evaluation noise floor.
    pub order: Option<f64>,
}

/// Solves on `N, 2N, 4N, ...` (`levels` grids) and fits the convergence
/// order against `reference`.
pub fn refine_and_estimate_order(
    problem: &FpdviProblem,
    base_n: usize,
    levels: usize,
    kind: GridKind,
    reference: &Reference,
    opts: &SolveOptions,
) -> Result<RefinementStudy, EvolutionError> {
    if levels < 3 {
        return Err(EvolutionError::InvalidOptions(format!(
            "need at least 3 refinement levels, got {levels}"
        )));
    }
    let fine = match reference {
        Reference::FineGrid { intervals } => {
            let g = TimeGrid::with_kind(problem.horizon(), *intervals, kind)?;
            Some(solve_fpdvi(problem, &g, opts)?.trajectory)
        }
        Reference::Analytic(_) => None,
    };
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let n = base_n << level;
        let grid = TimeGrid::with_kind(problem.horizon(), n, kind)?;
        let traj = solve_fpdvi(problem, &grid, opts)?.trajectory;
        let err = grid
            .nodes()
            .iter()
            .zip(&traj.theta)
            .map(|(&t, th)| {
                let r = match (reference, &fine) {
                    (Reference::Analytic(f), _) => f(t),
                    (_, Some(fine)) => fine.grid.interpolate(&fine.theta, t),
                    (Reference::FineGrid { .. }, None) => unreachable!(),
                };
                (th - r).norm()
            })
            .fold(0.0, f64::max);
        rows.push((n, err));
    }
    Ok(RefinementStudy {
        order: fit_order(&rows),
        rows,
    })
}

/// Least-squares slope of `-log(error)` against `log(N)`, ignoring errors at
/// the evaluation noise floor.
pub fn fit_order(rows: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, e)| *e > NOISE_FLOOR)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}
