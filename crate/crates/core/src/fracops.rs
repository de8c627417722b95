//! Riemann-Liouville integration and Caputo differentiation on time grids.
//!
//! Both operators use product integration: the sampled function is
//! reconstructed piecewise linearly and the weakly singular kernel is
//! integrated exactly against the reconstruction, so the results are exact up
//! to roundoff for piecewise-linear data.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{FpdviProblem, Trajectory};
use crate::mittag_leffler::gamma::gamma;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GridKind {
    Uniform,
    Graded { gamma: f64 },
}

/// Strictly increasing nodes `0 = xi_0 < ... < xi_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    kind: GridKind,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, intervals: usize) -> Result<Self, FracError> {
        Self::build(horizon, intervals, GridKind::Uniform)
    }

    /// `xi_i = T (i/N)^gamma`, clustering nodes near zero for `gamma > 1`.
    pub fn graded(horizon: f64, intervals: usize, gamma: f64) -> Result<Self, FracError> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(FracError::InvalidGrid(format!(
                "grading exponent must be >= 1, got {gamma}"
            )));
        }
        Self::build(horizon, intervals, GridKind::Graded { gamma })
    }

    pub fn with_kind(horizon: f64, intervals: usize, kind: GridKind) -> Result<Self, FracError> {
        match kind {
            GridKind::Uniform => Self::uniform(horizon, intervals),
            GridKind::Graded { gamma } => Self::graded(horizon, intervals, gamma),
        }
    }

    fn build(horizon: f64, intervals: usize, kind: GridKind) -> Result<Self, FracError> {
        if intervals < 2 {
            return Err(FracError::InvalidGrid(format!(
                "need at least 2 intervals, got {intervals}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FracError::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let n = intervals as f64;
        let nodes: Vec<f64> = (0..=intervals)
            .map(|i| match kind {
                GridKind::Uniform => horizon * i as f64 / n,
                GridKind::Graded { gamma } => horizon * (i as f64 / n).powf(gamma),
            })
            .collect();
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FracError::InvalidGrid(
                "nodes are not strictly increasing".into(),
            ));
        }
        Ok(Self { nodes, kind })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, GridKind::Uniform)
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// First node index included in residual maxima, `ceil(0.05 N)` but at
    /// least 1.
    pub fn residual_start(&self) -> usize {
        ((0.05 * self.intervals() as f64).ceil() as usize).max(1)
    }

    /// Piecewise-linear interpolation of node samples at time `t`.
    pub fn interpolate(&self, values: &[DVector<f64>], t: f64) -> DVector<f64> {
        let nodes = &self.nodes;
        if t <= nodes[0] {
            return values[0].clone();
        }
        let last = nodes.len() - 1;
        if t >= nodes[last] {
            return values[last].clone();
        }
        let j = nodes.partition_point(|&x| x <= t) - 1;
        let s = (t - nodes[j]) / (nodes[j + 1] - nodes[j]);
        &values[j] * (1.0 - s) + &values[j + 1] * s
    }
}

/// Vector samples, one per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub grid: TimeGrid,
    pub values: Vec<DVector<f64>>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, values: Vec<DVector<f64>>) -> Result<Self, FracError> {
        if values.len() != grid.len() {
            return Err(FracError::DimensionMismatch(format!(
                "{} samples for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(FracError::DimensionMismatch(
                "samples differ in dimension".into(),
            ));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(FracError::DimensionMismatch(
                "samples must be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples a scalar function on the grid.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: TimeGrid, f: F) -> Self {
        let values = grid
            .nodes()
            .iter()
            .map(|&t| DVector::from_element(1, f(t)))
            .collect();
        Self { grid, values }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Component `k` as a plain vector over the nodes.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }
}

/// Left-sided Riemann-Liouville integral `I^alpha` at every node.
pub fn rl_integral(alpha: f64, path: &SampledPath) -> Result<SampledPath, FracError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::InvalidOrder(format!(
            "integration order must lie in (0, 1], got {alpha}"
        )));
    }
    let nodes = path.grid.nodes();
    let dim = path.dim();
    let scale = 1.0 / gamma(alpha);
    let mut out = Vec::with_capacity(nodes.len());
    out.push(DVector::zeros(dim));
    for i in 1..nodes.len() {
        let xi = nodes[i];
        let mut acc = DVector::zeros(dim);
        for j in 0..i {
            let a = xi - nodes[j];
            let b = xi - nodes[j + 1];
            let h = nodes[j + 1] - nodes[j];
            let m0 = (a.powf(alpha) - b.powf(alpha)) / alpha;
            let m1 = (a.powf(alpha + 1.0) - b.powf(alpha + 1.0)) / (alpha + 1.0);
            let w_left = (m1 - b * m0) / h;
            let w_right = (a * m0 - m1) / h;
            acc.axpy(w_left, &path.values[j], 1.0);
            acc.axpy(w_right, &path.values[j + 1], 1.0);
        }
        out.push(acc * scale);
    }
    Ok(SampledPath {
        grid: path.grid.clone(),
        values: out,
    })
}

/// L1 discretization of the Caputo derivative of order `alpha` in (0, 1).
///
/// Values are produced at nodes `1..=N`; slot 0 holds a zero placeholder.
pub fn caputo_derivative(alpha: f64, path: &SampledPath) -> Result<SampledPath, FracError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FracError::InvalidOrder(format!(
            "Caputo order must lie in (0, 1), got {alpha}; use plain differencing for alpha = 1"
        )));
    }
    let nodes = path.grid.nodes();
    let dim = path.dim();
    let p = 1.0 - alpha;
    let scale = 1.0 / gamma(2.0 - alpha);
    let mut out = Vec::with_capacity(nodes.len());
    out.push(DVector::zeros(dim));
    for i in 1..nodes.len() {
        let xi = nodes[i];
        let mut acc = DVector::zeros(dim);
        for j in 0..i {
            let h = nodes[j + 1] - nodes[j];
            let w = ((xi - nodes[j]).powf(p) - (xi - nodes[j + 1]).powf(p)) / h;
            let diff = &path.values[j + 1] - &path.values[j];
            acc.axpy(w, &diff, 1.0);
        }
        out.push(acc * scale);
    }
    Ok(SampledPath {
        grid: path.grid.clone(),
        values: out,
    })
}

/// Backward difference quotients; the `alpha = 1` counterpart of
/// [`caputo_derivative`].
pub fn backward_difference(path: &SampledPath) -> SampledPath {
    let nodes = path.grid.nodes();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(DVector::zeros(path.dim()));
    for i in 1..nodes.len() {
        out.push((&path.values[i] - &path.values[i - 1]) / (nodes[i] - nodes[i - 1]));
    }
    SampledPath {
        grid: path.grid.clone(),
        values: out,
    }
}

/// Maximum pointwise defect of the differential form of the state equation,
/// over nodes `i >= ceil(0.05 N)`.
pub fn fpdvi_residual(problem: &FpdviProblem, traj: &Trajectory) -> Result<f64, FracError> {
    let grid = &traj.grid;
    if (grid.horizon() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return Err(FracError::GridMismatch(format!(
            "trajectory horizon {} differs from problem horizon {}",
            grid.horizon(),
            problem.horizon()
        )));
    }
    if traj.theta.len() != grid.len() || traj.u.len() != grid.len() {
        return Err(FracError::GridMismatch(
            "trajectory length differs from grid".into(),
        ));
    }
    if traj.theta[0].len() != problem.state_dim() || traj.u[0].len() != problem.control_dim() {
        return Err(FracError::DimensionMismatch(
            "trajectory dimensions differ from problem".into(),
        ));
    }
    let states = SampledPath {
        grid: grid.clone(),
        values: traj.theta.clone(),
    };
    let alpha = problem.alpha();
    let deriv = if alpha < 1.0 {
        caputo_derivative(alpha, &states)?
    } else {
        backward_difference(&states)
    };
    let a = problem.generator().entries();
    let mut worst: f64 = 0.0;
    for i in grid.residual_start()..grid.len() {
        let xi = grid.nodes()[i];
        let theta = &traj.theta[i];
        let rhs = a * theta + problem.eval_b(xi, theta) * &traj.u[i] + problem.eval_f(xi, theta);
        worst = worst.max((&deriv.values[i] - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mittag_leffler::gamma::gamma;

    fn max_err(path: &SampledPath, f: impl Fn(f64) -> f64, from: usize) -> f64 {
        path.grid.nodes()[from..]
            .iter()
            .zip(&path.values[from..])
            .map(|(t, v)| (v[0] - f(*t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_construction() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let gg = TimeGrid::graded(1.0, 4, 2.0).unwrap();
        assert_eq!(gg.nodes()[1], 1.0 / 16.0);
        assert_eq!(gg.nodes()[4], 1.0);
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        assert!(TimeGrid::graded(1.0, 8, 0.5).is_err());
        assert!(TimeGrid::uniform(-1.0, 8).is_err());
        assert_eq!(TimeGrid::uniform(1.0, 100).unwrap().residual_start(), 5);
    }

    #[test]
    fn sampled_path_validation() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        let v = vec![DVector::zeros(1); 2];
        assert!(SampledPath::new(g.clone(), v).is_err());
        let bad = vec![DVector::zeros(1), DVector::zeros(2), DVector::zeros(1)];
        assert!(SampledPath::new(g.clone(), bad).is_err());
        let nan = vec![DVector::from_element(1, f64::NAN); 3];
        assert!(SampledPath::new(g, nan).is_err());
    }

    #[test]
    fn integral_of_constant() {
        for alpha in [0.2, 0.5, 0.9, 1.0] {
            let g = TimeGrid::graded(2.0, 50, 1.5).unwrap();
            let p = SampledPath::from_fn(g, |_| 1.0);
            let out = rl_integral(alpha, &p).unwrap();
            let err = max_err(&out, |t| t.powf(alpha) / gamma(alpha + 1.0), 0);
            assert!(err < 1e-13, "alpha={alpha}: {err}");
        }
    }

    #[test]
    fn integral_of_identity() {
        let g = TimeGrid::uniform(1.0, 64).unwrap();
        let p = SampledPath::from_fn(g, |t| t);
        let classical = rl_integral(1.0, &p).unwrap();
        assert!(max_err(&classical, |t| t * t / 2.0, 0) < 1e-14);
        let half = rl_integral(0.5, &p).unwrap();
        assert!(max_err(&half, |t| t.powf(1.5) / gamma(2.5), 0) < 1e-13);
    }

    #[test]
    fn caputo_of_constant_and_linear() {
        let g = TimeGrid::uniform(1.0, 40).unwrap();
        let c = SampledPath::from_fn(g.clone(), |_| 3.0);
        let d = caputo_derivative(0.4, &c).unwrap();
        assert!(d.values.iter().all(|v| v[0] == 0.0));
        let lin = SampledPath::from_fn(g, |t| t);
        let d = caputo_derivative(0.5, &lin).unwrap();
        assert!(max_err(&d, |t| t.powf(0.5) / gamma(1.5), 1) < 1e-13);
    }

    #[test]
    fn caputo_of_square() {
        let g = TimeGrid::uniform(1.0, 1024).unwrap();
        let sq = SampledPath::from_fn(g, |t| t * t);
        let d = caputo_derivative(0.3, &sq).unwrap();
        let err = max_err(&d, |t| 2.0 * t.powf(1.7) / gamma(2.7), 1);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn caputo_rejects_integer_order() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let p = SampledPath::from_fn(g, |t| t);
        assert!(matches!(
            caputo_derivative(1.0, &p),
            Err(FracError::InvalidOrder(_))
        ));
        assert!(matches!(
            rl_integral(1.2, &p),
            Err(FracError::InvalidOrder(_))
        ));
    }

    #[test]
    fn interpolation_is_piecewise_linear() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let p = SampledPath::from_fn(g.clone(), |t| 2.0 * t + 1.0);
        assert!((g.interpolate(&p.values, 0.3)[0] - 1.6).abs() < 1e-15);
        assert_eq!(g.interpolate(&p.values, 5.0)[0], 3.0);
    }
}
