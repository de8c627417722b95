//! Problem instances and discrete trajectories.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::EvolutionError;
use crate::fracops::TimeGrid;
use crate::mittag_leffler::GeneratorMatrix;
use crate::vi_solver::{check_pairing, ConvexFunction, ConvexSet, MonotoneMap};

/// `(xi, theta) -> n x m` matrix.
pub type StateMatrixFn = Arc<dyn Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// `(xi, theta) -> vector`.
pub type StateVectorFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Nonlocal initial map evaluated on a whole sampled path `(nodes, values)`.
pub type NonlocalFn = Arc<dyn Fn(&[f64], &[DVector<f64>]) -> DVector<f64> + Send + Sync>;

const DEFAULT_PROBE_RADIUS: f64 = 1.0;

/// State equation `D^alpha theta = A theta + B(xi, theta) u + f(xi, theta)`
/// with `theta(0) = h(theta)` and `u(xi)` in the solution set of the VI with
/// shift `g(xi, theta(xi))`.
#[derive(Clone)]
pub struct FpdviProblem {
    alpha: f64,
    horizon: f64,
    a: GeneratorMatrix,
    b: StateMatrixFn,
    f: StateVectorFn,
    g: StateVectorFn,
    h: NonlocalFn,
    k: ConvexSet,
    g_map: MonotoneMap,
    phi: ConvexFunction,
    probe_radius: f64,
}

impl fmt::Debug for FpdviProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FpdviProblem")
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("a", self.a.entries())
            .field("k", &self.k)
            .field("g_map", &self.g_map)
            .field("phi", &self.phi)
            .finish_non_exhaustive()
    }
}

/// Builder for [`FpdviProblem`]. `B`, `f`, `g` and `h` default to zero.
pub struct ProblemBuilder {
    alpha: f64,
    horizon: f64,
    a: GeneratorMatrix,
    k: ConvexSet,
    g_map: MonotoneMap,
    phi: ConvexFunction,
    b: Option<StateMatrixFn>,
    f: Option<StateVectorFn>,
    g: Option<StateVectorFn>,
    h: Option<NonlocalFn>,
    probe_radius: f64,
}

impl ProblemBuilder {
    pub fn b(mut self, b: StateMatrixFn) -> Self {
        self.b = Some(b);
        self
    }

    pub fn f(mut self, f: StateVectorFn) -> Self {
        self.f = Some(f);
        self
    }

    pub fn g(mut self, g: StateVectorFn) -> Self {
        self.g = Some(g);
        self
    }

    pub fn h(mut self, h: NonlocalFn) -> Self {
        self.h = Some(h);
        self
    }

    /// Constant-in-path initial value `h = theta0`.
    pub fn initial_value(self, theta0: DVector<f64>) -> Self {
        self.h(Arc::new(move |_, _| theta0.clone()))
    }

    /// Radius of the state ball on which the maps are probed for finiteness.
    pub fn probe_radius(mut self, r: f64) -> Self {
        self.probe_radius = r;
        self
    }

    pub fn build(self) -> Result<FpdviProblem, EvolutionError> {
        let n = self.a.dim();
        let m = self.k.dim();
        let b = self
            .b
            .unwrap_or_else(|| Arc::new(move |_, _| DMatrix::zeros(n, m)));
        let f = self
            .f
            .unwrap_or_else(|| Arc::new(move |_, _| DVector::zeros(n)));
        let g = self
            .g
            .unwrap_or_else(|| Arc::new(move |_, _| DVector::zeros(m)));
        let h = self
            .h
            .unwrap_or_else(|| Arc::new(move |_, _| DVector::zeros(n)));
        let p = FpdviProblem {
            alpha: self.alpha,
            horizon: self.horizon,
            a: self.a,
            b,
            f,
            g,
            h,
            k: self.k,
            g_map: self.g_map,
            phi: self.phi,
            probe_radius: self.probe_radius,
        };
        p.validate()?;
        Ok(p)
    }
}

impl FpdviProblem {
    pub fn builder(
        alpha: f64,
        horizon: f64,
        a: GeneratorMatrix,
        k: ConvexSet,
        g_map: MonotoneMap,
        phi: ConvexFunction,
    ) -> ProblemBuilder {
        ProblemBuilder {
            alpha,
            horizon,
            a,
            k,
            g_map,
            phi,
            b: None,
            f: None,
            g: None,
            h: None,
            probe_radius: DEFAULT_PROBE_RADIUS,
        }
    }

    fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(EvolutionError::InvalidProblem(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(EvolutionError::InvalidProblem(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.probe_radius > 0.0 && self.probe_radius.is_finite()) {
            return Err(EvolutionError::InvalidProblem(
                "probe radius must be positive".into(),
            ));
        }
        let n = self.state_dim();
        let m = self.control_dim();
        if self.g_map.dim() != m {
            return Err(EvolutionError::DimensionMismatch(format!(
                "G has dimension {}, K has dimension {m}",
                self.g_map.dim()
            )));
        }
        check_pairing(&self.k, &self.phi)?;

        // deterministic probe states: origin, +-r along each axis, and r times
        // the normalized all-ones vector
        let r = self.probe_radius;
        let mut states = vec![DVector::zeros(n)];
        for i in 0..n {
            for s in [r, -r] {
                let mut e = DVector::zeros(n);
                e[i] = s;
                states.push(e);
            }
        }
        states.push(DVector::from_element(n, r / (n as f64).sqrt()));
        for &xi in &[0.0, 0.5 * self.horizon, self.horizon] {
            for th in &states {
                let bm = (self.b)(xi, th);
                if bm.nrows() != n || bm.ncols() != m {
                    return Err(EvolutionError::DimensionMismatch(format!(
                        "B returns {}x{}, expected {n}x{m}",
                        bm.nrows(),
                        bm.ncols()
                    )));
                }
                let fv = (self.f)(xi, th);
                if fv.len() != n {
                    return Err(EvolutionError::DimensionMismatch(format!(
                        "f returns dimension {}, expected {n}",
                        fv.len()
                    )));
                }
                let gv = (self.g)(xi, th);
                if gv.len() != m {
                    return Err(EvolutionError::DimensionMismatch(format!(
                        "g returns dimension {}, expected {m}",
                        gv.len()
                    )));
                }
                if bm
                    .iter()
                    .chain(fv.iter())
                    .chain(gv.iter())
                    .any(|v| !v.is_finite())
                {
                    return Err(EvolutionError::InvalidProblem(format!(
                        "B, f or g is not finite at xi = {xi}, theta = {th}"
                    )));
                }
            }
        }
        let nodes = [0.0, self.horizon];
        let zero = [DVector::zeros(n), DVector::zeros(n)];
        let h0 = (self.h)(&nodes, &zero);
        if h0.len() != n || h0.iter().any(|v| !v.is_finite()) {
            return Err(EvolutionError::DimensionMismatch(format!(
                "h returns a {}-vector on the zero path, expected a finite {n}-vector",
                h0.len()
            )));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.a
    }

    pub fn state_dim(&self) -> usize {
        self.a.dim()
    }

    pub fn control_dim(&self) -> usize {
        self.k.dim()
    }

    pub fn constraint_set(&self) -> &ConvexSet {
        &self.k
    }

    pub fn operator(&self) -> &MonotoneMap {
        &self.g_map
    }

    pub fn phi(&self) -> &ConvexFunction {
        &self.phi
    }

    pub fn probe_radius(&self) -> f64 {
        self.probe_radius
    }

    pub fn eval_b(&self, xi: f64, theta: &DVector<f64>) -> DMatrix<f64> {
        (self.b)(xi, theta)
    }

    pub fn eval_f(&self, xi: f64, theta: &DVector<f64>) -> DVector<f64> {
        (self.f)(xi, theta)
    }

    pub fn eval_g(&self, xi: f64, theta: &DVector<f64>) -> DVector<f64> {
        (self.g)(xi, theta)
    }

    pub fn eval_h(&self, nodes: &[f64], values: &[DVector<f64>]) -> DVector<f64> {
        (self.h)(nodes, values)
    }
}

/// State and control samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub theta: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
}

impl Trajectory {
    /// `max_i |theta_i - other_i|`.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
