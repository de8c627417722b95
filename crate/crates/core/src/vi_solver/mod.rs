//! Mixed variational inequalities
//!
//! ```text
//! find u in K:  <w + G(u), v - u> + phi(v) - phi(u) >= 0  for all v in K
//! ```
//!
//! solved by a proximal-projection extragradient method, plus the canonical
//! minimal-norm selection used to turn the solution set into a control law.

mod function;
mod map;
mod set;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use function::{ConvexFunction, PiecewiseLinear};
pub use map::{MapFn, MapKind, MonotoneMap};
pub use set::{uniform_in_ball, ConvexSet, UNBOUNDED_SURROGATE};

/// Tikhonov shift of the selection rule.
pub const SELECTION_EPSILON: f64 = 1e-8;
/// Default tolerance on the natural residual for control selection.
pub const SELECTION_TOL: f64 = 1e-10;
/// Default iteration cap for control selection.
pub const SELECTION_MAX_ITER: usize = 100_000;

const BACKTRACK: f64 = 0.5;
const ARMIJO: f64 = 0.9;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid convex set: {0}")]
    InvalidSet(String),
    #[error("infeasible set: {0}")]
    InfeasibleSet(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("map is not monotone: {0}")]
    NotMonotone(String),
    #[error("invalid convex function: {0}")]
    InvalidFunction(String),
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),
    #[error("unsupported set/function pairing: {0}")]
    UnsupportedCombination(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no solution within {iterations} iterations (natural residual {residual:e})")]
    MaxIterExceeded {
        u: DVector<f64>,
        residual: f64,
        iterations: usize,
    },
    #[error("step size fell below 1e-12; the map is not monotone and Lipschitz near the iterates")]
    NonMonotoneDetected { u: DVector<f64> },
}

/// Rejects pairings for which `P_K o prox_phi` is not the proximal map of
/// `phi + indicator(K)`.
pub fn check_pairing(k: &ConvexSet, phi: &ConvexFunction) -> Result<(), ViError> {
    if let Some(d) = phi.dim() {
        if d != k.dim() {
            return Err(ViError::DimensionMismatch(format!(
                "phi has dimension {d}, K has dimension {}",
                k.dim()
            )));
        }
    }
    if phi.is_zero() || k.is_unbounded_surrogate() {
        return Ok(());
    }
    match k {
        ConvexSet::Box { .. } if phi.is_separable() => Ok(()),
        ConvexSet::Box { .. } => Err(ViError::UnsupportedCombination(
            "a box pairs only with separable phi (diagonal quadratic)".into(),
        )),
        _ => Err(ViError::UnsupportedCombination(
            "balls and halfspace intersections pair only with phi = 0".into(),
        )),
    }
}

/// One instance `(K, w, G, phi)`.
#[derive(Debug, Clone)]
pub struct VIProblem {
    pub k: ConvexSet,
    pub w: DVector<f64>,
    pub g: MonotoneMap,
    pub phi: ConvexFunction,
}

impl VIProblem {
    pub fn new(
        k: ConvexSet,
        w: DVector<f64>,
        g: MonotoneMap,
        phi: ConvexFunction,
    ) -> Result<Self, ViError> {
        let m = k.dim();
        if w.len() != m || g.dim() != m {
            return Err(ViError::DimensionMismatch(format!(
                "K has dimension {m}, w {}, G {}",
                w.len(),
                g.dim()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(ViError::InvalidArgument("w must be finite".into()));
        }
        check_pairing(&k, &phi)?;
        Ok(Self { k, w, g, phi })
    }

    fn view(&self) -> Instance<'_> {
        Instance {
            k: &self.k,
            w: &self.w,
            g: &self.g,
            phi: &self.phi,
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViSolution {
    pub u: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Borrowed instance with an optional Tikhonov shift `G + shift I`.
#[derive(Clone, Copy)]
struct Instance<'a> {
    k: &'a ConvexSet,
    w: &'a DVector<f64>,
    g: &'a MonotoneMap,
    phi: &'a ConvexFunction,
    shift: f64,
}

impl Instance<'_> {
    fn field(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut f = self.g.eval(u) + self.w;
        if self.shift != 0.0 {
            f.axpy(self.shift, u, 1.0);
        }
        f
    }

    fn map_only(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut f = self.g.eval(u);
        if self.shift != 0.0 {
            f.axpy(self.shift, u, 1.0);
        }
        f
    }

    /// `P_K(prox_{lambda phi}(u - lambda field))`.
    fn step(
        &self,
        lambda: f64,
        u: &DVector<f64>,
        field: &DVector<f64>,
    ) -> Result<DVector<f64>, ViError> {
        let x = u - field * lambda;
        self.k.project(&self.phi.prox(lambda, &x)?)
    }

    fn residual(&self, u: &DVector<f64>) -> Result<f64, ViError> {
        let f = self.field(u);
        Ok((u - self.step(1.0, u, &f)?).norm())
    }

    fn start(&self) -> Result<DVector<f64>, ViError> {
        let zero = DVector::zeros(self.k.dim());
        self.k.project(&self.phi.prox(1.0, &zero)?)
    }

    fn solve(
        &self,
        start: DVector<f64>,
        tol: f64,
        max_iter: usize,
        mut trace: Option<&mut Vec<DVector<f64>>>,
    ) -> Result<ViSolution, ViError> {
        let mut u = self.k.project(&start)?;
        let mut lambda = 1.0 / (self.g.lipschitz() + self.shift).max(1.0);
        let mut best = (u.clone(), f64::INFINITY);
        for it in 0..=max_iter {
            if let Some(t) = trace.as_deref_mut() {
                t.push(u.clone());
            }
            let r = self.residual(&u)?;
            if r < best.1 {
                best = (u.clone(), r);
            }
            if r <= tol {
                return Ok(ViSolution {
                    u,
                    residual: r,
                    iterations: it,
                });
            }
            if it == max_iter {
                break;
            }
            let gu = self.map_only(&u);
            let fu = &gu + self.w;
            let (bar, gbar) = loop {
                let bar = self.step(lambda, &u, &fu)?;
                let gbar = self.map_only(&bar);
                let lhs = lambda * (&gbar - &gu).norm();
                if lhs <= ARMIJO * (&bar - &u).norm() {
                    break (bar, gbar);
                }
                lambda *= BACKTRACK;
                if lambda < MIN_STEP {
                    return Err(ViError::NonMonotoneDetected { u });
                }
            };
            let _ = bar;
            u = self.step(lambda, &u, &(gbar + self.w))?;
        }
        Err(ViError::MaxIterExceeded {
            u: best.0,
            residual: best.1,
            iterations: max_iter,
        })
    }
}

/// `|u - P_K(prox_phi(u - (w + G(u))))|`, the fixed-point defect at unit step.
pub fn natural_residual(p: &VIProblem, u: &DVector<f64>) -> Result<f64, ViError> {
    if u.len() != p.k.dim() {
        return Err(ViError::DimensionMismatch(format!(
            "point of dimension {} for a {}-dimensional problem",
            u.len(),
            p.k.dim()
        )));
    }
    p.view().residual(u)
}

/// Extragradient iteration from `P_K(prox_phi(0))`.
///
/// The step starts at `1 / max(L_G, 1)` and is halved until
/// `lambda |G(u_half) - G(u)| <= 0.9 |u_half - u|`.
pub fn solve_vi(p: &VIProblem, tol: f64, max_iter: usize) -> Result<ViSolution, ViError> {
    check_tol(tol, max_iter)?;
    let inst = p.view();
    inst.solve(inst.start()?, tol, max_iter, None)
}

/// [`solve_vi`] from a caller-supplied starting point.
pub fn solve_vi_from(
    p: &VIProblem,
    start: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<ViSolution, ViError> {
    check_tol(tol, max_iter)?;
    if start.len() != p.k.dim() {
        return Err(ViError::DimensionMismatch(
            "start point dimension differs from K".into(),
        ));
    }
    p.view().solve(start.clone(), tol, max_iter, None)
}

/// [`solve_vi`] that also returns every iterate, starting point first.
pub fn solve_vi_traced(
    p: &VIProblem,
    tol: f64,
    max_iter: usize,
) -> Result<(ViSolution, Vec<DVector<f64>>), ViError> {
    check_tol(tol, max_iter)?;
    let inst = p.view();
    let mut trace = Vec::new();
    let sol = inst.solve(inst.start()?, tol, max_iter, Some(&mut trace))?;
    Ok((sol, trace))
}

fn check_tol(tol: f64, max_iter: usize) -> Result<(), ViError> {
    if !(tol >= 1e-14 && tol.is_finite()) || max_iter == 0 {
        return Err(ViError::InvalidArgument(format!(
            "need tol >= 1e-14 and max_iter > 0, got {tol} and {max_iter}"
        )));
    }
    Ok(())
}

/// Minimal-norm element of the solution set with shift `g_value`.
///
/// Solves the problem for `G + 1e-8 I` (unique solution) and polishes the
/// result on the unshifted problem.
pub fn select_control(
    k: &ConvexSet,
    g: &MonotoneMap,
    phi: &ConvexFunction,
    g_value: &DVector<f64>,
) -> Result<DVector<f64>, ViError> {
    select_control_with(k, g, phi, g_value, SELECTION_TOL, SELECTION_MAX_ITER).map(|s| s.u)
}

/// [`select_control`] with explicit tolerance and iteration cap; reports the
/// natural residual of the returned point on the unshifted problem.
pub fn select_control_with(
    k: &ConvexSet,
    g: &MonotoneMap,
    phi: &ConvexFunction,
    g_value: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<ViSolution, ViError> {
    check_tol(tol, max_iter)?;
    if g_value.iter().any(|v| !v.is_finite()) {
        return Err(ViError::InvalidArgument("g value must be finite".into()));
    }
    if g_value.len() != k.dim() || g.dim() != k.dim() {
        return Err(ViError::DimensionMismatch(format!(
            "K has dimension {}, g value {}, G {}",
            k.dim(),
            g_value.len(),
            g.dim()
        )));
    }
    let shifted = Instance {
        k,
        w: g_value,
        g,
        phi,
        shift: SELECTION_EPSILON,
    };
    let regularized = match shifted.solve(shifted.start()?, tol, max_iter, None) {
        Ok(s) => s.u,
        Err(ViError::MaxIterExceeded { u, .. }) => u,
        Err(e) => return Err(e),
    };
    let plain = Instance {
        shift: 0.0,
        ..shifted
    };
    plain.solve(regularized, tol, max_iter, None)
}

/// Empirical bound on the selected solutions over shifts `|w| <= n`: the
/// maximum of `|select_control(w)|` over `sample_count` seeded draws.
pub fn sol_bound(
    k: &ConvexSet,
    g: &MonotoneMap,
    phi: &ConvexFunction,
    n: f64,
    sample_count: usize,
    seed: u64,
) -> Result<f64, ViError> {
    if !(n > 0.0 && n.is_finite()) || sample_count < 10 {
        return Err(ViError::InvalidArgument(format!(
            "need n > 0 and at least 10 samples, got {n} and {sample_count}"
        )));
    }
    check_pairing(k, phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..sample_count {
        let w = uniform_in_ball(&mut rng, k.dim(), n);
        worst = worst.max(select_control(k, g, phi, &w)?.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dvector, DMatrix};

    fn interval(lo: f64, hi: f64) -> ConvexSet {
        ConvexSet::cube(1, lo, hi).unwrap()
    }

    #[test]
    fn pairing_rules() {
        let l1 = ConvexFunction::weighted_l1(dvector![1.0, 1.0]).unwrap();
        assert!(check_pairing(&ConvexSet::cube(2, 0.0, 1.0).unwrap(), &l1).is_ok());
        let ball = ConvexSet::ball(DVector::zeros(2), 1.0).unwrap();
        assert!(matches!(
            check_pairing(&ball, &l1),
            Err(ViError::UnsupportedCombination(_))
        ));
        assert!(check_pairing(&ball, &ConvexFunction::Zero).is_ok());
        let dense = ConvexFunction::quadratic(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            DVector::zeros(2),
        )
        .unwrap();
        assert!(check_pairing(&ConvexSet::cube(2, 0.0, 1.0).unwrap(), &dense).is_err());
        assert!(check_pairing(&ConvexSet::cube(2, -1e9, 1e9).unwrap(), &dense).is_ok());
    }

    #[test]
    fn scalar_interior_solution() {
        let g = MonotoneMap::affine(DMatrix::identity(1, 1), dvector![-0.5]).unwrap();
        let p = VIProblem::new(interval(0.0, 1.0), dvector![0.0], g, ConvexFunction::Zero).unwrap();
        let s = solve_vi(&p, 1e-12, 1000).unwrap();
        assert!((s.u[0] - 0.5).abs() < 1e-12);
        assert_eq!(natural_residual(&p, &dvector![0.0]).unwrap(), 0.5);
    }

    #[test]
    fn selection_picks_minimal_norm() {
        let zero = MonotoneMap::zero(1);
        let u = select_control(
            &interval(-1.0, 1.0),
            &zero,
            &ConvexFunction::Zero,
            &dvector![0.0],
        )
        .unwrap();
        assert_eq!(u[0], 0.0);
        let a = select_control(
            &interval(-1.0, 1.0),
            &zero,
            &ConvexFunction::Zero,
            &dvector![0.0],
        )
        .unwrap();
        assert_eq!(a, u);
    }

    #[test]
    fn infeasible_arguments() {
        let g = MonotoneMap::zero(1);
        assert!(sol_bound(&interval(0.0, 1.0), &g, &ConvexFunction::Zero, 1.0, 5, 0).is_err());
        let p = VIProblem::new(interval(0.0, 1.0), dvector![0.0], g, ConvexFunction::Zero).unwrap();
        assert!(solve_vi(&p, 1e-16, 10).is_err());
    }
}
