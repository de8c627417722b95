//! Closed convex feasible sets and Euclidean projection onto them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::ViError;

/// Bounds at or beyond this magnitude make a box an unbounded surrogate.
pub const UNBOUNDED_SURROGATE: f64 = 1e8;

const DYKSTRA_TOL: f64 = 1e-12;
const DYKSTRA_STALL: f64 = 1e-9;
const DYKSTRA_MAX_CYCLES: usize = 200_000;

/// Nonempty closed convex subset of `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    Ball {
        center: DVector<f64>,
        radius: f64,
    },
    /// `{u : a_i . u <= b_i for all i}` with a certified feasible point.
    Halfspaces {
        normals: Vec<DVector<f64>>,
        offsets: Vec<f64>,
        interior: DVector<f64>,
    },
}

impl ConvexSet {
    /// Componentwise bounds; infinite bounds are allowed.
    pub fn boxed(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, ViError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(ViError::DimensionMismatch(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(upper.iter()).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(ViError::InvalidSet(format!(
                    "box component {i}: lower {l} must not exceed upper {u}"
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// `[lo, hi]^m`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, ViError> {
        Self::boxed(
            DVector::from_element(dim, lo),
            DVector::from_element(dim, hi),
        )
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self, ViError> {
        if center.is_empty() {
            return Err(ViError::DimensionMismatch("ball center is empty".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(ViError::InvalidSet(format!(
                "ball needs a finite center and positive radius, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Intersection of halfspaces `a_i . u <= b_i`; `interior` must satisfy
    /// every constraint and certifies nonemptiness.
    pub fn halfspaces(
        normals: Vec<DVector<f64>>,
        offsets: Vec<f64>,
        interior: DVector<f64>,
    ) -> Result<Self, ViError> {
        let m = interior.len();
        if m == 0 || normals.is_empty() || normals.len() != offsets.len() {
            return Err(ViError::DimensionMismatch(format!(
                "{} normals, {} offsets, point of dimension {m}",
                normals.len(),
                offsets.len()
            )));
        }
        for (i, (a, b)) in normals.iter().zip(&offsets).enumerate() {
            if a.len() != m {
                return Err(ViError::DimensionMismatch(format!(
                    "normal {i} has dimension {}, expected {m}",
                    a.len()
                )));
            }
            if a.norm() == 0.0 || !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                return Err(ViError::InvalidSet(format!(
                    "halfspace {i} needs a finite nonzero normal and finite offset"
                )));
            }
            let slack = a.dot(&interior) - b;
            if slack > 1e-12 * (1.0 + b.abs()) {
                return Err(ViError::InfeasibleSet(format!(
                    "certificate point violates halfspace {i} by {slack:e}"
                )));
            }
        }
        Ok(Self::Halfspaces {
            normals,
            offsets,
            interior,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Halfspaces { interior, .. } => interior.len(),
        }
    }

    /// Box whose bounds all reach the unbounded-surrogate magnitude.
    pub fn is_unbounded_surrogate(&self) -> bool {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .all(|(l, u)| *l <= -UNBOUNDED_SURROGATE && *u >= UNBOUNDED_SURROGATE),
            _ => false,
        }
    }

    /// Whether the set is bounded. Surrogate boxes count as unbounded.
    pub fn is_bounded(&self) -> bool {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .chain(upper.iter())
                .all(|v| v.abs() < UNBOUNDED_SURROGATE),
            Self::Ball { .. } => true,
            Self::Halfspaces { normals, .. } => recession_cone_is_trivial(normals),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self.project(x) {
            Ok(p) => (p - x).norm() <= tol,
            Err(_) => false,
        }
    }

    /// Euclidean projection.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>, ViError> {
        if x.len() != self.dim() {
            return Err(ViError::DimensionMismatch(format!(
                "point of dimension {} projected onto set of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        match self {
            Self::Box { lower, upper } => Ok(DVector::from_iterator(
                x.len(),
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u)),
            )),
            Self::Ball { center, radius } => {
                let d = x - center;
                let r = d.norm();
                if r <= *radius {
                    Ok(x.clone())
                } else {
                    Ok(center + d * (*radius / r))
                }
            }
            Self::Halfspaces {
                normals, offsets, ..
            } => dykstra(normals, offsets, x),
        }
    }

    /// A point of the set drawn at random; unbounded directions are limited
    /// to `radius` around the origin (or the certificate point).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> DVector<f64> {
        match self {
            Self::Box { lower, upper } => DVector::from_iterator(
                lower.len(),
                lower.iter().zip(upper.iter()).map(|(l, u)| {
                    let lo = l.max(-radius).min(*u);
                    let hi = u.min(radius).max(lo);
                    lo + (hi - lo) * rng.random::<f64>()
                }),
            ),
            Self::Ball { center, radius: r } => center + uniform_in_ball(rng, center.len(), *r),
            Self::Halfspaces {
                normals,
                offsets,
                interior,
            } => {
                let step = uniform_in_ball(rng, interior.len(), radius);
                dykstra(normals, offsets, &(interior + step)).unwrap_or_else(|_| interior.clone())
            }
        }
    }
}

/// Uniform draw from the centered ball of radius `r` in `R^m`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, m: usize, r: f64) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 0.0 {
            let scale = r * rng.random::<f64>().powf(1.0 / m as f64) / n;
            return g * scale;
        }
    }
}

fn dykstra(
    normals: &[DVector<f64>],
    offsets: &[f64],
    x: &DVector<f64>,
) -> Result<DVector<f64>, ViError> {
    let scale = 1.0 + x.norm();
    let mut y = x.clone();
    let mut incr: Vec<DVector<f64>> = vec![DVector::zeros(x.len()); normals.len()];
    let violation = |y: &DVector<f64>| {
        normals
            .iter()
            .zip(offsets)
            .map(|(a, b)| ((a.dot(y) - b) / a.norm()).max(0.0))
            .fold(0.0, f64::max)
    };
    for _ in 0..DYKSTRA_MAX_CYCLES {
        let start = y.clone();
        for ((a, b), p) in normals.iter().zip(offsets).zip(incr.iter_mut()) {
            let z = &y + &*p;
            let excess = a.dot(&z) - b;
            let proj = if excess > 0.0 {
                &z - a * (excess / a.norm_squared())
            } else {
                z.clone()
            };
            *p = z - &proj;
            y = proj;
        }
        if (&y - start).norm() <= DYKSTRA_TOL * scale && violation(&y) <= DYKSTRA_TOL * scale {
            return Ok(polish(normals, offsets, x, y));
        }
    }
    let y = polish(normals, offsets, x, y);
    let v = violation(&y);
    if v <= DYKSTRA_STALL * scale {
        Ok(y)
    } else {
        Err(ViError::InfeasibleSet(format!(
            "Dykstra projection stalled with constraint violation {v:e}"
        )))
    }
}

/// Exact projection onto the affine hull of the constraints active at the
/// Dykstra iterate `y`, kept only if it is feasible with nonnegative
/// multipliers (then it is the projection onto the polyhedron).
fn polish(
    normals: &[DVector<f64>],
    offsets: &[f64],
    x: &DVector<f64>,
    y: DVector<f64>,
) -> DVector<f64> {
    let scale = 1.0 + x.norm();
    let active: Vec<usize> = (0..normals.len())
        .filter(|&i| normals[i].dot(&y) - offsets[i] >= -1e-9 * scale * normals[i].norm())
        .collect();
    if active.is_empty() {
        return y;
    }
    let m = x.len();
    let a = DMatrix::from_fn(active.len(), m, |r, c| normals[active[r]][c]);
    let b = DVector::from_iterator(active.len(), active.iter().map(|&i| offsets[i]));
    let gram = &a * a.transpose();
    let eps = 1e-13 * (1.0 + gram.abs().max());
    let Ok(pinv) = gram.pseudo_inverse(eps) else {
        return y;
    };
    let mult = pinv * (&a * x - b);
    if mult.iter().any(|l| *l < -1e-10 * scale) {
        return y;
    }
    let exact = x - a.transpose() * mult;
    let feasible = normals
        .iter()
        .zip(offsets)
        .all(|(n, o)| n.dot(&exact) - o <= 1e-13 * scale * n.norm());
    if feasible && (&exact - &y).norm() <= 1e-6 * scale {
        exact
    } else {
        y
    }
}

/// `{d : a_i . d <= 0}` is `{0}` iff random directions all project to zero.
fn recession_cone_is_trivial(normals: &[DVector<f64>]) -> bool {
    use rand::SeedableRng;
    let m = normals[0].len();
    let zeros = vec![0.0; normals.len()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    (0..64).all(|_| {
        let d = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        match dykstra(normals, &zeros, &d) {
            Ok(p) => p.norm() <= 1e-8 * d.norm(),
            Err(_) => false,
        }
    })
}
