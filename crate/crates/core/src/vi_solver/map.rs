//! Monotone operators `G` of the variational inequality.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::set::uniform_in_ball;
use super::ViError;

/// Evaluation callback of a black-box operator.
pub type MapFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

const MONOTONE_SLACK: f64 = 1e-10;
const PROBE_PAIRS: usize = 256;
const PROBE_RADIUS: f64 = 10.0;
const PROBE_SEED: u64 = 0x6d6f_6e6f;

#[derive(Clone)]
pub enum MapKind {
    /// `G(u) = M u + q`.
    Affine {
        m: DMatrix<f64>,
        q: DVector<f64>,
    },
    Callable {
        dim: usize,
        f: MapFn,
    },
}

/// Operator with a Lipschitz estimate `L_G`.
#[derive(Clone)]
pub struct MonotoneMap {
    kind: MapKind,
    lipschitz: f64,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Affine { m, q } => f
                .debug_struct("MonotoneMap::Affine")
                .field("m", m)
                .field("q", q)
                .field("lipschitz", &self.lipschitz)
                .finish(),
            MapKind::Callable { dim, .. } => f
                .debug_struct("MonotoneMap::Callable")
                .field("dim", dim)
                .field("lipschitz", &self.lipschitz)
                .finish(),
        }
    }
}

impl MonotoneMap {
    /// Affine map; rejected unless the symmetric part of `m` is positive
    /// semidefinite.
    pub fn affine(m: DMatrix<f64>, q: DVector<f64>) -> Result<Self, ViError> {
        let map = Self::affine_unverified(m, q)?;
        if let MapKind::Affine { m, .. } = &map.kind {
            let sym = (m + m.transpose()) * 0.5;
            let min_eig = sym.symmetric_eigenvalues().min();
            if min_eig < -MONOTONE_SLACK * (1.0 + map.lipschitz) {
                return Err(ViError::NotMonotone(format!(
                    "symmetric part has eigenvalue {min_eig:e}"
                )));
            }
        }
        Ok(map)
    }

    /// Affine map without the monotonicity check, for probing.
    pub fn affine_unverified(m: DMatrix<f64>, q: DVector<f64>) -> Result<Self, ViError> {
        if m.nrows() == 0 || m.nrows() != m.ncols() || m.nrows() != q.len() {
            return Err(ViError::DimensionMismatch(format!(
                "affine map needs square M matching q, got {}x{} and {}",
                m.nrows(),
                m.ncols(),
                q.len()
            )));
        }
        if m.iter().chain(q.iter()).any(|v| !v.is_finite()) {
            return Err(ViError::InvalidMap(
                "affine map entries must be finite".into(),
            ));
        }
        let lipschitz = m.singular_values().max();
        Ok(Self {
            kind: MapKind::Affine { m, q },
            lipschitz,
        })
    }

    /// `G = c I`.
    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self, ViError> {
        Self::affine(DMatrix::identity(dim, dim) * c, DVector::zeros(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            kind: MapKind::Affine {
                m: DMatrix::zeros(dim, dim),
                q: DVector::zeros(dim),
            },
            lipschitz: 0.0,
        }
    }

    /// Black-box map. Monotonicity and the Lipschitz estimate (when not
    /// supplied) are probed on seeded random pairs in a ball of radius 10.
    pub fn callable(dim: usize, f: MapFn, lipschitz: Option<f64>) -> Result<Self, ViError> {
        if dim == 0 {
            return Err(ViError::DimensionMismatch(
                "callable map of dimension 0".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut worst = f64::INFINITY;
        let mut quotient: f64 = 0.0;
        for _ in 0..PROBE_PAIRS {
            let u = uniform_in_ball(&mut rng, dim, PROBE_RADIUS);
            let v = uniform_in_ball(&mut rng, dim, PROBE_RADIUS);
            let gu = f(&u);
            let gv = f(&v);
            if gu.len() != dim || gv.len() != dim {
                return Err(ViError::DimensionMismatch(format!(
                    "callable map returned dimension {}, expected {dim}",
                    gu.len()
                )));
            }
            if gu.iter().chain(gv.iter()).any(|x| !x.is_finite()) {
                return Err(ViError::InvalidMap(
                    "callable map returned non-finite values".into(),
                ));
            }
            let d = &v - &u;
            let dg = gv - gu;
            worst = worst.min(dg.dot(&d));
            let dn = d.norm();
            if dn > 0.0 {
                quotient = quotient.max(dg.norm() / dn);
            }
        }
        if worst < -MONOTONE_SLACK {
            return Err(ViError::NotMonotone(format!(
                "sampled pair gives <G(v)-G(u), v-u> = {worst:e}"
            )));
        }
        let lipschitz = match lipschitz {
            Some(l) if l >= 0.0 && l.is_finite() => l,
            Some(l) => {
                return Err(ViError::InvalidMap(format!(
                    "Lipschitz constant {l} is invalid"
                )))
            }
            None => quotient,
        };
        Ok(Self {
            kind: MapKind::Callable { dim, f },
            lipschitz,
        })
    }

    /// Black-box map without the monotonicity probe, for probing.
    pub fn callable_unverified(dim: usize, f: MapFn, lipschitz: f64) -> Self {
        Self {
            kind: MapKind::Callable { dim, f },
            lipschitz,
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MapKind::Affine { q, .. } => q.len(),
            MapKind::Callable { dim, .. } => *dim,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            MapKind::Affine { m, q } => m * u + q,
            MapKind::Callable { f, .. } => f(u),
        }
    }
}
