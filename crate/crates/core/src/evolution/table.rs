//! Precomputed Mittag-Leffler operator families and convolution weights.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::EvolutionError;
use crate::fracops::TimeGrid;
use crate::mittag_leffler::{ml_matrix, GeneratorMatrix, MLParams};

/// `E_alpha(xi_i^alpha A)` at every node and `E_{alpha,alpha}(d^alpha A)` at
/// every midpoint difference `d = xi_i - (xi_j + xi_{j+1})/2`, `j < i`.
#[derive(Debug, Clone)]
pub struct OperatorFamilyTable {
    grid: TimeGrid,
    alpha: f64,
    e1: Vec<DMatrix<f64>>,
    e2: MidpointFamily,
}

#[derive(Debug, Clone)]
enum MidpointFamily {
    /// Uniform step `h`: entry `k` is the value at `(k + 1/2) h`;
    /// `weighted` holds the same matrices times their convolution weights,
    /// flattened column-major.
    Uniform {
        mats: Vec<DMatrix<f64>>,
        weighted: Vec<f64>,
    },
    /// Keyed by the difference rounded to `1e-14`.
    Cached(HashMap<i64, DMatrix<f64>>),
}

fn a_dim(mats: &[DMatrix<f64>]) -> usize {
    mats.first().map_or(0, |m| m.len())
}

fn cache_key(d: f64) -> i64 {
    (d * 1e14).round() as i64
}

impl OperatorFamilyTable {
    pub fn build(alpha: f64, a: &GeneratorMatrix, grid: &TimeGrid) -> Result<Self, EvolutionError> {
        let p1 = MLParams::one(alpha)?;
        let p2 = MLParams::new(alpha, alpha)?;
        let nodes = grid.nodes();
        let e1 = nodes
            .par_iter()
            .map(|&t| ml_matrix(p1, t.powf(alpha), a))
            .collect::<Result<Vec<_>, _>>()?;
        let e2 = if grid.is_uniform() {
            let h = grid.horizon() / grid.intervals() as f64;
            let mats = (0..grid.intervals())
                .into_par_iter()
                .map(|k| ml_matrix(p2, ((k as f64 + 0.5) * h).powf(alpha), a))
                .collect::<Result<Vec<_>, _>>()?;
            let a = alpha;
            let mut weighted = Vec::with_capacity(mats.len() * a_dim(&mats));
            for (k, m) in mats.iter().enumerate() {
                let w = (((k + 1) as f64 * h).powf(a) - (k as f64 * h).powf(a)) / a;
                weighted.extend(m.iter().map(|v| w * v));
            }
            MidpointFamily::Uniform { mats, weighted }
        } else {
            let mut keys: Vec<(i64, f64)> = Vec::new();
            for i in 1..nodes.len() {
                for j in 0..i {
                    let d = nodes[i] - 0.5 * (nodes[j] + nodes[j + 1]);
                    keys.push((cache_key(d), d));
                }
            }
            keys.sort_by_key(|k| k.0);
            keys.dedup_by_key(|k| k.0);
            let mats = keys
                .par_iter()
                .map(|&(k, d)| ml_matrix(p2, d.powf(alpha), a).map(|m| (k, m)))
                .collect::<Result<Vec<_>, _>>()?;
            MidpointFamily::Cached(mats.into_iter().collect())
        };
        Ok(Self {
            grid: grid.clone(),
            alpha,
            e1,
            e2,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `E_alpha(xi_i^alpha A)`.
    pub fn e1(&self, i: usize) -> &DMatrix<f64> {
        &self.e1[i]
    }

    /// `E_{alpha,alpha}((xi_i - s_j)^alpha A)` at the midpoint `s_j` of
    /// `[xi_j, xi_{j+1}]`, for `j < i`.
    pub fn e2(&self, i: usize, j: usize) -> &DMatrix<f64> {
        assert!(j < i, "midpoint index {j} must precede node {i}");
        match &self.e2 {
            MidpointFamily::Uniform { mats, .. } => &mats[i - j - 1],
            MidpointFamily::Cached(map) => {
                let nodes = self.grid.nodes();
                let d = nodes[i] - 0.5 * (nodes[j] + nodes[j + 1]);
                &map[&cache_key(d)]
            }
        }
    }

    /// Number of distinct midpoint-difference matrices held.
    pub fn e2_len(&self) -> usize {
        match &self.e2 {
            MidpointFamily::Uniform { mats, .. } => mats.len(),
            MidpointFamily::Cached(map) => map.len(),
        }
    }

    /// Flattened `weight * E2` for lag `k = i - j - 1` on uniform grids.
    pub(super) fn uniform_kernel(&self) -> Option<&[f64]> {
        match &self.e2 {
            MidpointFamily::Uniform { weighted, .. } => Some(weighted),
            MidpointFamily::Cached(_) => None,
        }
    }

    /// `int_{xi_j}^{xi_{j+1}} (xi_i - s)^(alpha - 1) ds`, for `j < i`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let nodes = self.grid.nodes();
        let a = self.alpha;
        ((nodes[i] - nodes[j]).powf(a) - (nodes[i] - nodes[j + 1]).powf(a)) / a
    }
}
