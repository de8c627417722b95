//! Sampling probes for monotonicity and coercivity, and the equicontinuity
//! modulus of path ensembles.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::HypothesisError;
use crate::fracops::SampledPath;
use crate::vi_solver::{ConvexFunction, ConvexSet, MonotoneMap};

/// Radius limiting samples along unbounded directions of `K`.
const SAMPLE_RADIUS: f64 = 10.0;
const MONOTONE_SLACK: f64 = 1e-10;
const COERCIVE_DIRECTIONS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityProbe {
    pub pass: bool,
    /// Smallest sampled `<G(v) - G(u), v - u>`.
    pub worst: f64,
    pub pair_count: usize,
    pub seed: u64,
}

/// Samples `pair_count` pairs in `K` and reports the smallest monotonicity
/// product. A probe, not a proof.
pub fn probe_p1_monotone(
    g: &MonotoneMap,
    k: &ConvexSet,
    pair_count: usize,
    seed: u64,
) -> Result<MonotonicityProbe, HypothesisError> {
    if pair_count < 100 {
        return Err(HypothesisError::InvalidArgument(format!(
            "need at least 100 pairs, got {pair_count}"
        )));
    }
    if g.dim() != k.dim() {
        return Err(HypothesisError::DimensionMismatch(format!(
            "G has dimension {}, K has dimension {}",
            g.dim(),
            k.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pair_count {
        let u = k.sample(&mut rng, SAMPLE_RADIUS);
        let v = k.sample(&mut rng, SAMPLE_RADIUS);
        let prod = (g.eval(&v) - g.eval(&u)).dot(&(v - u));
        worst = worst.min(prod);
    }
    Ok(MonotonicityProbe {
        pass: worst >= -MONOTONE_SLACK,
        worst,
        pair_count,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityProbe {
    pub pass: bool,
    /// `true` when `K` is bounded and the condition holds trivially.
    pub vacuous: bool,
    pub radii: Vec<f64>,
    /// `q(r)` for every radius.
    pub trend: Vec<f64>,
    pub seed: u64,
}

/// `q(r) = min (<G(u), u - v*> + phi(u) - phi(v*)) / |u|` over sampled
/// `u` in `K` with `|u| = r`; passes when `q` increases strictly over the
/// last three radii and ends positive.
///
/// Points of norm `r` are obtained by projecting `r d` onto `K` for random
/// unit `d` and keeping projections whose norm is within 10% of `r`.
pub fn probe_p3_coercive(
    g: &MonotoneMap,
    phi: &ConvexFunction,
    k: &ConvexSet,
    anchor: &DVector<f64>,
    radii: &[f64],
    seed: u64,
) -> Result<CoercivityProbe, HypothesisError> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(HypothesisError::InvalidArgument(
            "radii must be positive, increasing, with at least 3 entries".into(),
        ));
    }
    if anchor.len() != k.dim() || !k.contains(anchor, 1e-9) {
        return Err(HypothesisError::AnchorNotInK);
    }
    if k.is_bounded() {
        return Ok(CoercivityProbe {
            pass: true,
            vacuous: true,
            radii: radii.to_vec(),
            trend: Vec::new(),
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = k.dim();
    let phi_anchor = phi.value(anchor);
    let mut trend = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut q = f64::INFINITY;
        for _ in 0..COERCIVE_DIRECTIONS {
            let d = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let dn = d.norm();
            if dn == 0.0 {
                continue;
            }
            let u = k.project(&(d * (r / dn)))?;
            let un = u.norm();
            if (un - r).abs() > 0.1 * r {
                continue;
            }
            let val = (g.eval(&u).dot(&(&u - anchor)) + phi.value(&u) - phi_anchor) / un;
            q = q.min(val);
        }
        trend.push(if q.is_finite() { q } else { f64::NAN });
    }
    let tail = &trend[trend.len() - 3..];
    let pass =
        tail.iter().all(|v| v.is_finite()) && tail.windows(2).all(|w| w[1] > w[0]) && tail[2] > 0.0;
    Ok(CoercivityProbe {
        pass,
        vacuous: false,
        radii: radii.to_vec(),
        trend,
        seed,
    })
}

/// `chi(delta) = 1/2 sup_paths max_{|xi_i - xi_j| <= delta} |x(xi_i) - x(xi_j)|`
/// for every `delta`.
pub fn chi_diagnostic(
    ensemble: &[SampledPath],
    deltas: &[f64],
) -> Result<Vec<f64>, HypothesisError> {
    let first = ensemble
        .first()
        .ok_or_else(|| HypothesisError::InvalidArgument("empty ensemble".into()))?;
    let nodes = first.grid.nodes();
    if ensemble.iter().any(|p| p.grid.nodes() != nodes) {
        return Err(HypothesisError::GridMismatch(
            "ensemble paths use different grids".into(),
        ));
    }
    let h_min = first.grid.min_spacing();
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta >= h_min * (1.0 - 1e-9)) {
            return Err(HypothesisError::DeltaBelowResolution {
                delta,
                spacing: h_min,
            });
        }
        let reach = delta * (1.0 + 1e-9);
        let mut sup: f64 = 0.0;
        for path in ensemble {
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    if nodes[j] - nodes[i] > reach {
                        break;
                    }
                    sup = sup.max((&path.values[j] - &path.values[i]).norm());
                }
            }
        }
        out.push(0.5 * sup);
    }
    Ok(out)
}
