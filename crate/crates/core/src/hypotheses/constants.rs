//! The kernel constant `Theta_A`, the existence inequality and the weighted
//! norm that makes the solution map a contraction.

use nalgebra::DMatrix;
use serde::Serialize;

use super::growth::GrowthData;
use super::HypothesisError;
use crate::fracops::SampledPath;
use crate::mittag_leffler::{ml_matrix, ml_real, GeneratorMatrix, MLParams};
use crate::quadrature::GaussLegendre;

/// Caveat attached to every use of the regularized `Theta_A`.
pub const THETA_A_CAVEAT: &str =
    "Theta_A is the supremum of d^(alpha-1) |E_{alpha,alpha}(d^alpha A)| \
over d in [delta, T]; for alpha < 1 the unregularized supremum is infinite because the kernel is \
singular at d = 0, so verdicts depending on it hold only for the stated delta";

/// Search floor and ceiling for the weight `L`.
pub const L_FLOOR: f64 = 1e-6;
pub const L_CEILING: f64 = 1e12;
/// Target bound on the weighted contraction estimate.
const CONTRACTION_TARGET: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaAEstimate {
    /// `sup_{d in [delta, T]} d^(alpha-1) |E_{alpha,alpha}(d^alpha A)|_2`.
    pub regularized: f64,
    /// `int_0^T d^(alpha-1) |E_{alpha,alpha}(d^alpha A)|_2 dd`.
    pub integrated: f64,
    /// Regularization gap; `None` for `alpha = 1`, where no singularity exists.
    pub delta: Option<f64>,
    pub caveat: Option<String>,
}

fn spectral_norm(m: DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

/// Regularized and integrated versions of `Theta_A` from `resolution + 1`
/// equispaced samples of `d`.
pub fn estimate_theta_a(
    alpha: f64,
    a: &GeneratorMatrix,
    horizon: f64,
    delta: f64,
    resolution: usize,
) -> Result<ThetaAEstimate, HypothesisError> {
    let params = MLParams::new(alpha, alpha)?;
    if !(horizon > 0.0 && horizon.is_finite()) || resolution < 2 {
        return Err(HypothesisError::InvalidArgument(
            "need a positive horizon and at least 2 samples".into(),
        ));
    }
    let classical = alpha == 1.0;
    if !classical && !(delta > 0.0 && delta < horizon) {
        return Err(HypothesisError::InvalidArgument(format!(
            "delta must lie in (0, T), got {delta}"
        )));
    }
    let lo = if classical { 0.0 } else { delta };
    let mut sup: f64 = 0.0;
    for i in 0..=resolution {
        let d = lo + (horizon - lo) * i as f64 / resolution as f64;
        let kernel = d.powf(alpha - 1.0) * spectral_norm(ml_matrix(params, d.powf(alpha), a)?);
        sup = sup.max(kernel);
    }
    // d = s^(1/alpha) turns the integral into (1/alpha) int_0^{T^alpha} |E(sA)| ds
    let rule = GaussLegendre::new(16);
    let panels = (resolution / 16).max(1);
    let top = horizon.powf(alpha);
    let mut integrated = 0.0;
    for p in 0..panels {
        let a0 = top * p as f64 / panels as f64;
        let b0 = top * (p + 1) as f64 / panels as f64;
        for (s, w) in rule.mapped(a0, b0) {
            integrated += w * spectral_norm(ml_matrix(params, s, a)?);
        }
    }
    integrated /= alpha;
    Ok(ThetaAEstimate {
        regularized: sup,
        integrated,
        delta: (!classical).then_some(delta),
        caveat: (!classical).then(|| THETA_A_CAVEAT.to_string()),
    })
}

pub const DEFAULT_K_SEQUENCE: [f64; 5] = [1e2, 1e3, 1e4, 1e6, 1e8];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition43 {
    pub pass: bool,
    pub k_sequence: Vec<f64>,
    /// Left-hand side at every `k`.
    pub lhs_trend: Vec<f64>,
    /// Estimated liminf: the smallest value over the three largest `k`.
    pub liminf_estimate: f64,
    /// `1 / (Theta_A T^(1/2))`.
    pub rhs: f64,
    pub margin: f64,
    pub caveat: Option<String>,
}

/// Evaluates
///
/// ```text
/// L(k) = Theta_g |rho_B|_2 Upsilon_B(k)/k + |rho_f|_2 + Upsilon_h(k)/(k T^(1/2))
/// ```
///
/// along `k_sequence` and compares its liminf estimate with
/// `1/(Theta_A T^(1/2))`.
pub fn check_condition_43(
    data: &GrowthData,
    horizon: f64,
    k_sequence: &[f64],
) -> Result<Condition43, HypothesisError> {
    if k_sequence.len() < 5
        || k_sequence.windows(2).any(|w| w[0] >= w[1])
        || k_sequence[0] <= 0.0
        || k_sequence[k_sequence.len() - 1] < 1e4
    {
        return Err(HypothesisError::InvalidArgument(
            "k_sequence must be positive, increasing, with at least 5 entries reaching 1e4".into(),
        ));
    }
    if !(horizon > 0.0) {
        return Err(HypothesisError::InvalidArgument(
            "horizon must be positive".into(),
        ));
    }
    let root_t = horizon.sqrt();
    let b_term = data.theta_g * data.rho_b.l2;
    let lhs_trend: Vec<f64> = k_sequence
        .iter()
        .map(|&k| {
            b_term * data.upsilon_b.eval(k) / k
                + data.rho_f.l2
                + data.upsilon_h.eval(k) / (k * root_t)
        })
        .collect();
    let liminf_estimate = lhs_trend[lhs_trend.len() - 3..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let rhs = 1.0 / (data.theta_a * root_t);
    Ok(Condition43 {
        pass: liminf_estimate < rhs,
        k_sequence: k_sequence.to_vec(),
        lhs_trend,
        liminf_estimate,
        rhs,
        margin: rhs - liminf_estimate,
        caveat: data.theta_a_caveat.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSelection {
    pub l: f64,
    /// Achieved `sup_xi Theta_A int_0^xi E_alpha(-L (xi - s)^alpha) c(s) ds`.
    pub certificate: f64,
}

/// `sup_i Theta_A int_0^{xi_i} E_alpha(-L (xi_i - s)^alpha) c(s) ds` with `c`
/// the piecewise-linear interpolant of `c_values` on `nodes`, integrated
/// exactly through
///
/// ```text
/// int_0^x E_alpha(-L r^alpha) dr   = x   E_{alpha,2}(-L x^alpha)
/// int_0^x r E_alpha(-L r^alpha) dr = x^2 [E_{alpha,2} - E_{alpha,3}](-L x^alpha)
/// ```
pub fn weighted_contraction(
    alpha: f64,
    l: f64,
    theta_a: f64,
    nodes: &[f64],
    c_values: &[f64],
) -> Result<f64, HypothesisError> {
    let p2 = MLParams::new(alpha, 2.0)?;
    let p3 = MLParams::new(alpha, 3.0)?;
    let moments = |x: f64| -> Result<(f64, f64), HypothesisError> {
        if x == 0.0 {
            return Ok((0.0, 0.0));
        }
        let z = -l * x.powf(alpha);
        let e2 = ml_real(p2, z)?;
        let e3 = ml_real(p3, z)?;
        Ok((x * e2, x * x * (e2 - e3)))
    };
    let mut sup: f64 = 0.0;
    for i in 1..nodes.len() {
        let xi = nodes[i];
        let mut total = 0.0;
        let (mut m0_hi, mut m1_hi) = moments(xi - nodes[0])?;
        for j in 0..i {
            // r = xi - s runs over [xi - s_{j+1}, xi - s_j]
            let (m0_lo, m1_lo) = moments(xi - nodes[j + 1])?;
            let i0 = m0_hi - m0_lo;
            let i1 = m1_hi - m1_lo;
            let h = nodes[j + 1] - nodes[j];
            // c(xi - r) is linear in r: c_{j+1} at r = xi - s_{j+1}, c_j at r = xi - s_j
            let r_hi = xi - nodes[j];
            let slope = (c_values[j] - c_values[j + 1]) / h;
            let at_zero = c_values[j] - slope * r_hi;
            total += at_zero * i0 + slope * i1;
            m0_hi = m0_lo;
            m1_hi = m1_lo;
        }
        sup = sup.max(theta_a * total);
    }
    Ok(sup)
}

/// Smallest `L` (within relative `tol`, found by doubling from `1e-6` and
/// bisection) with weighted contraction estimate below `1 - 1e-3`, where
/// `c = Theta_g rho_B + rho_f`.
pub fn select_weight_l(
    alpha: f64,
    theta_a: f64,
    nodes: &[f64],
    rho_b: &[f64],
    rho_f: &[f64],
    theta_g: f64,
    tol: f64,
) -> Result<WeightSelection, HypothesisError> {
    if !(tol > 0.0 && tol < 0.1) {
        return Err(HypothesisError::InvalidArgument(format!(
            "tol must lie in (0, 0.1), got {tol}"
        )));
    }
    if nodes.len() < 2 || rho_b.len() != nodes.len() || rho_f.len() != nodes.len() {
        return Err(HypothesisError::DimensionMismatch(
            "rho_B and rho_f must be sampled on the nodes".into(),
        ));
    }
    let c: Vec<f64> = rho_b
        .iter()
        .zip(rho_f)
        .map(|(b, f)| theta_g * b + f)
        .collect();
    let eval = |l: f64| weighted_contraction(alpha, l, theta_a, nodes, &c);
    let at_floor = eval(L_FLOOR)?;
    if at_floor < CONTRACTION_TARGET {
        return Ok(WeightSelection {
            l: L_FLOOR,
            certificate: at_floor,
        });
    }
    let mut lo = L_FLOOR;
    let mut hi = L_FLOOR;
    let mut val = at_floor;
    while val >= CONTRACTION_TARGET {
        if hi >= L_CEILING {
            return Err(HypothesisError::NoFeasibleL { estimate: val });
        }
        lo = hi;
        hi = (hi * 2.0).min(L_CEILING);
        val = eval(hi)?;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        let v = eval(mid)?;
        if v < CONTRACTION_TARGET {
            hi = mid;
            val = v;
        } else {
            lo = mid;
        }
    }
    Ok(WeightSelection {
        l: hi,
        certificate: val,
    })
}

/// `max_i E_alpha(-L xi_i^alpha) |theta(xi_i)|`.
pub fn weighted_norm(path: &SampledPath, l: f64, alpha: f64) -> Result<f64, HypothesisError> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(HypothesisError::InvalidArgument(format!(
            "L must be nonnegative, got {l}"
        )));
    }
    let params = MLParams::one(alpha)?;
    let mut sup: f64 = 0.0;
    for (&xi, v) in path.grid.nodes().iter().zip(&path.values) {
        let w = if l == 0.0 {
            1.0
        } else {
            ml_real(params, -l * xi.powf(alpha))?
        };
        sup = sup.max(w * v.norm());
    }
    Ok(sup)
}
