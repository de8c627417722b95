//! Numerical checks of the standing assumptions: sampled monotonicity and
//! coercivity probes, growth envelopes, the kernel constant `Theta_A`, the
//! existence inequality, the contraction weight `L` and the equicontinuity
//! modulus.
//!
//! Every verdict is empirical. Probes are seeded and the seeds are recorded.

mod constants;
mod growth;
mod probes;

use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use constants::{
    check_condition_43, estimate_theta_a, select_weight_l, weighted_contraction, weighted_norm,
    Condition43, ThetaAEstimate, WeightSelection, DEFAULT_K_SEQUENCE, L_CEILING, L_FLOOR,
    THETA_A_CAVEAT,
};
pub use growth::{
    apply_closed_forms, estimate_growth, l2_norm, ClosedFormCheck, ClosedForms, Envelope,
    GrowthData, SampledScalar,
};
pub use probes::{
    chi_diagnostic, probe_p1_monotone, probe_p3_coercive, CoercivityProbe, MonotonicityProbe,
};

use crate::evolution::{EvolutionError, FpdviProblem, Trajectory};
use crate::fracops::SampledPath;
use crate::mittag_leffler::MlError;
use crate::vi_solver::ViError;

#[derive(Debug, Error)]
pub enum HypothesisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coercivity anchor is not in K")]
    AnchorNotInK,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("delta {delta} below grid spacing {spacing}")]
    DeltaBelowResolution { delta: f64, spacing: f64 },
    #[error("no weight L up to 1e12 gives a contraction (estimate {estimate})")]
    NoFeasibleL { estimate: f64 },
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Vi(#[from] ViError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisConfig {
    pub pair_count: usize,
    pub radii: Vec<f64>,
    /// Coercivity anchor; `P_K(0)` when absent.
    pub anchor: Option<Vec<f64>>,
    /// Regularization gap for `Theta_A`; `T / 100` when absent.
    pub delta: Option<f64>,
    pub theta_a_resolution: usize,
    pub k_sequence: Vec<f64>,
    pub sample_count: usize,
    pub time_intervals: usize,
    /// Probe radius for growth sampling; the problem's own when absent.
    pub probe_radius: Option<f64>,
    pub weight_tol: f64,
    pub closed_forms: ClosedForms,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            pair_count: 256,
            radii: vec![1.0, 10.0, 100.0, 1000.0],
            anchor: None,
            delta: None,
            theta_a_resolution: 256,
            k_sequence: DEFAULT_K_SEQUENCE.to_vec(),
            sample_count: 100,
            time_intervals: 32,
            probe_radius: None,
            weight_tol: 1e-3,
            closed_forms: ClosedForms::default(),
        }
    }
}

/// Seeds of the individual probes, all drawn from one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSeeds {
    pub root: u64,
    pub p1: u64,
    pub p3: u64,
    pub growth: u64,
}

impl ProbeSeeds {
    pub fn derive(root: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root);
        Self {
            root,
            p1: rng.next_u64(),
            p3: rng.next_u64(),
            growth: rng.next_u64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiReport {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub seeds: ProbeSeeds,
    pub p1_monotone: MonotonicityProbe,
    pub p3_coercive: CoercivityProbe,
    pub theta_a: ThetaAEstimate,
    /// Sampled envelopes before closed forms are applied.
    pub growth_sampled: GrowthData,
    pub closed_form_check: ClosedFormCheck,
    pub condition_43: Condition43,
    pub weight: Option<WeightSelection>,
    pub weight_error: Option<String>,
    pub chi: Option<ChiReport>,
    pub notes: Vec<String>,
    /// P1, P3 or the existence inequality failed.
    pub hard_fail: bool,
}

/// Runs the full suite on `problem`.
pub fn run_hypotheses(
    problem: &FpdviProblem,
    config: &HypothesisConfig,
    seed: u64,
) -> Result<HypothesisReport, HypothesisError> {
    let seeds = ProbeSeeds::derive(seed);
    let k = problem.constraint_set();
    let g = problem.operator();
    let p1 = probe_p1_monotone(g, k, config.pair_count, seeds.p1)?;
    let anchor = match &config.anchor {
        Some(a) => DVector::from_column_slice(a),
        None => k.project(&DVector::zeros(k.dim()))?,
    };
    let p3 = probe_p3_coercive(g, problem.phi(), k, &anchor, &config.radii, seeds.p3)?;

    let horizon = problem.horizon();
    let delta = config.delta.unwrap_or(0.01 * horizon);
    let theta_a = estimate_theta_a(
        problem.alpha(),
        problem.generator(),
        horizon,
        delta,
        config.theta_a_resolution,
    )?;
    let radius = config.probe_radius.unwrap_or(problem.probe_radius());
    let sampled = estimate_growth(
        problem,
        radius,
        config.sample_count,
        config.time_intervals,
        (theta_a.regularized, theta_a.delta, theta_a.caveat.clone()),
        seeds.growth,
    )?;
    let (growth, closed_form_check) = apply_closed_forms(&sampled, &config.closed_forms);
    let condition_43 = check_condition_43(&growth, horizon, &config.k_sequence)?;
    let (weight, weight_error) = match select_weight_l(
        problem.alpha(),
        theta_a.regularized,
        &growth.rho_b.nodes,
        &growth.rho_b.values,
        &growth.rho_f.values,
        growth.theta_g,
        config.weight_tol,
    ) {
        Ok(w) => (Some(w), None),
        Err(e @ HypothesisError::NoFeasibleL { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let notes = vec![
        "growth envelopes, Theta_g and the probes are empirical lower bounds from seeded samples"
            .to_string(),
        "Theta_g is the sampled bound on selected controls over shifts up to sup |g| on the probe ball"
            .to_string(),
    ];
    let hard_fail = !p1.pass || !p3.pass || !condition_43.pass;
    Ok(HypothesisReport {
        seeds,
        p1_monotone: p1,
        p3_coercive: p3,
        theta_a,
        growth_sampled: sampled,
        closed_form_check,
        condition_43,
        weight,
        weight_error,
        chi: None,
        notes,
        hard_fail,
    })
}

/// Equicontinuity modulus of the state trajectory at `delta = c h` for
/// `c in {8, 4, 2, 1}`, with `h` the smallest grid spacing.
pub fn trajectory_chi(traj: &Trajectory) -> Result<ChiReport, HypothesisError> {
    let h = traj.grid.min_spacing();
    let deltas: Vec<f64> = [8.0, 4.0, 2.0, 1.0].iter().map(|c| c * h).collect();
    let path = SampledPath::new(traj.grid.clone(), traj.theta.clone())
        .map_err(|e| HypothesisError::InvalidArgument(e.to_string()))?;
    let values = chi_diagnostic(std::slice::from_ref(&path), &deltas)?;
    Ok(ChiReport { deltas, values })
}
