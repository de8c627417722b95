//! Empirical growth envelopes of `B`, `f` and `h` and the control bound
//! `Theta_g`. Every sampled quantity is a lower bound on the true constant.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HypothesisError;
use crate::evolution::FpdviProblem;
use crate::fracops::TimeGrid;
use crate::vi_solver::{sol_bound, uniform_in_ball};

/// Nondecreasing envelope `R+ -> R+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `intercept + slope k`.
    Affine { intercept: f64, slope: f64 },
    /// `coef k^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Linear interpolation of `(k, value)` pairs, extended by the last slope.
    Tabulated { k: Vec<f64>, values: Vec<f64> },
}

impl Envelope {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            Self::Affine { intercept, slope } => intercept + slope * k,
            Self::Power { coef, exponent } => coef * k.powf(*exponent),
            Self::Tabulated { k: ks, values } => {
                let n = ks.len();
                if n == 0 {
                    return 0.0;
                }
                if n == 1 || k <= ks[0] {
                    return values[0];
                }
                let i = match ks.iter().position(|&x| x >= k) {
                    Some(i) => i,
                    None => n - 1,
                };
                let (k0, k1, v0, v1) = (ks[i - 1], ks[i], values[i - 1], values[i]);
                v0 + (v1 - v0) * (k - k0) / (k1 - k0)
            }
        }
    }
}

/// Nonnegative samples of a function on `[0, T]` with their L2 norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledScalar {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub l2: f64,
}

impl SampledScalar {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        let l2 = l2_norm(&nodes, &values);
        Self { nodes, values, l2 }
    }

    pub fn constant(nodes: Vec<f64>, value: f64) -> Self {
        let values = vec![value; nodes.len()];
        Self::new(nodes, values)
    }
}

/// Trapezoidal L2 norm.
pub fn l2_norm(nodes: &[f64], values: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] * v[0] + v[1] * v[1]))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthData {
    pub rho_b: SampledScalar,
    pub upsilon_b: Envelope,
    pub rho_f: SampledScalar,
    pub upsilon_h: Envelope,
    /// Running maximum of `|h|` over scaled constant paths.
    pub upsilon_h_table: Envelope,
    pub theta_g: f64,
    pub theta_a: f64,
    pub delta_reg: Option<f64>,
    pub theta_a_caveat: Option<String>,
    /// `true` when `B` showed no dependence on the state.
    pub b_state_independent: bool,
}

/// User closed forms; they replace the sampled envelopes in the checker.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedForms {
    pub rho_b: Option<f64>,
    pub rho_f: Option<f64>,
    pub upsilon_b: Option<(f64, f64)>,
    pub upsilon_h: Option<(f64, f64)>,
}

/// Whether every sampled envelope stays below the matching closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub rho_b: Option<bool>,
    pub rho_f: Option<bool>,
    pub upsilon_h: Option<bool>,
}

const CONSTANT_SLACK: f64 = 1e-9;
const UPSILON_H_SCALES: [f64; 8] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Samples `B`, `f`, `g`, `h` of `problem` at `sample_count` states drawn
/// uniformly from the ball of radius `probe_radius` on a uniform grid of
/// `time_intervals` intervals. `theta_a` is inserted as given.
pub fn estimate_growth(
    problem: &FpdviProblem,
    probe_radius: f64,
    sample_count: usize,
    time_intervals: usize,
    theta_a: (f64, Option<f64>, Option<String>),
    seed: u64,
) -> Result<GrowthData, HypothesisError> {
    if !(probe_radius > 0.0 && probe_radius.is_finite()) || sample_count < 100 {
        return Err(HypothesisError::InvalidArgument(format!(
            "need probe_radius > 0 and sample_count >= 100, got {probe_radius} and {sample_count}"
        )));
    }
    let grid = TimeGrid::uniform(problem.horizon(), time_intervals.max(1))
        .map_err(|e| HypothesisError::InvalidArgument(e.to_string()))?;
    let nodes = grid.nodes().to_vec();
    let n = problem.state_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<DVector<f64>> = (0..sample_count)
        .map(|_| uniform_in_ball(&mut rng, n, probe_radius))
        .collect();
    let zero = DVector::zeros(n);

    let mut b_state_independent = true;
    let mut b_norms = Vec::with_capacity(nodes.len());
    let mut b_ratio = Vec::with_capacity(nodes.len());
    let mut f_lip = Vec::with_capacity(nodes.len());
    let mut g_sup: f64 = 0.0;
    for &xi in &nodes {
        let b0 = problem.eval_b(xi, &zero);
        let mut b_max = spectral(&b0);
        let mut ratio = b_max;
        let f0 = problem.eval_f(xi, &zero);
        let mut rho = f0.norm();
        g_sup = g_sup.max(problem.eval_g(xi, &zero).norm());
        for (i, x) in states.iter().enumerate() {
            let bx = problem.eval_b(xi, x);
            if (&bx - &b0).abs().max() > CONSTANT_SLACK * (1.0 + b0.abs().max()) {
                b_state_independent = false;
            }
            let nb = spectral(&bx);
            b_max = b_max.max(nb);
            ratio = ratio.max(nb / (1.0 + x.norm()));
            let y = &states[(i + 1) % states.len()];
            let dist = (x - y).norm();
            if dist > 0.0 {
                rho = rho.max((problem.eval_f(xi, x) - problem.eval_f(xi, y)).norm() / dist);
            }
            g_sup = g_sup.max(problem.eval_g(xi, x).norm());
        }
        b_norms.push(b_max);
        b_ratio.push(ratio);
        f_lip.push(rho);
    }
    let (rho_b, upsilon_b) = if b_state_independent {
        (
            SampledScalar::new(nodes.clone(), b_norms),
            Envelope::Affine {
                intercept: 1.0,
                slope: 0.0,
            },
        )
    } else {
        (
            SampledScalar::new(nodes.clone(), b_ratio),
            Envelope::Affine {
                intercept: 1.0,
                slope: 1.0,
            },
        )
    };

    // h on constant paths k d for random unit d
    let directions: Vec<DVector<f64>> = (0..16)
        .map(|_| {
            let d = uniform_in_ball(&mut rng, n, 1.0);
            let dn = d.norm();
            if dn > 0.0 {
                d / dn
            } else {
                let mut e = DVector::zeros(n);
                e[0] = 1.0;
                e
            }
        })
        .collect();
    let h_at = |k: f64| -> f64 {
        directions
            .iter()
            .map(|d| {
                let path = vec![d * k; nodes.len()];
                problem.eval_h(&nodes, &path).norm()
            })
            .fold(0.0, f64::max)
    };
    let intercept = h_at(0.0);
    let mut slope: f64 = 0.0;
    let mut running: f64 = 0.0;
    let mut table = Vec::with_capacity(UPSILON_H_SCALES.len());
    for &k in &UPSILON_H_SCALES {
        let v = h_at(k * probe_radius);
        running = running.max(v);
        table.push(running);
        if k > 0.0 {
            slope = slope.max((v - intercept) / (k * probe_radius));
        }
    }

    let n_g = g_sup.max(1e-12);
    let theta_g = sol_bound(
        problem.constraint_set(),
        problem.operator(),
        problem.phi(),
        n_g,
        sample_count,
        seed.wrapping_add(1),
    )?;

    Ok(GrowthData {
        rho_b,
        upsilon_b,
        rho_f: SampledScalar::new(nodes, f_lip),
        upsilon_h: Envelope::Affine { intercept, slope },
        upsilon_h_table: Envelope::Tabulated {
            k: UPSILON_H_SCALES.iter().map(|k| k * probe_radius).collect(),
            values: table,
        },
        theta_g,
        theta_a: theta_a.0,
        delta_reg: theta_a.1,
        theta_a_caveat: theta_a.2,
        b_state_independent,
    })
}

/// Replaces sampled envelopes by closed forms where given and reports
/// whether the samples respected them.
pub fn apply_closed_forms(data: &GrowthData, forms: &ClosedForms) -> (GrowthData, ClosedFormCheck) {
    let mut out = data.clone();
    let below = |s: &SampledScalar, c: f64| s.values.iter().all(|&v| v <= c * (1.0 + 1e-9) + 1e-12);
    let check = ClosedFormCheck {
        rho_b: forms.rho_b.map(|c| below(&data.rho_b, c)),
        rho_f: forms.rho_f.map(|c| below(&data.rho_f, c)),
        upsilon_h: forms.upsilon_h.map(|(a, b)| match &data.upsilon_h_table {
            Envelope::Tabulated { k, values } => k
                .iter()
                .zip(values)
                .all(|(&k, &v)| v <= (a + b * k) * (1.0 + 1e-9) + 1e-12),
            _ => true,
        }),
    };
    if let Some(c) = forms.rho_b {
        out.rho_b = SampledScalar::constant(data.rho_b.nodes.clone(), c);
    }
    if let Some(c) = forms.rho_f {
        out.rho_f = SampledScalar::constant(data.rho_f.nodes.clone(), c);
    }
    if let Some((intercept, slope)) = forms.upsilon_b {
        out.upsilon_b = Envelope::Affine { intercept, slope };
    }
    if let Some((intercept, slope)) = forms.upsilon_h {
        out.upsilon_h = Envelope::Affine { intercept, slope };
    }
    (out, check)
}

fn spectral(m: &nalgebra::DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.singular_values().max()
    }
}
