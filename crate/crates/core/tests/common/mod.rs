//! Benchmark problems shared by the integration suites.
#![allow(dead_code)]

use std::sync::Arc;

use fpdvi_core::evolution::FpdviProblem;
use fpdvi_core::mittag_leffler::{ml_real, GeneratorMatrix, MLParams};
use fpdvi_core::quadrature::GaussLegendre;
use fpdvi_core::vi_solver::{ConvexFunction, ConvexSet, MonotoneMap};
use nalgebra::{dvector, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn scalar(a: f64) -> GeneratorMatrix {
    GeneratorMatrix::from_row_slice(1, &[a]).unwrap()
}

pub fn ml1(alpha: f64, x: f64) -> f64 {
    ml_real(MLParams::one(alpha).unwrap(), x).unwrap()
}

fn wide_interval() -> ConvexSet {
    ConvexSet::cube(1, -10.0, 10.0).unwrap()
}

/// `A = a`, `B = f = 0`, `h = theta0`: the state is `E_alpha(xi^alpha a) theta0`.
pub fn scalar_decay(alpha: f64, a: f64, theta0: f64) -> FpdviProblem {
    FpdviProblem::builder(
        alpha,
        1.0,
        scalar(a),
        wide_interval(),
        MonotoneMap::scaled_identity(1, 1.0).unwrap(),
        ConvexFunction::Zero,
    )
    .initial_value(DVector::from_element(1, theta0))
    .build()
    .unwrap()
}

/// `A = B = 0`, `f = 1`, `h = theta0`: the state is `theta0 + xi^alpha / Gamma(alpha + 1)`.
pub fn constant_forcing(alpha: f64, theta0: f64) -> FpdviProblem {
    FpdviProblem::builder(
        alpha,
        1.0,
        scalar(0.0),
        wide_interval(),
        MonotoneMap::scaled_identity(1, 1.0).unwrap(),
        ConvexFunction::Zero,
    )
    .f(Arc::new(|_, _| DVector::from_element(1, 1.0)))
    .initial_value(DVector::from_element(1, theta0))
    .build()
    .unwrap()
}

/// `A = 0`, `B = 1`, `g = -theta`, `G = I`, `K = [-10, 10]`, so `u = theta`
/// while `|theta| <= 10` and the state solves `D^alpha theta = theta`.
pub fn coupled_builder(alpha: f64, horizon: f64) -> fpdvi_core::evolution::ProblemBuilder {
    FpdviProblem::builder(
        alpha,
        horizon,
        scalar(0.0),
        wide_interval(),
        MonotoneMap::scaled_identity(1, 1.0).unwrap(),
        ConvexFunction::Zero,
    )
    .b(Arc::new(|_, _| DMatrix::from_element(1, 1, 1.0)))
    .g(Arc::new(|_, th: &DVector<f64>| -th))
}

pub fn coupled_growth(alpha: f64) -> FpdviProblem {
    coupled_builder(alpha, 1.0)
        .initial_value(DVector::from_element(1, 1.0))
        .build()
        .unwrap()
}

/// Nonlocal benchmark: `A = 0`, `B = 1`, `f = 1`, `g = theta`, so
/// `u = -theta` and `D^alpha theta = 1 - theta` with `theta(0) = theta(T)/2`.
pub fn nonlocal_half(alpha: f64) -> FpdviProblem {
    FpdviProblem::builder(
        alpha,
        1.0,
        scalar(0.0),
        wide_interval(),
        MonotoneMap::scaled_identity(1, 1.0).unwrap(),
        ConvexFunction::Zero,
    )
    .b(Arc::new(|_, _| DMatrix::from_element(1, 1, 1.0)))
    .f(Arc::new(|_, _| DVector::from_element(1, 1.0)))
    .g(Arc::new(|_, th: &DVector<f64>| th.clone()))
    .h(Arc::new(|_, path: &[DVector<f64>]| {
        &path[path.len() - 1] * 0.5
    }))
    .build()
    .unwrap()
}

/// Closed form of the nonlocal benchmark: `theta = 1 - (1 - theta0) E_alpha(-xi^alpha)`
/// with `theta0 = (1 - E) / (2 - E)`, `E = E_alpha(-T^alpha)`.
pub fn nonlocal_half_exact(alpha: f64, xi: f64) -> f64 {
    let e = ml1(alpha, -1.0);
    let theta0 = (1.0 - e) / (2.0 - e);
    1.0 - (1.0 - theta0) * ml1(alpha, -xi.powf(alpha))
}

/// Data of the classical linear benchmark: `alpha = 1`,
/// `theta' = A theta + B u + F theta + c`, `u = -(C theta + d)` (interior of
/// a wide box), `theta(0) = theta0`.
pub struct ClassicalLinear {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c_mat: DMatrix<f64>,
    pub d: DVector<f64>,
    pub f_mat: DMatrix<f64>,
    pub c: DVector<f64>,
    pub theta0: DVector<f64>,
}

impl ClassicalLinear {
    pub fn new() -> Self {
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(5, 5, &[
            -2.0, 0.3, 0.0, 0.1, 0.0,
            0.2, -1.5, 0.4, 0.0, 0.1,
            0.0, 0.1, -1.0, 0.3, 0.0,
            0.1, 0.0, 0.2, -2.5, 0.2,
            0.0, 0.2, 0.0, 0.1, -1.2,
        ]);
        #[rustfmt::skip]
        let b = DMatrix::from_row_slice(5, 2, &[
            1.0, 0.0,
            0.0, 1.0,
            0.5, 0.5,
            0.0, 0.3,
            0.2, 0.0,
        ]);
        #[rustfmt::skip]
        let c_mat = DMatrix::from_row_slice(2, 5, &[
            0.3, 0.0, 0.1, 0.0, 0.0,
            0.0, 0.2, 0.0, 0.1, 0.0,
        ]);
        Self {
            a,
            b,
            c_mat,
            d: DVector::from_row_slice(&[0.1, -0.2]),
            f_mat: DMatrix::from_diagonal(&DVector::from_row_slice(&[0.05, -0.05, 0.1, 0.0, 0.02])),
            c: DVector::from_row_slice(&[1.0, 0.0, -0.5, 0.2, 0.3]),
            theta0: DVector::from_row_slice(&[1.0, -1.0, 0.5, 0.0, 2.0]),
        }
    }

    pub fn problem(&self) -> FpdviProblem {
        let (b, c_mat, d, f_mat, c) = (
            self.b.clone(),
            self.c_mat.clone(),
            self.d.clone(),
            self.f_mat.clone(),
            self.c.clone(),
        );
        FpdviProblem::builder(
            1.0,
            1.0,
            GeneratorMatrix::new(self.a.clone()).unwrap(),
            ConvexSet::cube(2, -100.0, 100.0).unwrap(),
            MonotoneMap::scaled_identity(2, 1.0).unwrap(),
            ConvexFunction::Zero,
        )
        .b(Arc::new(move |_, _| b.clone()))
        .g(Arc::new(move |_, th: &DVector<f64>| &c_mat * th + &d))
        .f(Arc::new(move |_, th: &DVector<f64>| &f_mat * th + &c))
        .initial_value(self.theta0.clone())
        .build()
        .unwrap()
    }

    /// Variation of constants through the exponential of the augmented
    /// matrix `[[M, r], [0, 0]]`, `M = A - B C + F`, `r = c - B d`.
    pub fn exact(&self, t: f64) -> DVector<f64> {
        let m = &self.a - &self.b * &self.c_mat + &self.f_mat;
        let r = &self.c - &self.b * &self.d;
        let mut aug = DMatrix::zeros(6, 6);
        aug.view_mut((0, 0), (5, 5)).copy_from(&m);
        aug.view_mut((0, 5), (5, 1)).copy_from(&r);
        let e = (aug * t).exp();
        let mut x0 = DVector::zeros(6);
        x0.rows_mut(0, 5).copy_from(&self.theta0);
        x0[5] = 1.0;
        (e * x0).rows(0, 5).into_owned()
    }
}

/// Primal gap `max_{v in K} <c, u - v> + phi(u) - phi(v)` with `c = w + M u + q`
/// on the box `[lo, hi]` for `phi(v) = sum_i weights_i |v_i|`. The inner
/// maximum separates by coordinate and is attained at an endpoint or at 0.
pub fn box_gap(
    m: &DMatrix<f64>,
    q: &DVector<f64>,
    w: &DVector<f64>,
    weights: &[f64],
    lo: &[f64],
    hi: &[f64],
    u: &[f64],
) -> f64 {
    let uv = DVector::from_column_slice(u);
    let c = w + m * &uv + q;
    let mut gap = 0.0;
    for i in 0..u.len() {
        let phi = |x: f64| weights[i] * x.abs();
        let mut best = f64::INFINITY;
        let mut cands = vec![lo[i], hi[i]];
        if lo[i] < 0.0 && hi[i] > 0.0 {
            cands.push(0.0);
        }
        for v in cands {
            best = best.min(c[i] * v + phi(v));
        }
        gap += c[i] * u[i] + phi(u[i]) - best;
    }
    gap
}

/// Minimizer of a convex function on a 2-D box by repeated grid zooming.
pub fn zoom_minimize(f: impl Fn(&[f64]) -> f64, lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    let (mut a, mut b) = (lo, hi);
    let k = 100;
    let mut best = [lo[0], lo[1]];
    loop {
        let h = [(b[0] - a[0]) / k as f64, (b[1] - a[1]) / k as f64];
        let mut fb = f64::INFINITY;
        for i in 0..=k {
            for j in 0..=k {
                let p = [a[0] + h[0] * i as f64, a[1] + h[1] * j as f64];
                let v = f(&p);
                if v < fb {
                    fb = v;
                    best = p;
                }
            }
        }
        if h[0].max(h[1]) < 1e-7 {
            return best;
        }
        for d in 0..2 {
            a[d] = (best[d] - 2.0 * h[d]).max(lo[d]);
            b[d] = (best[d] + 2.0 * h[d]).min(hi[d]);
        }
    }
}

/// `(M, q, w, l1 weights, lo, hi)`.
pub type BoxInstance = (
    DMatrix<f64>,
    DVector<f64>,
    DVector<f64>,
    Vec<f64>,
    [f64; 2],
    [f64; 2],
);

/// Random 2-D box instances with affine strongly monotone `G` and weighted l1 `phi`.
pub fn box_instances() -> Vec<BoxInstance> {
    let mut out = Vec::new();
    let ms = [
        DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 2.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -2.0, 0.5]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let shift_box = ConvexSet::cube(2, -3.0, 3.0).unwrap();
    for (i, m) in ms.iter().enumerate() {
        for j in 0..4 {
            let w = shift_box.sample(&mut rng, 3.0);
            let weights = if j % 2 == 0 {
                vec![0.0, 0.0]
            } else {
                vec![0.1 * (i + 1) as f64, 0.2]
            };
            let (lo, hi) = if i == 1 {
                ([-1.0, -0.5], [1.0, 2.0])
            } else {
                ([0.0, 0.0], [1.0, 1.0])
            };
            out.push((m.clone(), dvector![0.1, -0.1], w, weights, lo, hi));
        }
    }
    out
}

/// `nonlocal_half(0.6)` on a fine grid (N = 4096, tol = 1e-10).
pub const NONLOCAL_REFERENCE: [(f64, f64); 5] = [
    (0.0, 0.36975029890964806),
    (0.25, 0.5931832947578706),
    (0.5, 0.6641187877540762),
    (0.75, 0.7082109277081189),
    (1.0, 0.7395005978331736),
];

/// Direct Gauss-Legendre quadrature of the weighted contraction integral on
/// `nodes`, with `c` given pointwise.
pub fn direct_contraction(
    alpha: f64,
    l: f64,
    theta_a: f64,
    nodes: &[f64],
    c: &dyn Fn(f64) -> f64,
) -> f64 {
    let rule = GaussLegendre::new(12);
    let p = MLParams::one(alpha).unwrap();
    let mut sup: f64 = 0.0;
    for i in 1..nodes.len() {
        let xi = nodes[i];
        let mut total = 0.0;
        for j in 0..i {
            for (s, w) in rule.mapped(nodes[j], nodes[j + 1]) {
                total += w * ml_real(p, -l * (xi - s).powf(alpha)).unwrap() * c(s);
            }
        }
        sup = sup.max(theta_a * total);
    }
    sup
}
