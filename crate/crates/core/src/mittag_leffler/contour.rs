//! Hankel contour geometry and its panel quadrature.
//!
//! Contours are parameterized in the normalized variable `mu = lambda * xi`,
//! so a single path serves every time value. With that normalization
//!
//! ```text
//! E_{a,b}(Z) = 1/(2 pi i) * Int_Ha exp(mu) mu^(a-b) (mu^a I - Z)^(-1) dmu
//! ```
//!
//! where `Ha = Ha1 + Ha2 - Ha3`: the lower ray `t e^{-i theta}` run inward,
//! the arc `eps e^{i phi}`, `phi` in `[-theta, theta]`, then the upper ray
//! `t e^{i theta}` run outward. Every singularity of the integrand must lie in
//! the keyhole region `{|mu| < eps} U {|arg mu| > theta}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::MlError;
use crate::quadrature::GaussLegendre;

const DEFAULT_EPSILON: f64 = 1.0;
const DEFAULT_THETA: f64 = 3.0 * PI / 4.0;
const DEFAULT_NODE_COUNT: usize = 256;

/// Longest panel on either ray.
const MAX_RAY_PANEL: f64 = 8.0;
/// Longest panel (in arc length) on the circular branch.
const MAX_ARC_PANEL: f64 = 1.0;
/// Largest gap between an enclosed pole and the circular branch.
pub const ENCLOSING_MARGIN: f64 = 2.0;
/// Decay, in e-folds of `exp(Re mu)`, after which a ray is truncated.
const RAY_DECAY: f64 = 40.0;

/// Keyhole contour `Ha(epsilon, theta)` plus its quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelPath {
    pub epsilon: f64,
    pub theta: f64,
    pub node_count: usize,
}

impl Default for HankelPath {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            theta: DEFAULT_THETA,
            node_count: DEFAULT_NODE_COUNT,
        }
    }
}

/// One quadrature node: position on the contour and the complex weight,
/// which already carries `dmu` and the `1/(2 pi i)` prefactor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ContourNode {
    pub mu: Complex64,
    pub weight: Complex64,
}

impl HankelPath {
    pub fn new(epsilon: f64, theta: f64, node_count: usize) -> Result<Self, MlError> {
        let path = Self {
            epsilon,
            theta,
            node_count,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), MlError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(MlError::InvalidPath(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.theta > FRAC_PI_2 && self.theta < PI) {
            return Err(MlError::InvalidPath(format!(
                "theta must lie in (pi/2, pi), got {}",
                self.theta
            )));
        }
        if self.node_count < 8 {
            return Err(MlError::InvalidPath(format!(
                "node_count must be at least 8, got {}",
                self.node_count
            )));
        }
        Ok(())
    }

    /// Gauss points per panel; doubling `node_count` doubles it.
    pub fn points_per_panel(&self) -> usize {
        (self.node_count / 16).max(4)
    }

    /// Whether `pole` sits strictly inside the keyhole region.
    pub fn encloses(&self, pole: Complex64) -> bool {
        let r = pole.norm();
        let clearance = 1e-9 * (1.0 + r);
        if r < self.epsilon - clearance {
            return true;
        }
        pole.arg().abs() > self.theta && self.distance_to(pole) > clearance
    }

    /// Euclidean distance from `p` to the contour.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        let arc = distance_to_arc(p, self.epsilon, -self.theta, self.theta);
        let up = distance_to_ray_segment(p, self.theta, self.epsilon, f64::INFINITY);
        let down = distance_to_ray_segment(p, -self.theta, self.epsilon, f64::INFINITY);
        arc.min(up).min(down)
    }

    /// Smallest admissible enlargement of `self` enclosing `poles`.
    ///
    /// Poles whose angle is within `0.15` rad of the rays are pulled into the
    /// disk by growing `epsilon`, which keeps them away from the rays. The
    /// margin past the pole is capped at [`ENCLOSING_MARGIN`], since `exp(mu)`
    /// on the arc exceeds the result by about `exp(margin)`.
    pub fn enclosing(&self, poles: &[Complex64]) -> Self {
        let mut eps = self.epsilon;
        for p in poles {
            if p.arg().abs() <= self.theta + 0.15 {
                let r = p.norm();
                eps = eps.max(r + (0.25 * r + 0.5).min(ENCLOSING_MARGIN));
            }
        }
        Self {
            epsilon: eps,
            ..*self
        }
    }

    fn ray_end(&self) -> f64 {
        let decay = -self.theta.cos();
        self.epsilon + (RAY_DECAY / decay).min(1e4)
    }

    /// Quadrature nodes on the whole contour. Panels are bisected until each
    /// is no longer than twice its distance to the nearest listed singularity.
    pub(crate) fn nodes(&self, singularities: &[Complex64]) -> Vec<ContourNode> {
        let rule = GaussLegendre::new(self.points_per_panel());
        let eps = self.epsilon;
        let theta = self.theta;
        let scale = 2.0 * PI;
        let mut out = Vec::new();

        // arc, counter-clockwise from -theta to theta
        let arc_len = 2.0 * theta * eps;
        let arc_panels = ((arc_len / MAX_ARC_PANEL).ceil() as usize).max(4);
        let dphi = 2.0 * theta / arc_panels as f64;
        let mut arc_pieces = Vec::new();
        for k in 0..arc_panels {
            let a = -theta + k as f64 * dphi;
            split_arc(eps, a, a + dphi, singularities, 0, &mut arc_pieces);
        }
        for (a, b) in arc_pieces {
            for (phi, w) in rule.mapped(a, b) {
                let mu = Complex64::from_polar(eps, phi);
                let dmu = Complex64::new(0.0, 1.0) * mu;
                out.push(ContourNode {
                    mu,
                    weight: dmu * w / Complex64::new(0.0, scale),
                });
            }
        }

        // rays: geometric panels graded toward the arc
        let t_end = self.ray_end();
        let mut edges = vec![eps];
        let mut t = eps;
        while t < t_end {
            let width = t.min(MAX_RAY_PANEL);
            t = (t + width).min(t_end);
            edges.push(t);
        }
        for sign in [1.0, -1.0] {
            let angle = sign * theta;
            let dir = Complex64::from_polar(1.0, angle);
            let mut pieces = Vec::new();
            for pair in edges.windows(2) {
                split_ray(angle, pair[0], pair[1], singularities, 0, &mut pieces);
            }
            for (a, b) in pieces {
                for (t, w) in rule.mapped(a, b) {
                    // the lower ray is traversed inward
                    out.push(ContourNode {
                        mu: dir * t,
                        weight: dir * (sign * w) / Complex64::new(0.0, scale),
                    });
                }
            }
        }
        out
    }
}

fn split_arc(
    eps: f64,
    a: f64,
    b: f64,
    poles: &[Complex64],
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) {
    let len = eps * (b - a);
    let near = poles
        .iter()
        .map(|p| distance_to_arc(*p, eps, a, b))
        .fold(f64::INFINITY, f64::min);
    if depth < 40 && len > 2.0 * near && len > 1e-9 * eps {
        let m = 0.5 * (a + b);
        split_arc(eps, a, m, poles, depth + 1, out);
        split_arc(eps, m, b, poles, depth + 1, out);
    } else {
        out.push((a, b));
    }
}

fn split_ray(
    angle: f64,
    a: f64,
    b: f64,
    poles: &[Complex64],
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) {
    let near = poles
        .iter()
        .map(|p| distance_to_ray_segment(*p, angle, a, b))
        .fold(f64::INFINITY, f64::min);
    if depth < 40 && (b - a) > 2.0 * near && (b - a) > 1e-9 * b {
        let m = 0.5 * (a + b);
        split_ray(angle, a, m, poles, depth + 1, out);
        split_ray(angle, m, b, poles, depth + 1, out);
    } else {
        out.push((a, b));
    }
}

fn distance_to_arc(p: Complex64, eps: f64, a: f64, b: f64) -> f64 {
    let phi = p.arg();
    if p.norm() > 0.0 && phi >= a && phi <= b {
        (p.norm() - eps).abs()
    } else {
        let pa = Complex64::from_polar(eps, a);
        let pb = Complex64::from_polar(eps, b);
        (p - pa).norm().min((p - pb).norm())
    }
}

fn distance_to_ray_segment(p: Complex64, angle: f64, a: f64, b: f64) -> f64 {
    let dir = Complex64::from_polar(1.0, angle);
    let along = (p * dir.conj()).re.clamp(a, b);
    (p - dir * along).norm()
}

/// Principal-sheet solution `s` of `s^alpha = z`, if one exists.
pub(crate) fn pole_of(alpha: f64, z: Complex64) -> Option<Complex64> {
    if z.norm() == 0.0 {
        return None;
    }
    if alpha == 1.0 {
        return Some(z);
    }
    let phi = z.arg();
    if phi.abs() < alpha * PI {
        Some(Complex64::from_polar(
            z.norm().powf(1.0 / alpha),
            phi / alpha,
        ))
    } else {
        None
    }
}
