//! Proper convex lower semicontinuous terms `phi` with closed-form proximal
//! maps.

use nalgebra::{DMatrix, DVector};

use super::ViError;

/// Convex piecewise-linear scalar function with `phi(0) = 0`.
///
/// `slopes[k]` applies on the `k`-th interval cut out by the sorted
/// `breakpoints`, so `slopes.len() == breakpoints.len() + 1`; slopes must be
/// nondecreasing for convexity.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self, ViError> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(ViError::InvalidFunction(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if breakpoints.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(ViError::InvalidFunction(
                "piecewise-linear data must be finite".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ViError::InvalidFunction(
                "breakpoints must increase strictly".into(),
            ));
        }
        if slopes.windows(2).any(|w| w[0] > w[1]) {
            return Err(ViError::InvalidFunction(
                "slopes must be nondecreasing for convexity".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            slopes,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Integral of the slope function from 0 to `y`.
    pub fn value(&self, y: f64) -> f64 {
        let (lo, hi, sign) = if y >= 0.0 {
            (0.0, y, 1.0)
        } else {
            (y, 0.0, -1.0)
        };
        let mut total = 0.0;
        let mut left = f64::NEG_INFINITY;
        for (k, &s) in self.slopes.iter().enumerate() {
            let right = self.breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
            let a = left.max(lo);
            let b = right.min(hi);
            if b > a {
                total += s * (b - a);
            }
            left = right;
        }
        sign * total
    }

    /// `argmin_y phi(y) + (y - x)^2 / (2 lambda)`.
    pub fn prox(&self, lambda: f64, x: f64) -> f64 {
        let mut left = f64::NEG_INFINITY;
        for (k, &s) in self.slopes.iter().enumerate() {
            let right = self.breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
            let y = x - lambda * s;
            if y > left && y < right {
                return y;
            }
            if y >= right {
                // subgradient at the kink covers x - right
                let next = self.slopes[k + 1];
                if x - right <= lambda * next {
                    return right;
                }
            }
            left = right;
        }
        x - lambda * self.slopes[self.slopes.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction {
    Zero,
    /// `sum_i w_i |y_i|`.
    WeightedL1(DVector<f64>),
    /// `y' P y / 2 + r' y`.
    Quadratic {
        p: DMatrix<f64>,
        r: DVector<f64>,
    },
    /// `sum_i phi_i(y_i)`.
    SeparablePiecewiseLinear(Vec<PiecewiseLinear>),
}

impl ConvexFunction {
    pub fn weighted_l1(weights: DVector<f64>) -> Result<Self, ViError> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(ViError::InvalidFunction(
                "l1 weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self::WeightedL1(weights))
    }

    pub fn quadratic(p: DMatrix<f64>, r: DVector<f64>) -> Result<Self, ViError> {
        if p.nrows() == 0 || p.nrows() != p.ncols() || p.nrows() != r.len() {
            return Err(ViError::DimensionMismatch(format!(
                "quadratic needs square P matching r, got {}x{} and {}",
                p.nrows(),
                p.ncols(),
                r.len()
            )));
        }
        if p.iter().chain(r.iter()).any(|v| !v.is_finite()) {
            return Err(ViError::InvalidFunction(
                "quadratic data must be finite".into(),
            ));
        }
        let asym = (&p - p.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + p.abs().max()) {
            return Err(ViError::InvalidFunction("P must be symmetric".into()));
        }
        let min_eig = p.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 * (1.0 + p.abs().max()) {
            return Err(ViError::InvalidFunction(format!(
                "P must be positive semidefinite, smallest eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self::Quadratic { p, r })
    }

    pub fn separable(pieces: Vec<PiecewiseLinear>) -> Result<Self, ViError> {
        if pieces.is_empty() {
            return Err(ViError::InvalidFunction("no components given".into()));
        }
        Ok(Self::SeparablePiecewiseLinear(pieces))
    }

    /// Dimension fixed by the data; `None` for `Zero`.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Zero => None,
            Self::WeightedL1(w) => Some(w.len()),
            Self::Quadratic { r, .. } => Some(r.len()),
            Self::SeparablePiecewiseLinear(p) => Some(p.len()),
        }
    }

    /// Whether `phi` is a sum of univariate terms.
    pub fn is_separable(&self) -> bool {
        match self {
            Self::Quadratic { p, .. } => {
                let n = p.nrows();
                (0..n).all(|i| (0..n).all(|j| i == j || p[(i, j)] == 0.0))
            }
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn value(&self, y: &DVector<f64>) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::WeightedL1(w) => w.iter().zip(y.iter()).map(|(w, v)| w * v.abs()).sum(),
            Self::Quadratic { p, r } => 0.5 * y.dot(&(p * y)) + r.dot(y),
            Self::SeparablePiecewiseLinear(pieces) => {
                pieces.iter().zip(y.iter()).map(|(f, v)| f.value(*v)).sum()
            }
        }
    }

    /// `argmin_y phi(y) + |y - x|^2 / (2 lambda)`.
    pub fn prox(&self, lambda: f64, x: &DVector<f64>) -> Result<DVector<f64>, ViError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ViError::InvalidArgument(format!(
                "proximal step must be positive, got {lambda}"
            )));
        }
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(ViError::DimensionMismatch(format!(
                    "prox of a {d}-dimensional function at a {}-vector",
                    x.len()
                )));
            }
        }
        Ok(match self {
            Self::Zero => x.clone(),
            Self::WeightedL1(w) => DVector::from_iterator(
                x.len(),
                x.iter().zip(w.iter()).map(|(v, w)| {
                    let t = lambda * w;
                    v.signum() * (v.abs() - t).max(0.0)
                }),
            ),
            Self::Quadratic { p, r } => {
                let n = x.len();
                let lhs = DMatrix::identity(n, n) + p * lambda;
                let rhs = x - r * lambda;
                lhs.cholesky()
                    .ok_or_else(|| {
                        ViError::UnsupportedVariant("quadratic prox system not factorable".into())
                    })?
                    .solve(&rhs)
            }
            Self::SeparablePiecewiseLinear(pieces) => DVector::from_iterator(
                x.len(),
                pieces.iter().zip(x.iter()).map(|(f, v)| f.prox(lambda, *v)),
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn soft_threshold() {
        let phi = ConvexFunction::weighted_l1(dvector![1.0, 1.0]).unwrap();
        let y = phi.prox(0.5, &dvector![0.3, -2.0]).unwrap();
        assert_eq!(y, dvector![0.0, -1.5]);
    }

    #[test]
    fn quadratic_identity_halves() {
        let phi = ConvexFunction::quadratic(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let x = dvector![1.0, -4.0, 2.5];
        let y = phi.prox(1.0, &x).unwrap();
        assert!((y - x * 0.5).norm() < 1e-15);
    }

    #[test]
    fn piecewise_linear_matches_l1() {
        let abs = PiecewiseLinear::new(vec![0.0], vec![-1.0, 1.0]).unwrap();
        for x in [-3.0f64, -0.2, 0.0, 0.4, 2.0] {
            let want = x.signum() * (x.abs() - 0.7f64).max(0.0);
            assert!((abs.prox(0.7, x) - want).abs() < 1e-15, "{x}");
            assert_eq!(abs.value(x), x.abs());
        }
    }

    #[test]
    fn piecewise_linear_kinks() {
        // slope 0 on (-inf, 1), 2 on (1, 3), 5 on (3, inf)
        let f = PiecewiseLinear::new(vec![1.0, 3.0], vec![0.0, 2.0, 5.0]).unwrap();
        assert_eq!(f.value(4.0), 2.0 * 2.0 + 5.0);
        assert_eq!(f.value(-2.0), 0.0);
        assert_eq!(f.prox(1.0, 0.5), 0.5);
        assert_eq!(f.prox(1.0, 2.0), 1.0);
        assert_eq!(f.prox(1.0, 4.0), 2.0);
        assert_eq!(f.prox(1.0, 6.0), 3.0);
        assert_eq!(f.prox(1.0, 9.0), 4.0);
    }

    #[test]
    fn rejects_nonconvex_data() {
        assert!(PiecewiseLinear::new(vec![0.0], vec![1.0, -1.0]).is_err());
        assert!(ConvexFunction::weighted_l1(dvector![-1.0]).is_err());
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(ConvexFunction::quadratic(p, DVector::zeros(2)).is_err());
    }
}
