use nalgebra::DMatrix;
use num_complex::Complex64;

use super::contour::pole_of;
use super::gamma::rgamma;
use super::{ml_scalar, HankelPath, MLParams, MlError};

/// Eigenvector matrices with a worse condition number go to the contour.
const MAX_EIGENBASIS_CONDITION: f64 = 1e6;
/// Resolvents with a worse 1-norm condition number are rejected.
const MAX_RESOLVENT_CONDITION: f64 = 1e14;

/// Dense square generator matrix, validated and pre-analysed.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    entries: DMatrix<f64>,
    spectrum: Vec<Complex64>,
    sector_margin: f64,
    eigenbasis: Option<Eigenbasis>,
}

#[derive(Debug, Clone)]
struct Eigenbasis {
    values: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
}

impl GeneratorMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self, MlError> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(MlError::InvalidMatrix(format!(
                "generator must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(MlError::InvalidMatrix(
                "generator has non-finite entries".into(),
            ));
        }
        let spectrum: Vec<Complex64> = entries.complex_eigenvalues().iter().copied().collect();
        if spectrum
            .iter()
            .any(|l| !(l.re.is_finite() && l.im.is_finite()))
        {
            return Err(MlError::InvalidMatrix(
                "eigenvalue computation failed".into(),
            ));
        }
        let abscissa = spectrum
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let eigenbasis = Eigenbasis::try_new(&entries, &spectrum);
        Ok(Self {
            entries,
            spectrum,
            sector_margin: (-abscissa).max(0.0),
            eigenbasis,
        })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self, MlError> {
        if data.len() != n * n {
            return Err(MlError::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Distance from the spectrum to the imaginary axis for stable generators,
    /// zero otherwise.
    pub fn sector_margin(&self) -> f64 {
        self.sector_margin
    }

    /// Whether `ml_matrix` uses the eigenbasis route for this matrix.
    pub fn is_well_diagonalizable(&self) -> bool {
        self.eigenbasis.is_some()
    }

    /// `E_{alpha,beta}(scale * self)` through the contour route only.
    pub fn ml_contour(&self, params: MLParams, scale: f64) -> Result<DMatrix<f64>, MlError> {
        let z = self.entries.map(|v| Complex64::new(scale * v, 0.0));
        let poles: Vec<Complex64> = self
            .spectrum
            .iter()
            .filter_map(|l| pole_of(params.alpha, l * scale))
            .collect();
        let path = HankelPath::default().enclosing(&poles);
        if path.epsilon > 600.0 {
            return Err(MlError::ContourFailure(format!(
                "spectrum too far into the growth sector (contour radius {:.3e})",
                path.epsilon
            )));
        }
        let out = contour_matrix(params, &z, &poles, &path)?;
        finite_real(out)
    }
}

impl Eigenbasis {
    fn try_new(a: &DMatrix<f64>, spectrum: &[Complex64]) -> Option<Self> {
        let n = a.nrows();
        let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let cluster_tol = 1e-10 * scale;
        let null_tol = 1e-8 * scale;
        let ac = a.map(|v| Complex64::new(v, 0.0));

        let mut used = vec![false; n];
        let mut values = Vec::with_capacity(n);
        let mut columns: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
        for i in 0..n {
            if used[i] {
                continue;
            }
            let members: Vec<usize> = (i..n)
                .filter(|&j| !used[j] && (spectrum[j] - spectrum[i]).norm() <= cluster_tol)
                .collect();
            for &j in &members {
                used[j] = true;
            }
            let k = members.len();
            let center = members.iter().map(|&j| spectrum[j]).sum::<Complex64>() / k as f64;
            let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * center;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t?;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
            for (slot, &idx) in order.iter().take(k).enumerate() {
                if svd.singular_values[idx] > null_tol {
                    return None; // defective
                }
                let col = v_t.row(idx).transpose().map(|c| c.conj());
                columns.push(col);
                values.push(spectrum[members[slot]]);
            }
        }
        let vectors = DMatrix::from_columns(&columns);
        let sv = vectors.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > 0.0) || smax / smin > MAX_EIGENBASIS_CONDITION {
            return None;
        }
        let inverse = vectors.clone().try_inverse()?;
        Some(Self {
            values,
            vectors,
            inverse,
        })
    }

    fn apply(&self, params: MLParams, scale: f64) -> Result<DMatrix<f64>, MlError> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, lambda) in self.values.iter().enumerate() {
            let f = ml_scalar(params, lambda * scale)?;
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        finite_real(scaled * &self.inverse)
    }
}

fn finite_real(m: DMatrix<Complex64>) -> Result<DMatrix<f64>, MlError> {
    let out = m.map(|c| c.re);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(MlError::ContourFailure(
            "non-finite matrix function value".into(),
        ))
    }
}

/// `E_{alpha,beta}(scale * A)`.
///
/// Uses the eigenbasis when `A` is diagonalizable with a condition number of at
/// most `1e6`, the Hankel contour otherwise. `scale = 0` returns `I/Gamma(beta)`
/// exactly.
pub fn ml_matrix(
    params: MLParams,
    scale: f64,
    a: &GeneratorMatrix,
) -> Result<DMatrix<f64>, MlError> {
    params.validate()?;
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(MlError::InvalidArgument(format!(
            "scale must be finite and non-negative, got {scale}"
        )));
    }
    let n = a.dim();
    if scale == 0.0 {
        return Ok(DMatrix::identity(n, n) * rgamma(params.beta));
    }
    match &a.eigenbasis {
        Some(basis) => match basis.apply(params, scale) {
            Ok(m) => Ok(m),
            Err(_) => a.ml_contour(params, scale),
        },
        None => a.ml_contour(params, scale),
    }
}

/// Contour-integral evaluation of `E_{alpha,beta}(-xi^alpha A)` along `path`,
/// with resolvents `(mu^alpha I + xi^alpha A)^{-1}` factorized per node.
pub fn hankel_quadrature(
    params: MLParams,
    xi: f64,
    a: &GeneratorMatrix,
    path: &HankelPath,
) -> Result<DMatrix<f64>, MlError> {
    params.validate()?;
    path.validate()?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(MlError::InvalidArgument(format!(
            "xi must be positive, got {xi}"
        )));
    }
    let scale = -xi.powf(params.alpha);
    let z = a.entries.map(|v| Complex64::new(scale * v, 0.0));
    let poles: Vec<Complex64> = a
        .spectrum
        .iter()
        .filter_map(|l| pole_of(params.alpha, l * scale))
        .collect();
    if let Some(p) = poles.iter().find(|p| !path.encloses(**p)) {
        return Err(MlError::SectorViolation(format!(
            "pole {p} lies outside the keyhole of Ha(eps = {}, theta = {})",
            path.epsilon, path.theta
        )));
    }
    finite_real(contour_matrix(params, &z, &poles, path)?)
}

fn contour_matrix(
    params: MLParams,
    z: &DMatrix<Complex64>,
    poles: &[Complex64],
    path: &HankelPath,
) -> Result<DMatrix<Complex64>, MlError> {
    let n = z.nrows();
    let MLParams { alpha, beta } = params;
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for node in path.nodes(poles) {
        let ln_mu = node.mu.ln();
        let mu_a = (alpha * ln_mu).exp();
        let resolvent_arg = DMatrix::<Complex64>::identity(n, n) * mu_a - z;
        let norm1 = one_norm(&resolvent_arg);
        let inv = resolvent_arg
            .lu()
            .try_inverse()
            .ok_or(MlError::SingularResolvent {
                mu: node.mu,
                condition: f64::INFINITY,
            })?;
        let condition = norm1 * one_norm(&inv);
        if !(condition <= MAX_RESOLVENT_CONDITION) {
            return Err(MlError::SingularResolvent {
                mu: node.mu,
                condition,
            });
        }
        let coef = node.weight * (node.mu + (alpha - beta) * ln_mu).exp();
        acc += inv * coef;
    }
    Ok(acc)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
