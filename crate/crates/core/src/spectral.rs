//! Sine eigenbasis of the Dirichlet Laplacian on (0, 1).
//!
//! Fields are stored by their coefficients in the orthonormal basis
//! `e_k(xi) = sqrt(2) sin(k pi xi)`, `k = 1..=N`. The physical-space
//! representative lives on the interior collocation points
//! `xi_j = j / (N + 1)`, `j = 1..=N`, and the two are linked by a
//! type-I discrete sine transform normalized so that
//! `to_spectral(to_grid(x)) == x`.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Truncated coefficient vector in the sine eigenbasis. Index 0 holds mode `k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("a spectral field needs at least one mode"));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(domain(format!("coefficient of mode {} is not finite", k + 1)));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(basis_size: usize) -> Self {
        assert!(basis_size > 0, "basis size must be positive");
        Self { coeffs: vec![0.0; basis_size] }
    }

    /// The basis vector `e_k` (1-indexed).
    pub fn unit(basis_size: usize, k: usize) -> Result<Self> {
        if k == 0 || k > basis_size {
            return Err(domain(format!("mode {k} outside 1..={basis_size}")));
        }
        let mut field = Self::zeros(basis_size);
        field.coeffs[k - 1] = 1.0;
        Ok(field)
    }

    /// Builds a field from `k -> x_k` for `k = 1..=basis_size`.
    pub fn from_fn(basis_size: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((1..=basis_size).map(f).collect())
    }

    /// Coefficients `amplitude * k^(-decay)`, the regularity-controlled initial data.
    pub fn power_law(basis_size: usize, amplitude: f64, decay: f64) -> Result<Self> {
        Self::from_fn(basis_size, |k| amplitude * (k as f64).powf(-decay))
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn basis_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of mode `k` (1-indexed).
    pub fn mode(&self, k: usize) -> f64 {
        self.coeffs[k - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// The H = L^2(0,1) norm, i.e. the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn ensure_same_size(&self, other: &Self) -> Result<()> {
        if self.basis_size() != other.basis_size() {
            return Err(Error::SizeMismatch {
                expected: self.basis_size(),
                found: other.basis_size(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.ensure_same_size(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_size(other)?;
        Ok(Self::from_vec_unchecked(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_same_size(other)?;
        Ok(Self::from_vec_unchecked(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_vec_unchecked(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// `|self - other|_H`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.ensure_same_size(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Samples of a function at the interior points `xi_j = j / (N + 1)`.
/// The Dirichlet zeros at both ends are implied and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("a grid field needs at least one point"));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("grid value at point {} is not finite", j + 1)));
        }
        Ok(Self { values })
    }

    pub fn from_fn(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(collocation_points(grid_size).into_iter().map(f).collect())
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> Vec<f64> {
        collocation_points(self.grid_size())
    }

    /// Trapezoidal approximation of the L^2(0,1) norm including the zero endpoints.
    pub fn l2_norm(&self) -> f64 {
        let h = 1.0 / (self.grid_size() + 1) as f64;
        (h * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// Interior collocation points `j / (n + 1)`, `j = 1..=n`.
pub fn collocation_points(n: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    (1..=n).map(|j| j as f64 * h).collect()
}

/// Rule `k -> lambda_k` for a diagonal operator `A e_k = -lambda_k e_k`.
#[derive(Clone)]
pub enum EigenvalueLaw {
    /// `lambda_k = scale * pi^2 k^2`; `scale = 1` is the Dirichlet Laplacian.
    Laplacian {
        scale: f64,
    },
    Custom {
        name: String,
        law: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for EigenvalueLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenvalueLaw::Laplacian { scale } => write!(f, "Laplacian {{ scale: {scale} }}"),
            EigenvalueLaw::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Spectral description of a negative-definite diagonal operator.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    law: EigenvalueLaw,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self::laplacian()
    }
}

impl OperatorSpec {
    pub fn laplacian() -> Self {
        Self { law: EigenvalueLaw::Laplacian { scale: 1.0 } }
    }

    pub fn scaled_laplacian(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("laplacian scale must be positive, got {scale}")));
        }
        Ok(Self { law: EigenvalueLaw::Laplacian { scale } })
    }

    pub fn custom(
        name: impl Into<String>,
        law: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { law: EigenvalueLaw::Custom { name: name.into(), law: Arc::new(law) } }
    }

    pub fn law(&self) -> &EigenvalueLaw {
        &self.law
    }

    /// `lambda_k` for `k >= 1`.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(domain("modes are 1-indexed; k = 0 has no eigenvalue"));
        }
        let value = match &self.law {
            EigenvalueLaw::Laplacian { scale } => scale * PI * PI * (k * k) as f64,
            EigenvalueLaw::Custom { law, .. } => law(k),
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(domain(format!("eigenvalue of mode {k} is {value}, expected > 0")));
        }
        Ok(value)
    }

    /// `lambda_1, ..., lambda_n`, checked to be positive and non-decreasing.
    pub fn eigenvalues(&self, n: usize) -> Result<Vec<f64>> {
        let values = (1..=n).map(|k| self.eigenvalue(k)).collect::<Result<Vec<_>>>()?;
        if let Some(w) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(domain(format!(
                "eigenvalue law decreases between modes {} and {}",
                w + 1,
                w + 2
            )));
        }
        Ok(values)
    }

    /// The smallest eigenvalue `lambda_1`.
    pub fn smallest(&self) -> f64 {
        self.eigenvalue(1).expect("eigenvalue law must be positive at k = 1")
    }
}

/// `e^{tA} x`: mode `k` is damped by `exp(-lambda_k t)`.
pub fn apply_semigroup(x: &SpectralField, op: &OperatorSpec, t: f64) -> Result<SpectralField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("semigroup time must be finite and >= 0, got {t}")));
    }
    let lambdas = op.eigenvalues(x.basis_size())?;
    Ok(SpectralField::from_vec_unchecked(
        x.coeffs.iter().zip(&lambdas).map(|(c, l)| c * (-l * t).exp()).collect(),
    ))
}

/// `|x|_{(-A)^a} = (sum_k lambda_k^{2a} x_k^2)^{1/2}` for `a` in `[0, 1]`.
pub fn fractional_norm(x: &SpectralField, op: &OperatorSpec, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(domain(format!("fractional exponent must lie in [0, 1], got {a}")));
    }
    let lambdas = op.eigenvalues(x.basis_size())?;
    Ok(x.coeffs.iter().zip(&lambdas).map(|(c, l)| l.powf(2.0 * a) * c * c).sum::<f64>().sqrt())
}

type TransformCache = HashMap<(usize, usize), Arc<SineTransform>>;

/// Dense sine table linking `modes` coefficients with samples on `points` interior points.
///
/// With `points == modes` this is the type-I DST pair. With `points > modes` it evaluates
/// on a finer grid and projects back onto the leading `modes` coefficients, which is how
/// padded (de-aliased) products are formed.
#[derive(Debug)]
pub struct SineTransform {
    modes: usize,
    points: usize,
    // table[j * modes + (k - 1)] = sqrt(2) sin(k pi xi_j)
    table: Vec<f64>,
}

impl SineTransform {
    pub fn new(modes: usize, points: usize) -> Result<Self> {
        if modes == 0 || points < modes {
            return Err(domain(format!(
                "sine transform needs 0 < modes <= points, got modes={modes}, points={points}"
            )));
        }
        let step = PI / (points + 1) as f64;
        let mut table = Vec::with_capacity(modes * points);
        for j in 1..=points {
            for k in 1..=modes {
                // reduce k*j mod 2(points+1) so the sine argument stays small
                let phase = (k * j) % (2 * (points + 1));
                table.push(SQRT_2 * (phase as f64 * step).sin());
            }
        }
        Ok(Self { modes, points, table })
    }

    /// Process-wide cache of transforms, keyed by `(modes, points)`.
    pub fn shared(modes: usize, points: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<TransformCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("sine transform cache poisoned");
        if let Some(found) = guard.get(&(modes, points)) {
            return Ok(Arc::clone(found));
        }
        let created = Arc::new(Self::new(modes, points)?);
        guard.insert((modes, points), Arc::clone(&created));
        Ok(created)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid values from coefficients. `out.len() == points`.
    pub fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.modes);
        debug_assert_eq!(out.len(), self.points);
        for (row, value) in self.table.chunks_exact(self.modes).zip(out.iter_mut()) {
            *value = row.iter().zip(coeffs).map(|(s, c)| s * c).sum();
        }
    }

    /// Leading coefficients from grid values: trapezoidal projection onto each `e_k`.
    pub fn analyze(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.points);
        debug_assert_eq!(out.len(), self.modes);
        out.iter_mut().for_each(|c| *c = 0.0);
        for (row, v) in self.table.chunks_exact(self.modes).zip(values) {
            for (c, s) in out.iter_mut().zip(row) {
                *c += s * v;
            }
        }
        let h = 1.0 / (self.points + 1) as f64;
        out.iter_mut().for_each(|c| *c *= h);
    }
}

/// Samples `x` at its `N` collocation points.
pub fn to_grid(x: &SpectralField) -> GridField {
    let n = x.basis_size();
    let transform = SineTransform::shared(n, n).expect("non-empty field");
    let mut values = vec![0.0; n];
    transform.synthesize(&x.coeffs, &mut values);
    GridField { values }
}

/// Inverse of [`to_grid`].
pub fn to_spectral(v: &GridField) -> SpectralField {
    let n = v.grid_size();
    let transform = SineTransform::shared(n, n).expect("non-empty grid");
    let mut coeffs = vec![0.0; n];
    transform.analyze(&v.values, &mut coeffs);
    SpectralField { coeffs }
}

/// [`to_spectral`] with an explicit size check against the expected basis.
pub fn to_spectral_sized(v: &GridField, basis_size: usize) -> Result<SpectralField> {
    if v.grid_size() != basis_size {
        return Err(Error::SizeMismatch { expected: basis_size, found: v.grid_size() });
    }
    Ok(to_spectral(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laplacian_eigenvalues() {
        let op = OperatorSpec::laplacian();
        assert_relative_eq!(op.eigenvalue(1).unwrap(), 9.869604401089358, epsilon = 1e-12);
        assert_relative_eq!(op.eigenvalue(2).unwrap(), 4.0 * PI * PI, epsilon = 1e-12);
        assert!(matches!(op.eigenvalue(0), Err(Error::Domain(_))));
    }

    #[test]
    fn custom_identity_law() {
        let op = OperatorSpec::custom("identity", |k| k as f64);
        assert_eq!(op.eigenvalue(7).unwrap(), 7.0);
        assert!(op.eigenvalues(16).is_ok());
        let bad = OperatorSpec::custom("decreasing", |k| 1.0 / k as f64);
        assert!(bad.eigenvalues(4).is_err());
        let negative = OperatorSpec::custom("negative", |k| k as f64 - 2.0);
        assert!(negative.eigenvalue(1).is_err());
    }

    #[test]
    fn semigroup_examples() {
        let op = OperatorSpec::laplacian();
        let e1 = SpectralField::unit(8, 1).unwrap();
        assert_eq!(apply_semigroup(&e1, &op, 0.0).unwrap(), e1);
        let damped = apply_semigroup(&e1, &op, 0.1).unwrap();
        // exp(-0.1 pi^2)
        assert_relative_eq!(damped.mode(1), 0.372707838853438, epsilon = 1e-12);
        assert!(damped.coeffs()[1..].iter().all(|&c| c == 0.0));
        let zero = SpectralField::zeros(8);
        assert_eq!(apply_semigroup(&zero, &op, 3.0).unwrap(), zero);
        assert!(apply_semigroup(&e1, &op, -1e-3).is_err());
    }

    #[test]
    fn fractional_norm_examples() {
        let op = OperatorSpec::laplacian();
        let x = SpectralField::new(vec![3.0, -4.0, 0.0]).unwrap();
        assert_relative_eq!(fractional_norm(&x, &op, 0.0).unwrap(), 5.0, epsilon = 1e-14);
        let e1 = SpectralField::unit(4, 1).unwrap();
        assert_relative_eq!(fractional_norm(&e1, &op, 0.5).unwrap(), PI, epsilon = 1e-12);
        let e12 = SpectralField::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(
            fractional_norm(&e12, &op, 1.0).unwrap(),
            PI * PI * 17f64.sqrt(),
            epsilon = 1e-10
        );
        assert!(fractional_norm(&e1, &op, 1.5).is_err());
        assert!(fractional_norm(&e1, &op, -0.1).is_err());
    }

    #[test]
    fn grid_of_first_mode() {
        let n = 16;
        let grid = to_grid(&SpectralField::unit(n, 1).unwrap());
        for (v, xi) in grid.values().iter().zip(collocation_points(n)) {
            assert_relative_eq!(*v, SQRT_2 * (PI * xi).sin(), epsilon = 1e-13);
        }
        let zero = to_grid(&SpectralField::zeros(n));
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert_eq!(to_spectral(&zero), SpectralField::zeros(n));
    }

    #[test]
    fn size_checks() {
        let a = SpectralField::zeros(4);
        let b = SpectralField::zeros(5);
        assert!(matches!(a.add(&b), Err(Error::SizeMismatch { .. })));
        let grid = GridField::new(vec![0.0; 5]).unwrap();
        assert!(to_spectral_sized(&grid, 4).is_err());
        assert!(SpectralField::new(vec![1.0, f64::NAN]).is_err());
        assert!(GridField::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn partial_sums_of_inverse_powers() {
        // sum lambda_k^{-alpha} settles for alpha > 1/2 and keeps growing for alpha <= 1/2
        let op = OperatorSpec::laplacian();
        let partial = |alpha: f64, n: usize| -> f64 {
            op.eigenvalues(n).unwrap().iter().map(|l| l.powf(-alpha)).sum()
        };
        // ratio of successive tail increments: halves for alpha = 3/4, stays at 1 for alpha = 1/2
        let tail_ratio = |alpha: f64| {
            let first = partial(alpha, 4096) - partial(alpha, 1024);
            let second = partial(alpha, 16384) - partial(alpha, 4096);
            second / first
        };
        assert!(tail_ratio(0.75) < 0.6);
        assert!(tail_ratio(0.5) > 0.95);
        assert!(tail_ratio(0.25) > 1.5);
    }
}
