//! Problem definitions: pointwise reaction terms lifted to Nemytskii operators,
//! the fast potential, and dissipativity checks.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectral::{collocation_points, OperatorSpec, SineTransform, SpectralField};

/// A pointwise map `(xi, x, y) -> value`.
pub type PointwiseMap = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Slow input `h(x)` of a fast drift of the form `g = -kappa y + h(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Forcing {
    Zero,
    Identity,
    Sine,
}

impl Forcing {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Identity => x,
            Forcing::Sine => x.sin(),
        }
    }
}

/// Slow reaction `f = r(y)` as a function of the fast variable only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Identity,
    Tanh,
}

impl Response {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Response::Identity => y,
            Response::Tanh => y.tanh(),
        }
    }
}

/// Declared structure of a model, used by the analytic oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// `f = r(y)`, `g = -kappa y + h(x)`: the frozen fast law is Gaussian.
    GaussianFast {
        kappa: f64,
        forcing: Forcing,
        response: Response,
    },
    General,
}

/// A slow-fast reaction-diffusion problem.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    f: PointwiseMap,
    g: PointwiseMap,
    /// Declared `sup |dg/dy|`, when known analytically.
    pub g_y_sup: Option<f64>,
    pub op_a: OperatorSpec,
    pub op_b: OperatorSpec,
    pub structure: Structure,
    /// Extra contraction of the fast drift beyond `B` (kappa for the built-ins).
    pub contraction_bonus: f64,
    /// Evaluate products on a 3/2-padded grid.
    pub padding: bool,
    /// Regularity exponent of the derivative bounds; documentation only.
    pub eta: Option<f64>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("g_y_sup", &self.g_y_sup)
            .field("op_a", &self.op_a)
            .field("op_b", &self.op_b)
            .field("structure", &self.structure)
            .field("padding", &self.padding)
            .finish()
    }
}

impl ModelSpec {
    /// A model from arbitrary pointwise maps. Nothing is assumed about its structure.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            g: Arc::new(g),
            g_y_sup: None,
            op_a: OperatorSpec::laplacian(),
            op_b: OperatorSpec::laplacian(),
            structure: Structure::General,
            contraction_bonus: 0.0,
            padding: false,
            eta: None,
        }
    }

    /// `f = r(y)`, `g = -kappa y + h(x)`.
    pub fn gaussian_fast(
        name: impl Into<String>,
        kappa: f64,
        forcing: Forcing,
        response: Response,
    ) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(domain(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        let mut model = Self::custom(
            name,
            move |_, _, y| response.apply(y),
            move |_, x, y| -kappa * y + forcing.apply(x),
        );
        model.g_y_sup = Some(kappa);
        model.structure = Structure::GaussianFast { kappa, forcing, response };
        model.contraction_bonus = kappa;
        model.eta = Some(0.0);
        Ok(model)
    }

    /// `f = y`, `g = -kappa y + x`. Unbounded, but with an exact Gaussian invariant law.
    pub fn linear(kappa: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(domain(format!("the linear model needs kappa > 0, got {kappa}")));
        }
        Self::gaussian_fast("linear", kappa, Forcing::Identity, Response::Identity)
    }

    /// `f = tanh(y)`, `g = -kappa y + sin(x)`. Bounded with bounded derivatives.
    pub fn tanh(kappa: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(domain(format!("the tanh model needs kappa > 0, got {kappa}")));
        }
        Self::gaussian_fast("tanh", kappa, Forcing::Sine, Response::Tanh)
    }

    /// `f = g = 0`: decoupled heat equation and pure stochastic convolution.
    pub fn zero() -> Self {
        let mut model = Self::custom("zero", |_, _, _| 0.0, |_, _, _| 0.0);
        model.g_y_sup = Some(0.0);
        model
    }

    /// Built-in models by name: `linear`, `tanh`, `zero`.
    pub fn by_name(name: &str, kappa: f64) -> Result<Self> {
        match name {
            "linear" => Self::linear(kappa),
            "tanh" => Self::tanh(kappa),
            "zero" => Ok(Self::zero()),
            other => {
                Err(domain(format!("unknown model `{other}` (expected linear, tanh or zero)")))
            }
        }
    }

    pub fn with_padding(mut self, padding: bool) -> Self {
        self.padding = padding;
        self
    }

    pub fn with_operators(mut self, op_a: OperatorSpec, op_b: OperatorSpec) -> Self {
        self.op_a = op_a;
        self.op_b = op_b;
        self
    }

    pub fn with_g_y_sup(mut self, sup: f64) -> Self {
        self.g_y_sup = Some(sup);
        self
    }

    pub fn f(&self, xi: f64, x: f64, y: f64) -> f64 {
        (self.f)(xi, x, y)
    }

    pub fn g(&self, xi: f64, x: f64, y: f64) -> f64 {
        (self.g)(xi, x, y)
    }

    pub(crate) fn f_map(&self) -> &PointwiseMap {
        &self.f
    }

    pub(crate) fn g_map(&self) -> &PointwiseMap {
        &self.g
    }

    /// Number of collocation points used for products at basis size `n`.
    pub fn collocation_size(&self, n: usize) -> usize {
        if self.padding {
            // 3/2 rule on the DST-I period 2(n+1)
            (3 * (n + 1)).div_ceil(2) - 1
        } else {
            n
        }
    }
}

/// Pseudo-spectral evaluation of pointwise maps on a fixed basis size.
#[derive(Debug, Clone)]
pub struct Collocation {
    transform: Arc<SineTransform>,
    points: Vec<f64>,
}

impl Collocation {
    pub fn new(model: &ModelSpec, basis_size: usize) -> Result<Self> {
        let points = model.collocation_size(basis_size);
        Ok(Self {
            transform: SineTransform::shared(basis_size, points)?,
            points: collocation_points(points),
        })
    }

    pub fn basis_size(&self) -> usize {
        self.transform.modes()
    }

    pub fn grid_size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn to_grid(&self, coeffs: &[f64], out: &mut [f64]) {
        self.transform.synthesize(coeffs, out);
    }

    pub fn project(&self, values: &[f64], out: &mut [f64]) {
        self.transform.analyze(values, out);
    }

    /// `out[j] = map(xi_j, x[j], y[j])`, failing on the first non-finite value.
    pub fn evaluate(
        &self,
        map: &PointwiseMap,
        label: &'static str,
        x_grid: &[f64],
        y_grid: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        for (j, (((&xi, &x), &y), o)) in
            self.points.iter().zip(x_grid).zip(y_grid).zip(out.iter_mut()).enumerate()
        {
            let value = map(xi, x, y);
            if !value.is_finite() {
                return Err(Error::Evaluation { map: label, index: j + 1, xi, value });
            }
            *o = value;
        }
        Ok(())
    }

    fn nemytskii(
        &self,
        map: &PointwiseMap,
        label: &'static str,
        x: &SpectralField,
        y: &SpectralField,
    ) -> Result<SpectralField> {
        x.ensure_same_size(y)?;
        if x.basis_size() != self.basis_size() {
            return Err(Error::SizeMismatch { expected: self.basis_size(), found: x.basis_size() });
        }
        let p = self.grid_size();
        let mut xg = vec![0.0; p];
        let mut yg = vec![0.0; p];
        let mut vals = vec![0.0; p];
        self.to_grid(x.coeffs(), &mut xg);
        self.to_grid(y.coeffs(), &mut yg);
        self.evaluate(map, label, &xg, &yg, &mut vals)?;
        let mut coeffs = vec![0.0; self.basis_size()];
        self.project(&vals, &mut coeffs);
        Ok(SpectralField::from_vec_unchecked(coeffs))
    }
}

/// `F(x, y)(xi) = f(xi, x(xi), y(xi))` in spectral form.
pub fn nemytskii_f(m: &ModelSpec, x: &SpectralField, y: &SpectralField) -> Result<SpectralField> {
    Collocation::new(m, x.basis_size())?.nemytskii(m.f_map(), "f", x, y)
}

/// `G(x, y)(xi) = g(xi, x(xi), y(xi))` in spectral form.
pub fn nemytskii_g(m: &ModelSpec, x: &SpectralField, y: &SpectralField) -> Result<SpectralField> {
    Collocation::new(m, x.basis_size())?.nemytskii(m.g_map(), "g", x, y)
}

/// `U(x, y) = int_0^1 <G(x, s y), y> ds` by Gauss-Legendre quadrature in `s`.
pub fn potential_u(
    m: &ModelSpec,
    x: &SpectralField,
    y: &SpectralField,
    quad_points: usize,
) -> Result<f64> {
    if quad_points < 2 {
        return Err(domain(format!("potential quadrature needs >= 2 points, got {quad_points}")));
    }
    x.ensure_same_size(y)?;
    let colloc = Collocation::new(m, x.basis_size())?;
    let rule = GaussLegendre::new(NonZeroUsize::new(quad_points).expect("checked above"));
    let mut failure = None;
    let value = rule.integrate(0.0, 1.0, |s| {
        match colloc.nemytskii(m.g_map(), "g", x, &y.scale(s)).and_then(|g| g.dot(y)) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        }
    });
    match failure {
        Some(err) => Err(err),
        None => Ok(value),
    }
}

/// Closed interval scanned by [`check_dissipativity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanBox {
    pub xi: (f64, f64),
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Default for ScanBox {
    fn default() -> Self {
        Self { xi: (0.0, 1.0), x: (-5.0, 5.0), y: (-5.0, 5.0) }
    }
}

/// Constants `(c, C)` with `<By + G(x,y), y> <= -c|y|^2 + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakConstants {
    pub c: f64,
    pub big_c: f64,
    pub analytic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativityReport {
    /// `L_g < mu`.
    pub strict: bool,
    /// `mu - L_g`.
    pub margin: f64,
    /// Lipschitz constant used for the verdict (declared if available).
    pub lipschitz: f64,
    /// Largest finite-difference `|dg/dy|` seen in the scan.
    pub empirical_lipschitz: f64,
    pub mu: f64,
    pub weak_constants: WeakConstants,
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 || range.0 == range.1 {
        return vec![0.5 * (range.0 + range.1)];
    }
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

/// Scans `g` over a box: estimates `L_g = sup |dg/dy|` by central differences and fits
/// the weak-dissipativity constant `C` for `c = mu / 2`.
pub fn check_dissipativity(
    m: &ModelSpec,
    scan: &ScanBox,
    resolution: usize,
) -> Result<DissipativityReport> {
    if resolution == 0 {
        return Err(domain("scan resolution must be positive"));
    }
    for (label, (lo, hi)) in [("xi", scan.xi), ("x", scan.x), ("y", scan.y)] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(domain(format!("scan range for {label} is empty or not finite")));
        }
    }
    let mu = m.op_b.smallest();
    let c = 0.5 * mu;
    let xs = axis(scan.x, resolution);
    let ys = axis(scan.y, resolution);
    let mut lipschitz: f64 = 0.0;
    let mut big_c: f64 = 0.0;
    for xi in axis(scan.xi, resolution) {
        for &x in &xs {
            for &y in &ys {
                let step = 1e-5 * y.abs().max(1.0);
                let g = m.g(xi, x, y);
                let derivative = (m.g(xi, x, y + step) - m.g(xi, x, y - step)) / (2.0 * step);
                if !derivative.is_finite() || !g.is_finite() {
                    return Err(Error::Evaluation {
                        map: "dg/dy",
                        index: 0,
                        xi,
                        value: derivative,
                    });
                }
                lipschitz = lipschitz.max(derivative.abs());
                big_c = big_c.max(g * y - c * y * y);
            }
        }
    }
    let used = match m.g_y_sup {
        Some(declared) => {
            if declared < lipschitz * (1.0 - 1e-4) - 1e-8 {
                return Err(domain(format!(
                    "declared sup |dg/dy| = {declared} is below the scanned value {lipschitz}"
                )));
            }
            declared
        }
        None => lipschitz,
    };
    Ok(DissipativityReport {
        strict: used < mu,
        margin: mu - used,
        lipschitz: used,
        empirical_lipschitz: lipschitz,
        mu,
        weak_constants: WeakConstants { c, big_c, analytic: false },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_grid, GridField};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_reaction_gives_zero_field() {
        let m = ModelSpec::zero();
        let x = SpectralField::power_law(16, 1.0, 2.0).unwrap();
        let y = SpectralField::power_law(16, -0.5, 1.0).unwrap();
        assert_eq!(nemytskii_f(&m, &x, &y).unwrap(), SpectralField::zeros(16));
    }

    #[test]
    fn constant_reaction_projects_onto_odd_modes() {
        let m = ModelSpec::custom("one", |_, _, _| 1.0, |_, _, _| 0.0);
        let n = 255;
        let z = SpectralField::zeros(n);
        let f = nemytskii_f(&m, &z, &z).unwrap();
        // Oracle: dense midpoint quadrature of int_0^1 sqrt(2) sin(k pi xi) dxi.
        let dense = 200_000;
        let oracle = |k: usize| -> f64 {
            (0..dense)
                .map(|i| {
                    let xi = (i as f64 + 0.5) / dense as f64;
                    2f64.sqrt() * (k as f64 * PI * xi).sin()
                })
                .sum::<f64>()
                / dense as f64
        };
        assert_relative_eq!(oracle(1), 2.0 * 2f64.sqrt() / PI, epsilon = 1e-9);
        for k in 1..=5 {
            assert!((f.mode(k) - oracle(k)).abs() < 1e-4, "mode {k}");
        }
    }

    #[test]
    fn identity_on_second_argument() {
        let m = ModelSpec::custom("y", |_, _, y| y, |_, _, _| 0.0);
        let e1 = SpectralField::unit(12, 1).unwrap();
        let z = SpectralField::zeros(12);
        let f = nemytskii_f(&m, &z, &e1).unwrap();
        for (a, b) in f.coeffs().iter().zip(e1.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn bounded_map_stays_bounded_on_grid() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let x = SpectralField::power_law(32, 3.0, 1.0).unwrap();
        let y = SpectralField::power_law(32, 10.0, 0.5).unwrap();
        let grid = to_grid(&nemytskii_f(&m, &x, &y).unwrap());
        assert!(grid.values().iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn padding_removes_aliasing_of_cubic_products() {
        // y with modes <= 4 gives y^3 with modes <= 12: aliased on 8 points, exact on 13
        let cube = ModelSpec::custom("cube", |_, _, y| y * y * y, |_, _, _| 0.0);
        let n = 8;
        let y = SpectralField::new(
            (1..=n).map(|k| if k <= 4 { 1.0 / k as f64 } else { 0.0 }).collect(),
        )
        .unwrap();
        let z = SpectralField::zeros(n);
        // oracle: projection on a dense grid, which resolves every mode of y^3
        let dense = Collocation {
            transform: SineTransform::shared(n, 255).unwrap(),
            points: collocation_points(255),
        };
        let oracle = dense.nemytskii(cube.f_map(), "f", &z, &y).unwrap();
        let padded_model = cube.clone().with_padding(true);
        assert_eq!(padded_model.collocation_size(n), 13);
        let padded = nemytskii_f(&padded_model, &z, &y).unwrap();
        let plain = nemytskii_f(&cube, &z, &y).unwrap();
        assert!(padded.distance(&oracle).unwrap() < 1e-12);
        assert!(plain.distance(&oracle).unwrap() > 1e-3);
    }

    #[test]
    fn non_finite_output_names_the_point() {
        let m = ModelSpec::custom(
            "bad",
            |xi, _, _| if xi > 0.5 { f64::NAN } else { 0.0 },
            |_, _, _| 0.0,
        );
        let z = SpectralField::zeros(9);
        match nemytskii_f(&m, &z, &z) {
            Err(Error::Evaluation { index, xi, .. }) => {
                assert_eq!(index, 6);
                assert_relative_eq!(xi, 0.6, epsilon = 1e-12);
            }
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn potential_examples() {
        let m = ModelSpec::custom("damped", |_, _, _| 0.0, |_, _, y| -y);
        let e1 = SpectralField::unit(16, 1).unwrap();
        let z = SpectralField::zeros(16);
        assert_relative_eq!(potential_u(&m, &z, &e1, 4).unwrap(), -0.5, epsilon = 1e-13);
        assert_eq!(potential_u(&m, &z, &z, 4).unwrap(), 0.0);
        assert_eq!(potential_u(&ModelSpec::zero(), &z, &e1, 4).unwrap(), 0.0);
        assert!(potential_u(&m, &z, &e1, 1).is_err());
    }

    #[test]
    fn dissipativity_examples() {
        let scan = ScanBox::default();
        let damped = ModelSpec::custom("damped", |_, _, _| 0.0, |_, _, y| -y);
        let report = check_dissipativity(&damped, &scan, 21).unwrap();
        assert!(report.strict);
        assert_relative_eq!(report.margin, PI * PI - 1.0, epsilon = 1e-6);

        let wild = ModelSpec::custom("wild", |_, _, _| 0.0, |_, _, y| 10.0 * y.sin());
        let scan = ScanBox { y: (-4.0, 4.0), ..ScanBox::default() };
        let report = check_dissipativity(&wild, &scan, 41).unwrap();
        assert!(!report.strict);
        assert_relative_eq!(report.lipschitz, 10.0, epsilon = 1e-6);

        let report = check_dissipativity(&ModelSpec::zero(), &ScanBox::default(), 9).unwrap();
        assert!(report.strict);
        assert_relative_eq!(report.margin, PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn tanh_model_is_strict_with_declared_sup() {
        let report =
            check_dissipativity(&ModelSpec::tanh(1.0).unwrap(), &ScanBox::default(), 17).unwrap();
        assert!(report.strict);
        assert_relative_eq!(report.lipschitz, 1.0);
        assert_relative_eq!(report.empirical_lipschitz, 1.0, epsilon = 1e-6);
        assert_relative_eq!(report.margin, PI * PI - 1.0, epsilon = 1e-12);
        // sin(x) y - (1 + mu/2) y^2 peaks at 1 / (4 (1 + mu/2))
        let mu = PI * PI;
        assert!(report.weak_constants.big_c <= 1.0 / (4.0 * (1.0 + mu / 2.0)) + 1e-9);
    }

    #[test]
    fn understated_sup_is_rejected() {
        let m = ModelSpec::tanh(2.0).unwrap().with_g_y_sup(1.0);
        assert!(check_dissipativity(&m, &ScanBox::default(), 5).is_err());
    }

    #[test]
    fn scan_converges_under_refinement() {
        let m = ModelSpec::custom(
            "mixed",
            |_, _, _| 0.0,
            |xi, x, y| -2.0 * y + 0.5 * (x * y).sin() * xi,
        );
        let m = ModelSpec { g_y_sup: None, ..m };
        let coarse = check_dissipativity(&m, &ScanBox::default(), 40).unwrap();
        let fine = check_dissipativity(&m, &ScanBox::default(), 80).unwrap();
        assert!(((fine.lipschitz - coarse.lipschitz) / fine.lipschitz).abs() < 0.01);
        assert_eq!(coarse.strict, fine.strict);
    }

    #[test]
    fn unknown_builtin_name() {
        assert!(ModelSpec::by_name("quartic", 1.0).is_err());
        assert!(ModelSpec::by_name("tanh", 0.0).is_err());
    }

    #[test]
    fn grid_constructor_respects_points() {
        let g = GridField::from_fn(4, |xi| xi).unwrap();
        assert_relative_eq!(g.values()[0], 0.2);
    }
}
