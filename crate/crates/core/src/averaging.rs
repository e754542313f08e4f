//! The averaged coefficient `F_bar(x) = int F(x, y) mu^x(dy)`, the averaged equation
//! `dX_bar = (A X_bar + F_bar(X_bar)) dt`, and relaxation diagnostics of the frozen fast
//! equation.
//!
//! `F_bar` is estimated by long-run time averages of `F(x, Y_x(s, y))` over an ensemble
//! of independent fast trajectories; the normalizing constant of `mu^x` is never needed.
//! For models whose fast drift is `-kappa y + h(x)` the frozen law is Gaussian and
//! [`GibbsOracle`] evaluates `F_bar` semi-analytically.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{Collocation, ModelSpec, Response, Structure};
use crate::noise::NoisePlan;
use crate::regression::weighted_line_fit;
use crate::simulator::{SlowPropagator, Stepper, StepperConfig};
use crate::spectral::{OperatorSpec, SpectralField};

/// Default Gauss-Hermite order for the Gaussian oracle.
pub const DEFAULT_HERMITE_NODES: usize = 64;

/// Ergodic estimate of `F_bar(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbarEstimate {
    pub value: SpectralField,
    /// Per-mode standard error from the spread between ensemble members.
    pub standard_error: Vec<f64>,
    pub burn_in: f64,
    pub horizon: f64,
    pub ensemble: usize,
}

impl FbarEstimate {
    /// `sqrt(sum_k se_k^2)`, the expected H-norm of the estimation error.
    pub fn aggregate_se(&self) -> f64 {
        self.standard_error.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn mean_se(&self) -> f64 {
        self.standard_error.iter().sum::<f64>() / self.standard_error.len() as f64
    }
}

/// `5 / (mu_1 + kappa)`: five relaxation times of the slowest fast mode.
pub fn default_burn_in(m: &ModelSpec) -> f64 {
    5.0 / (m.op_b.smallest() + m.contraction_bonus)
}

/// Fast-time step for ergodic averages: a tenth of the slowest relaxation time `1 / mu_1`.
pub fn default_fast_dt(m: &ModelSpec) -> f64 {
    0.1 / m.op_b.smallest()
}

/// Time-and-ensemble average of `F(x, Y_x(s, 0))` over `s` in `[burn_in, horizon]`.
///
/// Ensemble member `i` uses noise sample `noise.sample_index + i`.
pub fn estimate_fbar(
    x: &SpectralField,
    m: &ModelSpec,
    burn_in: f64,
    horizon: f64,
    ensemble: usize,
    noise: &NoisePlan,
) -> Result<FbarEstimate> {
    estimate_fbar_with_step(x, m, burn_in, horizon, ensemble, noise, default_fast_dt(m))
}

pub fn estimate_fbar_with_step(
    x: &SpectralField,
    m: &ModelSpec,
    burn_in: f64,
    horizon: f64,
    ensemble: usize,
    noise: &NoisePlan,
    dt_fast: f64,
) -> Result<FbarEstimate> {
    if !(burn_in.is_finite() && burn_in > 0.0 && horizon.is_finite() && horizon > burn_in) {
        return Err(domain(format!(
            "need horizon > burn_in > 0, got burn_in = {burn_in}, horizon = {horizon}"
        )));
    }
    if ensemble < 2 {
        return Err(domain("an ensemble of at least 2 members is needed for standard errors"));
    }
    let n = x.basis_size();
    let cfg = StepperConfig::new(dt_fast, 1)?;
    let burn_steps = (burn_in / dt_fast).ceil() as u64;
    let total_steps = ((horizon / dt_fast).round() as u64).max(burn_steps + 1);

    let members = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let plan = noise.with_sample(noise.sample_index + i);
            let mut stepper = Stepper::new(m, n, cfg, 1.0)?;
            stepper.set_frozen_slow(x.coeffs());
            let mut stream = plan.stream();
            let mut y = vec![0.0; n];
            let mut acc = vec![0.0; stepper.collocation().grid_size()];
            // f is sampled at the start of each step, so step `s` contributes Y(s dt)
            for step in 0..total_steps {
                stepper.advance_fast(&mut y, &mut stream, plan.amplitude, step)?;
                if step >= burn_steps {
                    stepper.accumulate_reaction_grid(&mut acc);
                }
            }
            let count = (total_steps - burn_steps) as f64;
            acc.iter_mut().for_each(|a| *a /= count);
            let mut coeffs = vec![0.0; n];
            stepper.collocation().project(&acc, &mut coeffs);
            Ok(coeffs)
        })
        .collect::<Result<Vec<_>>>()?;

    let e = ensemble as f64;
    let mut mean = vec![0.0; n];
    for member in &members {
        for (acc, v) in mean.iter_mut().zip(member) {
            *acc += v / e;
        }
    }
    let standard_error = (0..n)
        .map(|k| {
            let var = members.iter().map(|mb| (mb[k] - mean[k]).powi(2)).sum::<f64>() / (e - 1.0);
            (var / e).sqrt()
        })
        .collect();
    Ok(FbarEstimate {
        value: SpectralField::new(mean)?,
        standard_error,
        burn_in: burn_steps as f64 * dt_fast,
        horizon: total_steps as f64 * dt_fast,
        ensemble,
    })
}

/// Semi-analytic `F_bar` for fast drifts `g = -kappa y + h(x)`.
///
/// The frozen invariant law is Gaussian with per-mode means `h_k(x) / (mu_k + kappa)` and
/// variances `1 / (2 (mu_k + kappa))`. A linear response returns the means directly; a
/// `tanh` response takes `E tanh(Z(xi))` pointwise by Gauss-Hermite quadrature and projects
/// the result back onto the basis.
#[derive(Debug, Clone)]
pub struct GibbsOracle {
    model: ModelSpec,
    response: Response,
    colloc: Collocation,
    shifted: Vec<f64>,
    pointwise_std: Vec<f64>,
    nodes: Vec<(f64, f64)>,
}

impl GibbsOracle {
    pub fn new(m: &ModelSpec, basis_size: usize, hermite_nodes: usize) -> Result<Self> {
        let Structure::GaussianFast { kappa, response, .. } = m.structure else {
            return Err(Error::UnsupportedModel {
                model: m.name.clone(),
                reason: "the Gaussian oracle needs a fast drift of the form -kappa y + h(x)".into(),
            });
        };
        let degree = NonZeroUsize::new(hermite_nodes)
            .ok_or_else(|| domain("Gauss-Hermite order must be positive"))?;
        let shifted: Vec<f64> =
            m.op_b.eigenvalues(basis_size)?.iter().map(|mu| mu + kappa).collect();
        let colloc = Collocation::new(m, basis_size)?;
        let p = colloc.grid_size();
        // var(xi_j) = sum_k e_k(xi_j)^2 / (2 (mu_k + kappa))
        let mut pointwise_var = vec![0.0; p];
        let mut unit = vec![0.0; basis_size];
        let mut column = vec![0.0; p];
        for (k, s) in shifted.iter().enumerate() {
            unit.iter_mut().for_each(|u| *u = 0.0);
            unit[k] = 1.0;
            colloc.to_grid(&unit, &mut column);
            for (v, e) in pointwise_var.iter_mut().zip(&column) {
                *v += e * e / (2.0 * s);
            }
        }
        let rule = GaussHermite::new(degree);
        let nodes = rule.iter().map(|&(node, weight)| (node, weight)).collect();
        Ok(Self {
            model: m.clone(),
            response,
            colloc,
            shifted,
            pointwise_std: pointwise_var.into_iter().map(f64::sqrt).collect(),
            nodes,
        })
    }

    /// Per-mode means of the frozen Gaussian law at `x`.
    pub fn fast_mean(&self, x: &SpectralField) -> Result<SpectralField> {
        let n = self.shifted.len();
        if x.basis_size() != n {
            return Err(Error::SizeMismatch { expected: n, found: x.basis_size() });
        }
        let p = self.colloc.grid_size();
        let mut x_grid = vec![0.0; p];
        let mut forcing = vec![0.0; p];
        self.colloc.to_grid(x.coeffs(), &mut x_grid);
        // g(xi, x, 0) = h(x)
        let zeros = vec![0.0; p];
        self.colloc.evaluate(self.model.g_map(), "g", &x_grid, &zeros, &mut forcing)?;
        let mut coeffs = vec![0.0; n];
        self.colloc.project(&forcing, &mut coeffs);
        for (c, s) in coeffs.iter_mut().zip(&self.shifted) {
            *c /= s;
        }
        SpectralField::new(coeffs)
    }

    /// Per-mode standard deviations `1 / sqrt(2 (mu_k + kappa))` of the frozen law.
    pub fn fast_std(&self) -> Vec<f64> {
        self.shifted.iter().map(|s| (0.5 / s).sqrt()).collect()
    }

    pub fn evaluate(&self, x: &SpectralField) -> Result<SpectralField> {
        let mean = self.fast_mean(x)?;
        match self.response {
            Response::Identity => Ok(mean),
            Response::Tanh => {
                let p = self.colloc.grid_size();
                let mut mean_grid = vec![0.0; p];
                self.colloc.to_grid(mean.coeffs(), &mut mean_grid);
                let norm = 1.0 / PI.sqrt();
                let values: Vec<f64> = mean_grid
                    .iter()
                    .zip(&self.pointwise_std)
                    .map(|(&mu, &sd)| {
                        let spread = std::f64::consts::SQRT_2 * sd;
                        norm * self
                            .nodes
                            .iter()
                            .map(|&(u, w)| w * (mu + spread * u).tanh())
                            .sum::<f64>()
                    })
                    .collect();
                let mut coeffs = vec![0.0; self.shifted.len()];
                self.colloc.project(&values, &mut coeffs);
                SpectralField::new(coeffs)
            }
        }
    }
}

/// [`GibbsOracle::evaluate`] with the default quadrature order.
pub fn gibbs_fbar_oracle(x: &SpectralField, m: &ModelSpec) -> Result<SpectralField> {
    GibbsOracle::new(m, x.basis_size(), DEFAULT_HERMITE_NODES)?.evaluate(x)
}

/// Exponential Euler for the deterministic averaged equation. Returns `(t, X_bar(t))` at
/// every step, starting with `(0, x0)`.
pub fn solve_averaged(
    x0: &SpectralField,
    mut fbar: impl FnMut(&SpectralField) -> Result<SpectralField>,
    op_a: &OperatorSpec,
    horizon: f64,
    dt: f64,
) -> Result<Vec<(f64, SpectralField)>> {
    let steps = crate::simulator::step_count(horizon, dt)?;
    let propagator = SlowPropagator::new(op_a, x0.basis_size(), dt)?;
    let mut x = x0.clone();
    let mut path = Vec::with_capacity(steps as usize + 1);
    path.push((0.0, x.clone()));
    for step in 0..steps {
        let drift = fbar(&x)?;
        x.ensure_same_size(&drift)?;
        propagator.advance(x.coeffs_mut(), drift.coeffs(), step)?;
        path.push(((step + 1) as f64 * dt, x.clone()));
    }
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingVerdict {
    Confirmed,
    NotConfirmed,
    /// Too few grid points above the Monte Carlo noise floor.
    Inconclusive,
}

/// Decay of `|F~(x, y, t)|_H = |E F(x, Y_x(t, y)) - F_bar(x)|_H` along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub times: Vec<f64>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Whether each point entered the fit (estimate above twice its standard error).
    pub fitted: Vec<bool>,
    pub decay_rate: Option<f64>,
    /// `C` in `|F~| ~ C e^{-c t} (1 + |x| + |y|)`.
    pub amplitude: Option<f64>,
    pub r_squared: Option<f64>,
    /// Log-scale residuals of the fitted points.
    pub residuals: Vec<f64>,
    pub verdict: MixingVerdict,
}

/// [`mixing_diagnostic_with`] using the Gaussian oracle when the model has one, otherwise
/// an ergodic estimate over 100 relaxation times.
pub fn mixing_diagnostic(
    x: &SpectralField,
    y: &SpectralField,
    m: &ModelSpec,
    time_grid: &[f64],
    ensemble: usize,
    noise: &NoisePlan,
) -> Result<MixingReport> {
    let reference = match gibbs_fbar_oracle(x, m) {
        Ok(value) => value,
        Err(Error::UnsupportedModel { .. }) => {
            let burn_in = default_burn_in(m);
            let relax = 1.0 / (m.op_b.smallest() + m.contraction_bonus);
            estimate_fbar(
                x,
                m,
                burn_in,
                burn_in + 100.0 * relax,
                16,
                &noise.with_sample(u64::MAX / 2),
            )?
            .value
        }
        Err(err) => return Err(err),
    };
    mixing_diagnostic_with(
        x,
        y,
        m,
        time_grid,
        ensemble,
        noise,
        &reference,
        0.02 / m.op_b.smallest(),
    )
}

/// Monte Carlo estimate of `|F~(x, y, t)|_H` on `time_grid` (times are snapped to
/// multiples of `dt_fast`) and a log-linear fit `|F~| ~ A e^{-c t}` over the points that
/// clear twice their standard error.
#[allow(clippy::too_many_arguments)]
pub fn mixing_diagnostic_with(
    x: &SpectralField,
    y: &SpectralField,
    m: &ModelSpec,
    time_grid: &[f64],
    ensemble: usize,
    noise: &NoisePlan,
    reference: &SpectralField,
    dt_fast: f64,
) -> Result<MixingReport> {
    x.ensure_same_size(y)?;
    x.ensure_same_size(reference)?;
    if time_grid.is_empty() || time_grid.windows(2).any(|w| w[1] <= w[0]) || time_grid[0] < 0.0 {
        return Err(domain("time grid must be non-empty, non-negative and increasing"));
    }
    if ensemble < 2 {
        return Err(domain("mixing diagnostic needs an ensemble of at least 2"));
    }
    let n = x.basis_size();
    let grid_steps: Vec<u64> = time_grid.iter().map(|t| (t / dt_fast).round() as u64).collect();
    if grid_steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("time grid is finer than the fast step"));
    }
    let cfg = StepperConfig::new(dt_fast, 1)?;
    let last = *grid_steps.last().expect("non-empty");

    // member -> per grid point F(x, Y(t)) - F_bar(x)
    let members = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<f64>>> {
            let plan = noise.with_sample(noise.sample_index + i);
            let mut stepper = Stepper::new(m, n, cfg, 1.0)?;
            stepper.set_frozen_slow(x.coeffs());
            let mut stream = plan.stream();
            let mut state = y.coeffs().to_vec();
            let mut out = Vec::with_capacity(grid_steps.len());
            let mut next = 0;
            let mut grid = vec![0.0; stepper.collocation().grid_size()];
            let mut coeffs = vec![0.0; n];
            for step in 0..=last {
                // after `step` steps the state sits at time step * dt
                stepper.advance_fast(&mut state, &mut stream, plan.amplitude, step)?;
                while next < grid_steps.len() && grid_steps[next] == step {
                    // reaction at the state *before* this step's update
                    grid.iter_mut().for_each(|g| *g = 0.0);
                    stepper.accumulate_reaction_grid(&mut grid);
                    stepper.collocation().project(&grid, &mut coeffs);
                    out.push(coeffs.iter().zip(reference.coeffs()).map(|(a, b)| a - b).collect());
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let e = ensemble as f64;
    let mut estimates = Vec::with_capacity(grid_steps.len());
    let mut standard_errors = Vec::with_capacity(grid_steps.len());
    for g in 0..grid_steps.len() {
        let mut mean = vec![0.0; n];
        for member in &members {
            for (acc, v) in mean.iter_mut().zip(&member[g]) {
                *acc += v / e;
            }
        }
        let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        // spread of each member projected on the direction of the mean
        let se = if norm > 0.0 {
            let proj: Vec<f64> = members
                .iter()
                .map(|mb| mb[g].iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>() / norm)
                .collect();
            let pm = proj.iter().sum::<f64>() / e;
            (proj.iter().map(|p| (p - pm).powi(2)).sum::<f64>() / (e - 1.0) / e).sqrt()
        } else {
            0.0
        };
        estimates.push(norm);
        standard_errors.push(se);
    }

    let times: Vec<f64> = grid_steps.iter().map(|&s| s as f64 * dt_fast).collect();
    let fitted: Vec<bool> =
        estimates.iter().zip(&standard_errors).map(|(&v, &se)| v > 0.0 && v > 2.0 * se).collect();
    let (ts, logs): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&estimates)
        .zip(&fitted)
        .filter(|(_, &use_it)| use_it)
        .map(|((&t, &v), _)| (t, v.ln()))
        .unzip();
    let mut report = MixingReport {
        times,
        estimates,
        standard_errors,
        fitted,
        decay_rate: None,
        amplitude: None,
        r_squared: None,
        residuals: Vec::new(),
        verdict: MixingVerdict::Inconclusive,
    };
    if ts.len() < 3 {
        return Ok(report);
    }
    let fit = weighted_line_fit(&ts, &logs, &vec![1.0; ts.len()])?;
    let rate = -fit.slope;
    report.residuals =
        ts.iter().zip(&logs).map(|(t, l)| l - fit.intercept - fit.slope * t).collect();
    report.decay_rate = Some(rate);
    report.amplitude = Some(fit.intercept.exp() / (1.0 + x.norm() + y.norm()));
    report.r_squared = Some(fit.r_squared);
    report.verdict = if rate > 0.0 && fit.r_squared >= 0.9 {
        MixingVerdict::Confirmed
    } else {
        MixingVerdict::NotConfirmed
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{nemytskii_f, Forcing};
    use approx::assert_relative_eq;

    #[test]
    fn y_independent_reaction_is_returned_exactly() {
        let m = ModelSpec::custom("x-only", |_, x, _| x.sin(), |_, _, y| -y);
        let x = SpectralField::power_law(8, 1.0, 2.0).unwrap();
        let est = estimate_fbar(&x, &m, 0.2, 1.0, 4, &NoisePlan::new(1, 0)).unwrap();
        let exact = nemytskii_f(&m, &x, &SpectralField::zeros(8)).unwrap();
        assert!(est.value.distance(&exact).unwrap() < 1e-12);
        assert!(est.standard_error.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn odd_model_averages_to_zero() {
        let m = ModelSpec::gaussian_fast("odd", 1.0, Forcing::Zero, Response::Tanh).unwrap();
        let x = SpectralField::power_law(8, 1.0, 1.0).unwrap();
        let est = estimate_fbar(&x, &m, 0.5, 10.0, 8, &NoisePlan::new(9, 0)).unwrap();
        assert!(est.value.norm() < 3.0 * est.aggregate_se(), "{:?}", est);
        assert!(gibbs_fbar_oracle(&x, &m).unwrap().norm() < 1e-14);
    }

    #[test]
    fn estimator_rejects_bad_windows() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let x = SpectralField::zeros(4);
        let plan = NoisePlan::new(1, 0);
        assert!(estimate_fbar(&x, &m, 1.0, 1.0, 4, &plan).is_err());
        assert!(estimate_fbar(&x, &m, 0.0, 1.0, 4, &plan).is_err());
        assert!(estimate_fbar(&x, &m, 0.1, 1.0, 1, &plan).is_err());
    }

    #[test]
    fn linear_oracle_spot_value() {
        let m = ModelSpec::linear(1.0).unwrap();
        let x = SpectralField::unit(16, 1).unwrap();
        let fbar = gibbs_fbar_oracle(&x, &m).unwrap();
        assert_relative_eq!(fbar.mode(1), 1.0 / (PI * PI + 1.0), epsilon = 1e-13);
        assert!(fbar.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn tanh_oracle_is_odd_and_converged() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let zero = SpectralField::zeros(16);
        assert!(gibbs_fbar_oracle(&zero, &m).unwrap().norm() < 1e-15);
        let x = SpectralField::power_law(16, 2.0, 1.0).unwrap();
        let coarse = GibbsOracle::new(&m, 16, 40).unwrap().evaluate(&x).unwrap();
        let fine = GibbsOracle::new(&m, 16, 80).unwrap().evaluate(&x).unwrap();
        assert!(coarse.distance(&fine).unwrap() < 1e-10);
        let flipped = gibbs_fbar_oracle(&x.scale(-1.0), &m).unwrap();
        let direct = gibbs_fbar_oracle(&x, &m).unwrap();
        assert!(flipped.add(&direct).unwrap().norm() < 1e-14);
    }

    #[test]
    fn tanh_oracle_matches_brute_force_expectation() {
        // Oracle for E tanh(Z): midpoint rule on a wide window of the normal density.
        let m = ModelSpec::tanh(1.0).unwrap();
        let n = 8;
        let x = SpectralField::power_law(n, 1.5, 2.0).unwrap();
        let oracle = GibbsOracle::new(&m, n, 64).unwrap();
        let mean = oracle.fast_mean(&x).unwrap();
        let colloc = Collocation::new(&m, n).unwrap();
        let mut mean_grid = vec![0.0; n];
        colloc.to_grid(mean.coeffs(), &mut mean_grid);
        let shifted: Vec<f64> = (1..=n).map(|k| PI * PI * (k * k) as f64 + 1.0).collect();
        let values: Vec<f64> = colloc
            .points()
            .iter()
            .zip(&mean_grid)
            .map(|(&xi, &mu)| {
                let var: f64 = shifted
                    .iter()
                    .enumerate()
                    .map(|(k, s)| 2.0 * ((k + 1) as f64 * PI * xi).sin().powi(2) / (2.0 * s))
                    .sum();
                let sd = var.sqrt();
                let cells = 20_000;
                let width = 16.0 / cells as f64;
                (0..cells)
                    .map(|i| {
                        let z = -8.0 + (i as f64 + 0.5) * width;
                        (-0.5 * z * z).exp() / (2.0 * PI).sqrt() * (mu + sd * z).tanh() * width
                    })
                    .sum()
            })
            .collect();
        let mut brute = vec![0.0; n];
        colloc.project(&values, &mut brute);
        let fast = oracle.evaluate(&x).unwrap();
        for (a, b) in fast.coeffs().iter().zip(&brute) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn oracle_rejects_general_models() {
        let m = ModelSpec::custom("cubic", |_, _, y| y, |_, _, y| -y * y * y);
        let x = SpectralField::zeros(4);
        assert!(matches!(gibbs_fbar_oracle(&x, &m), Err(Error::UnsupportedModel { .. })));
    }

    #[test]
    fn averaged_equation_without_drift_is_the_semigroup() {
        let op = OperatorSpec::laplacian();
        let x0 = SpectralField::power_law(8, 1.0, 1.0).unwrap();
        let path =
            solve_averaged(&x0, |x| Ok(SpectralField::zeros(x.basis_size())), &op, 0.3, 0.01)
                .unwrap();
        let (t, last) = path.last().unwrap();
        let exact = crate::spectral::apply_semigroup(&x0, &op, *t).unwrap();
        assert!(last.distance(&exact).unwrap() < 1e-14);
    }

    #[test]
    fn averaged_equation_with_constant_drift() {
        // x_1(t) = x_1 e^{-pi^2 t} + c (1 - e^{-pi^2 t}) / pi^2
        let op = OperatorSpec::laplacian();
        let c = 0.7;
        let x0 = SpectralField::new(vec![0.4, 0.0, 0.0]).unwrap();
        let drift = SpectralField::new(vec![c, 0.0, 0.0]).unwrap();
        let path = solve_averaged(&x0, |_| Ok(drift.clone()), &op, 0.5, 1.0 / 64.0).unwrap();
        let l = PI * PI;
        for (t, x) in &path {
            let exact = 0.4 * (-l * t).exp() + c * (1.0 - (-l * t).exp()) / l;
            assert!((x.mode(1) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn averaged_equation_converges_at_first_order() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let n = 16;
        let oracle = GibbsOracle::new(&m, n, 48).unwrap();
        let x0 = SpectralField::power_law(n, 3.0, 3.0).unwrap();
        let solve = |dt: f64| {
            solve_averaged(&x0, |x| oracle.evaluate(x), &m.op_a, 0.5, dt).unwrap().pop().unwrap().1
        };
        let reference = solve(1.0 / 1024.0);
        let coarse = solve(1.0 / 64.0).distance(&reference).unwrap();
        let fine = solve(1.0 / 256.0).distance(&reference).unwrap();
        // errors vs a 4x-refined reference: (h - h/16) / (h/4 - h/16) = 5 at first order
        let ratio = coarse / fine;
        assert!((3.5..6.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn mixing_at_time_zero_is_exact() {
        let m = ModelSpec::linear(1.0).unwrap();
        let x = SpectralField::unit(8, 1).unwrap();
        let y = SpectralField::power_law(8, 2.0, 1.0).unwrap();
        let reference = gibbs_fbar_oracle(&x, &m).unwrap();
        let report = mixing_diagnostic_with(
            &x,
            &y,
            &m,
            &[0.0, 0.05],
            4,
            &NoisePlan::new(3, 0),
            &reference,
            0.01,
        )
        .unwrap();
        let exact = nemytskii_f(&m, &x, &y).unwrap().distance(&reference).unwrap();
        assert_relative_eq!(report.estimates[0], exact, epsilon = 1e-12);
        assert_eq!(report.standard_errors[0], 0.0);
        assert!(mixing_diagnostic(&x, &y, &m, &[0.2, 0.1], 4, &NoisePlan::new(3, 0)).is_err());
    }
}
