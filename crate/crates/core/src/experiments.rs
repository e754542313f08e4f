//! Monte Carlo ladders over `eps` for the strong error, the weak error and the gap to the
//! block-frozen auxiliary process, plus log-log order fits.
//!
//! Every `(eps, sample)` cell is an independent work item. Sample `i` always uses noise
//! stream `i`, so results do not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{
    default_burn_in, estimate_fbar, solve_averaged, GibbsOracle, DEFAULT_HERMITE_NODES,
};
use crate::error::{domain, Error, Result};
use crate::model::{ModelSpec, Structure};
use crate::noise::NoisePlan;
use crate::regression::weighted_line_fit;
use crate::simulator::{
    default_substeps, simulate_final, simulate_hasminskii_pair, step_count, StepperConfig,
};
use crate::spectral::SpectralField;

/// Largest tolerated fraction of non-finite samples per `eps`.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum SubstepPolicy {
    /// `ceil(10 h mu_1 / eps)`: at most a tenth of the slowest fast relaxation time.
    Auto,
    Fixed(usize),
}

impl SubstepPolicy {
    pub fn substeps(self, dt_macro: f64, epsilon: f64, mu_1: f64) -> usize {
        match self {
            SubstepPolicy::Auto => default_substeps(dt_macro, epsilon, mu_1),
            SubstepPolicy::Fixed(m) => m,
        }
    }
}

/// Source of `F_bar` for the reference solution `X_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceFbar {
    /// Gaussian oracle when the model admits one, otherwise an ergodic estimate.
    Auto,
    Oracle,
    /// Ergodic estimate over 100 relaxation times with the given ensemble size.
    Estimated {
        ensemble: usize,
    },
}

/// Coefficients `amplitude * k^{-decay}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub amplitude: f64,
    pub decay: f64,
}

impl PowerLaw {
    pub fn field(&self, n: usize) -> Result<SpectralField> {
        SpectralField::power_law(n, self.amplitude, self.decay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub basis_size: usize,
    pub horizon: f64,
    pub dt_macro: f64,
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub substeps: SubstepPolicy,
    pub x0: PowerLaw,
    pub y0: PowerLaw,
    pub reference: ReferenceFbar,
}

impl LadderConfig {
    /// `N = 32`, `T = 0.5`, `h = 1/256`, `eps = 2^-3 .. 2^-9`, `M = 200`, `x0_k = k^-3`.
    pub fn desk_strong() -> Self {
        Self {
            basis_size: 32,
            horizon: 0.5,
            dt_macro: 1.0 / 256.0,
            epsilons: (3..=9).map(|p| 2f64.powi(-p)).collect(),
            samples: 200,
            seed: 20240611,
            substeps: SubstepPolicy::Auto,
            x0: PowerLaw { amplitude: 1.0, decay: 3.0 },
            y0: PowerLaw { amplitude: 0.0, decay: 1.0 },
            reference: ReferenceFbar::Auto,
        }
    }

    /// The strong setting with `eps = 2^-2 .. 2^-6` and `M = 4000`.
    pub fn desk_weak() -> Self {
        Self {
            epsilons: (2..=6).map(|p| 2f64.powi(-p)).collect(),
            samples: 4000,
            ..Self::desk_strong()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.basis_size == 0 {
            return Err(domain("basis size must be positive"));
        }
        if self.samples < 2 {
            return Err(domain("at least 2 samples per eps are needed for standard errors"));
        }
        if self.epsilons.is_empty() {
            return Err(domain("eps ladder is empty"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(domain("eps values must be positive and finite"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(domain("eps ladder must be strictly decreasing"));
        }
        if let SubstepPolicy::Fixed(0) = self.substeps {
            return Err(domain("substep count must be positive"));
        }
        if let ReferenceFbar::Estimated { ensemble } = self.reference {
            if ensemble < 2 {
                return Err(domain("reference F_bar ensemble must have at least 2 members"));
            }
        }
        for (name, law) in [("x0", self.x0), ("y0", self.y0)] {
            if !law.amplitude.is_finite() || !law.decay.is_finite() {
                return Err(domain(format!("{name} power law must be finite")));
            }
        }
        step_count(self.horizon, self.dt_macro)?;
        Ok(())
    }

    fn stepper(&self, m: &ModelSpec, epsilon: f64, dt: f64) -> Result<StepperConfig> {
        let substeps = self.substeps.substeps(dt, epsilon, m.op_b.smallest());
        StepperConfig::new(dt, substeps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Strong,
    Weak,
    HasminskiiGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub epsilon: f64,
    pub error: f64,
    pub standard_error: f64,
    /// Samples that entered the estimate.
    pub samples: usize,
    /// Samples dropped because the trajectory blew up.
    pub dropped: usize,
    /// Row left out of order fits (error below twice its standard error).
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub kind: ErrorKind,
    pub model: String,
    pub horizon: f64,
    pub basis_size: usize,
    pub seed: u64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn usable_rows(&self) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(|r| !r.excluded && r.error > 0.0)
    }

    pub fn row(&self, epsilon: f64) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.epsilon == epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_confidence_halfwidth: f64,
    pub rows_used: usize,
}

/// Weighted least squares of `ln error` on `ln eps` over the usable rows.
///
/// The standard error of `ln error` is `se / error` to first order, so rows are weighted
/// by `(error / se)^2`; if any usable row has `se = 0` all weights are equal.
pub fn fit_order(table: &ErrorTable) -> Result<OrderFit> {
    let rows: Vec<&ErrorRow> = table.usable_rows().collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientData { usable: rows.len(), required: 3 });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
    let weights: Vec<f64> = if rows.iter().any(|r| r.standard_error == 0.0) {
        vec![1.0; rows.len()]
    } else {
        rows.iter().map(|r| (r.error / r.standard_error).powi(2)).collect()
    };
    let fit = weighted_line_fit(&xs, &ys, &weights)?;
    Ok(OrderFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        slope_confidence_halfwidth: fit.slope_halfwidth,
        rows_used: rows.len(),
    })
}

/// Bounded smooth functionals for the weak error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctional {
    /// `tanh(<x, e_1>)`
    TanhFirstMode,
    /// `exp(-|x|^2)`
    GaussianNorm,
    Constant(f64),
}

impl TestFunctional {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "tanh_mode1" | "phi1" => Ok(Self::TanhFirstMode),
            "gaussian_norm" | "phi2" => Ok(Self::GaussianNorm),
            "constant" => Ok(Self::Constant(1.0)),
            other => Err(domain(format!(
                "unknown test functional {other:?}; expected tanh_mode1, gaussian_norm or constant"
            ))),
        }
    }

    pub fn evaluate(&self, x: &SpectralField) -> f64 {
        match *self {
            Self::TanhFirstMode => x.mode(1).tanh(),
            Self::GaussianNorm => (-x.norm_squared()).exp(),
            Self::Constant(c) => c,
        }
    }
}

/// `X_bar(T)` from `x0` with the configured reference `F_bar` and step `dt`.
pub fn reference_solution(
    m: &ModelSpec,
    cfg: &LadderConfig,
    x0: &SpectralField,
    dt: f64,
) -> Result<SpectralField> {
    let use_oracle = match cfg.reference {
        ReferenceFbar::Oracle => true,
        ReferenceFbar::Auto => matches!(m.structure, Structure::GaussianFast { .. }),
        ReferenceFbar::Estimated { .. } => false,
    };
    let path = if use_oracle {
        let oracle = GibbsOracle::new(m, cfg.basis_size, DEFAULT_HERMITE_NODES)?;
        solve_averaged(x0, |x| oracle.evaluate(x), &m.op_a, cfg.horizon, dt)?
    } else {
        let ensemble = match cfg.reference {
            ReferenceFbar::Estimated { ensemble } => ensemble,
            _ => 16,
        };
        let burn_in = default_burn_in(m);
        let horizon = burn_in + 100.0 / (m.op_b.smallest() + m.contraction_bonus);
        // a stream family of its own, shared by every evaluation so X_bar is deterministic
        let plan = NoisePlan::new(cfg.seed ^ 0x5eed_f0a1_7e11_0001, 0);
        solve_averaged(
            x0,
            |x| Ok(estimate_fbar(x, m, burn_in, horizon, ensemble, &plan)?.value),
            &m.op_a,
            cfg.horizon,
            dt,
        )?
    };
    Ok(path.last().expect("path holds the initial state").1.clone())
}

struct CellStats {
    sum: f64,
    sum_sq: f64,
    count: usize,
    dropped: usize,
}

fn summarize(values: impl Iterator<Item = Option<f64>>) -> CellStats {
    let mut stats = CellStats { sum: 0.0, sum_sq: 0.0, count: 0, dropped: 0 };
    for v in values {
        match v {
            Some(v) if v.is_finite() => {
                stats.sum += v;
                stats.sum_sq += v * v;
                stats.count += 1;
            }
            _ => stats.dropped += 1,
        }
    }
    stats
}

impl CellStats {
    fn mean_and_se(&self, epsilon: f64) -> Result<(f64, f64)> {
        let total = self.count + self.dropped;
        if self.dropped as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
            return Err(Error::BlowUp(format!(
                "{} of {total} samples at eps = {epsilon} were non-finite",
                self.dropped
            )));
        }
        if self.count < 2 {
            return Err(Error::InsufficientData { usable: self.count, required: 2 });
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }
}

/// Runs `sample(eps_index, sample_index)` on every cell in parallel and returns the
/// per-eps values in `(eps, sample)` order. Blow-ups become `None`.
fn run_cells(
    cfg: &LadderConfig,
    sample: impl Fn(usize, u64) -> Result<f64> + Sync,
) -> Result<Vec<Vec<Option<f64>>>> {
    let cells: Vec<(usize, u64)> = (0..cfg.epsilons.len())
        .flat_map(|e| (0..cfg.samples as u64).map(move |s| (e, s)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(e, s)| match sample(e, s) {
            Ok(v) => Ok(Some(v)),
            Err(Error::BlowUp(_)) => Ok(None),
            Err(err) => Err(err),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.chunks(cfg.samples).map(<[_]>::to_vec).collect())
}

/// Per eps, the Monte Carlo mean of `|X^eps(T) - X_bar(T)|_H`.
pub fn strong_error_ladder(m: &ModelSpec, cfg: &LadderConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let x0 = cfg.x0.field(cfg.basis_size)?;
    let y0 = cfg.y0.field(cfg.basis_size)?;
    let reference = reference_solution(m, cfg, &x0, cfg.dt_macro)?;
    let steppers = cfg
        .epsilons
        .iter()
        .map(|&e| cfg.stepper(m, e, cfg.dt_macro))
        .collect::<Result<Vec<_>>>()?;
    let values = run_cells(cfg, |e, s| {
        let eps = cfg.epsilons[e];
        let plan = NoisePlan::new(cfg.seed, s);
        let end = simulate_final(&x0, &y0, eps, cfg.horizon, m, &steppers[e], &plan)?;
        end.x.distance(&reference)
    })?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for (&eps, vals) in cfg.epsilons.iter().zip(&values) {
        let stats = summarize(vals.iter().copied());
        let (error, se) = stats.mean_and_se(eps)?;
        rows.push(ErrorRow {
            epsilon: eps,
            error,
            standard_error: se,
            samples: stats.count,
            dropped: stats.dropped,
            excluded: false,
        });
    }
    Ok(table(ErrorKind::Strong, m, cfg, rows))
}

/// Per eps, `|mean phi(X^eps(T)) - phi(X_bar(T))|`. Rows below twice their standard error
/// are marked excluded.
pub fn weak_error_ladder(
    m: &ModelSpec,
    cfg: &LadderConfig,
    phi: TestFunctional,
) -> Result<ErrorTable> {
    cfg.validate()?;
    let x0 = cfg.x0.field(cfg.basis_size)?;
    let y0 = cfg.y0.field(cfg.basis_size)?;
    let target = phi.evaluate(&reference_solution(m, cfg, &x0, cfg.dt_macro)?);
    let steppers = cfg
        .epsilons
        .iter()
        .map(|&e| cfg.stepper(m, e, cfg.dt_macro))
        .collect::<Result<Vec<_>>>()?;
    let values = run_cells(cfg, |e, s| {
        let eps = cfg.epsilons[e];
        let plan = NoisePlan::new(cfg.seed, s);
        let end = simulate_final(&x0, &y0, eps, cfg.horizon, m, &steppers[e], &plan)?;
        Ok(phi.evaluate(&end.x))
    })?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for (&eps, vals) in cfg.epsilons.iter().zip(&values) {
        let stats = summarize(vals.iter().copied());
        let (mean, se) = stats.mean_and_se(eps)?;
        let error = (mean - target).abs();
        rows.push(ErrorRow {
            epsilon: eps,
            error,
            standard_error: se,
            samples: stats.count,
            dropped: stats.dropped,
            excluded: error < 2.0 * se || error == 0.0,
        });
    }
    Ok(table(ErrorKind::Weak, m, cfg, rows))
}

/// Freezing block `delta = sqrt(eps)` aligned to the macro grid, and the macro step used.
///
/// The step is halved from `cfg.dt_macro` until it is at most `delta / 8`; `delta` is then
/// rounded to the nearest positive multiple of it.
pub fn hasminskii_blocks(epsilon: f64, dt_macro: f64) -> (f64, u64) {
    let delta = epsilon.sqrt();
    let mut h = dt_macro;
    while h > delta / 8.0 {
        h /= 2.0;
    }
    let blocks = ((delta / h).round() as u64).max(1);
    (h, blocks)
}

/// Per eps, the Monte Carlo mean of `|X^eps(T) - X~^eps(T)|_H`, where `X~` is driven by the
/// same noise with its slow input frozen on blocks of length `sqrt(eps)`.
pub fn hasminskii_gap_ladder(m: &ModelSpec, cfg: &LadderConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let x0 = cfg.x0.field(cfg.basis_size)?;
    let y0 = cfg.y0.field(cfg.basis_size)?;
    let setups = cfg
        .epsilons
        .iter()
        .map(|&e| {
            let (h, blocks) = hasminskii_blocks(e, cfg.dt_macro);
            Ok((cfg.stepper(m, e, h)?, blocks))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = run_cells(cfg, |e, s| {
        let eps = cfg.epsilons[e];
        let (stepper, blocks) = &setups[e];
        let plan = NoisePlan::new(cfg.seed, s);
        let (orig, aux) =
            simulate_hasminskii_pair(&x0, &y0, eps, cfg.horizon, *blocks, m, stepper, &plan)?;
        orig.x.distance(&aux.x)
    })?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for (&eps, vals) in cfg.epsilons.iter().zip(&values) {
        let stats = summarize(vals.iter().copied());
        let (error, se) = stats.mean_and_se(eps)?;
        rows.push(ErrorRow {
            epsilon: eps,
            error,
            standard_error: se,
            samples: stats.count,
            dropped: stats.dropped,
            excluded: false,
        });
    }
    Ok(table(ErrorKind::HasminskiiGap, m, cfg, rows))
}

fn table(kind: ErrorKind, m: &ModelSpec, cfg: &LadderConfig, rows: Vec<ErrorRow>) -> ErrorTable {
    ErrorTable {
        kind,
        model: m.name.clone(),
        horizon: cfg.horizon,
        basis_size: cfg.basis_size,
        seed: cfg.seed,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(rows: impl IntoIterator<Item = (f64, f64)>) -> ErrorTable {
        ErrorTable {
            kind: ErrorKind::Strong,
            model: "fixture".into(),
            horizon: 1.0,
            basis_size: 1,
            seed: 0,
            rows: rows
                .into_iter()
                .map(|(epsilon, error)| ErrorRow {
                    epsilon,
                    error,
                    standard_error: 0.0,
                    samples: 1,
                    dropped: 0,
                    excluded: false,
                })
                .collect(),
        }
    }

    fn ladder() -> Vec<f64> {
        (3..=9).map(|p| 2f64.powi(-p)).collect()
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        for (c, order) in [(0.7, 0.5), (0.3, 1.0), (2.0, 1.0), (5.0, 0.5), (1.0, 0.5)] {
            let fit = fit_order(&synthetic(ladder().into_iter().map(|e| (e, c * e.powf(order)))))
                .unwrap();
            assert_relative_eq!(fit.slope, order, epsilon = 1e-12);
            assert_relative_eq!(fit.intercept, f64::ln(c), epsilon = 1e-12);
            assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jittered_power_law_slope() {
        use rand_chacha::ChaCha8Rng;
        use rand_core::{RngCore, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fit = fit_order(&synthetic(ladder().into_iter().map(|e| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (e, 0.7 * e.sqrt() * (1.0 + 0.05 * (2.0 * u - 1.0)))
        })))
        .unwrap();
        assert!((fit.slope - 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn too_few_rows_is_insufficient_data() {
        let mut t = synthetic([(0.5, 1.0), (0.25, 0.5), (0.125, 0.25)]);
        t.rows[0].excluded = true;
        assert!(matches!(fit_order(&t), Err(Error::InsufficientData { usable: 2, required: 3 })));
    }

    #[test]
    fn standard_errors_weight_the_fit() {
        let mut t = synthetic([(0.5, 1.0), (0.25, 0.5), (0.125, 0.25), (0.0625, 0.5)]);
        for (r, se) in t.rows.iter_mut().zip([0.01, 0.01, 0.01, 10.0]) {
            r.standard_error = se;
        }
        assert!((fit_order(&t).unwrap().slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn blocks_are_aligned_and_fine_enough() {
        for p in 3..=9 {
            let eps = 2f64.powi(-p);
            let (h, blocks) = hasminskii_blocks(eps, 1.0 / 256.0);
            assert!(h <= eps.sqrt() / 8.0);
            assert!((blocks as f64 * h - eps.sqrt()).abs() <= h / 2.0);
            assert_eq!(h, 1.0 / 256.0);
        }
        let (h, blocks) = hasminskii_blocks(1e-6, 1.0 / 256.0);
        assert!(h <= 1e-3 / 8.0);
        assert_eq!(blocks, (1e-3 / h).round() as u64);
    }

    #[test]
    fn config_validation() {
        let mut cfg = LadderConfig::desk_strong();
        cfg.validate().unwrap();
        cfg.epsilons = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());
        cfg = LadderConfig::desk_strong();
        cfg.samples = 1;
        assert!(cfg.validate().is_err());
        cfg = LadderConfig::desk_strong();
        cfg.dt_macro = 0.3;
        assert!(cfg.validate().is_err());
    }

    fn small(samples: usize) -> LadderConfig {
        LadderConfig {
            basis_size: 8,
            horizon: 0.25,
            dt_macro: 1.0 / 64.0,
            epsilons: vec![0.25, 0.0625, 1.0 / 64.0],
            samples,
            ..LadderConfig::desk_strong()
        }
    }

    #[test]
    fn constant_functional_has_zero_weak_error() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let t = weak_error_ladder(&m, &small(4), TestFunctional::Constant(0.3)).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0 && r.excluded));
        assert!(matches!(fit_order(&t), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn zero_model_has_zero_hasminskii_gap() {
        let t = hasminskii_gap_ladder(&ModelSpec::zero(), &small(4)).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0 && r.standard_error == 0.0));
    }

    #[test]
    fn ladders_are_reproducible() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let cfg = small(6);
        assert_eq!(strong_error_ladder(&m, &cfg).unwrap(), strong_error_ladder(&m, &cfg).unwrap());
        let a = hasminskii_gap_ladder(&m, &cfg).unwrap();
        assert_eq!(a, hasminskii_gap_ladder(&m, &cfg).unwrap());
    }

    #[test]
    fn estimated_reference_tracks_the_oracle() {
        let m = ModelSpec::tanh(1.0).unwrap();
        let mut cfg = small(2);
        cfg.x0.amplitude = 3.0;
        let x0 = cfg.x0.field(8).unwrap();
        let oracle = reference_solution(&m, &cfg, &x0, cfg.dt_macro).unwrap();
        cfg.reference = ReferenceFbar::Estimated { ensemble: 4 };
        let estimated = reference_solution(&m, &cfg, &x0, cfg.dt_macro).unwrap();
        assert!(oracle.distance(&estimated).unwrap() < 1e-2 * oracle.norm().max(1e-3));
    }

    #[test]
    fn test_functionals() {
        let x = SpectralField::new(vec![0.5, 1.0]).unwrap();
        assert_relative_eq!(TestFunctional::TanhFirstMode.evaluate(&x), 0.5f64.tanh());
        assert_relative_eq!(TestFunctional::GaussianNorm.evaluate(&x), (-1.25f64).exp());
        assert!(TestFunctional::by_name("nope").is_err());
    }
}
