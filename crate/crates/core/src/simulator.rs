//! Time integration of the slow-fast system
//!
//! ```text
//! dX = (A X + F(X, Y)) dt
//! dY = (1/eps) (B Y + G(X, Y)) dt + (1/sqrt(eps)) dW
//! ```
//!
//! on the Galerkin space of the first `N` sine modes.
//!
//! One macro step of size `h` freezes the slow state, advances the fast state through
//! `M` substeps in its intrinsic time `tau = (h / M) / eps` with the linear part and the
//! additive noise integrated exactly per mode ([`ou_update`]), and then advances the slow
//! state by exponential Euler using the mean of `F` over the substeps.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{Collocation, ModelSpec};
use crate::noise::{Channel, GaussianStream, NoisePlan};
use crate::spectral::{OperatorSpec, SpectralField};

/// Exact solution of `dy = (-mu y + drift) dt + dW` over time `tau` with frozen drift.
pub fn ou_update(y_k: f64, mu_k: f64, drift_k: f64, tau: f64, gaussian: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(domain(format!("OU step needs tau > 0, got {tau}")));
    }
    if !(mu_k.is_finite() && mu_k > 0.0) {
        return Err(domain(format!("OU step needs mu > 0, got {mu_k}")));
    }
    let c = OuCoefficients::single(mu_k, tau);
    Ok(c.decay * y_k + c.gain * drift_k + c.spread * gaussian)
}

#[derive(Debug, Clone, Copy)]
struct OuCoefficients {
    decay: f64,
    gain: f64,
    spread: f64,
}

impl OuCoefficients {
    fn single(mu: f64, tau: f64) -> Self {
        // expm1 keeps gain and spread accurate when mu * tau is tiny
        let one_minus_decay = -(-mu * tau).exp_m1();
        let one_minus_decay_sq = -(-2.0 * mu * tau).exp_m1();
        Self {
            decay: (-mu * tau).exp(),
            gain: one_minus_decay / mu,
            spread: (one_minus_decay_sq / (2.0 * mu)).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ExponentialEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt_macro: f64,
    pub micro_substeps: usize,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt_macro: f64, micro_substeps: usize) -> Result<Self> {
        let cfg = Self { dt_macro, micro_substeps, scheme: Scheme::ExponentialEuler };
        cfg.validate()?;
        Ok(cfg)
    }

    /// At least ten substeps per fast relaxation time `eps / mu_1`.
    pub fn for_epsilon(dt_macro: f64, epsilon: f64, mu_1: f64) -> Result<Self> {
        Self::new(dt_macro, default_substeps(dt_macro, epsilon, mu_1))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_macro.is_finite() && self.dt_macro > 0.0) {
            return Err(domain(format!("macro step must be > 0, got {}", self.dt_macro)));
        }
        if self.micro_substeps == 0 {
            return Err(domain("micro_substeps must be >= 1"));
        }
        Ok(())
    }
}

/// `ceil(10 h mu_1 / eps)`, never below one.
pub fn default_substeps(dt_macro: f64, epsilon: f64, mu_1: f64) -> usize {
    ((10.0 * dt_macro * mu_1 / epsilon).ceil() as usize).max(1)
}

/// Number of macro steps covering `[0, horizon]`; `horizon / h` must be integral.
pub fn step_count(horizon: f64, dt_macro: f64) -> Result<u64> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("horizon must be > 0, got {horizon}")));
    }
    let ratio = horizon / dt_macro;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(domain(format!(
            "horizon {horizon} is not an integer multiple of the macro step {dt_macro}"
        )));
    }
    Ok(steps as u64)
}

/// The pair `(X, Y)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowFastState {
    pub x: SpectralField,
    pub y: SpectralField,
    pub t: f64,
    pub epsilon: f64,
}

impl SlowFastState {
    pub fn new(x: SpectralField, y: SpectralField, epsilon: f64) -> Result<Self> {
        x.ensure_same_size(&y)?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self { x, y, t: 0.0, epsilon })
    }

    pub fn basis_size(&self) -> usize {
        self.x.basis_size()
    }
}

/// Exponential Euler for `dx = (A x + d) dt` with `d` frozen over a step of size `h`.
#[derive(Debug, Clone)]
pub struct SlowPropagator {
    // (e^{-lambda_k h}, (1 - e^{-lambda_k h}) / lambda_k)
    coeffs: Vec<(f64, f64)>,
}

impl SlowPropagator {
    pub fn new(op: &OperatorSpec, basis_size: usize, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(domain(format!("step must be > 0, got {dt}")));
        }
        let coeffs = op
            .eigenvalues(basis_size)?
            .iter()
            .map(|&l| ((-l * dt).exp(), -(-l * dt).exp_m1() / l))
            .collect();
        Ok(Self { coeffs })
    }

    pub fn advance(&self, x: &mut [f64], drift: &[f64], step: u64) -> Result<()> {
        for ((xk, &(decay, gain)), d) in x.iter_mut().zip(&self.coeffs).zip(drift) {
            *xk = decay * *xk + gain * d;
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp(format!("slow mode {} at macro step {step}", k + 1)));
        }
        Ok(())
    }
}

/// Reusable integrator for one model, basis size, step configuration and `eps`.
pub struct Stepper<'m> {
    model: &'m ModelSpec,
    colloc: Collocation,
    cfg: StepperConfig,
    slow: SlowPropagator,
    fast: Vec<OuCoefficients>,
    x_grid: Vec<f64>,
    y_grid: Vec<f64>,
    values: Vec<f64>,
    f_mean_grid: Vec<f64>,
    drift: Vec<f64>,
    normals: Vec<f64>,
}

impl<'m> Stepper<'m> {
    pub fn new(
        model: &'m ModelSpec,
        basis_size: usize,
        cfg: StepperConfig,
        epsilon: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        let mus = model.op_b.eigenvalues(basis_size)?;
        let h = cfg.dt_macro;
        let tau = h / cfg.micro_substeps as f64 / epsilon;
        let slow = SlowPropagator::new(&model.op_a, basis_size, h)?;
        let fast = mus.iter().map(|&mu| OuCoefficients::single(mu, tau)).collect();
        let colloc = Collocation::new(model, basis_size)?;
        let p = colloc.grid_size();
        Ok(Self {
            model,
            colloc,
            cfg,
            slow,
            fast,
            x_grid: vec![0.0; p],
            y_grid: vec![0.0; p],
            values: vec![0.0; p],
            f_mean_grid: vec![0.0; p],
            drift: vec![0.0; basis_size],
            normals: vec![0.0; basis_size],
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn basis_size(&self) -> usize {
        self.drift.len()
    }

    /// Freezes the slow input used by subsequent fast substeps.
    pub fn set_frozen_slow(&mut self, x: &[f64]) {
        self.colloc.to_grid(x, &mut self.x_grid);
    }

    /// Advances `y` through one macro step with the slow input frozen, leaving the mean
    /// grid values of `f` over the substeps in an internal accumulator.
    pub fn advance_fast(
        &mut self,
        y: &mut [f64],
        stream: &mut GaussianStream,
        amplitude: f64,
        step: u64,
    ) -> Result<()> {
        let substeps = self.cfg.micro_substeps;
        self.f_mean_grid.iter_mut().for_each(|v| *v = 0.0);
        for sub in 0..substeps {
            self.colloc.to_grid(y, &mut self.y_grid);
            self.colloc.evaluate(
                self.model.f_map(),
                "f",
                &self.x_grid,
                &self.y_grid,
                &mut self.values,
            )?;
            for (acc, v) in self.f_mean_grid.iter_mut().zip(&self.values) {
                *acc += v;
            }
            self.colloc.evaluate(
                self.model.g_map(),
                "g",
                &self.x_grid,
                &self.y_grid,
                &mut self.values,
            )?;
            self.colloc.project(&self.values, &mut self.drift);
            if amplitude != 0.0 {
                stream.fill(Channel::Fast, step, sub as u64, &mut self.normals);
                for (((yk, c), d), z) in
                    y.iter_mut().zip(&self.fast).zip(&self.drift).zip(&self.normals)
                {
                    *yk = c.decay * *yk + c.gain * d + amplitude * c.spread * z;
                }
            } else {
                for ((yk, c), d) in y.iter_mut().zip(&self.fast).zip(&self.drift) {
                    *yk = c.decay * *yk + c.gain * d;
                }
            }
        }
        let inv = 1.0 / substeps as f64;
        self.f_mean_grid.iter_mut().for_each(|v| *v *= inv);
        if let Some(k) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp(format!("fast mode {} at macro step {step}", k + 1)));
        }
        Ok(())
    }

    /// Spectral coefficients of the substep mean of `f` from the last [`Self::advance_fast`].
    pub fn mean_reaction(&self, out: &mut [f64]) {
        self.colloc.project(&self.f_mean_grid, out);
    }

    /// Exponential Euler update of the slow coefficients with the given drift.
    pub fn advance_slow(&self, x: &mut [f64], drift: &[f64], step: u64) -> Result<()> {
        self.slow.advance(x, drift, step)
    }

    /// Adds the substep-mean grid values of `f` from the last [`Self::advance_fast`].
    pub fn accumulate_reaction_grid(&self, acc: &mut [f64]) {
        for (a, v) in acc.iter_mut().zip(&self.f_mean_grid) {
            *a += v;
        }
    }

    pub fn collocation(&self) -> &Collocation {
        &self.colloc
    }

    /// One macro step of the coupled system, slow input to `F`, `G` taken from `coupling`.
    pub fn macro_step(
        &mut self,
        x: &mut [f64],
        coupling: &[f64],
        y: &mut [f64],
        stream: &mut GaussianStream,
        amplitude: f64,
        step: u64,
    ) -> Result<()> {
        self.set_frozen_slow(coupling);
        self.advance_fast(y, stream, amplitude, step)?;
        let mut reaction = std::mem::take(&mut self.drift);
        self.colloc.project(&self.f_mean_grid, &mut reaction);
        let result = self.advance_slow(x, &reaction, step);
        self.drift = reaction;
        result
    }
}

fn macro_index(t: f64, h: f64) -> u64 {
    (t / h).round().max(0.0) as u64
}

/// One macro step from `s`. The noise block is addressed by the macro index `round(t / h)`.
pub fn step_slowfast(
    s: &SlowFastState,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
) -> Result<SlowFastState> {
    s.x.ensure_same_size(&s.y)?;
    let mut stepper = Stepper::new(m, s.basis_size(), *cfg, s.epsilon)?;
    let mut stream = noise.stream();
    let mut x = s.x.coeffs().to_vec();
    let mut y = s.y.coeffs().to_vec();
    let coupling = x.clone();
    let step = macro_index(s.t, cfg.dt_macro);
    stepper.macro_step(&mut x, &coupling, &mut y, &mut stream, noise.amplitude, step)?;
    Ok(SlowFastState {
        x: SpectralField::from_vec_unchecked(x),
        y: SpectralField::from_vec_unchecked(y),
        t: s.t + cfg.dt_macro,
        epsilon: s.epsilon,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_coupled(
    x0: &SpectralField,
    y0: &SpectralField,
    epsilon: f64,
    horizon: f64,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
    mut record: impl FnMut(SlowFastState),
) -> Result<SlowFastState> {
    let initial = SlowFastState::new(x0.clone(), y0.clone(), epsilon)?;
    let steps = step_count(horizon, cfg.dt_macro)?;
    let mut stepper = Stepper::new(m, x0.basis_size(), *cfg, epsilon)?;
    let mut stream = noise.stream();
    let mut x = x0.coeffs().to_vec();
    let mut y = y0.coeffs().to_vec();
    let mut coupling = x.clone();
    record(initial);
    for step in 0..steps {
        coupling.copy_from_slice(&x);
        stepper.macro_step(&mut x, &coupling, &mut y, &mut stream, noise.amplitude, step)?;
        record(SlowFastState {
            x: SpectralField::from_vec_unchecked(x.clone()),
            y: SpectralField::from_vec_unchecked(y.clone()),
            t: (step + 1) as f64 * cfg.dt_macro,
            epsilon,
        });
    }
    Ok(SlowFastState {
        x: SpectralField::from_vec_unchecked(x),
        y: SpectralField::from_vec_unchecked(y),
        t: steps as f64 * cfg.dt_macro,
        epsilon,
    })
}

/// Trajectory of the coupled system at every macro step, starting with the initial state.
pub fn simulate(
    x0: &SpectralField,
    y0: &SpectralField,
    epsilon: f64,
    horizon: f64,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
) -> Result<Vec<SlowFastState>> {
    let mut trajectory = Vec::new();
    run_coupled(x0, y0, epsilon, horizon, m, cfg, noise, |s| trajectory.push(s))?;
    Ok(trajectory)
}

/// Final state of [`simulate`] without storing the path.
pub fn simulate_final(
    x0: &SpectralField,
    y0: &SpectralField,
    epsilon: f64,
    horizon: f64,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
) -> Result<SlowFastState> {
    run_coupled(x0, y0, epsilon, horizon, m, cfg, noise, |_| {})
}

/// Fast equation with the slow component frozen at `x`, in intrinsic fast time.
/// Returns the state at every macro step (in fast time), starting with `y0`.
pub fn simulate_frozen_fast(
    x: &SpectralField,
    y0: &SpectralField,
    t_fast: f64,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
) -> Result<Vec<SpectralField>> {
    x.ensure_same_size(y0)?;
    let steps = step_count(t_fast, cfg.dt_macro)?;
    let mut stepper = Stepper::new(m, x.basis_size(), *cfg, 1.0)?;
    stepper.set_frozen_slow(x.coeffs());
    let mut stream = noise.stream();
    let mut y = y0.coeffs().to_vec();
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(y0.clone());
    for step in 0..steps {
        stepper.advance_fast(&mut y, &mut stream, noise.amplitude, step)?;
        out.push(SpectralField::from_vec_unchecked(y.clone()));
    }
    Ok(out)
}

/// Final states of the coupled pair `(X, Y)` and the auxiliary pair `(X~, Y~)` whose slow
/// input is frozen at `X(k delta)` on each block of `block_steps` macro steps. Both pairs
/// are driven by the same noise.
#[allow(clippy::too_many_arguments)]
pub fn simulate_hasminskii_pair(
    x0: &SpectralField,
    y0: &SpectralField,
    epsilon: f64,
    horizon: f64,
    block_steps: u64,
    m: &ModelSpec,
    cfg: &StepperConfig,
    noise: &NoisePlan,
) -> Result<(SlowFastState, SlowFastState)> {
    if block_steps == 0 {
        return Err(domain("freezing block must span at least one macro step"));
    }
    SlowFastState::new(x0.clone(), y0.clone(), epsilon)?;
    let steps = step_count(horizon, cfg.dt_macro)?;
    let mut stepper = Stepper::new(m, x0.basis_size(), *cfg, epsilon)?;
    let mut x = x0.coeffs().to_vec();
    let mut y = y0.coeffs().to_vec();
    let mut x_aux = x.clone();
    let mut y_aux = y.clone();
    let mut coupling = x.clone();
    let mut frozen = x.clone();
    let mut stream = noise.stream();
    let mut aux_stream = noise.stream();
    for step in 0..steps {
        if step % block_steps == 0 {
            frozen.copy_from_slice(&x);
        }
        coupling.copy_from_slice(&x);
        stepper.macro_step(&mut x, &coupling, &mut y, &mut stream, noise.amplitude, step)?;
        stepper.macro_step(
            &mut x_aux,
            &frozen,
            &mut y_aux,
            &mut aux_stream,
            noise.amplitude,
            step,
        )?;
    }
    let t = steps as f64 * cfg.dt_macro;
    let pack = |x: Vec<f64>, y: Vec<f64>| SlowFastState {
        x: SpectralField::from_vec_unchecked(x),
        y: SpectralField::from_vec_unchecked(y),
        t,
        epsilon,
    };
    Ok((pack(x, y), pack(x_aux, y_aux)))
}
