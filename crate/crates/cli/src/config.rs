//! Flat TOML experiment configuration with a strict schema.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spde_averaging::experiments::{
    LadderConfig, PowerLaw, ReferenceFbar, SubstepPolicy, TestFunctional,
};
use spde_averaging::ModelSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{message}")]
    Parse { field: Option<String>, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Read { .. } => None,
            ConfigError::Parse { field, .. } => field.as_deref(),
            ConfigError::Invalid { field, .. } => Some(field),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Substeps {
    Fixed(usize),
    Named(SubstepName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepName {
    Auto,
}

fn default_kappa() -> f64 {
    1.0
}
fn default_substeps() -> Substeps {
    Substeps::Named(SubstepName::Auto)
}
fn default_regularity() -> f64 {
    3.0
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_phi() -> String {
    "tanh_mode1".into()
}
fn default_fbar_horizon() -> f64 {
    20.0
}
fn default_fbar_ensemble() -> usize {
    16
}
fn default_mixing_times() -> Vec<f64> {
    (2..=10).map(|i| 0.05 * i as f64).collect()
}
fn default_mixing_ensemble() -> usize {
    2000
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `linear`, `tanh` or `zero`.
    pub model: String,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub basis_size: usize,
    pub epsilon_ladder: Vec<f64>,
    /// Scale separation for single runs (`simulate`); defaults to the first ladder entry.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub horizon: f64,
    pub dt_macro: f64,
    /// `"auto"` or a fixed count.
    #[serde(default = "default_substeps")]
    pub micro_substeps: Substeps,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub fbar_burn_in: Option<f64>,
    #[serde(default = "default_fbar_horizon")]
    pub fbar_horizon: f64,
    #[serde(default = "default_fbar_ensemble")]
    pub fbar_ensemble: usize,
    #[serde(default = "default_phi")]
    pub phi: String,
    /// Decay exponent `a` of the initial coefficients `x0_k = amplitude * k^-a` (and `y0_k`).
    #[serde(default = "default_regularity")]
    pub init_regularity: f64,
    #[serde(default = "default_amplitude")]
    pub x0_amplitude: f64,
    #[serde(default)]
    pub y0_amplitude: f64,
    #[serde(default = "default_mixing_times")]
    pub mixing_times: Vec<f64>,
    #[serde(default = "default_mixing_ensemble")]
    pub mixing_ensemble: usize,
    #[serde(default = "default_true")]
    pub padding: bool,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|err| ConfigError::Parse {
            field: unknown_or_missing_field(err.message()),
            message: err.to_string().trim().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid { field, message: format!("must be > 0, got {v}") })
            }
        }
        fn finite(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid { field, message: format!("must be finite, got {v}") })
            }
        }
        fn at_least(field: &'static str, v: usize, min: usize) -> Result<(), ConfigError> {
            if v >= min {
                Ok(())
            } else {
                Err(ConfigError::Invalid { field, message: format!("must be >= {min}, got {v}") })
            }
        }
        if !["linear", "tanh", "zero"].contains(&self.model.as_str()) {
            return Err(ConfigError::Invalid {
                field: "model",
                message: format!("unknown model {:?}; expected linear, tanh or zero", self.model),
            });
        }
        positive("kappa", self.kappa)?;
        at_least("basis_size", self.basis_size, 1)?;
        if self.epsilon_ladder.is_empty() {
            return Err(ConfigError::Invalid {
                field: "epsilon_ladder",
                message: "is empty".into(),
            });
        }
        for &e in &self.epsilon_ladder {
            positive("epsilon_ladder", e)?;
        }
        if self.epsilon_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::Invalid {
                field: "epsilon_ladder",
                message: "must be strictly decreasing".into(),
            });
        }
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        positive("horizon", self.horizon)?;
        positive("dt_macro", self.dt_macro)?;
        let steps = self.horizon / self.dt_macro;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(ConfigError::Invalid {
                field: "dt_macro",
                message: format!("horizon / dt_macro = {steps} is not an integer"),
            });
        }
        if let Substeps::Fixed(m) = self.micro_substeps {
            at_least("micro_substeps", m, 1)?;
        }
        at_least("samples", self.samples, 2)?;
        if let Some(b) = self.fbar_burn_in {
            positive("fbar_burn_in", b)?;
        }
        positive("fbar_horizon", self.fbar_horizon)?;
        if self.fbar_horizon <= self.fbar_burn_in.unwrap_or(0.0) {
            return Err(ConfigError::Invalid {
                field: "fbar_horizon",
                message: "must exceed fbar_burn_in".into(),
            });
        }
        at_least("fbar_ensemble", self.fbar_ensemble, 2)?;
        TestFunctional::by_name(&self.phi)
            .map_err(|err| ConfigError::Invalid { field: "phi", message: err.to_string() })?;
        finite("init_regularity", self.init_regularity)?;
        finite("x0_amplitude", self.x0_amplitude)?;
        finite("y0_amplitude", self.y0_amplitude)?;
        if self.mixing_times.is_empty()
            || self.mixing_times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || self.mixing_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(ConfigError::Invalid {
                field: "mixing_times",
                message: "must be non-empty, non-negative and increasing".into(),
            });
        }
        at_least("mixing_ensemble", self.mixing_ensemble, 2)?;
        Ok(())
    }

    pub fn model_spec(&self) -> spde_averaging::Result<ModelSpec> {
        Ok(ModelSpec::by_name(&self.model, self.kappa)?.with_padding(self.padding))
    }

    pub fn phi(&self) -> TestFunctional {
        TestFunctional::by_name(&self.phi).expect("validated")
    }

    pub fn single_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.epsilon_ladder[0])
    }

    pub fn ladder(&self) -> LadderConfig {
        LadderConfig {
            basis_size: self.basis_size,
            horizon: self.horizon,
            dt_macro: self.dt_macro,
            epsilons: self.epsilon_ladder.clone(),
            samples: self.samples,
            seed: self.seed,
            substeps: match self.micro_substeps {
                Substeps::Fixed(m) => SubstepPolicy::Fixed(m),
                Substeps::Named(SubstepName::Auto) => SubstepPolicy::Auto,
            },
            x0: PowerLaw { amplitude: self.x0_amplitude, decay: self.init_regularity },
            y0: PowerLaw { amplitude: self.y0_amplitude, decay: self.init_regularity },
            reference: ReferenceFbar::Auto,
        }
    }
}

fn unknown_or_missing_field(message: &str) -> Option<String> {
    // toml/serde messages quote the field name in backticks
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
model = "tanh"
basis_size = 8
epsilon_ladder = [0.25, 0.125]
horizon = 0.5
dt_macro = 0.0625
samples = 4
seed = 1
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.kappa, 1.0);
        assert_eq!(cfg.micro_substeps, Substeps::Named(SubstepName::Auto));
        assert_eq!(cfg.single_epsilon(), 0.25);
        assert_eq!(cfg.ladder().substeps, SubstepPolicy::Auto);
    }

    #[test]
    fn fixed_substeps_parse() {
        let cfg = ExperimentConfig::parse(&format!("{MINIMAL}micro_substeps = 3\n")).unwrap();
        assert_eq!(cfg.ladder().substeps, SubstepPolicy::Fixed(3));
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_field_name() {
        let err = ExperimentConfig::parse(&format!("{MINIMAL}sampels = 3\n")).unwrap_err();
        assert_eq!(err.field(), Some("sampels"));
    }

    #[test]
    fn missing_keys_are_reported() {
        let err = ExperimentConfig::parse(&MINIMAL.replace("seed = 1", "")).unwrap_err();
        assert_eq!(err.field(), Some("seed"));
    }

    #[test]
    fn invalid_values_name_the_field() {
        for (from, to, field) in [
            ("horizon = 0.5", "horizon = -1.0", "horizon"),
            ("dt_macro = 0.0625", "dt_macro = 0.3", "dt_macro"),
            ("[0.25, 0.125]", "[0.125, 0.25]", "epsilon_ladder"),
            ("samples = 4", "samples = 1", "samples"),
            ("\"tanh\"", "\"cubic\"", "model"),
        ] {
            let err = ExperimentConfig::parse(&MINIMAL.replace(from, to)).unwrap_err();
            assert_eq!(err.field(), Some(field), "{err}");
        }
    }
}
