use std::path::Path;

use log::info;
use serde::Serialize;
use serde_json::{json, Value};
use spde_averaging::averaging::{
    default_burn_in, estimate_fbar, gibbs_fbar_oracle, mixing_diagnostic, solve_averaged,
    GibbsOracle, MixingVerdict, DEFAULT_HERMITE_NODES,
};
use spde_averaging::experiments::{
    fit_order, hasminskii_gap_ladder, strong_error_ladder, weak_error_ladder, ErrorTable,
};
use spde_averaging::io;
use spde_averaging::model::{check_dissipativity, ScanBox};
use spde_averaging::simulator::simulate;
use spde_averaging::{Error, ModelSpec, NoisePlan, StepperConfig};

use crate::config::ExperimentConfig;

pub const STRONG_BAND: (f64, f64) = (0.35, 0.65);
pub const WEAK_BAND: (f64, f64) = (0.7, 1.3);
pub const GAP_BAND: (f64, f64) = (0.35, 0.65);

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Fbar,
    Averaged,
    StrongOrder,
    WeakOrder,
    Hasminskii,
    Mixing,
    CheckModel,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fbar => "fbar",
            Command::Averaged => "averaged",
            Command::StrongOrder => "strong-order",
            Command::WeakOrder => "weak-order",
            Command::Hasminskii => "hasminskii",
            Command::Mixing => "mixing",
            Command::CheckModel => "check-model",
        }
    }
}

/// What a finished command reports on stdout.
pub struct Outcome {
    pub summary: Value,
    /// Set when an order command's slope left its acceptance band.
    pub band_failure: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self { summary, band_failure: false }
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> spde_averaging::Result<()> {
    io::to_file(&dir.join(name), |w| io::write_json(w, value))
}

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> spde_averaging::Result<Outcome> {
    let m = cfg.model_spec()?;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir)?;
    match cmd {
        Command::Simulate => simulate_cmd(cfg, &m, dir),
        Command::Fbar => fbar_cmd(cfg, &m, dir),
        Command::Averaged => averaged_cmd(cfg, &m, dir),
        Command::StrongOrder => {
            let table = strong_error_ladder(&m, &cfg.ladder())?;
            order_cmd(dir, &table, STRONG_BAND, false)
        }
        Command::WeakOrder => {
            let table = weak_error_ladder(&m, &cfg.ladder(), cfg.phi())?;
            order_cmd(dir, &table, WEAK_BAND, true)
        }
        Command::Hasminskii => {
            let table = hasminskii_gap_ladder(&m, &cfg.ladder())?;
            order_cmd(dir, &table, GAP_BAND, false)
        }
        Command::Mixing => mixing_cmd(cfg, &m, dir),
        Command::CheckModel => {
            let report = check_dissipativity(&m, &ScanBox::default(), 81)?;
            write_json(dir, "dissipativity.json", &report)?;
            Ok(Outcome::ok(json!({ "dissipativity": report })))
        }
    }
}

fn simulate_cmd(
    cfg: &ExperimentConfig,
    m: &ModelSpec,
    dir: &Path,
) -> spde_averaging::Result<Outcome> {
    let ladder = cfg.ladder();
    let eps = cfg.single_epsilon();
    let stepper = StepperConfig::new(
        cfg.dt_macro,
        ladder.substeps.substeps(cfg.dt_macro, eps, m.op_b.smallest()),
    )?;
    let x0 = ladder.x0.field(cfg.basis_size)?;
    let y0 = ladder.y0.field(cfg.basis_size)?;
    let path = simulate(&x0, &y0, eps, cfg.horizon, m, &stepper, &NoisePlan::new(cfg.seed, 0))?;
    io::to_file(&dir.join("trajectory.csv"), |w| io::write_trajectory(w, &path))?;
    let last = path.last().expect("trajectory holds the initial state");
    Ok(Outcome::ok(json!({
        "epsilon": eps,
        "steps": path.len() - 1,
        "micro_substeps": stepper.micro_substeps,
        "final_x_norm": last.x.norm(),
        "final_y_norm": last.y.norm(),
    })))
}

fn fbar_cmd(cfg: &ExperimentConfig, m: &ModelSpec, dir: &Path) -> spde_averaging::Result<Outcome> {
    let x = cfg.ladder().x0.field(cfg.basis_size)?;
    let burn_in = cfg.fbar_burn_in.unwrap_or_else(|| default_burn_in(m));
    let plan = NoisePlan::new(cfg.seed, 0);
    let est = estimate_fbar(&x, m, burn_in, cfg.fbar_horizon, cfg.fbar_ensemble, &plan)?;
    io::to_file(&dir.join("fbar.csv"), |w| io::write_fbar(w, &est))?;
    let oracle = match gibbs_fbar_oracle(&x, m) {
        Ok(v) => Some(v),
        Err(Error::UnsupportedModel { .. }) => None,
        Err(err) => return Err(err),
    };
    let distance = oracle.as_ref().map(|o| est.value.distance(o)).transpose()?;
    let summary = json!({
        "estimate": est,
        "aggregate_standard_error": est.aggregate_se(),
        "oracle": oracle,
        "distance_to_oracle": distance,
    });
    write_json(dir, "fbar.json", &summary)?;
    Ok(Outcome::ok(json!({
        "aggregate_standard_error": est.aggregate_se(),
        "distance_to_oracle": distance,
    })))
}

fn averaged_cmd(
    cfg: &ExperimentConfig,
    m: &ModelSpec,
    dir: &Path,
) -> spde_averaging::Result<Outcome> {
    let x0 = cfg.ladder().x0.field(cfg.basis_size)?;
    let path = match GibbsOracle::new(m, cfg.basis_size, DEFAULT_HERMITE_NODES) {
        Ok(oracle) => {
            solve_averaged(&x0, |x| oracle.evaluate(x), &m.op_a, cfg.horizon, cfg.dt_macro)?
        }
        Err(Error::UnsupportedModel { .. }) => {
            let burn_in = cfg.fbar_burn_in.unwrap_or_else(|| default_burn_in(m));
            let plan = NoisePlan::new(cfg.seed, 0);
            solve_averaged(
                &x0,
                |x| {
                    Ok(estimate_fbar(x, m, burn_in, cfg.fbar_horizon, cfg.fbar_ensemble, &plan)?
                        .value)
                },
                &m.op_a,
                cfg.horizon,
                cfg.dt_macro,
            )?
        }
        Err(err) => return Err(err),
    };
    io::to_file(&dir.join("averaged.csv"), |w| io::write_averaged(w, &path))?;
    let (t, last) = path.last().expect("path holds the initial state");
    Ok(Outcome::ok(json!({ "t": t, "final_x_norm": last.norm() })))
}

fn order_cmd(
    dir: &Path,
    table: &ErrorTable,
    band: (f64, f64),
    may_be_inconclusive: bool,
) -> spde_averaging::Result<Outcome> {
    for r in &table.rows {
        info!(
            "eps {:.6e}: error {:.4e} +- {:.2e} ({} samples{})",
            r.epsilon,
            r.error,
            r.standard_error,
            r.samples,
            if r.excluded { ", excluded" } else { "" }
        );
    }
    io::to_file(&dir.join("error_table.csv"), |w| io::write_error_table(w, table))?;
    write_json(dir, "error_table.json", table)?;
    match fit_order(table) {
        Ok(fit) => {
            write_json(dir, "order_fit.json", &fit)?;
            let in_band = band.0 <= fit.slope && fit.slope <= band.1;
            Ok(Outcome {
                summary: json!({
                    "verdict": if in_band { "pass" } else { "band_failure" },
                    "slope": fit.slope,
                    "band": [band.0, band.1],
                    "fit": fit,
                }),
                band_failure: !in_band,
            })
        }
        Err(Error::InsufficientData { usable, required }) if may_be_inconclusive => {
            let summary = json!({
                "verdict": "inconclusive",
                "usable_rows": usable,
                "required_rows": required,
                "band": [band.0, band.1],
            });
            write_json(dir, "order_fit.json", &summary)?;
            Ok(Outcome::ok(summary))
        }
        Err(err) => Err(err),
    }
}

fn mixing_cmd(
    cfg: &ExperimentConfig,
    m: &ModelSpec,
    dir: &Path,
) -> spde_averaging::Result<Outcome> {
    let ladder = cfg.ladder();
    let x = ladder.x0.field(cfg.basis_size)?;
    let y = ladder.y0.field(cfg.basis_size)?;
    let plan = NoisePlan::new(cfg.seed, 0);
    let report = mixing_diagnostic(&x, &y, m, &cfg.mixing_times, cfg.mixing_ensemble, &plan)?;
    io::to_file(&dir.join("mixing.csv"), |w| io::write_mixing(w, &report))?;
    write_json(dir, "mixing.json", &report)?;
    let reference = match m.structure {
        spde_averaging::model::Structure::GaussianFast { kappa, .. } => {
            Some(m.op_b.smallest() + kappa)
        }
        _ => None,
    };
    Ok(Outcome::ok(json!({
        "verdict": report.verdict,
        "confirmed": report.verdict == MixingVerdict::Confirmed,
        "decay_rate": report.decay_rate,
        "slowest_linear_rate": reference,
        "r_squared": report.r_squared,
    })))
}
