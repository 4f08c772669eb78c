//! Assembly from a resolved configuration to concrete runs.
//!
//! The CLI binary and the C bindings both start from a [`RunConfig`] and need
//! the same datum/solver construction and the same mapping onto the dynamics
//! options. Keeping that mapping here means the two front ends cannot drift:
//! the CLI adds file outputs on top, the bindings add a serialized report, but
//! the computation underneath is assembled by one function.

use crate::biot_savart::MeridianVelocitySolver;
use crate::config::{Mode, RunConfig};
use crate::dynamics::{run_ivse, verify_dqdt, IvseRunOptions};
use crate::error::Result;
use crate::euler::{compare_ivse_vs_euler, run_euler, EulerRunOptions};
use crate::field::{support_region, AxiScalarField};
use crate::kappa::estimate_kappa;
use crate::oracle::run_oracle_suite;
use crate::quadrature::PhiQuadRule;

/// Build the initial datum and the velocity solver a configuration describes.
pub fn solver_and_datum(cfg: &RunConfig) -> Result<(MeridianVelocitySolver, AxiScalarField)> {
    let grid = cfg.grid()?;
    let ring = cfg.ring_on_grid()?;
    let field = ring.sample(grid)?;
    let rule = PhiQuadRule::new(cfg.rule_order)?;
    let solver = MeridianVelocitySolver::new(grid, &rule, cfg.resolved_delta(&grid))?;
    Ok((solver, field))
}

/// Map configuration keys onto the stretching-flow run options.
pub fn ivse_options(cfg: &RunConfig) -> IvseRunOptions {
    IvseRunOptions {
        cfl: cfg.cfl,
        sup_cap_factor: cfg.sup_cap_factor,
        lower_curve_tol: cfg.lower_curve_tol,
        kappa_safety: cfg.kappa_safety,
        support_threshold: cfg.support_threshold,
        snapshot_interval: cfg.snapshot_interval,
        max_steps: cfg.max_steps,
        kappa_schedule: cfg.kappa_levels.clone(),
        horizon: cfg.horizon,
        sample_dt: None,
    }
}

/// Map configuration keys onto the advective run options.
pub fn euler_options(cfg: &RunConfig) -> EulerRunOptions {
    EulerRunOptions {
        horizon: cfg.horizon.unwrap_or(5.0),
        cfl: cfg.cfl,
        snapshot_dt: cfg.snapshot_dt,
        kappa_rel_threshold: cfg.kappa_rel_threshold,
        kappa_schedule: cfg.kappa_levels.clone(),
        max_steps: cfg.max_steps,
        ..EulerRunOptions::default()
    }
}

/// Run the configured mode and return its report as a JSON value, with no
/// file output.
///
/// This is the embedding-friendly entry point: every mode produces exactly
/// the report structure the CLI writes as `report.json` (or the mode's named
/// report file), serialized in place. Artifacts that only make sense on disk
/// — CSV traces, snapshot files, the manifest — are CLI concerns and do not
/// exist here.
pub fn run_mode_report(cfg: &RunConfig) -> Result<serde_json::Value> {
    let value = match cfg.mode {
        Mode::Simulate => {
            let (solver, field) = solver_and_datum(cfg)?;
            let report = run_ivse(&field, &solver, &ivse_options(cfg), |_, _, _| Ok(()))?;
            serde_json::to_value(&report)?
        }
        Mode::Euler => {
            let (solver, field) = solver_and_datum(cfg)?;
            let report = run_euler(&field, &solver, &euler_options(cfg), |_, _, _| Ok(()))?;
            serde_json::to_value(&report)?
        }
        Mode::Compare => {
            let (solver, field) = solver_and_datum(cfg)?;
            let report = compare_ivse_vs_euler(&field, &solver, &euler_options(cfg))?;
            serde_json::to_value(&report)?
        }
        Mode::Kappa => {
            let field = cfg.ring_on_grid()?.sample(cfg.grid()?)?;
            let rule = PhiQuadRule::new(cfg.rule_order)?;
            let region = support_region(&field, cfg.support_threshold)?;
            let estimate = estimate_kappa(&region, &rule, &cfg.kappa_levels)?;
            serde_json::to_value(&estimate)?
        }
        Mode::Verify => {
            let (solver, field) = solver_and_datum(cfg)?;
            let report = verify_dqdt(&field, &solver, &cfg.kappa_levels, cfg.support_threshold)?;
            serde_json::to_value(&report)?
        }
        Mode::Oracle => {
            let report = run_oracle_suite(cfg)?;
            serde_json::to_value(&report)?
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn tiny(mode: &str) -> RunConfig {
        parse_config(
            "{}",
            &[
                format!("mode={mode}"),
                "n_r=24".into(),
                "n_z=24".into(),
                "rule_order=8".into(),
                "kappa_levels=[6,12]".into(),
                "max_steps=3".into(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn verify_report_round_trips_through_json() {
        let value = run_mode_report(&tiny("verify")).unwrap();
        let margin = value["riccati_margin"].as_f64().unwrap();
        assert!(margin > 1.0, "margin {margin} should certify the inequality");
    }

    #[test]
    fn kappa_report_carries_the_argmin_pair() {
        let value = run_mode_report(&tiny("kappa")).unwrap();
        assert!(value["value"].as_f64().unwrap() > 0.0);
        assert_eq!(value["argmin"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn simulate_report_respects_the_step_cap() {
        let value = run_mode_report(&tiny("simulate")).unwrap();
        assert_eq!(value["steps"].as_u64(), Some(3));
        assert_eq!(value["sign_violations"].as_u64(), Some(0));
    }
}
