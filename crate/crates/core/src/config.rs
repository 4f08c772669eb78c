//! Flat key–value run configuration.
//!
//! A run is described by a single flat JSON object — no nesting, so configs
//! diff cleanly and `--set key=value` overrides are unambiguous. Parsing is
//! hand-rolled key by key: every rejection names the offending key and the
//! violated constraint, unknown keys are errors (typos must not silently fall
//! back to defaults), and absent keys pick up mode-appropriate defaults at
//! [`RunConfig::resolve`] time.
//!
//! The defaults encode two regimes. The reduced dynamics (`simulate`, `kappa`,
//! `verify`) run on the off-plane window `[1,3]×[0.25,2]` at 128² where the
//! canonical datum is comfortably interior. The full dynamics (`euler`,
//! `compare`) need the symmetry plane on-grid (`z_min = 0`) and more
//! resolution, 256² over horizon 5. The spectral suite (`oracle`) instead works
//! on a periodic box around the fat cross-check instance of the datum family,
//! which a desk-scale lattice actually resolves (see the spectral module docs).

use crate::biot_savart::default_delta;
use crate::error::{Error, Result};
use crate::field::{AxiGrid, RingPair};
use crate::kappa;
use serde::Serialize;
use serde_json::Value;
use std::fmt;

/// Run mode, selecting which suite [`RunConfig`] drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Reduced (stretching-only) dynamics to blowup diagnostics.
    Simulate,
    /// Full axisymmetric swirl-free dynamics with advection.
    Euler,
    /// Both dynamics side by side from identical data.
    Compare,
    /// Interaction-constant estimation on the datum support.
    Kappa,
    /// 3-D periodic spectral identity suite.
    Oracle,
    /// Growth-identity verification on the datum.
    Verify,
}

impl Mode {
    const ALL: [(&'static str, Mode); 6] = [
        ("simulate", Mode::Simulate),
        ("euler", Mode::Euler),
        ("compare", Mode::Compare),
        ("kappa", Mode::Kappa),
        ("oracle", Mode::Oracle),
        ("verify", Mode::Verify),
    ];

    pub fn parse(text: &str) -> Result<Mode> {
        Self::ALL
            .iter()
            .find(|(name, _)| *name == text)
            .map(|&(_, m)| m)
            .ok_or_else(|| {
                Error::Config(format!(
                    "mode: unrecognized mode {text:?}; expected one of simulate, euler, \
                     compare, kappa, oracle, verify"
                ))
            })
    }

    pub fn as_str(&self) -> &'static str {
        Self::ALL
            .iter()
            .find(|&&(_, m)| m == *self)
            .map(|&(name, _)| name)
            .unwrap()
    }

    /// Reduced-dynamics modes share the off-plane grid defaults.
    fn uses_reduced_grid(&self) -> bool {
        matches!(self, Mode::Simulate | Mode::Kappa | Mode::Verify)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully resolved run configuration. Every consumer-facing accessor returns a
/// concrete value; `Option` fields are filled by [`RunConfig::resolve`] before
/// a config leaves the parsing layer.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    // meridian grid
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_r: usize,
    pub n_z: usize,
    // initial datum (ring-pair bump family)
    pub ring_r: f64,
    pub ring_z: f64,
    pub rho_r: f64,
    pub rho_z: f64,
    pub amplitude: f64,
    // kernel evaluation
    pub rule_order: usize,
    pub delta: f64,
    // time stepping and termination
    pub cfl: f64,
    pub horizon: Option<f64>,
    pub max_steps: usize,
    pub snapshot_interval: usize,
    pub snapshot_dt: f64,
    pub sup_cap_factor: f64,
    // diagnostics
    pub lower_curve_tol: f64,
    pub kappa_safety: f64,
    pub support_threshold: f64,
    pub kappa_rel_threshold: f64,
    pub kappa_levels: Vec<usize>,
    // spectral suite
    pub box_len: f64,
    pub box_n: usize,
    pub picard_n: usize,
    pub picard_substeps: usize,
    pub sobolev_s: f64,
    pub seed: u64,
    // artifacts
    pub out_dir: String,
}

/// Raw option holder while keys are being read; promoted by `resolve`.
#[derive(Debug, Clone, Default)]
struct RawConfig {
    mode: Option<String>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    n_r: Option<usize>,
    n_z: Option<usize>,
    ring_r: Option<f64>,
    ring_z: Option<f64>,
    rho_r: Option<f64>,
    rho_z: Option<f64>,
    amplitude: Option<f64>,
    rule_order: Option<usize>,
    delta: Option<f64>,
    cfl: Option<f64>,
    horizon: Option<f64>,
    max_steps: Option<usize>,
    snapshot_interval: Option<usize>,
    snapshot_dt: Option<f64>,
    sup_cap_factor: Option<f64>,
    lower_curve_tol: Option<f64>,
    kappa_safety: Option<f64>,
    support_threshold: Option<f64>,
    kappa_rel_threshold: Option<f64>,
    kappa_levels: Option<Vec<usize>>,
    box_len: Option<f64>,
    box_n: Option<usize>,
    picard_n: Option<usize>,
    picard_substeps: Option<usize>,
    sobolev_s: Option<f64>,
    seed: Option<u64>,
    out_dir: Option<String>,
}

fn want_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: expected a finite number, got {v}")))
}

fn want_usize(key: &str, v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Config(format!("{key}: expected a nonnegative integer, got {v}")))
}

fn want_u64(key: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::Config(format!("{key}: expected a nonnegative integer, got {v}")))
}

fn want_str(key: &str, v: &Value) -> Result<String> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::Config(format!("{key}: expected a string, got {v}")))
}

fn want_usize_list(key: &str, v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .and_then(|items| {
            items
                .iter()
                .map(|x| x.as_u64().map(|u| u as usize))
                .collect::<Option<Vec<_>>>()
        })
        .ok_or_else(|| {
            Error::Config(format!(
                "{key}: expected an array of nonnegative integers, got {v}"
            ))
        })
}

impl RawConfig {
    fn apply(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "mode" => self.mode = Some(want_str(key, v)?),
            "r_min" => self.r_min = Some(want_f64(key, v)?),
            "r_max" => self.r_max = Some(want_f64(key, v)?),
            "z_min" => self.z_min = Some(want_f64(key, v)?),
            "z_max" => self.z_max = Some(want_f64(key, v)?),
            "n_r" => self.n_r = Some(want_usize(key, v)?),
            "n_z" => self.n_z = Some(want_usize(key, v)?),
            "ring_r" => self.ring_r = Some(want_f64(key, v)?),
            "ring_z" => self.ring_z = Some(want_f64(key, v)?),
            "rho_r" => self.rho_r = Some(want_f64(key, v)?),
            "rho_z" => self.rho_z = Some(want_f64(key, v)?),
            "amplitude" => self.amplitude = Some(want_f64(key, v)?),
            "rule_order" => self.rule_order = Some(want_usize(key, v)?),
            "delta" => self.delta = Some(want_f64(key, v)?),
            "cfl" => self.cfl = Some(want_f64(key, v)?),
            "horizon" => self.horizon = Some(want_f64(key, v)?),
            "max_steps" => self.max_steps = Some(want_usize(key, v)?),
            "snapshot_interval" => self.snapshot_interval = Some(want_usize(key, v)?),
            "snapshot_dt" => self.snapshot_dt = Some(want_f64(key, v)?),
            "sup_cap_factor" => self.sup_cap_factor = Some(want_f64(key, v)?),
            "lower_curve_tol" => self.lower_curve_tol = Some(want_f64(key, v)?),
            "kappa_safety" => self.kappa_safety = Some(want_f64(key, v)?),
            "support_threshold" => self.support_threshold = Some(want_f64(key, v)?),
            "kappa_rel_threshold" => self.kappa_rel_threshold = Some(want_f64(key, v)?),
            "kappa_levels" => self.kappa_levels = Some(want_usize_list(key, v)?),
            "box_len" => self.box_len = Some(want_f64(key, v)?),
            "box_n" => self.box_n = Some(want_usize(key, v)?),
            "picard_n" => self.picard_n = Some(want_usize(key, v)?),
            "picard_substeps" => self.picard_substeps = Some(want_usize(key, v)?),
            "sobolev_s" => self.sobolev_s = Some(want_f64(key, v)?),
            "seed" => self.seed = Some(want_u64(key, v)?),
            "out_dir" => self.out_dir = Some(want_str(key, v)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key {other:?}"
                )))
            }
        }
        Ok(())
    }

    fn resolve(self) -> Result<RunConfig> {
        let mode = Mode::parse(&self.mode.ok_or_else(|| {
            Error::Config("mode: mandatory key missing (no default mode exists)".into())
        })?)?;
        let reduced = mode.uses_reduced_grid();
        // Oracle's datum default is the fat cross-check instance (the only
        // family member a desk-scale lattice resolves; see the spectral
        // module docs), with a meridian window that contains its support.
        // Everything else uses the canonical concentrated ring pair.
        let (d_ring_r, d_ring_z, d_rho) = if mode == Mode::Oracle {
            (1.2, 0.85, 0.55)
        } else {
            (2.0, 1.0, 0.35)
        };
        let (d_grid, d_n): ((f64, f64, f64, f64), usize) = match mode {
            Mode::Oracle => ((0.25, 2.25, 0.0, 1.75), 128),
            _ if reduced => ((1.0, 3.0, 0.25, 2.0), 128),
            _ => ((1.0, 3.0, 0.0, 2.0), 256),
        };
        let cfg = RunConfig {
            mode,
            r_min: self.r_min.unwrap_or(d_grid.0),
            r_max: self.r_max.unwrap_or(d_grid.1),
            z_min: self.z_min.unwrap_or(d_grid.2),
            z_max: self.z_max.unwrap_or(d_grid.3),
            n_r: self.n_r.unwrap_or(d_n),
            n_z: self.n_z.unwrap_or(d_n),
            ring_r: self.ring_r.unwrap_or(d_ring_r),
            ring_z: self.ring_z.unwrap_or(d_ring_z),
            rho_r: self.rho_r.unwrap_or(d_rho),
            rho_z: self.rho_z.unwrap_or(d_rho),
            amplitude: self.amplitude.unwrap_or(-1.0),
            rule_order: self.rule_order.unwrap_or(32),
            // Negative sentinel: replaced by the grid-scaled default below.
            delta: self.delta.unwrap_or(-1.0),
            cfl: self.cfl.unwrap_or(if reduced { 0.1 } else { 0.4 }),
            horizon: self.horizon.or(match mode {
                Mode::Euler | Mode::Compare => Some(5.0),
                _ => None,
            }),
            max_steps: self
                .max_steps
                .unwrap_or(if reduced { 100_000 } else { 1_000_000 }),
            snapshot_interval: self.snapshot_interval.unwrap_or(25),
            snapshot_dt: self.snapshot_dt.unwrap_or(0.25),
            sup_cap_factor: self.sup_cap_factor.unwrap_or(1e6),
            lower_curve_tol: self.lower_curve_tol.unwrap_or(0.02),
            kappa_safety: self.kappa_safety.unwrap_or(0.9),
            support_threshold: self.support_threshold.unwrap_or(1e-12),
            kappa_rel_threshold: self.kappa_rel_threshold.unwrap_or(1e-6),
            kappa_levels: self.kappa_levels.unwrap_or_else(kappa::default_schedule),
            box_len: self.box_len.unwrap_or(7.0),
            box_n: self.box_n.unwrap_or(64),
            picard_n: self.picard_n.unwrap_or(16),
            picard_substeps: self.picard_substeps.unwrap_or(64),
            sobolev_s: self.sobolev_s.unwrap_or(1.7),
            seed: self.seed.unwrap_or(7),
            out_dir: self.out_dir.unwrap_or_else(|| "out".into()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse and validate a flat JSON configuration document, applying
/// `overrides` (raw `key=value` strings from the command line) on top of the
/// file's keys before defaults are resolved. Override values are parsed as
/// JSON scalars where possible and fall back to strings, so `--set cfl=0.2`
/// and `--set mode=euler` both do the expected thing.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("configuration is not valid JSON: {e}")))?;
    let map = root.as_object().ok_or_else(|| {
        Error::Config("configuration must be a flat JSON object of key-value pairs".into())
    })?;
    let mut raw = RawConfig::default();
    for (key, value) in map {
        raw.apply(key, value)?;
    }
    for item in overrides {
        let (key, value_text) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "override {item:?}: expected key=value (e.g. --set cfl=0.2)"
            ))
        })?;
        let value = serde_json::from_str::<Value>(value_text)
            .unwrap_or_else(|_| Value::String(value_text.to_owned()));
        raw.apply(key, &value)?;
    }
    raw.resolve()
}

impl RunConfig {
    /// Construct-and-check every derived object the mode will need, so bad
    /// requests fail at parse time with a key-specific message instead of
    /// mid-run.
    fn validate(&self) -> Result<()> {
        let positive = [
            ("rule_order", self.rule_order as f64),
            ("max_steps", self.max_steps as f64),
            ("snapshot_interval", self.snapshot_interval as f64),
            ("snapshot_dt", self.snapshot_dt),
            ("cfl", self.cfl),
            ("lower_curve_tol", self.lower_curve_tol),
            ("picard_substeps", self.picard_substeps as f64),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{key}: must be positive, got {v}")));
            }
        }
        if !(self.sup_cap_factor > 1.0) {
            return Err(Error::Config(format!(
                "sup_cap_factor: termination cap must exceed 1, got {}",
                self.sup_cap_factor
            )));
        }
        if !(self.kappa_safety > 0.0 && self.kappa_safety <= 1.0) {
            return Err(Error::Config(format!(
                "kappa_safety: conservative factor must lie in (0, 1], got {}",
                self.kappa_safety
            )));
        }
        if !(self.support_threshold >= 0.0) || !(self.kappa_rel_threshold >= 0.0) {
            return Err(Error::Config(
                "support_threshold/kappa_rel_threshold: thresholds must be nonnegative".into(),
            ));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(Error::Config(format!(
                    "horizon: must be positive when given, got {h}"
                )));
            }
        }
        if self.kappa_levels.is_empty() || self.kappa_levels.iter().any(|&l| l < 2) {
            return Err(Error::Config(
                "kappa_levels: need at least one refinement level, all levels >= 2".into(),
            ));
        }
        if self.delta >= 0.0 && !self.delta.is_finite() {
            return Err(Error::Config(format!(
                "delta: regularization length must be finite, got {}",
                self.delta
            )));
        }
        match self.mode {
            Mode::Oracle => {
                // Lattice parameters and embedding margins are checked by the
                // spectral constructors; run them now on throwaway values.
                crate::spectral::SpectralVectorField::zeros(self.box_len, self.box_n)?;
                crate::spectral::SpectralVectorField::zeros(self.box_len, self.picard_n)?;
                let ring = self.ring_on_grid()?;
                crate::spectral::embed_ring_pair(&ring, self.box_len, 4)?;
                if !(self.sobolev_s > 1.5) {
                    return Err(Error::Config(format!(
                        "sobolev_s: the well-posedness suite needs s > 3/2, got {}",
                        self.sobolev_s
                    )));
                }
            }
            Mode::Euler | Mode::Compare => {
                if self.cfl > 1.0 {
                    return Err(Error::Config(format!(
                        "cfl: advective stepping requires cfl <= 1, got {}",
                        self.cfl
                    )));
                }
                self.grid()?;
                self.ring_on_grid()?;
            }
            _ => {
                self.grid()?;
                self.ring_on_grid()?;
            }
        }
        Ok(())
    }

    /// The meridian grid described by the grid keys.
    pub fn grid(&self) -> Result<AxiGrid> {
        AxiGrid::new(
            self.r_min, self.r_max, self.z_min, self.z_max, self.n_r, self.n_z,
        )
    }

    /// The configured datum, independent of any grid.
    pub fn ring(&self) -> Result<RingPair> {
        RingPair::new(
            self.ring_r,
            self.ring_z,
            self.rho_r,
            self.rho_z,
            self.amplitude,
        )
    }

    /// The configured datum validated against the configured grid.
    pub fn ring_on_grid(&self) -> Result<RingPair> {
        let ring = self.ring()?;
        ring.validate_inside(&self.grid()?)?;
        Ok(ring)
    }

    /// Kernel regularization length: the configured value, or the grid-scaled
    /// default when the key was absent (stored as a negative sentinel).
    pub fn resolved_delta(&self, grid: &AxiGrid) -> f64 {
        if self.delta >= 0.0 {
            self.delta
        } else {
            default_delta(grid)
        }
    }
}
