//! The spectral identity suite: every exact identity the 3-D periodic code
//! must satisfy, bundled as one runnable battery with measured residuals.
//!
//! Each check is an equality that holds exactly in the continuum and to
//! roundoff (or to a documented, resolution-limited budget) in the discrete
//! setting. The suite exists to be *independent* of the meridian kernel code:
//! when the two paths agree, each vouches for the other. Callers get a
//! serializable report with one entry per check; the CLI prints it, the C ABI
//! returns it as JSON, and the acceptance battery reuses the same entry
//! points at higher resolution.

use crate::config::RunConfig;
use crate::error::Result;
use crate::quadrature::PhiQuadRule;
use crate::spectral::{
    bilinear_b, biot_savart_3d, crossed_shear_datum, empirical_bilinear_constant, hs_inner,
    picard_solve, random_divergence_free, random_field, stretching_pullback_residual,
    PicardOptions, PicardReport,
};
use serde::Serialize;

/// One identity check: measured residual against its budget.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl OracleCheck {
    fn new(name: &'static str, residual: f64, threshold: f64) -> Self {
        OracleCheck {
            name,
            residual,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
            note: None,
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

/// Full outcome of the identity suite.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSuiteReport {
    pub box_len: f64,
    pub box_n: usize,
    pub picard_n: usize,
    pub sobolev_s: f64,
    pub seed: u64,
    /// The discrete norm convention all spectral numbers are reported in.
    pub normalization_note: &'static str,
    pub checks: Vec<OracleCheck>,
    /// Measured bilinear-form bound (no pass/fail semantics: the continuum
    /// constant is abstract, so this is an empirical stand-in).
    pub empirical_bilinear_constant: f64,
    /// The local-existence fixed-point run backing the contraction check.
    pub picard: PicardReport,
    pub pass: bool,
}

/// Fourier-side norm convention, spelled out so numbers in reports are
/// interpretable without reading the source.
pub const NORMALIZATION_NOTE: &str = "H^s norms are box-integral normalized: \
    ||f||^2 = L^3 * sum_k (1 + 4 pi^2 |k|^2 / L^2)^s |c_k|^2 with f(x) = \
    sum_k c_k exp(2 pi i k.x / L); at s = 0 this equals the integral of |f|^2 \
    over the box, so values are comparable to whole-space integrals for fields \
    supported well inside the box.";

/// Sobolev indices every norm-identity check sweeps: the energy index, two
/// subcritical ones straddling 3/2, and a supercritical one.
pub const SOBOLEV_GRID: [f64; 4] = [0.0, 1.0, 1.7, 2.5];

/// Budget for the meridian pullback residual at the default 64³ lattice. The
/// compactly supported bump has root-exponential spectral decay, so this
/// check is resolution-limited: measured ≈ 4.7% at 64³ and ≈ 1.1% at 128³ on
/// the default instance. Runs at higher `box_n` should compare against the
/// tighter figure directly.
pub const PULLBACK_BUDGET_COARSE: f64 = 0.10;

/// Run every identity check at the configuration's lattice sizes.
pub fn run_oracle_suite(cfg: &RunConfig) -> Result<OracleSuiteReport> {
    let (l, n, seed) = (cfg.box_len, cfg.box_n, cfg.seed);
    let mut checks = Vec::new();

    // Helmholtz split on a generic (non-solenoidal) random field: projecting
    // twice changes nothing, the two parts are H^s-orthogonal, and the norms
    // satisfy Pythagoras — all exact identities in frequency space.
    let v = random_field(l, n, seed)?;
    let p = v.helmholtz_project();
    let g = v.sub(&p)?;
    let pp = p.helmholtz_project();
    checks.push(OracleCheck::new(
        "helmholtz_idempotence",
        pp.sub(&p)?.hs_norm(0.0) / p.hs_norm(0.0),
        1e-12,
    ));
    let mut ortho = 0.0f64;
    let mut pyth = 0.0f64;
    for s in SOBOLEV_GRID {
        let (np, ng, nv) = (p.hs_norm(s), g.hs_norm(s), v.hs_norm(s));
        ortho = ortho.max(hs_inner(&p, &g, s)?.abs() / (np * ng));
        pyth = pyth.max((nv * nv - np * np - ng * ng).abs() / (nv * nv));
    }
    checks.push(OracleCheck::new("helmholtz_orthogonality", ortho, 1e-12));
    checks.push(OracleCheck::new("helmholtz_pythagoras", pyth, 1e-12));

    // The vorticity norm equals the velocity-gradient norm for divergence-free
    // fields, index by index.
    let mut iso = 0.0f64;
    for i in 0..3u64 {
        let u = random_divergence_free(l, n, seed.wrapping_add(10 + i))?;
        let w = u.curl();
        for s in SOBOLEV_GRID {
            let nw = w.hs_norm(s);
            iso = iso.max((nw - u.gradient_hs_norm(s)).abs() / nw);
        }
    }
    checks.push(OracleCheck::new("vorticity_gradient_isometry", iso, 1e-12));

    // Velocity reconstruction round trip: curl of the reconstructed velocity
    // returns the vorticity exactly (both sides mean-free, divergence-free).
    let w = random_divergence_free(l, n, seed.wrapping_add(20))?.curl();
    let u = biot_savart_3d(&w)?;
    checks.push(OracleCheck::new(
        "biot_savart_curl_roundtrip",
        u.curl().sub(&w)?.hs_norm(0.0) / w.hs_norm(0.0),
        1e-12,
    ));

    // The stretching form is symmetric by construction; the residual is
    // floating-point-exact zero unless the symmetrization is broken.
    let a = random_divergence_free(l, n, seed.wrapping_add(30))?;
    let b = random_divergence_free(l, n, seed.wrapping_add(31))?;
    let ab = bilinear_b(&a, &b)?;
    checks.push(OracleCheck::new(
        "bilinear_symmetry",
        bilinear_b(&b, &a)?.sub(&ab)?.hs_norm(0.0) / ab.hs_norm(0.0),
        1e-13,
    ));

    // Meridian pullback of B(ω, ω) against the kernel path — the one check
    // that crosses between the 3-D lattice and the meridian quadrature.
    let ring = cfg.ring_on_grid()?;
    let sample = ring.sample(cfg.grid()?)?;
    let rule = PhiQuadRule::new(cfg.rule_order)?;
    let (pullback, probes) = stretching_pullback_residual(&ring, l, n, &sample, &rule, 0.0)?;
    checks.push(
        OracleCheck::new(
            "meridian_stretching_pullback",
            pullback,
            PULLBACK_BUDGET_COARSE,
        )
        .with_note(format!(
            "{probes} probe points; lattice-resolution limited, tightens as box_n grows"
        )),
    );

    // Local existence: the Picard map contracts on the minimal datum with
    // genuine self-interaction at a horizon satisfying the smallness
    // condition (empirically calibrated, see `empirical_bilinear_constant`).
    let w0 = crossed_shear_datum(l, cfg.picard_n, 0.05)?;
    let popts = PicardOptions {
        substeps: cfg.picard_substeps,
        ..PicardOptions::default()
    };
    let picard = picard_solve(&w0, cfg.sobolev_s, 0.5, &popts)?;
    let worst_ratio = picard
        .ratios
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
        .max(if picard.converged { 0.0 } else { f64::INFINITY });
    checks.push(
        OracleCheck::new("picard_contraction", worst_ratio, 1.0).with_note(format!(
            "{} iteration(s); final norm {:.6e} vs initial {:.6e}",
            picard.iterations, picard.final_norm, picard.initial_norm
        )),
    );

    let cs = empirical_bilinear_constant(l, cfg.picard_n, cfg.sobolev_s, seed, 5)?;
    let pass = checks.iter().all(|c| c.pass);
    Ok(OracleSuiteReport {
        box_len: l,
        box_n: n,
        picard_n: cfg.picard_n,
        sobolev_s: cfg.sobolev_s,
        seed,
        normalization_note: NORMALIZATION_NOTE,
        checks,
        empirical_bilinear_constant: cs,
        picard,
        pass,
    })
}
