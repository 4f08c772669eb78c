//! Full axisymmetric swirl-free Euler dynamics (advection restored), for the
//! depletion comparison against the stretching-only model.
//!
//! The vorticity equation in divergence form,
//! `∂_t ω + ∂_r(u_r ω) + ∂_z(u_z ω) = 0`, is discretized with a conservative
//! finite-volume scheme: minmod-limited linear reconstruction to faces, upwind
//! flux selection by the face-averaged velocity, and strong-stability-preserving
//! RK3 in time with one Biot–Savart solve per stage. Oddness across the symmetry
//! plane is built into the fluxes: the lower ghost band carries the odd
//! reflection of the first interior rows and the `z = 0` face flux is zero
//! identically (the odd extension vanishes there), so the stored upper half
//! evolves exactly as one half of the full antisymmetric problem.
//!
//! Conservation notes: interior fluxes telescope, so the half-plane circulation
//! `ΣΣ ω Δr Δz` is conserved to roundoff while the support stays inside the
//! grid. Kinetic energy is only conserved up to the scheme's dissipation — the
//! reports track its drift rather than assuming it.

use crate::biot_savart::MeridianVelocitySolver;
use crate::error::{Error, Result};
use crate::field::{
    functional_q, support_region, validate_geometry, AxiScalarField, AxiVelocity, SupportBox,
};
use crate::kappa::estimate_kappa;
use rayon::prelude::*;
use serde::Serialize;

/// Knobs for [`run_euler`]. `Default` is the standard comparison configuration
/// apart from the grid, which the caller picks.
#[derive(Debug, Clone)]
pub struct EulerRunOptions {
    /// Simulated horizon.
    pub horizon: f64,
    /// Courant factor for the step choice `Δt = cfl · min(Δr, Δz) / max|u|`.
    pub cfl: f64,
    /// Spacing of the diagnostic snapshots (κ, energy, support box).
    pub snapshot_dt: f64,
    /// Support threshold for κ(t), *relative to the current max*: advection
    /// schemes grow numerical tails, so an absolute cutoff would track noise.
    pub kappa_rel_threshold: f64,
    /// Refinement schedule for the κ search.
    pub kappa_schedule: Vec<usize>,
    /// Hard step budget.
    pub max_steps: usize,
    /// Consecutive step-halvings allowed when a stage trips the CFL check.
    pub max_rejects: usize,
    /// Instability guard: abort if `sup|ω|` exceeds this multiple of the initial
    /// value (pure transport plus bounded stretching cannot do that over the
    /// desk-scale horizons this mode runs).
    pub sup_guard_factor: f64,
}

impl Default for EulerRunOptions {
    fn default() -> Self {
        Self {
            horizon: 5.0,
            cfl: 0.4,
            snapshot_dt: 0.25,
            kappa_rel_threshold: 1e-6,
            kappa_schedule: crate::kappa::default_schedule(),
            max_steps: 1_000_000,
            max_rejects: 8,
            sup_guard_factor: 100.0,
        }
    }
}

/// Time-series record of an Euler run: the anisotropy/depletion diagnostics.
/// The per-snapshot vectors are parallel.
#[derive(Debug, Clone, Serialize)]
pub struct AnisoReport {
    pub times: Vec<f64>,
    pub q_values: Vec<f64>,
    /// κ of the thresholded support at each snapshot (0 when the support has
    /// flattened onto the symmetry plane or axis, where the kernel infimum
    /// degenerates to zero).
    pub kappa_values: Vec<f64>,
    /// Trapezoidal running integral of κ(t); nondecreasing.
    pub kappa_cumulative: Vec<f64>,
    /// The comparison bound `1/(2Q⁰)` the cumulative integral is measured against.
    pub bound: f64,
    pub energy_values: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub support_boxes: Vec<SupportBox>,
    /// Radial over axial extent of the support box — the anisotropy metric.
    pub aspect_ratios: Vec<f64>,
    /// Worst relative energy deviation from the initial value.
    pub energy_drift_max: f64,
    /// Worst positive cell value seen at any snapshot (sign preservation).
    pub max_positive_value: f64,
    pub q0: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Snapshots where the κ search degenerated (support at the axis/plane).
    pub kappa_degenerate_snapshots: usize,
}

/// Minmod slope limiter.
#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Upwind flux through one face from reconstructed left/right states.
#[inline]
fn upwind_flux(u_face: f64, w_left: f64, w_right: f64) -> f64 {
    if u_face >= 0.0 {
        u_face * w_left
    } else {
        u_face * w_right
    }
}

/// Conservative flux-form right-hand side `−[∂_r(u_r ω) + ∂_z(u_z ω)]`.
///
/// Reconstruction is minmod-limited linear (second order where smooth), upwinded
/// by arithmetic face-average velocities. Ghost values: zero outside the outer
/// boundaries (compact support is a precondition of the runs), odd reflection
/// below `z = 0`, where the face flux is identically zero.
pub fn euler_rhs(field: &AxiScalarField, vel: &AxiVelocity) -> Result<AxiScalarField> {
    if vel.grid != field.grid {
        return Err(Error::Config(
            "velocity and vorticity grids differ; evaluate both on one grid".into(),
        ));
    }
    let g = field.grid;
    let (n_r, n_z) = (g.n_r, g.n_z);
    let (dr, dz) = (g.dr(), g.dz());
    let w = &field.values;

    // Radial faces: f_r[i][j] is the flux through the face between cells i-1 and
    // i (i = 0 and i = n_r are the outer boundaries).
    let mut f_r = vec![0.0f64; (n_r + 1) * n_z];
    f_r.par_chunks_mut(n_z).enumerate().for_each(|(i, row)| {
        if i == 0 || i == n_r {
            // Compact support: the boundary states are zero, so the flux is too.
            return;
        }
        let at = |ii: isize, j: usize| -> f64 {
            if ii < 0 || ii as usize >= n_r {
                0.0
            } else {
                w[g.idx(ii as usize, j)]
            }
        };
        for (j, out) in row.iter_mut().enumerate() {
            let im = i as isize - 1;
            let wl_c = at(im, j);
            let wr_c = at(i as isize, j);
            let slope_l = minmod(wl_c - at(im - 1, j), wr_c - wl_c);
            let slope_r = minmod(wr_c - wl_c, at(i as isize + 1, j) - wr_c);
            let u_face = 0.5 * (vel.u_r[g.idx(i - 1, j)] + vel.u_r[g.idx(i, j)]);
            *out = upwind_flux(u_face, wl_c + 0.5 * slope_l, wr_c - 0.5 * slope_r);
        }
    });

    // Axial faces: f_z[i][j] is the flux through the face between cells j-1 and
    // j of row i. The j = 0 face is the symmetry plane when z_min = 0.
    let plane_at_zero = g.z_min == 0.0;
    let mut f_z = vec![0.0f64; n_r * (n_z + 1)];
    f_z.par_chunks_mut(n_z + 1).enumerate().for_each(|(i, row)| {
        // Odd reflection below the plane; zero above the top boundary.
        let at = |jj: isize| -> f64 {
            if jj >= 0 && (jj as usize) < n_z {
                w[g.idx(i, jj as usize)]
            } else if jj < 0 && plane_at_zero {
                -w[g.idx(i, (-1 - jj) as usize)]
            } else {
                0.0
            }
        };
        let u_at = |jj: isize| -> f64 {
            // u_z is odd across the plane (no flow through it).
            if jj >= 0 && (jj as usize) < n_z {
                vel.u_z[g.idx(i, jj as usize)]
            } else if jj < 0 && plane_at_zero {
                -vel.u_z[g.idx(i, (-1 - jj) as usize)]
            } else {
                0.0
            }
        };
        for (j, out) in row.iter_mut().enumerate() {
            if j == 0 && plane_at_zero {
                // The odd extension vanishes on the plane: exact zero flux. This
                // makes oddness and half-plane circulation structural.
                *out = 0.0;
                continue;
            }
            let jm = j as isize - 1;
            let wl_c = at(jm);
            let wr_c = at(j as isize);
            let slope_l = minmod(wl_c - at(jm - 1), wr_c - wl_c);
            let slope_r = minmod(wr_c - wl_c, at(j as isize + 1) - wr_c);
            let u_face = 0.5 * (u_at(jm) + u_at(j as isize));
            *out = upwind_flux(u_face, wl_c + 0.5 * slope_l, wr_c - 0.5 * slope_r);
        }
    });

    let mut rhs = AxiScalarField::zeros(g);
    rhs.values
        .par_chunks_mut(n_z)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                let div_r = (f_r[(i + 1) * n_z + j] - f_r[i * n_z + j]) / dr;
                let div_z = (f_z[i * (n_z + 1) + j + 1] - f_z[i * (n_z + 1) + j]) / dz;
                *out = -(div_r + div_z);
            }
        });
    Ok(rhs)
}

/// Outcome of one attempted SSP-RK3 step.
enum StepOutcome {
    Accepted(AxiScalarField),
    /// Worst `|u| Δt / Δx` over the stages; > 1 means the step must shrink.
    CflExceeded(f64),
}

/// One SSP-RK3 step with a fresh velocity solve per stage and a CFL check on
/// every stage velocity.
fn try_rk3_step(
    field: &AxiScalarField,
    solver: &MeridianVelocitySolver,
    dt: f64,
    first_stage_vel: &AxiVelocity,
) -> Result<StepOutcome> {
    let g = field.grid;
    let h = g.dr().min(g.dz());
    let courant = |v: &AxiVelocity| v.max_abs() * dt / h;

    let mut worst = courant(first_stage_vel);
    if worst > 1.0 {
        return Ok(StepOutcome::CflExceeded(worst));
    }
    let k1 = euler_rhs(field, first_stage_vel)?;
    let mut s1 = field.clone();
    s1.add_scaled(dt, &k1);

    let v2 = solver.velocity(&s1)?;
    worst = worst.max(courant(&v2));
    if worst > 1.0 {
        return Ok(StepOutcome::CflExceeded(worst));
    }
    let k2 = euler_rhs(&s1, &v2)?;
    let mut s2 = field.clone();
    s2.scale_in_place(0.75);
    s2.add_scaled(0.25, &s1);
    s2.add_scaled(0.25 * dt, &k2);

    let v3 = solver.velocity(&s2)?;
    worst = worst.max(courant(&v3));
    if worst > 1.0 {
        return Ok(StepOutcome::CflExceeded(worst));
    }
    let k3 = euler_rhs(&s2, &v3)?;
    let mut out = field.clone();
    out.scale_in_place(1.0 / 3.0);
    out.add_scaled(2.0 / 3.0, &s2);
    out.add_scaled(2.0 / 3.0 * dt, &k3);
    Ok(StepOutcome::Accepted(out))
}

/// Kinetic energy of the full (odd-extended) flow on the grid window,
/// `2π ∫∫_{both halves} (u_r² + u_z²) r dr dz = 4π Σ_upper (u_r² + u_z²) r ΔrΔz`.
/// The window truncates the far field, so only drift is meaningful, not the
/// absolute value.
pub fn kinetic_energy(vel: &AxiVelocity) -> f64 {
    let g = vel.grid;
    let mut acc = 0.0;
    for i in 0..g.n_r {
        let r = g.r(i);
        let mut row = 0.0;
        for j in 0..g.n_z {
            let (ur, uz) = (vel.u_r[g.idx(i, j)], vel.u_z[g.idx(i, j)]);
            row += ur * ur + uz * uz;
        }
        acc += r * row;
    }
    4.0 * std::f64::consts::PI * acc * g.cell_area()
}

/// Half-plane circulation-type integral `ΣΣ ω Δr Δz` (conserved by the scheme
/// while the support stays interior).
pub fn circulation(field: &AxiScalarField) -> f64 {
    field.values.iter().sum::<f64>() * field.grid.cell_area()
}

/// Evolve `initial` under the full Euler dynamics to the horizon, recording the
/// anisotropy/depletion diagnostics at snapshot times.
///
/// `on_snapshot` is invoked at every diagnostic time with `(step, time, state)`.
pub fn run_euler<F>(
    initial: &AxiScalarField,
    solver: &MeridianVelocitySolver,
    opts: &EulerRunOptions,
    mut on_snapshot: F,
) -> Result<AnisoReport>
where
    F: FnMut(usize, f64, &AxiScalarField) -> Result<()>,
{
    let geometry = validate_geometry(initial, 1e-12);
    if !geometry.sign_ok() {
        return Err(Error::Geometry(format!(
            "Euler runs require ω ≤ 0 on the upper half-plane; found {} positive cells",
            geometry.positive_cell_count
        )));
    }
    let q0 = functional_q(initial);
    let sup0 = initial.sup_norm();

    let mut report = AnisoReport {
        times: Vec::new(),
        q_values: Vec::new(),
        kappa_values: Vec::new(),
        kappa_cumulative: Vec::new(),
        bound: if q0 > 0.0 { 1.0 / (2.0 * q0) } else { f64::INFINITY },
        energy_values: Vec::new(),
        sup_norms: Vec::new(),
        support_boxes: Vec::new(),
        aspect_ratios: Vec::new(),
        energy_drift_max: 0.0,
        max_positive_value: 0.0,
        q0,
        steps: 0,
        rejected_steps: 0,
        kappa_degenerate_snapshots: 0,
    };
    if sup0 == 0.0 {
        return Ok(report);
    }

    let g = initial.grid;
    let h = g.dr().min(g.dz());
    let mut field = initial.clone();
    let mut t = 0.0;
    let mut next_snapshot = 0.0;
    let mut energy0 = None;

    for step in 0..=opts.max_steps {
        if field.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite Euler state at step {step} (t = {t:.6})"
            )));
        }
        let sup = field.sup_norm();
        if sup > sup0 * opts.sup_guard_factor {
            return Err(Error::Numerical(format!(
                "Euler sup norm grew {}x the initial value by t = {t:.6}; \
                 the scheme is under-resolved for this datum",
                opts.sup_guard_factor
            )));
        }
        let vel = solver.velocity(&field)?;

        // Snapshot diagnostics at the scheduled times (and at the horizon).
        let at_horizon = t >= opts.horizon * (1.0 - 1e-12);
        if t >= next_snapshot * (1.0 - 1e-12) || at_horizon {
            let energy = kinetic_energy(&vel);
            let e0 = *energy0.get_or_insert(energy);
            report.energy_drift_max = report
                .energy_drift_max
                .max((energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
            let geom = validate_geometry(&field, 1e-12);
            report.max_positive_value = report.max_positive_value.max(geom.max_positive);

            let threshold = opts.kappa_rel_threshold * sup;
            let (kappa, bbox) = match support_region(&field, threshold) {
                Ok(region) => {
                    let bbox = region.bbox;
                    match estimate_kappa(&region, solver.rule(), &opts.kappa_schedule) {
                        Ok(est) => (est.value, bbox),
                        Err(Error::Domain(_)) => {
                            // Support reached the axis/plane: the kernel infimum
                            // degenerates to zero. Record the honest limit.
                            report.kappa_degenerate_snapshots += 1;
                            (0.0, bbox)
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::EmptySupport(_)) => (
                    0.0,
                    SupportBox {
                        r_lo: 0.0,
                        r_hi: 0.0,
                        z_lo: 0.0,
                        z_hi: 0.0,
                    },
                ),
                Err(e) => return Err(e),
            };
            let cumulative = match report.times.last() {
                Some(&prev_t) => {
                    report.kappa_cumulative.last().unwrap()
                        + 0.5 * (kappa + report.kappa_values.last().unwrap()) * (t - prev_t)
                }
                None => 0.0,
            };
            report.times.push(t);
            report.q_values.push(functional_q(&field));
            report.kappa_values.push(kappa);
            report.kappa_cumulative.push(cumulative);
            report.energy_values.push(energy);
            report.sup_norms.push(sup);
            let aspect = if bbox.z_hi > bbox.z_lo {
                (bbox.r_hi - bbox.r_lo) / (bbox.z_hi - bbox.z_lo)
            } else {
                f64::NAN
            };
            report.support_boxes.push(bbox);
            report.aspect_ratios.push(aspect);
            on_snapshot(step, t, &field)?;
            while next_snapshot <= t * (1.0 + 1e-12) {
                next_snapshot += opts.snapshot_dt;
            }
        }
        if at_horizon {
            report.steps = step;
            return Ok(report);
        }
        if step == opts.max_steps {
            break;
        }

        // Step choice from the current velocity, clipped to the next diagnostic
        // time and the horizon; stages re-check the CFL bound and reject.
        let mut dt = opts.cfl * h / vel.max_abs().max(1e-12);
        dt = dt.min(next_snapshot - t).min(opts.horizon - t);
        let mut accepted = None;
        let mut last_ratio = 0.0;
        for _ in 0..=opts.max_rejects {
            match try_rk3_step(&field, solver, dt, &vel)? {
                StepOutcome::Accepted(next) => {
                    accepted = Some(next);
                    break;
                }
                StepOutcome::CflExceeded(ratio) => {
                    report.rejected_steps += 1;
                    last_ratio = ratio;
                    dt *= 0.5;
                }
            }
        }
        field = accepted.ok_or_else(|| {
            Error::Numerical(format!(
                "step at t = {t:.6} still violates the CFL bound after {} halvings \
                 (last |u|Δt/Δx = {last_ratio:.3})",
                opts.max_rejects
            ))
        })?;
        t += dt;
    }
    Err(Error::Numerical(format!(
        "Euler run exhausted {} steps before reaching t = {}",
        opts.max_steps, opts.horizon
    )))
}

/// `dQ/dt` implied by a right-hand side: `−Σ r² rhs ΔrΔz`.
pub fn q_rate_of(rhs: &AxiScalarField) -> f64 {
    let g = rhs.grid;
    let mut acc = 0.0;
    for i in 0..g.n_r {
        let r2 = g.r(i) * g.r(i);
        let mut row = 0.0;
        for j in 0..g.n_z {
            row += rhs.get(i, j);
        }
        acc += r2 * row;
    }
    -acc * g.cell_area()
}

/// Side-by-side run of the stretching-only model and full Euler from identical
/// initial data.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    /// `(dQ/dt)_Euler / (dQ/dt)_IVSE` at `t = 0`.
    pub factor_ratio: f64,
    pub dqdt_euler0: f64,
    pub dqdt_ivse0: f64,
    pub euler: AnisoReport,
    /// IVSE trace sampled on the Euler snapshot grid.
    pub ivse_times: Vec<f64>,
    pub ivse_q_values: Vec<f64>,
    /// κ of the (fixed) IVSE support.
    pub ivse_kappa: f64,
    /// True when the IVSE trace strictly dominates Euler's at every snapshot
    /// time ≥ 1.
    pub depletion_from_t1: bool,
    pub q_ivse_at_1: f64,
    pub q_euler_at_1: f64,
}

/// Run both dynamics from `initial` and assemble the depletion comparison.
pub fn compare_ivse_vs_euler(
    initial: &AxiScalarField,
    solver: &MeridianVelocitySolver,
    euler_opts: &EulerRunOptions,
) -> Result<CompareReport> {
    // Factor-2 check at t = 0: identical state, identical velocity, the two
    // right-hand sides.
    let vel = solver.velocity(initial)?;
    let rhs_euler = euler_rhs(initial, &vel)?;
    let u_r = AxiScalarField {
        grid: vel.grid,
        values: vel.u_r.clone(),
    };
    let rhs_ivse = crate::biot_savart::stretching_rate(initial, &u_r)?;
    let dqdt_euler0 = q_rate_of(&rhs_euler);
    let dqdt_ivse0 = q_rate_of(&rhs_ivse);

    let euler_report = run_euler(initial, solver, euler_opts, |_, _, _| Ok(()))?;

    let ivse_opts = crate::dynamics::IvseRunOptions {
        horizon: Some(euler_opts.horizon),
        sample_dt: Some(euler_opts.snapshot_dt),
        kappa_schedule: euler_opts.kappa_schedule.clone(),
        ..Default::default()
    };
    let ivse_report = crate::dynamics::run_ivse(initial, solver, &ivse_opts, |_, _, _| Ok(()))?;

    // Sample the IVSE trace at the Euler snapshot times (its rows are clipped to
    // land on those times; interpolate defensively anyway).
    let sample = |t: f64| -> f64 { interp(&ivse_report.times, &ivse_report.q_values, t) };
    let ivse_q_values: Vec<f64> = euler_report.times.iter().map(|&t| sample(t)).collect();
    let depletion_from_t1 = euler_report
        .times
        .iter()
        .zip(euler_report.q_values.iter().zip(&ivse_q_values))
        .filter(|(&t, _)| t >= 1.0 - 1e-9)
        .all(|(_, (&qe, &qi))| qi > qe);

    Ok(CompareReport {
        factor_ratio: dqdt_euler0 / dqdt_ivse0,
        dqdt_euler0,
        dqdt_ivse0,
        ivse_times: euler_report.times.clone(),
        ivse_q_values: ivse_q_values.clone(),
        ivse_kappa: ivse_report.kappa,
        depletion_from_t1,
        q_ivse_at_1: interp(&euler_report.times, &ivse_q_values, 1.0),
        q_euler_at_1: interp(&euler_report.times, &euler_report.q_values, 1.0),
        euler: euler_report,
    })
}

/// Piecewise-linear interpolation on a sorted abscissa (clamped at the ends).
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    match xs.iter().position(|&v| v >= x) {
        Some(0) => ys[0],
        None => *ys.last().unwrap(),
        Some(k) => {
            let (x0, x1) = (xs[k - 1], xs[k]);
            let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            ys[k - 1] * (1.0 - w) + ys[k] * w
        }
    }
}
