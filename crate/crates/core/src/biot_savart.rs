//! Velocity recovery from azimuthal vorticity: the axisymmetric Biot–Savart law.
//!
//! The velocity induced at a meridian target `(r, z)` by odd-in-`z` vorticity stored
//! on the upper half-plane is a double sum of the reduced kernels of
//! [`crate::quadrature`] against the cell values,
//!
//! ```text
//! u_r(r, z) = (1/2π) Σ K_r(r, z; r̄, z̄) ω(r̄, z̄) ΔrΔz,      likewise u_z with K_z.
//! ```
//!
//! Naively that is `O(n⁴)` kernel evaluations per velocity field, each with an inner
//! azimuthal quadrature. Two structural facts make the production path much cheaper:
//!
//! * the kernels depend on the heights only through `z − z̄` and `z + z̄`, both of
//!   which take `O(n_z)` lattice values on a uniform grid, and
//! * their radial parts are built from two auxiliary functions
//!   `P(r, r̄; ζ) = Σ w s (A₋^{−3/2} − A₊^{−3/2})` and
//!   `S(r, r̄; ζ) = Σ w (A₋^{−3/2} + A₊^{−3/2})` (with `A_± = ζ² + r² + r̄² + δ² ± 2 r r̄ s`)
//!   that are symmetric in `r ↔ r̄`:
//!   `K_r = r̄ [(z−z̄) P(Δζ) − (z+z̄) P(Σζ)]` and `K_z = r̄ [S(Δζ) − S(Σζ)] − r [P(Δζ) − P(Σζ)]`.
//!
//! The solver therefore precomputes `P` and `S` once per (unordered) radius pair and
//! per height offset — `n_r(n_r+1)/2 × (3 n_z − 1)` values — and assembles velocities
//! by table lookups. Assembly is parallel over target rows; each target is summed in
//! a fixed pairwise order over source rows, so results are bit-identical for any
//! thread count.

use crate::error::{Error, Result};
use crate::field::{AxiGrid, AxiScalarField, AxiVelocity};
use crate::quadrature::{kernel_kr_odd, kernel_kz_full, KernelArgs, PhiQuadRule};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Default regularization length for a grid: half the cell diagonal.
///
/// Scaling `δ` with the mesh keeps the regularization error and the quadrature
/// error refining together.
pub fn default_delta(grid: &AxiGrid) -> f64 {
    0.5 * grid.dr().hypot(grid.dz())
}

/// Index of the unordered pair `(i, k)`, `i ≤ k`, in row-major upper-triangular order.
#[inline]
fn tri_index(n: usize, i: usize, k: usize) -> usize {
    debug_assert!(i <= k && k < n);
    i * (2 * n - i + 1) / 2 + (k - i)
}

/// Inverse of [`tri_index`]: recover `(i, k)` from the flat pair index.
fn untri_index(n: usize, idx: usize) -> (usize, usize) {
    // Solve base(i) = i n - i(i-1)/2 <= idx by the quadratic formula, then fix up
    // any off-by-one from the floating-point root.
    let nf = n as f64;
    let disc = (2.0 * nf + 1.0) * (2.0 * nf + 1.0) - 8.0 * idx as f64;
    let mut i = ((2.0 * nf + 1.0 - disc.sqrt()) / 2.0).floor() as usize;
    i = i.min(n - 1);
    loop {
        let base = i * (2 * n - i + 1) / 2;
        if base > idx {
            i -= 1;
            continue;
        }
        let next = (i + 1) * (2 * n - i) / 2;
        if idx >= next {
            i += 1;
            continue;
        }
        return (i, i + (idx - base));
    }
}

/// Precomputed `P` and `S` tables over radius pairs and height offsets.
struct KernelTables {
    n_z: usize,
    /// `P` at direct offsets `ζ = m Δz`, `m ∈ [0, n_z)`, blocked per pair.
    pd: Vec<f64>,
    /// `P` at image offsets `ζ = 2 z_min + (p+1) Δz`, `p ∈ [0, 2 n_z − 1)`.
    pi: Vec<f64>,
    /// `S` at direct offsets.
    sd: Vec<f64>,
    /// `S` at image offsets.
    si: Vec<f64>,
}

impl KernelTables {
    fn n_image(&self) -> usize {
        2 * self.n_z - 1
    }
}

/// Reusable Biot–Savart evaluator for one grid, quadrature rule and regularization.
///
/// Building the solver assembles the kernel tables (the dominant cost, amortized
/// over every evaluation at the same resolution); [`u_r`](Self::u_r) and
/// [`velocity`](Self::velocity) then reduce them against a vorticity field. The
/// time stepping loops hold one solver for the whole run.
pub struct MeridianVelocitySolver {
    grid: AxiGrid,
    delta: f64,
    rule: PhiQuadRule,
    tables: KernelTables,
}

impl MeridianVelocitySolver {
    /// Build tables for `grid` with quadrature `rule` and regularization `delta > 0`.
    ///
    /// A strictly positive `delta` is required here (unlike the pointwise kernels)
    /// because grid assembly always includes self and near-self interactions.
    pub fn new(grid: AxiGrid, rule: &PhiQuadRule, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!(
                "delta: grid velocity assembly requires a positive regularization \
                 length, got {delta}"
            )));
        }
        let n_r = grid.n_r;
        let n_z = grid.n_z;
        let n_img = 2 * n_z - 1;
        let n_pairs = n_r * (n_r + 1) / 2;
        let dz = grid.dz();
        let two_zmin = 2.0 * grid.z_min;
        // Quadrature node data: (w, s, w s).
        let nodes: Vec<(f64, f64, f64)> = rule
            .weights()
            .iter()
            .zip(rule.cos_nodes())
            .map(|(&w, &s)| (w, s, w * s))
            .collect();
        let mut pd = vec![0.0f64; n_pairs * n_z];
        let mut pi = vec![0.0f64; n_pairs * n_img];
        let mut sd = vec![0.0f64; n_pairs * n_z];
        let mut si = vec![0.0f64; n_pairs * n_img];
        pd.par_chunks_mut(n_z)
            .zip(sd.par_chunks_mut(n_z))
            .zip(pi.par_chunks_mut(n_img).zip(si.par_chunks_mut(n_img)))
            .enumerate()
            .for_each(|(pair, ((pd_row, sd_row), (pi_row, si_row)))| {
                let (i, k) = untri_index(n_r, pair);
                let ra = grid.r(i);
                let rb = grid.r(k);
                let c = ra * ra + rb * rb + delta * delta;
                let b2 = 2.0 * ra * rb;
                let fill = |zeta: f64, p_out: &mut f64, s_out: &mut f64| {
                    let d = zeta * zeta + c;
                    let mut p_acc = 0.0;
                    let mut s_acc = 0.0;
                    for &(w, s, ws) in &nodes {
                        let bs = b2 * s;
                        let em = pow_m32(d - bs);
                        let ep = pow_m32(d + bs);
                        p_acc += ws * (em - ep);
                        s_acc += w * (em + ep);
                    }
                    *p_out = p_acc;
                    *s_out = s_acc;
                };
                for m in 0..n_z {
                    fill(m as f64 * dz, &mut pd_row[m], &mut sd_row[m]);
                }
                for p in 0..n_img {
                    fill(two_zmin + (p as f64 + 1.0) * dz, &mut pi_row[p], &mut si_row[p]);
                }
            });
        Ok(Self {
            grid,
            delta,
            rule: rule.clone(),
            tables: KernelTables { n_z, pd, pi, sd, si },
        })
    }

    pub fn grid(&self) -> &AxiGrid {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The quadrature rule the tables were built with.
    pub fn rule(&self) -> &PhiQuadRule {
        &self.rule
    }

    fn check_field(&self, field: &AxiScalarField) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::Config(
                "velocity solver and field grids differ; rebuild the solver for this grid".into(),
            ));
        }
        Ok(())
    }

    /// Radial velocity on the full grid.
    pub fn u_r(&self, field: &AxiScalarField) -> Result<AxiScalarField> {
        self.check_field(field)?;
        let (full, _) = self.u_r_impl::<false>(field);
        Ok(AxiScalarField {
            grid: self.grid,
            values: full,
        })
    }

    /// Radial velocity together with its image-only part.
    ///
    /// The returned pair is `(u_r, u_r^img)` where `u_r^img` keeps only the mirror
    /// (`z + z̄`) kernel terms. The identity behind the growth functional pairs the
    /// vorticity against exactly that part: the direct terms cancel pairwise under
    /// the weighted sum, which the energy-rate verification exploits.
    pub fn u_r_parts(&self, field: &AxiScalarField) -> Result<(AxiScalarField, AxiScalarField)> {
        self.check_field(field)?;
        let (full, img) = self.u_r_impl::<true>(field);
        Ok((
            AxiScalarField {
                grid: self.grid,
                values: full,
            },
            AxiScalarField {
                grid: self.grid,
                values: img,
            },
        ))
    }

    fn u_r_impl<const SPLIT: bool>(&self, field: &AxiScalarField) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let (n_r, n_z) = (g.n_r, g.n_z);
        let dz = g.dz();
        let two_zmin = 2.0 * g.z_min;
        let scale = g.cell_area() / (2.0 * PI);
        let spans = row_spans(field);
        let radii: Vec<f64> = (0..n_r).map(|i| g.r(i)).collect();
        let tab = &self.tables;
        let n_img = tab.n_image();
        let mut out = vec![0.0f64; n_r * n_z];
        let mut out_img = vec![0.0f64; if SPLIT { n_r * n_z } else { 0 }];
        // One optional image row per target row so both paths share the loop shape.
        let img_rows: Vec<Option<&mut [f64]>> = if SPLIT {
            out_img.chunks_mut(n_z).map(Some).collect()
        } else {
            (0..n_r).map(|_| None).collect()
        };
        out.par_chunks_mut(n_z)
            .zip_eq(img_rows.into_par_iter())
            .enumerate()
            .for_each(|(i, (row, img_row))| {
                let mut qd = vec![0.0f64; n_z];
                let mut qi = vec![0.0f64; n_img];
                let mut acc = PairwiseRows::new(n_z);
                let mut acc_img = PairwiseRows::new(if SPLIT { n_z } else { 0 });
                for (k, span) in spans.iter().enumerate() {
                    let &(l0, l1) = match span {
                        Some(s) => s,
                        None => continue,
                    };
                    let pair = tri_index(n_r, i.min(k), i.max(k));
                    let pd = &tab.pd[pair * n_z..(pair + 1) * n_z];
                    let pi = &tab.pi[pair * n_img..(pair + 1) * n_img];
                    for (m, q) in qd.iter_mut().enumerate() {
                        *q = m as f64 * dz * pd[m];
                    }
                    for (p, q) in qi.iter_mut().enumerate() {
                        *q = (two_zmin + (p as f64 + 1.0) * dz) * pi[p];
                    }
                    let w = &field.values[k * n_z..(k + 1) * n_z];
                    let rk = radii[k];
                    for j in 0..n_z {
                        let mut direct = 0.0;
                        for l in l0..l1.min(j) {
                            direct += w[l] * qd[j - l];
                        }
                        for l in l0.max(j + 1)..l1 {
                            direct -= w[l] * qd[l - j];
                        }
                        let mut image = 0.0;
                        for l in l0..l1 {
                            image += w[l] * qi[j + l];
                        }
                        acc.push(j, rk * (direct - image));
                        if SPLIT {
                            acc_img.push(j, -rk * image);
                        }
                    }
                }
                for j in 0..n_z {
                    row[j] = acc.finalize(j) * scale;
                }
                if SPLIT {
                    let img_row = img_row.expect("image rows present when splitting");
                    for j in 0..n_z {
                        img_row[j] = acc_img.finalize(j) * scale;
                    }
                }
            });
        (out, out_img)
    }

    /// Full meridian velocity `(u_r, u_z)` on the grid.
    pub fn velocity(&self, field: &AxiScalarField) -> Result<AxiVelocity> {
        self.check_field(field)?;
        let (u_r, _) = self.u_r_impl::<false>(field);
        let g = &self.grid;
        let (n_r, n_z) = (g.n_r, g.n_z);
        let scale = g.cell_area() / (2.0 * PI);
        let spans = row_spans(field);
        let radii: Vec<f64> = (0..n_r).map(|i| g.r(i)).collect();
        let tab = &self.tables;
        let n_img = tab.n_image();
        let mut u_z = vec![0.0f64; n_r * n_z];
        u_z.par_chunks_mut(n_z).enumerate().for_each(|(i, row)| {
            let ri = radii[i];
            let mut acc = PairwiseRows::new(n_z);
            for (k, span) in spans.iter().enumerate() {
                let &(l0, l1) = match span {
                    Some(s) => s,
                    None => continue,
                };
                let pair = tri_index(n_r, i.min(k), i.max(k));
                let pd = &tab.pd[pair * n_z..(pair + 1) * n_z];
                let pi = &tab.pi[pair * n_img..(pair + 1) * n_img];
                let sd = &tab.sd[pair * n_z..(pair + 1) * n_z];
                let si = &tab.si[pair * n_img..(pair + 1) * n_img];
                let w = &field.values[k * n_z..(k + 1) * n_z];
                let rk = radii[k];
                for j in 0..n_z {
                    let mut s_delta = 0.0;
                    let mut p_delta = 0.0;
                    for l in l0..l1 {
                        let m = j.abs_diff(l);
                        s_delta += w[l] * sd[m];
                        p_delta += w[l] * pd[m];
                    }
                    let mut s_sigma = 0.0;
                    let mut p_sigma = 0.0;
                    for l in l0..l1 {
                        s_sigma += w[l] * si[j + l];
                        p_sigma += w[l] * pi[j + l];
                    }
                    // K_z = r̄ [E(Δζ) − E(Σζ)] with E(ζ) = r̄ S(ζ) − r P(ζ).
                    acc.push(j, rk * (rk * (s_delta - s_sigma) - ri * (p_delta - p_sigma)));
                }
            }
            for j in 0..n_z {
                row[j] = acc.finalize(j) * scale;
            }
        });
        Ok(AxiVelocity {
            grid: *g,
            u_r,
            u_z,
        })
    }
}

#[inline]
fn pow_m32(x: f64) -> f64 {
    1.0 / (x * x.sqrt())
}

/// Per-row half-open spans `[l0, l1)` of nonzero values, `None` for all-zero rows.
/// Compact supports make most rows empty or short; the assembly loops clip to these.
fn row_spans(field: &AxiScalarField) -> Vec<Option<(usize, usize)>> {
    let n_z = field.grid.n_z;
    (0..field.grid.n_r)
        .map(|k| {
            let row = &field.values[k * n_z..(k + 1) * n_z];
            let l0 = row.iter().position(|&v| v != 0.0)?;
            let l1 = n_z - row.iter().rev().position(|&v| v != 0.0).unwrap();
            Some((l0, l1))
        })
        .collect()
}

/// Fixed-shape pairwise (binary-counter) accumulator, one stream per target cell.
///
/// Contributions are merged exactly as in a balanced reduction tree over the push
/// sequence, independent of how work is scheduled, so velocity fields are
/// reproducible bit-for-bit across thread counts while keeping the roundoff growth
/// of pairwise summation.
struct PairwiseRows {
    stacks: Vec<f64>,
    lens: Vec<u8>,
    counts: Vec<u32>,
    width: usize,
}

const PAIRWISE_DEPTH: usize = 40;

impl PairwiseRows {
    fn new(width: usize) -> Self {
        Self {
            stacks: vec![0.0; width * PAIRWISE_DEPTH],
            lens: vec![0; width],
            counts: vec![0; width],
            width,
        }
    }

    #[inline]
    fn push(&mut self, j: usize, mut v: f64) {
        debug_assert!(j < self.width);
        let base = j * PAIRWISE_DEPTH;
        self.counts[j] += 1;
        let mut c = self.counts[j];
        let mut len = self.lens[j] as usize;
        while c & 1 == 0 {
            len -= 1;
            v += self.stacks[base + len];
            c >>= 1;
        }
        self.stacks[base + len] = v;
        self.lens[j] = (len + 1) as u8;
    }

    /// Combine the remaining partials from most- to least-recently pushed.
    fn finalize(&self, j: usize) -> f64 {
        let base = j * PAIRWISE_DEPTH;
        let len = self.lens[j] as usize;
        let mut acc = 0.0;
        for q in (0..len).rev() {
            acc += self.stacks[base + q];
        }
        acc
    }
}

/// One-shot radial velocity: build tables for the field's grid and evaluate.
///
/// Prefer holding a [`MeridianVelocitySolver`] when evaluating repeatedly at one
/// resolution; table assembly dominates a single call.
pub fn compute_u_r(field: &AxiScalarField, rule: &PhiQuadRule, delta: f64) -> Result<AxiScalarField> {
    MeridianVelocitySolver::new(field.grid, rule, delta)?.u_r(field)
}

/// One-shot full velocity; see [`compute_u_r`].
pub fn compute_velocity(field: &AxiScalarField, rule: &PhiQuadRule, delta: f64) -> Result<AxiVelocity> {
    MeridianVelocitySolver::new(field.grid, rule, delta)?.velocity(field)
}

/// Evaluate the induced velocity at arbitrary meridian points by direct kernel
/// summation over the field's support cells.
///
/// Unlike the table path this accepts any target (off-lattice, below the symmetry
/// plane, outside the grid) and any `delta ≥ 0`; a zero `delta` is exact but raises
/// a singular-evaluation error if a probe coincides with a source cell center.
pub fn velocity_at_probes(
    field: &AxiScalarField,
    rule: &PhiQuadRule,
    delta: f64,
    probes: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    let g = &field.grid;
    let mut cells = Vec::new();
    for i in 0..g.n_r {
        for j in 0..g.n_z {
            let w = field.get(i, j);
            if w != 0.0 {
                cells.push((g.r(i), g.z(j), w));
            }
        }
    }
    let scale = g.cell_area() / (2.0 * PI);
    probes
        .par_iter()
        .map(|&(rp, zp)| {
            if !(rp > 0.0) {
                return Err(Error::Domain(format!(
                    "velocity probes require r > 0, got ({rp}, {zp})"
                )));
            }
            let mut ur = 0.0;
            let mut uz = 0.0;
            for &(rb, zb, w) in &cells {
                let args = KernelArgs::new(rp, zp, rb, zb);
                ur += kernel_kr_odd(args, rule, delta)? * w;
                uz += kernel_kz_full(args, rule, delta)? * w;
            }
            Ok((ur * scale, uz * scale))
        })
        .collect()
}

/// Pointwise stretching rate `(u_r / r) ω` — the right-hand side of the reduced
/// dynamics before any time discretization.
///
/// Quadratic in the vorticity through `u_r`: rescaling `ω → λω` rescales the rate
/// by `λ²`, which is the scaling that produces finite-time blowup.
pub fn stretching_rate(omega: &AxiScalarField, u_r: &AxiScalarField) -> Result<AxiScalarField> {
    if omega.grid != u_r.grid {
        return Err(Error::Config(
            "stretching_rate: vorticity and velocity grids differ".into(),
        ));
    }
    let g = omega.grid;
    let mut out = AxiScalarField::zeros(g);
    for i in 0..g.n_r {
        let inv_r = 1.0 / g.r(i);
        for j in 0..g.n_z {
            let v = u_r.get(i, j) * inv_r * omega.get(i, j);
            out.set(i, j, v);
        }
    }
    Ok(out)
}
