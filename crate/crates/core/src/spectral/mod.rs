//! Fully three-dimensional periodic spectral reference implementations.
//!
//! Everything in this module lives on a periodic box `[0, L)³` sampled on an
//! `n³` lattice and exists to cross-check the meridian (axisymmetric) code
//! paths against genuinely 3-D operators: Biot–Savart inversion, the Helmholtz
//! projection, Sobolev norms, the symmetrized vortex-stretching bilinear form,
//! and a Picard fixed-point solver for the integral form of the dynamics.
//!
//! # Conventions
//!
//! Fields are stored as Fourier coefficients `c_k` on the integer mode lattice
//! `k ∈ {−n/2+1, …, n/2}³`, with `f(x) = Σ_k c_k e^{2πi k·x/L}`. The physical
//! frequency of mode `k` is `ξ = k/L`, so a derivative `∂_j` multiplies by
//! `2πi k_j/L` and the Sobolev weight reads `(1 + 4π²|k|²/L²)^s`. Norms are
//! box-integral normalized,
//!
//! ```text
//! ‖f‖²_{H^s} = L³ Σ_k (1 + 4π²|k|²/L²)^s |c_k|²,
//! ```
//!
//! which at `s = 0` is exactly `∫_box |f|²` (Parseval). This is the natural
//! discretization of the whole-space norm for fields supported well inside the
//! box; the box length enters only through this normalization and reports that
//! carry spectral numbers state it.
//!
//! Derivative-like operators (gradient, curl, divergence, Biot–Savart,
//! Helmholtz projection) use wavenumbers with the Nyquist plane zeroed, the
//! usual choice that keeps them conjugate-symmetry-preserving on real data.
//! All smooth-field constructors truncate well below Nyquist, so the
//! convention is only visible on adversarial inputs.

mod fft;

pub use fft::Fft3;

use crate::error::{Error, Result};
use crate::field::{AxiScalarField, RingPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// A vector field on the periodic box, held as Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralVectorField {
    box_len: f64,
    n: usize,
    /// Coefficient arrays for the three Cartesian components, each of length
    /// `n³`, indexed `(ix·n + iy)·n + iz`.
    pub comps: [Vec<Complex64>; 3],
}

/// Signed integer mode for lattice index `i` (`i ↦ i` up to `n/2`, then `i − n`).
#[inline]
fn mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Derivative wavenumber: as [`mode`] but with the Nyquist plane zeroed.
#[inline]
fn dmode(i: usize, n: usize) -> f64 {
    if n % 2 == 0 && i == n / 2 {
        0.0
    } else {
        mode(i, n) as f64
    }
}

impl SpectralVectorField {
    /// Zero field on an `n³` lattice over `[0, box_len)³`.
    pub fn zeros(box_len: f64, n: usize) -> Result<Self> {
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(Error::Config(format!(
                "box_len: periodic box length must be positive and finite, got {box_len}"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "box_n: lattice size must be even and at least 4, got {n}"
            )));
        }
        let len = n * n * n;
        Ok(Self {
            box_len,
            n,
            comps: [
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
            ],
        })
    }

    /// Build from physical samples of the three components.
    pub fn from_physical(box_len: f64, n: usize, physical: [Vec<f64>; 3]) -> Result<Self> {
        let mut out = Self::zeros(box_len, n)?;
        let fft = Fft3::new(n);
        for (c, samples) in out.comps.iter_mut().zip(physical.iter()) {
            if samples.len() != fft.len() {
                return Err(Error::Config(format!(
                    "physical component length {} does not match lattice size {}",
                    samples.len(),
                    fft.len()
                )));
            }
            for (dst, &v) in c.iter_mut().zip(samples) {
                *dst = Complex64::new(v, 0.0);
            }
            fft.forward(c);
        }
        Ok(out)
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.box_len != other.box_len {
            return Err(Error::Config(format!(
                "spectral fields live on different boxes: {}³ over L = {} vs {}³ over L = {}",
                self.n, self.box_len, other.n, other.box_len
            )));
        }
        Ok(())
    }

    /// The `k = 0` coefficient of each component — the mean of the field.
    pub fn mean_mode(&self) -> [Complex64; 3] {
        [self.comps[0][0], self.comps[1][0], self.comps[2][0]]
    }

    /// Physical samples of the three components (imaginary parts, which are at
    /// roundoff level for conjugate-symmetric coefficients, are dropped).
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let fft = Fft3::new(self.n);
        let mut out: [Vec<f64>; 3] = Default::default();
        for (dst, c) in out.iter_mut().zip(self.comps.iter()) {
            let mut buf = c.clone();
            fft.inverse(&mut buf);
            *dst = buf.iter().map(|v| v.re).collect();
        }
        out
    }

    /// In-place `self += alpha · other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (c, o) in self.comps.iter_mut().zip(other.comps.iter()) {
            for (a, b) in c.iter_mut().zip(o) {
                *a += alpha * b;
            }
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, alpha: f64) {
        for c in self.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= alpha;
            }
        }
    }

    /// `self − other` as a new field.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(-1.0, other)?;
        Ok(out)
    }

    /// Sobolev norm `‖·‖_{H^s}` with the weight `(1 + 4π²|k|²/L²)^s` (see the
    /// module docs for the box normalization). `s = 0` is the L² norm.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let (n, l) = (self.n, self.box_len);
        let mut acc = 0.0;
        for ix in 0..n {
            let kx = mode(ix, n) as f64;
            for iy in 0..n {
                let ky = mode(iy, n) as f64;
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = mode(iz, n) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    let w = (1.0 + 4.0 * PI * PI * k2 / (l * l)).powf(s);
                    let m2 = self.comps[0][base + iz].norm_sqr()
                        + self.comps[1][base + iz].norm_sqr()
                        + self.comps[2][base + iz].norm_sqr();
                    acc += w * m2;
                }
            }
        }
        (l * l * l * acc).sqrt()
    }

    /// Sobolev norm of the full gradient tensor, `‖∇v‖_{H^s}` with
    /// `‖∇v‖² = Σ_{j,c} ‖∂_j v_c‖²`, evaluated directly in frequency space.
    pub fn gradient_hs_norm(&self, s: f64) -> f64 {
        let (n, l) = (self.n, self.box_len);
        let four_pi2 = 4.0 * PI * PI;
        let mut acc = 0.0;
        for ix in 0..n {
            let kx = mode(ix, n) as f64;
            let dx = dmode(ix, n);
            for iy in 0..n {
                let ky = mode(iy, n) as f64;
                let dy = dmode(iy, n);
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = mode(iz, n) as f64;
                    let dz = dmode(iz, n);
                    let k2 = kx * kx + ky * ky + kz * kz;
                    let d2 = dx * dx + dy * dy + dz * dz;
                    let w = (1.0 + four_pi2 * k2 / (l * l)).powf(s);
                    let m2 = self.comps[0][base + iz].norm_sqr()
                        + self.comps[1][base + iz].norm_sqr()
                        + self.comps[2][base + iz].norm_sqr();
                    acc += w * four_pi2 * d2 / (l * l) * m2;
                }
            }
        }
        (l * l * l * acc).sqrt()
    }

    /// Leray–Helmholtz projection onto divergence-free fields:
    /// `v̂ ↦ v̂ − k (k·v̂)/|k|²` mode by mode. The zero mode (and pure-Nyquist
    /// modes, whose derivative wavenumber vanishes) pass through untouched.
    pub fn helmholtz_project(&self) -> Self {
        let mut out = self.clone();
        let n = self.n;
        for ix in 0..n {
            let kx = dmode(ix, n);
            for iy in 0..n {
                let ky = dmode(iy, n);
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = dmode(iz, n);
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 == 0.0 {
                        continue;
                    }
                    let i = base + iz;
                    let dot = kx * out.comps[0][i] + ky * out.comps[1][i] + kz * out.comps[2][i];
                    let f = dot / k2;
                    out.comps[0][i] -= kx * f;
                    out.comps[1][i] -= ky * f;
                    out.comps[2][i] -= kz * f;
                }
            }
        }
        out
    }

    /// Scale-free divergence diagnostic: `‖k·v̂‖ / ‖ |k| |v̂| ‖` over all modes
    /// (derivative wavenumbers). Zero for exactly solenoidal coefficients; `0`
    /// is also returned for fields with no nonconstant content.
    pub fn divergence_residual(&self) -> f64 {
        let n = self.n;
        let mut num = 0.0;
        let mut den = 0.0;
        for ix in 0..n {
            let kx = dmode(ix, n);
            for iy in 0..n {
                let ky = dmode(iy, n);
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = dmode(iz, n);
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 == 0.0 {
                        continue;
                    }
                    let i = base + iz;
                    let dot =
                        kx * self.comps[0][i] + ky * self.comps[1][i] + kz * self.comps[2][i];
                    num += dot.norm_sqr();
                    den += k2
                        * (self.comps[0][i].norm_sqr()
                            + self.comps[1][i].norm_sqr()
                            + self.comps[2][i].norm_sqr());
                }
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Curl in frequency space, `ĉ = 2πi (k/L) × v̂`.
    pub fn curl(&self) -> Self {
        let mut out = self.clone();
        let (n, l) = (self.n, self.box_len);
        let two_pi_over_l = 2.0 * PI / l;
        for ix in 0..n {
            let kx = dmode(ix, n) * two_pi_over_l;
            for iy in 0..n {
                let ky = dmode(iy, n) * two_pi_over_l;
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = dmode(iz, n) * two_pi_over_l;
                    let i = base + iz;
                    let (vx, vy, vz) = (self.comps[0][i], self.comps[1][i], self.comps[2][i]);
                    let im = Complex64::new(0.0, 1.0);
                    out.comps[0][i] = im * (ky * vz - kz * vy);
                    out.comps[1][i] = im * (kz * vx - kx * vz);
                    out.comps[2][i] = im * (kx * vy - ky * vx);
                }
            }
        }
        out
    }

    /// Copy with all modes outside the 2/3-rule ball zeroed
    /// (`max_j |k_j| > ⌊n/3⌋`).
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        let n = self.n;
        let keep = (n / 3) as i64;
        for ix in 0..n {
            let kx = mode(ix, n);
            for iy in 0..n {
                let ky = mode(iy, n);
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    let kz = mode(iz, n);
                    if kx.abs() > keep || ky.abs() > keep || kz.abs() > keep {
                        let i = base + iz;
                        out.comps[0][i] = Complex64::default();
                        out.comps[1][i] = Complex64::default();
                        out.comps[2][i] = Complex64::default();
                    }
                }
            }
        }
        out
    }
}

/// `H^s` inner product matching [`SpectralVectorField::hs_norm`]
/// (`hs_inner(v, v, s) = ‖v‖²`).
pub fn hs_inner(a: &SpectralVectorField, b: &SpectralVectorField, s: f64) -> Result<f64> {
    a.check_compatible(b)?;
    let (n, l) = (a.n, a.box_len);
    let mut acc = 0.0;
    for ix in 0..n {
        let kx = mode(ix, n) as f64;
        for iy in 0..n {
            let ky = mode(iy, n) as f64;
            let base = (ix * n + iy) * n;
            for iz in 0..n {
                let kz = mode(iz, n) as f64;
                let k2 = kx * kx + ky * ky + kz * kz;
                let w = (1.0 + 4.0 * PI * PI * k2 / (l * l)).powf(s);
                let i = base + iz;
                let dot = (a.comps[0][i] * b.comps[0][i].conj()
                    + a.comps[1][i] * b.comps[1][i].conj()
                    + a.comps[2][i] * b.comps[2][i].conj())
                .re;
                acc += w * dot;
            }
        }
    }
    Ok(l * l * l * acc)
}

/// Velocity from vorticity on the periodic box: `u = ∇ × (−Δ)⁻¹ ω`, i.e.
/// `û = i L (k × ω̂)/(2π|k|²)` mode by mode.
///
/// The vorticity must be mean-free — on the torus a nonzero mean vorticity has
/// no stream function — so a mean mode above roundoff (relative to the overall
/// coefficient mass) is a domain error rather than something to silently drop.
pub fn biot_savart_3d(omega: &SpectralVectorField) -> Result<SpectralVectorField> {
    let total: f64 = omega
        .comps
        .iter()
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let mean: f64 = omega
        .mean_mode()
        .iter()
        .map(|m| m.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if total > 0.0 && mean > 1e-12 * total {
        return Err(Error::Domain(format!(
            "biot_savart_3d requires mean-free vorticity; |mean| = {:.3e} vs coefficient mass {:.3e}",
            mean, total
        )));
    }
    let mut out = omega.clone();
    let (n, l) = (omega.n, omega.box_len);
    for ix in 0..n {
        let kx = dmode(ix, n);
        for iy in 0..n {
            let ky = dmode(iy, n);
            let base = (ix * n + iy) * n;
            for iz in 0..n {
                let kz = dmode(iz, n);
                let k2 = kx * kx + ky * ky + kz * kz;
                let i = base + iz;
                if k2 == 0.0 {
                    out.comps[0][i] = Complex64::default();
                    out.comps[1][i] = Complex64::default();
                    out.comps[2][i] = Complex64::default();
                    continue;
                }
                let (wx, wy, wz) = (omega.comps[0][i], omega.comps[1][i], omega.comps[2][i]);
                let f = Complex64::new(0.0, l / (2.0 * PI * k2));
                out.comps[0][i] = f * (ky * wz - kz * wy);
                out.comps[1][i] = f * (kz * wx - kx * wz);
                out.comps[2][i] = f * (kx * wy - ky * wx);
            }
        }
    }
    Ok(out)
}

/// The symmetrized vortex-stretching form
/// `B(a, b) = ½ P_df[(a·∇)u_b + (b·∇)u_a]` with `u_f = biot_savart_3d(f)`,
/// evaluated pseudo-spectrally with 2/3-rule dealiasing (inputs are truncated,
/// products formed on the lattice, the result truncated again and projected).
///
/// Symmetry `B(a, b) = B(b, a)` is structural — the two terms are computed by
/// the same code path and added — so it holds to floating-point exactness.
/// Passing the same field twice skips the duplicate velocity solve.
pub fn bilinear_b(
    a: &SpectralVectorField,
    b: &SpectralVectorField,
) -> Result<SpectralVectorField> {
    a.check_compatible(b)?;
    let (n, l) = (a.n, a.box_len);
    if n / 3 < 2 {
        return Err(Error::Domain(format!(
            "bilinear_b: lattice size {n} leaves fewer than two modes after 2/3 dealiasing"
        )));
    }
    let same = std::ptr::eq(a, b);
    let fft = Fft3::new(n);

    let at = a.dealiased();
    let ua = biot_savart_3d(&at)?;
    let a_phys = at.to_physical();
    let (bt, ub, b_phys);
    let (bt_ref, ub_ref, b_phys_ref) = if same {
        (&at, &ua, &a_phys)
    } else {
        bt = b.dealiased();
        ub = biot_savart_3d(&bt)?;
        b_phys = bt.to_physical();
        (&bt, &ub, &b_phys)
    };
    let _ = bt_ref;

    let len = n * n * n;
    let mut result_phys: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut deriv = vec![Complex64::default(); len];
    let two_pi_over_l = 2.0 * PI / l;
    for c in 0..3 {
        for j in 0..3 {
            // ∂_j of component c of each velocity, to physical space.
            let mut advect = |vel: &SpectralVectorField, carrier: &[Vec<f64>], out: &mut [f64]| {
                deriv.copy_from_slice(&vel.comps[c]);
                for ix in 0..n {
                    let kj_outer = [dmode(ix, n), 0.0, 0.0];
                    for iy in 0..n {
                        let base = (ix * n + iy) * n;
                        let kj_mid = [kj_outer[0], dmode(iy, n), 0.0];
                        for iz in 0..n {
                            let kj = match j {
                                0 => kj_mid[0],
                                1 => kj_mid[1],
                                _ => dmode(iz, n),
                            };
                            deriv[base + iz] *=
                                Complex64::new(0.0, kj * two_pi_over_l);
                        }
                    }
                }
                fft.inverse(&mut deriv);
                for ((o, &w), d) in out.iter_mut().zip(&carrier[j]).zip(&deriv) {
                    *o += w * d.re;
                }
            };
            // (a·∇)u_b and (b·∇)u_a enter with equal weight; for the common
            // B(ω, ω) call both terms coincide and ½(x + x) = x.
            if same {
                advect(ub_ref, &a_phys, &mut result_phys[c]);
            } else {
                let mut term = vec![0.0; len];
                advect(ub_ref, &a_phys, &mut term);
                advect(&ua, b_phys_ref, &mut term);
                for (o, v) in result_phys[c].iter_mut().zip(&term) {
                    *o += 0.5 * v;
                }
            }
        }
    }
    let raw = SpectralVectorField::from_physical(l, n, result_phys)?;
    Ok(raw.dealiased().helmholtz_project())
}

/// Samples of a spectral vector field on the meridian half-plane `{y = L/2,
/// x > L/2}`, in cylindrical coordinates centered at the box center.
///
/// On this plane the cylindrical frame is axis-aligned: `e_r = +x̂`,
/// `e_θ = +ŷ`, so `radial`, `swirl`, and `axial` are just the Cartesian
/// components reindexed by `(r, z)` with `r = x − L/2`, `z = z_box − L/2`.
/// Values are laid out `[ir · n + iz]` with `r = (ir + 1)·h` and
/// `z = (iz − n/2)·h`.
#[derive(Debug, Clone)]
pub struct MeridianSlice {
    pub rs: Vec<f64>,
    pub zs: Vec<f64>,
    pub radial: Vec<f64>,
    pub swirl: Vec<f64>,
    pub axial: Vec<f64>,
}

/// Extract the meridian half-plane samples of `v` (see [`MeridianSlice`]).
pub fn meridian_slice(v: &SpectralVectorField) -> MeridianSlice {
    let n = v.n;
    let h = v.spacing();
    let phys = v.to_physical();
    let half = n / 2;
    let rs: Vec<f64> = (1..half).map(|q| q as f64 * h).collect();
    let zs: Vec<f64> = (0..n).map(|iz| (iz as f64 - half as f64) * h).collect();
    let mut radial = Vec::with_capacity(rs.len() * n);
    let mut swirl = Vec::with_capacity(rs.len() * n);
    let mut axial = Vec::with_capacity(rs.len() * n);
    for q in 1..half {
        let ix = half + q;
        for iz in 0..n {
            let i = (ix * n + half) * n + iz;
            radial.push(phys[0][i]);
            swirl.push(phys[1][i]);
            axial.push(phys[2][i]);
        }
    }
    MeridianSlice {
        rs,
        zs,
        radial,
        swirl,
        axial,
    }
}

fn check_embedding_margin(box_len: f64, r_extent: f64, z_extent: f64) -> Result<()> {
    let quarter = box_len / 4.0;
    if r_extent > quarter || z_extent > quarter {
        return Err(Error::Domain(format!(
            "embedding requires a clearance of at least L/4 = {quarter} between the \
             structure and the box boundary; got radial extent {r_extent}, axial extent \
             {z_extent} from the center"
        )));
    }
    Ok(())
}

/// Embed the analytic ring-pair profile as a 3-D vorticity field
/// `ω(x) = ω_θ(r, z) e_θ` centered in the periodic box.
///
/// The odd-in-`z` extension is built in ([`RingPair::eval`] handles both
/// halves), so the embedded field is the full two-ring configuration. The
/// support must clear the box boundary by at least `L/4` on every side, which
/// keeps periodic-image contamination of derived velocities at the sub-percent
/// level; violations are domain errors.
pub fn embed_ring_pair(ring: &RingPair, box_len: f64, n: usize) -> Result<SpectralVectorField> {
    check_embedding_margin(box_len, ring.r_c + ring.rho_r, ring.z_c + ring.rho_z)?;
    embed_profile(box_len, n, |r, z| ring.eval(r, z))
}

/// Embed a sampled meridian field by bilinear interpolation (odd in `z`).
///
/// The general-path analogue of [`embed_ring_pair`] for fields that exist only
/// as grid samples (mid-run snapshots). Interpolation is C⁰, so the embedded
/// field has weaker spectral decay than the analytic path; preference goes to
/// the analytic embedding whenever a closed-form profile exists.
pub fn embed_sampled(
    field: &AxiScalarField,
    box_len: f64,
    n: usize,
) -> Result<SpectralVectorField> {
    let g = &field.grid;
    let mut r_extent = 0.0f64;
    let mut z_extent = 0.0f64;
    for i in 0..g.n_r {
        for j in 0..g.n_z {
            if field.get(i, j) != 0.0 {
                r_extent = r_extent.max(g.r(i) + 0.5 * g.dr());
                z_extent = z_extent.max(g.z(j).abs() + 0.5 * g.dz());
            }
        }
    }
    check_embedding_margin(box_len, r_extent, z_extent)?;
    let interp = |r: f64, z: f64| -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let (sign, za) = if z > 0.0 { (1.0, z) } else { (-1.0, -z) };
        // Odd reflection below the first cell-center row: interpolate against
        // the mirrored value (−f) at −z(0).
        if za < g.z(0) {
            let f0 = sample_bilinear(field, r, g.z(0));
            return sign * f0 * (za / g.z(0));
        }
        sign * sample_bilinear(field, r, za)
    };
    embed_profile(box_len, n, interp)
}

/// Bilinear interpolation of cell-center values, zero outside the grid.
fn sample_bilinear(field: &AxiScalarField, r: f64, z: f64) -> f64 {
    let g = &field.grid;
    let fr = (r - g.r(0)) / g.dr();
    let fz = (z - g.z(0)) / g.dz();
    if fr < -0.5 || fz < -0.5 || fr > g.n_r as f64 - 0.5 || fz > g.n_z as f64 - 0.5 {
        return 0.0;
    }
    let i0 = fr.floor().clamp(0.0, g.n_r as f64 - 2.0) as usize;
    let j0 = fz.floor().clamp(0.0, g.n_z as f64 - 2.0) as usize;
    let tr = (fr - i0 as f64).clamp(0.0, 1.0);
    let tz = (fz - j0 as f64).clamp(0.0, 1.0);
    let v00 = field.get(i0, j0);
    let v10 = field.get(i0 + 1, j0);
    let v01 = field.get(i0, j0 + 1);
    let v11 = field.get(i0 + 1, j0 + 1);
    (1.0 - tr) * ((1.0 - tz) * v00 + tz * v01) + tr * ((1.0 - tz) * v10 + tz * v11)
}

fn embed_profile(
    box_len: f64,
    n: usize,
    profile: impl Fn(f64, f64) -> f64,
) -> Result<SpectralVectorField> {
    // Validate lattice parameters before doing any work.
    SpectralVectorField::zeros(box_len, n)?;
    let h = box_len / n as f64;
    let c = box_len / 2.0;
    let len = n * n * n;
    let mut phys: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for ix in 0..n {
        let x = ix as f64 * h - c;
        for iy in 0..n {
            let y = iy as f64 * h - c;
            let r = (x * x + y * y).sqrt();
            let base = (ix * n + iy) * n;
            if r == 0.0 {
                continue; // ω_θ vanishes on the axis for admissible profiles
            }
            let (er_x, er_y) = (x / r, y / r);
            for iz in 0..n {
                let z = iz as f64 * h - c;
                let w = profile(r, z);
                if w != 0.0 {
                    // e_θ = (−sin θ, cos θ, 0) = (−y/r, x/r, 0)
                    phys[0][base + iz] = -er_y * w;
                    phys[1][base + iz] = er_x * w;
                }
            }
        }
    }
    SpectralVectorField::from_physical(box_len, n, phys)
}

/// Smooth random field: uniform lattice noise shaped by a Gaussian spectral
/// envelope inside the 2/3 ball, mean removed. Deterministic in `seed`.
pub fn random_field(box_len: f64, n: usize, seed: u64) -> Result<SpectralVectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = n * n * n;
    let mut phys: [Vec<f64>; 3] = Default::default();
    for p in phys.iter_mut() {
        *p = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    }
    let mut out = SpectralVectorField::from_physical(box_len, n, phys)?;
    let keep = (n / 3).max(1) as f64;
    for ix in 0..n {
        let kx = mode(ix, n) as f64;
        for iy in 0..n {
            let ky = mode(iy, n) as f64;
            let base = (ix * n + iy) * n;
            for iz in 0..n {
                let kz = mode(iz, n) as f64;
                let k2 = kx * kx + ky * ky + kz * kz;
                let i = base + iz;
                let el = if mode(ix, n).unsigned_abs() as f64 > keep
                    || mode(iy, n).unsigned_abs() as f64 > keep
                    || mode(iz, n).unsigned_abs() as f64 > keep
                    || k2 == 0.0
                {
                    0.0
                } else {
                    (-3.0 * k2 / (keep * keep)).exp()
                };
                out.comps[0][i] *= el;
                out.comps[1][i] *= el;
                out.comps[2][i] *= el;
            }
        }
    }
    Ok(out)
}

/// Divergence-free smooth random field: [`random_field`] followed by the
/// Helmholtz projection.
pub fn random_divergence_free(box_len: f64, n: usize, seed: u64) -> Result<SpectralVectorField> {
    Ok(random_field(box_len, n, seed)?.helmholtz_project())
}

/// Empirical bound on the bilinear form: `max ‖B(a,b)‖_s / (‖a‖_s ‖b‖_s)` over
/// `pairs` seeded random divergence-free fields. Used to pick horizons that
/// satisfy the smallness condition of the fixed-point argument.
pub fn empirical_bilinear_constant(
    box_len: f64,
    n: usize,
    s: f64,
    seed: u64,
    pairs: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in 0..pairs {
        let a = random_divergence_free(box_len, n, seed.wrapping_add(2 * p as u64))?;
        let b = random_divergence_free(box_len, n, seed.wrapping_add(2 * p as u64 + 1))?;
        let na = a.hs_norm(s);
        let nb = b.hs_norm(s);
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        let bb = bilinear_b(&a, &b)?;
        worst = worst.max(bb.hs_norm(s) / (na * nb));
    }
    Ok(worst)
}

/// Minimal datum with nontrivial self-stretching: two crossed shear modes,
/// `A [cos(2πx/L) ŷ + cos(2πy/L) ẑ]`. Each summand alone is a parallel shear
/// whose self-interaction vanishes identically (an exact fixed point of the
/// integral map), so the pair is the smallest datum that genuinely exercises
/// the bilinear coupling and the Picard loop.
pub fn crossed_shear_datum(
    box_len: f64,
    n: usize,
    amplitude: f64,
) -> Result<SpectralVectorField> {
    let len = n.checked_mul(n).and_then(|m| m.checked_mul(n)).ok_or_else(|| {
        Error::Config(format!("lattice {n}³ overflows the address space"))
    })?;
    let mut phys: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for ix in 0..n {
        let x = ix as f64 / n as f64;
        for iy in 0..n {
            let y = iy as f64 / n as f64;
            let base = (ix * n + iy) * n;
            for iz in 0..n {
                phys[1][base + iz] = amplitude * (2.0 * PI * x).cos();
                phys[2][base + iz] = amplitude * (2.0 * PI * y).cos();
            }
        }
    }
    SpectralVectorField::from_physical(box_len, n, phys)
}

/// Meridian cross-check of the stretching form.
///
/// Embeds `ring` on the periodic lattice, forms `B(ω, ω)`, pulls its swirl
/// component back to the meridian plane, and compares against the kernel-path
/// rate `(u_r/r)·ω_θ` evaluated from `axi_sample` at the same points. Probes
/// are the meridian lattice points where the profile exceeds 2% of its peak,
/// so the comparison is weighted where the vorticity actually lives. Returns
/// the relative L² mismatch over the probe set and the probe count.
pub fn stretching_pullback_residual(
    ring: &RingPair,
    box_len: f64,
    n_box: usize,
    axi_sample: &AxiScalarField,
    rule: &crate::quadrature::PhiQuadRule,
    delta: f64,
) -> Result<(f64, usize)> {
    let w = embed_ring_pair(ring, box_len, n_box)?;
    let b = bilinear_b(&w, &w)?;
    let slice = meridian_slice(&b);
    let peak = ring.amplitude.abs() * (-1.0f64).exp();
    let mut probes = Vec::new();
    let mut weights = Vec::new();
    let mut spectral_vals = Vec::new();
    for (ir, &r) in slice.rs.iter().enumerate() {
        for (iz, &z) in slice.zs.iter().enumerate() {
            let wv = ring.eval(r, z);
            if wv.abs() > 0.02 * peak {
                probes.push((r, z));
                weights.push(wv);
                spectral_vals.push(slice.swirl[ir * slice.zs.len() + iz]);
            }
        }
    }
    if probes.is_empty() {
        return Err(Error::EmptySupport(
            "no meridian lattice point carries the profile; lattice too coarse for the datum"
                .into(),
        ));
    }
    let vel = crate::biot_savart::velocity_at_probes(axi_sample, rule, delta, &probes)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (q, &(r, _)) in probes.iter().enumerate() {
        let reference = vel[q].0 / r * weights[q];
        num += (spectral_vals[q] - reference).powi(2);
        den += reference * reference;
    }
    if den == 0.0 {
        return Err(Error::Domain(
            "kernel-path stretching rate vanished on every probe".into(),
        ));
    }
    Ok(((num / den).sqrt(), probes.len()))
}

/// Options for [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardOptions {
    /// Time substeps for the trapezoid evaluation of the Duhamel integral.
    pub substeps: usize,
    /// Iteration cap.
    pub max_iter: usize,
    /// Convergence when the sup-in-time iterate distance drops below
    /// `rel_tol · ‖ω⁰‖_{H^s}`.
    pub rel_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            substeps: 64,
            max_iter: 32,
            rel_tol: 1e-10,
        }
    }
}

/// Outcome of a Picard fixed-point run (serializable for reports).
#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub s: f64,
    pub horizon: f64,
    pub substeps: usize,
    pub iterations: usize,
    /// Sup-in-time `H^s` distance between consecutive iterates, one per iteration.
    pub distances: Vec<f64>,
    /// Consecutive distance ratios (`distances[i+1]/distances[i]`).
    pub ratios: Vec<f64>,
    pub converged: bool,
    /// Set when three consecutive ratios reach 1 or a distance stops being
    /// finite: the map is observably not contracting at this horizon. Reported,
    /// not fatal — the caller sees exactly how far the iteration got.
    pub non_contraction: bool,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Largest `H^s` norm along the final trajectory.
    pub sup_norm_over_time: f64,
}

/// Picard iteration for the integral form of the dynamics,
/// `w ↦ ω⁰ + ∫₀ᵗ B(w, w) dτ`, on the time grid `τ_m = m·horizon/substeps`
/// with cumulative trapezoid quadrature. Iteration starts from the constant
/// trajectory `w ≡ ω⁰` and stops on convergence, non-contraction, or the cap.
pub fn picard_solve(
    omega0: &SpectralVectorField,
    s: f64,
    horizon: f64,
    opts: &PicardOptions,
) -> Result<PicardReport> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Config(format!(
            "horizon: Picard horizon must be positive and finite, got {horizon}"
        )));
    }
    if opts.substeps == 0 || opts.max_iter == 0 {
        return Err(Error::Config(
            "substeps/max_iter: Picard iteration parameters must be positive".into(),
        ));
    }
    let m = opts.substeps;
    let dt = horizon / m as f64;
    let initial_norm = omega0.hs_norm(s);
    let mut report = PicardReport {
        s,
        horizon,
        substeps: m,
        iterations: 0,
        distances: Vec::new(),
        ratios: Vec::new(),
        converged: false,
        non_contraction: false,
        initial_norm,
        final_norm: initial_norm,
        sup_norm_over_time: initial_norm,
    };
    if initial_norm == 0.0 {
        // The zero datum is already the fixed point; one no-op iteration.
        report.iterations = 1;
        report.distances.push(0.0);
        report.converged = true;
        return Ok(report);
    }

    let mut traj: Vec<SpectralVectorField> = vec![omega0.clone(); m + 1];
    let mut streak = 0usize;
    for it in 1..=opts.max_iter {
        report.iterations = it;
        let rhs: Vec<SpectralVectorField> = traj
            .iter()
            .map(|w| bilinear_b(w, w))
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(m + 1);
        next.push(omega0.clone());
        let mut integral = SpectralVectorField::zeros(omega0.box_len, omega0.n)?;
        for mm in 1..=m {
            integral.add_scaled(0.5 * dt, &rhs[mm - 1])?;
            integral.add_scaled(0.5 * dt, &rhs[mm])?;
            let mut w = omega0.clone();
            w.add_scaled(1.0, &integral)?;
            next.push(w);
        }
        let mut dist = 0.0f64;
        for (new, old) in next.iter().zip(&traj) {
            dist = dist.max(new.sub(old)?.hs_norm(s));
        }
        if let Some(&prev) = report.distances.last() {
            report.ratios.push(dist / prev);
        }
        report.distances.push(dist);
        traj = next;
        if !dist.is_finite() {
            report.non_contraction = true;
            break;
        }
        if dist <= opts.rel_tol * initial_norm {
            report.converged = true;
            break;
        }
        if let Some(&r) = report.ratios.last() {
            if r >= 1.0 {
                streak += 1;
                if streak >= 3 {
                    report.non_contraction = true;
                    break;
                }
            } else {
                streak = 0;
            }
        }
    }
    report.final_norm = traj[m].hs_norm(s);
    report.sup_norm_over_time = traj
        .iter()
        .map(|w| w.hs_norm(s))
        .fold(0.0f64, |a, b| a.max(b));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::PhiQuadRule;
    use approx::assert_relative_eq;

    const L: f64 = 7.3;

    #[test]
    fn parseval_at_s_zero_matches_the_lattice_integral() {
        let v = random_field(L, 20, 41).unwrap();
        let phys = v.to_physical();
        let h3 = v.spacing().powi(3);
        let lattice: f64 = phys
            .iter()
            .map(|c| c.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            * h3;
        assert_relative_eq!(v.hs_norm(0.0).powi(2), lattice, max_relative = 1e-12);
    }

    #[test]
    fn hs_norms_are_monotone_in_s() {
        let v = random_field(L, 16, 7).unwrap();
        let mut prev = v.hs_norm(0.0);
        for s in [0.5, 1.0, 1.7, 2.5] {
            let cur = v.hs_norm(s);
            assert!(cur >= prev, "H^s norm decreased from s - 0.5 to s = {s}");
            prev = cur;
        }
    }

    #[test]
    fn helmholtz_projection_is_idempotent_orthogonal_and_pythagorean() {
        for seed in 0..4u64 {
            let v = random_field(L, 16, 100 + seed).unwrap();
            let p = v.helmholtz_project();
            let q = v.sub(&p).unwrap();
            let pp = p.helmholtz_project();
            let idem = pp.sub(&p).unwrap().hs_norm(0.0) / p.hs_norm(0.0);
            assert!(idem <= 1e-12, "idempotence residual {idem}");
            for s in [0.0, 1.0, 1.7, 2.5] {
                let cross = hs_inner(&p, &q, s).unwrap().abs()
                    / (p.hs_norm(s) * q.hs_norm(s)).max(f64::MIN_POSITIVE);
                assert!(cross <= 1e-12, "s = {s}: orthogonality residual {cross}");
                let pyth = (v.hs_norm(s).powi(2) - p.hs_norm(s).powi(2) - q.hs_norm(s).powi(2))
                    .abs()
                    / v.hs_norm(s).powi(2);
                assert!(pyth <= 1e-12, "s = {s}: Pythagoras residual {pyth}");
            }
            assert!(p.divergence_residual() <= 1e-13);
        }
    }

    #[test]
    fn helmholtz_projection_leaves_the_mean_mode_alone() {
        let mut v = SpectralVectorField::zeros(L, 8).unwrap();
        v.comps[0][0] = Complex64::new(0.7, 0.0);
        v.comps[2][0] = Complex64::new(-0.3, 0.0);
        let p = v.helmholtz_project();
        assert_eq!(p.mean_mode(), v.mean_mode());
        assert_eq!(p.sub(&v).unwrap().hs_norm(0.0), 0.0);
    }

    #[test]
    fn biot_savart_recovers_a_taylor_green_velocity_exactly() {
        // u = (sin kx cos ky, −cos kx sin ky, 0) with k = 2π/L is divergence-free
        // with vorticity ω = (0, 0, 2k sin kx sin ky); the inversion must return
        // it to near machine precision since both are single Fourier modes.
        let n = 16;
        let k = 2.0 * PI / L;
        let h = L / n as f64;
        let len = n * n * n;
        let mut u_exact: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut w_phys: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for ix in 0..n {
            let x = ix as f64 * h;
            for iy in 0..n {
                let y = iy as f64 * h;
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    u_exact[0][base + iz] = (k * x).sin() * (k * y).cos();
                    u_exact[1][base + iz] = -(k * x).cos() * (k * y).sin();
                    w_phys[2][base + iz] = 2.0 * k * (k * x).sin() * (k * y).sin();
                }
            }
        }
        let omega = SpectralVectorField::from_physical(L, n, w_phys).unwrap();
        let u = biot_savart_3d(&omega).unwrap();
        let u_ref = SpectralVectorField::from_physical(L, n, u_exact).unwrap();
        let rel = u.sub(&u_ref).unwrap().hs_norm(0.0) / u_ref.hs_norm(0.0);
        assert!(rel <= 1e-13, "Taylor-Green inversion residual {rel}");
    }

    #[test]
    fn biot_savart_rejects_mean_vorticity() {
        let mut v = SpectralVectorField::zeros(L, 8).unwrap();
        v.comps[1][0] = Complex64::new(1.0, 0.0);
        assert!(matches!(biot_savart_3d(&v), Err(Error::Domain(_))));
    }

    #[test]
    fn curl_of_biot_savart_returns_divergence_free_vorticity() {
        let w = random_divergence_free(L, 20, 9).unwrap();
        let u = biot_savart_3d(&w).unwrap();
        let back = u.curl();
        let rel = back.sub(&w).unwrap().hs_norm(0.0) / w.hs_norm(0.0);
        assert!(rel <= 1e-13, "curl∘biot_savart residual {rel}");
    }

    #[test]
    fn vorticity_and_velocity_gradient_norms_are_isometric() {
        for seed in 0..3u64 {
            let w = random_divergence_free(L, 20, 300 + seed).unwrap();
            let u = biot_savart_3d(&w).unwrap();
            for s in [0.0, 1.0, 1.7, 2.5] {
                let lhs = w.hs_norm(s);
                let rhs = u.gradient_hs_norm(s);
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * lhs,
                    "s = {s}: ‖ω‖ = {lhs} vs ‖∇u‖ = {rhs}"
                );
            }
        }
    }

    #[test]
    fn bilinear_form_is_symmetric_and_divergence_free() {
        let a = random_divergence_free(L, 16, 21).unwrap();
        let b = random_divergence_free(L, 16, 22).unwrap();
        let ab = bilinear_b(&a, &b).unwrap();
        let ba = bilinear_b(&b, &a).unwrap();
        let denom = ab.hs_norm(0.0);
        assert!(denom > 0.0);
        let asym = ab.sub(&ba).unwrap().hs_norm(0.0) / denom;
        assert!(asym <= 1e-13, "symmetry residual {asym}");
        assert!(ab.divergence_residual() <= 1e-12);
        // Same-argument fast path agrees with the two-argument evaluation.
        let aa = bilinear_b(&a, &a).unwrap();
        let a2 = a.clone();
        let aa2 = bilinear_b(&a, &a2).unwrap();
        let rel = aa.sub(&aa2).unwrap().hs_norm(0.0) / aa.hs_norm(0.0);
        assert!(rel <= 1e-13);
    }

    #[test]
    fn bilinear_form_needs_enough_modes_after_dealiasing() {
        let a = SpectralVectorField::zeros(L, 4).unwrap();
        assert!(matches!(bilinear_b(&a, &a), Err(Error::Domain(_))));
    }

    #[test]
    fn product_norm_ratios_stay_bounded_above_s_three_halves() {
        // Hilbert-algebra behavior at s = 1.7: ‖fg‖ ≤ C ‖f‖‖g‖ with a modest C.
        // No sharp constant is asserted, only uniform boundedness across seeds.
        let s = 1.7;
        let n = 16;
        let fft = Fft3::new(n);
        let mut worst = 0.0f64;
        for seed in 0..5u64 {
            let f = random_field(L, n, 500 + 2 * seed).unwrap();
            let g = random_field(L, n, 501 + 2 * seed).unwrap();
            // Pointwise product of the first components, dealiased like the
            // bilinear form's quadratic terms.
            let fp = f.to_physical();
            let gp = g.to_physical();
            let mut prod = vec![Complex64::default(); fp[0].len()];
            for ((p, &x), &y) in prod.iter_mut().zip(&fp[0]).zip(&gp[0]) {
                *p = Complex64::new(x * y, 0.0);
            }
            fft.forward(&mut prod);
            let mut pf = SpectralVectorField::zeros(L, n).unwrap();
            pf.comps[0] = prod;
            let pf = pf.dealiased();
            let mut sf = SpectralVectorField::zeros(L, n).unwrap();
            sf.comps[0] = f.comps[0].clone();
            let mut sg = SpectralVectorField::zeros(L, n).unwrap();
            sg.comps[0] = g.comps[0].clone();
            let ratio = pf.hs_norm(s) / (sf.hs_norm(s) * sg.hs_norm(s));
            assert!(ratio.is_finite());
            worst = worst.max(ratio);
        }
        assert!(worst < 10.0, "algebra ratio grew to {worst}");
    }

    /// The instance used for cross-oracle checks: fat enough to be resolved on
    /// a periodic lattice at desk scale (≥ 10 cells per bump semi-axis at
    /// 128³), with the embedding margin exactly `L/4` at `L = 7`.
    fn cross_check_ring() -> RingPair {
        RingPair::new(1.2, 0.85, 0.55, 0.55, -1.0).unwrap()
    }

    fn cross_check_grid(n: usize) -> crate::field::AxiGrid {
        crate::field::AxiGrid::new(0.25, 2.25, 0.0, 1.75, n, n).unwrap()
    }

    #[test]
    fn embedded_ring_pair_is_solenoidal_and_matches_the_meridian_norm() {
        // The bump family is Gevrey-2, so the divergence residual is set by
        // lattice sampling alias, not by the box: measured 3.2e-2 at 64³ and
        // 7.8e-3 at 128³ for this instance (the value saturates when the box
        // grows at fixed spacing). The frozen bound reflects 64³.
        let ring = cross_check_ring();
        let w = embed_ring_pair(&ring, 7.0, 64).unwrap();
        assert!(
            w.divergence_residual() <= 0.05,
            "divergence residual {}",
            w.divergence_residual()
        );
        // ∫|ω|² over the box = 4π Σ_upper ω² r ΔrΔz for the odd pair.
        let grid = cross_check_grid(128);
        let sample = ring.sample(grid).unwrap();
        let mut meridian = 0.0;
        for i in 0..grid.n_r {
            for j in 0..grid.n_z {
                let v = sample.get(i, j);
                meridian += v * v * grid.r(i);
            }
        }
        meridian *= 4.0 * PI * grid.cell_area();
        assert_relative_eq!(w.hs_norm(0.0).powi(2), meridian, max_relative = 0.01);
    }

    #[test]
    fn embedding_rejects_structures_too_close_to_the_box_boundary() {
        // radial extent 1.75 > L/4 = 1.5: too tight.
        let ring = cross_check_ring();
        assert!(matches!(
            embed_ring_pair(&ring, 6.0, 16),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sampled_embedding_agrees_with_the_analytic_one() {
        let ring = cross_check_ring();
        let sample = ring.sample(cross_check_grid(128)).unwrap();
        let analytic = embed_ring_pair(&ring, 7.0, 48).unwrap();
        let interpolated = embed_sampled(&sample, 7.0, 48).unwrap();
        let rel =
            interpolated.sub(&analytic).unwrap().hs_norm(0.0) / analytic.hs_norm(0.0);
        assert!(rel <= 0.05, "sampled vs analytic embedding differ by {rel}");
    }

    #[test]
    fn stretching_form_reduces_to_the_meridian_rate_on_ring_data() {
        // On the embedded ring pair, B(ω, ω) must equal (u_r/r) ω_θ e_θ; check
        // the swirl component on the meridian against the kernel path at the
        // lattice points carrying most of the profile. Coarse lattice (64³,
        // measured mismatch 4.7%), so this is a consistency smoke test; the
        // tight 2% version runs at full scale in the acceptance suite.
        let ring = cross_check_ring();
        let sample = ring.sample(cross_check_grid(96)).unwrap();
        let rule = PhiQuadRule::new(24).unwrap();
        let (rel, probes) =
            stretching_pullback_residual(&ring, 7.0, 64, &sample, &rule, 0.0).unwrap();
        assert!(probes > 100, "probe set too small: {probes}");
        assert!(rel <= 0.10, "meridian stretching mismatch {rel}");
    }

    #[test]
    fn picard_on_zero_data_converges_in_one_iteration() {
        let zero = SpectralVectorField::zeros(L, 16).unwrap();
        let report = picard_solve(&zero, 1.7, 1.0, &PicardOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_norm, 0.0);
    }

    fn single_mode_datum(amplitude: f64) -> SpectralVectorField {
        // ω = A cos(2πx/L) ŷ: real, mean-free, divergence-free, one mode pair.
        let n = 16;
        let h = L / n as f64;
        let len = n * n * n;
        let mut phys: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for ix in 0..n {
            let x = ix as f64 * h;
            for iy in 0..n {
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    phys[1][base + iz] = amplitude * (2.0 * PI * x / L).cos();
                }
            }
        }
        SpectralVectorField::from_physical(L, n, phys).unwrap()
    }

    /// Minimal datum with nontrivial self-stretching (see [`crossed_shear_datum`]).
    fn two_mode_datum(amplitude: f64) -> SpectralVectorField {
        crossed_shear_datum(L, 16, amplitude).unwrap()
    }

    #[test]
    fn a_parallel_shear_is_an_exact_fixed_point() {
        // A single Fourier mode is a shear flow: its induced velocity varies
        // only along the wavevector while the vorticity points across it, so
        // B(ω, ω) vanishes identically and the first Picard iterate already
        // reproduces the datum, bit for bit. Amplitude is irrelevant.
        let w0 = single_mode_datum(40.0);
        let b = bilinear_b(&w0, &w0).unwrap();
        assert_eq!(b.hs_norm(0.0), 0.0);
        let report = picard_solve(&w0, 1.7, 3.0, &PicardOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.distances, vec![0.0]);
        assert_eq!(report.final_norm, report.initial_norm);
    }

    #[test]
    fn picard_contracts_for_small_data_and_short_horizons() {
        let w0 = two_mode_datum(0.05);
        let report = picard_solve(&w0, 1.7, 0.5, &PicardOptions::default()).unwrap();
        assert!(report.converged, "distances: {:?}", report.distances);
        assert!(!report.non_contraction);
        for &r in &report.ratios {
            assert!(r < 1.0, "ratios not contracting: {:?}", report.ratios);
        }
        assert!(report.final_norm < 2.0 * report.initial_norm);
        assert!(report.sup_norm_over_time < 2.0 * report.initial_norm);
    }

    #[test]
    fn picard_flags_non_contraction_without_erroring() {
        let w0 = two_mode_datum(80.0);
        let opts = PicardOptions {
            substeps: 16,
            max_iter: 10,
            ..PicardOptions::default()
        };
        let report = picard_solve(&w0, 1.7, 2.0, &opts).unwrap();
        assert!(report.non_contraction, "ratios: {:?}", report.ratios);
        assert!(!report.converged);
    }

    #[test]
    fn meridian_slice_reads_off_cartesian_components() {
        // A field constant in space shows up unchanged on the meridian.
        let mut v = SpectralVectorField::zeros(8.0, 8).unwrap();
        v.comps[0][0] = Complex64::new(0.25, 0.0);
        v.comps[1][0] = Complex64::new(-1.5, 0.0);
        v.comps[2][0] = Complex64::new(3.0, 0.0);
        let slice = meridian_slice(&v);
        assert_eq!(slice.rs.len(), 3);
        assert_eq!(slice.zs.len(), 8);
        for q in 0..slice.radial.len() {
            assert_relative_eq!(slice.radial[q], 0.25, epsilon = 1e-13);
            assert_relative_eq!(slice.swirl[q], -1.5, epsilon = 1e-13);
            assert_relative_eq!(slice.axial[q], 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn incompatible_boxes_are_rejected() {
        let a = SpectralVectorField::zeros(L, 8).unwrap();
        let b = SpectralVectorField::zeros(L, 16).unwrap();
        assert!(matches!(bilinear_b(&a, &b), Err(Error::Config(_))));
        assert!(matches!(hs_inner(&a, &b, 0.0), Err(Error::Config(_))));
        assert!(matches!(
            SpectralVectorField::zeros(-1.0, 8),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            SpectralVectorField::zeros(L, 7),
            Err(Error::Config(_))
        ));
    }
}
