//! Angular quadrature and the reduced Biot–Savart kernels.
//!
//! Folding the azimuthal integral of the 3D Biot–Savart law onto the meridian
//! half-plane leaves one-dimensional integrals over the azimuth angle
//! `φ ∈ (0, π/2)` after exploiting the symmetry `cos(π − φ) = −cos φ`. With the
//! substitution `s = cos φ` the radial kernel carries the weight
//! `s (1 − s²)^{−1/2} ds`, while the axial kernel carries the plain arc measure
//! `(1 − s²)^{−1/2} ds`. Both are evaluated here with a Gauss–Legendre rule mapped
//! to `(0, π/2)`, where the integrands are smooth and the rule converges
//! spectrally fast.
//!
//! The kernels below act on vorticity stored on the *upper* half-plane only: the
//! mirror contribution of the odd extension in `z` is folded in analytically, which
//! is why every kernel is a difference of a "direct" part in `(z − z̄)` and an
//! "image" part in `(z + z̄)`.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_4, PI};

/// Gauss–Legendre quadrature rule on the azimuth interval `(0, π/2)`.
///
/// Nodes are strictly interior and ascending; all weights are positive and sum to
/// `π/2` (the interval length) to close to machine precision. The cosine of each
/// node — the variable `s` in the kernel integrals — is precomputed.
///
/// ```
/// use ivse::quadrature::PhiQuadRule;
/// let rule = PhiQuadRule::new(32).unwrap();
/// let total: f64 = rule.weights().iter().sum();
/// assert!((total - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
/// ```
#[derive(Debug, Clone)]
pub struct PhiQuadRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cos_nodes: Vec<f64>,
}

impl PhiQuadRule {
    /// Build the rule with `order` nodes. `order` must be at least 1; the kernel
    /// evaluations in this crate default to 32, which leaves the quadrature error
    /// far below every tolerance used elsewhere.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config(
                "rule_order: quadrature order must be at least 1".into(),
            ));
        }
        let n = order;
        let mut x = vec![0.0_f64; n];
        let mut w = vec![0.0_f64; n];
        // Newton iteration on the Legendre polynomial P_n for each root, seeded with
        // the Chebyshev-like estimate; converges in a handful of steps.
        for k in 0..n {
            let mut xi = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dpn = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (pn, pn_prev) = legendre_pair(n, xi);
                dpn = n as f64 * (xi * pn - pn_prev) / (xi * xi - 1.0);
                let dx = -pn / dpn;
                xi += dx;
                if dx.abs() < 1e-15 {
                    // One polishing step after reaching the tolerance.
                    let (pn, pn_prev) = legendre_pair(n, xi);
                    dpn = n as f64 * (xi * pn - pn_prev) / (xi * xi - 1.0);
                    xi -= pn / dpn;
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss-Legendre Newton iteration failed to converge for order {n}"
                )));
            }
            x[k] = xi;
            w[k] = 2.0 / ((1.0 - xi * xi) * dpn * dpn);
        }
        // The seeds above produce roots in descending order on (-1, 1); map to
        // (0, π/2) and store ascending in φ.
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in (0..n).rev() {
            nodes.push(FRAC_PI_4 * (x[k] + 1.0));
            weights.push(FRAC_PI_4 * w[k]);
        }
        let cos_nodes = nodes.iter().map(|phi| phi.cos()).collect();
        Ok(Self {
            order,
            nodes,
            weights,
            cos_nodes,
        })
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes `φ_i`, ascending in `(0, π/2)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights `w_i > 0` with `Σ w_i = π/2`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Precomputed `s_i = cos φ_i ∈ (0, 1)`, descending.
    pub fn cos_nodes(&self) -> &[f64] {
        &self.cos_nodes
    }

    /// Approximate `∫₀¹ s (1 − s²)^{−1/2} f(s) ds = ∫₀^{π/2} cos φ · f(cos φ) dφ`.
    ///
    /// This is the weight carried by the radial kernel and the interaction kernel.
    /// Returns a numerical-consistency error naming the node index if `f` produces
    /// a non-finite value at any node.
    pub fn s_integral(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, (&w, &s)) in self.weights.iter().zip(&self.cos_nodes).enumerate() {
            let v = f(s);
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "s_integral: integrand is not finite at node {i} (s = {s:.17e})"
                )));
            }
            acc += w * s * v;
        }
        Ok(acc)
    }

    /// Approximate `∫₀¹ (1 − s²)^{−1/2} g(s) ds = ∫₀^{π/2} g(cos φ) dφ`.
    ///
    /// The axial kernel carries the plain arc measure — its numerator has no
    /// overall `cos φ` factor — so it integrates with this variant instead of
    /// [`s_integral`](Self::s_integral).
    pub fn phi_integral(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, (&w, &s)) in self.weights.iter().zip(&self.cos_nodes).enumerate() {
            let v = g(s);
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "phi_integral: integrand is not finite at node {i} (s = {s:.17e})"
                )));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Evaluate `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Argument bundle for a meridian kernel evaluation: target point `(r, z)` and
/// source point `(r̄, z̄)`, both in cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    /// Target radius; must be positive.
    pub r: f64,
    /// Target height; any sign (probe points below the symmetry plane are legal).
    pub z: f64,
    /// Source radius; must be positive.
    pub r_bar: f64,
    /// Source height; must be positive — sources live on the open upper half-plane,
    /// their mirror images are folded into the kernels analytically.
    pub z_bar: f64,
}

impl KernelArgs {
    /// Convenience constructor.
    pub fn new(r: f64, z: f64, r_bar: f64, z_bar: f64) -> Self {
        Self { r, z, r_bar, z_bar }
    }

    fn validate(&self, delta: f64, allow_coincident: bool) -> Result<()> {
        if !(self.r > 0.0) || !(self.r_bar > 0.0) {
            return Err(Error::Domain(format!(
                "kernel arguments require positive radii, got r = {}, r_bar = {}",
                self.r, self.r_bar
            )));
        }
        if !(self.z_bar > 0.0) {
            return Err(Error::Domain(format!(
                "kernel source height must be positive (upper half-plane), got z_bar = {}",
                self.z_bar
            )));
        }
        if delta < 0.0 || !delta.is_finite() {
            return Err(Error::Config(format!(
                "delta: regularization length must be finite and >= 0, got {delta}"
            )));
        }
        if !allow_coincident && delta == 0.0 && self.r == self.r_bar && self.z == self.z_bar {
            return Err(Error::SingularEvaluation(format!(
                "coincident target and source ({}, {}) with delta = 0",
                self.r, self.z
            )));
        }
        Ok(())
    }
}

#[inline]
fn pow_m32(x: f64) -> f64 {
    1.0 / (x * x.sqrt())
}

/// Radial velocity kernel for odd-in-`z` vorticity, azimuthal integral included.
///
/// For a target `(r, z)` and source ring `(r̄, z̄)`,
///
/// ```text
/// K_r(r, z; r̄, z̄) = r̄ ∫₀¹ s (1−s²)^{−1/2} [ (z−z̄)(A₁^{−3/2} − A₂^{−3/2})
///                                           − (z+z̄)(A₃^{−3/2} − A₄^{−3/2}) ] ds
/// ```
///
/// with `A₁ = (z−z̄)² + c − 2bs`, `A₂ = (z−z̄)² + c + 2bs`, `A₃, A₄` the same with
/// `z + z̄`, `c = r² + r̄² + δ²` and `b = r r̄`. The radial velocity is then
/// `u_r = (1/2π) Σ K_r ω ΔrΔz` over the stored half-plane. The kernel is exactly
/// even in `z`, and the `δ² ≥ 0` regularization keeps the self-interaction finite
/// on a grid.
pub fn kernel_kr_odd(args: KernelArgs, rule: &PhiQuadRule, delta: f64) -> Result<f64> {
    args.validate(delta, false)?;
    let KernelArgs { r, z, r_bar, z_bar } = args;
    let c = r * r + r_bar * r_bar + delta * delta;
    let b = r * r_bar;
    let zm = z - z_bar;
    let zp = z + z_bar;
    let dm = zm * zm;
    let dp = zp * zp;
    let acc = rule.s_integral(|s| {
        let bs = 2.0 * b * s;
        zm * (pow_m32(dm + c - bs) - pow_m32(dm + c + bs))
            - zp * (pow_m32(dp + c - bs) - pow_m32(dp + c + bs))
    })?;
    finite_kernel(r_bar * acc, "kernel_kr_odd")
}

/// Axial velocity kernel for odd-in-`z` vorticity, azimuthal integral included.
///
/// ```text
/// K_z(r, z; r̄, z̄) = r̄ ∫₀¹ (1−s²)^{−1/2} [ (r̄ − rs) A₁^{−3/2} + (r̄ + rs) A₂^{−3/2}
///                                         − (r̄ − rs) A₃^{−3/2} − (r̄ + rs) A₄^{−3/2} ] ds
/// ```
///
/// using the same `A_i` as [`kernel_kr_odd`]. Note the measure: the axial numerator
/// `r̄ − r cos φ` has no overall `cos φ` factor, so the two `±s` branches of the
/// azimuth fold both survive and the weight is the plain `(1−s²)^{−1/2}`. On the
/// axis limit `r → 0` the bracket collapses to the closed form
/// `π r̄² ([(z−z̄)² + r̄² + δ²]^{−3/2} − [(z+z̄)² + r̄² + δ²]^{−3/2})`, which the tests
/// pin down. The kernel is exactly odd in `z`; in particular the sum `u_z` vanishes
/// on the symmetry plane.
pub fn kernel_kz_full(args: KernelArgs, rule: &PhiQuadRule, delta: f64) -> Result<f64> {
    args.validate(delta, false)?;
    let KernelArgs { r, z, r_bar, z_bar } = args;
    let c = r * r + r_bar * r_bar + delta * delta;
    let b = r * r_bar;
    let zm = z - z_bar;
    let zp = z + z_bar;
    let dm = zm * zm;
    let dp = zp * zp;
    let acc = rule.phi_integral(|s| {
        let bs = 2.0 * b * s;
        let num_m = r_bar - r * s;
        let num_p = r_bar + r * s;
        (num_m * pow_m32(dm + c - bs) + num_p * pow_m32(dm + c + bs))
            - (num_m * pow_m32(dp + c - bs) + num_p * pow_m32(dp + c + bs))
    })?;
    finite_kernel(r_bar * acc, "kernel_kz_full")
}

/// Variant of [`kernel_kz_full`] with the axial displacement multiplied into each
/// part — direct terms carry `(z − z̄)`, image terms `(z + z̄)` — and the radial
/// weight `s (1−s²)^{−1/2}` of the radial kernel.
///
/// This is *not* the axial Biot–Savart kernel; it is retained because it is a
/// natural mis-reading of the kernel family (displacement factors as in the radial
/// kernel) and the validation suite demonstrates that it disagrees with reference
/// axial velocities by a wide margin, which guards the sign and measure conventions
/// of the real kernel.
pub fn kernel_kz_axial_factor(args: KernelArgs, rule: &PhiQuadRule, delta: f64) -> Result<f64> {
    args.validate(delta, false)?;
    let KernelArgs { r, z, r_bar, z_bar } = args;
    let c = r * r + r_bar * r_bar + delta * delta;
    let b = r * r_bar;
    let zm = z - z_bar;
    let zp = z + z_bar;
    let dm = zm * zm;
    let dp = zp * zp;
    let acc = rule.s_integral(|s| {
        let bs = 2.0 * b * s;
        let num_m = r_bar - r * s;
        let num_p = r_bar + r * s;
        zm * (num_m * pow_m32(dm + c - bs) + num_p * pow_m32(dm + c + bs))
            - zp * (num_m * pow_m32(dp + c - bs) + num_p * pow_m32(dp + c + bs))
    })?;
    finite_kernel(r_bar * acc, "kernel_kz_axial_factor")
}

/// Interaction kernel `G` driving the growth of the weighted enstrophy functional.
///
/// ```text
/// G(r, z; r̄, z̄) = (z + z̄)/(r r̄) ∫₀¹ s (1−s²)^{−1/2} (A₃^{−3/2} − A₄^{−3/2}) ds
/// ```
///
/// Only the image combination `z + z̄` enters, so `G` is strictly positive on the
/// open quadrant, symmetric under swapping target and source, and decays
/// monotonically as the pair moves away from the symmetry plane. A non-positive
/// value is reported as a numerical-consistency failure. Pass the same `delta` used
/// for velocity evaluation when checking energy-rate identities; `delta = 0` is the
/// exact kernel and is safe here because `A₃, A₄ ≥ (z + z̄)² > 0`.
pub fn kernel_g(args: KernelArgs, rule: &PhiQuadRule, delta: f64) -> Result<f64> {
    args.validate(delta, true)?;
    if !(args.z > 0.0) {
        return Err(Error::Domain(format!(
            "kernel_g requires a target in the open upper half-plane, got z = {}",
            args.z
        )));
    }
    let KernelArgs { r, z, r_bar, z_bar } = args;
    let c = r * r + r_bar * r_bar + delta * delta;
    let b = r * r_bar;
    let zp = z + z_bar;
    let dp = zp * zp;
    let acc = rule.s_integral(|s| {
        let bs = 2.0 * b * s;
        pow_m32(dp + c - bs) - pow_m32(dp + c + bs)
    })?;
    let value = zp / (r * r_bar) * acc;
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Numerical(format!(
            "kernel_g must be strictly positive, got {value} at r = {r}, z = {z}, \
             r_bar = {r_bar}, z_bar = {z_bar}"
        )));
    }
    Ok(value)
}

fn finite_kernel(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical(format!("{what}: evaluation produced {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Composite midpoint rule on `∫₀^{π/2} g(cos φ) dφ` — a deliberately different
    /// quadrature family, used as the refinement oracle for the Gauss–Legendre rule.
    fn composite_phi(g: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = FRAC_PI_2 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += g(((i as f64 + 0.5) * h).cos());
        }
        acc * h
    }

    fn oracle_s_integral(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        composite_phi(|s| s * f(s), n)
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [1usize, 2, 3, 4, 5, 8, 16, 32, 64, 128, 256] {
            let rule = PhiQuadRule::new(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!(
                (total - FRAC_PI_2).abs() < 1e-13,
                "order {order}: weight sum {total} deviates from pi/2"
            );
        }
    }

    #[test]
    fn nodes_interior_ascending_weights_positive() {
        let rule = PhiQuadRule::new(32).unwrap();
        assert_eq!(rule.order(), 32);
        for pair in rule.nodes().windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(rule.nodes()[0] > 0.0);
        assert!(*rule.nodes().last().unwrap() < FRAC_PI_2);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
        for (phi, s) in rule.nodes().iter().zip(rule.cos_nodes()) {
            assert_abs_diff_eq!(phi.cos(), *s, epsilon = 0.0);
        }
    }

    #[test]
    fn order_five_matches_reference_nodes() {
        // Classical 5-point Gauss-Legendre data on (-1, 1), mapped to (0, pi/2).
        let ref_x = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let ref_w = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        let rule = PhiQuadRule::new(5).unwrap();
        for k in 0..5 {
            assert_abs_diff_eq!(rule.nodes()[k], FRAC_PI_4 * (ref_x[k] + 1.0), epsilon = 1e-14);
            assert_abs_diff_eq!(rule.weights()[k], FRAC_PI_4 * ref_w[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(matches!(PhiQuadRule::new(0), Err(Error::Config(_))));
    }

    #[test]
    fn s_integral_exact_on_low_moments() {
        // ∫₀^{π/2} cos φ dφ = 1, ∫ cos² = π/4, ∫ cos³ = 2/3 — closed forms.
        for order in [16usize, 32] {
            let rule = PhiQuadRule::new(order).unwrap();
            assert_abs_diff_eq!(rule.s_integral(|_| 1.0).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rule.s_integral(|s| s).unwrap(), PI / 4.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rule.s_integral(|s| s * s).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn s_integral_matches_composite_oracle_on_kernel_like_integrand() {
        // f has the shape of a kernel denominator slice; smooth on [0, 1].
        let f = |s: f64| (5.0 - 2.0 * s).powf(-1.5);
        let oracle = oracle_s_integral(f, 1_000_000);
        // Frozen value from an independent adaptive-quadrature implementation.
        assert_relative_eq!(oracle, 0.161_900_311_326_898, max_relative = 1e-11);
        let rule = PhiQuadRule::new(32).unwrap();
        assert_relative_eq!(rule.s_integral(f).unwrap(), oracle, max_relative = 1e-10);
    }

    #[test]
    fn s_integral_reports_bad_node() {
        let rule = PhiQuadRule::new(8).unwrap();
        let err = rule.s_integral(|_| f64::NAN).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("node 0"), "unexpected message: {msg}");
        // A non-finite value at an interior node reports that node's index.
        let bad_s = rule.cos_nodes()[3];
        let err = rule
            .s_integral(|s| if s == bad_s { f64::INFINITY } else { 1.0 })
            .unwrap_err();
        assert!(err.to_string().contains("node 3"));
    }

    fn probe_args() -> KernelArgs {
        KernelArgs::new(2.0, 1.0, 2.2, 1.3)
    }

    #[test]
    fn kr_odd_matches_composite_oracle_and_frozen_value() {
        let args = probe_args();
        let KernelArgs { r, z, r_bar, z_bar } = args;
        let c = r * r + r_bar * r_bar;
        let b = r * r_bar;
        let (dm, dp) = ((z - z_bar) * (z - z_bar), (z + z_bar) * (z + z_bar));
        let oracle = r_bar
            * composite_phi(
                |s| {
                    let bs = 2.0 * b * s;
                    s * ((z - z_bar) * (pow_m32(dm + c - bs) - pow_m32(dm + c + bs))
                        - (z + z_bar) * (pow_m32(dp + c - bs) - pow_m32(dp + c + bs)))
                },
                1_000_000,
            );
        // Frozen value from an independent adaptive-quadrature implementation.
        assert_relative_eq!(oracle, -2.578_166_533_317_296, max_relative = 1e-9);
        let rule = PhiQuadRule::new(32).unwrap();
        let k = kernel_kr_odd(args, &rule, 0.0).unwrap();
        assert_relative_eq!(k, oracle, max_relative = 1e-9);
        // Order 64 agrees with order 32 to quadrature convergence.
        let rule64 = PhiQuadRule::new(64).unwrap();
        let k64 = kernel_kr_odd(args, &rule64, 0.0).unwrap();
        assert_relative_eq!(k, k64, max_relative = 1e-12);
    }

    #[test]
    fn kr_odd_is_exactly_even_in_z() {
        let rule = PhiQuadRule::new(24).unwrap();
        for (r, z, rb, zb) in [
            (2.0, 1.0, 2.2, 1.3),
            (0.7, 0.01, 1.9, 2.4),
            (3.0, 2.5, 0.4, 0.2),
        ] {
            let up = kernel_kr_odd(KernelArgs::new(r, z, rb, zb), &rule, 0.0).unwrap();
            let down = kernel_kr_odd(KernelArgs::new(r, -z, rb, zb), &rule, 0.0).unwrap();
            assert_eq!(up, down, "evenness must be exact in floating point");
        }
    }

    #[test]
    fn kr_odd_direct_part_vanishes_on_equal_heights() {
        // At z = z̄ only the image part survives, which ties K_r to the interaction
        // kernel: K_r = -r r̄² G evaluated with the same regularization.
        let rule = PhiQuadRule::new(32).unwrap();
        for (r, rb, z, delta) in [(2.0, 2.2, 1.0, 0.0), (1.1, 0.6, 0.4, 0.05)] {
            let kr = kernel_kr_odd(KernelArgs::new(r, z, rb, z), &rule, delta).unwrap();
            let g = kernel_g(KernelArgs::new(r, z, rb, z), &rule, delta).unwrap();
            assert_relative_eq!(kr, -r * rb * rb * g, max_relative = 1e-13);
        }
    }

    #[test]
    fn coincident_points_without_regularization_are_singular() {
        let rule = PhiQuadRule::new(16).unwrap();
        let args = KernelArgs::new(2.0, 1.0, 2.0, 1.0);
        assert!(matches!(
            kernel_kr_odd(args, &rule, 0.0),
            Err(Error::SingularEvaluation(_))
        ));
        assert!(matches!(
            kernel_kz_full(args, &rule, 0.0),
            Err(Error::SingularEvaluation(_))
        ));
        // With a regularization length the same evaluation is finite.
        assert!(kernel_kr_odd(args, &rule, 0.1).unwrap().is_finite());
        // The interaction kernel has no singularity at coincident interior points.
        assert!(kernel_g(args, &rule, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn kernel_arguments_are_validated() {
        let rule = PhiQuadRule::new(8).unwrap();
        assert!(matches!(
            kernel_kr_odd(KernelArgs::new(-1.0, 1.0, 2.0, 1.0), &rule, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            kernel_kz_full(KernelArgs::new(1.0, 1.0, 2.0, -0.5), &rule, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            kernel_kr_odd(probe_args(), &rule, -0.1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            kernel_g(KernelArgs::new(1.0, -1.0, 2.0, 0.5), &rule, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn kz_full_reaches_axis_closed_form() {
        // As r → 0 the azimuthal average collapses: the limit kernel is
        // π r̄² ([(z−z̄)² + r̄²]^{−3/2} − [(z+z̄)² + r̄²]^{−3/2}).
        let rule = PhiQuadRule::new(32).unwrap();
        let (r, z, rb, zb) = (1e-8, 0.3, 0.7, 0.9);
        let k = kernel_kz_full(KernelArgs::new(r, z, rb, zb), &rule, 0.0).unwrap();
        let closed = PI
            * rb
            * rb
            * (pow_m32((z - zb) * (z - zb) + rb * rb) - pow_m32((z + zb) * (z + zb) + rb * rb));
        assert_relative_eq!(k, closed, max_relative = 1e-10);
    }

    #[test]
    fn kz_full_is_exactly_odd_in_z() {
        let rule = PhiQuadRule::new(24).unwrap();
        for (r, z, rb, zb) in [
            (2.0, 1.0, 2.2, 1.3),
            (0.7, 0.01, 1.9, 2.4),
            (3.0, 2.5, 0.4, 0.2),
        ] {
            let up = kernel_kz_full(KernelArgs::new(r, z, rb, zb), &rule, 0.0).unwrap();
            let down = kernel_kz_full(KernelArgs::new(r, -z, rb, zb), &rule, 0.0).unwrap();
            assert_eq!(up, -down, "oddness must be exact in floating point");
        }
        // In particular u_z vanishes identically on the symmetry plane.
        let on_plane = kernel_kz_full(KernelArgs::new(2.0, 0.0, 2.2, 1.3), &rule, 0.0).unwrap();
        assert_eq!(on_plane, 0.0);
    }

    #[test]
    fn kz_axial_factor_variant_differs_from_true_kernel() {
        // The mis-weighted variant exists to be wrong; make sure it stays wrong.
        let rule = PhiQuadRule::new(32).unwrap();
        let k_true = kernel_kz_full(probe_args(), &rule, 0.0).unwrap();
        let k_var = kernel_kz_axial_factor(probe_args(), &rule, 0.0).unwrap();
        assert!(
            (k_true - k_var).abs() > 0.1 * k_true.abs().max(k_var.abs()),
            "variant unexpectedly close to the true kernel: {k_true} vs {k_var}"
        );
    }

    #[test]
    fn kernel_g_matches_composite_oracle_and_frozen_value() {
        let (r, z, rb, zb) = (2.0, 1.0, 2.0, 1.0);
        let c = r * r + rb * rb;
        let b = r * rb;
        let dp = (z + zb) * (z + zb);
        let oracle = (z + zb) / (r * rb)
            * composite_phi(
                |s| {
                    let bs = 2.0 * b * s;
                    s * (pow_m32(dp + c - bs) - pow_m32(dp + c + bs))
                },
                1_000_000,
            );
        // Frozen value from an independent adaptive-quadrature implementation.
        assert_relative_eq!(oracle, 0.035_728_577_435_504_93, max_relative = 1e-11);
        let rule = PhiQuadRule::new(32).unwrap();
        let g = kernel_g(KernelArgs::new(r, z, rb, zb), &rule, 0.0).unwrap();
        assert_relative_eq!(g, oracle, max_relative = 1e-9);
    }

    #[test]
    fn kernel_g_decays_away_from_symmetry_plane() {
        let rule = PhiQuadRule::new(32).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let h = 0.25 * k as f64;
            let g = kernel_g(KernelArgs::new(2.0, h, 2.0, h), &rule, 0.0).unwrap();
            assert!(g > 0.0 && g < prev, "expected strict decay, got {g} after {prev}");
            prev = g;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_weight_sum_is_interval_length(order in 1usize..200) {
            let rule = PhiQuadRule::new(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            prop_assert!((total - FRAC_PI_2).abs() < 1e-13);
        }

        #[test]
        fn prop_kernel_symmetries(
            r in 0.3f64..4.0,
            z in 0.05f64..3.0,
            rb in 0.3f64..4.0,
            zb in 0.05f64..3.0,
            delta in prop::sample::select(vec![0.0f64, 0.05]),
        ) {
            let rule = PhiQuadRule::new(16).unwrap();
            let args = KernelArgs::new(r, z, rb, zb);
            // Random floats never coincide exactly, so delta = 0 stays regular.
            let kr = kernel_kr_odd(args, &rule, delta).unwrap();
            let kr_m = kernel_kr_odd(KernelArgs::new(r, -z, rb, zb), &rule, delta).unwrap();
            prop_assert_eq!(kr, kr_m);
            let kz = kernel_kz_full(args, &rule, delta).unwrap();
            let kz_m = kernel_kz_full(KernelArgs::new(r, -z, rb, zb), &rule, delta).unwrap();
            prop_assert_eq!(kz, -kz_m);
            let g = kernel_g(args, &rule, delta).unwrap();
            let g_swap = kernel_g(KernelArgs::new(rb, zb, r, z), &rule, delta).unwrap();
            prop_assert!(g > 0.0);
            prop_assert_eq!(g, g_swap);
        }

        #[test]
        fn prop_s_integral_tracks_composite_oracle(a in 0.1f64..3.0, p in 0.5f64..2.5) {
            // A family of smooth integrands resembling kernel slices.
            let rule = PhiQuadRule::new(32).unwrap();
            let f = |s: f64| (a + 3.0 - 2.0 * s).powf(-p);
            let gl = rule.s_integral(f).unwrap();
            let oracle = oracle_s_integral(f, 200_000);
            prop_assert!((gl - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
        }
    }
}
