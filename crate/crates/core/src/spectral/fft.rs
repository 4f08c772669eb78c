//! Three-dimensional FFT on an `n³` complex lattice, built from 1-D transforms.
//!
//! Layout: index `(ix, iy, iz) ↦ (ix·n + iy)·n + iz`, so the z axis is
//! contiguous. The y and x passes run on cache-blocked transposed copies of
//! each slab instead of strided gathers — at `n = 128` a slab transpose stays
//! inside L2 and the 1-D transforms always see contiguous rows. Slabs are
//! independent, so the passes parallelize over them.
//!
//! Normalization: `forward` produces Fourier *coefficients* `c_k` with the
//! `1/n³` factor folded in, i.e. `f(x_m) = Σ_k c_k e^{2πi k·m/n}`, and
//! `inverse` reconstructs samples from coefficients with no extra scaling.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Samples → coefficients (includes the `1/n³`).
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.pass_all(data, &self.fwd);
        let scale = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    /// Coefficients → samples.
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.pass_all(data, &self.inv);
    }

    fn pass_all(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        // z pass: rows already contiguous.
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
        // y pass: transpose each x-slab (an n×n matrix over (iy, iz)), run
        // contiguous rows, transpose back.
        data.par_chunks_mut(n * n).for_each_init(
            || {
                (
                    vec![Complex64::default(); n * n],
                    vec![Complex64::default(); fft.get_inplace_scratch_len()],
                )
            },
            |(tmp, scratch), slab| {
                transpose_square(slab, tmp, n);
                tmp.chunks_mut(n)
                    .for_each(|row| fft.process_with_scratch(row, scratch));
                transpose_square(tmp, slab, n);
            },
        );
        // x pass: swap the x and z axes globally, reuse the contiguous z pass,
        // swap back.
        let mut swapped = vec![Complex64::default(); data.len()];
        swap_x_z(data, &mut swapped, n);
        swapped.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
        swap_x_z(&swapped, data, n);
    }
}

/// Cache-blocked transpose of an `n×n` complex matrix, `dst = srcᵀ`.
fn transpose_square(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Global axis swap `(ix, iy, iz) → (iz, iy, ix)`, blocked over the two swapped
/// axes and parallel over output slabs.
fn swap_x_z(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    dst.par_chunks_mut(n * n).enumerate().for_each(|(iz, out)| {
        // out[(iy, ix_new)] = src[(ix_new·n + iy)·n + iz], blocked in ix.
        for ixb in (0..n).step_by(B) {
            for iy in 0..n {
                for ix in ixb..(ixb + B).min(n) {
                    out[iy * n + ix] = src[(ix * n + iy) * n + iz];
                }
            }
        }
    });
}
