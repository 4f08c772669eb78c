//! Meridian grids, scalar fields, the vortex-ring-pair datum and field diagnostics.
//!
//! Everything here lives on the upper half of the meridian plane: vorticity data is
//! odd in `z` by construction, so only `z > 0` (or `z ≥ 0` for the transport solver's
//! grids) is stored, and the mirror half is reconstructed analytically where needed.
//! Fields are cell-centered; cell `(i, j)` has center `(r_min + (i+½)Δr, z_min + (j+½)Δz)`
//! and all quadratures over fields are midpoint sums.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Uniform cell-centered grid on `[r_min, r_max] × [z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_r: usize,
    pub n_z: usize,
}

impl AxiGrid {
    /// Validate and build a grid. Radial and axial extents must be non-degenerate
    /// with `r_min ≥ 0` and `z_min ≥ 0`, and at least two cells per direction.
    /// (Runs that carry blowup data additionally require strictly positive
    /// `r_min`, `z_min`; that is enforced at configuration level, not here, so the
    /// transport solver can keep its grid flush against the symmetry plane.)
    pub fn new(
        r_min: f64,
        r_max: f64,
        z_min: f64,
        z_max: f64,
        n_r: usize,
        n_z: usize,
    ) -> Result<Self> {
        for (name, v) in [
            ("r_min", r_min),
            ("r_max", r_max),
            ("z_min", z_min),
            ("z_max", z_max),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name}: must be finite, got {v}")));
            }
        }
        if r_min < 0.0 {
            return Err(Error::Config(format!("r_min: must be >= 0, got {r_min}")));
        }
        if z_min < 0.0 {
            return Err(Error::Config(format!("z_min: must be >= 0, got {z_min}")));
        }
        if r_max <= r_min {
            return Err(Error::Config(format!(
                "r_max: must exceed r_min, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        if z_max <= z_min {
            return Err(Error::Config(format!(
                "z_max: must exceed z_min, got z_min = {z_min}, z_max = {z_max}"
            )));
        }
        if n_r < 2 || n_z < 2 {
            return Err(Error::Config(format!(
                "n_r/n_z: need at least 2 cells per direction, got {n_r} x {n_z}"
            )));
        }
        Ok(Self {
            r_min,
            r_max,
            z_min,
            z_max,
            n_r,
            n_z,
        })
    }

    /// Radial cell width.
    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / self.n_r as f64
    }

    /// Axial cell width.
    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_z as f64
    }

    /// Cell area `Δr Δz` (the meridian measure; the azimuthal `2π r` lives in the
    /// individual functionals).
    pub fn cell_area(&self) -> f64 {
        self.dr() * self.dz()
    }

    /// Center radius of column `i`.
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 0.5) * self.dr()
    }

    /// Center height of row `j`.
    pub fn z(&self, j: usize) -> f64 {
        self.z_min + (j as f64 + 0.5) * self.dz()
    }

    /// Flat index of cell `(i, j)`; storage is radius-major.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_z + j
    }

    /// Total cell count.
    pub fn n_cells(&self) -> usize {
        self.n_r * self.n_z
    }
}

/// Scalar field sampled at the cell centers of an [`AxiGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxiScalarField {
    pub grid: AxiGrid,
    pub values: Vec<f64>,
}

impl AxiScalarField {
    /// All-zero field.
    pub fn zeros(grid: AxiGrid) -> Self {
        Self {
            values: vec![0.0; grid.n_cells()],
            grid,
        }
    }

    /// Sample `f(r, z)` at every cell center.
    pub fn from_fn(grid: AxiGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_cells());
        for i in 0..grid.n_r {
            let r = grid.r(i);
            for j in 0..grid.n_z {
                values.push(f(r, grid.z(j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    /// Maximum absolute value over all cells (0 for an all-zero field).
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Multiply every value in place.
    pub fn scale_in_place(&mut self, alpha: f64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    /// `self += alpha * other`. Panics if the grids differ — integrator-internal use.
    pub fn add_scaled(&mut self, alpha: f64, other: &AxiScalarField) {
        assert_eq!(self.grid, other.grid, "field arithmetic requires matching grids");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }
}

/// Meridian velocity sampled at cell centers. `u_r` is even and `u_z` odd in `z`,
/// so the stored upper half determines the full field.
#[derive(Debug, Clone)]
pub struct AxiVelocity {
    pub grid: AxiGrid,
    pub u_r: Vec<f64>,
    pub u_z: Vec<f64>,
}

impl AxiVelocity {
    /// Largest velocity magnitude component-wise, `max(‖u_r‖_∞, ‖u_z‖_∞)`.
    pub fn max_abs(&self) -> f64 {
        let m = self.u_r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.u_z.iter().fold(m, |m, v| m.max(v.abs()))
    }
}

/// Analytic vortex-ring-pair profile: a `C^∞` bump of one sign on an ellipse in the
/// upper half-plane, extended oddly through the symmetry plane.
///
/// For `z > 0` the profile is `amplitude · exp(−1 / (1 − e))` inside the ellipse
/// `e = ((r − r_c)/ρ_r)² + ((z − z_c)/ρ_z)² < 1` and zero outside; `eval` handles
/// `z ≤ 0` by oddness. With `amplitude < 0` this is the canonical blowup datum:
/// a vortex ring above the plane and its mirror image below, mutually stretching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingPair {
    pub r_c: f64,
    pub z_c: f64,
    pub rho_r: f64,
    pub rho_z: f64,
    pub amplitude: f64,
}

impl RingPair {
    /// Validate the intrinsic constraints: positive semi-axes, ellipse strictly
    /// inside the open quadrant, non-positive amplitude (zero is allowed and gives
    /// the zero field).
    pub fn new(r_c: f64, z_c: f64, rho_r: f64, rho_z: f64, amplitude: f64) -> Result<Self> {
        if !(rho_r > 0.0) || !(rho_z > 0.0) {
            return Err(Error::Config(format!(
                "rho_r/rho_z: ellipse semi-axes must be positive, got {rho_r}, {rho_z}"
            )));
        }
        if amplitude > 0.0 || !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "amplitude: blowup-sign datum requires amplitude <= 0, got {amplitude}"
            )));
        }
        if !(r_c - rho_r > 0.0) {
            return Err(Error::Config(format!(
                "ring_r - rho_r: ellipse must stay off the axis, got {} - {} = {}",
                r_c,
                rho_r,
                r_c - rho_r
            )));
        }
        if !(z_c - rho_z > 0.0) {
            return Err(Error::Config(format!(
                "ring_z - rho_z: ellipse must stay off the symmetry plane, got {} - {} = {}",
                z_c,
                rho_z,
                z_c - rho_z
            )));
        }
        Ok(Self {
            r_c,
            z_c,
            rho_r,
            rho_z,
            amplitude,
        })
    }

    /// Profile value at `(r, z)`, any sign of `z` (odd extension).
    pub fn eval(&self, r: f64, z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let (sign, z_abs) = if z > 0.0 { (1.0, z) } else { (-1.0, -z) };
        let xr = (r - self.r_c) / self.rho_r;
        let xz = (z_abs - self.z_c) / self.rho_z;
        let e = xr * xr + xz * xz;
        if e >= 1.0 {
            0.0
        } else {
            sign * self.amplitude * (-1.0 / (1.0 - e)).exp()
        }
    }

    /// Check that the support ellipse lies strictly inside `grid`.
    pub fn validate_inside(&self, grid: &AxiGrid) -> Result<()> {
        if !(self.r_c - self.rho_r > grid.r_min) || !(self.r_c + self.rho_r < grid.r_max) {
            return Err(Error::Config(format!(
                "ring_r/rho_r: support ellipse [{}, {}] must lie strictly inside the radial \
                 extent [{}, {}]",
                self.r_c - self.rho_r,
                self.r_c + self.rho_r,
                grid.r_min,
                grid.r_max
            )));
        }
        if !(self.z_c - self.rho_z > grid.z_min) || !(self.z_c + self.rho_z < grid.z_max) {
            return Err(Error::Config(format!(
                "ring_z/rho_z: support ellipse [{}, {}] must lie strictly inside the axial \
                 extent [{}, {}]",
                self.z_c - self.rho_z,
                self.z_c + self.rho_z,
                grid.z_min,
                grid.z_max
            )));
        }
        Ok(())
    }

    /// Sample the upper-half profile on `grid` after checking containment.
    pub fn sample(&self, grid: AxiGrid) -> Result<AxiScalarField> {
        self.validate_inside(&grid)?;
        Ok(AxiScalarField::from_fn(grid, |r, z| self.eval(r, z)))
    }
}

/// Build the vortex-ring-pair initial datum on `grid`.
///
/// Validates the datum parameters (see [`RingPair::new`]) and containment, then
/// samples the profile at cell centers. Configuration errors name the violated
/// constraint.
pub fn make_vortex_ring_pair(
    grid: AxiGrid,
    r_c: f64,
    z_c: f64,
    rho_r: f64,
    rho_z: f64,
    amplitude: f64,
) -> Result<AxiScalarField> {
    RingPair::new(r_c, z_c, rho_r, rho_z, amplitude)?.sample(grid)
}

/// Weighted enstrophy functional `Q(ω) = −Σ r² ω ΔrΔz` (midpoint rule).
///
/// For admissible data (`ω ≤ 0` on the upper half-plane) this is non-negative,
/// linear in `ω`, and its growth obeys the Riccati inequality that drives the
/// blowup estimate.
pub fn functional_q(field: &AxiScalarField) -> f64 {
    let grid = &field.grid;
    let mut acc = 0.0;
    for i in 0..grid.n_r {
        let r = grid.r(i);
        let w = r * r;
        let row = &field.values[grid.idx(i, 0)..grid.idx(i, grid.n_z - 1) + 1];
        let mut row_sum = 0.0;
        for v in row {
            row_sum += v;
        }
        acc += w * row_sum;
    }
    -acc * grid.cell_area()
}

/// Closed bounding box of a support region, in physical (cell-center) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub r_lo: f64,
    pub r_hi: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

/// Set of cells whose values exceed a threshold in magnitude, with its bounding box.
///
/// Invariant: non-empty (construction fails otherwise). Cells are stored in
/// deterministic radius-major scan order.
#[derive(Debug, Clone)]
pub struct SupportRegion {
    pub grid: AxiGrid,
    pub cells: Vec<(usize, usize)>,
    pub bbox: SupportBox,
    /// Index-space bounds `(i_lo, i_hi, j_lo, j_hi)`, inclusive.
    pub index_box: (usize, usize, usize, usize),
    pub threshold: f64,
}

/// Collect the cells with `|ω| > threshold`.
///
/// Fails with an empty-support error when no cell qualifies — downstream bounds
/// (the interaction-kernel infimum in particular) are meaningless on an empty set.
pub fn support_region(field: &AxiScalarField, threshold: f64) -> Result<SupportRegion> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::Config(format!(
            "support_threshold: must be finite and >= 0, got {threshold}"
        )));
    }
    let grid = field.grid;
    let mut cells = Vec::new();
    let (mut i_lo, mut i_hi, mut j_lo, mut j_hi) = (usize::MAX, 0, usize::MAX, 0);
    for i in 0..grid.n_r {
        for j in 0..grid.n_z {
            if field.get(i, j).abs() > threshold {
                cells.push((i, j));
                i_lo = i_lo.min(i);
                i_hi = i_hi.max(i);
                j_lo = j_lo.min(j);
                j_hi = j_hi.max(j);
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptySupport(format!(
            "no cell exceeds threshold {threshold:e} (sup norm {:e})",
            field.sup_norm()
        )));
    }
    let bbox = SupportBox {
        r_lo: grid.r(i_lo),
        r_hi: grid.r(i_hi),
        z_lo: grid.z(j_lo),
        z_hi: grid.z(j_hi),
    };
    Ok(SupportRegion {
        grid,
        cells,
        bbox,
        index_box: (i_lo, i_hi, j_lo, j_hi),
        threshold,
    })
}

/// Structural diagnostics of a field against the admissibility requirements of the
/// blowup setup: non-positive sign, zero trace on the grid boundary, compact support.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    /// Supremum norm of the field.
    pub sup_norm: f64,
    /// Largest (most positive) value; admissible data has `max_positive ≤ 0`.
    pub max_positive: f64,
    /// First cell (radius-major scan) holding a strictly positive value.
    pub first_positive_cell: Option<(usize, usize)>,
    /// Number of strictly positive cells.
    pub positive_cell_count: usize,
    /// Largest `|value|` on the outermost cell ring.
    pub boundary_max_abs: f64,
    /// Support bounding box at the threshold used for the report, if non-empty.
    pub support_box: Option<SupportBox>,
    /// Threshold used for the support box.
    pub support_threshold: f64,
}

impl GeometryReport {
    /// No strictly positive entries at all.
    pub fn sign_ok(&self) -> bool {
        self.positive_cell_count == 0
    }

    /// No positive entry beyond `tol` (transport runs tolerate limiter-scale dust).
    pub fn sign_ok_within(&self, tol: f64) -> bool {
        self.max_positive <= tol
    }

    /// Boundary trace within `tol` of zero.
    pub fn boundary_ok(&self, tol: f64) -> bool {
        self.boundary_max_abs <= tol
    }
}

/// Inspect a field for sign, boundary and support-geometry defects.
///
/// Never fails: the report records what was found (including the index of the
/// first positive entry, if any) and the caller decides what is fatal.
pub fn validate_geometry(field: &AxiScalarField, support_threshold: f64) -> GeometryReport {
    let grid = field.grid;
    let mut max_positive = 0.0_f64;
    let mut first_positive = None;
    let mut positive_count = 0usize;
    for i in 0..grid.n_r {
        for j in 0..grid.n_z {
            let v = field.get(i, j);
            if v > 0.0 {
                positive_count += 1;
                if first_positive.is_none() {
                    first_positive = Some((i, j));
                }
                max_positive = max_positive.max(v);
            }
        }
    }
    let mut boundary_max = 0.0_f64;
    for i in 0..grid.n_r {
        boundary_max = boundary_max
            .max(field.get(i, 0).abs())
            .max(field.get(i, grid.n_z - 1).abs());
    }
    for j in 0..grid.n_z {
        boundary_max = boundary_max
            .max(field.get(0, j).abs())
            .max(field.get(grid.n_r - 1, j).abs());
    }
    let support_box = support_region(field, support_threshold).ok().map(|s| s.bbox);
    GeometryReport {
        sup_norm: field.sup_norm(),
        max_positive,
        first_positive_cell: first_positive,
        positive_cell_count: positive_count,
        boundary_max_abs: boundary_max,
        support_box,
        support_threshold,
    }
}

/// Metadata stored next to a binary field snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub time: f64,
    pub step: u64,
    pub mode: String,
    pub sup_norm: f64,
    pub q: f64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Write a field snapshot: a fixed 48-byte header (grid extents as four little-endian
/// `f64`, then `n_r`, `n_z` as little-endian `u64`) followed by the radius-major cell
/// values as little-endian `f64`. A JSON sidecar `<path>.json` carries the metadata.
pub fn save_snapshot(field: &AxiScalarField, meta: &SnapshotMeta, path: &Path) -> Result<()> {
    let g = field.grid;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in [g.r_min, g.r_max, g.z_min, g.z_max] {
        w.write_all(&v.to_le_bytes())?;
    }
    for n in [g.n_r as u64, g.n_z as u64] {
        w.write_all(&n.to_le_bytes())?;
    }
    for v in &field.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

/// Read back a snapshot written by [`save_snapshot`].
///
/// The header is validated (grid constraints, sane cell counts) and the payload
/// length must match the header exactly; a truncated or padded file is a format
/// error, not a best-effort read. The sidecar is optional, but if present it must
/// parse.
pub fn load_snapshot(path: &Path) -> Result<(AxiScalarField, Option<SnapshotMeta>)> {
    const MAX_CELLS: usize = 1 << 26;
    let mut rd = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut buf8 = [0u8; 8];
    let mut header = [0.0f64; 4];
    for h in &mut header {
        rd.read_exact(&mut buf8)
            .map_err(|_| Error::Format(format!("{}: truncated snapshot header", path.display())))?;
        *h = f64::from_le_bytes(buf8);
    }
    let mut dims = [0u64; 2];
    for d in &mut dims {
        rd.read_exact(&mut buf8)
            .map_err(|_| Error::Format(format!("{}: truncated snapshot header", path.display())))?;
        *d = u64::from_le_bytes(buf8);
    }
    let (n_r, n_z) = (dims[0] as usize, dims[1] as usize);
    if dims[0] > MAX_CELLS as u64 || dims[1] > MAX_CELLS as u64 || n_r.saturating_mul(n_z) > MAX_CELLS
    {
        return Err(Error::Format(format!(
            "{}: snapshot header implies {} x {} cells, refusing",
            path.display(),
            dims[0],
            dims[1]
        )));
    }
    let grid = AxiGrid::new(header[0], header[1], header[2], header[3], n_r, n_z)
        .map_err(|e| Error::Format(format!("{}: bad snapshot header: {e}", path.display())))?;
    let n = grid.n_cells();
    let mut values = vec![0.0f64; n];
    let mut payload = vec![0u8; n * 8];
    rd.read_exact(&mut payload)
        .map_err(|_| Error::Format(format!("{}: snapshot payload shorter than header claims", path.display())))?;
    if rd.read(&mut buf8)? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes after snapshot payload",
            path.display()
        )));
    }
    for (k, v) in values.iter_mut().enumerate() {
        let mut b = [0u8; 8];
        b.copy_from_slice(&payload[k * 8..k * 8 + 8]);
        *v = f64::from_le_bytes(b);
    }
    let meta_path = sidecar_path(path);
    let meta = if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path)?;
        Some(serde_json::from_str(&text).map_err(|e| {
            Error::Format(format!("{}: bad snapshot sidecar: {e}", meta_path.display()))
        })?)
    } else {
        None
    };
    Ok((AxiScalarField { grid, values }, meta))
}
