//! Lippmann–Schwinger volume equation for a penetrable surface, posed over
//! the flat two-layer medium.
//!
//! With κ0 the flat-interface wavenumber (κ1 above x2 = 0, κ2 below) and κ
//! the wavenumber of the rough medium, the total field satisfies
//! u = u_0 + ∫ q(y) v_0(·, y) u(y) dy with q = κ² − κ0², supported between
//! the surface and x2 = 0.  For the Γ_R dip q = σ on the half-disc, which
//! gives G_P.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceProfile};
use crate::greens::{twolayer_flat_green_field, twolayer_flat_green_reflected, TwoLayerMedium};
use crate::linalg::{relative_residual, CMat, DenseLu};
use crate::specfun::{hankel01, C64};

/// Dyadic refinement levels applied to cells cut by the region boundary.
pub const CUT_CELL_LEVELS: u32 = 2;

/// One quadrature cell of the contrast region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeCell {
    pub centre: Point,
    /// Area (positive).
    pub weight: f64,
    /// κ² − κ0² at the centre.
    pub contrast: f64,
}

/// Factorized I − K·diag(q w) over the midpoint cells of the contrast region.
pub struct VolumeOperator {
    pub medium: TwoLayerMedium,
    pub cells: Vec<VolumeCell>,
    matrix: CMat,
    lu: DenseLu,
}

impl std::fmt::Debug for VolumeOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VolumeOperator").field("cells", &self.cells.len()).finish()
    }
}

/// ∫ over the disc of radius a centred at y of Φ_κ(y, ·).
fn disc_integral(k: f64, a: f64) -> C64 {
    let (_, h1) = hankel01(k * a);
    C64::new(0.0, PI * a / (2.0 * k)) * h1 - 1.0 / (k * k)
}

impl VolumeOperator {
    /// Cells of side `h` covering the region where the rough medium differs
    /// from the flat one; cells cut by the surface or the line x2 = 0 are
    /// split [`CUT_CELL_LEVELS`] times and the pieces whose centres lie in
    /// the region are kept.
    pub fn new(profile: &SurfaceProfile, medium: TwoLayerMedium, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Domain("cell size must be positive".into()));
        }
        let cells = contrast_cells(profile, &medium, h)?;
        if cells.is_empty() {
            return Err(Error::Geometry("the contrast region is empty".into()));
        }
        let n = cells.len();
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<Vec<C64>> {
                let ci = cells[i];
                let mut row = vec![C64::new(0.0, 0.0); n];
                for (j, cj) in cells.iter().enumerate() {
                    let k = if i == j {
                        let k0 = if ci.centre[1] >= 0.0 { medium.k1 } else { medium.k2 };
                        let a = (ci.weight / PI).sqrt();
                        disc_integral(k0, a)
                            + twolayer_flat_green_reflected(&medium, ci.centre, ci.centre)?.value * ci.weight
                    } else {
                        twolayer_flat_green_field(&medium, ci.centre, cj.centre)?.value * cj.weight
                    };
                    row[j] = -k * cj.contrast;
                }
                row[i] += 1.0;
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let matrix = CMat::from_fn(n, n, |i, j| rows[i][j]);
        let lu = DenseLu::factor(&matrix)?;
        Ok(Self { medium, cells, matrix, lu })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Total field at the cell centres for the flat-medium field `u0`
    /// sampled there.
    pub fn solve(&self, u0: &[C64]) -> Result<Vec<C64>> {
        if u0.len() != self.len() {
            return Err(Error::Domain("incident field has the wrong length".into()));
        }
        Ok(self.lu.solve(u0))
    }

    /// ‖A u − u0‖ / ‖u0‖ for a solution of [`Self::solve`].
    pub fn residual(&self, u: &[C64], u0: &[C64]) -> f64 {
        relative_residual(&self.matrix, u, u0)
    }

    /// The volume potential ∫ q v_0(x, ·) u at a point x off the cell centres.
    pub fn volume_potential(&self, x: Point, u: &[C64]) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for (c, ui) in self.cells.iter().zip(u) {
            s += twolayer_flat_green_field(&self.medium, x, c.centre)?.value * (c.contrast * c.weight) * ui;
        }
        Ok(s)
    }

    /// Total field at `x` for a point source at `y`: v_0(x, y) plus the
    /// volume potential of the solved field.
    pub fn point_source_field(&self, x: Point, y: Point) -> Result<C64> {
        let u0: Vec<C64> = self
            .cells
            .iter()
            .map(|c| twolayer_flat_green_field(&self.medium, c.centre, y).map(|f| f.value))
            .collect::<Result<_>>()?;
        let u = self.solve(&u0)?;
        Ok(twolayer_flat_green_field(&self.medium, x, y)?.value + self.volume_potential(x, &u)?)
    }
}

fn contrast_at(profile: &SurfaceProfile, m: &TwoLayerMedium, p: Point) -> f64 {
    let k = if profile.is_above(p) { m.k1 } else { m.k2 };
    let k0 = if p[1] >= 0.0 { m.k1 } else { m.k2 };
    k * k - k0 * k0
}

fn contrast_cells(profile: &SurfaceProfile, m: &TwoLayerMedium, h: f64) -> Result<Vec<VolumeCell>> {
    let a = profile.support_halfwidth;
    let samples = ((2.0 * a / h).ceil() as usize * 8).max(64);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for i in 0..=samples {
        let x1 = -a + 2.0 * a * i as f64 / samples as f64;
        let f = profile.eval(x1)?;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    // Rows are aligned with x2 = 0 so that no cell straddles the flat interface.
    let j_lo = (lo / h).floor() as i64;
    let j_hi = (hi / h).ceil() as i64;
    let i_max = (a / h).ceil() as i64;
    let mut cells = Vec::new();
    for j in j_lo..j_hi {
        for i in -i_max..i_max {
            let x0 = [i as f64 * h, j as f64 * h];
            add_cell(profile, m, x0, h, CUT_CELL_LEVELS, &mut cells);
        }
    }
    Ok(cells)
}

fn add_cell(profile: &SurfaceProfile, m: &TwoLayerMedium, x0: Point, h: f64, levels: u32, out: &mut Vec<VolumeCell>) {
    let centre = [x0[0] + 0.5 * h, x0[1] + 0.5 * h];
    let corners = [x0, [x0[0] + h, x0[1]], [x0[0], x0[1] + h], [x0[0] + h, x0[1] + h]];
    let q = contrast_at(profile, m, centre);
    let uniform = corners.iter().all(|&c| contrast_at(profile, m, c) == q);
    if uniform || levels == 0 {
        if q != 0.0 {
            out.push(VolumeCell { centre, weight: h * h, contrast: q });
        }
        return;
    }
    let hh = 0.5 * h;
    for (di, dj) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        add_cell(profile, m, [x0[0] + di * hh, x0[1] + dj * hh], hh, levels - 1, out);
    }
}
