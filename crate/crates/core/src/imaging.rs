//! Reverse-time-migration indicator functions on a sampling grid.
//!
//! Back-propagation is folded into closed form, so each indicator is a
//! weighted correlation of background fields with conjugated data:
//! Ind(z) = −c·Im Σ_r Σ_s w_r w_s G(z, x_r) G(z, x_s) conj(V(x_r, x_s)),
//! evaluated as one matrix product and one row-wise dot product.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::bie::{BoundaryOperator, Incidence};
use crate::forward::data::ScatterData;
use crate::forward::model::solve_total_fields;
use crate::forward::BoundaryKind;
use crate::geometry::{acquisition_points, AcquisitionGeometry, ImageGrid, Point, Regime, SurfaceProfile};
use crate::greens::far_field_constant;
use crate::linalg::CMat;
use crate::specfun::C64;

pub const RTMG_MAGIC: &[u8; 4] = b"RTMG";
pub const RTMG_VERSION: u32 = 1;

/// Evaluates the indicator matching the data's regime and kind.
pub fn indicator(data: &ScatterData, g: &AcquisitionGeometry, background: &BoundaryOperator, grid: &ImageGrid) -> Result<ImageGrid> {
    match data.regime {
        Regime::Near => indicator_near(data, g, background, grid),
        Regime::Far => indicator_far(data, g, background, grid),
    }
}

fn check_inputs(data: &ScatterData, g: &AcquisitionGeometry, bg: &BoundaryOperator, grid: &ImageGrid) -> Result<Vec<Point>> {
    data.check_acquisition(g)?;
    if bg.kind != data.kind {
        return Err(Error::Domain(format!("background is {:?} but data is {:?}", bg.kind, data.kind)));
    }
    if bg.profile != SurfaceProfile::gamma_r(data.background_radius) {
        return Err(Error::Domain("background operator is not the Γ_R surface of the data".into()));
    }
    if (bg.k1 - data.k1).abs() > 1e-12 * data.k1 || (data.kind == BoundaryKind::Penetrable && (bg.k2 - data.k2).abs() > 1e-12 * data.k2) {
        return Err(Error::Domain("background wavenumbers differ from the data".into()));
    }
    grid.check_inside(data.background_radius)?;
    let pts = grid.points();
    if data.kind != BoundaryKind::Penetrable {
        if let Some(z) = pts.iter().find(|z| !bg.profile.is_above(**z)) {
            return Err(Error::Domain(format!("grid point {z:?} lies below Γ_R")));
        }
    }
    Ok(pts)
}

/// Σ_r Σ_s a_r b_s Gr[z, r] Gs[z, s] conj(V[r, s]) for every z.
fn correlate(gr: &CMat, gs: &CMat, v: &CMat, a: &[f64], b: &[f64]) -> Vec<C64> {
    let (nr, ns) = (v.nrows(), v.ncols());
    let vc = CMat::from_fn(ns, nr, |s, r| v[(r, s)].conj() * (a[r] * b[s]));
    let t = gs * &vc;
    (0..gr.nrows())
        .into_par_iter()
        .map(|z| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..nr {
                acc += gr[(z, r)] * t[(z, r)];
            }
            acc
        })
        .collect()
}

fn into_grid(grid: &ImageGrid, values: Vec<f64>) -> ImageGrid {
    let mut out = grid.clone();
    out.values = values;
    out
}

/// Near-field indicator: impenetrable with weights |Γ_s|/N_s = πR_s/N_s and
/// prefactor κ1², penetrable with 2πR/N weights and κ(x_r)κ(x_s).
pub fn indicator_near(data: &ScatterData, g: &AcquisitionGeometry, bg: &BoundaryOperator, grid: &ImageGrid) -> Result<ImageGrid> {
    if data.regime != Regime::Near {
        return Err(Error::Domain("near-field indicator needs near-field data".into()));
    }
    let pts = check_inputs(data, g, bg, grid)?;
    let (src, rcv) = acquisition_points(g)?;
    let (ns, nr) = (src.len(), rcv.len());
    let inc_s: Vec<Incidence> = src.iter().map(|&x| Incidence::Point(x)).collect();
    let inc_r: Vec<Incidence> = rcv.iter().map(|&x| Incidence::Point(x)).collect();
    let gs = solve_total_fields(bg, &inc_s, &pts)?;
    let gr = if src == rcv { gs.clone() } else { solve_total_fields(bg, &inc_r, &pts)? };
    let penetrable = data.kind == BoundaryKind::Penetrable;
    let arc = if penetrable { 2.0 * PI } else { PI };
    let ws = arc * g.r_s / ns as f64;
    let wr = arc * g.r_r / nr as f64;
    let kappa = |x: &Point| if penetrable && !bg.profile.is_above(*x) { data.k2 } else { data.k1 };
    let (a, b): (Vec<f64>, Vec<f64>) = if penetrable {
        (rcv.iter().map(|x| wr * kappa(x)).collect(), src.iter().map(|x| ws * kappa(x)).collect())
    } else {
        (vec![wr; nr], vec![ws; ns])
    };
    let acc = correlate(&gr, &gs, &data.matrix, &a, &b);
    let c = if penetrable { 1.0 } else { data.k1 * data.k1 };
    Ok(into_grid(grid, acc.iter().map(|z| -c * z.im).collect()))
}

/// Far-field indicator with uniform trapezoid weights over the directions.
pub fn indicator_far(data: &ScatterData, g: &AcquisitionGeometry, bg: &BoundaryOperator, grid: &ImageGrid) -> Result<ImageGrid> {
    if data.regime != Regime::Far {
        return Err(Error::Domain("far-field indicator needs far-field data".into()));
    }
    let pts = check_inputs(data, g, bg, grid)?;
    let (src, rcv) = acquisition_points(g)?;
    let (ns, nr) = (src.len(), rcv.len());
    let plane = |d: &Point| Incidence::Plane([-d[0], -d[1]]);
    let inc_s: Vec<Incidence> = src.iter().map(plane).collect();
    let inc_r: Vec<Incidence> = rcv.iter().map(plane).collect();
    let ws_mat = solve_total_fields(bg, &inc_s, &pts)?;
    let wr_mat = if src == rcv { ws_mat.clone() } else { solve_total_fields(bg, &inc_r, &pts)? };
    let values = if data.kind == BoundaryKind::Penetrable {
        let kappa = |d: &Point| if d[1] >= 0.0 { data.k1 } else { data.k2 };
        let hr = 2.0 * PI / nr as f64;
        let hs = 2.0 * PI / ns as f64;
        // κ(x̂_r)|γ(x̂_r)|² is real; the complex γ(x̂_s) goes on the source fields.
        let a: Vec<f64> = rcv.iter().map(|d| hr * kappa(d) * far_field_constant(kappa(d)).norm_sqr()).collect();
        let b: Vec<f64> = src.iter().map(|d| hs * kappa(d)).collect();
        let gamma_s: Vec<C64> = src.iter().map(|d| far_field_constant(kappa(d))).collect();
        let scaled = CMat::from_fn(pts.len(), ns, |z, s| ws_mat[(z, s)] * gamma_s[s]);
        let acc = correlate(&wr_mat, &scaled, &data.matrix, &a, &b);
        acc.iter().map(|z| -z.im).collect()
    } else {
        let g1 = far_field_constant(data.k1);
        let a = vec![PI / nr as f64; nr];
        let b = vec![PI / ns as f64; ns];
        let acc = correlate(&wr_mat, &ws_mat, &data.matrix, &a, &b);
        let c = data.k1 * data.k1 * g1.norm_sqr();
        acc.iter().map(|z| -c * (g1 * z).im).collect()
    };
    Ok(into_grid(grid, values))
}

/// An image rescaled to [−1, 1] with the original range.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedImage {
    pub grid: ImageGrid,
    pub original_min: f64,
    pub original_max: f64,
}

/// Affine map of the values onto [−1, 1].
pub fn normalize_image(g: &ImageGrid) -> Result<NormalizedImage> {
    let (lo, hi) = value_range(g)?;
    if !(hi > lo) {
        return Err(Error::Domain("cannot normalize a constant image".into()));
    }
    let values = g.values.iter().map(|v| 2.0 * (v - lo) / (hi - lo) - 1.0).collect();
    Ok(NormalizedImage { grid: into_grid(g, values), original_min: lo, original_max: hi })
}

fn value_range(g: &ImageGrid) -> Result<(f64, f64)> {
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("image contains non-finite values".into()));
    }
    let lo = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Which extremum marks the surface in a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    /// Peak for sound-soft and penetrable surfaces, nadir for sound-hard.
    pub fn for_kind(kind: BoundaryKind) -> Self {
        if kind == BoundaryKind::Neumann {
            Extremum::Min
        } else {
            Extremum::Max
        }
    }
}

/// Per-column localization against the true surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Localization {
    pub columns: usize,
    pub hits: usize,
    /// Extremum location of every tested column.
    pub picks: Vec<Point>,
    /// Distance from each pick to the surface.
    pub distances: Vec<f64>,
}

impl Localization {
    pub fn fraction(&self) -> f64 {
        if self.columns == 0 {
            0.0
        } else {
            self.hits as f64 / self.columns as f64
        }
    }
}

/// For each grid column with |x1| < A, the extremum over x2 counts as a hit
/// when its Euclidean distance to the surface is at most `tolerance`.
pub fn column_localization(g: &ImageGrid, profile: &SurfaceProfile, which: Extremum, tolerance: f64) -> Result<Localization> {
    let a = profile.support_halfwidth;
    let curve = surface_polyline(profile, a.max(g.x1_range.0.abs()).max(g.x1_range.1.abs()) + 1.0)?;
    let mut out = Localization { columns: 0, hits: 0, picks: Vec::new(), distances: Vec::new() };
    for i in 0..g.n1 {
        let x1 = g.x1(i);
        if !(x1.abs() < a) {
            continue;
        }
        let mut best = 0;
        for j in 1..g.n2 {
            let (v, b) = (g.value(i, j), g.value(i, best));
            let better = match which {
                Extremum::Max => v > b,
                Extremum::Min => v < b,
            };
            if better {
                best = j;
            }
        }
        let p = [x1, g.x2(best)];
        let d = distance_to_polyline(&curve, p);
        out.columns += 1;
        if d <= tolerance {
            out.hits += 1;
        }
        out.picks.push(p);
        out.distances.push(d);
    }
    Ok(out)
}

/// Dense polyline through the surface pieces over |x1| ≤ extent.
pub fn surface_polyline(profile: &SurfaceProfile, extent: f64) -> Result<Vec<Point>> {
    let mut pts = Vec::new();
    for (piece, _) in profile.pieces(extent)? {
        let (t0, t1) = piece.param_range();
        let n = 400;
        for k in 0..=n {
            pts.push(piece.eval(t0 + (t1 - t0) * k as f64 / n as f64).0);
        }
    }
    Ok(pts)
}

fn distance_to_polyline(poly: &[Point], p: Point) -> f64 {
    let mut best = f64::INFINITY;
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let l2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = if l2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
        let d = (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1]);
        best = best.min(d);
    }
    best
}

/// Writes the RTMG binary grid format.
pub fn write_grid(g: &ImageGrid, w: &mut impl Write) -> Result<()> {
    w.write_all(RTMG_MAGIC)?;
    w.write_all(&RTMG_VERSION.to_le_bytes())?;
    w.write_all(&(g.n1 as u32).to_le_bytes())?;
    w.write_all(&(g.n2 as u32).to_le_bytes())?;
    for v in [g.x1_range.0, g.x1_range.1, g.x2_range.0, g.x2_range.1] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in &g.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid(r: &mut impl Read) -> Result<ImageGrid> {
    let bad = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format("grid file is truncated".into())
        } else {
            Error::Io(e)
        }
    };
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(bad)?;
    if &b4 != RTMG_MAGIC {
        return Err(Error::Format("not an RTMG file (bad magic)".into()));
    }
    r.read_exact(&mut b4).map_err(bad)?;
    let version = u32::from_le_bytes(b4);
    if version != RTMG_VERSION {
        return Err(Error::Format(format!("unsupported RTMG version {version}")));
    }
    r.read_exact(&mut b4).map_err(bad)?;
    let n1 = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4).map_err(bad)?;
    let n2 = u32::from_le_bytes(b4) as usize;
    let mut f = [0.0f64; 4];
    let mut b8 = [0u8; 8];
    for v in f.iter_mut() {
        r.read_exact(&mut b8).map_err(bad)?;
        *v = f64::from_le_bytes(b8);
    }
    let mut g = ImageGrid::new((f[0], f[1]), (f[2], f[3]), n1, n2).map_err(|e| Error::Format(e.to_string()))?;
    for v in g.values.iter_mut() {
        r.read_exact(&mut b8).map_err(bad)?;
        *v = f64::from_le_bytes(b8);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after RTMG values".into()));
    }
    Ok(g)
}

pub fn save_grid(g: &ImageGrid, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_grid(g, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<ImageGrid> {
    let bytes = std::fs::read(path)?;
    read_grid(&mut bytes.as_slice())
}

/// One grid row (fixed x2) per line, values space-separated.
pub fn grid_to_text(g: &ImageGrid) -> String {
    let mut s = String::new();
    for j in 0..g.n2 {
        let row: Vec<String> = (0..g.n1).map(|i| format!("{:e}", g.value(i, j))).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// 16-bit binary PGM with min → 0 and max → 65535, top row at the largest x2.
pub fn render_pgm(g: &ImageGrid) -> Result<Vec<u8>> {
    let (lo, hi) = value_range(g)?;
    if !(hi > lo) {
        return Err(Error::Domain("cannot render a constant image".into()));
    }
    let mut out = format!("P5\n{} {}\n65535\n", g.n1, g.n2).into_bytes();
    for j in (0..g.n2).rev() {
        for i in 0..g.n1 {
            let t = (g.value(i, j) - lo) / (hi - lo);
            let p = (t * 65535.0).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
    Ok(out)
}
