//! The forward, image, render and greens subcommands.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rtm_core::forward::data::required_coverage;
use rtm_core::forward::{add_noise, build_operators, synthesize_with, BoundaryKind, BoundaryOperator, Incidence, ScatterData};
use rtm_core::geometry::{ImageGrid, Point, SurfaceProfile};
use rtm_core::imaging::{
    column_localization, indicator, load_grid, normalize_image, render_pgm, save_grid, surface_polyline, Extremum,
};
use rtm_core::linalg::relative_residual;
use rtm_core::verify::{BackgroundGreen, FlatGreen, GreenFunction};

use crate::config::{regime_name, RunConfig};
use crate::exit::CliError;

fn save_data(data: &ScatterData, path: &Path) -> Result<(), CliError> {
    data.save(path).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn load_data(path: &Path) -> Result<ScatterData, CliError> {
    ScatterData::load(path).map_err(|e| CliError::io(format!("cannot read data {}: {e}", path.display())))
}

/// ‖A x − b‖/‖b‖ for the first incidence on `op`, or 0 when it has no sources.
fn first_residual(op: &BoundaryOperator, inc: &[Incidence]) -> Result<f64, CliError> {
    let Some(&first) = inc.first() else { return Ok(0.0) };
    let b = op.boundary_data(&[first])?;
    let x = op.solve_data(&b);
    let bv: Vec<_> = (0..b.nrows()).map(|i| b[(i, 0)]).collect();
    let xv: Vec<_> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    Ok(relative_residual(&op.matrix(), &xv, &bv))
}

/// Synthesizes (and optionally perturbs) the data of `cfg`, reporting on `out`.
pub fn forward(cfg: &RunConfig, output: &Path, out: &mut impl Write) -> Result<ScatterData, CliError> {
    let model = cfg.model()?;
    let g = cfg.geometry();
    let profile = cfg.profile_shape()?;
    let t0 = Instant::now();
    let ops = build_operators(&profile, &model, &g)?;
    let t_build = t0.elapsed();
    let clean = synthesize_with(&ops, &model, &g)?;
    let t_data = t0.elapsed() - t_build;
    let data = add_noise(&clean, cfg.tau, cfg.seed)?;
    save_data(&data, output)?;
    let (src, _) = rtm_core::geometry::acquisition_points(&g)?;
    let probe: Vec<Incidence> = match cfg.regime {
        rtm_core::geometry::Regime::Near => src.iter().take(1).map(|&x| Incidence::Point(x)).collect(),
        rtm_core::geometry::Regime::Far => src.iter().take(1).map(|d| Incidence::Plane([-d[0], -d[1]])).collect(),
    };
    let w = |e: std::io::Error| CliError::io(format!("cannot write report: {e}"));
    writeln!(out, "data: {} x {} ({} receivers by {} sources), regime {}", data.n_r(), data.n_s(), data.n_r(), data.n_s(), regime_name(data.regime))
        .map_err(w)?;
    writeln!(out, "norm: {:.6e}  max-abs: {:.6e}  noise tau: {}  seed: {}", data.norm(), data.max_abs(), data.noise_tau, data.seed).map_err(w)?;
    let mut surfaces = vec![("surface", &ops.surface)];
    if let Some(bg) = &ops.background {
        surfaces.push(("background", bg));
    }
    for (name, op) in surfaces {
        writeln!(
            out,
            "{name}: {} unknowns, pivot ratio {:.3e}, residual {:.3e}",
            op.system_dim(),
            op.pivot_ratio(),
            first_residual(op, &probe)?
        )
        .map_err(w)?;
    }
    writeln!(out, "timing: operators {:.2?}, data {:.2?}", t_build, t_data).map_err(w)?;
    writeln!(out, "wrote {}", output.display()).map_err(w)?;
    Ok(data)
}

/// Checks the data header against the resolved configuration.
pub fn check_header(cfg: &RunConfig, data: &ScatterData) -> Result<(), CliError> {
    let mismatch = |what: &str, file: String, conf: String| {
        Err(CliError::config(format!("data/config mismatch: {what} is {file} in the data but {conf} in the config")))
    };
    if data.kind != cfg.kind {
        return mismatch("medium.kind", format!("{:?}", data.kind), format!("{:?}", cfg.kind));
    }
    if data.regime != cfg.regime {
        return mismatch("acquisition.regime", regime_name(data.regime).into(), regime_name(cfg.regime).into());
    }
    if (data.k1 - cfg.k1).abs() > 1e-12 * cfg.k1 {
        return mismatch("medium.k1", data.k1.to_string(), cfg.k1.to_string());
    }
    if data.kind == BoundaryKind::Penetrable && (data.k2 - cfg.k2).abs() > 1e-12 * cfg.k2 {
        return mismatch("medium.k2", data.k2.to_string(), cfg.k2.to_string());
    }
    data.check_acquisition(&cfg.geometry()).map_err(|e| CliError::config(e.to_string()))
}

/// Result of an imaging run.
#[derive(Debug)]
pub struct ImageOutcome {
    pub grid: ImageGrid,
    pub summary: String,
}

/// Builds the background operator and evaluates the indicator for `data`.
pub fn image(cfg: &RunConfig, data: &ScatterData) -> Result<ImageOutcome, CliError> {
    check_header(cfg, data)?;
    let model = cfg.model()?;
    let g = cfg.geometry();
    let bg = model.operator(&SurfaceProfile::gamma_r(cfg.background_radius), required_coverage(&model, &g))?;
    let grid = cfg.grid()?;
    let img = indicator(data, &g, &bg, &grid)?;
    let summary = summarize(cfg, &img)?;
    Ok(ImageOutcome { grid: img, summary })
}

/// Global extremum and per-column localization against the configured surface.
pub fn summarize(cfg: &RunConfig, img: &ImageGrid) -> Result<String, CliError> {
    let which = Extremum::for_kind(cfg.kind);
    let pick = |a: f64, b: f64| match which {
        Extremum::Max => a > b,
        Extremum::Min => a < b,
    };
    let mut best = 0;
    for k in 1..img.values.len() {
        if pick(img.values[k], img.values[best]) {
            best = k;
        }
    }
    let p = img.point(best);
    let label = if which == Extremum::Max { "argmax" } else { "argmin" };
    let mut s = format!("{label} ({:.4}, {:.4}) value {:.6e}", p[0], p[1], img.values[best]);
    let profile = cfg.profile_shape()?;
    if profile.dip_radius().is_none() && profile.support_halfwidth > 0.0 {
        let tol = cfg.tolerance_wavelengths * 2.0 * std::f64::consts::PI / cfg.k1;
        let loc = column_localization(img, &profile, which, tol)?;
        s.push_str(&format!(
            "; column {label} within {tol:.3} of the surface: {}/{} ({:.1}%)",
            loc.hits,
            loc.columns,
            100.0 * loc.fraction()
        ));
    }
    Ok(s)
}

pub fn write_grid_file(g: &ImageGrid, path: &Path) -> Result<(), CliError> {
    save_grid(g, path).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn read_grid_file(path: &Path) -> Result<ImageGrid, CliError> {
    load_grid(path).map_err(|e| CliError::io(format!("cannot read grid {}: {e}", path.display())))
}

/// 16-bit PGM of `g`, with the optional surface drawn at full intensity.
pub fn render(g: &ImageGrid, overlay: Option<&SurfaceProfile>) -> Result<Vec<u8>, CliError> {
    normalize_image(g)?;
    let mut bytes = render_pgm(g)?;
    if let Some(profile) = overlay {
        let header = format!("P5\n{} {}\n65535\n", g.n1, g.n2).len();
        let extent = g.x1_range.0.abs().max(g.x1_range.1.abs());
        for p in surface_polyline(profile, extent)? {
            if let Some((i, j)) = pixel_of(g, p) {
                let row = g.n2 - 1 - j;
                let at = header + 2 * (row * g.n1 + i);
                bytes[at] = 0xff;
                bytes[at + 1] = 0xff;
            }
        }
    }
    Ok(bytes)
}

fn pixel_of(g: &ImageGrid, p: Point) -> Option<(usize, usize)> {
    let frac = |v: f64, (a, b): (f64, f64), n: usize| {
        if n == 1 {
            return Some(0);
        }
        let t = (v - a) / (b - a) * (n - 1) as f64;
        (t >= -0.5 && t <= n as f64 - 0.5).then(|| (t.round() as usize).min(n - 1))
    };
    Some((frac(p[0], g.x1_range, g.n1)?, frac(p[1], g.x2_range, g.n2)?))
}

pub fn write_bytes(bytes: &[u8], path: &Path) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Value and gradient of a background Green's function at `x` for a source at `y`.
pub fn greens(cfg: &RunConfig, flat: bool, x: Point, y: Point, out: &mut impl Write) -> Result<(), CliError> {
    let f = if flat {
        FlatGreen { kind: cfg.kind, k1: cfg.k1, k2: cfg.k2 }.fields(&[y], &[x])?[0][0]
    } else {
        let reach = x[0].abs().max(y[0].abs()).max(cfg.background_radius);
        let g = BackgroundGreen::new(&cfg.model()?, cfg.background_radius, reach)?;
        g.fields(&[y], &[x])?[0][0]
    };
    let name = if flat { "flat" } else { "gammaR" };
    writeln!(
        out,
        "{name} {:?} G(x, y) = {:+.12e} {:+.12e}i  grad = ({:+.6e} {:+.6e}i, {:+.6e} {:+.6e}i)",
        cfg.kind, f.value.re, f.value.im, f.grad[0].re, f.grad[0].im, f.grad[1].re, f.grad[1].im
    )
    .map_err(|e| CliError::io(format!("cannot write report: {e}")))
}
