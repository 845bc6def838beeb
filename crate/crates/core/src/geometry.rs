//! Surface profiles, curve discretization, acquisition layouts and sampling
//! grids.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, panel_rule, PANEL_ORDER};

pub type Point = [f64; 2];

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Height offset applied to the builtin profiles so that their flat level is
/// x2 = 0.
pub const BUILTIN_BASE_SHIFT: f64 = -0.5;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    F1,
    F2,
    F3,
    Flat,
    /// The flat line with a semicircular dip of the given radius.
    GammaRDip { radius: f64 },
    /// Piecewise-linear table of (x1, raw height) pairs, sorted by x1.
    Tabulated { x1: Vec<f64>, height: Vec<f64> },
}

/// A height function x2 = f(x1) that vanishes outside |x1| < A.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceProfile {
    pub kind: ProfileKind,
    pub base_shift: f64,
    pub support_halfwidth: f64,
}

impl SurfaceProfile {
    pub fn f1() -> Self {
        Self { kind: ProfileKind::F1, base_shift: BUILTIN_BASE_SHIFT, support_halfwidth: 4.0 }
    }

    pub fn f2() -> Self {
        Self { kind: ProfileKind::F2, base_shift: BUILTIN_BASE_SHIFT, support_halfwidth: 4.0 }
    }

    pub fn f3() -> Self {
        Self { kind: ProfileKind::F3, base_shift: BUILTIN_BASE_SHIFT, support_halfwidth: 4.0 }
    }

    pub fn flat(support_halfwidth: f64) -> Self {
        Self { kind: ProfileKind::Flat, base_shift: 0.0, support_halfwidth }
    }

    pub fn gamma_r(radius: f64) -> Self {
        Self { kind: ProfileKind::GammaRDip { radius }, base_shift: 0.0, support_halfwidth: radius }
    }

    pub fn tabulated(x1: Vec<f64>, height: Vec<f64>, base_shift: f64) -> Result<Self> {
        if x1.len() < 2 || x1.len() != height.len() {
            return Err(Error::Geometry("a profile table needs two equal columns of length >= 2".into()));
        }
        if x1.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Geometry("profile table x1 values must increase strictly".into()));
        }
        for &h in [height[0], height[height.len() - 1]].iter() {
            if (h + base_shift).abs() > 1e-12 {
                return Err(Error::Geometry(
                    "profile table must reach height 0 (after base shift) at both ends".into(),
                ));
            }
        }
        let a = x1[0].abs().max(x1[x1.len() - 1].abs());
        Ok(Self { kind: ProfileKind::Tabulated { x1, height }, base_shift, support_halfwidth: a })
    }

    /// Reads a two-column text table (x1, height); blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_table_file(path: &Path, base_shift: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut hs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Format(format!("profile table line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Format(format!("profile table line {}: bad number {s:?}", lineno + 1)))
            };
            xs.push(parse(cols[0])?);
            hs.push(parse(cols[1])?);
        }
        Self::tabulated(xs, hs, base_shift)
    }

    /// The radius of the dip for a Γ_R profile.
    pub fn dip_radius(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::GammaRDip { radius } => Some(radius),
            _ => None,
        }
    }

    /// Height f(x1), including the base shift.
    pub fn eval(&self, x1: f64) -> Result<f64> {
        let raw = match &self.kind {
            ProfileKind::F1 => 0.5 + f1_bump(x1).0,
            ProfileKind::F2 => 0.5 + f2_bump(x1).0,
            ProfileKind::F3 => {
                let a = x1.abs();
                if a <= 1.0 {
                    0.2
                } else if (3.0..=4.0).contains(&a) {
                    0.3
                } else {
                    0.5
                }
            }
            ProfileKind::Flat => 0.0,
            ProfileKind::GammaRDip { radius } => {
                if x1.abs() >= *radius {
                    0.0
                } else {
                    -(radius * radius - x1 * x1).sqrt()
                }
            }
            ProfileKind::Tabulated { x1: xs, height } => {
                if x1 < xs[0] || x1 > xs[xs.len() - 1] {
                    return Err(Error::Domain(format!(
                        "tabulated profile queried at x1 = {x1}, outside [{}, {}]",
                        xs[0],
                        xs[xs.len() - 1]
                    )));
                }
                let i = xs.partition_point(|&v| v <= x1).clamp(1, xs.len() - 1);
                let t = (x1 - xs[i - 1]) / (xs[i] - xs[i - 1]);
                height[i - 1] + t * (height[i] - height[i - 1])
            }
        };
        Ok(raw + self.base_shift)
    }

    /// Abscissae where the profile jumps.
    pub fn jump_points(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::F3 => vec![-4.0, -3.0, -1.0, 1.0, 3.0, 4.0],
            _ => Vec::new(),
        }
    }

    /// Whether `p` lies strictly above the surface.
    pub fn is_above(&self, p: Point) -> bool {
        let a = self.support_halfwidth;
        if p[0].abs() >= a && !matches!(self.kind, ProfileKind::Tabulated { .. }) {
            return p[1] > 0.0;
        }
        match &self.kind {
            ProfileKind::F3 => {
                // Both one-sided limits at a jump must lie below the point.
                let h = self.eval(p[0]).unwrap_or(0.0);
                let eps = 1e-12;
                let hl = self.eval(p[0] - eps).unwrap_or(0.0);
                let hr = self.eval(p[0] + eps).unwrap_or(0.0);
                p[1] > h.max(hl).max(hr)
            }
            ProfileKind::Tabulated { x1, .. } => {
                if p[0] < x1[0] || p[0] > x1[x1.len() - 1] {
                    p[1] > 0.0
                } else {
                    p[1] > self.eval(p[0]).unwrap_or(0.0)
                }
            }
            _ => p[1] > self.eval(p[0]).unwrap_or(0.0),
        }
    }

    /// Vertical distance-like margin of `p` above the surface; negative below.
    pub fn height_above(&self, p: Point) -> f64 {
        p[1] - self.eval(p[0].clamp(-1e300, 1e300)).unwrap_or(0.0)
    }

    /// Builds the curve pieces covering x1 ∈ [−extent, extent], traversed left
    /// to right.  Each returned flag says whether the start point of the piece
    /// is a corner.
    pub fn pieces(&self, extent: f64) -> Result<Vec<(Piece, bool)>> {
        let a = self.support_halfwidth;
        if extent < a {
            return Err(Error::Geometry(format!("curve extent {extent} smaller than support {a}")));
        }
        let line = |x0: f64, y0: f64, x1: f64, y1: f64| Piece::Line { from: [x0, y0], to: [x1, y1] };
        let mut out: Vec<(Piece, bool)> = Vec::new();
        match &self.kind {
            ProfileKind::Flat => out.push((line(-extent, 0.0, extent, 0.0), false)),
            ProfileKind::F1 | ProfileKind::F2 => {
                if extent > a {
                    out.push((line(-extent, 0.0, -a, 0.0), false));
                }
                let which = if self.kind == ProfileKind::F1 { GraphFn::F1 } else { GraphFn::F2 };
                out.push((Piece::Graph { f: which, x0: -a, x1: a, shift: 0.5 + self.base_shift }, false));
                if extent > a {
                    out.push((line(a, 0.0, extent, 0.0), false));
                }
            }
            ProfileKind::F3 => {
                // Levels between consecutive break points, sampled at midpoints.
                let mut breaks = vec![-extent];
                breaks.extend(self.jump_points());
                breaks.push(extent);
                breaks.dedup();
                let mut prev_level: Option<f64> = None;
                let mut corner_next = false;
                for w in breaks.windows(2) {
                    let (xa, xb) = (w[0], w[1]);
                    if xb - xa <= 0.0 {
                        continue;
                    }
                    let level = self.eval(0.5 * (xa + xb))?;
                    if let Some(pl) = prev_level {
                        if (pl - level).abs() > 0.0 {
                            out.push((line(xa, pl, xa, level), true));
                            corner_next = true;
                        }
                    }
                    out.push((line(xa, level, xb, level), corner_next));
                    corner_next = false;
                    prev_level = Some(level);
                }
            }
            ProfileKind::GammaRDip { radius } => {
                let r = *radius;
                if extent > r {
                    out.push((line(-extent, 0.0, -r, 0.0), false));
                }
                out.push((Piece::Arc { center: [0.0, 0.0], radius: r, theta0: PI, theta1: 2.0 * PI }, extent > r));
                if extent > r {
                    out.push((line(r, 0.0, extent, 0.0), true));
                }
            }
            ProfileKind::Tabulated { x1, height } => {
                let s = self.base_shift;
                if extent > -x1[0] && x1[0] > -extent {
                    out.push((line(-extent, 0.0, x1[0], 0.0), false));
                }
                for i in 0..x1.len() - 1 {
                    out.push((line(x1[i], height[i] + s, x1[i + 1], height[i + 1] + s), false));
                }
                let last = x1[x1.len() - 1];
                if extent > last {
                    out.push((line(last, 0.0, extent, 0.0), false));
                }
            }
        }
        Ok(out)
    }
}

/// f1 bump term and its derivative (zero for |x1| ≥ 4).
fn f1_bump(x: f64) -> (f64, f64) {
    if x.abs() >= 4.0 {
        return (0.0, 0.0);
    }
    let d = x * x - 16.0;
    let e = (16.0 / d).exp();
    let de = e * (-32.0 * x / (d * d));
    let w = 0.6 * PI;
    let s = (w * x).sin();
    (0.6 * s * e, 0.6 * (w * (w * x).cos() * e + s * de))
}

fn f1_bump_dd(x: f64) -> f64 {
    if x.abs() >= 4.0 {
        return 0.0;
    }
    let d = x * x - 16.0;
    let e = (16.0 / d).exp();
    let g = -32.0 * x / (d * d);
    let dg = -32.0 / (d * d) + 128.0 * x * x / (d * d * d);
    let de = e * g;
    let dde = e * (g * g + dg);
    let w = 0.6 * PI;
    let (s, c) = (w * x).sin_cos();
    0.6 * (-w * w * s * e + 2.0 * w * c * de + s * dde)
}

/// f2 bump term and its derivative (zero for |x1| ≥ 4).
fn f2_bump(x: f64) -> (f64, f64) {
    if x.abs() >= 4.0 {
        return (0.0, 0.0);
    }
    let d = x * x - 16.0;
    let e = (4.0 / d).exp();
    let de = e * (-8.0 * x / (d * d));
    let w = 3.0 * PI;
    let amp = 0.5 + 0.05 * (w * x).sin();
    (amp * e, 0.05 * w * (w * x).cos() * e + amp * de)
}

fn f2_bump_dd(x: f64) -> f64 {
    if x.abs() >= 4.0 {
        return 0.0;
    }
    let d = x * x - 16.0;
    let e = (4.0 / d).exp();
    let g = -8.0 * x / (d * d);
    let dg = -8.0 / (d * d) + 32.0 * x * x / (d * d * d);
    let de = e * g;
    let dde = e * (g * g + dg);
    let w = 3.0 * PI;
    let (s, c) = (w * x).sin_cos();
    let amp = 0.5 + 0.05 * s;
    -0.05 * w * w * s * e + 2.0 * 0.05 * w * c * de + amp * dde
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphFn {
    F1,
    F2,
}

/// A smooth parametrized piece of the curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    /// Straight segment, parameter t ∈ [0, 1].
    Line { from: Point, to: Point },
    /// Circular arc, parameter θ ∈ [theta0, theta1].
    Arc { center: Point, radius: f64, theta0: f64, theta1: f64 },
    /// Graph x2 = shift + bump(x1), parameter x1 ∈ [x0, x1].
    Graph { f: GraphFn, x0: f64, x1: f64, shift: f64 },
}

impl Piece {
    pub fn param_range(&self) -> (f64, f64) {
        match *self {
            Piece::Line { .. } => (0.0, 1.0),
            Piece::Arc { theta0, theta1, .. } => (theta0, theta1),
            Piece::Graph { x0, x1, .. } => (x0, x1),
        }
    }

    /// Position and parameter derivative at t.
    #[inline]
    pub fn eval(&self, t: f64) -> (Point, Point) {
        match *self {
            Piece::Line { from, to } => {
                let d = sub(to, from);
                ([from[0] + t * d[0], from[1] + t * d[1]], d)
            }
            Piece::Arc { center, radius, .. } => {
                let (s, c) = t.sin_cos();
                ([center[0] + radius * c, center[1] + radius * s], [-radius * s, radius * c])
            }
            Piece::Graph { f, shift, .. } => {
                let (h, dh) = match f {
                    GraphFn::F1 => f1_bump(t),
                    GraphFn::F2 => f2_bump(t),
                };
                ([t, shift + h], [1.0, dh])
            }
        }
    }

    /// Signed curvature at t (positive when the curve turns left).
    pub fn curvature(&self, t: f64) -> f64 {
        match *self {
            Piece::Line { .. } => 0.0,
            Piece::Arc { radius, .. } => 1.0 / radius,
            Piece::Graph { f, .. } => {
                let (dh, ddh) = match f {
                    GraphFn::F1 => (f1_bump(t).1, f1_bump_dd(t)),
                    GraphFn::F2 => (f2_bump(t).1, f2_bump_dd(t)),
                };
                ddh / (1.0 + dh * dh).powf(1.5)
            }
        }
    }

    /// Arclength between parameters a and b.
    pub fn arclength(&self, a: f64, b: f64) -> f64 {
        match *self {
            Piece::Line { from, to } => norm(sub(to, from)) * (b - a),
            Piece::Arc { radius, .. } => radius * (b - a),
            Piece::Graph { .. } => adaptive_length(self, a, b, 0),
        }
    }
}

fn gl_length(piece: &Piece, a: f64, b: f64) -> f64 {
    let rule = panel_rule();
    let h = 0.5 * (b - a);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * h * norm(piece.eval(a + h * (x + 1.0)).1))
        .sum()
}

fn adaptive_length(piece: &Piece, a: f64, b: f64, depth: u32) -> f64 {
    let whole = gl_length(piece, a, b);
    let m = 0.5 * (a + b);
    let halves = gl_length(piece, a, m) + gl_length(piece, m, b);
    if (whole - halves).abs() <= 1e-14 * halves.abs().max(1.0) || depth > 30 {
        halves
    } else {
        adaptive_length(piece, a, m, depth + 1) + adaptive_length(piece, m, b, depth + 1)
    }
}

/// One Gauss–Legendre panel of the discretized curve.
#[derive(Clone, Debug)]
pub struct Panel {
    pub piece: usize,
    pub t0: f64,
    pub t1: f64,
    /// Index of the first node of this panel in the curve arrays.
    pub first: usize,
    pub length: f64,
}

/// Nyström discretization of a truncated surface.
#[derive(Clone, Debug)]
pub struct DiscretizedCurve {
    pub pieces: Vec<Piece>,
    pub panels: Vec<Panel>,
    pub nodes: Vec<Point>,
    pub tangents: Vec<Point>,
    /// Unit normals pointing into the upper domain.
    pub normals: Vec<Point>,
    /// Arclength quadrature weights.
    pub weights: Vec<f64>,
    pub wing_halfwidth: f64,
    pub nodes_per_wavelength: f64,
    /// Curve endpoints in x1: nodes cover [−extent, extent].
    pub extent: f64,
}

/// Options controlling panel layout beyond the defaults.
#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    /// Number of dyadic refinement levels toward each corner.
    pub corner_levels: u32,
    /// Extra panels per radian of turning on curved pieces.
    pub panels_per_radian: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { corner_levels: 3, panels_per_radian: 1.0 }
    }
}

/// Discretizes `profile` over [−A−W, A+W] with mean node spacing at most
/// wavelength / `nodes_per_wavelength` (with κ the largest wavenumber in play).
pub fn discretize_surface(
    profile: &SurfaceProfile,
    kappa: f64,
    nodes_per_wavelength: f64,
    wing: f64,
) -> Result<DiscretizedCurve> {
    discretize_surface_with(profile, kappa, nodes_per_wavelength, wing, MeshOptions::default())
}

pub fn discretize_surface_with(
    profile: &SurfaceProfile,
    kappa: f64,
    nodes_per_wavelength: f64,
    wing: f64,
    opts: MeshOptions,
) -> Result<DiscretizedCurve> {
    if !(nodes_per_wavelength >= 6.0) {
        return Err(Error::Geometry(format!("nodes per wavelength {nodes_per_wavelength} below 6")));
    }
    if !(wing >= 0.0) {
        return Err(Error::Geometry(format!("wing half-width {wing} must be >= 0")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("wavenumber {kappa} must be positive")));
    }
    let extent = profile.support_halfwidth + wing;
    let pieces_flags = profile.pieces(extent)?;
    let wavelength = 2.0 * PI / kappa;
    let hmax = PANEL_ORDER as f64 * wavelength / nodes_per_wavelength;

    let n = pieces_flags.len();
    let mut pieces = Vec::with_capacity(n);
    let mut intervals: Vec<(usize, f64, f64)> = Vec::new();
    for (ip, (piece, start_corner)) in pieces_flags.iter().enumerate() {
        let end_corner = ip + 1 < n && pieces_flags[ip + 1].1;
        let (ta, tb) = piece.param_range();
        let mut cuts = uniform_cuts(piece, ta, tb, hmax, opts.panels_per_radian);
        if opts.corner_levels > 0 && cuts.len() >= 2 {
            let (first_inner, last_inner) = (cuts[1], cuts[cuts.len() - 2]);
            if *start_corner {
                let mut right = first_inner;
                for _ in 0..opts.corner_levels {
                    right = 0.5 * (ta + right);
                    cuts.push(right);
                }
            }
            if end_corner {
                let mut left = last_inner;
                for _ in 0..opts.corner_levels {
                    left = 0.5 * (left + tb);
                    cuts.push(left);
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
        }
        for w in cuts.windows(2) {
            intervals.push((ip, w[0], w[1]));
        }
        pieces.push(piece.clone());
    }

    let rule = panel_rule();
    let mut panels = Vec::with_capacity(intervals.len());
    let mut nodes = Vec::with_capacity(intervals.len() * PANEL_ORDER);
    let mut tangents = Vec::with_capacity(nodes.capacity());
    let mut normals = Vec::with_capacity(nodes.capacity());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (ip, t0, t1) in intervals {
        let piece = &pieces[ip];
        let h = 0.5 * (t1 - t0);
        let first = nodes.len();
        let mut length = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let (p, d) = piece.eval(t0 + h * (x + 1.0));
            let speed = norm(d);
            let tau = [d[0] / speed, d[1] / speed];
            nodes.push(p);
            tangents.push(tau);
            normals.push([-tau[1], tau[0]]);
            weights.push(w * h * speed);
            length += w * h * speed;
        }
        panels.push(Panel { piece: ip, t0, t1, first, length });
    }
    Ok(DiscretizedCurve {
        pieces,
        panels,
        nodes,
        tangents,
        normals,
        weights,
        wing_halfwidth: wing,
        nodes_per_wavelength,
        extent,
    })
}

/// Parameter cut points splitting a piece into panels of arclength ≤ hmax.
fn uniform_cuts(piece: &Piece, ta: f64, tb: f64, hmax: f64, per_radian: f64) -> Vec<f64> {
    let len = piece.arclength(ta, tb);
    let turning = match piece {
        Piece::Arc { theta0, theta1, .. } => (theta1 - theta0).abs(),
        Piece::Graph { .. } => total_turning(piece, ta, tb),
        Piece::Line { .. } => 0.0,
    };
    let m = ((len / hmax).ceil() as usize).max((turning * per_radian).ceil() as usize).max(1);
    match piece {
        Piece::Graph { .. } => {
            // Equal arclength panels.
            let targets: Vec<f64> = (0..=m).map(|i| len * i as f64 / m as f64).collect();
            let mut cuts = vec![ta];
            for &s in &targets[1..m] {
                cuts.push(invert_arclength(piece, ta, tb, s));
            }
            cuts.push(tb);
            cuts
        }
        _ => (0..=m).map(|i| ta + (tb - ta) * i as f64 / m as f64).collect(),
    }
}

fn total_turning(piece: &Piece, ta: f64, tb: f64) -> f64 {
    let (x, w) = gauss_legendre(64);
    let h = 0.5 * (tb - ta);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let t = ta + h * (xi + 1.0);
        s += wi * h * piece.curvature(t).abs() * norm(piece.eval(t).1);
    }
    s
}

fn invert_arclength(piece: &Piece, ta: f64, tb: f64, s: f64) -> f64 {
    let (mut lo, mut hi) = (ta, tb);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if piece.arclength(ta, mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + tb.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl DiscretizedCurve {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Position and unit normal at parameter t of panel `p`.
    #[inline]
    pub fn eval_panel(&self, p: &Panel, t: f64) -> (Point, Point, f64) {
        let (pt, d) = self.pieces[p.piece].eval(t);
        let speed = norm(d);
        (pt, [-d[1] / speed, d[0] / speed], speed)
    }

    /// Smallest distance from `x` to any node of panel `p`, plus that panel's
    /// endpoints.
    pub fn panel_distance(&self, p: &Panel, x: Point) -> f64 {
        let mut d = f64::INFINITY;
        for j in p.first..p.first + PANEL_ORDER {
            d = d.min(norm(sub(x, self.nodes[j])));
        }
        for t in [p.t0, p.t1] {
            d = d.min(norm(sub(x, self.pieces[p.piece].eval(t).0)));
        }
        d
    }
}

/// Near- or far-field acquisition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Near,
    Far,
}

/// Source/receiver aperture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aperture {
    UpperSemicircle,
    FullCircle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcquisitionGeometry {
    pub regime: Regime,
    pub aperture: Aperture,
    pub r_s: f64,
    pub r_r: f64,
    pub n_s: usize,
    pub n_r: usize,
    /// Radius of the background dip; near-regime circles must lie outside it.
    pub background_radius: f64,
}

/// Angles used on one circle.
pub fn acquisition_angles(aperture: Aperture, n: usize, radius: Option<f64>, background_radius: f64) -> Vec<f64> {
    match aperture {
        Aperture::UpperSemicircle => (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect(),
        Aperture::FullCircle => (0..n)
            .map(|k| 2.0 * PI * k as f64 / n as f64)
            .filter(|&t| match radius {
                // Points on the flat part of Γ_R lie at x2 = 0 with |x1| ≥ R.
                Some(r) => !(r * t.sin().abs() <= 1e-9 && r >= background_radius),
                None => true,
            })
            .collect(),
    }
}

/// Sources and receivers (points in the near regime, unit directions in the far
/// regime).
pub fn acquisition_points(g: &AcquisitionGeometry) -> Result<(Vec<Point>, Vec<Point>)> {
    if g.n_s < 2 || g.n_r < 2 {
        return Err(Error::Geometry("N_s and N_r must be at least 2".into()));
    }
    let ring = |n: usize, radius: f64, r_for_filter: Option<f64>| -> Vec<Point> {
        acquisition_angles(g.aperture, n, r_for_filter, g.background_radius)
            .into_iter()
            .map(|t| [radius * t.cos(), radius * t.sin()])
            .collect()
    };
    match g.regime {
        Regime::Near => {
            if g.r_s <= g.background_radius {
                return Err(Error::Geometry("sources inside background surface (R_s <= R)".into()));
            }
            if g.r_r < g.r_s {
                return Err(Error::Geometry("receiver radius must satisfy R_r >= R_s".into()));
            }
            Ok((ring(g.n_s, g.r_s, Some(g.r_s)), ring(g.n_r, g.r_r, Some(g.r_r))))
        }
        Regime::Far => {
            // Grazing directions carry no plane wave; drop them like points on Γ_R.
            let dirs = |n: usize| -> Vec<Point> {
                ring(n, 1.0, None).into_iter().filter(|d| d[1].abs() > 1e-9).collect()
            };
            Ok((dirs(g.n_s), dirs(g.n_r)))
        }
    }
}

/// A rectangular sampling grid with one real value per point, stored row-major
/// with x1 varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(x1_range: (f64, f64), x2_range: (f64, f64), n1: usize, n2: usize) -> Result<Self> {
        if n1 < 1 || n2 < 1 {
            return Err(Error::Geometry("grid resolution must be positive".into()));
        }
        if !(x1_range.1 >= x1_range.0) || !(x2_range.1 >= x2_range.0) {
            return Err(Error::Geometry("grid ranges must be ordered".into()));
        }
        Ok(Self { x1_range, x2_range, n1, n2, values: vec![0.0; n1 * n2] })
    }

    pub fn x1(&self, i: usize) -> f64 {
        if self.n1 == 1 {
            return self.x1_range.0;
        }
        self.x1_range.0 + (self.x1_range.1 - self.x1_range.0) * i as f64 / (self.n1 - 1) as f64
    }

    pub fn x2(&self, j: usize) -> f64 {
        if self.n2 == 1 {
            return self.x2_range.0;
        }
        self.x2_range.0 + (self.x2_range.1 - self.x2_range.0) * j as f64 / (self.n2 - 1) as f64
    }

    /// Grid point for flat index k = j·n1 + i.
    pub fn point(&self, k: usize) -> Point {
        [self.x1(k % self.n1), self.x2(k / self.n1)]
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.n1 * self.n2).map(|k| self.point(k)).collect()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n1 + i]
    }

    /// Checks that the grid lies inside the disc of radius `r` and above the dip.
    pub fn check_inside(&self, r: f64) -> Result<()> {
        for &x1 in &[self.x1_range.0, self.x1_range.1] {
            for &x2 in &[self.x2_range.0, self.x2_range.1] {
                if x1.hypot(x2) >= r {
                    return Err(Error::Geometry(format!("grid corner ({x1}, {x2}) outside B_{r}")));
                }
            }
        }
        Ok(())
    }
}

/// Smooth cutoff equal to 1 for |x| ≤ a and 0 for |x| ≥ b.
#[inline]
pub fn window(x: f64, a: f64, b: f64) -> f64 {
    let ax = x.abs();
    if ax <= a {
        1.0
    } else if ax >= b {
        0.0
    } else {
        let u = (ax - a) / (b - a);
        (2.0 * (-1.0 / u).exp() / (u - 1.0)).exp()
    }
}
