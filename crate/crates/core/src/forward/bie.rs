//! Nyström boundary integral operators on truncated, windowed surfaces.
//!
//! Sources on the curve are weighted by a smooth window equal to one on
//! |x1| ≤ plateau and vanishing at the curve ends.  Interactions between a
//! target and a nearby panel use product quadrature: the panel is subdivided
//! adaptively around the target and the density is interpolated from its
//! Gauss nodes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::BoundaryKind;
use crate::geometry::{discretize_surface_with, norm, window, DiscretizedCurve, MeshOptions, Point, SurfaceProfile};
use crate::greens::{halfplane_green_field, phi_field, planewave_background_impenetrable, planewave_penetrable_branch, FieldValue, HalfPlaneKind};
use crate::linalg::{CMat, DenseLu};
use crate::quadrature::{panel_rule, PANEL_ORDER};
use crate::specfun::{cylinder, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Panels closer than this multiple of their length get product quadrature.
const NEAR_FACTOR: f64 = 1.0;
/// Sub-interval accepted once its length is below this multiple of the
/// distance to the target.
const ACCEPT_RATIO: f64 = 1.2;
const MAX_DEPTH: u32 = 22;
/// Sub-intervals shorter than this fraction of their panel are not split
/// further; below it the double-layer kernel loses its digits to
/// cancellation in the normal component of x − y.
const MIN_FRACTION: f64 = 1e-6;

/// Discretization and truncation controls for a boundary operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BieOptions {
    pub nodes_per_wavelength: f64,
    pub corner_levels: u32,
    /// Half-width of the region where the window equals one.
    pub plateau: f64,
    /// Length of the smooth ramp from one to zero.
    pub ramp: f64,
    /// Coupling parameter of the combined-field Dirichlet formulation;
    /// κ1 when unset.
    pub eta: Option<f64>,
}

impl BieOptions {
    /// Options whose window plateau covers |x1| ≤ `coverage` plus two
    /// wavelengths, with a ten-wavelength ramp.
    pub fn covering(coverage: f64, wavelength: f64) -> Self {
        Self {
            nodes_per_wavelength: 10.0,
            corner_levels: 3,
            plateau: coverage + 2.0 * wavelength,
            ramp: 10.0 * wavelength,
            eta: None,
        }
    }
}

/// Reference field whose boundary data forms the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Incidence {
    /// Point source; for impenetrable surfaces the half-plane image Green's
    /// function is used as reference when the image lies below the surface.
    Point(Point),
    /// Point source with the free-space Green's function as reference.
    RawPoint(Point),
    /// Plane wave with direction d; reference is the flat-surface total field.
    Plane(Point),
}

/// A factorized Nyström system for one surface and boundary kind.
pub struct BoundaryOperator {
    pub profile: SurfaceProfile,
    pub curve: DiscretizedCurve,
    pub kind: BoundaryKind,
    pub k1: f64,
    pub k2: f64,
    pub eta: f64,
    pub options: BieOptions,
    /// Window value times quadrature weight at each node.
    pub source_weights: Vec<f64>,
    node_params: Vec<(usize, f64)>,
    /// Single-layer matrix, kept for the Neumann data map.
    single_layer: Option<CMat>,
    lu: DenseLu,
}

impl std::fmt::Debug for BoundaryOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryOperator")
            .field("kind", &self.kind)
            .field("k1", &self.k1)
            .field("k2", &self.k2)
            .field("nodes", &self.curve.len())
            .field("options", &self.options)
            .finish()
    }
}

/// Kernel quantities for one (target, source) pair at wavenumber κ.
#[derive(Clone, Copy)]
struct Pair {
    d: Point,
    r: f64,
}

#[inline]
fn pair(x: Point, y: Point) -> Pair {
    let d = [x[0] - y[0], x[1] - y[1]];
    Pair { d, r: d[0].hypot(d[1]) }
}

#[inline]
fn dotp(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Φ and f = (iκ/4)H1(κr)/r.
#[inline]
fn phi_f(k: f64, r: f64) -> (C64, C64) {
    let c = cylinder(k * r);
    let h0 = C64::new(c.j0, c.y0);
    let h1 = C64::new(c.j1, c.y1);
    (I * 0.25 * h0, I * (0.25 * k / r) * h1)
}

impl BoundaryOperator {
    /// Discretizes, assembles and factorizes the system for `profile`.
    pub fn new(profile: &SurfaceProfile, kind: BoundaryKind, k1: f64, k2: f64, options: BieOptions) -> Result<Self> {
        if !(k1 > 0.0) || (kind == BoundaryKind::Penetrable && !(k2 > 0.0)) {
            return Err(Error::Domain("wavenumbers must be positive".into()));
        }
        if !(options.ramp > 0.0) || !(options.plateau > 0.0) {
            return Err(Error::Domain("window plateau and ramp must be positive".into()));
        }
        let extent = options.plateau + options.ramp;
        let a = profile.support_halfwidth;
        if options.plateau < a {
            return Err(Error::Geometry(format!(
                "window plateau {} does not cover the surface perturbation |x1| <= {a}",
                options.plateau
            )));
        }
        let kmax = if kind == BoundaryKind::Penetrable { k1.max(k2) } else { k1 };
        let mesh = MeshOptions { corner_levels: options.corner_levels, ..MeshOptions::default() };
        let curve = discretize_surface_with(profile, kmax, options.nodes_per_wavelength, extent - a, mesh)?;
        let source_weights: Vec<f64> = curve
            .nodes
            .iter()
            .zip(&curve.weights)
            .map(|(p, w)| w * window(p[0], options.plateau, extent))
            .collect();
        let rule = panel_rule();
        let mut node_params = Vec::with_capacity(curve.len());
        for p in &curve.panels {
            let h = 0.5 * (p.t1 - p.t0);
            for x in &rule.nodes {
                node_params.push((p.piece, p.t0 + h * (x + 1.0)));
            }
        }
        let eta = options.eta.unwrap_or(k1);
        let k2 = if kind == BoundaryKind::Penetrable { k2 } else { k1 };
        let mut op = BoundaryOperator {
            profile: profile.clone(),
            curve,
            kind,
            k1,
            k2,
            eta,
            options,
            source_weights,
            node_params,
            single_layer: None,
            lu: DenseLu::placeholder(),
        };
        let (a, s) = op.assemble();
        op.lu = DenseLu::factor(&a)?;
        op.single_layer = s;
        Ok(op)
    }

    /// Length of a density vector: the Dirichlet layer density, the Neumann
    /// Cauchy data (trace then normal derivative of the scattered field), or
    /// the two penetrable densities (μ then λ).
    pub fn dim(&self) -> usize {
        match self.kind {
            BoundaryKind::Dirichlet => self.curve.len(),
            _ => 2 * self.curve.len(),
        }
    }

    /// Size of the linear system.
    pub fn system_dim(&self) -> usize {
        match self.kind {
            BoundaryKind::Penetrable => 2 * self.curve.len(),
            _ => self.curve.len(),
        }
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.lu.pivot_ratio
    }

    /// Adds product-quadrature or direct contributions of every panel to
    /// `out` (one entry per node) for target `x`.  `self_node` marks a target
    /// that is itself a node.
    fn accumulate<const M: usize>(
        &self,
        x: Point,
        self_node: Option<usize>,
        kern: &dyn Fn(Point, Point) -> [C64; M],
        out: &mut [[C64; M]],
    ) {
        let c = &self.curve;
        let rule = panel_rule();
        let extent = self.options.plateau + self.options.ramp;
        let mut lag = [0.0; PANEL_ORDER];
        let mut sub: Vec<(f64, f64)> = Vec::new();
        for (ip, p) in c.panels.iter().enumerate() {
            let own = self_node.map(|i| i / PANEL_ORDER == ip).unwrap_or(false);
            let near = own || c.panel_distance(p, x) < NEAR_FACTOR * p.length;
            if !near {
                for j in p.first..p.first + PANEL_ORDER {
                    let w = self.source_weights[j];
                    if w == 0.0 {
                        continue;
                    }
                    let v = kern(c.nodes[j], c.normals[j]);
                    for m in 0..M {
                        out[j][m] += v[m] * w;
                    }
                }
                continue;
            }
            sub.clear();
            if own {
                let ts = self.node_params[self_node.unwrap()].1;
                self.subdivide(p.piece, p.t0, ts, x, p.length, 0, &mut sub);
                self.subdivide(p.piece, ts, p.t1, x, p.length, 0, &mut sub);
            } else {
                self.subdivide(p.piece, p.t0, p.t1, x, p.length, 0, &mut sub);
            }
            let half = 0.5 * (p.t1 - p.t0);
            let mid = 0.5 * (p.t1 + p.t0);
            for &(ta, tb) in &sub {
                let h = 0.5 * (tb - ta);
                for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                    let t = ta + h * (u + 1.0);
                    let (y, ny, speed) = c.eval_panel(p, t);
                    let win = window(y[0], self.options.plateau, extent);
                    if win == 0.0 {
                        continue;
                    }
                    let v = kern(y, ny);
                    let w = wu * h * speed * win;
                    rule.lagrange((t - mid) / half, &mut lag);
                    for (jj, l) in lag.iter().enumerate() {
                        let lw = l * w;
                        let o = &mut out[p.first + jj];
                        for m in 0..M {
                            o[m] += v[m] * lw;
                        }
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn subdivide(&self, piece: usize, ta: f64, tb: f64, x: Point, panel_len: f64, depth: u32, out: &mut Vec<(f64, f64)>) {
        let pc = &self.curve.pieces[piece];
        let rule = panel_rule();
        let h = 0.5 * (tb - ta);
        let (pa, _) = pc.eval(ta);
        let (pb, _) = pc.eval(tb);
        let mut dist = norm([x[0] - pa[0], x[1] - pa[1]]).min(norm([x[0] - pb[0], x[1] - pb[1]]));
        let mut len = 0.0;
        for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
            let (y, dy) = pc.eval(ta + h * (u + 1.0));
            dist = dist.min(norm([x[0] - y[0], x[1] - y[1]]));
            len += wu * h.abs() * norm(dy);
        }
        if len > ACCEPT_RATIO * dist && len > MIN_FRACTION * panel_len && depth < MAX_DEPTH {
            let m = 0.5 * (ta + tb);
            self.subdivide(piece, ta, m, x, panel_len, depth + 1, out);
            self.subdivide(piece, m, tb, x, panel_len, depth + 1, out);
        } else {
            out.push((ta, tb));
        }
    }

    fn assemble(&self) -> (CMat, Option<CMat>) {
        let n = self.curve.len();
        let (k1, k2, eta) = (self.k1, self.k2, self.eta);
        match self.kind {
            BoundaryKind::Dirichlet => {
                let rows: Vec<Vec<[C64; 1]>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x = self.curve.nodes[i];
                        let kern = move |y: Point, ny: Point| -> [C64; 1] {
                            let p = pair(x, y);
                            let (phi, f) = phi_f(k1, p.r);
                            [f * dotp(p.d, ny) - I * eta * phi]
                        };
                        let mut row = vec![[ZERO]; n];
                        self.accumulate(x, Some(i), &kern, &mut row);
                        row
                    })
                    .collect();
                (CMat::from_fn(n, n, |i, j| rows[i][j][0] + if i == j { C64::new(0.5, 0.0) } else { ZERO }), None)
            }
            BoundaryKind::Neumann => {
                // Green's representation u = Dψ − Sχ, traced from above:
                // (½ − K)ψ = −Sχ.
                let rows: Vec<Vec<[C64; 2]>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x = self.curve.nodes[i];
                        let kern = move |y: Point, ny: Point| -> [C64; 2] {
                            let p = pair(x, y);
                            let (phi, f) = phi_f(k1, p.r);
                            [f * dotp(p.d, ny), phi]
                        };
                        let mut row = vec![[ZERO; 2]; n];
                        self.accumulate(x, Some(i), &kern, &mut row);
                        row
                    })
                    .collect();
                let a = CMat::from_fn(n, n, |i, j| if i == j { C64::new(0.5, 0.0) } else { ZERO } - rows[i][j][0]);
                let s = CMat::from_fn(n, n, |i, j| rows[i][j][1]);
                (a, Some(s))
            }
            BoundaryKind::Penetrable => {
                let rows: Vec<Vec<[C64; 4]>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x = self.curve.nodes[i];
                        let nx = self.curve.normals[i];
                        let kern = move |y: Point, ny: Point| -> [C64; 4] { transmission_kernels(k1, k2, x, nx, y, ny) };
                        let mut row = vec![[ZERO; 4]; n];
                        self.accumulate(x, Some(i), &kern, &mut row);
                        row
                    })
                    .collect();
                let a = CMat::from_fn(2 * n, 2 * n, |i, j| {
                    let (bi, ii) = (i / n, i % n);
                    let (bj, jj) = (j / n, j % n);
                    let v = rows[ii][jj][2 * bi + bj];
                    if i == j {
                        v + 1.0
                    } else {
                        v
                    }
                });
                (a, None)
            }
        }
    }

    /// Boundary data for a batch of incident fields (one column each): the
    /// Dirichlet trace of the scattered field, its Neumann normal derivative,
    /// or the two penetrable jumps.
    pub fn boundary_data(&self, inc: &[Incidence]) -> Result<CMat> {
        let n = self.curve.len();
        let cols: Vec<Vec<C64>> = inc
            .par_iter()
            .map(|&s| -> Result<Vec<C64>> {
                let mut col = vec![ZERO; self.system_dim()];
                for i in 0..n {
                    let x = self.curve.nodes[i];
                    let nx = self.curve.normals[i];
                    match self.kind {
                        BoundaryKind::Dirichlet | BoundaryKind::Neumann => {
                            let f = self.reference_field(s, x)?;
                            col[i] = if self.kind == BoundaryKind::Dirichlet { -f.value } else { -f.normal(nx) };
                        }
                        BoundaryKind::Penetrable => {
                            let (a1, a2) = self.penetrable_reference(s, x)?;
                            col[i] = -(a1.value - a2.value);
                            col[n + i] = -(a1.normal(nx) - a2.normal(nx));
                        }
                    }
                }
                Ok(col)
            })
            .collect::<Result<_>>()?;
        Ok(CMat::from_fn(self.system_dim(), inc.len(), |i, j| cols[j][i]))
    }

    /// Whether the image of `xs` in x2 = 0 lies below this surface with a
    /// margin of a tenth of a wavelength.
    pub fn image_admissible(&self, xs: Point) -> bool {
        let lam = 2.0 * std::f64::consts::PI / self.k1;
        let img = [xs[0], -xs[1]];
        xs[1] > 0.0 && self.distance_below(img) > 0.1 * lam
    }

    /// Positive depth of `p` below the surface (negative if above).
    fn distance_below(&self, p: Point) -> f64 {
        if self.profile.is_above(p) {
            return -1.0;
        }
        self.curve.nodes.iter().map(|y| norm([p[0] - y[0], p[1] - y[1]])).fold(f64::INFINITY, f64::min)
    }

    /// Reference field (impenetrable kinds) at x, with gradient.
    pub fn reference_field(&self, s: Incidence, x: Point) -> Result<FieldValue> {
        let hk = self.halfplane_kind()?;
        match s {
            Incidence::Point(xs) if self.image_admissible(xs) => halfplane_green_field(hk, self.k1, x, xs),
            Incidence::Point(xs) | Incidence::RawPoint(xs) => {
                if x == xs {
                    return Err(Error::Coincident);
                }
                Ok(phi_field(self.k1, x, xs))
            }
            Incidence::Plane(d) => planewave_background_impenetrable(hk, self.k1, x, d),
        }
    }

    /// Whether the reference of `s` is the flat-surface field (image or
    /// plane-wave background) rather than the free-space source.
    pub fn uses_flat_reference(&self, s: Incidence) -> bool {
        match (self.kind, s) {
            (BoundaryKind::Penetrable, Incidence::Plane(_)) => true,
            (BoundaryKind::Penetrable, _) => false,
            (_, Incidence::Point(xs)) => self.image_admissible(xs),
            (_, Incidence::RawPoint(_)) => false,
            (_, Incidence::Plane(_)) => true,
        }
    }

    /// Reference fields (a1 above, a2 below) of the penetrable formulation.
    pub fn penetrable_reference(&self, s: Incidence, x: Point) -> Result<(FieldValue, FieldValue)> {
        match s {
            Incidence::Point(xs) | Incidence::RawPoint(xs) => {
                if x == xs {
                    return Err(Error::Coincident);
                }
                if self.profile.is_above(xs) {
                    Ok((phi_field(self.k1, x, xs), FieldValue::ZERO))
                } else {
                    Ok((FieldValue::ZERO, phi_field(self.k2, x, xs)))
                }
            }
            Incidence::Plane(d) => {
                let up = planewave_penetrable_branch(self.k1, self.k2, x, d, true)?;
                let dn = planewave_penetrable_branch(self.k1, self.k2, x, d, false)?;
                Ok((up, dn))
            }
        }
    }

    /// Reference field at a point off the surface (in the medium it lies in).
    pub fn reference_at(&self, s: Incidence, x: Point) -> Result<FieldValue> {
        match self.kind {
            BoundaryKind::Penetrable => {
                let (a1, a2) = self.penetrable_reference(s, x)?;
                Ok(if self.profile.is_above(x) { a1 } else { a2 })
            }
            _ => self.reference_field(s, x),
        }
    }

    fn halfplane_kind(&self) -> Result<HalfPlaneKind> {
        match self.kind {
            BoundaryKind::Dirichlet => Ok(HalfPlaneKind::Dirichlet),
            BoundaryKind::Neumann => Ok(HalfPlaneKind::Neumann),
            BoundaryKind::Penetrable => Err(Error::Domain("no half-plane kind for a penetrable surface".into())),
        }
    }

    /// Densities (one column per column of `data`) for the boundary data
    /// layout of [`Self::boundary_data`].
    pub fn solve_data(&self, data: &CMat) -> CMat {
        assert_eq!(data.nrows(), self.system_dim(), "boundary data has the wrong length");
        match &self.single_layer {
            Some(s) => {
                let n = self.curve.len();
                let mut b = -(s * data);
                self.lu.solve_in_place(&mut b);
                CMat::from_fn(2 * n, data.ncols(), |i, j| if i < n { b[(i, j)] } else { data[(i - n, j)] })
            }
            None => {
                let mut b = data.clone();
                self.lu.solve_in_place(&mut b);
                b
            }
        }
    }

    /// Densities for a batch of incident fields.
    pub fn solve(&self, inc: &[Incidence]) -> Result<CMat> {
        Ok(self.solve_data(&self.boundary_data(inc)?))
    }

    /// Rebuilds the system matrix (for residual checks).
    pub fn matrix(&self) -> CMat {
        self.assemble().0
    }

    /// Coefficients mapping the densities to the scattered field and its
    /// gradient at `x` (off the surface): three rows (value, ∂1, ∂2), one
    /// column per unknown.
    pub fn potential_row(&self, x: Point) -> [Vec<C64>; 3] {
        let n = self.curve.len();
        let (k1, k2, eta) = (self.k1, self.k2, self.eta);
        match self.kind {
            BoundaryKind::Dirichlet => {
                let kern = move |y: Point, ny: Point| -> [C64; 3] {
                    let p = pair(x, y);
                    let (phi, f, fp) = phi_f_fp(k1, p.r);
                    let gphi = [-f * p.d[0], -f * p.d[1]];
                    let dn = dotp(p.d, ny);
                    let val = f * dn - I * eta * phi;
                    let g0 = fp * (p.d[0] / p.r) * dn + f * ny[0] - I * eta * gphi[0];
                    let g1 = fp * (p.d[1] / p.r) * dn + f * ny[1] - I * eta * gphi[1];
                    [val, g0, g1]
                };
                let mut acc = vec![[ZERO; 3]; n];
                self.accumulate(x, None, &kern, &mut acc);
                [
                    acc.iter().map(|a| a[0]).collect(),
                    acc.iter().map(|a| a[1]).collect(),
                    acc.iter().map(|a| a[2]).collect(),
                ]
            }
            BoundaryKind::Neumann | BoundaryKind::Penetrable => {
                let k = if self.kind == BoundaryKind::Neumann || self.profile.is_above(x) { k1 } else { k2 };
                let kern = move |y: Point, ny: Point| -> [C64; 6] {
                    let p = pair(x, y);
                    let (phi, f, fp) = phi_f_fp(k, p.r);
                    let dn = dotp(p.d, ny);
                    // u = Dμ − Sλ, or u = Dψ − Sχ
                    [
                        f * dn,
                        fp * (p.d[0] / p.r) * dn + f * ny[0],
                        fp * (p.d[1] / p.r) * dn + f * ny[1],
                        -phi,
                        f * p.d[0],
                        f * p.d[1],
                    ]
                };
                let mut acc = vec![[ZERO; 6]; n];
                self.accumulate(x, None, &kern, &mut acc);
                let mut rows = [vec![ZERO; 2 * n], vec![ZERO; 2 * n], vec![ZERO; 2 * n]];
                for j in 0..n {
                    for r in 0..3 {
                        rows[r][j] = acc[j][r];
                        rows[r][n + j] = acc[j][3 + r];
                    }
                }
                rows
            }
        }
    }

    /// Matrix (points × unknowns) giving the scattered field at `points`.
    pub fn potential_matrix(&self, points: &[Point]) -> CMat {
        let rows: Vec<Vec<C64>> = points.par_iter().map(|&x| self.value_row(x)).collect();
        CMat::from_fn(points.len(), self.dim(), |i, j| rows[i][j])
    }

    /// Value-only version of [`Self::potential_row`].
    pub fn value_row(&self, x: Point) -> Vec<C64> {
        let n = self.curve.len();
        let (k1, k2, eta) = (self.k1, self.k2, self.eta);
        match self.kind {
            BoundaryKind::Dirichlet => {
                let kern = move |y: Point, ny: Point| -> [C64; 1] {
                    let p = pair(x, y);
                    let (phi, f) = phi_f(k1, p.r);
                    [f * dotp(p.d, ny) - I * eta * phi]
                };
                let mut acc = vec![[ZERO; 1]; n];
                self.accumulate(x, None, &kern, &mut acc);
                acc.into_iter().map(|a| a[0]).collect()
            }
            BoundaryKind::Neumann | BoundaryKind::Penetrable => {
                let k = if self.kind == BoundaryKind::Neumann || self.profile.is_above(x) { k1 } else { k2 };
                let kern = move |y: Point, ny: Point| -> [C64; 2] {
                    let p = pair(x, y);
                    let (phi, f) = phi_f(k, p.r);
                    [f * dotp(p.d, ny), -phi]
                };
                let mut acc = vec![[ZERO; 2]; n];
                self.accumulate(x, None, &kern, &mut acc);
                let mut row = vec![ZERO; 2 * n];
                for j in 0..n {
                    row[j] = acc[j][0];
                    row[n + j] = acc[j][1];
                }
                row
            }
        }
    }

    /// Scattered field (value and gradient) at one point for one density.
    pub fn scattered_at(&self, x: Point, density: &[C64]) -> FieldValue {
        let rows = self.potential_row(x);
        let dotc = |r: &Vec<C64>| r.iter().zip(density).fold(ZERO, |s, (a, b)| s + a * b);
        FieldValue { value: dotc(&rows[0]), grad: [dotc(&rows[1]), dotc(&rows[2])] }
    }
}

impl DenseLu {
    fn placeholder() -> Self {
        DenseLu::factor(&CMat::from_fn(1, 1, |_, _| C64::new(1.0, 0.0))).expect("1x1 identity factorizes")
    }
}

/// Φ, f = (iκ/4)H1(κr)/r and f′(r).
#[inline]
fn phi_f_fp(k: f64, r: f64) -> (C64, C64, C64) {
    let c = cylinder(k * r);
    let h0 = C64::new(c.j0, c.y0);
    let h1 = C64::new(c.j1, c.y1);
    let f = I * (0.25 * k / r) * h1;
    let fp = I * (0.25 * k * k / r) * h0 - f * (2.0 / r);
    (I * 0.25 * h0, f, fp)
}

/// The four kernel differences of the transmission system, ordered
/// (K1−K2, −(S1−S2), T1−T2, −(K1′−K2′)).
#[inline]
fn transmission_kernels(k1: f64, k2: f64, x: Point, nx: Point, y: Point, ny: Point) -> [C64; 4] {
    let p = pair(x, y);
    let r = p.r;
    let c1 = cylinder(k1 * r);
    let c2 = cylinder(k2 * r);
    let phi1 = I * 0.25 * C64::new(c1.j0, c1.y0);
    let phi2 = I * 0.25 * C64::new(c2.j0, c2.y0);
    // f̃_j = f_j − 1/(2πr²) = (iκ_j/(4r))·(H1 + 2i/(πκ_j r))
    let ft1 = I * (0.25 * k1 / r) * C64::new(c1.j1, c1.y1_reg);
    let ft2 = I * (0.25 * k2 / r) * C64::new(c2.j1, c2.y1_reg);
    let fpt1 = I * (0.25 * k1 * k1 / r) * C64::new(c1.j0, c1.y0) - ft1 * (2.0 / r);
    let fpt2 = I * (0.25 * k2 * k2 / r) * C64::new(c2.j0, c2.y0) - ft2 * (2.0 / r);
    let df = ft1 - ft2;
    let dfp = fpt1 - fpt2;
    let dny = dotp(p.d, ny);
    let dnx = dotp(p.d, nx);
    [df * dny, -(phi1 - phi2), dfp * dnx * dny / r + df * dotp(nx, ny), df * dnx]
}
