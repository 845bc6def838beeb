//! Numerical checks of the identities the imaging functional rests on: the
//! Helmholtz–Kirchhoff identity for the Γ_R Green's functions, decay of the
//! remainder ζ with the acquisition radius, reciprocity and mixed
//! reciprocity.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::bie::{BoundaryOperator, Incidence};
use crate::forward::collector::{flat_total_field, Collector};
use crate::forward::{BoundaryKind, ForwardModel};
use crate::geometry::{Point, SurfaceProfile};
use crate::greens::{
    far_field_constant, halfplane_green_field, twolayer_flat_green_field, FieldValue, HalfPlaneKind, TwoLayerMedium,
};
use crate::linalg::CMat;
use crate::specfun::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

pub const HELMHOLTZ_KIRCHHOFF_THRESHOLD: f64 = 1e-3;
pub const SLOPE_TOLERANCE: f64 = 0.5;

pub fn reciprocity_threshold(kind: BoundaryKind) -> f64 {
    if kind == BoundaryKind::Penetrable {
        1e-3
    } else {
        1e-4
    }
}

pub fn mixed_reciprocity_threshold(kind: BoundaryKind) -> f64 {
    if kind == BoundaryKind::Penetrable {
        3e-2
    } else {
        1e-2
    }
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub kind: Option<BoundaryKind>,
    pub residual: f64,
    pub threshold: f64,
    pub samples: usize,
    pub parameters: Vec<(String, f64)>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(
        name: &str,
        kind: Option<BoundaryKind>,
        residual: f64,
        threshold: f64,
        samples: usize,
        parameters: Vec<(String, f64)>,
    ) -> Self {
        Self { name: name.to_string(), kind, residual, threshold, samples, parameters, pass: residual <= threshold }
    }

    /// `name kind residual threshold PASS|FAIL` on one line.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {} {:.3e} {:.3e} {}",
            self.name,
            self.kind.map(|k| k.letter()).unwrap_or('-'),
            self.residual,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Fixed-width table of reports followed by the parameters of each row.
pub fn report_table(reports: &[IdentityReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:>4} {:>11} {:>11} {:>8}  result", "identity", "kind", "residual", "threshold", "samples");
    for r in reports {
        let _ = writeln!(
            s,
            "{:<22} {:>4} {:>11.3e} {:>11.3e} {:>8}  {}",
            r.name,
            r.kind.map(|k| k.letter()).unwrap_or('-'),
            r.residual,
            r.threshold,
            r.samples,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    for r in reports.iter().filter(|r| !r.parameters.is_empty()) {
        let p: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "  {} [{}]: {}", r.name, r.kind.map(|k| k.letter()).unwrap_or('-'), p.join(" "));
    }
    s
}

/// A Green's function G(ξ, y) of one background, evaluated in batches.
pub trait GreenFunction: Sync {
    fn kind(&self) -> BoundaryKind;
    /// (κ1, κ2); κ2 = κ1 for impenetrable kinds.
    fn wavenumbers(&self) -> (f64, f64);
    /// Radius of the dip (0 for the flat plane).
    fn dip_radius(&self) -> f64;
    /// Whether `p` belongs to the medium on which G is defined.
    fn admits(&self, p: Point) -> bool;
    /// Values and gradients G(ξ, y) for every source y (outer index) and
    /// target ξ (inner index).
    fn fields(&self, sources: &[Point], targets: &[Point]) -> Result<Vec<Vec<FieldValue>>>;

    /// κ(ξ): κ1 in the upper medium, κ2 below.
    fn wavenumber_at(&self, p: Point) -> f64;
}

/// Closed-form Green's functions of the flat plane Γ_0.
#[derive(Clone, Copy, Debug)]
pub struct FlatGreen {
    pub kind: BoundaryKind,
    pub k1: f64,
    pub k2: f64,
}

impl GreenFunction for FlatGreen {
    fn kind(&self) -> BoundaryKind {
        self.kind
    }
    fn wavenumbers(&self) -> (f64, f64) {
        (self.k1, if self.kind == BoundaryKind::Penetrable { self.k2 } else { self.k1 })
    }
    fn dip_radius(&self) -> f64 {
        0.0
    }
    fn admits(&self, p: Point) -> bool {
        self.kind == BoundaryKind::Penetrable || p[1] > 0.0
    }
    fn wavenumber_at(&self, p: Point) -> f64 {
        if self.kind == BoundaryKind::Penetrable && p[1] < 0.0 {
            self.k2
        } else {
            self.k1
        }
    }
    fn fields(&self, sources: &[Point], targets: &[Point]) -> Result<Vec<Vec<FieldValue>>> {
        let medium = TwoLayerMedium::new(self.k1, self.k2)?;
        sources
            .par_iter()
            .map(|&y| {
                targets
                    .iter()
                    .map(|&x| match self.kind {
                        BoundaryKind::Dirichlet => halfplane_green_field(HalfPlaneKind::Dirichlet, self.k1, x, y),
                        BoundaryKind::Neumann => halfplane_green_field(HalfPlaneKind::Neumann, self.k1, x, y),
                        BoundaryKind::Penetrable => twolayer_flat_green_field(&medium, x, y),
                    })
                    .collect()
            })
            .collect()
    }
}

/// The Γ_R Green's functions G_D, G_N, G_P from a factorized boundary
/// operator on the dipped surface.
#[derive(Debug)]
pub struct BackgroundGreen {
    op: BoundaryOperator,
}

impl BackgroundGreen {
    /// Operator for the dip of radius `dip_radius`, accurate for |ξ1| up to
    /// `coverage`.
    pub fn new(model: &ForwardModel, dip_radius: f64, coverage: f64) -> Result<Self> {
        let profile = SurfaceProfile::gamma_r(dip_radius);
        Ok(Self { op: model.operator(&profile, coverage)? })
    }

    pub fn from_operator(op: BoundaryOperator) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> &BoundaryOperator {
        &self.op
    }

    /// G(x, y) from a solve for the single source y.
    pub fn value(&self, x: Point, y: Point) -> Result<C64> {
        Ok(self.fields(&[y], &[x])?[0][0].value)
    }

    fn check_target(&self, x: Point) -> Result<()> {
        if x[0].abs() > self.op.options.plateau {
            return Err(Error::Domain(format!("point {x:?} lies outside the accurate region of the operator")));
        }
        if !self.admits(x) {
            return Err(Error::Domain(format!("point {x:?} is not in the medium of the background")));
        }
        Ok(())
    }
}

impl GreenFunction for BackgroundGreen {
    fn kind(&self) -> BoundaryKind {
        self.op.kind
    }
    fn wavenumbers(&self) -> (f64, f64) {
        (self.op.k1, self.op.k2)
    }
    fn dip_radius(&self) -> f64 {
        self.op.profile.dip_radius().unwrap_or(0.0)
    }
    fn admits(&self, p: Point) -> bool {
        match self.op.kind {
            BoundaryKind::Penetrable => self.op.profile.height_above(p) != 0.0,
            _ => self.op.profile.is_above(p),
        }
    }
    fn wavenumber_at(&self, p: Point) -> f64 {
        if self.op.kind == BoundaryKind::Penetrable && !self.op.profile.is_above(p) {
            self.op.k2
        } else {
            self.op.k1
        }
    }
    fn fields(&self, sources: &[Point], targets: &[Point]) -> Result<Vec<Vec<FieldValue>>> {
        for &p in sources.iter().chain(targets) {
            self.check_target(p)?;
        }
        let inc: Vec<Incidence> = sources.iter().map(|&y| Incidence::Point(y)).collect();
        let dens = self.op.solve(&inc)?;
        let rows: Vec<Vec<FieldValue>> = targets
            .par_iter()
            .map(|&x| -> Result<Vec<FieldValue>> {
                let [v, g0, g1] = self.op.potential_row(x);
                inc.iter()
                    .enumerate()
                    .map(|(j, &s)| {
                        let mut f = self.op.reference_at(s, x)?;
                        for q in 0..v.len() {
                            let d = dens[(q, j)];
                            f.value += v[q] * d;
                            f.grad[0] += g0[q] * d;
                            f.grad[1] += g1[q] * d;
                        }
                        Ok(f)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok((0..sources.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
    }
}

/// Quadrature on the test circle of radius ρ: midpoint rule in angle on the
/// upper semicircle (impenetrable) or on each half of the full circle
/// (penetrable), so no node lies on x2 = 0.
pub fn test_circle(kind: BoundaryKind, rho: f64, m: usize) -> (Vec<Point>, Vec<Point>, Vec<f64>) {
    let (span, count) = if kind == BoundaryKind::Penetrable { (2.0 * PI, 2 * m.div_ceil(2)) } else { (PI, m) };
    let h = span / count as f64;
    let mut pts = Vec::with_capacity(count);
    let mut nrm = Vec::with_capacity(count);
    for k in 0..count {
        let t = h * (k as f64 + 0.5);
        let n = [t.cos(), t.sin()];
        pts.push([rho * n[0], rho * n[1]]);
        nrm.push(n);
    }
    (pts, nrm, vec![h * rho; count])
}

/// Deterministic pseudo-random point pairs in the box `x1 × x2`.
pub fn sample_pairs(count: usize, seed: u64, x1: (f64, f64), x2: (f64, f64)) -> Vec<(Point, Point)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut uniform = |a: f64, b: f64| a + (b - a) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (0..count)
        .map(|_| {
            let x = [uniform(x1.0, x1.1), uniform(x2.0, x2.1)];
            let z = [uniform(x1.0, x1.1), uniform(x2.0, x2.1)];
            (x, z)
        })
        .collect()
}

/// Cell centres of an n1 × n2 partition of the box `x1 × x2`.
pub fn cell_centres(n1: usize, n2: usize, x1: (f64, f64), x2: (f64, f64)) -> Vec<Point> {
    let mut out = Vec::with_capacity(n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            out.push([
                x1.0 + (x1.1 - x1.0) * (i as f64 + 0.5) / n1 as f64,
                x2.0 + (x2.1 - x2.0) * (j as f64 + 0.5) / n2 as f64,
            ]);
        }
    }
    out
}

fn unique_points(pairs: &[(Point, Point)]) -> (Vec<Point>, Vec<(usize, usize)>) {
    let mut pts: Vec<Point> = Vec::new();
    let index = |p: Point, pts: &mut Vec<Point>| match pts.iter().position(|q| *q == p) {
        Some(i) => i,
        None => {
            pts.push(p);
            pts.len() - 1
        }
    };
    let idx = pairs.iter().map(|&(x, z)| (index(x, &mut pts), index(z, &mut pts))).collect();
    (pts, idx)
}

/// G(p_i; source p_j) for all i ≠ j; the diagonal is left at zero.
fn mutual_values(g: &dyn GreenFunction, pts: &[Point]) -> Result<Vec<Vec<C64>>> {
    let mut out = vec![vec![ZERO; pts.len()]; pts.len()];
    for (j, &y) in pts.iter().enumerate() {
        let others: Vec<Point> = pts.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &p)| p).collect();
        let f = g.fields(&[y], &others)?;
        let mut it = f[0].iter();
        for i in (0..pts.len()).filter(|&i| i != j) {
            out[i][j] = it.next().expect("one value per target").value;
        }
    }
    Ok(out)
}

fn check_radius(g: &dyn GreenFunction, rho: f64) -> Result<()> {
    if !(rho > g.dip_radius()) {
        return Err(Error::Domain(format!("test radius {rho} must exceed the dip radius {}", g.dip_radius())));
    }
    Ok(())
}

/// Helmholtz–Kirchhoff identity on the circle of radius ρ:
/// ∫ (conj G(ξ,x) ∂_ν G(ξ,z) − ∂_ν conj G(ξ,x) G(ξ,z)) ds = 2i Im G(x,z).
///
/// G(x,z) on the right is the mean of the two solves G(x;z) and G(z;x), so a
/// swapped pair gives the same residual.  The residual is the largest
/// mismatch over the pairs divided by the largest |2 Im G(x,z)|.
pub fn check_helmholtz_kirchhoff(
    g: &dyn GreenFunction,
    rho: f64,
    m: usize,
    pairs: &[(Point, Point)],
    threshold: f64,
) -> Result<IdentityReport> {
    check_radius(g, rho)?;
    if pairs.is_empty() || m < 2 {
        return Err(Error::Domain("need at least one pair and two quadrature points".into()));
    }
    for &(x, z) in pairs {
        if x == z || x[0].hypot(x[1]) >= rho || z[0].hypot(z[1]) >= rho || !g.admits(x) || !g.admits(z) {
            return Err(Error::Domain(format!("pair {x:?}, {z:?} must be distinct points of the medium inside B_ρ")));
        }
    }
    let kind = g.kind();
    let (pts, idx) = unique_points(pairs);
    let (circle, normals, weights) = test_circle(kind, rho, m);
    let on_circle = g.fields(&pts, &circle)?;
    let mutual = mutual_values(g, &pts)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &(a, b) in &idx {
        let mut lhs = ZERO;
        for q in 0..circle.len() {
            let u = on_circle[a][q];
            let v = on_circle[b][q];
            let dn_u = u.normal(normals[q]);
            let dn_v = v.normal(normals[q]);
            lhs += (u.value.conj() * dn_v - dn_u.conj() * v.value) * weights[q];
        }
        let gxz = (mutual[a][b] + mutual[b][a]) * 0.5;
        let rhs = I * (2.0 * gxz.im);
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    let (k1, _) = g.wavenumbers();
    Ok(IdentityReport::new(
        "helmholtz-kirchhoff",
        Some(kind),
        residual,
        threshold,
        pairs.len(),
        vec![("rho".into(), rho), ("M".into(), circle.len() as f64), ("k1".into(), k1), ("R".into(), g.dip_radius())],
    ))
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Measured remainders for one set of radii.
#[derive(Clone, Debug, PartialEq)]
pub struct RemainderDecay {
    pub radii: Vec<f64>,
    /// max |ζ(x,z)| over distinct sample pairs, per radius.
    pub max_remainder: Vec<f64>,
    /// max |∇_x ζ(x,z)| over the gradient probes, per radius.
    pub max_gradient: Vec<f64>,
    pub slope: f64,
    pub gradient_slope: f64,
}

/// Number of sample points at which ∇_x ζ is probed.
const GRADIENT_PROBES: usize = 5;
const GRADIENT_STEP: f64 = 1e-3;

/// ζ(x,z) = κ∫ conj G(x,ξ) G(ξ,z) ds − Im G(x,z) over the acquisition
/// circle (κ(ξ) inside the integral for the penetrable kind), for every
/// radius and every ordered pair of distinct sample points.
pub fn remainder_decay(g: &dyn GreenFunction, radii: &[f64], m: usize, samples: &[Point]) -> Result<RemainderDecay> {
    if radii.len() < 3 {
        return Err(Error::Domain("remainder decay needs at least three radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("radii must be increasing".into()));
    }
    check_radius(g, radii[0])?;
    if samples.len() < 2 {
        return Err(Error::Domain("need at least two sample points".into()));
    }
    for &p in samples {
        if !g.admits(p) || p[0].hypot(p[1]) >= radii[0] {
            return Err(Error::Domain(format!("sample point {p:?} must lie in the medium inside every circle")));
        }
    }
    let kind = g.kind();

    let probes: Vec<usize> = (0..GRADIENT_PROBES).map(|i| i * samples.len() / GRADIENT_PROBES).collect();
    let mut pts = samples.to_vec();
    for &p in &probes {
        let x = samples[p];
        for off in [[GRADIENT_STEP, 0.0], [-GRADIENT_STEP, 0.0], [0.0, GRADIENT_STEP], [0.0, -GRADIENT_STEP]] {
            pts.push([x[0] + off[0], x[1] + off[1]]);
        }
    }
    let ns = samples.len();
    let mutual = mutual_values(g, &pts)?;
    let im_g = |a: usize, b: usize| 0.5 * (mutual[a][b].im + mutual[b][a].im);

    let mut max_remainder = Vec::with_capacity(radii.len());
    let mut max_gradient = Vec::with_capacity(radii.len());
    for &rho in radii {
        let (circle, _, weights) = test_circle(kind, rho, m);
        let f = g.fields(&pts, &circle)?;
        let kw: Vec<f64> =
            circle.iter().zip(&weights).map(|(&p, w)| w * g.wavenumber_at(p)).collect();
        let integral = |a: usize, b: usize| -> C64 {
            let mut s = ZERO;
            for q in 0..circle.len() {
                s += f[a][q].value.conj() * f[b][q].value * kw[q];
            }
            s
        };
        let zeta = |a: usize, b: usize| integral(a, b) - im_g(a, b);
        let mut worst = 0.0f64;
        for a in 0..ns {
            for b in 0..ns {
                if a != b {
                    worst = worst.max(zeta(a, b).norm());
                }
            }
        }
        let mut worst_grad = 0.0f64;
        for (t, &p) in probes.iter().enumerate() {
            let base = ns + 4 * t;
            for b in (0..ns).filter(|&b| b != p) {
                let d1 = (zeta(base, b) - zeta(base + 1, b)) / (2.0 * GRADIENT_STEP);
                let d2 = (zeta(base + 2, b) - zeta(base + 3, b)) / (2.0 * GRADIENT_STEP);
                worst_grad = worst_grad.max((d1.norm_sqr() + d2.norm_sqr()).sqrt());
            }
        }
        max_remainder.push(worst);
        max_gradient.push(worst_grad);
    }
    let slope = loglog_slope(radii, &max_remainder);
    let gradient_slope = loglog_slope(radii, &max_gradient);
    Ok(RemainderDecay { radii: radii.to_vec(), max_remainder, max_gradient, slope, gradient_slope })
}

/// Remainder-decay check: impenetrable kinds pass when the fitted slope lies
/// within [`SLOPE_TOLERANCE`] of −1; the penetrable kind passes when max|ζ|
/// decreases strictly from each radius to the next (the residual is then the
/// largest ratio of consecutive values).
pub fn check_remainder_decay(g: &dyn GreenFunction, radii: &[f64], m: usize, samples: &[Point]) -> Result<IdentityReport> {
    let d = remainder_decay(g, radii, m, samples)?;
    let kind = g.kind();
    let (residual, threshold) = if kind == BoundaryKind::Penetrable {
        let ratio = d.max_remainder.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
        (ratio, 1.0 - f64::EPSILON)
    } else {
        ((d.slope + 1.0).abs(), SLOPE_TOLERANCE)
    };
    let mut params: Vec<(String, f64)> = vec![("slope".into(), d.slope), ("gradient_slope".into(), d.gradient_slope)];
    for (r, z) in d.radii.iter().zip(&d.max_remainder) {
        params.push((format!("zeta@{r}"), *z));
    }
    params.push(("M".into(), m as f64));
    let n = samples.len();
    Ok(IdentityReport::new("remainder-decay", Some(kind), residual, threshold, n * (n - 1), params))
}

/// Reciprocity G(x,z) = G(z,x) for any evaluator; each call is an
/// independent evaluation.  Residual: max |G(x,z) − G(z,x)| / max(|G(x,z)|, ε)
/// over the pairs.
pub fn check_reciprocity<F>(
    kind: Option<BoundaryKind>,
    pairs: &[(Point, Point)],
    threshold: f64,
    evaluator: F,
) -> Result<IdentityReport>
where
    F: Fn(Point, Point) -> Result<C64>,
{
    let mut residual = 0.0f64;
    for &(x, z) in pairs {
        let a = evaluator(x, z)?;
        let b = evaluator(z, x)?;
        residual = residual.max((a - b).norm() / a.norm().max(f64::MIN_POSITIVE));
    }
    Ok(IdentityReport::new("reciprocity", kind, residual, threshold, pairs.len(), Vec::new()))
}

/// Both sides of the mixed reciprocity relation v^∞(x̂, x_s) = γ w^s(x_s, −x̂)
/// (rows: directions, columns: sources).
#[derive(Clone, Debug)]
pub struct MixedReciprocity {
    pub far_field: CMat,
    pub plane_wave: CMat,
}

impl MixedReciprocity {
    /// max |v^∞ − γ w^s| / max |γ w^s| (0 when both sides vanish).
    pub fn mismatch(&self) -> f64 {
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..self.far_field.nrows() {
            for j in 0..self.far_field.ncols() {
                num = num.max((self.far_field[(i, j)] - self.plane_wave[(i, j)]).norm());
                den = den.max(self.plane_wave[(i, j)].norm());
            }
        }
        num / den.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates both sides of the mixed reciprocity relation for the surface
/// `profile`.  The far field of the point-source scattered field (relative
/// to the flat surface) comes from its Cauchy data on a circle; the
/// plane-wave scattered field is evaluated directly at the sources.
pub fn mixed_reciprocity(
    model: &ForwardModel,
    profile: &SurfaceProfile,
    sources: &[Point],
    directions: &[Point],
) -> Result<MixedReciprocity> {
    let lam = model.wavelength();
    let reach = sources.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    let op = model.operator(profile, reach)?;
    for &xs in sources {
        let ok = match model.kind {
            BoundaryKind::Penetrable => outside_contrast(profile, xs),
            _ => op.image_admissible(xs),
        };
        if !ok {
            return Err(Error::Domain(format!(
                "source {xs:?} violates the hypotheses of mixed reciprocity for this surface"
            )));
        }
    }
    for d in directions {
        if model.kind != BoundaryKind::Penetrable && !(d[1] > 0.0) {
            return Err(Error::Domain(format!("direction {d:?} must point upward for an impenetrable surface")));
        }
    }
    let collector = Collector::new(&op, model.collection_radius(profile.support_halfwidth).max(lam))?;
    let inc: Vec<Incidence> = sources.iter().map(|&p| Incidence::Point(p)).collect();
    let dens = op.solve(&inc)?;
    let cauchy = collector.cauchy_data(&op, &inc, &dens)?;
    let far_field = collector.far_field(directions, &cauchy)?;

    let planes: Vec<Incidence> = directions.iter().map(|d| Incidence::Plane([-d[0], -d[1]])).collect();
    let pdens = op.solve(&planes)?;
    let cols: Vec<Vec<C64>> = sources
        .par_iter()
        .map(|&xs| -> Result<Vec<C64>> {
            let row = op.value_row(xs);
            planes
                .iter()
                .enumerate()
                .map(|(i, &pw)| {
                    let mut ws = ZERO;
                    for q in 0..row.len() {
                        ws += row[q] * pdens[(q, i)];
                    }
                    ws += op.reference_at(pw, xs)?.value - flat_total_field(model.kind, model.k1, model.k2, pw, xs)?.value;
                    let d = directions[i];
                    let k = if model.kind == BoundaryKind::Penetrable && d[1] < 0.0 { model.k2 } else { model.k1 };
                    Ok(far_field_constant(k) * ws)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let plane_wave = CMat::from_fn(directions.len(), sources.len(), |i, j| cols[j][i]);
    Ok(MixedReciprocity { far_field, plane_wave })
}

/// Whether `p` lies outside the regions enclosed between the surface and
/// the flat plane x2 = 0.
fn outside_contrast(profile: &SurfaceProfile, p: Point) -> bool {
    let Ok(f) = profile.eval(p[0]) else { return false };
    (p[1] > f.max(0.0)) || (p[1] < f.min(0.0))
}

pub fn check_mixed_reciprocity(
    model: &ForwardModel,
    profile: &SurfaceProfile,
    sources: &[Point],
    directions: &[Point],
    threshold: f64,
) -> Result<IdentityReport> {
    let r = mixed_reciprocity(model, profile, sources, directions)?;
    Ok(IdentityReport::new(
        "mixed-reciprocity",
        Some(model.kind),
        r.mismatch(),
        threshold,
        sources.len() * directions.len(),
        vec![("k1".into(), model.k1)],
    ))
}
