//! Self-test suites: a quick pass over closed forms and flat-surface oracles,
//! and the full identity checks on the desk-scale Γ_R backgrounds.

use std::f64::consts::PI;

use rtm_core::forward::{solve_total_fields, BoundaryKind, ForwardModel, Incidence, SolverSettings};
use rtm_core::geometry::{discretize_surface, Point, SurfaceProfile};
use rtm_core::greens::{halfplane_green, twolayer_flat_green, HalfPlaneKind, TwoLayerMedium};
use rtm_core::specfun::hankel01;
use rtm_core::verify::{
    cell_centres, check_helmholtz_kirchhoff, check_mixed_reciprocity, check_reciprocity, check_remainder_decay,
    mixed_reciprocity_threshold, reciprocity_threshold, sample_pairs, BackgroundGreen, FlatGreen, IdentityReport,
    HELMHOLTZ_KIRCHHOFF_THRESHOLD,
};
use rtm_core::{Result, C64};

pub const KINDS: [BoundaryKind; 3] = [BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Penetrable];

/// Closed-form Green's function of the flat surface used as the quick-suite oracle.
pub type FlatReference = dyn Fn(BoundaryKind, f64, f64, Point, Point) -> Result<C64> + Sync;

pub fn flat_reference(kind: BoundaryKind, k1: f64, k2: f64, x: Point, y: Point) -> Result<C64> {
    match kind {
        BoundaryKind::Dirichlet => halfplane_green(HalfPlaneKind::Dirichlet, k1, x, y),
        BoundaryKind::Neumann => halfplane_green(HalfPlaneKind::Neumann, k1, x, y),
        BoundaryKind::Penetrable => twolayer_flat_green(&TwoLayerMedium::new(k1, k2)?, x, y),
    }
}

/// Desk-scale parameters of the full suite.
#[derive(Clone, Copy, Debug)]
pub struct DeskScale {
    pub k1: f64,
    pub k2: f64,
    pub radius: f64,
    pub rho: f64,
    pub quadrature: usize,
    pub pairs: usize,
}

impl Default for DeskScale {
    fn default() -> Self {
        Self { k1: 5.0, k2: 2.5, radius: 20.0, rho: 30.0, quadrature: 1024, pairs: 10 }
    }
}

/// Sampling domain S shifted to the flat level x2 = 0.
pub const SAMPLING_X1: (f64, f64) = (-5.0, 5.0);
pub const SAMPLING_X2: (f64, f64) = (-1.5, 1.0);

fn hankel_report() -> IdentityReport {
    // H_0^(1)(1) and H_1^(1)(1) to 16 digits.
    let want = [C64::new(0.7651976865579666, 0.08825696421567696), C64::new(0.4400505857449335, -0.7812128213002887)];
    let (h0, h1) = hankel01(1.0);
    let residual = ((h0 - want[0]).norm() / want[0].norm()).max((h1 - want[1]).norm() / want[1].norm());
    IdentityReport::new("hankel", None, residual, 1e-12, 2, vec![("x".into(), 1.0)])
}

fn arclength_report() -> Result<IdentityReport> {
    let flat = discretize_surface(&SurfaceProfile::flat(1.0), 5.0, 10.0, 1.0)?;
    let e1 = (flat.weights.iter().sum::<f64>() - 4.0).abs() / 4.0;
    let dip = discretize_surface(&SurfaceProfile::gamma_r(4.0), 5.0, 10.0, 2.0)?;
    let want = PI * 4.0 + 4.0;
    let e2 = (dip.weights.iter().sum::<f64>() - want).abs() / want;
    Ok(IdentityReport::new("arclength", None, e1.max(e2), 1e-8, 2, Vec::new()))
}

/// BIE solution on the flat surface against the closed form at 10 points, κ ∈ {1, 5}.
fn flat_oracle_report(kind: BoundaryKind, reference: &FlatReference) -> Result<IdentityReport> {
    let y = [0.4, 1.3];
    let targets: Vec<Point> = (0..10).map(|i| [-2.0 + 0.45 * i as f64, 0.2 + 0.3 * (i % 4) as f64]).collect();
    let mut worst = 0.0f64;
    for k in [1.0f64, 5.0] {
        // At κ = 1 the source stands 0.2λ off the surface, which the mesh must resolve.
        let npw = if k < 2.0 { 20.0 } else { 10.0 };
        let settings = SolverSettings { nodes_per_wavelength: npw, ..SolverSettings::default() };
        let model = ForwardModel::new(kind, k, 0.5 * k, settings)?;
        let op = model.operator(&SurfaceProfile::flat(1.0), 3.0)?;
        let u = solve_total_fields(&op, &[Incidence::RawPoint(y)], &targets)?;
        for (i, &x) in targets.iter().enumerate() {
            let want = reference(kind, k, 0.5 * k, x, y)?;
            worst = worst.max((u[(i, 0)] - want).norm() / want.norm());
        }
    }
    Ok(IdentityReport::new("flat-oracle", Some(kind), worst, 1e-4, 20, vec![("k".into(), 1.0), ("k".into(), 5.0)]))
}

/// specfun, geometry and flat-surface checks; takes well under a minute.
pub fn quick_suite_with(reference: &FlatReference) -> Result<Vec<IdentityReport>> {
    let mut out = vec![hankel_report(), arclength_report()?];
    for kind in KINDS {
        out.push(flat_oracle_report(kind, reference)?);
    }
    let pairs = sample_pairs(10, 7, SAMPLING_X1, (0.1, 1.0));
    for kind in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
        let g = FlatGreen { kind, k1: 5.0, k2: 5.0 };
        out.push(check_helmholtz_kirchhoff(&g, 30.0, 512, &pairs, 1e-6)?);
        let r = check_reciprocity(Some(kind), &pairs, 1e-12, |x, z| reference(kind, 5.0, 5.0, x, z))?;
        out.push(r);
    }
    Ok(out)
}

pub fn quick_suite() -> Result<Vec<IdentityReport>> {
    quick_suite_with(&flat_reference)
}

fn model(kind: BoundaryKind, d: &DeskScale) -> Result<ForwardModel> {
    ForwardModel::new(kind, d.k1, d.k2, SolverSettings::default())
}

fn desk_pairs(d: &DeskScale) -> Vec<(Point, Point)> {
    sample_pairs(d.pairs, 7, SAMPLING_X1, SAMPLING_X2)
}

/// Helmholtz–Kirchhoff identity on the circle ρ for one Γ_R background.
pub fn helmholtz_kirchhoff(kind: BoundaryKind, d: &DeskScale) -> Result<IdentityReport> {
    let g = BackgroundGreen::new(&model(kind, d)?, d.radius, d.rho)?;
    check_helmholtz_kirchhoff(&g, d.rho, d.quadrature, &desk_pairs(d), HELMHOLTZ_KIRCHHOFF_THRESHOLD)
}

/// Remainder decay over radii {30, 60, 120} on a 5 × 5 grid of S.
pub fn remainder_decay(kind: BoundaryKind, d: &DeskScale) -> Result<IdentityReport> {
    let radii = [30.0, 60.0, 120.0];
    let g = BackgroundGreen::new(&model(kind, d)?, d.radius, radii[2])?;
    let samples = cell_centres(5, 5, SAMPLING_X1, SAMPLING_X2);
    check_remainder_decay(&g, &radii, d.quadrature, &samples)
}

/// Reciprocity from two independent single-source solves per pair.
pub fn reciprocity(kind: BoundaryKind, d: &DeskScale) -> Result<IdentityReport> {
    let g = BackgroundGreen::new(&model(kind, d)?, d.radius, d.rho)?;
    check_reciprocity(Some(kind), &desk_pairs(d), reciprocity_threshold(kind), |x, z| g.value(x, z))
}

/// Mixed reciprocity for f1 over 6 directions × 4 sources.
pub fn mixed_reciprocity(kind: BoundaryKind, d: &DeskScale) -> Result<IdentityReport> {
    let angles: &[f64] =
        if kind == BoundaryKind::Penetrable { &[0.4, 1.2, 2.0, 2.8, -0.7, -2.2] } else { &[0.3, 0.8, 1.3, 1.8, 2.3, 2.8] };
    let dirs: Vec<Point> = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
    let srcs: Vec<Point> = if kind == BoundaryKind::Penetrable {
        vec![[1.0, 3.0], [-2.0, 2.0], [0.5, -3.0], [3.0, -2.0]]
    } else {
        vec![[1.0, 3.0], [-2.0, 2.0], [0.5, 1.5], [3.0, 4.0]]
    };
    check_mixed_reciprocity(&model(kind, d)?, &SurfaceProfile::f1(), &srcs, &dirs, mixed_reciprocity_threshold(kind))
}

/// All identity checks at desk scale.
pub fn full_suite(d: &DeskScale) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for kind in KINDS {
        out.push(helmholtz_kirchhoff(kind, d)?);
    }
    for kind in KINDS {
        out.push(remainder_decay(kind, d)?);
    }
    for kind in KINDS {
        out.push(reciprocity(kind, d)?);
    }
    for kind in KINDS {
        out.push(mixed_reciprocity(kind, d)?);
    }
    Ok(out)
}
