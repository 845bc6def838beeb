//! Solver settings and field evaluation on top of the boundary operators.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::bie::{BieOptions, BoundaryOperator, Incidence};
use crate::forward::BoundaryKind;
use crate::geometry::{Point, SurfaceProfile};
use crate::linalg::CMat;
use crate::specfun::C64;

/// Discretization controls shared by every surface solve of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub nodes_per_wavelength: f64,
    pub corner_levels: u32,
    /// Gap between the outermost evaluation point and the window ramp.
    pub margin_wavelengths: f64,
    pub ramp_wavelengths: f64,
    /// Combined-field coupling for Dirichlet; κ1 when unset.
    pub eta: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { nodes_per_wavelength: 10.0, corner_levels: 3, margin_wavelengths: 4.0, ramp_wavelengths: 10.0, eta: None }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.nodes_per_wavelength >= 6.0) {
            return Err(Error::Domain("nodes_per_wavelength must be at least 6".into()));
        }
        if !(self.margin_wavelengths >= 0.0) || !(self.ramp_wavelengths > 0.0) {
            return Err(Error::Domain("window margin must be nonnegative and ramp positive".into()));
        }
        if self.corner_levels > 30 {
            return Err(Error::Domain("corner_levels above 30 is not supported".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(Error::Domain("coupling parameter eta must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Boundary kind, wavenumbers and solver settings of a forward problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardModel {
    pub kind: BoundaryKind,
    pub k1: f64,
    /// Lower-medium wavenumber; ignored for impenetrable kinds.
    pub k2: f64,
    pub settings: SolverSettings,
}

impl ForwardModel {
    pub fn new(kind: BoundaryKind, k1: f64, k2: f64, settings: SolverSettings) -> Result<Self> {
        if !(k1 > 0.0) || !k1.is_finite() {
            return Err(Error::Domain(format!("κ1 must be positive, got {k1}")));
        }
        if kind == BoundaryKind::Penetrable && (!(k2 > 0.0) || !k2.is_finite()) {
            return Err(Error::Domain(format!("κ2 must be positive, got {k2}")));
        }
        settings.validate()?;
        Ok(Self { kind, k1, k2: if kind == BoundaryKind::Penetrable { k2 } else { k1 }, settings })
    }

    /// Upper-medium wavelength.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k1
    }

    /// Longest wavelength present in the problem.
    pub fn longest_wavelength(&self) -> f64 {
        2.0 * PI / self.k1.min(self.k2)
    }

    /// Radius of the Cauchy-data circle around a perturbation of half-width `a`.
    pub fn collection_radius(&self, a: f64) -> f64 {
        a + 1.5 * self.wavelength()
    }

    /// Window options whose plateau covers |x1| ≤ `coverage` with margin.
    pub fn options(&self, coverage: f64) -> BieOptions {
        let lam = self.longest_wavelength();
        let s = &self.settings;
        BieOptions {
            nodes_per_wavelength: s.nodes_per_wavelength,
            corner_levels: s.corner_levels,
            plateau: coverage + s.margin_wavelengths * lam,
            ramp: s.ramp_wavelengths * lam,
            eta: s.eta,
        }
    }

    /// Assembles and factorizes the operator for `profile`, accurate for
    /// evaluation points with |x| ≤ `coverage`.
    pub fn operator(&self, profile: &SurfaceProfile, coverage: f64) -> Result<BoundaryOperator> {
        let coverage = coverage.max(self.collection_radius(profile.support_halfwidth));
        BoundaryOperator::new(profile, self.kind, self.k1, self.k2, self.options(coverage))
    }
}

/// Total fields (points × incidences) given solved densities.
pub fn total_fields(op: &BoundaryOperator, inc: &[Incidence], densities: &CMat, points: &[Point]) -> Result<CMat> {
    check_off_surface(op, points)?;
    let mut out = &op.potential_matrix(points) * densities;
    let refs: Vec<Vec<C64>> = inc
        .par_iter()
        .map(|&s| points.iter().map(|&x| op.reference_at(s, x).map(|f| f.value)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    for (j, col) in refs.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[(i, j)] += *v;
        }
    }
    Ok(out)
}

/// Solves for `inc` and returns total fields at `points`.
pub fn solve_total_fields(op: &BoundaryOperator, inc: &[Incidence], points: &[Point]) -> Result<CMat> {
    let dens = op.solve(inc)?;
    total_fields(op, inc, &dens, points)
}

pub(crate) fn check_off_surface(op: &BoundaryOperator, points: &[Point]) -> Result<()> {
    let limit = op.options.plateau;
    for &x in points {
        if x[0].abs() > limit {
            return Err(Error::Domain(format!(
                "evaluation point {x:?} lies outside the accurate region |x1| <= {limit}"
            )));
        }
        if op.kind != BoundaryKind::Penetrable && !op.profile.is_above(x) {
            return Err(Error::Domain(format!("evaluation point {x:?} is not above the surface")));
        }
    }
    Ok(())
}
