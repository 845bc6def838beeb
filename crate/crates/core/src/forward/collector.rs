//! Cauchy data of the scattered field on a circle C_ρ enclosing the surface
//! perturbation, and the fields it represents outside B_ρ.
//!
//! The field F = u − u_flat (total minus flat-surface total field) satisfies
//! the flat boundary or transmission condition outside B_ρ, so
//! F(x) = ∫_{C_ρ} [F ∂_ν V(x,·) − ∂_ν F V(x,·)] ds with V the flat-surface
//! Green's function and ν the outward normal.  Replacing V by its far-field
//! kernel gives the far-field pattern.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::bie::{BoundaryOperator, Incidence};
use crate::forward::BoundaryKind;
use crate::geometry::Point;
use crate::greens::{
    far_field_constant, halfplane_green_field, planewave_background_impenetrable, planewave_background_penetrable,
    twolayer_flat_green_field, FieldValue, HalfPlaneKind, TwoLayerMedium,
};
use crate::linalg::CMat;
use crate::quadrature::{composite, panel_rule};
use crate::specfun::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// The flat-surface total field for incidence `s`: the half-plane Green's
/// function or w_{0,α} for impenetrable kinds, v_0 or w_0 for the
/// penetrable one.
pub fn flat_total_field(kind: BoundaryKind, k1: f64, k2: f64, s: Incidence, x: Point) -> Result<FieldValue> {
    match (kind, s) {
        (BoundaryKind::Penetrable, Incidence::Point(y) | Incidence::RawPoint(y)) => {
            twolayer_flat_green_field(&TwoLayerMedium::new(k1, k2)?, x, y)
        }
        (BoundaryKind::Penetrable, Incidence::Plane(d)) => planewave_background_penetrable(k1, k2, x, d),
        (_, Incidence::Point(y) | Incidence::RawPoint(y)) => halfplane_green_field(halfplane(kind), k1, x, y),
        (_, Incidence::Plane(d)) => planewave_background_impenetrable(halfplane(kind), k1, x, d),
    }
}

fn halfplane(kind: BoundaryKind) -> HalfPlaneKind {
    if kind == BoundaryKind::Neumann {
        HalfPlaneKind::Neumann
    } else {
        HalfPlaneKind::Dirichlet
    }
}

/// Quadrature on C_ρ with the transfer from densities to Cauchy data.
pub struct Collector {
    pub radius: f64,
    pub kind: BoundaryKind,
    pub k1: f64,
    pub k2: f64,
    pub points: Vec<Point>,
    /// Outward unit normals.
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
    /// Rows 0..M give F, rows M..2M give ∂_ν F, for the potential part.
    transfer: CMat,
}

impl std::fmt::Debug for Collector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Collector").field("radius", &self.radius).field("points", &self.points.len()).finish()
    }
}

impl Collector {
    /// Builds the circle (upper semicircle for impenetrable kinds, full circle
    /// split at x2 = 0 otherwise) with Gauss panels no longer than a
    /// wavelength.
    pub fn new(op: &BoundaryOperator, radius: f64) -> Result<Self> {
        if radius <= op.profile.support_halfwidth {
            return Err(Error::Geometry(format!(
                "collection radius {radius} must exceed the perturbation half-width {}",
                op.profile.support_halfwidth
            )));
        }
        if radius >= op.options.plateau {
            return Err(Error::Geometry(format!(
                "collection radius {radius} must lie inside the window plateau {}",
                op.options.plateau
            )));
        }
        let kmax = op.k1.max(op.k2);
        let lam = 2.0 * PI / kmax;
        let rule = panel_rule();
        let arcs: Vec<(f64, f64)> = match op.kind {
            BoundaryKind::Penetrable => vec![(0.0, PI), (PI, 2.0 * PI)],
            _ => vec![(0.0, PI)],
        };
        let mut points = Vec::new();
        let mut normals = Vec::new();
        let mut weights = Vec::new();
        for (a, b) in arcs {
            let panels = ((radius * (b - a)) / lam).ceil().max(1.0) as usize;
            let (ts, ws) = composite(a, b, panels, rule);
            for (t, w) in ts.into_iter().zip(ws) {
                let n = [t.cos(), t.sin()];
                points.push([radius * n[0], radius * n[1]]);
                normals.push(n);
                weights.push(w * radius);
            }
        }
        let m = points.len();
        let rows: Vec<[Vec<C64>; 2]> = points
            .par_iter()
            .zip(normals.par_iter())
            .map(|(&y, &n)| {
                let [v, g0, g1] = op.potential_row(y);
                let dn: Vec<C64> = g0.iter().zip(&g1).map(|(a, b)| a * n[0] + b * n[1]).collect();
                [v, dn]
            })
            .collect();
        let transfer = CMat::from_fn(2 * m, op.dim(), |i, j| if i < m { rows[i][0][j] } else { rows[i - m][1][j] });
        Ok(Self { radius, kind: op.kind, k1: op.k1, k2: op.k2, points, normals, weights, transfer })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cauchy data (2M × columns) of F for each solved incidence.
    pub fn cauchy_data(&self, op: &BoundaryOperator, inc: &[Incidence], densities: &CMat) -> Result<CMat> {
        let mut c = &self.transfer * densities;
        let m = self.len();
        let corrections: Vec<Option<Vec<FieldValue>>> = inc
            .par_iter()
            .map(|&s| -> Result<Option<Vec<FieldValue>>> {
                if op.uses_flat_reference(s) {
                    return Ok(None);
                }
                let mut out = Vec::with_capacity(m);
                for &y in &self.points {
                    let a = op.reference_at(s, y)?;
                    let f = flat_total_field(self.kind, self.k1, self.k2, s, y)?;
                    out.push(a - f);
                }
                Ok(Some(out))
            })
            .collect::<Result<_>>()?;
        for (j, corr) in corrections.iter().enumerate() {
            if let Some(corr) = corr {
                for i in 0..m {
                    c[(i, j)] += corr[i].value;
                    c[(m + i, j)] += corr[i].normal(self.normals[i]);
                }
            }
        }
        Ok(c)
    }

    /// Kernel rows (one per target) acting on Cauchy data: row·[F; ∂_νF].
    fn apply(&self, rows: Vec<Vec<C64>>, cauchy: &CMat) -> CMat {
        let k = CMat::from_fn(rows.len(), 2 * self.len(), |i, j| rows[i][j]);
        &k * cauchy
    }

    /// Far-field patterns of F in the unit directions `dirs` (rows) for
    /// every column of `cauchy`.
    pub fn far_field(&self, dirs: &[Point], cauchy: &CMat) -> Result<CMat> {
        let m = self.len();
        let rows: Vec<Vec<C64>> = dirs
            .par_iter()
            .map(|&xh| -> Result<Vec<C64>> {
                let gamma = match self.kind {
                    BoundaryKind::Penetrable => far_field_constant(if xh[1] >= 0.0 { self.k1 } else { self.k2 }),
                    _ => {
                        if !(xh[1] > 0.0) {
                            return Err(Error::Domain(format!("far-field direction {xh:?} must point upward")));
                        }
                        far_field_constant(self.k1)
                    }
                };
                let d = [-xh[0], -xh[1]];
                let mut row = vec![ZERO; 2 * m];
                for i in 0..m {
                    let v = flat_total_field(self.kind, self.k1, self.k2, Incidence::Plane(d), self.points[i])? * gamma;
                    row[i] = v.normal(self.normals[i]) * self.weights[i];
                    row[m + i] = -v.value * self.weights[i];
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(self.apply(rows, cauchy))
    }

    /// F at points outside B_ρ in the upper half-plane (impenetrable kinds).
    pub fn exterior_field(&self, targets: &[Point], cauchy: &CMat) -> Result<CMat> {
        if self.kind == BoundaryKind::Penetrable {
            return Err(Error::Domain("exterior representation is only provided for impenetrable kinds".into()));
        }
        let m = self.len();
        let rows: Vec<Vec<C64>> = targets
            .par_iter()
            .map(|&x| -> Result<Vec<C64>> {
                if !(x[0].hypot(x[1]) > self.radius) || !(x[1] > 0.0) {
                    return Err(Error::Domain(format!("exterior target {x:?} must lie outside B_ρ above x2 = 0")));
                }
                let mut row = vec![ZERO; 2 * m];
                for i in 0..m {
                    // V(x, y) is symmetric, so ∇_y V(x, y) is the gradient of V(·, x) at y.
                    let v = halfplane_green_field(halfplane(self.kind), self.k1, self.points[i], x)?;
                    row[i] = v.normal(self.normals[i]) * self.weights[i];
                    row[m + i] = -v.value * self.weights[i];
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(self.apply(rows, cauchy))
    }
}
