use std::f64::consts::PI;

use rtm_core::forward::data::{aperture_for, far_data};
use rtm_core::forward::{
    add_noise, build_operators, flat_total_field, solve_total_fields, synthesize_data, synthesize_with, BieOptions,
    BoundaryKind, BoundaryOperator, Collector, ForwardModel, Incidence, ScatterData, SolverSettings, VolumeOperator,
};
use rtm_core::geometry::{AcquisitionGeometry, Regime, SurfaceProfile};
use rtm_core::greens::{halfplane_green, twolayer_flat_green, HalfPlaneKind, TwoLayerMedium};
use rtm_core::verify::BackgroundGreen;
use rtm_core::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const KINDS: [BoundaryKind; 3] = [BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Penetrable];

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn geometry(kind: BoundaryKind, regime: Regime, r: f64, n: usize, background: f64) -> AcquisitionGeometry {
    AcquisitionGeometry { regime, aperture: aperture_for(kind), r_s: r, r_r: r, n_s: n, n_r: n, background_radius: background }
}

#[test]
fn flat_surface_reproduces_closed_forms() {
    let y = [0.4, 1.3];
    let targets: Vec<[f64; 2]> = (0..10).map(|i| [-2.0 + 0.45 * i as f64, 0.2 + 0.3 * (i % 4) as f64]).collect();
    for k in [1.0f64, 5.0] {
        // At κ = 1 the source stands 0.2λ off the surface, which the mesh must resolve.
        let npw = if k < 2.0 { 20.0 } else { 10.0 };
        for kind in KINDS {
            let settings = SolverSettings { nodes_per_wavelength: npw, ..SolverSettings::default() };
            let model = ForwardModel::new(kind, k, 0.5 * k, settings).unwrap();
            let op = model.operator(&SurfaceProfile::flat(1.0), 3.0).unwrap();
            let u = solve_total_fields(&op, &[Incidence::RawPoint(y)], &targets).unwrap();
            for (i, &x) in targets.iter().enumerate() {
                let want = match kind {
                    BoundaryKind::Dirichlet => halfplane_green(HalfPlaneKind::Dirichlet, k, x, y).unwrap(),
                    BoundaryKind::Neumann => halfplane_green(HalfPlaneKind::Neumann, k, x, y).unwrap(),
                    BoundaryKind::Penetrable => twolayer_flat_green(&TwoLayerMedium::new(k, 0.5 * k).unwrap(), x, y).unwrap(),
                };
                let e = rel(u[(i, 0)], want);
                assert!(e < 1e-4, "{kind:?} κ = {k} at {x:?}: {e:e}");
            }
        }
    }
}

#[test]
fn flat_penetrable_transmits_into_the_lower_medium() {
    let (k, k2) = (5.0, 2.5);
    let op = BoundaryOperator::new(&SurfaceProfile::flat(1.0), BoundaryKind::Penetrable, k, k2, BieOptions::covering(3.0, 2.0 * PI / k2))
        .unwrap();
    let m = TwoLayerMedium::new(k, k2).unwrap();
    for (y, x) in [([0.4, 1.3], [-0.6, -0.9]), ([0.2, -0.8], [1.0, 1.1]), ([0.2, -0.8], [-1.0, -0.3])] {
        let u = solve_total_fields(&op, &[Incidence::Point(y)], &[x]).unwrap();
        let want = twolayer_flat_green(&m, x, y).unwrap();
        assert!(rel(u[(0, 0)], want) < 1e-4, "{y:?} -> {x:?}: {:e}", rel(u[(0, 0)], want));
    }
}

#[test]
fn dirichlet_total_field_vanishes_on_the_surface() {
    let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, SolverSettings::default()).unwrap();
    let op = model.operator(&SurfaceProfile::f1(), 8.0).unwrap();
    let p = SurfaceProfile::f1();
    let y = [0.5, 3.0];
    let pts: Vec<[f64; 2]> = [-3.3, -1.1, 0.7, 2.9].iter().map(|&x1| [x1, p.eval(x1).unwrap() + 1e-3]).collect();
    let u = solve_total_fields(&op, &[Incidence::Point(y)], &pts).unwrap();
    let scale = halfplane_green(HalfPlaneKind::Dirichlet, 5.0, [0.0, 1.0], y).unwrap().norm();
    for i in 0..pts.len() {
        // A millimetre above the surface |u| is of order 1e-3 · |∇u|.
        assert!(u[(i, 0)].norm() < 2e-2 * scale, "{:?}: {}", pts[i], u[(i, 0)].norm());
    }
}

#[test]
fn far_field_matches_large_radius_exterior_field() {
    for kind in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
        let model = ForwardModel::new(kind, 5.0, 5.0, SolverSettings::default()).unwrap();
        let op = model.operator(&SurfaceProfile::f1(), 0.0).unwrap();
        let col = Collector::new(&op, model.collection_radius(4.0)).unwrap();
        let inc = [Incidence::Point([1.0, 3.0]), Incidence::Plane([0.6, -0.8])];
        let dens = op.solve(&inc).unwrap();
        let cauchy = col.cauchy_data(&op, &inc, &dens).unwrap();
        let dirs: Vec<[f64; 2]> = [0.3f64, 1.1, 1.9, 2.7].iter().map(|t| [t.cos(), t.sin()]).collect();
        let ff = col.far_field(&dirs, &cauchy).unwrap();
        // Errors are measured against the largest pattern value of each incidence.
        let err = |r: f64| {
            let pts: Vec<[f64; 2]> = dirs.iter().map(|d| [r * d[0], r * d[1]]).collect();
            let ext = col.exterior_field(&pts, &cauchy).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..inc.len() {
                let scale = (0..dirs.len()).map(|i| ff[(i, j)].norm()).fold(0.0, f64::max);
                for i in 0..dirs.len() {
                    let scaled = ext[(i, j)] * r.sqrt() * (-I * 5.0 * r).exp();
                    worst = worst.max((scaled - ff[(i, j)]).norm() / scale);
                }
            }
            worst
        };
        // The leading-order error falls off like 1/r; at 10³ wavelengths it
        // is about 1e-2 for a collection radius of 5.9.
        let r = 1000.0 * 2.0 * PI / 5.0;
        let (e1, e4) = (err(r), err(4.0 * r));
        assert!(e1 < 1.5e-2 && e4 < 1e-2 && e4 < 0.3 * e1, "{kind:?}: {e1:e} {e4:e}");
        assert!(col.far_field(&[[1.0, 0.0]], &cauchy).is_err());
    }
}

#[test]
fn exterior_representation_matches_direct_evaluation() {
    for kind in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
        let model = ForwardModel::new(kind, 5.0, 5.0, SolverSettings::default()).unwrap();
        let targets = [[10.0, 6.0], [-8.0, 1.5]];
        let op = model.operator(&SurfaceProfile::f2(), 12.0).unwrap();
        let col = Collector::new(&op, model.collection_radius(4.0)).unwrap();
        let inc = [Incidence::Point([-1.0, 2.0]), Incidence::RawPoint([2.0, 1.5])];
        let dens = op.solve(&inc).unwrap();
        let cauchy = col.cauchy_data(&op, &inc, &dens).unwrap();
        let ext = col.exterior_field(&targets, &cauchy).unwrap();
        let direct = solve_total_fields(&op, &inc, &targets).unwrap();
        for (i, &x) in targets.iter().enumerate() {
            for (j, &s) in inc.iter().enumerate() {
                let want = direct[(i, j)] - flat_total_field(kind, 5.0, 5.0, s, x).unwrap().value;
                assert!(rel(ext[(i, j)], want) < 1e-4, "{kind:?} {x:?}: {:e}", rel(ext[(i, j)], want));
            }
        }
    }
}

#[test]
fn symmetric_dip_has_a_symmetric_far_field_under_vertical_incidence() {
    for kind in KINDS {
        let model = ForwardModel::new(kind, 5.0, 2.5, SolverSettings::default()).unwrap();
        let op = model.operator(&SurfaceProfile::gamma_r(2.0), 0.0).unwrap();
        let angles = [0.2f64, 0.9, 1.4];
        let dirs: Vec<[f64; 2]> = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
        let mirror: Vec<[f64; 2]> = angles.iter().map(|t| [(PI - t).cos(), (PI - t).sin()]).collect();
        let rho = model.collection_radius(2.0);
        let a = far_data(&op, rho, &dirs, &[[0.0, 1.0]]).unwrap();
        let b = far_data(&op, rho, &mirror, &[[0.0, 1.0]]).unwrap();
        for j in 0..angles.len() {
            let asym = (a[(0, j)] - b[(0, j)]).norm() / a[(0, j)].norm();
            assert!(asym < 1e-6, "{kind:?}: {asym:e}");
        }
    }
}

#[test]
fn background_surface_gives_zero_data() {
    let model = ForwardModel::new(BoundaryKind::Neumann, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Neumann, Regime::Near, 12.0, 8, 6.0);
    let d = synthesize_data(&SurfaceProfile::gamma_r(6.0), &model, &g).unwrap();
    assert!(d.max_abs() <= 1e-8);
}

#[test]
fn near_data_is_symmetric_when_sources_and_receivers_coincide() {
    for kind in KINDS {
        let model = ForwardModel::new(kind, 5.0, 2.5, SolverSettings::default()).unwrap();
        let mut g = geometry(kind, Regime::Near, 12.0, 6, 6.0);
        if kind == BoundaryKind::Penetrable {
            g.n_s = 5;
            g.n_r = 5;
        }
        let d = synthesize_data(&SurfaceProfile::f1(), &model, &g).unwrap();
        let m = &d.matrix;
        assert_eq!(m.nrows(), m.ncols());
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
            }
        }
        assert!(worst <= 1e-4 * d.max_abs(), "{kind:?}: {worst:e} vs {:e}", d.max_abs());
        assert!(d.max_abs() > 1e-6);
    }
}

#[test]
fn far_data_is_reciprocal() {
    let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Dirichlet, Regime::Far, 1.0, 6, 6.0);
    let d = synthesize_data(&SurfaceProfile::f1(), &model, &g).unwrap();
    // Entry (r, s) is w^∞(x̂_s, −x̂_r), and w^∞(x̂, −d) = w^∞(d... ) with
    // x̂ and d exchanged.
    let m = &d.matrix;
    for i in 0..m.nrows() {
        for j in 0..i {
            assert!((m[(i, j)] - m[(j, i)]).norm() <= 1e-4 * d.max_abs());
        }
    }
}

#[test]
fn window_ramp_and_plateau_are_converged() {
    let kind = BoundaryKind::Dirichlet;
    let base = SolverSettings::default();
    let wide = SolverSettings { margin_wavelengths: 8.0, ramp_wavelengths: 20.0, ..base };
    let x = [[3.0, 4.0], [-6.0, 2.0]];
    let inc = [Incidence::Point([1.0, 5.0]), Incidence::Plane([0.6, -0.8])];
    let mut fields = Vec::new();
    for s in [base, wide] {
        let model = ForwardModel::new(kind, 5.0, 5.0, s).unwrap();
        let op = model.operator(&SurfaceProfile::f3(), 8.0).unwrap();
        fields.push(solve_total_fields(&op, &inc, &x).unwrap());
    }
    for i in 0..x.len() {
        for j in 0..inc.len() {
            assert!(rel(fields[0][(i, j)], fields[1][(i, j)]) < 1e-3, "{i} {j}: {:e}", rel(fields[0][(i, j)], fields[1][(i, j)]));
        }
    }
}

#[test]
fn noise_has_the_requested_relative_size() {
    let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Dirichlet, Regime::Near, 10.0, 6, 5.0);
    let d = synthesize_data(&SurfaceProfile::f2(), &model, &g).unwrap();
    let same = add_noise(&d, 0.0, 7).unwrap();
    assert_eq!(same.matrix, d.matrix);
    for tau in [0.05, 0.2] {
        let a = add_noise(&d, tau, 1).unwrap();
        let b = add_noise(&d, tau, 1).unwrap();
        let c = add_noise(&d, tau, 2).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_ne!(a.matrix, c.matrix);
        let diff = rtm_core::forward::data::frobenius(&(&a.matrix - &d.matrix));
        assert!((diff - tau * d.norm()).abs() <= 1e-12 * d.norm());
        assert_eq!((a.noise_tau, a.seed), (tau, 1));
    }
    assert!(add_noise(&d, -0.1, 1).is_err());
}

#[test]
fn data_files_round_trip() {
    let model = ForwardModel::new(BoundaryKind::Penetrable, 5.0, 2.5, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Penetrable, Regime::Near, 10.0, 3, 5.0);
    let d = add_noise(&synthesize_data(&SurfaceProfile::f2(), &model, &g).unwrap(), 0.1, 42).unwrap();
    let mut buf = Vec::new();
    d.write_to(&mut buf).unwrap();
    let back = ScatterData::read_from(&mut buf.as_slice()).unwrap();
    assert_eq!(back.matrix, d.matrix);
    assert_eq!((back.kind, back.regime, back.seed, back.noise_tau), (d.kind, d.regime, d.seed, d.noise_tau));
    assert_eq!((back.k1, back.k2, back.r_s, back.r_r, back.background_radius), (d.k1, d.k2, d.r_s, d.r_r, d.background_radius));
    assert!(back.check_acquisition(&g).is_ok());
    let mut other = g;
    other.n_r = 6;
    assert!(back.check_acquisition(&other).is_err());
    buf[0] ^= 0xff;
    assert!(ScatterData::read_from(&mut buf.as_slice()).is_err());
    assert!(ScatterData::read_from(&mut &buf[..10]).is_err());
}

#[test]
fn prebuilt_operators_give_the_same_data() {
    let model = ForwardModel::new(BoundaryKind::Neumann, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Neumann, Regime::Near, 10.0, 4, 5.0);
    let ops = build_operators(&SurfaceProfile::f1(), &model, &g).unwrap();
    let a = synthesize_with(&ops, &model, &g).unwrap();
    let b = synthesize_data(&SurfaceProfile::f1(), &model, &g).unwrap();
    assert_eq!(a.matrix, b.matrix);
    let mut bad = g;
    bad.aperture = aperture_for(BoundaryKind::Penetrable);
    assert!(build_operators(&SurfaceProfile::f1(), &model, &bad).is_err());
}

#[test]
fn volume_equation_agrees_with_boundary_equation() {
    let r = 0.5;
    let model = ForwardModel::new(BoundaryKind::Penetrable, 5.0, 2.5, SolverSettings::default()).unwrap();
    let bie = BackgroundGreen::new(&model, r, 3.0).unwrap();
    let medium = TwoLayerMedium::new(5.0, 2.5).unwrap();
    let vol = VolumeOperator::new(&SurfaceProfile::gamma_r(r), medium, 0.1).unwrap();
    assert!(vol.cells.iter().all(|c| c.contrast == medium.contrast() && c.centre[1] < 0.0));
    let area: f64 = vol.cells.iter().map(|c| c.weight).sum();
    assert!((area - 0.5 * PI * r * r).abs() < 0.05 * area);
    for (x, y) in [([0.3, 0.8], [-1.0, 1.5]), ([1.5, -0.9], [-0.4, 1.2]), ([2.0, 0.4], [-2.0, -1.0])] {
        let a = vol.point_source_field(x, y).unwrap();
        let b = bie.value(x, y).unwrap();
        assert!(rel(a, b) < 3e-2, "{x:?} {y:?}: {:e}", rel(a, b));
    }
    let u0: Vec<C64> = vol.cells.iter().map(|c| twolayer_flat_green(&medium, c.centre, [0.0, 1.0]).unwrap()).collect();
    let u = vol.solve(&u0).unwrap();
    assert!(vol.residual(&u, &u0) <= 1e-8);
    assert!(vol.solve(&u0[1..]).is_err());
}

#[test]
fn invalid_models_are_rejected() {
    assert!(ForwardModel::new(BoundaryKind::Dirichlet, -1.0, 1.0, SolverSettings::default()).is_err());
    assert!(ForwardModel::new(BoundaryKind::Penetrable, 5.0, 0.0, SolverSettings::default()).is_err());
    let coarse = SolverSettings { nodes_per_wavelength: 4.0, ..SolverSettings::default() };
    assert!(ForwardModel::new(BoundaryKind::Neumann, 5.0, 5.0, coarse).is_err());
    let m = ForwardModel::new(BoundaryKind::Neumann, 5.0, 5.0, SolverSettings::default()).unwrap();
    assert_eq!(m.k2, 5.0);
    assert!((m.collection_radius(4.0) - (4.0 + 1.5 * 2.0 * PI / 5.0)).abs() < 1e-14);
    for kind in KINDS {
        assert_eq!(BoundaryKind::from_code(kind.code()), Some(kind));
        assert_eq!(BoundaryKind::parse(&kind.letter().to_string()), Some(kind));
    }
}

#[test]
fn far_regime_background_surface_gives_zero_data() {
    let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Dirichlet, Regime::Far, 1.0, 6, 3.0);
    let d = synthesize_data(&SurfaceProfile::gamma_r(3.0), &model, &g).unwrap();
    assert_eq!(d.max_abs(), 0.0);
}

#[test]
fn dirichlet_trace_extrapolates_to_zero() {
    let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, SolverSettings::default()).unwrap();
    let p = SurfaceProfile::f1();
    let op = model.operator(&p, 6.0).unwrap();
    let y = [0.5, 3.0];
    let x1s = [-3.7, -2.2, -1.13, -0.4, 0.05, 0.61, 1.3, 2.02, 2.9, 3.55];
    let h = 1e-4;
    // Points a distance h and 2h above the surface along the normal.
    let lift = |x1: f64, s: f64| {
        let f = p.eval(x1).unwrap();
        let fp = (p.eval(x1 + 1e-6).unwrap() - p.eval(x1 - 1e-6).unwrap()) / 2e-6;
        let q = (1.0 + fp * fp).sqrt();
        [x1 - s * fp / q, f + s / q]
    };
    let pts: Vec<[f64; 2]> = x1s.iter().flat_map(|&x1| [lift(x1, h), lift(x1, 2.0 * h)]).collect();
    let u = solve_total_fields(&op, &[Incidence::Point(y)], &pts).unwrap();
    let scale = x1s.iter().map(|&x1| halfplane_green(HalfPlaneKind::Dirichlet, 5.0, lift(x1, 0.5), y).unwrap().norm()).fold(0.0, f64::max);
    let scale = scale.max(rtm_core::greens::phi_field(5.0, [0.0, 0.0], y).value.norm());
    for i in 0..x1s.len() {
        let trace = u[(2 * i, 0)] * 2.0 - u[(2 * i + 1, 0)];
        assert!(trace.norm() <= 1e-5 * scale, "x1 = {}: {:e}", x1s[i], trace.norm() / scale);
    }
}

#[test]
fn mesh_refinement_converges() {
    let x: Vec<[f64; 2]> = (0..10).map(|i| [-3.0 + 0.7 * i as f64, 0.8 + 0.25 * (i % 3) as f64]).collect();
    let inc = [Incidence::Point([0.7, 2.5])];
    let fields: Vec<_> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&npw| {
            let s = SolverSettings { nodes_per_wavelength: npw, ..SolverSettings::default() };
            let model = ForwardModel::new(BoundaryKind::Neumann, 5.0, 5.0, s).unwrap();
            let op = model.operator(&SurfaceProfile::f2(), 6.0).unwrap();
            solve_total_fields(&op, &inc, &x).unwrap()
        })
        .collect();
    let diff = |a: usize, b: usize| (0..x.len()).map(|i| rel(fields[a][(i, 0)], fields[b][(i, 0)])).fold(0.0, f64::max);
    let (e1, e2) = (diff(0, 2), diff(1, 2));
    assert!(diff(0, 1) <= 1e-3, "{:e}", diff(0, 1));
    assert!(e2 <= e1 / 4.0 || e2 < 1e-9, "{e1:e} {e2:e}");
}

#[test]
fn ramp_doubling_shrinks_the_truncation_change() {
    let x = [[2.0, 3.0], [-5.0, 1.0], [0.3, 0.9]];
    let inc = [Incidence::Point([1.0, 4.0])];
    let fields: Vec<_> = [3.0, 6.0, 12.0]
        .iter()
        .map(|&ramp| {
            let s = SolverSettings { ramp_wavelengths: ramp, ..SolverSettings::default() };
            let model = ForwardModel::new(BoundaryKind::Dirichlet, 5.0, 5.0, s).unwrap();
            let op = model.operator(&SurfaceProfile::f1(), 6.0).unwrap();
            solve_total_fields(&op, &inc, &x).unwrap()
        })
        .collect();
    let change = |a: usize, b: usize| (0..x.len()).map(|i| (fields[a][(i, 0)] - fields[b][(i, 0)]).norm()).fold(0.0, f64::max);
    let (c1, c2) = (change(0, 1), change(1, 2));
    assert!(c2 <= 0.5 * c1, "{c1:e} {c2:e}");
}

#[test]
fn matched_media_give_no_penetrable_data() {
    let model = ForwardModel::new(BoundaryKind::Penetrable, 5.0, 5.0, SolverSettings::default()).unwrap();
    let g = geometry(BoundaryKind::Penetrable, Regime::Near, 8.0, 5, 5.0);
    let d = synthesize_data(&SurfaceProfile::f2(), &model, &g).unwrap();
    let scale = rtm_core::greens::phi_field(5.0, [8.0, 0.0], [-8.0, 0.0]).value.norm();
    assert!(d.max_abs() <= 1e-6 * scale, "{:e}", d.max_abs() / scale);
}
