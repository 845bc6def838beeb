use std::f64::consts::PI;

use proptest::prelude::*;
use rtm_core::specfun::{bessel_j, bessel_y, cylinder, h1_regular, hankel1, phi, phi_grad};
use rtm_core::C64;

/// J_n(x) = (1/π)∫_0^π cos(nτ − x sin τ) dτ by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
fn j_integral(n: i32, x: f64) -> f64 {
    let m = 4000 + (4.0 * x) as usize;
    let h = PI / m as f64;
    let mut s = 0.0;
    for k in 0..=m {
        let t = k as f64 * h;
        let w = if k == 0 || k == m { 0.5 } else { 1.0 };
        s += w * (n as f64 * t - x * t.sin()).cos();
    }
    s * h / PI
}

/// Y_n(x) = (1/π)∫_0^π sin(x sin τ − nτ) dτ − (1/π)∫_0^∞ (e^{nt} + (−1)^n e^{−nt}) e^{−x sinh t} dt.
fn y_integral(n: i32, x: f64) -> f64 {
    // Composite Simpson: the integrand is not periodic, so the trapezoid rule
    // would only be second order here.
    let m = 20_000 + 2 * (4.0 * x) as usize;
    let h = PI / m as f64;
    let mut s1 = 0.0;
    for k in 0..=m {
        let t = k as f64 * h;
        let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        s1 += w * (x * t.sin() - n as f64 * t).sin();
    }
    s1 *= h / (3.0 * PI);
    // Second integral: substitute and integrate with a fine composite Simpson rule.
    let tmax = (2.0 * 40.0 / x).asinh() + 2.0;
    let m2 = 200_000;
    let h2 = tmax / m2 as f64;
    let f = |t: f64| {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        ((n as f64 * t).exp() + sign * (-(n as f64) * t).exp()) * (-x * t.sinh()).exp()
    };
    let mut s2 = f(0.0) + f(tmax);
    for k in 1..m2 {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s2 += w * f(k as f64 * h2);
    }
    s2 *= h2 / 3.0;
    s1 - s2 / PI
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn bessel_j_reference_values() {
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    assert!((bessel_j(0, 1.0).unwrap() - 0.7651976866).abs() < 1e-10);
    assert!(bessel_j(2, 1.0).is_err());
    assert!(bessel_j(0, -1.0).is_err());
}

#[test]
fn bessel_y_reference_values() {
    assert!((bessel_y(0, 1.0).unwrap() - 0.0882569642).abs() < 1e-10);
    assert!(bessel_y(0, 1e-8).unwrap() < -11.0);
    assert!(bessel_y(0, 0.0).is_err());
    assert!(bessel_y(1, -2.0).is_err());
    let x = 2.0;
    let w = bessel_j(1, x).unwrap() * bessel_y(0, x).unwrap() - bessel_j(0, x).unwrap() * bessel_y(1, x).unwrap();
    assert!((w - 0.3183098862).abs() < 1e-10);
}

#[test]
fn hankel_reference_values() {
    let h = hankel1(0, 1.0).unwrap();
    assert!((h.re - 0.7651976866).abs() < 1e-10);
    assert!((h.im - 0.0882569642).abs() < 1e-10);
    let x = 500.0;
    let a = hankel1(0, x).unwrap().norm() * x.sqrt();
    assert!((a - 0.7978845608).abs() < 1e-3);
    assert!(hankel1(0, 0.0).is_err());
}

#[test]
fn j_matches_integral_representation() {
    let xs = [1e-3, 0.3, 1.0, 2.5, 4.0, 7.9, 8.0, 8.1, 12.0, 25.0, 60.0, 150.0, 900.0, 1e4];
    for &x in &xs {
        for n in 0..2 {
            let got = bessel_j(n, x).unwrap();
            let want = j_integral(n, x);
            let err = (got - want).abs();
            // Relative near a zero is meaningless; scale by the local envelope.
            let scale = (2.0 / (PI * x)).sqrt().min(1.0);
            assert!(err <= 1e-12 * scale.max(want.abs()) + 1e-15, "J{n}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn y_matches_integral_representation() {
    let xs = [0.05, 0.5, 1.0, 3.0, 7.99, 8.01, 11.0, 30.0, 80.0];
    for &x in &xs {
        for n in 0..2 {
            let got = bessel_y(n, x).unwrap();
            let want = y_integral(n, x);
            let scale = (2.0 / (PI * x)).sqrt().max(want.abs());
            assert!((got - want).abs() <= 1e-9 * scale, "Y{n}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn wronskian_holds_on_wide_range() {
    let mut x = 0.1;
    while x <= 100.0 {
        let c = cylinder(x);
        let w = c.j1 * c.y0 - c.j0 * c.y1;
        let want = 2.0 / (PI * x);
        assert!(rel(w, want) < 1e-10, "x = {x}: {w} vs {want}");
        x *= 1.0137;
    }
}

#[test]
fn branches_agree_at_switch_point() {
    for &x in &[7.999_999_999, 8.000_000_001] {
        let c = cylinder(x);
        assert!((c.j0 - j_integral(0, x)).abs() < 1e-13);
        assert!((c.j1 - j_integral(1, x)).abs() < 1e-13);
    }
}

#[test]
fn regular_h1_removes_pole() {
    for &x in &[1e-9, 1e-4, 0.1, 3.0, 20.0] {
        let c = cylinder(x);
        let h = h1_regular(x);
        assert!((h.im - c.y1 - 2.0 / (PI * x)).abs() <= 1e-12 * (2.0 / (PI * x)).max(1.0));
    }
    // Y1(x) + 2/(πx) ≈ (x/π)(ln(x/2) + γ − 1/2) for small x.
    let x = 1e-6;
    let want = x / PI * ((x / 2.0).ln() + 0.5772156649015329 - 0.5);
    assert!((h1_regular(x).im - want).abs() < 1e-15);
}

#[test]
fn phi_reference_value_and_errors() {
    let v = phi(1.0, [0.0, 0.0], [1.0, 0.0]).unwrap();
    assert!((v.re + 0.0220642411).abs() < 1e-10);
    assert!((v.im - 0.1912994172).abs() < 1e-8);
    assert!(phi(1.0, [0.3, 0.3], [0.3, 0.3]).is_err());
    assert!(phi_grad(1.0, [0.3, 0.3], [0.3, 0.3]).is_err());
}

fn laplace_residual(k: f64, x: [f64; 2], y: [f64; 2]) -> (C64, C64) {
    let h = 1e-3;
    let f = |dx: f64, dy: f64| phi(k, [x[0] + dx, x[1] + dy], y).unwrap();
    let c = f(0.0, 0.0);
    let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - c * 4.0) / (h * h);
    (lap + c * (k * k), c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_is_symmetric(x0 in -10.0..10.0f64, x1 in -10.0..10.0f64, y0 in -10.0..10.0f64, y1 in -10.0..10.0f64, k in 0.5..12.0f64) {
        prop_assume!((x0 - y0).hypot(x1 - y1) > 1e-6);
        let a = phi(k, [x0, x1], [y0, y1]).unwrap();
        let b = phi(k, [y0, y1], [x0, x1]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phi_solves_helmholtz(r in 1.0..6.0f64, t in 0.0..(2.0 * PI), k in 0.5..5.0f64) {
        let y = [0.4, -0.7];
        let x = [y[0] + r * t.cos(), y[1] + r * t.sin()];
        let (res, c) = laplace_residual(k, x, y);
        prop_assert!(res.norm() <= 1e-4 * c.norm(), "residual {} vs {}", res.norm(), c.norm());
    }

    #[test]
    fn phi_grad_matches_differences(r in 0.7..20.0f64, t in 0.0..(2.0 * PI), k in 1.0..5.0f64) {
        // offsets of at least half a wavelength
        let r = r.max(PI / k);
        let y = [1.0, 2.0];
        let x = [y[0] + r * t.cos(), y[1] + r * t.sin()];
        let g = phi_grad(k, x, y).unwrap();
        let h = 1e-5;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let fd = (phi(k, xp, y).unwrap() - phi(k, xm, y).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[d]).norm() <= 1e-6 * g[0].norm().hypot(g[1].norm()));
        }
    }

    #[test]
    fn hankel_imaginary_part_is_y(x in 1e-6..1e3f64) {
        let h = hankel1(0, x).unwrap();
        prop_assert_eq!(h.im, bessel_y(0, x).unwrap());
        let h = hankel1(1, x).unwrap();
        prop_assert_eq!(h.im, bessel_y(1, x).unwrap());
    }
}
