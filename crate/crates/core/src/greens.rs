//! Background fields: half-plane image Green's functions, plane waves over a
//! flat plane, Fresnel fields and the flat two-layer Green's function.
//!
//! Fields relative to the dipped surface Γ_R are built on top of these by the
//! boundary-integral solvers in [`crate::forward`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::panel_rule;
use crate::specfun::{hankel01, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Boundary condition of an impenetrable surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfPlaneKind {
    Dirichlet,
    Neumann,
}

impl HalfPlaneKind {
    /// −1 for the odd (Dirichlet) image, +1 for the even (Neumann) one.
    #[inline]
    pub fn image_sign(self) -> f64 {
        match self {
            HalfPlaneKind::Dirichlet => -1.0,
            HalfPlaneKind::Neumann => 1.0,
        }
    }
}

/// Value and gradient of a field at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldValue {
    pub value: C64,
    pub grad: [C64; 2],
}

impl FieldValue {
    pub const ZERO: FieldValue = FieldValue { value: C64 { re: 0.0, im: 0.0 }, grad: [C64 { re: 0.0, im: 0.0 }; 2] };

    #[inline]
    pub fn normal(&self, n: Point) -> C64 {
        self.grad[0] * n[0] + self.grad[1] * n[1]
    }
}

impl std::ops::Add for FieldValue {
    type Output = FieldValue;
    fn add(self, o: FieldValue) -> FieldValue {
        FieldValue { value: self.value + o.value, grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]] }
    }
}

impl std::ops::Sub for FieldValue {
    type Output = FieldValue;
    fn sub(self, o: FieldValue) -> FieldValue {
        FieldValue { value: self.value - o.value, grad: [self.grad[0] - o.grad[0], self.grad[1] - o.grad[1]] }
    }
}

impl std::ops::Mul<C64> for FieldValue {
    type Output = FieldValue;
    fn mul(self, s: C64) -> FieldValue {
        FieldValue { value: self.value * s, grad: [self.grad[0] * s, self.grad[1] * s] }
    }
}

/// Φ_κ(x, y) and its gradient in x, without the coincidence check.
#[inline]
pub fn phi_field(k: f64, x: Point, y: Point) -> FieldValue {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    let (h0, h1) = hankel01(k * r);
    let s = C64::new(0.0, -0.25 * k) * h1 / r;
    FieldValue { value: C64::new(0.0, 0.25) * h0, grad: [s * d[0], s * d[1]] }
}

/// Φ_κ(x, y) ∓ Φ_κ(x, y′) with y′ = (y1, −y2): − for Dirichlet, + for Neumann.
pub fn halfplane_green(kind: HalfPlaneKind, k: f64, x: Point, y: Point) -> Result<C64> {
    Ok(halfplane_green_field(kind, k, x, y)?.value)
}

/// Value and x-gradient of the half-plane Green's function.
pub fn halfplane_green_field(kind: HalfPlaneKind, k: f64, x: Point, y: Point) -> Result<FieldValue> {
    let yi = [y[0], -y[1]];
    if x == y || x == yi {
        return Err(Error::Coincident);
    }
    let a = phi_field(k, x, y);
    let b = phi_field(k, x, yi);
    Ok(a + b * C64::from(kind.image_sign()))
}

/// w_{0,α}(x, d) = e^{iκx·d} ∓ e^{iκx·d^r} with d^r = (d1, −d2).
pub fn planewave_background_impenetrable(kind: HalfPlaneKind, k: f64, x: Point, d: Point) -> Result<FieldValue> {
    if !(d[1] < 0.0) {
        return Err(Error::Domain(format!("incident direction must point downward, got {d:?}")));
    }
    Ok(planewave_pair(kind.image_sign(), k, x, d))
}

#[inline]
fn planewave_pair(sign: f64, k: f64, x: Point, d: Point) -> FieldValue {
    let e1 = (I * (k * (x[0] * d[0] + x[1] * d[1]))).exp();
    let e2 = (I * (k * (x[0] * d[0] - x[1] * d[1]))).exp() * sign;
    let ik = I * k;
    FieldValue { value: e1 + e2, grad: [ik * d[0] * (e1 + e2), ik * d[1] * (e1 - e2)] }
}

/// Reflection/transmission data of a plane wave at the flat interface x2 = 0.
#[derive(Clone, Copy, Debug)]
pub struct FresnelCoefficients {
    pub r: C64,
    pub t: C64,
    /// Transmitted direction; the second component is imaginary beyond the
    /// critical angle.
    pub dt: [C64; 2],
    /// arccos(κ2/κ1) when κ1 > κ2.
    pub critical_angle: Option<f64>,
}

/// Fresnel coefficients for incidence angle θ (direction (cos θ, sin θ)):
/// incidence from above for θ ∈ (π, 2π), from below for θ ∈ (0, π).
///
/// Beyond the critical angle the transmitted wave is taken to decay away from
/// the interface.
pub fn fresnel(k1: f64, k2: f64, theta: f64) -> Result<FresnelCoefficients> {
    if !(theta > 0.0 && theta < 2.0 * PI) || (theta - PI).abs() < 1e-14 {
        return Err(Error::Domain(format!("incident angle {theta} must lie in (0, 2π) minus {{π}}")));
    }
    let (s, c) = theta.sin_cos();
    let from_above = s < 0.0;
    let (ka, kb) = if from_above { (k1, k2) } else { (k2, k1) };
    let kx = ka * c;
    let beta_a = ka * s.abs();
    let disc = kb * kb - kx * kx;
    if disc.abs() <= 1e-12 * kb * kb {
        return Err(Error::Domain(format!("incident angle {theta} is at the critical angle; perturb it")));
    }
    let beta_b = if disc > 0.0 { C64::new(disc.sqrt(), 0.0) } else { C64::new(0.0, (-disc).sqrt()) };
    let r = (beta_a - beta_b) / (beta_a + beta_b);
    let t = r + 1.0;
    // Transmitted wave travels away from the interface (down when incident from above).
    let sign = if from_above { -1.0 } else { 1.0 };
    let dt = [C64::new(kx / kb, 0.0), beta_b * (sign / kb)];
    let critical_angle = if k1 > k2 { Some((k2 / k1).acos()) } else { None };
    Ok(FresnelCoefficients { r, t, dt, critical_angle })
}

/// The flat two-layer total field w_0(x, d) for a plane wave of direction d,
/// with κ1 above x2 = 0 and κ2 below.  Points on x2 = 0 count as above.
pub fn planewave_background_penetrable(k1: f64, k2: f64, x: Point, d: Point) -> Result<FieldValue> {
    planewave_penetrable_branch(k1, k2, x, d, x[1] >= 0.0)
}

/// The closed-form expression of w_0 belonging to the upper (`upper`) or
/// lower half-plane, evaluated at any x.  Across a rough interface the
/// expression of one side is continued into the other.
pub fn planewave_penetrable_branch(k1: f64, k2: f64, x: Point, d: Point, upper: bool) -> Result<FieldValue> {
    let theta = d[1].atan2(d[0]).rem_euclid(2.0 * PI);
    let f = fresnel(k1, k2, theta)?;
    let from_above = d[1] < 0.0;
    let (ka, kb) = if from_above { (k1, k2) } else { (k2, k1) };
    if upper == from_above {
        // incident plus reflected, in the medium of incidence
        let dr = [d[0], -d[1]];
        let e1 = (I * (ka * (x[0] * d[0] + x[1] * d[1]))).exp();
        let e2 = (I * (ka * (x[0] * dr[0] + x[1] * dr[1]))).exp() * f.r;
        let ik = I * ka;
        Ok(FieldValue { value: e1 + e2, grad: [ik * d[0] * (e1 + e2), ik * d[1] * (e1 - e2)] })
    } else {
        let phase = (f.dt[0] * x[0] + f.dt[1] * x[1]) * (I * kb);
        let e = phase.exp() * f.t;
        let ik = I * kb;
        Ok(FieldValue { value: e, grad: [ik * f.dt[0] * e, ik * f.dt[1] * e] })
    }
}

/// Two fluids separated by x2 = 0: κ1 above, κ2 below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLayerMedium {
    pub k1: f64,
    pub k2: f64,
}

impl TwoLayerMedium {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0) || !k1.is_finite() || !k2.is_finite() {
            return Err(Error::Domain(format!("wavenumbers must be positive, got {k1}, {k2}")));
        }
        Ok(Self { k1, k2 })
    }

    /// σ = κ1² − κ2².
    pub fn contrast(&self) -> f64 {
        self.k1 * self.k1 - self.k2 * self.k2
    }
}

/// The flat two-layer Green's function v_0(x, y) for the interface x2 = 0.
pub fn twolayer_flat_green(m: &TwoLayerMedium, x: Point, y: Point) -> Result<C64> {
    Ok(twolayer_flat_green_field(m, x, y)?.value)
}

/// Value of v_0(x, y) with its gradient in x.
///
/// The reflected or transmitted part is the spectral integral
/// (i/4π)∫ I(ξ) e^{iξ(x1−y1)} dξ; the real axis is used up to 1.5·max κ and
/// each of the two oscillatory halves is continued along a ray in the
/// complex plane on which it decays without oscillating.
pub fn twolayer_flat_green_field(m: &TwoLayerMedium, x: Point, y: Point) -> Result<FieldValue> {
    if x == y {
        return Err(Error::Coincident);
    }
    let x_up = x[1] >= 0.0;
    let y_up = y[1] >= 0.0;
    let mut out = FieldValue::ZERO;
    if x_up == y_up {
        let k = if x_up { m.k1 } else { m.k2 };
        out = phi_field(k, x, y);
    }
    if m.k1 == m.k2 {
        if x_up != y_up {
            out = phi_field(m.k1, x, y);
        }
        return Ok(out);
    }
    let spec = spectral_part(m, x, y);
    Ok(out + spec)
}

/// The part of v_0(x, y) left after removing the free-space term of the
/// medium both points share (all of v_0 when they lie on opposite sides).
/// Smooth in x across x = y, so it may be evaluated there.
pub fn twolayer_flat_green_reflected(m: &TwoLayerMedium, x: Point, y: Point) -> Result<FieldValue> {
    let same = (x[1] >= 0.0) == (y[1] >= 0.0);
    if same && x[1] == 0.0 && y[1] == 0.0 {
        return Err(Error::Coincident);
    }
    if m.k1 == m.k2 {
        return if same { Ok(FieldValue::ZERO) } else { twolayer_flat_green_field(m, x, y) };
    }
    Ok(spectral_part(m, x, y))
}

/// Which exponent structure the spectral integrand has.
#[derive(Clone, Copy)]
enum Config {
    /// Same side in the medium with wavenumber index s (0 upper, 1 lower);
    /// exponent iβ_s h.
    Same { upper: bool, h: f64 },
    /// Opposite sides; exponent iβ1 a + iβ2 b with a the height of the
    /// upper point and b the depth of the lower one.
    Cross { a: f64, b: f64 },
}

/// β(ξ) = √(κ² − ξ²) with nonnegative imaginary part, for real ξ ≥ 0.
#[inline]
fn beta_real(k: f64, xi: f64) -> C64 {
    let d = k * k - xi * xi;
    if d >= 0.0 {
        C64::new(d.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-d).sqrt())
    }
}

/// β(ξ) for complex ξ with Re ξ > κ, continued from the real axis.
#[inline]
fn beta_complex(k: f64, xi: C64) -> C64 {
    I * (xi - k).sqrt() * (xi + k).sqrt()
}

/// Integrand pieces: amplitude A(ξ), and the derivative factors of the
/// exponent with respect to x2.
#[inline]
fn integrand(m: &TwoLayerMedium, cfg: Config, x_up: bool, b1: C64, b2: C64) -> (C64, C64) {
    match cfg {
        Config::Same { upper, h } => {
            let (bs, bo) = if upper { (b1, b2) } else { (b2, b1) };
            let refl = (bs - bo) / (bs + bo);
            let amp = refl * (I * bs * h).exp() / bs;
            // d h / d x2 = +1 above, −1 below
            let dx2 = if upper { I * bs } else { -I * bs };
            (amp, dx2)
        }
        Config::Cross { a, b } => {
            let amp = (I * (b1 * a + b2 * b)).exp() * 2.0 / (b1 + b2);
            let dx2 = if x_up { I * b1 } else { -I * b2 };
            let _ = m;
            (amp, dx2)
        }
    }
}

fn spectral_part(m: &TwoLayerMedium, x: Point, y: Point) -> FieldValue {
    let x_up = x[1] >= 0.0;
    let y_up = y[1] >= 0.0;
    let dx = x[0] - y[0];
    let big_x = dx.abs();
    let sgn = if dx >= 0.0 { 1.0 } else { -1.0 };
    let (cfg, h) = if x_up == y_up {
        let h = x[1].abs() + y[1].abs();
        (Config::Same { upper: x_up, h }, h)
    } else {
        let (a, b) = if x_up { (x[1], -y[1]) } else { (y[1], -x[1]) };
        (Config::Cross { a, b }, a + b)
    };
    let (klo, khi) = if m.k1 < m.k2 { (m.k1, m.k2) } else { (m.k2, m.k1) };
    let xi0 = 1.5 * khi;
    let rule = panel_rule();

    // Accumulators: ∫ A cos(ξX), ∫ A ξ sin(ξX), ∫ A·dx2 cos(ξX) over the real part.
    let mut s_val = C64::new(0.0, 0.0);
    let mut s_d1 = C64::new(0.0, 0.0);
    let mut s_d2 = C64::new(0.0, 0.0);

    let mut add_real = |xi: f64, w: f64| {
        let b1 = beta_real(m.k1, xi);
        let b2 = beta_real(m.k2, xi);
        let (amp, dz) = integrand(m, cfg, x_up, b1, b2);
        let (sn, cs) = (xi * big_x).sin_cos();
        let a = amp * w;
        // e^{iξX} + e^{−iξX} = 2cos, derivative in X: iξ(e^{iξX} − e^{−iξX}) = −2ξ sin
        s_val += a * (2.0 * cs);
        s_d1 += a * (-2.0 * xi * sn);
        s_d2 += a * dz * (2.0 * cs);
    };

    let panels_for = |len: f64| -> usize {
        let cycles = len * (big_x + h) / (2.0 * PI);
        2 + (2.0 * cycles).ceil() as usize
    };

    // [0, klo] with ξ = klo·sin t, graded toward klo where the other branch
    // point sits at distance khi − klo.
    {
        let np = panels_for(klo);
        let fine = 0.1 * (2.0 * (khi - klo) / klo).sqrt();
        for (ta, tb) in graded_cuts(np, 0.5 * PI, fine).into_iter().map(|(a, b)| (0.5 * PI - b, 0.5 * PI - a)) {
            let ht = tb - ta;
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let t = ta + ht * 0.5 * (u + 1.0);
                let (st, ct) = t.sin_cos();
                add_real(klo * st, wu * 0.5 * ht * klo * ct);
            }
        }
    }
    // [klo, khi] with ξ = klo + (khi − klo)(1 − cos t)/2
    if khi > klo {
        let np = panels_for(khi - klo);
        let ht = PI / np as f64;
        let half = 0.5 * (khi - klo);
        for p in 0..np {
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let t = ht * (p as f64 + 0.5 * (u + 1.0));
                let (st, ct) = t.sin_cos();
                add_real(klo + half * (1.0 - ct), wu * 0.5 * ht * half * st);
            }
        }
    }
    // [khi, ξ0] with ξ = khi + (ξ0 − khi)u², graded toward khi
    {
        let np = panels_for(xi0 - khi);
        let span = xi0 - khi;
        let fine = 0.1 * ((khi - klo) / span).sqrt();
        for (ua, ub) in graded_cuts(np, 1.0, fine) {
            let hu = ub - ua;
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let v = ua + hu * 0.5 * (u + 1.0);
                add_real(khi + span * v * v, wu * 0.5 * hu * 2.0 * span * v);
            }
        }
    }

    // Tails: ξ = ξ0 + t e^{±iφ}, t ≥ 0.
    let rho = big_x.hypot(h);
    let phi = big_x.atan2(h);
    let t_end = 40.0 / rho.max(1e-300);
    let mut cuts = vec![0.0];
    let mut t = (1.0 / rho.max(1e-300)).min(khi);
    while t < t_end {
        cuts.push(t);
        t *= 2.0;
    }
    cuts.push(t_end.max(cuts[cuts.len() - 1] * 1.0001));
    for (dir_sign, exp_sign) in [(1.0f64, 1.0f64), (-1.0, -1.0)] {
        let e = C64::from_polar(1.0, dir_sign * phi);
        for w in cuts.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let ht = 0.5 * (tb - ta);
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let tt = ta + ht * (u + 1.0);
                let xi = e * tt + xi0;
                let b1 = beta_complex(m.k1, xi);
                let b2 = beta_complex(m.k2, xi);
                let (amp, dz) = integrand(m, cfg, x_up, b1, b2);
                let osc = (I * xi * (exp_sign * big_x)).exp();
                let a = amp * osc * e * (wu * ht);
                s_val += a;
                s_d1 += a * I * xi * exp_sign;
                s_d2 += a * dz;
            }
        }
    }
    let pref = I / (4.0 * PI);
    FieldValue { value: pref * s_val, grad: [pref * s_d1 * sgn, pref * s_d2] }
}

/// `np` equal panels on [0, len] with the first one split dyadically until
/// its width is at most `fine`.
fn graded_cuts(np: usize, len: f64, fine: f64) -> Vec<(f64, f64)> {
    let h = len / np as f64;
    let mut cuts = Vec::with_capacity(np + 8);
    let mut b = h;
    while b > fine && b > 1e-12 * len {
        cuts.push((0.5 * b, b));
        b *= 0.5;
    }
    cuts.push((0.0, b));
    cuts.reverse();
    cuts.extend((1..np).map(|p| (p as f64 * h, (p + 1) as f64 * h)));
    cuts
}

/// Far-field constant γ_κ = e^{iπ/4}/√(8κπ).
pub use crate::specfun::far_field_constant;
