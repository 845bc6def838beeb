//! Bessel and Hankel functions of orders zero and one, and the free-space
//! fundamental solution of the Helmholtz equation in the plane.
//!
//! Arguments up to 8 are summed from the ascending series; beyond that the
//! Hankel asymptotic form is used with rational approximations of the
//! modulus/phase polynomials P and Q.  The trigonometric factors are built
//! from `sin x` and `cos x` directly so that large arguments keep full
//! accuracy near the zeros.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type C64 = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 8.0;

/// The four cylinder functions J0, J1, Y0, Y1 at one argument.
#[derive(Clone, Copy, Debug)]
pub struct Cylinder {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
    /// Y1(x) + 2/(πx), which stays bounded as x → 0.
    pub y1_reg: f64,
}

/// Bessel function of the first kind, J_order(x) for order 0 or 1 and x ≥ 0.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j needs a finite x >= 0, got {x}")));
    }
    let c = if x == 0.0 {
        return match order {
            0 => Ok(1.0),
            1 => Ok(0.0),
            _ => Err(Error::Domain(format!("bessel_j order {order} not in {{0, 1}}"))),
        };
    } else {
        cylinder(x)
    };
    match order {
        0 => Ok(c.j0),
        1 => Ok(c.j1),
        _ => Err(Error::Domain(format!("bessel_j order {order} not in {{0, 1}}"))),
    }
}

/// Bessel function of the second kind, Y_order(x) for order 0 or 1 and x > 0.
pub fn bessel_y(order: i32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_y needs a finite x > 0, got {x}")));
    }
    let c = cylinder(x);
    match order {
        0 => Ok(c.y0),
        1 => Ok(c.y1),
        _ => Err(Error::Domain(format!("bessel_y order {order} not in {{0, 1}}"))),
    }
}

/// Hankel function of the first kind, H_order(x) = J_order(x) + i Y_order(x).
pub fn hankel1(order: i32, x: f64) -> Result<C64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "hankel1 needs a finite x > 0, got {x} (singular self-interaction)"
        )));
    }
    let c = cylinder(x);
    match order {
        0 => Ok(C64::new(c.j0, c.y0)),
        1 => Ok(C64::new(c.j1, c.y1)),
        _ => Err(Error::Domain(format!("hankel1 order {order} not in {{0, 1}}"))),
    }
}

/// Φ_κ(x, y) = (i/4) H0(κ|x − y|).
pub fn phi(k: f64, x: Point, y: Point) -> Result<C64> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Coincident);
    }
    let (h0, _) = hankel01(k * r);
    Ok(C64::new(0.0, 0.25) * h0)
}

/// Gradient of Φ_κ(x, y) with respect to x.
pub fn phi_grad(k: f64, x: Point, y: Point) -> Result<[C64; 2]> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Coincident);
    }
    let (_, h1) = hankel01(k * r);
    let s = C64::new(0.0, -0.25 * k) * h1 / r;
    Ok([s * (x[0] - y[0]), s * (x[1] - y[1])])
}

#[inline]
fn dist(x: Point, y: Point) -> f64 {
    (x[0] - y[0]).hypot(x[1] - y[1])
}

/// H0(x) and H1(x) together; x must be positive.
#[inline]
pub fn hankel01(x: f64) -> (C64, C64) {
    let c = cylinder(x);
    (C64::new(c.j0, c.y0), C64::new(c.j1, c.y1))
}

/// H1(x) + 2i/(πx): the Hankel function with its pole removed.
#[inline]
pub fn h1_regular(x: f64) -> C64 {
    let c = cylinder(x);
    C64::new(c.j1, c.y1_reg)
}

/// All four cylinder functions at x > 0.
pub fn cylinder(x: f64) -> Cylinder {
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

fn series(x: f64) -> Cylinder {
    let q = 0.25 * x * x;
    // J0 and Y0
    let mut t = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut ysum = 0.0;
    // J1 and Y1: s_k = (-q)^k / (k! (k+1)!)
    let mut s = 1.0;
    let mut j1 = 1.0;
    let mut psi_sum = 1.0 - 2.0 * EULER_GAMMA; // ψ(1) + ψ(2)
    let mut y1sum = psi_sum;
    let mut k = 1.0;
    loop {
        t *= -q / (k * k);
        harmonic += 1.0 / k;
        j0 += t;
        ysum += harmonic * t;
        s *= -q / (k * (k + 1.0));
        psi_sum += 1.0 / k + 1.0 / (k + 1.0);
        j1 += s;
        y1sum += psi_sum * s;
        if t.abs() < 1e-18 && s.abs() < 1e-18 && k > 2.0 {
            break;
        }
        k += 1.0;
    }
    let half = 0.5 * x;
    let j1 = half * j1;
    let ln_half = half.ln();
    let y0 = (2.0 / PI) * ((ln_half + EULER_GAMMA) * j0 - ysum);
    let y1_reg = (2.0 / PI) * ln_half * j1 - half * y1sum / PI;
    Cylinder { j0, j1, y0, y1: y1_reg - 2.0 / (PI * x), y1_reg }
}

fn asymptotic(x: f64) -> Cylinder {
    let (s, c) = x.sin_cos();
    // c + s and s - c, one of which may suffer cancellation
    let (cps, smc) = if s * c < 0.0 {
        let smc = s - c;
        (-(2.0 * x).cos() / smc, smc)
    } else {
        let cps = c + s;
        (cps, -(2.0 * x).cos() / cps)
    };
    let norm = 1.0 / (PI * x).sqrt();

    let z = 25.0 / (x * x);
    let w = 5.0 / x;
    let p0 = polevl(z, &PP0) / polevl(z, &PQ0);
    let q0 = w * polevl(z, &QP0) / p1evl(z, &QQ0);
    let j0 = norm * (p0 * cps - q0 * smc);
    let y0 = norm * (p0 * smc + q0 * cps);

    let z = 1.0 / (x * x);
    let p1 = 1.0 + horner(z, &PR8) / (1.0 + z * horner(z, &PS8));
    let q1 = (0.375 + horner(z, &QR8) / (1.0 + z * horner(z, &QS8))) / x;
    let j1 = norm * (p1 * smc + q1 * cps);
    let y1 = norm * (q1 * smc - p1 * cps);
    Cylinder { j0, j1, y0, y1, y1_reg: y1 + 2.0 / (PI * x) }
}

/// Polynomial with coefficients in ascending powers.
#[inline]
fn horner(z: f64, c: &[f64]) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * z + a)
}

/// Polynomial with coefficients in descending powers.
#[inline]
fn polevl(z: f64, c: &[f64]) -> f64 {
    c.iter().fold(0.0, |acc, &a| acc * z + a)
}

/// Monic polynomial, leading coefficient omitted, descending powers.
#[inline]
fn p1evl(z: f64, c: &[f64]) -> f64 {
    c.iter().fold(1.0, |acc, &a| acc * z + a)
}

// Order zero, argument > 5: P(z)/Q(z) in z = 25/x².
const PP0: [f64; 7] = [
    7.969_367_292_973_471e-4,
    8.283_523_921_074_408e-2,
    1.239_533_716_464_143,
    5.447_250_030_587_687,
    8.747_165_001_998_17,
    5.303_240_382_353_949,
    1.0,
];
const PQ0: [f64; 7] = [
    9.244_088_105_588_637e-4,
    8.562_884_743_544_745e-2,
    1.253_527_439_010_589_5,
    5.470_977_403_304_171,
    8.761_908_832_370_695,
    5.306_052_882_353_947,
    1.0,
];
const QP0: [f64; 8] = [
    -1.136_638_388_984_691_6e-2,
    -1.282_527_186_705_093_1,
    -1.955_395_442_577_359_7e1,
    -9.320_601_521_237_683e1,
    -1.776_811_679_804_880_6e2,
    -1.470_775_051_549_511_8e2,
    -5.141_053_267_665_993e1,
    -6.050_143_506_007_285,
];
const QQ0: [f64; 7] = [
    6.431_782_561_181_78e1,
    8.564_300_259_769_806e2,
    3.882_401_836_054_016_3e3,
    7.240_467_741_956_525e3,
    5.930_727_011_873_169e3,
    2.062_093_316_603_278_3e3,
    2.420_057_402_402_914e2,
];

// Order one, argument ≥ 8: corrections to P and Q in z = 1/x².
const PR8: [f64; 6] = [
    0.0,
    1.171_874_999_999_886_5e-1,
    1.323_948_065_930_735_8e1,
    4.120_518_543_073_785_6e2,
    3.874_745_389_139_605_3e3,
    7.914_479_540_318_917e3,
];
const PS8: [f64; 5] = [
    1.142_073_703_756_784_1e2,
    3.650_930_834_208_534_6e3,
    3.695_620_602_690_334_6e4,
    9.760_279_359_349_508e4,
    3.080_427_206_278_888e4,
];
const QR8: [f64; 6] = [
    0.0,
    -1.025_390_624_999_927_1e-1,
    -1.627_175_345_445_9e1,
    -7.596_017_225_139_501e2,
    -1.184_980_667_024_295_9e4,
    -4.843_851_242_857_503_5e4,
];
const QS8: [f64; 6] = [
    1.613_953_697_007_229e2,
    7.825_385_999_233_485e3,
    1.338_753_362_872_495_8e5,
    7.196_577_236_832_409e5,
    6.666_012_326_177_764e5,
    -2.944_902_643_038_346_4e5,
];

/// γ_κ = e^{iπ/4}/√(8κπ), the far-field constant of Φ_κ.
pub fn far_field_constant(k: f64) -> C64 {
    C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2) / (8.0 * k * PI).sqrt()
}
