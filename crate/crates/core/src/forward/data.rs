//! Synthetic scattering data, the noise model, and the RTMD file format.

use std::io::{Read, Write};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::forward::bie::{BoundaryOperator, Incidence};
use crate::forward::collector::Collector;
use crate::forward::model::{check_off_surface, ForwardModel};
use crate::forward::BoundaryKind;
use crate::geometry::{acquisition_points, AcquisitionGeometry, Aperture, Point, Regime, SurfaceProfile};
use crate::greens::phi_field;
use crate::linalg::CMat;
use crate::specfun::C64;

pub const RTMD_MAGIC: &[u8; 4] = b"RTMD";
pub const RTMD_VERSION: u32 = 1;
/// Identifies the noise generator (ChaCha20 stream, Box–Muller pairs).
pub const NOISE_GENERATOR: &str = "chacha20-boxmuller-v1";

/// Measured data V(x_r, x_s) (near) or far-field differences (far), rows
/// indexed by receivers and columns by sources.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterData {
    pub kind: BoundaryKind,
    pub regime: Regime,
    pub k1: f64,
    pub k2: f64,
    pub background_radius: f64,
    pub r_s: f64,
    pub r_r: f64,
    pub noise_tau: f64,
    pub seed: u64,
    pub matrix: CMat,
}

impl ScatterData {
    pub fn n_r(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_s(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn aperture(&self) -> Aperture {
        aperture_for(self.kind)
    }

    /// Frobenius norm of the data matrix.
    pub fn norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.n_s() {
            for i in 0..self.n_r() {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    /// Checks that `g` describes the acquisition this data was recorded with.
    pub fn check_acquisition(&self, g: &AcquisitionGeometry) -> Result<()> {
        let mismatch = |what: &str| Err(Error::Format(format!("data/config mismatch: {what}")));
        if g.regime != self.regime {
            return mismatch("regime");
        }
        if g.aperture != self.aperture() {
            return mismatch("aperture");
        }
        if (g.background_radius - self.background_radius).abs() > 1e-12 * g.background_radius.max(1.0) {
            return mismatch("background radius R");
        }
        if self.regime == Regime::Near
            && ((g.r_s - self.r_s).abs() > 1e-12 * g.r_s || (g.r_r - self.r_r).abs() > 1e-12 * g.r_r)
        {
            return mismatch("source/receiver radii");
        }
        let (s, r) = acquisition_points(g)?;
        if s.len() != self.n_s() || r.len() != self.n_r() {
            return mismatch("number of sources or receivers");
        }
        Ok(())
    }

    /// Writes the RTMD binary format.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(RTMD_MAGIC)?;
        w.write_all(&RTMD_VERSION.to_le_bytes())?;
        w.write_all(&[self.kind.code(), regime_code(self.regime)])?;
        w.write_all(&(self.n_s() as u32).to_le_bytes())?;
        w.write_all(&(self.n_r() as u32).to_le_bytes())?;
        for v in [self.k1, self.k2, self.background_radius, self.r_s, self.r_r, self.noise_tau] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for i in 0..self.n_r() {
            for j in 0..self.n_s() {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != RTMD_MAGIC {
            return Err(Error::Format("not an RTMD file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != RTMD_VERSION {
            return Err(Error::Format(format!("unsupported RTMD version {version}")));
        }
        let mut codes = [0u8; 2];
        r.read_exact(&mut codes).map_err(truncated)?;
        let kind = BoundaryKind::from_code(codes[0])
            .ok_or_else(|| Error::Format(format!("unknown boundary kind byte {}", codes[0])))?;
        let regime = match codes[1] {
            0 => Regime::Near,
            1 => Regime::Far,
            c => return Err(Error::Format(format!("unknown regime byte {c}"))),
        };
        let n_s = read_u32(r)? as usize;
        let n_r = read_u32(r)? as usize;
        let k1 = read_f64(r)?;
        let k2 = read_f64(r)?;
        let background_radius = read_f64(r)?;
        let r_s = read_f64(r)?;
        let r_r = read_f64(r)?;
        let noise_tau = read_f64(r)?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(truncated)?;
        let seed = u64::from_le_bytes(b8);
        let mut vals = Vec::with_capacity(n_r * n_s);
        for _ in 0..n_r * n_s {
            let re = read_f64(r)?;
            let im = read_f64(r)?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Format("non-finite data entry".into()));
            }
            vals.push(C64::new(re, im));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after RTMD matrix".into()));
        }
        let matrix = CMat::from_fn(n_r, n_s, |i, j| vals[i * n_s + j]);
        Ok(Self { kind, regime, k1, k2, background_radius, r_s, r_r, noise_tau, seed, matrix })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice())
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn regime_code(r: Regime) -> u8 {
    match r {
        Regime::Near => 0,
        Regime::Far => 1,
    }
}

/// Impenetrable data lives on the upper semicircle, penetrable on the full circle.
pub fn aperture_for(kind: BoundaryKind) -> Aperture {
    match kind {
        BoundaryKind::Penetrable => Aperture::FullCircle,
        _ => Aperture::UpperSemicircle,
    }
}

pub fn frobenius(m: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Surface and background operators for one acquisition.
pub struct SurfacePair {
    pub surface: BoundaryOperator,
    /// None when the surface is the background itself.
    pub background: Option<BoundaryOperator>,
}

/// Evaluation radius the operators must cover for `g`.
pub fn required_coverage(model: &ForwardModel, g: &AcquisitionGeometry) -> f64 {
    match g.regime {
        Regime::Near => g.r_s.max(g.r_r),
        Regime::Far => model.collection_radius(g.background_radius),
    }
}

/// The Γ_R profile of an acquisition.
pub fn background_profile(g: &AcquisitionGeometry) -> SurfaceProfile {
    SurfaceProfile::gamma_r(g.background_radius)
}

fn validate(model: &ForwardModel, g: &AcquisitionGeometry, profile: &SurfaceProfile) -> Result<()> {
    if g.aperture != aperture_for(model.kind) {
        return Err(Error::Domain(format!(
            "{:?} data needs the {:?} aperture",
            model.kind,
            aperture_for(model.kind)
        )));
    }
    if !(g.background_radius > profile.support_halfwidth) && profile.dip_radius().is_none() {
        return Err(Error::Geometry(format!(
            "background radius {} must exceed the perturbation half-width {}",
            g.background_radius, profile.support_halfwidth
        )));
    }
    Ok(())
}

/// Builds the factorized operators for `profile` and Γ_R.
pub fn build_operators(profile: &SurfaceProfile, model: &ForwardModel, g: &AcquisitionGeometry) -> Result<SurfacePair> {
    validate(model, g, profile)?;
    let coverage = required_coverage(model, g);
    let bg_profile = background_profile(g);
    let background = model.operator(&bg_profile, coverage)?;
    if *profile == bg_profile {
        return Ok(SurfacePair { surface: background, background: None });
    }
    let surface = model.operator(profile, coverage)?;
    Ok(SurfacePair { surface, background: Some(background) })
}

impl SurfacePair {
    pub fn background(&self) -> &BoundaryOperator {
        self.background.as_ref().unwrap_or(&self.surface)
    }
}

/// Noise-free data for `profile`.
pub fn synthesize_data(profile: &SurfaceProfile, model: &ForwardModel, g: &AcquisitionGeometry) -> Result<ScatterData> {
    let ops = build_operators(profile, model, g)?;
    synthesize_with(&ops, model, g)
}

/// Noise-free data from prebuilt operators; one factorization per surface
/// serves all sources.
pub fn synthesize_with(ops: &SurfacePair, model: &ForwardModel, g: &AcquisitionGeometry) -> Result<ScatterData> {
    let (src, rcv) = acquisition_points(g)?;
    let matrix = match g.regime {
        Regime::Near => {
            let inc: Vec<Incidence> = src.iter().map(|&x| Incidence::Point(x)).collect();
            match &ops.background {
                None => CMat::zeros(rcv.len(), src.len()),
                Some(bg) => near_difference(&ops.surface, bg, &inc, &rcv)?,
            }
        }
        Regime::Far => {
            let rho = model.collection_radius(g.background_radius);
            let w = far_data(&ops.surface, rho, &src, &rcv)?;
            match &ops.background {
                None => CMat::zeros(rcv.len(), src.len()),
                Some(bg) => w - far_data(bg, rho, &src, &rcv)?,
            }
        }
    };
    Ok(ScatterData {
        kind: model.kind,
        regime: g.regime,
        k1: model.k1,
        k2: model.k2,
        background_radius: g.background_radius,
        r_s: if g.regime == Regime::Near { g.r_s } else { 1.0 },
        r_r: if g.regime == Regime::Near { g.r_r } else { 1.0 },
        noise_tau: 0.0,
        seed: 0,
        matrix,
    })
}

/// u(x_r, x_s; Γ) − u(x_r, x_s; Γ_R) with the shared parts of the two
/// reference fields cancelled before evaluation, so receivers may coincide
/// with sources.
fn near_difference(surface: &BoundaryOperator, bg: &BoundaryOperator, inc: &[Incidence], rcv: &[Point]) -> Result<CMat> {
    check_off_surface(surface, rcv)?;
    check_off_surface(bg, rcv)?;
    let mut v = &surface.potential_matrix(rcv) * &surface.solve(inc)? - &bg.potential_matrix(rcv) * &bg.solve(inc)?;
    for (j, &s) in inc.iter().enumerate() {
        for (i, &x) in rcv.iter().enumerate() {
            v[(i, j)] += reference_difference(surface, bg, s, x)?;
        }
    }
    Ok(v)
}

fn reference_difference(a: &BoundaryOperator, b: &BoundaryOperator, s: Incidence, x: Point) -> Result<C64> {
    let same = match (a.kind, s) {
        (BoundaryKind::Penetrable, Incidence::Point(xs) | Incidence::RawPoint(xs)) => {
            a.profile.is_above(xs) == b.profile.is_above(xs) && a.profile.is_above(x) == b.profile.is_above(x)
        }
        (_, Incidence::Point(_)) => a.uses_flat_reference(s) == b.uses_flat_reference(s),
        (_, Incidence::RawPoint(_)) => true,
        (_, Incidence::Plane(_)) => false,
    };
    if same {
        return Ok(C64::new(0.0, 0.0));
    }
    match (a.kind, s) {
        (BoundaryKind::Dirichlet | BoundaryKind::Neumann, Incidence::Point(xs)) => {
            let sign = if a.kind == BoundaryKind::Dirichlet { -1.0 } else { 1.0 };
            let image = phi_field(a.k1, x, [xs[0], -xs[1]]).value * sign;
            Ok(if a.uses_flat_reference(s) { image } else { -image })
        }
        _ => Ok(a.reference_at(s, x)?.value - b.reference_at(s, x)?.value),
    }
}

/// Matrix (receivers × sources) of w^∞(x̂_s, −x̂_r) for one surface.
pub fn far_data(op: &BoundaryOperator, rho: f64, src_dirs: &[Point], rcv_dirs: &[Point]) -> Result<CMat> {
    let col = Collector::new(op, rho)?;
    let inc: Vec<Incidence> = rcv_dirs.iter().map(|d| Incidence::Plane([-d[0], -d[1]])).collect();
    let dens = op.solve(&inc)?;
    let cauchy = col.cauchy_data(op, &inc, &dens)?;
    let ff = col.far_field(src_dirs, &cauchy)?;
    Ok(ff.transpose().to_owned())
}

/// Standard normal pairs from a seeded ChaCha20 stream.
struct Gaussian {
    rng: ChaCha20Rng,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    fn uniform_open(&mut self) -> f64 {
        // 53 random bits mapped into (0, 1).
        ((self.rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    fn pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        (r * t.cos(), r * t.sin())
    }
}

/// u_τ = u + τ·(β/‖β‖)·‖u‖ with Frobenius norms over the whole matrix and β
/// complex with independent standard-normal parts, drawn row-major.
pub fn add_noise(data: &ScatterData, tau: f64, seed: u64) -> Result<ScatterData> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("noise level must be nonnegative, got {tau}")));
    }
    let mut out = data.clone();
    out.noise_tau = tau;
    out.seed = seed;
    if tau == 0.0 {
        return Ok(out);
    }
    let (nr, ns) = (data.n_r(), data.n_s());
    let mut g = Gaussian::new(seed);
    let mut beta = vec![C64::new(0.0, 0.0); nr * ns];
    for b in beta.iter_mut() {
        let (re, im) = g.pair();
        *b = C64::new(re, im);
    }
    let bnorm = beta.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let scale = tau * data.norm() / bnorm;
    for i in 0..nr {
        for j in 0..ns {
            out.matrix[(i, j)] += beta[i * ns + j] * scale;
        }
    }
    Ok(out)
}
