//! Run configuration: desk-scale defaults, presets, a sectioned TOML file and
//! command-line overrides, with the origin of every value recorded.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rtm_core::forward::data::aperture_for;
use rtm_core::forward::{BoundaryKind, ForwardModel, SolverSettings};
use rtm_core::geometry::{acquisition_points, AcquisitionGeometry, ImageGrid, Regime, SurfaceProfile};

use crate::exit::CliError;

/// Every key the file format accepts, by section.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("surface", &["profile", "table", "base_shift"]),
    ("medium", &["kind", "k1", "k2"]),
    ("acquisition", &["regime", "background_radius", "r_s", "r_r", "n_s", "n_r"]),
    ("solver", &["nodes_per_wavelength", "corner_levels", "margin_wavelengths", "ramp_wavelengths", "eta"]),
    ("imaging", &["x1_min", "x1_max", "x2_min", "x2_max", "n1", "n2", "tolerance_wavelengths"]),
    ("noise", &["tau", "seed"]),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    DeskScale,
    PaperScale,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "desk-scale" => Some(Preset::DeskScale),
            "paper-scale" => Some(Preset::PaperScale),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::DeskScale => "desk-scale",
            Preset::PaperScale => "paper-scale",
        }
    }
}

/// Where a parameter value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    Default,
    Preset,
    File,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Default => "default",
            Origin::Preset => "preset",
            Origin::File => "file",
            Origin::Flag => "flag",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileChoice {
    F1,
    F2,
    F3,
    Flat,
    GammaR,
    Table,
}

impl ProfileChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "f1" => Some(ProfileChoice::F1),
            "f2" => Some(ProfileChoice::F2),
            "f3" => Some(ProfileChoice::F3),
            "flat" => Some(ProfileChoice::Flat),
            "gammaR" | "gamma_r" => Some(ProfileChoice::GammaR),
            "table" => Some(ProfileChoice::Table),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ProfileChoice::F1 => "f1",
            ProfileChoice::F2 => "f2",
            ProfileChoice::F3 => "f3",
            ProfileChoice::Flat => "flat",
            ProfileChoice::GammaR => "gammaR",
            ProfileChoice::Table => "table",
        }
    }
}

/// Fully resolved parameters of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub profile: ProfileChoice,
    pub table: Option<PathBuf>,
    pub base_shift: f64,
    pub kind: BoundaryKind,
    pub k1: f64,
    pub k2: f64,
    pub regime: Regime,
    pub background_radius: f64,
    pub r_s: f64,
    pub r_r: f64,
    pub n_s: usize,
    pub n_r: usize,
    pub settings: SolverSettings,
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub n1: usize,
    pub n2: usize,
    pub tolerance_wavelengths: f64,
    pub tau: f64,
    pub seed: u64,
    origins: BTreeMap<String, Origin>,
}

/// Values given on the command line; `None` leaves the resolved value alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub regime: Option<Regime>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn desk_scale() -> Self {
        let mut c = Self {
            preset: Preset::DeskScale,
            profile: ProfileChoice::F1,
            table: None,
            base_shift: 0.0,
            kind: BoundaryKind::Dirichlet,
            k1: 5.0,
            k2: 2.5,
            regime: Regime::Near,
            background_radius: 20.0,
            r_s: 30.0,
            r_r: 40.0,
            n_s: 64,
            n_r: 64,
            settings: SolverSettings::default(),
            x1_range: (-5.0, 5.0),
            x2_range: (-1.5, 1.0),
            n1: 128,
            n2: 32,
            tolerance_wavelengths: 0.5,
            tau: 0.0,
            seed: 0,
            origins: BTreeMap::new(),
        };
        for (section, keys) in SCHEMA {
            for key in *keys {
                c.origins.insert(format!("{section}.{key}"), Origin::Default);
            }
        }
        c
    }

    fn apply_preset(&mut self, p: Preset) {
        self.preset = p;
        if p == Preset::PaperScale {
            self.k1 = 10.0;
            self.k2 = 5.0;
            self.background_radius = 95.0;
            self.r_s = 150.0;
            self.r_r = 200.0;
            self.n_s = 1024;
            self.n_r = 1024;
            for key in [
                "medium.k1",
                "medium.k2",
                "acquisition.background_radius",
                "acquisition.r_s",
                "acquisition.r_r",
                "acquisition.n_s",
                "acquisition.n_r",
            ] {
                self.origins.insert(key.into(), Origin::Preset);
            }
        }
    }

    /// Defaults, then the preset, then the file, then the flags.
    pub fn resolve(preset: Preset, file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut c = Self::desk_scale();
        c.apply_preset(preset);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
            c.apply_text(&text, path.parent())?;
        }
        // Penetrable data uses twice as many transducers at paper scale.
        if c.preset == Preset::PaperScale && c.kind == BoundaryKind::Penetrable {
            for (key, n) in [("acquisition.n_s", &mut c.n_s), ("acquisition.n_r", &mut c.n_r)] {
                if c.origins[key] == Origin::Preset {
                    *n = 2048;
                }
            }
        }
        if let Some(r) = overrides.regime {
            c.regime = r;
            c.origins.insert("acquisition.regime".into(), Origin::Flag);
        }
        if let Some(s) = overrides.seed {
            c.seed = s;
            c.origins.insert("noise.seed".into(), Origin::Flag);
        }
        c.validate()?;
        Ok(c)
    }

    /// Applies a TOML document; relative table paths resolve against `base`.
    pub fn apply_text(&mut self, text: &str, base: Option<&Path>) -> Result<(), CliError> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config(format!("config syntax: {e}")))?;
        for (section, body) in &doc {
            let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == section) else {
                return Err(CliError::config(format!("unknown config section [{section}]")));
            };
            let toml::Value::Table(body) = body else {
                return Err(CliError::config(format!("config key {section} must be a section")));
            };
            for (key, value) in body {
                if !keys.contains(&key.as_str()) {
                    return Err(CliError::config(format!("unknown config key {section}.{key}")));
                }
                let name = format!("{section}.{key}");
                self.set(&name, value, base)?;
                self.origins.insert(name, Origin::File);
            }
        }
        Ok(())
    }

    fn set(&mut self, name: &str, v: &toml::Value, base: Option<&Path>) -> Result<(), CliError> {
        let bad = |what: &str| CliError::config(format!("config key {name}: expected {what}, got {v}"));
        let real = || v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(|| bad("a number"));
        let count = || v.as_integer().filter(|&i| i >= 0).map(|i| i as usize).ok_or_else(|| bad("a nonnegative integer"));
        let text = || v.as_str().ok_or_else(|| bad("a string"));
        match name {
            "surface.profile" => {
                self.profile = ProfileChoice::parse(text()?).ok_or_else(|| bad("one of f1, f2, f3, flat, gammaR, table"))?
            }
            "surface.table" => {
                let p = PathBuf::from(text()?);
                self.table = Some(match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                });
            }
            "surface.base_shift" => self.base_shift = real()?,
            "medium.kind" => self.kind = BoundaryKind::parse(text()?).ok_or_else(|| bad("dirichlet, neumann or penetrable"))?,
            "medium.k1" => self.k1 = real()?,
            "medium.k2" => self.k2 = real()?,
            "acquisition.regime" => self.regime = parse_regime(text()?).ok_or_else(|| bad("near or far"))?,
            "acquisition.background_radius" => self.background_radius = real()?,
            "acquisition.r_s" => self.r_s = real()?,
            "acquisition.r_r" => self.r_r = real()?,
            "acquisition.n_s" => self.n_s = count()?,
            "acquisition.n_r" => self.n_r = count()?,
            "solver.nodes_per_wavelength" => self.settings.nodes_per_wavelength = real()?,
            "solver.corner_levels" => self.settings.corner_levels = count()? as u32,
            "solver.margin_wavelengths" => self.settings.margin_wavelengths = real()?,
            "solver.ramp_wavelengths" => self.settings.ramp_wavelengths = real()?,
            "solver.eta" => self.settings.eta = Some(real()?),
            "imaging.x1_min" => self.x1_range.0 = real()?,
            "imaging.x1_max" => self.x1_range.1 = real()?,
            "imaging.x2_min" => self.x2_range.0 = real()?,
            "imaging.x2_max" => self.x2_range.1 = real()?,
            "imaging.n1" => self.n1 = count()?,
            "imaging.n2" => self.n2 = count()?,
            "imaging.tolerance_wavelengths" => self.tolerance_wavelengths = real()?,
            "noise.tau" => self.tau = real()?,
            "noise.seed" => self.seed = v.as_integer().filter(|&i| i >= 0).ok_or_else(|| bad("a nonnegative integer"))? as u64,
            _ => return Err(CliError::config(format!("unknown config key {name}"))),
        }
        Ok(())
    }

    /// Checks every module precondition, naming the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |key: &str, msg: String| Err(CliError::config(format!("config key {key}: {msg}")));
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return fail("medium.k1", format!("wavenumber must be positive, got {}", self.k1));
        }
        if !(self.k2 > 0.0 && self.k2.is_finite()) {
            return fail("medium.k2", format!("wavenumber must be positive, got {}", self.k2));
        }
        if let Err(e) = self.settings.validate() {
            return fail("solver", e.to_string());
        }
        if !(self.background_radius > 0.0) {
            return fail("acquisition.background_radius", "must be positive".into());
        }
        for (key, r) in [("acquisition.r_s", self.r_s), ("acquisition.r_r", self.r_r)] {
            if self.regime == Regime::Near && !(r > self.background_radius) {
                return fail(key, format!("radius {r} must exceed the background radius {}", self.background_radius));
            }
        }
        for (key, n) in [("acquisition.n_s", self.n_s), ("acquisition.n_r", self.n_r)] {
            if n < 2 {
                return fail(key, format!("need at least two transducers, got {n}"));
            }
        }
        if let Err(e) = acquisition_points(&self.geometry()) {
            return fail("acquisition", e.to_string());
        }
        if self.profile == ProfileChoice::Table && self.table.is_none() {
            return fail("surface.table", "profile = \"table\" needs a table path".into());
        }
        if self.profile != ProfileChoice::Table && self.table.is_some() {
            return fail("surface.table", "only used with profile = \"table\"".into());
        }
        let profile = self.profile_shape()?;
        if profile.dip_radius().is_none() && !(self.background_radius > profile.support_halfwidth) {
            return fail(
                "acquisition.background_radius",
                format!("must exceed the perturbation half-width {}", profile.support_halfwidth),
            );
        }
        if !(self.tolerance_wavelengths > 0.0) {
            return fail("imaging.tolerance_wavelengths", "must be positive".into());
        }
        let grid = match ImageGrid::new(self.x1_range, self.x2_range, self.n1, self.n2) {
            Ok(g) => g,
            Err(e) => return fail("imaging", e.to_string()),
        };
        if let Err(e) = grid.check_inside(self.background_radius) {
            return fail("imaging", e.to_string());
        }
        if self.kind != BoundaryKind::Penetrable {
            let dip = SurfaceProfile::gamma_r(self.background_radius);
            if let Some(z) = grid.points().into_iter().find(|&z| !dip.is_above(z)) {
                return fail("imaging", format!("grid point {z:?} lies below the background surface"));
            }
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return fail("noise.tau", format!("noise level must be nonnegative, got {}", self.tau));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ForwardModel, CliError> {
        ForwardModel::new(self.kind, self.k1, self.k2, self.settings).map_err(|e| CliError::config(format!("config key medium: {e}")))
    }

    pub fn geometry(&self) -> AcquisitionGeometry {
        AcquisitionGeometry {
            regime: self.regime,
            aperture: aperture_for(self.kind),
            r_s: self.r_s,
            r_r: self.r_r,
            n_s: self.n_s,
            n_r: self.n_r,
            background_radius: self.background_radius,
        }
    }

    pub fn grid(&self) -> Result<ImageGrid, CliError> {
        ImageGrid::new(self.x1_range, self.x2_range, self.n1, self.n2).map_err(|e| CliError::config(format!("config key imaging: {e}")))
    }

    /// The surface the data is synthesized for.
    pub fn profile_shape(&self) -> Result<SurfaceProfile, CliError> {
        let shifted = |mut p: SurfaceProfile| {
            p.base_shift += self.base_shift;
            p
        };
        Ok(match self.profile {
            ProfileChoice::F1 => shifted(SurfaceProfile::f1()),
            ProfileChoice::F2 => shifted(SurfaceProfile::f2()),
            ProfileChoice::F3 => shifted(SurfaceProfile::f3()),
            ProfileChoice::Flat => SurfaceProfile::flat(5.0),
            ProfileChoice::GammaR => SurfaceProfile::gamma_r(self.background_radius),
            ProfileChoice::Table => {
                let path = self.table.as_ref().ok_or_else(|| CliError::config("config key surface.table: missing".into()))?;
                SurfaceProfile::from_table_file(path, self.base_shift).map_err(|e| match e {
                    rtm_core::Error::Io(io) => CliError::io(format!("surface table {}: {io}", path.display())),
                    e => CliError::config(format!("config key surface.table: {e}")),
                })?
            }
        })
    }

    pub fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).copied().unwrap_or(Origin::Default)
    }

    /// One `section.key = value  (origin)` line per parameter.
    pub fn provenance(&self) -> String {
        let mut out = format!("# preset: {}\n", self.preset.name());
        for (section, keys) in SCHEMA {
            for key in *keys {
                let name = format!("{section}.{key}");
                out.push_str(&format!("{name} = {}  ({})\n", self.display_value(&name), self.origin(&name)));
            }
        }
        out
    }

    fn display_value(&self, name: &str) -> String {
        match name {
            "surface.profile" => self.profile.name().into(),
            "surface.table" => self.table.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into()),
            "surface.base_shift" => self.base_shift.to_string(),
            "medium.kind" => format!("{:?}", self.kind).to_lowercase(),
            "medium.k1" => self.k1.to_string(),
            "medium.k2" => self.k2.to_string(),
            "acquisition.regime" => regime_name(self.regime).into(),
            "acquisition.background_radius" => self.background_radius.to_string(),
            "acquisition.r_s" => self.r_s.to_string(),
            "acquisition.r_r" => self.r_r.to_string(),
            "acquisition.n_s" => self.n_s.to_string(),
            "acquisition.n_r" => self.n_r.to_string(),
            "solver.nodes_per_wavelength" => self.settings.nodes_per_wavelength.to_string(),
            "solver.corner_levels" => self.settings.corner_levels.to_string(),
            "solver.margin_wavelengths" => self.settings.margin_wavelengths.to_string(),
            "solver.ramp_wavelengths" => self.settings.ramp_wavelengths.to_string(),
            "solver.eta" => self.settings.eta.map(|e| e.to_string()).unwrap_or_else(|| "k1".into()),
            "imaging.x1_min" => self.x1_range.0.to_string(),
            "imaging.x1_max" => self.x1_range.1.to_string(),
            "imaging.x2_min" => self.x2_range.0.to_string(),
            "imaging.x2_max" => self.x2_range.1.to_string(),
            "imaging.n1" => self.n1.to_string(),
            "imaging.n2" => self.n2.to_string(),
            "imaging.tolerance_wavelengths" => self.tolerance_wavelengths.to_string(),
            "noise.tau" => self.tau.to_string(),
            "noise.seed" => self.seed.to_string(),
            _ => "?".into(),
        }
    }
}

pub fn parse_regime(s: &str) -> Option<Regime> {
    match s {
        "near" => Some(Regime::Near),
        "far" => Some(Regime::Far),
        _ => None,
    }
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Near => "near",
        Regime::Far => "far",
    }
}
