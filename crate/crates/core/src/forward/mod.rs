//! Forward scattering by locally rough surfaces.

pub mod bie;
pub mod collector;
pub mod data;
pub mod model;
pub mod volume;

pub use bie::{BieOptions, BoundaryOperator, Incidence};
pub use collector::{flat_total_field, Collector};
pub use data::{add_noise, build_operators, synthesize_data, synthesize_with, ScatterData, SurfacePair};
pub use model::{solve_total_fields, total_fields, ForwardModel, SolverSettings};
pub use volume::VolumeOperator;

/// Boundary condition on the surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Sound-soft: u = 0.
    Dirichlet,
    /// Sound-hard: ∂u/∂ν = 0.
    Neumann,
    /// Fluid-fluid interface with continuous u and ∂u/∂ν.
    Penetrable,
}

impl BoundaryKind {
    /// Byte used in data files.
    pub fn code(self) -> u8 {
        match self {
            BoundaryKind::Dirichlet => 0,
            BoundaryKind::Neumann => 1,
            BoundaryKind::Penetrable => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(BoundaryKind::Dirichlet),
            1 => Some(BoundaryKind::Neumann),
            2 => Some(BoundaryKind::Penetrable),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            BoundaryKind::Dirichlet => 'D',
            BoundaryKind::Neumann => 'N',
            BoundaryKind::Penetrable => 'P',
        }
    }

    /// Parses `D`, `N`, `P` or the full lowercase names.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" | "dirichlet" | "sound-soft" => Some(BoundaryKind::Dirichlet),
            "n" | "neumann" | "sound-hard" => Some(BoundaryKind::Neumann),
            "p" | "penetrable" | "transmission" => Some(BoundaryKind::Penetrable),
            _ => None,
        }
    }
}
