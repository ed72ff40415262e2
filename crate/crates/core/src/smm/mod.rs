//! Stiffness matrix method for free guided waves in a layered plate.

pub mod bulk;
pub mod layer;
mod modes;

use alloc::vec::Vec;

pub use bulk::{
    amplitude_ratios, bulk_waves, christoffel_matrix, sextic_coefficients, sextic_normalised, solve_alpha,
    stress_amplitudes, BulkWaveSet,
};
pub use layer::{assemble_global, layer_stiffness, LayerMatrices, PreparedLayer, PreparedStack, System};
pub use modes::{characteristic, family_roots, find_modes, trace_branch, DispersionProblem, Target};

use crate::elastic::Laminate;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    A0,
    S0,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::S0, Mode::A0];

    pub fn tag(self) -> &'static str {
        match self {
            Mode::A0 => "A0",
            Mode::S0 => "S0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A0" => Some(Mode::A0),
            "S0" => Some(Mode::S0),
            _ => None,
        }
    }

    pub fn family(self) -> ModeFamily {
        match self {
            Mode::A0 => ModeFamily::Antisymmetric,
            Mode::S0 => ModeFamily::Symmetric,
        }
    }
}

/// Mirror symmetry class of a mode of a symmetric laminate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeFamily {
    /// u1, u2 even and u3 odd about the mid-plane.
    Symmetric,
    /// u1, u2 odd and u3 even about the mid-plane.
    Antisymmetric,
}

/// Phase-velocity scan and root refinement settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub cp_min: f64,
    pub cp_max: f64,
    pub cp_step: f64,
    /// Bisection stops when the bracket is narrower than `rel_tol · cp`.
    pub rel_tol: f64,
    /// Half-width of the local search window used while tracing, relative
    /// to the predicted phase velocity.
    pub trace_window: f64,
    /// Step of the local search, relative to the predicted phase velocity.
    pub trace_step: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { cp_min: 100.0, cp_max: 14000.0, cp_step: 10.0, rel_tol: 1e-9, trace_window: 0.2, trace_step: 0.0025 }
    }
}

/// One dispersion root.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalSolution {
    pub mode: Mode,
    /// Set when the laminate is mirror symmetric.
    pub family: Option<ModeFamily>,
    /// Hz.
    pub frequency: f64,
    pub phi_deg: f64,
    /// m/s.
    pub cp: f64,
    /// rad/m.
    pub xi: f64,
    /// `|F(cp)|` relative to the largest `|F|` seen while bracketing.
    pub residual: f64,
    /// Partial waves of each (merged) layer of the stack at the root.
    pub per_layer: Vec<BulkWaveSet>,
}

/// What a trace sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// Frequencies in Hz at a fixed angle.
    Frequency { phi_deg: f64, frequencies: Vec<f64> },
    /// Angles in degrees at a fixed frequency.
    Angle { frequency: f64, angles_deg: Vec<f64> },
}

/// Phase velocity of `mode` over a sweep, convenience over
/// [`trace_branch`].
pub fn dispersion_curve(lam: &Laminate, mode: Mode, sweep: &Sweep, opts: &ScanOptions) -> Result<Vec<ModalSolution>> {
    trace_branch(lam, mode, sweep, opts)
}
