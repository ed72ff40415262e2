use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// [`Error::code`] gives a stable upper-case identifier used by the CLI's
/// `ERROR <code>: <message>` lines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stiffness matrix is not positive definite ({0})")]
    NonPositiveDefinite(String),
    #[error("{n_layers} layers do not admit a symmetric {class} pattern")]
    IncompatibleCount { class: &'static str, n_layers: usize },

    #[error("coincident Christoffel roots at cp = {cp} m/s")]
    DegenerateRoots { cp: f64 },
    #[error("sagittal and shear-horizontal motion decouple at cp = {cp} m/s")]
    DecoupledMotion { cp: f64 },
    #[error("layer displacement matrix is ill-conditioned (cond = {cond:e})")]
    SingularDisplacementMatrix { cond: f64 },
    #[error("recursion pivot is ill-conditioned (cond = {cond:e})")]
    SingularRecursionPivot { cond: f64 },
    #[error("no modes found in [{cp_min}, {cp_max}] m/s")]
    NoModesFound { cp_min: f64, cp_max: f64 },
    #[error("{mode} branch lost at f = {frequency} Hz, phi = {phi_deg} deg")]
    BranchLost { mode: &'static str, frequency: f64, phi_deg: f64 },

    #[error("modal null space is not one-dimensional (singular value ratio {ratio:e})")]
    NullSpaceAmbiguous { ratio: f64 },
    #[error("total energy is not positive")]
    ZeroEnergy,

    #[error("curve reaches {cg} m/ms, beyond the image scale {scale} m/ms")]
    CurveClipped { cg: f64, scale: f64 },
    #[error("no admissible material after {0} draws")]
    SamplingExhausted(usize),

    #[error("flood fill reached the image border")]
    OpenContour,
    #[error("sweep endpoints coincide")]
    ZeroSpan,

    #[error("shape mismatch at {layer}: {detail}")]
    ShapeMismatch { layer: String, detail: String },
    #[error("non-finite gradient in {layer}")]
    NonFiniteGradient { layer: String },
    #[error("{0} split is empty")]
    DatasetTooSmall(&'static str),
    #[error("regression target is exactly zero")]
    ZeroTruth,
    #[error("normal equations are singular")]
    SingularNormalEquations,
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::NonPositiveDefinite(_) => "NON_POSITIVE_DEFINITE",
            Error::IncompatibleCount { .. } => "INCOMPATIBLE_COUNT",
            Error::DegenerateRoots { .. } => "DEGENERATE_ROOTS",
            Error::DecoupledMotion { .. } => "DECOUPLED_MOTION",
            Error::SingularDisplacementMatrix { .. } => "SINGULAR_DISPLACEMENT_MATRIX",
            Error::SingularRecursionPivot { .. } => "SINGULAR_RECURSION_PIVOT",
            Error::NoModesFound { .. } => "NO_MODES_FOUND",
            Error::BranchLost { .. } => "BRANCH_LOST",
            Error::NullSpaceAmbiguous { .. } => "NULL_SPACE_AMBIGUOUS",
            Error::ZeroEnergy => "ZERO_ENERGY",
            Error::CurveClipped { .. } => "CURVE_CLIPPED",
            Error::SamplingExhausted(_) => "SAMPLING_EXHAUSTED",
            Error::OpenContour => "OPEN_CONTOUR",
            Error::ZeroSpan => "ZERO_SPAN",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::NonFiniteGradient { .. } => "NON_FINITE_GRADIENT",
            Error::DatasetTooSmall(_) => "DATASET_TOO_SMALL",
            Error::ZeroTruth => "ZERO_TRUTH",
            Error::SingularNormalEquations => "SINGULAR_NORMAL_EQUATIONS",
        }
    }

    /// Numerical failures that a small perturbation of the phase velocity
    /// usually cures.
    pub(crate) fn is_perturbable(&self) -> bool {
        matches!(
            self,
            Error::DegenerateRoots { .. }
                | Error::DecoupledMotion { .. }
                | Error::SingularDisplacementMatrix { .. }
                | Error::SingularRecursionPivot { .. }
        )
    }
}
