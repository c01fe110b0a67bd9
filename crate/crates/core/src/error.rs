use thiserror::Error;

use crate::Vec3;

pub type Result<T, E = DefectError> = std::result::Result<T, E>;

/// Every failure mode of the library, grouped loosely by the module that raises it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DefectError {
    // parameters
    #[error("coupling e0 must be non-zero and finite, got {0}")]
    ZeroCoupling(f64),
    #[error("vector mass must be finite and >= 0, got {0}")]
    NegativeMass(f64),
    #[error("Z3/Z_chi ratio must be > 0, got {0}")]
    NonPositiveZRatio(f64),
    #[error("supplied mV = {given} disagrees with z_ratio*(e0*v)^2 relation (expected {expected})")]
    MassRelationViolated { given: f64, expected: f64 },

    // geometry
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("segment length bound must be > 0, got {0}")]
    BadStep(f64),
    #[error("operation requires a sampled polyline; analytic curve returned unchanged")]
    AnalyticCurve,

    // condensate
    #[error("point {point:?} lies within {clearance:.3e} of the defect curve (exclusion radius {radius:.3e})")]
    PointOnCurve { point: Vec3, clearance: f64, radius: f64 },
    #[error("point {0:?} lies on the vortex axis")]
    OnAxis(Vec3),
    #[error("open polyline half-length {half_length} is shorter than the required truncation {required}")]
    TruncationTooShort { half_length: f64, required: f64 },
    #[error("contour passes within {clearance:.3e} of the defect curve")]
    ContourTouchesCurve { clearance: f64 },
    #[error("defect curve meets the surface tangentially near {0:?}")]
    TangentialCrossing(Vec3),
    #[error("contour is not planar (max deviation {0:.3e})")]
    NonPlanarContour(f64),

    // greens
    #[error("radius must be > 0, got {0}")]
    NonPositiveRadius(f64),
    #[error("2D Yukawa kernel requires m > 0")]
    ZeroMass2D,
    #[error("Bessel argument must be > 0, got {0}")]
    NonPositiveArgument(f64),
    #[error("kernel gradient undefined at zero displacement")]
    ZeroDisplacement,

    // fields
    #[error("vortex observables require a massive vector (mV > 0)")]
    MasslessVector,

    // analysis
    #[error("field grids are defined on different lattices")]
    GridMismatch,
    #[error("field grid has rank {found}, expected {expected}")]
    WrongRank { expected: &'static str, found: &'static str },
    #[error("flux domain R*mV = {0} is below the required 8")]
    DomainTooSmall(f64),
    #[error("convergence study needs at least 3 resolutions, got {0}")]
    TooFewResolutions(usize),
    #[error("{0}")]
    Baseline(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
}
