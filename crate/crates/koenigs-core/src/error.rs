use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the engine.
///
/// Numerical degeneracies are reported as values; none of the operations
/// panic on degenerate geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands live in projective spaces of different dimension.
    MixedAmbient { left: usize, right: usize },
    /// The zero vector does not represent a point.
    ZeroVector,
    /// Cross-ratio with a vanishing denominator.
    DegenerateQuadruple,
    /// A point is off the carrier line of a cross-ratio.
    NotCollinear { residual: f64 },
    /// Central projection of a point inside the center.
    InCenter,
    /// Center and target of a projection are not supplementary.
    NotSupplementary,
    /// Two subspaces were expected to meet in a single point.
    NoUniqueMeet { expected: &'static str },
    /// Subspace B is not contained in A.
    NotNested { residual: f64 },
    /// Restrictions to the common part of two hyperplanes disagree.
    RestrictionMismatch { residual: f64 },
    /// A form fails the full-dimensionality signature test.
    NotFullDimensional { which: &'static str },
    /// The gluing system has an unexpected solution space.
    UnexpectedSolutionDim { dim: usize },
    /// Gluing needs two distinct hyperplanes.
    NotDistinctHyperplanes,
    /// An index lies outside the domain.
    IndexOutOfRange { index: usize, len: usize },
    /// The net fails the non-degeneracy test at a face.
    DegenerateNet { i: usize, j: usize, order: usize },
    /// A face is not a planar quad in general position.
    DegenerateFace { i: usize, j: usize },
    /// A contact point coincides with a vertex of its edge.
    VertexContact { i: usize, j: usize },
    /// A contact point is off its edge line.
    OffEdge { residual: f64 },
    /// Touching conics could not be propagated consistently.
    ClosureFailure { i: usize, j: usize, residual: f64 },
    /// A Laplace-invariant stencil reaches outside the window.
    StencilOutOfRange,
    /// The lift could not produce an extensive net.
    LiftFailed,
    /// The net is not extensive.
    NotExtensive,
    /// No admissible auxiliary point was found during the quadric induction.
    YSelectionFailed,
    /// A hyperplane fit did not produce a unique hyperplane.
    FitFailed { parity: usize, dim: usize },
    /// The grid is not generic.
    NotGeneric(String),
    /// An intersection that must be nonempty was empty.
    MeetEmpty,
    /// A verification stage produced residuals above tolerance.
    VerifyFailed { what: &'static str, residual: f64 },
    /// A point expected in a parameter space is outside it.
    NotInParameterSpace { residual: f64 },
    /// The tangent construction met a degenerate conic.
    TangentConstructionFailed,
    /// A theorem hypothesis does not hold on the input.
    HypothesisFailed(String),
    /// The window is too small for the requested computation.
    WindowTooSmall,
    /// The curve pair is not generic.
    NotGenericPair,
    /// Fixture generation exhausted its retry budget.
    GenerationFailed(String),
    /// Malformed input that does not fit another variant.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MixedAmbient { left, right } => {
                write!(f, "mixed ambient dimensions {left} and {right}")
            }
            Error::ZeroVector => f.write_str("zero vector is not a projective point"),
            Error::DegenerateQuadruple => f.write_str("cross-ratio denominator vanishes"),
            Error::NotCollinear { residual } => {
                write!(f, "point off the carrier line (residual {residual:e})")
            }
            Error::InCenter => f.write_str("point lies in the projection center"),
            Error::NotSupplementary => f.write_str("center and target are not supplementary"),
            Error::NoUniqueMeet { expected } => write!(f, "no unique intersection: {expected}"),
            Error::NotNested { residual } => {
                write!(f, "subspace is not nested (residual {residual:e})")
            }
            Error::RestrictionMismatch { residual } => {
                write!(f, "restrictions are not proportional (residual {residual:e})")
            }
            Error::NotFullDimensional { which } => write!(f, "{which} is not full-dimensional"),
            Error::UnexpectedSolutionDim { dim } => {
                write!(f, "gluing system has a {dim}-dimensional solution space")
            }
            Error::NotDistinctHyperplanes => f.write_str("hyperplanes coincide"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range 0..{len}")
            }
            Error::DegenerateNet { i, j, order } => {
                write!(f, "degenerate net at face ({i},{j}) after {order} transforms")
            }
            Error::DegenerateFace { i, j } => write!(f, "degenerate face ({i},{j})"),
            Error::VertexContact { i, j } => write!(f, "contact point hits a vertex at face ({i},{j})"),
            Error::OffEdge { residual } => write!(f, "contact off its edge (residual {residual:e})"),
            Error::ClosureFailure { i, j, residual } => {
                write!(f, "touching conics do not close at face ({i},{j}), residual {residual:e}")
            }
            Error::StencilOutOfRange => f.write_str("stencil outside the window"),
            Error::LiftFailed => f.write_str("lift did not reach an extensive net"),
            Error::NotExtensive => f.write_str("net is not extensive"),
            Error::YSelectionFailed => f.write_str("no admissible point outside both sub-spaces"),
            Error::FitFailed { parity, dim } => {
                write!(f, "parity class {parity} spans a {dim}-dimensional solution space")
            }
            Error::NotGeneric(why) => write!(f, "not generic: {why}"),
            Error::MeetEmpty => f.write_str("intersection is empty"),
            Error::VerifyFailed { what, residual } => {
                write!(f, "{what} failed with residual {residual:e}")
            }
            Error::NotInParameterSpace { residual } => {
                write!(f, "point outside the parameter space (residual {residual:e})")
            }
            Error::TangentConstructionFailed => f.write_str("tangent construction degenerate"),
            Error::HypothesisFailed(why) => write!(f, "hypothesis failed: {why}"),
            Error::WindowTooSmall => f.write_str("window too small"),
            Error::NotGenericPair => f.write_str("curve pair is not generic"),
            Error::GenerationFailed(why) => write!(f, "generation failed: {why}"),
            Error::InvalidInput(why) => write!(f, "invalid input: {why}"),
        }
    }
}

impl core::error::Error for Error {}
