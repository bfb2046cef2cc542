use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve {curve}: {reason}")]
    InvalidCurve { curve: usize, reason: &'static str },
    #[error("curve {curve} intersects itself")]
    SelfIntersection { curve: usize },
    #[error("curves {first} and {second} belong to the same family but intersect")]
    IntraFamilyIntersection { first: usize, second: usize },
    #[error("tangential contact between curves {curve_a} and {curve_b} near ({x:.6}, {y:.6})")]
    TangentialContact { curve_a: usize, curve_b: usize, x: f64, y: f64 },
    #[error("near-degenerate configuration on curve {curve}: crossings closer than the geometric tolerance")]
    NearDegenerate { curve: usize },
    #[error("found {found} crossings, more than the configured maximum {max}")]
    TooManyCrossings { found: usize, max: usize },
    #[error("subdivision inconsistency: {0}")]
    Subdivision(String),
    #[error("checkerboard violation across edge {edge}")]
    Checkerboard { edge: usize },

    #[error("brute-force oracle limited to {limit} bounded faces, arrangement has {faces}")]
    OracleLimit { faces: usize, limit: usize },
    #[error("crossing {crossing} has inadmissible multiplicity pattern {pattern:?}")]
    CrossingPattern { crossing: usize, pattern: [u8; 4] },
    #[error("least-area varifold check failed: {0}")]
    LeastArea(String),
    #[error("varifold is not admissible: {0}")]
    Inadmissible(String),

    #[error("sheet complex inconsistency: {0}")]
    SeamBookkeeping(String),
    #[error("component {component} has non-integral genus (chi={chi}, boundary loops={boundary})")]
    NonIntegerGenus { component: usize, chi: i64, boundary: usize },

    #[error("invalid mesh parameters: {0}")]
    MeshParams(String),
    #[error("face {face} is too small for the requested mesh resolution")]
    FaceTooSmall { face: usize },
    #[error("triangulation of face {face} failed: {reason}")]
    Triangulation { face: usize, reason: String },
    #[error("helicoid rim mismatch at crossing {crossing}")]
    RimMismatch { crossing: usize },
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("inconsistent triangle orientation across edge ({0}, {1})")]
    OrientationConflict(usize, usize),
    #[error("linear system is singular or not factorizable (pivot {pivot} at row {row})")]
    Factorization { row: usize, pivot: f64 },

    #[error("triangle inversion during relaxation at iteration {iteration}")]
    TriangleInversion { iteration: usize },
    #[error("only {found} vertices inside the crossing cylinder, need at least {needed}")]
    TooFewVertices { found: usize, needed: usize },

    #[error("degenerate triangle {triangle}")]
    DegenerateTriangle { triangle: usize },
    #[error("eigensolver did not converge in {iterations} iterations (residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },
    #[error("Gauss image area {gauss_area:.4} < 2pi but lambda1 = {lambda1:e} is not positive")]
    StabilityConflict { gauss_area: f64, lambda1: f64 },
}
