use thiserror::Error;

/// Errors surfaced by the graded-computation layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("matrix shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("component basis is not isometric (column Gram deviates by {deviation:.3e})")]
    NonIsometricBasis { deviation: f64 },

    #[error("degree {degree} outside the computed range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("disjoint-spans precondition violated: components {i} and {j} share a direction")]
    SpansNotDisjoint { i: usize, j: usize },

    #[error("decomposition not unique: concatenated component basis has sigma_min {sigma_min:.3e}")]
    DependentComponents { sigma_min: f64 },

    #[error("angle degeneracy: pairwise cosine {cos} reaches 1")]
    AngleDegeneracy { cos: f64 },

    #[error("image escapes target graded piece at degree {degree} (residual {residual:.3e})")]
    ImageEscapesTarget { degree: usize, residual: f64 },

    #[error("point lies off the source variety (residual {residual:.3e})")]
    PointOffVariety { residual: f64 },

    #[error("graded map not invertible at degree {degree} (sigma_min {sigma_min:.3e})")]
    NotInvertible { degree: usize, sigma_min: f64 },

    #[error(
        "insufficient degree range for Hilbert fit: differences do not stabilize over a window \
         of 3 within degrees 0..={max_degree}; extend the range past degree {suggested}"
    )]
    InsufficientDegreeRange { max_degree: usize, suggested: usize },

    #[error("decay fit undefined: {0}")]
    UndefinedFit(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
