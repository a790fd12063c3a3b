use thiserror::Error;

/// Errors raised by the geometry, model, holonomy and graph layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// |det g| fell below the scale-aware degeneracy threshold.
    #[error("metric is degenerate at {location:?} (|det| = {det:.3e})")]
    DegenerateMetric { location: Vec<f64>, det: f64 },

    /// A trajectory left a non-periodic chart domain.
    #[error("trajectory left the domain at s = {s} (axis {axis})")]
    DomainExit { s: f64, axis: usize },

    /// The restriction of the metric to the requested subspace is singular,
    /// e.g. a null vector was used to span a "nondegenerate" subspace.
    #[error("metric restriction to the given subspace is degenerate (|det gram| = {det:.3e})")]
    DegenerateRestriction { det: f64 },

    /// The integer matrix is not a hyperbolic torus automorphism.
    #[error("matrix is not Anosov: det = {det}, trace = {trace} (need det = 1, trace > 2)")]
    NotAnosov { det: i64, trace: i64 },

    /// The fiber-metric scale must be nonzero.
    #[error("fiber metric scale eta must be nonzero")]
    ZeroScale,

    /// A path that was declared vertical leaves its leaf.
    #[error("path leaves its leaf at segment {segment} (transverse drift {drift:.3e})")]
    PathLeavesLeaf { segment: usize, drift: f64 },

    /// The transported transverse disk no longer fits inside any chart.
    #[error("holonomy disk image exits chart domains even at radius {radius:.3e}")]
    DiskTooLarge { radius: f64 },

    /// A vertical-horizontal homotopy could not be continued.
    #[error("transfer broke down at vertical parameter {parameter:.4}: {reason}")]
    TransferBreakdown { parameter: f64, reason: String },

    /// Two points expected to lie on one leaf do not.
    #[error("points do not lie on the same leaf")]
    LeafMismatch,

    /// Groupoid composition endpoints do not match.
    #[error("graph composition endpoint mismatch (gap {gap:.3e})")]
    EndpointMismatch { gap: f64 },

    /// Leaf periodicity could not be decided within the search bounds.
    #[error("leaf class undecidable within period bound {period_bound}")]
    UnknownLeafClass { period_bound: u32 },

    /// A tangent decomposition violated its defining constraints.
    #[error("tangent decomposition invalid: {0}")]
    InvalidDecomposition(String),

    /// The model failed the pseudo-Riemannian gate required for graph construction.
    #[error("model is not pseudo-Riemannian (projectability residual {residual:.3e}); graph refused")]
    NotPseudoRiemannian { residual: f64 },

    /// A curve declared horizontal has tangents outside the orthogonal distribution.
    #[error("curve is not horizontal at segment {segment} (leafwise component {residual:.3e})")]
    NotHorizontal { segment: usize, residual: f64 },

    /// An admissible pair must share its origin.
    #[error("paths do not share an origin (gap {gap:.3e})")]
    OriginMismatch { gap: f64 },

    /// A loop class index that does not exist on the leaf.
    #[error("leaf has no loop class {class}")]
    NoSuchLoopClass { class: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
