use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("concept index {0} out of range")]
    UnknownConcept(usize),
    #[error("duplicate object id `{0}`")]
    DuplicateObject(String),
    #[error("duplicate attribute id `{0}`")]
    DuplicateAttribute(String),
    #[error("incidence has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("scale `{scale}` cannot interpret value {value}")]
    ScaleTypeError { scale: String, value: String },
    #[error("bad scale specification: {0}")]
    BadScaleSpec(String),
    #[error("hierarchy contains a cycle through `{0}`")]
    CyclicHierarchy(String),
    #[error("edge `{child}` -> `{parent}` points at an undefined parent")]
    DanglingEdge { child: String, parent: String },

    #[error("contexts do not share a common object set")]
    ObjectSetMismatch,
    #[error("attribute `{0}` appears in more than one apposed context")]
    AttributeCollision(String),

    #[error("unknown scale `{0}`")]
    UnknownScale(String),
    #[error("document `{0}` has no facet covered by the view")]
    Unclassifiable(String),
    #[error("view has not been built")]
    ViewNotBuilt,

    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("line {line}: malformed field `{field}`")]
    BadField { line: usize, field: String },
    #[error("url `{0}` has no scheme")]
    BadUrl(String),

    #[error("unknown seed `{0}`")]
    UnknownSeed(String),
    #[error("threshold {threshold} exceeds attribute count {attributes}")]
    BadThreshold { threshold: usize, attributes: usize },
    #[error("radius {0} outside [0, 1]")]
    BadRadius(f64),
    #[error("neighborhoods come from different views")]
    ViewMismatch,
}

impl Error {
    /// Stable machine-readable code, used by the HTTP layer.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownObject(_) => "UnknownObject",
            Error::UnknownAttribute(_) => "UnknownAttribute",
            Error::UnknownConcept(_) => "UnknownConcept",
            Error::DuplicateObject(_) => "DuplicateObject",
            Error::DuplicateAttribute(_) => "DuplicateAttribute",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Parse { .. } => "Parse",
            Error::ScaleTypeError { .. } => "ScaleTypeError",
            Error::BadScaleSpec(_) => "BadScaleSpec",
            Error::CyclicHierarchy(_) => "CyclicHierarchy",
            Error::DanglingEdge { .. } => "DanglingEdge",
            Error::ObjectSetMismatch => "ObjectSetMismatch",
            Error::AttributeCollision(_) => "AttributeCollision",
            Error::UnknownScale(_) => "UnknownScale",
            Error::Unclassifiable(_) => "Unclassifiable",
            Error::ViewNotBuilt => "ViewNotBuilt",
            Error::DuplicateDocument(_) => "DuplicateDocument",
            Error::BadField { .. } => "BadField",
            Error::BadUrl(_) => "BadUrl",
            Error::UnknownSeed(_) => "UnknownSeed",
            Error::BadThreshold { .. } => "BadThreshold",
            Error::BadRadius(_) => "BadRadius",
            Error::ViewMismatch => "ViewMismatch",
        }
    }
}
