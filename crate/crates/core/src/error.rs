use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("axiom {axiom} violated at {indices}: residual {residual:.3e}")]
    AxiomViolation {
        axiom: String,
        indices: String,
        residual: f64,
    },

    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),

    #[error("table is not a group: {0}")]
    NotAGroup(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("operator maps are defined on different bialgebras")]
    SourceMismatch,

    #[error("noise dimension mismatch: generator has {generator}, step function has {step}")]
    NoiseDimensionMismatch { generator: usize, step: usize },

    #[error("step function horizon {found} does not cover [0, {required}]")]
    HorizonMismatch { required: f64, found: f64 },

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("intervals [{0}, {1}) and [{2}, {3}) overlap; joint moments are undefined")]
    OverlappingIntervals(f64, f64, f64, f64),

    #[error("full toy-Fock matrix needs {required} bytes, cap is {cap}")]
    MemoryCap { required: u128, cap: u128 },

    #[error("not a unital *-representation (residual {residual:.3e}): {detail}")]
    NotRepresentation { residual: f64, detail: String },

    #[error("functional is not real (residual {0:.3e})")]
    NotReal(f64),

    #[error("functional does not vanish at the unit (|gamma(1)| = {0:.3e})")]
    NonzeroAtUnit(f64),

    #[error("functional is not conditionally positive (min Gram eigenvalue {0:.3e})")]
    NotConditionallyPositive(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("no intertwining isometry within tolerance (residual {residual:.3e}, isometry defect {defect:.3e})")]
    NoIntertwiner { residual: f64, defect: f64 },

    #[error("input is not a derivation (Leibniz residual {0:.3e})")]
    NotADerivation(f64),

    #[error("map is not a chi-structure map (relation residual {0:.3e})")]
    NotChiStructure(f64),

    #[error("no implementing vector found (residual {0:.3e})")]
    NotImplemented(f64),

    #[error("no coboundary within tolerance (xi residual {xi:.3e}, lambda residual {lambda:.3e})")]
    NoCoboundary { xi: f64, lambda: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
