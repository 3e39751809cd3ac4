use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("family weight must be nonzero")]
    ZeroWeight,
    #[error("weight {0} has the wrong length")]
    WeightLength(String),
    #[error("dilation parameters must be non-negative")]
    NegativeDilation,
    #[error("evaluation parameter t must be nonzero")]
    ZeroTime,
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("field is not expressible in grade {grade} at jet order {jet_order}")]
    NotExpressible { grade: String, jet_order: u32 },
    #[error("membership inconclusive in grade {grade} at jet order {jet_order}")]
    Inconclusive { grade: String, jet_order: u32 },
    #[error("flag is not a chain of ideals: {0}")]
    InvalidFlag(String),
    #[error("structure is not weakly commutative")]
    NotWeaklyCommutative,
    #[error("operation needs {expected} representation variable(s), found {found}")]
    Arity { expected: usize, found: usize },
    #[error("structure does not match the worked example family: {0}")]
    WrongStructure(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
