use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("index {index} exceeds dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("repeated index {0} in a wedge product")]
    RepeatedIndex(usize),
    #[error("undeclared parameter `{0}`")]
    UndeclaredParameter(String),
    #[error("dimension {0} is outside the supported range 2..=16")]
    Dimension(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("weights are inconsistent with the structure constants: {0}")]
    InconsistentWeights(String),
    #[error("not a permutation of 1..{0}")]
    NotPermutation(usize),
    #[error("permutation is not an involution")]
    NotInvolution,
    #[error("invalid metric parameters: {0}")]
    MetricParameters(String),
    #[error("degenerate metric (determinant zero)")]
    DegenerateMetric,
    #[error("the Lie algebra is not nilpotent")]
    NotNilpotent,
    #[error("two-form has components outside U*^W*")]
    NotSplitForm,
    #[error("isotropic construction not applicable: {0}")]
    Inapplicable(String),
    #[error("multiplicity hypothesis violated for positions ({0}, {1})")]
    Hypothesis(usize, usize),
    #[error("Ricci methods disagree at ({row}, {col}): formula {formula}, koszul {koszul}")]
    MethodDisagreement { row: usize, col: usize, formula: Box<Rational>, koszul: Box<Rational> },
    #[error("constructed metric is not Ricci-flat (construction bug)")]
    NotFlat,
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Input(String),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        Error::Line { line, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
