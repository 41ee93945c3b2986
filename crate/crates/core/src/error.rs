use thiserror::Error;

use crate::machine::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid machine table: {}", join_violations(.0))]
    InvalidTable(Vec<Violation>),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not a permutation of {len} lines")]
    NotAPermutation { len: usize },

    #[error("{what} exceeds the size ceiling of {ceiling_bits} bits")]
    Overflow { what: String, ceiling_bits: u64 },

    #[error("certificate violated on input {input}: {detail}")]
    CertificateViolation { input: String, detail: String },

    #[error("quasi-trivial spec violated: {0}")]
    SpecViolation(String),

    #[error("table budget exceeded: need {needed} states, budget is {budget}")]
    TableBudget { needed: usize, budget: usize },

    #[error("registry: {0}")]
    Registry(String),

    #[error("index {index} out of range (length {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("refused: {0}")]
    Refused(String),

    #[error("linear index law violated: {0}")]
    LawViolation(String),

    #[error("expression: {0}")]
    Expr(String),

    #[error("io: {0}")]
    Io(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
