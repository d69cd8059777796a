use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the potential is the zero polynomial")]
    ZeroPolynomial,
    #[error("expected an ordinary polynomial in the even variables")]
    NotPolynomial,
    #[error("operation needs a nonzero operator")]
    ZeroOperator,
    #[error("operator has order {order}, larger than the requested {k}")]
    OrderTooLow { order: usize, k: usize },
    #[error("polyvector is not homogeneous in arity")]
    ArityMismatch,
    #[error("operands live on different numbers of variables ({0} and {1})")]
    SignatureMismatch(usize, usize),
    #[error("invalid quantisation: {0}")]
    InvalidQuantisation(String),
    #[error("the quantisation does not satisfy the Maurer-Cartan equation")]
    NotMaurerCartan,
    #[error("a truncation bound is required here: {0}")]
    TruncationRequired(String),
    #[error("dimensions did not stabilise below the bound {bound}")]
    NotStabilised { bound: u32 },
    #[error("no isolated critical point detected up to degree {cap}")]
    NonIsolated { cap: u32 },
    #[error("no sign profile satisfies all duality constraints")]
    NoConsistentProfile,
}

pub type Result<T> = std::result::Result<T, Error>;
