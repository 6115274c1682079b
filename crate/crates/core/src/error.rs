use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relay SINR singular: eps_relay = 0 with no jamming power")]
    RelaySinrSingular,

    #[error("power allocation outside validity regime: {0}")]
    OutsideValidity(String),

    #[error("ratio undefined without jammer")]
    NoJammer,

    #[error("only negative arguments supported (got {0})")]
    DomainError(f64),

    #[error("invalid approximation parameters: {0}")]
    InvalidParams(String),

    #[error("numerical overflow in {0}; retry in log domain")]
    Overflow(&'static str),

    #[error("branch handling failed: {0}")]
    BranchHandling(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("precision exhausted after {bits} bits in {what}")]
    PrecisionExhausted { what: &'static str, bits: usize },

    #[error("offset law requires N_BS >= 2")]
    OffsetNeedsTwoBs,
}
