use thiserror::Error;

use crate::model::{PacketId, Round, Station};
use crate::rational::RationalParseError;

/// Failures raised while executing a round.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("round {round}: {on} stations switched on, energy cap is {cap}")]
    EnergyCapViolation { round: Round, on: usize, cap: usize },
    #[error("round {round}: packet {id} delivered twice")]
    DuplicateDelivery { round: Round, id: PacketId },
    #[error("round {round}: station {station} transmitted a packet it does not hold")]
    PhantomTransmit { round: Round, station: Station },
    #[error("round {round}: more than one station adopted the heard packet")]
    MultipleAdoption { round: Round },
    #[error("round {round}: station {station} adopted without a heard undelivered packet")]
    InvalidAdoption { round: Round, station: Station },
    #[error("round {round}: station {station} set a zero timer")]
    InvalidTimer { round: Round, station: Station },
    #[error("round {round}: station {station} reports {reported} queued packets, engine holds {held}")]
    QueueMismatch { round: Round, station: Station, reported: usize, held: usize },
    #[error("round {round}: injection references station {station} outside the system")]
    BadInjection { round: Round, station: Station },
    #[error("round {round}: protocol invariant broken: {detail}")]
    Protocol { round: Round, detail: String },
    #[error("injection trace inadmissible: {0}")]
    Adversary(String),
}

/// Configuration problems detected before a run starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Rational(#[from] RationalParseError),
    #[error("{0}")]
    Inapplicable(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
