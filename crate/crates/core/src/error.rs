use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("outcome {outcome} is not in the alphabet of the {model} model")]
    UnknownOutcome { model: &'static str, outcome: u8 },

    #[error("player {id} is out of range for {players} players")]
    PlayerOutOfRange { id: usize, players: usize },

    #[error("player {0} appears on both sides of the game")]
    OverlappingSides(usize),

    #[error("a game needs at least one player on each side")]
    EmptySide,

    #[error("time stamp went backwards: {now} < {prev}")]
    TimeReversed { now: u64, prev: u64 },

    #[error("{engine} requires equal group sizes, got {home} home vs {away} away")]
    UnbalancedGroups {
        engine: &'static str,
        home: usize,
        away: usize,
    },

    #[error("{0} is defined for one-on-one games only")]
    GroupGame(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the content of an input file rather than by
    /// the way the library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Data { .. } | Error::Io(_) | Error::Csv(_))
    }
}
