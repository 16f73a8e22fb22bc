use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ellipse axes a={a}, b={b}: need a >= b > 0")]
    InvalidAxes { a: f64, b: f64 },

    #[error("invalid direction d_c={0}: must be -1 or 1")]
    InvalidDirection(i64),

    #[error("speed assumption violated: need 0 <= v_t_max ({v_t_max}) < v_a_min ({v_a_min}) < v_a_max - 2 v_t_max ({})", .v_a_max - 2.0 * .v_t_max)]
    SpeedAssumption { v_a_min: f64, v_a_max: f64, v_t_max: f64 },

    #[error("band fraction delta={0} outside (0, 1]")]
    InvalidDelta(f64),

    #[error("axis ratio b/a={ratio} below nominal speed ratio {required}")]
    AxisRatio { ratio: f64, required: f64 },

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed packet: {0}")]
    Packet(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
