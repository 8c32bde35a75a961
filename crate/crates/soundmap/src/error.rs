//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot normalize a zero-length vector")]
    ZeroVector,

    #[error("quaternion norm {norm} is not within 1e-9 of unit")]
    NonUnitQuaternion { norm: f64 },

    #[error("non-finite component in {context}")]
    NonFinite { context: &'static str },

    #[error("baseline angle is undefined: source coincides with a robot position")]
    CoincidentPoints,

    #[error("invalid array spacings: {reason}")]
    InvalidSpacings { reason: String },

    #[error("invalid array geometry: {reason}")]
    InvalidGeometry { reason: String },

    #[error("source lies inside the array's bounding sphere ({distance:.3} m <= {radius:.3} m)")]
    SourceInsideArray { distance: f64, radius: f64 },

    #[error("delay of {delay_s} s exceeds the signal duration {duration_s} s")]
    DelayOutOfRange { delay_s: f64, duration_s: f64 },

    #[error("invalid scene: {reason}")]
    InvalidScene { reason: String },

    #[error("time {t} s is outside the trajectory range [{start}, {end}] s")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid trajectory: {reason}")]
    InvalidTrajectory { reason: String },

    #[error("invalid tracker configuration: {reason}")]
    InvalidTracker { reason: String },

    #[error("negative time step dt = {dt}")]
    NegativeTimeStep { dt: f64 },

    #[error("invalid trial configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("trial failed at tick {tick} (t = {t} s): {source}")]
    Tick {
        tick: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },

    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav error at {path}: {reason}")]
    Wav { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
