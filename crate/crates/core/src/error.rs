use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Regime warnings raised by the rotor model. Not errors: the model still
/// returns finite values, but momentum theory is known to be degraded there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeWarning {
    /// Near-axial descent (`v_x < 1 m/s`, `v_z < 0`).
    AxialDescent,
    /// Vortex-ring neighbourhood: the momentum denominator was clamped.
    VortexRingClamp,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite rotor load at omega={omega}, v_x={v_x}, v_z={v_z}, v_i={v_i}")]
    NonFinite { omega: f64, v_x: f64, v_z: f64, v_i: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("thrust {requested} N outside achievable range [{min}, {max}] N")]
    InfeasibleThrust { requested: f64, min: f64, max: f64 },

    #[error("commanded vertical force {f_z} N is not positive (free-fall demand)")]
    InfeasibleCommand { f_z: f64 },

    #[error("pitch {theta} rad exceeds limit {limit} rad")]
    PitchLimit { theta: f64, limit: f64 },

    #[error("leg sample {sample} (t = {time} s) failed: {source}")]
    LegSample {
        sample: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("table cell (x = {x_f} m, z = {z_f} m) failed: {source}")]
    TableCell {
        x_f: f64,
        z_f: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("leg ({x_f}, {z_f}) outside table hull x in [{x_min}, {x_max}], z in [{z_min}, {z_max}]")]
    OutOfHull {
        x_f: f64,
        z_f: f64,
        x_min: f64,
        x_max: f64,
        z_min: f64,
        z_max: f64,
    },

    #[error("leg {from} -> {to}: {source}")]
    Pair {
        from: usize,
        to: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("table fingerprint {found} does not match parameter fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("{solver} supports at most {max} waypoints, got {n}")]
    SizeGuard {
        solver: &'static str,
        n: usize,
        max: usize,
    },

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("invalid mission: {0}")]
    InvalidMission(String),

    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),

    #[error("no records to summarize")]
    EmptyRecords,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
