use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("waypoint coincides with the agent position")]
    DegenerateWaypoint,

    #[error("cost matrix row {row} has no finite entry")]
    InfeasibleMatrix { row: usize },

    #[error("episode already finished")]
    EpisodeFinished,

    #[error("no active episode; call reset first")]
    NotStarted,

    #[error("expected {expected} pursuer actions, got {got}")]
    ActionCount { expected: usize, got: usize },

    #[error("action value {index} is not finite")]
    NonFiniteAction { index: usize },

    #[error("malformed trajectory log: {0}")]
    Log(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    TomlDecode(#[from] toml::de::Error),

    #[error(transparent)]
    TomlEncode(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
