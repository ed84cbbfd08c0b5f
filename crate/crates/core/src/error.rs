use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid, mesh, route or config document did not parse.
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    /// Inputs are well-formed but describe an empty or out-of-range domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The mesh is not a valid quadtree leaf cover.
    #[error("structural error: {0}")]
    Structural(String),

    /// The vessel cannot make headway against the current on the requested leg.
    #[error("infeasible crossing: {0}")]
    Infeasible(String),

    #[error("waypoint placement error: {0}")]
    Placement(String),

    #[error("no route from cell {from} to cell {to}: {frontier}")]
    NoRoute {
        from: usize,
        to: usize,
        frontier: String,
    },

    #[error("smoothing did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
}

impl Error {
    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 0 success, 1 usage/config, 2 I/O, 3 no route, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::NoRoute { .. } => 3,
            Error::NotConverged { .. } => 4,
            _ => 1,
        }
    }
}
