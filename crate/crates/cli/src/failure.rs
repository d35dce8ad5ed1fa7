use std::process::ExitCode;

use momenta::{
    AlgebraError, HankelError, MapsError, ModelError, ParseError, ScanError, SeriesError, SolveError,
};
use thiserror::Error;

/// Everything that can end a run early, grouped by exit status.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("input: {0}")]
    Input(String),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("solve: {0}")]
    Solve(String),
    #[error("scan: no feasible cell anywhere in the grid")]
    InfeasibleEverywhere,
    #[error("scan: {0}")]
    Scan(ScanError),
    #[error("maps: {0}")]
    Maps(#[from] MapsError),
}

impl Failure {
    /// 1 I/O, 2 usage (clap), 3 unreadable input, 4 solve/series/algebra,
    /// 5 infeasible everywhere, 6 scan/fit, 7 enumeration limits.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Io(_) => 1,
            Failure::Input(_) | Failure::Model(_) => 3,
            Failure::Solve(_) => 4,
            Failure::InfeasibleEverywhere => 5,
            Failure::Scan(_) => 6,
            Failure::Maps(_) => 7,
        })
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.message)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => Failure::Model(m),
            e => Failure::Solve(e.to_string()),
        }
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        Failure::Solve(format!("series: {e}"))
    }
}

impl From<HankelError> for Failure {
    fn from(e: HankelError) -> Self {
        Failure::Solve(format!("hankel: {e}"))
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        Failure::Solve(format!("algebra: {e}"))
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Solve(s) => s.into(),
            ScanError::Hankel(h) => h.into(),
            ScanError::Algebra(a) => a.into(),
            e => Failure::Scan(e),
        }
    }
}
