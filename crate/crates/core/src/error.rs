use thiserror::Error;

/// Which edge of a passband a failed −3 dB search was looking for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSide {
    Lower,
    Upper,
}

impl std::fmt::Display for BandSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandSide::Lower => f.write_str("lower"),
            BandSide::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("singular network: ABCD to S denominator vanished")]
    Singular,
    #[error("evanescent propagation in line with eps_r = {eps_r} at theta = {theta_deg} deg")]
    Evanescent { eps_r: f64, theta_deg: f64 },
    #[error("at f = {freq_hz} Hz, theta = {theta_deg} deg: {source}")]
    AtPoint {
        freq_hz: f64,
        theta_deg: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("band not bracketed: |s21| peak lies on the grid boundary")]
    BandNotBracketed,
    #[error("one-sided band: no -3 dB crossing on the {0} side of the peak")]
    OneSidedBand(BandSide),
    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),
    #[error("infeasible specification: {0}")]
    Infeasible(String),
    #[error("infeasible bandwidth target {target}: achievable FBW range is [{min}, {max}]")]
    InfeasibleTarget { target: f64, min: f64, max: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI, grouped by failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Io(_) => 3,
            Error::Parse { .. } => 4,
            Error::AtPoint { source, .. } => source.exit_code(),
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
