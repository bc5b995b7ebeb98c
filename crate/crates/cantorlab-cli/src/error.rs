use std::fmt;
use std::process::ExitCode;

use cantorlab::arith::ArithError;
use cantorlab::complexity::ComplexityError;
use cantorlab::constructions::ConstructionError;
use cantorlab::functionals::FunctionalError;
use cantorlab::measures::{MeasureError, TreeViolation};
use cantorlab::orders::OrderError;

/// Failure classes with fixed exit statuses.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (status 2).
    Parse(String),
    /// A search ran out of budget (status 3).
    Budget(String),
    /// An artifact or construction broke an invariant (status 4).
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Parse(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Invariant(_) => 4,
        })
    }

    pub fn parse(m: impl Into<String>) -> Self {
        CliError::Parse(m.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Budget(m) => write!(f, "budget exhausted: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::Parse(m) => CliError::Parse(m),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Parse(m) => CliError::Parse(m),
            MeasureError::Budget(m) => CliError::Budget(m),
            MeasureError::Arith(a) => a.into(),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<TreeViolation> for CliError {
    fn from(e: TreeViolation) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<OrderError> for CliError {
    fn from(e: OrderError) -> Self {
        match e {
            OrderError::Parse(m) => CliError::Parse(m),
            OrderError::Budget(m) => CliError::Budget(m),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<FunctionalError> for CliError {
    fn from(e: FunctionalError) -> Self {
        match e {
            FunctionalError::Parse(m) => CliError::Parse(m),
            FunctionalError::Measure(m) => m.into(),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<ComplexityError> for CliError {
    fn from(e: ComplexityError) -> Self {
        match e {
            ComplexityError::Parse(m) => CliError::Parse(m),
            ComplexityError::Order(o) => o.into(),
            ComplexityError::Measure(m) => m.into(),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Parse(m) => CliError::Parse(m),
            ConstructionError::Budget(m) => CliError::Budget(m),
            ConstructionError::Measure(m) => m.into(),
            ConstructionError::Order(o) => o.into(),
            other => CliError::Invariant(other.to_string()),
        }
    }
}
