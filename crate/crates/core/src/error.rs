use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column \"{column}\": {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("domain error at row {row}, variable \"{variable}\": {message}")]
    Domain {
        row: usize,
        variable: String,
        message: String,
    },

    #[error("unknown variable \"{0}\"")]
    UnknownVariable(String),

    #[error("variable \"{variable}\" is {found}, expected {expected}")]
    WrongKind {
        variable: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("degenerate category \"{0}\": only one observed level")]
    DegenerateCategory(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("within-group collinearity: \"{0}\" is constant within every group")]
    WithinCollinearity(String),

    #[error("degenerate cross-validation fold {fold}: training response has zero variance")]
    DegenerateFold { fold: usize },

    #[error(
        "categorical \"{variable}\" has {levels} levels, exceeding the forest hard limit of {limit} categories"
    )]
    Cardinality {
        variable: String,
        levels: usize,
        limit: usize,
    },

    #[error("composition error: {0}")]
    Composition(String),

    #[error("missing response value at row {0}")]
    MissingResponse(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
