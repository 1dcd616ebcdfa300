use crate::folds::FoldStep;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edges {0} and {1} are not composable")]
    NotComposable(String, String),
    #[error("word reduces to the trivial class")]
    TrivialClass,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("not a homotopy equivalence: {0}")]
    NotHomotopyEquivalence(String),
    #[error("fold budget of {budget} steps exceeded")]
    FoldBudget { budget: usize, partial: Box<Vec<FoldStep>> },
    #[error("turn is not foldable")]
    NotFoldable,
    #[error("matrix is reducible")]
    Reducible,
    #[error("marking is not a basis: {0}")]
    BadMarking(String),
    #[error("path length exceeded {0} edges")]
    Blowup(usize),
    #[error("setup: {0}")]
    Setup(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
