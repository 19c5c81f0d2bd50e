use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("account {account} out of range (n = {n})")]
    UnknownAccount { account: usize, n: usize },

    #[error("topic {topic} out of range (topic count = {topics})")]
    UnknownTopic { topic: usize, topics: usize },

    #[error("duplicate retweet/mention time {time} on topic {topic}")]
    DuplicateEventTime { topic: usize, time: f64 },

    #[error("no likelihood events (retweets or mentions) in the log")]
    NoLikelihoodEvents,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("exponent saturated ({exponent:.3e}) for account {account}, topic {topic}, t = {time}")]
    Saturation {
        account: usize,
        topic: usize,
        time: f64,
        exponent: f64,
    },

    #[error("non-finite log-likelihood at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("pagerank did not converge in {iterations} iterations (residual {residual:.3e})")]
    PageRankNotConverged { iterations: usize, residual: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
