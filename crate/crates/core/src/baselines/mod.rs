//! Comparison baselines: PageRank on the followers network and the OLS
//! harness that relates influence measures to external scores.

mod compare;
mod ols;
mod pagerank;

pub use compare::{compare_measures, ComparisonInput, ComparisonReport, ComparisonRow, Controls};
pub use ols::{ols_regress, with_intercept, Coefficient, RegressionResult, ResponseTransform, LOGIT_EPSILON};
pub use pagerank::{pagerank, PageRankConfig};
