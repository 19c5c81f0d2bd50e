use std::collections::HashMap;

use serde::Serialize;

use super::ols::{ols_regress, with_intercept, RegressionResult, ResponseTransform};
use crate::error::{Error, Result};

/// Control variables keyed by account label.
#[derive(Debug, Clone, Default)]
pub struct Controls {
    pub names: Vec<String>,
    pub values: HashMap<String, Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ComparisonInput<'a> {
    pub labels: &'a [String],
    pub influence: &'a [f64],
    pub pagerank: &'a [f64],
    pub external: &'a HashMap<String, f64>,
    pub controls: Option<&'a Controls>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub response: ResponseTransform,
    pub proposed: bool,
    pub pagerank: bool,
    pub r_squared: f64,
    pub regression: RegressionResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub matched: Vec<String>,
    pub dropped: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn r_squared(&self, response: ResponseTransform, proposed: bool, pagerank: bool) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.response == response && r.proposed == proposed && r.pagerank == pagerank)
            .map(|r| r.r_squared)
    }
}

pub const PROPOSED_NAME: &str = "Proposed Influence";
pub const PAGERANK_NAME: &str = "PageRank";

/// Regress the external score on (proposed only), (PageRank only) and
/// (both), each with intercept and controls, for every response transform.
///
/// Accounts are aligned by label; accounts missing from the external or
/// control tables, or without followers (`-inf` influence), are dropped.
pub fn compare_measures(input: &ComparisonInput<'_>, transforms: &[ResponseTransform]) -> Result<ComparisonReport> {
    let n = input.labels.len();
    if input.influence.len() != n || input.pagerank.len() != n {
        return Err(Error::Dimension(format!(
            "{n} labels, {} influence scores, {} PageRank scores",
            input.influence.len(),
            input.pagerank.len()
        )));
    }
    let control_names: Vec<&str> = input
        .controls
        .map(|c| c.names.iter().map(String::as_str).collect())
        .unwrap_or_default();

    let mut matched = Vec::new();
    let mut dropped = Vec::new();
    let mut y = Vec::new();
    let mut rows: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for (i, label) in input.labels.iter().enumerate() {
        let Some(&ext) = input.external.get(label) else {
            log::info!("dropping {label}: no external score");
            dropped.push(label.clone());
            continue;
        };
        let ctrl = match input.controls {
            Some(c) => match c.values.get(label) {
                Some(v) => v.clone(),
                None => {
                    log::info!("dropping {label}: no control values");
                    dropped.push(label.clone());
                    continue;
                }
            },
            None => Vec::new(),
        };
        if !input.influence[i].is_finite() {
            log::info!("dropping {label}: influence score is not finite");
            dropped.push(label.clone());
            continue;
        }
        matched.push(label.clone());
        y.push(ext);
        rows.push((input.influence[i], input.pagerank[i], ctrl));
    }
    let widest = 3 + control_names.len();
    if matched.len() < widest + 2 {
        return Err(Error::invalid(format!(
            "only {} matched accounts; need at least {}",
            matched.len(),
            widest + 2
        )));
    }

    let mut out = Vec::new();
    for &transform in transforms {
        for (proposed, pagerank) in [(true, false), (false, true), (true, true)] {
            let mut names: Vec<&str> = Vec::new();
            if proposed {
                names.push(PROPOSED_NAME);
            }
            if pagerank {
                names.push(PAGERANK_NAME);
            }
            names.extend(&control_names);
            let predictors: Vec<Vec<f64>> = rows
                .iter()
                .map(|(xi, pr, ctrl)| {
                    let mut r = Vec::with_capacity(names.len());
                    if proposed {
                        r.push(*xi);
                    }
                    if pagerank {
                        r.push(*pr);
                    }
                    r.extend(ctrl);
                    r
                })
                .collect();
            let (design, labels) = with_intercept(&predictors, &names);
            let regression = ols_regress(&y, &design, &labels, transform)?;
            out.push(ComparisonRow {
                response: transform,
                proposed,
                pagerank,
                r_squared: regression.r_squared,
                regression,
            });
        }
    }
    Ok(ComparisonReport {
        matched,
        dropped,
        rows: out,
    })
}
