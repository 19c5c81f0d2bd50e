//! Log-scale influence scores and rankings.
//!
//! The score of account `i` is
//! `log sum_{j follows i} exp(ln(Mbar_i + 1) (alpha_i + beta_j))`, the log of
//! the total hazard multiplier `i` induces on its followers when acting at
//! its average activity level `Mbar_i`. Activity is summed over topics.
//! Accounts without followers score `-inf`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::ActivityIndex;
use crate::network::FollowersNetwork;
use crate::params::ParamVector;

pub const DEFAULT_GRID: usize = 256;

/// Narrowest averaging interval accepted.
pub const MIN_INTERVAL_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub from: f64,
    pub to: f64,
}

impl Interval {
    pub fn new(from: f64, to: f64) -> Result<Self> {
        if !(from.is_finite() && to.is_finite()) || from < 0.0 {
            return Err(Error::invalid(format!("invalid interval [{from}, {to}]")));
        }
        if to - from < MIN_INTERVAL_WIDTH {
            return Err(Error::invalid(format!(
                "interval [{from}, {to}] is empty or narrower than {MIN_INTERVAL_WIDTH}"
            )));
        }
        Ok(Self { from, to })
    }

    pub fn width(&self) -> f64 {
        self.to - self.from
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceVector {
    pub scores: Vec<f64>,
    pub interval: Option<Interval>,
    /// Accounts by descending score.
    pub ranking: Vec<usize>,
}

impl InfluenceVector {
    pub fn from_scores(scores: Vec<f64>, interval: Option<Interval>) -> Self {
        let ranking = rank(&scores);
        Self {
            scores,
            interval,
            ranking,
        }
    }

    /// 1-based rank of each account.
    pub fn ranks(&self) -> Vec<usize> {
        let mut out = vec![0; self.scores.len()];
        for (pos, &acc) in self.ranking.iter().enumerate() {
            out[acc] = pos + 1;
        }
        out
    }
}

/// Time average over `interval` of the cross-topic activity count of
/// `account`, sampled at the midpoints of `grid` equal cells.
pub fn mean_activity(index: &ActivityIndex, account: usize, interval: Interval, grid: usize) -> Result<f64> {
    if grid == 0 {
        return Err(Error::invalid("grid must be positive"));
    }
    if interval.to > index.horizon() + 1e-12 {
        return Err(Error::invalid(format!(
            "interval end {} beyond horizon {}",
            interval.to,
            index.horizon()
        )));
    }
    let h = interval.width() / grid as f64;
    let total: usize = (0..grid)
        .map(|k| index.count_all_topics(account, interval.from + (k as f64 + 0.5) * h))
        .sum();
    Ok(total as f64 / grid as f64)
}

pub fn mean_activities(index: &ActivityIndex, interval: Interval, grid: usize) -> Result<Vec<f64>> {
    (0..index.n())
        .map(|i| mean_activity(index, i, interval, grid))
        .collect()
}

pub fn influence_scores(
    params: &ParamVector,
    network: &FollowersNetwork,
    mean_acts: &[f64],
) -> Result<InfluenceVector> {
    let n = network.n();
    if params.n() != n || mean_acts.len() != n {
        return Err(Error::Dimension(format!(
            "network n = {n}, params n = {}, activity entries = {}",
            params.n(),
            mean_acts.len()
        )));
    }
    if let Some(i) = mean_acts.iter().position(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(Error::invalid(format!(
            "mean activity of account {} is {}",
            i + 1,
            mean_acts[i]
        )));
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    let scores = (0..n)
        .map(|i| {
            let c = mean_acts[i].ln_1p();
            log_sum_exp(network.followers(i).iter().map(|&j| c * (alpha[i] + beta[j])))
        })
        .collect();
    Ok(InfluenceVector::from_scores(scores, None))
}

/// Accounts ordered by descending score; ties by ascending index, `-inf` last.
pub fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| cmp_desc(scores[a], scores[b]).then(a.cmp(&b)));
    order
}

fn cmp_desc(a: f64, b: f64) -> Ordering {
    // NaN sorts after -inf
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => b.partial_cmp(&a).unwrap_or(Ordering::Equal),
    }
}

/// `ln sum exp(x)` with max subtraction; `-inf` for an empty sequence.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Format a score for CSV output (`-inf` for followerless accounts).
pub fn format_score(score: f64) -> String {
    if score == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{score}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, EventLog};
    use approx::assert_relative_eq;

    #[test]
    fn single_follower_score() {
        let net = FollowersNetwork::from_edges(3, [(1, 2)]).unwrap();
        let p = ParamVector::new(vec![0.0, 0.4, -0.1], vec![0.3, 0.2, -0.7]).unwrap();
        let xi = influence_scores(&p, &net, &[0.0, 2.5, 1.0]).unwrap();
        assert_relative_eq!(xi.scores[1], 3.5f64.ln() * (0.4 - 0.7), epsilon = 1e-14);
        assert_eq!(xi.scores[0], f64::NEG_INFINITY);
        assert_eq!(xi.scores[2], f64::NEG_INFINITY);
        assert_eq!(xi.ranking, vec![1, 0, 2]);
    }

    #[test]
    fn zero_activity_gives_ln_k() {
        let net = FollowersNetwork::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = ParamVector::new(vec![0.0, 1.0, 2.0, 3.0], vec![5.0, -5.0, 1.0, 0.0]).unwrap();
        let xi = influence_scores(&p, &net, &[0.0; 4]).unwrap();
        assert_relative_eq!(xi.scores[0], 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn ranking_rules() {
        assert_eq!(rank(&[0.5, 0.5, 0.5]), vec![0, 1, 2]);
        assert_eq!(rank(&[1.0, f64::NEG_INFINITY, 2.0]), vec![2, 0, 1]);
        assert_eq!(rank(&[f64::NEG_INFINITY, f64::NEG_INFINITY, -3.0]), vec![2, 0, 1]);
        let v = InfluenceVector::from_scores(vec![1.0, f64::NEG_INFINITY, 2.0], None);
        assert_eq!(v.ranks(), vec![2, 3, 1]);
    }

    #[test]
    fn mean_activity_cases() {
        let net = FollowersNetwork::from_edges(2, []).unwrap();
        let log = EventLog::new(
            vec![
                Event::post(0.0, 0, 0),
                Event::post(1.0, 1, 0),
                Event::mention(2.0, 1, 1, None),
                Event::post(3.0, 1, 0),
            ],
            2,
            2,
            4.0,
        )
        .unwrap();
        let idx = ActivityIndex::build(&log, &net).unwrap();
        let m = mean_activity(&idx, 0, Interval::new(1.0, 2.0).unwrap(), DEFAULT_GRID).unwrap();
        assert_eq!(m, 1.0);
        // exact piecewise integral: (0*1 + 1*1 + 2*1 + 3*1) / 4, across two topics
        let m = mean_activity(&idx, 1, Interval::new(0.0, 4.0).unwrap(), DEFAULT_GRID).unwrap();
        assert!((m - 1.5).abs() <= 1.0 / DEFAULT_GRID as f64);

        let empty = EventLog::new(vec![], 2, 1, 4.0).unwrap();
        let idx = ActivityIndex::build(&empty, &net).unwrap();
        assert_eq!(mean_activity(&idx, 0, Interval::new(0.0, 4.0).unwrap(), 16).unwrap(), 0.0);
        assert!(mean_activity(&idx, 0, Interval::new(0.0, 5.0).unwrap(), 16).is_err());
    }

    #[test]
    fn degenerate_intervals_rejected() {
        assert!(Interval::new(2.0, 2.0).is_err());
        assert!(Interval::new(3.0, 2.0).is_err());
        assert!(Interval::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn lse_is_stable() {
        let v = log_sum_exp([1000.0, 1000.0].into_iter());
        assert_relative_eq!(v, 1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(std::iter::empty()), f64::NEG_INFINITY);
    }
}
