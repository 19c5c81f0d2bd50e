//! Per-(account, topic) sorted action times for fast left-limit counts.

use crate::error::{Error, Result};
use crate::events::EventLog;
use crate::network::FollowersNetwork;

/// Answers `M_i(t⁻, l)`: the number of actions (posts, retweets and
/// mentions) of account `i` on topic `l` strictly before `t`.
#[derive(Debug, Clone)]
pub struct ActivityIndex {
    n: usize,
    topics: usize,
    horizon: f64,
    /// All action times, `[account * topics + topic]`, ascending.
    actions: Vec<Vec<f64>>,
    /// Retweet/mention times only, same layout.
    responses: Vec<Vec<f64>>,
    /// All action times of an account across topics, ascending.
    account_actions: Vec<Vec<f64>>,
}

impl ActivityIndex {
    pub fn build(log: &EventLog, network: &FollowersNetwork) -> Result<Self> {
        if log.n() != network.n() {
            return Err(Error::Dimension(format!(
                "event log has {} accounts, network has {}",
                log.n(),
                network.n()
            )));
        }
        let (n, topics) = (log.n(), log.topics());
        let mut actions = vec![Vec::new(); n * topics];
        let mut responses = vec![Vec::new(); n * topics];
        let mut account_actions = vec![Vec::new(); n];
        // the log is sorted by (topic, time), so per-cell pushes stay sorted
        for e in log.events() {
            let cell = e.account * topics + e.topic;
            actions[cell].push(e.time);
            if e.kind.is_response() {
                responses[cell].push(e.time);
            }
            account_actions[e.account].push(e.time);
        }
        for times in &mut account_actions {
            times.sort_by(f64::total_cmp);
        }
        Ok(Self {
            n,
            topics,
            horizon: log.horizon(),
            actions,
            responses,
            account_actions,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Actions of `account` on `topic` strictly before `t`; `t` is clamped
    /// to `[0, horizon]`.
    #[inline]
    pub fn count_m(&self, account: usize, topic: usize, t: f64) -> usize {
        let t = t.clamp(0.0, self.horizon);
        strictly_before(&self.actions[account * self.topics + topic], t)
    }

    /// Retweets/mentions of `account` on `topic` strictly before `t`.
    pub fn count_n(&self, account: usize, topic: usize, t: f64) -> usize {
        let t = t.clamp(0.0, self.horizon);
        strictly_before(&self.responses[account * self.topics + topic], t)
    }

    /// Posts of `account` on `topic` strictly before `t`.
    pub fn count_a(&self, account: usize, topic: usize, t: f64) -> usize {
        self.count_m(account, topic, t) - self.count_n(account, topic, t)
    }

    /// Cross-topic total `Σ_l M_i(t⁻, l)`.
    pub fn count_all_topics(&self, account: usize, t: f64) -> usize {
        let t = t.clamp(0.0, self.horizon);
        strictly_before(&self.account_actions[account], t)
    }

    pub fn action_times(&self, account: usize, topic: usize) -> &[f64] {
        &self.actions[account * self.topics + topic]
    }
}

fn strictly_before(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&x| x < t)
}
