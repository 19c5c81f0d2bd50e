//! Timestamped action records and the validated event log.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Post,
    Retweet,
    Mention,
}

impl ActionKind {
    /// Retweets and mentions are the events the likelihood is built on.
    pub fn is_response(self) -> bool {
        !matches!(self, ActionKind::Post)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Post => "post",
            ActionKind::Retweet => "retweet",
            ActionKind::Mention => "mention",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "post" => Ok(ActionKind::Post),
            "retweet" => Ok(ActionKind::Retweet),
            "mention" => Ok(ActionKind::Mention),
            other => Err(Error::invalid(format!(
                "unknown action kind {other:?} (expected post, retweet or mention)"
            ))),
        }
    }
}

/// One action. Account, topic and target are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub account: usize,
    pub topic: usize,
    pub kind: ActionKind,
    pub target: Option<usize>,
}

impl Event {
    pub fn post(time: f64, account: usize, topic: usize) -> Self {
        Event {
            time,
            account,
            topic,
            kind: ActionKind::Post,
            target: None,
        }
    }

    pub fn retweet(time: f64, account: usize, topic: usize, target: Option<usize>) -> Self {
        Event {
            time,
            account,
            topic,
            kind: ActionKind::Retweet,
            target,
        }
    }

    pub fn mention(time: f64, account: usize, topic: usize, target: Option<usize>) -> Self {
        Event {
            time,
            account,
            topic,
            kind: ActionKind::Mention,
            target,
        }
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.topic
            .cmp(&other.topic)
            .then(self.time.total_cmp(&other.time))
            .then(self.account.cmp(&other.account))
            .then(self.kind.cmp(&other.kind))
            .then(self.target.cmp(&other.target))
    }
}

/// Validated log sorted by `(topic, time, account)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
    n: usize,
    topics: usize,
    horizon: f64,
    /// `topic_offsets[l]..topic_offsets[l + 1]` is the slice of topic `l`.
    topic_offsets: Vec<usize>,
}

impl EventLog {
    /// Validate and sort.
    ///
    /// Rejects out-of-range accounts and topics, times outside `[0, horizon]`,
    /// posts carrying a target, and retweet/mention events that share a
    /// timestamp within one topic.
    pub fn new(mut events: Vec<Event>, n: usize, topics: usize, horizon: f64) -> Result<Self> {
        if n == 0 || topics == 0 {
            return Err(Error::invalid("event log needs n >= 1 and at least one topic"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        for e in &events {
            if !(e.time.is_finite() && e.time >= 0.0 && e.time <= horizon) {
                return Err(Error::invalid(format!(
                    "event time {} outside [0, {horizon}]",
                    e.time
                )));
            }
            if e.account >= n {
                return Err(Error::UnknownAccount {
                    account: e.account + 1,
                    n,
                });
            }
            if e.topic >= topics {
                return Err(Error::UnknownTopic {
                    topic: e.topic + 1,
                    topics,
                });
            }
            match (e.kind, e.target) {
                (ActionKind::Post, Some(_)) => {
                    return Err(Error::invalid(format!(
                        "post by account {} at t = {} carries a target",
                        e.account + 1,
                        e.time
                    )))
                }
                (_, Some(t)) if t >= n => {
                    return Err(Error::UnknownAccount { account: t + 1, n })
                }
                _ => {}
            }
        }
        events.sort_by(Event::sort_key_cmp);

        let mut topic_offsets = vec![0; topics + 1];
        for e in &events {
            topic_offsets[e.topic + 1] += 1;
        }
        for l in 0..topics {
            topic_offsets[l + 1] += topic_offsets[l];
        }

        for l in 0..topics {
            let mut last: Option<f64> = None;
            for e in &events[topic_offsets[l]..topic_offsets[l + 1]] {
                if !e.kind.is_response() {
                    continue;
                }
                if last == Some(e.time) {
                    return Err(Error::DuplicateEventTime {
                        topic: l + 1,
                        time: e.time,
                    });
                }
                last = Some(e.time);
            }
        }

        Ok(EventLog {
            events,
            n,
            topics,
            horizon,
            topic_offsets,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
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

    pub fn topic_events(&self, topic: usize) -> &[Event] {
        &self.events[self.topic_offsets[topic]..self.topic_offsets[topic + 1]]
    }

    /// Retweet/mention events, in log order.
    pub fn response_events(&self) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(|e| e.kind.is_response())
    }

    pub fn response_count(&self) -> usize {
        self.response_events().count()
    }

    /// Number of retweet/mention events of each account on each topic,
    /// indexed `[account][topic]`.
    pub fn response_counts(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; self.topics]; self.n];
        for e in self.response_events() {
            out[e.account][e.topic] += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_by_topic_time_account() {
        let log = EventLog::new(
            vec![
                Event::post(2.0, 1, 1),
                Event::post(3.0, 0, 0),
                Event::retweet(1.0, 1, 0, Some(0)),
                Event::post(1.0, 0, 0),
            ],
            2,
            2,
            5.0,
        )
        .unwrap();
        let order: Vec<_> = log.events().iter().map(|e| (e.topic, e.time, e.account)).collect();
        assert_eq!(order, vec![(0, 1.0, 0), (0, 1.0, 1), (0, 3.0, 0), (1, 2.0, 1)]);
        assert_eq!(log.topic_events(1).len(), 1);
        assert_eq!(log.response_count(), 1);
    }

    #[test]
    fn duplicate_response_times_rejected_within_topic_only() {
        let dup = EventLog::new(
            vec![Event::retweet(1.5, 0, 0, None), Event::mention(1.5, 1, 0, None)],
            2,
            1,
            2.0,
        );
        assert!(matches!(dup, Err(Error::DuplicateEventTime { topic: 1, time }) if time == 1.5));

        // across topics, and post/response collisions, are fine
        EventLog::new(
            vec![
                Event::retweet(1.5, 0, 0, None),
                Event::mention(1.5, 1, 1, None),
                Event::post(1.5, 1, 0),
            ],
            2,
            2,
            2.0,
        )
        .unwrap();
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            EventLog::new(vec![Event::post(0.0, 3, 0)], 2, 1, 1.0),
            Err(Error::UnknownAccount { account: 4, .. })
        ));
        assert!(matches!(
            EventLog::new(vec![Event::post(0.0, 0, 1)], 2, 1, 1.0),
            Err(Error::UnknownTopic { topic: 2, .. })
        ));
        assert!(EventLog::new(vec![Event::post(1.5, 0, 0)], 2, 1, 1.0).is_err());
        let mut bad = Event::post(0.5, 0, 0);
        bad.target = Some(1);
        assert!(EventLog::new(vec![bad], 2, 1, 1.0).is_err());
        assert!("reply".parse::<ActionKind>().is_err());
        assert_eq!("Retweet".parse::<ActionKind>().unwrap(), ActionKind::Retweet);
    }
}
