//! CSV file formats. Account and topic ids are 1-based in every file.
//!
//! - events: `time,account,topic,kind,target` (time as day offset or ISO-8601)
//! - network: `influencer,follower`
//! - labels: `id,label`
//! - params: `account,alpha,beta`
//! - scores: `account,label,score,rank`
//! - trace: `iter,ll,grad_norm,tau,mu`
//! - external scores: `label,score`; controls: `label,<columns...>`

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::baselines::Controls;
use crate::error::{Error, Result};
use crate::events::{ActionKind, Event, EventLog};
use crate::influence::{format_score, InfluenceVector};
use crate::network::FollowersNetwork;
use crate::optimizer::TraceRow;
use crate::params::ParamVector;

fn csv_err(path: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_string(),
        source,
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
struct EventRecord {
    time: String,
    account: usize,
    topic: usize,
    kind: String,
    target: Option<usize>,
}

/// Events as read from a file, before dimensions are known.
#[derive(Debug, Clone)]
pub struct RawEvents {
    /// 0-based ids; times are day offsets.
    pub events: Vec<Event>,
    pub max_account: usize,
    pub max_topic: usize,
    pub max_time: f64,
    /// Earliest timestamp when times were given as ISO-8601.
    pub origin: Option<NaiveDateTime>,
}

impl RawEvents {
    /// Validate into a log. `n` defaults to the largest account id seen and
    /// `horizon` to the latest event time (1 day if every event is at 0).
    pub fn into_log(self, n: Option<usize>, topics: Option<usize>, horizon: Option<f64>) -> Result<EventLog> {
        let n = n.unwrap_or(self.max_account);
        let topics = topics.unwrap_or(self.max_topic).max(1);
        let horizon = horizon.unwrap_or(if self.max_time > 0.0 { self.max_time } else { 1.0 });
        EventLog::new(self.events, n, topics, horizon)
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

pub fn read_events(reader: impl Read, source: &str) -> Result<RawEvents> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let records: Vec<EventRecord> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(source))?;

    let numeric: Vec<Option<f64>> = records.iter().map(|r| r.time.parse::<f64>().ok()).collect();
    let all_numeric = numeric.iter().all(Option::is_some);
    let (times, origin) = if all_numeric {
        (numeric.into_iter().map(|t| t.unwrap_or_default()).collect::<Vec<_>>(), None)
    } else {
        let stamps: Vec<NaiveDateTime> = records
            .iter()
            .map(|r| {
                parse_timestamp(&r.time)
                    .ok_or_else(|| Error::invalid(format!("{source}: unparseable time {:?}", r.time)))
            })
            .collect::<Result<_>>()?;
        let origin = stamps.iter().min().copied();
        let times = stamps
            .iter()
            .map(|s| {
                let d = *s - origin.unwrap_or(*s);
                d.num_milliseconds() as f64 / 86_400_000.0
            })
            .collect();
        (times, origin)
    };

    let mut out = RawEvents {
        events: Vec::with_capacity(records.len()),
        max_account: 0,
        max_topic: 0,
        max_time: 0.0,
        origin,
    };
    for (rec, time) in records.into_iter().zip(times) {
        if rec.account == 0 || rec.topic == 0 || rec.target == Some(0) {
            return Err(Error::invalid(format!("{source}: ids are 1-based")));
        }
        let kind: ActionKind = rec.kind.parse()?;
        out.max_account = out.max_account.max(rec.account).max(rec.target.unwrap_or(0));
        out.max_topic = out.max_topic.max(rec.topic);
        out.max_time = out.max_time.max(time);
        out.events.push(Event {
            time,
            account: rec.account - 1,
            topic: rec.topic - 1,
            kind,
            target: rec.target.map(|t| t - 1),
        });
    }
    Ok(out)
}

pub fn read_events_file(path: &Path) -> Result<RawEvents> {
    read_events(open(path)?, &path.display().to_string())
}

pub fn write_events(writer: impl Write, log: &EventLog) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = csv_err("events");
    w.write_record(["time", "account", "topic", "kind", "target"]).map_err(&err)?;
    for e in log.events() {
        let target = e.target.map(|t| (t + 1).to_string()).unwrap_or_default();
        w.write_record([
            e.time.to_string(),
            (e.account + 1).to_string(),
            (e.topic + 1).to_string(),
            e.kind.to_string(),
            target,
        ])
        .map_err(&err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct EdgeRecord {
    influencer: usize,
    follower: usize,
}

/// 1-based `(influencer, follower)` pairs.
pub fn read_edges(reader: impl Read, source: &str) -> Result<Vec<(usize, usize)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<EdgeRecord>()
        .map(|r| {
            let r = r.map_err(csv_err(source))?;
            if r.influencer == 0 || r.follower == 0 {
                return Err(Error::invalid(format!("{source}: ids are 1-based")));
            }
            Ok((r.influencer, r.follower))
        })
        .collect()
}

pub fn read_edges_file(path: &Path) -> Result<Vec<(usize, usize)>> {
    read_edges(open(path)?, &path.display().to_string())
}

/// Network over `n` accounts (default: largest id in the edge list).
pub fn network_from_edges(edges: &[(usize, usize)], n: Option<usize>) -> Result<FollowersNetwork> {
    let max_id = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    let n = n.unwrap_or(max_id);
    if max_id > n {
        return Err(Error::UnknownAccount { account: max_id, n });
    }
    FollowersNetwork::from_edges(n, edges.iter().map(|&(a, b)| (a - 1, b - 1)))
}

pub fn write_network(writer: impl Write, network: &FollowersNetwork) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = csv_err("network");
    w.write_record(["influencer", "follower"]).map_err(&err)?;
    for (i, j) in network.edges() {
        w.write_record([(i + 1).to_string(), (j + 1).to_string()]).map_err(&err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
struct LabelRecord {
    id: usize,
    label: String,
}

/// `id -> label` map, 1-based ids.
pub fn read_labels(reader: impl Read, source: &str) -> Result<HashMap<usize, String>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<LabelRecord>()
        .map(|r| r.map(|r| (r.id, r.label)).map_err(csv_err(source)))
        .collect()
}

pub fn read_labels_file(path: &Path) -> Result<HashMap<usize, String>> {
    read_labels(open(path)?, &path.display().to_string())
}

/// Labels for `n` accounts, defaulting to the account id.
pub fn resolve_labels(n: usize, labels: &HashMap<usize, String>) -> Result<Vec<String>> {
    if let Some(&id) = labels.keys().find(|&&id| id == 0 || id > n) {
        return Err(Error::UnknownAccount { account: id, n });
    }
    Ok((1..=n)
        .map(|i| labels.get(&i).cloned().unwrap_or_else(|| i.to_string()))
        .collect())
}

#[derive(Debug, Deserialize, Serialize)]
struct ParamRecord {
    account: usize,
    alpha: f64,
    beta: f64,
}

pub fn write_params(writer: impl Write, params: &ParamVector) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = csv_err("params");
    w.write_record(["account", "alpha", "beta"]).map_err(&err)?;
    for (i, (a, b)) in params.alpha().iter().zip(params.beta()).enumerate() {
        w.write_record([(i + 1).to_string(), a.to_string(), b.to_string()])
            .map_err(&err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_params(reader: impl Read, source: &str) -> Result<ParamVector> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<ParamRecord> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(source))?;
    rows.sort_by_key(|r| r.account);
    if rows.iter().enumerate().any(|(i, r)| r.account != i + 1) {
        return Err(Error::invalid(format!("{source}: accounts must be 1..n without gaps")));
    }
    ParamVector::new(
        rows.iter().map(|r| r.alpha).collect(),
        rows.iter().map(|r| r.beta).collect(),
    )
}

pub fn read_params_file(path: &Path) -> Result<ParamVector> {
    read_params(open(path)?, &path.display().to_string())
}

/// `account,label,score,rank` in account order.
pub fn write_scores(writer: impl Write, scores: &InfluenceVector, labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = csv_err("scores");
    w.write_record(["account", "label", "score", "rank"]).map_err(&err)?;
    let ranks = scores.ranks();
    for (i, s) in scores.scores.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            labels[i].clone(),
            format_score(*s),
            ranks[i].to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScoreRecord {
    pub account: usize,
    pub label: String,
    pub score: String,
    pub rank: usize,
}

/// Scores file back into per-account scores and labels.
pub fn read_scores(reader: impl Read, source: &str) -> Result<(Vec<f64>, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<ScoreRecord> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(source))?;
    rows.sort_by_key(|r| r.account);
    if rows.iter().enumerate().any(|(i, r)| r.account != i + 1) {
        return Err(Error::invalid(format!("{source}: accounts must be 1..n without gaps")));
    }
    let scores = rows
        .iter()
        .map(|r| match r.score.as_str() {
            "-inf" => Ok(f64::NEG_INFINITY),
            s => s
                .parse()
                .map_err(|_| Error::invalid(format!("{source}: bad score {s:?}"))),
        })
        .collect::<Result<_>>()?;
    Ok((scores, rows.into_iter().map(|r| r.label).collect()))
}

pub fn read_scores_file(path: &Path) -> Result<(Vec<f64>, Vec<String>)> {
    read_scores(open(path)?, &path.display().to_string())
}

pub fn write_trace(writer: impl Write, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = csv_err("trace");
    w.write_record(["iter", "ll", "grad_norm", "tau", "mu"]).map_err(&err)?;
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            r.ll.to_string(),
            r.grad_norm.to_string(),
            r.tau.to_string(),
            r.mu.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush()?;
    Ok(())
}

/// `label,score`.
pub fn read_external_scores(reader: impl Read, source: &str) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        label: String,
        score: f64,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<Row>()
        .map(|r| r.map(|r| (r.label, r.score)).map_err(csv_err(source)))
        .collect()
}

pub fn read_external_scores_file(path: &Path) -> Result<HashMap<String, f64>> {
    read_external_scores(open(path)?, &path.display().to_string())
}

/// `label,<numeric control columns...>`.
pub fn read_controls(reader: impl Read, source: &str) -> Result<Controls> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err(source))?.clone();
    if headers.get(0) != Some("label") || headers.len() < 2 {
        return Err(Error::invalid(format!(
            "{source}: expected header label,<control columns...>"
        )));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut values = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(source))?;
        let label = rec.get(0).unwrap_or_default().to_string();
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("{source}: non-numeric control {v:?} for {label}")))
            })
            .collect::<Result<Vec<_>>>()?;
        values.insert(label, row);
    }
    Ok(Controls { names, values })
}

pub fn read_controls_file(path: &Path) -> Result<Controls> {
    read_controls(open(path)?, &path.display().to_string())
}

/// Generic numeric table with a header row, for the regression command.
pub fn read_table(reader: impl Read, source: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_err(source))?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(source))?;
            rec.iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("{source}: non-numeric value {v:?}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((headers, rows))
}
