//! Synthetic followers networks and action logs generated under the model.
//!
//! Posts arrive at integer epochs `0, 1, ..., floor(t0)` (each account posts
//! `Binomial(J, p)` messages per epoch). Between epochs every account runs
//! an exponential clock at its current hazard; the earliest clock fires a
//! retweet/mention, counts update, and all clocks are redrawn. Hazards only
//! change at events and epochs, so the competing-clock draw is exact.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::{Event, EventLog};
use crate::hazard::{exponent, MAX_EXPONENT};
use crate::index::ActivityIndex;
use crate::influence::{influence_scores, mean_activities, Interval, DEFAULT_GRID};
use crate::network::FollowersNetwork;
use crate::optimizer::{estimate_with, FitStatus, NewtonConfig};
use crate::likelihood::LikelihoodWorkspace;
use crate::params::ParamVector;

/// Gap enforced between consecutive retweet/mention times of one topic.
pub const TIE_EPSILON: f64 = 1e-12;
pub const TIE_JITTER: f64 = 1e-9;
pub const DEFAULT_MAX_EVENTS_PER_TOPIC: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaSpec {
    Fixed(ParamVector),
    /// Every free coordinate drawn uniformly from `[lo, hi]`; `alpha_1 = 0`.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Random,
    Fixed(FollowersNetwork),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub topics: usize,
    /// Constant baseline hazard `a` on `[0, t0]`, per day.
    pub baseline: f64,
    /// Horizon `t0` in days.
    pub horizon: f64,
    /// Posting probability `p` per epoch.
    pub post_prob: f64,
    /// Binomial count `J` of posting trials per epoch.
    pub post_batch: u64,
    pub omega: OmegaSpec,
    pub network: NetworkSpec,
    pub seed: u64,
    pub replicates: usize,
    /// Stop observing a topic once it has this many retweet/mention events.
    /// Nothing after the capping event is recorded for that topic.
    pub max_events_per_topic: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 10,
            topics: 50,
            baseline: 0.5,
            horizon: 7.0,
            post_prob: 0.5,
            post_batch: 1,
            omega: OmegaSpec::Uniform { lo: -0.3, hi: 0.3 },
            network: NetworkSpec::Random,
            seed: 1,
            replicates: 1,
            max_events_per_topic: DEFAULT_MAX_EVENTS_PER_TOPIC,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        if self.topics == 0 {
            return bad("topics must be >= 1".into());
        }
        if !(self.baseline > 0.0 && self.baseline.is_finite()) {
            return bad(format!("baseline must be > 0, got {}", self.baseline));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(0.0..=1.0).contains(&self.post_prob) {
            return bad(format!("post_prob must be in [0, 1], got {}", self.post_prob));
        }
        if self.post_batch < 1 {
            return bad("post_batch must be >= 1".into());
        }
        if self.replicates < 1 {
            return bad("replicates must be >= 1".into());
        }
        if self.max_events_per_topic < 1 {
            return bad("max_events_per_topic must be >= 1".into());
        }
        match &self.omega {
            OmegaSpec::Fixed(p) if p.n() != self.n => {
                return bad(format!("fixed parameters have n = {}, config n = {}", p.n(), self.n))
            }
            OmegaSpec::Uniform { lo, hi } if !(lo <= hi && lo.is_finite() && hi.is_finite()) => {
                return bad(format!("invalid omega range [{lo}, {hi}]"))
            }
            _ => {}
        }
        if let NetworkSpec::Fixed(net) = &self.network {
            if net.n() != self.n {
                return bad(format!("fixed network has n = {}, config n = {}", net.n(), self.n));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

const STREAM_NETWORK: u64 = 1;
const STREAM_OMEGA: u64 = 2;
const STREAM_TOPIC: u64 = 3;

/// Two-pass random followers network.
///
/// Pass one gives each node `K1 ~ U{1..floor(n/2)}` followers; pass two gives
/// each node `K2 ~ U{1..floor(n/2)}` followees. Every node ends with at least
/// one follower and one followee.
pub fn generate_network(n: usize, seed: u64) -> Result<FollowersNetwork> {
    if n < 2 {
        return Err(Error::invalid(format!("network needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_max = n / 2;
    let mut adjacency = vec![false; n * n];
    let others = |i: usize, pick: usize| if pick >= i { pick + 1 } else { pick };
    for i in 0..n {
        let k1 = rng.random_range(1..=k_max);
        for pick in sample(&mut rng, n - 1, k1) {
            adjacency[i * n + others(i, pick)] = true;
        }
    }
    for j in 0..n {
        let k2 = rng.random_range(1..=k_max);
        for pick in sample(&mut rng, n - 1, k2) {
            adjacency[others(j, pick) * n + j] = true;
        }
    }
    Ok(FollowersNetwork::from_adjacency_unchecked(n, adjacency))
}

pub fn sample_omega(spec: &OmegaSpec, n: usize, seed: u64) -> Result<ParamVector> {
    match spec {
        OmegaSpec::Fixed(p) => Ok(p.clone()),
        OmegaSpec::Uniform { lo, hi } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let free: Vec<f64> = (0..ParamVector::free_dim(n))
                .map(|_| if lo == hi { *lo } else { rng.random_range(*lo..=*hi) })
                .collect();
            ParamVector::from_free(n, &free)
        }
    }
}

/// Events of one topic, possibly cut short by the per-topic cap.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicActions {
    pub events: Vec<Event>,
    /// Time of the capping event, if the topic hit `max_events_per_topic`.
    pub censored_at: Option<f64>,
}

/// One topic's posts, retweets and mentions on `[0, horizon]`.
pub fn generate_actions(
    network: &FollowersNetwork,
    omega: &ParamVector,
    config: &SimConfig,
    topic: usize,
    seed: u64,
) -> Result<TopicActions> {
    let n = network.n();
    if omega.n() != n {
        return Err(Error::Dimension(format!(
            "parameters for {} accounts, network has {n}",
            omega.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let posting = Binomial::new(config.post_batch, config.post_prob)
        .map_err(|e| Error::Config(format!("posting distribution: {e}")))?;
    let t0 = config.horizon;

    let mut log_counts = vec![0.0_f64; n];
    let mut counts = vec![0_u64; n];
    let mut events = Vec::new();
    let mut responses = 0_usize;
    let mut last_response = f64::NEG_INFINITY;
    let mut clocks = vec![0.0_f64; n];

    let last_epoch = t0.floor() as u64;
    for epoch in 0..=last_epoch {
        let start = epoch as f64;
        for i in 0..n {
            let k = posting.sample(&mut rng);
            for _ in 0..k {
                events.push(Event::post(start, i, topic));
            }
            if k > 0 {
                counts[i] += k;
                log_counts[i] = (counts[i] as f64).ln_1p();
            }
        }
        let end = (start + 1.0).min(t0);
        let mut t = start;
        loop {
            for (j, clock) in clocks.iter_mut().enumerate() {
                let eta = exponent(omega, network, j, &log_counts);
                if !eta.is_finite() || eta > MAX_EXPONENT {
                    return Err(Error::Saturation {
                        account: j + 1,
                        topic: topic + 1,
                        time: t,
                        exponent: eta,
                    });
                }
                let rate = config.baseline * eta.exp();
                let wait: f64 = rng.sample(Exp1);
                *clock = wait / rate;
            }
            let (winner, wait) = clocks
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("n >= 1");
            if t + wait >= end {
                break;
            }
            t += wait;
            while t - last_response < TIE_EPSILON {
                t = last_response + TIE_JITTER;
            }
            if t > t0 {
                break;
            }
            last_response = t;

            let followees = network.followees(winner);
            let target = (!followees.is_empty()).then(|| followees[rng.random_range(0..followees.len())]);
            let event = if target.is_some() && rng.random_bool(0.5) {
                Event::retweet(t, winner, topic, target)
            } else {
                Event::mention(t, winner, topic, target)
            };
            events.push(event);
            counts[winner] += 1;
            log_counts[winner] = (counts[winner] as f64).ln_1p();
            responses += 1;
            if responses >= config.max_events_per_topic {
                return Ok(TopicActions {
                    events,
                    censored_at: Some(t),
                });
            }
        }
    }
    Ok(TopicActions {
        events,
        censored_at: None,
    })
}

/// Ground truth and observations of one replicate.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub network: FollowersNetwork,
    pub truth: ParamVector,
    pub log: EventLog,
    /// Topics cut short by `max_events_per_topic`.
    pub censored_topics: usize,
}

pub fn simulate(config: &SimConfig, replicate: usize) -> Result<SimulatedData> {
    config.validate()?;
    let r = replicate as u64;
    let network = match &config.network {
        NetworkSpec::Random => generate_network(config.n, derive_seed(config.seed, &[r, STREAM_NETWORK]))?,
        NetworkSpec::Fixed(net) => net.clone(),
    };
    let truth = sample_omega(&config.omega, config.n, derive_seed(config.seed, &[r, STREAM_OMEGA]))?;
    let per_topic: Vec<TopicActions> = (0..config.topics)
        .into_par_iter()
        .map(|l| {
            let seed = derive_seed(config.seed, &[r, STREAM_TOPIC, l as u64]);
            generate_actions(&network, &truth, config, l, seed)
        })
        .collect::<Result<_>>()?;
    let censored_topics = per_topic.iter().filter(|t| t.censored_at.is_some()).count();
    let events = per_topic.into_iter().flat_map(|t| t.events).collect();
    let log = EventLog::new(events, config.n, config.topics, config.horizon)?;
    Ok(SimulatedData {
        network,
        truth,
        log,
        censored_topics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub response_events: usize,
    pub censored_topics: usize,
    pub status: Option<FitStatus>,
    pub converged: bool,
    pub iterations: usize,
    pub mse_omega: f64,
    pub mse_xi: f64,
    pub rel_omega: f64,
    pub rel_xi: f64,
    /// Rank of every account under the estimated scores (1-based, by account).
    #[serde(skip)]
    pub estimated_ranks: Vec<usize>,
    #[serde(skip)]
    pub estimated_xi: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Means {
    pub mse_omega: f64,
    pub mse_xi: f64,
    pub rel_omega: f64,
    pub rel_xi: f64,
    /// Replicates that entered the means.
    pub used: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub topics: usize,
    pub per_replicate: Vec<ReplicateRow>,
    pub means: Means,
}

/// Fit every replicate and compare against the ground truth.
pub fn run_experiment(config: &SimConfig, newton: &NewtonConfig) -> Result<ExperimentReport> {
    config.validate()?;
    newton.validate()?;
    let rows: Vec<ReplicateRow> = (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, newton, r))
        .collect();
    let used: Vec<&ReplicateRow> = rows.iter().filter(|r| r.converged).collect();
    let mean = |f: fn(&ReplicateRow) -> f64| {
        if used.is_empty() {
            f64::NAN
        } else {
            used.iter().map(|r| f(r)).sum::<f64>() / used.len() as f64
        }
    };
    let means = Means {
        mse_omega: mean(|r| r.mse_omega),
        mse_xi: mean(|r| r.mse_xi),
        rel_omega: mean(|r| r.rel_omega),
        rel_xi: mean(|r| r.rel_xi),
        used: used.len(),
        failures: rows.len() - used.len(),
    };
    Ok(ExperimentReport {
        n: config.n,
        topics: config.topics,
        per_replicate: rows,
        means,
    })
}

fn run_replicate(config: &SimConfig, newton: &NewtonConfig, replicate: usize) -> ReplicateRow {
    let mut row = ReplicateRow {
        replicate,
        response_events: 0,
        censored_topics: 0,
        status: None,
        converged: false,
        iterations: 0,
        mse_omega: f64::NAN,
        mse_xi: f64::NAN,
        rel_omega: f64::NAN,
        rel_xi: f64::NAN,
        estimated_ranks: Vec::new(),
        estimated_xi: Vec::new(),
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let data = simulate(config, replicate)?;
        row.response_events = data.log.response_count();
        row.censored_topics = data.censored_topics;
        let index = ActivityIndex::build(&data.log, &data.network)?;
        let ws = LikelihoodWorkspace::from_index(&data.log, &data.network, &index)?;
        let fit = estimate_with(&ws, newton)?;
        row.status = Some(fit.status);
        row.converged = fit.converged;
        row.iterations = fit.iterations;
        if let Some(d) = &fit.diagnostic {
            row.error = Some(d.clone());
        }

        let interval = Interval::new(0.0, config.horizon)?;
        let mbar = mean_activities(&index, interval, DEFAULT_GRID)?;
        let xi_true = influence_scores(&data.truth, &data.network, &mbar)?;
        let xi_hat = influence_scores(&fit.params, &data.network, &mbar)?;

        let n = config.n as f64;
        let d_omega = fit.params.distance(&data.truth);
        row.mse_omega = d_omega / (2.0 * n - 1.0).sqrt();
        row.rel_omega = d_omega / data.truth.norm();
        let (d_xi, norm_xi) = finite_distance(&xi_hat.scores, &xi_true.scores);
        row.mse_xi = d_xi / n.sqrt();
        row.rel_xi = d_xi / norm_xi;
        row.estimated_ranks = xi_hat.ranks();
        row.estimated_xi = xi_hat.scores;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.converged = false;
        row.error = Some(e.to_string());
    }
    row
}

/// `(||a - b||, ||b||)` over entries finite in both.
fn finite_distance(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (mut d, mut nb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        if x.is_finite() && y.is_finite() {
            d += (x - y) * (x - y);
            nb += y * y;
        }
    }
    (d.sqrt(), nb.sqrt())
}
