#![allow(dead_code)]

use cpinfluence::{ActionKind, Event, EventLog, FollowersNetwork, ParamVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub network: FollowersNetwork,
    pub log: EventLog,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_network(rng: &mut impl Rng, n: usize, density: f64) -> FollowersNetwork {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    FollowersNetwork::from_edges(n, edges).unwrap()
}

/// Random log with at least one retweet/mention and distinct times per topic.
pub fn random_instance(rng: &mut impl Rng, max_n: usize, max_topics: usize, max_events: usize) -> Instance {
    let n = rng.random_range(2..=max_n);
    let topics = rng.random_range(1..=max_topics);
    let network = random_network(rng, n, 0.5);
    let count = rng.random_range(1..=max_events);
    let horizon = 10.0;
    let mut events = Vec::with_capacity(count);
    for k in 0..count {
        let topic = rng.random_range(0..topics);
        // distinct times: a random permutation slot plus a small offset
        let time = (k as f64 + rng.random::<f64>() * 0.5) * horizon / count as f64;
        let account = rng.random_range(0..n);
        let kind = if k == 0 {
            ActionKind::Retweet
        } else {
            match rng.random_range(0..3) {
                0 => ActionKind::Post,
                1 => ActionKind::Retweet,
                _ => ActionKind::Mention,
            }
        };
        events.push(Event {
            time,
            account,
            topic,
            kind,
            target: None,
        });
    }
    let log = EventLog::new(events, n, topics, horizon).unwrap();
    Instance { network, log }
}

pub fn random_params(rng: &mut impl Rng, n: usize, scale: f64) -> ParamVector {
    let free: Vec<f64> = (0..ParamVector::free_dim(n))
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    ParamVector::from_free(n, &free).unwrap()
}

/// Linear-scan `M_u(t-, l)`.
pub fn naive_count(log: &EventLog, account: usize, topic: usize, t: f64) -> usize {
    log.events()
        .iter()
        .filter(|e| e.account == account && e.topic == topic && e.time < t)
        .count()
}

/// Log partial likelihood evaluated straight from the event list.
pub fn naive_log_likelihood(inst: &Instance, params: &ParamVector) -> f64 {
    let n = inst.network.n();
    let (alpha, beta) = (params.alpha(), params.beta());
    let mut ll = 0.0;
    for e in inst.log.events().iter().filter(|e| e.kind.is_response()) {
        let x: Vec<f64> = (0..n)
            .map(|u| ((naive_count(&inst.log, u, e.topic, e.time) + 1) as f64).ln())
            .collect();
        let eta: Vec<f64> = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&u| inst.network.follows(u, v))
                    .map(|u| (alpha[u] + beta[v]) * x[u])
                    .sum()
            })
            .collect();
        let denom: f64 = eta.iter().map(|h| h.exp()).sum();
        ll += eta[e.account] - denom.ln();
    }
    ll
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
