//! Log partial likelihood with analytic gradient and Hessian.
//!
//! At a retweet/mention event of account `j` on topic `l` at time `T`, every
//! account `v` carries the linear predictor
//!
//! ```text
//! eta_v = sum_{u in followees(v)} (alpha_u + beta_v) * x_u,   x_u = ln(M_u(T-, l) + 1)
//! ```
//!
//! which is linear in the parameters: `eta_v = z_v . omega` with
//! `z_v[alpha_u] = x_u` for each followee `u` and `z_v[beta_v] = s_v`, the sum
//! of the followee covariates. The event contributes `eta_j - logsumexp(eta)`,
//! so the gradient is `z_j - zbar` and the Hessian is
//! `-(sum_v p_v z_v z_v^T - zbar zbar^T)` with `p = softmax(eta)` and
//! `zbar = sum_v p_v z_v`. The risk set is every account.
//!
//! Evaluation is split into fixed-size event blocks that may run in parallel;
//! the block partial sums are reduced in block order, so results do not
//! depend on the number of worker threads.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::EventLog;
use crate::index::ActivityIndex;
use crate::network::FollowersNetwork;
use crate::params::ParamVector;

const BLOCK_EVENTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Result of one evaluation. Gradient and Hessian are over the free
/// coordinates `[alpha_2..alpha_n, beta_1..beta_n]` when requested.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub ll: f64,
    pub gradient: Option<Vec<f64>>,
    pub hessian: Option<DMatrix<f64>>,
    /// Set when the log holds no retweet/mention events (`ll` is then 0).
    pub empty: bool,
}

#[derive(Debug, Clone, Copy)]
struct EventRef {
    topic: usize,
    account: usize,
    time: f64,
}

/// Precomputed covariates for every retweet/mention event.
#[derive(Debug, Clone)]
pub struct LikelihoodWorkspace {
    n: usize,
    topics: usize,
    network: FollowersNetwork,
    events: Vec<EventRef>,
    /// `topic_offsets[l]..topic_offsets[l + 1]` indexes the events of topic `l`.
    topic_offsets: Vec<usize>,
    /// `x[e * n + u] = ln(M_u(T_e-, l_e) + 1)`.
    x: Vec<f64>,
    /// `s[e * n + v] = sum over followees u of v of x[e * n + u]`.
    s: Vec<f64>,
}

impl LikelihoodWorkspace {
    pub fn new(log: &EventLog, network: &FollowersNetwork) -> Result<Self> {
        let index = ActivityIndex::build(log, network)?;
        Self::from_index(log, network, &index)
    }

    pub fn from_index(log: &EventLog, network: &FollowersNetwork, index: &ActivityIndex) -> Result<Self> {
        if log.n() != network.n() || index.n() != network.n() {
            return Err(Error::Dimension(format!(
                "log n = {}, index n = {}, network n = {}",
                log.n(),
                index.n(),
                network.n()
            )));
        }
        let n = network.n();
        let events: Vec<EventRef> = log
            .response_events()
            .map(|e| EventRef {
                topic: e.topic,
                account: e.account,
                time: e.time,
            })
            .collect();
        let mut topic_offsets = vec![0; log.topics() + 1];
        for e in &events {
            topic_offsets[e.topic + 1] += 1;
        }
        for l in 0..log.topics() {
            topic_offsets[l + 1] += topic_offsets[l];
        }

        let mut x = vec![0.0; events.len() * n];
        let mut s = vec![0.0; events.len() * n];
        x.par_chunks_mut(n.max(1))
            .zip(s.par_chunks_mut(n.max(1)))
            .zip(events.par_iter())
            .for_each(|((xe, se), ev)| {
                for (u, xu) in xe.iter_mut().enumerate() {
                    *xu = (index.count_m(u, ev.topic, ev.time) as f64).ln_1p();
                }
                for (v, sv) in se.iter_mut().enumerate() {
                    *sv = network.followees(v).iter().map(|&u| xe[u]).sum();
                }
            });

        Ok(Self {
            n,
            topics: log.topics(),
            network: network.clone(),
            events,
            topic_offsets,
            x,
            s,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn free_dim(&self) -> usize {
        ParamVector::free_dim(self.n)
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn network(&self) -> &FollowersNetwork {
        &self.network
    }

    /// Cached `ln(M_u + 1)` for every account at likelihood event `e`.
    pub fn covariates(&self, e: usize) -> &[f64] {
        &self.x[e * self.n..(e + 1) * self.n]
    }

    /// `(topic, acting account, time)` of likelihood event `e`.
    pub fn event(&self, e: usize) -> (usize, usize, f64) {
        let ev = self.events[e];
        (ev.topic, ev.account, ev.time)
    }

    pub fn log_likelihood(&self, params: &ParamVector) -> Result<f64> {
        Ok(self.evaluate(params, Order::Value)?.ll)
    }

    pub fn gradient(&self, params: &ParamVector) -> Result<Vec<f64>> {
        Ok(self.evaluate(params, Order::Gradient)?.gradient.unwrap_or_default())
    }

    pub fn hessian(&self, params: &ParamVector) -> Result<DMatrix<f64>> {
        let d = self.free_dim();
        Ok(self
            .evaluate(params, Order::Hessian)?
            .hessian
            .unwrap_or_else(|| DMatrix::zeros(d, d)))
    }

    /// Log likelihood restricted to one topic's events.
    pub fn topic_log_likelihood(&self, params: &ParamVector, topic: usize) -> Result<f64> {
        self.check(params)?;
        let range = self.topic_offsets[topic]..self.topic_offsets[topic + 1];
        let mut acc = Accumulator::new(2 * self.n, Order::Value);
        for e in range {
            self.accumulate_event(params, e, &mut acc)?;
        }
        Ok(acc.value())
    }

    /// Gradient over all `2n` coordinates `[alpha_1..alpha_n, beta_1..beta_n]`.
    pub fn gradient_full(&self, params: &ParamVector) -> Result<Vec<f64>> {
        Ok(self.accumulate(params, Order::Gradient)?.grad)
    }

    /// Hessian over all `2n` coordinates.
    pub fn hessian_full(&self, params: &ParamVector) -> Result<DMatrix<f64>> {
        let acc = self.accumulate(params, Order::Hessian)?;
        let dim = 2 * self.n;
        Ok(acc.hessian_matrix(dim))
    }

    pub fn evaluate(&self, params: &ParamVector, order: Order) -> Result<Evaluation> {
        let acc = self.accumulate(params, order)?;
        let dim = 2 * self.n;
        let gradient = (order >= Order::Gradient).then(|| acc.grad[1..].to_vec());
        let hessian = (order >= Order::Hessian).then(|| {
            let full = acc.hessian_matrix(dim);
            full.view((1, 1), (dim - 1, dim - 1)).into_owned()
        });
        if self.events.is_empty() {
            log::warn!("log partial likelihood evaluated on a log without retweet/mention events");
        }
        Ok(Evaluation {
            ll: acc.value(),
            gradient,
            hessian,
            empty: self.events.is_empty(),
        })
    }

    fn check(&self, params: &ParamVector) -> Result<()> {
        if params.n() != self.n {
            return Err(Error::Dimension(format!(
                "parameters for {} accounts, workspace has {}",
                params.n(),
                self.n
            )));
        }
        Ok(())
    }

    fn accumulate(&self, params: &ParamVector, order: Order) -> Result<Accumulator> {
        self.check(params)?;
        let dim = 2 * self.n;
        let blocks: Vec<Accumulator> = (0..self.events.len())
            .collect::<Vec<_>>()
            .par_chunks(BLOCK_EVENTS)
            .map(|block| {
                let mut acc = Accumulator::new(dim, order);
                for &e in block {
                    self.accumulate_event(params, e, &mut acc)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut total = Accumulator::new(dim, order);
        for b in &blocks {
            total.merge(b);
        }
        Ok(total)
    }

    fn accumulate_event(&self, params: &ParamVector, e: usize, acc: &mut Accumulator) -> Result<()> {
        let n = self.n;
        let x = &self.x[e * n..(e + 1) * n];
        let s = &self.s[e * n..(e + 1) * n];
        let (alpha, beta) = (params.alpha(), params.beta());
        let ev = self.events[e];

        let eta = &mut acc.scratch_eta;
        let mut max_eta = f64::NEG_INFINITY;
        for v in 0..n {
            let lin: f64 = self.network.followees(v).iter().map(|&u| alpha[u] * x[u]).sum();
            let value = lin + beta[v] * s[v];
            if !value.is_finite() {
                return Err(Error::Saturation {
                    account: v + 1,
                    topic: ev.topic + 1,
                    time: ev.time,
                    exponent: value,
                });
            }
            eta[v] = value;
            max_eta = max_eta.max(value);
        }
        let mut z = 0.0;
        for v in 0..n {
            let w = (eta[v] - max_eta).exp();
            acc.scratch_p[v] = w;
            z += w;
        }
        let term = eta[ev.account] - (max_eta + z.ln());
        acc.add_ll(term);
        if acc.order == Order::Value {
            return Ok(());
        }
        for p in acc.scratch_p.iter_mut() {
            *p /= z;
        }

        // z_j
        let j = ev.account;
        for &u in self.network.followees(j) {
            acc.grad[u] += x[u];
        }
        acc.grad[n + j] += s[j];

        // zbar
        let zbar = &mut acc.scratch_zbar;
        zbar.iter_mut().for_each(|v| *v = 0.0);
        for v in 0..n {
            let p = acc.scratch_p[v];
            for &u in self.network.followees(v) {
                zbar[u] += p * x[u];
            }
            zbar[n + v] += p * s[v];
        }
        for (g, zb) in acc.grad.iter_mut().zip(zbar.iter()) {
            *g -= zb;
        }
        if acc.order == Order::Gradient {
            return Ok(());
        }

        let dim = 2 * n;
        let h = &mut acc.hess;
        // -sum_v p_v z_v z_v^T, upper triangle. Followee lists are ascending
        // and every alpha index precedes every beta index.
        for v in 0..n {
            let p = acc.scratch_p[v];
            if p == 0.0 {
                continue;
            }
            let fv = self.network.followees(v);
            let bv = n + v;
            for (a_pos, &a) in fv.iter().enumerate() {
                let pa = p * x[a];
                let row = a * dim;
                for &b in &fv[a_pos..] {
                    h[row + b] -= pa * x[b];
                }
                h[row + bv] -= pa * s[v];
            }
            h[bv * dim + bv] -= p * s[v] * s[v];
        }
        // + zbar zbar^T, upper triangle
        for a in 0..dim {
            let za = zbar[a];
            if za == 0.0 {
                continue;
            }
            let row = a * dim;
            for b in a..dim {
                h[row + b] += za * zbar[b];
            }
        }
        Ok(())
    }
}

struct Accumulator {
    order: Order,
    /// Neumaier-compensated sum: the value is `ll + ll_comp`.
    ll: f64,
    ll_comp: f64,
    grad: Vec<f64>,
    /// Row-major, upper triangle only.
    hess: Vec<f64>,
    scratch_eta: Vec<f64>,
    scratch_p: Vec<f64>,
    scratch_zbar: Vec<f64>,
}

impl Accumulator {
    fn new(dim: usize, order: Order) -> Self {
        let n = dim / 2;
        Self {
            order,
            ll: 0.0,
            ll_comp: 0.0,
            grad: if order >= Order::Gradient { vec![0.0; dim] } else { Vec::new() },
            hess: if order >= Order::Hessian { vec![0.0; dim * dim] } else { Vec::new() },
            scratch_eta: vec![0.0; n],
            scratch_p: vec![0.0; n],
            scratch_zbar: vec![0.0; dim],
        }
    }

    fn add_ll(&mut self, x: f64) {
        let t = self.ll + x;
        if self.ll.abs() >= x.abs() {
            self.ll_comp += (self.ll - t) + x;
        } else {
            self.ll_comp += (x - t) + self.ll;
        }
        self.ll = t;
    }

    fn value(&self) -> f64 {
        self.ll + self.ll_comp
    }

    fn merge(&mut self, other: &Accumulator) {
        self.add_ll(other.ll);
        self.add_ll(other.ll_comp);
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
    }

    fn hessian_matrix(&self, dim: usize) -> DMatrix<f64> {
        DMatrix::from_fn(dim, dim, |r, c| {
            let (a, b) = if r <= c { (r, c) } else { (c, r) };
            self.hess[a * dim + b]
        })
    }
}
