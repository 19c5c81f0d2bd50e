//! Newton ascent on the log partial likelihood.
//!
//! Works in the reduced `2n - 1` coordinates so `alpha_1` never moves. Each
//! iteration solves `(mu I - H) d = G`, backtracks along `d` until the Armijo
//! condition holds, and escalates the Levenberg parameter `mu` whenever the
//! solve fails or no step is accepted.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventLog;
use crate::likelihood::{LikelihoodWorkspace, Order};
use crate::network::FollowersNetwork;
use crate::params::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    /// Backtracking factor `rho` in (0, 1).
    pub shrink: f64,
    /// Armijo constant `c1` in (0, 1).
    pub sufficient_increase: f64,
    pub max_trials: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            shrink: 0.5,
            sufficient_increase: 1e-4,
            max_trials: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingConfig {
    /// Levenberg parameter used at the start of every iteration.
    pub initial: f64,
    pub growth: f64,
    pub max_escalations: usize,
}

impl Default for DampingConfig {
    fn default() -> Self {
        Self {
            initial: 0.0,
            growth: 10.0,
            max_escalations: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Converged once the Newton step norm falls below this.
    pub step_threshold: f64,
    pub max_iterations: usize,
    pub line_search: LineSearchConfig,
    pub damping: DampingConfig,
    /// Any parameter magnitude above this aborts the fit as degenerate.
    pub divergence_cap: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            step_threshold: 1e-6,
            max_iterations: 100,
            line_search: LineSearchConfig::default(),
            damping: DampingConfig::default(),
            divergence_cap: 50.0,
        }
    }
}

impl NewtonConfig {
    pub const KEYS: &'static [&'static str] = &[
        "step_threshold",
        "max_iterations",
        "line_search.shrink",
        "line_search.sufficient_increase",
        "line_search.max_trials",
        "damping.initial",
        "damping.growth",
        "damping.max_escalations",
        "divergence_cap",
    ];

    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let checks = [
            (self.step_threshold > 0.0, "step_threshold must be > 0"),
            (self.max_iterations > 0, "max_iterations must be > 0"),
            (ls.shrink > 0.0 && ls.shrink < 1.0, "line_search.shrink must be in (0, 1)"),
            (
                ls.sufficient_increase > 0.0 && ls.sufficient_increase < 1.0,
                "line_search.sufficient_increase must be in (0, 1)",
            ),
            (ls.max_trials > 0, "line_search.max_trials must be > 0"),
            (self.damping.initial >= 0.0, "damping.initial must be >= 0"),
            (self.damping.growth > 1.0, "damping.growth must be > 1"),
            (self.divergence_cap > 0.0, "divergence_cap must be > 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config((*msg).to_string())),
            None => Ok(()),
        }
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
        }
        match key {
            "step_threshold" => self.step_threshold = num(key, value)?,
            "max_iterations" => self.max_iterations = num(key, value)?,
            "line_search.shrink" => self.line_search.shrink = num(key, value)?,
            "line_search.sufficient_increase" => self.line_search.sufficient_increase = num(key, value)?,
            "line_search.max_trials" => self.line_search.max_trials = num(key, value)?,
            "damping.initial" => self.damping.initial = num(key, value)?,
            "damping.growth" => self.damping.growth = num(key, value)?,
            "damping.max_escalations" => self.damping.max_escalations = num(key, value)?,
            "divergence_cap" => self.divergence_cap = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    /// A parameter exceeded the divergence cap: no finite maximizer.
    Diverged,
    /// No damped solve produced an acceptable step.
    Stalled,
}

impl FitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::MaxIterations => "max_iterations",
            FitStatus::Diverged => "diverged",
            FitStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub ll: f64,
    pub grad_norm: f64,
    /// Step length that produced this iterate (0 for the start point).
    pub tau: f64,
    /// Levenberg parameter of that step.
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ParamVector,
    pub ll: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: FitStatus,
    pub grad_inf_norm: f64,
    pub trace: Vec<TraceRow>,
    pub diagnostic: Option<String>,
}

pub fn estimate(log: &EventLog, network: &FollowersNetwork, config: &NewtonConfig) -> Result<FitResult> {
    let ws = LikelihoodWorkspace::new(log, network)?;
    estimate_with(&ws, config)
}

pub fn estimate_with(ws: &LikelihoodWorkspace, config: &NewtonConfig) -> Result<FitResult> {
    config.validate()?;
    if ws.event_count() == 0 {
        return Err(Error::NoLikelihoodEvents);
    }
    let n = ws.n();
    let d = ws.free_dim();
    let s = config.step_threshold;

    let mut omega = vec![0.0; d];
    let mut eval = ws.evaluate(&ParamVector::from_free(n, &omega)?, Order::Hessian)?;
    let mut trace = vec![TraceRow {
        iter: 0,
        ll: eval.ll,
        grad_norm: l2(eval.gradient.as_deref().unwrap_or_default()),
        tau: 0.0,
        mu: 0.0,
    }];

    let finish = |omega: &[f64], ll: f64, g: &[f64], iterations, status, trace, diagnostic| {
        Ok(FitResult {
            params: ParamVector::from_free(n, omega)?,
            ll,
            iterations,
            converged: status == FitStatus::Converged,
            status,
            grad_inf_norm: inf_norm(g),
            trace,
            diagnostic,
        })
    };

    for k in 0..config.max_iterations {
        if !eval.ll.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        let g = eval.gradient.take().unwrap_or_default();
        let h = eval.hessian.take().unwrap_or_else(|| DMatrix::zeros(d, d));
        let g_inf = inf_norm(&g);
        if g_inf == 0.0 {
            return finish(&omega, eval.ll, &g, k, FitStatus::Converged, trace, None);
        }
        let g_vec = DVector::from_column_slice(&g);
        let diag_scale = (0..d).map(|i| h[(i, i)].abs()).fold(1e-12_f64, f64::max);

        let mut mu = config.damping.initial;
        let mut accepted = None;
        for _ in 0..=config.damping.max_escalations {
            if let Some(dir) = damped_direction(&h, &g_vec, mu) {
                if l2(dir.as_slice()) < s && g_inf <= 10.0 * s {
                    return finish(&omega, eval.ll, &g, k, FitStatus::Converged, trace, None);
                }
                let trial = |tau: f64| -> Result<f64> {
                    let x: Vec<f64> = omega.iter().zip(dir.iter()).map(|(o, di)| o + tau * di).collect();
                    ws.log_likelihood(&ParamVector::from_free(n, &x)?)
                };
                match backtrack(trial, eval.ll, g_vec.dot(&dir), &config.line_search) {
                    Ok(tau) => {
                        accepted = Some((tau, dir, mu));
                        break;
                    }
                    Err(e) => log::debug!("iteration {k}: {e}; escalating damping from {mu}"),
                }
            }
            mu = if mu == 0.0 { 1e-8 * diag_scale } else { mu * config.damping.growth };
        }

        let Some((tau, dir, mu)) = accepted else {
            let msg = format!(
                "no ascent step after {} damping escalations (|G|_inf = {g_inf:.3e})",
                config.damping.max_escalations
            );
            return finish(&omega, eval.ll, &g, k, FitStatus::Stalled, trace, Some(msg));
        };
        for (o, di) in omega.iter_mut().zip(dir.iter()) {
            *o += tau * di;
        }
        let worst = omega.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if worst > config.divergence_cap {
            let ll = ws.log_likelihood(&ParamVector::from_free(n, &omega)?)?;
            let g = ws.gradient(&ParamVector::from_free(n, &omega)?)?;
            let msg = format!(
                "parameter magnitude {worst:.3} exceeds {}: non-identified or degenerate data \
                 (likelihood has no finite maximizer)",
                config.divergence_cap
            );
            return finish(&omega, ll, &g, k + 1, FitStatus::Diverged, trace, Some(msg));
        }
        eval = ws.evaluate(&ParamVector::from_free(n, &omega)?, Order::Hessian)?;
        if !eval.ll.is_finite() {
            return Err(Error::NonFinite { iteration: k + 1 });
        }
        trace.push(TraceRow {
            iter: k + 1,
            ll: eval.ll,
            grad_norm: l2(eval.gradient.as_deref().unwrap_or_default()),
            tau,
            mu,
        });
    }

    let g = eval.gradient.take().unwrap_or_default();
    let msg = format!("reached max_iterations = {}", config.max_iterations);
    finish(
        &omega,
        eval.ll,
        &g,
        config.max_iterations,
        FitStatus::MaxIterations,
        trace,
        Some(msg),
    )
}

/// Backtracking line search along `direction` from `params`.
///
/// Returns the largest `tau` in `{1, rho, rho^2, ...}` with
/// `LL(params + tau * direction) >= current_ll + c1 * tau * G.direction`.
/// If `c1 * G.direction` is below the rounding level of `current_ll`, the
/// full step is taken whenever it does not lower the objective beyond rounding.
pub fn line_search(
    ws: &LikelihoodWorkspace,
    params: &ParamVector,
    direction: &[f64],
    gradient: &[f64],
    current_ll: f64,
    config: &NewtonConfig,
) -> Result<f64> {
    let base = params.to_free();
    if direction.len() != base.len() || gradient.len() != base.len() {
        return Err(Error::Dimension("direction/gradient length".into()));
    }
    let slope: f64 = gradient.iter().zip(direction).map(|(g, d)| g * d).sum();
    let n = params.n();
    backtrack(
        |tau| {
            let x: Vec<f64> = base.iter().zip(direction).map(|(b, d)| b + tau * d).collect();
            ws.log_likelihood(&ParamVector::from_free(n, &x)?)
        },
        current_ll,
        slope,
        &config.line_search,
    )
}

/// Armijo backtracking on a maximization objective `f(tau)`.
pub fn backtrack(
    mut f: impl FnMut(f64) -> Result<f64>,
    current: f64,
    slope: f64,
    config: &LineSearchConfig,
) -> Result<f64> {
    if !(slope > 0.0) {
        return Err(Error::LineSearch(format!(
            "not an ascent direction (G.d = {slope:.3e})"
        )));
    }
    if !current.is_finite() {
        return Err(Error::LineSearch("current objective is not finite".into()));
    }
    // when the demanded increase is below rounding, a flat full step is accepted
    let noise = 4.0 * f64::EPSILON * current.abs().max(1.0);
    if config.sufficient_increase * slope <= noise {
        if let Ok(value) = f(1.0) {
            if value.is_finite() && value >= current - noise {
                return Ok(1.0);
            }
        }
    }
    let mut tau = 1.0;
    for _ in 0..config.max_trials {
        // saturated trial points count as rejected
        if let Ok(value) = f(tau) {
            if value.is_finite() && value >= current + config.sufficient_increase * tau * slope {
                return Ok(tau);
            }
        }
        tau *= config.shrink;
    }
    Err(Error::LineSearch(format!(
        "no sufficient increase within {} trials",
        config.max_trials
    )))
}

/// Solve `(mu I - H) d = g` by Cholesky; `None` when not positive definite.
fn damped_direction(h: &DMatrix<f64>, g: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let d = h.nrows();
    let a = DMatrix::from_diagonal_element(d, d, mu) - h;
    let chol = a.cholesky()?;
    let dir = chol.solve(g);
    dir.iter().all(|v| v.is_finite()).then_some(dir)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
