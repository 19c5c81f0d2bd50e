//! Hazard rate of the retweet/mention process of one account.

use crate::error::{Error, Result};
use crate::index::ActivityIndex;
use crate::network::FollowersNetwork;
use crate::params::ParamVector;

/// Exponents beyond this magnitude are reported as saturated.
pub const MAX_EXPONENT: f64 = 700.0;

/// `Σ_{i follows-edge to j} (alpha_i + beta_j) · log_counts[i]`, where
/// `log_counts[i] = ln(M_i + 1)`.
#[inline]
pub fn exponent(params: &ParamVector, network: &FollowersNetwork, j: usize, log_counts: &[f64]) -> f64 {
    let (alpha, beta) = (params.alpha(), params.beta()[j]);
    network
        .followees(j)
        .iter()
        .map(|&i| (alpha[i] + beta) * log_counts[i])
        .sum()
}

/// `baseline · exp(Σ_i L[i][j] (alpha_i + beta_j) ln(M_i(t⁻, l) + 1))`.
#[allow(clippy::too_many_arguments)]
pub fn hazard_rate(
    params: &ParamVector,
    network: &FollowersNetwork,
    index: &ActivityIndex,
    j: usize,
    topic: usize,
    t: f64,
    baseline: f64,
) -> Result<f64> {
    if !(baseline >= 0.0 && baseline.is_finite()) {
        return Err(Error::invalid(format!("baseline must be >= 0, got {baseline}")));
    }
    let beta = params.beta()[j];
    let alpha = params.alpha();
    let eta: f64 = network
        .followees(j)
        .iter()
        .map(|&i| (alpha[i] + beta) * (index.count_m(i, topic, t) as f64).ln_1p())
        .sum();
    if !eta.is_finite() || eta.abs() > MAX_EXPONENT {
        return Err(Error::Saturation {
            account: j + 1,
            topic: topic + 1,
            time: t,
            exponent: eta,
        });
    }
    Ok(baseline * eta.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, EventLog};
    use approx::assert_relative_eq;

    #[test]
    fn zero_params_give_baseline() {
        let net = FollowersNetwork::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let log = EventLog::new(vec![Event::post(0.5, 0, 0), Event::post(0.7, 1, 0)], 3, 1, 2.0)
            .unwrap();
        let idx = ActivityIndex::build(&log, &net).unwrap();
        let p = ParamVector::zeros(3);
        for j in 0..3 {
            for t in [0.0, 0.6, 1.5] {
                assert_eq!(hazard_rate(&p, &net, &idx, j, 0, t, 0.7).unwrap(), 0.7);
            }
        }
    }

    #[test]
    fn two_node_sqrt_two() {
        // L[1][2] = 1, beta_2 = 0.5, M_1 = 1
        let net = FollowersNetwork::from_edges(2, [(0, 1)]).unwrap();
        let log = EventLog::new(vec![Event::post(1.0, 0, 0)], 2, 1, 3.0).unwrap();
        let idx = ActivityIndex::build(&log, &net).unwrap();
        let p = ParamVector::new(vec![0.0, 0.0], vec![0.0, 0.5]).unwrap();
        let h = hazard_rate(&p, &net, &idx, 1, 0, 2.0, 2.0).unwrap();
        assert_relative_eq!(h, 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        // account 1 follows nobody
        assert_eq!(hazard_rate(&p, &net, &idx, 0, 0, 2.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn saturation_reported() {
        let net = FollowersNetwork::from_edges(2, [(0, 1)]).unwrap();
        let log = EventLog::new(vec![Event::post(0.0, 0, 0)], 2, 1, 1.0).unwrap();
        let idx = ActivityIndex::build(&log, &net).unwrap();
        let p = ParamVector::new(vec![0.0, 0.0], vec![0.0, 2000.0]).unwrap();
        let err = hazard_rate(&p, &net, &idx, 1, 0, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, Error::Saturation { account: 2, topic: 1, .. }));
    }
}
