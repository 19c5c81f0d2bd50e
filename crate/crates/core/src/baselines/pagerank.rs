use crate::error::{Error, Result};
use crate::network::FollowersNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// PageRank with endorsement edges: following an account is a link from the
/// follower to the followed account. Dangling mass is spread uniformly.
/// Stops when the L1 change between sweeps drops below `tol`.
pub fn pagerank(network: &FollowersNetwork, config: &PageRankConfig) -> Result<Vec<f64>> {
    if !(config.damping > 0.0 && config.damping < 1.0) {
        return Err(Error::invalid(format!("damping must be in (0, 1), got {}", config.damping)));
    }
    if !(config.tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let n = network.n();
    let nf = n as f64;
    let out_degree: Vec<usize> = (0..n).map(|j| network.followees(j).len()).collect();
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..config.max_iter {
        let dangling: f64 = (0..n).filter(|&j| out_degree[j] == 0).map(|j| rank[j]).sum();
        let base = (1.0 - config.damping) / nf + config.damping * dangling / nf;
        for (i, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = network
                .followers(i)
                .iter()
                .map(|&j| rank[j] / out_degree[j] as f64)
                .sum();
            *slot = base + config.damping * inflow;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < config.tol {
            return Ok(rank);
        }
    }
    Err(Error::PageRankNotConverged {
        iterations: config.max_iter,
        residual,
    })
}
