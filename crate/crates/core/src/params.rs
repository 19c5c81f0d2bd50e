use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Response (`alpha`) and susceptibility (`beta`) parameters.
///
/// `alpha[0]` is pinned to zero for identification, so the free dimension is
/// `2n - 1`. Free vectors are laid out as `[alpha_2..alpha_n, beta_1..beta_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ParamVector {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::Dimension(format!(
                "alpha has {} entries, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha[0] != 0.0 {
            return Err(Error::invalid(format!(
                "alpha_1 must be 0 for identification, got {}",
                alpha[0]
            )));
        }
        if alpha.iter().chain(&beta).any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
        }
    }

    pub fn free_dim(n: usize) -> usize {
        2 * n - 1
    }

    pub fn from_free(n: usize, free: &[f64]) -> Result<Self> {
        if free.len() != Self::free_dim(n) {
            return Err(Error::Dimension(format!(
                "free vector has {} entries, expected {}",
                free.len(),
                Self::free_dim(n)
            )));
        }
        let mut alpha = Vec::with_capacity(n);
        alpha.push(0.0);
        alpha.extend_from_slice(&free[..n - 1]);
        Self::new(alpha, free[n - 1..].to_vec())
    }

    pub fn to_free(&self) -> Vec<f64> {
        self.alpha[1..].iter().chain(&self.beta).copied().collect()
    }

    /// `[alpha_1..alpha_n, beta_1..beta_n]`.
    pub fn to_full(&self) -> Vec<f64> {
        self.alpha.iter().chain(&self.beta).copied().collect()
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha
            .iter()
            .chain(&self.beta)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Euclidean distance over all `2n` coordinates (`alpha_1` contributes 0).
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_full()
            .iter()
            .zip(other.to_full())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.distance(&Self::zeros(self.n()))
    }
}
