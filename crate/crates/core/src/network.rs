//! Static followers network.
//!
//! Orientation: `L[i][j] = 1` means account `j` follows account `i`, so
//! content posted by `i` reaches `j`. Accounts are 0-based in the API and
//! 1-based in every file format.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FollowersNetwork {
    n: usize,
    adjacency: Vec<bool>,
    followers: Vec<Vec<usize>>,
    followees: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl FollowersNetwork {
    /// Build from `(influencer, follower)` pairs, 0-based.
    ///
    /// Duplicate edges are collapsed. Self-follows are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("network needs at least one account"));
        }
        let mut adjacency = vec![false; n * n];
        for (i, j) in edges {
            if i >= n {
                return Err(Error::UnknownAccount { account: i + 1, n });
            }
            if j >= n {
                return Err(Error::UnknownAccount { account: j + 1, n });
            }
            if i == j {
                return Err(Error::invalid(format!("account {} follows itself", i + 1)));
            }
            adjacency[i * n + j] = true;
        }
        Ok(Self::from_adjacency_unchecked(n, adjacency))
    }

    /// Build from a dense 0/1 matrix given as rows.
    pub fn from_matrix(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => edges.push((i, j)),
                    other => {
                        return Err(Error::invalid(format!(
                            "adjacency entry ({}, {}) is {other}, expected 0 or 1",
                            i + 1,
                            j + 1
                        )))
                    }
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub(crate) fn from_adjacency_unchecked(n: usize, adjacency: Vec<bool>) -> Self {
        let mut followers = vec![Vec::new(); n];
        let mut followees = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if adjacency[i * n + j] {
                    followers[i].push(j);
                    followees[j].push(i);
                }
            }
        }
        let labels = (1..=n).map(|i| i.to_string()).collect();
        Self {
            n,
            adjacency,
            followers,
            followees,
            labels,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} labels for {} accounts",
                labels.len(),
                self.n
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L[i][j]`: does `j` follow `i`?
    #[inline]
    pub fn follows(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// Accounts that follow `i` (reached by `i`'s content).
    pub fn followers(&self, i: usize) -> &[usize] {
        &self.followers[i]
    }

    /// Accounts that `j` follows.
    pub fn followees(&self, j: usize) -> &[usize] {
        &self.followees[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn edge_count(&self) -> usize {
        self.followers.iter().map(Vec::len).sum()
    }

    /// `(influencer, follower)` pairs in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.followers
            .iter()
            .enumerate()
            .flat_map(|(i, fs)| fs.iter().map(move |&j| (i, j)))
    }

    /// Relabel accounts: new account `perm[i]` is old account `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let edges = self.edges().map(|(i, j)| (perm[i], perm[j]));
        let mut out = Self::from_edges(self.n, edges)?;
        let mut labels = vec![String::new(); self.n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        out.labels = labels;
        Ok(out)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dimension(format!("permutation of length {} for n = {n}", perm.len())));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("not a permutation"));
        }
    }
    Ok(())
}
