mod common;

use common::*;
use cpinfluence::{influence_scores, rank, FollowersNetwork, ParamVector};
use rand::Rng;

fn activities(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(0.1..50.0)).collect()
}

#[test]
fn score_increases_with_own_response_parameter() {
    let mut r = rng(41);
    for _ in 0..50 {
        let n = r.random_range(2..9);
        let net = random_network(&mut r, n, 0.5);
        let mbar = activities(&mut r, n);
        let p = random_params(&mut r, n, 1.0);
        let base = influence_scores(&p, &net, &mbar).unwrap();
        for i in 1..n {
            if net.followers(i).is_empty() {
                assert_eq!(base.scores[i], f64::NEG_INFINITY);
                continue;
            }
            let mut alpha = p.alpha().to_vec();
            alpha[i] += 0.1;
            let bumped = ParamVector::new(alpha, p.beta().to_vec()).unwrap();
            let after = influence_scores(&bumped, &net, &mbar).unwrap();
            assert!(after.scores[i] > base.scores[i]);
        }
    }
}

#[test]
fn gaining_a_follower_increases_the_score() {
    let mut r = rng(42);
    for _ in 0..50 {
        let n = r.random_range(3..9);
        let net = random_network(&mut r, n, 0.4);
        let mbar = activities(&mut r, n);
        let p = random_params(&mut r, n, 1.0);
        let before = influence_scores(&p, &net, &mbar).unwrap();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !net.follows(i, j))
            .collect();
        if missing.is_empty() {
            continue;
        }
        let (i, j) = missing[r.random_range(0..missing.len())];
        let grown = FollowersNetwork::from_edges(n, net.edges().chain([(i, j)])).unwrap();
        let after = influence_scores(&p, &grown, &mbar).unwrap();
        assert!(after.scores[i] > before.scores[i]);
    }
}

#[test]
fn ranking_is_permutation_equivariant() {
    let mut r = rng(43);
    for _ in 0..50 {
        let n = r.random_range(2..9);
        let net = random_network(&mut r, n, 0.5);
        let mbar = activities(&mut r, n);
        let p = random_params(&mut r, n, 1.0);
        // keep account 0 in place so the anchor alpha_1 = 0 survives relabeling
        let mut perm: Vec<usize> = (1..n).collect();
        for k in (1..perm.len()).rev() {
            perm.swap(k, r.random_range(0..=k));
        }
        perm.insert(0, 0);

        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        let mut mbar2 = vec![0.0; n];
        for old in 0..n {
            alpha[perm[old]] = p.alpha()[old];
            beta[perm[old]] = p.beta()[old];
            mbar2[perm[old]] = mbar[old];
        }
        let p2 = ParamVector::new(alpha, beta).unwrap();
        let a = influence_scores(&p, &net, &mbar).unwrap();
        let b = influence_scores(&p2, &net.permuted(&perm).unwrap(), &mbar2).unwrap();
        for old in 0..n {
            let (x, y) = (a.scores[old], b.scores[perm[old]]);
            assert!(x == y || (x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
        let finite = a.scores.iter().filter(|s| s.is_finite()).count();
        let mapped: Vec<usize> = a.ranking.iter().take(finite).map(|&i| perm[i]).collect();
        assert_eq!(mapped, b.ranking[..finite].to_vec());
    }
}

#[test]
fn rank_orders_descending_with_ties_by_index() {
    let scores = [1.0, f64::NEG_INFINITY, 3.0, 1.0, f64::NEG_INFINITY];
    assert_eq!(rank(&scores), vec![2, 0, 3, 1, 4]);
}
