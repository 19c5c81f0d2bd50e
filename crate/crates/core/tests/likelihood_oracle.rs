mod common;

use common::*;
use cpinfluence::{LikelihoodWorkspace, Order, ParamVector};
use nalgebra::{DMatrix, SymmetricEigen};

fn ll_at(ws: &LikelihoodWorkspace, n: usize, free: &[f64]) -> f64 {
    ws.log_likelihood(&ParamVector::from_free(n, free).unwrap()).unwrap()
}

fn grad_at(ws: &LikelihoodWorkspace, n: usize, free: &[f64]) -> Vec<f64> {
    ws.gradient(&ParamVector::from_free(n, free).unwrap()).unwrap()
}

#[test]
fn cached_likelihood_matches_direct_evaluation() {
    let mut r = rng(11);
    for _ in 0..40 {
        let inst = random_instance(&mut r, 8, 5, 30);
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let p = random_params(&mut r, inst.network.n(), 1.0);
        let fast = ws.log_likelihood(&p).unwrap();
        let slow = naive_log_likelihood(&inst, &p);
        assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
    }
}

#[test]
fn zero_parameters_give_minus_e_log_n() {
    let mut r = rng(12);
    for _ in 0..50 {
        let inst = random_instance(&mut r, 8, 5, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let e = inst.log.response_count() as f64;
        let ll = ws.log_likelihood(&ParamVector::zeros(n)).unwrap();
        assert!((ll + e * (n as f64).ln()).abs() < 1e-12 * e.max(1.0));
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(13);
    let h = 1e-5;
    for _ in 0..25 {
        let inst = random_instance(&mut r, 8, 5, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let x = random_params(&mut r, n, 0.5).to_free();
        let g = grad_at(&ws, n, &x);
        let fd: Vec<f64> = (0..x.len())
            .map(|k| {
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[k] += h;
                dn[k] -= h;
                (ll_at(&ws, n, &up) - ll_at(&ws, n, &dn)) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = fd.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-8);
        assert!(diff / scale < 1e-6, "relative gradient error {}", diff / scale);
    }
}

#[test]
fn hessian_matches_differences_of_gradient() {
    let mut r = rng(14);
    let h = 1e-4;
    for _ in 0..25 {
        let inst = random_instance(&mut r, 8, 5, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let x = random_params(&mut r, n, 0.5).to_free();
        let hess = ws.hessian(&ParamVector::from_free(n, &x).unwrap()).unwrap();
        for k in 0..x.len() {
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[k] += h;
            dn[k] -= h;
            let (gu, gd) = (grad_at(&ws, n, &up), grad_at(&ws, n, &dn));
            for i in 0..x.len() {
                let fd = (gu[i] - gd[i]) / (2.0 * h);
                let err = (hess[(i, k)] - fd).abs();
                assert!(err < 1e-8 || err / fd.abs() < 1e-5, "H[{i},{k}] = {} vs {fd}", hess[(i, k)]);
            }
        }
    }
}

#[test]
fn hessian_is_symmetric_and_negative_semidefinite() {
    let mut r = rng(15);
    for _ in 0..40 {
        let inst = random_instance(&mut r, 8, 5, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let hess = ws.hessian(&random_params(&mut r, n, 1.0)).unwrap();
        assert_eq!(hess, hess.transpose());
        let scale = hess.amax().max(1.0);
        let eig = SymmetricEigen::new(hess).eigenvalues;
        assert!(eig.max() <= 1e-10 * scale, "largest eigenvalue {}", eig.max());
    }
}

#[test]
fn likelihood_decomposes_over_topics() {
    let mut r = rng(16);
    for _ in 0..30 {
        let inst = random_instance(&mut r, 6, 5, 30);
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let p = random_params(&mut r, inst.network.n(), 1.0);
        let total = ws.log_likelihood(&p).unwrap();
        let parts: f64 = (0..ws.topics()).map(|l| ws.topic_log_likelihood(&p, l).unwrap()).sum();
        assert!((total - parts).abs() < 1e-10 * total.abs().max(1.0));
    }
}

#[test]
fn cached_covariates_equal_recomputation() {
    let mut r = rng(17);
    for _ in 0..20 {
        let inst = random_instance(&mut r, 8, 4, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        for e in 0..ws.event_count() {
            let (topic, _account, time) = ws.event(e);
            let cached = ws.covariates(e);
            for u in 0..n {
                let x = (naive_count(&inst.log, u, topic, time) as f64).ln_1p();
                assert_eq!(cached[u], x);
            }
        }
    }
}

#[test]
fn reduced_derivatives_drop_the_anchor_coordinate() {
    let mut r = rng(18);
    for _ in 0..20 {
        let inst = random_instance(&mut r, 7, 4, 30);
        let n = inst.network.n();
        let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
        let p = random_params(&mut r, n, 1.0);
        let full_g = ws.gradient_full(&p).unwrap();
        let full_h = ws.hessian_full(&p).unwrap();
        assert_eq!(ws.gradient(&p).unwrap(), full_g[1..].to_vec());
        let reduced: DMatrix<f64> = full_h.remove_row(0).remove_column(0);
        assert_eq!(ws.hessian(&p).unwrap(), reduced);
    }
}

#[test]
fn evaluate_agrees_with_individual_calls() {
    let mut r = rng(19);
    let inst = random_instance(&mut r, 6, 3, 30);
    let ws = LikelihoodWorkspace::new(&inst.log, &inst.network).unwrap();
    let p = random_params(&mut r, inst.network.n(), 1.0);
    let ev = ws.evaluate(&p, Order::Hessian).unwrap();
    assert_eq!(ev.ll, ws.log_likelihood(&p).unwrap());
    assert_eq!(ev.gradient.unwrap(), ws.gradient(&p).unwrap());
    assert_eq!(ev.hessian.unwrap(), ws.hessian(&p).unwrap());
    let value_only = ws.evaluate(&p, Order::Value).unwrap();
    assert!(value_only.gradient.is_none() && value_only.hessian.is_none());
}

#[test]
fn thread_count_does_not_change_results() {
    let mut r = rng(20);
    let mut events = Vec::new();
    // enough events to span several reduction blocks
    for k in 0..2000 {
        let kind = if k % 3 == 0 { cpinfluence::ActionKind::Post } else { cpinfluence::ActionKind::Mention };
        events.push(cpinfluence::Event {
            time: k as f64 * 0.004 + 0.001,
            account: rand::Rng::random_range(&mut r, 0..6),
            topic: k % 2,
            kind,
            target: None,
        });
    }
    let log = cpinfluence::EventLog::new(events, 6, 2, 10.0).unwrap();
    let net = random_network(&mut r, 6, 0.6);
    let ws = LikelihoodWorkspace::new(&log, &net).unwrap();
    let p = random_params(&mut r, 6, 0.3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ws.evaluate(&p, Order::Hessian).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.ll.to_bits(), b.ll.to_bits());
    assert_eq!(a.gradient, b.gradient);
    assert_eq!(a.hessian, b.hessian);
}
