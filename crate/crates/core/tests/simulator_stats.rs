use cpinfluence::simulator::{generate_network, simulate, NetworkSpec, OmegaSpec};
use cpinfluence::{FollowersNetwork, ParamVector, SimConfig};

#[test]
fn zero_parameters_give_poisson_superposition_mean() {
    // every topic is an independent run with total rate n * a on [0, t0]
    let config = SimConfig {
        n: 10,
        topics: 1000,
        omega: OmegaSpec::Fixed(ParamVector::zeros(10)),
        seed: 2024,
        ..Default::default()
    };
    let data = simulate(&config, 0).unwrap();
    let counts = data.log.response_counts();
    let per_topic: Vec<f64> = (0..config.topics)
        .map(|l| counts.iter().map(|acc| acc[l]).sum::<usize>() as f64)
        .collect();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    let expected = config.n as f64 * config.baseline * config.horizon;
    let se = (expected / config.topics as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "mean {mean}, expected {expected} +- {se}");
}

#[test]
fn competing_clocks_pick_winner_in_proportion_to_rate() {
    // account 1 follows account 2; both post at time 0, so until the first
    // response the rates are a * 2^(alpha_2 + beta_1) and a
    let network = FollowersNetwork::from_edges(2, [(1, 0)]).unwrap();
    let truth = ParamVector::new(vec![0.0, 0.6], vec![0.4, 0.0]).unwrap();
    let config = SimConfig {
        n: 2,
        topics: 10_000,
        baseline: 3.0,
        horizon: 1.0,
        post_prob: 1.0,
        omega: OmegaSpec::Fixed(truth),
        network: NetworkSpec::Fixed(network),
        seed: 99,
        ..Default::default()
    };
    let data = simulate(&config, 0).unwrap();
    let (r1, r2) = (config.baseline * 2.0, config.baseline);
    let p = r1 / (r1 + r2);
    let mut wins = 0usize;
    let mut trials = 0usize;
    for l in 0..config.topics {
        if let Some(first) = data.log.topic_events(l).iter().find(|e| e.kind.is_response()) {
            trials += 1;
            if first.account == 0 {
                wins += 1;
            }
        }
    }
    assert!(trials > 9_000);
    let freq = wins as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((freq - p).abs() < 3.0 * se, "frequency {freq}, expected {p} +- {se}");
}

#[test]
fn same_seed_reproduces_the_log() {
    let config = SimConfig { n: 6, topics: 20, seed: 5, ..Default::default() };
    let a = simulate(&config, 3).unwrap();
    let b = simulate(&config, 3).unwrap();
    assert_eq!(a.log.events(), b.log.events());
    assert_eq!(a.truth, b.truth);
    assert_eq!(a.network, b.network);
    let other = simulate(&SimConfig { seed: 6, ..config }, 3).unwrap();
    assert_ne!(a.log.events(), other.log.events());
}

#[test]
fn worker_count_does_not_change_the_log() {
    let config = SimConfig { n: 6, topics: 30, seed: 8, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&config, 0).unwrap())
    };
    assert_eq!(run(1).log.events(), run(3).log.events());
}

#[test]
fn generated_networks_are_deterministic_and_connected_both_ways() {
    for seed in 0..20 {
        let net = generate_network(12, seed).unwrap();
        assert_eq!(net, generate_network(12, seed).unwrap());
        for i in 0..12 {
            assert!(!net.follows(i, i));
            assert!(!net.followers(i).is_empty());
            assert!(!net.followees(i).is_empty());
            assert!(net.followers(i).len() <= 11);
        }
    }
}

#[test]
fn response_times_are_distinct_within_topics() {
    let config = SimConfig { n: 8, topics: 40, seed: 17, ..Default::default() };
    let data = simulate(&config, 0).unwrap();
    for l in 0..config.topics {
        let times: Vec<f64> = data.log.topic_events(l).iter().filter(|e| e.kind.is_response()).map(|e| e.time).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(times.iter().all(|&t| (0.0..=config.horizon).contains(&t)));
    }
}
