use cpinfluence::io::{
    network_from_edges, read_edges, read_events, read_params, read_scores, write_events, write_network, write_params,
    write_scores,
};
use cpinfluence::simulator::simulate;
use cpinfluence::{influence_scores, SimConfig};

#[test]
fn simulated_log_round_trips_through_csv() {
    let config = SimConfig { n: 7, topics: 12, seed: 3, ..Default::default() };
    let data = simulate(&config, 0).unwrap();
    let mut buf = Vec::new();
    write_events(&mut buf, &data.log).unwrap();
    let back = read_events(buf.as_slice(), "memory")
        .unwrap()
        .into_log(Some(config.n), Some(config.topics), Some(config.horizon))
        .unwrap();
    assert_eq!(back.events(), data.log.events());

    let mut again = Vec::new();
    write_events(&mut again, &back).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn network_params_and_scores_round_trip() {
    let config = SimConfig { n: 9, topics: 3, seed: 4, ..Default::default() };
    let data = simulate(&config, 0).unwrap();

    let mut buf = Vec::new();
    write_network(&mut buf, &data.network).unwrap();
    let edges = read_edges(buf.as_slice(), "memory").unwrap();
    assert_eq!(network_from_edges(&edges, Some(config.n)).unwrap(), data.network);

    let mut buf = Vec::new();
    write_params(&mut buf, &data.truth).unwrap();
    assert_eq!(read_params(buf.as_slice(), "memory").unwrap(), data.truth);

    let mbar: Vec<f64> = (0..config.n).map(|i| i as f64).collect();
    let scores = influence_scores(&data.truth, &data.network, &mbar).unwrap();
    let labels: Vec<String> = (1..=config.n).map(|i| i.to_string()).collect();
    let mut buf = Vec::new();
    write_scores(&mut buf, &scores, &labels).unwrap();
    let (back, back_labels) = read_scores(buf.as_slice(), "memory").unwrap();
    assert_eq!(back_labels, labels);
    assert_eq!(back, scores.scores);
}
