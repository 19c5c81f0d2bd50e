use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cpinfluence::baselines::{
    compare_measures, ols_regress, pagerank, with_intercept, ComparisonInput, ComparisonReport, PageRankConfig,
    ResponseTransform,
};
use cpinfluence::config::{newton_config, parse_list, parse_pairs, sim_config, Pairs, SIM_KEYS};
use cpinfluence::influence::{format_score, InfluenceVector};
use cpinfluence::io;
use cpinfluence::simulator::{self, ExperimentReport, NetworkSpec, OmegaSpec};
use cpinfluence::{
    estimate, influence_scores, mean_activities, ActivityIndex, EventLog, FollowersNetwork, Interval, NewtonConfig,
    SimConfig,
};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use crate::{
    Cli, Command, CompareArgs, ConfigArgs, EstimateArgs, ExperimentArgs, InfluenceArgs, LogArgs, PagerankArgs,
    RegressArgs, SimulateArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult {
    fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Estimate(a) => estimate_cmd(cli, a),
        Command::Influence(a) => influence(cli, a),
        Command::Pagerank(a) => pagerank_cmd(cli, a),
        Command::Regress(a) => regress(cli, a),
        Command::Compare(a) => compare(cli, a),
        Command::Experiment(a) => experiment(cli, a),
    }
}

fn create(out: &Path, name: &str, m: &mut ManifestBuilder) -> CliResult<BufWriter<File>> {
    let path = out.join(name);
    let file = File::create(&path).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
    m.output(name);
    Ok(BufWriter::new(file))
}

fn write_json(out: &Path, name: &str, value: &impl Serialize, m: &mut ManifestBuilder) -> CliResult {
    let mut w = create(out, name, m)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(CliError::internal)?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::internal)
}

/// Config file pairs with `--set` overrides applied; also returns the
/// directory relative paths in the file resolve against.
fn load_pairs(args: &ConfigArgs, m: &mut ManifestBuilder) -> CliResult<(Pairs, PathBuf)> {
    let (mut pairs, base) = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            m.input(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (parse_pairs(&text)?, base)
        }
        None => (Pairs::new(), PathBuf::new()),
    };
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--set expects KEY=VALUE, got {s:?}")))?;
        pairs.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((pairs, base))
}

fn load_network(path: &Path, n: Option<usize>, m: &mut ManifestBuilder) -> CliResult<FollowersNetwork> {
    m.input(path)?;
    let edges = io::read_edges_file(path)?;
    Ok(io::network_from_edges(&edges, n)?)
}

fn load_log(args: &LogArgs, m: &mut ManifestBuilder) -> CliResult<(FollowersNetwork, EventLog)> {
    let network = load_network(&args.network, args.n, m)?;
    m.input(&args.events)?;
    let raw = io::read_events_file(&args.events)?;
    let log = raw.into_log(Some(network.n()), args.topics, args.horizon)?;
    m.config("n", log.n());
    m.config("topics", log.topics());
    m.config("horizon", log.horizon());
    Ok((network, log))
}

type Entries = BTreeMap<String, String>;

fn put(map: &mut Entries, key: &str, value: impl ToString) {
    map.insert(key.to_string(), value.to_string());
}

fn sim_entries(c: &SimConfig) -> Entries {
    let mut e = Entries::new();
    put(&mut e, "n", c.n);
    put(&mut e, "topics", c.topics);
    put(&mut e, "baseline", c.baseline);
    put(&mut e, "horizon", c.horizon);
    put(&mut e, "post_prob", c.post_prob);
    put(&mut e, "post_batch", c.post_batch);
    put(&mut e, "seed", c.seed);
    put(&mut e, "replicates", c.replicates);
    put(&mut e, "max_events_per_topic", c.max_events_per_topic);
    match &c.omega {
        OmegaSpec::Uniform { lo, hi } => {
            put(&mut e, "omega_lo", lo);
            put(&mut e, "omega_hi", hi);
        }
        OmegaSpec::Fixed(p) => {
            put(&mut e, "alpha", join(p.alpha()));
            put(&mut e, "beta", join(p.beta()));
        }
    }
    e
}

fn newton_entries(c: &NewtonConfig) -> Entries {
    let mut e = Entries::new();
    put(&mut e, "step_threshold", c.step_threshold);
    put(&mut e, "max_iterations", c.max_iterations);
    put(&mut e, "line_search.shrink", c.line_search.shrink);
    put(&mut e, "line_search.sufficient_increase", c.line_search.sufficient_increase);
    put(&mut e, "line_search.max_trials", c.line_search.max_trials);
    put(&mut e, "damping.initial", c.damping.initial);
    put(&mut e, "damping.growth", c.damping.growth);
    put(&mut e, "damping.max_escalations", c.damping.max_escalations);
    put(&mut e, "divergence_cap", c.divergence_cap);
    e
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> CliResult {
    let mut m = ManifestBuilder::new("simulate", &cli.out, cli.seed, cli.workers);
    let (pairs, base) = load_pairs(&args.config, &mut m)?;
    let mut config = sim_config(&pairs, &["network"])?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(rel) = pairs.get("network") {
        let path = base.join(rel);
        config.network = NetworkSpec::Fixed(load_network(&path, Some(config.n), &mut m)?);
        m.config("network", path.display());
    }
    config.validate()?;
    m.config_all(sim_entries(&config));
    m.config("replicate", args.replicate);

    let data = simulator::simulate(&config, args.replicate)?;
    let out = &cli.out;
    io::write_network(create(out, "network.csv", &mut m)?, &data.network)?;
    io::write_events(create(out, "events.csv", &mut m)?, &data.log)?;
    io::write_params(create(out, "truth_params.csv", &mut m)?, &data.truth)?;

    let index = ActivityIndex::build(&data.log, &data.network)?;
    let interval = Interval::new(0.0, config.horizon)?;
    let mbar = mean_activities(&index, interval, cpinfluence::influence::DEFAULT_GRID)?;
    let mut xi = influence_scores(&data.truth, &data.network, &mbar)?;
    xi.interval = Some(interval);
    io::write_scores(create(out, "truth_scores.csv", &mut m)?, &xi, data.network.labels())?;
    m.write()?;
    eprintln!(
        "simulated {} retweet/mention events over {} topics into {}",
        data.log.response_count(),
        config.topics,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FitSummary<'a> {
    status: &'static str,
    converged: bool,
    iterations: usize,
    log_likelihood: f64,
    grad_inf_norm: f64,
    response_events: usize,
    diagnostic: Option<&'a str>,
}

fn estimate_cmd(cli: &Cli, args: &EstimateArgs) -> CliResult {
    let mut m = ManifestBuilder::new("estimate", &cli.out, cli.seed, cli.workers);
    let (pairs, _) = load_pairs(&args.config, &mut m)?;
    let config = newton_config(&pairs)?;
    m.config_all(newton_entries(&config));
    let (network, log) = load_log(&args.log, &mut m)?;

    let fit = estimate(&log, &network, &config)?;
    let out = &cli.out;
    io::write_params(create(out, "params.csv", &mut m)?, &fit.params)?;
    io::write_trace(create(out, "trace.csv", &mut m)?, &fit.trace)?;
    let summary = FitSummary {
        status: fit.status.as_str(),
        converged: fit.converged,
        iterations: fit.iterations,
        log_likelihood: fit.ll,
        grad_inf_norm: fit.grad_inf_norm,
        response_events: log.response_count(),
        diagnostic: fit.diagnostic.as_deref(),
    };
    write_json(out, "fit.json", &summary, &mut m)?;
    m.write()?;
    if fit.converged {
        eprintln!(
            "converged in {} iterations, log-likelihood {}, |G|_inf {:.3e}",
            fit.iterations, fit.ll, fit.grad_inf_norm
        );
        Ok(())
    } else {
        Err(CliError::nonconvergence(format!(
            "fit did not converge ({}): {}",
            fit.status.as_str(),
            fit.diagnostic.unwrap_or_default()
        )))
    }
}

fn labels_for(path: Option<&Path>, n: usize, m: &mut ManifestBuilder) -> CliResult<Option<Vec<String>>> {
    let Some(path) = path else { return Ok(None) };
    m.input(path)?;
    let map = io::read_labels_file(path)?;
    Ok(Some(io::resolve_labels(n, &map)?))
}

fn influence(cli: &Cli, args: &InfluenceArgs) -> CliResult {
    let mut m = ManifestBuilder::new("influence", &cli.out, cli.seed, cli.workers);
    let (network, log) = load_log(&args.log, &mut m)?;
    m.input(&args.params)?;
    let params = io::read_params_file(&args.params)?;
    if params.n() != network.n() {
        return Err(CliError::input(format!(
            "parameters cover {} accounts, network has {}",
            params.n(),
            network.n()
        )));
    }
    let interval = Interval::new(args.from.unwrap_or(0.0), args.to.unwrap_or(log.horizon()))?;
    m.config("from", interval.from);
    m.config("to", interval.to);
    m.config("grid", args.grid);

    let index = ActivityIndex::build(&log, &network)?;
    let mbar = mean_activities(&index, interval, args.grid)?;
    let mut xi = influence_scores(&params, &network, &mbar)?;
    xi.interval = Some(interval);
    let labels = labels_for(args.labels.as_deref(), network.n(), &mut m)?
        .unwrap_or_else(|| network.labels().to_vec());
    io::write_scores(create(&cli.out, "scores.csv", &mut m)?, &xi, &labels)?;
    m.write()?;
    let top: Vec<&str> = xi.ranking.iter().take(5).map(|&i| labels[i].as_str()).collect();
    eprintln!("top accounts: {}", top.join(", "));
    Ok(())
}

fn pagerank_cmd(cli: &Cli, args: &PagerankArgs) -> CliResult {
    let mut m = ManifestBuilder::new("pagerank", &cli.out, cli.seed, cli.workers);
    let network = load_network(&args.network, args.n, &mut m)?;
    let config = PageRankConfig {
        damping: args.damping,
        tol: args.tol,
        max_iter: args.max_iter,
    };
    m.config("n", network.n());
    m.config("damping", config.damping);
    m.config("tol", config.tol);
    m.config("max_iter", config.max_iter);
    let scores = pagerank(&network, &config)?;
    let labels = labels_for(args.labels.as_deref(), network.n(), &mut m)?
        .unwrap_or_else(|| network.labels().to_vec());
    io::write_scores(
        create(&cli.out, "pagerank.csv", &mut m)?,
        &InfluenceVector::from_scores(scores, None),
        &labels,
    )?;
    m.write()
}

fn parse_transform(name: &str) -> CliResult<ResponseTransform> {
    match name.trim() {
        "raw" => Ok(ResponseTransform::Identity),
        "logit" => Ok(ResponseTransform::Logit),
        other => Err(CliError::input(format!("unknown transform {other:?} (expected raw or logit)"))),
    }
}

#[derive(Serialize)]
struct RegressionSummary {
    response: String,
    transform: &'static str,
    observations: usize,
    r_squared: f64,
    f_statistic: f64,
    f_p_value: f64,
    df_model: usize,
    df_resid: usize,
    constant_response: bool,
    clamped: usize,
}

fn write_coefficients(w: impl Write, rows: &[(Vec<String>, &cpinfluence::baselines::RegressionResult)], head: &[&str]) -> CliResult {
    let mut w = w;
    let header: Vec<&str> = head
        .iter()
        .copied()
        .chain(["variable", "estimate", "std_error", "t_value", "p_value"])
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(CliError::internal)?;
    for (prefix, reg) in rows {
        for c in &reg.coefficients {
            let mut fields = prefix.clone();
            fields.extend([
                csv_field(&c.name),
                c.estimate.to_string(),
                c.std_error.to_string(),
                c.t_value.to_string(),
                c.p_value.to_string(),
            ]);
            writeln!(w, "{}", fields.join(",")).map_err(CliError::internal)?;
        }
    }
    w.flush().map_err(CliError::internal)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn regress(cli: &Cli, args: &RegressArgs) -> CliResult {
    let mut m = ManifestBuilder::new("regress", &cli.out, cli.seed, cli.workers);
    m.input(&args.table)?;
    let text = fs::read(&args.table).map_err(|e| CliError::input(format!("{}: {e}", args.table.display())))?;
    let (headers, rows) = io::read_table(text.as_slice(), &args.table.display().to_string())?;
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(format!("no column {name:?} in {}", args.table.display())))
    };
    let y_col = column(&args.response)?;
    let predictors: Vec<String> = if args.predictors.is_empty() {
        headers.iter().filter(|h| **h != args.response).cloned().collect()
    } else {
        args.predictors.clone()
    };
    let cols = predictors.iter().map(|p| column(p)).collect::<CliResult<Vec<_>>>()?;
    let transform = parse_transform(&args.transform)?;
    m.config("response", &args.response);
    m.config("predictors", predictors.join(","));
    m.config("transform", transform.name());

    let y: Vec<f64> = rows.iter().map(|r| r[y_col]).collect();
    let x: Vec<Vec<f64>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
    let names: Vec<&str> = predictors.iter().map(String::as_str).collect();
    let (design, labels) = with_intercept(&x, &names);
    let reg = ols_regress(&y, &design, &labels, transform)?;

    write_coefficients(create(&cli.out, "coefficients.csv", &mut m)?, &[(Vec::new(), &reg)], &[])?;
    let summary = RegressionSummary {
        response: args.response.clone(),
        transform: transform.name(),
        observations: y.len(),
        r_squared: reg.r_squared,
        f_statistic: reg.f_statistic,
        f_p_value: reg.f_p_value,
        df_model: reg.df_model,
        df_resid: reg.df_resid,
        constant_response: reg.constant_response,
        clamped: reg.clamped,
    };
    write_json(&cli.out, "regression.json", &summary, &mut m)?;
    m.write()
}

fn model_name(proposed: bool, pagerank: bool) -> &'static str {
    match (proposed, pagerank) {
        (true, true) => "both",
        (true, false) => "proposed",
        _ => "pagerank",
    }
}

#[derive(Serialize)]
struct ComparisonSummary<'a> {
    matched: &'a [String],
    dropped: &'a [String],
    models: Vec<ModelSummary>,
}

#[derive(Serialize)]
struct ModelSummary {
    response: &'static str,
    proposed: bool,
    pagerank: bool,
    r_squared: f64,
    f_statistic: f64,
    f_p_value: f64,
    df_model: usize,
    df_resid: usize,
}

fn compare(cli: &Cli, args: &CompareArgs) -> CliResult {
    let mut m = ManifestBuilder::new("compare", &cli.out, cli.seed, cli.workers);
    m.input(&args.scores)?;
    let (scores, labels) = io::read_scores_file(&args.scores)?;
    let network = load_network(&args.network, Some(scores.len()), &mut m)?;
    let pr = pagerank(&network, &PageRankConfig::default())?;
    m.input(&args.external)?;
    let external = io::read_external_scores_file(&args.external)?;
    let controls = match &args.controls {
        Some(path) => {
            m.input(path)?;
            Some(io::read_controls_file(path)?)
        }
        None => None,
    };
    let transforms = args
        .transforms
        .iter()
        .map(|t| parse_transform(t))
        .collect::<CliResult<Vec<_>>>()?;
    m.config("transforms", transforms.iter().map(|t| t.name()).collect::<Vec<_>>().join(","));

    let input = ComparisonInput {
        labels: &labels,
        influence: &scores,
        pagerank: &pr,
        external: &external,
        controls: controls.as_ref(),
    };
    let report = compare_measures(&input, &transforms)?;
    write_comparison(&cli.out, &report, &mut m)?;
    m.write()?;
    for t in &transforms {
        let r2 = |p, q| report.r_squared(*t, p, q).map(format_score).unwrap_or_default();
        eprintln!(
            "{}: R^2 proposed {} | pagerank {} | both {}",
            t.name(),
            r2(true, false),
            r2(false, true),
            r2(true, true)
        );
    }
    Ok(())
}

fn write_comparison(out: &Path, report: &ComparisonReport, m: &mut ManifestBuilder) -> CliResult {
    let mut w = create(out, "r_squared.csv", m)?;
    let io_err = CliError::internal;
    writeln!(w, "response,proposed,pagerank,r_squared").map_err(io_err)?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.response.name(),
            u8::from(row.proposed),
            u8::from(row.pagerank),
            row.r_squared
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let tables: Vec<(Vec<String>, _)> = report
        .rows
        .iter()
        .map(|r| {
            (
                vec![r.response.name().to_string(), model_name(r.proposed, r.pagerank).to_string()],
                &r.regression,
            )
        })
        .collect();
    write_coefficients(create(out, "coefficients.csv", m)?, &tables, &["response", "model"])?;

    let summary = ComparisonSummary {
        matched: &report.matched,
        dropped: &report.dropped,
        models: report
            .rows
            .iter()
            .map(|r| ModelSummary {
                response: r.response.name(),
                proposed: r.proposed,
                pagerank: r.pagerank,
                r_squared: r.r_squared,
                f_statistic: r.regression.f_statistic,
                f_p_value: r.regression.f_p_value,
                df_model: r.regression.df_model,
                df_resid: r.regression.df_resid,
            })
            .collect(),
    };
    write_json(out, "comparison.json", &summary, m)
}

#[derive(Serialize)]
struct ExperimentSummary<'a> {
    config: BTreeMap<String, String>,
    assumptions: Vec<String>,
    cells: &'a [ExperimentReport],
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> CliResult {
    let mut m = ManifestBuilder::new("experiment", &cli.out, cli.seed, cli.workers);
    let (mut pairs, _) = load_pairs(&args.config, &mut m)?;

    let take_list = |pairs: &mut Pairs, list: &str, single: &str| -> CliResult<Option<Vec<usize>>> {
        match (pairs.remove(list), pairs.remove(single)) {
            (Some(_), Some(_)) => Err(CliError::input(format!("give either {list} or {single}"))),
            (Some(v), None) => Ok(Some(parse_list(list, &v)?)),
            (None, Some(v)) => Ok(Some(parse_list(single, &v)?)),
            (None, None) => Ok(None),
        }
    };
    let n_values = take_list(&mut pairs, "n_values", "n")?
        .ok_or_else(|| CliError::input("missing required key `n_values`"))?;
    let topic_values = take_list(&mut pairs, "topics_values", "topics")?.unwrap_or_else(|| vec![SimConfig::default().topics]);
    if n_values.is_empty() || topic_values.is_empty() {
        return Err(CliError::input("n_values and topics_values must be non-empty"));
    }

    let (newton_pairs, sim_pairs): (Pairs, Pairs) = pairs
        .into_iter()
        .partition(|(k, _)| NewtonConfig::KEYS.contains(&k.as_str()));
    let unknown: Vec<&str> = sim_pairs
        .keys()
        .map(String::as_str)
        .filter(|k| !SIM_KEYS.contains(k))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::input(format!("config: unknown keys: {}", unknown.join(", "))));
    }
    let newton = newton_config(&newton_pairs)?;

    let mut cells = Vec::new();
    let mut resolved = BTreeMap::new();
    for &n in &n_values {
        for &topics in &topic_values {
            let mut p = sim_pairs.clone();
            p.insert("n".into(), n.to_string());
            p.insert("topics".into(), topics.to_string());
            let mut config = sim_config(&p, &[])?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            config.validate()?;
            if resolved.is_empty() {
                resolved = sim_entries(&config);
                resolved.extend(newton_entries(&newton));
                resolved.insert("n_values".into(), join(&n_values));
                resolved.insert("topics_values".into(), join(&topic_values));
                resolved.remove("n");
                resolved.remove("topics");
            }
            eprintln!("cell n = {n}, topics = {topics}: {} replicates", config.replicates);
            cells.push(simulator::run_experiment(&config, &newton)?);
        }
    }
    m.config_all(resolved.clone());

    write_experiment_csv(create(&cli.out, "experiment.csv", &mut m)?, &cells)?;
    let post_prob = resolved.get("post_prob").cloned().unwrap_or_default();
    let cap = resolved.get("max_events_per_topic").cloned().unwrap_or_default();
    let summary = ExperimentSummary {
        config: resolved,
        assumptions: vec![
            format!("posting probability p = {post_prob} per account per integer epoch (not fixed by the model; chosen as the default)"),
            format!("a topic stops being observed once it has {cap} retweet/mention events"),
        ],
        cells: &cells,
    };
    write_json(&cli.out, "summary.json", &summary, &mut m)?;
    m.write()?;
    for c in &cells {
        eprintln!(
            "n = {:>3}, topics = {:>4}: mean MSE(omega) {:.5}, mean rel. error(xi) {:.4} ({} used, {} failed)",
            c.n, c.topics, c.means.mse_omega, c.means.rel_xi, c.means.used, c.means.failures
        );
    }
    Ok(())
}

fn write_experiment_csv(mut w: impl Write, cells: &[ExperimentReport]) -> CliResult {
    let io_err = CliError::internal;
    writeln!(
        w,
        "row,n,topics,replicate,response_events,censored_topics,status,converged,iterations,mse_omega,mse_xi,rel_omega,rel_xi,error"
    )
    .map_err(io_err)?;
    for c in cells {
        for r in &c.per_replicate {
            writeln!(
                w,
                "replicate,{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.n,
                c.topics,
                r.replicate,
                r.response_events,
                r.censored_topics,
                r.status.map(|s| s.as_str()).unwrap_or("error"),
                u8::from(r.converged),
                r.iterations,
                r.mse_omega,
                r.mse_xi,
                r.rel_omega,
                r.rel_xi,
                csv_field(r.error.as_deref().unwrap_or(""))
            )
            .map_err(io_err)?;
        }
        let reps = c.per_replicate.len() as f64;
        let events = c.per_replicate.iter().map(|r| r.response_events as f64).sum::<f64>() / reps;
        let censored = c.per_replicate.iter().map(|r| r.censored_topics as f64).sum::<f64>() / reps;
        let failures = if c.means.failures > 0 {
            format!("{} replicates excluded", c.means.failures)
        } else {
            String::new()
        };
        writeln!(
            w,
            "mean,{},{},,{},{},,{},,{},{},{},{},{}",
            c.n,
            c.topics,
            events,
            censored,
            c.means.used,
            c.means.mse_omega,
            c.means.mse_xi,
            c.means.rel_omega,
            c.means.rel_xi,
            failures
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
