//! Flat `key = value` configuration files.
//!
//! Blank lines, `#`/`;` comments and `[section]` headers are ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::optimizer::NewtonConfig;
use crate::params::ParamVector;
use crate::simulator::{OmegaSpec, SimConfig};

pub type Pairs = BTreeMap<String, String>;

pub fn parse_pairs(text: &str) -> Result<Pairs> {
    let mut out = Pairs::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn reject_unknown(pairs: &Pairs, known: &[&str]) -> Result<()> {
    let unknown: Vec<&str> = pairs
        .keys()
        .map(String::as_str)
        .filter(|k| !known.contains(k))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))))
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

pub fn newton_config(pairs: &Pairs) -> Result<NewtonConfig> {
    reject_unknown(pairs, NewtonConfig::KEYS)?;
    let mut c = NewtonConfig::default();
    for (k, v) in pairs {
        c.set(k, v)?;
    }
    c.validate()?;
    Ok(c)
}

/// Keys accepted by [`sim_config`]. `network` (a file path) is resolved by
/// the caller.
pub const SIM_KEYS: &[&str] = &[
    "n",
    "topics",
    "baseline",
    "horizon",
    "post_prob",
    "post_batch",
    "omega_lo",
    "omega_hi",
    "alpha",
    "beta",
    "seed",
    "replicates",
    "max_events_per_topic",
];

pub fn sim_config(pairs: &Pairs, extra_keys: &[&str]) -> Result<SimConfig> {
    let known: Vec<&str> = SIM_KEYS.iter().chain(extra_keys).copied().collect();
    reject_unknown(pairs, &known)?;
    let get = |k: &str| pairs.get(k).map(String::as_str);
    let n: usize = parse("n", get("n").ok_or_else(|| Error::Config("missing required key `n`".into()))?)?;
    let mut c = SimConfig {
        n,
        ..SimConfig::default()
    };
    if let Some(v) = get("topics") {
        c.topics = parse("topics", v)?;
    }
    if let Some(v) = get("baseline") {
        c.baseline = parse("baseline", v)?;
    }
    if let Some(v) = get("horizon") {
        c.horizon = parse("horizon", v)?;
    }
    if let Some(v) = get("post_prob") {
        c.post_prob = parse("post_prob", v)?;
    }
    if let Some(v) = get("post_batch") {
        c.post_batch = parse("post_batch", v)?;
    }
    if let Some(v) = get("seed") {
        c.seed = parse("seed", v)?;
    }
    if let Some(v) = get("replicates") {
        c.replicates = parse("replicates", v)?;
    }
    if let Some(v) = get("max_events_per_topic") {
        c.max_events_per_topic = parse("max_events_per_topic", v)?;
    }
    match (get("alpha"), get("beta")) {
        (Some(a), Some(b)) => {
            if get("omega_lo").is_some() || get("omega_hi").is_some() {
                return Err(Error::Config("give either alpha/beta or omega_lo/omega_hi".into()));
            }
            c.omega = OmegaSpec::Fixed(ParamVector::new(parse_list("alpha", a)?, parse_list("beta", b)?)?);
        }
        (None, None) => {
            let (lo, hi) = match c.omega {
                OmegaSpec::Uniform { lo, hi } => (lo, hi),
                OmegaSpec::Fixed(_) => unreachable!("default is uniform"),
            };
            let lo = get("omega_lo").map(|v| parse("omega_lo", v)).transpose()?.unwrap_or(lo);
            let hi = get("omega_hi").map(|v| parse("omega_hi", v)).transpose()?.unwrap_or(hi);
            c.omega = OmegaSpec::Uniform { lo, hi };
        }
        _ => return Err(Error::Config("alpha and beta must be given together".into())),
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let p = parse_pairs("# comment\n[sim]\nn = 5\n topics=3 \n; x\n").unwrap();
        assert_eq!(p["n"], "5");
        assert_eq!(p["topics"], "3");
        assert!(parse_pairs("n 5").is_err());
    }

    #[test]
    fn sim_config_keys() {
        let c = sim_config(&parse_pairs("n = 3\nalpha = 0, 1, 2\nbeta = 0,0,0\nseed = 9").unwrap(), &[]).unwrap();
        assert_eq!(c.seed, 9);
        assert!(matches!(c.omega, OmegaSpec::Fixed(_)));

        let err = sim_config(&parse_pairs("topics = 3").unwrap(), &[]).unwrap_err();
        assert!(err.to_string().contains("`n`"));
        let err = sim_config(&parse_pairs("n = 3\nfoo = 1\nbar = 2").unwrap(), &[]).unwrap_err();
        assert!(err.to_string().contains("bar, foo"));
        assert!(sim_config(&parse_pairs("n = 3\nalpha = 0,1,2").unwrap(), &[]).is_err());
    }

    #[test]
    fn newton_config_from_pairs() {
        let c = newton_config(&parse_pairs("step_threshold = 1e-8\nline_search.shrink = 0.3").unwrap()).unwrap();
        assert_eq!(c.step_threshold, 1e-8);
        assert_eq!(c.line_search.shrink, 0.3);
        assert!(newton_config(&parse_pairs("tol = 1").unwrap()).is_err());
    }
}
