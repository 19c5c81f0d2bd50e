//! Multivariate counting-process model of influence on social platforms.
//!
//! Each account's retweet/mention process has a Cox-type hazard driven by
//! the recent activity of the accounts it follows, weighted by per-account
//! response (`alpha`) and susceptibility (`beta`) parameters. This crate
//! estimates those parameters by maximizing the log partial likelihood with
//! Newton's method, turns them into a log-scale influence score, simulates
//! synthetic ecosystems under the model, and provides PageRank/OLS baselines.
//!
//! Accounts and topics are 0-based in the API and 1-based in files.

pub mod baselines;
pub mod config;
pub mod error;
pub mod events;
pub mod hazard;
pub mod index;
pub mod influence;
pub mod io;
pub mod likelihood;
pub mod network;
pub mod optimizer;
pub mod params;
pub mod simulator;

pub use error::{Error, Result};
pub use events::{ActionKind, Event, EventLog};
pub use hazard::hazard_rate;
pub use index::ActivityIndex;
pub use influence::{influence_scores, mean_activities, mean_activity, rank, InfluenceVector, Interval};
pub use likelihood::{Evaluation, LikelihoodWorkspace, Order};
pub use network::FollowersNetwork;
pub use optimizer::{estimate, estimate_with, line_search, FitResult, FitStatus, NewtonConfig};
pub use params::ParamVector;
pub use simulator::{generate_actions, generate_network, run_experiment, simulate, SimConfig, TopicActions};
