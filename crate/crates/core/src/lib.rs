//! Human mental search (HMS) and HMS-OS, a variant that groups the
//! population in both search space and objective space and spends more
//! mental searches on better bids.
//!
//! The crate also carries PSO and GWO baselines, an analytic benchmark
//! suite, nonparametric comparison statistics and an experiment harness
//! (see the `hmsos` binary).
//!
//! ```
//! use hmsos_core::benchmarks::by_name;
//! use hmsos_core::hms_os::{run_hms_os, HmsOsConfig};
//!
//! let problem = by_name("sphere", 5).unwrap().to_problem();
//! let mut config = HmsOsConfig::default();
//! config.base.nfe_max = 2_000;
//! let trace = run_hms_os(&problem, &config, 42).unwrap();
//! assert!(trace.final_value() < trace.records[0].best_value);
//! ```

pub mod baselines;
pub mod benchmarks;
pub mod clustering;
pub mod config;
pub mod error;
pub mod harness;
pub mod hms;
pub mod hms_os;
pub mod levy;
pub mod population;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use population::{
    clamp_to_bounds, init_population, Bid, Ledger, ObjectiveProblem, Population, RunTrace,
    SearchBounds, TraceRecord,
};
pub use rng::{Draws, RngStream};
