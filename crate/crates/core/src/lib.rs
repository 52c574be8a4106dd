//! Two-timescale mobile edge computing simulator.
//!
//! * [`model`] and [`config`]: domain types and validated scenarios.
//! * [`cost`]: every delay, cost, energy and constraint formula.
//! * [`info`]: seeded per-slot network information.
//! * [`spco`]: per-slot placement and offloading under an energy queue.
//! * [`maied`]: Markov-chain search over edge server deployments.
//! * [`oracle`]: brute-force references and theorem checks.
//! * [`harness`]: experiments, sweeps and CSV/JSON output.

pub mod config;
pub mod cost;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod info;
pub mod maied;
pub mod model;
pub mod oracle;
pub mod output;
pub mod spco;

pub use config::{Scenario, ScenarioConfig};
pub use error::{Error, Result};
