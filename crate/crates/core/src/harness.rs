//! Scenario configuration, reproducible experiment drivers, and CSV output.
//!
//! The harness ties the signal-processing layers into runnable studies: a
//! TOML scenario description ([`config::ScenarioConfig`]), deterministic
//! per-trial random streams ([`seeding`]), multi-anchor waveform synthesis
//! and per-link receiver passes ([`sim`]), the experiment drivers
//! ([`experiments`]), and row-oriented CSV results ([`results`]).

pub mod config;
pub mod experiments;
pub mod results;
pub mod seeding;
pub mod sim;

pub use config::ScenarioConfig;
pub use experiments::Runner;
pub use results::{ResultRow, TrajectoryPoint};
