//! Saturation throughput of Wi-Fi DCF and LTE-LAA listen-before-talk
//! sharing one unlicensed channel.
//!
//! The analytical model couples one backoff Markov chain per technology
//! through their collision probabilities, solves the resulting fixed point
//! and converts the solution into per-network throughput. An energy
//! detector model supplies imperfect cross-technology detection, and a
//! slot-level Monte-Carlo simulator provides an independent check.
//!
//! ```
//! use coexist::{analyze, LaaParams, Scenario, SolverConfig, WifiParams};
//!
//! let wifi = WifiParams::default().with_contention(16, 2);
//! let laa = LaaParams::default().with_rate(7.8);
//! let s = Scenario::new(1, 1, wifi, laa).unwrap().with_comparison_mode(true);
//! let (_, report) = analyze(&s, &SolverConfig::default()).unwrap();
//! assert!((report.tput_wifi_mbps - 1.49).abs() < 0.08);
//! assert!((report.tput_laa_mbps - 5.26).abs() < 0.27);
//! ```

pub mod config;
pub mod ed;
pub mod error;
pub mod exec;
pub mod markov;
pub mod mcsim;
pub mod params;
pub mod solver;
pub mod sweep;
pub mod throughput;

pub use config::{parse_scenario, parse_scenarios, to_toml, NamedScenario, ScenarioSpec};
pub use ed::{dbm_to_mw, detection_probability, gaussian_q, EdConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use markov::{laa_stationary, laa_tau, wifi_stationary, wifi_tau, BackoffChain, StationaryDistribution};
pub use mcsim::{replicate, simulate, simulate_with_detection, simulate_with_trace, SimConfig, SimReport};
pub use params::{load_priority_class, LaaParams, PriorityClass, Scenario, WifiParams};
pub use solver::{solve_coexistence, solve_wifi_only, CoupledSystem, Solution, SolveMethod, SolverConfig};
pub use sweep::{parse_sweeps, run_sweep, SweepAxis, SweepPoint, SweepSpec};
pub use throughput::{
    analyze, coexistence_throughput, wifi_only_throughput, EventClass, ThroughputReport,
};
