//! Placement planning for UAV base stations that must cover every ground
//! user while keeping a connected UAV-to-UAV backhaul.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod exact;
pub mod harness;
pub mod netgraph;
pub mod plan;
pub mod planner;
pub mod scenario;

pub use baselines::{backhaul_greedy, greedy_cover, random_deploy, GreedyMode};
pub use channel::{coverage_radii, optimal_altitude, ChannelParams, CoverageGeometry, LinkThresholds};
pub use error::{Error, Result};
pub use exact::{export_ilp, solve_exact, ConnectivityForm};
pub use netgraph::{build_graph, DeploymentGraph};
pub use plan::{verify_plan, AlgorithmTag, Plan, VerifyReport};
pub use planner::prune;
pub use scenario::{load_scenario, save_scenario, Scenario, ScenarioConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
