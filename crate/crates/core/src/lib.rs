//! Simulation and verification of the k-corners and k-records of the unit
//! Poisson process in the positive quadrant.
//!
//! * [`sampling`] deterministic random streams and elementary samplers
//! * [`pointset`] windows, point sets and the measure-preserving maps
//! * [`extraction`] ranks, records, corners, the k-th minimum path
//! * [`oracle`] brute-force references for the extraction routines
//! * [`generators`] direct samplers of the derived processes
//! * [`densities`] closed-form densities and intensities
//! * [`stats`] goodness-of-fit machinery
//! * [`verify`] the scenario suite

pub mod densities;
pub mod config;
pub mod error;
pub mod io;
pub mod generators;
pub mod extraction;
pub mod oracle;
pub mod pointset;
pub mod quadrature;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use config::{OutputFormat, RunConfig};
pub use densities::{
    corner_intensity_p1, gamma_marginal_cdf, gamma_marginal_pdf, j_intensity,
    joint_corner_density_pm, joint_corner_density_pm_with, record_intensity, CornerChain,
    ExponentConvention,
};
pub use error::{Error, Result};
pub use extraction::{
    corner_gap_counts, initial_ranks, k_corners, k_records, kth_min_path, lifetimes,
    order_statistics_at, record_gap_counts, Clause, Corner, CornerSet, MarkedLifetime, RankedPoint,
    StepPath,
};
pub use pointset::{
    gen_unit_poisson, gen_unit_poisson_in, hyperbolic_rescale, log_map, reflect, GroundPointSet,
    PlanarPoint, PlanarPointSet, Window,
};
pub use generators::{
    bernoulli_thin, chain_value_at, gen_selfsim_poisson, record_value_lifetime, simulate_m_chain,
    spacing_pairs, spacings, ChainSegment,
};
pub use sampling::{
    beta_k1_sample, exp_sample, gamma_sample, harmonic_first_success, poisson_count, Capped,
    RngStream, ALGORITHM_VERSION, DEFAULT_HARMONIC_CAP,
};
pub use stats::{Criterion, TestResult};
pub use verify::{run_scenario, run_scenario_by_name, ScenarioId, ScenarioReport};
