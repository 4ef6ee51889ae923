//! Optimal multi-period allocation between a risk-free and a risky asset for
//! an investor with cumulative prospect theory preferences.
//!
//! The crate is organised bottom-up:
//!
//! * [`prefs`]: value function and probability distortions,
//! * [`dist`]: excess-return and interest-rate laws,
//! * [`choquet`]: the CPT functional, exact and by quadrature,
//! * [`solver`]: terminal kernel and backward induction of the policy
//!   coefficients,
//! * [`simulate`]: wealth paths, benchmarked wealth and the
//!   precommitment (time-inconsistency) comparison.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choquet;
pub mod dist;
pub mod error;
pub mod prefs;
pub mod quadrature;
pub mod simulate;
pub mod solver;

pub use choquet::{cpt_cdf, cpt_discrete, cpt_of_scaled_position, cpt_value, CdfSettings, CptValue};
pub use dist::{rng_stream, DiscreteEmpirical, Distribution, Normal, RateModel};
pub use error::{CptError, Result};
pub use prefs::{CptPreferences, DistortionParams, Side, ValueParams, DEFAULT_GAMMA};
pub use simulate::{
    benchmarked_wealth, compound_factor, inconsistency_demo, simulate_paths, step_wealth,
    BenchmarkReport, DemoReport, Ensemble, EnsembleSummary, PrecommittedPlan, WealthPath,
};
pub use solver::{
    backward_induction, fmt17, optimal_trade, recursion_step, terminal_coefficients, terminal_stats,
    Constraints, PolicyCoefficients, PolicyTable, ReturnModel, SolverSettings, TerminalStats,
};
