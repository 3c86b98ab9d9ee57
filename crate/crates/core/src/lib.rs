//! Data-driven reachability analysis of nonlinear systems through lifted
//! (Koopman) linear models identified from noisy input–state data.

// `!(x >= 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod dictionary;
pub mod error;
pub mod errorsets;
pub mod expr;
pub mod identify;
pub mod interval;
pub mod reach;
pub mod scenario;
pub mod verify;
pub mod zonotope;

pub use benchmarks::{generate_dataset, SystemSpec};
pub use dictionary::{Dictionary, DictionaryDef, IntervalMatrix, LipschitzOptions};
pub use error::{Error, Result};
pub use errorsets::{CoverOptions, ErrorSets, ResidualBank};
pub use expr::{interval_eval, Env, Expr, Var};
pub use identify::{Dataset, KoopmanModel, Trajectory};
pub use interval::Interval;
pub use reach::{reach, ReachOptions, ReachResult};
pub use scenario::{DatasetConfig, Scenario};
pub use verify::{compare_pipelines, monte_carlo_containment, Comparison, ContainmentReport, RunSetup};
pub use zonotope::{IntervalBox, Membership, Zonotope};
