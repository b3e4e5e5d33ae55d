//! Transfer evolutionary optimization over large archives of source models.
//!
//! A host genetic algorithm optimizes the target task. Every few generations it
//! hands control to a transfer learner which samples candidate solutions from a
//! mixture of frozen source search distributions plus a freshly fitted target
//! distribution. Three learners are provided:
//!
//! * [`similarity`]: a (1+1) evolution strategy whose chromosome is the vector of
//!   mixture coefficients and whose mutation is driven by running estimates of
//!   each model's expected target fitness. Per-step cost is linear in the
//!   number of sampled solutions plus the number of models.
//! * [`baselines::run_amtea`]: stacked density estimation of the coefficients by
//!   EM over every model.
//! * [`baselines::run_mab_amtea`]: EXP3 picks one source per step, EM weighs it
//!   against the target model.
//!
//! The [`benchmarks`] module carries the 0/1 knapsack families and the planar
//! arm, the source-archive pipeline and the relatedness heatmap. [`io`] holds
//! the archive JSON, experiment configs and CSV traces, and [`experiment`]
//! drives the matrix of seeds and algorithms used by the command line tool.

pub mod baselines;
pub mod benchmarks;
pub mod ea;
pub mod error;
pub mod experiment;
pub mod io;
pub mod models;
pub mod rng;
pub mod similarity;
pub mod types;

pub use error::{Error, Result};
pub use rng::RngHandle;
pub use types::{evaluate, Bounds, Genotype, Population, Sense, Space, Task, WriteBack};
