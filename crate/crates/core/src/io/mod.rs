//! Archive files, experiment configs and CSV traces.

pub mod archive;
pub mod config;
pub mod csv;

pub use archive::{archive_from_slice, archive_to_vec, load_archive, save_archive, SCHEMA_VERSION};
pub use config::{canonical_hash, parse_seed_list, ArchiveRecipe, ArchiveSource, ExperimentConfig, ScalingConfig, SweepGrid};
pub use self::csv::{write_run_csv, write_summary_csv, write_weights_csv};
