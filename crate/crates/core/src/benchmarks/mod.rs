//! Benchmark tasks, source archive construction and relatedness heatmaps.

pub mod archive;
pub mod arm;
pub mod heatmap;
pub mod knapsack;

pub use archive::{
    build_source_archive, expand_groups, ArchiveStrategy, SourceArchive, SourceGroup, SourceMeta,
    SourceSpec, TaskSpec,
};
pub use arm::{arm_tip, ArmTask};
pub use heatmap::{arm_heatmap, relatedness_heatmap, ArmGrid, Heatmap};
pub use knapsack::{gen_knapsack, CapacityKind, Correlation, KnapsackInstance};
