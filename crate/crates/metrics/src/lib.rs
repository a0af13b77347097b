//! Referential tracking and retrieval metrics for scenario mining.
//!
//! HOTA is computed in three modes: over every box, over referred timestamps
//! only, and over whole referred tracks. Log and timestamp balanced accuracy
//! measure whether a method finds the right logs and moments at all.

pub mod balanced;
pub mod hota;
pub mod iou;
pub mod report;

pub use balanced::{log_outcome, timestamp_outcomes, Confusion, Level};
pub use hota::{hota, hota_counts, optimal_assignment, EvalConfig, HotaCounts, HotaMode, Labeled, Role, Similarity};
pub use iou::box_iou_3d;
pub use report::{evaluate, render_table, EvalCase, EvalReport, PromptScores, Scores};
