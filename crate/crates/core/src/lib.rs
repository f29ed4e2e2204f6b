//! Citation-based ranking engine for U.S. CS doctoral programs.
//!
//! The pipeline ingests faculty rosters and per-faculty citation data,
//! computes department strength measures from the t10 index (citations of a
//! faculty member's 10th most-cited paper), fits fixed-intercept regression
//! models against peer-assessment scores, and emits rankings together with a
//! full set of ranking-comparison statistics.
//!
//! Modules follow the pipeline stages:
//!
//! * [`roster`] — domain types, name normalization, roster/score ingestion,
//!   snapshot persistence, and cross-snapshot faculty matching
//! * [`harvest`] — profile-page parsing from a local fixture store, t10
//!   derivation, and the politeness/timeout contract for fetchers
//! * [`metrics`] — national t10 distribution and per-department averaged
//!   (m10, g10, p10) and cumulative (cN) measures
//! * [`model`] — pair-model fitting, ensemble averaging, the published
//!   scoring formula, and ranking tables
//! * [`analytics`] — correlations, rank-difference and score-delta reports,
//!   cohort analysis, profile-bias and department-size statistics
//! * [`synth`] — seeded synthetic dataset generation for demos and self-tests
//! * [`cli`] — the batch command-line frontend

pub mod analytics;
pub mod cli;
pub mod harvest;
pub mod metrics;
pub mod model;
pub mod roster;
pub mod synth;

pub use roster::{FacultyRecord, IdentityMap, Rank, ScoreSource, ScoreTable, Snapshot};
