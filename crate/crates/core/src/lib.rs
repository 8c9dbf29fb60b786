//! Fast discord mining in multidimensional time series.
//!
//! A *discord* is the subsequence of a time series with the largest
//! z-normalized Euclidean distance to its nearest neighbor among training
//! subsequences — the most anomalous pattern. Finding the discord of a
//! `d`-dimensional series exactly costs `d` matrix-profile joins. This crate
//! compresses the `d` dimensions into `k` signed group sums with a count
//! sketch, joins only the `k` sketched series to locate the discord's time
//! index and group, then recovers the offending dimension by scanning the
//! few dimensions of that group. The sketch is linear, so dimensions can be
//! added, deleted, or point-updated without rebuilding.
//!
//! Modules:
//! - [`series`]: time-series data model, z-normalization, distance primitives
//! - [`profile`]: exact matrix-profile joins (AB-join and self-join)
//! - [`sketch`]: seeded count-sketch plans, sketched series, dynamic updates
//! - [`detect`]: the two-phase sketched detector and the exact baseline
//! - [`datagen`]: seeded synthetic generators and discord planting
//! - [`eval`]: experiment harnesses (success rate, score densities, AUC,
//!   statistical suites)

pub mod datagen;
pub mod detect;
mod error;
pub mod eval;
pub mod profile;
pub mod series;
pub mod sketch;

pub use error::{Error, Result};

pub use detect::{DetectionConfig, DiscordReport, Timings};
pub use profile::{JoinConfig, JoinMode, ProfileResult};
pub use series::{MultiSeries, Series, SubseqView, WindowStats};
pub use sketch::{GroupAssignment, SketchPlan, SketchedSeries};
