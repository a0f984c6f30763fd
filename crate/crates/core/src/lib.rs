//! Lane-change conflict analysis for freeway merging sections.
//!
//! Trajectories of cars and trucks are scanned pairwise for two-dimensional
//! time-to-collision (TTC) between their oriented rectangles. Episodes under
//! the TTC threshold become conflict events, which are classified as
//! lane-change or rear-end conflicts and labelled by the (lead, lag) vehicle
//! types. Descriptive reports, wavelet trajectory smoothing, and a synthetic
//! merging-section generator round out the pipeline.

pub mod analytics;
pub mod conflict;
pub mod denoise;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod report;
pub mod synth;
pub mod trajectory;
pub mod ttc;

pub use conflict::{detect_conflicts, ConflictClass, ConflictConfig, ConflictEvent, TypePair};
pub use geometry::Vec2;
pub use oracle::ttc_oracle;
pub use trajectory::{Dataset, KinematicState, SiteGeometry, VehicleClass, VehicleTrack};
pub use ttc::{ttc, ttc_1d, OrientedBox, PairState};
