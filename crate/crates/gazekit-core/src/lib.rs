//! Core algorithms for analyzing binocular eye-tracking recordings from the
//! three-step instructionless face emotion recognition (FER) protocol.
//!
//! The protocol shows four emotive faces for 10 s (free viewing), an emotion
//! word for 2 s, then word and faces together for 3 s with face positions
//! randomized (grounded FER). This crate turns raw gaze/pupil sample streams
//! from such sessions into:
//!
//! - fixations (dispersion-based), microsaccades (velocity/acceleration
//!   thresholding with a refractory window), and pupil summaries,
//! - AOI assignments against screen-level face/word areas and seven
//!   landmark-derived facial sub-regions,
//! - dwell-time tables and the dwell-time-change performance score,
//! - a statistical battery (one-way ANOVA, chi-square independence, Welch t,
//!   Spearman, Bonferroni) with internally implemented special functions,
//! - dwell and performance predictors (MLP, gradient-boosted trees, a fixed
//!   baseline) evaluated by leave-one-out cross-validation,
//! - a deterministic session simulator that provides ground truth for every
//!   stage.
//!
//! The crate is `no_std` + `alloc`; IO, file formats, and the CLI live in the
//! companion `gazekit` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod aoi;
pub mod events;
pub mod geometry;
pub mod kinematics;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod recording;
pub mod rng;
pub mod sim;
pub mod stats;
#[cfg(test)]
pub(crate) mod testutil;

pub use aoi::{AoiAssignment, AoiMap, MainAoi, Region, RegionGroup, TrialManifest};
pub use events::{FeatureRow, FixationEvent, Microsaccade, MicrosaccadeParams};
pub use geometry::{Point, Rect, ScreenGeometry};
pub use kinematics::KinematicSeries;
pub use recording::{GazeSample, InterestPeriod, ParticipantMeta, SessionRecording};

