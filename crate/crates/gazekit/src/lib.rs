//! IO, file formats, figures, and the CLI for the gazekit analysis pipeline.
//!
//! The algorithms live in `gazekit-core`; this crate adds everything that
//! touches the filesystem: the canonical session format on disk, manifest /
//! landmark / embedding files, CSV and JSON reports, study directories, and
//! SVG heatmaps.

pub mod cli;
pub mod error;
pub mod formats;
pub mod heatmap;
pub mod study;
