//! Core library for turning 360° equirectangular video into normal-field-of-view
//! (NFOV) video.
//!
//! The pipeline scores every spatio-temporal glimpse on a fixed lattice for
//! capture-worthiness, selects smooth camera trajectories with a dynamic
//! program, interpolates them to per-frame camera directions and renders the
//! virtual camera's view. The [`metrics`] module evaluates generated
//! trajectories against human-edited ones and against human-captured footage.

pub mod baselines;
pub mod error;
pub mod geom;
pub mod grid;
pub mod metrics;
pub mod raster;
pub mod render;
pub mod scoring;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use geom::{CameraModel, Direction};
pub use grid::{GlimpseGrid, StGlimpse};
pub use raster::Raster;
pub use scoring::{FeatureSet, ScoreMap, WorthinessModel};
pub use trajectory::{ContinuousTrajectory, DiscreteTrajectory};
