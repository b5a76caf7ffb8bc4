//! Backend for collecting human-edited camera trajectories: serves panorama
//! frames and camera outlines, buffers the mouse-driven camera samples of
//! each session and writes them out as continuous trajectories.

pub mod http;
pub mod service;

pub use http::{router, serve};
pub use service::{direction_at_time, AnnotateError, AnnotationService, Finalized, Sample, SessionInfo, VideoInfo};
