//! Camera trajectory types and the trajectory file format.
//!
//! A trajectory file is a JSON document holding either one trajectory or an
//! array of them:
//!
//! ```json
//! {"video_id": "v1", "kind": "discrete", "interval_seconds": 5.0,
//!  "entries": [{"t": 0, "theta": 0.0, "phi": 20.0}, ...],
//!  "aggregate_score": 3.7}
//! ```
//!
//! Continuous trajectories use `"kind": "continuous"`, `"fps"` and entries
//! keyed by `"frame"` instead. Human-edited trajectories also carry an
//! `"annotator"` field.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Direction;
use crate::grid::StGlimpse;

/// One lattice glimpse per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrajectory {
    pub steps: Vec<StGlimpse>,
    pub aggregate_score: f64,
}

impl DiscreteTrajectory {
    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        self.steps.iter().map(|s| s.dir)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One camera direction per output frame. Frame `i` is centered at time
/// `(i + 0.5) / fps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTrajectory {
    pub fps: f64,
    pub directions: Vec<Direction>,
}

impl ContinuousTrajectory {
    pub fn new(fps: f64, directions: Vec<Direction>) -> Result<Self> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::InvalidParameter(format!("fps must be positive, got {fps}")));
        }
        Ok(ContinuousTrajectory { fps, directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.directions.len() as f64 / self.fps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frame: Option<usize>,
    pub theta: f64,
    pub phi: f64,
}

/// Serialized form of either trajectory kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    pub video_id: String,
    /// Who recorded a human-edited trajectory.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotator: Option<String>,
    pub kind: TrajectoryKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub interval_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fps: Option<f64>,
    pub entries: Vec<TrajectoryEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aggregate_score: Option<f64>,
}

impl TrajectoryDoc {
    pub fn from_discrete(video_id: &str, interval: f64, traj: &DiscreteTrajectory) -> Self {
        TrajectoryDoc {
            video_id: video_id.to_string(),
            annotator: None,
            kind: TrajectoryKind::Discrete,
            interval_seconds: Some(interval),
            fps: None,
            entries: traj
                .steps
                .iter()
                .map(|s| TrajectoryEntry {
                    t: Some(s.t),
                    frame: None,
                    theta: s.dir.theta(),
                    phi: s.dir.phi(),
                })
                .collect(),
            aggregate_score: Some(traj.aggregate_score),
        }
    }

    pub fn from_continuous(video_id: &str, traj: &ContinuousTrajectory) -> Self {
        TrajectoryDoc {
            video_id: video_id.to_string(),
            annotator: None,
            kind: TrajectoryKind::Continuous,
            interval_seconds: None,
            fps: Some(traj.fps),
            entries: traj
                .directions
                .iter()
                .enumerate()
                .map(|(i, d)| TrajectoryEntry {
                    t: None,
                    frame: Some(i),
                    theta: d.theta(),
                    phi: d.phi(),
                })
                .collect(),
            aggregate_score: None,
        }
    }

    /// Validates the document and converts it to a discrete trajectory.
    ///
    /// Steps must be numbered `0..n` in order. When no aggregate score is
    /// stored it is reported as zero.
    pub fn to_discrete(&self) -> Result<DiscreteTrajectory> {
        if self.kind != TrajectoryKind::Discrete {
            return Err(Error::Trajectory(format!("{}: not a discrete trajectory", self.video_id)));
        }
        match self.interval_seconds {
            Some(i) if i > 0.0 => {}
            _ => return Err(Error::Trajectory("discrete trajectory needs interval_seconds > 0".into())),
        }
        let steps = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if e.t != Some(i) {
                    return Err(Error::Trajectory(format!("entry {i} has t = {:?}", e.t)));
                }
                Ok(StGlimpse {
                    t: i,
                    dir: Direction::new(e.theta, e.phi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteTrajectory {
            steps,
            aggregate_score: self.aggregate_score.unwrap_or(0.0),
        })
    }

    pub fn to_continuous(&self) -> Result<ContinuousTrajectory> {
        if self.kind != TrajectoryKind::Continuous {
            return Err(Error::Trajectory(format!("{}: not a continuous trajectory", self.video_id)));
        }
        let fps = self
            .fps
            .ok_or_else(|| Error::Trajectory("continuous trajectory needs fps".into()))?;
        let directions = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if e.frame != Some(i) {
                    return Err(Error::Trajectory(format!("entry {i} has frame = {:?}", e.frame)));
                }
                Direction::new(e.theta, e.phi)
            })
            .collect::<Result<Vec<_>>>()?;
        ContinuousTrajectory::new(fps, directions)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Box<TrajectoryDoc>),
    Many(Vec<TrajectoryDoc>),
}

/// Reads a trajectory file holding one document or an array of documents.
pub fn read_trajectories(path: &Path) -> Result<Vec<TrajectoryDoc>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectories(&text).map_err(|e| Error::json(path, e))
}

pub fn parse_trajectories(text: &str) -> std::result::Result<Vec<TrajectoryDoc>, serde_json::Error> {
    Ok(match serde_json::from_str(text)? {
        OneOrMany::One(d) => vec![*d],
        OneOrMany::Many(v) => v,
    })
}

/// Writes documents as a pretty-printed JSON array.
pub fn write_trajectories(path: &Path, docs: &[TrajectoryDoc]) -> Result<()> {
    let text = serde_json::to_string_pretty(docs).map_err(|e| Error::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
