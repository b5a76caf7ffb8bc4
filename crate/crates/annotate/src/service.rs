//! Session bookkeeping for human camera annotation, independent of the
//! transport.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use autocam_core::geom::{signed_longitude_delta, wrap_longitude, Direction};
use autocam_core::raster::{FrameDir, FrameMeta, FrameSource};
use autocam_core::trajectory::{write_trajectories, ContinuousTrajectory, TrajectoryDoc};
use serde::{Deserialize, Serialize};

/// How far the first and last samples may sit from the video ends, seconds.
pub const COVERAGE_TOLERANCE: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("unknown video {0:?}")]
    UnknownVideo(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("session {0:?} is closed")]
    SessionClosed(String),
    #[error("annotator {annotator:?} already has pass {pass} for video {video_id:?}")]
    Duplicate {
        annotator: String,
        video_id: String,
        pass: u8,
    },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("samples cover [{first:.3}, {last:.3}] s of a {duration:.3} s video")]
    InsufficientCoverage { first: f64, last: f64, duration: f64 },
    #[error(transparent)]
    Core(#[from] autocam_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, AnnotateError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Media time in seconds.
    pub timestamp: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoInfo {
    pub video_id: String,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
}

#[derive(Debug)]
struct Session {
    video_id: String,
    annotator: String,
    phi_c: f64,
    pass: u8,
    samples: Vec<(f64, Direction)>,
    closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub video_id: String,
    pub annotator_id: String,
    pub phi_c: f64,
    pub pass: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalized {
    pub path: PathBuf,
    pub frames: usize,
}

/// Videos available for annotation and the open sessions on them.
///
/// Each session sits behind its own lock, so requests for one session are
/// serialized while different sessions proceed independently.
pub struct AnnotationService {
    videos: BTreeMap<String, FrameDir>,
    out_dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    taken: Mutex<HashSet<(String, String, u8)>>,
    next_id: AtomicU64,
}

impl AnnotationService {
    /// Every subdirectory of `videos_root` holding a frame sidecar becomes a
    /// video named after the directory. Finalized trajectories go to
    /// `out_dir`.
    pub fn open(videos_root: &Path, out_dir: &Path) -> Result<Self> {
        let mut videos = BTreeMap::new();
        let entries = fs::read_dir(videos_root).map_err(|e| AnnotateError::Io {
            path: videos_root.to_path_buf(),
            source: e,
        })?;
        for entry in entries {
            let path = entry
                .map_err(|e| AnnotateError::Io {
                    path: videos_root.to_path_buf(),
                    source: e,
                })?
                .path();
            if path.is_dir() && path.join(autocam_core::raster::META_FILE).is_file() {
                let id = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
                videos.insert(id, FrameDir::open(&path)?);
            }
        }
        Self::with_videos(videos, out_dir)
    }

    pub fn with_videos(videos: BTreeMap<String, FrameDir>, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| AnnotateError::Io {
            path: out_dir.to_path_buf(),
            source: e,
        })?;
        Ok(AnnotationService {
            videos,
            out_dir: out_dir.to_path_buf(),
            sessions: RwLock::new(HashMap::new()),
            taken: Mutex::new(HashSet::new()),
            next_id: AtomicU64::new(1),
        })
    }

    pub fn videos(&self) -> Vec<VideoInfo> {
        self.videos
            .iter()
            .map(|(id, dir)| {
                let FrameMeta {
                    fps,
                    width,
                    height,
                    frame_count,
                } = dir.meta();
                VideoInfo {
                    video_id: id.clone(),
                    fps,
                    width,
                    height,
                    frame_count,
                }
            })
            .collect()
    }

    pub fn video(&self, video_id: &str) -> Result<&FrameDir> {
        self.videos
            .get(video_id)
            .ok_or_else(|| AnnotateError::UnknownVideo(video_id.to_string()))
    }

    /// Encoded PNG bytes of one panorama frame.
    pub fn frame_png(&self, video_id: &str, index: usize) -> Result<Vec<u8>> {
        let dir = self.video(video_id)?;
        if index >= dir.meta().frame_count {
            return Err(AnnotateError::Invalid(format!(
                "frame {index} out of range for {} frames",
                dir.meta().frame_count
            )));
        }
        let path = dir.frame_path(index);
        fs::read(&path).map_err(|e| AnnotateError::Io { path, source: e })
    }

    pub fn output_path(&self, video_id: &str, annotator: &str, pass: u8) -> PathBuf {
        self.out_dir.join(format!("{video_id}__{annotator}__pass{pass}.json"))
    }

    pub fn create_session(&self, video_id: &str, annotator: &str, phi_c: f64, pass: u8) -> Result<SessionInfo> {
        self.video(video_id)?;
        if !(pass == 1 || pass == 2) {
            return Err(AnnotateError::Invalid(format!("pass must be 1 or 2, got {pass}")));
        }
        if !phi_c.is_finite() {
            return Err(AnnotateError::Invalid(format!("center longitude {phi_c} is not finite")));
        }
        if annotator.is_empty() || annotator.contains(['/', '\\']) {
            return Err(AnnotateError::Invalid(format!("bad annotator id {annotator:?}")));
        }
        let key = (annotator.to_string(), video_id.to_string(), pass);
        {
            let mut taken = self.taken.lock().expect("lock");
            if taken.contains(&key) || self.output_path(video_id, annotator, pass).exists() {
                return Err(AnnotateError::Duplicate {
                    annotator: key.0,
                    video_id: key.1,
                    pass,
                });
            }
            taken.insert(key);
        }
        let session_id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let phi_c = wrap_longitude(phi_c);
        self.sessions.write().expect("lock").insert(
            session_id.clone(),
            Arc::new(Mutex::new(Session {
                video_id: video_id.to_string(),
                annotator: annotator.to_string(),
                phi_c,
                pass,
                samples: Vec::new(),
                closed: false,
            })),
        );
        Ok(SessionInfo {
            session_id,
            video_id: video_id.to_string(),
            annotator_id: annotator.to_string(),
            phi_c,
            pass,
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| AnnotateError::UnknownSession(id.to_string()))
    }

    /// Appends a batch; the whole batch is rejected if any sample is invalid
    /// or timestamps do not strictly increase past the buffer's end.
    /// Returns the buffer length.
    pub fn record_samples(&self, session_id: &str, batch: &[Sample]) -> Result<usize> {
        let session = self.session(session_id)?;
        let mut s = session.lock().expect("lock");
        if s.closed {
            return Err(AnnotateError::SessionClosed(session_id.to_string()));
        }
        let mut last = s.samples.last().map(|p| p.0).unwrap_or(f64::NEG_INFINITY);
        let mut parsed = Vec::with_capacity(batch.len());
        for (i, sample) in batch.iter().enumerate() {
            if !sample.timestamp.is_finite() || sample.timestamp <= last {
                return Err(AnnotateError::Invalid(format!(
                    "sample {i}: timestamp {} does not follow {last}",
                    sample.timestamp
                )));
            }
            last = sample.timestamp;
            let dir = Direction::new(sample.theta, sample.phi)
                .map_err(|e| AnnotateError::Invalid(format!("sample {i}: {e}")))?;
            parsed.push((sample.timestamp, dir));
        }
        s.samples.extend(parsed);
        Ok(s.samples.len())
    }

    /// Resamples the session's samples to one direction per output frame,
    /// writes the trajectory file and closes the session.
    pub fn finalize(&self, session_id: &str, fps: f64) -> Result<Finalized> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(AnnotateError::Invalid(format!("fps must be positive, got {fps}")));
        }
        let session = self.session(session_id)?;
        let mut s = session.lock().expect("lock");
        if s.closed {
            return Err(AnnotateError::SessionClosed(session_id.to_string()));
        }
        let duration = self.video(&s.video_id)?.meta().duration();
        if s.samples.len() < 2 {
            return Err(AnnotateError::Invalid(format!(
                "need at least 2 samples, have {}",
                s.samples.len()
            )));
        }
        let (first, last) = (s.samples[0].0, s.samples[s.samples.len() - 1].0);
        if first > COVERAGE_TOLERANCE || last < duration - COVERAGE_TOLERANCE {
            return Err(AnnotateError::InsufficientCoverage { first, last, duration });
        }
        let n = ((duration * fps).round() as usize).max(1);
        let directions = (0..n)
            .map(|i| direction_at_time(&s.samples, (i as f64 + 0.5) / fps))
            .collect();
        let traj = ContinuousTrajectory::new(fps, directions)?;
        let mut doc = TrajectoryDoc::from_continuous(&s.video_id, &traj);
        doc.annotator = Some(s.annotator.clone());
        let path = self.output_path(&s.video_id, &s.annotator, s.pass);
        write_atomic(&path, &doc)?;
        s.closed = true;
        log::info!(
            "finalized {} ({} frames, center longitude {})",
            path.display(),
            n,
            s.phi_c
        );
        Ok(Finalized { path, frames: n })
    }
}

/// Writes to a sibling temporary file and renames it into place, so a crash
/// never leaves a partial trajectory behind.
fn write_atomic(path: &Path, doc: &TrajectoryDoc) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    write_trajectories(&tmp, std::slice::from_ref(doc))?;
    fs::rename(&tmp, path).map_err(|e| AnnotateError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Linear interpolation between the two samples around `time`: latitude
/// linearly, longitude along the shorter arc. Held constant outside the
/// sampled range.
pub fn direction_at_time(samples: &[(f64, Direction)], time: f64) -> Direction {
    let i = samples.partition_point(|s| s.0 <= time);
    if i == 0 {
        return samples[0].1;
    }
    if i == samples.len() {
        return samples[i - 1].1;
    }
    let ((t0, a), (t1, b)) = (samples[i - 1], samples[i]);
    let s = (time - t0) / (t1 - t0);
    if s == 0.0 {
        return a;
    }
    Direction::clamped(
        a.theta() + s * (b.theta() - a.theta()),
        a.phi() + s * signed_longitude_delta(a.phi(), b.phi()),
    )
}
