//! Scoring trajectories against human-edited ones, and the agreement of the
//! human editors among themselves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::report::{MetricReport, ReportRow};
use super::similarity::{pool, resample, Pooling, SimilarityMeasure};
use crate::error::{Error, Result};
use crate::geom::NFOV_HFOV_DEG;
use crate::trajectory::ContinuousTrajectory;

pub const HUMANEDIT_COLUMNS: [&str; 4] = ["cosine/traj", "cosine/frame", "overlap/traj", "overlap/frame"];

/// Frame rate trajectories are resampled to before comparison.
pub const DEFAULT_COMPARISON_FPS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanEditConfig {
    pub fps: f64,
    pub fov: f64,
}

impl Default for HumanEditConfig {
    fn default() -> Self {
        HumanEditConfig {
            fps: DEFAULT_COMPARISON_FPS,
            fov: NFOV_HFOV_DEG,
        }
    }
}

/// Cosine and overlap similarity under trajectory and frame pooling, in
/// [`HUMANEDIT_COLUMNS`] order.
pub type HumanEditScores = [f64; 4];

/// One human-edited trajectory.
#[derive(Debug, Clone)]
pub struct HumanAnnotation {
    pub video_id: String,
    pub annotator: String,
    pub trajectory: ContinuousTrajectory,
}

/// Per-video and overall HumanEdit scores of one trajectory source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanEditSummary {
    pub per_video: BTreeMap<String, HumanEditScores>,
    pub mean: HumanEditScores,
    pub trajectories: usize,
}

fn mean_scores(rows: &[HumanEditScores]) -> HumanEditScores {
    let mut out = [0.0; 4];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out.map(|v| v / rows.len() as f64)
}

/// All four HumanEdit scores of `generated` against `references`, after
/// resampling everything to `cfg.fps`.
pub fn humanedit_scores(
    generated: &ContinuousTrajectory,
    references: &[ContinuousTrajectory],
    cfg: &HumanEditConfig,
) -> Result<HumanEditScores> {
    let gen = resample(generated, cfg.fps)?;
    let refs = references
        .iter()
        .map(|r| resample(r, cfg.fps))
        .collect::<Result<Vec<_>>>()?;
    let cos = SimilarityMeasure::cosine();
    let ov = SimilarityMeasure::overlap(cfg.fov)?;
    Ok([
        pool(&gen, &refs, &cos, Pooling::Trajectory)?,
        pool(&gen, &refs, &cos, Pooling::Frame)?,
        pool(&gen, &refs, &ov, Pooling::Trajectory)?,
        pool(&gen, &refs, &ov, Pooling::Frame)?,
    ])
}

/// Scores every generated trajectory against the human edits of its video.
/// A video's score averages its trajectories; the overall score averages
/// videos. Videos without human edits are skipped.
pub fn evaluate_humanedit(
    generated: &BTreeMap<String, Vec<ContinuousTrajectory>>,
    humans: &BTreeMap<String, Vec<ContinuousTrajectory>>,
    cfg: &HumanEditConfig,
) -> Result<HumanEditSummary> {
    let mut per_video = BTreeMap::new();
    let mut count = 0;
    for (video, trajs) in generated {
        let refs = match humans.get(video) {
            Some(r) if !r.is_empty() => r,
            _ => {
                log::warn!("no human edits for video {video}; skipped");
                continue;
            }
        };
        if trajs.is_empty() {
            continue;
        }
        let rows = trajs
            .iter()
            .map(|t| humanedit_scores(t, refs, cfg))
            .collect::<Result<Vec<_>>>()?;
        count += rows.len();
        per_video.insert(video.clone(), mean_scores(&rows));
    }
    if per_video.is_empty() {
        return Err(Error::Empty("videos with both generated and human trajectories"));
    }
    let mean = mean_scores(&per_video.values().copied().collect::<Vec<_>>());
    Ok(HumanEditSummary {
        per_video,
        mean,
        trajectories: count,
    })
}

/// Agreement between annotators: each trajectory is pooled against the
/// trajectories other annotators made for the same video. An annotator's
/// own trajectories are never compared with each other. The overall score
/// averages all trajectories that had at least one reference.
pub fn consistency_report(annotations: &[HumanAnnotation], cfg: &HumanEditConfig) -> Result<HumanEditSummary> {
    let annotators: BTreeSet<&str> = annotations.iter().map(|a| a.annotator.as_str()).collect();
    if annotators.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "consistency needs at least 2 annotators, found {}",
            annotators.len()
        )));
    }
    let mut by_video: BTreeMap<&str, Vec<&HumanAnnotation>> = BTreeMap::new();
    for a in annotations {
        by_video.entry(a.video_id.as_str()).or_default().push(a);
    }
    let mut per_video = BTreeMap::new();
    let mut all = Vec::new();
    for (video, group) in by_video {
        let mut rows = Vec::new();
        for a in &group {
            let refs: Vec<ContinuousTrajectory> = group
                .iter()
                .filter(|b| b.annotator != a.annotator)
                .map(|b| b.trajectory.clone())
                .collect();
            if refs.is_empty() {
                continue;
            }
            rows.push(humanedit_scores(&a.trajectory, &refs, cfg)?);
        }
        if rows.is_empty() {
            log::warn!("video {video} has a single annotator; skipped");
            continue;
        }
        per_video.insert(video.to_string(), mean_scores(&rows));
        all.extend(rows);
    }
    if all.is_empty() {
        return Err(Error::Empty("videos annotated by more than one annotator"));
    }
    Ok(HumanEditSummary {
        per_video,
        mean: mean_scores(&all),
        trajectories: all.len(),
    })
}

/// One report row per method, HumanEdit columns.
pub fn humanedit_report(title: &str, methods: &BTreeMap<String, HumanEditSummary>) -> MetricReport {
    MetricReport {
        title: title.to_string(),
        columns: HUMANEDIT_COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows: methods
            .iter()
            .map(|(name, s)| ReportRow {
                name: name.clone(),
                values: s.mean.to_vec(),
                per_video: s.per_video.iter().map(|(v, s)| (v.clone(), s.to_vec())).collect(),
            })
            .collect(),
    }
}
