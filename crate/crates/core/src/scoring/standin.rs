//! A cheap hand-written glimpse scorer for runs without learned features.
//!
//! This is not a capture-worthiness model. It squashes two low-level
//! energies of an NFOV clip through a logistic:
//!
//! `score = sigmoid(α·contrast + β·motion)`
//!
//! where `contrast` is the per-frame standard deviation of luminance averaged
//! over frames and `motion` is the mean absolute luminance change between
//! consecutive frames. With non-negative weights a featureless clip scores
//! exactly 0.5, the bottom of the range. The same scorer doubles as a
//! saliency-style baseline when fed through the trajectory solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigmoid, ScoreMap};
use crate::error::{Error, Result};
use crate::geom::CameraModel;
use crate::grid::{frames_in_span, GlimpseGrid};
use crate::raster::{FrameSource, Raster};
use crate::render::render_frame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandinScorer {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for StandinScorer {
    fn default() -> Self {
        StandinScorer {
            alpha: 10.0,
            beta: 20.0,
        }
    }
}

fn luminance(frame: &Raster) -> Vec<f64> {
    let mut out = Vec::with_capacity(frame.width() as usize * frame.height() as usize);
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            out.push(frame.luminance(x, y) as f64);
        }
    }
    out
}

impl StandinScorer {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stand-in weights must be finite and non-negative, got {alpha}, {beta}"
            )));
        }
        Ok(StandinScorer { alpha, beta })
    }

    /// `(contrast, motion)` energies of a clip.
    pub fn energies(clip: &[Raster]) -> Result<(f64, f64)> {
        if clip.is_empty() || clip.iter().any(Raster::is_empty) {
            return Err(Error::Empty("clip"));
        }
        let lum: Vec<Vec<f64>> = clip.iter().map(luminance).collect();
        let contrast = lum
            .iter()
            .map(|l| {
                let n = l.len() as f64;
                let mean = l.iter().sum::<f64>() / n;
                (l.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
            })
            .sum::<f64>()
            / lum.len() as f64;
        let motion = if lum.len() < 2 {
            0.0
        } else {
            lum.windows(2)
                .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>() / w[0].len() as f64)
                .sum::<f64>()
                / (lum.len() - 1) as f64
        };
        Ok((contrast, motion))
    }

    pub fn score(&self, clip: &[Raster]) -> Result<f64> {
        let (contrast, motion) = Self::energies(clip)?;
        Ok(sigmoid(self.alpha * contrast + self.beta * motion))
    }
}

/// Scores a clip with the default weights.
pub fn standin_score(clip: &[Raster]) -> Result<f64> {
    StandinScorer::default().score(clip)
}

/// Scores every glimpse of a video by rendering its clip, keeping every
/// `frame_stride`-th source frame of each step.
pub fn standin_score_map(
    video_id: &str,
    frames: &dyn FrameSource,
    grid: &GlimpseGrid,
    cam: &CameraModel,
    scorer: &StandinScorer,
    frame_stride: usize,
) -> Result<ScoreMap> {
    let meta = frames.meta();
    let stride = frame_stride.max(1);
    let scores = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let g = grid.glimpse(i).expect("in range");
            let (start, end) = grid.step_span(g.t);
            let span = frames_in_span(start, end, meta.fps);
            if span.is_empty() || span.end > meta.frame_count {
                return Err(Error::IncompleteSpan {
                    required: span.end,
                    available: meta.frame_count,
                });
            }
            let clip = span
                .step_by(stride)
                .map(|f| render_frame(&frames.frame(f)?, cam, g.dir))
                .collect::<Result<Vec<_>>>()?;
            scorer.score(&clip)
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreMap::new(video_id, grid.clone(), scores)
}
