//! Capture-worthiness scores for every glimpse of a 360° video.
//!
//! Scores come from one of three places: a score file produced elsewhere, a
//! logistic model over ingested clip features, or the built-in
//! [`standin`] scorer. Whatever the source, the result is a [`ScoreMap`].

mod analysis;
mod features;
mod logistic;
pub mod standin;

pub use standin::{standin_score, standin_score_map, StandinScorer};

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GlimpseGrid, StGlimpse};

pub use analysis::{analyze_scores, AxisFractions, HistogramBin, ScoreDistribution};
pub use features::{
    assemble_training_set, glimpse_key, parse_glimpse_key, FeatureRecord, FeatureSet, Label,
};
pub use logistic::{
    data_loss, sigmoid, train_logistic, TrainOptions, TrainReport, WorthinessModel, DEFAULT_C,
};

/// Values this far outside `[0, 1]` are clamped with a warning; anything
/// further is rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// One score in `[0, 1]` per lattice cell, indexed like [`GlimpseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    video_id: String,
    grid: GlimpseGrid,
    scores: Vec<f64>,
}

impl ScoreMap {
    /// Builds a map from scores in grid enumeration order.
    pub fn new(video_id: impl Into<String>, grid: GlimpseGrid, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != grid.len() {
            return Err(Error::ScoreMap(format!(
                "{} scores for a lattice of {} cells",
                scores.len(),
                grid.len()
            )));
        }
        if let Some((i, v)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::ScoreMap(format!("cell {i} has score {v} outside [0, 1]")));
        }
        Ok(ScoreMap {
            video_id: video_id.into(),
            grid,
            scores,
        })
    }

    /// Builds a map from scores computed per glimpse.
    pub fn from_fn(video_id: impl Into<String>, grid: GlimpseGrid, mut f: impl FnMut(&StGlimpse) -> f64) -> Result<Self> {
        let scores = grid.glimpses().map(|g| f(&g)).collect();
        ScoreMap::new(video_id, grid, scores)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn grid(&self) -> &GlimpseGrid {
        &self.grid
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn num_steps(&self) -> usize {
        self.grid.num_steps()
    }

    /// Scores of all spatial cells at step `t`.
    pub fn step(&self, t: usize) -> &[f64] {
        let n = self.grid.cells_per_step();
        &self.scores[t * n..(t + 1) * n]
    }

    pub fn get(&self, t: usize, cell: usize) -> f64 {
        self.scores[t * self.grid.cells_per_step() + cell]
    }

    pub fn score_of(&self, g: &StGlimpse) -> Option<f64> {
        self.grid.linear_index(g).map(|i| self.scores[i])
    }

    pub fn to_doc(&self) -> ScoreMapDoc {
        let (nlat, nlon) = (self.grid.latitudes().len(), self.grid.longitudes().len());
        ScoreMapDoc {
            video_id: self.video_id.clone(),
            interval_seconds: self.grid.interval(),
            latitudes: self.grid.latitudes().to_vec(),
            longitudes: self.grid.longitudes().to_vec(),
            scores: (0..self.num_steps())
                .map(|t| (0..nlat).map(|i| self.step(t)[i * nlon..(i + 1) * nlon].to_vec()).collect())
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_doc()).map_err(|e| Error::json(path, e))?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Score file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMapDoc {
    pub video_id: String,
    pub interval_seconds: f64,
    pub latitudes: Vec<f64>,
    pub longitudes: Vec<f64>,
    /// Indexed `[t][latitude index][longitude index]`.
    pub scores: Vec<Vec<Vec<f64>>>,
}

impl ScoreMapDoc {
    /// Validates the document, optionally against an expected lattice.
    pub fn into_score_map(self, expected: Option<&GlimpseGrid>) -> Result<ScoreMap> {
        if self.scores.is_empty() {
            return Err(Error::ScoreMap("no time steps".into()));
        }
        let grid = GlimpseGrid::new(self.latitudes, self.longitudes, self.interval_seconds, self.scores.len())?;
        if let Some(g) = expected {
            if g != &grid {
                return Err(Error::ScoreMap(format!(
                    "lattice mismatch: file has {} steps of {}x{} cells every {}s, expected {} steps of {}x{} every {}s",
                    grid.num_steps(),
                    grid.latitudes().len(),
                    grid.longitudes().len(),
                    grid.interval(),
                    g.num_steps(),
                    g.latitudes().len(),
                    g.longitudes().len(),
                    g.interval()
                )));
            }
        }
        let (nlat, nlon) = (grid.latitudes().len(), grid.longitudes().len());
        let mut flat = Vec::with_capacity(grid.len());
        for (t, step) in self.scores.iter().enumerate() {
            if step.len() != nlat || step.iter().any(|row| row.len() != nlon) {
                return Err(Error::ScoreMap(format!(
                    "step {t}: missing cells (expected {nlat} rows of {nlon})"
                )));
            }
            for (i, row) in step.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    flat.push(clamp_score(v).map_err(|e| {
                        Error::ScoreMap(format!("cell t={t} lat={} lon={}: {e}", grid.latitudes()[i], grid.longitudes()[j]))
                    })?);
                }
            }
        }
        ScoreMap::new(self.video_id, grid, flat)
    }
}

fn clamp_score(v: f64) -> std::result::Result<f64, String> {
    if !v.is_finite() {
        return Err(format!("non-finite score {v}"));
    }
    if (0.0..=1.0).contains(&v) {
        return Ok(v);
    }
    if v >= -CLAMP_TOLERANCE && v <= 1.0 + CLAMP_TOLERANCE {
        warn!("score {v} clamped to [0, 1]");
        return Ok(v.clamp(0.0, 1.0));
    }
    Err(format!("score {v} outside [0, 1]"))
}

/// Reads a score file, checking it against `grid` when given.
pub fn load_score_map(path: &Path, grid: Option<&GlimpseGrid>) -> Result<ScoreMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ScoreMapDoc = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    doc.into_score_map(grid)
}

/// Trains a capture-worthiness classifier: positives against negatives.
pub fn train_worthiness(data: &FeatureSet, c: f64) -> Result<TrainReport> {
    let mut labels = Vec::with_capacity(data.len());
    for r in data.records() {
        labels.push(match r.label {
            Label::Positive => true,
            Label::Negative => false,
            Label::Class(ref name) => {
                return Err(Error::FeatureSet(format!(
                    "record {} has class label {name:?}, expected positive/negative",
                    r.id
                )))
            }
        });
    }
    train_logistic(
        &data.vectors(),
        &labels,
        TrainOptions {
            c,
            ..TrainOptions::default()
        },
    )
}

/// Scores each lattice cell with the model's positive-class probability.
///
/// Records are matched to cells through their [`glimpse_key`] ids, so their
/// order does not matter. Records for steps past the end of the lattice (a
/// dropped partial interval) are ignored.
pub fn score_glimpses(model: &WorthinessModel, glimpse_features: &FeatureSet, grid: &GlimpseGrid) -> Result<ScoreMap> {
    if glimpse_features.dim() != model.dim() {
        return Err(Error::FeatureSet(format!(
            "features have dim {}, model expects {}",
            glimpse_features.dim(),
            model.dim()
        )));
    }
    let videos = glimpse_features.video_ids();
    if videos.len() > 1 {
        return Err(Error::FeatureSet(format!("glimpse features span several videos: {videos:?}")));
    }
    let video_id = videos.into_iter().next().unwrap_or_default().to_string();
    let mut scores: Vec<Option<f64>> = vec![None; grid.len()];
    for r in glimpse_features.records() {
        let g = parse_glimpse_key(&r.id)
            .ok_or_else(|| Error::FeatureSet(format!("record id {:?} is not a glimpse key", r.id)))?;
        if g.t >= grid.num_steps() {
            continue;
        }
        let idx = grid
            .linear_index(&g)
            .ok_or_else(|| Error::FeatureSet(format!("glimpse {} is not on the lattice", r.id)))?;
        if scores[idx].replace(model.predict_proba(&r.vector)).is_some() {
            return Err(Error::FeatureSet(format!("duplicate features for glimpse {}", r.id)));
        }
    }
    let scores = scores
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::MissingCell(glimpse_key(&grid.glimpse(i).expect("in range")))))
        .collect::<Result<Vec<_>>>()?;
    ScoreMap::new(video_id, grid.clone(), scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GlimpseGrid;

    fn doc(steps: usize) -> ScoreMapDoc {
        let g = GlimpseGrid::with_defaults(steps).unwrap();
        ScoreMap::from_fn("v", g, |gl| (gl.t as f64 * 0.1 + gl.dir.phi() / 1000.0).min(1.0))
            .unwrap()
            .to_doc()
    }

    #[test]
    fn loads_full_map() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let grid = GlimpseGrid::with_defaults(2).unwrap();
        let m = doc(2).into_score_map(Some(&grid)).unwrap();
        m.save(&path).unwrap();
        let back = load_score_map(&path, Some(&grid)).unwrap();
        assert_eq!(back.scores().len(), 396);
        assert_eq!(back, m);
        assert!(load_score_map(&path, Some(&GlimpseGrid::with_defaults(3).unwrap())).is_err());
    }

    #[test]
    fn missing_cell_is_an_error() {
        let mut d = doc(2);
        d.scores[1][4].pop();
        assert!(d.into_score_map(None).is_err());
    }

    #[test]
    fn near_range_values_are_clamped() {
        let mut d = doc(1);
        d.scores[0][0][0] = 1.0000003;
        d.scores[0][0][1] = -4e-7;
        let m = d.into_score_map(None).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
        let mut d = doc(1);
        d.scores[0][0][0] = 1.01;
        assert!(d.into_score_map(None).is_err());
        let mut d = doc(1);
        d.scores[0][3][0] = f64::NAN;
        assert!(d.into_score_map(None).is_err());
    }

    fn cell_features(grid: &GlimpseGrid) -> FeatureSet {
        let records = grid
            .glimpses()
            .map(|g| FeatureRecord {
                id: glimpse_key(&g),
                video_id: "v".into(),
                label: Label::Negative,
                vector: vec![g.dir.theta() / 90.0, (g.dir.phi() / 360.0) - 0.5],
            })
            .collect();
        FeatureSet::new(2, records).unwrap()
    }

    #[test]
    fn zero_model_scores_one_half() {
        let grid = GlimpseGrid::with_defaults(2).unwrap();
        let m = score_glimpses(&WorthinessModel::zeros(2, 1.0), &cell_features(&grid), &grid).unwrap();
        assert!(m.scores().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn large_margin_saturates() {
        let grid = GlimpseGrid::with_defaults(1).unwrap();
        let model = WorthinessModel {
            weights: vec![0.0, 0.0],
            bias: 800.0,
            c: 1.0,
        };
        let m = score_glimpses(&model, &cell_features(&grid), &grid).unwrap();
        assert!(m.scores().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn record_order_does_not_matter() {
        let grid = GlimpseGrid::with_defaults(2).unwrap();
        let feats = cell_features(&grid);
        let model = WorthinessModel {
            weights: vec![1.5, -2.0],
            bias: 0.1,
            c: 1.0,
        };
        let mut rev = feats.clone().into_records();
        rev.reverse();
        let rev = FeatureSet::new(2, rev).unwrap();
        assert_eq!(
            score_glimpses(&model, &feats, &grid).unwrap(),
            score_glimpses(&model, &rev, &grid).unwrap()
        );
    }

    #[test]
    fn missing_and_duplicate_cells() {
        let grid = GlimpseGrid::with_defaults(1).unwrap();
        let model = WorthinessModel::zeros(2, 1.0);
        let feats = cell_features(&grid);
        let fewer = FeatureSet::new(2, feats.records()[1..].to_vec()).unwrap();
        assert!(matches!(score_glimpses(&model, &fewer, &grid), Err(Error::MissingCell(_))));
        let mut dup = feats.records().to_vec();
        dup.push(dup[0].clone());
        let dup = FeatureSet::new(2, dup).unwrap();
        assert!(score_glimpses(&model, &dup, &grid).is_err());
        // Features of a dropped tail step are ignored.
        let longer = cell_features(&GlimpseGrid::with_defaults(2).unwrap());
        assert_eq!(score_glimpses(&model, &longer, &grid).unwrap().scores().len(), 198);
    }

    #[test]
    fn scores_agree_with_training_predictions() {
        let grid = GlimpseGrid::with_defaults(1).unwrap();
        let mut feats = cell_features(&grid).into_records();
        for r in feats.iter_mut() {
            if r.vector[0] > 0.0 {
                r.label = Label::Positive;
            }
        }
        let feats = FeatureSet::new(2, feats).unwrap();
        let model = train_worthiness(&feats, 1.0).unwrap().model;
        let map = score_glimpses(&model, &feats, &grid).unwrap();
        for r in feats.records() {
            let g = parse_glimpse_key(&r.id).unwrap();
            assert_eq!(map.score_of(&g).unwrap(), model.predict_proba(&r.vector));
        }
    }

    #[test]
    fn class_labels_are_rejected_for_worthiness() {
        let feats = FeatureSet::new(
            1,
            vec![
                FeatureRecord { id: "a".into(), video_id: "v".into(), label: Label::Class("x".into()), vector: vec![1.0] },
                FeatureRecord { id: "b".into(), video_id: "v".into(), label: Label::Negative, vector: vec![0.0] },
            ],
        )
        .unwrap();
        assert!(train_worthiness(&feats, 1.0).is_err());
    }
}
