//! Classifier-based comparisons of generated and human-captured videos,
//! computed on per-video feature vectors.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{train_logistic, FeatureRecord, FeatureSet, Label, TrainOptions, WorthinessModel};

pub const DEFAULT_FOLDS: usize = 5;

fn fit(pos: &[&FeatureRecord], neg: &[&FeatureRecord]) -> Result<WorthinessModel> {
    let rows: Vec<&[f64]> = pos.iter().chain(neg).map(|r| r.vector.as_slice()).collect();
    let labels: Vec<bool> = (0..pos.len() + neg.len()).map(|i| i < pos.len()).collect();
    Ok(train_logistic(&rows, &labels, TrainOptions::default())?.model)
}

fn check_dims(a: &FeatureSet, b: &FeatureSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::FeatureSet(format!("feature dims differ: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

fn all_but<'a>(sets: &[Vec<&'a FeatureRecord>], skip: usize) -> Vec<&'a FeatureRecord> {
    sets.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .flat_map(|(_, s)| s.iter().copied())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinguishability {
    /// Mean test error over folds.
    pub error_rate: f64,
    pub fold_errors: Vec<f64>,
}

/// Splits generated clips into `folds` groups of whole videos, balancing
/// group sizes greedily (largest video first into the smallest fold).
fn grouped_folds<'a>(gen: &'a FeatureSet, folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<&'a FeatureRecord>>> {
    let mut by_video: BTreeMap<&str, Vec<&FeatureRecord>> = BTreeMap::new();
    for r in gen.records() {
        by_video.entry(r.video_id.as_str()).or_default().push(r);
    }
    if by_video.len() < folds {
        return Err(Error::TooFewGroups {
            folds,
            found: by_video.len(),
        });
    }
    let mut groups: Vec<Vec<&FeatureRecord>> = by_video.into_values().collect();
    groups.shuffle(rng);
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
    let mut out: Vec<Vec<&FeatureRecord>> = vec![Vec::new(); folds];
    for g in groups {
        let smallest = (0..folds).min_by_key(|&i| out[i].len()).expect("folds > 0");
        out[smallest].extend(g);
    }
    Ok(out)
}

/// Cross-validated error of a logistic classifier telling generated clips
/// (negatives) from human ones (positives). Generated clips of one 360°
/// video never appear in both the training and test side of a fold; human
/// clips are split at random. Higher error means the generator is harder to
/// tell apart from humans.
pub fn distinguishability(gen: &FeatureSet, human: &FeatureSet, folds: usize, seed: u64) -> Result<Distinguishability> {
    check_dims(gen, human)?;
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    if human.len() < folds {
        return Err(Error::InvalidParameter(format!(
            "{} human clips cannot fill {folds} folds",
            human.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neg_folds = grouped_folds(gen, folds, &mut rng)?;
    let mut humans: Vec<&FeatureRecord> = human.records().iter().collect();
    humans.shuffle(&mut rng);
    let pos_folds: Vec<Vec<&FeatureRecord>> = (0..folds)
        .map(|f| humans.iter().skip(f).step_by(folds).copied().collect())
        .collect();

    let fold_errors = (0..folds)
        .into_par_iter()
        .map(|f| {
            let model = fit(&all_but(&pos_folds, f), &all_but(&neg_folds, f))?;
            let wrong = pos_folds[f].iter().filter(|r| !model.predict(&r.vector)).count()
                + neg_folds[f].iter().filter(|r| model.predict(&r.vector)).count();
            Ok(wrong as f64 / (pos_folds[f].len() + neg_folds[f].len()) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Distinguishability {
        error_rate: fold_errors.iter().sum::<f64>() / folds as f64,
        fold_errors,
    })
}

/// Mean normalized ranks; 0 is the most human-like clip of a video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Likeness {
    pub per_method: BTreeMap<String, f64>,
    /// video → method → mean normalized rank of that method's clips.
    pub per_video: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Ranks 1..=n by descending key, ties sharing their average rank.
fn average_ranks(keys: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    let mut ranks = vec![0.0; keys.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && keys[order[j + 1]] == keys[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Leave-one-video-out HumanCam-likeness. For each 360° video, a classifier
/// trained on human clips against the generated clips of all other videos
/// ranks that video's clips from every method by decision value. Each
/// method gets the mean of its clips' normalized ranks `(r − 1)/(n − 1)`,
/// averaged over videos; lower is more human-like.
pub fn humancam_likeness(per_method: &BTreeMap<String, FeatureSet>, human: &FeatureSet) -> Result<Likeness> {
    if per_method.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "likeness ranks at least 2 methods, got {}",
            per_method.len()
        )));
    }
    for set in per_method.values() {
        check_dims(set, human)?;
    }
    if human.is_empty() {
        return Err(Error::Empty("human clips"));
    }
    let videos: BTreeSet<&str> = per_method.values().flat_map(|s| s.video_ids()).collect();
    if videos.len() < 2 {
        return Err(Error::TooFewGroups { folds: 2, found: videos.len() });
    }
    for (method, set) in per_method {
        for v in videos.iter().filter(|v| !set.video_ids().contains(*v)) {
            log::warn!("method {method} has no clips for video {v}; skipped");
        }
    }
    let humans: Vec<&FeatureRecord> = human.records().iter().collect();

    let per_video = videos
        .par_iter()
        .map(|&video| {
            let train_neg: Vec<&FeatureRecord> = per_method
                .values()
                .flat_map(|s| s.records())
                .filter(|r| r.video_id != video)
                .collect();
            let model = fit(&humans, &train_neg)?;
            let mut owners = Vec::new();
            let mut keys = Vec::new();
            for (method, set) in per_method {
                for r in set.records().iter().filter(|r| r.video_id == video) {
                    owners.push(method.as_str());
                    keys.push(model.decision(&r.vector));
                }
            }
            let ranks = average_ranks(&keys);
            let n = ranks.len();
            let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
            for (m, r) in owners.iter().zip(ranks) {
                let norm = if n > 1 { (r - 1.0) / (n - 1) as f64 } else { 0.0 };
                let e = sums.entry(m.to_string()).or_default();
                e.0 += norm;
                e.1 += 1;
            }
            Ok((
                video.to_string(),
                sums.into_iter().map(|(m, (s, c))| (m, s / c as f64)).collect::<BTreeMap<_, _>>(),
            ))
        })
        .collect::<Result<BTreeMap<String, BTreeMap<String, f64>>>>()?;

    let mut per_method_out = BTreeMap::new();
    for method in per_method.keys() {
        let vals: Vec<f64> = per_video.values().filter_map(|m| m.get(method).copied()).collect();
        if vals.is_empty() {
            log::warn!("method {method} has no ranked clips");
            continue;
        }
        per_method_out.insert(method.clone(), vals.iter().sum::<f64>() / vals.len() as f64);
    }
    Ok(Likeness {
        per_method: per_method_out,
        per_video,
    })
}

/// One-vs-rest multi-class logistic model.
#[derive(Debug, Clone)]
pub struct OneVsRest {
    pub classes: Vec<Label>,
    pub models: Vec<WorthinessModel>,
}

impl OneVsRest {
    pub fn train(data: &FeatureSet) -> Result<Self> {
        let classes: Vec<Label> = data.labels().into_iter().cloned().collect();
        if classes.len() < 2 {
            return Err(Error::DegenerateData(format!("{} class label(s)", classes.len())));
        }
        let rows = data.vectors();
        let models = classes
            .par_iter()
            .map(|c| {
                let labels: Vec<bool> = data.records().iter().map(|r| &r.label == c).collect();
                Ok(train_logistic(&rows, &labels, TrainOptions::default())?.model)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OneVsRest { classes, models })
    }

    /// Class with the largest decision value; ties go to the earlier class.
    pub fn predict(&self, x: &[f64]) -> &Label {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, m) in self.models.iter().enumerate() {
            let v = m.decision(x);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        &self.classes[best]
    }

    pub fn accuracy(&self, data: &FeatureSet) -> f64 {
        let hits = data.records().iter().filter(|r| self.predict(&r.vector) == &r.label).count();
        hits as f64 / data.len() as f64
    }
}

/// Accuracy on `target` of a multi-class classifier trained on `source`.
pub fn transferability(source: &FeatureSet, target: &FeatureSet) -> Result<f64> {
    check_dims(source, target)?;
    if target.is_empty() {
        return Err(Error::Empty("target clips"));
    }
    let (src, tgt) = (source.labels(), target.labels());
    if src != tgt {
        return Err(Error::LabelMismatch {
            source_labels: src.iter().map(|l| l.as_str().to_string()).collect(),
            target_labels: tgt.iter().map(|l| l.as_str().to_string()).collect(),
        });
    }
    Ok(OneVsRest::train(source)?.accuracy(target))
}
