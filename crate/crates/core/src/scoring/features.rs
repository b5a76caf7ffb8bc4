//! Labeled feature vectors and their text file format.
//!
//! ```text
//! #dim=4
//! clip-0001,video-a,positive,0.1,0.2,0.3,0.4
//! 3:-10:340,video-b,negative,0.5,0.1,0.0,0.9
//! ```
//!
//! The header declares the vector length. Each record is `id,video_id,label`
//! followed by exactly that many reals. Labels are `positive`, `negative` or
//! any other token, which is read as a class name. Glimpse records use the
//! [`glimpse_key`] format as their id.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Direction;
use crate::grid::StGlimpse;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Positive,
    Negative,
    Class(String),
}

impl Label {
    pub fn parse(s: &str) -> Self {
        match s {
            "positive" => Label::Positive,
            "negative" => Label::Negative,
            other => Label::Class(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Class(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub id: String,
    pub video_id: String,
    pub label: Label,
    pub vector: Vec<f64>,
}

/// Records sharing one vector length.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    records: Vec<FeatureRecord>,
}

impl FeatureSet {
    pub fn new(dim: usize, records: Vec<FeatureRecord>) -> Result<Self> {
        for r in &records {
            if r.vector.len() != dim {
                return Err(Error::FeatureSet(format!(
                    "record {} has {} values, expected {dim}",
                    r.id,
                    r.vector.len()
                )));
            }
            if r.video_id.is_empty() {
                return Err(Error::FeatureSet(format!("record {} has no video id", r.id)));
            }
            if r.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::FeatureSet(format!("record {} has non-finite values", r.id)));
            }
        }
        Ok(FeatureSet { dim, records })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<FeatureRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn vectors(&self) -> Vec<&[f64]> {
        self.records.iter().map(|r| r.vector.as_slice()).collect()
    }

    pub fn video_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.video_id.as_str()).collect()
    }

    pub fn labels(&self) -> BTreeSet<&Label> {
        self.records.iter().map(|r| &r.label).collect()
    }

    /// A copy keeping only the records matching `keep`.
    pub fn filtered(&self, keep: impl Fn(&FeatureRecord) -> bool) -> FeatureSet {
        FeatureSet {
            dim: self.dim,
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::FeatureSet("missing header line".into()))?;
        let dim: usize = header
            .trim()
            .strip_prefix("#dim=")
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| Error::FeatureSet(format!("bad header {header:?}, expected #dim=<D>")))?;
        let mut records = Vec::new();
        for (lineno, line) in lines {
            let mut fields = line.split(',').map(str::trim);
            let mut next = |what: &str| {
                fields
                    .next()
                    .filter(|f| !f.is_empty())
                    .map(str::to_string)
                    .ok_or_else(|| Error::FeatureSet(format!("line {}: missing {what}", lineno + 1)))
            };
            let id = next("id")?;
            let video_id = next("video_id")?;
            let label = Label::parse(&next("label")?);
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::FeatureSet(format!("line {}: bad value {f:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if vector.len() != dim {
                return Err(Error::FeatureSet(format!(
                    "line {}: {} values, header declares {dim}",
                    lineno + 1,
                    vector.len()
                )));
            }
            records.push(FeatureRecord {
                id,
                video_id,
                label,
                vector,
            });
        }
        FeatureSet::new(dim, records)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#dim={}\n", self.dim);
        for r in &self.records {
            let _ = write!(out, "{},{},{}", r.id, r.video_id, r.label.as_str());
            for v in &r.vector {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FeatureSet::parse(&text).map_err(|e| Error::FeatureSet(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Record id of a glimpse: `t:theta:phi`, e.g. `3:-10:340`.
pub fn glimpse_key(g: &StGlimpse) -> String {
    format!("{}:{}:{}", g.t, g.dir.theta(), g.dir.phi())
}

pub fn parse_glimpse_key(key: &str) -> Option<StGlimpse> {
    let mut it = key.split(':');
    let t = it.next()?.parse().ok()?;
    let theta = it.next()?.parse().ok()?;
    let phi = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(StGlimpse {
        t,
        dir: Direction::new(theta, phi).ok()?,
    })
}

/// Training set for the classifier of one held-out 360° video.
///
/// Every HumanCam record is a positive. Negatives are drawn uniformly
/// without replacement from the glimpses of the other 360° videos, twice as
/// many as there are positives.
pub fn assemble_training_set(
    humancam: &FeatureSet,
    glimpses: &FeatureSet,
    heldout_video: &str,
    seed: u64,
) -> Result<FeatureSet> {
    if humancam.dim() != glimpses.dim() {
        return Err(Error::FeatureSet(format!(
            "HumanCam features have dim {}, glimpses {}",
            humancam.dim(),
            glimpses.dim()
        )));
    }
    if humancam.is_empty() {
        return Err(Error::Empty("HumanCam positives"));
    }
    let pool: Vec<&FeatureRecord> = glimpses
        .records()
        .iter()
        .filter(|r| r.video_id != heldout_video)
        .collect();
    let needed = 2 * humancam.len();
    if pool.len() < needed {
        return Err(Error::InsufficientNegatives {
            needed,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, pool.len(), needed).into_vec();
    picked.sort_unstable();

    let positives = humancam.records().iter().map(|r| FeatureRecord {
        label: Label::Positive,
        ..r.clone()
    });
    let negatives = picked.into_iter().map(|i| FeatureRecord {
        label: Label::Negative,
        ..pool[i].clone()
    });
    FeatureSet::new(humancam.dim(), positives.chain(negatives).collect())
}
