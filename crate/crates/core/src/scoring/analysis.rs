//! Distribution of capture-worthiness scores over the viewing sphere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoreMap;
use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Share of capture-worthy and non-capture-worthy glimpses at one angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisFractions {
    pub angle: f64,
    pub glimpses: usize,
    pub capture_worthy: f64,
    pub non_capture_worthy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub hi: f64,
    pub lo: f64,
    pub histogram: Vec<HistogramBin>,
    pub per_latitude: Vec<AxisFractions>,
    pub per_longitude: Vec<AxisFractions>,
}

#[derive(Default)]
struct Tally {
    total: usize,
    above: usize,
    below: usize,
}

/// Score histogram plus the fraction of glimpses scoring `>= hi` and `<= lo`
/// at each latitude and each longitude, pooled over all maps.
pub fn analyze_scores(maps: &[ScoreMap], hi: f64, lo: f64) -> Result<ScoreDistribution> {
    if maps.is_empty() {
        return Err(Error::Empty("score maps"));
    }
    if hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "capture-worthy threshold {hi} must exceed non-capture-worthy threshold {lo}"
        )));
    }
    let mut counts = [0usize; HISTOGRAM_BINS];
    // Keyed by the angle's bit pattern; angles are non-negative after the
    // offset so the ordering matches numeric order.
    let mut lat: BTreeMap<u64, Tally> = BTreeMap::new();
    let mut lon: BTreeMap<u64, Tally> = BTreeMap::new();
    for map in maps {
        for (g, &s) in map.grid().glimpses().zip(map.scores()) {
            let bin = ((s * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
            for (table, angle) in [(&mut lat, g.dir.theta() + 90.0), (&mut lon, g.dir.phi())] {
                let t = table.entry(angle.to_bits()).or_default();
                t.total += 1;
                t.above += usize::from(s >= hi);
                t.below += usize::from(s <= lo);
            }
        }
    }
    let fractions = |table: BTreeMap<u64, Tally>, offset: f64| {
        table
            .into_iter()
            .map(|(k, t)| AxisFractions {
                angle: f64::from_bits(k) - offset,
                glimpses: t.total,
                capture_worthy: t.above as f64 / t.total as f64,
                non_capture_worthy: t.below as f64 / t.total as f64,
            })
            .collect()
    };
    Ok(ScoreDistribution {
        hi,
        lo,
        histogram: counts
            .iter()
            .enumerate()
            .map(|(i, &count)| HistogramBin {
                lo: i as f64 / HISTOGRAM_BINS as f64,
                hi: (i + 1) as f64 / HISTOGRAM_BINS as f64,
                count,
            })
            .collect(),
        per_latitude: fractions(lat, 90.0),
        per_longitude: fractions(lon, 0.0),
    })
}
