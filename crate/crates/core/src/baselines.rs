//! Reference trajectory generators: a random walk from the panorama center,
//! static eye-level cameras, and per-step sampling without the motion limit.
//!
//! A saliency baseline needs no code here: run the solver on a saliency
//! score map instead of a capture-worthiness one.
//!
//! Randomized generators take a seed; sample `k` draws from its own ChaCha
//! stream so results do not depend on scheduling or on `K`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{longitude_gap, wrap_longitude, Direction};
use crate::grid::{GlimpseGrid, StGlimpse};
use crate::scoring::ScoreMap;
use crate::trajectory::DiscreteTrajectory;

/// Random-walk step per 5 s, degrees.
pub const DEFAULT_SIGMA: f64 = 10.0;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent generator for sample `k`.
    fn stream(self, k: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(k as u64);
        rng
    }
}

/// Nearest lattice direction; ties go to the smaller magnitude latitude and
/// the earlier longitude.
pub fn snap_to_grid(grid: &GlimpseGrid, dir: Direction) -> Direction {
    let theta = grid
        .latitudes()
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - dir.theta())
                .abs()
                .total_cmp(&(b - dir.theta()).abs())
                .then(a.abs().total_cmp(&b.abs()))
        })
        .expect("non-empty grid");
    let phi = grid
        .longitudes()
        .iter()
        .copied()
        .min_by(|a, b| longitude_gap(*a, dir.phi()).total_cmp(&longitude_gap(*b, dir.phi())))
        .expect("non-empty grid");
    Direction::new(theta, phi).expect("lattice direction")
}

/// A random walk sampled by [`center_walk`], before and after snapping.
#[derive(Debug, Clone)]
pub struct CenterWalk {
    pub raw: Vec<Direction>,
    pub snapped: DiscreteTrajectory,
}

/// One Center-baseline sample: start at `(0, 0)`, then add independent
/// Gaussian steps of std `sigma` to latitude (clamped to the poles) and
/// longitude (wrapped).
pub fn center_walk(grid: &GlimpseGrid, sigma: f64, rng: &mut ChaCha8Rng) -> Result<CenterWalk> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut raw = Vec::with_capacity(grid.num_steps());
    let mut current = Direction::new(0.0, 0.0).expect("origin");
    raw.push(current);
    for _ in 1..grid.num_steps() {
        let theta = (current.theta() + normal.sample(rng)).clamp(-90.0, 90.0);
        let phi = wrap_longitude(current.phi() + normal.sample(rng));
        current = Direction::new(theta, phi).expect("clamped");
        raw.push(current);
    }
    let steps = raw
        .iter()
        .enumerate()
        .map(|(t, &d)| StGlimpse {
            t,
            dir: snap_to_grid(grid, d),
        })
        .collect();
    Ok(CenterWalk {
        raw,
        snapped: DiscreteTrajectory {
            steps,
            aggregate_score: 0.0,
        },
    })
}

/// `k` Center-baseline walks, snapped to the lattice.
pub fn center_baseline(grid: &GlimpseGrid, k: usize, sigma: f64, seed: RngSeed) -> Result<Vec<DiscreteTrajectory>> {
    Ok(center_walks(grid, k, sigma, seed)?
        .into_iter()
        .map(|w| w.snapped)
        .collect())
}

/// `k` Center-baseline walks with their raw (unsnapped) directions.
pub fn center_walks(grid: &GlimpseGrid, k: usize, sigma: f64, seed: RngSeed) -> Result<Vec<CenterWalk>> {
    (0..k).map(|i| center_walk(grid, sigma, &mut seed.stream(i))).collect()
}

/// Static eye-level cameras, one per lattice longitude.
pub fn eye_level_baseline(grid: &GlimpseGrid) -> Result<Vec<DiscreteTrajectory>> {
    if !grid.latitudes().contains(&0.0) {
        return Err(Error::InvalidGrid("lattice has no eye-level (0°) row".into()));
    }
    Ok(grid
        .longitudes()
        .iter()
        .map(|&phi| {
            let dir = Direction::new(0.0, phi).expect("lattice direction");
            DiscreteTrajectory {
                steps: (0..grid.num_steps()).map(|t| StGlimpse { t, dir }).collect(),
                aggregate_score: 0.0,
            }
        })
        .collect())
}

/// Per-step cell probabilities `softmax(scores[t] / temperature)`.
pub fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = scores.iter().map(|s| ((s - max) / temperature).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// `k` trajectories picking each step's glimpse independently with
/// probability proportional to `exp(score / temperature)`.
pub fn no_stitch_sample(scores: &ScoreMap, k: usize, temperature: f64, seed: RngSeed) -> Result<Vec<DiscreteTrajectory>> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let grid = scores.grid();
    let per_step: Vec<WeightedIndex<f64>> = (0..grid.num_steps())
        .map(|t| WeightedIndex::new(softmax(scores.step(t), temperature)).expect("softmax weights"))
        .collect();
    Ok((0..k)
        .map(|i| {
            let mut rng = seed.stream(i);
            let steps: Vec<StGlimpse> = per_step
                .iter()
                .enumerate()
                .map(|(t, dist)| StGlimpse {
                    t,
                    dir: grid.cell_direction(dist.sample(&mut rng)),
                })
                .collect();
            let aggregate_score = steps.iter().map(|g| scores.score_of(g).expect("on lattice")).sum();
            DiscreteTrajectory {
                steps,
                aggregate_score,
            }
        })
        .collect())
}
