//! Smooth camera trajectory selection over the glimpse lattice.
//!
//! Between consecutive steps the camera may move at most `epsilon` degrees in
//! latitude and, independently, at most `epsilon` degrees of wrapped
//! longitude. Among the trajectories obeying that limit the dynamic program
//! maximizes the summed capture-worthiness score, which is the same as the
//! shortest path over edges weighted by the negated score of their endpoint,
//! with over-limit edges left out of the graph.
//!
//! One pass of the recurrence yields the best trajectory ending at every
//! cell of the last step; the top `K` of those are returned.
//!
//! Ties are broken deterministically. A cell prefers the predecessor with the
//! smallest `|Δθ| + |Δφ|`, then the smallest `|θ|`, then the smallest `φ`,
//! then the smallest `θ`. Terminal cells are ranked by score, then by the
//! same `|θ|`, `φ`, `θ` order.

use std::cmp::Ordering;

use log::warn;

use crate::error::{Error, Result};
use crate::geom::{longitude_gap, signed_longitude_delta, Direction};
use crate::grid::{GlimpseGrid, StGlimpse};
use crate::scoring::ScoreMap;
use crate::trajectory::{ContinuousTrajectory, DiscreteTrajectory};

/// Largest per-step motion in each angle, degrees.
pub const DEFAULT_EPSILON: f64 = 30.0;
/// Number of trajectories kept per video.
pub const DEFAULT_K: usize = 20;

/// Absorbs representation error when comparing lattice angles with epsilon.
const ANGLE_SLACK: f64 = 1e-9;

/// Whether a camera may move from `a` to `b` in one step.
pub fn within_motion_limit(a: Direction, b: Direction, epsilon: f64) -> bool {
    (a.theta() - b.theta()).abs() <= epsilon + ANGLE_SLACK
        && longitude_gap(a.phi(), b.phi()) <= epsilon + ANGLE_SLACK
}

/// Orders cells by `|θ|`, then `φ`, then `θ`.
fn position_order(a: Direction, b: Direction) -> Ordering {
    a.theta()
        .abs()
        .total_cmp(&b.theta().abs())
        .then(a.phi().total_cmp(&b.phi()))
        .then(a.theta().total_cmp(&b.theta()))
}

/// Feasible predecessors of each spatial cell, in tie-break priority order.
fn predecessor_lists(grid: &GlimpseGrid, epsilon: f64) -> Vec<Vec<usize>> {
    let n = grid.cells_per_step();
    let dirs: Vec<Direction> = (0..n).map(|c| grid.cell_direction(c)).collect();
    (0..n)
        .map(|cell| {
            let here = dirs[cell];
            let mut preds: Vec<usize> = (0..n)
                .filter(|&p| within_motion_limit(dirs[p], here, epsilon))
                .collect();
            let motion = |p: usize| {
                (dirs[p].theta() - here.theta()).abs() + longitude_gap(dirs[p].phi(), here.phi())
            };
            preds.sort_by(|&a, &b| {
                motion(a)
                    .total_cmp(&motion(b))
                    .then(position_order(dirs[a], dirs[b]))
            });
            preds
        })
        .collect()
}

/// Accumulated scores and back-pointers of the dynamic program.
#[derive(Debug, Clone)]
pub struct DpTable {
    cells: usize,
    steps: usize,
    accum: Vec<f64>,
    back: Vec<usize>,
}

impl DpTable {
    /// Best total score of a feasible trajectory ending in `cell` at step `t`.
    pub fn accum(&self, t: usize, cell: usize) -> f64 {
        self.accum[t * self.cells + cell]
    }

    /// Cells visited by the best trajectory ending in `cell` at the last step.
    pub fn backtrack(&self, cell: usize) -> Vec<usize> {
        let mut path = vec![0; self.steps];
        let mut c = cell;
        for t in (0..self.steps).rev() {
            path[t] = c;
            if t > 0 {
                c = self.back[t * self.cells + c];
            }
        }
        path
    }
}

/// Runs the recurrence `best[t][c] = max over feasible p of best[t−1][p] + score[t][c]`.
pub fn run_dp(scores: &ScoreMap, epsilon: f64) -> Result<DpTable> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let grid = scores.grid();
    let (n, steps) = (grid.cells_per_step(), grid.num_steps());
    let preds = predecessor_lists(grid, epsilon);
    let mut accum = vec![0.0; n * steps];
    let mut back = vec![usize::MAX; n * steps];
    accum[..n].copy_from_slice(scores.step(0));
    for t in 1..steps {
        let (done, rest) = accum.split_at_mut(t * n);
        let prev = &done[(t - 1) * n..];
        let here = scores.step(t);
        for c in 0..n {
            // Every cell is its own feasible predecessor, so the list is non-empty.
            let mut best = preds[c][0];
            for &p in &preds[c][1..] {
                if prev[p] > prev[best] {
                    best = p;
                }
            }
            rest[c] = prev[best] + here[c];
            back[t * n + c] = best;
        }
    }
    Ok(DpTable {
        cells: n,
        steps,
        accum,
        back,
    })
}

/// Best trajectory ending at every terminal cell, ranked best first.
pub fn solve_all(scores: &ScoreMap, epsilon: f64) -> Result<Vec<DiscreteTrajectory>> {
    let table = run_dp(scores, epsilon)?;
    let grid = scores.grid();
    let last = grid.num_steps() - 1;
    let mut terminals: Vec<usize> = (0..grid.cells_per_step()).collect();
    terminals.sort_by(|&a, &b| {
        table
            .accum(last, b)
            .total_cmp(&table.accum(last, a))
            .then(position_order(grid.cell_direction(a), grid.cell_direction(b)))
    });
    Ok(terminals
        .into_iter()
        .map(|cell| DiscreteTrajectory {
            steps: table
                .backtrack(cell)
                .into_iter()
                .enumerate()
                .map(|(t, c)| StGlimpse {
                    t,
                    dir: grid.cell_direction(c),
                })
                .collect(),
            aggregate_score: table.accum(last, cell),
        })
        .collect())
}

/// The `k` best smooth trajectories, sorted by non-increasing aggregate score.
///
/// Trajectories ending at different cells may share most of their path; they
/// are returned as they are.
pub fn solve_topk(scores: &ScoreMap, epsilon: f64, k: usize) -> Result<Vec<DiscreteTrajectory>> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let mut all = solve_all(scores, epsilon)?;
    if k > all.len() {
        warn!("requested {k} trajectories but only {} terminal cells exist", all.len());
    }
    all.truncate(k);
    Ok(all)
}

/// Sum of the map's scores along a trajectory, in step order.
pub fn aggregate_score(scores: &ScoreMap, traj: &DiscreteTrajectory) -> Option<f64> {
    traj.steps.iter().try_fold(0.0, |acc, g| Some(acc + scores.score_of(g)?))
}

/// Camera direction at time `time` (seconds) for keypoints centered in
/// consecutive `interval`-second steps.
///
/// Latitude moves linearly; longitude moves linearly along the shorter arc.
/// The first and last keypoints are held outside the keypoint span.
pub fn direction_at(keypoints: &[Direction], interval: f64, time: f64) -> Direction {
    let pos = time / interval - 0.5;
    if pos <= 0.0 {
        return keypoints[0];
    }
    let last = keypoints.len() - 1;
    if pos >= last as f64 {
        return keypoints[last];
    }
    let k = pos.floor() as usize;
    let s = pos - k as f64;
    let (a, b) = (keypoints[k], keypoints[k + 1]);
    Direction::clamped(
        a.theta() + s * (b.theta() - a.theta()),
        a.phi() + s * signed_longitude_delta(a.phi(), b.phi()),
    )
}

/// Per-frame camera directions for a discrete trajectory.
///
/// The output covers `round(T · interval · fps)` frames; frame `i` is taken
/// at its center time `(i + 0.5) / fps`.
pub fn interpolate(traj: &DiscreteTrajectory, fps: f64, interval: f64) -> Result<ContinuousTrajectory> {
    if traj.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    if !(fps > 0.0) || !(interval > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fps and interval must be positive, got {fps} and {interval}"
        )));
    }
    let keys: Vec<Direction> = traj.directions().collect();
    let frames = (traj.len() as f64 * interval * fps).round() as usize;
    let directions = (0..frames)
        .map(|i| direction_at(&keys, interval, (i as f64 + 0.5) / fps))
        .collect();
    ContinuousTrajectory::new(fps, directions)
}
