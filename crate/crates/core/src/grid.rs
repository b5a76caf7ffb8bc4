//! The spatio-temporal glimpse lattice.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CameraModel, Direction};
use crate::raster::{FrameSource, Raster};
use crate::render::render_frame;

/// Glimpse latitudes, denser around the equator.
pub const DEFAULT_LATITUDES: [f64; 11] = [
    -75.0, -45.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 45.0, 75.0,
];
/// Glimpse duration in seconds.
pub const DEFAULT_INTERVAL: f64 = 5.0;

pub fn default_longitudes() -> Vec<f64> {
    (0..18).map(|i| i as f64 * 20.0).collect()
}

/// Spatial layout and step length of a lattice, independent of video length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub interval: f64,
    pub latitudes: Vec<f64>,
    pub longitudes: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            interval: DEFAULT_INTERVAL,
            latitudes: DEFAULT_LATITUDES.to_vec(),
            longitudes: default_longitudes(),
        }
    }
}

impl GridSpec {
    pub fn build(&self, duration: f64) -> Result<GlimpseGrid> {
        build_grid(duration, self.interval, &self.latitudes, &self.longitudes)
    }
}

/// A glimpse lattice of `num_steps` steps over `latitudes × longitudes`.
///
/// Cells are enumerated t-major, then latitude ascending, then longitude
/// ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlimpseGrid {
    latitudes: Vec<f64>,
    longitudes: Vec<f64>,
    interval: f64,
    num_steps: usize,
}

/// One lattice cell: a fixed camera direction held for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StGlimpse {
    pub t: usize,
    pub dir: Direction,
}

/// Builds a lattice covering `floor(duration / interval)` whole steps; a
/// partial trailing interval is dropped.
pub fn build_grid(duration: f64, interval: f64, latitudes: &[f64], longitudes: &[f64]) -> Result<GlimpseGrid> {
    if !(interval > 0.0) || !interval.is_finite() {
        return Err(Error::InvalidGrid(format!("interval must be positive, got {interval}")));
    }
    // Tolerate representation error in durations like 0.1 * 50.
    let steps = (duration / interval + 1e-9).floor();
    if !(steps >= 1.0) {
        return Err(Error::EmptyGrid { duration, interval });
    }
    GlimpseGrid::new(latitudes.to_vec(), longitudes.to_vec(), interval, steps as usize)
}

fn check_axis(name: &str, values: &[f64], valid: impl Fn(f64) -> bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid(format!("no {name}")));
    }
    if let Some(v) = values.iter().find(|&&v| !valid(v)) {
        return Err(Error::InvalidGrid(format!("{name} value {v} out of range")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

impl GlimpseGrid {
    pub fn new(latitudes: Vec<f64>, longitudes: Vec<f64>, interval: f64, num_steps: usize) -> Result<Self> {
        check_axis("latitudes", &latitudes, |v| (-90.0..=90.0).contains(&v))?;
        check_axis("longitudes", &longitudes, |v| (0.0..360.0).contains(&v))?;
        if !(interval > 0.0) || num_steps == 0 {
            return Err(Error::InvalidGrid(format!(
                "need interval > 0 and at least one step, got {interval}s x {num_steps}"
            )));
        }
        Ok(GlimpseGrid {
            latitudes,
            longitudes,
            interval,
            num_steps,
        })
    }

    /// Default lattice (11 latitudes × 18 longitudes, 5 s steps).
    pub fn with_defaults(num_steps: usize) -> Result<Self> {
        GlimpseGrid::new(
            DEFAULT_LATITUDES.to_vec(),
            default_longitudes(),
            DEFAULT_INTERVAL,
            num_steps,
        )
    }

    pub fn latitudes(&self) -> &[f64] {
        &self.latitudes
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.longitudes
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    /// Number of directions per time step.
    pub fn cells_per_step(&self) -> usize {
        self.latitudes.len() * self.longitudes.len()
    }

    pub fn len(&self) -> usize {
        self.num_steps * self.cells_per_step()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            interval: self.interval,
            latitudes: self.latitudes.clone(),
            longitudes: self.longitudes.clone(),
        }
    }

    /// Same spatial layout with a different number of steps.
    pub fn with_steps(&self, num_steps: usize) -> Result<Self> {
        GlimpseGrid::new(self.latitudes.clone(), self.longitudes.clone(), self.interval, num_steps)
    }

    /// Direction of spatial cell `cell` (latitude-major).
    pub fn cell_direction(&self, cell: usize) -> Direction {
        let n = self.longitudes.len();
        Direction::new(self.latitudes[cell / n], self.longitudes[cell % n]).expect("validated grid")
    }

    pub fn cell_index(&self, lat_idx: usize, lon_idx: usize) -> usize {
        lat_idx * self.longitudes.len() + lon_idx
    }

    /// Spatial cell holding exactly this direction, if it is on the lattice.
    pub fn cell_of(&self, dir: Direction) -> Option<usize> {
        let i = self.latitudes.iter().position(|&v| v == dir.theta())?;
        let j = self.longitudes.iter().position(|&v| v == dir.phi())?;
        Some(self.cell_index(i, j))
    }

    pub fn linear_index(&self, g: &StGlimpse) -> Option<usize> {
        if g.t >= self.num_steps {
            return None;
        }
        Some(g.t * self.cells_per_step() + self.cell_of(g.dir)?)
    }

    pub fn glimpse(&self, index: usize) -> Option<StGlimpse> {
        (index < self.len()).then(|| StGlimpse {
            t: index / self.cells_per_step(),
            dir: self.cell_direction(index % self.cells_per_step()),
        })
    }

    pub fn glimpses(&self) -> impl Iterator<Item = StGlimpse> + '_ {
        (0..self.len()).map(|i| self.glimpse(i).expect("in range"))
    }

    /// Time span `[start, end)` in seconds covered by step `t`.
    pub fn step_span(&self, t: usize) -> (f64, f64) {
        (t as f64 * self.interval, (t + 1) as f64 * self.interval)
    }
}

/// Indices of the frames whose center time `(i + 0.5) / fps` falls in `[start, end)`.
pub fn frames_in_span(start: f64, end: f64, fps: f64) -> Range<usize> {
    let first = (start * fps - 0.5).ceil().max(0.0) as usize;
    let last = (end * fps - 0.5).ceil().max(0.0) as usize;
    first..last.max(first)
}

/// Renders the NFOV clip of one glimpse: every source frame within the
/// glimpse's step, viewed along the glimpse direction.
pub fn glimpse_clip(
    frames: &dyn FrameSource,
    grid: &GlimpseGrid,
    g: &StGlimpse,
    cam: &CameraModel,
) -> Result<Vec<Raster>> {
    let meta = frames.meta();
    let (start, end) = grid.step_span(g.t);
    let range = frames_in_span(start, end, meta.fps);
    if range.end > meta.frame_count || range.is_empty() {
        return Err(Error::IncompleteSpan {
            required: range.end,
            available: meta.frame_count,
        });
    }
    range
        .into_par_iter()
        .map(|i| render_frame(&frames.frame(i)?, cam, g.dir))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::MemoryFrames;

    #[test]
    fn default_grid_sizes() {
        let g = build_grid(5.0, 5.0, &DEFAULT_LATITUDES, &default_longitudes()).unwrap();
        assert_eq!((g.num_steps(), g.len()), (1, 198));
        let g = GridSpec::default().build(60.0).unwrap();
        assert_eq!(g.num_steps(), 12);
        // Independent count by enumeration.
        assert_eq!(g.glimpses().count(), 2376);
        assert_eq!(GridSpec::default().build(64.9).unwrap().num_steps(), 12);
    }

    #[test]
    fn short_video_is_an_error() {
        assert!(matches!(
            build_grid(4.9, 5.0, &DEFAULT_LATITUDES, &default_longitudes()),
            Err(Error::EmptyGrid { .. })
        ));
    }

    #[test]
    fn rejects_unsorted_axes() {
        assert!(GlimpseGrid::new(vec![0.0, -10.0], vec![0.0], 5.0, 1).is_err());
        assert!(GlimpseGrid::new(vec![0.0], vec![0.0, 360.0], 5.0, 1).is_err());
    }

    #[test]
    fn enumeration_order_and_round_trip() {
        let g = GlimpseGrid::with_defaults(3).unwrap();
        let all: Vec<StGlimpse> = g.glimpses().collect();
        assert_eq!(all[0].dir.theta(), -75.0);
        assert_eq!(all[1].dir.phi(), 20.0);
        assert_eq!(all[18].dir.theta(), -45.0);
        assert_eq!(all[198].t, 1);
        for (i, gl) in all.iter().enumerate() {
            assert_eq!(g.linear_index(gl), Some(i));
        }
        let mut keys: Vec<(usize, i64, i64)> = all
            .iter()
            .map(|g| (g.t, g.dir.theta() as i64, g.dir.phi() as i64))
            .collect();
        keys.dedup();
        assert_eq!(keys.len(), all.len());
    }

    #[test]
    fn frame_span_counts() {
        assert_eq!(frames_in_span(0.0, 5.0, 30.0).len(), 150);
        assert_eq!(frames_in_span(5.0, 10.0, 30.0), 150..300);
        assert_eq!(frames_in_span(0.0, 5.0, 1.0), 0..5);
    }

    #[test]
    fn clip_of_constant_panorama() {
        let frame = Raster::filled(72, 36, &[0.25, 0.5, 0.75]);
        let src = MemoryFrames::new(2.0, vec![frame; 10]).unwrap();
        let grid = GlimpseGrid::with_defaults(1).unwrap();
        let cam = CameraModel::new(65.5, 4.0 / 3.0, 16, 12).unwrap();
        let g = grid.glimpse(100).unwrap();
        let clip = glimpse_clip(&src, &grid, &g, &cam).unwrap();
        assert_eq!(clip.len(), 10);
        for f in &clip {
            for px in f.data().chunks(3) {
                assert!((px[0] - 0.25).abs() < 1e-6 && (px[2] - 0.75).abs() < 1e-6);
            }
        }
        let short = MemoryFrames::new(2.0, vec![Raster::filled(72, 36, &[0.0]); 9]).unwrap();
        assert!(matches!(
            glimpse_clip(&short, &grid, &g, &cam),
            Err(Error::IncompleteSpan { .. })
        ));
    }

    #[test]
    fn clip_centers_marker() {
        // Gaussian blob centered on (0, 180) in a 720x360 panorama.
        let frame = Raster::from_fn(720, 360, 1, |x, y| {
            let (dx, dy) = (x - 360.0, y - 180.0);
            vec![(-(dx * dx + dy * dy) / 200.0).exp() as f32]
        });
        let src = MemoryFrames::new(1.0, vec![frame; 5]).unwrap();
        let grid = GlimpseGrid::with_defaults(1).unwrap();
        let cam = CameraModel::new(65.5, 4.0 / 3.0, 121, 91).unwrap();
        let g = StGlimpse {
            t: 0,
            dir: Direction::new(0.0, 180.0).unwrap(),
        };
        let clip = glimpse_clip(&src, &grid, &g, &cam).unwrap();
        assert_eq!(clip.len(), 5);
        let f = &clip[0];
        let center = f.pixel(60, 45)[0];
        assert!(center > 0.99, "center {center}");
        let mut brightest = (0, 0, f32::MIN);
        for y in 0..f.height() {
            for x in 0..f.width() {
                if f.pixel(x, y)[0] > brightest.2 {
                    brightest = (x, y, f.pixel(x, y)[0]);
                }
            }
        }
        assert_eq!((brightest.0, brightest.1), (60, 45));
    }
}
