//! Rendering the virtual NFOV camera from equirectangular frames.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{ray_through, sphere_to_equirect_px, CameraModel, Direction};
use crate::raster::{frame_file_name, FrameMeta, FrameSource, Raster, META_FILE};
use crate::trajectory::ContinuousTrajectory;

/// Bilinear lookup at continuous equirectangular coordinates, wrapping
/// horizontally and clamping rows at the poles.
pub fn sample_bilinear(src: &Raster, x: f64, y: f64, out: &mut [f32]) {
    let (w, h) = (src.width() as i64, src.height() as i64);
    let sx = x - 0.5;
    let sy = y - 0.5;
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = (sx - x0) as f32;
    let fy = (sy - y0) as f32;
    let xa = (x0 as i64).rem_euclid(w) as u32;
    let xb = (x0 as i64 + 1).rem_euclid(w) as u32;
    let ya = (y0 as i64).clamp(0, h - 1) as u32;
    let yb = (y0 as i64 + 1).clamp(0, h - 1) as u32;
    let (p00, p10, p01, p11) = (src.pixel(xa, ya), src.pixel(xb, ya), src.pixel(xa, yb), src.pixel(xb, yb));
    for c in 0..out.len() {
        let top = p00[c] + (p10[c] - p00[c]) * fx;
        let bottom = p01[c] + (p11[c] - p01[c]) * fx;
        out[c] = top + (bottom - top) * fy;
    }
}

/// Tangent-plane coordinates `(right, up)` of every pixel center.
fn pixel_tangents(cam: &CameraModel) -> (Vec<f64>, Vec<f64>) {
    let tx = cam.horizontal_half_angle().to_radians().tan();
    let ty = cam.vertical_half_angle().to_radians().tan();
    let (w, h) = (cam.width() as f64, cam.height() as f64);
    let right = (0..cam.width())
        .map(|i| (2.0 * (i as f64 + 0.5) / w - 1.0) * tx)
        .collect();
    let up = (0..cam.height())
        .map(|j| (1.0 - 2.0 * (j as f64 + 0.5) / h) * ty)
        .collect();
    (right, up)
}

/// Renders the view of a camera looking along `principal`.
pub fn render_frame(src: &Raster, cam: &CameraModel, principal: Direction) -> Result<Raster> {
    if src.is_empty() {
        return Err(Error::Empty("source frame"));
    }
    let (right, up) = pixel_tangents(cam);
    let channels = src.channels();
    let mut out = Raster::new(cam.width(), cam.height(), channels);
    let (sw, sh) = (src.width(), src.height());
    out.par_rows_mut().enumerate().for_each(|(j, row)| {
        for (i, px) in row.chunks_exact_mut(channels).enumerate() {
            let ray = ray_through(principal, right[i], up[j]);
            let (x, y) = sphere_to_equirect_px(sw, sh, ray);
            sample_bilinear(src, x, y, px);
        }
    });
    Ok(out)
}

/// Everything needed to render an NFOV video along a trajectory.
pub struct RenderJob<'a> {
    pub frames: &'a dyn FrameSource,
    pub trajectory: &'a ContinuousTrajectory,
    pub cam: CameraModel,
    /// Render frames concurrently. Output is identical either way.
    pub parallel: bool,
}

impl RenderJob<'_> {
    fn check(&self) -> Result<usize> {
        let meta = self.frames.meta();
        let n = self.trajectory.len();
        if n > meta.frame_count {
            return Err(Error::Trajectory(format!(
                "trajectory has {n} frames but the source only {}",
                meta.frame_count
            )));
        }
        if (self.trajectory.fps - meta.fps).abs() > 1e-6 * meta.fps {
            return Err(Error::Trajectory(format!(
                "trajectory fps {} does not match source fps {}",
                self.trajectory.fps, meta.fps
            )));
        }
        Ok(n)
    }

    fn render_one(&self, i: usize) -> Result<Raster> {
        render_frame(&self.frames.frame(i)?, &self.cam, self.trajectory.directions[i])
    }
}

/// Renders frame `i` of the output at `trajectory.directions[i]`.
pub fn render_video(job: &RenderJob<'_>) -> Result<Vec<Raster>> {
    let n = job.check()?;
    if job.parallel {
        (0..n).into_par_iter().map(|i| job.render_one(i)).collect()
    } else {
        (0..n).map(|i| job.render_one(i)).collect()
    }
}

/// Renders straight into a frame directory (numbered PNGs plus `meta.json`).
pub fn render_to_dir(job: &RenderJob<'_>, out: &Path) -> Result<FrameMeta> {
    let n = job.check()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let write = |i: usize| job.render_one(i)?.save_png(&out.join(frame_file_name(i)));
    if job.parallel {
        (0..n).into_par_iter().try_for_each(write)?;
    } else {
        (0..n).try_for_each(write)?;
    }
    let meta = FrameMeta {
        fps: job.trajectory.fps,
        width: job.cam.width(),
        height: job.cam.height(),
        frame_count: n,
    };
    let path = out.join(META_FILE);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(meta)
}
