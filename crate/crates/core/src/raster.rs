//! Float rasters and the on-disk frame directory format.
//!
//! A frame directory holds numbered lossless PNG frames (`000000.png`,
//! `000001.png`, ...) next to a `meta.json` sidecar:
//!
//! ```json
//! {"fps": 30.0, "width": 3840, "height": 1920, "frame_count": 900}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major interleaved float image. Equirectangular frames use the
/// `x = φ/360·W`, `y = (90−θ)/180·H` convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: usize,
    data: Vec<f32>,
}

/// Equirectangular frames are plain rasters with the sphere convention above.
pub type EquirectImage = Raster;

impl Raster {
    pub fn new(width: u32, height: u32, channels: usize) -> Self {
        Raster {
            width,
            height,
            channels,
            data: vec![0.0; width as usize * height as usize * channels],
        }
    }

    pub fn from_vec(width: u32, height: u32, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || data.len() != width as usize * height as usize * channels {
            return Err(Error::InvalidParameter(format!(
                "{} samples do not fill a {width}x{height}x{channels} raster",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            channels,
            data,
        })
    }

    /// Fills every pixel from `f(x, y)` evaluated at the pixel center.
    pub fn from_fn(width: u32, height: u32, channels: usize, mut f: impl FnMut(f64, f64) -> Vec<f32>) -> Self {
        let mut r = Raster::new(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                let v = f(x as f64 + 0.5, y as f64 + 0.5);
                r.pixel_mut(x, y).copy_from_slice(&v[..channels]);
            }
        }
        r
    }

    pub fn filled(width: u32, height: u32, value: &[f32]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * value.len());
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(value);
        }
        Raster {
            width,
            height,
            channels: value.len(),
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[f32] {
        let i = (y as usize * self.width as usize + x as usize) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [f32] {
        let i = (y as usize * self.width as usize + x as usize) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Rows as mutable slices, for row-parallel writers.
    pub(crate) fn par_rows_mut(&mut self) -> rayon::slice::ChunksExactMut<'_, f32> {
        use rayon::slice::ParallelSliceMut;
        let stride = self.width as usize * self.channels;
        self.data.par_chunks_exact_mut(stride)
    }

    /// Rec. 601 luma, or the single channel for grayscale rasters.
    pub fn luminance(&self, x: u32, y: u32) -> f32 {
        let p = self.pixel(x, y);
        match p.len() {
            1 | 2 => p[0],
            _ => 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2],
        }
    }

    /// Reads an 8- or 16-bit image, scaling samples to `[0, 1]`. Grayscale
    /// images stay single-channel, everything else becomes RGB.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let (w, h) = (img.width(), img.height());
        Ok(match img {
            DynamicImage::ImageLuma8(_) | DynamicImage::ImageLuma16(_) => {
                let g = img.to_luma32f();
                Raster::from_vec(w, h, 1, g.into_raw())?
            }
            other => Raster::from_vec(w, h, 3, other.into_rgb32f().into_raw())?,
        })
    }

    /// Writes an 8-bit PNG; samples are clamped to `[0, 1]` and rounded.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let quantize = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        let res = match self.channels {
            1 => ImageBuffer::<Luma<u8>, _>::from_raw(
                self.width,
                self.height,
                self.data.iter().map(|&v| quantize(v)).collect::<Vec<u8>>(),
            )
            .expect("buffer size")
            .save(path),
            3 => ImageBuffer::<Rgb<u8>, _>::from_raw(
                self.width,
                self.height,
                self.data.iter().map(|&v| quantize(v)).collect::<Vec<u8>>(),
            )
            .expect("buffer size")
            .save(path),
            c => {
                return Err(Error::InvalidParameter(format!(
                    "cannot encode {c}-channel raster as PNG"
                )))
            }
        };
        res.map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sidecar metadata of a frame directory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
}

impl FrameMeta {
    pub fn duration(&self) -> f64 {
        self.frame_count as f64 / self.fps
    }
}

/// Random access to the frames of a video.
pub trait FrameSource: Sync {
    fn meta(&self) -> FrameMeta;
    fn frame(&self, index: usize) -> Result<Raster>;
}

/// Frames held in memory.
#[derive(Debug, Clone)]
pub struct MemoryFrames {
    fps: f64,
    frames: Vec<Raster>,
}

impl MemoryFrames {
    pub fn new(fps: f64, frames: Vec<Raster>) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(Error::InvalidParameter(format!("fps must be positive, got {fps}")));
        }
        if let Some(first) = frames.first() {
            if frames
                .iter()
                .any(|f| f.width() != first.width() || f.height() != first.height())
            {
                return Err(Error::InvalidParameter("frames differ in size".into()));
            }
        }
        Ok(MemoryFrames { fps, frames })
    }

    pub fn frames(&self) -> &[Raster] {
        &self.frames
    }
}

impl FrameSource for MemoryFrames {
    fn meta(&self) -> FrameMeta {
        let (width, height) = self
            .frames
            .first()
            .map(|f| (f.width(), f.height()))
            .unwrap_or((0, 0));
        FrameMeta {
            fps: self.fps,
            width,
            height,
            frame_count: self.frames.len(),
        }
    }

    fn frame(&self, index: usize) -> Result<Raster> {
        self.frames.get(index).cloned().ok_or(Error::IncompleteSpan {
            required: index + 1,
            available: self.frames.len(),
        })
    }
}

pub const META_FILE: &str = "meta.json";

pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

/// A directory of numbered frames with a `meta.json` sidecar.
#[derive(Debug, Clone)]
pub struct FrameDir {
    root: PathBuf,
    meta: FrameMeta,
}

impl FrameDir {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let meta_path = root.join(META_FILE);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: FrameMeta = serde_json::from_str(&text).map_err(|e| Error::json(&meta_path, e))?;
        if !(meta.fps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: fps must be positive",
                meta_path.display()
            )));
        }
        Ok(FrameDir { root, meta })
    }

    /// Writes `frames` and the sidecar into `root`, creating it if needed.
    pub fn write(root: impl Into<PathBuf>, fps: f64, frames: &[Raster]) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        for (i, f) in frames.iter().enumerate() {
            f.save_png(&root.join(frame_file_name(i)))?;
        }
        let (width, height) = frames.first().map(|f| (f.width(), f.height())).unwrap_or((0, 0));
        let meta = FrameMeta {
            fps,
            width,
            height,
            frame_count: frames.len(),
        };
        let meta_path = root.join(META_FILE);
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::json(&meta_path, e))?;
        fs::write(&meta_path, text + "\n").map_err(|e| Error::io(&meta_path, e))?;
        Ok(FrameDir { root, meta })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn frame_path(&self, index: usize) -> PathBuf {
        self.root.join(frame_file_name(index))
    }
}

impl FrameSource for FrameDir {
    fn meta(&self) -> FrameMeta {
        self.meta
    }

    fn frame(&self, index: usize) -> Result<Raster> {
        if index >= self.meta.frame_count {
            return Err(Error::IncompleteSpan {
                required: index + 1,
                available: self.meta.frame_count,
            });
        }
        Raster::load(&self.frame_path(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_lossless_for_8bit_values() {
        let dir = tempfile::tempdir().unwrap();
        let r = Raster::from_fn(8, 4, 3, |x, y| {
            vec![(x as f32 * 16.0).round() / 255.0, (y as f32 * 32.0).round() / 255.0, 1.0]
        });
        let fd = FrameDir::write(dir.path().join("v"), 30.0, &[r.clone(), r.clone()]).unwrap();
        let reopened = FrameDir::open(fd.root()).unwrap();
        assert_eq!(reopened.meta().frame_count, 2);
        let back = reopened.frame(1).unwrap();
        for (a, b) in r.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(matches!(reopened.frame(2), Err(Error::IncompleteSpan { .. })));
    }

    #[test]
    fn from_vec_checks_size() {
        assert!(Raster::from_vec(2, 2, 3, vec![0.0; 11]).is_err());
        assert!(MemoryFrames::new(0.0, vec![]).is_err());
    }
}
