//! Spherical geometry, the NFOV camera model, and the mappings between sphere
//! directions, equirectangular pixels and NFOV pixels.
//!
//! Conventions used throughout the crate:
//!
//! * latitude `theta` in degrees, `+90` is the north pole, `0` is eye level;
//! * longitude `phi` in degrees, stored in `[0, 360)`;
//! * the unit vector of `(theta, phi)` is
//!   `(cos θ cos φ, cos θ sin φ, sin θ)`;
//! * equirectangular pixel coordinates are continuous with pixel centers at
//!   half-integer offsets: `x = φ/360·W`, `y = (90 − θ)/180·H`;
//! * the virtual camera never rolls: image "up" follows the meridian through
//!   the principal axis and image "right" points toward increasing longitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal field of view of a normal-field-of-view camera, in degrees.
pub const NFOV_HFOV_DEG: f64 = 65.5;
/// Width-to-height ratio of the NFOV frame.
pub const NFOV_ASPECT: f64 = 4.0 / 3.0;

/// Wraps a longitude into `[0, 360)`.
#[inline]
pub fn wrap_longitude(phi: f64) -> f64 {
    let w = phi.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Signed longitude change from `from` to `to` along the shorter arc, in `(-180, 180]`.
#[inline]
pub fn signed_longitude_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Unsigned longitude difference along the shorter arc, in `[0, 180]`.
#[inline]
pub fn longitude_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// A camera principal axis direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDirection", into = "RawDirection")]
pub struct Direction {
    theta: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDirection {
    theta: f64,
    phi: f64,
}

impl TryFrom<RawDirection> for Direction {
    type Error = Error;

    fn try_from(raw: RawDirection) -> Result<Self> {
        Direction::new(raw.theta, raw.phi)
    }
}

impl From<Direction> for RawDirection {
    fn from(d: Direction) -> Self {
        RawDirection {
            theta: d.theta,
            phi: d.phi,
        }
    }
}

impl Direction {
    /// Builds a direction, normalizing the longitude into `[0, 360)`.
    ///
    /// Longitudes given in `[-180, 180)` (or any other range) are accepted.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(-90.0..=90.0).contains(&theta) {
            return Err(Error::InvalidDirection { theta, phi });
        }
        Ok(Direction {
            theta,
            phi: wrap_longitude(phi),
        })
    }

    /// Like [`Direction::new`] but clamps the latitude instead of failing.
    ///
    /// Panics on non-finite input.
    pub fn clamped(theta: f64, phi: f64) -> Self {
        assert!(theta.is_finite() && phi.is_finite(), "non-finite direction");
        Direction {
            theta: theta.clamp(-90.0, 90.0),
            phi: wrap_longitude(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The unit vector pointing along this direction.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        [ct * cp, ct * sp, st]
    }

    /// Direction of a (not necessarily unit) non-zero vector.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let horiz = v[0].hypot(v[1]);
        let theta = v[2].atan2(horiz).to_degrees();
        let phi = if horiz == 0.0 {
            0.0
        } else {
            v[1].atan2(v[0]).to_degrees()
        };
        Direction::clamped(theta, phi)
    }

    /// Unit vectors pointing toward increasing longitude (image right) and
    /// toward the north pole along the meridian (image up).
    fn tangent_frame(&self) -> ([f64; 3], [f64; 3]) {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        ([-sp, cp, 0.0], [-st * cp, -st * sp, ct])
    }
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Great-circle angle between two directions, in degrees within `[0, 180]`.
///
/// Uses `atan2(|a × b|, a · b)`, which stays accurate for nearly coincident
/// and nearly antipodal directions.
pub fn angular_distance(a: Direction, b: Direction) -> f64 {
    let (u, v) = (a.unit_vector(), b.unit_vector());
    norm(cross(u, v)).atan2(dot(u, v)).to_degrees()
}

/// Per-angle displacement `(|Δθ|, |Δφ|)` with longitude measured along the
/// shorter arc. Both components lie in `[0, 180]`.
pub fn wrapped_delta(a: Direction, b: Direction) -> (f64, f64) {
    ((a.theta - b.theta).abs(), longitude_gap(a.phi, b.phi))
}

/// Rectilinear (gnomonic) virtual camera intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCamera", into = "RawCamera")]
pub struct CameraModel {
    hfov: f64,
    aspect: f64,
    width: u32,
    height: u32,
}

#[derive(Serialize, Deserialize)]
struct RawCamera {
    hfov: f64,
    aspect: f64,
    width: u32,
    height: u32,
}

impl TryFrom<RawCamera> for CameraModel {
    type Error = Error;

    fn try_from(raw: RawCamera) -> Result<Self> {
        CameraModel::new(raw.hfov, raw.aspect, raw.width, raw.height)
    }
}

impl From<CameraModel> for RawCamera {
    fn from(c: CameraModel) -> Self {
        RawCamera {
            hfov: c.hfov,
            aspect: c.aspect,
            width: c.width,
            height: c.height,
        }
    }
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            hfov: NFOV_HFOV_DEG,
            aspect: NFOV_ASPECT,
            width: 640,
            height: 480,
        }
    }
}

impl CameraModel {
    pub fn new(hfov: f64, aspect: f64, width: u32, height: u32) -> Result<Self> {
        if !(hfov > 0.0 && hfov < 180.0) {
            return Err(Error::InvalidCamera(format!(
                "horizontal fov {hfov} outside (0, 180)"
            )));
        }
        if !(aspect.is_finite() && aspect > 0.0) {
            return Err(Error::InvalidCamera(format!("aspect {aspect} must be positive")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("zero-sized raster".into()));
        }
        if (width as f64 - aspect * height as f64).abs() > 1.0 {
            return Err(Error::InvalidCamera(format!(
                "{width}x{height} raster does not match aspect {aspect}"
            )));
        }
        Ok(CameraModel {
            hfov,
            aspect,
            width,
            height,
        })
    }

    /// NFOV camera with the default field of view and aspect at a given width.
    pub fn nfov_with_width(width: u32) -> Result<Self> {
        let height = (width as f64 / NFOV_ASPECT).round() as u32;
        CameraModel::new(NFOV_HFOV_DEG, NFOV_ASPECT, width, height)
    }

    pub fn hfov(&self) -> f64 {
        self.hfov
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Half of the horizontal field of view, degrees.
    pub fn horizontal_half_angle(&self) -> f64 {
        self.hfov / 2.0
    }

    /// Half of the vertical field of view, degrees: `atan(tan(hfov/2) / aspect)`.
    pub fn vertical_half_angle(&self) -> f64 {
        ((self.hfov / 2.0).to_radians().tan() / self.aspect)
            .atan()
            .to_degrees()
    }

    /// Tangent-plane coordinates of a raster point, `(right, up)`.
    ///
    /// The raster edges map to the tangents of the half angles, so the field
    /// of view is exact even when the pixel dimensions round the aspect.
    fn tangent_coords(&self, x: f64, y: f64) -> (f64, f64) {
        let tx = self.horizontal_half_angle().to_radians().tan();
        let ty = self.vertical_half_angle().to_radians().tan();
        let (w, h) = (self.width as f64, self.height as f64);
        ((2.0 * x / w - 1.0) * tx, (1.0 - 2.0 * y / h) * ty)
    }

    fn raster_coords(&self, right: f64, up: f64) -> (f64, f64) {
        let tx = self.horizontal_half_angle().to_radians().tan();
        let ty = self.vertical_half_angle().to_radians().tan();
        let (w, h) = (self.width as f64, self.height as f64);
        ((right / tx + 1.0) * w / 2.0, (1.0 - up / ty) * h / 2.0)
    }
}

/// Sphere direction seen through the continuous raster point `(x, y)` of a
/// camera looking along `principal`.
///
/// The raster spans `[0, width] x [0, height]`; pixel `(i, j)` has its center
/// at `(i + 0.5, j + 0.5)`.
pub fn nfov_pixel_ray(cam: &CameraModel, principal: Direction, px: (f64, f64)) -> Result<Direction> {
    let (x, y) = px;
    let (w, h) = (cam.width as f64, cam.height as f64);
    if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
        return Err(Error::PixelOutOfRange {
            x,
            y,
            width: cam.width,
            height: cam.height,
        });
    }
    let (right, up) = cam.tangent_coords(x, y);
    Ok(ray_through(principal, right, up))
}

/// Direction of the tangent-plane point `(right, up)` of the camera frame.
pub(crate) fn ray_through(principal: Direction, right: f64, up: f64) -> Direction {
    let d = principal.unit_vector();
    let (e, n) = principal.tangent_frame();
    Direction::from_vector([
        d[0] + right * e[0] + up * n[0],
        d[1] + right * e[1] + up * n[1],
        d[2] + right * e[2] + up * n[2],
    ])
}

/// Inverse of [`nfov_pixel_ray`]: the continuous raster point at which `d`
/// appears. Returns `None` when `d` lies behind the camera.
///
/// Points outside the raster are returned as-is (they are off-screen).
pub fn nfov_project(cam: &CameraModel, principal: Direction, d: Direction) -> Option<(f64, f64)> {
    let v = d.unit_vector();
    let axis = principal.unit_vector();
    let depth = dot(v, axis);
    if depth <= 0.0 {
        return None;
    }
    let (e, n) = principal.tangent_frame();
    Some(cam.raster_coords(dot(v, e) / depth, dot(v, n) / depth))
}

/// Continuous equirectangular pixel coordinates of a direction.
pub fn sphere_to_equirect_px(width: u32, height: u32, d: Direction) -> (f64, f64) {
    (
        d.phi / 360.0 * width as f64,
        (90.0 - d.theta) / 180.0 * height as f64,
    )
}

/// Inverse of [`sphere_to_equirect_px`]. `y` is clamped to the raster.
pub fn equirect_px_to_sphere(width: u32, height: u32, x: f64, y: f64) -> Direction {
    let theta = 90.0 - y / height as f64 * 180.0;
    Direction::clamped(theta, x / width as f64 * 360.0)
}

/// Points along the border of the NFOV raster, `samples_per_edge` per edge,
/// clockwise from the top-left corner, mapped into equirectangular pixels.
pub fn fov_boundary_points(
    cam: &CameraModel,
    principal: Direction,
    samples_per_edge: usize,
    equirect_width: u32,
    equirect_height: u32,
) -> Result<Vec<(f64, f64)>> {
    if samples_per_edge < 2 {
        return Err(Error::InvalidParameter(format!(
            "samples_per_edge must be >= 2, got {samples_per_edge}"
        )));
    }
    let (w, h) = (cam.width as f64, cam.height as f64);
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let mut points = Vec::with_capacity(4 * samples_per_edge);
    for (k, &(x0, y0)) in corners.iter().enumerate() {
        let (x1, y1) = corners[(k + 1) % 4];
        for i in 0..samples_per_edge {
            let s = i as f64 / samples_per_edge as f64;
            let ray = nfov_pixel_ray(cam, principal, (x0 + s * (x1 - x0), y0 + s * (y1 - y0)))?;
            points.push(sphere_to_equirect_px(equirect_width, equirect_height, ray));
        }
    }
    Ok(points)
}

/// Backprojected outline of the camera frame on an equirectangular display.
///
/// The closed border is split into polylines wherever consecutive points jump
/// across the `φ = 0/360` seam, so each segment can be drawn without a
/// horizontal streak across the panorama.
pub fn fov_outline(
    cam: &CameraModel,
    principal: Direction,
    samples_per_edge: usize,
    equirect_width: u32,
    equirect_height: u32,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let points = fov_boundary_points(cam, principal, samples_per_edge, equirect_width, equirect_height)?;
    let half = equirect_width as f64 / 2.0;
    let mut segments: Vec<Vec<(f64, f64)>> = vec![vec![points[0]]];
    for &p in points.iter().skip(1).chain(std::iter::once(&points[0])) {
        let last = *segments.last().and_then(|s| s.last()).expect("non-empty");
        if (p.0 - last.0).abs() > half {
            segments.push(vec![p]);
        } else {
            segments.last_mut().expect("non-empty").push(p);
        }
    }
    if segments.len() > 1 {
        // The closing edge continues the first polyline.
        let tail = segments.pop().expect("non-empty");
        let head = std::mem::take(&mut segments[0]);
        segments[0] = tail.into_iter().chain(head.into_iter().skip(1)).collect();
    }
    Ok(segments)
}
