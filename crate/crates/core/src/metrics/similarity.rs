//! Frame-wise similarity between camera trajectories and its pooling over
//! frames and over several reference trajectories.
//!
//! Everything is expressed as a similarity (higher is closer). Pooling a
//! distance with `min` therefore becomes pooling a similarity with `max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angular_distance, Direction, NFOV_HFOV_DEG};
use crate::trajectory::ContinuousTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    /// Cosine of the angle between principal axes.
    Cosine,
    /// `max(1 − ΔΩ / fov, 0)`, with `ΔΩ` the great-circle angle between axes.
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMeasure {
    pub kind: SimilarityKind,
    pub fov: f64,
}

impl SimilarityMeasure {
    pub fn cosine() -> Self {
        SimilarityMeasure {
            kind: SimilarityKind::Cosine,
            fov: NFOV_HFOV_DEG,
        }
    }

    pub fn overlap(fov: f64) -> Result<Self> {
        if !(fov > 0.0) {
            return Err(Error::InvalidParameter(format!("overlap fov must be positive, got {fov}")));
        }
        Ok(SimilarityMeasure {
            kind: SimilarityKind::Overlap,
            fov,
        })
    }

    pub fn between(&self, a: Direction, b: Direction) -> f64 {
        match self.kind {
            // Equal to the dot product of the unit axes; going through the
            // angle makes identical axes score exactly 1.
            SimilarityKind::Cosine => angular_distance(a, b).to_radians().cos(),
            SimilarityKind::Overlap => overlap_from_angle(angular_distance(a, b), self.fov),
        }
    }
}

/// Approximate field-of-view overlap of two cameras whose axes are
/// `delta` degrees apart.
pub fn overlap_from_angle(delta: f64, fov: f64) -> f64 {
    (1.0 - delta / fov).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Best single reference, judged on the mean over the whole video.
    Trajectory,
    /// Best reference chosen afresh at every frame, then averaged.
    Frame,
}

/// Per-frame similarity of two trajectories.
///
/// Trajectories whose lengths differ by one frame are aligned by sampling
/// the shorter one at the nearest frame; larger differences are an error.
pub fn framewise_similarity(a: &ContinuousTrajectory, b: &ContinuousTrajectory, m: &SimilarityMeasure) -> Result<Vec<f64>> {
    let (na, nb) = (a.len(), b.len());
    if na.abs_diff(nb) > 1 || na == 0 || nb == 0 {
        return Err(Error::LengthMismatch { a: na, b: nb });
    }
    let n = na.max(nb);
    let at = |t: &ContinuousTrajectory, i: usize| {
        let len = t.len();
        if len == n {
            t.directions[i]
        } else {
            t.directions[(((i as f64 + 0.5) * len as f64 / n as f64) as usize).min(len - 1)]
        }
    };
    Ok((0..n).map(|i| m.between(at(a, i), at(b, i))).collect())
}

/// Pooled similarity of a generated trajectory to a set of references.
pub fn pool(
    generated: &ContinuousTrajectory,
    references: &[ContinuousTrajectory],
    m: &SimilarityMeasure,
    pooling: Pooling,
) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::Empty("reference trajectories"));
    }
    let per_ref = references
        .iter()
        .map(|r| framewise_similarity(generated, r, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(match pooling {
        Pooling::Trajectory => per_ref
            .iter()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .fold(f64::NEG_INFINITY, f64::max),
        Pooling::Frame => {
            let n = per_ref.iter().map(Vec::len).min().expect("non-empty");
            (0..n)
                .map(|i| per_ref.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
                .sum::<f64>()
                / n as f64
        }
    })
}

/// Nearest-frame resampling of a trajectory to another frame rate, keeping
/// its duration.
pub fn resample(traj: &ContinuousTrajectory, fps: f64) -> Result<ContinuousTrajectory> {
    if traj.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let n = ((traj.duration() * fps).round() as usize).max(1);
    let directions = (0..n)
        .map(|i| {
            let src = ((i as f64 + 0.5) / fps * traj.fps) as usize;
            traj.directions[src.min(traj.len() - 1)]
        })
        .collect();
    ContinuousTrajectory::new(fps, directions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(theta: f64, phi: f64) -> Direction {
        Direction::new(theta, phi).unwrap()
    }

    fn constant(dir: Direction, n: usize) -> ContinuousTrajectory {
        ContinuousTrajectory::new(1.0, vec![dir; n]).unwrap()
    }

    #[test]
    fn identical_trajectories_score_one() {
        let t = ContinuousTrajectory::new(1.0, (0..20).map(|i| d(i as f64 - 10.0, 17.0 * i as f64)).collect()).unwrap();
        for m in [SimilarityMeasure::cosine(), SimilarityMeasure::overlap(65.5).unwrap()] {
            assert!(framewise_similarity(&t, &t, &m).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn orthogonal_axes() {
        let a = constant(d(0.0, 0.0), 5);
        let b = constant(d(0.0, 90.0), 5);
        let cos = framewise_similarity(&a, &b, &SimilarityMeasure::cosine()).unwrap();
        assert!(cos.iter().all(|v| v.abs() < 1e-15));
        let ov = framewise_similarity(&a, &b, &SimilarityMeasure::overlap(65.5).unwrap()).unwrap();
        assert!(ov.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_fov_overlap() {
        assert_eq!(overlap_from_angle(32.75, 65.5), 0.5);
        let a = constant(d(0.0, 100.0), 3);
        let b = constant(d(0.0, 132.75), 3);
        let ov = framewise_similarity(&a, &b, &SimilarityMeasure::overlap(65.5).unwrap()).unwrap();
        assert!(ov.iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(SimilarityMeasure::overlap(0.0).is_err());
    }

    #[test]
    fn off_by_one_lengths_are_aligned() {
        let a = constant(d(0.0, 0.0), 10);
        let b = constant(d(0.0, 0.0), 11);
        assert_eq!(framewise_similarity(&a, &b, &SimilarityMeasure::cosine()).unwrap().len(), 11);
        let c = constant(d(0.0, 0.0), 12);
        assert!(matches!(
            framewise_similarity(&a, &c, &SimilarityMeasure::cosine()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pooling_examples() {
        let gen = constant(d(0.0, 0.0), 10);
        let humans = [constant(d(0.0, 90.0), 10), gen.clone(), constant(d(45.0, 0.0), 10)];
        for p in [Pooling::Trajectory, Pooling::Frame] {
            assert!((pool(&gen, &humans, &SimilarityMeasure::cosine(), p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(pool(&gen, &[], &SimilarityMeasure::cosine(), Pooling::Frame).is_err());
    }

    #[test]
    fn split_match_toy_case() {
        // Human A matches the first half, human B the second; each is
        // orthogonal to the generated axis elsewhere.
        let gen = constant(d(0.0, 0.0), 10);
        let a = ContinuousTrajectory::new(1.0, (0..10).map(|i| if i < 5 { d(0.0, 0.0) } else { d(0.0, 90.0) }).collect()).unwrap();
        let b = ContinuousTrajectory::new(1.0, (0..10).map(|i| if i < 5 { d(90.0, 0.0) } else { d(0.0, 0.0) }).collect()).unwrap();
        let cos = SimilarityMeasure::cosine();
        assert!((pool(&gen, &[a.clone(), b.clone()], &cos, Pooling::Frame).unwrap() - 1.0).abs() < 1e-12);
        assert!((pool(&gen, &[a, b], &cos, Pooling::Trajectory).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resampling_keeps_duration() {
        let t = ContinuousTrajectory::new(30.0, (0..300).map(|i| d(0.0, i as f64)).collect()).unwrap();
        let r = resample(&t, 1.0).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r.directions[0].phi(), 15.0);
        assert_eq!(r.directions[9].phi(), 285.0);
    }

    fn arb_traj(n: usize) -> impl Strategy<Value = ContinuousTrajectory> {
        proptest::collection::vec((-90.0f64..=90.0, 0.0f64..360.0), n)
            .prop_map(|v| ContinuousTrajectory::new(1.0, v.into_iter().map(|(t, p)| d(t, p)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn frame_pooling_dominates(gen in arb_traj(8), humans in proptest::collection::vec(arb_traj(8), 1..5)) {
            for m in [SimilarityMeasure::cosine(), SimilarityMeasure::overlap(65.5).unwrap()] {
                let f = pool(&gen, &humans, &m, Pooling::Frame).unwrap();
                let t = pool(&gen, &humans, &m, Pooling::Trajectory).unwrap();
                prop_assert!(f >= t - 1e-12);
                let mut rev = humans.clone();
                rev.reverse();
                prop_assert!((pool(&gen, &rev, &m, Pooling::Frame).unwrap() - f).abs() < 1e-12);
                prop_assert!((pool(&gen, &rev, &m, Pooling::Trajectory).unwrap() - t).abs() < 1e-12);
            }
        }

        #[test]
        fn cosine_symmetric_overlap_bounded(a in arb_traj(6), b in arb_traj(6)) {
            let cos = SimilarityMeasure::cosine();
            prop_assert_eq!(framewise_similarity(&a, &b, &cos).unwrap(), framewise_similarity(&b, &a, &cos).unwrap());
            let ov = SimilarityMeasure::overlap(65.5).unwrap();
            for (v, (x, y)) in framewise_similarity(&a, &b, &ov).unwrap().into_iter().zip(a.directions.iter().zip(&b.directions)) {
                prop_assert!((0.0..=1.0).contains(&v));
                if angular_distance(*x, *y) >= 65.5 {
                    prop_assert_eq!(v, 0.0);
                }
            }
        }
    }
}
