//! Trajectory similarity against human edits, annotator consistency, and
//! classifier-based comparisons with human-captured video.

mod classifier;
mod humanedit;
mod report;
mod similarity;

pub use classifier::{
    distinguishability, humancam_likeness, transferability, Distinguishability, Likeness, OneVsRest, DEFAULT_FOLDS,
};
pub use humanedit::{
    consistency_report, evaluate_humanedit, humanedit_report, humanedit_scores, HumanAnnotation, HumanEditConfig,
    HumanEditScores, HumanEditSummary, DEFAULT_COMPARISON_FPS, HUMANEDIT_COLUMNS,
};
pub use report::{MetricReport, ReportRow};
pub use similarity::{
    framewise_similarity, overlap_from_angle, pool, resample, Pooling, SimilarityKind, SimilarityMeasure,
};
