//! Scoring of detections, text recognition, mark values, graphs and
//! answers against generator ground truth.

pub mod detection;
pub mod kg_diff;
pub mod marks;
pub mod ocr;
pub mod qa;

pub use detection::{
    detection_metrics, detections_of, iou, truths_of, ClassMetrics, Detection, DetectionReport,
    GroundTruth, IOU_THRESHOLDS,
};
pub use kg_diff::{kg_diff, KgDiffReport, Prf};
pub use marks::{mark_accuracy, MarkAccuracy};
pub use ocr::{align_texts, normalized_edit_distance, ocr_accuracy, OcrReport, TextPair};
pub use qa::{qa_accuracy, QaPrediction, QaReport};

/// Median of a sample; 0 when empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}
