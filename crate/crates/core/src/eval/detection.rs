use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::gen::render::Annotation;
use crate::parse::ParseResult;
use crate::raster::BBox;
use crate::role::Role;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub const IOU_THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

/// Intersection over union of two max-exclusive boxes. Zero-area boxes
/// score 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    if a.is_empty() || b.is_empty() {
        log::warn!("IoU of zero-area box {:?} / {:?}", a, b);
        return 0.0;
    }
    let inter = a.intersection(b).area() as f64;
    let union = (a.area() + b.area()) as f64 - inter;
    inter / union
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub chart_id: String,
    pub class: String,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub chart_id: String,
    pub class: String,
    pub bbox: BBox,
}

/// Scored detections of a parse; plot areas and unknown elements are not
/// evaluated.
pub fn detections_of(pr: &ParseResult) -> Vec<Detection> {
    pr.elements
        .iter()
        .filter(|e| !matches!(e.role, Role::Unknown | Role::PlotArea))
        .map(|e| Detection {
            chart_id: pr.chart_id.clone(),
            class: e.role.eval_class(pr.chart_type).to_string(),
            bbox: e.bbox,
            score: e.score,
        })
        .collect()
}

pub fn truths_of(ann: &Annotation) -> Vec<GroundTruth> {
    ann.elements
        .iter()
        .filter(|e| !matches!(e.role, Role::Unknown | Role::PlotArea))
        .map(|e| GroundTruth {
            chart_id: ann.chart_id.clone(),
            class: e.role.eval_class(ann.chart_type).to_string(),
            bbox: e.bbox,
        })
        .collect()
}

/// Outcome of matching one class at one IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// True-positive flags in descending score order.
    pub hits: Vec<bool>,
    pub truths: usize,
}

impl Matching {
    pub fn true_positives(&self) -> usize {
        self.hits.iter().filter(|h| **h).count()
    }

    pub fn precision(&self) -> f64 {
        if self.hits.is_empty() {
            0.0
        } else {
            self.true_positives() as f64 / self.hits.len() as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.truths == 0 {
            0.0
        } else {
            self.true_positives() as f64 / self.truths as f64
        }
    }

    /// Area under the all-point interpolated precision-recall curve.
    pub fn average_precision(&self) -> f64 {
        if self.truths == 0 {
            return 0.0;
        }
        let mut tp = 0usize;
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(self.hits.len());
        for (k, hit) in self.hits.iter().enumerate() {
            tp += usize::from(*hit);
            points.push((tp as f64 / self.truths as f64, tp as f64 / (k + 1) as f64));
        }
        // Precision envelope: max precision at any recall >= r.
        for k in (0..points.len().saturating_sub(1)).rev() {
            points[k].1 = points[k].1.max(points[k + 1].1);
        }
        let mut ap = 0.0;
        let mut prev_recall = 0.0;
        for (r, p) in points {
            ap += (r - prev_recall) * p;
            prev_recall = r;
        }
        ap
    }
}

/// Greedy matching in descending score order: each detection takes the
/// unmatched truth of its chart with the highest IoU at or above the
/// threshold. Ties in score keep input order.
pub fn match_class(dets: &[&Detection], truths: &[&GroundTruth], threshold: f64) -> Matching {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    let mut by_chart: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in truths.iter().enumerate() {
        by_chart.entry(t.chart_id.as_str()).or_default().push(i);
    }
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut hits = Vec::with_capacity(dets.len());
    for i in order {
        let d = dets[i];
        let best = by_chart
            .get(d.chart_id.as_str())
            .into_iter()
            .flatten()
            .filter(|t| !used.contains(t))
            .map(|&t| (t, iou(&d.bbox, &truths[t].bbox)))
            .filter(|(_, v)| *v >= threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((t, _)) => {
                used.insert(t);
                hits.push(true);
            }
            None => hits.push(false),
        }
    }
    Matching {
        hits,
        truths: truths.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub truths: usize,
    pub detections: usize,
    pub precision: f64,
    pub recall: f64,
    pub ap50: f64,
    pub ap50_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub classes: Vec<ClassMetrics>,
    pub map50: f64,
    pub map50_95: f64,
    /// Classes with detections but no truths.
    pub skipped: Vec<String>,
}

/// Per-class precision and recall at the first threshold, AP at IoU
/// 0.5, and AP averaged over all `thresholds`.
pub fn detection_metrics(
    dets: &[Detection],
    truths: &[GroundTruth],
    thresholds: &[f64],
) -> DetectionReport {
    let classes: BTreeSet<&str> = dets
        .iter()
        .map(|d| d.class.as_str())
        .chain(truths.iter().map(|t| t.class.as_str()))
        .collect();
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for class in classes {
        let d: Vec<&Detection> = dets.iter().filter(|d| d.class == class).collect();
        let t: Vec<&GroundTruth> = truths.iter().filter(|t| t.class == class).collect();
        if t.is_empty() {
            log::info!("class {class} has no ground truth; skipped");
            skipped.push(class.to_string());
            continue;
        }
        let first = match_class(&d, &t, thresholds.first().copied().unwrap_or(0.5));
        let ap50 = match_class(&d, &t, 0.5).average_precision();
        let ap50_95 = if thresholds.is_empty() {
            ap50
        } else {
            thresholds
                .iter()
                .map(|&th| match_class(&d, &t, th).average_precision())
                .sum::<f64>()
                / thresholds.len() as f64
        };
        out.push(ClassMetrics {
            class: class.to_string(),
            truths: t.len(),
            detections: d.len(),
            precision: first.precision(),
            recall: first.recall(),
            ap50,
            ap50_95,
        });
    }
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if out.is_empty() {
            0.0
        } else {
            out.iter().map(f).sum::<f64>() / out.len() as f64
        }
    };
    DetectionReport {
        map50: mean(|c| c.ap50),
        map50_95: mean(|c| c.ap50_95),
        classes: out,
        skipped,
    }
}

impl DetectionReport {
    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == name)
    }

    /// Aligned table: Class, Precision, Recall, mAP50, mAP50-95.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<14} {:>9} {:>9} {:>9} {:>9}\n",
            "Class", "Precision", "Recall", "mAP50", "mAP50-95"
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<14} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                c.class, c.precision, c.recall, c.ap50, c.ap50_95
            );
        }
        let _ = writeln!(
            s,
            "{:<14} {:>9} {:>9} {:>9.3} {:>9.3}",
            "all", "", "", self.map50, self.map50_95
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(b: [i32; 4], score: f64) -> Detection {
        Detection {
            chart_id: "c".into(),
            class: "bar".into(),
            bbox: b.into(),
            score,
        }
    }

    fn truth(b: [i32; 4]) -> GroundTruth {
        GroundTruth {
            chart_id: "c".into(),
            class: "bar".into(),
            bbox: b.into(),
        }
    }

    #[test]
    fn iou_of_half_overlapping_boxes() {
        let a = BBox::new(0, 0, 10, 10);
        let b = BBox::new(5, 0, 15, 10);
        assert!((iou(&a, &b) - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BBox::new(20, 20, 30, 30)), 0.0);
        assert_eq!(iou(&a, &BBox::new(3, 3, 3, 9)), 0.0);
    }

    #[test]
    fn perfect_detections_score_one() {
        let ts = vec![truth([0, 0, 10, 10]), truth([20, 0, 30, 10])];
        let ds = vec![det([0, 0, 10, 10], 1.0), det([20, 0, 30, 10], 1.0)];
        let r = detection_metrics(&ds, &ts, &IOU_THRESHOLDS);
        let c = r.class("bar").unwrap();
        assert_eq!(
            (c.precision, c.recall, c.ap50, c.ap50_95),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(r.map50, 1.0);
    }

    #[test]
    fn hand_computed_pr_curve() {
        // Three truths; detections ranked TP, FP, TP, FP, TP.
        let ts = [
            truth([0, 0, 10, 10]),
            truth([20, 0, 30, 10]),
            truth([40, 0, 50, 10]),
        ];
        let ds = [
            det([0, 0, 10, 10], 0.9),
            det([100, 0, 110, 10], 0.8),
            det([20, 0, 30, 10], 0.7),
            det([200, 0, 210, 10], 0.6),
            det([40, 0, 50, 10], 0.5),
        ];
        let m = match_class(
            &ds.iter().collect::<Vec<_>>(),
            &ts.iter().collect::<Vec<_>>(),
            0.5,
        );
        assert_eq!(m.hits, vec![true, false, true, false, true]);
        // Recall steps of 1/3 at precisions 1, 2/3, 3/5.
        let expected = (1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0;
        assert!((m.average_precision() - expected).abs() < 1e-12);
    }

    #[test]
    fn classes_without_truth_are_skipped() {
        let r = detection_metrics(&[det([0, 0, 1, 1], 1.0)], &[], &IOU_THRESHOLDS);
        assert!(r.classes.is_empty());
        assert_eq!(r.skipped, vec!["bar".to_string()]);
    }

    #[test]
    fn table_has_the_report_columns() {
        let r = detection_metrics(
            &[det([0, 0, 10, 10], 1.0)],
            &[truth([0, 0, 10, 10])],
            &IOU_THRESHOLDS,
        );
        let t = r.to_table();
        assert!(t.starts_with("Class"));
        assert!(t.contains("mAP50-95"));
        assert!(t.lines().nth(1).unwrap().starts_with("bar"));
    }
}
