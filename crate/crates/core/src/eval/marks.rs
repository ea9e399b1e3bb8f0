use serde::{Deserialize, Serialize};

use crate::gen::render::Layout;
use crate::kg::ChartType;
use crate::parse::ParseResult;

/// Worst absolute deviation of parsed mark values from the rendered
/// geometry of one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkAccuracy {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub compared: usize,
    /// Truth marks with no parsed counterpart.
    pub unmatched: usize,
    /// Pixels for bars, vertices and points; degrees for slices.
    pub max_error: f64,
    /// Pie only: sum of parsed slice angles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_sum: Option<f64>,
}

/// Pie slices narrower than this are exempt from the angle tolerance.
pub const MIN_SCORED_SLICE: f64 = 10.0;

pub fn mark_accuracy(pr: &ParseResult, layout: &Layout, chart_type: ChartType) -> MarkAccuracy {
    let mut acc = MarkAccuracy {
        chart_id: pr.chart_id.clone(),
        chart_type,
        compared: 0,
        unmatched: 0,
        max_error: 0.0,
        angle_sum: None,
    };
    let mut record = |err: Option<f64>| match err {
        Some(e) => {
            acc.compared += 1;
            acc.max_error = acc.max_error.max(e);
        }
        None => acc.unmatched += 1,
    };
    let same_type = pr.chart_type == chart_type;
    match (chart_type, layout.frame) {
        (ChartType::Bar, Some(_)) => {
            for b in &layout.bars {
                let err = pr
                    .marks
                    .iter()
                    .filter(|m| same_type && m.color == b.color)
                    .map(|m| {
                        (
                            (m.bbox.x0 - b.rect.x0).abs(),
                            (m.value - b.rect.height() as f64).abs(),
                        )
                    })
                    .min_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)))
                    .map(|x| x.1);
                record(err);
            }
        }
        (ChartType::Line, Some(frame)) => {
            for l in &layout.lines {
                for (i, (_, y)) in l.vertices.iter().enumerate() {
                    let err = pr
                        .marks
                        .iter()
                        .find(|m| same_type && m.color == l.color && m.index == i)
                        .map(|m| ((frame.axis_y as f64 - m.value) - *y as f64).abs());
                    record(err);
                }
            }
        }
        (ChartType::Scatter, Some(frame)) => {
            for p in &layout.points {
                let (cx, cy) = p.rect.center();
                let err = pr
                    .marks
                    .iter()
                    .filter(|m| same_type && m.color == p.color)
                    .map(|m| {
                        let x = frame.axis_x as f64
                            + m.aux.as_ref().and_then(|a| a.x).unwrap_or(f64::NAN);
                        let y = frame.axis_y as f64 - m.value;
                        (x - cx).abs().max((y - cy).abs())
                    })
                    .min_by(f64::total_cmp);
                record(err);
            }
        }
        (ChartType::Pie, _) => {
            if let Some(pie) = &layout.pie {
                for s in &pie.slices {
                    let truth = s.end_deg - s.start_deg;
                    let m = pr.marks.iter().find(|m| same_type && m.color == s.color);
                    match m {
                        Some(m) if truth >= MIN_SCORED_SLICE => {
                            record(Some((m.value - truth).abs()))
                        }
                        Some(_) => {}
                        None => record(None),
                    }
                }
            }
            if same_type {
                acc.angle_sum = Some(pr.marks.iter().map(|m| m.value).sum());
            }
        }
        _ => {}
    }
    acc
}
