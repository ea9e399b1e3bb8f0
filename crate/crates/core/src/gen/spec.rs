use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::ChartType;
use crate::raster::Rgb;

/// Mark palette. Every channel lies in 0x10..=0xF0, so each color differs
/// from white and black in all three channels.
pub const PALETTE: [(&str, Rgb); 12] = [
    ("blue", Rgb([0x1F, 0x77, 0xB4])),
    ("orange", Rgb([0xEE, 0x7F, 0x10])),
    ("green", Rgb([0x2C, 0xA0, 0x2C])),
    ("red", Rgb([0xD6, 0x27, 0x28])),
    ("purple", Rgb([0x94, 0x67, 0xBD])),
    ("brown", Rgb([0x8C, 0x56, 0x4B])),
    ("pink", Rgb([0xE3, 0x77, 0xC2])),
    ("gray", Rgb([0x7F, 0x7F, 0x7F])),
    ("olive", Rgb([0xBC, 0xBD, 0x22])),
    ("cyan", Rgb([0x17, 0xBE, 0xCF])),
    ("teal", Rgb([0x20, 0x8C, 0x8C])),
    ("gold", Rgb([0xDA, 0xA5, 0x20])),
];

pub const BACKGROUND: Rgb = Rgb::WHITE;
pub const INK: Rgb = Rgb::BLACK;

/// Palette name of an exact palette color.
pub fn color_name(color: Rgb) -> Option<&'static str> {
    PALETTE.iter().find(|(_, c)| *c == color).map(|(n, _)| *n)
}

/// Palette color for a name, case-insensitive.
pub fn named_color(name: &str) -> Option<Rgb> {
    let name = name.trim().to_ascii_lowercase();
    let name = if name == "grey" {
        "gray".to_string()
    } else {
        name
    };
    PALETTE.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub color: Rgb,
    pub values: Vec<f64>,
    /// Scatter only: x coordinates paired with `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub title: String,
    pub x_title: String,
    pub y_title: String,
    #[serde(default)]
    pub legend_title: String,
    /// x-axis labels for bar/line, slice labels for pie, empty for scatter.
    pub categories: Vec<String>,
    pub series: Vec<Series>,
    /// Pie only: one fill per category.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slice_colors: Vec<Rgb>,
    pub rng_seed: u64,
    pub width: u32,
    pub height: u32,
}

impl ChartSpec {
    /// Legend is drawn for pies, for multi-series charts, and whenever a
    /// legend title is given.
    pub fn has_legend(&self) -> bool {
        self.chart_type == ChartType::Pie || self.series.len() >= 2 || !self.legend_title.is_empty()
    }

    /// Colors that paint marks, in legend order.
    pub fn mark_colors(&self) -> Vec<Rgb> {
        if self.chart_type == ChartType::Pie {
            self.slice_colors.clone()
        } else {
            self.series.iter().map(|s| s.color).collect()
        }
    }

    /// Legend entry labels paired with swatch colors.
    pub fn legend_entries(&self) -> Vec<(String, Rgb)> {
        if !self.has_legend() {
            return Vec::new();
        }
        if self.chart_type == ChartType::Pie {
            self.categories
                .iter()
                .cloned()
                .zip(self.slice_colors.iter().copied())
                .collect()
        } else {
            self.series
                .iter()
                .map(|s| (s.label.clone(), s.color))
                .collect()
        }
    }

    pub fn mark_count(&self) -> usize {
        match self.chart_type {
            ChartType::Bar => self.categories.len() * self.series.len(),
            ChartType::Line => self.series.len(),
            ChartType::Pie => self.categories.len(),
            ChartType::Scatter => self.series.iter().map(|s| s.values.len()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.chart_id.is_empty() {
            return bad("empty chart_id".into());
        }
        if self.width < 64 || self.height < 64 {
            return bad(format!("canvas {}x{} below 64x64", self.width, self.height));
        }
        if self.series.is_empty() {
            return bad("no series".into());
        }
        for s in &self.series {
            if s.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return bad(format!(
                    "series `{}` has a negative or non-finite value",
                    s.label
                ));
            }
        }
        match self.chart_type {
            ChartType::Bar | ChartType::Line => {
                if self.categories.is_empty() {
                    return bad("no categories".into());
                }
                for s in &self.series {
                    if s.values.len() != self.categories.len() {
                        return bad(format!(
                            "series `{}` has {} values for {} categories",
                            s.label,
                            s.values.len(),
                            self.categories.len()
                        ));
                    }
                    if s.xs.is_some() {
                        return bad("xs is only valid for scatter".into());
                    }
                }
                if self.chart_type == ChartType::Line && self.categories.len() < 2 {
                    return bad("line chart needs at least two categories".into());
                }
            }
            ChartType::Pie => {
                if self.series.len() != 1 {
                    return bad("pie needs exactly one series".into());
                }
                let values = &self.series[0].values;
                if values.len() != self.categories.len() || values.len() < 2 {
                    return bad("pie needs one value per category and at least two".into());
                }
                let total: f64 = values.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("pie shares sum to {total}"));
                }
                if self.slice_colors.len() != values.len() {
                    return bad("pie needs one slice color per category".into());
                }
            }
            ChartType::Scatter => {
                for s in &self.series {
                    match &s.xs {
                        Some(xs) if xs.len() == s.values.len() => {
                            if xs.iter().any(|v| !v.is_finite() || *v < 0.0) {
                                return bad(format!("series `{}` has a bad x", s.label));
                            }
                        }
                        _ => return bad(format!("series `{}` needs xs matching values", s.label)),
                    }
                    if s.values.is_empty() {
                        return bad(format!("series `{}` is empty", s.label));
                    }
                }
            }
        }
        if self.chart_type != ChartType::Pie && !self.slice_colors.is_empty() {
            return bad("slice_colors is only valid for pie".into());
        }
        let colors = self.mark_colors();
        let distinct: BTreeSet<Rgb> = colors.iter().copied().collect();
        if distinct.len() != colors.len() {
            return bad("mark colors are not pairwise distinct".into());
        }
        for c in &colors {
            if c.0.iter().any(|&v| v == BACKGROUND.0[0] || v == INK.0[0]) {
                return bad(format!(
                    "color {} shares a channel with background or ink",
                    c.hex()
                ));
            }
        }
        let entries = self.legend_entries();
        let labels: BTreeSet<&str> = entries.iter().map(|(l, _)| l.as_str()).collect();
        if labels.len() != entries.len() {
            return bad("legend labels are not unique".into());
        }
        let cats: BTreeSet<&String> = self.categories.iter().collect();
        if cats.len() != self.categories.len() {
            return bad("categories are not unique".into());
        }
        let texts = [
            &self.title,
            &self.x_title,
            &self.y_title,
            &self.legend_title,
        ];
        for t in texts.iter().copied().chain(self.categories.iter()) {
            if !crate::font::supports(t) {
                return bad(format!(
                    "text `{t}` uses characters outside printable ASCII"
                ));
            }
        }
        Ok(())
    }
}
