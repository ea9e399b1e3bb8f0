use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::build::insights::{spec_insights, InsightRecord};
use crate::error::{Error, Result};
use crate::font::{self, CELL_H};
use crate::gen::spec::{ChartSpec, BACKGROUND, INK};
use crate::kg::ChartType;
use crate::raster::{BBox, RasterImage, Rgb};
use crate::role::Role;

pub const MARGIN: i32 = 10;
pub const PLOT_TOP: i32 = 44;
pub const TITLE_Y: i32 = 10;
pub const LEGEND_ROW: i32 = 22;
pub const SWATCH: i32 = 10;
/// Line and scatter data stay this far inside the axes.
pub const INSET: i32 = 10;
pub const POINT: i32 = 7;

pub fn round_half_up(v: f64) -> i32 {
    (v + 0.5).floor() as i32
}

/// Smallest of 1, 2, 2.5, 5 times a power of ten that is at least `m`.
pub fn nice_max(m: f64) -> f64 {
    if m <= 0.0 {
        return 1.0;
    }
    let mut p = 10f64.powf(m.log10().floor() - 1.0);
    loop {
        for f in [1.0, 2.0, 2.5, 5.0] {
            if f * p >= m - 1e-12 {
                return f * p;
            }
        }
        p *= 10.0;
    }
}

/// Number text with at most two decimals and no trailing zeros.
pub fn format_tick(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextPlacement {
    pub role: Role,
    pub text: String,
    /// Top-left of the first cell, or of the whole block when rotated.
    pub x: i32,
    pub y: i32,
    pub rotated: bool,
    pub series_index: Option<usize>,
    pub category_index: Option<usize>,
}

impl TextPlacement {
    /// Image coordinates of every ink pixel.
    pub fn pixels(&self) -> Vec<(i32, i32)> {
        let w = font::text_width(&self.text);
        font::ink_pixels(&self.text)
            .into_iter()
            .map(|(u, v)| {
                if self.rotated {
                    (self.x + v, self.y + w - 1 - u)
                } else {
                    (self.x + u, self.y + v)
                }
            })
            .collect()
    }

    /// Box of the character cells.
    pub fn cell_box(&self) -> BBox {
        let w = font::text_width(&self.text);
        if self.rotated {
            BBox::new(self.x, self.y, self.x + CELL_H, self.y + w)
        } else {
            BBox::new(self.x, self.y, self.x + w, self.y + CELL_H)
        }
    }

    pub fn ink_box(&self) -> BBox {
        let mut b = BBox::empty();
        for (x, y) in self.pixels() {
            b.include(x, y);
        }
        b
    }
}

/// Axis frame of bar, line, and scatter charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFrame {
    /// Column of the y axis.
    pub axis_x: i32,
    /// Row of the x axis.
    pub axis_y: i32,
    pub top: i32,
    /// Last column of the x axis.
    pub right: i32,
    pub y_max: f64,
    pub x_max: f64,
}

impl AxisFrame {
    pub fn plot_box(&self) -> BBox {
        BBox::new(self.axis_x, self.top, self.right + 1, self.axis_y + 1)
    }

    pub fn bar_height(&self, v: f64) -> i32 {
        round_half_up(v / self.y_max * (self.axis_y - self.top - INSET) as f64)
    }

    /// Image row of `v` for line and scatter charts.
    pub fn inset_row(&self, v: f64) -> i32 {
        self.axis_y
            - INSET
            - round_half_up(v / self.y_max * (self.axis_y - self.top - 2 * INSET) as f64)
    }

    pub fn inset_col(&self, x: f64) -> i32 {
        self.axis_x
            + INSET
            + round_half_up(x / self.x_max * (self.right - self.axis_x - 2 * INSET) as f64)
    }

    pub fn slot(&self, n: usize) -> f64 {
        (self.right - self.axis_x - 10) as f64 / n as f64
    }

    pub fn category_center(&self, n: usize, c: usize) -> i32 {
        self.axis_x + 5 + round_half_up(self.slot(n) * (c as f64 + 0.5))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarGeom {
    pub series: usize,
    pub category: usize,
    pub rect: BBox,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineGeom {
    pub series: usize,
    pub color: Rgb,
    pub vertices: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointGeom {
    pub series: usize,
    pub index: usize,
    pub rect: BBox,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceGeom {
    pub category: usize,
    pub color: Rgb,
    pub start_deg: f64,
    pub end_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieGeom {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub slices: Vec<SliceGeom>,
}

impl PieGeom {
    /// Slice position of pixel `(x, y)`, measured at the pixel center
    /// clockwise from twelve o'clock.
    pub fn slice_at(&self, x: i32, y: i32) -> Option<usize> {
        let dx = x as f64 + 0.5 - self.cx;
        let dy = y as f64 + 0.5 - self.cy;
        if dx * dx + dy * dy > self.r * self.r {
            return None;
        }
        let mut a = dx.atan2(-dy).to_degrees();
        if a < 0.0 {
            a += 360.0;
        }
        let k = self
            .slices
            .iter()
            .position(|s| a >= s.start_deg && a < s.end_deg)
            .unwrap_or(self.slices.len() - 1);
        Some(k)
    }

    pub fn bounds(&self) -> BBox {
        BBox::new(
            (self.cx - self.r).floor() as i32,
            (self.cy - self.r).floor() as i32,
            (self.cx + self.r).ceil() as i32 + 1,
            (self.cy + self.r).ceil() as i32 + 1,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendGeom {
    pub index: usize,
    pub swatch: BBox,
    pub color: Rgb,
}

/// Complete geometry of one chart; a pure function of its spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub width: u32,
    pub height: u32,
    pub frame: Option<AxisFrame>,
    pub texts: Vec<TextPlacement>,
    pub bars: Vec<BarGeom>,
    pub lines: Vec<LineGeom>,
    pub points: Vec<PointGeom>,
    pub pie: Option<PieGeom>,
    pub legend: Vec<LegendGeom>,
}

fn centered(role: Role, text: &str, cx: i32, y: i32) -> TextPlacement {
    TextPlacement {
        role,
        text: text.to_string(),
        x: cx - font::text_width(text) / 2,
        y,
        rotated: false,
        series_index: None,
        category_index: None,
    }
}

fn check_width(text: &str, avail: i32) -> Result<()> {
    let w = font::text_width(text);
    if w > avail {
        return Err(Error::TextTooWide {
            text: text.to_string(),
            width: w as u32,
        });
    }
    Ok(())
}

/// Pixels of a 2-px polyline, rasterized column by column. Sorted, unique.
pub fn polyline_pixels(vertices: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mut set = BTreeSet::new();
    for w in vertices.windows(2) {
        let ((xa, ya), (xb, yb)) = (w[0], w[1]);
        if xb <= xa {
            continue;
        }
        let at = |x: f64| ya as f64 + (yb - ya) as f64 * (x - xa as f64) / (xb - xa) as f64;
        for x in xa..=xb {
            let l = at((x as f64 - 0.5).max(xa as f64));
            let r = at((x as f64 + 0.5).min(xb as f64));
            let lo = round_half_up(l.min(r));
            let hi = round_half_up(l.max(r));
            for y in lo - 1..=hi {
                set.insert((x, y));
            }
        }
    }
    set.into_iter().collect()
}

impl Layout {
    pub fn compute(spec: &ChartSpec) -> Result<Layout> {
        spec.validate()?;
        let w = spec.width as i32;
        let h = spec.height as i32;
        let mut texts = Vec::new();
        if !spec.title.is_empty() {
            check_width(&spec.title, w - 2 * MARGIN)?;
            texts.push(centered(Role::Title, &spec.title, w / 2, TITLE_Y));
        }

        let entries = spec.legend_entries();
        let mut legend = Vec::new();
        let mut content_right = w - 20;
        if spec.has_legend() {
            let label_w = entries
                .iter()
                .map(|(l, _)| font::text_width(l))
                .max()
                .unwrap_or(0);
            let lw = (16 + label_w).max(font::text_width(&spec.legend_title));
            let lx = w - MARGIN - lw;
            let mut y = PLOT_TOP;
            if !spec.legend_title.is_empty() {
                texts.push(TextPlacement {
                    role: Role::LegendTitle,
                    text: spec.legend_title.clone(),
                    x: lx,
                    y,
                    rotated: false,
                    series_index: None,
                    category_index: None,
                });
                y += LEGEND_ROW;
            }
            let pie = spec.chart_type == ChartType::Pie;
            for (k, (label, color)) in entries.iter().enumerate() {
                legend.push(LegendGeom {
                    index: k,
                    swatch: BBox::new(lx, y + 1, lx + SWATCH, y + 1 + SWATCH),
                    color: *color,
                });
                texts.push(TextPlacement {
                    role: Role::LegendLabel,
                    text: label.clone(),
                    x: lx + 16,
                    y,
                    rotated: false,
                    series_index: (!pie).then_some(k),
                    category_index: pie.then_some(k),
                });
                y += LEGEND_ROW;
            }
            if y > h - MARGIN {
                return Err(Error::InvalidSpec(
                    "legend does not fit the canvas height".into(),
                ));
            }
            content_right = lx - 24;
        }

        let mut layout = Layout {
            width: spec.width,
            height: spec.height,
            frame: None,
            texts,
            bars: Vec::new(),
            lines: Vec::new(),
            points: Vec::new(),
            pie: None,
            legend,
        };

        if spec.chart_type == ChartType::Pie {
            if !spec.x_title.is_empty() || !spec.y_title.is_empty() {
                return Err(Error::InvalidSpec("pie charts carry no axis titles".into()));
            }
            let rw = content_right - MARGIN;
            let rh = h - MARGIN - PLOT_TOP;
            let r = (rw.min(rh) / 2 - 2) as f64;
            if r < 20.0 {
                return Err(Error::InvalidSpec("canvas too small for a pie".into()));
            }
            let cx = (MARGIN + content_right) as f64 / 2.0;
            let cy = (PLOT_TOP + h - MARGIN) as f64 / 2.0;
            let mut start = 0.0;
            let values = &spec.series[0].values;
            let mut slices = Vec::new();
            for (k, v) in values.iter().enumerate() {
                let end = if k + 1 == values.len() {
                    360.0
                } else {
                    start + v * 360.0
                };
                slices.push(SliceGeom {
                    category: k,
                    color: spec.slice_colors[k],
                    start_deg: start,
                    end_deg: end,
                });
                start = end;
            }
            layout.pie = Some(PieGeom { cx, cy, r, slices });
            return Ok(layout);
        }

        let scatter = spec.chart_type == ChartType::Scatter;
        let y_data_max = spec
            .series
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .fold(0.0, f64::max);
        let y_max = nice_max(y_data_max);
        let x_max = if scatter {
            nice_max(
                spec.series
                    .iter()
                    .flat_map(|s| s.xs.iter().flatten().copied())
                    .fold(0.0, f64::max),
            )
        } else {
            1.0
        };
        let y_ticks = [0.0, y_max / 2.0, y_max];
        let y_tick_texts: Vec<String> = y_ticks.iter().map(|t| format_tick(*t)).collect();
        let ylab_w = y_tick_texts
            .iter()
            .map(|t| font::text_width(t))
            .max()
            .unwrap_or(0);
        let axis_x = MARGIN + CELL_H + 16 + ylab_w + 6;
        let axis_y = h - 58;
        let frame = AxisFrame {
            axis_x,
            axis_y,
            top: PLOT_TOP,
            right: content_right,
            y_max,
            x_max,
        };
        if frame.right - frame.axis_x < 60 || frame.axis_y - frame.top < 60 {
            return Err(Error::InvalidSpec(
                "canvas too small for the plot area".into(),
            ));
        }
        layout.frame = Some(frame);

        for (t, text) in y_ticks.iter().zip(&y_tick_texts) {
            let row = if spec.chart_type == ChartType::Bar {
                axis_y - frame.bar_height(*t)
            } else {
                frame.inset_row(*t)
            };
            layout.texts.push(TextPlacement {
                role: Role::YAxisLabel,
                text: text.clone(),
                x: axis_x - 6 - font::text_width(text),
                y: row - CELL_H / 2,
                rotated: false,
                series_index: None,
                category_index: None,
            });
        }
        if !spec.y_title.is_empty() {
            let tw = font::text_width(&spec.y_title);
            if tw > axis_y - PLOT_TOP + 20 {
                return Err(Error::TextTooWide {
                    text: spec.y_title.clone(),
                    width: tw as u32,
                });
            }
            layout.texts.push(TextPlacement {
                role: Role::YAxisTitle,
                text: spec.y_title.clone(),
                x: MARGIN,
                y: (PLOT_TOP + axis_y) / 2 - tw / 2,
                rotated: true,
                series_index: None,
                category_index: None,
            });
        }
        if !spec.x_title.is_empty() {
            check_width(&spec.x_title, w - 2 * MARGIN)?;
            let cx = (axis_x + frame.right) / 2;
            layout
                .texts
                .push(centered(Role::XAxisTitle, &spec.x_title, cx, axis_y + 36));
        }

        if scatter {
            for t in [0.0, x_max / 2.0, x_max] {
                let mut p = centered(
                    Role::XAxisLabel,
                    &format_tick(t),
                    frame.inset_col(t),
                    axis_y + 8,
                );
                p.category_index = None;
                layout.texts.push(p);
            }
            for (s, series) in spec.series.iter().enumerate() {
                let xs = series.xs.as_ref().expect("validated");
                for (i, (x, y)) in xs.iter().zip(&series.values).enumerate() {
                    let cx = frame.inset_col(*x);
                    let cy = frame.inset_row(*y);
                    layout.points.push(PointGeom {
                        series: s,
                        index: i,
                        rect: BBox::new(cx - 3, cy - 3, cx + 4, cy + 4),
                        color: series.color,
                    });
                }
            }
            return Ok(layout);
        }

        let n = spec.categories.len();
        for (c, label) in spec.categories.iter().enumerate() {
            let mut p = centered(
                Role::XAxisLabel,
                label,
                frame.category_center(n, c),
                axis_y + 8,
            );
            p.category_index = Some(c);
            layout.texts.push(p);
        }
        let slot = frame.slot(n);
        if spec.chart_type == ChartType::Bar {
            let k = spec.series.len() as i32;
            let bw = ((slot * 0.7) as i32 / k).min(40);
            if bw < 1 {
                return Err(Error::InvalidSpec("bars narrower than one pixel".into()));
            }
            for c in 0..n {
                let cx = frame.category_center(n, c);
                let x0 = cx - k * bw / 2;
                for (s, series) in spec.series.iter().enumerate() {
                    let bh = frame.bar_height(series.values[c]);
                    if bh < 1 {
                        return Err(Error::InvalidSpec(format!(
                            "value {} of `{}` renders to zero height",
                            series.values[c], series.label
                        )));
                    }
                    let bx = x0 + s as i32 * bw;
                    layout.bars.push(BarGeom {
                        series: s,
                        category: c,
                        rect: BBox::new(bx, axis_y - bh, bx + bw, axis_y),
                        color: series.color,
                    });
                }
            }
        } else {
            for (s, series) in spec.series.iter().enumerate() {
                let vertices = series
                    .values
                    .iter()
                    .enumerate()
                    .map(|(c, v)| (frame.category_center(n, c), frame.inset_row(*v)))
                    .collect();
                layout.lines.push(LineGeom {
                    series: s,
                    color: series.color,
                    vertices,
                });
            }
        }
        Ok(layout)
    }

    /// Soft layout problems that make a chart ambiguous to read back.
    /// The corpus sampler rejects specs with any issue.
    pub fn quality_issues(&self, spec: &ChartSpec) -> Vec<String> {
        let mut issues = Vec::new();
        if let Some(frame) = &self.frame {
            let n = spec.categories.len();
            if n > 0 {
                let slot = frame.slot(n);
                for t in self.texts.iter().filter(|t| t.role == Role::XAxisLabel) {
                    if font::text_width(&t.text) as f64 > slot - 24.0 {
                        issues.push(format!("x label `{}` crowds its slot", t.text));
                    }
                }
            }
            if let Some(xt) = self.texts.iter().find(|t| t.role == Role::XAxisTitle) {
                if xt.cell_box().width() > frame.right - frame.axis_x {
                    issues.push("x title wider than the plot".into());
                }
            }
        }
        let heights: BTreeSet<i32> = self.bars.iter().map(|b| b.rect.height()).collect();
        if heights.len() != self.bars.len() {
            issues.push("two bars share a height".into());
        }
        if self
            .bars
            .iter()
            .any(|b| b.rect.width() < 6 || b.rect.height() < 4)
        {
            issues.push("bar too small".into());
        }
        for line in &self.lines {
            for w in line.vertices.windows(2) {
                let dx = (w[1].0 - w[0].0).max(1);
                if (w[1].1 - w[0].1).abs() > 4 * dx {
                    issues.push(format!("series {} too steep", line.series));
                }
            }
        }
        let vertices: Vec<(usize, i32, i32)> = self
            .lines
            .iter()
            .flat_map(|l| l.vertices.iter().map(move |v| (l.series, v.0, v.1)))
            .collect();
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                if a.0 != b.0 && a.1 == b.1 && (a.2 - b.2).abs() < 14 {
                    issues.push("series vertices too close".into());
                }
                if (a.2 - b.2).abs() < 2 {
                    issues.push("two vertices share a row".into());
                }
            }
        }
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                if (a.rect.x0 - b.rect.x0).abs() < POINT + 2
                    && (a.rect.y0 - b.rect.y0).abs() < POINT + 2
                {
                    issues.push("points too close".into());
                }
            }
        }
        if let Some(pie) = &self.pie {
            if pie
                .slices
                .iter()
                .any(|s| s.end_deg - s.start_deg < 18.0 - 1e-9)
            {
                issues.push("slice below 5%".into());
            }
        }
        issues.sort();
        issues.dedup();
        issues
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedElement {
    pub role: Role,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Rgb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub width: u32,
    pub height: u32,
    pub elements: Vec<AnnotatedElement>,
    pub data: ChartSpec,
    pub insights_truth: Vec<InsightRecord>,
}

impl Annotation {
    pub fn of_role(&self, role: Role) -> impl Iterator<Item = &AnnotatedElement> {
        self.elements.iter().filter(move |e| e.role == role)
    }

    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }
}

fn paint_layout(layout: &Layout) -> RasterImage {
    let mut img = RasterImage::new(layout.width, layout.height, BACKGROUND);
    for b in &layout.bars {
        img.fill_rect(b.rect, b.color);
    }
    for p in &layout.points {
        img.fill_rect(p.rect, p.color);
    }
    if let Some(pie) = &layout.pie {
        let b = pie.bounds();
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                if let Some(k) = pie.slice_at(x, y) {
                    img.put(x, y, pie.slices[k].color);
                }
            }
        }
    }
    for line in &layout.lines {
        for (x, y) in polyline_pixels(&line.vertices) {
            img.put(x, y, line.color);
        }
    }
    if let Some(f) = &layout.frame {
        for y in f.top..=f.axis_y {
            img.put(f.axis_x, y, INK);
        }
        for x in f.axis_x..=f.right {
            img.put(x, f.axis_y, INK);
        }
    }
    for t in &layout.texts {
        for (x, y) in t.pixels() {
            img.put(x, y, INK);
        }
    }
    for l in &layout.legend {
        img.fill_rect(l.swatch, l.color);
    }
    img
}

/// Box of all pixels of `color` inside `region`.
pub fn color_box(img: &RasterImage, region: BBox, color: Rgb) -> BBox {
    let mut b = BBox::empty();
    let r = region.intersection(&img.bounds());
    for y in r.y0..r.y1 {
        for x in r.x0..r.x1 {
            if img.get(x as u32, y as u32) == color {
                b.include(x, y);
            }
        }
    }
    b
}

pub fn render_chart(spec: &ChartSpec) -> Result<(RasterImage, Annotation)> {
    let layout = Layout::compute(spec)?;
    let img = paint_layout(&layout);
    let mut elements = Vec::new();
    for t in &layout.texts {
        elements.push(AnnotatedElement {
            role: t.role,
            bbox: t.ink_box(),
            text: Some(t.text.clone()),
            color: None,
            series_index: t.series_index,
            category_index: t.category_index,
        });
    }
    let pie_kind = spec.chart_type == ChartType::Pie;
    for l in &layout.legend {
        elements.push(AnnotatedElement {
            role: Role::LegendMark,
            bbox: l.swatch,
            text: None,
            color: Some(l.color),
            series_index: (!pie_kind).then_some(l.index),
            category_index: pie_kind.then_some(l.index),
        });
    }
    if let Some(f) = &layout.frame {
        elements.push(AnnotatedElement {
            role: Role::PlotArea,
            bbox: f.plot_box(),
            text: None,
            color: None,
            series_index: None,
            category_index: None,
        });
        for b in &layout.bars {
            elements.push(AnnotatedElement {
                role: Role::Mark,
                bbox: b.rect,
                text: None,
                color: Some(b.color),
                series_index: Some(b.series),
                category_index: Some(b.category),
            });
        }
        for l in &layout.lines {
            elements.push(AnnotatedElement {
                role: Role::Mark,
                bbox: color_box(&img, f.plot_box(), l.color),
                text: None,
                color: Some(l.color),
                series_index: Some(l.series),
                category_index: None,
            });
        }
        for p in &layout.points {
            elements.push(AnnotatedElement {
                role: Role::Mark,
                bbox: p.rect,
                text: None,
                color: Some(p.color),
                series_index: Some(p.series),
                category_index: Some(p.index),
            });
        }
    }
    if let Some(pie) = &layout.pie {
        let region = pie.bounds();
        let mut all = BBox::empty();
        for s in &pie.slices {
            let b = color_box(&img, region, s.color);
            all = all.union(&b);
            elements.push(AnnotatedElement {
                role: Role::Mark,
                bbox: b,
                text: None,
                color: Some(s.color),
                series_index: Some(0),
                category_index: Some(s.category),
            });
        }
        elements.insert(
            elements.len() - pie.slices.len(),
            AnnotatedElement {
                role: Role::PlotArea,
                bbox: all,
                text: None,
                color: None,
                series_index: None,
                category_index: None,
            },
        );
    }
    let annotation = Annotation {
        chart_id: spec.chart_id.clone(),
        chart_type: spec.chart_type,
        width: spec.width,
        height: spec.height,
        elements,
        data: spec.clone(),
        insights_truth: spec_insights(spec, &Default::default()),
    };
    Ok((img, annotation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::spec::{Series, PALETTE};

    fn bar() -> ChartSpec {
        ChartSpec {
            chart_id: "bar-t".into(),
            chart_type: ChartType::Bar,
            title: "Savings in 2010".into(),
            x_title: "Country".into(),
            y_title: "Savings".into(),
            legend_title: String::new(),
            categories: vec!["Chile".into(), "Peru".into(), "Kenya".into()],
            series: vec![Series {
                label: "2010".into(),
                color: PALETTE[0].1,
                values: vec![5.0, 9.0, 2.0],
                xs: None,
            }],
            slice_colors: vec![],
            rng_seed: 1,
            width: 400,
            height: 300,
        }
    }

    fn pie() -> ChartSpec {
        ChartSpec {
            chart_id: "pie-t".into(),
            chart_type: ChartType::Pie,
            title: "Browser share".into(),
            x_title: String::new(),
            y_title: String::new(),
            legend_title: "Browser".into(),
            categories: vec!["Chrome".into(), "Safari".into(), "Edge".into()],
            series: vec![Series {
                label: "share".into(),
                color: PALETTE[0].1,
                values: vec![0.55, 0.30, 0.15],
                xs: None,
            }],
            slice_colors: PALETTE[..3].iter().map(|p| p.1).collect(),
            rng_seed: 1,
            width: 400,
            height: 300,
        }
    }

    #[test]
    fn nice_max_picks_round_ceilings() {
        assert_eq!(nice_max(9.0), 10.0);
        assert_eq!(nice_max(10.0), 10.0);
        assert_eq!(nice_max(11.0), 20.0);
        assert_eq!(nice_max(0.37), 0.5);
        assert_eq!(nice_max(2100.0), 2500.0);
        assert_eq!(format_tick(12.5), "12.5");
        assert_eq!(format_tick(100.0), "100");
    }

    #[test]
    fn bar_annotation_counts_follow_spec() {
        let (img, ann) = render_chart(&bar()).unwrap();
        assert_eq!(img.width(), 400);
        assert_eq!(ann.of_role(Role::Mark).count(), 3);
        assert_eq!(ann.of_role(Role::XAxisLabel).count(), 3);
        for role in [Role::Title, Role::XAxisTitle, Role::YAxisTitle] {
            assert_eq!(ann.of_role(role).count(), 1, "{role}");
        }
        assert_eq!(ann.of_role(Role::LegendMark).count(), 0);
        for e in &ann.elements {
            assert!(e.bbox.within(400, 300), "{e:?}");
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = render_chart(&bar()).unwrap();
        let b = render_chart(&bar()).unwrap();
        assert_eq!(a.0.encode_png().unwrap(), b.0.encode_png().unwrap());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn pie_majority_slice_spans_198_degrees() {
        let layout = Layout::compute(&pie()).unwrap();
        let s = &layout.pie.unwrap().slices[0];
        assert!((s.end_deg - s.start_deg - 198.0).abs() < 1e-9);
        let (_, ann) = render_chart(&pie()).unwrap();
        assert_eq!(ann.of_role(Role::Mark).count(), 3);
        assert_eq!(ann.of_role(Role::LegendLabel).count(), 3);
    }

    #[test]
    fn polyline_is_two_pixels_thick_when_flat() {
        let px = polyline_pixels(&[(0, 10), (5, 10)]);
        assert_eq!(px.len(), 12);
        assert!(px.iter().all(|&(_, y)| y == 9 || y == 10));
    }

    #[test]
    fn rotated_text_reads_bottom_to_top() {
        let t = TextPlacement {
            role: Role::YAxisTitle,
            text: "AB".into(),
            x: 0,
            y: 0,
            rotated: true,
            series_index: None,
            category_index: None,
        };
        assert_eq!(t.cell_box(), BBox::new(0, 0, 12, 16));
        // 'A' occupies the lower half of the block.
        let a_rows: Vec<i32> = font::ink_pixels("A")
            .iter()
            .map(|&(u, _)| 16 - 1 - u)
            .collect();
        assert!(a_rows.iter().all(|&y| y >= 8));
    }
}
