use std::collections::BTreeMap;

use crate::kg::ChartType;
use crate::parse::classify::Scene;
use crate::parse::components::{label_regions, Axes};
use crate::parse::ocr::Rotation;
use crate::parse::DetectedElement;
use crate::raster::{BBox, RasterImage, Rgb};
use crate::role::Role;

/// Text pixels closer than this merge into one piece.
pub const DILATION: i32 = 2;
/// x-axis labels start within this many rows below the plot.
pub const X_LABEL_BAND: i32 = 26;
/// y-axis labels end within this many columns left of the plot.
pub const Y_LABEL_BAND: i32 = 16;
/// Pieces of one x-axis label sit at most this far apart.
pub const WORD_GAP: i32 = 18;
/// A legend title sits at most this far above the first swatch.
pub const LEGEND_TITLE_GAP: i32 = 24;

fn dilate(mask: &[bool], w: i32, h: i32, r: i32) -> Vec<bool> {
    let mut horiz = vec![false; mask.len()];
    for y in 0..h {
        for x in 0..w {
            if mask[(y * w + x) as usize] {
                for dx in (x - r).max(0)..=(x + r).min(w - 1) {
                    horiz[(y * w + dx) as usize] = true;
                }
            }
        }
    }
    let mut out = vec![false; mask.len()];
    for y in 0..h {
        for x in 0..w {
            if horiz[(y * w + x) as usize] {
                for dy in (y - r).max(0)..=(y + r).min(h - 1) {
                    out[(dy * w + x) as usize] = true;
                }
            }
        }
    }
    out
}

/// Ink boxes of black text pieces, found on the dilated non-axis ink.
pub fn text_pieces(img: &RasterImage, axes: Option<&Axes>) -> Vec<BBox> {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let mut ink = vec![false; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let axis = axes.is_some_and(|a| a.is_axis_pixel(x, y));
            ink[(y * w + x) as usize] = !axis && img.get(x as u32, y as u32) == Rgb::BLACK;
        }
    }
    let grown = dilate(&ink, w, h, DILATION);
    let (labels, regions) = label_regions(img.width(), img.height(), |x, y| {
        grown[(y * w + x) as usize].then_some(())
    });
    let mut boxes = vec![BBox::empty(); regions.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if ink[i] {
                boxes[labels[i] as usize].include(x, y);
            }
        }
    }
    boxes.retain(|b| !b.is_empty());
    boxes
}

fn union_all(pieces: &[BBox]) -> BBox {
    pieces.iter().fold(BBox::empty(), |a, b| a.union(b))
}

/// Groups pieces whose row spans overlap, top to bottom.
fn rows(mut pieces: Vec<BBox>) -> Vec<Vec<BBox>> {
    pieces.sort_by_key(|b| (b.y0, b.x0));
    let mut out: Vec<(i32, Vec<BBox>)> = Vec::new();
    for p in pieces {
        match out.last_mut() {
            Some((bottom, row)) if p.y0 < *bottom => {
                *bottom = (*bottom).max(p.y1);
                row.push(p);
            }
            _ => out.push((p.y1, vec![p])),
        }
    }
    out.into_iter().map(|(_, r)| r).collect()
}

/// Splits one row into words at gaps wider than `gap`.
fn words(mut row: Vec<BBox>, gap: i32) -> Vec<BBox> {
    row.sort_by_key(|b| (b.x0, b.y0));
    let mut out: Vec<BBox> = Vec::new();
    for p in row {
        match out.last_mut() {
            Some(last) if p.x0 - last.x1 <= gap => *last = last.union(&p),
            _ => out.push(p),
        }
    }
    out
}

fn text(role: Role, bbox: BBox) -> DetectedElement {
    let mut e = DetectedElement::new(role, bbox, 1.0);
    if role == Role::YAxisTitle {
        e.rotation = Rotation::Ccw90;
    }
    e
}

fn group_by_color<'a>(
    comps: impl Iterator<Item = &'a crate::parse::Component>,
) -> BTreeMap<Rgb, BBox> {
    let mut out: BTreeMap<Rgb, BBox> = BTreeMap::new();
    for c in comps {
        let b = out.entry(c.color).or_insert_with(BBox::empty);
        *b = b.union(&c.bbox);
    }
    out
}

pub fn detect_in_scene(
    img: &RasterImage,
    scene: &Scene,
    chart_type: ChartType,
) -> Vec<DetectedElement> {
    let mut out = Vec::new();
    let framed = chart_type != ChartType::Pie;
    let axes = if framed { scene.axes } else { None };
    let plot = match (&axes, framed) {
        (Some(a), _) => a.plot_box(),
        (None, false) => scene.largest_blob(img).map_or(BBox::empty(), |b| b.bbox),
        (None, true) => BBox::empty(),
    };
    if !plot.is_empty() {
        out.push(DetectedElement::new(Role::PlotArea, plot, 1.0));
    }

    let mut swatches = Vec::new();
    for c in &scene.components {
        let inside = c.bbox.intersection(&plot) == c.bbox;
        if inside {
            continue;
        }
        let outside = c.bbox.intersection(&plot).is_empty();
        if outside && c.fill_ratio() >= 0.9 && c.aspect() <= 1.5 {
            swatches.push(c.clone());
            out.push(DetectedElement::new(Role::LegendMark, c.bbox, 1.0).with_color(c.color));
        } else {
            out.push(DetectedElement::new(Role::Unknown, c.bbox, 0.0).with_color(c.color));
        }
    }

    let marks = scene.inside(plot);
    match chart_type {
        ChartType::Bar | ChartType::Scatter => {
            for c in marks {
                out.push(DetectedElement::new(Role::Mark, c.bbox, 1.0).with_color(c.color));
            }
        }
        ChartType::Line | ChartType::Pie => {
            for (color, bbox) in group_by_color(marks) {
                out.push(DetectedElement::new(Role::Mark, bbox, 1.0).with_color(color));
            }
        }
    }

    let legend_x = swatches.iter().map(|s| s.bbox.x0).min();
    let legend_top = swatches
        .iter()
        .map(|s| s.bbox.y0)
        .min()
        .map(|y| y - LEGEND_TITLE_GAP);
    let mut legend = Vec::new();
    let (mut title, mut x_labels, mut x_title, mut y_labels, mut y_title) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for b in text_pieces(img, axes.as_ref()) {
        let in_legend =
            matches!((legend_x, legend_top), (Some(lx), Some(lt)) if b.x0 >= lx && b.y0 >= lt);
        if in_legend {
            legend.push(b);
        } else if !plot.is_empty() && b.y1 <= plot.y0 {
            title.push(b);
        } else if framed && !plot.is_empty() && b.y0 >= plot.y1 {
            if b.y0 < plot.y1 + X_LABEL_BAND {
                x_labels.push(b);
            } else {
                x_title.push(b);
            }
        } else if framed && !plot.is_empty() && b.x1 <= plot.x0 {
            if b.x1 >= plot.x0 - Y_LABEL_BAND {
                y_labels.push(b);
            } else {
                y_title.push(b);
            }
        } else {
            out.push(DetectedElement::new(Role::Unknown, b, 0.0));
        }
    }
    for (role, pieces) in [
        (Role::Title, &title),
        (Role::XAxisTitle, &x_title),
        (Role::YAxisTitle, &y_title),
    ] {
        if !pieces.is_empty() {
            out.push(text(role, union_all(pieces)));
        }
    }
    for row in rows(x_labels) {
        for w in words(row, WORD_GAP) {
            out.push(text(Role::XAxisLabel, w));
        }
    }
    for row in rows(y_labels) {
        out.push(text(Role::YAxisLabel, union_all(&row)));
    }
    for row in rows(legend) {
        let b = union_all(&row);
        let swatch = swatches
            .iter()
            .filter(|s| s.bbox.y0 < b.y1 && b.y0 < s.bbox.y1 && s.bbox.x1 <= b.x0)
            .min_by_key(|s| b.x0 - s.bbox.x1);
        match swatch {
            Some(s) => out.push(text(Role::LegendLabel, b).with_color(s.color)),
            None => out.push(text(Role::LegendTitle, b)),
        }
    }
    out.sort_by_key(|e| (e.role, e.bbox.y0, e.bbox.x0, e.bbox.y1, e.bbox.x1));
    out
}

/// Element roles and boxes by geometric rules relative to the plot area.
pub fn detect_elements(img: &RasterImage, chart_type: ChartType) -> Vec<DetectedElement> {
    detect_in_scene(img, &Scene::analyze(img), chart_type)
}
