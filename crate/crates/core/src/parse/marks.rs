use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::parse::{DetectedElement, LineSeries, MarkAux, MarkTuple};
use crate::raster::{BBox, RasterImage, Rgb};
use crate::role::Role;

/// Gradient magnitude, on a 0..1 intensity scale, that marks an edge.
pub const EDGE_THRESHOLD: f64 = 64.0 / 255.0;
/// Slice colors below this share of the pie are rendering noise.
pub const MIN_SLICE_SHARE: f64 = 0.005;
/// Columns searched on each side of an empty vertex column.
pub const VERTEX_SEARCH: i32 = 3;

/// Plot origin: the y-axis column and the x-axis row.
fn origin(elements: &[DetectedElement]) -> Option<(i32, i32)> {
    elements
        .iter()
        .find(|e| e.role == Role::PlotArea)
        .map(|e| (e.bbox.x0, e.bbox.y1 - 1))
}

fn marks_of(elements: &[DetectedElement]) -> Vec<&DetectedElement> {
    let mut marks: Vec<&DetectedElement> =
        elements.iter().filter(|e| e.role == Role::Mark).collect();
    marks.sort_by_key(|e| (e.bbox.x0, e.bbox.y0, e.bbox.x1, e.bbox.y1));
    marks
}

/// Most frequent color in `region` other than background and ink; ties go
/// to the smaller color.
pub fn modal_color(img: &RasterImage, region: BBox, background: Rgb) -> Option<Rgb> {
    let r = region.intersection(&img.bounds());
    let mut counts: BTreeMap<Rgb, usize> = BTreeMap::new();
    for y in r.y0..r.y1 {
        for x in r.x0..r.x1 {
            let c = img.get(x as u32, y as u32);
            if c != background && c != Rgb::BLACK {
                *counts.entry(c).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
}

/// Rank of each item within its color, ordered by `key`.
fn ranks_within_color<K: Ord + Copy>(items: &[(Rgb, K)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].0, items[i].1, i));
    let mut ranks = vec![0; items.len()];
    let mut next: HashMap<Rgb, usize> = HashMap::new();
    for i in order {
        let n = next.entry(items[i].0).or_default();
        ranks[i] = *n;
        *n += 1;
    }
    ranks
}

/// Bars: height from the box, index by left edge within each color.
pub fn parse_bar_marks(
    img: &RasterImage,
    elements: &[DetectedElement],
    background: Rgb,
) -> Result<Vec<MarkTuple>> {
    let marks = marks_of(elements);
    if marks.is_empty() {
        return Err(Error::EmptyChart);
    }
    let colors: Vec<(Rgb, (i32, i32))> = marks
        .iter()
        .map(|e| {
            let c = modal_color(img, e.bbox, background)
                .or(e.color)
                .unwrap_or(background);
            (c, (e.bbox.x0, e.bbox.y0))
        })
        .collect();
    let ranks = ranks_within_color(&colors);
    Ok(marks
        .iter()
        .enumerate()
        .map(|(k, e)| MarkTuple {
            mark_id: format!("bar{k}"),
            value: e.bbox.height() as f64,
            index: ranks[k],
            color: colors[k].0,
            bbox: e.bbox,
            aux: None,
        })
        .collect())
}

fn hsv_close(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    let dh = (a.0 - b.0).abs();
    dh.min(360.0 - dh) <= 2.0 && (a.1 - b.1).abs() <= 0.02 && (a.2 - b.2).abs() <= 0.02
}

/// Pixels of one line color: HSV mask, then central-difference edges.
struct LineMask {
    region: BBox,
    mask: Vec<bool>,
    edges: Vec<bool>,
}

impl LineMask {
    fn new(img: &RasterImage, region: BBox, color: Rgb) -> LineMask {
        let region = region.intersection(&img.bounds());
        let target = color.to_hsv();
        let (w, h) = (region.width().max(0), region.height().max(0));
        let mut mask = vec![false; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                let c = img.get((region.x0 + x) as u32, (region.y0 + y) as u32);
                mask[(y * w + x) as usize] = hsv_close(c.to_hsv(), target);
            }
        }
        let at = |x: i32, y: i32| -> f64 {
            if x < 0 || y < 0 || x >= w || y >= h {
                0.0
            } else if mask[(y * w + x) as usize] {
                1.0
            } else {
                0.0
            }
        };
        let mut edges = vec![false; mask.len()];
        for y in 0..h {
            for x in 0..w {
                let gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
                let gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
                let on = mask[(y * w + x) as usize];
                edges[(y * w + x) as usize] = on && (gx * gx + gy * gy).sqrt() >= EDGE_THRESHOLD;
            }
        }
        LineMask {
            region,
            mask,
            edges,
        }
    }

    fn column(&self, x: i32) -> Vec<i32> {
        let (w, h) = (self.region.width(), self.region.height());
        let u = x - self.region.x0;
        if u < 0 || u >= w {
            return Vec::new();
        }
        (0..h)
            .filter(|&v| self.mask[(v * w + u) as usize])
            .map(|v| self.region.y0 + v)
            .collect()
    }

    fn column_mean(&self, x: i32) -> Option<f64> {
        let ys = self.column(x);
        (!ys.is_empty()).then(|| ys.iter().sum::<i32>() as f64 / ys.len() as f64)
    }

    fn edge_columns(&self) -> Option<(i32, i32)> {
        let (w, h) = (self.region.width(), self.region.height());
        let cols: Vec<i32> = (0..w)
            .filter(|&u| (0..h).any(|v| self.edges[(v * w + u) as usize]))
            .collect();
        (cols.len() >= 2).then(|| {
            (
                self.region.x0 + cols[0],
                self.region.x0 + cols[cols.len() - 1],
            )
        })
    }

    fn bbox(&self) -> BBox {
        let w = self.region.width();
        let mut b = BBox::empty();
        for (i, on) in self.mask.iter().enumerate() {
            if *on {
                b.include(self.region.x0 + i as i32 % w, self.region.y0 + i as i32 / w);
            }
        }
        b
    }
}

/// Lines: one series per mark color, vertices sampled at the x-axis label
/// centers, start and end at the outermost edge columns.
pub fn parse_line_marks(
    img: &RasterImage,
    elements: &[DetectedElement],
) -> Result<(Vec<MarkTuple>, Vec<LineSeries>)> {
    let (axis_x, axis_y) = origin(elements).ok_or(Error::EmptyChart)?;
    let plot = elements
        .iter()
        .find(|e| e.role == Role::PlotArea)
        .map(|e| e.bbox)
        .ok_or(Error::EmptyChart)?;
    let mut colors: Vec<Rgb> = marks_of(elements).iter().filter_map(|e| e.color).collect();
    colors.sort_by_key(|c| c.hex());
    colors.dedup();
    if colors.is_empty() {
        return Err(Error::EmptyChart);
    }
    let mut columns: Vec<i32> = elements
        .iter()
        .filter(|e| e.role == Role::XAxisLabel)
        .map(|e| {
            let b = e.text_box.unwrap_or(e.bbox);
            (b.x0 + b.x1) / 2
        })
        .collect();
    columns.sort();
    let to_plot = |x: f64, y: f64| (x - axis_x as f64, axis_y as f64 - y);

    let mut tuples = Vec::new();
    let mut series = Vec::new();
    for (s, color) in colors.iter().enumerate() {
        let m = LineMask::new(img, plot, *color);
        let (first, last) = m
            .edge_columns()
            .ok_or_else(|| Error::DegenerateSeries(color.hex()))?;
        let start = to_plot(first as f64, m.column_mean(first).unwrap_or(0.0));
        let end = to_plot(last as f64, m.column_mean(last).unwrap_or(0.0));
        series.push(LineSeries {
            color: *color,
            start,
            end,
            bbox: m.bbox(),
        });
        for (i, &cx) in columns.iter().enumerate() {
            let found = std::iter::once(cx)
                .chain((1..=VERTEX_SEARCH).flat_map(|d| [cx - d, cx + d]))
                .find_map(|x| m.column_mean(x).map(|y| (x, y)));
            let Some((x, y)) = found else {
                log::warn!("series {} has no pixels near column {cx}", color.hex());
                continue;
            };
            let ys = m.column(x);
            tuples.push(MarkTuple {
                mark_id: format!("line{s}-p{i}"),
                value: axis_y as f64 - y,
                index: i,
                color: *color,
                bbox: BBox::new(x, ys[0], x + 1, ys[ys.len() - 1] + 1),
                aux: Some(MarkAux {
                    x: Some(x as f64 - axis_x as f64),
                    start: Some(start),
                    end: Some(end),
                }),
            });
        }
    }
    Ok((tuples, series))
}

/// Pie slices: angle from each color's pixel share of the pie region.
pub fn parse_pie_marks(
    img: &RasterImage,
    elements: &[DetectedElement],
    background: Rgb,
) -> Result<Vec<MarkTuple>> {
    let region = elements
        .iter()
        .find(|e| e.role == Role::PlotArea)
        .map(|e| e.bbox.intersection(&img.bounds()))
        .ok_or(Error::DegenerateChart)?;
    let mut counts: BTreeMap<Rgb, (usize, BBox)> = BTreeMap::new();
    for y in region.y0..region.y1 {
        for x in region.x0..region.x1 {
            let c = img.get(x as u32, y as u32);
            if c != background && c != Rgb::BLACK {
                let e = counts.entry(c).or_insert((0, BBox::empty()));
                e.0 += 1;
                e.1.include(x, y);
            }
        }
    }
    let all: usize = counts.values().map(|v| v.0).sum();
    counts.retain(|_, v| v.0 as f64 >= MIN_SLICE_SHARE * all as f64);
    if counts.len() < 2 {
        return Err(Error::DegenerateChart);
    }
    let total: usize = counts.values().map(|v| v.0).sum();
    let mut slices: Vec<(f64, Rgb, BBox)> = counts
        .into_iter()
        .map(|(c, (n, b))| (360.0 * n as f64 / total as f64, c, b))
        .collect();
    slices.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.hex().cmp(&b.1.hex())));
    Ok(slices
        .into_iter()
        .enumerate()
        .map(|(k, (deg, color, bbox))| MarkTuple {
            mark_id: format!("slice{k}"),
            value: deg,
            index: k,
            color,
            bbox,
            aux: None,
        })
        .collect())
}

/// Scatter points: box centers in plot coordinates, index by x within
/// each color.
pub fn parse_scatter_marks(
    img: &RasterImage,
    elements: &[DetectedElement],
    background: Rgb,
) -> Result<Vec<MarkTuple>> {
    let (axis_x, axis_y) = origin(elements).ok_or(Error::EmptyChart)?;
    let marks = marks_of(elements);
    if marks.is_empty() {
        return Err(Error::EmptyChart);
    }
    let keyed: Vec<(Rgb, (i32, i32))> = marks
        .iter()
        .map(|e| {
            let c = modal_color(img, e.bbox, background)
                .or(e.color)
                .unwrap_or(background);
            (c, (e.bbox.x0 + e.bbox.x1, e.bbox.y0 + e.bbox.y1))
        })
        .collect();
    let ranks = ranks_within_color(&keyed);
    Ok(marks
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (cx, cy) = e.bbox.center();
            MarkTuple {
                mark_id: format!("point{k}"),
                value: axis_y as f64 - cy,
                index: ranks[k],
                color: keyed[k].0,
                bbox: e.bbox,
                aux: Some(MarkAux {
                    x: Some(cx - axis_x as f64),
                    ..Default::default()
                }),
            }
        })
        .collect())
}
