use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::kg::ChartType;
use crate::parse::components::{
    color_components, detect_background, find_axes, label_regions, Axes, Component,
};
use crate::raster::{BBox, RasterImage, Rgb};

/// Colored blob of any mix of non-background, non-ink colors.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub bbox: BBox,
    pub area: usize,
    pub colors: usize,
}

/// Image analysis shared by classification, detection, and mark parsing.
#[derive(Debug, Clone)]
pub struct Scene {
    pub background: Rgb,
    pub axes: Option<Axes>,
    pub components: Vec<Component>,
}

/// A pie needs a blob with at least this many pixels.
pub const MIN_PIE_AREA: usize = 1000;

impl Scene {
    pub fn analyze(img: &RasterImage) -> Scene {
        let background = detect_background(img);
        Scene {
            background,
            axes: find_axes(img),
            components: color_components(img, background),
        }
    }

    pub fn plot_box(&self) -> Option<BBox> {
        self.axes.map(|a| a.plot_box())
    }

    /// Components lying entirely inside `region`.
    pub fn inside(&self, region: BBox) -> impl Iterator<Item = &Component> {
        self.components
            .iter()
            .filter(move |c| c.bbox.intersection(&region) == c.bbox)
    }

    /// Largest colored blob, counting touching components of different
    /// colors as one.
    pub fn largest_blob(&self, img: &RasterImage) -> Option<Blob> {
        let bg = self.background;
        let (labels, regions) = label_regions(img.width(), img.height(), |x, y| {
            let c = img.get(x as u32, y as u32);
            (c != bg && c != Rgb::BLACK).then_some(())
        });
        let (k, &(_, bbox, area)) = regions
            .iter()
            .enumerate()
            .max_by_key(|(k, r)| (r.2, std::cmp::Reverse(*k)))?;
        let w = img.width() as i32;
        let mut colors = BTreeSet::new();
        for y in bbox.y0..bbox.y1 {
            for x in bbox.x0..bbox.x1 {
                if labels[(y * w + x) as usize] == k as u32 {
                    colors.insert(img.get(x as u32, y as u32));
                }
            }
        }
        Some(Blob {
            bbox,
            area,
            colors: colors.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vote {
    Bar,
    Scatter,
    Line,
}

fn vote(c: &Component, axes: &Axes) -> Option<Vote> {
    let (fill, aspect) = (c.fill_ratio(), c.aspect());
    if fill >= 0.9 && c.bbox.width() >= 5 && c.bbox.y1 == axes.axis_y {
        Some(Vote::Bar)
    } else if (16..=200).contains(&c.area) && aspect <= 2.0 && fill >= 0.8 {
        Some(Vote::Scatter)
    } else if fill <= 0.35 || aspect >= 8.0 {
        Some(Vote::Line)
    } else {
        None
    }
}

/// Scatter plots need at least this many compact components.
pub const MIN_SCATTER_POINTS: usize = 5;

pub fn classify_scene(img: &RasterImage, scene: &Scene) -> Result<(ChartType, f64)> {
    let Some(axes) = scene.axes else {
        return match scene.largest_blob(img) {
            Some(b) if b.colors >= 2 && b.area >= MIN_PIE_AREA => Ok((ChartType::Pie, 1.0)),
            _ => Err(Error::UnclassifiableChart),
        };
    };
    let marks: Vec<&Component> = scene.inside(axes.plot_box()).collect();
    if marks.is_empty() {
        return Err(Error::UnclassifiableChart);
    }
    let votes: Vec<Option<Vote>> = marks.iter().map(|c| vote(c, &axes)).collect();
    let count = |v: Vote| votes.iter().filter(|x| **x == Some(v)).count();
    let mut ranked = [
        (count(Vote::Bar), ChartType::Bar),
        (count(Vote::Scatter), ChartType::Scatter),
        (count(Vote::Line), ChartType::Line),
    ];
    // Stable sort keeps bar > scatter > line on equal votes.
    ranked.sort_by_key(|r| std::cmp::Reverse(r.0));
    for (n, ct) in ranked {
        if n == 0 || (ct == ChartType::Scatter && n < MIN_SCATTER_POINTS) {
            continue;
        }
        return Ok((ct, n as f64 / marks.len() as f64));
    }
    Err(Error::UnclassifiableChart)
}

/// Chart type and the fraction of mark components agreeing with it.
pub fn classify_chart(img: &RasterImage) -> Result<(ChartType, f64)> {
    classify_scene(img, &Scene::analyze(img))
}
