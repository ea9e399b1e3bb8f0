use std::collections::HashMap;

use crate::raster::{BBox, RasterImage, Rgb};

/// An 8-connected region of identical color.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub color: Rgb,
    pub bbox: BBox,
    pub area: usize,
}

impl Component {
    pub fn fill_ratio(&self) -> f64 {
        self.area as f64 / self.bbox.area().max(1) as f64
    }

    /// Long side over short side.
    pub fn aspect(&self) -> f64 {
        let (w, h) = (
            self.bbox.width().max(1) as f64,
            self.bbox.height().max(1) as f64,
        );
        w.max(h) / w.min(h)
    }
}

const NEIGHBORS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Labels 8-connected regions over pixels where `member` holds; pixels of
/// one region share a `key`. Returns the label per pixel (`u32::MAX` for
/// non-members) and the regions in scan order of their first pixel.
pub fn label_regions<K: PartialEq + Copy>(
    width: u32,
    height: u32,
    key: impl Fn(i32, i32) -> Option<K>,
) -> (Vec<u32>, Vec<(K, BBox, usize)>) {
    let (w, h) = (width as i32, height as i32);
    let mut labels = vec![u32::MAX; (w * h) as usize];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if labels[idx] != u32::MAX {
                continue;
            }
            let Some(k) = key(x, y) else { continue };
            let id = regions.len() as u32;
            labels[idx] = id;
            stack.push((x, y));
            let mut bbox = BBox::empty();
            let mut area = 0;
            while let Some((cx, cy)) = stack.pop() {
                bbox.include(cx, cy);
                area += 1;
                for (dx, dy) in NEIGHBORS {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let n = (ny * w + nx) as usize;
                    if labels[n] == u32::MAX && key(nx, ny) == Some(k) {
                        labels[n] = id;
                        stack.push((nx, ny));
                    }
                }
            }
            regions.push((k, bbox, area));
        }
    }
    (labels, regions)
}

/// Exact-color components of every pixel that is neither `background`
/// nor black.
pub fn color_components(img: &RasterImage, background: Rgb) -> Vec<Component> {
    let (_, regions) = label_regions(img.width(), img.height(), |x, y| {
        let c = img.get(x as u32, y as u32);
        (c != background && c != Rgb::BLACK).then_some(c)
    });
    regions
        .into_iter()
        .map(|(color, bbox, area)| Component { color, bbox, area })
        .collect()
}

/// Modal color of the 3-px border frame.
pub fn detect_background(img: &RasterImage) -> Rgb {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let mut counts: HashMap<Rgb, usize> = HashMap::new();
    for y in 0..h {
        for x in 0..w {
            if x < 3 || y < 3 || x >= w - 3 || y >= h - 3 {
                *counts.entry(img.get(x as u32, y as u32)).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
        .unwrap_or(Rgb::WHITE)
}

/// Axis lines found as the longest black runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axes {
    pub axis_x: i32,
    pub axis_y: i32,
    pub top: i32,
    pub right: i32,
}

impl Axes {
    pub fn plot_box(&self) -> BBox {
        BBox::new(self.axis_x, self.top, self.right + 1, self.axis_y + 1)
    }

    pub fn is_axis_pixel(&self, x: i32, y: i32) -> bool {
        (x == self.axis_x && (self.top..=self.axis_y).contains(&y))
            || (y == self.axis_y && (self.axis_x..=self.right).contains(&x))
    }
}

pub const MIN_AXIS_RUN: i32 = 60;

fn longest_run(len: i32, is_ink: impl Fn(i32) -> bool) -> (i32, i32) {
    let (mut best, mut best_start) = (0, 0);
    let mut start = None;
    for i in 0..=len {
        let ink = i < len && is_ink(i);
        match (ink, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best {
                    best = i - s;
                    best_start = s;
                }
                start = None;
            }
            _ => {}
        }
    }
    (best_start, best)
}

/// Finds a vertical and a horizontal black run of at least
/// [`MIN_AXIS_RUN`] pixels meeting at the plot origin.
pub fn find_axes(img: &RasterImage) -> Option<Axes> {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let black = |x: i32, y: i32| img.get(x as u32, y as u32) == Rgb::BLACK;
    let mut vertical = (0, 0, 0);
    for x in 0..w {
        let (s, n) = longest_run(h, |y| black(x, y));
        if n > vertical.2 {
            vertical = (x, s, n);
        }
    }
    let mut horizontal = (0, 0, 0);
    for y in 0..h {
        let (s, n) = longest_run(w, |x| black(x, y));
        if n > horizontal.2 {
            horizontal = (y, s, n);
        }
    }
    if vertical.2 < MIN_AXIS_RUN || horizontal.2 < MIN_AXIS_RUN {
        return None;
    }
    Some(Axes {
        axis_x: vertical.0,
        axis_y: horizontal.0,
        top: vertical.1,
        right: horizontal.1 + horizontal.2 - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_image_has_white_background() {
        let img = RasterImage::new(64, 64, Rgb::WHITE);
        assert_eq!(detect_background(&img), Rgb::WHITE);
        assert!(find_axes(&img).is_none());
        assert!(color_components(&img, Rgb::WHITE).is_empty());
    }

    #[test]
    fn frame_mode_matches_brute_force_count() {
        let mut img = RasterImage::new(80, 70, Rgb::WHITE);
        let red = Rgb([200, 30, 30]);
        img.fill_rect(BBox::new(0, 0, 80, 3), red);
        img.fill_rect(BBox::new(0, 67, 80, 70), red);
        img.fill_rect(BBox::new(0, 0, 3, 70), red);
        // Red covers the whole frame.
        let mut red_n = 0;
        let mut white_n = 0;
        for y in 0..70 {
            for x in 0..80 {
                if x < 3 || y < 3 || x >= 77 || y >= 67 {
                    if img.get(x, y) == red {
                        red_n += 1
                    } else {
                        white_n += 1
                    }
                }
            }
        }
        assert!(red_n > white_n);
        assert_eq!(detect_background(&img), red);
    }

    #[test]
    fn components_split_by_color_and_gap() {
        let mut img = RasterImage::new(64, 64, Rgb::WHITE);
        let a = Rgb([10 + 20, 100, 200]);
        let b = Rgb([200, 100, 30]);
        img.fill_rect(BBox::new(5, 5, 15, 25), a);
        img.fill_rect(BBox::new(15, 5, 25, 25), b);
        img.fill_rect(BBox::new(40, 40, 47, 47), a);
        let comps = color_components(&img, Rgb::WHITE);
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0].bbox, BBox::new(5, 5, 15, 25));
        assert_eq!(comps[0].area, 200);
        assert_eq!(comps[2].fill_ratio(), 1.0);
    }

    #[test]
    fn axes_are_the_long_black_runs() {
        let mut img = RasterImage::new(200, 150, Rgb::WHITE);
        for y in 20..=120 {
            img.set(30, y, Rgb::BLACK);
        }
        for x in 30..=180 {
            img.set(x, 120, Rgb::BLACK);
        }
        let axes = find_axes(&img).unwrap();
        assert_eq!(
            axes,
            Axes {
                axis_x: 30,
                axis_y: 120,
                top: 20,
                right: 180
            }
        );
        assert_eq!(axes.plot_box(), BBox::new(30, 20, 181, 121));
    }
}
