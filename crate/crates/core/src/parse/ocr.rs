use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::font::{self, CELL_H, CELL_W};
use crate::raster::{BBox, RasterImage, Rgb};

/// Rotation the text was rendered with; 90 means counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    #[serde(rename = "0")]
    Upright,
    #[serde(rename = "90")]
    Ccw90,
}

impl Rotation {
    pub fn degrees(self) -> u32 {
        match self {
            Rotation::Upright => 0,
            Rotation::Ccw90 => 90,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextReading {
    pub text: String,
    pub confidence: f64,
    /// Character-cell grid the glyphs were read from, in image coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_box: Option<BBox>,
}

impl TextReading {
    pub fn empty() -> Self {
        TextReading {
            text: String::new(),
            confidence: 0.0,
            cell_box: None,
        }
    }
}

/// Cells differing from their nearest glyph in more pixels than this
/// read as `?`.
pub const MAX_MISMATCH: u32 = 12;
const CELL_PIXELS: f64 = (CELL_W * CELL_H) as f64;

fn glyph_table() -> &'static HashMap<[u8; 12], char> {
    static TABLE: OnceLock<HashMap<[u8; 12], char>> = OnceLock::new();
    TABLE.get_or_init(|| font::all_cells().map(|(c, r)| (r, c)).collect())
}

fn nearest_glyph(cell: &[u8; 12]) -> (char, u32) {
    font::all_cells()
        .map(|(c, rows)| {
            let d: u32 = rows
                .iter()
                .zip(cell)
                .map(|(a, b)| (a ^ b).count_ones())
                .sum();
            (c, d)
        })
        .min_by_key(|&(c, d)| (d, c))
        .expect("font is non-empty")
}

struct Upright {
    w: i32,
    h: i32,
    ink: Vec<bool>,
}

impl Upright {
    fn at(&self, u: i32, v: i32) -> bool {
        u >= 0 && v >= 0 && u < self.w && v < self.h && self.ink[(v * self.w + u) as usize]
    }
}

struct Candidate {
    text: String,
    exact: usize,
    mismatch: u32,
    contribution: f64,
    cells: i32,
    gx: i32,
    gy: i32,
}

fn read_grid(up: &Upright, gx: i32, gy: i32, ux1: i32) -> Candidate {
    let n = (ux1 - gx + CELL_W - 1) / CELL_W;
    let table = glyph_table();
    let mut text = String::new();
    let (mut exact, mut mismatch, mut contribution) = (0, 0, 0.0);
    for i in 0..n {
        let mut cell = [0u8; 12];
        for (r, row) in cell.iter_mut().enumerate() {
            for c in 0..CELL_W {
                if up.at(gx + i * CELL_W + c, gy + r as i32) {
                    *row |= 1 << c;
                }
            }
        }
        if let Some(&ch) = table.get(&cell) {
            text.push(ch);
            exact += 1;
            contribution += 1.0;
            continue;
        }
        let (ch, d) = nearest_glyph(&cell);
        mismatch += d;
        if d <= MAX_MISMATCH {
            text.push(ch);
            contribution += 1.0 - d as f64 / CELL_PIXELS;
        } else {
            text.push('?');
        }
    }
    Candidate {
        text,
        exact,
        mismatch,
        contribution,
        cells: n,
        gx,
        gy,
    }
}

/// Reads black text inside `bbox` by aligning the font's cell grid to the
/// ink and matching each cell against every glyph.
pub fn read_text(img: &RasterImage, bbox: BBox, rotation: Rotation) -> TextReading {
    let r = bbox.intersection(&img.bounds());
    if r.is_empty() {
        return TextReading::empty();
    }
    let black = |x: i32, y: i32| img.get(x as u32, y as u32) == Rgb::BLACK;
    let (w, h) = match rotation {
        Rotation::Upright => (r.width(), r.height()),
        Rotation::Ccw90 => (r.height(), r.width()),
    };
    let mut ink = vec![false; (w * h) as usize];
    let (mut ux0, mut uy0, mut ux1, mut uy1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for v in 0..h {
        for u in 0..w {
            let on = match rotation {
                Rotation::Upright => black(r.x0 + u, r.y0 + v),
                Rotation::Ccw90 => black(r.x0 + v, r.y1 - 1 - u),
            };
            if on {
                ink[(v * w + u) as usize] = true;
                ux0 = ux0.min(u);
                uy0 = uy0.min(v);
                ux1 = ux1.max(u + 1);
                uy1 = uy1.max(v + 1);
            }
        }
    }
    if ux0 == i32::MAX {
        return TextReading::empty();
    }
    let up = Upright { w, h, ink };
    // Glyph ink starts on cell row 2 for capitals and digits; try that first.
    let top_rows = [2, 3, 4, 5, 6, 7, 8, 9, 1, 0, 10, 11];
    let mut best: Option<Candidate> = None;
    'search: for top in top_rows {
        let gy = uy0 - top;
        if uy1 > gy + CELL_H {
            continue;
        }
        for left in 0..CELL_W {
            let cand = read_grid(&up, ux0 - left, gy, ux1);
            let perfect = cand.exact as i32 == cand.cells;
            let better = best.as_ref().is_none_or(|b| {
                (cand.exact, std::cmp::Reverse(cand.mismatch))
                    > (b.exact, std::cmp::Reverse(b.mismatch))
            });
            if better {
                best = Some(cand);
            }
            if perfect {
                break 'search;
            }
        }
    }
    let Some(best) = best else {
        return TextReading::empty();
    };
    let n = best.cells;
    let cell_box = match rotation {
        Rotation::Upright => BBox::new(
            r.x0 + best.gx,
            r.y0 + best.gy,
            r.x0 + best.gx + n * CELL_W,
            r.y0 + best.gy + CELL_H,
        ),
        Rotation::Ccw90 => BBox::new(
            r.x0 + best.gy,
            r.y1 - best.gx - n * CELL_W,
            r.x0 + best.gy + CELL_H,
            r.y1 - best.gx,
        ),
    };
    TextReading {
        confidence: best.contribution / n.max(1) as f64,
        text: best.text,
        cell_box: Some(cell_box),
    }
}

/// Text and confidence of the region; `("", 0.0)` when it holds no ink.
pub fn recognize_text(img: &RasterImage, bbox: BBox, rotation: Rotation) -> (String, f64) {
    let r = read_text(img, bbox, rotation);
    (r.text, r.confidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::render::TextPlacement;
    use crate::role::Role;

    fn draw(text: &str, rotated: bool, x: i32, y: i32) -> (RasterImage, TextPlacement) {
        let mut img = RasterImage::new(320, 200, Rgb::WHITE);
        let t = TextPlacement {
            role: Role::Title,
            text: text.into(),
            x,
            y,
            rotated,
            series_index: None,
            category_index: None,
        };
        for (px, py) in t.pixels() {
            img.put(px, py, Rgb::BLACK);
        }
        (img, t)
    }

    #[test]
    fn upright_word_reads_exactly() {
        let (img, t) = draw("Year", false, 13, 17);
        let r = read_text(&img, t.ink_box(), Rotation::Upright);
        assert_eq!((r.text.as_str(), r.confidence), ("Year", 1.0));
        assert_eq!(r.cell_box, Some(t.cell_box()));
    }

    #[test]
    fn rotated_title_reads_exactly() {
        let (img, t) = draw("Savings 2010", true, 10, 30);
        let r = read_text(&img, t.ink_box(), Rotation::Ccw90);
        assert_eq!(r.text, "Savings 2010");
        assert_eq!(r.cell_box, Some(t.cell_box()));
    }

    #[test]
    fn blank_region_is_empty() {
        let img = RasterImage::new(64, 64, Rgb::WHITE);
        assert_eq!(
            recognize_text(&img, BBox::new(0, 0, 40, 20), Rotation::Upright),
            (String::new(), 0.0)
        );
    }

    #[test]
    fn every_printable_glyph_round_trips() {
        let all: String = (' '..='~').filter(|c| *c != ' ').collect();
        for chunk in all.as_bytes().chunks(30) {
            let s = std::str::from_utf8(chunk).unwrap();
            let (img, t) = draw(s, false, 5, 40);
            assert_eq!(read_text(&img, t.ink_box(), Rotation::Upright).text, s);
        }
    }
}
