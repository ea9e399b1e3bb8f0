//! Pixel grids, colors and boxes.

use std::fmt;
use std::io::{BufRead, Cursor, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const WHITE: Rgb = Rgb([0xFF, 0xFF, 0xFF]);
    pub const BLACK: Rgb = Rgb([0x00, 0x00, 0x00]);

    pub fn hex(self) -> String {
        let [r, g, b] = self.0;
        format!("#{r:02X}{g:02X}{b:02X}")
    }

    pub fn distance(self, other: Rgb) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Hue in degrees [0, 360), saturation and value in [0, 1].
    pub fn to_hsv(self) -> (f64, f64, f64) {
        let [r, g, b] = self.0.map(|c| c as f64 / 255.0);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let hue = if delta == 0.0 {
            0.0
        } else if max == r {
            60.0 * ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        let sat = if max == 0.0 { 0.0 } else { delta / max };
        (hue, sat, max)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6)
            .ok_or_else(|| Error::Validation(format!("`{s}` is not a #RRGGBB color")))?;
        let byte = |i: usize| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::Validation(format!("`{s}` is not a #RRGGBB color")))
        };
        Ok(Rgb([byte(0)?, byte(2)?, byte(4)?]))
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned box `[xmin, ymin, xmax, ymax]`, max-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct BBox {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl From<[i32; 4]> for BBox {
    fn from([x0, y0, x1, y1]: [i32; 4]) -> Self {
        BBox { x0, y0, x1, y1 }
    }
}

impl From<BBox> for [i32; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BBox {
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i32 {
        (self.x1 - self.x0).max(0)
    }

    pub fn height(&self) -> i32 {
        (self.y1 - self.y0).max(0)
    }

    pub fn area(&self) -> i64 {
        self.width() as i64 * self.height() as i64
    }

    pub fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn intersection(&self, other: &BBox) -> BBox {
        let b = BBox {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        if b.x1 <= b.x0 || b.y1 <= b.y0 {
            BBox::new(b.x0, b.y0, b.x0, b.y0)
        } else {
            b
        }
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn within(&self, width: u32, height: u32) -> bool {
        self.x0 >= 0 && self.y0 >= 0 && self.x1 <= width as i32 && self.y1 <= height as i32
    }

    /// Grows a box so it covers the pixel `(x, y)`.
    pub fn include(&mut self, x: i32, y: i32) {
        self.x0 = self.x0.min(x);
        self.y0 = self.y0.min(y);
        self.x1 = self.x1.max(x + 1);
        self.y1 = self.y1.max(y + 1);
    }

    /// Degenerate box that any `include` call replaces.
    pub fn empty() -> Self {
        BBox::new(i32::MAX, i32::MAX, i32::MIN, i32::MIN)
    }
}

/// Row-major 8-bit RGB image with the origin at the top-left corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&fill.0);
        }
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize * 3 {
            return Err(Error::Image(format!(
                "expected {} bytes for {width}x{height} RGB, got {}",
                width as usize * height as usize * 3,
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn raw(&self) -> &[u8] {
        &self.pixels
    }

    pub fn bounds(&self) -> BBox {
        BBox::new(0, 0, self.width as i32, self.height as i32)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        Rgb([self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]])
    }

    /// Pixel lookup that tolerates coordinates outside the canvas.
    #[inline]
    pub fn get_checked(&self, x: i32, y: i32) -> Option<Rgb> {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            None
        } else {
            Some(self.get(x as u32, y as u32))
        }
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c.0);
    }

    /// Clipped write; returns whether the pixel was on the canvas.
    #[inline]
    pub fn put(&mut self, x: i32, y: i32, c: Rgb) -> bool {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            return false;
        }
        self.set(x as u32, y as u32, c);
        true
    }

    pub fn fill_rect(&mut self, b: BBox, c: Rgb) {
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                self.put(x, y, c);
            }
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc
                .write_header()
                .map_err(|e| Error::Image(e.to_string()))?;
            writer
                .write_image_data(&self.pixels)
                .map_err(|e| Error::Image(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder
            .read_info()
            .map_err(|e| Error::Image(e.to_string()))?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::Image("image too large".into()))?;
        let mut buf = vec![0; size];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| Error::Image(e.to_string()))?;
        buf.truncate(info.buffer_size());
        let (w, h) = (info.width, info.height);
        let pixels = match info.color_type {
            png::ColorType::Rgb => buf,
            png::ColorType::Rgba => buf
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect(),
            png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
            png::ColorType::GrayscaleAlpha => buf
                .chunks_exact(2)
                .flat_map(|p| [p[0], p[0], p[0]])
                .collect(),
            png::ColorType::Indexed => {
                return Err(Error::Image("unexpanded palette image".into()));
            }
        };
        RasterImage::from_raw(w, h, pixels)
    }

    /// Binary PPM (P6, maxval 255).
    pub fn encode_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode_ppm(bytes: &[u8]) -> Result<Self> {
        let mut cursor = Cursor::new(bytes);
        let mut fields = Vec::new();
        while fields.len() < 4 {
            let tok = next_token(&mut cursor)?;
            fields.push(tok);
        }
        if fields[0] != "P6" {
            return Err(Error::Image(format!(
                "unsupported PPM magic `{}`",
                fields[0]
            )));
        }
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::Image(format!("bad PPM header field `{s}`")))
        };
        let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(Error::Image(format!("unsupported PPM maxval {maxval}")));
        }
        let mut pixels = Vec::new();
        cursor
            .read_to_end(&mut pixels)
            .map_err(|e| Error::Image(e.to_string()))?;
        pixels.truncate(w as usize * h as usize * 3);
        RasterImage::from_raw(w, h, pixels)
    }

    /// Loads a PNG or PPM file, sniffing the format from its magic bytes.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(b"\x89PNG") {
            Self::decode_png(&bytes)
        } else if bytes.starts_with(b"P6") {
            Self::decode_ppm(&bytes)
        } else {
            Err(Error::Image(format!(
                "{}: not a PNG or P6 PPM file",
                path.display()
            )))
        }
    }
}

fn next_token(cursor: &mut Cursor<&[u8]>) -> Result<String> {
    let mut tok = String::new();
    loop {
        let buf = cursor.fill_buf().map_err(|e| Error::Image(e.to_string()))?;
        let Some(&b) = buf.first() else {
            return Err(Error::Image("truncated PPM header".into()));
        };
        cursor.consume(1);
        if b == b'#' {
            let mut skipped = Vec::new();
            cursor
                .read_until(b'\n', &mut skipped)
                .map_err(|e| Error::Image(e.to_string()))?;
            continue;
        }
        if b.is_ascii_whitespace() {
            if !tok.is_empty() {
                return Ok(tok);
            }
        } else {
            tok.push(b as char);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let c: Rgb = "#1F77B4".parse().unwrap();
        assert_eq!(c, Rgb([0x1F, 0x77, 0xB4]));
        assert_eq!(c.hex(), "#1F77B4");
        assert!("1F77B4".parse::<Rgb>().is_err());
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(Rgb([255, 0, 0]).to_hsv(), (0.0, 1.0, 1.0));
        let (h, s, v) = Rgb([0, 0, 255]).to_hsv();
        assert_eq!((h, s, v), (240.0, 1.0, 1.0));
        assert_eq!(Rgb::WHITE.to_hsv().1, 0.0);
    }

    #[test]
    fn png_and_ppm_round_trip() {
        let mut img = RasterImage::new(70, 65, Rgb::WHITE);
        img.fill_rect(BBox::new(3, 4, 20, 30), Rgb([0x1F, 0x77, 0xB4]));
        let png = img.encode_png().unwrap();
        assert_eq!(RasterImage::decode_png(&png).unwrap(), img);
        let ppm = img.encode_ppm();
        assert!(ppm.starts_with(b"P6\n70 65\n255\n"));
        assert_eq!(RasterImage::decode_ppm(&ppm).unwrap(), img);
    }

    #[test]
    fn bbox_geometry() {
        let a = BBox::new(0, 0, 10, 10);
        let b = BBox::new(5, 0, 15, 10);
        assert_eq!(a.intersection(&b).area(), 50);
        assert_eq!(a.union(&b), BBox::new(0, 0, 15, 10));
        assert!(BBox::new(0, 0, 5, 5)
            .intersection(&BBox::new(6, 6, 9, 9))
            .is_empty());
        assert_eq!(BBox::new(10, 10, 17, 17).center(), (13.5, 13.5));
    }
}
