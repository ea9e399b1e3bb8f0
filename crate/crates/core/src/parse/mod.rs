//! Chart image parsing: classification, element detection, text
//! recognition, and graphical mark extraction.

pub mod backend;
pub mod classify;
pub mod components;
pub mod detect;
pub mod marks;
pub mod ocr;

use serde::{Deserialize, Serialize};

use crate::kg::ChartType;
use crate::raster::{BBox, Rgb};
use crate::role::Role;

pub use backend::{
    chart_id_of, parse_image, Backend, ChartImage, ChartParser, Classifier, ElementDetector,
    ParserConfig, TextRecognizer,
};
pub use classify::{classify_chart, Scene};
pub use components::{detect_background, Component};
pub use detect::detect_elements;
pub use marks::{parse_bar_marks, parse_line_marks, parse_pie_marks, parse_scatter_marks};
pub use ocr::{read_text, recognize_text, Rotation, TextReading};

fn is_upright(r: &Rotation) -> bool {
    *r == Rotation::Upright
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedElement {
    pub role: Role,
    pub bbox: BBox,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_confidence: Option<f64>,
    /// Fill of marks and legend swatches; legend labels carry the color of
    /// the swatch on their row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Rgb>,
    #[serde(default = "Rotation::upright", skip_serializing_if = "is_upright")]
    pub rotation: Rotation,
    /// Character-cell grid found by the text recognizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_box: Option<BBox>,
}

impl DetectedElement {
    pub fn new(role: Role, bbox: BBox, score: f64) -> Self {
        DetectedElement {
            role,
            bbox,
            score,
            text: None,
            text_confidence: None,
            color: None,
            rotation: Rotation::Upright,
            text_box: None,
        }
    }

    pub fn with_color(mut self, color: Rgb) -> Self {
        self.color = Some(color);
        self
    }
}

impl Rotation {
    fn upright() -> Self {
        Rotation::Upright
    }
}

/// Point in plot coordinates: pixels right of the y axis and above the x axis.
pub type PlotPoint = (f64, f64);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkAux {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<PlotPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<PlotPoint>,
}

/// Per-mark properties. `value` is the bar height or slice angle, or the
/// plot-coordinate y of a line vertex or scatter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkTuple {
    pub mark_id: String,
    pub value: f64,
    pub index: usize,
    pub color: Rgb,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<MarkAux>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSeries {
    pub color: Rgb,
    pub start: PlotPoint,
    pub end: PlotPoint,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseResult {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub classifier_confidence: f64,
    pub background: Rgb,
    pub width: u32,
    pub height: u32,
    pub elements: Vec<DetectedElement>,
    pub marks: Vec<MarkTuple>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<LineSeries>,
}

impl ParseResult {
    pub fn of_role(&self, role: Role) -> impl Iterator<Item = &DetectedElement> {
        self.elements.iter().filter(move |e| e.role == role)
    }

    pub fn to_json(&self) -> crate::Result<String> {
        let v = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
