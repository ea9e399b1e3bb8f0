use std::fmt;
use std::path::Path;
use std::process::Command;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::ChartType;
use crate::parse::classify::{classify_scene, Scene};
use crate::parse::detect::detect_in_scene;
use crate::parse::marks::{
    parse_bar_marks, parse_line_marks, parse_pie_marks, parse_scatter_marks,
};
use crate::parse::ocr::{read_text, Rotation, TextReading};
use crate::parse::{DetectedElement, ParseResult};
use crate::raster::{BBox, RasterImage};

/// An image with the file it was read from, when there is one. External
/// backends receive the path.
#[derive(Clone, Copy)]
pub struct ChartImage<'a> {
    pub image: &'a RasterImage,
    pub path: Option<&'a Path>,
}

pub trait Classifier: Send + Sync {
    fn classify(&self, input: ChartImage<'_>) -> Result<(ChartType, f64)>;
}

pub trait ElementDetector: Send + Sync {
    fn detect(&self, input: ChartImage<'_>, chart_type: ChartType) -> Result<Vec<DetectedElement>>;
}

pub trait TextRecognizer: Send + Sync {
    fn recognize(
        &self,
        input: ChartImage<'_>,
        bbox: BBox,
        rotation: Rotation,
    ) -> Result<TextReading>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinClassifier;

impl Classifier for BuiltinClassifier {
    fn classify(&self, input: ChartImage<'_>) -> Result<(ChartType, f64)> {
        classify_scene(input.image, &Scene::analyze(input.image))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinDetector;

impl ElementDetector for BuiltinDetector {
    fn detect(&self, input: ChartImage<'_>, chart_type: ChartType) -> Result<Vec<DetectedElement>> {
        Ok(detect_in_scene(
            input.image,
            &Scene::analyze(input.image),
            chart_type,
        ))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateRecognizer;

impl TextRecognizer for TemplateRecognizer {
    fn recognize(
        &self,
        input: ChartImage<'_>,
        bbox: BBox,
        rotation: Rotation,
    ) -> Result<TextReading> {
        Ok(read_text(input.image, bbox, rotation))
    }
}

/// A program that receives the image path (plus per-backend arguments) and
/// prints a JSON fragment on standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCommand {
    pub argv: Vec<String>,
}

#[derive(Deserialize)]
struct ClassifierOutput {
    chart_type: ChartType,
    confidence: f64,
}

impl ExternalCommand {
    fn run<T: DeserializeOwned>(&self, input: ChartImage<'_>, extra: &[String]) -> Result<T> {
        let path = input.path.ok_or_else(|| {
            Error::Backend(format!(
                "`{}` needs an image file path",
                self.argv.join(" ")
            ))
        })?;
        let (program, args) = self
            .argv
            .split_first()
            .ok_or_else(|| Error::Config("empty backend command".into()))?;
        let out = Command::new(program)
            .args(args)
            .arg(path)
            .args(extra)
            .output()
            .map_err(|e| Error::Backend(format!("cannot run `{program}`: {e}")))?;
        if !out.status.success() {
            return Err(Error::Backend(format!(
                "`{program}` exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        serde_json::from_slice(&out.stdout)
            .map_err(|e| Error::Backend(format!("`{program}` printed invalid JSON: {e}")))
    }
}

impl Classifier for ExternalCommand {
    fn classify(&self, input: ChartImage<'_>) -> Result<(ChartType, f64)> {
        let o: ClassifierOutput = self.run(input, &[])?;
        if !(0.0..=1.0).contains(&o.confidence) {
            return Err(Error::Backend(format!(
                "confidence {} outside [0, 1]",
                o.confidence
            )));
        }
        Ok((o.chart_type, o.confidence))
    }
}

impl ElementDetector for ExternalCommand {
    fn detect(&self, input: ChartImage<'_>, chart_type: ChartType) -> Result<Vec<DetectedElement>> {
        self.run(input, &[chart_type.as_str().to_string()])
    }
}

impl TextRecognizer for ExternalCommand {
    fn recognize(
        &self,
        input: ChartImage<'_>,
        bbox: BBox,
        rotation: Rotation,
    ) -> Result<TextReading> {
        let extra = [
            bbox.x0,
            bbox.y0,
            bbox.x1,
            bbox.y1,
            rotation.degrees() as i32,
        ]
        .map(|v| v.to_string());
        self.run(input, &extra)
    }
}

/// Backend selection: `"builtin"` or a command line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Builtin,
    Command(ExternalCommand),
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Builtin => f.write_str("builtin"),
            Backend::Command(c) => f.write_str(&c.argv.join(" ")),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let argv: Vec<String> = s.split_whitespace().map(String::from).collect();
        match argv.as_slice() {
            [] => Err(Error::Config(
                "backend must be `builtin` or a command".into(),
            )),
            [b] if b == "builtin" => Ok(Backend::Builtin),
            _ => Ok(Backend::Command(ExternalCommand { argv })),
        }
    }
}

impl Serialize for Backend {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Backend {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParserConfig {
    pub classifier: Backend,
    pub detector: Backend,
    pub ocr: Backend,
}

pub struct ChartParser {
    classifier: Box<dyn Classifier>,
    detector: Box<dyn ElementDetector>,
    ocr: Box<dyn TextRecognizer>,
}

impl Default for ChartParser {
    fn default() -> Self {
        ChartParser::builtin()
    }
}

impl ChartParser {
    pub fn builtin() -> Self {
        ChartParser {
            classifier: Box::new(BuiltinClassifier),
            detector: Box::new(BuiltinDetector),
            ocr: Box::new(TemplateRecognizer),
        }
    }

    pub fn new(
        classifier: Box<dyn Classifier>,
        detector: Box<dyn ElementDetector>,
        ocr: Box<dyn TextRecognizer>,
    ) -> Self {
        ChartParser {
            classifier,
            detector,
            ocr,
        }
    }

    pub fn from_config(cfg: &ParserConfig) -> Self {
        fn pick<T: ?Sized>(
            b: &Backend,
            builtin: Box<T>,
            external: impl FnOnce(ExternalCommand) -> Box<T>,
        ) -> Box<T> {
            match b {
                Backend::Builtin => builtin,
                Backend::Command(c) => external(c.clone()),
            }
        }
        ChartParser {
            classifier: pick(&cfg.classifier, Box::new(BuiltinClassifier), |c| {
                Box::new(c)
            }),
            detector: pick(&cfg.detector, Box::new(BuiltinDetector), |c| Box::new(c)),
            ocr: pick(&cfg.ocr, Box::new(TemplateRecognizer), |c| Box::new(c)),
        }
    }

    /// Classifies, detects elements, reads their text, and extracts mark
    /// tuples for the classified type.
    pub fn parse(&self, chart_id: &str, input: ChartImage<'_>) -> Result<ParseResult> {
        let img = input.image;
        let (chart_type, confidence) = self.classifier.classify(input)?;
        let mut elements = self.detector.detect(input, chart_type)?;
        for e in elements.iter_mut().filter(|e| e.role.is_text()) {
            let r = self.ocr.recognize(input, e.bbox, e.rotation)?;
            e.text = Some(r.text);
            e.text_confidence = Some(r.confidence);
            e.text_box = r.cell_box;
        }
        let background = crate::parse::detect_background(img);
        let mut lines = Vec::new();
        let marks = match chart_type {
            ChartType::Bar => parse_bar_marks(img, &elements, background)?,
            ChartType::Line => {
                let (m, l) = parse_line_marks(img, &elements)?;
                lines = l;
                m
            }
            ChartType::Pie => parse_pie_marks(img, &elements, background)?,
            ChartType::Scatter => parse_scatter_marks(img, &elements, background)?,
        };
        Ok(ParseResult {
            chart_id: chart_id.to_string(),
            chart_type,
            classifier_confidence: confidence,
            background,
            width: img.width(),
            height: img.height(),
            elements,
            marks,
            lines,
        })
    }

    pub fn parse_file(&self, path: &Path) -> Result<ParseResult> {
        let image = RasterImage::load(path)?;
        let id = chart_id_of(path);
        self.parse(
            &id,
            ChartImage {
                image: &image,
                path: Some(path),
            },
        )
    }
}

/// Chart id of an image file: the file name up to its first dot.
pub fn chart_id_of(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_string()
}

/// Parses an in-memory image with the builtin backends.
pub fn parse_image(chart_id: &str, image: &RasterImage) -> Result<ParseResult> {
    ChartParser::builtin().parse(chart_id, ChartImage { image, path: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_strings_round_trip() {
        assert_eq!("builtin".parse::<Backend>().unwrap(), Backend::Builtin);
        let b: Backend = "python3 ocr.py --fast".parse().unwrap();
        assert_eq!(b.to_string(), "python3 ocr.py --fast");
        assert!("  ".parse::<Backend>().is_err());
    }

    #[test]
    fn parser_config_rejects_unknown_keys() {
        let ok: ParserConfig = serde_json::from_str(r#"{"ocr":"builtin"}"#).unwrap();
        assert_eq!(ok, ParserConfig::default());
        assert!(serde_json::from_str::<ParserConfig>(r#"{"engine":"x"}"#).is_err());
    }

    #[test]
    fn external_backends_need_a_path() {
        let img = RasterImage::new(64, 64, crate::raster::Rgb::WHITE);
        let cmd = ExternalCommand {
            argv: vec!["true".into()],
        };
        let r = Classifier::classify(
            &cmd,
            ChartImage {
                image: &img,
                path: None,
            },
        );
        assert!(matches!(r, Err(Error::Backend(_))));
    }

    #[test]
    fn chart_ids_strip_extensions() {
        assert_eq!(chart_id_of(Path::new("/a/bar-00003.png")), "bar-00003");
        assert_eq!(
            chart_id_of(Path::new("pie-00001.annotation.json")),
            "pie-00001"
        );
    }
}
