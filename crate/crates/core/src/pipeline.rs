//! End-to-end run over one corpus: generate, parse, build, index and
//! evaluate. Everything written except `timing.json` is a pure function of
//! the configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::build_kg;
use crate::build::insights::InsightConfig;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{
    align_texts, detection_metrics, detections_of, kg_diff, mark_accuracy, median, ocr_accuracy,
    qa_accuracy, truths_of, DetectionReport, OcrReport, Prf, QaPrediction, QaReport,
    IOU_THRESHOLDS,
};
use crate::gen::corpus::{generate_corpus, Split};
use crate::gen::render::{Annotation, Layout};
use crate::kg::{ChartKg, ChartType};
use crate::parse::{ChartParser, ParseResult};
use crate::query::{answer, generate_queries, generate_questions, retrieve, CorpusIndex, Query};

/// One failure recorded for later correction; `errors.jsonl` holds one per
/// line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChartError {
    pub chart_id: String,
    pub stage: String,
    pub kind: String,
    pub message: String,
}

impl ChartError {
    pub fn new(chart_id: &str, stage: &str, e: &Error) -> Self {
        ChartError {
            chart_id: chart_id.to_string(),
            stage: stage.to_string(),
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Appends records to an `errors.jsonl` file.
pub fn append_errors(path: &Path, errors: &[ChartError]) -> Result<()> {
    use std::io::Write;
    if errors.is_empty() {
        return Ok(());
    }
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    for e in errors {
        text.push_str(&serde_json::to_string(e)?);
        text.push('\n');
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Everything the evaluator needs for one chart. Missing stages count as
/// failures, not as skipped charts.
#[derive(Debug, Clone)]
pub struct EvalInput {
    pub annotation: Annotation,
    pub truth: ChartKg,
    pub parsed: Option<ParseResult>,
    pub kg: Option<ChartKg>,
}

/// Mark accuracy of one chart type against the rendered geometry.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarkSummary {
    pub charts: usize,
    pub within_tolerance: usize,
    pub compared: usize,
    pub unmatched: usize,
    pub max_error: f64,
    /// Pie only: worst deviation of the slice angle sum from 360 degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_angle_sum_error: Option<f64>,
}

/// Per-type tolerance: bar height px, line vertex px, slice degrees,
/// scatter center px.
pub fn mark_tolerance(ct: ChartType) -> f64 {
    match ct {
        ChartType::Bar | ChartType::Scatter => 1.0,
        ChartType::Line | ChartType::Pie => 2.0,
    }
}

pub const ANGLE_SUM_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgSummary {
    pub charts: usize,
    pub median_triple_f1: f64,
    pub mean_triple_f1: f64,
    pub mean_entity_recall: f64,
    pub min_entity_recall: f64,
    /// Mean per-class F1.
    pub by_class_f1: BTreeMap<String, f64>,
}

/// Agreement of retrieval over parsed graphs with retrieval over truth
/// graphs, micro-averaged over result ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalSummary {
    pub queries: usize,
    pub precision: f64,
    pub recall: f64,
    pub exact_queries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub charts: usize,
    pub detection: DetectionReport,
    pub ocr: Option<OcrReport>,
    pub marks: BTreeMap<ChartType, MarkSummary>,
    pub kg: KgSummary,
    /// Latencies are zeroed here; wall-clock figures go to the timing file.
    pub qa: Option<QaReport>,
    pub retrieval: RetrievalSummary,
    pub failures: usize,
}

/// Non-deterministic measurements, kept apart from the report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub stages_s: BTreeMap<String, f64>,
    pub qa_questions: usize,
    pub qa_mean_latency_ms: f64,
    pub qa_max_latency_ms: f64,
}

impl Timing {
    fn stage(&mut self, name: &str, start: Instant) {
        self.stages_s
            .insert(name.to_string(), start.elapsed().as_secs_f64());
    }
}

fn summarize_marks(items: &[EvalInput]) -> Result<BTreeMap<ChartType, MarkSummary>> {
    let mut out: BTreeMap<ChartType, MarkSummary> = BTreeMap::new();
    for it in items {
        let ct = it.annotation.chart_type;
        let s = out.entry(ct).or_default();
        s.charts += 1;
        let Some(pr) = &it.parsed else {
            continue;
        };
        let layout = Layout::compute(&it.annotation.data)?;
        let acc = mark_accuracy(pr, &layout, ct);
        s.compared += acc.compared;
        s.unmatched += acc.unmatched;
        s.max_error = s.max_error.max(acc.max_error);
        let sum_err = acc.angle_sum.map(|a| (a - 360.0).abs());
        if let Some(e) = sum_err {
            s.max_angle_sum_error = Some(s.max_angle_sum_error.unwrap_or(0.0).max(e));
        }
        let ok = acc.unmatched == 0
            && acc.compared > 0
            && acc.max_error <= mark_tolerance(ct)
            && sum_err.is_none_or(|e| e <= ANGLE_SUM_TOLERANCE);
        s.within_tolerance += usize::from(ok);
    }
    Ok(out)
}

fn summarize_kgs(items: &[EvalInput]) -> KgSummary {
    let empty = ChartKg::new("", ChartType::Bar);
    let diffs: Vec<_> = items
        .iter()
        .map(|it| kg_diff(it.kg.as_ref().unwrap_or(&empty), &it.truth))
        .collect();
    let f1: Vec<f64> = diffs.iter().map(|d| d.triples.f1).collect();
    let recall: Vec<f64> = diffs.iter().map(|d| d.entities.recall).collect();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let mut classes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for d in &diffs {
        for (c, p) in &d.by_class {
            classes.entry(c.clone()).or_default().push(p.f1);
        }
    }
    KgSummary {
        charts: diffs.len(),
        median_triple_f1: median(&f1),
        mean_triple_f1: mean(&f1),
        mean_entity_recall: mean(&recall),
        min_entity_recall: recall
            .iter()
            .copied()
            .fold(if recall.is_empty() { 0.0 } else { 1.0 }, f64::min),
        by_class_f1: classes.into_iter().map(|(c, v)| (c, mean(&v))).collect(),
    }
}

fn answer_questions(
    items: &[EvalInput],
    insight: &InsightConfig,
    seed: u64,
    timing: &mut Timing,
) -> Option<QaReport> {
    let mut golds = Vec::new();
    let mut preds = Vec::new();
    let mut latencies = Vec::new();
    for it in items {
        for q in generate_questions(&it.annotation.data, insight, seed) {
            let (ans, err) = match &it.kg {
                Some(kg) => {
                    let t = Instant::now();
                    let a = answer(kg, &q.question);
                    latencies.push(t.elapsed().as_secs_f64() * 1e3);
                    match a {
                        Ok(a) => (Some(a.text), None),
                        Err(e) => (None, Some(e.to_string())),
                    }
                }
                None => (None, Some("no graph".to_string())),
            };
            preds.push(QaPrediction {
                id: q.id.clone(),
                answer: ans,
                latency_ms: 0.0,
                error: err,
            });
            golds.push(q);
        }
    }
    timing.qa_questions = latencies.len();
    if !latencies.is_empty() {
        timing.qa_mean_latency_ms = latencies.iter().sum::<f64>() / latencies.len() as f64;
        timing.qa_max_latency_ms = latencies.iter().copied().fold(0.0, f64::max);
    }
    qa_accuracy(&preds, &golds).ok()
}

fn hit_ids(index: &CorpusIndex, q: &Query) -> BTreeSet<String> {
    retrieve(index, q)
        .map(|h| h.into_iter().map(|h| h.chart_id).collect())
        .unwrap_or_default()
}

/// Runs `queries` over both indexes and scores the parsed side against the
/// truth side.
pub fn retrieval_agreement(
    parsed: &CorpusIndex,
    truth: &CorpusIndex,
    queries: &[Query],
) -> RetrievalSummary {
    let (mut tp, mut n_pred, mut n_truth, mut exact) = (0, 0, 0, 0);
    for q in queries {
        let (p, t) = (hit_ids(parsed, q), hit_ids(truth, q));
        tp += p.intersection(&t).count();
        n_pred += p.len();
        n_truth += t.len();
        exact += usize::from(p == t);
    }
    let prf = Prf::from_counts(tp, n_pred, n_truth);
    RetrievalSummary {
        queries: queries.len(),
        precision: prf.precision,
        recall: prf.recall,
        exact_queries: exact,
    }
}

/// Scores a set of charts. Returns the deterministic report and the
/// timing measurements separately.
pub fn evaluate(items: &[EvalInput], cfg: &Config) -> Result<(EvalReport, Timing)> {
    if items.is_empty() {
        return Err(Error::NothingToScore);
    }
    let mut timing = Timing::default();
    let start = Instant::now();
    let mut dets = Vec::new();
    let mut truths = Vec::new();
    let mut pairs = Vec::new();
    for it in items {
        truths.extend(truths_of(&it.annotation));
        if let Some(pr) = &it.parsed {
            dets.extend(detections_of(pr));
        }
        match &it.parsed {
            Some(pr) => pairs.extend(align_texts(pr, &it.annotation)),
            None => {
                let dummy = ParseResult {
                    chart_id: it.annotation.chart_id.clone(),
                    chart_type: it.annotation.chart_type,
                    classifier_confidence: 0.0,
                    background: crate::raster::Rgb::WHITE,
                    width: it.annotation.width,
                    height: it.annotation.height,
                    elements: Vec::new(),
                    marks: Vec::new(),
                    lines: Vec::new(),
                };
                pairs.extend(align_texts(&dummy, &it.annotation));
            }
        }
    }
    let detection = detection_metrics(&dets, &truths, &IOU_THRESHOLDS);
    let ocr = ocr_accuracy(&pairs).ok();
    let marks = summarize_marks(items)?;
    let kg = summarize_kgs(items);
    timing.stage("eval_vision", start);

    let start = Instant::now();
    let qa = answer_questions(items, &cfg.insight, cfg.eval.qa_seed, &mut timing);
    timing.stage("eval_qa", start);

    let start = Instant::now();
    let truth_index = CorpusIndex::from_kgs(items.iter().map(|it| it.truth.clone()));
    let parsed_index = CorpusIndex::from_kgs(items.iter().filter_map(|it| it.kg.clone()));
    let truth_kgs: Vec<&ChartKg> = truth_index.kgs().collect();
    let queries = generate_queries(&truth_kgs, cfg.eval.query_count, cfg.eval.query_seed);
    let retrieval = retrieval_agreement(&parsed_index, &truth_index, &queries);
    timing.stage("eval_retrieval", start);

    let failures = items.iter().filter(|it| it.kg.is_none()).count();
    Ok((
        EvalReport {
            charts: items.len(),
            detection,
            ocr,
            marks,
            kg,
            qa,
            retrieval,
            failures,
        },
        timing,
    ))
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        Ok(s)
    }

    /// Plain-text rendering: the detection table followed by one line per
    /// summary figure.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "charts evaluated: {} (failed: {})\n\n",
            self.charts, self.failures
        );
        s.push_str(&self.detection.to_table());
        if let Some(o) = &self.ocr {
            let _ = writeln!(
                s,
                "\nocr exact-match {:.4}  mean edit distance {:.4}",
                o.overall.accuracy, o.overall.mean_edit_distance
            );
        }
        s.push('\n');
        for (ct, m) in &self.marks {
            let _ = write!(
                s,
                "marks {:<8} {}/{} within tolerance, max error {:.3}",
                ct.to_string(),
                m.within_tolerance,
                m.charts,
                m.max_error
            );
            if let Some(e) = m.max_angle_sum_error {
                let _ = write!(s, ", angle sum error {e:.3}");
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "\nkg median triple F1 {:.4}  mean entity recall {:.4}",
            self.kg.median_triple_f1, self.kg.mean_entity_recall
        );
        if let Some(q) = &self.qa {
            let _ = writeln!(
                s,
                "qa overall {:.4} ({}/{})",
                q.overall.accuracy, q.overall.correct, q.overall.count
            );
            for (k, c) in &q.per_category {
                let _ = writeln!(
                    s,
                    "qa {:<10} {:.4} ({}/{})",
                    k.to_string(),
                    c.accuracy,
                    c.correct,
                    c.count
                );
            }
        }
        let r = &self.retrieval;
        let _ = writeln!(
            s,
            "retrieval precision {:.4}  recall {:.4}  exact {}/{}",
            r.precision, r.recall, r.exact_queries, r.queries
        );
        s
    }
}

/// Summary of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub out: PathBuf,
    pub charts: usize,
    pub errors: Vec<ChartError>,
    pub eval: EvalReport,
    pub timing: Timing,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Parses every chart image of a corpus, in id order.
pub fn parse_charts(
    parser: &ChartParser,
    corpus: &Path,
    ids: &[String],
) -> Vec<(String, Result<ParseResult>)> {
    ids.par_iter()
        .map(|id| {
            (
                id.clone(),
                parser.parse_file(&corpus.join(format!("{id}.png"))),
            )
        })
        .collect()
}

/// Loads the split-file test charts with their parse results and graphs
/// from a finished run directory.
pub fn load_eval_inputs(corpus: &Path, out: &Path) -> Result<Vec<EvalInput>> {
    let split: Split = read_json(&corpus.join("split.json"))?;
    split
        .test
        .iter()
        .map(|id| {
            let annotation: Annotation = read_json(&corpus.join(format!("{id}.annotation.json")))?;
            let truth_path = corpus.join(format!("{id}.truth.kg.json"));
            let truth = ChartKg::from_json(
                &fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?,
            )?;
            let parsed = fs::read_to_string(out.join("parse").join(format!("{id}.parse.json")))
                .ok()
                .and_then(|t| ParseResult::from_json(&t).ok());
            let kg = fs::read_to_string(out.join("kg").join(format!("{id}.kg.json")))
                .ok()
                .and_then(|t| ChartKg::from_json(&t).ok());
            Ok(EvalInput {
                annotation,
                truth,
                parsed,
                kg,
            })
        })
        .collect()
}

/// Writes `report.json`, `report.txt` and `timing.json` into `out`.
pub fn write_reports(out: &Path, report: &EvalReport, timing: &Timing) -> Result<()> {
    write(&out.join("report.json"), &report.to_json()?)?;
    write(&out.join("report.txt"), &report.to_text())?;
    let mut t = serde_json::to_string_pretty(&serde_json::to_value(timing)?)?;
    t.push('\n');
    write(&out.join("timing.json"), &t)
}

/// Generates the corpus, parses and builds every chart, indexes the built
/// graphs and evaluates the test split.
pub fn run(cfg: &Config) -> Result<PipelineReport> {
    cfg.validate()?;
    let (corpus, out) = (&cfg.paths.corpus, &cfg.paths.out);
    let mut timing = Timing::default();

    let start = Instant::now();
    let summary = generate_corpus(&cfg.gen, &cfg.insight, corpus)?;
    timing.stage("gen", start);

    let mut ids: Vec<String> = summary.split.all().cloned().collect();
    ids.sort();
    let (parse_dir, kg_dir) = (out.join("parse"), out.join("kg"));
    mkdir(&parse_dir)?;
    mkdir(&kg_dir)?;
    let mut errors = Vec::new();

    let start = Instant::now();
    let parser = ChartParser::from_config(&cfg.parser);
    let mut parsed = BTreeMap::new();
    for (id, res) in parse_charts(&parser, corpus, &ids) {
        match res {
            Ok(pr) => {
                write(&parse_dir.join(format!("{id}.parse.json")), &pr.to_json()?)?;
                parsed.insert(id, pr);
            }
            Err(e) => errors.push(ChartError::new(&id, "parse", &e)),
        }
    }
    timing.stage("parse", start);

    let start = Instant::now();
    let built: Vec<(String, Result<ChartKg>)> = parsed
        .par_iter()
        .map(|(id, pr)| (id.clone(), build_kg(pr, &cfg.insight)))
        .collect();
    let mut kgs = BTreeMap::new();
    for (id, res) in built {
        match res {
            Ok(kg) => {
                write(&kg_dir.join(format!("{id}.kg.json")), &kg.to_json())?;
                write(
                    &kg_dir.join(format!("{id}.triples.tsv")),
                    &kg.export_triples(),
                )?;
                kgs.insert(id, kg);
            }
            Err(e) => errors.push(ChartError::new(&id, "build", &e)),
        }
    }
    timing.stage("build", start);

    let start = Instant::now();
    CorpusIndex::from_kgs(kgs.values().cloned()).save(&out.join("index.json"))?;
    timing.stage("index", start);

    let inputs = summary
        .split
        .test
        .iter()
        .map(|id| {
            let annotation: Annotation = read_json(&corpus.join(format!("{id}.annotation.json")))?;
            let truth_path = corpus.join(format!("{id}.truth.kg.json"));
            let truth = ChartKg::from_json(
                &fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?,
            )?;
            Ok(EvalInput {
                annotation,
                truth,
                parsed: parsed.get(id).cloned(),
                kg: kgs.get(id).cloned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (report, eval_timing) = evaluate(&inputs, cfg)?;
    timing.stages_s.extend(eval_timing.stages_s);
    timing.qa_questions = eval_timing.qa_questions;
    timing.qa_mean_latency_ms = eval_timing.qa_mean_latency_ms;
    timing.qa_max_latency_ms = eval_timing.qa_max_latency_ms;

    errors.sort();
    let errors_path = out.join("errors.jsonl");
    let mut text = String::new();
    for e in &errors {
        text.push_str(&serde_json::to_string(e)?);
        text.push('\n');
    }
    write(&errors_path, &text)?;
    write_reports(out, &report, &timing)?;
    log::info!(
        "pipeline finished: {} charts, {} errors",
        ids.len(),
        errors.len()
    );
    Ok(PipelineReport {
        out: out.clone(),
        charts: ids.len(),
        errors,
        eval: report,
        timing,
    })
}
