use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::insights::InsightConfig;
use crate::error::{Error, Result};
use crate::gen::render::{nice_max, render_chart, Annotation, Layout};
use crate::gen::spec::{ChartSpec, Series, PALETTE};
use crate::gen::truth::make_truth_kg_with;
use crate::kg::{ChartKg, ChartType};
use crate::raster::{RasterImage, Rgb};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieTopic {
    pub variable: String,
    pub title: String,
    pub items: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Vocab {
    pub countries: Vec<String>,
    pub measures: Vec<String>,
    pub first_year: u32,
    pub last_year: u32,
    pub pie_topics: Vec<PieTopic>,
    pub scatter_axes: Vec<(String, String)>,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab {
            countries: strings(&[
                "India", "Ukraine", "Brazil", "Chile", "Kenya", "Peru", "Japan", "Spain", "Egypt",
                "Nepal", "Canada", "Mexico", "France", "Italy", "Ghana", "Norway", "Poland",
                "Turkey", "Sweden", "Oman", "Cuba", "Qatar", "Fiji", "Laos",
            ]),
            measures: strings(&[
                "Savings",
                "Education",
                "Revenue",
                "Exports",
                "Imports",
                "Output",
                "Spending",
                "Income",
                "Tourism",
                "Rainfall",
                "Energy",
                "Debt",
            ]),
            first_year: 2000,
            last_year: 2020,
            pie_topics: vec![
                PieTopic {
                    variable: "Browser".into(),
                    title: "Browser share".into(),
                    items: strings(&["Chrome", "Safari", "Edge", "Firefox", "Opera", "Brave"]),
                },
                PieTopic {
                    variable: "Source".into(),
                    title: "Energy mix".into(),
                    items: strings(&["Coal", "Gas", "Solar", "Wind", "Hydro", "Nuclear"]),
                },
                PieTopic {
                    variable: "Brand".into(),
                    title: "Phone sales".into(),
                    items: strings(&["Apple", "Samsung", "Xiaomi", "Oppo", "Vivo", "Realme"]),
                },
                PieTopic {
                    variable: "Mode".into(),
                    title: "Commute mode".into(),
                    items: strings(&["Car", "Bus", "Train", "Bike", "Walk", "Tram"]),
                },
                PieTopic {
                    variable: "Sector".into(),
                    title: "Employment".into(),
                    items: strings(&[
                        "Farming", "Industry", "Services", "Mining", "Retail", "Defense",
                    ]),
                },
            ],
            scatter_axes: vec![
                ("Height".into(), "Weight".into()),
                ("Age".into(), "Income".into()),
                ("Hours".into(), "Score".into()),
                ("Speed".into(), "Distance".into()),
                ("Price".into(), "Demand".into()),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub per_type_count: usize,
    pub seed: u64,
    pub width: (u32, u32),
    pub height: (u32, u32),
    pub vocab: Vocab,
    pub write_ppm: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            per_type_count: 20,
            seed: 7,
            width: (480, 640),
            height: (360, 480),
            vocab: Vocab::default(),
            write_ppm: true,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_type_count == 0 {
            return Err(Error::Config(
                "gen.per_type_count must be at least 1".into(),
            ));
        }
        if self.width.0 < 320
            || self.width.0 > self.width.1
            || self.height.0 < 240
            || self.height.0 > self.height.1
        {
            return Err(Error::Config(
                "gen size ranges must be ordered and at least 320x240".into(),
            ));
        }
        let v = &self.vocab;
        if v.countries.len() < 8
            || v.measures.is_empty()
            || v.pie_topics.is_empty()
            || v.scatter_axes.is_empty()
        {
            return Err(Error::Config("gen.vocab lists are too short".into()));
        }
        if v.last_year < v.first_year + 8 {
            return Err(Error::Config(
                "gen.vocab year range must span at least 8 years".into(),
            ));
        }
        if v.pie_topics.iter().any(|t| t.items.len() < 6) {
            return Err(Error::Config(
                "each pie topic needs at least 6 items".into(),
            ));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn type_slot(ct: ChartType) -> u64 {
    ChartType::ALL.iter().position(|t| *t == ct).unwrap_or(0) as u64
}

pub fn chart_seed(seed: u64, ct: ChartType, i: usize) -> u64 {
    mix(mix(mix(seed) ^ type_slot(ct)) ^ i as u64)
}

/// Shares sitting exactly on a default dominance or outstanding-maximum
/// threshold, where pixel rounding would decide the insight.
fn on_insight_threshold(units: &[u32]) -> bool {
    let cfg = InsightConfig::default();
    let mut sorted = units.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let total: u32 = units.iter().sum();
    let (top, second) = (sorted[0] as f64, sorted[1] as f64);
    (top / total as f64 - cfg.dominance_share).abs() < 1e-9
        || (top - cfg.outstanding_ratio * second).abs() < 1e-9
}

pub fn chart_id(ct: ChartType, i: usize) -> String {
    format!("{}-{:05}", ct, i)
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, v: &'a [T]) -> &'a T {
    &v[rng.gen_range(0..v.len())]
}

fn colors(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rgb> {
    let mut all: Vec<Rgb> = PALETTE.iter().map(|p| p.1).collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

/// Values in (0, scale] following a random shape.
fn shaped_values(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    let shape = rng.gen_range(0..4);
    let lo = 0.15;
    let hi = 0.95;
    let mut v: Vec<f64> = match shape {
        0 => (0..n).map(|_| rng.gen_range(lo..hi)).collect(),
        1 | 2 => {
            let start = rng.gen_range(lo..0.45);
            let end = rng.gen_range(0.6..hi);
            let mut v: Vec<f64> = (0..n)
                .map(|i| {
                    start
                        + (end - start) * i as f64 / (n - 1).max(1) as f64
                        + rng.gen_range(-0.04..0.04)
                })
                .collect();
            if shape == 2 {
                v.reverse();
            }
            v
        }
        _ => {
            let top = rng.gen_range(0..n);
            (0..n)
                .map(|i| {
                    if i == top {
                        rng.gen_range(0.8..hi)
                    } else {
                        rng.gen_range(lo..0.45)
                    }
                })
                .collect()
        }
    };
    for x in v.iter_mut() {
        *x = round1(x.clamp(0.05, 1.0) * scale).max(0.1);
    }
    v
}

fn year_run(rng: &mut ChaCha8Rng, vocab: &Vocab, n: usize) -> Vec<String> {
    let start = rng.gen_range(vocab.first_year..=vocab.last_year + 1 - n as u32);
    (0..n).map(|i| (start + i as u32).to_string()).collect()
}

fn distinct(rng: &mut ChaCha8Rng, v: &[String], n: usize) -> Vec<String> {
    v.choose_multiple(rng, n).cloned().collect()
}

fn candidate(ct: ChartType, id: &str, seed: u64, cfg: &GenConfig) -> ChartSpec {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let vocab = &cfg.vocab;
    let width = rng.gen_range(cfg.width.0..=cfg.width.1);
    let height = rng.gen_range(cfg.height.0..=cfg.height.1);
    let scales = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    let measure = pick(rng, &vocab.measures).clone();
    let year = rng.gen_range(vocab.first_year..=vocab.last_year);
    let mut spec = ChartSpec {
        chart_id: id.to_string(),
        chart_type: ct,
        title: String::new(),
        x_title: String::new(),
        y_title: String::new(),
        legend_title: String::new(),
        categories: Vec::new(),
        series: Vec::new(),
        slice_colors: Vec::new(),
        rng_seed: seed,
        width,
        height,
    };
    match ct {
        ChartType::Bar => {
            let ns = match rng.gen_range(0..20) {
                0..=11 => 1,
                12..=16 => 2,
                _ => 3,
            };
            let scale = *pick(rng, &scales);
            spec.y_title = measure.clone();
            if ns == 1 {
                let k = rng.gen_range(3..=7);
                spec.categories = distinct(rng, &vocab.countries, k);
                spec.x_title = "Country".into();
                spec.title = format!("{measure} in {year}");
                if rng.gen_bool(0.3) {
                    spec.legend_title = "Year".into();
                }
                let color = colors(rng, 1)[0];
                spec.series.push(Series {
                    label: year.to_string(),
                    color,
                    values: shaped_values(rng, k, scale),
                    xs: None,
                });
            } else {
                let k = rng.gen_range(3..=5);
                spec.categories = year_run(rng, vocab, k);
                spec.x_title = "Year".into();
                spec.title = format!("{measure} by country");
                if rng.gen_bool(0.7) {
                    spec.legend_title = "Country".into();
                }
                let labels = distinct(rng, &vocab.countries, ns);
                for (label, color) in labels.into_iter().zip(colors(rng, ns)) {
                    spec.series.push(Series {
                        label,
                        color,
                        values: shaped_values(rng, k, scale),
                        xs: None,
                    });
                }
            }
        }
        ChartType::Line => {
            let ns = match rng.gen_range(0..10) {
                0..=3 => 1,
                4..=7 => 2,
                _ => 3,
            };
            let scale = *pick(rng, &scales);
            let k = rng.gen_range(4..=8);
            spec.categories = year_run(rng, vocab, k);
            spec.x_title = "Year".into();
            spec.y_title = measure.clone();
            spec.title = format!("{measure} by year");
            if ns >= 2 && rng.gen_bool(0.7) || ns == 1 && rng.gen_bool(0.3) {
                spec.legend_title = "Country".into();
            }
            let labels = distinct(rng, &vocab.countries, ns);
            for (label, color) in labels.into_iter().zip(colors(rng, ns)) {
                spec.series.push(Series {
                    label,
                    color,
                    values: shaped_values(rng, k, scale),
                    xs: None,
                });
            }
        }
        ChartType::Pie => {
            let topic = pick(rng, &vocab.pie_topics).clone();
            let k = rng.gen_range(3..=6);
            let units = loop {
                let mut units = vec![1u32; k];
                let mut left = 20 - k as u32;
                if rng.gen_bool(0.4) {
                    let extra = rng.gen_range(10..=13u32.min(left));
                    units[0] += extra;
                    left -= extra;
                }
                while left > 0 {
                    let i = rng.gen_range(0..k);
                    units[i] += 1;
                    left -= 1;
                }
                if !on_insight_threshold(&units) {
                    break units;
                }
            };
            let mut units = units;
            units.shuffle(rng);
            spec.categories = distinct(rng, &topic.items, k);
            spec.title = format!("{} {year}", topic.title);
            if rng.gen_bool(0.7) {
                spec.legend_title = topic.variable.clone();
            }
            spec.slice_colors = colors(rng, k);
            let values: Vec<f64> = units.iter().map(|u| *u as f64 / 20.0).collect();
            spec.series.push(Series {
                label: "share".into(),
                color: spec.slice_colors[0],
                values,
                xs: None,
            });
        }
        ChartType::Scatter => {
            let (xt, yt) = pick(rng, &vocab.scatter_axes).clone();
            spec.x_title = xt.clone();
            spec.y_title = yt.clone();
            spec.title = format!("{yt} vs {xt}");
            let ns = if rng.gen_bool(0.6) { 1 } else { 2 };
            if ns == 2 && rng.gen_bool(0.5) {
                spec.legend_title = "Group".into();
            }
            let xs_scale = *pick(rng, &scales);
            let ys_scale = *pick(rng, &scales);
            let mode = rng.gen_range(0..4);
            let n = rng.gen_range(8..=16usize);
            let mut pts: Vec<(f64, f64)> = Vec::new();
            let centers = [
                (rng.gen_range(0.15..0.4), rng.gen_range(0.15..0.85)),
                (rng.gen_range(0.6..0.85), rng.gen_range(0.15..0.85)),
            ];
            for i in 0..n {
                let p = match mode {
                    0 | 1 => {
                        let c = centers[i % 2];
                        (
                            c.0 + rng.gen_range(-0.08..0.08),
                            c.1 + rng.gen_range(-0.08..0.08),
                        )
                    }
                    2 => {
                        let t: f64 = rng.gen_range(0.1..0.9);
                        (t, (t + rng.gen_range(-0.08..0.08)).clamp(0.05, 0.95))
                    }
                    _ => (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)),
                };
                pts.push(p);
            }
            if mode == 1 {
                pts.push((rng.gen_range(0.9..1.0), rng.gen_range(0.9..1.0)));
            }
            let split = if ns == 2 { pts.len() / 2 } else { pts.len() };
            let groups = [&pts[..split], &pts[split..]];
            let labels = ["Group A", "Group B"];
            for (s, color) in colors(rng, ns).into_iter().enumerate() {
                let g = groups[s];
                if g.is_empty() {
                    continue;
                }
                spec.series.push(Series {
                    label: labels[s].into(),
                    color,
                    values: g
                        .iter()
                        .map(|p| round1(p.1.clamp(0.0, 1.0) * ys_scale))
                        .collect(),
                    xs: Some(
                        g.iter()
                            .map(|p| round1(p.0.clamp(0.0, 1.0) * xs_scale))
                            .collect(),
                    ),
                });
            }
        }
    }
    spec
}

fn acceptable(spec: &ChartSpec) -> bool {
    let Ok(layout) = Layout::compute(spec) else {
        return false;
    };
    if !layout.quality_issues(spec).is_empty() {
        return false;
    }
    match spec.chart_type {
        ChartType::Pie => {
            let v = &spec.series[0].values;
            let max = v.iter().cloned().fold(f64::MIN, f64::max);
            v.iter().filter(|x| (**x - max).abs() < 1e-9).count() == 1
        }
        ChartType::Bar | ChartType::Line => {
            // Scale ceilings bigger than the data squeeze bars; keep the
            // tallest value above half the axis.
            let max = spec
                .series
                .iter()
                .flat_map(|s| s.values.iter().copied())
                .fold(0.0, f64::max);
            max >= nice_max(max) * 0.5
        }
        ChartType::Scatter => true,
    }
}

/// Draws a spec for one chart id, rejecting candidates whose layout would
/// be ambiguous to read back.
pub fn sample_spec(ct: ChartType, i: usize, cfg: &GenConfig) -> Result<ChartSpec> {
    let base = chart_seed(cfg.seed, ct, i);
    let id = chart_id(ct, i);
    for attempt in 0..500u64 {
        let spec = candidate(ct, &id, mix(base ^ attempt), cfg);
        if acceptable(&spec) {
            return Ok(spec);
        }
    }
    Err(Error::InvalidSpec(format!(
        "no acceptable layout found for {id}"
    )))
}

#[derive(Debug, Clone)]
pub struct GeneratedChart {
    pub spec: ChartSpec,
    pub image: RasterImage,
    pub annotation: Annotation,
    pub truth: ChartKg,
}

pub fn generate_chart(
    ct: ChartType,
    i: usize,
    cfg: &GenConfig,
    insight: &InsightConfig,
) -> Result<GeneratedChart> {
    let spec = sample_spec(ct, i, cfg)?;
    let (image, annotation) = render_chart(&spec)?;
    let truth = make_truth_kg_with(&spec, &annotation, insight)?;
    Ok(GeneratedChart {
        spec,
        image,
        annotation,
        truth,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    pub fn all(&self) -> impl Iterator<Item = &String> {
        self.train.iter().chain(&self.val).chain(&self.test)
    }
}

/// Per type: train = floor(0.7n), val = floor(0.15n), test = the rest,
/// after a seeded shuffle.
pub fn split_ids(cfg: &GenConfig) -> Split {
    let mut split = Split::default();
    let n = cfg.per_type_count;
    let n_train = n * 7 / 10;
    let n_val = n * 15 / 100;
    for ct in ChartType::ALL {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed ^ 0x5EED_0000 ^ type_slot(ct)));
        idx.shuffle(&mut rng);
        let ids: Vec<String> = idx.iter().map(|i| chart_id(ct, *i)).collect();
        split.train.extend_from_slice(&ids[..n_train]);
        split.val.extend_from_slice(&ids[n_train..n_train + n_val]);
        split.test.extend_from_slice(&ids[n_train + n_val..]);
    }
    split.train.sort();
    split.val.sort();
    split.test.sort();
    split
}

/// Parses a corpus chart id such as `bar-00012`.
pub fn parse_chart_id(id: &str) -> Option<(ChartType, usize)> {
    let (t, n) = id.rsplit_once('-')?;
    Some((t.parse().ok()?, n.parse().ok()?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub charts: usize,
    pub split: Split,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_chart(dir: &Path, chart: &GeneratedChart, ppm: bool) -> Result<()> {
    let id = &chart.spec.chart_id;
    write(&dir.join(format!("{id}.png")), &chart.image.encode_png()?)?;
    if ppm {
        write(&dir.join(format!("{id}.ppm")), &chart.image.encode_ppm())?;
    }
    write(
        &dir.join(format!("{id}.annotation.json")),
        chart.annotation.to_json()?.as_bytes(),
    )?;
    write(
        &dir.join(format!("{id}.truth.kg.json")),
        chart.truth.to_json().as_bytes(),
    )?;
    Ok(())
}

pub fn generate_corpus(
    cfg: &GenConfig,
    insight: &InsightConfig,
    out: &Path,
) -> Result<CorpusSummary> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs: Vec<(ChartType, usize)> = ChartType::ALL
        .iter()
        .flat_map(|ct| (0..cfg.per_type_count).map(move |i| (*ct, i)))
        .collect();
    jobs.par_iter().try_for_each(|(ct, i)| {
        let chart = generate_chart(*ct, *i, cfg, insight)?;
        write_chart(out, &chart, cfg.write_ppm)
    })?;
    let split = split_ids(cfg);
    let mut text = serde_json::to_string_pretty(&split)?;
    text.push('\n');
    write(&out.join("split.json"), text.as_bytes())?;
    log::info!("wrote {} charts to {}", jobs.len(), out.display());
    Ok(CorpusSummary {
        charts: jobs.len(),
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_follows_floor_rule() {
        let cfg = GenConfig {
            per_type_count: 20,
            ..Default::default()
        };
        let s = split_ids(&cfg);
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (56, 12, 12));
        let cfg = GenConfig {
            per_type_count: 1,
            ..Default::default()
        };
        let s = split_ids(&cfg);
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (0, 0, 4));
    }

    #[test]
    fn sampled_specs_are_valid_and_stable() {
        let cfg = GenConfig::default();
        for ct in ChartType::ALL {
            for i in 0..5 {
                let a = sample_spec(ct, i, &cfg).unwrap();
                assert!(a.validate().is_ok());
                assert_eq!(a, sample_spec(ct, i, &cfg).unwrap());
            }
        }
    }

    #[test]
    fn ids_round_trip() {
        assert_eq!(chart_id(ChartType::Bar, 12), "bar-00012");
        assert_eq!(parse_chart_id("bar-00012"), Some((ChartType::Bar, 12)));
        assert_eq!(parse_chart_id("nope"), None);
    }
}
