//! One PASS/FAIL line per acceptance criterion; the test fails if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use chartkg::build::{build_kg, InsightConfig};
use chartkg::gen::corpus::{generate_chart, split_ids, GenConfig};
use chartkg::parse::parse_image;
use chartkg::pipeline::{evaluate, run, EvalInput, EvalReport, Timing, ANGLE_SUM_TOLERANCE};
use chartkg::query::{answer, generate_queries, retrieve, CorpusIndex, Query};
use chartkg::{ChartKg, ChartType, Config};
use common::examples::*;
use common::oracle::*;
use common::vi;
use rayon::prelude::*;

struct Verdicts(Vec<(String, bool)>);

impl Verdicts {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.0.push((name.to_string(), ok));
    }
}

/// The full-size evaluation: 500 charts per type, 75 per type tested.
fn full_run() -> (EvalReport, Timing, f64) {
    let start = Instant::now();
    let cfg = Config {
        gen: GenConfig {
            per_type_count: 500,
            ..GenConfig::default()
        },
        ..Config::default()
    };
    let test = split_ids(&cfg.gen).test;
    let items: Vec<EvalInput> = test
        .par_iter()
        .map(|id| {
            let (ct, i) = chartkg::gen::corpus::parse_chart_id(id).unwrap();
            let g = generate_chart(ct, i, &cfg.gen, &cfg.insight).unwrap();
            let parsed = parse_image(id, &g.image).ok();
            let kg = parsed
                .as_ref()
                .and_then(|pr| build_kg(pr, &cfg.insight).ok());
            EvalInput {
                annotation: g.annotation,
                truth: g.truth,
                parsed,
                kg,
            }
        })
        .collect();
    let (report, timing) = evaluate(&items, &cfg).unwrap();
    (report, timing, start.elapsed().as_secs_f64())
}

fn detection(v: &mut Verdicts, r: &EvalReport, secs: f64) {
    let mut lines = Vec::new();
    let mut ok = r.charts >= 300 && secs <= 300.0;
    for class in [
        "title",
        "x-axis-title",
        "x-axis-label",
        "y-axis-title",
        "y-axis-label",
        "legend",
        "bar",
        "pie",
        "point",
        "line",
    ] {
        let Some(c) = r.detection.class(class) else {
            ok = false;
            lines.push(format!("{class}=missing"));
            continue;
        };
        let pass = if class == "line" {
            c.ap50 >= 0.75
        } else {
            c.precision >= 0.95 && c.recall >= 0.95 && c.ap50 >= 0.95 && c.ap50_95 >= 0.85
        };
        ok &= pass;
        lines.push(format!(
            "{class} P={:.3} R={:.3} mAP50={:.3} mAP50-95={:.3}",
            c.precision, c.recall, c.ap50, c.ap50_95
        ));
    }
    v.record(
        "1 detection",
        ok,
        format!(
            "{} charts in {secs:.1}s (limit 300s); {}",
            r.charts,
            lines.join("; ")
        ),
    );
}

fn marks(v: &mut Verdicts, r: &EvalReport) {
    let mut ok = r.marks.len() == 4;
    let mut parts = Vec::new();
    for (ct, m) in &r.marks {
        let tol = chartkg::pipeline::mark_tolerance(*ct);
        let pass = m.compared > 0
            && m.within_tolerance == m.charts
            && m.unmatched == 0
            && m.max_error <= tol;
        let sum_ok = m
            .max_angle_sum_error
            .is_none_or(|e| e <= ANGLE_SUM_TOLERANCE);
        ok &= pass && sum_ok;
        parts.push(format!(
            "{ct:?} {}/{} charts within {tol} over {} marks (max {:.3}, unmatched {}){}",
            m.within_tolerance,
            m.charts,
            m.compared,
            m.max_error,
            m.unmatched,
            m.max_angle_sum_error
                .map(|e| format!(", angle sum error {e:.3}"))
                .unwrap_or_default()
        ));
    }
    v.record("3 marks", ok, parts.join("; "));
}

fn qa(v: &mut Verdicts, r: &EvalReport, t: &Timing) {
    let Some(q) = &r.qa else {
        v.record("7 qa", false, "no questions scored".into());
        return;
    };
    let per_ok = q.per_category.values().all(|c| c.accuracy >= 0.85);
    let ok = q.overall.count >= 400
        && q.overall.accuracy >= 0.9
        && per_ok
        && t.qa_mean_latency_ms <= 50.0;
    let cats: Vec<String> = q
        .per_category
        .iter()
        .map(|(k, c)| format!("{k:?}={:.3}", c.accuracy))
        .collect();
    v.record(
        "7 qa",
        ok,
        format!(
            "{}/{} = {:.3} (need 0.9, 400 questions); per category {} (need 0.85); mean latency {:.3} ms (limit 50)",
            q.overall.correct,
            q.overall.count,
            q.overall.accuracy,
            cats.join(" "),
            t.qa_mean_latency_ms
        ),
    );
}

fn oracle_insights(v: &mut Verdicts) {
    let cfg = InsightConfig::default();
    let mut rng = seeded(500);
    let equal = (0..500)
        .filter(|_| {
            let t = random_table(&mut rng);
            detector_insights(&t, &cfg) == brute_insights(&t, &cfg)
        })
        .count();
    let mut rng = seeded(100);
    let invariant = (0..100)
        .filter(|_| {
            let t = random_table(&mut rng);
            let u = affine(&t, &mut rng);
            affine_kinds(&detector_insights(&t, &cfg)) == affine_kinds(&detector_insights(&u, &cfg))
        })
        .count();
    v.record(
        "5 insight oracle",
        equal == 500 && invariant == 100,
        format!("{equal}/500 tables equal brute force; {invariant}/100 affine maps invariant"),
    );
}

fn ids(index: &CorpusIndex, q: &Query) -> BTreeSet<String> {
    retrieve(index, q)
        .unwrap()
        .into_iter()
        .map(|h| h.chart_id)
        .collect()
}

fn retrieval(v: &mut Verdicts, r: &EvalReport) {
    let cfg = GenConfig::default();
    let insight = InsightConfig::default();
    let truth: Vec<ChartKg> = ChartType::ALL
        .iter()
        .flat_map(|ct| (0..25).map(move |i| (*ct, i)))
        .map(|(ct, i)| generate_chart(ct, i, &cfg, &insight).unwrap().truth)
        .collect();
    let index = CorpusIndex::from_kgs(truth.clone());
    let refs: Vec<&ChartKg> = truth.iter().collect();
    let queries = generate_queries(&refs, 50, 11);
    let exact = queries
        .iter()
        .filter(|q| ids(&index, q) == brute_retrieve(&truth, q))
        .count();
    let kinds: BTreeSet<&str> = queries
        .iter()
        .flat_map(|q| {
            [
                q.chart_type.map(|_| "type"),
                (!q.entities.is_empty()).then_some("entity"),
                (!q.relations.is_empty()).then_some("relation"),
                (!q.insights.is_empty()).then_some("insight"),
            ]
        })
        .flatten()
        .collect();
    let pairs = generate_queries(&refs, 400, 12);
    let monotone = pairs
        .chunks(2)
        .filter(|p| {
            let mut both = p[0].clone();
            both.chart_type = both.chart_type.or(p[1].chart_type);
            both.entities.extend(p[1].entities.iter().cloned());
            both.relations.extend(p[1].relations.iter().cloned());
            both.insights.extend(p[1].insights.iter().cloned());
            ids(&index, &both).is_subset(&ids(&index, &p[0]))
        })
        .count();
    let rt = &r.retrieval;
    let ok = rt.queries >= 50
        && rt.precision >= 0.95
        && rt.recall >= 0.95
        && exact == 50
        && kinds.len() == 4
        && monotone == 200;
    v.record(
        "6 retrieval",
        ok,
        format!(
            "parsed vs truth over {} queries P={:.3} R={:.3} (need 0.95); truth vs scan {exact}/50 exact; kinds {kinds:?}; {monotone}/200 pairs monotone",
            rt.queries, rt.precision, rt.recall
        ),
    );
}

fn worked_examples(v: &mut Verdicts) {
    let mut fails = Vec::new();
    let mut check = |what: &str, ok: bool| {
        if !ok {
            fails.push(what.to_string());
        }
    };
    let says =
        |kg: &ChartKg, q: &str, want: &str| answer(kg, q).map(|a| a.text == want).unwrap_or(false);
    let (savings, education, browser, groups) =
        (savings_kg(), education_kg(), browser_kg(), groups_kg());
    check(
        "share of Chrome",
        says(&browser, "What is the share encoded for Chrome?", "0.55"),
    );
    check(
        "blue is India",
        says(&education, "What does blue represent?", "India"),
    );
    check(
        "savings insights",
        common::vi_summary(&savings) == [vi("OutstandingNo1", &["Arab World"])].into(),
    );
    check(
        "education insights",
        common::vi_summary(&education)
            == [
                vi("Trend:increasing", &["India", "Ukraine"]),
                vi("Correlation:positive", &["India", "Ukraine"]),
            ]
            .into(),
    );
    check(
        "browser insights",
        common::vi_summary(&browser)
            == [
                vi("Dominance", &["Chrome"]),
                vi("OutstandingNo1", &["Chrome"]),
            ]
            .into(),
    );
    check(
        "scatter insights",
        common::vi_summary(&groups)
            == [
                vi("Cluster", &["Hours", "Score"]),
                vi("Outlier", &["Hours", "Score"]),
            ]
            .into(),
    );
    v.record(
        "8 worked examples",
        fails.is_empty(),
        if fails.is_empty() {
            "four graphs answer and carry the expected insights".into()
        } else {
            format!("failed: {fails:?}")
        },
    );
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.json" {
                out.insert(
                    p.strip_prefix(root).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn determinism(v: &mut Verdicts) {
    let runs: Vec<BTreeMap<String, Vec<u8>>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = Config::default();
            cfg.gen.per_type_count = 8;
            cfg.paths.corpus = dir.path().join("corpus");
            cfg.paths.out = dir.path().join("out");
            run(&cfg).unwrap();
            snapshot(dir.path())
        })
        .collect();
    let differing: Vec<&String> = runs[0]
        .keys()
        .filter(|k| runs[1].get(*k) != runs[0].get(*k))
        .collect();
    let ok = runs[0].len() == runs[1].len()
        && differing.is_empty()
        && runs[0].keys().any(|k| k.ends_with("report.json"));
    v.record(
        "9 determinism",
        ok,
        format!(
            "{} files compared across two runs, {} differ",
            runs[0].len(),
            differing.len()
        ),
    );
}

#[test]
fn acceptance() {
    // Start the verdicts on their own line after the harness's test name.
    println!();
    let mut v = Verdicts(Vec::new());
    let (report, timing, secs) = full_run();
    detection(&mut v, &report, secs);
    match &report.ocr {
        Some(o) => v.record(
            "2 ocr",
            o.overall.accuracy >= 0.99,
            format!(
                "{}/{} exact = {:.4} (need 0.99)",
                o.overall.exact, o.overall.count, o.overall.accuracy
            ),
        ),
        None => v.record("2 ocr", false, "no text scored".into()),
    }
    marks(&mut v, &report);
    v.record(
        "4 kg fidelity",
        report.kg.median_triple_f1 >= 0.95 && report.kg.mean_entity_recall >= 0.97,
        format!(
            "median triple F1 {:.4} (need 0.95); entity recall {:.4} (need 0.97) over {} graphs",
            report.kg.median_triple_f1, report.kg.mean_entity_recall, report.kg.charts
        ),
    );
    oracle_insights(&mut v);
    retrieval(&mut v, &report);
    qa(&mut v, &report, &timing);
    worked_examples(&mut v);
    determinism(&mut v);
    let failed: Vec<&String> = v.0.iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
