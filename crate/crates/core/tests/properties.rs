mod common;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use chartkg::build::InsightConfig;
use chartkg::eval::detection::match_class;
use chartkg::eval::{
    detection_metrics, iou, kg_diff, ocr_accuracy, Detection, GroundTruth, Prf, TextPair,
};
use chartkg::gen::corpus::{generate_chart, GenConfig};
use chartkg::gen::render::TextPlacement;
use chartkg::kg::PathStep;
use chartkg::parse::{read_text, Rotation};
use chartkg::query::{answer, generate_queries, retrieve, CorpusIndex, InsightPattern, Query};
use chartkg::{
    BBox, ChartKg, ChartType, EntityType, PathPattern, Predicate, RasterImage, Rgb, Role,
};
use common::oracle::{affine, affine_kinds, detector_insights, random_table, seeded};
use proptest::prelude::*;
use rand::seq::SliceRandom;

const TYPES: [EntityType; 5] = [
    EntityType::VE,
    EntityType::VEPV,
    EntityType::DV,
    EntityType::DVV,
    EntityType::VI,
];

type GraphParts = (Vec<(usize, u8)>, Vec<(usize, usize, usize)>);

/// Entities as (type, label) and candidate edges as (subject, predicate,
/// object) positions; illegal edges are dropped when the graph is built.
fn graph_parts() -> impl Strategy<Value = GraphParts> {
    prop::collection::vec((0..5usize, 0..6u8), 1..14).prop_flat_map(|ents| {
        let n = ents.len();
        (
            Just(ents),
            prop::collection::vec((0..n, 0..Predicate::ALL.len(), 0..n), 0..40),
        )
    })
}

fn build(
    ents: &[(usize, u8)],
    edges: &[(usize, usize, usize)],
) -> (ChartKg, Vec<(String, Predicate, String)>) {
    let mut kg = ChartKg::new("p", ChartType::Bar);
    let ids: Vec<String> = ents
        .iter()
        .map(|(t, l)| {
            kg.add(TYPES[*t], format!("{}{l}", TYPES[*t].as_str()))
                .unwrap()
        })
        .collect();
    let mut legal = Vec::new();
    for &(s, p, o) in edges {
        let p = Predicate::ALL[p];
        let (st, ot) = (
            kg.entity(&ids[s]).unwrap().entity_type,
            kg.entity(&ids[o]).unwrap().entity_type,
        );
        if p.admits(st, ot) {
            kg.add_relation(&ids[s], p, &ids[o]).unwrap();
            legal.push((ids[s].clone(), p, ids[o].clone()));
        } else {
            assert!(kg.add_relation(&ids[s], p, &ids[o]).is_err());
        }
    }
    (kg, legal)
}

fn bbox() -> impl Strategy<Value = BBox> {
    (0..60i32, 0..60i32, 1..40i32, 1..40i32).prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graphs_round_trip_and_stay_legal((ents, edges) in graph_parts()) {
        let (kg, _) = build(&ents, &edges);
        prop_assert!(kg.violations().is_empty());
        let text = kg.to_json();
        let back = ChartKg::from_json(&text).unwrap();
        prop_assert_eq!(&back, &kg);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn relation_insertion_order_does_not_matter((ents, edges) in graph_parts(), seed in any::<u64>()) {
        let (kg, legal) = build(&ents, &edges);
        let mut shuffled = legal.clone();
        shuffled.shuffle(&mut seeded(seed));
        let mut other = ChartKg::new("p", ChartType::Bar);
        for (t, l) in &ents {
            other.add(TYPES[*t], format!("{}{l}", TYPES[*t].as_str())).unwrap();
        }
        for (s, p, o) in &shuffled {
            other.add_relation(s, *p, o).unwrap();
        }
        prop_assert_eq!(other.to_json(), kg.to_json());
    }

    #[test]
    fn path_matches_revalidate_step_by_step(
        (ents, edges) in graph_parts(),
        steps in prop::collection::vec((0..5usize, prop::option::of(0..Predicate::ALL.len())), 2..4),
    ) {
        let (kg, _) = build(&ents, &edges);
        let pattern = PathPattern::new(
            steps.iter().map(|(t, p)| PathStep { entity_type: TYPES[*t], predicate: p.map(|p| Predicate::ALL[p]) }).collect(),
        ).unwrap();
        for path in kg.match_path(&pattern, None) {
            prop_assert_eq!(path.len(), steps.len());
            for (k, id) in path.iter().enumerate() {
                prop_assert_eq!(kg.entity(id).unwrap().entity_type, TYPES[steps[k].0]);
                if k > 0 {
                    let ok = kg.outgoing(&path[k - 1]).any(|r| {
                        &r.object == id && steps[k].1.is_none_or(|p| Predicate::ALL[p] == r.predicate)
                    });
                    prop_assert!(ok, "edge {} -> {} missing", path[k - 1], id);
                }
            }
        }
    }

    #[test]
    fn diffing_a_graph_with_itself_is_perfect((ents, edges) in graph_parts()) {
        let (kg, _) = build(&ents, &edges);
        let d = kg_diff(&kg, &kg);
        prop_assert_eq!((d.triples.f1, d.entities.f1), (1.0, 1.0));
        prop_assert!(d.missing.is_empty() && d.extra.is_empty());
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in bbox(), b in bbox()) {
        prop_assert_eq!(iou(&a, &b), iou(&b, &a));
        prop_assert_eq!(iou(&a, &a), 1.0);
        prop_assert!((0.0..=1.0).contains(&iou(&a, &b)));
    }

    #[test]
    fn dropping_a_false_positive_never_lowers_ap(
        truths in prop::collection::vec(bbox(), 1..6),
        dets in prop::collection::vec((bbox(), 0.0..1.0f64), 1..10),
        pick in any::<prop::sample::Index>(),
    ) {
        let t: Vec<GroundTruth> = truths.iter().map(|b| GroundTruth { chart_id: "c".into(), class: "bar".into(), bbox: *b }).collect();
        let d: Vec<Detection> = dets.iter().map(|(b, s)| Detection { chart_id: "c".into(), class: "bar".into(), bbox: *b, score: *s }).collect();
        let tr: Vec<&GroundTruth> = t.iter().collect();
        let mut order: Vec<&Detection> = d.iter().collect();
        order.sort_by(|a, b| b.score.total_cmp(&a.score));
        let m = match_class(&order, &tr, 0.5);
        let fps: Vec<usize> = m.hits.iter().enumerate().filter(|(_, h)| !**h).map(|(i, _)| i).collect();
        prop_assume!(!fps.is_empty());
        let drop = fps[pick.index(fps.len())];
        let mut fewer = order.clone();
        fewer.remove(drop);
        prop_assert!(match_class(&fewer, &tr, 0.5).average_precision() >= m.average_precision() - 1e-12);
    }

    #[test]
    fn scores_lie_in_the_unit_interval(
        truths in prop::collection::vec((bbox(), 0..3usize), 0..8),
        dets in prop::collection::vec((bbox(), 0..3usize, 0.0..1.0f64), 0..12),
        tp in 0..20usize, extra_p in 0..20usize, extra_t in 0..20usize,
    ) {
        let class = |k: usize| ["bar", "line", "pie"][k].to_string();
        let t: Vec<GroundTruth> = truths.iter().map(|(b, k)| GroundTruth { chart_id: "c".into(), class: class(*k), bbox: *b }).collect();
        let d: Vec<Detection> = dets.iter().map(|(b, k, s)| Detection { chart_id: "c".into(), class: class(*k), bbox: *b, score: *s }).collect();
        let r = detection_metrics(&d, &t, &chartkg::eval::IOU_THRESHOLDS);
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        for c in &r.classes {
            prop_assert!(unit(c.precision) && unit(c.recall) && unit(c.ap50) && unit(c.ap50_95));
        }
        prop_assert!(unit(r.map50) && unit(r.map50_95));
        let p = Prf::from_counts(tp, tp + extra_p, tp + extra_t);
        prop_assert!(unit(p.precision) && unit(p.recall) && unit(p.f1));
    }

    #[test]
    fn recognizer_inverts_the_renderer(text in "[A-Za-z0-9][A-Za-z0-9 .,%()'-]{0,16}[A-Za-z0-9]", rotated in any::<bool>()) {
        let mut img = RasterImage::new(260, 260, Rgb::WHITE);
        let t = TextPlacement { role: Role::Title, text: text.clone(), x: 9, y: 11, rotated, series_index: None, category_index: None };
        for (x, y) in t.pixels() {
            img.put(x, y, Rgb::BLACK);
        }
        let rot = if rotated { Rotation::Ccw90 } else { Rotation::Upright };
        let read = read_text(&img, t.ink_box(), rot).text;
        prop_assert_eq!(&read, &text);
        let pair = TextPair { role: Role::Title, truth: text, predicted: Some(read) };
        prop_assert_eq!(ocr_accuracy(&[pair]).unwrap().overall.accuracy, 1.0);
    }

    #[test]
    fn scale_free_insights_survive_affine_maps(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let t = random_table(&mut rng);
        let u = affine(&t, &mut rng);
        let cfg = InsightConfig::default();
        prop_assert_eq!(affine_kinds(&detector_insights(&t, &cfg)), affine_kinds(&detector_insights(&u, &cfg)));
    }
}

static CORPUS: LazyLock<CorpusIndex> = LazyLock::new(|| {
    let cfg = GenConfig::default();
    let kgs = ChartType::ALL
        .iter()
        .flat_map(|ct| (0..10).map(move |i| (*ct, i)))
        .map(|(ct, i)| {
            generate_chart(ct, i, &cfg, &InsightConfig::default())
                .unwrap()
                .truth
        });
    CorpusIndex::from_kgs(kgs)
});

fn ids(q: &Query) -> BTreeSet<String> {
    retrieve(&CORPUS, q)
        .unwrap()
        .into_iter()
        .map(|h| h.chart_id)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn more_constraints_never_widen_results(seed in any::<u64>()) {
        let kgs: Vec<&ChartKg> = CORPUS.kgs().collect();
        let qs = generate_queries(&kgs, 2, seed);
        let (base, extra) = (&qs[0], &qs[1]);
        let mut both = base.clone();
        both.chart_type = both.chart_type.or(extra.chart_type);
        both.entities.extend(extra.entities.iter().cloned());
        both.relations.extend(extra.relations.iter().cloned());
        both.insights.extend(extra.insights.iter().cloned());
        prop_assert!(ids(&both).is_subset(&ids(base)));
    }

    #[test]
    fn evidence_quotes_the_graph(seed in any::<u64>()) {
        let kgs: Vec<&ChartKg> = CORPUS.kgs().collect();
        for q in generate_queries(&kgs, 3, seed) {
            for hit in retrieve(&CORPUS, &q).unwrap() {
                let kg = CORPUS.kg(&hit.chart_id).unwrap();
                prop_assert!(hit.evidence.triples.iter().all(|t| t.exists_in(kg)));
                prop_assert!(hit.evidence.entities.iter().all(|e| kg.entity(e).is_some()));
            }
        }
    }

    #[test]
    fn answers_are_pure_and_sound(chart in 0..40usize, seed in any::<u64>()) {
        let kg = CORPUS.kgs().nth(chart).unwrap();
        let cfg = GenConfig::default();
        let (ct, i) = chartkg::gen::corpus::parse_chart_id(&kg.chart_id).unwrap();
        let spec = chartkg::gen::corpus::sample_spec(ct, i, &cfg).unwrap();
        let extra = ["What does blue represent?", "Does the chart show a cluster?", "Which Year has the highest value?"];
        let mut questions: Vec<String> = chartkg::query::generate_questions(&spec, &InsightConfig::default(), seed)
            .into_iter()
            .map(|q| q.question)
            .collect();
        questions.extend(extra.iter().map(|s| s.to_string()));
        for q in questions {
            let (a, b) = (answer(kg, &q), answer(kg, &q));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert!(a.evidence.iter().all(|t| t.exists_in(kg)));
                    prop_assert_eq!(a, b);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                _ => prop_assert!(false, "answers to {q:?} disagree"),
            }
        }
    }
}

#[test]
fn insight_patterns_need_known_qualifiers() {
    let q = Query {
        insights: vec![InsightPattern {
            kind: chartkg::build::InsightKind::Cluster,
            qualifier: Some("tight".into()),
        }],
        ..Default::default()
    };
    assert!(q.validate().is_err());
}
