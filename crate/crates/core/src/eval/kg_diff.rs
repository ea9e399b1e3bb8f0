use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kg::{ChartKg, EntityType, RelationClass};

/// Precision, recall and F1 of a predicted set against a truth set. Two
/// empty sets agree perfectly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub truth: usize,
}

impl Prf {
    pub fn of<T: Ord>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>) -> Prf {
        let tp = predicted.intersection(truth).count();
        Prf::from_counts(tp, predicted.len(), truth.len())
    }

    pub fn from_counts(tp: usize, predicted: usize, truth: usize) -> Prf {
        let ratio = |n: usize, d: usize, empty: bool| {
            if d == 0 {
                if empty {
                    1.0
                } else {
                    0.0
                }
            } else {
                n as f64 / d as f64
            }
        };
        let precision = ratio(tp, predicted, truth == 0);
        let recall = ratio(tp, truth, predicted == 0);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            true_positives: tp,
            predicted,
            truth,
        }
    }
}

type EntityKey = (EntityType, String);
type TripleKey = (EntityKey, String, EntityKey);

fn entity_keys(kg: &ChartKg) -> BTreeSet<EntityKey> {
    kg.entities()
        .iter()
        .map(|e| (e.entity_type, e.label.clone()))
        .collect()
}

fn triple_keys(kg: &ChartKg, class: Option<RelationClass>) -> BTreeSet<TripleKey> {
    let key = |id: &str| -> EntityKey {
        let e = kg.entity(id).expect("relation endpoints are entities");
        (e.entity_type, e.label.clone())
    };
    kg.relations()
        .iter()
        .filter(|r| class.is_none_or(|c| r.class == c))
        .map(|r| {
            (
                key(&r.subject),
                r.predicate.as_str().to_string(),
                key(&r.object),
            )
        })
        .collect()
}

fn show(t: &TripleKey) -> String {
    format!("{}:{} {} {}:{}", t.0 .0, t.0 .1, t.1, t.2 .0, t.2 .1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgDiffReport {
    pub chart_id: String,
    pub triples: Prf,
    pub entities: Prf,
    pub by_class: BTreeMap<String, Prf>,
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

/// Compares two graphs after replacing entity ids by (type, label).
pub fn kg_diff(predicted: &ChartKg, truth: &ChartKg) -> KgDiffReport {
    let (p, t) = (triple_keys(predicted, None), triple_keys(truth, None));
    let by_class = RelationClass::ALL
        .into_iter()
        .map(|c| {
            (
                c.as_str().to_string(),
                Prf::of(
                    &triple_keys(predicted, Some(c)),
                    &triple_keys(truth, Some(c)),
                ),
            )
        })
        .collect();
    KgDiffReport {
        chart_id: truth.chart_id.clone(),
        triples: Prf::of(&p, &t),
        entities: Prf::of(&entity_keys(predicted), &entity_keys(truth)),
        by_class,
        missing: t.difference(&p).map(show).collect(),
        extra: p.difference(&t).map(show).collect(),
    }
}
