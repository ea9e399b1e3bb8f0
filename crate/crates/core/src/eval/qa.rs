use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::{normalize, QaItem, QuestionType};

/// A system answer to a generated question; `answer` is `None` when the
/// question could not be answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaPrediction {
    pub id: String,
    pub answer: Option<String>,
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryScore {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub mean_latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaReport {
    pub overall: CategoryScore,
    pub per_category: BTreeMap<QuestionType, CategoryScore>,
}

#[derive(Default)]
struct Tally {
    count: usize,
    correct: usize,
    latency: f64,
}

impl Tally {
    fn score(&self) -> CategoryScore {
        CategoryScore {
            count: self.count,
            correct: self.correct,
            accuracy: self.correct as f64 / self.count as f64,
            mean_latency_ms: self.latency / self.count as f64,
        }
    }
}

/// Accuracy per category and overall, comparing normalized answer text.
/// Questions without a prediction count as wrong.
pub fn qa_accuracy(predictions: &[QaPrediction], golds: &[QaItem]) -> Result<QaReport> {
    if golds.is_empty() {
        return Err(Error::NothingToScore);
    }
    let by_id: HashMap<&str, &QaPrediction> =
        predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut overall = Tally::default();
    let mut per: BTreeMap<QuestionType, Tally> = BTreeMap::new();
    for g in golds {
        let p = by_id.get(g.id.as_str());
        let ok = p
            .and_then(|p| p.answer.as_deref())
            .is_some_and(|a| normalize(a) == normalize(&g.gold));
        let latency = p.map_or(0.0, |p| p.latency_ms);
        for t in [&mut overall, per.entry(g.question_type).or_default()] {
            t.count += 1;
            t.correct += usize::from(ok);
            t.latency += latency;
        }
    }
    Ok(QaReport {
        overall: overall.score(),
        per_category: per.into_iter().map(|(k, t)| (k, t.score())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(id: &str, ty: QuestionType, g: &str) -> QaItem {
        QaItem {
            id: id.into(),
            chart_id: "c".into(),
            question: "?".into(),
            question_type: ty,
            gold: g.into(),
        }
    }

    fn pred(id: &str, a: Option<&str>) -> QaPrediction {
        QaPrediction {
            id: id.into(),
            answer: a.map(String::from),
            latency_ms: 2.0,
            error: None,
        }
    }

    #[test]
    fn all_correct_scores_one() {
        let g = [
            gold("a", QuestionType::Encoding, "India"),
            gold("b", QuestionType::Insight, "yes"),
        ];
        let r = qa_accuracy(&[pred("a", Some("india")), pred("b", Some("yes"))], &g).unwrap();
        assert_eq!(r.overall.accuracy, 1.0);
        assert_eq!(r.overall.mean_latency_ms, 2.0);
        assert_eq!(r.per_category.len(), 2);
    }

    #[test]
    fn unanswered_questions_are_wrong() {
        let g = [
            gold("a", QuestionType::Comparison, "Peru"),
            gold("b", QuestionType::Comparison, "no"),
        ];
        let r = qa_accuracy(&[pred("a", None)], &g).unwrap();
        assert_eq!(r.overall.correct, 0);
        assert!(matches!(qa_accuracy(&[], &[]), Err(Error::NothingToScore)));
    }
}
