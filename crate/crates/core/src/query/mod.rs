//! Retrieval over a corpus of chart KGs and template question answering
//! over a single KG.

pub mod index;
pub mod qa;
pub mod queries;
pub mod questions;
pub mod retrieve;

use serde::{Deserialize, Serialize};

use crate::gen::spec::named_color;
use crate::kg::{ChartKg, Entity, Predicate, Relation};
use crate::raster::Rgb;

pub use index::{index_corpus, CorpusIndex, IndexError};
pub use qa::{answer, classify_question, parse_question, Answer, QuestionType, Template};
pub use queries::generate_queries;
pub use questions::{generate_questions, QaItem};
pub use retrieve::{retrieve, Evidence, InsightPattern, Query, RelationPattern, RetrievalHit};

/// Lowercase, trimmed, inner whitespace collapsed to single spaces.
pub fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// How a query term matched a label. Earlier levels win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchLevel {
    Exact,
    Substring,
    Fuzzy,
}

/// Both arguments must already be normalized.
pub fn match_level(term: &str, label: &str) -> Option<MatchLevel> {
    if term.is_empty() {
        return None;
    }
    if term == label {
        Some(MatchLevel::Exact)
    } else if label.contains(term) {
        Some(MatchLevel::Substring)
    } else if strsim::levenshtein(term, label) <= 1 {
        Some(MatchLevel::Fuzzy)
    } else {
        None
    }
}

/// Color named by a palette name or a `#RRGGBB` literal.
pub fn term_color(term: &str) -> Option<Rgb> {
    named_color(term).or_else(|| term.trim().to_uppercase().parse().ok())
}

/// Normalized spellings of a term: itself plus the color VEPV label it
/// names, if any.
pub fn term_forms(term: &str) -> Vec<String> {
    let mut forms = vec![normalize(term)];
    if let Some(c) = term_color(term) {
        forms.push(normalize(&crate::build::labels::color(c)));
    }
    forms
}

/// Best level at which any form of `term` matches `label`.
pub fn best_match(forms: &[String], label: &str) -> Option<MatchLevel> {
    let label = normalize(label);
    forms.iter().filter_map(|f| match_level(f, &label)).min()
}

/// Entities passing `keep` that match `term` at the best level reached by
/// any of them, in ordinal order.
pub fn locate<'a>(kg: &'a ChartKg, term: &str, keep: impl Fn(&Entity) -> bool) -> Vec<&'a Entity> {
    locate_among(kg.entities().iter().filter(|e| keep(e)), term)
}

pub fn locate_among<'a>(
    candidates: impl IntoIterator<Item = &'a Entity>,
    term: &str,
) -> Vec<&'a Entity> {
    let forms = term_forms(term);
    let scored: Vec<(MatchLevel, &Entity)> = candidates
        .into_iter()
        .filter_map(|e| best_match(&forms, &e.label).map(|l| (l, e)))
        .collect();
    let Some(best) = scored.iter().map(|s| s.0).min() else {
        return Vec::new();
    };
    scored
        .into_iter()
        .filter(|s| s.0 == best)
        .map(|s| s.1)
        .collect()
}

/// An edge quoted verbatim from a KG, by entity id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: Predicate,
    pub object: String,
}

impl From<&Relation> for Triple {
    fn from(r: &Relation) -> Self {
        Triple {
            subject: r.subject.clone(),
            predicate: r.predicate,
            object: r.object.clone(),
        }
    }
}

impl Triple {
    pub fn new(subject: &str, predicate: Predicate, object: &str) -> Self {
        Triple {
            subject: subject.to_string(),
            predicate,
            object: object.to_string(),
        }
    }

    pub fn exists_in(&self, kg: &ChartKg) -> bool {
        kg.contains_triple(&self.subject, self.predicate, &self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ChartType, EntityType};

    #[test]
    fn normalization_collapses_whitespace() {
        assert_eq!(normalize("  Browser   Share\t"), "browser share");
    }

    #[test]
    fn cascade_prefers_exact_matches() {
        assert_eq!(match_level("year", "year"), Some(MatchLevel::Exact));
        assert_eq!(match_level("edu", "education"), Some(MatchLevel::Substring));
        assert_eq!(match_level("educatoin", "education"), None);
        assert_eq!(
            match_level("eduction", "education"),
            Some(MatchLevel::Fuzzy)
        );
        assert_eq!(match_level("", "education"), None);
    }

    #[test]
    fn locate_keeps_only_the_best_level() {
        let mut kg = ChartKg::new("c", ChartType::Bar);
        kg.add(EntityType::DVV, "India").unwrap();
        kg.add(EntityType::DVV, "Indiana").unwrap();
        let hits = locate(&kg, "india", |_| true);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].label, "India");
        let hits = locate(&kg, "indi", |_| true);
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn color_names_resolve_to_vepv_labels() {
        let forms = term_forms("Blue");
        assert_eq!(forms[1], "color:#1f77b4");
        assert_eq!(best_match(&forms, "color:#1F77B4"), Some(MatchLevel::Exact));
    }
}
