use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::build::insights::InsightKind;
use crate::error::{Error, Result};
use crate::kg::{ChartKg, ChartType, EntityType, Predicate};
use crate::query::index::CorpusIndex;
use crate::query::{best_match, match_level, normalize, term_forms, MatchLevel, Triple};

/// Empty endpoint terms match any entity; a missing predicate matches any
/// predicate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationPattern {
    #[serde(default)]
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<Predicate>,
    #[serde(default)]
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsightPattern {
    pub kind: InsightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
}

impl InsightPattern {
    /// Whether a VI label satisfies the pattern. Without a qualifier any
    /// qualified variant of the kind matches.
    pub fn matches_label(&self, label: &str) -> bool {
        let kind = self.kind.as_str();
        match &self.qualifier {
            Some(q) => label == format!("{kind}:{q}"),
            None => label == kind || label.strip_prefix(kind).is_some_and(|r| r.starts_with(':')),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_type: Option<ChartType>,
    #[serde(default)]
    pub entities: Vec<String>,
    #[serde(default)]
    pub relations: Vec<RelationPattern>,
    #[serde(default)]
    pub insights: Vec<InsightPattern>,
}

impl Query {
    pub fn validate(&self) -> Result<()> {
        if self.chart_type.is_none()
            && self.entities.is_empty()
            && self.relations.is_empty()
            && self.insights.is_empty()
        {
            return Err(Error::Validation("query has no constraints".into()));
        }
        if let Some(t) = self.entities.iter().find(|t| normalize(t).is_empty()) {
            return Err(Error::Validation(format!("blank entity term {t:?}")));
        }
        for p in &self.insights {
            let allowed = p.kind.qualifiers();
            if let Some(q) = &p.qualifier {
                if !allowed.contains(&q.as_str()) {
                    return Err(Error::Validation(format!(
                        "{} takes no qualifier `{q}`",
                        p.kind
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let q: Query = serde_json::from_str(text)?;
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Evidence {
    /// DV/DVV entities matched by entity terms, and matched VI entities.
    pub entities: Vec<String>,
    pub triples: Vec<Triple>,
}

impl Evidence {
    pub fn len(&self) -> usize {
        self.entities.len() + self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub score: usize,
    pub evidence: Evidence,
}

/// Entities of one chart matching an entity term at the best level the
/// chart reaches, looked up through the dictionary.
fn entity_matches(
    index: &CorpusIndex,
    term: &str,
) -> BTreeMap<String, (MatchLevel, BTreeSet<String>)> {
    let forms = term_forms(term);
    let mut out: BTreeMap<String, (MatchLevel, BTreeSet<String>)> = BTreeMap::new();
    for (key, postings) in index.dictionary() {
        let Some(level) = forms.iter().filter_map(|f| match_level(f, key)).min() else {
            continue;
        };
        for (chart, entity) in postings {
            let slot = out.entry(chart.clone()).or_insert((level, BTreeSet::new()));
            if level < slot.0 {
                *slot = (level, BTreeSet::new());
            }
            if level == slot.0 {
                slot.1.insert(entity.clone());
            }
        }
    }
    out
}

fn endpoint_level(term: &str, forms: &[String], label: &str) -> Option<MatchLevel> {
    if normalize(term).is_empty() {
        Some(MatchLevel::Exact)
    } else {
        best_match(forms, label)
    }
}

/// Triples matching a relation pattern at the best combined endpoint
/// level.
fn relation_matches(kg: &ChartKg, p: &RelationPattern) -> Vec<Triple> {
    let (sf, of) = (term_forms(&p.subject), term_forms(&p.object));
    let mut scored: Vec<(MatchLevel, Triple)> = Vec::new();
    for r in kg.relations() {
        if p.predicate.is_some_and(|q| q != r.predicate) {
            continue;
        }
        let (Some(a), Some(b)) = (
            endpoint_level(&p.subject, &sf, kg.label(&r.subject)),
            endpoint_level(&p.object, &of, kg.label(&r.object)),
        ) else {
            continue;
        };
        scored.push((a.max(b), Triple::from(r)));
    }
    let Some(best) = scored.iter().map(|s| s.0).min() else {
        return Vec::new();
    };
    scored
        .into_iter()
        .filter(|s| s.0 == best)
        .map(|s| s.1)
        .collect()
}

fn insight_matches(kg: &ChartKg, p: &InsightPattern) -> (Vec<String>, Vec<Triple>) {
    let vis: Vec<String> = kg
        .entities_of(EntityType::VI)
        .filter(|e| p.matches_label(&e.label))
        .map(|e| e.id.clone())
        .collect();
    let triples = vis
        .iter()
        .flat_map(|vi| {
            kg.incoming(vi)
                .filter(|r| r.predicate == Predicate::ExhibitsInsight)
                .map(Triple::from)
        })
        .collect();
    (vis, triples)
}

/// Applies the type, entity, relation and insight filters in that order.
/// Hits are ranked by evidence count, then chart id.
pub fn retrieve(index: &CorpusIndex, query: &Query) -> Result<Vec<RetrievalHit>> {
    query.validate()?;
    let mut candidates: Vec<&ChartKg> = index
        .kgs()
        .filter(|kg| query.chart_type.is_none_or(|t| kg.chart_type == t))
        .collect();
    let mut evidence: BTreeMap<String, (BTreeSet<String>, BTreeSet<Triple>)> = BTreeMap::new();

    for term in &query.entities {
        let matches = entity_matches(index, term);
        candidates.retain(|kg| match matches.get(&kg.chart_id) {
            Some((_, ids)) => {
                evidence
                    .entry(kg.chart_id.clone())
                    .or_default()
                    .0
                    .extend(ids.iter().cloned());
                true
            }
            None => false,
        });
    }
    for p in &query.relations {
        candidates.retain(|kg| {
            let triples = relation_matches(kg, p);
            let keep = !triples.is_empty();
            evidence
                .entry(kg.chart_id.clone())
                .or_default()
                .1
                .extend(triples);
            keep
        });
    }
    for p in &query.insights {
        candidates.retain(|kg| {
            let (vis, triples) = insight_matches(kg, p);
            let keep = !vis.is_empty();
            let slot = evidence.entry(kg.chart_id.clone()).or_default();
            slot.0.extend(vis);
            slot.1.extend(triples);
            keep
        });
    }

    let mut hits: Vec<RetrievalHit> = candidates
        .into_iter()
        .map(|kg| {
            let (entities, triples) = evidence.remove(&kg.chart_id).unwrap_or_default();
            let evidence = Evidence {
                entities: entities.into_iter().collect(),
                triples: triples.into_iter().collect(),
            };
            RetrievalHit {
                chart_id: kg.chart_id.clone(),
                chart_type: kg.chart_type,
                score: evidence.len(),
                evidence,
            }
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.chart_id.cmp(&b.chart_id))
    });
    Ok(hits)
}
