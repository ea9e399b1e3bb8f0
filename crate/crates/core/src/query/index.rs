use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kg::{ChartKg, ChartType, EntityType};
use crate::query::normalize;

/// A KG file that could not be indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexError {
    pub path: String,
    pub kind: String,
    pub message: String,
}

/// Charts grouped by type plus a dictionary from normalized DV/DVV labels
/// to the entities carrying them. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    by_type: BTreeMap<ChartType, Vec<String>>,
    dictionary: BTreeMap<String, BTreeSet<(String, String)>>,
    kgs: BTreeMap<String, ChartKg>,
    errors: Vec<IndexError>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexFile {
    by_type: BTreeMap<ChartType, Vec<String>>,
    dictionary: BTreeMap<String, BTreeSet<(String, String)>>,
    charts: Vec<Value>,
    #[serde(default)]
    errors: Vec<IndexError>,
}

impl CorpusIndex {
    /// Later graphs with a repeated chart id replace earlier ones.
    pub fn from_kgs(kgs: impl IntoIterator<Item = ChartKg>) -> Self {
        let mut index = CorpusIndex::default();
        for kg in kgs {
            index.kgs.insert(kg.chart_id.clone(), kg);
        }
        for (id, kg) in &index.kgs {
            index
                .by_type
                .entry(kg.chart_type)
                .or_default()
                .push(id.clone());
            for e in kg.entities() {
                if matches!(e.entity_type, EntityType::DV | EntityType::DVV) {
                    index
                        .dictionary
                        .entry(normalize(&e.label))
                        .or_default()
                        .insert((id.clone(), e.id.clone()));
                }
            }
        }
        index
    }

    pub fn len(&self) -> usize {
        self.kgs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kgs.is_empty()
    }

    pub fn charts_of(&self, chart_type: ChartType) -> &[String] {
        self.by_type.get(&chart_type).map_or(&[], Vec::as_slice)
    }

    pub fn by_type(&self) -> &BTreeMap<ChartType, Vec<String>> {
        &self.by_type
    }

    pub fn dictionary(&self) -> &BTreeMap<String, BTreeSet<(String, String)>> {
        &self.dictionary
    }

    pub fn kg(&self, chart_id: &str) -> Option<&ChartKg> {
        self.kgs.get(chart_id)
    }

    pub fn kgs(&self) -> impl Iterator<Item = &ChartKg> {
        self.kgs.values()
    }

    pub fn errors(&self) -> &[IndexError] {
        &self.errors
    }

    pub fn to_json(&self) -> Result<String> {
        let file = IndexFile {
            by_type: self.by_type.clone(),
            dictionary: self.dictionary.clone(),
            charts: self.kgs.values().map(ChartKg::to_value).collect(),
            errors: self.errors.clone(),
        };
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(file)?)?;
        s.push('\n');
        Ok(s)
    }

    /// The dictionary and type buckets are rebuilt from the stored graphs
    /// and must agree with the stored copies.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: IndexFile = serde_json::from_str(text)?;
        let kgs = file
            .charts
            .iter()
            .map(ChartKg::from_value)
            .collect::<Result<Vec<_>>>()?;
        let mut index = CorpusIndex::from_kgs(kgs);
        if index.dictionary != file.dictionary || index.by_type != file.by_type {
            return Err(Error::Validation(
                "index dictionary does not match its charts".into(),
            ));
        }
        index.errors = file.errors;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CorpusIndex::from_json(&text)
    }
}

/// Indexes KG files. Unreadable or invalid files are collected in the
/// error report and skipped; at least one graph must load.
pub fn index_corpus(paths: &[PathBuf]) -> Result<CorpusIndex> {
    let mut kgs = Vec::new();
    let mut errors = Vec::new();
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();
    for path in sorted {
        let loaded = fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))
            .and_then(|t| ChartKg::from_json(&t));
        match loaded {
            Ok(kg) => kgs.push(kg),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                errors.push(IndexError {
                    path: path.display().to_string(),
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    if kgs.is_empty() {
        return Err(Error::Validation("no loadable KG files to index".into()));
    }
    let mut index = CorpusIndex::from_kgs(kgs);
    index.errors = errors;
    Ok(index)
}

/// KG files (`*.kg.json`) directly inside a directory, sorted.
pub fn kg_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.to_string_lossy().ends_with(".kg.json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kg(id: &str, ct: ChartType, dvs: &[&str]) -> ChartKg {
        let mut kg = ChartKg::new(id, ct);
        for d in dvs {
            kg.add(EntityType::DV, *d).unwrap();
        }
        kg
    }

    #[test]
    fn one_bucket_per_type() {
        let index = CorpusIndex::from_kgs(
            ChartType::ALL
                .iter()
                .enumerate()
                .map(|(i, ct)| kg(&format!("c{i}"), *ct, &[])),
        );
        for ct in ChartType::ALL {
            assert_eq!(index.charts_of(ct).len(), 1);
        }
    }

    #[test]
    fn dictionary_keys_are_normalized() {
        let index =
            CorpusIndex::from_kgs([kg("c0", ChartType::Bar, &["Year", "  Browser  share "])]);
        let year = &index.dictionary()["year"];
        assert_eq!(
            year.iter().next().unwrap(),
            &("c0".to_string(), "dv:0".to_string())
        );
        assert!(index.dictionary().contains_key("browser share"));
    }

    #[test]
    fn bad_files_are_reported_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.kg.json");
        let bad = dir.path().join("b.kg.json");
        fs::write(&good, kg("a", ChartType::Pie, &["Browser"]).to_json()).unwrap();
        fs::write(&bad, "{not json").unwrap();
        let index = index_corpus(&kg_files(dir.path()).unwrap()).unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index.errors().len(), 1);
        assert!(index_corpus(&[bad]).is_err());
    }

    #[test]
    fn saved_indexes_reload() {
        let index = CorpusIndex::from_kgs([
            kg("a", ChartType::Line, &["Year"]),
            kg("b", ChartType::Bar, &["Country"]),
        ]);
        let back = CorpusIndex::from_json(&index.to_json().unwrap()).unwrap();
        assert_eq!(back.dictionary(), index.dictionary());
        assert_eq!(back.kg("b"), index.kg("b"));
    }
}
