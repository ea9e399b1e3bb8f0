use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::detection::iou;
use crate::gen::render::Annotation;
use crate::parse::ParseResult;
use crate::role::Role;

/// An annotated text and the text read for the same element, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPair {
    pub role: Role,
    pub truth: String,
    pub predicted: Option<String>,
}

/// Edit distance divided by the longer length; 0 for two empty strings.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let n = a.chars().count().max(b.chars().count());
    if n == 0 {
        0.0
    } else {
        strsim::levenshtein(a, b) as f64 / n as f64
    }
}

/// Pairs each annotated text element with the same-role detection of
/// highest IoU (at least 0.5), each detection used once.
pub fn align_texts(pr: &ParseResult, ann: &Annotation) -> Vec<TextPair> {
    let mut used = vec![false; pr.elements.len()];
    let mut out = Vec::new();
    for a in ann.elements.iter().filter(|e| e.role.is_text()) {
        let best = pr
            .elements
            .iter()
            .enumerate()
            .filter(|(i, e)| !used[*i] && e.role == a.role)
            .map(|(i, e)| (i, iou(&e.bbox, &a.bbox)))
            .filter(|(_, v)| *v >= 0.5)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
        let predicted = best.and_then(|(i, _)| {
            used[i] = true;
            pr.elements[i].text.clone()
        });
        out.push(TextPair {
            role: a.role,
            truth: a.text.clone().unwrap_or_default(),
            predicted,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoleOcr {
    pub count: usize,
    pub exact: usize,
    pub accuracy: f64,
    pub mean_edit_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrReport {
    pub per_role: BTreeMap<Role, RoleOcr>,
    pub overall: RoleOcr,
}

fn summarize<'a>(pairs: impl Iterator<Item = &'a TextPair>) -> RoleOcr {
    let mut r = RoleOcr::default();
    let mut ned = 0.0;
    for p in pairs {
        r.count += 1;
        match &p.predicted {
            Some(t) => {
                r.exact += usize::from(*t == p.truth);
                ned += normalized_edit_distance(t, &p.truth);
            }
            None => ned += 1.0,
        }
    }
    if r.count > 0 {
        r.accuracy = r.exact as f64 / r.count as f64;
        r.mean_edit_distance = ned / r.count as f64;
    }
    r
}

/// Exact-match accuracy and mean normalized edit distance, per role and
/// overall. A missing prediction is wrong with distance 1.
pub fn ocr_accuracy(pairs: &[TextPair]) -> Result<OcrReport> {
    if pairs.is_empty() {
        return Err(Error::NothingToScore);
    }
    let mut roles: Vec<Role> = pairs.iter().map(|p| p.role).collect();
    roles.sort();
    roles.dedup();
    let per_role = roles
        .into_iter()
        .map(|role| (role, summarize(pairs.iter().filter(|p| p.role == role))))
        .collect();
    Ok(OcrReport {
        per_role,
        overall: summarize(pairs.iter()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(truth: &str, predicted: Option<&str>) -> TextPair {
        TextPair {
            role: Role::Title,
            truth: truth.into(),
            predicted: predicted.map(String::from),
        }
    }

    #[test]
    fn one_substitution_in_four() {
        let r = ocr_accuracy(&[pair("Year", Some("Yeor"))]).unwrap();
        assert_eq!(r.overall.accuracy, 0.0);
        assert!((r.overall.mean_edit_distance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn equal_strings_score_one() {
        let r = ocr_accuracy(&[pair("Year", Some("Year")), pair("2010", Some("2010"))]).unwrap();
        assert_eq!(r.overall.accuracy, 1.0);
        assert_eq!(r.per_role[&Role::Title].count, 2);
    }

    #[test]
    fn missing_predictions_count_as_wrong() {
        let r = ocr_accuracy(&[pair("Year", None), pair("Peru", Some("Peru"))]).unwrap();
        assert_eq!(r.overall.accuracy, 0.5);
        assert!(matches!(ocr_accuracy(&[]), Err(Error::NothingToScore)));
    }
}
