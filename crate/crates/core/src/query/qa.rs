use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::build::insights::InsightKind;
use crate::build::labels;
use crate::error::{Error, Result};
use crate::kg::{ChartKg, ChartType, Entity, EntityType, Predicate};
use crate::query::retrieve::InsightPattern;
use crate::query::{locate, locate_among, normalize, term_color, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionType {
    Comparison,
    Encoding,
    Insight,
}

impl QuestionType {
    pub const ALL: [QuestionType; 3] = [
        QuestionType::Comparison,
        QuestionType::Encoding,
        QuestionType::Insight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Comparison => "comparison",
            QuestionType::Encoding => "encoding",
            QuestionType::Insight => "insight",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QuestionType::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown question type `{s}`")))
    }
}

/// Word prefixes per family, checked in declaration order.
const COMPARISON_STEMS: [&str; 7] = [
    "higher", "highest", "lower", "lowest", "greater", "most", "least",
];
const COMPARISON_PREFIXES: [&str; 3] = ["compar", "larg", "small"];
const ENCODING_PREFIXES: [&str; 4] = ["encod", "represent", "color", "colour"];
/// Multi-word keywords, so that a variable named "Height" does not turn an
/// insight question into an encoding one.
const ENCODING_PHRASES: [&str; 2] = ["height of", "stand for"];
const INSIGHT_PREFIXES: [&str; 6] = [
    "trend",
    "correlat",
    "outlier",
    "cluster",
    "dominan",
    "outstanding",
];

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

/// Question family by keyword: comparison, then encoding, then insight.
pub fn classify_question(text: &str) -> Result<QuestionType> {
    if text.trim().is_empty() {
        return Err(Error::UnsupportedQuestion("empty question".into()));
    }
    let ws = words(text);
    let joined = ws.join(" ");
    let has_prefix = |ps: &[&str]| ws.iter().any(|w| ps.iter().any(|p| w.starts_with(p)));
    if ws.iter().any(|w| COMPARISON_STEMS.contains(&w.as_str())) || has_prefix(&COMPARISON_PREFIXES)
    {
        return Ok(QuestionType::Comparison);
    }
    if has_prefix(&ENCODING_PREFIXES)
        || ENCODING_PHRASES
            .iter()
            .any(|p| format!(" {joined} ").contains(&format!(" {p} ")))
    {
        return Ok(QuestionType::Encoding);
    }
    if has_prefix(&INSIGHT_PREFIXES) {
        return Ok(QuestionType::Insight);
    }
    Err(Error::UnsupportedQuestion(format!(
        "no template keyword in {text:?}"
    )))
}

/// A visual channel named in an encoding question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Height,
    Color,
    Angle,
    Position,
    Horizontal,
    Vertical,
}

impl Channel {
    fn parse(s: &str) -> Option<Channel> {
        Some(match normalize(s).as_str() {
            "height" | "length" => Channel::Height,
            "color" | "colour" => Channel::Color,
            "angle" | "size" => Channel::Angle,
            "position" | "order" => Channel::Position,
            "horizontal position" | "x position" | "x" => Channel::Horizontal,
            "vertical position" | "y position" | "y" => Channel::Vertical,
            _ => return None,
        })
    }
}

/// A parsed question template.
#[derive(Debug, Clone, PartialEq)]
pub enum Template {
    /// Which <category> has the highest|lowest <measure> (for <group>)?
    Extreme {
        category: String,
        highest: bool,
        measure: String,
        group: Option<String>,
    },
    /// Is <a> greater than <b> in <context>?
    Greater {
        a: String,
        b: String,
        context: String,
    },
    /// What does the <channel> of the <marks> represent?
    ChannelMeaning { channel: Channel, marks: String },
    /// What does <color> represent?
    ColorMeaning { color: String },
    /// What is the share encoded for <value>?
    ShareOf { value: String },
    /// Is there a(n) <qualifier> <kind> for <subject>?
    InsightFor {
        pattern: InsightPattern,
        subject: String,
    },
    /// Does the chart show <kind>?
    ChartShows { pattern: InsightPattern },
}

fn re(p: &str) -> Regex {
    Regex::new(&format!("(?i)^{p}$")).expect("template pattern")
}

static EXTREME: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"which (.+?) has the (highest|lowest|largest|smallest|most|least) (.+?)(?: for (.+?))?\s*\?*",
    )
});
static GREATER: LazyLock<Regex> =
    LazyLock::new(|| re(r"is (.+?) (?:greater|higher|larger) than (.+?) in (.+?)\s*\?*"));
static CHANNEL: LazyLock<Regex> = LazyLock::new(|| {
    re(r"what does the (.+?) of (?:the )?(.+?) (?:represent|encode|stand for)\s*\?*")
});
static COLOR: LazyLock<Regex> =
    LazyLock::new(|| re(r"what does (?:the color )?(.+?) (?:represent|encode|stand for)\s*\?*"));
static SHARE: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"what is the (?:share|proportion|fraction) (?:encoded |represented )?(?:for|of) (.+?)\s*\?*",
    )
});
static INSIGHT_FOR: LazyLock<Regex> =
    LazyLock::new(|| re(r"is there (?:an? |any )?(.+?) (?:for|in|involving) (.+?)\s*\?*"));
static CHART_SHOWS: LazyLock<Regex> =
    LazyLock::new(|| re(r"does the chart (?:show|exhibit|have) (?:an? |any )?(.+?)\s*\?*"));

/// Insight kind phrases, as they appear at the end of a phrase.
const KIND_PHRASES: [(&str, InsightKind); 14] = [
    ("outstanding maximum", InsightKind::OutstandingNo1),
    ("outstanding top value", InsightKind::OutstandingNo1),
    ("outstanding value", InsightKind::OutstandingNo1),
    ("dominant value", InsightKind::Dominance),
    ("dominance", InsightKind::Dominance),
    ("trends", InsightKind::Trend),
    ("trend", InsightKind::Trend),
    ("correlations", InsightKind::Correlation),
    ("correlation", InsightKind::Correlation),
    ("outliers", InsightKind::Outlier),
    ("outlier", InsightKind::Outlier),
    ("clusters", InsightKind::Cluster),
    ("clustering", InsightKind::Cluster),
    ("cluster", InsightKind::Cluster),
];

/// `[qualifier] kind`, e.g. "increasing trend" or "outliers".
fn parse_insight_phrase(phrase: &str) -> Result<InsightPattern> {
    let p = normalize(phrase);
    for (name, kind) in KIND_PHRASES {
        let Some(rest) = p.strip_suffix(name) else {
            continue;
        };
        if !(rest.is_empty() || rest.ends_with(' ')) {
            continue;
        }
        let q = rest.trim();
        if q.is_empty() {
            return Ok(InsightPattern {
                kind,
                qualifier: None,
            });
        }
        if kind.qualifiers().contains(&q) {
            return Ok(InsightPattern {
                kind,
                qualifier: Some(q.to_string()),
            });
        }
        return Err(Error::UnsupportedQuestion(format!(
            "`{q}` does not qualify {kind}"
        )));
    }
    Err(Error::UnsupportedQuestion(format!(
        "no insight kind in {phrase:?}"
    )))
}

fn group(c: &regex::Captures<'_>, i: usize) -> String {
    c.get(i)
        .map_or(String::new(), |m| m.as_str().trim().to_string())
}

/// Classifies a question and matches it against that family's templates.
pub fn parse_question(text: &str) -> Result<(QuestionType, Template)> {
    let ty = classify_question(text)?;
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let unsupported = || Error::UnsupportedQuestion(format!("no {ty} template matches {text:?}"));
    let t = match ty {
        QuestionType::Comparison => {
            if let Some(c) = EXTREME.captures(&text) {
                let dir = group(&c, 2).to_lowercase();
                Template::Extreme {
                    category: group(&c, 1),
                    highest: matches!(dir.as_str(), "highest" | "largest" | "most"),
                    measure: group(&c, 3),
                    group: c.get(4).map(|m| m.as_str().trim().to_string()),
                }
            } else if let Some(c) = GREATER.captures(&text) {
                Template::Greater {
                    a: group(&c, 1),
                    b: group(&c, 2),
                    context: group(&c, 3),
                }
            } else {
                return Err(unsupported());
            }
        }
        QuestionType::Encoding => {
            if let Some(c) = SHARE.captures(&text) {
                Template::ShareOf {
                    value: group(&c, 1),
                }
            } else if let Some(c) = CHANNEL.captures(&text) {
                let channel = Channel::parse(&group(&c, 1)).ok_or_else(|| {
                    Error::UnsupportedQuestion(format!("unknown channel `{}`", group(&c, 1)))
                })?;
                Template::ChannelMeaning {
                    channel,
                    marks: group(&c, 2),
                }
            } else if let Some(c) = COLOR.captures(&text) {
                Template::ColorMeaning {
                    color: group(&c, 1),
                }
            } else {
                return Err(unsupported());
            }
        }
        QuestionType::Insight => {
            if let Some(c) = CHART_SHOWS.captures(&text) {
                Template::ChartShows {
                    pattern: parse_insight_phrase(&group(&c, 1))?,
                }
            } else if let Some(c) = INSIGHT_FOR.captures(&text) {
                Template::InsightFor {
                    pattern: parse_insight_phrase(&group(&c, 1))?,
                    subject: group(&c, 2),
                }
            } else {
                return Err(unsupported());
            }
        }
    };
    Ok((ty, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub question_type: QuestionType,
    pub text: String,
    /// Supporting edges, each present verbatim in the queried KG.
    pub evidence: Vec<Triple>,
    /// Labels of every entity the answer and its evidence mention.
    pub entities: BTreeMap<String, String>,
}

impl Answer {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        Ok(s)
    }
}

/// Words that name the value channel itself rather than a variable.
const VALUE_WORDS: [&str; 6] = [
    "share",
    "proportion",
    "percentage",
    "value",
    "angle",
    "size",
];

fn targets<'a>(kg: &'a ChartKg, id: &str, p: Predicate) -> Vec<&'a str> {
    kg.outgoing(id)
        .filter(|r| r.predicate == p)
        .map(|r| r.object.as_str())
        .collect()
}

fn first_target<'a>(kg: &'a ChartKg, id: &str, p: Predicate) -> Option<&'a str> {
    targets(kg, id, p).into_iter().next()
}

fn value_predicate(ct: ChartType) -> Predicate {
    match ct {
        ChartType::Bar => Predicate::HasHeight,
        ChartType::Pie => Predicate::HasAngle,
        ChartType::Line | ChartType::Scatter => Predicate::HasY,
    }
}

/// A mark with its value (sequence X), position-index value (sequence Y)
/// and color-encoded group (sequence Z).
#[derive(Debug, Clone)]
struct MarkRow<'a> {
    ve: &'a str,
    value: f64,
    value_vepv: &'a str,
    variable: Option<&'a str>,
    index: Option<(&'a str, Option<&'a str>)>,
    group: Option<(&'a str, Option<&'a str>)>,
}

impl MarkRow<'_> {
    fn evidence(&self, vp: Predicate, out: &mut Vec<Triple>) {
        out.push(Triple::new(self.ve, vp, self.value_vepv));
        if let Some(dv) = self.variable {
            out.push(Triple::new(self.value_vepv, Predicate::EncodesVariable, dv));
        }
        for (p, link) in [
            (Predicate::HasPositionIndex, self.index),
            (Predicate::HasColor, self.group),
        ] {
            if let Some((vepv, dvv)) = link {
                out.push(Triple::new(self.ve, p, vepv));
                if let Some(dvv) = dvv {
                    out.push(Triple::new(vepv, Predicate::EncodesValue, dvv));
                }
            }
        }
    }

    fn side(&self, side: Side) -> Option<&str> {
        match side {
            Side::Index => self.index.and_then(|l| l.1),
            Side::Group => self.group.and_then(|l| l.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Index,
    Group,
}

fn mark_rows(kg: &ChartKg) -> Vec<MarkRow<'_>> {
    let vp = value_predicate(kg.chart_type);
    let link = |ve: &str, p: Predicate| {
        first_target(kg, ve, p).map(|vepv| (vepv, first_target(kg, vepv, Predicate::EncodesValue)))
    };
    kg.entities_of(EntityType::VE)
        .filter_map(|e| {
            let value_vepv = first_target(kg, &e.id, vp)?;
            let value = labels::numeric_value(kg.label(value_vepv))?;
            Some(MarkRow {
                ve: &e.id,
                value,
                value_vepv,
                variable: first_target(kg, value_vepv, Predicate::EncodesVariable),
                index: link(&e.id, Predicate::HasPositionIndex),
                group: link(&e.id, Predicate::HasColor),
            })
        })
        .collect()
}

fn ids(es: &[&Entity]) -> BTreeSet<String> {
    es.iter().map(|e| e.id.clone()).collect()
}

fn is_value_word(term: &str) -> bool {
    VALUE_WORDS.contains(&normalize(term).as_str())
}

fn not_found(what: &str, term: &str) -> Error {
    Error::EntityNotFound(format!("no {what} matches `{term}`"))
}

fn is_instance(kg: &ChartKg, dvv: &str, dvs: &BTreeSet<String>) -> bool {
    targets(kg, dvv, Predicate::IsInstanceOf)
        .into_iter()
        .any(|d| dvs.contains(d))
}

fn entities_with_ids<'a>(kg: &'a ChartKg, set: &BTreeSet<&str>) -> Vec<&'a Entity> {
    set.iter().filter_map(|id| kg.entity(id)).collect()
}

/// Restricts rows to a measure DV, unless the measure names the value
/// channel itself.
fn restrict_to_measure<'a>(
    kg: &ChartKg,
    rows: Vec<MarkRow<'a>>,
    measure: &str,
) -> Result<Vec<MarkRow<'a>>> {
    if is_value_word(measure) {
        return Ok(rows);
    }
    let variables: BTreeSet<&str> = rows.iter().filter_map(|r| r.variable).collect();
    let found = locate_among(entities_with_ids(kg, &variables), measure);
    if found.is_empty() {
        return Err(not_found("plotted variable", measure));
    }
    let keep = ids(&found);
    Ok(rows
        .into_iter()
        .filter(|r| r.variable.is_some_and(|v| keep.contains(v)))
        .collect())
}

fn group_values<'a>(rows: &[MarkRow<'a>], side: Side) -> BTreeSet<&'a str> {
    rows.iter()
        .filter_map(|r| match side {
            Side::Index => r.index.and_then(|l| l.1),
            Side::Group => r.group.and_then(|l| l.1),
        })
        .collect()
}

fn answer_comparison(kg: &ChartKg, t: &Template) -> Result<(String, Vec<Triple>)> {
    let vp = value_predicate(kg.chart_type);
    let rows = mark_rows(kg);
    if rows.is_empty() {
        return Err(Error::IncompleteGraph(
            "no mark carries a data value".into(),
        ));
    }
    let mut evidence = Vec::new();
    match t {
        Template::Extreme {
            category,
            highest,
            measure,
            group,
        } => {
            let dvs = locate(kg, category, |e| e.entity_type == EntityType::DV);
            if dvs.is_empty() {
                return Err(not_found("data variable", category));
            }
            let dv_ids = ids(&dvs);
            let mut rows = restrict_to_measure(kg, rows, measure)?;
            if let Some(g) = group {
                let groups = group_values(&rows, Side::Group);
                let found = ids(&locate_among(entities_with_ids(kg, &groups), g));
                if found.is_empty() {
                    return Err(not_found("group", g));
                }
                rows.retain(|r| r.side(Side::Group).is_some_and(|d| found.contains(d)));
            }
            let linked = |side: Side| {
                rows.iter()
                    .any(|r| r.side(side).is_some_and(|d| is_instance(kg, d, &dv_ids)))
            };
            let side = if linked(Side::Index) {
                Side::Index
            } else if linked(Side::Group) || kg.chart_type == ChartType::Pie {
                Side::Group
            } else {
                Side::Index
            };
            let best = rows
                .iter()
                .filter(|r| r.side(side).is_some())
                .reduce(|a, b| {
                    let better = if *highest {
                        b.value > a.value
                    } else {
                        b.value < a.value
                    };
                    if better {
                        b
                    } else {
                        a
                    }
                })
                .ok_or_else(|| {
                    Error::IncompleteGraph("no mark links its value to a label".into())
                })?;
            best.evidence(vp, &mut evidence);
            let label = best.side(side).unwrap_or_default();
            for dv in targets(kg, label, Predicate::IsInstanceOf) {
                evidence.push(Triple::new(label, Predicate::IsInstanceOf, dv));
            }
            Ok((kg.label(label).to_string(), evidence))
        }
        Template::Greater { a, b, context } => {
            let mut rows = rows;
            if !is_value_word(context) {
                let variables: BTreeSet<&str> = rows.iter().filter_map(|r| r.variable).collect();
                let found = ids(&locate_among(entities_with_ids(kg, &variables), context));
                if !found.is_empty() {
                    rows.retain(|r| r.variable.is_some_and(|v| found.contains(v)));
                } else {
                    let groups = group_values(&rows, Side::Group);
                    let found = ids(&locate_among(entities_with_ids(kg, &groups), context));
                    if found.is_empty() {
                        return Err(not_found("variable or group", context));
                    }
                    rows.retain(|r| r.side(Side::Group).is_some_and(|d| found.contains(d)));
                }
            }
            let locate_side = |side: Side, term: &str| -> BTreeSet<String> {
                ids(&locate_among(
                    entities_with_ids(kg, &group_values(&rows, side)),
                    term,
                ))
            };
            let side = if kg.chart_type != ChartType::Pie
                && !locate_side(Side::Index, a).is_empty()
                && !locate_side(Side::Index, b).is_empty()
            {
                Side::Index
            } else {
                Side::Group
            };
            let mut total = |term: &str| -> Result<f64> {
                let found = locate_side(side, term);
                if found.is_empty() {
                    return Err(not_found("data value", term));
                }
                let hit: Vec<&MarkRow<'_>> = rows
                    .iter()
                    .filter(|r| r.side(side).is_some_and(|d| found.contains(d)))
                    .collect();
                if hit.is_empty() {
                    return Err(Error::IncompleteGraph(format!("no mark encodes `{term}`")));
                }
                for r in &hit {
                    r.evidence(vp, &mut evidence);
                }
                Ok(hit.iter().map(|r| r.value).sum())
            };
            let (va, vb) = (total(a)?, total(b)?);
            Ok((if va > vb { "yes" } else { "no" }.to_string(), evidence))
        }
        _ => unreachable!("not a comparison template"),
    }
}

/// The shared variable of the targets, else the sorted target labels.
fn describe_targets(kg: &ChartKg, targets_: &BTreeSet<&str>, evidence: &mut Vec<Triple>) -> String {
    let mut variables: BTreeSet<&str> = BTreeSet::new();
    let mut all_linked = true;
    for t in targets_ {
        match kg.entity(t).map(|e| e.entity_type) {
            Some(EntityType::DV) => {
                variables.insert(t);
            }
            _ => {
                let dvs = targets(kg, t, Predicate::IsInstanceOf);
                all_linked &= !dvs.is_empty();
                for dv in dvs {
                    evidence.push(Triple::new(t, Predicate::IsInstanceOf, dv));
                    variables.insert(dv);
                }
            }
        }
    }
    if variables.len() == 1 && all_linked {
        return kg
            .label(variables.iter().next().copied().unwrap_or_default())
            .to_string();
    }
    joined_labels(kg, targets_)
}

/// Labels sorted and deduplicated, so the text does not depend on entity
/// ordinals.
fn joined_labels(kg: &ChartKg, ids: &BTreeSet<&str>) -> String {
    let labels: BTreeSet<&str> = ids.iter().map(|t| kg.label(t)).collect();
    labels.into_iter().collect::<Vec<_>>().join(", ")
}

/// Encoding edges leaving a set of VEPVs.
fn encoded<'a>(
    kg: &'a ChartKg,
    vepvs: &BTreeSet<&'a str>,
    evidence: &mut Vec<Triple>,
) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    for v in vepvs {
        for r in kg.outgoing(v) {
            if matches!(
                r.predicate,
                Predicate::EncodesVariable | Predicate::EncodesValue
            ) {
                evidence.push(Triple::from(r));
                out.insert(r.object.as_str());
            }
        }
    }
    out
}

const MARK_WORDS: [(&str, &str); 10] = [
    ("bar", "bar"),
    ("bars", "bar"),
    ("line", "line"),
    ("lines", "line"),
    ("point", "point"),
    ("points", "point"),
    ("slice", "slice"),
    ("slices", "slice"),
    ("mark", ""),
    ("marks", ""),
];

fn answer_encoding(kg: &ChartKg, t: &Template) -> Result<(String, Vec<Triple>)> {
    let mut evidence = Vec::new();
    match t {
        Template::ChannelMeaning { channel, marks } => {
            let prefix = MARK_WORDS
                .iter()
                .find(|(w, _)| *w == normalize(marks))
                .map(|(_, p)| *p)
                .ok_or_else(|| not_found("mark kind", marks))?;
            let ves: Vec<&Entity> = kg
                .entities_of(EntityType::VE)
                .filter(|e| e.label.starts_with(prefix))
                .collect();
            if ves.is_empty() {
                return Err(not_found("mark", marks));
            }
            let has = |p: Predicate| ves.iter().any(|v| !targets(kg, &v.id, p).is_empty());
            let predicate = match channel {
                Channel::Height => Predicate::HasHeight,
                Channel::Color => Predicate::HasColor,
                Channel::Angle => Predicate::HasAngle,
                Channel::Position => Predicate::HasPositionIndex,
                Channel::Horizontal if has(Predicate::HasX) => Predicate::HasX,
                Channel::Horizontal => Predicate::HasPositionIndex,
                Channel::Vertical if has(Predicate::HasY) => Predicate::HasY,
                Channel::Vertical => Predicate::HasHeight,
            };
            let mut vepvs = BTreeSet::new();
            for v in &ves {
                for o in targets(kg, &v.id, predicate) {
                    evidence.push(Triple::new(&v.id, predicate, o));
                    vepvs.insert(o);
                }
            }
            if vepvs.is_empty() {
                return Err(Error::EntityNotFound(format!(
                    "{marks} carry no {}",
                    predicate.as_str()
                )));
            }
            let found = encoded(kg, &vepvs, &mut evidence);
            if found.is_empty() {
                return Err(Error::IncompleteGraph(format!(
                    "{} encodes nothing",
                    predicate.as_str()
                )));
            }
            Ok((describe_targets(kg, &found, &mut evidence), evidence))
        }
        Template::ColorMeaning { color } => {
            let c = term_color(color).ok_or_else(|| not_found("color", color))?;
            let vepv = kg
                .find(EntityType::VEPV, &labels::color(c))
                .ok_or_else(|| not_found("color", color))?;
            let found = encoded(kg, &BTreeSet::from([vepv.id.as_str()]), &mut evidence);
            if found.is_empty() {
                return Err(Error::IncompleteGraph(format!("{color} encodes nothing")));
            }
            Ok((joined_labels(kg, &found), evidence))
        }
        Template::ShareOf { value } => {
            let rows: Vec<MarkRow<'_>> = mark_rows(kg);
            let groups = group_values(&rows, Side::Group);
            let found = ids(&locate_among(entities_with_ids(kg, &groups), value));
            if found.is_empty() {
                return Err(not_found("legend value", value));
            }
            let vp = value_predicate(kg.chart_type);
            if vp != Predicate::HasAngle {
                return Err(Error::IncompleteGraph("marks encode no shares".into()));
            }
            let total: f64 = rows.iter().map(|r| r.value).sum();
            let hit: Vec<&MarkRow<'_>> = rows
                .iter()
                .filter(|r| r.side(Side::Group).is_some_and(|d| found.contains(d)))
                .collect();
            if hit.is_empty() || total <= 0.0 {
                return Err(Error::IncompleteGraph(format!(
                    "no slice encodes `{value}`"
                )));
            }
            for r in &hit {
                r.evidence(vp, &mut evidence);
            }
            let angle: f64 = hit.iter().map(|r| r.value).sum();
            // Normalize by the measured total so rounding of individual
            // angles does not bias the share.
            Ok((format!("{:.2}", angle / total), evidence))
        }
        _ => unreachable!("not an encoding template"),
    }
}

fn answer_insight(kg: &ChartKg, t: &Template) -> Result<(String, Vec<Triple>)> {
    let (pattern, subject) = match t {
        Template::InsightFor { pattern, subject } => (pattern, Some(subject)),
        Template::ChartShows { pattern } => (pattern, None),
        _ => unreachable!("not an insight template"),
    };
    let vis: BTreeSet<&str> = kg
        .entities_of(EntityType::VI)
        .filter(|e| pattern.matches_label(&e.label))
        .map(|e| e.id.as_str())
        .collect();
    let subjects: Option<BTreeSet<String>> = match subject {
        Some(s) => {
            let found = locate(kg, s, |e| {
                matches!(e.entity_type, EntityType::DV | EntityType::DVV)
            });
            if found.is_empty() {
                return Err(not_found("data variable or value", s));
            }
            Some(ids(&found))
        }
        None => None,
    };
    let evidence: Vec<Triple> = kg
        .relations()
        .iter()
        .filter(|r| r.predicate == Predicate::ExhibitsInsight && vis.contains(r.object.as_str()))
        .filter(|r| subjects.as_ref().is_none_or(|s| s.contains(&r.subject)))
        .map(Triple::from)
        .collect();
    Ok((
        if evidence.is_empty() { "no" } else { "yes" }.to_string(),
        evidence,
    ))
}

/// Answers a template question from one KG. Pure in (kg, question).
pub fn answer(kg: &ChartKg, question: &str) -> Result<Answer> {
    let (question_type, template) = parse_question(question)?;
    let (text, mut evidence) = match question_type {
        QuestionType::Comparison => answer_comparison(kg, &template)?,
        QuestionType::Encoding => answer_encoding(kg, &template)?,
        QuestionType::Insight => answer_insight(kg, &template)?,
    };
    let mut seen = BTreeSet::new();
    evidence.retain(|t| seen.insert(t.clone()));
    let entities = evidence
        .iter()
        .flat_map(|t| [&t.subject, &t.object])
        .map(|id| (id.clone(), kg.label(id).to_string()))
        .collect();
    Ok(Answer {
        question_type,
        text,
        evidence,
        entities,
    })
}
