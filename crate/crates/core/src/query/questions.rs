use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::build::insights::{spec_insights, Insight, InsightConfig, InsightKind};
use crate::gen::spec::{color_name, ChartSpec};
use crate::kg::ChartType;
use crate::query::qa::QuestionType;

/// A generated question with its gold answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaItem {
    pub id: String,
    pub chart_id: String,
    pub question: String,
    pub question_type: QuestionType,
    pub gold: String,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, v: &'a [T]) -> &'a T {
    &v[rng.gen_range(0..v.len())]
}

fn argext(values: &[f64], highest: bool) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (highest && *v > values[best]) || (!highest && *v < values[best]) {
            best = i;
        }
    }
    best
}

fn article(phrase: &str) -> &'static str {
    if phrase.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

fn kind_phrase(kind: InsightKind) -> &'static str {
    match kind {
        InsightKind::Dominance => "dominance",
        InsightKind::OutstandingNo1 => "outstanding maximum",
        InsightKind::Trend => "trend",
        InsightKind::Correlation => "correlation",
        InsightKind::Outlier => "outlier",
        InsightKind::Cluster => "cluster",
    }
}

/// Insight kinds whose detector can fire on this chart's structure.
fn applicable(spec: &ChartSpec, kind: InsightKind) -> bool {
    let scatter = spec.chart_type == ChartType::Scatter;
    let rows = spec.categories.len();
    match kind {
        InsightKind::Dominance => !scatter && spec.series.len() == 1,
        InsightKind::OutstandingNo1 => !scatter && rows >= 3,
        InsightKind::Trend => {
            matches!(spec.chart_type, ChartType::Bar | ChartType::Line) && rows >= 3
        }
        InsightKind::Correlation => {
            scatter || (spec.series.len() >= 2 && spec.has_legend() && rows >= 3)
        }
        InsightKind::Outlier => {
            if scatter {
                spec.series.iter().map(|s| s.values.len()).sum::<usize>() >= 5
            } else {
                rows >= 5
            }
        }
        InsightKind::Cluster => scatter,
    }
}

/// Labels an insight of this kind could name as its subject.
fn subject_pool(spec: &ChartSpec, kind: InsightKind) -> Vec<String> {
    let nonempty = |v: Vec<&String>| {
        v.into_iter()
            .filter(|s| !s.is_empty())
            .cloned()
            .collect::<Vec<_>>()
    };
    match (spec.chart_type, kind) {
        (ChartType::Scatter, _) => nonempty(vec![&spec.x_title, &spec.y_title]),
        (_, InsightKind::Dominance | InsightKind::OutstandingNo1) => spec.categories.clone(),
        (_, InsightKind::Trend | InsightKind::Outlier)
            if spec.has_legend() && spec.chart_type != ChartType::Pie =>
        {
            spec.series.iter().map(|s| s.label.clone()).collect()
        }
        (ChartType::Pie, _) => {
            let v = if spec.legend_title.is_empty() {
                &spec.title
            } else {
                &spec.legend_title
            };
            nonempty(vec![v])
        }
        (_, InsightKind::Correlation) => spec.series.iter().map(|s| s.label.clone()).collect(),
        _ => nonempty(vec![&spec.y_title]),
    }
}

fn has_insight(
    insights: &[Insight],
    kind: InsightKind,
    qualifier: Option<&str>,
    subject: Option<&str>,
) -> bool {
    insights.iter().any(|i| {
        i.kind == kind
            && qualifier.is_none_or(|q| i.qualifier.as_deref() == Some(q))
            && subject.is_none_or(|s| i.subjects.iter().any(|x| x == s))
    })
}

type Candidate = (QuestionType, String, String);

fn comparison_candidates(spec: &ChartSpec, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let mut out = Vec::new();
    let ty = QuestionType::Comparison;
    let n = spec.categories.len();
    match spec.chart_type {
        ChartType::Bar | ChartType::Line
            if n >= 2 && !spec.x_title.is_empty() && !spec.y_title.is_empty() =>
        {
            let highest = rng.gen_bool(0.5);
            let word = if highest { "highest" } else { "lowest" };
            let (values, suffix, context) = if spec.series.len() == 1 {
                (&spec.series[0].values, String::new(), spec.y_title.clone())
            } else {
                let s = pick(rng, &spec.series);
                (&s.values, format!(" for {}", s.label), s.label.clone())
            };
            out.push((
                ty,
                format!(
                    "Which {} has the {word} {}{suffix}?",
                    spec.x_title, spec.y_title
                ),
                spec.categories[argext(values, highest)].clone(),
            ));
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let (a, b) = (idx[0], idx[1]);
            if values[a] != values[b] {
                out.push((
                    ty,
                    format!(
                        "Is {} greater than {} in {context}?",
                        spec.categories[a], spec.categories[b]
                    ),
                    yes_no(values[a] > values[b]),
                ));
            }
        }
        ChartType::Pie if n >= 2 => {
            let values = &spec.series[0].values;
            if !spec.legend_title.is_empty() {
                out.push((
                    ty,
                    format!("Which {} has the highest share?", spec.legend_title),
                    spec.categories[argext(values, true)].clone(),
                ));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let (a, b) = (idx[0], idx[1]);
            if values[a] != values[b] {
                out.push((
                    ty,
                    format!(
                        "Is {} greater than {} in share?",
                        spec.categories[a], spec.categories[b]
                    ),
                    yes_no(values[a] > values[b]),
                ));
            }
        }
        _ => {}
    }
    out
}

fn encoding_candidates(spec: &ChartSpec, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let ty = QuestionType::Encoding;
    let mut out = Vec::new();
    let legend = spec.legend_entries();
    let legend_answer = if !spec.legend_title.is_empty() {
        spec.legend_title.clone()
    } else {
        let mut labels: Vec<String> = legend.iter().map(|e| e.0.clone()).collect();
        labels.sort();
        labels.join(", ")
    };
    let channel = |c: &str, marks: &str| format!("What does the {c} of the {marks} represent?");
    let mut channels: Vec<(String, String)> = Vec::new();
    match spec.chart_type {
        ChartType::Bar => {
            channels.push((channel("height", "bars"), spec.y_title.clone()));
            channels.push((channel("position", "bars"), spec.x_title.clone()));
        }
        ChartType::Line => {
            channels.push((channel("vertical position", "lines"), spec.y_title.clone()));
            channels.push((channel("position", "lines"), spec.x_title.clone()));
        }
        ChartType::Pie => {
            let v = if spec.legend_title.is_empty() {
                &spec.title
            } else {
                &spec.legend_title
            };
            channels.push((channel("angle", "slices"), v.clone()));
        }
        ChartType::Scatter => {
            channels.push((
                channel("horizontal position", "points"),
                spec.x_title.clone(),
            ));
            channels.push((channel("vertical position", "points"), spec.y_title.clone()));
        }
    }
    if !legend.is_empty() {
        let marks = match spec.chart_type {
            ChartType::Bar => "bars",
            ChartType::Line => "lines",
            ChartType::Pie => "slices",
            ChartType::Scatter => "points",
        };
        channels.push((channel("color", marks), legend_answer));
    }
    channels.retain(|c| !c.1.is_empty());
    if !channels.is_empty() {
        let (q, g) = pick(rng, &channels).clone();
        out.push((ty, q, g));
    }
    if !legend.is_empty() {
        let (label, color) = pick(rng, &legend);
        if let Some(name) = color_name(*color) {
            out.push((ty, format!("What does {name} represent?"), label.clone()));
        }
    }
    if spec.chart_type == ChartType::Pie && !spec.categories.is_empty() {
        let values = &spec.series[0].values;
        let total: f64 = values.iter().sum();
        let k = rng.gen_range(0..values.len());
        out.push((
            ty,
            format!("What is the share encoded for {}?", spec.categories[k]),
            format!("{:.2}", values[k] / total),
        ));
    }
    out
}

fn insight_candidates(
    spec: &ChartSpec,
    insights: &[Insight],
    rng: &mut ChaCha8Rng,
) -> Vec<Candidate> {
    let ty = QuestionType::Insight;
    let mut out = Vec::new();
    let kinds: Vec<InsightKind> = InsightKind::ALL
        .into_iter()
        .filter(|k| applicable(spec, *k))
        .collect();
    if kinds.is_empty() {
        return out;
    }
    // About half the subject questions ask about an insight that exists.
    let existing: Vec<&Insight> = insights
        .iter()
        .filter(|i| applicable(spec, i.kind))
        .collect();
    let (kind, qualifier, subject) = if !existing.is_empty() && rng.gen_bool(0.5) {
        let i = pick(rng, &existing);
        (
            i.kind,
            i.qualifier.clone(),
            Some(pick(rng, &i.subjects).clone()),
        )
    } else {
        let kind = *pick(rng, &kinds);
        let q = kind.qualifiers();
        let qualifier = (!q.is_empty()).then(|| pick(rng, q).to_string());
        let pool = subject_pool(spec, kind);
        (
            kind,
            qualifier,
            (!pool.is_empty()).then(|| pick(rng, &pool).clone()),
        )
    };
    if let Some(subject) = subject {
        let phrase = match &qualifier {
            Some(q) => format!("{q} {}", kind_phrase(kind)),
            None => kind_phrase(kind).to_string(),
        };
        out.push((
            ty,
            format!("Is there {} {phrase} for {subject}?", article(&phrase)),
            yes_no(has_insight(
                insights,
                kind,
                qualifier.as_deref(),
                Some(&subject),
            )),
        ));
    }
    let kind = *pick(rng, &kinds);
    let shows = match kind {
        InsightKind::OutstandingNo1 => "an outstanding maximum".to_string(),
        InsightKind::Dominance => "dominance".to_string(),
        k => format!("{}s", kind_phrase(k)),
    };
    out.push((
        ty,
        format!("Does the chart show {shows}?"),
        yes_no(has_insight(insights, kind, None, None)),
    ));
    out
}

/// One or two template questions for a chart, with gold answers computed
/// from the spec's values. Templates whose preconditions fail are skipped.
pub fn generate_questions(spec: &ChartSpec, cfg: &InsightConfig, seed: u64) -> Vec<QaItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ spec.rng_seed.rotate_left(17));
    let insights = spec_insights(spec, cfg);
    let families: Vec<Vec<Candidate>> = vec![
        comparison_candidates(spec, &mut rng),
        encoding_candidates(spec, &mut rng),
        insight_candidates(spec, &insights, &mut rng),
    ]
    .into_iter()
    .filter(|f| !f.is_empty())
    .collect();
    if families.is_empty() {
        return Vec::new();
    }
    let want = rng.gen_range(1..=2usize);
    let mut order: Vec<usize> = (0..families.len()).collect();
    order.shuffle(&mut rng);
    let mut chosen: Vec<Candidate> = Vec::new();
    for f in order.into_iter().cycle().take(want * families.len()) {
        if chosen.len() == want {
            break;
        }
        let c = pick(&mut rng, &families[f]).clone();
        if !chosen.iter().any(|x| x.1 == c.1) {
            chosen.push(c);
        }
    }
    chosen
        .into_iter()
        .enumerate()
        .map(|(k, (question_type, question, gold))| QaItem {
            id: format!("{}-q{k}", spec.chart_id),
            chart_id: spec.chart_id.clone(),
            question,
            question_type,
            gold,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::spec::{Series, PALETTE};

    fn bar(values: &[f64]) -> ChartSpec {
        ChartSpec {
            chart_id: "bar-00000".into(),
            chart_type: ChartType::Bar,
            title: "Savings by country".into(),
            x_title: "Country".into(),
            y_title: "Savings".into(),
            legend_title: String::new(),
            categories: ["Chile", "Peru", "Cuba"].map(String::from).to_vec(),
            series: vec![Series {
                label: "Savings".into(),
                color: PALETTE[0].1,
                values: values.to_vec(),
                xs: None,
            }],
            slice_colors: Vec::new(),
            rng_seed: 3,
            width: 480,
            height: 360,
        }
    }

    #[test]
    fn highest_bar_gold_is_the_argmax_label() {
        let spec = bar(&[5.0, 9.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let found = (0..20)
            .flat_map(|_| comparison_candidates(&spec, &mut rng))
            .find(|c| c.1.contains("highest"))
            .unwrap();
        assert_eq!(found.2, "Peru");
    }

    #[test]
    fn single_series_bars_get_no_correlation_questions() {
        let spec = bar(&[5.0, 9.0, 2.0]);
        for seed in 0..200 {
            for q in generate_questions(&spec, &InsightConfig::default(), seed) {
                assert!(
                    !q.question.to_lowercase().contains("correlation"),
                    "{}",
                    q.question
                );
            }
        }
    }

    #[test]
    fn questions_are_seed_deterministic() {
        let spec = bar(&[5.0, 9.0, 2.0]);
        let cfg = InsightConfig::default();
        assert_eq!(
            generate_questions(&spec, &cfg, 11),
            generate_questions(&spec, &cfg, 11)
        );
        for seed in 0..50 {
            let qs = generate_questions(&spec, &cfg, seed);
            assert!((1..=2).contains(&qs.len()));
        }
    }
}
