//! Brute-force reference implementations, written without the library's
//! helpers so that agreement means something.

use std::collections::BTreeSet;

use chartkg::build::{DataTable, InsightConfig, InsightKind};
use chartkg::gen::spec::named_color;
use chartkg::query::Query;
use chartkg::{ChartKg, ChartType, EntityType, Rgb};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type InsightSet = BTreeSet<(String, Vec<String>)>;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson r from raw sums; 0 when either side is constant.
fn r(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx).powi(2);
        syy += (y[i] - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 || (sxx * syy).sqrt() < 1e-12 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Type-7 sample quantile.
fn q(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    s[lo] + (h - h.floor()) * (s[hi] - s[lo])
}

fn tukey_count(v: &[f64], k: f64) -> usize {
    let (q1, q3) = (q(v, 0.25), q(v, 0.75));
    v.iter()
        .filter(|&&x| x < q1 - k * (q3 - q1) || x > q3 + k * (q3 - q1))
        .count()
}

fn standardize(v: &[f64]) -> Vec<f64> {
    let m = mean(v);
    let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    if sd <= 1e-12 * (1.0 + m.abs()) {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| (x - m) / sd).collect()
    }
}

fn d(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Silhouette of the SSE-optimal 2-partition, found by enumerating every
/// partition with both sides nonempty.
pub fn best_partition_silhouette(p: &[(f64, f64)]) -> f64 {
    let n = p.len();
    let mut best: Option<(f64, u32)> = None;
    for mask in 1..(1u32 << (n - 1)) {
        let mut cost = 0.0;
        for side in [true, false] {
            let m: Vec<(f64, f64)> = (0..n)
                .filter(|&i| ((mask >> i) & 1 == 1) == side)
                .map(|i| p[i])
                .collect();
            let c = (
                mean(&m.iter().map(|x| x.0).collect::<Vec<_>>()),
                mean(&m.iter().map(|x| x.1).collect::<Vec<_>>()),
            );
            cost += m
                .iter()
                .map(|x| (x.0 - c.0).powi(2) + (x.1 - c.1).powi(2))
                .sum::<f64>();
        }
        if best.is_none_or(|(b, _)| cost < b - 1e-9) {
            best = Some((cost, mask));
        }
    }
    let mask = best.unwrap().1;
    let side = |i: usize| (mask >> i) & 1;
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<f64> = (0..n)
            .filter(|&j| j != i && side(j) == side(i))
            .map(|j| d(p[i], p[j]))
            .collect();
        let other: Vec<f64> = (0..n)
            .filter(|&j| side(j) != side(i))
            .map(|j| d(p[i], p[j]))
            .collect();
        if own.is_empty() {
            continue;
        }
        let (a, b) = (mean(&own), mean(&other));
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

fn col(t: &DataTable, c: usize) -> Vec<(usize, f64)> {
    (0..t.cells.len())
        .filter_map(|r| t.cells[r].get(c).filter(|v| v.is_finite()).map(|v| (r, *v)))
        .collect()
}

/// Every insight a table satisfies under the detector rules, as (label,
/// subjects) pairs.
pub fn brute_insights(t: &DataTable, cfg: &InsightConfig) -> InsightSet {
    let mut out = InsightSet::new();
    let ncols = t.columns.len();
    let row_s = |r: usize| t.row_subjects.get(r).cloned().flatten();
    let col_s = |c: usize| t.column_subjects.get(c).cloned().flatten();
    let series_s = |c: usize| col_s(c).or_else(|| t.variable_subjects.first().cloned().flatten());
    let signed = |kind: &str, x: f64, pos: &str, neg: &str| {
        format!("{kind}:{}", if x > 0.0 { pos } else { neg })
    };

    if ncols == 1 {
        let v = col(t, 0);
        if v.len() >= 2 && v.iter().all(|p| p.1 >= 0.0) {
            let total: f64 = v.iter().map(|p| p.1).sum();
            let top = v
                .iter()
                .copied()
                .reduce(|a, b| if b.1 > a.1 { b } else { a })
                .unwrap();
            if total > 0.0 && top.1 / total > cfg.dominance_share {
                if let Some(s) = row_s(top.0) {
                    out.insert(("Dominance".into(), vec![s]));
                }
            }
        }
    }
    for c in 0..ncols {
        let mut v = col(t, c);
        if v.len() < 3 {
            continue;
        }
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        if v[1].1 > 0.0 && v[0].1 >= cfg.outstanding_ratio * v[1].1 {
            if let Some(s) = row_s(v[0].0) {
                let mut subjects = vec![s];
                if ncols > 1 {
                    subjects.extend(col_s(c));
                }
                out.insert(("OutstandingNo1".into(), subjects));
            }
        }
    }
    if matches!(t.chart_type, ChartType::Bar | ChartType::Line) {
        for c in 0..ncols {
            let v = col(t, c);
            if v.len() < 3 {
                continue;
            }
            let rr = r(
                &v.iter().map(|p| p.0 as f64).collect::<Vec<_>>(),
                &v.iter().map(|p| p.1).collect::<Vec<_>>(),
            );
            if rr.abs() >= cfg.trend_r {
                if let Some(s) = series_s(c) {
                    out.insert((signed("Trend", rr, "increasing", "decreasing"), vec![s]));
                }
            }
        }
    }
    for a in 0..ncols {
        for b in a + 1..ncols {
            let pairs: Vec<(f64, f64)> = t
                .cells
                .iter()
                .filter(|row| row.len() > b && row[a].is_finite() && row[b].is_finite())
                .map(|row| (row[a], row[b]))
                .collect();
            if pairs.len() < 3 {
                continue;
            }
            let rr = r(
                &pairs.iter().map(|p| p.0).collect::<Vec<_>>(),
                &pairs.iter().map(|p| p.1).collect::<Vec<_>>(),
            );
            if let (Some(sa), Some(sb)) = (col_s(a), col_s(b)) {
                if rr.abs() >= cfg.correlation_r {
                    out.insert((
                        signed("Correlation", rr, "positive", "negative"),
                        vec![sa, sb],
                    ));
                }
            }
        }
    }
    for c in 0..ncols {
        let v: Vec<f64> = col(t, c).into_iter().map(|p| p.1).collect();
        if v.len() >= 5 && tukey_count(&v, cfg.outlier_iqr) > 0 {
            if let Some(s) = series_s(c) {
                out.insert(("Outlier".into(), vec![s]));
            }
        }
    }
    if t.chart_type == ChartType::Scatter {
        let subjects: Vec<String> = t.variable_subjects.iter().flatten().cloned().collect();
        let xs: Vec<f64> = t.points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = t.points.iter().map(|p| p.1).collect();
        if !subjects.is_empty() {
            if xs.len() >= 3 {
                let rr = r(&xs, &ys);
                if rr.abs() >= cfg.correlation_r {
                    out.insert((
                        signed("Correlation", rr, "positive", "negative"),
                        subjects.clone(),
                    ));
                }
            }
            if xs.len() >= 5
                && tukey_count(&xs, cfg.outlier_iqr) + tukey_count(&ys, cfg.outlier_iqr) > 0
            {
                out.insert(("Outlier".into(), subjects.clone()));
            }
            if xs.len() >= 4 {
                let z: Vec<(f64, f64)> =
                    standardize(&xs).into_iter().zip(standardize(&ys)).collect();
                if best_partition_silhouette(&z) >= cfg.silhouette {
                    out.insert(("Cluster".into(), subjects));
                }
            }
        }
    }
    out
}

pub fn detector_insights(t: &DataTable, cfg: &InsightConfig) -> InsightSet {
    chartkg::build::extract_insights(t, cfg)
        .into_iter()
        .map(|i| (i.label(), i.subjects))
        .collect()
}

/// Random tables across chart types, biased toward shapes that trigger
/// each detector.
pub fn random_table(rng: &mut ChaCha8Rng) -> DataTable {
    let ct = ChartType::ALL[rng.gen_range(0..4)];
    let mut t = DataTable::new(ct);
    if ct == ChartType::Scatter {
        let n = rng.gen_range(4..=11);
        let shape = rng.gen_range(0..4);
        for i in 0..n {
            let p = match shape {
                0 => (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                1 => {
                    let x = rng.gen_range(0.0..10.0);
                    (x, 2.0 * x + rng.gen_range(-2.0..2.0))
                }
                2 => {
                    let far = i % 3 == 0;
                    let base = if far { 30.0 } else { 0.0 };
                    (
                        base + rng.gen_range(0.0..4.0),
                        rng.gen_range(0.0..4.0) + if far { 20.0 } else { 0.0 },
                    )
                }
                _ => (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)),
            };
            t.points.push(p);
        }
        if shape == 3 {
            t.points[0] = (rng.gen_range(40.0..60.0), rng.gen_range(0.0..5.0));
        }
        t.variable_subjects = vec![Some("X".into()), Some("Y".into())];
        return t;
    }
    let rows = rng.gen_range(2..=9);
    let cols = if ct == ChartType::Pie {
        1
    } else {
        rng.gen_range(1..=3)
    };
    t.rows = (0..rows).map(|i| format!("r{i}")).collect();
    t.row_subjects = t.rows.iter().map(|r| Some(r.clone())).collect();
    t.columns = (0..cols).map(|c| format!("c{c}")).collect();
    t.column_subjects = if cols > 1 {
        t.columns.iter().map(|c| Some(c.clone())).collect()
    } else {
        vec![None]
    };
    t.variable_subjects = vec![Some("V".into())];
    let slopes: Vec<f64> = (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect();
    t.cells = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    if rng.gen_bool(0.05) {
                        return f64::NAN;
                    }
                    let base = 20.0 + slopes[c] * r as f64 + rng.gen_range(0.0..6.0);
                    let spike = if rng.gen_bool(0.1) {
                        rng.gen_range(20.0..60.0)
                    } else {
                        0.0
                    };
                    (base + spike).max(0.0)
                })
                .collect()
        })
        .collect();
    t
}

/// The same table with `v -> a v + b` applied per column (per axis for
/// scatter points).
pub fn affine(t: &DataTable, rng: &mut ChaCha8Rng) -> DataTable {
    let mut u = t.clone();
    let mut draw = || (rng.gen_range(0.1..50.0), rng.gen_range(-100.0..100.0));
    let (ax, bx) = draw();
    let (ay, by) = draw();
    for p in &mut u.points {
        *p = (ax * p.0 + bx, ay * p.1 + by);
    }
    let per_col: Vec<(f64, f64)> = (0..u.columns.len()).map(|_| draw()).collect();
    for row in &mut u.cells {
        for (c, v) in row.iter_mut().enumerate() {
            *v = per_col[c].0 * *v + per_col[c].1;
        }
    }
    u
}

pub fn affine_kinds(s: &InsightSet) -> InsightSet {
    s.iter()
        .filter(|(l, _)| {
            ["Trend", "Correlation", "Outlier", "Cluster"]
                .iter()
                .any(|k| l.split(':').next() == Some(*k))
        })
        .cloned()
        .collect()
}

fn norm(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn edit_distance(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn term_matches(term: &str, label: &str) -> bool {
    let label = norm(label);
    let mut forms = vec![norm(term)];
    let color: Option<Rgb> = named_color(term).or_else(|| term.trim().to_uppercase().parse().ok());
    if let Some(c) = color {
        forms.push(format!("color:#{:02x}{:02x}{:02x}", c.0[0], c.0[1], c.0[2]));
    }
    forms
        .iter()
        .filter(|f| !f.is_empty())
        .any(|f| *f == label || label.contains(f.as_str()) || edit_distance(f, &label) <= 1)
}

fn kind_label_matches(kind: InsightKind, qualifier: Option<&str>, label: &str) -> bool {
    let k = kind.as_str();
    match qualifier {
        Some(q) => label == format!("{k}:{q}"),
        None => label == k || label.starts_with(&format!("{k}:")),
    }
}

/// Chart ids satisfying every constraint of a query, by full scan.
pub fn brute_retrieve<'a>(
    kgs: impl IntoIterator<Item = &'a ChartKg>,
    q: &Query,
) -> BTreeSet<String> {
    kgs.into_iter()
        .filter(|kg| {
            q.chart_type.is_none_or(|t| t == kg.chart_type)
                && q.entities.iter().all(|term| {
                    kg.entities().iter().any(|e| {
                        matches!(e.entity_type, EntityType::DV | EntityType::DVV)
                            && term_matches(term, &e.label)
                    })
                })
                && q.relations.iter().all(|p| {
                    kg.relations().iter().any(|r| {
                        p.predicate.is_none_or(|x| x == r.predicate)
                            && (norm(&p.subject).is_empty()
                                || term_matches(&p.subject, kg.label(&r.subject)))
                            && (norm(&p.object).is_empty()
                                || term_matches(&p.object, kg.label(&r.object)))
                    })
                })
                && q.insights.iter().all(|p| {
                    kg.entities_of(EntityType::VI)
                        .any(|e| kind_label_matches(p.kind, p.qualifier.as_deref(), &e.label))
                })
        })
        .map(|kg| kg.chart_id.clone())
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
