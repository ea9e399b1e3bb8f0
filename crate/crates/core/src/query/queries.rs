use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::build::insights::InsightKind;
use crate::kg::{ChartKg, ChartType, EntityType};
use crate::query::retrieve::{InsightPattern, Query, RelationPattern};

/// A term for a DV/DVV label: the label itself, a prefix of it, or the
/// label with one character dropped.
fn entity_term(rng: &mut ChaCha8Rng, label: &str) -> String {
    let chars: Vec<char> = label.chars().collect();
    match rng.gen_range(0..3) {
        1 if chars.len() >= 4 => chars[..chars.len() - 1]
            .iter()
            .collect::<String>()
            .to_lowercase(),
        2 if chars.len() >= 5 => {
            let k = rng.gen_range(1..chars.len() - 1);
            chars
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, c)| c)
                .collect()
        }
        _ => label.to_lowercase(),
    }
}

fn pick_kg<'a>(rng: &mut ChaCha8Rng, kgs: &[&'a ChartKg]) -> &'a ChartKg {
    kgs[rng.gen_range(0..kgs.len())]
}

fn entity_constraint(rng: &mut ChaCha8Rng, kgs: &[&ChartKg], q: &mut Query) {
    let kg = pick_kg(rng, kgs);
    let labels: Vec<&str> = kg
        .entities()
        .iter()
        .filter(|e| matches!(e.entity_type, EntityType::DV | EntityType::DVV))
        .map(|e| e.label.as_str())
        .collect();
    if !labels.is_empty() {
        let l = labels[rng.gen_range(0..labels.len())];
        q.entities.push(entity_term(rng, l));
    }
}

fn relation_constraint(rng: &mut ChaCha8Rng, kgs: &[&ChartKg], q: &mut Query) {
    let kg = pick_kg(rng, kgs);
    let rs = kg.relations();
    if rs.is_empty() {
        return;
    }
    let r = &rs[rng.gen_range(0..rs.len())];
    q.relations.push(RelationPattern {
        subject: if rng.gen_bool(0.8) {
            kg.label(&r.subject).to_lowercase()
        } else {
            String::new()
        },
        predicate: rng.gen_bool(0.8).then_some(r.predicate),
        object: kg.label(&r.object).to_lowercase(),
    });
}

fn insight_constraint(rng: &mut ChaCha8Rng, q: &mut Query) {
    let kind = InsightKind::ALL[rng.gen_range(0..InsightKind::ALL.len())];
    let qs = kind.qualifiers();
    let qualifier =
        (!qs.is_empty() && rng.gen_bool(0.7)).then(|| qs[rng.gen_range(0..qs.len())].to_string());
    q.insights.push(InsightPattern { kind, qualifier });
}

/// Seeded queries drawn from a corpus, cycling through type, entity,
/// relation and insight constraints, half of them with a second
/// constraint of another kind.
pub fn generate_queries(kgs: &[&ChartKg], count: usize, seed: u64) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if kgs.is_empty() {
        return out;
    }
    for i in 0..count {
        let mut q = Query::default();
        let first = i % 4;
        let kinds = if rng.gen_bool(0.5) {
            vec![first, (first + rng.gen_range(1..4)) % 4]
        } else {
            vec![first]
        };
        for k in kinds {
            match k {
                0 => q.chart_type = Some(ChartType::ALL[rng.gen_range(0..4)]),
                1 => entity_constraint(&mut rng, kgs, &mut q),
                2 => relation_constraint(&mut rng, kgs, &mut q),
                _ => insight_constraint(&mut rng, &mut q),
            }
        }
        if q.validate().is_err() {
            q.chart_type = Some(ChartType::ALL[i % 4]);
        }
        out.push(q);
    }
    out
}
