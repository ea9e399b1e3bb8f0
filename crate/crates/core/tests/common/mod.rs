#![allow(dead_code)]

pub mod examples;
pub mod oracle;

use std::collections::BTreeSet;

use chartkg::{ChartKg, EntityType, Predicate};

/// VI labels of a graph with the labels of the entities exhibiting them.
pub fn vi_summary(kg: &ChartKg) -> BTreeSet<(String, BTreeSet<String>)> {
    kg.entities_of(EntityType::VI)
        .map(|vi| {
            let subjects = kg
                .incoming(&vi.id)
                .filter(|r| r.predicate == Predicate::ExhibitsInsight)
                .map(|r| kg.label(&r.subject).to_string())
                .collect();
            (vi.label.clone(), subjects)
        })
        .collect()
}

pub fn vi(label: &str, subjects: &[&str]) -> (String, BTreeSet<String>) {
    (
        label.to_string(),
        subjects.iter().map(|s| s.to_string()).collect(),
    )
}
