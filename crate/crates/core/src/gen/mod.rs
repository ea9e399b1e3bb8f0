//! Synthetic chart generation: specs, rendering, ground truth, corpora.

pub mod corpus;
pub mod render;
pub mod spec;
pub mod truth;

pub use corpus::{
    generate_chart, generate_corpus, sample_spec, split_ids, GenConfig, GeneratedChart, Split,
    Vocab,
};
pub use render::{render_chart, AnnotatedElement, Annotation, Layout};
pub use spec::{ChartSpec, Series, PALETTE};
pub use truth::{make_truth_kg, make_truth_kg_with};
