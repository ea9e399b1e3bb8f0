//! Chart images to knowledge graphs: a synthetic chart generator, a
//! classical chart parser, rule-based KG construction, retrieval and
//! question answering, and an evaluation harness.

pub mod build;
pub mod config;
pub mod error;
pub mod eval;
pub mod font;
pub mod gen;
pub mod kg;
pub mod parse;
pub mod pipeline;
pub mod query;
pub mod raster;
pub mod role;

pub use config::Config;
pub use error::{Error, Result};
pub use kg::{
    ChartKg, ChartType, Entity, EntityType, PathPattern, Predicate, Relation, RelationClass,
};
pub use raster::{BBox, RasterImage, Rgb};
pub use role::Role;
