//! Typed property graph for one chart.
//!
//! Five entity types (visual elements, their property values, data
//! variables, data variable values and visual insights) are connected by
//! directed relations drawn from a closed predicate vocabulary. Every
//! predicate belongs to exactly one of four relation classes, and each
//! class fixes which entity types may appear at either end.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub type Attrs = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartType {
    Bar,
    Line,
    Pie,
    Scatter,
}

impl ChartType {
    pub const ALL: [ChartType; 4] = [
        ChartType::Bar,
        ChartType::Line,
        ChartType::Pie,
        ChartType::Scatter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Pie => "pie",
            ChartType::Scatter => "scatter",
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChartType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bar" => Ok(ChartType::Bar),
            "line" => Ok(ChartType::Line),
            "pie" => Ok(ChartType::Pie),
            "scatter" => Ok(ChartType::Scatter),
            other => Err(Error::Validation(format!("unknown chart type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    VE,
    VEPV,
    DV,
    DVV,
    VI,
}

impl EntityType {
    pub const ALL: [EntityType; 5] = [
        EntityType::VE,
        EntityType::VEPV,
        EntityType::DV,
        EntityType::DVV,
        EntityType::VI,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::VE => "VE",
            EntityType::VEPV => "VEPV",
            EntityType::DV => "DV",
            EntityType::DVV => "DVV",
            EntityType::VI => "VI",
        }
    }

    /// Lowercase id prefix, e.g. `vepv` in `vepv:3`.
    pub fn prefix(self) -> &'static str {
        match self {
            EntityType::VE => "ve",
            EntityType::VEPV => "vepv",
            EntityType::DV => "dv",
            EntityType::DVV => "dvv",
            EntityType::VI => "vi",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown entity type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationClass {
    VisualPropertyCorrespondence,
    DataVariableCorrespondence,
    VisualEncodingMapping,
    VisualInsightCorrespondence,
}

impl RelationClass {
    pub const ALL: [RelationClass; 4] = [
        RelationClass::VisualPropertyCorrespondence,
        RelationClass::DataVariableCorrespondence,
        RelationClass::VisualEncodingMapping,
        RelationClass::VisualInsightCorrespondence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationClass::VisualPropertyCorrespondence => "VisualPropertyCorrespondence",
            RelationClass::DataVariableCorrespondence => "DataVariableCorrespondence",
            RelationClass::VisualEncodingMapping => "VisualEncodingMapping",
            RelationClass::VisualInsightCorrespondence => "VisualInsightCorrespondence",
        }
    }

    /// Whether the class admits an edge between the two entity types.
    pub fn admits(self, subject: EntityType, object: EntityType) -> bool {
        use EntityType::*;
        match self {
            RelationClass::VisualPropertyCorrespondence => subject == VE && object == VEPV,
            RelationClass::DataVariableCorrespondence => subject == DVV && object == DV,
            RelationClass::VisualEncodingMapping => subject == VEPV && matches!(object, DV | DVV),
            RelationClass::VisualInsightCorrespondence => {
                matches!(subject, DV | DVV) && object == VI
            }
        }
    }
}

impl FromStr for RelationClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown relation class `{s}`")))
    }
}

/// The closed predicate vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    HasHeight,
    HasColor,
    HasPositionIndex,
    HasAngle,
    HasX,
    HasY,
    HasStartPoint,
    HasEndPoint,
    IsInstanceOf,
    EncodesVariable,
    EncodesValue,
    ExhibitsInsight,
}

impl Predicate {
    pub const ALL: [Predicate; 12] = [
        Predicate::HasHeight,
        Predicate::HasColor,
        Predicate::HasPositionIndex,
        Predicate::HasAngle,
        Predicate::HasX,
        Predicate::HasY,
        Predicate::HasStartPoint,
        Predicate::HasEndPoint,
        Predicate::IsInstanceOf,
        Predicate::EncodesVariable,
        Predicate::EncodesValue,
        Predicate::ExhibitsInsight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::HasHeight => "has_height",
            Predicate::HasColor => "has_color",
            Predicate::HasPositionIndex => "has_position_index",
            Predicate::HasAngle => "has_angle",
            Predicate::HasX => "has_x",
            Predicate::HasY => "has_y",
            Predicate::HasStartPoint => "has_start_point",
            Predicate::HasEndPoint => "has_end_point",
            Predicate::IsInstanceOf => "is_instance_of",
            Predicate::EncodesVariable => "encodes_variable",
            Predicate::EncodesValue => "encodes_value",
            Predicate::ExhibitsInsight => "exhibits_insight",
        }
    }

    pub fn class(self) -> RelationClass {
        match self {
            Predicate::HasHeight
            | Predicate::HasColor
            | Predicate::HasPositionIndex
            | Predicate::HasAngle
            | Predicate::HasX
            | Predicate::HasY
            | Predicate::HasStartPoint
            | Predicate::HasEndPoint => RelationClass::VisualPropertyCorrespondence,
            Predicate::IsInstanceOf => RelationClass::DataVariableCorrespondence,
            Predicate::EncodesVariable | Predicate::EncodesValue => {
                RelationClass::VisualEncodingMapping
            }
            Predicate::ExhibitsInsight => RelationClass::VisualInsightCorrespondence,
        }
    }

    /// Type-pair check, refined beyond the class for the two encoding predicates.
    pub fn admits(self, subject: EntityType, object: EntityType) -> bool {
        match self {
            Predicate::EncodesVariable => subject == EntityType::VEPV && object == EntityType::DV,
            Predicate::EncodesValue => subject == EntityType::VEPV && object == EntityType::DVV,
            _ => self.class().admits(subject, object),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPredicate(s.to_string()))
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub label: String,
    #[serde(default)]
    pub attrs: Attrs,
}

impl Entity {
    fn ordinal(&self) -> u64 {
        self.id
            .rsplit(':')
            .next()
            .and_then(|n| n.parse().ok())
            .unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub subject: String,
    pub predicate: Predicate,
    pub object: String,
    pub class: RelationClass,
}

impl Relation {
    fn sort_key(&self) -> (&str, &'static str, &str) {
        (&self.subject, self.predicate.as_str(), &self.object)
    }
}

/// One step of a path pattern. The predicate constrains the edge that
/// enters this step, so it is ignored on the first step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub entity_type: EntityType,
    pub predicate: Option<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPattern {
    steps: Vec<PathStep>,
}

impl PathPattern {
    pub fn new(steps: Vec<PathStep>) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::Validation(
                "a path pattern needs at least two steps".into(),
            ));
        }
        Ok(PathPattern { steps })
    }

    /// Builds an unconstrained-predicate pattern from entity types.
    pub fn of_types(types: &[EntityType]) -> Result<Self> {
        Self::new(
            types
                .iter()
                .map(|&entity_type| PathStep {
                    entity_type,
                    predicate: None,
                })
                .collect(),
        )
    }

    /// Parses `VE -> VEPV[has_angle] -> DV`; a bracketed predicate names
    /// the edge entering that step.
    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for part in text.split("->") {
            let part = part.trim();
            let (ty, pred) = match part.find('[') {
                Some(open) => {
                    let close = part
                        .rfind(']')
                        .ok_or_else(|| Error::Validation(format!("unclosed `[` in `{part}`")))?;
                    let pred: Predicate = part[open + 1..close].trim().parse()?;
                    (part[..open].trim(), Some(pred))
                }
                None => (part, None),
            };
            steps.push(PathStep {
                entity_type: ty.parse()?,
                predicate: pred,
            });
        }
        Self::new(steps)
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }
}

/// Knowledge graph of a single chart.
///
/// Construction is single-writer; once built the graph is only read.
#[derive(Debug, Clone)]
pub struct ChartKg {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub provenance: Attrs,
    entities: Vec<Entity>,
    by_id: HashMap<String, usize>,
    by_content: HashMap<(EntityType, String, Attrs), String>,
    next_ordinal: [u64; 5],
    relations: Vec<Relation>,
    triples: HashSet<(String, Predicate, String)>,
    outgoing: HashMap<String, Vec<usize>>,
    incoming: HashMap<String, Vec<usize>>,
}

impl PartialEq for ChartKg {
    fn eq(&self, other: &Self) -> bool {
        self.chart_id == other.chart_id
            && self.chart_type == other.chart_type
            && self.sorted_entities() == other.sorted_entities()
            && self.sorted_relations() == other.sorted_relations()
    }
}

impl ChartKg {
    pub fn new(chart_id: impl Into<String>, chart_type: ChartType) -> Self {
        ChartKg {
            chart_id: chart_id.into(),
            chart_type,
            provenance: Attrs::new(),
            entities: Vec::new(),
            by_id: HashMap::new(),
            by_content: HashMap::new(),
            next_ordinal: [0; 5],
            relations: Vec::new(),
            triples: HashSet::new(),
            outgoing: HashMap::new(),
            incoming: HashMap::new(),
        }
    }

    /// Adds an entity, returning its id. Identical (type, label, attrs)
    /// content maps to the id it was first given.
    pub fn add_entity(
        &mut self,
        entity_type: EntityType,
        label: impl Into<String>,
        attrs: Attrs,
    ) -> Result<String> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::Validation(format!(
                "{entity_type} entity needs a non-empty label"
            )));
        }
        let key = (entity_type, label, attrs);
        if let Some(id) = self.by_content.get(&key) {
            return Ok(id.clone());
        }
        let slot = entity_type.slot();
        let id = format!("{}:{}", entity_type.prefix(), self.next_ordinal[slot]);
        self.next_ordinal[slot] += 1;
        self.insert_entity(Entity {
            id: id.clone(),
            entity_type,
            label: key.1.clone(),
            attrs: key.2.clone(),
        });
        self.by_content.insert(key, id.clone());
        Ok(id)
    }

    /// Convenience wrapper for entities without attributes.
    pub fn add(&mut self, entity_type: EntityType, label: impl Into<String>) -> Result<String> {
        self.add_entity(entity_type, label, Attrs::new())
    }

    fn insert_entity(&mut self, entity: Entity) {
        self.by_id.insert(entity.id.clone(), self.entities.len());
        self.entities.push(entity);
    }

    /// Adds a relation. Duplicate triples are collapsed; the returned index
    /// points at the stored relation either way.
    pub fn add_relation(
        &mut self,
        subject: &str,
        predicate: Predicate,
        object: &str,
    ) -> Result<usize> {
        let s = self
            .entity(subject)
            .ok_or_else(|| Error::UnknownEntity(subject.to_string()))?
            .entity_type;
        let o = self
            .entity(object)
            .ok_or_else(|| Error::UnknownEntity(object.to_string()))?
            .entity_type;
        if !predicate.admits(s, o) {
            return Err(Error::TypeViolation {
                predicate: predicate.as_str().into(),
                subject: format!("{s} `{subject}`"),
                object: format!("{o} `{object}`"),
            });
        }
        let key = (subject.to_string(), predicate, object.to_string());
        if self.triples.contains(&key) {
            let pos = self.outgoing[subject]
                .iter()
                .copied()
                .find(|&i| {
                    self.relations[i].predicate == predicate && self.relations[i].object == object
                })
                .expect("triple index and adjacency agree");
            return Ok(pos);
        }
        let pos = self.relations.len();
        self.relations.push(Relation {
            subject: key.0.clone(),
            predicate,
            object: key.2.clone(),
            class: predicate.class(),
        });
        self.outgoing.entry(key.0.clone()).or_default().push(pos);
        self.incoming.entry(key.2.clone()).or_default().push(pos);
        self.triples.insert(key);
        Ok(pos)
    }

    /// Adds a relation using a predicate name from the closed vocabulary.
    pub fn add_relation_named(
        &mut self,
        subject: &str,
        predicate: &str,
        object: &str,
    ) -> Result<usize> {
        let predicate: Predicate = predicate.parse()?;
        self.add_relation(subject, predicate, object)
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.by_id.get(id).map(|&i| &self.entities[i])
    }

    pub fn label(&self, id: &str) -> &str {
        self.entity(id).map(|e| e.label.as_str()).unwrap_or("")
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entities_of(&self, entity_type: EntityType) -> impl Iterator<Item = &Entity> {
        self.entities
            .iter()
            .filter(move |e| e.entity_type == entity_type)
    }

    /// First entity with the given type and exact label.
    pub fn find(&self, entity_type: EntityType, label: &str) -> Option<&Entity> {
        self.entities_of(entity_type).find(|e| e.label == label)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn contains_triple(&self, subject: &str, predicate: Predicate, object: &str) -> bool {
        self.triples
            .contains(&(subject.to_string(), predicate, object.to_string()))
    }

    pub fn outgoing(&self, id: &str) -> impl Iterator<Item = &Relation> {
        self.outgoing
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.relations[i])
    }

    pub fn incoming(&self, id: &str) -> impl Iterator<Item = &Relation> {
        self.incoming
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.relations[i])
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    fn sorted_entities(&self) -> Vec<&Entity> {
        let mut v: Vec<&Entity> = self.entities.iter().collect();
        v.sort_by(|a, b| {
            (a.entity_type, a.ordinal(), &a.id).cmp(&(b.entity_type, b.ordinal(), &b.id))
        });
        v
    }

    fn sorted_relations(&self) -> Vec<&Relation> {
        let mut v: Vec<&Relation> = self.relations.iter().collect();
        v.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        v
    }

    /// Every directed path whose node types and entering predicates match
    /// the pattern, sorted lexicographically by id sequence.
    pub fn match_path(&self, pattern: &PathPattern, start: Option<&str>) -> Vec<Vec<String>> {
        let steps = pattern.steps();
        let mut out = Vec::new();
        let starts: Vec<&Entity> = match start {
            Some(id) => self.entity(id).into_iter().collect(),
            None => self.entities.iter().collect(),
        };
        for e in starts {
            if e.entity_type != steps[0].entity_type {
                continue;
            }
            let mut path = vec![e.id.clone()];
            self.extend_path(steps, &mut path, &mut out);
        }
        out.sort();
        out
    }

    fn extend_path(&self, steps: &[PathStep], path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        let depth = path.len();
        if depth == steps.len() {
            out.push(path.clone());
            return;
        }
        let step = &steps[depth];
        let current = path[depth - 1].clone();
        for rel in self.outgoing(&current) {
            if step.predicate.is_some_and(|p| p != rel.predicate) {
                continue;
            }
            let ok = self
                .entity(&rel.object)
                .is_some_and(|o| o.entity_type == step.entity_type);
            if ok {
                path.push(rel.object.clone());
                self.extend_path(steps, path, out);
                path.pop();
            }
        }
    }

    /// Full scan of the type-pair invariant; returns offending relations.
    pub fn violations(&self) -> Vec<&Relation> {
        self.relations
            .iter()
            .filter(|r| {
                let s = self.entity(&r.subject).map(|e| e.entity_type);
                let o = self.entity(&r.object).map(|e| e.entity_type);
                match (s, o) {
                    (Some(s), Some(o)) => {
                        !r.predicate.admits(s, o) || r.class != r.predicate.class()
                    }
                    _ => true,
                }
            })
            .collect()
    }

    pub fn to_value(&self) -> Value {
        let entities: Vec<Value> = self
            .sorted_entities()
            .into_iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "type": e.entity_type.as_str(),
                    "label": e.label,
                    "attrs": e.attrs,
                })
            })
            .collect();
        let relations: Vec<Value> = self
            .sorted_relations()
            .into_iter()
            .map(|r| {
                json!({
                    "subject": r.subject,
                    "predicate": r.predicate.as_str(),
                    "object": r.object,
                    "class": r.class.as_str(),
                })
            })
            .collect();
        json!({
            "chart_id": self.chart_id,
            "chart_type": self.chart_type.as_str(),
            "entities": entities,
            "relations": relations,
            "provenance": self.provenance,
        })
    }

    /// Canonical JSON document: sorted keys, entities by (type, ordinal),
    /// relations by (subject, predicate, object).
    pub fn to_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.to_value()).expect("KG values always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: "$".into(),
            message: e.to_string(),
        })?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        let root = as_object(value, "$")?;
        let chart_id = get_str(root, "chart_id", "$")?;
        let chart_type: ChartType = get_str(root, "chart_type", "$")?
            .parse()
            .map_err(|e: Error| schema("$.chart_type", e.to_string()))?;
        let mut kg = ChartKg::new(chart_id, chart_type);
        if let Some(p) = root.get("provenance") {
            kg.provenance = str_map(p, "$.provenance")?;
        }

        for (i, ev) in get_array(root, "entities", "$")?.iter().enumerate() {
            let path = format!("$.entities[{i}]");
            let obj = as_object(ev, &path)?;
            let id = get_str(obj, "id", &path)?;
            let entity_type: EntityType = get_str(obj, "type", &path)?
                .parse()
                .map_err(|e: Error| schema(&format!("{path}.type"), e.to_string()))?;
            let label = get_str(obj, "label", &path)?;
            let attrs = match obj.get("attrs") {
                Some(a) => str_map(a, &format!("{path}.attrs"))?,
                None => Attrs::new(),
            };
            let ordinal = id
                .strip_prefix(entity_type.prefix())
                .and_then(|rest| rest.strip_prefix(':'))
                .and_then(|n| n.parse::<u64>().ok())
                .ok_or_else(|| {
                    schema(
                        &format!("{path}.id"),
                        format!("id `{id}` is not of the form {}:<n>", entity_type.prefix()),
                    )
                })?;
            if label.trim().is_empty() {
                return Err(schema(
                    &format!("{path}.label"),
                    "label must be non-empty".into(),
                ));
            }
            if kg.by_id.contains_key(&id) {
                return Err(schema(
                    &format!("{path}.id"),
                    format!("duplicate id `{id}`"),
                ));
            }
            let slot = entity_type.slot();
            kg.next_ordinal[slot] = kg.next_ordinal[slot].max(ordinal + 1);
            kg.by_content
                .entry((entity_type, label.clone(), attrs.clone()))
                .or_insert_with(|| id.clone());
            kg.insert_entity(Entity {
                id,
                entity_type,
                label,
                attrs,
            });
        }

        for (i, rv) in get_array(root, "relations", "$")?.iter().enumerate() {
            let path = format!("$.relations[{i}]");
            let obj = as_object(rv, &path)?;
            let subject = get_str(obj, "subject", &path)?;
            let object = get_str(obj, "object", &path)?;
            let predicate: Predicate = get_str(obj, "predicate", &path)?
                .parse()
                .map_err(|e: Error| schema(&format!("{path}.predicate"), e.to_string()))?;
            if let Some(c) = obj.get("class") {
                let class: RelationClass = c
                    .as_str()
                    .ok_or_else(|| schema(&format!("{path}.class"), "expected a string".into()))?
                    .parse()
                    .map_err(|e: Error| schema(&format!("{path}.class"), e.to_string()))?;
                if class != predicate.class() {
                    return Err(schema(
                        &format!("{path}.class"),
                        format!("`{}` belongs to {}", predicate, predicate.class().as_str()),
                    ));
                }
            }
            for (field, id) in [("subject", &subject), ("object", &object)] {
                if !kg.by_id.contains_key(id.as_str()) {
                    return Err(Error::DanglingEndpoint {
                        path: format!("{path}.{field}"),
                        id: id.clone(),
                    });
                }
            }
            kg.add_relation(&subject, predicate, &object)
                .map_err(|e| match e {
                    Error::TypeViolation { .. } => schema(&path, e.to_string()),
                    other => other,
                })?;
        }
        Ok(kg)
    }

    /// Tab-separated triple export: one `#entity` header per entity and one
    /// line per relation, all lines sorted.
    pub fn export_triples(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        let mut lines: Vec<String> = self
            .entities
            .iter()
            .map(|e| format!("#entity\t{}\t{}\t{}", e.id, e.entity_type, clean(&e.label)))
            .collect();
        lines.extend(
            self.relations
                .iter()
                .map(|r| format!("{}\t{}\t{}", r.subject, r.predicate, r.object)),
        );
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

fn schema(path: &str, message: String) -> Error {
    Error::Schema {
        path: path.to_string(),
        message,
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object".into()))
}

fn get_str(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(schema(&format!("{path}.{key}"), "expected a string".into())),
        None => Err(schema(&format!("{path}.{key}"), "missing field".into())),
    }
}

fn get_array<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Vec<Value>> {
    match obj.get(key) {
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(schema(&format!("{path}.{key}"), "expected an array".into())),
        None => Err(schema(&format!("{path}.{key}"), "missing field".into())),
    }
}

fn str_map(v: &Value, path: &str) -> Result<Attrs> {
    let obj = as_object(v, path)?;
    obj.iter()
        .map(|(k, v)| match v {
            Value::String(s) => Ok((k.clone(), s.clone())),
            _ => Err(schema(&format!("{path}.{k}"), "expected a string".into())),
        })
        .collect()
}
