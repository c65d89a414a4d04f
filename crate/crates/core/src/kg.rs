//! Knowledge-graph loading, indexing and triplet verbalisation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseIssue, Result};

pub type EntityId = usize;
pub type RelationId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    /// Absent when the source row leaves the field empty.
    pub description: Option<String>,
    pub raw_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub id: RelationId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triplet {
    pub fn is_self_loop(&self) -> bool {
        self.head == self.tail
    }
}

/// Log-scaled importance target for one labeled entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceLabel {
    pub node: EntityId,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgSummary {
    pub entities: usize,
    pub edges: usize,
    pub relations: usize,
    pub labeled: usize,
}

/// An immutable, fully indexed knowledge graph.
///
/// `incidence[v]` lists, in ascending order, the index of every triplet that
/// has `v` as head or tail. A self-loop is listed once for its entity.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    relations: Vec<Relation>,
    triplets: Vec<Triplet>,
    incidence: Vec<Vec<usize>>,
}

impl KnowledgeGraph {
    /// Builds and indexes a graph from in-memory parts.
    ///
    /// Entity and relation ids must equal their position in the input vectors.
    pub fn new(
        entities: Vec<Entity>,
        relations: Vec<Relation>,
        triplets: Vec<Triplet>,
    ) -> Result<Self> {
        for (i, e) in entities.iter().enumerate() {
            if e.id != i {
                return Err(Error::Contract(format!(
                    "entity at position {i} has id {}",
                    e.id
                )));
            }
            if e.name.trim().is_empty() {
                return Err(Error::Contract(format!("entity {i} has an empty name")));
            }
        }
        for (i, r) in relations.iter().enumerate() {
            if r.id != i {
                return Err(Error::Contract(format!(
                    "relation at position {i} has id {}",
                    r.id
                )));
            }
            if r.name.trim().is_empty() {
                return Err(Error::Contract(format!("relation {i} has an empty name")));
            }
        }
        let mut incidence = vec![Vec::new(); entities.len()];
        for (idx, t) in triplets.iter().enumerate() {
            if t.head >= entities.len() || t.tail >= entities.len() {
                return Err(Error::Lookup {
                    what: "entity",
                    id: t.head.max(t.tail),
                });
            }
            if t.relation >= relations.len() {
                return Err(Error::Lookup {
                    what: "relation",
                    id: t.relation,
                });
            }
            incidence[t.head].push(idx);
            if !t.is_self_loop() {
                incidence[t.tail].push(idx);
            }
        }
        Ok(Self {
            entities,
            relations,
            triplets,
            incidence,
        })
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity> {
        self.entities.get(id).ok_or(Error::Lookup {
            what: "entity",
            id,
        })
    }

    pub fn relation(&self, id: RelationId) -> Result<&Relation> {
        self.relations.get(id).ok_or(Error::Lookup {
            what: "relation",
            id,
        })
    }

    /// Sorted triplet indices incident to `v`.
    pub fn incidence(&self, v: EntityId) -> Result<&[usize]> {
        self.incidence
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::Lookup {
                what: "entity",
                id: v,
            })
    }

    /// All triplets with `v` as head or tail, in ascending triplet-index order.
    pub fn node_triplets(&self, v: EntityId) -> Result<Vec<Triplet>> {
        Ok(self
            .incidence(v)?
            .iter()
            .map(|&i| self.triplets[i])
            .collect())
    }

    /// Renders a triplet as `"{head}'s {relation} is {tail}."`.
    pub fn sentence(&self, t: &Triplet) -> Result<String> {
        let head = self.entity(t.head)?.name.trim();
        let tail = self.entity(t.tail)?.name.trim();
        let relation = normalize_relation_name(&self.relation(t.relation)?.name);
        let fail = |reason: &str| Error::Template {
            triplet: format!("({}, {}, {})", t.head, t.relation, t.tail),
            reason: reason.to_string(),
        };
        if head.is_empty() || tail.is_empty() {
            return Err(fail("entity name is empty"));
        }
        if relation.is_empty() {
            return Err(fail("relation name normalizes to empty text"));
        }
        Ok(format!("{head}'s {relation} is {tail}."))
    }

    /// Entities carrying a raw score, in id order, with log-transformed values.
    pub fn labels(&self) -> Result<Vec<ImportanceLabel>> {
        self.entities
            .iter()
            .filter_map(|e| e.raw_score.map(|s| (e.id, s)))
            .map(|(node, s)| {
                Ok(ImportanceLabel {
                    node,
                    value: log_transform(s)?,
                })
            })
            .collect()
    }

    pub fn summary(&self) -> KgSummary {
        KgSummary {
            entities: self.entities.len(),
            edges: self.triplets.len(),
            relations: self.relations.len(),
            labeled: self
                .entities
                .iter()
                .filter(|e| e.raw_score.is_some())
                .count(),
        }
    }
}

/// Flattens Freebase-style relation paths into a readable phrase.
///
/// `"/film/film/genre"` becomes `"genre"`, `"has_term"` becomes `"has term"`.
pub fn normalize_relation_name(raw: &str) -> String {
    let last = raw.rsplit('/').next().unwrap_or(raw);
    last.replace(['_', '.'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// `ln(1 + raw_score)`.
pub fn log_transform(raw_score: f64) -> Result<f64> {
    if !raw_score.is_finite() || raw_score < 0.0 {
        return Err(Error::Domain(format!(
            "importance score must be finite and non-negative, got {raw_score}"
        )));
    }
    Ok(raw_score.ln_1p())
}

/// Loads the three TSV files and builds the indexed graph.
pub fn load_kg(
    entity_path: impl AsRef<Path>,
    relation_path: impl AsRef<Path>,
    triplet_path: impl AsRef<Path>,
) -> Result<KnowledgeGraph> {
    let entities = parse_entities(entity_path.as_ref())?;
    let relations = parse_relations(relation_path.as_ref())?;
    let triplets = parse_triplets(triplet_path.as_ref(), entities.len(), relations.len())?;
    KnowledgeGraph::new(entities, relations, triplets)
}

struct Rows<'a> {
    path: &'a Path,
    text: String,
}

impl<'a> Rows<'a> {
    fn read(path: &'a Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path, text })
    }

    /// Yields `(1-based line number, fields)` for non-blank lines.
    fn iter(&self) -> impl Iterator<Item = (usize, Vec<&str>)> + '_ {
        self.text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| (n, l.split('\t').collect()))
    }

    fn err(&self, line: usize, issue: ParseIssue) -> Error {
        Error::Parse {
            file: self.path.to_path_buf(),
            line,
            issue,
        }
    }

    fn expect_columns(&self, line: usize, fields: &[&str], expected: usize) -> Result<()> {
        if fields.len() != expected {
            return Err(self.err(
                line,
                ParseIssue::ColumnCount {
                    expected,
                    found: fields.len(),
                },
            ));
        }
        Ok(())
    }

    fn id(&self, line: usize, field: &str) -> Result<usize> {
        field
            .trim()
            .parse()
            .map_err(|_| self.err(line, ParseIssue::BadNumber(field.to_string())))
    }
}

/// Places `(line, id, item)` rows into a dense vector indexed by id.
fn densify<T>(rows: &Rows<'_>, parsed: Vec<(usize, usize, T)>) -> Result<Vec<T>> {
    let n = parsed.len();
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (line, id, item) in parsed {
        if id >= n {
            return Err(rows.err(
                line,
                ParseIssue::NonContiguousId {
                    expected: n - 1,
                    found: id,
                },
            ));
        }
        if slots[id].is_some() {
            return Err(rows.err(line, ParseIssue::DuplicateId(id)));
        }
        slots[id] = Some(item);
    }
    // Every slot is filled: n distinct ids below n.
    Ok(slots.into_iter().flatten().collect())
}

fn parse_entities(path: &Path) -> Result<Vec<Entity>> {
    let rows = Rows::read(path)?;
    let mut parsed = Vec::new();
    for (line, fields) in rows.iter() {
        rows.expect_columns(line, &fields, 4)?;
        let id = rows.id(line, fields[0])?;
        let name = fields[1].trim();
        if name.is_empty() {
            return Err(rows.err(line, ParseIssue::EmptyName));
        }
        let description = Some(fields[2].trim())
            .filter(|d| !d.is_empty())
            .map(str::to_string);
        let raw = fields[3].trim();
        let raw_score = if raw.is_empty() {
            None
        } else {
            let v: f64 = raw
                .parse()
                .map_err(|_| rows.err(line, ParseIssue::BadNumber(raw.to_string())))?;
            if !v.is_finite() || v < 0.0 {
                return Err(rows.err(line, ParseIssue::BadNumber(raw.to_string())));
            }
            Some(v)
        };
        parsed.push((
            line,
            id,
            Entity {
                id,
                name: name.to_string(),
                description,
                raw_score,
            },
        ));
    }
    densify(&rows, parsed)
}

fn parse_relations(path: &Path) -> Result<Vec<Relation>> {
    let rows = Rows::read(path)?;
    let mut parsed = Vec::new();
    for (line, fields) in rows.iter() {
        rows.expect_columns(line, &fields, 2)?;
        let id = rows.id(line, fields[0])?;
        let name = fields[1].trim();
        if name.is_empty() {
            return Err(rows.err(line, ParseIssue::EmptyName));
        }
        parsed.push((
            line,
            id,
            Relation {
                id,
                name: name.to_string(),
            },
        ));
    }
    densify(&rows, parsed)
}

fn parse_triplets(path: &Path, n_entities: usize, n_relations: usize) -> Result<Vec<Triplet>> {
    let rows = Rows::read(path)?;
    let mut triplets = Vec::new();
    for (line, fields) in rows.iter() {
        rows.expect_columns(line, &fields, 3)?;
        let head = rows.id(line, fields[0])?;
        let relation = rows.id(line, fields[1])?;
        let tail = rows.id(line, fields[2])?;
        for e in [head, tail] {
            if e >= n_entities {
                return Err(rows.err(line, ParseIssue::DanglingEntity(e)));
            }
        }
        if relation >= n_relations {
            return Err(rows.err(line, ParseIssue::DanglingRelation(relation)));
        }
        triplets.push(Triplet {
            head,
            relation,
            tail,
        });
    }
    Ok(triplets)
}

/// Writes a graph in the three-file TSV layout read by [`load_kg`].
pub fn write_kg(
    kg: &KnowledgeGraph,
    entity_path: impl AsRef<Path>,
    relation_path: impl AsRef<Path>,
    triplet_path: impl AsRef<Path>,
) -> Result<()> {
    let mut ents = String::new();
    for e in &kg.entities {
        let score = e.raw_score.map(|s| s.to_string()).unwrap_or_default();
        ents.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            e.id,
            e.name,
            e.description.as_deref().unwrap_or(""),
            score
        ));
    }
    let rels: String = kg
        .relations
        .iter()
        .map(|r| format!("{}\t{}\n", r.id, r.name))
        .collect();
    let trips: String = kg
        .triplets
        .iter()
        .map(|t| format!("{}\t{}\t{}\n", t.head, t.relation, t.tail))
        .collect();
    for (path, body) in [
        (entity_path.as_ref(), ents),
        (relation_path.as_ref(), rels),
        (triplet_path.as_ref(), trips),
    ] {
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
