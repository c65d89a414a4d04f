//! Planted-signal synthetic knowledge graphs.
//!
//! Every labeled entity gets `raw_score = exp(beta * d0) - 1`, where `d0` is
//! the number of relation-0 triplets it takes part in, so the log-scaled
//! label equals `beta * d0` exactly.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{Entity, KnowledgeGraph, Relation, Triplet};

const SIGNAL_RELATION: &str = "collaborated_with";

/// `(relation name, hub category)` for relations 1, 2, ...
const HUB_RELATIONS: [(&str, &str); 7] = [
    ("located_in", "city"),
    ("genre", "style"),
    ("member_of", "league"),
    ("signed_to", "label"),
    ("influenced_by", "movement"),
    ("produced_by", "studio"),
    ("awarded", "prize"),
];

const KINDS: [&str; 6] = ["artist", "film", "band", "studio", "album", "ensemble"];

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ren", "tu", "sa", "vel", "do", "ri", "an", "po", "zen", "ta", "mo", "li", "gar",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub nodes: usize,
    pub relations: usize,
    pub seed: u64,
    pub beta: f64,
    /// Fraction of entities that are unlabeled category hubs.
    pub hub_fraction: f64,
    /// Relation-0 edges started by a regular entity: uniform on `1..=max_signal_out`.
    pub max_signal_out: usize,
    /// Hub edges per other relation started by a regular entity: uniform on `0..=max_hub_out`.
    pub max_hub_out: usize,
    /// Share of regular entities that carry a description.
    pub description_fraction: f64,
}

impl SynthParams {
    pub fn new(nodes: usize, relations: usize, seed: u64) -> Self {
        Self {
            nodes,
            relations,
            seed,
            beta: 0.3,
            hub_fraction: 0.1,
            max_signal_out: 4,
            max_hub_out: 8,
            description_fraction: 0.7,
        }
    }

    fn hubs(&self) -> usize {
        if self.relations < 2 {
            return 0;
        }
        ((self.nodes as f64 * self.hub_fraction).round() as usize).max(self.relations - 1)
    }
}

fn relation_name(r: usize) -> String {
    match r {
        0 => SIGNAL_RELATION.to_string(),
        r => HUB_RELATIONS
            .get(r - 1)
            .map(|(n, _)| n.to_string())
            .unwrap_or_else(|| format!("related_to_{r}")),
    }
}

fn hub_category(r: usize) -> String {
    HUB_RELATIONS
        .get(r - 1)
        .map(|(_, c)| c.to_string())
        .unwrap_or_else(|| format!("group{r}"))
}

fn syllable_name(rng: &mut ChaCha8Rng, taken: &mut HashSet<String>) -> String {
    loop {
        let parts = rng.gen_range(2..=3);
        let mut name: String = (0..parts)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect();
        name[..1].make_ascii_uppercase();
        if taken.insert(name.clone()) {
            return name;
        }
    }
}

/// Generates the graph described by `params`.
///
/// Entities `0..nodes - hubs` are regular, labeled entities linked to each
/// other by relation 0. The remaining entities are hubs; relation `r >= 1`
/// links regular entities to the hubs of category `r`.
pub fn generate(params: &SynthParams) -> Result<KnowledgeGraph> {
    if params.relations == 0 {
        return Err(Error::Config("synthetic graph needs at least one relation".into()));
    }
    if !(0.0..=1.0).contains(&params.description_fraction)
        || !(0.0..1.0).contains(&params.hub_fraction)
        || !(params.beta.is_finite() && params.beta > 0.0)
        || params.max_signal_out == 0
    {
        return Err(Error::Config(
            "synthetic fractions must lie in [0, 1), beta and max_signal_out be positive".into(),
        ));
    }
    let hubs = params.hubs();
    if params.nodes < hubs + 2 {
        return Err(Error::Config(format!(
            "{} nodes leave fewer than 2 regular entities next to {hubs} hubs",
            params.nodes
        )));
    }
    let regular = params.nodes - hubs;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut taken = HashSet::new();
    let mut names: Vec<String> = (0..regular).map(|_| syllable_name(&mut rng, &mut taken)).collect();
    // Hub h belongs to category 1 + h % (relations - 1).
    let mut hubs_of: Vec<Vec<usize>> = vec![Vec::new(); params.relations];
    for h in 0..hubs {
        let r = 1 + h % (params.relations - 1);
        let base = syllable_name(&mut rng, &mut taken);
        names.push(format!("{base} {} of the central region", hub_category(r)));
        hubs_of[r].push(regular + h);
    }

    let mut triplets = Vec::new();
    for head in 0..regular {
        for _ in 0..rng.gen_range(1..=params.max_signal_out) {
            let mut tail = rng.gen_range(0..regular - 1);
            if tail >= head {
                tail += 1;
            }
            triplets.push(Triplet { head, relation: 0, tail });
        }
        for (relation, pool) in hubs_of.iter().enumerate().skip(1) {
            for _ in 0..rng.gen_range(0..=params.max_hub_out) {
                let tail = pool[rng.gen_range(0..pool.len())];
                triplets.push(Triplet { head, relation, tail });
            }
        }
    }

    let mut signal_degree = vec![0usize; params.nodes];
    for t in triplets.iter().filter(|t| t.relation == 0) {
        signal_degree[t.head] += 1;
        signal_degree[t.tail] += 1;
    }

    let entities = names
        .into_iter()
        .enumerate()
        .map(|(id, name)| {
            let is_regular = id < regular;
            let description = (is_regular && rng.gen::<f64>() < params.description_fraction).then(|| {
                let kind = KINDS[rng.gen_range(0..KINDS.len())];
                let article = if kind.starts_with(['a', 'e', 'i', 'o', 'u']) { "an" } else { "a" };
                format!("{name} is {article} {kind} in the catalogue.")
            });
            let raw_score = is_regular.then(|| (params.beta * signal_degree[id] as f64).exp_m1());
            Entity {
                id,
                name,
                description,
                raw_score,
            }
        })
        .collect();
    let relations = (0..params.relations)
        .map(|id| Relation {
            id,
            name: relation_name(id),
        })
        .collect();
    KnowledgeGraph::new(entities, relations, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_linear_in_signal_degree() {
        let p = SynthParams::new(60, 3, 9);
        let regular = 60 - 6;
        let kg = generate(&p).unwrap();
        let mut d0 = vec![0usize; 60];
        assert_eq!(kg.labels().unwrap().len(), regular);
        for t in kg.triplets().iter().filter(|t| t.relation == 0) {
            d0[t.head] += 1;
            d0[t.tail] += 1;
        }
        for l in kg.labels().unwrap() {
            assert!((l.value - p.beta * d0[l.node] as f64).abs() < 1e-9);
        }
        assert_eq!(generate(&p).unwrap(), kg);
    }
}
