//! Adaptive prompt construction and LLM description generation.

mod backend;
mod prompt;
mod store;

use std::sync::Mutex;

use crate::embedding::TextEncoder;
use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::sampler::{sample_triplets, SampledContext, SamplerConfig};

pub use backend::{
    generate_description, AugmentedDescription, BackendKind, ChatBackend, LlmBackend,
    LlmBackendConfig, MockBackend, LLM_API_KEY_ENV,
};
pub use prompt::{
    build_prompt, Prompt, PromptTemplate, DEFAULT_DESCRIPTION_HEADER, DEFAULT_TASK_INSTRUCTION,
    DEFAULT_TRIPLET_HEADER,
};
pub use store::{AugmentationStore, StoreRecord};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentOutcome {
    pub generated: usize,
    pub skipped: usize,
    /// Empty completions replaced by the original description or name.
    pub fallbacks: usize,
    pub failures: Vec<(EntityId, String)>,
}

/// Builds the prompt for a sampled context using the node's own name and description.
pub fn prompt_for(
    kg: &KnowledgeGraph,
    template: &PromptTemplate,
    context: &SampledContext,
) -> Result<Prompt> {
    let e = kg.entity(context.node)?;
    build_prompt(template, &e.name, e.description.as_deref(), context)
}

/// Generates descriptions for every context whose `(node, prompt_hash, backend)`
/// is not yet in the store.
///
/// Work proceeds in batches of the backend's `max_inflight`; each finished
/// batch is appended in input order, so an interrupted run resumes cleanly
/// and the store bytes do not depend on completion order.
pub fn augment_contexts(
    kg: &KnowledgeGraph,
    contexts: &[SampledContext],
    template: &PromptTemplate,
    backend: &dyn LlmBackend,
    max_inflight: usize,
    store: &mut AugmentationStore,
) -> Result<AugmentOutcome> {
    template.validate()?;
    let backend_id = backend.backend_id();
    let mut outcome = AugmentOutcome::default();

    let mut pending = Vec::new();
    for ctx in contexts {
        let p = prompt_for(kg, template, ctx)?;
        if store.contains(p.node, &p.prompt_hash, &backend_id) {
            outcome.skipped += 1;
        } else {
            pending.push(p);
        }
    }

    for batch in pending.chunks(max_inflight.max(1)) {
        let results: Mutex<Vec<Option<Result<AugmentedDescription>>>> =
            Mutex::new((0..batch.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for (i, p) in batch.iter().enumerate() {
                let results = &results;
                s.spawn(move || {
                    let r = generate_description(backend, p);
                    results.lock().unwrap()[i] = Some(r);
                });
            }
        });
        let mut records = Vec::new();
        for (p, r) in batch.iter().zip(results.into_inner().unwrap()) {
            match r.expect("every prompt processed") {
                Ok(d) => {
                    outcome.generated += 1;
                    records.push(d.into());
                }
                Err(Error::EmptyGeneration { .. }) => {
                    outcome.fallbacks += 1;
                    records.push(StoreRecord {
                        node: p.node,
                        prompt_hash: p.prompt_hash.clone(),
                        backend: backend_id.clone(),
                        text: p.description.clone(),
                    });
                }
                Err(e) => {
                    log::warn!("generation failed for node {}: {e}", p.node);
                    outcome.failures.push((p.node, e.to_string()));
                }
            }
        }
        store.append(records)?;
    }
    Ok(outcome)
}

/// Samples, prompts and generates for each node in `nodes`.
pub fn augment_nodes(
    kg: &KnowledgeGraph,
    nodes: &[EntityId],
    sampler: &SamplerConfig,
    encoder: &dyn TextEncoder,
    template: &PromptTemplate,
    backend: &dyn LlmBackend,
    max_inflight: usize,
    store: &mut AugmentationStore,
) -> Result<AugmentOutcome> {
    let contexts = nodes
        .iter()
        .map(|&v| sample_triplets(kg, v, encoder, sampler))
        .collect::<Result<Vec<_>>>()?;
    augment_contexts(kg, &contexts, template, backend, max_inflight, store)
}
