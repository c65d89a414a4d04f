use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kg::EntityId;
use crate::sampler::SampledContext;

pub const DEFAULT_TRIPLET_HEADER: &str = "Facts about the entity from the knowledge graph:";
pub const DEFAULT_DESCRIPTION_HEADER: &str = "Existing description:";
pub const DEFAULT_TASK_INSTRUCTION: &str = "Using the facts and the existing description, \
write one accurate, comprehensive paragraph describing this entity. \
Correct any inaccurate facts. Output only the paragraph.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    #[serde(default = "d_task")]
    pub task_instruction: String,
    #[serde(default = "d_triplet_header")]
    pub triplet_header: String,
    #[serde(default = "d_description_header")]
    pub description_header: String,
    #[serde(default = "d_max_chars")]
    pub max_prompt_chars: usize,
}

fn d_task() -> String {
    DEFAULT_TASK_INSTRUCTION.into()
}
fn d_triplet_header() -> String {
    DEFAULT_TRIPLET_HEADER.into()
}
fn d_description_header() -> String {
    DEFAULT_DESCRIPTION_HEADER.into()
}
fn d_max_chars() -> usize {
    8000
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            task_instruction: d_task(),
            triplet_header: d_triplet_header(),
            description_header: d_description_header(),
            max_prompt_chars: d_max_chars(),
        }
    }
}

impl PromptTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.task_instruction.trim().is_empty() {
            return Err(Error::Config("task_instruction must not be empty".into()));
        }
        let floor = self.task_instruction.chars().count() + 200;
        if self.max_prompt_chars <= floor {
            return Err(Error::Config(format!(
                "max_prompt_chars must exceed {floor} (instruction length + 200)"
            )));
        }
        Ok(())
    }

    fn render(&self, sentences: &[String], description: &str) -> String {
        format!(
            "{}\n{}\n\n{}\n{}\n\n{}",
            self.triplet_header,
            sentences.join(" "),
            self.description_header,
            description,
            self.task_instruction
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub node: EntityId,
    pub node_name: String,
    /// The original description, or the node name when it has none.
    pub description: String,
    /// Sampled sentences that survived the length budget.
    pub sentences: Vec<String>,
    pub dropped: usize,
    pub text: String,
    pub prompt_hash: String,
}

/// Assembles the adaptive prompt: sampled facts, then the description (or the
/// node name), then the task instruction. Trailing facts are dropped until
/// the text fits `max_prompt_chars`.
pub fn build_prompt(
    template: &PromptTemplate,
    node_name: &str,
    description: Option<&str>,
    context: &SampledContext,
) -> Result<Prompt> {
    let node_name = node_name.trim();
    if node_name.is_empty() {
        return Err(Error::Prompt(format!("node {} has an empty name", context.node)));
    }
    let description = description
        .map(str::trim)
        .filter(|d| !d.is_empty())
        .unwrap_or(node_name);

    let mut keep = context.sentences.len();
    let text = loop {
        let text = template.render(&context.sentences[..keep], description);
        if text.chars().count() <= template.max_prompt_chars {
            break text;
        }
        if keep == 0 {
            return Err(Error::Prompt(format!(
                "prompt for node {} exceeds {} characters even without facts",
                context.node, template.max_prompt_chars
            )));
        }
        keep -= 1;
    };
    Ok(Prompt {
        node: context.node,
        node_name: node_name.to_string(),
        description: description.to_string(),
        sentences: context.sentences[..keep].to_vec(),
        dropped: context.sentences.len() - keep,
        prompt_hash: hex::encode(Sha256::digest(text.as_bytes())),
        text,
    })
}
