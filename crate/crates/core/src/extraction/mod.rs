//! Artifact extraction from a knowledge-base dump, LLM refinement hooks,
//! popularity ranking and prompt rendering.

mod kb;
mod popularity;
mod prompts;
mod refine;
mod traverse;

pub use kb::{parse_kb_dump, KBGraph, KBNode, ParseError, ParseMode, ParseReport};
pub use popularity::{rank_by_popularity, PopularityClient, PopularityRanking};
pub use prompts::{awareness_prompt, render_prompts, PromptError, PromptRecord, NEGATIVE_PROMPT};
pub use refine::{refine_with_llm, RefineError, RefineStage, RefinementClient};
pub use traverse::{
    extract_all, extract_artifacts, ArtifactRecord, ExtractError, Provenance, RootSet, DEFAULT_HOPS,
};
