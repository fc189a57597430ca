//! Design-World: two resource-bounded agents negotiate a two-room furniture
//! plan while an experiment harness measures how their communicative
//! strategies interact with attention limits and with how the task is scored.
//!
//! - [`awm`]: the random-walk attention/working memory.
//! - [`agent`]: option generation, deliberation and proposal evaluation.
//! - [`discourse`]: communicative acts, strategies and the dialogue engine.
//! - [`task`]: worlds, plan validity and the three scoring variants.
//! - [`experiment`]: batches, performance, KS testing and verdicts.

pub mod agent;
pub mod awm;
pub mod discourse;
pub mod experiment;
pub mod symbols;
pub mod task;

pub use agent::{AgentState, CostLedger, PlanOption};
pub use awm::{Locus, MemoryStore, Pattern, Proposition};
pub use discourse::{run_dialogue, CommunicativeAct, DialogueRecord, StrategyKind};
pub use experiment::{
    classify, difference_series, ks_two_sample, performance, run_cell, CostModel, Distribution, ExperimentCell,
    KsResult, StrategyPair, Verdict, VerdictKind,
};
pub use symbols::{AgentId, ItemId, PutAct, Room};
pub use task::{TaskVariant, WorldConfig, WorldState};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown {kind} name `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("transcript error: {0}")]
    Transcript(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}
