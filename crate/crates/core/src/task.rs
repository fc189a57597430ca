//! World generation, plan validity and task-variant scoring.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::awm::{MemoryStore, Proposition};
use crate::symbols::{AgentId, ItemId, PutAct};
use crate::Error;

/// Steps needed to furnish one room.
pub const STEPS_PER_ROOM: usize = 4;
/// Steps in a complete two-room plan.
pub const PLAN_STEPS: usize = 2 * STEPS_PER_ROOM;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FurnitureItem {
    pub id: ItemId,
    pub kind: String,
    pub color: String,
    pub points: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldConfig {
    pub items_per_agent: usize,
    pub min_points: u32,
    pub max_points: u32,
    pub colors: Vec<String>,
    pub kinds: Vec<String>,
    pub memory_size: i32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            items_per_agent: 8,
            min_points: 10,
            max_points: 56,
            colors: ["red", "green", "blue", "yellow", "purple"].map(String::from).to_vec(),
            kinds: ["rug", "lamp", "couch", "chair", "table", "sofa"].map(String::from).to_vec(),
            memory_size: crate::awm::DEFAULT_MEMORY_SIZE,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.items_per_agent < STEPS_PER_ROOM {
            return Err(Error::Config(format!(
                "items_per_agent must be at least {STEPS_PER_ROOM}, got {}",
                self.items_per_agent
            )));
        }
        if self.min_points == 0 || self.min_points > self.max_points {
            return Err(Error::Config(format!(
                "point range must satisfy 0 < lo <= hi, got [{}, {}]",
                self.min_points, self.max_points
            )));
        }
        if self.colors.is_empty() || self.kinds.is_empty() {
            return Err(Error::Config("color and kind palettes must be non-empty".into()));
        }
        if self.memory_size < 2 {
            return Err(Error::Config(format!("memory size must be >= 2, got {}", self.memory_size)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub items: Vec<FurnitureItem>,
    pub ownership: BTreeMap<ItemId, AgentId>,
}

impl WorldState {
    pub fn item(&self, id: ItemId) -> Option<&FurnitureItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn points(&self, id: ItemId) -> u32 {
        self.item(id).map_or(0, |i| i.points)
    }

    pub fn owner(&self, id: ItemId) -> Option<AgentId> {
        self.ownership.get(&id).copied()
    }

    pub fn owned_by(&self, agent: AgentId) -> impl Iterator<Item = &FurnitureItem> {
        self.items.iter().filter(move |i| self.owner(i.id) == Some(agent))
    }
}

/// Builds a world and the two agents' initial memories.
///
/// Scores of every item go to both memories; ownership goes only to the
/// owner. Each memory receives its beliefs in an independently shuffled
/// order, so which beliefs start out salient depends on the radius.
pub fn generate_world<R: Rng + ?Sized>(
    cfg: &WorldConfig,
    rng: &mut R,
) -> Result<(WorldState, [MemoryStore; 2]), Error> {
    cfg.validate()?;
    let mut items = Vec::with_capacity(2 * cfg.items_per_agent);
    let mut ownership = BTreeMap::new();
    for agent in [AgentId::A, AgentId::B] {
        for _ in 0..cfg.items_per_agent {
            let id = ItemId(items.len() as u16);
            items.push(FurnitureItem {
                id,
                kind: cfg.kinds[rng.random_range(0..cfg.kinds.len())].clone(),
                color: cfg.colors[rng.random_range(0..cfg.colors.len())].clone(),
                points: rng.random_range(cfg.min_points..=cfg.max_points),
            });
            ownership.insert(id, agent);
        }
    }
    let world = WorldState { items, ownership };

    let memories = [AgentId::A, AgentId::B].map(|agent| {
        let mut beliefs: Vec<Proposition> = world
            .items
            .iter()
            .map(|i| Proposition::Score { item: i.id, points: i.points })
            .chain(world.owned_by(agent).map(|i| Proposition::Has { agent, item: i.id }))
            .collect();
        beliefs.shuffle(rng);
        let mut mem = MemoryStore::new(cfg.memory_size);
        for b in beliefs {
            mem.store(b, rng);
        }
        mem
    });
    Ok((world, memories))
}

/// Marks each step valid iff its actor owns the item and no earlier valid
/// step already used it. Invalid steps consume nothing.
pub fn validate_plan(steps: &[PutAct], world: &WorldState) -> Vec<bool> {
    let mut used = HashSet::new();
    steps.iter().map(|s| world.owner(s.item) == Some(s.actor) && used.insert(s.item)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskVariant {
    Standard,
    ZeroInvalids,
    ZeroNonmatchingBeliefs,
}

impl TaskVariant {
    pub const ALL: [TaskVariant; 3] =
        [TaskVariant::Standard, TaskVariant::ZeroInvalids, TaskVariant::ZeroNonmatchingBeliefs];

    pub fn name(self) -> &'static str {
        match self {
            TaskVariant::Standard => "standard",
            TaskVariant::ZeroInvalids => "zero-invalids",
            TaskVariant::ZeroNonmatchingBeliefs => "zero-nonmatching-beliefs",
        }
    }
}

impl fmt::Display for TaskVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        TaskVariant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::UnknownName { kind: "task variant", name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepScore {
    pub act: PutAct,
    pub points: u32,
    pub valid: bool,
    pub warrant_matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreReport {
    pub variant: TaskVariant,
    pub raw_score: i64,
    pub per_step: Vec<StepScore>,
}

impl ScoreReport {
    pub fn recompute(&self) -> i64 {
        score_steps(&self.per_step, self.variant)
    }
}

pub fn score_steps(steps: &[StepScore], variant: TaskVariant) -> i64 {
    let standard: i64 = steps.iter().map(|s| if s.valid { i64::from(s.points) } else { -i64::from(s.points) }).sum();
    match variant {
        TaskVariant::Standard => standard,
        TaskVariant::ZeroInvalids if steps.iter().any(|s| !s.valid) => 0,
        TaskVariant::ZeroInvalids => standard,
        TaskVariant::ZeroNonmatchingBeliefs if steps.iter().any(|s| !s.warrant_matched) => 0,
        TaskVariant::ZeroNonmatchingBeliefs => standard,
    }
}

/// Raw score of an agreed plan. `validity` and `warrant_matched` are aligned
/// with `steps`.
pub fn raw_score(
    world: &WorldState,
    steps: &[PutAct],
    validity: &[bool],
    warrant_matched: &[bool],
    variant: TaskVariant,
) -> i64 {
    score_plan(world, steps, validity, warrant_matched, variant).raw_score
}

pub fn score_plan(
    world: &WorldState,
    steps: &[PutAct],
    validity: &[bool],
    warrant_matched: &[bool],
    variant: TaskVariant,
) -> ScoreReport {
    assert_eq!(steps.len(), validity.len(), "validity not aligned with steps");
    assert_eq!(steps.len(), warrant_matched.len(), "warrant flags not aligned with steps");
    let per_step: Vec<StepScore> = steps
        .iter()
        .zip(validity)
        .zip(warrant_matched)
        .map(|((&act, &valid), &warrant_matched)| StepScore {
            act,
            points: world.points(act.item),
            valid,
            warrant_matched,
        })
        .collect();
    ScoreReport { variant, raw_score: score_steps(&per_step, variant), per_step }
}

/// Best achievable standard score: a full plan places the highest-valued
/// items, each by its owner. With at least four items per agent any
/// selection of distinct items is placeable.
pub fn max_raw_score(world: &WorldState) -> i64 {
    let mut points: Vec<u32> = world.items.iter().map(|i| i.points).collect();
    points.sort_unstable_by(|a, b| b.cmp(a));
    points.iter().take(PLAN_STEPS).map(|&p| i64::from(p)).sum()
}
