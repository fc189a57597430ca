//! The resource-bounded agent: means-end reasoning, deliberation and proposal
//! evaluation over whatever beliefs are currently salient.
//!
//! Every memory search goes through [`AgentState::retrieve`], which charges
//! the search sphere's size to the agent's [`CostLedger`].

use std::collections::BTreeSet;
use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::awm::{MemoryStore, Pattern, Proposition, Retrieval};
use crate::discourse::StrategyKind;
use crate::symbols::{AgentId, ItemId, PutAct, Room};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OptionId(pub u32);

impl fmt::Display for OptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "option-{}", self.0)
    }
}

/// Dialogue-wide source of option ids.
#[derive(Debug, Default)]
pub struct OptionIds(u32);

impl OptionIds {
    pub fn fresh(&mut self) -> OptionId {
        self.0 += 1;
        OptionId(self.0)
    }
}

/// A candidate put-act produced by means-end reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlanOption {
    pub id: OptionId,
    pub act: PutAct,
}

/// An option together with what the agent could recall about its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoredOption {
    pub option: PlanOption,
    /// Points from the salient score belief, if one was found.
    pub warrant: Option<u32>,
}

impl ScoredOption {
    pub fn utility(&self) -> u32 {
        self.warrant.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub messages: u64,
    pub inferences: u64,
    /// Loci probed across all memory searches.
    pub retrievals: u64,
    /// Number of memory searches.
    pub searches: u64,
}

impl CostLedger {
    pub fn total(ledgers: &[CostLedger]) -> CostLedger {
        ledgers.iter().fold(CostLedger::default(), |acc, l| CostLedger {
            messages: acc.messages + l.messages,
            inferences: acc.inferences + l.inferences,
            retrievals: acc.retrievals + l.retrievals,
            searches: acc.searches + l.searches,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgement {
    Accept { own_best: Option<ScoredOption> },
    Reject { counter: ScoredOption },
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: AgentId,
    pub strategy: StrategyKind,
    pub radius: u32,
    memory: MemoryStore,
    walk: ChaCha8Rng,
    ledger: CostLedger,
    room: Room,
    /// Own items rejected in the current room since the last agreed step.
    rejected: BTreeSet<ItemId>,
}

impl AgentState {
    pub fn new(id: AgentId, strategy: StrategyKind, radius: u32, memory: MemoryStore, walk: ChaCha8Rng) -> AgentState {
        AgentState {
            id,
            strategy,
            radius,
            memory,
            walk,
            ledger: CostLedger::default(),
            room: Room::One,
            rejected: BTreeSet::new(),
        }
    }

    pub fn memory(&self) -> &MemoryStore {
        &self.memory
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger
    }

    pub fn room(&self) -> Room {
        self.room
    }

    pub fn open_room(&mut self, room: Room) {
        self.room = room;
        self.rejected.clear();
    }

    pub fn has_rejected(&self) -> bool {
        !self.rejected.is_empty()
    }

    pub fn clear_rejected(&mut self) {
        self.rejected.clear();
    }

    pub fn note_rejected(&mut self, item: ItemId) {
        self.rejected.insert(item);
    }

    pub fn store(&mut self, p: Proposition) {
        self.memory.store(p, &mut self.walk);
    }

    pub fn charge_message(&mut self) {
        self.ledger.messages += 1;
    }

    pub fn retrieve(&mut self, pattern: &Pattern) -> Retrieval {
        let r = self.memory.retrieve(pattern, self.radius);
        self.ledger.retrievals += r.probes;
        self.ledger.searches += 1;
        r
    }

    pub fn is_salient(&mut self, pattern: &Pattern) -> bool {
        !self.retrieve(pattern).matches.is_empty()
    }

    /// Uncharged look at whether `item`'s score is currently salient.
    pub fn warrant_salient(&self, item: ItemId) -> bool {
        self.memory.is_salient(&Pattern::score(item), self.radius).0
    }

    /// One option per salient owned item that is not known to be used up
    /// and was not rejected in this room.
    pub fn generate_options(&mut self, room: Room, ids: &mut OptionIds) -> Vec<PlanOption> {
        let owned: BTreeSet<ItemId> = self
            .retrieve(&Pattern::has(self.id))
            .matches
            .iter()
            .filter_map(|p| match p {
                Proposition::Has { item, .. } => Some(*item),
                _ => None,
            })
            .collect();
        let used: BTreeSet<ItemId> = self
            .retrieve(&Pattern::not_has(self.id))
            .matches
            .iter()
            .filter_map(|p| match p {
                Proposition::NotHas { item, .. } => Some(*item),
                _ => None,
            })
            .collect();
        owned
            .into_iter()
            .filter(|i| !used.contains(i) && !(room == self.room && self.rejected.contains(i)))
            .map(|item| PlanOption { id: ids.fresh(), act: PutAct { actor: self.id, item, room } })
            .collect()
    }

    /// Points of the nearest salient score belief for `item`.
    pub fn recall_score(&mut self, item: ItemId) -> Option<u32> {
        self.retrieve(&Pattern::score(item)).matches.first().and_then(|p| match p {
            Proposition::Score { points, .. } => Some(*points),
            _ => None,
        })
    }

    /// Utility of an option; zero when no score belief is salient.
    pub fn utility(&mut self, opt: &PlanOption) -> u32 {
        self.recall_score(opt.act.item).unwrap_or(0)
    }

    /// Highest-utility option, ties going to the smallest item id.
    pub fn deliberate(&mut self, options: &[PlanOption]) -> Option<ScoredOption> {
        let mut best: Option<ScoredOption> = None;
        for opt in options {
            let scored = ScoredOption { option: *opt, warrant: self.recall_score(opt.act.item) };
            best = match best {
                None => Some(scored),
                Some(b) => {
                    let better = scored.utility() > b.utility()
                        || (scored.utility() == b.utility() && scored.option.act.item < b.option.act.item);
                    Some(if better { scored } else { b })
                }
            };
        }
        best
    }

    /// Best option for `room`: means-end reasoning followed by deliberation.
    /// The chosen option is remembered as an intention to propose it.
    pub fn best_option(&mut self, room: Room, ids: &mut OptionIds) -> Option<ScoredOption> {
        let options = self.generate_options(room, ids);
        let best = self.deliberate(&options);
        if let Some(b) = best {
            self.store(Proposition::Put(b.option.act));
        }
        best
    }

    /// Accept unless the agent's own best option is strictly better.
    ///
    /// `stated_warrant` is a score the proposer said alongside the proposal;
    /// when present no memory search is needed for the proposal's value.
    pub fn evaluate_proposal(
        &mut self,
        proposal: &PlanOption,
        stated_warrant: Option<u32>,
        ids: &mut OptionIds,
    ) -> Judgement {
        let proposed = match stated_warrant {
            Some(points) => points,
            None => self.utility(proposal),
        };
        let own_best = self.best_option(proposal.act.room, ids);
        match own_best {
            Some(counter) if counter.utility() > proposed => Judgement::Reject { counter },
            _ => Judgement::Accept { own_best },
        }
    }

    /// Infers and stores that the actor of an agreed step no longer has the
    /// item.
    pub fn act_effect_inference(&mut self, step: &PutAct) -> Proposition {
        let effect = Proposition::NotHas { agent: step.actor, item: step.item };
        self.store(effect);
        self.ledger.inferences += 1;
        effect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn agent_with(beliefs: &[Proposition], radius: u32) -> AgentState {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut mem = MemoryStore::new(16);
        for b in beliefs {
            mem.store(*b, &mut rng);
        }
        AgentState::new(AgentId::A, StrategyKind::AllImplicit, radius, mem, rng)
    }

    fn has(item: u16) -> Proposition {
        Proposition::Has { agent: AgentId::A, item: ItemId(item) }
    }

    fn score(item: u16, points: u32) -> Proposition {
        Proposition::Score { item: ItemId(item), points }
    }

    fn opt(actor: AgentId, item: u16) -> PlanOption {
        PlanOption { id: OptionId(0), act: PutAct { actor, item: ItemId(item), room: Room::One } }
    }

    #[test]
    fn options_from_salient_ownership() {
        let mut a = agent_with(&[has(0), has(1), score(0, 56), score(1, 30)], 16);
        let opts = a.generate_options(Room::One, &mut OptionIds::default());
        assert_eq!(opts.len(), 2);
        let ids: BTreeSet<_> = opts.iter().map(|o| o.id).collect();
        assert_eq!(ids.len(), 2);
        assert_eq!(a.ledger().searches, 2);
        assert_eq!(a.ledger().retrievals, 2 * 4096);
    }

    #[test]
    fn used_items_are_excluded() {
        let mut a = agent_with(&[has(0), has(1)], 16);
        a.act_effect_inference(&PutAct { actor: AgentId::A, item: ItemId(0), room: Room::One });
        let opts = a.generate_options(Room::Two, &mut OptionIds::default());
        assert_eq!(opts.iter().map(|o| o.act.item).collect::<Vec<_>>(), vec![ItemId(1)]);
        assert_eq!(a.ledger().inferences, 1);
    }

    #[test]
    fn rejected_items_excluded_only_in_their_room() {
        let mut a = agent_with(&[has(0), has(1)], 16);
        a.note_rejected(ItemId(1));
        assert_eq!(a.generate_options(Room::One, &mut OptionIds::default()).len(), 1);
        a.open_room(Room::Two);
        assert_eq!(a.generate_options(Room::Two, &mut OptionIds::default()).len(), 2);
    }

    #[test]
    fn utility_reads_value_not_count() {
        let mut a = agent_with(&[score(0, 56), score(0, 56), score(1, 30)], 16);
        assert_eq!(a.utility(&opt(AgentId::A, 0)), 56);
        assert_eq!(a.utility(&opt(AgentId::A, 1)), 30);
        assert_eq!(a.utility(&opt(AgentId::A, 2)), 0);
    }

    #[test]
    fn deliberation_argmax_and_tie_break() {
        let mut a = agent_with(&[score(0, 30), score(1, 56), score(2, 56)], 16);
        let opts = [opt(AgentId::A, 0), opt(AgentId::A, 2), opt(AgentId::A, 1)];
        let best = a.deliberate(&opts).unwrap();
        assert_eq!(best.option.act.item, ItemId(1));
        assert_eq!(best.utility(), 56);
        assert!(a.deliberate(&[]).is_none());
    }

    #[test]
    fn evaluation_rule() {
        // Own best is worth 40.
        let mut a = agent_with(&[has(0), score(0, 40), score(5, 56), score(6, 30)], 16);
        let mut ids = OptionIds::default();
        let accept = a.evaluate_proposal(&opt(AgentId::B, 5), None, &mut ids);
        assert!(matches!(accept, Judgement::Accept { own_best: Some(b) } if b.utility() == 40));
        match a.evaluate_proposal(&opt(AgentId::B, 6), None, &mut ids) {
            Judgement::Reject { counter } => assert_eq!(counter.option.act.item, ItemId(0)),
            other => panic!("expected reject, got {other:?}"),
        }
        // Unknown proposal value counts as zero.
        assert!(matches!(a.evaluate_proposal(&opt(AgentId::B, 9), None, &mut ids), Judgement::Reject { .. }));
        // A stated warrant replaces the memory search.
        let before = a.ledger().searches;
        assert!(matches!(a.evaluate_proposal(&opt(AgentId::B, 9), Some(45), &mut ids), Judgement::Accept { .. }));
        assert_eq!(a.ledger().searches - before, 3);
    }

    #[test]
    fn equal_value_is_accepted() {
        let mut a = agent_with(&[has(0), score(0, 40), score(5, 40)], 16);
        let j = a.evaluate_proposal(&opt(AgentId::B, 5), None, &mut OptionIds::default());
        assert!(matches!(j, Judgement::Accept { .. }));
    }
}
