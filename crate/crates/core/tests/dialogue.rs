use std::collections::BTreeSet;

use designworld::awm::Proposition;
use designworld::discourse::{parse_act, ActKind, Content};
use designworld::experiment::{outcome_of, simulate_dialogue, CostModel, StrategyPair};
use designworld::task::validate_plan;
use designworld::StrategyKind::{AllImplicit, CloseConsequence, ExplicitWarrant};
use designworld::{DialogueRecord, MemoryStore, TaskVariant, WorldConfig, WorldState};
use proptest::prelude::*;

const AI: StrategyPair = StrategyPair(AllImplicit, AllImplicit);
const CLC: StrategyPair = StrategyPair(CloseConsequence, AllImplicit);
const EW: StrategyPair = StrategyPair(ExplicitWarrant, ExplicitWarrant);
const PAIRS: [StrategyPair; 5] =
    [AI, CLC, EW, StrategyPair(AllImplicit, CloseConsequence), StrategyPair(CloseConsequence, CloseConsequence)];

fn run(pair: StrategyPair, radius: u32, seed: u64, index: usize) -> (WorldState, DialogueRecord) {
    simulate_dialogue(&WorldConfig::default(), pair, radius, seed, index).unwrap()
}

fn count(record: &DialogueRecord, kind: ActKind) -> usize {
    record.transcript.iter().filter(|a| a.kind == kind).count()
}

#[test]
fn full_salience_gives_optimal_complete_plans() {
    for pair in PAIRS {
        for i in 0..100 {
            let (world, record) = run(pair, 16, 42, i);
            let outcome = outcome_of(i, &world, &record);
            assert_eq!(record.agreed_steps.len(), 8, "{pair} dialogue {i}");
            assert!(validate_plan(&record.plan(), &world).iter().all(|&v| v));
            let free = outcome.score(TaskVariant::Standard, &CostModel::FREE);
            assert_eq!(free.normalized, 1.0, "{pair} dialogue {i}");
        }
    }
}

#[test]
fn dialogues_are_reproducible() {
    for pair in PAIRS {
        for radius in [1, 4, 9, 16] {
            assert_eq!(run(pair, radius, 9, 3), run(pair, radius, 9, 3));
        }
    }
}

#[test]
fn strategy_surface_forms() {
    for i in 0..30 {
        let (_, ai) = run(AI, 16, 1, i);
        assert_eq!(count(&ai, ActKind::Say), 0);
        assert_eq!(count(&ai, ActKind::Close), 0);

        let (_, ew) = run(EW, 16, 1, i);
        assert_eq!(count(&ew, ActKind::Close), 0);
        assert!(ew.totals().messages > ai.totals().messages);
        for (k, act) in ew.transcript.iter().enumerate() {
            if matches!(act.kind, ActKind::Propose | ActKind::Reject) {
                let item = act.option().unwrap().act.item;
                let prev = k.checked_sub(1).map(|j| ew.transcript[j]).expect("warrant precedes proposal");
                assert_eq!(prev.kind, ActKind::Say);
                assert_eq!(prev.speaker, act.speaker);
                assert!(
                    matches!(prev.content, Content::Belief { prop: Proposition::Score { item: w, .. }, .. } if w == item)
                );
            }
        }
    }
}

#[test]
fn close_consequence_closes_every_completed_segment() {
    for radius in [2, 5, 16] {
        for i in 0..40 {
            let (_, record) = run(CLC, radius, 2, i);
            let agreed_rooms: BTreeSet<_> = record.agreed_steps.iter().map(|s| s.option.act.room).collect();
            let closes: Vec<_> = record.transcript.iter().filter(|a| a.kind == ActKind::Close).collect();
            let closed_rooms: BTreeSet<_> = closes.iter().map(|a| a.option().unwrap().act.room).collect();
            assert_eq!(agreed_rooms, closed_rooms);
            assert_eq!(closes.len(), record.agreed_steps.len());
            // Each close is followed by the act-effect it licenses.
            for (k, act) in record.transcript.iter().enumerate() {
                if act.kind == ActKind::Close {
                    let step = act.option().unwrap().act;
                    let next = record.transcript[k + 1];
                    assert_eq!(next.kind, ActKind::Say);
                    let effect = Proposition::NotHas { agent: step.actor, item: step.item };
                    assert!(matches!(next.content, Content::Belief { prop, .. } if prop == effect));
                }
            }
        }
    }
}

#[test]
fn agreed_steps_were_proposed_by_their_proposer() {
    for pair in PAIRS {
        for radius in [1, 3, 6, 16] {
            for i in 0..20 {
                let (_, record) = run(pair, radius, 4, i);
                for step in &record.agreed_steps {
                    assert!(record.transcript.iter().any(|a| {
                        matches!(a.kind, ActKind::Propose | ActKind::Reject)
                            && a.speaker == step.proposer
                            && a.option() == Some(&step.option)
                    }));
                    assert_eq!(step.acceptor, step.proposer.other());
                }
            }
        }
    }
}

#[test]
fn ledgers_account_for_every_act_and_probe() {
    for pair in PAIRS {
        for radius in [1, 2, 5, 11, 16] {
            for i in 0..10 {
                let (_, record) = run(pair, radius, 5, i);
                let totals = record.totals();
                assert_eq!(totals.messages as usize, record.transcript.len());
                assert_eq!(totals.inferences as usize, 2 * record.agreed_steps.len());
                let sphere = MemoryStore::new(16).sphere_size(radius);
                for ledger in record.ledgers {
                    assert_eq!(ledger.retrievals, ledger.searches * sphere);
                }
            }
        }
    }
}

#[test]
fn transcripts_round_trip() {
    for pair in PAIRS {
        for radius in [2, 16] {
            let (world, record) = run(pair, radius, 6, 0);
            for act in &record.transcript {
                let line = act.render(&world);
                assert_eq!(parse_act(&line, &world).unwrap(), *act, "{line}");
            }
        }
    }
}

#[test]
fn limited_attention_can_reuse_an_item() {
    // Somewhere among a few hundred low-radius dialogues an agent forgets
    // it already used an item and proposes it again.
    let found = (0..500).find_map(|i| {
        let (world, record) = run(AI, 1, 8, i);
        let validity = validate_plan(&record.plan(), &world);
        validity.iter().position(|&v| !v).map(|k| (record, k))
    });
    let (record, k) = found.expect("an invalid step at radius 1");
    let step = record.agreed_steps[k].option.act;
    assert!(record.agreed_steps[..k].iter().any(|s| s.option.act.item == step.item));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dialogue_invariants(seed in any::<u64>(), radius in 1u32..=16, p in 0usize..PAIRS.len()) {
        let (world, record) = run(PAIRS[p], radius, seed, 0);
        prop_assert!(record.agreed_steps.len() <= 8);
        for room in designworld::Room::ALL {
            prop_assert!(record.agreed_steps.iter().filter(|s| s.option.act.room == room).count() <= 4);
        }
        // Room-1 steps precede room-2 steps.
        let rooms: Vec<_> = record.agreed_steps.iter().map(|s| s.option.act.room).collect();
        prop_assert!(rooms.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(validate_plan(&record.plan(), &world).len(), record.agreed_steps.len());
    }
}
