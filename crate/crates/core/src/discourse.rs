//! Communicative acts, per-strategy discourse acts, and the dialogue engine.
//!
//! A dialogue furnishes room-1 then room-2. On each turn the speaker answers
//! the open proposal, if any: it rejects with a counter-proposal when its own
//! best option is worth strictly more, and otherwise accepts. Acceptance is
//! implicit when the acceptor goes on to make a proposal of its own and
//! explicit (an `accept` act) when it has nothing to propose.

use std::fmt;
use std::str::FromStr;

use crate::agent::{AgentState, CostLedger, Judgement, OptionId, OptionIds, PlanOption, ScoredOption};
use crate::awm::Proposition;
use crate::symbols::{AgentId, ItemId, PutAct, Room};
use crate::task::{WorldState, STEPS_PER_ROOM};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    AllImplicit,
    CloseConsequence,
    ExplicitWarrant,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] =
        [StrategyKind::AllImplicit, StrategyKind::CloseConsequence, StrategyKind::ExplicitWarrant];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::AllImplicit => "all-implicit",
            StrategyKind::CloseConsequence => "close-consequence",
            StrategyKind::ExplicitWarrant => "explicit-warrant",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnknownName { kind: "strategy", name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActKind {
    Propose,
    Accept,
    Reject,
    Say,
    Close,
}

impl ActKind {
    fn keyword(self) -> &'static str {
        match self {
            ActKind::Propose => "propose",
            ActKind::Accept => "accept",
            ActKind::Reject => "reject",
            ActKind::Say => "say",
            ActKind::Close => "close",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Content {
    Option(PlanOption),
    Belief { id: u32, prop: Proposition },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CommunicativeAct {
    pub kind: ActKind,
    pub speaker: AgentId,
    pub addressee: AgentId,
    pub content: Content,
}

impl CommunicativeAct {
    /// The proposition both parties store when the act is uttered.
    pub fn proposition(&self) -> Proposition {
        match (self.kind, self.content) {
            (_, Content::Belief { prop, .. }) => prop,
            (ActKind::Accept, Content::Option(o)) => Proposition::Agreed(o.act),
            (ActKind::Close, Content::Option(o)) => Proposition::Close(o.act),
            (_, Content::Option(o)) => Proposition::Put(o.act),
        }
    }

    pub fn option(&self) -> Option<&PlanOption> {
        match &self.content {
            Content::Option(o) => Some(o),
            Content::Belief { .. } => None,
        }
    }

    /// S-expression form, one act per line.
    pub fn render(&self, world: &WorldState) -> String {
        let head = format!("({} {} {}", self.kind.keyword(), self.speaker, self.addressee);
        match (self.kind, self.content) {
            (ActKind::Close, Content::Option(o)) => {
                format!("{head} intended-{} {})", o.id.0, render_put("put-act", &o.act, world))
            }
            (_, Content::Option(o)) => format!("{head} {} {})", o.id, render_put("put-act", &o.act, world)),
            (_, Content::Belief { id, prop }) => {
                format!("{head} bel-{id} {})", render_proposition(&prop, world))
            }
        }
    }
}

fn render_item(item: ItemId, world: &WorldState) -> String {
    match world.item(item) {
        Some(i) => format!("{} {}-{}", i.color, i.kind, item.0),
        None => format!("unknown item-{}", item.0),
    }
}

fn render_put(head: &str, act: &PutAct, world: &WorldState) -> String {
    format!("({head} {} {} {})", act.actor, render_item(act.item, world), act.room)
}

fn render_proposition(p: &Proposition, world: &WorldState) -> String {
    match p {
        Proposition::Has { agent, item } => format!("(has {agent} {})", render_item(*item, world)),
        Proposition::NotHas { agent, item } => {
            format!("(not-has {agent} {})", render_item(*item, world))
        }
        Proposition::Score { item, points } => {
            format!("(score {} {points})", render_item(*item, world))
        }
        Proposition::Put(a) => render_put("put-act", a, world),
        Proposition::Close(a) => render_put("intended", a, world),
        Proposition::Agreed(a) => render_put("agreed", a, world),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexp(line: &str) -> Result<Sexp, String> {
    let spaced = line.replace('(', " ( ").replace(')', " ) ");
    let mut tokens = spaced.split_whitespace();
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let mut done: Option<Sexp> = None;
    for tok in tokens.by_ref() {
        if done.is_some() {
            return Err(format!("trailing input after expression: {tok}"));
        }
        match tok {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = Sexp::List(stack.pop().ok_or("unbalanced ')'")?);
                match stack.last_mut() {
                    Some(parent) => parent.push(list),
                    None => done = Some(list),
                }
            }
            atom => {
                stack.last_mut().ok_or_else(|| format!("atom outside list: {atom}"))?.push(Sexp::Atom(atom.to_string()))
            }
        }
    }
    done.ok_or_else(|| "unterminated expression".to_string())
}

fn atom(s: &Sexp) -> Result<&str, String> {
    match s {
        Sexp::Atom(a) => Ok(a),
        Sexp::List(_) => Err("expected atom, found list".into()),
    }
}

fn numbered(tok: &str, prefix: &str) -> Result<u32, String> {
    tok.strip_prefix(prefix).and_then(|n| n.parse().ok()).ok_or_else(|| format!("expected {prefix}N, found {tok}"))
}

fn agent_tok(tok: &str) -> Result<AgentId, String> {
    AgentId::parse(tok).ok_or_else(|| format!("unknown agent {tok}"))
}

fn item_toks(color: &str, kind_id: &str, world: &WorldState) -> Result<ItemId, String> {
    let (kind, id) = kind_id.rsplit_once('-').ok_or_else(|| format!("bad item token {kind_id}"))?;
    let id = ItemId(id.parse().map_err(|_| format!("bad item id in {kind_id}"))?);
    let item = world.item(id).ok_or_else(|| format!("no such item {id}"))?;
    if item.color != color || item.kind != kind {
        return Err(format!("item {id} is {} {}, not {color} {kind}", item.color, item.kind));
    }
    Ok(id)
}

fn parse_put(s: &Sexp, world: &WorldState) -> Result<(String, PutAct), String> {
    let Sexp::List(xs) = s else { return Err("expected put-act list".into()) };
    let [head, actor, color, kind, room] = xs.as_slice() else {
        return Err(format!("put-act needs 4 fields, found {}", xs.len().saturating_sub(1)));
    };
    let act = PutAct {
        actor: agent_tok(atom(actor)?)?,
        item: item_toks(atom(color)?, atom(kind)?, world)?,
        room: Room::parse(atom(room)?).ok_or("unknown room")?,
    };
    Ok((atom(head)?.to_string(), act))
}

fn parse_proposition(s: &Sexp, world: &WorldState) -> Result<Proposition, String> {
    let Sexp::List(xs) = s else { return Err("expected proposition list".into()) };
    let head = atom(xs.first().ok_or("empty proposition")?)?;
    let field = |i: usize| xs.get(i).ok_or_else(|| format!("{head}: missing field {i}")).and_then(atom);
    match head {
        "has" | "not-has" => {
            if xs.len() != 4 {
                return Err(format!("{head} takes 3 fields"));
            }
            let agent = agent_tok(field(1)?)?;
            let item = item_toks(field(2)?, field(3)?, world)?;
            Ok(if head == "has" { Proposition::Has { agent, item } } else { Proposition::NotHas { agent, item } })
        }
        "score" => {
            if xs.len() != 4 {
                return Err("score takes 3 fields".into());
            }
            let item = item_toks(field(1)?, field(2)?, world)?;
            let points = field(3)?.parse().map_err(|_| "bad score points".to_string())?;
            Ok(Proposition::Score { item, points })
        }
        "put-act" | "intended" | "agreed" => {
            let (_, act) = parse_put(s, world)?;
            Ok(match head {
                "put-act" => Proposition::Put(act),
                "intended" => Proposition::Close(act),
                _ => Proposition::Agreed(act),
            })
        }
        other => Err(format!("unknown predicate {other}")),
    }
}

/// Parses one transcript line back into an act; items are checked against
/// `world`.
pub fn parse_act(line: &str, world: &WorldState) -> Result<CommunicativeAct, Error> {
    parse_act_inner(line, world).map_err(|msg| Error::Transcript(format!("{msg}: {line}")))
}

fn parse_act_inner(line: &str, world: &WorldState) -> Result<CommunicativeAct, String> {
    let Sexp::List(xs) = parse_sexp(line)? else { unreachable!() };
    let [kind, speaker, addressee, label, body] = xs.as_slice() else {
        return Err(format!("act needs 4 fields, found {}", xs.len().saturating_sub(1)));
    };
    let kind = match atom(kind)? {
        "propose" => ActKind::Propose,
        "accept" => ActKind::Accept,
        "reject" => ActKind::Reject,
        "say" => ActKind::Say,
        "close" => ActKind::Close,
        other => return Err(format!("unknown act {other}")),
    };
    let label = atom(label)?;
    let content = match kind {
        ActKind::Say => Content::Belief { id: numbered(label, "bel-")?, prop: parse_proposition(body, world)? },
        _ => {
            let prefix = if kind == ActKind::Close { "intended-" } else { "option-" };
            let (head, act) = parse_put(body, world)?;
            if head != "put-act" {
                return Err(format!("expected put-act, found {head}"));
            }
            Content::Option(PlanOption { id: OptionId(numbered(label, prefix)?), act })
        }
    };
    Ok(CommunicativeAct { kind, speaker: agent_tok(atom(speaker)?)?, addressee: agent_tok(atom(addressee)?)?, content })
}

/// Dialogue-wide source of belief ids for `say` acts.
#[derive(Debug, Default)]
pub struct BeliefIds(u32);

impl BeliefIds {
    pub fn fresh(&mut self) -> u32 {
        self.0 += 1;
        self.0
    }
}

fn proposal_acts(
    kind: ActKind,
    strategy: StrategyKind,
    opt: &ScoredOption,
    speaker: AgentId,
    beliefs: &mut BeliefIds,
) -> Vec<CommunicativeAct> {
    let addressee = speaker.other();
    let mut acts = Vec::with_capacity(2);
    if let (StrategyKind::ExplicitWarrant, Some(points)) = (strategy, opt.warrant) {
        acts.push(CommunicativeAct {
            kind: ActKind::Say,
            speaker,
            addressee,
            content: Content::Belief {
                id: beliefs.fresh(),
                prop: Proposition::Score { item: opt.option.act.item, points },
            },
        });
    }
    acts.push(CommunicativeAct { kind, speaker, addressee, content: Content::Option(opt.option) });
    acts
}

/// The proposal discourse act. Explicit-Warrant prefixes the score belief
/// when the speaker could recall one.
pub fn compose_proposal(
    strategy: StrategyKind,
    opt: &ScoredOption,
    speaker: AgentId,
    beliefs: &mut BeliefIds,
) -> Vec<CommunicativeAct> {
    proposal_acts(ActKind::Propose, strategy, opt, speaker, beliefs)
}

/// A rejection carrying a counter-proposal, warranted like a proposal.
pub fn compose_rejection(
    strategy: StrategyKind,
    counter: &ScoredOption,
    speaker: AgentId,
    beliefs: &mut BeliefIds,
) -> Vec<CommunicativeAct> {
    proposal_acts(ActKind::Reject, strategy, counter, speaker, beliefs)
}

/// Closing of the segment for an agreed step. Only Close-Consequence says
/// anything: it closes the step and states its act-effect.
pub fn compose_closing(
    strategy: StrategyKind,
    step: &PlanOption,
    speaker: AgentId,
    beliefs: &mut BeliefIds,
) -> Vec<CommunicativeAct> {
    if strategy != StrategyKind::CloseConsequence {
        return Vec::new();
    }
    let addressee = speaker.other();
    vec![
        CommunicativeAct { kind: ActKind::Close, speaker, addressee, content: Content::Option(*step) },
        CommunicativeAct {
            kind: ActKind::Say,
            speaker,
            addressee,
            content: Content::Belief {
                id: beliefs.fresh(),
                prop: Proposition::NotHas { agent: step.act.actor, item: step.act.item },
            },
        },
    ]
}

/// What hearing an act did to the hearer's discourse state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveEffect {
    Stored(Proposition),
    ProposalOpened { proposal: PlanOption, implicitly_accepted: Option<PlanOption> },
    CounterProposed { counter: PlanOption, rejected: Option<PlanOption> },
    OwnProposalAgreed(PlanOption),
}

/// Hearer-side bookkeeping kept between turns.
#[derive(Debug, Clone, Default)]
pub struct DiscourseState {
    own_open: Option<PlanOption>,
    incoming: Option<PlanOption>,
    heard_warrant: Option<(ItemId, u32)>,
}

impl DiscourseState {
    pub fn own_open(&self) -> Option<&PlanOption> {
        self.own_open.as_ref()
    }

    pub fn incoming(&self) -> Option<&PlanOption> {
        self.incoming.as_ref()
    }

    /// Score stated just before the incoming proposal, if it concerns `item`.
    pub fn warrant_for(&self, item: ItemId) -> Option<u32> {
        self.heard_warrant.filter(|(i, _)| *i == item).map(|(_, p)| p)
    }
}

/// Hear an act: store its content and update discourse bookkeeping. The
/// sender pays for messages, so the hearer's ledger is untouched.
pub fn receive(
    agent: &mut AgentState,
    state: &mut DiscourseState,
    act: &CommunicativeAct,
) -> Result<ReceiveEffect, Error> {
    if act.addressee != agent.id {
        return Err(Error::Protocol(format!("{} received an act addressed to {}", agent.id, act.addressee)));
    }
    let prop = act.proposition();
    agent.store(prop);
    let effect = match (act.kind, act.content) {
        (ActKind::Say, Content::Belief { prop: Proposition::Score { item, points }, .. }) => {
            state.heard_warrant = Some((item, points));
            ReceiveEffect::Stored(prop)
        }
        (ActKind::Propose, Content::Option(o)) => {
            let accepted = state.own_open.take();
            state.incoming = Some(o);
            ReceiveEffect::ProposalOpened { proposal: o, implicitly_accepted: accepted }
        }
        (ActKind::Reject, Content::Option(o)) => {
            let rejected = state.own_open.take();
            state.incoming = Some(o);
            ReceiveEffect::CounterProposed { counter: o, rejected }
        }
        (ActKind::Accept | ActKind::Close, Content::Option(o)) => {
            if state.own_open.is_some_and(|own| own.id == o.id) {
                state.own_open = None;
            }
            ReceiveEffect::OwnProposalAgreed(o)
        }
        _ => ReceiveEffect::Stored(prop),
    };
    // A stated warrant only travels with the proposal that follows it.
    let carries_warrant = match (act.kind, act.content) {
        (ActKind::Say, _) => true,
        (ActKind::Propose | ActKind::Reject, Content::Option(o)) => state.warrant_for(o.act.item).is_some(),
        _ => false,
    };
    if !carries_warrant {
        state.heard_warrant = None;
    }
    Ok(effect)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreedStep {
    pub option: PlanOption,
    pub proposer: AgentId,
    pub acceptor: AgentId,
    /// Whether each agent (indexed by agent id) could recall the step's
    /// score belief at the moment of acceptance.
    pub warrant_salient: [bool; 2],
}

impl AgreedStep {
    pub fn warrant_matched(&self) -> bool {
        self.warrant_salient.iter().all(|&s| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueRecord {
    pub agreed_steps: Vec<AgreedStep>,
    pub transcript: Vec<CommunicativeAct>,
    pub ledgers: [CostLedger; 2],
}

impl DialogueRecord {
    pub fn plan(&self) -> Vec<PutAct> {
        self.agreed_steps.iter().map(|s| s.option.act).collect()
    }

    pub fn warrant_flags(&self) -> Vec<bool> {
        self.agreed_steps.iter().map(AgreedStep::warrant_matched).collect()
    }

    pub fn totals(&self) -> CostLedger {
        CostLedger::total(&self.ledgers)
    }

    pub fn render_transcript(&self, world: &WorldState) -> String {
        self.transcript.iter().map(|a| a.render(world) + "\n").collect()
    }
}

/// Upper bound on turns; a dialogue always ends far sooner.
const MAX_TURNS: usize = 10_000;

struct Engine<'a> {
    agents: &'a mut [AgentState; 2],
    discourse: [DiscourseState; 2],
    options: OptionIds,
    beliefs: BeliefIds,
    transcript: Vec<CommunicativeAct>,
    steps: Vec<AgreedStep>,
}

impl Engine<'_> {
    /// Utter `acts`: the speaker pays and remembers what it said, the hearer
    /// receives it.
    fn emit(&mut self, acts: Vec<CommunicativeAct>) {
        for act in acts {
            let speaker = act.speaker.index();
            let hearer = act.addressee.index();
            self.agents[speaker].charge_message();
            self.agents[speaker].store(act.proposition());
            if matches!(act.kind, ActKind::Propose | ActKind::Reject) {
                if let Content::Option(o) = act.content {
                    self.discourse[speaker].own_open = Some(o);
                }
            }
            receive(&mut self.agents[hearer], &mut self.discourse[hearer], &act)
                .expect("engine only emits acts to the other agent");
            self.transcript.push(act);
        }
    }

    fn agree(&mut self, option: PlanOption, proposer: AgentId, acceptor: AgentId) {
        let item = option.act.item;
        let warrant_salient = [self.agents[0].warrant_salient(item), self.agents[1].warrant_salient(item)];
        self.steps.push(AgreedStep { option, proposer, acceptor, warrant_salient });
        for agent in self.agents.iter_mut() {
            agent.act_effect_inference(&option.act);
            agent.clear_rejected();
        }
        self.discourse[acceptor.index()].incoming = None;
    }

    /// The Close-Consequence agent that closes a segment: `first` when it
    /// uses the strategy, otherwise its partner when that one does.
    fn closer(&self, first: AgentId) -> Option<AgentId> {
        [first, first.other()].into_iter().find(|id| self.agents[id.index()].strategy == StrategyKind::CloseConsequence)
    }

    /// Closes `room`, restating every step agreed in it.
    fn close_segment(&mut self, closer: AgentId, room: Room) {
        let strategy = self.agents[closer.index()].strategy;
        let steps: Vec<PlanOption> = self.steps.iter().map(|s| s.option).filter(|o| o.act.room == room).collect();
        for step in steps {
            let acts = compose_closing(strategy, &step, closer, &mut self.beliefs);
            self.emit(acts);
        }
    }

    fn accept(&mut self, speaker: AgentId, proposal: PlanOption) {
        self.emit(vec![CommunicativeAct {
            kind: ActKind::Accept,
            speaker,
            addressee: speaker.other(),
            content: Content::Option(proposal),
        }]);
    }

    fn propose(&mut self, speaker: AgentId, opt: ScoredOption) {
        let strategy = self.agents[speaker.index()].strategy;
        let acts = compose_proposal(strategy, &opt, speaker, &mut self.beliefs);
        self.emit(acts);
    }

    fn open_room(&mut self, room: Option<Room>) {
        if let Some(r) = room {
            for agent in self.agents.iter_mut() {
                agent.open_room(r);
            }
        }
    }

    fn run(&mut self) {
        let mut room = Some(Room::One);
        self.open_room(room);
        let mut steps_in_room = 0;
        let mut turn = AgentId::A;
        // Consecutive turns on which the speaker had nothing to propose.
        let mut idle = 0;
        // A completed segment its closer has not yet had the floor to close.
        let mut pending_close: Option<(AgentId, Room)> = None;

        for _ in 0..MAX_TURNS {
            let Some(current) = room else { break };
            let x = turn;
            let y = x.other();
            if let Some((closer, done)) = pending_close.filter(|(c, _)| *c == x) {
                pending_close = None;
                self.close_segment(closer, done);
            }

            let Some(proposal) = self.discourse[x.index()].incoming else {
                let best = self.agents[x.index()].best_option(current, &mut self.options);
                match best {
                    Some(opt) => {
                        self.propose(x, opt);
                        idle = 0;
                    }
                    None => {
                        idle += 1;
                        if idle >= 2 {
                            if let Some(c) = self.closer(x) {
                                self.close_segment(c, current);
                            }
                            room = current.next();
                            self.open_room(room);
                            steps_in_room = 0;
                            idle = 0;
                        }
                    }
                }
                turn = y;
                continue;
            };

            let warrant = self.discourse[x.index()].warrant_for(proposal.act.item);
            let judgement = self.agents[x.index()].evaluate_proposal(&proposal, warrant, &mut self.options);
            match judgement {
                Judgement::Reject { counter } => {
                    self.agents[y.index()].note_rejected(proposal.act.item);
                    self.discourse[x.index()].incoming = None;
                    let strategy = self.agents[x.index()].strategy;
                    let acts = compose_rejection(strategy, &counter, x, &mut self.beliefs);
                    self.emit(acts);
                    idle = 0;
                }
                Judgement::Accept { own_best } => {
                    // Agreement lifts the acceptor's rejections, which may
                    // bring back a better option than the one it evaluated.
                    let reconsider = self.agents[x.index()].has_rejected();
                    self.agree(proposal, y, x);
                    steps_in_room += 1;
                    // Whether the proposer has been told of the acceptance
                    // other than by a new proposal.
                    let mut explicit = false;
                    let mut next = own_best;
                    if reconsider && steps_in_room < STEPS_PER_ROOM {
                        next = self.agents[x.index()].best_option(current, &mut self.options);
                    }
                    if steps_in_room == STEPS_PER_ROOM {
                        match self.closer(y) {
                            Some(c) if c == x => {
                                self.close_segment(x, current);
                                explicit = true;
                            }
                            Some(c) => pending_close = Some((c, current)),
                            None => {}
                        }
                        room = current.next();
                        self.open_room(room);
                        steps_in_room = 0;
                        next = room.and_then(|r| self.agents[x.index()].best_option(r, &mut self.options));
                    }
                    match next {
                        Some(opt) => {
                            self.propose(x, opt);
                            idle = 0;
                        }
                        None => {
                            if !explicit {
                                self.accept(x, proposal);
                            }
                            idle = 1;
                        }
                    }
                }
            }
            turn = y;
        }
        debug_assert!(room.is_none(), "dialogue exceeded {MAX_TURNS} turns");
        if let Some((closer, done)) = pending_close {
            self.close_segment(closer, done);
        }
    }
}

/// Runs one complete negotiation between `agents[0]` (agent-a, who opens)
/// and `agents[1]`.
pub fn run_dialogue(agents: &mut [AgentState; 2]) -> DialogueRecord {
    assert_eq!(agents[0].id, AgentId::A, "first agent must be agent-a");
    assert_eq!(agents[1].id, AgentId::B, "second agent must be agent-b");
    let mut engine = Engine {
        agents,
        discourse: Default::default(),
        options: OptionIds::default(),
        beliefs: BeliefIds::default(),
        transcript: Vec::new(),
        steps: Vec::new(),
    };
    engine.run();
    let ledgers = [engine.agents[0].ledger(), engine.agents[1].ledger()];
    DialogueRecord { agreed_steps: engine.steps, transcript: engine.transcript, ledgers }
}
