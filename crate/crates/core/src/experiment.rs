//! Batches of dialogues, performance scoring, and the two-sample
//! Kolmogorov-Smirnov comparison of strategies across memory radii.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::{AgentState, CostLedger};
use crate::discourse::{run_dialogue, DialogueRecord, StrategyKind};
use crate::symbols::AgentId;
use crate::task::{self, StepScore, TaskVariant, WorldConfig, WorldState};
use crate::Error;

/// Unit prices of messages, inferences and probed memory loci.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub commcost: f64,
    pub infcost: f64,
    pub retcost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { commcost: 1.0, infcost: 1.0, retcost: 0.01 }
    }
}

impl CostModel {
    pub const FREE: CostModel = CostModel { commcost: 0.0, infcost: 0.0, retcost: 0.0 };
}

/// Raw score less the priced processing effort of both agents.
pub fn performance(raw: i64, totals: &CostLedger, costs: &CostModel) -> f64 {
    raw as f64
        - costs.commcost * totals.messages as f64
        - costs.infcost * totals.inferences as f64
        - costs.retcost * totals.retrievals as f64
}

/// Strategies of agent-a and agent-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyPair(pub StrategyKind, pub StrategyKind);

impl StrategyPair {
    pub fn label(&self) -> String {
        format!("{}+{}", self.0, self.1)
    }
}

impl FromStr for StrategyPair {
    type Err = Error;

    /// Parses a label such as `close-consequence+all-implicit`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let (a, b) =
            s.split_once('+').ok_or_else(|| Error::UnknownName { kind: "strategy pair", name: s.to_string() })?;
        Ok(StrategyPair(a.parse()?, b.parse()?))
    }
}

impl fmt::Display for StrategyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub pair: StrategyPair,
    pub variant: TaskVariant,
    pub radius: u32,
    pub costs: CostModel,
    pub n_dialogues: usize,
    pub seed: u64,
    pub world: WorldConfig,
}

impl ExperimentCell {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_dialogues < 2 {
            return Err(Error::Config(format!("n_dialogues must be >= 2, got {}", self.n_dialogues)));
        }
        if !(1..=16).contains(&self.radius) {
            return Err(Error::Config(format!("radius must be in 1..=16, got {}", self.radius)));
        }
        self.world.validate()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of dialogue `index` in a batch. Depends only on the batch seed and
/// the index, so batches can be evaluated in any order.
pub fn dialogue_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Everything about one finished dialogue that scoring needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueOutcome {
    pub index: usize,
    pub max_raw: i64,
    pub steps: Vec<StepScore>,
    pub totals: CostLedger,
}

/// A dialogue's score under one variant and cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DialogueResult {
    pub index: usize,
    pub raw_score: i64,
    pub totals: CostLedger,
    pub performance: f64,
    pub normalized: f64,
}

impl DialogueOutcome {
    pub fn score(&self, variant: TaskVariant, costs: &CostModel) -> DialogueResult {
        let raw_score = task::score_steps(&self.steps, variant);
        let perf = performance(raw_score, &self.totals, costs);
        DialogueResult {
            index: self.index,
            raw_score,
            totals: self.totals,
            performance: perf,
            normalized: perf / self.max_raw as f64,
        }
    }
}

/// Generates the world for dialogue `index` and runs it. The world and both
/// agents' initial memories depend only on the seed, so every strategy pair
/// and radius sees the same worlds.
pub fn simulate_dialogue(
    world_cfg: &WorldConfig,
    pair: StrategyPair,
    radius: u32,
    seed: u64,
    index: usize,
) -> Result<(WorldState, DialogueRecord), Error> {
    let master = dialogue_seed(seed, index);
    let mut world_rng = ChaCha8Rng::seed_from_u64(master);
    let (world, [mem_a, mem_b]) = task::generate_world(world_cfg, &mut world_rng)?;
    let walk = |stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(stream);
        rng
    };
    let mut agents = [
        AgentState::new(AgentId::A, pair.0, radius, mem_a, walk(1)),
        AgentState::new(AgentId::B, pair.1, radius, mem_b, walk(2)),
    ];
    let record = run_dialogue(&mut agents);
    Ok((world, record))
}

pub fn outcome_of(index: usize, world: &WorldState, record: &DialogueRecord) -> DialogueOutcome {
    let plan = record.plan();
    let validity = task::validate_plan(&plan, world);
    let report = task::score_plan(world, &plan, &validity, &record.warrant_flags(), TaskVariant::Standard);
    DialogueOutcome { index, max_raw: task::max_raw_score(world), steps: report.per_step, totals: record.totals() }
}

/// Runs `n` dialogues in parallel; results are ordered by dialogue index.
pub fn simulate_batch(
    world_cfg: &WorldConfig,
    pair: StrategyPair,
    radius: u32,
    n: usize,
    seed: u64,
) -> Result<Vec<DialogueOutcome>, Error> {
    world_cfg.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (world, record) = simulate_dialogue(world_cfg, pair, radius, seed, i)?;
            Ok(outcome_of(i, &world, &record))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub cell: ExperimentCell,
    pub results: Vec<DialogueResult>,
}

impl Distribution {
    pub fn from_outcomes(cell: ExperimentCell, outcomes: &[DialogueOutcome]) -> Distribution {
        let results = outcomes.iter().map(|o| o.score(cell.variant, &cell.costs)).collect();
        Distribution { cell, results }
    }

    /// Normalized performance values in dialogue order.
    pub fn values(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.normalized).collect()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values())
    }
}

pub fn run_cell(cell: &ExperimentCell) -> Result<Distribution, Error> {
    cell.validate()?;
    let outcomes = simulate_batch(&cell.world, cell.pair, cell.radius, cell.n_dialogues, cell.seed)?;
    Ok(Distribution::from_outcomes(cell.clone(), &outcomes))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Positive,
    Negative,
    Zero,
}

impl Direction {
    fn of(x: f64) -> Direction {
        if x > 0.0 {
            Direction::Positive
        } else if x < 0.0 {
            Direction::Negative
        } else {
            Direction::Zero
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Direction::Positive => 1,
            Direction::Negative => -1,
            Direction::Zero => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub direction: Direction,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
///
/// For small λ the alternating series converges slowly, so the equivalent
/// theta-function form `1 - √(2π)/λ Σ exp(-(2k-1)² π² / (8 λ²))` is used.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        let a = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=50 {
            let odd = f64::from(2 * k - 1);
            let term = (a * odd * odd).exp();
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = f64::from(k);
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 * sum.abs() {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(f64::MIN_POSITIVE, 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest absolute gap between the two empirical CDFs.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let (xs, ys) = (sorted(x), sorted(y));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Two-sample KS test with asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult, Error> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Argument(format!(
            "KS test needs at least 2 values per sample, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Argument("KS test sample contains NaN".into()));
    }
    let d = ks_statistic(x, y);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let ne = n * m / (n + m);
    Ok(KsResult { d_statistic: d, p_value: kolmogorov_q(ne.sqrt() * d), direction: Direction::of(mean(x) - mean(y)) })
}

/// Smallest D that reaches significance `alpha` for samples of size `n`, `m`.
pub fn ks_critical_d(n: usize, m: usize, alpha: f64) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_q(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi / ne.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Beneficial,
    Detrimental,
    Neither,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Beneficial => "BENEFICIAL",
            VerdictKind::Detrimental => "DETRIMENTAL",
            VerdictKind::Neither => "NEITHER",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Significant radii with their test results, ascending by radius.
    pub supporting: Vec<(u32, KsResult)>,
    /// Both the beneficial and the detrimental threshold were met.
    pub mixed: bool,
}

impl Verdict {
    pub fn radii(&self, direction: Direction) -> Vec<u32> {
        self.supporting.iter().filter(|(_, k)| k.direction == direction).map(|(r, _)| *r).collect()
    }
}

/// At least two radii significant in one direction decide the verdict; when
/// both directions qualify the majority wins and the verdict is flagged mixed.
pub fn classify(results: &BTreeMap<u32, KsResult>, alpha: f64) -> Verdict {
    let supporting: Vec<(u32, KsResult)> = results
        .iter()
        .filter(|(_, k)| k.p_value < alpha && k.direction != Direction::Zero)
        .map(|(r, k)| (*r, *k))
        .collect();
    let pos = supporting.iter().filter(|(_, k)| k.direction == Direction::Positive).count();
    let neg = supporting.len() - pos;
    let mixed = pos >= 2 && neg >= 2;
    let kind = if pos >= 2 && pos >= neg {
        if mixed && pos == neg {
            VerdictKind::Neither
        } else {
            VerdictKind::Beneficial
        }
    } else if neg >= 2 {
        VerdictKind::Detrimental
    } else {
        VerdictKind::Neither
    };
    Verdict { kind, supporting, mixed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferencePoint {
    pub radius: u32,
    pub mean_diff: f64,
    pub ks: KsResult,
}

/// Per radius: mean of A minus mean of B, with the KS comparison of A to B.
pub fn difference_series(
    a: &BTreeMap<u32, Distribution>,
    b: &BTreeMap<u32, Distribution>,
) -> Result<Vec<DifferencePoint>, Error> {
    if !a.keys().eq(b.keys()) {
        return Err(Error::Argument(format!(
            "radius sets differ: {:?} vs {:?}",
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>()
        )));
    }
    a.iter()
        .zip(b.values())
        .map(|((&radius, da), db)| {
            let (xa, xb) = (da.values(), db.values());
            Ok(DifferencePoint { radius, mean_diff: mean(&xa) - mean(&xb), ks: ks_two_sample(&xa, &xb)? })
        })
        .collect()
}
