//! Runs every cell a suite needs and assembles per-comparison results.

use std::collections::{BTreeMap, BTreeSet};

use designworld::experiment::{
    classify, difference_series, simulate_batch, DialogueOutcome, DifferencePoint, Distribution, ExperimentCell,
    KsResult, StrategyPair, Verdict,
};
use rayon::prelude::*;

use crate::config::{Comparison, SuiteConfig};
use crate::CliError;

/// Significance level for the per-radius KS tests.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub comparison: Comparison,
    pub first: BTreeMap<u32, Distribution>,
    pub second: BTreeMap<u32, Distribution>,
    pub series: Vec<DifferencePoint>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct SuiteResults {
    pub comparisons: Vec<ComparisonResult>,
    /// Distinct (pair, radius) batches that were simulated.
    pub batches: usize,
}

/// Distinct simulations the suite needs. Scoring variants share a batch.
pub fn batches(cfg: &SuiteConfig) -> BTreeSet<(StrategyPair, u32)> {
    cfg.comparisons
        .iter()
        .flat_map(|c| [c.strategy_1, c.strategy_2])
        .flat_map(|pair| cfg.radii.iter().map(move |&r| (pair, r)))
        .collect()
}

/// One line per cell: comparison, strategy, variant, radius, dialogues.
pub fn cell_matrix(cfg: &SuiteConfig) -> Vec<String> {
    let mut lines = Vec::new();
    for c in &cfg.comparisons {
        for pair in [c.strategy_1, c.strategy_2] {
            for r in &cfg.radii {
                lines.push(format!("{}\t{}\t{}\tradius={}\tn={}", c.id, pair, c.variant, r, cfg.n_dialogues));
            }
        }
    }
    lines
}

/// Simulates on the current rayon pool. Output does not depend on the
/// number of worker threads.
pub fn execute_suite(cfg: &SuiteConfig) -> Result<SuiteResults, CliError> {
    let needed: Vec<(StrategyPair, u32)> = batches(cfg).into_iter().collect();
    let outcomes: Vec<Vec<DialogueOutcome>> = needed
        .par_iter()
        .map(|&(pair, radius)| simulate_batch(&cfg.world, pair, radius, cfg.n_dialogues, cfg.seed))
        .collect::<Result<_, _>>()?;
    let outcomes: BTreeMap<(StrategyPair, u32), Vec<DialogueOutcome>> = needed.into_iter().zip(outcomes).collect();

    let distributions = |c: &Comparison, pair: StrategyPair| -> BTreeMap<u32, Distribution> {
        cfg.radii
            .iter()
            .map(|&radius| {
                let cell = ExperimentCell {
                    pair,
                    variant: c.variant,
                    radius,
                    costs: cfg.costs,
                    n_dialogues: cfg.n_dialogues,
                    seed: cfg.seed,
                    world: cfg.world.clone(),
                };
                (radius, Distribution::from_outcomes(cell, &outcomes[&(pair, radius)]))
            })
            .collect()
    };

    let comparisons = cfg
        .comparisons
        .iter()
        .map(|c| {
            let first = distributions(c, c.strategy_1);
            let second = distributions(c, c.strategy_2);
            let series = difference_series(&first, &second)?;
            let tests: BTreeMap<u32, KsResult> = series.iter().map(|p| (p.radius, p.ks)).collect();
            let verdict = classify(&tests, ALPHA);
            Ok(ComparisonResult { comparison: c.clone(), first, second, series, verdict })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(SuiteResults { comparisons, batches: outcomes.len() })
}
