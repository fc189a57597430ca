//! Suite configuration: flat `key = value` lines followed by one
//! `[comparison]` block per strategy comparison.
//!
//! ```text
//! # defaults shown
//! seed = 1
//! n_dialogues = 100
//! radii = 1..16
//! commcost = 1
//! infcost = 1
//! retcost = 0.01
//! output_dir = results
//!
//! [comparison]
//! id = clc-standard
//! strategy_1 = close-consequence+all-implicit
//! strategy_2 = all-implicit+all-implicit
//! variant = standard
//! ```

use std::path::{Path, PathBuf};

use designworld::experiment::{CostModel, StrategyPair};
use designworld::{TaskVariant, WorldConfig};

use crate::CliError;

/// Largest radius that still fits the 16-wide memory torus.
pub const MAX_RADIUS: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub id: String,
    pub strategy_1: StrategyPair,
    pub strategy_2: StrategyPair,
    pub variant: TaskVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub comparisons: Vec<Comparison>,
    pub costs: CostModel,
    pub radii: Vec<u32>,
    pub n_dialogues: usize,
    pub seed: u64,
    pub world: WorldConfig,
    pub output_dir: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            comparisons: Vec::new(),
            costs: CostModel::default(),
            radii: (1..=MAX_RADIUS).collect(),
            n_dialogues: 100,
            seed: 1,
            world: WorldConfig::default(),
            output_dir: PathBuf::from("results"),
        }
    }
}

pub fn load_config(path: &Path) -> Result<SuiteConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut cfg = parse_config(&text)?;
    if cfg.output_dir.is_relative() {
        if let Some(dir) = path.parent() {
            cfg.output_dir = dir.join(&cfg.output_dir);
        }
    }
    Ok(cfg)
}

#[derive(Default)]
struct PartialComparison {
    line: usize,
    id: Option<String>,
    strategy_1: Option<StrategyPair>,
    strategy_2: Option<StrategyPair>,
    variant: Option<TaskVariant>,
}

impl PartialComparison {
    fn finish(self, index: usize) -> Result<Comparison, CliError> {
        let missing =
            |key: &str| CliError::Parse { line: self.line, message: format!("[comparison] block is missing `{key}`") };
        Ok(Comparison {
            strategy_1: self.strategy_1.ok_or_else(|| missing("strategy_1"))?,
            strategy_2: self.strategy_2.ok_or_else(|| missing("strategy_2"))?,
            variant: self.variant.ok_or_else(|| missing("variant"))?,
            id: self.id.unwrap_or_else(|| format!("comparison-{}", index + 1)),
        })
    }
}

/// Parses configuration text. Relative output paths are kept as written.
pub fn parse_config(text: &str) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::default();
    let mut blocks: Vec<PartialComparison> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if content != "[comparison]" {
                return Err(CliError::Parse { line, message: format!("unknown section `{content}`") });
            }
            blocks.push(PartialComparison { line, ..Default::default() });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        match blocks.last_mut() {
            Some(block) => set_comparison_key(block, key, value, line)?,
            None => set_suite_key(&mut cfg, key, value, line)?,
        }
    }

    if blocks.is_empty() {
        return Err(CliError::Parse { line: 0, message: "no [comparison] block".into() });
    }
    cfg.comparisons = blocks.into_iter().enumerate().map(|(i, b)| b.finish(i)).collect::<Result<_, _>>()?;
    for (i, c) in cfg.comparisons.iter().enumerate() {
        if cfg.comparisons[..i].iter().any(|d| d.id == c.id) {
            return Err(CliError::Parse { line: 0, message: format!("duplicate comparison id `{}`", c.id) });
        }
        if c.id.is_empty() || !c.id.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_') {
            return Err(CliError::Parse {
                line: 0,
                message: format!("comparison id `{}` must use letters, digits, `-` or `_`", c.id),
            });
        }
    }
    cfg.world.validate().map_err(|e| CliError::Parse { line: 0, message: e.to_string() })?;
    Ok(cfg)
}

fn number<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Parse { line, message: format!("`{key}`: cannot parse `{value}`") })
}

fn cost(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    let v: f64 = number(key, value, line)?;
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::Parse { line, message: format!("`{key}` must be a non-negative number") });
    }
    Ok(v)
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn set_suite_key(cfg: &mut SuiteConfig, key: &str, value: &str, line: usize) -> Result<(), CliError> {
    match key {
        "seed" => cfg.seed = number(key, value, line)?,
        "n_dialogues" => {
            cfg.n_dialogues = number(key, value, line)?;
            if cfg.n_dialogues < 2 {
                return Err(CliError::Parse { line, message: "`n_dialogues` must be at least 2".into() });
            }
        }
        "radii" => cfg.radii = parse_radii(value, line)?,
        "commcost" => cfg.costs.commcost = cost(key, value, line)?,
        "infcost" => cfg.costs.infcost = cost(key, value, line)?,
        "retcost" => cfg.costs.retcost = cost(key, value, line)?,
        "output_dir" => cfg.output_dir = PathBuf::from(value),
        "items_per_agent" => cfg.world.items_per_agent = number(key, value, line)?,
        "min_points" => cfg.world.min_points = number(key, value, line)?,
        "max_points" => cfg.world.max_points = number(key, value, line)?,
        "colors" => cfg.world.colors = list(value),
        "kinds" => cfg.world.kinds = list(value),
        _ => return Err(CliError::Parse { line, message: format!("unknown key `{key}`") }),
    }
    Ok(())
}

fn set_comparison_key(block: &mut PartialComparison, key: &str, value: &str, line: usize) -> Result<(), CliError> {
    let named = |e: designworld::Error| CliError::UnknownName { line, field: key.to_string(), message: e.to_string() };
    match key {
        "id" => block.id = Some(value.to_string()),
        "strategy_1" => block.strategy_1 = Some(value.parse().map_err(named)?),
        "strategy_2" => block.strategy_2 = Some(value.parse().map_err(named)?),
        "variant" => block.variant = Some(value.parse().map_err(named)?),
        _ => return Err(CliError::Parse { line, message: format!("unknown key `{key}` in [comparison]") }),
    }
    Ok(())
}

/// Accepts `a..b` ranges and comma-separated values, e.g. `1..4, 8, 16`.
/// The result is sorted and free of duplicates.
pub fn parse_radii(value: &str, line: usize) -> Result<Vec<u32>, CliError> {
    let mut radii = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: u32 = number("radii", lo.trim(), line)?;
                let hi: u32 = number("radii", hi.trim().trim_start_matches('='), line)?;
                if lo > hi {
                    return Err(CliError::Parse { line, message: format!("empty radius range `{part}`") });
                }
                radii.extend(lo..=hi);
            }
            None => radii.push(number("radii", part, line)?),
        }
    }
    if radii.is_empty() {
        return Err(CliError::Parse { line, message: "`radii` is empty".into() });
    }
    if let Some(&bad) = radii.iter().find(|&&r| r == 0 || r > MAX_RADIUS) {
        return Err(CliError::RadiusOutOfRange { line, radius: bad });
    }
    radii.sort_unstable();
    radii.dedup();
    Ok(radii)
}
