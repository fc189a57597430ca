use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use designworld::experiment::{simulate_dialogue, StrategyPair};
use designworld_cli::config::{load_config, parse_radii, SuiteConfig};
use designworld_cli::suite::{batches, cell_matrix, execute_suite};
use designworld_cli::{write_outputs, CliError};

#[derive(Parser)]
#[command(name = "designworld", version, about = "Run strategy comparisons between negotiating agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every comparison in a suite configuration file.
    Run {
        config: PathBuf,
        /// Print the cell matrix without simulating.
        #[arg(long)]
        dry_run: bool,
        /// Worker threads (0 uses every core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Print one dialogue instead of running the suite, e.g.
        /// `close-consequence+all-implicit@3:17` (pair, radius, dialogue index).
        #[arg(long, value_name = "PAIR@RADIUS:INDEX")]
        dump_transcript: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli, std::env::var("DESIGNWORLD_SEED").ok()) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Executes a command and returns what it prints on success.
fn run(cli: Cli, seed_override: Option<String>) -> Result<String, CliError> {
    let Command::Run { config, dry_run, jobs, dump_transcript } = cli.command;
    let mut cfg = load_config(&config)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("DESIGNWORLD_SEED must be an unsigned integer, got `{seed}`")))?;
    }

    if let Some(target) = dump_transcript {
        return dump(&cfg, &target);
    }
    let mut out = String::new();
    if dry_run {
        for line in cell_matrix(&cfg) {
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(
            out,
            "{} cells, {} dialogues to simulate, seed {}",
            cfg.comparisons.len() * 2 * cfg.radii.len(),
            batches(&cfg).len() * cfg.n_dialogues,
            cfg.seed
        );
        return Ok(out);
    }

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Internal(e.to_string()))?;
    let results = pool.install(|| execute_suite(&cfg))?;
    write_outputs(&results, &cfg.output_dir)?;
    for c in &results.comparisons {
        let _ =
            writeln!(out, "{}: {}{}", c.comparison.id, c.verdict.kind, if c.verdict.mixed { " (mixed)" } else { "" });
    }
    let _ = writeln!(out, "outputs written to {}", cfg.output_dir.display());
    Ok(out)
}

fn dump(cfg: &SuiteConfig, target: &str) -> Result<String, CliError> {
    let usage = || CliError::Usage(format!("--dump-transcript expects PAIR@RADIUS:INDEX, got `{target}`"));
    let (pair, rest) = target.split_once('@').ok_or_else(usage)?;
    let (radius, index) = rest.split_once(':').ok_or_else(usage)?;
    let pair: StrategyPair = pair.parse().map_err(|e: designworld::Error| CliError::UnknownName {
        line: 0,
        field: "--dump-transcript".into(),
        message: e.to_string(),
    })?;
    let radius = match parse_radii(radius, 0)?[..] {
        [r] => r,
        _ => return Err(usage()),
    };
    let index: usize = index.parse().map_err(|_| usage())?;
    let (world, record) = simulate_dialogue(&cfg.world, pair, radius, cfg.seed, index)?;
    Ok(record.render_transcript(&world))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::path::Path;

    use designworld::experiment::{ks_two_sample, mean};

    use super::*;

    const SUITE: &str = "\
seed = 3
n_dialogues = 12
radii = 1, 2, 5, 16
output_dir = out

[comparison]
id = ew-standard
strategy_1 = explicit-warrant+explicit-warrant
strategy_2 = all-implicit+all-implicit
variant = standard

[comparison]
id = same
strategy_1 = all-implicit+all-implicit
strategy_2 = all-implicit+all-implicit
variant = zero-invalids
";

    fn write_config(dir: &Path, text: &str) -> String {
        let path = dir.join("suite.conf");
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn invoke(args: &[&str], seed: Option<&str>) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("designworld").chain(args.iter().copied())).unwrap();
        run(cli, seed.map(String::from))
    }

    fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
        csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
    }

    #[test]
    fn failures_map_to_distinct_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.conf");
        assert_eq!(invoke(&["run", missing.to_str().unwrap()], None).unwrap_err().exit_code(), 2);

        let cases = [
            ("colour = red\n", 1),
            (&*SUITE.replace("explicit-warrant+explicit", "explicit-warant+explicit"), 4),
            (&*SUITE.replace("radii = 1, 2, 5, 16", "radii = 1..17"), 5),
        ];
        for (text, code) in cases {
            let config = write_config(dir.path(), text);
            let err = invoke(&["run", &config], None).unwrap_err();
            assert_eq!(err.exit_code(), code, "{err}");
        }
        let config = write_config(dir.path(), "colour = red\n");
        assert!(invoke(&["run", &config], None).unwrap_err().to_string().contains("line 1"));

        let config = write_config(dir.path(), SUITE);
        assert_eq!(invoke(&["run", &config], Some("x")).unwrap_err().exit_code(), 1);
        let err = invoke(&["run", &config, "--dump-transcript", "all-implicit"], None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = invoke(&["run", &config, "--dump-transcript", "all-implicit+all-implicit@0:2"], None).unwrap_err();
        assert_eq!(err.exit_code(), 5);
        assert!(Cli::try_parse_from(["designworld", "frobnicate"]).is_err());
    }

    #[test]
    fn suite_outputs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), SUITE);
        let stdout = invoke(&["run", &config, "--jobs", "2"], None).unwrap();
        assert!(stdout.contains("same: NEITHER"), "{stdout}");
        let root = dir.path().join("out");

        let rows = read_csv(&root.join("distributions.csv"));
        assert_eq!(rows.len(), 2 * 2 * 4 * 12);

        for id in ["ew-standard", "same"] {
            let sub = root.join(id);
            for f in ["difference.csv", "difference.svg", "verdict.txt"] {
                assert!(sub.join(f).is_file(), "{id}/{f}");
            }
            // Rows for a comparison list strategy 1 first, then strategy 2.
            let mine: Vec<_> = rows.iter().filter(|r| &r[0] == id).collect();
            let (first, second) = mine.split_at(mine.len() / 2);
            let by_radius = |rs: &[&csv::StringRecord]| {
                let mut m: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
                for r in rs {
                    m.entry(r[2].parse().unwrap()).or_default().push(r[9].parse().unwrap());
                }
                m
            };
            let (a, b) = (by_radius(first), by_radius(second));
            let diff = read_csv(&sub.join("difference.csv"));
            assert_eq!(diff.len(), 4);
            for row in diff {
                let radius: u32 = row[0].parse().unwrap();
                let ks = ks_two_sample(&a[&radius], &b[&radius]).unwrap();
                let close = |field: &str, want: f64| (field.parse::<f64>().unwrap() - want).abs() < 1e-9;
                assert!(close(&row[1], mean(&a[&radius]) - mean(&b[&radius])), "{id} r{radius}");
                assert!(close(&row[2], ks.d_statistic));
                assert!(close(&row[3], ks.p_value));
            }
        }

        let same = std::fs::read_to_string(root.join("same/verdict.txt")).unwrap();
        assert!(same.starts_with("NEITHER\n"));
        let svg = std::fs::read_to_string(root.join("same/difference.svg")).unwrap();
        assert!(svg.contains("stroke-dasharray"));
        let zero_y = svg.split("<line ").nth(1).unwrap().split("y1=\"").nth(1).unwrap().split('"').next().unwrap();
        let polyline = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(polyline.split(' ').all(|p| p.ends_with(&format!(",{zero_y}"))), "{polyline} vs {zero_y}");
    }

    #[test]
    fn dry_run_lists_cells_without_writing() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), SUITE);
        let stdout = invoke(&["run", &config, "--dry-run"], None).unwrap();
        assert_eq!(stdout.lines().filter(|l| l.contains("radius=")).count(), 2 * 2 * 4);
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn seed_override_changes_results() {
        let output = |seed: Option<&str>| {
            let dir = tempfile::tempdir().unwrap();
            let config = write_config(dir.path(), SUITE);
            invoke(&["run", &config], seed).unwrap();
            std::fs::read(dir.path().join("out/distributions.csv")).unwrap()
        };
        let base = output(None);
        assert_eq!(base, output(Some("3")));
        assert_ne!(base, output(Some("4")));
    }

    #[test]
    fn transcript_dump_prints_acts() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), SUITE);
        let stdout =
            invoke(&["run", &config, "--dump-transcript", "close-consequence+all-implicit@4:2"], None).unwrap();
        assert!(stdout.lines().count() > 0);
        assert!(stdout.lines().all(|l| l.starts_with('(') && l.ends_with(')')));
        assert!(stdout.contains("(close "));
        assert!(!dir.path().join("out").exists());
    }
}
