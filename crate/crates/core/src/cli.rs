//! The `cablegraph` command line.
//!
//! Exit codes: 0 success, 1 bad input or I/O, 2 unknown knot class or bad
//! flags, 3 budget exceeded (or noise stall), 4 stuck, 5 oracle depth limit
//! reached, 6 oracle proved the workspace cannot be emptied.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::oracle::{bfs_solve, replay, Reachability, DEFAULT_MAX_DEPTH};
use crate::corpus::{corpus_dir, generate, load_corpus, CorpusError, KnotName, KnotSpec};
use crate::diagram::{parse, serialize, Diagram};
use crate::moves::NoiseConfig;
use crate::planner::{bench, run, BenchConfig, Budget, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_STUCK: i32 = 4;
pub const EXIT_UNKNOWN: i32 = 5;
pub const EXIT_UNREACHABLE: i32 = 6;

/// Largest diagram the oracle accepts.
pub const ORACLE_MAX_CROSSINGS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "cablegraph",
    version,
    about = "Disentangle knotted multi-cable diagrams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a diagram and write it as MCD.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the planner on one diagram.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        /// Disentangling-action budget; defaults by tier (20/30/30).
        #[arg(long)]
        budget: Option<u32>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Write the per-step trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the planner over the golden corpus and report per-tier statistics.
    Bench {
        /// Restrict to one tier.
        #[arg(long)]
        tier: Option<u8>,
        /// Override the budget of every tier.
        #[arg(long)]
        budget: Option<u32>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Rollouts per corpus diagram.
        #[arg(long, default_value_t = 1)]
        repeats: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustively search for the fewest disentangling actions.
    Oracle {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Knot class.
    #[arg(long, conflicts_with = "random")]
    pub knot: Option<String>,
    /// Twist count or braid periods.
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub slack: u32,
    /// Random tangle instead of a named class.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 2)]
    pub cables: u32,
    #[arg(long, default_value_t = 4)]
    pub crossings: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// MCD file to read.
    #[arg(long, conflicts_with_all = ["knot", "random"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Probability that a disentangling action has no effect.
    #[arg(long, default_value_t = 0.0)]
    pub noise_fail: f64,
    /// Probability that an action leaves a new loop behind.
    #[arg(long, default_value_t = 0.0)]
    pub noise_spawn: f64,
    /// Noise seed.
    #[arg(long = "noise-seed", default_value_t = 0)]
    pub noise_seed: u64,
}

impl NoiseArgs {
    fn config(&self) -> Result<Option<NoiseConfig>, String> {
        for (name, p) in [
            ("--noise-fail", self.noise_fail),
            ("--noise-spawn", self.noise_spawn),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.noise_fail == 0.0 && self.noise_spawn == 0.0 {
            return Ok(None);
        }
        Ok(Some(NoiseConfig::new(
            self.noise_fail,
            self.noise_spawn,
            self.noise_seed,
        )))
    }
}

struct Failure(i32, String);

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let code = match e {
            CorpusError::UnknownName(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure(code, e.to_string())
    }
}

fn spec_of(a: &SpecArgs) -> Result<KnotSpec, Failure> {
    if a.random {
        return Ok(KnotSpec::random(a.seed, a.cables, a.crossings));
    }
    let Some(name) = &a.knot else {
        return Err(Failure(
            EXIT_USAGE,
            "one of --input, --knot or --random is required".into(),
        ));
    };
    let name: KnotName = name.parse()?;
    Ok(KnotSpec {
        name,
        n: a.n,
        slack: a.slack,
        seed: a.seed,
        cables: a.cables,
        crossings: a.crossings,
    })
}

/// Load the diagram and, for generated ones, the tier.
fn load(src: &SourceArgs) -> Result<(Diagram, Option<u8>), Failure> {
    match &src.input {
        Some(path) => Ok((read_mcd(path)?, tier_from_path(path))),
        None => {
            let spec = spec_of(&src.spec)?;
            Ok((generate(&spec)?, Some(spec.tier())))
        }
    }
}

fn read_mcd(path: &Path) -> Result<Diagram, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn tier_from_path(path: &Path) -> Option<u8> {
    let name = path.file_name()?.to_str()?;
    let k = name.strip_prefix("tier")?.chars().next()?.to_digit(10)?;
    u8::try_from(k).ok().filter(|t| (1..=3).contains(t))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Success => EXIT_OK,
        Outcome::BudgetExceeded | Outcome::NoiseStall => EXIT_BUDGET,
        Outcome::Stuck => EXIT_STUCK,
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure(EXIT_INPUT, e.to_string());
    match cmd {
        Command::Gen { spec, out: path } => {
            let spec = spec_of(&spec)?;
            let d = generate(&spec)?;
            let text = serialize(&d);
            let summary = format!("crossings {} | tier {}", d.crossing_count(), spec.tier());
            match path {
                Some(p) => {
                    write_file(&p, &text)?;
                    writeln!(out, "wrote {} | {summary}", p.display()).map_err(io)?;
                }
                None => {
                    out.write_all(text.as_bytes()).map_err(io)?;
                    let _ = writeln!(err, "{summary}");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Run {
            source,
            budget,
            noise,
            trace_out,
            format,
        } => {
            let noise = noise.config().map_err(|m| Failure(EXIT_USAGE, m))?;
            let (d, tier) = load(&source)?;
            let budget = budget.map_or_else(|| Budget::for_tier(tier.unwrap_or(1)), Budget::new);
            let t = run(&d, budget, noise.as_ref());
            let trace = match format {
                Format::Text => t.text(),
                Format::Json => t.json_lines(),
            };
            match trace_out {
                Some(p) => write_file(&p, &trace)?,
                None => out.write_all(trace.as_bytes()).map_err(io)?,
            }
            let c = t.counters;
            match format {
                Format::Text => writeln!(
                    out,
                    "{} | disentangling {} | recovery {} | total {}",
                    t.outcome, c.disentangling_actions, c.recovery_actions, c.total_actions
                ),
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "outcome": t.outcome,
                        "disentangling_actions": c.disentangling_actions,
                        "recovery_actions": c.recovery_actions,
                        "total_actions": c.total_actions,
                    })
                ),
            }
            .map_err(io)?;
            Ok(outcome_code(t.outcome))
        }
        Command::Bench {
            tier,
            budget,
            noise,
            repeats,
            format,
        } => {
            let noise = noise.config().map_err(|m| Failure(EXIT_USAGE, m))?;
            let mut cases = load_corpus(&corpus_dir())?;
            if let Some(k) = tier {
                cases.retain(|c| c.tier == k);
            }
            let mut cfg = BenchConfig {
                repetitions: repeats.max(1),
                noise,
                ..BenchConfig::default()
            };
            if let Some(b) = budget {
                cfg.budgets = [Budget::new(b); 3];
            }
            let table = bench(&cases, &cfg);
            let text = match format {
                Format::Text => table.text(),
                Format::Json => table.json_lines(),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            source,
            max_depth,
            format,
        } => {
            let (d, _) = load(&source)?;
            if d.crossing_count() > ORACLE_MAX_CROSSINGS {
                return Err(Failure(
                    EXIT_INPUT,
                    format!(
                        "diagram has {} crossings; the oracle accepts at most {ORACLE_MAX_CROSSINGS}",
                        d.crossing_count()
                    ),
                ));
            }
            let r = bfs_solve(&d, max_depth);
            let verified = r.witness.as_ref().map(|w| replay(&d, w));
            match format {
                Format::Text => {
                    match (r.reachability, r.min_moves) {
                        (Reachability::Reachable, Some(m)) => writeln!(out, "reachable in {m}"),
                        (Reachability::Unknown, _) => {
                            writeln!(out, "unknown within depth {max_depth}")
                        }
                        _ => writeln!(out, "unreachable"),
                    }
                    .map_err(io)?;
                    for a in r.witness.iter().flatten() {
                        writeln!(out, "{} | targets={}", a.kind(), a.targets()).map_err(io)?;
                    }
                    if let Some(v) = verified {
                        writeln!(
                            out,
                            "witness replay: {}",
                            if v { "verified" } else { "FAILED" }
                        )
                        .map_err(io)?;
                    }
                }
                Format::Json => {
                    let witness: Option<Vec<String>> = r.witness.as_ref().map(|w| {
                        w.iter()
                            .map(|a| format!("{} {}", a.kind(), a.targets()))
                            .collect()
                    });
                    writeln!(
                        out,
                        "{}",
                        serde_json::json!({
                            "reachability": r.reachability,
                            "min_moves": r.min_moves,
                            "witness": witness,
                            "witness_verified": verified,
                            "states_explored": r.states_explored,
                        })
                    )
                    .map_err(io)?;
                }
            }
            Ok(match r.reachability {
                Reachability::Reachable if verified == Some(true) => EXIT_OK,
                Reachability::Reachable => EXIT_INPUT,
                Reachability::Unknown => EXIT_UNKNOWN,
                Reachability::Unreachable => EXIT_UNREACHABLE,
            })
        }
    }
}

/// Parse `args` (including the program name) and execute. Returns the exit
/// code; diagnostics go to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
