use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use macq_core::adversary;
use macq_core::bounds::{self, Factor};
use macq_core::channel::DEFAULT_MAX_STATIONS;
use macq_core::engine::{default_round_cap, DEFAULT_ENUMERATION_BUDGET};
use macq_core::report::{to_csv, ReportLimits, ReportRow};
use macq_core::strategies;
use macq_core::{
    build_tree, check_normal_form, generate_report, normalize, run_adversarial, run_fixed,
    worst_case_rounds, Error, GameConfig, GameResult, Oracle, OracleLimits, StationSet, Strategy,
};

#[derive(Parser)]
#[command(name = "macq", version, about = "Conflict resolution on a multiple access channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game against a fixed live set or an adversary.
    Simulate(SimulateArgs),
    /// Worst-case rounds of a strategy over every live set.
    WorstCase(WorstCaseArgs),
    /// Decision tree of a strategy in graph export form.
    Tree(TreeArgs),
    /// Counting bounds for one (n, d) or a grid.
    Bounds(BoundsArgs),
    /// Exact optimal worst case f(n, d).
    Oracle(OracleArgs),
    /// Side-by-side comparison of oracle, strategies and bounds.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
    Text,
}

#[derive(Args)]
struct Game {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: u32,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Caps {
    /// Rounds allowed per game [default: 4n+16].
    #[arg(long)]
    round_cap: Option<usize>,
    /// Live sets that may be enumerated.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct OracleCaps {
    #[arg(long, default_value_t = OracleLimits::default().max_n)]
    oracle_max_n: u32,
    #[arg(long, default_value_t = OracleLimits::default().max_d)]
    oracle_max_d: u32,
    #[arg(long, default_value_t = OracleLimits::default().max_states)]
    oracle_max_states: usize,
}

impl OracleCaps {
    fn limits(&self) -> OracleLimits {
        OracleLimits {
            max_n: self.oracle_max_n,
            max_d: self.oracle_max_d,
            max_states: self.oracle_max_states,
            ..OracleLimits::default()
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: Game,
    #[arg(long, value_parser = strategies::STRATEGY_NAMES.to_vec(), default_value = "tree")]
    strategy: String,
    #[arg(long, value_parser = adversary::ADVERSARY_NAMES.to_vec(), conflicts_with = "live")]
    adversary: Option<String>,
    /// Comma-separated ascending station ids.
    #[arg(long, value_parser = parse_live)]
    live: Option<StationSet>,
    #[command(flatten)]
    caps: Caps,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WorstCaseArgs {
    #[command(flatten)]
    game: Game,
    #[arg(long, value_parser = strategies::STRATEGY_NAMES.to_vec(), default_value = "tree")]
    strategy: String,
    #[command(flatten)]
    caps: Caps,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    game: Game,
    #[arg(long, value_parser = strategies::STRATEGY_NAMES.to_vec(), default_value = "tree")]
    strategy: String,
    /// Drop stations already heard from every query.
    #[arg(long)]
    normalize: bool,
    /// Print the normal-form check instead of the tree.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, required_unless_present = "n_max", conflicts_with = "n_max", requires = "d")]
    n: Option<u32>,
    #[arg(long, conflicts_with = "d_max")]
    d: Option<u32>,
    /// Grid of 2 <= n <= n-max.
    #[arg(long, requires = "d_max")]
    n_max: Option<u32>,
    /// Grid of 1 <= d <= min(n, d-max).
    #[arg(long)]
    d_max: Option<u32>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    game: Game,
    /// Also print an optimal strategy tree.
    #[arg(long)]
    tree: bool,
    #[command(flatten)]
    limits: OracleCaps,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    #[arg(long, default_value_t = 3)]
    d_max: u32,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
    #[command(flatten)]
    limits: OracleCaps,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Runtime(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn parse_live(s: &str) -> Result<StationSet, String> {
    let mut set = StationSet::new();
    let mut last = 0;
    for part in s.split(',') {
        let id: u32 = part
            .trim()
            .parse()
            .map_err(|_| format!("`{part}` is not a station id"))?;
        if id <= last {
            return Err("station ids must be positive and strictly ascending".into());
        }
        set.insert(id);
        last = id;
    }
    Ok(set)
}

fn station_cap() -> Result<u32, Failure> {
    match std::env::var("MACQ_MAX_N") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("MACQ_MAX_N must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_STATIONS),
    }
}

/// Argument problems are usage errors even though the library reports them.
fn config(game: &Game) -> Result<GameConfig, Failure> {
    GameConfig::with_station_cap(game.n, game.d, station_cap()?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", e.name())))
}

fn strategy(name: &str) -> Box<dyn Strategy> {
    strategies::by_name(name).expect("clap restricts strategy names")
}

fn format_of(output: &Output, default: Format, allowed: &[Format], command: &str) -> Result<Format, Failure> {
    let format = output.format.unwrap_or(default);
    if allowed.contains(&format) {
        Ok(format)
    } else {
        let name = format.to_possible_value().unwrap().get_name().to_string();
        Err(Failure::Usage(format!("{command} does not support --format {name}")))
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn simulate(args: &SimulateArgs) -> Result<String, Failure> {
    let config = config(&args.game)?;
    let format = format_of(&args.output, Format::JsonLines, &[Format::Csv, Format::JsonLines, Format::Text], "simulate")?;
    let s = strategy(&args.strategy);
    let cap = args.caps.round_cap.unwrap_or_else(|| default_round_cap(&config));
    let result: GameResult = match (&args.live, &args.adversary) {
        (Some(live), None) => {
            config
                .check_live(live)
                .map_err(|e| Failure::Usage(format!("{}: {e}", e.name())))?;
            run_fixed(s.as_ref(), config, live, cap)?
        }
        (None, Some(name)) => {
            let adv = adversary::by_name(name, s.as_ref()).expect("clap restricts adversary names");
            run_adversarial(s.as_ref(), adv.as_ref(), config, cap, args.caps.budget)?
        }
        _ => return Err(Failure::Usage("simulate needs exactly one of --live or --adversary".into())),
    };
    Ok(match format {
        Format::JsonLines => {
            let mut line = serde_json::to_string(&result.to_document()).expect("serialisable");
            line.push('\n');
            line
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = result
                .transcript
                .rounds
                .iter()
                .enumerate()
                .map(|(i, r)| vec![(i + 1).to_string(), r.query.to_string(), r.feedback.to_string()])
                .collect();
            csv_string(&["round", "query", "feedback"], &rows)
        }
        Format::Text => {
            let mut out = String::new();
            for (i, r) in result.transcript.rounds.iter().enumerate() {
                let _ = writeln!(out, "round {}: {} -> {}", i + 1, r.query, r.feedback);
            }
            let _ = writeln!(
                out,
                "live={} rounds={} completed={}",
                result.witness_live, result.rounds_used, result.completed
            );
            out
        }
    })
}

fn worst_case(args: &WorstCaseArgs) -> Result<String, Failure> {
    let config = config(&args.game)?;
    let format = format_of(&args.output, Format::Text, &[Format::Csv, Format::JsonLines, Format::Text], "worst-case")?;
    let s = strategy(&args.strategy);
    let cap = args.caps.round_cap.unwrap_or_else(|| default_round_cap(&config));
    let (worst, witness) = worst_case_rounds(s.as_ref(), config, cap, args.caps.budget)?;
    Ok(match format {
        Format::Text => format!("{worst}\n"),
        Format::JsonLines => format!(
            "{}\n",
            json!({"strategy": args.strategy, "n": config.n, "d": config.d, "worst": worst, "witness": witness})
        ),
        Format::Csv => csv_string(
            &["strategy", "n", "d", "worst", "witness"],
            &[vec![
                args.strategy.clone(),
                config.n.to_string(),
                config.d.to_string(),
                worst.to_string(),
                witness.to_string(),
            ]],
        ),
    })
}

fn tree(args: &TreeArgs) -> Result<String, Failure> {
    let config = config(&args.game)?;
    let allowed: &[Format] = if args.check { &[Format::JsonLines, Format::Text] } else { &[Format::Text] };
    let format = format_of(&args.output, Format::Text, allowed, "tree")?;
    let s = strategy(&args.strategy);
    let tree = if args.normalize {
        normalize(s.as_ref(), config, args.budget)?
    } else {
        build_tree(s.as_ref(), config, args.budget)?
    };
    if !args.check {
        return Ok(tree.export_graph());
    }
    let report = check_normal_form(&tree);
    Ok(match format {
        Format::JsonLines => format!("{}\n", serde_json::to_string(&report).expect("serialisable")),
        _ => {
            let black: Vec<String> = report.black_per_path.iter().map(usize::to_string).collect();
            format!(
                "max_depth={}\nleaf_count={}\nblack_per_path={}\nrepeated_transmitter_paths={}\nmisresolved_leaves={}\nproperty_holds={}\n",
                report.max_depth,
                report.leaf_count,
                black.join(","),
                report.repeated_transmitter_paths,
                report.misresolved_leaves,
                report.property_holds
            )
        }
    })
}

const BOUNDS_HEADER: [&str; 6] = ["n", "d", "info_lb", "claimed_factorial", "claimed_power", "claimed_analytic"];

fn bounds_row(n: u32, d: u32) -> Result<[u64; 6], Error> {
    let (n64, d64) = (u64::from(n), u64::from(d));
    Ok([
        n64,
        d64,
        u64::from(bounds::info_lower_bound(n64, d64)?),
        bounds::claimed_bound_combinatorial(n64, d64, Factor::Factorial)?,
        bounds::claimed_bound_combinatorial(n64, d64, Factor::Power)?,
        bounds::claimed_bound_analytic(n64, d64)?,
    ])
}

fn bounds_cmd(args: &BoundsArgs) -> Result<String, Failure> {
    let format = format_of(&args.output, Format::Csv, &[Format::Csv, Format::JsonLines, Format::Text], "bounds")?;
    let cells: Vec<(u32, u32)> = match (args.n, args.d, args.n_max, args.d_max) {
        (Some(n), Some(d), None, None) => {
            config(&Game { n, d })?;
            vec![(n, d)]
        }
        (None, None, Some(n_max), Some(d_max)) => {
            (2..=n_max).flat_map(|n| (1..=n.min(d_max)).map(move |d| (n, d))).collect()
        }
        _ => return Err(Failure::Usage("bounds needs --n with --d, or --n-max with --d-max".into())),
    };
    let rows = cells
        .iter()
        .map(|&(n, d)| bounds_row(n, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(u64::to_string).collect()).collect();
            csv_string(&BOUNDS_HEADER, &rows)
        }
        Format::JsonLines => rows
            .iter()
            .map(|r| {
                // Keys in column order; every value is a plain integer.
                let pairs: Vec<String> = BOUNDS_HEADER.iter().zip(r).map(|(k, v)| format!("\"{k}\":{v}")).collect();
                format!("{{{}}}\n", pairs.join(","))
            })
            .collect(),
        Format::Text => rows
            .iter()
            .map(|r| {
                let pairs: Vec<String> = BOUNDS_HEADER.iter().zip(r).map(|(k, v)| format!("{k}={v}")).collect();
                format!("{}\n", pairs.join(" "))
            })
            .collect(),
    })
}

fn oracle(args: &OracleArgs) -> Result<String, Failure> {
    let config = config(&args.game)?;
    let allowed: &[Format] = if args.tree { &[Format::Text] } else { &[Format::Csv, Format::JsonLines, Format::Text] };
    let format = format_of(&args.output, Format::Text, allowed, "oracle --tree")?;
    let mut solver = Oracle::new(config, args.limits.limits())?;
    let f = solver.optimal_rounds()?;
    Ok(match format {
        Format::Text => {
            let mut out = format!("{f}\n");
            if args.tree {
                out.push_str(&solver.optimal_tree()?.export_graph());
            }
            out
        }
        Format::JsonLines => format!("{}\n", json!({"n": config.n, "d": config.d, "f": f})),
        Format::Csv => csv_string(&["n", "d", "f"], &[vec![config.n.to_string(), config.d.to_string(), f.to_string()]]),
    })
}

fn report_text(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>2} {:>4} {:>4} {:>6} {:>4} {:>5} {:>5} {:>8}  flags",
        "n", "d", "opt", "tree", "linear", "lb", "fact", "power", "analytic"
    );
    for r in rows {
        let flags: Vec<String> = r.flags.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "{:>3} {:>2} {:>4} {:>4} {:>6} {:>4} {:>5} {:>5} {:>8}  {}",
            r.n,
            r.d,
            opt(r.oracle_opt),
            opt(r.tree_worst),
            opt(r.linear_worst),
            opt(r.info_lb),
            opt(r.claimed_factorial),
            opt(r.claimed_power),
            opt(r.claimed_analytic),
            flags.join(";")
        );
    }
    out
}

fn report(args: &ReportArgs) -> Result<String, Failure> {
    let format = format_of(&args.output, Format::Csv, &[Format::Csv, Format::JsonLines, Format::Text], "report")?;
    let limits = ReportLimits {
        oracle: args.limits.limits(),
        enumeration_budget: args.budget,
    };
    let rows = generate_report(args.n_max, args.d_max, limits)?;
    Ok(match format {
        Format::Csv => to_csv(&rows),
        Format::JsonLines => rows
            .iter()
            .map(|r| format!("{}\n", serde_json::to_string(r).expect("serialisable")))
            .collect(),
        Format::Text => report_text(&rows),
    })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (text, out) = match &cli.command {
        Command::Simulate(a) => (simulate(a)?, &a.output.out),
        Command::WorstCase(a) => (worst_case(a)?, &a.output.out),
        Command::Tree(a) => (tree(a)?, &a.output.out),
        Command::Bounds(a) => (bounds_cmd(a)?, &a.output.out),
        Command::Oracle(a) => (oracle(a)?, &a.output.out),
        Command::Report(a) => (report(a)?, &a.output.out),
    };
    emit(&text, out)
}

/// Squashes clap's multi-line message into one line, keeping the list of
/// valid values when clap prints one.
fn one_line(err: &clap::Error) -> String {
    let rendered = err.to_string();
    let parts: Vec<&str> = rendered
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("For more information") && !l.starts_with("Usage:"))
        .collect();
    parts.join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", one_line(&e));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: io: {msg}");
            ExitCode::from(1)
        }
    }
}
