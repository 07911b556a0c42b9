use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use voa_core::linalg::{format_scalar, parse_scalar};
use voa_core::{Error, Model, Scalar};

mod commands;
mod table;

#[derive(Parser, Debug)]
#[command(name = "voa", version, about = "Exact experiments on free-boson vertex algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Identity sweep over basis tuples (plus seeded random triples).
    Axioms(Common),
    /// Graded dimensions of V and of its sign invariants.
    Dims(Common),
    /// Li filtration: table, product laws, gr algebra, strong generation.
    Li(Common),
    /// Closures of single basis elements and their fullness witnesses.
    Ideal(Common),
    /// Bracket recovery from normally ordered products.
    Recover(Common),
    /// Sign orbifold: invariants, generator search, Hilbert rewriting.
    Orbifold(Common),
    /// Generator growth of sign invariants in the differential polynomial algebra.
    Counterexample(Common),
    /// Ascending chains of ideals.
    Chain(Common),
}

#[derive(Args, Debug, Clone, Copy, PartialEq, Eq)]
struct Common {
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Diagonal level of the pairing, as p/q.
    #[arg(long, default_value = "1", value_parser = level_arg)]
    level: LevelArg,
    /// Degree cutoff (defaults depend on the command).
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    max_gen_degree: Option<usize>,
    #[arg(long)]
    max_pair_degree: Option<usize>,
    /// Exhaustive budget on the total degree of an identity tuple.
    #[arg(long)]
    max_total_degree: Option<usize>,
    /// Number of seeded random triples in `axioms`.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long)]
    random_max_degree: Option<usize>,
    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    side: SideArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Parallel)]
    strategy: StrategyArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideArg {
    Right,
    TwoSided,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Sequential,
    Parallel,
}

/// Level as a reduced fraction; kept as two integers so `Common` stays `Copy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelArg {
    numer: i64,
    denom: i64,
}

fn level_arg(text: &str) -> Result<LevelArg, String> {
    let s = parse_scalar(text).map_err(|e| e.to_string())?;
    let numer = i64::try_from(s.numer()).map_err(|_| "level numerator too large".to_string())?;
    let denom = i64::try_from(s.denom()).map_err(|_| "level denominator too large".to_string())?;
    if numer == 0 {
        return Err("level must be nonzero".into());
    }
    Ok(LevelArg { numer, denom })
}

impl LevelArg {
    fn scalar(self) -> Scalar {
        Scalar::new(self.numer.into(), self.denom.into())
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub rank: usize,
    pub level: String,
    pub cutoff: usize,
    pub seed: u64,
    pub max_gen_degree: usize,
    pub max_pair_degree: usize,
    pub max_total_degree: usize,
    pub samples: usize,
    pub random_max_degree: usize,
    pub side: SideArg,
    #[serde(skip)]
    pub strategy: StrategyArg,
}

impl RunConfig {
    pub fn model(&self, level: Scalar) -> voa_core::Result<Model> {
        Model::diagonal(self.rank, level, self.cutoff)
    }

    pub fn core_strategy(&self) -> voa_core::Strategy {
        match self.strategy {
            StrategyArg::Sequential => voa_core::Strategy::Sequential,
            StrategyArg::Parallel => voa_core::Strategy::Parallel,
        }
    }
}

fn default_cutoff(cmd: &Command) -> usize {
    match cmd {
        Command::Axioms(_) => 6,
        Command::Dims(_) => 10,
        Command::Li(_) => 8,
        Command::Ideal(_) => 10,
        Command::Recover(_) => 12,
        Command::Orbifold(_) => 10,
        Command::Counterexample(_) => 12,
        Command::Chain(_) => 10,
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Axioms(_) => "axioms",
            Command::Dims(_) => "dims",
            Command::Li(_) => "li",
            Command::Ideal(_) => "ideal",
            Command::Recover(_) => "recover",
            Command::Orbifold(_) => "orbifold",
            Command::Counterexample(_) => "counterexample",
            Command::Chain(_) => "chain",
        }
    }

    fn common(&self) -> Common {
        match *self {
            Command::Axioms(c)
            | Command::Dims(c)
            | Command::Li(c)
            | Command::Ideal(c)
            | Command::Recover(c)
            | Command::Orbifold(c)
            | Command::Counterexample(c)
            | Command::Chain(c) => c,
        }
    }
}

/// Outcome of one command: the JSON report and its table rendering.
pub struct Outcome {
    pub pass: bool,
    pub report: serde_json::Value,
    pub table: String,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("voa: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cmd = cli.command;
    let c = cmd.common();
    let cutoff = c.cutoff.unwrap_or_else(|| default_cutoff(&cmd));
    if cutoff < 2 {
        return usage("--cutoff must be at least 2");
    }
    if c.rank == 0 {
        return usage("--rank must be at least 1");
    }
    let level = c.level.scalar();
    let cfg = RunConfig {
        rank: c.rank,
        level: format_scalar(&level),
        cutoff,
        seed: c.seed,
        max_gen_degree: c.max_gen_degree.unwrap_or(4),
        max_pair_degree: c.max_pair_degree.unwrap_or(6),
        max_total_degree: c.max_total_degree.unwrap_or(cutoff - 1),
        samples: c.samples,
        random_max_degree: c.random_max_degree.unwrap_or(cutoff - 1),
        side: c.side,
        strategy: c.strategy,
    };
    let result = match cmd {
        Command::Axioms(_) => commands::axioms(&cfg, level),
        Command::Dims(_) => commands::dims(&cfg, level),
        Command::Li(_) => commands::li(&cfg, level),
        Command::Ideal(_) => commands::ideal(&cfg, level),
        Command::Recover(_) => commands::recover(&cfg, level),
        Command::Orbifold(_) => commands::orbifold(&cfg, level),
        Command::Counterexample(_) => commands::counterexample(&cfg),
        Command::Chain(_) => commands::chain(&cfg, level),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Error::CutoffExceeded { op, degree, cutoff }) => {
            eprintln!("voa: cutoff overflow in {op}: needs degree {degree}, cutoff is {cutoff}");
            return ExitCode::from(3);
        }
        Err(e @ (Error::Precondition(_) | Error::Parse(_) | Error::Structural(_))) => return usage(&e.to_string()),
        Err(e) => {
            eprintln!("voa: {e}");
            return ExitCode::from(1);
        }
    };
    let mut out = std::io::stdout().lock();
    let written = if c.json {
        let doc = serde_json::json!({
            "schema": 1,
            "command": cmd.name(),
            "config": cfg,
            "pass": outcome.pass,
            "report": outcome.report,
        });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes");
        writeln!(out, "{text}")
    } else {
        write!(out, "{}", outcome.table).and_then(|_| writeln!(out, "{}", if outcome.pass { "PASS" } else { "FAIL" }))
    };
    if written.is_err() {
        return ExitCode::from(1);
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
