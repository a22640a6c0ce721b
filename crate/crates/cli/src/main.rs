use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use paley_esh::hierarchy::{BoundKind, Mode};
use paley_esh_cli::config::{self, Command, GraphScope, Overrides, TableMode, ThetaFlavor, THREADS_ENV};
use paley_esh_cli::{run, CliError, Format};

/// Upper bounds on the stability number of Paley graphs.
#[derive(Parser)]
#[command(name = "paley-esh", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format (edgelist for `paley`, csv for `bounds` and `table`).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for heuristic search and sampled verification.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableModeArg {
    Exhaustive,
    Heuristic,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Esh,
    Vtesh,
}

#[derive(Args)]
struct LevelArgs {
    q: u64,
    #[arg(long)]
    level: usize,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Separation cycles in heuristic mode.
    #[arg(long)]
    cycles: Option<usize>,
    /// New cuts per heuristic cycle.
    #[arg(long)]
    max_cuts: Option<usize>,
    /// Subset evaluations per heuristic separation.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Export the Paley graph P_q.
    Paley { q: u64 },
    /// Stability number by exhaustive search.
    Alpha { q: u64 },
    /// Lovász theta or Schrijver's theta of P_q or its local graph.
    Theta {
        q: u64,
        #[arg(long, value_enum, default_value = "lovasz")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "full")]
        graph: ScopeArg,
    },
    /// Table of bounds, one row per q.
    Bounds {
        /// Comma-separated orders or ranges such as 5..101.
        #[arg(long)]
        q: String,
    },
    /// Exact subgraph hierarchy level z_k(P_q).
    Esh(LevelArgs),
    /// Vertex-transitive hierarchy level z'_k(P_q).
    Vtesh(LevelArgs),
    /// Check the closed-form theta solution against every ESC it should satisfy.
    Verify {
        q: u64,
        /// Check only this level, also beyond the stagnation theorems.
        #[arg(long)]
        level: Option<usize>,
        /// Subsets sampled when a level is too large to enumerate.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Batch hierarchy values over a range of q and levels.
    Table {
        #[arg(long)]
        q_range: String,
        #[arg(long)]
        levels: String,
        #[arg(long, value_enum, default_value = "vtesh")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "auto")]
        mode: TableModeArg,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        max_cuts: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Lovasz,
    Schrijver,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Full,
    Local,
}

fn level_overrides(a: &LevelArgs) -> Overrides {
    Overrides {
        mode: a.mode.map(|m| match m {
            ModeArg::Exhaustive => Mode::Exhaustive,
            ModeArg::Heuristic => Mode::Heuristic,
        }),
        cycles: a.cycles,
        max_cuts: a.max_cuts,
        budget: a.budget,
        ..Overrides::default()
    }
}

fn build(cli: Cli) -> Result<paley_esh_cli::RunConfig, CliError> {
    let (command, specific) = match cli.command {
        Cmd::Paley { q } => (Command::Paley { q }, Overrides::default()),
        Cmd::Alpha { q } => (Command::Alpha { q }, Overrides::default()),
        Cmd::Theta { q, variant, graph } => (
            Command::Theta {
                q,
                variant: match variant {
                    VariantArg::Lovasz => ThetaFlavor::Lovasz,
                    VariantArg::Schrijver => ThetaFlavor::Schrijver,
                },
                graph: match graph {
                    ScopeArg::Full => GraphScope::Full,
                    ScopeArg::Local => GraphScope::Local,
                },
            },
            Overrides::default(),
        ),
        Cmd::Bounds { q } => (
            Command::Bounds {
                qs: config::parse_q_list(&q)?,
            },
            Overrides::default(),
        ),
        Cmd::Esh(a) => (Command::Esh { q: a.q, level: a.level }, level_overrides(&a)),
        Cmd::Vtesh(a) => (Command::Vtesh { q: a.q, level: a.level }, level_overrides(&a)),
        Cmd::Verify { q, level, samples } => (
            Command::Verify { q, level },
            Overrides {
                samples,
                ..Overrides::default()
            },
        ),
        Cmd::Table {
            q_range,
            levels,
            kind,
            mode,
            cycles,
            max_cuts,
            budget,
        } => (
            Command::Table {
                qs: config::parse_q_list(&q_range)?,
                levels: config::parse_levels(&levels)?,
                kind: match kind {
                    KindArg::Esh => BoundKind::Esh,
                    KindArg::Vtesh => BoundKind::Vtesh,
                },
                mode: match mode {
                    TableModeArg::Exhaustive => TableMode::Exhaustive,
                    TableModeArg::Heuristic => TableMode::Heuristic,
                    TableModeArg::Auto => TableMode::Auto,
                },
            },
            Overrides {
                cycles,
                max_cuts,
                budget,
                ..Overrides::default()
            },
        ),
    };
    let c = cli.common;
    let flags = Overrides {
        format: c.format.map(|f| match f {
            FormatArg::Edgelist => Format::Edgelist,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        }),
        out: c.out,
        seed: c.seed,
        threads: c.threads,
        ..specific
    };
    let file = match &c.config {
        Some(p) => config::load_config_file(p)?,
        None => Overrides::default(),
    };
    let env = config::threads_from_env(std::env::var(THREADS_ENV).ok().as_deref())?;
    config::resolve(command, flags, file, env)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli).and_then(|cfg| {
        if cfg.threads > 0 {
            paley_esh::par::set_threads(cfg.threads);
        }
        let outcome = run(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, &outcome.body)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(outcome.body.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => {
            if code == paley_esh_cli::EXIT_VERIFICATION {
                eprintln!("paley-esh: verification failed");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("paley-esh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
