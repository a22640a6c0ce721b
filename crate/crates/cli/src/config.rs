//! Run configuration: command-line flags layered over a `key = value`
//! config file, the thread environment variable and defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use paley_esh::hierarchy::{BoundKind, HierarchyConfig, Mode};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20250101;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const THREADS_ENV: &str = "PALEY_ESH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Edgelist,
    Csv,
    Json,
    Text,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "edgelist" => Ok(Format::Edgelist),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(CliError::Input(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaFlavor {
    Lovasz,
    Schrijver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphScope {
    Full,
    Local,
}

/// Mode for batch tables; `Auto` picks exhaustive whenever it fits the guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    Exhaustive,
    Heuristic,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    Paley { q: u64 },
    Alpha { q: u64 },
    Theta { q: u64, variant: ThetaFlavor, graph: GraphScope },
    Bounds { qs: Vec<u64> },
    Esh { q: u64, level: usize },
    Vtesh { q: u64, level: usize },
    Verify { q: u64, level: Option<usize> },
    Table { qs: Vec<u64>, levels: Vec<usize>, kind: BoundKind, mode: TableMode },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Paley { .. } => "paley",
            Command::Alpha { .. } => "alpha",
            Command::Theta { .. } => "theta",
            Command::Bounds { .. } => "bounds",
            Command::Esh { .. } => "esh",
            Command::Vtesh { .. } => "vtesh",
            Command::Verify { .. } => "verify",
            Command::Table { .. } => "table",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Paley { .. } => Format::Edgelist,
            Command::Bounds { .. } | Command::Table { .. } => Format::Csv,
            _ => Format::Text,
        }
    }

    fn accepts(&self, f: Format) -> bool {
        match f {
            Format::Json | Format::Text => true,
            Format::Edgelist => matches!(self, Command::Paley { .. }),
            Format::Csv => matches!(self, Command::Bounds { .. } | Command::Table { .. }),
        }
    }
}

/// Hierarchy knobs shared by `esh`, `vtesh` and `table`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub mode: Mode,
    pub cycles: usize,
    pub max_cuts: usize,
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        let d = HierarchyConfig::default();
        Self {
            mode: Mode::Exhaustive,
            cycles: d.cycles,
            max_cuts: d.max_new_cuts_per_cycle,
            budget: d.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads; `0` leaves the pool at its default size.
    pub threads: usize,
    pub search: SearchOptions,
    pub samples: usize,
}

impl RunConfig {
    pub fn hierarchy(&self, level: usize, mode: Mode) -> HierarchyConfig {
        HierarchyConfig {
            level,
            mode,
            cycles: self.search.cycles,
            max_new_cuts_per_cycle: self.search.max_cuts,
            budget: self.search.budget,
            seed: self.seed,
            execution: crate::execution(self.threads),
            ..HierarchyConfig::default()
        }
    }
}

/// Settings that can come from flags or the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub mode: Option<Mode>,
    pub cycles: Option<usize>,
    pub max_cuts: Option<usize>,
    pub budget: Option<usize>,
    pub samples: Option<usize>,
}

impl Overrides {
    /// Fields set in `self` win over those in `other`.
    pub fn or(self, other: Overrides) -> Overrides {
        Overrides {
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            seed: self.seed.or(other.seed),
            threads: self.threads.or(other.threads),
            mode: self.mode.or(other.mode),
            cycles: self.cycles.or(other.cycles),
            max_cuts: self.max_cuts.or(other.max_cuts),
            budget: self.budget.or(other.budget),
            samples: self.samples.or(other.samples),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, CliError> {
    match s {
        "exhaustive" => Ok(Mode::Exhaustive),
        "heuristic" => Ok(Mode::Heuristic),
        _ => Err(CliError::Input(format!("unknown mode {s:?}"))),
    }
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Input(format!("config key {key}: cannot parse {v:?}")))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Overrides, CliError> {
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", lineno + 1)))?;
        seen.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    let mut o = Overrides::default();
    for (k, v) in &seen {
        match k.as_str() {
            "format" => o.format = Some(v.parse()?),
            "out" => o.out = Some(PathBuf::from(v)),
            "seed" => o.seed = Some(number(k, v)?),
            "threads" => o.threads = Some(number(k, v)?),
            "mode" => o.mode = Some(parse_mode(v)?),
            "cycles" => o.cycles = Some(number(k, v)?),
            "max_cuts" => o.max_cuts = Some(number(k, v)?),
            "budget" => o.budget = Some(number(k, v)?),
            "samples" => o.samples = Some(number(k, v)?),
            _ => return Err(CliError::Input(format!("unknown config key {k:?}"))),
        }
    }
    Ok(o)
}

pub fn load_config_file(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, CliError> {
    value
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{THREADS_ENV}: cannot parse {v:?}")))
        })
        .transpose()
}

/// Flags over file over environment over defaults.
pub fn resolve(command: Command, flags: Overrides, file: Overrides, env_threads: Option<usize>) -> Result<RunConfig, CliError> {
    let o = flags.or(file);
    let format = o.format.unwrap_or_else(|| command.default_format());
    if !command.accepts(format) {
        return Err(CliError::Input(format!(
            "format {} is not available for {}",
            serde_json::to_string(&format).unwrap_or_default().trim_matches('"'),
            command.name()
        )));
    }
    let d = SearchOptions::default();
    Ok(RunConfig {
        format,
        out: o.out,
        seed: o.seed.unwrap_or(DEFAULT_SEED),
        threads: o.threads.or(env_threads).unwrap_or(0),
        search: SearchOptions {
            mode: o.mode.unwrap_or(d.mode),
            cycles: o.cycles.unwrap_or(d.cycles),
            max_cuts: o.max_cuts.unwrap_or(d.max_cuts),
            budget: o.budget.unwrap_or(d.budget),
        },
        samples: o.samples.unwrap_or(DEFAULT_SAMPLES),
        command,
    })
}

/// Comma-separated items, each `q` or an inclusive range `a..b`; ranges keep
/// only valid Paley orders.
pub fn parse_q_list(s: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = number("q", a.trim())?;
            let b: u64 = number("q", b.trim().trim_start_matches('='))?;
            out.extend((a..=b).filter(|&q| crate::is_paley_order(q)));
        } else {
            out.push(number("q", item)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("no orders in {s:?}")));
    }
    Ok(out)
}

/// `a..b` (inclusive) or a comma list.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, CliError> {
    let levels: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = number("levels", a.trim())?;
        let b: usize = number("levels", b.trim().trim_start_matches('='))?;
        (a..=b).collect()
    } else {
        s.split(',').map(|t| number("levels", t.trim())).collect::<Result<_, _>>()?
    };
    if levels.is_empty() || levels.contains(&0) {
        return Err(CliError::Input(format!("bad level list {s:?}")));
    }
    Ok(levels)
}
