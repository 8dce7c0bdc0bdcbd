//! Command-line front end. Exit codes: 0 when every enabled assertion
//! holds, 1 when some row fails (its id is printed), 2 on usage or
//! configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::{Config, ConfigError};
use crate::golden::{self, Golden};
use crate::rows::{self, Row};
use crate::suites::{self, Ctx, Suite};

#[derive(Debug, Parser)]
#[command(name = "sparsedom", version, about = "Evaluate weighted and sparse inequalities over a test matrix")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Test-matrix configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for rows.csv, report.json and plotdata/.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `functions.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `grid.level`.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Fill the runtime_ms column.
    #[arg(long, global = true)]
    pub record_timing: bool,
    /// Directory of golden cap files keyed by config hash.
    #[arg(long, global = true)]
    pub golden: Option<PathBuf>,
    /// Freeze this run's max ratios into the golden directory instead of
    /// checking against it.
    #[arg(long, global = true, requires = "golden")]
    pub write_golden: bool,
}

#[derive(Debug, Subcommand, Clone, PartialEq)]
pub enum Command {
    /// A_p duality and A_p / A_1 / A_∞ comparisons.
    Weights,
    /// Kernel conditions against the approximation to the identity.
    Assumptions,
    /// Maximal-operator comparisons and grand maximal bounds.
    Maximal,
    /// Sparse domination runs.
    Dominate,
    /// Strong-type weighted bounds.
    Bounds,
    /// Weak-type endpoint estimates.
    Endpoints,
    /// Sparse-form inequalities.
    SparseForms,
    /// Every suite, or re-summarize an existing rows.csv with --rows.
    Report {
        #[arg(long)]
        rows: Option<PathBuf>,
    },
}

impl Command {
    fn suites(&self) -> Vec<Suite> {
        match self {
            Command::Weights => vec![Suite::Weights],
            Command::Assumptions => vec![Suite::Assumptions],
            Command::Maximal => vec![Suite::Maximal],
            Command::Dominate => vec![Suite::Dominate],
            Command::Bounds => vec![Suite::Bounds],
            Command::Endpoints => vec![Suite::Endpoints],
            Command::SparseForms => vec![Suite::SparseForms],
            Command::Report { .. } => Suite::ALL.to_vec(),
        }
    }
}

enum Failure {
    Config(ConfigError),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

/// Load, override and validate the configuration.
pub fn load_config(cli: &Cli) -> Result<(Config, Vec<u8>), ConfigError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError {
        line: None,
        column: None,
        field: None,
        message: "missing --config <path>".into(),
    })?;
    let (mut cfg, bytes) = Config::load(path)?;
    if let Some(l) = cli.level {
        cfg.grid.level = l;
        cfg.validate()?;
    }
    Ok((cfg, bytes))
}

fn caps_for(cfg_caps: &BTreeMap<String, f64>, golden: Option<&Golden>, level: u32) -> BTreeMap<String, f64> {
    let mut caps = cfg_caps.clone();
    if let Some(t) = golden.and_then(|g| g.caps.get(&level)) {
        caps.extend(t.iter().map(|(k, v)| (k.clone(), *v)));
    }
    caps
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let (rows, caps, hash) = match (&cli.command, &cli.config) {
        (Command::Report { rows: Some(path) }, cfg_path) => {
            let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let rows = rows::from_csv(&text)?;
            let caps = match cfg_path {
                Some(_) => load_config(cli).map_err(Failure::Config)?.0.caps,
                None => BTreeMap::new(),
            };
            (rows, caps, None)
        }
        _ => {
            let (cfg, bytes) = load_config(cli).map_err(Failure::Config)?;
            let hash = golden::config_hash(&bytes);
            let seed = cli.seed.unwrap_or(cfg.functions.seed);
            let level = cfg.grid.level;
            let cfg_caps = cfg.caps.clone();
            let ctx = Ctx::new(cfg, seed)?;
            let rows = suites::run(&ctx, &cli.command.suites(), cli.threads, cli.record_timing)?;
            let mut golden_file = None;
            if let Some(dir) = &cli.golden {
                if cli.write_golden {
                    let mut g = golden::load(dir, &hash)?.unwrap_or_else(|| Golden {
                        config_sha256: hash.clone(),
                        ..Golden::default()
                    });
                    golden::freeze(&mut g, level, &rows);
                    let path = golden::store(dir, &g)?;
                    writeln!(stderr, "froze caps for level {level} into {}", path.display()).ok();
                } else {
                    golden_file = golden::load(dir, &hash)?;
                    if golden_file.is_none() {
                        writeln!(stderr, "no golden caps for config {hash}").ok();
                    }
                }
            }
            let caps = caps_for(&cfg_caps, golden_file.as_ref(), level);
            (rows, caps, Some(hash))
        }
    };
    finish(cli, &rows, &caps, hash, stdout, stderr)
}

fn finish(
    cli: &Cli,
    rows: &[Row],
    caps: &BTreeMap<String, f64>,
    hash: Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let report = rows::summarize(rows, caps, hash);
    if let Some(dir) = &cli.out {
        rows::write_outputs(dir, rows, &report)?;
    }
    for (id, s) in &report.summary {
        let cap = s.cap.map_or("-".to_string(), |c| c.to_string());
        writeln!(
            stdout,
            "{id:<36} rows={:<5} max_ratio={:<12.6e} cap={cap:<8} failures={}",
            s.rows, s.max_ratio, s.failures
        )
        .ok();
    }
    if report.failures.is_empty() {
        return Ok(0);
    }
    for f in &report.failures {
        writeln!(stderr, "FAIL {} [{}] row {}: {}", f.id, f.case, f.row, f.reason).ok();
    }
    Ok(1)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                write!(stdout, "{text}").ok();
            } else {
                write!(stderr, "{text}").ok();
            }
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            writeln!(stderr, "{e}").ok();
            2
        }
        Err(Failure::Other(e)) => {
            writeln!(stderr, "error: {e:#}").ok();
            1
        }
    }
}
