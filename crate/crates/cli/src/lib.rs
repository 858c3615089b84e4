//! Batch front end: reads a `key = value` run configuration, runs scattering
//! sweeps, exceptional-point reports, regime tables or field maps, and
//! writes CSV or JSON.
//!
//! Exit codes: 0 success, 2 configuration/usage/I-O error, 3 numerical
//! failure (output is still written, failed values are NaN).

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_config, ConfigError, Format, RunConfig, Wavenumbers};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wavescat",
    version,
    about = "Scattering by a finite waveguide: sweeps, exceptional points, field maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; overrides `output.path`. Standard output when neither is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Reflection and transmission amplitudes over the angle grid.
    Scatter,
    /// Exceptional wavenumbers in the sweep range.
    EpReport,
    /// Field map over `output.field_box`.
    Field,
    /// Regime classification per wavenumber.
    Regimes,
}

/// What a successful command produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Completion {
    /// Files written, in order.
    pub written: Vec<PathBuf>,
    /// Values that failed numerically and were written as NaN.
    pub numerical_failures: usize,
}

enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    fn open(&self) -> Result<Box<dyn Write>, CliError> {
        match self {
            Sink::Stdout => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
            Sink::File(p) => File::create(p)
                .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
                .map_err(|e| io_err(p, e)),
        }
    }

    fn label(&self) -> String {
        match self {
            Sink::Stdout => "<stdout>".into(),
            Sink::File(p) => p.display().to_string(),
        }
    }
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `dir/stem.csv` → `dir/stem<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes via `f`, then flushes, tagging failures with the sink's name.
fn emit(sink: &Sink, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let mut out = sink.open()?;
    f(&mut out).and_then(|_| out.flush()).map_err(|source| CliError::Io {
        path: sink.label(),
        source,
    })
}

/// Runs `command` with an already parsed configuration.
pub fn execute(command: Command, cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<Completion, CliError> {
    let path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.path.as_ref().map(PathBuf::from));
    let sink = path.clone().map_or(Sink::Stdout, Sink::File);
    let mut done = Completion::default();
    match command {
        Command::Scatter => {
            if cfg.emit_field && path.is_none() {
                return Err(CliError::Usage(
                    "output.emit_field needs an output path (--out or output.path)".into(),
                ));
            }
            let report = commands::run_scatter(cfg);
            done.numerical_failures = report
                .runs
                .iter()
                .map(|r| {
                    if r.status == output::RunStatus::Failed {
                        r.failures.max(1)
                    } else {
                        r.failures
                    }
                })
                .sum();
            match (format, &path) {
                (Format::Json, _) => emit(&sink, |w| output::write_json(w, &report))?,
                (Format::Csv, None) => emit(&sink, |w| commands::write_scatter_csv(w, &report, None))?,
                (Format::Csv, Some(p)) => {
                    let side_path = sibling(p, ".deltas.csv");
                    let mut side = Vec::new();
                    emit(&sink, |w| commands::write_scatter_csv(w, &report, Some(&mut side)))?;
                    std::fs::write(&side_path, side).map_err(|e| io_err(&side_path, e))?;
                    done.written.push(side_path);
                }
            }
            if cfg.emit_field {
                let field = cfg.field.as_ref().expect("validated with emit_field");
                let ks = cfg.wavenumbers.values();
                for (j, &k) in ks.iter().enumerate() {
                    let suffix = if ks.len() == 1 { String::new() } else { format!("-{j}") };
                    let fpath = sibling(path.as_ref().unwrap(), &format!(".field{suffix}.{}", extension(format)));
                    let rep = commands::run_field(cfg, field, k)
                        .map_err(|e| CliError::Numerical(format!("field at k = {k}: {e}")))?;
                    done.numerical_failures += rep.failures;
                    write_field(&Sink::File(fpath.clone()), &rep, format)?;
                    done.written.push(fpath);
                }
            }
        }
        Command::EpReport => {
            let report = commands::run_ep_report(cfg).map_err(|msg| match cfg.wavenumbers {
                Wavenumbers::Single(_) => CliError::Usage(msg),
                Wavenumbers::Sweep { .. } => CliError::Numerical(msg),
            })?;
            match format {
                Format::Json => emit(&sink, |w| output::write_json(w, &report))?,
                Format::Csv => emit(&sink, |w| commands::write_ep_csv(w, &report))?,
            }
        }
        Command::Regimes => {
            let table = commands::run_regimes(cfg);
            match format {
                Format::Json => emit(&sink, |w| output::write_json(w, &table))?,
                Format::Csv => emit(&sink, |w| commands::write_regimes_csv(w, &table))?,
            }
        }
        Command::Field => {
            let Wavenumbers::Single(k) = cfg.wavenumbers else {
                return Err(CliError::Usage("field needs a single incidence.k".into()));
            };
            let Some(field) = &cfg.field else {
                return Err(CliError::Usage(
                    "field needs output.field_box and output.field_grid".into(),
                ));
            };
            let rep = commands::run_field(cfg, field, k).map_err(|e| CliError::Numerical(e.to_string()))?;
            done.numerical_failures = rep.failures;
            write_field(&sink, &rep, format)?;
        }
    }
    if let Some(p) = path {
        done.written.insert(0, p);
    }
    Ok(done)
}

fn write_field(sink: &Sink, rep: &output::FieldReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => emit(sink, |w| output::write_json(w, rep)),
        Format::Csv => emit(sink, |w| commands::write_field_csv(w, rep)),
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

fn run_cli(cli: &Cli) -> Result<Completion, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let cfg = load_config(path)?;
    let format = cli.format.as_deref().and_then(Format::parse).unwrap_or(cfg.format);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| execute(cli.command, &cfg, cli.out.as_deref(), format))
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_cli(&cli) {
        Ok(done) if done.numerical_failures > 0 => {
            eprintln!(
                "wavescat: {} value(s) failed numerically and were written as NaN",
                done.numerical_failures
            );
            EXIT_NUMERICAL
        }
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("wavescat: {e}");
            e.exit_code()
        }
    }
}
