use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use voalab_cli::config::{parse_rational, parse_suites};
use voalab_cli::{cache_gc, resolve_cache_dir, run, Format, RunConfig, RunError, Suite};
use voalab_core::lattice::Q;
use voalab_core::{affine2, amodules};

#[derive(Parser)]
#[command(name = "voalab", version, about = "Exact verification of the N=4 (c=-9) and A2 (k=-3/2) free field realizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites: n4, zhu, modules, a2, coset, characters or all.
    Verify {
        #[arg(required = true, num_args = 1..)]
        suites: Vec<String>,
        /// Flat key = value config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        /// Weight cutoff for every selected suite.
        #[arg(long)]
        max_weight: Option<String>,
        #[arg(long)]
        window: Option<i64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
        /// Also write the character tables as CSV (characters suite).
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        jobs: Option<usize>,
        /// Suppress the per-item summary on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Bigraded dimensions of M(r) by (L0 weight, h0 charge).
    Character {
        #[arg(long)]
        r: String,
        #[arg(long)]
        max_weight: String,
        #[arg(long, default_value_t = 6)]
        window: i64,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lowest-component zero-mode matrices of a module.
    Lowest {
        #[arg(long, value_enum)]
        module: ModuleArg,
        #[arg(long, default_value = "1/2")]
        r: String,
        #[arg(long, default_value = "1/3")]
        mu: String,
        #[arg(long, default_value_t = 5)]
        window: i64,
    },
    /// Evict least recently used cache entries down to a byte budget.
    CacheGc {
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        max_bytes: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModuleArg {
    Relaxed,
    TwistedFock,
    SpectralFlow,
    Ls,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("voalab: {msg}");
    ExitCode::from(code)
}

fn rational(s: &str) -> Result<Q, ExitCode> {
    parse_rational(s).map_err(|e| fail(2, e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| fail(1, format!("{}: {e}", p.display()))),
        // a closed pipe (`voalab ... | head`) is not an error
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(fail(1, e)),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(c) | Err(c) => c,
    }
}

fn real_main(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Verify { suites, config, mu, r, lambda, max_weight, window, samples, cache_dir, no_cache, out, timings, csv, jobs, quiet } => {
            let mut c = match &config {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| fail(2, format!("{}: {e}", p.display())))?;
                    RunConfig::parse(&text).map_err(|e| fail(2, e))?
                }
                None => RunConfig::default(),
            };
            c.suites = parse_suites(&suites.join(",")).map_err(|e| fail(2, e))?;
            for (k, v) in [("mu", mu), ("r", r), ("lambda", lambda)] {
                if let Some(v) = v {
                    c.set(k, &v).map_err(|e| fail(2, e))?;
                }
            }
            if let Some(w) = max_weight {
                let w = rational(&w)?;
                for s in c.suites.clone() {
                    c.cutoffs.insert(s, w);
                }
            }
            c.window = window.unwrap_or(c.window);
            c.samples = samples.unwrap_or(c.samples);
            c.jobs = jobs.unwrap_or(c.jobs);
            c.timings |= timings;
            if csv {
                c.format = Format::Csv;
            }
            c.cache_dir = if no_cache { None } else { resolve_cache_dir(cache_dir, &c) };
            if out.is_some() {
                c.output = out;
            }
            let outcome = run(&c).map_err(|e: RunError| fail(e.exit_code() as u8, e))?;
            if !quiet {
                for r in &outcome.reports {
                    eprint!("{}", r.summary());
                }
            }
            emit(&c.output, &outcome.to_json())?;
            if c.format == Format::Csv && c.suites.contains(&Suite::Characters) {
                let csv_path = c.output.as_ref().map(|p| p.with_extension("csv"));
                let mut text = String::new();
                for r in &c.r {
                    let ch = amodules::bigraded_dims(&amodules::ModuleDescriptor::relaxed(*r), c.cutoff(Suite::Characters), c.window);
                    text.push_str(&format!("# r = {r}\n{}", ch.to_csv()));
                }
                emit(&csv_path, text.trim_end())?;
            }
            Ok(ExitCode::from(outcome.exit_code() as u8))
        }
        Command::Character { r, max_weight, window, format, out } => {
            let (r, w) = (rational(&r)?, rational(&max_weight)?);
            if w <= Q::from_integer(0) || !(w * 2).is_integer() || window < 0 {
                return Err(fail(2, "max-weight must be a positive half-integer and window non-negative"));
            }
            let ch = amodules::bigraded_dims(&amodules::ModuleDescriptor::relaxed(r), w, window);
            let text = match format {
                OutFormat::Csv => ch.to_csv(),
                OutFormat::Json => serde_json::to_string_pretty(&ch.to_json()).expect("serializable"),
            };
            emit(&out, text.trim_end())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lowest { module, r, mu, window } => {
            let (r, mu) = (rational(&r)?, rational(&mu)?);
            let value = match module {
                ModuleArg::Ls => {
                    let m = affine2::eij_matrices(r, mu, window).map_err(|e| fail(1, e))?;
                    serde_json::to_value(m)
                }
                m => {
                    let (d, range) = match m {
                        ModuleArg::Relaxed => (amodules::ModuleDescriptor::relaxed(r), -window..=window),
                        ModuleArg::TwistedFock => (amodules::ModuleDescriptor::twisted_fock(mu), 0..=window),
                        _ => (amodules::ModuleDescriptor::spectral_flow(r, mu), -window..=window),
                    };
                    for w in d.hypothesis_warnings() {
                        eprintln!("voalab: warning: {w}");
                    }
                    let lc = amodules::lowest_component(&d, range).map_err(|e| fail(1, e))?;
                    serde_json::to_value(lc)
                }
            };
            emit(&None, &serde_json::to_string_pretty(&value.expect("serializable")).expect("serializable"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CacheGc { cache_dir, max_bytes } => {
            let Some(dir) = resolve_cache_dir(cache_dir, &RunConfig::default()) else {
                return Err(fail(2, "no cache directory given (use --cache-dir or VOALAB_CACHE_DIR)"));
            };
            let s = cache_gc(&dir, max_bytes).map_err(|e| fail(1, e))?;
            emit(&None, &format!("{} entries, {} -> {} bytes, evicted {}", s.entries, s.bytes_before, s.bytes_after, s.evicted.len()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
