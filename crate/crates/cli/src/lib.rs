//! Suite orchestration behind the `voalab` binary.

pub mod cache;
pub mod config;

use std::fmt;
use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use voalab_core::lattice::{qi, Q};
use voalab_core::report::{timed, VerificationReport, ENGINE_VERSION};
use voalab_core::{affine2, amodules, n4, zhu, Error};

pub use cache::{cache_gc, Cache, GcSummary};
pub use config::{ConfigError, Format, RunConfig, Suite};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Engine(Error),
    Io(io::Error),
}

impl RunError {
    /// 2 for bad input (including violated hypotheses), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Engine(Error::Precondition(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Engine(e) => write!(f, "engine error: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Engine(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// One unit of work; `params` doubles as the cache descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub suite: Suite,
    pub params: Vec<(String, String)>,
}

impl Job {
    fn new(suite: Suite, params: &[(&str, String)]) -> Self {
        Job { suite, params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect() }
    }

    pub fn key(&self) -> String {
        let p: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        cache::digest(&format!("{ENGINE_VERSION}|{}|{}", self.suite, p.join(";")))
    }

    fn get(&self, k: &str) -> Q {
        let v = &self.params.iter().find(|(n, _)| n == k).expect("job parameter").1;
        config::parse_rational(v).expect("job parameters are canonical rationals")
    }
}

/// The deterministic job list for a configuration.
pub fn plan(c: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &s in &c.suites {
        let cut = ("cutoff", c.cutoff(s).to_string());
        let w = ("window", c.window.to_string());
        match s {
            Suite::N4 | Suite::Coset => jobs.push(Job::new(s, &[cut])),
            Suite::Zhu => {
                for m in &c.mu {
                    jobs.push(Job::new(s, &[cut.clone(), ("mu", m.to_string())]));
                }
            }
            Suite::Modules | Suite::A2 => {
                for r in &c.r {
                    for m in &c.mu {
                        let mut p = vec![cut.clone(), w.clone(), ("r", r.to_string()), ("mu", m.to_string())];
                        if s == Suite::Modules {
                            p.push(("samples", c.samples.to_string()));
                            let l: Vec<String> = c.lambda.iter().map(|x| x.to_string()).collect();
                            p.push(("lambda", l.join(",")));
                        }
                        jobs.push(Job::new(s, &p));
                    }
                }
            }
            Suite::Characters => {
                for r in &c.r {
                    jobs.push(Job::new(s, &[cut.clone(), w.clone(), ("r", r.to_string())]));
                }
            }
        }
    }
    jobs
}

/// Runs one job against the engine.
pub fn execute(job: &Job, timings: bool) -> Result<VerificationReport, Error> {
    let cut = job.get("cutoff");
    let mut rep = VerificationReport::new(job.suite.name());
    for (k, v) in &job.params {
        rep.config.insert(k.clone(), v.clone());
    }
    match job.suite {
        Suite::N4 => {
            timed(&mut rep, timings, |r| r.absorb(n4::verify_n4_table()));
            timed(&mut rep, timings, |r| r.absorb(n4::verify_n2_vectors()));
            timed(&mut rep, timings, |r| r.absorb(n4::verify_lemma_c()));
            timed(&mut rep, timings, |r| r.absorb(n4::verify_wakimoto()));
            timed(&mut rep, timings, |r| r.absorb(n4::verify_kernel_characterization(cut)));
        }
        Suite::Zhu => {
            let ctx = zhu::ZhuContext::new(job.get("mu"), cut)?;
            let z = timed(&mut rep, timings, |_| zhu::zhu_relation_suite(&ctx))?;
            rep.absorb(z);
        }
        Suite::Modules => {
            let (r, mu) = (job.get("r"), job.get("mu"));
            let samples: usize = job.params.iter().find(|(k, _)| k == "samples").and_then(|(_, v)| v.parse().ok()).unwrap_or(20);
            let window: i64 = job.params.iter().find(|(k, _)| k == "window").and_then(|(_, v)| v.parse().ok()).unwrap_or(6);
            let tf = amodules::ModuleDescriptor::twisted_fock(mu);
            let sf = amodules::ModuleDescriptor::spectral_flow(r, mu);
            let parts: Vec<Box<dyn Fn() -> Result<VerificationReport, Error>>> = vec![
                Box::new(|| amodules::verify_lowest_component(&amodules::ModuleDescriptor::relaxed(r), -5..=5)),
                Box::new(|| Ok(amodules::verify_character(r, cut, window))),
                Box::new(|| amodules::verify_lowest_component(&tf, 0..=5)),
                Box::new(|| amodules::verify_lowest_component(&sf, -5..=5)),
                Box::new(|| amodules::commutator_samples(&tf, samples)),
                Box::new(|| amodules::commutator_samples(&sf, samples)),
            ];
            for p in parts {
                let sub = timed(&mut rep, timings, |_| p())?;
                rep.absorb(sub);
            }
            let lambdas = job.params.iter().find(|(k, _)| k == "lambda").map(|(_, v)| v.clone()).unwrap_or_default();
            for l in lambdas.split(',').filter(|s| !s.is_empty()) {
                let l = config::parse_rational(l).map_err(|e| Error::Parse(e.0))?;
                let (_, log) = timed(&mut rep, timings, |_| amodules::log_deform(l, qi(2)))?;
                rep.absorb(log);
                let ext = timed(&mut rep, timings, |_| amodules::extension_check(l, qi(2)))?;
                rep.absorb(ext);
            }
        }
        Suite::A2 => {
            let window: i64 = job.params.iter().find(|(k, _)| k == "window").and_then(|(_, v)| v.parse().ok()).unwrap_or(3);
            let a = timed(&mut rep, timings, |_| affine2::a2_suite(job.get("r"), job.get("mu"), window, cut.max(qi(3))))?;
            rep.absorb(a);
        }
        Suite::Coset => {
            let c = timed(&mut rep, timings, |_| affine2::coset_dims(cut))?;
            rep.absorb(c);
        }
        Suite::Characters => {
            let window: i64 = job.params.iter().find(|(k, _)| k == "window").and_then(|(_, v)| v.parse().ok()).unwrap_or(6);
            timed(&mut rep, timings, |r| r.absorb(amodules::verify_character(job.get("r"), cut, window)));
        }
    }
    Ok(rep)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<VerificationReport>,
    pub cache_hits: usize,
    pub quarantined: usize,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed())
    }

    /// 0 iff every item of every report passed.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let reports: Vec<serde_json::Value> = self.reports.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
        serde_json::to_string_pretty(&json!({ "engine_version": ENGINE_VERSION, "reports": reports })).expect("serializable")
    }
}

/// Cache directory: explicit setting, then the environment, then the
/// config file.
pub fn resolve_cache_dir(flag: Option<PathBuf>, c: &RunConfig) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(cache::ENV_VAR).map(PathBuf::from)).or_else(|| c.cache_dir.clone())
}

pub fn run(c: &RunConfig) -> Result<RunOutcome, RunError> {
    c.validate()?;
    if c.suites.is_empty() {
        return Err(ConfigError("no suites selected".into()).into());
    }
    let jobs = plan(c);
    // Timed reports are never cached; they would not be reproducible.
    let cache = match (&c.cache_dir, c.timings) {
        (Some(d), false) => Some(Cache::open(d)?),
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(c.jobs).build().map_err(|e| io::Error::other(e.to_string()))?;
    let results: Vec<Result<(VerificationReport, cache::Lookup), RunError>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let key = job.key();
                let mut lookup = cache::Lookup::default();
                if let Some(cache) = &cache {
                    let (hit, l) = cache.get(&key)?;
                    lookup = l;
                    if let Some(r) = hit {
                        return Ok((r, lookup));
                    }
                }
                let r = execute(job, c.timings)?;
                if let Some(cache) = &cache {
                    cache.put(&key, &r)?;
                }
                Ok((r, lookup))
            })
            .collect()
    });
    let mut out = RunOutcome { reports: Vec::new(), cache_hits: 0, quarantined: 0 };
    for r in results {
        let (rep, l) = r?;
        out.cache_hits += usize::from(l.hit);
        out.quarantined += usize::from(l.quarantined);
        out.reports.push(rep);
    }
    Ok(out)
}
