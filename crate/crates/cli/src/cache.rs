//! On-disk cache of finished suite reports.
//!
//! Each entry is `<key>.json`, where the key is the SHA-256 of the job
//! descriptor and engine version. The file stores the report text next to
//! its own digest, so a damaged entry is detected on load, moved to
//! `quarantine/` and recomputed. One process writes at a time: the writer
//! holds `.lock`, and a second process falls back to read-only use.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde_json::json;
use sha2::{Digest, Sha256};
use voalab_core::report::VerificationReport;

pub const ENV_VAR: &str = "VOALAB_CACHE_DIR";
const LOCK: &str = ".lock";
const QUARANTINE: &str = "quarantine";

pub fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    writer: bool,
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Lookup {
    pub hit: bool,
    pub quarantined: bool,
}

impl Cache {
    /// Opens the directory, taking the writer lock if it is free.
    pub fn open(dir: &Path) -> io::Result<Cache> {
        fs::create_dir_all(dir)?;
        let writer = match fs::OpenOptions::new().write(true).create_new(true).open(dir.join(LOCK)) {
            Ok(_) => true,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => false,
            Err(e) => return Err(e),
        };
        Ok(Cache { dir: dir.to_path_buf(), writer })
    }

    pub fn is_writer(&self) -> bool {
        self.writer
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A valid entry refreshes its modification time (the LRU clock).
    pub fn get(&self, key: &str) -> io::Result<(Option<VerificationReport>, Lookup)> {
        let p = self.path(key);
        let text = match fs::read_to_string(&p) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((None, Lookup::default())),
            Err(e) => return Err(e),
        };
        let parsed = serde_json::from_str::<serde_json::Value>(&text).ok().and_then(|v| {
            let body = v.get("report")?.as_str()?.to_string();
            let d = v.get("digest")?.as_str()?.to_string();
            (digest(&body) == d).then_some(body)
        });
        let report = parsed.and_then(|b| serde_json::from_str::<VerificationReport>(&b).ok());
        match report {
            Some(r) => {
                fs::File::options().write(true).open(&p)?.set_modified(SystemTime::now())?;
                Ok((Some(r), Lookup { hit: true, quarantined: false }))
            }
            None => {
                let q = self.dir.join(QUARANTINE);
                fs::create_dir_all(&q)?;
                fs::rename(&p, q.join(format!("{key}.json")))?;
                Ok((None, Lookup { hit: false, quarantined: true }))
            }
        }
    }

    /// Writes through a temporary file; a no-op for read-only handles.
    pub fn put(&self, key: &str, report: &VerificationReport) -> io::Result<()> {
        if !self.writer {
            return Ok(());
        }
        let body = serde_json::to_string(report).map_err(io::Error::other)?;
        let entry = json!({ "key": key, "digest": digest(&body), "report": body });
        let tmp = self.dir.join(format!(".{key}.tmp"));
        fs::write(&tmp, serde_json::to_string(&entry).map_err(io::Error::other)?)?;
        fs::rename(tmp, self.path(key))
    }
}

impl Drop for Cache {
    fn drop(&mut self) {
        if self.writer {
            let _ = fs::remove_file(self.dir.join(LOCK));
        }
    }
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct GcSummary {
    pub entries: usize,
    pub bytes_before: u64,
    pub bytes_after: u64,
    pub evicted: Vec<String>,
}

/// Evicts least recently used entries until the total is at most
/// `max_bytes`. Refuses while a run holds the lock.
pub fn cache_gc(dir: &Path, max_bytes: u64) -> io::Result<GcSummary> {
    if !dir.exists() {
        return Ok(GcSummary::default());
    }
    if dir.join(LOCK).exists() {
        return Err(io::Error::new(io::ErrorKind::WouldBlock, format!("{} is locked by a running process", dir.display())));
    }
    let mut entries = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        let name = e.file_name().to_string_lossy().into_owned();
        if !e.file_type()?.is_file() || !name.ends_with(".json") {
            continue;
        }
        let m = e.metadata()?;
        entries.push((m.modified()?, name, m.len()));
    }
    entries.sort();
    let total: u64 = entries.iter().map(|e| e.2).sum();
    let mut s = GcSummary { entries: entries.len(), bytes_before: total, bytes_after: total, evicted: Vec::new() };
    for (_, name, len) in entries {
        if s.bytes_after <= max_bytes {
            break;
        }
        fs::remove_file(dir.join(&name))?;
        s.bytes_after -= len;
        s.evicted.push(name);
    }
    Ok(s)
}
