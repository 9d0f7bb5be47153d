//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::state::State;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportItem {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    /// `computed − expected` for failing identities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<State>,
    /// Wall-clock milliseconds; `None` unless timings were requested, which
    /// keeps default reports byte-for-byte reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// A generator whose sign was flipped once to match a displayed identity
/// under the fixed cocycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignAdjustment {
    pub generator: String,
    pub factor: i64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub engine_version: String,
    pub config: BTreeMap<String, String>,
    pub sign_adjustments: Vec<SignAdjustment>,
    pub notes: Vec<String>,
    pub items: Vec<ReportItem>,
}

impl VerificationReport {
    pub fn new(suite: &str) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            engine_version: ENGINE_VERSION.to_string(),
            config: BTreeMap::new(),
            sign_adjustments: Vec::new(),
            notes: Vec::new(),
            items: Vec::new(),
        }
    }

    pub fn with_config(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| i.status == Status::Fail)
    }

    pub fn count(&self, s: Status) -> usize {
        self.items.iter().filter(|i| i.status == s).count()
    }

    pub fn push(&mut self, item: ReportItem) {
        self.items.push(item);
    }

    /// Records a boolean check.
    pub fn check(&mut self, id: &str, anchor: &str, ok: bool, detail: impl Into<Option<String>>) {
        self.items.push(ReportItem {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            witness: None,
            difference: None,
            elapsed_ms: None,
        });
    }

    /// Records an exact State identity; the difference is kept on failure.
    pub fn check_eq(&mut self, id: &str, anchor: &str, got: &State, want: &State) -> bool {
        let diff = got.minus(want);
        let ok = diff.is_zero();
        self.items.push(ReportItem {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: None,
            witness: None,
            difference: (!ok).then_some(diff),
            elapsed_ms: None,
        });
        ok
    }

    pub fn skip(&mut self, id: &str, anchor: &str, why: &str) {
        self.items.push(ReportItem {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Skipped,
            detail: Some(why.to_string()),
            witness: None,
            difference: None,
            elapsed_ms: None,
        });
    }

    /// Attaches a witness to the most recent item.
    pub fn attach_witness(&mut self, w: serde_json::Value) {
        if let Some(last) = self.items.last_mut() {
            last.witness = Some(w);
        }
    }

    pub fn attach_detail(&mut self, d: String) {
        if let Some(last) = self.items.last_mut() {
            last.detail = Some(d);
        }
    }

    /// Appends the items and notes of another report under a prefix.
    pub fn absorb(&mut self, other: VerificationReport) {
        let prefix = other.suite.clone();
        for mut it in other.items {
            it.id = format!("{prefix}/{}", it.id);
            self.items.push(it);
        }
        self.notes.extend(other.notes);
        for s in other.sign_adjustments {
            if !self.sign_adjustments.contains(&s) {
                self.sign_adjustments.push(s);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// One line per item, for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} pass, {} fail, {} skipped\n",
            self.suite,
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        );
        for it in &self.items {
            let tag = match it.status {
                Status::Pass => "ok  ",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            s.push_str(&format!("  [{tag}] {}", it.id));
            if let Some(d) = &it.detail {
                s.push_str(&format!(" ({d})"));
            }
            s.push('\n');
        }
        s
    }
}

/// Times a closure and stores the elapsed time on the items it appended.
pub fn timed<T>(report: &mut VerificationReport, enabled: bool, f: impl FnOnce(&mut VerificationReport) -> T) -> T {
    let start = Instant::now();
    let before = report.items.len();
    let out = f(report);
    if enabled {
        let ms = start.elapsed().as_millis() as u64;
        for it in &mut report.items[before..] {
            it.elapsed_ms = Some(ms);
        }
    }
    out
}
