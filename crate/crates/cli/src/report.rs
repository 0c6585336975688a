//! Versioned, deterministic verification reports.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "moulds-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub name: String,
    pub anchor: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Wall time in milliseconds; only recorded with `--timings` so that
    /// reports stay byte-identical across runs by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub max_length: usize,
    pub max_degree: usize,
    pub gamma: String,
    pub seed: u64,
    pub suites: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho, mut checks: Vec<CheckReport>, data: Option<Value>) -> Self {
        checks.sort_by(|a, b| (&a.suite, &a.name).cmp(&(&b.suite, &b.name)));
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), skipped: count(Status::Skipped) };
        Report { schema: SCHEMA, command: command.into(), config, checks, data, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        out += &format!("{} (L={}, N={}, gamma={}, seed={})\n", self.command, c.max_length, c.max_degree, c.gamma, c.seed);
        for ch in &self.checks {
            let tag = match ch.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out += &format!("{tag}  {}/{}  — {}", ch.suite, ch.name, ch.anchor);
            if let Some(ms) = ch.wall_ms {
                out += &format!(" [{ms} ms]");
            }
            out.push('\n');
            if let Some(r) = &ch.reason {
                out += &format!("      reason: {r}\n");
            }
            if let Some(w) = &ch.witness {
                out += &format!("      witness: {w}\n");
            }
        }
        if let Some(d) = &self.data {
            out += &format!("data: {}\n", serde_json::to_string_pretty(d).expect("json"));
        }
        let s = &self.summary;
        out += &format!("{} passed, {} failed, {} skipped\n", s.pass, s.fail, s.skipped);
        out
    }
}
