//! Verification reports.
//!
//! The machine format is pretty-printed JSON with `"schema":
//! "courant-report/1"`. It holds no timing or host information, so a fixed
//! seed and input give byte-identical output. The text format is for people
//! and may carry the elapsed time.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::courant::Verdict;

pub const SCHEMA: &str = "courant-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Number of instances examined.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

impl From<&Verdict> for Check {
    fn from(v: &Verdict) -> Self {
        Check {
            name: v.name.clone(),
            status: if v.pass { Status::Pass } else { Status::Fail },
            checked: v.checked,
            witness: v.witness.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    pub suite: String,
    pub input: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str, input: &str, seed: u64) -> Self {
        Report {
            schema: SCHEMA.into(),
            tool: format!("courant {}", env!("CARGO_PKG_VERSION")),
            suite: suite.into(),
            input: input.into(),
            seed,
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, v: &Verdict) {
        self.pass &= v.pass;
        self.checks.push(v.into());
    }

    pub fn extend<'a>(&mut self, vs: impl IntoIterator<Item = &'a Verdict>) {
        for v in vs {
            self.push(v);
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_machine(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self, elapsed: Option<Duration>) -> String {
        let mut out = format!("{} on {} ({})\n", self.suite, self.input, self.tool);
        if !self.parameters.is_empty() || self.seed != 0 {
            let ps: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("  seed={} {}\n", self.seed, ps.join(" ")));
        }
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            out.push_str(&format!("{tag}  {} [{} checked]\n", c.name, c.checked));
            if let Some(w) = &c.witness {
                out.push_str(&format!("      witness: {w}\n"));
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(if self.pass { "result: pass" } else { "result: fail" });
        if let Some(t) = elapsed {
            out.push_str(&format!(" ({:.3} s)", t.as_secs_f64()));
        }
        out.push('\n');
        out
    }
}
