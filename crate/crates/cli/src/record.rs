//! Output records and their text/JSON renderings.

use std::fmt::Write as _;

use genlogic::Prob;
use serde::{Deserialize, Serialize};

/// A probability rendered both ways. `exact` is absent in finite mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Number {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub decimal: String,
}

impl Number {
    pub fn new(p: Prob) -> Number {
        Number {
            exact: p.exact().map(|r| format!("{}/{}", r.numer(), r.denom())),
            decimal: format!("{:.6}", p.to_f64()),
        }
    }
}

impl std::fmt::Display for Number {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.exact {
            Some(e) => write!(f, "{e} ({})", self.decimal),
            None => f.write_str(&self.decimal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    #[serde(flatten)]
    pub value: Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Probability {
        value: Number,
    },
    Distribution {
        entries: Vec<Entry>,
    },
    Explanation {
        path: String,
        probability: Number,
        ties: Vec<String>,
    },
    Reference {
        entries: Vec<Entry>,
    },
    Consequence {
        holds: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_count: usize,
    pub prime_evidence: Vec<String>,
    pub subsets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub oracle_mu: String,
    pub max_difference: String,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub command: String,
    pub query: String,
    pub mode: String,
    pub result: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_check: Option<SelfCheck>,
}

impl Record {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "query: {}", self.query);
        let _ = writeln!(s, "mode: {}", self.mode);
        match &self.result {
            Outcome::Probability { value } => {
                let _ = writeln!(s, "result: {value}");
            }
            Outcome::Distribution { entries } | Outcome::Reference { entries } => {
                let width = entries.iter().map(|e| e.label.len()).max().unwrap_or(0);
                s.push_str("result:\n");
                for e in entries {
                    let _ = writeln!(s, "  {:width$}  {}", e.label, e.value);
                }
            }
            Outcome::Explanation {
                path,
                probability,
                ties,
            } => {
                let _ = writeln!(s, "result: {path}");
                let _ = writeln!(s, "probability: {probability}");
                let _ = writeln!(s, "ties: {}", ties.join(" "));
            }
            Outcome::Consequence { holds } => {
                let _ = writeln!(
                    s,
                    "result: {}",
                    if *holds { "entailed" } else { "not entailed" }
                );
            }
        }
        if let Some(d) = &self.diagnostics {
            let _ = writeln!(s, "max satisfied: {}", d.max_count);
            let _ = writeln!(s, "prime evidence: {}", d.prime_evidence.join(", "));
            s.push_str("subsets:\n");
            for sub in &d.subsets {
                let _ = writeln!(s, "  {sub}");
            }
        }
        if let Some(c) = &self.self_check {
            let _ = writeln!(
                s,
                "self-check: {} (oracle mu {}, max difference {})",
                if c.agrees { "ok" } else { "MISMATCH" },
                c.oracle_mu,
                c.max_difference
            );
        }
        s
    }
}
