//! Structured verdicts for claim suites, and the golden files that pin them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotChecked,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::NotChecked => "not-checked",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Claim {
    pub claim_id: String,
    pub statement: String,
    pub sample_description: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl Claim {
    pub fn new(id: &str, statement: &str, samples: impl Into<String>, witness: Option<String>) -> Self {
        Claim {
            claim_id: id.to_string(),
            statement: statement.to_string(),
            sample_description: samples.into(),
            verdict: if witness.is_some() { Verdict::Fails } else { Verdict::Holds },
            witness,
        }
    }

    pub fn not_checked(id: &str, statement: &str, reason: &str) -> Self {
        Claim {
            claim_id: id.to_string(),
            statement: statement.to_string(),
            sample_description: reason.to_string(),
            verdict: Verdict::NotChecked,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub suite: String,
    pub claims: Vec<Claim>,
}

impl ClaimReport {
    pub fn verdicts(&self) -> BTreeMap<String, Verdict> {
        self.claims.iter().map(|c| (c.claim_id.clone(), c.verdict)).collect()
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.claims.iter().find(|c| c.claim_id == id).map(|c| c.verdict)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are always serializable");
        s.push('\n');
        s
    }
}

/// The pinned verdicts of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenVerdicts {
    pub suite: String,
    pub verdicts: BTreeMap<String, Verdict>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenMismatch {
    pub claim_id: String,
    pub expected: Option<Verdict>,
    pub actual: Option<Verdict>,
}

impl GoldenVerdicts {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("golden file: {e}")))
    }

    pub fn from_report(report: &ClaimReport) -> Self {
        GoldenVerdicts {
            suite: report.suite.clone(),
            verdicts: report.verdicts(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdict maps are always serializable");
        s.push('\n');
        s
    }

    /// Every claim whose verdict differs, including claims present on only
    /// one side.
    pub fn compare(&self, report: &ClaimReport) -> Vec<GoldenMismatch> {
        let actual = report.verdicts();
        let mut ids: Vec<&String> = self.verdicts.keys().chain(actual.keys()).collect();
        ids.sort();
        ids.dedup();
        ids.into_iter()
            .filter_map(|id| {
                let (e, a) = (self.verdicts.get(id).copied(), actual.get(id).copied());
                (e != a).then(|| GoldenMismatch {
                    claim_id: id.clone(),
                    expected: e,
                    actual: a,
                })
            })
            .collect()
    }
}
