//! Expectations and machine-readable verdicts.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::search::{Shard, ShapeRun, SurvivorDb};

/// What a run is expected to show about its survivors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    NoSurvivors,
    /// Every survivor has exactly `value` projective zeros.
    AllZeroCount { value: u64 },
    /// Every survivor has at most `value` zeros; with `attained`, some has exactly `value`.
    MaxZeroCount { value: u64, attained: bool },
    SomeSurvivors,
    /// Exploration: report findings, judge nothing.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Existential part cannot be judged from a partial run.
    Pending,
    Unknown,
}

#[derive(Clone, Debug, Deserialize)]
struct Rule {
    q: [u32; 2],
    #[serde(default)]
    g: Option<Vec<u8>>,
    expect: Expectation,
}

/// Versioned expectations keyed by field order and stage.
#[derive(Clone, Debug, Deserialize)]
pub struct ClaimsTable {
    pub version: u32,
    lemma8: Vec<Rule>,
    quaternary: Vec<Rule>,
}

impl ClaimsTable {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn builtin() -> &'static ClaimsTable {
        static TABLE: OnceLock<ClaimsTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            ClaimsTable::from_json(include_str!("../data/claims.json")).expect("bundled claims table parses")
        })
    }

    fn lookup(rules: &[Rule], q: u32, g: Option<u8>) -> Expectation {
        rules
            .iter()
            .find(|r| {
                (r.q[0]..=r.q[1]).contains(&q)
                    && match (&r.g, g) {
                        (Some(gs), Some(g)) => gs.contains(&g),
                        _ => true,
                    }
            })
            .map(|r| r.expect.clone())
            .unwrap_or(Expectation::Unknown)
    }

    pub fn lemma8(&self, q: u32) -> Expectation {
        Self::lookup(&self.lemma8, q, None)
    }

    pub fn quaternary(&self, q: u32, g: u8) -> Expectation {
        Self::lookup(&self.quaternary, q, Some(g))
    }
}

/// Judges survivor zero counts against an expectation.
pub fn judge(expect: &Expectation, zero_counts: &[u64], complete: bool) -> (Verdict, String) {
    let n = zero_counts.len();
    match *expect {
        Expectation::Unknown => (Verdict::Unknown, format!("{n} survivors, no claim")),
        Expectation::NoSurvivors => {
            if n == 0 {
                (Verdict::Pass, "no survivors".into())
            } else {
                (Verdict::Fail, format!("{n} survivors"))
            }
        }
        Expectation::AllZeroCount { value } => match zero_counts.iter().find(|&&z| z != value) {
            Some(z) => (Verdict::Fail, format!("a survivor has {z} zeros, expected {value}")),
            None => (Verdict::Pass, format!("all {n} survivors have {value} zeros")),
        },
        Expectation::MaxZeroCount { value, attained } => {
            let max = zero_counts.iter().copied().max();
            if let Some(m) = max.filter(|&m| m > value) {
                return (Verdict::Fail, format!("a survivor has {m} zeros, bound {value}"));
            }
            if !attained || max == Some(value) {
                return (Verdict::Pass, format!("{n} survivors, max zeros {}", max.unwrap_or(0)));
            }
            if complete {
                (Verdict::Fail, format!("bound {value} not attained"))
            } else {
                (Verdict::Pending, "bound not attained in this shard".into())
            }
        }
        Expectation::SomeSurvivors => {
            if n > 0 {
                (Verdict::Pass, format!("{n} survivors"))
            } else if complete {
                (Verdict::Fail, "no survivors".into())
            } else {
                (Verdict::Pending, "no survivors in this shard".into())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observed {
    pub survivors: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub forms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub shard: String,
    pub complete: bool,
    pub elapsed_secs: f64,
}

/// Verdict for one claim of the ternary stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub expectation: Expectation,
    pub verdict: Verdict,
    pub detail: String,
    pub observed: Observed,
    pub provenance: Provenance,
    pub runs: Vec<ShapeRun>,
}

impl VerificationReport {
    /// No claim was contradicted.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Judges ternary survivor databases against the claim for `q`.
pub fn lemma8_report(
    q: u32,
    shard: Shard,
    dbs: &[SurvivorDb],
    runs: Vec<ShapeRun>,
    elapsed_secs: f64,
) -> VerificationReport {
    let expectation = ClaimsTable::builtin().lemma8(q);
    let counts: Vec<u64> = dbs.iter().flat_map(|d| d.records.iter().map(|r| r.zero_total)).collect();
    let complete = dbs.iter().all(|d| d.is_complete());
    let (verdict, detail) = judge(&expectation, &counts, complete);
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    VerificationReport {
        claim: format!("lemma8/q={q}"),
        expectation,
        verdict,
        detail,
        observed: Observed {
            survivors: counts.len() as u64,
            histogram,
            forms: runs.iter().map(|r| r.stats.forms).sum(),
        },
        provenance: Provenance {
            shard: shard.to_string(),
            complete,
            elapsed_secs,
        },
        runs,
    }
}
