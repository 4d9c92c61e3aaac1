//! Machine-readable experiment results, one JSON object per line.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => value <= tolerance,
            Relation::Below => value < tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
        }
    }
}

/// One declared tolerance and whether the measured value meets it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            tolerance,
            pass: relation.holds(value, tolerance),
            note: None,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::AtMost, tolerance)
    }

    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::Below, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, tolerance)
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub seed: Option<u64>,
    pub params: Value,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ResultRecord {
    pub fn new(experiment: impl Into<String>, seed: Option<u64>, params: Value) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            params,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("metrics serialize");
        self.metrics.insert(key.to_string(), v);
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.checks.push(check);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Human summary: one line per record plus the failing checks.
impl fmt::Display for ResultRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        write!(
            f,
            "[{}] {} ({passed}/{} checks)",
            if self.pass { "PASS" } else { "FAIL" },
            self.experiment,
            self.checks.len()
        )?;
        for c in &self.checks {
            if !c.pass || c.note.is_some() {
                let rel = serde_json::to_value(c.relation).expect("relation serializes");
                write!(
                    f,
                    "\n    {} {}: {:e} {} {:e}",
                    if c.pass { "note" } else { "fail" },
                    c.name,
                    c.value,
                    rel.as_str().unwrap_or("?"),
                    c.tolerance
                )?;
                if let Some(n) = &c.note {
                    write!(f, " ({n})")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pass_is_the_conjunction_of_checks() {
        let mut r = ResultRecord::new("x", Some(1), json!({}));
        r.check(Check::at_most("a", 1e-12, 1e-10));
        assert!(r.pass);
        r.check(Check::below("b", 1.0, 1.0));
        assert!(!r.pass);
        let back: ResultRecord = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json_line().contains(r#""relation":"<""#));
    }
}
