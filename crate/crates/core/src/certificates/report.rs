use std::fmt::Write as _;

use serde::Serialize;

use crate::scalar_fn::MarginReport;

const KEEP_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub state: Vec<f64>,
    pub margin: f64,
}

/// Outcome of one check; `passed` holds exactly when no violation was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub assumption: String,
    pub region: String,
    pub passed: bool,
    pub samples: usize,
    pub tested: usize,
    pub violation_count: usize,
    /// The first violations found (at most 64 are kept).
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<MarginReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CheckReport>,
}

impl CheckReport {
    pub fn new(assumption: impl Into<String>, region: impl Into<String>) -> Self {
        CheckReport {
            assumption: assumption.into(),
            region: region.into(),
            passed: true,
            samples: 0,
            tested: 0,
            violation_count: 0,
            violations: Vec::new(),
            margins: Vec::new(),
            notes: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn violate(&mut self, state: Vec<f64>, margin: f64) {
        self.violation_count += 1;
        if self.violations.len() < KEEP_VIOLATIONS {
            self.violations.push(Violation { state, margin });
        }
        self.passed = false;
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Grid points with nonpositive margin become violations at `[s]`.
    pub fn from_margin(assumption: impl Into<String>, region: impl Into<String>, m: MarginReport) -> Self {
        let mut r = CheckReport::new(assumption, region);
        r.samples = m.grid_size;
        r.tested = m.grid_size;
        for &(s, v) in &m.violations {
            r.violate(vec![s], v);
        }
        if !m.passed && m.violations.is_empty() {
            r.violate(vec![m.argmin], m.min_margin);
        }
        r.margins.push(m);
        r
    }

    /// Parent of `children`; violations of the `required` ones are inherited.
    pub fn aggregate(assumption: impl Into<String>, region: impl Into<String>, children: Vec<(CheckReport, bool)>) -> Self {
        let mut r = CheckReport::new(assumption, region);
        for (c, required) in children {
            if required {
                r.samples += c.samples;
                r.tested += c.tested;
                for v in &c.violations {
                    r.violate(v.state.clone(), v.margin);
                }
                r.violation_count += c.violation_count - c.violations.len().min(c.violation_count);
            }
            r.children.push(c);
        }
        r.passed = r.violation_count == 0;
        r
    }

    pub fn find(&self, assumption: &str) -> Option<&CheckReport> {
        if self.assumption == assumption {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(assumption))
    }

    /// Indented human-readable table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        self.table_into(&mut out, 0);
        out
    }

    fn table_into(&self, out: &mut String, depth: usize) {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        let _ = write!(out, "{mark}  {:indent$}{:<34} {}", "", self.assumption, self.region, indent = 2 * depth);
        if self.tested > 0 {
            let _ = write!(out, "  [tested {}, violations {}]", self.tested, self.violation_count);
        }
        for m in &self.margins {
            let _ = write!(out, "  min margin {:.3e} at {:.6}", m.min_margin, m.argmin);
        }
        out.push('\n');
        for n in &self.notes {
            let _ = writeln!(out, "      {:indent$}note: {n}", "", indent = 2 * depth);
        }
        for c in &self.children {
            c.table_into(out, depth + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_inherits_required_only() {
        let mut bad = CheckReport::new("a", "r");
        bad.violate(vec![1.0], -0.5);
        let good = CheckReport::new("b", "r");
        let p = CheckReport::aggregate("p", "r", vec![(bad.clone(), false), (good.clone(), true)]);
        assert!(p.passed && p.children.len() == 2);
        let p = CheckReport::aggregate("p", "r", vec![(bad, true), (good, true)]);
        assert!(!p.passed && p.violation_count == 1);
        assert!(p.table().starts_with("FAIL"));
        assert!(p.find("b").unwrap().passed);
    }
}
