use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Undecided,
    Fail,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn from_option(b: Option<bool>) -> Verdict {
        b.map_or(Verdict::Undecided, Verdict::from_bool)
    }

    /// 0 on pass, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail | Verdict::Undecided => 1,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Undecided => "undecided",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub bound: Option<usize>,
    pub witnesses: Vec<String>,
    pub violations: Vec<String>,
    /// Printed to stderr, not serialized.
    #[serde(skip)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<Report>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            verdict: Verdict::Pass,
            bound: None,
            witnesses: Vec::new(),
            violations: Vec::new(),
            warnings: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn witness(&mut self, w: impl Into<String>) {
        self.witnesses.push(w.into());
    }

    /// Records a violation and fails the report.
    pub fn violation(&mut self, v: impl Into<String>) {
        self.violations.push(v.into());
        self.verdict = Verdict::Fail;
    }

    /// Lowers the verdict; never raises it.
    pub fn cap(&mut self, v: Verdict) {
        self.verdict = self.verdict.max(v);
    }

    /// Folds a sub-report in, keeping the worst verdict.
    pub fn absorb(&mut self, sub: Report) {
        self.cap(sub.verdict);
        self.warnings.extend(sub.warnings.iter().map(|w| format!("{}: {w}", sub.command)));
        self.reports.push(sub);
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        if let Some(b) = self.bound {
            writeln!(f, "bound: {b}")?;
        }
        for w in &self.witnesses {
            writeln!(f, "  {w}")?;
        }
        for v in &self.violations {
            writeln!(f, "  violation: {v}")?;
        }
        for r in &self.reports {
            for line in r.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        writeln!(f, "verdict: {}", self.verdict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_has_the_fixed_fields() {
        let mut r = Report::new("density -M top");
        r.bound = Some(2);
        r.witness("nu = {1}");
        r.warnings.push("not serialized".into());
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["bound", "command", "verdict", "violations", "witnesses"]);
        assert_eq!(v["verdict"], "pass");
    }

    #[test]
    fn verdicts_only_get_worse() {
        let mut r = Report::new("x");
        r.cap(Verdict::Undecided);
        r.cap(Verdict::Pass);
        assert_eq!(r.verdict, Verdict::Undecided);
        r.violation("bad");
        assert_eq!(r.verdict.exit_code(), 1);
    }
}
