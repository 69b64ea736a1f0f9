use serde_json::{json, Map, Value};

/// One verdict or estimate in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` for purely informational rows.
    pub verdict: Option<bool>,
    pub value: Option<String>,
    pub std_error: Option<f64>,
    /// Extra structured detail, merged into the JSON row.
    pub data: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: Option<bool>) -> Self {
        Self {
            name: name.into(),
            verdict,
            value: None,
            std_error: None,
            data: Value::Null,
        }
    }

    pub fn info(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self::new(name, None).value(value)
    }

    pub fn value(mut self, value: impl Into<String>) -> Self {
        self.value = Some(value.into());
        self
    }

    pub fn std_error(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    pub fn data(mut self, data: Value) -> Self {
        self.data = data;
        self
    }

    fn to_json(&self) -> Value {
        let mut row = Map::new();
        row.insert("name".into(), json!(self.name));
        row.insert("verdict".into(), json!(self.verdict));
        if let Some(v) = &self.value {
            row.insert("value".into(), json!(v));
        }
        if let Some(se) = self.std_error {
            row.insert("std_error".into(), json!(se));
        }
        if let Value::Object(extra) = &self.data {
            for (k, v) in extra {
                row.entry(k.clone()).or_insert_with(|| v.clone());
            }
        } else if !self.data.is_null() {
            row.insert("data".into(), self.data.clone());
        }
        Value::Object(row)
    }
}

/// Everything a subcommand produced, with the settings needed to rerun it.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub checks: Vec<Check>,
    /// Set when a cap stopped the run early; the checks so far are kept.
    pub cap_exceeded: Option<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: Value) -> Self {
        Self {
            command: command.into(),
            config,
            checks: Vec::new(),
            cap_exceeded: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Conjunction of every verdict in the report.
    pub fn verdict(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Some(false))
    }

    pub fn exit_code(&self) -> i32 {
        if self.cap_exceeded.is_some() {
            3
        } else if self.verdict() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "verdict": self.verdict(),
            "cap_exceeded": self.cap_exceeded,
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        })
    }

    /// One row per check: `command,name,verdict,value,std_error`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record(["command", "name", "verdict", "value", "std_error"])
            .expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                self.command.clone(),
                c.name.clone(),
                opt(c.verdict.map(|v| v.to_string())),
                opt(c.value.clone()),
                opt(c.std_error.map(|v| v.to_string())),
            ])
            .expect("in-memory write");
        }
        if let Some(msg) = &self.cap_exceeded {
            w.write_record([
                self.command.as_str(),
                "cap_exceeded",
                "false",
                msg.as_str(),
                "",
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_verdicts() {
        let mut r = Report::new("audit", json!({}));
        r.push(Check::info("note", "x"));
        assert_eq!(r.exit_code(), 0);
        r.push(Check::new("ef1", Some(false)));
        assert_eq!(r.exit_code(), 1);
        r.cap_exceeded = Some("too big".into());
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut r = Report::new("bic", json!({"seed": 1}));
        r.push(
            Check::new("gain", Some(true))
                .value("0.02")
                .std_error(0.001),
        );
        r.push(Check::new("a,b", Some(false)));
        let text = r.to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "command,name,verdict,value,std_error");
        assert_eq!(lines[1], "bic,gain,true,0.02,0.001");
        assert_eq!(lines[2], "bic,\"a,b\",false,,");
    }
}
