use serde::Serialize;
use serde_json::{Map, Value};

/// What a subcommand computed, what the oracles say, and whether they agree.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    pub instance: String,
    pub computed: Map<String, Value>,
    pub oracle: Map<String, Value>,
    pub matches: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl RunReport {
    pub fn new(subcommand: &str, instance: impl Into<String>) -> Self {
        RunReport {
            subcommand: subcommand.into(),
            instance: instance.into(),
            ..Default::default()
        }
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.computed.insert(key.into(), v.into());
        self
    }

    pub fn oracle(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.oracle.insert(key.into(), v.into());
        self
    }

    /// Records a comparison; the report fails if any is false.
    pub fn check(&mut self, key: &str, ok: bool) -> &mut Self {
        self.matches.insert(key.into(), Value::Bool(ok));
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    pub fn ok(&self) -> bool {
        self.matches.values().all(|v| v == &Value::Bool(true))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.subcommand, self.instance);
        let width = self
            .computed
            .keys()
            .chain(self.oracle.keys())
            .chain(self.matches.keys())
            .map(|k| k.len())
            .max()
            .unwrap_or(0);
        let show = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string))
                .collect::<Vec<_>>()
                .join(", "),
            other => other.to_string(),
        };
        for (k, v) in &self.computed {
            out += &format!("  {k:<width$}  {}\n", show(v));
        }
        for (k, v) in &self.oracle {
            out += &format!("  {:<width$}  {}  (oracle)\n", k, show(v));
        }
        for (k, v) in &self.matches {
            let verdict = if v == &Value::Bool(true) {
                "match"
            } else {
                "MISMATCH"
            };
            out += &format!("  {k:<width$}  {verdict}\n");
        }
        for n in &self.notes {
            out += &format!("  note: {n}\n");
        }
        if let Some(ms) = self.elapsed_ms {
            out += &format!("  elapsed {ms:.1} ms\n");
        }
        out
    }
}
