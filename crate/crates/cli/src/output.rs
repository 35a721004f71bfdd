use std::fs;
use std::path::Path;

use plap::functionals::InequalityCheck;
use plap::network::Network;
use plap::operators::State;
use serde_json::{Map, Number, Value};

use crate::Failure;

/// Finite floats as 17 significant digits, everything else as `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format!("{x:.16e}").parse::<Number>().expect("valid JSON number"))
    } else {
        Value::Null
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// A JSON object with keys kept in insertion order.
#[derive(Default)]
pub struct Summary(Map<String, Value>);

impl Summary {
    pub fn new(command: &str, seed: u64) -> Summary {
        let mut s = Summary::default();
        s.put("command", command);
        s.put("seed", seed);
        s
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn real(&mut self, key: &str, x: f64) -> &mut Self {
        self.put(key, num(x))
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("summary serializes")
    }
}

pub fn check(c: &InequalityCheck) -> Value {
    let mut s = Summary::default();
    s.put("holds", c.holds)
        .put("checked", c.checked)
        .real("worst_slack", c.worst_slack)
        .put("worst_t", opt(c.worst_t));
    s.into_value()
}

pub fn vertex_csv(net: &Network, u: &State) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value"]).expect("in-memory write");
    for x in net.vertices() {
        w.write_record([net.name(x), &format!("{:.16e}", u[x])])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Prints the summary and, with an output directory, writes it together
/// with the named data files.
pub fn emit(summary: &Summary, out: Option<&Path>, files: &[(&str, String)]) -> Result<(), Failure> {
    let text = summary.render();
    println!("{text}");
    if let Some(dir) = out {
        let io = |e: std::io::Error| Failure::input(format!("cannot write to {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("summary.json"), text + "\n").map_err(io)?;
        for (name, body) in files {
            fs::write(dir.join(name), body).map_err(io)?;
        }
    }
    Ok(())
}
