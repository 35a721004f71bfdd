use std::collections::HashMap;
use std::fs;
use std::path::Path;

use plap::boundary::{close_boundary, BoundaryCondition, DEFAULT_CLOSURE_TOL};
use plap::network::{load_problem, Network};
use plap::nonlinearity::Nonlinearity;
use plap::operators::{Exponent, State};

use crate::Failure;

pub fn read_problem(path: &Path) -> Result<(Network, BoundaryCondition), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(load_problem(&text)?)
}

fn key_values(body: &str) -> Result<HashMap<&str, f64>, Failure> {
    let mut out = HashMap::new();
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("expected key=value, got {part:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("{k} = {v:?} is not a number")))?;
        if out.insert(k.trim(), v).is_some() {
            return Err(Failure::input(format!("{k} given twice")));
        }
    }
    Ok(out)
}

fn take(kv: &mut HashMap<&str, f64>, key: &str) -> Result<f64, Failure> {
    kv.remove(key)
        .ok_or_else(|| Failure::input(format!("missing {key}")))
}

/// Parses `power:lambda=L,q=Q`, `powerc:lambda=L,q=Q,c=C` or `table:PATH`.
pub fn parse_nonlinearity(spec: &str) -> Result<Nonlinearity, Failure> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| Failure::input(format!("nonlinearity {spec:?} has no kind prefix")))?;
    let f = match kind {
        "power" | "powerc" => {
            let mut kv = key_values(body)?;
            let lambda = take(&mut kv, "lambda")?;
            let q = take(&mut kv, "q")?;
            let f = if kind == "power" {
                Nonlinearity::power(lambda, q)?
            } else {
                let c = take(&mut kv, "c")?;
                Nonlinearity::power_plus_const(lambda, q, c)?
            };
            if let Some(k) = kv.keys().next() {
                return Err(Failure::input(format!("unknown parameter {k} for {kind}")));
            }
            f
        }
        "table" => Nonlinearity::table(read_table(Path::new(body))?)?,
        _ => return Err(Failure::input(format!("unknown nonlinearity kind {kind:?}"))),
    };
    Ok(f)
}

fn csv_rows(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(Failure::input(format!(
                "{}: expected 2 columns, found {}",
                path.display(),
                record.len()
            )));
        }
        rows.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(rows)
}

fn number(path: &Path, s: &str) -> Result<f64, Failure> {
    s.parse()
        .map_err(|_| Failure::input(format!("{}: {s:?} is not a number", path.display())))
}

/// `u,f` rows; a non-numeric first row is taken as a header.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let mut rows = csv_rows(path)?;
    if rows.first().is_some_and(|(u, _)| u.parse::<f64>().is_err()) {
        rows.remove(0);
    }
    rows.iter()
        .map(|(u, f)| Ok((number(path, u)?, number(path, f)?)))
        .collect()
}

/// Initial data from `const:C` or a `name,value` CSV; boundary values are
/// always recomputed by the closure.
pub fn read_state(net: &Network, bc: &BoundaryCondition, p: Exponent, source: &str) -> Result<State, Failure> {
    let raw = if let Some(c) = source.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Failure::input(format!("{source:?}: constant is not a number")))?;
        State::interior_constant(net, c)?
    } else {
        let path = Path::new(source);
        let mut rows = csv_rows(path)?;
        if rows.first().is_some_and(|(n, v)| n == "name" && v == "value") {
            rows.remove(0);
        }
        let mut values = vec![None; net.len()];
        for (name, v) in &rows {
            let x = net
                .id(name)
                .ok_or_else(|| Failure::input(format!("{}: unknown vertex {name:?}", path.display())))?;
            if values[x.index()].replace(number(path, v)?).is_some() {
                return Err(Failure::input(format!("{}: vertex {name:?} listed twice", path.display())));
            }
        }
        if let Some(&x) = net.interior().iter().find(|x| values[x.index()].is_none()) {
            return Err(Failure::input(format!(
                "{}: no value for interior vertex {:?}",
                path.display(),
                net.name(x)
            )));
        }
        State::new(net, values.into_iter().map(|v| v.unwrap_or(0.0)).collect())?
    };
    Ok(close_boundary(net, bc, &raw, p, DEFAULT_CLOSURE_TOL)?)
}
