//! Case-file ingestion: MATPOWER `.m` subset, CSV edge lists, canonical JSON.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{Branch, BranchDef, Bus, Network};
use crate::scalar::Scalar;

/// Supported case-file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFormat {
    Matpower,
    Csv,
    Json,
}

impl std::str::FromStr for CaseFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matpower" => Ok(Self::Matpower),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parse(format!("unknown case format '{other}'"))),
        }
    }
}

/// Format implied by a file extension: `.m`, `.csv`, or `.json`.
pub fn detect_format(path: &Path) -> Option<CaseFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "m" => Some(CaseFormat::Matpower),
        "csv" => Some(CaseFormat::Csv),
        "json" => Some(CaseFormat::Json),
        _ => None,
    }
}

/// Loads a case file, dispatching on its extension.
pub fn load_case(path: impl AsRef<Path>) -> Result<Network<f64>> {
    let path = path.as_ref();
    let format = detect_format(path).ok_or_else(|| {
        Error::Parse(format!(
            "unrecognized case file extension: {}",
            path.display()
        ))
    })?;
    load_case_with(path, format)
}

/// Loads a case file in an explicitly chosen format.
pub fn load_case_with(path: impl AsRef<Path>, format: CaseFormat) -> Result<Network<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("case");
    match format {
        CaseFormat::Matpower => parse_matpower(&text, stem),
        CaseFormat::Csv => parse_csv(&text, stem),
        CaseFormat::Json => parse_json(&text),
    }
}

/// Strips `%` comments and `...` line continuations from MATLAB-style text.
fn normalize_matlab(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let line = match line.find('%') {
            Some(pos) => &line[..pos],
            None => line,
        };
        match line.find("...") {
            Some(pos) => out.push_str(&line[..pos]),
            None => {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}

/// Extracts the numeric rows of `mpc.<key> = [ ... ];`.
fn matrix_block(text: &str, key: &str) -> Result<Vec<Vec<f64>>> {
    let needle = format!("mpc.{key}");
    let mut search_from = 0;
    let start = loop {
        let rel = text[search_from..]
            .find(&needle)
            .ok_or_else(|| Error::Parse(format!("missing mpc.{key} block")))?;
        let at = search_from + rel;
        let after = at + needle.len();
        let next = text[after..].chars().next();
        if next.is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            search_from = after;
            continue;
        }
        break after;
    };
    let rest = text[start..].trim_start();
    let rest = rest
        .strip_prefix('=')
        .ok_or_else(|| Error::Parse(format!("mpc.{key} is not an assignment")))?
        .trim_start();
    let rest = rest
        .strip_prefix('[')
        .ok_or_else(|| Error::Parse(format!("mpc.{key} is not a matrix")))?;
    let body = rest
        .split(']')
        .next()
        .ok_or_else(|| Error::Parse(format!("unterminated mpc.{key} matrix")))?;
    let mut rows = Vec::new();
    for chunk in body.split([';', '\n']) {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let row = chunk
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("mpc.{key} row has non-numeric entry '{tok}'"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn integral_id(value: f64, context: &str) -> Result<u32> {
    if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
        return Err(Error::Parse(format!(
            "{context}: bus id {value} is not a positive integer"
        )));
    }
    Ok(value as u32)
}

/// Parses the MATPOWER subset: bus ids and type codes from the bus matrix,
/// from/to/reactance/status from branch matrix columns 1, 2, 4, 11. All other
/// columns and all other `mpc.*` blocks are ignored.
pub fn parse_matpower(text: &str, name: &str) -> Result<Network<f64>> {
    let text = normalize_matlab(text);
    let bus_rows = matrix_block(&text, "bus")?;
    let branch_rows = matrix_block(&text, "branch")?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    for row in &bus_rows {
        if row.len() < 2 {
            return Err(Error::Parse(format!(
                "bus row has {} columns, need 2",
                row.len()
            )));
        }
        let id = integral_id(row[0], "bus matrix")?;
        buses.push(Bus {
            id,
            is_slack: row[1] == 3.0,
        });
    }

    let mut defs = Vec::with_capacity(branch_rows.len());
    for row in &branch_rows {
        if row.len() < 4 {
            return Err(Error::Parse(format!(
                "branch row has {} columns, need 4",
                row.len()
            )));
        }
        defs.push(BranchDef {
            from_bus: integral_id(row[0], "branch matrix")?,
            to_bus: integral_id(row[1], "branch matrix")?,
            reactance: row[3],
            in_service: row.get(10).copied().unwrap_or(1.0) != 0.0,
        });
    }
    Network::new(name, buses, defs)
}

/// Parses the CSV edge list: a `slack,<id>` header line, then
/// `from,to,reactance[,status]` rows. `#` starts a comment.
pub fn parse_csv(text: &str, name: &str) -> Result<Network<f64>> {
    let mut slack: Option<u32> = None;
    let mut defs: Vec<BranchDef<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if slack.is_none() {
            if fields.len() != 2 || !fields[0].eq_ignore_ascii_case("slack") {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected 'slack,<id>' header, got '{line}'"
                )));
            }
            slack = Some(fields[1].parse().map_err(|_| {
                Error::Parse(format!(
                    "line {lineno}: invalid slack bus id '{}'",
                    fields[1]
                ))
            })?);
            continue;
        }
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 'from,to,reactance[,status]', got '{line}'"
            )));
        }
        let field = |i: usize, what: &str| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: invalid {what} '{}'", fields[i])))
        };
        defs.push(BranchDef {
            from_bus: integral_id(field(0, "from bus")?, &format!("line {lineno}"))?,
            to_bus: integral_id(field(1, "to bus")?, &format!("line {lineno}"))?,
            reactance: field(2, "reactance")?,
            in_service: if fields.len() == 4 {
                field(3, "status")? != 0.0
            } else {
                true
            },
        });
    }
    let slack = slack.ok_or_else(|| Error::Parse("missing 'slack,<id>' header".into()))?;
    if defs.is_empty() {
        return Err(Error::Validation("no branches".into()));
    }
    let mut ids: BTreeSet<u32> = BTreeSet::new();
    for def in &defs {
        ids.insert(def.from_bus);
        ids.insert(def.to_bus);
    }
    if !ids.contains(&slack) {
        return Err(Error::Validation(format!(
            "slack bus {slack} does not appear in any branch"
        )));
    }
    let buses = ids
        .into_iter()
        .map(|id| Bus {
            id,
            is_slack: id == slack,
        })
        .collect();
    Network::new(name, buses, defs)
}

#[derive(Serialize, Deserialize)]
struct JsonCase {
    name: String,
    slack: u32,
    buses: Vec<u32>,
    branches: Vec<JsonBranch>,
}

#[derive(Serialize, Deserialize)]
struct JsonBranch {
    from: u32,
    to: u32,
    x: f64,
    #[serde(default = "default_status")]
    status: u8,
}

fn default_status() -> u8 {
    1
}

/// Parses the canonical JSON form:
/// `{name, slack, buses: [id...], branches: [{from, to, x, status?}]}`.
pub fn parse_json(text: &str) -> Result<Network<f64>> {
    let case: JsonCase = serde_json::from_str(text)?;
    let buses = case
        .buses
        .iter()
        .map(|&id| Bus {
            id,
            is_slack: id == case.slack,
        })
        .collect();
    let defs = case
        .branches
        .into_iter()
        .map(|b| BranchDef {
            from_bus: b.from,
            to_bus: b.to,
            reactance: b.x,
            in_service: b.status != 0,
        })
        .collect();
    Network::new(case.name, buses, defs)
}

/// Emits the canonical JSON form; `parse_json` round-trips it exactly.
pub fn emit_json<S: Scalar>(network: &Network<S>) -> String {
    let case = JsonCase {
        name: network.name().to_string(),
        slack: network.slack().id,
        buses: network.buses().iter().map(|b| b.id).collect(),
        branches: network
            .all_branches()
            .iter()
            .map(|b: &Branch<S>| JsonBranch {
                from: b.from_bus,
                to: b.to_bus,
                x: b.reactance.to_f64().expect("finite reactance"),
                status: u8::from(b.in_service),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&case).expect("plain data serializes")
}
