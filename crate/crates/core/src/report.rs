//! Joins contingency rankings with graphlet censuses into line tables,
//! per-case highlights, and bubble-chart datasets.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::contingency::{least_critical, n1_scan, n2_scan, N1Record};
use crate::error::Result;
use crate::graphlets::{edge_census, edge_percentages, GraphletCensus, GraphletClass};
use crate::netmodel::{build_graph, Network, SimpleGraph};
use crate::scalar::Scalar;

/// One table row: a line and its per-class graphlet counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineTableRow {
    pub from_bus: u32,
    pub to_bus: u32,
    pub counts: [u64; 6],
}

/// The most-critical single line with its graphlet percentage profile.
#[derive(Debug, Clone, Serialize)]
pub struct LineHighlight {
    pub line: (u32, u32),
    pub max_abs_lodf: f64,
    pub percentages: [f64; 6],
    pub zero_total: bool,
}

/// The worst outage pair; percentages profile the second line.
#[derive(Debug, Clone, Serialize)]
pub struct PairHighlight {
    pub first: (u32, u32),
    pub second: (u32, u32),
    pub max_abs_lodf: f64,
    pub percentages: [f64; 6],
    pub zero_total: bool,
}

/// Per-case join of rankings and censuses.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case_name: String,
    pub n1_most_critical: Option<LineHighlight>,
    pub n2_best: Option<PairHighlight>,
    pub top: Vec<LineTableRow>,
    pub bottom: Vec<LineTableRow>,
}

impl CaseReport {
    /// Report with no highlights and no rows.
    pub fn empty(case_name: impl Into<String>) -> Self {
        Self {
            case_name: case_name.into(),
            n1_most_critical: None,
            n2_best: None,
            top: Vec::new(),
            bottom: Vec::new(),
        }
    }
}

/// Output renderings of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One bubble-chart record: a case's share of one class on its critical
/// line, colored by the case's maximum |LODF|.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleRecord {
    pub case_name: String,
    pub class: GraphletClass,
    pub percentage: f64,
    pub max_abs_lodf: f64,
}

/// Bubble datasets plus per-case failures (reported, never fatal).
#[derive(Debug, Clone, Default, Serialize)]
pub struct BubbleData {
    pub n1: Vec<BubbleRecord>,
    pub n2: Vec<BubbleRecord>,
    pub failures: Vec<String>,
}

fn census_counts<S: Scalar>(
    network: &Network<S>,
    graph: &SimpleGraph,
    census: &GraphletCensus,
    from_bus: u32,
    to_bus: u32,
) -> [u64; 6] {
    let a = network.bus_position(from_bus).expect("validated endpoint");
    let b = network.bus_position(to_bus).expect("validated endpoint");
    let edge = graph
        .edge_id(a, b)
        .expect("in-service line is a graph edge");
    census.edge_counts(edge)
}

fn table_rows<S: Scalar>(
    network: &Network<S>,
    graph: &SimpleGraph,
    census: &GraphletCensus,
    records: &[N1Record<S>],
) -> Vec<LineTableRow> {
    records
        .iter()
        .map(|r| LineTableRow {
            from_bus: r.outage.from_bus,
            to_bus: r.outage.to_bus,
            counts: census_counts(network, graph, census, r.outage.from_bus, r.outage.to_bus),
        })
        .collect()
}

/// Builds the full per-case report: top-k/bottom-k line tables ordered per
/// the contingency scans, plus highlights; the pair scan runs only when
/// `include_n2` is set.
pub fn case_report<S: Scalar>(
    network: &Network<S>,
    k: usize,
    include_n2: bool,
) -> Result<CaseReport> {
    let records = n1_scan(network)?;
    let graph = build_graph(network);
    let census = edge_census(&graph);

    let top = table_rows(network, &graph, &census, &records[..k.min(records.len())]);
    let bottom = table_rows(network, &graph, &census, &least_critical(&records, k));

    let n1_most_critical = records.first().filter(|r| !r.island_causing).map(|r| {
        let a = network
            .bus_position(r.outage.from_bus)
            .expect("validated endpoint");
        let b = network
            .bus_position(r.outage.to_bus)
            .expect("validated endpoint");
        let edge = graph
            .edge_id(a, b)
            .expect("in-service line is a graph edge");
        let share = edge_percentages(&census, edge);
        LineHighlight {
            line: r.outage.key(),
            max_abs_lodf: r
                .max_abs_lodf
                .expect("non-islanding record")
                .to_f64()
                .unwrap(),
            percentages: share.percentages,
            zero_total: share.zero_total,
        }
    });

    let n2_best = if include_n2 {
        n2_scan(network)?.best.map(|b| {
            let a = network
                .bus_position(b.second.from_bus)
                .expect("validated endpoint");
            let c = network
                .bus_position(b.second.to_bus)
                .expect("validated endpoint");
            let edge = graph
                .edge_id(a, c)
                .expect("in-service line is a graph edge");
            let share = edge_percentages(&census, edge);
            PairHighlight {
                first: b.first.key(),
                second: b.second.key(),
                max_abs_lodf: b.max_abs_lodf.to_f64().unwrap(),
                percentages: share.percentages,
                zero_total: share.zero_total,
            }
        })
    } else {
        None
    };

    Ok(CaseReport {
        case_name: network.name().to_string(),
        n1_most_critical,
        n2_best,
        top,
        bottom,
    })
}

/// Top-k/bottom-k tables without the pair scan.
pub fn n1_report<S: Scalar>(network: &Network<S>, k: usize) -> Result<CaseReport> {
    case_report(network, k, false)
}

/// Extends `data` with one case's bubble records: six per dataset (one per
/// class), sharing the case's maximum |LODF|. A case without a single
/// non-islanding outage is noted as a failure.
pub fn bubble_records(report: &CaseReport, data: &mut BubbleData) {
    let Some(h) = &report.n1_most_critical else {
        data.failures
            .push(format!("{}: no non-islanding outage", report.case_name));
        return;
    };
    for class in GraphletClass::ALL {
        data.n1.push(BubbleRecord {
            case_name: report.case_name.clone(),
            class,
            percentage: h.percentages[class.index()],
            max_abs_lodf: h.max_abs_lodf,
        });
    }
    if let Some(p) = &report.n2_best {
        for class in GraphletClass::ALL {
            data.n2.push(BubbleRecord {
                case_name: report.case_name.clone(),
                class,
                percentage: p.percentages[class.index()],
                max_abs_lodf: p.max_abs_lodf,
            });
        }
    }
}

/// Builds bubble datasets for a list of case files. Cases that fail to
/// parse or analyze are skipped and noted in `failures`.
pub fn multi_case_bubble_data(paths: &[PathBuf], include_n2: bool) -> BubbleData {
    let per_case: Vec<std::result::Result<CaseReport, String>> = paths
        .par_iter()
        .map(|path| {
            let network =
                crate::caseio::load_case(path).map_err(|e| format!("{}: {e}", path.display()))?;
            case_report(&network, 0, include_n2).map_err(|e| format!("{}: {e}", path.display()))
        })
        .collect();

    let mut data = BubbleData::default();
    for result in per_case {
        match result {
            Ok(report) => bubble_records(&report, &mut data),
            Err(message) => data.failures.push(message),
        }
    }
    data
}

/// Column header shared by every per-line count table.
pub const TABLE_HEADER: &str = "from,to,M1,M2,M3,M4,M5,M6";

fn fmt_lodf(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_shares(percentages: &[f64; 6]) -> String {
    GraphletClass::ALL
        .iter()
        .map(|c| format!("{} {:.2}", c.label(), percentages[c.index()]))
        .collect::<Vec<_>>()
        .join(", ")
}

fn push_rows(out: &mut String, rows: &[LineTableRow]) {
    for row in rows {
        out.push_str(&format!("{},{}", row.from_bus, row.to_bus));
        for c in row.counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// Renders a report. CSV uses `#` caption lines between sections and 8-column
/// data rows; an entirely empty report renders as the bare column header.
/// JSON carries the same content with LODF rounded to 6 decimals and
/// percentages to 2.
pub fn emit_report(report: &CaseReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Json => report_json(report).to_string(),
    }
}

fn emit_csv(report: &CaseReport) -> String {
    let mut out = String::new();
    if report.n1_most_critical.is_none()
        && report.n2_best.is_none()
        && report.top.is_empty()
        && report.bottom.is_empty()
    {
        out.push_str(TABLE_HEADER);
        out.push('\n');
        return out;
    }
    out.push_str(&format!("# case {}\n", report.case_name));
    if let Some(h) = &report.n1_most_critical {
        out.push_str(&format!(
            "# max N-1 |LODF|: {} on line {}-{}\n",
            fmt_lodf(h.max_abs_lodf),
            h.line.0,
            h.line.1
        ));
        out.push_str(&format!(
            "# N-1 critical-line shares: {}\n",
            fmt_shares(&h.percentages)
        ));
    }
    if let Some(p) = &report.n2_best {
        out.push_str(&format!(
            "# max N-2 |LODF|: {} on pair {}-{} + {}-{}\n",
            fmt_lodf(p.max_abs_lodf),
            p.first.0,
            p.first.1,
            p.second.0,
            p.second.1
        ));
        out.push_str(&format!(
            "# N-2 second-line shares: {}\n",
            fmt_shares(&p.percentages)
        ));
    }
    out.push_str(&format!(
        "# top {} lines\n{TABLE_HEADER}\n",
        report.top.len()
    ));
    push_rows(&mut out, &report.top);
    out.push_str(&format!(
        "# bottom {} lines\n{TABLE_HEADER}\n",
        report.bottom.len()
    ));
    push_rows(&mut out, &report.bottom);
    out
}

fn rows_json(rows: &[LineTableRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| json!({"from": r.from_bus, "to": r.to_bus, "counts": r.counts}))
            .collect(),
    )
}

fn shares_json(percentages: &[f64; 6]) -> Value {
    Value::Array(percentages.iter().map(|&p| json!(round_to(p, 2))).collect())
}

/// Renders one case report as a JSON value, for embedding in larger
/// documents.
pub fn report_json(report: &CaseReport) -> Value {
    json!({
        "case": report.case_name,
        "n1_most_critical": report.n1_most_critical.as_ref().map(|h| json!({
            "line": format!("{}-{}", h.line.0, h.line.1),
            "max_abs_lodf": round_to(h.max_abs_lodf, 6),
            "percentages": shares_json(&h.percentages),
            "zero_total": h.zero_total,
        })),
        "n2_best": report.n2_best.as_ref().map(|p| json!({
            "first": format!("{}-{}", p.first.0, p.first.1),
            "second": format!("{}-{}", p.second.0, p.second.1),
            "max_abs_lodf": round_to(p.max_abs_lodf, 6),
            "percentages": shares_json(&p.percentages),
            "zero_total": p.zero_total,
        })),
        "top": rows_json(&report.top),
        "bottom": rows_json(&report.bottom),
    })
}

/// Renders bubble records as CSV with 2-decimal percentages and 6-decimal
/// LODF values.
pub fn emit_bubble_csv(records: &[BubbleRecord]) -> String {
    let mut out = String::from("case,class,percentage,max_abs_lodf\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{:.2},{}\n",
            r.case_name,
            r.class.label(),
            r.percentage,
            fmt_lodf(r.max_abs_lodf)
        ));
    }
    out
}
