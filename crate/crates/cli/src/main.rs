//! Command-line front end for the gridlet toolkit.
//!
//! One binary, six subcommands: `n1` and `n2` rank line outages by the
//! worst surviving distribution factor, `graphlets` prints per-edge
//! 4-node graphlet counts, `report` joins both analyses into result
//! files, `verify` cross-checks the fast paths against brute-force
//! oracles, and `dump` writes the raw LODF matrix.
//!
//! Exit codes: 0 on success, 1 on input or usage errors, 2 when `verify`
//! finds a disagreement. Machine-readable modes (`--csv`, `--json`) write
//! nothing but the data to standard output, and identical invocations
//! produce byte-identical output regardless of the thread count.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use gridlet_core::caseio::{load_case, load_case_with, CaseFormat};
use gridlet_core::contingency::{least_critical, n1_scan, n2_scan, N1Record};
use gridlet_core::dcsens::SensitivityStack;
use gridlet_core::graphlets::{edge_census, GraphletClass};
use gridlet_core::netmodel::{build_graph, Network, SimpleGraph};
use gridlet_core::oracle::verify_case;
use gridlet_core::report::{
    bubble_records, case_report, emit_bubble_csv, emit_report, report_json, BubbleData,
    BubbleRecord, CaseReport, ReportFormat, TABLE_HEADER,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "gridlet",
    version,
    about = "Critical-line and graphlet analysis for power grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Cap on worker threads (default: all cores; GRIDLET_THREADS as fallback)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Case file format (default: inferred from the file extension)
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Matpower,
    Csv,
    Json,
}

impl From<FormatArg> for CaseFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Matpower => CaseFormat::Matpower,
            FormatArg::Csv => CaseFormat::Csv,
            FormatArg::Json => CaseFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rank single-line outages by the worst surviving |LODF|
    N1 {
        case: PathBuf,
        /// Keep only the K most critical outages
        #[arg(long, value_name = "K", conflicts_with = "bottom")]
        top: Option<usize>,
        /// Keep only the K least critical outages, ascending
        #[arg(long, value_name = "K")]
        bottom: Option<usize>,
        /// CSV output
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        /// JSON output
        #[arg(long)]
        json: bool,
    },
    /// Rank outage pairs by the worst |LODF| after removing both lines
    N2 {
        case: PathBuf,
        /// CSV output
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        /// JSON output
        #[arg(long)]
        json: bool,
    },
    /// Per-edge 4-node graphlet counts (classes M1..M6)
    Graphlets {
        case: PathBuf,
        /// Single line as FROM-TO with an optional :k circuit suffix
        #[arg(long, value_name = "FROM-TO[:k]")]
        edge: Option<String>,
        /// CSV output
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        /// JSON output
        #[arg(long)]
        json: bool,
    },
    /// Write joined criticality/graphlet tables for one or more cases
    Report {
        #[arg(required = true)]
        cases: Vec<PathBuf>,
        /// Also run the (quadratic) outage-pair scan
        #[arg(long)]
        n2: bool,
        /// Output directory
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        /// Rows in each top/bottom table
        #[arg(long, value_name = "K", default_value_t = 10)]
        k: usize,
    },
    /// Cross-check the fast paths against brute-force oracles
    Verify {
        case: PathBuf,
        /// Largest accepted |fast - oracle| deviation
        #[arg(long, value_name = "EPS", default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Write the full LODF matrix as CSV
    Dump {
        case: PathBuf,
        /// Destination file (standard output when omitted)
        #[arg(long, value_name = "PATH")]
        dump_lodf: Option<PathBuf>,
    },
}

/// Output selection shared by the listing subcommands.
#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Human,
    Csv,
    Json,
}

impl Mode {
    fn of(csv: bool, json: bool) -> Self {
        if csv {
            Mode::Csv
        } else if json {
            Mode::Json
        } else {
            Mode::Human
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// A consumer such as `head` closing standard output early is normal
/// termination, not a failure worth reporting.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = thread_cap(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let format = cli.format.map(CaseFormat::from);
    match cli.command {
        Command::N1 {
            case,
            top,
            bottom,
            csv,
            json,
        } => cmd_n1(&case, format, top, bottom, Mode::of(csv, json)),
        Command::N2 { case, csv, json } => cmd_n2(&case, format, Mode::of(csv, json)),
        Command::Graphlets {
            case,
            edge,
            csv,
            json,
        } => cmd_graphlets(&case, format, edge.as_deref(), Mode::of(csv, json)),
        Command::Report { cases, n2, out, k } => cmd_report(&cases, format, n2, &out, k),
        Command::Verify { case, tolerance } => cmd_verify(&case, format, tolerance),
        Command::Dump { case, dump_lodf } => cmd_dump(&case, format, dump_lodf.as_deref()),
    }
}

/// Resolves `--threads`, falling back to GRIDLET_THREADS; `None` leaves the
/// pool at its default width.
fn thread_cap(flag: Option<usize>) -> anyhow::Result<Option<usize>> {
    if let Some(n) = flag {
        anyhow::ensure!(n >= 1, "--threads must be a positive thread count, got {n}");
        return Ok(Some(n));
    }
    match std::env::var("GRIDLET_THREADS") {
        Ok(raw) => {
            let raw = raw.trim().to_string();
            if raw.is_empty() {
                return Ok(None);
            }
            let n = raw
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .with_context(|| {
                    format!("GRIDLET_THREADS must be a positive thread count, got {raw:?}")
                })?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn load(path: &Path, format: Option<CaseFormat>) -> gridlet_core::Result<Network<f64>> {
    match format {
        Some(f) => load_case_with(path, f),
        None => load_case(path),
    }
}

fn load_ctx(path: &Path, format: Option<CaseFormat>) -> anyhow::Result<Network<f64>> {
    load(path, format).with_context(|| format!("loading {}", path.display()))
}

fn cmd_n1(
    case: &Path,
    format: Option<CaseFormat>,
    top: Option<usize>,
    bottom: Option<usize>,
    mode: Mode,
) -> anyhow::Result<u8> {
    let network = load_ctx(case, format)?;
    let records = n1_scan(&network)?;
    let rows: Vec<N1Record<f64>> = match (top, bottom) {
        (Some(k), _) => records.iter().take(k).cloned().collect(),
        (None, Some(k)) => least_critical(&records, k),
        (None, None) => records,
    };
    match mode {
        Mode::Json => emit(&(serde_json::to_string_pretty(&rows)? + "\n"))?,
        Mode::Csv => {
            let mut out = String::from("rank,outage,max_abs_lodf,argmax,island\n");
            for (i, r) in rows.iter().enumerate() {
                let max = r
                    .max_abs_lodf
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_default();
                let arg = r.argmax.map(|a| a.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{max},{arg},{}",
                    i + 1,
                    r.outage,
                    r.island_causing
                );
            }
            emit(&out)?;
        }
        Mode::Human => {
            let mut out = format!("{}: {} outage(s)\n", network.name(), rows.len());
            let _ = writeln!(
                out,
                "{:>4}  {:<9}  {:>12}  {:<9}  island",
                "rank", "outage", "max |LODF|", "argmax"
            );
            for (i, r) in rows.iter().enumerate() {
                let max = r
                    .max_abs_lodf
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_else(|| "-".into());
                let arg = r
                    .argmax
                    .map(|a| a.to_string())
                    .unwrap_or_else(|| "-".into());
                let island = if r.island_causing { "yes" } else { "" };
                let _ = writeln!(
                    out,
                    "{:>4}  {:<9}  {max:>12}  {arg:<9}  {island}",
                    i + 1,
                    r.outage.to_string()
                );
            }
            emit(&out)?;
        }
    }
    Ok(0)
}

fn cmd_n2(case: &Path, format: Option<CaseFormat>, mode: Mode) -> anyhow::Result<u8> {
    let network = load_ctx(case, format)?;
    let scan = n2_scan(&network)?;
    match mode {
        Mode::Json => emit(&(serde_json::to_string_pretty(&scan)? + "\n"))?,
        Mode::Csv => {
            let mut out = String::from("rank,first,second,max_abs_lodf,argmax\n");
            for (i, r) in scan.records.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{}",
                    i + 1,
                    r.first,
                    r.second,
                    r.max_abs_lodf,
                    r.argmax
                );
            }
            emit(&out)?;
        }
        Mode::Human => {
            let mut out = String::new();
            match &scan.best {
                Some(b) => {
                    let _ = writeln!(
                        out,
                        "{}: worst pair {} + {} drives {} to |LODF| {:.6}",
                        network.name(),
                        b.first,
                        b.second,
                        b.argmax,
                        b.max_abs_lodf
                    );
                }
                None => {
                    let _ = writeln!(out, "{}: no feasible outage pair", network.name());
                }
            }
            let _ = writeln!(
                out,
                "{:>4}  {:<9}  {:<9}  {:>12}  argmax",
                "rank", "first", "second", "max |LODF|"
            );
            for (i, r) in scan.records.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>4}  {:<9}  {:<9}  {:>12.6}  {}",
                    i + 1,
                    r.first.to_string(),
                    r.second.to_string(),
                    r.max_abs_lodf,
                    r.argmax
                );
            }
            emit(&out)?;
        }
    }
    Ok(0)
}

fn cmd_graphlets(
    case: &Path,
    format: Option<CaseFormat>,
    edge: Option<&str>,
    mode: Mode,
) -> anyhow::Result<u8> {
    let network = load_ctx(case, format)?;
    let graph = build_graph(&network);
    let census = edge_census(&graph);

    if let Some(spec) = edge {
        let (from, to, circuit) = parse_edge_spec(spec)?;
        let edge_id = resolve_edge(&network, &graph, from, to, circuit)?;
        let c = census.edge_counts(edge_id);
        match mode {
            Mode::Json => emit(
                &(serde_json::to_string_pretty(&json!({
                    "from": from,
                    "to": to,
                    "counts": counts_json(&c),
                }))? + "\n"),
            )?,
            _ => emit(&format!(
                "{from},{to},{},{},{},{},{},{}\n",
                c[0], c[1], c[2], c[3], c[4], c[5]
            ))?,
        }
        return Ok(0);
    }

    let rows: Vec<(u32, u32, [u64; 6])> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            (
                network.bus_id_at(a),
                network.bus_id_at(b),
                census.edge_counts(e),
            )
        })
        .collect();
    match mode {
        Mode::Json => {
            let values: Vec<_> = rows
                .iter()
                .map(|(from, to, c)| json!({ "from": from, "to": to, "counts": counts_json(c) }))
                .collect();
            emit(&(serde_json::to_string_pretty(&values)? + "\n"))?;
        }
        Mode::Csv => {
            let mut out = String::from(TABLE_HEADER);
            out.push('\n');
            for (from, to, c) in &rows {
                let _ = writeln!(
                    out,
                    "{from},{to},{},{},{},{},{},{}",
                    c[0], c[1], c[2], c[3], c[4], c[5]
                );
            }
            emit(&out)?;
        }
        Mode::Human => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:>5} {:>5}  {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
                "from", "to", "M1", "M2", "M3", "M4", "M5", "M6"
            );
            for (from, to, c) in &rows {
                let _ = writeln!(
                    out,
                    "{from:>5} {to:>5}  {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
                    c[0], c[1], c[2], c[3], c[4], c[5]
                );
            }
            emit(&out)?;
        }
    }
    Ok(0)
}

fn counts_json(c: &[u64; 6]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for class in GraphletClass::ALL {
        map.insert(class.label().to_string(), json!(c[class.index()]));
    }
    serde_json::Value::Object(map)
}

/// Parses `FROM-TO` or `FROM-TO:k` into bus ids and a 1-based circuit pick.
fn parse_edge_spec(spec: &str) -> anyhow::Result<(u32, u32, Option<usize>)> {
    let (pair, circuit) = match spec.split_once(':') {
        Some((pair, k)) => {
            let k = k
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .with_context(|| {
                    format!("circuit suffix in {spec:?} must be a positive integer")
                })?;
            (pair, Some(k))
        }
        None => (spec, None),
    };
    let (a, b) = pair
        .split_once('-')
        .with_context(|| format!("edge {spec:?} must look like FROM-TO or FROM-TO:k"))?;
    let from = a
        .trim()
        .parse::<u32>()
        .with_context(|| format!("bad bus number {a:?} in edge {spec:?}"))?;
    let to = b
        .trim()
        .parse::<u32>()
        .with_context(|| format!("bad bus number {b:?} in edge {spec:?}"))?;
    Ok((from, to, circuit))
}

fn resolve_edge(
    network: &Network<f64>,
    graph: &SimpleGraph,
    from: u32,
    to: u32,
    circuit: Option<usize>,
) -> anyhow::Result<usize> {
    let a = network
        .bus_position(from)
        .with_context(|| format!("unknown bus {from}"))?;
    let b = network
        .bus_position(to)
        .with_context(|| format!("unknown bus {to}"))?;
    let edge = graph
        .edge_id(a, b)
        .with_context(|| format!("no in-service line {from}-{to}"))?;
    if let Some(k) = circuit {
        let circuits = graph.branches_on_edge(edge).len();
        anyhow::ensure!(
            k <= circuits,
            "line {from}-{to} has {circuits} circuit(s), got :{k}"
        );
    }
    Ok(edge)
}

fn cmd_report(
    cases: &[PathBuf],
    format: Option<CaseFormat>,
    include_n2: bool,
    out_dir: &Path,
    k: usize,
) -> anyhow::Result<u8> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut tables = String::new();
    let mut case_values = Vec::new();
    let mut bubbles = BubbleData::default();

    for path in cases {
        let result = load(path, format).and_then(|network| case_report(&network, k, include_n2));
        let report: CaseReport = match result {
            Ok(report) => report,
            Err(err) => {
                bubbles.failures.push(format!("{}: {err}", path.display()));
                continue;
            }
        };
        if !tables.is_empty() {
            tables.push('\n');
        }
        tables.push_str(&emit_report(&report, ReportFormat::Csv));
        case_values.push(report_json(&report));
        bubble_records(&report, &mut bubbles);
    }

    for failure in &bubbles.failures {
        eprintln!("skipped: {failure}");
    }
    if case_values.is_empty() {
        anyhow::bail!("no case could be analyzed");
    }

    let combined = json!({
        "cases": case_values,
        "bubble_n1": bubble_json(&bubbles.n1),
        "bubble_n2": bubble_json(&bubbles.n2),
        "failures": bubbles.failures,
    });

    write_out(out_dir, "tables.csv", &tables)?;
    write_out(out_dir, "bubble_n1.csv", &emit_bubble_csv(&bubbles.n1))?;
    write_out(out_dir, "bubble_n2.csv", &emit_bubble_csv(&bubbles.n2))?;
    write_out(out_dir, "report.json", &format!("{combined:#}\n"))?;

    emit(&format!(
        "wrote tables.csv, bubble_n1.csv, bubble_n2.csv, report.json to {} ({} case(s), {} failure(s))\n",
        out_dir.display(),
        case_values.len(),
        bubbles.failures.len()
    ))?;
    Ok(0)
}

fn bubble_json(records: &[BubbleRecord]) -> serde_json::Value {
    let values: Vec<_> = records
        .iter()
        .map(|r| {
            json!({
                "case": r.case_name,
                "class": r.class.label(),
                "percentage": round_to(r.percentage, 2),
                "max_abs_lodf": round_to(r.max_abs_lodf, 6),
            })
        })
        .collect();
    serde_json::Value::Array(values)
}

fn round_to(value: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (value * scale).round() / scale
}

fn write_out(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_verify(case: &Path, format: Option<CaseFormat>, tolerance: f64) -> anyhow::Result<u8> {
    let network = load_ctx(case, format)?;
    let reports = verify_case(&network, tolerance)?;
    let width = reports
        .iter()
        .map(|r| r.quantity.len())
        .max()
        .unwrap_or(0)
        .max("quantity".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>13}  {:>13}  {:>10}  {:>8}  status",
        "quantity", "fast", "oracle", "difference", "tolerance"
    );
    let mut failures = 0usize;
    for r in &reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>13.6e}  {:>13.6e}  {:>10.3e}  {:>8.1e}  {}",
            r.quantity,
            r.fast,
            r.oracle,
            r.difference,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
        if !r.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        emit(&out)?;
        eprintln!("{failures} of {} oracle check(s) failed", reports.len());
        return Ok(2);
    }
    let _ = writeln!(out, "all {} oracle check(s) passed", reports.len());
    emit(&out)?;
    Ok(0)
}

fn cmd_dump(case: &Path, format: Option<CaseFormat>, dest: Option<&Path>) -> anyhow::Result<u8> {
    let network = load_ctx(case, format)?;
    let stack = SensitivityStack::build(&network)?;
    match dest {
        Some(path) => {
            let file =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = std::io::BufWriter::new(file);
            gridlet_core::dcsens::dump_lodf_csv(&network, &stack.lodf, &mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            gridlet_core::dcsens::dump_lodf_csv(&network, &stack.lodf, &mut lock)?;
        }
    }
    Ok(0)
}
