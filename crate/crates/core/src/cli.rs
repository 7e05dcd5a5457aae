//! Command-line front end.
//!
//! Exit codes: 0 success, 2 unreadable input or bad flags, 3 invalid
//! instance or bids, 4 internal inconsistency, 5 size limit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{revenue_bounds, RevenueBound};
use crate::dynamics::{run_dynamics, Placement, Rotation};
use crate::equilibrium::{deviation_report_with_order, window_check_with_order, Side};
use crate::error::{Error, ErrorClass, Result};
use crate::generate::{self, Distribution};
use crate::io::{bounds_json, Arithmetic, RawBids, RawInstance};
use crate::mechanisms::{outcome, rank_by_bids, BidProfile, MechanismKind};
use crate::model::{smith_order, total_weighted_waiting, waiting_costs, Instance, QueueOrder};
use crate::numeric::{Exact, Literal, Scalar};
use crate::oracle::{enumerate_equilibria, extremes_of, oracle_optimal_ordering, OracleEntry, OracleLimits};

#[derive(Debug, Parser)]
#[command(name = "queuetion", version, about = "Position auctions for queue slots")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Arithmetic: exact rationals, floats, or exact when every input
    /// number is an integer, a decimal string or a "p/q" string.
    #[arg(long, value_enum, default_value_t = Mode::Auto, global = true)]
    mode: Mode,
    /// Relative comparison tolerance (default 0 exact, 1e-9 float).
    #[arg(long, global = true, allow_hyphen_values = true)]
    tolerance: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Vcg,
    Gsp,
}

impl From<Kind> for MechanismKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Vcg => MechanismKind::Vcg,
            Kind::Gsp => MechanismKind::Gsp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Window,
    Deviation,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Start {
    /// Every bid zero.
    Zero,
    /// Every bid equal to the bidder's value rate.
    Truthful,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RotationArg {
    RoundRobin,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Midpoint,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dist {
    Uniform,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Exact,
    Float,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Efficient order with per-position waiting costs.
    Order { instance: PathBuf },
    /// Run a mechanism on a bid file.
    Run {
        instance: PathBuf,
        bids: PathBuf,
        /// Must match the bid file's kind when given.
        #[arg(long, value_enum)]
        mechanism: Option<Kind>,
    },
    /// Check whether a bid profile is a Nash equilibrium.
    Verify {
        instance: PathBuf,
        bids: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Option<Kind>,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Equilibrium revenue bounds with witnesses.
    Bounds {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Kind,
    },
    /// Brute-force equilibrium enumeration for small instances.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Kind,
        /// Grid refinement level.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=8))]
        grid: u32,
        /// Write every equilibrium found to this file, one JSON object per line.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Best-response dynamics from a starting profile.
    Dynamics {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Kind,
        /// Starting bid file; overrides --start.
        #[arg(long)]
        bids: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Start::Zero)]
        start: Start,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        #[arg(long, value_enum, default_value_t = RotationArg::RoundRobin)]
        rotation: RotationArg,
        /// Required with --rotation random.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = PlacementArg::Midpoint)]
        placement: PlacementArg,
    },
    /// Generate a random instance file.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Dist::Uniform)]
        dist: Dist,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Exact)]
        precision: PrecisionArg,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Parse => 2,
        ErrorClass::Validation => 3,
        ErrorClass::Internal => 4,
        ErrorClass::SizeLimit => 5,
    }
}

/// Rows for CSV and table output. Rows follow participant index wherever
/// a row describes a participant.
#[derive(Debug, Default)]
struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

#[derive(Debug, Default)]
struct Report {
    /// JSON lines output: `lines` then `json`, one compact object each.
    stream: bool,
    lines: Vec<Value>,
    json: Value,
    summary: Vec<(&'static str, String)>,
    table: Table,
    /// Non-zero when the command ran but found an inconsistency.
    status: i32,
    /// Human-readable reason for a non-zero status.
    problem: Option<String>,
}

fn render(report: &Report, format: Format) -> Result<String> {
    let mut out = String::new();
    match format {
        Format::Json => {
            for line in &report.lines {
                out.push_str(&line.to_string());
                out.push('\n');
            }
            if report.stream {
                out.push_str(&report.json.to_string());
            } else {
                out.push_str(&serde_json::to_string_pretty(&report.json).expect("serializable"));
            }
            out.push('\n');
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let internal = |e: csv::Error| Error::Internal(format!("csv: {e}"));
            w.write_record(&report.table.headers).map_err(internal)?;
            for row in &report.table.rows {
                w.write_record(row).map_err(internal)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        }
        Format::Table => {
            for (k, v) in &report.summary {
                out.push_str(&format!("{k}: {v}\n"));
            }
            if !report.table.rows.is_empty() {
                if !report.summary.is_empty() {
                    out.push('\n');
                }
                out.push_str(&aligned(&report.table));
            }
        }
    }
    Ok(out)
}

fn aligned(table: &Table) -> String {
    let mut widths: Vec<usize> = table.headers.iter().map(|h| h.len()).collect();
    for row in &table.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(table.headers.clone());
    out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for row in &table.rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn ids_json<T>(inst: &Instance<T>, order: &QueueOrder) -> Value {
    json!(order.ids(inst))
}

fn bids_map<T: Scalar>(inst: &Instance<T>, bids: &[T]) -> Value {
    let map: Map<String, Value> = inst
        .participants()
        .iter()
        .zip(bids)
        .map(|(p, b)| (p.id.clone(), b.to_json()))
        .collect();
    Value::Object(map)
}

struct Ctx<'a> {
    limits: OracleLimits,
    tolerance: Option<&'a Literal>,
}

impl Ctx<'_> {
    fn tol<T: Scalar>(&self) -> Result<T> {
        match self.tolerance {
            Some(lit) => T::from_literal(lit),
            None => Ok(T::default_tolerance()),
        }
    }
}

fn cmd_order<T: Scalar>(raw: &RawInstance) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let ord = smith_order(&inst);
    let costs = waiting_costs(&inst, &ord);
    let total = total_weighted_waiting(&inst, &ord)?;
    let positions = ord.positions();
    let by_position: Vec<Value> = ord
        .as_slice()
        .iter()
        .enumerate()
        .map(|(pos, &p)| {
            let part = inst.participant(p);
            json!({
                "position": pos + 1,
                "id": part.id,
                "t": part.t.to_json(),
                "w": part.w.to_json(),
                "value_rate": part.value_rate().to_json(),
                "waiting_cost": costs[p].to_json(),
            })
        })
        .collect();
    let rows = inst
        .participants()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                p.id.clone(),
                (positions[i] + 1).to_string(),
                p.t.to_string(),
                p.w.to_string(),
                p.value_rate().to_string(),
                costs[i].to_string(),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({
            "order": ids_json(&inst, &ord),
            "positions": by_position,
            "total_weighted_waiting": total.to_json(),
        }),
        summary: vec![("order", ord.ids(&inst).join(",")), ("total_weighted_waiting", total.to_string())],
        table: Table {
            headers: vec!["id", "position", "t", "w", "value_rate", "waiting_cost"],
            rows,
        },
        ..Report::default()
    })
}

fn load_profile<T: Scalar>(
    inst: &Instance<T>,
    bids: &RawBids,
    mechanism: Option<Kind>,
) -> Result<BidProfile<T>> {
    if let Some(kind) = mechanism.map(MechanismKind::from) {
        if kind != bids.kind {
            return Err(Error::MechanismMismatch { expected: kind.name(), got: bids.kind.name() });
        }
    }
    bids.to_profile(inst)
}

fn cmd_run<T: Scalar>(raw: &RawInstance, bids: &RawBids, mechanism: Option<Kind>) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let profile = load_profile(&inst, bids, mechanism)?;
    let out = outcome(&inst, &profile)?;
    let positions = out.order.positions();
    let rows: Vec<Vec<String>> = inst
        .participants()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                p.id.clone(),
                (positions[i] + 1).to_string(),
                profile.bid(i).to_string(),
                out.waiting_costs[i].to_string(),
                out.payments[i].to_string(),
                out.total_losses[i].to_string(),
            ]
        })
        .collect();
    let participants: Vec<Value> = inst
        .participants()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "id": p.id,
                "position": positions[i] + 1,
                "bid": profile.bid(i).to_json(),
                "waiting_cost": out.waiting_costs[i].to_json(),
                "payment": out.payments[i].to_json(),
                "total_loss": out.total_losses[i].to_json(),
            })
        })
        .collect();
    Ok(Report {
        json: json!({
            "mechanism": profile.kind,
            "order": ids_json(&inst, &out.order),
            "participants": participants,
            "revenue": out.revenue.to_json(),
        }),
        summary: vec![
            ("mechanism", profile.kind.to_string()),
            ("order", out.order.ids(&inst).join(",")),
            ("revenue", out.revenue.to_string()),
        ],
        table: Table {
            headers: vec!["id", "position", "bid", "waiting_cost", "payment", "total_loss"],
            rows,
        },
        ..Report::default()
    })
}

fn cmd_verify<T: Scalar>(
    ctx: &Ctx,
    raw: &RawInstance,
    bids: &RawBids,
    mechanism: Option<Kind>,
    method: Method,
) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let profile = load_profile(&inst, bids, mechanism)?;
    let tol: T = ctx.tol()?;
    let order = rank_by_bids(profile.bids());
    let mut json = Map::new();
    json.insert("mechanism".into(), json!(profile.kind));
    json.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
    json.insert("order".into(), ids_json(&inst, &order));
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();

    let mut violations_json = None;
    if method != Method::Window {
        let report = deviation_report_with_order(&inst, &profile, &order, &tol)?;
        verdicts.push(report.equilibrium);
        let list: Vec<Value> = report
            .violations
            .iter()
            .map(|v| {
                rows.push(vec![
                    "deviation".to_owned(),
                    inst.participant(v.participant).id.clone(),
                    (v.from + 1).to_string(),
                    (v.target + 1).to_string(),
                    v.gain.to_string(),
                    String::new(),
                ]);
                json!({
                    "participant": inst.participant(v.participant).id,
                    "position": v.from + 1,
                    "target": v.target + 1,
                    "gain": v.gain.to_json(),
                })
            })
            .collect();
        violations_json = Some(Value::Array(list));
    }
    let mut window_json = None;
    if method != Method::Deviation {
        let report = window_check_with_order(&inst, &profile, &order, &tol)?;
        verdicts.push(report.satisfied);
        let list: Vec<Value> = report
            .failed_constraints
            .iter()
            .map(|c| {
                let side = match c.side {
                    Side::Lower => "lower",
                    Side::Upper => "upper",
                };
                rows.push(vec![
                    "window".to_owned(),
                    inst.participant(order.participant_at(c.position)).id.clone(),
                    (c.position + 1).to_string(),
                    c.target.map_or_else(String::new, |t| (t + 1).to_string()),
                    (c.lhs.clone() - c.rhs.clone()).to_string(),
                    c.to_string(),
                ]);
                json!({
                    "position": c.position + 1,
                    "target": c.target.map(|t| t + 1),
                    "side": side,
                    "lhs": c.lhs.to_json(),
                    "rhs": c.rhs.to_json(),
                    "constraint": c.to_string(),
                })
            })
            .collect();
        window_json = Some(json!({"satisfied": report.satisfied, "failed_constraints": list}));
    }
    let agree = verdicts.windows(2).all(|p| p[0] == p[1]);
    let equilibrium = verdicts[0];
    json.insert("equilibrium".into(), json!(equilibrium));
    if let Some(v) = violations_json {
        json.insert("violations".into(), v);
    }
    if let Some(w) = window_json {
        json.insert("window".into(), w);
    }
    if method == Method::Both {
        json.insert("methods_agree".into(), json!(agree));
    }
    let mut summary = vec![("mechanism", profile.kind.to_string()), ("equilibrium", equilibrium.to_string())];
    if method == Method::Both {
        summary.push(("methods_agree", agree.to_string()));
    }
    Ok(Report {
        json: Value::Object(json),
        summary,
        table: Table {
            headers: vec!["check", "participant", "position", "target", "excess", "constraint"],
            rows,
        },
        status: if agree { 0 } else { 4 },
        problem: (!agree).then(|| "window and deviation checks disagree".to_owned()),
        ..Report::default()
    })
}

fn cmd_bounds<T: Scalar>(ctx: &Ctx, raw: &RawInstance, kind: Kind) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let b = revenue_bounds(&inst, kind.into(), &ctx.limits)?;
    let row = |name: &str, bound: &RevenueBound<T>, method: &str| {
        vec![
            name.to_owned(),
            bound.revenue.to_string(),
            method.to_owned(),
            bound.witness.order.ids(&inst).join(" "),
        ]
    };
    let rows = vec![
        row("lower", &b.lower, b.lower_method.name()),
        row("upper", &b.upper, "construction"),
        vec!["upper_own_rate_sum".into(), b.own_rate_sum.to_string(), "formula".into(), String::new()],
    ];
    Ok(Report {
        json: bounds_json(&inst, &b),
        summary: vec![
            ("mechanism", b.mechanism.to_string()),
            ("lower", b.lower.revenue.to_string()),
            ("upper", b.upper.revenue.to_string()),
            ("upper_own_rate_sum", b.own_rate_sum.to_string()),
        ],
        table: Table { headers: vec!["bound", "revenue", "method", "order"], rows },
        ..Report::default()
    })
}

fn entry_json<T: Scalar>(inst: &Instance<T>, e: &OracleEntry<T>) -> Value {
    json!({
        "order": ids_json(inst, &e.order),
        "bids": bids_map(inst, &e.bids),
        "revenue": e.revenue.to_json(),
        "efficient": e.efficient,
    })
}

fn cmd_oracle<T: Scalar>(
    ctx: &Ctx,
    raw: &RawInstance,
    kind: Kind,
    grid: u32,
    dump: Option<&Path>,
) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let set = enumerate_equilibria(&inst, kind.into(), grid, &ctx.limits)?;
    let ex = extremes_of(&set)?;
    let (best_order, best_cost) = oracle_optimal_ordering(&inst, &ctx.limits)?;
    if let Some(path) = dump {
        let mut text = String::new();
        for e in &set.entries {
            text.push_str(&entry_json(&inst, e).to_string());
            text.push('\n');
        }
        fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    }
    let m = &set.meta;
    let rows = set
        .entries
        .iter()
        .map(|e| {
            vec![
                e.order.ids(&inst).join(" "),
                e.bids.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
                e.revenue.to_string(),
                e.efficient.to_string(),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({
            "mechanism": m.kind,
            "n": m.n,
            "refinement": m.refinement,
            "grid": m.grid,
            "orderings": m.orderings,
            "orderings_with_equilibria": m.orderings_with_equilibria,
            "candidates": m.candidates,
            "equilibria": set.entries.len(),
            "min": ex.overall.min.to_json(),
            "max": ex.overall.max.to_json(),
            "efficient_min": ex.efficient.min.to_json(),
            "efficient_max": ex.efficient.max.to_json(),
            "argmin": entry_json(&inst, &ex.overall.argmin),
            "argmax": entry_json(&inst, &ex.overall.argmax),
            "optimal_ordering": {
                "order": ids_json(&inst, &best_order),
                "total_weighted_waiting": best_cost.to_json(),
            },
        }),
        summary: vec![
            ("mechanism", m.kind.to_string()),
            ("equilibria", set.entries.len().to_string()),
            ("min", ex.overall.min.to_string()),
            ("max", ex.overall.max.to_string()),
            ("efficient_min", ex.efficient.min.to_string()),
            ("efficient_max", ex.efficient.max.to_string()),
        ],
        table: Table { headers: vec!["order", "bids", "revenue", "efficient"], rows },
        ..Report::default()
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_dynamics<T: Scalar>(
    ctx: &Ctx,
    raw: &RawInstance,
    bids: Option<&RawBids>,
    kind: Kind,
    start: Start,
    max_steps: u64,
    rotation: Rotation,
    placement: Placement,
) -> Result<Report> {
    let inst: Instance<T> = raw.to_instance()?;
    let tol: T = ctx.tol()?;
    let initial = match bids {
        Some(b) => load_profile(&inst, b, Some(kind))?,
        None => {
            let values = match start {
                Start::Zero => vec![T::zero(); inst.len()],
                Start::Truthful => inst.value_rates(),
            };
            BidProfile::new(kind.into(), values)?
        }
    };
    let trace = run_dynamics(&inst, &initial, max_steps as usize, rotation, placement, &tol)?;
    let id = |i: usize| inst.participant(i).id.clone();
    let lines = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "step": s.step,
                "mover": id(s.mover),
                "old_bid": s.old_bid.to_json(),
                "new_bid": s.new_bid.to_json(),
                "revenue": s.revenue.to_json(),
            })
        })
        .collect();
    let rows = trace
        .steps
        .iter()
        .map(|s| {
            vec![
                s.step.to_string(),
                id(s.mover),
                s.old_bid.to_string(),
                s.new_bid.to_string(),
                s.revenue.to_string(),
            ]
        })
        .collect();
    let final_revenue = outcome(&inst, &trace.final_profile)?.revenue;
    Ok(Report {
        stream: true,
        lines,
        json: json!({
            "summary": {
                "mechanism": trace.final_profile.kind,
                "converged": trace.converged,
                "moves": trace.steps.len(),
                "final_bids": bids_map(&inst, trace.final_profile.bids()),
                "final_revenue": final_revenue.to_json(),
            }
        }),
        summary: vec![
            ("converged", trace.converged.to_string()),
            ("moves", trace.steps.len().to_string()),
            ("final_revenue", final_revenue.to_string()),
        ],
        table: Table { headers: vec!["step", "mover", "old_bid", "new_bid", "revenue"], rows },
        ..Report::default()
    })
}

fn cmd_gen(n: u64, seed: u64, dist: Dist, precision: PrecisionArg, out: Option<&Path>) -> Result<Report> {
    let dist = match dist {
        Dist::Uniform => Distribution::Uniform,
        Dist::Lognormal => Distribution::Lognormal,
    };
    let precision = match precision {
        PrecisionArg::Exact => generate::Precision::Exact,
        PrecisionArg::Float => generate::Precision::Float,
    };
    let raw = RawInstance {
        participants: generate::generate(n as usize, seed, dist, precision)
            .into_iter()
            .map(|(id, t, w)| crate::io::RawParticipant { id, t, w })
            .collect(),
    };
    let json = raw.to_json();
    let rows = raw
        .participants
        .iter()
        .map(|p| vec![p.id.clone(), literal_text(&p.t), literal_text(&p.w)])
        .collect();
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&json).expect("serializable") + "\n";
        fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Report {
        json,
        summary: vec![("participants", n.to_string()), ("seed", seed.to_string())],
        table: Table { headers: vec!["id", "t", "w"], rows },
        ..Report::default()
    })
}

fn literal_text(lit: &Literal) -> String {
    match crate::io::literal_json(lit) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn parse_tolerance(text: &str) -> Result<Literal> {
    text.parse::<Literal>().or_else(|e| match text.trim().parse::<f64>() {
        Ok(f) => Ok(Literal::Float(f)),
        Err(_) => Err(e),
    })
}

macro_rules! with_scalar {
    ($exact:expr, $f:ident($($arg:expr),* $(,)?)) => {
        if $exact { $f::<Exact>($($arg),*) } else { $f::<f64>($($arg),*) }
    };
}

fn execute(cli: &Cli) -> Result<(Report, bool)> {
    let tolerance = cli.tolerance.as_deref().map(parse_tolerance).transpose()?;
    if let Some(t) = &tolerance {
        if t.to_f64() < 0.0 || !t.to_f64().is_finite() {
            return Err(Error::Parse("--tolerance must be a finite number >= 0".into()));
        }
    }
    let ctx = Ctx { limits: OracleLimits::from_env(), tolerance: tolerance.as_ref() };
    let arithmetic = match cli.mode {
        Mode::Auto => Arithmetic::Auto,
        Mode::Exact => Arithmetic::Exact,
        Mode::Float => Arithmetic::Float,
    };
    let exact_for = |raw: &RawInstance, bids: Option<&RawBids>| {
        let extra = bids.into_iter().flat_map(RawBids::literals);
        arithmetic.resolve(raw.literals().chain(extra))
    };
    let mut write_stdout = true;
    let report = match &cli.command {
        Command::Order { instance } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            with_scalar!(exact_for(&raw, None), cmd_order(&raw))?
        }
        Command::Run { instance, bids, mechanism } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            let bids = RawBids::from_json_str(&read(bids)?)?;
            with_scalar!(exact_for(&raw, Some(&bids)), cmd_run(&raw, &bids, *mechanism))?
        }
        Command::Verify { instance, bids, mechanism, method } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            let bids = RawBids::from_json_str(&read(bids)?)?;
            with_scalar!(exact_for(&raw, Some(&bids)), cmd_verify(&ctx, &raw, &bids, *mechanism, *method))?
        }
        Command::Bounds { instance, mechanism } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            with_scalar!(exact_for(&raw, None), cmd_bounds(&ctx, &raw, *mechanism))?
        }
        Command::Oracle { instance, mechanism, grid, dump } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            with_scalar!(exact_for(&raw, None), cmd_oracle(&ctx, &raw, *mechanism, *grid, dump.as_deref()))?
        }
        Command::Dynamics { instance, mechanism, bids, start, max_steps, rotation, seed, placement } => {
            let raw = RawInstance::from_json_str(&read(instance)?)?;
            let bids = bids.as_deref().map(read).transpose()?;
            let bids = bids.as_deref().map(RawBids::from_json_str).transpose()?;
            let rotation = match (rotation, seed) {
                (RotationArg::RoundRobin, _) => Rotation::RoundRobin,
                (RotationArg::Random, Some(seed)) => Rotation::Random(*seed),
                (RotationArg::Random, None) => {
                    return Err(Error::Parse("--rotation random needs --seed".into()))
                }
            };
            let placement = match placement {
                PlacementArg::Midpoint => Placement::Midpoint,
                PlacementArg::Minimal => Placement::MinimalWinning,
            };
            with_scalar!(
                exact_for(&raw, bids.as_ref()),
                cmd_dynamics(&ctx, &raw, bids.as_ref(), *mechanism, *start, *max_steps, rotation, placement)
            )?
        }
        Command::Gen { n, seed, dist, precision, out } => {
            write_stdout = out.is_none();
            cmd_gen(*n, *seed, *dist, *precision, out.as_deref())?
        }
    };
    Ok((report, write_stdout))
}

/// Parse `args` (program name first), run, write to `out` and `err`, and
/// return the exit code.
pub fn main_with_args<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return if code == 0 { 0 } else { 2 };
        }
    };
    let result = execute(&cli).and_then(|(report, write_stdout)| {
        let text = if write_stdout { render(&report, cli.format)? } else { String::new() };
        Ok((report, text))
    });
    match result {
        Ok((report, text)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 4;
            }
            if let Some(problem) = &report.problem {
                let _ = writeln!(err, "error: {problem}");
            }
            report.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
