mod random;
mod report;

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphwave::diophantine::{
    badly_approximable_statistic, continued_fraction, convergents_of, dirichlet_simultaneous,
    irrationality_exponent_estimate, DiophantineError,
};
use graphwave::ggcc::{evaluate, ggcc_length, optimal_watershed, Witness};
use graphwave::graph::{load, normalize, to_json, ControlSet, MetricGraph};
use graphwave::quasimodes::{build_quasimode, find_violating_path, metrics, QuasimodeError};
use graphwave::scenario::{self, NAMES};
use graphwave::spectral::{eigenvalues, min_mass, EigenOptions};
use graphwave::wavesim::{default_probes, observability_ratio, Pulse, PulseKind, Simulation, WaveError, WaveState, DEFAULT_CAP};
use graphwave::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use report::{invalid, num, numeric, opt, report, CliError, InputDigest, Table};

#[derive(Parser)]
#[command(name = "graphwave", version, about = "Controllability analysis of waves on metric graphs")]
struct Cli {
    #[command(flatten)]
    out: Output,
    /// Seed for commands that draw random instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// Emit a JSON report.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the geometric control condition with every criterion.
    CheckGgcc {
        /// Graph file, or `-` for standard input.
        graph: Option<PathBuf>,
        /// Include the matching and watershed certificates.
        #[arg(long)]
        certificates: bool,
        /// Instead of a graph, check agreement on this many random instances.
        #[arg(long, value_name = "COUNT", conflicts_with = "graph")]
        random: Option<usize>,
        #[arg(long, default_value_t = 8)]
        max_edges: usize,
    },
    /// Optimal watershed time and its watershed.
    OptimalTime { graph: PathBuf },
    /// Quasimodes along an unobserved path.
    Quasimode {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256,512")]
        n_list: Vec<u64>,
    },
    /// Eigenvalues up to a wavenumber.
    Spectrum {
        graph: PathBuf,
        #[arg(long)]
        kmax: f64,
        /// Report the smallest observation mass in each eigenspace.
        #[arg(long)]
        omega: bool,
        /// Scan step (capped at pi / (4 * total length)).
        #[arg(long)]
        step: Option<f64>,
    },
    /// Evolve localized pulses exactly.
    Simulate {
        graph: PathBuf,
        /// `edge=E,center=C,width=W[,kind=standing|left|right][,height=H]`
        #[arg(long, required = true)]
        pulse: Vec<String>,
        #[arg(long = "T")]
        t: f64,
        /// Write the energy trace here as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Smallest observed to initial energy ratio over the probe family.
    Observability {
        graph: PathBuf,
        #[arg(long = "T")]
        t: f64,
    },
    /// Continued fractions and simultaneous approximation.
    #[command(subcommand)]
    Diophantine(Dio),
    /// Print (or write) a named example graph.
    Scenario {
        /// One of the catalog names; omit with --list.
        name: Option<String>,
        /// Positional builder parameters; expressions such as sqrt(2) are allowed.
        params: Vec<String>,
        /// Write the graph here and print the path.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum Dio {
    /// Partial quotients and convergents of an expression.
    Cf {
        expr: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Dirichlet simultaneous approximation of comma-separated expressions.
    Simdir {
        #[arg(value_delimiter = ',')]
        exprs: Vec<String>,
        #[arg(long = "N", alias = "n")]
        n: u64,
    },
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
}

fn format(o: Output, default: Format) -> Format {
    if o.json {
        Format::Json
    } else if o.csv {
        Format::Csv
    } else {
        default
    }
}

fn read_input(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(invalid)?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

fn load_graph(path: &PathBuf, digest: &mut InputDigest) -> Result<(MetricGraph, ControlSet), CliError> {
    let bytes = read_input(path)?;
    digest.add(&bytes);
    let text = String::from_utf8(bytes).map_err(invalid)?;
    load(&text).map_err(invalid)
}

fn wave_err(e: WaveError) -> CliError {
    match e {
        WaveError::BreakpointCap(_) => numeric(e),
        _ => invalid(e),
    }
}

fn parse_pulse(text: &str, g: &MetricGraph) -> Result<Pulse, CliError> {
    let (mut edge, mut center, mut width) = (None, None, None);
    let (mut kind, mut height) = (PulseKind::Standing, 1.0);
    for part in text.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| invalid(format!("pulse field '{part}' needs key=value")))?;
        let f = || v.parse::<f64>().map_err(|_| invalid(format!("pulse field {k}: '{v}' is not a number")));
        match k.trim() {
            "edge" => edge = Some(v.parse::<usize>().map_err(|_| invalid(format!("pulse edge '{v}'")))?),
            "center" => center = Some(f()?),
            "width" => width = Some(f()?),
            "height" => height = f()?,
            "kind" => {
                kind = match v {
                    "standing" => PulseKind::Standing,
                    "left" => PulseKind::LeftMover,
                    "right" => PulseKind::RightMover,
                    _ => return Err(invalid(format!("pulse kind '{v}'"))),
                }
            }
            other => return Err(invalid(format!("unknown pulse field '{other}'"))),
        }
    }
    let edge = edge.ok_or_else(|| invalid("pulse needs edge="))?;
    let (c, w) = (center.ok_or_else(|| invalid("pulse needs center="))?, width.ok_or_else(|| invalid("pulse needs width="))?);
    if edge >= g.edges.len() || !(w > 0.0) {
        return Err(invalid(format!("pulse '{text}' does not fit the graph")));
    }
    Ok(Pulse { edge, start: c - w / 2.0, end: c + w / 2.0, kind, height })
}

/// What a command produced: a JSON result and, for tabular commands, a table.
struct Produced {
    results: Value,
    table: Option<Table>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (name, default) = match &cli.command {
        Command::CheckGgcc { .. } => ("check-ggcc", Format::Json),
        Command::OptimalTime { .. } => ("optimal-time", Format::Json),
        Command::Quasimode { .. } => ("quasimode", Format::Csv),
        Command::Spectrum { .. } => ("spectrum", Format::Csv),
        Command::Simulate { .. } => ("simulate", Format::Json),
        Command::Observability { .. } => ("observability", Format::Json),
        Command::Diophantine(_) => ("diophantine", Format::Json),
        Command::Scenario { .. } => ("scenario", Format::Json),
    };
    let fmt = format(cli.out, default);
    // the graph enters the digest by content, not by path
    let graph_arg = match &cli.command {
        Command::CheckGgcc { graph, .. } => graph.clone(),
        Command::OptimalTime { graph }
        | Command::Quasimode { graph, .. }
        | Command::Spectrum { graph, .. }
        | Command::Simulate { graph, .. }
        | Command::Observability { graph, .. } => Some(graph.clone()),
        _ => None,
    };
    let mut digest = InputDigest::new(name);
    for a in std::env::args_os().skip(1) {
        if graph_arg.as_deref() != Some(a.as_ref()) {
            digest.add(a.as_encoded_bytes());
        }
    }
    let produced = match cli.command {
        Command::Scenario { name, params, out, list } => return scenario_cmd(name, params, out, list, fmt),
        Command::CheckGgcc { graph, certificates, random, max_edges } => match (graph, random) {
            (_, Some(count)) => random_suite(count, max_edges, cli.seed),
            (Some(path), None) => {
                let (g, w) = load_graph(&path, &mut digest)?;
                check_ggcc(&g, &w, certificates)
            }
            (None, None) => return Err(invalid("give a graph file or --random COUNT")),
        },
        Command::OptimalTime { graph } => {
            let (g, w) = load_graph(&graph, &mut digest)?;
            optimal_time(&g, &w)
        }
        Command::Quasimode { graph, n_list } => {
            let (g, w) = load_graph(&graph, &mut digest)?;
            quasimode(&g, &w, &n_list)?
        }
        Command::Spectrum { graph, kmax, omega, step } => {
            let (g, w) = load_graph(&graph, &mut digest)?;
            spectrum(&g, omega.then_some(&w), kmax, step)?
        }
        Command::Simulate { graph, pulse, t, trace, samples } => {
            let (g, w) = load_graph(&graph, &mut digest)?;
            simulate(&g, &w, &pulse, t, trace, samples, fmt)?
        }
        Command::Observability { graph, t } => {
            let (g, w) = load_graph(&graph, &mut digest)?;
            observability(&g, &w, t)?
        }
        Command::Diophantine(d) => diophantine(d)?,
    };
    match (fmt, produced.table) {
        (Format::Csv, Some(t)) => Ok(t.to_csv()),
        (Format::Csv, None) => Err(invalid(format!("{name} has no CSV form; use --json"))),
        (Format::Json, _) => {
            let r = report(name, digest.hex(), produced.results);
            Ok(serde_json::to_string_pretty(&r).expect("serializable") + "\n")
        }
    }
}

fn scenario_cmd(name: Option<String>, params: Vec<String>, out: Option<PathBuf>, list: bool, fmt: Format) -> Result<String, CliError> {
    if list {
        return Ok(NAMES.join("\n") + "\n");
    }
    if fmt == Format::Csv {
        return Err(invalid("scenario has no CSV form"));
    }
    let name = name.ok_or_else(|| invalid("give a scenario name or --list"))?;
    let s = scenario::build(&name, &params).map_err(invalid)?;
    let text = to_json(&s.graph, &s.omega);
    match out {
        Some(path) => {
            fs::write(&path, &text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok(format!("{}\n", path.display()))
        }
        None => Ok(text + "\n"),
    }
}

fn check_ggcc(g: &MetricGraph, w: &ControlSet, certificates: bool) -> Produced {
    let n = normalize(g, w);
    let mut v = evaluate(&n);
    if !certificates && matches!(v.witness, Some(Witness::Certificates { .. })) {
        v.witness = None;
    }
    let c = &v.criteria;
    let mut table = Table::new(&[
        "holds", "L", "T_star", "bounded_length", "cycles_and_exterior_paths", "forest", "periodic_paths", "abp", "watershed",
    ]);
    table.rows.push(vec![
        v.holds.to_string(),
        opt(v.ggcc_length),
        opt(v.optimal_time),
        c.bounded_length.to_string(),
        c.cycles_and_exterior_paths.to_string(),
        c.forest.to_string(),
        c.periodic_paths.to_string(),
        c.abp.to_string(),
        c.watershed.to_string(),
    ]);
    Produced { results: serde_json::to_value(&v).expect("serializable"), table: Some(table) }
}

fn random_suite(count: usize, max_edges: usize, seed: u64) -> Produced {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut holds, mut disagree) = (0, Vec::new());
    for i in 0..count {
        let (g, w) = random::instance(&mut rng, max_edges.max(1));
        let v = evaluate(&normalize(&g, &w));
        holds += v.holds as usize;
        if !v.criteria.all_agree() {
            disagree.push(json!({"instance": i, "graph": to_json(&g, &w), "criteria": v.criteria}));
        }
    }
    let mut table = Table::new(&["seed", "instances", "holds", "disagreements"]);
    table.rows.push(vec![seed.to_string(), count.to_string(), holds.to_string(), disagree.len().to_string()]);
    Produced {
        results: json!({"seed": seed, "instances": count, "holds": holds, "all_agree": disagree.is_empty(), "disagreements": disagree}),
        table: Some(table),
    }
}

fn optimal_time(g: &MetricGraph, w: &ControlSet) -> Produced {
    let n = normalize(g, w);
    let ws = optimal_watershed(&n);
    let t = ws.as_ref().map(|x| x.0);
    let mut table = Table::new(&["holds", "L", "T_star"]);
    let l = ggcc_length(&n);
    table.rows.push(vec![ws.is_some().to_string(), opt(l), opt(t)]);
    Produced {
        results: json!({"holds": ws.is_some(), "L": l, "T_star": t, "watershed": ws.map(|x| x.1)}),
        table: Some(table),
    }
}

fn quasimode(g: &MetricGraph, w: &ControlSet, ns: &[u64]) -> Result<Produced, CliError> {
    let n = normalize(g, w);
    let path = find_violating_path(&n).map_err(invalid)?;
    let mut table = Table::new(&[
        "n", "mu", "q", "l2_closed", "l2_quadrature", "grad_closed", "grad_quadrature", "defect_closed", "defect_quadrature",
    ]);
    let mut rows = Vec::new();
    for &k in ns {
        let qm = build_quasimode(&n.graph, &path, k).map_err(|e| match e {
            QuasimodeError::TooOscillatory { .. } | QuasimodeError::Diophantine(_) => numeric(e),
            _ => invalid(e),
        })?;
        let m = metrics(&n.graph, &qm);
        table.rows.push(vec![
            k.to_string(),
            num(qm.mu),
            qm.approximation.q.to_string(),
            num(m.l2_norm_sq.closed_form),
            num(m.l2_norm_sq.quadrature),
            num(m.grad_norm_sq.closed_form),
            num(m.grad_norm_sq.quadrature),
            num(m.defect_sq.closed_form),
            num(m.defect_sq.quadrature),
        ]);
        rows.push(json!({"n": k, "mu": qm.mu, "q": qm.approximation.q, "metrics": m, "profiles": qm.profiles}));
    }
    Ok(Produced { results: json!({"path": path, "quasimodes": rows}), table: Some(table) })
}

fn spectrum(g: &MetricGraph, omega: Option<&ControlSet>, kmax: f64, step: Option<f64>) -> Result<Produced, CliError> {
    let opts = EigenOptions { step, ..EigenOptions::default() };
    let s = eigenvalues(g, kmax, &opts).map_err(invalid)?;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    let mut table = Table::new(&["k", "lambda", "multiplicity", "obs_mass_min"]);
    let mut rows = Vec::new();
    for p in &s.pairs {
        let mass = omega.map(|w| min_mass(p, w));
        table.rows.push(vec![num(p.k), num(p.lambda), p.multiplicity.to_string(), opt(mass)]);
        rows.push(json!({"k": p.k, "lambda": p.lambda, "multiplicity": p.multiplicity, "obs_mass_min": mass}));
    }
    Ok(Produced {
        results: json!({"eigenvalues": rows, "step": s.step, "warnings": s.warnings, "zero_mode": s.zero_mode}),
        table: Some(table),
    })
}

fn simulate(
    g: &MetricGraph,
    w: &ControlSet,
    pulses: &[String],
    t: f64,
    trace: Option<PathBuf>,
    samples: usize,
    fmt: Format,
) -> Result<Produced, CliError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("--T must be a non-negative number, got {t}")));
    }
    let mut st = WaveState::zero(g);
    for p in pulses {
        st.add_pulse(g, &parse_pulse(p, g)?).map_err(wave_err)?;
    }
    let max_len = g.edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let sim = Simulation::run(g, &st, t + max_len, DEFAULT_CAP).map_err(wave_err)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..g.edges.len()).map(|j| format!("energy_edge_{j}")));
    header.push("observed".into());
    let mut table = Table { header, rows: Vec::new() };
    let samples = samples.max(2);
    for i in 0..samples {
        let ti = t * i as f64 / (samples - 1) as f64;
        let mut row = vec![num(ti)];
        row.extend(sim.state_at(ti).edge_energy().into_iter().map(num));
        row.push(num(sim.observed_energy(w, ti)));
        table.rows.push(row);
    }
    if let Some(path) = &trace {
        fs::write(path, table.to_csv()).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    let end = sim.state_at(t);
    let results = json!({
        "T": t,
        "initial_energy": st.energy(),
        "final_energy": end.energy(),
        "observed_energy": sim.observed_energy(w, t),
        "breakpoints": sim.breakpoints(),
        "trace": trace.as_ref().map(|p| p.display().to_string()),
    });
    // with a trace file, CSV output is the one-line summary
    let table = if trace.is_some() && fmt == Format::Csv {
        let mut s = Table::new(&["T", "initial_energy", "final_energy", "observed_energy", "breakpoints"]);
        s.rows.push(vec![num(t), num(st.energy()), num(end.energy()), num(sim.observed_energy(w, t)), sim.breakpoints().to_string()]);
        s
    } else {
        table
    };
    Ok(Produced { results, table: Some(table) })
}

fn observability(g: &MetricGraph, w: &ControlSet, t: f64) -> Result<Produced, CliError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("--T must be a non-negative number, got {t}")));
    }
    let n = normalize(g, w);
    let probes = default_probes(g, &n);
    let r = observability_ratio(g, w, t, &probes).map_err(wave_err)?;
    let mut table = Table::new(&["T", "ratio", "probes", "argmin_probe"]);
    table.rows.push(vec![num(t), num(r.ratio), r.probes.to_string(), format!("\"{}\"", r.argmin_probe.label)]);
    Ok(Produced {
        results: json!({"T": t, "ratio": r.ratio, "argmin_probe": r.argmin_probe, "probes": r.probes}),
        table: Some(table),
    })
}

fn diophantine(d: Dio) -> Result<Produced, CliError> {
    match d {
        Dio::Cf { expr, depth } => {
            let alpha = Real::parse(&expr).map_err(invalid)?;
            let cf = continued_fraction(&alpha, depth);
            let conv = convergents_of(&alpha, &cf);
            let terms: Vec<String> = cf.terms().map(|t| t.to_string()).collect();
            let mut table = Table::new(&["index", "a", "p", "q", "error", "quality"]);
            for (i, (a, c)) in terms.iter().zip(&conv).enumerate() {
                table.rows.push(vec![i.to_string(), a.clone(), c.p.to_string(), c.q.to_string(), num(c.error), num(c.quality)]);
            }
            Ok(Produced {
                results: json!({
                    "expr": expr,
                    "value": alpha.to_f64(),
                    "terms": terms,
                    "rational": cf.rational,
                    "precision_exhausted": cf.precision_exhausted,
                    "convergents": conv,
                    "statistic": badly_approximable_statistic(&alpha, depth),
                    "exponent_estimate": irrationality_exponent_estimate(&alpha, depth),
                }),
                table: Some(table),
            })
        }
        Dio::Simdir { exprs, n } => {
            let alphas = exprs
                .iter()
                .map(|e| Real::parse(e).map(|r| r.to_f64()).map_err(invalid))
                .collect::<Result<Vec<f64>, _>>()?;
            let a = dirichlet_simultaneous(&alphas, n).map_err(|e| match e {
                DiophantineError::Overflow(..) | DiophantineError::NotFound(_) => numeric(e),
                _ => invalid(e),
            })?;
            let mut table = Table::new(&["j", "alpha", "p", "q", "error"]);
            for (j, (al, (p, err))) in alphas.iter().zip(a.p.iter().zip(&a.errors)).enumerate() {
                table.rows.push(vec![j.to_string(), num(*al), p.to_string(), a.q.to_string(), num(*err)]);
            }
            Ok(Produced {
                results: json!({"exprs": exprs, "alphas": alphas, "approximation": a, "bounds_hold": a.satisfies_bounds()}),
                table: Some(table),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
