//! Command-line front end: evaluation tables, verification suites,
//! distribution evolution and Monte Carlo simulation.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 domain/range error.

use clap::{Parser, Subcommand, ValueEnum};
use miopbd::bd::{total_variation, ContinuousBd, DiscreteBd, ProbabilityVector, RepeatedBd, RepeatedMode};
use miopbd::config::{ConfigError, RunConfig};
use miopbd::family::FamilyError;
use miopbd::verify::{run_suite, SuiteReport, SUITES};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "miopbd", version, about = "Multi-indexed discrete orthogonal polynomials and exactly solvable birth-death processes")]
struct Cli {
    /// JSON configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Family code: H, R, dH, dqqK, qH, qqK, aqK, qR, dqH, M, lqJ, lqL, qM.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Family parameters as name=value (repeatable or comma-separated).
    #[arg(long, global = true, value_delimiter = ',')]
    params: Vec<String>,
    /// Index set, e.g. --D 1,3
    #[arg(long = "D", global = true)]
    d: Option<String>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long = "N", global = true)]
    n: Option<u32>,
    /// Lattice-size override for semi-infinite families.
    #[arg(long, global = true)]
    lattice: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Tolerance overrides as name=value (repeatable).
    #[arg(long = "tol", global = true)]
    tol: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate polynomials, denominator polynomials, potentials or energies.
    Eval {
        #[arg(long, value_enum)]
        what: EvalWhat,
        /// Degree range lo:hi (inclusive), default 0:4.
        #[arg(long = "n-range")]
        n_range: Option<String>,
        /// Lattice range lo:hi (inclusive), default the working lattice.
        #[arg(long = "x-range")]
        x_range: Option<String>,
    },
    /// Run one verification suite (or `all`).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Evolve an initial distribution and print snapshots.
    Evolve {
        /// ct, dt, repeated-ct or repeated-dt.
        #[arg(long, default_value = "ct")]
        mode: String,
        /// delta:X, uniform, stationary or file:PATH (one JSON array).
        #[arg(long, default_value = "stationary")]
        p0: String,
        /// Comma-separated times (continuous modes).
        #[arg(long)]
        times: Option<String>,
        /// Comma-separated step counts (discrete modes).
        #[arg(long)]
        steps: Option<String>,
        #[arg(long = "tS")]
        t_s: Option<f64>,
        /// Repeated-process order.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Monte Carlo trajectories with the spectral solution as reference.
    Simulate {
        /// ct or dt.
        #[arg(long, default_value = "ct")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        x0: usize,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        steps: Option<u32>,
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long = "tS")]
        t_s: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalWhat {
    Poly,
    Xi,
    Potentials,
    Energy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Domain(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

fn classify(e: ConfigError) -> CliError {
    match e {
        ConfigError::Parse { .. } => CliError::Config(e.to_string()),
        ConfigError::Family(FamilyError::Range { .. }) => CliError::Domain(e.to_string()),
        ConfigError::Family(_) => CliError::Config(e.to_string()),
        ConfigError::Miop(_) => CliError::Domain(e.to_string()),
        ConfigError::Invalid(m) => CliError::Config(m),
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text).map_err(classify)?
    } else {
        RunConfig::default()
    };
    if let Some(f) = &cli.family {
        cfg.family = f.clone();
    }
    if cli.family.is_none() && cfg.family.is_empty() {
        return Err(CliError::Config(
            "no family given (use --family or --config)".into(),
        ));
    }
    if let Some(q) = cli.q {
        cfg.q = Some(q);
    }
    if let Some(n) = cli.n {
        cfg.n = Some(n);
    }
    if let Some(l) = cli.lattice {
        cfg.lattice = Some(l);
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(d) = &cli.d {
        cfg.d = parse_u32_list(d)?;
    }
    for kv in &cli.params {
        let (k, v) = split_kv(kv)?;
        cfg.params.insert(k.to_string(), v);
    }
    for kv in &cli.tol {
        let (k, v) = split_kv(kv)?;
        cfg.tolerances.insert(k.to_string(), v);
    }
    Ok(cfg)
}

fn split_kv(kv: &str) -> Result<(&str, f64), CliError> {
    let (k, v) = kv
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected name=value, got `{kv}`")))?;
    let v: f64 = v
        .parse()
        .map_err(|_| CliError::Config(format!("bad numeric value in `{kv}`")))?;
    Ok((k, v))
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Config(format!("bad index `{p}`")))
        })
        .collect()
}

fn parse_range(s: &Option<String>, default: (u32, u32)) -> Result<(u32, u32), CliError> {
    match s {
        None => Ok(default),
        Some(s) => {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("expected lo:hi, got `{s}`")))?;
            let lo = a.parse().map_err(|_| CliError::Config("bad range".into()))?;
            let hi = b.parse().map_err(|_| CliError::Config("bad range".into()))?;
            Ok((lo, hi))
        }
    }
}

fn parse_f64_list(s: &Option<String>, default: &[f64]) -> Result<Vec<f64>, CliError> {
    match s {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad number `{p}`")))
            })
            .collect(),
    }
}

fn emit(cli_out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match cli_out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn table_to_text(format: Format, header: &[String], rows: &[Vec<f64>]) -> String {
    match format {
        Format::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for row in rows {
                let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, serde_json::Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.clone(), json!(v)))
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
            serde_json::to_string_pretty(&rows).unwrap()
        }
    }
}

fn resolve_p0(spec: &str, lattice: usize, stationary: &[f64]) -> Result<ProbabilityVector, CliError> {
    if let Some(x) = spec.strip_prefix("delta:") {
        let x0: usize = x
            .parse()
            .map_err(|_| CliError::Config(format!("bad delta site `{x}`")))?;
        if x0 >= lattice {
            return Err(CliError::Domain(format!(
                "delta site {x0} outside the lattice of {lattice} points"
            )));
        }
        return Ok(ProbabilityVector::delta(lattice, x0));
    }
    match spec {
        "uniform" => Ok(ProbabilityVector::uniform(lattice)),
        "stationary" => ProbabilityVector::new(stationary.to_vec())
            .map_err(|e| CliError::Domain(e.to_string())),
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
                let vals: Vec<f64> = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("bad distribution file: {e}")))?;
                if vals.len() != lattice {
                    return Err(CliError::Domain(format!(
                        "distribution length {} does not match the lattice {lattice}",
                        vals.len()
                    )));
                }
                ProbabilityVector::new(vals).map_err(|e| CliError::Domain(e.to_string()))
            } else {
                Err(CliError::Config(format!("unknown p0 spec `{other}`")))
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = build_config(&cli)?;
    let tol = cfg.tolerances();
    match &cli.cmd {
        Cmd::Eval { what, n_range, x_range } => {
            let sys = cfg.build_system().map_err(classify)?;
            let (nlo, nhi) = parse_range(n_range, (0, 4))?;
            let top = sys.lattice_len() as u32 - 1;
            let (xlo, xhi) = parse_range(x_range, (0, top))?;
            if xhi > top + 1 || nhi >= sys.lattice_len() as u32 {
                return Err(CliError::Domain(format!(
                    "requested range exceeds the lattice (0..={top})"
                )));
            }
            let mut header = vec!["x".to_string()];
            let mut rows = Vec::new();
            match what {
                EvalWhat::Poly => {
                    for k in nlo..=nhi {
                        header.push(format!("P_D{k}"));
                    }
                    for x in xlo..=xhi {
                        let mut row = vec![x as f64];
                        for k in nlo..=nhi {
                            row.push(sys.poly_multi(k, x as f64));
                        }
                        rows.push(row);
                    }
                }
                EvalWhat::Xi => {
                    header.push("Xi_D".into());
                    header.push("Xi_D_shifted".into());
                    for x in xlo..=xhi {
                        rows.push(vec![
                            x as f64,
                            sys.xi_d(x as f64),
                            sys.xi_d_shifted(x as f64),
                        ]);
                    }
                }
                EvalWhat::Potentials => {
                    header.push("B_D".into());
                    header.push("D_D".into());
                    for x in xlo..=xhi {
                        rows.push(vec![x as f64, sys.b_def(x as usize), sys.d_def(x as usize)]);
                    }
                }
                EvalWhat::Energy => {
                    header = vec!["n".to_string(), "E_n".to_string()];
                    for k in nlo..=nhi {
                        rows.push(vec![k as f64, sys.energy(k)]);
                    }
                }
            }
            emit(&cli.out, &table_to_text(cli.format, &header, &rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite } => {
            let sys = cfg.build_system().map_err(classify)?;
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut reports: Vec<SuiteReport> = Vec::new();
            let mut all_pass = true;
            for name in names {
                let rep = run_suite(name, &sys, &tol).map_err(CliError::Config)?;
                for c in &rep.checks {
                    eprintln!(
                        "[{}] {:<55} residual {:>12.4e}  tol {:>9.1e}  {}",
                        rep.suite,
                        c.name,
                        c.residual,
                        c.tolerance,
                        if c.pass { "pass" } else { "FAIL" }
                    );
                }
                all_pass &= rep.pass;
                reports.push(rep);
            }
            let report = json!({
                "suites": reports,
                "config": cfg,
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit(&cli.out, &serde_json::to_string_pretty(&report).unwrap())?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Evolve {
            mode,
            p0,
            times,
            steps,
            t_s,
            m,
        } => {
            let sys = cfg.build_system().map_err(classify)?;
            let cbd = ContinuousBd::new(&sys).map_err(|e| CliError::Domain(e.to_string()))?;
            let lattice = cbd.lattice();
            let p0 = resolve_p0(p0, lattice, cbd.stationary())?;
            let mut header = vec!["t_or_step".to_string()];
            for x in 0..lattice {
                header.push(format!("p{x}"));
            }
            header.push("sum".into());
            header.push("truncation_error".into());
            let mut rows = Vec::new();
            let mut push_row = |t: f64, out: &ProbabilityVector, trunc: f64| {
                let mut row = vec![t];
                row.extend_from_slice(out.values());
                row.push(out.raw_sum);
                row.push(trunc);
                rows.push(row);
            };
            let mut meta = json!({});
            match mode.as_str() {
                "ct" => {
                    for t in parse_f64_list(times, &[0.0, 0.1, 1.0])? {
                        let out = cbd.evolve(&p0, t).map_err(|e| CliError::Domain(e.to_string()))?;
                        push_row(t, &out, cbd.truncation_flux * t);
                    }
                }
                "dt" => {
                    let dbd = DiscreteBd::from_continuous(&cbd, *t_s)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    meta = json!({"t_S": dbd.t_s, "kappa": dbd.kappa});
                    for s in parse_f64_list(steps, &[0.0, 1.0, 10.0])? {
                        let out = dbd
                            .evolve(&p0, s as u32)
                            .map_err(|e| CliError::Domain(e.to_string()))?;
                        push_row(s, &out, 0.0);
                    }
                }
                "repeated-ct" | "repeated-dt" => {
                    let order = m.unwrap_or(2);
                    let rmode = if mode == "repeated-ct" {
                        RepeatedMode::Continuous
                    } else {
                        RepeatedMode::Discrete
                    };
                    let rep = RepeatedBd::new(&cbd, order, rmode, *t_s)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    meta = json!({
                        "m": order,
                        "weights": rep.weights,
                        "t_S": rep.t_s,
                        "kappa_m": rep.kappa,
                        "E_m": rep.gen_eigen,
                    });
                    if rmode == RepeatedMode::Continuous {
                        for t in parse_f64_list(times, &[0.0, 0.1, 1.0])? {
                            let out = rep
                                .evolve_continuous(&p0, t)
                                .map_err(|e| CliError::Domain(e.to_string()))?;
                            push_row(t, &out, 0.0);
                        }
                    } else {
                        for s in parse_f64_list(steps, &[0.0, 1.0, 10.0])? {
                            let out = rep
                                .evolve_discrete(&p0, s as u32)
                                .map_err(|e| CliError::Domain(e.to_string()))?;
                            push_row(s, &out, 0.0);
                        }
                    }
                }
                other => return Err(CliError::Config(format!("unknown mode `{other}`"))),
            }
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "meta": meta,
                    "snapshots": rows,
                    "header": header,
                }))
                .unwrap(),
                Format::Csv => table_to_text(Format::Csv, &header, &rows),
            };
            emit(&cli.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate {
            mode,
            x0,
            t_end,
            steps,
            trajectories,
            t_s,
        } => {
            let sys = cfg.build_system().map_err(classify)?;
            let cbd = ContinuousBd::new(&sys).map_err(|e| CliError::Domain(e.to_string()))?;
            let lattice = cbd.lattice();
            if *x0 >= lattice {
                return Err(CliError::Domain(format!(
                    "x0 = {x0} outside the lattice of {lattice} points"
                )));
            }
            let seed = cfg.seed.unwrap_or(0);
            let (hist, reference, label) = match mode.as_str() {
                "ct" => {
                    let t = t_end.unwrap_or(1.0);
                    let hist = cbd.simulate_ensemble(*x0, t, *trajectories, seed);
                    let p0 = ProbabilityVector::delta(lattice, *x0);
                    let reference = cbd
                        .evolve(&p0, t)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    (hist, reference, format!("t={t}"))
                }
                "dt" => {
                    let dbd = DiscreteBd::from_continuous(&cbd, *t_s)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    let s = steps.unwrap_or(50);
                    let hist = dbd.simulate_ensemble(*x0, s, *trajectories, seed);
                    let p0 = ProbabilityVector::delta(lattice, *x0);
                    let reference = dbd
                        .evolve(&p0, s)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    (hist, reference, format!("steps={s}"))
                }
                other => return Err(CliError::Config(format!("unknown mode `{other}`"))),
            };
            let tv = total_variation(&hist, reference.values());
            // trajectory file for small runs
            if let Some(out) = &cli.out {
                if *trajectories <= 100 && mode == "ct" {
                    let mut text = String::from("trajectory,t,state\n");
                    for i in 0..*trajectories {
                        let mut rng_seed = seed;
                        let _ = &mut rng_seed;
                        let traj = cbd.simulate(*x0, t_end.unwrap_or(1.0), seed + i as u64);
                        for (t, x) in traj {
                            text.push_str(&format!("{i},{t},{x}\n"));
                        }
                    }
                    let traj_path = out.with_extension("trajectories.csv");
                    std::fs::write(&traj_path, text)
                        .map_err(|e| CliError::Io(format!("cannot write trajectories: {e}")))?;
                }
            }
            let report = json!({
                "mode": mode,
                "at": label,
                "trajectories": trajectories,
                "seed": seed,
                "histogram": hist,
                "spectral": reference.values(),
                "tv_distance": tv,
                "tv_tolerance": tol.mc_tv,
            });
            emit(&cli.out, &serde_json::to_string_pretty(&report).unwrap())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
