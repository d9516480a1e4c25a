use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use flexnet::operation::{transient_batch, transient_csv, TransientObjective};
use flexnet::{
    enumerate_failures, parse_instance, run_algorithm, Algorithm, DesignDoc, DesignError,
    DesignProblem, Exec, FailureScenario, Instance, ModelError,
};

#[derive(Parser)]
#[command(
    name = "flexnet",
    version,
    about = "Robust tail and regenerator placement"
)]
struct Cli {
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place equipment for an instance and write the design as JSON.
    Design {
        input: PathBuf,
        #[arg(long, default_value = "optimal", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        /// Solver budget per failure scenario, in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Traffic delivered right after each failure, before links are remapped.
    Transient {
        input: PathBuf,
        design: PathBuf,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Maximize the common delivered fraction instead of the total.
        #[arg(long)]
        max_concurrent: bool,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
    /// Run every algorithm with the same total budget and tabulate costs.
    Compare {
        input: PathBuf,
        /// Solver budget per failure scenario, in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// CSV output file; printed before the table when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| {
        let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Parse(String),
    Infeasible(String),
    NoIncumbent(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Other(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::NoIncumbent(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m)
            | Failure::Parse(m)
            | Failure::Infeasible(m)
            | Failure::NoIncumbent(m)
            | Failure::Other(m) => m,
        }
    }
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        let msg = e.to_string();
        match e {
            DesignError::Infeasible { .. } | DesignError::InfeasibleModel(_) => {
                Failure::Infeasible(msg)
            }
            DesignError::NoSolution { .. } => Failure::NoIncumbent(msg),
            DesignError::Model(_) => Failure::Parse(msg),
            DesignError::Solver(_) => Failure::Other(msg),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Parse(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn budget(seconds: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(seconds)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| Failure::Parse(format!("time limit must be positive, got {seconds}")))
}

/// Writes `text` to `out`, or to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_design(
    input: &Path,
    algorithm: Algorithm,
    limit: f64,
    out: Option<&Path>,
    exec: Exec,
) -> Result<(), Failure> {
    let inst = load_instance(input)?;
    let limit = budget(limit)?;
    let problem = DesignProblem::new(&inst.topology, &inst.demands, inst.costs);
    let design = run_algorithm(algorithm, &problem, limit, exec)?;
    let doc = DesignDoc::from_design(&inst.topology, &design);
    let json =
        serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.to_string()))? + "\n";
    emit(out, &json)?;
    if !design.all_optimal() {
        eprintln!("warning: time limit reached; the design is feasible but not proven optimal");
    }
    let summary = format!(
        "{}: {} tails, {} regens, {} ports, total cost {}",
        algorithm.as_str(),
        design.placement.total_tails(),
        design.placement.total_regens(),
        design.placement.total_ports(),
        design.total_cost_reported()
    );
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn cmd_transient(
    input: &Path,
    design_path: &Path,
    out: Option<&Path>,
    objective: TransientObjective,
    limit: f64,
    exec: Exec,
) -> Result<(), Failure> {
    let inst = load_instance(input)?;
    let limit = budget(limit)?;
    let doc: DesignDoc = serde_json::from_str(&read(design_path)?)
        .map_err(|e| Failure::Parse(format!("{}: {e}", design_path.display())))?;
    let design = doc.to_design(&inst.topology)?;
    let nominal = design.plan_for(FailureScenario::NoFailure).ok_or_else(|| {
        Failure::Parse(format!(
            "{}: no plan for the no-failure scenario",
            design_path.display()
        ))
    })?;
    let scenarios = enumerate_failures(&inst.topology);
    let reports = transient_batch(
        &inst.topology,
        &inst.demands,
        nominal,
        &scenarios,
        objective,
        limit,
        exec,
    )?;
    emit(out, &transient_csv(&inst.topology, &reports))?;
    let mut fractions: Vec<f64> = reports.iter().map(|r| r.fraction).collect();
    fractions.sort_by(f64::total_cmp);
    let line = format!(
        "min fraction {:.4}, median fraction {:.4} over {} scenarios",
        fractions[0],
        median(&fractions),
        fractions.len()
    );
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

struct Row {
    algorithm: Algorithm,
    tails: u32,
    regens: u32,
    ports: u32,
    cost: f64,
    optimal: bool,
    seconds: f64,
}

fn cmd_compare(input: &Path, limit: f64, out: Option<&Path>, exec: Exec) -> Result<(), Failure> {
    let inst = load_instance(input)?;
    let limit = budget(limit)?;
    let problem = DesignProblem::new(&inst.topology, &inst.demands, inst.costs);
    let mut rows = Vec::new();
    for algorithm in Algorithm::ALL {
        let started = Instant::now();
        let d = run_algorithm(algorithm, &problem, limit, exec)?;
        rows.push(Row {
            algorithm,
            tails: d.placement.total_tails(),
            regens: d.placement.total_regens(),
            ports: d.placement.total_ports(),
            cost: d.total_cost_reported(),
            optimal: d.all_optimal(),
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "algorithm",
        "tails",
        "regens",
        "ports",
        "total_cost",
        "all_optimal",
        "wall_seconds",
    ];
    let csv_err = |e: csv::Error| Failure::Other(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            r.algorithm.as_str().to_string(),
            r.tails.to_string(),
            r.regens.to_string(),
            r.ports.to_string(),
            r.cost.to_string(),
            r.optimal.to_string(),
            format!("{:.3}", r.seconds),
        ])
        .map_err(csv_err)?;
    }
    let csv = w
        .into_inner()
        .map_err(|e| Failure::Other(e.to_string()))
        .and_then(|b| String::from_utf8(b).map_err(|e| Failure::Other(e.to_string())))?;
    let mut table = format!(
        "{:<8} {:>6} {:>6} {:>6} {:>10} {:>9}\n",
        "algo", "tails", "regens", "ports", "cost", "seconds"
    );
    let best = rows.iter().map(|r| r.cost).fold(f64::INFINITY, f64::min);
    for r in &rows {
        let mark = if r.optimal { "" } else { " (time limit)" };
        let _ = writeln!(
            table,
            "{:<8} {:>6} {:>6} {:>6} {:>10} {:>9.2}{mark}",
            r.algorithm.as_str(),
            r.tails,
            r.regens,
            r.ports,
            r.cost,
            r.seconds
        );
    }
    if best > 0.0 {
        for r in rows.iter().filter(|r| r.algorithm != Algorithm::Optimal) {
            let _ = writeln!(
                table,
                "{} costs {:+.1}% vs best",
                r.algorithm.as_str(),
                100.0 * (r.cost / best - 1.0)
            );
        }
    }

    match out {
        Some(_) => emit(out, &csv)?,
        None => println!("{csv}"),
    }
    print!("{table}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let result = match &cli.command {
        Command::Design {
            input,
            algorithm,
            time_limit,
            out,
        } => cmd_design(input, *algorithm, *time_limit, out.as_deref(), exec),
        Command::Transient {
            input,
            design,
            out,
            max_concurrent,
            time_limit,
        } => {
            let objective = if *max_concurrent {
                TransientObjective::MaxConcurrent
            } else {
                TransientObjective::MaxTotal
            };
            cmd_transient(input, design, out.as_deref(), objective, *time_limit, exec)
        }
        Command::Compare {
            input,
            time_limit,
            out,
        } => cmd_compare(input, *time_limit, out.as_deref(), exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
