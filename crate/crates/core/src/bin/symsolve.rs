use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use symsolve::matrix::{arrow, laplacian_2d, load_matrix_market, Permutation, SparseSymMatrix};
use symsolve::ordering::Ordering;
use symsolve::pipeline::{analyze, factorize_analyzed, Analysis};
use symsolve::runtime::{deadlock_fixture, simulate, trace_to_ndjson, RunStats};
use symsolve::solve::{relative_residual, solve};
use symsolve::symbolic::MAX_SUPERNODE_WIDTH;
use symsolve::{Error, MapKind, Protocol, RunConfig, Schedule};

#[derive(Parser)]
#[command(name = "symsolve", version, about = "Supernodal sparse Cholesky on a simulated distributed runtime")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symbolic analysis report as JSON.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 4)]
        np: usize,
        /// Also write the fan-both task graph for --np ranks as JSON.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Factor on the simulated runtime; prints run statistics as JSON.
    Factor {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: RunArgs,
        /// Write L (permuted numbering) as a Matrix Market coordinate file.
        #[arg(long)]
        factor_out: Option<PathBuf>,
        /// Write the composed permutation, one 0-based index per line.
        #[arg(long)]
        perm_out: Option<PathBuf>,
    },
    /// Solve A x = b.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Right-hand side, one value per line.
        #[arg(long)]
        rhs: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Solution file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Matrix Market file (symmetric coordinate).
    matrix: Option<PathBuf>,
    /// Built-in input: deadlock, arrow[:N], lap2d:KxK.
    #[arg(long, conflicts_with = "matrix")]
    fixture: Option<String>,
    /// Ordering: md (minimum degree) or natural.
    #[arg(long, default_value = "md")]
    ordering: String,
    /// Fill-reducing permutation file (new→old, 0-based), overrides --ordering.
    #[arg(long)]
    perm: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    np: usize,
    #[arg(long, default_value = "fanboth")]
    map: MapKind,
    #[arg(long, default_value = "pull")]
    protocol: Protocol,
    #[arg(long, default_value = "static")]
    schedule: Schedule,
    #[arg(long, default_value_t = 4)]
    send_slots: usize,
    #[arg(long, default_value_t = 4)]
    recv_slots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Task durations scaled by a uniform factor in [1, 1 + v].
    #[arg(long, default_value_t = 0.0)]
    perturbation: f64,
    /// Print a CSV header and row instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Write the event trace as newline-delimited JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(self.np, self.map, self.protocol, self.schedule)
            .with_slots(self.send_slots, self.recv_slots)
            .with_seed(self.seed)
            .with_perturbation(self.perturbation);
        c.record_trace = self.trace.is_some();
        c
    }
}

enum Loaded {
    Matrix { name: String, a: SparseSymMatrix, declared: Option<usize> },
    Deadlock,
}

fn load(input: &Input) -> Result<Loaded, Error> {
    if let Some(f) = &input.fixture {
        let (kind, arg) = f.split_once(':').unwrap_or((f.as_str(), ""));
        let bad = || Error::InvalidConfig(format!("unknown fixture `{f}`"));
        let a = match kind {
            "deadlock" => return Ok(Loaded::Deadlock),
            "arrow" => arrow(if arg.is_empty() { 32 } else { arg.parse().map_err(|_| bad())? }, true),
            "lap2d" => {
                let (x, y) = arg.split_once('x').ok_or_else(bad)?;
                laplacian_2d(x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        return Ok(Loaded::Matrix { name: f.clone(), a, declared: None });
    }
    let path = input.matrix.as_ref().ok_or_else(|| Error::InvalidConfig("give a matrix file or --fixture".into()))?;
    let mm = load_matrix_market(path)?;
    Ok(Loaded::Matrix { name: path.display().to_string(), a: mm.matrix, declared: Some(mm.declared_entries) })
}

fn ordering(input: &Input) -> Result<Ordering, Error> {
    if let Some(p) = &input.perm {
        return Ok(Ordering::Given(Permutation::read(p)?));
    }
    match input.ordering.as_str() {
        "md" | "minimum-degree" => Ok(Ordering::MinimumDegree),
        "natural" => Ok(Ordering::Natural),
        o => Err(Error::InvalidConfig(format!("unknown ordering `{o}`"))),
    }
}

fn matrix_input(input: &Input) -> Result<(String, SparseSymMatrix, Option<usize>, Analysis), Error> {
    match load(input)? {
        Loaded::Matrix { name, a, declared } => {
            let an = analyze(&a, &ordering(input)?, MAX_SUPERNODE_WIDTH)?;
            Ok((name, a, declared, an))
        }
        Loaded::Deadlock => Err(Error::InvalidConfig("the deadlock fixture has no matrix".into())),
    }
}

fn print_stats(run: &RunArgs, mut report: serde_json::Value, stats: &RunStats, residual: Option<f64>) {
    if run.csv {
        println!("{},residual", RunStats::csv_header());
        println!("{},{}", stats.csv_row(), residual.map(|r| r.to_string()).unwrap_or_default());
    } else {
        report["stats"] = serde_json::to_value(stats).expect("stats serialize");
        report["residual"] = json!(residual);
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
}

fn write_trace(run: &RunArgs, trace: &[symsolve::runtime::TraceEvent]) -> Result<(), Error> {
    if let Some(p) = &run.trace {
        std::fs::write(p, trace_to_ndjson(trace))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Analyze { input, np, graph } => {
            if np == 0 {
                return Err(Error::InvalidConfig("--np must be at least 1".into()));
            }
            let (name, _, declared, an) = matrix_input(&input)?;
            let mut report = serde_json::to_value(an.report(np)).expect("report serializes");
            report["matrix"] = json!(name);
            report["declared_entries"] = json!(declared);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if let Some(p) = graph {
                let g = an.graph(MapKind::FanBoth, np);
                std::fs::write(p, serde_json::to_string(&g).expect("graph serializes"))?;
            }
            Ok(())
        }
        Cmd::Factor { input, run, factor_out, perm_out } => {
            let cfg = run.config();
            if let Loaded::Deadlock = load(&input)? {
                let g = deadlock_fixture(cfg.procs.max(2));
                let cfg = RunConfig { procs: g.procs, ..cfg };
                let out = simulate(&g, None, &cfg)?;
                write_trace(&run, &out.trace)?;
                print_stats(&run, json!({ "matrix": "deadlock", "config": cfg }), &out.stats, None);
                return match out.stats.deadlock {
                    Some(cycle) => Err(Error::Deadlock { cycle }),
                    None => Ok(()),
                };
            }
            let (name, a, _, an) = matrix_input(&input)?;
            let f = factorize_analyzed(&an, &cfg)?;
            write_trace(&run, &f.trace)?;
            let residual = f.factor.residual(&a)?;
            print_stats(&run, json!({ "matrix": name, "n": a.n(), "config": cfg, "nnz_l": f.factor.nnz() }), &f.stats, Some(residual));
            if let Some(p) = factor_out {
                let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
                s.push_str(&format!("{} {} {}\n", a.n(), a.n(), f.factor.nnz()));
                for pn in &f.factor.panels {
                    for c in 0..pn.width {
                        for r in c..pn.m() {
                            s.push_str(&format!("{} {} {:e}\n", pn.rows[r] + 1, pn.first_col + c + 1, pn.get(r, c)));
                        }
                    }
                }
                std::fs::write(p, s)?;
            }
            if let Some(p) = perm_out {
                f.factor.perm.write(&p)?;
            }
            Ok(())
        }
        Cmd::Solve { input, rhs, run, output } => {
            let (_, a, _, an) = matrix_input(&input)?;
            let text = std::fs::read_to_string(&rhs)?;
            let b = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(k, l)| {
                    l.trim().parse::<f64>().map_err(|e| Error::Parse { line: k + 1, msg: format!("bad value: {e}") })
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            if b.len() != a.n() {
                return Err(Error::DimensionMismatch { expected: a.n(), got: b.len() });
            }
            let f = factorize_analyzed(&an, &run.config())?;
            write_trace(&run, &f.trace)?;
            let x = solve(&f.factor, &b)?;
            let res = relative_residual(&a, &x, &b)?;
            let body: String = x.iter().map(|v| format!("{v:e}\n")).collect();
            match output {
                Some(p) => {
                    std::fs::write(p, body)?;
                    println!("{}", json!({ "n": a.n(), "relative_residual": res }));
                }
                None => {
                    print!("{body}");
                    eprintln!("relative residual {res:e}");
                }
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::UnsymmetricInput | Error::IndexOutOfRange { .. } => 3,
        Error::NotPositiveDefinite(_) => 4,
        Error::Deadlock { .. } => 5,
        Error::DimensionMismatch { .. } => 6,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symsolve: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
