//! Command-line front end: scenario generation, solving, validation and
//! comparison runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mmsched::ecsched::EcConfig;
use mmsched::netmodel::{evaluate_schedule, validate_schedule, NetworkDocument};
use mmsched::oracle::{brute_force_mtfs, FD_LIMIT, HD_LIMIT};
use mmsched::scenario::{generate, ScenarioConfig};
use mmsched::solve::{run, Algorithm, Outcome, SolveOptions};
use mmsched::{DirectedNetwork, Error, ModelFlags, Rational, Scalar, Schedule};

#[derive(Parser)]
#[command(name = "mmsched", version, about = "Max-min fair scheduling for mmWave backhaul networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a grid scenario network.
    Generate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Solve a network and write its schedule.
    Solve {
        network: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule against a network; exits with 1 on any violation.
    Validate {
        network: PathBuf,
        schedule: PathBuf,
        /// Model flags to check against instead of the network's own.
        #[arg(long)]
        flags: Option<ModelFlags>,
    },
    /// Print the throughput a schedule achieves.
    Eval { network: PathBuf, schedule: PathBuf },
    /// Solve by exhaustive enumeration.
    Oracle {
        network: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run several solvers over a seed sweep and print CSV rows.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "opt-fd,f3wc-fao,ec")]
        algos: Vec<Algorithm>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// JSON scenario configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    /// Macro layout such as `2x2`.
    #[arg(long, value_parser = parse_layout)]
    macros: Option<(usize, usize)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    flags: Option<ModelFlags>,
    #[arg(long)]
    relay_rf: Option<u32>,
    #[arg(long)]
    macro_rf: Option<u32>,
    #[arg(long)]
    beamwidth: Option<f64>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// EC time granularity.
    #[arg(long, default_value_t = 0.1)]
    granularity: f64,
    /// Solve in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
}

fn parse_layout(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected JxK, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ModelMismatch { .. } | Error::NotUniformOrthogonal(_) | Error::NotMaxShaped(_) => 3,
            Error::InvalidNetwork(_)
            | Error::InvalidConfig(_)
            | Error::UnreachableRelay(_)
            | Error::UnknownStream { .. }
            | Error::NoRelay
            | Error::MissingGeometry => 2,
            _ => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

/// Loads a network document and removes links into macros.
fn load_network(path: &Path) -> CliResult<(DirectedNetwork, ModelFlags)> {
    let doc = NetworkDocument::from_json(&read(path)?)?;
    if doc.network.has_macro_in_links() {
        log::info!("dropping links into macros");
    }
    Ok((doc.network.normalize_downlink()?, doc.flags))
}

fn load_schedule(path: &Path) -> CliResult<Schedule> {
    Ok(Schedule::from_json(&read(path)?)?)
}

impl ScenarioArgs {
    fn config(&self) -> CliResult<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", p.display()),
            })?,
            None => ScenarioConfig::default(),
        };
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(m) = self.macros {
            cfg.macros = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.flags {
            cfg.flags = f;
        }
        if let Some(r) = self.relay_rf {
            cfg.relay_rf = r;
        }
        if let Some(r) = self.macro_rf {
            cfg.macro_rf = r;
        }
        if let Some(b) = self.beamwidth {
            cfg.beamwidth_deg = b;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

impl SolverArgs {
    fn options(&self) -> CliResult<SolveOptions> {
        Ok(SolveOptions {
            ec: EcConfig::new(self.granularity)?,
        })
    }
}

/// Solver result reduced to floating point.
struct Report {
    outcome: Outcome<f64>,
    runtime_ms: f64,
}

fn to_f64<S: Scalar>(o: Outcome<S>) -> Outcome<f64> {
    Outcome {
        algorithm: o.algorithm,
        theta: o.theta.to_f64(),
        network_throughput: o.network_throughput.to_f64(),
        schedule: o.schedule.to_f64(),
        iterations: o.iterations,
        kappa: o.kappa,
        relaxed_theta: o.relaxed_theta.map(|x| x.to_f64()),
        guarantee: o.guarantee,
    }
}

fn solve_one(
    algo: Algorithm,
    net: &DirectedNetwork,
    flags: &ModelFlags,
    opts: &SolveOptions,
    exact: bool,
) -> CliResult<Report> {
    let start = Instant::now();
    let outcome = if exact {
        to_f64(run::<Rational>(algo, net, flags, opts)?)
    } else {
        run::<f64>(algo, net, flags, opts)?
    };
    Ok(Report {
        outcome,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn oracle_theta(net: &DirectedNetwork, flags: &ModelFlags, limit: Option<usize>) -> CliResult<(Rational, Rational, Schedule<Rational>)> {
    let limit = limit.unwrap_or(if flags.is_hd() { HD_LIMIT } else { FD_LIMIT });
    let s = brute_force_mtfs::<Rational>(net, flags, limit)?;
    Ok((s.theta, s.network_throughput, s.schedule))
}

fn execute(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match cli.command {
        Command::Generate { scenario, out: path } => {
            let cfg = scenario.config()?;
            let network = generate(&cfg)?;
            let doc = NetworkDocument {
                flags: cfg.flags,
                network,
            };
            write(&path, &doc.to_json())?;
            say(format!(
                "vertices={} links={} streams={} interference_pairs={}",
                doc.network.vertices.len(),
                doc.network.links.len(),
                doc.network.stream_count(),
                doc.network.interference_pairs.len()
            ));
        }
        Command::Solve {
            network,
            algo,
            solver,
            out: path,
        } => {
            let (net, flags) = load_network(&network)?;
            let r = solve_one(algo, &net, &flags, &solver.options()?, solver.exact)?;
            if let Some(p) = path {
                write(&p, &r.outcome.schedule.to_json())?;
            }
            say("algo,theta,network_tput,runtime_ms,iterations,kappa,slots,bound".into());
            let o = &r.outcome;
            say(format!(
                "{},{},{},{:.3},{},{},{},{}",
                o.algorithm,
                o.theta,
                o.network_throughput,
                r.runtime_ms,
                o.iterations,
                o.kappa.map(|k| k.to_string()).unwrap_or_default(),
                o.schedule.slots.len(),
                o.guarantee.map(|g| g.to_string()).unwrap_or_default()
            ));
        }
        Command::Validate {
            network,
            schedule,
            flags,
        } => {
            let (net, own) = load_network(&network)?;
            let sched = load_schedule(&schedule)?;
            let violations = validate_schedule(&net, &sched, &flags.unwrap_or(own));
            for v in &violations {
                say(v.to_string());
            }
            if !violations.is_empty() {
                return Err(Failure {
                    code: 1,
                    message: format!("{} violation(s)", violations.len()),
                });
            }
            say("valid".into());
        }
        Command::Eval { network, schedule } => {
            let (net, _) = load_network(&network)?;
            let report = evaluate_schedule(&net, &load_schedule(&schedule)?)?;
            say(format!("theta={:.6}", report.maxmin));
            say(format!("network_tput={:.6}", report.network));
            for (v, h) in &report.per_relay {
                say(format!("relay {v}: {h:.6}"));
            }
        }
        Command::Oracle {
            network,
            limit,
            out: path,
        } => {
            let (net, flags) = load_network(&network)?;
            let (theta, tput, sched) = oracle_theta(&net, &flags, limit)?;
            if let Some(p) = path {
                write(&p, &sched.to_f64().to_json())?;
            }
            say(format!("theta={theta} ({:.6})", theta.to_f64()));
            say(format!("network_tput={tput} ({:.6})", tput.to_f64()));
        }
        Command::Compare {
            scenario,
            seeds,
            algos,
            solver,
            out: path,
        } => {
            let base = scenario.config()?;
            let opts = solver.options()?;
            let mut csv = String::from("seed,algo,theta,network_tput,theta_over_oracle,runtime_ms\n");
            for seed in base.seed..base.seed + seeds {
                let cfg = ScenarioConfig {
                    seed,
                    ..base.clone()
                };
                let net = match generate(&cfg) {
                    Ok(n) => Some(n),
                    Err(e) => {
                        log::warn!("seed {seed}: {e}");
                        None
                    }
                };
                let oracle = net
                    .as_ref()
                    .and_then(|n| oracle_theta(n, &cfg.flags, None).ok())
                    .map(|(t, _, _)| t.to_f64());
                for &algo in &algos {
                    let Some(net) = &net else {
                        csv.push_str(&format!("{seed},{algo},,,,\n"));
                        continue;
                    };
                    let r = solve_one(algo, net, &cfg.flags, &opts, solver.exact)?;
                    let ratio = oracle
                        .filter(|t| *t > 0.0)
                        .map(|t| (r.outcome.theta / t).to_string())
                        .unwrap_or_default();
                    csv.push_str(&format!(
                        "{seed},{algo},{},{},{ratio},{:.3}\n",
                        r.outcome.theta, r.outcome.network_throughput, r.runtime_ms
                    ));
                }
            }
            match path {
                Some(p) => write(&p, &csv)?,
                None => say(csv.trim_end().to_string()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
