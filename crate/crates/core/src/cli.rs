//! Command-line front end.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 configuration error,
//! 3 parse error, 4 runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analytic::theta_lambda;
use crate::cola::{default_beta, generate_cell, run_cola};
use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::harness::{run_experiment, ExperimentConfig, ResolvedModel};
use crate::models::{ModelKind, ModelSpec};
use crate::multigraph::{deserialize, largest_component, serialize, Multigraph};
use crate::observables::{observe, DiameterMode, ObservableRecord, ObserveOptions, METRICS};
use crate::selftest::{run_selftest, Fault};
use crate::stats::summarize;
use crate::stream;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "giant",
    version,
    about = "Giant component samplers, decomposition and the cut-off line algorithm"
)]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0, env = "GIANT_SEED")]
    pub seed: u64,
    /// Output path, or "-" for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Density {
    /// Supercriticality, p = (1 + eps) / n.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Edge probability.
    #[arg(long)]
    pub p: Option<f64>,
}

impl Density {
    fn spec(&self, kind: ModelKind, n: usize) -> ModelSpec {
        match (self.eps, self.p) {
            (Some(eps), _) => ModelSpec::new(kind, n, eps),
            (None, Some(p)) => ModelSpec::with_p(kind, n, p),
            (None, None) => unreachable!("clap requires one of --eps/--p"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and write it as an edge list.
    Gen {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        density: Density,
    },
    /// Decompose the largest component of an edge-list file.
    Decompose {
        /// Input edge list, or "-" for standard input.
        #[arg(long = "in")]
        input: String,
    },
    /// Run the cut-off line algorithm on random cells.
    Cola {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        /// Phase ratio; repeat to check that the cut-off value ignores it.
        #[arg(long)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        /// Write the phase trace of replica 0 as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Measure observables on the largest component of an edge-list file.
    Observe {
        #[arg(long = "in")]
        input: String,
        /// Comma-separated metric names; all by default.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        #[arg(long)]
        fast_diameter: bool,
    },
    /// Replicated comparison of two models.
    Compare {
        #[arg(long)]
        model_a: String,
        #[arg(long)]
        model_b: Option<String>,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        density: Density,
        #[arg(long, default_value_t = 10)]
        replicas: usize,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "kernel_edges,core_size,max_two_path"
        )]
        metrics: Vec<String>,
        #[arg(long)]
        strict_regime: bool,
        #[arg(long)]
        fast_diameter: bool,
    },
    /// Run the exhaustive-oracle suites.
    Selftest {
        #[arg(long, hide = true, value_parser = ["peeling"])]
        inject_fault: Option<String>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn write_out(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(content.as_bytes())?;
        stdout.flush()?;
    } else {
        std::fs::write(path, content)?;
    }
    Ok(())
}

fn read_graph(path: &str) -> Result<Multigraph> {
    if path == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        deserialize(buf.as_bytes())
    } else {
        deserialize(BufReader::new(File::open(path)?))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(0) => Err(Error::Config("jobs must be at least 1".into())),
        Some(j) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Gen { model, n, density } => {
            let spec = density.spec(model.parse()?, *n);
            spec.validate()?;
            for w in spec.warnings() {
                eprintln!("warning: {w}");
            }
            let mut rng = stream::derive(cli.seed, spec.kind.as_str(), 0);
            let sample = spec.sample(&mut rng)?;
            // the edge-list format has no room for metadata
            eprintln!(
                "{}",
                serde_json::to_string(
                    &json!({"seed": cli.seed, "model": ResolvedModel::new(spec)})
                )?
            );
            let mut buf = Vec::new();
            serialize(&sample.graph, &mut buf)?;
            write_out(
                &cli.out,
                std::str::from_utf8(&buf).expect("edge list is ASCII"),
            )?;
        }
        Command::Decompose { input } => {
            let g = read_graph(input)?;
            let giant = g.induced_subgraph(&largest_component(&g));
            let d = decompose(&giant)?;
            let summary = d.summary();
            let content = match cli.format {
                Format::Json => to_json(&json!({
                    "config": {"input": input, "vertices": g.vertex_count(), "edges": g.edge_count(),
                               "component_size": giant.vertex_count()},
                    "summary": summary,
                }))?,
                Format::Csv => format!(
                    "component_size,core_size,stripped_cycle_count,stripped_cycle_vertex_count,kernel_vertices,kernel_edges,max_two_path,bush_size_max\n{},{},{},{},{},{},{},{}\n",
                    giant.vertex_count(),
                    summary.core_size,
                    summary.stripped_cycle_lengths.len(),
                    d.stripped_cycle_vertex_count(),
                    summary.kernel_vertices,
                    summary.kernel_edges,
                    summary.path_lengths.iter().max().unwrap_or(&0),
                    summary.bush_sizes.iter().max().unwrap_or(&0),
                ),
            };
            write_out(&cli.out, &content)?;
        }
        Command::Cola {
            n,
            lambda,
            beta,
            replicas,
            trace,
        } => {
            if !lambda.is_finite() || *lambda <= 0.0 {
                return Err(Error::Config(format!(
                    "lambda must be positive, got {lambda}"
                )));
            }
            if *replicas == 0 {
                return Err(Error::Config("replicas must be at least 1".into()));
            }
            let betas = if beta.is_empty() {
                vec![default_beta(*lambda)]
            } else {
                beta.clone()
            };
            if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
                return Err(Error::Config(format!("beta must lie in (0, 1), got {b}")));
            }
            let seed = cli.seed;
            let (n, lambda) = (*n, *lambda);
            let rows: Vec<Result<Vec<f64>>> = with_pool(cli.jobs, || {
                (0..*replicas)
                    .into_par_iter()
                    .map(|i| {
                        let cell = generate_cell(
                            n,
                            lambda,
                            &mut stream::derive(seed, "cola-cell", i as u64),
                        )?;
                        betas
                            .iter()
                            .map(|&b| {
                                let mut rng = stream::derive(seed, "cola-run", i as u64);
                                Ok(run_cola(&cell, b, true, &mut rng)?.lambda_c)
                            })
                            .collect()
                    })
                    .collect()
            })?;
            let rows = rows
                .into_iter()
                .enumerate()
                .map(|(i, r)| {
                    r.map_err(|e| Error::Replica {
                        index: i,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(path) = trace {
                let cell = generate_cell(n, lambda, &mut stream::derive(seed, "cola-cell", 0))?;
                let mut rng = stream::derive(seed, "cola-run", 0);
                let result = run_cola(&cell, betas[0], false, &mut rng)?;
                std::fs::write(path, result.trace_csv())?;
            }
            let invariant = rows
                .iter()
                .all(|r| r.iter().all(|x| x.to_bits() == r[0].to_bits()));
            let first: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let theta = theta_lambda(lambda).ok();
            let content = match cli.format {
                Format::Json => to_json(&json!({
                    "config": {"n": n, "lambda": lambda, "betas": betas, "replicas": replicas, "seed": seed,
                               "theta": theta, "expected_lambda_c": theta.map(|t| t * lambda)},
                    "lambda_c": rows,
                    "summary": summarize(&first),
                    "beta_invariant": invariant,
                }))?,
                Format::Csv => {
                    let mut s = String::from("replica,beta,lambda_c\n");
                    for (i, r) in rows.iter().enumerate() {
                        for (b, x) in betas.iter().zip(r) {
                            s.push_str(&format!("{i},{b},{x}\n"));
                        }
                    }
                    s
                }
            };
            write_out(&cli.out, &content)?;
        }
        Command::Observe {
            input,
            metrics,
            fast_diameter,
        } => {
            if let Some(bad) = metrics.iter().find(|m| !METRICS.contains(&m.as_str())) {
                return Err(Error::Config(format!("unknown metric {bad:?}")));
            }
            let mut options = if metrics.is_empty() {
                ObserveOptions::all()
            } else {
                ObserveOptions::for_metrics(metrics)
            };
            if *fast_diameter && options.diameter == DiameterMode::Exact {
                options.diameter = DiameterMode::Fast;
            }
            let g = read_graph(input)?;
            let giant = g.induced_subgraph(&largest_component(&g));
            let d = decompose(&giant)?;
            let record = observe(
                &giant,
                &d,
                &options,
                &mut stream::derive(cli.seed, "observe", 0),
            )?;
            let content = match cli.format {
                Format::Json => to_json(&json!({
                    "config": {"input": input, "seed": cli.seed, "options": options},
                    "record": record,
                }))?,
                Format::Csv => format!("{}\n{}\n", ObservableRecord::CSV_HEADER, record.csv_row()),
            };
            write_out(&cli.out, &content)?;
        }
        Command::Compare {
            model_a,
            model_b,
            n,
            density,
            replicas,
            metrics,
            strict_regime,
            fast_diameter,
        } => {
            let model_a = density.spec(model_a.parse()?, *n);
            let model_b = match model_b {
                Some(b) => Some(density.spec(b.parse()?, *n)),
                None => None,
            };
            let config = ExperimentConfig {
                model_a,
                model_b,
                replicas: *replicas,
                seed: cli.seed,
                metrics: metrics.clone(),
                strict_regime: *strict_regime,
                jobs: cli.jobs,
                fast_diameter: *fast_diameter,
            };
            config.validate()?;
            let report = run_experiment(&config)?;
            let content = match cli.format {
                Format::Json => report.to_json()? + "\n",
                Format::Csv => report.to_csv(),
            };
            write_out(&cli.out, &content)?;
        }
        Command::Selftest { inject_fault } => {
            let fault = inject_fault.as_deref().map(|_| Fault::Peeling);
            let report = run_selftest(cli.seed, fault)?;
            print!("{}", report.table());
            if cli.out != "-" {
                std::fs::write(&cli.out, to_json(&report)?)?;
            }
            return Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_SELFTEST
            });
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "giant", "gen", "--model", "gnp", "--n", "10", "--p", "0", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cli.seed, 7);
        assert!(matches!(cli.command, Command::Gen { .. }));
    }

    #[test]
    fn eps_and_p_are_exclusive() {
        assert!(Cli::try_parse_from([
            "giant", "gen", "--model", "gnp", "--n", "10", "--p", "0", "--eps", "0.1"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["giant", "gen", "--model", "gnp", "--n", "10"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["giant", "gen", "--bogus"]), EXIT_CONFIG);
        assert_eq!(
            run(["giant", "gen", "--model", "nope", "--n", "10", "--p", "0"]),
            EXIT_CONFIG
        );
        assert_eq!(
            exit_code(&Error::Parse {
                line: 2,
                message: String::new()
            }),
            EXIT_PARSE
        );
        assert_eq!(exit_code(&Error::Disconnected), EXIT_RUNTIME);
    }
}
