use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use lvstab::certify::is_stably_dissipative;
use lvstab::dynamics::{self, fmt17, AffineSet, Monitors};
use lvstab::foliation::exact_rank;
use lvstab::genlab::{random_sd_graph, sample_matrix, GenConfig};
use lvstab::graph::build_graph;
use lvstab::model::{render_matrix, LvSystem, MatrixDocument};
use lvstab::reduction::{reduce_full, reduce_simplified};
use lvstab::report::{analyze, AnalysisReport, SimulationRequest};
use lvstab::trim::{trim_sequence, trim_to_core};
use lvstab::{CertifyOutcome, Error};

#[derive(Parser)]
#[command(name = "lvstab", version, about = "Stability structure of Lotka-Volterra interaction matrices")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads for `analyze` over several files.
    #[arg(long, default_value_t = 1, global = true)]
    jobs: usize,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline on one or more matrix documents.
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        /// Also integrate the system and report a trajectory summary.
        #[arg(long)]
        simulate: bool,
    },
    /// Colored interaction graph.
    Graph {
        input: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Reduction fixpoints and classification.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Trim to the core; `--endpoints` fixes the first trims (1-based).
    Trim {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        endpoints: Vec<usize>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Exact rank and graph rank.
    Rank { input: PathBuf },
    /// Diagonal certificate of stable dissipativity.
    Certify { input: PathBuf },
    /// Integrate the system with RK4 (empirical).
    Simulate {
        input: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Random stably dissipative matrices, one document per line.
    Generate {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        black_fraction: f64,
        #[arg(long, default_value_t = 0.15)]
        extra_edge_prob: f64,
        #[arg(long, default_value_t = 0.5)]
        strong_cycle_prob: f64,
        #[arg(long, default_value_t = 5)]
        magnitude_bound: u32,
        #[arg(long)]
        rescale: bool,
    },
}

#[derive(Args, Clone)]
struct SimArgs {
    #[arg(long, default_value_t = 100.0)]
    t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Comma-separated positive start; drawn from `--seed` when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Vec<f64>,
    /// Linear equalities such as `x1=x4,x7=1`.
    #[arg(long)]
    monitor_plane: Option<String>,
}

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_REFUTED: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("lvstab: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
    }
}

fn load(path: &Path) -> Result<MatrixDocument, Failure> {
    let text = read_input(path)?;
    MatrixDocument::parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn system_of(doc: &MatrixDocument) -> Result<LvSystem, Failure> {
    Ok(match doc.system()? {
        Some(s) => s,
        None => LvSystem::with_unit_equilibrium(doc.matrix.clone()),
    })
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
        Format::Text => print!("{}", text()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn outcome_code(o: &CertifyOutcome) -> u8 {
    match o {
        CertifyOutcome::Certified(_) => EXIT_OK,
        CertifyOutcome::RefutedGraph(_) | CertifyOutcome::RefutedAlgebra { .. } => EXIT_REFUTED,
        CertifyOutcome::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn start_point(sim: &SimArgs, system: &LvSystem, seed: u64) -> Result<Vec<f64>, Failure> {
    if !sim.x0.is_empty() {
        if sim.x0.len() != system.n() {
            return Err(Error::DimensionMismatch {
                expected: system.n(),
                found: sim.x0.len(),
            }
            .into());
        }
        return Ok(sim.x0.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(system
        .equilibrium()
        .iter()
        .map(|q| lvstab::Scalar::to_f64(q) * rng.gen_range(0.5..2.0))
        .collect())
}

fn plane_of(sim: &SimArgs, n: usize) -> Result<Option<AffineSet>, Failure> {
    sim.monitor_plane
        .as_deref()
        .map(|p| AffineSet::parse(p, n))
        .transpose()
        .map_err(Failure::from)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Analyze {
            inputs,
            sim,
            simulate,
        } => run_analyze(cli, inputs, sim, *simulate),
        Command::Graph { input, dot } => {
            let doc = load(input)?;
            let g = build_graph(&doc.matrix)?;
            if let Some(p) = dot {
                write_file(p, &g.to_dot())?;
            }
            let json = g.to_json();
            emit(format, &json, || {
                format!(
                    "n: {}\nblack: {:?}\nedges: {:?}\nevery cycle has a strong link: {}\n",
                    json.n,
                    json.black,
                    json.edges,
                    g.is_stably_dissipative()
                )
            });
            Ok(EXIT_OK)
        }
        Command::Reduce { input, dot } => {
            let doc = load(input)?;
            let g = build_graph(&doc.matrix)?;
            let full = reduce_full(&g);
            let simplified = reduce_simplified(&g);
            if let Some(p) = dot {
                write_file(p, &full.to_dot())?;
            }
            #[derive(Serialize)]
            struct Out {
                full: lvstab::reduction::MarkedJson,
                simplified: lvstab::reduction::MarkedJson,
                classification: lvstab::AttractorClass,
            }
            let out = Out {
                full: full.to_json(),
                simplified: simplified.to_json(),
                classification: full.classify(),
            };
            emit(format, &out, || {
                format!(
                    "full: bullet {:?} cross {:?} circ {:?}\nsimplified: bullet {:?}\nclassification: {:?}\n",
                    out.full.bullet, out.full.cross, out.full.circ, out.simplified.bullet, out.classification
                )
            });
            Ok(EXIT_OK)
        }
        Command::Trim {
            input,
            endpoints,
            dot,
        } => {
            let doc = load(input)?;
            let g = build_graph(&doc.matrix)?;
            let report = if endpoints.is_empty() {
                trim_to_core(&g)?
            } else {
                let zero_based: Vec<usize> = endpoints
                    .iter()
                    .map(|&v| v.checked_sub(1).ok_or(Error::VertexOutOfRange(0)))
                    .collect::<Result<_, _>>()?;
                trim_sequence(&g, &zero_based)?
            };
            if let Some(p) = dot {
                write_file(p, &report.final_graph.to_dot())?;
            }
            let json = report.to_json();
            emit(format, &json, || {
                let mut s = String::new();
                for st in &json.steps {
                    s += &format!("trim at {} (anchor {}): removed {:?}\n", st.endpoint, st.anchor, st.removed_edges);
                }
                s += &format!(
                    "components: {:?}\ndiscarded: {:?}\nrank: {}\n",
                    json.final_components, json.discarded, json.rank
                );
                s
            });
            Ok(EXIT_OK)
        }
        Command::Rank { input } => {
            let doc = load(input)?;
            let g = build_graph(&doc.matrix)?;
            #[derive(Serialize)]
            struct Out {
                exact: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                graph: Option<usize>,
            }
            let out = Out {
                exact: exact_rank(&doc.matrix),
                graph: trim_to_core(&g).ok().map(|r| r.rank),
            };
            emit(format, &out, || match out.graph {
                Some(gr) => format!("rank: {} (graph rank {gr})\n", out.exact),
                None => format!("rank: {}\n", out.exact),
            });
            Ok(EXIT_OK)
        }
        Command::Certify { input } => {
            let doc = load(input)?;
            let outcome = is_stably_dissipative(&doc.matrix);
            let json = outcome.to_json();
            emit(format, &json, || {
                let mut s = json.outcome.to_string();
                if let Some(c) = &json.certificate {
                    s += &format!(" c = ({})", c.join(", "));
                }
                if let Some(r) = &json.reason {
                    s += &format!(": {r}");
                }
                if let Some(w) = &json.witness {
                    s += &format!("\nwitness: ({})", w.join(", "));
                }
                s + "\n"
            });
            Ok(outcome_code(&outcome))
        }
        Command::Simulate { input, sim, csv } => {
            let doc = load(input)?;
            let system = system_of(&doc)?;
            let x0 = start_point(sim, &system, cli.seed)?;
            let monitors = Monitors {
                certificate: is_stably_dissipative(&doc.matrix).certificate().cloned(),
                plane: plane_of(sim, system.n())?,
                record_every: 1,
            };
            let traj = dynamics::integrate(&system, &x0, sim.t_final, sim.step, &monitors)?;
            if let Some(p) = csv {
                let mut buf = Vec::new();
                traj.write_csv(&mut buf)?;
                fs::write(p, buf).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            }
            #[derive(Serialize)]
            struct Out {
                kind: &'static str,
                samples: usize,
                x0: Vec<String>,
                x_final: Vec<String>,
                max_relative_level_drift: String,
                max_hdot: String,
                final_plane_residual: String,
            }
            let out = Out {
                kind: "empirical",
                samples: traj.len(),
                x0: x0.iter().map(|v| fmt17(*v)).collect(),
                x_final: traj.last_state().iter().map(|v| fmt17(*v)).collect(),
                max_relative_level_drift: fmt17(traj.max_relative_level_drift()),
                max_hdot: fmt17(traj.hdot.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                final_plane_residual: fmt17(*traj.dist.last().expect("nonempty")),
            };
            emit(format, &out, || {
                format!(
                    "empirical trajectory, {} samples\nx(T) = ({})\nmax relative level drift {}\nfinal plane residual {}\n",
                    out.samples,
                    out.x_final.join(", "),
                    out.max_relative_level_drift,
                    out.final_plane_residual
                )
            });
            Ok(EXIT_OK)
        }
        Command::Generate {
            count,
            n,
            black_fraction,
            extra_edge_prob,
            strong_cycle_prob,
            magnitude_bound,
            rescale,
        } => {
            let base = GenConfig {
                n: *n,
                black_fraction: *black_fraction,
                extra_edge_prob: *extra_edge_prob,
                strong_cycle_prob: *strong_cycle_prob,
                magnitude_bound: *magnitude_bound,
                seed: cli.seed,
                rescale: *rescale,
            };
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for k in 0..*count {
                let cfg = base.with_seed(cli.seed.wrapping_add(k as u64));
                let g = random_sd_graph(&cfg)?;
                let a = sample_matrix(&g, &cfg)?;
                writeln!(out, "{}", render_matrix(&a))?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn run_analyze(cli: &Cli, inputs: &[PathBuf], sim: &SimArgs, simulate: bool) -> Result<u8, Failure> {
    let analyze_one = |path: &PathBuf| -> Result<AnalysisReport, Failure> {
        let doc = load(path)?;
        let request = if simulate {
            let system = system_of(&doc)?;
            Some(SimulationRequest {
                x0: start_point(sim, &system, cli.seed)?,
                t_final: sim.t_final,
                step: sim.step,
                plane: plane_of(sim, system.n())?,
            })
        } else {
            None
        };
        Ok(analyze(&doc, request.as_ref())?)
    };
    let jobs = cli.jobs.clamp(1, inputs.len());
    let results: Vec<Result<AnalysisReport, Failure>> = if jobs == 1 {
        inputs.iter().map(analyze_one).collect()
    } else {
        let chunk = inputs.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = inputs
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(analyze_one).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let mut code = EXIT_OK;
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok(rep) => {
                code = code.max(outcome_code(&rep.outcome));
                reports.push(rep);
            }
            Err(Failure(msg)) => {
                eprintln!("lvstab: {msg}");
                return Ok(EXIT_INPUT);
            }
        }
    }
    match cli.format {
        Format::Json if reports.len() == 1 => println!("{}", reports[0].to_json()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("serializable")),
        Format::Text => {
            for (path, rep) in inputs.iter().zip(&reports) {
                if inputs.len() > 1 {
                    println!("== {}", path.display());
                }
                print!("{}", rep.to_text());
            }
        }
    }
    Ok(code)
}
