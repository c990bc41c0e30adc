use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crsing::classify;
use crsing::hull::{self, HullProblem};
use crsing_cli::report::{CertificateDto, ExpectedDto};
use crsing_cli::{parse_spec, read_cloud, run_pipeline, to_embedding, Depth, PipelineOptions};

/// CR singularities of real m-manifolds in C^n.
#[derive(Parser)]
#[command(name = "crsing", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Manifold file (JSON or TOML) or a builtin such as coffman(4,5)
    manifold: String,
    /// Singular-point refinement tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Scan points per axis
    #[arg(long, default_value_t = 7)]
    grid: usize,
    /// Half-width of the search box around the origin
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write singular point coordinates as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline: locate, normalize, classify, audit, optional repair and probe
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        repair: bool,
        /// Run the hull probe at every point with this degree
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Singular points only
    Locate {
        #[command(flatten)]
        common: Common,
    },
    /// Singular points with normal forms and classes
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Full pipeline with repair of degenerate points
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Size of the quadratic perturbation
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Polynomial separation of a query point from a sample cloud
    Hull {
        /// CSV of 2n real coordinates per row
        #[arg(long)]
        samples: PathBuf,
        /// Query point as comma separated reals x1,y1,x2,y2,...
        #[arg(long, allow_hyphen_values = true)]
        query: String,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Expected stratum dimensions
    Dims { m: usize, n: usize },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Failure::Runtime(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn load(arg: &str) -> Result<String, Failure> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Failure::Validation(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn analyze(common: &Common, opts: PipelineOptions) -> Result<bool, Failure> {
    let spec = parse_spec(&load(&common.manifold)?).map_err(|e| Failure::Validation(e.to_string()))?;
    let f = to_embedding(&spec).map_err(|e| Failure::Validation(e.to_string()))?;
    let opts = PipelineOptions {
        tol: common.tol,
        grid: common.grid,
        radius: common.radius,
        seed: common.seed,
        ..opts
    };
    let report = run_pipeline(&f, &opts).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_out(common.report.as_deref(), &report.to_json())?;
    if let Some(p) = &common.csv {
        let text = report.points_csv().map_err(|e| Failure::Runtime(e.to_string()))?;
        write_out(Some(p), &text)?;
    }
    Ok(report.indeterminate.is_empty())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let base = PipelineOptions::default();
    match cli.cmd {
        Cmd::Analyze { common, repair, degree } => analyze(&common, PipelineOptions { repair, degree, ..base }),
        Cmd::Locate { common } => analyze(&common, PipelineOptions { depth: Depth::Locate, ..base }),
        Cmd::Classify { common } => analyze(&common, PipelineOptions { depth: Depth::Classify, ..base }),
        Cmd::Perturb { common, epsilon } => analyze(
            &common,
            PipelineOptions {
                repair: true,
                repair_epsilon: epsilon,
                ..base
            },
        ),
        Cmd::Hull {
            samples,
            query,
            degree,
            report,
        } => {
            let text = std::fs::read_to_string(&samples).map_err(|e| Failure::Validation(format!("{}: {e}", samples.display())))?;
            let cloud = read_cloud(&text).map_err(|e| Failure::Validation(e.to_string()))?;
            let q = read_cloud(&query).map_err(|e| Failure::Validation(format!("query: {e}")))?;
            let [q] = <[_; 1]>::try_from(q).map_err(|_| Failure::Validation("query: expected one point".into()))?;
            if cloud.first().is_some_and(|z| z.len() != q.len()) {
                return Err(Failure::Validation("query: dimension differs from samples".into()));
            }
            let cert = hull::separation_lp(&HullProblem::new(cloud.clone(), q.clone(), degree)).map_err(|e| Failure::Runtime(e.to_string()))?;
            let dto = CertificateDto::new(&cert, cert.verify(&cloud, &q));
            let json = serde_json::to_string_pretty(&dto).expect("certificate serializes") + "\n";
            write_out(report.as_deref(), &json)?;
            Ok(true)
        }
        Cmd::Dims { m, n } => {
            let dto = ExpectedDto::from(&classify::expected_dimensions(m, n));
            write_out(None, &(serde_json::to_string_pretty(&dto).expect("dims serialize") + "\n"))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: indeterminate rank decisions present");
            ExitCode::from(3)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
