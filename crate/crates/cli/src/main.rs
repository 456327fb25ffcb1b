use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use crofton_cli::config::{Identity, Mode, RunConfig};
use crofton_cli::parse::{parse_count, parse_f64_list};
use crofton_cli::{run, transform, Report, TransformDirection};

/// Average zero counts of random functions via mixed volumes, with Monte
/// Carlo oracles and identity checks.
#[derive(Parser, Debug)]
#[command(name = "crofton", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CROFTON_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mixed-volume prediction of the average number of common zeros.
    Predict(ModelArgs),
    /// Monte Carlo zero counting.
    Simulate(ModelArgs),
    /// Prediction against simulation; fails unless within 3 stderr.
    Compare(ModelArgs),
    /// Numerical identity checks.
    Verify(VerifyArgs),
    /// Cosine transform of a coefficient list.
    Transform(TransformArgs),
    /// Execute a TOML run configuration.
    Run(RunArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Samples (accepts 1e6).
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// circle, torus<n>, s2, or products such as s1xs2.
    #[arg(long)]
    manifold: Option<String>,
    /// Comma-separated space descriptors, one per dimension.
    #[arg(long)]
    spaces: Option<String>,
    /// Spaces for the simulated side of `compare` (negative controls).
    #[arg(long)]
    estimate_spaces: Option<String>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    circle_nodes: Option<usize>,
    #[arg(long)]
    sphere_z: Option<usize>,
    #[arg(long)]
    sphere_phi: Option<usize>,
    #[arg(long)]
    grid_1d: Option<usize>,
    #[arg(long)]
    grid_torus: Option<usize>,
    /// Rows and columns of the sphere grid, e.g. "192,384".
    #[arg(long)]
    grid_sphere: Option<String>,
    /// Per-sample counts as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    identity: Option<IdentityArg>,
    /// Comma-separated bodies, e.g. "disk, ellipse 2 1".
    #[arg(long)]
    bodies: Option<String>,
    #[arg(long)]
    region: Option<String>,
    /// Orthonormal basis rows of the subspace, e.g. "1 0 0; 0 1 0".
    #[arg(long)]
    subspace: Option<String>,
    #[arg(long)]
    tangent_dims: Option<String>,
    /// Parallelotope edges as rows.
    #[arg(long)]
    edges: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    bandwidth: Option<usize>,
    /// For `hodge`.
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    spaces: Option<String>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum IdentityArg {
    Product,
    Alesker,
    Haar2,
    CroftonProduct,
    Af,
    Hodge,
    Constants,
}

impl From<IdentityArg> for Identity {
    fn from(a: IdentityArg) -> Self {
        match a {
            IdentityArg::Product => Identity::Product,
            IdentityArg::Alesker => Identity::Alesker,
            IdentityArg::Haar2 => Identity::Haar2,
            IdentityArg::CroftonProduct => Identity::CroftonProduct,
            IdentityArg::Af => Identity::Af,
            IdentityArg::Hodge => Identity::Hodge,
            IdentityArg::Constants => Identity::Constants,
        }
    }
}

#[derive(Args, Debug)]
struct TransformArgs {
    /// 2 (Fourier) or 3 (spherical harmonics).
    #[arg(long)]
    dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    cos: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sin: Option<String>,
    /// Real spherical-harmonic coefficients, (l+1)^2 of them.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, conflicts_with = "invert")]
    apply: bool,
    #[arg(long)]
    invert: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if common.samples.is_some() {
        config.params.samples = common.samples;
    }
    if common.seed.is_some() {
        config.params.seed = common.seed;
    }
    if common.report.is_some() {
        config.output.report = common.report.clone();
    }
    Ok(config)
}

fn model_config(mode: Mode, a: &ModelArgs) -> Result<RunConfig> {
    let mut c = base_config(&a.common)?;
    c.mode = mode;
    if a.manifold.is_some() {
        c.manifold = a.manifold.clone();
    }
    if let Some(s) = &a.spaces {
        c.spaces = split_list(s);
    }
    if let Some(s) = &a.estimate_spaces {
        c.estimate_spaces = split_list(s);
    }
    let p = &mut c.params;
    macro_rules! over {
        ($($f:ident),*) => { $(if a.$f.is_some() { p.$f = a.$f; })* };
    }
    over!(abs_tol, circle_nodes, sphere_z, sphere_phi, grid_1d, grid_torus);
    if let Some(g) = &a.grid_sphere {
        let v: Vec<usize> = g
            .split(|ch: char| ch == ',' || ch == 'x' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().with_context(|| format!("bad grid size '{t}'")))
            .collect::<Result<_>>()?;
        let [r, col] = v[..] else { bail!("--grid-sphere takes two sizes, e.g. 192,384") };
        p.grid_sphere = Some([r, col]);
    }
    if a.csv.is_some() {
        c.output.csv = a.csv.clone();
    }
    Ok(c)
}

fn verify_config(a: &VerifyArgs) -> Result<RunConfig> {
    let mut c = base_config(&a.common)?;
    c.mode = Mode::Verify;
    if let Some(i) = a.identity {
        c.verify.identity = Some(i.into());
    }
    macro_rules! over {
        ($($f:ident),*) => { $(if a.$f.is_some() { c.verify.$f = a.$f.clone(); })* };
    }
    over!(bodies, region, subspace, tangent_dims, edges);
    if a.tol.is_some() {
        c.params.tol = a.tol;
    }
    if a.bandwidth.is_some() {
        c.params.bandwidth = a.bandwidth;
    }
    if a.manifold.is_some() {
        c.manifold = a.manifold.clone();
    }
    if let Some(s) = &a.spaces {
        c.spaces = split_list(s);
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<Report> {
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    match cli.command {
        Command::Predict(a) => run(&model_config(Mode::Predict, &a)?),
        Command::Simulate(a) => run(&model_config(Mode::Simulate, &a)?),
        Command::Compare(a) => run(&model_config(Mode::Compare, &a)?),
        Command::Verify(a) => run(&verify_config(&a)?),
        Command::Run(a) => {
            let mut c = RunConfig::load(&a.config)?;
            if a.report.is_some() {
                c.output.report = a.report;
            }
            run(&c)
        }
        Command::Transform(a) => {
            let list = |s: &Option<String>| s.as_deref().map(parse_f64_list).transpose().map(Option::unwrap_or_default);
            let direction = if a.invert { TransformDirection::Invert } else { TransformDirection::Apply };
            let report = transform(a.dim, &list(&a.cos)?, &list(&a.sin)?, &list(&a.coeffs)?, direction)?;
            if let Some(path) = &a.report {
                report.write(path)?;
            }
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(report) => {
            print!("{}", report.to_json());
            if let Some(v) = report.result.get("verdict") {
                eprintln!("{}", serde_json::from_value::<crofton_cli::Verdict>(v.clone()).map(|v| v.to_string()).unwrap_or_default());
            } else if !report.pass() {
                eprintln!("check failed");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
