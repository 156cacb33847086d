//! Argument parsing, dispatch and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commands;
use crate::error::CliError;
use crate::io::{self, Outputs, Table};
use crate::manifest::{Checks, RunManifest};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "sfkit", version, about = "Shapley-Folkman decompositions and duality-gap certificates")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "SFKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Drop wall times and SVG timestamps so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Manifest path; defaults to `<out stem>.manifest.json` next to the main output.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Command {
    /// Minkowski average of point sets (JSON list of {label, dim, points}).
    Minkowski(MinkowskiArgs),
    /// Convex hull of a 2-D point set.
    Hull(HullArgs),
    /// Convex envelope and nonconvexity measures of a sampled function.
    Envelope(EnvelopeArgs),
    /// Exact or approximate Caratheodory representation.
    Caratheodory(CaratheodoryArgs),
    /// Exact or approximate Shapley-Folkman decomposition of a block family.
    Sf(SfArgs),
    /// Convex relaxation of a separable problem and its gap certificate.
    Solve(SolveArgs),
    /// Sampling-without-replacement tail bounds against Monte Carlo.
    Concentration(ConcentrationArgs),
    /// Constraint-sampling bound against k-subset subproblems of an LP.
    Constraints(ConstraintsArgs),
    /// Minkowski averages of l_1/2 spheres converging to the l_1 ball.
    Figure1(Figure1Args),
}

#[derive(Debug, Args, Serialize)]
pub struct MinkowskiArgs {
    /// Point sets: a JSON list of {label, dim, points} (a single object is one set).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Largest number of points kept in the average.
    #[arg(long, default_value_t = 8192)]
    pub cap: usize,
    /// CSV of the averaged points; `<stem>.json` and `<stem>.svg` go alongside.
    #[arg(long, default_value = "minkowski.csv")]
    pub out: PathBuf,
    /// Also draw the average and its hull (2-D only).
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct HullArgs {
    /// Point set JSON {label, dim, points} with dim = 2.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// CSV of hull vertices in counterclockwise order.
    #[arg(long, default_value = "hull.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EnvelopeArgs {
    /// Sampled function JSON {dim, grid, values}.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// CSV with the function and its envelope on the grid; `<stem>.json` holds rho.
    #[arg(long, default_value = "envelope.csv")]
    pub out: PathBuf,
    /// Also report rho_1 .. rho_K.
    #[arg(long)]
    pub rho_k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaratheodoryMode {
    /// Conic reduction to at most D atoms.
    Exact,
    /// Convex reduction to at most D + 1 atoms.
    Convex,
    /// Frank-Wolfe approximation in l_p.
    Fw,
    /// Sampling without replacement.
    Sample,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    L2,
    Lp,
    Linf,
}

impl NormArg {
    pub fn spec(self, p: f64) -> sfkit_core::caratheodory::NormSpec {
        use sfkit_core::caratheodory::NormSpec;
        match self {
            NormArg::L2 => NormSpec::L2,
            NormArg::Lp => NormSpec::Lp(p),
            NormArg::Linf => NormSpec::Linf,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CaratheodoryArgs {
    #[arg(long, value_enum, default_value_t = CaratheodoryMode::Exact)]
    pub mode: CaratheodoryMode,
    /// JSON list of atoms (vectors of equal length).
    #[arg(long)]
    pub atoms: PathBuf,
    /// JSON list of weights; uniform when omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Approximation tolerance (fw, sample).
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    /// Exponent of the Frank-Wolfe error norm (>= 2).
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Norm of the sampling variant: linf uses the coordinatewise theorem.
    #[arg(long, value_enum, default_value_t = NormArg::Linf)]
    pub norm: NormArg,
    /// Exponent when `--norm lp`.
    #[arg(long, default_value_t = 2.0)]
    pub lp_p: f64,
    /// Sampling constant c; defaults to 2 log(4 D).
    #[arg(long)]
    pub c: Option<f64>,
    /// Redraws allowed in sample mode.
    #[arg(long, default_value_t = 64)]
    pub retries: usize,
    #[arg(long, default_value = "caratheodory.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SfArgs {
    /// Block family JSON {dim, blocks, weights}.
    #[arg(long)]
    pub family: PathBuf,
    /// Approximate decomposition by sampling.
    #[arg(long)]
    pub approx: bool,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    pub norm: NormArg,
    #[arg(long, default_value_t = 2.0)]
    pub lp_p: f64,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub retries: usize,
    #[arg(long, default_value = "sf.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertKind {
    Basic,
    Refined,
    Approx,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Problem JSON {blocks: [{dim, grid, values}], A, b}.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = CertKind::Refined)]
    pub cert: CertKind,
    /// Accuracy of the approximate representation.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Budget of the refined bound; defaults to n + m~ + 1.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Sampling constant of the approximate certificate.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub retries: usize,
    /// Skip the brute-force check of the certificate.
    #[arg(long)]
    pub no_brute_force: bool,
    /// Certificate JSON; a one-row summary goes to `<stem>.csv`.
    #[arg(long, default_value = "certificate.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaArg {
    /// Exact for N <= 10, the upper estimate otherwise.
    Auto,
    Exact,
    /// Monte-Carlo lower estimate.
    Mc,
    Upper,
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    /// Population JSON: a list of vectors or a list of numbers.
    #[arg(long)]
    pub pop: PathBuf,
    /// Sample size.
    #[arg(long)]
    pub m: usize,
    /// Deviations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = SigmaArg::Auto)]
    pub sigma: SigmaArg,
    /// Histories drawn for `--sigma mc`.
    #[arg(long, default_value_t = 10_000)]
    pub sigma_trials: usize,
    /// Target tail for the required sampling ratio.
    #[arg(long, default_value_t = 0.1)]
    pub delta0: f64,
    #[arg(long, default_value = "concentration.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstraintsArgs {
    /// LP JSON {c, A, b, box_radius}: min c'x, Ax <= b, |x_j| <= box_radius.
    #[arg(long)]
    pub lp: PathBuf,
    /// Subset sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub k: Vec<usize>,
    /// Random subsets per k; every subset when omitted.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value = "constraints.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Figure1Args {
    /// Numbers of averaged copies, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,10")]
    pub n_list: Vec<usize>,
    /// Points on the l_1/2 sphere.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = 8192)]
    pub cap: usize,
    /// Lattice points per unit in the l_1 ball reference.
    #[arg(long, default_value_t = 50)]
    pub lattice: usize,
    /// Average these point sets instead (one panel).
    #[arg(long)]
    pub sets: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "figure1")]
    pub out: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Minkowski(_) => "minkowski",
            Command::Hull(_) => "hull",
            Command::Envelope(_) => "envelope",
            Command::Caratheodory(_) => "caratheodory",
            Command::Sf(_) => "sf",
            Command::Solve(_) => "solve",
            Command::Concentration(_) => "concentration",
            Command::Constraints(_) => "constraints",
            Command::Figure1(_) => "figure1",
        }
    }

    fn default_manifest(&self) -> PathBuf {
        let out = match self {
            Command::Minkowski(a) => &a.out,
            Command::Hull(a) => &a.out,
            Command::Envelope(a) => &a.out,
            Command::Caratheodory(a) => &a.out,
            Command::Sf(a) => &a.out,
            Command::Solve(a) => &a.out,
            Command::Concentration(a) => &a.out,
            Command::Constraints(a) => &a.out,
            Command::Figure1(a) => return a.out.join("manifest.json"),
        };
        io::sibling(out, ".manifest.json")
    }
}

/// Shared state of one run.
pub struct Ctx {
    pub seed: u64,
    pub deterministic: bool,
    pub outputs: Outputs,
    pub checks: Checks,
}

impl Ctx {
    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        self.outputs.write(path, &io::to_json(value))
    }

    pub fn write_csv(&mut self, path: &Path, table: &Table) -> Result<(), CliError> {
        self.outputs.write(path, &table.to_bytes())
    }

    pub fn write_svg(&mut self, path: &Path, panel: &svg::Panel<'_>) -> Result<(), CliError> {
        let stamp = if self.deterministic {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        };
        self.outputs.write(path, svg::render(panel, stamp).as_bytes())
    }
}

/// Runs the command and writes the manifest. Returns the manifest and exit code.
pub fn run(cli: &Cli) -> (RunManifest, u8) {
    let start = Instant::now();
    let manifest_path = cli.manifest.clone().unwrap_or_else(|| cli.command.default_manifest());
    let base = match manifest_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut ctx = Ctx {
        seed: cli.seed,
        deterministic: cli.deterministic,
        outputs: Outputs::new(base),
        checks: Checks::default(),
    };
    let result = match &cli.command {
        Command::Minkowski(a) => commands::geometry::minkowski(a, &mut ctx),
        Command::Hull(a) => commands::geometry::hull(a, &mut ctx),
        Command::Envelope(a) => commands::envelope::run(a, &mut ctx),
        Command::Caratheodory(a) => commands::caratheodory::run(a, &mut ctx),
        Command::Sf(a) => commands::sf::run(a, &mut ctx),
        Command::Solve(a) => commands::solve::run(a, &mut ctx),
        Command::Concentration(a) => commands::concentration::run(a, &mut ctx),
        Command::Constraints(a) => commands::constraints::run(a, &mut ctx),
        Command::Figure1(a) => commands::figure1::run(a, &mut ctx),
    };
    let (mut code, error) = match &result {
        Ok(()) if ctx.checks.all_required_pass() => (0, None),
        Ok(()) => (1, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    let mut manifest = RunManifest {
        tool: "sfkit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        config: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
        seed: cli.seed,
        deterministic: cli.deterministic,
        wall_time_s: (!cli.deterministic).then(|| start.elapsed().as_secs_f64()),
        outputs: ctx.outputs.files().to_vec(),
        checks: ctx.checks.0,
        passed: code == 0,
        exit_code: code,
        error,
    };
    if let Err(e) = io::write_atomic(&manifest_path, &io::to_json(&manifest)) {
        eprintln!("sfkit: {e}");
        code = 3;
        manifest.exit_code = code;
        manifest.passed = false;
    }
    (manifest, code)
}
