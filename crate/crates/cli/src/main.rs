//! Command-line front end for the `twomeans` library.
//!
//! Six subcommands cover the library surface: `eval` (one cutoff), `sweep`
//! (a cutoff grid as CSV/JSON), `minimize` (locate the optimal cutoff),
//! `certify` (sign and monotonicity suites with pass/fail lines), `lloyd`
//! (seeded Monte Carlo clustering), and `discrete` (the exact four-point
//! line model). Data-bearing reports are emitted as CSV with the fixed
//! header `n,a,E,dEda,M_minus,C_minus,C_plus` or as JSON envelopes that
//! echo the full invocation config, with floats printed to 17 significant
//! digits so every value round-trips.
//!
//! Exit status: 0 on success, 1 when a certification check fails, 2 on
//! invalid flags or validation errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use twomeans::optimizer::certification_grid;
use twomeans::{
    enumerate_optimal, lloyd, minimize_cutoff_with, monotonicity_violations, mse, sample_spheres,
    separation_threshold, Cluster, Cutoff, FourPointConfig, Initialization, ProjectedMeasure,
    SampleCloud, SearchMethod,
};

/// Ladder of dimensions used by the cross-dimension mass check.
const DIMENSION_LADDER: [u32; 6] = [4, 5, 6, 8, 12, 16];

/// Window of cutoffs on which the descending mass series is compared
/// against quadrature; chosen well inside the series' convergence region
/// so the term cap is never the limiting factor.
const SERIES_WINDOW: (f64, f64) = (1.05, 1.95);

/// Grid points this close to the equal-mass cutoff are skipped by the
/// cross-dimension check: all dimensions agree there and differences sink
/// below numerical resolution.
const EQUAL_MASS_EXCLUSION: f64 = 1e-6;

const SWEEP_HEADER: &str = "n,a,E,dEda,M_minus,C_minus,C_plus";

#[derive(Parser)]
#[command(
    name = "twomeans",
    version,
    about = "Exact and empirical 2-means clustering error for two touching unit spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the partition error and its derivative at one cutoff.
    Eval(EvalArgs),
    /// Tabulate error, derivative, mass and centroids over a cutoff grid.
    Sweep(SweepArgs),
    /// Locate the error-minimizing cutoff.
    Minimize(MinimizeArgs),
    /// Run the sign, monotonicity and series certification suites.
    Certify(CertifyArgs),
    /// Sample the two spheres and run seeded Lloyd iterations.
    Lloyd(LloydArgs),
    /// Solve the four-point line configuration exactly.
    Discrete(DiscreteArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    GoldenSection,
    DerivativeBisection,
    GridRefine,
}

impl From<Method> for SearchMethod {
    fn from(method: Method) -> Self {
        match method {
            Method::GoldenSection => SearchMethod::GoldenSection,
            Method::DerivativeBisection => SearchMethod::DerivativeBisection,
            Method::GridRefine => SearchMethod::GridRefine,
        }
    }
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::GoldenSection => "golden-section",
            Method::DerivativeBisection => "derivative-bisection",
            Method::GridRefine => "grid-refine",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Antipodal,
    RandomPoints,
}

impl Init {
    fn name(self) -> &'static str {
        match self {
            Init::Antipodal => "antipodal",
            Init::RandomPoints => "random-points",
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Ambient dimension (>= 2).
    #[arg(long)]
    n: u32,
    /// Cutoff position; negative values fold to their mirror image.
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Ambient dimension (>= 2).
    #[arg(long)]
    n: u32,
    /// Cutoff spacing; the grid covers [0, 2) in steps of this size.
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Ambient dimension (>= 2).
    #[arg(long)]
    n: u32,
    /// Width of the final minimizer bracket.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Method::GoldenSection)]
    method: Method,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Ambient dimension the per-dimension checks run at (>= 2).
    #[arg(long)]
    n: u32,
    /// Cutoff spacing of the certification grids.
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
    /// Allowed series-vs-quadrature deviation.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LloydArgs {
    /// Ambient dimension (>= 2).
    #[arg(long)]
    n: u32,
    /// Number of sampled points across both spheres.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Seed of the reproducible sampling stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Centroid-movement threshold that declares convergence.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Init::Antipodal)]
    init: Init,
    /// Also write the labeled point cloud to this CSV path.
    #[arg(long)]
    cloud_out: Option<PathBuf>,
    /// Write the summary to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiscreteArgs {
    /// Half-gap between the two point pairs (> 0).
    #[arg(long)]
    epsilon: f64,
    /// Bisection tolerance for the structure-change threshold.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<C: Serialize, R: Serialize> {
    config: C,
    result: R,
}

/// One row of the fixed tabular schema; centroids are reported in the
/// midpoint frame (sphere centers at -1 and +1). The derivative field is
/// absent at cutoffs where the closed form is refused.
#[derive(Serialize)]
struct SweepRow {
    n: u32,
    a: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "dEda")]
    deda: Option<f64>,
    #[serde(rename = "M_minus")]
    m_minus: f64,
    #[serde(rename = "C_minus")]
    c_minus: f64,
    #[serde(rename = "C_plus")]
    c_plus: f64,
}

impl SweepRow {
    fn build(measure: &ProjectedMeasure, cut: Cutoff) -> anyhow::Result<Self> {
        let masses = measure.masses(cut);
        let (c_minus, c_plus) = measure.centroids(cut)?.midpoint_frame();
        Ok(SweepRow {
            n: measure.dimension(),
            a: cut.value(),
            e: mse::total(measure, cut),
            deda: mse::derivative(measure, cut).ok(),
            m_minus: masses.minus,
            c_minus,
            c_plus,
        })
    }

    fn to_csv(&self) -> String {
        let deda = self.deda.map(|d| d.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.a, self.e, deda, self.m_minus, self.c_minus, self.c_plus
        )
    }
}

/// JSON formatter printing every float with 17 significant digits, enough
/// to reconstruct the exact binary value.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buffer = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut buffer, SignificantDigits);
    value.serialize(&mut serializer)?;
    buffer.push(b'\n');
    Ok(String::from_utf8(buffer)?)
}

fn emit(output: Option<&PathBuf>, content: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing report to {}", path.display())),
        None => {
            io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Cutoffs `k * step` covering `[0, 2)`.
fn cutoff_grid(step: f64) -> anyhow::Result<Vec<f64>> {
    ensure!(
        step.is_finite() && step > 0.0 && step < 2.0,
        "grid step must lie in (0, 2), got {step}"
    );
    Ok((0..)
        .map(|k| step * k as f64)
        .take_while(|&a| a < 2.0)
        .collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Eval(args) => run_eval(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Minimize(args) => run_minimize(args),
        Command::Certify(args) => run_certify(args),
        Command::Lloyd(args) => run_lloyd(args),
        Command::Discrete(args) => run_discrete(args),
    }
}

fn run_eval(args: EvalArgs) -> anyhow::Result<ExitCode> {
    let measure = ProjectedMeasure::new(args.n)?;
    let cut = Cutoff::new(args.a)?;
    let content = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Config {
                subcommand: &'static str,
                n: u32,
                a: f64,
                output_format: &'static str,
                output_path: Option<String>,
            }
            to_json(&Envelope {
                config: Config {
                    subcommand: "eval",
                    n: args.n,
                    a: args.a,
                    output_format: args.format.name(),
                    output_path: args.output.as_ref().map(|p| p.display().to_string()),
                },
                result: mse::report(&measure, cut)?,
            })?
        }
        Format::Csv => {
            let row = SweepRow::build(&measure, cut)?;
            format!("{SWEEP_HEADER}\n{}\n", row.to_csv())
        }
    };
    emit(args.output.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let measure = ProjectedMeasure::new(args.n)?;
    let rows = cutoff_grid(args.grid_step)?
        .into_iter()
        .map(|a| SweepRow::build(&measure, Cutoff::new(a)?))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let content = match args.format {
        Format::Csv => {
            let mut table = String::from(SWEEP_HEADER);
            table.push('\n');
            for row in &rows {
                table.push_str(&row.to_csv());
                table.push('\n');
            }
            table
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Config {
                subcommand: &'static str,
                n: u32,
                grid_step: f64,
                output_format: &'static str,
                output_path: Option<String>,
            }
            to_json(&Envelope {
                config: Config {
                    subcommand: "sweep",
                    n: args.n,
                    grid_step: args.grid_step,
                    output_format: args.format.name(),
                    output_path: args.output.as_ref().map(|p| p.display().to_string()),
                },
                result: rows,
            })?
        }
    };
    emit(args.output.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn run_minimize(args: MinimizeArgs) -> anyhow::Result<ExitCode> {
    let result = minimize_cutoff_with(args.n, args.tol, args.method.into())?;
    #[derive(Serialize)]
    struct Config {
        subcommand: &'static str,
        n: u32,
        tol: f64,
        method: &'static str,
        output_format: &'static str,
        output_path: Option<String>,
    }
    let content = to_json(&Envelope {
        config: Config {
            subcommand: "minimize",
            n: args.n,
            tol: args.tol,
            method: args.method.name(),
            output_format: "json",
            output_path: args.output.as_ref().map(|p| p.display().to_string()),
        },
        result,
    })?;
    emit(args.output.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
    /// Human-readable failing grid points.
    failures: Vec<String>,
}

fn run_certify(args: CertifyArgs) -> anyhow::Result<ExitCode> {
    let measure = ProjectedMeasure::new(args.n)?;
    ensure!(
        args.tol.is_finite() && args.tol > 0.0,
        "tolerance must be positive, got {}",
        args.tol
    );
    let n = args.n;
    let mut checks = Vec::new();

    let violations = monotonicity_violations(n, args.grid_step)?;
    let grid_len = certification_grid(args.grid_step).len();
    checks.push(Check {
        name: "derivative positivity",
        passed: violations.is_empty(),
        detail: format!("n = {n}, {grid_len} points"),
        failures: violations.iter().map(|a| format!("({n}, {a})")).collect(),
    });

    let ladder_grid: Vec<f64> = cutoff_grid(args.grid_step)?
        .into_iter()
        .filter(|&a| a > 0.0 && (a - 1.0).abs() > EQUAL_MASS_EXCLUSION)
        .collect();
    let mut ladder_failures = Vec::new();
    for &a in &ladder_grid {
        if !twomeans::dimension_monotonicity_holds(Cutoff::new(a)?, &DIMENSION_LADDER)? {
            ladder_failures.push(format!("(ladder {DIMENSION_LADDER:?}, {a})"));
        }
    }
    checks.push(Check {
        name: "dimension monotonicity",
        passed: ladder_failures.is_empty(),
        detail: format!("ladder {DIMENSION_LADDER:?}, {} points", ladder_grid.len()),
        failures: ladder_failures,
    });

    if n >= 3 {
        let bound_grid: Vec<f64> = cutoff_grid(args.grid_step)?
            .into_iter()
            .filter(|&a| a >= 1.0)
            .collect();
        let mut bound_failures = Vec::new();
        for &a in &bound_grid {
            if !measure.mass_lower_bound_holds(Cutoff::new(a)?)? {
                bound_failures.push(format!("({n}, {a})"));
            }
        }
        checks.push(Check {
            name: "moment lower bound",
            passed: bound_failures.is_empty(),
            detail: format!("n = {n}, {} points", bound_grid.len()),
            failures: bound_failures,
        });

        let series_grid: Vec<f64> = cutoff_grid(args.grid_step)?
            .into_iter()
            .filter(|&a| (SERIES_WINDOW.0..=SERIES_WINDOW.1).contains(&a))
            .collect();
        let mut series_failures = Vec::new();
        let mut worst = 0.0f64;
        for &a in &series_grid {
            let cut = Cutoff::new(a)?;
            let deviation = (measure.mass_series(cut)? - measure.mass_minus_quadrature(cut)).abs();
            worst = worst.max(deviation);
            if deviation >= args.tol {
                series_failures.push(format!("({n}, {a})"));
            }
        }
        checks.push(Check {
            name: "series agreement",
            passed: series_failures.is_empty(),
            detail: format!(
                "n = {n}, {} points, max deviation {worst:.2e}",
                series_grid.len()
            ),
            failures: series_failures,
        });
    }

    let mut report = String::new();
    let mut all_passed = true;
    for check in &checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        write!(report, "{verdict} {:<24} {}", check.name, check.detail)?;
        if !check.failures.is_empty() {
            write!(report, "; failing (n, a): {}", check.failures.join(", "))?;
        }
        report.push('\n');
        all_passed &= check.passed;
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    writeln!(
        report,
        "certification: {} ({passed}/{} checks passed)",
        if all_passed { "PASS" } else { "FAIL" },
        checks.len()
    )?;
    emit(args.output.as_ref(), &report)?;
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cloud_csv(cloud: &SampleCloud, labels: &[Cluster]) -> String {
    let n = cloud.dimension() as usize;
    let mut table = String::new();
    for axis in 1..=n {
        let _ = write!(table, "x{axis},");
    }
    table.push_str("source,cluster\n");
    for (index, (point, source)) in cloud.iter().enumerate() {
        for &coordinate in point {
            let _ = write!(table, "{coordinate},");
        }
        let _ = writeln!(table, "{source},{}", labels[index]);
    }
    table
}

fn run_lloyd(args: LloydArgs) -> anyhow::Result<ExitCode> {
    let cloud = sample_spheres(args.n, args.samples, args.seed)?;
    let init = match args.init {
        Init::Antipodal => Initialization::Antipodal,
        Init::RandomPoints => Initialization::RandomPoints,
    };
    let run = lloyd(&cloud, init, args.max_iter, args.tol)?;
    if let Some(path) = &args.cloud_out {
        fs::write(path, cloud_csv(&cloud, &run.labels))
            .with_context(|| format!("writing point cloud to {}", path.display()))?;
    }

    #[derive(Serialize)]
    struct Config {
        subcommand: &'static str,
        n: u32,
        samples: usize,
        seed: u64,
        max_iter: usize,
        tol: f64,
        init: &'static str,
        cloud_out: Option<String>,
        output_format: &'static str,
        output_path: Option<String>,
    }
    #[derive(Serialize)]
    struct Summary {
        iterations: usize,
        converged: bool,
        final_mse: f64,
        axis_deviation_angle: f64,
        extracted_cutoff: Option<f64>,
        cluster_sizes: [usize; 2],
        mse_trace: Vec<f64>,
        centroids: [Vec<f64>; 2],
    }
    let content = to_json(&Envelope {
        config: Config {
            subcommand: "lloyd",
            n: args.n,
            samples: args.samples,
            seed: args.seed,
            max_iter: args.max_iter,
            tol: args.tol,
            init: args.init.name(),
            cloud_out: args.cloud_out.as_ref().map(|p| p.display().to_string()),
            output_format: "json",
            output_path: args.output.as_ref().map(|p| p.display().to_string()),
        },
        result: Summary {
            iterations: run.iterations,
            converged: run.converged,
            final_mse: run.final_mse(),
            axis_deviation_angle: run.axis_deviation_angle,
            extracted_cutoff: run.extracted_cutoff,
            cluster_sizes: run.cluster_sizes(),
            mse_trace: run.mse_trace.clone(),
            centroids: run.centroids.clone(),
        },
    })?;
    emit(args.output.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn run_discrete(args: DiscreteArgs) -> anyhow::Result<ExitCode> {
    let config = FourPointConfig::new(args.epsilon)?;
    let optima = enumerate_optimal(args.epsilon)?;
    let threshold = separation_threshold(args.tol)?;

    #[derive(Serialize)]
    struct Config {
        subcommand: &'static str,
        epsilon: f64,
        tol: f64,
        output_format: &'static str,
        output_path: Option<String>,
    }
    #[derive(Serialize)]
    struct Report {
        points: [f64; 4],
        separation_threshold: f64,
        optima: Vec<twomeans::DiscretePartition>,
    }
    let content = to_json(&Envelope {
        config: Config {
            subcommand: "discrete",
            epsilon: args.epsilon,
            tol: args.tol,
            output_format: "json",
            output_path: args.output.as_ref().map(|p| p.display().to_string()),
        },
        result: Report {
            points: config.points,
            separation_threshold: threshold,
            optima,
        },
    })?;
    emit(args.output.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}
