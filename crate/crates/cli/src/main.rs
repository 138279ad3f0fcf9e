//! `msplit`: generate test systems, classify matrices, run multisplitting
//! solves, analyze iteration matrices and recompute the convergence tables.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use msplit::analysis::{eigenvalues, extrapolation_interval, hat_spectral_radius, iteration_matrix, OpenInterval};
use msplit::blockcore::{classify, classify_with_certificate};
use msplit::generators::{self, EllipticCase, EllipticParams};
use msplit::io::{self, MmFormat, SplittingDescriptor, SplittingSets};
use msplit::solver::{solve_extrapolated, solve_multisplitting, Execution, SolveOptions, StopKind, StopRule, Termination};
use msplit::splitting::{BlockWeights, IndexSetSplit};
use msplit::tables::{self, Table};
use msplit::{BlockMatrix, BlockVector, Error, SolveReport};

const THREADS_ENV: &str = "MSPLIT_THREADS";

#[derive(Parser)]
#[command(name = "msplit", version, about = "Block multisplitting solvers for generalized H-matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a test matrix, right-hand side and splitting descriptor.
    Generate(GenerateArgs),
    /// Report membership in Z, Z-hat, D and certified M/H classes.
    Classify(ClassifyArgs),
    /// Run a multisplitting, extrapolated or BGAOR iteration.
    Solve(SolveArgs),
    /// Spectral radii of the iteration matrix and the lifted splitting.
    Analyze(AnalyzeArgs),
    /// Recompute a published convergence table and compare cell by cell.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Example51,
    Example52,
    Euler,
    Elliptic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightScheme {
    /// `E_s = I / r`
    Uniform,
    /// Outer-block weights of the second table
    Outer,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Quarter,
    Sixth,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Output directory for matrix.mtx, rhs.mtx and splitting.toml.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "coordinate")]
    format: FormatArg,
    /// Also write a splitting descriptor.
    #[arg(long)]
    splitting: bool,
    /// Number of splittings for example52 (1..=6).
    #[arg(long, default_value_t = 6)]
    r: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    weights: WeightScheme,
    /// Emit the BGAOR R/S/T descriptor instead of index sets.
    #[arg(long)]
    bgaor: bool,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Outer dimension of the Euler family.
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Inner dimension of the Euler family.
    #[arg(long, default_value_t = 3)]
    r_inner: usize,
    /// Elliptic grid: number of blocks.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Elliptic grid: block size (defaults to n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "quarter")]
    case: CaseArg,
    #[arg(long, requires = "m2")]
    m1: Option<usize>,
    #[arg(long, requires = "m1")]
    m2: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Block size when the file has no `%%block` header.
    #[arg(long)]
    block_size: Option<usize>,
    /// Comma-separated scaling vector to check for the comparison matrix.
    #[arg(long, value_delimiter = ',')]
    certificate: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Method {
    Multi,
    Extrapolated,
    Bgaor,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    AbsDiff,
    RelDiff,
    Residual,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    splitting: PathBuf,
    #[arg(long, value_enum, default_value = "multi")]
    method: Method,
    #[arg(long)]
    tau: Option<f64>,
    /// One value for all splittings or one per splitting.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// `ones`, `a-times-ones`, or a Matrix Market vector file.
    #[arg(long, default_value = "a-times-ones")]
    rhs: String,
    /// `zeros`, `ones`, or a Matrix Market vector file.
    #[arg(long, default_value = "zeros")]
    x0: String,
    #[arg(long, value_enum, default_value = "abs-diff")]
    stop: StopArg,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Compute the local solves one after another.
    #[arg(long)]
    serial: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the per-iteration stopping metric as CSV.
    #[arg(long)]
    norms_csv: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Write all eigenvalues of the iteration matrix as CSV.
    #[arg(long)]
    eigenvalues: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    T51,
    T52,
    T53,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    table: TableArg,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    serial: bool,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Acceptance(String),
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(msg) => Failure::Usage(format!("I/O error: {msg}")),
            Error::Parse { .. }
            | Error::BadParams(_)
            | Error::BadTau(_)
            | Error::BadStopRule(_)
            | Error::DimensionMismatch(_)
            | Error::WeightSum { .. }
            | Error::NotPositiveVector { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance(msg)) => {
            eprintln!("msplit: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("msplit: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("msplit: numerical error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn print_json<T: Serialize>(value: &T, path: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

/// Thread pool sized by `MSPLIT_THREADS`, defaulting to the number of splittings.
fn pool(r: usize) -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => r.max(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Numerical(format!("cannot start thread pool: {e}")))
}

fn cmd_generate(args: &GenerateArgs) -> CmdResult {
    let (a, b, descriptor) = generate_family(args)?;
    fs::create_dir_all(&args.out)?;
    let format = match args.format {
        FormatArg::Array => MmFormat::Array,
        FormatArg::Coordinate => MmFormat::Coordinate,
    };
    io::save_matrix(&args.out.join("matrix.mtx"), &a, format)?;
    io::save_vector(&args.out.join("rhs.mtx"), &b)?;
    let mut written = vec!["matrix.mtx", "rhs.mtx"];
    if args.splitting {
        descriptor.save(&args.out.join("splitting.toml"))?;
        written.push("splitting.toml");
    }
    #[derive(Serialize)]
    struct Generated<'a> {
        m: usize,
        k: usize,
        dim: usize,
        r: usize,
        files: Vec<&'a str>,
    }
    print_json(&Generated { m: a.m(), k: a.k(), dim: a.dim(), r: descriptor.r(), files: written }, None)
}

fn a_times_ones(a: &BlockMatrix) -> BlockVector {
    a.matvec(&BlockVector::ones(a.m(), a.k())).expect("shapes agree")
}

fn generate_family(args: &GenerateArgs) -> Result<(BlockMatrix, BlockVector, SplittingDescriptor), Failure> {
    match args.family {
        Family::Example51 => {
            let (a, _) = generators::example_5_1();
            let (qs, ws) = generators::example_5_1_index_sets();
            let b = a_times_ones(&a);
            Ok((a, b, SplittingDescriptor::index_sets(3, qs, ws)))
        }
        Family::Example52 => {
            let (m, b, _) = generators::example_5_2();
            let d = if args.bgaor {
                let ts = generators::example_5_2_bgaor_triples(args.gamma, args.omega)?;
                SplittingDescriptor::triples(12, ts, vec![BlockWeights::uniform(12, 0.25); 4])
            } else {
                if !(1..=6).contains(&args.r) {
                    return Err(Failure::Usage(format!("--r must be in 1..=6, got {}", args.r)));
                }
                let ws = match args.weights {
                    WeightScheme::Uniform => generators::table_5_1_weights(args.r),
                    WeightScheme::Outer => generators::table_5_2_weights(args.r),
                };
                SplittingDescriptor::index_sets(12, generators::example_5_2_index_sets(args.r), ws)
            };
            Ok((m, b, d))
        }
        Family::Euler => {
            let mut params = generators::example_5_2_params();
            params.p = args.p;
            params.r_inner = args.r_inner;
            let a = generators::euler_matrix(&params)?;
            let b = a_times_ones(&a);
            // lower and upper inner couplings, averaged
            let r = args.r_inner;
            let inner = |lower: bool| {
                let pairs = (0..args.p).flat_map(move |o| {
                    (1..r).map(move |i| if lower { (o * r + i, o * r + i - 1) } else { (o * r + i - 1, o * r + i) })
                });
                IndexSetSplit::new(a.m(), pairs)
            };
            let qs = vec![inner(true)?, inner(false)?];
            let ws = vec![BlockWeights::uniform(a.m(), 0.5); 2];
            Ok((a.clone(), b, SplittingDescriptor::index_sets(a.m(), qs, ws)))
        }
        Family::Elliptic => {
            let m_dim = args.m.unwrap_or(args.n);
            let params = match (args.m1, args.m2) {
                (Some(m1), Some(m2)) => EllipticParams::new(m_dim, args.n, m1, m2)?,
                _ => {
                    let case = match args.case {
                        CaseArg::Quarter => EllipticCase::Quarter,
                        CaseArg::Sixth => EllipticCase::Sixth,
                    };
                    EllipticParams::case(m_dim, args.n, case)?
                }
            };
            let a = generators::elliptic_matrix(&params)?;
            let b = a_times_ones(&a);
            let ts = generators::elliptic_triples(&params, args.gamma, args.omega)?;
            let ws = generators::elliptic_weights(&params);
            Ok((a, b, SplittingDescriptor::triples(params.n_dim, ts.to_vec(), ws.to_vec())))
        }
    }
}

fn cmd_classify(args: &ClassifyArgs) -> CmdResult {
    let a = io::load_matrix(&args.matrix, args.block_size)?;
    let report = match &args.certificate {
        Some(u) => classify_with_certificate(&a, u)?,
        None => classify(&a),
    };
    #[derive(Serialize)]
    struct Out<'a> {
        m: usize,
        k: usize,
        in_h: bool,
        #[serde(flatten)]
        report: &'a msplit::ClassReport,
    }
    print_json(&Out { m: a.m(), k: a.k(), in_h: report.is_certified_h(), report: &report }, None)
}

fn load_vector_arg(spec: &str, a: &BlockMatrix, what: &str) -> Result<BlockVector, Failure> {
    match spec {
        "ones" => Ok(BlockVector::ones(a.m(), a.k())),
        "zeros" => Ok(BlockVector::zeros(a.m(), a.k())),
        "a-times-ones" if what == "rhs" => Ok(a_times_ones(a)),
        path => {
            let v = io::load_vector(Path::new(path), Some((a.m(), a.k())))?;
            if v.m() != a.m() || v.k() != a.k() {
                return Err(Failure::Usage(format!("{what} has shape ({}, {}), matrix has ({}, {})", v.m(), v.k(), a.m(), a.k())));
            }
            Ok(v)
        }
    }
}

/// Loaded system with the descriptor adjusted for the requested method.
struct System {
    a: BlockMatrix,
    ms: msplit::Multisplitting,
    tau: Option<f64>,
}

fn load_system(args: &SystemArgs) -> Result<System, Failure> {
    let a = io::load_matrix(&args.matrix, args.block_size)?;
    let mut d = SplittingDescriptor::load(&args.splitting)?;
    let is_triples = matches!(d.sets, SplittingSets::Triples(_));
    match args.method {
        Method::Bgaor if !is_triples => {
            return Err(Failure::Usage("method bgaor needs a descriptor with R/S/T sets".into()));
        }
        Method::Multi | Method::Extrapolated if is_triples && (args.gamma.is_some() || args.omega.is_some()) => {
            return Err(Failure::Usage("--gamma/--omega require --method bgaor".into()));
        }
        _ => {}
    }
    if args.method == Method::Bgaor {
        d = d.with_parameters(args.gamma.as_deref(), args.omega.as_deref())?;
    }
    let tau = match (args.method, args.tau) {
        (Method::Extrapolated, Some(t)) => Some(t),
        (Method::Extrapolated, None) => return Err(Failure::Usage("method extrapolated needs --tau".into())),
        (_, Some(_)) => return Err(Failure::Usage("--tau requires --method extrapolated".into())),
        (_, None) => None,
    };
    let ms = d.multisplitting(&a)?;
    Ok(System { a, ms, tau })
}

#[derive(Serialize)]
struct SolveOutput {
    method: &'static str,
    r: usize,
    iterations: usize,
    terminated: &'static str,
    final_norm: Option<f64>,
    wall_time: f64,
    x_re: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_im: Option<Vec<f64>>,
    norms: Vec<f64>,
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max-iters",
        Termination::Diverged => "diverged",
    }
}

fn solve_output(method: Method, r: usize, rep: &SolveReport) -> SolveOutput {
    let x = rep.final_x.as_dense();
    let complex = x.iter().any(|z| z.im != 0.0);
    SolveOutput {
        method: match method {
            Method::Multi => "multi",
            Method::Extrapolated => "extrapolated",
            Method::Bgaor => "bgaor",
        },
        r,
        iterations: rep.iterations,
        terminated: termination_name(rep.terminated),
        final_norm: rep.norms.last().copied(),
        wall_time: rep.wall_time,
        x_re: x.iter().map(|z| z.re).collect(),
        x_im: complex.then(|| x.iter().map(|z| z.im).collect()),
        norms: rep.norms.clone(),
    }
}

fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let sys = load_system(&args.system)?;
    let b = load_vector_arg(&args.rhs, &sys.a, "rhs")?;
    let x0 = load_vector_arg(&args.x0, &sys.a, "x0")?;
    let kind = match args.stop {
        StopArg::AbsDiff => StopKind::AbsDiff,
        StopArg::RelDiff => StopKind::RelDiff,
        StopArg::Residual => StopKind::Residual,
    };
    let stop = StopRule::new(kind, args.eps, args.max_iters)?;
    let mut opts = SolveOptions::new(stop);
    if args.serial {
        opts = opts.serial();
    }
    let pool = pool(sys.ms.r())?;
    let rep = pool.install(|| match sys.tau {
        Some(tau) => solve_extrapolated(&sys.ms, &b, &x0, tau, &opts),
        None => solve_multisplitting(&sys.ms, &b, &x0, &opts),
    })?;
    if let Some(path) = &args.norms_csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["iteration", "metric", "display"])?;
        for (i, n) in rep.norms.iter().enumerate() {
            w.write_record([(i + 1).to_string(), full_precision(*n), format!("{n:.4e}")])?;
        }
        w.flush()?;
    }
    print_json(&solve_output(args.system.method, sys.ms.r(), &rep), args.json.as_deref())?;
    if rep.terminated == Termination::Diverged {
        return Err(Failure::Numerical(format!("iteration diverged after {} steps", rep.iterations)));
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let sys = load_system(&args.system)?;
    let mut t = iteration_matrix(&sys.ms);
    let rho_multi = t.spectral_radius()?;
    let rho_hat = hat_spectral_radius(&sys.ms)?;
    if let Some(tau) = sys.tau {
        t = t.extrapolated(tau);
    }
    let ev = eigenvalues(&t.t)?;
    let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(path) = &args.eigenvalues {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["re", "im", "modulus"])?;
        for z in &ev {
            w.write_record([full_precision(z.re), full_precision(z.im), full_precision(z.norm())])?;
        }
        w.flush()?;
    }
    #[derive(Serialize)]
    struct Out {
        r: usize,
        dim: usize,
        rho: f64,
        rho_unextrapolated: f64,
        rho_hat: f64,
        extrapolation_interval: OpenInterval,
        tau: Option<f64>,
    }
    print_json(
        &Out {
            r: sys.ms.r(),
            dim: sys.a.dim(),
            rho,
            rho_unextrapolated: rho_multi,
            rho_hat,
            extrapolation_interval: extrapolation_interval(rho_multi)?,
            tau: sys.tau,
        },
        None,
    )
}

fn cmd_bench(args: &BenchArgs) -> CmdResult {
    if !(args.tolerance > 0.0) {
        return Err(Failure::Usage(format!("--tolerance must be positive, got {}", args.tolerance)));
    }
    let table = match args.table {
        TableArg::T51 => Table::T51,
        TableArg::T52 => Table::T52,
        TableArg::T53 => Table::T53,
    };
    let exec = if args.serial { Execution::Serial } else { Execution::Parallel };
    let rep = pool(6)?.install(|| tables::reproduce(table, args.tolerance, exec))?;
    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["cell_id", "paper", "computed", "display", "abs_diff", "pass"])?;
    for c in &rep.cells {
        w.write_record([
            c.id.clone(),
            c.paper.to_string(),
            full_precision(c.computed),
            format!("{:.4}", c.computed),
            full_precision(c.abs_diff),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    let failed: Vec<&str> = rep.failures().map(|c| c.id.as_str()).collect();
    println!("{} cells, {} failed", rep.cells.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Acceptance(format!("cells outside tolerance: {}", failed.join(", "))))
    }
}
