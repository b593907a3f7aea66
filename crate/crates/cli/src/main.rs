use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rankspec::csvio::{read_data_csv, write_matrix_csv, write_sparse_pca_csv};
use rankspec::harness::presets::{preset, run_preset, write_outcomes_csv, PRESET_NAMES};
use rankspec::harness::{Axis, Estimator, ExperimentResult};
use rankspec::kernel::{inequality_sweep, SweepGrid};
use rankspec::rank::{estimate_sigma, RankKind};
use rankspec::regularize::{sparse_pca_with_limit, taper_estimate, TaperSpec};
use rankspec::Error;

#[derive(Parser)]
#[command(name = "rankspec", version, about = "Rank-based latent correlation estimation and simulation studies")]
struct Cli {
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true, env = "RANKSPEC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the latent correlation matrix of a data file.
    Estimate(EstimateArgs),
    /// Run a simulation preset (thm1..thm5).
    Simulate(StudyArgs),
    /// Run the banded taper study (preset thm3 unless overridden).
    TaperStudy(StudyArgs),
    /// Run the sparse PCA study (preset thm5 unless overridden).
    PcaStudy(StudyArgs),
    /// Sweep the kernel inequalities over a grid.
    KernelCheck(KernelArgs),
    /// Fit a log-log slope to a results file.
    RateFit(RateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Tau,
    Rho,
    Both,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "tau")]
    method: Method,
    /// Output matrix CSV. With `--method both` the method name is appended
    /// to the file stem.
    #[arg(long)]
    output: PathBuf,
    /// Also write the tapered estimate with this bandwidth.
    #[arg(long)]
    taper_k: Option<usize>,
    /// Also write the sparse PCA report with this support size.
    #[arg(long)]
    sparse_pca_s: Option<usize>,
    #[arg(long, default_value_t = rankspec::linalg::DEFAULT_ENUMERATION_LIMIT)]
    enumeration_limit: u128,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sample sizes replacing the preset grid.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Exit 1 when a gated analysis fails.
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct KernelArgs {
    /// Points per spatial axis.
    #[arg(long, default_value_t = SweepGrid::default().xy)]
    grid_size: usize,
    #[arg(long, default_value_t = SweepGrid::default().rho)]
    rho_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    functional: String,
    #[arg(long)]
    vary: String,
    #[arg(long, default_value = "tau")]
    estimator: String,
    /// Value of the other axis when the file holds several.
    #[arg(long)]
    fixed: Option<usize>,
}

enum Failure {
    Assertion(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceGuard(_) | Error::EnumerationGuard { .. } => 3,
        Error::Parse { .. }
        | Error::NonFinite { .. }
        | Error::Ties { .. }
        | Error::TooFewObservations { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidConfig(_)
        | Error::InvalidModel(_)
        | Error::DimensionMismatch { .. }
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(f))
}

/// `dir/stem[_suffix].ext`
fn sibling(path: &Path, suffix: &str, ext: Option<&str>) -> PathBuf {
    let stem = path.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
    let ext = ext.map(str::to_string).or_else(|| path.extension().map(|e| e.to_string_lossy().into_owned()));
    let name = match ext {
        Some(e) => format!("{stem}{suffix}.{e}"),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn estimate(a: &EstimateArgs) -> Result<(), Failure> {
    let parsed = read_data_csv(open(&a.input)?).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", a.input.display()),
        },
        e => e,
    })?;
    let header = parsed.header.as_deref();
    let kinds: &[(RankKind, &str)] = match a.method {
        Method::Tau => &[(RankKind::Tau, "")],
        Method::Rho => &[(RankKind::Rho, "")],
        Method::Both => &[(RankKind::Tau, "_tau"), (RankKind::Rho, "_rho")],
    };
    let taper = a.taper_k.map(TaperSpec::new).transpose()?;
    for &(kind, suffix) in kinds {
        let sigma = estimate_sigma(&parsed.data, kind).map_err(|e| match e {
            Error::Ties { column } => {
                let name = header.and_then(|h| h.get(column)).map_or(String::new(), |n| format!(" ({n})"));
                eprintln!("column {}{name} has tied values; rank estimators need distinct values", column + 1);
                Error::Ties { column }
            }
            e => e,
        })?;
        let out = sibling(&a.output, suffix, None);
        let mut w = create(&out)?;
        write_matrix_csv(sigma.as_sym(), header, &mut w)?;
        w.flush()?;
        if let Some(spec) = taper {
            let mut w = create(&sibling(&a.output, &format!("{suffix}_taper"), None))?;
            write_matrix_csv(&taper_estimate(sigma.as_sym(), spec), header, &mut w)?;
            w.flush()?;
        }
        if let Some(s) = a.sparse_pca_s {
            let r = sparse_pca_with_limit(sigma.as_sym(), s, a.enumeration_limit)?;
            let mut w = create(&sibling(&a.output, &format!("{suffix}_sparse_pca"), Some("csv")))?;
            write_sparse_pca_csv(&r, header, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn study(a: &StudyArgs, default: Option<&str>) -> Result<(), Failure> {
    let name = a.preset.as_deref().or(default).ok_or_else(|| {
        Error::InvalidArgument(format!("--preset is required; one of {}", PRESET_NAMES.join(", ")))
    })?;
    let mut p = preset(name)?;
    if let Some(seed) = a.seed {
        p.config.seed = seed;
    }
    if let Some(reps) = a.reps {
        p.config.reps = reps;
    }
    if let Some(grid) = &a.n_grid {
        p.config.n_grid = grid.clone();
    }
    fs::create_dir_all(&a.out_dir)?;
    let (res, outcomes) = run_preset(&p)?;
    let write = |file: &str, f: &dyn Fn(&mut BufWriter<File>) -> rankspec::Result<()>| -> Result<(), Failure> {
        let mut w = create(&a.out_dir.join(file))?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    };
    write("results.csv", &|w| res.write_records_csv(w))?;
    write("summary.csv", &|w| res.write_summary_csv(w))?;
    write("analysis.csv", &|w| write_outcomes_csv(&outcomes, w))?;
    write("failures.csv", &|w| res.write_failures_csv(w))?;

    for o in &outcomes {
        let verdict = match o.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        println!("{verdict:>4}  {} = {:.4}  [{}]", o.label, o.value, o.detail);
    }
    if !res.failures.is_empty() {
        eprintln!("{} replicate(s) failed; see failures.csv", res.failures.len());
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.pass == Some(false))
        .map(|o| o.label.as_str())
        .collect();
    if a.assert && !failed.is_empty() {
        return Err(Failure::Assertion(format!("failed analyses: {}", failed.join("; "))));
    }
    Ok(())
}

fn kernel_check(a: &KernelArgs) -> Result<(), Failure> {
    if a.grid_size < 2 || a.rho_points < 2 {
        return Err(Error::InvalidArgument("grid sizes must be >= 2".into()).into());
    }
    let rep = inequality_sweep(SweepGrid {
        xy: a.grid_size,
        rho: a.rho_points,
    })?;
    fs::write(&a.out, rep.to_csv())?;
    for r in &rep.rows {
        println!("{:<20} worst slack {:.3e}", r.id, r.worst_slack);
    }
    if !rep.all_hold(1e-9) {
        return Err(Failure::Assertion("an inequality has slack below -1e-9".into()));
    }
    Ok(())
}

fn rate_fit(a: &RateArgs) -> Result<(), Failure> {
    let vary = Axis::parse(&a.vary).ok_or_else(|| Error::InvalidArgument(format!("--vary must be n or d, got {:?}", a.vary)))?;
    let est = Estimator::parse(&a.estimator)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator {:?}", a.estimator)))?;
    let res = ExperimentResult::read_records_csv(open(&a.input)?)?;
    let fit = res.rate_fit(&a.functional, est, vary, a.fixed)?;
    println!("slope {:.6} +- {:.6} ({} points)", fit.slope, fit.stderr, fit.points);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot set up {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let r = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => study(a, None),
        Command::TaperStudy(a) => study(a, Some("thm3")),
        Command::PcaStudy(a) => study(a, Some("thm5")),
        Command::KernelCheck(a) => kernel_check(a),
        Command::RateFit(a) => rate_fit(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(m)) => {
            eprintln!("assertion failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
