//! `senv`: file-based workflows over the spectral envelope toolkit.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 domain error (including
//! an unsuccessful retrieval), 3 eigensolver non-convergence.

mod manifest;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use senv_core::dynamics::{block_complexity, empirical_measure, recurrence_gaps};
use senv_core::eig::{riesz_lower_bound_scan, LanczosConfig};
use senv_core::factorization::{
    enumerate_factorizations, fejer_riesz, jacobian_rank, phase_retrieval_constrained, Retrieval,
};
use senv_core::io as csvio;
use senv_core::kernels::{
    bohr_limit_atoms, centered_autocorrelation, empirical_autocorrelation, fejer_kernel_coeffs, kernel_vs_limit,
    Autocorrelation, KernelLimitParams, LimitTolerance, Normalization,
};
use senv_core::measures::{grid_samples, squared_modulus, wiener_atom_statistic};
use senv_core::sequences::{density, gen_arithmetic, gen_bohr, gen_thue_morse, parse_alpha, syndetic_gap};
use senv_core::{Error, FrequencySet, SpectralMeasure64};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "senv", version, about = "Spectral envelopes of integer sets")]
struct Cli {
    /// Seed for randomized steps; recorded in the run manifest.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a frequency set as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Fourier coefficients of the generalized Fejer kernel K_d(F).
    Kernel {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        d: u64,
        #[command(flatten)]
        output: Output,
        /// Also write the kernel density on this many grid points.
        #[arg(long)]
        plot: Option<usize>,
    },
    /// Atoms of the Bohr-set limit measure, optionally checked against K_d.
    Atoms {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        a0: f64,
        #[arg(long)]
        a1: f64,
        #[arg(long, default_value_t = 10)]
        jmax: i64,
        #[command(flatten)]
        output: Output,
        /// Bohr set whose kernel is compared with the limit.
        #[arg(long, requires_all = ["d", "report"])]
        set: Option<PathBuf>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long, default_value_t = 1e-3)]
        half_width: f64,
        /// CSV for the kernel-versus-limit comparison.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fejer-Riesz factorization of a coefficient file.
    Factor {
        #[arg(long)]
        coeffs: PathBuf,
        #[command(flatten)]
        output: Output,
        /// Enumerate every factor into this directory.
        #[arg(long)]
        all: Option<PathBuf>,
        /// Also write |p|^2 on this many grid points.
        #[arg(long)]
        plot: Option<usize>,
    },
    /// Find p with frequencies in F and |p|^2 = mu.
    Retrieve {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest eigenvalue of the Gram matrix gamma(f_j - f_k) on F ∩ [0, N).
    Eig {
        /// Even real symbol as a coefficient CSV (k, re, im).
        #[arg(long, conflicts_with = "gamma")]
        symbol: Option<PathBuf>,
        /// Symbol as an autocorrelation CSV (k, gamma).
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        set: PathBuf,
        /// Window sizes, comma separated and increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 400)]
        krylov: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Wiener's atom statistic S_N.
    Wiener {
        #[arg(long, conflicts_with = "gamma")]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical autocorrelation of the indicator of a set on its window.
    Autocorr {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        max_lag: usize,
        /// Subtract the mean before correlating.
        #[arg(long)]
        centered: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Numerical rank of the differential of p -> |p|^2 on P(F).
    Dim {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        fd_step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Word statistics, complexity, density and gaps of a set.
    Stats {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 3)]
        word_length: usize,
        /// Word whose recurrence gaps are reported.
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Integers with an even binary digit sum in [0, window).
    ThueMorse {
        #[arg(long)]
        window: i64,
        #[command(flatten)]
        output: Output,
    },
    /// start, start + gap, ..., count terms.
    Arithmetic {
        #[arg(long, allow_negative_numbers = true)]
        start: i64,
        #[arg(long)]
        gap: i64,
        #[arg(long)]
        count: i64,
        #[command(flatten)]
        output: Output,
    },
    /// {n in [0, window) : frac(n alpha + beta) in [a0, a1)}.
    Bohr {
        /// Number or one of sqrt2-1, golden.
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long)]
        a0: f64,
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        window: i64,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
    Domain(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) if e.is_domain() => 2,
            Failure::Core(_) => 1,
            Failure::Domain(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::NotConverged(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Files read and written by a command, for the manifest.
#[derive(Default)]
struct Run {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn read_set(&mut self, path: &Path) -> Result<FrequencySet, Failure> {
        self.inputs.push(path.to_path_buf());
        Ok(FrequencySet::from_json(&fs::read_to_string(path)?)?)
    }

    fn open(&mut self, path: &Path) -> Result<File, Failure> {
        self.inputs.push(path.to_path_buf());
        Ok(File::open(path)?)
    }

    fn read_measure(&mut self, path: &Path) -> Result<SpectralMeasure64, Failure> {
        let file = self.open(path)?;
        Ok(csvio::read_measure(file)?)
    }

    fn read_symbol(&mut self, symbol: Option<&Path>, gamma: Option<&Path>) -> Result<Autocorrelation<f64>, Failure> {
        match (symbol, gamma) {
            (Some(p), None) => {
                let file = self.open(p)?;
                Ok(csvio::symbol_from_coefficients(&csvio::read_coefficients(file)?)?)
            }
            (None, Some(p)) => {
                let file = self.open(p)?;
                Ok(csvio::read_autocorrelation(file, Normalization::Kernel)?)
            }
            _ => Err(Failure::Usage("exactly one of --symbol/--coeffs or --gamma is required".into())),
        }
    }

    /// Writes through `f` to `path`, or to standard output.
    fn emit(&mut self, path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> senv_core::Result<()>) -> CmdResult {
        match path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p)?);
                f(&mut w)?;
                w.flush()?;
                self.outputs.push(p.to_path_buf());
            }
            None => {
                let stdout = std::io::stdout().lock();
                let mut w = BufWriter::new(stdout);
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    fn emit_json(&mut self, path: Option<&Path>, value: &serde_json::Value) -> CmdResult {
        let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
        self.emit(path, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

/// `k.csv` -> `k.grid.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn plot_path(output: &Output, plot: Option<usize>) -> Result<Option<PathBuf>, Failure> {
    match (plot, &output.out) {
        (None, _) => Ok(None),
        (Some(0), _) => Err(Failure::Usage("--plot needs a positive grid size".into())),
        (Some(_), Some(out)) => Ok(Some(sibling(out, "grid.csv"))),
        (Some(_), None) => Err(Failure::Usage("--plot requires --out".into())),
    }
}

fn gen(run: &mut Run, kind: GenKind) -> CmdResult {
    let (set, output) = match kind {
        GenKind::ThueMorse { window, output } => (gen_thue_morse(window)?, output),
        GenKind::Arithmetic { start, gap, count, output } => (gen_arithmetic(start, gap, count)?, output),
        GenKind::Bohr { alpha, beta, a0, a1, window, output } => {
            (gen_bohr(parse_alpha(&alpha)?, beta, a0, a1, window)?, output)
        }
    };
    let text = set.to_json()? + "\n";
    run.emit(output.out.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))?;
    eprintln!("|F| = {} on [{}, {})", set.len(), set.window().0, set.window().1);
    Ok(())
}

fn kernel(run: &mut Run, set: &Path, d: u64, output: Output, plot: Option<usize>) -> CmdResult {
    let grid_path = plot_path(&output, plot)?;
    let set = run.read_set(set)?;
    let mu = fejer_kernel_coeffs::<f64>(&set, d)?;
    let trig = mu.as_trig()?;
    run.emit(output.out.as_deref(), |w| csvio::write_coefficients(w, ordered_from_zero(trig.iter().collect())))?;
    if let (Some(path), Some(n)) = (grid_path, plot) {
        let samples = grid_samples(&mu, n)?;
        run.emit(Some(&path), |w| csvio::write_grid(w, &samples))?;
        let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        eprintln!("grid minimum {min:.3e}");
    }
    Ok(())
}

/// Rows `0, -1, 1, -2, 2, ...`, so that `mu_hat(0)` comes first.
fn ordered_from_zero<C: Copy>(rows: Vec<(i64, C)>) -> Vec<(i64, C)> {
    let mut rows = rows;
    rows.sort_by_key(|&(k, _)| (k.unsigned_abs(), k > 0));
    rows
}

#[allow(clippy::too_many_arguments)]
fn atoms(
    run: &mut Run,
    alpha: &str,
    a0: f64,
    a1: f64,
    jmax: i64,
    output: Output,
    set: Option<PathBuf>,
    d: Option<u64>,
    half_width: f64,
    report: Option<PathBuf>,
) -> CmdResult {
    let alpha = parse_alpha(alpha)?;
    let limit = bohr_limit_atoms(alpha, a0, a1, jmax)?;
    let atoms = limit.measure.atoms().unwrap_or_default().to_vec();
    run.emit(output.out.as_deref(), |w| csvio::write_atoms(w, &atoms))?;
    eprintln!("{} atoms, remainder {:.6e}", atoms.len(), limit.remainder);
    if let (Some(set), Some(d), Some(report)) = (set, d, report) {
        let set = run.read_set(&set)?;
        let params = KernelLimitParams { alpha, a0, a1, d, jmax, half_width, tolerance: LimitTolerance::default() };
        let table = kernel_vs_limit(&set, &params)?;
        run.emit(Some(&report), |w| csvio::write_limit_report(w, &table.rows))?;
        if table.overlap_warning {
            eprintln!("warning: integration windows overlap; masses may be double counted");
        }
        let failed = table.rows.iter().filter(|r| !r.pass).count();
        eprintln!("{} of {} rows within tolerance", table.rows.len() - failed, table.rows.len());
    }
    Ok(())
}

fn factor(run: &mut Run, coeffs: &Path, output: Output, all: Option<PathBuf>, plot: Option<usize>) -> CmdResult {
    let grid_path = plot_path(&output, plot)?;
    let mu = run.read_measure(coeffs)?;
    let result = match &all {
        Some(_) => enumerate_factorizations(&mu)?,
        None => fejer_riesz(&mu)?,
    };
    run.emit(output.out.as_deref(), |w| csvio::write_polynomial(w, &result.canonical))?;
    for note in &result.notes {
        eprintln!("note: {note}");
    }
    eprintln!("residual {:.3e}, max pairing residual {:.3e}", result.residual, result.max_pairing_residual);
    if let Some(dir) = all {
        fs::create_dir_all(&dir)?;
        let factors = result.all_factors.as_deref().unwrap_or_default();
        let mut entries = Vec::with_capacity(factors.len());
        for (i, (q, r)) in factors.iter().zip(&result.factor_residuals).enumerate() {
            let path = dir.join(format!("factor_{i:05}.csv"));
            run.emit(Some(&path), |w| csvio::write_polynomial(w, q))?;
            entries.push(json!({ "file": path.file_name().map(|n| n.to_string_lossy()), "residual": r }));
        }
        let summary = json!({
            "degree": result.degree(),
            "on_circle_pairs": result.on_circle_pairs(),
            "count": factors.len(),
            "notes": result.notes,
            "factors": entries,
        });
        run.emit_json(Some(&dir.join("factors.json")), &summary)?;
        eprintln!("{} distinct factors", factors.len());
    }
    if let (Some(path), Some(n)) = (grid_path, plot) {
        let samples = grid_samples(&squared_modulus(&result.canonical), n)?;
        run.emit(Some(&path), |w| csvio::write_grid(w, &samples))?;
    }
    Ok(())
}

fn retrieve(run: &mut Run, coeffs: &Path, set: &Path, output: Output) -> CmdResult {
    let mu = run.read_measure(coeffs)?;
    let set = run.read_set(set)?;
    match phase_retrieval_constrained(&mu, &set) {
        Ok(Retrieval::Found(r)) => {
            run.emit(output.out.as_deref(), |w| csvio::write_polynomial(w, &r.p))?;
            let status = json!({
                "status": "found",
                "shift": r.shift,
                "residual": r.residual,
                "factor_index": r.factor_index,
                "support": r.p.support(),
            });
            eprintln!("{}", serde_json::to_string(&status).map_err(Error::from)?);
            Ok(())
        }
        Ok(Retrieval::NotFound { searched }) => {
            println!("{}", json!({ "status": "not_found", "searched": searched }));
            Err(Failure::Domain(format!("no factor among {searched} fits in F")))
        }
        Err(Error::InfeasibleBySupport { frequency }) => {
            println!("{}", json!({ "status": "infeasible_by_support", "frequency": frequency }));
            Err(Failure::Core(Error::InfeasibleBySupport { frequency }))
        }
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn eig(
    run: &mut Run,
    seed: u64,
    symbol: Option<PathBuf>,
    gamma: Option<PathBuf>,
    set: &Path,
    sizes: &[usize],
    tol: f64,
    max_iter: usize,
    krylov: usize,
    output: Output,
) -> CmdResult {
    let gamma = run.read_symbol(symbol.as_deref(), gamma.as_deref())?;
    let set = run.read_set(set)?;
    let cfg = LanczosConfig { tol, max_iter, seed, max_krylov: krylov, ..LanczosConfig::default() };
    let rows = riesz_lower_bound_scan(&gamma, &set, sizes, &cfg)?;
    run.emit(output.out.as_deref(), |w| csvio::write_scan(w, &rows))?;
    for r in &rows {
        eprintln!(
            "N = {}: dim {}, lambda_min = {:.10}, residual {:.2e}, {} iterations{}",
            r.n,
            r.dim,
            r.lambda_min,
            r.residual,
            r.iterations,
            if r.converged { "" } else { " (not converged)" }
        );
    }
    match rows.iter().find(|r| !r.converged) {
        Some(r) => Err(Failure::NotConverged(format!("no convergence at N = {} within {max_iter} iterations", r.n))),
        None => Ok(()),
    }
}

fn wiener(run: &mut Run, coeffs: Option<PathBuf>, gamma: Option<PathBuf>, n: usize, output: Output) -> CmdResult {
    let s = match (coeffs, gamma) {
        (Some(p), None) => wiener_atom_statistic(&run.read_measure(&p)?, n)?,
        (None, Some(p)) => {
            let file = run.open(&p)?;
            wiener_atom_statistic(&csvio::read_autocorrelation::<_, f64>(file, Normalization::Density)?, n)?
        }
        _ => return Err(Failure::Usage("exactly one of --coeffs or --gamma is required".into())),
    };
    run.emit_json(output.out.as_deref(), &json!({ "n": n, "s_n": s }))
}

fn autocorr(run: &mut Run, set: &Path, max_lag: usize, centered: bool, output: Output) -> CmdResult {
    let x = run.read_set(set)?.indicator();
    let gamma = if centered {
        centered_autocorrelation::<f64>(&x, max_lag)?
    } else {
        empirical_autocorrelation::<f64>(&x, max_lag)?
    };
    run.emit(output.out.as_deref(), |w| csvio::write_autocorrelation(w, &gamma))
}

fn dim(run: &mut Run, poly: &Path, set: &Path, fd_step: f64, output: Output) -> CmdResult {
    let file = run.open(poly)?;
    let p = csvio::read_polynomial::<_, f64>(file)?;
    let set = run.read_set(set)?;
    let rank = jacobian_rank(&p, &set, fd_step)?;
    run.emit_json(output.out.as_deref(), &json!({ "rank": rank, "set_size": set.len(), "bound": 2 * set.len() - 1 }))
}

fn stats(run: &mut Run, set: &Path, word_length: usize, word: Option<String>, output: Output) -> CmdResult {
    let set = run.read_set(set)?;
    let x = set.indicator();
    let words = empirical_measure(&x, word_length)?;
    run.emit(output.out.as_deref(), |w| csvio::write_word_stats(w, &words))?;
    let window = set.window_len() as u64;
    let checkpoints: Vec<u64> =
        std::iter::successors(Some(1u64), |&n| n.checked_mul(4)).take_while(|&n| n < window).chain([window]).collect();
    let densities: Vec<_> = density(&set, &checkpoints)?
        .iter()
        .map(|p| json!({ "n": p.n, "count": p.count, "density": p.ratio() }))
        .collect();
    let mut summary = json!({
        "size": set.len(),
        "window": [set.window().0, set.window().1],
        "complexity": block_complexity(&x, word_length)?,
        "syndetic_gap": syndetic_gap(&set).ok(),
        "density": densities,
    });
    if let Some(word) = word {
        let rec = recurrence_gaps(&x, &word)?;
        summary["recurrence"] = json!({ "word": word, "count": rec.count, "max_gap": rec.max_gap });
    }
    eprintln!("{}", serde_json::to_string_pretty(&summary).map_err(Error::from)?);
    Ok(())
}

fn dispatch(cli: Cli, run: &mut Run) -> CmdResult {
    match cli.command {
        Command::Gen { kind } => gen(run, kind),
        Command::Kernel { set, d, output, plot } => kernel(run, &set, d, output, plot),
        Command::Atoms { alpha, a0, a1, jmax, output, set, d, half_width, report } => {
            atoms(run, &alpha, a0, a1, jmax, output, set, d, half_width, report)
        }
        Command::Factor { coeffs, output, all, plot } => factor(run, &coeffs, output, all, plot),
        Command::Retrieve { coeffs, set, output } => retrieve(run, &coeffs, &set, output),
        Command::Eig { symbol, gamma, set, n, tol, max_iter, krylov, output } => {
            eig(run, cli.seed, symbol, gamma, &set, &n, tol, max_iter, krylov, output)
        }
        Command::Wiener { coeffs, gamma, n, output } => wiener(run, coeffs, gamma, n, output),
        Command::Autocorr { set, max_lag, centered, output } => autocorr(run, &set, max_lag, centered, output),
        Command::Dim { poly, set, fd_step, output } => dim(run, &poly, &set, fd_step, output),
        Command::Stats { set, word_length, word, output } => stats(run, &set, word_length, word, output),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("SENV_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("SENV_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let started = Instant::now();
    let seed = cli.seed;
    let mut run = Run::default();
    let result = configure_threads().and_then(|()| dispatch(cli, &mut run));
    // the manifest is written even when a command reports a domain failure
    let mut manifest = RunManifest::new(seed);
    if let Err(e) = manifest.write(&run.outputs, &run.inputs, started.elapsed()) {
        eprintln!("error: could not write manifest: {e}");
        return ExitCode::from(1);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
