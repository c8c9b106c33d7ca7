//! Command-line front end for `peakon-core`.

pub mod config;
pub mod io;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use peakon_core::asympt::{self, NormName, PeakReport};
use peakon_core::epsim::{self, Experiment, SimConfig};
use peakon_core::shooter::{self, GridSpec, ShootOptions};
use peakon_core::speeds;
use peakon_core::wavealg::{self, Params};

use io::{Cell, IoError, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "peakon",
    version,
    about = "Peaked solitary waves and blow-up profiles of the Euler-Poisson system with Boltzmann electrons",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: $PEAKON_THREADS, else all cores)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Flat key=value file with defaults for the subcommand's flags; the command line wins
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Critical speed c_kappa and the gap c_0 - c_kappa
    Speed(SpeedArgs),
    /// Phase-plane data: H, h, g and the separatrix |E| against rho
    Phase(PhaseArgs),
    /// Shoot a solitary wave and write its profile
    Wave(WaveArgs),
    /// Fit the power laws at the peak of the critical wave against their closed forms
    VerifyAsym(VerifyArgs),
    /// Distances between warm and cold critical waves in Hölder and Lebesgue norms
    ColdLimit(ColdLimitArgs),
    /// Run the pseudo-spectral Crank-Nicolson solver and analyse the blow-up
    Simulate(SimulateArgs),
    /// Re-run the blow-up profile analysis on a saved snapshot
    AnalyzeBlowup(AnalyzeArgs),
    /// Run a canned reproduction pipeline
    Repro(ReproArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SpeedArgs {
    /// Temperature ratio; repeat or comma-separate for several (default 0)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub kappa: Vec<f64>,
    #[arg(long, default_value_t = speeds::DEFAULT_TOL)]
    pub tol: f64,
    /// Add kappa = 1e-1, 1e-2, ..., 1e-8 to the table
    #[arg(long)]
    pub scan: bool,
    /// CSV destination (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum SpeedChoice {
    Crit,
    Value(f64),
}

fn parse_speed(s: &str) -> Result<SpeedChoice, String> {
    if s.eq_ignore_ascii_case("crit") {
        return Ok(SpeedChoice::Crit);
    }
    s.parse::<f64>().map(SpeedChoice::Value).map_err(|_| format!("expected a number or `crit`, got {s:?}"))
}

impl SpeedChoice {
    fn params(self, kappa: f64) -> peakon_core::Result<Params> {
        match self {
            SpeedChoice::Crit => Params::critical(kappa),
            SpeedChoice::Value(c) => Params::with_speed(kappa, c),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Wave speed, or `crit` for c_kappa
    #[arg(long, default_value = "crit", value_parser = parse_speed)]
    pub c: SpeedChoice,
    /// Number of densities
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct WaveArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Wave speed, or `crit` for the peaked wave at c_kappa
    #[arg(long, default_value = "crit", value_parser = parse_speed)]
    pub c: SpeedChoice,
    /// Distance of the seed from the far-field rest state
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Integrator tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Grid points on each side of the peak (log-spaced)
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Half-width of the output grid (default: the computed orbit length)
    #[arg(long)]
    pub s_max: Option<f64>,
    /// CSV destination; a JSON sidecar goes next to it (default: CSV to stdout, no sidecar)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((lo, hi))
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Fit window in distance from the peak
    #[arg(long, default_value = "1e-5,1e-3", value_parser = parse_window)]
    pub window: (f64, f64),
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Directory for fits.csv, summary.json and the manifest (default: CSV to stdout)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ColdLimitArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01, 0.001])]
    pub kappas: Vec<f64>,
    /// Hölder exponents for the C^{1,alpha} distance of phi
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2])]
    pub alphas: Vec<f64>,
    /// Exponents for the L^p distance of rho
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.2])]
    pub ps: Vec<f64>,
    /// Hölder exponents for the C^beta distance of v
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentArg {
    /// rho = 1, v = 3 exp(-x^2) on [-10, 10]
    GaussianV,
    /// rho = 1 + 13 sech x, v = 0 on [-15, 15]
    SechRho,
    /// Initial data from --init (columns x,rho,v on the periodic grid)
    Custom,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Half-length of the periodic domain (default: 10 for gaussian-v, 15 for sech-rho)
    #[arg(long = "L", id = "L")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 1024)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    /// Steps between snapshot files (0: first and last only)
    #[arg(long, default_value_t = 0)]
    pub snap_every: usize,
    /// Stop once min v_x falls below minus this value
    #[arg(long, default_value_t = 1e3)]
    pub threshold: f64,
    /// Turn off the 2/3-rule dealiasing
    #[arg(long)]
    pub no_dealias: bool,
    /// CSV with columns x,rho,v for --experiment custom
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value = "sim")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// Snapshot CSV with columns x,rho,v,phi
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Half-length of the domain (default: -x of the first row)
    #[arg(long = "L", id = "L")]
    pub l: Option<f64>,
    /// JSON destination (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Transition-layer thickness at kappa = 0.001 and its scaling over kappa
    Fig1,
    /// Critical speeds at kappa = 0 and 1, and the gap scan
    Speeds,
    /// Peak power laws of the cold critical wave
    PeakCold,
    /// Peak power laws of the kappa = 1 critical wave
    PeakWarm,
    /// Warm-to-cold convergence norms
    ColdLimit,
    /// Gaussian-velocity blow-up run
    Gaussian,
    /// Sech-density blow-up run
    Sech,
}

#[derive(Args, Debug, Serialize)]
pub struct ReproArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// Output directory (default: repro/<target>)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Usage(String),
}

impl From<peakon_core::Error> for CliError {
    fn from(e: peakon_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Tracks files written by one command and writes one manifest per output directory.
struct Session {
    argv: Vec<String>,
    config: serde_json::Value,
    start: Instant,
    files: Vec<PathBuf>,
}

impl Session {
    fn new<T: Serialize>(argv: &[String], config: &T) -> Self {
        Session {
            argv: argv.to_vec(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            start: Instant::now(),
            files: Vec::new(),
        }
    }

    fn csv(&mut self, path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> CliResult<()> {
        ensure_parent(path)?;
        io::emit_csv(path, header, rows)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, path: &Path, value: &T) -> CliResult<()> {
        ensure_parent(path)?;
        io::emit_json(path, value)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    fn finish(self) -> CliResult<()> {
        let wall = self.start.elapsed().as_secs_f64();
        let mut dirs: Vec<PathBuf> = self.files.iter().map(|f| parent_dir(f)).collect();
        dirs.sort();
        dirs.dedup();
        for d in dirs {
            let files: Vec<PathBuf> = self.files.iter().filter(|f| parent_dir(f) == d).cloned().collect();
            RunManifest::write(&d, self.argv.clone(), self.config.clone(), wall, &files)?;
        }
        Ok(())
    }
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_parent(p: &Path) -> CliResult<()> {
    let d = parent_dir(p);
    fs::create_dir_all(&d).map_err(|e| CliError::Domain(format!("{}: {e}", d.display())))
}

fn stdout_csv(header: &[&str], rows: &[Vec<Cell>]) -> CliResult<()> {
    let out = std::io::stdout();
    io::write_csv(out.lock(), header, rows).map_err(|e| CliError::Domain(format!("stdout: {e}")))
}

fn stdout_json<T: Serialize>(v: &T) -> CliResult<()> {
    let s = io::to_json(v).map_err(CliError::Domain)?;
    print!("{s}");
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let merged = match config::merge(argv.clone()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&merged) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match config::threads(cli.threads) {
        Ok(Some(n)) => {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    match dispatch(&cli.cmd, &merged) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Domain(m)) => {
            eprintln!("error: {m}");
            EXIT_DOMAIN
        }
    }
}

fn dispatch(cmd: &Cmd, argv: &[String]) -> CliResult<()> {
    match cmd {
        Cmd::Speed(a) => speed(a, argv),
        Cmd::Phase(a) => phase(a, argv),
        Cmd::Wave(a) => wave(a, argv),
        Cmd::VerifyAsym(a) => verify_asym(a, argv),
        Cmd::ColdLimit(a) => cold_limit(a, argv),
        Cmd::Simulate(a) => simulate(a, argv),
        Cmd::AnalyzeBlowup(a) => analyze(a, argv),
        Cmd::Repro(a) => repro(a, argv),
    }
}

const SPEED_HEADER: [&str; 5] = ["kappa", "c", "residual", "gap", "gap_over_sqrt_kappa"];

fn speed_rows(kappas: &[f64], tol: f64) -> CliResult<Vec<Vec<Cell>>> {
    let rows = speeds::speed_gap_scan(kappas, tol)?;
    Ok(rows
        .iter()
        .map(|r| vec![r.kappa.into(), r.c.into(), r.residual.into(), r.gap.into(), r.gap_over_sqrt_kappa.into()])
        .collect())
}

fn speed(a: &SpeedArgs, argv: &[String]) -> CliResult<()> {
    let mut kappas = a.kappa.clone();
    if a.scan {
        kappas.extend((1..=8).map(|e| 10f64.powi(-e)));
    }
    if kappas.is_empty() {
        kappas.push(0.0);
    }
    let rows = speed_rows(&kappas, a.tol)?;
    match &a.out {
        Some(p) => {
            let mut s = Session::new(argv, a);
            s.csv(p, &SPEED_HEADER, &rows)?;
            s.finish()
        }
        None => stdout_csv(&SPEED_HEADER, &rows),
    }
}

fn phase(a: &PhaseArgs, argv: &[String]) -> CliResult<()> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let p = a.c.params(a.kappa)?;
    let rows: Vec<Vec<Cell>> = wavealg::phase_table(&p, a.grid)
        .iter()
        .map(|r| vec![r.rho.into(), r.potential.into(), r.slope.into(), r.energy.into(), r.separatrix_e.into()])
        .collect();
    let header = ["rho", "H", "h", "g", "E_separatrix"];
    match &a.out {
        Some(path) => {
            let mut s = Session::new(argv, a);
            s.csv(path, &header, &rows)?;
            s.finish()
        }
        None => stdout_csv(&header, &rows),
    }
}

#[derive(Serialize)]
struct WaveSidecar {
    params: Params,
    kind: shooter::OrbitKind,
    delta: f64,
    tol: f64,
    orbit_length: f64,
    orbit_steps: usize,
    orbit_max_drift: f64,
    profile_max_drift: f64,
    terminal_rho: f64,
    terminal_e: f64,
    tail_width: f64,
    points: usize,
}

fn wave(a: &WaveArgs, argv: &[String]) -> CliResult<()> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let p = a.c.params(a.kappa)?;
    let opts = ShootOptions { delta: a.delta, tol: a.tol, ..Default::default() };
    let grid = GridSpec { per_side: a.grid, s_max: a.s_max, ..Default::default() };
    let (orbit, prof) = shooter::wave(&p, &opts, &grid)?;
    let rows: Vec<Vec<Cell>> = (0..prof.len())
        .map(|i| vec![prof.xi[i].into(), prof.rho[i].into(), prof.v[i].into(), prof.phi[i].into(), prof.e[i].into()])
        .collect();
    let header = ["xi", "rho", "v", "phi", "E"];
    let Some(path) = &a.out else { return stdout_csv(&header, &rows) };
    let side = WaveSidecar {
        params: p,
        kind: orbit.kind,
        delta: a.delta,
        tol: a.tol,
        orbit_length: orbit.length(),
        orbit_steps: orbit.steps,
        orbit_max_drift: orbit.max_drift,
        profile_max_drift: prof.max_drift,
        terminal_rho: orbit.terminal_rho,
        terminal_e: orbit.terminal_e,
        tail_width: orbit.tail_width,
        points: prof.len(),
    };
    let mut s = Session::new(argv, a);
    s.csv(path, &header, &rows)?;
    s.json(&path.with_extension("json"), &side)?;
    s.finish()
}

#[derive(Serialize)]
struct FitRow {
    quantity: String,
    expected_exponent: f64,
    fitted_exponent: f64,
    exponent_error: f64,
    expected_coefficient: f64,
    limit_coefficient: f64,
    fitted_coefficient: f64,
    coefficient_error: f64,
    r_squared: f64,
    pass: bool,
}

#[derive(Serialize)]
struct AsymSummary {
    kappa: f64,
    c: f64,
    window: (f64, f64),
    exponent_tolerance: f64,
    coefficient_tolerance: f64,
    fits: Vec<FitRow>,
    /// Warm case: measured and closed-form `-phi''(0+)`.
    curvature: Option<(f64, f64)>,
    curvature_error: Option<f64>,
    pass: bool,
}

/// Tolerances: exponents to 0.02; coefficients to 2% (cold) or 1% (warm).
fn asym_summary(rep: &PeakReport, window: (f64, f64)) -> AsymSummary {
    let (etol, ctol) = if rep.kappa > 0.0 { (0.02, 0.01) } else { (0.02, 0.02) };
    let fits: Vec<FitRow> = rep
        .checks
        .iter()
        .map(|c| FitRow {
            quantity: c.quantity.clone(),
            expected_exponent: c.expected_exponent,
            fitted_exponent: c.fit.exponent,
            exponent_error: c.exponent_error(),
            expected_coefficient: c.expected_coefficient,
            limit_coefficient: c.limit_coefficient,
            fitted_coefficient: c.fit.coefficient,
            coefficient_error: c.coefficient_error(),
            r_squared: c.fit.r_squared,
            pass: c.exponent_error() <= etol && c.coefficient_error() <= ctol,
        })
        .collect();
    let curvature_error = rep.curvature.map(|(m, w)| ((m - w) / w).abs());
    let pass = fits.iter().all(|f| f.pass) && curvature_error.is_none_or(|e| e <= ctol);
    AsymSummary {
        kappa: rep.kappa,
        c: rep.c,
        window,
        exponent_tolerance: etol,
        coefficient_tolerance: ctol,
        fits,
        curvature: rep.curvature,
        curvature_error,
        pass,
    }
}

fn peak_report(kappa: f64, window: (f64, f64), per_side: usize) -> CliResult<PeakReport> {
    let (_, prof) = shooter::peakon(kappa, &ShootOptions::default(), &GridSpec::with_per_side(per_side))?;
    Ok(if kappa > 0.0 { asympt::verify_peak_isothermal(&prof, window)? } else { asympt::verify_peak_cold(&prof, window)? })
}

const FIT_HEADER: [&str; 10] = [
    "quantity",
    "expected_exponent",
    "fitted_exponent",
    "exponent_error",
    "expected_coefficient",
    "limit_coefficient",
    "fitted_coefficient",
    "coefficient_error",
    "r_squared",
    "pass",
];

fn fit_rows(s: &AsymSummary) -> Vec<Vec<Cell>> {
    s.fits
        .iter()
        .map(|f| {
            vec![
                f.quantity.clone().into(),
                f.expected_exponent.into(),
                f.fitted_exponent.into(),
                f.exponent_error.into(),
                f.expected_coefficient.into(),
                f.limit_coefficient.into(),
                f.fitted_coefficient.into(),
                f.coefficient_error.into(),
                f.r_squared.into(),
                f.pass.into(),
            ]
        })
        .collect()
}

fn write_asym(s: &mut Session, dir: &Path, sum: &AsymSummary) -> CliResult<()> {
    s.csv(&dir.join("fits.csv"), &FIT_HEADER, &fit_rows(sum))?;
    s.json(&dir.join("summary.json"), sum)
}

fn verify_asym(a: &VerifyArgs, argv: &[String]) -> CliResult<()> {
    if !(a.window.0 > 0.0 && a.window.0 < a.window.1) {
        return Err(CliError::Usage("--window needs 0 < lo < hi".into()));
    }
    let rep = peak_report(a.kappa, a.window, a.grid)?;
    let sum = asym_summary(&rep, a.window);
    eprintln!("peak power laws: {}", if sum.pass { "pass" } else { "FAIL" });
    match &a.out_dir {
        Some(dir) => {
            let mut s = Session::new(argv, a);
            write_asym(&mut s, dir, &sum)?;
            s.finish()
        }
        None => stdout_csv(&FIT_HEADER, &fit_rows(&sum)),
    }
}

#[derive(Serialize)]
struct ColumnCheck {
    norm: &'static str,
    param: f64,
    values: Vec<f64>,
    strictly_decreasing: bool,
}

#[derive(Serialize)]
struct ColdLimitSummary {
    kappas: Vec<f64>,
    columns: Vec<ColumnCheck>,
    witness_level: f64,
    witness_min: f64,
    /// Seminorm of `phi_kappa' - phi_0'` stays above 0.9 of the witness level.
    witness_pass: bool,
    grid_points: usize,
    s_max: f64,
    pass: bool,
}

fn cold_limit_summary(kappas: &[f64], rep: &asympt::ColdLimitReport, a: &ColdLimitArgs) -> ColdLimitSummary {
    // order columns by decreasing kappa so "decreasing" means "decreasing as kappa -> 0"
    let mut order: Vec<usize> = (0..kappas.len()).collect();
    order.sort_by(|&i, &j| kappas[j].total_cmp(&kappas[i]));
    let mut columns = Vec::new();
    let mut push = |name: NormName, param: f64| {
        let col = rep.column(name, param);
        let values: Vec<f64> = order.iter().map(|&i| col[i]).collect();
        let strictly_decreasing = values.windows(2).all(|w| w[1] < w[0]);
        columns.push(ColumnCheck { norm: name.as_str(), param, values, strictly_decreasing });
    };
    for &x in &a.alphas {
        push(NormName::C1Alpha, x);
    }
    for &x in &a.ps {
        push(NormName::Lp, x);
    }
    for &x in &a.betas {
        push(NormName::CBeta, x);
    }
    let witness_min = rep.column(NormName::CAlphaSeminorm, 1.0 / 3.0).into_iter().fold(f64::INFINITY, f64::min);
    let witness_pass = witness_min >= 0.9 * rep.witness_level;
    let pass = witness_pass && columns.iter().all(|c| c.strictly_decreasing);
    ColdLimitSummary {
        kappas: order.iter().map(|&i| kappas[i]).collect(),
        columns,
        witness_level: rep.witness_level,
        witness_min,
        witness_pass,
        grid_points: rep.grid_points,
        s_max: rep.s_max,
        pass,
    }
}

fn cold_limit_rows(rep: &asympt::ColdLimitReport) -> Vec<Vec<Cell>> {
    rep.rows.iter().map(|r| vec![r.kappa.into(), r.norm_name.as_str().into(), r.alpha_or_p.into(), r.value.into()]).collect()
}

fn cold_limit(a: &ColdLimitArgs, argv: &[String]) -> CliResult<()> {
    if a.kappas.is_empty() {
        return Err(CliError::Usage("--kappas needs at least one value".into()));
    }
    let rep = asympt::cold_limit_report(
        &a.kappas,
        &a.alphas,
        &a.betas,
        &a.ps,
        &ShootOptions::default(),
        &GridSpec::with_per_side(a.grid),
    )?;
    let sum = cold_limit_summary(&a.kappas, &rep, a);
    eprintln!("cold limit: {}", if sum.pass { "pass" } else { "FAIL" });
    let header = ["kappa", "norm", "param", "value"];
    match &a.out_dir {
        Some(dir) => {
            let mut s = Session::new(argv, a);
            s.csv(&dir.join("norms.csv"), &header, &cold_limit_rows(&rep))?;
            s.json(&dir.join("summary.json"), &sum)?;
            s.finish()
        }
        None => stdout_csv(&header, &cold_limit_rows(&rep)),
    }
}

const SNAP_HEADER: [&str; 4] = ["x", "rho", "v", "phi"];

fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h.trim() == *n)
                .ok_or_else(|| CliError::Domain(format!("{}: missing column {n}", path.display())))
        })
        .collect::<CliResult<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        for (c, &i) in idx.iter().enumerate() {
            let v: f64 = rec.get(i).unwrap_or("").trim().parse().map_err(|_| {
                CliError::Domain(format!("{}: row {}: bad number in column {}", path.display(), line + 2, names[c]))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn snapshot_rows(x: &[f64], s: &epsim::Snapshot) -> Vec<Vec<Cell>> {
    (0..x.len()).map(|j| vec![x[j].into(), s.rho[j].into(), s.v[j].into(), s.phi[j].into()]).collect()
}

fn simulate_config(a: &SimulateArgs) -> CliResult<SimConfig> {
    let l = match (a.l, a.experiment) {
        (Some(l), _) => l,
        (None, ExperimentArg::GaussianV) => Experiment::GaussianV.default_l(),
        (None, ExperimentArg::SechRho) => Experiment::SechRho.default_l(),
        (None, ExperimentArg::Custom) => return Err(CliError::Usage("--experiment custom needs --L".into())),
    };
    Ok(SimConfig {
        n_modes: a.modes,
        dt: a.dt,
        kappa: a.kappa,
        t_max: a.tmax,
        blowup_threshold: a.threshold,
        dealias: !a.no_dealias,
        snap_every: a.snap_every,
        ..SimConfig::new(l)
    })
}

fn simulate(a: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    let cfg = simulate_config(a)?;
    let (traj, rep) = match a.experiment {
        ExperimentArg::GaussianV => epsim::run_experiment(Experiment::GaussianV, &cfg)?,
        ExperimentArg::SechRho => epsim::run_experiment(Experiment::SechRho, &cfg)?,
        ExperimentArg::Custom => {
            let path = a.init.as_ref().ok_or_else(|| CliError::Usage("--experiment custom needs --init".into()))?;
            let cols = read_columns(path, &["x", "rho", "v"])?;
            if cols[0].len() != cfg.n_modes {
                return Err(CliError::Domain(format!(
                    "{}: {} rows but --modes is {}",
                    path.display(),
                    cols[0].len(),
                    cfg.n_modes
                )));
            }
            let mut cols = cols.into_iter();
            let _x = cols.next();
            epsim::run(&cfg, cols.next().unwrap_or_default(), cols.next().unwrap_or_default())?
        }
    };
    let mut s = Session::new(argv, a);
    let dir = &a.out_dir;
    for snap in &traj.snapshots {
        s.csv(&dir.join(format!("snapshot_{:07}.csv", snap.step)), &SNAP_HEADER, &snapshot_rows(&traj.x, snap))?;
    }
    let hist: Vec<Vec<Cell>> =
        traj.history.iter().map(|h| vec![h.t.into(), h.max_abs_dxv.into(), h.max_abs_dxrho.into(), h.mass.into()]).collect();
    s.csv(&dir.join("history.csv"), &["t", "max_abs_dxv", "max_abs_dxrho", "mass"], &hist)?;
    s.json(&dir.join("report.json"), &rep)?;
    eprintln!(
        "{:?} at t = {:.4}, T* ~ {:.4}, x* ~ {:.4} ({:?})",
        rep.termination, rep.t_final, rep.t_star_estimate, rep.x_star_estimate, rep.kind
    );
    s.finish()
}

fn analyze(a: &AnalyzeArgs, argv: &[String]) -> CliResult<()> {
    let cols = read_columns(&a.snapshot, &["x", "rho", "v"])?;
    let n = cols[0].len();
    if n < 8 || !n.is_power_of_two() {
        return Err(CliError::Domain(format!("{}: {n} rows, need a power of two >= 8", a.snapshot.display())));
    }
    let l = a.l.unwrap_or(-cols[0][0]);
    let cfg = SimConfig { n_modes: n, ..SimConfig::new(l) };
    let rep = epsim::blowup_profile_analysis(&cfg, &cols[0], &cols[1], &cols[2])?;
    match &a.out {
        Some(p) => {
            let mut s = Session::new(argv, a);
            s.json(p, &rep)?;
            s.finish()
        }
        None => stdout_json(&rep),
    }
}

/// `thickness = A kappa^{3/4} (1 + B sqrt(kappa))`, fitted by least squares on
/// `thickness / kappa^{3/4} = A + A B sqrt(kappa)`.
pub fn corrected_scaling_fit(rows: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(k, t)| (k.sqrt(), t / k.powf(0.75))).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let a = my - slope * mx;
    (a, slope / a)
}

#[derive(Serialize)]
struct Fig1Summary {
    kappa: f64,
    level: f64,
    thickness: f64,
    reference: f64,
    within_factor_two: bool,
    sweep_kappas: Vec<f64>,
    sweep_thickness: Vec<f64>,
    loglog_slope: f64,
    target_slope: f64,
    slope_within_tolerance: bool,
    /// `A, B` of `A kappa^{3/4} (1 + B sqrt(kappa))`.
    corrected_fit: (f64, f64),
}

pub const FIG1_KAPPAS: [f64; 5] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];

fn repro(a: &ReproArgs, argv: &[String]) -> CliResult<()> {
    let name = a.target.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("repro").join(&name));
    let mut s = Session::new(argv, a);
    match a.target {
        Target::Fig1 => {
            let sweep = asympt::thickness_sweep(&FIG1_KAPPAS, 2.0, &ShootOptions::default(), &GridSpec::default())?;
            let ks: Vec<f64> = sweep.iter().map(|r| r.0).collect();
            let ts: Vec<f64> = sweep.iter().map(|r| r.1).collect();
            let slope = asympt::loglog_slope(&ks, &ts)?;
            let t = ts[2];
            let sum = Fig1Summary {
                kappa: 1e-3,
                level: 2.0,
                thickness: t,
                reference: 0.0056,
                within_factor_two: t >= 0.0028 && t <= 0.0112,
                sweep_kappas: ks.clone(),
                sweep_thickness: ts.clone(),
                loglog_slope: slope,
                target_slope: 0.75,
                slope_within_tolerance: (slope - 0.75).abs() <= 0.03,
                corrected_fit: corrected_scaling_fit(&sweep),
            };
            let rows: Vec<Vec<Cell>> = sweep.iter().map(|&(k, t)| vec![k.into(), t.into()]).collect();
            s.csv(&dir.join("thickness.csv"), &["kappa", "thickness"], &rows)?;
            let (_, prof) = shooter::peakon(1e-3, &ShootOptions::default(), &GridSpec::default())?;
            let prof_rows: Vec<Vec<Cell>> = (0..prof.len())
                .map(|i| vec![prof.xi[i].into(), prof.rho[i].into(), prof.v[i].into(), prof.phi[i].into(), prof.e[i].into()])
                .collect();
            s.csv(&dir.join("profile_kappa_1e-3.csv"), &["xi", "rho", "v", "phi", "E"], &prof_rows)?;
            s.json(&dir.join("summary.json"), &sum)?;
            eprintln!("thickness(1e-3) = {t:.6e}, log-log slope = {slope:.4}");
        }
        Target::Speeds => {
            let rows = speed_rows(&[0.0, 1.0, 1e-2, 1e-4, 1e-6], speeds::DEFAULT_TOL)?;
            s.csv(&dir.join("speeds.csv"), &SPEED_HEADER, &rows)?;
        }
        Target::PeakCold | Target::PeakWarm => {
            let kappa = if a.target == Target::PeakCold { 0.0 } else { 1.0 };
            let rep = peak_report(kappa, asympt::DEFAULT_WINDOW, 2000)?;
            let sum = asym_summary(&rep, asympt::DEFAULT_WINDOW);
            write_asym(&mut s, &dir, &sum)?;
            eprintln!("peak power laws: {}", if sum.pass { "pass" } else { "FAIL" });
        }
        Target::ColdLimit => {
            let args = ColdLimitArgs {
                kappas: vec![0.1, 0.01, 0.001],
                alphas: vec![0.2],
                ps: vec![1.2],
                betas: vec![0.5],
                grid: 2000,
                out_dir: None,
            };
            let rep = asympt::cold_limit_report(
                &args.kappas,
                &args.alphas,
                &args.betas,
                &args.ps,
                &ShootOptions::default(),
                &GridSpec::with_per_side(args.grid),
            )?;
            let sum = cold_limit_summary(&args.kappas, &rep, &args);
            s.csv(&dir.join("norms.csv"), &["kappa", "norm", "param", "value"], &cold_limit_rows(&rep))?;
            s.json(&dir.join("summary.json"), &sum)?;
            eprintln!("cold limit: {}", if sum.pass { "pass" } else { "FAIL" });
        }
        Target::Gaussian | Target::Sech => {
            let exp = if a.target == Target::Gaussian { Experiment::GaussianV } else { Experiment::SechRho };
            let cfg = SimConfig { snap_every: 500, ..exp.config() };
            let (traj, rep) = epsim::run_experiment(exp, &cfg)?;
            for snap in &traj.snapshots {
                s.csv(&dir.join(format!("snapshot_{:07}.csv", snap.step)), &SNAP_HEADER, &snapshot_rows(&traj.x, snap))?;
            }
            s.json(&dir.join("report.json"), &rep)?;
            eprintln!(
                "{:?} at t = {:.4}, T* ~ {:.4}, x* ~ {:.4} ({:?})",
                rep.termination, rep.t_final, rep.t_star_estimate, rep.x_star_estimate, rep.kind
            );
        }
    }
    s.finish()
}
