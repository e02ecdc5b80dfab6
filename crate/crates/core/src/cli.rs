//! `fdmlab` command-line front end.
//!
//! Every command that writes files (`--out`) also writes a manifest
//! `<out>.manifest.json` that `fdmlab rerun` can replay.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fulldisc::{self, AdeOperators, GridConfig, SweepMode};
use crate::molsim::{self, SimConfig, SimOperators, SimState};
use crate::spectrum::{self, AdeSymbol};
use crate::stencil::{build_dx, build_dxx, mirror, rational_to_f64, FdOperator};
use crate::timeint::{self, ButcherTableau};
use crate::wavesys::{self, WaveDiscretization};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trajectory panels used when no operators are given.
const DEFAULT_PANELS: [(usize, usize, usize); 4] = [(3, 1, 2), (21, 20, 20), (3, 1, 20), (21, 20, 2)];

#[derive(Debug, Parser)]
#[command(name = "fdmlab", version, about = "Stability analysis of explicit RK + finite-difference schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Print finite-difference weights as exact fractions and floats.
    Coeffs(CoeffsArgs),
    /// Sample the semi-discrete symbol trajectory for one or more R.
    Trajectory(TrajectoryArgs),
    /// Instability index against N at fixed μ or μ_ν.
    IndexSweep(IndexSweepArgs),
    /// Largest stable μ (or μ_ν) at fixed N.
    Threshold(ThresholdArgs),
    /// Wave-system eigenvalue pairs.
    WaveSpectrum(WaveSpectrumArgs),
    /// Real/complex classification of the wave-system grid spectrum.
    WaveClassify(WaveClassifyArgs),
    /// Method-of-lines run from a Gaussian pulse.
    Simulate(SimulateArgs),
    /// Butcher tableau utilities.
    Tableau {
        #[command(subcommand)]
        action: TableauAction,
    },
    /// Replay the run recorded in a manifest.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum CoeffsOp {
    /// First derivative on l points left and r points right.
    Dx { left: usize, right: usize },
    /// Centered second derivative on q points each side.
    Dxx { q: usize },
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffsArgs {
    #[command(subcommand)]
    pub op: CoeffsOp,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct OperatorArgs {
    /// Advection operator D_x^{L,R}.
    #[arg(long, num_args = 2, value_names = ["L", "R"])]
    pub dx: Option<Vec<usize>>,
    /// Diffusion operator D_xx^{Q}.
    #[arg(long, value_name = "Q")]
    pub dxx: Option<usize>,
}

impl OperatorArgs {
    fn dx_op(&self) -> Result<Option<FdOperator>> {
        self.dx.as_ref().map(|v| build_dx(v[0], v[1])).transpose()
    }

    fn dxx_op(&self) -> Result<Option<FdOperator>> {
        self.dxx.map(build_dxx).transpose()
    }

    fn ade(&self) -> Result<AdeOperators> {
        AdeOperators::new(self.dx_op()?, self.dxx_op()?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub ops: OperatorArgs,
    /// Comma-separated R values.
    #[arg(long = "r", value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = spectrum::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Output prefix; one CSV per panel and R.
    #[arg(long, default_value = "trajectory")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    FixedMu,
    FixedMuNu,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FixedMu => SweepMode::FixedMu,
            ModeArg::FixedMuNu => SweepMode::FixedMuNu,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IndexSweepArgs {
    #[arg(long, default_value = "fe")]
    pub tableau: String,
    #[command(flatten)]
    pub ops: OperatorArgs,
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedMu)]
    pub mode: ModeArg,
    /// Comma-separated μ values (fixed-mu mode).
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// Comma-separated μ_ν values (fixed-mu-nu mode).
    #[arg(long = "mu-nu", value_delimiter = ',')]
    pub mu_nu: Vec<f64>,
    /// N values: `a:b` (powers of two), `a:b:step`, or a comma list.
    #[arg(long, default_value = "16:4096")]
    pub n: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, default_value = "fe")]
    pub tableau: String,
    #[command(flatten)]
    pub ops: OperatorArgs,
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedMu)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct WaveOperatorArgs {
    /// D⁻ = D_x^{L,R}, stable upwind.
    #[arg(long, num_args = 2, value_names = ["L", "R"], default_values_t = [1, 0])]
    pub dx: Vec<usize>,
    /// D⁺ = D_x^{L,R}, stable downwind; the mirror of D⁻ when omitted.
    #[arg(long = "dx-plus", num_args = 2, value_names = ["L", "R"])]
    pub dx_plus: Option<Vec<usize>>,
    #[arg(long, value_name = "Q", default_value_t = 1)]
    pub dxx: usize,
}

impl WaveOperatorArgs {
    fn build(&self) -> Result<WaveDiscretization> {
        let dm = build_dx(self.dx[0], self.dx[1])?;
        let dp = match &self.dx_plus {
            Some(v) => build_dx(v[0], v[1])?,
            None => mirror(&dm)?,
        };
        WaveDiscretization::new(dm, dp, build_dxx(self.dxx)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct WaveSpectrumArgs {
    #[command(flatten)]
    pub ops: WaveOperatorArgs,
    /// R for trajectory sampling.
    #[arg(long = "r", default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = spectrum::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Grid mode: sample θ_k = 2πk/N with R = νN instead.
    #[arg(long, requires = "nu")]
    pub n: Option<usize>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WaveClassifyArgs {
    #[command(flatten)]
    pub ops: WaveOperatorArgs,
    #[arg(long)]
    pub nu: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value = "lsrk3")]
    pub tableau: String,
    #[command(flatten)]
    pub ops: OperatorArgs,
    /// Simulate the wave system; `--dx` is D⁻ and `--dxx` defaults to 1.
    #[arg(long)]
    pub wave: bool,
    #[arg(long = "dx-plus", num_args = 2, value_names = ["L", "R"], requires = "wave")]
    pub dx_plus: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, conflicts_with_all = ["mu_nu", "dt"])]
    pub mu: Option<f64>,
    #[arg(long = "mu-nu", conflicts_with = "dt")]
    pub mu_nu: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long = "t-final", default_value_t = 1.0)]
    pub t_final: f64,
    /// Comma-separated snapshot times; default t/3, 2t/3, t.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    #[arg(long = "blowup-limit", default_value_t = molsim::DEFAULT_BLOWUP_LIMIT)]
    pub blowup_limit: f64,
    #[arg(long = "history-stride", default_value_t = molsim::DEFAULT_HISTORY_STRIDE)]
    pub history_stride: usize,
    /// Output prefix for snapshot CSVs and the summary JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum TableauAction {
    /// Validate a tableau (builtin name or JSON file) and print its polynomial.
    Check { tableau: String },
    /// List builtin tableaux.
    List,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; `rerun` replays them.
    pub args: Vec<String>,
    pub parameters: serde_json::Value,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

/// Exit code for an error: 3 for violated invariants, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

/// CSV float: shortest round-trip decimal, scientific for very small or
/// very large magnitudes.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// `a:b` doubles from `a` up to `b`; `a:b:step` is linear; otherwise a
/// comma-separated list.
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad range `{spec}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let out: Vec<usize> = match parts.as_slice() {
        [a, b] => {
            let (a, b) = (num(a)?, num(b)?);
            if a == 0 {
                return Err(bad());
            }
            std::iter::successors(Some(a), |x| x.checked_mul(2))
                .take_while(|&x| x <= b)
                .collect()
        }
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if s == 0 {
                return Err(bad());
            }
            (a..=b).step_by(s).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Collects CSV/JSON outputs; files go to disk, unnamed output to stdout.
struct Sink<'a> {
    stdout: &'a mut dyn Write,
    files: Vec<PathBuf>,
}

impl Sink<'_> {
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => {
                write_atomic(p, text.as_bytes())?;
                self.files.push(p.to_path_buf());
            }
            None => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Parses `args` (without the program name) and runs the command. Returns
/// the process exit code; diagnostics go to stderr.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = std::iter::once(OsString::from("fdmlab")).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let strings = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, strings, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn manifest_base(cmd: &Command) -> Option<PathBuf> {
    match cmd {
        Command::Coeffs(a) => a.out.clone(),
        Command::Trajectory(a) => Some(a.out.clone()),
        Command::IndexSweep(a) => a.out.clone(),
        Command::Threshold(a) => a.out.clone(),
        Command::WaveSpectrum(a) => a.out.clone(),
        Command::WaveClassify(a) => a.out.clone(),
        Command::Simulate(a) => a.out.clone(),
        Command::Tableau { .. } | Command::Rerun { .. } => None,
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Coeffs(_) => "coeffs",
        Command::Trajectory(_) => "trajectory",
        Command::IndexSweep(_) => "index-sweep",
        Command::Threshold(_) => "threshold",
        Command::WaveSpectrum(_) => "wave-spectrum",
        Command::WaveClassify(_) => "wave-classify",
        Command::Simulate(_) => "simulate",
        Command::Tableau { .. } => "tableau",
        Command::Rerun { .. } => "rerun",
    }
}

fn execute(cmd: Command, args: Vec<String>, stdout: &mut dyn Write) -> Result<()> {
    if let Command::Rerun { manifest } = &cmd {
        let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(manifest)?)?;
        let cli = Cli::try_parse_from(std::iter::once("fdmlab".to_string()).chain(m.args.iter().cloned()))
            .map_err(|e| Error::InvalidArgument(format!("manifest arguments: {e}")))?;
        if matches!(cli.command, Command::Rerun { .. }) {
            return Err(Error::InvalidArgument("a manifest cannot replay rerun".into()));
        }
        return execute(cli.command, m.args, stdout);
    }
    let start = Instant::now();
    let mut sink = Sink {
        stdout,
        files: Vec::new(),
    };
    match &cmd {
        Command::Coeffs(a) => cmd_coeffs(a, &mut sink)?,
        Command::Trajectory(a) => cmd_trajectory(a, &mut sink)?,
        Command::IndexSweep(a) => cmd_index_sweep(a, &mut sink)?,
        Command::Threshold(a) => cmd_threshold(a, &mut sink)?,
        Command::WaveSpectrum(a) => cmd_wave_spectrum(a, &mut sink)?,
        Command::WaveClassify(a) => cmd_wave_classify(a, &mut sink)?,
        Command::Simulate(a) => cmd_simulate(a, &mut sink)?,
        Command::Tableau { action } => cmd_tableau(action, &mut sink)?,
        Command::Rerun { .. } => unreachable!(),
    }
    if let Some(base) = manifest_base(&cmd) {
        let manifest = RunManifest {
            command: command_name(&cmd).into(),
            args,
            parameters: serde_json::to_value(&cmd)?,
            version: VERSION.into(),
            outputs: sink.files.iter().map(|p| p.display().to_string()).collect(),
            duration_secs: start.elapsed().as_secs_f64(),
        };
        write_atomic(&with_suffix(&base, ".manifest.json"), json_line(&manifest)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_coeffs(a: &CoeffsArgs, sink: &mut Sink) -> Result<()> {
    let op = match a.op {
        CoeffsOp::Dx { left, right } => build_dx(left, right)?,
        CoeffsOp::Dxx { q } => build_dxx(q)?,
    };
    let mut csv = Csv::new(&["k", "num", "den", "value"]);
    for (k, c) in op.offsets().zip(op.coeffs()) {
        csv.row(&[
            k.to_string(),
            c.numer().to_string(),
            c.denom().to_string(),
            fmt_float(rational_to_f64(c)),
        ]);
    }
    sink.emit(a.out.as_deref(), &csv.0)
}

fn cmd_trajectory(a: &TrajectoryArgs, sink: &mut Sink) -> Result<()> {
    let panels: Vec<(usize, usize, usize)> = match (&a.ops.dx, a.ops.dxx) {
        (None, None) => DEFAULT_PANELS.to_vec(),
        (Some(dx), Some(q)) => vec![(dx[0], dx[1], q)],
        _ => {
            return Err(Error::InvalidArgument(
                "trajectory needs both --dx and --dxx, or neither for the default panels".into(),
            ))
        }
    };
    for (l, r, q) in panels {
        let base = AdeSymbol::new(build_dx(l, r)?, build_dxx(q)?, 0.0)?;
        for &rv in &a.r {
            let sym = base.with_r(rv)?;
            let mut csv = Csv::new(&["theta", "re", "im"]);
            for s in spectrum::sample_trajectory(&sym, a.samples)? {
                csv.row(&[fmt_float(s.theta), fmt_float(s.x), fmt_float(s.y)]);
            }
            let path = with_suffix(&a.out, &format!("_dx{l}-{r}_dxx{q}_R{}.csv", fmt_float(rv)));
            sink.emit(Some(&path), &csv.0)?;
        }
    }
    Ok(())
}

fn cmd_index_sweep(a: &IndexSweepArgs, sink: &mut Sink) -> Result<()> {
    let ops = a.ops.ade()?;
    let p = timeint::resolve(&a.tableau)?.stability_polynomial();
    let n_list = parse_range(&a.n)?;
    let mode = SweepMode::from(a.mode);
    let values = match mode {
        SweepMode::FixedMu => &a.mu,
        SweepMode::FixedMuNu => &a.mu_nu,
    };
    if values.is_empty() {
        return Err(Error::InvalidArgument(match mode {
            SweepMode::FixedMu => "fixed-mu sweep needs --mu".into(),
            SweepMode::FixedMuNu => "fixed-mu-nu sweep needs --mu-nu".into(),
        }));
    }
    let mut csv = Csv::new(&["N", "mu", "mu_nu", "rho", "I_h"]);
    for &v in values {
        for pt in fulldisc::instability_curve(&ops, &p, v, &n_list, mode, a.nu)? {
            let g = mode.grid(pt.n, a.nu, v)?;
            csv.row(&[
                pt.n.to_string(),
                fmt_float(g.mu()),
                fmt_float(g.mu_nu()),
                fmt_float(pt.rho),
                pt.instability_index.map(fmt_float).unwrap_or_default(),
            ]);
        }
    }
    sink.emit(a.out.as_deref(), &csv.0)
}

#[derive(Serialize)]
struct ThresholdReport {
    tableau: String,
    mode: ModeArg,
    #[serde(rename = "N")]
    n: usize,
    nu: f64,
    #[serde(flatten)]
    threshold: fulldisc::Threshold,
}

fn cmd_threshold(a: &ThresholdArgs, sink: &mut Sink) -> Result<()> {
    let ops = a.ops.ade()?;
    let p = timeint::resolve(&a.tableau)?.stability_polynomial();
    let threshold = fulldisc::stable_mu_threshold(&ops, &p, a.nu, a.n, a.mode.into())?;
    let rep = ThresholdReport {
        tableau: a.tableau.clone(),
        mode: a.mode,
        n: a.n,
        nu: a.nu,
        threshold,
    };
    sink.emit(a.out.as_deref(), &json_line(&rep)?)
}

fn cmd_wave_spectrum(a: &WaveSpectrumArgs, sink: &mut Sink) -> Result<()> {
    let w = a.ops.build()?;
    let pairs = match (a.n, a.nu) {
        (Some(n), Some(nu)) => {
            if n == 0 || !(nu > 0.0) {
                return Err(Error::InvalidArgument("grid mode needs N ≥ 1 and ν > 0".into()));
            }
            wavesys::wave_spectrum(&w, nu * n as f64, n)
        }
        _ => {
            if a.samples < 8 || !(a.r > 0.0) {
                return Err(Error::InvalidArgument("need --samples ≥ 8 and --r > 0".into()));
            }
            spectrum::theta_grid(a.samples)
                .into_iter()
                .map(|t| wavesys::wave_eigs(&w, a.r, t))
                .collect()
        }
    };
    let mut csv = Csv::new(&["theta", "re1", "im1", "re2", "im2", "jordan"]);
    for p in pairs {
        csv.row(&[
            fmt_float(p.theta),
            fmt_float(p.lambda1.re),
            fmt_float(p.lambda1.im),
            fmt_float(p.lambda2.re),
            fmt_float(p.lambda2.im),
            p.jordan.to_string(),
        ]);
    }
    sink.emit(a.out.as_deref(), &csv.0)
}

fn cmd_wave_classify(a: &WaveClassifyArgs, sink: &mut Sink) -> Result<()> {
    let w = a.ops.build()?;
    let c = wavesys::classify_spectrum(&w, a.nu, a.n)?;
    sink.emit(a.out.as_deref(), &json_line(&c)?)
}

#[derive(Serialize)]
struct SnapshotSummary {
    t: f64,
    linf: f64,
}

#[derive(Serialize)]
struct SimSummary {
    blowup: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_blowup: Option<f64>,
    t_end: f64,
    steps: u64,
    dt: f64,
    snapshots: Vec<SnapshotSummary>,
    linf_series: Vec<(f64, f64)>,
}

fn cmd_simulate(a: &SimulateArgs, sink: &mut Sink) -> Result<()> {
    let grid = match (a.mu, a.mu_nu, a.dt) {
        (Some(mu), None, None) => GridConfig::from_mu(a.n, a.nu, mu)?,
        (None, Some(m), None) => GridConfig::from_mu_nu(a.n, a.nu, m)?,
        (None, None, Some(dt)) => GridConfig::new(a.n, a.nu, dt)?,
        _ => return Err(Error::InvalidArgument("give exactly one of --mu, --mu-nu, --dt".into())),
    };
    let tableau: ButcherTableau = timeint::resolve(&a.tableau)?;
    let pulse = molsim::gaussian_pulse(a.n);
    let (operators, initial) = if a.wave {
        let dx = a.ops.dx.clone().unwrap_or_else(|| vec![1, 0]);
        let w = WaveOperatorArgs {
            dx,
            dx_plus: a.dx_plus.clone(),
            dxx: a.ops.dxx.unwrap_or(1),
        }
        .build()?;
        (SimOperators::Wave(w), SimState::wave(&pulse, &vec![0.0; a.n]))
    } else {
        (SimOperators::Ade(a.ops.ade()?), SimState::new(pulse))
    };
    let snapshots = if a.snapshots.is_empty() {
        vec![a.t_final / 3.0, 2.0 * a.t_final / 3.0, a.t_final]
    } else {
        a.snapshots.clone()
    };
    let cfg = SimConfig::new(grid, tableau, operators, a.t_final)?
        .with_snapshots(snapshots)?
        .with_blowup_limit(a.blowup_limit)?
        .with_history_stride(a.history_stride)?;
    let out = molsim::run(&cfg, initial)?;
    let n = a.n;
    if let Some(prefix) = &a.out {
        for s in &out.snapshots {
            let mut csv = if a.wave {
                Csv::new(&["x", "v", "p"])
            } else {
                Csv::new(&["x", "w"])
            };
            for j in 0..n {
                let mut row = vec![fmt_float(j as f64 / n as f64), fmt_float(s.fields[j])];
                if a.wave {
                    row.push(fmt_float(s.fields[n + j]));
                }
                csv.row(&row);
            }
            sink.emit(Some(&with_suffix(prefix, &format!("_t{}.csv", fmt_float(s.t)))), &csv.0)?;
        }
    }
    let summary = SimSummary {
        blowup: out.blowup(),
        t_blowup: out.t_blowup,
        t_end: out.final_state.t,
        steps: out.final_state.step_count,
        dt: cfg.grid.dt,
        snapshots: out
            .snapshots
            .iter()
            .map(|s| SnapshotSummary {
                t: s.t,
                linf: s.fields.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
            })
            .collect(),
        linf_series: out.final_state.linf_history.clone(),
    };
    let path = a.out.as_ref().map(|p| with_suffix(p, "_summary.json"));
    sink.emit(path.as_deref(), &json_line(&summary)?)
}

#[derive(Serialize)]
struct TableauReport<'a> {
    stages: usize,
    order: Option<usize>,
    c: &'a [f64],
    stability_polynomial: Vec<f64>,
}

fn cmd_tableau(action: &TableauAction, sink: &mut Sink) -> Result<()> {
    match action {
        TableauAction::Check { tableau } => {
            let t = timeint::resolve(tableau)?;
            let rep = TableauReport {
                stages: t.stages,
                order: t.order,
                c: &t.c,
                stability_polynomial: t.stability_polynomial().coeffs,
            };
            sink.emit(None, &json_line(&rep)?)
        }
        TableauAction::List => {
            let names: Vec<&str> = timeint::builtin_tableaux().keys().copied().collect();
            sink.emit(None, &(names.join("\n") + "\n"))
        }
    }
}

/// Sets the global rayon pool size from `FDMLAB_THREADS` when present.
pub fn init_threads() {
    if let Some(n) = std::env::var("FDMLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
