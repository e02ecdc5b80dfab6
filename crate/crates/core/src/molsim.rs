//! Method-of-lines simulation on the periodic grid `x_j = j/N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fulldisc::{AdeOperators, GridConfig};
use crate::stencil::FdOperator;
use crate::timeint::ButcherTableau;
use crate::wavesys::WaveDiscretization;

pub const DEFAULT_BLOWUP_LIMIT: f64 = 1e10;
pub const DEFAULT_HISTORY_STRIDE: usize = 100;

/// `out += alpha · D u` with the `1/h^p` scaling folded into `alpha`.
fn accumulate(op: &FdOperator, u: &[f64], alpha: f64, out: &mut [f64]) {
    let n = u.len();
    let scale = alpha * (n as f64).powi(op.kind().derivative_order() as i32);
    for (k, c) in op.weights() {
        let w = scale * c;
        let shift = k.rem_euclid(n as i64) as usize;
        let (head, tail) = u.split_at(shift);
        // out[j] uses u[(j + shift) mod n]
        for (o, x) in out.iter_mut().zip(tail.iter().chain(head)) {
            *o += w * x;
        }
    }
}

fn check_fits(op: &FdOperator, n: usize) -> Result<()> {
    if n <= op.left() + op.right() {
        return Err(Error::InvalidGrid(format!(
            "N = {n} does not exceed the width of {op}"
        )));
    }
    Ok(())
}

/// `(D u)_j = h^{-p} Σ_k c_k u_{(j+k) mod N}`.
pub fn apply_operator(op: &FdOperator, u: &[f64], n: usize) -> Result<Vec<f64>> {
    if u.len() != n {
        return Err(Error::InvalidArgument(format!("vector length {} ≠ N = {n}", u.len())));
    }
    check_fits(op, n)?;
    let mut out = vec![0.0; n];
    accumulate(op, u, 1.0, &mut out);
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum SimOperators {
    Ade(AdeOperators),
    Wave(WaveDiscretization),
}

impl SimOperators {
    pub fn components(&self) -> usize {
        match self {
            SimOperators::Ade(_) => 1,
            SimOperators::Wave(_) => 2,
        }
    }

    fn ops(&self) -> Vec<&FdOperator> {
        match self {
            SimOperators::Ade(a) => a.dx().into_iter().chain(a.dxx()).collect(),
            SimOperators::Wave(w) => vec![w.dx_minus(), w.dx_plus(), w.dxx()],
        }
    }

    /// Right-hand side on the stacked state `[w]` or `[v; p]`.
    fn rhs(&self, nu: f64, y: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        out.fill(0.0);
        match self {
            SimOperators::Ade(a) => {
                if let Some(d) = a.dx() {
                    accumulate(d, y, -1.0, out);
                }
                if let (Some(d), true) = (a.dxx(), nu != 0.0) {
                    accumulate(d, y, nu, out);
                }
            }
            SimOperators::Wave(w) => {
                let n = y.len() / 2;
                let (v, p) = y.split_at(n);
                let (sum, diff) = scratch.split_at_mut(n);
                for j in 0..n {
                    sum[j] = v[j] + p[j];
                    diff[j] = v[j] - p[j];
                }
                let (ov, op) = out.split_at_mut(n);
                accumulate(w.dx_minus(), sum, -0.5, ov);
                accumulate(w.dx_plus(), diff, 0.5, ov);
                if nu != 0.0 {
                    accumulate(w.dxx(), v, nu, ov);
                }
                accumulate(w.dx_minus(), sum, -0.5, op);
                accumulate(w.dx_plus(), diff, -0.5, op);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub tableau: ButcherTableau,
    pub operators: SimOperators,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    pub blowup_limit: f64,
    /// `max|u|` is recorded every this many steps (and at snapshots).
    pub history_stride: usize,
}

impl SimConfig {
    pub fn new(grid: GridConfig, tableau: ButcherTableau, operators: SimOperators, t_final: f64) -> Result<Self> {
        let cfg = Self {
            grid,
            tableau,
            operators,
            t_final,
            snapshot_times: Vec::new(),
            blowup_limit: DEFAULT_BLOWUP_LIMIT,
            history_stride: DEFAULT_HISTORY_STRIDE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Result<Self> {
        self.snapshot_times = times;
        self.validate()?;
        Ok(self)
    }

    pub fn with_blowup_limit(mut self, limit: f64) -> Result<Self> {
        self.blowup_limit = limit;
        self.validate()?;
        Ok(self)
    }

    pub fn with_history_stride(mut self, stride: usize) -> Result<Self> {
        self.history_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.t_final).contains(&t))
        {
            return Err(Error::InvalidArgument("snapshot times must lie in [0, t_final]".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("snapshot times must be strictly increasing".into()));
        }
        if !(self.blowup_limit > 0.0) {
            return Err(Error::InvalidArgument("blow-up limit must be positive".into()));
        }
        if self.history_stride == 0 {
            return Err(Error::InvalidArgument("history stride must be ≥ 1".into()));
        }
        if let SimOperators::Ade(a) = &self.operators {
            if self.grid.nu > 0.0 && a.dxx().is_none() {
                return Err(Error::InvalidArgument("ν > 0 needs a second-derivative operator".into()));
            }
        }
        for op in self.operators.ops() {
            check_fits(op, self.grid.n_cells)?;
        }
        Ok(())
    }

    fn state_len(&self) -> usize {
        self.operators.components() * self.grid.n_cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub t: f64,
    /// `w`, or `v` followed by `p`.
    pub fields: Vec<f64>,
    pub step_count: u64,
    pub linf_history: Vec<(f64, f64)>,
}

fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

impl SimState {
    pub fn new(fields: Vec<f64>) -> Self {
        let l = linf(&fields);
        Self {
            t: 0.0,
            fields,
            step_count: 0,
            linf_history: vec![(0.0, l)],
        }
    }

    pub fn wave(v: &[f64], p: &[f64]) -> Self {
        Self::new(v.iter().chain(p).copied().collect())
    }

    pub fn linf(&self) -> f64 {
        linf(&self.fields)
    }

    /// Component `i` (0 for `w` or `v`, 1 for `p`).
    pub fn component(&self, i: usize, n: usize) -> &[f64] {
        &self.fields[i * n..(i + 1) * n]
    }

    fn record(&mut self) {
        let l = self.linf();
        match self.linf_history.last() {
            Some(&(t, _)) if t >= self.t => {}
            _ => self.linf_history.push((self.t, l)),
        }
    }
}

/// Reusable explicit Runge–Kutta stage storage.
struct Stepper {
    stages: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(s: usize, len: usize) -> Self {
        Self {
            stages: vec![vec![0.0; len]; s],
            tmp: vec![0.0; len],
            scratch: vec![0.0; len],
        }
    }

    fn step(&mut self, cfg: &SimConfig, y: &mut [f64], dt: f64) {
        let tab = &cfg.tableau;
        let nu = cfg.grid.nu;
        for i in 0..tab.stages {
            self.tmp.copy_from_slice(y);
            for j in 0..i {
                let a = tab.a[i][j];
                if a != 0.0 {
                    for (t, k) in self.tmp.iter_mut().zip(&self.stages[j]) {
                        *t += dt * a * k;
                    }
                }
            }
            cfg.operators.rhs(nu, &self.tmp, &mut self.stages[i], &mut self.scratch);
        }
        for (j, b) in tab.b.iter().enumerate() {
            if *b != 0.0 {
                for (x, k) in y.iter_mut().zip(&self.stages[j]) {
                    *x += dt * b * k;
                }
            }
        }
    }
}

fn check_state(state: &SimState, cfg: &SimConfig) -> Result<()> {
    if state.fields.len() != cfg.state_len() {
        return Err(Error::InvalidArgument(format!(
            "state length {} ≠ {}",
            state.fields.len(),
            cfg.state_len()
        )));
    }
    Ok(())
}

fn single_step(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    cfg.validate()?;
    check_state(state, cfg)?;
    let mut next = state.clone();
    Stepper::new(cfg.tableau.stages, next.fields.len()).step(cfg, &mut next.fields, cfg.grid.dt);
    next.t += cfg.grid.dt;
    next.step_count += 1;
    next.record();
    let l = next.linf();
    if !(l <= cfg.blowup_limit) {
        return Err(Error::Blowup { t: next.t, linf: l });
    }
    Ok(next)
}

/// One step of size `δt` for the advection-diffusion system.
pub fn step_ade(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    if !matches!(cfg.operators, SimOperators::Ade(_)) {
        return Err(Error::WrongKind("step_ade needs advection-diffusion operators".into()));
    }
    single_step(state, cfg)
}

/// One step of size `δt` for the wave system.
pub fn step_wave(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    if !matches!(cfg.operators, SimOperators::Wave(_)) {
        return Err(Error::WrongKind("step_wave needs a wave discretization".into()));
    }
    single_step(state, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub fields: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
    /// Time at which `max|u|` first exceeded the limit.
    pub t_blowup: Option<f64>,
}

impl SimOutcome {
    pub fn blowup(&self) -> bool {
        self.t_blowup.is_some()
    }
}

/// Integrates to `t_final`, shortening the step before each snapshot and at
/// the end so those times are hit exactly. Stops early on blow-up.
pub fn run(cfg: &SimConfig, initial: SimState) -> Result<SimOutcome> {
    cfg.validate()?;
    check_state(&initial, cfg)?;
    let dt = cfg.grid.dt;
    let mut state = initial;
    let mut stepper = Stepper::new(cfg.tableau.stages, state.fields.len());
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    let mut targets: Vec<f64> = cfg.snapshot_times.clone();
    if targets.last() != Some(&cfg.t_final) {
        targets.push(cfg.t_final);
    }
    for target in targets {
        while state.t < target {
            let remaining = target - state.t;
            let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            stepper.step(cfg, &mut state.fields, h);
            state.t = if h == remaining { target } else { state.t + h };
            state.step_count += 1;
            let l = state.linf();
            if !(l <= cfg.blowup_limit) {
                state.record();
                let t = state.t;
                return Ok(SimOutcome {
                    snapshots,
                    final_state: state,
                    t_blowup: Some(t),
                });
            }
            if state.step_count % cfg.history_stride as u64 == 0 {
                state.record();
            }
        }
        state.record();
        if cfg.snapshot_times.contains(&target) {
            snapshots.push(Snapshot {
                t: target,
                fields: state.fields.clone(),
            });
        }
    }
    Ok(SimOutcome {
        snapshots,
        final_state: state,
        t_blowup: None,
    })
}

/// `exp(-100 (x - 1/2)²)` at `x_j = j/N`.
pub fn gaussian_pulse(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = j as f64 / n as f64 - 0.5;
            (-100.0 * x * x).exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSnapshot {
    pub t: f64,
    pub linf: f64,
    /// `max|w - w(·,0)|` when `t` is an integer (one period of transport).
    pub deviation: Option<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianReport {
    pub initial_linf: f64,
    pub snapshots: Vec<PulseSnapshot>,
    pub linf_series: Vec<(f64, f64)>,
    pub t_blowup: Option<f64>,
    /// Largest `max|w|` over the recorded history divided by the initial one.
    pub growth: f64,
}

/// Advects the Gaussian pulse with `ν = 0` and records `max|w|`.
pub fn run_gaussian_experiment(cfg: &SimConfig) -> Result<GaussianReport> {
    match &cfg.operators {
        SimOperators::Ade(a) if cfg.grid.nu == 0.0 && a.dx().is_some() => {}
        _ => {
            return Err(Error::InvalidArgument(
                "the pulse experiment needs an advection operator and ν = 0".into(),
            ))
        }
    }
    let w0 = gaussian_pulse(cfg.grid.n_cells);
    let initial_linf = linf(&w0);
    let out = run(cfg, SimState::new(w0.clone()))?;
    let snapshots = out
        .snapshots
        .into_iter()
        .map(|s| {
            let deviation = (s.t.fract() == 0.0).then(|| {
                s.fields
                    .iter()
                    .zip(&w0)
                    .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
            });
            PulseSnapshot {
                t: s.t,
                linf: linf(&s.fields),
                deviation,
                w: s.fields,
            }
        })
        .collect();
    let peak = out
        .final_state
        .linf_history
        .iter()
        .fold(0.0, |m: f64, &(_, l)| m.max(l));
    Ok(GaussianReport {
        initial_linf,
        snapshots,
        linf_series: out.final_state.linf_history,
        t_blowup: out.t_blowup,
        growth: peak / initial_linf,
    })
}
