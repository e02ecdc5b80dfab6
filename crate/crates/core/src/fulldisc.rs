//! Fully discrete spectra of explicit Runge–Kutta + finite-difference
//! schemes for the periodic advection-diffusion equation.
//!
//! The update matrix `p_s(μM)` is circulant, so its eigenvalues are
//! `p_s(μ λ_R(s_k))` with `s_k = e^{2πik/N}`. No dense matrix is formed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{lambda0, lambda_inf};
use crate::stencil::{FdOperator, StencilKind};
use crate::timeint::StabilityPolynomial;

/// `ρ - 1` at or below this is reported as stable.
pub const TOL_STABLE: f64 = 1e-12;

/// Seed of the threshold search.
pub const THRESHOLD_SEED: f64 = 1e-8;

/// Relative bracket width at which bisection stops.
pub const THRESHOLD_RTOL: f64 = 1e-6;

const THRESHOLD_CEILING: f64 = 1e12;

/// Uniform periodic grid on `[0, 1]` with diffusivity and time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n_cells: usize,
    pub nu: f64,
    pub dt: f64,
}

impl GridConfig {
    pub fn new(n_cells: usize, nu: f64, dt: f64) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidGrid(format!("need N ≥ 4, got {n_cells}")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidGrid(format!("ν must be finite and non-negative, got {nu}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("δt must be positive, got {dt}")));
        }
        Ok(Self { n_cells, nu, dt })
    }

    /// `δt = μ h`.
    pub fn from_mu(n_cells: usize, nu: f64, mu: f64) -> Result<Self> {
        Self::new(n_cells, nu, mu / n_cells as f64)
    }

    /// `δt = μ_ν h² / ν`.
    pub fn from_mu_nu(n_cells: usize, nu: f64, mu_nu: f64) -> Result<Self> {
        if nu <= 0.0 {
            return Err(Error::InvalidGrid("fixed μ_ν needs ν > 0".into()));
        }
        let n = n_cells as f64;
        Self::new(n_cells, nu, mu_nu / (nu * n * n))
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Courant number `δt/h`.
    pub fn mu(&self) -> f64 {
        self.dt * self.n_cells as f64
    }

    /// Reciprocal cell Reynolds number `ν/h`.
    pub fn r(&self) -> f64 {
        self.nu * self.n_cells as f64
    }

    /// Diffusive Courant number `ν δt/h²`.
    pub fn mu_nu(&self) -> f64 {
        let n = self.n_cells as f64;
        self.nu * self.dt * n * n
    }
}

/// Advection and diffusion operators; either may be absent.
#[derive(Debug, Clone)]
pub struct AdeOperators {
    dx: Option<FdOperator>,
    dxx: Option<FdOperator>,
}

impl AdeOperators {
    pub fn new(dx: Option<FdOperator>, dxx: Option<FdOperator>) -> Result<Self> {
        if dx.is_none() && dxx.is_none() {
            return Err(Error::InvalidArgument("need at least one operator".into()));
        }
        if let Some(d) = &dx {
            if d.kind() != StencilKind::FirstDerivative {
                return Err(Error::WrongKind(format!("{d} is not a first-derivative operator")));
            }
        }
        if let Some(d) = &dxx {
            if d.kind() != StencilKind::SecondDerivativeCentered {
                return Err(Error::WrongKind(format!("{d} is not a centered second-derivative operator")));
            }
        }
        Ok(Self { dx, dxx })
    }

    pub fn pair(dx: FdOperator, dxx: FdOperator) -> Result<Self> {
        Self::new(Some(dx), Some(dxx))
    }

    pub fn advection(dx: FdOperator) -> Result<Self> {
        Self::new(Some(dx), None)
    }

    pub fn diffusion(dxx: FdOperator) -> Result<Self> {
        Self::new(None, Some(dxx))
    }

    pub fn dx(&self) -> Option<&FdOperator> {
        self.dx.as_ref()
    }

    pub fn dxx(&self) -> Option<&FdOperator> {
        self.dxx.as_ref()
    }

    /// Widest one-sided reach of either operator.
    pub fn reach(&self) -> usize {
        [&self.dx, &self.dxx]
            .iter()
            .filter_map(|o| o.as_ref())
            .map(|o| o.left() + o.right())
            .max()
            .unwrap_or(0)
    }

    fn check(&self, grid: &GridConfig) -> Result<()> {
        if grid.nu > 0.0 && self.dxx.is_none() {
            return Err(Error::InvalidArgument(
                "ν > 0 needs a second-derivative operator".into(),
            ));
        }
        Ok(())
    }

    /// `λ_0(θ)` and `λ_∞(θ)`, zero for absent operators.
    fn parts(&self, theta: f64) -> (Complex64, f64) {
        let adv = self.dx.as_ref().map_or(Complex64::new(0.0, 0.0), |d| lambda0(d, theta));
        let dif = self.dxx.as_ref().map_or(0.0, |d| lambda_inf(d, theta));
        (adv, dif)
    }

    /// `λ_R(θ)` with `R = ν/h`.
    pub fn lambda(&self, theta: f64, r: f64) -> Complex64 {
        if theta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (adv, dif) = self.parts(theta);
        if r == 0.0 {
            adv
        } else {
            adv + r * dif
        }
    }

    /// `δt · (semi-discrete eigenvalue / h) = μ λ_0 + μ_ν λ_∞`.
    pub fn scaled_lambda(&self, theta: f64, grid: &GridConfig) -> Complex64 {
        if theta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (adv, dif) = self.parts(theta);
        let mu_nu = grid.mu_nu();
        if mu_nu == 0.0 {
            grid.mu() * adv
        } else {
            grid.mu() * adv + mu_nu * dif
        }
    }
}

/// `θ_k = 2πk/N` folded into `(-π, π]`; `k = N` maps to `0`.
pub fn mode_angle(k: usize, n: usize) -> f64 {
    let k = k % n;
    if 2 * k <= n {
        2.0 * PI * k as f64 / n as f64
    } else {
        -2.0 * PI * (n - k) as f64 / n as f64
    }
}

/// Semi-discrete eigenvalues `λ_R(s_k)`, `k = 1..=N`; the last is exactly 0.
pub fn semidiscrete_eigs(ops: &AdeOperators, grid: &GridConfig) -> Result<Vec<Complex64>> {
    ops.check(grid)?;
    let n = grid.n_cells;
    let r = grid.r();
    Ok((1..=n).map(|k| ops.lambda(mode_angle(k, n), r)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub rho: f64,
    pub instability_index: Option<f64>,
}

/// `log10(ρ - 1)` when `ρ - 1 > TOL_STABLE`.
pub fn instability_index(rho: f64) -> Option<f64> {
    (rho - 1.0 > TOL_STABLE).then(|| (rho - 1.0).log10())
}

/// Eigenvalues `p(μ λ_k)` of the one-step update.
pub fn full_spectrum(ops: &AdeOperators, grid: &GridConfig, p: &StabilityPolynomial) -> Result<SpectrumReport> {
    ops.check(grid)?;
    let n = grid.n_cells;
    let eigenvalues: Vec<Complex64> = (1..=n)
        .map(|k| p.eval(ops.scaled_lambda(mode_angle(k, n), grid)))
        .collect();
    let rho = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        eigenvalues,
        rho,
        instability_index: instability_index(rho),
    })
}

/// Spectral radius of `p(μM)` without storing the spectrum.
pub fn spectral_radius(ops: &AdeOperators, grid: &GridConfig, p: &StabilityPolynomial) -> Result<f64> {
    ops.check(grid)?;
    let n = grid.n_cells;
    Ok((1..=n)
        .map(|k| p.eval(ops.scaled_lambda(mode_angle(k, n), grid)).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepMode {
    /// `δt = μ h` at fixed Courant number.
    FixedMu,
    /// `δt = μ_ν h²/ν` at fixed diffusive Courant number.
    FixedMuNu,
}

impl SweepMode {
    pub fn grid(self, n: usize, nu: f64, value: f64) -> Result<GridConfig> {
        match self {
            SweepMode::FixedMu => GridConfig::from_mu(n, nu, value),
            SweepMode::FixedMuNu => GridConfig::from_mu_nu(n, nu, value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub value: f64,
    pub rho: f64,
    pub instability_index: Option<f64>,
}

/// `I_h` against `N` at a fixed `μ` or `μ_ν`. Points are evaluated in
/// parallel; the output keeps the order of `n_list`.
pub fn instability_curve(
    ops: &AdeOperators,
    p: &StabilityPolynomial,
    value: f64,
    n_list: &[usize],
    mode: SweepMode,
    nu: f64,
) -> Result<Vec<CurvePoint>> {
    if mode == SweepMode::FixedMuNu && nu <= 0.0 {
        return Err(Error::InvalidArgument("fixed μ_ν sweep needs ν > 0".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N list must be strictly ascending".into()));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let grid = mode.grid(n, nu, value)?;
            let rho = spectral_radius(ops, &grid, p)?;
            Ok(CurvePoint {
                n,
                value,
                rho,
                instability_index: instability_index(rho),
            })
        })
        .collect()
}

/// Smallest `N` of the curve from which every later point is stable, when the
/// curve has at least one unstable point before it ("broken" curve).
pub fn break_point(curve: &[CurvePoint]) -> Option<usize> {
    let last_unstable = curve.iter().rposition(|p| p.instability_index.is_some())?;
    curve.get(last_unstable + 1).map(|p| p.n)
}

/// Smallest `N` of the curve from which every later point is unstable.
pub fn instability_onset(curve: &[CurvePoint]) -> Option<usize> {
    let last_stable = curve.iter().rposition(|p| p.instability_index.is_none());
    match last_stable {
        None => curve.first().map(|p| p.n),
        Some(i) => curve.get(i + 1).map(|p| p.n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub mu_star: f64,
    pub iterations: usize,
    pub tol: f64,
    /// A stable value was found above the first crossing.
    pub larger_stable_exists: bool,
}

/// Largest stable `μ` (or `μ_ν`) below the first crossing found by doubling
/// from [`THRESHOLD_SEED`], refined by bisection to [`THRESHOLD_RTOL`].
pub fn stable_mu_threshold(
    ops: &AdeOperators,
    p: &StabilityPolynomial,
    nu: f64,
    n: usize,
    mode: SweepMode,
) -> Result<Threshold> {
    let stable = |v: f64| -> Result<bool> {
        let grid = mode.grid(n, nu, v)?;
        Ok(spectral_radius(ops, &grid, p)? <= 1.0 + TOL_STABLE)
    };
    let mut iterations = 0;
    let mut lo = THRESHOLD_SEED;
    if !stable(lo)? {
        return Err(Error::NoStableStep { smallest: lo });
    }
    let mut hi = 2.0 * lo;
    loop {
        iterations += 1;
        if !stable(hi)? {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > THRESHOLD_CEILING {
            return Err(Error::NoInstability { largest: lo });
        }
    }
    while hi - lo > THRESHOLD_RTOL * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let larger_stable_exists = (1..=64)
        .map(|i| hi * 16f64.powf(i as f64 / 64.0))
        .try_fold(false, |found, v| Ok::<_, Error>(found || stable(v)?))?;
    Ok(Threshold {
        mu_star: lo,
        iterations,
        tol: THRESHOLD_RTOL,
        larger_stable_exists,
    })
}
