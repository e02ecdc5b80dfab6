//! Symbol trajectories of the semi-discrete advection-diffusion operator.
//!
//! With `s = e^{iθ}` the eigenvalues of `M = -A + R·B` lie on
//!
//! ```text
//! λ_R(θ) = λ_0(θ) + R·λ_∞(θ),   λ_0 = -Σ a_k s^k,   λ_∞ = Σ b_k s^k
//! ```
//!
//! This module evaluates those curves, the closed-form real part of `λ_0` for
//! stable upwind stencils, the Vietoris coefficient test behind the negativity
//! of `λ_∞`, and the constants of the global parabolic bound `x ≤ -R·L·y²`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stencil::{factorial, mirror, rational_to_f64, FdOperator, StabilityClass, StencilKind};

/// Default number of uniform θ samples on `[-π, π)`.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Default fit window for the small-θ exponent.
pub const EXPONENT_WINDOW: (f64, f64) = (1e-3, 1e-2);
pub const EXPONENT_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub theta: f64,
    pub lambda: Complex64,
    pub x: f64,
    pub y: f64,
}

impl TrajectorySample {
    fn new(theta: f64, lambda: Complex64) -> Self {
        Self {
            theta,
            lambda,
            x: lambda.re,
            y: lambda.im,
        }
    }
}

/// Advection operator, diffusion operator and the reciprocal cell Reynolds
/// number `R = ν/h` (`f64::INFINITY` selects the pure-diffusion limit).
#[derive(Debug, Clone)]
pub struct AdeSymbol {
    dx: FdOperator,
    dxx: FdOperator,
    r: f64,
}

impl AdeSymbol {
    pub fn new(dx: FdOperator, dxx: FdOperator, r: f64) -> Result<Self> {
        if dx.kind() != StencilKind::FirstDerivative {
            return Err(Error::WrongKind(format!("{dx} is not a first-derivative operator")));
        }
        if dxx.kind() != StencilKind::SecondDerivativeCentered {
            return Err(Error::WrongKind(format!("{dxx} is not a centered second-derivative operator")));
        }
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!("R must be non-negative, got {r}")));
        }
        Ok(Self { dx, dxx, r })
    }

    pub fn dx(&self) -> &FdOperator {
        &self.dx
    }

    pub fn dxx(&self) -> &FdOperator {
        &self.dxx
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.dx.clone(), self.dxx.clone(), r)
    }

    /// Trajectory point; `λ_∞` when `R = ∞`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        if self.r.is_infinite() {
            Complex64::new(lambda_inf(&self.dxx, theta), 0.0)
        } else {
            lambda_r(self, theta)
        }
    }
}

/// `λ_0(θ) = -Σ a_k e^{ikθ}`.
///
/// The real part is accumulated as `-Σ a_k (cos kθ - 1)` (the weights sum to
/// zero), which keeps small-θ values free of the `O(1)` cancellation.
pub fn lambda0(dx: &FdOperator, theta: f64) -> Complex64 {
    let (re, im) = dx.weights().fold((0.0, 0.0), |(re, im), (k, a)| {
        let half = 0.5 * k as f64 * theta;
        let s = half.sin();
        let sin_k = (k as f64 * theta).sin();
        (re + 2.0 * a * s * s, im - a * sin_k)
    });
    Complex64::new(re, im)
}

/// `λ_∞(θ) = b_0 + 2 Σ_{k≥1} b_k cos kθ = -4 Σ_{k≥1} b_k sin²(kθ/2)`.
pub fn lambda_inf(dxx: &FdOperator, theta: f64) -> f64 {
    debug_assert!(dxx.kind() == StencilKind::SecondDerivativeCentered);
    let q = dxx.right() as i64;
    let re = (1..=q)
        .map(|k| {
            let s = (0.5 * k as f64 * theta).sin();
            -4.0 * dxx.coeff_f64(k) * s * s
        })
        .sum();
    debug_assert!({
        let direct = dxx.symbol(theta);
        direct.im.abs() < 1e-14 * (1.0 + dxx.coeffs_f64().iter().map(|b| b.abs()).sum::<f64>())
    });
    re
}

/// `λ_R(θ) = λ_0(θ) + R·λ_∞(θ)` for finite `R`; exactly zero at `θ = 0`.
pub fn lambda_r(sym: &AdeSymbol, theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::zero();
    }
    let l0 = lambda0(&sym.dx, theta);
    if sym.r == 0.0 {
        return l0;
    }
    l0 + sym.r * lambda_inf(&sym.dxx, theta)
}

/// Uniform grid `θ_j = -π + 2πj/n`, `j = 0..n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| PI * (2.0 * j as f64 - n as f64) / n as f64)
        .collect()
}

pub fn sample_trajectory(sym: &AdeSymbol, n_samples: usize) -> Result<Vec<TrajectorySample>> {
    if n_samples < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 trajectory samples, got {n_samples}"
        )));
    }
    Ok(theta_grid(n_samples)
        .into_iter()
        .map(|t| TrajectorySample::new(t, sym.eval(t)))
        .collect())
}

/// Positive constant `c` with `Re λ_0(θ) = -c · sin^{2l}(θ/2)` for a stable
/// upwind stencil, computed exactly and rounded once.
pub fn upwind_real_part_constant(dx: &FdOperator) -> Result<f64> {
    let (l, r) = (dx.left(), dx.right());
    if dx.kind() != StencilKind::FirstDerivative || dx.class() != StabilityClass::StableUpwind {
        return Err(Error::UnsupportedClass {
            class: dx.class().to_string(),
            context: "closed-form real part needs l = r+1 or l = r+2".into(),
        });
    }
    let two_pow = BigInt::one() << (2 * l);
    let c = if l == r + 1 {
        BigRational::new(two_pow * factorial(r + 1) * factorial(r), factorial(2 * r + 2))
    } else {
        BigRational::new(
            two_pow * BigInt::from(2 * r + 3) * factorial(r + 2) * factorial(r),
            factorial(2 * r + 4),
        )
    };
    Ok(rational_to_f64(&c))
}

/// Closed form of `Re λ_0(θ)` for `l = r+1` and `l = r+2`.
pub fn re_lambda0_closed_form(dx: &FdOperator, theta: f64) -> Result<f64> {
    let c = upwind_real_part_constant(dx)?;
    Ok(-c * (0.5 * theta).sin().powi(2 * dx.left() as i32))
}

/// `Σ a_k e^{ikθ}` with the real part taken from the closed form when the
/// stencil is in a stable class. Small-θ real parts then keep full relative
/// accuracy (they scale like `θ^{2l}`).
pub fn symbol_precise(op: &FdOperator, theta: f64) -> Complex64 {
    let direct = op.symbol(theta);
    match op.class() {
        StabilityClass::StableUpwind => {
            let re = -re_lambda0_closed_form(op, theta).expect("stable upwind");
            Complex64::new(re, direct.im)
        }
        StabilityClass::StableDownwind => {
            // Re a(θ) = -Re a'(θ) for the mirror a'; Re a'(θ) = -Re λ_0'(θ).
            let m = mirror(op).expect("first derivative");
            let re = re_lambda0_closed_form(&m, theta).expect("mirror is stable upwind");
            Complex64::new(re, direct.im)
        }
        _ => direct,
    }
}

/// Vietoris ratio test on `c_k = (4/k)·(q!)²/((q+k)!(q-k)!)`, exact.
///
/// True iff every `c_k > 0`, the sequence is non-increasing, and
/// `k c_k ≤ (k-1) c_{k-1}` for `k ≥ 2`.
pub fn vietoris_check(q: usize) -> bool {
    if q == 0 {
        return false;
    }
    let qq = factorial(q) * factorial(q);
    let c: Vec<BigRational> = (1..=q)
        .map(|k| {
            BigRational::new(
                BigInt::from(4) * &qq,
                BigInt::from(k) * factorial(q + k) * factorial(q - k),
            )
        })
        .collect();
    let positive = c.iter().all(|ck| *ck > BigRational::zero());
    let chain = c.windows(2).enumerate().all(|(i, w)| {
        let k = BigRational::from_integer(BigInt::from(i + 2));
        let km1 = BigRational::from_integer(BigInt::from(i + 1));
        w[1] <= w[0] && &k * &w[1] <= &km1 * &w[0]
    });
    positive && chain
}

/// Least-squares slope of `log|x_0|` against `log|y_0|` on a log-spaced θ
/// window; close to `2l` for stable upwind stencils.
pub fn asymptotic_exponent(dx: &FdOperator) -> Result<f64> {
    asymptotic_exponent_in(dx, EXPONENT_WINDOW, EXPONENT_POINTS)
}

pub fn asymptotic_exponent_in(dx: &FdOperator, window: (f64, f64), points: usize) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::InvalidArgument(format!("bad fit window {window:?}")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut pts = Vec::with_capacity(points);
    for i in 0..points {
        let theta = (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp();
        let x0 = re_lambda0_closed_form(dx, theta)?;
        if x0 >= 0.0 {
            return Err(Error::Invariant(format!(
                "Re λ0({theta}) = {x0} is not negative for {dx}"
            )));
        }
        let y0 = lambda0(dx, theta).im;
        pts.push((y0.abs().ln(), x0.abs().ln()));
    }
    Ok(least_squares_slope(&pts))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Constants of the bound `x_R ≤ -R·L·y_R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `max y_0²/θ²`.
    pub l1: f64,
    /// `min -x_∞/θ²`.
    pub l2: f64,
    pub l: f64,
}

pub fn bound_constants(dx: &FdOperator, dxx: &FdOperator) -> Result<BoundConstants> {
    bound_constants_on(dx, dxx, DEFAULT_SAMPLES)
}

/// Grid extrema of `y_0²/θ²` and `-x_∞/θ²`; the `θ = 0` entries use the
/// analytic limits (both equal 1).
pub fn bound_constants_on(dx: &FdOperator, dxx: &FdOperator, n: usize) -> Result<BoundConstants> {
    if dx.class() != StabilityClass::StableUpwind {
        return Err(Error::UnsupportedClass {
            class: dx.class().to_string(),
            context: "bound constants need a stable upwind advection operator".into(),
        });
    }
    if dxx.kind() != StencilKind::SecondDerivativeCentered {
        return Err(Error::WrongKind(format!("{dxx} is not a second-derivative operator")));
    }
    let (mut l1, mut l2) = (f64::NEG_INFINITY, f64::INFINITY);
    for theta in theta_grid(n) {
        let (a, b) = if theta == 0.0 {
            (1.0, 1.0)
        } else {
            let t2 = theta * theta;
            (lambda0(dx, theta).im.powi(2) / t2, -lambda_inf(dxx, theta) / t2)
        };
        l1 = l1.max(a);
        l2 = l2.min(b);
    }
    if l2 <= 0.0 {
        return Err(Error::Invariant(format!(
            "min -λ∞/θ² = {l2} ≤ 0 for {dxx}"
        )));
    }
    Ok(BoundConstants { l1, l2, l: l2 / l1 })
}

/// Checks `x ≤ -R·L·y² + 1e-12` on every sampled trajectory point.
pub fn verify_global_bound(
    dx: &FdOperator,
    dxx: &FdOperator,
    consts: &BoundConstants,
    r_values: &[f64],
    n: usize,
) -> Result<bool> {
    for &r in r_values {
        let sym = AdeSymbol::new(dx.clone(), dxx.clone(), r)?;
        let ok = sample_trajectory(&sym, n)?
            .iter()
            .all(|s| s.x <= -r * consts.l * s.y * s.y + 1e-12);
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
