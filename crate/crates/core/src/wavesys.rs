//! Partially dissipative wave system
//!
//! ```text
//! v_t + ½D⁻(v+p) − ½D⁺(v−p) − ν D_xx v = 0
//! p_t + ½D⁻(v+p) + ½D⁺(v−p)            = 0
//! ```
//!
//! Each Fourier mode evolves under the 2×2 block `M_k / h` (see
//! [`wave_block`]), so the 2N eigenvalues come in pairs per mode.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fulldisc::mode_angle;
use crate::spectrum::{bound_constants, lambda_inf, symbol_precise, theta_grid};
use crate::stencil::{build_dx, build_dxx, mirror, FdOperator, StabilityClass, StencilKind};

/// Relative discriminant size at which a 2×2 block is flagged defective.
pub const JORDAN_TOL: f64 = 1e-12;

/// `|Im λ| ≤ REAL_TOL·(1+|λ|)` counts as real.
pub const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct WaveDiscretization {
    dx_minus: FdOperator,
    dx_plus: FdOperator,
    dxx: FdOperator,
    symmetric: bool,
}

impl WaveDiscretization {
    /// `dx_minus` must be stable upwind, `dx_plus` stable downwind.
    pub fn new(dx_minus: FdOperator, dx_plus: FdOperator, dxx: FdOperator) -> Result<Self> {
        if dx_minus.class() != StabilityClass::StableUpwind {
            return Err(Error::UnsupportedClass {
                class: dx_minus.class().to_string(),
                context: format!("D⁻ = {dx_minus} must be stable upwind"),
            });
        }
        if dx_plus.class() != StabilityClass::StableDownwind {
            return Err(Error::UnsupportedClass {
                class: dx_plus.class().to_string(),
                context: format!("D⁺ = {dx_plus} must be stable downwind"),
            });
        }
        if dxx.kind() != StencilKind::SecondDerivativeCentered {
            return Err(Error::WrongKind(format!("{dxx} is not a second-derivative operator")));
        }
        let reach = dx_minus.left().max(dx_plus.right()) as i64;
        let symmetric = (-reach..=reach)
            .all(|k| (dx_minus.coeff(k) + dx_plus.coeff(-k)).is_zero());
        Ok(Self {
            dx_minus,
            dx_plus,
            dxx,
            symmetric,
        })
    }

    /// `(D_x^{l,r}, mirror, D_xx^{q})`.
    pub fn symmetric_pair(left: usize, right: usize, q: usize) -> Result<Self> {
        let dm = build_dx(left, right)?;
        let dp = mirror(&dm)?;
        Self::new(dm, dp, build_dxx(q)?)
    }

    pub fn dx_minus(&self) -> &FdOperator {
        &self.dx_minus
    }

    pub fn dx_plus(&self) -> &FdOperator {
        &self.dx_plus
    }

    pub fn dxx(&self) -> &FdOperator {
        &self.dxx
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn require_symmetric(&self, context: &str) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::UnsupportedClass {
                class: "asymmetric pair".into(),
                context: context.into(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSymbols {
    pub a_minus: Complex64,
    pub a_plus: Complex64,
    pub b: f64,
}

/// `a^±(e^{iθ})` and `b(e^{iθ})`. Real parts of `a^±` come from the closed
/// forms, so they keep relative accuracy near `θ = 0`.
pub fn wave_symbols(w: &WaveDiscretization, theta: f64) -> WaveSymbols {
    let b = lambda_inf(&w.dxx, theta);
    debug_assert!(w.dxx.symbol(theta).im.abs() < 1e-14 * (1.0 + b.abs()));
    WaveSymbols {
        a_minus: symbol_precise(&w.dx_minus, theta),
        a_plus: symbol_precise(&w.dx_plus, theta),
        b,
    }
}

/// The 2×2 block `M` (row-major) whose eigenvalues are `h` times the
/// semi-discrete eigenvalues of mode `θ`.
pub fn wave_block(w: &WaveDiscretization, r: f64, theta: f64) -> [[Complex64; 2]; 2] {
    let s = wave_symbols(w, theta);
    let diff = s.a_minus - s.a_plus;
    let off = -0.5 * (s.a_minus + s.a_plus);
    [
        [r * s.b - 0.5 * diff, off],
        [off, -0.5 * diff],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveEigenPair {
    pub theta: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub jordan: bool,
    /// `|discriminant| / scale`; small values mean a nearly defective block.
    pub discriminant_ratio: f64,
}

/// Both eigenvalues `½(Rb − (a⁻−a⁺) ± √(R²b² + (a⁻+a⁺)²))` of mode `θ`.
///
/// A defective block reports the double eigenvalue for both entries.
pub fn wave_eigs(w: &WaveDiscretization, r: f64, theta: f64) -> WaveEigenPair {
    let s = wave_symbols(w, theta);
    let rb = r * s.b;
    let sum = s.a_minus + s.a_plus;
    let trace = rb - (s.a_minus - s.a_plus);
    let disc = rb * rb + sum * sum;
    let scale = 1f64.max(rb * rb).max(sum.norm_sqr());
    let ratio = disc.norm() / scale;
    let scalar_block = sum.norm() <= JORDAN_TOL && rb.abs() <= JORDAN_TOL;
    let jordan = ratio <= JORDAN_TOL && !scalar_block;
    if jordan || scalar_block {
        let l = 0.5 * trace;
        return WaveEigenPair {
            theta,
            lambda1: l,
            lambda2: l,
            jordan,
            discriminant_ratio: ratio,
        };
    }
    let root = disc.sqrt();
    WaveEigenPair {
        theta,
        lambda1: 0.5 * (trace + root),
        lambda2: 0.5 * (trace - root),
        jordan,
        discriminant_ratio: ratio,
    }
}

/// The `2N` eigenvalues (times `h`) at `θ_k = 2πk/N`, `k = 1..=N`.
pub fn wave_spectrum(w: &WaveDiscretization, r: f64, n: usize) -> Vec<WaveEigenPair> {
    (1..=n).map(|k| wave_eigs(w, r, mode_angle(k, n))).collect()
}

/// Sub-checks of the semistability argument at the sampled angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemistableReport {
    /// Both eigenvalues have negative real part at every `θ ≠ 0`.
    pub eigenvalues_negative: bool,
    /// `θ = 0` gives the zero pair with a diagonal block.
    pub zero_mode_ok: bool,
    pub d1_negative: bool,
    pub d2_positive: bool,
    pub d1_sq_plus_2d2_minus_c1_positive: bool,
    pub d2_sq_minus_c2_positive: bool,
}

impl SemistableReport {
    pub fn all(&self) -> bool {
        self.eigenvalues_negative
            && self.zero_mode_ok
            && self.d1_negative
            && self.d2_positive
            && self.d1_sq_plus_2d2_minus_c1_positive
            && self.d2_sq_minus_c2_positive
    }
}

/// Coefficients of the polynomial-in-`R` argument at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RPolynomialCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    /// `D₂² − C₂` in factored form `(−8E₁F₁)(2|a⁻+a⁺|² − 8E₁F₁)`.
    pub d2_sq_minus_c2: f64,
}

pub fn r_polynomial_coeffs(a_minus: Complex64, a_plus: Complex64) -> RPolynomialCoeffs {
    let sum = a_minus + a_plus;
    let diff_re = (a_minus - a_plus).re;
    let sum_sq_re = (sum * sum).re;
    let d2 = 2.0 * diff_re * diff_re - sum_sq_re;
    let cross = -8.0 * a_minus.re * a_plus.re;
    RPolynomialCoeffs {
        c1: 2.0 * sum_sq_re,
        c2: sum.norm_sqr().powi(2),
        d1: -4.0 * diff_re,
        d2,
        d2_sq_minus_c2: cross * (2.0 * sum.norm_sqr() + cross),
    }
}

pub fn wave_semistable_report(w: &WaveDiscretization, r: f64, n_samples: usize) -> Result<SemistableReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("R must be positive, got {r}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let mut rep = SemistableReport {
        eigenvalues_negative: true,
        zero_mode_ok: true,
        d1_negative: true,
        d2_positive: true,
        d1_sq_plus_2d2_minus_c1_positive: true,
        d2_sq_minus_c2_positive: true,
    };
    for theta in theta_grid(n_samples) {
        let pair = wave_eigs(w, r, theta);
        if theta == 0.0 {
            rep.zero_mode_ok &= pair.lambda1 == Complex64::zero()
                && pair.lambda2 == Complex64::zero()
                && !pair.jordan;
            continue;
        }
        rep.eigenvalues_negative &= pair.lambda1.re < 0.0 && pair.lambda2.re < 0.0;
        let s = wave_symbols(w, theta);
        let c = r_polynomial_coeffs(s.a_minus, s.a_plus);
        rep.d1_negative &= c.d1 < 0.0;
        rep.d2_positive &= c.d2 > 0.0;
        rep.d1_sq_plus_2d2_minus_c1_positive &= c.d1 * c.d1 + 2.0 * c.d2 - c.c1 > 0.0;
        rep.d2_sq_minus_c2_positive &= c.d2_sq_minus_c2 > 0.0;
    }
    Ok(rep)
}

/// True iff every sub-check of [`wave_semistable_report`] passes.
pub fn wave_semistable_check(w: &WaveDiscretization, r: f64, n_samples: usize) -> Result<bool> {
    Ok(wave_semistable_report(w, r, n_samples)?.all())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumClass {
    AllReal,
    HasComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub nu: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub class: SpectrumClass,
    pub max_abs_im: f64,
}

fn is_real(l: Complex64) -> bool {
    l.im.abs() <= REAL_TOL * (1.0 + l.norm())
}

/// Real/complex classification of the grid spectrum with `R = νN`.
pub fn classify_spectrum(w: &WaveDiscretization, nu: f64, n: usize) -> Result<Classification> {
    w.require_symmetric("spectrum classification assumes a symmetric pair")?;
    if !(nu > 0.0 && nu.is_finite()) || n == 0 {
        return Err(Error::InvalidArgument(format!("need ν > 0 and N ≥ 1, got ν={nu}, N={n}")));
    }
    let r = nu * n as f64;
    let mut all_real = true;
    let mut max_abs_im = 0f64;
    for pair in wave_spectrum(w, r, n) {
        for l in [pair.lambda1, pair.lambda2] {
            all_real &= is_real(l);
            max_abs_im = max_abs_im.max(l.im.abs());
        }
    }
    Ok(Classification {
        nu,
        n,
        class: if all_real {
            SpectrumClass::AllReal
        } else {
            SpectrumClass::HasComplex
        },
        max_abs_im,
    })
}

/// Empirical smallest `ν` in `[lo, hi]` with an all-real spectrum at fixed
/// `N`, by bisection to relative width `rtol`. An estimate: it assumes the
/// classification switches once on the interval.
pub fn empirical_nu1(w: &WaveDiscretization, n: usize, lo: f64, hi: f64, rtol: f64) -> Result<f64> {
    let real = |nu: f64| -> Result<bool> { Ok(classify_spectrum(w, nu, n)?.class == SpectrumClass::AllReal) };
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    if !real(hi)? {
        return Err(Error::InvalidArgument(format!("spectrum not real at ν = {hi}")));
    }
    if real(lo)? {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > rtol * b {
        let m = 0.5 * (a + b);
        if real(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// `L = L₂/(2L₁)` from the bound constants of `(D⁻, D_xx)`, and whether
/// every sampled eigenvalue satisfies `x ≤ −R·L·y² + 1e-12`.
pub fn wave_bound_check(w: &WaveDiscretization, r: f64, n_samples: usize) -> Result<(f64, bool)> {
    w.require_symmetric("the trajectory bound assumes a symmetric pair")?;
    let consts = bound_constants(&w.dx_minus, &w.dxx)?;
    let l = consts.l2 / (2.0 * consts.l1);
    let ok = theta_grid(n_samples).into_iter().all(|theta| {
        let p = wave_eigs(w, r, theta);
        [p.lambda1, p.lambda2]
            .iter()
            .all(|z| z.re <= -r * l * z.im * z.im + 1e-12)
    });
    Ok((l, ok))
}

/// `max |Im λ|` over the sampled trajectory.
pub fn trajectory_height(w: &WaveDiscretization, r: f64, n_samples: usize) -> f64 {
    theta_grid(n_samples)
        .into_iter()
        .map(|theta| {
            let p = wave_eigs(w, r, theta);
            p.lambda1.im.abs().max(p.lambda2.im.abs())
        })
        .fold(0.0, f64::max)
}
