//! Optimally accurate finite-difference operators on uniform periodic grids.
//!
//! First-derivative operators use an arbitrary stencil `(left, right)`,
//! second-derivative operators a centered stencil of half-width `q`. All
//! coefficients are built in exact big-integer rational arithmetic from the
//! Lagrange-interpolation closed forms; a double-precision copy (one rounding
//! per coefficient) is cached for the numeric modules.
//!
//! Coefficients are stored for offsets `k = -left ..= right`. When applied on
//! a grid of `N` cells the index `j + k` wraps modulo `N`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StencilKind {
    FirstDerivative,
    SecondDerivativeCentered,
}

impl StencilKind {
    /// Power of `h` dividing the stencil sum.
    pub fn derivative_order(self) -> u32 {
        match self {
            StencilKind::FirstDerivative => 1,
            StencilKind::SecondDerivativeCentered => 2,
        }
    }
}

/// Stencil extents and derivative kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StencilSpec {
    pub left: usize,
    pub right: usize,
    pub kind: StencilKind,
}

impl StencilSpec {
    pub fn dx(left: usize, right: usize) -> Result<Self> {
        if left + right == 0 {
            return Err(Error::InvalidStencil(
                "first-derivative stencil needs left + right > 0".into(),
            ));
        }
        Ok(Self {
            left,
            right,
            kind: StencilKind::FirstDerivative,
        })
    }

    pub fn dxx(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidStencil(
                "second-derivative stencil needs q > 0".into(),
            ));
        }
        Ok(Self {
            left: q,
            right: q,
            kind: StencilKind::SecondDerivativeCentered,
        })
    }

    pub fn width(&self) -> usize {
        self.left + self.right + 1
    }

    pub fn stability_class(&self) -> StabilityClass {
        classify(self)
    }
}

impl fmt::Display for StencilSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StencilKind::FirstDerivative => write!(f, "Dx^({},{})", self.left, self.right),
            StencilKind::SecondDerivativeCentered => write!(f, "Dxx^({})", self.left),
        }
    }
}

/// Semi-discrete stability class of a first-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    /// `l = r + 1` or `l = r + 2`: stable for a right-going wave.
    StableUpwind,
    /// `r = l + 1` or `r = l + 2`: stable for a left-going wave.
    StableDownwind,
    Central,
    Other,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, StabilityClass::StableUpwind | StabilityClass::StableDownwind)
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityClass::StableUpwind => "stable-upwind",
            StabilityClass::StableDownwind => "stable-downwind",
            StabilityClass::Central => "central",
            StabilityClass::Other => "other",
        };
        f.write_str(s)
    }
}

/// Pure function of `(left, right)`.
pub fn classify(spec: &StencilSpec) -> StabilityClass {
    let (l, r) = (spec.left, spec.right);
    if l == r {
        StabilityClass::Central
    } else if l == r + 1 || l == r + 2 {
        StabilityClass::StableUpwind
    } else if r == l + 1 || r == l + 2 {
        StabilityClass::StableDownwind
    } else {
        StabilityClass::Other
    }
}

/// A finite-difference operator with exact rational weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FdOperator {
    spec: StencilSpec,
    coeffs: Vec<BigRational>,
    coeffs_f64: Vec<f64>,
    order: usize,
}

impl FdOperator {
    fn from_parts(spec: StencilSpec, coeffs: Vec<BigRational>) -> Self {
        debug_assert_eq!(coeffs.len(), spec.width());
        let coeffs_f64 = coeffs.iter().map(rational_to_f64).collect();
        let order = match spec.kind {
            StencilKind::FirstDerivative => spec.left + spec.right,
            StencilKind::SecondDerivativeCentered => 2 * spec.left,
        };
        Self {
            spec,
            coeffs,
            coeffs_f64,
            order,
        }
    }

    pub fn spec(&self) -> &StencilSpec {
        &self.spec
    }

    pub fn kind(&self) -> StencilKind {
        self.spec.kind
    }

    pub fn left(&self) -> usize {
        self.spec.left
    }

    pub fn right(&self) -> usize {
        self.spec.right
    }

    /// Optimal order of accuracy of the stencil.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn class(&self) -> StabilityClass {
        classify(&self.spec)
    }

    /// Exact coefficients, ordered from `k = -left` to `k = right`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficients rounded once to double precision.
    pub fn coeffs_f64(&self) -> &[f64] {
        &self.coeffs_f64
    }

    /// Offsets `-left ..= right`.
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        -(self.spec.left as i64)..=(self.spec.right as i64)
    }

    /// Exact coefficient at offset `k`, zero outside the stencil.
    pub fn coeff(&self, k: i64) -> BigRational {
        self.index_of(k)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn coeff_f64(&self, k: i64) -> f64 {
        self.index_of(k).map(|i| self.coeffs_f64[i]).unwrap_or(0.0)
    }

    fn index_of(&self, k: i64) -> Option<usize> {
        let i = k + self.spec.left as i64;
        (0..self.coeffs.len() as i64).contains(&i).then_some(i as usize)
    }

    /// `(k, c_k)` pairs in double precision.
    pub fn weights(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.offsets().zip(self.coeffs_f64.iter().copied())
    }

    /// Laurent polynomial `Σ c_k s^k` at `s = e^{iθ}`, summed directly.
    pub fn symbol(&self, theta: f64) -> Complex64 {
        self.weights()
            .map(|(k, c)| {
                let (s, co) = (k as f64 * theta).sin_cos();
                Complex64::new(c * co, c * s)
            })
            .sum()
    }

    /// Exact moment `Σ k^m c_k`.
    pub fn moment(&self, m: u32) -> BigRational {
        self.offsets()
            .zip(self.coeffs.iter())
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k).pow(m)))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Checks `Σ k^m c_k = m! δ_{dm}` exactly for every `m` up to the
    /// stencil's moment range, `d` being the derivative order.
    pub fn moments_exact(&self) -> bool {
        let d = self.spec.kind.derivative_order();
        let top = match self.spec.kind {
            StencilKind::FirstDerivative => self.order as u32,
            StencilKind::SecondDerivativeCentered => self.order as u32 + 1,
        };
        (0..=top).all(|m| {
            let expected = if m == d {
                BigRational::from_integer(factorial(m as usize))
            } else {
                BigRational::zero()
            };
            self.moment(m) == expected
        })
    }
}

impl fmt::Display for FdOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}

/// Optimal first-derivative operator on stencil `(left, right)`.
///
/// `a_k = -(-1)^k/k · l! r! / ((l+k)! (r-k)!)` for `k ≠ 0` and
/// `a_0 = -Σ_{ν≠0} 1/ν`.
pub fn build_dx(left: usize, right: usize) -> Result<FdOperator> {
    let spec = StencilSpec::dx(left, right)?;
    let lf = factorial(left);
    let rf = factorial(right);
    let (l, r) = (left as i64, right as i64);
    let coeffs = (-l..=r)
        .map(|k| {
            if k == 0 {
                -(-l..=r)
                    .filter(|&nu| nu != 0)
                    .map(|nu| BigRational::new(BigInt::one(), BigInt::from(nu)))
                    .fold(BigRational::zero(), |acc, x| acc + x)
            } else {
                let num = &lf * &rf;
                let den = factorial((l + k) as usize) * factorial((r - k) as usize) * BigInt::from(k);
                let sign = if k % 2 == 0 { -1 } else { 1 };
                BigRational::new(num * sign, den)
            }
        })
        .collect();
    Ok(FdOperator::from_parts(spec, coeffs))
}

/// Optimal centered second-derivative operator with half-width `q`.
///
/// `b_k = -2(-1)^k/k² · (q!)² / ((q+k)! (q-k)!)` for `k ≠ 0` and
/// `b_0 = -Σ_{k=1}^q 2/k²`.
pub fn build_dxx(q: usize) -> Result<FdOperator> {
    let spec = StencilSpec::dxx(q)?;
    let qf = factorial(q);
    let qq = &qf * &qf;
    let qi = q as i64;
    let coeffs = (-qi..=qi)
        .map(|k| {
            if k == 0 {
                -(1..=qi)
                    .map(|j| BigRational::new(BigInt::from(2), BigInt::from(j * j)))
                    .fold(BigRational::zero(), |acc, x| acc + x)
            } else {
                let den = factorial((qi + k) as usize) * factorial((qi - k) as usize) * BigInt::from(k * k);
                let sign = if k % 2 == 0 { -2 } else { 2 };
                BigRational::new(&qq * sign, den)
            }
        })
        .collect();
    Ok(FdOperator::from_parts(spec, coeffs))
}

/// Reflects a first-derivative operator: `a'_k = -a_{-k}`, stencil `(r, l)`.
pub fn mirror(op: &FdOperator) -> Result<FdOperator> {
    if op.kind() != StencilKind::FirstDerivative {
        return Err(Error::WrongKind("mirror needs a first-derivative operator".into()));
    }
    let spec = StencilSpec::dx(op.right(), op.left())?;
    let coeffs = op.coeffs.iter().rev().map(|c| -c).collect();
    Ok(FdOperator::from_parts(spec, coeffs))
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Nearest double to an exact rational.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_order_upwind() {
        let op = build_dx(1, 0).unwrap();
        assert_eq!(op.coeffs(), &[q(-1, 1), q(1, 1)]);
        assert_eq!(op.order(), 1);
    }

    #[test]
    fn central_difference() {
        let op = build_dx(1, 1).unwrap();
        assert_eq!(op.coeffs(), &[q(-1, 2), q(0, 1), q(1, 2)]);
        assert_eq!(op.class(), StabilityClass::Central);
    }

    #[test]
    fn three_point_second_difference() {
        let op = build_dxx(1).unwrap();
        assert_eq!(op.coeffs(), &[q(1, 1), q(-2, 1), q(1, 1)]);
        assert_eq!(op.order(), 2);
    }

    #[test]
    fn rejects_degenerate_stencils() {
        assert!(matches!(build_dx(0, 0), Err(Error::InvalidStencil(_))));
        assert!(matches!(build_dxx(0), Err(Error::InvalidStencil(_))));
    }

    #[test]
    fn center_weight_q20() {
        let op = build_dxx(20).unwrap();
        let expected = -(1..=20i64)
            .map(|k| q(2, k * k))
            .fold(BigRational::zero(), |a, b| a + b);
        assert_eq!(op.coeff(0), expected);
    }

    #[test]
    fn classification() {
        let c = |l, r| classify(&StencilSpec::dx(l, r).unwrap());
        assert_eq!(c(3, 1), StabilityClass::StableUpwind);
        assert_eq!(c(2, 0), StabilityClass::StableUpwind);
        assert_eq!(c(1, 1), StabilityClass::Central);
        assert_eq!(c(1, 2), StabilityClass::StableDownwind);
        assert_eq!(c(1, 3), StabilityClass::StableDownwind);
        assert_eq!(c(4, 1), StabilityClass::Other);
        assert_eq!(c(0, 4), StabilityClass::Other);
    }

    #[test]
    fn mirror_examples() {
        let fwd = mirror(&build_dx(1, 0).unwrap()).unwrap();
        assert_eq!((fwd.left(), fwd.right()), (0, 1));
        assert_eq!(fwd.coeffs(), &[q(-1, 1), q(1, 1)]);

        let m = mirror(&build_dx(3, 1).unwrap()).unwrap();
        assert_eq!((m.left(), m.right()), (1, 3));
        assert_eq!(m.class(), StabilityClass::StableDownwind);

        let op = build_dx(2, 1).unwrap();
        assert_eq!(mirror(&mirror(&op).unwrap()).unwrap(), op);
        assert!(mirror(&build_dxx(2).unwrap()).is_err());
    }

    #[test]
    fn center_weight_is_negative_harmonic_sum() {
        for (l, r) in [(1, 0), (2, 1), (5, 3), (21, 20)] {
            let op = build_dx(l, r).unwrap();
            let expected = -(-(l as i64)..=r as i64)
                .filter(|&v| v != 0)
                .map(|v| q(1, v))
                .fold(BigRational::zero(), |a, b| a + b);
            assert_eq!(op.coeff(0), expected);
        }
    }

    #[test]
    fn mirror_keeps_moments() {
        for (l, r) in [(1, 0), (3, 1), (6, 5), (12, 10)] {
            let m = mirror(&build_dx(l, r).unwrap()).unwrap();
            assert!(m.moments_exact(), "{m}");
        }
    }

    #[test]
    fn rational_rounding() {
        assert_eq!(rational_to_f64(&q(1, 3)), 1.0 / 3.0);
        assert_eq!(rational_to_f64(&q(-5, 2)), -2.5);
        let big = BigRational::new(factorial(40), factorial(38));
        assert_eq!(rational_to_f64(&big), 1560.0);
        let tiny = BigRational::new(BigInt::one(), factorial(30));
        let expected = 1.0 / factorial(30).to_f64().unwrap();
        assert!(((rational_to_f64(&tiny) - expected) / expected).abs() < 1e-15);
    }

    #[test]
    fn out_of_stencil_coefficients_are_zero() {
        let op = build_dx(2, 1).unwrap();
        assert!(op.coeff(-3).is_zero());
        assert!(op.coeff(2).is_zero());
        assert_eq!(op.coeff_f64(5), 0.0);
    }
}
