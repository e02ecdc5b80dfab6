//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use fdmlab::{FdOperator, WaveDiscretization};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(n: u32) -> BigRational {
    (1..=n as i64).fold(BigRational::one(), |acc, k| acc * rat(k))
}

/// Solves `Σ_k k^m c_k = p! δ_{mp}` for `m = 0..offsets.len()` by Gaussian
/// elimination over the rationals.
pub fn vandermonde_weights(offsets: &[i64], p: u32) -> Vec<BigRational> {
    let n = offsets.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|row| {
            let mut r: Vec<BigRational> = offsets.iter().map(|&k| pow(k, row as u32)).collect();
            r.push(if row as u32 == p { factorial(p) } else { BigRational::zero() });
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("nonsingular");
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n].clone()).collect()
}

fn pow(k: i64, e: u32) -> BigRational {
    rat(k).pow(e as i32)
}

/// Circulant matrix `(C u)_j = Σ_k c_k u_{(j+k) mod n}`.
pub fn circulant(op: &FdOperator, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for (k, c) in op.weights() {
            let col = (j as i64 + k).rem_euclid(n as i64) as usize;
            m[(j, col)] += c;
        }
    }
    m
}

/// `h` times the semi-discrete advection-diffusion matrix, `-A + R·B`.
pub fn dense_ade(dx: Option<&FdOperator>, dxx: Option<&FdOperator>, r: f64, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    if let Some(d) = dx {
        m -= circulant(d, n);
    }
    if let Some(d) = dxx {
        m += circulant(d, n) * r;
    }
    m
}

/// `h` times the 2N×2N semi-discrete wave matrix acting on `[v; p]`.
pub fn dense_wave(w: &WaveDiscretization, r: f64, n: usize) -> DMatrix<f64> {
    let am = circulant(w.dx_minus(), n);
    let ap = circulant(w.dx_plus(), n);
    let b = circulant(w.dxx(), n);
    let vv = &ap * 0.5 - &am * 0.5 + &b * r;
    let vp = (&am + &ap) * -0.5;
    let pp = &ap * 0.5 - &am * 0.5;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&vv);
    m.view_mut((0, n), (n, n)).copy_from(&vp);
    m.view_mut((n, 0), (n, n)).copy_from(&vp);
    m.view_mut((n, n), (n, n)).copy_from(&pp);
    m
}

pub fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0f64;
    for x in a {
        let (i, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[i] = true;
        worst = worst.max(d);
    }
    worst
}
