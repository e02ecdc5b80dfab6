mod common;

use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use fdmlab::fulldisc::{semidiscrete_eigs, AdeOperators, GridConfig};
use fdmlab::wavesys::{wave_spectrum, WaveDiscretization};
use fdmlab::{build_dx, build_dxx, mirror};

#[test]
fn dx_weights_match_vandermonde_solve() {
    for l in 0..=8usize {
        for r in 0..=8usize {
            if l + r == 0 {
                continue;
            }
            let op = build_dx(l, r).unwrap();
            let offsets: Vec<i64> = (-(l as i64)..=r as i64).collect();
            assert_eq!(op.coeffs(), vandermonde_weights(&offsets, 1).as_slice(), "({l},{r})");
        }
    }
}

#[test]
fn dxx_weights_match_vandermonde_solve() {
    for q in 1..=10usize {
        let op = build_dxx(q).unwrap();
        let offsets: Vec<i64> = (-(q as i64)..=q as i64).collect();
        assert_eq!(op.coeffs(), vandermonde_weights(&offsets, 2).as_slice(), "q={q}");
    }
}

#[test]
fn a0_is_negative_harmonic_sum() {
    for (l, r) in [(1, 0), (3, 1), (7, 6), (12, 11), (0, 4)] {
        let op = build_dx(l, r).unwrap();
        let expect = (-(l as i64)..=r as i64)
            .filter(|&v| v != 0)
            .fold(BigRational::zero(), |acc, v| acc - BigRational::new(BigInt::from(1), BigInt::from(v)));
        assert_eq!(op.coeff(0), expect);
    }
}

#[test]
fn wide_stencils_are_exact() {
    for (l, r) in [(21, 21), (22, 20), (30, 12), (42, 0)] {
        assert!(build_dx(l, r).unwrap().moments_exact(), "({l},{r})");
    }
    for q in [15, 21] {
        assert!(build_dxx(q).unwrap().moments_exact());
    }
}

#[test]
fn ade_spectrum_matches_dense_circulant() {
    let cases = [
        (Some((1, 0)), Some(1), 0.0, 8),
        (Some((3, 1)), Some(2), 0.7, 16),
        (Some((2, 2)), Some(3), 2.5, 24),
        (Some((5, 4)), None, 0.0, 32),
        (None, Some(4), 1.0, 20),
    ];
    for (dx, q, r, n) in cases {
        let dxo = dx.map(|(l, rr)| build_dx(l, rr).unwrap());
        let dxxo = q.map(|q| build_dxx(q).unwrap());
        let ops = AdeOperators::new(dxo.clone(), dxxo.clone()).unwrap();
        // ν = R h, δt arbitrary
        let grid = GridConfig::new(n, r / n as f64, 0.01).unwrap();
        let closed = semidiscrete_eigs(&ops, &grid).unwrap();
        let dense = dense_eigenvalues(dense_ade(dxo.as_ref(), dxxo.as_ref(), grid.r(), n));
        let d = multiset_distance(&closed, &dense);
        assert!(d < 1e-10, "{dx:?} {q:?} R={r} N={n}: {d:e}");
    }
}

#[test]
fn wave_spectrum_matches_dense_block_matrix() {
    let cases = [
        (WaveDiscretization::symmetric_pair(1, 0, 1).unwrap(), 0.5, 8),
        (WaveDiscretization::symmetric_pair(3, 1, 2).unwrap(), 2.0, 16),
        (
            WaveDiscretization::new(build_dx(3, 1).unwrap(), build_dx(1, 2).unwrap(), build_dxx(2).unwrap()).unwrap(),
            0.1,
            16,
        ),
        (
            WaveDiscretization::new(build_dx(2, 0).unwrap(), mirror(&build_dx(3, 2).unwrap()).unwrap(), build_dxx(3).unwrap()).unwrap(),
            1.0,
            12,
        ),
    ];
    for (w, r, n) in cases {
        let pairs = wave_spectrum(&w, r, n);
        let closed: Vec<_> = pairs.iter().flat_map(|p| [p.lambda1, p.lambda2]).collect();
        let dense = dense_eigenvalues(dense_wave(&w, r, n));
        let d = multiset_distance(&closed, &dense);
        assert!(d < 1e-10, "R={r} N={n}: {d:e}");
    }
}
