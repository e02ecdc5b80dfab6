use num_complex::Complex64;
use proptest::prelude::*;

use fdmlab::fulldisc::{mode_angle, spectral_radius, AdeOperators, GridConfig};
use fdmlab::molsim::{apply_operator, step_ade, step_wave, SimConfig, SimOperators, SimState};
use fdmlab::spectrum::{lambda0, lambda_inf, re_lambda0_closed_form, AdeSymbol};
use fdmlab::timeint::{builtin, builtin_tableaux, in_stability_region};
use fdmlab::wavesys::{wave_block, wave_eigs, WaveDiscretization};
use fdmlab::{build_dx, build_dxx, mirror, StabilityClass};

const TABLEAUX: [&str; 8] = ["fe", "rk2", "rk2-ssp", "rk3", "rk3-ssp", "lsrk3", "rk4", "rk4-38"];

fn stable_dx() -> impl Strategy<Value = (usize, usize)> {
    (0usize..=8, 1usize..=2).prop_map(|(r, d)| (r + d, r))
}

fn any_dx() -> impl Strategy<Value = (usize, usize)> {
    (0usize..=6, 0usize..=6).prop_filter("non-empty", |(l, r)| l + r > 0)
}

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_conjugate_symmetry((l, r) in any_dx(), q in 1usize..=6, rr in 0.0f64..20.0, t in angle()) {
        let sym = AdeSymbol::new(build_dx(l, r).unwrap(), build_dxx(q).unwrap(), rr).unwrap();
        let a = sym.eval(t);
        let b = sym.eval(-t);
        prop_assert!((a - b.conj()).norm() <= 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn symbol_additivity((l, r) in any_dx(), q in 1usize..=6, rr in 0.0f64..20.0, t in angle()) {
        let dx = build_dx(l, r).unwrap();
        let dxx = build_dxx(q).unwrap();
        let sym = AdeSymbol::new(dx.clone(), dxx.clone(), rr).unwrap();
        let direct = lambda0(&dx, t) + rr * lambda_inf(&dxx, t);
        prop_assert!((sym.eval(t) - direct).norm() <= 1e-14 * (1.0 + direct.norm()));
    }

    #[test]
    fn stable_upwind_real_part_negative((l, r) in stable_dx(), t in angle()) {
        prop_assume!(t.abs() > 1e-2);
        let op = build_dx(l, r).unwrap();
        prop_assert_eq!(op.class(), StabilityClass::StableUpwind);
        prop_assert!(re_lambda0_closed_form(&op, t).unwrap() < 0.0);
        prop_assert!(lambda0(&op, t).re < 1e-15);
    }

    #[test]
    fn central_real_part_vanishes(l in 1usize..=10, t in angle()) {
        prop_assert!(lambda0(&build_dx(l, l).unwrap(), t).re.abs() < 1e-14);
    }

    #[test]
    fn diffusion_symbol_negative(q in 1usize..=21, t in angle()) {
        prop_assume!(t.abs() > 1e-3);
        prop_assert!(lambda_inf(&build_dxx(q).unwrap(), t) < 0.0);
    }

    #[test]
    fn mirror_is_an_involution((l, r) in any_dx()) {
        let op = build_dx(l, r).unwrap();
        let m = mirror(&op).unwrap();
        prop_assert_eq!((m.left(), m.right()), (r, l));
        prop_assert!(m.moments_exact());
        prop_assert_eq!(mirror(&m).unwrap(), op);
    }

    #[test]
    fn region_is_conjugate_symmetric(i in 0usize..8, x in -4.0f64..1.0, y in -4.0f64..4.0) {
        let p = builtin(TABLEAUX[i]).unwrap().stability_polynomial();
        let z = Complex64::new(x, y);
        prop_assert_eq!(in_stability_region(&p, z), in_stability_region(&p, z.conj()));
    }

    #[test]
    fn operator_is_linear((l, r) in any_dx(), n in 16usize..64, a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        let op = build_dx(l, r).unwrap();
        let u: Vec<f64> = (0..n).map(|j| ((j as u64 * 31 + seed) as f64).sin()).collect();
        let v: Vec<f64> = (0..n).map(|j| ((j as u64 * 17 + 3 * seed) as f64).cos()).collect();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let du = apply_operator(&op, &u, n).unwrap();
        let dv = apply_operator(&op, &v, n).unwrap();
        let dm = apply_operator(&op, &mix, n).unwrap();
        let scale = du.iter().chain(&dv).fold(1.0f64, |m, x| m.max(x.abs()));
        for j in 0..n {
            prop_assert!((dm[j] - a * du[j] - b * dv[j]).abs() <= 1e-12 * scale * (a.abs() + b.abs() + 1.0));
        }
    }

    #[test]
    fn step_is_linear(i in 0usize..8, (l, r) in stable_dx(), q in 1usize..=3, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let n = 48;
        let ops = AdeOperators::pair(build_dx(l, r).unwrap(), build_dxx(q).unwrap()).unwrap();
        let cfg = SimConfig::new(GridConfig::from_mu(n, 0.01, 0.2).unwrap(), builtin(TABLEAUX[i]).unwrap(), SimOperators::Ade(ops), 1.0).unwrap();
        let u: Vec<f64> = (0..n).map(|j| (0.3 * j as f64).sin()).collect();
        let v: Vec<f64> = (0..n).map(|j| (0.11 * (j * j) as f64).cos()).collect();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let su = step_ade(&SimState::new(u), &cfg).unwrap().fields;
        let sv = step_ade(&SimState::new(v), &cfg).unwrap().fields;
        let sm = step_ade(&SimState::new(mix), &cfg).unwrap().fields;
        for j in 0..n {
            let e = a * su[j] + b * sv[j];
            prop_assert!((sm[j] - e).abs() <= 1e-12 * (1.0 + e.abs()) * (a.abs() + b.abs() + 1.0));
        }
    }

    #[test]
    fn one_step_on_a_mode_applies_the_amplification_factor(
        i in 0usize..8, (l, r) in stable_dx(), q in 1usize..=4,
        n in 8usize..=256, k in 0usize..256, mu in 0.05f64..1.0, nu in 0.0f64..0.05,
    ) {
        prop_assume!(n > l + r && n > 2 * q);
        let k = k % n;
        let tab = builtin(TABLEAUX[i]).unwrap();
        let p = tab.stability_polynomial();
        let ops = AdeOperators::pair(build_dx(l, r).unwrap(), build_dxx(q).unwrap()).unwrap();
        let grid = GridConfig::from_mu(n, nu, mu).unwrap();
        let cfg = SimConfig::new(grid, tab, SimOperators::Ade(ops.clone()), 1.0).unwrap();
        let theta = mode_angle(k, n);
        let z = ops.scaled_lambda(theta, &grid);
        let g = p.eval(z);
        // roundoff scale of evaluating p(z)
        let cond = p.coeffs.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.abs());
        // roundoff in other modes is amplified by the full update
        let rho = spectral_radius(&ops, &grid, &p).unwrap();
        let tol = 1e-11 * cond.max(rho).max(1.0);
        // phases reduced mod 2π exactly so wraparound sees the same values
        let phase = |j: usize| 2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
        let u: Vec<f64> = (0..n).map(|j| phase(j).cos()).collect();
        let next = step_ade(&SimState::new(u), &cfg).unwrap().fields;
        for (j, x) in next.iter().enumerate() {
            let phase = phase(j);
            let expect = g.re * phase.cos() - g.im * phase.sin();
            prop_assert!((x - expect).abs() < tol, "j={} {} vs {}", j, x, expect);
        }
    }

    #[test]
    fn wave_pair_trace_and_determinant((l, r) in stable_dx(), q in 1usize..=6, rr in 0.01f64..10.0, t in angle()) {
        let w = WaveDiscretization::symmetric_pair(l, r, q).unwrap();
        let p = wave_eigs(&w, rr, t);
        let m = wave_block(&w, rr, t);
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = 1.0 + tr.norm() + det.norm();
        prop_assert!((p.lambda1 + p.lambda2 - tr).norm() <= 1e-12 * scale);
        prop_assert!((p.lambda1 * p.lambda2 - det).norm() <= 1e-12 * scale);
        if p.jordan {
            prop_assert!((p.lambda1 - p.lambda2).norm() <= 1e-10 && p.lambda1.re < 0.0);
        }
    }
}

/// Wave step on a Fourier mode equals `p(μM)` applied to the mode amplitudes.
#[test]
fn wave_step_matches_matrix_polynomial() {
    let n = 32;
    let w = WaveDiscretization::new(build_dx(3, 1).unwrap(), build_dx(1, 2).unwrap(), build_dxx(2).unwrap()).unwrap();
    for name in ["fe", "rk2", "rk4", "lsrk3"] {
        let tab = builtin(name).unwrap();
        let p = tab.stability_polynomial();
        let grid = GridConfig::from_mu(n, 0.05, 0.3).unwrap();
        let cfg = SimConfig::new(grid, tab, SimOperators::Wave(w.clone()), 1.0).unwrap();
        for k in [1, 5, 16, 31] {
            let theta = mode_angle(k, n);
            let m = wave_block(&w, grid.r(), theta);
            // p(μM) by Horner on 2×2 complex matrices
            let mu = grid.mu();
            let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
            for c in p.coeffs.iter().rev() {
                let mut next = [[Complex64::new(0.0, 0.0); 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for l in 0..2 {
                            next[i][j] += acc[i][l] * m[l][j] * mu;
                        }
                    }
                    next[i][i] += c;
                }
                acc = next;
            }
            for (col, (v0, p0)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
                let v: Vec<f64> = (0..n).map(|j| v0 * (theta * j as f64).cos()).collect();
                let pp: Vec<f64> = (0..n).map(|j| p0 * (theta * j as f64).cos()).collect();
                let s = step_wave(&SimState::wave(&v, &pp), &cfg).unwrap().fields;
                for j in 0..n {
                    let ph = Complex64::from_polar(1.0, theta * j as f64);
                    let ev = (acc[0][col] * ph).re;
                    let ep = (acc[1][col] * ph).re;
                    assert!((s[j] - ev).abs() < 1e-12, "{name} k={k} v");
                    assert!((s[n + j] - ep).abs() < 1e-12, "{name} k={k} p");
                }
            }
        }
    }
}

#[test]
fn declared_orders_match_taylor_coefficients() {
    for (name, tab) in builtin_tableaux() {
        let p = tab.stability_polynomial();
        assert!(p.degree() <= tab.stages, "{name}");
        let order = tab.order.expect("builtins declare an order");
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((p.coeffs[k] - 1.0 / fact).abs() < 1e-14, "{name} k={k}");
        }
    }
}

/// Energy of the symmetric wave system is non-increasing under a small
/// RK4 step (all semi-discrete eigenvalues have Re ≤ 0 and |p| ≤ 1).
#[test]
fn wave_energy_does_not_grow() {
    let n = 64;
    let w = WaveDiscretization::symmetric_pair(3, 1, 2).unwrap();
    let cfg = SimConfig::new(GridConfig::from_mu(n, 0.0, 0.2).unwrap(), builtin("rk4").unwrap(), SimOperators::Wave(w), 1.0).unwrap();
    let v: Vec<f64> = (0..n).map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).sin()).collect();
    let mut s = SimState::wave(&v, &vec![0.0; n]);
    let energy = |s: &SimState| s.fields.iter().map(|x| x * x).sum::<f64>();
    let mut e = energy(&s);
    for _ in 0..1000 {
        s = step_wave(&s, &cfg).unwrap();
        let e2 = energy(&s);
        assert!(e2 <= e * (1.0 + 1e-12));
        e = e2;
    }
}
