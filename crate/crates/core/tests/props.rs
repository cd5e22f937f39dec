//! Property tests over randomized inputs.

mod common;

use proptest::prelude::*;
use spectralab::asymptotics::{compare_fits, fit_two_term, FitWindow};
use spectralab::gen_eigen::solve_generalized_values;
use spectralab::linalg::{
    cholesky, dot, generalized_sym_eigenvalues, SolverOptions, SymMatrix,
    DEFAULT_PIVOT_FLOOR_REL,
};
use spectralab::models::{build_diagonal_k, AsymptoticLaw, PerturbationMatrix, Wobble};

fn sym_from_seed(n: usize, seed: u64, scale: f64) -> SymMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    SymMatrix::from_fn(n, |_, _| scale * rng.gen_range(-1.0..1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // cholesky o multiply round trip on random positive-definite inputs
    #[test]
    fn cholesky_roundtrip(n in 2usize..24, seed in 0u64..1000) {
        let r = sym_from_seed(n, seed, 1.0 / n as f64);
        let m = r.plus_identity_scaled(1.0).plus_identity_scaled(1.0); // I + (I + R), diag-dominant
        let l = cholesky(&m, DEFAULT_PIVOT_FLOOR_REL).unwrap();
        let mut err_sq = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                let prod = dot(&l.row(i)[..=j], &l.row(j)[..=j]);
                let d = prod - m.get(i, j);
                err_sq += if i == j { d * d } else { 2.0 * d * d };
            }
        }
        prop_assert!(err_sq.sqrt() <= 1e-12 * m.frobenius_norm());
    }

    // eigenvalue count, finiteness, and congruence invariance of the
    // generalized values
    #[test]
    fn generalized_values_well_formed(n in 2usize..16, seed in 0u64..500) {
        let opts = SolverOptions::default();
        let a = sym_from_seed(n, seed, 1.0);
        let g = sym_from_seed(n, seed.wrapping_add(7), 0.05).plus_identity_scaled(1.0);
        let vals = generalized_sym_eigenvalues(&a, &g, &opts).unwrap();
        prop_assert_eq!(vals.len(), n);
        prop_assert!(vals.iter().all(|v| v.is_finite()));
        for w in vals.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        // congruence by a fixed well-conditioned C
        let c: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.1 / (1.0 + i as f64 + j as f64) }).collect())
            .collect();
        let congr = |m: &SymMatrix| SymMatrix::from_fn(n, |i, j| {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += c[p][i] * m.get(p, q) * c[q][j];
                }
            }
            acc
        }).unwrap();
        let moved = generalized_sym_eigenvalues(&congr(&a), &congr(&g), &opts).unwrap();
        for (x, y) in vals.iter().zip(&moved) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
        }
    }

    // the perturbed spectrum of a positive model under valid B stays positive
    // and the monotone comparison with the unperturbed values holds for
    // sign-definite diagonal perturbations
    #[test]
    fn diagonal_perturbation_monotonicity(n in 4usize..20, seed in 0u64..200, up in proptest::bool::ANY) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let law = AsymptoticLaw::exact(1.0, 0.25, 1.5).unwrap();
        let k = build_diagonal_k(&law, n, Wobble::None).unwrap();
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.4)).collect();
        let sign = if up { 1.0 } else { -1.0 };
        let entries = SymMatrix::from_diag(&d.iter().map(|v| sign * v).collect::<Vec<_>>());
        let b = PerturbationMatrix::new(entries, "diag").unwrap();
        let s = solve_generalized_values(&k, &b, &SolverOptions::default()).unwrap();
        prop_assert!(s.values.iter().all(|v| *v > 0.0));
        for (bold, lam) in s.values.iter().zip(k.lambdas()) {
            if up {
                prop_assert!(*bold <= lam * (1.0 + 1e-12));
            } else {
                prop_assert!(*bold >= lam * (1.0 - 1e-12));
            }
        }
    }

    // scale equivariance: values scaled by s move (a, b) by s^(-1/B) and
    // leave the preservation verdict unchanged
    #[test]
    fn fit_scale_equivariance(scale in 0.1f64..10.0, amp in 0.0f64..0.4) {
        let law = AsymptoticLaw::new(2.0, 0.5, 2.0, 1.0).unwrap();
        let m = build_diagonal_k(&law, 400, Wobble::Deterministic { amplitude: amp }).unwrap();
        let w = FitWindow::new(10, 200);
        let base = fit_two_term(m.lambdas(), 2.0, w).unwrap();
        let scaled: Vec<f64> = m.lambdas().iter().map(|v| scale * v).collect();
        let fs = fit_two_term(&scaled, 2.0, w).unwrap();
        let factor = scale.powf(-0.5);
        prop_assert!((fs.a_hat - factor * base.a_hat).abs() <= 1e-8 * base.a_hat.abs());
        prop_assert!((fs.b_hat - factor * base.b_hat).abs() <= 1e-6 * base.b_hat.abs().max(1.0));

        // verdict invariance under common scaling
        let m2 = build_diagonal_k(&law, 400, Wobble::Deterministic { amplitude: amp * 0.5 }).unwrap();
        let pert = fit_two_term(m2.lambdas(), 2.0, w).unwrap();
        let v1 = compare_fits(&base, &pert, 1e-3, 1e-2).unwrap();
        let scaled2: Vec<f64> = m2.lambdas().iter().map(|v| scale * v).collect();
        let fp2 = fit_two_term(&scaled2, 2.0, w).unwrap();
        let v2 = compare_fits(&fs, &fp2, 1e-3 * factor, 1e-2 * factor).unwrap();
        prop_assert_eq!(v1.preserved, v2.preserved);
    }

    // kernel expression parser: printable expressions evaluate finitely and
    // symmetrized products parse
    #[test]
    fn kernel_grammar_numeric_literals(x in -1e3f64..1e3) {
        let src = format!("min(s,t) * {x} + max(t,s)");
        let e = spectralab::models::KernelExpr::parse(&src).unwrap();
        let v = e.eval(0.25, 0.75);
        prop_assert!((v - (0.25 * x + 0.75)).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}
