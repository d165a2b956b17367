//! Property tests for the spectral kernel and the discrimination stack.

use num_complex::Complex;
use proptest::prelude::*;

use qmed::certify::{
    certify_optimal, complementarity, extract_helstrom_family, lagrange_operator,
    ratio_upper_bound_check, success_probability, verify_helstrom_family, Povm,
};
use qmed::closed_form::{solve_irreducible, Applicability};
use qmed::ensemble::{
    bloch_latitude_ensemble, commutant_dimension, similarity_ensemble, DensityMatrix, Ensemble,
    UnitarySet,
};
use qmed::hermitian::{eigh, pinv_psd, sqrt_psd, trace_norm, HermitianMatrix};
use qmed::matrix::ComplexMatrix;
use qmed::oracle::{fixed_point_solve, helstrom_two_state, random_povm};

type C64 = Complex<f64>;
type Mat = ComplexMatrix<f64>;
type Herm = HermitianMatrix<f64>;

fn complex_entries(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im)),
        dim * dim,
    )
}

fn hermitian(dim: usize) -> impl Strategy<Value = Herm> {
    complex_entries(dim).prop_map(move |entries| {
        let g = Mat::from_entries(dim, dim, entries);
        HermitianMatrix::symmetrize(&g + &g.adjoint())
    })
}

fn psd(dim: usize) -> impl Strategy<Value = Herm> {
    complex_entries(dim).prop_map(move |entries| {
        let g = Mat::from_entries(dim, dim, entries);
        HermitianMatrix::symmetrize(g.adjoint().mul_mat(&g))
    })
}

/// exp(i G) for Hermitian G, built by spectral calculus.
fn unitary_from_generator(g: &Herm) -> Mat {
    let spec = eigh(g).expect("eigh of generator");
    let d = g.dim();
    let mut u = Mat::zeros(d, d);
    for k in 0..d {
        let phase = Complex::from_polar(1.0, spec.values[k]);
        for i in 0..d {
            for j in 0..d {
                let v = u.get(i, j) + spec.vectors.get(i, k) * spec.vectors.get(j, k).conj() * phase;
                u.set(i, j, v);
            }
        }
    }
    u
}

fn density(dim: usize) -> impl Strategy<Value = DensityMatrix<f64>> {
    psd(dim).prop_map(move |h| {
        let trace = h.trace_re();
        // A Gram matrix of nonzero vectors has positive trace almost surely;
        // regularize just in case the draw degenerates.
        let h = if trace > 1e-6 {
            h.scale_re(1.0 / trace)
        } else {
            let reg = h.add(&HermitianMatrix::identity(dim).scale_re(1e-3));
            let t = reg.trace_re();
            reg.scale_re(1.0 / t)
        };
        DensityMatrix::new_with_tol(h, 1e-8).expect("normalized PSD is a state")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigh_reconstructs(h in (2usize..=8).prop_flat_map(hermitian)) {
        let dim = h.dim();
        let spec = eigh(&h).unwrap();
        let err = spec.reconstruct().max_norm_diff(&h);
        prop_assert!(err <= 1e-10 * h.max_norm().max(1.0), "reconstruction {err:e}");
        // Eigenvalues ascending.
        for w in spec.values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        // Orthonormal eigenvectors.
        let gram_err = spec.vectors.adjoint().mul_mat(&spec.vectors)
            .max_norm_diff(&Mat::identity(dim));
        prop_assert!(gram_err <= 1e-10);
    }

    #[test]
    fn sqrt_squares_back(h in (2usize..=6).prop_flat_map(psd)) {
        let s = sqrt_psd(&h).unwrap();
        let back = HermitianMatrix::symmetrize(s.matrix().mul_mat(s.matrix()));
        prop_assert!(back.max_norm_diff(&h) <= 1e-8 * h.max_norm().max(1.0));
    }

    #[test]
    fn pinv_is_involutive_on_full_rank(h in (2usize..=6).prop_flat_map(psd)) {
        // Shift well away from singularity so the rank cutoff never triggers.
        let full = h.add(&HermitianMatrix::identity(h.dim()).scale_re(0.5));
        let once = pinv_psd(&full, 1e-10).unwrap();
        let twice = pinv_psd(&once, 1e-10).unwrap();
        prop_assert!(twice.max_norm_diff(&full) <= 1e-8 * full.max_norm().max(1.0));
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(
        h in (2usize..=6).prop_flat_map(hermitian),
        g in (2usize..=6).prop_flat_map(hermitian),
    ) {
        prop_assume!(h.dim() == g.dim());
        let u = unitary_from_generator(&g);
        let rotated = h.conjugate_by(&u);
        let a = trace_norm(&h).unwrap();
        let b = trace_norm(&rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn orbits_preserve_spectra(
        state in density(3),
        g1 in hermitian(3),
        g2 in hermitian(3),
    ) {
        let us = UnitarySet::new(vec![
            Mat::identity(3),
            unitary_from_generator(&g1),
            unitary_from_generator(&g2),
        ]).unwrap();
        let ens = similarity_ensemble(&state, us, vec![1.0 / 3.0; 3]).unwrap();
        let seed_spec = eigh(ens.state(0).hermitian()).unwrap();
        for s in ens.states() {
            let spec = eigh(s.hermitian()).unwrap();
            for (a, b) in spec.values.iter().zip(&seed_spec.values) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn commutant_dimension_is_conjugation_invariant(
        g1 in hermitian(2),
        g2 in hermitian(2),
        w in hermitian(2),
    ) {
        let us = UnitarySet::new(vec![
            Mat::identity(2),
            unitary_from_generator(&g1),
            unitary_from_generator(&g2),
        ]).unwrap();
        let dim_before = commutant_dimension(&us).unwrap();

        let w = unitary_from_generator(&w);
        let rotated: Vec<Mat> = us.iter().map(|u| w.mul_mat(u).mul_mat(&w.adjoint())).collect();
        // Conjugation moves U_1 = I to itself, so the set stays valid.
        let dim_after = commutant_dimension(&UnitarySet::new(rotated).unwrap()).unwrap();
        prop_assert_eq!(dim_before, dim_after);
    }

    #[test]
    fn two_state_oracle_matches_helstrom(
        rho1 in density(2),
        rho2 in density(2),
        p1 in 0.2f64..0.8,
    ) {
        let p2 = 1.0 - p1;
        let ens = Ensemble::new(vec![p1, p2], vec![rho1.clone(), rho2.clone()], None).unwrap();
        let expected = helstrom_two_state(p1, &rho1, p2, &rho2).unwrap();
        let r = fixed_point_solve(&ens, 20000, 1e-10, 11).unwrap();
        prop_assert!(
            (r.p - expected).abs() <= 1e-7,
            "oracle {} vs helstrom {expected}", r.p
        );
    }
}

/// Certified solutions on the trine dominate arbitrary random POVMs and
/// satisfy the complementarity and trace identities.
#[test]
fn certified_trine_dominates_random_povms() {
    let phis = [
        0.0,
        2.0 * std::f64::consts::FRAC_PI_3,
        4.0 * std::f64::consts::FRAC_PI_3,
    ];
    let ens = bloch_latitude_ensemble(1.0, std::f64::consts::FRAC_PI_2, &phis).unwrap();
    let elements = ens
        .states()
        .iter()
        .map(|s| s.hermitian().scale_re(2.0 / 3.0))
        .collect();
    let povm = Povm::new(elements).unwrap();
    let family = extract_helstrom_family(&ens, &povm, 1e-9).unwrap();
    let (ok, defect) = verify_helstrom_family(&ens, &family, 1e-8).unwrap();
    assert!(ok, "family defect {defect:e}");

    for seed in 0..100u64 {
        let candidate = random_povm::<f64>(2, 3, seed).unwrap();
        assert!(
            ratio_upper_bound_check(&ens, &family, &candidate).unwrap(),
            "random POVM {seed} beat the Helstrom ratio"
        );
    }
}

/// Entry-wise complementarity: tau_j Pi_j vanishes as an operator product
/// at a certified optimum, not just in trace.
#[test]
fn complementarity_holds_entrywise() {
    let phis = [
        0.0,
        2.0 * std::f64::consts::FRAC_PI_3,
        4.0 * std::f64::consts::FRAC_PI_3,
    ];
    for a in [0.4, 0.8, 1.0] {
        let ens = bloch_latitude_ensemble(a, std::f64::consts::FRAC_PI_2, &phis).unwrap();
        let r = fixed_point_solve(&ens, 20000, 1e-11, 5).unwrap();
        let cert = certify_optimal(&ens, &r.povm, 1e-7).unwrap();
        assert!(cert.passed(), "a={a}: oracle output uncertified");
        let family = extract_helstrom_family(&ens, &r.povm, 1e-7).unwrap();
        for (tau, pi) in family.conjugates.iter().zip(r.povm.elements()) {
            let Some(tau) = tau else { continue };
            let product = tau.matrix().mul_mat(pi.matrix());
            assert!(
                product.max_norm() <= 1e-7,
                "a={a}: entrywise complementarity defect {:e}",
                product.max_norm()
            );
        }
        // Trace form as well.
        for v in complementarity(&family, &r.povm) {
            assert!(v.abs() <= 1e-8);
        }
    }
}

/// Soundness: two different certified optima report the same value.
#[test]
fn certified_value_is_unique() {
    let phis = [
        0.0,
        2.0 * std::f64::consts::FRAC_PI_3,
        4.0 * std::f64::consts::FRAC_PI_3,
    ];
    let ens = bloch_latitude_ensemble(1.0, std::f64::consts::FRAC_PI_2, &phis).unwrap();

    // Route one: projective-style closed construction.
    let elements = ens
        .states()
        .iter()
        .map(|s| s.hermitian().scale_re(2.0 / 3.0))
        .collect();
    let povm_a = Povm::new(elements).unwrap();
    let cert_a = certify_optimal(&ens, &povm_a, 1e-9).unwrap();

    // Route two: fixed-point oracle.
    let r = fixed_point_solve(&ens, 20000, 1e-11, 3).unwrap();
    let cert_b = certify_optimal(&ens, &r.povm, 1e-7).unwrap();

    assert!(cert_a.passed() && cert_b.passed());
    assert!(
        (cert_a.success_probability - cert_b.success_probability).abs() <= 2e-8,
        "certified optima disagree: {} vs {}",
        cert_a.success_probability,
        cert_b.success_probability
    );
}

/// trace(M) equals the success probability whenever the POVM certifies.
#[test]
fn lagrange_trace_matches_probability() {
    let ens = bloch_latitude_ensemble(0.7, std::f64::consts::FRAC_PI_2, &[0.0, std::f64::consts::PI])
        .unwrap();
    let r = fixed_point_solve(&ens, 20000, 1e-11, 2).unwrap();
    let cert = certify_optimal(&ens, &r.povm, 1e-7).unwrap();
    assert!(cert.passed());
    let m = lagrange_operator(&ens, &r.povm).unwrap();
    let p = success_probability(&ens, &r.povm).unwrap();
    assert!((m.trace_re() - p).abs() <= 1e-10);
}

/// Gauge robustness: a degenerate maximal eigenspace admits many bases;
/// the certified value must not depend on the one the solver picked.
#[test]
fn degenerate_gauge_freedom() {
    // d=3 seed with two-fold maximal eigenvalue, under clock-and-shift.
    let omega = 2.0 * std::f64::consts::FRAC_PI_3;
    let shift = Mat::from_fn(3, 3, |i, j| {
        if i == (j + 1) % 3 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let clock = Mat::from_diagonal(&[
        Complex::new(1.0, 0.0),
        Complex::from_polar(1.0, omega),
        Complex::from_polar(1.0, 2.0 * omega),
    ]);

    // Two seeds, identical spectra, maximal eigenspace rotated in between.
    let base = HermitianMatrix::from_real_diagonal(&[0.4, 0.4, 0.2]);
    let mixer = HermitianMatrix::from_matrix(Mat::from_entries(
        3,
        3,
        vec![
            Complex::new(0.0, 0.0),
            Complex::new(0.3, 0.1),
            Complex::new(0.0, 0.0),
            Complex::new(0.3, -0.1),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        ],
    ))
    .unwrap();
    let w = unitary_from_generator(&mixer);
    let seed_a = DensityMatrix::new(base.clone()).unwrap();
    let seed_b = DensityMatrix::new(base.conjugate_by(&w)).unwrap();

    let mut results = Vec::new();
    for seed in [seed_a, seed_b] {
        let us = UnitarySet::new(vec![Mat::identity(3), shift.clone(), clock.clone()]).unwrap();
        let ens = similarity_ensemble(&seed, us, vec![1.0 / 3.0; 3]).unwrap();
        let sol = solve_irreducible(&ens).unwrap();
        assert!((sol.p_opt - 0.4).abs() < 1e-12);
        if sol.applicability == Applicability::Exact {
            let cert = sol.certificate.unwrap();
            results.push(cert.success_probability);
        }
    }
    for (a, b) in results.iter().zip(results.iter().skip(1)) {
        assert!((a - b).abs() <= 1e-8);
    }
}

/// The generic layer really is scalar-generic: the f32 instantiation runs
/// end to end at loosened tolerances.
#[test]
fn f32_stack_smoke() {
    let phis = [
        0.0f32,
        2.0 * std::f32::consts::FRAC_PI_3,
        4.0 * std::f32::consts::FRAC_PI_3,
    ];
    let ens = bloch_latitude_ensemble(1.0f32, std::f32::consts::FRAC_PI_2, &phis).unwrap();
    let r = fixed_point_solve(&ens, 5000, 1e-6f32, 1).unwrap();
    assert!((r.p - 2.0 / 3.0).abs() < 1e-3, "f32 oracle p = {}", r.p);
    let cert = certify_optimal(&ens, &r.povm, 1e-3f32).unwrap();
    assert!(cert.passed());
}
