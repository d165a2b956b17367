//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them). Tolerances are
//! pinned here, in code.
//!
//! Shared solve results are cached in `OnceLock` statics so the fuzz corpus
//! is built once even though several criteria consume it.

use std::process::Command;
use std::sync::OnceLock;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use qmed::certify::{
    certify_optimal, complementarity, extract_helstrom_family, lagrange_operator,
    success_probability, verify_helstrom_family, Povm,
};
use qmed::closed_form::{solve_irreducible, solve_spin_latitude, Applicability};
use qmed::ensemble::{
    bloch_latitude_ensemble, commutant_dimension, cyclic_spin_ensemble, similarity_ensemble,
    DensityMatrix, Ensemble, SpinLatitudeParams, UnitarySet,
};
use qmed::hermitian::{eigh, HermitianMatrix};
use qmed::matrix::ComplexMatrix;
use qmed::oracle::{fixed_point_solve, helstrom_two_state, random_povm, srm};

type Mat = ComplexMatrix<f64>;

const ORACLE_ITERS: usize = 20000;
const ORACLE_STEP: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn trine() -> Ensemble<f64> {
    let phis = [
        0.0,
        2.0 * std::f64::consts::FRAC_PI_3,
        4.0 * std::f64::consts::FRAC_PI_3,
    ];
    bloch_latitude_ensemble(1.0, std::f64::consts::FRAC_PI_2, &phis).unwrap()
}

/// pi rotation about the equatorial axis at `half_phi`; maps the Bloch
/// vector at azimuth 0 to azimuth 2*half_phi.
fn equatorial_pi_rotation(half_phi: f64) -> Mat {
    Mat::from_entries(
        2,
        2,
        vec![
            c(0.0, 0.0),
            Complex::from_polar(1.0, -half_phi) * c(0.0, -1.0),
            Complex::from_polar(1.0, half_phi) * c(0.0, -1.0),
            c(0.0, 0.0),
        ],
    )
}

/// Equatorial mixed qubits under a non-abelian pi-rotation set (N >= 3).
fn equatorial_irreducible(a: f64, n: usize) -> Ensemble<f64> {
    let seed = DensityMatrix::from_bloch([a, 0.0, 0.0]).unwrap();
    let mut us = vec![Mat::identity(2)];
    for k in 1..n {
        let phi = std::f64::consts::TAU * k as f64 / n as f64;
        us.push(equatorial_pi_rotation(phi / 2.0));
    }
    similarity_ensemble(&seed, UnitarySet::new(us).unwrap(), vec![1.0 / n as f64; n]).unwrap()
}

/// Certified (ensemble, POVM, label) runs accumulated for the family
/// round-trip criterion.
struct CertifiedRun {
    label: String,
    ensemble: Ensemble<f64>,
    povm: Povm<f64>,
}

// ---------------------------------------------------------------------
// Criterion 1: trine closed form, oracle agreement, certification.
// ---------------------------------------------------------------------

fn run_criterion_1() -> CertifiedRun {
    let ens = trine();
    let params = SpinLatitudeParams {
        two_j: 1,
        a: 1.0,
        theta: std::f64::consts::FRAC_PI_2,
        phi: 0.0,
        n: 3,
    };
    let sol = solve_spin_latitude(&params).unwrap();
    assert_eq!(sol.applicability, Applicability::Exact);
    assert!(
        (sol.p_opt - 2.0 / 3.0).abs() < 1e-15,
        "closed form must give d/N = 2/3 exactly, got {}",
        sol.p_opt
    );

    let oracle = fixed_point_solve(&ens, ORACLE_ITERS, ORACLE_STEP, 7).unwrap();
    assert!(
        (oracle.p - 2.0 / 3.0).abs() <= 1e-6,
        "oracle {} deviates from 2/3",
        oracle.p
    );

    // The latitude construction was certified against its own cyclic orbit;
    // certify the same construction against the file-style trine too.
    let povm = Povm::new(
        ens.states()
            .iter()
            .map(|s| s.hermitian().scale_re(2.0 / 3.0))
            .collect(),
    )
    .unwrap();
    let cert = certify_optimal(&ens, &povm, 1e-7).unwrap();
    assert!(cert.passed(), "trine certificate failed: {:?}", cert.psd_margins);

    println!(
        "criterion 1: PASS - trine p_closed = {} (= 2/3), p_oracle = {}, certificate pass at 1e-7",
        sol.p_opt, oracle.p
    );
    CertifiedRun {
        label: "trine".into(),
        ensemble: ens,
        povm,
    }
}

#[test]
fn criterion_1_trine() {
    run_criterion_1();
}

// ---------------------------------------------------------------------
// Criterion 2: equatorial mixed qubit family, p = (1+a)/N.
// ---------------------------------------------------------------------

fn run_criterion_2() -> Vec<CertifiedRun> {
    let mut runs = Vec::new();
    for &a in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &n in &[2usize, 3, 4] {
            let expected = (1.0 + a) / n as f64;
            let (ens, povm, p_closed) = if n == 2 {
                // Two-element generating sets are abelian, so the scalar-
                // commutant route cannot apply; the latitude construction
                // reproduces the same closed form.
                let params = SpinLatitudeParams {
                    two_j: 1,
                    a,
                    theta: std::f64::consts::FRAC_PI_2,
                    phi: 0.0,
                    n: 2,
                };
                let sol = solve_spin_latitude(&params).unwrap();
                assert_eq!(sol.applicability, Applicability::Exact, "a={a} n=2");
                let ens = cyclic_spin_ensemble(&params).unwrap();
                (ens, sol.povm.unwrap(), sol.p_opt)
            } else {
                let ens = equatorial_irreducible(a, n);
                assert_eq!(commutant_dimension(ens.generators().unwrap()).unwrap(), 1);
                let sol = solve_irreducible(&ens).unwrap();
                assert_eq!(sol.applicability, Applicability::Exact, "a={a} n={n}");
                let povm = sol.povm.unwrap();
                (ens, povm, sol.p_opt)
            };
            assert!(
                (p_closed - expected).abs() <= 1e-12,
                "a={a} n={n}: closed {p_closed} vs (1+a)/N = {expected}"
            );

            let oracle = fixed_point_solve(&ens, ORACLE_ITERS, ORACLE_STEP, 21).unwrap();
            assert!(
                (oracle.p - expected).abs() <= 1e-6,
                "a={a} n={n}: oracle {} vs {expected}",
                oracle.p
            );

            if n == 2 {
                let h = helstrom_two_state(0.5, ens.state(0), 0.5, ens.state(1)).unwrap();
                assert!(
                    (p_closed - h).abs() <= 1e-7,
                    "a={a}: closed {p_closed} vs helstrom {h}"
                );
            }

            let cert = certify_optimal(&ens, &povm, 1e-7).unwrap();
            assert!(cert.passed(), "a={a} n={n} certificate failed");
            runs.push(CertifiedRun {
                label: format!("equatorial a={a} N={n}"),
                ensemble: ens,
                povm,
            });
        }
    }
    println!(
        "criterion 2: PASS - (1+a)/N verified for a in {{0.1..0.9}}, N in {{2,3,4}} \
         (closed form, oracle within 1e-6, N=2 Helstrom within 1e-7)"
    );
    runs
}

#[test]
fn criterion_2_equatorial_family() {
    run_criterion_2();
}

// ---------------------------------------------------------------------
// Criterion 3: spin-j latitude formula sweep with certified fraction.
// ---------------------------------------------------------------------

struct SweepOutcome {
    certified: Vec<(SpinLatitudeParams<f64>, Povm<f64>)>,
    total: usize,
}

fn sweep_outcome() -> &'static SweepOutcome {
    static SWEEP: OnceLock<SweepOutcome> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let thetas = [
            std::f64::consts::FRAC_PI_6,
            std::f64::consts::FRAC_PI_3,
            std::f64::consts::FRAC_PI_2,
        ];
        let mut certified = Vec::new();
        let mut total = 0;
        for two_j in [1u32, 2, 3] {
            let a_cap = 1.0 / two_j as f64;
            for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for theta in thetas {
                    for n in [2usize, 3, 4] {
                        total += 1;
                        let params = SpinLatitudeParams {
                            two_j,
                            a: frac * a_cap,
                            theta,
                            phi: 0.0,
                            n,
                        };
                        let sol = solve_spin_latitude(&params).unwrap();
                        let d = params.dim() as f64;
                        let formula =
                            (1.0 + params.a * (d - 1.0) * params.theta.sin()) / n as f64;
                        assert!(
                            (sol.p_opt - formula).abs() <= 1e-9,
                            "closed form strays from the formula at {params:?}"
                        );
                        if sol.is_exact() {
                            if let Some(povm) = sol.povm.clone() {
                                certified.push((params, povm));
                            }
                        }
                    }
                }
            }
        }
        SweepOutcome { certified, total }
    })
}

#[test]
fn criterion_3_spin_latitude_sweep() {
    let sweep = sweep_outcome();
    for (params, _) in &sweep.certified {
        let d = params.dim() as f64;
        let formula = (1.0 + params.a * (d - 1.0) * params.theta.sin()) / params.n as f64;
        let ens = cyclic_spin_ensemble(params).unwrap();
        let oracle = fixed_point_solve(&ens, ORACLE_ITERS, ORACLE_STEP, 13).unwrap();
        assert!(
            (formula - oracle.p).abs() <= 1e-6,
            "{params:?}: certified closed form {formula} vs oracle {}",
            oracle.p
        );
    }
    println!(
        "criterion 3: PASS - latitude formula certified on {}/{} grid points \
         (certified points match the formula to 1e-9 and the oracle to 1e-6; \
         the fraction is the empirical validity map, no target)",
        sweep.certified.len(),
        sweep.total
    );
}

// ---------------------------------------------------------------------
// Criterion 4: irreducible closed form for a random full-rank qutrit seed.
// ---------------------------------------------------------------------

fn random_full_rank_state(dim: usize, rng: &mut ChaCha12Rng) -> DensityMatrix<f64> {
    let g = Mat::from_fn(dim, dim, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let gram = HermitianMatrix::symmetrize(g.adjoint().mul_mat(&g))
        .add(&HermitianMatrix::identity(dim).scale_re(0.05));
    let trace = gram.trace_re();
    DensityMatrix::new(gram.scale_re(1.0 / trace)).unwrap()
}

fn run_criterion_4() -> Vec<CertifiedRun> {
    let mut runs = Vec::new();
    for seed in [41u64, 42, 43] {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rho = random_full_rank_state(3, &mut rng);
        let spec = eigh(rho.hermitian()).unwrap();
        let a_max = spec.max_value();

        // Basis ordered (max eigenvector first), then a cyclic shift and a
        // phased double shift expressed in that basis. The pair is
        // non-abelian, so the commutant is scalar, while the orbit of the
        // maximal eigenvector stays orthonormal, keeping the convex-hull
        // condition feasible.
        let basis: Vec<Vec<Complex<f64>>> =
            vec![spec.vector(2), spec.vector(1), spec.vector(0)];
        let p_mat = Mat::from_fn(3, 3, |i, k| basis[k][i]);
        let shift = Mat::from_fn(3, 3, |i, j| {
            if i == (j + 1) % 3 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let phases = Mat::from_diagonal(&[
            c(1.0, 0.0),
            Complex::from_polar(1.0, 0.7),
            Complex::from_polar(1.0, 1.3),
        ]);
        let u2 = p_mat.mul_mat(&shift).mul_mat(&p_mat.adjoint());
        let u3 = p_mat
            .mul_mat(&shift.mul_mat(&shift).mul_mat(&phases))
            .mul_mat(&p_mat.adjoint());
        let gens = UnitarySet::new(vec![Mat::identity(3), u2, u3]).unwrap();
        assert_eq!(
            commutant_dimension(&gens).unwrap(),
            1,
            "seed {seed}: generating set must be irreducible"
        );

        let ens = similarity_ensemble(&rho, gens, vec![1.0 / 3.0; 3]).unwrap();
        let sol = solve_irreducible(&ens).unwrap();
        assert_eq!(sol.applicability, Applicability::Exact, "seed {seed}");
        assert!(
            (sol.p_opt - a_max).abs() <= 1e-10,
            "seed {seed}: p {} vs (d/N) a_max = {a_max}",
            sol.p_opt
        );

        let oracle = fixed_point_solve(&ens, ORACLE_ITERS, ORACLE_STEP, seed).unwrap();
        assert!(
            (oracle.p - sol.p_opt).abs() <= 1e-6,
            "seed {seed}: oracle {} vs closed {}",
            oracle.p,
            sol.p_opt
        );

        let povm = sol.povm.unwrap();
        let cert = certify_optimal(&ens, &povm, 1e-7).unwrap();
        assert!(cert.passed(), "seed {seed}: certificate failed");
        runs.push(CertifiedRun {
            label: format!("qutrit seed {seed}"),
            ensemble: ens,
            povm,
        });
    }
    println!(
        "criterion 4: PASS - random full-rank qutrit seeds under irreducible sets: \
         p = (d/N) a_max certified and matched by the oracle to 1e-6"
    );
    runs
}

#[test]
fn criterion_4_irreducible_qutrit() {
    run_criterion_4();
}

// ---------------------------------------------------------------------
// Criterion 5: certificate soundness fuzz over 200 random ensembles.
// ---------------------------------------------------------------------

struct FuzzOutcome {
    ensemble: Ensemble<f64>,
    povm: Povm<f64>,
    p: f64,
    converged: bool,
    certified: bool,
}

fn fuzz_corpus() -> &'static Vec<FuzzOutcome> {
    static FUZZ: OnceLock<Vec<FuzzOutcome>> = OnceLock::new();
    FUZZ.get_or_init(|| {
        let mut out = Vec::with_capacity(200);
        for case in 0..200u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + case);
            let dim = 2 + (rng.random::<u32>() % 3) as usize; // 2..4
            let n = 2 + (rng.random::<u32>() % 4) as usize; // 2..5
            let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let priors: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let states: Vec<DensityMatrix<f64>> = (0..n)
                .map(|_| random_full_rank_state(dim, &mut rng))
                .collect();
            let ens = Ensemble::new(priors, states, None).unwrap();

            // Converged tighter than the certificate needs: the family
            // complementarity check downstream wants ~1e-8 residuals, which
            // step-norm 1e-10 alone does not guarantee on slow modes.
            let r = fixed_point_solve(&ens, 40000, 1e-12, case).unwrap();
            let cert = certify_optimal(&ens, &r.povm, 1e-6).unwrap();
            out.push(FuzzOutcome {
                ensemble: ens,
                povm: r.povm.clone(),
                p: r.p,
                converged: r.converged,
                certified: cert.passed(),
            });
        }
        out
    })
}

#[test]
fn criterion_5_soundness_fuzz() {
    let corpus = fuzz_corpus();
    let certified = corpus.iter().filter(|f| f.certified).count();
    assert!(
        certified * 100 >= corpus.len() * 95,
        "only {certified}/200 fuzz runs certified"
    );
    for (i, f) in corpus.iter().enumerate() {
        if !f.certified {
            assert!(
                !f.converged,
                "case {i}: uncertified oracle output claimed convergence"
            );
        }
    }

    // Certified optima dominate arbitrary POVMs.
    for (i, f) in corpus.iter().enumerate().filter(|(_, f)| f.certified) {
        for draw in 0..50u64 {
            let candidate =
                random_povm::<f64>(f.ensemble.dim(), f.ensemble.len(), 7000 + draw).unwrap();
            let p_candidate = success_probability(&f.ensemble, &candidate).unwrap();
            assert!(
                p_candidate <= f.p + 1e-9,
                "case {i}, draw {draw}: random POVM scored {p_candidate} > {}",
                f.p
            );
        }
    }
    println!(
        "criterion 5: PASS - {certified}/200 random ensembles certified at 1e-6 \
         (>= 95% required); every certified run dominates 50 random POVMs within 1e-9"
    );
}

// ---------------------------------------------------------------------
// Criterion 6: Helstrom family round-trip over every certified run above.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_family_round_trip() {
    let mut runs = vec![run_criterion_1()];
    runs.extend(run_criterion_2());
    for (params, povm) in &sweep_outcome().certified {
        runs.push(CertifiedRun {
            label: format!("latitude {params:?}"),
            ensemble: cyclic_spin_ensemble(params).unwrap(),
            povm: povm.clone(),
        });
    }
    runs.extend(run_criterion_4());
    for (i, f) in fuzz_corpus().iter().enumerate().filter(|(_, f)| f.certified) {
        runs.push(CertifiedRun {
            label: format!("fuzz case {i}"),
            ensemble: f.ensemble.clone(),
            povm: f.povm.clone(),
        });
    }

    let mut checked = 0usize;
    let mut dominated = 0usize;
    for run in &runs {
        // Fuzz runs were certified at 1e-6; use that as the family tolerance.
        let tol = 1e-6;
        let family = extract_helstrom_family(&run.ensemble, &run.povm, tol)
            .unwrap_or_else(|e| panic!("{}: family extraction failed: {e}", run.label));
        let (ok, defect) = verify_helstrom_family(&run.ensemble, &family, 1e-8).unwrap();
        assert!(ok, "{}: family defect {defect:e}", run.label);
        for (j, tau) in family.conjugates.iter().enumerate() {
            let Some(tau) = tau else { continue };
            let min_eig = eigh(tau.hermitian()).unwrap().min_value();
            // The zero-eigenvalue law governs outcomes the measurement uses.
            // A strictly dominated state has Pi_j = 0 at the optimum, where a
            // full-rank conjugate is the correct answer; such indices must
            // instead witness their domination through a vanishing element
            // (up to iteration dust, which sits below sqrt(tol) = 1e-3).
            let usage = run.povm.element(j).trace_re();
            if usage > 1e-3 {
                assert!(
                    min_eig <= 1e-7,
                    "{}: used outcome {j} (Tr Pi = {usage:e}) has full-rank tau \
                     (min eigenvalue {min_eig:e})",
                    run.label
                );
            } else {
                dominated += 1;
                assert!(
                    usage >= -1e-9,
                    "{}: outcome {j} has negative usage (Tr Pi = {usage:e})",
                    run.label
                );
            }
        }
        for (j, v) in complementarity(&family, &run.povm).iter().enumerate() {
            assert!(
                v.abs() <= 1e-8,
                "{}: Tr(tau_{j} Pi_{j}) = {v:e}",
                run.label
            );
        }
        checked += 1;
    }
    println!(
        "criterion 6: PASS - Helstrom family extracted and verified on {checked} certified runs \
         (pairwise defect <= 1e-8, complementarity <= 1e-8, rank deficiency <= 1e-7 on every \
         used outcome; {dominated} dominated outcomes carried Pi_j = 0 with full-rank tau, \
         where the zero-eigenvalue law does not apply)"
    );
}

// ---------------------------------------------------------------------
// Criterion 7: SRM optimality for symmetric pure equiprobable states.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_srm_optimality() {
    for n in [3usize, 4, 5] {
        let phis: Vec<f64> = (0..n)
            .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
            .collect();
        let ens = bloch_latitude_ensemble(1.0, std::f64::consts::FRAC_PI_2, &phis).unwrap();
        let srm_povm = srm(&ens).unwrap();
        let p_srm = success_probability(&ens, &srm_povm).unwrap();
        let p_opt = 2.0 / n as f64;
        assert!(
            (p_srm - p_opt).abs() <= 1e-8,
            "N={n}: SRM {p_srm} vs optimal {p_opt}"
        );
        let cert = certify_optimal(&ens, &srm_povm, 1e-7).unwrap();
        assert!(cert.passed(), "N={n}: SRM failed certification");
    }
    println!(
        "criterion 7: PASS - SRM matches the optimum d/N within 1e-8 for N in {{3,4,5}} \
         symmetric pure equatorial states"
    );
}

// ---------------------------------------------------------------------
// Criterion 8: the Lagrange operator commutes with the generators.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_commutation_invariant() {
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;

    let mut check = |ens: &Ensemble<f64>, povm: &Povm<f64>, label: &str| {
        let m = lagrange_operator(ens, povm).unwrap().matrix;
        for u in ens.generators().expect("generator-equipped ensemble").iter() {
            let defect = m.mul_mat(u).max_norm_diff(&u.mul_mat(&m));
            assert!(defect <= 1e-7, "{label}: commutation defect {defect:e}");
            worst = worst.max(defect);
        }
        checked += 1;
    };

    let c1 = run_criterion_1();
    check(&c1.ensemble, &c1.povm, "trine");
    for run in run_criterion_2() {
        check(&run.ensemble, &run.povm, &run.label);
    }
    for (params, povm) in &sweep_outcome().certified {
        let ens = cyclic_spin_ensemble(params).unwrap();
        check(&ens, povm, "latitude point");
    }
    for run in run_criterion_4() {
        check(&run.ensemble, &run.povm, &run.label);
    }

    println!(
        "criterion 8: PASS - ||M U_i - U_i M|| <= 1e-7 on {checked} certified \
         generator-equipped solutions (worst {worst:.2e})"
    );
}

// ---------------------------------------------------------------------
// Criterion 9: end-to-end determinism of the JSON report.
// ---------------------------------------------------------------------

#[test]
fn criterion_9_determinism() {
    let dir = std::env::temp_dir().join("qmed-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("det.json");
    let gen = Command::new(env!("CARGO_BIN_EXE_qmed"))
        .args([
            "gen",
            "spin",
            "--two_j",
            "2",
            "--a",
            "0.3",
            "--theta",
            "1.0471975511965976",
            "--n",
            "4",
            "--out",
        ])
        .arg(&file)
        .output()
        .unwrap();
    assert!(gen.status.success(), "gen failed: {:?}", gen);

    let run = |_: usize| {
        let out = Command::new(env!("CARGO_BIN_EXE_qmed"))
            .arg("solve")
            .arg(&file)
            .args(["--json", "--seed", "7"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "solve exit: {:?}", out);
        out.stdout
    };
    let first = run(1);
    let second = run(2);
    assert_eq!(first, second, "JSON reports differ between identical runs");
    assert_eq!(
        first.iter().filter(|&&b| b == b'\n').count(),
        1,
        "stdout must carry exactly one JSON document"
    );
    println!(
        "criterion 9: PASS - `solve --json --seed 7` produced byte-identical reports \
         ({} bytes) across two runs",
        first.len()
    );
}
