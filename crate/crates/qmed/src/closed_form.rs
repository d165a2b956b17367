//! Analytic optimal measurements for similarity-transformed equiprobable
//! ensembles.
//!
//! All constructions share one skeleton: pick the seed conjugate state
//! `tau_1`, take the seed measurement operator `Pi'_1` supported on the
//! kernel of `tau_1` with trace d, push it around the orbit
//! (`Pi'_i = U_i Pi'_1 U_i†`), and find convex weights with
//! `sum lambda_i Pi'_i = I`. Every result is re-certified before being
//! reported; a construction that fails its own certificate is downgraded
//! to inapplicable rather than trusted.

use crate::certify::{certify_optimal, success_probability, Certificate, Povm};
use crate::ensemble::{
    commutant_dimension, cyclic_spin_ensemble, axis_spin_operator, DensityMatrix, Ensemble,
    SpinLatitudeParams, UnitarySet,
};
use crate::error::{Error, Result};
use crate::hermitian::{eigh, HermitianMatrix};
use crate::matrix::ComplexMatrix;
use crate::nnls::nnls;
use crate::scalar::{real, real_tol, tol, Scalar};

/// How far the analytic construction got.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    /// Construction succeeded and certified optimal.
    Exact,
    /// Construction could not be completed (infeasible weights) or failed
    /// its own certificate.
    Inapplicable,
    /// Maximally mixed seed: every POVM is optimal, the uniform one is
    /// returned.
    DegenerateUniform,
}

impl Applicability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Applicability::Exact => "exact",
            Applicability::Inapplicable => "inapplicable",
            Applicability::DegenerateUniform => "degenerate_uniform",
        }
    }
}

/// Output of the analytic solvers.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution<T: Scalar> {
    /// The formula value for the optimal success probability.
    pub p_opt: T,
    /// Seed measurement operator `Pi'_1` (trace d when exact).
    pub pi_prime_1: HermitianMatrix<T>,
    /// Seed conjugate state; absent in the degenerate-uniform branch.
    pub tau_1: Option<DensityMatrix<T>>,
    /// Convex weights `lambda_i`; empty when infeasible.
    pub lambdas: Vec<T>,
    /// Assembled POVM; present when exact or degenerate-uniform.
    pub povm: Option<Povm<T>>,
    pub applicability: Applicability,
    /// Certificate of the assembled POVM, when one was produced.
    pub certificate: Option<Certificate<T>>,
}

impl<T: Scalar> ClosedFormSolution<T> {
    pub fn is_exact(&self) -> bool {
        matches!(
            self.applicability,
            Applicability::Exact | Applicability::DegenerateUniform
        )
    }
}

/// Convex weights `lambda >= 0` with `sum_i lambda_i Pi'_i = I` and
/// `sum_i lambda_i = 1`, or `None` when the identity is not in the hull.
///
/// The Hermitian constraint is flattened to d² real rows (d diagonal
/// entries, then re/im of each upper off-diagonal pair) plus the unit-sum
/// row, and solved by nonnegative least squares; feasibility means the
/// residual is at most `1e-8 * sqrt(d² + 1)`.
pub fn nnls_feasibility<T: Scalar>(pi_primes: &[HermitianMatrix<T>]) -> Result<Option<Vec<T>>> {
    if pi_primes.is_empty() {
        return Err(Error::precondition("feasibility needs at least one operator"));
    }
    let d = pi_primes[0].dim();
    for p in pi_primes {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "feasibility operators share one dimension",
                expected: d,
                got: p.dim(),
            });
        }
    }
    let n = pi_primes.len();
    let rows = d * d + 1;

    let mut a = vec![T::zero(); rows * n];
    let mut b = vec![T::zero(); rows];
    for (col, op) in pi_primes.iter().enumerate() {
        let mut r = 0;
        for i in 0..d {
            a[r * n + col] = op.get(i, i).re;
            r += 1;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                a[r * n + col] = op.get(i, j).re;
                a[(r + 1) * n + col] = op.get(i, j).im;
                r += 2;
            }
        }
        a[r * n + col] = T::one(); // unit-sum row
    }
    for i in 0..d {
        b[i] = T::one(); // identity diagonal
    }
    b[rows - 1] = T::one(); // sum lambda = 1

    let sol = nnls(&a, rows, n, &b);
    let feasible = sol.residual_norm
        <= real_tol::<T>(tol::RECONSTRUCT) * T::from_usize(rows).unwrap().sqrt();
    Ok(feasible.then_some(sol.x))
}

/// Assembles `Pi_i = lambda_i U_i Pi'_1 U_i†` and validates the result.
///
/// A completeness defect beyond `1e-8` means the weights do not match the
/// operators (stale lambdas) and is an assembly error.
pub fn assemble_povm<T: Scalar>(
    pi_prime_1: &HermitianMatrix<T>,
    generators: &UnitarySet<T>,
    lambdas: &[T],
) -> Result<Povm<T>> {
    if lambdas.len() != generators.len() {
        return Err(Error::DimensionMismatch {
            context: "one weight per generator",
            expected: generators.len(),
            got: lambdas.len(),
        });
    }
    let elements: Vec<HermitianMatrix<T>> = generators
        .iter()
        .zip(lambdas)
        .map(|(u, &l)| pi_prime_1.conjugate_by(u).scale_re(l))
        .collect();
    let mut sum = HermitianMatrix::zeros(generators.dim());
    for e in &elements {
        sum = sum.add(e);
    }
    let defect = sum.max_norm_diff(&HermitianMatrix::identity(generators.dim()));
    if defect > real_tol::<T>(tol::RECONSTRUCT) {
        return Err(Error::precondition(format!(
            "assembled POVM misses the identity by {:e}; weights are stale",
            defect.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Povm::new(elements)
}

fn require_equal_priors<T: Scalar>(ensemble: &Ensemble<T>) -> Result<()> {
    if !ensemble.has_equal_priors() {
        return Err(Error::precondition(
            "analytic constructions require equal priors 1/N",
        ));
    }
    Ok(())
}

fn require_generators<'a, T: Scalar>(ensemble: &'a Ensemble<T>) -> Result<&'a UnitarySet<T>> {
    ensemble.generators().ok_or_else(|| {
        Error::precondition("analytic constructions need the generating unitaries")
    })
}

/// Eigenspace data of a seed state used by the irreducible construction.
struct SeedSpectrum<T: Scalar> {
    a_max: T,
    tau_1: HermitianMatrix<T>,
    pi_prime_1: HermitianMatrix<T>,
}

/// The spectral construction of the irreducible case: `tau_1` diagonal in
/// the seed eigenbasis with `b_i = (a_max - a_i)/(d a_max - 1)`, and
/// `Pi'_1` the uniform trace-d mix over the maximal eigenspace.
fn seed_spectrum<T: Scalar>(seed: &DensityMatrix<T>) -> Result<Option<SeedSpectrum<T>>> {
    let d = seed.dim();
    let spec = eigh(seed.hermitian())?;
    let a_max = spec.max_value();
    let gap = T::from_usize(d).unwrap() * a_max - T::one();
    if gap <= real_tol::<T>(1e-10) {
        return Ok(None); // maximally mixed seed
    }

    // Eigenvalues within the cluster tolerance of a_max share the maximal
    // eigenspace; downstream results must not depend on the basis chosen
    // inside it.
    let cluster = real_tol::<T>(tol::RECONSTRUCT) * T::one().max(a_max);
    let in_max: Vec<bool> = spec.values.iter().map(|&a| a_max - a <= cluster).collect();
    let m = in_max.iter().filter(|&&x| x).count();

    let mut tau_1 = ComplexMatrix::zeros(d, d);
    let mut pi_prime_1 = ComplexMatrix::zeros(d, d);
    let weight = T::from_usize(d).unwrap() / T::from_usize(m).unwrap();
    for k in 0..d {
        let v = spec.vector(k);
        if in_max[k] {
            pi_prime_1 = &pi_prime_1 + &ComplexMatrix::outer(&v, &v).scale_re(weight);
        } else {
            let b = (a_max - spec.values[k]) / gap;
            tau_1 = &tau_1 + &ComplexMatrix::outer(&v, &v).scale_re(b);
        }
    }
    Ok(Some(SeedSpectrum {
        a_max,
        tau_1: HermitianMatrix::symmetrize(tau_1),
        pi_prime_1: HermitianMatrix::symmetrize(pi_prime_1),
    }))
}

fn degenerate_uniform_solution<T: Scalar>(ensemble: &Ensemble<T>) -> Result<ClosedFormSolution<T>> {
    let d = ensemble.dim();
    let n = ensemble.len();
    let inv_n = T::from_usize(n).unwrap().recip();
    let elements = vec![HermitianMatrix::identity(d).scale_re(inv_n); n];
    let povm = Povm::new(elements)?;
    let certificate = certify_optimal(ensemble, &povm, real_tol::<T>(tol::CERTIFY))?;
    Ok(ClosedFormSolution {
        p_opt: inv_n,
        pi_prime_1: HermitianMatrix::identity(d),
        tau_1: None,
        lambdas: vec![inv_n; n],
        povm: Some(povm),
        applicability: Applicability::DegenerateUniform,
        certificate: Some(certificate),
    })
}

/// Completes a construction: find weights, assemble, certify, and downgrade
/// to inapplicable on any failure.
fn finish_construction<T: Scalar>(
    ensemble: &Ensemble<T>,
    generators: &UnitarySet<T>,
    pi_prime_1: HermitianMatrix<T>,
    tau_1: HermitianMatrix<T>,
    p_formula: T,
    fixed_lambdas: Option<Vec<T>>,
) -> Result<ClosedFormSolution<T>> {
    let tau_1 = DensityMatrix::new_with_tol(tau_1, real_tol::<T>(tol::RECONSTRUCT))?;

    let lambdas = match fixed_lambdas {
        Some(l) => Some(l),
        None => {
            let pi_primes: Vec<HermitianMatrix<T>> = generators
                .iter()
                .map(|u| pi_prime_1.conjugate_by(u))
                .collect();
            nnls_feasibility(&pi_primes)?
        }
    };
    let Some(lambdas) = lambdas else {
        return Ok(ClosedFormSolution {
            p_opt: p_formula,
            pi_prime_1,
            tau_1: Some(tau_1),
            lambdas: Vec::new(),
            povm: None,
            applicability: Applicability::Inapplicable,
            certificate: None,
        });
    };

    let povm = match assemble_povm(&pi_prime_1, generators, &lambdas) {
        Ok(p) => p,
        Err(_) => {
            return Ok(ClosedFormSolution {
                p_opt: p_formula,
                pi_prime_1,
                tau_1: Some(tau_1),
                lambdas,
                povm: None,
                applicability: Applicability::Inapplicable,
                certificate: None,
            })
        }
    };

    let certificate = certify_optimal(ensemble, &povm, real_tol::<T>(tol::CERTIFY))?;
    let achieved = success_probability(ensemble, &povm)?;
    let consistent = (achieved - p_formula).abs() <= real_tol::<T>(tol::RECONSTRUCT);
    let applicability = if certificate.passed() && consistent {
        Applicability::Exact
    } else {
        Applicability::Inapplicable
    };
    Ok(ClosedFormSolution {
        p_opt: p_formula,
        pi_prime_1,
        tau_1: Some(tau_1),
        lambdas,
        povm: match applicability {
            Applicability::Inapplicable => None,
            _ => Some(povm),
        },
        applicability,
        certificate: Some(certificate),
    })
}

/// Irreducible generating set (scalar commutant): `p_opt = (d/N) a_max`.
///
/// Requires equal priors and `commutant_dimension == 1`. The maximally
/// mixed seed short-circuits to the degenerate-uniform branch.
pub fn solve_irreducible<T: Scalar>(ensemble: &Ensemble<T>) -> Result<ClosedFormSolution<T>> {
    require_equal_priors(ensemble)?;
    let generators = require_generators(ensemble)?;
    if commutant_dimension(generators)? != 1 {
        return Err(Error::precondition(
            "generating set is reducible (commutant dimension > 1)",
        ));
    }

    let Some(seed) = seed_spectrum(ensemble.state(0))? else {
        return degenerate_uniform_solution(ensemble);
    };
    let d = T::from_usize(ensemble.dim()).unwrap();
    let n = T::from_usize(ensemble.len()).unwrap();
    let p_formula = d / n * seed.a_max;
    finish_construction(
        ensemble,
        generators,
        seed.pi_prime_1,
        seed.tau_1,
        p_formula,
        None,
    )
}

/// Spin-j rotation orbit at a common latitude:
/// `p_opt = (1/N) [1 + a (d-1) sin(theta)]`.
///
/// The conjugate seed is `(1/d)(I + 2b n̂'·J)` with `b = 1/(2j)` and the
/// axis flipped to the equator (`theta' = pi/2`, `phi' = pi + phi`); the
/// result is self-certified and downgraded when the ansatz does not hold.
pub fn solve_spin_latitude<T: Scalar>(
    params: &SpinLatitudeParams<T>,
) -> Result<ClosedFormSolution<T>> {
    params.validate()?;
    let ensemble = cyclic_spin_ensemble(params)?;
    solve_latitude_for(&ensemble, params)
}

/// Latitude construction against a caller-supplied orbit ensemble.
///
/// `params.n` must match the ensemble; the orbit azimuths need not be
/// equally spaced, which covers the non-symmetric latitude families. The
/// certificate decides whether the equal-spacing formula survives.
pub fn solve_latitude_for<T: Scalar>(
    ensemble: &Ensemble<T>,
    params: &SpinLatitudeParams<T>,
) -> Result<ClosedFormSolution<T>> {
    params.validate()?;
    require_equal_priors(ensemble)?;
    let generators = require_generators(ensemble)?;
    let d = params.dim();
    if ensemble.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "latitude params match ensemble dimension",
            expected: d,
            got: ensemble.dim(),
        });
    }

    let n = T::from_usize(ensemble.len()).unwrap();
    let d_t = T::from_usize(d).unwrap();
    let p_formula = (T::one() + params.a * (d_t - T::one()) * params.theta.sin()) / n;

    // tau_1 = (1/d)(I + 2b n̂'·J), b = 1/(2j): rank-deficient by construction.
    let b = T::from_u32(params.two_j).unwrap().recip();
    let phi_prime = T::PI() + params.phi;
    let axis = axis_spin_operator::<T>(params.two_j, T::FRAC_PI_2(), phi_prime)?;
    let tau_1 = HermitianMatrix::identity(d)
        .add(&axis.scale_re(b + b))
        .scale_re(d_t.recip());

    // Pi'_1 spans the null space of tau_1, scaled to trace d.
    let spec = eigh(&tau_1)?;
    let null_tol = real_tol::<T>(tol::RANK).max(spec.max_value() * real_tol::<T>(tol::RANK));
    let null: Vec<usize> = (0..d).filter(|&k| spec.values[k] <= null_tol).collect();
    if null.is_empty() {
        return Err(Error::precondition(
            "conjugate seed has no null eigenspace; construction cannot proceed",
        ));
    }
    let weight = d_t / T::from_usize(null.len()).unwrap();
    let mut pi = ComplexMatrix::zeros(d, d);
    for &k in &null {
        let v = spec.vector(k);
        pi = &pi + &ComplexMatrix::outer(&v, &v).scale_re(weight);
    }
    let pi_prime_1 = HermitianMatrix::symmetrize(pi);

    finish_construction(ensemble, generators, pi_prime_1, tau_1, p_formula, None)
}

/// Group-covariant states: generators closed under products (up to a global
/// phase), uniform weights `lambda_g = 1/|G|`.
///
/// Closure failures are errors. If the Schur completeness
/// `sum_g Pi'_g / |G| = I` fails, the representation is reducible in a way
/// the uniform weights cannot absorb, and that too is an error.
pub fn solve_group_covariant<T: Scalar>(ensemble: &Ensemble<T>) -> Result<ClosedFormSolution<T>> {
    require_equal_priors(ensemble)?;
    let generators = require_generators(ensemble)?;
    check_group_closure(generators)?;

    let Some(seed) = seed_spectrum(ensemble.state(0))? else {
        return degenerate_uniform_solution(ensemble);
    };
    let d = ensemble.dim();
    let n = ensemble.len();
    let inv_n = T::from_usize(n).unwrap().recip();

    // Schur: the group average of the orbit must be proportional to I.
    let mut avg = HermitianMatrix::zeros(d);
    for u in generators.iter() {
        avg = avg.add(&seed.pi_prime_1.conjugate_by(u));
    }
    let avg = avg.scale_re(inv_n);
    let defect = avg.max_norm_diff(&HermitianMatrix::identity(d));
    if defect > real_tol::<T>(tol::RECONSTRUCT) {
        let commutant = commutant_dimension(generators)?;
        return Err(Error::precondition(format!(
            "uniform group average misses the identity by {:e} \
             (commutant dimension {commutant}); representation too reducible",
            defect.to_f64().unwrap_or(f64::NAN)
        )));
    }

    let p_formula = T::from_usize(d).unwrap() * inv_n * seed.a_max;
    finish_construction(
        ensemble,
        generators,
        seed.pi_prime_1,
        seed.tau_1,
        p_formula,
        Some(vec![inv_n; n]),
    )
}

/// Every pairwise product must match a listed element up to a global phase
/// (conjugation is phase-blind, so this is the closure that matters).
fn check_group_closure<T: Scalar>(generators: &UnitarySet<T>) -> Result<()> {
    let closure_tol = real_tol::<T>(tol::RECONSTRUCT);
    let d_t = T::from_usize(generators.dim()).unwrap();
    for (i, ui) in generators.iter().enumerate() {
        for (j, uj) in generators.iter().enumerate() {
            let prod = ui.mul_mat(uj);
            let matched = generators.iter().any(|uk| {
                // Best-aligning phase: e^{i alpha} with alpha from Tr(U_k† P).
                let overlap = uk.adjoint().mul_mat(&prod).trace();
                let mag = overlap.norm();
                if mag <= d_t * real::<T>(0.5) {
                    return false; // too unaligned for a phase match
                }
                let phase = overlap.unscale(mag);
                prod.max_norm_diff(&uk.scale(phase)) <= closure_tol
            });
            if !matched {
                return Err(Error::precondition(format!(
                    "generator products leave the set: U_{i} U_{j} matches no element",
                )));
            }
        }
    }
    Ok(())
}
