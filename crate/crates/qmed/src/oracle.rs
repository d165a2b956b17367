//! Independent numerical solvers used to cross-validate the closed forms.
//!
//! The workhorse is a completeness-preserving fixed-point iteration whose
//! fixed points satisfy the optimality conditions checked by
//! [`crate::certify`]. The square-root measurement and the two-state
//! Helstrom value give further independent reference points, and seeded
//! random POVMs feed the ratio-bound property tests.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::certify::{success_probability, Povm};
use crate::ensemble::{DensityMatrix, Ensemble};
use crate::error::{Error, Result};
use crate::hermitian::{eigh, pinv_psd, sqrt_psd, HermitianMatrix};
use crate::matrix::ComplexMatrix;
use crate::scalar::{real, real_tol, Scalar};

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct OracleResult<T: Scalar> {
    pub povm: Povm<T>,
    /// Success probability of `povm`.
    pub p: T,
    /// Iterations actually performed (across the returned attempt).
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the last element update.
    pub final_step_norm: T,
    /// Times the monitored success probability decreased by more than 1e-10.
    pub monotonicity_violations: usize,
}

/// Fixed-point iteration for the optimal measurement.
///
/// Each sweep maps `Pi_j <- T⁺ (p_j² rho_j Pi_j rho_j) T⁺` with
/// `T = sqrt(sum_k p_k² rho_k Pi_k rho_k)`, then redistributes any identity
/// defect uniformly so the POVM stays exactly complete. The first attempt
/// starts from the interior point `Pi_j = I/N`; if it stalls, up to two
/// seeded random restarts are tried and the best result returned.
pub fn fixed_point_solve<T: Scalar>(
    ensemble: &Ensemble<T>,
    max_iter: usize,
    step_tol: T,
    seed: u64,
) -> Result<OracleResult<T>> {
    if max_iter == 0 {
        return Err(Error::precondition("max_iter must be at least 1"));
    }
    let n = ensemble.len();
    let d = ensemble.dim();
    let uniform: Vec<HermitianMatrix<T>> =
        vec![HermitianMatrix::identity(d).scale_re(T::from_usize(n).unwrap().recip()); n];

    let mut best: Option<OracleResult<T>> = None;
    for attempt in 0..3u64 {
        let start = if attempt == 0 {
            uniform.clone()
        } else {
            perturbed_start(d, n, seed.wrapping_add(attempt))?
        };
        let result = run_iteration(ensemble, start, max_iter, step_tol)?;
        let better = match &best {
            None => true,
            Some(b) => (result.converged && !b.converged) || result.p > b.p + real::<T>(1e-12),
        };
        if better {
            best = Some(result);
        }
        if best.as_ref().is_some_and(|b| b.converged) {
            break;
        }
    }
    Ok(best.expect("at least one attempt ran"))
}

fn perturbed_start<T: Scalar>(d: usize, n: usize, seed: u64) -> Result<Vec<HermitianMatrix<T>>> {
    // I/N softened toward a random full-rank POVM keeps the start interior.
    let random = random_povm::<T>(d, n, seed)?;
    let w = real::<T>(0.1);
    let base = T::from_usize(n).unwrap().recip() * (T::one() - w);
    Ok(random
        .elements()
        .iter()
        .map(|e| HermitianMatrix::identity(d).scale_re(base).add(&e.scale_re(w)))
        .collect())
}

fn run_iteration<T: Scalar>(
    ensemble: &Ensemble<T>,
    mut elements: Vec<HermitianMatrix<T>>,
    max_iter: usize,
    step_tol: T,
) -> Result<OracleResult<T>> {
    let n = ensemble.len();
    let d = ensemble.dim();
    let redistribute_tol = real_tol::<T>(1e-12);
    let rank_tol = real_tol::<T>(1e-12);
    let id = HermitianMatrix::identity(d);

    let mut previous_p = T::neg_infinity();
    let mut monotonicity_violations = 0usize;
    let mut final_step_norm = T::infinity();
    let mut converged = false;
    let mut iterations = 0usize;

    for it in 0..max_iter {
        iterations = it + 1;

        // T² = sum_k p_k² rho_k Pi_k rho_k.
        let mut tsq = HermitianMatrix::zeros(d);
        let mut kernels: Vec<ComplexMatrix<T>> = Vec::with_capacity(n);
        for ((prior, state), pi) in ensemble
            .priors()
            .iter()
            .zip(ensemble.states())
            .zip(&elements)
        {
            let rho = state.matrix();
            let term = rho.mul_mat(pi.matrix()).mul_mat(rho).scale_re(*prior * *prior);
            tsq = tsq.add(&HermitianMatrix::symmetrize(term.clone()));
            kernels.push(term);
        }
        let t = sqrt_psd(&tsq)?;
        let t_pinv = pinv_psd(&t, rank_tol)?;

        let mut step_norm = T::zero();
        let mut next = Vec::with_capacity(n);
        for (pi_old, kernel) in elements.iter().zip(&kernels) {
            let updated = HermitianMatrix::symmetrize(
                t_pinv.matrix().mul_mat(kernel).mul_mat(t_pinv.matrix()),
            );
            step_norm = step_norm.max(updated.max_norm_diff(pi_old));
            next.push(updated);
        }

        // Re-project the sum onto the identity when the defect is visible.
        let mut sum = HermitianMatrix::zeros(d);
        for e in &next {
            sum = sum.add(e);
        }
        let defect = sum.max_norm_diff(&id);
        if defect > redistribute_tol {
            let correction = id.sub(&sum).scale_re(T::from_usize(n).unwrap().recip());
            for e in &mut next {
                *e = e.add(&correction);
            }
        }

        elements = next;

        let povm = Povm::new_unchecked(elements.clone())?;
        let p = success_probability(ensemble, &povm)?;
        if p < previous_p - real::<T>(1e-10) {
            monotonicity_violations += 1;
        }
        previous_p = p;

        final_step_norm = step_norm;
        if step_norm <= step_tol {
            converged = true;
            break;
        }
    }

    let povm = Povm::new_unchecked(elements)?;
    let p = success_probability(ensemble, &povm)?;
    Ok(OracleResult {
        povm,
        p,
        iterations,
        converged,
        final_step_norm,
        monotonicity_violations,
    })
}

/// Square-root measurement: `Pi_i = rhobar^{-1/2} p_i rho_i rhobar^{-1/2}`
/// on the support of the average state, with the kernel defect of the
/// identity redistributed uniformly so the POVM is exactly complete.
pub fn srm<T: Scalar>(ensemble: &Ensemble<T>) -> Result<Povm<T>> {
    let d = ensemble.dim();
    let n = ensemble.len();
    let avg = ensemble.average_state();
    let sqrt_avg = sqrt_psd(&avg)?;
    let inv_sqrt = pinv_psd(&sqrt_avg, real_tol::<T>(1e-12))?;

    let mut elements: Vec<HermitianMatrix<T>> = ensemble
        .priors()
        .iter()
        .zip(ensemble.states())
        .map(|(prior, state)| {
            HermitianMatrix::symmetrize(
                inv_sqrt
                    .matrix()
                    .mul_mat(state.matrix())
                    .mul_mat(inv_sqrt.matrix())
                    .scale_re(*prior),
            )
        })
        .collect();

    let mut sum = HermitianMatrix::zeros(d);
    for e in &elements {
        sum = sum.add(e);
    }
    let defect = HermitianMatrix::identity(d).sub(&sum);
    if defect.max_norm() > T::zero() {
        let share = defect.scale_re(T::from_usize(n).unwrap().recip());
        for e in &mut elements {
            *e = e.add(&share);
        }
    }
    Povm::new(elements)
}

/// Two-state Helstrom optimum `(1 + ||p1 rho1 - p2 rho2||_1) / 2`.
pub fn helstrom_two_state<T: Scalar>(
    p1: T,
    rho1: &DensityMatrix<T>,
    p2: T,
    rho2: &DensityMatrix<T>,
) -> Result<T> {
    if (p1 + p2 - T::one()).abs() > real_tol::<T>(1e-12) || p1 < T::zero() || p2 < T::zero() {
        return Err(Error::precondition(
            "two-state priors must be nonnegative and sum to 1",
        ));
    }
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            context: "two-state Helstrom states",
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    let gap = rho1.hermitian().scale_re(p1).sub(&rho2.hermitian().scale_re(p2));
    let tn = crate::hermitian::trace_norm(&gap)?;
    Ok((T::one() + tn) * real::<T>(0.5))
}

/// Seeded random POVM: Wishart-like PSD draws `A_i = G_i† G_i` whitened by
/// `S^{-1/2}` with `S = sum A_i`. Deterministic per seed.
pub fn random_povm<T: Scalar>(dim: usize, count: usize, seed: u64) -> Result<Povm<T>> {
    if count == 0 {
        return Err(Error::precondition("POVM needs at least one element"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..3 {
        let draws: Vec<HermitianMatrix<T>> = (0..count)
            .map(|_| {
                let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
                    // Box-Muller pairs from the seeded stream; sampled as f64
                    // then converted so every scalar type sees the same draw.
                    let u1: f64 = rng.random::<f64>().max(1e-12);
                    let u2: f64 = rng.random();
                    let r = (-2.0 * u1.ln()).sqrt();
                    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
                    Complex::new(real::<T>(r * c), real::<T>(r * s))
                });
                HermitianMatrix::symmetrize(g.adjoint().mul_mat(&g))
            })
            .collect();

        let mut s = HermitianMatrix::zeros(dim);
        for a in &draws {
            s = s.add(a);
        }
        let spec = eigh(&s)?;
        if spec.min_value() <= real_tol::<T>(1e-10) * spec.max_value() {
            continue; // singular draw; retry with fresh randomness
        }
        let inv_sqrt = spec.apply(|x| x.sqrt().recip());
        let elements = draws
            .iter()
            .map(|a| {
                HermitianMatrix::symmetrize(
                    inv_sqrt.matrix().mul_mat(a.matrix()).mul_mat(inv_sqrt.matrix()),
                )
            })
            .collect();
        return Povm::new(elements);
    }
    Err(Error::precondition(
        "random POVM draw produced a singular normalizer three times",
    ))
}
