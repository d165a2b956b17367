//! Optimality certification for minimum-error discrimination.
//!
//! A POVM `{Pi_j}` is optimal for an ensemble `{p_j, rho_j}` exactly when
//! the Lagrange operator `M = sum_i p_i rho_i Pi_i` is Hermitian and
//! `M - p_j rho_j` is PSD for every `j`. The certificate carries the raw
//! numeric margins of those conditions rather than just a verdict, and the
//! same operator data yields the Helstrom family of conjugate ensembles:
//! `M = p_j rho_j + (p - p_j) tau_j` with `tau_j` a rank-deficient state
//! orthogonal to `Pi_j`.

use serde::Serialize;

use crate::ensemble::{DensityMatrix, Ensemble};
use crate::error::{Error, Result};
use crate::hermitian::{eigh, HermitianMatrix};
use crate::matrix::ComplexMatrix;
use crate::scalar::{real, real_tol, tol, Scalar};

/// Positive operator-valued measure: PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm<T: Scalar> {
    dim: usize,
    elements: Vec<HermitianMatrix<T>>,
}

/// Numeric health of a POVM; all entries are defects (0 is perfect).
#[derive(Debug, Clone, Copy)]
pub struct PovmValidity<T> {
    /// Most negative element eigenvalue, sign-flipped (0 when all PSD).
    pub psd_defect: T,
    /// Max-norm of `sum Pi_i - I`.
    pub completeness_defect: T,
}

impl<T: Scalar> Povm<T> {
    /// Validating constructor: elements PSD within `tol::PSD`, completeness
    /// within `tol::RECONSTRUCT`.
    pub fn new(elements: Vec<HermitianMatrix<T>>) -> Result<Self> {
        let povm = Self::new_unchecked(elements)?;
        let v = povm.validity()?;
        if v.psd_defect > real_tol::<T>(tol::PSD) {
            return Err(Error::NotPsd {
                min_eigenvalue: -v.psd_defect.to_f64().unwrap_or(f64::NAN),
                tol: tol::PSD,
            });
        }
        if v.completeness_defect > real_tol::<T>(tol::RECONSTRUCT) {
            return Err(Error::precondition(format!(
                "POVM completeness defect {:e} exceeds {:e}",
                v.completeness_defect.to_f64().unwrap_or(f64::NAN),
                tol::RECONSTRUCT
            )));
        }
        Ok(povm)
    }

    /// Shape-checked but not numerically validated; for intermediate
    /// assembly and for POVM candidates whose defects should show up in a
    /// certificate rather than an error.
    pub fn new_unchecked(elements: Vec<HermitianMatrix<T>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::precondition("POVM must have at least one element"));
        }
        let dim = elements[0].dim();
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "POVM elements share one dimension",
                    expected: dim,
                    got: e.dim(),
                });
            }
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &HermitianMatrix<T> {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[HermitianMatrix<T>] {
        &self.elements
    }

    pub fn sum(&self) -> HermitianMatrix<T> {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for e in &self.elements {
            acc = acc.add(e);
        }
        acc
    }

    pub fn validity(&self) -> Result<PovmValidity<T>> {
        let mut psd_defect = T::zero();
        for e in &self.elements {
            let spec = eigh(e)?;
            psd_defect = psd_defect.max(-spec.min_value());
        }
        let completeness_defect = self
            .sum()
            .max_norm_diff(&HermitianMatrix::identity(self.dim));
        Ok(PovmValidity {
            psd_defect,
            completeness_defect,
        })
    }

    /// Conjugates every element by one fixed unitary.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(|e| e.conjugate_by(u)).collect(),
        }
    }
}

/// The operator `M = sum_i p_i rho_i Pi_i`, kept unsymmetrized so its
/// Hermiticity defect can be reported (it vanishes at a true optimum).
#[derive(Debug, Clone)]
pub struct LagrangeOperator<T: Scalar> {
    pub matrix: ComplexMatrix<T>,
    pub hermiticity_defect: T,
}

impl<T: Scalar> LagrangeOperator<T> {
    /// (M + M†)/2, the operator actually certified against.
    pub fn symmetrized(&self) -> HermitianMatrix<T> {
        HermitianMatrix::symmetrize(self.matrix.clone())
    }

    pub fn trace_re(&self) -> T {
        self.matrix.trace().re
    }
}

/// Helstrom family attached to an ensemble: the common ratio `p` and the
/// conjugate states `tau_j`. Indices where `p = p_j` leave `tau_j`
/// undefined and are flagged instead.
#[derive(Debug, Clone)]
pub struct HelstromFamily<T: Scalar> {
    pub ratio: T,
    pub conjugates: Vec<Option<DensityMatrix<T>>>,
    pub degenerate: Vec<bool>,
}

impl<T: Scalar> HelstromFamily<T> {
    pub fn len(&self) -> usize {
        self.conjugates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjugates.is_empty()
    }
}

/// Verdict of the optimality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Optimality certificate with raw margins for every condition.
#[derive(Debug, Clone)]
pub struct Certificate<T: Scalar> {
    /// `sum_i p_i Tr(rho_i Pi_i)`.
    pub success_probability: T,
    /// Max-norm of `M - M†`.
    pub hermiticity_defect: T,
    /// Min eigenvalue of `M_sym - p_j rho_j` for each j.
    pub psd_margins: Vec<T>,
    /// `Tr(tau_j Pi_j)` per j when a Helstrom family has been attached.
    pub complementarity: Option<Vec<T>>,
    pub verdict: Verdict,
    /// Tolerance the verdict was decided at.
    pub tol: T,
    /// POVM health at certification time (diagnostic; folded into verdict).
    pub povm_validity: PovmValidity<T>,
    /// Re Tr(M), the optimum the conditions imply when they hold.
    pub implied_probability: T,
}

impl<T: Scalar> Certificate<T> {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn min_margin(&self) -> T {
        self.psd_margins
            .iter()
            .copied()
            .fold(T::infinity(), T::min)
    }

    /// JSON document per the external interface:
    /// `{"verdict", "p", "hermiticity_defect", "psd_margins", "complementarity", "tol"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let f = |x: &T| x.to_f64().unwrap_or(f64::NAN);
        serde_json::json!({
            "verdict": if self.passed() { "pass" } else { "fail" },
            "p": f(&self.success_probability),
            "hermiticity_defect": f(&self.hermiticity_defect),
            "psd_margins": self.psd_margins.iter().map(f).collect::<Vec<_>>(),
            "complementarity": self.complementarity.as_ref().map(|v| v.iter().map(f).collect::<Vec<_>>()),
            "tol": f(&self.tol),
        })
    }
}

fn check_counts<T: Scalar>(ensemble: &Ensemble<T>, povm: &Povm<T>) -> Result<()> {
    if ensemble.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "ensemble and POVM dimensions",
            expected: ensemble.dim(),
            got: povm.dim(),
        });
    }
    if ensemble.len() != povm.len() {
        return Err(Error::DimensionMismatch {
            context: "one POVM element per state",
            expected: ensemble.len(),
            got: povm.len(),
        });
    }
    Ok(())
}

/// Success probability `sum_i p_i Tr(rho_i Pi_i)`.
pub fn success_probability<T: Scalar>(ensemble: &Ensemble<T>, povm: &Povm<T>) -> Result<T> {
    check_counts(ensemble, povm)?;
    let mut p = T::zero();
    for ((prior, state), element) in ensemble
        .priors()
        .iter()
        .zip(ensemble.states())
        .zip(povm.elements())
    {
        p += *prior * state.matrix().trace_product_re(element.matrix());
    }
    Ok(p)
}

/// The Lagrange operator `M = sum_i p_i rho_i Pi_i`, computed exactly as
/// written (no symmetrization), with its Hermiticity defect.
pub fn lagrange_operator<T: Scalar>(
    ensemble: &Ensemble<T>,
    povm: &Povm<T>,
) -> Result<LagrangeOperator<T>> {
    check_counts(ensemble, povm)?;
    let d = ensemble.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for ((prior, state), element) in ensemble
        .priors()
        .iter()
        .zip(ensemble.states())
        .zip(povm.elements())
    {
        let term = state.matrix().mul_mat(element.matrix()).scale_re(*prior);
        m = &m + &term;
    }
    let hermiticity_defect = m.hermiticity_defect();
    Ok(LagrangeOperator {
        matrix: m,
        hermiticity_defect,
    })
}

/// Checks the necessary-and-sufficient optimality conditions at `tolerance`.
///
/// In order: POVM validity, Hermiticity of `M`, and `M_sym - p_j rho_j >= 0`
/// for every `j`. Violations become a failing certificate, not an error;
/// only dimension mismatches throw.
pub fn certify_optimal<T: Scalar>(
    ensemble: &Ensemble<T>,
    povm: &Povm<T>,
    tolerance: T,
) -> Result<Certificate<T>> {
    check_counts(ensemble, povm)?;
    let povm_validity = povm.validity()?;
    let povm_ok = povm_validity.psd_defect <= real_tol::<T>(tol::PSD)
        && povm_validity.completeness_defect <= real_tol::<T>(tol::RECONSTRUCT);

    let lagrange = lagrange_operator(ensemble, povm)?;
    let m_sym = lagrange.symmetrized();

    let mut psd_margins = Vec::with_capacity(ensemble.len());
    for (prior, state) in ensemble.priors().iter().zip(ensemble.states()) {
        let gap = m_sym.sub(&state.hermitian().scale_re(*prior));
        psd_margins.push(eigh(&gap)?.min_value());
    }

    let margins_ok = psd_margins.iter().all(|&m| m >= -tolerance);
    let hermitian_ok = lagrange.hermiticity_defect <= tolerance;
    let verdict = if povm_ok && hermitian_ok && margins_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    Ok(Certificate {
        success_probability: success_probability(ensemble, povm)?,
        hermiticity_defect: lagrange.hermiticity_defect,
        psd_margins,
        complementarity: None,
        verdict,
        tol: tolerance,
        povm_validity,
        implied_probability: lagrange.trace_re(),
    })
}

/// Extracts the Helstrom family from a certified optimum:
/// `tau_j = (M_sym - p_j rho_j) / (p - p_j)` for non-degenerate `j`.
///
/// Each extracted conjugate is validated as a density matrix (within
/// `10 * tolerance`). A conjugate whose outcome is actually used
/// (`Tr Pi_j` above tolerance) must additionally be rank-deficient, since
/// `tau_j Pi_j = 0` forces a kernel; violating that means the input was not
/// truly optimal and is an error. A strictly dominated state has `Pi_j = 0`
/// at the optimum and its conjugate is legitimately full rank, so unused
/// outcomes are exempt from the rank check.
pub fn extract_helstrom_family<T: Scalar>(
    ensemble: &Ensemble<T>,
    povm: &Povm<T>,
    tolerance: T,
) -> Result<HelstromFamily<T>> {
    let cert = certify_optimal(ensemble, povm, tolerance)?;
    if !cert.passed() {
        return Err(Error::precondition(format!(
            "cannot extract a Helstrom family from an uncertified POVM \
             (min margin {:e}, hermiticity defect {:e})",
            cert.min_margin().to_f64().unwrap_or(f64::NAN),
            cert.hermiticity_defect.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let p = cert.success_probability;
    let max_prior = ensemble
        .priors()
        .iter()
        .copied()
        .fold(T::zero(), T::max);
    if p < max_prior - real_tol::<T>(1e-10) {
        return Err(Error::precondition(
            "Helstrom ratio below the largest prior; weights α_j would be negative",
        ));
    }

    let m_sym = lagrange_operator(ensemble, povm)?.symmetrized();
    let loose = tolerance * real::<T>(10.0);
    let mut conjugates = Vec::with_capacity(ensemble.len());
    let mut degenerate = Vec::with_capacity(ensemble.len());

    for (j, (prior, state)) in ensemble.priors().iter().zip(ensemble.states()).enumerate() {
        let alpha = p - *prior;
        if alpha <= tolerance {
            degenerate.push(true);
            conjugates.push(None);
            continue;
        }
        let tau = m_sym
            .sub(&state.hermitian().scale_re(*prior))
            .scale_re(alpha.recip());
        let tau = DensityMatrix::new_with_tol(tau, loose).map_err(|e| {
            Error::precondition(format!(
                "conjugate state {j} fails validation ({e}); the POVM is not truly optimal"
            ))
        })?;
        // Dominated outcomes retain iteration dust well below sqrt(tol);
        // genuinely used outcomes sit orders of magnitude above it.
        let outcome_used = povm.element(j).trace_re() > tolerance.sqrt();
        let min_eig = eigh(tau.hermitian())?.min_value();
        if outcome_used && min_eig > tolerance {
            return Err(Error::precondition(format!(
                "conjugate state {j} is full rank (min eigenvalue {:e}) although \
                 its outcome is used; an optimal measurement requires a zero eigenvalue",
                min_eig.to_f64().unwrap_or(f64::NAN)
            )));
        }
        degenerate.push(false);
        conjugates.push(Some(tau));
    }

    Ok(HelstromFamily {
        ratio: p,
        conjugates,
        degenerate,
    })
}

/// Verifies the pairwise family identity
/// `p_i rho_i + (p - p_i) tau_i = p_j rho_j + (p - p_j) tau_j`
/// over all non-degenerate indices. Returns the truth value at `tolerance`
/// together with the worst defect.
pub fn verify_helstrom_family<T: Scalar>(
    ensemble: &Ensemble<T>,
    family: &HelstromFamily<T>,
    tolerance: T,
) -> Result<(bool, T)> {
    if family.len() != ensemble.len() {
        return Err(Error::DimensionMismatch {
            context: "family indices align with ensemble",
            expected: ensemble.len(),
            got: family.len(),
        });
    }
    let members: Vec<HermitianMatrix<T>> = ensemble
        .priors()
        .iter()
        .zip(ensemble.states())
        .zip(&family.conjugates)
        .filter_map(|((prior, state), tau)| {
            tau.as_ref().map(|tau| {
                state
                    .hermitian()
                    .scale_re(*prior)
                    .add(&tau.hermitian().scale_re(family.ratio - *prior))
            })
        })
        .collect();

    let mut defect = T::zero();
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            defect = defect.max(members[i].max_norm_diff(&members[j]));
        }
    }
    Ok((defect <= tolerance, defect))
}

/// The ratio bound: any valid POVM scores at most the family ratio
/// (`p_opt <= p`, with 1e-9 slack for rounding).
pub fn ratio_upper_bound_check<T: Scalar>(
    ensemble: &Ensemble<T>,
    family: &HelstromFamily<T>,
    povm_any: &Povm<T>,
) -> Result<bool> {
    let p_any = success_probability(ensemble, povm_any)?;
    Ok(p_any <= family.ratio + real_tol::<T>(1e-9))
}

/// `Tr(tau_j Pi_j)` per index; 0 where the family is degenerate. This is the
/// complementarity witness: it vanishes at a true optimum.
pub fn complementarity<T: Scalar>(family: &HelstromFamily<T>, povm: &Povm<T>) -> Vec<T> {
    family
        .conjugates
        .iter()
        .zip(povm.elements())
        .map(|(tau, pi)| {
            tau.as_ref()
                .map(|tau| tau.matrix().trace_product_re(pi.matrix()))
                .unwrap_or_else(T::zero)
        })
        .collect()
}
