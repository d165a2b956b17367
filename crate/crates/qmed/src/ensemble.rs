//! States, generating unitaries, and the ensemble builders.
//!
//! An ensemble pairs prior probabilities with density matrices; when the
//! states form the orbit of a seed under a list of unitaries (`U_1 = I`),
//! the list is kept alongside, since the analytic solvers need it.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hermitian::{eigh, HermitianMatrix};
use crate::matrix::ComplexMatrix;
use crate::scalar::{real, real_tol, tol, Scalar};

/// Density matrix: Hermitian, PSD within tolerance, unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Scalar> {
    matrix: HermitianMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates PSD (min eigenvalue >= -tol) and |trace - 1| <= tol.
    pub fn new_with_tol(matrix: HermitianMatrix<T>, tolerance: T) -> Result<Self> {
        let spec = eigh(&matrix)?;
        if spec.min_value() < -tolerance {
            return Err(Error::NotPsd {
                min_eigenvalue: spec.min_value().to_f64().unwrap_or(f64::NAN),
                tol: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        let trace_defect = (matrix.trace_re() - T::one()).abs();
        if trace_defect > tolerance {
            return Err(Error::precondition(format!(
                "density matrix trace deviates from 1 by {:e}",
                trace_defect.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { matrix })
    }

    pub fn new(matrix: HermitianMatrix<T>) -> Result<Self> {
        Self::new_with_tol(matrix, real_tol::<T>(tol::PSD))
    }

    /// Pure state |v><v| from a (not necessarily normalized) vector.
    pub fn pure(v: &[Complex<T>]) -> Self {
        Self {
            matrix: HermitianMatrix::projector(v),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim).scale_re(T::from_usize(dim).unwrap().recip()),
        }
    }

    /// Qubit state (I + a·σ)/2 from a Bloch vector with |a| <= 1.
    pub fn from_bloch(bloch: [T; 3]) -> Result<Self> {
        let [x, y, z] = bloch;
        let len = (x * x + y * y + z * z).sqrt();
        if len > T::one() + real_tol::<T>(tol::PSD) {
            return Err(Error::precondition(format!(
                "Bloch vector length {} exceeds 1",
                len.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let half = real::<T>(0.5);
        let m = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex::new(T::one() + z, T::zero()),
            (0, 1) => Complex::new(x, -y),
            (1, 0) => Complex::new(x, y),
            _ => Complex::new(T::one() - z, T::zero()),
        })
        .scale_re(half);
        Ok(Self {
            matrix: HermitianMatrix::symmetrize(m),
        })
    }

    /// Bloch vector (Tr ρσx, Tr ρσy, Tr ρσz) of a qubit state.
    pub fn bloch_vector(&self) -> [T; 3] {
        assert_eq!(self.dim(), 2, "Bloch vector is defined for qubits");
        let two = T::one() + T::one();
        let off = self.matrix.get(1, 0);
        [
            two * off.re,
            two * off.im,
            self.matrix.get(0, 0).re - self.matrix.get(1, 1).re,
        ]
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix<T> {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.matrix.matrix()
    }

    /// U ρ U†; stays a valid state for unitary U.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Self {
        Self {
            matrix: self.matrix.conjugate_by(u),
        }
    }
}

/// Ordered list of generating unitaries with `U_1 = I`.
#[derive(Debug, Clone)]
pub struct UnitarySet<T: Scalar> {
    dim: usize,
    unitaries: Vec<ComplexMatrix<T>>,
}

impl<T: Scalar> UnitarySet<T> {
    pub fn new(unitaries: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::precondition("unitary set must be non-empty"));
        }
        let dim = unitaries[0].rows();
        let unit_tol = real_tol::<T>(tol::UNITARITY);
        for (i, u) in unitaries.iter().enumerate() {
            u.expect_square(dim, "unitary set entries share one dimension")?;
            let defect = u.unitarity_defect();
            if defect > unit_tol {
                return Err(Error::NotUnitary {
                    index: i,
                    defect: defect.to_f64().unwrap_or(f64::NAN),
                    tol: tol::UNITARITY,
                });
            }
        }
        let id_defect = unitaries[0].max_norm_diff(&ComplexMatrix::identity(dim));
        if id_defect > real_tol::<T>(1e-10) {
            return Err(Error::precondition(format!(
                "first unitary must be the identity (defect {:e})",
                id_defect.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { dim, unitaries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn get(&self, i: usize) -> &ComplexMatrix<T> {
        &self.unitaries[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexMatrix<T>> {
        self.unitaries.iter()
    }
}

/// Prior probabilities paired with states; optionally the generating orbit.
#[derive(Debug, Clone)]
pub struct Ensemble<T: Scalar> {
    dim: usize,
    priors: Vec<T>,
    states: Vec<DensityMatrix<T>>,
    generators: Option<UnitarySet<T>>,
}

impl<T: Scalar> Ensemble<T> {
    pub fn new(
        priors: Vec<T>,
        states: Vec<DensityMatrix<T>>,
        generators: Option<UnitarySet<T>>,
    ) -> Result<Self> {
        if priors.is_empty() || priors.len() != states.len() {
            return Err(Error::precondition(format!(
                "priors ({}) and states ({}) must pair up and be non-empty",
                priors.len(),
                states.len()
            )));
        }
        if priors.iter().any(|&p| p < T::zero()) {
            return Err(Error::invalid("priors", "negative prior probability"));
        }
        let sum: T = priors.iter().copied().sum();
        if (sum - T::one()).abs() > real_tol::<T>(tol::PRIOR_SUM) {
            return Err(Error::invalid(
                "priors",
                format!("sum to {}, expected 1", sum.to_f64().unwrap_or(f64::NAN)),
            ));
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ensemble states share one dimension",
                    expected: dim,
                    got: s.dim(),
                });
            }
        }
        if let Some(gens) = &generators {
            if gens.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "generators match ensemble dimension",
                    expected: dim,
                    got: gens.dim(),
                });
            }
            if gens.len() != states.len() {
                return Err(Error::DimensionMismatch {
                    context: "one generator per state",
                    expected: states.len(),
                    got: gens.len(),
                });
            }
            let orbit_tol = real_tol::<T>(tol::PSD);
            for (i, u) in gens.iter().enumerate() {
                let expected = states[0].conjugate_by(u);
                let defect = expected.hermitian().max_norm_diff(states[i].hermitian());
                if defect > orbit_tol {
                    return Err(Error::precondition(format!(
                        "state {i} deviates from U_{i} rho_1 U_{i}† by {:e}",
                        defect.to_f64().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            priors,
            states,
            generators,
        })
    }

    pub fn equal_priors(
        states: Vec<DensityMatrix<T>>,
        generators: Option<UnitarySet<T>>,
    ) -> Result<Self> {
        let n = states.len();
        let p = T::from_usize(n)
            .ok_or_else(|| Error::precondition("state count out of range"))?
            .recip();
        Self::new(vec![p; n], states, generators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &DensityMatrix<T> {
        &self.states[i]
    }

    pub fn generators(&self) -> Option<&UnitarySet<T>> {
        self.generators.as_ref()
    }

    pub fn has_equal_priors(&self) -> bool {
        let p = T::from_usize(self.len()).unwrap().recip();
        self.priors
            .iter()
            .all(|&q| (q - p).abs() <= real_tol::<T>(tol::PRIOR_SUM))
    }

    /// Average state Σ p_i ρ_i.
    pub fn average_state(&self) -> HermitianMatrix<T> {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for (p, s) in self.priors.iter().zip(&self.states) {
            acc = acc.add(&s.hermitian().scale_re(*p));
        }
        acc
    }
}

/// Spin-j latitude orbit parameters; `two_j` encodes the half-integer spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinLatitudeParams<T: Scalar> {
    /// Twice the spin quantum number, so d = two_j + 1.
    pub two_j: u32,
    /// Purity parameter of the seed, 0 <= a <= 1/(2j).
    pub a: T,
    /// Polar angle of the seed axis, radians.
    pub theta: T,
    /// Azimuthal angle of the seed axis, radians.
    pub phi: T,
    /// Number of states in the rotation orbit.
    pub n: usize,
}

impl<T: Scalar> SpinLatitudeParams<T> {
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_j == 0 {
            return Err(Error::precondition("spin must satisfy j >= 1/2"));
        }
        if self.n < 2 {
            return Err(Error::precondition("orbit needs at least 2 states"));
        }
        let a_max = T::from_u32(self.two_j).unwrap().recip();
        if self.a < T::zero() || self.a > a_max + real_tol::<T>(1e-12) {
            return Err(Error::precondition(format!(
                "purity parameter a={} outside [0, 1/(2j)] = [0, {}]",
                self.a.to_f64().unwrap_or(f64::NAN),
                a_max.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }
}

/// Standard angular-momentum matrices (Jx, Jy, Jz) for spin j = two_j/2.
///
/// Basis ordering is m = j, j-1, ..., -j, so Jz is diagonal with descending
/// entries and the ladder operators connect adjacent rows.
pub fn spin_operators<T: Scalar>(
    two_j: u32,
) -> Result<(HermitianMatrix<T>, HermitianMatrix<T>, HermitianMatrix<T>)> {
    if two_j == 0 {
        return Err(Error::precondition("spin operators need 2j >= 1"));
    }
    let d = two_j as usize + 1;
    let j = T::from_u32(two_j).unwrap() * real::<T>(0.5);
    let m_of = |k: usize| j - T::from_usize(k).unwrap();

    let jz = HermitianMatrix::from_real_diagonal(&(0..d).map(m_of).collect::<Vec<_>>());

    // J+ has entries <m+1|J+|m> = sqrt(j(j+1) - m(m+1)) one step above the diagonal.
    let mut jplus = ComplexMatrix::<T>::zeros(d, d);
    for k in 1..d {
        let m = m_of(k);
        let val = (j * (j + T::one()) - m * (m + T::one())).sqrt();
        jplus.set(k - 1, k, Complex::new(val, T::zero()));
    }
    let jminus = jplus.adjoint();
    let half = real::<T>(0.5);
    let jx = HermitianMatrix::symmetrize((&jplus + &jminus).scale_re(half));
    let jy =
        HermitianMatrix::symmetrize((&jplus - &jminus).scale(Complex::new(T::zero(), -half)));
    Ok((jx, jy, jz))
}

/// n̂·J⃗ for a unit axis given by polar angles.
pub fn axis_spin_operator<T: Scalar>(two_j: u32, theta: T, phi: T) -> Result<HermitianMatrix<T>> {
    let (jx, jy, jz) = spin_operators::<T>(two_j)?;
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    Ok(jx
        .scale_re(st * cp)
        .add(&jy.scale_re(st * sp))
        .add(&jz.scale_re(ct)))
}

/// Orbit ensemble: states[i] = U_i seed U_i†, with the given priors.
pub fn similarity_ensemble<T: Scalar>(
    seed: &DensityMatrix<T>,
    unitaries: UnitarySet<T>,
    priors: Vec<T>,
) -> Result<Ensemble<T>> {
    if unitaries.dim() != seed.dim() {
        return Err(Error::DimensionMismatch {
            context: "seed and unitaries",
            expected: seed.dim(),
            got: unitaries.dim(),
        });
    }
    let states: Vec<_> = unitaries.iter().map(|u| seed.conjugate_by(u)).collect();
    Ensemble::new(priors, states, Some(unitaries))
}

/// Equiprobable spin-j rotation orbit:
/// seed (1/d)(I + 2a n̂·J⃗), generators U_k = exp(2πi(k-1) J_z / N).
pub fn cyclic_spin_ensemble<T: Scalar>(params: &SpinLatitudeParams<T>) -> Result<Ensemble<T>> {
    params.validate()?;
    let d = params.dim();
    let two_a = params.a + params.a;
    let axis = axis_spin_operator::<T>(params.two_j, params.theta, params.phi)?;
    let seed_h = HermitianMatrix::identity(d)
        .add(&axis.scale_re(two_a))
        .scale_re(T::from_usize(d).unwrap().recip());
    let seed = DensityMatrix::new(seed_h)?;

    // Jz is diagonal, so the rotations exponentiate entrywise.
    let j = T::from_u32(params.two_j).unwrap() * real::<T>(0.5);
    let n_t = T::from_usize(params.n).unwrap();
    let unitaries: Vec<ComplexMatrix<T>> = (0..params.n)
        .map(|k| {
            let angle_scale = T::TAU() * T::from_usize(k).unwrap() / n_t;
            let diag: Vec<Complex<T>> = (0..d)
                .map(|row| {
                    let m = j - T::from_usize(row).unwrap();
                    Complex::from_polar(T::one(), angle_scale * m)
                })
                .collect();
            ComplexMatrix::from_diagonal(&diag)
        })
        .collect();
    similarity_ensemble(
        &seed,
        UnitarySet::new(unitaries)?,
        vec![n_t.recip(); params.n],
    )
}

/// Equiprobable qubit states on a common Bloch latitude:
/// Bloch vectors (a sinθ cosφ_j, a sinθ sinφ_j, a cosθ), generators
/// U_j = diag(e^{-iφ_j/2}, e^{iφ_j/2}).
pub fn bloch_latitude_ensemble<T: Scalar>(a: T, theta: T, phis: &[T]) -> Result<Ensemble<T>> {
    if a < T::zero() || a > T::one() {
        return Err(Error::precondition(format!(
            "Bloch radius a={} outside [0, 1]",
            a.to_f64().unwrap_or(f64::NAN)
        )));
    }
    if phis.len() < 2 {
        return Err(Error::precondition(
            "latitude ensemble needs at least 2 states",
        ));
    }
    if phis[0].abs() > real_tol::<T>(1e-12) {
        return Err(Error::precondition("first azimuth must be 0"));
    }
    let tau = T::TAU();
    for i in 0..phis.len() {
        for k in (i + 1)..phis.len() {
            let mut diff = (phis[i] - phis[k]) % tau;
            if diff < T::zero() {
                diff += tau;
            }
            if diff.abs() < real_tol::<T>(1e-12) || (diff - tau).abs() < real_tol::<T>(1e-12) {
                return Err(Error::precondition(format!(
                    "azimuths {i} and {k} coincide modulo 2π"
                )));
            }
        }
    }
    let st = theta.sin();
    let seed = DensityMatrix::from_bloch([a * st, T::zero(), a * theta.cos()])?;
    let half = real::<T>(0.5);
    let unitaries: Vec<ComplexMatrix<T>> = phis
        .iter()
        .map(|&phi| {
            ComplexMatrix::from_diagonal(&[
                Complex::from_polar(T::one(), -phi * half),
                Complex::from_polar(T::one(), phi * half),
            ])
        })
        .collect();
    let n = phis.len();
    similarity_ensemble(
        &seed,
        UnitarySet::new(unitaries)?,
        vec![T::from_usize(n).unwrap().recip(); n],
    )
}

/// Dimension of the commutant {X : X U_i = U_i X for all i}.
///
/// Computed as the nullity of the stacked maps X -> U_i X - X U_i over the
/// d² complex unknowns; 1 means the generated representation is irreducible.
pub fn commutant_dimension<T: Scalar>(unitaries: &UnitarySet<T>) -> Result<usize> {
    let d = unitaries.dim();
    let dd = d * d;
    let id = ComplexMatrix::<T>::identity(d);

    // Gram matrix Σ L_i† L_i with L_i = U_i ⊗ I - I ⊗ U_iᵀ (row-major vec).
    let mut gram = HermitianMatrix::zeros(dd);
    for u in unitaries.iter() {
        let l = &u.kron(&id) - &id.kron(&u.transpose());
        gram = gram.add(&HermitianMatrix::symmetrize(l.adjoint().mul_mat(&l)));
    }

    let spec = eigh(&gram)?;
    let lambda_max = spec.max_value();
    if lambda_max <= T::zero() {
        return Ok(dd);
    }
    let cutoff = lambda_max * real_tol::<T>(tol::RANK);
    Ok(spec.values.iter().filter(|&&v| v <= cutoff).count())
}
