//! On-disk JSON formats: ensemble documents, POVM files, and the matrix
//! encoding shared by both.
//!
//! An ensemble document is a single UTF-8 JSON object:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "priors": "equal",
//!   "states": [ { "bloch_latitude": { "a": 1.0, "theta": 1.5708,
//!                                     "phis": [0.0, 2.0944, 4.1888] } } ]
//! }
//! ```
//!
//! Each state entry is either an explicit `{"matrix": [[[re,im],...],...]}`
//! (row-major) or exactly one named constructor: `bloch` (one qubit state),
//! `bloch_latitude`, `spin_orbit`, or `orbit` (each expanding to several
//! states). Unknown keys are rejected; so is a state object carrying more
//! than one key. When the whole `states` list is a single expanding
//! constructor, the generating unitaries are kept on the parsed ensemble.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::certify::Povm;
use crate::closed_form::ClosedFormSolution;
use crate::ensemble::{
    bloch_latitude_ensemble, cyclic_spin_ensemble, similarity_ensemble, DensityMatrix, Ensemble,
    SpinLatitudeParams, UnitarySet,
};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::ComplexMatrix;
use crate::scalar::{real, real_tol, Scalar};

/// Row-major complex matrix as nested `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

/// Parsed document: the ensemble plus, when the document was a latitude or
/// spin-orbit constructor, the parameters the analytic solver wants.
#[derive(Debug, Clone)]
pub struct ParsedEnsemble<T: Scalar> {
    pub ensemble: Ensemble<T>,
    pub latitude: Option<SpinLatitudeParams<T>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EnsembleDoc {
    dim: usize,
    priors: PriorsSpec,
    states: Vec<StateSpec>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum PriorsSpec {
    Keyword(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize, Serialize)]
enum StateSpec {
    #[serde(rename = "matrix")]
    Matrix(MatrixJson),
    #[serde(rename = "bloch")]
    Bloch(BlochSpec),
    #[serde(rename = "bloch_latitude")]
    BlochLatitude(BlochLatitudeSpec),
    #[serde(rename = "spin_orbit")]
    SpinOrbit(SpinOrbitSpec),
    #[serde(rename = "orbit")]
    Orbit(OrbitSpec),
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BlochSpec {
    a: f64,
    theta: f64,
    phi: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BlochLatitudeSpec {
    a: f64,
    theta: f64,
    phis: Vec<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SpinOrbitSpec {
    two_j: u32,
    a: f64,
    theta: f64,
    phi: f64,
    n: usize,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct OrbitSpec {
    seed: Box<StateSpec>,
    unitaries: Vec<MatrixJson>,
}

/// Converts a JSON matrix into a complex matrix, checking squareness
/// against `dim`.
pub fn matrix_from_json<T: Scalar>(
    json: &MatrixJson,
    dim: usize,
    field: &str,
) -> Result<ComplexMatrix<T>> {
    if json.len() != dim {
        return Err(Error::invalid(
            field,
            format!("expected {dim} rows, found {}", json.len()),
        ));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (i, row) in json.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::invalid(
                format!("{field}[{i}]"),
                format!("expected {dim} columns, found {}", row.len()),
            ));
        }
        for &[re, im] in row {
            entries.push(Complex::new(real::<T>(re), real::<T>(im)));
        }
    }
    Ok(ComplexMatrix::from_entries(dim, dim, entries))
}

/// Encodes a complex matrix as nested `[re, im]` pairs.
pub fn matrix_to_json<T: Scalar>(m: &ComplexMatrix<T>) -> MatrixJson {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let e = m.get(i, j);
                    [
                        e.re.to_f64().unwrap_or(f64::NAN),
                        e.im.to_f64().unwrap_or(f64::NAN),
                    ]
                })
                .collect()
        })
        .collect()
}

fn density_from_json<T: Scalar>(
    json: &MatrixJson,
    dim: usize,
    field: &str,
) -> Result<DensityMatrix<T>> {
    let m = matrix_from_json::<T>(json, dim, field)?;
    let h = HermitianMatrix::from_matrix(m)
        .map_err(|e| Error::invalid(field, e.to_string()))?;
    DensityMatrix::new(h).map_err(|e| Error::invalid(field, e.to_string()))
}

fn single_state<T: Scalar>(spec: &StateSpec, dim: usize, field: &str) -> Result<DensityMatrix<T>> {
    match spec {
        StateSpec::Matrix(m) => density_from_json::<T>(m, dim, field),
        StateSpec::Bloch(b) => {
            if dim != 2 {
                return Err(Error::invalid(field, "bloch states require dim = 2"));
            }
            let (st, ct) = (b.theta.sin(), b.theta.cos());
            DensityMatrix::from_bloch([
                real::<T>(b.a * st * b.phi.cos()),
                real::<T>(b.a * st * b.phi.sin()),
                real::<T>(b.a * ct),
            ])
            .map_err(|e| Error::invalid(field, e.to_string()))
        }
        _ => Err(Error::invalid(
            field,
            "expected a single state (matrix or bloch), found an expanding constructor",
        )),
    }
}

/// Expansion of one state entry.
enum Expanded<T: Scalar> {
    One(DensityMatrix<T>),
    Many(Ensemble<T>, Option<SpinLatitudeParams<T>>),
}

fn expand_spec<T: Scalar>(spec: &StateSpec, dim: usize, field: &str) -> Result<Expanded<T>> {
    match spec {
        StateSpec::Matrix(_) | StateSpec::Bloch(_) => {
            Ok(Expanded::One(single_state::<T>(spec, dim, field)?))
        }
        StateSpec::BlochLatitude(spec) => {
            if dim != 2 {
                return Err(Error::invalid(field, "bloch_latitude requires dim = 2"));
            }
            let phis: Vec<T> = spec.phis.iter().map(|&p| real::<T>(p)).collect();
            let ens = bloch_latitude_ensemble(real::<T>(spec.a), real::<T>(spec.theta), &phis)
                .map_err(|e| Error::invalid(field, e.to_string()))?;
            let params = SpinLatitudeParams {
                two_j: 1,
                a: real::<T>(spec.a),
                theta: real::<T>(spec.theta),
                phi: T::zero(),
                n: spec.phis.len(),
            };
            Ok(Expanded::Many(ens, Some(params)))
        }
        StateSpec::SpinOrbit(spec) => {
            if dim != spec.two_j as usize + 1 {
                return Err(Error::invalid(
                    field,
                    format!("spin_orbit with two_j={} requires dim = {}", spec.two_j, spec.two_j as usize + 1),
                ));
            }
            let params = SpinLatitudeParams {
                two_j: spec.two_j,
                a: real::<T>(spec.a),
                theta: real::<T>(spec.theta),
                phi: real::<T>(spec.phi),
                n: spec.n,
            };
            let ens = cyclic_spin_ensemble(&params)
                .map_err(|e| Error::invalid(field, e.to_string()))?;
            Ok(Expanded::Many(ens, Some(params)))
        }
        StateSpec::Orbit(spec) => {
            let seed = single_state::<T>(&spec.seed, dim, &format!("{field}.seed"))?;
            let unitaries: Vec<ComplexMatrix<T>> = spec
                .unitaries
                .iter()
                .enumerate()
                .map(|(k, u)| matrix_from_json::<T>(u, dim, &format!("{field}.unitaries[{k}]")))
                .collect::<Result<_>>()?;
            let set = UnitarySet::new(unitaries)
                .map_err(|e| Error::invalid(format!("{field}.unitaries"), e.to_string()))?;
            let n = set.len();
            let ens = similarity_ensemble(&seed, set, vec![T::from_usize(n).unwrap().recip(); n])
                .map_err(|e| Error::invalid(field, e.to_string()))?;
            Ok(Expanded::Many(ens, None))
        }
    }
}

/// Parses an ensemble document, keeping constructor metadata.
pub fn parse_ensemble_document<T: Scalar>(text: &str) -> Result<ParsedEnsemble<T>> {
    let doc: EnsembleDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.dim == 0 {
        return Err(Error::invalid("dim", "dimension must be positive"));
    }
    if doc.states.is_empty() {
        return Err(Error::invalid("states", "at least one state is required"));
    }

    // Whole-document constructor: generators survive.
    if doc.states.len() == 1 {
        if let Expanded::Many(ens, latitude) = expand_spec::<T>(&doc.states[0], doc.dim, "states[0]")? {
            let ens = apply_priors(ens, &doc.priors)?;
            return Ok(ParsedEnsemble {
                ensemble: ens,
                latitude,
            });
        }
    }

    // Otherwise expand in place; the states lose any orbit structure.
    let mut states = Vec::new();
    for (i, spec) in doc.states.iter().enumerate() {
        match expand_spec::<T>(spec, doc.dim, &format!("states[{i}]"))? {
            Expanded::One(s) => states.push(s),
            Expanded::Many(ens, _) => states.extend(ens.states().iter().cloned()),
        }
    }
    let n = states.len();
    let ens = Ensemble::new(resolve_priors(&doc.priors, n)?, states, None)?;
    Ok(ParsedEnsemble {
        ensemble: ens,
        latitude: None,
    })
}

fn resolve_priors<T: Scalar>(spec: &PriorsSpec, n: usize) -> Result<Vec<T>> {
    match spec {
        PriorsSpec::Keyword(k) if k == "equal" => {
            Ok(vec![T::from_usize(n).unwrap().recip(); n])
        }
        PriorsSpec::Keyword(k) => Err(Error::invalid(
            "priors",
            format!("unknown keyword {k:?}; expected \"equal\" or a list"),
        )),
        PriorsSpec::List(list) => {
            if list.len() != n {
                return Err(Error::invalid(
                    "priors",
                    format!("{} entries for {n} states", list.len()),
                ));
            }
            Ok(list.iter().map(|&p| real::<T>(p)).collect())
        }
    }
}

fn apply_priors<T: Scalar>(ens: Ensemble<T>, spec: &PriorsSpec) -> Result<Ensemble<T>> {
    let priors = resolve_priors::<T>(spec, ens.len())?;
    let generators = ens.generators().cloned();
    Ensemble::new(priors, ens.states().to_vec(), generators)
}

/// Parses an ensemble document, discarding constructor metadata.
pub fn parse_ensemble_file<T: Scalar>(text: &str) -> Result<Ensemble<T>> {
    Ok(parse_ensemble_document::<T>(text)?.ensemble)
}

/// Canonical serialization. Orbit structure is preserved through the
/// `orbit` constructor; plain ensembles are written as explicit matrices.
/// Priors are always written out, so the output is digest-stable and
/// round-trips exactly.
pub fn serialize_ensemble<T: Scalar>(ensemble: &Ensemble<T>) -> String {
    let priors = PriorsSpec::List(
        ensemble
            .priors()
            .iter()
            .map(|p| p.to_f64().unwrap_or(f64::NAN))
            .collect(),
    );
    let states = match ensemble.generators() {
        Some(gens) => vec![StateSpec::Orbit(OrbitSpec {
            seed: Box::new(StateSpec::Matrix(matrix_to_json(ensemble.state(0).matrix()))),
            unitaries: gens.iter().map(matrix_to_json).collect(),
        })],
        None => ensemble
            .states()
            .iter()
            .map(|s| StateSpec::Matrix(matrix_to_json(s.matrix())))
            .collect(),
    };
    let doc = EnsembleDoc {
        dim: ensemble.dim(),
        priors,
        states,
    };
    serde_json::to_string_pretty(&doc).expect("ensemble document serializes")
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PovmDoc {
    dim: usize,
    elements: Vec<MatrixJson>,
}

/// Parses a POVM file `{"dim": d, "elements": [matrix, ...]}`.
pub fn parse_povm_file<T: Scalar>(text: &str) -> Result<Povm<T>> {
    let doc: PovmDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let elements: Vec<HermitianMatrix<T>> = doc
        .elements
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let field = format!("elements[{i}]");
            let m = matrix_from_json::<T>(m, doc.dim, &field)?;
            HermitianMatrix::from_matrix_with_tol(m, real_tol::<T>(1e-9))
                .map_err(|e| Error::invalid(field, e.to_string()))
        })
        .collect::<Result<_>>()?;
    Povm::new_unchecked(elements)
}

/// Serializes a POVM to the file format.
pub fn serialize_povm<T: Scalar>(povm: &Povm<T>) -> String {
    let doc = PovmDoc {
        dim: povm.dim(),
        elements: povm.elements().iter().map(|e| matrix_to_json(e.matrix())).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("POVM document serializes")
}

/// Closed-form solution JSON:
/// `{"p_opt", "applicability", "lambdas", "pi_prime_1", "tau_1", "povm"}`.
pub fn solution_to_json<T: Scalar>(sol: &ClosedFormSolution<T>) -> serde_json::Value {
    serde_json::json!({
        "p_opt": sol.p_opt.to_f64().unwrap_or(f64::NAN),
        "applicability": sol.applicability.as_str(),
        "lambdas": sol.lambdas.iter().map(|l| l.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
        "pi_prime_1": matrix_to_json(sol.pi_prime_1.matrix()),
        "tau_1": sol.tau_1.as_ref().map(|t| matrix_to_json(t.matrix())),
        "povm": sol.povm.as_ref().map(|p| {
            p.elements().iter().map(|e| matrix_to_json(e.matrix())).collect::<Vec<_>>()
        }),
    })
}
