//! The solve and certify pipelines.

use std::fs;
use std::time::Instant;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use qmed::certify::{
    certify_optimal, complementarity, extract_helstrom_family, lagrange_operator, Certificate,
    HelstromFamily, Povm,
};
use qmed::closed_form::{
    solve_group_covariant, solve_irreducible, solve_latitude_for,
    ClosedFormSolution,
};
use qmed::ensemble::{commutant_dimension, Ensemble, SpinLatitudeParams};
use qmed::hermitian::eigh;
use qmed::io::{parse_ensemble_document, parse_povm_file, serialize_ensemble};
use qmed::oracle::{fixed_point_solve, OracleResult};

use crate::Method;

pub const ORACLE_MAX_ITER: usize = 20000;
pub const ORACLE_STEP_TOL: f64 = 1e-10;

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Closed-form dispatch: latitude construction when the document carried
/// latitude parameters, otherwise the irreducible or group-covariant route.
/// Returns the most successful attempt.
pub fn attempt_closed_form(
    ensemble: &Ensemble<f64>,
    latitude: Option<&SpinLatitudeParams<f64>>,
) -> Option<ClosedFormSolution<f64>> {
    let gens = ensemble.generators()?;
    if !ensemble.has_equal_priors() {
        return None;
    }

    let mut fallback: Option<ClosedFormSolution<f64>> = None;
    let mut keep_best = |sol: ClosedFormSolution<f64>| -> Option<ClosedFormSolution<f64>> {
        if sol.is_exact() {
            Some(sol)
        } else {
            if fallback.is_none() {
                fallback = Some(sol);
            }
            None
        }
    };

    if let Some(params) = latitude {
        if let Ok(sol) = solve_latitude_for(ensemble, params) {
            if let Some(sol) = keep_best(sol) {
                return Some(sol);
            }
        }
    }
    match commutant_dimension(gens) {
        Ok(1) => {
            if let Ok(sol) = solve_irreducible(ensemble) {
                if let Some(sol) = keep_best(sol) {
                    return Some(sol);
                }
            }
        }
        _ => {
            if let Ok(sol) = solve_group_covariant(ensemble) {
                if let Some(sol) = keep_best(sol) {
                    return Some(sol);
                }
            }
        }
    }
    fallback
}

struct FamilySummary {
    ratio: f64,
    /// Min eigenvalue of each conjugate; `None` marks a degenerate index.
    tau_min_eigenvalues: Vec<Option<f64>>,
}

fn summarize_family(family: &HelstromFamily<f64>) -> Result<FamilySummary> {
    let mut mins = Vec::with_capacity(family.len());
    for tau in &family.conjugates {
        match tau {
            Some(tau) => mins.push(Some(eigh(tau.hermitian())?.min_value())),
            None => mins.push(None),
        }
    }
    Ok(FamilySummary {
        ratio: family.ratio,
        tau_min_eigenvalues: mins,
    })
}

pub fn cmd_solve(path: &str, method: Method, tol: f64, json: bool, seed: u64) -> Result<u8> {
    let t_parse = Instant::now();
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let parsed = parse_ensemble_document::<f64>(&text)?;
    let ensemble = &parsed.ensemble;
    let digest = sha256_hex(&serialize_ensemble(ensemble));
    let parse_ms = t_parse.elapsed().as_secs_f64() * 1e3;

    let mut closed = None;
    let mut closed_ms = 0.0;
    if method != Method::Oracle {
        let t = Instant::now();
        closed = attempt_closed_form(ensemble, parsed.latitude.as_ref());
        closed_ms = t.elapsed().as_secs_f64() * 1e3;
    }
    let closed_is_exact = closed
        .as_ref()
        .is_some_and(|s| s.is_exact() && s.povm.is_some());

    let mut oracle: Option<OracleResult<f64>> = None;
    let mut oracle_ms = 0.0;
    if method != Method::Closed {
        let t = Instant::now();
        oracle = Some(fixed_point_solve(
            ensemble,
            ORACLE_MAX_ITER,
            ORACLE_STEP_TOL,
            seed,
        )?);
        oracle_ms = t.elapsed().as_secs_f64() * 1e3;
    }

    let applicability = closed
        .as_ref()
        .map(|s| s.applicability.as_str())
        .unwrap_or("not_attempted");
    let (povm, p_opt, method_used): (&Povm<f64>, f64, &str) = if closed_is_exact {
        let sol = closed.as_ref().unwrap();
        let used = if oracle.is_some() { "both" } else { "closed_form" };
        (sol.povm.as_ref().unwrap(), sol.p_opt, used)
    } else if let Some(orc) = oracle.as_ref() {
        (&orc.povm, orc.p, "oracle")
    } else {
        anyhow::bail!(
            "no closed form applies to this ensemble (applicability: {applicability}); \
             re-run with --method oracle or --method both"
        );
    };

    let t_cert = Instant::now();
    let mut certificate = certify_optimal(ensemble, povm, tol)?;
    let family = if certificate.passed() {
        match extract_helstrom_family(ensemble, povm, tol) {
            Ok(f) => {
                certificate.complementarity = Some(complementarity(&f, povm));
                Some(f)
            }
            Err(e) => {
                eprintln!("warning: certified but family extraction failed: {e}");
                None
            }
        }
    } else {
        None
    };
    let certify_ms = t_cert.elapsed().as_secs_f64() * 1e3;

    let label = if certificate.passed() {
        "optimal"
    } else {
        "best-found"
    };
    let family_summary = family.as_ref().map(summarize_family).transpose()?;

    eprintln!(
        "timings: parse {parse_ms:.2} ms, closed-form {closed_ms:.2} ms, \
         oracle {oracle_ms:.2} ms, certify {certify_ms:.2} ms"
    );

    if json {
        let report = serde_json::json!({
            "ensemble_digest": digest,
            "method_used": method_used,
            "p_opt": p_opt,
            "label": label,
            "applicability": applicability,
            "certificate": certificate.to_json(),
            "helstrom_family_summary": family_summary.as_ref().map(|s| serde_json::json!({
                "ratio": s.ratio,
                "tau_min_eigenvalues": s.tau_min_eigenvalues,
            })),
            "oracle": oracle.as_ref().map(|o| serde_json::json!({
                "p": o.p,
                "iterations": o.iterations,
                "converged": o.converged,
                "final_step_norm": o.final_step_norm,
                "monotonicity_violations": o.monotonicity_violations,
            })),
        });
        println!("{report}");
    } else {
        print_human_report(
            &digest,
            method_used,
            applicability,
            p_opt,
            label,
            &certificate,
            family_summary.as_ref(),
            oracle.as_ref(),
        );
    }

    Ok(if certificate.passed() { 0 } else { 2 })
}

#[allow(clippy::too_many_arguments)]
fn print_human_report(
    digest: &str,
    method_used: &str,
    applicability: &str,
    p_opt: f64,
    label: &str,
    certificate: &Certificate<f64>,
    family: Option<&FamilySummary>,
    oracle: Option<&OracleResult<f64>>,
) {
    println!("ensemble digest : {digest}");
    println!("method          : {method_used} (closed form: {applicability})");
    println!("p_opt           : {p_opt:.12} ({label})");
    println!(
        "certificate     : {} at tol {:.1e}",
        if certificate.passed() { "pass" } else { "FAIL" },
        certificate.tol
    );
    println!(
        "  hermiticity defect : {:.3e}",
        certificate.hermiticity_defect
    );
    println!(
        "  completeness defect: {:.3e}",
        certificate.povm_validity.completeness_defect
    );
    print!("  psd margins        :");
    for m in &certificate.psd_margins {
        print!(" {m:.3e}");
    }
    println!();
    println!(
        "  trace(M)           : {:.12}",
        certificate.implied_probability
    );
    if let Some(c) = &certificate.complementarity {
        print!("  complementarity    :");
        for v in c {
            print!(" {v:.3e}");
        }
        println!();
    }
    if let Some(f) = family {
        println!("helstrom family : ratio {:.12}", f.ratio);
        print!("  tau min eigenvalues:");
        for m in &f.tau_min_eigenvalues {
            match m {
                Some(m) => print!(" {m:.3e}"),
                None => print!(" (degenerate)"),
            }
        }
        println!();
    }
    if let Some(o) = oracle {
        println!(
            "oracle          : p {:.12}, {} iterations, converged {}, step norm {:.3e}",
            o.p, o.iterations, o.converged, o.final_step_norm
        );
    }
}

pub fn cmd_certify(ensemble_path: &str, povm_path: &str, tol: f64) -> Result<u8> {
    let ens_text =
        fs::read_to_string(ensemble_path).with_context(|| format!("reading {ensemble_path}"))?;
    let povm_text =
        fs::read_to_string(povm_path).with_context(|| format!("reading {povm_path}"))?;
    let ensemble = parse_ensemble_document::<f64>(&ens_text)?.ensemble;
    let povm = parse_povm_file::<f64>(&povm_text)?;
    if ensemble.dim() != povm.dim() {
        anyhow::bail!(
            "dimension mismatch: ensemble is {}-dimensional, POVM is {}-dimensional",
            ensemble.dim(),
            povm.dim()
        );
    }

    let certificate = certify_optimal(&ensemble, &povm, tol)?;
    let m = lagrange_operator(&ensemble, &povm)?;

    println!(
        "verdict  : {}",
        if certificate.passed() { "pass" } else { "fail" }
    );
    println!("p        : {:.12}", certificate.success_probability);
    println!("trace(M) : {:.12}", m.trace_re());
    println!("hermiticity defect : {:.3e}", certificate.hermiticity_defect);
    println!(
        "completeness defect: {:.3e}",
        certificate.povm_validity.completeness_defect
    );
    for (j, margin) in certificate.psd_margins.iter().enumerate() {
        println!("margin[{j}] : {margin:.6e}");
    }

    Ok(if certificate.passed() { 0 } else { 2 })
}
