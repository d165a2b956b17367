//! Example ensemble file generation.

use std::fs;

use anyhow::{bail, Context, Result};
use serde_json::json;

use qmed::io::parse_ensemble_file;

pub fn cmd_gen(
    kind: &str,
    a: Option<f64>,
    theta: Option<f64>,
    phi: Option<f64>,
    n: Option<usize>,
    two_j: Option<u32>,
    out: &str,
) -> Result<u8> {
    let doc = match kind {
        "trine" => {
            let phis: Vec<f64> = (0..3)
                .map(|k| std::f64::consts::TAU * k as f64 / 3.0)
                .collect();
            json!({
                "dim": 2,
                "priors": "equal",
                "states": [ { "bloch_latitude": {
                    "a": a.unwrap_or(1.0),
                    "theta": std::f64::consts::FRAC_PI_2,
                    "phis": phis,
                } } ],
            })
        }
        "pair" => {
            json!({
                "dim": 2,
                "priors": "equal",
                "states": [ { "bloch_latitude": {
                    "a": a.unwrap_or(0.6),
                    "theta": theta.unwrap_or(std::f64::consts::FRAC_PI_2),
                    "phis": [0.0, std::f64::consts::PI],
                } } ],
            })
        }
        "latitude" => {
            let count = n.unwrap_or(3);
            if count < 2 {
                bail!("latitude ensembles need --n of at least 2");
            }
            let phis: Vec<f64> = (0..count)
                .map(|k| std::f64::consts::TAU * k as f64 / count as f64)
                .collect();
            json!({
                "dim": 2,
                "priors": "equal",
                "states": [ { "bloch_latitude": {
                    "a": a.unwrap_or(0.6),
                    "theta": theta.unwrap_or(std::f64::consts::FRAC_PI_2),
                    "phis": phis,
                } } ],
            })
        }
        "spin" => {
            let two_j = two_j.unwrap_or(2);
            json!({
                "dim": two_j as usize + 1,
                "priors": "equal",
                "states": [ { "spin_orbit": {
                    "two_j": two_j,
                    "a": a.unwrap_or(0.3),
                    "theta": theta.unwrap_or(std::f64::consts::FRAC_PI_3),
                    "phi": phi.unwrap_or(0.0),
                    "n": n.unwrap_or(4),
                } } ],
            })
        }
        other => bail!("unknown ensemble kind `{other}`"),
    };

    let text = serde_json::to_string_pretty(&doc)?;
    parse_ensemble_file::<f64>(&text)
        .context("generated document failed to parse; parameters are invalid")?;
    fs::write(out, &text).with_context(|| format!("writing {out}"))?;
    eprintln!("wrote {kind} ensemble to {out}");
    Ok(0)
}
