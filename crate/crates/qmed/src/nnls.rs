//! Nonnegative least squares by the Lawson-Hanson active-set method.
//!
//! Sized for the feasibility systems this crate produces (at most a few
//! hundred rows, a handful of columns), so the passive-set subproblem is
//! solved through the normal equations with partial-pivot elimination
//! rather than incremental QR.

use crate::scalar::Scalar;

/// Solution of `min ||A x - b||` subject to `x >= 0`.
#[derive(Debug, Clone)]
pub struct NnlsSolution<T: Scalar> {
    pub x: Vec<T>,
    pub residual_norm: T,
}

/// Dense row-major real matrix view used only inside this module.
struct Dense<'a, T> {
    rows: usize,
    cols: usize,
    data: &'a [T],
}

impl<T: Scalar> Dense<'_, T> {
    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }
}

/// Lawson-Hanson NNLS. `a` is row-major with `rows * cols` entries.
///
/// Iteration is capped at `10 + 3 * cols` outer steps, ample for the
/// well-conditioned systems produced here; on hitting the cap the current
/// feasible iterate is returned (its residual tells the caller everything).
pub fn nnls<T: Scalar>(a: &[T], rows: usize, cols: usize, b: &[T]) -> NnlsSolution<T> {
    assert_eq!(a.len(), rows * cols, "matrix shape mismatch");
    assert_eq!(b.len(), rows, "rhs length mismatch");
    let a = Dense {
        rows,
        cols,
        data: a,
    };

    let mut x = vec![T::zero(); cols];
    let mut passive = vec![false; cols];
    let max_outer = 10 + 3 * cols;

    for _ in 0..max_outer {
        // Dual w = Aᵀ (b - A x); the most positive inactive coordinate enters.
        let resid = residual(&a, &x, b);
        let mut best: Option<(usize, T)> = None;
        for j in 0..cols {
            if passive[j] {
                continue;
            }
            let mut w = T::zero();
            for i in 0..rows {
                w += a.get(i, j) * resid[i];
            }
            if w > T::epsilon().sqrt() && best.map_or(true, |(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        let Some((enter, _)) = best else {
            break;
        };
        passive[enter] = true;

        // Inner loop: solve on the passive set, clip negatives back out.
        loop {
            let z = solve_passive(&a, b, &passive);
            let all_positive = passive
                .iter()
                .enumerate()
                .all(|(j, &p)| !p || z[j] > T::zero());
            if all_positive {
                x = z;
                break;
            }
            // Step from x toward z as far as feasibility allows.
            let mut alpha = T::infinity();
            for j in 0..cols {
                if passive[j] && z[j] <= T::zero() {
                    let denom = x[j] - z[j];
                    if denom > T::zero() {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = T::zero();
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = T::zero();
            }
            for j in 0..cols {
                if passive[j] {
                    x[j] = x[j] + alpha * (z[j] - x[j]);
                }
            }
            let floor = T::epsilon() * T::from_f64(16.0).unwrap();
            for j in 0..cols {
                if passive[j] && x[j] <= floor {
                    x[j] = T::zero();
                    passive[j] = false;
                }
            }
            if passive.iter().all(|&p| !p) {
                break;
            }
        }
    }

    let resid = residual(&a, &x, b);
    let residual_norm = resid.iter().map(|&r| r * r).sum::<T>().sqrt();
    NnlsSolution { x, residual_norm }
}

fn residual<T: Scalar>(a: &Dense<'_, T>, x: &[T], b: &[T]) -> Vec<T> {
    (0..a.rows)
        .map(|i| {
            let mut ax = T::zero();
            for j in 0..a.cols {
                if x[j] != T::zero() {
                    ax += a.get(i, j) * x[j];
                }
            }
            b[i] - ax
        })
        .collect()
}

/// Unconstrained least squares restricted to the passive columns, via the
/// normal equations with partial pivoting. Inactive coordinates come back 0.
fn solve_passive<T: Scalar>(a: &Dense<'_, T>, b: &[T], passive: &[bool]) -> Vec<T> {
    let idx: Vec<usize> = (0..a.cols).filter(|&j| passive[j]).collect();
    let k = idx.len();
    let mut full = vec![T::zero(); a.cols];
    if k == 0 {
        return full;
    }

    // Gram matrix and projected rhs.
    let mut g = vec![T::zero(); k * k];
    let mut rhs = vec![T::zero(); k];
    for (r, &jr) in idx.iter().enumerate() {
        for (c, &jc) in idx.iter().enumerate() {
            let mut s = T::zero();
            for i in 0..a.rows {
                s += a.get(i, jr) * a.get(i, jc);
            }
            g[r * k + c] = s;
        }
        let mut s = T::zero();
        for i in 0..a.rows {
            s += a.get(i, jr) * b[i];
        }
        rhs[r] = s;
    }

    // Gaussian elimination with partial pivoting.
    let mut perm: Vec<usize> = (0..k).collect();
    for col in 0..k {
        let (pivot_row, pivot_val) = (col..k)
            .map(|r| (r, g[perm[r] * k + col].abs()))
            .fold(
                (col, T::zero()),
                |acc, cur| if cur.1 > acc.1 { cur } else { acc },
            );
        if pivot_val <= T::epsilon() {
            continue; // singular direction; leave as zero
        }
        perm.swap(col, pivot_row);
        let prow = perm[col];
        for r in (col + 1)..k {
            let row = perm[r];
            let factor = g[row * k + col] / g[prow * k + col];
            if factor == T::zero() {
                continue;
            }
            for c in col..k {
                let v = g[row * k + c] - factor * g[prow * k + c];
                g[row * k + c] = v;
            }
            rhs[row] = rhs[row] - factor * rhs[prow];
        }
    }
    let mut z = vec![T::zero(); k];
    for col in (0..k).rev() {
        let row = perm[col];
        let mut acc = rhs[row];
        for c in (col + 1)..k {
            acc -= g[row * k + c] * z[c];
        }
        let diag = g[row * k + col];
        z[col] = if diag.abs() > T::epsilon() {
            acc / diag
        } else {
            T::zero()
        };
    }

    for (c, &j) in idx.iter().enumerate() {
        full[j] = z[c];
    }
    full
}
