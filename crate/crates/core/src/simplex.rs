//! Phase-one simplex for feasibility of `A x = b, x ≥ 0`.
//!
//! Dense tableau with one artificial variable per row and Bland's rule for
//! both the entering and the leaving variable, so the pivot sequence is
//! deterministic and cannot cycle. An infeasible system comes back with a
//! Farkas ray `y` satisfying `Aᵀy ≤ 0` and `bᵀy = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Feasibility {
    /// A nonnegative solution of the system.
    Feasible(Vec<f64>),
    /// Farkas certificate: `Aᵀy ≤ 0` componentwise and `bᵀy = 1`.
    Infeasible(Vec<f64>),
}

/// Decides whether `a x = b` has a solution with `x ≥ 0`.
///
/// `tol` is the phase-one objective level (sum of artificials) below which
/// the system is declared feasible.
pub fn phase_one(a: &[Vec<f64>], b: &[f64], tol: f64) -> Result<Feasibility> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{m} constraint rows but {} right-hand sides",
            b.len()
        )));
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("ragged constraint matrix".into()));
    }
    if a.iter().flatten().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite constraint data".into()));
    }

    // Row signs so that the artificial basis starts feasible.
    let sign: Vec<f64> = b
        .iter()
        .map(|&x| if x < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = sign[i] * a[i][j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = sign[i] * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs for the phase-one objective Σ artificials.
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            cost[j] -= t[i * width + j];
        }
        cost[n + m] -= t[i * width + n + m];
    }

    loop {
        let entering = (0..n + m).find(|&j| cost[j] < -PIVOT_TOL && !basis.contains(&j));
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let piv = t[i * width + col];
            if piv > PIVOT_TOL {
                let ratio = t[i * width + n + m] / piv;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        // Phase one is bounded below by zero, so some row always qualifies.
        let Some((row, _)) = leave else {
            return Err(Error::InvalidParameter(
                "phase-one simplex found an unbounded direction".into(),
            ));
        };

        let piv = t[row * width + col];
        for k in 0..width {
            t[row * width + k] /= piv;
        }
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = t[i * width + col];
            if f != 0.0 {
                for k in 0..width {
                    t[i * width + k] -= f * t[row * width + k];
                }
            }
        }
        let f = cost[col];
        for k in 0..width {
            cost[k] -= f * t[row * width + k];
        }
        basis[row] = col;
    }

    let objective = -cost[n + m];
    if objective <= tol {
        let mut x = vec![0.0; n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[i * width + n + m].max(0.0);
            }
        }
        return Ok(Feasibility::Feasible(x));
    }

    // Simplex multipliers y = c_Bᵀ B⁻¹; B⁻¹ occupies the artificial columns.
    let mut y = vec![0.0; m];
    for (k, &bv) in basis.iter().enumerate() {
        if bv >= n {
            for i in 0..m {
                y[i] += t[k * width + n + i];
            }
        }
    }
    let by: f64 = y
        .iter()
        .zip(b)
        .zip(&sign)
        .map(|((yi, bi), s)| yi * s * bi)
        .sum();
    let y = y.iter().zip(&sign).map(|(yi, s)| yi * s / by).collect();
    Ok(Feasibility::Infeasible(y))
}

/// Checks a Farkas certificate against the system it claims to refute.
pub fn verify_certificate(a: &[Vec<f64>], b: &[f64], y: &[f64], tol: f64) -> bool {
    let by: f64 = b.iter().zip(y).map(|(p, q)| p * q).sum();
    if by <= tol {
        return false;
    }
    let n = a.first().map_or(0, Vec::len);
    (0..n).all(|j| a.iter().zip(y).map(|(row, yi)| row[j] * yi).sum::<f64>() <= tol)
}
