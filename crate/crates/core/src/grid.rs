//! Mixed-radix encoding of outcome tuples as single integer outcomes.
//!
//! The first coordinate is the most significant digit, so codes enumerate the
//! product grid in row-major order.

use crate::error::{Error, Result};
use crate::Outcome;

/// Number of cells in the product grid, or `None` on overflow.
pub fn cell_count(radices: &[usize]) -> Option<usize> {
    radices
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
}

pub fn encode(indices: &[usize], radices: &[usize]) -> Result<Outcome> {
    if indices.len() != radices.len() {
        return Err(Error::InvalidParameter(format!(
            "tuple of length {} for {} factors",
            indices.len(),
            radices.len()
        )));
    }
    let mut code: Outcome = 0;
    for (&i, &r) in indices.iter().zip(radices) {
        if i >= r {
            return Err(Error::InvalidParameter(format!(
                "digit {i} out of range for radix {r}"
            )));
        }
        code = code * r as Outcome + i as Outcome;
    }
    Ok(code)
}

pub fn decode(code: Outcome, radices: &[usize]) -> Result<Vec<usize>> {
    let mut rest = code;
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        if r == 0 {
            return Err(Error::InvalidParameter("zero radix".into()));
        }
        *slot = (rest % r as Outcome) as usize;
        rest /= r as Outcome;
    }
    if rest != 0 {
        return Err(Error::InvalidParameter(format!(
            "code {code} is outside the grid {radices:?}"
        )));
    }
    Ok(out)
}

/// Iterates over all index tuples of the grid in code order.
pub fn tuples(radices: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total = cell_count(radices).unwrap_or(0);
    let mut current = vec![0usize; radices.len()];
    let mut emitted = 0usize;
    std::iter::from_fn(move || {
        if emitted == total {
            return None;
        }
        let out = current.clone();
        emitted += 1;
        for k in (0..radices.len()).rev() {
            current[k] += 1;
            if current[k] < radices[k] {
                break;
            }
            current[k] = 0;
        }
        Some(out)
    })
}
