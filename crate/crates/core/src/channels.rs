//! Classical channels between finite outcome sets and post-processing of
//! observables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid;
use crate::theory::{Observable, TrivialObservable};
use crate::Outcome;

const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic matrix `ν[x][y]`, the probability of relabelling input
/// outcome `x` as output outcome `y`. Both outcome lists are kept sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelWire", into = "ChannelWire")]
pub struct ClassicalChannel {
    inputs: Vec<Outcome>,
    outputs: Vec<Outcome>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelWire {
    #[serde(rename = "in")]
    inputs: Vec<Outcome>,
    #[serde(rename = "out")]
    outputs: Vec<Outcome>,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<ChannelWire> for ClassicalChannel {
    type Error = Error;
    fn try_from(w: ChannelWire) -> Result<Self> {
        ClassicalChannel::new(w.inputs, w.outputs, w.matrix)
    }
}

impl From<ClassicalChannel> for ChannelWire {
    fn from(c: ClassicalChannel) -> Self {
        ChannelWire {
            inputs: c.inputs,
            outputs: c.outputs,
            matrix: c.matrix,
        }
    }
}

fn sorted_permutation(labels: &[Outcome]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| labels[i]);
    if order.windows(2).any(|w| labels[w[0]] == labels[w[1]]) {
        return Err(Error::InvalidParameter(format!(
            "duplicate outcome in {labels:?}"
        )));
    }
    Ok(order)
}

impl ClassicalChannel {
    /// Entries must lie in `[0, 1]` and each row must sum to one within
    /// 1e-12; rows are then rescaled to sum to one exactly.
    pub fn new(inputs: Vec<Outcome>, outputs: Vec<Outcome>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs inputs and outputs".into(),
            ));
        }
        if matrix.len() != inputs.len() || matrix.iter().any(|r| r.len() != outputs.len()) {
            return Err(Error::InvalidParameter(format!(
                "matrix shape does not match {} inputs x {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        let row_order = sorted_permutation(&inputs)?;
        let col_order = sorted_permutation(&outputs)?;
        let mut rows = Vec::with_capacity(inputs.len());
        for &r in &row_order {
            let row = &matrix[r];
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidParameter(format!(
                    "row for input {} has entries outside [0, 1]",
                    inputs[r]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "row for input {} sums to {sum}",
                    inputs[r]
                )));
            }
            rows.push(col_order.iter().map(|&c| row[c] / sum).collect());
        }
        Ok(ClassicalChannel {
            inputs: row_order.iter().map(|&i| inputs[i]).collect(),
            outputs: col_order.iter().map(|&i| outputs[i]).collect(),
            matrix: rows,
        })
    }

    pub fn identity(outcomes: &[Outcome]) -> Result<Self> {
        let n = outcomes.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(outcomes.to_vec(), outcomes.to_vec(), matrix)
    }

    pub fn inputs(&self) -> &[Outcome] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Outcome] {
        &self.outputs
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// `ν[x][y]` by outcome label.
    pub fn prob(&self, x: Outcome, y: Outcome) -> Option<f64> {
        let i = self.inputs.binary_search(&x).ok()?;
        let j = self.outputs.binary_search(&y).ok()?;
        Some(self.matrix[i][j])
    }
}

/// `(ν∘A)_y = Σ_x ν_xy A_x`.
pub fn post_process(nu: &ClassicalChannel, a: &Observable) -> Result<Observable> {
    if nu.inputs() != a.outcomes() {
        return Err(Error::OutcomeMismatch(format!(
            "channel inputs {:?} vs observable outcomes {:?}",
            nu.inputs(),
            a.outcomes()
        )));
    }
    let space = a.space();
    let pairs = nu
        .outputs()
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let mut acc = space.zero_effect();
            for (i, e) in a.effects().iter().enumerate() {
                acc = acc.lin_comb(1.0, e, nu.matrix[i][j])?;
            }
            Ok((y, acc))
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::new(space.clone(), pairs)
}

/// Post-processing of a trivial observable's distribution.
pub fn post_process_trivial(
    nu: &ClassicalChannel,
    t: &TrivialObservable,
) -> Result<TrivialObservable> {
    if nu.inputs() != t.outcomes() {
        return Err(Error::OutcomeMismatch(format!(
            "channel inputs {:?} vs trivial outcomes {:?}",
            nu.inputs(),
            t.outcomes()
        )));
    }
    let probs = (0..nu.outputs().len())
        .map(|j| {
            t.probs()
                .iter()
                .zip(&nu.matrix)
                .map(|(p, row)| p * row[j])
                .sum()
        })
        .collect();
    TrivialObservable::new(nu.outputs().to_vec(), probs)
}

/// Reverse channel on outcomes `0..n`: every outcome is replaced uniformly
/// by one of the others.
pub fn reverse_channel(n: usize) -> Result<ClassicalChannel> {
    reverse_channel_on(&(0..n as Outcome).collect::<Vec<_>>())
}

/// Reverse channel on an arbitrary outcome list.
pub fn reverse_channel_on(outcomes: &[Outcome]) -> Result<ClassicalChannel> {
    let n = outcomes.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "reversing needs at least two outcomes, got {n}"
        )));
    }
    let off = 1.0 / (n - 1) as f64;
    let matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { off }).collect())
        .collect();
    ClassicalChannel::new(outcomes.to_vec(), outcomes.to_vec(), matrix)
}

/// The reverse observable `ν^r ∘ A`.
pub fn reverse(a: &Observable) -> Result<Observable> {
    post_process(&reverse_channel_on(a.outcomes())?, a)
}

/// `ν^r ∘ ν^r ∘ A`, equal to `(1−λ)A + λ·T_uniform` with
/// [`doubly_reverse_lambda`].
pub fn doubly_reverse(a: &Observable) -> Result<Observable> {
    let nu = reverse_channel_on(a.outcomes())?;
    post_process(&nu, &post_process(&nu, a)?)
}

/// `λ = N(N−2)/(N−1)²`.
pub fn doubly_reverse_lambda(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 2.0) / ((n - 1.0) * (n - 1.0))
}

/// Deterministic channel `x ↦ (x, …, x)` into `X^m`, with tuples of indices
/// into `outcomes` flattened by [`grid::encode`].
pub fn copy_channel(outcomes: &[Outcome], m: usize) -> Result<ClassicalChannel> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("copy count {m} < 2")));
    }
    let n = outcomes.len();
    let radices = vec![n; m];
    let cells = grid::cell_count(&radices)
        .filter(|&c| c <= 1 << 20)
        .ok_or(Error::SizeCap {
            cells: usize::MAX,
            cap: 1 << 20,
        })?;
    let mut matrix = vec![vec![0.0; cells]; n];
    for (i, row) in matrix.iter_mut().enumerate() {
        let code = grid::encode(&vec![i; m], &radices)?;
        row[code as usize] = 1.0;
    }
    ClassicalChannel::new(outcomes.to_vec(), (0..cells as Outcome).collect(), matrix)
}

/// Deterministic relabelling `x ↦ f(x)`; `f` must be defined on every input.
pub fn relabel_channel(
    inputs: &[Outcome],
    f: &BTreeMap<Outcome, Outcome>,
) -> Result<ClassicalChannel> {
    let images = inputs
        .iter()
        .map(|x| {
            f.get(x)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("relabelling undefined at {x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outputs = images.clone();
    outputs.sort_unstable();
    outputs.dedup();
    let matrix = images
        .iter()
        .map(|y| {
            outputs
                .iter()
                .map(|o| if o == y { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    ClassicalChannel::new(inputs.to_vec(), outputs, matrix)
}

/// The trivializing channel with every row equal to `t`'s distribution, so
/// that `ν^T ∘ A = T` for any `A` on `inputs`.
pub fn trivializing_channel(inputs: &[Outcome], t: &TrivialObservable) -> Result<ClassicalChannel> {
    let matrix = vec![t.probs().to_vec(); inputs.len()];
    ClassicalChannel::new(inputs.to_vec(), t.outcomes().to_vec(), matrix)
}

/// `ν₂ ∘ ν₁`: first `ν₁`, then `ν₂`.
pub fn compose(nu2: &ClassicalChannel, nu1: &ClassicalChannel) -> Result<ClassicalChannel> {
    if nu1.outputs() != nu2.inputs() {
        return Err(Error::OutcomeMismatch(format!(
            "outputs {:?} do not feed inputs {:?}",
            nu1.outputs(),
            nu2.inputs()
        )));
    }
    let matrix = nu1
        .matrix
        .iter()
        .map(|row| {
            (0..nu2.outputs.len())
                .map(|k| {
                    row.iter()
                        .zip(&nu2.matrix)
                        .map(|(a, r2)| a * r2[k])
                        .sum::<f64>()
                        .clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    ClassicalChannel::new(nu1.inputs.clone(), nu2.outputs.clone(), matrix)
}
