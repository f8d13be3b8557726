//! Noise content with respect to the trivial observables.
//!
//! `w(A) = Σ_x inf_s A_x(s)`, and the infima also give the witness: with
//! `a_x = inf_s A_x(s)` and `t = Σ a_x`, `A = t·T + (1−t)·Ã` for the trivial
//! `T_x = (a_x/t)·u` and residual `Ã_x = (A_x − a_x·u)/(1−t)`.
//!
//! Polytopes take the infimum over vertices, quantum effects their minimal
//! eigenvalue. For process POVMs the minimal eigenvalue of the stored
//! operator only bounds the infimum from below, so the decomposition is
//! tagged as a lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::theory::{
    self, mix, Effect, Observable, StateSpace, TrivialObservable, NORMALIZATION_TOL,
};
use crate::Outcome;

/// Decompositions with `t` this close to one are treated as fully trivial.
const FULL_NOISE_TOL: f64 = 1e-12;

/// Residual tolerance for recognizing `A_x = ρ_x ⊗ 𝟙`.
pub const FACTORIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfimumMethod {
    VertexMin,
    MinEigenvalue,
    PpovmLowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectInfimum {
    pub outcome: Outcome,
    pub value: f64,
    pub method: InfimumMethod,
}

/// How a decomposition's `t` relates to the true noise content.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// `t = w(A)`.
    Exact,
    /// `t ≤ w(A)`.
    LowerBound,
}

/// `A = t·T + (1−t)·Ã` with `T` trivial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecomposition {
    pub t: f64,
    pub certification: Certification,
    #[serde(flatten)]
    pub trivial: TrivialObservable,
    /// `T` realized on the observable's space. For process POVMs this uses the
    /// observable's own input state, `T_x = p_x ρ ⊗ 𝟙`.
    pub trivial_embedding: Observable,
    pub residual: Observable,
}

impl NoiseDecomposition {
    /// `t·T + (1−t)·Ã`.
    pub fn reconstruct(&self) -> Result<Observable> {
        mix(&self.trivial_embedding, &self.residual, self.t)
    }

    /// Re-splits the observable as `q·T + (1−q)·C` for any `q ≤ t` by mixing
    /// part of the trivial component back into the residual. Returns `C`.
    pub fn rescaled_residual(&self, q: f64) -> Result<Observable> {
        if !(0.0..=1.0).contains(&q) || q > self.t + FULL_NOISE_TOL {
            return Err(Error::InvalidParameter(format!(
                "cannot extract noise {q} from a decomposition with t = {}",
                self.t
            )));
        }
        if q >= 1.0 {
            return Ok(self.trivial_embedding.clone());
        }
        let share = ((self.t - q) / (1.0 - q)).clamp(0.0, 1.0);
        mix(&self.trivial_embedding, &self.residual, share)
    }
}

/// Representative of the unit effect against which infima are measured:
/// the constant 1 for polytopes, `𝟙` for quantum, `ρ⊗𝟙` for processes.
fn unit_representative(a: &Observable) -> Result<Effect> {
    match a.space() {
        StateSpace::Process { dim_b, .. } => {
            let rho = a
                .process_normalization()
                .ok_or_else(|| Error::InvalidPpovm("no normalization state".into()))?;
            Ok(Effect::Process {
                op: rho.tensor(&HermitianMatrix::identity(*dim_b))?,
            })
        }
        space => Ok(space.unit_effect()),
    }
}

pub fn effect_infimum(a: &Observable, x: Outcome) -> Result<EffectInfimum> {
    let e = a.effect(x)?;
    let (raw, method) = match (a.space(), e) {
        (StateSpace::Polytope(p), _) => (
            theory::vertex_values(p, e)
                .into_iter()
                .fold(f64::INFINITY, f64::min),
            InfimumMethod::VertexMin,
        ),
        (StateSpace::Quantum { .. }, Effect::Quantum { op }) => {
            (op.min_eigenvalue()?, InfimumMethod::MinEigenvalue)
        }
        (StateSpace::Process { .. }, Effect::Process { op }) => {
            (op.min_eigenvalue()?, InfimumMethod::PpovmLowerBound)
        }
        _ => {
            return Err(Error::SpaceMismatch(
                "effect does not match its space".into(),
            ))
        }
    };
    Ok(EffectInfimum {
        outcome: x,
        value: raw.clamp(0.0, 1.0),
        method,
    })
}

pub fn infima(a: &Observable) -> Result<Vec<EffectInfimum>> {
    a.outcomes().iter().map(|&x| effect_infimum(a, x)).collect()
}

/// Noise content with its witness decomposition. Exact for polytopes and
/// quantum observables, a certified lower bound for process POVMs.
pub fn noise_content(a: &Observable) -> Result<NoiseDecomposition> {
    let inf = infima(a)?;
    let values: Vec<f64> = inf.iter().map(|i| i.value).collect();
    let certification = match a.space() {
        StateSpace::Process { .. } => Certification::LowerBound,
        _ => Certification::Exact,
    };
    decomposition_from_infima(a, &values, certification)
}

/// Shared construction from per-outcome weights `a_x` with `a_x·u ≤ A_x`.
fn decomposition_from_infima(
    a: &Observable,
    weights: &[f64],
    certification: Certification,
) -> Result<NoiseDecomposition> {
    let unit = unit_representative(a)?;
    let space = a.space();
    let mut t: f64 = weights.iter().sum();

    let trivial = if t > 0.0 {
        TrivialObservable::new(
            a.outcomes().to_vec(),
            weights.iter().map(|w| w / t).collect(),
        )?
    } else {
        TrivialObservable::uniform(a.outcomes().to_vec())?
    };
    let trivial_embedding = Observable::new(
        space.clone(),
        a.outcomes()
            .iter()
            .zip(trivial.probs())
            .map(|(&x, &p)| (x, unit.scale(p)))
            .collect(),
    )?;

    let residual = if t >= 1.0 - FULL_NOISE_TOL {
        t = 1.0;
        trivial_embedding.clone()
    } else if t == 0.0 {
        a.clone()
    } else {
        let pairs = a
            .iter()
            .zip(weights)
            .map(|((x, e), &w)| {
                e.lin_comb(1.0 / (1.0 - t), &unit, -w / (1.0 - t))
                    .map(|r| (x, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Observable::new(space.clone(), pairs)?
    };

    Ok(NoiseDecomposition {
        t,
        certification,
        trivial,
        trivial_embedding,
        residual,
    })
}

/// For a process POVM whose every effect factorizes as `ρ_x ⊗ 𝟙`, returns
/// its noise content 1; otherwise `None`.
pub fn noise_content_exact_trivial_ppovm(a: &Observable) -> Option<f64> {
    exact_trivial_ppovm_decomposition(a).map(|d| d.t)
}

/// Factorization `A_x = ρ_x ⊗ 𝟙` with `ρ_x = tr_B(A_x)/d_B`, or `None` if any
/// effect deviates by more than [`FACTORIZATION_TOL`] in Frobenius norm.
pub fn ppovm_factorization(a: &Observable) -> Option<Vec<HermitianMatrix>> {
    let StateSpace::Process { dim_a, dim_b } = a.space() else {
        return None;
    };
    let id_b = HermitianMatrix::identity(*dim_b);
    a.effects()
        .iter()
        .map(|e| {
            let op = e.operator()?;
            let rho_x = op
                .partial_trace_second(*dim_a, *dim_b)
                .ok()?
                .scale(1.0 / *dim_b as f64);
            let lifted = rho_x.tensor(&id_b).ok()?;
            (op.frobenius_distance(&lifted).ok()? < FACTORIZATION_TOL).then_some(rho_x)
        })
        .collect()
}

/// Full-noise decomposition of an exactly trivial process POVM: `t = 1` and
/// `p_x = tr ρ_x`.
pub fn exact_trivial_ppovm_decomposition(a: &Observable) -> Option<NoiseDecomposition> {
    let factors = ppovm_factorization(a)?;
    let probs: Vec<f64> = factors.iter().map(|r| r.trace().max(0.0)).collect();
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return None;
    }
    let trivial = TrivialObservable::new(
        a.outcomes().to_vec(),
        probs.iter().map(|p| p / sum).collect(),
    )
    .ok()?;
    Some(NoiseDecomposition {
        t: 1.0,
        certification: Certification::Exact,
        trivial,
        trivial_embedding: a.clone(),
        residual: a.clone(),
    })
}

/// The strongest decomposition available: for process POVMs, the exact
/// trivial case when it applies, otherwise [`noise_content`].
pub fn best_noise_decomposition(a: &Observable) -> Result<NoiseDecomposition> {
    if let StateSpace::Process { .. } = a.space() {
        if let Some(d) = exact_trivial_ppovm_decomposition(a) {
            return Ok(d);
        }
    }
    noise_content(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub s: f64,
    /// `w(sA + (1−s)B)`.
    pub lhs: f64,
    /// `s·w(A) + (1−s)·w(B)`.
    pub rhs: f64,
    pub pass: bool,
}

pub const CONCAVITY_TOL: f64 = 1e-9;

/// Checks `w(sA + (1−s)B) ≥ s·w(A) + (1−s)·w(B)`.
pub fn concavity_check(a: &Observable, b: &Observable, s: f64) -> Result<ConcavityReport> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(
            "observables on different spaces".into(),
        ));
    }
    if a.outcomes() != b.outcomes() {
        return Err(Error::OutcomeMismatch(format!(
            "{:?} vs {:?}",
            a.outcomes(),
            b.outcomes()
        )));
    }
    let mixed = mix(a, b, s)?;
    let lhs = noise_content(&mixed)?.t;
    let rhs = s * noise_content(a)?.t + (1.0 - s) * noise_content(b)?.t;
    Ok(ConcavityReport {
        s,
        lhs,
        rhs,
        pass: lhs >= rhs - CONCAVITY_TOL,
    })
}
