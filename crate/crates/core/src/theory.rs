//! State spaces, effects and observables for the three supported theories:
//! polytopes given by their vertices, finite-dimensional quantum theory, and
//! quantum channels tested by process POVMs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::simplex::{self, Feasibility};
use crate::{real, Outcome};

/// Normalization and positivity tolerance used throughout.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Observable JSON schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// A polytope given by its extreme points in an ambient real vector space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeWire", into = "PolytopeWire")]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
    hull_dim: usize,
    /// Basis of coefficient vectors λ with Σλᵢvᵢ = 0 and Σλᵢ = 0.
    dependencies: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeWire {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<PolytopeWire> for Polytope {
    type Error = Error;
    fn try_from(w: PolytopeWire) -> Result<Self> {
        Polytope::new(w.ambient_dim, w.vertices)
    }
}

impl From<Polytope> for PolytopeWire {
    fn from(p: Polytope) -> Self {
        PolytopeWire {
            ambient_dim: p.ambient_dim,
            vertices: p.vertices,
        }
    }
}

impl Polytope {
    pub fn new(ambient_dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter(
                "a polytope needs at least one vertex".into(),
            ));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::InvalidParameter(format!(
                "vertex {v:?} does not live in dimension {ambient_dim}"
            )));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite vertex coordinate".into(),
            ));
        }
        let lifted = Self::lifted_rows(ambient_dim, &vertices);
        let hull_dim = real::rank(&lifted) - 1;
        let dependencies = real::null_space(&lifted, vertices.len());
        Ok(Polytope {
            ambient_dim,
            vertices,
            hull_dim,
            dependencies,
        })
    }

    /// The square bit: unit square with s₁ = (0,0), s₂ = (1,0), s₃ = (1,1),
    /// s₄ = (0,1), so that s₁ + s₃ = s₂ + s₄.
    pub fn squit() -> Self {
        Polytope::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .expect("square is a valid polytope")
    }

    /// Rows `[v₁ⱼ … vₙⱼ]` for each coordinate j, then a row of ones.
    fn lifted_rows(ambient_dim: usize, vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = (0..ambient_dim)
            .map(|j| vertices.iter().map(|v| v[j]).collect())
            .collect();
        rows.push(vec![1.0; vertices.len()]);
        rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn hull_dim(&self) -> usize {
        self.hull_dim
    }

    pub fn affine_dependencies(&self) -> &[Vec<f64>] {
        &self.dependencies
    }

    /// Convex weights over the vertices reproducing an ambient point.
    pub fn weights_for_point(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.ambient_dim {
            return Err(Error::InvalidState(format!(
                "point of dimension {} in a {}-dimensional ambient space",
                point.len(),
                self.ambient_dim
            )));
        }
        let rows = Self::lifted_rows(self.ambient_dim, &self.vertices);
        let mut rhs = point.to_vec();
        rhs.push(1.0);
        match simplex::phase_one(&rows, &rhs, NORMALIZATION_TOL)? {
            Feasibility::Feasible(w) => {
                let residual = rows
                    .iter()
                    .zip(&rhs)
                    .map(|(r, b)| (r.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>() - b).abs())
                    .fold(0.0, f64::max);
                if residual > NORMALIZATION_TOL {
                    return Err(Error::InvalidState(format!(
                        "point {point:?} not reproduced by convex weights (residual {residual:.3e})"
                    )));
                }
                Ok(w)
            }
            Feasibility::Infeasible(_) => Err(Error::InvalidState(format!(
                "point {point:?} lies outside the polytope"
            ))),
        }
    }

    pub fn point_for_weights(&self, weights: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.ambient_dim];
        for (w, v) in weights.iter().zip(&self.vertices) {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += w * vi;
            }
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpace {
    Polytope(Polytope),
    Quantum { dim: usize },
    Process { dim_a: usize, dim_b: usize },
}

impl StateSpace {
    pub fn quantum(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "Hilbert space dimension must be ≥ 1".into(),
            ));
        }
        Ok(StateSpace::Quantum { dim })
    }

    pub fn process(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidParameter(
                "process dimensions must be ≥ 1".into(),
            ));
        }
        Ok(StateSpace::Process { dim_a, dim_b })
    }

    pub fn squit() -> Self {
        StateSpace::Polytope(Polytope::squit())
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            StateSpace::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// Operator dimension for the quantum and process variants.
    pub fn operator_dim(&self) -> Option<usize> {
        match self {
            StateSpace::Polytope(_) => None,
            StateSpace::Quantum { dim } => Some(*dim),
            StateSpace::Process { dim_a, dim_b } => Some(dim_a * dim_b),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            StateSpace::Polytope(_) => "polytope",
            StateSpace::Quantum { .. } => "quantum",
            StateSpace::Process { .. } => "process",
        }
    }

    /// The canonical representative of the unit effect. For processes this is
    /// `(𝟙/d_A) ⊗ 𝟙`; any `ρ ⊗ 𝟙` represents the same functional.
    pub fn unit_effect(&self) -> Effect {
        self.constant_effect(1.0)
    }

    pub fn zero_effect(&self) -> Effect {
        self.constant_effect(0.0)
    }

    /// The effect taking the value `c` on every state.
    pub fn constant_effect(&self, c: f64) -> Effect {
        match self {
            StateSpace::Polytope(p) => Effect::Polytope {
                linear: vec![0.0; p.ambient_dim],
                offset: c,
            },
            StateSpace::Quantum { dim } => Effect::Quantum {
                op: HermitianMatrix::identity(*dim).scale(c),
            },
            StateSpace::Process { dim_a, dim_b } => Effect::Process {
                op: HermitianMatrix::identity(dim_a * dim_b).scale(c / *dim_a as f64),
            },
        }
    }

    fn mismatch(&self, what: &str) -> Error {
        Error::SpaceMismatch(format!(
            "{what} does not belong to a {} space",
            self.kind_name()
        ))
    }

    pub fn check_effect(&self, e: &Effect) -> Result<()> {
        let ok = match (self, e) {
            (StateSpace::Polytope(p), Effect::Polytope { linear, .. }) => {
                linear.len() == p.ambient_dim
            }
            (StateSpace::Quantum { dim }, Effect::Quantum { op }) => op.dim() == *dim,
            (StateSpace::Process { dim_a, dim_b }, Effect::Process { op }) => {
                op.dim() == dim_a * dim_b
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch("effect"))
        }
    }
}

/// An affine functional on a state space, stored in the representation native
/// to its theory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    /// `s ↦ linear·s + offset` on the ambient space of a polytope.
    Polytope { linear: Vec<f64>, offset: f64 },
    /// `ρ ↦ tr[ρ op]`.
    Quantum { op: HermitianMatrix },
    /// `Ω ↦ tr[Ω op]` on Choi operators.
    Process { op: HermitianMatrix },
}

impl Effect {
    pub fn operator(&self) -> Option<&HermitianMatrix> {
        match self {
            Effect::Quantum { op } | Effect::Process { op } => Some(op),
            Effect::Polytope { .. } => None,
        }
    }

    /// Value at an ambient point of a polytope.
    pub fn at_point(&self, point: &[f64]) -> Option<f64> {
        match self {
            Effect::Polytope { linear, offset } => {
                Some(linear.iter().zip(point).map(|(a, b)| a * b).sum::<f64>() + offset)
            }
            _ => None,
        }
    }

    /// `a·self + b·other`; both must share a representation and size.
    pub fn lin_comb(&self, a: f64, other: &Effect, b: f64) -> Result<Effect> {
        match (self, other) {
            (
                Effect::Polytope {
                    linear: l1,
                    offset: o1,
                },
                Effect::Polytope {
                    linear: l2,
                    offset: o2,
                },
            ) if l1.len() == l2.len() => Ok(Effect::Polytope {
                linear: l1.iter().zip(l2).map(|(x, y)| a * x + b * y).collect(),
                offset: a * o1 + b * o2,
            }),
            (Effect::Quantum { op: p }, Effect::Quantum { op: q }) => Ok(Effect::Quantum {
                op: p.lin_comb(a, q, b)?,
            }),
            (Effect::Process { op: p }, Effect::Process { op: q }) => Ok(Effect::Process {
                op: p.lin_comb(a, q, b)?,
            }),
            _ => Err(Error::SpaceMismatch("effects of different kinds".into())),
        }
    }

    pub fn scale(&self, a: f64) -> Effect {
        match self {
            Effect::Polytope { linear, offset } => Effect::Polytope {
                linear: linear.iter().map(|x| a * x).collect(),
                offset: a * offset,
            },
            Effect::Quantum { op } => Effect::Quantum { op: op.scale(a) },
            Effect::Process { op } => Effect::Process { op: op.scale(a) },
        }
    }

    /// Raw value on a state, without clamping.
    pub fn value(&self, space: &StateSpace, state: &State) -> Result<f64> {
        space.check_effect(self)?;
        state.check_space(space)?;
        Ok(match (self, &state.0, space) {
            (Effect::Polytope { .. }, StateRepr::Weights(w), StateSpace::Polytope(p)) => w
                .iter()
                .zip(p.vertices())
                .map(|(wi, v)| wi * self.at_point(v).unwrap_or(0.0))
                .sum(),
            (Effect::Quantum { op }, StateRepr::Density(rho), _) => op.trace_product(rho)?,
            (Effect::Quantum { op }, StateRepr::Pure(psi), _) => op.expectation(psi)?,
            (Effect::Process { op }, StateRepr::Choi(omega), _) => op.trace_product(omega)?,
            _ => return Err(space.mismatch("state")),
        })
    }

    /// Distance between two effects as functionals on the state space.
    ///
    /// Polytopes: largest vertex-value difference. Quantum: Frobenius norm of
    /// the operator difference. Processes: the difference `D` is split as
    /// `ω⊗𝟙 + R` with `ω = tr_B(D)/d_B`; the functional vanishes exactly when
    /// `R = 0` and `tr ω = 0`, and the distance is the larger of `‖R‖_F` and
    /// `|tr ω|`.
    pub fn functional_distance(&self, other: &Effect, space: &StateSpace) -> Result<f64> {
        space.check_effect(self)?;
        space.check_effect(other)?;
        let diff = self.lin_comb(1.0, other, -1.0)?;
        match (&diff, space) {
            (Effect::Polytope { .. }, StateSpace::Polytope(p)) => Ok(p
                .vertices()
                .iter()
                .map(|v| diff.at_point(v).unwrap_or(0.0).abs())
                .fold(0.0, f64::max)),
            (Effect::Quantum { op }, _) => Ok(op.as_matrix().frobenius_norm()),
            (Effect::Process { op }, StateSpace::Process { dim_a, dim_b }) => {
                let omega = op
                    .partial_trace_second(*dim_a, *dim_b)?
                    .scale(1.0 / *dim_b as f64);
                let lifted = omega.tensor(&HermitianMatrix::identity(*dim_b))?;
                let rest = op.frobenius_distance(&lifted)?;
                Ok(rest.max(omega.trace().abs()))
            }
            _ => Err(space.mismatch("effect")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum StateRepr {
    Weights(Vec<f64>),
    Density(HermitianMatrix),
    Pure(Vec<C64>),
    Choi(HermitianMatrix),
}

/// A validated state of some space. Construct through the checked
/// constructors; evaluation then only needs a dimension check.
#[derive(Clone, Debug, PartialEq)]
pub struct State(StateRepr);

impl State {
    /// Convex weights over the vertices of a polytope.
    pub fn polytope_weights(polytope: &Polytope, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != polytope.vertex_count() {
            return Err(Error::InvalidState(format!(
                "{} weights for {} vertices",
                weights.len(),
                polytope.vertex_count()
            )));
        }
        if weights
            .iter()
            .any(|w| !w.is_finite() || *w < -NORMALIZATION_TOL)
        {
            return Err(Error::InvalidState("negative or non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("weights sum to {sum}")));
        }
        Ok(State(StateRepr::Weights(weights)))
    }

    /// An ambient point, converted to convex weights over the vertices.
    pub fn polytope_point(polytope: &Polytope, point: &[f64]) -> Result<Self> {
        let w = polytope.weights_for_point(point)?;
        Ok(State(StateRepr::Weights(w)))
    }

    pub fn vertex(polytope: &Polytope, index: usize) -> Result<Self> {
        if index >= polytope.vertex_count() {
            return Err(Error::InvalidState(format!("no vertex {index}")));
        }
        let mut w = vec![0.0; polytope.vertex_count()];
        w[index] = 1.0;
        Ok(State(StateRepr::Weights(w)))
    }

    pub fn density(rho: HermitianMatrix) -> Result<Self> {
        check_density(&rho)?;
        Ok(State(StateRepr::Density(rho)))
    }

    /// Pure state |ψ⟩⟨ψ|; `psi` is normalized here.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = crate::linalg::norm(psi);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        Ok(State(StateRepr::Pure(psi.iter().map(|z| z / n).collect())))
    }

    /// Choi operator of a trace-preserving channel (unnormalized convention,
    /// `tr_B Ω = 𝟙_A`).
    pub fn choi(omega: HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if omega.dim() != dim_a * dim_b {
            return Err(Error::InvalidState(format!(
                "Choi operator of dimension {} for {dim_a}x{dim_b}",
                omega.dim()
            )));
        }
        if !omega.is_psd(NORMALIZATION_TOL) {
            return Err(Error::InvalidState("Choi operator is not PSD".into()));
        }
        let marginal = omega.partial_trace_second(dim_a, dim_b)?;
        let dev = marginal.frobenius_distance(&HermitianMatrix::identity(dim_a))?;
        if dev > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!(
                "channel is not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(State(StateRepr::Choi(omega)))
    }

    fn check_space(&self, space: &StateSpace) -> Result<()> {
        let ok = match (&self.0, space) {
            (StateRepr::Weights(w), StateSpace::Polytope(p)) => w.len() == p.vertex_count(),
            (StateRepr::Density(rho), StateSpace::Quantum { dim }) => rho.dim() == *dim,
            (StateRepr::Pure(psi), StateSpace::Quantum { dim }) => psi.len() == *dim,
            (StateRepr::Choi(omega), StateSpace::Process { dim_a, dim_b }) => {
                omega.dim() == dim_a * dim_b
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(space.mismatch("state"))
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &self.0 {
            StateRepr::Weights(w) => Some(w),
            _ => None,
        }
    }
}

pub(crate) fn check_density(rho: &HermitianMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
    }
    if !rho.is_psd(NORMALIZATION_TOL) {
        return Err(Error::InvalidState("density operator is not PSD".into()));
    }
    Ok(())
}

/// Probability of an effect on a state, clamped to `[0, 1]`.
pub fn evaluate(space: &StateSpace, e: &Effect, s: &State) -> Result<f64> {
    Ok(e.value(space, s)?.clamp(0.0, 1.0))
}

/// A finite family of effects indexed by sorted, distinct outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableWire", into = "ObservableWire")]
pub struct Observable {
    space: StateSpace,
    outcomes: Vec<Outcome>,
    effects: Vec<Effect>,
}

#[derive(Serialize, Deserialize)]
struct ObservableWire {
    v: u32,
    space: StateSpace,
    outcomes: Vec<Outcome>,
    effects: Vec<Effect>,
}

impl TryFrom<ObservableWire> for Observable {
    type Error = Error;
    fn try_from(w: ObservableWire) -> Result<Self> {
        if w.v != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported observable schema version {}",
                w.v
            )));
        }
        if w.outcomes.len() != w.effects.len() {
            return Err(Error::OutcomeMismatch(format!(
                "{} outcomes but {} effects",
                w.outcomes.len(),
                w.effects.len()
            )));
        }
        Observable::new(w.space, w.outcomes.into_iter().zip(w.effects).collect())
    }
}

impl From<Observable> for ObservableWire {
    fn from(o: Observable) -> Self {
        ObservableWire {
            v: SCHEMA_VERSION,
            space: o.space,
            outcomes: o.outcomes,
            effects: o.effects,
        }
    }
}

impl Observable {
    /// Builds an observable from `(outcome, effect)` pairs. Pairs are sorted by
    /// outcome; duplicates and effects of the wrong kind are rejected.
    /// Normalization is not enforced here; see [`validate_observable`].
    pub fn new(space: StateSpace, mut pairs: Vec<(Outcome, Effect)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter(
                "an observable needs at least one outcome".into(),
            ));
        }
        pairs.sort_by_key(|(x, _)| *x);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter(format!(
                "duplicate outcome {}",
                w[0].0
            )));
        }
        for (_, e) in &pairs {
            space.check_effect(e)?;
        }
        let (outcomes, effects) = pairs.into_iter().unzip();
        Ok(Observable {
            space,
            outcomes,
            effects,
        })
    }

    /// Effects labelled `0..n`.
    pub fn from_effects(space: StateSpace, effects: Vec<Effect>) -> Result<Self> {
        Self::new(
            space,
            effects
                .into_iter()
                .enumerate()
                .map(|(i, e)| (i as Outcome, e))
                .collect(),
        )
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn index_of(&self, x: Outcome) -> Result<usize> {
        self.outcomes
            .binary_search(&x)
            .map_err(|_| Error::OutcomeMismatch(format!("outcome {x} not in {:?}", self.outcomes)))
    }

    pub fn effect(&self, x: Outcome) -> Result<&Effect> {
        Ok(&self.effects[self.index_of(x)?])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, &Effect)> {
        self.outcomes.iter().copied().zip(&self.effects)
    }

    /// Outcome distribution on a state, in outcome order.
    pub fn probabilities(&self, s: &State) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| evaluate(&self.space, e, s))
            .collect()
    }

    /// Sum of all effects (representative-level).
    pub fn effect_sum(&self) -> Effect {
        let mut acc = self.space.zero_effect();
        for e in &self.effects {
            acc = acc.lin_comb(1.0, e, 1.0).expect("effects share the space");
        }
        acc
    }

    /// For process observables: the density operator ρ with `Σ_x A_x ≈ ρ⊗𝟙`,
    /// read off as `tr_B(Σ_x A_x)/d_B`.
    pub fn process_normalization(&self) -> Option<HermitianMatrix> {
        match (&self.space, self.effect_sum()) {
            (StateSpace::Process { dim_a, dim_b }, Effect::Process { op }) => op
                .partial_trace_second(*dim_a, *dim_b)
                .ok()
                .map(|m| m.scale(1.0 / *dim_b as f64)),
            _ => None,
        }
    }

    /// Largest functional distance between corresponding effects; both
    /// observables must have the same outcome list.
    pub fn max_effect_distance(&self, other: &Observable) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "observables on different spaces".into(),
            ));
        }
        if self.outcomes != other.outcomes {
            return Err(Error::OutcomeMismatch(format!(
                "{:?} vs {:?}",
                self.outcomes, other.outcomes
            )));
        }
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| a.functional_distance(b, &self.space))
            .try_fold(0.0, |m, d| d.map(|d| f64::max(m, d)))
    }

    /// Same as [`Observable::max_effect_distance`] after extending both
    /// outcome sets by zero effects to their union.
    pub fn distance_on_union(&self, other: &Observable) -> Result<f64> {
        let a = self.extend_to(&union(&self.outcomes, &other.outcomes))?;
        let b = other.extend_to(&union(&self.outcomes, &other.outcomes))?;
        a.max_effect_distance(&b)
    }

    /// Extends the outcome set with zero effects; `outcomes` must contain the
    /// current ones.
    pub fn extend_to(&self, outcomes: &[Outcome]) -> Result<Observable> {
        let pairs = outcomes
            .iter()
            .map(|&z| {
                let e = match self.outcomes.binary_search(&z) {
                    Ok(i) => self.effects[i].clone(),
                    Err(_) => self.space.zero_effect(),
                };
                (z, e)
            })
            .collect();
        let out = Observable::new(self.space.clone(), pairs)?;
        if self
            .outcomes
            .iter()
            .any(|x| out.outcomes.binary_search(x).is_err())
        {
            return Err(Error::OutcomeMismatch("extension drops outcomes".into()));
        }
        Ok(out)
    }
}

fn union(a: &[Outcome], b: &[Outcome]) -> Vec<Outcome> {
    let mut u: Vec<Outcome> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// A state-independent outcome distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrivialWire", into = "TrivialWire")]
pub struct TrivialObservable {
    outcomes: Vec<Outcome>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TrivialWire {
    outcomes: Vec<Outcome>,
    probs: Vec<f64>,
}

impl TryFrom<TrivialWire> for TrivialObservable {
    type Error = Error;
    fn try_from(w: TrivialWire) -> Result<Self> {
        TrivialObservable::new(w.outcomes, w.probs)
    }
}

impl From<TrivialObservable> for TrivialWire {
    fn from(t: TrivialObservable) -> Self {
        TrivialWire {
            outcomes: t.outcomes,
            probs: t.probs,
        }
    }
}

const TRIVIAL_SUM_TOL: f64 = 1e-12;

impl TrivialObservable {
    /// Probabilities must be nonnegative and sum to one within 1e-12; the
    /// sum is renormalized exactly to one.
    pub fn new(outcomes: Vec<Outcome>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() || outcomes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} outcomes with {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid probabilities {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > TRIVIAL_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}"
            )));
        }
        let mut pairs: Vec<(Outcome, f64)> = outcomes
            .into_iter()
            .zip(probs.into_iter().map(|p| p / sum))
            .collect();
        pairs.sort_by_key(|(x, _)| *x);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate outcome".into()));
        }
        let (outcomes, probs) = pairs.into_iter().unzip();
        Ok(TrivialObservable { outcomes, probs })
    }

    pub fn uniform(outcomes: Vec<Outcome>) -> Result<Self> {
        let n = outcomes.len();
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    /// Outcome `x` with certainty.
    pub fn deterministic(outcomes: Vec<Outcome>, x: Outcome) -> Result<Self> {
        let probs = outcomes
            .iter()
            .map(|&y| if y == x { 1.0 } else { 0.0 })
            .collect();
        Self::new(outcomes, probs)
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Kinds of invariant violations found by [`validate_observable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `Σ_x A_x` differs from the unit effect.
    Normalization,
    /// An effect takes negative values.
    BelowZero,
    /// An effect exceeds the unit effect.
    AboveUnit,
    /// The process normalization `ρ` is not a density operator.
    NormalizationState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub outcome: Option<Outcome>,
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, outcome: Option<Outcome>, magnitude: f64) {
        self.violations.push(Violation {
            kind,
            outcome,
            magnitude,
        });
    }
}

/// Checks normalization and effect bounds at tolerance [`NORMALIZATION_TOL`].
pub fn validate_observable(a: &Observable) -> ValidationReport {
    validate_observable_tol(a, NORMALIZATION_TOL)
}

pub fn validate_observable_tol(a: &Observable, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    match a.space() {
        StateSpace::Polytope(p) => {
            for v in p.vertices() {
                let total: f64 = a.effects().iter().filter_map(|e| e.at_point(v)).sum();
                let dev = (total - 1.0).abs();
                if dev > tol {
                    report.push(ViolationKind::Normalization, None, dev);
                    break;
                }
            }
            for (x, e) in a.iter() {
                let values: Vec<f64> = p.vertices().iter().filter_map(|v| e.at_point(v)).collect();
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if lo < -tol {
                    report.push(ViolationKind::BelowZero, Some(x), -lo);
                }
                if hi > 1.0 + tol {
                    report.push(ViolationKind::AboveUnit, Some(x), hi - 1.0);
                }
            }
        }
        StateSpace::Quantum { dim } => {
            let sum = a.effect_sum();
            let dev = sum
                .operator()
                .and_then(|s| s.frobenius_distance(&HermitianMatrix::identity(*dim)).ok())
                .unwrap_or(f64::INFINITY);
            if dev > tol {
                report.push(ViolationKind::Normalization, None, dev);
            }
            for (x, e) in a.iter() {
                let Some(op) = e.operator() else { continue };
                match op.eigenvalues() {
                    Ok(ev) => {
                        if ev[0] < -tol {
                            report.push(ViolationKind::BelowZero, Some(x), -ev[0]);
                        }
                        let top = ev[ev.len() - 1];
                        if top > 1.0 + tol {
                            report.push(ViolationKind::AboveUnit, Some(x), top - 1.0);
                        }
                    }
                    Err(_) => report.push(ViolationKind::BelowZero, Some(x), f64::INFINITY),
                }
            }
        }
        StateSpace::Process { dim_b, .. } => {
            let Some(rho) = a.process_normalization() else {
                report.push(ViolationKind::Normalization, None, f64::INFINITY);
                return report;
            };
            if let Err(Error::InvalidState(_)) = check_density(&rho) {
                let dev = (rho.trace() - 1.0)
                    .abs()
                    .max(-rho.min_eigenvalue().unwrap_or(f64::NEG_INFINITY));
                report.push(ViolationKind::NormalizationState, None, dev);
            }
            let unit = rho
                .tensor(&HermitianMatrix::identity(*dim_b))
                .expect("dimensions are small");
            let sum = a.effect_sum();
            let dev = sum
                .operator()
                .and_then(|s| s.frobenius_distance(&unit).ok())
                .unwrap_or(f64::INFINITY);
            if dev > tol {
                report.push(ViolationKind::Normalization, None, dev);
            }
            for (x, e) in a.iter() {
                let Some(op) = e.operator() else { continue };
                let lo = op.min_eigenvalue().unwrap_or(f64::NEG_INFINITY);
                if lo < -tol {
                    report.push(ViolationKind::BelowZero, Some(x), -lo);
                }
                let gap = unit
                    .try_sub(op)
                    .and_then(|g| g.min_eigenvalue())
                    .unwrap_or(f64::NEG_INFINITY);
                if gap < -tol {
                    report.push(ViolationKind::AboveUnit, Some(x), -gap);
                }
            }
        }
    }
    report
}

/// The observable `z ↦ t·A_z + (1−t)·B_z` on the union of both outcome sets,
/// with absent outcomes contributing the zero effect.
pub fn mix(a: &Observable, b: &Observable, t: f64) -> Result<Observable> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "mixing weight {t} outside [0, 1]"
        )));
    }
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(
            "cannot mix observables on different spaces".into(),
        ));
    }
    let outcomes = union(a.outcomes(), b.outcomes());
    let zero = a.space().zero_effect();
    let pairs = outcomes
        .iter()
        .map(|&z| {
            let ea = a.effect(z).unwrap_or(&zero);
            let eb = b.effect(z).unwrap_or(&zero);
            ea.lin_comb(t, eb, 1.0 - t).map(|e| (z, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::new(a.space().clone(), pairs)
}

/// Realizes a trivial observable on a space. Processes use the maximally
/// mixed input state, `T_x = p_x (𝟙/d_A) ⊗ 𝟙`.
pub fn embed_trivial(t: &TrivialObservable, space: &StateSpace) -> Observable {
    let pairs = t
        .outcomes()
        .iter()
        .zip(t.probs())
        .map(|(&x, &p)| (x, space.constant_effect(p)))
        .collect();
    Observable::new(space.clone(), pairs).expect("trivial observable has distinct outcomes")
}

/// Process-space trivial embedding `T_x = p_x ξ ⊗ 𝟙` with a chosen input
/// state ξ.
pub fn embed_trivial_process(
    t: &TrivialObservable,
    space: &StateSpace,
    xi: &HermitianMatrix,
) -> Result<Observable> {
    let StateSpace::Process { dim_a, dim_b } = space else {
        return Err(Error::SpaceMismatch("expected a process space".into()));
    };
    if xi.dim() != *dim_a {
        return Err(Error::SpaceMismatch(format!(
            "input state of dimension {} for d_A = {dim_a}",
            xi.dim()
        )));
    }
    check_density(xi)?;
    let base = xi.tensor(&HermitianMatrix::identity(*dim_b))?;
    let pairs = t
        .outcomes()
        .iter()
        .zip(t.probs())
        .map(|(&x, &p)| (x, Effect::Process { op: base.scale(p) }))
        .collect();
    Observable::new(space.clone(), pairs)
}

/// Maximum tolerated residual when fitting an affine functional to vertex
/// values.
pub const AFFINE_TOL: f64 = 1e-9;

/// The affine functional taking the given values at the polytope's vertices.
pub fn polytope_effect_from_vertex_values(space: &StateSpace, values: &[f64]) -> Result<Effect> {
    let StateSpace::Polytope(p) = space else {
        return Err(Error::SpaceMismatch(
            "vertex values need a polytope space".into(),
        ));
    };
    if values.len() != p.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "{} values for {} vertices",
            values.len(),
            p.vertex_count()
        )));
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter(format!(
            "effect values {values:?} outside [0, 1]"
        )));
    }
    affine_fit(p, values)
}

/// Fits `(linear, offset)` to arbitrary vertex values (no range check).
pub(crate) fn affine_fit(p: &Polytope, values: &[f64]) -> Result<Effect> {
    let rows: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|v| {
            let mut r = v.clone();
            r.push(1.0);
            r
        })
        .collect();
    let (x, residual) = real::solve(&rows, values);
    if residual > AFFINE_TOL {
        return Err(Error::AffineInconsistency { residual });
    }
    let offset = x[p.ambient_dim()];
    let linear = x[..p.ambient_dim()].to_vec();
    Ok(Effect::Polytope { linear, offset })
}

/// Values of a polytope effect at each vertex.
pub fn vertex_values(p: &Polytope, e: &Effect) -> Vec<f64> {
    p.vertices().iter().filter_map(|v| e.at_point(v)).collect()
}
