//! Process backend: channels as states through their Choi operators, and
//! process POVMs (testers) measuring them.
//!
//! Choi operators use the unnormalized `ψ₊ = Σ_i φ_i ⊗ φ_i`, so
//! `tr_B Ω = 𝟙_A` and the probability of outcome `x` is `tr[Ω M_x]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compat::{sufficient_compatible, JointObservable, Status};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::noise::{self, NoiseDecomposition};
use crate::quantum::Basis;
use crate::sample;
use crate::theory::{validate_observable, Effect, Observable, State, StateSpace};
use crate::Outcome;

/// Choi operator of a trace-preserving channel from `ℂ^{d_A}` to `ℂ^{d_B}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiWire", into = "ChoiWire")]
pub struct ChoiState {
    dim_a: usize,
    dim_b: usize,
    omega: HermitianMatrix,
}

#[derive(Serialize, Deserialize)]
struct ChoiWire {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    omega: HermitianMatrix,
}

impl TryFrom<ChoiWire> for ChoiState {
    type Error = Error;
    fn try_from(w: ChoiWire) -> Result<Self> {
        ChoiState::new(w.omega, w.dim_a, w.dim_b)
    }
}

impl From<ChoiState> for ChoiWire {
    fn from(c: ChoiState) -> Self {
        ChoiWire {
            dim_a: c.dim_a,
            dim_b: c.dim_b,
            omega: c.omega,
        }
    }
}

impl ChoiState {
    pub fn new(omega: HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        State::choi(omega.clone(), dim_a, dim_b)?;
        Ok(ChoiState {
            dim_a,
            dim_b,
            omega,
        })
    }

    /// `Ω = Σ_k (𝟙 ⊗ K_k)|ψ₊⟩⟨ψ₊|(𝟙 ⊗ K_k)†` for Kraus operators
    /// `K_k : ℂ^{d_A} → ℂ^{d_B}`.
    pub fn from_kraus(kraus: &[ComplexMatrix], dim_a: usize) -> Result<Self> {
        let dim_b = kraus.first().map_or(0, ComplexMatrix::rows);
        if dim_b == 0 || kraus.iter().any(|k| k.rows() != dim_b || k.cols() != dim_a) {
            return Err(Error::InvalidParameter(
                "Kraus operators must all be d_B × d_A".into(),
            ));
        }
        let n = dim_a * dim_b;
        let mut omega = ComplexMatrix::zeros(n, n);
        for k in kraus {
            let v: Vec<C64> = (0..dim_a)
                .flat_map(|i| (0..dim_b).map(move |b| k.get(b, i)))
                .collect();
            omega = &omega + &ComplexMatrix::outer(&v, &v);
        }
        ChoiState::new(HermitianMatrix::new(omega)?, dim_a, dim_b)
    }

    pub fn identity(d: usize) -> Self {
        ChoiState::from_kraus(&[ComplexMatrix::identity(d)], d).expect("identity channel")
    }

    /// `Φ(X) = (1−p)·X + p·tr(X)·𝟙/d`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing weight {p}")));
        }
        let id = ChoiState::identity(d);
        let noise = HermitianMatrix::identity(d * d).scale(1.0 / d as f64);
        ChoiState::new(id.omega.lin_comb(1.0 - p, &noise, p)?, d, d)
    }

    pub fn random<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> Self {
        let k = sample::random_kraus(dim_a, dim_b, dim_a * dim_b, rng);
        ChoiState::from_kraus(&k, dim_a).expect("Stinespring compression is a channel")
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn omega(&self) -> &HermitianMatrix {
        &self.omega
    }

    pub fn to_state(&self) -> State {
        State::choi(self.omega.clone(), self.dim_a, self.dim_b).expect("validated on construction")
    }
}

/// A process POVM: effects `M_x ≥ 0` with `Σ_x M_x = ρ ⊗ 𝟙`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PpovmWire", into = "PpovmWire")]
pub struct Ppovm {
    observable: Observable,
    rho: HermitianMatrix,
}

#[derive(Serialize, Deserialize)]
struct PpovmWire {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    rho: HermitianMatrix,
    effects: Vec<HermitianMatrix>,
    /// Defaults to `0..N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<Outcome>>,
}

impl TryFrom<PpovmWire> for Ppovm {
    type Error = Error;
    fn try_from(w: PpovmWire) -> Result<Self> {
        let outcomes = w
            .outcomes
            .unwrap_or_else(|| (0..w.effects.len() as Outcome).collect());
        if outcomes.len() != w.effects.len() {
            return Err(Error::OutcomeMismatch(format!(
                "{} outcomes for {} effects",
                outcomes.len(),
                w.effects.len()
            )));
        }
        let space = StateSpace::process(w.dim_a, w.dim_b)?;
        let pairs = outcomes
            .into_iter()
            .zip(w.effects)
            .map(|(x, op)| (x, Effect::Process { op }))
            .collect();
        let ppovm = Ppovm::new(Observable::new(space, pairs)?)?;
        let dev = ppovm.rho.frobenius_distance(&w.rho)?;
        if dev > crate::theory::NORMALIZATION_TOL {
            return Err(Error::InvalidPpovm(format!(
                "stated ρ differs from the effect sum by {dev:.3e}"
            )));
        }
        Ok(ppovm)
    }
}

impl From<Ppovm> for PpovmWire {
    fn from(p: Ppovm) -> Self {
        let (dim_a, dim_b) = p.dims();
        let outcomes = p.observable.outcomes().to_vec();
        let default = outcomes.iter().enumerate().all(|(i, &x)| x == i as Outcome);
        PpovmWire {
            dim_a,
            dim_b,
            rho: p.rho,
            effects: p
                .observable
                .effects()
                .iter()
                .map(|e| e.operator().expect("process effect").clone())
                .collect(),
            outcomes: (!default).then_some(outcomes),
        }
    }
}

impl Ppovm {
    /// Validates a process-space observable and extracts its `ρ`.
    pub fn new(observable: Observable) -> Result<Self> {
        if !matches!(observable.space(), StateSpace::Process { .. }) {
            return Err(Error::SpaceMismatch("a PPOVM needs a process space".into()));
        }
        let report = validate_observable(&observable);
        if !report.is_valid() {
            return Err(Error::InvalidPpovm(format!("{:?}", report.violations)));
        }
        let rho = observable
            .process_normalization()
            .ok_or_else(|| Error::InvalidPpovm("no normalization state".into()))?;
        Ok(Ppovm { observable, rho })
    }

    pub fn from_effects(dim_a: usize, dim_b: usize, effects: Vec<HermitianMatrix>) -> Result<Self> {
        let space = StateSpace::process(dim_a, dim_b)?;
        let effects = effects
            .into_iter()
            .map(|op| Effect::Process { op })
            .collect();
        Ppovm::new(Observable::from_effects(space, effects)?)
    }

    pub fn dims(&self) -> (usize, usize) {
        match self.observable.space() {
            StateSpace::Process { dim_a, dim_b } => (*dim_a, *dim_b),
            _ => unreachable!("checked on construction"),
        }
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn into_observable(self) -> Observable {
        self.observable
    }

    pub fn rho(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn effect_operators(&self) -> impl Iterator<Item = &HermitianMatrix> {
        self.observable
            .effects()
            .iter()
            .filter_map(Effect::operator)
    }
}

/// Outcome probabilities `tr[Ω_Φ M_x]`.
pub fn evaluate_ppovm(a: &Ppovm, phi: &ChoiState) -> Result<Vec<f64>> {
    if a.dims() != (phi.dim_a, phi.dim_b) {
        return Err(Error::SpaceMismatch(format!(
            "PPOVM on {:?} applied to a channel {}→{}",
            a.dims(),
            phi.dim_a,
            phi.dim_b
        )));
    }
    a.effect_operators()
        .map(|m| m.trace_product(&phi.omega))
        .collect()
}

/// `A = m·T + (1−m)·A′` with `m = Σ_x λ_min(A_x)`, `T_x = (m_x/m) ρ⊗𝟙` and
/// `A′_x = (A_x − m_x ρ⊗𝟙)/(1−m)`. The residual is revalidated as a PPOVM.
pub fn ppovm_noise_lower_bound(a: &Ppovm) -> Result<NoiseDecomposition> {
    let d = noise::noise_content(&a.observable)?;
    Ppovm::new(d.residual.clone())?;
    Ok(d)
}

/// The trivial PPOVM `A_x = p_x |ψ_x⟩⟨ψ_x| ⊗ 𝟙` built from the first
/// `p.len()` vectors of an orthonormal basis of `ℂ^{d_A}`. Every effect has
/// minimal eigenvalue 0 when `d_A ≥ 2`, although the PPOVM is trivial.
pub fn orthogonal_trivial_ppovm(probs: &[f64], basis: &Basis, dim_b: usize) -> Result<Ppovm> {
    if probs.len() > basis.dim() || probs.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} outcomes need between 1 and {} orthogonal vectors",
            probs.len(),
            basis.dim()
        )));
    }
    let id_b = HermitianMatrix::identity(dim_b);
    let effects = probs
        .iter()
        .zip(basis.vectors())
        .map(|(&p, v)| HermitianMatrix::projector(v).scale(p).tensor(&id_b))
        .collect::<Result<Vec<_>>>()?;
    Ppovm::from_effects(basis.dim(), dim_b, effects)
}

/// Random PPOVM with `n` outcomes: `M_x = (√ρ⊗𝟙) E_x (√ρ⊗𝟙)` for a random
/// density operator `ρ` and a random POVM `E` on `ℂ^{d_A d_B}`.
pub fn random_ppovm<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    n: usize,
    rng: &mut R,
) -> Result<Ppovm> {
    let rho = sample::random_density(dim_a, rng);
    let e = crate::quantum::random_povm(dim_a * dim_b, n, rng.random())?;
    let root = rho.sqrt_psd()?.tensor(&HermitianMatrix::identity(dim_b))?;
    let effects = e
        .effects()
        .iter()
        .map(|x| {
            x.operator()
                .expect("quantum effect")
                .conjugate_by(root.as_matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    Ppovm::from_effects(dim_a, dim_b, effects)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cor2Report {
    /// `Σ_x λ_min(A_x)` for each PPOVM.
    pub eigen_sums: Vec<f64>,
    /// Whether each PPOVM was recognized as exactly trivial (noise content 1).
    pub exact_trivial: Vec<bool>,
    /// The noise contents used for certification: 1 for exactly trivial
    /// PPOVMs, the eigenvalue sum otherwise.
    pub noise_used: Vec<f64>,
    pub total: f64,
    pub threshold: f64,
    pub status: Status,
    pub witness: Option<JointObservable>,
}

/// Sum of minimal eigenvalues against `m − 1`. Certification is sound since
/// each eigenvalue sum bounds the noise content from below.
pub fn cor2_report(ppovms: &[Ppovm]) -> Result<Cor2Report> {
    let Some(first) = ppovms.first() else {
        return Err(Error::InvalidParameter("no PPOVMs given".into()));
    };
    if ppovms.iter().any(|p| p.dims() != first.dims()) {
        return Err(Error::SpaceMismatch(
            "PPOVMs on different dimensions".into(),
        ));
    }
    let eigen_sums = ppovms
        .iter()
        .map(|p| noise::noise_content(&p.observable).map(|d| d.t))
        .collect::<Result<Vec<_>>>()?;
    let exact_trivial: Vec<bool> = ppovms
        .iter()
        .map(|p| noise::noise_content_exact_trivial_ppovm(&p.observable).is_some())
        .collect();
    let noise_used: Vec<f64> = eigen_sums
        .iter()
        .zip(&exact_trivial)
        .map(|(&w, &t)| if t { 1.0 } else { w })
        .collect();
    let threshold = ppovms.len() as f64 - 1.0;
    let (total, status, witness) = if ppovms.len() >= 2 {
        let obs: Vec<Observable> = ppovms.iter().map(|p| p.observable.clone()).collect();
        let verdict = sufficient_compatible(&obs)?;
        (verdict.inequality_value, verdict.status, verdict.witness)
    } else {
        (noise_used[0], Status::CompatibleCertified, None)
    };
    Ok(Cor2Report {
        eigen_sums,
        exact_trivial,
        noise_used,
        total,
        threshold,
        status,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::is_joint_of;
    use crate::linalg::normalize;
    use crate::theory::{embed_trivial_process, TrivialObservable};

    fn bell_vectors() -> Vec<Vec<C64>> {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        vec![
            normalize(&[o, z, z, o]),
            normalize(&[o, z, z, -o]),
            normalize(&[z, o, o, z]),
            normalize(&[z, o, -o, z]),
        ]
    }

    #[test]
    fn identity_choi_is_unnormalized_psi_plus() {
        let c = ChoiState::identity(2);
        assert!((c.omega().trace() - 2.0).abs() < 1e-15);
        assert_eq!(c.omega().as_matrix().get(0, 3), C64::new(1.0, 0.0));
    }

    #[test]
    fn trivial_ppovm_gives_its_distribution() {
        let space = StateSpace::process(2, 2).unwrap();
        let xi = crate::sample::random_density(2, &mut crate::sample::rng(1));
        let t = TrivialObservable::new(vec![0, 1, 2], vec![0.2, 0.3, 0.5]).unwrap();
        let a = Ppovm::new(embed_trivial_process(&t, &space, &xi).unwrap()).unwrap();
        let p = evaluate_ppovm(&a, &ChoiState::identity(2)).unwrap();
        for (got, want) in p.iter().zip([0.2, 0.3, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        let single = Ppovm::from_effects(
            2,
            2,
            vec![xi.tensor(&HermitianMatrix::identity(2)).unwrap()],
        )
        .unwrap();
        let phi = ChoiState::random(2, 2, &mut crate::sample::rng(2));
        assert!((evaluate_ppovm(&single, &phi).unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_matches_born_rule() {
        let p = 0.3;
        let phi = ChoiState::depolarizing(2, p).unwrap();
        let bell = bell_vectors();
        let tester = Ppovm::from_effects(
            2,
            2,
            bell.iter()
                .map(|v| HermitianMatrix::projector(v).scale(0.5))
                .collect(),
        )
        .unwrap();
        let got = evaluate_ppovm(&tester, &phi).unwrap();

        // Prepare |Φ⁺⟩ on A'⊗A, send A through the channel, measure Bell.
        // Kraus form of the depolarizing channel: √(1−3p/4)·𝟙, √(p/4)·σ_k.
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        let paulis = [
            ComplexMatrix::identity(2),
            ComplexMatrix::new(2, 2, vec![z, o, o, z]).unwrap(),
            ComplexMatrix::new(2, 2, vec![z, -i, i, z]).unwrap(),
            ComplexMatrix::new(2, 2, vec![o, z, z, -o]).unwrap(),
        ];
        let weights = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        for (x, e) in bell.iter().enumerate() {
            let mut prob = 0.0;
            for (k, w) in paulis.iter().zip(weights) {
                let out = ComplexMatrix::identity(2)
                    .tensor(k)
                    .unwrap()
                    .apply(&bell[0])
                    .unwrap();
                prob += w * crate::linalg::inner(e, &out).norm_sqr();
            }
            assert!((got[x] - prob).abs() < 1e-12, "{x}: {} vs {prob}", got[x]);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let rho = HermitianMatrix::from_diag(&[0.7, 0.3]);
        let unit = rho.tensor(&HermitianMatrix::identity(2)).unwrap();
        let n = 4;
        let a = Ppovm::from_effects(2, 2, vec![unit.scale(1.0 / n as f64); n]).unwrap();
        let d = ppovm_noise_lower_bound(&a).unwrap();
        assert!((d.t - 0.3).abs() < 1e-12);
        let single = Ppovm::from_effects(2, 2, vec![unit.clone()]).unwrap();
        let d = ppovm_noise_lower_bound(&single).unwrap();
        assert!((d.t - 0.3).abs() < 1e-12);
        let back = d.reconstruct().unwrap();
        assert!(back.max_effect_distance(single.observable()).unwrap() < 1e-12);
    }

    #[test]
    fn orthogonal_trivial_gap() {
        let a = orthogonal_trivial_ppovm(&[0.25, 0.75], &Basis::computational(2), 2).unwrap();
        assert_eq!(ppovm_noise_lower_bound(&a).unwrap().t, 0.0);
        assert_eq!(
            noise::noise_content_exact_trivial_ppovm(a.observable()),
            Some(1.0)
        );
    }

    #[test]
    fn cor2_examples() {
        let rho = HermitianMatrix::from_diag(&[0.5, 0.5]);
        let unit = rho.tensor(&HermitianMatrix::identity(2)).unwrap();
        let half = Ppovm::from_effects(2, 2, vec![unit.scale(0.5), unit.scale(0.5)]).unwrap();
        let rep = cor2_report(&[half.clone(), half.clone()]).unwrap();
        assert!((rep.eigen_sums[0] - 0.5).abs() < 1e-12);
        assert!(rep.total >= rep.threshold);
        assert_eq!(rep.status, Status::CompatibleCertified);
        let w = rep.witness.unwrap();
        assert!(is_joint_of(
            &w,
            &[half.observable().clone(), half.observable().clone()],
            1e-9
        )
        .unwrap());

        // A_0 = (s/2)𝟙 + (1/2 − s)P, A_1 = (s/2)𝟙 + (1/2 − s)(𝟙 − P) with P a
        // Bell projector: Σ_x λ_min(A_x) = s, and no effect factorizes.
        let low = |s: f64| {
            let p = HermitianMatrix::projector(&bell_vectors()[0]);
            let id = HermitianMatrix::identity(4);
            let q = id.try_sub(&p).unwrap();
            Ppovm::from_effects(
                2,
                2,
                vec![
                    id.lin_comb(s / 2.0, &p, 0.5 - s).unwrap(),
                    id.lin_comb(s / 2.0, &q, 0.5 - s).unwrap(),
                ],
            )
            .unwrap()
        };
        let rep = cor2_report(&[low(0.3), low(0.4)]).unwrap();
        assert!((rep.eigen_sums[0] - 0.3).abs() < 1e-12);
        assert!((rep.eigen_sums[1] - 0.4).abs() < 1e-12);
        assert_eq!(rep.status, Status::Undecided);

        let trivial = orthogonal_trivial_ppovm(&[0.5, 0.5], &Basis::computational(2), 2).unwrap();
        let other = random_ppovm(2, 2, 3, &mut crate::sample::rng(5)).unwrap();
        let rep = cor2_report(&[trivial.clone(), other.clone()]).unwrap();
        assert_eq!(rep.exact_trivial, vec![true, false]);
        assert_eq!(rep.status, Status::CompatibleCertified);
        let w = rep.witness.unwrap();
        assert!(is_joint_of(
            &w,
            &[trivial.into_observable(), other.into_observable()],
            1e-9
        )
        .unwrap());
    }

    #[test]
    fn random_ppovm_residuals_validate() {
        let mut r = crate::sample::rng(6);
        for _ in 0..20 {
            let a = random_ppovm(2, 2, 3, &mut r).unwrap();
            let d = ppovm_noise_lower_bound(&a).unwrap();
            Ppovm::new(d.residual.clone()).unwrap();
            let back = d.reconstruct().unwrap();
            assert!(back.max_effect_distance(a.observable()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn ppovm_json_round_trip() {
        let a = random_ppovm(2, 3, 2, &mut crate::sample::rng(7)).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"dimA\":2"));
        let back: Ppovm = serde_json::from_str(&json).unwrap();
        assert_eq!(back.dims(), (2, 3));
        assert!(
            back.observable()
                .max_effect_distance(a.observable())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn dimension_mismatch() {
        let a = random_ppovm(2, 2, 2, &mut crate::sample::rng(8)).unwrap();
        let phi = ChoiState::identity(3);
        assert!(matches!(
            evaluate_ppovm(&a, &phi),
            Err(Error::SpaceMismatch(_))
        ));
    }
}
