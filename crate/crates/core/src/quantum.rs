//! Quantum observables: bases, regular rank-1 POVMs, reverse observables and
//! the eigenvalue form of the compatibility condition.

use serde::{Deserialize, Serialize};

use crate::compat::{Status, INEQUALITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix, HermitianMatrix, C64};
use crate::noise::noise_content;
use crate::sample;
use crate::theory::{Effect, Observable, StateSpace, NORMALIZATION_TOL};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Relative singular-value threshold for the spanning-set witness.
pub const WITNESS_RANK_TOL: f64 = 1e-8;

/// An orthonormal basis of `ℂ^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisWire", into = "BasisWire")]
pub struct Basis {
    dim: usize,
    vectors: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
struct BasisWire {
    /// Vectors as the columns of a matrix.
    columns: ComplexMatrix,
}

impl TryFrom<BasisWire> for Basis {
    type Error = Error;
    fn try_from(w: BasisWire) -> Result<Self> {
        Basis::from_columns_of(&w.columns)
    }
}

impl From<Basis> for BasisWire {
    fn from(b: Basis) -> Self {
        BasisWire {
            columns: ComplexMatrix::from_columns(&b.vectors).expect("basis vectors share a length"),
        }
    }
}

impl Basis {
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(
                "a basis of ℂ^d needs d vectors of length d".into(),
            ));
        }
        for i in 0..dim {
            for j in i..dim {
                let ip = inner(&vectors[i], &vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (ip - C64::new(target, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "vectors {i} and {j} have inner product {ip}"
                    )));
                }
            }
        }
        Ok(Basis { dim, vectors })
    }

    pub fn from_columns_of(u: &ComplexMatrix) -> Result<Self> {
        Basis::new((0..u.cols()).map(|j| u.column(j)).collect())
    }

    pub fn computational(d: usize) -> Self {
        Basis::from_columns_of(&ComplexMatrix::identity(d)).expect("identity columns")
    }

    /// `ψ_j = d^{-1/2} Σ_k ω^{jk} φ_k` with `ω = e^{2πi/d}`.
    pub fn fourier(d: usize) -> Self {
        let norm = 1.0 / (d as f64).sqrt();
        let vectors = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| {
                        let angle = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
                        C64::from_polar(norm, angle)
                    })
                    .collect()
            })
            .collect();
        Basis::new(vectors).expect("Fourier vectors are orthonormal")
    }

    pub fn haar_random(d: usize, seed: u64) -> Self {
        let mut rng = sample::rng(seed);
        Basis::from_columns_of(&sample::haar_unitary(d, &mut rng)).expect("unitary columns")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }
}

/// The sharp POVM `{|b_i⟩⟨b_i|}` of a basis, with outcomes `0..d`.
pub fn sharp_povm(basis: &Basis) -> Observable {
    let effects = basis
        .vectors
        .iter()
        .map(|v| Effect::Quantum {
            op: HermitianMatrix::projector(v),
        })
        .collect();
    Observable::from_effects(StateSpace::Quantum { dim: basis.dim }, effects)
        .expect("projectors fit the space")
}

/// POVM with effects `(d/N) P_x` for rank-1 projections `P_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularRank1Povm {
    dim: usize,
    vectors: Vec<Vec<C64>>,
    observable: Observable,
}

impl RegularRank1Povm {
    /// Vectors are normalized here; they must form a tight frame, i.e.
    /// `(d/N) Σ_x |v_x⟩⟨v_x| = 𝟙` within 1e-9.
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let n = vectors.len();
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(
                "frame vectors must share a length".into(),
            ));
        }
        if n < dim {
            return Err(Error::InvalidParameter(format!(
                "a regular rank-1 POVM needs N ≥ d, got N = {n}, d = {dim}"
            )));
        }
        let vectors: Vec<Vec<C64>> = vectors
            .iter()
            .map(|v| crate::linalg::normalize(v))
            .collect();
        let weight = dim as f64 / n as f64;
        let effects: Vec<Effect> = vectors
            .iter()
            .map(|v| Effect::Quantum {
                op: HermitianMatrix::projector(v).scale(weight),
            })
            .collect();
        let observable = Observable::from_effects(StateSpace::Quantum { dim }, effects)?;
        let report = crate::theory::validate_observable(&observable);
        if !report.is_valid() {
            return Err(Error::InvalidParameter(format!(
                "frame is not tight: {:?}",
                report.violations
            )));
        }
        Ok(RegularRank1Povm {
            dim,
            vectors,
            observable,
        })
    }

    /// Harmonic frame `v_x = d^{-1/2}(ω^{xk})_k`, `ω = e^{2πi/N}`, optionally
    /// rotated by a unitary.
    pub fn harmonic(d: usize, n: usize, rotation: Option<&ComplexMatrix>) -> Result<Self> {
        let norm = 1.0 / (d as f64).sqrt();
        let mut vectors: Vec<Vec<C64>> = (0..n)
            .map(|x| {
                (0..d)
                    .map(|k| {
                        let angle = 2.0 * std::f64::consts::PI * ((x * k) % n) as f64 / n as f64;
                        C64::from_polar(norm, angle)
                    })
                    .collect()
            })
            .collect();
        if let Some(u) = rotation {
            vectors = vectors
                .iter()
                .map(|v| u.apply(v))
                .collect::<Result<Vec<_>>>()?;
        }
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }
}

/// Minimal eigenvalue of every effect of the reverse of a regular rank-1 POVM:
/// `(N−d)/(N(N−1))`.
pub fn reverse_regular_min_eigenvalue(d: usize, n: usize) -> f64 {
    (n as f64 - d as f64) / (n as f64 * (n as f64 - 1.0))
}

/// Smallest `N` for which reverses of `m` regular rank-1 POVMs in dimension
/// `d` are certified compatible: `(d−1)·m + 1`.
pub fn reversed_threshold(d: usize, m: usize) -> usize {
    (d - 1) * m + 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenConditionReport {
    /// Sum of minimal eigenvalues for each POVM (its noise content).
    pub eigen_sums: Vec<f64>,
    pub total: f64,
    pub threshold: f64,
    /// `CompatibleCertified` when `total ≥ m − 1`, otherwise `Undecided`.
    pub status: Status,
}

/// Sum of minimal eigenvalues of all effects against `m − 1`: at or above the
/// threshold the POVMs are compatible; below it nothing is concluded.
pub fn eigen_condition_report(povms: &[Observable]) -> Result<EigenConditionReport> {
    let dim = match povms.first().map(Observable::space) {
        Some(StateSpace::Quantum { dim }) => *dim,
        Some(_) => return Err(Error::SpaceMismatch("expected quantum POVMs".into())),
        None => return Err(Error::InvalidParameter("no POVMs given".into())),
    };
    if povms
        .iter()
        .any(|p| p.space() != &StateSpace::Quantum { dim })
    {
        return Err(Error::SpaceMismatch(
            "POVMs act on different dimensions".into(),
        ));
    }
    let eigen_sums = povms
        .iter()
        .map(|p| noise_content(p).map(|d| d.t))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = eigen_sums.iter().sum();
    let threshold = povms.len() as f64 - 1.0;
    let status = if total >= threshold - INEQUALITY_TOL {
        Status::CompatibleCertified
    } else {
        Status::Undecided
    };
    Ok(EigenConditionReport {
        eigen_sums,
        total,
        threshold,
        status,
    })
}

/// Sharp POVMs of the computational and Fourier bases.
pub fn fourier_mub_pair(d: usize) -> Result<(Observable, Observable)> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension {d} < 2")));
    }
    Ok((
        sharp_povm(&Basis::computational(d)),
        sharp_povm(&Basis::fourier(d)),
    ))
}

/// The density operator
/// `σ = (1/(d−1)) Σ_{i≥1} |φ_i⟩⟨φ_i| − (1/((d−1)(d−2))) Σ_{1≤i<j≤d−1} (|φ_i⟩⟨φ_j| + |φ_j⟩⟨φ_i|)`
/// in the computational basis, which gives probability zero to outcome 0 and
/// `1/(d−1)` to every other outcome of both the computational and the
/// Fourier basis measurement.
pub fn mub_reverse_steering_state(d: usize) -> Result<HermitianMatrix> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "the steering state needs d ≥ 3, got {d}"
        )));
    }
    let diag = 1.0 / (d as f64 - 1.0);
    let off = -1.0 / ((d as f64 - 1.0) * (d as f64 - 2.0));
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        m.set(i, i, C64::new(diag, 0.0));
        for j in (i + 1)..d {
            m.set(i, j, C64::new(off, 0.0));
            m.set(j, i, C64::new(off, 0.0));
        }
    }
    HermitianMatrix::new(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleWitness {
    pub status: Status,
    /// `ranks[i][j][k]` is the rank of the column stack `(φ_i, ψ_j, χ_k)`.
    pub ranks: Vec<Vec<Vec<usize>>>,
    /// Smallest relative singular value over all stacks.
    pub min_relative_singular_value: f64,
}

/// Spanning-set witness for the reverses of three sharp qutrit POVMs: if
/// every stack `(φ_i, ψ_j, χ_k)` has rank 3, the reversed POVMs are
/// incompatible. Otherwise nothing is concluded.
#[allow(clippy::needless_range_loop)]
pub fn reverse_triple_witness(b1: &Basis, b2: &Basis, b3: &Basis) -> Result<TripleWitness> {
    if [b1, b2, b3].iter().any(|b| b.dim != 3) {
        return Err(Error::InvalidParameter(
            "the triple witness applies to qutrit bases".into(),
        ));
    }
    let mut ranks = vec![vec![vec![0; 3]; 3]; 3];
    let mut min_rel = f64::INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let stack = ComplexMatrix::from_columns(&[
                    b1.vectors[i].clone(),
                    b2.vectors[j].clone(),
                    b3.vectors[k].clone(),
                ])?;
                let sv = stack.singular_values();
                min_rel = min_rel.min(sv[2] / sv[0]);
                ranks[i][j][k] = stack.rank(WITNESS_RANK_TOL);
            }
        }
    }
    let all_full = ranks.iter().flatten().flatten().all(|&r| r == 3);
    Ok(TripleWitness {
        status: if all_full {
            Status::IncompatibleCertified
        } else {
            Status::Undecided
        },
        ranks,
        min_relative_singular_value: min_rel,
    })
}

/// Seed of the shipped generic qutrit basis triple; bases are
/// `Basis::haar_random(d, seed + k)` for `k = 0, 1, 2`.
pub const TRIPLE_SEED: u64 = 0xC0FFEE;

pub fn seeded_basis_triple(seed: u64) -> (Basis, Basis, Basis) {
    (
        Basis::haar_random(3, seed),
        Basis::haar_random(3, seed.wrapping_add(1)),
        Basis::haar_random(3, seed.wrapping_add(2)),
    )
}

const POVM_ATTEMPTS: usize = 8;

/// Random POVM `S^{-1/2} G_x S^{-1/2}` from Wishart matrices `G_x`, with
/// `S = Σ G_x`. Deterministic per seed; a singular `S` moves on to the next
/// seed, up to eight attempts.
pub fn random_povm(d: usize, n: usize, seed: u64) -> Result<Observable> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("need d ≥ 1 and N ≥ 1".into()));
    }
    let space = StateSpace::Quantum { dim: d };
    if n == 1 {
        return Observable::from_effects(space.clone(), vec![space.unit_effect()]);
    }
    for attempt in 0..POVM_ATTEMPTS {
        let mut rng = sample::rng(seed.wrapping_add(attempt as u64));
        let gs: Vec<HermitianMatrix> = (0..n)
            .map(|_| {
                let x = sample::ginibre(d, d, &mut rng);
                HermitianMatrix::new(&x * &x.adjoint())
            })
            .collect::<Result<_>>()?;
        let mut s = HermitianMatrix::zeros(d);
        for g in &gs {
            s = s.try_add(g)?;
        }
        let ev = s.eigenvalues()?;
        if ev[0] <= 1e-10 * ev[d - 1] {
            continue;
        }
        let s_inv_half = s.map_spectrum(|x| 1.0 / x.sqrt())?;
        let effects = gs
            .iter()
            .map(|g| {
                g.conjugate_by(s_inv_half.as_matrix())
                    .map(|op| Effect::Quantum { op })
            })
            .collect::<Result<Vec<_>>>()?;
        let a = Observable::from_effects(space.clone(), effects)?;
        if crate::theory::validate_observable_tol(&a, NORMALIZATION_TOL).is_valid() {
            return Ok(a);
        }
    }
    Err(Error::GenerationFailure {
        attempts: POVM_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::reverse;
    use crate::theory::validate_observable;

    #[test]
    fn reverse_regular_eigenvalues() {
        for d in 2..=3 {
            for n in d..=8 {
                let u = sample::haar_unitary(d, &mut sample::rng((d * 100 + n) as u64));
                let a = RegularRank1Povm::harmonic(d, n, Some(&u)).unwrap();
                let r = reverse(a.observable()).unwrap();
                let expected = reverse_regular_min_eigenvalue(d, n);
                for e in r.effects() {
                    let got = e.operator().unwrap().min_eigenvalue().unwrap();
                    assert!((got - expected).abs() < 1e-10, "d={d} n={n}");
                }
                let w = noise_content(&r).unwrap().t;
                assert!((w - (n - d) as f64 / (n - 1) as f64).abs() < 1e-9);
            }
        }
        assert!((reverse_regular_min_eigenvalue(2, 3) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(reversed_threshold(2, 2), 3);
        assert_eq!(reversed_threshold(3, 2), 5);
        assert_eq!(reversed_threshold(2, 3), 4);
    }

    #[test]
    fn eigen_condition_examples() {
        let (a, b) = fourier_mub_pair(2).unwrap();
        let rep = eigen_condition_report(&[a, b]).unwrap();
        assert_eq!(rep.total, 0.0);
        assert_eq!(rep.status, Status::Undecided);

        let t1 = RegularRank1Povm::harmonic(2, 3, None).unwrap();
        let u = sample::haar_unitary(2, &mut sample::rng(9));
        let t2 = RegularRank1Povm::harmonic(2, 3, Some(&u)).unwrap();
        let r1 = reverse(t1.observable()).unwrap();
        let r2 = reverse(t2.observable()).unwrap();
        let rep = eigen_condition_report(&[r1, r2]).unwrap();
        assert!((rep.total - 1.0).abs() < 1e-12);
        assert_eq!(rep.status, Status::CompatibleCertified);

        let mixed = [
            sharp_povm(&Basis::computational(2)),
            sharp_povm(&Basis::computational(3)),
        ];
        assert!(matches!(
            eigen_condition_report(&mixed),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn mub_overlaps() {
        for d in 2..=5 {
            let f = Basis::fourier(d);
            let c = Basis::computational(d);
            for phi in c.vectors() {
                for psi in f.vectors() {
                    assert!((inner(phi, psi).norm() - 1.0 / (d as f64).sqrt()).abs() < 1e-10);
                }
            }
        }
        // d = 2: Fourier vectors are the X eigenvectors (|0⟩ ± |1⟩)/√2.
        let f = Basis::fourier(2);
        let s = 1.0 / 2f64.sqrt();
        assert!((f.vectors()[1][1] - C64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_state_conditions() {
        for d in 3..=6 {
            let sigma = mub_reverse_steering_state(d).unwrap();
            assert!(sigma.min_eigenvalue().unwrap() >= -1e-10);
            assert!((sigma.trace() - 1.0).abs() < 1e-10);
            let (a, b) = fourier_mub_pair(d).unwrap();
            for obs in [&a, &b] {
                for (i, e) in obs.effects().iter().enumerate() {
                    let p = e.operator().unwrap().trace_product(&sigma).unwrap();
                    let want = if i == 0 { 0.0 } else { 1.0 / (d as f64 - 1.0) };
                    assert!((p - want).abs() < 1e-10, "d={d} i={i}: {p}");
                }
            }
        }
        assert!(matches!(
            mub_reverse_steering_state(2),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn triple_witness() {
        let (b1, b2, b3) = seeded_basis_triple(TRIPLE_SEED);
        let w = reverse_triple_witness(&b1, &b2, &b3).unwrap();
        assert_eq!(w.status, Status::IncompatibleCertified);

        let c = Basis::computational(3);
        let w = reverse_triple_witness(&c, &c, &b3).unwrap();
        assert_eq!(w.status, Status::Undecided);

        let mut shared = b3.vectors().to_vec();
        shared[0] = b2.vectors()[0].clone();
        // Complete {ψ_0} to an orthonormal basis so χ_0 = ψ_0.
        let completed = sample::orthonormalize_columns(
            &ComplexMatrix::from_columns(&[
                shared[0].clone(),
                b3.vectors()[1].clone(),
                b3.vectors()[2].clone(),
            ])
            .unwrap(),
        )
        .unwrap();
        let chi = Basis::from_columns_of(&completed).unwrap();
        let w = reverse_triple_witness(&b1, &b2, &chi).unwrap();
        assert_eq!(w.status, Status::Undecided);
        assert!(matches!(
            reverse_triple_witness(&Basis::computational(2), &b2, &b3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn random_povm_properties() {
        let one = random_povm(3, 1, 5).unwrap();
        assert_eq!(
            one.effects()[0],
            Effect::Quantum {
                op: HermitianMatrix::identity(3)
            }
        );
        for seed in 0..20 {
            let a = random_povm(2 + (seed as usize % 2), 3, seed).unwrap();
            assert!(validate_observable(&a).is_valid());
        }
        let a = random_povm(3, 4, 77).unwrap();
        let b = random_povm(3, 4, 77).unwrap();
        for (x, y) in a.effects().iter().zip(b.effects()) {
            let (x, y) = (
                x.operator().unwrap().as_matrix(),
                y.operator().unwrap().as_matrix(),
            );
            assert!(
                x.data()
                    .iter()
                    .zip(y.data())
                    .all(|(p, q)| p.re.to_bits() == q.re.to_bits()
                        && p.im.to_bits() == q.im.to_bits())
            );
        }
    }

    #[test]
    fn regular_rank1_rejects_bad_frames() {
        let c = Basis::computational(3);
        assert!(RegularRank1Povm::new(c.vectors()[..2].to_vec()).is_err());
        let dup = vec![
            c.vectors()[0].clone(),
            c.vectors()[0].clone(),
            c.vectors()[1].clone(),
        ];
        assert!(RegularRank1Povm::new(dup).is_err());
    }
}
