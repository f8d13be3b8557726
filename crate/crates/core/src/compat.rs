//! Joint observables, the noise-content compatibility inequality and an exact
//! LP decider for polytope theories.

use serde::{Deserialize, Serialize};

use crate::channels::ClassicalChannel;
use crate::error::{Error, Result};
use crate::grid;
use crate::noise::{best_noise_decomposition, NoiseDecomposition};
use crate::simplex::{self, Feasibility};
use crate::theory::{
    affine_fit, validate_observable, vertex_values, Effect, Observable, StateSpace,
    NORMALIZATION_TOL,
};
use crate::Outcome;

/// Tolerance on `Σ_j w_j ≥ m − 1`.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Largest product grid for which an explicit joint observable is built.
pub const JOINT_CELL_CAP: usize = 100_000;

/// Largest product grid accepted by the LP decider.
pub const LP_CELL_CAP: usize = 10_000;

/// Feasibility tolerance of the LP decider.
pub const LP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    CompatibleCertified,
    IncompatibleCertified,
    Undecided,
}

/// An observable on the product grid `X⁽¹⁾ × ⋯ × X⁽ᵐ⁾`. Cell outcomes are the
/// mixed-radix codes of the index tuples, first factor most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointWire", into = "JointWire")]
pub struct JointObservable {
    base: Observable,
    factors: Vec<Vec<Outcome>>,
}

#[derive(Serialize, Deserialize)]
struct JointWire {
    factors: Vec<Vec<Outcome>>,
    base: Observable,
}

impl TryFrom<JointWire> for JointObservable {
    type Error = Error;
    fn try_from(w: JointWire) -> Result<Self> {
        JointObservable::new(w.base, w.factors)
    }
}

impl From<JointObservable> for JointWire {
    fn from(j: JointObservable) -> Self {
        JointWire {
            factors: j.factors,
            base: j.base,
        }
    }
}

impl JointObservable {
    /// Checks that `base` is valid and has exactly the outcomes `0..Π|X⁽ʲ⁾|`.
    pub fn new(base: Observable, factors: Vec<Vec<Outcome>>) -> Result<Self> {
        let radices: Vec<usize> = factors.iter().map(Vec::len).collect();
        let cells = grid::cell_count(&radices)
            .ok_or_else(|| Error::InvalidParameter("product grid overflows".into()))?;
        let expected = (0..cells as Outcome).collect::<Vec<_>>();
        if base.outcomes() != expected.as_slice() {
            return Err(Error::OutcomeMismatch(format!(
                "joint base has {} outcomes, grid has {cells} cells",
                base.len()
            )));
        }
        for f in &factors {
            if f.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "factor outcomes must be sorted and distinct".into(),
                ));
            }
        }
        let report = validate_observable(&base);
        if !report.is_valid() {
            return Err(Error::InvalidParameter(format!(
                "joint base is not a valid observable: {:?}",
                report.violations
            )));
        }
        Ok(JointObservable { base, factors })
    }

    pub fn base(&self) -> &Observable {
        &self.base
    }

    pub fn factors(&self) -> &[Vec<Outcome>] {
        &self.factors
    }

    pub fn radices(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    /// The cell outcome of a tuple of factor outcomes.
    pub fn encode(&self, outcomes: &[Outcome]) -> Result<Outcome> {
        if outcomes.len() != self.factors.len() {
            return Err(Error::OutcomeMismatch(format!(
                "{} outcomes for {} factors",
                outcomes.len(),
                self.factors.len()
            )));
        }
        let indices = outcomes
            .iter()
            .zip(&self.factors)
            .map(|(x, f)| {
                f.binary_search(x)
                    .map_err(|_| Error::OutcomeMismatch(format!("outcome {x} not in {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        grid::encode(&indices, &self.radices())
    }

    /// The factor outcomes of a cell.
    pub fn decode(&self, cell: Outcome) -> Result<Vec<Outcome>> {
        let indices = grid::decode(cell, &self.radices())?;
        Ok(indices
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f[i])
            .collect())
    }
}

/// The `j`-th marginal (0-based): `A_x = Σ_{cells with x_j = x} G_cell`.
pub fn marginal(g: &JointObservable, j: usize) -> Result<Observable> {
    let Some(factor) = g.factors.get(j) else {
        return Err(Error::InvalidParameter(format!(
            "marginal {j} of a {}-fold joint",
            g.factors.len()
        )));
    };
    let space = g.base.space();
    let radices = g.radices();
    let mut acc = vec![space.zero_effect(); factor.len()];
    for (indices, e) in grid::tuples(&radices).zip(g.base.effects()) {
        let slot = &mut acc[indices[j]];
        *slot = slot.lin_comb(1.0, e, 1.0)?;
    }
    Observable::new(space.clone(), factor.iter().copied().zip(acc).collect())
}

fn checked_cells(radices: &[usize], cap: usize) -> Result<usize> {
    match grid::cell_count(radices) {
        Some(c) if c <= cap => Ok(c),
        Some(c) => Err(Error::SizeCap { cells: c, cap }),
        None => Err(Error::SizeCap {
            cells: usize::MAX,
            cap,
        }),
    }
}

/// `G_{x⁽¹⁾…x⁽ᵐ⁾} = Σ_y Π_j ν⁽ʲ⁾(y, x⁽ʲ⁾) C_y`.
pub fn joint_from_postprocessings(
    c: &Observable,
    channels: &[ClassicalChannel],
) -> Result<JointObservable> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("no channels given".into()));
    }
    for nu in channels {
        if nu.inputs() != c.outcomes() {
            return Err(Error::OutcomeMismatch(format!(
                "channel inputs {:?} vs observable outcomes {:?}",
                nu.inputs(),
                c.outcomes()
            )));
        }
    }
    let factors: Vec<Vec<Outcome>> = channels.iter().map(|n| n.outputs().to_vec()).collect();
    let radices: Vec<usize> = factors.iter().map(Vec::len).collect();
    checked_cells(&radices, JOINT_CELL_CAP)?;
    let space = c.space();
    let effects = grid::tuples(&radices)
        .map(|indices| {
            let mut cell = space.zero_effect();
            for (y, cy) in c.effects().iter().enumerate() {
                let weight: f64 = channels
                    .iter()
                    .zip(&indices)
                    .map(|(nu, &k)| nu.matrix()[y][k])
                    .product();
                if weight != 0.0 {
                    cell = cell.lin_comb(1.0, cy, weight)?;
                }
            }
            Ok(cell)
        })
        .collect::<Result<Vec<_>>>()?;
    JointObservable::new(Observable::from_effects(space.clone(), effects)?, factors)
}

/// Outcome of a compatibility test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityVerdict {
    pub status: Status,
    /// `Σ_j w_j`.
    pub inequality_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<JointObservable>,
    /// Dual ray `y` with `Aᵀy ≤ 0` and `bᵀy = 1` for an infeasible LP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
}

fn check_same_space(observables: &[Observable]) -> Result<&StateSpace> {
    let Some(first) = observables.first() else {
        return Err(Error::InvalidParameter("no observables given".into()));
    };
    if observables.iter().any(|a| a.space() != first.space()) {
        return Err(Error::SpaceMismatch(
            "observables live on different state spaces".into(),
        ));
    }
    Ok(first.space())
}

/// `p_j = 1 − w_j + (Σw − (m−1))/m`, clamped to `[0, 1]` and renormalized.
pub fn default_weights(noise: &[f64]) -> Vec<f64> {
    let m = noise.len() as f64;
    let excess = noise.iter().sum::<f64>() - (m - 1.0);
    let p: Vec<f64> = noise
        .iter()
        .map(|w| (1.0 - w + excess / m).clamp(0.0, 1.0))
        .collect();
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / m; noise.len()]
    }
}

/// Certifies compatibility when `Σ_j w_j ≥ m − 1` and builds a joint
/// observable with the default weights. Below the threshold the verdict is
/// `Undecided`. Process POVMs use the best available lower bound.
pub fn sufficient_compatible(observables: &[Observable]) -> Result<CompatibilityVerdict> {
    sufficient_compatible_with(observables, None)
}

/// As [`sufficient_compatible`], with explicit mixing weights for the joint.
/// When the product grid exceeds [`JOINT_CELL_CAP`] the verdict carries no
/// witness.
pub fn sufficient_compatible_with(
    observables: &[Observable],
    weights: Option<&[f64]>,
) -> Result<CompatibilityVerdict> {
    check_same_space(observables)?;
    if observables.len() < 2 {
        return Err(Error::InvalidParameter(
            "compatibility needs at least two observables".into(),
        ));
    }
    let decomps = observables
        .iter()
        .map(best_noise_decomposition)
        .collect::<Result<Vec<_>>>()?;
    let noise: Vec<f64> = decomps.iter().map(|d| d.t).collect();
    let total: f64 = noise.iter().sum();
    let m = observables.len() as f64;
    if total < m - 1.0 - INEQUALITY_TOL {
        return Ok(CompatibilityVerdict {
            status: Status::Undecided,
            inequality_value: total,
            witness: None,
            certificate: None,
        });
    }
    let p = match weights {
        Some(w) => w.to_vec(),
        None => default_weights(&noise),
    };
    let radices: Vec<usize> = observables.iter().map(Observable::len).collect();
    let witness = match checked_cells(&radices, JOINT_CELL_CAP) {
        Ok(_) => Some(build_joint_from_decompositions(observables, &decomps, &p)?),
        Err(Error::SizeCap { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CompatibilityVerdict {
        status: Status::CompatibleCertified,
        inequality_value: total,
        witness,
        certificate: None,
    })
}

/// Joint observable of the mixing scheme
/// `A⁽ʲ⁾ = p_j C⁽ʲ⁾ + (1−p_j) T⁽ʲ⁾`:
/// `G_{x₁…x_m} = Σ_j p_j C⁽ʲ⁾_{x_j} Π_{i≠j} q⁽ⁱ⁾_{x_i}`.
pub fn build_joint(observables: &[Observable], weights: &[f64]) -> Result<JointObservable> {
    check_same_space(observables)?;
    let decomps = observables
        .iter()
        .map(best_noise_decomposition)
        .collect::<Result<Vec<_>>>()?;
    build_joint_from_decompositions(observables, &decomps, weights)
}

pub fn build_joint_from_decompositions(
    observables: &[Observable],
    decomps: &[NoiseDecomposition],
    weights: &[f64],
) -> Result<JointObservable> {
    let space = check_same_space(observables)?;
    if decomps.len() != observables.len() || weights.len() != observables.len() {
        return Err(Error::InvalidParameter(format!(
            "{} observables, {} decompositions, {} weights",
            observables.len(),
            decomps.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|p| !(0.0..=1.0).contains(p))
        || (weights.iter().sum::<f64>() - 1.0).abs() > NORMALIZATION_TOL
    {
        return Err(Error::InvalidParameter(format!(
            "weights {weights:?} are not a probability vector"
        )));
    }
    let radices: Vec<usize> = observables.iter().map(Observable::len).collect();
    checked_cells(&radices, JOINT_CELL_CAP)?;

    let mut parts = Vec::with_capacity(observables.len());
    for (j, (d, &p)) in decomps.iter().zip(weights).enumerate() {
        let required = 1.0 - p;
        if d.t < required - INEQUALITY_TOL {
            return Err(Error::InsufficientNoise {
                index: j,
                available: d.t,
                required,
                deficit: required - d.t,
            });
        }
        let c = d.rescaled_residual(required.min(d.t))?;
        parts.push((c, d.trivial.probs().to_vec()));
    }

    let effects = grid::tuples(&radices)
        .map(|indices| {
            let mut cell = space.zero_effect();
            for (j, (p, (c, _))) in weights.iter().zip(&parts).enumerate() {
                if *p == 0.0 {
                    continue;
                }
                let others: f64 = parts
                    .iter()
                    .zip(&indices)
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, ((_, q), &k))| q[k])
                    .product();
                let coeff = p * others;
                if coeff != 0.0 {
                    cell = cell.lin_comb(1.0, &c.effects()[indices[j]], coeff)?;
                }
            }
            Ok(cell)
        })
        .collect::<Result<Vec<_>>>()?;
    let factors = observables.iter().map(|a| a.outcomes().to_vec()).collect();
    JointObservable::new(Observable::from_effects(space.clone(), effects)?, factors)
}

/// Whether every marginal of `g` equals the corresponding observable within
/// `tol`, comparing effects as functionals on the state space.
pub fn is_joint_of(g: &JointObservable, observables: &[Observable], tol: f64) -> Result<bool> {
    Ok(max_marginal_error(g, observables)? <= tol)
}

/// Largest functional distance between a marginal of `g` and its target.
pub fn max_marginal_error(g: &JointObservable, observables: &[Observable]) -> Result<f64> {
    if g.factors.len() != observables.len() {
        return Err(Error::OutcomeMismatch(format!(
            "{}-fold joint against {} observables",
            g.factors.len(),
            observables.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (j, a) in observables.iter().enumerate() {
        if g.factors[j] != a.outcomes() {
            return Err(Error::OutcomeMismatch(format!(
                "factor {j} has outcomes {:?}, observable has {:?}",
                g.factors[j],
                a.outcomes()
            )));
        }
        if a.space() != g.base.space() {
            return Err(Error::SpaceMismatch(format!(
                "observable {j} is on another space"
            )));
        }
        let mj = marginal(g, j)?;
        for (e, f) in mj.effects().iter().zip(a.effects()) {
            worst = worst.max(e.functional_distance(f, a.space())?);
        }
    }
    Ok(worst)
}

/// Decides compatibility exactly on a polytope theory.
///
/// The unknowns are the values `g[c][v] ≥ 0` of each cell effect at each
/// vertex. Constraints: marginal equalities at every vertex, cell sums equal
/// to 1 at every vertex, and one row per affine dependency among the
/// vertices so that each cell's values extend to an affine functional.
pub fn lp_compatible_polytope(observables: &[Observable]) -> Result<CompatibilityVerdict> {
    let space = check_same_space(observables)?;
    let StateSpace::Polytope(p) = space else {
        return Err(Error::SpaceMismatch(format!(
            "the LP decider needs a polytope space, got {}",
            space.kind_name()
        )));
    };
    let radices: Vec<usize> = observables.iter().map(Observable::len).collect();
    let cells = checked_cells(&radices, LP_CELL_CAP)?;
    let nv = p.vertex_count();
    let nvars = cells * nv;
    let var = |c: usize, v: usize| c * nv + v;
    let tuples: Vec<Vec<usize>> = grid::tuples(&radices).collect();

    let mut a_rows: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for (j, obs) in observables.iter().enumerate() {
        for (k, e) in obs.effects().iter().enumerate() {
            let values = vertex_values(p, e);
            for (v, &val) in values.iter().enumerate() {
                let mut row = vec![0.0; nvars];
                for (c, t) in tuples.iter().enumerate() {
                    if t[j] == k {
                        row[var(c, v)] = 1.0;
                    }
                }
                a_rows.push(row);
                b.push(val);
            }
        }
    }
    for v in 0..nv {
        let mut row = vec![0.0; nvars];
        for c in 0..cells {
            row[var(c, v)] = 1.0;
        }
        a_rows.push(row);
        b.push(1.0);
    }
    for dep in p.affine_dependencies() {
        for c in 0..cells {
            let mut row = vec![0.0; nvars];
            for (v, &lam) in dep.iter().enumerate() {
                row[var(c, v)] = lam;
            }
            a_rows.push(row);
            b.push(0.0);
        }
    }

    let inequality_value: f64 = observables
        .iter()
        .map(|a| best_noise_decomposition(a).map(|d| d.t))
        .sum::<Result<f64>>()?;

    match simplex::phase_one(&a_rows, &b, LP_TOL)? {
        Feasibility::Feasible(x) => {
            let effects = (0..cells)
                .map(|c| {
                    let values: Vec<f64> = (0..nv).map(|v| x[var(c, v)].max(0.0)).collect();
                    affine_fit(p, &values)
                })
                .collect::<Result<Vec<Effect>>>()?;
            let factors = observables.iter().map(|a| a.outcomes().to_vec()).collect();
            let joint =
                JointObservable::new(Observable::from_effects(space.clone(), effects)?, factors)?;
            Ok(CompatibilityVerdict {
                status: Status::CompatibleCertified,
                inequality_value,
                witness: Some(joint),
                certificate: None,
            })
        }
        Feasibility::Infeasible(y) => Ok(CompatibilityVerdict {
            status: Status::IncompatibleCertified,
            inequality_value,
            witness: None,
            certificate: Some(y),
        }),
    }
}

/// Squit observables `A^α` (values `(α, α, 1, 1)` at the vertices for outcome
/// 0) and `B^β` (values `(β, 1, 1, β)`), with outcomes `{0, 1}`.
pub fn squit_pair(alpha: f64, beta: f64) -> Result<(Observable, Observable)> {
    let space = StateSpace::squit();
    let make = |vals: [f64; 4]| -> Result<Observable> {
        let plus = crate::theory::polytope_effect_from_vertex_values(&space, &vals)?;
        let minus =
            crate::theory::polytope_effect_from_vertex_values(&space, &vals.map(|v| 1.0 - v))?;
        Observable::from_effects(space.clone(), vec![plus, minus])
    };
    Ok((
        make([alpha, alpha, 1.0, 1.0])?,
        make([beta, 1.0, 1.0, beta])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{post_process, reverse, trivializing_channel};
    use crate::quantum::{fourier_mub_pair, RegularRank1Povm};
    use crate::sample;
    use crate::theory::{embed_trivial, TrivialObservable};

    fn reverse_trines() -> (Observable, Observable) {
        let u = sample::haar_unitary(2, &mut sample::rng(11));
        let a = RegularRank1Povm::harmonic(2, 3, None).unwrap();
        let b = RegularRank1Povm::harmonic(2, 3, Some(&u)).unwrap();
        (
            reverse(a.observable()).unwrap(),
            reverse(b.observable()).unwrap(),
        )
    }

    #[test]
    fn trivial_pair_gives_product() {
        let space = StateSpace::quantum(2).unwrap();
        let t1 = embed_trivial(
            &TrivialObservable::new(vec![0, 1], vec![0.3, 0.7]).unwrap(),
            &space,
        );
        let t2 = embed_trivial(
            &TrivialObservable::new(vec![0, 1, 2], vec![0.2, 0.2, 0.6]).unwrap(),
            &space,
        );
        let g = build_joint(&[t1.clone(), t2.clone()], &[0.5, 0.5]).unwrap();
        let cell = g.encode(&[1, 2]).unwrap();
        let op = g.base().effect(cell).unwrap().operator().unwrap();
        assert!((op.as_matrix().get(0, 0).re - 0.42).abs() < 1e-12);
        assert!(is_joint_of(&g, &[t1, t2], 1e-12).unwrap());
    }

    #[test]
    fn trivial_with_arbitrary() {
        let space = StateSpace::quantum(2).unwrap();
        let t = embed_trivial(
            &TrivialObservable::new(vec![0, 1], vec![0.3, 0.7]).unwrap(),
            &space,
        );
        let (b, _) = fourier_mub_pair(2).unwrap();
        let g = build_joint(&[t.clone(), b.clone()], &[0.0, 1.0]).unwrap();
        assert!(is_joint_of(&g, &[t, b.clone()], 1e-12).unwrap());
        let cell = g.encode(&[0, 1]).unwrap();
        let want = b.effects()[1].scale(0.3);
        assert!(
            g.base()
                .effect(cell)
                .unwrap()
                .functional_distance(&want, &space)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn reverse_trines_certified() {
        let (a, b) = reverse_trines();
        let v = sufficient_compatible(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(v.status, Status::CompatibleCertified);
        assert!((v.inequality_value - 1.0).abs() < 1e-12);
        let g = v.witness.unwrap();
        assert!(max_marginal_error(&g, &[a.clone(), b.clone()]).unwrap() < 1e-12);
        let g = build_joint(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        assert!(max_marginal_error(&g, &[a, b]).unwrap() < 1e-12);
    }

    #[test]
    fn mub_pair_undecided() {
        let (a, b) = fourier_mub_pair(2).unwrap();
        let v = sufficient_compatible(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(v.status, Status::Undecided);
        assert_eq!(v.inequality_value, 0.0);
        assert!(matches!(
            build_joint(&[a, b], &[0.5, 0.5]),
            Err(Error::InsufficientNoise { index: 0, .. })
        ));
    }

    #[test]
    fn squit_examples() {
        let (a, b) = squit_pair(0.6, 0.5).unwrap();
        let v = sufficient_compatible(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(v.status, Status::CompatibleCertified);
        assert!((v.inequality_value - 1.1).abs() < 1e-12);

        let (a, b) = squit_pair(0.6, 0.6).unwrap();
        let v = lp_compatible_polytope(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(v.status, Status::CompatibleCertified);
        assert!(is_joint_of(v.witness.as_ref().unwrap(), &[a, b], 1e-9).unwrap());

        let (a, b) = squit_pair(0.4, 0.4).unwrap();
        let v = lp_compatible_polytope(&[a, b]).unwrap();
        assert_eq!(v.status, Status::IncompatibleCertified);
        assert!(v.certificate.is_some());
    }

    #[test]
    fn lp_with_trivial_partner() {
        let (a, _) = squit_pair(0.0, 0.0).unwrap();
        let t = embed_trivial(
            &TrivialObservable::uniform(vec![0, 1, 2]).unwrap(),
            a.space(),
        );
        let v = lp_compatible_polytope(&[a, t]).unwrap();
        assert_eq!(v.status, Status::CompatibleCertified);
    }

    #[test]
    fn lp_rejects_other_spaces() {
        let (a, b) = fourier_mub_pair(2).unwrap();
        assert!(matches!(
            lp_compatible_polytope(&[a, b]),
            Err(Error::SpaceMismatch(_))
        ));
        let (a, _) = squit_pair(0.5, 0.5).unwrap();
        let many = vec![a; 14];
        assert!(matches!(
            lp_compatible_polytope(&many),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn postprocessing_joint_marginals() {
        let mut r = sample::rng(12);
        let c = sample::random_observable(&StateSpace::quantum(3).unwrap(), 4, &mut r);
        let nu1 = sample::random_channel(c.outcomes(), 3, &mut r);
        let nu2 = sample::random_channel(c.outcomes(), 2, &mut r);
        let g = joint_from_postprocessings(&c, &[nu1.clone(), nu2.clone()]).unwrap();
        let targets = [
            post_process(&nu1, &c).unwrap(),
            post_process(&nu2, &c).unwrap(),
        ];
        assert!(max_marginal_error(&g, &targets).unwrap() < 1e-12);

        let id = ClassicalChannel::identity(c.outcomes()).unwrap();
        let g = joint_from_postprocessings(&c, &[id.clone(), id]).unwrap();
        for cell in g.base().outcomes() {
            let xs = g.decode(*cell).unwrap();
            if xs[0] != xs[1] {
                let e = g.base().effect(*cell).unwrap();
                assert_eq!(e.operator().unwrap().as_matrix().max_abs(), 0.0);
            }
        }

        let t = TrivialObservable::new(vec![0, 1], vec![0.4, 0.6]).unwrap();
        let nut = trivializing_channel(c.outcomes(), &t).unwrap();
        let id = ClassicalChannel::identity(c.outcomes()).unwrap();
        let g = joint_from_postprocessings(&c, &[id, nut]).unwrap();
        let tt = embed_trivial(&t, c.space());
        assert!(is_joint_of(&g, &[c.clone(), tt], 1e-12).unwrap());

        let bad = sample::random_channel(&[7, 8], 2, &mut r);
        assert!(matches!(
            joint_from_postprocessings(&c, &[bad]),
            Err(Error::OutcomeMismatch(_))
        ));
    }

    #[test]
    fn marginal_edge_cases() {
        let (a, _) = fourier_mub_pair(2).unwrap();
        let t = embed_trivial(
            &TrivialObservable::deterministic(vec![0], 0).unwrap(),
            a.space(),
        );
        let g = build_joint(&[a.clone(), t], &[1.0, 0.0]).unwrap();
        assert!(marginal(&g, 0).unwrap().max_effect_distance(&a).unwrap() < 1e-15);
        assert!(matches!(marginal(&g, 2), Err(Error::InvalidParameter(_))));

        let id = ClassicalChannel::identity(a.outcomes()).unwrap();
        let single = joint_from_postprocessings(&a, &[id]).unwrap();
        assert!(
            marginal(&single, 0)
                .unwrap()
                .max_effect_distance(&a)
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn perturbed_joint_fails() {
        let (a, b) = reverse_trines();
        let g = build_joint(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        let mut effects = g.base().effects().to_vec();
        let bump = HermitianMatrix::identity(2).scale(1e-3);
        if let Effect::Quantum { op } = &effects[0] {
            effects[0] = Effect::Quantum {
                op: op.try_add(&bump).unwrap(),
            };
        }
        let base = Observable::from_effects(g.base().space().clone(), effects).unwrap();
        let perturbed = JointObservable {
            base,
            factors: g.factors().to_vec(),
        };
        assert!(!is_joint_of(&perturbed, &[a.clone(), b.clone()], 1e-6).unwrap());
        assert!(matches!(
            is_joint_of(&g, &[a], 1e-6),
            Err(Error::OutcomeMismatch(_))
        ));
    }

    #[test]
    fn verdict_json() {
        let (a, b) = reverse_trines();
        let v = sufficient_compatible(&[a, b]).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "CompatibleCertified");
        let back: CompatibilityVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back.status, v.status);
    }

    #[test]
    fn default_weights_satisfy_precondition() {
        for w in [[0.5, 0.5], [1.0, 0.0], [0.8, 0.9], [1.0, 1.0]] {
            let p = default_weights(&w);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for (wj, pj) in w.iter().zip(&p) {
                assert!(*wj >= 1.0 - pj - 1e-15);
            }
        }
    }

    use crate::linalg::HermitianMatrix;
}
