//! Seeded random generators for states, observables and channels.
//!
//! All generators take an explicit RNG; nothing here touches global state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::channels::ClassicalChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::theory::{affine_fit, Observable, Polytope, State, StateSpace};
use crate::Outcome;

pub type SampleRng = ChaCha8Rng;

/// Default seed for reproduction runs.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("shape matches data")
}

/// Orthonormalizes the columns of `m` by modified Gram–Schmidt. Fails if the
/// columns are (numerically) dependent.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut cols: Vec<Vec<C64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    for j in 0..cols.len() {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = crate::linalg::inner(&done[k], &rest[0]);
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let n = crate::linalg::norm(&cols[j]);
        if n < 1e-10 {
            return Err(Error::GenerationFailure { attempts: 1 });
        }
        for x in cols[j].iter_mut() {
            *x /= n;
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// Haar-random unitary (Gram–Schmidt of a Ginibre matrix).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        if let Ok(u) = orthonormalize_columns(&ginibre(d, d, rng)) {
            return u;
        }
    }
}

/// Haar-random isometry with `rows ≥ cols`.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        if let Ok(v) = orthonormalize_columns(&ginibre(rows, cols, rng)) {
            return v;
        }
    }
}

/// Haar-random unit vector.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    crate::linalg::normalize(&v)
}

/// Random full-rank density operator `G G†/tr(G G†)` (Hilbert–Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, d, rng);
    let gg = HermitianMatrix::new(&g * &g.adjoint()).expect("G G† is Hermitian");
    let tr = gg.trace();
    gg.scale(1.0 / tr)
}

/// Dirichlet weights with a common concentration parameter. Small
/// concentrations put most of the mass near vertices.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let g: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 && s.is_finite() {
            return g.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Random stochastic matrix from `inputs` onto outputs `0..n_out`.
pub fn random_channel<R: Rng + ?Sized>(
    inputs: &[Outcome],
    n_out: usize,
    rng: &mut R,
) -> ClassicalChannel {
    let matrix = inputs.iter().map(|_| dirichlet(n_out, 1.0, rng)).collect();
    ClassicalChannel::new(inputs.to_vec(), (0..n_out as Outcome).collect(), matrix)
        .expect("Dirichlet rows are stochastic")
}

/// Convex pentagon with vertices at sorted random angles on the unit circle.
pub fn random_pentagon<R: Rng + ?Sized>(rng: &mut R) -> Polytope {
    loop {
        let mut angles: Vec<f64> = (0..5)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        angles.sort_by(f64::total_cmp);
        let min_gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(
                angles[0] + std::f64::consts::TAU - angles[4],
            ))
            .fold(f64::INFINITY, f64::min);
        if min_gap < 0.2 {
            continue;
        }
        let vertices = angles.iter().map(|a| vec![a.cos(), a.sin()]).collect();
        return Polytope::new(2, vertices).expect("pentagon vertices are valid");
    }
}

/// Kraus operators of a random channel from dimension `dim_a` to `dim_b`
/// with `kraus` operators, by compressing a random Stinespring isometry.
pub fn random_kraus<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    kraus: usize,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    let v = random_isometry(dim_b * kraus, dim_a, rng);
    (0..kraus)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(dim_b, dim_a);
            for b in 0..dim_b {
                for a in 0..dim_a {
                    k.set(b, a, v.get(b * kraus + i, a));
                }
            }
            k
        })
        .collect()
}

/// A random valid state of the given space: Dirichlet(1) weights for
/// polytopes, a Hilbert–Schmidt random density operator for quantum, and the
/// Choi operator of a random channel for processes.
pub fn random_state<R: Rng + ?Sized>(space: &StateSpace, rng: &mut R) -> State {
    match space {
        StateSpace::Polytope(p) => {
            State::polytope_weights(p, dirichlet(p.vertex_count(), 1.0, rng))
                .expect("valid weights")
        }
        StateSpace::Quantum { dim } => State::density(random_density(*dim, rng)).expect("valid"),
        StateSpace::Process { dim_a, dim_b } => {
            let k = random_kraus(*dim_a, *dim_b, dim_a * dim_b, rng);
            crate::processes::ChoiState::from_kraus(&k, *dim_a)
                .expect("Kraus operators form a channel")
                .to_state()
        }
    }
}

/// Random observable with `n` outcomes `0..n` on a polytope. Each of the
/// first `n−1` effects is a random affine functional rescaled into
/// `[lo, hi] ⊆ [0, 1/n]` on the vertices; the last one completes the sum to
/// the unit effect.
pub fn random_polytope_observable<R: Rng + ?Sized>(
    p: &Polytope,
    n: usize,
    rng: &mut R,
) -> Observable {
    let space = StateSpace::Polytope(p.clone());
    let cap = 1.0 / n as f64;
    let mut effects = Vec::with_capacity(n);
    let mut rest = vec![1.0; p.vertex_count()];
    for _ in 0..n.saturating_sub(1) {
        let linear: Vec<f64> = (0..p.ambient_dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let raw: Vec<f64> = p
            .vertices()
            .iter()
            .map(|v| linear.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rng.random::<f64>() * 0.5 * cap;
        let hi = lo + rng.random::<f64>() * (cap - lo);
        let span = (max - min).max(1e-300);
        let values: Vec<f64> = raw
            .iter()
            .map(|r| lo + (hi - lo) * (r - min) / span)
            .collect();
        for (acc, v) in rest.iter_mut().zip(&values) {
            *acc -= v;
        }
        effects.push(affine_fit(p, &values).expect("affine image of vertices"));
    }
    effects.push(affine_fit(p, &rest).expect("affine combination of affine values"));
    Observable::from_effects(space, effects).expect("effects fit the polytope")
}

/// Random observable on any backend with outcomes `0..n`.
pub fn random_observable<R: Rng + ?Sized>(space: &StateSpace, n: usize, rng: &mut R) -> Observable {
    match space {
        StateSpace::Polytope(p) => random_polytope_observable(p, n, rng),
        StateSpace::Quantum { dim } => {
            crate::quantum::random_povm(*dim, n, rng.random()).expect("random POVM generation")
        }
        StateSpace::Process { dim_a, dim_b } => {
            crate::processes::random_ppovm(*dim_a, *dim_b, n, rng)
                .expect("random PPOVM generation")
                .into_observable()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_observable;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = rng(1);
        let u = haar_unitary(4, &mut r);
        let uu = &u.adjoint() * &u;
        assert!((&uu - &ComplexMatrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn random_kraus_is_trace_preserving() {
        let mut r = rng(2);
        let ks = random_kraus(2, 3, 4, &mut r);
        let mut acc = ComplexMatrix::zeros(2, 2);
        for k in &ks {
            acc = &acc + &(&k.adjoint() * k);
        }
        assert!((&acc - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn random_observables_are_valid() {
        let mut r = rng(3);
        let pent = random_pentagon(&mut r);
        let spaces = [
            StateSpace::squit(),
            StateSpace::Polytope(pent),
            StateSpace::quantum(3).unwrap(),
            StateSpace::process(2, 2).unwrap(),
        ];
        for space in &spaces {
            for n in 1..=4 {
                let a = random_observable(space, n, &mut r);
                let report = validate_observable(&a);
                assert!(report.is_valid(), "{space:?} n={n}: {report:?}");
            }
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut r = rng(4);
        for space in [
            StateSpace::squit(),
            StateSpace::quantum(2).unwrap(),
            StateSpace::process(2, 3).unwrap(),
        ] {
            let s = random_state(&space, &mut r);
            let u = space.unit_effect();
            assert!((u.value(&space, &s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_sums_to_one() {
        let mut r = rng(5);
        for c in [0.05, 1.0, 5.0] {
            let w = dirichlet(6, c, &mut r);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }
}
