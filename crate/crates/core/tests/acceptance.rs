//! Acceptance suite. Runs every criterion at its stated tolerance and
//! runtime budget and prints one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use noisecontent::channels::{doubly_reverse, doubly_reverse_lambda, post_process, reverse};
use noisecontent::compat::{
    lp_compatible_polytope, max_marginal_error, squit_pair, sufficient_compatible, Status,
};
use noisecontent::linalg::{normalize, HermitianMatrix, C64};
use noisecontent::noise::{concavity_check, noise_content, noise_content_exact_trivial_ppovm};
use noisecontent::processes::{
    orthogonal_trivial_ppovm, ppovm_noise_lower_bound, random_ppovm, Ppovm,
};
use noisecontent::quantum::{
    fourier_mub_pair, mub_reverse_steering_state, random_povm, reverse_triple_witness,
    seeded_basis_triple, sharp_povm, Basis, RegularRank1Povm, TRIPLE_SEED,
};
use noisecontent::sample::{self, SampleRng};
use noisecontent::{Observable, StateSpace};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Σ_x min over 10⁴ hull points of A_x, evaluated at ambient points.
fn polytope_oracle(a: &Observable, rng: &mut SampleRng) -> f64 {
    let p = a.space().as_polytope().unwrap();
    let mut mins = vec![f64::INFINITY; a.len()];
    for _ in 0..10_000 {
        let w = sample::dirichlet(p.vertex_count(), 0.05, rng);
        let point = p.point_for_weights(&w);
        for (m, e) in mins.iter_mut().zip(a.effects()) {
            *m = m.min(e.at_point(&point).unwrap());
        }
    }
    mins.iter().sum()
}

/// Minimum of ⟨ψ|A|ψ⟩ over 10⁵ sampled unit vectors: 2·10⁴ Haar draws, then
/// a random local search around the best one.
fn sampled_min(op: &HermitianMatrix, rng: &mut SampleRng) -> f64 {
    let d = op.dim();
    let mut best = f64::INFINITY;
    let mut best_v = Vec::new();
    for _ in 0..20_000 {
        let v = sample::haar_state(d, rng);
        let val = op.expectation(&v).unwrap();
        if val < best {
            best = val;
            best_v = v;
        }
    }
    let mut step = 0.3;
    for _ in 0..80_000 {
        let cand: Vec<C64> = best_v
            .iter()
            .map(|z| z + sample::complex_gaussian(rng) * step)
            .collect();
        let cand = normalize(&cand);
        let val = op.expectation(&cand).unwrap();
        if val < best {
            best = val;
            best_v = cand;
            step *= 1.2;
        } else {
            step = (step * 0.995).max(1e-8);
        }
    }
    best
}

fn criterion_1() -> Outcome {
    let mut rng = sample::rng(sample::DEFAULT_SEED);
    let mut worst_poly: f64 = 0.0;
    for i in 0..50 {
        let space = if i % 2 == 0 {
            StateSpace::squit()
        } else {
            StateSpace::Polytope(sample::random_pentagon(&mut rng))
        };
        let n = rng.random_range(2..=4);
        let a = sample::random_observable(&space, n, &mut rng);
        let t = noise_content(&a).unwrap().t;
        worst_poly = worst_poly.max((t - polytope_oracle(&a, &mut rng)).abs());
    }
    let mut worst_gap: f64 = 0.0;
    let mut bounded = true;
    for i in 0..50 {
        let d = 2 + i % 2;
        let n = rng.random_range(2..=4);
        let a = random_povm(d, n, rng.random()).unwrap();
        let t = noise_content(&a).unwrap().t;
        let sampled: f64 = a
            .effects()
            .iter()
            .map(|e| sampled_min(e.operator().unwrap(), &mut rng))
            .sum();
        bounded &= t <= sampled + 1e-12;
        worst_gap = worst_gap.max(sampled - t);
    }
    ok(
        worst_poly < 1e-6 && bounded && worst_gap < 1e-3,
        format!("polytope max |t − oracle| = {worst_poly:.2e}, quantum max gap = {worst_gap:.2e}, t ≤ sampled: {bounded}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rows = 0;
    let mut mismatches = Vec::new();
    let mut worst_marginal: f64 = 0.0;
    for d in 2..=3usize {
        for m in 2..=3usize {
            for n in 2..=8usize {
                rows += 1;
                let expected = n > (d - 1) * m;
                let certified = if n < d {
                    false
                } else {
                    let mut rng = sample::rng(sample::DEFAULT_SEED ^ (d * 100 + m * 10 + n) as u64);
                    let povms: Vec<Observable> = (0..m)
                        .map(|j| {
                            let u = (j > 0).then(|| sample::haar_unitary(d, &mut rng));
                            let a = RegularRank1Povm::harmonic(d, n, u.as_ref()).unwrap();
                            reverse(a.observable()).unwrap()
                        })
                        .collect();
                    let v = sufficient_compatible(&povms).unwrap();
                    if let Some(g) = &v.witness {
                        worst_marginal = worst_marginal.max(max_marginal_error(g, &povms).unwrap());
                    } else if v.status == Status::CompatibleCertified {
                        worst_marginal = f64::INFINITY;
                    }
                    v.status == Status::CompatibleCertified
                };
                if certified != expected {
                    mismatches.push((d, m, n));
                }
            }
        }
    }
    ok(
        mismatches.is_empty() && worst_marginal < 1e-9,
        format!("{rows} rows, mismatches {mismatches:?}, max marginal error {worst_marginal:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut mismatches = Vec::new();
    let mut worst_w: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            let (alpha, beta) = (i as f64 / 10.0, j as f64 / 10.0);
            let (a, b) = squit_pair(alpha, beta).unwrap();
            worst_w = worst_w
                .max((noise_content(&a).unwrap().t - alpha).abs())
                .max((noise_content(&b).unwrap().t - beta).abs());
            let v = lp_compatible_polytope(&[a, b]).unwrap();
            let feasible = v.status == Status::CompatibleCertified;
            if feasible != (alpha + beta >= 1.0 - 1e-9) {
                mismatches.push((alpha, beta));
            }
        }
    }
    ok(
        mismatches.is_empty() && worst_w <= 1e-15,
        format!("121 cells, mismatches {mismatches:?}, max |w − α| = {worst_w:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for d in 3..=6 {
        let sigma = mub_reverse_steering_state(d).unwrap();
        min_eig = min_eig.min(sigma.min_eigenvalue().unwrap());
        worst = worst.max((sigma.trace() - 1.0).abs());
        let (a, b) = fourier_mub_pair(d).unwrap();
        for obs in [&a, &b] {
            for (i, e) in obs.effects().iter().enumerate() {
                let p = e.operator().unwrap().trace_product(&sigma).unwrap();
                let want = if i == 0 { 0.0 } else { 1.0 / (d as f64 - 1.0) };
                worst = worst.max((p - want).abs());
            }
        }
    }
    ok(
        min_eig >= -1e-10 && worst <= 1e-10,
        format!("min eigenvalue {min_eig:.2e}, max deviation {worst:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let (b1, b2, b3) = seeded_basis_triple(TRIPLE_SEED);
    let w = reverse_triple_witness(&b1, &b2, &b3).unwrap();
    let all_full = w.ranks.iter().flatten().flatten().all(|&r| r == 3);
    // χ = {ψ_0, (ψ_1 + ψ_2)/√2, (ψ_1 − ψ_2)/√2} shares ψ_0 with the second basis.
    let chi = Basis::new(vec![
        b2.vectors()[0].clone(),
        combine(&b2.vectors()[1], &b2.vectors()[2], 1.0),
        combine(&b2.vectors()[1], &b2.vectors()[2], -1.0),
    ])
    .unwrap();
    let w2 = reverse_triple_witness(&b1, &b2, &chi).unwrap();
    ok(
        all_full && w.status == Status::IncompatibleCertified && w2.status == Status::Undecided,
        format!(
            "seeded triple {:?} (min relative singular value {:.3}), shared-vector triple {:?}",
            w.status, w.min_relative_singular_value, w2.status
        ),
    )
}

fn combine(x: &[C64], y: &[C64], sign: f64) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    x.iter().zip(y).map(|(a, b)| (a + b * sign) * s).collect()
}

fn criterion_6() -> Outcome {
    let mut rng = sample::rng(sample::DEFAULT_SEED);
    let mut exact = true;
    for i in 0..20 {
        let a = random_povm(2 + i % 2, 2, rng.random()).unwrap();
        let rr = doubly_reverse(&a).unwrap();
        exact &= rr.outcomes() == a.outcomes()
            && rr.effects().iter().zip(a.effects()).all(|(x, y)| {
                let (x, y) = (
                    x.operator().unwrap().as_matrix(),
                    y.operator().unwrap().as_matrix(),
                );
                x.data() == y.data()
            });
    }
    let mut worst_lambda: f64 = 0.0;
    let mut mismatches = Vec::new();
    for n in 3..=5usize {
        let lambda = doubly_reverse_lambda(n);
        // A^rr = (1−λ)A + λ·𝟙/N for random POVMs.
        for _ in 0..5 {
            let d = rng.random_range(2..=3);
            let a = random_povm(d, n, rng.random()).unwrap();
            let rr = doubly_reverse(&a).unwrap();
            let id = HermitianMatrix::identity(d).scale(1.0 / n as f64);
            for (x, y) in rr.effects().iter().zip(a.effects()) {
                let want = y
                    .operator()
                    .unwrap()
                    .lin_comb(1.0 - lambda, &id, lambda)
                    .unwrap();
                worst_lambda =
                    worst_lambda.max(x.operator().unwrap().frobenius_distance(&want).unwrap());
            }
        }
        // Sharp POVMs in dimension N: w(A^rr) = λ.
        let limit = (n - 1) * (n - 1);
        let povms: Vec<Observable> = (0..=limit)
            .map(|k| {
                let b = Basis::haar_random(n, sample::DEFAULT_SEED + (n * 100 + k) as u64);
                doubly_reverse(&sharp_povm(&b)).unwrap()
            })
            .collect();
        worst_lambda = worst_lambda.max((noise_content(&povms[0]).unwrap().t - lambda).abs());
        for m in 2..=limit + 1 {
            let v = sufficient_compatible(&povms[..m]).unwrap();
            let certified = v.status == Status::CompatibleCertified;
            let marginal_ok = v
                .witness
                .as_ref()
                .is_none_or(|g| max_marginal_error(g, &povms[..m]).unwrap() < 1e-9);
            if certified != (m <= limit) || !marginal_ok {
                mismatches.push((n, m));
            }
        }
    }
    ok(
        exact && worst_lambda <= 1e-12 && mismatches.is_empty(),
        format!("N=2 round trip exact: {exact}, λ deviation {worst_lambda:.2e}, mismatches {mismatches:?}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = sample::rng(sample::DEFAULT_SEED);
    let mut failures = 0;
    let mut worst_reconstruction: f64 = 0.0;
    for i in 0..50 {
        let (da, db) = [(2, 2), (2, 3), (3, 2)][i % 3];
        let n = rng.random_range(2..=4);
        let a = random_ppovm(da, db, n, &mut rng).unwrap();
        match ppovm_noise_lower_bound(&a) {
            Ok(d) => {
                if Ppovm::new(d.residual.clone()).is_err() {
                    failures += 1;
                }
                let back = d.reconstruct().unwrap();
                worst_reconstruction =
                    worst_reconstruction.max(back.max_effect_distance(a.observable()).unwrap());
            }
            Err(_) => failures += 1,
        }
    }
    let only = orthogonal_trivial_ppovm(&[0.3, 0.7], &Basis::computational(2), 2).unwrap();
    let lower = ppovm_noise_lower_bound(&only).unwrap().t;
    let exact = noise_content_exact_trivial_ppovm(only.observable());
    ok(
        failures == 0 && worst_reconstruction < 1e-9 && lower == 0.0 && exact == Some(1.0),
        format!(
            "{failures} residual failures, max reconstruction error {worst_reconstruction:.2e}, orthogonal trivial PPOVM: lower bound {lower}, exact {exact:?}"
        ),
    )
}

#[allow(clippy::type_complexity)]
fn criterion_8() -> Outcome {
    let mut rng = sample::rng(sample::DEFAULT_SEED);
    let backends: [(&str, fn(&mut SampleRng) -> StateSpace); 4] = [
        ("squit", |_| StateSpace::squit()),
        ("pentagon", |r| {
            StateSpace::Polytope(sample::random_pentagon(r))
        }),
        ("quantum", |r| {
            StateSpace::quantum(r.random_range(2..=3)).unwrap()
        }),
        ("process", |_| StateSpace::process(2, 2).unwrap()),
    ];
    let mut report = Vec::new();
    let mut pass = true;
    for (name, make) in backends {
        let (mut mono, mut conc) = (0, 0);
        for _ in 0..100 {
            let space = make(&mut rng);
            let n = rng.random_range(2..=4);
            let a = sample::random_observable(&space, n, &mut rng);
            let nu = sample::random_channel(a.outcomes(), rng.random_range(2..=4), &mut rng);
            let before = noise_content(&a).unwrap().t;
            let after = noise_content(&post_process(&nu, &a).unwrap()).unwrap().t;
            if after >= before - 1e-9 {
                mono += 1;
            }
            let b = sample::random_observable(&space, n, &mut rng);
            let s: f64 = rng.random();
            if concavity_check(&a, &b, s).unwrap().pass {
                conc += 1;
            }
        }
        pass &= mono == 100 && conc == 100;
        report.push(format!("{name} {mono}/100 monotone, {conc}/100 concave"));
    }
    ok(pass, report.join("; "))
}

#[allow(clippy::type_complexity)]
fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        (
            "1 noise content vs sampling oracle",
            criterion_1,
            Duration::from_secs(60),
        ),
        (
            "2 reversed-threshold table",
            criterion_2,
            Duration::from_secs(10),
        ),
        ("3 squit tightness", criterion_3, Duration::from_secs(10)),
        ("4 MUB steering state", criterion_4, Duration::from_secs(5)),
        (
            "5 reverse-triple witness",
            criterion_5,
            Duration::from_secs(1),
        ),
        ("6 doubly reverse", criterion_6, Duration::from_secs(5)),
        ("7 PPOVM suite", criterion_7, Duration::from_secs(30)),
        ("8 property suites", criterion_8, Duration::MAX),
    ];
    let mut all = true;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed < budget;
        all &= pass;
        println!(
            "criterion {name}: {} ({:.2}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
