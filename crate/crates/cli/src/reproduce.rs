use std::path::{Path, PathBuf};

use clap::ValueEnum;
use noisecontent::channels::{doubly_reverse, doubly_reverse_lambda, reverse};
use noisecontent::compat::{
    lp_compatible_polytope, max_marginal_error, squit_pair, sufficient_compatible, Status,
};
use noisecontent::linalg::C64;
use noisecontent::noise::{noise_content, noise_content_exact_trivial_ppovm};
use noisecontent::processes::{orthogonal_trivial_ppovm, ppovm_noise_lower_bound};
use noisecontent::quantum::{
    fourier_mub_pair, mub_reverse_steering_state, reverse_triple_witness, reversed_threshold,
    seeded_basis_triple, sharp_povm, Basis, RegularRank1Povm,
};
use noisecontent::{sample, Observable, Result};

use crate::manifest::RunManifest;
use crate::{Cli, EXIT_OK, EXIT_UNDECIDED, EXIT_USAGE};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Target {
    ReversedThreshold,
    Squit,
    MubSigma,
    TripleWitness,
    PpovmGap,
    DoublyReverse,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::ReversedThreshold => "reversed-threshold",
            Target::Squit => "squit",
            Target::MubSigma => "mub-sigma",
            Target::TripleWitness => "triple-witness",
            Target::PpovmGap => "ppovm-gap",
            Target::DoublyReverse => "doubly-reverse",
        }
    }
}

struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::CompatibleCertified => "CompatibleCertified",
        Status::IncompatibleCertified => "IncompatibleCertified",
        Status::Undecided => "Undecided",
    }
}

pub fn run(target: Target, cli: &Cli) -> u8 {
    let dir = cli.out.join(target.name());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("creating {}: {e}", dir.display());
        return EXIT_USAGE;
    }
    let result = match target {
        Target::ReversedThreshold => reversed_threshold_table(cli.seed, cli.tol),
        Target::Squit => squit_table(cli.tol),
        Target::MubSigma => mub_sigma_table(cli.tol),
        Target::TripleWitness => triple_witness_table(cli.seed),
        Target::PpovmGap => ppovm_gap_table(),
        Target::DoublyReverse => doubly_reverse_table(cli.seed, cli.tol),
    };
    let (table, pass) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", target.name());
            return EXIT_UNDECIDED;
        }
    };
    let csv_path = dir.join(format!("{}.csv", target.name()));
    let outputs: Vec<PathBuf> = vec![csv_path.clone(), dir.join("manifest.json")];
    let manifest = RunManifest::new(
        format!("reproduce {}", target.name()),
        cli.seed,
        cli.tol,
        Vec::new(),
        &outputs,
        pass,
    );
    if let Err(e) = table.write(&csv_path) {
        eprintln!("writing {}: {e}", csv_path.display());
        return EXIT_USAGE;
    }
    if let Err(e) = manifest.write(&dir) {
        eprintln!("writing manifest: {e}");
        return EXIT_USAGE;
    }
    println!(
        "{}: {} ({} rows, {})",
        target.name(),
        if pass { "pass" } else { "FAIL" },
        table.rows.len(),
        csv_path.display()
    );
    if pass {
        EXIT_OK
    } else {
        EXIT_UNDECIDED
    }
}

fn reversed_threshold_table(seed: u64, tol: f64) -> Result<(Table, bool)> {
    let mut t = Table::new(&[
        "d",
        "m",
        "N",
        "threshold",
        "noise_sum",
        "certified",
        "expected",
        "marginal_error",
    ]);
    let mut pass = true;
    let mut rng = sample::rng(seed);
    for d in 2..=3usize {
        for m in 2..=3usize {
            let threshold = reversed_threshold(d, m);
            for n in 2..=8usize {
                let expected = n >= threshold;
                // No regular rank-1 POVM with fewer outcomes than the dimension.
                let (noise_sum, certified, err) = if n < d {
                    (None, false, None)
                } else {
                    let povms = (0..m)
                        .map(|j| {
                            let u = (j > 0).then(|| sample::haar_unitary(d, &mut rng));
                            RegularRank1Povm::harmonic(d, n, u.as_ref())
                                .and_then(|a| reverse(a.observable()))
                        })
                        .collect::<Result<Vec<Observable>>>()?;
                    let v = sufficient_compatible(&povms)?;
                    let err = v
                        .witness
                        .as_ref()
                        .map(|g| max_marginal_error(g, &povms))
                        .transpose()?;
                    (
                        Some(v.inequality_value),
                        v.status == Status::CompatibleCertified,
                        err,
                    )
                };
                pass &= certified == expected && (!certified || err.is_some_and(|e| e < tol));
                t.push(vec![
                    d.to_string(),
                    m.to_string(),
                    n.to_string(),
                    threshold.to_string(),
                    opt(noise_sum),
                    certified.to_string(),
                    expected.to_string(),
                    opt(err),
                ]);
            }
        }
    }
    Ok((t, pass))
}

fn squit_table(tol: f64) -> Result<(Table, bool)> {
    let mut t = Table::new(&[
        "alpha",
        "beta",
        "w_alpha",
        "w_beta",
        "lp_status",
        "expected_compatible",
        "agrees",
    ]);
    let mut pass = true;
    for i in 0..=10 {
        for j in 0..=10 {
            let (alpha, beta) = (i as f64 / 10.0, j as f64 / 10.0);
            let (a, b) = squit_pair(alpha, beta)?;
            let wa = noise_content(&a)?.t;
            let wb = noise_content(&b)?.t;
            let v = lp_compatible_polytope(&[a, b])?;
            let expected = alpha + beta >= 1.0 - tol;
            let agrees = (v.status == Status::CompatibleCertified) == expected
                && (wa - alpha).abs() <= tol
                && (wb - beta).abs() <= tol;
            pass &= agrees;
            t.push(vec![
                format!("{alpha:.1}"),
                format!("{beta:.1}"),
                format!("{wa:e}"),
                format!("{wb:e}"),
                status_name(v.status).into(),
                expected.to_string(),
                agrees.to_string(),
            ]);
        }
    }
    Ok((t, pass))
}

fn mub_sigma_table(tol: f64) -> Result<(Table, bool)> {
    let mut t = Table::new(&["d", "min_eigenvalue", "trace", "max_deviation", "pass"]);
    let mut pass = true;
    for d in 3..=6 {
        let sigma = mub_reverse_steering_state(d)?;
        let (a, b) = fourier_mub_pair(d)?;
        let mut dev: f64 = 0.0;
        for obs in [&a, &b] {
            for (i, e) in obs.effects().iter().enumerate() {
                let p = e
                    .operator()
                    .expect("quantum effect")
                    .trace_product(&sigma)?;
                let want = if i == 0 { 0.0 } else { 1.0 / (d as f64 - 1.0) };
                dev = dev.max((p - want).abs());
            }
        }
        let min_eig = sigma.min_eigenvalue()?;
        let ok = min_eig >= -tol && (sigma.trace() - 1.0).abs() <= tol && dev <= tol;
        pass &= ok;
        t.push(vec![
            d.to_string(),
            format!("{min_eig:e}"),
            format!("{:e}", sigma.trace()),
            format!("{dev:e}"),
            ok.to_string(),
        ]);
    }
    Ok((t, pass))
}

fn combine(x: &[C64], y: &[C64], sign: f64) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    x.iter().zip(y).map(|(a, b)| (a + b * sign) * s).collect()
}

fn triple_witness_table(seed: u64) -> Result<(Table, bool)> {
    let mut t = Table::new(&["case", "i", "j", "k", "rank", "status"]);
    let (b1, b2, b3) = seeded_basis_triple(seed);
    // Third basis sharing its first vector with the second one.
    let shared = Basis::new(vec![
        b2.vectors()[0].clone(),
        combine(&b2.vectors()[1], &b2.vectors()[2], 1.0),
        combine(&b2.vectors()[1], &b2.vectors()[2], -1.0),
    ])?;
    let seeded = reverse_triple_witness(&b1, &b2, &b3)?;
    let degenerate = reverse_triple_witness(&b1, &b2, &shared)?;
    for (name, w) in [("seeded", &seeded), ("shared", &degenerate)] {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t.push(vec![
                        name.into(),
                        i.to_string(),
                        j.to_string(),
                        k.to_string(),
                        w.ranks[i][j][k].to_string(),
                        status_name(w.status).into(),
                    ]);
                }
            }
        }
    }
    let pass =
        seeded.status == Status::IncompatibleCertified && degenerate.status == Status::Undecided;
    Ok((t, pass))
}

fn ppovm_gap_table() -> Result<(Table, bool)> {
    let mut t = Table::new(&[
        "dim_a",
        "dim_b",
        "probs",
        "lower_bound",
        "exact_trivial_value",
    ]);
    let mut pass = true;
    let cases: [(usize, usize, &[f64]); 4] = [
        (2, 2, &[0.5, 0.5]),
        (2, 3, &[0.3, 0.7]),
        (3, 2, &[0.2, 0.3, 0.5]),
        (3, 3, &[0.6, 0.4]),
    ];
    for (da, db, probs) in cases {
        let a = orthogonal_trivial_ppovm(probs, &Basis::computational(da), db)?;
        let lower = ppovm_noise_lower_bound(&a)?.t;
        let exact = noise_content_exact_trivial_ppovm(a.observable());
        pass &= lower == 0.0 && exact == Some(1.0);
        t.push(vec![
            da.to_string(),
            db.to_string(),
            probs
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" "),
            lower.to_string(),
            opt(exact),
        ]);
    }
    Ok((t, pass))
}

fn doubly_reverse_table(seed: u64, tol: f64) -> Result<(Table, bool)> {
    let mut t = Table::new(&[
        "N",
        "m",
        "lambda",
        "noise_sum",
        "threshold",
        "certified",
        "expected",
        "marginal_error",
    ]);
    let mut pass = true;
    for n in 3..=5usize {
        let lambda = doubly_reverse_lambda(n);
        let limit = (n - 1) * (n - 1);
        let povms = (0..=limit)
            .map(|k| {
                let b = Basis::haar_random(n, seed.wrapping_add((n * 100 + k) as u64));
                doubly_reverse(&sharp_povm(&b))
            })
            .collect::<Result<Vec<_>>>()?;
        for m in 2..=limit + 1 {
            let v = sufficient_compatible(&povms[..m])?;
            let certified = v.status == Status::CompatibleCertified;
            let err = v
                .witness
                .as_ref()
                .map(|g| max_marginal_error(g, &povms[..m]))
                .transpose()?;
            let expected = m <= limit;
            pass &= certified == expected && err.is_none_or(|e| e < tol);
            t.push(vec![
                n.to_string(),
                m.to_string(),
                format!("{lambda:e}"),
                format!("{:e}", v.inequality_value),
                (m - 1).to_string(),
                certified.to_string(),
                expected.to_string(),
                opt(err),
            ]);
        }
    }
    Ok((t, pass))
}
