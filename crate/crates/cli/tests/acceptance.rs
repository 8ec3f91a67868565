//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cremona_cli::config::{Experiment, ExperimentConfig, Overrides};
use cremona_cli::experiment::{evaluate, render_summary};
use cremona_cli::verify::{
    arithmetic, fast_oracle, sqrt_subadd, table, table_rows, VerifyReport, SUITE_SEED,
};
use cremona_core::cremona::{MonomialMatrix, RationalMap};
use cremona_core::dyndeg::{lambda1_fekete, spectral_radius};
use cremona_core::families::{arithmetic_pair, henon, linear, FamilyTag, Generator};
use cremona_core::fast::FastEngine;
use cremona_core::limitlaw::{ks_statistic, normalize, predict, Law, Target};
use cremona_core::ratpoly::QPoly;
use cremona_core::walk::{run_trials, Backend, Measure, WalkConfig};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn config(name: &str) -> Experiment {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    ExperimentConfig::load(&path)
        .and_then(|c| c.build(&Overrides::default()))
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn suite_line(r: &VerifyReport) -> String {
    format!("{} cases, {} counterexamples", r.cases, r.counterexamples)
        + &r.first
            .as_ref()
            .map_or(String::new(), |c| format!(", first: {c}"))
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn folded_henon() -> Outcome {
    let exp = config("folded_henon.toml");
    let start = Instant::now();
    let report = evaluate(&exp).expect("run");
    let secs = start.elapsed().as_secs_f64();
    let last = report.checkpoints.last().expect("checkpoint");
    let scaled: Vec<f64> = last.z.iter().map(|z| z / 2f64.ln()).collect();
    let ks = ks_statistic(&scaled, Target::FoldedGaussian(1.0), 0.03).expect("ks");
    outcome(
        ks.passed() && report.ensemble.failures.is_empty() && secs < 60.0,
        format!(
            "n = {}, trials = {}, ks = {:.4} (<= 0.03), {secs:.1} s (< 60 s)",
            last.step,
            report.ensemble.samples.len(),
            ks.statistic
        ),
    )
}

fn biased_henon() -> Outcome {
    let exp = config("biased_henon.toml");
    let report = evaluate(&exp).expect("run");
    let p = &report.prediction;
    let ln2 = 2f64.ln();
    let params_ok = p.law == Law::Gaussian
        && p.ell.is_some_and(|l| (l - 0.4 * ln2).abs() < 1e-12)
        && p.sigma
            .is_some_and(|s| (s - 0.84f64.sqrt() * ln2).abs() < 1e-12);
    let ks = report.final_ks().expect("ks");
    outcome(
        params_ok && ks.passed() && report.ensemble.failures.is_empty(),
        format!(
            "ell = {:.6}, sigma = {:.6}, ks = {:.4} (<= 0.03)",
            report.ell, report.sigma, ks.statistic
        ),
    )
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let r = fast_oracle(&mut ChaCha8Rng::seed_from_u64(SUITE_SEED), 200, 100);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r.passed() && r.cases == 300 && secs < 300.0,
        format!("{}, {secs:.1} s (< 300 s)", suite_line(&r)),
    )
}

fn monomial_exactness() -> Outcome {
    let m = MonomialMatrix::from_i64([[1, 1], [1, 0]]);
    let f = RationalMap::from_monomial_matrix(&m).expect("birational");
    let expected = [2, 3, 5, 8, 13, 21, 34, 55, 89, 144];
    let mut acc = RationalMap::identity();
    let mut degrees = Vec::new();
    let mut lifts_ok = true;
    let mut power = MonomialMatrix::identity();
    for _ in 0..expected.len() {
        acc = RationalMap::compose_capped(&acc, &f, u32::MAX).expect("compose");
        power = power.mul(&m);
        lifts_ok &= power.lift_degree() == BigInt::from(acc.degree());
        degrees.push(acc.degree());
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let rho = spectral_radius(&m).value;
    let fekete = lambda1_fekete(&f, 20, u32::MAX).expect("fekete");
    outcome(
        degrees == expected
            && lifts_ok
            && (rho - phi).abs() < 1e-9
            && (fekete.value - phi).abs() < 0.05
            && !fekete.truncated,
        format!(
            "degrees {degrees:?}, rho = {rho:.12}, fekete(20) = {:.5}",
            fekete.value
        ),
    )
}

fn parabolic() -> Outcome {
    let r = sqrt_subadd(&mut ChaCha8Rng::seed_from_u64(SUITE_SEED), 200);
    let exp = config("jonquiere.toml");
    let ensemble = run_trials(&exp.walk).expect("run");
    let means: Vec<f64> = exp
        .walk
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let total: f64 = ensemble.samples.iter().map(|s| s.log_degree[k]).sum();
            total / ensemble.samples.len() as f64 / (n as f64).sqrt()
        })
        .collect();
    let first = exp.walk.checkpoints[0];
    let trend_ok = first == 16
        && exp.walk.length == 144
        && ensemble.samples.len() == 20
        && means.last() < means.first();
    let shown: Vec<String> = exp
        .walk
        .checkpoints
        .iter()
        .zip(&means)
        .map(|(n, m)| format!("{n}: {m:.4}"))
        .collect();
    outcome(
        r.passed() && r.cases == 200 && trend_ok && ensemble.failures.is_empty(),
        format!(
            "sqrt subadditivity {}; mean log deg / sqrt n by n [{}] via {}",
            suite_line(&r),
            shown.join(", "),
            ensemble.engine
        ),
    )
}

fn arithmetic_spectrum() -> Outcome {
    let r = arithmetic(5);
    let p1 = QPoly::from_coeffs(0, &[q(0), q(0), q(1)]);
    let p2 = QPoly::from_coeffs(0, &[q(0), q(1), q(1)]);
    let [f, g, _, _] = arithmetic_pair(["F", "G"], &p1, &p2).expect("pair");
    let measure = Measure::uniform(vec![f, g], false, None).expect("measure");
    let law = predict(&measure).map(|p| p.law);
    let mut cfg = WalkConfig::new(measure, 5, 200, 6, Backend::Symbolic);
    cfg.checkpoints = (1..=5).collect();
    cfg.degree_cap = u32::MAX;
    let ensemble = run_trials(&cfg).expect("run");
    let variances: Vec<f64> = (0..5)
        .map(|k| {
            let v: Vec<f64> = ensemble.samples.iter().map(|s| s.log_degree[k]).collect();
            // shifted by the first sample, exact when all samples agree
            let d: Vec<f64> = v.iter().map(|x| x - v[0]).collect();
            let m = d.len() as f64;
            let s: f64 = d.iter().sum();
            (d.iter().map(|x| x * x).sum::<f64>() - s * s / m) / (m - 1.0)
        })
        .collect();
    outcome(
        r.passed() && r.cases == 62 && variances.iter().all(|&v| v == 0.0) && law == Ok(Law::Dirac),
        format!("{}; sample variances {variances:?}", suite_line(&r)),
    )
}

fn random_invertible(rng: &mut ChaCha8Rng, name: &str) -> Generator {
    loop {
        let a: [[BigRational; 3]; 3] = std::array::from_fn(|_| {
            std::array::from_fn(|_| {
                BigRational::new(rng.gen_range(-5..=5).into(), rng.gen_range(1..=4).into())
            })
        });
        if let Ok(g) = linear(name, &a) {
            return g;
        }
    }
}

fn elliptic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let gens: Vec<Generator> = (0..8)
        .map(|i| random_invertible(&mut rng, &format!("a{i}")))
        .collect();
    let measure = Measure::uniform(gens, false, None).expect("measure");
    let law = predict(&measure).map(|p| p.law);
    let mut cfg = WalkConfig::new(measure, 100, 20, 7, Backend::Symbolic);
    cfg.checkpoints = (1..=100).collect();
    let ensemble = run_trials(&cfg).expect("run");
    let degree_one = ensemble
        .samples
        .iter()
        .all(|s| s.log_degree.iter().all(|&v| v == 0.0));
    let finals: Vec<f64> = ensemble.samples.iter().map(|s| s.log_degree[99]).collect();
    let ks = ks_statistic(&normalize(&finals, 0.0, 100), Target::Dirac, 0.0).expect("ks");
    outcome(
        degree_one && ks.statistic == 0.0 && law == Ok(Law::Dirac) && ensemble.failures.is_empty(),
        format!(
            "{} trials x 100 steps, degree 1 throughout: {degree_one}, dirac ks = {}",
            ensemble.samples.len(),
            ks.statistic
        ),
    )
}

fn constant_lambda() -> Outcome {
    let (h, _) = henon("h", &QPoly::from_coeffs(0, &[q(0), q(0), q(1)])).expect("henon");
    let measure = Measure::uniform(vec![h.clone()], true, None).expect("measure");
    let p = predict(&measure).expect("predict");
    let predicted = p.law == Law::Dirac && p.ell == Some(2f64.ln()) && p.sigma == Some(0.0);

    let start = Instant::now();
    let mut acc = RationalMap::identity();
    let mut symbolic_ok = true;
    for n in 1..=12u32 {
        acc = RationalMap::compose_capped(&acc, &h.map, 4096).expect("compose");
        symbolic_ok &= acc.degree() == 1 << n;
    }
    let symbolic_secs = start.elapsed().as_secs_f64();

    let engine = FastEngine::new(&[&h], true).expect("engine");
    let mut st = engine.start();
    let mut fast_ok = true;
    let steps = 10_000u32;
    for n in 1..=steps {
        engine.push(&mut st, 0).expect("push");
        fast_ok &= engine.degree(&st) == BigUint::from(2u8).pow(n);
    }
    outcome(
        predicted && symbolic_ok && fast_ok,
        format!(
            "symbolic deg h^n = 2^n for n <= 12: {symbolic_ok} ({symbolic_secs:.0} s), fast for n <= {steps}: {fast_ok}"
        ),
    )
}

fn table_conformance() -> Outcome {
    let r = table();
    outcome(r.passed() && r.cases == table_rows().len(), suite_line(&r))
}

fn nonelementary() -> Outcome {
    let exp = config("nonelementary.toml");
    let report = evaluate(&exp).expect("run");
    let summary = render_summary(&exp, &report);
    let fit = report.fitted.expect("fit");
    let ks = report.final_ks().expect("ks");
    let group_ok = exp.walk.measure.group_type() == Some(FamilyTag::NonelementaryFree);
    outcome(
        group_ok
            && fit.ell > 0.0
            && ks.passed()
            && ks.threshold == 0.05
            && report.uses_fitted_parameters()
            && summary.contains("parameters: fitted")
            && report.ensemble.failures.is_empty(),
        format!(
            "ell_hat = {:.5}, sigma_hat = {:.5}, ks = {:.4} (<= 0.05), engine {}",
            fit.ell, fit.sigma, ks.statistic, report.ensemble.engine
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("folded Gaussian CLT", folded_henon),
        ("biased lineal Gaussian", biased_henon),
        ("fast/symbolic oracle", oracle),
        ("monomial exactness", monomial_exactness),
        ("parabolic regime", parabolic),
        ("arithmetic spectrum", arithmetic_spectrum),
        ("elliptic", elliptic),
        ("constant lambda", constant_lambda),
        ("limit law table", table_conformance),
        ("non-elementary", nonelementary),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
