//! Acceptance suite. Runs every criterion at its stated tolerance and sample
//! size, prints one PASS/FAIL line each, and exits non-zero if any fails.
//!
//! Run with `cargo test -p ewens-charpoly --test acceptance`.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ewens_charpoly::ensemble::run_ensemble;
use ewens_charpoly::limit_field::LimitSampler;
use ewens_charpoly::portrait::{validate_ppm, PhasePortrait};
use ewens_charpoly::stats::{self, joint_cf_enumerated, second_moment_enumerated};
use ewens_charpoly::{
    cycle_type_prob, enumerate_types, h_coeffs, joint_cycle_cf_exact, sample_cycle_type, second_moment_exact,
    Complex64, CycleSampler, Result, ThetaSequence,
};
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn ewens(theta: f64) -> ThetaSequence {
    ThetaSequence::ewens(theta).unwrap()
}

fn scaled(theta: f64, rho: f64) -> ThetaSequence {
    ThetaSequence::scaled_ewens(theta, rho).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn exact_families() -> Vec<ThetaSequence> {
    vec![ewens(1.0), ewens(2.0), ewens(0.5), scaled(2.0, 2.0)]
}

fn second_moment_identity() -> Result<Outcome> {
    let points = [c(0.0, 0.0), c(0.5, 0.0), c(-0.3, 0.0), c(0.3, 0.4), c(0.0, 0.7)];
    let mut worst: f64 = 0.0;
    for seq in exact_families() {
        for n in 1..=8 {
            for &z in &points {
                let a = second_moment_exact(&seq, z, n)?;
                let b = second_moment_enumerated(&seq, z, n)?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(Outcome {
        passed: worst < 1e-10,
        detail: format!("max |enumerated - extracted| = {worst:.2e} (tol 1e-10)"),
    })
}

fn joint_cf_identity() -> Result<Outcome> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let freqs: Vec<[f64; 3]> = (0..10)
        .map(|_| [(); 3].map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();
    let mut worst: f64 = 0.0;
    for seq in exact_families() {
        for n in 1..=7 {
            for s in &freqs {
                // C_k vanishes for k > n
                let s = &s[..n.min(3)];
                let a = joint_cycle_cf_exact(&seq, s, n)?;
                let b = joint_cf_enumerated(&seq, s, n)?;
                worst = worst.max((a - b).norm());
            }
        }
    }
    Ok(Outcome {
        passed: worst < 1e-10,
        detail: format!("max |enumerated - extracted| = {worst:.2e} (tol 1e-10)"),
    })
}

fn normalizing_constants() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for theta in [0.5, 1.0, 2.0] {
        let h = h_coeffs(&ewens(theta), 200)?;
        let mut binom = 1.0;
        for n in 0..=200usize {
            if n > 0 {
                binom *= (theta + n as f64 - 1.0) / n as f64;
            }
            worst = worst.max((h.h(n) - binom).abs() / binom);
        }
    }
    Ok(Outcome {
        passed: worst < 1e-10,
        detail: format!("max relative error = {worst:.2e} (tol 1e-10)"),
    })
}

fn sampler_exactness() -> Result<Outcome> {
    let seq = ewens(2.0);
    let n = 4;
    let n_samples = 1_000_000;
    let sampler = CycleSampler::new(&seq, n)?;
    let draws = run_ensemble(41, n_samples, |rng| sampler.sample(rng).counts().to_vec());
    let mut freq: HashMap<Vec<u32>, u64> = HashMap::new();
    for d in draws {
        *freq.entry(d).or_default() += 1;
    }
    let types = enumerate_types(n)?;
    let mut worst: f64 = 0.0;
    for ct in &types {
        let p = cycle_type_prob(&seq, ct)?;
        let count = freq.get(ct.counts()).copied().unwrap_or(0);
        let se = (p * (1.0 - p) / n_samples as f64).sqrt();
        worst = worst.max((count as f64 / n_samples as f64 - p).abs() / se);
    }
    Ok(Outcome {
        passed: types.len() == 5 && worst < 3.0,
        detail: format!("{} types, worst deviation {worst:.2} binomial SE (tol 3)", types.len()),
    })
}

fn poisson_marginals() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, seq) in [ewens(1.0), scaled(2.0, 2.0)].iter().enumerate() {
        let r = stats::trace_distribution_test(seq, 5000, 5, 100_000, 50 + i as u64)?;
        let m = r.marginal_tv.iter().copied().fold(0.0, f64::max);
        worst = worst.max(m);
        parts.push(format!("{seq}: max TV {m:.4}"));
    }
    Ok(Outcome {
        passed: worst < stats::DISTANCE_THRESHOLD,
        detail: format!("{} (tol 0.05)", parts.join(", ")),
    })
}

fn charpoly_convergence() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for seq in [ewens(1.0), ewens(2.0)] {
        for z in [c(0.5, 0.0), c(0.3, 0.4)] {
            let r = stats::charpoly_vs_limit_test(&seq, 2000, z, 10_000, 60)?;
            worst = worst.max(r.ks_log_abs);
            parts.push(format!(
                "{seq}@{}: {:.4}",
                ewens_charpoly::complex::format_complex(z),
                r.ks_log_abs
            ));
        }
    }
    Ok(Outcome {
        passed: worst < stats::DISTANCE_THRESHOLD,
        detail: format!("KS(log|.|) {} (tol 0.05)", parts.join(", ")),
    })
}

fn limit_mean() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut closed_form_ok = true;
    let mut parts = Vec::new();
    for theta in [1.0, 2.0] {
        let r = stats::limit_mean_test(&ewens(theta), c(0.5, 0.0), 1_000_000, 70)?;
        let target = 0.5f64.powf(theta);
        closed_form_ok &= (r.target.as_complex() - c(target, 0.0)).norm() < 1e-12;
        let sigma = (r.estimate.as_complex() - c(target, 0.0)).norm() / r.std_error;
        worst = worst.max(sigma);
        parts.push(format!(
            "theta={theta}: {:.6} vs {target} ({sigma:.2} SE)",
            r.estimate.as_complex().re
        ));
    }
    Ok(Outcome {
        passed: closed_form_ok && worst < 3.0,
        detail: format!("{} (tol 3 SE)", parts.join(", ")),
    })
}

fn covariance() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for seq in [ewens(1.0), scaled(2.0, 2.0)] {
        for (z, w) in [(c(0.5, 0.0), c(0.5, 0.0)), (c(0.4, 0.0), c(0.2, 0.0))] {
            let r = stats::covariance_test(&seq, z, w, 1_000_000, 80)?;
            worst = worst.max(r.z_sigma);
            parts.push(format!("{seq}({},{}): {:.2} SE", z.re, w.re, r.z_sigma));
        }
    }
    Ok(Outcome {
        passed: worst < 3.0,
        detail: format!("{} (tol 3 SE)", parts.join(", ")),
    })
}

fn product_vs_series() -> Result<Outcome> {
    let tol = 1e-6;
    let mut worst: f64 = 0.0;
    let mut points = vec![c(0.0, 0.0), c(0.25, -0.1)];
    points.extend((0..8).map(|j| Complex64::from_polar(0.5, j as f64 * std::f64::consts::TAU / 8.0)));
    for seq in [ewens(1.0), ewens(2.0), scaled(2.0, 2.0)] {
        let sampler = LimitSampler::new(&seq, 0.5, stats::LIMIT_EPS)?;
        let errs = run_ensemble(90, 1000, |rng| {
            let s = sampler.sample_with(rng, 90);
            let m = s.series_depth(tol * 1e-3);
            points
                .iter()
                .map(|&z| ((-s.eval_f(z, m).unwrap()).exp() - s.eval_big_f(z).unwrap()).norm())
                .fold(0.0, f64::max)
        });
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Ok(Outcome {
        passed: worst < tol,
        detail: format!("max |exp(-f) - F| = {worst:.2e} over 3000 samples (tol 1e-6)"),
    })
}

fn portrait_determinism() -> Result<Outcome> {
    let seq = ewens(100.0);
    let render = || -> Result<Vec<u8>> {
        let ct = sample_cycle_type(&seq, 10_000, 2024)?.cycle_type;
        Ok(PhasePortrait::of_factors(&ct.factors(), 512)?.to_ppm())
    };
    let in_pool = |threads: usize| -> Result<Vec<u8>> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(render)
    };
    let first = render()?;
    let again = render()?;
    let one = in_pool(1)?;
    let four = in_pool(4)?;
    let header = validate_ppm(&first)?;
    let valid = (header.width, header.height, header.maxval) == (512, 512, 255);
    let identical = first == again && first == one && first == four;
    Ok(Outcome {
        passed: valid && identical,
        detail: format!("valid P6 512x512: {valid}, identical across runs and 1/4 threads: {identical}"),
    })
}

type Criterion = (&'static str, Option<Duration>, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "second moment enumeration vs extraction",
            Some(Duration::from_secs(5)),
            second_moment_identity,
        ),
        (
            "joint cycle CF enumeration vs extraction",
            Some(Duration::from_secs(5)),
            joint_cf_identity,
        ),
        ("normalizing constants vs binomial", None, normalizing_constants),
        (
            "sampler exactness, Ewens(2) n=4",
            Some(Duration::from_secs(30)),
            sampler_exactness,
        ),
        (
            "Poisson cycle-count marginals, n=5000",
            Some(Duration::from_secs(120)),
            poisson_marginals,
        ),
        (
            "p_n vs limit field, n=2000",
            Some(Duration::from_secs(120)),
            charpoly_convergence,
        ),
        ("limit mean E F(0.5)", Some(Duration::from_secs(60)), limit_mean),
        ("covariance of f", Some(Duration::from_secs(120)), covariance),
        ("exp(-f) vs product form", None, product_vs_series),
        ("portrait n=10000 theta=100", None, portrait_determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(o) => (o.passed && budget.is_none_or(|b| elapsed <= b), o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(", budget {}s", b.as_secs()));
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.2}s{budget})",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
