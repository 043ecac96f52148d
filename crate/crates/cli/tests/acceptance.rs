//! Acceptance suite: one line per criterion, nonzero exit if any fails.

#![allow(clippy::excessive_precision)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruelle_core::dyson;
use ruelle_core::eigenfunction::{
    h_coefficients, three_series_diagnostic, Drift, SeriesVerdict, Target,
};
use ruelle_core::montecarlo::{cylinder_rn_ratios, drift_probe, oscillation_probe, sample};
use ruelle_core::operator::{
    eigen_residual, finite_depth_oracle, iterate_l_one, lin_decay_probe, CylinderFunction,
};
use ruelle_core::potential::{classify_regularity, Alphabet, ProductPotential, Verdict};
use ruelle_core::spectral::{
    conformality_check, eigen_measure, equilibrium_state, leading_eigenvalue, variational_check,
    Orientation,
};
use ruelle_core::ProductMeasure;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_potential(rng: &mut ChaCha8Rng, max_depth: usize, max_arity: usize) -> ProductPotential {
    let k = rng.random_range(2..=max_arity);
    let depth = rng.random_range(1..=max_depth);
    let labels: Vec<String> = (0..k).map(|a| format!("s{a}")).collect();
    let rows = (0..depth)
        .map(|_| (0..k).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    ProductPotential::finite_depth(
        Alphabet::new(labels).unwrap(),
        rng.random_range(-1.0..1.0),
        rows,
    )
    .unwrap()
}

fn ac1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let p = random_potential(&mut rng, 5, 4);
        let o = finite_depth_oracle(&p).map_err(|e| e.to_string())?;
        let k = p.arity();
        let kd = p.depth().unwrap().max(1);
        let mut errs = vec![(leading_eigenvalue(&p).unwrap().log_lambda - o.log_lambda)
            .exp_m1()
            .abs()];
        let mu = eigen_measure(&p, kd).unwrap();
        let eq = equilibrium_state(&p).unwrap();
        let h = h_coefficients(&p, kd).unwrap();
        for n in 1..=kd {
            for a in 0..k {
                errs.push(rel(mu.weight(n, a), o.log_mu[n - 1][a].exp()));
                errs.push((h.get(n, a) - o.log_h[n - 1][a]).exp_m1().abs());
            }
        }
        for a in 0..k {
            errs.push(rel(eq.limit_weight(a), o.log_equilibrium[a].exp()));
        }
        let e = errs.into_iter().fold(0.0, f64::max);
        ensure(e <= 1e-12, || format!("case {case}: relative error {e:e}"))?;
        worst = worst.max(e);
    }
    Ok(format!("50 potentials, max relative error {worst:.1e}"))
}

fn ac2() -> Check {
    let frozen = [
        (1.6, 2.296054662335456978),
        (1.8, 1.9051451832443365565),
        (2.0, 1.6815154946187452174),
        (2.5, 1.407611565742637155),
        (3.0, 1.2885515434590115881),
    ];
    let mut worst = 0.0f64;
    for (g, expect) in frozen {
        let (_, p) = dyson::build(g).unwrap();
        let d = (leading_eigenvalue(&p).unwrap().log_lambda - expect).abs();
        ensure(d <= 1e-10, || format!("gamma {g}: |Δ log λ| = {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("max |Δ log λ| {worst:.1e}"))
}

fn ac3() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for g in [1.3, 1.8, 2.5, 3.0] {
        for scale in [1.0, -1.0] {
            let (_, p) = dyson::build_scaled(g, scale).unwrap();
            for o in [Orientation::Conformal, Orientation::Eigen] {
                let c = conformality_check(&p, o, 6).map_err(|e| e.to_string())?;
                ensure(
                    c.max_residual <= c.certificate && c.certificate <= 1e-10,
                    || {
                        format!(
                            "gamma {g} scale {scale} {o:?}: residual {:e}, certificate {:e}",
                            c.max_residual, c.certificate
                        )
                    },
                )?;
                worst = worst.max(c.max_residual);
                count += c.cylinders;
            }
        }
    }
    Ok(format!("{count} cylinders, max residual {worst:.1e}"))
}

fn ac4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ps: Vec<ProductPotential> = [1.8, 2.5]
        .iter()
        .map(|&g| dyson::build(g).unwrap().1)
        .collect();
    ps.extend((0..10).map(|_| random_potential(&mut rng, 5, 4)));
    let mut worst = 0.0f64;
    for (i, p) in ps.iter().enumerate() {
        let v = variational_check(p).unwrap();
        ensure(v.residual <= 1e-10, || {
            format!("potential {i}: residual {:e}", v.residual)
        })?;
        worst = worst.max(v.residual);
    }
    Ok(format!("12 potentials, max residual {worst:.1e}"))
}

fn ac5() -> Check {
    let (_, p) = dyson::build(3.0).unwrap();
    let d = p.depth_for_tol(1e-10, 10_000_000).ok_or("no depth")?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let prefixes: Vec<Vec<usize>> = (0..100)
        .map(|_| (0..=d).map(|_| rng.random_range(0..2)).collect())
        .collect();
    let r = eigen_residual(&p, &prefixes, 1e-10).map_err(|e| e.to_string())?;
    ensure(r.max_relative <= 1e-8 && r.certified, || {
        format!(
            "dyson: residual {:e}, certificate {:e}",
            r.max_relative, r.certificate
        )
    })?;
    let mut worst_fd = 0.0f64;
    for _ in 0..10 {
        let q = random_potential(&mut rng, 5, 4);
        let k = q.arity();
        let xs: Vec<Vec<usize>> = (0..100)
            .map(|_| (0..6).map(|_| rng.random_range(0..k)).collect())
            .collect();
        let r = eigen_residual(&q, &xs, 1e-12).map_err(|e| e.to_string())?;
        ensure(r.max_relative <= 1e-12, || {
            format!("finite depth: residual {:e}", r.max_relative)
        })?;
        worst_fd = worst_fd.max(r.max_relative);
    }
    Ok(format!(
        "gamma 3 depth {d}: residual {:.1e}; finite depth max {worst_fd:.1e}",
        r.max_relative
    ))
}

fn ac6() -> Check {
    let (_, p) = dyson::build(2.0).unwrap();
    let log_lambda = leading_eigenvalue(&p).unwrap().log_lambda;
    let steps = iterate_l_one(&p, 50, None).map_err(|e| e.to_string())?;
    let gap = (steps[49].value - log_lambda).abs();
    ensure(gap <= 0.05, || format!("gamma 2: |gap| at k=50 is {gap}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let q = random_potential(&mut rng, 1, 4);
        let l = leading_eigenvalue(&q).unwrap().log_lambda;
        for s in iterate_l_one(&q, 50, None).unwrap() {
            let e = (s.value - l).abs();
            ensure(e <= 1e-13 * l.abs().max(1.0), || {
                format!("depth one: k={} gap {e:e}", s.k)
            })?;
        }
    }
    Ok(format!("gamma 2 gap {gap:.4} at k=50; depth-one exact"))
}

fn ac7() -> Check {
    let report = |g: f64| classify_regularity(&dyson::build(g).unwrap().1, 256).unwrap();
    let (r19, r21, r14, r16) = (report(1.9), report(2.1), report(1.4), report(1.6));
    ensure(
        r19.bowen_walters == Verdict::Fails && r19.witness.divergence.is_some(),
        || "bowen at 1.9".into(),
    )?;
    ensure(
        r21.bowen_walters.holds() && r21.witness.bowen_sum.is_finite(),
        || "bowen at 2.1".into(),
    )?;
    for (g, r) in [(1.9, &r19), (2.1, &r21), (1.4, &r14), (1.6, &r16)] {
        ensure(r.yuri.holds(), || format!("yuri at {g}"))?;
    }
    ensure(r14.l2_tails == Verdict::Fails, || "l2 tails at 1.4".into())?;
    ensure(
        r16.l2_tails.holds() && r16.witness.l2_sum.is_finite(),
        || "l2 tails at 1.6".into(),
    )?;
    Ok(format!(
        "bowen 2.1 sum {:.3}; l2 1.6 sum {:.3}",
        r21.witness.bowen_sum, r16.witness.l2_sum
    ))
}

fn ac8() -> Check {
    let (d18, p18) = dyson::build(1.8).unwrap();
    let rho = ProductMeasure::uniform(p18.alphabet().clone());
    let mu = eigen_measure(&p18, 10_000).unwrap();
    let a = three_series_diagnostic(&p18, &rho, Target::H, 1000).map_err(|e| e.to_string())?;
    ensure(a.verdict == SeriesVerdict::ConvergesAs, || {
        format!("h under uniform: {:?}", a.verdict)
    })?;
    let b = three_series_diagnostic(&p18, &mu, Target::H, 1000).map_err(|e| e.to_string())?;
    ensure(
        b.verdict == SeriesVerdict::Diverges(Drift::PlusInfinity),
        || format!("h under eigen: {:?}", b.verdict),
    )?;
    let (_, p13) = dyson::build(1.3).unwrap();
    let mu13 = eigen_measure(&p13, 10_000).unwrap();
    let c = three_series_diagnostic(&p13, &mu13, Target::HMu, 1000).map_err(|e| e.to_string())?;
    ensure(matches!(c.verdict, SeriesVerdict::Diverges(_)), || {
        format!("h_mu at 1.3: {:?}", c.verdict)
    })?;

    let cf = d18.closed_forms();
    let e = three_series_diagnostic(&p18, &rho, Target::HMu, 1000).unwrap();
    let f = three_series_diagnostic(&p18, &mu, Target::HMu, 1000).unwrap();
    let mut worst = 0.0f64;
    for j in 1..=1000usize {
        let jj = j as u64;
        for (got, want) in [
            (b.means[j - 1], cf.mean_h_under_eigen(jj)),
            (b.variances[j - 1], cf.var_h_under_eigen(jj)),
            (a.means[j - 1], 0.0),
            (a.variances[j - 1], cf.var_h_under_uniform(jj)),
            (e.means[j - 1], cf.mean_h_mu_under_uniform(jj)),
            (f.means[j - 1], cf.mean_h_mu_under_eigen(jj)),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("closed-form mismatch {worst:e}"))?;
    Ok(format!(
        "verdicts as expected; closed forms within {worst:.1e}"
    ))
}

fn ac9() -> Check {
    let (d, p) = dyson::build(1.8).unwrap();
    let (n, max) = (10_000, 100_000);
    let depths: Vec<usize> = vec![10, 100, 1_000, 10_000, 30_000, 100_000];
    let mu = eigen_measure(&p, max).unwrap();
    let up = drift_probe(&p, &sample(&mu, n, max, 9).unwrap(), Target::H, &depths)
        .map_err(|e| e.to_string())?;
    let cf = d.closed_forms();
    let mut expected = 0.0;
    let mut next = 1u64;
    for row in &up.rows {
        while next <= row.depth as u64 {
            expected += cf.mean_h_under_eigen(next);
            next += 1;
        }
        ensure((row.mean - expected).abs() <= 5.0 * row.std_err, || {
            format!(
                "depth {}: mean {} vs closed form {expected} (se {})",
                row.depth, row.mean, row.std_err
            )
        })?;
    }
    let top = up.rows.last().unwrap().q50;
    ensure(top > 10.0, || {
        format!("median of log h under eigen samples is {top}")
    })?;
    let rho = ProductMeasure::uniform(p.alphabet().clone());
    let down = drift_probe(&p, &sample(&rho, n, max, 10).unwrap(), Target::HMu, &depths)
        .map_err(|e| e.to_string())?;
    let bottom = down.rows.last().unwrap().q50;
    ensure(bottom < -10.0, || {
        format!("median of log h_mu under uniform samples is {bottom}")
    })?;
    Ok(format!(
        "median log h {top:.2}, median log h_mu {bottom:.2} at depth {max}"
    ))
}

fn ac10() -> Check {
    let (_, p) = dyson::build(1.8).unwrap();
    let one = p.alphabet().index_of("1").unwrap();
    let w = oscillation_probe(&p, &[one], 5.0, 10_000, 10_000, 10).map_err(|e| e.to_string())?;
    for (name, s) in [("+M", &w.plus), ("-M", &w.minus)] {
        ensure(
            s.fraction > 0.0 && s.fraction >= 0.5 - 5.0 * s.std_err,
            || {
                format!(
                    "{name}: fraction {} (se {}) below the bound 2^{}",
                    s.fraction, s.std_err, s.log2_bound
                )
            },
        )?;
    }
    Ok(format!(
        "runs n={} / n={}, fractions {:.3} / {:.3}",
        w.plus.run_end, w.minus.run_end, w.plus.fraction, w.minus.fraction
    ))
}

fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<usize>| (0..k).map(move |a| [w.clone(), vec![a]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn ac11() -> Check {
    let (_, p) = dyson::build(1.8).unwrap();
    let mu = eigen_measure(&p, 6).unwrap();
    let eq = equilibrium_state(&p).unwrap();
    let words = all_words(2, 6);
    let mut worst = 0.0f64;
    for r in cylinder_rn_ratios(&p, &words).unwrap() {
        let e = (r.log_ratio + mu.log_cylinder(&r.word) - eq.log_cylinder(&r.word))
            .exp_m1()
            .abs();
        ensure(e <= 1e-12, || format!("word {:?}: error {e:e}", r.word))?;
        worst = worst.max(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let q = random_potential(&mut rng, 1, 4);
        for r in cylinder_rn_ratios(&q, &all_words(q.arity(), 3)).unwrap() {
            ensure(r.log_ratio.exp() == 1.0, || {
                format!("depth one ratio {}", r.log_ratio.exp())
            })?;
        }
    }
    Ok(format!(
        "{} words, max error {worst:.1e}; depth-one ratios 1",
        words.len()
    ))
}

fn ac12() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ps = vec![dyson::build(2.0).unwrap().1];
    ps.extend((0..3).map(|_| random_potential(&mut rng, 1, 4)));
    let mut worst = 0.0f64;
    for p in &ps {
        let k = p.arity();
        for _ in 0..10 {
            let depth = rng.random_range(1..=3);
            let values: Vec<f64> = (0..k.pow(depth as u32))
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let phi = CylinderFunction::from_values(k, depth, &values).unwrap();
            let l = lin_decay_probe(p, &phi, 20).map_err(|e| e.to_string())?;
            let ratio = l.norms[20] / l.norms[0];
            ensure(ratio < 0.1, || format!("{}: ratio {ratio}", p.kind_tag()))?;
            worst = worst.max(ratio);
        }
    }
    Ok(format!("40 functions, max ratio {worst:.1e}"))
}

fn ac13() -> Check {
    let bin = env!("CARGO_BIN_EXE_ruelle");
    let dir = std::env::temp_dir().join(format!("ruelle-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 4] = [
        &[
            "sample",
            "--gamma",
            "1.8",
            "--samples",
            "500",
            "--max-depth",
            "2000",
            "--seed",
            "13",
            "--format",
            "csv",
        ],
        &[
            "probe",
            "--gamma",
            "1.8",
            "--cylinder",
            "1",
            "--threshold",
            "3",
            "--samples",
            "2000",
            "--seed",
            "13",
        ],
        &["spectrum", "--gamma", "2", "--format", "json"],
        &["regimes", "--scan", "1.2:3:0.1", "--format", "csv"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.join(format!("run{i}-{rep}"));
            let status = Command::new(bin)
                .args(*args)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || {
                format!("`{}` exited with {status}", args.join(" "))
            })?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(!outputs[0].is_empty() && outputs[0] == outputs[1], || {
            format!("`{}` differs", args.join(" "))
        })?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{} commands byte-identical across runs",
        runs.len()
    ))
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn main() -> ExitCode {
    let checks: [Criterion; 13] = [
        ("oracle equivalence", ac1, Duration::from_secs(10)),
        ("dyson eigenvalue", ac2, Duration::from_secs(5)),
        ("conformality identities", ac3, Duration::from_secs(10)),
        ("variational identity", ac4, Duration::MAX),
        ("eigen-equation", ac5, Duration::MAX),
        ("pressure iteration", ac6, Duration::MAX),
        ("regularity thresholds", ac7, Duration::MAX),
        ("three-series dichotomy", ac8, Duration::MAX),
        ("monte carlo drift", ac9, Duration::from_secs(60)),
        ("oscillation witness", ac10, Duration::MAX),
        ("radon-nikodym consistency", ac11, Duration::MAX),
        ("lin decay", ac12, Duration::MAX),
        ("reproducibility", ac13, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed > *budget {
                Err(format!("{msg}; took {elapsed:.1?}, budget {budget:.0?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("[PASS] AC-{} {name}: {msg} ({elapsed:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] AC-{} {name}: {msg} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
