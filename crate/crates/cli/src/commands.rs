use crate::args::{Command, GlobalArgs, MeasureArg, TargetArg};
use crate::output::{num, Report, Table};
use ruelle_core::dyson::{self, ClaimStatus, RegimeReport};
use ruelle_core::eigenfunction::{
    eval_h, eval_h_mu, h_coefficients, three_series_diagnostic, Target,
};
use ruelle_core::montecarlo::{drift_probe, oscillation_probe, sample};
use ruelle_core::operator::{
    eigen_residual, lin_decay_probe, lp_witness, transfer_duality_check, CylinderFunction,
};
use ruelle_core::potential::classify_regularity;
use ruelle_core::schema::PotentialSpec;
use ruelle_core::spectral::{
    conformal_measure, conformality_check, eigen_measure, equilibrium_state, leading_eigenvalue,
    temperature_scan, variational_check, Orientation,
};
use ruelle_core::{parse_potential, Error, ProductMeasure, ProductPotential};
use serde_json::{json, Value};
use std::fmt;

/// Anything that should end the run with exit code 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serialises")
}

/// Resolves the potential from `--potential` and/or `--gamma`/`--scale`.
pub fn load_potential(g: &GlobalArgs) -> Outcome<Option<ProductPotential>> {
    let from_file = match &g.potential {
        Some(path) => Some(parse_potential(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    match (from_file, g.gamma) {
        (Some(p), None) if g.scale.is_none() => Ok(Some(p)),
        (Some(p), gamma) => match p.dyson_family() {
            Some(f) => {
                let (_, q) =
                    dyson::build_scaled(gamma.unwrap_or(f.gamma()), g.scale.unwrap_or(f.coeff()))?;
                let spec = PotentialSpec {
                    log_g0: Some(p.log_g0()),
                    ..PotentialSpec::from_potential(&q)
                };
                Ok(Some(spec.build()?))
            }
            None => usage("--gamma and --scale apply to dyson potentials only"),
        },
        (None, Some(gamma)) => Ok(Some(dyson::build_scaled(gamma, g.scale.unwrap_or(1.0))?.1)),
        (None, None) if g.scale.is_some() => usage("--scale needs --gamma"),
        (None, None) => Ok(None),
    }
}

fn require(p: Option<&ProductPotential>) -> Outcome<&ProductPotential> {
    p.ok_or_else(|| Failure::Usage("one of --potential or --gamma is required".into()))
}

/// Inclusive `start:stop:step` range.
fn parse_range(text: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("range `{text}` is not start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return usage(format!("range `{text}` is not start:stop:step"));
    };
    if !(step > 0.0 && start.is_finite() && stop >= start) {
        return usage(format!(
            "range `{text}` needs start <= stop and a positive step"
        ));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return usage("range has more than a million points");
    }
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn measure(p: &ProductPotential, which: MeasureArg, depth: usize) -> Outcome<ProductMeasure> {
    Ok(match which {
        MeasureArg::Eigen => eigen_measure(p, depth)?,
        MeasureArg::Conformal => conformal_measure(p, depth)?,
        MeasureArg::Equilibrium => equilibrium_state(p)?,
        MeasureArg::Uniform => ProductMeasure::uniform(p.alphabet().clone()),
    })
}

fn target(t: TargetArg) -> Target {
    match t {
        TargetArg::H => Target::H,
        TargetArg::HMu => Target::HMu,
    }
}

pub fn run(command: &Command, g: &GlobalArgs, p: Option<&ProductPotential>) -> Outcome<Report> {
    match command {
        Command::Classify { depth_budget } => classify(require(p)?, *depth_budget),
        Command::Spectrum { conformal_depth } => spectrum(require(p)?, *conformal_depth),
        Command::Eigen {
            i_max,
            prefixes,
            target: t,
            reference,
            j_max,
        } => eigen(
            require(p)?,
            g,
            *i_max,
            prefixes,
            target(*t),
            *reference,
            *j_max,
        ),
        Command::Verify {
            max_len,
            prefixes,
            mc_samples,
        } => verify(require(p)?, g, *max_len, *prefixes, *mc_samples),
        Command::Sample {
            measure: m,
            target: t,
            samples,
            max_depth,
            depths,
        } => drift(require(p)?, g, *m, target(*t), *samples, *max_depth, depths),
        Command::Probe {
            cylinder,
            threshold,
            samples,
            tail_depth,
        } => {
            let p = require(p)?;
            let word = p.alphabet().parse_word(cylinder)?;
            let w = oscillation_probe(p, &word, *threshold, *samples, *tail_depth, g.seed)?;
            Ok(Report {
                result: to_value(&w),
                table: None,
                passed: true,
            })
        }
        Command::Regimes { scan } => regimes(p, g, scan.as_deref()),
        Command::Scan { t } => {
            let points = temperature_scan(require(p)?, &parse_range(t)?)?;
            let mut table = Table::new(&["t", "log_lambda", "error"]);
            for s in &points {
                table.push(vec![num(s.t), num(s.log_lambda), num(s.error)]);
            }
            Ok(Report {
                result: json!({ "points": points }),
                table: Some(table),
                passed: true,
            })
        }
    }
}

fn classify(p: &ProductPotential, budget: usize) -> Outcome<Report> {
    let r = classify_regularity(p, budget)?;
    let mut table = Table::new(&["n", "v", "s_lo", "s_hi"]);
    for (i, (v, s)) in r.v.iter().zip(&r.s).enumerate() {
        table.push(vec![(i + 1).to_string(), num(*v), num(s.lo), num(s.hi)]);
    }
    Ok(Report {
        result: json!({ "kind": p.kind_tag(), "report": r }),
        table: Some(table),
        passed: true,
    })
}

fn spectrum(p: &ProductPotential, depth: usize) -> Outcome<Report> {
    let ev = leading_eigenvalue(p)?;
    let eq = equilibrium_state(p)?;
    let conf = conformal_measure(p, depth)?;
    let var = variational_check(p)?;
    let mut table = Table::new(&["symbol", "equilibrium_weight", "conformal_limit"]);
    for a in 0..p.arity() {
        table.push(vec![
            p.alphabet().label(a).into(),
            num(eq.limit_weight(a)),
            num(conf.limit_weight(a)),
        ]);
    }
    let result = json!({
        "kind": p.kind_tag(),
        "alphabet": p.alphabet().symbols(),
        "log_lambda": ev.log_lambda,
        "error": ev.error,
        "equilibrium_weights": eq.limit_weights(),
        "conformal_limit": conf.limit_weights(),
        "entropy": var.entropy,
        "energy": var.energy,
        "certificates": {
            "eigenvalue_error": ev.error,
            "conformal_stored_depth": conf.stored_depth(),
            "conformal_tv_tail": conf.tv_tail(),
            "conformal_unique": conf.unique_conformal(),
            "variational_residual": var.residual,
            "variational_certificate": var.certificate,
        },
    });
    Ok(Report {
        result,
        table: Some(table),
        passed: true,
    })
}

fn eigen(
    p: &ProductPotential,
    g: &GlobalArgs,
    i_max: usize,
    prefixes: &[String],
    target: Target,
    reference: MeasureArg,
    j_max: usize,
) -> Outcome<Report> {
    let tol = g.tol.unwrap_or(1e-8);
    let coeffs = h_coefficients(p, i_max)?;
    let evaluations: Vec<Value> = prefixes
        .iter()
        .map(|text| -> Outcome<Value> {
            let x = p.alphabet().parse_word(text)?;
            let show = |r: Result<_, Error>| match r {
                Ok(e) => to_value(&e),
                Err(e) => json!({ "error": e.to_string() }),
            };
            Ok(json!({ "prefix": text, "h": show(eval_h(p, &x, tol)), "h_mu": show(eval_h_mu(p, &x, tol)) }))
        })
        .collect::<Outcome<_>>()?;
    let reference = measure(p, reference, j_max.max(1))?;
    let series = three_series_diagnostic(p, &reference, target, j_max)?;
    let mut table = Table::new(&["j", "mean", "var", "partial_mean", "partial_var"]);
    for j in 0..series.means.len() {
        table.push(vec![
            (j + 1).to_string(),
            num(series.means[j]),
            num(series.variances[j]),
            num(series.mean_partial[j]),
            num(series.variance_partial[j]),
        ]);
    }
    let result =
        json!({ "coefficients": coeffs, "evaluations": evaluations, "three_series": series });
    Ok(Report {
        result,
        table: Some(table),
        passed: true,
    })
}

#[derive(Default)]
struct Checks {
    list: Vec<Value>,
    passed: bool,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool, detail: Value) {
        self.passed &= ok;
        self.note(name, if ok { "pass" } else { "fail" }, detail);
    }

    /// Entries that do not affect the verdict.
    fn note(&mut self, name: &str, status: &str, detail: Value) {
        self.list
            .push(json!({ "check": name, "status": status, "detail": detail }));
    }
}

fn verify(
    p: &ProductPotential,
    g: &GlobalArgs,
    max_len: usize,
    prefixes: usize,
    mc: usize,
) -> Outcome<Report> {
    let mut checks = Checks {
        passed: true,
        ..Checks::default()
    };

    let tol = g.tol.unwrap_or(1e-10);
    let b = p.balance();
    match b
        .depth()
        .map(|k| k.max(1))
        .or_else(|| b.depth_for_tol(tol, 10_000_000))
    {
        Some(d) => {
            let uniform = ProductMeasure::uniform(p.alphabet().clone());
            let xs = sample(&uniform, prefixes, d + 1, g.seed)?.to_matrix();
            let r = eigen_residual(p, &xs, tol)?;
            checks.record("eigen_residual", r.certified, to_value(&r));
        }
        None => checks.note(
            "eigen_residual",
            "skipped",
            json!(format!(
                "tail bound does not reach {tol:e} within depth 10^7"
            )),
        ),
    }
    for o in [Orientation::Conformal, Orientation::Eigen] {
        let c = conformality_check(p, o, max_len)?;
        checks.record(
            "conformality",
            c.max_residual <= c.certificate,
            to_value(&c),
        );
    }
    let v = variational_check(p)?;
    checks.record("variational", v.residual <= v.certificate, to_value(&v));

    let k = p.arity();
    let psi = CylinderFunction::from_fn(k, 2, |x| {
        (1.0 + 3.0 * x[0] as f64 + 7.0 * x[1] as f64).sin()
    })?;
    let phi = CylinderFunction::from_fn(k, 2, |x| (2.0 + 5.0 * x[0] as f64 - x[1] as f64).cos())?;
    let d = transfer_duality_check(p, &psi, &phi, mc, g.seed)?;
    checks.record("transfer_duality", d.holds, to_value(&d));
    let w = lp_witness(p, &phi, 2.0)?;
    checks.record("lp_bound", w.holds, to_value(&w));

    let decay = lin_decay_probe(p, &psi, 20)?;
    let ratio = decay.norms[20] / decay.norms[0];
    checks.note(
        "lin_decay",
        "evidence",
        json!({ "mean_removed": decay.mean_removed, "norm_0": decay.norms[0], "norm_20": decay.norms[20], "ratio": ratio }),
    );
    let Checks { list, passed } = checks;
    Ok(Report {
        result: json!({ "kind": p.kind_tag(), "passed": passed, "checks": list }),
        table: None,
        passed,
    })
}

fn ladder(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut base = 1;
    while base <= max {
        for m in [1, 2, 5] {
            if m * base <= max {
                out.push(m * base);
            }
        }
        base *= 10;
    }
    if out.last() != Some(&max) && max > 0 {
        out.push(max);
    }
    out
}

fn drift(
    p: &ProductPotential,
    g: &GlobalArgs,
    which: MeasureArg,
    target: Target,
    samples: usize,
    max_depth: usize,
    depths: &[usize],
) -> Outcome<Report> {
    let depths = if depths.is_empty() {
        ladder(max_depth)
    } else {
        depths.to_vec()
    };
    let len = depths.iter().copied().max().unwrap_or(0).max(max_depth);
    let m = measure(p, which, len.max(1))?;
    let curve = drift_probe(p, &sample(&m, samples, len, g.seed)?, target, &depths)?;
    let mut table = Table::new(&["depth", "q05", "q25", "q50", "q75", "q95"]);
    for r in &curve.rows {
        table.push(vec![
            r.depth.to_string(),
            num(r.q05),
            num(r.q25),
            num(r.q50),
            num(r.q75),
            num(r.q95),
        ]);
    }
    Ok(Report {
        result: to_value(&curve),
        table: Some(table),
        passed: true,
    })
}

fn claim(r: &RegimeReport, name: &str) -> ClaimStatus {
    r.claims
        .get(name)
        .map_or(ClaimStatus::NotCertified, |c| c.status)
}

fn regimes(p: Option<&ProductPotential>, g: &GlobalArgs, scan: Option<&str>) -> Outcome<Report> {
    let scale = p
        .and_then(|p| p.dyson_family())
        .map_or(g.scale.unwrap_or(1.0), |f| f.coeff());
    let Some(scan) = scan else {
        let p = require(p)?;
        let f = p
            .dyson_family()
            .ok_or_else(|| Failure::Usage("regimes needs a dyson potential".into()))?;
        let (d, _) = dyson::build_scaled(f.gamma(), f.coeff())?;
        return Ok(Report {
            result: to_value(&dyson::regime_report(&d)?),
            table: None,
            passed: true,
        });
    };
    let gammas = parse_range(scan)?;
    let reports = gammas
        .iter()
        .map(|&gamma| Ok(dyson::regime_report(&dyson::build_scaled(gamma, scale)?.0)?))
        .collect::<Outcome<Vec<_>>>()?;
    let mut table = Table::new(&["gamma", "log_lambda", "regime", "h_rho_lp", "measures"]);
    let label = |s: ClaimStatus| to_value(&s).as_str().unwrap_or_default().to_string();
    for r in &reports {
        let measures = if claim(r, "mu_equiv_mutilde") == ClaimStatus::Yes {
            "equivalent"
        } else if claim(r, "pairwise_singular") == ClaimStatus::Yes {
            "singular"
        } else {
            "undetermined"
        };
        table.push(vec![
            num(r.gamma),
            num(r.log_lambda),
            r.regime.as_str().into(),
            label(claim(r, "h_rho_in_lp")),
            measures.into(),
        ]);
    }
    Ok(Report {
        result: json!({ "points": reports }),
        table: Some(table),
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(
            parse_range("1.2:1.5:0.1").unwrap(),
            vec![1.2, 1.3, 1.4, 1.5]
        );
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("2:1:0.1").is_err());
        assert!(parse_range("1:2:0").is_err());
    }

    #[test]
    fn depth_ladder() {
        assert_eq!(ladder(30), vec![1, 2, 5, 10, 20, 30]);
        assert_eq!(ladder(100), vec![1, 2, 5, 10, 20, 50, 100]);
    }
}
