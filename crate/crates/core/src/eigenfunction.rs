//! The eigenfunction `h = ∏ h_i(x_i)`, the rescaled eigenfunction `h_μ`, and three-series diagnostics.

use crate::dyson::{reference_profile, series_tails, ReferenceProfile};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp, CompensatedSum, Interval};
use crate::potential::{classify_regularity, ProductPotential};
use crate::spectral::{eigen_measure, MeasureKind, ProductMeasure};
use serde::Serialize;

/// Deepest truncation searched when certifying pointwise evaluations.
pub const MAX_EVAL_DEPTH: usize = 100_000_000;

/// `log h_i(a)` for `i = 1..=i_max` on the balanced form.
#[derive(Clone, Debug, Serialize)]
pub struct HCoefficients {
    /// `log_h[i-1][a] = Σ_{k>i} log g_k(a)`.
    pub log_h: Vec<Vec<f64>>,
    /// Error of each stored row.
    pub uncertainty: Vec<f64>,
    /// `B(i)`, the bound on `sup_a |log h_i(a)|`.
    pub bound: Vec<f64>,
}

impl HCoefficients {
    pub fn get(&self, i: usize, a: usize) -> f64 {
        self.log_h[i - 1][a]
    }
}

/// Eigenfunction coefficients; the potential is balanced first so that `∏_a h_i(a) = 1`.
pub fn h_coefficients(p: &ProductPotential, i_max: usize) -> Result<HCoefficients> {
    let b = p.balance();
    if !b.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    Ok(HCoefficients {
        log_h: (1..=i_max)
            .map(|i| (0..b.arity()).map(|a| b.tail_sum(i, a)).collect())
            .collect(),
        uncertainty: (1..=i_max).map(|i| b.tail_uncertainty(i)).collect(),
        bound: (1..=i_max).map(|i| b.tail_bound(i)).collect(),
    })
}

/// Status of a pointwise evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalStatus {
    Certified,
    TruncatedUncertified,
}

/// A truncated evaluation of `log h` or `log h_μ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenfunctionEval {
    pub log_value: f64,
    pub error_bound: f64,
    pub depth_used: usize,
    pub status: EvalStatus,
}

/// Which function a series of per-coordinate terms sums to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `log h = Σ_i log h_i(x_i)` on the balanced form.
    H,
    /// `log h_μ = Σ_j [log Δ_j + Σ_{l>j} log g_l(x_j)]`.
    HMu,
}

/// `log Δ_j = log Σ_a e^{P_j(a)} − log Σ_a e^{P_∞(a)}`, computed as `−log E_{μ_j} e^{tail_j}`.
pub fn log_delta(p: &ProductPotential, j: usize) -> f64 {
    let k = p.arity();
    let partial: Vec<f64> = (0..k).map(|a| p.partial_sum(j, a)).collect();
    let z = log_sum_exp(partial.iter().copied());
    let s = compensated_sum((0..k).map(|a| (partial[a] - z).exp() * p.tail_sum(j, a).exp_m1()));
    -s.ln_1p()
}

/// Per-coordinate terms `X_j(a)` of the target series for `j = 1..=j_max`.
pub fn term_table(p: &ProductPotential, target: Target, j_max: usize) -> Vec<Vec<f64>> {
    let b = p.balance();
    (1..=j_max)
        .map(|j| {
            let shift = match target {
                Target::H => 0.0,
                Target::HMu => log_delta(&b, j),
            };
            (0..b.arity()).map(|a| shift + b.tail_sum(j, a)).collect()
        })
        .collect()
}

/// Smallest depth `d ≥ 1` with `factor · Σ_{i>d} B(i) ≤ tol`.
fn certified_depth(b: &ProductPotential, factor: f64, tol: f64) -> Result<usize> {
    let rem = |d: usize| factor * b.sum_tail_bounds(d, 1.0);
    if rem(MAX_EVAL_DEPTH) > tol {
        return Err(Error::ToleranceUnreachable {
            tol,
            cap: MAX_EVAL_DEPTH,
        });
    }
    let (mut lo, mut hi) = (1usize, MAX_EVAL_DEPTH);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if rem(mid) <= tol {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn evaluate(
    p: &ProductPotential,
    x: &[usize],
    tol: f64,
    target: Target,
) -> Result<EigenfunctionEval> {
    let b = p.balance();
    let bowen = classify_regularity(&b, 64)?.bowen_walters.holds();
    let factor = match target {
        Target::H => 1.0,
        Target::HMu => 2.0,
    };
    let term = |j: usize, a: usize| match target {
        Target::H => b.tail_sum(j, a),
        Target::HMu => log_delta(&b, j) + b.tail_sum(j, a),
    };
    if !bowen {
        let log_value = compensated_sum(x.iter().enumerate().map(|(i, &a)| term(i + 1, a)));
        return Ok(EigenfunctionEval {
            log_value,
            error_bound: f64::INFINITY,
            depth_used: x.len(),
            status: EvalStatus::TruncatedUncertified,
        });
    }
    let d = certified_depth(&b, factor, tol)?;
    if x.len() < d {
        return Err(Error::PrefixTooShort {
            needed: d,
            got: x.len(),
        });
    }
    let mut acc = CompensatedSum::new();
    let mut unc = CompensatedSum::new();
    for (i, &a) in x[..d].iter().enumerate() {
        acc.add(term(i + 1, a));
        unc.add(factor * b.tail_uncertainty(i + 1));
    }
    let rounding = 4.0 * f64::EPSILON * (d as f64).sqrt() * b.tail_bound(0);
    Ok(EigenfunctionEval {
        log_value: acc.value(),
        error_bound: factor * b.sum_tail_bounds(d, 1.0) + unc.value() + rounding,
        depth_used: d,
        status: EvalStatus::Certified,
    })
}

/// `log h(x)`; certified when Bowen's condition holds, otherwise the raw partial sum over `x`.
pub fn eval_h(p: &ProductPotential, x: &[usize], tol: f64) -> Result<EigenfunctionEval> {
    evaluate(p, x, tol, Target::H)
}

/// `log h_μ(x)`; certified under the same rule as [`eval_h`].
pub fn eval_h_mu(p: &ProductPotential, x: &[usize], tol: f64) -> Result<EigenfunctionEval> {
    evaluate(p, x, tol, Target::HMu)
}

/// Direction of a certified divergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drift {
    PlusInfinity,
    MinusInfinity,
    /// Variances are not summable; the series has no limit.
    Unbounded,
}

/// Almost-sure behaviour of the target series under the reference measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    ConvergesAs,
    Diverges(Drift),
    Inconclusive,
}

/// Origin of the tail enclosures in a three-series report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSource {
    ClosedForm,
    /// Balanced terms have zero mean under the uniform measure.
    ZeroMean,
    /// `h_μ` terms under the eigen measure form a multiplicative martingale.
    Martingale,
    Generic,
}

/// Means and variances of the target terms under a reference product measure.
#[derive(Clone, Debug, Serialize)]
pub struct ThreeSeriesReport {
    pub reference: MeasureKind,
    pub target: Target,
    pub j_max: usize,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub mean_partial: Vec<f64>,
    pub variance_partial: Vec<f64>,
    /// Enclosure of `Σ_{j>j_max} m_j`.
    pub mean_tail: Interval,
    /// Enclosure of `Σ_{j>j_max} V_j`.
    pub variance_tail: Interval,
    pub tail_source: TailSource,
    pub verdict: SeriesVerdict,
}

fn matches_weights(a: &ProductMeasure, b: &ProductMeasure) -> bool {
    let depth = a.stored_depth().max(b.stored_depth()).clamp(1, 64);
    let k = a.alphabet().len();
    (1..=depth).all(|n| (0..k).all(|x| (a.weight(n, x) - b.weight(n, x)).abs() <= 1e-10))
        && (0..k).all(|x| (a.limit_weight(x) - b.limit_weight(x)).abs() <= 1e-10)
}

/// Kolmogorov three-series diagnostic for `Σ_j X_j(x_j)` with `x ~ reference`.
pub fn three_series_diagnostic(
    p: &ProductPotential,
    reference: &ProductMeasure,
    target: Target,
    j_max: usize,
) -> Result<ThreeSeriesReport> {
    if reference.alphabet() != p.alphabet() {
        return Err(Error::InvalidArgument(
            "reference measure is over a different alphabet".into(),
        ));
    }
    let b = p.balance();
    let terms = term_table(&b, target, j_max);
    let k = b.arity();
    let mut means = Vec::with_capacity(j_max);
    let mut variances = Vec::with_capacity(j_max);
    for (j, row) in terms.iter().enumerate() {
        let w: Vec<f64> = (0..k).map(|a| reference.weight(j + 1, a)).collect();
        let m = compensated_sum((0..k).map(|a| w[a] * row[a]));
        let v = compensated_sum((0..k).map(|a| w[a] * (row[a] - m).powi(2)));
        means.push(m);
        variances.push(v);
    }
    let cumulative = |xs: &[f64]| {
        let mut acc = CompensatedSum::new();
        xs.iter()
            .map(|x| {
                acc.add(*x);
                acc.value()
            })
            .collect::<Vec<_>>()
    };
    let mean_partial = cumulative(&means);
    let variance_partial = cumulative(&variances);

    let is_uniform = (0..k).all(|a| (reference.limit_weight(a) - 1.0 / k as f64).abs() <= 1e-15)
        && (1..=reference.stored_depth())
            .all(|n| (0..k).all(|a| (reference.weight(n, a) - 1.0 / k as f64).abs() <= 1e-15));
    let is_eigen = || {
        eigen_measure(&b, reference.stored_depth().clamp(1, 64))
            .is_ok_and(|m| matches_weights(&m, reference))
    };
    let profile = b
        .dyson_family()
        .and_then(|f| reference_profile(f, reference).map(|pr| (f, pr)));

    let (mean_tail, variance_tail, tail_source, martingale) = if let Some((fam, pr)) = profile {
        let (m, v) = series_tails(fam, pr, target, j_max);
        (
            m,
            v,
            TailSource::ClosedForm,
            target == Target::HMu && pr == ReferenceProfile::Eigen,
        )
    } else {
        let beta = match target {
            Target::H => 1.0,
            Target::HMu => 2.0,
        };
        let sq = b.sum_tail_bounds(j_max, 2.0);
        let variance_tail = Interval::new(0.0, beta * beta * sq);
        if target == Target::H && is_uniform {
            (
                Interval::point(0.0),
                variance_tail,
                TailSource::ZeroMean,
                false,
            )
        } else if target == Target::HMu && is_eigen() {
            let lo = -0.5 * b.tail_bound(j_max).exp() * sq;
            (
                Interval::new(lo, 0.0),
                variance_tail,
                TailSource::Martingale,
                true,
            )
        } else {
            let s = beta * b.sum_tail_bounds(j_max, 1.0);
            (
                Interval::new(-s, s),
                variance_tail,
                TailSource::Generic,
                false,
            )
        }
    };
    let verdict = if variance_tail.hi.is_finite() {
        if mean_tail.is_finite() {
            SeriesVerdict::ConvergesAs
        } else if mean_tail.lo == f64::INFINITY {
            SeriesVerdict::Diverges(Drift::PlusInfinity)
        } else if mean_tail.hi == f64::NEG_INFINITY {
            SeriesVerdict::Diverges(Drift::MinusInfinity)
        } else {
            SeriesVerdict::Inconclusive
        }
    } else if variance_tail.lo == f64::INFINITY {
        if martingale {
            SeriesVerdict::Diverges(Drift::MinusInfinity)
        } else {
            SeriesVerdict::Diverges(Drift::Unbounded)
        }
    } else {
        SeriesVerdict::Inconclusive
    };
    Ok(ThreeSeriesReport {
        reference: reference.kind(),
        target,
        j_max,
        means,
        variances,
        mean_partial,
        variance_partial,
        mean_tail,
        variance_tail,
        tail_source,
        verdict,
    })
}
