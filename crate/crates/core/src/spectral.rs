//! Conformal and eigen measures, the leading eigenvalue, equilibrium states and pressure.
//!
//! `conformal_measure(g)` has weights `μₙ(a) ∝ 1/∏_{i≤n} g_i(a)`; `eigen_measure(g)` has weights
//! `μₙ(a) ∝ ∏_{i≤n} g_i(a)` and is the conformal measure of `1/g`. λ is reported in log form only.

use crate::eigenfunction::{h_coefficients, HCoefficients};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp, normalize_log};
use crate::potential::{classify_regularity, Alphabet, ProductPotential};
use rayon::prelude::*;
use serde::Serialize;

/// Default tolerance on `B(n)` that decides how many coordinates a measure stores.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Which construction produced a measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Conformal,
    Eigen,
    Equilibrium,
    Uniform,
    Bernoulli,
}

/// A product measure `⊗ μₙ`: stored coordinates, then the limit vector.
#[derive(Clone, Debug, Serialize)]
pub struct ProductMeasure {
    alphabet: Alphabet,
    kind: MeasureKind,
    log_weights: Vec<Vec<f64>>,
    log_limit: Vec<f64>,
    tv_tail: f64,
    bernoulli: bool,
    unique_conformal: bool,
}

fn check_probability(w: &[f64]) -> Result<()> {
    if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidMeasure(format!("weight {x} is not positive")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMeasure(format!("weights sum to {s}")));
    }
    Ok(())
}

impl ProductMeasure {
    /// Bernoulli measure with the given positive weights summing to one.
    pub fn bernoulli(alphabet: Alphabet, weights: &[f64]) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(Error::InvalidMeasure(
                "weight count differs from alphabet size".into(),
            ));
        }
        check_probability(weights)?;
        let mut log_limit: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        normalize_log(&mut log_limit);
        Ok(Self::from_parts(
            alphabet,
            MeasureKind::Bernoulli,
            Vec::new(),
            log_limit,
            0.0,
            false,
        ))
    }

    /// The uniform Bernoulli measure `ρ`.
    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let log_limit = vec![-(k as f64).ln(); k];
        Self::from_parts(
            alphabet,
            MeasureKind::Uniform,
            Vec::new(),
            log_limit,
            0.0,
            false,
        )
    }

    fn from_parts(
        alphabet: Alphabet,
        kind: MeasureKind,
        log_weights: Vec<Vec<f64>>,
        log_limit: Vec<f64>,
        tv_tail: f64,
        unique_conformal: bool,
    ) -> Self {
        let bernoulli = log_weights.iter().all(|r| {
            r.iter()
                .zip(&log_limit)
                .all(|(a, b)| (a - b).abs() <= 1e-15)
        });
        ProductMeasure {
            alphabet,
            kind,
            log_weights,
            log_limit,
            tv_tail,
            bernoulli,
            unique_conformal,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// Number of explicitly stored coordinates.
    pub fn stored_depth(&self) -> usize {
        self.log_weights.len()
    }

    /// `log μₙ(a)` for `n ≥ 1`; the limit vector beyond the stored depth.
    pub fn log_weight(&self, n: usize, a: usize) -> f64 {
        debug_assert!(n >= 1);
        match self.log_weights.get(n - 1) {
            Some(row) => row[a],
            None => self.log_limit[a],
        }
    }

    pub fn weight(&self, n: usize, a: usize) -> f64 {
        self.log_weight(n, a).exp()
    }

    pub fn log_row(&self, n: usize) -> &[f64] {
        self.log_weights.get(n - 1).unwrap_or(&self.log_limit)
    }

    pub fn log_limit(&self) -> &[f64] {
        &self.log_limit
    }

    pub fn limit_weight(&self, a: usize) -> f64 {
        self.log_limit[a].exp()
    }

    pub fn limit_weights(&self) -> Vec<f64> {
        self.log_limit.iter().map(|l| l.exp()).collect()
    }

    /// Bound on `‖μₙ − μ_∞‖_TV` for `n` beyond the stored depth.
    pub fn tv_tail(&self) -> f64 {
        self.tv_tail
    }

    pub fn is_bernoulli(&self) -> bool {
        self.bernoulli
    }

    /// Set when the uniqueness condition certifies this is the only conformal measure.
    pub fn unique_conformal(&self) -> bool {
        self.unique_conformal
    }

    /// `log μ([w₁…wₙ])`.
    pub fn log_cylinder(&self, word: &[usize]) -> f64 {
        compensated_sum(
            word.iter()
                .enumerate()
                .map(|(i, &a)| self.log_weight(i + 1, a)),
        )
    }
}

fn product_measure(
    p: &ProductPotential,
    n_max: usize,
    tol: f64,
    sign: f64,
    kind: MeasureKind,
) -> Result<ProductMeasure> {
    let b0 = p.tail_bound(0);
    if !b0.is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let n_max = n_max.max(1);
    let stored = p.depth_for_tol(tol, n_max).unwrap_or(n_max).max(1);
    let k = p.arity();
    let log_weights = (1..=stored)
        .map(|n| {
            let mut row: Vec<f64> = (0..k).map(|a| sign * p.partial_sum(n, a)).collect();
            normalize_log(&mut row);
            row
        })
        .collect();
    let mut log_limit: Vec<f64> = (0..k).map(|a| sign * p.total(a)).collect();
    normalize_log(&mut log_limit);
    let bn = p.tail_bound(stored);
    let tv_tail = if bn == 0.0 {
        0.0
    } else {
        0.5 * (2.0 * bn).exp_m1()
    };
    let unique = classify_regularity(p, 64)?.uniqueness_condition.holds();
    Ok(ProductMeasure::from_parts(
        p.alphabet().clone(),
        kind,
        log_weights,
        log_limit,
        tv_tail,
        unique,
    ))
}

/// The product-type conformal measure of `g`: `μₙ(a) ∝ exp(−Σ_{i≤n} log g_i(a))`.
pub fn conformal_measure(p: &ProductPotential, n_max: usize) -> Result<ProductMeasure> {
    conformal_measure_with_tol(p, n_max, DEFAULT_TOL)
}

pub fn conformal_measure_with_tol(
    p: &ProductPotential,
    n_max: usize,
    tol: f64,
) -> Result<ProductMeasure> {
    product_measure(p, n_max, tol, -1.0, MeasureKind::Conformal)
}

/// The eigen measure `ℒ*μ = λμ`: `μₙ(a) ∝ exp(Σ_{i≤n} log g_i(a))`.
pub fn eigen_measure(p: &ProductPotential, n_max: usize) -> Result<ProductMeasure> {
    eigen_measure_with_tol(p, n_max, DEFAULT_TOL)
}

pub fn eigen_measure_with_tol(
    p: &ProductPotential,
    n_max: usize,
    tol: f64,
) -> Result<ProductMeasure> {
    product_measure(p, n_max, tol, 1.0, MeasureKind::Eigen)
}

/// `log λ` with a certified error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub log_lambda: f64,
    pub error: f64,
}

/// `log λ = log g₀ + log Σ_a exp(Σ_k log g_k(a))`.
pub fn leading_eigenvalue(p: &ProductPotential) -> Result<Eigenvalue> {
    if !p.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let lse = log_sum_exp((0..p.arity()).map(|a| p.total(a)));
    Ok(Eigenvalue {
        log_lambda: p.log_g0() + lse,
        error: p.tail_uncertainty(0),
    })
}

fn equilibrium_log_weights(p: &ProductPotential) -> Vec<f64> {
    let mut w: Vec<f64> = (0..p.arity()).map(|a| p.total(a)).collect();
    normalize_log(&mut w);
    w
}

/// The Bernoulli equilibrium state `μ̃₀(a) ∝ exp(Σ_k log g_k(a))`.
pub fn equilibrium_state(p: &ProductPotential) -> Result<ProductMeasure> {
    if !p.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let w = equilibrium_log_weights(p);
    Ok(ProductMeasure::from_parts(
        p.alphabet().clone(),
        MeasureKind::Equilibrium,
        Vec::new(),
        w,
        0.0,
        false,
    ))
}

/// `g̃(x) = μ̃₀(x₁)`, a depth-one potential with `ℒ_{log g̃} 1 = 1`.
pub fn normalized_potential(p: &ProductPotential) -> Result<ProductPotential> {
    let m = equilibrium_state(p)?;
    ProductPotential::finite_depth(p.alphabet().clone(), 0.0, vec![m.log_limit().to_vec()])
}

/// `−Σ_a μ̃₀(a) log μ̃₀(a)` of a Bernoulli measure.
pub fn entropy_bernoulli(m: &ProductMeasure) -> Result<f64> {
    if !m.is_bernoulli() {
        return Err(Error::InvalidMeasure(
            "entropy requires a Bernoulli measure".into(),
        ));
    }
    Ok(-compensated_sum(m.log_limit().iter().map(|l| l.exp() * l)))
}

/// Terms of the variational principle `P(log g) = h(μ̃) + ∫ log g dμ̃`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VariationalCheck {
    pub log_lambda: f64,
    pub entropy: f64,
    pub energy: f64,
    pub residual: f64,
    pub certificate: f64,
}

pub fn variational_check(p: &ProductPotential) -> Result<VariationalCheck> {
    let ev = leading_eigenvalue(p)?;
    let m = equilibrium_state(p)?;
    let entropy = entropy_bernoulli(&m)?;
    let energy = compensated_sum(
        std::iter::once(p.log_g0()).chain((0..p.arity()).map(|a| m.limit_weight(a) * p.total(a))),
    );
    let residual = (ev.log_lambda - entropy - energy).abs();
    let scale = ev.log_lambda.abs() + entropy + energy.abs() + p.log_g0().abs() + p.tail_bound(0);
    let certificate = 2.0 * ev.error + 64.0 * f64::EPSILON * scale;
    Ok(VariationalCheck {
        log_lambda: ev.log_lambda,
        entropy,
        energy,
        residual,
        certificate,
    })
}

/// One point of a temperature scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub log_lambda: f64,
    pub error: f64,
}

/// `log λ_t` for the potentials `g^t`; points are evaluated in parallel, order preserved.
pub fn temperature_scan(p: &ProductPotential, t_values: &[f64]) -> Result<Vec<ScanPoint>> {
    t_values
        .par_iter()
        .map(|&t| {
            let ev = leading_eigenvalue(&p.scaled(t))?;
            Ok(ScanPoint {
                t,
                log_lambda: ev.log_lambda,
                error: ev.error,
            })
        })
        .collect()
}

/// Leading eigenvalue, eigenfunction coefficients and equilibrium weights.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSystem {
    pub log_lambda: f64,
    pub error: f64,
    pub pressure: f64,
    pub eigen_coefficients: HCoefficients,
    pub equilibrium_weights: Vec<f64>,
}

pub fn eigen_system(p: &ProductPotential, i_max: usize) -> Result<EigenSystem> {
    let ev = leading_eigenvalue(p)?;
    Ok(EigenSystem {
        log_lambda: ev.log_lambda,
        error: ev.error,
        pressure: ev.log_lambda,
        eigen_coefficients: h_coefficients(p, i_max)?,
        equilibrium_weights: equilibrium_log_weights(p).iter().map(|l| l.exp()).collect(),
    })
}

/// Which conformality statement to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `m = conformal_measure(g)`, `m(T[w]) = Λ ∫_{[w]} g dm` with `Λ = λ(1/g)`.
    Conformal,
    /// `m = eigen_measure(g)`, `m(T[w]) = λ ∫_{[w]} 1/g dm`.
    Eigen,
}

/// Worst residual of the conformality identity over all cylinders up to a length.
#[derive(Clone, Debug, Serialize)]
pub struct ConformalityCheck {
    pub orientation: Orientation,
    pub max_len: usize,
    pub cylinders: usize,
    pub max_residual: f64,
    pub certificate: f64,
}

/// Checks `log m([a₂…aₙ]) = log Λ + log ∫_{[a₁…aₙ]} q dm` for every cylinder with `n ≤ max_len`.
///
/// Coordinates up to `max(64, max_len)` are integrated explicitly from the stored weights; the
/// remaining infinite product telescopes to a ratio of partition sums.
pub fn conformality_check(
    p: &ProductPotential,
    orientation: Orientation,
    max_len: usize,
) -> Result<ConformalityCheck> {
    let q = match orientation {
        Orientation::Conformal => p.clone(),
        Orientation::Eigen => p.inverse(),
    };
    let depth = max_len.max(64);
    let m = conformal_measure(&q, depth)?;
    let lambda = leading_eigenvalue(&q.inverse())?;
    let k = q.arity();
    // log ∫ q_i dm_i for i ≤ depth.
    let coord: Vec<f64> = (1..=depth)
        .map(|i| log_sum_exp((0..k).map(|a| q.log_factor(i, a) + m.log_weight(i, a))))
        .collect();
    let mut coord_suffix = vec![0.0; depth + 2];
    for i in (1..=depth).rev() {
        coord_suffix[i] = coord_suffix[i + 1] + coord[i - 1];
    }
    let log_w = |n: usize| log_sum_exp((0..k).map(|a| -q.partial_sum(n, a)));
    let log_w_inf = log_sum_exp((0..k).map(|a| -q.total(a)));
    let far = log_w(depth) - log_w_inf;

    let mut max_residual = 0.0f64;
    let mut cylinders = 0;
    let mut word = Vec::with_capacity(max_len);
    for n in 1..=max_len {
        word.clear();
        word.resize(n, 0);
        loop {
            let lhs = compensated_sum((1..n).map(|i| m.log_weight(i, word[i])));
            let rhs = compensated_sum(
                [lambda.log_lambda, q.log_g0(), coord_suffix[n + 1], far]
                    .into_iter()
                    .chain(
                        (1..=n)
                            .map(|i| q.log_factor(i, word[i - 1]) + m.log_weight(i, word[i - 1])),
                    ),
            );
            max_residual = max_residual.max((lhs - rhs).abs());
            cylinders += 1;
            if !next_word(&mut word, k) {
                break;
            }
        }
    }
    let scale = lambda.log_lambda.abs() + q.log_g0().abs() + 2.0 * q.tail_bound(0) + 1.0;
    let certificate =
        4.0 * q.tail_uncertainty(0) + (depth as f64 + 16.0) * 8.0 * f64::EPSILON * scale;
    Ok(ConformalityCheck {
        orientation,
        max_len,
        cylinders,
        max_residual,
        certificate,
    })
}

/// Advances `word` lexicographically (first symbol fastest); false after the last word.
pub(crate) fn next_word(word: &mut [usize], k: usize) -> bool {
    for s in word.iter_mut() {
        *s += 1;
        if *s < k {
            return true;
        }
        *s = 0;
    }
    false
}
