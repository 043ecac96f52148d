//! The transfer operator `ℒφ(x) = Σ_a g(ax) φ(ax)` on cylinder functions.

mod cylinder;
mod oracle;

pub use cylinder::{decode, encode, CylinderFunction, MAX_CELLS};
pub(crate) use cylinder::{log_weight_table, table_size};
pub use oracle::{finite_depth_oracle, OracleSystem, ORACLE_MAX_DEPTH, ORACLE_MAX_STATES};

use crate::eigenfunction::{h_coefficients, log_delta};
use crate::error::{Error, Result};
use crate::montecarlo::sample;
use crate::numeric::{compensated_sum, log_sum_exp, CompensatedSum, SignedLog};
use crate::potential::ProductPotential;
use crate::spectral::{eigen_measure, equilibrium_state, leading_eigenvalue, ProductMeasure};
use rayon::prelude::*;
use serde::Serialize;

/// Depth used for `g` when none is given: `B(d) ≤ 1e-12`, capped at `10⁴`.
pub fn default_g_depth(p: &ProductPotential) -> usize {
    match p.depth() {
        Some(k) => k.max(1),
        None => p.depth_for_tol(1e-12, 10_000).unwrap_or(10_000),
    }
}

/// `Σ_{i≤depth} rows(i, x_i)` for every cell of `A^depth`.
fn additive_table(k: usize, depth: usize, row: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
    table_size(k, depth)?;
    let mut table = vec![0.0];
    for i in 1..=depth {
        let mut next = Vec::with_capacity(table.len() * k);
        for a in 0..k {
            let r = row(i, a);
            next.extend(table.iter().map(|t| t + r));
        }
        table = next;
    }
    Ok(table)
}

/// Result of applying `ℒ` with `g` truncated to its first `depth_g` factors.
#[derive(Clone, Debug, Serialize)]
pub struct Transferred {
    pub function: CylinderFunction,
    /// Bound on `sup |ℒφ − output|`; zero when the truncation is exact.
    pub certificate: f64,
}

/// `ℒφ` with `g` replaced by `g₀ ∏_{i≤depth_g} g_i`.
pub fn apply_l(
    p: &ProductPotential,
    phi: &CylinderFunction,
    depth_g: usize,
) -> Result<Transferred> {
    let k = p.arity();
    if phi.arity() != k {
        return Err(Error::InvalidArgument("arity mismatch".into()));
    }
    let depth_g = depth_g.max(1);
    let out = phi.depth().saturating_sub(1).max(depth_g - 1);
    let n = table_size(k, out)?;
    let shifted = additive_table(k, out, |i, a| {
        if i < depth_g {
            p.log_factor(i + 1, a)
        } else {
            0.0
        }
    })?;
    let g1: Vec<f64> = (0..k).map(|a| p.log_factor(1, a)).collect();
    let sub = table_size(k, phi.depth().saturating_sub(1))?;
    let values = (0..n)
        .map(|x| {
            let s: SignedLog = (0..k)
                .map(|a| {
                    let idx = if phi.depth() == 0 {
                        0
                    } else {
                        a + k * (x % sub)
                    };
                    phi.get(idx).scale_log(g1[a])
                })
                .sum();
            s.scale_log(p.log_g0() + shifted[x])
        })
        .collect();
    let exact = p.depth().is_some_and(|d| depth_g >= d);
    let certificate = if exact {
        0.0
    } else {
        let b = p.tail_bound(depth_g);
        ((k as f64).ln() + phi.log_sup_norm() + p.log_sup() + b).exp() * b.exp_m1()
    };
    Ok(Transferred {
        function: CylinderFunction::new(k, out, values)?,
        certificate,
    })
}

/// `log ℒf(x)` for positive `f` given in log form, with `g` truncated at `depth_g`.
pub fn apply_l_at(
    p: &ProductPotential,
    log_f: &dyn Fn(&[usize]) -> f64,
    x: &[usize],
    depth_g: usize,
) -> Result<f64> {
    let depth_g = depth_g.max(1);
    if x.len() + 1 < depth_g {
        return Err(Error::PrefixTooShort {
            needed: depth_g - 1,
            got: x.len(),
        });
    }
    let shifted = compensated_sum(
        x[..depth_g - 1]
            .iter()
            .enumerate()
            .map(|(i, &a)| p.log_factor(i + 2, a)),
    );
    let mut y = Vec::with_capacity(x.len() + 1);
    y.push(0);
    y.extend_from_slice(x);
    let lse = log_sum_exp((0..p.arity()).map(|a| {
        y[0] = a;
        p.log_factor(1, a) + log_f(&y)
    }));
    Ok(p.log_g0() + shifted + lse)
}

/// Exact iterates `ℒ^kφ` of a cylinder function, stored as a head table times a product tail.
///
/// `ℒ^kφ(x) = T_k(x₁…x_r) ∏_{i>r} G_{k,i}(x_i)` with `log G_{k,i}(a) = tail(i,a) − tail(i+k,a)`.
#[derive(Clone, Debug)]
pub struct TransferIterate<'p> {
    p: &'p ProductPotential,
    r: usize,
    k: usize,
    table: Vec<SignedLog>,
    head: Vec<f64>,
    mid: Vec<f64>,
    log_delta_sum: CompensatedSum,
}

impl<'p> TransferIterate<'p> {
    pub fn new(p: &'p ProductPotential, phi: &CylinderFunction) -> Result<Self> {
        if phi.arity() != p.arity() {
            return Err(Error::InvalidArgument("arity mismatch".into()));
        }
        if !p.tail_bound(0).is_finite() {
            return Err(Error::TailUnbounded(0));
        }
        let r = phi.depth().max(1);
        let k = p.arity();
        let table = phi.lift(r)?.values().to_vec();
        let head = (0..k).map(|a| p.log_g0() + p.log_factor(1, a)).collect();
        let mid = additive_table(k, r - 1, |i, a| p.log_factor(i + 1, a))?;
        Ok(TransferIterate {
            p,
            r,
            k: 0,
            table,
            head,
            mid,
            log_delta_sum: CompensatedSum::new(),
        })
    }

    /// Number of applications of `ℒ` so far.
    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn head_depth(&self) -> usize {
        self.r
    }

    pub fn step(&mut self) {
        let (p, r, k) = (self.p, self.r, self.p.arity());
        let inner_len = self.table.len() / k;
        let inner: Vec<SignedLog> = (0..inner_len)
            .map(|y| {
                (0..k)
                    .map(|a| self.table[a + k * y].scale_log(self.head[a]))
                    .sum()
            })
            .collect();
        let next = self.k + 1;
        let log_g: Vec<f64> = (0..k)
            .map(|a| p.tail_sum(r, a) - p.tail_sum(r + next, a))
            .collect();
        self.table = (0..self.table.len())
            .map(|x| {
                let (y, last) = (x % inner_len, x / inner_len);
                inner[y].scale_log(self.mid[y] + log_g[last])
            })
            .collect();
        self.k = next;
        self.log_delta_sum.add(log_delta(p, r + next));
    }

    /// `log |ℒ^kφ(s^∞)|`.
    pub fn log_at_constant(&self, s: usize) -> SignedLog {
        let idx = encode(&vec![s; self.r], self.p.arity(), self.r);
        let tail = compensated_sum((1..=self.k).map(|j| self.p.tail_sum(self.r + j, s)));
        self.table[idx].scale_log(tail)
    }

    /// `log ∫|ℒ^kφ| dμ` for the eigen measure `μ`, given its cell weights on `A^r`.
    pub fn log_l1_norm(&self, log_mu: &[f64]) -> f64 {
        let s = log_sum_exp(
            self.table
                .iter()
                .zip(log_mu)
                .filter(|(v, _)| !v.is_zero())
                .map(|(v, w)| v.log_abs + w),
        );
        s - self.log_delta_sum.value()
    }

    /// `∫ℒ^kφ dμ` for the eigen measure `μ`, given its cell weights on `A^r`.
    pub fn integral(&self, log_mu: &[f64]) -> SignedLog {
        let s: SignedLog = self
            .table
            .iter()
            .zip(log_mu)
            .map(|(v, w)| v.scale_log(*w))
            .sum();
        s.scale_log(-self.log_delta_sum.value())
    }
}

/// `k⁻¹ log ℒ^k 1(s^∞)` against the uniform bound `(2/k) Σ_{j≤k} B(j)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PressureStep {
    pub k: usize,
    pub value: f64,
    pub bound: f64,
}

/// Pressure approximations `k⁻¹ log ℒ^k 1(s^∞)` for `k = 1..=n`.
///
/// The reference symbol defaults to the mode of the equilibrium weights.
pub fn iterate_l_one(
    p: &ProductPotential,
    n: usize,
    reference: Option<usize>,
) -> Result<Vec<PressureStep>> {
    let s = match reference {
        Some(s) if s < p.arity() => s,
        Some(s) => {
            return Err(Error::InvalidArgument(format!(
                "symbol index {s} out of range"
            )))
        }
        None => {
            let m = equilibrium_state(p)?;
            let w = m.log_limit();
            (0..w.len()).fold(0, |best, a| if w[a] > w[best] { a } else { best })
        }
    };
    let mut it = TransferIterate::new(p, &CylinderFunction::constant(p.arity(), 1.0))?;
    let mut bsum = CompensatedSum::new();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        it.step();
        bsum.add(p.tail_bound(k));
        out.push(PressureStep {
            k,
            value: it.log_at_constant(s).log_abs / k as f64,
            bound: 2.0 * bsum.value() / k as f64,
        });
    }
    Ok(out)
}

/// Relative residual `|ℒh − λh| / (λh)` of the truncated eigenfunction on sample prefixes.
#[derive(Clone, Debug, Serialize)]
pub struct EigenResidual {
    pub depth: usize,
    pub log_lambda: f64,
    pub max_relative: f64,
    pub certificate: f64,
    pub certified: bool,
    pub samples: usize,
}

/// Checks `ℒh = λh` with `h` and `g` truncated at the depth where `B(d) ≤ tol`.
///
/// Analytically the ratio `ℒh^{(d)} / λh^{(d)}` is `1/h_d(x_d)`, so the residual is bounded by
/// `expm1(B(d))` plus rounding.
pub fn eigen_residual(
    p: &ProductPotential,
    samples: &[Vec<usize>],
    tol: f64,
) -> Result<EigenResidual> {
    let b = p.balance();
    let d = match b.depth() {
        Some(k) => k.max(1),
        None => b
            .depth_for_tol(tol, crate::eigenfunction::MAX_EVAL_DEPTH)
            .ok_or(Error::ToleranceUnreachable {
                tol,
                cap: crate::eigenfunction::MAX_EVAL_DEPTH,
            })?,
    };
    if let Some(short) = samples.iter().find(|x| x.len() < d) {
        return Err(Error::PrefixTooShort {
            needed: d,
            got: short.len(),
        });
    }
    let h = h_coefficients(&b, d)?;
    let log_lambda = leading_eigenvalue(&b)?.log_lambda;
    let log_h =
        |y: &[usize]| compensated_sum(y[..d].iter().enumerate().map(|(i, &a)| h.log_h[i][a]));
    let max_relative = samples
        .par_iter()
        .map(|x| -> Result<f64> {
            let l = apply_l_at(&b, &log_h, x, d)?;
            Ok((l - log_lambda - log_h(x)).exp_m1().abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let bd = if b.depth().is_some() {
        0.0
    } else {
        b.tail_bound(d)
    };
    let rounding =
        16.0 * f64::EPSILON * (d as f64 + 1.0) * (1.0 + b.tail_bound(0) + log_lambda.abs());
    let certificate = bd.exp_m1() + rounding;
    Ok(EigenResidual {
        depth: d,
        log_lambda,
        max_relative,
        certificate,
        certified: max_relative <= certificate,
        samples: samples.len(),
    })
}

/// Monte Carlo estimate of the right side of the duality.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub samples: usize,
    pub estimate: f64,
    pub std_err: f64,
    pub within_five_se: bool,
}

/// `∫ψ · λ⁻¹ℒφ dμ` against `∫(ψ∘σ)·φ dμ` for the eigen measure `μ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DualityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub certificate: f64,
    pub holds: bool,
    pub monte_carlo: Option<MonteCarloEstimate>,
}

/// Exact check of `∫ψ·ℒφ dμ = λ∫(ψ∘σ)·φ dμ` on cylinder functions.
pub fn transfer_duality_check(
    p: &ProductPotential,
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    mc_samples: usize,
    seed: u64,
) -> Result<DualityCheck> {
    let k = p.arity();
    if psi.arity() != k || phi.arity() != k {
        return Err(Error::InvalidArgument("arity mismatch".into()));
    }
    if !p.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let m = psi.depth().max(phi.depth().saturating_sub(1));
    let rows: Vec<Vec<f64>> = (1..=m + 1)
        .map(|n| {
            let mut row: Vec<f64> = (0..k).map(|a| p.partial_sum(n, a)).collect();
            crate::numeric::normalize_log(&mut row);
            row
        })
        .collect();
    let log_z = log_sum_exp((0..k).map(|a| p.partial_sum(m + 1, a)));
    let mu_m = additive_table(k, m, |i, a| rows[i - 1][a])?;
    let mu_m1 = additive_table(k, m + 1, |i, a| rows[i - 1][a])?;
    let shifted = additive_table(k, m, |i, a| p.log_factor(i + 1, a))?;
    let psi_m = psi.lift(m)?;
    let phi_m1 = phi.lift(m + 1)?;

    let mut lhs_abs = CompensatedSum::new();
    let lhs: SignedLog = (0..mu_m.len())
        .map(|x| {
            let inner: SignedLog = (0..k)
                .map(|a| phi_m1.get(a + k * x).scale_log(p.log_factor(1, a)))
                .sum();
            let t = psi_m.get(x) * inner.scale_log(mu_m[x] + shifted[x] - log_z);
            lhs_abs.add(t.abs().to_f64());
            t
        })
        .sum();
    let mut rhs_abs = CompensatedSum::new();
    let rhs: SignedLog = (0..mu_m1.len())
        .map(|y| {
            let t = (psi_m.get(y / k) * phi_m1.get(y)).scale_log(mu_m1[y]);
            rhs_abs.add(t.abs().to_f64());
            t
        })
        .sum();
    let (lhs, rhs) = (lhs.to_f64(), rhs.to_f64());
    let n_terms = (mu_m1.len() as f64).max(2.0);
    let certificate = 8.0
        * f64::EPSILON
        * (m as f64 + n_terms.log2() + 4.0)
        * (lhs_abs.value() + rhs_abs.value())
        + f64::MIN_POSITIVE;
    let difference = (lhs - rhs).abs();
    let monte_carlo = if mc_samples > 0 {
        let mu = eigen_measure(p, m + 1)?;
        let batch = sample(&mu, mc_samples, m + 1, seed)?;
        let vals: Vec<f64> = (0..mc_samples)
            .map(|i| {
                let y = batch.row(i);
                psi.eval(&y[1..]).to_f64() * phi.eval(&y).to_f64()
            })
            .collect();
        let n = mc_samples as f64;
        let mean = compensated_sum(vals.iter().copied()) / n;
        let var = if mc_samples > 1 {
            compensated_sum(vals.iter().map(|v| (v - mean).powi(2))) / (n - 1.0)
        } else {
            0.0
        };
        let std_err = (var / n).sqrt();
        let slack = mu.tv_tail() * 2.0 * (psi.log_sup_norm() + phi.log_sup_norm()).exp();
        Some(MonteCarloEstimate {
            samples: mc_samples,
            estimate: mean,
            std_err,
            within_five_se: (mean - lhs).abs() <= 5.0 * std_err + slack + certificate,
        })
    } else {
        None
    };
    Ok(DualityCheck {
        lhs,
        rhs,
        difference,
        certificate,
        holds: difference <= certificate,
        monte_carlo,
    })
}

/// `‖λ^{-n}ℒ^nφ‖_{L¹(μ)}` for a mean-zero cylinder function.
#[derive(Clone, Debug, Serialize)]
pub struct LinDecay {
    /// Mean of the input under the eigen measure, subtracted before iterating.
    pub mean_removed: f64,
    /// `norms[n]` for `n = 0..=n_max`.
    pub norms: Vec<f64>,
}

/// Decay of `λ^{-n}ℒ^nφ` in `L¹` of the eigen measure after centring `φ`.
///
/// For `φ` depending on `m` coordinates the norm vanishes for `n ≥ m` up to rounding.
pub fn lin_decay_probe(
    p: &ProductPotential,
    phi: &CylinderFunction,
    n_max: usize,
) -> Result<LinDecay> {
    let r = phi.depth().max(1);
    let mu = eigen_measure(p, r)?;
    let mean = phi.integrate(&mu)?.to_f64();
    let centred = phi.add_constant(-mean).lift(r)?;
    let w = log_weight_table(&mu, r)?;
    let log_lambda = leading_eigenvalue(p)?.log_lambda;
    let mut it = TransferIterate::new(p, &centred)?;
    let mut norms = Vec::with_capacity(n_max + 1);
    norms.push(it.log_l1_norm(&w).exp());
    for n in 1..=n_max {
        it.step();
        norms.push((it.log_l1_norm(&w) - n as f64 * log_lambda).exp());
    }
    Ok(LinDecay {
        mean_removed: mean,
        norms,
    })
}

/// `P_{μ̃₀}φ(x) = Σ_a μ̃₀(a) φ(ax)`, the transfer operator of the normalized potential.
pub fn apply_p_mu0(p: &ProductPotential, phi: &CylinderFunction) -> Result<CylinderFunction> {
    let k = p.arity();
    if phi.arity() != k {
        return Err(Error::InvalidArgument("arity mismatch".into()));
    }
    if phi.depth() == 0 {
        return Ok(phi.clone());
    }
    let eq = equilibrium_state(p)?;
    let w = eq.log_limit();
    let n = phi.values().len() / k;
    let values = (0..n)
        .map(|y| (0..k).map(|a| phi.get(a + k * y).scale_log(w[a])).sum())
        .collect();
    CylinderFunction::new(k, phi.depth() - 1, values)
}

/// `‖ℒφ‖_{L^p(ρ)}` against `|A| · sup g · ‖φ‖_{L^p(ρ)}` for the uniform Bernoulli `ρ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LpWitness {
    pub exponent: f64,
    /// Upper bound on `log ‖ℒφ‖_p`.
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub holds: bool,
}

/// Certified instance of the `L^p(ρ)` boundedness estimate for `ℒ`.
pub fn lp_witness(
    p: &ProductPotential,
    phi: &CylinderFunction,
    exponent: f64,
) -> Result<LpWitness> {
    let k = p.arity();
    if phi.arity() != k {
        return Err(Error::InvalidArgument("arity mismatch".into()));
    }
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exponent must be in [1, ∞), got {exponent}"
        )));
    }
    if !p.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let rho = ProductMeasure::uniform(p.alphabet().clone());
    let r = phi.depth().saturating_sub(1).max(1);
    let core = apply_l(p, phi, r + 1)?.function.lift(r)?;
    let log_k = (k as f64).ln();
    let head = log_sum_exp(
        core.values()
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| exponent * v.log_abs),
    ) - r as f64 * log_k;
    let (d, slack) = match p.depth() {
        Some(kd) => (kd, 0.0),
        None => {
            let d = p.depth_for_tol(1e-12, 100_000).unwrap_or(100_000);
            (d, exponent * p.tail_bound(d + 1))
        }
    };
    let rest = compensated_sum(
        (r + 1..=d).map(|i| log_sum_exp((0..k).map(|a| exponent * p.log_factor(i + 1, a))) - log_k),
    );
    let log_lhs = (head + rest + slack) / exponent;
    let log_rhs = log_k + p.log_sup() + phi.log_lp_norm(&rho, exponent)?;
    Ok(LpWitness {
        exponent,
        log_lhs,
        log_rhs,
        holds: log_lhs <= log_rhs,
    })
}
