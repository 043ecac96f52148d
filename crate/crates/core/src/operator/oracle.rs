use super::cylinder::decode;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::potential::ProductPotential;
use serde::Serialize;

/// Largest depth accepted by the oracle.
pub const ORACLE_MAX_DEPTH: usize = 12;
/// Largest state space `|A|^K` accepted by the oracle.
pub const ORACLE_MAX_STATES: usize = 1_000_000;

/// Eigen-data of a finite-depth potential from its transfer matrix on `A^K`.
#[derive(Clone, Debug, Serialize)]
pub struct OracleSystem {
    pub log_lambda: f64,
    /// Relative spread of the Collatz–Wielandt bounds at the final iterate.
    pub lambda_spread: f64,
    /// `log_h[i-1][a]`, balanced, `i = 1..=max(K,1)`.
    pub log_h: Vec<Vec<f64>>,
    /// Largest deviation of `log v` from its additive fit.
    pub additivity_residual: f64,
    /// `log_mu[n-1][a]`, `n = 1..=max(K,1)`.
    pub log_mu: Vec<Vec<f64>>,
    pub log_equilibrium: Vec<f64>,
}

/// Independent computation of `λ`, `h_i`, `μₙ`, `μ̃₀` by power iteration of the transfer matrix.
///
/// The state space is `A^K`; `ℒ` maps functions of `K` coordinates to functions of `K`
/// coordinates, and `ℒ^K` has rank one, so both iterations are exact after `K` steps.
pub fn finite_depth_oracle(p: &ProductPotential) -> Result<OracleSystem> {
    let depth = p
        .depth()
        .ok_or_else(|| Error::OracleLimits("potential is not finite-depth".into()))?;
    if depth > ORACLE_MAX_DEPTH {
        return Err(Error::OracleLimits(format!(
            "depth {depth} exceeds {ORACLE_MAX_DEPTH}"
        )));
    }
    let k = p.arity();
    let kd = depth.max(1);
    let states = (0..kd)
        .try_fold(1usize, |n, _| {
            n.checked_mul(k).filter(|&n| n <= ORACLE_MAX_STATES)
        })
        .ok_or_else(|| {
            Error::OracleLimits(format!("{k}^{kd} states exceed {ORACLE_MAX_STATES}"))
        })?;
    let rows = p.factor_rows(kd);
    let g1: Vec<f64> = (0..k).map(|a| p.log_g0() + rows[0][a]).collect();
    // Σ_{i<K} log g_{i+1}(x_i), by explicit products over the digits of each state.
    let shifted: Vec<f64> = (0..states)
        .map(|s| {
            decode(s, k, kd)
                .iter()
                .take(kd - 1)
                .enumerate()
                .map(|(i, &a)| rows[i + 1][a])
                .sum()
        })
        .collect();
    let low = states / k;
    let iterations = 4 * kd + 10;

    let apply_right = |v: &[f64]| -> Vec<f64> {
        (0..states)
            .map(|s| {
                let tail = s % low;
                shifted[s] + log_sum_exp((0..k).map(|a| g1[a] + v[a + k * tail]))
            })
            .collect()
    };
    let mut v = vec![0.0; states];
    for _ in 0..iterations {
        v = apply_right(&v);
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.iter_mut().for_each(|x| *x -= m);
    }
    let lv = apply_right(&v);
    let (lo, hi) = lv
        .iter()
        .zip(&v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a - b), hi.max(a - b))
        });
    let lambda_spread = (hi - lo).abs();
    if lambda_spread > 1e-11 {
        return Err(Error::NoConvergence(lambda_spread));
    }
    let log_lambda = 0.5 * (lo + hi);

    // Left iteration: (uM)(y) = g(y₁ y₂…y_K ·) Σ_{x_K} u(y₂…y_K x_K).
    let mut u = vec![0.0; states];
    for _ in 0..iterations {
        let marg: Vec<f64> = (0..low)
            .map(|t| log_sum_exp((0..k).map(|last| u[t + low * last])))
            .collect();
        u = (0..states)
            .map(|y| {
                let a = y % k;
                let t = y / k;
                g1[a] + shifted[t] + marg[t]
            })
            .collect();
        let z = log_sum_exp(u.iter().copied());
        u.iter_mut().for_each(|x| *x -= z);
    }

    let mut log_mu = vec![vec![f64::NEG_INFINITY; k]; kd];
    let mut sums = vec![vec![0.0; k]; kd];
    let mut buckets = vec![vec![Vec::with_capacity(states / k); k]; kd];
    for s in 0..states {
        for (i, &a) in decode(s, k, kd).iter().enumerate() {
            buckets[i][a].push(u[s]);
            sums[i][a] += v[s];
        }
    }
    for i in 0..kd {
        for a in 0..k {
            log_mu[i][a] = log_sum_exp(buckets[i][a].iter().copied());
        }
    }
    let per = (states / k) as f64;
    let mean_v = v.iter().sum::<f64>() / states as f64;
    let log_h: Vec<Vec<f64>> = sums
        .iter()
        .map(|row| row.iter().map(|s| s / per - mean_v).collect())
        .collect();
    let additivity_residual = (0..states)
        .map(|s| {
            let fit: f64 = mean_v
                + decode(s, k, kd)
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| log_h[i][a])
                    .sum::<f64>();
            (fit - v[s]).abs()
        })
        .fold(0.0, f64::max);
    let log_equilibrium = log_mu[kd - 1].clone();
    Ok(OracleSystem {
        log_lambda,
        lambda_spread,
        log_h,
        additivity_residual,
        log_mu,
        log_equilibrium,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Alphabet;

    #[test]
    fn constant() {
        let p = ProductPotential::constant(Alphabet::new(["a", "b", "c"]).unwrap(), 0.0).unwrap();
        let o = finite_depth_oracle(&p).unwrap();
        assert!((o.log_lambda - 3f64.ln()).abs() < 1e-15);
        assert!(o.log_mu[0]
            .iter()
            .all(|m| (m.exp() - 1.0 / 3.0).abs() < 1e-15));
        assert!(o.log_h[0].iter().all(|h| h.abs() < 1e-15));
    }

    #[test]
    fn depth_one() {
        let p = ProductPotential::finite_depth(
            Alphabet::signed_binary(),
            0.0,
            vec![vec![0.0, 2f64.ln()]],
        )
        .unwrap();
        let o = finite_depth_oracle(&p).unwrap();
        assert!((o.log_lambda.exp() - 3.0).abs() < 1e-14);
        assert!((o.log_equilibrium[1].exp() - 2.0 / 3.0).abs() < 1e-15);
        assert!((o.log_mu[0][1].exp() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let p = ProductPotential::finite_depth(
            Alphabet::signed_binary(),
            0.0,
            vec![vec![0.0, 0.0]; 13],
        )
        .unwrap();
        assert!(matches!(
            finite_depth_oracle(&p),
            Err(Error::OracleLimits(_))
        ));
        let p = ProductPotential::finite_depth(
            Alphabet::new(["a", "b", "c", "d"]).unwrap(),
            0.0,
            vec![vec![0.0; 4]; 11],
        )
        .unwrap();
        assert!(matches!(
            finite_depth_oracle(&p),
            Err(Error::OracleLimits(_))
        ));
        let (_, d) = crate::dyson::build(2.0).unwrap();
        assert!(finite_depth_oracle(&d).is_err());
    }
}
