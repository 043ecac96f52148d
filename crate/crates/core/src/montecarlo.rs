//! Seeded sampling from product measures and empirical probes of almost-sure statements.
//!
//! Rows are drawn with ChaCha8, seeded from the batch seed and using the row index as the
//! stream id, so any row can be regenerated independently and in parallel.

use crate::eigenfunction::{log_delta, term_table, Target};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::potential::ProductPotential;
use crate::spectral::{MeasureKind, ProductMeasure};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Name of the generator, for output metadata.
pub const RNG_NAME: &str = "chacha8";

/// Longest forced run the oscillation probe will construct.
pub const RUN_CAP: usize = 1_000_000;

fn thresholds(log_row: &[f64]) -> Vec<u64> {
    let mut acc = 0.0;
    log_row[..log_row.len() - 1]
        .iter()
        .map(|lw| {
            acc += lw.exp();
            ((acc * 4294967296.0).round() as u64).min(1 << 32)
        })
        .collect()
}

/// An `N × L` matrix of symbols drawn from a product measure; rows are generated on demand.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    seed: u64,
    kind: MeasureKind,
    count: usize,
    len: usize,
    rows: Vec<Vec<u64>>,
    limit: Vec<u64>,
}

impl SampleBatch {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn measure_kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0 || self.len == 0
    }

    /// Symbols of row `i`, streamed without materialising the row.
    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        assert!(i < self.count, "row {i} out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        (0..self.len).map(move |n| {
            let t = self.rows.get(n).unwrap_or(&self.limit);
            let u = rng.next_u32() as u64;
            t.iter().take_while(|&&c| u >= c).count()
        })
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        self.row_iter(i).collect()
    }

    /// The full symbol matrix.
    pub fn to_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.count)
            .into_par_iter()
            .map(|i| self.row(i))
            .collect()
    }
}

/// Draws `n` rows of length `len`; coordinate `j` follows `μ_j`, the limit beyond the stored depth.
pub fn sample(measure: &ProductMeasure, n: usize, len: usize, seed: u64) -> Result<SampleBatch> {
    let stored = measure.stored_depth().min(len);
    Ok(SampleBatch {
        seed,
        kind: measure.kind(),
        count: n,
        len,
        rows: (1..=stored)
            .map(|j| thresholds(measure.log_row(j)))
            .collect(),
        limit: thresholds(measure.log_limit()),
    })
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantiles of the truncated log target at one depth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DriftRow {
    pub depth: usize,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftCurve {
    pub target: Target,
    pub reference: MeasureKind,
    pub samples: usize,
    pub rows: Vec<DriftRow>,
}

/// Quantile curves of `Σ_{i≤d} X_i(x_i)` across the rows of a batch, for each requested depth.
pub fn drift_probe(
    p: &ProductPotential,
    batch: &SampleBatch,
    target: Target,
    depths: &[usize],
) -> Result<DriftCurve> {
    let mut depths = depths.to_vec();
    depths.sort_unstable();
    depths.dedup();
    let max = depths.last().copied().unwrap_or(0);
    if max > batch.len() {
        return Err(Error::PrefixTooShort {
            needed: max,
            got: batch.len(),
        });
    }
    if batch.count() == 0 {
        return Err(Error::InvalidArgument("empty sample batch".into()));
    }
    let terms = term_table(p, target, max);
    let per_row: Vec<Vec<f64>> = (0..batch.count())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(depths.len());
            let mut acc = CompensatedSum::new();
            let mut next = depths.iter().peekable();
            while next.peek() == Some(&&0) {
                out.push(0.0);
                next.next();
            }
            for (j, a) in batch.row_iter(i).take(max).enumerate() {
                acc.add(terms[j][a]);
                while next.peek() == Some(&&(j + 1)) {
                    out.push(acc.value());
                    next.next();
                }
            }
            out
        })
        .collect();
    let n = batch.count() as f64;
    let rows = depths
        .iter()
        .enumerate()
        .map(|(c, &depth)| {
            let mut col: Vec<f64> = per_row.iter().map(|r| r[c]).collect();
            let mean = compensated_sum(col.iter().copied()) / n;
            let var = if col.len() > 1 {
                compensated_sum(col.iter().map(|v| (v - mean).powi(2))) / (n - 1.0)
            } else {
                0.0
            };
            col.sort_by(f64::total_cmp);
            DriftRow {
                depth,
                q05: quantile(&col, 0.05),
                q25: quantile(&col, 0.25),
                q50: quantile(&col, 0.5),
                q75: quantile(&col, 0.75),
                q95: quantile(&col, 0.95),
                mean,
                std_err: (var / n).sqrt(),
            }
        })
        .collect();
    Ok(DriftCurve {
        target,
        reference: batch.measure_kind(),
        samples: batch.count(),
        rows,
    })
}

/// `log μ̃([w]) − log μ([w])` for the equilibrium state `μ̃` and the eigen measure `μ`.
#[derive(Clone, Debug, Serialize)]
pub struct RnRatio {
    pub word: Vec<usize>,
    pub log_ratio: f64,
    pub certificate: f64,
}

/// Radon–Nikodym ratios on cylinders: `Σ_j [log Δ_j + Σ_{l>j} log g_l(w_j)]`.
pub fn cylinder_rn_ratios(p: &ProductPotential, words: &[Vec<usize>]) -> Result<Vec<RnRatio>> {
    if !p.tail_bound(0).is_finite() {
        return Err(Error::TailUnbounded(0));
    }
    let k = p.arity();
    let longest = words.iter().map(Vec::len).max().unwrap_or(0);
    let deltas: Vec<f64> = (1..=longest).map(|j| log_delta(p, j)).collect();
    words
        .iter()
        .map(|w| {
            if let Some(&a) = w.iter().find(|&&a| a >= k) {
                return Err(Error::InvalidArgument(format!(
                    "symbol index {a} out of range"
                )));
            }
            let log_ratio = compensated_sum(
                w.iter()
                    .enumerate()
                    .map(|(i, &a)| deltas[i] + p.tail_sum(i + 1, a)),
            );
            let certificate = w
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    3.0 * p.tail_uncertainty(i + 1) + 8.0 * f64::EPSILON * (1.0 + p.tail_bound(0))
                })
                .sum();
            Ok(RnRatio {
                word: w.clone(),
                log_ratio,
                certificate,
            })
        })
        .collect()
}

/// One side of the oscillation construction.
#[derive(Clone, Debug, Serialize)]
pub struct OscillationSide {
    /// Symbol repeated along the forced run.
    pub symbol: usize,
    /// Last forced coordinate `n`.
    pub run_end: usize,
    /// `Σ_{i≤n} log h_i(x_i)` on the forced prefix.
    pub run_value: f64,
    pub samples: usize,
    /// Share of samples whose truncated `log h` is beyond the threshold.
    pub fraction: f64,
    pub std_err: f64,
    /// `log₂` of the analytic lower bound `2^{-n-1}` on the uniform probability of the event.
    pub log2_bound: f64,
}

/// Witness that `log h` takes values `≥ M` and `≤ −M` inside a fixed cylinder.
#[derive(Clone, Debug, Serialize)]
pub struct OscillationWitness {
    pub gamma: f64,
    pub cylinder: Vec<usize>,
    pub threshold: f64,
    pub tail_depth: usize,
    pub plus: OscillationSide,
    pub minus: OscillationSide,
}

/// Forces a run of one symbol after `cylinder` until the truncated `log h` passes `±M`, then
/// samples the remaining coordinates uniformly.
pub fn oscillation_probe(
    p: &ProductPotential,
    cylinder: &[usize],
    threshold: f64,
    samples: usize,
    tail_depth: usize,
    seed: u64,
) -> Result<OscillationWitness> {
    let family = p
        .dyson_family()
        .ok_or_else(|| Error::Regime("oscillation probe needs a dyson potential".into()))?;
    let gamma = family.gamma();
    if !(gamma > 1.5 && gamma <= 2.0) {
        return Err(Error::Regime(format!(
            "oscillation probe needs gamma in (3/2, 2], got {gamma}"
        )));
    }
    if family.coeff() == 0.0 || samples == 0 {
        return Err(Error::InvalidArgument(
            "need a nonzero scale and at least one sample".into(),
        ));
    }
    if let Some(&a) = cylinder.iter().find(|&&a| a >= p.arity()) {
        return Err(Error::InvalidArgument(format!(
            "symbol index {a} out of range"
        )));
    }
    let rho = ProductMeasure::uniform(p.alphabet().clone());
    let side = |sign: f64, stream: u64| -> Result<OscillationSide> {
        let symbol = (0..p.arity())
            .find(|&a| p.tail_sum(1, a) * sign > 0.0)
            .unwrap_or(0);
        let mut acc = CompensatedSum::new();
        for (i, &a) in cylinder.iter().enumerate() {
            acc.add(p.tail_sum(i + 1, a));
        }
        let mut n = cylinder.len();
        while sign * acc.value() < threshold {
            if n >= RUN_CAP {
                return Err(Error::RunTooLong(RUN_CAP));
            }
            n += 1;
            acc.add(p.tail_sum(n, symbol));
        }
        let run_value = acc.value();
        let batch = sample(&rho, samples, tail_depth, seed.wrapping_add(stream))?;
        let hits: usize = (0..samples)
            .into_par_iter()
            .map(|r| {
                let mut s = acc;
                for (j, a) in batch.row_iter(r).enumerate() {
                    s.add(p.tail_sum(n + 1 + j, a));
                }
                usize::from(sign * s.value() >= threshold)
            })
            .sum();
        let f = hits as f64 / samples as f64;
        Ok(OscillationSide {
            symbol,
            run_end: n,
            run_value,
            samples,
            fraction: f,
            std_err: (f * (1.0 - f) / samples as f64).sqrt(),
            log2_bound: -(n as f64) - 1.0,
        })
    };
    Ok(OscillationWitness {
        gamma,
        cylinder: cylinder.to_vec(),
        threshold,
        tail_depth,
        plus: side(1.0, 0)?,
        minus: side(-1.0, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyson;
    use crate::potential::Alphabet;
    use crate::spectral::{conformal_measure, eigen_measure, equilibrium_state};

    #[test]
    fn reproducible_and_in_range() {
        let m =
            ProductMeasure::bernoulli(Alphabet::new(["a", "b", "c"]).unwrap(), &[0.2, 0.3, 0.5])
                .unwrap();
        let a = sample(&m, 20, 50, 9).unwrap().to_matrix();
        let b = sample(&m, 20, 50, 9).unwrap().to_matrix();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&s| s < 3));
        assert_ne!(a, sample(&m, 20, 50, 10).unwrap().to_matrix());
    }

    #[test]
    fn uniform_frequencies() {
        let m = ProductMeasure::uniform(Alphabet::signed_binary());
        let row = sample(&m, 1, 200_000, 1).unwrap().row(0);
        let f = row.iter().filter(|&&s| s == 1).count() as f64 / row.len() as f64;
        let se = (0.25 / row.len() as f64).sqrt();
        assert!((f - 0.5).abs() < 5.0 * se);
    }

    #[test]
    fn dyson_conformal_first_coordinate() {
        let (_, p) = dyson::build(2.0).unwrap();
        let m = conformal_measure(&p.inverse(), 10).unwrap();
        let n = 100_000;
        let batch = sample(&m, n, 1, 3).unwrap();
        let hits = (0..n).filter(|&i| batch.row(i)[0] == 1).count() as f64 / n as f64;
        let expect = 1f64.exp() / (2.0 * 1f64.cosh());
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((hits - expect).abs() < 5.0 * se, "{hits} vs {expect}");
    }

    #[test]
    fn cylinder_frequencies() {
        let (_, p) = dyson::build(1.8).unwrap();
        let m = eigen_measure(&p, 8).unwrap();
        let n = 100_000;
        let batch = sample(&m, n, 4, 11).unwrap();
        let mut counts = [0usize; 16];
        for i in 0..n {
            let r = batch.row(i);
            counts[r[0] + 2 * r[1] + 4 * r[2] + 8 * r[3]] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            let w: Vec<usize> = (0..4).map(|i| (c >> i) & 1).collect();
            let q = m.log_cylinder(&w).exp();
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!((count as f64 / n as f64 - q).abs() < 5.0 * se, "{w:?}");
        }
    }

    #[test]
    fn constant_potential_has_no_drift() {
        let p = ProductPotential::constant(Alphabet::signed_binary(), 0.0).unwrap();
        let m = eigen_measure(&p, 4).unwrap();
        let c = drift_probe(&p, &sample(&m, 50, 30, 0).unwrap(), Target::H, &[0, 10, 30]).unwrap();
        assert!(c
            .rows
            .iter()
            .all(|r| r.q05 == 0.0 && r.q95 == 0.0 && r.mean == 0.0));
    }

    #[test]
    fn ratios_reproduce_equilibrium() {
        let (_, p) = dyson::build(1.8).unwrap();
        let mu = eigen_measure(&p, 10).unwrap();
        let eq = equilibrium_state(&p).unwrap();
        let words = vec![vec![1, 1, 0], vec![0], vec![1, 0, 1, 1, 0, 0]];
        for r in cylinder_rn_ratios(&p, &words).unwrap() {
            let lhs = (r.log_ratio + mu.log_cylinder(&r.word)).exp();
            let rhs = eq.log_cylinder(&r.word).exp();
            assert!((lhs - rhs).abs() < 1e-12, "{:?}", r.word);
        }
    }

    #[test]
    fn oscillation_guard_and_witness() {
        let (_, p) = dyson::build(2.5).unwrap();
        assert!(matches!(
            oscillation_probe(&p, &[1], 1.0, 10, 10, 0),
            Err(Error::Regime(_))
        ));
        let (_, p) = dyson::build(1.8).unwrap();
        let w = oscillation_probe(&p, &[1], 3.0, 2000, 2000, 4).unwrap();
        assert!(w.plus.run_value >= 3.0 && w.minus.run_value <= -3.0);
        assert!(w.plus.fraction > 0.0 && w.minus.fraction > 0.0);
    }
}
