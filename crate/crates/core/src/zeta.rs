//! Power-law tail sums `Σ_{j>n} j^{-s}` with certified Euler–Maclaurin error.

use crate::numeric::{CompensatedSum, Interval};

/// Below this index tails are obtained by explicit summation down from it.
pub const EM_START: u64 = 32;

/// `B_{2k} / (2k)!` for `k = 1..=6`.
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
];

/// Rising factorial `(s)_m`.
fn rising(s: f64, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (s + f64::from(i)))
}

fn em_tail(s: f64, n: u64) -> f64 {
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    let ns = nf.powf(-s);
    acc.add(-0.5 * ns);
    let mut pow = ns / nf;
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let m = 2 * k as u32 + 1;
        acc.add(c * rising(s, m) * pow);
        pow /= nf * nf;
    }
    acc.value()
}

/// Bound on the truncation error of the Euler–Maclaurin expansion at `n ≥ EM_START`.
pub fn em_remainder_bound(s: f64, n: u64) -> f64 {
    let nf = n.max(EM_START) as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    4.0 * rising(s, 11) * nf.powf(-s - 11.0) / two_pi.powi(12)
}

/// `Σ_{j>n} j^{-s}` for `s > 1`.
pub fn power_tail(s: f64, n: u64) -> f64 {
    assert!(s > 1.0, "power_tail requires s > 1");
    if n >= EM_START {
        return em_tail(s, n);
    }
    let mut acc = CompensatedSum::new();
    acc.add(em_tail(s, EM_START));
    for j in (n + 1..=EM_START).rev() {
        acc.add((j as f64).powf(-s));
    }
    acc.value()
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    power_tail(s, 0)
}

/// Enclosure of `Σ_{k≥m} k^{-p}` for `m ≥ 1`; infinite when `p ≤ 1`.
pub fn power_sum_from(m: u64, p: f64) -> Interval {
    let m = m.max(1) as f64;
    if p <= 1.0 {
        return Interval::new(f64::INFINITY, f64::INFINITY);
    }
    let integral = m.powf(1.0 - p) / (p - 1.0);
    Interval::new(integral, integral + m.powf(-p))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        let cases = [
            (1.2, 5.591_582_441_177_750_776_5),
            (1.6, 2.285_765_665_680_129_876_6),
            (2.0, 1.644_934_066_848_226_436_5),
            (2.5, 1.341_487_257_250_917_179_8),
            (3.0, 1.202_056_903_159_594_285_4),
        ];
        for (s, z) in cases {
            assert!(
                (zeta(s) - z).abs() <= 1e-14 * z,
                "s={s}: {} vs {z}",
                zeta(s)
            );
        }
    }

    #[test]
    fn tails_at_1_8() {
        let cases = [
            (1, 0.882_229_618_102_822_046_67),
            (10, 0.190_424_498_250_824_456_29),
            (100, 0.031_273_362_848_577_823_749),
            (1000, 0.004_974_349_693_226_598_082_2),
            (100_000, 0.000_124_999_500_001_5),
        ];
        for (n, t) in cases {
            let v = power_tail(1.8, n);
            assert!((v - t).abs() <= 1e-14 * t, "n={n}: {v} vs {t}");
        }
    }

    #[test]
    fn recursion_holds_across_switch() {
        for s in [1.1, 1.5, 2.0, 3.0, 4.5] {
            for n in 1..200u64 {
                let d = power_tail(s, n - 1) - power_tail(s, n);
                assert!((d - (n as f64).powf(-s)).abs() <= 1e-14, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn remainder_is_negligible() {
        assert!(em_remainder_bound(1.2, EM_START) < 1e-19);
        assert!(em_remainder_bound(3.0, EM_START) < 1e-20);
    }

    #[test]
    fn power_sum_enclosure() {
        let exact = power_tail(2.0, 9);
        assert!(power_sum_from(10, 2.0).contains(exact));
        assert!(power_sum_from(10, 1.0).lo.is_infinite());
    }
}
