use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, SignedLog};
use crate::spectral::ProductMeasure;
use serde::Serialize;

/// Largest table a cylinder function may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// A function of the first `depth` coordinates, tabulated over `A^depth`.
///
/// Cell index is `Σ_i x_i · k^{i-1}`, so `x₁` is the least significant digit; prepending a
/// symbol `a` maps index `j` to `a + k·j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderFunction {
    arity: usize,
    depth: usize,
    values: Vec<SignedLog>,
}

pub(crate) fn table_size(arity: usize, depth: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..depth {
        n = n
            .checked_mul(arity)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or(Error::TooLarge(usize::MAX))?;
    }
    Ok(n)
}

/// Symbols of cell `index`, `x₁` first.
pub fn decode(mut index: usize, arity: usize, depth: usize) -> Vec<usize> {
    let mut x = Vec::with_capacity(depth);
    for _ in 0..depth {
        x.push(index % arity);
        index /= arity;
    }
    x
}

/// Cell index of the first `depth` symbols of `x`.
pub fn encode(x: &[usize], arity: usize, depth: usize) -> usize {
    x[..depth].iter().rev().fold(0, |acc, &a| acc * arity + a)
}

/// `log ∏_{i≤depth} m_i(x_i)` for every cell of `A^depth`.
pub(crate) fn log_weight_table(m: &ProductMeasure, depth: usize) -> Result<Vec<f64>> {
    let k = m.alphabet().len();
    table_size(k, depth)?;
    let mut table = vec![0.0];
    for i in 1..=depth {
        let row = m.log_row(i);
        let mut next = Vec::with_capacity(table.len() * k);
        for lw in row {
            next.extend(table.iter().map(|t| t + lw));
        }
        table = next;
    }
    Ok(table)
}

impl CylinderFunction {
    pub fn new(arity: usize, depth: usize, values: Vec<SignedLog>) -> Result<Self> {
        let n = table_size(arity, depth)?;
        if values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        Ok(CylinderFunction {
            arity,
            depth,
            values,
        })
    }

    pub fn from_values(arity: usize, depth: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            arity,
            depth,
            values.iter().map(|&v| SignedLog::from_f64(v)).collect(),
        )
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        CylinderFunction {
            arity,
            depth: 0,
            values: vec![SignedLog::from_f64(c)],
        }
    }

    pub fn zero(arity: usize) -> Self {
        Self::constant(arity, 0.0)
    }

    pub fn from_fn(arity: usize, depth: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let n = table_size(arity, depth)?;
        let values = (0..n)
            .map(|i| SignedLog::from_f64(f(&decode(i, arity, depth))))
            .collect();
        Ok(CylinderFunction {
            arity,
            depth,
            values,
        })
    }

    /// Indicator of the cylinder `[w₁…wₙ]`.
    pub fn indicator(arity: usize, word: &[usize]) -> Result<Self> {
        let n = table_size(arity, word.len())?;
        let hit = encode(word, arity, word.len());
        let values = (0..n)
            .map(|i| {
                if i == hit {
                    SignedLog::ONE
                } else {
                    SignedLog::ZERO
                }
            })
            .collect();
        Ok(CylinderFunction {
            arity,
            depth: word.len(),
            values,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[SignedLog] {
        &self.values
    }

    pub fn get(&self, index: usize) -> SignedLog {
        self.values[index]
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    /// Value at a sequence with at least `depth` symbols.
    pub fn eval(&self, x: &[usize]) -> SignedLog {
        self.values[encode(x, self.arity, self.depth)]
    }

    /// Same function tabulated at a larger depth.
    pub fn lift(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::InvalidArgument(
                "cannot lift to a smaller depth".into(),
            ));
        }
        let n = table_size(self.arity, depth)?;
        let base = self.values.len();
        let values = (0..n).map(|i| self.values[i % base]).collect();
        Ok(CylinderFunction {
            arity: self.arity,
            depth,
            values,
        })
    }

    /// `a·f + b·g` at the common depth.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        if f.arity != g.arity {
            return Err(Error::InvalidArgument("arity mismatch".into()));
        }
        let depth = f.depth.max(g.depth);
        let (f, g) = (f.lift(depth)?, g.lift(depth)?);
        let (sa, sb) = (SignedLog::from_f64(a), SignedLog::from_f64(b));
        let values = f
            .values
            .iter()
            .zip(&g.values)
            .map(|(x, y)| sa * *x + sb * *y)
            .collect();
        Ok(CylinderFunction {
            arity: f.arity,
            depth,
            values,
        })
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let c = SignedLog::from_f64(c);
        CylinderFunction {
            arity: self.arity,
            depth: self.depth,
            values: self.values.iter().map(|v| *v + c).collect(),
        }
    }

    /// `log sup |f|`.
    pub fn log_sup_norm(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| !v.is_zero())
            .fold(f64::NEG_INFINITY, |m, v| m.max(v.log_abs))
    }

    /// `∫ f dm`.
    pub fn integrate(&self, m: &ProductMeasure) -> Result<SignedLog> {
        let w = log_weight_table(m, self.depth)?;
        Ok(self
            .values
            .iter()
            .zip(&w)
            .map(|(v, lw)| v.scale_log(*lw))
            .sum())
    }

    /// `log ‖f‖_{L^p(m)}`.
    pub fn log_lp_norm(&self, m: &ProductMeasure, p: f64) -> Result<f64> {
        let w = log_weight_table(m, self.depth)?;
        let s = log_sum_exp(
            self.values
                .iter()
                .zip(&w)
                .filter(|(v, _)| !v.is_zero())
                .map(|(v, lw)| p * v.log_abs + lw),
        );
        Ok(s / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Alphabet;

    #[test]
    fn index_convention() {
        assert_eq!(encode(&[1, 0, 2], 3, 3), 1 + 2 * 9);
        assert_eq!(decode(19, 3, 3), vec![1, 0, 2]);
        let f = CylinderFunction::indicator(2, &[1, 0]).unwrap();
        assert_eq!(f.eval(&[1, 0, 1]).to_f64(), 1.0);
        assert_eq!(f.eval(&[0, 1]).to_f64(), 0.0);
    }

    #[test]
    fn lift_and_combine() {
        let f = CylinderFunction::from_values(2, 1, &[1.0, -2.0]).unwrap();
        let g = CylinderFunction::constant(2, 3.0);
        let h = CylinderFunction::combine(2.0, &f, -1.0, &g).unwrap();
        let v = h.to_f64s();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] + 7.0).abs() < 1e-14);
        let l = f.lift(2).unwrap();
        assert_eq!(l.to_f64s(), vec![1.0, -2.0, 1.0, -2.0]);
    }

    #[test]
    fn integrate_under_uniform() {
        let u = ProductMeasure::uniform(Alphabet::signed_binary());
        let f = CylinderFunction::from_values(2, 2, &[1.0, 2.0, 3.0, -4.0]).unwrap();
        assert!((f.integrate(&u).unwrap().to_f64() - 0.5).abs() < 1e-15);
        let n1 = f.log_lp_norm(&u, 1.0).unwrap().exp();
        assert!((n1 - 2.5).abs() < 1e-14);
    }

    #[test]
    fn size_limit() {
        assert!(CylinderFunction::from_fn(4, 20, |_| 1.0).is_err());
    }
}
