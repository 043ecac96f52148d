//! Product-type potentials `g(x) = g₀ ∏ gₙ(xₙ)` stored as log factors with certified tail bounds.

use crate::dyson::DysonFamily;
use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, Interval};
use crate::zeta::power_sum_from;
use serde::{Deserialize, Serialize};

/// Ordered set of distinct symbol labels; symbols are addressed by dense index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = labels.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidPotential(
                "alphabet needs at least two symbols".into(),
            ));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidPotential(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// The alphabet `{-1, 1}` of the Dyson family.
    pub fn signed_binary() -> Self {
        Alphabet {
            symbols: vec!["-1".into(), "1".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    /// Parses a word written as labels separated by commas or whitespace.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                self.index_of(t)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown symbol `{t}`")))
            })
            .collect()
    }

    pub fn format_word(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&a| self.label(a))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Bound `C · max(n, K, 1)^{-exponent}` on the sup-norm tail of an unknown remainder beyond depth `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTail {
    pub constant: f64,
    pub exponent: f64,
}

impl PowerLawTail {
    fn at(&self, n: usize, start: usize) -> f64 {
        if self.constant == 0.0 {
            return 0.0;
        }
        self.constant * (n.max(start).max(1) as f64).powf(-self.exponent)
    }
}

/// Certified upper decay class of `B(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TailDecay {
    /// `B(n) = 0` for `n ≥ from`.
    Vanishing { from: usize },
    /// `B(n) ≤ constant · n^{-exponent}` for `n ≥ from`.
    PowerLaw {
        constant: f64,
        exponent: f64,
        from: usize,
    },
}

/// Certified lower bound `constant · n^{-exponent}` (n ≥ 1) on `s_n`, on `sup_a |Σ_{k>n} log g_k(a)|`
/// and on `Σ_{k>n} ‖log g_k‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFloor {
    pub constant: f64,
    pub exponent: f64,
}

/// Construction tag of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// Explicit table, `log gₙ ≡ 0` beyond the table.
    FiniteDepth,
    /// Explicit table plus a balanced remainder known only through a power-law bound.
    Table,
    /// Closed-form Dyson family `log gₙ(x) = c·x·n^{-γ}`.
    Dyson,
}

#[derive(Clone, Debug)]
struct TableFactors {
    rows: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
    suffix: Vec<Vec<f64>>,
    norm_suffix: Vec<f64>,
    remainder: Option<PowerLawTail>,
}

impl TableFactors {
    fn new(rows: Vec<Vec<f64>>, k: usize, remainder: Option<PowerLawTail>) -> Self {
        let depth = rows.len();
        let mut prefix = vec![vec![0.0; k]; depth + 1];
        for n in 1..=depth {
            for a in 0..k {
                prefix[n][a] = prefix[n - 1][a] + rows[n - 1][a];
            }
        }
        let mut suffix = vec![vec![0.0; k]; depth + 1];
        let mut norm_suffix = vec![0.0; depth + 1];
        for n in (0..depth).rev() {
            for a in 0..k {
                suffix[n][a] = rows[n][a] + suffix[n + 1][a];
            }
            let norm = rows[n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            norm_suffix[n] = norm + norm_suffix[n + 1];
        }
        TableFactors {
            rows,
            prefix,
            suffix,
            norm_suffix,
            remainder,
        }
    }

    fn depth(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug)]
enum Factors {
    Table(TableFactors),
    Dyson(DysonFamily),
}

/// A product-type potential on the full shift over a finite alphabet.
#[derive(Clone, Debug)]
pub struct ProductPotential {
    alphabet: Alphabet,
    log_g0: f64,
    factors: Factors,
}

fn check_rows(alphabet: &Alphabet, rows: &[Vec<f64>]) -> Result<()> {
    for (n, row) in rows.iter().enumerate() {
        if row.len() != alphabet.len() {
            return Err(Error::InvalidPotential(format!(
                "factor row {} has {} entries, alphabet has {}",
                n + 1,
                row.len(),
                alphabet.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "factor row {} has non-finite value {v}",
                n + 1
            )));
        }
    }
    Ok(())
}

impl ProductPotential {
    /// Depth-`K` potential: `rows[n-1][a] = log gₙ(a)` and `log gₙ ≡ 0` for `n > K`.
    pub fn finite_depth(alphabet: Alphabet, log_g0: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&alphabet, &rows)?;
        if !log_g0.is_finite() {
            return Err(Error::InvalidPotential("log_g0 must be finite".into()));
        }
        let k = alphabet.len();
        Ok(ProductPotential {
            alphabet,
            log_g0,
            factors: Factors::Table(TableFactors::new(rows, k, None)),
        })
    }

    /// Explicit rows followed by an unknown balanced remainder with `Σ_{k>n} ‖log r_k‖ ≤ tail`.
    pub fn table(
        alphabet: Alphabet,
        log_g0: f64,
        rows: Vec<Vec<f64>>,
        tail: PowerLawTail,
    ) -> Result<Self> {
        check_rows(&alphabet, &rows)?;
        if !log_g0.is_finite() {
            return Err(Error::InvalidPotential("log_g0 must be finite".into()));
        }
        if !(tail.constant >= 0.0 && tail.constant.is_finite()) {
            return Err(Error::InvalidPotential(
                "tail constant must be finite and non-negative".into(),
            ));
        }
        if !(tail.exponent > 0.0 && tail.exponent.is_finite()) {
            return Err(Error::InvalidPotential(
                "tail exponent must be positive for an l1-bounded tail".into(),
            ));
        }
        let k = alphabet.len();
        Ok(ProductPotential {
            alphabet,
            log_g0,
            factors: Factors::Table(TableFactors::new(rows, k, Some(tail))),
        })
    }

    /// Constant potential `g ≡ e^{log_g0}`.
    pub fn constant(alphabet: Alphabet, log_g0: f64) -> Result<Self> {
        Self::finite_depth(alphabet, log_g0, Vec::new())
    }

    pub(crate) fn from_dyson(family: DysonFamily, log_g0: f64) -> Self {
        ProductPotential {
            alphabet: Alphabet::signed_binary(),
            log_g0,
            factors: Factors::Dyson(family),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn arity(&self) -> usize {
        self.alphabet.len()
    }

    pub fn log_g0(&self) -> f64 {
        self.log_g0
    }

    pub fn kind(&self) -> PotentialKind {
        match &self.factors {
            Factors::Table(t) if t.remainder.is_none() => PotentialKind::FiniteDepth,
            Factors::Table(_) => PotentialKind::Table,
            Factors::Dyson(_) => PotentialKind::Dyson,
        }
    }

    /// `finite-depth(K)` or `closed-form`.
    pub fn kind_tag(&self) -> String {
        match (&self.factors, self.depth()) {
            (_, Some(k)) => format!("finite-depth({k})"),
            (Factors::Table(t), None) => format!("table({})", t.depth()),
            (Factors::Dyson(_), None) => "closed-form".into(),
        }
    }

    /// Exact depth `K` for finite-depth potentials.
    pub fn depth(&self) -> Option<usize> {
        match &self.factors {
            Factors::Table(t) if t.remainder.is_none() => Some(t.depth()),
            _ => None,
        }
    }

    /// Number of explicitly stored factor rows.
    pub fn explicit_depth(&self) -> Option<usize> {
        match &self.factors {
            Factors::Table(t) => Some(t.depth()),
            Factors::Dyson(_) => None,
        }
    }

    pub fn dyson_family(&self) -> Option<&DysonFamily> {
        match &self.factors {
            Factors::Dyson(d) => Some(d),
            Factors::Table(_) => None,
        }
    }

    pub fn remainder(&self) -> Option<PowerLawTail> {
        match &self.factors {
            Factors::Table(t) => t.remainder,
            Factors::Dyson(_) => None,
        }
    }

    /// `log gₙ(a)` for `n ≥ 1`.
    pub fn log_factor(&self, n: usize, a: usize) -> f64 {
        debug_assert!(n >= 1);
        match &self.factors {
            Factors::Table(t) => t.rows.get(n - 1).map_or(0.0, |r| r[a]),
            Factors::Dyson(d) => d.log_factor(n as u64, a),
        }
    }

    /// `Σ_{k>n} log g_k(a)`, i.e. `log h_n(a)` on a balanced form.
    pub fn tail_sum(&self, n: usize, a: usize) -> f64 {
        match &self.factors {
            Factors::Table(t) => t.suffix.get(n).map_or(0.0, |s| s[a]),
            Factors::Dyson(d) => d.tail_sum(n as u64, a),
        }
    }

    /// `Σ_{k≤n} log g_k(a)`.
    pub fn partial_sum(&self, n: usize, a: usize) -> f64 {
        match &self.factors {
            Factors::Table(t) => t.prefix[n.min(t.depth())][a],
            Factors::Dyson(d) => d.partial_sum(n as u64, a),
        }
    }

    /// `Σ_k log g_k(a)`.
    pub fn total(&self, a: usize) -> f64 {
        self.tail_sum(0, a)
    }

    /// Certified `B(n) ≥ Σ_{k>n} ‖log g_k‖_∞`, nonincreasing, zero beyond a finite depth.
    pub fn tail_bound(&self, n: usize) -> f64 {
        match &self.factors {
            Factors::Table(t) => {
                let explicit = t.norm_suffix[n.min(t.depth())] * (1.0 + 1e-14);
                explicit + t.remainder.map_or(0.0, |r| r.at(n, t.depth()))
            }
            Factors::Dyson(d) => d.tail_bound(n as u64),
        }
    }

    /// Bound on the error of the computed `tail_sum(n, ·)` and `total(·)` values.
    pub fn tail_uncertainty(&self, n: usize) -> f64 {
        match &self.factors {
            Factors::Table(t) => t.remainder.map_or(0.0, |r| r.at(n, t.depth())),
            Factors::Dyson(d) => d.tail_uncertainty(n as u64),
        }
    }

    /// Upper bound on `sup log g`.
    pub fn log_sup(&self) -> f64 {
        self.log_g0 + self.sup_sum(1.0)
    }

    /// Lower bound on `inf log g`.
    pub fn log_inf(&self) -> f64 {
        self.log_g0 - self.sup_sum(-1.0)
    }

    fn sup_sum(&self, sign: f64) -> f64 {
        match &self.factors {
            Factors::Table(t) => {
                let explicit: f64 = t
                    .rows
                    .iter()
                    .map(|r| r.iter().fold(f64::NEG_INFINITY, |m, v| m.max(sign * v)))
                    .sum();
                explicit + self.tail_uncertainty(0)
            }
            Factors::Dyson(d) => d.coeff().abs() * d.zeta() + d.tail_uncertainty(0),
        }
    }

    /// `log gₙ(·)` rows for `n = 1..=n_max`.
    pub fn factor_rows(&self, n_max: usize) -> Vec<Vec<f64>> {
        (1..=n_max)
            .map(|n| (0..self.arity()).map(|a| self.log_factor(n, a)).collect())
            .collect()
    }

    /// Potential with every log factor multiplied by `t`, i.e. `g^t`.
    pub fn scaled(&self, t: f64) -> Self {
        let factors = match &self.factors {
            Factors::Table(tab) => {
                let rows = tab
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|v| v * t).collect())
                    .collect();
                let rem = tab.remainder.map(|r| PowerLawTail {
                    constant: r.constant * t.abs(),
                    exponent: r.exponent,
                });
                Factors::Table(TableFactors::new(rows, self.arity(), rem))
            }
            Factors::Dyson(d) => Factors::Dyson(d.scaled(t)),
        };
        ProductPotential {
            alphabet: self.alphabet.clone(),
            log_g0: self.log_g0 * t,
            factors,
        }
    }

    /// The potential `1/g`.
    pub fn inverse(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Balanced form: per-depth means subtracted and accumulated into `log g₀`.
    pub fn balance(&self) -> Self {
        match &self.factors {
            Factors::Dyson(_) => self.clone(),
            Factors::Table(tab) => {
                let k = self.arity() as f64;
                let mut shift = CompensatedSum::new();
                shift.add(self.log_g0);
                let rows = tab
                    .rows
                    .iter()
                    .map(|r| {
                        let mean = r.iter().sum::<f64>() / k;
                        shift.add(mean);
                        r.iter().map(|v| v - mean).collect()
                    })
                    .collect();
                ProductPotential {
                    alphabet: self.alphabet.clone(),
                    log_g0: shift.value(),
                    factors: Factors::Table(TableFactors::new(rows, self.arity(), tab.remainder)),
                }
            }
        }
    }

    /// Whether `Σ_a log gₙ(a) = 0` for every stored depth (within `1e-12` absolute).
    pub fn is_balanced(&self) -> bool {
        match &self.factors {
            Factors::Dyson(d) => d.is_balanced(),
            Factors::Table(t) => t.rows.iter().all(|r| r.iter().sum::<f64>().abs() <= 1e-12),
        }
    }

    /// `log g₀ + Σ_{n≤depth} log gₙ(xₙ)` with error bound `B(depth)`.
    pub fn evaluate_log_g(&self, x: &[usize], depth: usize) -> Result<(f64, f64)> {
        if depth < 1 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        if x.len() < depth {
            return Err(Error::PrefixTooShort {
                needed: depth,
                got: x.len(),
            });
        }
        let bound = self.tail_bound(depth);
        if !bound.is_finite() {
            return Err(Error::TailUnbounded(depth));
        }
        let mut acc = CompensatedSum::new();
        acc.add(self.log_g0);
        for (i, &a) in x[..depth].iter().enumerate() {
            acc.add(self.log_factor(i + 1, a));
        }
        Ok((acc.value(), bound))
    }

    /// Certified upper decay class of `B(n)`.
    pub fn upper_decay(&self) -> TailDecay {
        match &self.factors {
            Factors::Table(t) => match t.remainder {
                None => TailDecay::Vanishing { from: t.depth() },
                Some(r) if r.constant == 0.0 => TailDecay::Vanishing { from: t.depth() },
                Some(r) => TailDecay::PowerLaw {
                    constant: r.constant,
                    exponent: r.exponent,
                    from: t.depth().max(1),
                },
            },
            Factors::Dyson(d) => d.upper_decay(),
        }
    }

    /// Certified lower decay class, available for closed-form families only.
    pub fn floor(&self) -> Option<TailFloor> {
        match &self.factors {
            Factors::Table(_) => None,
            Factors::Dyson(d) => d.floor(),
        }
    }

    /// Certified upper bound on `Σ_{n>j} B(n)^q`; infinite when not certifiable.
    pub fn sum_tail_bounds(&self, j: usize, q: f64) -> f64 {
        let (from, power) = match self.upper_decay() {
            TailDecay::Vanishing { from } => (from, None),
            TailDecay::PowerLaw {
                constant,
                exponent,
                from,
            } => (from, Some((constant, exponent))),
        };
        let mut acc = CompensatedSum::new();
        for n in j + 1..from {
            acc.add(self.tail_bound(n).powf(q));
        }
        if let Some((c, e)) = power {
            let start = (j + 1).max(from) as u64;
            acc.add(c.powf(q) * power_sum_from(start, e * q).hi);
        }
        acc.value()
    }

    /// Smallest `n ∈ [1, cap]` with `B(n) ≤ tol`.
    pub fn depth_for_tol(&self, tol: f64, cap: usize) -> Option<usize> {
        if self.tail_bound(cap) > tol {
            return None;
        }
        let (mut lo, mut hi) = (1usize, cap.max(1));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.tail_bound(mid) <= tol {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// Oscillations `vₙ` and tail sums `sₙ` of a potential.
#[derive(Clone, Debug, Serialize)]
pub struct VariationStats {
    /// `v[n-1] = max_a log gₙ(a) − min_a log gₙ(a)`.
    pub v: Vec<f64>,
    /// `s[n-1]` encloses `Σ_{k>n} v_k`.
    pub s: Vec<Interval>,
}

/// Exact `vₙ` for `n ≤ n_max`; `sₙ` as `[explicit sum, explicit sum + 2·B(n_max)]`.
pub fn variation_stats(p: &ProductPotential, n_max: usize) -> VariationStats {
    let v: Vec<f64> = (1..=n_max)
        .map(|n| {
            let (lo, hi) =
                (0..p.arity()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                    let x = p.log_factor(n, a);
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        })
        .collect();
    let slack = 2.0 * p.tail_bound(n_max);
    let mut s = vec![Interval::point(0.0); n_max];
    let mut acc = CompensatedSum::new();
    for n in (1..=n_max).rev() {
        s[n - 1] = Interval::new(acc.value(), acc.value() + slack);
        acc.add(v[n - 1]);
    }
    VariationStats { v, s }
}

/// Three-valued verdict of a sufficient condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// Certified sums backing the verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityWitness {
    /// Upper bound on `Σ_{n≥1} sₙ`.
    pub variation_sum: f64,
    /// Upper bound on `Σ_{m≥2} Σ_{n≥m} vₙ`.
    pub bowen_sum: f64,
    /// Upper bound on `Σ_{i≥1} sup_a (Σ_{j≥i} log g_j(a))²`.
    pub l2_sum: f64,
    /// Upper bound on `Σ_{i≥0} Σ_{k≥i} log max(‖g_k‖, ‖g_k^{-1}‖)`.
    pub uniqueness_sum: f64,
    pub tail_decay: TailDecay,
    pub tail_floor: Option<TailFloor>,
    /// Description of the divergence argument when some verdict fails.
    pub divergence: Option<String>,
}

/// Regularity classification of a potential, computed on its balanced form.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub depth_budget: usize,
    pub v: Vec<f64>,
    pub s: Vec<Interval>,
    pub summable_variation: Verdict,
    pub bowen_walters: Verdict,
    /// Smallest index within the budget whose Bowen sum is certified finite.
    pub bowen_index: Option<usize>,
    pub yuri: Verdict,
    pub l1_bounded: Verdict,
    pub summable: Verdict,
    /// The potential admits a balanced form.
    pub balanced: Verdict,
    /// The potential was supplied in balanced form.
    pub input_balanced: bool,
    pub l2_tails: Verdict,
    pub l2_index: Option<usize>,
    pub uniqueness_condition: Verdict,
    pub witness: RegularityWitness,
}

/// Classifies regularity from certified tail bounds; `depth_budget ≥ 2` explicit terms.
pub fn classify_regularity(p: &ProductPotential, depth_budget: usize) -> Result<RegularityReport> {
    if depth_budget < 2 {
        return Err(Error::InvalidArgument(
            "depth_budget must be at least 2".into(),
        ));
    }
    let input_balanced = p.is_balanced();
    let b = p.balance();
    let stats = variation_stats(&b, depth_budget);
    let floor = b.floor();
    let decay = b.upper_decay();
    let l1 = b.tail_bound(0).is_finite();

    // Σ sₙ and Bowen sums: explicit part from intervals, remainder from sₙ + vₙ ≤ 2B(n−1).
    let tail_after = b.tail_bound(depth_budget) + b.sum_tail_bounds(depth_budget, 1.0);
    let variation_sum =
        compensated(stats.s.iter().map(|s| s.hi)) + 2.0 * b.sum_tail_bounds(depth_budget, 1.0);
    let bowen_sum = compensated((2..=depth_budget).map(|m| stats.v[m - 1] + stats.s[m - 1].hi))
        + 2.0 * tail_after;

    let sup_tail = |n: usize| {
        (0..b.arity()).fold(0.0f64, |m, a| m.max(b.tail_sum(n, a).abs())) + b.tail_uncertainty(n)
    };
    let l2_sum = compensated((0..=depth_budget).map(|n| sup_tail(n).powi(2)))
        + b.sum_tail_bounds(depth_budget, 2.0);
    let uniqueness_sum = b.log_g0().abs()
        + b.tail_bound(0)
        + compensated((0..=depth_budget).map(|n| b.tail_bound(n)))
        + b.sum_tail_bounds(depth_budget, 1.0);

    let diverges = |q: f64| floor.is_some_and(|f| f.exponent * q <= 1.0);
    let verdict = |sum: f64, q: f64| {
        if sum.is_finite() {
            Verdict::Holds
        } else if diverges(q) {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    };
    let summable_variation = verdict(variation_sum, 1.0);
    let bowen_walters = verdict(bowen_sum, 1.0);
    let l2_tails = verdict(l2_sum, 2.0);
    let uniqueness_condition = verdict(uniqueness_sum, 1.0);
    let yuri = match decay {
        TailDecay::Vanishing { .. } => Verdict::Holds,
        TailDecay::PowerLaw { exponent, .. } if exponent > 0.0 => Verdict::Holds,
        TailDecay::PowerLaw { .. } => Verdict::Inconclusive,
    };
    let l1_bounded = if l1 {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let divergence = floor.filter(|f| f.exponent <= 1.0).map(|f| {
        format!(
            "s_n >= {:.6e} n^-{:.6} with exponent <= 1{}",
            f.constant,
            f.exponent,
            if f.exponent <= 0.5 {
                ", squared tails also diverge"
            } else {
                ""
            }
        )
    });

    Ok(RegularityReport {
        depth_budget,
        v: stats.v,
        s: stats.s,
        summable_variation,
        bowen_walters,
        bowen_index: bowen_walters.holds().then_some(1),
        yuri,
        l1_bounded,
        summable: Verdict::Holds,
        balanced: l1_bounded,
        input_balanced,
        l2_tails,
        l2_index: l2_tails.holds().then_some(1),
        uniqueness_condition,
        witness: RegularityWitness {
            variation_sum,
            bowen_sum,
            l2_sum,
            uniqueness_sum,
            tail_decay: decay,
            tail_floor: floor,
            divergence,
        },
    })
}

fn compensated<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    crate::numeric::compensated_sum(it)
}
