//! The Dyson family `f(x) = c Σ xₙ n^{-γ}` on `{-1, 1}^ℕ`: closed forms and regime logic.

use crate::eigenfunction::{three_series_diagnostic, Drift, SeriesVerdict, Target};
use crate::error::{Error, Result};
use crate::numeric::{log_cosh, CompensatedSum, Interval};
use crate::potential::{classify_regularity, ProductPotential, TailDecay, TailFloor};
use crate::spectral::{eigen_measure, ProductMeasure};
use crate::zeta::{em_remainder_bound, power_sum_from, power_tail, EM_START};
use serde::Serialize;
use std::collections::BTreeMap;

/// Symbol index 0 is `-1`, index 1 is `+1`.
const SIGNS: [f64; 2] = [-1.0, 1.0];
/// Relative slack covering rounding in the computed tails.
const TAIL_SLACK: f64 = 1e-13;

/// Log factors `log gₙ(x) = c·x·n^{-γ}` with cached tails.
#[derive(Clone, Debug)]
pub struct DysonFamily {
    gamma: f64,
    coeff: f64,
    zeta: f64,
    head_tail: Vec<f64>,
    head_partial: Vec<f64>,
}

impl DysonFamily {
    pub fn new(gamma: f64, coeff: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidPotential(format!(
                "dyson gamma must be finite and > 1, got {gamma}"
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidPotential("dyson scale must be finite".into()));
        }
        let head_tail: Vec<f64> = (0..=EM_START).map(|n| power_tail(gamma, n)).collect();
        let mut acc = CompensatedSum::new();
        let head_partial: Vec<f64> = (0..=EM_START)
            .map(|n| {
                if n > 0 {
                    acc.add((n as f64).powf(-gamma));
                }
                acc.value()
            })
            .collect();
        Ok(DysonFamily {
            gamma,
            coeff,
            zeta: head_tail[0],
            head_tail,
            head_partial,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The scale `c`; `1` is `e^f`, `-1` is `e^{-f}`.
    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `αₙ = Σ_{j>n} j^{-γ}`.
    pub fn alpha(&self, n: u64) -> f64 {
        match self.head_tail.get(n as usize) {
            Some(&v) => v,
            None => power_tail(self.gamma, n),
        }
    }

    /// `Sₙ = Σ_{j≤n} j^{-γ}`.
    pub fn partial_zeta(&self, n: u64) -> f64 {
        match self.head_partial.get(n as usize) {
            Some(&v) => v,
            None => self.zeta - self.alpha(n),
        }
    }

    /// Sign `±1` attached to a symbol index.
    pub fn sign(&self, a: usize) -> f64 {
        SIGNS[a]
    }

    pub(crate) fn log_factor(&self, n: u64, a: usize) -> f64 {
        self.coeff * SIGNS[a] * (n as f64).powf(-self.gamma)
    }

    pub(crate) fn tail_sum(&self, n: u64, a: usize) -> f64 {
        self.coeff * SIGNS[a] * self.alpha(n)
    }

    pub(crate) fn partial_sum(&self, n: u64, a: usize) -> f64 {
        self.coeff * SIGNS[a] * self.partial_zeta(n)
    }

    pub(crate) fn tail_bound(&self, n: u64) -> f64 {
        self.coeff.abs() * (self.alpha(n) * (1.0 + TAIL_SLACK) + em_remainder_bound(self.gamma, n))
    }

    pub(crate) fn tail_uncertainty(&self, n: u64) -> f64 {
        self.coeff.abs() * (self.alpha(n) * TAIL_SLACK + em_remainder_bound(self.gamma, n))
    }

    pub(crate) fn is_balanced(&self) -> bool {
        true
    }

    pub(crate) fn scaled(&self, t: f64) -> Self {
        DysonFamily {
            coeff: self.coeff * t,
            ..self.clone()
        }
    }

    pub(crate) fn upper_decay(&self) -> TailDecay {
        if self.coeff == 0.0 {
            return TailDecay::Vanishing { from: 0 };
        }
        // αₙ ≤ n^{1-γ}/(γ-1) by integral comparison.
        TailDecay::PowerLaw {
            constant: self.coeff.abs() * (1.0 + 2.0 * TAIL_SLACK) / (self.gamma - 1.0),
            exponent: self.gamma - 1.0,
            from: 1,
        }
    }

    pub(crate) fn floor(&self) -> Option<TailFloor> {
        // αₙ ≥ (n+1)^{1-γ}/(γ-1) ≥ 2^{1-γ} n^{1-γ}/(γ-1) for n ≥ 1.
        (self.coeff != 0.0).then(|| TailFloor {
            constant: self.coeff.abs() * 2f64.powf(1.0 - self.gamma) / (self.gamma - 1.0)
                * (1.0 - TAIL_SLACK),
            exponent: self.gamma - 1.0,
        })
    }

    /// `Δ_j = cosh(c·S_j)/cosh(c·ζ)` in log form.
    pub fn log_delta(&self, j: u64) -> f64 {
        log_cosh(self.coeff * self.partial_zeta(j)) - log_cosh(self.coeff * self.zeta)
    }
}

/// Regime of the Dyson family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `γ > 2`.
    Bowen,
    /// `3/2 < γ ≤ 2`.
    L2Tails,
    /// `1 < γ ≤ 3/2`.
    Singular,
}

impl Regime {
    pub fn of(gamma: f64) -> Self {
        if gamma > 2.0 {
            Regime::Bowen
        } else if gamma > 1.5 {
            Regime::L2Tails
        } else {
            Regime::Singular
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Bowen => "bowen",
            Regime::L2Tails => "l2-tails",
            Regime::Singular => "singular",
        }
    }
}

/// A member of the Dyson family with certified `ζ(γ)` and `αₙ`.
#[derive(Clone, Debug)]
pub struct DysonPotential {
    family: DysonFamily,
    regime: Regime,
}

impl DysonPotential {
    pub fn gamma(&self) -> f64 {
        self.family.gamma
    }

    pub fn zeta(&self) -> f64 {
        self.family.zeta
    }

    /// Certified absolute error of `zeta()`.
    pub fn zeta_error(&self) -> f64 {
        self.family.zeta * 4.0 * f64::EPSILON + em_remainder_bound(self.family.gamma, EM_START)
    }

    pub fn alpha(&self, n: u64) -> f64 {
        self.family.alpha(n)
    }

    pub fn partial_zeta(&self, n: u64) -> f64 {
        self.family.partial_zeta(n)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn family(&self) -> &DysonFamily {
        &self.family
    }

    /// Orientation label: `e^f` for positive scale, `e^-f` otherwise.
    pub fn orientation(&self) -> &'static str {
        if self.family.coeff >= 0.0 {
            "e^f"
        } else {
            "e^-f"
        }
    }

    pub fn closed_forms(&self) -> ClosedForms<'_> {
        ClosedForms {
            family: &self.family,
        }
    }
}

/// `log gₙ(±1) = ±n^{-γ}`, the potential `e^f`.
pub fn build(gamma: f64) -> Result<(DysonPotential, ProductPotential)> {
    build_scaled(gamma, 1.0)
}

/// `log gₙ(±1) = ±c·n^{-γ}`; `c = -1` gives `e^{-f}`.
pub fn build_scaled(gamma: f64, scale: f64) -> Result<(DysonPotential, ProductPotential)> {
    let family = DysonFamily::new(gamma, scale)?;
    let p = ProductPotential::from_dyson(family.clone(), 0.0);
    Ok((
        DysonPotential {
            family,
            regime: Regime::of(gamma),
        },
        p,
    ))
}

/// Closed-form expressions for one orientation; the oracle for the generic code on this family.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForms<'a> {
    family: &'a DysonFamily,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl ClosedForms<'_> {
    fn c(&self) -> f64 {
        self.family.coeff
    }

    pub fn log_lambda(&self) -> f64 {
        std::f64::consts::LN_2 + log_cosh(self.c() * self.family.zeta)
    }

    /// Eigen measure weight `μ_i({1}) = e^{cS_i}/(2cosh cS_i)`.
    pub fn eigen_plus(&self, i: u64) -> f64 {
        logistic(2.0 * self.c() * self.family.partial_zeta(i))
    }

    /// Conformal measure weight `e^{-cS_i}/(2cosh cS_i)`.
    pub fn conformal_plus(&self, i: u64) -> f64 {
        logistic(-2.0 * self.c() * self.family.partial_zeta(i))
    }

    /// Equilibrium weight `e^{cζ}/(2cosh cζ)`.
    pub fn equilibrium_plus(&self) -> f64 {
        logistic(2.0 * self.c() * self.family.zeta)
    }

    /// `log h_i(±1) = ±c·α_i`.
    pub fn log_h(&self, i: u64, a: usize) -> f64 {
        self.c() * SIGNS[a] * self.family.alpha(i)
    }

    pub fn log_delta(&self, j: u64) -> f64 {
        self.family.log_delta(j)
    }

    /// Mean of `log h_i` under the eigen measure: `c·α_i·tanh(cS_i)`.
    pub fn mean_h_under_eigen(&self, i: u64) -> f64 {
        self.c() * self.family.alpha(i) * (self.c() * self.family.partial_zeta(i)).tanh()
    }

    /// Variance of `log h_i` under the eigen measure: `c²α_i²/cosh²(cS_i)`.
    pub fn var_h_under_eigen(&self, i: u64) -> f64 {
        let a = self.c() * self.family.alpha(i);
        let ch = (self.c() * self.family.partial_zeta(i)).cosh();
        a * a / (ch * ch)
    }

    /// Variance of `log h_i` under the uniform measure: `c²α_i²`.
    pub fn var_h_under_uniform(&self, i: u64) -> f64 {
        (self.c() * self.family.alpha(i)).powi(2)
    }

    /// Mean of the `h_μ` term under the uniform measure: `log Δ_j`.
    pub fn mean_h_mu_under_uniform(&self, j: u64) -> f64 {
        self.family.log_delta(j)
    }

    /// Mean of the `h_μ` term under the eigen measure.
    pub fn mean_h_mu_under_eigen(&self, j: u64) -> f64 {
        self.family.log_delta(j) + self.mean_h_under_eigen(j)
    }

    pub fn table(&self, n_max: u64) -> ClosedFormTable {
        ClosedFormTable {
            gamma: self.family.gamma,
            scale: self.c(),
            zeta: self.family.zeta,
            log_lambda: self.log_lambda(),
            equilibrium_plus: self.equilibrium_plus(),
            rows: (1..=n_max)
                .map(|i| ClosedFormRow {
                    i,
                    alpha: self.family.alpha(i),
                    partial_zeta: self.family.partial_zeta(i),
                    eigen_plus: self.eigen_plus(i),
                    conformal_plus: self.conformal_plus(i),
                    log_delta: self.log_delta(i),
                    mean_h_eigen: self.mean_h_under_eigen(i),
                    var_h_eigen: self.var_h_under_eigen(i),
                    var_h_uniform: self.var_h_under_uniform(i),
                })
                .collect(),
        }
    }
}

/// Serializable closed-form table.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormTable {
    pub gamma: f64,
    pub scale: f64,
    pub zeta: f64,
    pub log_lambda: f64,
    pub equilibrium_plus: f64,
    pub rows: Vec<ClosedFormRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormRow {
    pub i: u64,
    pub alpha: f64,
    pub partial_zeta: f64,
    pub eigen_plus: f64,
    pub conformal_plus: f64,
    pub log_delta: f64,
    pub mean_h_eigen: f64,
    pub var_h_eigen: f64,
    pub var_h_uniform: f64,
}

/// Which closed-form product measure a reference measure is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ReferenceProfile {
    Uniform,
    Eigen,
    Conformal,
    Equilibrium,
}

/// Identifies `reference` among the closed-form measures of `family` by its weights.
pub(crate) fn reference_profile(
    family: &DysonFamily,
    reference: &ProductMeasure,
) -> Option<ReferenceProfile> {
    if reference.alphabet().len() != 2 {
        return None;
    }
    let cf = ClosedForms { family };
    let c = family.coeff;
    let lim = logistic(2.0 * c * family.zeta);
    let check = |f: &dyn Fn(u64) -> f64, limit: f64| {
        let depth = reference.stored_depth().clamp(1, 64) as u64;
        (1..=depth).all(|j| (reference.weight(j as usize, 1) - f(j)).abs() <= 1e-10)
            && (reference.limit_weight(1) - limit).abs() <= 1e-10
    };
    let (uniform, equilibrium) = (|_| 0.5, |_| lim);
    let eigen = |j| cf.eigen_plus(j);
    let conformal = |j| cf.conformal_plus(j);
    type Profile<'a> = (ReferenceProfile, &'a dyn Fn(u64) -> f64, f64);
    let candidates: [Profile; 4] = [
        (ReferenceProfile::Uniform, &uniform, 0.5),
        (ReferenceProfile::Equilibrium, &equilibrium, lim),
        (ReferenceProfile::Eigen, &eigen, lim),
        (ReferenceProfile::Conformal, &conformal, 1.0 - lim),
    ];
    let found = candidates
        .iter()
        .find(|(_, f, l)| check(*f, *l))
        .map(|(p, _, _)| *p);
    found
}

/// Closed-form enclosures of `Σ_{j>J} m_j` and `Σ_{j>J} V_j`.
pub(crate) fn series_tails(
    family: &DysonFamily,
    profile: ReferenceProfile,
    target: Target,
    j_max: usize,
) -> (Interval, Interval) {
    let c = family.coeff;
    let g = family.gamma;
    let e = g - 1.0;
    let j = j_max as u64;
    if c == 0.0 {
        return (Interval::point(0.0), Interval::point(0.0));
    }
    // α_j ∈ [(j+1)^{-e}, j^{-e}]/e.
    let a_sum =
        Interval::new(power_sum_from(j + 2, e).lo, power_sum_from(j + 1, e).hi).scale(1.0 / e);
    let q_sum = Interval::new(
        power_sum_from(j + 2, 2.0 * e).lo,
        power_sum_from(j + 1, 2.0 * e).hi,
    )
    .scale(1.0 / (e * e));
    let th_lo = (c.abs() * family.partial_zeta(j + 1)).tanh();
    let th_hi = (c.abs() * family.zeta).tanh();
    let s = c.signum();
    let t = match profile {
        ReferenceProfile::Uniform => Interval::point(0.0),
        ReferenceProfile::Eigen => Interval::new(th_lo, th_hi).scale(s),
        ReferenceProfile::Conformal => Interval::new(th_lo, th_hi).scale(-s),
        ReferenceProfile::Equilibrium => Interval::point(th_hi * s),
    };
    let t_sq = Interval::new(
        if t.contains(0.0) {
            0.0
        } else {
            t.lo.abs().min(t.hi.abs()).powi(2)
        },
        t.lo.abs().max(t.hi.abs()).powi(2),
    );
    let var = q_sum.scale(c * c) * Interval::new(1.0 - t_sq.hi, 1.0 - t_sq.lo);
    let mean = match (target, profile) {
        (Target::H, _) => t.scale(c) * a_sum,
        (Target::HMu, ReferenceProfile::Eigen) => Interval::new(-0.5 * c * c * q_sum.hi, 0.0),
        (Target::HMu, _) => {
            // log Δ_j = -|c|·α_j·tanh(|c|ξ) for some ξ ∈ (S_j, ζ).
            let per_alpha = t.scale(c) + Interval::new(-c.abs() * th_hi, -c.abs() * th_lo);
            per_alpha * a_sum
        }
    };
    (mean, var)
}

/// Status of a regime claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimStatus {
    /// Backed by a certified sufficient condition.
    Certified,
    Yes,
    No,
    /// The sufficient condition is not met; no claim either way.
    NotCertified,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub status: ClaimStatus,
    pub evidence: Vec<String>,
}

/// Which regime claims hold at a given `γ`, with the operations that evidence each claim.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub gamma: f64,
    pub orientation: String,
    pub regime: Regime,
    pub zeta: f64,
    pub log_lambda: f64,
    pub claims: BTreeMap<String, Claim>,
}

const SERIES_DEPTH: usize = 10_000;

/// Builds the regime report from the classifier and the three-series diagnostics.
pub fn regime_report(d: &DysonPotential) -> Result<RegimeReport> {
    let p = ProductPotential::from_dyson(d.family.clone(), 0.0);
    let reg = classify_regularity(&p, 64)?;
    let mu = eigen_measure(&p, 64)?;
    let h_mu = three_series_diagnostic(&p, &mu, Target::HMu, SERIES_DEPTH)?;
    let h_eigen = three_series_diagnostic(&p, &mu, Target::H, SERIES_DEPTH)?;
    let ev = |ops: &[&str]| ops.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let yes_no = |b: bool| if b { ClaimStatus::Yes } else { ClaimStatus::No };
    let mut claims = BTreeMap::new();
    claims.insert(
        "unique_conformal".into(),
        Claim {
            status: if reg.uniqueness_condition.holds() {
                ClaimStatus::Certified
            } else {
                ClaimStatus::NotCertified
            },
            evidence: ev(&[
                "potential::classify_regularity",
                "spectral::conformal_measure",
            ]),
        },
    );
    claims.insert(
        "h_continuous".into(),
        Claim {
            status: if reg.bowen_walters.holds() {
                ClaimStatus::Certified
            } else {
                ClaimStatus::No
            },
            evidence: ev(&[
                "potential::classify_regularity",
                "eigenfunction::eval_h",
                "operator::eigen_residual",
            ]),
        },
    );
    claims.insert(
        "h_rho_in_lp".into(),
        Claim {
            status: yes_no(reg.l2_tails.holds()),
            evidence: ev(&[
                "potential::classify_regularity",
                "eigenfunction::three_series_diagnostic",
            ]),
        },
    );
    let equivalent = h_mu.verdict == SeriesVerdict::ConvergesAs;
    claims.insert(
        "mu_equiv_mutilde".into(),
        Claim {
            status: yes_no(equivalent),
            evidence: ev(&[
                "eigenfunction::three_series_diagnostic",
                "montecarlo::cylinder_rn_ratios",
            ]),
        },
    );
    claims.insert(
        "pairwise_singular".into(),
        Claim {
            status: yes_no(matches!(h_mu.verdict, SeriesVerdict::Diverges(_))),
            evidence: ev(&[
                "eigenfunction::three_series_diagnostic",
                "montecarlo::drift_probe",
            ]),
        },
    );
    claims.insert(
        "h_rho_infinite_mu_ae".into(),
        Claim {
            status: yes_no(h_eigen.verdict == SeriesVerdict::Diverges(Drift::PlusInfinity)),
            evidence: ev(&[
                "eigenfunction::three_series_diagnostic",
                "montecarlo::drift_probe",
            ]),
        },
    );
    claims.insert(
        "locally_unbounded".into(),
        Claim {
            status: match d.regime {
                Regime::L2Tails => ClaimStatus::Yes,
                Regime::Bowen => ClaimStatus::No,
                Regime::Singular => ClaimStatus::NotCertified,
            },
            evidence: ev(&[
                "montecarlo::oscillation_probe",
                "potential::classify_regularity",
            ]),
        },
    );
    Ok(RegimeReport {
        gamma: d.gamma(),
        orientation: d.orientation().into(),
        regime: d.regime,
        zeta: d.zeta(),
        log_lambda: d.closed_forms().log_lambda(),
        claims,
    })
}
