//! Sufficient conditions and rate envelopes: the averaged-iteration
//! contraction rate, the quadratic angle budget, the per-window quality
//! budget, and the cyclic / quasi-periodic / random envelopes.
//!
//! All functions here are pure arithmetic on certified inputs. Cosines
//! enter through their upper bounds, so a passing criterion stays valid
//! for the true (possibly smaller) angles.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::angle::{AngleRow, AngleTable};
use crate::error::{Error, Result};

/// Convex weights for the averaged iteration: positive, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    alphas: Vec<f64>,
}

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidWeights("weights must be nonempty".into()));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(WeightVector { alphas })
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector {
            alphas: vec![1.0 / n as f64; n],
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Largest admissible uniform norm bound for n projectors: 1 + 1/(n-1).
pub fn beta_limit(n: usize) -> f64 {
    assert!(n >= 2, "beta limit needs n >= 2");
    1.0 + 1.0 / (n as f64 - 1.0)
}

/// Outcome of the averaged-iteration rate computation.
///
/// `r` aggregates the per-index contraction factors with a max, which is
/// what the energy-contraction argument actually needs; `r_min` is the
/// min-aggregated variant kept for reporting. Certification always uses
/// `r`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AveragedRate {
    pub r: f64,
    pub r_min: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub pass: bool,
}

/// Contraction rate for T = Σ α_k P_k from the pairwise cosines:
/// for each j, c_j = (1-α_j)β + Σ_{k≠j} ((cos+β+β²)·cos/(1-cos))·2α_k,
/// r = max_j c_j, C = (1+β)/(1-r). Passes when r < 1.
pub fn averaged_rate(
    cosines: &AngleTable,
    alphas: &WeightVector,
    beta: f64,
) -> Result<AveragedRate> {
    let n = cosines.n();
    if alphas.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} projectors",
            alphas.len(),
            n
        )));
    }
    let mut r_max = f64::NEG_INFINITY;
    let mut r_min = f64::INFINITY;
    for j in 0..n {
        let mut cj = (1.0 - alphas.alphas()[j]) * beta;
        for k in 0..n {
            if k == j {
                continue;
            }
            let cos = cosines.upper(j, k);
            if cos >= 1.0 {
                return Err(Error::CosineNotBelowOne { cos });
            }
            cj += (cos + beta + beta * beta) * cos / (1.0 - cos) * 2.0 * alphas.alphas()[k];
        }
        r_max = r_max.max(cj);
        r_min = r_min.min(cj);
    }
    let pass = r_max < 1.0;
    Ok(AveragedRate {
        r: r_max,
        r_min,
        big_c: if pass {
            (1.0 + beta) / (1.0 - r_max)
        } else {
            f64::INFINITY
        },
        pass,
    })
}

/// Uniform angle budget for equal weights, from the quadratic equation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaBudget {
    /// Root of f(x) = 1 in (0,1).
    pub gamma_prime: f64,
    /// Working budget: half the root.
    pub gamma: f64,
    /// r = f(gamma) < 1.
    pub r: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

/// With a = (n-1)/n and f(x) = aβ + 2a(x+β+β²)x/(1-x), finds the unique
/// γ' in (0,1) with f(γ') = 1 by solving
/// 2a·x² + (2a(β+β²) + (1-aβ))·x - (1-aβ) = 0, then returns γ = γ'/2,
/// r = f(γ) and C = (1+β)/(1-r). Requires 0 <= β < 1 + 1/(n-1).
pub fn solve_gamma(beta: f64, n: usize) -> Result<GammaBudget> {
    assert!(n >= 2, "solve_gamma needs n >= 2");
    let limit = beta_limit(n);
    if !(0.0..limit).contains(&beta) {
        return Err(Error::BetaOutOfRange { beta, limit });
    }
    let a = (n as f64 - 1.0) / n as f64;
    let b = 2.0 * a * (beta + beta * beta) + (1.0 - a * beta);
    let c0 = -(1.0 - a * beta);
    let disc = b * b - 4.0 * (2.0 * a) * c0;
    let gamma_prime = (-b + disc.sqrt()) / (2.0 * 2.0 * a);
    let gamma = gamma_prime / 2.0;
    let r = contraction_f(gamma, a, beta);
    Ok(GammaBudget {
        gamma_prime,
        gamma,
        r,
        big_c: (1.0 + beta) / (1.0 - r),
    })
}

/// f(x) = aβ + 2a(x+β+β²)x/(1-x); strictly increasing on [0,1).
pub(crate) fn contraction_f(x: f64, a: f64, beta: f64) -> f64 {
    a * beta + 2.0 * a * (x + beta + beta * beta) * x / (1.0 - x)
}

/// The deviation bound for a length-m product covering all n projectors:
/// β^m·C·r^i + 2γ·β^(m-2)·((2+β)^i - 1), free in the tuning index i.
pub fn product_deviation_bound(
    beta: f64,
    gamma: f64,
    big_c: f64,
    r: f64,
    m: usize,
    i: usize,
) -> f64 {
    debug_assert!(m >= 2);
    beta.powi(m as i32) * big_c * r.powi(i as i32)
        + 2.0 * gamma * beta.powi(m as i32 - 2) * ((2.0 + beta).powi(i as i32) - 1.0)
}

/// Angle budget guaranteeing that every covering window of length m
/// deviates from the limit projection by at most q.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QualityBudget {
    /// min of the uniform budget and the split budget.
    pub gamma: f64,
    /// Tuning index where the geometric term falls below q/2.
    pub i0: usize,
    /// Uniform budget γ₁ from [`solve_gamma`].
    pub gamma_uniform: f64,
    /// Split budget γ₂ making the second term at most q/2.
    pub gamma_split: f64,
    pub r: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

/// Splits the quality target q in half: picks i0 with β^m·C·r^i0 <= q/2,
/// then γ₂ = (q/2) / (2β^(m-2)((2+β)^i0 - 1)) so the remainder term is
/// also at most q/2. Returns min(γ₁, γ₂) with the pieces.
pub fn gamma_for_quality(beta: f64, n: usize, m: usize, q: f64) -> Result<QualityBudget> {
    if !(0.0..1.0).contains(&q) || q == 0.0 {
        return Err(Error::InvalidParameter(format!("q = {q} must be in (0,1)")));
    }
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "window length m = {m} must be at least n = {n}"
        )));
    }
    let budget = solve_gamma(beta, n)?;
    let target = q / 2.0;
    let mut i0 = 0usize;
    let mut term = beta.powi(m as i32) * budget.big_c;
    while term > target && i0 < 1_000_000 {
        term *= budget.r;
        i0 += 1;
    }
    let gamma_split = if i0 == 0 {
        f64::INFINITY
    } else {
        let denom = 2.0 * beta.powi(m as i32 - 2) * ((2.0 + beta).powi(i0 as i32) - 1.0);
        if denom.is_finite() && denom > 0.0 {
            target / denom
        } else {
            0.0
        }
    };
    Ok(QualityBudget {
        gamma: budget.gamma.min(gamma_split),
        i0,
        gamma_uniform: budget.gamma,
        gamma_split,
        r: budget.r,
        big_c: budget.big_c,
    })
}

/// Parameters for random products drawn i.i.d. from μ.
#[derive(Clone, Debug, Serialize)]
pub struct RandomParams {
    /// Probability that a length-n block is a permutation of {1..n}:
    /// n!·μ(1)···μ(n).
    pub freq: f64,
    /// Block-frequency threshold the run must reach; defaults to freq/2.
    pub lambda: f64,
    /// Largest per-window quality with β^(n(1-λ))·q^λ <= 0.99, capped
    /// at 0.999.
    pub q: f64,
}

/// Derives the law-of-large-numbers frequency and a workable (λ, q) pair
/// for a random schedule. Every μ(j) must be positive and sum to 1.
pub fn random_params(beta: f64, n: usize, mu: &[f64]) -> Result<RandomParams> {
    if mu.len() != n {
        return Err(Error::InvalidMeasure(format!(
            "{} probabilities for {} projectors",
            mu.len(),
            n
        )));
    }
    if mu.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::InvalidMeasure("all probabilities must be positive".into()));
    }
    let sum: f64 = mu.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMeasure(format!("probabilities sum to {sum}")));
    }
    assert!(n <= 20, "factorial overflow");
    let fact: f64 = (1..=n as u64).product::<u64>() as f64;
    let freq = fact * mu.iter().product::<f64>();
    let lambda = 0.5 * freq;
    let q = if beta <= 0.0 {
        0.999
    } else {
        let raw = (0.99 / beta.powf(n as f64 * (1.0 - lambda))).powf(1.0 / lambda);
        raw.min(0.999)
    };
    Ok(RandomParams { freq, lambda, q })
}

/// Envelope for cyclic products measured in full sweeps: q^i.
pub fn cyclic_envelope(q: f64, i: usize) -> f64 {
    debug_assert!(q > 0.0 && q < 1.0);
    q.powi(i as i32)
}

/// Envelope for quasi-periodic products at step i: β^(m-1)·q^⌊i/m⌋.
pub fn quasi_periodic_envelope(beta: f64, q: f64, m: usize, i: usize) -> f64 {
    beta.powi(m as i32 - 1) * q.powi((i / m) as i32)
}

/// Per-block contraction factor of the random envelope.
pub fn random_block_factor(beta: f64, q: f64, n: usize, lambda: f64) -> f64 {
    beta.powf(n as f64 * (1.0 - lambda)) * q.powf(lambda)
}

/// Envelope for random products at step i, valid once the running block
/// frequency has reached λ: ‖I-P‖·β^(n-1)·(β^(n(1-λ))q^λ)^⌊i/n⌋.
/// Signals when the per-block factor is not below 1.
pub fn random_envelope(
    beta: f64,
    q: f64,
    n: usize,
    lambda: f64,
    norm_i_minus_p: f64,
    i: usize,
) -> Result<f64> {
    let factor = random_block_factor(beta, q, n, lambda);
    if factor >= 1.0 {
        return Err(Error::NonContractiveEnvelope { factor });
    }
    Ok(norm_i_minus_p * beta.powi(n as i32 - 1) * factor.powi((i / n) as i32))
}

/// Pass/fail record for one criterion, with the reason spelled out.
#[derive(Clone, Debug, Serialize)]
pub struct Hypothesis {
    pub pass: bool,
    pub reason: String,
}

/// Everything the criteria evaluation produced for one family, in one
/// serializable report.
#[derive(Clone, Debug, Serialize)]
pub struct CriteriaReport {
    pub beta: f64,
    pub n: usize,
    pub cos_table: Vec<AngleRow>,
    /// Max-aggregated averaged rate (certification value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Min-aggregated variant, reported for comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq: Option<f64>,
    pub hypotheses: BTreeMap<String, Hypothesis>,
}

impl CriteriaReport {
    pub fn new(beta: f64, n: usize, cos_table: Vec<AngleRow>) -> Self {
        CriteriaReport {
            beta,
            n,
            cos_table,
            r: None,
            r_min: None,
            big_c: None,
            gamma: None,
            gamma_prime: None,
            q: None,
            m: None,
            i0: None,
            lambda: None,
            freq: None,
            hypotheses: BTreeMap::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.hypotheses.values().all(|h| h.pass)
    }
}
