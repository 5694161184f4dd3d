//! Schedules and runs: averaged iterations, cyclic / quasi-periodic /
//! random products, deviation traces against the certified envelopes,
//! and the block statistics behind the random-product criterion.
//!
//! Deviations are measured with the ambient-norm upper certificate, so a
//! recorded "no violation" stays sound even when the norm itself is only
//! an interval. Products are accumulated by plain multiplication; if the
//! running product's spectral norm passes 1e6 the run aborts with a
//! divergence report instead of silently overflowing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{averaged_rate, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Mat};
use crate::projector::{check_weak_consistency, make_orthogonal_projector, ProjectorFamily};
use crate::space::{norm_in, Operator};

/// Slack added to an envelope before flagging a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Abort threshold for the running product's spectral norm.
const DIVERGENCE_BOUND: f64 = 1e6;

/// Stop rule and budget for estimating the averaged-iteration limit.
const LIMIT_STOP: f64 = 1e-13;
const LIMIT_BUDGET: usize = 100_000;

/// What drives the index sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    /// No index sequence; iterate T = Σ α_k P_k.
    Averaged { alphas: Option<Vec<f64>> },
    /// 1, 2, ..., n repeated (0-based internally).
    Cyclic,
    /// Explicit sequence where every length-m window covers all indices.
    QuasiPeriodic { m: usize, tau: Vec<usize> },
    /// i.i.d. draws from μ, seeded.
    Random {
        mu: Vec<f64>,
        seed: u64,
        lambda: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub steps: usize,
}

/// A validated, fully materialized schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub spec: ScheduleSpec,
    /// 0-based projector index per step; empty for averaged schedules.
    pub indices: Vec<usize>,
    /// Resolved block-frequency threshold (random schedules only).
    pub lambda: Option<f64>,
}

impl Schedule {
    pub fn steps(&self) -> usize {
        self.spec.steps
    }

    pub fn is_averaged(&self) -> bool {
        matches!(self.spec.kind, ScheduleKind::Averaged { .. })
    }

    pub fn is_random(&self) -> bool {
        matches!(self.spec.kind, ScheduleKind::Random { .. })
    }
}

/// Builds and validates a schedule for a family of `n` projectors.
pub fn make_schedule(spec: ScheduleSpec, n: usize) -> Result<Schedule> {
    if spec.steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    match &spec.kind {
        ScheduleKind::Averaged { alphas } => {
            if let Some(a) = alphas {
                let w = WeightVector::new(a.clone())?;
                if w.len() != n {
                    return Err(Error::InvalidWeights(format!(
                        "{} weights for {} projectors",
                        w.len(),
                        n
                    )));
                }
            }
            Ok(Schedule {
                indices: Vec::new(),
                lambda: None,
                spec,
            })
        }
        ScheduleKind::Cyclic => {
            let indices = (0..spec.steps).map(|i| i % n).collect();
            Ok(Schedule {
                indices,
                lambda: None,
                spec,
            })
        }
        ScheduleKind::QuasiPeriodic { m, tau } => {
            let m = *m;
            if m < n {
                return Err(Error::InvalidParameter(format!(
                    "quasi-period m = {m} must be at least n = {n}"
                )));
            }
            if let Some(bad) = tau.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidParameter(format!(
                    "schedule index {bad} out of range for {n} projectors"
                )));
            }
            if tau.len() < spec.steps.max(m) {
                return Err(Error::ScheduleTooShort {
                    needed: spec.steps.max(m),
                    available: tau.len(),
                });
            }
            validate_quasi_periodic(tau, n, m)?;
            let indices = tau[..spec.steps].to_vec();
            Ok(Schedule {
                indices,
                lambda: None,
                spec,
            })
        }
        ScheduleKind::Random { mu, seed, lambda } => {
            if mu.len() != n {
                return Err(Error::InvalidMeasure(format!(
                    "{} probabilities for {} projectors",
                    mu.len(),
                    n
                )));
            }
            if mu.iter().any(|p| !p.is_finite() || *p <= 0.0) {
                return Err(Error::InvalidMeasure(
                    "all probabilities must be positive".into(),
                ));
            }
            let sum: f64 = mu.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMeasure(format!("probabilities sum to {sum}")));
            }
            let fact: f64 = (1..=n as u64).product::<u64>() as f64;
            let freq = fact * mu.iter().product::<f64>();
            let lambda = lambda.unwrap_or(0.5 * freq);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let indices = (0..spec.steps)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for (j, p) in mu.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return j;
                        }
                    }
                    mu.len() - 1
                })
                .collect();
            Ok(Schedule {
                indices,
                lambda: Some(lambda),
                spec,
            })
        }
    }
}

/// Checks that every length-m window of `tau` covers {0..n-1}; reports the
/// first offending window by its 1-based start.
pub fn validate_quasi_periodic(tau: &[usize], n: usize, m: usize) -> Result<()> {
    let mut counts = vec![0usize; n];
    let mut covered = 0usize;
    for (i, &t) in tau.iter().enumerate() {
        if counts[t] == 0 {
            covered += 1;
        }
        counts[t] += 1;
        if i + 1 >= m {
            if covered < n {
                return Err(Error::QuasiPeriodViolation {
                    window_start: i + 2 - m,
                });
            }
            let out = tau[i + 1 - m];
            counts[out] -= 1;
            if counts[out] == 0 {
                covered -= 1;
            }
        }
    }
    Ok(())
}

/// Seeded generator of quasi-periodic sequences: at each position a symbol
/// is drawn uniformly among the choices that keep all cover deadlines
/// satisfiable (earliest-deadline feasibility), so every length-m window
/// of the result covers {0..n-1}.
pub fn random_quasi_periodic_tau(n: usize, m: usize, len: usize, seed: u64) -> Vec<usize> {
    assert!(m >= n, "need m >= n for a quasi-periodic sequence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // deadline[j]: latest position (1-based) at which j must appear next.
    let mut deadline: Vec<usize> = vec![m; n];
    let mut tau = Vec::with_capacity(len);
    for pos in 1..=len {
        let feasible_after = |deadline: &[usize], choice: usize| -> bool {
            let mut ds: Vec<usize> = (0..n)
                .map(|j| if j == choice { pos + m } else { deadline[j] })
                .collect();
            ds.sort_unstable();
            ds.iter().enumerate().all(|(k, d)| *d >= pos + 1 + k)
        };
        let mut order: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            let swap = (rng.gen::<u64>() % (k as u64 + 1)) as usize;
            order.swap(k, swap);
        }
        let mut pick = None;
        for &c in &order {
            if deadline[c] >= pos && feasible_after(&deadline, c) {
                pick = Some(c);
                break;
            }
        }
        // Earliest deadline is always feasible when the state is.
        let choice = pick.unwrap_or_else(|| {
            (0..n).min_by_key(|j| deadline[*j]).expect("n >= 1")
        });
        tau.push(choice);
        deadline[choice] = pos + m;
    }
    debug_assert!(validate_quasi_periodic(&tau, n, m).is_ok());
    tau
}

/// One recorded step of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub deviation: f64,
    pub envelope: Option<f64>,
    pub violated: bool,
}

/// Full record of a run: per-step deviations against the limit operator,
/// optional envelopes, and (for random runs) block statistics.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub limit_op: Operator,
    /// First block count k from which the running frequency stays at or
    /// above λ within the observed horizon (random runs only).
    pub k_tau: Option<usize>,
    /// Running frequency |A(τ,k)|/k per k (random runs only).
    pub block_stats: Option<Vec<f64>>,
}

impl IterationTrace {
    pub fn violations(&self) -> usize {
        self.steps.iter().filter(|s| s.violated).count()
    }

    pub fn final_deviation(&self) -> f64 {
        self.steps.last().map(|s| s.deviation).unwrap_or(0.0)
    }
}

/// How the limit operator of an averaged run is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMode {
    /// Use the weak-consistency certificate's global projector; falls back
    /// to the estimated limit when no certificate can be produced.
    Certified,
    /// Iterate T until successive powers agree to 1e-13.
    Estimate,
}

/// The averaged operator T = Σ α_k P_k.
pub fn averaged_operator(family: &ProjectorFamily, alphas: &WeightVector) -> Mat {
    let dim = family.space().dim();
    let mut t = Mat::zeros(dim, dim);
    for (a, p) in alphas.alphas().iter().zip(family.projectors()) {
        t = t.add(&p.matrix().scale(*a));
    }
    t
}

/// Energy of an operator with respect to the family:
/// E(S) = Σ_j α_j ||(I - P_j) S|| with upper norm certificates.
pub fn energy(family: &ProjectorFamily, alphas: &WeightVector, s: &Operator) -> Result<f64> {
    if alphas.len() != family.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} projectors",
            alphas.len(),
            family.len()
        )));
    }
    let eye = Mat::identity(family.space().dim());
    let mut total = 0.0;
    for (a, p) in alphas.alphas().iter().zip(family.projectors()) {
        let residual = eye.sub(p.matrix()).mul(&s.matrix);
        total += a * norm_in(&residual, family.space()).upper;
    }
    Ok(total)
}

fn estimate_limit(t: &Mat) -> Result<Mat> {
    let mut w = t.clone();
    let mut last_delta = f64::INFINITY;
    for _ in 0..LIMIT_BUDGET {
        let next = t.mul(&w);
        let delta = spectral_norm(&next.sub(&w));
        if !delta.is_finite() || delta > 1e12 {
            return Err(Error::NonConvergent {
                budget: LIMIT_BUDGET,
                last_delta: delta,
            });
        }
        if delta <= LIMIT_STOP {
            return Ok(next);
        }
        last_delta = delta;
        w = next;
    }
    Err(Error::NonConvergent {
        budget: LIMIT_BUDGET,
        last_delta,
    })
}

/// Runs the averaged iteration T^i and records deviations from the limit.
///
/// When the family's pair projectors allow the contraction rate to be
/// evaluated and it passes (r < 1), every step carries the envelope C·r^i.
pub fn run_averaged(
    family: &ProjectorFamily,
    alphas: &WeightVector,
    steps: usize,
    mode: LimitMode,
) -> Result<IterationTrace> {
    if alphas.len() != family.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} projectors",
            alphas.len(),
            family.len()
        )));
    }
    let space = family.space();
    let t = averaged_operator(family, alphas);
    let limit = match mode {
        LimitMode::Certified => match &family.consistency {
            Some(cert) => cert.global_op.matrix.clone(),
            None => match check_weak_consistency(family) {
                Ok(cert) => cert.global_op.matrix.clone(),
                Err(_) => estimate_limit(&t)?,
            },
        },
        LimitMode::Estimate => estimate_limit(&t)?,
    };
    let envelope = {
        let beta = family.beta_upper();
        crate::angle::angle_table(family)
            .ok()
            .and_then(|table| averaged_rate(&table, alphas, beta).ok())
            .filter(|rate| rate.pass)
            .map(|rate| (rate.big_c, rate.r))
    };
    let mut steps_out = Vec::with_capacity(steps);
    let mut w = Mat::identity(space.dim());
    for i in 1..=steps {
        w = t.mul(&w);
        let wnorm = spectral_norm(&w);
        if !wnorm.is_finite() || wnorm > DIVERGENCE_BOUND {
            return Err(Error::Divergence {
                step: i,
                norm: wnorm,
            });
        }
        let deviation = norm_in(&w.sub(&limit), space).upper;
        let env = envelope.map(|(c, r)| c * r.powi(i as i32));
        let violated = env.is_some_and(|e| deviation > e + VIOLATION_TOL);
        steps_out.push(TraceStep {
            step: i,
            deviation,
            envelope: env,
            violated,
        });
    }
    Ok(IterationTrace {
        steps: steps_out,
        limit_op: Operator::new(limit, space.clone())?,
        k_tau: None,
        block_stats: None,
    })
}

/// Running frequency of qualifying non-overlapping length-n blocks:
/// block l qualifies when (τ((l-1)n+1), ..., τ(ln)) covers {0..n-1}.
pub fn block_frequencies(indices: &[usize], n: usize, k_max: usize) -> Vec<f64> {
    let k_max = k_max.min(indices.len() / n);
    let mut seen = vec![false; n];
    let mut qualifying = 0usize;
    let mut out = Vec::with_capacity(k_max);
    for l in 0..k_max {
        for s in seen.iter_mut() {
            *s = false;
        }
        let mut covered = 0;
        for &t in &indices[l * n..(l + 1) * n] {
            if t < n && !seen[t] {
                seen[t] = true;
                covered += 1;
            }
        }
        if covered == n {
            qualifying += 1;
        }
        out.push(qualifying as f64 / (l + 1) as f64);
    }
    out
}

/// Block statistics for a random schedule. Errors on any other kind.
pub fn lln_statistics(schedule: &Schedule, n: usize, k_max: usize) -> Result<Vec<f64>> {
    if !schedule.is_random() {
        return Err(Error::InvalidParameter(
            "block statistics need a random schedule".into(),
        ));
    }
    Ok(block_frequencies(&schedule.indices, n, k_max))
}

/// First k such that the running frequency is at or above λ from k on
/// (within the horizon). `None` when the horizon never settles above λ.
pub fn first_settled_block(freqs: &[f64], lambda: f64) -> Option<usize> {
    let mut last_below = None;
    for (i, f) in freqs.iter().enumerate() {
        if *f < lambda {
            last_below = Some(i);
        }
    }
    match last_below {
        None => {
            if freqs.is_empty() {
                None
            } else {
                Some(1)
            }
        }
        Some(i) if i + 1 == freqs.len() => None,
        Some(i) => Some(i + 2),
    }
}

/// Left-multiplies the scheduled projectors step by step and records the
/// deviation from the family's global projector.
///
/// The envelope closure may decline (return `None`) for steps it does not
/// cover; for random schedules, envelope values before n·k_τ are dropped,
/// since the bound only takes hold once the block frequency has settled.
/// Envelope violations are recorded, not raised: they falsify a criterion,
/// which is reportable output.
pub fn run_product(
    family: &ProjectorFamily,
    schedule: &Schedule,
    envelope: Option<&dyn Fn(usize) -> Option<f64>>,
) -> Result<IterationTrace> {
    if schedule.is_averaged() {
        return Err(Error::InvalidParameter(
            "averaged schedules run through run_averaged".into(),
        ));
    }
    let space = family.space();
    let n = family.len();
    let limit = match &family.consistency {
        Some(cert) => cert.global_op.matrix.clone(),
        None => match check_weak_consistency(family) {
            Ok(cert) => cert.global_op.matrix.clone(),
            Err(err) => {
                if envelope.is_some() {
                    // Every product envelope assumes weak consistency.
                    return Err(err);
                }
                make_orthogonal_projector(&family.range_intersection(), space)?
                    .matrix()
                    .clone()
            }
        },
    };
    let steps = schedule.steps();
    let (block_stats, k_tau) = if schedule.is_random() {
        let freqs = block_frequencies(&schedule.indices, n, steps / n);
        let k_tau = schedule
            .lambda
            .and_then(|lambda| first_settled_block(&freqs, lambda));
        (Some(freqs), k_tau)
    } else {
        (None, None)
    };
    // For random schedules the envelope only takes hold from n*k_tau on
    // (never, if the frequency did not settle within the horizon).
    let env_valid_from = if schedule.is_random() {
        k_tau.map(|k| n * k)
    } else {
        Some(1)
    };
    let mut w = Mat::identity(space.dim());
    let mut steps_out = Vec::with_capacity(steps);
    for i in 1..=steps {
        let j = schedule.indices[i - 1];
        w = family.projector(j).matrix().mul(&w);
        let wnorm = spectral_norm(&w);
        if !wnorm.is_finite() || wnorm > DIVERGENCE_BOUND {
            return Err(Error::Divergence {
                step: i,
                norm: wnorm,
            });
        }
        let deviation = norm_in(&w.sub(&limit), space).upper;
        let env = match (envelope, env_valid_from) {
            (Some(f), Some(from)) if i >= from => f(i),
            _ => None,
        };
        let violated = env.is_some_and(|e| deviation > e + VIOLATION_TOL);
        steps_out.push(TraceStep {
            step: i,
            deviation,
            envelope: env,
            violated,
        });
    }
    Ok(IterationTrace {
        steps: steps_out,
        limit_op: Operator::new(limit, space.clone())?,
        k_tau,
        block_stats,
    })
}

/// Deviation of one explicit window product from the family's global
/// projector, in the ambient norm (upper certificate).
pub fn window_deviation(family: &ProjectorFamily, window: &[usize]) -> Result<f64> {
    let space = family.space();
    let limit = match &family.consistency {
        Some(cert) => cert.global_op.matrix.clone(),
        None => check_weak_consistency(family)?.global_op.matrix.clone(),
    };
    let mut w = Mat::identity(space.dim());
    for &j in window {
        w = family.projector(j).matrix().mul(&w);
    }
    Ok(norm_in(&w.sub(&limit), space).upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::{make_orthogonal_projector, Projector, SubspaceBasis};
    use crate::space::NormedSpace;

    fn euclid(dim: usize) -> NormedSpace {
        NormedSpace::euclidean(dim)
    }

    fn basis(dim: usize, vs: &[&[f64]]) -> SubspaceBasis {
        SubspaceBasis::new(dim, &vs.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn line_projector(theta: f64) -> Projector {
        make_orthogonal_projector(&basis(2, &[&[theta.cos(), theta.sin()]]), &euclid(2)).unwrap()
    }

    fn two_lines_family(theta: f64) -> ProjectorFamily {
        let mut family = ProjectorFamily::new(
            euclid(2),
            vec![line_projector(0.0), line_projector(theta)],
        )
        .unwrap();
        family.build_pairs_auto().unwrap();
        family.certify_weak().unwrap();
        family
    }

    #[test]
    fn cyclic_schedule_examples() {
        let s = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Cyclic,
                steps: 7,
            },
            3,
        )
        .unwrap();
        assert_eq!(s.indices, vec![0, 1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn quasi_periodic_validation() {
        let ok = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::QuasiPeriodic {
                    m: 2,
                    tau: vec![0, 1, 0, 1, 0, 1],
                },
                steps: 6,
            },
            2,
        );
        assert!(ok.is_ok());

        let bad = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::QuasiPeriodic {
                    m: 2,
                    tau: vec![0, 0, 1, 0, 1, 0],
                },
                steps: 6,
            },
            2,
        );
        match bad.unwrap_err() {
            Error::QuasiPeriodViolation { window_start } => assert_eq!(window_start, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn quasi_periodic_generator_is_valid_and_seeded() {
        for seed in 0..5 {
            let tau = random_quasi_periodic_tau(3, 4, 300, seed);
            assert_eq!(tau.len(), 300);
            validate_quasi_periodic(&tau, 3, 4).unwrap();
            let again = random_quasi_periodic_tau(3, 4, 300, seed);
            assert_eq!(tau, again);
        }
        let tau = random_quasi_periodic_tau(2, 2, 100, 9);
        validate_quasi_periodic(&tau, 2, 2).unwrap();
    }

    #[test]
    fn random_schedule_reproducible() {
        let spec = ScheduleSpec {
            kind: ScheduleKind::Random {
                mu: vec![0.5, 0.5],
                seed: 42,
                lambda: None,
            },
            steps: 400,
        };
        let a = make_schedule(spec.clone(), 2).unwrap();
        let b = make_schedule(spec, 2).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.lambda, Some(0.25));
    }

    #[test]
    fn random_schedule_block_frequency_near_half() {
        let s = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Random {
                    mu: vec![0.5, 0.5],
                    seed: 42,
                    lambda: None,
                },
                steps: 400,
            },
            2,
        )
        .unwrap();
        let freqs = lln_statistics(&s, 2, 200).unwrap();
        let at_100 = freqs[99];
        assert!((at_100 - 0.5).abs() <= 0.1, "frequency {at_100}");
    }

    #[test]
    fn lln_given_sequences() {
        // Alternating sequence: every block qualifies.
        let alternating: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let freqs = block_frequencies(&alternating, 2, 50);
        assert!(freqs.iter().all(|f| *f == 1.0));
        // Constant sequence: none do.
        let constant = vec![0usize; 100];
        let freqs = block_frequencies(&constant, 2, 50);
        assert!(freqs.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn lln_skewed_measure_matches_expected_frequency() {
        let s = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Random {
                    mu: vec![0.9, 0.1],
                    seed: 7,
                    lambda: None,
                },
                steps: 20_000,
            },
            2,
        )
        .unwrap();
        let freqs = lln_statistics(&s, 2, 10_000).unwrap();
        let last = *freqs.last().unwrap();
        assert!((last - 0.18).abs() <= 0.02, "frequency {last}");
    }

    #[test]
    fn first_settled_block_logic() {
        assert_eq!(first_settled_block(&[0.0, 0.5, 0.66, 0.75], 0.4), Some(2));
        assert_eq!(first_settled_block(&[0.5, 0.3, 0.5, 0.6], 0.4), Some(3));
        assert_eq!(first_settled_block(&[0.5, 0.6], 0.4), Some(1));
        assert_eq!(first_settled_block(&[0.5, 0.3], 0.4), None);
        assert_eq!(first_settled_block(&[], 0.4), None);
    }

    #[test]
    fn averaged_orthogonal_lines_closed_form() {
        // Perpendicular lines: T = I/2, limit 0, deviation 2^-i <= 4·2^-i.
        let family = two_lines_family(std::f64::consts::PI / 2.0);
        let alphas = WeightVector::uniform(2);
        let trace = run_averaged(&family, &alphas, 30, LimitMode::Certified).unwrap();
        assert_eq!(trace.limit_op.matrix.max_abs(), 0.0);
        for s in &trace.steps {
            let expected = 2.0_f64.powi(-(s.step as i32));
            assert!((s.deviation - expected).abs() <= 1e-12);
            let env = s.envelope.expect("rate passes for orthogonal lines");
            assert!((env - 4.0 * expected).abs() <= 1e-9);
            assert!(!s.violated);
        }
    }

    #[test]
    fn averaged_identical_projectors_stationary() {
        let p = line_projector(0.3);
        let family = ProjectorFamily::new(euclid(2), vec![p.clone(), p]).unwrap();
        let alphas = WeightVector::uniform(2);
        let trace = run_averaged(&family, &alphas, 5, LimitMode::Estimate).unwrap();
        for s in &trace.steps {
            assert!(s.deviation <= 1e-12);
        }
    }

    #[test]
    fn averaged_limit_matches_global_projector() {
        // Two coordinate planes in R3 sharing an axis.
        let s3 = euclid(3);
        let p1 = make_orthogonal_projector(
            &basis(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]),
            &s3,
        )
        .unwrap();
        let p2 = make_orthogonal_projector(
            &basis(3, &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
            &s3,
        )
        .unwrap();
        let mut family = ProjectorFamily::new(s3, vec![p1, p2]).unwrap();
        family.build_pairs_auto().unwrap();
        let cert = family.certify_weak().unwrap().global_op.matrix.clone();
        let alphas = WeightVector::uniform(2);
        let estimated = run_averaged(&family, &alphas, 5, LimitMode::Estimate).unwrap();
        assert!(spectral_norm(&estimated.limit_op.matrix.sub(&cert)) <= 1e-10);
    }

    #[test]
    fn averaged_estimate_diverges_for_expanding_family() {
        // Oblique pair with spectral radius 2 for T: the power sequence
        // cannot settle.
        let s = euclid(2);
        let p1 = Projector::from_operator(
            Operator::new(Mat::from_rows(&[vec![1.0, 3.0], vec![0.0, 0.0]]), s.clone()).unwrap(),
        )
        .unwrap();
        let p2 = Projector::from_operator(
            Operator::new(Mat::from_rows(&[vec![0.0, 0.0], vec![3.0, 1.0]]), s.clone()).unwrap(),
        )
        .unwrap();
        let family = ProjectorFamily::new(s, vec![p1, p2]).unwrap();
        let alphas = WeightVector::uniform(2);
        let err = run_averaged(&family, &alphas, 10, LimitMode::Estimate).unwrap_err();
        assert!(matches!(err, Error::NonConvergent { .. }));
    }

    #[test]
    fn energy_examples() {
        let family = two_lines_family(std::f64::consts::PI / 2.0);
        let alphas = WeightVector::uniform(2);
        // E of the global projector is 0.
        let global = family.consistency.as_ref().unwrap().global_op.clone();
        assert!(energy(&family, &alphas, &global).unwrap() <= 1e-12);
        // E(I) = 1 for orthogonal line projectors.
        let eye = Operator::identity(euclid(2));
        assert!((energy(&family, &alphas, &eye).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn energy_contracts_under_averaged_operator() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        // Lines at a mild angle: rate passes, and E(TS) <= r E(S).
        let theta = std::f64::consts::PI / 2.0 - 0.1; // cosine ~ 0.0998
        let family = two_lines_family(theta);
        let alphas = WeightVector::uniform(2);
        let beta = family.beta_upper();
        let table = crate::angle::angle_table(&family).unwrap();
        let rate = averaged_rate(&table, &alphas, beta).unwrap();
        assert!(rate.pass);
        let t = averaged_operator(&family, &alphas);
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        for _ in 0..100 {
            let sm = Mat::from_rows(
                &(0..2)
                    .map(|_| (0..2).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                    .collect::<Vec<_>>(),
            );
            let s_op = Operator::new(sm.clone(), euclid(2)).unwrap();
            let ts_op = Operator::new(t.mul(&sm), euclid(2)).unwrap();
            let e_s = energy(&family, &alphas, &s_op).unwrap();
            let e_ts = energy(&family, &alphas, &ts_op).unwrap();
            assert!(e_ts <= rate.r * e_s + 1e-9);
        }
    }

    #[test]
    fn cyclic_two_lines_closed_form() {
        // ||(P2 P1)^i||₂ = cos(θ)^(2i-1) for lines at angle θ with trivial
        // intersection; the limit is the zero operator.
        let family = two_lines_family(std::f64::consts::PI / 3.0);
        let schedule = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Cyclic,
                steps: 20,
            },
            2,
        )
        .unwrap();
        let trace = run_product(&family, &schedule, None).unwrap();
        for s in &trace.steps {
            if s.step % 2 == 0 {
                let expected = 0.5_f64.powi(s.step as i32 - 1);
                assert!(
                    (s.deviation - expected).abs() <= 1e-12,
                    "step {}: {} vs {}",
                    s.step,
                    s.deviation,
                    expected
                );
            }
        }
    }

    #[test]
    fn constant_schedule_single_projector() {
        let p = line_projector(0.4);
        let mut family = ProjectorFamily::new(euclid(2), vec![p]).unwrap();
        family.certify_weak().unwrap();
        let schedule = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Cyclic,
                steps: 6,
            },
            1,
        )
        .unwrap();
        let trace = run_product(&family, &schedule, None).unwrap();
        for s in &trace.steps {
            assert!(s.deviation <= 1e-12);
        }
    }

    #[test]
    fn product_commutes_with_global_complement() {
        // ||Π(I-P) - (I-P)Π(I-P)||₂ vanishes for weakly consistent
        // families: the global projector absorbs on both sides.
        let family = two_lines_family(1.0);
        let schedule = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Random {
                    mu: vec![0.5, 0.5],
                    seed: 5,
                    lambda: None,
                },
                steps: 30,
            },
            2,
        )
        .unwrap();
        let p = family.consistency.as_ref().unwrap().global_op.matrix.clone();
        let eye = Mat::identity(2);
        let comp = eye.sub(&p);
        let mut w = Mat::identity(2);
        for &j in &schedule.indices {
            w = family.projector(j).matrix().mul(&w);
            let lhs = w.mul(&comp);
            let rhs = comp.mul(&w).mul(&comp);
            assert!(spectral_norm(&lhs.sub(&rhs)) <= 1e-9);
        }
    }

    #[test]
    fn divergence_detected_for_expanding_products() {
        let s = euclid(2);
        let p1 = Projector::from_operator(
            Operator::new(Mat::from_rows(&[vec![1.0, 3.0], vec![0.0, 0.0]]), s.clone()).unwrap(),
        )
        .unwrap();
        let p2 = Projector::from_operator(
            Operator::new(Mat::from_rows(&[vec![0.0, 0.0], vec![3.0, 1.0]]), s.clone()).unwrap(),
        )
        .unwrap();
        let family = ProjectorFamily::new(s, vec![p1, p2]).unwrap();
        let schedule = make_schedule(
            ScheduleSpec {
                kind: ScheduleKind::Cyclic,
                steps: 200,
            },
            2,
        )
        .unwrap();
        let err = run_product(&family, &schedule, None).unwrap_err();
        match err {
            Error::Divergence { step, norm } => {
                assert!(step > 0);
                assert!(norm > 1e6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn run_reproducible_bitwise() {
        let family = two_lines_family(1.2);
        let spec = ScheduleSpec {
            kind: ScheduleKind::Random {
                mu: vec![0.5, 0.5],
                seed: 99,
                lambda: None,
            },
            steps: 60,
        };
        let s1 = make_schedule(spec.clone(), 2).unwrap();
        let s2 = make_schedule(spec, 2).unwrap();
        let t1 = run_product(&family, &s1, None).unwrap();
        let t2 = run_product(&family, &s2, None).unwrap();
        assert_eq!(t1.steps, t2.steps);
        assert_eq!(t1.block_stats, t2.block_stats);
    }

    #[test]
    fn window_contraction_meets_quality() {
        use crate::criteria::gamma_for_quality;
        // Coordinate planes in R4 sharing one axis: all cosines are 0,
        // so any positive budget passes and every covering window of
        // length m contracts to q.
        let s4 = euclid(4);
        let planes = [
            [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
            [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
            [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        ];
        let projectors: Vec<Projector> = planes
            .iter()
            .map(|vs| make_orthogonal_projector(&basis(4, &[&vs[0], &vs[1]]), &s4).unwrap())
            .collect();
        let mut family = ProjectorFamily::new(s4, projectors).unwrap();
        family.build_pairs_auto().unwrap();
        family.certify_weak().unwrap();
        let q = 0.5;
        let budget = gamma_for_quality(family.beta_upper(), 3, 4, q).unwrap();
        let table = crate::angle::angle_table(&family).unwrap();
        assert!(table.max_upper() <= budget.gamma);
        // Every surjective window of length 4 on {0,1,2}.
        for w in [
            [0, 1, 2, 0],
            [2, 1, 0, 1],
            [1, 0, 2, 2],
            [0, 2, 1, 0],
        ] {
            let dev = window_deviation(&family, &w).unwrap();
            assert!(dev <= q + 1e-9, "window {w:?} deviates by {dev}");
        }
    }
}
