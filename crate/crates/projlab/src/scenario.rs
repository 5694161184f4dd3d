//! Scenario files: the JSON surface describing a space, a projector
//! family, optional pair-projector kernels, a schedule and the requested
//! criteria. Loading validates every numeric field; a loaded scenario
//! saves back to an equivalent value (load → save → load is identity).
//!
//! Indices in scenario files are 1-based (`pair: [1,2]`, `tau: [1,2,1]`);
//! they are converted to 0-based at build time.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{make_schedule, Schedule, ScheduleKind, ScheduleSpec};
use crate::error::{Error, Result};
use crate::projector::{
    make_oblique_projector, make_orthogonal_projector, make_pair_projector, PairMode, Projector,
    ProjectorFamily, SubspaceBasis,
};
use crate::space::{NormedSpace, PExp};

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ScenarioValidation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Norm exponent as it appears in JSON: a number or the string "inf".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValue(pub PExp);

impl Serialize for PValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            PExp::Finite(v) => s.serialize_f64(v),
            PExp::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PValue(PExp::Finite(v))),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(PValue(PExp::Infinity)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "p must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

fn default_p() -> PValue {
    PValue(PExp::Finite(2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim: usize,
    #[serde(default = "default_p")]
    pub p: PValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    /// Basis vectors of the range, one vector per row.
    pub range: Vec<Vec<f64>>,
    /// Kernel basis for an oblique projector; orthogonal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    /// 1-based projector indices, j1 < j2.
    pub pair: (usize, usize),
    /// Kernel basis for an oblique pair projector.
    pub kernel: Vec<Vec<f64>>,
}

/// Either the keyword "auto" or an explicit list of oblique pair
/// projectors (unlisted pairs still default to the orthogonal one).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairProjectorsSpec {
    Keyword(String),
    Explicit(Vec<PairSpec>),
}

impl Default for PairProjectorsSpec {
    fn default() -> Self {
        PairProjectorsSpec::Keyword("auto".into())
    }
}

impl PairProjectorsSpec {
    pub fn is_auto(&self) -> bool {
        matches!(self, PairProjectorsSpec::Keyword(k) if k == "auto")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleJson {
    /// "averaged" | "cyclic" | "quasi_periodic" | "random".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// 1-based index sequence for quasi-periodic schedules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

pub const CRITERIA_NAMES: [&str; 4] = ["averaged", "cyclic", "quasi_periodic", "random"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub space: SpaceSpec,
    pub projectors: Vec<ProjectorSpec>,
    #[serde(default)]
    pub pair_projectors: PairProjectorsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<String>>,
    /// Per-window quality target for the cyclic and quasi-periodic
    /// criteria; 0.5 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Loads and fully validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let scenario: Scenario =
        serde_json::from_str(&text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Writes the scenario back as pretty JSON.
pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::ScenarioParse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn check_matrix(field: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(invalid(
                field,
                format!("vector {} has length {}, expected {}", i + 1, row.len(), dim),
            ));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(invalid(field, format!("vector {} has a non-finite entry", i + 1)));
        }
    }
    Ok(())
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let dim = self.space.dim;
        if dim == 0 {
            return Err(invalid("space.dim", "must be >= 1"));
        }
        if let PExp::Finite(p) = self.space.p.0 {
            if !p.is_finite() || p < 1.0 {
                return Err(invalid("space.p", format!("p = {p} must be >= 1 or \"inf\"")));
            }
        }
        if let Some(w) = &self.space.weights {
            if w.len() != dim {
                return Err(invalid(
                    "space.weights",
                    format!("length {} does not match dim {}", w.len(), dim),
                ));
            }
            if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                return Err(invalid("space.weights", "weights must be positive"));
            }
        }
        if self.projectors.is_empty() {
            return Err(invalid("projectors", "at least one projector is required"));
        }
        let n = self.projectors.len();
        for (i, p) in self.projectors.iter().enumerate() {
            check_matrix(&format!("projectors[{}].range", i + 1), &p.range, dim)?;
            if let Some(kernel) = &p.kernel {
                check_matrix(&format!("projectors[{}].kernel", i + 1), kernel, dim)?;
            }
        }
        match &self.pair_projectors {
            PairProjectorsSpec::Keyword(k) if k == "auto" => {}
            PairProjectorsSpec::Keyword(k) => {
                return Err(invalid(
                    "pair_projectors",
                    format!("expected \"auto\" or a list, got \"{k}\""),
                ));
            }
            PairProjectorsSpec::Explicit(list) => {
                for (i, spec) in list.iter().enumerate() {
                    let field = format!("pair_projectors[{}]", i + 1);
                    let (j1, j2) = spec.pair;
                    if j1 == 0 || j2 == 0 || j1 > n || j2 > n || j1 >= j2 {
                        return Err(invalid(
                            &field,
                            format!("pair ({j1},{j2}) must satisfy 1 <= j1 < j2 <= {n}"),
                        ));
                    }
                    check_matrix(&format!("{field}.kernel"), &spec.kernel, dim)?;
                }
            }
        }
        if let Some(alphas) = &self.alphas {
            if alphas.len() != n {
                return Err(invalid(
                    "alphas",
                    format!("{} weights for {} projectors", alphas.len(), n),
                ));
            }
            if alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
                return Err(invalid("alphas", "weights must be positive"));
            }
            let sum: f64 = alphas.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(invalid("alphas", format!("weights sum to {sum}, expected 1")));
            }
        }
        if let Some(s) = &self.schedule {
            if s.steps == 0 {
                return Err(invalid("schedule.steps", "must be >= 1"));
            }
            match s.kind.as_str() {
                "averaged" | "cyclic" => {}
                "quasi_periodic" => {
                    let m = s
                        .m
                        .ok_or_else(|| invalid("schedule.m", "m required for quasi_periodic"))?;
                    if m < n {
                        return Err(invalid(
                            "schedule.m",
                            format!("m = {m} must be at least n = {n}"),
                        ));
                    }
                    let tau = s
                        .tau
                        .as_ref()
                        .ok_or_else(|| invalid("schedule.tau", "tau required for quasi_periodic"))?;
                    if let Some(bad) = tau.iter().find(|&&t| t == 0 || t > n) {
                        return Err(invalid(
                            "schedule.tau",
                            format!("index {bad} out of range 1..={n}"),
                        ));
                    }
                }
                "random" => {
                    if s.seed.is_none() {
                        return Err(invalid("schedule.seed", "seed required"));
                    }
                    let mu = s
                        .mu
                        .as_ref()
                        .ok_or_else(|| invalid("schedule.mu", "mu required for random"))?;
                    if mu.len() != n {
                        return Err(invalid(
                            "schedule.mu",
                            format!("{} probabilities for {} projectors", mu.len(), n),
                        ));
                    }
                    if mu.iter().any(|p| !p.is_finite() || *p <= 0.0) {
                        return Err(invalid("schedule.mu", "probabilities must be positive"));
                    }
                    let sum: f64 = mu.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(invalid("schedule.mu", format!("probabilities sum to {sum}")));
                    }
                    if let Some(l) = s.lambda {
                        if !(0.0..1.0).contains(&l) || l == 0.0 {
                            return Err(invalid("schedule.lambda", "must be in (0,1)"));
                        }
                    }
                }
                other => {
                    return Err(invalid(
                        "schedule.kind",
                        format!(
                            "unknown kind \"{other}\"; expected averaged | cyclic | quasi_periodic | random"
                        ),
                    ));
                }
            }
        }
        if let Some(criteria) = &self.criteria {
            for (i, c) in criteria.iter().enumerate() {
                if !CRITERIA_NAMES.contains(&c.as_str()) {
                    return Err(invalid(
                        &format!("criteria[{}]", i + 1),
                        format!("unknown criterion \"{c}\""),
                    ));
                }
            }
        }
        if let Some(q) = self.q_target {
            if !(q > 0.0 && q < 1.0) {
                return Err(invalid("q_target", format!("q = {q} must be in (0,1)")));
            }
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<NormedSpace> {
        NormedSpace::new(self.space.dim, self.space.p.0, self.space.weights.clone())
    }

    /// Builds the projector family: projectors, pair projectors (explicit
    /// kernels where given, orthogonal elsewhere) and, when it holds, the
    /// weak-consistency certificate.
    pub fn build_family(&self) -> Result<ProjectorFamily> {
        let space = self.build_space()?;
        let dim = space.dim();
        let mut projectors: Vec<Projector> = Vec::with_capacity(self.projectors.len());
        for spec in &self.projectors {
            let range = SubspaceBasis::new(dim, &spec.range)?;
            let p = match &spec.kernel {
                None => make_orthogonal_projector(&range, &space)?,
                Some(kernel) => {
                    let kernel = SubspaceBasis::new(dim, kernel)?;
                    make_oblique_projector(&range, &kernel, &space)?
                }
            };
            projectors.push(p);
        }
        let mut family = ProjectorFamily::new(space, projectors)?;
        if let PairProjectorsSpec::Explicit(list) = &self.pair_projectors {
            for spec in list {
                let (j1, j2) = (spec.pair.0 - 1, spec.pair.1 - 1);
                let kernel = SubspaceBasis::new(dim, &spec.kernel)?;
                let pp = make_pair_projector(
                    family.projector(j1),
                    family.projector(j2),
                    (j1, j2),
                    PairMode::Explicit(kernel),
                )?;
                family.insert_pair(pp);
            }
        }
        family.build_pairs_auto()?;
        family.alphas = self.alphas.clone();
        // Consistency is evidence, not a requirement: keep the certificate
        // when it exists, run without one otherwise.
        let _ = family.certify_weak();
        Ok(family)
    }

    /// Materializes the schedule, if the scenario carries one.
    pub fn build_schedule(&self) -> Result<Option<Schedule>> {
        let n = self.projectors.len();
        let Some(s) = &self.schedule else {
            return Ok(None);
        };
        let kind = match s.kind.as_str() {
            "averaged" => ScheduleKind::Averaged {
                alphas: self.alphas.clone(),
            },
            "cyclic" => ScheduleKind::Cyclic,
            "quasi_periodic" => ScheduleKind::QuasiPeriodic {
                m: s.m.expect("validated"),
                tau: s
                    .tau
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|t| t - 1)
                    .collect(),
            },
            "random" => ScheduleKind::Random {
                mu: s.mu.clone().expect("validated"),
                seed: s.seed.expect("validated"),
                lambda: s.lambda,
            },
            other => return Err(invalid("schedule.kind", format!("unknown kind \"{other}\""))),
        };
        make_schedule(
            ScheduleSpec {
                kind,
                steps: s.steps,
            },
            n,
        )
        .map(Some)
    }

    /// Requested criterion names, defaulting to the ones the scenario can
    /// support: always "averaged" and "cyclic", plus the schedule's own
    /// kind when it is quasi-periodic or random.
    pub fn requested_criteria(&self) -> Vec<String> {
        if let Some(c) = &self.criteria {
            return c.clone();
        }
        let mut out = vec!["averaged".to_string(), "cyclic".to_string()];
        if let Some(s) = &self.schedule {
            match s.kind.as_str() {
                "quasi_periodic" => out.push("quasi_periodic".into()),
                "random" => out.push("random".into()),
                _ => {}
            }
        }
        out
    }

    pub fn q_target_or_default(&self) -> f64 {
        self.q_target.unwrap_or(0.5)
    }
}
