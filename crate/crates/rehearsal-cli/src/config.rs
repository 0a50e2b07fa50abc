//! Run configuration: one TOML file with a flat section per concern.
//!
//! ```toml
//! [problem]
//! p = 500
//! n = 24
//! M = 24
//! T = 5
//! sigma = 0.0
//!
//! [ground_truth]
//! kind = "equal_gap"      # or "orthonormal"
//! gap_sq = 1.0
//! seed = 7
//!
//! [strategies]
//! names = ["concurrent", "sequential"]
//!
//! [run]
//! trials = 1000
//! seed = 0
//!
//! [sweep]
//! axis = "gap_sq"
//! values = [0.1, 0.3, 0.5]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use rehearsal::montecarlo::{Sampler, SweepAxis};
use rehearsal::problem::{equal_gap_limit, GroundTruthKind, ProblemConfig};
use rehearsal::theory::MemoryModel;
use rehearsal::trainers::{PartitionRule, SequentialOrder, StrategySpec};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub p: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub memory: usize,
    #[serde(rename = "T")]
    pub tasks: usize,
    pub sigma: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        let c = ProblemConfig::default();
        ProblemSection { p: c.p, n: c.n, memory: c.memory, tasks: c.tasks, sigma: c.sigma }
    }
}

impl ProblemSection {
    pub fn to_config(&self) -> ProblemConfig {
        ProblemConfig::new(self.p, self.n, self.memory, self.tasks, self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthChoice {
    EqualGap,
    Orthonormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundTruthSection {
    pub kind: GroundTruthChoice,
    pub gap_sq: f64,
    pub seed: u64,
}

impl Default for GroundTruthSection {
    fn default() -> Self {
        GroundTruthSection { kind: GroundTruthChoice::EqualGap, gap_sq: 1.0, seed: 7 }
    }
}

impl GroundTruthSection {
    pub fn kind_with_gap(&self, gap_sq: f64) -> GroundTruthKind {
        match self.kind {
            GroundTruthChoice::EqualGap => GroundTruthKind::EqualGap { gap_sq },
            GroundTruthChoice::Orthonormal => GroundTruthKind::Orthonormal,
        }
    }

    pub fn to_kind(&self) -> GroundTruthKind {
        self.kind_with_gap(self.gap_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Concurrent,
    Sequential,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridRule {
    GradientCosine,
    GapThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategiesSection {
    pub names: Vec<StrategyName>,
    pub sequential_order: SequentialOrderName,
    pub hybrid_rule: HybridRule,
    /// Cosine cut for `gradient_cosine`, squared-gap cut for `gap_threshold`.
    pub hybrid_tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequentialOrderName {
    OldestFirst,
    NewestFirst,
}

impl Default for StrategiesSection {
    fn default() -> Self {
        StrategiesSection {
            names: vec![StrategyName::Concurrent, StrategyName::Sequential],
            sequential_order: SequentialOrderName::OldestFirst,
            hybrid_rule: HybridRule::GradientCosine,
            hybrid_tau: 0.0,
        }
    }
}

impl StrategiesSection {
    pub fn specs(&self) -> Vec<StrategySpec> {
        self.names
            .iter()
            .map(|n| match n {
                StrategyName::Concurrent => StrategySpec::concurrent(),
                StrategyName::Sequential => {
                    let mut s = StrategySpec::sequential();
                    if self.sequential_order == SequentialOrderName::NewestFirst {
                        s.order = SequentialOrder::NewestFirst;
                    }
                    s
                }
                StrategyName::Hybrid => StrategySpec::hybrid(match self.hybrid_rule {
                    HybridRule::GradientCosine => PartitionRule::GradientCosine { tau: self.hybrid_tau },
                    HybridRule::GapThreshold => PartitionRule::GapThreshold { gap_tau: self.hybrid_tau },
                }),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub sampler: Sampler,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { trials: 1000, seed: 0, workers: None, sampler: Sampler::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheorySection {
    pub memory_model: MemoryModel,
}

impl Default for TheorySection {
    fn default() -> Self {
        TheorySection { memory_model: MemoryModel::Strict }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: SweepAxis,
    /// Explicit grid; when empty the grid is built from `start`, `stop`, `points`.
    pub values: Vec<f64>,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axis: SweepAxis::GapSq, values: Vec::new(), start: 0.1, stop: 1.9, points: 10, spacing: Spacing::Linear }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Vec<f64> {
        if !self.values.is_empty() {
            return self.values.clone();
        }
        if self.points == 1 {
            return vec![self.start];
        }
        let k = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / k;
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.stop - self.start),
                    Spacing::Geometric => self.start * (self.stop / self.start).powf(f),
                }
            })
            .map(|v| if self.axis == SweepAxis::GapSq || self.axis == SweepAxis::Sigma { v } else { v.round() })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Theorems,
    Identities,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub suite: Suite,
    pub identity_p: usize,
    pub identity_m: Vec<usize>,
    pub identity_trials: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { suite: Suite::All, identity_p: 100, identity_m: vec![10, 20], identity_trials: 10_000 }
    }
}

/// Everything needed to re-run a command bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub ground_truth: GroundTruthSection,
    pub strategies: StrategiesSection,
    pub run: RunSection,
    pub theory: TheorySection,
    pub sweep: SweepSection,
    pub verify: VerifySection,
}

fn bad(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), message: message.into() }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| text[..s.start.min(text.len())].lines().count().to_string());
            bad(&field.map_or_else(|| "file".into(), |l| format!("line {l}")), e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn problem_config(&self) -> ProblemConfig {
        self.problem.to_config()
    }

    fn validate_problem(&self) -> Result<(), CliError> {
        self.validate_problem_shape()?;
        let p = &self.problem;
        if p.p <= p.n + p.memory + 1 {
            return Err(bad("problem.p", format!("p > n + M + 1 violated: p = {}, n + M + 1 = {}", p.p, p.n + p.memory + 1)));
        }
        Ok(())
    }

    fn validate_ground_truth(&self, gap_sq: f64) -> Result<(), CliError> {
        if self.ground_truth.kind == GroundTruthChoice::EqualGap {
            let limit = equal_gap_limit(self.problem.tasks);
            if !(gap_sq.is_finite() && gap_sq >= 0.0 && gap_sq < limit) {
                return Err(bad("ground_truth.gap_sq", format!("gap_sq = {gap_sq} must lie in [0, {limit}) for T = {}", self.problem.tasks)));
            }
        }
        if self.ground_truth.kind == GroundTruthChoice::Orthonormal && self.problem.p < self.problem.tasks {
            return Err(bad("ground_truth.kind", "orthonormal ground truths need p >= T"));
        }
        Ok(())
    }

    fn validate_strategies(&self) -> Result<(), CliError> {
        if self.strategies.names.is_empty() {
            return Err(bad("strategies.names", "at least one strategy is required"));
        }
        let mut seen = self.strategies.names.clone();
        seen.sort_by_key(|s| *s as u8);
        seen.dedup();
        if seen.len() != self.strategies.names.len() {
            return Err(bad("strategies.names", "strategies must be distinct"));
        }
        if !self.strategies.hybrid_tau.is_finite() {
            return Err(bad("strategies.hybrid_tau", "must be finite"));
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), CliError> {
        if self.run.trials < 2 {
            return Err(bad("run.trials", format!("standard error undefined for {} trial(s); need at least 2", self.run.trials)));
        }
        if self.run.workers == Some(0) {
            return Err(bad("run.workers", "workers must be at least 1"));
        }
        Ok(())
    }

    pub fn validate_theory(&self) -> Result<(), CliError> {
        self.validate_problem()?;
        self.validate_ground_truth(self.ground_truth.gap_sq)?;
        self.validate_strategies()?;
        if self.theory.memory_model == MemoryModel::Strict {
            let (m, t) = (self.problem.memory, self.problem.tasks);
            if let Some(k) = (1..t).find(|k| m % k != 0) {
                return Err(bad("theory.memory_model", format!("strict model needs (t-1) | M for every t; M = {m} is not divisible by {k}")));
            }
        }
        Ok(())
    }

    pub fn validate_simulate(&self) -> Result<(), CliError> {
        self.validate_problem()?;
        self.validate_ground_truth(self.ground_truth.gap_sq)?;
        self.validate_strategies()?;
        self.validate_run()
    }

    pub fn validate_sweep(&self) -> Result<(), CliError> {
        self.validate_strategies()?;
        self.validate_run()?;
        let s = &self.sweep;
        let grid = s.grid();
        if grid.is_empty() {
            return Err(bad("sweep.values", "grid is empty; give values or points >= 1"));
        }
        if s.values.is_empty() && s.spacing == Spacing::Geometric && !(s.start > 0.0 && s.stop > 0.0) {
            return Err(bad("sweep.start", "geometric spacing needs positive start and stop"));
        }
        if grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(bad("sweep.values", "grid values must be finite and non-negative"));
        }
        if s.axis == SweepAxis::GapSq && self.ground_truth.kind != GroundTruthChoice::EqualGap {
            return Err(bad("sweep.axis", "a gap_sq sweep needs equal_gap ground truths"));
        }
        self.validate_problem_shape()?;
        if s.axis != SweepAxis::GapSq {
            self.validate_ground_truth(self.ground_truth.gap_sq)?;
        }
        Ok(())
    }

    fn validate_problem_shape(&self) -> Result<(), CliError> {
        let p = &self.problem;
        if p.tasks < 1 {
            return Err(bad("problem.T", "T must be at least 1"));
        }
        if p.n < 1 {
            return Err(bad("problem.n", "n must be at least 1"));
        }
        if !(p.sigma.is_finite() && p.sigma >= 0.0) {
            return Err(bad("problem.sigma", format!("sigma = {} must be finite and non-negative", p.sigma)));
        }
        Ok(())
    }

    pub fn validate_verify(&self) -> Result<(), CliError> {
        let v = &self.verify;
        if v.identity_trials < 2 {
            return Err(bad("verify.identity_trials", "need at least 2 trials"));
        }
        if v.identity_m.is_empty() {
            return Err(bad("verify.identity_m", "at least one block size is required"));
        }
        if let Some(&m) = v.identity_m.iter().find(|&&m| m == 0 || v.identity_p <= m + 1) {
            return Err(bad("verify.identity_m", format!("m = {m} must satisfy 1 <= m < p - 1 = {}", v.identity_p.saturating_sub(1))));
        }
        if self.run.workers == Some(0) {
            return Err(bad("run.workers", "workers must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setting() {
        let c = RunConfig::default();
        assert_eq!((c.problem.tasks, c.problem.p, c.problem.n, c.problem.memory), (5, 500, 24, 24));
        assert_eq!(c.problem.sigma, 0.0);
        assert_eq!(c.run.trials, 1000);
        assert_eq!(c.sweep.grid().len(), 10);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.run.workers = Some(3);
        c.sweep.values = vec![0.5, 1.5];
        c.strategies.names.push(StrategyName::Hybrid);
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_configs_round_trip(
            p in 2usize..100_000, n in 1usize..500, m in 0usize..500, t in 1usize..20,
            sigma in 0.0f64..10.0, trials in 2usize..100_000, seed in proptest::num::u64::ANY,
            gap in 0.0f64..2.0, values in proptest::collection::vec(-1e6f64..1e6, 0..6),
        ) {
            let c = RunConfig {
                problem: ProblemSection { p, n, memory: m, tasks: t, sigma },
                run: RunSection { trials, seed, ..Default::default() },
                ground_truth: GroundTruthSection { gap_sq: gap, ..Default::default() },
                sweep: SweepSection { values, ..Default::default() },
                ..Default::default()
            };
            proptest::prop_assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        }
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml("[problem]\nM = 12\n[run]\ntrials = 50\n").unwrap();
        assert_eq!(c.problem.memory, 12);
        assert_eq!(c.problem.p, 500);
        assert_eq!(c.run.trials, 50);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(RunConfig::from_toml("[problem]\nq = 3\n"), Err(CliError::Config { .. })));
    }

    #[test]
    fn invalid_dimension_names_field() {
        let c = RunConfig::from_toml("[problem]\np = 40\n").unwrap();
        match c.validate_theory() {
            Err(CliError::Config { field, message }) => {
                assert_eq!(field, "problem.p");
                assert!(message.contains("p > n + M + 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_trial_rejected() {
        let c = RunConfig::from_toml("[run]\ntrials = 1\n").unwrap();
        assert!(matches!(c.validate_simulate(), Err(CliError::Config { field, .. }) if field == "run.trials"));
    }

    #[test]
    fn strict_model_divisibility() {
        let c = RunConfig::from_toml("[problem]\nM = 10\n").unwrap();
        assert!(matches!(c.validate_theory(), Err(CliError::Config { field, .. }) if field == "theory.memory_model"));
    }

    #[test]
    fn geometric_grid() {
        let s = SweepSection { axis: SweepAxis::P, start: 1000.0, stop: 1e6, points: 4, spacing: Spacing::Geometric, values: vec![] };
        assert_eq!(s.grid(), vec![1000.0, 10000.0, 100000.0, 1e6]);
    }
}
