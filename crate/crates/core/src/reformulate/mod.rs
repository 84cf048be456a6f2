//! Iterative gradient-variance maximization by semantics-preserving rewrites.
//!
//! Each iteration builds one candidate per enabled strategy, in fixed order,
//! and accepts the one with the largest strictly improved gradient spread
//! that passes the semantic check. Earlier strategies win ties. The loop
//! stops when the target is reached, the iteration cap is hit, or no
//! candidate improves. All spreads are estimated with one shared sample seed.

mod map;
mod semantics;
mod strategies;

use serde::{Deserialize, Serialize};

pub use map::{AuxVar, Literal, VariableMap};
pub use semantics::{
    preserves_semantics, CheckMode, SemanticCheck, SemanticEvidence, Violation, EXHAUSTIVE_LIMIT, SAMPLED_PAIRS,
};
pub use strategies::{
    select_aux_pair, strat_auxiliary_variables, strat_constraint_relaxation, strat_penalty_scaling,
    strat_variable_substitution, AuxPenalty, Candidate, MaskPolicy,
};

use crate::error::{Error, Result};
use crate::landscape::{gradient_variance_with, Normalization, DEFAULT_SAMPLES};
use crate::qubo::{InstanceFile, QuboInstance};

pub const DEFAULT_MAX_ITER: usize = 15;
pub const DEFAULT_PENALTY_SCALE: f64 = 1.5;
pub const DEFAULT_AUX_MARGIN: f64 = 0.8;
pub const DEFAULT_RELAXATION_GRID: [f64; 7] = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    VariableSubstitution,
    PenaltyScaling,
    AuxiliaryVariables,
    ConstraintRelaxation,
}

impl StrategyId {
    /// Evaluation order.
    pub const ALL: [StrategyId; 4] = [
        StrategyId::VariableSubstitution,
        StrategyId::PenaltyScaling,
        StrategyId::AuxiliaryVariables,
        StrategyId::ConstraintRelaxation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyId::VariableSubstitution => "substitution",
            StrategyId::PenaltyScaling => "penalty_scaling",
            StrategyId::AuxiliaryVariables => "auxiliary",
            StrategyId::ConstraintRelaxation => "relaxation",
        }
    }
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    /// Constraint multiplier for penalty scaling; must exceed 1.
    pub penalty_scale: f64,
    pub mask: MaskPolicy,
    pub aux_penalty: AuxPenalty,
    /// Multipliers tried by constraint relaxation.
    pub relaxation_grid: Vec<f64>,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self {
            penalty_scale: DEFAULT_PENALTY_SCALE,
            mask: MaskPolicy::default(),
            aux_penalty: AuxPenalty::Relative(DEFAULT_AUX_MARGIN),
            relaxation_grid: DEFAULT_RELAXATION_GRID.to_vec(),
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_scale > 1.0 && self.penalty_scale.is_finite()) {
            return Err(Error::invalid(format!("penalty scale must exceed 1, got {}", self.penalty_scale)));
        }
        let lambda = match self.aux_penalty {
            AuxPenalty::Absolute(v) | AuxPenalty::Relative(v) => v,
        };
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("auxiliary penalty must be positive, got {lambda}")));
        }
        if self.relaxation_grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("relaxation multipliers must be positive"));
        }
        Ok(())
    }
}

/// Gradient-spread estimator shared by every candidate in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaProbe {
    pub num_samples: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

impl SigmaProbe {
    pub fn sigma(&self, instance: &QuboInstance) -> Result<f64> {
        Ok(gradient_variance_with(instance, self.num_samples, self.seed, self.normalization)?.sigma_grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReformulateOptions {
    /// Stop once the spread reaches this value; `None` runs until no candidate improves.
    pub target_sigma: Option<f64>,
    pub max_iter: usize,
    pub strategies: Vec<StrategyId>,
    pub params: StrategyParams,
    pub num_samples: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub check: SemanticCheck,
}

impl Default for ReformulateOptions {
    fn default() -> Self {
        Self {
            target_sigma: None,
            max_iter: DEFAULT_MAX_ITER,
            strategies: StrategyId::ALL.to_vec(),
            params: StrategyParams::default(),
            num_samples: DEFAULT_SAMPLES,
            seed: 0,
            normalization: Normalization::PerVariable,
            check: SemanticCheck::default(),
        }
    }
}

impl ReformulateOptions {
    pub fn probe(&self) -> SigmaProbe {
        SigmaProbe { num_samples: self.num_samples, seed: self.seed, normalization: self.normalization }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.target_sigma.filter(|t| !(*t > 0.0)) {
            return Err(Error::invalid(format!("target sigma must be positive, got {t}")));
        }
        if self.strategies.is_empty() {
            return Err(Error::invalid("at least one strategy must be enabled"));
        }
        if self.num_samples < 2 {
            return Err(Error::invalid("need at least 2 variance samples"));
        }
        self.params.validate()
    }
}

/// One candidate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub strategy: StrategyId,
    pub sigma_before: f64,
    /// Candidate spread; absent when the strategy did not apply.
    pub sigma_after: Option<f64>,
    pub accepted: bool,
    pub n_before: usize,
    pub n_after: Option<usize>,
    /// Present when the candidate improved enough to be checked.
    pub check: Option<SemanticEvidence>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    MaxIterations,
    NoImprovement,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TargetReached => "target_reached",
            Termination::MaxIterations => "max_iterations",
            Termination::NoImprovement => "no_improvement",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReformulationTrace {
    pub steps: Vec<StepRecord>,
    pub iterations: usize,
    pub initial_sigma: f64,
    pub final_sigma: f64,
    pub initial_n: usize,
    pub final_n: usize,
    pub termination: Termination,
    pub variable_map: VariableMap,
    pub initial: InstanceFile,
    #[serde(rename = "final")]
    pub final_instance: InstanceFile,
}

impl ReformulationTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.accepted)
    }

    /// Spread after each accepted step, starting with the initial value.
    pub fn sigma_chain(&self) -> Vec<f64> {
        std::iter::once(self.initial_sigma).chain(self.accepted().filter_map(|s| s.sigma_after)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Ctx<'a> {
    original: &'a QuboInstance,
    options: &'a ReformulateOptions,
    probe: SigmaProbe,
}

impl Ctx<'_> {
    fn build(&self, id: StrategyId, current: &Candidate) -> Result<Candidate> {
        let (inst, map) = (&current.instance, &current.map);
        let params = &self.options.params;
        match id {
            StrategyId::VariableSubstitution => {
                let mask = params.mask.select(inst, map);
                if mask.is_empty() {
                    return Err(Error::StrategyInapplicable("mask policy selected no variables".into()));
                }
                strat_variable_substitution(inst, map, &mask)
            }
            StrategyId::PenaltyScaling => strat_penalty_scaling(inst, map, params.penalty_scale),
            StrategyId::AuxiliaryVariables => {
                let pair = select_aux_pair(inst, map)
                    .ok_or_else(|| Error::StrategyInapplicable("no eligible variable pair".into()))?;
                strat_auxiliary_variables(inst, map, &[pair], params.aux_penalty)
            }
            StrategyId::ConstraintRelaxation => {
                let grid = &params.relaxation_grid;
                strat_constraint_relaxation(inst, map, self.original, grid, &self.probe, &self.options.check)
                    .map(|(c, _)| c)
            }
        }
    }
}

/// Runs the reformulation loop and returns the best instance along the
/// accepted chain together with its trace.
pub fn reformulate(instance: &QuboInstance, options: &ReformulateOptions) -> Result<(QuboInstance, ReformulationTrace)> {
    options.validate()?;
    let ctx = Ctx { original: instance, options, probe: options.probe() };
    let initial_sigma = ctx.probe.sigma(instance)?;
    let mut current = Candidate::identity(instance);
    let mut sigma = initial_sigma;
    let mut steps = Vec::new();
    let mut iterations = 0;
    let enabled: Vec<StrategyId> = StrategyId::ALL.into_iter().filter(|s| options.strategies.contains(s)).collect();

    let termination = loop {
        if options.target_sigma.is_some_and(|t| sigma >= t) {
            break Termination::TargetReached;
        }
        if iterations >= options.max_iter {
            break Termination::MaxIterations;
        }
        iterations += 1;
        let first = steps.len();
        let mut best: Option<(usize, Candidate, f64)> = None;
        for &id in &enabled {
            let mut step = StepRecord {
                iteration: iterations,
                strategy: id,
                sigma_before: sigma,
                sigma_after: None,
                accepted: false,
                n_before: current.instance.n(),
                n_after: None,
                check: None,
                note: None,
            };
            match ctx.build(id, &current) {
                Err(Error::StrategyInapplicable(why)) => step.note = Some(why),
                Err(e) => return Err(e),
                Ok(cand) => {
                    let s = ctx.probe.sigma(&cand.instance)?;
                    step.sigma_after = Some(s);
                    step.n_after = Some(cand.instance.n());
                    let bar = best.as_ref().map_or(sigma, |b| b.2);
                    if s > bar {
                        let ev = preserves_semantics(&cand.instance, instance, &cand.map, &options.check);
                        if ev.passed {
                            best = Some((steps.len(), cand, s));
                        } else {
                            step.note = Some("semantic check failed".into());
                        }
                        step.check = Some(ev);
                    } else {
                        step.note = Some("no improvement".into());
                    }
                }
            }
            steps.push(step);
        }
        let Some((at, cand, s)) = best else {
            break Termination::NoImprovement;
        };
        for st in &mut steps[first..] {
            if st.check.as_ref().is_some_and(|c| c.passed) {
                st.note = Some("outranked by a later candidate".into());
            }
        }
        steps[at].accepted = true;
        steps[at].note = None;
        current = cand;
        sigma = s;
    };

    if current.map.current_len() != current.instance.n() || current.map.original_len() != instance.n() {
        return Err(Error::Integrity("variable map does not describe the final instance".into()));
    }
    let trace = ReformulationTrace {
        steps,
        iterations,
        initial_sigma,
        final_sigma: sigma,
        initial_n: instance.n(),
        final_n: current.instance.n(),
        termination,
        variable_map: current.map.clone(),
        initial: InstanceFile::from(instance),
        final_instance: InstanceFile::from(&current.instance),
    };
    Ok((current.instance, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_erdos_renyi, gen_graph_partition, gen_maxcut, gen_synthetic};
    use crate::landscape::landscape_scan;

    #[test]
    fn target_below_initial_returns_original() {
        let inst = gen_synthetic(6, 0.0, 2.0, 1).unwrap();
        let opts = ReformulateOptions { target_sigma: Some(1e-6), ..Default::default() };
        let (out, trace) = reformulate(&inst, &opts).unwrap();
        assert_eq!(out, inst);
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.termination, Termination::TargetReached);
    }

    #[test]
    fn zero_matrix_is_returned_unchanged() {
        let inst = QuboInstance::zeros(5).unwrap();
        let (out, trace) = reformulate(&inst, &ReformulateOptions::default()).unwrap();
        assert_eq!(out, inst);
        assert_eq!(trace.termination, Termination::NoImprovement);
        assert_eq!(trace.accepted().count(), 0);
    }

    #[test]
    fn rejects_bad_options() {
        let inst = QuboInstance::zeros(3).unwrap();
        for opts in [
            ReformulateOptions { target_sigma: Some(0.0), ..Default::default() },
            ReformulateOptions { strategies: vec![], ..Default::default() },
            ReformulateOptions {
                params: StrategyParams { penalty_scale: 1.0, ..Default::default() },
                ..Default::default()
            },
        ] {
            assert!(matches!(reformulate(&inst, &opts), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn maxcut_n12_increases_sigma_and_keeps_minimizers() {
        let g = gen_erdos_renyi(12, 0.4, (1.0, 10.0), 3).unwrap();
        let inst = gen_maxcut(&g).unwrap();
        // Keeps the final instance small enough to scan.
        let opts = ReformulateOptions { max_iter: 8, ..Default::default() };
        let (out, trace) = reformulate(&inst, &opts).unwrap();
        assert!(trace.final_sigma > trace.initial_sigma);
        let chain = trace.sigma_chain();
        assert!(chain.windows(2).all(|w| w[1] > w[0]));
        assert!(trace.iterations <= 8);

        // Minimizers of the final instance, projected, equal the original ones.
        let orig = landscape_scan(&inst).unwrap();
        let fin = landscape_scan(&out).unwrap();
        let map = &trace.variable_map;
        let mut projected: Vec<u64> = fin
            .minimizers
            .iter()
            .map(|&k| {
                let bits = crate::qubo::bits_from_index(k, out.n());
                let x = map.project(&bits[..]);
                x.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum()
            })
            .collect();
        projected.sort_unstable();
        projected.dedup();
        let mut expected = orig.minimizers.clone();
        expected.sort_unstable();
        assert_eq!(projected, expected);
    }

    #[test]
    fn graph_partition_relaxation_keeps_balanced_minimizers() {
        let g = gen_erdos_renyi(10, 0.5, (1.0, 2.0), 4).unwrap();
        let inst = gen_graph_partition(&g, 2.0 * g.total_weight()).unwrap();
        let opts = ReformulateOptions { strategies: vec![StrategyId::ConstraintRelaxation], ..Default::default() };
        let (out, trace) = reformulate(&inst, &opts).unwrap();
        let orig = landscape_scan(&inst).unwrap();
        let fin = landscape_scan(&out).unwrap();
        assert_eq!(orig.minimizers, fin.minimizers);
        for &k in &fin.minimizers {
            assert_eq!(k.count_ones(), 5);
        }
        for s in trace.accepted() {
            assert!(s.check.as_ref().unwrap().passed);
        }
    }

    #[test]
    fn trace_round_trips_through_json() {
        let inst = gen_synthetic(6, 0.0, 2.0, 9).unwrap();
        let (_, trace) = reformulate(&inst, &ReformulateOptions { max_iter: 3, ..Default::default() }).unwrap();
        let back: ReformulationTrace = serde_json::from_str(&trace.to_json().unwrap()).unwrap();
        assert_eq!(back.steps, trace.steps);
        assert_eq!(back.variable_map, trace.variable_map);
    }
}
