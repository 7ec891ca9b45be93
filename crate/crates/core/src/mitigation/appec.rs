//! Adaptive partial mitigation: a ladder of sample sets with increasing `m`.

use serde::{Deserialize, Serialize};

use super::estimators::IpecEvaluator;
use super::sample_set::{build_sample_set_stream, circuit_channels, InstanceMode};
use crate::cost::{budget, StageTrace};
use crate::error::{Error, Result};
use crate::noise::{gamma, PauliChannel};
use crate::optimize::{try_nelder_mead, Trace};
use crate::qaoa::{energy, n_cut, Mode, QaoaProblem};
use crate::OptimizerConfig;

/// When to end a run before the last stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Run every stage.
    Never,
    /// Stop after a stage `≥ after_stage` whose ideal cut value improved on the
    /// previous stage by less than `threshold`.
    MinImprovement { threshold: f64, after_stage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApecStage {
    pub m: f64,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApecSchedule {
    /// Mitigated stages; the unmitigated stage 0 is implicit.
    pub stages: Vec<ApecStage>,
    pub stop: StopRule,
    /// Master seed; stage `i` draws its set from stream `i`.
    pub seed: u64,
}

impl ApecSchedule {
    /// Stages at `m` in `fractions`, budgets `round(Q·Γ(m)²)` for `channels`.
    pub fn from_fractions(fractions: &[f64], q: f64, channels: &[PauliChannel], seed: u64) -> Result<Self> {
        let stages = fractions
            .iter()
            .map(|&m| Ok(ApecStage { m, budget: budget(q, gamma(channels, m)?) }))
            .collect::<Result<_>>()?;
        let s = ApecSchedule { stages, stop: StopRule::Never, seed };
        s.validate()?;
        Ok(s)
    }

    /// `m_i = i/N` for `i = 1..=N`.
    pub fn linear(n: usize, q: f64, channels: &[PauliChannel], seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("schedule needs at least one stage".into()));
        }
        let ms: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        Self::from_fractions(&ms, q, channels, seed)
    }

    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Invalid("schedule needs at least one stage".into()));
        }
        let mut prev = 0.0;
        for (i, s) in self.stages.iter().enumerate() {
            if !(s.m > prev && s.m <= 1.0) && !(i == 0 && s.m == 0.0) {
                return Err(Error::Invalid(format!("stage fractions must increase within (0, 1]: stage {}", i + 1)));
            }
            if s.budget == 0 {
                return Err(Error::Invalid(format!("stage {} has an empty budget", i + 1)));
            }
            prev = s.m;
        }
        Ok(())
    }
}

fn stage_result(
    problem: &QaoaProblem,
    stage: usize,
    m: f64,
    budget: usize,
    gamma: f64,
    trace: &Trace<f64>,
) -> Result<StageTrace> {
    let best = trace.best();
    Ok(StageTrace {
        stage,
        m,
        steps: trace.num_steps(),
        budget,
        gamma,
        params: best.params.clone(),
        objective: best.objective,
        n_cut_ideal: n_cut(problem, &best.params, Mode::Ideal)?,
        distance: None,
        evaluations: trace.evaluations,
        converged: trace.converged,
    })
}

/// Optimizes the unmitigated objective, then each scheduled stage in turn, warm-starting
/// from the previous optimum. Returns the stage summaries and their step traces.
pub fn appec_run_traced(
    problem: &QaoaProblem,
    channel: &PauliChannel,
    schedule: &ApecSchedule,
    config: &OptimizerConfig,
    x0: &[f64],
) -> Result<Vec<(StageTrace, Trace<f64>)>> {
    schedule.validate()?;
    problem.check_params(x0)?;
    let wrap = |stage: usize| move |e: Error| Error::Stage { stage, source: Box::new(e) };

    let noisy = try_nelder_mead(|x| energy(problem, x, Mode::Noisy(channel)), x0, config).map_err(wrap(0))?;
    let mut out = vec![(stage_result(problem, 0, 0.0, 1, 1.0, &noisy)?, noisy)];
    let channels = circuit_channels(&problem.noisy_ansatz(x0, channel)?);
    for (k, st) in schedule.stages.iter().enumerate() {
        let i = k + 1;
        let start = out.last().expect("stage 0 present").0.params.clone();
        let set = build_sample_set_stream(&channels, st.m, st.budget, schedule.seed, i as u64, InstanceMode::ExactExpectation)
            .map_err(wrap(i))?;
        let g = set.gamma();
        let ev = IpecEvaluator::new(problem, channel, set).map_err(wrap(i))?;
        let trace = try_nelder_mead(|x| ev.estimate(x).map(|e| e.value), &start, config).map_err(wrap(i))?;
        let summary = stage_result(problem, i, st.m, st.budget, g, &trace)?;
        let gain = summary.n_cut_ideal - out.last().expect("previous").0.n_cut_ideal;
        out.push((summary, trace));
        if let StopRule::MinImprovement { threshold, after_stage } = schedule.stop {
            if i >= after_stage && gain < threshold {
                break;
            }
        }
    }
    Ok(out)
}

/// [`appec_run_traced`] without the step traces.
pub fn appec_run(
    problem: &QaoaProblem,
    channel: &PauliChannel,
    schedule: &ApecSchedule,
    config: &OptimizerConfig,
    x0: &[f64],
) -> Result<Vec<StageTrace>> {
    Ok(appec_run_traced(problem, channel, schedule, config, x0)?.into_iter().map(|(s, _)| s).collect())
}

/// Single-stage full mitigation (`m = 1`, budget `round(Q·Γ²)`) from `x0`; the
/// reference `(s, S)` for cost ratios. Uses stream 0 of `seed`.
pub fn full_ipec_run(
    problem: &QaoaProblem,
    channel: &PauliChannel,
    q: f64,
    seed: u64,
    config: &OptimizerConfig,
    x0: &[f64],
) -> Result<(StageTrace, Trace<f64>)> {
    let channels = circuit_channels(&problem.noisy_ansatz(x0, channel)?);
    let s = budget(q, gamma(&channels, 1.0)?);
    let set = build_sample_set_stream(&channels, 1.0, s, seed, 0, InstanceMode::ExactExpectation)?;
    let g = set.gamma();
    let ev = IpecEvaluator::new(problem, channel, set)?;
    let trace = try_nelder_mead(|x| ev.estimate(x).map(|e| e.value), x0, config)?;
    Ok((stage_result(problem, 1, 1.0, s, g, &trace)?, trace))
}

/// Fills in each stage's distance to `reference`.
pub fn annotate_distance(stages: &mut [StageTrace], reference: &[f64]) -> Result<()> {
    for s in stages {
        s.distance = Some(crate::qaoa::distance(&s.params, reference)?);
    }
    Ok(())
}
