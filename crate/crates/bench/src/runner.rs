//! Strategy execution.

use std::collections::BTreeMap;
use std::time::Instant;

use appec::cost::{argmin_fab, cost_csv, cost_function_from_trace, eta, fit_ab, StageTrace};
use appec::learning::{fit_lindblad_rates, pauli_fidelities, simulate_cycle_benchmark};
use appec::mitigation::{
    annotate_distance, appec_run_traced, build_sample_set, circuit_channels, estimate_exact_mitigated, fidelity,
    full_ipec_run, linear_fit, mitigate_distribution, pec_estimate_fresh, zne_distribution, zne_estimate, ApecSchedule,
    EstimateRecord, InstanceMode, IpecEvaluator, StopRule, ZneConfig,
};
use appec::noise::{gamma, PauliChannel};
use appec::optimize::try_nelder_mead;
use appec::qaoa::{distance, energy, landscape_constraint_scan, landscape_line_scan, n_cut, Mode, QaoaProblem, ScanGrid};
use appec::rng::substream;
use appec::sim::{Circuit, Gate};
use appec::{DensityMatrix, Trace};

use crate::record::{CostData, DistributionData, LandscapeData, LearnData, ResultRecord, Row, RunSummary, Summary};
use crate::spec::{ExperimentSpec, LandscapeKind, NoiseSpec, ScanObjective, SpecError, Strategy};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: appec::Error,
    },
}

type Result<T> = std::result::Result<T, RunError>;

trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T>;
}

impl<T> Context<T> for appec::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| RunError::Core { context: what.into(), source })
    }
}

/// What a subcommand asks for; `run` follows the spec's strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Landscape,
    Cost,
    Learn,
    Distribution,
}

pub fn execute(spec: &ExperimentSpec, command: Command) -> Result<ResultRecord> {
    let start = Instant::now();
    let command = match (command, spec.strategy) {
        (Command::Run, Strategy::Landscape) => Command::Landscape,
        (Command::Run, Strategy::Learn) => Command::Learn,
        (Command::Run, Strategy::Distribution) => Command::Distribution,
        (c, _) => c,
    };
    let (rows, mut summary) = match command {
        Command::Run if spec.strategy == Strategy::Appec => appec(spec)?,
        Command::Run => restart_loop(spec, spec.restarts)?,
        Command::Landscape => (Vec::new(), landscape(spec)?),
        Command::Cost => (Vec::new(), cost(spec)?),
        Command::Learn => (Vec::new(), learn(spec)?),
        Command::Distribution => (Vec::new(), distribution(spec)?),
    };
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(ResultRecord { spec_hash: spec.hash(), name: spec.name.clone(), strategy: spec.strategy.to_string(), rows, summary })
}

fn noisy_n_cut(spec: &ExperimentSpec, problem: &QaoaProblem, params: &[f64]) -> Result<Option<f64>> {
    match &spec.noise {
        None => Ok(None),
        Some(_) => Ok(Some(n_cut(problem, params, Mode::Noisy(&spec.channel()?)).context("noisy cut value")?)),
    }
}

fn ideal_reference(spec: &ExperimentSpec, problem: &QaoaProblem) -> Result<Option<Vec<f64>>> {
    if !spec.reference_ideal {
        return Ok(None);
    }
    let t = try_nelder_mead(|x| energy(problem, x, Mode::Ideal), &spec.x0, &spec.optimizer).context("ideal reference")?;
    Ok(Some(t.best().params.clone()))
}

fn channels(problem: &QaoaProblem, x0: &[f64], channel: &PauliChannel) -> Result<Vec<PauliChannel>> {
    Ok(circuit_channels(&problem.noisy_ansatz(x0, channel).context("noisy ansatz")?))
}

fn instance_mode(spec: &ExperimentSpec) -> InstanceMode {
    spec.shots.map_or(InstanceMode::ExactExpectation, InstanceMode::Shots)
}

/// One labelled objective for a single optimizer run: the label, `m`, circuits per
/// evaluation, and the objective itself.
struct Objective<'a> {
    label: String,
    m: Option<f64>,
    budget: usize,
    f: Box<dyn FnMut(&[f64]) -> appec::Result<f64> + 'a>,
}

fn objectives<'a>(spec: &'a ExperimentSpec, problem: &'a QaoaProblem) -> Result<Vec<Objective<'a>>> {
    let strategy = spec.strategy;
    let channel = if strategy == Strategy::Ideal { None } else { Some(spec.channel()?) };
    Ok(match strategy {
        Strategy::Ideal => vec![Objective { label: "ideal".into(), m: None, budget: 1, f: Box::new(move |x| energy(problem, x, Mode::Ideal)) }],
        Strategy::Noisy => {
            let ch = channel.expect("noise present");
            vec![Objective { label: "noisy".into(), m: Some(0.0), budget: 1, f: Box::new(move |x| energy(problem, x, Mode::Noisy(&ch))) }]
        }
        Strategy::PecFresh => {
            let ch = channel.expect("noise present");
            let mut rng = substream(spec.seed()?, 0, 0);
            let size = spec.samples;
            vec![Objective {
                label: "pec_fresh".into(),
                m: Some(1.0),
                budget: size,
                f: Box::new(move |x| pec_estimate_fresh(problem, x, &ch, size, &mut rng).map(|e| e.value)),
            }]
        }
        Strategy::Ipec => {
            let ch = channel.expect("noise present");
            let set = build_sample_set(&channels(problem, &spec.x0, &ch)?, 1.0, spec.samples, spec.seed()?, instance_mode(spec))
                .context("sample set")?;
            let ev = IpecEvaluator::new(problem, &ch, set).context("IPEC evaluator")?;
            vec![Objective { label: "ipec".into(), m: Some(1.0), budget: spec.samples, f: Box::new(move |x| ev.estimate(x).map(|e| e.value)) }]
        }
        Strategy::Zne => {
            let ch = channel.expect("noise present");
            let configs: Vec<(String, ZneConfig)> = if spec.zne.pairwise {
                spec.zne.factors[1..]
                    .iter()
                    .map(|&m| Ok((format!("zne_1_{m}"), ZneConfig::two_point(m).context("zne factors")?)))
                    .collect::<Result<_>>()?
            } else {
                vec![("zne".into(), ZneConfig::new(spec.zne.factors.clone()).context("zne factors")?)]
            };
            configs
                .into_iter()
                .map(|(label, cfg)| {
                    let ch = ch.clone();
                    let budget = cfg.scale_factors.len();
                    Objective { label, m: None, budget, f: Box::new(move |x| zne_estimate(problem, x, &ch, &cfg)) }
                })
                .collect()
        }
        other => unreachable!("{other} is not a single-optimizer strategy"),
    })
}

fn push_rows(rows: &mut Vec<Row>, trace: &Trace, stage: usize, budget: usize, step_offset: usize, samples_offset: u64) {
    for s in &trace.steps {
        rows.push(Row {
            stage,
            step: step_offset + s.step,
            objective: s.objective,
            samples: samples_offset + (s.step * budget) as u64,
            params: s.params.clone(),
        });
    }
}

/// Runs the optimizer from `x0`, then `restarts` more times from each converged point.
/// Rows from restart `r` carry stage `r` and continue the step count. Strategies with
/// several objectives (pairwise ZNE) run each in turn, numbered as separate stages.
pub fn restart_loop(spec: &ExperimentSpec, restarts: usize) -> Result<(Vec<Row>, Summary)> {
    let problem = spec.problem();
    let reference = ideal_reference(spec, &problem)?;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut estimates = Vec::new();
    let mut stage = 0;
    for mut obj in objectives(spec, &problem)? {
        let mut x = spec.x0.clone();
        let mut steps = 0;
        let mut last = None;
        for r in 0..=restarts {
            let trace = try_nelder_mead(&mut obj.f, &x, &spec.optimizer).context(format!("{} run {r}", obj.label))?;
            push_rows(&mut rows, &trace, stage, obj.budget, steps, (steps * obj.budget) as u64);
            steps += trace.num_steps();
            x = trace.best().params.clone();
            stage += 1;
            last = Some(trace);
        }
        let trace = last.expect("at least one run");
        let best = trace.best();
        estimates.push(EstimateRecord::exact(&obj.label, best.objective, &best.params, steps));
        runs.push(RunSummary {
            label: obj.label.clone(),
            m: obj.m,
            steps,
            budget: obj.budget,
            params: best.params.clone(),
            objective: best.objective,
            n_cut_ideal: n_cut(&problem, &best.params, Mode::Ideal).context("ideal cut value")?,
            n_cut_noisy: noisy_n_cut(spec, &problem, &best.params)?,
            distance: reference.as_ref().map(|r| distance(&best.params, r)).transpose().context("distance")?,
            converged: trace.converged,
        });
    }
    let last = runs.last().expect("at least one objective").clone();
    Ok((
        rows,
        Summary {
            params: Some(last.params),
            n_cut_ideal: Some(last.n_cut_ideal),
            n_cut_noisy: last.n_cut_noisy,
            distance: last.distance,
            runs,
            estimates,
            ..Summary::default()
        },
    ))
}

fn schedule(spec: &ExperimentSpec, stages: usize, chans: &[PauliChannel]) -> Result<ApecSchedule> {
    let a = &spec.appec;
    let seed = spec.seed()?;
    let s = if a.fractions.is_empty() || stages != a.stages {
        ApecSchedule::linear(stages, a.q, chans, seed)
    } else {
        ApecSchedule::from_fractions(&a.fractions, a.q, chans, seed)
    }
    .context("schedule")?;
    Ok(match a.stop_threshold {
        Some(threshold) => s.with_stop(StopRule::MinImprovement { threshold, after_stage: a.stop_after }),
        None => s,
    })
}

fn appec_stages(spec: &ExperimentSpec, stages: usize) -> Result<Vec<(StageTrace, Trace)>> {
    let problem = spec.problem();
    let ch = spec.channel()?;
    let sched = schedule(spec, stages, &channels(&problem, &spec.x0, &ch)?)?;
    appec_run_traced(&problem, &ch, &sched, &spec.optimizer, &spec.x0).context("adaptive run")
}

fn full_reference(spec: &ExperimentSpec) -> Result<StageTrace> {
    let problem = spec.problem();
    let ch = spec.channel()?;
    Ok(full_ipec_run(&problem, &ch, spec.appec.q, spec.seed()?, &spec.optimizer, &spec.x0).context("full IPEC reference")?.0)
}

fn stage_label(s: &StageTrace, n: usize) -> String {
    if s.stage == 0 {
        "noisy".into()
    } else {
        format!("{}/{n}", (s.m * n as f64).round())
    }
}

fn appec(spec: &ExperimentSpec) -> Result<(Vec<Row>, Summary)> {
    let problem = spec.problem();
    let stages_n = if spec.appec.fractions.is_empty() { spec.appec.stages } else { spec.appec.fractions.len() };
    let traced = appec_stages(spec, stages_n)?;
    let mut stages: Vec<StageTrace> = traced.iter().map(|(s, _)| s.clone()).collect();
    if let Some(r) = ideal_reference(spec, &problem)? {
        annotate_distance(&mut stages, &r).context("distance")?;
    }
    let mut rows = Vec::new();
    let (mut steps, mut samples) = (0, 0u64);
    for (s, (_, trace)) in stages.iter().zip(&traced) {
        push_rows(&mut rows, trace, s.stage, s.budget, steps, samples);
        steps += s.steps;
        samples += (s.steps * s.budget) as u64;
    }
    let full = if spec.appec.full_reference { Some(full_reference(spec)?) } else { None };
    let cutoff = spec.appec.cutoff.unwrap_or(usize::MAX);
    let eta = full.as_ref().map(|f| eta(&stages, (f.steps, f.budget), cutoff)).transpose().context("eta")?;
    let runs = stages
        .iter()
        .map(|s| Ok(RunSummary::from_stage(s, stage_label(s, stages_n), noisy_n_cut(spec, &problem, &s.params)?)))
        .collect::<Result<Vec<_>>>()?;
    let last = runs.last().expect("stage 0 present").clone();
    Ok((
        rows,
        Summary {
            params: Some(last.params),
            n_cut_ideal: Some(last.n_cut_ideal),
            n_cut_noisy: last.n_cut_noisy,
            distance: last.distance,
            eta,
            full_reference: full.map(|f| RunSummary::from_stage(&f, "full".into(), None)),
            estimates: stages.iter().map(|s| EstimateRecord::exact("appec", s.objective, &s.params, s.steps)).collect(),
            runs,
            ..Summary::default()
        },
    ))
}

/// Four times the mean per-term rate: the intensity the cost model expects.
fn model_intensity(spec: &ExperimentSpec) -> Result<f64> {
    Ok(match spec.noise.as_ref().ok_or(SpecError::Missing("noise.epsilon"))? {
        NoiseSpec::Quarter { epsilon } => *epsilon,
        _ => {
            let ch = spec.channel()?;
            4.0 * ch.terms().iter().map(|t| t.rate).sum::<f64>() / ch.terms().len().max(1) as f64
        }
    })
}

fn cost(spec: &ExperimentSpec) -> Result<Summary> {
    let full = full_reference(spec)?;
    let mut runs = BTreeMap::new();
    let mut f_values = BTreeMap::new();
    for &n in &spec.cost_stages {
        let stages: Vec<StageTrace> = appec_stages(spec, n)?.into_iter().map(|(s, _)| s).collect();
        f_values.insert(n, cost_function_from_trace(&stages, spec.appec.q).context("cost function")?);
        runs.insert(n, stages);
    }
    let csv = cost_csv(&runs, spec.appec.q, (full.steps, full.budget)).context("cost report")?;
    let epsilon_model = model_intensity(spec)?;
    let problem = spec.problem();
    let n_gates = problem.noisy_ansatz(&spec.x0, &spec.channel()?).context("noisy ansatz")?.noisy_locations().len();
    let (a, b) = fit_ab(&f_values, epsilon_model, n_gates).context("cost fit")?;
    let hi = spec.cost_stages.iter().copied().max().unwrap_or(1).max(10);
    Ok(Summary {
        cost: Some(CostData {
            csv,
            f_values: f_values.into_iter().collect(),
            a,
            b,
            argmin: argmin_fab(a, b, epsilon_model, n_gates, 1..=hi),
            epsilon_model,
            n_gates,
            full: (full.steps, full.budget),
        }),
        full_reference: Some(RunSummary::from_stage(&full, "full".into(), None)),
        ..Summary::default()
    })
}

fn distribution(spec: &ExperimentSpec) -> Result<Summary> {
    let problem = spec.problem();
    let ch = spec.channel()?;
    let x = &spec.x0;
    let target = problem.maxcut_distribution();
    let probs = |c: &Circuit| -> Result<Vec<f64>> {
        let mut rho = DensityMatrix::zero(c.n());
        rho.run(c).context("density simulation")?;
        Ok(rho.probabilities())
    };
    let ideal = probs(&problem.ansatz(x).context("ansatz")?)?;
    let noisy = probs(&problem.noisy_ansatz(x, &ch).context("noisy ansatz")?)?;
    let set = build_sample_set(&channels(&problem, x, &ch)?, 1.0, spec.samples, spec.seed()?, instance_mode(spec)).context("sample set")?;
    let md = mitigate_distribution(&problem, x, &ch, &set).context("IPEC distribution")?;
    let zne = zne_distribution(&problem, x, &ch, &ZneConfig::new(spec.zne.factors.clone()).context("zne factors")?)
        .context("ZNE distribution")?;
    let fid = |p: &[f64]| fidelity(p, &target).context("fidelity");
    let data = DistributionData {
        fidelity_noisy: fid(&noisy)?,
        fidelity_ipec: fid(&md.probabilities)?,
        fidelity_zne: fid(&zne)?,
        raw_sum: md.raw_sum,
        correction: md.correction,
        ideal,
        noisy,
        ipec: md.probabilities,
        zne,
    };
    Ok(Summary {
        params: Some(x.clone()),
        n_cut_ideal: Some(n_cut(&problem, x, Mode::Ideal).context("ideal cut value")?),
        n_cut_noisy: noisy_n_cut(spec, &problem, x)?,
        fidelity: Some(data.fidelity_ipec),
        distribution: Some(data),
        ..Summary::default()
    })
}

fn scan_objective<'a>(
    problem: &'a QaoaProblem,
    channel: Option<&'a PauliChannel>,
    o: ScanObjective,
) -> Result<impl Fn(&[f64]) -> appec::Result<f64> + Sync + 'a> {
    if o != ScanObjective::Ideal && channel.is_none() {
        return Err(SpecError::Missing("noise.epsilon").into());
    }
    Ok(move |x: &[f64]| match o {
        ScanObjective::Ideal => energy(problem, x, Mode::Ideal),
        ScanObjective::Noisy => energy(problem, x, Mode::Noisy(channel.expect("checked"))),
        ScanObjective::Mitigated { m } => estimate_exact_mitigated(problem, x, channel.expect("checked"), m),
    })
}

fn objective_name(o: ScanObjective) -> String {
    match o {
        ScanObjective::Ideal => "ideal".into(),
        ScanObjective::Noisy => "noisy".into(),
        ScanObjective::Mitigated { m } => format!("m={m}"),
    }
}

fn landscape(spec: &ExperimentSpec) -> Result<Summary> {
    let l = spec.landscape.as_ref().ok_or(SpecError::Missing("landscape.kind"))?;
    let problem = spec.problem();
    let channel = spec.noise.as_ref().map(|_| spec.channel()).transpose()?;
    let names = l.objectives.iter().map(|&o| objective_name(o)).collect();
    let data = match &l.kind {
        LandscapeKind::Constraint { half_width, points } => {
            let grid = ScanGrid { half_width: *half_width, points: *points };
            let scans = l
                .objectives
                .iter()
                .map(|&o| landscape_constraint_scan(&problem, &spec.x0, &grid, scan_objective(&problem, channel.as_ref(), o)?).context("landscape scan"))
                .collect::<Result<Vec<_>>>()?;
            let offsets = grid.offsets();
            let cols = scans[0].values[0].len();
            let mut points = Vec::new();
            for (i, r) in offsets.iter().enumerate() {
                for j in 0..cols {
                    let c = if cols == 1 { 0.0 } else { offsets[j] };
                    let mut row = vec![*r, c];
                    row.extend(scans.iter().map(|s| s.values[i][j]));
                    points.push(row);
                }
            }
            LandscapeData { objectives: names, coordinates: vec!["row_offset".into(), "col_offset".into()], points, slopes: Vec::new() }
        }
        LandscapeKind::Line { a, b, samples } => {
            let scans = l
                .objectives
                .iter()
                .map(|&o| landscape_line_scan(a, b, *samples, scan_objective(&problem, channel.as_ref(), o)?).context("line scan"))
                .collect::<Result<Vec<_>>>()?;
            let xs: Vec<f64> = scans[0].iter().map(|p| p.0).collect();
            let slopes = scans
                .iter()
                .map(|s| linear_fit(&xs, &s.iter().map(|p| p.1).collect::<Vec<_>>()).map(|f| f.1).context("slope"))
                .collect::<Result<_>>()?;
            let points = xs
                .iter()
                .enumerate()
                .map(|(k, &x)| std::iter::once(x).chain(scans.iter().map(|s| s[k].1)).collect())
                .collect();
            LandscapeData { objectives: names, coordinates: vec!["x".into()], points, slopes }
        }
    };
    Ok(Summary { params: Some(spec.x0.clone()), landscape: Some(data), ..Summary::default() })
}

/// Cycle benchmarking of a CNOT against the spec's noise as the hidden channel, then a
/// rate fit on the hidden channel's generators.
fn learn(spec: &ExperimentSpec) -> Result<Summary> {
    let hidden = spec.channel()?;
    let mut cycle = Circuit::new(2);
    cycle.push(Gate::cnot(0, 1)).context("cycle")?;
    let curves = simulate_cycle_benchmark(&cycle, &hidden, &spec.learn.depths, spec.learn.twirls, &mut substream(spec.seed()?, 0, 0))
        .context("cycle benchmarking")?;
    let (fids, failed) = pauli_fidelities(&curves);
    if let Some((b, e)) = failed.into_iter().next() {
        return Err(RunError::Core { context: format!("decay fit for basis {b}"), source: e });
    }
    let support: Vec<_> = hidden.terms().iter().map(|t| t.pauli).collect();
    let model = fit_lindblad_rates(&fids, &support).context("rate fit")?;
    let learned = model.channel(&[0, 1]).context("learned channel")?;
    let nm = model.to_noise_model("cx").context("noise model")?;
    Ok(Summary {
        learn: Some(LearnData {
            bases: fids.iter().map(|f| f.basis.to_string()).collect(),
            partners: fids.iter().map(|f| f.partner.to_string()).collect(),
            fidelities: fids.iter().map(|f| f.fidelity).collect(),
            support: support.iter().map(|p| p.to_string()).collect(),
            rates: model.rates.clone(),
            epsilons: model.epsilons(),
            true_epsilons: hidden.terms().iter().map(|t| t.rate).collect(),
            gamma_learned: gamma(&[learned], 1.0).context("gamma")?,
            gamma_true: gamma(&[hidden], 1.0).context("gamma")?,
            noise_model: serde_json::from_str(&nm.to_json()).expect("noise model json"),
        }),
        ..Summary::default()
    })
}
