//! Result records and the CSV / JSON files written for each run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use appec::cost::StageTrace;
use appec::mitigation::{outcome_label, EstimateRecord};

/// One optimizer step. `samples` counts circuits used up to and including this step
/// (`steps × budget` summed over earlier stages).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub stage: usize,
    pub step: usize,
    pub objective: f64,
    pub samples: u64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionData {
    pub ideal: Vec<f64>,
    pub noisy: Vec<f64>,
    pub ipec: Vec<f64>,
    pub zne: Vec<f64>,
    pub fidelity_noisy: f64,
    pub fidelity_ipec: f64,
    pub fidelity_zne: f64,
    /// Sum of the IPEC probabilities before the normalisation correction.
    pub raw_sum: f64,
    pub correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeData {
    /// Column names of `points`, after the coordinates.
    pub objectives: Vec<String>,
    /// Coordinate names: `row_offset, col_offset` or `x`.
    pub coordinates: Vec<String>,
    pub points: Vec<Vec<f64>>,
    /// Least-squares slope along `x` per objective (line scans only).
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostData {
    pub csv: String,
    pub f_values: Vec<(usize, f64)>,
    pub a: f64,
    pub b: f64,
    pub argmin: usize,
    /// Intensity fed to the cost model (four times the per-term rate).
    pub epsilon_model: f64,
    pub n_gates: usize,
    pub full: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnData {
    pub bases: Vec<String>,
    pub partners: Vec<String>,
    pub fidelities: Vec<f64>,
    pub support: Vec<String>,
    pub rates: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub true_epsilons: Vec<f64>,
    pub gamma_learned: f64,
    pub gamma_true: f64,
    pub noise_model: serde_json::Value,
}

/// Outcome of one optimizer run or stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub m: Option<f64>,
    pub steps: usize,
    pub budget: usize,
    pub params: Vec<f64>,
    pub objective: f64,
    pub n_cut_ideal: f64,
    pub n_cut_noisy: Option<f64>,
    pub distance: Option<f64>,
    pub converged: bool,
}

impl RunSummary {
    pub fn from_stage(s: &StageTrace, label: String, n_cut_noisy: Option<f64>) -> Self {
        RunSummary {
            label,
            m: Some(s.m),
            steps: s.steps,
            budget: s.budget,
            params: s.params.clone(),
            objective: s.objective,
            n_cut_ideal: s.n_cut_ideal,
            n_cut_noisy,
            distance: s.distance,
            converged: s.converged,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Final optimum: the last run or stage.
    pub params: Option<Vec<f64>>,
    pub n_cut_ideal: Option<f64>,
    pub n_cut_noisy: Option<f64>,
    pub distance: Option<f64>,
    pub fidelity: Option<f64>,
    pub eta: Option<f64>,
    pub runs: Vec<RunSummary>,
    pub full_reference: Option<RunSummary>,
    pub estimates: Vec<EstimateRecord>,
    pub distribution: Option<DistributionData>,
    pub landscape: Option<LandscapeData>,
    pub cost: Option<CostData>,
    pub learn: Option<LearnData>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub spec_hash: String,
    pub name: String,
    pub strategy: String,
    #[serde(skip)]
    pub rows: Vec<Row>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectory,
    Landscape,
    Distribution,
    Cost,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [PlotKind::Trajectory, PlotKind::Landscape, PlotKind::Distribution, PlotKind::Cost];

    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory.csv",
            PlotKind::Landscape => "landscape.csv",
            PlotKind::Distribution => "distribution.csv",
            PlotKind::Cost => "cost.csv",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("record has no {0:?} data")]
pub struct MissingData(pub PlotKind);

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ResultRecord {
    /// `stage,step,objective,samples,x0..x{k-1}`.
    pub fn trace_csv(&self) -> String {
        let dim = self.rows.first().map_or(0, |r| r.params.len());
        let mut out = String::from("stage,step,objective,samples");
        for i in 0..dim {
            write!(out, ",x{i}").expect("string write");
        }
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.stage, r.step, r.objective, r.samples, join(r.params.iter().copied())).expect("string write");
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Plot-ready CSV. Column schemas:
    ///
    /// * trajectory: `step,raw,normalized` with `normalized = raw − raw₀`, one row per
    ///   trace row in order;
    /// * landscape: the scan coordinates, then one column per objective;
    /// * distribution: `outcome,ideal,noisy,ipec,zne` with binary outcome labels;
    /// * cost: `N,stage,m,s_i,S_i,f_value,eta`.
    pub fn emit_plotdata(&self, kind: PlotKind) -> Result<String, MissingData> {
        let missing = || MissingData(kind);
        let mut out = String::new();
        match kind {
            PlotKind::Trajectory => {
                let first = self.rows.first().ok_or_else(missing)?.objective;
                out.push_str("step,raw,normalized\n");
                for (i, r) in self.rows.iter().enumerate() {
                    writeln!(out, "{i},{},{}", r.objective, r.objective - first).expect("string write");
                }
            }
            PlotKind::Landscape => {
                let l = self.summary.landscape.as_ref().ok_or_else(missing)?;
                writeln!(out, "{},{}", l.coordinates.join(","), l.objectives.join(",")).expect("string write");
                for p in &l.points {
                    writeln!(out, "{}", join(p.iter().copied())).expect("string write");
                }
            }
            PlotKind::Distribution => {
                let d = self.summary.distribution.as_ref().ok_or_else(missing)?;
                let n = d.ideal.len().trailing_zeros() as usize;
                out.push_str("outcome,ideal,noisy,ipec,zne\n");
                for k in 0..d.ideal.len() {
                    writeln!(out, "{},{},{},{},{}", outcome_label(k, n), d.ideal[k], d.noisy[k], d.ipec[k], d.zne[k]).expect("string write");
                }
            }
            PlotKind::Cost => out.push_str(&self.summary.cost.as_ref().ok_or_else(missing)?.csv),
        }
        Ok(out)
    }

    /// Writes `trace.csv`, `summary.json`, every available plot file and, for learning
    /// runs, `noise_model.json`. Returns the written paths.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![(dir.join("trace.csv"), self.trace_csv()), (dir.join("summary.json"), self.summary_json())];
        for kind in PlotKind::ALL {
            if let Ok(csv) = self.emit_plotdata(kind) {
                files.push((dir.join(kind.file_name()), csv));
            }
        }
        if let Some(l) = &self.summary.learn {
            files.push((dir.join("noise_model.json"), serde_json::to_string_pretty(&l.noise_model).expect("json value")));
        }
        for (path, body) in &files {
            std::fs::write(path, body)?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
