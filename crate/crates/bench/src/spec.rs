//! Experiment spec files: flat `key = value` lines with dotted sections.
//!
//! ```text
//! name = table1_ipec
//! graph = ring_4
//! circuit.p = 2
//! noise.epsilon = 0.05
//! strategy = ipec
//! seed = 3
//! mitigation.samples = 1000
//! optimizer.x0 = 0.1, 0.5, 0.7, 0.9
//! ```
//!
//! `#` starts a comment. Lists are comma separated. Relative file paths resolve
//! against the spec file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use appec::noise::{depolarizing_model, local_depolarizing, NoiseModel, PauliChannel};
use appec::qaoa::{Graph, QaoaProblem};
use appec::sim::GateKind;
use appec::OptimizerConfig;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: field `{key}`: {msg}")]
    Field { line: usize, key: String, msg: String },
    #[error("unknown field `{key}` (line {line})")]
    Unknown { line: usize, key: String },
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Ideal,
    Noisy,
    PecFresh,
    Ipec,
    Appec,
    Zne,
    Distribution,
    Landscape,
    Learn,
}

impl Strategy {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Strategy::PecFresh | Strategy::Ipec | Strategy::Appec | Strategy::Distribution | Strategy::Learn)
    }

    /// Strategies driven by a single optimizer run.
    pub fn is_optimization(self) -> bool {
        matches!(self, Strategy::Ideal | Strategy::Noisy | Strategy::PecFresh | Strategy::Ipec | Strategy::Zne)
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ideal" => Strategy::Ideal,
            "noisy" => Strategy::Noisy,
            "pec_fresh" => Strategy::PecFresh,
            "ipec" => Strategy::Ipec,
            "appec" => Strategy::Appec,
            "zne" => Strategy::Zne,
            "distribution" => Strategy::Distribution,
            "landscape" => Strategy::Landscape,
            "learn" => Strategy::Learn,
            _ => return Err(format!("unknown strategy {s:?}")),
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Two-qubit noise attached to every CNOT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `D_ε ⊗ D_ε`, six terms of rate `(1 − √(1 − 4ε/3))/2`.
    Depolarizing { epsilon: f64 },
    /// Six terms of rate `ε/4`.
    Quarter { epsilon: f64 },
    /// Channel terms read from a noise-model file (`cx` tag).
    File { channel: PauliChannel },
}

impl NoiseSpec {
    pub fn channel(&self) -> appec::Result<PauliChannel> {
        match self {
            NoiseSpec::Depolarizing { epsilon } => local_depolarizing(*epsilon, [0, 1]),
            NoiseSpec::Quarter { epsilon } => depolarizing_model(*epsilon, [0, 1]),
            NoiseSpec::File { channel } => Ok(channel.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneSpec {
    /// Each factor `m` is extrapolated from the pair `{1, m}`; the first listed run is
    /// the one optimized unless `zne.pairwise = false`, which fits all factors at once.
    pub factors: Vec<f64>,
    pub pairwise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppecSpec {
    /// Explicit mitigation fractions; empty means a linear schedule of `stages`.
    pub fractions: Vec<f64>,
    pub stages: usize,
    pub q: f64,
    pub cutoff: Option<usize>,
    pub full_reference: bool,
    pub stop_threshold: Option<f64>,
    pub stop_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeKind {
    Constraint { half_width: f64, points: usize },
    Line { a: Vec<f64>, b: Vec<f64>, samples: usize },
}

/// Objective evaluated by scans: ideal, noisy, or exact `Λ^{−m}` mitigation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanObjective {
    Ideal,
    Noisy,
    Mitigated { m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSpec {
    pub kind: LandscapeKind,
    pub objectives: Vec<ScanObjective>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSpec {
    pub depths: Vec<usize>,
    pub twirls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub graph: Graph,
    pub p: usize,
    pub noise: Option<NoiseSpec>,
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub restarts: usize,
    pub optimizer: OptimizerConfig,
    pub x0: Vec<f64>,
    pub samples: usize,
    /// Shots per instance; `None` evaluates instances exactly.
    pub shots: Option<u32>,
    pub zne: ZneSpec,
    pub appec: AppecSpec,
    /// Stage counts for the cost study.
    pub cost_stages: Vec<usize>,
    pub landscape: Option<LandscapeSpec>,
    pub learn: LearnSpec,
    /// Also optimize the ideal objective from `x0` and report distances to its optimum.
    pub reference_ideal: bool,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn problem(&self) -> QaoaProblem {
        QaoaProblem::new(self.graph.clone(), self.p)
    }

    pub fn channel(&self) -> Result<PauliChannel, SpecError> {
        self.noise
            .as_ref()
            .ok_or(SpecError::Missing("noise.epsilon"))?
            .channel()
            .map_err(|e| SpecError::Invalid(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64, SpecError> {
        self.seed.ok_or(SpecError::Missing("seed"))
    }

    /// SHA-256 over every semantic field; the output location is excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, SpecError> {
        let mut fields = Fields::parse(text)?;
        let spec = build(&mut fields, base)?;
        if let Some((key, line)) = fields.remaining() {
            return Err(SpecError::Unknown { line, key });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: String| Err(SpecError::Invalid(m));
        if self.p == 0 {
            return bad("circuit.p must be at least 1".into());
        }
        if self.x0.len() != 2 * self.p {
            return bad(format!("optimizer.x0 has {} entries, expected 2p = {}", self.x0.len(), 2 * self.p));
        }
        if self.strategy.is_stochastic() && self.seed.is_none() {
            return bad(format!("strategy {} needs a seed", self.strategy));
        }
        if self.strategy != Strategy::Ideal && self.strategy != Strategy::Landscape && self.noise.is_none() {
            return bad(format!("strategy {} needs noise.epsilon or noise.file", self.strategy));
        }
        if self.restarts > 0 && !self.strategy.is_optimization() {
            return bad(format!("restarts apply to single optimizer runs, not {}", self.strategy));
        }
        if self.samples == 0 {
            return bad("mitigation.samples must be positive".into());
        }
        self.optimizer.validate().map_err(|e| SpecError::Invalid(e.to_string()))?;
        if let Some(n) = &self.noise {
            n.channel().map_err(|e| SpecError::Invalid(format!("noise: {e}")))?;
        }
        if self.zne.factors.len() < 2 || self.zne.factors[0] != 1.0 {
            return bad("zne.factors must start at 1 and hold at least two entries".into());
        }
        if self.appec.fractions.is_empty() && self.appec.stages == 0 {
            return bad("appec.stages must be positive".into());
        }
        if self.cost_stages.contains(&0) {
            return bad("cost.stages entries must be positive".into());
        }
        if let Some(LandscapeSpec { kind: LandscapeKind::Line { a, b, .. }, .. }) = &self.landscape {
            if a.len() != 2 * self.p || b.len() != 2 * self.p {
                return bad("landscape.a and landscape.b need 2p entries".into());
            }
        }
        if self.strategy == Strategy::Landscape && self.landscape.is_none() {
            return bad("strategy landscape needs landscape.kind".into());
        }
        Ok(())
    }
}

/// Raw key-value pairs with their line numbers; consumed as fields are read.
struct Fields(BTreeMap<String, (usize, String)>);

impl Fields {
    fn parse(text: &str) -> Result<Self, SpecError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| SpecError::Syntax { line, msg: format!("expected `key = value`, got {content:?}") })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                return Err(SpecError::Syntax { line, msg: format!("bad key {k:?}") });
            }
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(SpecError::Syntax { line, msg: format!("`{k}` already set on line {first}") });
            }
        }
        Ok(Fields(map))
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, SpecError>
    where
        T::Err: fmt::Display,
    {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| SpecError::Field { line, key: key.to_string(), msg: format!("{e}") }),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, SpecError>
    where
        T::Err: fmt::Display,
    {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| SpecError::Field { line, key: key.to_string(), msg: format!("{s:?}: {e}") }))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn remaining(&self) -> Option<(String, usize)> {
        self.0.iter().next().map(|(k, (l, _))| (k.clone(), *l))
    }
}

fn read_file(base: &Path, rel: &str) -> Result<String, SpecError> {
    let path = base.join(rel);
    std::fs::read_to_string(&path).map_err(|source| SpecError::Io { path, source })
}

fn graph(f: &mut Fields, base: &Path) -> Result<Graph, SpecError> {
    if let Some((line, name)) = f.take_raw("graph") {
        return name.parse().map_err(|e: appec::Error| SpecError::Field { line, key: "graph".into(), msg: e.to_string() });
    }
    if let Some((line, file)) = f.take_raw("graph.file") {
        return Graph::from_json(&read_file(base, &file)?)
            .map_err(|e| SpecError::Field { line, key: "graph.file".into(), msg: e.to_string() });
    }
    let n: usize = f.take("graph.n")?.ok_or(SpecError::Missing("graph"))?;
    let (line, edges) = f.take_raw("graph.edges").ok_or(SpecError::Missing("graph.edges"))?;
    let field = |msg: String| SpecError::Field { line, key: "graph.edges".into(), msg };
    let edges = edges
        .split(',')
        .map(|e| {
            let (a, b) = e.trim().split_once('-').ok_or_else(|| field(format!("edge {e:?} is not `a-b`")))?;
            let a = a.trim().parse().map_err(|_| field(format!("bad vertex in {e:?}")))?;
            let b = b.trim().parse().map_err(|_| field(format!("bad vertex in {e:?}")))?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, SpecError>>()?;
    Graph::new(n, edges).map_err(|e| field(e.to_string()))
}

fn noise(f: &mut Fields, base: &Path) -> Result<Option<NoiseSpec>, SpecError> {
    let model = f.take_raw("noise.model");
    if let Some((line, file)) = f.take_raw("noise.file") {
        let field = |msg: String| SpecError::Field { line, key: "noise.file".into(), msg };
        let nm = NoiseModel::from_json(&read_file(base, &file)?).map_err(|e| field(e.to_string()))?;
        let channel = nm
            .channel_for(&GateKind::Cnot, &[0, 1])
            .map_err(|e| field(e.to_string()))?
            .ok_or_else(|| field("no `cx` channel in file".into()))?;
        return Ok(Some(NoiseSpec::File { channel }));
    }
    let Some(epsilon) = f.take::<f64>("noise.epsilon")? else {
        return Ok(None);
    };
    match model {
        None => Ok(Some(NoiseSpec::Depolarizing { epsilon })),
        Some((_, m)) if m == "depolarizing" => Ok(Some(NoiseSpec::Depolarizing { epsilon })),
        Some((_, m)) if m == "quarter" => Ok(Some(NoiseSpec::Quarter { epsilon })),
        Some((line, m)) => Err(SpecError::Field { line, key: "noise.model".into(), msg: format!("unknown model {m:?} (depolarizing, quarter)") }),
    }
}

fn scan_objectives(f: &mut Fields) -> Result<Vec<ScanObjective>, SpecError> {
    let Some((line, v)) = f.take_raw("landscape.objectives") else {
        return Ok(vec![ScanObjective::Ideal, ScanObjective::Noisy]);
    };
    v.split(',')
        .map(|s| {
            let s = s.trim();
            match s {
                "ideal" => Ok(ScanObjective::Ideal),
                "noisy" => Ok(ScanObjective::Noisy),
                _ => s
                    .strip_prefix("m=")
                    .and_then(|m| m.parse().ok())
                    .map(|m| ScanObjective::Mitigated { m })
                    .ok_or_else(|| SpecError::Field { line, key: "landscape.objectives".into(), msg: format!("{s:?} is not ideal, noisy or m=<fraction>") }),
            }
        })
        .collect()
}

fn landscape(f: &mut Fields) -> Result<Option<LandscapeSpec>, SpecError> {
    let Some((line, kind)) = f.take_raw("landscape.kind") else {
        return Ok(None);
    };
    let kind = match kind.as_str() {
        "constraint" => LandscapeKind::Constraint {
            half_width: f.take("landscape.half_width")?.unwrap_or(0.1),
            points: f.take("landscape.points")?.unwrap_or(21),
        },
        "line" => LandscapeKind::Line {
            a: f.list("landscape.a")?.ok_or(SpecError::Missing("landscape.a"))?,
            b: f.list("landscape.b")?.ok_or(SpecError::Missing("landscape.b"))?,
            samples: f.take("landscape.samples")?.unwrap_or(51),
        },
        other => {
            return Err(SpecError::Field { line, key: "landscape.kind".into(), msg: format!("{other:?} is not constraint or line") })
        }
    };
    Ok(Some(LandscapeSpec { kind, objectives: scan_objectives(f)? }))
}

fn build(f: &mut Fields, base: &Path) -> Result<ExperimentSpec, SpecError> {
    let name = f.take_raw("name").map(|(_, v)| v).ok_or(SpecError::Missing("name"))?;
    let graph = graph(f, base)?;
    let p = f.take("circuit.p")?.ok_or(SpecError::Missing("circuit.p"))?;
    let noise = noise(f, base)?;
    let strategy = f.take("strategy")?.ok_or(SpecError::Missing("strategy"))?;
    let defaults = OptimizerConfig::default();
    let optimizer = OptimizerConfig {
        max_steps: f.take("optimizer.max_steps")?.unwrap_or(defaults.max_steps),
        ftol: f.take("optimizer.ftol")?,
        xtol: match f.take::<String>("optimizer.xtol")?.as_deref() {
            None => defaults.xtol,
            Some("none") => None,
            Some(v) => Some(v.parse().map_err(|_| SpecError::Invalid(format!("optimizer.xtol: {v:?} is not a number")))?),
        },
        scale: f.take("optimizer.scale")?.unwrap_or(defaults.scale),
        relative: f.take("optimizer.relative")?.unwrap_or(true),
    };
    let x0 = f.list("optimizer.x0")?.ok_or(SpecError::Missing("optimizer.x0"))?;
    let shots = match f.take::<u32>("mitigation.shots")? {
        None | Some(0) => None,
        Some(s) => Some(s),
    };
    let stop_threshold = f.take("appec.stop.threshold")?;
    Ok(ExperimentSpec {
        name,
        graph,
        p,
        noise,
        strategy,
        seed: f.take("seed")?,
        restarts: f.take("restarts")?.unwrap_or(0),
        optimizer,
        x0,
        samples: f.take("mitigation.samples")?.unwrap_or(1000),
        shots,
        zne: ZneSpec {
            factors: f.list("zne.factors")?.unwrap_or_else(|| vec![1.0, 2.0]),
            pairwise: f.take("zne.pairwise")?.unwrap_or(true),
        },
        appec: AppecSpec {
            fractions: f.list("appec.fractions")?.unwrap_or_default(),
            stages: f.take("appec.stages")?.unwrap_or(4),
            q: f.take("appec.q")?.unwrap_or(40.0),
            cutoff: f.take("appec.cutoff")?,
            full_reference: f.take("appec.full_reference")?.unwrap_or(true),
            stop_threshold,
            stop_after: f.take("appec.stop.after")?.unwrap_or(1),
        },
        cost_stages: f.list("cost.stages")?.unwrap_or_else(|| (2..=7).collect()),
        landscape: landscape(f)?,
        learn: LearnSpec {
            depths: f.list("learn.depths")?.unwrap_or_else(|| appec::learning::DEFAULT_DEPTHS.to_vec()),
            twirls: f.take("learn.twirls")?.unwrap_or(30),
        },
        reference_ideal: f.take("reference.ideal")?.unwrap_or(false),
        output: f.take_raw("output.dir").map(|(_, v)| base.join(v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "name = t\ngraph = ring_4\ncircuit.p = 2\nnoise.epsilon = 0.05\nstrategy = ipec\nseed = 1\noptimizer.x0 = 0.1, 0.5, 0.7, 0.9\n";

    fn parse(s: &str) -> Result<ExperimentSpec, SpecError> {
        ExperimentSpec::parse(s, Path::new("."))
    }

    #[test]
    fn parses_basic_spec() {
        let s = parse(BASIC).unwrap();
        assert_eq!(s.graph.edges().len(), 4);
        assert_eq!(s.strategy, Strategy::Ipec);
        assert_eq!(s.x0, vec![0.1, 0.5, 0.7, 0.9]);
        assert_eq!(s.samples, 1000);
        assert!(s.optimizer.relative);
    }

    #[test]
    fn comments_and_explicit_edges() {
        let text = BASIC.replace("graph = ring_4", "# square\ngraph.n = 4\ngraph.edges = 0-1, 1-2, 2-3, 3-0  # ring");
        assert_eq!(parse(&text).unwrap().graph, parse(BASIC).unwrap().graph);
    }

    #[test]
    fn errors_carry_line_and_field() {
        let e = parse(&BASIC.replace("circuit.p = 2", "circuit.p = two")).unwrap_err();
        assert!(matches!(e, SpecError::Field { line: 3, ref key, .. } if key == "circuit.p"), "{e}");
        let e = parse(&format!("{BASIC}optimiser.steps = 3\n")).unwrap_err();
        assert!(matches!(e, SpecError::Unknown { line: 8, .. }), "{e}");
        let e = parse(&format!("{BASIC}seed = 2\n")).unwrap_err();
        assert!(matches!(e, SpecError::Syntax { line: 8, .. }), "{e}");
        assert!(matches!(parse("name = x\nno equals sign"), Err(SpecError::Syntax { line: 2, .. })));
    }

    #[test]
    fn validation() {
        assert!(parse(&BASIC.replace("seed = 1\n", "")).is_err());
        assert!(parse(&BASIC.replace("0.1, 0.5, 0.7, 0.9", "0.1, 0.5")).is_err());
        assert!(parse(&format!("{BASIC}restarts = 2\n").replace("ipec", "appec")).is_err());
        assert!(parse(&format!("{BASIC}zne.factors = 2, 3\n")).is_err());
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let a = parse(BASIC).unwrap();
        let b = parse(&format!("# reordered\n{}", BASIC.lines().rev().collect::<Vec<_>>().join("\n"))).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = parse(&format!("{BASIC}output.dir = elsewhere\n")).unwrap();
        assert_eq!(a.hash(), c.hash());
        let d = parse(&BASIC.replace("seed = 1", "seed = 2")).unwrap();
        assert_ne!(a.hash(), d.hash());
        let e = parse(&format!("{BASIC}mitigation.samples = 1000\n")).unwrap();
        assert_eq!(a.hash(), e.hash(), "explicit default is the same experiment");
    }
}
