use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{gamma, sample_insertion, InsertionPattern, PauliChannel};
use crate::rng::substream;
use crate::sim::Circuit;

/// How each sampled circuit is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// Exact expectation of each instance circuit.
    ExactExpectation,
    /// Empirical mean over this many shots per instance.
    Shots(u32),
}

/// A frozen list of insertion patterns drawn from `Λ^{−m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    instances: Vec<InsertionPattern>,
    m: f64,
    gamma: f64,
    seed: u64,
    stream: u64,
    mode: InstanceMode,
    channels: Vec<PauliChannel>,
}

impl SampleSet {
    pub fn instances(&self) -> &[InsertionPattern] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn mode(&self) -> InstanceMode {
        self.mode
    }

    pub fn channels(&self) -> &[PauliChannel] {
        &self.channels
    }

    /// Copy evaluated in a different mode; the instances are shared.
    pub fn with_mode(&self, mode: InstanceMode) -> SampleSet {
        SampleSet { mode, ..self.clone() }
    }

    /// Errors unless `circuit` carries the channels this set was drawn for.
    pub fn check_circuit(&self, circuit: &Circuit) -> Result<()> {
        let locs = circuit.noisy_locations();
        if locs.len() != self.channels.len() {
            return Err(Error::SetMismatch(format!(
                "set drawn for {} locations, circuit has {}",
                self.channels.len(),
                locs.len()
            )));
        }
        for (i, (l, c)) in locs.iter().zip(&self.channels).enumerate() {
            if l.channel.as_ref() != c {
                return Err(Error::SetMismatch(format!("channel differs at location {i}")));
            }
        }
        Ok(())
    }

    /// Fraction of instances that picked each flattened term.
    pub fn pick_rates(&self) -> Vec<f64> {
        let total: usize = self.channels.iter().map(|c| c.terms().len()).sum();
        let mut counts = vec![0usize; total];
        for inst in &self.instances {
            for &p in &inst.picks {
                counts[p as usize] += 1;
            }
        }
        counts.into_iter().map(|c| c as f64 / self.instances.len() as f64).collect()
    }
}

/// Draws `size` patterns; instance `j` uses random stream `(seed, 0, j)`.
pub fn build_sample_set(channels: &[PauliChannel], m: f64, size: usize, seed: u64, mode: InstanceMode) -> Result<SampleSet> {
    build_sample_set_stream(channels, m, size, seed, 0, mode)
}

/// As [`build_sample_set`] with instance `j` drawn from stream `(seed, stream, j)`.
pub fn build_sample_set_stream(
    channels: &[PauliChannel],
    m: f64,
    size: usize,
    seed: u64,
    stream: u64,
    mode: InstanceMode,
) -> Result<SampleSet> {
    if size == 0 {
        return Err(Error::Invalid("sample set size must be at least 1".into()));
    }
    if let InstanceMode::Shots(0) = mode {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    let g = gamma(channels, m)?;
    let instances = (0..size as u64)
        .map(|j| sample_insertion(channels, m, &mut substream(seed, stream, j)))
        .collect::<Result<_>>()?;
    Ok(SampleSet { instances, m, gamma: g, seed, stream, mode, channels: channels.to_vec() })
}

impl SampleSet {
    /// Set with explicitly given instances (seed 0), e.g. a full pattern enumeration.
    pub fn from_patterns(channels: &[PauliChannel], m: f64, instances: Vec<InsertionPattern>, mode: InstanceMode) -> Result<SampleSet> {
        if instances.is_empty() {
            return Err(Error::Invalid("sample set size must be at least 1".into()));
        }
        let g = gamma(channels, m)?;
        Ok(SampleSet { instances, m, gamma: g, seed: 0, stream: 0, mode, channels: channels.to_vec() })
    }
}

/// Location channels of a noisy circuit, in order.
pub fn circuit_channels(circuit: &Circuit) -> Vec<PauliChannel> {
    circuit.noisy_locations().iter().map(|l| l.channel.as_ref().clone()).collect()
}
