use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{check_fraction, gamma, PauliChannel};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// `Λ^{−m}` for one channel together with its amplification factor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbRep {
    pub channel: PauliChannel,
    pub m: f64,
    pub gamma: f64,
}

impl QuasiProbRep {
    pub fn new(channel: PauliChannel, m: f64) -> Result<Self> {
        let gamma = channel.gamma(m)?;
        Ok(QuasiProbRep { channel, m, gamma })
    }

    /// Signed weights `(Γ_k(1−mε_k), −Γ_k mε_k)` of each factor; each pair sums to 1.
    pub fn factor_weights(&self) -> Vec<(f64, f64)> {
        self.channel
            .terms()
            .iter()
            .map(|t| {
                let me = self.m * t.rate;
                let g = 1.0 / (1.0 - 2.0 * me);
                (g * (1.0 - me), -g * me)
            })
            .collect()
    }
}

/// One draw from the quasi-probability decomposition of `Λ^{−m}` over a list of
/// noisy locations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InsertionPattern {
    /// Indices, in the flattened (location, term) order, of terms that drew their Pauli.
    pub picks: Vec<u32>,
    /// `(−1)^{picks.len()}`
    pub sign: i8,
    /// Product Pauli per location (local to the gate), identity products omitted,
    /// locations increasing.
    pub resolved: Vec<(usize, PauliString)>,
}

impl InsertionPattern {
    pub fn identity() -> Self {
        InsertionPattern { picks: Vec::new(), sign: 1, resolved: Vec::new() }
    }

    /// Builds the pattern from picked flattened term indices (sorted ascending).
    pub fn from_picks(channels: &[PauliChannel], mut picks: Vec<u32>) -> Result<Self> {
        picks.sort_unstable();
        picks.dedup();
        let total: usize = channels.iter().map(|c| c.terms().len()).sum();
        if picks.last().is_some_and(|&p| p as usize >= total) {
            return Err(Error::SetMismatch(format!("pick index beyond {total} terms")));
        }
        let mut resolved = Vec::new();
        let mut offset = 0usize;
        let mut it = picks.iter().peekable();
        for (loc, ch) in channels.iter().enumerate() {
            let end = offset + ch.terms().len();
            let mut acc = PauliString::identity(ch.width());
            while let Some(&&p) = it.peek() {
                if p as usize >= end {
                    break;
                }
                acc = acc.mul(&ch.terms()[p as usize - offset].pauli).1;
                it.next();
            }
            if !acc.is_identity() {
                resolved.push((loc, acc));
            }
            offset = end;
        }
        let sign = if picks.len().is_multiple_of(2) { 1 } else { -1 };
        Ok(InsertionPattern { picks, sign, resolved })
    }

    /// Dense per-term choice, `true` = Pauli.
    pub fn picks_dense(&self, total_terms: usize) -> Vec<bool> {
        let mut v = vec![false; total_terms];
        for &p in &self.picks {
            v[p as usize] = true;
        }
        v
    }
}

/// Draws each term's Pauli with probability `mε_k`, identity otherwise.
pub fn sample_insertion<R: Rng + ?Sized>(channels: &[PauliChannel], m: f64, rng: &mut R) -> Result<InsertionPattern> {
    check_fraction(m)?;
    let mut picks = Vec::new();
    let mut idx = 0u32;
    for ch in channels {
        for t in ch.terms() {
            if rng.gen::<f64>() < m * t.rate {
                picks.push(idx);
            }
            idx += 1;
        }
    }
    InsertionPattern::from_picks(channels, picks)
}

/// Every pattern with its probability; `2^terms` entries, so for small channels only.
pub fn enumerate_patterns(channels: &[PauliChannel], m: f64) -> Result<Vec<(InsertionPattern, f64)>> {
    check_fraction(m)?;
    let rates: Vec<f64> = channels.iter().flat_map(|c| c.terms().iter().map(|t| m * t.rate)).collect();
    if rates.len() > 24 {
        return Err(Error::Invalid(format!("{} terms is too many to enumerate", rates.len())));
    }
    gamma(channels, m)?;
    (0u64..1 << rates.len())
        .map(|mask| {
            let picks: Vec<u32> = (0..rates.len() as u32).filter(|i| mask >> i & 1 == 1).collect();
            let prob = rates
                .iter()
                .enumerate()
                .map(|(i, &r)| if mask >> i & 1 == 1 { r } else { 1.0 - r })
                .product();
            Ok((InsertionPattern::from_picks(channels, picks)?, prob))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::depolarizing_model;
    use crate::rng::substream;

    #[test]
    fn weights_normalised() {
        let q = QuasiProbRep::new(depolarizing_model(0.05, [0, 1]).unwrap(), 1.0).unwrap();
        for (a, b) in q.factor_weights() {
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        assert!((q.gamma - 0.975f64.powi(-6)).abs() < 1e-12);
    }

    #[test]
    fn m_zero_is_identity() {
        let chs = vec![depolarizing_model(0.3, [0, 1]).unwrap(); 4];
        let mut rng = substream(1, 0, 0);
        for _ in 0..100 {
            assert_eq!(sample_insertion(&chs, 0.0, &mut rng).unwrap(), InsertionPattern::identity());
        }
    }

    #[test]
    fn product_to_identity_is_dropped() {
        // X·Y·Z on the control is proportional to the identity.
        let chs = vec![depolarizing_model(0.05, [0, 1]).unwrap()];
        let p = InsertionPattern::from_picks(&chs, vec![0, 1, 2]).unwrap();
        assert!(p.resolved.is_empty());
        assert_eq!(p.sign, -1);
        let p = InsertionPattern::from_picks(&chs, vec![0, 3]).unwrap();
        assert_eq!(p.resolved, vec![(0, "XX".parse().unwrap())]);
    }

    #[test]
    fn enumeration_probabilities_sum_to_one() {
        let chs = vec![depolarizing_model(0.05, [0, 1]).unwrap()];
        let all = enumerate_patterns(&chs, 1.0).unwrap();
        assert_eq!(all.len(), 64);
        let total: f64 = all.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn enumeration_is_a_quasi_distribution(eps in 0.0f64..0.3, m in 0.0f64..1.0) {
            let ch = depolarizing_model(eps, [0, 1]).unwrap();
            let g = ch.gamma(m).unwrap();
            let patterns = enumerate_patterns(std::slice::from_ref(&ch), m).unwrap();
            let total: f64 = patterns.iter().map(|(_, p)| p).sum();
            let signed: f64 = patterns.iter().map(|(pat, p)| f64::from(pat.sign) * p).sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-12);
            // quasi weights Γ·sign·p sum to one
            proptest::prop_assert!((g * signed - 1.0).abs() < 1e-10);
        }
    }
}
