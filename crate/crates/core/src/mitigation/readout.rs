//! Classical readout-error correction with a tensor-product confusion matrix.

use crate::error::{Error, Result};

/// `confusion[q][observed][true]` for qubit `q`; columns sum to 1.
pub type Confusion = [[f64; 2]; 2];

/// Applies the inverse of `⊗_q confusion[q]` to the empirical distribution of `counts`.
pub fn readout_correct(counts: &[u64], confusion: &[Confusion]) -> Result<Vec<f64>> {
    let n = confusion.len();
    if counts.len() != 1 << n {
        return Err(Error::Dimension(format!("{} counts for {n} qubits", counts.len())));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Invalid("no counts".into()));
    }
    let mut p: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    for (q, m) in confusion.iter().enumerate() {
        for col in 0..2 {
            let s = m[0][col] + m[1][col];
            if (s - 1.0).abs() > 1e-9 || m[0][col] < 0.0 || m[1][col] < 0.0 {
                return Err(Error::Invalid(format!("confusion matrix of qubit {q} is not column-stochastic")));
            }
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::Singular(format!("confusion matrix of qubit {q}")));
        }
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let bit = 1usize << q;
        for k in 0..p.len() {
            if k & bit == 0 {
                let (a, b) = (p[k], p[k | bit]);
                p[k] = inv[0][0] * a + inv[0][1] * b;
                p[k | bit] = inv[1][0] * a + inv[1][1] * b;
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::sim::sample_counts;

    const ID: Confusion = [[1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn identity_and_single_flip() {
        assert_eq!(readout_correct(&[3, 1, 0, 4], &[ID, ID]).unwrap(), vec![0.375, 0.125, 0.0, 0.5]);
        let q = 0.1;
        let flip = [[1.0 - q, q], [q, 1.0 - q]];
        let p = readout_correct(&[900, 100], &[flip]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        assert!(readout_correct(&[1, 1], &[[[0.5, 0.5], [0.5, 0.5]]]).is_err());
        assert!(readout_correct(&[1, 1], &[[[0.5, 0.2], [0.2, 0.8]]]).is_err());
    }

    #[test]
    fn round_trip() {
        let truth = [0.4, 0.1, 0.2, 0.3];
        let conf = [[[0.97, 0.05], [0.03, 0.95]], [[0.92, 0.1], [0.08, 0.9]]];
        // observed distribution = (C1 ⊗ C0) truth
        let mut obs = truth.to_vec();
        for (q, m) in conf.iter().enumerate() {
            let bit = 1 << q;
            for k in 0..4 {
                if k & bit == 0 {
                    let (a, b) = (obs[k], obs[k | bit]);
                    obs[k] = m[0][0] * a + m[0][1] * b;
                    obs[k | bit] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
        let counts = sample_counts(&obs, 1_000_000, &mut substream(9, 0, 0)).unwrap();
        let p = readout_correct(&counts, &conf).unwrap();
        let tv: f64 = p.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01, "{tv}");
    }
}
