use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::QaoaProblem;
use crate::error::{Error, Result};

/// Symmetric offsets `−half_width … +half_width` in `points` steps; one point is the
/// centre only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub half_width: f64,
    pub points: usize,
}

impl ScanGrid {
    pub fn offsets(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![0.0],
            k => (0..k)
                .map(|i| -self.half_width + 2.0 * self.half_width * i as f64 / (k - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    /// Offsets applied to layer 1 (rows) and layer 2 (columns).
    pub offsets: Vec<f64>,
    /// `values[i][j]` at row offset `i`, column offset `j`. One column when `p = 1`.
    pub values: Vec<Vec<f64>>,
}

impl Landscape {
    /// `(row, column)` of the smallest value.
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v < self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

/// Moves `δ` from the mixer angle to the cost angle of `layer`, keeping their sum.
fn shift(params: &mut [f64], p: usize, layer: usize, delta: f64) {
    params[layer] += delta;
    params[p + layer] -= delta;
}

/// Scans the slice where every layer keeps its cost + mixer sum: layer 1's split varies
/// along rows and layer 2's along columns; further layers stay at `base`.
pub fn landscape_constraint_scan(
    problem: &QaoaProblem,
    base: &[f64],
    grid: &ScanGrid,
    objective: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<Landscape> {
    problem.check_params(base)?;
    let p = problem.p;
    if p == 0 {
        return Err(Error::Invalid("landscape needs p ≥ 1".into()));
    }
    let offsets = grid.offsets();
    let cols = if p >= 2 { offsets.clone() } else { vec![0.0] };
    let points: Vec<(usize, usize)> = (0..offsets.len()).flat_map(|i| (0..cols.len()).map(move |j| (i, j))).collect();
    let flat: Vec<f64> = points
        .par_iter()
        .map(|&(i, j)| {
            let mut x = base.to_vec();
            shift(&mut x, p, 0, offsets[i]);
            if p >= 2 {
                shift(&mut x, p, 1, cols[j]);
            }
            objective(&x)
        })
        .collect::<Result<_>>()?;
    let values = flat.chunks(cols.len()).map(|c| c.to_vec()).collect();
    Ok(Landscape { offsets, values })
}

/// Values at `x·a + (1−x)·b` for `samples` uniform `x` in `[0, 1]`.
pub fn landscape_line_scan(
    a: &[f64],
    b: &[f64],
    samples: usize,
    objective: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} parameters", a.len(), b.len())));
    }
    if samples < 2 {
        return Err(Error::Invalid("line scan needs at least 2 samples".into()));
    }
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 / (samples - 1) as f64;
            let pt: Vec<f64> = a.iter().zip(b).map(|(u, v)| x * u + (1.0 - x) * v).collect();
            Ok((x, objective(&pt)?))
        })
        .collect()
}
