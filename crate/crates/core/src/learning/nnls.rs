//! Non-negative least squares (Lawson–Hanson active set).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Unconstrained least squares restricted to the columns in `passive`.
fn restricted_ls(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> Result<DVector<f64>> {
    let sub = a.select_columns(passive);
    let svd = sub.svd(true, true);
    let z = svd.solve(b, 1e-12).map_err(|e| Error::Singular(e.to_string()))?;
    let mut full = DVector::zeros(a.ncols());
    for (j, &c) in passive.iter().enumerate() {
        full[c] = z[j];
    }
    Ok(full)
}

/// `argmin ‖Ax − b‖` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("{} rows vs {} targets", a.nrows(), b.len())));
    }
    let n = a.ncols();
    let tol = 1e-12 * (1.0 + a.norm() * b.norm());
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    for _ in 0..(3 * n + 30) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { return Ok(x) };
        passive[j] = true;
        loop {
            let p: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = restricted_ls(a, b, &p)?;
            if p.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            // step back to the boundary and drop the variables that hit zero
            let alpha = p
                .iter()
                .filter(|&&k| z[k] <= 0.0)
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for &k in &p {
                if x[k] <= tol {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    Err(Error::Invalid("NNLS did not converge".into()))
}

/// Rank of `a` and an orthonormal basis of its null space.
pub fn null_space(a: &DMatrix<f64>) -> (usize, Vec<Vec<f64>>) {
    let n = a.ncols();
    // pad so the SVD yields a full set of right singular vectors
    let padded = if a.nrows() < n { a.clone().resize_vertically(n, 0.0) } else { a.clone() };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * n as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let null = (0..n)
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect();
    (rank, null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_design() {
        let a = DMatrix::<f64>::identity(3, 3);
        let x = nnls(&a, &DVector::from_vec(vec![1.0, 2.0, 0.5])).unwrap();
        assert!((x - DVector::from_vec(vec![1.0, 2.0, 0.5])).norm() < 1e-12);
        let x = nnls(&a, &DVector::from_vec(vec![1.0, -2.0, 0.5])).unwrap();
        assert_eq!(x[1], 0.0);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_deficient_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 1.0]);
        let (rank, ns) = null_space(&a);
        assert_eq!(rank, 2);
        assert_eq!(ns.len(), 1);
        let v = DVector::from_vec(ns[0].clone());
        assert!((&a * v).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn kkt_conditions(entries in proptest::collection::vec(-1.0f64..1.0, 24), rhs in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let a = DMatrix::from_row_slice(6, 4, &entries);
            let b = DVector::from_vec(rhs);
            let x = nnls(&a, &b).unwrap();
            let g = a.transpose() * (&a * &x - &b);
            for j in 0..4 {
                prop_assert!(x[j] >= 0.0);
                if x[j] == 0.0 {
                    prop_assert!(g[j] >= -1e-8, "gradient {} on active set", g[j]);
                } else {
                    prop_assert!(g[j].abs() < 1e-8, "gradient {} on free set", g[j]);
                }
            }
        }
    }
}
