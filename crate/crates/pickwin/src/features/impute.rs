//! Matrix completion via iterated soft-thresholded SVD (Soft-Impute).
//!
//! Missing entries are filled from a low-rank approximation found by
//! minimising `0.5 * ||observed residual||_F^2 + lambda * ||Z||_*`. The
//! regularisation weight is tied to the data — the largest singular value of
//! the zero-filled matrix divided by 100 — and iteration stops once the
//! relative Frobenius change of the imputed entries drops below 0.001.

use nalgebra::DMatrix;

use super::FeatureMatrix;
use crate::{Error, Result};

const CONVERGENCE_THRESHOLD: f64 = 1e-3;
const LAMBDA_DIVISOR: f64 = 100.0;
const MAX_ITERATIONS: usize = 500;

/// Fill the missing entries of a feature matrix. Observed entries are copied
/// through bit-for-bit; only missing cells receive imputed values.
pub fn soft_impute(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    soft_impute_with_trace(matrix).map(|(m, _)| m)
}

/// As [`soft_impute`], also returning the per-iteration objective
/// `0.5 * ||P_obs(X - Z)||_F^2 + lambda * ||Z||_*`, which is nonincreasing.
pub fn soft_impute_with_trace(matrix: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<f64>)> {
    let m = matrix.num_features();
    let n = matrix.num_companies();
    if n == 0 {
        return Err(Error::invalid("soft impute", "matrix has no companies"));
    }
    for (i, count) in matrix.row_observed_counts().into_iter().enumerate() {
        if count == 0 {
            return Err(Error::EmptyFeatureRow {
                name: matrix.feature_names()[i].clone(),
            });
        }
    }
    for (j, count) in matrix.column_observed_counts().into_iter().enumerate() {
        if count == 0 {
            return Err(Error::EmptyFeatureColumn {
                company_id: matrix.company_ids()[j].clone(),
            });
        }
    }
    if matrix.is_complete() {
        return Ok((matrix.clone(), Vec::new()));
    }

    // Zero-filled matrix: sets the regularisation scale and the start point.
    let zero_filled = DMatrix::from_fn(m, n, |i, j| matrix.get(i, j).unwrap_or(0.0));
    let lambda = zero_filled
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
        / LAMBDA_DIVISOR;

    // `working` always holds the observed entries verbatim plus the current
    // guess for the missing ones.
    let mut working = zero_filled;
    let mut objectives = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        let svd = working.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd requested u");
        let v_t = svd.v_t.as_ref().expect("svd requested v_t");
        let mut thresholded = svd.singular_values.clone();
        for s in thresholded.iter_mut() {
            *s = (*s - lambda).max(0.0);
        }
        let low_rank = u * DMatrix::from_diagonal(&thresholded) * v_t;

        let mut sq_err = 0.0f64;
        let mut change_sq = 0.0f64;
        let mut prev_sq = 0.0f64;
        for j in 0..n {
            for i in 0..m {
                match matrix.get(i, j) {
                    Some(observed) => {
                        let r = observed - low_rank[(i, j)];
                        sq_err += r * r;
                    }
                    None => {
                        let prev = working[(i, j)];
                        let next = low_rank[(i, j)];
                        change_sq += (next - prev) * (next - prev);
                        prev_sq += prev * prev;
                    }
                }
            }
        }
        objectives.push(0.5 * sq_err + lambda * thresholded.iter().sum::<f64>());

        // Restore observed entries; keep the new guesses for missing ones.
        for j in 0..n {
            for i in 0..m {
                working[(i, j)] = match matrix.get(i, j) {
                    Some(observed) => observed,
                    None => low_rank[(i, j)],
                };
            }
        }

        let converged = if prev_sq > 0.0 {
            (change_sq / prev_sq).sqrt() < CONVERGENCE_THRESHOLD
        } else {
            change_sq == 0.0
        };
        if converged {
            break;
        }
    }

    let mut imputed = matrix.clone();
    for j in 0..n {
        for i in 0..m {
            if !matrix.is_observed(i, j) {
                imputed.set(i, j, working[(i, j)]);
            }
        }
    }
    Ok((imputed, objectives))
}
