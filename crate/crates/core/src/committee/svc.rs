//! Soft-margin support vector classifier with an RBF kernel, trained by
//! pairwise (SMO-style) coordinate ascent on the dual problem
//!
//! ```text
//! max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! The working pair is the first KKT violator scanned in index order together
//! with the partner of maximal |E_i - E_j|, which keeps the optimization
//! fully deterministic.

use super::{check_both_classes, FeatureVector, Sample};
use crate::Result;

const KKT_TOL: f64 = 1e-3;
const MAX_PASSES: usize = 10_000;

/// A fitted SVC: support coefficients `alpha_i y_i`, their feature vectors,
/// and the bias.
#[derive(Clone, Debug)]
pub struct SvcModel {
    support: Vec<(FeatureVector, f64)>,
    bias: f64,
    gamma: f64,
    /// Final dual objective value reached by the optimizer.
    pub dual_objective: f64,
}

fn kernel(gamma: f64, a: &FeatureVector, b: &FeatureVector) -> f64 {
    (-gamma * a.dist_sq(b)).exp()
}

/// Dual objective at multipliers `alpha` for the given samples and kernel
/// width; shared by the optimizer and the brute-force checks.
pub fn dual_objective(samples: &[Sample], alpha: &[f64], gamma: f64) -> f64 {
    let n = samples.len();
    let mut obj: f64 = alpha.iter().sum();
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            obj -= 0.5
                * alpha[i]
                * alpha[j]
                * (samples[i].y as f64)
                * (samples[j].y as f64)
                * kernel(gamma, &samples[i].f, &samples[j].f);
        }
    }
    obj
}

/// Fits the classifier to KKT tolerance 1e-3 with at most 10^4 passes.
/// Rejects single-class data.
pub fn fit_svc_rbf(samples: &[Sample], c: f64, gamma: f64) -> Result<SvcModel> {
    let (model, _) = fit_traced(samples, c, gamma)?;
    Ok(model)
}

/// Fit plus the dual objective recorded after every pass; the trace is
/// monotonically nondecreasing.
pub(crate) fn fit_traced(samples: &[Sample], c: f64, gamma: f64) -> Result<(SvcModel, Vec<f64>)> {
    check_both_classes(samples)?;
    let n = samples.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| kernel(gamma, &samples[i].f, &samples[j].f)).collect())
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.y as f64).collect();
    let mut alpha = vec![0.0f64; n];
    let mut b = 0.0f64;
    let mut trace = vec![dual_objective(samples, &alpha, gamma)];

    let decision = |alpha: &[f64], b: f64, i: usize, k: &Vec<Vec<f64>>| -> f64 {
        (0..n).map(|j| alpha[j] * y[j] * k[j][i]).sum::<f64>() + b
    };

    for _pass in 0..MAX_PASSES {
        let mut changed = 0;
        for i in 0..n {
            let e_i = decision(&alpha, b, i, &k) - y[i];
            let violates = (y[i] * e_i < -KKT_TOL && alpha[i] < c)
                || (y[i] * e_i > KKT_TOL && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            // Partners ranked by |E_i - E_j| (smallest index on ties); take
            // the first pair that actually moves.
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let errs: Vec<f64> = (0..n).map(|j| decision(&alpha, b, j, &k) - y[j]).collect();
            order.sort_by(|&a, &bb| {
                (e_i - errs[bb]).abs().total_cmp(&(e_i - errs[a]).abs()).then(a.cmp(&bb))
            });
            for j in order {
                let e_j = errs[j];
                let (a_i_old, a_j_old) = (alpha[i], alpha[j]);
                let (lo, hi) = if (y[i] - y[j]).abs() > f64::EPSILON {
                    ((a_j_old - a_i_old).max(0.0), (c + a_j_old - a_i_old).min(c))
                } else {
                    ((a_i_old + a_j_old - c).max(0.0), (a_i_old + a_j_old).min(c))
                };
                if hi - lo < 1e-12 {
                    continue;
                }
                let eta = 2.0 * k[i][j] - k[i][i] - k[j][j];
                if eta >= 0.0 {
                    continue;
                }
                let mut a_j = a_j_old - y[j] * (e_i - e_j) / eta;
                a_j = a_j.clamp(lo, hi);
                if (a_j - a_j_old).abs() < 1e-7 {
                    continue;
                }
                let a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j);
                alpha[i] = a_i;
                alpha[j] = a_j;

                let b1 =
                    b - e_i - y[i] * (a_i - a_i_old) * k[i][i] - y[j] * (a_j - a_j_old) * k[i][j];
                let b2 =
                    b - e_j - y[i] * (a_i - a_i_old) * k[i][j] - y[j] * (a_j - a_j_old) * k[j][j];
                b = if a_i > 0.0 && a_i < c {
                    b1
                } else if a_j > 0.0 && a_j < c {
                    b2
                } else {
                    (b1 + b2) / 2.0
                };
                changed += 1;
                break;
            }
        }
        trace.push(dual_objective(samples, &alpha, gamma));
        if changed == 0 {
            break;
        }
    }

    let support = samples
        .iter()
        .zip(&alpha)
        .filter(|(_, &a)| a > 0.0)
        .map(|(s, &a)| (s.f, a * s.y as f64))
        .collect();
    let model = SvcModel {
        support,
        bias: b,
        gamma,
        dual_objective: *trace.last().expect("trace nonempty"),
    };
    Ok((model, trace))
}

impl SvcModel {
    pub fn decision(&self, f: &FeatureVector) -> f64 {
        self.support
            .iter()
            .map(|(sv, coef)| coef * kernel(self.gamma, sv, f))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, f: &FeatureVector) -> i8 {
        if self.decision(f) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn n_support(&self) -> usize {
        self.support.len()
    }
}
